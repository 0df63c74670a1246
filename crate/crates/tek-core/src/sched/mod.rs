// SPDX-License-Identifier: Apache-2.0

//! Fair-share scheduler state: four fixed groups with configurable
//! shares, per-group run queues ordered by virtual run-time, and a
//! two-level pick (group by smallest consumed/share, thread by smallest
//! vruntime).
//!
//! The mediator fast path (regions, migration, restoration) lives in
//! [`crate::mediator`] and extends the same state; while the fast region
//! holds any thread, picks come from it exclusively and group
//! consumption accounting is frozen.

pub mod queue;
pub mod weights;

use std::collections::BTreeMap;

use crate::error::SchedError;
use crate::mediator::Region;
use crate::types::{Criticality, GroupName, Policy, Tid, NS_PER_TICK};
use queue::{RunQueue, VRuntime};
use weights::{NiceValue, Rat, WeightTable};

/// Positive share parts per group. Shares are relative: a group's share
/// is its part divided by the sum of all parts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupShares {
    parts: BTreeMap<GroupName, u32>,
}

impl GroupShares {
    pub fn new(parts: &[(GroupName, u32)]) -> Result<GroupShares, SchedError> {
        let mut map = BTreeMap::new();
        for (group, part) in parts {
            if *part == 0 {
                return Err(SchedError::NonPositiveGroupShare);
            }
            map.insert(*group, *part);
        }
        for group in GroupName::ALL {
            if !map.contains_key(&group) {
                return Err(SchedError::UnknownGroup(group.as_str().to_string()));
            }
        }
        Ok(GroupShares { parts: map })
    }

    pub fn part(&self, group: GroupName) -> u32 {
        self.parts[&group]
    }

    /// Fraction of the machine nominally owed to `group`.
    pub fn fraction(&self, group: GroupName) -> Rat {
        let total: u32 = self.parts.values().sum();
        Rat::new(self.parts[&group] as i128, total as i128)
    }
}

impl Default for GroupShares {
    fn default() -> Self {
        GroupShares::new(&[
            (GroupName::Urgent, 40),
            (GroupName::Normal, 30),
            (GroupName::Service, 20),
            (GroupName::Background, 10),
        ])
        .expect("default shares are positive")
    }
}

/// Where a live thread currently sits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    /// In its group's run queue (runnable; may be the running thread).
    Queued,
    /// Migrated into the fast region (runnable).
    FastRegion,
    /// Migrated into the lazy region (runnable but withheld).
    LazyRegion,
    /// Not runnable: blocked, not yet started, or exiting.
    Idle,
}

/// Per-thread scheduling state.
#[derive(Debug, Clone)]
pub struct Entity {
    pub group: GroupName,
    pub nice: NiceValue,
    pub policy: Policy,
    pub criticality: Criticality,
    pub vruntime: VRuntime,
    pub location: Location,
}

/// Placement decision made by [`SchedulerState::wake`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WakePlacement {
    Queued,
    LazyRegion,
}

#[derive(Debug, Clone)]
pub struct SchedulerState {
    pub(crate) table: WeightTable,
    pub(crate) shares: GroupShares,
    pub(crate) queues: BTreeMap<GroupName, RunQueue>,
    pub(crate) consumed_ticks: BTreeMap<GroupName, u64>,
    pub(crate) watermarks: BTreeMap<GroupName, VRuntime>,
    pub(crate) entities: BTreeMap<Tid, Entity>,
    pub(crate) fast: Region,
    pub(crate) lazy: Region,
}

impl SchedulerState {
    pub fn new(table: WeightTable, shares: GroupShares) -> SchedulerState {
        let queues = GroupName::ALL.iter().map(|g| (*g, RunQueue::new())).collect();
        let consumed_ticks = GroupName::ALL.iter().map(|g| (*g, 0u64)).collect();
        let watermarks = GroupName::ALL.iter().map(|g| (*g, VRuntime::ZERO)).collect();
        SchedulerState {
            table,
            shares,
            queues,
            consumed_ticks,
            watermarks,
            entities: BTreeMap::new(),
            fast: Region::new(),
            lazy: Region::new(),
        }
    }

    pub fn table(&self) -> &WeightTable {
        &self.table
    }

    pub fn shares(&self) -> &GroupShares {
        &self.shares
    }

    pub fn entity(&self, tid: Tid) -> Option<&Entity> {
        self.entities.get(&tid)
    }

    pub fn entities(&self) -> impl Iterator<Item = (Tid, &Entity)> {
        self.entities.iter().map(|(t, e)| (*t, e))
    }

    pub fn group_consumed(&self, group: GroupName) -> u64 {
        self.consumed_ticks[&group]
    }

    pub fn runnable_count(&self) -> usize {
        self.queues.values().map(RunQueue::len).sum::<usize>() + self.fast.len()
    }

    /// Admits a thread in the Idle state; it joins its queue on wake.
    pub fn admit(
        &mut self,
        tid: Tid,
        group: GroupName,
        nice: NiceValue,
        policy: Policy,
        criticality: Criticality,
    ) -> Result<(), SchedError> {
        if self.entities.contains_key(&tid) {
            return Err(SchedError::DuplicateThread(tid));
        }
        self.entities.insert(
            tid,
            Entity {
                group,
                nice,
                policy,
                criticality,
                vruntime: VRuntime::ZERO,
                location: Location::Idle,
            },
        );
        Ok(())
    }

    /// Floor vruntime for (re-)entering `group`: the queue minimum when
    /// the queue is non-empty, else the group's high-water mark. A thread
    /// may never re-enter beneath the group's current minimum, which
    /// stops long sleepers from monopolizing the CPU on wake.
    pub(crate) fn entry_floor(&self, group: GroupName) -> VRuntime {
        self.queues[&group]
            .min_vruntime()
            .unwrap_or(self.watermarks[&group])
    }

    /// Makes an idle thread runnable. While the fast region is engaged,
    /// non-time-critical threads are diverted into the lazy region
    /// instead of their queue, so the fast path keeps the machine.
    pub fn wake(&mut self, tid: Tid) -> Result<WakePlacement, SchedError> {
        let entity = self.entities.get(&tid).ok_or(SchedError::UnknownThread(tid))?;
        if entity.location != Location::Idle {
            return Err(SchedError::NotBlocked(tid));
        }
        let engaged = !self.fast.is_empty();
        if engaged && entity.criticality == Criticality::NonTimeCritical {
            let saved = self.saved_params_of(tid);
            let entity = self.entities.get_mut(&tid).expect("checked above");
            entity.location = Location::LazyRegion;
            self.lazy.push_back(tid, saved);
            return Ok(WakePlacement::LazyRegion);
        }
        let floor = self.entry_floor(entity.group);
        let entity = self.entities.get_mut(&tid).expect("checked above");
        entity.vruntime = entity.vruntime.max(floor);
        entity.location = Location::Queued;
        let group = entity.group;
        let vruntime = entity.vruntime;
        self.queues.get_mut(&group).expect("fixed groups").insert(tid, vruntime);
        Ok(WakePlacement::Queued)
    }

    /// Removes a runnable thread from wherever it sits and marks it idle.
    pub fn block(&mut self, tid: Tid) -> Result<(), SchedError> {
        let entity = self.entities.get(&tid).ok_or(SchedError::UnknownThread(tid))?;
        match entity.location {
            Location::Queued => {
                let group = entity.group;
                self.queues.get_mut(&group).expect("fixed groups").remove(tid);
            }
            Location::FastRegion => {
                self.fast.unlink(tid);
            }
            Location::LazyRegion => {
                self.lazy.unlink(tid);
            }
            Location::Idle => return Err(SchedError::NotRunnable(tid)),
        }
        self.entities.get_mut(&tid).expect("checked above").location = Location::Idle;
        Ok(())
    }

    /// Removes a thread entirely.
    pub fn terminate(&mut self, tid: Tid) -> Result<(), SchedError> {
        let entity = self.entities.get(&tid).ok_or(SchedError::UnknownThread(tid))?;
        match entity.location {
            Location::Queued => {
                let group = entity.group;
                self.queues.get_mut(&group).expect("fixed groups").remove(tid);
            }
            Location::FastRegion => {
                self.fast.unlink(tid);
            }
            Location::LazyRegion => {
                self.lazy.unlink(tid);
            }
            Location::Idle => {}
        }
        self.entities.remove(&tid);
        Ok(())
    }

    pub fn set_nice(&mut self, tid: Tid, nice: NiceValue) -> Result<(), SchedError> {
        let entity = self.entities.get_mut(&tid).ok_or(SchedError::UnknownThread(tid))?;
        entity.nice = nice;
        Ok(())
    }

    pub fn set_policy(&mut self, tid: Tid, policy: Policy) -> Result<(), SchedError> {
        let entity = self.entities.get_mut(&tid).ok_or(SchedError::UnknownThread(tid))?;
        entity.policy = policy;
        Ok(())
    }

    /// Chooses the thread to run this tick without dequeueing it.
    ///
    /// While the fast region holds any thread the pick comes from it
    /// alone. Otherwise the group with the smallest consumed/share ratio
    /// wins (ties broken by fixed group order), and within the group the
    /// smallest (vruntime, tid) wins.
    pub fn pick_next(&self) -> Option<Tid> {
        if !self.fast.is_empty() {
            return self.mediator_pick();
        }
        let mut best: Option<(Rat, GroupName)> = None;
        for group in GroupName::ALL {
            if self.queues[&group].is_empty() {
                continue;
            }
            let ratio = Rat::from_integer(self.consumed_ticks[&group] as i128)
                / self.shares.fraction(group);
            match &best {
                Some((best_ratio, _)) if *best_ratio <= ratio => {}
                _ => best = Some((ratio, group)),
            }
        }
        let (_, group) = best?;
        self.queues[&group].peek_min().map(|(tid, _)| tid)
    }

    /// Charges one tick of real time to `tid`, scaling by its nice
    /// weight. Group consumption accrues only for queued threads; fast
    /// region run-time is deliberately off the group books.
    pub fn charge_tick(&mut self, tid: Tid) -> Result<(), SchedError> {
        let entity = self.entities.get_mut(&tid).ok_or(SchedError::UnknownThread(tid))?;
        let factor = self.table.vruntime_factor(entity.nice);
        let delta = Rat::from_integer(NS_PER_TICK as i128) * factor;
        entity.vruntime.advance(delta);
        let group = entity.group;
        let vruntime = entity.vruntime;
        match entity.location {
            Location::Queued => {
                let queue = self.queues.get_mut(&group).expect("fixed groups");
                queue.update_vruntime(tid, vruntime);
                *self.consumed_ticks.get_mut(&group).expect("fixed groups") += 1;
                let floor = queue.min_vruntime().expect("tid is queued");
                let mark = self.watermarks.get_mut(&group).expect("fixed groups");
                *mark = (*mark).max(floor);
            }
            Location::FastRegion => {}
            Location::LazyRegion | Location::Idle => {
                return Err(SchedError::NotRunnable(tid));
            }
        }
        Ok(())
    }

    /// Internal consistency check: every entity is where its location
    /// says, exactly once, and nothing else is anywhere.
    pub fn debug_validate(&self) {
        let mut queued = 0usize;
        for (tid, entity) in &self.entities {
            let in_queue = self.queues[&entity.group].contains(*tid);
            let in_fast = self.fast.contains(*tid);
            let in_lazy = self.lazy.contains(*tid);
            let places = usize::from(in_queue) + usize::from(in_fast) + usize::from(in_lazy);
            match entity.location {
                Location::Queued => {
                    assert!(in_queue && places == 1, "{tid}: location Queued, places {places}")
                }
                Location::FastRegion => {
                    assert!(in_fast && places == 1, "{tid}: location Fast, places {places}")
                }
                Location::LazyRegion => {
                    assert!(in_lazy && places == 1, "{tid}: location Lazy, places {places}")
                }
                Location::Idle => assert!(places == 0, "{tid}: location Idle, places {places}"),
            }
            if in_queue {
                queued += 1;
            }
        }
        let queue_total: usize = self.queues.values().map(RunQueue::len).sum();
        assert_eq!(queued, queue_total, "queues hold unknown threads");
        assert_eq!(self.fast.len() + self.lazy.len() + queue_total,
            self.entities.values().filter(|e| e.location != Location::Idle).count());
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sched() -> SchedulerState {
        SchedulerState::new(WeightTable::paper_linear(), GroupShares::default())
    }

    fn admit_and_wake(s: &mut SchedulerState, tid: u32, group: GroupName, nice: i8) {
        s.admit(
            Tid(tid),
            group,
            NiceValue::new(nice).unwrap(),
            Policy::SchedNormal,
            Criticality::NonTimeCritical,
        )
        .unwrap();
        s.wake(Tid(tid)).unwrap();
    }

    #[test]
    fn charge_scales_by_weight_ratio() {
        let mut s = sched();
        admit_and_wake(&mut s, 1, GroupName::Normal, -20);
        s.charge_tick(Tid(1)).unwrap();
        // weight(0)/weight(-20) = 275/475 = 11/19 per nanosecond.
        let expect = Rat::from_integer(NS_PER_TICK as i128) * Rat::new(11, 19);
        assert_eq!(s.entity(Tid(1)).unwrap().vruntime.get(), expect);
    }

    #[test]
    fn nice_zero_charge_is_identity() {
        let mut s = sched();
        admit_and_wake(&mut s, 1, GroupName::Normal, 0);
        for _ in 0..5 {
            s.charge_tick(Tid(1)).unwrap();
        }
        let expect = Rat::from_integer(5 * NS_PER_TICK as i128);
        assert_eq!(s.entity(Tid(1)).unwrap().vruntime.get(), expect);
    }

    /// Greedy smallest-consumed/share selection must hand a 2:1 share
    /// split exactly 2000 and 1000 of 3000 ticks. The oracle is the
    /// ratio definition itself, checked by replaying the arithmetic.
    #[test]
    fn group_split_two_to_one() {
        let shares = GroupShares::new(&[
            (GroupName::Urgent, 2),
            (GroupName::Normal, 1),
            (GroupName::Service, 1),
            (GroupName::Background, 1),
        ])
        .unwrap();
        let mut s = SchedulerState::new(WeightTable::paper_linear(), shares);
        admit_and_wake(&mut s, 1, GroupName::Urgent, 0);
        admit_and_wake(&mut s, 2, GroupName::Normal, 0);
        for _ in 0..3000 {
            let tid = s.pick_next().unwrap();
            s.charge_tick(tid).unwrap();
        }
        assert_eq!(s.group_consumed(GroupName::Urgent), 2000);
        assert_eq!(s.group_consumed(GroupName::Normal), 1000);
    }

    #[test]
    fn equal_threads_split_evenly() {
        let mut s = sched();
        for tid in 1..=4 {
            admit_and_wake(&mut s, tid, GroupName::Service, 0);
        }
        let mut ticks = BTreeMap::new();
        for _ in 0..4000 {
            let tid = s.pick_next().unwrap();
            s.charge_tick(tid).unwrap();
            *ticks.entry(tid).or_insert(0u64) += 1;
        }
        for tid in 1..=4 {
            assert_eq!(ticks[&Tid(tid)], 1000);
        }
    }

    #[test]
    fn lower_nice_runs_more() {
        let mut s = sched();
        admit_and_wake(&mut s, 1, GroupName::Normal, -5);
        admit_and_wake(&mut s, 2, GroupName::Normal, 5);
        let mut ticks = BTreeMap::new();
        for _ in 0..10_000 {
            let tid = s.pick_next().unwrap();
            s.charge_tick(tid).unwrap();
            *ticks.entry(tid).or_insert(0u64) += 1;
        }
        // weights 325 vs 225: expect a 13:9 tick split, within rounding.
        let expect_1 = 10_000 * 325 / 550;
        assert!((ticks[&Tid(1)] as i64 - expect_1 as i64).abs() <= 1, "{ticks:?}");
    }

    #[test]
    fn wake_clamps_to_queue_minimum() {
        let mut s = sched();
        admit_and_wake(&mut s, 1, GroupName::Normal, 0);
        for _ in 0..100 {
            s.charge_tick(Tid(1)).unwrap();
        }
        s.admit(
            Tid(2),
            GroupName::Normal,
            NiceValue::default(),
            Policy::SchedNormal,
            Criticality::NonTimeCritical,
        )
        .unwrap();
        s.wake(Tid(2)).unwrap();
        let floor = s.entity(Tid(1)).unwrap().vruntime;
        assert_eq!(s.entity(Tid(2)).unwrap().vruntime, floor);
        s.debug_validate();
    }

    #[test]
    fn wake_into_empty_queue_uses_watermark() {
        let mut s = sched();
        admit_and_wake(&mut s, 1, GroupName::Normal, 0);
        for _ in 0..50 {
            s.charge_tick(Tid(1)).unwrap();
        }
        let mark = s.entity(Tid(1)).unwrap().vruntime;
        s.block(Tid(1)).unwrap();
        admit_and_wake(&mut s, 2, GroupName::Normal, 0);
        assert_eq!(s.entity(Tid(2)).unwrap().vruntime, mark);
    }

    #[test]
    fn empty_scheduler_picks_nothing() {
        let s = sched();
        assert_eq!(s.pick_next(), None);
    }

    #[test]
    fn tie_break_prefers_urgent_first() {
        let mut s = sched();
        admit_and_wake(&mut s, 10, GroupName::Background, 0);
        admit_and_wake(&mut s, 20, GroupName::Urgent, 0);
        // Both groups are at consumed 0, so ratios tie at zero.
        assert_eq!(s.pick_next(), Some(Tid(20)));
    }

    #[test]
    fn pick_is_deterministic_across_replays() {
        let build = || {
            let mut s = sched();
            admit_and_wake(&mut s, 3, GroupName::Urgent, 2);
            admit_and_wake(&mut s, 1, GroupName::Normal, -3);
            admit_and_wake(&mut s, 2, GroupName::Urgent, 0);
            s
        };
        let mut a = build();
        let mut b = build();
        for _ in 0..500 {
            let pa = a.pick_next().unwrap();
            let pb = b.pick_next().unwrap();
            assert_eq!(pa, pb);
            a.charge_tick(pa).unwrap();
            b.charge_tick(pb).unwrap();
        }
    }

    #[test]
    fn duplicate_admit_rejected() {
        let mut s = sched();
        admit_and_wake(&mut s, 1, GroupName::Normal, 0);
        let err = s.admit(
            Tid(1),
            GroupName::Urgent,
            NiceValue::default(),
            Policy::SchedNormal,
            Criticality::TimeCritical,
        );
        assert!(matches!(err, Err(SchedError::DuplicateThread(Tid(1)))));
    }

    #[test]
    fn zero_share_rejected() {
        let err = GroupShares::new(&[
            (GroupName::Urgent, 0),
            (GroupName::Normal, 1),
            (GroupName::Service, 1),
            (GroupName::Background, 1),
        ]);
        assert!(matches!(err, Err(SchedError::NonPositiveGroupShare)));
    }
}
