// SPDX-License-Identifier: Apache-2.0

//! CPU mediator fast path.
//!
//! A time-critical thread can hand the machine to its peers by engaging
//! the mediator: runnable time-critical threads from the caller's group
//! move into the **fast region**, and every runnable non-time-critical
//! thread in the system moves into the **lazy region**, where it waits.
//! While the fast region is non-empty, picks come from it exclusively.
//! Once it drains, every lazy thread is restored to its original group
//! in the same step, with its vruntime floored at the group's current
//! minimum so the backlog cannot stampede.
//!
//! Regions are intrusive doubly-linked lists over a node map: link and
//! unlink are O(1), membership is O(1), and iteration follows the links,
//! so traversal order is exactly insertion order.

use std::collections::HashMap;

use crate::error::SchedError;
use crate::sched::queue::VRuntime;
use crate::sched::weights::NiceValue;
use crate::sched::{Location, SchedulerState};
use crate::types::{Criticality, GroupName, Policy, Tid};

/// Scheduling identity captured at migration time, restored on exit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SavedParams {
    pub group: GroupName,
    pub policy: Policy,
    pub nice: NiceValue,
    pub vruntime: VRuntime,
}

#[derive(Debug, Clone)]
struct Node {
    prev: Option<Tid>,
    next: Option<Tid>,
    saved: SavedParams,
}

/// Intrusive doubly-linked list of threads with saved parameters.
#[derive(Debug, Clone, Default)]
pub struct Region {
    nodes: HashMap<Tid, Node>,
    head: Option<Tid>,
    tail: Option<Tid>,
}

impl Region {
    pub fn new() -> Region {
        Region::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains(&self, tid: Tid) -> bool {
        self.nodes.contains_key(&tid)
    }

    pub fn saved(&self, tid: Tid) -> Option<&SavedParams> {
        self.nodes.get(&tid).map(|n| &n.saved)
    }

    /// Appends at the tail. Panics if the thread is already linked; the
    /// callers below guard with `contains`.
    pub fn push_back(&mut self, tid: Tid, saved: SavedParams) {
        assert!(!self.contains(tid), "{tid} already linked");
        let node = Node { prev: self.tail, next: None, saved };
        if let Some(tail) = self.tail {
            self.nodes.get_mut(&tail).expect("tail is linked").next = Some(tid);
        } else {
            self.head = Some(tid);
        }
        self.tail = Some(tid);
        self.nodes.insert(tid, node);
    }

    /// Unlinks a thread in O(1), returning its saved parameters.
    pub fn unlink(&mut self, tid: Tid) -> Option<SavedParams> {
        let node = self.nodes.remove(&tid)?;
        match node.prev {
            Some(prev) => self.nodes.get_mut(&prev).expect("prev is linked").next = node.next,
            None => self.head = node.next,
        }
        match node.next {
            Some(next) => self.nodes.get_mut(&next).expect("next is linked").prev = node.prev,
            None => self.tail = node.prev,
        }
        Some(node.saved)
    }

    /// Members in link (insertion) order.
    pub fn iter(&self) -> RegionIter<'_> {
        RegionIter { region: self, cursor: self.head }
    }
}

pub struct RegionIter<'a> {
    region: &'a Region,
    cursor: Option<Tid>,
}

impl<'a> Iterator for RegionIter<'a> {
    type Item = (Tid, &'a SavedParams);

    fn next(&mut self) -> Option<Self::Item> {
        let tid = self.cursor?;
        let node = self.region.nodes.get(&tid).expect("cursor is linked");
        self.cursor = node.next;
        Some((tid, &node.saved))
    }
}

/// One thread's move into a region.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Migration {
    pub tid: Tid,
    pub saved: SavedParams,
}

/// What a mediator engagement moved.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MigrationReport {
    pub to_fast: Vec<Migration>,
    pub to_lazy: Vec<Migration>,
}

impl MigrationReport {
    pub fn is_empty(&self) -> bool {
        self.to_fast.is_empty() && self.to_lazy.is_empty()
    }
}

/// One thread's restoration out of the lazy region.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Restoration {
    pub tid: Tid,
    pub saved: SavedParams,
    /// Vruntime actually assigned: `max(saved, group floor)`.
    pub assigned_vruntime: VRuntime,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RestorationReport {
    pub restored: Vec<Restoration>,
}

impl SchedulerState {
    /// True while any thread is under mediator control.
    pub fn mediator_engaged(&self) -> bool {
        !self.fast.is_empty() || !self.lazy.is_empty()
    }

    pub fn fast_len(&self) -> usize {
        self.fast.len()
    }

    pub fn lazy_len(&self) -> usize {
        self.lazy.len()
    }

    pub fn in_fast(&self, tid: Tid) -> bool {
        self.fast.contains(tid)
    }

    pub fn in_lazy(&self, tid: Tid) -> bool {
        self.lazy.contains(tid)
    }

    fn snapshot_saved(&self, tid: Tid) -> SavedParams {
        let entity = &self.entities[&tid];
        SavedParams {
            group: entity.group,
            policy: entity.policy,
            nice: entity.nice,
            vruntime: entity.vruntime,
        }
    }

    pub(crate) fn saved_params_of(&self, tid: Tid) -> SavedParams {
        self.snapshot_saved(tid)
    }

    /// Engages the mediator on behalf of `caller`, which must be
    /// runnable.
    ///
    /// Step 1 moves runnable time-critical threads of the caller's group
    /// (the caller included) into the fast region. Step 2 moves every
    /// runnable non-time-critical thread, whatever its group, into the
    /// lazy region. Threads already region-resident stay put, so
    /// re-engaging is a merge, not an error.
    pub fn enter_tek(&mut self, caller: Tid) -> Result<MigrationReport, SchedError> {
        let caller_entity = self.entities.get(&caller).ok_or(SchedError::UnknownThread(caller))?;
        if caller_entity.location == Location::Idle {
            return Err(SchedError::NotRunnable(caller));
        }
        let caller_group = caller_entity.group;
        let mut report = MigrationReport::default();

        let step1: Vec<Tid> = self.queues[&caller_group]
            .tids()
            .filter(|t| self.entities[t].criticality == Criticality::TimeCritical)
            .collect();
        for tid in step1 {
            let saved = self.snapshot_saved(tid);
            self.queues.get_mut(&caller_group).expect("fixed groups").remove(tid);
            self.entities.get_mut(&tid).expect("queued implies known").location =
                Location::FastRegion;
            self.fast.push_back(tid, saved);
            report.to_fast.push(Migration { tid, saved });
        }

        for group in GroupName::ALL {
            let step2: Vec<Tid> = self.queues[&group]
                .tids()
                .filter(|t| self.entities[t].criticality == Criticality::NonTimeCritical)
                .collect();
            for tid in step2 {
                let saved = self.snapshot_saved(tid);
                self.queues.get_mut(&group).expect("fixed groups").remove(tid);
                self.entities.get_mut(&tid).expect("queued implies known").location =
                    Location::LazyRegion;
                self.lazy.push_back(tid, saved);
                report.to_lazy.push(Migration { tid, saved });
            }
        }
        Ok(report)
    }

    /// Next thread from the fast region: smallest (vruntime, tid). The
    /// region is a linked list, so this walks it; fast regions are small
    /// by construction.
    pub fn mediator_pick(&self) -> Option<Tid> {
        self.fast
            .iter()
            .map(|(tid, _)| (self.entities[&tid].vruntime, tid))
            .min()
            .map(|(_, tid)| tid)
    }

    /// If the fast region has drained, restores every lazy thread to its
    /// saved group in one atomic sweep and reports what was restored.
    /// Returns `None` while the fast region still holds threads or when
    /// there is nothing to restore.
    pub fn exit_tek_if_empty(&mut self) -> Option<RestorationReport> {
        if !self.fast.is_empty() || self.lazy.is_empty() {
            return None;
        }
        let order: Vec<(Tid, SavedParams)> = self.lazy.iter().map(|(t, s)| (t, *s)).collect();
        let mut report = RestorationReport::default();
        for (tid, saved) in order {
            self.lazy.unlink(tid);
            let floor = self.entry_floor(saved.group);
            let assigned = saved.vruntime.max(floor);
            let entity = self.entities.get_mut(&tid).expect("linked implies known");
            entity.group = saved.group;
            entity.policy = saved.policy;
            entity.nice = saved.nice;
            entity.vruntime = assigned;
            entity.location = Location::Queued;
            self.queues.get_mut(&saved.group).expect("fixed groups").insert(tid, assigned);
            report.restored.push(Restoration { tid, saved, assigned_vruntime: assigned });
        }
        Some(report)
    }
}
