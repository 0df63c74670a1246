// SPDX-License-Identifier: Apache-2.0

//! Deterministic discrete-time simulation engine.
//!
//! One tick is one simulated millisecond. Each tick proceeds in a fixed
//! order: admissions, timed wake-ups, event delivery, pick, charge and
//! phase advance, context-switch accounting, mediator exit check, and
//! sampling. Identical configuration and seed produce identical reports
//! byte for byte; the scheduling mode cannot perturb workload
//! generation because every thread draws from its own stream.

pub mod rng;
pub mod workload;

use std::collections::{BTreeMap, VecDeque};

use crate::error::ScenarioError;
use crate::registry::{MonitorSource, RegisterAttrs, ThreadInformationTable};
use crate::scenario::{Mode, ScenarioConfig};
use crate::sched::weights::{NiceValue, Rat, WeightTable};
use crate::sched::{SchedulerState, WakePlacement};
use crate::stack::{AddressSpaceModel, AllocOutcome, FaultEvent, SpaceReport, StackPolicy};
use crate::types::{Criticality, GroupName, Policy, Tick, Tid, Zone, NS_PER_TICK};
use rng::XorShift64Star;
use workload::{DemandCurve, Phase, PhaseGenerator};

/// Stream purposes for deriving per-entity sequences from the run seed.
const STREAM_BEHAVIOR: u64 = 1;
const STREAM_EVENTS: u64 = 2;

/// Run options orthogonal to the scenario itself.
#[derive(Debug, Clone, Copy, Default)]
pub struct SimOptions {
    /// Record a per-tick schedule trace (large).
    pub collect_trace: bool,
}

/// Lifecycle state of a simulated thread.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ThreadState {
    NotStarted,
    Runnable,
    Blocked { until: Tick },
    AwaitingEvent,
    Dead,
}

struct SimThread {
    tid: Tid,
    role: String,
    group: GroupName,
    nice: NiceValue,
    policy: Policy,
    criticality: Criticality,
    arrival: Tick,
    state: ThreadState,
    phases: PhaseGenerator,
    compute_left: u64,
    demand: DemandCurve,
    request_kib: Option<u64>,
    cpu_ticks: u64,
    switch_ins: u64,
    preemptions: u64,
    pending_events: VecDeque<usize>,
    handling: Option<usize>,
    death: Option<Tick>,
    creation_failed: bool,
    reserved_kib: u64,
}

/// One delivered-or-not user event.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EventRecord {
    pub id: u64,
    pub target: Tid,
    pub arrival: Tick,
    /// Tick at which handling finished; `None` if never handled.
    pub completion: Option<Tick>,
    /// True when the event could never be delivered (target dead).
    pub undeliverable: bool,
}

impl EventRecord {
    pub fn response_ticks(&self) -> Option<u64> {
        self.completion.map(|c| c - self.arrival)
    }
}

/// A thread entering the fast or lazy region, with the identity saved at
/// migration time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MigrationLogEntry {
    pub tick: Tick,
    pub tid: Tid,
    pub to_fast: bool,
    pub group: GroupName,
    pub policy: Policy,
    pub nice: i8,
}

/// A thread leaving the lazy region at mediator exit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RestorationLogEntry {
    pub tick: Tick,
    pub tid: Tid,
    pub group: GroupName,
    pub policy: Policy,
    pub nice: i8,
}

/// One row of the flag-gated schedule trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceRow {
    pub tick: Tick,
    pub running: Option<Tid>,
    pub notes: Vec<String>,
}

/// Final per-thread accounting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThreadReport {
    pub tid: Tid,
    pub role: String,
    pub group: GroupName,
    pub nice: i8,
    pub policy: Policy,
    pub criticality: Criticality,
    pub arrival: Tick,
    pub death: Option<Tick>,
    pub cpu_ticks: u64,
    pub switch_ins: u64,
    pub preemptions: u64,
    pub reserved_kib: u64,
    pub peak_kib: u64,
    pub zone: Zone,
    /// Size the tuner would advise for this thread's role at run end;
    /// `None` until some lifetime of the role has completed.
    pub advised_kib: Option<u64>,
    pub creation_failed: bool,
}

/// Everything a run produces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunReport {
    pub scenario: String,
    pub mode: Mode,
    pub seed: u64,
    pub elapsed_ticks: Tick,
    pub idle_ticks: u64,
    pub context_switches: u64,
    pub threads: Vec<ThreadReport>,
    pub events: Vec<EventRecord>,
    pub migrations: Vec<MigrationLogEntry>,
    pub restorations: Vec<RestorationLogEntry>,
    pub faults: Vec<FaultEvent>,
    pub space: SpaceReport,
    pub failed_creations: u64,
    /// Final Thread Information Table image (`.tit` bytes).
    pub table_image: Vec<u8>,
    pub trace: Option<Vec<TraceRow>>,
}

impl RunReport {
    pub fn total_cpu_ticks(&self) -> u64 {
        self.threads.iter().map(|t| t.cpu_ticks).sum()
    }

    fn thread(&self, tid: Tid) -> &ThreadReport {
        &self.threads[tix(tid)]
    }

    /// Completed response times of events whose target has the given
    /// criticality, in event order.
    pub fn response_ticks(&self, criticality: Criticality) -> Vec<u64> {
        self.events
            .iter()
            .filter(|e| self.thread(e.target).criticality == criticality)
            .filter_map(EventRecord::response_ticks)
            .collect()
    }

    /// Largest completed response among the given criticality class.
    pub fn max_response_ticks(&self, criticality: Criticality) -> Option<u64> {
        self.response_ticks(criticality).into_iter().max()
    }

    /// Involuntary preemptions summed over threads of a criticality.
    pub fn preemptions(&self, criticality: Criticality) -> u64 {
        self.threads
            .iter()
            .filter(|t| t.criticality == criticality)
            .map(|t| t.preemptions)
            .sum()
    }

    /// Per-thread realized CPU share of the total CPU consumed.
    pub fn realized_shares(&self) -> Vec<(Tid, Rat)> {
        let total = self.total_cpu_ticks();
        if total == 0 {
            return Vec::new();
        }
        self.threads
            .iter()
            .map(|t| (t.tid, Rat::new(t.cpu_ticks as i128, total as i128)))
            .collect()
    }
}

/// Exact mean of a non-empty integer sample.
pub fn mean_rat(samples: &[u64]) -> Option<Rat> {
    if samples.is_empty() {
        return None;
    }
    let sum: i128 = samples.iter().map(|s| *s as i128).sum();
    Some(Rat::new(sum, samples.len() as i128))
}

/// Exact squared coefficient of variation: `N·Σx² / (Σx)² − 1`.
/// Comparing CV² orders the same way as CV for non-negative samples.
pub fn cv_squared_rat(samples: &[u64]) -> Option<Rat> {
    if samples.is_empty() {
        return None;
    }
    let sum: i128 = samples.iter().map(|s| *s as i128).sum();
    if sum == 0 {
        return None;
    }
    let sum_sq: i128 = samples.iter().map(|s| (*s as i128) * (*s as i128)).sum();
    Some(Rat::new(samples.len() as i128 * sum_sq, sum * sum) - Rat::from_integer(1))
}

/// Tids are dense and one-based; index into the thread vector.
fn tix(tid: Tid) -> usize {
    (tid.0 - 1) as usize
}

struct Sim<'a> {
    config: &'a ScenarioConfig,
    mode: Mode,
    sched: SchedulerState,
    stack: AddressSpaceModel,
    table: ThreadInformationTable,
    threads: Vec<SimThread>,
    arrivals: BTreeMap<Tick, Vec<Tid>>,
    wakeups: BTreeMap<Tick, Vec<Tid>>,
    events: Vec<EventRecord>,
    deliveries: BTreeMap<Tick, Vec<usize>>,
    migrations: Vec<MigrationLogEntry>,
    restorations: Vec<RestorationLogEntry>,
    trace: Option<Vec<TraceRow>>,
    notes: Vec<String>,
    prev_running: Option<Tid>,
    context_switches: u64,
    idle_ticks: u64,
    failed_creations: u64,
    live_threads: u64,
    pending_arrivals: u64,
}

/// Runs one scenario in one mode. The configuration must already be
/// valid; [`ScenarioConfig::validate`] is re-checked defensively.
pub fn run_scenario(
    config: &ScenarioConfig,
    mode: Mode,
    options: SimOptions,
) -> Result<RunReport, ScenarioError> {
    config.validate()?;
    Ok(Sim::new(config, mode, options).run())
}

impl<'a> Sim<'a> {
    fn new(config: &'a ScenarioConfig, mode: Mode, options: SimOptions) -> Sim<'a> {
        let weight_table = WeightTable::new(config.weight_table);
        let sched = SchedulerState::new(weight_table, config.group_shares.clone());
        let stack = AddressSpaceModel::new(config.address_space.clone());

        let mut threads = Vec::new();
        let mut arrivals: BTreeMap<Tick, Vec<Tid>> = BTreeMap::new();
        let mut next_tid = 1u32;
        for spec in &config.threads {
            for member in 0..spec.count {
                let tid = Tid(next_tid);
                next_tid += 1;
                let arrival = spec.arrival + member * spec.arrival_step;
                arrivals.entry(arrival).or_default().push(tid);
                threads.push(SimThread {
                    tid,
                    role: spec.role.clone(),
                    group: spec.group,
                    nice: NiceValue::new(spec.nice).expect("validated"),
                    policy: spec.policy,
                    criticality: spec.criticality,
                    arrival,
                    state: ThreadState::NotStarted,
                    phases: PhaseGenerator::new(
                        spec.behavior.clone(),
                        XorShift64Star::stream(config.seed, STREAM_BEHAVIOR, tid.0 as u64),
                    ),
                    compute_left: 0,
                    demand: DemandCurve::from_template(&spec.stack),
                    request_kib: spec.request_kib,
                    cpu_ticks: 0,
                    switch_ins: 0,
                    preemptions: 0,
                    pending_events: VecDeque::new(),
                    handling: None,
                    death: None,
                    creation_failed: false,
                    reserved_kib: 0,
                });
            }
        }

        // Materialize the event plan up front so both modes see the same
        // arrivals: one stream per (section, target thread).
        let mut events = Vec::new();
        let mut deliveries: BTreeMap<Tick, Vec<usize>> = BTreeMap::new();
        for (section_idx, spec) in config.events.iter().enumerate() {
            let targets: Vec<Tid> = threads
                .iter()
                .filter(|t| t.role == spec.role)
                .map(|t| t.tid)
                .collect();
            for target in targets {
                let mut stream = XorShift64Star::stream(
                    config.seed,
                    STREAM_EVENTS,
                    ((section_idx as u64) << 32) | target.0 as u64,
                );
                for i in 0..spec.count {
                    let base = spec.start as i64 + (i * spec.period) as i64;
                    let arrival = (base + stream.jitter(spec.jitter)).max(0) as Tick;
                    let id = events.len() as u64;
                    deliveries.entry(arrival).or_default().push(events.len());
                    events.push(EventRecord {
                        id,
                        target,
                        arrival,
                        completion: None,
                        undeliverable: false,
                    });
                }
            }
        }

        let pending_arrivals = threads.len() as u64;
        Sim {
            config,
            mode,
            sched,
            stack,
            table: ThreadInformationTable::new(),
            threads,
            arrivals,
            wakeups: BTreeMap::new(),
            events,
            deliveries,
            migrations: Vec::new(),
            restorations: Vec::new(),
            trace: options.collect_trace.then(Vec::new),
            notes: Vec::new(),
            prev_running: None,
            context_switches: 0,
            idle_ticks: 0,
            failed_creations: 0,
            live_threads: 0,
            pending_arrivals,
        }
    }

    fn stack_policy(&self) -> StackPolicy {
        match self.mode {
            Mode::Baseline => StackPolicy::FixedSize,
            Mode::Tek => StackPolicy::Tuned,
        }
    }

    fn note(&mut self, text: String) {
        if self.trace.is_some() {
            self.notes.push(text);
        }
    }

    /// Queues a thread and, in mediator mode, lets a runnable
    /// time-critical mediator thread engage the fast path. `effective`
    /// is the first tick at which the new placement can be picked: the
    /// current tick for pre-pick wake-ups, the next for post-run ones.
    fn make_runnable(&mut self, tid: Tid, effective: Tick) {
        let placement = self.sched.wake(tid).expect("wake of idle thread");
        let thread = &mut self.threads[tix(tid)];
        thread.state = ThreadState::Runnable;
        if placement == WakePlacement::LazyRegion {
            let entity = self.sched.entity(tid).expect("woken");
            let entry = MigrationLogEntry {
                tick: effective,
                tid,
                to_fast: false,
                group: entity.group,
                policy: entity.policy,
                nice: entity.nice.get(),
            };
            self.migrations.push(entry);
            self.note(format!("enter_lazy:{tid}"));
            return;
        }
        let engage = self.mode == Mode::Tek
            && self.threads[tix(tid)].policy == Policy::SchedTek
            && self.threads[tix(tid)].criticality == Criticality::TimeCritical
            && !self.sched.in_fast(tid);
        if engage {
            let report = self.sched.enter_tek(tid).expect("caller is runnable");
            for migration in report.to_fast.iter().chain(&report.to_lazy) {
                self.migrations.push(MigrationLogEntry {
                    tick: effective,
                    tid: migration.tid,
                    to_fast: self.sched.in_fast(migration.tid),
                    group: migration.saved.group,
                    policy: migration.saved.policy,
                    nice: migration.saved.nice.get(),
                });
            }
            if self.trace.is_some() {
                let mut notes: Vec<String> = Vec::new();
                for migration in &report.to_fast {
                    notes.push(format!("enter_fast:{}", migration.tid));
                }
                for migration in &report.to_lazy {
                    notes.push(format!("enter_lazy:{}", migration.tid));
                }
                self.notes.extend(notes);
            }
        }
    }

    fn die(&mut self, tid: Tid, now: Tick) {
        self.sched.terminate(tid).expect("terminating live thread");
        if self.stack.live(tid).is_some() {
            self.stack.complete_lifetime(tid).expect("live allocation");
        }
        let thread = &mut self.threads[tix(tid)];
        thread.state = ThreadState::Dead;
        thread.death = Some(now);
        self.live_threads -= 1;
        self.note(format!("exit:{tid}"));
    }

    /// Consumes phases until the thread has something to do or is gone.
    /// Called at start, on wake-up, and after finishing a compute phase.
    /// `now` is the tick being simulated; `effective` the first tick the
    /// outcome is visible to the picker (now, or now + 1 post-run).
    fn advance_phase(&mut self, tid: Tid, now: Tick, effective: Tick) {
        loop {
            let phase = self.threads[tix(tid)].phases.next_phase();
            match phase {
                Phase::Compute { ticks } => {
                    self.threads[tix(tid)].compute_left = ticks;
                    self.make_runnable(tid, effective);
                    return;
                }
                Phase::Block { ticks } => {
                    let until = effective + ticks.max(1);
                    let thread = &mut self.threads[tix(tid)];
                    thread.state = ThreadState::Blocked { until };
                    self.wakeups.entry(until).or_default().push(tid);
                    return;
                }
                Phase::AwaitEvent => {
                    let thread = &mut self.threads[tix(tid)];
                    if let Some(event_idx) = thread.pending_events.pop_front() {
                        thread.handling = Some(event_idx);
                        continue;
                    }
                    thread.state = ThreadState::AwaitingEvent;
                    return;
                }
                Phase::Exit => {
                    self.die(tid, now);
                    return;
                }
            }
        }
    }

    /// Creates a thread at its arrival tick: stack allocation, registry
    /// record, scheduler admission, then its first phase.
    fn admit_thread(&mut self, tid: Tid, now: Tick) {
        self.pending_arrivals -= 1;
        let idx = tix(tid);
        let (role, request, group, nice, policy, criticality) = {
            let t = &self.threads[idx];
            (t.role.clone(), t.request_kib, t.group, t.nice, t.policy, t.criticality)
        };
        let outcome = self
            .stack
            .alloc_stack(tid, &role, request, self.stack_policy(), now)
            .expect("no duplicate allocation");
        let reserved_kib = match outcome {
            AllocOutcome::Allocated { reserved_kib } => reserved_kib,
            AllocOutcome::Exhausted(_) => {
                // Creation failed; the thread never starts.
                let thread = &mut self.threads[idx];
                thread.state = ThreadState::Dead;
                thread.death = Some(now);
                thread.creation_failed = true;
                self.failed_creations += 1;
                self.note(format!("fault:allocation_exhaustion:{tid}"));
                return;
            }
        };
        self.threads[idx].reserved_kib = reserved_kib;
        let guard = self.stack.live(tid).expect("just allocated").guard_kib;
        self.table
            .register_thread(
                tid,
                RegisterAttrs {
                    policy,
                    priority: nice.get(),
                    criticality,
                    role,
                    stack_reserved_kib: reserved_kib as u32,
                    vm_kib: (reserved_kib + guard) as u32,
                },
                now * NS_PER_TICK,
            )
            .expect("tid is fresh");
        self.sched
            .admit(tid, group, nice, policy, criticality)
            .expect("tid is fresh");
        self.live_threads += 1;
        self.note(format!("arrive:{tid}"));
        self.advance_phase(tid, now, now);
    }

    fn deliver_event(&mut self, event_idx: usize, now: Tick) {
        let target = self.events[event_idx].target;
        let idx = tix(target);
        match self.threads[idx].state {
            ThreadState::Dead => {
                self.events[event_idx].undeliverable = true;
                self.note(format!("undeliverable:{}", self.events[event_idx].id));
            }
            ThreadState::AwaitingEvent => {
                self.threads[idx].handling = Some(event_idx);
                self.note(format!("deliver:{}:{target}", self.events[event_idx].id));
                // The next phase of a waiting handler is its compute.
                self.advance_phase(target, now, now);
            }
            _ => {
                self.threads[idx].pending_events.push_back(event_idx);
                self.note(format!("queue:{}:{target}", self.events[event_idx].id));
            }
        }
    }

    /// Runs the chosen thread for one tick: scheduler charge, stack
    /// sample, and phase progress.
    fn charge(&mut self, tid: Tid, now: Tick) {
        self.sched.charge_tick(tid).expect("chosen thread is charged");
        let idx = tix(tid);
        self.threads[idx].cpu_ticks += 1;
        let progress = self.threads[idx].cpu_ticks - 1;
        let used = self.threads[idx].demand.demand_at(progress);
        let faults_before = self.stack.faults().len();
        self.stack.record_usage(tid, used, now).expect("running thread owns a stack");
        if self.stack.faults().len() > faults_before {
            // Guard-page overrun: the thread dies on the spot.
            self.note(format!("fault:guard_page_overrun:{tid}"));
            self.die(tid, now);
            return;
        }
        let thread = &mut self.threads[idx];
        thread.compute_left -= 1;
        if thread.compute_left > 0 {
            return;
        }
        if let Some(event_idx) = thread.handling.take() {
            self.events[event_idx].completion = Some(now + 1);
            let id = self.events[event_idx].id;
            self.note(format!("complete:{id}"));
        }
        // The thread finished a compute phase while runnable; it must
        // leave the scheduler before its next phase decides placement.
        self.sched.block(tid).expect("running thread is runnable");
        self.threads[idx].state = ThreadState::Blocked { until: now + 1 };
        self.advance_phase(tid, now, now + 1);
    }

    fn monitor_tick(&mut self, _now: Tick) {
        let mut sources = Vec::new();
        for thread in &self.threads {
            if thread.state == ThreadState::Dead || thread.state == ThreadState::NotStarted {
                continue;
            }
            let Some(alloc) = self.stack.live(thread.tid) else { continue };
            let zone = self.stack.classify(thread.tid).unwrap_or(Zone::Unknown);
            let entity = self.sched.entity(thread.tid).expect("live thread");
            sources.push(MonitorSource {
                tid: thread.tid,
                policy: entity.policy,
                priority: entity.nice.get(),
                stack_reserved_kib: alloc.reserved_kib as u32,
                vm_kib: alloc.footprint_kib() as u32,
                peak_stack_kib: alloc.peak_used_kib.unwrap_or(0) as u32,
                zone,
            });
        }
        self.table.monitor_sample(&sources);
    }

    fn step(&mut self, now: Tick) {
        // 1. Admissions.
        if let Some(batch) = self.arrivals.remove(&now) {
            for tid in batch {
                self.admit_thread(tid, now);
            }
        }
        // 2. Timed wake-ups.
        if let Some(batch) = self.wakeups.remove(&now) {
            for tid in batch {
                if matches!(self.threads[tix(tid)].state, ThreadState::Blocked { until } if until == now)
                {
                    self.advance_phase(tid, now, now);
                }
            }
        }
        // 3. Event delivery.
        if let Some(batch) = self.deliveries.remove(&now) {
            for event_idx in batch {
                self.deliver_event(event_idx, now);
            }
        }
        // 4. Pick.
        let chosen = self.sched.pick_next();
        // 5. Context-switch accounting.
        if chosen != self.prev_running {
            self.context_switches += 1;
            if let Some(new) = chosen {
                self.threads[tix(new)].switch_ins += 1;
            }
            if let Some(old) = self.prev_running {
                let old_thread = &self.threads[tix(old)];
                if old_thread.state == ThreadState::Runnable {
                    self.threads[tix(old)].preemptions += 1;
                }
            }
        }
        self.prev_running = chosen;
        // 6. Charge and phase progress.
        match chosen {
            Some(tid) => self.charge(tid, now),
            None => self.idle_ticks += 1,
        }
        // 7. Mediator exit check: restoration is atomic within the tick
        // and takes effect at the next pick.
        if let Some(report) = self.sched.exit_tek_if_empty() {
            for restoration in &report.restored {
                self.restorations.push(RestorationLogEntry {
                    tick: now + 1,
                    tid: restoration.tid,
                    group: restoration.saved.group,
                    policy: restoration.saved.policy,
                    nice: restoration.saved.nice.get(),
                });
            }
            if self.trace.is_some() {
                let notes: Vec<String> = report
                    .restored
                    .iter()
                    .map(|r| format!("restore:{}", r.tid))
                    .collect();
                self.notes.extend(notes);
            }
        }
        // 8. Periodic monitor refresh.
        if now.is_multiple_of(self.config.monitor_period) {
            self.monitor_tick(now);
        }
        // 9. Trace row.
        if let Some(trace) = &mut self.trace {
            trace.push(TraceRow { tick: now, running: chosen, notes: std::mem::take(&mut self.notes) });
        }
        #[cfg(debug_assertions)]
        self.sched.debug_validate();
    }

    fn run(mut self) -> RunReport {
        let mut elapsed = 0;
        for now in 0..self.config.horizon_ticks {
            self.step(now);
            elapsed = now + 1;
            if self.live_threads == 0 && self.pending_arrivals == 0 {
                break;
            }
        }
        // Events that never found a live target.
        for event in &mut self.events {
            if event.completion.is_none()
                && self.threads[tix(event.target)].state == ThreadState::Dead
            {
                event.undeliverable = true;
            }
        }
        self.monitor_tick(elapsed);

        let threads = self
            .threads
            .iter()
            .map(|t| {
                let (peak, zone, reserved) = match self.stack.live(t.tid) {
                    Some(alloc) => (
                        alloc.peak_used_kib.unwrap_or(0),
                        self.stack.classify(t.tid).unwrap_or(Zone::Unknown),
                        alloc.reserved_kib,
                    ),
                    None => {
                        // Dead (or failed) threads: read the frozen record.
                        let record = self.table.get_attributes(t.tid).ok();
                        (
                            record.as_ref().map_or(0, |r| r.peak_stack_kib as u64),
                            record.as_ref().map_or(Zone::Unknown, |r| r.zone),
                            t.reserved_kib,
                        )
                    }
                };
                ThreadReport {
                    tid: t.tid,
                    role: t.role.clone(),
                    group: t.group,
                    nice: t.nice.get(),
                    policy: t.policy,
                    criticality: t.criticality,
                    arrival: t.arrival,
                    death: t.death,
                    cpu_ticks: t.cpu_ticks,
                    switch_ins: t.switch_ins,
                    preemptions: t.preemptions,
                    reserved_kib: reserved,
                    peak_kib: peak,
                    zone,
                    advised_kib: self.stack.advise(&t.role).ok().map(|a| a.advised_kib),
                    creation_failed: t.creation_failed,
                }
            })
            .collect();

        RunReport {
            scenario: self.config.name.clone(),
            mode: self.mode,
            seed: self.config.seed,
            elapsed_ticks: elapsed,
            idle_ticks: self.idle_ticks,
            context_switches: self.context_switches,
            threads,
            events: self.events,
            migrations: self.migrations,
            restorations: self.restorations,
            faults: self.stack.faults().to_vec(),
            space: self.stack.space_report(),
            failed_creations: self.failed_creations,
            table_image: self.table.encode_table(),
            trace: self.trace,
        }
    }
}
