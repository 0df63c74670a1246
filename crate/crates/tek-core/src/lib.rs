// SPDX-License-Identifier: Apache-2.0

//! Core library of the Thread Evolution Kit simulator.
//!
//! The crate models, in user space and with exact integer/rational
//! arithmetic, a fair-share scheduler with four thread groups, a CPU
//! mediator that parks time-critical work in a fast region while
//! diverting the rest to a lazy region, a 32-bit address-space stack
//! tuner, and a compact thread-information table. A deterministic
//! discrete-time engine drives scenarios through the whole stack and
//! produces replayable reports.
//!
//! Modules:
//! - [`sched`]: weights, run queues, group fair-share scheduling.
//! - [`mediator`]: fast/lazy regions and migration bookkeeping.
//! - [`stack`]: stack reservations, watermarks, zones, advisories.
//! - [`registry`]: the 40-byte-per-thread information table.
//! - [`scenario`]: the `.scn` configuration format.
//! - [`sim`]: the tick engine tying everything together.

pub mod error;
pub mod mediator;
pub mod registry;
pub mod scenario;
pub mod sched;
pub mod sim;
pub mod stack;
pub mod types;

pub use error::{RegistryError, ScenarioError, SchedError, StackError};
pub use mediator::{Migration, MigrationReport, Restoration, RestorationReport, SavedParams};
pub use registry::{
    decode_table, truncate_role, AttrUpdate, MonitorSource, RegisterAttrs, SchedForward,
    ThreadInfoRecord, ThreadInformationTable, RECORD_BYTES,
};
pub use scenario::{
    parse_scenario_str, BehaviorTemplate, EventSpec, Mode, ModeSpec, RangeSpec, ScenarioConfig,
    StackTemplate, ThreadSpec,
};
pub use sched::queue::{RunQueue, VRuntime};
pub use sched::weights::{cpu_shares, NiceValue, Rat, WeightTable, WeightTableKind};
pub use sched::{GroupShares, SchedulerState, WakePlacement};
pub use sim::{
    cv_squared_rat, mean_rat, run_scenario, EventRecord, MigrationLogEntry, RestorationLogEntry,
    RunReport, SimOptions, ThreadReport, TraceRow,
};
pub use stack::{
    classify_zone, round_up_page, AddressSpaceConfig, AddressSpaceModel, AllocOutcome, FaultEvent,
    FaultKind, SpaceReport, StackAdvice, StackAllocation, StackPolicy, StackZoneConfig,
    DEFAULT_STACK_KIB, GUARD_KIB, MIN_STACK_KIB, PAGE_KIB,
};
pub use types::{Criticality, GroupName, Policy, Tick, Tid, Zone, NS_PER_TICK};
