// SPDX-License-Identifier: Apache-2.0

//! 32-bit address-space model and stack tuner.
//!
//! Thread stacks are carved out of a fixed user-space budget (3 GiB
//! minus a configurable non-stack reservation). The conventional policy
//! reserves a fixed size per thread; the tuned policy reserves what a
//! role's recorded high-water marks justify, clamped to sane bounds.
//! Every stack carries a one-page guard at its far end; running past the
//! reservation is detected as a guard-page overrun. Peak usage is
//! watermarked per thread, classified into Low/Normal/High zones against
//! the reservation, and fed back per role so the next thread of the same
//! role gets a right-sized stack.

use std::collections::BTreeMap;

use crate::error::StackError;
use crate::sched::weights::Rat;
use crate::types::{Tick, Tid, Zone};

/// Page granularity for all stack sizes.
pub const PAGE_KIB: u64 = 4;
/// Guard region: one page at the far end of each stack.
pub const GUARD_KIB: u64 = PAGE_KIB;
/// Smallest reservation the tuner will ever hand out.
pub const MIN_STACK_KIB: u64 = 16;
/// Conventional per-thread reservation when the creator asks for nothing.
pub const DEFAULT_STACK_KIB: u64 = 8192;

/// Rounds a size up to whole pages.
pub fn round_up_page(kib: u64) -> u64 {
    kib.div_ceil(PAGE_KIB) * PAGE_KIB
}

/// Zone thresholds as exact fractions of the reservation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StackZoneConfig {
    low_frac: Rat,
    high_frac: Rat,
}

impl StackZoneConfig {
    pub fn new(low_frac: Rat, high_frac: Rat) -> Result<StackZoneConfig, StackError> {
        let zero = Rat::from_integer(0);
        let one = Rat::from_integer(1);
        if zero < low_frac && low_frac < high_frac && high_frac < one {
            Ok(StackZoneConfig { low_frac, high_frac })
        } else {
            Err(StackError::BadZoneConfig)
        }
    }

    pub fn low_frac(&self) -> Rat {
        self.low_frac
    }

    pub fn high_frac(&self) -> Rat {
        self.high_frac
    }
}

impl Default for StackZoneConfig {
    fn default() -> Self {
        StackZoneConfig {
            low_frac: Rat::new(1, 4),
            high_frac: Rat::new(9, 10),
        }
    }
}

/// Classifies a peak against its reservation. Boundaries are exclusive:
/// a peak exactly at a threshold fraction is Normal.
pub fn classify_zone(peak_kib: u64, reserved_kib: u64, config: &StackZoneConfig) -> Zone {
    let frac = Rat::new(peak_kib as i128, reserved_kib as i128);
    if frac < config.low_frac {
        Zone::Low
    } else if frac > config.high_frac {
        Zone::High
    } else {
        Zone::Normal
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StackPolicy {
    FixedSize,
    Tuned,
}

impl StackPolicy {
    pub fn as_str(&self) -> &'static str {
        match self {
            StackPolicy::FixedSize => "fixed",
            StackPolicy::Tuned => "tuned",
        }
    }
}

/// One thread's stack reservation and usage watermark.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StackAllocation {
    pub tid: Tid,
    pub role: String,
    pub reserved_kib: u64,
    pub guard_kib: u64,
    /// Highest usage sample seen; `None` until the first sample.
    pub peak_used_kib: Option<u64>,
    pub policy: StackPolicy,
    /// Set when a guard-page overrun has been recorded.
    pub faulted: bool,
}

impl StackAllocation {
    /// Total footprint in the address space, guard included.
    pub fn footprint_kib(&self) -> u64 {
        self.reserved_kib + self.guard_kib
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaultKind {
    /// The requested reservation did not fit the remaining budget.
    AllocationExhaustion { attempted_kib: u64 },
    /// Usage exceeded the reservation and hit the guard page.
    GuardPageOverrun,
}

impl FaultKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            FaultKind::AllocationExhaustion { .. } => "allocation_exhaustion",
            FaultKind::GuardPageOverrun => "guard_page_overrun",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FaultEvent {
    pub tick: Tick,
    pub tid: Tid,
    pub kind: FaultKind,
}

/// Outcome of an allocation attempt that did not error.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AllocOutcome {
    Allocated { reserved_kib: u64 },
    Exhausted(FaultEvent),
}

/// Advice for the next thread of a role.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StackAdvice {
    pub advised_kib: u64,
    /// Zone of the most recently completed lifetime of the role.
    pub zone: Zone,
    /// Human-facing nudge, present for Low and High history only.
    pub message: Option<&'static str>,
}

pub const MSG_LOW: &str = "wasting virtual memory";
pub const MSG_HIGH: &str = "may end up with a stack overflow";

/// Completed-lifetime history for one role.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct RoleHistory {
    max_peak_kib: Option<u64>,
    last_zone: Zone,
    completed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AddressSpaceConfig {
    pub total_user_bytes: u64,
    pub reserved_bytes: u64,
    pub default_stack_kib: u64,
    pub advice_max_kib: u64,
    pub zones: StackZoneConfig,
}

impl Default for AddressSpaceConfig {
    fn default() -> Self {
        AddressSpaceConfig {
            total_user_bytes: 3 * 1024 * 1024 * 1024,
            reserved_bytes: 512 * 1024 * 1024,
            default_stack_kib: DEFAULT_STACK_KIB,
            advice_max_kib: 65_536,
            zones: StackZoneConfig::default(),
        }
    }
}

impl AddressSpaceConfig {
    /// KiB available for stacks (reservations plus guards).
    pub fn budget_kib(&self) -> u64 {
        (self.total_user_bytes - self.reserved_bytes) / 1024
    }
}

/// The address-space model: live allocations, retained dead ones, role
/// histories, and the fault ledger.
#[derive(Debug, Clone)]
pub struct AddressSpaceModel {
    config: AddressSpaceConfig,
    live: BTreeMap<Tid, StackAllocation>,
    dead: Vec<StackAllocation>,
    roles: BTreeMap<String, RoleHistory>,
    faults: Vec<FaultEvent>,
    live_kib: u64,
}

/// Space totals across live and dead threads. `overhead_ratio` is
/// allocated/actual; `overhead_above_actual` is (allocated−actual)/actual,
/// the fraction wasted beyond what was touched. Both are 0 when no usage
/// was recorded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpaceReport {
    pub allocated_kib: u64,
    pub actual_peak_kib: u64,
    pub overhead_ratio: Rat,
    pub overhead_above_actual: Rat,
}

impl AddressSpaceModel {
    pub fn new(config: AddressSpaceConfig) -> AddressSpaceModel {
        AddressSpaceModel {
            config,
            live: BTreeMap::new(),
            dead: Vec::new(),
            roles: BTreeMap::new(),
            faults: Vec::new(),
            live_kib: 0,
        }
    }

    pub fn config(&self) -> &AddressSpaceConfig {
        &self.config
    }

    pub fn live(&self, tid: Tid) -> Option<&StackAllocation> {
        self.live.get(&tid)
    }

    pub fn live_count(&self) -> usize {
        self.live.len()
    }

    pub fn live_kib(&self) -> u64 {
        self.live_kib
    }

    pub fn faults(&self) -> &[FaultEvent] {
        &self.faults
    }

    /// Reservation size the policy would grant, before the budget check.
    fn plan_reservation(&self, role: &str, request_kib: Option<u64>, policy: StackPolicy) -> u64 {
        let request_or_default = round_up_page(request_kib.unwrap_or(self.config.default_stack_kib));
        match policy {
            StackPolicy::FixedSize => {
                round_up_page(request_kib.unwrap_or(0).max(self.config.default_stack_kib))
            }
            StackPolicy::Tuned => {
                let advised = match self.advise(role) {
                    Ok(advice) => advice.advised_kib,
                    // Cold start: no completed history for the role yet.
                    Err(_) => request_or_default,
                };
                advised.min(request_or_default).max(MIN_STACK_KIB)
            }
        }
    }

    /// Allocates a stack plus guard page, or records exhaustion if the
    /// budget cannot hold it. Exhaustion changes no allocation state.
    pub fn alloc_stack(
        &mut self,
        tid: Tid,
        role: &str,
        request_kib: Option<u64>,
        policy: StackPolicy,
        tick: Tick,
    ) -> Result<AllocOutcome, StackError> {
        if self.live.contains_key(&tid) {
            return Err(StackError::AlreadyAllocated(tid));
        }
        let reserved_kib = self.plan_reservation(role, request_kib, policy);
        let footprint = reserved_kib + GUARD_KIB;
        if self.live_kib + footprint > self.config.budget_kib() {
            let fault = FaultEvent {
                tick,
                tid,
                kind: FaultKind::AllocationExhaustion { attempted_kib: footprint },
            };
            self.faults.push(fault);
            return Ok(AllocOutcome::Exhausted(fault));
        }
        self.live.insert(
            tid,
            StackAllocation {
                tid,
                role: role.to_string(),
                reserved_kib,
                guard_kib: GUARD_KIB,
                peak_used_kib: None,
                policy,
                faulted: false,
            },
        );
        self.live_kib += footprint;
        Ok(AllocOutcome::Allocated { reserved_kib })
    }

    /// Records a usage sample and returns the updated watermark. The
    /// first sample beyond the reservation records a guard-page overrun
    /// and marks the thread faulted.
    pub fn record_usage(
        &mut self,
        tid: Tid,
        used_kib: u64,
        tick: Tick,
    ) -> Result<u64, StackError> {
        let alloc = self.live.get_mut(&tid).ok_or(StackError::NoSuchThread(tid))?;
        let peak = alloc.peak_used_kib.map_or(used_kib, |p| p.max(used_kib));
        alloc.peak_used_kib = Some(peak);
        if used_kib > alloc.reserved_kib && !alloc.faulted {
            alloc.faulted = true;
            self.faults.push(FaultEvent { tick, tid, kind: FaultKind::GuardPageOverrun });
        }
        Ok(peak)
    }

    /// Zone of a live thread's current watermark.
    pub fn classify(&self, tid: Tid) -> Result<Zone, StackError> {
        let alloc = self.live.get(&tid).ok_or(StackError::NoSuchThread(tid))?;
        let peak = alloc
            .peak_used_kib
            .ok_or_else(|| StackError::NoUsageData(tid.to_string()))?;
        Ok(classify_zone(peak, alloc.reserved_kib, &self.config.zones))
    }

    /// Releases a thread's stack, folds its watermark into the role
    /// history, and retains the record for reporting.
    pub fn complete_lifetime(&mut self, tid: Tid) -> Result<(), StackError> {
        let alloc = self.live.remove(&tid).ok_or(StackError::NoSuchThread(tid))?;
        self.live_kib -= alloc.footprint_kib();
        if let Some(peak) = alloc.peak_used_kib {
            let zone = classify_zone(peak, alloc.reserved_kib, &self.config.zones);
            let history = self.roles.entry(alloc.role.clone()).or_default();
            history.max_peak_kib = Some(history.max_peak_kib.map_or(peak, |p| p.max(peak)));
            history.last_zone = zone;
            history.completed += 1;
        }
        self.dead.push(alloc);
        Ok(())
    }

    /// Advice for the next thread of `role`: 1.5x the largest completed
    /// peak, page-rounded, clamped to `[MIN_STACK_KIB, advice_max_kib]`,
    /// with a nudge when the latest lifetime landed in Low or High.
    pub fn advise(&self, role: &str) -> Result<StackAdvice, StackError> {
        let history = self
            .roles
            .get(role)
            .and_then(|h| h.max_peak_kib.map(|peak| (peak, h.last_zone)))
            .ok_or_else(|| StackError::NoUsageData(role.to_string()))?;
        let (peak, zone) = history;
        // peak * 1.5 rounded up to whole pages, in one integer step:
        // ceil(3*peak / (2*PAGE)) pages.
        let pages = (3 * peak).div_ceil(2 * PAGE_KIB);
        let advised = (pages * PAGE_KIB)
            .clamp(MIN_STACK_KIB, round_up_page(self.config.advice_max_kib));
        let message = match zone {
            Zone::Low => Some(MSG_LOW),
            Zone::High => Some(MSG_HIGH),
            Zone::Normal | Zone::Unknown => None,
        };
        Ok(StackAdvice { advised_kib: advised, zone, message })
    }

    /// Advice keyed by a live thread's role.
    pub fn advise_for_tid(&self, tid: Tid) -> Result<StackAdvice, StackError> {
        let alloc = self.live.get(&tid).ok_or(StackError::NoSuchThread(tid))?;
        self.advise(&alloc.role)
    }

    /// Space totals over live and dead threads. Guards are excluded from
    /// `allocated_kib`: they are bookkeeping, not usable stack.
    pub fn space_report(&self) -> SpaceReport {
        let all = self.live.values().chain(self.dead.iter());
        let mut allocated = 0u64;
        let mut actual = 0u64;
        for alloc in all {
            allocated += alloc.reserved_kib;
            actual += alloc.peak_used_kib.unwrap_or(0);
        }
        let (ratio, above) = if actual == 0 {
            (Rat::from_integer(0), Rat::from_integer(0))
        } else {
            let a = Rat::new(allocated as i128, actual as i128);
            (a, a - Rat::from_integer(1))
        };
        SpaceReport {
            allocated_kib: allocated,
            actual_peak_kib: actual,
            overhead_ratio: ratio,
            overhead_above_actual: above,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn model() -> AddressSpaceModel {
        AddressSpaceModel::new(AddressSpaceConfig::default())
    }

    #[test]
    fn fixed_fault_begins_at_thread_320() {
        // Oracle: exact integer arithmetic on the budget.
        let config = AddressSpaceConfig::default();
        let budget = (3u64 * 1024 * 1024 * 1024 - 512 * 1024 * 1024) / 1024;
        assert_eq!(config.budget_kib(), budget);
        let per_thread = DEFAULT_STACK_KIB + GUARD_KIB;
        let fit = budget / per_thread;
        assert_eq!(fit, 319);

        let mut m = AddressSpaceModel::new(config);
        for n in 1..=320u32 {
            let outcome = m
                .alloc_stack(Tid(n), "worker", None, StackPolicy::FixedSize, 0)
                .unwrap();
            if n <= 319 {
                assert_eq!(outcome, AllocOutcome::Allocated { reserved_kib: 8192 }, "thread {n}");
            } else {
                match outcome {
                    AllocOutcome::Exhausted(fault) => {
                        assert_eq!(fault.tid, Tid(320));
                        assert_eq!(
                            fault.kind,
                            FaultKind::AllocationExhaustion { attempted_kib: per_thread }
                        );
                    }
                    other => panic!("thread 320 must exhaust, got {other:?}"),
                }
            }
        }
        assert_eq!(m.live_count(), 319);
        assert_eq!(m.faults().len(), 1);
    }

    #[test]
    fn fixed_honors_larger_requests_only() {
        let mut m = model();
        m.alloc_stack(Tid(1), "a", Some(12_288), StackPolicy::FixedSize, 0).unwrap();
        m.alloc_stack(Tid(2), "b", Some(100), StackPolicy::FixedSize, 0).unwrap();
        assert_eq!(m.live(Tid(1)).unwrap().reserved_kib, 12_288);
        assert_eq!(m.live(Tid(2)).unwrap().reserved_kib, 8192);
    }

    #[test]
    fn tuned_cold_start_falls_back_to_request_or_default() {
        let mut m = model();
        m.alloc_stack(Tid(1), "fresh", None, StackPolicy::Tuned, 0).unwrap();
        assert_eq!(m.live(Tid(1)).unwrap().reserved_kib, DEFAULT_STACK_KIB);
    }

    #[test]
    fn tuned_tiny_request_hits_minimum_clamp() {
        let mut m = model();
        m.alloc_stack(Tid(1), "tiny", Some(1), StackPolicy::Tuned, 0).unwrap();
        assert_eq!(m.live(Tid(1)).unwrap().reserved_kib, MIN_STACK_KIB);
    }

    #[test]
    fn tuned_follows_role_history() {
        let mut m = model();
        m.alloc_stack(Tid(1), "sensor", None, StackPolicy::Tuned, 0).unwrap();
        m.record_usage(Tid(1), 200, 5).unwrap();
        m.complete_lifetime(Tid(1)).unwrap();
        // 200 * 1.5 = 300, already page-aligned.
        m.alloc_stack(Tid(2), "sensor", None, StackPolicy::Tuned, 10).unwrap();
        assert_eq!(m.live(Tid(2)).unwrap().reserved_kib, 300);
    }

    #[test]
    fn double_allocation_rejected() {
        let mut m = model();
        m.alloc_stack(Tid(1), "a", None, StackPolicy::FixedSize, 0).unwrap();
        assert!(matches!(
            m.alloc_stack(Tid(1), "a", None, StackPolicy::FixedSize, 1),
            Err(StackError::AlreadyAllocated(Tid(1)))
        ));
    }

    #[test]
    fn watermark_is_running_max() {
        let mut m = model();
        m.alloc_stack(Tid(1), "a", None, StackPolicy::FixedSize, 0).unwrap();
        for (tick, used) in [(1u64, 100u64), (2, 800), (3, 300)] {
            m.record_usage(Tid(1), used, tick).unwrap();
        }
        assert_eq!(m.live(Tid(1)).unwrap().peak_used_kib, Some(800));
    }

    #[test]
    fn overrun_records_one_guard_fault() {
        let mut m = model();
        m.alloc_stack(Tid(1), "a", None, StackPolicy::FixedSize, 0).unwrap();
        m.record_usage(Tid(1), 8200, 7).unwrap();
        m.record_usage(Tid(1), 8300, 8).unwrap();
        let faults = m.faults();
        assert_eq!(faults.len(), 1);
        assert_eq!(faults[0], FaultEvent { tick: 7, tid: Tid(1), kind: FaultKind::GuardPageOverrun });
        assert!(m.live(Tid(1)).unwrap().faulted);
        assert_eq!(m.live(Tid(1)).unwrap().peak_used_kib, Some(8300));
    }

    #[test]
    fn zone_boundaries_are_exclusive() {
        let config = StackZoneConfig::default();
        // reserved 8000: thresholds at exactly 2000 and 7200.
        assert_eq!(classify_zone(1999, 8000, &config), Zone::Low);
        assert_eq!(classify_zone(2000, 8000, &config), Zone::Normal);
        assert_eq!(classify_zone(7200, 8000, &config), Zone::Normal);
        assert_eq!(classify_zone(7201, 8000, &config), Zone::High);
    }

    #[test]
    fn zone_examples() {
        let config = StackZoneConfig::default();
        // 1 MiB used of a 100 MiB reservation: deep in the Low zone.
        assert_eq!(classify_zone(1024, 102_400, &config), Zone::Low);
        // 7600 of 8192 is about 92.8%.
        assert_eq!(classify_zone(7600, 8192, &config), Zone::High);
    }

    #[test]
    fn classify_requires_samples() {
        let mut m = model();
        m.alloc_stack(Tid(1), "a", None, StackPolicy::FixedSize, 0).unwrap();
        assert!(matches!(m.classify(Tid(1)), Err(StackError::NoUsageData(_))));
        m.record_usage(Tid(1), 100, 1).unwrap();
        assert_eq!(m.classify(Tid(1)).unwrap(), Zone::Low);
    }

    #[test]
    fn advise_formula_and_clamps() {
        let mut m = model();
        // Low-zone lifetime with peak 200 on an 8 MiB stack.
        m.alloc_stack(Tid(1), "logger", None, StackPolicy::FixedSize, 0).unwrap();
        m.record_usage(Tid(1), 200, 1).unwrap();
        m.complete_lifetime(Tid(1)).unwrap();
        let advice = m.advise("logger").unwrap();
        assert_eq!(advice.advised_kib, 300);
        assert_eq!(advice.zone, Zone::Low);
        assert_eq!(advice.message, Some(MSG_LOW));

        // Peak 8 clamps up to the 16 KiB minimum.
        m.alloc_stack(Tid(2), "blinker", None, StackPolicy::FixedSize, 2).unwrap();
        m.record_usage(Tid(2), 8, 3).unwrap();
        m.complete_lifetime(Tid(2)).unwrap();
        assert_eq!(m.advise("blinker").unwrap().advised_kib, MIN_STACK_KIB);

        // Odd peak rounds up to the next page multiple of the 1.5x value.
        m.alloc_stack(Tid(3), "parser", None, StackPolicy::FixedSize, 4).unwrap();
        m.record_usage(Tid(3), 201, 5).unwrap();
        m.complete_lifetime(Tid(3)).unwrap();
        assert_eq!(m.advise("parser").unwrap().advised_kib, 304);
    }

    #[test]
    fn advise_high_history_warns_of_overflow() {
        let mut m = model();
        m.alloc_stack(Tid(1), "dsp", Some(100), StackPolicy::FixedSize, 0).unwrap();
        // Fixed policy reserves the default; push usage into High zone.
        m.record_usage(Tid(1), 8000, 1).unwrap();
        m.complete_lifetime(Tid(1)).unwrap();
        let advice = m.advise("dsp").unwrap();
        assert_eq!(advice.zone, Zone::High);
        assert_eq!(advice.message, Some(MSG_HIGH));
        assert_eq!(advice.advised_kib, 12_000);
    }

    #[test]
    fn advise_message_tracks_latest_lifetime() {
        let mut m = model();
        m.alloc_stack(Tid(1), "net", None, StackPolicy::FixedSize, 0).unwrap();
        m.record_usage(Tid(1), 100, 1).unwrap();
        m.complete_lifetime(Tid(1)).unwrap();
        assert_eq!(m.advise("net").unwrap().message, Some(MSG_LOW));

        m.alloc_stack(Tid(2), "net", None, StackPolicy::FixedSize, 2).unwrap();
        m.record_usage(Tid(2), 4000, 3).unwrap();
        m.complete_lifetime(Tid(2)).unwrap();
        let advice = m.advise("net").unwrap();
        assert_eq!(advice.message, None);
        // Peak is the maximum across completed lifetimes.
        assert_eq!(advice.advised_kib, 6000);
    }

    #[test]
    fn roles_advise_independently() {
        let mut m = model();
        m.alloc_stack(Tid(1), "alpha", None, StackPolicy::FixedSize, 0).unwrap();
        m.record_usage(Tid(1), 400, 1).unwrap();
        m.complete_lifetime(Tid(1)).unwrap();
        m.alloc_stack(Tid(2), "beta", None, StackPolicy::FixedSize, 2).unwrap();
        m.record_usage(Tid(2), 1000, 3).unwrap();
        m.complete_lifetime(Tid(2)).unwrap();
        assert_eq!(m.advise("alpha").unwrap().advised_kib, 600);
        assert_eq!(m.advise("beta").unwrap().advised_kib, 1500);
    }

    #[test]
    fn advise_without_history_errors() {
        let m = model();
        assert!(matches!(m.advise("ghost"), Err(StackError::NoUsageData(_))));
    }

    #[test]
    fn space_report_sums_live_and_dead() {
        let mut m = model();
        for n in 1..=273u32 {
            let outcome = m
                .alloc_stack(Tid(n), "fleet", None, StackPolicy::FixedSize, n as u64)
                .unwrap();
            assert!(matches!(outcome, AllocOutcome::Allocated { .. }), "thread {n}");
            m.record_usage(Tid(n), 100, n as u64).unwrap();
        }
        // Kill half; the report must still count them.
        for n in 1..=136u32 {
            m.complete_lifetime(Tid(n)).unwrap();
        }
        let report = m.space_report();
        assert_eq!(report.allocated_kib, 273 * 8192);
        assert_eq!(report.allocated_kib, 2_236_416);
        assert_eq!(report.actual_peak_kib, 273 * 100);
        assert_eq!(report.overhead_ratio, Rat::new(2_236_416, 27_300));
    }

    #[test]
    fn space_report_empty_is_zero() {
        let report = model().space_report();
        assert_eq!(report.allocated_kib, 0);
        assert_eq!(report.actual_peak_kib, 0);
        assert_eq!(report.overhead_ratio, Rat::from_integer(0));
        assert_eq!(report.overhead_above_actual, Rat::from_integer(0));
    }

    #[test]
    fn exhaustion_leaves_state_unchanged() {
        let mut config = AddressSpaceConfig::default();
        // Tiny budget: room for exactly one default stack plus guard.
        config.reserved_bytes = config.total_user_bytes - (DEFAULT_STACK_KIB + GUARD_KIB) * 1024;
        let mut m = AddressSpaceModel::new(config);
        m.alloc_stack(Tid(1), "a", None, StackPolicy::FixedSize, 0).unwrap();
        let live_before = m.live_kib();
        let outcome = m.alloc_stack(Tid(2), "b", None, StackPolicy::FixedSize, 1).unwrap();
        assert!(matches!(outcome, AllocOutcome::Exhausted(_)));
        assert_eq!(m.live_kib(), live_before);
        assert_eq!(m.live_count(), 1);
        assert!(m.live(Tid(2)).is_none());
    }

    proptest! {
        /// The live footprint never exceeds the budget, whatever the
        /// sequence of allocations and completions.
        #[test]
        fn budget_safety(ops in proptest::collection::vec((0u32..40, 1u64..20_000, prop::bool::ANY), 0..200)) {
            let mut config = AddressSpaceConfig::default();
            config.reserved_bytes = config.total_user_bytes - 200_000 * 1024;
            let budget = config.budget_kib();
            let mut m = AddressSpaceModel::new(config);
            let mut alive: std::collections::BTreeSet<u32> = Default::default();
            for (tid, size, drop_it) in ops {
                if drop_it && alive.contains(&tid) {
                    m.complete_lifetime(Tid(tid)).unwrap();
                    alive.remove(&tid);
                } else if !alive.contains(&tid) {
                    if let AllocOutcome::Allocated { .. } =
                        m.alloc_stack(Tid(tid), "p", Some(size), StackPolicy::FixedSize, 0).unwrap()
                    {
                        alive.insert(tid);
                    }
                }
                prop_assert!(m.live_kib() <= budget);
                let recomputed: u64 = alive
                    .iter()
                    .map(|t| m.live(Tid(*t)).unwrap().footprint_kib())
                    .sum();
                prop_assert_eq!(m.live_kib(), recomputed);
            }
        }

        /// Watermarks never decrease.
        #[test]
        fn watermark_monotonicity(samples in proptest::collection::vec(0u64..10_000, 1..60)) {
            let mut m = model();
            m.alloc_stack(Tid(1), "w", None, StackPolicy::FixedSize, 0).unwrap();
            let mut last = 0u64;
            for (tick, used) in samples.into_iter().enumerate() {
                let peak = m.record_usage(Tid(1), used, tick as Tick).unwrap();
                prop_assert!(peak >= last);
                last = peak;
            }
        }

        /// With history in place, tuned never reserves more than fixed
        /// for the same request.
        #[test]
        fn tuned_never_exceeds_fixed(peaks in proptest::collection::vec(1u64..9000, 1..20)) {
            let mut m = model();
            let mut tid = 0u32;
            for peak in &peaks {
                tid += 1;
                m.alloc_stack(Tid(tid), "r", None, StackPolicy::FixedSize, 0).unwrap();
                m.record_usage(Tid(tid), *peak, 0).unwrap();
                m.complete_lifetime(Tid(tid)).unwrap();
            }
            m.alloc_stack(Tid(9001), "r", None, StackPolicy::Tuned, 1).unwrap();
            m.alloc_stack(Tid(9002), "r", None, StackPolicy::FixedSize, 1).unwrap();
            let tuned = m.live(Tid(9001)).unwrap().reserved_kib;
            let fixed = m.live(Tid(9002)).unwrap().reserved_kib;
            prop_assert!(tuned <= fixed);
        }
    }
}
