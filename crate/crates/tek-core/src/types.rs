// SPDX-License-Identifier: Apache-2.0

//! Shared identifiers and attribute enums used across the scheduler,
//! mediator, stack model, and thread registry.

use std::fmt;

/// Kernel-space thread id. Assigned once per simulated thread, never reused.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Tid(pub u32);

impl fmt::Display for Tid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The four scheduling groups, in fixed priority order for tie-breaking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GroupName {
    Urgent,
    Normal,
    Service,
    Background,
}

impl GroupName {
    pub const ALL: [GroupName; 4] = [
        GroupName::Urgent,
        GroupName::Normal,
        GroupName::Service,
        GroupName::Background,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            GroupName::Urgent => "urgent",
            GroupName::Normal => "normal",
            GroupName::Service => "service",
            GroupName::Background => "background",
        }
    }

    pub fn parse(s: &str) -> Option<GroupName> {
        match s {
            "urgent" => Some(GroupName::Urgent),
            "normal" => Some(GroupName::Normal),
            "service" => Some(GroupName::Service),
            "background" => Some(GroupName::Background),
            _ => None,
        }
    }
}

impl fmt::Display for GroupName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Thread responsiveness class. Fixed at thread configuration and immutable
/// until the thread terminates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Criticality {
    NonTimeCritical,
    TimeCritical,
}

impl Criticality {
    pub fn as_u8(&self) -> u8 {
        match self {
            Criticality::NonTimeCritical => 0,
            Criticality::TimeCritical => 1,
        }
    }

    pub fn from_u8(b: u8) -> Option<Criticality> {
        match b {
            0 => Some(Criticality::NonTimeCritical),
            1 => Some(Criticality::TimeCritical),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Criticality::NonTimeCritical => "non_time_critical",
            Criticality::TimeCritical => "time_critical",
        }
    }
}

impl fmt::Display for Criticality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Scheduling policy. `SchedTek` routes a time-critical thread through the
/// mediator's fast region whenever it is runnable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Policy {
    SchedNormal,
    SchedTek,
}

impl Policy {
    pub fn as_u8(&self) -> u8 {
        match self {
            Policy::SchedNormal => 0,
            Policy::SchedTek => 1,
        }
    }

    pub fn from_u8(b: u8) -> Option<Policy> {
        match b {
            0 => Some(Policy::SchedNormal),
            1 => Some(Policy::SchedTek),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Policy::SchedNormal => "sched_normal",
            Policy::SchedTek => "sched_tek",
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Stack-usage zone relative to the reservation: below the low fraction,
/// above the high fraction, or in between. `Unknown` means no usage data
/// has been classified yet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Zone {
    #[default]
    Unknown,
    Low,
    Normal,
    High,
}

impl Zone {
    pub fn as_u8(&self) -> u8 {
        match self {
            Zone::Unknown => 0,
            Zone::Low => 1,
            Zone::Normal => 2,
            Zone::High => 3,
        }
    }

    pub fn from_u8(b: u8) -> Option<Zone> {
        match b {
            0 => Some(Zone::Unknown),
            1 => Some(Zone::Low),
            2 => Some(Zone::Normal),
            3 => Some(Zone::High),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Zone::Unknown => "unknown",
            Zone::Low => "low",
            Zone::Normal => "normal",
            Zone::High => "high",
        }
    }
}

impl fmt::Display for Zone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Simulated time in ticks. One tick is one simulated millisecond.
pub type Tick = u64;

/// Nanoseconds per simulated tick.
pub const NS_PER_TICK: u64 = 1_000_000;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn group_order_is_urgent_first() {
        assert!(GroupName::Urgent < GroupName::Normal);
        assert!(GroupName::Normal < GroupName::Service);
        assert!(GroupName::Service < GroupName::Background);
    }

    #[test]
    fn group_name_round_trip() {
        for g in GroupName::ALL {
            assert_eq!(GroupName::parse(g.as_str()), Some(g));
        }
        assert_eq!(GroupName::parse("fast"), None);
    }
}
