// SPDX-License-Identifier: Apache-2.0

//! Ordered run queue keyed by virtual run-time.
//!
//! The queue is a balanced-tree set of `(vruntime, tid)` keys plus a
//! tid-to-vruntime index, so insert, remove, and min-lookup are all
//! logarithmic in the queue length. Every key comparison bumps a
//! thread-local counter, which lets tests bound the real comparison cost
//! of an operation instead of trusting the structure by reputation.

use std::cell::Cell;
use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use num_rational::Ratio;

use crate::sched::weights::Rat;
use crate::types::Tid;

/// Virtual run-time: an exact, non-negative rational number of
/// nanoseconds. Grows faster for heavier nice values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VRuntime(Rat);

impl VRuntime {
    pub const ZERO: VRuntime = VRuntime(Ratio::new_raw(0, 1));

    pub fn new(value: Rat) -> VRuntime {
        VRuntime(value)
    }

    pub fn get(&self) -> Rat {
        self.0
    }

    pub fn advance(&mut self, delta: Rat) {
        self.0 += delta;
    }
}

impl std::fmt::Display for VRuntime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

thread_local! {
    static KEY_COMPARISONS: Cell<u64> = const { Cell::new(0) };
}

/// Number of queue-key comparisons made on this thread so far.
pub fn key_comparisons() -> u64 {
    KEY_COMPARISONS.with(|c| c.get())
}

/// Resets the comparison counter and returns the old value.
pub fn reset_key_comparisons() -> u64 {
    KEY_COMPARISONS.with(|c| c.replace(0))
}

/// Ordering key: vruntime first, tid as the deterministic tie-break.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct QueueKey {
    vruntime: VRuntime,
    tid: Tid,
}

impl Ord for QueueKey {
    fn cmp(&self, other: &Self) -> Ordering {
        KEY_COMPARISONS.with(|c| c.set(c.get() + 1));
        self.vruntime
            .cmp(&other.vruntime)
            .then_with(|| self.tid.cmp(&other.tid))
    }
}

impl PartialOrd for QueueKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Run queue for one scheduling group.
#[derive(Debug, Clone, Default)]
pub struct RunQueue {
    order: BTreeSet<QueueKey>,
    index: BTreeMap<Tid, VRuntime>,
}

impl RunQueue {
    pub fn new() -> RunQueue {
        RunQueue::default()
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn contains(&self, tid: Tid) -> bool {
        self.index.contains_key(&tid)
    }

    pub fn vruntime_of(&self, tid: Tid) -> Option<VRuntime> {
        self.index.get(&tid).copied()
    }

    /// Inserts a thread. Returns false (and changes nothing) if already
    /// present.
    pub fn insert(&mut self, tid: Tid, vruntime: VRuntime) -> bool {
        if self.index.contains_key(&tid) {
            return false;
        }
        self.index.insert(tid, vruntime);
        self.order.insert(QueueKey { vruntime, tid });
        true
    }

    /// Removes a thread, returning its vruntime if it was queued.
    pub fn remove(&mut self, tid: Tid) -> Option<VRuntime> {
        let vruntime = self.index.remove(&tid)?;
        let removed = self.order.remove(&QueueKey { vruntime, tid });
        debug_assert!(removed, "order set out of sync with index");
        Some(vruntime)
    }

    /// The queued thread with minimal (vruntime, tid), without removing it.
    pub fn peek_min(&self) -> Option<(Tid, VRuntime)> {
        self.order.iter().next().map(|k| (k.tid, k.vruntime))
    }

    /// Smallest vruntime currently queued.
    pub fn min_vruntime(&self) -> Option<VRuntime> {
        self.peek_min().map(|(_, v)| v)
    }

    /// Re-keys a queued thread to a new vruntime.
    pub fn update_vruntime(&mut self, tid: Tid, vruntime: VRuntime) -> bool {
        if self.remove(tid).is_none() {
            return false;
        }
        self.insert(tid, vruntime)
    }

    /// Queued threads in (vruntime, tid) order.
    pub fn iter(&self) -> impl Iterator<Item = (Tid, VRuntime)> + '_ {
        self.order.iter().map(|k| (k.tid, k.vruntime))
    }

    /// Queued tids in tid order (index order), for deterministic scans.
    pub fn tids(&self) -> impl Iterator<Item = Tid> + '_ {
        self.index.keys().copied()
    }
}
