// SPDX-License-Identifier: Apache-2.0

//! Materializes behavior templates into phase sequences and stack
//! templates into demand curves.
//!
//! Each thread owns one pseudo-random stream consumed strictly in phase
//! order, so the values a thread draws depend only on how many phases it
//! has completed — never on when the scheduler ran it. That is what
//! makes baseline and mediator runs of the same scenario see identical
//! workloads.

use crate::scenario::{BehaviorTemplate, RangeSpec, StackTemplate};
use crate::sim::rng::XorShift64Star;

/// One step of a thread's life, consumed in order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    /// Run for this many ticks.
    Compute { ticks: u64 },
    /// Sleep for this many ticks.
    Block { ticks: u64 },
    /// Sleep until an event arrives.
    AwaitEvent,
    /// Terminate.
    Exit,
}

/// Lazily generates the phase sequence for one thread.
#[derive(Debug, Clone)]
pub struct PhaseGenerator {
    template: BehaviorTemplate,
    rng: XorShift64Star,
    emitted: u64,
    cycles_left: Option<u64>,
}

/// Ticks long enough to outlive any horizon, used for endless compute.
const FOREVER: u64 = u64::MAX / 2;

impl PhaseGenerator {
    pub fn new(template: BehaviorTemplate, rng: XorShift64Star) -> PhaseGenerator {
        let cycles_left = match &template {
            BehaviorTemplate::Loop { repeat, .. } => *repeat,
            _ => None,
        };
        PhaseGenerator { template, rng, emitted: 0, cycles_left }
    }

    fn draw(&mut self, range: RangeSpec) -> u64 {
        self.rng.range_inclusive(range.lo, range.hi)
    }

    /// Next phase. Deterministic in the number of calls made so far.
    pub fn next_phase(&mut self) -> Phase {
        let index = self.emitted;
        self.emitted += 1;
        match self.template.clone() {
            BehaviorTemplate::Busy => Phase::Compute { ticks: FOREVER },
            BehaviorTemplate::Compute { ticks } => {
                if index == 0 {
                    Phase::Compute { ticks: self.draw(ticks) }
                } else {
                    Phase::Exit
                }
            }
            BehaviorTemplate::Loop { burst, block, .. } => {
                // Even indices compute, odd indices block; each pair is
                // one cycle.
                if index.is_multiple_of(2) {
                    if let Some(left) = self.cycles_left {
                        if left == 0 {
                            return Phase::Exit;
                        }
                        self.cycles_left = Some(left - 1);
                    }
                    Phase::Compute { ticks: self.draw(burst) }
                } else {
                    Phase::Block { ticks: self.draw(block) }
                }
            }
            BehaviorTemplate::Handler { compute } => {
                if index.is_multiple_of(2) {
                    Phase::AwaitEvent
                } else {
                    Phase::Compute { ticks: self.draw(compute) }
                }
            }
        }
    }
}

/// Step function from executed-tick progress to stack demand in KiB.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DemandCurve {
    /// `(progress_ticks, kib)` steps, ascending in progress.
    steps: Vec<(u64, u64)>,
}

impl DemandCurve {
    pub fn from_template(template: &StackTemplate) -> DemandCurve {
        match *template {
            StackTemplate::Fixed { kib } => DemandCurve { steps: vec![(0, kib)] },
            StackTemplate::Ramp { peak_kib, over_ticks, steps } => {
                let mut curve = Vec::with_capacity(steps as usize);
                for i in 1..=steps {
                    let progress = (i - 1) * over_ticks / steps;
                    let kib = peak_kib * i / steps;
                    curve.push((progress, kib));
                }
                DemandCurve { steps: curve }
            }
        }
    }

    /// Demand after the thread has executed `progress` ticks.
    pub fn demand_at(&self, progress: u64) -> u64 {
        let mut value = 0;
        for (step_progress, kib) in &self.steps {
            if *step_progress <= progress {
                value = *kib;
            } else {
                break;
            }
        }
        value
    }

    /// Final (maximum) demand.
    pub fn peak(&self) -> u64 {
        self.steps.last().map_or(0, |(_, kib)| *kib)
    }
}
