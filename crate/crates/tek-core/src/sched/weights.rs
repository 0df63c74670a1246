// SPDX-License-Identifier: Apache-2.0

//! Nice values and the weight tables behind fair-share accounting.
//!
//! Two tables are provided. `PaperLinear` uses `weight(n) = 275 - 10n`,
//! which makes four threads at nice 1..4 consume exactly 26.5%, 25.5%,
//! 24.5%, and 23.5% of the CPU. `Geometric` uses `1024 * 1.25^(-n)`
//! rounded to the nearest integer, the multiplicative progression behind
//! the kernel's table (the kernel's published entries were hand-rounded,
//! so a few differ from the formula by one or two counts). The two tables
//! disagree on the shares they produce; `PaperLinear` is the default.

use num_rational::Ratio;

use crate::error::SchedError;

/// Exact rational used for shares and vruntime scaling.
pub type Rat = Ratio<i128>;

/// User-visible priority in `[-20, 19]`. Lower means higher weight.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NiceValue(i8);

impl NiceValue {
    pub const MIN: i8 = -20;
    pub const MAX: i8 = 19;

    pub fn new(value: i8) -> Result<NiceValue, SchedError> {
        if (Self::MIN..=Self::MAX).contains(&value) {
            Ok(NiceValue(value))
        } else {
            Err(SchedError::NiceOutOfRange(value))
        }
    }

    pub fn get(&self) -> i8 {
        self.0
    }

    /// Index into a 40-entry weight array.
    fn index(&self) -> usize {
        (self.0 as i16 + 20) as usize
    }
}

impl std::fmt::Display for NiceValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WeightTableKind {
    PaperLinear,
    Geometric,
}

impl WeightTableKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            WeightTableKind::PaperLinear => "paper_linear",
            WeightTableKind::Geometric => "geometric",
        }
    }

    pub fn parse(s: &str) -> Option<WeightTableKind> {
        match s {
            "paper_linear" => Some(WeightTableKind::PaperLinear),
            "geometric" => Some(WeightTableKind::Geometric),
            _ => None,
        }
    }
}

/// 40 positive weights indexed by `nice + 20`, strictly decreasing in nice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightTable {
    kind: WeightTableKind,
    weights: [i128; 40],
}

impl WeightTable {
    pub fn new(kind: WeightTableKind) -> WeightTable {
        let mut weights = [0i128; 40];
        for (idx, w) in weights.iter_mut().enumerate() {
            let nice = idx as i64 - 20;
            *w = match kind {
                WeightTableKind::PaperLinear => (275 - 10 * nice) as i128,
                WeightTableKind::Geometric => geometric_weight(nice),
            };
        }
        WeightTable { kind, weights }
    }

    pub fn paper_linear() -> WeightTable {
        WeightTable::new(WeightTableKind::PaperLinear)
    }

    pub fn geometric() -> WeightTable {
        WeightTable::new(WeightTableKind::Geometric)
    }

    pub fn kind(&self) -> WeightTableKind {
        self.kind
    }

    /// Weight for a nice value, as an exact (integral) rational.
    pub fn weight(&self, nice: NiceValue) -> Rat {
        Rat::from_integer(self.weights[nice.index()])
    }

    /// `weight(0) / weight(nice)`: the factor that converts real run-time
    /// into virtual run-time for a thread at this nice level.
    pub fn vruntime_factor(&self, nice: NiceValue) -> Rat {
        Rat::new(self.weights[NiceValue::default().index()], self.weights[nice.index()])
    }
}

impl Default for WeightTable {
    fn default() -> Self {
        WeightTable::paper_linear()
    }
}

/// `1024 * 1.25^(-nice)` rounded to the nearest integer, computed exactly
/// as `1024 * 4^nice / 5^nice`. No half-way cases occur for nice in
/// `[-20, 19]`, so the rounding mode is immaterial.
fn geometric_weight(nice: i64) -> i128 {
    let ratio = if nice >= 0 {
        Rat::new(1024 * 4i128.pow(nice as u32), 5i128.pow(nice as u32))
    } else {
        let k = (-nice) as u32;
        Rat::new(1024 * 5i128.pow(k), 4i128.pow(k))
    };
    ratio.round().to_integer()
}

/// Per-thread CPU share under fair scheduling: `weight_i / sum(weights)`.
/// Shares are exact rationals and sum to 1.
pub fn cpu_shares<T: Copy>(
    threads: &[(T, NiceValue)],
    table: &WeightTable,
) -> Result<Vec<(T, Rat)>, SchedError> {
    if threads.is_empty() {
        return Err(SchedError::NoRunnableThreads);
    }
    let total: Rat = threads
        .iter()
        .map(|(_, nice)| table.weight(*nice))
        .sum();
    Ok(threads
        .iter()
        .map(|(id, nice)| (*id, table.weight(*nice) / total))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    #[test]
    fn nice_range_is_enforced() {
        assert!(NiceValue::new(-20).is_ok());
        assert!(NiceValue::new(19).is_ok());
        assert!(NiceValue::new(-21).is_err());
        assert!(NiceValue::new(20).is_err());
    }

    #[test]
    fn paper_linear_endpoints() {
        let t = WeightTable::paper_linear();
        assert_eq!(t.weight(NiceValue::new(0).unwrap()), Rat::from_integer(275));
        assert_eq!(t.weight(NiceValue::new(19).unwrap()), Rat::from_integer(85));
        assert_eq!(t.weight(NiceValue::new(-20).unwrap()), Rat::from_integer(475));
    }

    #[test]
    fn geometric_anchor_and_first_step() {
        let t = WeightTable::geometric();
        assert_eq!(t.weight(NiceValue::new(0).unwrap()), Rat::from_integer(1024));
        // 1024 / 1.25 = 819.2 -> 819
        assert_eq!(t.weight(NiceValue::new(1).unwrap()), Rat::from_integer(819));
    }

    /// Regenerates the geometric table with floating-point arithmetic and
    /// checks it against the exact-rational construction.
    #[test]
    fn geometric_regeneration_oracle() {
        let t = WeightTable::geometric();
        for nice in -20i32..=19 {
            let expect = (1024.0 * 1.25f64.powi(-nice)).round() as i128;
            let got = t.weight(NiceValue::new(nice as i8).unwrap()).to_integer();
            assert_eq!(got, expect, "nice {nice}");
        }
    }

    #[test]
    fn tables_are_positive_and_strictly_decreasing() {
        for table in [WeightTable::paper_linear(), WeightTable::geometric()] {
            let mut prev: Option<Rat> = None;
            for nice in NiceValue::MIN..=NiceValue::MAX {
                let w = table.weight(NiceValue::new(nice).unwrap());
                assert!(w > Rat::from_integer(0));
                if let Some(p) = prev {
                    assert!(w < p, "weights must strictly decrease in nice");
                }
                prev = Some(w);
            }
        }
    }

    #[test]
    fn shares_reproduce_published_percentages() {
        let table = WeightTable::paper_linear();
        let threads: Vec<(u32, NiceValue)> = [1, 2, 3, 4]
            .iter()
            .enumerate()
            .map(|(i, &n)| (i as u32, NiceValue::new(n).unwrap()))
            .collect();
        let shares = cpu_shares(&threads, &table).unwrap();
        let expect = [
            Rat::new(265, 1000),
            Rat::new(255, 1000),
            Rat::new(245, 1000),
            Rat::new(235, 1000),
        ];
        for ((_, got), want) in shares.iter().zip(expect) {
            assert_eq!(*got, want);
        }
        let sum: Rat = shares.iter().map(|(_, s)| *s).sum();
        assert!(sum.is_one());
    }

    #[test]
    fn shares_single_thread_and_symmetry() {
        let table = WeightTable::geometric();
        let one = cpu_shares(&[(7u32, NiceValue::default())], &table).unwrap();
        assert_eq!(one[0].1, Rat::one());

        let five = NiceValue::new(5).unwrap();
        let thirds = cpu_shares(&[(1u32, five), (2, five), (3, five)], &table).unwrap();
        for (_, s) in thirds {
            assert_eq!(s, Rat::new(1, 3));
        }
    }

    #[test]
    fn shares_empty_list_is_an_error() {
        let table = WeightTable::paper_linear();
        let none: [(u32, NiceValue); 0] = [];
        assert!(matches!(
            cpu_shares(&none, &table),
            Err(SchedError::NoRunnableThreads)
        ));
    }
}
