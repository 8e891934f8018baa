//! Finite price discretizations and the discretization-gap checks built on
//! them.
//!
//! * `G_K`: the uniform grid `{0, 1/K, ..., 1}`, stored as diagonal pairs.
//! * `H_K`: adjacent pairs `((i+1)/K, i/K)`, each running a deficit of 1/K.
//! * `F_K`: pairs `(x - 2^-i, x)` and `(x, x + 2^-i)` anchored on `G_K`, all
//!   with non-negative revenue.
//!
//! Every point is built from integer numerators over a common denominator so
//! that membership and deduplication are exact.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::benchmarks::{best_fixed_price, best_pair_on_grid, Objective};
use crate::error::{Error, Result};
use crate::trade::{PricePair, ValuationSequence};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GridKind {
    Uniform { k: u64 },
    AdjacentPairs { k: u64 },
    Revenue { k: u64, t: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PriceGrid {
    kind: GridKind,
    points: Vec<PricePair>,
}

impl PriceGrid {
    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn points(&self) -> &[PricePair] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Render as CSV with header `p,q`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("p,q\n");
        for pt in &self.points {
            out.push_str(&format!(
                "{},{}\n",
                crate::harness::fmt_f64(pt.seller()),
                crate::harness::fmt_f64(pt.buyer())
            ));
        }
        out
    }
}

fn check_k(k: u64) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidParameter("grid resolution K must be >= 1".into()));
    }
    Ok(())
}

/// `⌊log2 t⌋` for `t >= 1`.
pub fn floor_log2(t: u64) -> u32 {
    assert!(t >= 1);
    63 - t.leading_zeros()
}

/// `G_K`: the K+1 points `i/K` as diagonal pairs, increasing.
pub fn uniform_grid(k: u64) -> Result<PriceGrid> {
    check_k(k)?;
    let points = (0..=k).map(|i| PricePair::from_ratio(i, i, k)).collect();
    Ok(PriceGrid {
        kind: GridKind::Uniform { k },
        points,
    })
}

/// `H_K`: the K pairs `((i+1)/K, i/K)`.
pub fn adjacent_pairs(k: u64) -> Result<PriceGrid> {
    check_k(k)?;
    let points = (0..k).map(|i| PricePair::from_ratio(i + 1, i, k)).collect();
    Ok(PriceGrid {
        kind: GridKind::AdjacentPairs { k },
        points,
    })
}

/// `F_K` for horizon `t`, with offsets `2^-i` for `i = 0..=⌊log2 t⌋`.
///
/// Points falling outside the unit square are dropped. The result is sorted
/// by (seller, buyer) and free of duplicates.
pub fn revenue_grid(k: u64, t: u64) -> Result<PriceGrid> {
    check_k(k)?;
    if t < 2 {
        return Err(Error::InvalidParameter(format!(
            "revenue grid needs horizon T >= 2, got {t}"
        )));
    }
    let m = floor_log2(t);
    let scale = 1u64 << m;
    let den = k
        .checked_mul(scale)
        .ok_or_else(|| Error::InvalidParameter(format!("K={k}, T={t} overflow the grid denominator")))?;
    let mut set = BTreeSet::new();
    for j in 0..=k {
        let x = j * scale;
        for i in 0..=m {
            let d = k << (m - i);
            if x >= d {
                set.insert((x - d, x));
            }
            if x + d <= den {
                set.insert((x, x + d));
            }
        }
    }
    let points = set
        .into_iter()
        .map(|(s, b)| PricePair::from_ratio(s, b, den))
        .collect();
    Ok(PriceGrid {
        kind: GridKind::Revenue { k, t },
        points,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GapCheck {
    /// `max_p Σ GFT(p) <= max_{H_K} Σ GFT + T/K`, and every `H_K` pair loses
    /// at most `T/K` revenue.
    Additive,
    /// `max_p Σ GFT(p) <= 2 max_{G_K} Σ GFT + T/K`.
    DoubledPrice,
    /// `max_p Σ GFT(p) <= 8 log T max_{F_K} Σ REV + 5T/K`.
    Multiplicative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LogBase {
    Natural,
    Two,
}

impl LogBase {
    pub fn log(self, x: f64) -> f64 {
        match self {
            LogBase::Natural => x.ln(),
            LogBase::Two => x.log2(),
        }
    }
}

/// Both sides of one discretization inequality `lhs <= rhs`.
#[derive(Debug, Clone, Serialize)]
pub struct DiscretizationReport {
    pub check: GapCheck,
    pub k: u64,
    pub t: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    /// Additive check: smallest total revenue over `H_K`, and its floor `-T/K`.
    pub min_grid_revenue: Option<f64>,
    pub revenue_floor: Option<f64>,
    /// Multiplicative check: the base used for `rhs`, and the right-hand side
    /// under the other base.
    pub log_base: Option<LogBase>,
    pub rhs_other_base: Option<f64>,
}

impl DiscretizationReport {
    pub fn holds(&self) -> bool {
        let revenue_ok = match (self.min_grid_revenue, self.revenue_floor) {
            (Some(r), Some(f)) => r >= f,
            _ => true,
        };
        self.lhs <= self.rhs && revenue_ok
    }

    /// Whether the multiplicative inequality holds under both log bases.
    pub fn holds_both_bases(&self) -> bool {
        self.holds() && self.rhs_other_base.is_none_or(|r| self.lhs <= r)
    }
}

fn non_empty(seq: &ValuationSequence) -> Result<()> {
    if seq.is_empty() {
        Err(Error::EmptySequence)
    } else {
        Ok(())
    }
}

/// `T/K` computed so that it dominates `n * (1/K)` for every `n <= T`.
fn per_round_budget(t: usize, k: u64) -> f64 {
    t as f64 * (1.0 / k as f64)
}

pub fn additive_gap_report(seq: &ValuationSequence, k: u64) -> Result<DiscretizationReport> {
    non_empty(seq)?;
    let grid = adjacent_pairs(k)?;
    let (_, lhs) = best_fixed_price(seq)?;
    let (_, best) = best_pair_on_grid(seq, &grid, Objective::Gft)?;
    let t = seq.len();
    let rhs = best + per_round_budget(t, k);
    let min_rev = grid
        .points()
        .iter()
        .map(|p| seq.total_rev(p))
        .fold(f64::INFINITY, f64::min);
    Ok(DiscretizationReport {
        check: GapCheck::Additive,
        k,
        t,
        lhs,
        rhs,
        slack: rhs - lhs,
        min_grid_revenue: Some(min_rev),
        revenue_floor: Some(-per_round_budget(t, k)),
        log_base: None,
        rhs_other_base: None,
    })
}

pub fn doubled_price_gap_report(seq: &ValuationSequence, k: u64) -> Result<DiscretizationReport> {
    non_empty(seq)?;
    let grid = uniform_grid(k)?;
    let (_, lhs) = best_fixed_price(seq)?;
    let (_, best) = best_pair_on_grid(seq, &grid, Objective::Gft)?;
    let t = seq.len();
    let rhs = 2.0 * best + per_round_budget(t, k);
    Ok(DiscretizationReport {
        check: GapCheck::DoubledPrice,
        k,
        t,
        lhs,
        rhs,
        slack: rhs - lhs,
        min_grid_revenue: None,
        revenue_floor: None,
        log_base: None,
        rhs_other_base: None,
    })
}

/// The horizon `t` sets both the grid's offset range and the `log T` factor;
/// it is usually `seq.len()`.
pub fn multiplicative_gap_report(
    seq: &ValuationSequence,
    k: u64,
    t: u64,
    base: LogBase,
) -> Result<DiscretizationReport> {
    non_empty(seq)?;
    if k > t {
        return Err(Error::InvalidParameter(format!(
            "multiplicative gap needs K <= T, got K={k}, T={t}"
        )));
    }
    let grid = revenue_grid(k, t)?;
    let (_, lhs) = best_fixed_price(seq)?;
    let (_, best_rev) = best_pair_on_grid(seq, &grid, Objective::Rev)?;
    let tail = 5.0 * t as f64 / k as f64;
    let rhs_for = |b: LogBase| 8.0 * b.log(t as f64) * best_rev + tail;
    let other = match base {
        LogBase::Natural => LogBase::Two,
        LogBase::Two => LogBase::Natural,
    };
    let rhs = rhs_for(base);
    Ok(DiscretizationReport {
        check: GapCheck::Multiplicative,
        k,
        t: seq.len(),
        lhs,
        rhs,
        slack: rhs - lhs,
        min_grid_revenue: None,
        revenue_floor: None,
        log_base: Some(base),
        rhs_other_base: Some(rhs_for(other)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trade::{rev, Valuation};
    use proptest::prelude::*;

    fn coords(g: &PriceGrid) -> Vec<(f64, f64)> {
        g.points().iter().map(|p| (p.seller(), p.buyer())).collect()
    }

    #[test]
    fn uniform_examples() {
        let g = uniform_grid(4).unwrap();
        let xs: Vec<f64> = g.points().iter().map(|p| p.seller()).collect();
        assert_eq!(xs, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(uniform_grid(1).unwrap().len(), 2);
        assert_eq!(uniform_grid(8).unwrap().len(), 9);
        assert!(uniform_grid(0).is_err());
    }

    #[test]
    fn adjacent_examples() {
        assert_eq!(
            coords(&adjacent_pairs(4).unwrap()),
            vec![(0.25, 0.0), (0.5, 0.25), (0.75, 0.5), (1.0, 0.75)]
        );
        assert_eq!(coords(&adjacent_pairs(2).unwrap()), vec![(0.5, 0.0), (1.0, 0.5)]);
        let g = adjacent_pairs(10).unwrap();
        assert_eq!(g.len(), 10);
        assert!(g.points().iter().all(|p| p.deficit() == 0.1));
        assert!(adjacent_pairs(0).is_err());
    }

    #[test]
    fn revenue_grid_contains_figure_points() {
        let g = revenue_grid(8, 32).unwrap();
        for i in 0..=5 {
            let q = 0.375 + (0.5f64).powi(i);
            if q <= 1.0 {
                assert!(
                    g.points().iter().any(|p| p.seller() == 0.375 && p.buyer() == q),
                    "missing (0.375, {q})"
                );
            }
        }
    }

    #[test]
    fn revenue_grid_k1_t2_by_hand() {
        // Anchors {0, 1}, offsets {1, 1/2}.
        let expected = vec![(0.0, 0.5), (0.0, 1.0), (0.5, 1.0)];
        assert_eq!(coords(&revenue_grid(1, 2).unwrap()), expected);
    }

    #[test]
    fn revenue_grid_rejects_short_horizon() {
        assert!(revenue_grid(4, 1).is_err());
    }

    #[test]
    fn floor_log2_values() {
        assert_eq!(floor_log2(1), 0);
        assert_eq!(floor_log2(2), 1);
        assert_eq!(floor_log2(31), 4);
        assert_eq!(floor_log2(32), 5);
    }

    #[test]
    fn additive_single_round() {
        let seq = ValuationSequence::new(vec![Valuation::new(0.3, 0.8).unwrap()]);
        let r = additive_gap_report(&seq, 10).unwrap();
        assert_eq!(r.lhs, 0.5);
        assert!(r.holds());
    }

    #[test]
    fn doubled_single_round() {
        let seq = ValuationSequence::new(vec![Valuation::new(0.3, 0.8).unwrap()]);
        let r = doubled_price_gap_report(&seq, 2).unwrap();
        assert_eq!(r.lhs, 0.5);
        assert_eq!(r.rhs, 2.0 * 0.5 + 0.5);
        assert!(r.holds());
    }

    #[test]
    fn multiplicative_all_trade_sequence() {
        let t = 16u64;
        let seq = ValuationSequence::new(vec![Valuation::new(0.0, 1.0).unwrap(); t as usize]);
        let r = multiplicative_gap_report(&seq, t, t, LogBase::Natural).unwrap();
        assert_eq!(r.lhs, t as f64);
        let (pair, value) =
            best_pair_on_grid(&seq, &revenue_grid(t, t).unwrap(), Objective::Rev).unwrap();
        assert_eq!((pair.seller(), pair.buyer()), (0.0, 1.0));
        assert_eq!(value, t as f64);
        assert!(r.holds_both_bases());
        assert!(multiplicative_gap_report(&seq, t + 1, t, LogBase::Natural).is_err());
    }

    #[test]
    fn no_trade_sequences_are_trivial() {
        let seq = ValuationSequence::new(vec![Valuation::new(0.9, 0.1).unwrap(); 20]);
        assert_eq!(additive_gap_report(&seq, 5).unwrap().lhs, 0.0);
        assert!(additive_gap_report(&seq, 5).unwrap().holds());
        assert!(doubled_price_gap_report(&seq, 5).unwrap().holds());
        assert!(multiplicative_gap_report(&seq, 5, 20, LogBase::Natural)
            .unwrap()
            .holds());
    }

    #[test]
    fn empty_sequence_rejected() {
        let seq = ValuationSequence::default();
        assert!(additive_gap_report(&seq, 3).is_err());
    }

    fn valuation() -> impl Strategy<Value = Valuation> {
        (0.0..=1.0f64, 0.0..=1.0f64).prop_map(|(s, b)| Valuation::new(s, b).unwrap())
    }

    proptest! {
        #[test]
        fn revenue_grid_invariants(k in 1u64..40, t in 2u64..5000) {
            let g = revenue_grid(k, t).unwrap();
            let m = floor_log2(t);
            prop_assert!(g.len() as u64 <= 2 * (k + 1) * (m as u64 + 1));
            for pair in g.points() {
                prop_assert!(pair.spread() > 0.0);
                let gap = pair.spread();
                prop_assert!((0..=m).any(|i| gap == 0.5f64.powi(i as i32)));
                prop_assert!((0.0..=1.0).contains(&pair.seller()));
                prop_assert!((0.0..=1.0).contains(&pair.buyer()));
            }
            for w in g.points().windows(2) {
                prop_assert!((w[0].seller(), w[0].buyer()) < (w[1].seller(), w[1].buyer()));
            }
        }

        #[test]
        fn grid_revenue_signs(k in 1u64..60, v in valuation()) {
            for pair in adjacent_pairs(k).unwrap().points() {
                let r = rev(pair, &v);
                prop_assert!(r == 0.0 || r == -(1.0 / k as f64));
            }
            for pair in revenue_grid(k, 64).unwrap().points() {
                prop_assert!(rev(pair, &v) >= 0.0);
            }
        }

        #[test]
        fn gap_inequalities_hold(
            vals in proptest::collection::vec(valuation(), 1..80),
            k in 1u64..12,
        ) {
            let seq = ValuationSequence::new(vals);
            let t = seq.len() as u64;
            prop_assert!(additive_gap_report(&seq, k).unwrap().holds());
            prop_assert!(doubled_price_gap_report(&seq, k).unwrap().holds());
            if t >= 2 && k <= t {
                let r = multiplicative_gap_report(&seq, k, t, LogBase::Natural).unwrap();
                prop_assert!(r.holds_both_bases());
            }
        }
    }
}
