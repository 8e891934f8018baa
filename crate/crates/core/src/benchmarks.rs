//! Hindsight benchmarks: the best fixed price, the best pair on a finite grid,
//! and the best distribution over price pairs whose expected revenue is
//! non-negative.

use std::cmp::Ordering;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gftmax::RunTrace;
use crate::grids::PriceGrid;
use crate::trade::{PricePair, ValuationSequence};

/// Relative tolerance used when two benchmark values are considered tied.
const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Objective {
    Gft,
    Rev,
}

fn non_empty(seq: &ValuationSequence) -> Result<()> {
    if seq.is_empty() {
        Err(Error::EmptySequence)
    } else {
        Ok(())
    }
}

/// `(p*, Σ_t GFT_t(p*))` for the best single price.
///
/// The objective is piecewise constant with breakpoints at the valuations and
/// upper semicontinuous, so the maximum is attained on `{0, 1, s_t, b_t}`.
/// Ties go to the smallest price.
pub fn best_fixed_price(seq: &ValuationSequence) -> Result<(f64, f64)> {
    non_empty(seq)?;
    // Only rounds with s <= b can trade at a single price.
    let mut opens: Vec<(f64, f64)> = Vec::new();
    let mut closes: Vec<(f64, f64)> = Vec::new();
    let mut scale = 1.0f64;
    for v in seq {
        if v.seller <= v.buyer {
            let g = v.gap();
            opens.push((v.seller, g));
            closes.push((v.buyer, g));
            scale += g;
        }
    }
    let by_price = |a: &(f64, f64), b: &(f64, f64)| a.0.total_cmp(&b.0);
    opens.sort_by(by_price);
    closes.sort_by(by_price);

    let mut candidates: Vec<f64> = Vec::with_capacity(2 * opens.len() + 2);
    candidates.push(0.0);
    candidates.push(1.0);
    candidates.extend(opens.iter().map(|o| o.0));
    candidates.extend(closes.iter().map(|c| c.0));
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();

    // value(c) = Σ_{s <= c} g - Σ_{b < c} g
    let (mut oi, mut ci) = (0, 0);
    let mut value = 0.0;
    let mut best = (0.0, f64::NEG_INFINITY);
    for &c in &candidates {
        while oi < opens.len() && opens[oi].0 <= c {
            value += opens[oi].1;
            oi += 1;
        }
        while ci < closes.len() && closes[ci].0 < c {
            value -= closes[ci].1;
            ci += 1;
        }
        if value > best.1 + TIE_TOL * scale {
            best = (c, value);
        }
    }
    let price = best.0;
    let exact = seq.total_gft(&PricePair::raw(price, price));
    Ok((price, exact))
}

fn objective_value(seq: &ValuationSequence, pair: &PricePair, objective: Objective) -> f64 {
    match objective {
        Objective::Gft => seq.total_gft(pair),
        Objective::Rev => seq.total_rev(pair),
    }
}

fn lex(a: &PricePair, b: &PricePair) -> Ordering {
    a.seller()
        .total_cmp(&b.seller())
        .then(a.buyer().total_cmp(&b.buyer()))
}

/// Exact argmax of the total objective over the grid; ties go to the
/// lexicographically smallest pair.
pub fn best_pair_on_grid(
    seq: &ValuationSequence,
    grid: &PriceGrid,
    objective: Objective,
) -> Result<(PricePair, f64)> {
    let mut best: Option<(PricePair, f64)> = None;
    for pair in grid.points() {
        let v = objective_value(seq, pair, objective);
        best = match best {
            None => Some((*pair, v)),
            Some((bp, bv)) => {
                if v > bv || (v == bv && lex(pair, &bp) == Ordering::Less) {
                    Some((*pair, v))
                } else {
                    Some((bp, bv))
                }
            }
        };
    }
    best.ok_or_else(|| Error::InvalidParameter("empty price grid".into()))
}

/// A distribution over at most two price pairs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixedPriceStrategy {
    pub support: Vec<(PricePair, f64)>,
    /// Expected total gain from trade.
    pub value: f64,
    /// Expected total revenue; non-negative up to rounding.
    pub expected_revenue: f64,
}

/// One candidate pair with its total gain from trade `f` and total revenue `g`.
#[derive(Debug, Clone, Copy)]
struct Candidate {
    pair: PricePair,
    f: f64,
    g: f64,
}

fn sorted_distinct(mut xs: Vec<f64>) -> Vec<f64> {
    xs.push(0.0);
    xs.push(1.0);
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    xs
}

/// Every pair of the valuation grid `{0, 1, s_t} × {0, 1, b_t}` with its
/// totals, computed through 2D cumulative sums over (seller, buyer) cells.
fn valuation_grid(seq: &ValuationSequence) -> Vec<Candidate> {
    let ps = sorted_distinct(seq.iter().map(|v| v.seller).collect());
    let qs = sorted_distinct(seq.iter().map(|v| v.buyer).collect());
    let (np, nq) = (ps.len(), qs.len());
    let idx = |xs: &[f64], x: f64| xs.partition_point(|&y| y < x);

    // cell[i][j]: rounds with s = ps[i] and b = qs[j]
    let mut count = vec![0u64; np * nq];
    let mut gain = vec![0.0f64; np * nq];
    for v in seq {
        let c = idx(&ps, v.seller) * nq + idx(&qs, v.buyer);
        count[c] += 1;
        gain[c] += v.gap();
    }
    // Accumulate: seller index ascending (s <= p), buyer index descending (b >= q).
    for i in 0..np {
        for j in (0..nq).rev() {
            let c = i * nq + j;
            if j + 1 < nq {
                count[c] += count[c + 1];
                gain[c] += gain[c + 1];
            }
        }
        if i > 0 {
            for j in 0..nq {
                count[i * nq + j] += count[(i - 1) * nq + j];
                gain[i * nq + j] += gain[(i - 1) * nq + j];
            }
        }
    }
    let mut out = Vec::with_capacity(np * nq);
    for (i, &p) in ps.iter().enumerate() {
        for (j, &q) in qs.iter().enumerate() {
            let pair = PricePair::raw(p, q);
            let c = i * nq + j;
            out.push(Candidate {
                pair,
                f: gain[c],
                g: count[c] as f64 * pair.spread(),
            });
        }
    }
    out
}

fn single(c: &Candidate) -> MixedPriceStrategy {
    MixedPriceStrategy {
        support: vec![(c.pair, 1.0)],
        value: c.f,
        expected_revenue: c.g,
    }
}

/// Mix `a` (g > 0) and `b` (g < 0) so that expected revenue is zero.
fn mix(a: &Candidate, b: &Candidate) -> MixedPriceStrategy {
    let denom = a.g - b.g;
    let wa = -b.g / denom;
    let wb = a.g / denom;
    MixedPriceStrategy {
        support: vec![(a.pair, wa), (b.pair, wb)],
        value: wa * a.f + wb * b.f,
        expected_revenue: wa * a.g + wb * b.g,
    }
}

fn best_single(cands: &[Candidate]) -> &Candidate {
    cands
        .iter()
        .filter(|c| c.g >= 0.0)
        .fold(None::<&Candidate>, |acc, c| match acc {
            Some(b) if b.f >= c.f => Some(b),
            _ => Some(c),
        })
        .expect("diagonal pairs always have zero revenue")
}

fn cross(o: &Candidate, a: &Candidate, b: &Candidate) -> f64 {
    (a.g - o.g) * (b.f - o.f) - (a.f - o.f) * (b.g - o.g)
}

/// Best distribution over price pairs with non-negative expected revenue.
///
/// The optimum is supported on at most two pairs of the valuation grid:
/// either a single pair with non-negative revenue, or a revenue-neutral mix
/// of a surplus pair and a deficit pair. The mix is read off the upper hull
/// of the candidates in the (revenue, gain) plane at revenue zero.
pub fn best_feasible_distribution(seq: &ValuationSequence) -> Result<MixedPriceStrategy> {
    non_empty(seq)?;
    let mut cands = valuation_grid(seq);
    let solo = single(best_single(&cands));

    cands.sort_by(|a, b| a.g.total_cmp(&b.g).then(b.f.total_cmp(&a.f)));
    cands.dedup_by(|later, earlier| later.g == earlier.g);
    let mut hull: Vec<Candidate> = Vec::new();
    for c in cands {
        while hull.len() >= 2 && cross(&hull[hull.len() - 2], &hull[hull.len() - 1], &c) >= 0.0 {
            hull.pop();
        }
        hull.push(c);
    }
    let straddle = hull
        .windows(2)
        .find(|w| w[0].g < 0.0 && w[1].g > 0.0)
        .map(|w| mix(&w[1], &w[0]));
    Ok(match straddle {
        Some(m) if m.value > solo.value => m,
        _ => solo,
    })
}

/// The same optimum by enumerating every single pair and every
/// surplus/deficit couple. Quadratic in the grid size; a reference oracle.
pub fn best_feasible_distribution_brute(seq: &ValuationSequence) -> Result<MixedPriceStrategy> {
    non_empty(seq)?;
    let cands = valuation_grid(seq);
    let mut best = single(best_single(&cands));
    for a in cands.iter().filter(|c| c.g > 0.0) {
        for b in cands.iter().filter(|c| c.g < 0.0) {
            let m = mix(a, b);
            if m.value > best.value {
                best = m;
            }
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FixedPrice {
    pub price: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct HindsightReport {
    pub best_fixed_price: FixedPrice,
    pub best_distribution: MixedPriceStrategy,
    /// `None` when the best fixed price earns nothing.
    pub ratio: Option<f64>,
}

pub fn hindsight_report(seq: &ValuationSequence) -> Result<HindsightReport> {
    let (price, value) = best_fixed_price(seq)?;
    let best_distribution = best_feasible_distribution(seq)?;
    let ratio = (value > 0.0).then(|| best_distribution.value / value);
    Ok(HindsightReport {
        best_fixed_price: FixedPrice { price, value },
        best_distribution,
        ratio,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Benchmark {
    FixedPrice,
    Distribution,
}

/// `benchmark - alpha * (realized total GFT)`; `alpha = 1` is plain regret.
pub fn regret(
    seq: &ValuationSequence,
    trace: &RunTrace,
    benchmark: Benchmark,
    alpha: f64,
) -> Result<f64> {
    if trace.len() != seq.len() {
        return Err(Error::LengthMismatch {
            seq: seq.len(),
            trace: trace.len(),
        });
    }
    let value = match benchmark {
        Benchmark::FixedPrice => best_fixed_price(seq)?.1,
        Benchmark::Distribution => best_feasible_distribution(seq)?.value,
    };
    Ok(value - alpha * trace.total_gft())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grids::{adjacent_pairs, revenue_grid};
    use crate::trade::Valuation;
    use proptest::prelude::*;

    fn seq(vals: &[(f64, f64)]) -> ValuationSequence {
        ValuationSequence::new(
            vals.iter()
                .map(|&(s, b)| Valuation::new(s, b).unwrap())
                .collect(),
        )
    }

    #[test]
    fn fixed_price_examples() {
        assert_eq!(best_fixed_price(&seq(&[(0.3, 0.8)])).unwrap(), (0.3, 0.5));
        let (_, v) = best_fixed_price(&seq(&[(0.0, 0.25), (0.75, 1.0)])).unwrap();
        assert_eq!(v, 0.25);
        assert!(best_fixed_price(&ValuationSequence::default()).is_err());
    }

    #[test]
    fn fixed_price_with_no_trade_is_zero_at_zero() {
        assert_eq!(best_fixed_price(&seq(&[(0.9, 0.1), (0.5, 0.2)])).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn grid_pair_examples() {
        let one = seq(&[(0.0, 1.0)]);
        let (pair, v) = best_pair_on_grid(&one, &revenue_grid(2, 2).unwrap(), Objective::Rev).unwrap();
        assert_eq!((pair.seller(), pair.buyer(), v), (0.0, 1.0, 1.0));

        let (pair, v) =
            best_pair_on_grid(&seq(&[(0.3, 0.8)]), &adjacent_pairs(4).unwrap(), Objective::Gft)
                .unwrap();
        assert!(pair.seller() >= 0.3 && pair.buyer() <= 0.8);
        assert_eq!(v, 0.5);
        assert_eq!((pair.seller(), pair.buyer()), (0.5, 0.25));

        let none = seq(&[(0.9, 0.1)]);
        let (_, v) = best_pair_on_grid(&none, &adjacent_pairs(4).unwrap(), Objective::Gft).unwrap();
        assert!(v <= 0.0);
    }

    #[test]
    fn gap_sequence_distribution_doubles_fixed_price() {
        // Alternating (0, 1/2 - e) and (1/2 + e, 1).
        let e = 0.05;
        let vals: Vec<(f64, f64)> = (0..100)
            .map(|t| if t % 2 == 0 { (0.0, 0.5 - e) } else { (0.5 + e, 1.0) })
            .collect();
        let s = seq(&vals);
        let r = hindsight_report(&s).unwrap();
        assert!(r.ratio.unwrap() >= 2.0 - 8.0 * e);
        assert!(r.best_distribution.expected_revenue >= -1e-12);
    }

    #[test]
    fn ratio_undefined_without_gain() {
        let r = hindsight_report(&seq(&[(0.9, 0.1)])).unwrap();
        assert_eq!(r.ratio, None);
    }

    fn vals(max_len: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
        let unit = prop_oneof![
            0.0..=1.0f64,
            (0u32..=10).prop_map(|i| i as f64 / 10.0),
        ];
        proptest::collection::vec((unit.clone(), unit), 1..=max_len)
    }

    proptest! {
        #[test]
        fn fixed_price_beats_dense_scan(v in vals(30)) {
            let s = seq(&v);
            let (_, best) = best_fixed_price(&s).unwrap();
            for i in 0..=1000 {
                let x = i as f64 / 1000.0;
                prop_assert!(s.total_gft(&PricePair::raw(x, x)) <= best + 1e-12);
            }
        }

        #[test]
        fn hull_matches_brute_force(v in vals(12)) {
            let s = seq(&v);
            let hull = best_feasible_distribution(&s).unwrap();
            let brute = best_feasible_distribution_brute(&s).unwrap();
            prop_assert!((hull.value - brute.value).abs() <= 1e-9, "{} vs {}", hull.value, brute.value);
            prop_assert!(hull.expected_revenue >= -1e-12);
            prop_assert!(hull.support.len() <= 2);
        }

        #[test]
        fn distribution_between_one_and_two_fixed_prices(v in vals(60)) {
            let r = hindsight_report(&seq(&v)).unwrap();
            prop_assert!(r.best_distribution.value >= r.best_fixed_price.value - 1e-9);
            prop_assert!(r.best_distribution.value <= 2.0 * r.best_fixed_price.value + 1e-9);
        }
    }
}
