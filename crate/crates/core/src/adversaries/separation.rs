//! Sequences separating the best fixed price from the best budget-feasible
//! distribution over prices.

use num_rational::Ratio;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::trade::{Valuation, ValuationSequence};

type Q = Ratio<i64>;

/// Alternates `(0, 1/2 - eps)` and `(1/2 + eps, 1)`, starting with the
/// former. Here a single price trades at most half the rounds while a
/// revenue-neutral mix trades almost all of them.
pub fn benchmark_gap_sequence(eps: f64, t: usize) -> Result<ValuationSequence> {
    if !(eps > 0.0 && eps < 0.125) {
        return Err(Error::InvalidParameter(format!("eps must lie in (0, 1/8), got {eps}")));
    }
    if t % 2 != 0 {
        return Err(Error::InvalidParameter(format!("gap sequence needs even T, got {t}")));
    }
    let low = Valuation::new(0.0, 0.5 - eps)?;
    let high = Valuation::new(0.5 + eps, 1.0)?;
    Ok(ValuationSequence::new(
        (0..t).map(|i| if i % 2 == 0 { low } else { high }).collect(),
    ))
}

/// The revenue-neutral mix on the gap sequence, in exact arithmetic:
/// `(1/2 + eps, 1/2 - eps)` with probability `alpha = (1 - 2eps)/(1 + 6eps)`,
/// `(0, 1/2 - eps)` otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GapMixture {
    pub alpha: Q,
    pub expected_gft: Q,
    pub expected_revenue: Q,
    /// `(T/2)(1/2 - eps)`, an upper bound on any single price.
    pub fixed_price_bound: Q,
}

pub fn gap_mixture(eps: Q, t: i64) -> GapMixture {
    let half = Q::new(1, 2);
    let alpha = (Q::from_integer(1) - eps * 2) / (Q::from_integer(1) + eps * 6);
    let low_gap = half - eps;
    let tq = Q::from_integer(t);
    // (1/2 + eps, 1/2 - eps) trades every round, each with gap 1/2 - eps and
    // revenue -2 eps.
    let first_gft = tq * low_gap;
    let first_rev = -(eps * 2) * tq;
    // (0, 1/2 - eps) trades only the low rounds, gap and revenue 1/2 - eps.
    let second_gft = tq / 2 * low_gap;
    let second_rev = tq / 2 * low_gap;
    let one_minus = Q::from_integer(1) - alpha;
    GapMixture {
        alpha,
        expected_gft: alpha * first_gft + one_minus * second_gft,
        expected_revenue: alpha * first_rev + one_minus * second_rev,
        fixed_price_bound: tq / 2 * low_gap,
    }
}

/// The valuations used by the alpha-regret construction.
const LOW: (f64, f64) = (0.0, 1.0 / 3.0);
const HIGH: (f64, f64) = (2.0 / 3.0, 1.0);

/// `S1`: first half uniform over `(0, 1/3)` and `(2/3, 1)`, second half
/// `(0, 0)`. `S2`: same first half, second half constant at the first half's
/// most frequent valuation (ties go to `(0, 1/3)`).
pub fn alpha_lb_sequences<R: Rng + ?Sized>(
    t: usize,
    rng: &mut R,
) -> Result<(ValuationSequence, ValuationSequence)> {
    if t % 4 != 0 {
        return Err(Error::InvalidParameter(format!(
            "alpha construction needs T divisible by 4, got {t}"
        )));
    }
    let low = Valuation::new(LOW.0, LOW.1)?;
    let high = Valuation::new(HIGH.0, HIGH.1)?;
    let first: Vec<Valuation> = (0..t / 2)
        .map(|_| if rng.gen::<bool>() { low } else { high })
        .collect();
    let lows = first.iter().filter(|v| **v == low).count();
    let mode = if 2 * lows >= first.len() { low } else { high };
    let zero = Valuation::new(0.0, 0.0)?;
    let mut s1 = first.clone();
    s1.extend(std::iter::repeat(zero).take(t / 2));
    let mut s2 = first;
    s2.extend(std::iter::repeat(mode).take(t / 2));
    Ok((ValuationSequence::new(s1), ValuationSequence::new(s2)))
}

/// Exact totals of the reference mix on `S2`: the mode with probability 4/7,
/// `(2/3, 1/3)` with probability 3/7.
#[derive(Debug, Clone, Serialize)]
pub struct AlphaReference {
    pub expected_gft: String,
    pub expected_revenue: String,
    pub gft_at_least_two_sevenths: bool,
    pub revenue_non_negative: bool,
}

pub fn alpha_reference(s2: &ValuationSequence) -> Result<AlphaReference> {
    let t = s2.len();
    if t == 0 || t % 4 != 0 {
        return Err(Error::InvalidParameter("S2 must have length divisible by 4".into()));
    }
    let is = |v: &Valuation, (s, b): (f64, f64)| v.seller == s && v.buyer == b;
    let mode = s2.rounds()[t - 1];
    let mode_is_low = is(&mode, LOW);
    let mut lows = 0i64;
    let mut highs = 0i64;
    for v in s2 {
        if is(v, LOW) {
            lows += 1;
        } else if is(v, HIGH) {
            highs += 1;
        } else {
            return Err(Error::InvalidParameter(
                "S2 may only contain (0, 1/3) and (2/3, 1)".into(),
            ));
        }
    }
    let third = Q::new(1, 3);
    // (2/3, 1/3) trades with both valuations: gain 1/3, revenue -1/3.
    let cross_gft = third * (lows + highs);
    let cross_rev = -third * (lows + highs);
    // Posting the mode trades exactly the rounds equal to it: gain and revenue 1/3.
    let mode_hits = if mode_is_low { lows } else { highs };
    let mode_gft = third * mode_hits;
    let (w_mode, w_cross) = (Q::new(4, 7), Q::new(3, 7));
    let gft = w_mode * mode_gft + w_cross * cross_gft;
    let rev = w_mode * mode_gft + w_cross * cross_rev;
    Ok(AlphaReference {
        expected_gft: gft.to_string(),
        expected_revenue: rev.to_string(),
        gft_at_least_two_sevenths: gft >= Q::new(2 * t as i64, 7),
        revenue_non_negative: rev >= Q::from_integer(0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::{best_fixed_price, hindsight_report};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn gap_sequence_example() {
        let seq = benchmark_gap_sequence(0.05, 4).unwrap();
        let pairs: Vec<(f64, f64)> = seq.iter().map(|v| (v.seller, v.buyer)).collect();
        assert_eq!(pairs, vec![(0.0, 0.45), (0.55, 1.0), (0.0, 0.45), (0.55, 1.0)]);
        assert!(benchmark_gap_sequence(0.05, 5).is_err());
        assert!(benchmark_gap_sequence(0.2, 4).is_err());
    }

    #[test]
    fn gap_sequence_benchmarks() {
        for eps in [0.1, 0.05, 0.01] {
            let seq = benchmark_gap_sequence(eps, 100).unwrap();
            let (_, fixed) = best_fixed_price(&seq).unwrap();
            assert!((fixed - 50.0 * (0.5 - eps)).abs() < 1e-9);
            let r = hindsight_report(&seq).unwrap();
            assert!(r.ratio.unwrap() >= 2.0 - 8.0 * eps);
        }
    }

    #[test]
    fn gap_mixture_is_revenue_neutral() {
        for eps in [Q::new(1, 10), Q::new(1, 20), Q::new(1, 100)] {
            let m = gap_mixture(eps, 100);
            assert_eq!(m.expected_revenue, Q::from_integer(0));
            assert!(m.expected_gft >= (Q::from_integer(2) - eps * 8) * m.fixed_price_bound);
            assert_eq!(m.expected_gft, m.fixed_price_bound * (Q::from_integer(1) + m.alpha));
        }
    }

    #[test]
    fn alpha_sequences_structure() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (s1, s2) = alpha_lb_sequences(400, &mut rng).unwrap();
        assert_eq!(&s1.rounds()[..200], &s2.rounds()[..200]);
        assert!(s1.rounds()[200..].iter().all(|v| v.seller == 0.0 && v.buyer == 0.0));
        let mode = s2.rounds()[200];
        assert!(s2.rounds()[200..].iter().all(|v| *v == mode));
        let hits = s2.rounds()[..200].iter().filter(|v| **v == mode).count();
        assert!(hits >= 100);
        let r = alpha_reference(&s2).unwrap();
        assert!(r.gft_at_least_two_sevenths && r.revenue_non_negative);
        assert!(alpha_lb_sequences(402, &mut rng).is_err());
    }

    #[test]
    fn alpha_tie_goes_to_low() {
        // Find a seed whose first half is an exact tie.
        for seed in 0..200 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (_, s2) = alpha_lb_sequences(8, &mut rng).unwrap();
            let lows = s2.rounds()[..4].iter().filter(|v| v.buyer == 1.0 / 3.0).count();
            if lows == 2 {
                assert_eq!(s2.rounds()[7].buyer, 1.0 / 3.0);
                return;
            }
        }
        panic!("no tie found");
    }
}
