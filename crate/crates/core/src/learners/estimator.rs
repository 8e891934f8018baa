//! One-bit estimator of the gain from trade of an adjacent pair
//! `(p + 1/K, p)`.
//!
//! With probability `(p + 1/K) / (1 + 1/K)` the seller price is randomized:
//! post `(u, p)` with `u ~ U[0, p + 1/K]`. Otherwise the buyer price is
//! randomized: post `(p + 1/K, u)` with `u ~ U[p, 1]`. The estimate is the
//! trade bit of the posted pair, whose mean is
//! `(b - s + 1/K) / (1 + 1/K) * 1{s <= p + 1/K} * 1{p <= b}`,
//! within `2/K` of `GFT(p + 1/K, p)`.
//!
//! Every posted pair runs a deficit of at most `1/K`.

use rand::Rng;
use serde::Serialize;

use crate::trade::{trades, PricePair, Valuation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorBranch {
    /// Seller price drawn from `[0, p + 1/K]`, buyer price `p`.
    SellerDraw,
    /// Seller price `p + 1/K`, buyer price drawn from `[p, 1]`.
    BuyerDraw,
}

/// The randomized post chosen for one estimation round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GftProbe {
    pub posted: PricePair,
    pub branch: EstimatorBranch,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GftEstimate {
    /// 0 or 1.
    pub value: f64,
    pub posted: PricePair,
    pub branch: EstimatorBranch,
}

impl GftProbe {
    /// Turn the one-bit feedback of the posted pair into the estimate.
    pub fn estimate(&self, traded: bool) -> GftEstimate {
        GftEstimate {
            value: if traded { 1.0 } else { 0.0 },
            posted: self.posted,
            branch: self.branch,
        }
    }
}

/// Draw the pair to post when estimating adjacent pair `i` of `H_K`, i.e.
/// `((i+1)/K, i/K)`.
pub fn propose<R: Rng + ?Sized>(i: u64, k: u64, rng: &mut R) -> GftProbe {
    assert!(k >= 1 && i < k, "pair {i} is not in H_{k}");
    let kf = k as f64;
    let p = i as f64 / kf;
    let upper = (i + 1) as f64 / kf;
    let seller_draw = (i + 1) as f64 / (k + 1) as f64;
    if rng.gen::<f64>() < seller_draw {
        let u = rng.gen::<f64>() * upper;
        GftProbe {
            posted: PricePair::raw(u, p),
            branch: EstimatorBranch::SellerDraw,
        }
    } else {
        let u = p + rng.gen::<f64>() * (1.0 - p);
        GftProbe {
            posted: PricePair::raw(upper, u.min(1.0)),
            branch: EstimatorBranch::BuyerDraw,
        }
    }
}

/// Propose and immediately resolve against a known valuation.
pub fn gft_est<R: Rng + ?Sized>(i: u64, k: u64, v: &Valuation, rng: &mut R) -> GftEstimate {
    let probe = propose(i, k, rng);
    probe.estimate(trades(&probe.posted, v))
}

/// Closed-form mean of the estimator for pair `i` of `H_K`.
pub fn expected_estimate(i: u64, k: u64, v: &Valuation) -> f64 {
    let kf = k as f64;
    let p = i as f64 / kf;
    let upper = (i + 1) as f64 / kf;
    if v.seller <= upper && p <= v.buyer {
        (v.buyer - v.seller + 1.0 / kf) / (1.0 + 1.0 / kf)
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trade::gft;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn closed_form_example() {
        // p = 0.5, K = 10
        let v = Valuation::new(0.2, 0.7).unwrap();
        let mean = expected_estimate(5, 10, &v);
        assert!((mean - 0.6 / 1.1).abs() < 1e-15);
        let truth = gft(&PricePair::from_ratio(6, 5, 10), &v);
        assert!((mean - truth).abs() <= 2.0 / 10.0);
    }

    #[test]
    fn seller_above_pair_never_trades() {
        let v = Valuation::new(0.8, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..10_000 {
            assert_eq!(gft_est(5, 10, &v, &mut rng).value, 0.0);
        }
        assert_eq!(expected_estimate(5, 10, &v), 0.0);
    }

    #[test]
    fn posts_cost_at_most_one_step() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for k in [1u64, 3, 10, 64] {
            for i in 0..k {
                for _ in 0..500 {
                    let probe = propose(i, k, &mut rng);
                    let pair = probe.posted;
                    assert!((0.0..=1.0).contains(&pair.seller()));
                    assert!((0.0..=1.0).contains(&pair.buyer()));
                    // Up to rounding of the grid coordinates.
                    assert!(pair.deficit() <= 1.0 / k as f64 + f64::EPSILON);
                }
            }
        }
    }

    #[test]
    fn monte_carlo_matches_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 200_000;
        for (i, k, s, b) in [(5u64, 10u64, 0.2, 0.7), (1, 4, 0.3, 1.0), (0, 4, 0.0, 0.1)] {
            let v = Valuation::new(s, b).unwrap();
            let hits: f64 = (0..n).map(|_| gft_est(i, k, &v, &mut rng).value).sum();
            let mean = expected_estimate(i, k, &v);
            let se = (mean * (1.0 - mean) / n as f64).sqrt().max(1e-12);
            assert!(
                (hits / n as f64 - mean).abs() <= 4.0 * se,
                "i={i} k={k} s={s} b={b}: {} vs {mean}",
                hits / n as f64
            );
        }
    }
}
