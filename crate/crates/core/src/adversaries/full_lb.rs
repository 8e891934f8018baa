//! Full-feedback lower-bound instance: each round is drawn uniformly from
//! `(0, 1/4)`, `(3/4, 1)` and `(3/4, 1/4)`.

use num_rational::Ratio;
use rand::Rng;
use serde::Serialize;

use super::{iid_sequence, FiniteValuationDistribution};
use crate::benchmarks::best_fixed_price;
use crate::trade::Valuation;

type Q = Ratio<i64>;

/// The three support points as exact rationals.
const POINTS: [(i64, i64); 3] = [(0, 1), (3, 4), (3, 1)]; // quarters

pub fn full_lb_distribution() -> FiniteValuationDistribution {
    let support = POINTS
        .iter()
        .map(|&(s, b)| Valuation::new(s as f64 / 4.0, b as f64 / 4.0).unwrap())
        .collect();
    FiniteValuationDistribution::new(support, vec![1.0 / 3.0; 3]).expect("uniform over three points")
}

/// Expected one-round gain from trade of a posted pair, by price region.
#[derive(Debug, Clone, Serialize)]
pub struct RegionValue {
    pub region: &'static str,
    pub representative: (String, String),
    pub expected_gft: String,
}

/// Exact expected gain from trade of `(p, q)`, given in quarters.
fn expected_gft(p: Q, q: Q) -> Q {
    let mut total = Q::from_integer(0);
    for &(s, b) in &POINTS {
        let (s, b) = (Q::new(s, 4), Q::new(b, 4));
        if s <= p && q <= b {
            total += (b - s) / 3;
        }
    }
    total
}

/// The gain from trade depends on `(p, q)` only through `1{p >= 3/4}` and
/// `1{q <= 1/4}`, so one representative per region covers every pair.
pub fn region_values() -> Vec<RegionValue> {
    let regions = [
        ("p < 3/4, q > 1/4", Q::new(0, 1), Q::new(1, 2)),
        ("p < 3/4, q <= 1/4", Q::new(0, 1), Q::new(1, 4)),
        ("p >= 3/4, q > 1/4", Q::new(3, 4), Q::new(1, 1)),
        ("p >= 3/4, q <= 1/4", Q::new(3, 4), Q::new(1, 4)),
    ];
    regions
        .iter()
        .map(|&(region, p, q)| RegionValue {
            region,
            representative: (p.to_string(), q.to_string()),
            expected_gft: expected_gft(p, q).to_string(),
        })
        .collect()
}

/// Largest one-round expected gain from trade of any pair.
pub fn per_round_ceiling() -> Q {
    let cut_p = [Q::new(0, 1), Q::new(3, 4)];
    let cut_q = [Q::new(1, 4), Q::new(1, 2)];
    cut_p
        .iter()
        .flat_map(|&p| cut_q.iter().map(move |&q| expected_gft(p, q)))
        .max()
        .unwrap()
}

/// Monte Carlo estimate of `E[max_p Σ GFT_t(p)]`: (mean, standard error).
pub fn best_price_mean<R: Rng + ?Sized>(t: usize, reps: usize, rng: &mut R) -> (f64, f64) {
    let dist = full_lb_distribution();
    let values: Vec<f64> = (0..reps)
        .map(|_| best_fixed_price(&iid_sequence(&dist, t, rng)).unwrap().1)
        .collect();
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// `T/12 + 5√T/216`.
pub fn best_price_lower_bound(t: usize) -> f64 {
    t as f64 / 12.0 + 5.0 * (t as f64).sqrt() / 216.0
}

/// Exact `E|S_n|` for a simple symmetric random walk.
pub fn random_walk_mean_distance(n: u64) -> f64 {
    // Σ_k |2k - n| C(n, k) 2^-n, with log-binomials to stay finite.
    let ln2 = std::f64::consts::LN_2;
    let mut ln_c = 0.0f64; // ln C(n, 0)
    let mut total = 0.0;
    for k in 0..=n {
        if k > 0 {
            ln_c += ((n - k + 1) as f64).ln() - (k as f64).ln();
        }
        let dist = (2 * k as i64 - n as i64).unsigned_abs() as f64;
        total += dist * (ln_c - n as f64 * ln2).exp();
    }
    total
}
