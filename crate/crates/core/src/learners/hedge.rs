use rand::Rng;

use crate::error::{Error, Result};

/// Rewards may stray outside the declared range by this fraction of its width
/// (accumulated rounding) before they are rejected.
const RANGE_SLACK: f64 = 1e-9;

/// Re-anchor the cached linear weights once the largest log-weight drifts
/// this far from the anchor, well before `exp` overflows or underflows.
const REANCHOR: f64 = 300.0;

/// Exponential weights over `n` actions with full feedback.
///
/// Rewards in `[lo, hi]` are rescaled affinely to `[0, 1]` and the learning
/// rate is `sqrt(ln n / T)`. Log-weights are authoritative; linear weights
/// `exp(log_w - anchor)` are cached so sampling is a single pass.
#[derive(Debug, Clone)]
pub struct Hedge {
    eta: f64,
    lo: f64,
    hi: f64,
    // Cumulative `eta * r / (hi - lo)`. This differs from the rescaled
    // cumulative reward by the same constant `eta * t * lo / (hi - lo)` for
    // every action, which normalization removes, and lets zero rewards skip
    // the update entirely.
    log_w: Vec<f64>,
    anchor: f64,
    w: Vec<f64>,
    total: f64,
    rounds: u64,
}

pub(crate) fn check_reward(r: f64, lo: f64, hi: f64) -> Result<f64> {
    let slack = RANGE_SLACK * (hi - lo);
    if r.is_nan() || r < lo - slack || r > hi + slack {
        return Err(Error::RewardOutOfRange { reward: r, lo, hi });
    }
    Ok(r.clamp(lo, hi))
}

impl Hedge {
    pub fn new(n: usize, horizon: u64, lo: f64, hi: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("hedge needs at least one action".into()));
        }
        if horizon == 0 {
            return Err(Error::InvalidParameter("hedge horizon must be >= 1".into()));
        }
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "degenerate reward range [{lo}, {hi}]"
            )));
        }
        Ok(Self {
            eta: ((n as f64).ln() / horizon as f64).sqrt(),
            lo,
            hi,
            log_w: vec![0.0; n],
            anchor: 0.0,
            w: vec![1.0; n],
            total: n as f64,
            rounds: 0,
        })
    }

    pub fn n(&self) -> usize {
        self.log_w.len()
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn rounds(&self) -> u64 {
        self.rounds
    }

    /// Current distribution over actions.
    pub fn distribution(&self) -> Vec<f64> {
        self.w.iter().map(|w| w / self.total).collect()
    }

    pub fn probability(&self, i: usize) -> f64 {
        self.w[i] / self.total
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let mut u = rng.gen::<f64>() * self.total;
        let mut last = 0;
        for (i, &w) in self.w.iter().enumerate() {
            if w > 0.0 {
                if u < w {
                    return i;
                }
                u -= w;
                last = i;
            }
        }
        last
    }

    /// Multiplicative-weights step with one reward per action.
    pub fn update(&mut self, rewards: &[f64]) -> Result<()> {
        if rewards.len() != self.n() {
            return Err(Error::RewardLength {
                got: rewards.len(),
                expected: self.n(),
            });
        }
        let step = self.eta / (self.hi - self.lo);
        let mut max = f64::NEG_INFINITY;
        for (i, &r) in rewards.iter().enumerate() {
            let r = check_reward(r, self.lo, self.hi)?;
            if r != 0.0 {
                self.log_w[i] += step * r;
                self.w[i] = (self.log_w[i] - self.anchor).exp();
            }
            max = max.max(self.log_w[i]);
        }
        self.rounds += 1;
        if (max - self.anchor).abs() > REANCHOR {
            self.anchor = max;
            for (w, lw) in self.w.iter_mut().zip(&self.log_w) {
                *w = (lw - max).exp();
            }
        }
        self.total = self.w.iter().sum();
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_action_is_certain() {
        let mut h = Hedge::new(1, 10, 0.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..10 {
            assert_eq!(h.sample(&mut rng), 0);
            h.update(&[0.3]).unwrap();
        }
        assert_eq!(h.distribution(), vec![1.0]);
    }

    #[test]
    fn learning_rate() {
        let h = Hedge::new(4, 100, 0.0, 1.0).unwrap();
        assert_eq!(h.eta(), (4f64.ln() / 100.0).sqrt());
    }

    #[test]
    fn equal_rewards_keep_uniform() {
        let mut h = Hedge::new(5, 100, -1.0, 1.0).unwrap();
        for r in [0.5, -0.3, 1.0, 0.0] {
            h.update(&[r; 5]).unwrap();
            for p in h.distribution() {
                assert!((p - 0.2).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn dominant_action_grows_monotonically() {
        let mut h = Hedge::new(3, 1000, 0.0, 1.0).unwrap();
        let mut prev = h.probability(1);
        for _ in 0..1000 {
            h.update(&[0.2, 0.9, 0.1]).unwrap();
            let p = h.probability(1);
            assert!(p > prev);
            prev = p;
        }
        assert!(prev > 0.99);
    }

    #[test]
    fn two_action_regret_within_bound() {
        let t = 100u64;
        let mut h = Hedge::new(2, t, 0.0, 1.0).unwrap();
        let mut expected = 0.0;
        for _ in 0..t {
            expected += h.probability(0);
            h.update(&[1.0, 0.0]).unwrap();
        }
        let regret = t as f64 - expected;
        assert!(regret <= 2.0 * (t as f64 * 2f64.ln()).sqrt(), "regret {regret}");
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(Hedge::new(0, 10, 0.0, 1.0).is_err());
        assert!(Hedge::new(2, 10, 1.0, 1.0).is_err());
        let mut h = Hedge::new(2, 10, 0.0, 1.0).unwrap();
        assert!(h.update(&[0.5]).is_err());
        assert!(h.update(&[0.5, 1.1]).is_err());
        assert!(h.update(&[0.5, f64::NAN]).is_err());
        assert!(h.update(&[0.5, 1.0 + 1e-12]).is_ok());
    }

    #[test]
    fn survives_a_million_updates() {
        let n = 8;
        let mut h = Hedge::new(n, 1000, -1.0, 1.0).unwrap();
        let mut rewards = vec![0.0; n];
        for t in 0..1_000_000usize {
            for (i, r) in rewards.iter_mut().enumerate() {
                *r = if (i + t) % 3 == 0 { 1.0 } else { -1.0 } * (i as f64 / n as f64);
            }
            h.update(&rewards).unwrap();
        }
        let d = h.distribution();
        assert!(d.iter().all(|p| p.is_finite() && *p >= 0.0));
        assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
