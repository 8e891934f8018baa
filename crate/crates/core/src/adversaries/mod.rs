//! Valuation-sequence generators: i.i.d. samplers, lower-bound instance
//! families, and the benchmark-separation sequences.

pub mod full_lb;
pub mod separation;
pub mod twobit;

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trade::{Valuation, ValuationSequence};

pub use full_lb::full_lb_distribution;
pub use separation::{alpha_lb_sequences, benchmark_gap_sequence};
pub use twobit::{twobit_lb_distribution, twobit_lb_structure_report, TwoBitLbParams, W5Placement};

/// A distribution over finitely many valuations.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteValuationDistribution {
    support: Vec<Valuation>,
    probs: Vec<f64>,
}

impl FiniteValuationDistribution {
    pub fn new(support: Vec<Valuation>, probs: Vec<f64>) -> Result<Self> {
        if support.is_empty() || support.len() != probs.len() {
            return Err(Error::InvalidDistribution(format!(
                "{} support points but {} probabilities",
                support.len(),
                probs.len()
            )));
        }
        if let Some(p) = probs.iter().find(|p| !(**p >= 0.0)) {
            return Err(Error::InvalidDistribution(format!("negative probability {p}")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {total}"
            )));
        }
        Ok(Self { support, probs })
    }

    pub fn support(&self) -> &[Valuation] {
        &self.support
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn sampler(&self) -> impl Distribution<Valuation> + '_ {
        let index = WeightedIndex::new(&self.probs).expect("validated at construction");
        index.map(move |i| self.support[i])
    }
}

/// `t` independent draws from `dist`.
pub fn iid_sequence<R: Rng + ?Sized>(
    dist: &FiniteValuationDistribution,
    t: usize,
    rng: &mut R,
) -> ValuationSequence {
    let sampler = dist.sampler();
    ValuationSequence::new((0..t).map(|_| sampler.sample(rng)).collect())
}

/// `t` independent draws with `s` and `b` uniform on `[0, 1]`.
pub fn uniform_sequence<R: Rng + ?Sized>(t: usize, rng: &mut R) -> ValuationSequence {
    ValuationSequence::new(
        (0..t)
            .map(|_| Valuation {
                seller: rng.gen(),
                buyer: rng.gen(),
            })
            .collect(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// Independent uniform valuations on the unit square.
    Iid,
    FullLb,
    TwobitLb,
    Gap,
    AlphaLb,
}

/// Parameters shared by the family generators; unused fields are ignored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FamilyParams {
    /// Two-bit instance family size.
    pub n: u64,
    /// Two-bit instance index.
    pub k: u64,
    /// Gap sequence offset.
    pub eps: f64,
    /// Emit the second alpha sequence instead of the first.
    pub second: bool,
}

impl Default for FamilyParams {
    fn default() -> Self {
        Self {
            n: 64,
            k: 1,
            eps: 0.05,
            second: false,
        }
    }
}

/// Generate a sequence of length `t` from `family`.
pub fn generate<R: Rng + ?Sized>(
    family: Family,
    params: &FamilyParams,
    t: usize,
    rng: &mut R,
) -> Result<ValuationSequence> {
    match family {
        Family::Iid => Ok(uniform_sequence(t, rng)),
        Family::FullLb => Ok(iid_sequence(&full_lb_distribution(), t, rng)),
        Family::TwobitLb => {
            let p = TwoBitLbParams::new(params.n, params.k)?;
            Ok(iid_sequence(&twobit_lb_distribution(&p)?, t, rng))
        }
        Family::Gap => benchmark_gap_sequence(params.eps, t),
        Family::AlphaLb => {
            let (s1, s2) = alpha_lb_sequences(t, rng)?;
            Ok(if params.second { s2 } else { s1 })
        }
    }
}
