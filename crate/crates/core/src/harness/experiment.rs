//! Seeded replication of GFT-Max runs over a list of horizons.

use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{derive_seed, fmt_f64};
use crate::adversaries::{generate, Family, FamilyParams};
use crate::benchmarks::best_fixed_price;
use crate::error::{Error, Result};
use crate::gftmax::{gft_max, Algo, GftMaxConfig, RunTrace};

/// Horizons below this are excluded from slope fits.
pub const MIN_FIT_HORIZON: u64 = 256;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub algo: Algo,
    pub adversary: Family,
    #[serde(default)]
    pub family: FamilyParams,
    pub horizons: Vec<u64>,
    pub reps: usize,
    #[serde(default)]
    pub seed: u64,
    /// Directory receiving `curve.csv`, `summary.json` and optional traces.
    #[serde(default)]
    pub out: Option<PathBuf>,
    /// Write one round-by-round CSV per replication.
    #[serde(default)]
    pub traces: bool,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.horizons.is_empty() {
            return Err(Error::Config("at least one horizon is required".into()));
        }
        if self.horizons.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config(format!(
                "horizons must be strictly increasing, got {:?}",
                self.horizons
            )));
        }
        if self.reps == 0 {
            return Err(Error::Config("replications must be >= 1".into()));
        }
        for &t in &self.horizons {
            GftMaxConfig::preset(self.algo, t).validate()?;
        }
        Ok(())
    }
}

/// Outcome of one replication.
#[derive(Debug, Clone, Serialize)]
pub struct Replication {
    pub rep: usize,
    pub seed: u64,
    pub tau: Option<usize>,
    pub total_gft: f64,
    pub best_fixed_price: f64,
    pub best_fixed_price_value: f64,
    pub regret: f64,
    pub budget_final: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct HorizonStats {
    pub t: u64,
    pub completed: usize,
    pub mean_regret: f64,
    pub std_regret: f64,
    pub mean_budget: f64,
    pub min_budget: f64,
    /// Fraction of runs whose revenue phase never reached the threshold.
    pub tau_none_fraction: f64,
    pub bound_value: f64,
    pub bound_vacuous: bool,
    pub replications: Vec<Replication>,
}

/// OLS fit of `ln(mean regret)` on `ln T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub std_err: f64,
    /// Two-sided 95% interval from the Student t quantile.
    pub ci95: (f64, f64),
    pub points: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct AggregateResult {
    pub config: ExperimentConfig,
    pub horizons: Vec<HorizonStats>,
    pub slope: Option<SlopeFit>,
    /// One diagnostic per aborted replication.
    pub failures: Vec<String>,
}

impl AggregateResult {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn curve_csv(&self) -> String {
        let mut out = String::from("T,mean_regret,std_regret,mean_budget\n");
        for h in &self.horizons {
            out.push_str(&format!(
                "{},{},{},{}\n",
                h.t,
                fmt_f64(h.mean_regret),
                fmt_f64(h.std_regret),
                fmt_f64(h.mean_budget)
            ));
        }
        out
    }
}

/// 97.5% quantiles of Student's t for 1 to 30 degrees of freedom.
const T975: [f64; 30] = [
    12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228, 2.201, 2.179, 2.160,
    2.145, 2.131, 2.120, 2.110, 2.101, 2.093, 2.086, 2.080, 2.074, 2.069, 2.064, 2.060, 2.056,
    2.052, 2.048, 2.045, 2.042,
];

/// Fit over points with `T >= 256` and positive mean regret; needs at least
/// four such points.
pub fn fit_slope(points: &[(u64, f64)]) -> Option<SlopeFit> {
    let xy: Vec<(f64, f64)> = points
        .iter()
        .filter(|(t, r)| *t >= MIN_FIT_HORIZON && *r > 0.0)
        .map(|&(t, r)| ((t as f64).ln(), r.ln()))
        .collect();
    let n = xy.len();
    if n < 4 {
        return None;
    }
    let nf = n as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xy.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let std_err = (sse / (nf - 2.0) / sxx).sqrt();
    let q = T975.get(n - 3).copied().unwrap_or(1.96);
    Some(SlopeFit {
        slope,
        intercept,
        std_err,
        ci95: (slope - q * std_err, slope + q * std_err),
        points: n,
    })
}

fn replicate(config: &ExperimentConfig, t: u64, rep: usize) -> Result<(Replication, RunTrace)> {
    let seed = derive_seed(config.seed, t, rep as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let seq = generate(config.adversary, &config.family, t as usize, &mut rng)?;
    let trace = gft_max(&GftMaxConfig::preset(config.algo, t), &seq, &mut rng)?;
    let (price, value) = best_fixed_price(&seq)?;
    let budget = trace.budget();
    Ok((
        Replication {
            rep,
            seed,
            tau: trace.tau,
            total_gft: trace.total_gft(),
            best_fixed_price: price,
            best_fixed_price_value: value,
            regret: value - trace.total_gft(),
            budget_final: budget,
        },
        trace,
    ))
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let std = if xs.len() > 1 {
        (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    (mean, std)
}

/// Run every horizon and replication, then write artifacts if `config.out`
/// is set. Replications run in parallel and are merged by index, so results
/// do not depend on completion order.
pub fn run(config: &ExperimentConfig) -> Result<AggregateResult> {
    config.validate()?;
    let mut horizons = Vec::new();
    let mut failures = Vec::new();
    let trace_dir = config.out.as_ref().filter(|_| config.traces).map(|d| d.join("traces"));
    if let Some(dir) = &trace_dir {
        fs::create_dir_all(dir)?;
    }
    for &t in &config.horizons {
        let results: Vec<Result<(Replication, RunTrace)>> = (0..config.reps)
            .into_par_iter()
            .map(|rep| replicate(config, t, rep))
            .collect();
        let mut reps = Vec::with_capacity(results.len());
        for (rep, r) in results.into_iter().enumerate() {
            match r {
                Ok((summary, trace)) => {
                    if let Some(dir) = &trace_dir {
                        write_trace(dir, t, rep, &trace)?;
                    }
                    reps.push(summary);
                }
                Err(e) => failures.push(format!("T={t} replication {rep}: {e}")),
            }
        }
        let regrets: Vec<f64> = reps.iter().map(|r| r.regret).collect();
        let budgets: Vec<f64> = reps.iter().map(|r| r.budget_final).collect();
        let (mean_regret, std_regret) = mean_std(&regrets);
        let preset = GftMaxConfig::preset(config.algo, t);
        horizons.push(HorizonStats {
            t,
            completed: reps.len(),
            mean_regret,
            std_regret,
            mean_budget: mean_std(&budgets).0,
            min_budget: budgets.iter().copied().fold(f64::INFINITY, f64::min),
            tau_none_fraction: reps.iter().filter(|r| r.tau.is_none()).count() as f64
                / reps.len().max(1) as f64,
            bound_value: preset.bound(),
            bound_vacuous: preset.bound_vacuous(),
            replications: reps,
        });
    }
    let points: Vec<(u64, f64)> = horizons.iter().map(|h| (h.t, h.mean_regret)).collect();
    let result = AggregateResult {
        config: config.clone(),
        horizons,
        slope: fit_slope(&points),
        failures,
    };
    if let Some(dir) = &config.out {
        write_artifacts(&result, dir)?;
    }
    Ok(result)
}

fn write_trace(dir: &Path, t: u64, rep: usize, trace: &RunTrace) -> Result<()> {
    fs::write(dir.join(format!("T{t}_rep{rep}.csv")), trace.to_csv())?;
    Ok(())
}

pub fn write_artifacts(result: &AggregateResult, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("curve.csv"), result.curve_csv())?;
    fs::write(dir.join("summary.json"), serde_json::to_string_pretty(result)? + "\n")?;
    Ok(())
}
