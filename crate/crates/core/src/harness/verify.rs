//! Registered invariant suites, each run with fixed seeds.

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{derive_seed, fmt_f64};
use crate::adversaries::full_lb::{best_price_lower_bound, best_price_mean, per_round_ceiling, region_values};
use crate::adversaries::separation::{alpha_lb_sequences, alpha_reference, benchmark_gap_sequence, gap_mixture};
use crate::adversaries::{generate, twobit_lb_structure_report, uniform_sequence, Family, FamilyParams, W5Placement};
use crate::benchmarks::{best_feasible_distribution, best_feasible_distribution_brute, hindsight_report};
use crate::error::Result;
use crate::gftmax::{gft_max, Algo, GftMaxConfig};
use crate::grids::{additive_gap_report, doubled_price_gap_report, multiplicative_gap_report, DiscretizationReport, LogBase};
use crate::learners::{expected_estimate, gft_est};
use crate::trade::{gft, PricePair, Valuation, ValuationSequence};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Discretization,
    Estimator,
    Budget,
    Benchmarks,
    LbStructure,
    All,
}

impl Suite {
    fn parts(self) -> Vec<Suite> {
        use Suite::*;
        match self {
            All => vec![Discretization, Estimator, Budget, Benchmarks, LbStructure],
            s => vec![s],
        }
    }
}

/// Sizes of each suite. The defaults are the full acceptance sizes.
#[derive(Debug, Clone, Serialize)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Random sequences per `(T, K)` pair.
    pub discretization_sequences: usize,
    pub estimator_samples: usize,
    /// Runs per preset.
    pub budget_runs: usize,
    pub budget_horizon: u64,
    pub ratio_sequences: usize,
    pub hull_sequences: usize,
    pub lb_sizes: Vec<u64>,
    pub full_lb_reps: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            discretization_sequences: 500,
            estimator_samples: 100_000,
            budget_runs: 1000,
            budget_horizon: 10_000,
            ratio_sequences: 500,
            hull_sequences: 200,
            lb_sizes: vec![33, 64, 128],
            full_lb_reps: 10_000,
        }
    }
}

/// One checked inequality with both of its sides.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub suite: Suite,
    pub name: String,
    pub passed: bool,
    pub lhs: String,
    pub relation: &'static str,
    pub rhs: String,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            out.push_str(&format!(
                "[{}] {:?} {}: {} {} {} ({})\n",
                if c.passed { "PASS" } else { "FAIL" },
                c.suite,
                c.name,
                c.lhs,
                c.relation,
                c.rhs,
                c.detail
            ));
        }
        let failed = self.checks.iter().filter(|c| !c.passed).count();
        out.push_str(&format!("{} checks, {failed} failed\n", self.checks.len()));
        out
    }
}

fn check(suite: Suite, name: impl Into<String>, passed: bool, lhs: f64, relation: &'static str, rhs: f64, detail: String) -> Check {
    Check {
        suite,
        name: name.into(),
        passed,
        lhs: fmt_f64(lhs),
        relation,
        rhs: fmt_f64(rhs),
        detail,
    }
}

pub fn verify(suite: Suite, opts: &VerifyOptions) -> Result<VerifyReport> {
    let mut checks = Vec::new();
    for part in suite.parts() {
        checks.extend(match part {
            Suite::Discretization => discretization(opts)?,
            Suite::Estimator => estimator(opts),
            Suite::Budget => budget(opts)?,
            Suite::Benchmarks => benchmarks(opts)?,
            Suite::LbStructure => lb_structure(opts)?,
            Suite::All => unreachable!(),
        });
    }
    Ok(VerifyReport { seed: opts.seed, checks })
}

/// Uniform valuations for even `r`; valuations on the `1/(2K)` lattice for
/// odd `r`, which puts many of them exactly on grid points.
fn test_sequence(seed: u64, t: usize, k: u64, r: usize) -> ValuationSequence {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, t as u64 * 1000 + k, r as u64));
    if r % 2 == 0 {
        return uniform_sequence(t, &mut rng);
    }
    let m = 2 * k;
    let mut draw = || rng.gen_range(0..=m) as f64 / m as f64;
    ValuationSequence::new(
        (0..t)
            .map(|_| Valuation {
                seller: draw(),
                buyer: draw(),
            })
            .collect(),
    )
}

pub const DISCRETIZATION_CASES: [(usize, u64); 3] = [(64, 4), (100, 7), (200, 10)];

/// Worst (smallest-slack) report and number of failures, per inequality.
fn summarize(suite: Suite, name: String, reports: &[DiscretizationReport], holds: impl Fn(&DiscretizationReport) -> bool, rhs: impl Fn(&DiscretizationReport) -> f64) -> Check {
    let failures = reports.iter().filter(|r| !holds(r)).count();
    let worst = reports
        .iter()
        .min_by(|a, b| (rhs(a) - a.lhs).total_cmp(&(rhs(b) - b.lhs)))
        .expect("at least one report");
    check(
        suite,
        name,
        failures == 0,
        worst.lhs,
        "<=",
        rhs(worst),
        format!("{} sequences, {failures} failures; sides shown for the smallest slack", reports.len()),
    )
}

fn discretization(opts: &VerifyOptions) -> Result<Vec<Check>> {
    let s = Suite::Discretization;
    let mut checks = Vec::new();
    for (t, k) in DISCRETIZATION_CASES {
        let per_seq: Vec<[DiscretizationReport; 3]> = (0..opts.discretization_sequences)
            .into_par_iter()
            .map(|r| {
                let seq = test_sequence(opts.seed, t, k, r);
                Ok([
                    additive_gap_report(&seq, k)?,
                    doubled_price_gap_report(&seq, k)?,
                    multiplicative_gap_report(&seq, k, t as u64, LogBase::Natural)?,
                ])
            })
            .collect::<Result<_>>()?;
        let column = |c: usize| per_seq.iter().map(|r| r[c].clone()).collect::<Vec<_>>();
        let add = column(0);
        checks.push(summarize(s, format!("T={t} K={k} best price <= best H_K + T/K"), &add, |r| r.lhs <= r.rhs, |r| r.rhs));
        let rev_fail = add.iter().filter(|r| !r.holds()).count();
        let worst = add
            .iter()
            .min_by(|a, b| a.min_grid_revenue.unwrap().total_cmp(&b.min_grid_revenue.unwrap()))
            .unwrap();
        checks.push(check(
            s,
            format!("T={t} K={k} H_K revenue >= -T/K"),
            rev_fail == 0,
            worst.min_grid_revenue.unwrap(),
            ">=",
            worst.revenue_floor.unwrap(),
            format!("{} sequences", add.len()),
        ));
        checks.push(summarize(s, format!("T={t} K={k} best price <= 2 best G_K + T/K"), &column(1), |r| r.holds(), |r| r.rhs));
        let mult = column(2);
        checks.push(summarize(s, format!("T={t} K={k} best price <= 8 ln T best F_K revenue + 5T/K"), &mult, |r| r.holds(), |r| r.rhs));
        checks.push(summarize(
            s,
            format!("T={t} K={k} best price <= 8 log2 T best F_K revenue + 5T/K"),
            &mult,
            |r| r.holds_both_bases(),
            |r| r.rhs_other_base.unwrap(),
        ));
    }
    Ok(checks)
}

pub const ESTIMATOR_KS: [u64; 3] = [4, 10, 50];

/// `(k, i, s, b)` for every lattice point: `p = i/K` with `i < K`, and
/// `s, b` on the tenths.
pub fn estimator_lattice() -> Vec<(u64, u64, f64, f64)> {
    let tenths: Vec<f64> = (0..=10).map(|x| x as f64 / 10.0).collect();
    let mut out = Vec::new();
    for k in ESTIMATOR_KS {
        for i in 0..k {
            for &s in &tenths {
                for &b in &tenths {
                    out.push((k, i, s, b));
                }
            }
        }
    }
    out
}

fn estimator(opts: &VerifyOptions) -> Vec<Check> {
    let s = Suite::Estimator;
    let lattice = estimator_lattice();
    let mut checks = Vec::new();
    for k in ESTIMATOR_KS {
        let points: Vec<_> = lattice.iter().copied().filter(|p| p.0 == k).collect();
        let bound = 2.0 / k as f64;
        let bias: Vec<f64> = points
            .iter()
            .map(|&(k, i, s, b)| {
                let v = Valuation { seller: s, buyer: b };
                (expected_estimate(i, k, &v) - gft(&PricePair::from_ratio(i + 1, i, k), &v)).abs()
            })
            .collect();
        let worst = bias.iter().copied().fold(0.0, f64::max);
        checks.push(check(
            s,
            format!("K={k} closed-form bias"),
            bias.iter().all(|&d| d <= bound),
            worst,
            "<=",
            bound,
            format!("{} lattice points", points.len()),
        ));

        let n = opts.estimator_samples;
        // (|mc - mean|, 4 se) per point
        let dev: Vec<(f64, f64)> = points
            .par_iter()
            .enumerate()
            .map(|(j, &(k, i, s, b))| {
                let v = Valuation { seller: s, buyer: b };
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(opts.seed, k, j as u64));
                let hits: f64 = (0..n).map(|_| gft_est(i, k, &v, &mut rng).value).sum();
                let mean = expected_estimate(i, k, &v);
                let se = (mean * (1.0 - mean) / n as f64).sqrt();
                ((hits / n as f64 - mean).abs(), 4.0 * se + 1e-12)
            })
            .collect();
        let failures = dev.iter().filter(|(d, lim)| d > lim).count();
        let worst = dev.iter().copied().max_by(|a, b| (a.0 / a.1).total_cmp(&(b.0 / b.1))).unwrap();
        checks.push(check(
            s,
            format!("K={k} Monte Carlo mean within 4 standard errors"),
            failures == 0,
            worst.0,
            "<=",
            worst.1,
            format!("{} lattice points x {n} samples, {failures} outside; sides shown for the largest z-score", points.len()),
        ));
    }
    checks
}

/// The adversary of budget run `i`: uniform, full lower bound and gap
/// sequences in turn.
pub fn budget_adversary(i: usize) -> Family {
    [Family::Iid, Family::FullLb, Family::Gap][i % 3]
}

/// Final budgets of `runs` seeded runs of `algo` at horizon `t`.
pub fn budget_runs(algo: Algo, t: u64, runs: usize, seed: u64) -> Result<Vec<(f64, Option<usize>)>> {
    let config = GftMaxConfig::preset(algo, t);
    let salt = match algo {
        Algo::Full => 0,
        Algo::OneBit => 1,
    };
    (0..runs)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed ^ salt, t, i as u64));
            let seq = generate(budget_adversary(i), &FamilyParams::default(), t as usize, &mut rng)?;
            let trace = gft_max(&config, &seq, &mut rng)?;
            Ok((trace.budget(), trace.tau))
        })
        .collect()
}

/// Compensated-sum slack allowed below zero.
pub const BUDGET_TOLERANCE: f64 = 1e-9;

fn budget(opts: &VerifyOptions) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for algo in [Algo::Full, Algo::OneBit] {
        let runs = budget_runs(algo, opts.budget_horizon, opts.budget_runs, opts.seed)?;
        let min = runs.iter().map(|r| r.0).fold(f64::INFINITY, f64::min);
        let negative = runs.iter().filter(|r| r.0 < 0.0).count();
        let tau_none = runs.iter().filter(|r| r.1.is_none()).count();
        checks.push(check(
            Suite::Budget,
            format!("{algo:?} preset T={} final budget", opts.budget_horizon),
            min >= -BUDGET_TOLERANCE,
            min,
            ">=",
            -BUDGET_TOLERANCE,
            format!(
                "{} runs over uniform, full-lb and gap sequences; {negative} below zero; {tau_none} never left the revenue phase",
                runs.len()
            ),
        ));
    }
    Ok(checks)
}

fn benchmarks(opts: &VerifyOptions) -> Result<Vec<Check>> {
    let s = Suite::Benchmarks;
    let mut checks = Vec::new();

    let ratios: Vec<Option<f64>> = (0..opts.ratio_sequences)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(opts.seed, 200, r as u64));
            let t = rng.gen_range(1..=200);
            Ok(hindsight_report(&uniform_sequence(t, &mut rng))?.ratio)
        })
        .collect::<Result<_>>()?;
    let defined: Vec<f64> = ratios.iter().flatten().copied().collect();
    let lo = defined.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = defined.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    checks.push(check(
        s,
        "distribution / fixed-price ratio lower end",
        lo >= 1.0,
        lo,
        ">=",
        1.0,
        format!("{} sequences with T <= 200, {} with a defined ratio", ratios.len(), defined.len()),
    ));
    checks.push(check(s, "distribution / fixed-price ratio upper end", hi <= 2.0 + 1e-9, hi, "<=", 2.0 + 1e-9, String::new()));

    for (num, den) in [(1i64, 10i64), (1, 20), (1, 100)] {
        let eps = num as f64 / den as f64;
        let report = hindsight_report(&benchmark_gap_sequence(eps, 1000)?)?;
        let ratio = report.ratio.unwrap_or(f64::NAN);
        checks.push(check(s, format!("gap sequence eps={eps} ratio"), ratio >= 2.0 - 8.0 * eps, ratio, ">=", 2.0 - 8.0 * eps, "T=1000".into()));
        let q = Ratio::new(num, den);
        let mix = gap_mixture(q, 1000);
        let target = (Ratio::from_integer(2) - q * 8) * mix.fixed_price_bound;
        checks.push(Check {
            suite: s,
            name: format!("gap sequence eps={q} revenue-neutral mix, exact"),
            passed: mix.expected_gft >= target && mix.expected_revenue == Ratio::from_integer(0),
            lhs: mix.expected_gft.to_string(),
            relation: ">=",
            rhs: target.to_string(),
            detail: format!("(2 - 8eps) x fixed-price bound; expected revenue {}", mix.expected_revenue),
        });
    }

    let gaps: Vec<(f64, f64)> = (0..opts.hull_sequences)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(opts.seed, 12, r as u64));
            let t = rng.gen_range(1..=12);
            let seq = test_sequence(opts.seed, t, 4, r);
            let hull = best_feasible_distribution(&seq)?.value;
            let brute = best_feasible_distribution_brute(&seq)?.value;
            Ok(((hull - brute).abs(), 1e-9 * brute.abs().max(1.0)))
        })
        .collect::<Result<_>>()?;
    let worst = gaps.iter().copied().max_by(|a, b| a.0.total_cmp(&b.0)).unwrap_or((0.0, 0.0));
    checks.push(check(
        s,
        "hull oracle matches brute force",
        gaps.iter().all(|(d, tol)| d <= tol),
        worst.0,
        "<=",
        worst.1,
        format!("{} sequences with T <= 12", gaps.len()),
    ));

    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(opts.seed, 400, 0));
    let (_, s2) = alpha_lb_sequences(400, &mut rng)?;
    let alpha = alpha_reference(&s2)?;
    checks.push(Check {
        suite: s,
        name: "alpha sequence reference mix".into(),
        passed: alpha.gft_at_least_two_sevenths && alpha.revenue_non_negative,
        lhs: alpha.expected_gft.clone(),
        relation: ">=",
        rhs: "2T/7 = 800/7".into(),
        detail: format!("expected revenue {}", alpha.expected_revenue),
    });
    Ok(checks)
}

fn lb_structure(opts: &VerifyOptions) -> Result<Vec<Check>> {
    let s = Suite::LbStructure;
    let mut checks = Vec::new();
    let ceiling = per_round_ceiling();
    let regions: Vec<String> = region_values().into_iter().map(|r| format!("{}: {}", r.region, r.expected_gft)).collect();
    checks.push(Check {
        suite: s,
        name: "full-feedback instance per-round ceiling".into(),
        passed: ceiling == Ratio::new(1, 12),
        lhs: ceiling.to_string(),
        relation: "==",
        rhs: "1/12".into(),
        detail: regions.join("; "),
    });
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(opts.seed, 400, 1));
    let (mean, se) = best_price_mean(400, opts.full_lb_reps, &mut rng);
    let lb = best_price_lower_bound(400);
    checks.push(check(
        s,
        "full-feedback instance best fixed price, T=400",
        mean + 3.0 * se >= lb,
        mean + 3.0 * se,
        ">=",
        lb,
        format!("mean {mean:.6} + 3 x se {se:.6} over {} replications vs T/12 + 5 sqrt(T)/216", opts.full_lb_reps),
    ));
    for &n in &opts.lb_sizes {
        let report = twobit_lb_structure_report(n, 1, 2, W5Placement::Upper)?;
        for c in report.checks {
            checks.push(Check {
                suite: s,
                name: format!("two-bit N={n} {}", c.name),
                passed: c.passed,
                lhs: "exact".into(),
                relation: "",
                rhs: String::new(),
                detail: c.detail,
            });
        }
    }
    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> VerifyOptions {
        VerifyOptions {
            seed: 3,
            discretization_sequences: 10,
            estimator_samples: 2000,
            budget_runs: 6,
            budget_horizon: 400,
            ratio_sequences: 20,
            hull_sequences: 20,
            lb_sizes: vec![33],
            full_lb_reps: 200,
        }
    }

    #[test]
    fn small_suites_pass() {
        let report = verify(Suite::All, &small()).unwrap();
        assert!(report.passed(), "{}", report.to_text());
        assert!(report.checks.len() > 30);
    }

    #[test]
    fn lattice_size() {
        assert_eq!(estimator_lattice().len(), (4 + 10 + 50) * 121);
    }
}
