use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use budget_trade::adversaries::{generate, Family, FamilyParams};
use budget_trade::benchmarks::hindsight_report;
use budget_trade::error::{Error, Result};
use budget_trade::gftmax::Algo;
use budget_trade::grids::{adjacent_pairs, revenue_grid, uniform_grid};
use budget_trade::harness::{self, read_sequence, sequence_to_csv, ExperimentConfig, Suite, VerifyOptions};

#[derive(Parser)]
#[command(name = "budget-trade", version, about = "Repeated bilateral trade under global budget balance")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output path (a directory for `simulate`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print JSON instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Args, Clone)]
struct FamilyArgs {
    /// Two-bit family size.
    #[arg(long = "N")]
    n: Option<u64>,
    /// Two-bit instance index.
    #[arg(long)]
    k: Option<u64>,
    /// Gap sequence offset.
    #[arg(long)]
    eps: Option<f64>,
    /// Use the second alpha sequence.
    #[arg(long)]
    second: bool,
}

impl FamilyArgs {
    fn params(&self) -> FamilyParams {
        let d = FamilyParams::default();
        FamilyParams {
            n: self.n.unwrap_or(d.n),
            k: self.k.unwrap_or(d.k),
            eps: self.eps.unwrap_or(d.eps),
            second: self.second,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run GFT-Max over horizons and replications.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        algo: Option<Algo>,
        #[arg(long)]
        adversary: Option<Family>,
        /// Comma-separated horizons.
        #[arg(long = "T", value_delimiter = ',')]
        horizons: Option<Vec<u64>>,
        #[arg(long)]
        reps: Option<usize>,
        /// TOML file with the same keys; flags win.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Write per-replication traces.
        #[arg(long)]
        traces: bool,
        #[command(flatten)]
        family: FamilyArgs,
    },
    /// Hindsight benchmarks of a sequence, read from CSV or generated.
    Benchmark {
        #[command(flatten)]
        common: Common,
        /// `s,b` CSV to read.
        #[arg(long, conflicts_with = "adversary")]
        input: Option<PathBuf>,
        #[arg(long, default_value = "iid")]
        adversary: Family,
        #[arg(long = "T", default_value_t = 1000)]
        horizon: usize,
        #[command(flatten)]
        family: FamilyArgs,
    },
    /// Sequence generators.
    Adversary {
        #[command(subcommand)]
        action: AdversaryCmd,
    },
    /// Price grids.
    Grid {
        #[command(subcommand)]
        action: GridCmd,
    },
    /// Run invariant suites; exits nonzero if any check fails.
    Verify {
        suite: Suite,
        #[command(flatten)]
        common: Common,
        /// Two-bit family sizes (comma-separated).
        #[arg(long = "N", value_delimiter = ',')]
        sizes: Option<Vec<u64>>,
        /// Smaller sample sizes for a quick smoke run.
        #[arg(long)]
        quick: bool,
    },
}

#[derive(Subcommand)]
enum AdversaryCmd {
    /// Write a valuation sequence as `s,b` CSV.
    Emit {
        #[arg(long)]
        family: Family,
        #[arg(long = "T")]
        horizon: usize,
        #[command(flatten)]
        params: FamilyArgs,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum GridKindArg {
    Uniform,
    /// Adjacent pairs `H_K`.
    #[value(alias = "adjacent")]
    Pairs,
    Revenue,
}

#[derive(Subcommand)]
enum GridCmd {
    /// Write a grid as `p,q` CSV.
    Dump {
        #[arg(long)]
        kind: GridKindArg,
        #[arg(long = "K")]
        k: u64,
        /// Horizon, for the revenue grid.
        #[arg(long = "T", default_value_t = 2)]
        horizon: u64,
        #[command(flatten)]
        common: Common,
    },
}

fn emit(common: &Common, text: &str, json: Option<String>) -> Result<()> {
    let body = match (common.json, json) {
        (true, Some(j)) => j + "\n",
        _ => text.to_string(),
    };
    match &common.out {
        Some(path) => fs::write(path, body)?,
        None => print!("{body}"),
    }
    Ok(())
}

fn tv<T: serde::Serialize>(v: &T) -> Result<toml::Value> {
    toml::Value::try_from(v).map_err(|e| Error::Config(e.to_string()))
}

#[allow(clippy::too_many_arguments)]
fn simulate_config(
    config: Option<&Path>,
    common: &Common,
    algo: Option<Algo>,
    adversary: Option<Family>,
    horizons: Option<Vec<u64>>,
    reps: Option<usize>,
    traces: bool,
    family: &FamilyArgs,
) -> Result<ExperimentConfig> {
    let mut table = match config {
        Some(path) => fs::read_to_string(path)?
            .parse::<toml::Table>()
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?,
        None => toml::Table::new(),
    };
    if let Some(a) = algo {
        table.insert("algo".into(), tv(&a)?);
    }
    if let Some(a) = adversary {
        table.insert("adversary".into(), tv(&a)?);
    }
    if let Some(h) = horizons {
        table.insert("horizons".into(), tv(&h)?);
    }
    if let Some(r) = reps {
        table.insert("reps".into(), tv(&(r as u64))?);
    }
    if let Some(s) = common.seed {
        // TOML integers are signed; keep the bit pattern.
        table.insert("seed".into(), toml::Value::Integer(s as i64));
    }
    if let Some(o) = &common.out {
        table.insert("out".into(), toml::Value::String(o.display().to_string()));
    }
    if traces {
        table.insert("traces".into(), toml::Value::Boolean(true));
    }
    let fam = table
        .entry("family")
        .or_insert_with(|| toml::Value::Table(toml::Table::new()));
    if let toml::Value::Table(fam) = fam {
        if let Some(n) = family.n {
            fam.insert("n".into(), toml::Value::Integer(n as i64));
        }
        if let Some(k) = family.k {
            fam.insert("k".into(), toml::Value::Integer(k as i64));
        }
        if let Some(e) = family.eps {
            fam.insert("eps".into(), toml::Value::Float(e));
        }
        if family.second {
            fam.insert("second".into(), toml::Value::Boolean(true));
        }
    }
    table.try_into().map_err(|e: toml::de::Error| Error::Config(e.to_string()))
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Simulate {
            common,
            algo,
            adversary,
            horizons,
            reps,
            config,
            traces,
            family,
        } => {
            let cfg = simulate_config(config.as_deref(), &common, algo, adversary, horizons, reps, traces, &family)?;
            let result = harness::run(&cfg)?;
            for f in &result.failures {
                eprintln!("replication aborted: {f}");
            }
            let body = if common.json {
                serde_json::to_string_pretty(&result)? + "\n"
            } else {
                let mut text = result.curve_csv();
                if let Some(fit) = &result.slope {
                    text.push_str(&format!(
                        "# slope {} (se {}, 95% CI [{}, {}]) over {} horizons\n",
                        harness::fmt_f64(fit.slope),
                        harness::fmt_f64(fit.std_err),
                        harness::fmt_f64(fit.ci95.0),
                        harness::fmt_f64(fit.ci95.1),
                        fit.points
                    ));
                }
                text
            };
            print!("{body}");
            Ok(result.ok())
        }
        Command::Benchmark {
            common,
            input,
            adversary,
            horizon,
            family,
        } => {
            let seq = match &input {
                Some(path) => read_sequence(path)?,
                None => {
                    let mut rng = ChaCha8Rng::seed_from_u64(common.seed.unwrap_or(0));
                    generate(adversary, &family.params(), horizon, &mut rng)?
                }
            };
            let report = hindsight_report(&seq)?;
            let text = format!(
                "T={}\nbest fixed price {} value {}\nbest feasible distribution value {} expected revenue {}\nratio {}\n",
                seq.len(),
                harness::fmt_f64(report.best_fixed_price.price),
                harness::fmt_f64(report.best_fixed_price.value),
                harness::fmt_f64(report.best_distribution.value),
                harness::fmt_f64(report.best_distribution.expected_revenue),
                report.ratio.map_or("undefined".into(), harness::fmt_f64)
            );
            emit(&common, &text, Some(serde_json::to_string_pretty(&report)?))?;
            Ok(true)
        }
        Command::Adversary {
            action:
                AdversaryCmd::Emit {
                    family,
                    horizon,
                    params,
                    common,
                },
        } => {
            let mut rng = ChaCha8Rng::seed_from_u64(common.seed.unwrap_or(0));
            let seq = generate(family, &params.params(), horizon, &mut rng)?;
            emit(&common, &sequence_to_csv(&seq), None)?;
            Ok(true)
        }
        Command::Grid {
            action:
                GridCmd::Dump {
                    kind,
                    k,
                    horizon,
                    common,
                },
        } => {
            let grid = match kind {
                GridKindArg::Uniform => uniform_grid(k)?,
                GridKindArg::Pairs => adjacent_pairs(k)?,
                GridKindArg::Revenue => revenue_grid(k, horizon)?,
            };
            emit(&common, &grid.to_csv(), None)?;
            Ok(true)
        }
        Command::Verify {
            suite,
            common,
            sizes,
            quick,
        } => {
            let mut opts = VerifyOptions {
                seed: common.seed.unwrap_or(0),
                ..VerifyOptions::default()
            };
            if quick {
                opts.discretization_sequences = 50;
                opts.estimator_samples = 5_000;
                opts.budget_runs = 30;
                opts.budget_horizon = 1_000;
                opts.ratio_sequences = 50;
                opts.hull_sequences = 50;
                opts.lb_sizes = vec![33];
                opts.full_lb_reps = 1_000;
            }
            if let Some(s) = sizes {
                opts.lb_sizes = s;
            }
            let report = harness::verify(suite, &opts)?;
            emit(&common, &report.to_text(), Some(serde_json::to_string_pretty(&report)?))?;
            Ok(report.passed())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
