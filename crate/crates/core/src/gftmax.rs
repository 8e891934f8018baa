//! The two-phase algorithm: collect a revenue budget `β` on the revenue grid
//! `F_K`, then spend at most `1/K` per round maximizing gain from trade on the
//! adjacent-pair grid `H_K`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grids::{adjacent_pairs, revenue_grid, PriceGrid};
use crate::learners::{BlockLearner, Exp3P, Exp3PParams, Hedge};
use crate::trade::{gft, rev, trades, BudgetLedger, PricePair, Valuation, ValuationSequence};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Algo {
    /// Full feedback: Hedge in both phases.
    Full,
    /// One-bit feedback: EXP3.P, then block decomposition with the estimator.
    #[serde(rename = "onebit", alias = "one-bit")]
    #[value(name = "onebit", alias = "one-bit")]
    OneBit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GftMaxConfig {
    pub algo: Algo,
    pub horizon: u64,
    /// Budget threshold ending the revenue phase.
    pub beta: f64,
    pub k: u64,
    /// Number of blocks (one-bit only).
    pub blocks: u64,
    #[serde(default)]
    pub exp3p: Exp3PParams,
}

fn ceil_pow(t: u64, e: f64) -> u64 {
    let x = (t as f64).powf(e);
    // Guard against powf landing a hair above an exact integer root.
    let r = x.round();
    if (x - r).abs() < 1e-9 {
        r as u64
    } else {
        x.ceil() as u64
    }
}

impl GftMaxConfig {
    /// `β = K = ⌈√T⌉`.
    pub fn full(horizon: u64) -> Self {
        let k = ceil_pow(horizon, 0.5).max(1);
        Self {
            algo: Algo::Full,
            horizon,
            beta: k as f64,
            k,
            blocks: 1,
            exp3p: Exp3PParams::default(),
        }
    }

    /// `β = ⌈T^{3/4}⌉`, `K = ⌈T^{1/4}⌉`, `N = ⌈√T⌉`.
    pub fn one_bit(horizon: u64) -> Self {
        Self {
            algo: Algo::OneBit,
            horizon,
            beta: ceil_pow(horizon, 0.75).max(1) as f64,
            k: ceil_pow(horizon, 0.25).max(1),
            blocks: ceil_pow(horizon, 0.5).max(1),
            exp3p: Exp3PParams::default(),
        }
    }

    pub fn preset(algo: Algo, horizon: u64) -> Self {
        match algo {
            Algo::Full => Self::full(horizon),
            Algo::OneBit => Self::one_bit(horizon),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::InvalidParameter("horizon T must be >= 1".into()));
        }
        if !(self.beta > 0.0) {
            return Err(Error::InvalidParameter(format!("beta must be > 0, got {}", self.beta)));
        }
        if self.k == 0 {
            return Err(Error::InvalidParameter("K must be >= 1".into()));
        }
        if self.algo == Algo::OneBit && (self.blocks == 0 || self.horizon / self.blocks < self.k) {
            return Err(Error::InvalidParameter(format!(
                "block length T/N = {} cannot hold K = {} exploration rounds",
                self.horizon / self.blocks.max(1),
                self.k
            )));
        }
        Ok(())
    }

    /// The regret bound proved for the preset, `92 ln^{3/2} T √T` (full) or
    /// `1282 T^{3/4} ln² T` (one-bit).
    pub fn bound(&self) -> f64 {
        let t = self.horizon as f64;
        match self.algo {
            Algo::Full => 92.0 * t.ln().powf(1.5) * t.sqrt(),
            Algo::OneBit => 1282.0 * t.powf(0.75) * t.ln().powi(2),
        }
    }

    /// A bound at least `T` says nothing, since regret never exceeds `T`.
    pub fn bound_vacuous(&self) -> bool {
        self.bound() >= self.horizon as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Phase {
    I,
    II,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundRecord {
    pub phase: Phase,
    pub posted: PricePair,
    pub valuation: Valuation,
    pub gft: f64,
    pub rev: f64,
    /// Budget after this round.
    pub budget: f64,
}

#[derive(Debug, Clone, Default)]
pub struct RunTrace {
    pub rounds: Vec<RoundRecord>,
    /// Round (1-based) at which the revenue phase ended, if it did.
    pub tau: Option<usize>,
    ledger: BudgetLedger,
    total_gft: f64,
}

impl RunTrace {
    pub fn len(&self) -> usize {
        self.rounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rounds.is_empty()
    }

    pub fn total_gft(&self) -> f64 {
        self.total_gft
    }

    pub fn budget(&self) -> f64 {
        self.ledger.current()
    }

    /// Post `pair` against `v`, enforcing `p - q <= B`.
    fn post(&mut self, phase: Phase, pair: PricePair, v: &Valuation) -> Result<&RoundRecord> {
        if !self.ledger.feasible(&pair) {
            return Err(Error::InfeasiblePost {
                round: self.rounds.len() + 1,
                pair,
                deficit: pair.deficit(),
                budget: self.ledger.current(),
            });
        }
        let (g, r) = (gft(&pair, v), rev(&pair, v));
        self.ledger.record(r);
        self.total_gft += g;
        self.rounds.push(RoundRecord {
            phase,
            posted: pair,
            valuation: *v,
            gft: g,
            rev: r,
            budget: self.ledger.current(),
        });
        Ok(self.rounds.last().unwrap())
    }

    /// Render as CSV with header `t,phase,p,q,s,b,gft,rev,budget`.
    pub fn to_csv(&self) -> String {
        use crate::harness::fmt_f64 as f;
        let mut out = String::from("t,phase,p,q,s,b,gft,rev,budget\n");
        for (i, r) in self.rounds.iter().enumerate() {
            let phase = match r.phase {
                Phase::I => "I",
                Phase::II => "II",
            };
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                i + 1,
                phase,
                f(r.posted.seller()),
                f(r.posted.buyer()),
                f(r.valuation.seller),
                f(r.valuation.buyer),
                f(r.gft),
                f(r.rev),
                f(r.budget)
            ));
        }
        out
    }
}

enum RevenueLearner {
    Full(Hedge),
    OneBit(Exp3P),
}

/// Revenue phase over `grid`, run on `seq` until the budget reaches `beta`.
/// Learning rates are tuned to `horizon`.
fn run_revenue_phase<R: Rng + ?Sized>(
    trace: &mut RunTrace,
    beta: f64,
    grid: &PriceGrid,
    algo: Algo,
    horizon: u64,
    params: Exp3PParams,
    seq: &[Valuation],
    rng: &mut R,
) -> Result<()> {
    let n = grid.len();
    let mut learner = match algo {
        Algo::Full => RevenueLearner::Full(Hedge::new(n, horizon, 0.0, 1.0)?),
        Algo::OneBit => RevenueLearner::OneBit(Exp3P::new(n, horizon, 0.0, 1.0, params)?),
    };
    let mut rewards = vec![0.0; n];
    for v in seq {
        match &mut learner {
            RevenueLearner::Full(h) => {
                let pair = grid.points()[h.sample(rng)];
                trace.post(Phase::I, pair, v)?;
                for (r, p) in rewards.iter_mut().zip(grid.points()) {
                    *r = rev(p, v);
                }
                h.update(&rewards)?;
            }
            RevenueLearner::OneBit(e) => {
                let arm = e.sample(rng);
                let pair = grid.points()[arm];
                trace.post(Phase::I, pair, v)?;
                // The spread is known, so the trade bit reveals the revenue.
                let traded = trades(&pair, v);
                e.update(arm, if traded { pair.spread() } else { 0.0 })?;
            }
        }
        if trace.budget() >= beta {
            trace.tau = Some(trace.len());
            break;
        }
    }
    Ok(())
}

/// Revenue phase alone: returns the stopping round (if the budget reached
/// `beta`) and the trace up to it.
pub fn revenue_max<R: Rng + ?Sized>(
    beta: f64,
    grid: &PriceGrid,
    algo: Algo,
    seq: &ValuationSequence,
    rng: &mut R,
) -> Result<(Option<usize>, RunTrace)> {
    let mut trace = RunTrace::default();
    run_revenue_phase(
        &mut trace,
        beta,
        grid,
        algo,
        seq.len() as u64,
        Exp3PParams::default(),
        seq.rounds(),
        rng,
    )?;
    Ok((trace.tau, trace))
}

/// Run the two-phase algorithm on `seq`, whose length must equal the
/// configured horizon.
pub fn gft_max<R: Rng + ?Sized>(
    config: &GftMaxConfig,
    seq: &ValuationSequence,
    rng: &mut R,
) -> Result<RunTrace> {
    config.validate()?;
    if seq.len() as u64 != config.horizon {
        return Err(Error::InvalidParameter(format!(
            "sequence has {} rounds but the horizon is {}",
            seq.len(),
            config.horizon
        )));
    }
    let t = config.horizon;
    let f_grid = revenue_grid(config.k, t.max(2))?;
    let mut trace = RunTrace {
        rounds: Vec::with_capacity(seq.len()),
        ..RunTrace::default()
    };
    run_revenue_phase(
        &mut trace,
        config.beta,
        &f_grid,
        config.algo,
        t,
        config.exp3p,
        seq.rounds(),
        rng,
    )?;
    let Some(tau) = trace.tau else {
        return Ok(trace);
    };
    let rest = &seq.rounds()[tau..];
    if rest.is_empty() {
        return Ok(trace);
    }
    let h_grid = adjacent_pairs(config.k)?;
    let pairs = h_grid.points();
    match config.algo {
        Algo::Full => {
            let lo = -1.0 / config.k as f64;
            let mut hedge = Hedge::new(pairs.len(), t, lo, 1.0)?;
            let mut rewards = vec![0.0; pairs.len()];
            for v in rest {
                let pair = pairs[hedge.sample(rng)];
                trace.post(Phase::II, pair, v)?;
                for (r, p) in rewards.iter_mut().zip(pairs) {
                    *r = gft(p, v);
                }
                hedge.update(&rewards)?;
            }
        }
        Algo::OneBit => {
            let mut learner =
                BlockLearner::new(t, config.blocks, config.k, rest.len() as u64, rng)?;
            for v in rest {
                let mut outcome = Ok(());
                learner.step(rng, |pair| {
                    outcome = trace.post(Phase::II, pair, v).map(|_| ());
                    trades(&pair, v)
                })?;
                outcome?;
            }
        }
    }
    Ok(trace)
}
