//! Block decomposition: turns full-feedback Hedge over `H_K` into a one-bit
//! learner.
//!
//! The horizon `T` is cut into `N` blocks of `L = ⌊T/N⌋` rounds. Within each
//! block, `K` distinct rounds are drawn uniformly without replacement and
//! matched to the `K` pairs of `H_K` by a uniform random bijection. Those
//! rounds post the one-bit estimator of their pair; all other rounds post a
//! pair drawn from the block's Hedge distribution. At the end of the block the
//! `K` estimates are fed to Hedge as one full-feedback round.
//!
//! When the learner starts mid-horizon, blocks are aligned at its first
//! round. A trailing stretch shorter than `L` only exploits.

use rand::seq::{index, SliceRandom};
use rand::Rng;

use super::estimator::{propose, EstimatorBranch};
use super::hedge::Hedge;
use crate::error::{Error, Result};
use crate::trade::PricePair;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockStep {
    pub posted: PricePair,
    /// The `H_K` pair estimated this round, if it was an exploration round.
    pub explored: Option<usize>,
    pub branch: Option<EstimatorBranch>,
}

#[derive(Debug, Clone)]
pub struct BlockLearner {
    k: u64,
    block_len: usize,
    full_blocks: usize,
    hedge: Hedge,
    grid: Vec<PricePair>,
    block: usize,
    offset: usize,
    // plan[offset] = Some(pair index) on exploration rounds of this block.
    plan: Vec<Option<usize>>,
    estimates: Vec<f64>,
    explorations: usize,
}

impl BlockLearner {
    /// `horizon` (T) and `blocks` (N) fix the block length; `rounds` is how
    /// many rounds this learner will actually play.
    pub fn new<R: Rng + ?Sized>(
        horizon: u64,
        blocks: u64,
        k: u64,
        rounds: u64,
        rng: &mut R,
    ) -> Result<Self> {
        if k == 0 || blocks == 0 {
            return Err(Error::InvalidParameter("block learner needs K >= 1 and N >= 1".into()));
        }
        let block_len = horizon / blocks;
        if block_len < k {
            return Err(Error::InvalidParameter(format!(
                "block length T/N = {block_len} cannot hold K = {k} exploration rounds"
            )));
        }
        let grid = crate::grids::adjacent_pairs(k)?.points().to_vec();
        let mut s = Self {
            k,
            block_len: block_len as usize,
            full_blocks: (rounds / block_len) as usize,
            hedge: Hedge::new(k as usize, blocks, 0.0, 1.0)?,
            grid,
            block: 0,
            offset: 0,
            plan: vec![None; block_len as usize],
            estimates: vec![f64::NAN; k as usize],
            explorations: 0,
        };
        s.draw_plan(rng);
        Ok(s)
    }

    fn draw_plan<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        self.plan.iter_mut().for_each(|p| *p = None);
        self.estimates.iter_mut().for_each(|e| *e = f64::NAN);
        if self.block >= self.full_blocks {
            return;
        }
        let rounds = index::sample(rng, self.block_len, self.k as usize).into_vec();
        let mut pairs: Vec<usize> = (0..self.k as usize).collect();
        pairs.shuffle(rng);
        for (round, pair) in rounds.into_iter().zip(pairs) {
            self.plan[round] = Some(pair);
        }
    }

    pub fn block_len(&self) -> usize {
        self.block_len
    }

    pub fn full_blocks(&self) -> usize {
        self.full_blocks
    }

    pub fn explorations(&self) -> usize {
        self.explorations
    }

    /// Exploration schedule of the current block, indexed by offset.
    pub fn plan(&self) -> &[Option<usize>] {
        &self.plan
    }

    pub fn hedge(&self) -> &Hedge {
        &self.hedge
    }

    /// Play one round. `env` receives the posted pair and returns the one-bit
    /// trade feedback.
    pub fn step<R, F>(&mut self, rng: &mut R, env: F) -> Result<BlockStep>
    where
        R: Rng + ?Sized,
        F: FnOnce(PricePair) -> bool,
    {
        let out = match self.plan[self.offset] {
            Some(i) => {
                let probe = propose(i as u64, self.k, rng);
                let traded = env(probe.posted);
                self.estimates[i] = probe.estimate(traded).value;
                self.explorations += 1;
                BlockStep {
                    posted: probe.posted,
                    explored: Some(i),
                    branch: Some(probe.branch),
                }
            }
            None => {
                let pair = self.grid[self.hedge.sample(rng)];
                env(pair);
                BlockStep {
                    posted: pair,
                    explored: None,
                    branch: None,
                }
            }
        };
        self.offset += 1;
        if self.offset == self.block_len {
            if self.block < self.full_blocks {
                debug_assert!(self.estimates.iter().all(|e| !e.is_nan()));
                self.hedge.update(&self.estimates)?;
            }
            self.block += 1;
            self.offset = 0;
            self.draw_plan(rng);
        }
        Ok(out)
    }
}
