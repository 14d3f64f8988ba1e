//! Discrete phase-type representation of `c . xi` for nonnegative integer
//! coefficients.
//!
//! Every step of the discrete chain adds one to the statistic. Mutations are
//! generated by the per-jump chain of the block-counting process (one jump
//! per mutation), and a mutation that adds `k` is expanded into a countdown
//! of `k` steps. Each coalescent state therefore owns a block of rows; the
//! last row of a block is "waiting in this state" and carries the
//! transitions, the rows above it only count down.

use crate::error::{Error, Result};
use crate::linalg::{RealMatrix, RealVector};
use crate::phasetype::{DiscPhaseType, RewardVector};
use crate::sfs::SfsModel;

/// Default cap on the number of rows of the block matrix.
pub const DEFAULT_ROW_CAP: usize = 20_000;

/// Position of a row of the block matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockRow {
    /// Index of the coalescent state in the block-counting model.
    pub state: usize,
    /// Countdown position, `0..block_size`; the last position is the waiting row.
    pub position: usize,
}

/// `1 + c . xi ~ DPH(pi, M)` mixed with the atom at `c . xi = 0`
/// contributed by trajectories that never see a weighted branch.
#[derive(Debug, Clone)]
pub struct IntWeightedLaw {
    coefficients: Vec<u64>,
    law: DiscPhaseType,
    rows: Vec<BlockRow>,
    block_sizes: Vec<(usize, usize)>,
    mutation_split: Vec<RealVector>,
    jump_chain: RealMatrix,
}

impl IntWeightedLaw {
    pub fn new(sm: &SfsModel, coefficients: &[i64]) -> Result<Self> {
        build_intweight_law(sm, coefficients, DEFAULT_ROW_CAP)
    }

    pub fn coefficients(&self) -> &[u64] {
        &self.coefficients
    }

    /// The law of `c . xi` (shift 1 relative to the chain).
    pub fn law(&self) -> &DiscPhaseType {
        &self.law
    }

    /// Sub-transition block matrix.
    pub fn sub_transition(&self) -> &RealMatrix {
        self.law.sub_transition()
    }

    /// Initial vector of the block chain.
    pub fn initial(&self) -> &RealVector {
        self.law.pi()
    }

    /// Row-to-(state, position) map.
    pub fn rows(&self) -> &[BlockRow] {
        &self.rows
    }

    /// `(state, block size)` for every state that carries weighted branches.
    pub fn block_sizes(&self) -> &[(usize, usize)] {
        &self.block_sizes
    }

    /// Normalized weights over countdown positions for each block, in the
    /// order of [`IntWeightedLaw::block_sizes`].
    pub fn mutation_split(&self) -> &[RealVector] {
        &self.mutation_split
    }

    /// Per-mutation jump chain `(I - (2 / theta) Delta(r)^{-1} T*)^{-1}` on the weighted states.
    pub fn jump_chain(&self) -> &RealMatrix {
        &self.jump_chain
    }

    /// `P(c . xi = k)` for `k = 0..=kmax`.
    pub fn pmf_table(&self, kmax: usize) -> Vec<f64> {
        self.law.pmf_table(kmax)
    }

    pub fn pgf(&self, z: f64) -> Result<f64> {
        self.law.pgf(z)
    }

    pub fn mean(&self) -> f64 {
        self.law.mean()
    }
}

/// Builds the block representation, refusing matrices above `row_cap` rows.
pub fn build_intweight_law(sm: &SfsModel, coefficients: &[i64], row_cap: usize) -> Result<IntWeightedLaw> {
    let n = sm.sample_size();
    if coefficients.len() != n - 1 {
        return Err(Error::InvalidArgument(format!(
            "expected {} coefficients, got {}",
            n - 1,
            coefficients.len()
        )));
    }
    if let Some(index) = coefficients.iter().position(|&c| c < 0) {
        return Err(Error::NonPositiveCoefficient { index });
    }
    if coefficients.iter().all(|&c| c == 0) {
        return Err(Error::AllZeroMask);
    }
    let c: Vec<u64> = coefficients.iter().map(|&x| x as u64).collect();
    let model = sm.model();
    let states = model.states();

    // Mutation rate in a state is proportional to its number of branches
    // whose class has a nonzero coefficient; other mutations add nothing.
    let branches: Vec<f64> = states
        .iter()
        .map(|s| {
            s.counts()
                .iter()
                .zip(&c)
                .filter(|(_, &cj)| cj > 0)
                .map(|(&a, _)| a as f64)
                .sum()
        })
        .collect();
    let kept: Vec<usize> = (0..states.len()).filter(|&i| branches[i] > 0.0).collect();

    let block_of = |i: usize| -> usize {
        states[i]
            .counts()
            .iter()
            .zip(&c)
            .filter(|(&a, _)| a > 0)
            .map(|(_, &cj)| cj as usize)
            .max()
            .unwrap_or(0)
    };
    let sizes: Vec<usize> = kept.iter().map(|&i| block_of(i)).collect();
    let total_rows: usize = sizes.iter().sum();
    if total_rows > row_cap {
        return Err(Error::BlockMatrixTooLarge {
            rows: total_rows,
            cap: row_cap,
        });
    }

    // Per-mutation chain on the weighted states; zero-reward states are
    // eliminated by the reward transform and feed the atom at zero.
    let base = sm.rep().base();
    let branch_time = base.reward_transform(&RewardVector::new(RealVector::from_vec(branches.clone()))?)?;
    let counting = branch_time.poisson_mix(sm.lambda())?;
    let jump_chain = counting.sub_transition().clone();
    let start = counting.pi().clone();

    let splits: Vec<RealVector> = kept
        .iter()
        .zip(&sizes)
        .map(|(&i, &size)| {
            let mut m = RealVector::zeros(size);
            for (&a, &cj) in states[i].counts().iter().zip(&c) {
                if a > 0 && cj > 0 {
                    m[size - cj as usize] += a as f64;
                }
            }
            m / branches[i]
        })
        .collect();

    let offsets: Vec<usize> = sizes
        .iter()
        .scan(0usize, |acc, &s| {
            let here = *acc;
            *acc += s;
            Some(here)
        })
        .collect();
    let waiting = |k: usize| offsets[k] + sizes[k] - 1;

    let mut m = RealMatrix::zeros(total_rows, total_rows);
    let mut rows = Vec::with_capacity(total_rows);
    for (k, &i) in kept.iter().enumerate() {
        for q in 0..sizes[k] {
            rows.push(BlockRow { state: i, position: q });
            if q + 1 < sizes[k] {
                m[(offsets[k] + q, offsets[k] + q + 1)] = 1.0;
            }
        }
        let from = waiting(k);
        for (l, split) in splits.iter().enumerate() {
            let p = jump_chain[(k, l)];
            if p == 0.0 {
                continue;
            }
            for (pos, &w) in split.iter().enumerate() {
                if w > 0.0 {
                    m[(from, offsets[l] + pos)] += p * w;
                }
            }
        }
    }

    let mut pi = RealVector::zeros(total_rows);
    for k in 0..kept.len() {
        pi[waiting(k)] = start[k];
    }

    let law = DiscPhaseType::from_parts(pi, m, counting.atom0(), 1);
    Ok(IntWeightedLaw {
        coefficients: c,
        law,
        rows,
        block_sizes: kept.iter().copied().zip(sizes).collect(),
        mutation_split: splits,
        jump_chain,
    })
}

/// Values `k <= kmax` with `P(c . xi = k) > 1e-14`.
pub fn support_scan(law: &IntWeightedLaw, kmax: usize) -> Vec<usize> {
    law.pmf_table(kmax)
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > 1e-14)
        .map(|(k, _)| k)
        .collect()
}
