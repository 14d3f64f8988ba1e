//! State space and rate matrix of the block-counting process of the
//! standard (Kingman) coalescent.
//!
//! A state records, for every `i` in `1..n`, how many branches of the
//! genealogy currently subtend exactly `i` of the `n` sampled lineages. The
//! states are the integer partitions of `n` apart from the single block
//! `{n}`, which is the (implicit) absorbing state.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{RealMatrix, RealVector};

/// Largest sample size for which a model is built.
pub const MAX_SAMPLE_SIZE: usize = 30;

/// Count vector `a` with `a[i - 1]` branches carrying `i` descendants.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct StateVector(Vec<u32>);

impl StateVector {
    pub fn new(counts: Vec<u32>) -> Self {
        Self(counts)
    }

    pub fn counts(&self) -> &[u32] {
        &self.0
    }

    /// Number of branches with `i` descendants (1-based).
    pub fn get(&self, i: usize) -> u32 {
        self.0[i - 1]
    }

    pub fn lineages(&self) -> u32 {
        self.0.iter().sum()
    }

    /// `sum_i i * a_i`, the sample size this state describes.
    pub fn sample_size(&self) -> usize {
        self.0.iter().enumerate().map(|(k, &a)| (k + 1) * a as usize).sum()
    }
}

/// Block-counting process for a sample of size `n`, started in `(n, 0, ..., 0)`.
#[derive(Debug, Clone)]
pub struct BlockCountingModel {
    n: usize,
    states: Vec<StateVector>,
    /// Integer coalescence rates between transient states, per source state.
    transitions: Vec<Vec<(usize, u64)>>,
    exit_rates: Vec<u64>,
    sub_intensity: RealMatrix,
}

impl BlockCountingModel {
    pub fn new(n: usize) -> Result<Self> {
        build_model(n)
    }

    pub fn sample_size(&self) -> usize {
        self.n
    }

    pub fn size(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[StateVector] {
        &self.states
    }

    /// Sub-intensity matrix `T`.
    pub fn sub_intensity(&self) -> &RealMatrix {
        &self.sub_intensity
    }

    /// Exit vector `t = -T e`.
    pub fn exit_vector(&self) -> RealVector {
        RealVector::from_iterator(self.size(), self.exit_rates.iter().map(|&r| r as f64))
    }

    /// Initial distribution `e_1`.
    pub fn initial(&self) -> RealVector {
        let mut alpha = RealVector::zeros(self.size());
        alpha[0] = 1.0;
        alpha
    }

    /// State matrix `A`: one row per state, one column per i-ton class.
    pub fn state_matrix(&self) -> RealMatrix {
        RealMatrix::from_fn(self.size(), self.n - 1, |row, col| self.states[row].0[col] as f64)
    }

    /// Outgoing transitions of `state` as `(target, rate)` with integer rates.
    pub fn transitions(&self, state: usize) -> &[(usize, u64)] {
        &self.transitions[state]
    }

    pub fn exit_rate(&self, state: usize) -> u64 {
        self.exit_rates[state]
    }

    /// Total outgoing rate of `state`, always `C(k, 2)` for `k` lineages.
    pub fn total_rate(&self, state: usize) -> u64 {
        self.exit_rates[state] + self.transitions[state].iter().map(|&(_, r)| r).sum::<u64>()
    }
}

/// Number of integer partitions of `n`.
pub fn partition_count(n: usize) -> u64 {
    let mut ways = vec![0u64; n + 1];
    ways[0] = 1;
    for part in 1..=n {
        for total in part..=n {
            ways[total] += ways[total - part];
        }
    }
    ways[n]
}

/// Size of the transient state space, `p(n) - 1`.
pub fn state_count(n: usize) -> usize {
    (partition_count(n) - 1) as usize
}

/// All partitions of `n`, each as a non-increasing list of parts.
pub fn partitions(n: usize) -> Vec<Vec<usize>> {
    fn extend(remaining: usize, max_part: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if remaining == 0 {
            out.push(current.clone());
            return;
        }
        for part in (1..=max_part.min(remaining)).rev() {
            current.push(part);
            extend(remaining - part, part, current, out);
            current.pop();
        }
    }
    let mut out = Vec::new();
    extend(n, n, &mut Vec::new(), &mut out);
    out
}

fn validate(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidSampleSize(n));
    }
    if n > MAX_SAMPLE_SIZE {
        return Err(Error::SampleSizeTooLarge {
            n,
            max: MAX_SAMPLE_SIZE,
        });
    }
    Ok(())
}

/// Enumerates the states in canonical order: decreasing number of lineages,
/// ties broken by decreasing count vector in lexicographic order.
pub fn enumerate_states(n: usize) -> Result<Vec<StateVector>> {
    validate(n)?;
    let mut states: Vec<StateVector> = partitions(n)
        .into_iter()
        .filter(|parts| parts.len() > 1)
        .map(|parts| {
            let mut counts = vec![0u32; n - 1];
            for part in parts {
                counts[part - 1] += 1;
            }
            StateVector(counts)
        })
        .collect();
    states.sort_by(|a, b| b.lineages().cmp(&a.lineages()).then_with(|| b.0.cmp(&a.0)));
    Ok(states)
}

pub fn build_model(n: usize) -> Result<BlockCountingModel> {
    let states = enumerate_states(n)?;
    let index: HashMap<&StateVector, usize> = states.iter().enumerate().map(|(k, s)| (s, k)).collect();
    let p = states.len();

    let mut transitions = Vec::with_capacity(p);
    let mut exit_rates = Vec::with_capacity(p);
    for state in &states {
        let a = &state.0;
        let mut out: Vec<(usize, u64)> = Vec::new();
        let mut exit = 0u64;
        for i in 1..n {
            let ai = a[i - 1] as u64;
            if ai == 0 {
                continue;
            }
            for j in i..n {
                let aj = a[j - 1] as u64;
                let rate = if i == j { ai * (ai - 1) / 2 } else { ai * aj };
                if rate == 0 {
                    continue;
                }
                if i + j == n {
                    exit += rate;
                    continue;
                }
                let mut next = a.clone();
                next[i - 1] -= 1;
                next[j - 1] -= 1;
                next[i + j - 1] += 1;
                let target = index[&StateVector(next)];
                match out.iter_mut().find(|(t, _)| *t == target) {
                    Some((_, r)) => *r += rate,
                    None => out.push((target, rate)),
                }
            }
        }
        out.sort_unstable();
        transitions.push(out);
        exit_rates.push(exit);
    }

    let mut sub_intensity = RealMatrix::zeros(p, p);
    for (k, out) in transitions.iter().enumerate() {
        let total: u64 = exit_rates[k] + out.iter().map(|&(_, r)| r).sum::<u64>();
        sub_intensity[(k, k)] = -(total as f64);
        for &(target, rate) in out {
            sub_intensity[(k, target)] = rate as f64;
        }
    }

    Ok(BlockCountingModel {
        n,
        states,
        transitions,
        exit_rates,
        sub_intensity,
    })
}
