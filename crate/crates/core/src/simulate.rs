//! Monte Carlo sampling of the SFS from block-counting trajectories.
//!
//! Replicates are generated in fixed-size chunks. Chunk `k` draws from its
//! own ChaCha stream `k` under the configured seed, so the output depends
//! only on the seed and not on how chunks are scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Poisson};
use rayon::prelude::*;
use serde::Serialize;

use crate::blockcounting::{build_model, BlockCountingModel};
use crate::error::{Error, Result};

/// Replicates per generator stream.
pub const CHUNK_SIZE: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimConfig {
    pub n: usize,
    pub theta: f64,
    pub replicates: usize,
    pub seed: u64,
}

impl SimConfig {
    pub fn new(n: usize, theta: f64, replicates: usize, seed: u64) -> Result<Self> {
        let cfg = Self {
            n,
            theta,
            replicates,
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::InvalidArgument("replicates must be at least 1".into()));
        }
        if !(self.theta > 0.0) || !self.theta.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "theta must be positive, got {}",
                self.theta
            )));
        }
        Ok(())
    }
}

/// One replicate: the SFS and the i-ton branch lengths it was drawn from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimSample {
    pub sfs: Vec<u64>,
    pub branch_lengths: Vec<f64>,
}

impl SimSample {
    /// Total branch length of the tree.
    pub fn total_length(&self) -> f64 {
        self.branch_lengths.iter().sum()
    }
}

/// Visited states and holding times of one trajectory, up to absorption.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub states: Vec<usize>,
    pub holding_times: Vec<f64>,
}

impl Trajectory {
    /// Absorption time.
    pub fn duration(&self) -> f64 {
        self.holding_times.iter().sum()
    }
}

/// Runs the block-counting chain from its first state until absorption.
pub fn sample_trajectory<R: Rng + ?Sized>(model: &BlockCountingModel, rng: &mut R) -> Trajectory {
    let mut states = Vec::new();
    let mut holding_times = Vec::new();
    let mut k = 0usize;
    loop {
        let total = model.total_rate(k);
        let hold: f64 = Exp1.sample(rng);
        states.push(k);
        holding_times.push(hold / total as f64);
        // pick a target proportionally to the integer rates; the remainder is the exit
        let mut u = rng.random_range(0..total);
        let mut next = None;
        for &(target, rate) in model.transitions(k) {
            if u < rate {
                next = Some(target);
                break;
            }
            u -= rate;
        }
        match next {
            Some(target) => k = target,
            None => break,
        }
    }
    Trajectory { states, holding_times }
}

fn sample_one(model: &BlockCountingModel, lambda: f64, rng: &mut ChaCha8Rng) -> SimSample {
    let dim = model.sample_size() - 1;
    let trajectory = sample_trajectory(model, rng);
    let mut branch_lengths = vec![0.0; dim];
    for (&k, &hold) in trajectory.states.iter().zip(&trajectory.holding_times) {
        for (y, &a) in branch_lengths.iter_mut().zip(model.states()[k].counts()) {
            *y += a as f64 * hold;
        }
    }
    let sfs = branch_lengths
        .iter()
        .map(|&y| {
            let rate = lambda * y;
            if rate > 0.0 {
                Poisson::new(rate).expect("positive finite rate").sample(rng) as u64
            } else {
                0
            }
        })
        .collect();
    SimSample { sfs, branch_lengths }
}

/// Generator for chunk `chunk` under `seed`.
pub fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

/// Draws `cfg.replicates` independent SFS realizations.
pub fn simulate_sfs(cfg: &SimConfig) -> Result<Vec<SimSample>> {
    cfg.validate()?;
    let model = build_model(cfg.n)?;
    Ok(simulate_with_model(&model, cfg))
}

/// As [`simulate_sfs`] for an already built model of size `cfg.n`.
pub fn simulate_with_model(model: &BlockCountingModel, cfg: &SimConfig) -> Vec<SimSample> {
    let lambda = cfg.theta / 2.0;
    let chunks = cfg.replicates.div_ceil(CHUNK_SIZE);
    (0..chunks)
        .into_par_iter()
        .flat_map_iter(|chunk| {
            let mut rng = chunk_rng(cfg.seed, chunk as u64);
            let len = CHUNK_SIZE.min(cfg.replicates - chunk * CHUNK_SIZE);
            (0..len)
                .map(move |_| sample_one(model, lambda, &mut rng))
                .collect::<Vec<_>>()
        })
        .collect()
}

/// Draws `c . xi` for each replicate.
pub fn simulate_statistic(cfg: &SimConfig, c: &[f64]) -> Result<Vec<f64>> {
    if c.len() + 1 != cfg.n {
        return Err(Error::InvalidArgument(format!(
            "statistic has {} coefficients, expected {}",
            c.len(),
            cfg.n.saturating_sub(1)
        )));
    }
    Ok(simulate_sfs(cfg)?
        .iter()
        .map(|s| s.sfs.iter().zip(c).map(|(&x, &w)| x as f64 * w).sum())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean(xs: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
        let n = xs.clone().count() as f64;
        let m = xs.clone().sum::<f64>() / n;
        let var = xs.map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
        (m, (var / n).sqrt())
    }

    #[test]
    fn deterministic_and_prefix_stable() {
        let a = simulate_sfs(&SimConfig::new(5, 1.0, 10_000, 42).unwrap()).unwrap();
        let b = simulate_sfs(&SimConfig::new(5, 1.0, 10_000, 42).unwrap()).unwrap();
        assert_eq!(a, b);
        let c = simulate_sfs(&SimConfig::new(5, 1.0, 5_000, 42).unwrap()).unwrap();
        assert_eq!(&a[..5_000], &c[..]);
        let d = simulate_sfs(&SimConfig::new(5, 1.0, 10_000, 43).unwrap()).unwrap();
        assert_ne!(a, d);
    }

    #[test]
    fn n2_singletons() {
        let theta = 1.3;
        let draws = simulate_sfs(&SimConfig::new(2, theta, 100_000, 1).unwrap()).unwrap();
        let (m, se) = mean(draws.iter().map(|s| s.sfs[0] as f64));
        assert!((m - theta).abs() < 3.0 * se, "{m} {se}");
        let (y, se) = mean(draws.iter().map(|s| s.branch_lengths[0]));
        assert!((y - 2.0).abs() < 3.0 * se);
    }

    #[test]
    fn iton_means() {
        let theta = 2.0;
        let n = 6;
        let draws = simulate_sfs(&SimConfig::new(n, theta, 100_000, 9).unwrap()).unwrap();
        for i in 1..n {
            let (m, se) = mean(draws.iter().map(|s| s.sfs[i - 1] as f64));
            assert!((m - theta / i as f64).abs() < 3.0 * se, "i={i}: {m} {se}");
        }
    }

    #[test]
    fn trajectories_lose_one_lineage_per_jump() {
        let model = build_model(7).unwrap();
        let mut rng = chunk_rng(3, 0);
        let mut durations = Vec::new();
        for _ in 0..50_000 {
            let t = sample_trajectory(&model, &mut rng);
            assert_eq!(t.states.len(), 6);
            let lineages: Vec<u32> = t.states.iter().map(|&k| model.states()[k].lineages()).collect();
            assert_eq!(lineages, vec![7, 6, 5, 4, 3, 2]);
            durations.push(t.duration());
        }
        let (m, se) = mean(durations.into_iter());
        assert!((m - 2.0 * (1.0 - 1.0 / 7.0)).abs() < 3.0 * se);
    }

    #[test]
    fn statistic_and_validation() {
        let cfg = SimConfig::new(4, 1.0, 1000, 5).unwrap();
        assert!(simulate_statistic(&cfg, &[0.0; 3]).unwrap().iter().all(|&x| x == 0.0));
        let total = simulate_statistic(&cfg, &[1.0; 3]).unwrap();
        let sfs = simulate_sfs(&cfg).unwrap();
        for (t, s) in total.iter().zip(&sfs) {
            assert_eq!(*t, s.sfs.iter().sum::<u64>() as f64);
        }
        assert!(simulate_statistic(&cfg, &[1.0; 2]).is_err());
        assert!(SimConfig::new(4, 0.0, 10, 1).is_err());
        assert!(SimConfig::new(4, 1.0, 0, 1).is_err());
        assert!(simulate_sfs(&SimConfig::new(1, 1.0, 10, 1).unwrap()).is_err());
    }

    #[test]
    fn segregating_sites_chi_square() {
        let theta = 1.0;
        let sm = crate::sfs::SfsModel::new(4, theta).unwrap();
        let exact = sm.segregating_sites_law().unwrap().pmf_table(200);
        let cfg = SimConfig::new(4, theta, 100_000, 11).unwrap();
        let draws = simulate_statistic(&cfg, &[1.0; 3]).unwrap();
        let mut counts = vec![0usize; 201];
        for d in draws {
            counts[(d as usize).min(200)] += 1;
        }
        // pool the tail so every cell expects at least 5
        let total = cfg.replicates as f64;
        let mut cells: Vec<(f64, f64)> = Vec::new();
        let (mut obs, mut exp) = (0.0, 0.0);
        for k in 0..=200 {
            obs += counts[k] as f64;
            exp += exact[k] * total;
            if exp >= 5.0 && (total - cells.iter().map(|c| c.1).sum::<f64>() - exp) >= 5.0 {
                cells.push((obs, exp));
                obs = 0.0;
                exp = 0.0;
            }
        }
        let used: f64 = cells.iter().map(|c| c.1).sum();
        cells.push((total - cells.iter().map(|c| c.0).sum::<f64>(), total - used));
        let chi2: f64 = cells.iter().map(|(o, e)| (o - e) * (o - e) / e).sum();
        let df = (cells.len() - 1) as f64;
        // Wilson-Hilferty upper 0.001 point
        let z = 3.090;
        let crit = df * (1.0 - 2.0 / (9.0 * df) + z * (2.0 / (9.0 * df)).sqrt()).powi(3);
        assert!(chi2 < crit, "chi2 {chi2} df {df} crit {crit}");
    }
}
