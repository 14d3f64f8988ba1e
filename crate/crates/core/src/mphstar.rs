//! Multivariate phase-type (MPH*) rewards accumulated along one trajectory,
//! and Poisson counts sprinkled on them.

use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, ComplexVector, RealMatrix, RealVector};
use crate::phasetype::{ContPhaseType, DiscPhaseType, RewardVector};

/// `Y ~ MPH*(alpha, S, R)` with `Y_j = int_0^tau R[X_t, j] dt`.
#[derive(Debug, Clone)]
pub struct MphRep {
    base: ContPhaseType,
    rewards: RealMatrix,
    moments: OnceLock<Moments>,
}

#[derive(Debug, Clone)]
struct Moments {
    /// alpha U as a column vector
    occupation: RealVector,
    /// U R
    green_rewards: RealMatrix,
}

impl MphRep {
    pub fn new(alpha: RealVector, sub_intensity: RealMatrix, rewards: RealMatrix) -> Result<Self> {
        let base = ContPhaseType::new(alpha, sub_intensity)?;
        Self::from_base(base, rewards)
    }

    pub fn from_base(base: ContPhaseType, rewards: RealMatrix) -> Result<Self> {
        if rewards.nrows() != base.order() || rewards.ncols() == 0 {
            return Err(Error::InvalidArgument(format!(
                "reward matrix is {}x{}, expected {} rows",
                rewards.nrows(),
                rewards.ncols(),
                base.order()
            )));
        }
        if rewards.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
            return Err(Error::InvalidArgument("rewards must be finite and nonnegative".into()));
        }
        Ok(Self {
            base,
            rewards,
            moments: OnceLock::new(),
        })
    }

    pub fn base(&self) -> &ContPhaseType {
        &self.base
    }

    pub fn alpha(&self) -> &RealVector {
        self.base.alpha()
    }

    pub fn sub_intensity(&self) -> &RealMatrix {
        self.base.sub_intensity()
    }

    pub fn rewards(&self) -> &RealMatrix {
        &self.rewards
    }

    /// Number of coordinates `m`.
    pub fn dim(&self) -> usize {
        self.rewards.ncols()
    }

    fn moments(&self) -> &Moments {
        self.moments.get_or_init(|| {
            let u = self.base.green_matrix();
            Moments {
                occupation: u.transpose() * self.base.alpha(),
                green_rewards: u * &self.rewards,
            }
        })
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.dim() {
            return Err(Error::InvalidArgument(format!(
                "coordinate {i} out of range 0..{}",
                self.dim()
            )));
        }
        Ok(())
    }

    /// Joint transform `E[exp(a . Y)] = alpha (Delta(R a) + S)^{-1} S e`, for `a <= 0`.
    pub fn laplace(&self, a: &[f64]) -> Result<f64> {
        if a.len() != self.dim() {
            return Err(Error::InvalidArgument(
                "argument length does not match reward columns".into(),
            ));
        }
        if a.iter().any(|&x| x > 0.0) {
            return Err(Error::InvalidArgument("transform argument must be nonpositive".into()));
        }
        let w: Vec<Complex64> = a.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Ok(self.transform(&w)?.re)
    }

    /// Complex joint transform `alpha (Delta(R w) + S)^{-1} S e`, plus the
    /// defect of `alpha`. Every PGF and characteristic function in the crate
    /// is evaluated through this resolvent.
    pub fn transform(&self, w: &[Complex64]) -> Result<Complex64> {
        let p = self.base.order();
        let s = self.base.sub_intensity();
        let mut a = ComplexMatrix::from_fn(p, p, |i, j| Complex64::new(s[(i, j)], 0.0));
        for i in 0..p {
            let mut shift = Complex64::new(0.0, 0.0);
            for (j, wj) in w.iter().enumerate() {
                let r = self.rewards[(i, j)];
                if r != 0.0 {
                    shift += wj * r;
                }
            }
            a[(i, i)] += shift;
        }
        let rhs = ComplexVector::from_iterator(p, self.base.exit_vector().iter().map(|&x| Complex64::new(-x, 0.0)));
        let x = linalg::solve_vec(&a, &rhs)?;
        let alpha = self.base.alpha();
        let value: Complex64 = (0..p).map(|i| x[i] * alpha[i]).sum();
        Ok(value + self.base.defect())
    }

    /// `E[Y]`, entries `alpha U R_{.i}`.
    pub fn mean(&self) -> RealVector {
        self.rewards.transpose() * &self.moments().occupation
    }

    /// `E[Y_i Y_j] = alpha U Delta(R_i) U R_j + alpha U Delta(R_j) U R_i`.
    pub fn cross_moment(&self, i: usize, j: usize) -> Result<f64> {
        self.check_index(i)?;
        self.check_index(j)?;
        let m = self.moments();
        let w = &m.occupation;
        let r = &self.rewards;
        let ur = &m.green_rewards;
        Ok((0..self.base.order())
            .map(|k| w[k] * (r[(k, i)] * ur[(k, j)] + r[(k, j)] * ur[(k, i)]))
            .sum())
    }

    /// Matrix of second moments `E[Y Y^T]`.
    pub fn second_moments(&self) -> RealMatrix {
        let m = self.dim();
        let mut out = RealMatrix::zeros(m, m);
        for i in 0..m {
            for j in i..m {
                let v = self.cross_moment(i, j).expect("indices in range");
                out[(i, j)] = v;
                out[(j, i)] = v;
            }
        }
        out
    }

    /// Covariance matrix `Sigma` of `Y`.
    pub fn covariance(&self) -> RealMatrix {
        let mu = self.mean();
        self.second_moments() - &mu * mu.transpose()
    }

    /// PGF of `Z` with `Z_k | Y ~ Poisson(lambda Y_k)` independent:
    /// `alpha (Delta(R lambda (z - e)) + S)^{-1} S e`.
    pub fn joint_pgf(&self, lambda: f64, z: &[Complex64]) -> Result<Complex64> {
        if z.len() != self.dim() {
            return Err(Error::InvalidArgument(
                "argument length does not match reward columns".into(),
            ));
        }
        let w: Vec<Complex64> = z.iter().map(|&zk| (zk - 1.0) * lambda).collect();
        self.transform(&w)
    }

    /// `Var(Z) = lambda Delta(mu) + lambda^2 Sigma`.
    pub fn poisson_covariance(&self, lambda: f64) -> RealMatrix {
        let mu = self.mean();
        RealMatrix::from_diagonal(&mu) * lambda + self.covariance() * (lambda * lambda)
    }

    /// `E[Z_i Z_j]` for `i != j`.
    pub fn poisson_cross_moment(&self, lambda: f64, i: usize, j: usize) -> Result<f64> {
        if i == j {
            return Err(Error::InvalidArgument(
                "poisson cross moment needs distinct coordinates".into(),
            ));
        }
        Ok(lambda * lambda * self.cross_moment(i, j)?)
    }

    /// Law of the single coordinate `Y_i`, atoms included.
    pub fn marginal(&self, i: usize) -> Result<ContPhaseType> {
        self.check_index(i)?;
        self.weighted_marginal(&RealVector::from_fn(self.dim(), |j, _| if j == i { 1.0 } else { 0.0 }))
    }

    /// Law of `w . Y` for nonnegative weights.
    pub fn weighted_marginal(&self, weights: &RealVector) -> Result<ContPhaseType> {
        if weights.len() != self.dim() {
            return Err(Error::InvalidArgument(
                "weight length does not match reward columns".into(),
            ));
        }
        let r = RewardVector::new(&self.rewards * weights)?;
        self.base.reward_transform(&r)
    }

    /// Law of `Z_i`.
    pub fn coordinate_count_law(&self, i: usize, lambda: f64) -> Result<DiscPhaseType> {
        self.marginal(i)?.poisson_mix(lambda)
    }
}
