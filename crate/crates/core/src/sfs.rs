//! The site frequency spectrum as Poisson counts on the MPH* branch lengths
//! of the block-counting process.

use num_complex::Complex64;

use crate::blockcounting::{build_model, BlockCountingModel};
use crate::error::{Error, Result};
use crate::linalg::{RealMatrix, RealVector};
use crate::mphstar::MphRep;
use crate::phasetype::{ContPhaseType, DiscPhaseType};

/// Joint law of the SFS for sample size `n` and mutation rate `theta`.
///
/// Branch lengths are `Y ~ MPH*(e_1, T, A)` and `xi_i | Y ~ Poisson(theta Y_i / 2)`.
#[derive(Debug, Clone)]
pub struct SfsModel {
    model: BlockCountingModel,
    theta: f64,
    rep: MphRep,
}

impl SfsModel {
    pub fn new(n: usize, theta: f64) -> Result<Self> {
        Self::from_model(build_model(n)?, theta)
    }

    pub fn from_model(model: BlockCountingModel, theta: f64) -> Result<Self> {
        check_theta(theta)?;
        let rep = MphRep::new(model.initial(), model.sub_intensity().clone(), model.state_matrix())?;
        Ok(Self { model, theta, rep })
    }

    /// Same genealogy, different mutation rate. Cached branch moments are kept.
    pub fn with_theta(&self, theta: f64) -> Result<Self> {
        check_theta(theta)?;
        Ok(Self { theta, ..self.clone() })
    }

    pub fn sample_size(&self) -> usize {
        self.model.sample_size()
    }

    /// Number of SFS entries, `n - 1`.
    pub fn dim(&self) -> usize {
        self.model.sample_size() - 1
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Poisson rate per unit branch length, `theta / 2`.
    pub fn lambda(&self) -> f64 {
        self.theta / 2.0
    }

    pub fn model(&self) -> &BlockCountingModel {
        &self.model
    }

    pub fn rep(&self) -> &MphRep {
        &self.rep
    }

    /// `E[z_1^{xi_1} ... z_{n-1}^{xi_{n-1}}]`.
    pub fn joint_pgf(&self, z: &[Complex64]) -> Result<Complex64> {
        self.rep.joint_pgf(self.lambda(), z)
    }

    fn check_class(&self, i: usize) -> Result<()> {
        if i == 0 || i > self.dim() {
            return Err(Error::InvalidArgument(format!(
                "i-ton class {i} outside 1..={}",
                self.dim()
            )));
        }
        Ok(())
    }

    /// Total length of branches with `i` descendants (1-based `i`).
    pub fn iton_branch_law(&self, i: usize) -> Result<ContPhaseType> {
        self.check_class(i)?;
        self.rep.marginal(i - 1)
    }

    /// Law of `xi_i`.
    pub fn iton_count_law(&self, i: usize) -> Result<DiscPhaseType> {
        self.iton_branch_law(i)?.poisson_mix(self.lambda())
    }

    /// Law of `sum_{i : mask_i} xi_i`.
    pub fn zero_one_statistic_law(&self, mask: &[bool]) -> Result<DiscPhaseType> {
        if mask.len() != self.dim() {
            return Err(Error::InvalidArgument(format!(
                "mask has length {}, expected {}",
                mask.len(),
                self.dim()
            )));
        }
        if !mask.iter().any(|&b| b) {
            return Err(Error::AllZeroMask);
        }
        let weights = RealVector::from_iterator(mask.len(), mask.iter().map(|&b| if b { 1.0 } else { 0.0 }));
        self.rep.weighted_marginal(&weights)?.poisson_mix(self.lambda())
    }

    /// Number of segregating sites, `xi_1 + ... + xi_{n-1}`.
    pub fn segregating_sites_law(&self) -> Result<DiscPhaseType> {
        self.zero_one_statistic_law(&vec![true; self.dim()])
    }

    /// Means `2 / i` of the i-ton branch lengths.
    pub fn branch_means(&self) -> RealVector {
        self.rep.mean()
    }

    /// Covariance matrix of the i-ton branch lengths.
    pub fn branch_covariance(&self) -> RealMatrix {
        self.rep.covariance()
    }

    /// `E[xi]`.
    pub fn expected_sfs(&self) -> RealVector {
        self.branch_means() * self.lambda()
    }

    /// `Var(xi) = (theta / 2) Delta(mu) + (theta^2 / 4) Sigma`.
    pub fn covariance(&self) -> RealMatrix {
        self.rep.poisson_covariance(self.lambda())
    }
}

fn check_theta(theta: f64) -> Result<()> {
    if !(theta > 0.0) || !theta.is_finite() {
        return Err(Error::InvalidArgument(format!("theta must be positive, got {theta}")));
    }
    Ok(())
}
