//! Univariate continuous and discrete phase-type laws.
//!
//! [`ContPhaseType`] is the absorption time of a Markov jump process with
//! sub-intensity matrix `S`, possibly with an atom at zero. [`DiscPhaseType`]
//! is the absorption step count of a Markov chain with sub-transition matrix
//! `M`, mixed with a point mass; it also records a `shift` so that the law of
//! a Poisson count `Z` and of the DPH variable `Z + 1` are never confused.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::linalg::{self, Factorized, RealMatrix, RealVector};

const MASS_TOLERANCE: f64 = 1e-9;

/// Stop accumulating pmf terms past this cumulative mass.
pub const TAIL_MASS: f64 = 1e-12;
/// Hard cap on pmf terms in tail computations.
pub const MAX_TERMS: usize = 1_000_000;

/// `PH(alpha, S)` with an optional point mass at zero.
#[derive(Debug, Clone)]
pub struct ContPhaseType {
    alpha: RealVector,
    sub_intensity: RealMatrix,
    defect: f64,
    green: OnceLock<RealMatrix>,
}

/// Nonnegative per-state reward rates.
#[derive(Debug, Clone, PartialEq)]
pub struct RewardVector(RealVector);

impl RewardVector {
    pub fn new(r: RealVector) -> Result<Self> {
        if r.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
            return Err(Error::InvalidArgument("rewards must be finite and nonnegative".into()));
        }
        if r.iter().all(|&x| x == 0.0) {
            return Err(Error::AllZeroReward);
        }
        Ok(Self(r))
    }

    pub fn from_slice(r: &[f64]) -> Result<Self> {
        Self::new(RealVector::from_column_slice(r))
    }

    pub fn as_vector(&self) -> &RealVector {
        &self.0
    }
}

fn check_sub_intensity(s: &RealMatrix) -> Result<()> {
    if !s.is_square() || s.nrows() == 0 {
        return Err(Error::InvalidArgument(
            "sub-intensity matrix must be square and nonempty".into(),
        ));
    }
    for i in 0..s.nrows() {
        let mut row = 0.0;
        for j in 0..s.ncols() {
            let x = s[(i, j)];
            if !x.is_finite() || (i != j && x < 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "invalid sub-intensity entry at ({i}, {j})"
                )));
            }
            row += x;
        }
        if row > MASS_TOLERANCE * s.row(i).amax().max(1.0) {
            return Err(Error::InvalidArgument(format!(
                "sub-intensity row {i} has positive sum"
            )));
        }
    }
    Ok(())
}

fn check_initial(alpha: &RealVector, size: usize) -> Result<f64> {
    if alpha.len() != size {
        return Err(Error::InvalidArgument(format!(
            "initial vector has length {}, expected {size}",
            alpha.len()
        )));
    }
    if alpha.iter().any(|&x| !(x >= 0.0)) {
        return Err(Error::InvalidArgument("initial vector must be nonnegative".into()));
    }
    let mass = alpha.sum();
    if mass > 1.0 + MASS_TOLERANCE {
        return Err(Error::InvalidArgument(format!("initial vector has mass {mass} > 1")));
    }
    Ok((1.0 - mass).max(0.0))
}

impl ContPhaseType {
    /// Builds `PH(alpha, S)`. Any mass missing from `alpha` becomes the defect.
    pub fn new(alpha: RealVector, sub_intensity: RealMatrix) -> Result<Self> {
        check_sub_intensity(&sub_intensity)?;
        let defect = check_initial(&alpha, sub_intensity.nrows())?;
        // nonsingularity, i.e. every state is transient
        Factorized::new(&sub_intensity)?;
        Ok(Self {
            alpha,
            sub_intensity,
            defect,
            green: OnceLock::new(),
        })
    }

    /// Exponential law with the given rate.
    pub fn exponential(rate: f64) -> Result<Self> {
        Self::new(RealVector::from_element(1, 1.0), RealMatrix::from_element(1, 1, -rate))
    }

    pub fn alpha(&self) -> &RealVector {
        &self.alpha
    }

    pub fn sub_intensity(&self) -> &RealMatrix {
        &self.sub_intensity
    }

    pub fn defect(&self) -> f64 {
        self.defect
    }

    pub fn order(&self) -> usize {
        self.alpha.len()
    }

    /// Exit rate vector `s = -S e`.
    pub fn exit_vector(&self) -> RealVector {
        -self.sub_intensity.column_sum()
    }

    /// Green matrix `U = (-S)^{-1}`, computed once.
    pub fn green_matrix(&self) -> &RealMatrix {
        self.green.get_or_init(|| {
            linalg::inverse(&-&self.sub_intensity).expect("sub-intensity checked nonsingular at construction")
        })
    }

    /// Density `alpha e^{St} s` of the absolutely continuous part.
    pub fn density(&self, t: f64) -> f64 {
        let e = linalg::matrix_exponential(&self.sub_intensity, t);
        (self.alpha.transpose() * e * self.exit_vector())[(0, 0)]
    }

    /// `P(tau <= t)`, including the atom at zero.
    pub fn cdf(&self, t: f64) -> f64 {
        if t < 0.0 {
            return 0.0;
        }
        let e = linalg::matrix_exponential(&self.sub_intensity, t);
        let survival = (self.alpha.transpose() * e).sum();
        (self.defect + self.alpha.sum() - survival).clamp(0.0, 1.0)
    }

    /// Laplace transform `E[e^{-t tau}] = defect + alpha (tI - S)^{-1} s`.
    pub fn laplace(&self, t: f64) -> Result<f64> {
        let p = self.order();
        let shifted = RealMatrix::identity(p, p) * t - &self.sub_intensity;
        let x = linalg::solve_vec(&shifted, &self.exit_vector())?;
        Ok(self.defect + self.alpha.dot(&x))
    }

    /// Raw moment `E[tau^k] = k! alpha U^k e`.
    pub fn moment(&self, k: u32) -> f64 {
        let u = self.green_matrix();
        let mut v = RealVector::from_element(self.order(), 1.0);
        let mut factorial = 1.0;
        for j in 1..=k {
            v = u * v;
            factorial *= j as f64;
        }
        factorial * self.alpha.dot(&v)
    }

    pub fn mean(&self) -> f64 {
        self.moment(1)
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.moment(2) - m * m
    }

    /// Law of `int_0^tau r(X_t) dt`.
    ///
    /// Strictly positive rewards rescale time. States with zero reward are
    /// censored out of the embedded chain; mass that never reaches a
    /// rewarded state joins the atom at zero.
    pub fn reward_transform(&self, rewards: &RewardVector) -> Result<ContPhaseType> {
        let r = rewards.as_vector();
        let p = self.order();
        if r.len() != p {
            return Err(Error::InvalidArgument(format!(
                "reward vector has length {}, expected {p}",
                r.len()
            )));
        }
        let s = &self.sub_intensity;
        if r.iter().all(|&x| x > 0.0) {
            let scaled = RealMatrix::from_fn(p, p, |i, j| s[(i, j)] / r[i]);
            return Ok(ContPhaseType {
                alpha: self.alpha.clone(),
                sub_intensity: scaled,
                defect: self.defect,
                green: OnceLock::new(),
            });
        }

        let plus: Vec<usize> = (0..p).filter(|&i| r[i] > 0.0).collect();
        let zero: Vec<usize> = (0..p).filter(|&i| r[i] == 0.0).collect();
        // embedded jump chain of the original process
        let q = |i: usize, j: usize| if i == j { 0.0 } else { -s[(i, j)] / s[(i, i)] };
        let block =
            |rows: &[usize], cols: &[usize]| RealMatrix::from_fn(rows.len(), cols.len(), |a, b| q(rows[a], cols[b]));
        let q_pp = block(&plus, &plus);
        let q_p0 = block(&plus, &zero);
        let q_0p = block(&zero, &plus);
        let q_00 = block(&zero, &zero);
        let escape = RealMatrix::identity(zero.len(), zero.len()) - q_00;
        // (I - Q00)^{-1} Q0+
        let through_zero = linalg::solve(&escape, &q_0p)?;
        let transition = q_pp + q_p0 * &through_zero;
        let alpha_plus = RealVector::from_iterator(plus.len(), plus.iter().map(|&i| self.alpha[i]));
        let alpha_zero = RealVector::from_iterator(zero.len(), zero.iter().map(|&i| self.alpha[i]));
        let pi = alpha_plus + (alpha_zero.transpose() * &through_zero).transpose();

        let d = plus.len();
        let sub_intensity = RealMatrix::from_fn(d, d, |a, b| {
            let i = plus[a];
            let scale = s[(i, i)] / r[i];
            if a == b {
                scale * (1.0 - transition[(a, a)])
            } else {
                -scale * transition[(a, b)]
            }
        });
        let defect = (1.0 - pi.sum()).clamp(0.0, 1.0);
        Ok(ContPhaseType {
            alpha: pi,
            sub_intensity,
            defect,
            green: OnceLock::new(),
        })
    }

    /// Law of `Z` where `Z | tau ~ Poisson(lambda tau)`; `Z + 1` is
    /// `DPH(alpha, (I - S / lambda)^{-1})` and the defect becomes an atom
    /// of `Z` at zero.
    pub fn poisson_mix(&self, lambda: f64) -> Result<DiscPhaseType> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "mutation rate must be positive, got {lambda}"
            )));
        }
        let p = self.order();
        let a = RealMatrix::identity(p, p) - &self.sub_intensity / lambda;
        let m = linalg::inverse(&a)?;
        Ok(DiscPhaseType {
            pi: self.alpha.clone(),
            sub_transition: m,
            atom: self.defect,
            shift: 1,
            radius: OnceLock::new(),
        })
    }
}

/// A discrete phase-type law.
///
/// The chain variable `tau` is `DPH(pi, M)` on the event that the chain is
/// entered (probability `pi e`) and equals `shift` otherwise (probability
/// `atom`). The reported variable is `X = tau - shift`, so for a Poisson
/// mixture `X = Z` and `tau = Z + 1`, and the atom sits at `X = 0`.
#[derive(Debug, Clone)]
pub struct DiscPhaseType {
    pi: RealVector,
    sub_transition: RealMatrix,
    atom: f64,
    shift: u32,
    radius: OnceLock<f64>,
}

impl DiscPhaseType {
    /// `DPH(pi, M)` with any missing initial mass as an atom at zero.
    pub fn new(pi: RealVector, sub_transition: RealMatrix) -> Result<Self> {
        Self::with_shift(pi, sub_transition, 0)
    }

    /// As [`DiscPhaseType::new`], reporting `tau - shift` instead of `tau`.
    pub fn with_shift(pi: RealVector, sub_transition: RealMatrix, shift: u32) -> Result<Self> {
        if !sub_transition.is_square() || sub_transition.nrows() == 0 {
            return Err(Error::InvalidArgument(
                "sub-transition matrix must be square and nonempty".into(),
            ));
        }
        let d = sub_transition.nrows();
        for i in 0..d {
            let row = sub_transition.row(i);
            if row.iter().any(|&x| !(x >= 0.0)) || row.sum() > 1.0 + MASS_TOLERANCE {
                return Err(Error::InvalidArgument(format!(
                    "sub-transition row {i} is not substochastic"
                )));
            }
        }
        let atom = check_initial(&pi, d)?;
        let law = Self {
            pi,
            sub_transition,
            atom,
            shift,
            radius: OnceLock::new(),
        };
        if law.spectral_radius() >= 1.0 - 1e-12 {
            return Err(Error::InvalidArgument(
                "sub-transition matrix has spectral radius >= 1".into(),
            ));
        }
        Ok(law)
    }

    pub(crate) fn from_parts(pi: RealVector, sub_transition: RealMatrix, atom: f64, shift: u32) -> Self {
        Self {
            pi,
            sub_transition,
            atom,
            shift,
            radius: OnceLock::new(),
        }
    }

    pub fn pi(&self) -> &RealVector {
        &self.pi
    }

    pub fn sub_transition(&self) -> &RealMatrix {
        &self.sub_transition
    }

    /// Probability of the point mass (at `X = 0`).
    pub fn atom0(&self) -> f64 {
        self.atom
    }

    pub fn shift(&self) -> u32 {
        self.shift
    }

    pub fn order(&self) -> usize {
        self.pi.len()
    }

    /// Absorption vector `m = (I - M) e`.
    pub fn exit_vector(&self) -> RealVector {
        let d = self.order();
        RealVector::from_fn(d, |i, _| (1.0 - self.sub_transition.row(i).sum()).max(0.0))
    }

    pub fn spectral_radius(&self) -> f64 {
        *self
            .radius
            .get_or_init(|| linalg::spectral_radius(&self.sub_transition))
    }

    fn resolvent_row(&self) -> Result<RealVector> {
        // pi (I - M)^{-1} as a column vector
        let d = self.order();
        let f = Factorized::new(&(RealMatrix::identity(d, d) - &self.sub_transition))?;
        Ok(f.solve_left(&self.pi))
    }

    /// `P(tau = i)`: `pi M^{i-1} m`, plus the atom when `i == shift`.
    pub fn dph_pmf(&self, i: u64) -> f64 {
        let chain = if i == 0 {
            0.0
        } else {
            let mut row = self.pi.transpose();
            for _ in 1..i {
                row *= &self.sub_transition;
            }
            (row * self.exit_vector())[(0, 0)]
        };
        chain + if i == self.shift as u64 { self.atom } else { 0.0 }
    }

    /// `E[z^tau] = atom z^shift + z pi (I - zM)^{-1} m`.
    pub fn dph_pgf(&self, z: f64) -> Result<f64> {
        let d = self.order();
        if z.abs() * self.spectral_radius() >= 1.0 {
            return Err(Error::InvalidArgument(format!(
                "pgf argument {z} outside the domain of convergence"
            )));
        }
        let a = RealMatrix::identity(d, d) - &self.sub_transition * z;
        let x = linalg::solve_vec(&a, &self.exit_vector())?;
        Ok(self.atom * z.powi(self.shift as i32) + z * self.pi.dot(&x))
    }

    /// `E[tau]`; the chain part is `pi (I - M)^{-1} e`.
    pub fn dph_mean(&self) -> f64 {
        let row = self.resolvent_row().expect("spectral radius below one");
        row.sum() + self.atom * self.shift as f64
    }

    /// `E[tau (tau - 1)]`; the chain part is `2 pi M (I - M)^{-2} e`.
    pub fn dph_factorial2(&self) -> f64 {
        let d = self.order();
        let f =
            Factorized::new(&(RealMatrix::identity(d, d) - &self.sub_transition)).expect("spectral radius below one");
        let ones = RealVector::from_element(d, 1.0);
        let x = f.solve_vec(&f.solve_vec(&ones));
        let s = self.shift as f64;
        2.0 * self.pi.dot(&(&self.sub_transition * x)) + self.atom * s * (s - 1.0)
    }

    /// Mean of the reported variable.
    pub fn mean(&self) -> f64 {
        self.dph_mean() - self.shift as f64
    }

    /// Variance of the reported variable (shift-invariant).
    pub fn variance(&self) -> f64 {
        let m = self.dph_mean();
        self.dph_factorial2() + m - m * m
    }

    /// `E[z^X]` for the reported variable.
    pub fn pgf(&self, z: f64) -> Result<f64> {
        let d = self.order();
        if z.abs() * self.spectral_radius() >= 1.0 {
            return Err(Error::InvalidArgument(format!(
                "pgf argument {z} outside the domain of convergence"
            )));
        }
        // chain part z^{1 - shift} pi (I - zM)^{-1} m, kept finite at z = 0 when shift = 1
        let a = RealMatrix::identity(d, d) - &self.sub_transition * z;
        let chain = self.pi.dot(&linalg::solve_vec(&a, &self.exit_vector())?);
        Ok(self.atom + chain * z.powi(1 - self.shift as i32))
    }

    /// `P(X = k)` for `k = 0..=kmax`.
    pub fn pmf_table(&self, kmax: usize) -> Vec<f64> {
        let mut out = vec![0.0; kmax + 1];
        out[0] = self.atom;
        let exit = self.exit_vector();
        let mut row = self.pi.transpose();
        // tau = i has probability row * m with row = pi M^{i-1}
        let shift = self.shift as usize;
        let mut i = 1usize;
        while i <= kmax + shift {
            if i >= shift {
                out[i - shift] += (&row * &exit)[(0, 0)];
            }
            row *= &self.sub_transition;
            i += 1;
        }
        out
    }

    /// `P(X = k)`.
    pub fn pmf(&self, k: usize) -> f64 {
        self.pmf_table(k)[k]
    }

    /// `P(X <= k)`, accumulated until the remaining mass is below [`TAIL_MASS`].
    pub fn cdf(&self, k: usize) -> f64 {
        let exit = self.exit_vector();
        let shift = self.shift as usize;
        let mut total = self.atom;
        let mut row = self.pi.transpose();
        for i in 1..=(k + shift).min(MAX_TERMS) {
            if i >= shift {
                total += (&row * &exit)[(0, 0)];
            }
            if total >= 1.0 - TAIL_MASS {
                break;
            }
            row *= &self.sub_transition;
        }
        total.min(1.0)
    }
}
