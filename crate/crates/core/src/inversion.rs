//! CDF of an arbitrary linear statistic `c . xi` by inverting its
//! characteristic function on an FFT lattice.
//!
//! With `Z = c . xi - mu` and lattice points `x_h = 2 pi h / (eta H)`,
//!
//! ```text
//! F(x_h) = 1/2 + h/H - Re( sum_{k=1}^{H-1} phi_Z(eta k) / (pi i k) e^{-2 pi i k h / H} )
//! ```
//!
//! which is one forward FFT of `a_k = phi_Z(eta k) / (pi i k)`. The lattice
//! covers `(-pi / eta, pi / eta)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimators::{estimator_variance, WeightedStatistic};
use crate::sfs::SfsModel;

/// Default lattice size.
pub const DEFAULT_H: usize = 1 << 14;
/// Half-width of the default lattice range, in standard deviations.
pub const DEFAULT_RANGE_SD: f64 = 10.0;
/// Upper limit on `H` chosen by [`InversionGrid::resolving`].
pub const MAX_RESOLVING_H: usize = 1 << 20;
/// Largest endpoint deviation from 0 and 1 before the grid is rejected.
pub const ENDPOINT_TOLERANCE: f64 = 0.01;

fn check_coefficients(sm: &SfsModel, c: &[f64]) -> Result<()> {
    if c.len() != sm.dim() {
        return Err(Error::InvalidArgument(format!(
            "statistic has {} coefficients, expected {}",
            c.len(),
            sm.dim()
        )));
    }
    if c.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument("coefficients must be finite".into()));
    }
    Ok(())
}

/// PGF `E[z^{c . xi}]` with `z^{c_j}` on the principal branch, `|z| <= 1`.
pub fn weighted_pgf(sm: &SfsModel, c: &[f64], z: Complex64) -> Result<Complex64> {
    check_coefficients(sm, c)?;
    if z.norm() > 1.0 + 1e-12 {
        return Err(Error::InvalidArgument(format!("|z| = {} exceeds 1", z.norm())));
    }
    let powers: Vec<Complex64> = c
        .iter()
        .map(|&cj| {
            if cj == 0.0 {
                Complex64::new(1.0, 0.0)
            } else if z == Complex64::new(0.0, 0.0) {
                Complex64::new(0.0, 0.0)
            } else {
                (z.ln() * cj).exp()
            }
        })
        .collect();
    sm.joint_pgf(&powers)
}

/// `phi(t) = E[exp(i t c . xi)]`, with `z^{c_j} = exp(i t c_j)`.
pub fn characteristic_function(sm: &SfsModel, c: &[f64], t: f64) -> Result<Complex64> {
    check_coefficients(sm, c)?;
    let powers: Vec<Complex64> = c.iter().map(|&cj| Complex64::from_polar(1.0, t * cj)).collect();
    sm.joint_pgf(&powers)
}

/// Lattice parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InversionGrid {
    /// Number of lattice points, a power of two.
    pub h: usize,
    /// Frequency step.
    pub eta: f64,
    /// Mean subtracted from the statistic before inversion.
    pub mu: f64,
}

impl InversionGrid {
    pub fn new(h: usize, eta: f64, mu: f64) -> Result<Self> {
        if h < 64 || !h.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "H must be a power of two >= 64, got {h}"
            )));
        }
        if !(eta > 0.0) || !eta.is_finite() {
            return Err(Error::InvalidArgument(format!("eta must be positive, got {eta}")));
        }
        if !mu.is_finite() {
            return Err(Error::InvalidArgument("centering mean must be finite".into()));
        }
        Ok(Self { h, eta, mu })
    }

    /// `H = 2^14`, lattice range of ten standard deviations either side of the mean.
    pub fn default_for(sm: &SfsModel, c: &[f64]) -> Result<Self> {
        Self::with_size(sm, c, DEFAULT_H)
    }

    /// Default `eta` and mean for a given `H`.
    pub fn with_size(sm: &SfsModel, c: &[f64], h: usize) -> Result<Self> {
        let (mu, sd) = moments(sm, c)?;
        if !(sd > 0.0) {
            return Err(Error::InvalidArgument("statistic is degenerate (zero variance)".into()));
        }
        Self::new(h, PI / (DEFAULT_RANGE_SD * sd), mu)
    }

    /// Default range with the smallest `H >= 2^14` whose lattice step is at
    /// most a quarter of `mesh`, the spacing of the atoms of a statistic
    /// with rational coefficients. `H` is capped at [`MAX_RESOLVING_H`].
    pub fn resolving(sm: &SfsModel, c: &[f64], mesh: f64) -> Result<Self> {
        if !(mesh > 0.0) || !mesh.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "atom spacing must be positive, got {mesh}"
            )));
        }
        let mut grid = Self::default_for(sm, c)?;
        while grid.step() > mesh / 4.0 && grid.h < MAX_RESOLVING_H {
            grid.h *= 2;
        }
        Ok(grid)
    }

    /// Lattice spacing `2 pi / (eta H)`.
    pub fn step(&self) -> f64 {
        2.0 * PI / (self.eta * self.h as f64)
    }

    /// Half-width `pi / eta` of the covered interval.
    pub fn half_range(&self) -> f64 {
        PI / self.eta
    }
}

/// Mean `theta c . v` and standard deviation `sqrt(c Lambda c)`.
pub fn moments(sm: &SfsModel, c: &[f64]) -> Result<(f64, f64)> {
    check_coefficients(sm, c)?;
    let w = WeightedStatistic::new(c.to_vec(), "custom")?;
    Ok((sm.theta() * w.bias_weight(), estimator_variance(sm, &w)?.sqrt()))
}

/// CDF of the centered statistic on the lattice.
#[derive(Debug, Clone, Serialize)]
pub struct CdfTable {
    pub grid: InversionGrid,
    /// Centered abscissae `x_h`, increasing.
    pub points: Vec<f64>,
    /// Values straight from the inversion formula.
    pub raw: Vec<f64>,
    /// Running maximum of `raw`, clipped to `[0, 1]`.
    pub values: Vec<f64>,
    /// Largest deviation of the end values from 0 and 1.
    pub endpoint_deviation: f64,
    /// Total downward variation of `raw`.
    pub monotonicity_violation: f64,
}

impl CdfTable {
    /// Abscissae on the scale of `c . xi`.
    pub fn statistic_points(&self) -> Vec<f64> {
        self.points.iter().map(|x| x + self.grid.mu).collect()
    }

    /// CDF of `c . xi` at `x` from the unregularized values clipped to
    /// `[0, 1]`, linearly interpolated between lattice points.
    ///
    /// The running maximum in `values` carries the overshoot after each jump
    /// of a discrete law forward to the next atom, so point evaluation at
    /// continuity points uses `raw` instead.
    pub fn eval(&self, x: f64) -> f64 {
        let z = x - self.grid.mu;
        let first = self.points[0];
        let step = self.grid.step();
        let pos = (z - first) / step;
        if pos <= 0.0 {
            return if pos < -0.5 { 0.0 } else { self.clipped(0) };
        }
        let last = self.points.len() - 1;
        if pos >= last as f64 {
            return if pos > last as f64 + 0.5 {
                1.0
            } else {
                self.clipped(last)
            };
        }
        let i = pos.floor() as usize;
        let frac = pos - i as f64;
        self.clipped(i) * (1.0 - frac) + self.clipped(i + 1) * frac
    }

    fn clipped(&self, i: usize) -> f64 {
        self.raw[i].clamp(0.0, 1.0)
    }
}

/// Inverts the characteristic function of `c . xi` on `grid`.
pub fn invert_cdf(sm: &SfsModel, c: &[f64], grid: InversionGrid) -> Result<CdfTable> {
    check_coefficients(sm, c)?;
    let h = grid.h;
    let eta = grid.eta;
    let mut a: Vec<Complex64> = (0..h)
        .into_par_iter()
        .map(|k| -> Result<Complex64> {
            if k == 0 {
                return Ok(Complex64::new(0.0, 0.0));
            }
            let s = eta * k as f64;
            let phi = characteristic_function(sm, c, s)? * Complex64::from_polar(1.0, -s * grid.mu);
            Ok(phi / Complex64::new(0.0, PI * k as f64))
        })
        .collect::<Result<_>>()?;
    FftPlanner::<f64>::new().plan_fft_forward(h).process(&mut a);

    let half = (h / 2) as i64;
    let mut points = Vec::with_capacity(h - 1);
    let mut raw = Vec::with_capacity(h - 1);
    for j in (-half + 1)..half {
        let idx = j.rem_euclid(h as i64) as usize;
        points.push(2.0 * PI * j as f64 / (eta * h as f64));
        raw.push(0.5 + j as f64 / h as f64 - a[idx].re);
    }

    let endpoint_deviation = raw[0].abs().max((1.0 - raw[raw.len() - 1]).abs());
    if endpoint_deviation > ENDPOINT_TOLERANCE {
        return Err(Error::GridTooCoarse {
            deviation: endpoint_deviation,
        });
    }
    let monotonicity_violation = raw.windows(2).map(|w| (w[0] - w[1]).max(0.0)).sum();
    let mut running = f64::NEG_INFINITY;
    let values = raw
        .iter()
        .map(|&f| {
            running = running.max(f);
            running.clamp(0.0, 1.0)
        })
        .collect();
    Ok(CdfTable {
        grid,
        points,
        raw,
        values,
        endpoint_deviation,
        monotonicity_violation,
    })
}

/// Left-continuous inverse `min { x : F(x) >= p }` on the lattice, on the
/// scale of `c . xi`.
pub fn quantiles(table: &CdfTable, probs: &[f64]) -> Result<Vec<f64>> {
    probs
        .iter()
        .map(|&p| {
            if !(p > 0.0 && p < 1.0) {
                return Err(Error::InvalidArgument(format!("probability {p} outside (0, 1)")));
            }
            let i = table.values.partition_point(|&f| f < p);
            let i = i.min(table.points.len() - 1);
            Ok(table.points[i] + table.grid.mu)
        })
        .collect()
}
