//! Linear estimators of theta and neutrality tests built from the SFS.
//!
//! A statistic is `c . xi`. It is unbiased for theta when `c . v = 1` with
//! `v_i = 1 / i`, and a test statistic when `c . v = 0`.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::Serialize;

use crate::blockcounting::MAX_SAMPLE_SIZE;
use crate::error::{Error, Result};
use crate::linalg::{solve_vec, RealMatrix, RealVector};
use crate::sfs::SfsModel;

type Q = Ratio<i128>;

/// The named statistics with closed-form coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum EstimatorKind {
    Singleton,
    Watterson,
    Pairwise,
    H,
    L,
    TajD,
    PiMinusH,
    LMinusW,
    WMinusH,
    Xi1MinusW,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 10] = [
        EstimatorKind::Singleton,
        EstimatorKind::Watterson,
        EstimatorKind::Pairwise,
        EstimatorKind::H,
        EstimatorKind::L,
        EstimatorKind::TajD,
        EstimatorKind::PiMinusH,
        EstimatorKind::LMinusW,
        EstimatorKind::WMinusH,
        EstimatorKind::Xi1MinusW,
    ];

    pub const ESTIMATORS: [EstimatorKind; 5] = [
        EstimatorKind::Singleton,
        EstimatorKind::Watterson,
        EstimatorKind::Pairwise,
        EstimatorKind::H,
        EstimatorKind::L,
    ];

    pub const TESTS: [EstimatorKind; 5] = [
        EstimatorKind::TajD,
        EstimatorKind::PiMinusH,
        EstimatorKind::LMinusW,
        EstimatorKind::WMinusH,
        EstimatorKind::Xi1MinusW,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EstimatorKind::Singleton => "singleton",
            EstimatorKind::Watterson => "watterson",
            EstimatorKind::Pairwise => "pairwise",
            EstimatorKind::H => "H",
            EstimatorKind::L => "L",
            EstimatorKind::TajD => "taj_D",
            EstimatorKind::PiMinusH => "pi_minus_H",
            EstimatorKind::LMinusW => "L_minus_W",
            EstimatorKind::WMinusH => "W_minus_H",
            EstimatorKind::Xi1MinusW => "xi1_minus_W",
        }
    }

    /// True for the differences of two estimators.
    pub fn is_test(self) -> bool {
        EstimatorKind::TESTS.contains(&self)
    }

    /// Coefficients in exact rational arithmetic.
    pub fn rational_coefficients(self, n: usize) -> Result<Vec<Ratio<i128>>> {
        let min = if self.is_test() { 3 } else { 2 };
        if n < min {
            return Err(Error::InvalidSampleSize(n));
        }
        if n > MAX_SAMPLE_SIZE {
            return Err(Error::SampleSizeTooLarge {
                n,
                max: MAX_SAMPLE_SIZE,
            });
        }
        let ni = n as i128;
        let class = |f: &dyn Fn(i128) -> Q| -> Vec<Q> { (1..ni).map(f).collect() };
        let diff = |a: EstimatorKind, b: EstimatorKind| -> Result<Vec<Q>> {
            let x = a.rational_coefficients(n)?;
            let y = b.rational_coefficients(n)?;
            Ok(x.into_iter().zip(y).map(|(p, q)| p - q).collect())
        };
        Ok(match self {
            EstimatorKind::Singleton => class(&|i| Q::from_integer((i == 1) as i128)),
            EstimatorKind::Watterson => {
                let a1 = harmonic(n);
                class(&|_| a1.recip())
            }
            EstimatorKind::Pairwise => class(&|i| Q::new(2 * i * (ni - i), ni * (ni - 1))),
            EstimatorKind::H => class(&|i| Q::new(2 * i * i, ni * (ni - 1))),
            EstimatorKind::L => class(&|i| Q::new(i, ni - 1)),
            EstimatorKind::TajD => diff(EstimatorKind::Pairwise, EstimatorKind::Watterson)?,
            EstimatorKind::PiMinusH => diff(EstimatorKind::Pairwise, EstimatorKind::H)?,
            EstimatorKind::LMinusW => diff(EstimatorKind::L, EstimatorKind::Watterson)?,
            EstimatorKind::WMinusH => diff(EstimatorKind::Watterson, EstimatorKind::H)?,
            EstimatorKind::Xi1MinusW => diff(EstimatorKind::Singleton, EstimatorKind::Watterson)?,
        })
    }

    /// Spacing `1 / L` of the lattice carrying `c . xi`, with `L` the least
    /// common multiple of the coefficient denominators.
    pub fn value_mesh(self, n: usize) -> Result<f64> {
        let l = self
            .rational_coefficients(n)?
            .iter()
            .fold(1i128, |acc, q| num_integer::lcm(acc, *q.denom()));
        Ok(1.0 / l as f64)
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EstimatorKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::UnknownName(s.to_string()))
    }
}

/// `a_1 = 1 + 1/2 + ... + 1/(n-1)`.
pub fn harmonic(n: usize) -> Ratio<i128> {
    (1..n as i128).map(|i| Q::new(1, i)).sum()
}

/// Coefficient vector of a linear statistic of the SFS.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightedStatistic {
    pub c: Vec<f64>,
    pub label: String,
}

impl WeightedStatistic {
    pub fn new(c: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        if let Some(i) = c.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument(format!("coefficient {} is not finite", i + 1)));
        }
        Ok(Self { c, label: label.into() })
    }

    pub fn as_vector(&self) -> RealVector {
        RealVector::from_column_slice(&self.c)
    }

    /// `c . v` with `v_i = 1 / i`.
    pub fn bias_weight(&self) -> f64 {
        self.c.iter().enumerate().map(|(j, c)| c / (j + 1) as f64).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimatorReport {
    pub c: Vec<f64>,
    pub label: String,
    pub unbiased: bool,
    pub variance: f64,
}

/// Tolerance for declaring `c . v = 1` in floating point.
pub const UNBIASED_TOLERANCE: f64 = 1e-12;

/// Closed-form coefficients by name.
pub fn classical_coefficients(name: &str, n: usize) -> Result<WeightedStatistic> {
    let kind: EstimatorKind = name.parse()?;
    let c = kind.rational_coefficients(n)?.iter().map(ratio_to_f64).collect();
    WeightedStatistic::new(c, kind.name())
}

fn ratio_to_f64(q: &Q) -> f64 {
    *q.numer() as f64 / *q.denom() as f64
}

/// `v_i = 1 / i`, the unbiasedness direction.
pub fn unbiasedness_vector(n: usize) -> RealVector {
    RealVector::from_fn(n - 1, |i, _| 1.0 / (i + 1) as f64)
}

fn check_len(sm: &SfsModel, w: &WeightedStatistic) -> Result<()> {
    if w.c.len() != sm.dim() {
        return Err(Error::InvalidArgument(format!(
            "statistic has {} coefficients, expected {}",
            w.c.len(),
            sm.dim()
        )));
    }
    Ok(())
}

/// `Var(c . xi) = c Lambda(theta) c`.
pub fn estimator_variance(sm: &SfsModel, w: &WeightedStatistic) -> Result<f64> {
    check_len(sm, w)?;
    let c = w.as_vector();
    let v = c.dot(&(sm.covariance() * &c));
    // rounding can push an exactly zero variance slightly negative
    Ok(v.max(0.0))
}

/// Minimizer of `c Lambda c` subject to `c . v = 1`.
pub fn blue_coefficients(sm: &SfsModel) -> Result<WeightedStatistic> {
    let lambda: RealMatrix = sm.covariance();
    let v = unbiasedness_vector(sm.sample_size());
    let x = solve_vec(&lambda, &v)?;
    let scale = v.dot(&x);
    WeightedStatistic::new((x / scale).iter().copied().collect(), "blue")
}

/// Coefficients, unbiasedness flag and variance of a statistic at the model's theta.
pub fn report(sm: &SfsModel, w: &WeightedStatistic) -> Result<EstimatorReport> {
    let variance = estimator_variance(sm, w)?;
    Ok(EstimatorReport {
        c: w.c.clone(),
        label: w.label.clone(),
        unbiased: (w.bias_weight() - 1.0).abs() <= UNBIASED_TOLERANCE,
        variance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn watterson_n4() {
        assert_eq!(harmonic(4), Q::new(11, 6));
        let w = classical_coefficients("watterson", 4).unwrap();
        for c in &w.c {
            assert!((c - 6.0 / 11.0).abs() < 1e-15);
        }
    }

    #[test]
    fn tajima_signs_n4() {
        let d = EstimatorKind::TajD.rational_coefficients(4).unwrap();
        let want: Vec<Q> = (1..4).map(|i| Q::new(i * (4 - i), 6) - Q::new(6, 11)).collect();
        assert_eq!(d, want);
        assert!(d[0] < Q::from_integer(0) && d[1] > Q::from_integer(0) && d[2] < Q::from_integer(0));
        assert_eq!(d[0], Q::new(1, 2) - Q::new(6, 11));
    }

    #[test]
    fn tajima_n8() {
        assert_eq!(harmonic(8), Q::new(363, 140));
        let d = EstimatorKind::TajD.rational_coefficients(8).unwrap();
        for (k, c) in d.iter().enumerate() {
            let i = k as i128 + 1;
            assert_eq!(*c, Q::new(i * (8 - i), 28) - Q::new(140, 363));
        }
        assert_eq!(
            EstimatorKind::Pairwise.rational_coefficients(8).unwrap()[1],
            Q::new(3, 7)
        );
    }

    #[test]
    fn exact_unbiasedness() {
        for n in 3..=30 {
            for kind in EstimatorKind::ALL {
                let c = kind.rational_coefficients(n).unwrap();
                let cv: Q = c.iter().enumerate().map(|(j, x)| x * Q::new(1, j as i128 + 1)).sum();
                let want = if kind.is_test() { 0 } else { 1 };
                assert_eq!(cv, Q::from_integer(want), "{kind} n={n}");
            }
        }
    }

    #[test]
    fn value_mesh() {
        assert_eq!(EstimatorKind::Singleton.value_mesh(5).unwrap(), 1.0);
        // -1/22, 4/33, -1/22
        assert_eq!(EstimatorKind::TajD.value_mesh(4).unwrap(), 1.0 / 66.0);
        for n in 3..=12 {
            let l = (1.0 / EstimatorKind::TajD.value_mesh(n).unwrap()).round() as i128;
            for q in EstimatorKind::TajD.rational_coefficients(n).unwrap() {
                assert!((q * Q::from_integer(l)).is_integer());
            }
        }
    }

    #[test]
    fn names_round_trip() {
        for kind in EstimatorKind::ALL {
            assert_eq!(kind.name().parse::<EstimatorKind>().unwrap(), kind);
        }
        assert_eq!(
            classical_coefficients("tajima", 4).unwrap_err(),
            Error::UnknownName("tajima".into())
        );
        assert!(classical_coefficients("taj_D", 2).is_err());
        assert!(classical_coefficients("watterson", 1).is_err());
    }

    #[test]
    fn model_mean_links_to_bias_weight() {
        let theta = 2.5;
        let sm = SfsModel::new(7, theta).unwrap();
        let mean = sm.expected_sfs();
        for kind in EstimatorKind::ALL {
            let w = classical_coefficients(kind.name(), 7).unwrap();
            let e = w.as_vector().dot(&mean);
            assert!((e - theta * w.bias_weight()).abs() < 1e-12);
        }
    }

    #[test]
    fn n2_watterson_variance_is_geometric() {
        let sm = SfsModel::new(2, 1.0).unwrap();
        let w = classical_coefficients("watterson", 2).unwrap();
        assert!((estimator_variance(&sm, &w).unwrap() - 2.0).abs() < 1e-12);
        let sm = sm.with_theta(3.0).unwrap();
        assert!((estimator_variance(&sm, &w).unwrap() - 12.0).abs() < 1e-11);
    }

    #[test]
    fn blue_small_theta_is_watterson() {
        let sm = SfsModel::new(10, 1e-6).unwrap();
        let blue = blue_coefficients(&sm).unwrap();
        let w = classical_coefficients("watterson", 10).unwrap();
        for (a, b) in blue.c.iter().zip(&w.c) {
            assert!((a - b).abs() < 1e-4);
        }
        assert!((blue.bias_weight() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn blue_is_locally_optimal() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (n, theta) in [(4, 1.0), (7, 0.3), (10, 5.0)] {
            let sm = SfsModel::new(n, theta).unwrap();
            let lambda = sm.covariance();
            let c = blue_coefficients(&sm).unwrap().as_vector();
            let v = unbiasedness_vector(n);
            let base = c.dot(&(&lambda * &c));
            for _ in 0..100 {
                let mut d = RealVector::from_fn(n - 1, |_, _| rng.random_range(-1.0..1.0));
                d -= &v * (d.dot(&v) / v.dot(&v));
                let p = &c + d * 1e-3;
                assert!(p.dot(&(&lambda * &p)) >= base);
            }
        }
    }

    #[test]
    fn blue_differs_from_classical_at_large_theta() {
        let sm = SfsModel::new(10, 10.0).unwrap();
        let blue = blue_coefficients(&sm).unwrap();
        for kind in EstimatorKind::ESTIMATORS {
            let w = classical_coefficients(kind.name(), 10).unwrap();
            let gap = blue.c.iter().zip(&w.c).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(gap > 0.01, "{kind}: {gap}");
        }
    }

    #[test]
    fn blue_variance_is_minimal() {
        let base = SfsModel::new(10, 1.0).unwrap();
        for k in 0..=10 {
            let theta = 0.1 * 100f64.powf(k as f64 / 10.0);
            let sm = base.with_theta(theta).unwrap();
            let blue = estimator_variance(&sm, &blue_coefficients(&sm).unwrap()).unwrap();
            for kind in EstimatorKind::ESTIMATORS {
                let var = estimator_variance(&sm, &classical_coefficients(kind.name(), 10).unwrap()).unwrap();
                assert!(blue <= var * (1.0 + 1e-12), "{kind} theta={theta}");
            }
        }
    }

    #[test]
    fn report_flags() {
        let sm = SfsModel::new(5, 1.0).unwrap();
        let r = report(&sm, &classical_coefficients("L", 5).unwrap()).unwrap();
        assert!(r.unbiased && r.variance > 0.0);
        let r = report(&sm, &classical_coefficients("taj_D", 5).unwrap()).unwrap();
        assert!(!r.unbiased);
        assert!(report(&sm, &WeightedStatistic::new(vec![1.0], "x").unwrap()).is_err());
    }
}
