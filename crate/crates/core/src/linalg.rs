//! Dense real and complex kernels: factor-and-solve, matrix exponential,
//! powers, and the derivative-of-inverse identity.

use nalgebra::{ComplexField, DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type RealMatrix = DMatrix<f64>;
pub type RealVector = DVector<f64>;
pub type ComplexMatrix = DMatrix<Complex64>;
pub type ComplexVector = DVector<Complex64>;

/// Pivots smaller than this fraction of the largest entry are treated as zero.
pub const SINGULAR_TOLERANCE: f64 = 1e-12;

/// An LU factorization with partial pivoting that has passed the singularity check.
pub struct Factorized<T: ComplexField<RealField = f64>> {
    lu: nalgebra::linalg::LU<T, nalgebra::Dyn, nalgebra::Dyn>,
}

impl<T: ComplexField<RealField = f64>> Factorized<T> {
    pub fn new(a: &DMatrix<T>) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::InvalidArgument(format!(
                "cannot factor a {}x{} matrix",
                a.nrows(),
                a.ncols()
            )));
        }
        let scale = a.iter().map(|x| x.clone().modulus()).fold(0.0, f64::max);
        let lu = a.clone().lu();
        let u = lu.u();
        let pivot = (0..u.nrows())
            .map(|i| u[(i, i)].clone().modulus())
            .fold(f64::INFINITY, f64::min);
        if !(scale > 0.0) || !(pivot > SINGULAR_TOLERANCE * scale) {
            return Err(Error::SingularMatrix { pivot, scale });
        }
        Ok(Self { lu })
    }

    pub fn solve(&self, b: &DMatrix<T>) -> DMatrix<T> {
        self.lu.solve(b).expect("pivots checked at factorization")
    }

    pub fn solve_vec(&self, b: &DVector<T>) -> DVector<T> {
        self.lu.solve(b).expect("pivots checked at factorization")
    }

    /// Solves `x A = b` for a row vector `x`, given as a column.
    pub fn solve_left(&self, b: &DVector<T>) -> DVector<T> {
        // x A = b  <=>  A^T x^T = b^T; the factor of A^T is not stored, so go
        // through the transpose solve on the LU factors.
        let mut x = b.clone();
        let ok = self.lu_transpose_solve(&mut x);
        debug_assert!(ok);
        x
    }

    fn lu_transpose_solve(&self, x: &mut DVector<T>) -> bool {
        // A = P^T L U  =>  A^T = U^T L^T P, so A^T y = b  =>  U^T w = b,
        // L^T v = w, y = P^T v.
        let l = self.lu.l();
        let u = self.lu.u();
        let ok = u.tr_solve_upper_triangular_mut(x) && l.tr_solve_lower_triangular_mut(x);
        self.lu.p().inv_permute_rows(x);
        ok
    }
}

/// Solves `A X = B`.
pub fn solve<T: ComplexField<RealField = f64>>(a: &DMatrix<T>, b: &DMatrix<T>) -> Result<DMatrix<T>> {
    Ok(Factorized::new(a)?.solve(b))
}

/// Solves `A x = b` for a vector right-hand side.
pub fn solve_vec<T: ComplexField<RealField = f64>>(a: &DMatrix<T>, b: &DVector<T>) -> Result<DVector<T>> {
    Ok(Factorized::new(a)?.solve_vec(b))
}

/// Explicit inverse. Only used where the inverse itself is reused many times.
pub fn inverse(a: &RealMatrix) -> Result<RealMatrix> {
    let n = a.nrows();
    solve(a, &RealMatrix::identity(n, n))
}

/// `e^{S t}`.
pub fn matrix_exponential(s: &RealMatrix, t: f64) -> RealMatrix {
    (s * t).exp()
}

/// `A^k` by repeated squaring.
pub fn matrix_power(a: &RealMatrix, mut k: u32) -> RealMatrix {
    let n = a.nrows();
    let mut result = RealMatrix::identity(n, n);
    let mut base = a.clone();
    while k > 0 {
        if k & 1 == 1 {
            result = &result * &base;
        }
        k >>= 1;
        if k > 0 {
            base = &base * &base;
        }
    }
    result
}

pub fn diag(v: &RealVector) -> RealMatrix {
    RealMatrix::from_diagonal(v)
}

pub fn to_complex(a: &RealMatrix) -> ComplexMatrix {
    a.map(|x| Complex64::new(x, 0.0))
}

/// Derivative of `(V + U(z))^{-1}` at `z`, computed as
/// `-(V + U(z))^{-1} U'(z) (V + U(z))^{-1}`.
pub fn resolvent_derivative<F, G>(v: &RealMatrix, u: F, du: G, z: f64) -> Result<RealMatrix>
where
    F: Fn(f64) -> RealMatrix,
    G: Fn(f64) -> RealMatrix,
{
    let sum = v + u(z);
    let f = Factorized::new(&sum)?;
    let n = sum.nrows();
    let inv = f.solve(&RealMatrix::identity(n, n));
    Ok(-(&inv * du(z) * &inv))
}

/// Largest eigenvalue modulus of a nonnegative matrix, by power iteration on
/// `|A|` started from the all-ones vector.
pub fn spectral_radius(a: &RealMatrix) -> f64 {
    let n = a.nrows();
    if n == 0 {
        return 0.0;
    }
    let abs = a.abs();
    let mut x = RealVector::from_element(n, 1.0);
    let mut estimate = 0.0;
    for _ in 0..10_000 {
        let y = &abs * &x;
        let norm = y.amax();
        if norm == 0.0 {
            return 0.0;
        }
        let next = y / norm;
        // ratio of successive iterates in the max norm
        let ratio = (&abs * &next).amax();
        let converged = (ratio - estimate).abs() <= 1e-12 * ratio.max(1.0);
        estimate = ratio;
        x = next;
        if converged {
            break;
        }
    }
    // nilpotent parts (strictly triangular) make power iteration collapse
    // toward zero rather than converge, which still bounds the radius.
    estimate
}
