//! Dense spectral kernel: Hermitian eigendecomposition, Schatten norms,
//! matrix functions and the inverse square root of positive operators.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{QhaError, Result};
use crate::operator::OperatorMatrix;

/// Ascending eigenvalues and orthonormal eigenvectors of a Hermitian operator.
#[derive(Debug, Clone)]
pub struct SpectralData {
    pub eigenvalues: Vec<f64>,
    /// Column `i` is the eigenvector for `eigenvalues[i]`.
    pub eigenvectors: DMatrix<C64>,
}

impl SpectralData {
    pub fn min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max(&self) -> f64 {
        *self.eigenvalues.last().unwrap()
    }

    /// Rebuild `V diag(f(lambda)) V*`.
    pub fn assemble(&self, f: impl Fn(f64) -> f64) -> OperatorMatrix {
        self.assemble_values(&self.eigenvalues.iter().map(|&t| f(t)).collect::<Vec<_>>())
    }

    /// Rebuild `V diag(values) V*` from explicit diagonal values.
    pub fn assemble_values(&self, values: &[f64]) -> OperatorMatrix {
        let d = DVector::from_iterator(values.len(), values.iter().map(|&t| C64::new(t, 0.0)));
        let m = &self.eigenvectors * DMatrix::from_diagonal(&d) * self.eigenvectors.adjoint();
        OperatorMatrix::new(m)
    }
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
///
/// The input is symmetrized as `(A + A*)/2` before factorization; inputs with
/// Hermitian residual above `1e-10` are rejected.
pub fn hermitian_eig(a: &OperatorMatrix) -> Result<SpectralData> {
    a.require_hermitian()?;
    let n = a.dim();
    let sym = (&a.mat + a.mat.adjoint()).scale(0.5);
    let se = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| se.eigenvalues[i].partial_cmp(&se.eigenvalues[j]).unwrap());
    let eigenvalues: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut eigenvectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        eigenvectors.set_column(dst, &se.eigenvectors.column(src));
    }
    Ok(SpectralData {
        eigenvalues,
        eigenvectors,
    })
}

/// Minimum eigenvalue of a Hermitian operator.
pub fn min_eigenvalue(a: &OperatorMatrix) -> Result<f64> {
    Ok(hermitian_eig(a)?.min())
}

/// Checks Hermiticity within `1e-10` and min eigenvalue `>= -1e-10`.
pub fn require_positive(a: &OperatorMatrix) -> Result<()> {
    let min = min_eigenvalue(a)?;
    if min < -crate::operator::POSITIVITY_TOL {
        return Err(QhaError::NotPositive(min));
    }
    Ok(())
}

/// Singular values of a dense matrix, descending.
pub fn singular_values(a: &OperatorMatrix) -> Vec<f64> {
    let svd = a.mat.clone().svd(false, false);
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(|x, y| y.partial_cmp(x).unwrap());
    s
}

/// Schatten norm `||A||_{S^p} = (sum s_k^p)^{1/p}`, with `p = inf` giving the
/// largest singular value.
pub fn schatten_norm(a: &OperatorMatrix, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(QhaError::InvalidExponent(p));
    }
    let s = singular_values(a);
    if p.is_infinite() {
        return Ok(s.first().copied().unwrap_or(0.0));
    }
    Ok(s.iter().map(|x| x.powf(p)).sum::<f64>().powf(1.0 / p))
}

pub fn trace_norm(a: &OperatorMatrix) -> f64 {
    schatten_norm(a, 1.0).unwrap()
}

/// Scalar maps supported by [`matrix_function`].
#[derive(Debug, Clone, PartialEq)]
pub enum ScalarMap {
    /// `t -> t^p`; for non-integer `p` the spectrum must be non-negative.
    Power(f64),
    Exp,
    /// Coefficients in ascending degree order.
    Polynomial(Vec<f64>),
    /// The plateau step `H(t) = -t` on `[0, 1-delta]`, `1-t` on `(1-delta, 1]`;
    /// eigenvalues are clamped into `[0,1]` by at most `1e-10`.
    PlateauH { delta: f64 },
}

impl ScalarMap {
    pub fn identity() -> Self {
        ScalarMap::Power(1.0)
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        match self {
            ScalarMap::Power(p) => {
                if p.fract() == 0.0 && *p >= 0.0 {
                    Ok(t.powi(*p as i32))
                } else if t >= -1e-12 {
                    Ok(t.max(0.0).powf(*p))
                } else {
                    Err(QhaError::DomainError(t))
                }
            }
            ScalarMap::Exp => Ok(t.exp()),
            ScalarMap::Polynomial(coeffs) => {
                Ok(coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c))
            }
            ScalarMap::PlateauH { delta } => {
                if !(0.0..=1.0).contains(delta) {
                    return Err(QhaError::BadDelta(*delta));
                }
                if !(-1e-10..=1.0 + 1e-10).contains(&t) {
                    return Err(QhaError::DomainError(t));
                }
                let t = t.clamp(0.0, 1.0);
                if t <= 1.0 - delta {
                    Ok(-t)
                } else {
                    Ok(1.0 - t)
                }
            }
        }
    }
}

/// Applies a scalar map to a Hermitian operator through its eigenbasis.
pub fn matrix_function(a: &OperatorMatrix, map: &ScalarMap) -> Result<OperatorMatrix> {
    let spec = hermitian_eig(a)?;
    let mapped: Result<Vec<f64>> = spec.eigenvalues.iter().map(|&t| map.eval(t)).collect();
    Ok(spec.assemble_values(&mapped?))
}

/// Inverse square root of a positive definite Hermitian operator.
///
/// Requires the smallest eigenvalue to exceed `1e-10`; returns `B` with
/// `B A B = I` up to `1e-8`.
pub fn inv_sqrt_psd(a: &OperatorMatrix) -> Result<OperatorMatrix> {
    const EPS_REG: f64 = 1e-10;
    let spec = hermitian_eig(a)?;
    if spec.min() <= EPS_REG {
        return Err(QhaError::SingularFrame(spec.min()));
    }
    Ok(spec.assemble(|t| 1.0 / t.sqrt()))
}
