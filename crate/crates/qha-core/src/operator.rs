//! Dense operators on `C^L`, time-frequency shifts and discrete measures.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{QhaError, Result};
use crate::phase::{PhasePoint, PhaseSpace};
use crate::signal::Signal;

pub const HERMITIAN_TOL: f64 = 1e-10;
pub const POSITIVITY_TOL: f64 = 1e-10;

/// `exp(2 pi i num / L)`.
#[inline]
pub fn unit_phase(space: &PhaseSpace, num: i64) -> C64 {
    let theta = 2.0 * std::f64::consts::PI * num as f64 / space.len() as f64;
    C64::from_polar(1.0, theta)
}

/// Dense `L x L` complex matrix standing in for a Schatten-class operator.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    pub mat: DMatrix<C64>,
}

impl OperatorMatrix {
    pub fn new(mat: DMatrix<C64>) -> Self {
        assert_eq!(mat.nrows(), mat.ncols(), "operator matrix must be square");
        OperatorMatrix { mat }
    }

    pub fn zeros(space: &PhaseSpace) -> Self {
        OperatorMatrix {
            mat: DMatrix::zeros(space.len(), space.len()),
        }
    }

    pub fn identity(space: &PhaseSpace) -> Self {
        OperatorMatrix {
            mat: DMatrix::identity(space.len(), space.len()),
        }
    }

    /// Rank-one operator `psi (x) phi`, acting as `f -> <f, phi> psi`.
    pub fn outer(psi: &Signal, phi: &Signal) -> Self {
        let n = psi.len();
        assert_eq!(n, phi.len());
        let mat = DMatrix::from_fn(n, n, |i, j| psi.values[i] * phi.values[j].conj());
        OperatorMatrix { mat }
    }

    pub fn from_diagonal_reals(space: &PhaseSpace, diag: &[f64]) -> Self {
        assert_eq!(diag.len(), space.len());
        let mat = DMatrix::from_fn(space.len(), space.len(), |i, j| {
            if i == j {
                C64::new(diag[i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        OperatorMatrix { mat }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn check_dim(&self, other: &OperatorMatrix) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(QhaError::DimensionMismatch(self.dim(), other.dim()));
        }
        Ok(())
    }

    pub fn check_space(&self, space: &PhaseSpace) -> Result<()> {
        if self.dim() != space.len() {
            return Err(QhaError::DimensionMismatch(self.dim(), space.len()));
        }
        Ok(())
    }

    pub fn adjoint(&self) -> Self {
        OperatorMatrix {
            mat: self.mat.adjoint(),
        }
    }

    pub fn conjugate(&self) -> Self {
        OperatorMatrix {
            mat: self.mat.map(|c| c.conj()),
        }
    }

    pub fn trace(&self) -> C64 {
        self.mat.trace()
    }

    /// Max-entry deviation of `A - A*`.
    pub fn hermitian_residual(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                let d = (self.mat[(i, j)] - self.mat[(j, i)].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_residual() <= tol
    }

    pub fn require_hermitian(&self) -> Result<()> {
        let r = self.hermitian_residual();
        if r > HERMITIAN_TOL {
            return Err(QhaError::NotHermitian(r));
        }
        Ok(())
    }

    /// Max entry modulus.
    pub fn max_norm(&self) -> f64 {
        self.mat.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.mat.norm()
    }

    pub fn scale(&self, c: C64) -> Self {
        OperatorMatrix {
            mat: &self.mat * c,
        }
    }

    pub fn apply(&self, psi: &Signal) -> Signal {
        Signal::new(&self.mat * &psi.values)
    }
}

impl Add for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn add(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        OperatorMatrix {
            mat: &self.mat + &rhs.mat,
        }
    }
}

impl Sub for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn sub(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        OperatorMatrix {
            mat: &self.mat - &rhs.mat,
        }
    }
}

impl Mul for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        OperatorMatrix {
            mat: &self.mat * &rhs.mat,
        }
    }
}

/// Time-frequency shift `(pi(k,l) psi)[n] = exp(2 pi i l n / L) psi[(n-k) mod L]`.
pub fn tf_shift(space: &PhaseSpace, z: &PhasePoint) -> OperatorMatrix {
    let n = space.len();
    let mut mat = DMatrix::zeros(n, n);
    for row in 0..n {
        let col = (row + n - z.k % n) % n;
        mat[(row, col)] = unit_phase(space, (z.l * row) as i64);
    }
    OperatorMatrix { mat }
}

/// Adjoint shift `pi(z)^*`; equals `exp(-2 pi i k l / L) pi(-z)`.
pub fn adjoint_shift(space: &PhaseSpace, z: &PhasePoint) -> OperatorMatrix {
    tf_shift(space, z).adjoint()
}

/// Apply `pi(z)` to a signal without forming the matrix.
pub fn shift_signal(space: &PhaseSpace, z: &PhasePoint, psi: &Signal) -> Signal {
    let n = space.len();
    let mut out = Signal::zeros(space);
    for row in 0..n {
        let col = (row + n - z.k % n) % n;
        out.values[row] = unit_phase(space, (z.l * row) as i64) * psi.values[col];
    }
    out
}

/// Apply `pi(z)^*` to a signal: `(pi(z)^* psi)[n] = exp(-2 pi i l (n+k) / L) psi[(n+k) mod L]`.
pub fn adjoint_shift_signal(space: &PhaseSpace, z: &PhasePoint, psi: &Signal) -> Signal {
    let n = space.len();
    let mut out = Signal::zeros(space);
    for row in 0..n {
        let src = (row + z.k) % n;
        out.values[row] = unit_phase(space, -((z.l * src) as i64)) * psi.values[src];
    }
    out
}

/// Conjugation `alpha_z(A) = pi(z) A pi(z)^*` in `O(L^2)`:
/// `alpha_z(A)[m,n] = exp(2 pi i l (m-n)/L) A[(m-k) mod L, (n-k) mod L]`.
pub fn conjugate_by_shift(space: &PhaseSpace, z: &PhasePoint, a: &OperatorMatrix) -> OperatorMatrix {
    let n = space.len();
    let mut mat = DMatrix::zeros(n, n);
    for m in 0..n {
        let pm = unit_phase(space, (z.l * m) as i64);
        let sm = (m + n - z.k % n) % n;
        for c in 0..n {
            let pc = unit_phase(space, -((z.l * c) as i64));
            let sc = (c + n - z.k % n) % n;
            mat[(m, c)] = pm * pc * a.mat[(sm, sc)];
        }
    }
    OperatorMatrix { mat }
}

/// Parity conjugation `P A P` with `(P psi)[n] = psi[(-n) mod L]`.
pub fn parity_conjugate(space: &PhaseSpace, a: &OperatorMatrix) -> OperatorMatrix {
    let n = space.len();
    let mat = DMatrix::from_fn(n, n, |i, j| a.mat[((n - i) % n, (n - j) % n)]);
    OperatorMatrix { mat }
}

/// Finite weighted sum of point masses on phase space.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DiscreteMeasure {
    pub atoms: BTreeMap<PhasePoint, C64>,
}

impl DiscreteMeasure {
    pub fn new() -> Self {
        DiscreteMeasure {
            atoms: BTreeMap::new(),
        }
    }

    pub fn delta(z: PhasePoint) -> Self {
        let mut atoms = BTreeMap::new();
        atoms.insert(z, C64::new(1.0, 0.0));
        DiscreteMeasure { atoms }
    }

    pub fn from_atoms(atoms: impl IntoIterator<Item = (PhasePoint, C64)>) -> Self {
        let mut m = DiscreteMeasure::new();
        for (z, w) in atoms {
            m.add_atom(z, w);
        }
        m
    }

    /// Uniform measure with the given weight on each point.
    pub fn uniform(points: &[PhasePoint], weight: f64) -> Self {
        DiscreteMeasure::from_atoms(
            points
                .iter()
                .map(|z| (*z, C64::new(weight, 0.0)))
                .collect::<Vec<_>>(),
        )
    }

    pub fn add_atom(&mut self, z: PhasePoint, w: C64) {
        *self.atoms.entry(z).or_insert(C64::new(0.0, 0.0)) += w;
    }

    /// Total-variation norm `sum |w|`.
    pub fn total_variation(&self) -> f64 {
        self.atoms.values().map(|w| w.norm()).sum()
    }

    /// Total mass `sum w` (the measure of the whole space).
    pub fn total_mass(&self) -> C64 {
        self.atoms.values().sum()
    }

    pub fn is_positive(&self, tol: f64) -> bool {
        self.atoms
            .values()
            .all(|w| w.im.abs() <= tol && w.re >= -tol)
    }

    /// Reflected measure `mu-check`: the atom at `z` moves to `-z mod L`.
    pub fn check(&self, space: &PhaseSpace) -> Self {
        DiscreteMeasure::from_atoms(self.atoms.iter().map(|(z, w)| (z.neg(space), *w)))
    }

    /// Entrywise complex conjugate of the weights.
    pub fn conj(&self) -> Self {
        DiscreteMeasure::from_atoms(self.atoms.iter().map(|(z, w)| (*z, w.conj())))
    }

    /// Cyclic convolution of finite measures on `Z_L x Z_L`.
    pub fn convolve(&self, other: &DiscreteMeasure, space: &PhaseSpace) -> Self {
        let mut out = DiscreteMeasure::new();
        for (y, wy) in &self.atoms {
            for (yp, wyp) in &other.atoms {
                out.add_atom(y.add(space, yp), wy * wyp);
            }
        }
        out
    }

    pub fn scale(&self, c: C64) -> Self {
        DiscreteMeasure::from_atoms(self.atoms.iter().map(|(z, w)| (*z, w * c)))
    }
}

/// Reflection of a measure; free function mirror of [`DiscreteMeasure::check`].
pub fn measure_check(space: &PhaseSpace, mu: &DiscreteMeasure) -> DiscreteMeasure {
    mu.check(space)
}
