//! Short-time Fourier transform, spectrograms and Cohen's-class
//! distributions on the `L x L` phase grid.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rustfft::FftPlanner;

use crate::error::{QhaError, Result};
use crate::operator::{adjoint_shift_signal, OperatorMatrix};
use crate::phase::{PhasePoint, PhaseSpace};
use crate::signal::Signal;

/// Tolerance below which a grid's imaginary parts count as zero.
pub const GRID_REAL_TOL: f64 = 1e-12;

/// Dense complex function on phase space: entry `(k, l)` lives at row `k`,
/// column `l`. Grids flagged `real` must have imaginary parts below `1e-12`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseGrid {
    pub values: DMatrix<C64>,
    pub real: bool,
}

impl PhaseGrid {
    pub fn new(values: DMatrix<C64>) -> Self {
        assert_eq!(values.nrows(), values.ncols(), "phase grid must be L x L");
        PhaseGrid {
            values,
            real: false,
        }
    }

    pub fn zeros(space: &PhaseSpace) -> Self {
        PhaseGrid {
            values: DMatrix::zeros(space.len(), space.len()),
            real: false,
        }
    }

    pub fn constant(space: &PhaseSpace, c: C64) -> Self {
        let l = space.len();
        PhaseGrid {
            values: DMatrix::from_element(l, l, c),
            real: c.im == 0.0,
        }
    }

    pub fn from_fn(space: &PhaseSpace, mut f: impl FnMut(&PhasePoint) -> C64) -> Self {
        let l = space.len();
        PhaseGrid {
            values: DMatrix::from_fn(l, l, |k, fq| f(&PhasePoint { k, l: fq })),
            real: false,
        }
    }

    /// Real-valued grid from a real function; sets the real flag.
    pub fn from_real_fn(space: &PhaseSpace, mut f: impl FnMut(&PhasePoint) -> f64) -> Self {
        let l = space.len();
        PhaseGrid {
            values: DMatrix::from_fn(l, l, |k, fq| C64::new(f(&PhasePoint { k, l: fq }), 0.0)),
            real: true,
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.nrows()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn entry(&self, z: &PhasePoint) -> C64 {
        self.values[(z.k, z.l)]
    }

    #[inline]
    pub fn set(&mut self, z: &PhasePoint, v: C64) {
        self.values[(z.k, z.l)] = v;
    }

    pub fn check_space(&self, space: &PhaseSpace) -> Result<()> {
        if self.len() != space.len() {
            return Err(QhaError::DimensionMismatch(self.len(), space.len()));
        }
        Ok(())
    }

    /// Largest imaginary part in modulus.
    pub fn imag_residual(&self) -> f64 {
        self.values.iter().map(|c| c.im.abs()).fold(0.0, f64::max)
    }

    /// Flags the grid as real after checking its imaginary parts.
    pub fn into_real(mut self) -> Result<Self> {
        let r = self.imag_residual();
        if r > GRID_REAL_TOL {
            return Err(QhaError::Format(format!(
                "grid is not real (max imaginary part {r:.3e})"
            )));
        }
        self.real = true;
        Ok(self)
    }

    pub fn sum(&self) -> C64 {
        self.values.iter().sum()
    }

    pub fn min_real(&self) -> f64 {
        self.values.iter().map(|c| c.re).fold(f64::INFINITY, f64::min)
    }

    pub fn max_norm(&self) -> f64 {
        self.values.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &PhaseGrid) -> f64 {
        (&self.values - &other.values)
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }

    pub fn scale(&self, c: C64) -> PhaseGrid {
        PhaseGrid {
            values: &self.values * c,
            real: self.real && c.im == 0.0,
        }
    }

    /// Entrywise product.
    pub fn hadamard(&self, other: &PhaseGrid) -> PhaseGrid {
        PhaseGrid {
            values: self.values.component_mul(&other.values),
            real: self.real && other.real,
        }
    }

    /// Cyclic translation by `w`: output at `z` is input at `z - w`.
    pub fn translate(&self, space: &PhaseSpace, w: &PhasePoint) -> PhaseGrid {
        let l = space.len();
        PhaseGrid {
            values: DMatrix::from_fn(l, l, |k, fq| {
                self.values[((k + l - w.k % l) % l, (fq + l - w.l % l) % l)]
            }),
            real: self.real,
        }
    }
}

/// Short-time Fourier transform `V_phi psi(k, l) = <psi, pi(k,l) phi>`,
/// computed with a length-`L` FFT per time column `k`.
pub fn stft(psi: &Signal, phi: &Signal) -> Result<PhaseGrid> {
    psi.check_len(phi)?;
    let l = psi.len();
    let space = PhaseSpace::new(l);
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(l);
    let mut out = PhaseGrid::zeros(&space);
    let mut buf = vec![C64::new(0.0, 0.0); l];
    for k in 0..l {
        for (n, slot) in buf.iter_mut().enumerate() {
            *slot = psi.values[n] * phi.values[(n + l - k % l) % l].conj();
        }
        // forward DFT: out[f] = sum_n buf[n] exp(-2 pi i f n / L)
        fft.process(&mut buf);
        for (f, v) in buf.iter().enumerate() {
            out.values[(k, f)] = *v;
        }
    }
    Ok(out)
}

/// Naive `O(L^3)` STFT, retained as the oracle for the FFT path.
pub fn stft_naive(psi: &Signal, phi: &Signal) -> Result<PhaseGrid> {
    psi.check_len(phi)?;
    let space = PhaseSpace::new(psi.len());
    Ok(PhaseGrid::from_fn(&space, |z| {
        psi.inner(&crate::operator::shift_signal(&space, z, phi))
    }))
}

/// Spectrogram `|V_phi psi|^2`; real and non-negative.
pub fn spectrogram(psi: &Signal, phi: &Signal) -> Result<PhaseGrid> {
    let v = stft(psi, phi)?;
    Ok(PhaseGrid {
        values: v.values.map(|c| C64::new(c.norm_sqr(), 0.0)),
        real: true,
    })
}

/// Cohen's-class distribution `Q_S(psi)(z) = <S pi(z)* psi, pi(z)* psi>`.
///
/// Real-valued for Hermitian `S`, non-negative for positive `S`.
pub fn cohen_q(s: &OperatorMatrix, psi: &Signal) -> Result<PhaseGrid> {
    let grid = cohen_q_cross(s, psi, psi)?;
    if s.is_hermitian(crate::operator::HERMITIAN_TOL) {
        grid.into_real()
    } else {
        Ok(grid)
    }
}

/// Cross Cohen's-class form `Q_S(psi, phi)(z) = <S pi(z)* psi, pi(z)* phi>`.
pub fn cohen_q_cross(s: &OperatorMatrix, psi: &Signal, phi: &Signal) -> Result<PhaseGrid> {
    psi.check_len(phi)?;
    let space = PhaseSpace::new(psi.len());
    s.check_space(&space)?;
    let mut out = PhaseGrid::zeros(&space);
    for z in space.points() {
        let a = adjoint_shift_signal(&space, &z, psi);
        let b = adjoint_shift_signal(&space, &z, phi);
        out.set(&z, s.apply(&a).inner(&b));
    }
    Ok(out)
}
