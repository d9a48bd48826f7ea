//! Mixed-state Gabor frames over rectangular lattices: frame operators,
//! frame bounds, canonical tightening and multi-window constructions.

use num_complex::Complex64 as C64;

use crate::error::{QhaError, Result};
use crate::operator::{
    conjugate_by_shift, parity_conjugate, DiscreteMeasure, OperatorMatrix,
};
use crate::phase::{LatticeSpec, PhaseSpace, RegionSpec};
use crate::signal::Signal;
use crate::spectral::{hermitian_eig, inv_sqrt_psd, require_positive};

/// Tightness threshold on `B/A - 1`.
pub const TIGHTNESS_TOL: f64 = 1e-8;
/// Lower bounds at or below this are reported as not-a-frame.
pub const FRAME_FLOOR: f64 = 1e-12;

/// Frame bounds of a mixed-state Gabor system `(S, Lambda)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameReport {
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub tightness_ratio: f64,
    pub is_tight: bool,
    /// The frame constant when the frame is tight (`None` otherwise).
    pub frame_constant: Option<f64>,
}

/// Frame operator `F = sum_{lambda in Lambda} pi(lambda) S pi(lambda)^*`.
///
/// Lattice points are summed in lattice order, so the result is
/// bit-deterministic.
pub fn frame_operator(
    space: &PhaseSpace,
    s: &OperatorMatrix,
    lattice: &LatticeSpec,
) -> Result<OperatorMatrix> {
    s.check_space(space)?;
    require_positive(s)?;
    let mut f = OperatorMatrix::zeros(space);
    for lambda in lattice.points(space) {
        f = &f + &conjugate_by_shift(space, &lambda, s);
    }
    Ok(f)
}

/// Frame bounds `A, B` as the extreme eigenvalues of the frame operator.
///
/// The spectrum is computed both for `F_S` and for `F_{S-check}`; parity
/// conjugation makes them equal, and the cross-deviation is asserted below
/// `1e-10` as a consistency check.
pub fn frame_bounds(
    space: &PhaseSpace,
    s: &OperatorMatrix,
    lattice: &LatticeSpec,
) -> Result<FrameReport> {
    let f_s = frame_operator(space, s, lattice)?;
    let f_sc = frame_operator(space, &parity_conjugate(space, s), lattice)?;
    let spec_s = hermitian_eig(&f_s)?;
    let spec_sc = hermitian_eig(&f_sc)?;
    let cross = spec_s
        .eigenvalues
        .iter()
        .zip(spec_sc.eigenvalues.iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    assert!(
        cross < 1e-10,
        "frame spectra of S and S-check disagree by {cross:.3e}"
    );
    let a = spec_sc.min();
    let b = spec_sc.max();
    if a <= FRAME_FLOOR {
        return Err(QhaError::NotAFrame(a));
    }
    let ratio = b / a;
    let is_tight = ratio - 1.0 < TIGHTNESS_TOL;
    Ok(FrameReport {
        lower_bound: a,
        upper_bound: b,
        tightness_ratio: ratio,
        is_tight,
        frame_constant: is_tight.then_some(a),
    })
}

/// Canonical tightening `S' = F^{-1/2} S F^{-1/2}` with `F` the frame
/// operator of `(S, Lambda)`.
///
/// `F` commutes with the lattice shifts, so `(S', Lambda)` is tight with
/// constant 1; `S'` is then a density operator with respect to `Lambda`.
pub fn tighten(
    space: &PhaseSpace,
    s: &OperatorMatrix,
    lattice: &LatticeSpec,
) -> Result<OperatorMatrix> {
    let f = frame_operator(space, s, lattice)?;
    let r = inv_sqrt_psd(&f)?;
    Ok(&(&r * s) * &r)
}

/// Mixed-state window `S = sum_n w_n (phi_n (x) phi_n)`; positive Hermitian.
pub fn mixed_state_from_windows(
    weights: &[f64],
    windows: &[Signal],
) -> Result<OperatorMatrix> {
    if weights.len() != windows.len() {
        return Err(QhaError::LengthMismatch(weights.len(), windows.len()));
    }
    assert!(!windows.is_empty(), "need at least one window");
    for &w in weights {
        if w < 0.0 {
            return Err(QhaError::NegativeWeight(w));
        }
    }
    let space = PhaseSpace::new(windows[0].len());
    let mut s = OperatorMatrix::zeros(&space);
    for (w, phi) in weights.iter().zip(windows) {
        phi.check_len(&windows[0])?;
        s = &s + &OperatorMatrix::outer(phi, phi).scale(C64::new(*w, 0.0));
    }
    Ok(s)
}

/// Augmented data operator: convolution of the uniform probability measure
/// on the region's grid points with `S_D`. Trace-preserving.
pub fn augment_data_operator(
    space: &PhaseSpace,
    s_d: &OperatorMatrix,
    region: &RegionSpec,
) -> Result<OperatorMatrix> {
    region.validate(space)?;
    let points = region.grid_points(space);
    if points.is_empty() {
        return Err(QhaError::EmptyRegion);
    }
    let mu = DiscreteMeasure::uniform(&points, 1.0 / points.len() as f64);
    crate::conv::measure_op_conv(space, &mu, s_d)
}

/// Frame bounds of `(mu_c-check * S, Lambda)` for non-negative weights `c`
/// listed in lattice order. The bounds scale exactly by `sum c`.
pub fn frame_transform_under_convolution(
    space: &PhaseSpace,
    s: &OperatorMatrix,
    lattice: &LatticeSpec,
    c: &[f64],
) -> Result<FrameReport> {
    let points = lattice.points(space);
    if c.len() != points.len() {
        return Err(QhaError::LengthMismatch(c.len(), points.len()));
    }
    for &w in c {
        if w < 0.0 {
            return Err(QhaError::NegativeWeight(w));
        }
    }
    let mu = DiscreteMeasure::from_atoms(
        points
            .iter()
            .zip(c)
            .map(|(z, &w)| (*z, C64::new(w, 0.0))),
    );
    let transformed = crate::conv::measure_op_conv(space, &mu.check(space), s)?;
    frame_bounds(space, &transformed, lattice)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conv::op_op_conv;
    use crate::operator::tf_shift;
    use crate::phase::PhasePoint;
    use crate::signal::{gaussian_window, random_signal};
    use crate::spectral::min_eigenvalue;
    use crate::tfa::cohen_q;

    #[test]
    fn full_grid_is_depolarizing() {
        // L = 4 oracle: sum over the full grid gives L tr(S) I
        let sp = PhaseSpace::new(4);
        let phi = random_signal(&sp, 1);
        let s = OperatorMatrix::outer(&phi, &phi).scale(C64::new(0.7, 0.0));
        let lat = LatticeSpec::full(&sp);
        let f = frame_operator(&sp, &s, &lat).unwrap();
        let want = OperatorMatrix::identity(&sp).scale(s.trace() * C64::new(4.0, 0.0));
        assert!((&f - &want).max_norm() < 1e-10);
    }

    #[test]
    fn scaled_identity_window() {
        let sp = PhaseSpace::new(8);
        let lat = LatticeSpec::new(&sp, 2, 2).unwrap();
        let s = OperatorMatrix::identity(&sp).scale(C64::new(1.0 / lat.count(&sp) as f64, 0.0));
        let f = frame_operator(&sp, &s, &lat).unwrap();
        assert!((&f - &OperatorMatrix::identity(&sp)).max_norm() < 1e-12);
        let report = frame_bounds(&sp, &s, &lat).unwrap();
        assert!((report.lower_bound - 1.0).abs() < 1e-12);
        assert!((report.upper_bound - 1.0).abs() < 1e-12);
        assert!(report.is_tight);
    }

    #[test]
    fn full_grid_unit_window_bounds() {
        let sp = PhaseSpace::new(8);
        let phi = gaussian_window(&sp, 1.0);
        let s = OperatorMatrix::outer(&phi, &phi);
        let report = frame_bounds(&sp, &s, &LatticeSpec::full(&sp)).unwrap();
        assert!((report.lower_bound - 8.0).abs() < 1e-10);
        assert!((report.upper_bound - 8.0).abs() < 1e-10);
    }

    #[test]
    fn frame_operator_commutes_with_lattice_shifts() {
        let sp = PhaseSpace::new(12);
        let phi = gaussian_window(&sp, 1.0);
        let s = OperatorMatrix::outer(&phi, &phi);
        let lat = LatticeSpec::new(&sp, 2, 3).unwrap();
        let f = frame_operator(&sp, &s, &lat).unwrap();
        for lambda in lat.points(&sp) {
            let u = tf_shift(&sp, &lambda);
            let comm = &(&f * &u) - &(&u * &f);
            assert!(comm.max_norm() < 1e-10, "lambda = {lambda:?}");
        }
    }

    #[test]
    fn gaussian_half_lattice_is_loose() {
        let sp = PhaseSpace::new(16);
        let phi = gaussian_window(&sp, 1.0);
        let s = OperatorMatrix::outer(&phi, &phi);
        let lat = LatticeSpec::new(&sp, 2, 2).unwrap();
        let report = frame_bounds(&sp, &s, &lat).unwrap();
        assert!(report.upper_bound > report.lower_bound + 1e-6);
        assert!(!report.is_tight);
    }

    #[test]
    fn gaussian_critical_lattice() {
        // critical-like density: a rank-one Gaussian system is either a
        // strictly loose frame or fails the frame condition outright
        let sp = PhaseSpace::new(16);
        let phi = gaussian_window(&sp, 1.0);
        let s = OperatorMatrix::outer(&phi, &phi);
        let lat = LatticeSpec::new(&sp, 4, 4).unwrap();
        match frame_bounds(&sp, &s, &lat) {
            Ok(report) => {
                assert!(report.upper_bound > report.lower_bound + 1e-6);
                assert!(!report.is_tight);
            }
            Err(QhaError::NotAFrame(a)) => assert!(a.abs() < 1e-10),
            Err(e) => panic!("unexpected error: {e}"),
        }
    }

    #[test]
    fn tighten_gives_identity_frame_operator() {
        let sp = PhaseSpace::new(16);
        let phi = gaussian_window(&sp, 1.0);
        let s = OperatorMatrix::outer(&phi, &phi);
        let lat = LatticeSpec::new(&sp, 2, 2).unwrap();
        let t = tighten(&sp, &s, &lat).unwrap();
        let f = frame_operator(&sp, &t, &lat).unwrap();
        assert!((&f - &OperatorMatrix::identity(&sp)).max_norm() < 1e-8);
        assert!(min_eigenvalue(&t).unwrap() >= -1e-10);
        // density operator w.r.t. the lattice: tr(S') = L / |Lambda|
        let want_tr = sp.len() as f64 / lat.count(&sp) as f64;
        assert!((t.trace().re - want_tr).abs() < 1e-8);
    }

    #[test]
    fn tighten_of_tight_frame_divides_constant() {
        let sp = PhaseSpace::new(8);
        let phi = gaussian_window(&sp, 1.0);
        let s = OperatorMatrix::outer(&phi, &phi);
        // full grid is tight with constant L
        let lat = LatticeSpec::full(&sp);
        let t = tighten(&sp, &s, &lat).unwrap();
        let want = s.scale(C64::new(1.0 / 8.0, 0.0));
        assert!((&t - &want).max_norm() < 1e-10);
    }

    #[test]
    fn reconstruction_for_tight_frames() {
        let sp = PhaseSpace::new(16);
        let phi = gaussian_window(&sp, 1.0);
        let s = OperatorMatrix::outer(&phi, &phi);
        let lat = LatticeSpec::new(&sp, 2, 4).unwrap();
        let t = tighten(&sp, &s, &lat).unwrap();
        let f = frame_operator(&sp, &t, &lat).unwrap();
        for seed in 0..10 {
            let psi = random_signal(&sp, 100 + seed);
            let recon = f.apply(&psi);
            let err = (&recon.values - &psi.values).norm();
            assert!(err < 1e-8 * psi.norm());
        }
    }

    #[test]
    fn sum_identity_for_tight_frames() {
        let sp = PhaseSpace::new(8);
        let phi = gaussian_window(&sp, 1.0);
        let s = OperatorMatrix::outer(&phi, &phi);
        let lat = LatticeSpec::new(&sp, 2, 2).unwrap();
        let tight = tighten(&sp, &s, &lat).unwrap();
        let psi = random_signal(&sp, 5);
        let t = OperatorMatrix::outer(&psi, &psi).scale(C64::new(1.3, 0.0));
        let grid = op_op_conv(&sp, &t, &tight).unwrap();
        let total: C64 = lat.points(&sp).iter().map(|z| grid.entry(z)).sum();
        assert!((total - t.trace()).norm() < 1e-8 * t.trace().norm());
    }

    #[test]
    fn frame_bound_sandwich_via_cohen_q() {
        let sp = PhaseSpace::new(12);
        let phi = gaussian_window(&sp, 1.0);
        let s = OperatorMatrix::outer(&phi, &phi);
        let lat = LatticeSpec::new(&sp, 2, 2).unwrap();
        let report = frame_bounds(&sp, &s, &lat).unwrap();
        for seed in 0..10 {
            let psi = random_signal(&sp, 300 + seed);
            let q = cohen_q(&s, &psi).unwrap();
            let total: f64 = lat.points(&sp).iter().map(|z| q.entry(z).re).sum();
            let n2 = psi.norm().powi(2);
            assert!(total >= report.lower_bound * n2 - 1e-8);
            assert!(total <= report.upper_bound * n2 + 1e-8);
        }
    }

    #[test]
    fn mixed_state_window_construction() {
        let sp = PhaseSpace::new(8);
        let phis = [random_signal(&sp, 1), random_signal(&sp, 2), random_signal(&sp, 3)];
        let weights = [0.2, 0.5, 0.3];
        let s = mixed_state_from_windows(&weights, &phis).unwrap();
        s.require_hermitian().unwrap();
        assert!(min_eigenvalue(&s).unwrap() >= -1e-10);
        let want: f64 = weights
            .iter()
            .zip(&phis)
            .map(|(w, p)| w * p.norm().powi(2))
            .sum();
        assert!((s.trace().re - want).abs() < 1e-12);

        assert!(matches!(
            mixed_state_from_windows(&[-0.1], &phis[..1]),
            Err(QhaError::NegativeWeight(_))
        ));
        assert!(mixed_state_from_windows(&[1.0, 2.0], &phis[..1]).is_err());
    }

    #[test]
    fn convex_mix_of_tight_windows_stays_tight() {
        // any unit windows are tight over the full grid with constant L;
        // convex mixtures keep that constant
        let sp = PhaseSpace::new(8);
        let phis = [random_signal(&sp, 7), random_signal(&sp, 8)];
        let s = mixed_state_from_windows(&[0.4, 0.6], &phis).unwrap();
        let report = frame_bounds(&sp, &s, &LatticeSpec::full(&sp)).unwrap();
        assert!(report.is_tight);
        assert!((report.frame_constant.unwrap() - 8.0).abs() < 1e-8);
    }

    #[test]
    fn augment_preserves_trace() {
        let sp = PhaseSpace::new(8);
        let phi = random_signal(&sp, 9);
        let s = OperatorMatrix::outer(&phi, &phi);

        // singleton region at the origin: unchanged
        let single = RegionSpec::Explicit {
            points: vec![PhasePoint::origin()],
        };
        let a = augment_data_operator(&sp, &s, &single).unwrap();
        assert!((&a - &s).max_norm() < 1e-14);

        let disc = RegionSpec::Disc { radius: 2.0 };
        let b = augment_data_operator(&sp, &s, &disc).unwrap();
        assert!((b.trace() - s.trace()).norm() < 1e-10);

        // full grid: depolarizes to tr(S) I / L
        let full = RegionSpec::Explicit {
            points: sp.points().collect(),
        };
        let c = augment_data_operator(&sp, &s, &full).unwrap();
        let want = OperatorMatrix::identity(&sp).scale(s.trace() * C64::new(1.0 / 8.0, 0.0));
        assert!((&c - &want).max_norm() < 1e-10);

        let empty = RegionSpec::Explicit { points: vec![] };
        assert!(matches!(
            augment_data_operator(&sp, &s, &empty),
            Err(QhaError::EmptyRegion)
        ));
    }

    #[test]
    fn convolution_scales_frame_bounds() {
        let sp = PhaseSpace::new(16);
        let phi = gaussian_window(&sp, 1.0);
        let s = OperatorMatrix::outer(&phi, &phi);
        let lat = LatticeSpec::new(&sp, 2, 2).unwrap();
        let base = frame_bounds(&sp, &s, &lat).unwrap();

        // delta at the lattice origin: unchanged
        let mut c = vec![0.0; lat.count(&sp)];
        c[0] = 1.0;
        let same = frame_transform_under_convolution(&sp, &s, &lat, &c).unwrap();
        assert!((same.lower_bound - base.lower_bound).abs() < 1e-8);
        assert!((same.upper_bound - base.upper_bound).abs() < 1e-8);

        // random non-negative weights: bounds scale by sum(c)
        let mut cr = Vec::new();
        for i in 0..lat.count(&sp) {
            cr.push(0.05 + ((i * 7919) % 13) as f64 / 13.0);
        }
        let total: f64 = cr.iter().sum();
        let scaled = frame_transform_under_convolution(&sp, &s, &lat, &cr).unwrap();
        assert!((scaled.lower_bound - total * base.lower_bound).abs() < 1e-8 * total);
        assert!((scaled.upper_bound - total * base.upper_bound).abs() < 1e-8 * total);
    }

    #[test]
    fn tight_frame_constant_doubles() {
        let sp = PhaseSpace::new(8);
        let phi = gaussian_window(&sp, 1.0);
        let lat = LatticeSpec::new(&sp, 2, 2).unwrap();
        let tight = tighten(&sp, &OperatorMatrix::outer(&phi, &phi), &lat).unwrap();
        let c = vec![2.0 / lat.count(&sp) as f64; lat.count(&sp)];
        let report = frame_transform_under_convolution(&sp, &tight, &lat, &c).unwrap();
        assert!(report.is_tight);
        assert!((report.frame_constant.unwrap() - 2.0).abs() < 1e-8);
    }

    #[test]
    fn non_positive_window_rejected() {
        let sp = PhaseSpace::new(4);
        let s = OperatorMatrix::from_diagonal_reals(&sp, &[1.0, -0.5, 0.0, 0.0]);
        assert!(matches!(
            frame_operator(&sp, &s, &LatticeSpec::full(&sp)),
            Err(QhaError::NotPositive(_))
        ));
    }
}
