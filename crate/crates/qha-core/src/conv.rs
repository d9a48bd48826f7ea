//! Measure-operator, function-operator and operator-operator convolutions,
//! the Fourier-Wigner transform and the symplectic discrete Fourier
//! transform, together with the convolution theorem residual.

use num_complex::Complex64 as C64;

use crate::error::Result;
use crate::operator::{
    conjugate_by_shift, parity_conjugate, unit_phase, DiscreteMeasure, OperatorMatrix,
};
use crate::phase::{symplectic_form, PhaseSpace};
use crate::tfa::PhaseGrid;

/// Measure-operator convolution `mu * S = sum_z w(z) pi(z) S pi(z)^*`.
pub fn measure_op_conv(
    space: &PhaseSpace,
    mu: &DiscreteMeasure,
    s: &OperatorMatrix,
) -> Result<OperatorMatrix> {
    s.check_space(space)?;
    let mut out = OperatorMatrix::zeros(space);
    for (z, w) in &mu.atoms {
        out = &out + &conjugate_by_shift(space, z, s).scale(*w);
    }
    Ok(out)
}

/// Function-operator convolution `f * S = (1/L) sum_z f(z) pi(z) S pi(z)^*`.
///
/// The Haar weight `1/L` turns the grid sum into the phase-space integral;
/// this is the measure convolution of the measure with weights `f(z)/L`.
pub fn function_op_conv(
    space: &PhaseSpace,
    f: &PhaseGrid,
    s: &OperatorMatrix,
) -> Result<OperatorMatrix> {
    f.check_space(space)?;
    let haar = C64::new(space.haar(), 0.0);
    let mu = DiscreteMeasure::from_atoms(space.points().map(|z| (z, f.entry(&z) * haar)));
    measure_op_conv(space, &mu, s)
}

/// Operator-operator convolution `(T * S)(z) = tr(T pi(z) S-check pi(z)^*)`
/// with `S-check = parity_conjugate(S)`. Each entry costs `O(L^2)`.
pub fn op_op_conv(
    space: &PhaseSpace,
    t: &OperatorMatrix,
    s: &OperatorMatrix,
) -> Result<PhaseGrid> {
    t.check_space(space)?;
    s.check_space(space)?;
    let sc = parity_conjugate(space, s);
    let n = space.len();
    let mut out = PhaseGrid::zeros(space);
    for z in space.points() {
        // tr(T alpha_z(Sc)) = sum_{m,c} T[c,m] alpha_z(Sc)[m,c] without
        // materializing alpha_z(Sc)
        let mut acc = C64::new(0.0, 0.0);
        for m in 0..n {
            let sm = (m + n - z.k % n) % n;
            for c in 0..n {
                let scol = (c + n - z.k % n) % n;
                let phase = unit_phase(space, (z.l * m) as i64 - (z.l * c) as i64);
                acc += t.mat[(c, m)] * phase * sc.mat[(sm, scol)];
            }
        }
        out.set(&z, acc);
    }
    Ok(out)
}

/// The function `S-tilde = S * S-check`; real and non-negative for positive `S`.
pub fn s_tilde(space: &PhaseSpace, s: &OperatorMatrix) -> Result<PhaseGrid> {
    op_op_conv(space, s, &parity_conjugate(space, s))
}

/// Fourier-Wigner transform `F_W(S)(z) = tr(pi(z)^* S)`, no half-phase
/// prefactor: `F_W(S)(k, l) = sum_n exp(-2 pi i l n / L) S[n, (n - k) mod L]`.
pub fn fourier_wigner(space: &PhaseSpace, s: &OperatorMatrix) -> Result<PhaseGrid> {
    s.check_space(space)?;
    let n = space.len();
    let mut out = PhaseGrid::zeros(space);
    for z in space.points() {
        let mut acc = C64::new(0.0, 0.0);
        for row in 0..n {
            let col = (row + n - z.k % n) % n;
            acc += unit_phase(space, -((z.l * row) as i64)) * s.mat[(row, col)];
        }
        out.set(&z, acc);
    }
    Ok(out)
}

/// Inverse of [`fourier_wigner`]: `S = (1/L) sum_z F(z) pi(z)`.
pub fn fourier_wigner_inverse(space: &PhaseSpace, f: &PhaseGrid) -> Result<OperatorMatrix> {
    f.check_space(space)?;
    let n = space.len();
    let mut out = OperatorMatrix::zeros(space);
    for z in space.points() {
        let w = f.entry(&z) * C64::new(space.haar(), 0.0);
        for row in 0..n {
            let col = (row + n - z.k % n) % n;
            out.mat[(row, col)] += w * unit_phase(space, (z.l * row) as i64);
        }
    }
    Ok(out)
}

/// Symplectic DFT of a grid:
/// `F_sigma(g)(z) = (1/L) sum_{z'} g(z') exp(-2 pi i sigma(z, z') / L)`.
/// Involutive: applying it twice returns the original grid.
pub fn symplectic_dft_grid(space: &PhaseSpace, g: &PhaseGrid) -> Result<PhaseGrid> {
    g.check_space(space)?;
    let haar = C64::new(space.haar(), 0.0);
    let mut out = PhaseGrid::zeros(space);
    for z in space.points() {
        let mut acc = C64::new(0.0, 0.0);
        for zp in space.points() {
            let s = symplectic_form(&z, &zp, space) as i64;
            acc += g.entry(&zp) * unit_phase(space, -s);
        }
        out.set(&z, acc * haar);
    }
    Ok(out)
}

/// Symplectic DFT of a measure: the atoms carry their own mass, so no `1/L`:
/// `F_sigma(mu)(z) = sum_atoms w(z') exp(-2 pi i sigma(z, z') / L)`.
pub fn symplectic_dft_measure(space: &PhaseSpace, mu: &DiscreteMeasure) -> PhaseGrid {
    let mut out = PhaseGrid::zeros(space);
    for z in space.points() {
        let mut acc = C64::new(0.0, 0.0);
        for (zp, w) in &mu.atoms {
            let s = symplectic_form(&z, zp, space) as i64;
            acc += w * unit_phase(space, -s);
        }
        out.set(&z, acc);
    }
    out
}

/// Max-entry deviation between `F_W(mu * S)` and `F_sigma(mu) . F_W(S)`.
///
/// With the frozen conventions the convolution theorem is exact, so the
/// residual stays below `1e-10` for every input.
pub fn convolution_theorem_residual(
    space: &PhaseSpace,
    mu: &DiscreteMeasure,
    s: &OperatorMatrix,
) -> Result<f64> {
    let lhs = fourier_wigner(space, &measure_op_conv(space, mu, s)?)?;
    let rhs = symplectic_dft_measure(space, mu).hadamard(&fourier_wigner(space, s)?);
    Ok(lhs.max_abs_diff(&rhs))
}

/// Variant of [`convolution_theorem_residual`] with the symplectic kernel
/// sign flipped. Used as a negative control: the flipped kernel breaks the
/// convolution theorem, so the residual is large for generic inputs.
pub fn convolution_theorem_residual_flipped_kernel(
    space: &PhaseSpace,
    mu: &DiscreteMeasure,
    s: &OperatorMatrix,
) -> Result<f64> {
    let lhs = fourier_wigner(space, &measure_op_conv(space, mu, s)?)?;
    let mut flipped = PhaseGrid::zeros(space);
    for z in space.points() {
        let mut acc = C64::new(0.0, 0.0);
        for (zp, w) in &mu.atoms {
            let sgn = symplectic_form(&z, zp, space) as i64;
            acc += w * unit_phase(space, sgn);
        }
        flipped.set(&z, acc);
    }
    let rhs = flipped.hadamard(&fourier_wigner(space, s)?);
    Ok(lhs.max_abs_diff(&rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::tf_shift;
    use crate::phase::PhasePoint;
    use crate::signal::random_signal;
    use crate::spectral::{min_eigenvalue, schatten_norm};
    use crate::tfa::spectrogram;
    use nalgebra::DMatrix;
    use rand::Rng;
    use rand_chacha::{rand_core::SeedableRng, ChaCha8Rng};

    fn random_operator(l: usize, seed: u64) -> OperatorMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        OperatorMatrix::new(DMatrix::from_fn(l, l, |_, _| {
            C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        }))
    }

    fn random_measure(space: &PhaseSpace, n: usize, seed: u64) -> DiscreteMeasure {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DiscreteMeasure::from_atoms((0..n).map(|_| {
            let z = PhasePoint::new(
                space,
                rng.gen_range(0..space.len()) as i64,
                rng.gen_range(0..space.len()) as i64,
            );
            (z, C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
        }))
    }

    #[test]
    fn delta_origin_is_identity_conv() {
        let sp = PhaseSpace::new(6);
        let s = random_operator(6, 1);
        let out = measure_op_conv(&sp, &DiscreteMeasure::delta(PhasePoint::origin()), &s).unwrap();
        assert!((&out - &s).max_norm() < 1e-14);
    }

    #[test]
    fn measure_conv_trace_and_schatten() {
        let sp = PhaseSpace::new(8);
        let s = random_operator(8, 2);
        let mu = random_measure(&sp, 5, 3);
        let out = measure_op_conv(&sp, &mu, &s).unwrap();
        let want_tr = mu.total_mass() * s.trace();
        assert!((out.trace() - want_tr).norm() < 1e-10 * want_tr.norm().max(1.0));
        for p in [1.0, 2.0, f64::INFINITY] {
            let lhs = schatten_norm(&out, p).unwrap();
            let rhs = mu.total_variation() * schatten_norm(&s, p).unwrap();
            assert!(lhs <= rhs + 1e-10, "p = {p}: {lhs} > {rhs}");
        }
    }

    #[test]
    fn ones_times_s_is_trace_identity() {
        // 1 * S = tr(S) I with the 1/L Haar weight, L = 4 oracle
        let sp = PhaseSpace::new(4);
        let s = random_operator(4, 5);
        let ones = PhaseGrid::constant(&sp, C64::new(1.0, 0.0));
        let out = function_op_conv(&sp, &ones, &s).unwrap();
        let want = OperatorMatrix::identity(&sp).scale(s.trace());
        assert!((&out - &want).max_norm() < 1e-10);
    }

    #[test]
    fn function_conv_positivity_and_single_atom() {
        let sp = PhaseSpace::new(6);
        let psi = random_signal(&sp, 7);
        let pos = OperatorMatrix::outer(&psi, &psi);
        let f = PhaseGrid::from_real_fn(&sp, |z| (z.k + z.l) as f64);
        let out = function_op_conv(&sp, &f, &pos).unwrap();
        assert!(min_eigenvalue(&out).unwrap() >= -1e-10);

        let z0 = PhasePoint::new(&sp, 2, 5);
        let ind = PhaseGrid::from_real_fn(&sp, |z| if *z == z0 { 1.0 } else { 0.0 });
        let s = random_operator(6, 8);
        let got = function_op_conv(&sp, &ind, &s).unwrap();
        let want = conjugate_by_shift(&sp, &z0, &s).scale(C64::new(sp.haar(), 0.0));
        assert!((&got - &want).max_norm() < 1e-12);
    }

    #[test]
    fn op_op_rank_one_is_spectrogram() {
        let sp = PhaseSpace::new(8);
        let psi = random_signal(&sp, 9);
        let phi = random_signal(&sp, 10);
        let t = OperatorMatrix::outer(&psi, &psi);
        let s = OperatorMatrix::outer(&phi, &phi);
        // (T * S)(z) = |V_{phi-check} psi|^2(z), so the spectrogram with
        // window phi is the convolution against the parity reflection of S.
        let grid = op_op_conv(&sp, &t, &parity_conjugate(&sp, &s)).unwrap();
        let spec = spectrogram(&psi, &phi).unwrap();
        assert!(grid.max_abs_diff(&spec) < 1e-10);
        // and the unreflected convolution matches the reflected window
        let phi_check = phi.reflect(&sp);
        let grid2 = op_op_conv(&sp, &t, &s).unwrap();
        let spec2 = spectrogram(&psi, &phi_check).unwrap();
        assert!(grid2.max_abs_diff(&spec2) < 1e-10);
    }

    #[test]
    fn op_op_commutes_and_sums_to_trace_product() {
        let sp = PhaseSpace::new(4);
        let t = random_operator(4, 11);
        let s = random_operator(4, 12);
        let ts = op_op_conv(&sp, &t, &s).unwrap();
        let st = op_op_conv(&sp, &s, &t).unwrap();
        assert!(ts.max_abs_diff(&st) < 1e-10);
        // (1/L) sum_z (T*S)(z) = tr(T) tr(S), L = 4 oracle
        let lhs = ts.sum() * C64::new(sp.haar(), 0.0);
        let rhs = t.trace() * s.trace();
        assert!((lhs - rhs).norm() < 1e-10);
    }

    #[test]
    fn op_op_matches_direct_trace() {
        let sp = PhaseSpace::new(5);
        let t = random_operator(5, 13);
        let s = random_operator(5, 14);
        let grid = op_op_conv(&sp, &t, &s).unwrap();
        let sc = parity_conjugate(&sp, &s);
        for z in sp.points() {
            let direct = (&t * &conjugate_by_shift(&sp, &z, &sc)).trace();
            assert!((grid.entry(&z) - direct).norm() < 1e-12);
        }
    }

    #[test]
    fn s_tilde_rank_one() {
        let sp = PhaseSpace::new(8);
        let phi = random_signal(&sp, 15);
        let s = OperatorMatrix::outer(&phi, &phi);
        let st = s_tilde(&sp, &s).unwrap();
        let spec = spectrogram(&phi, &phi).unwrap();
        assert!(st.max_abs_diff(&spec) < 1e-10);
        assert!((st.entry(&PhasePoint::origin()).re - 1.0).abs() < 1e-12);
        assert!(st.min_real() >= -1e-10);
    }

    #[test]
    fn fourier_wigner_of_identity_and_roundtrip() {
        let sp = PhaseSpace::new(4);
        let fw = fourier_wigner(&sp, &OperatorMatrix::identity(&sp)).unwrap();
        for z in sp.points() {
            let want = if z == PhasePoint::origin() { 4.0 } else { 0.0 };
            assert!((fw.entry(&z) - C64::new(want, 0.0)).norm() < 1e-12);
        }

        let s = random_operator(4, 16);
        let back = fourier_wigner_inverse(&sp, &fourier_wigner(&sp, &s).unwrap()).unwrap();
        assert!((&back - &s).max_norm() < 1e-10);
    }

    #[test]
    fn fourier_wigner_matches_shift_trace() {
        let sp = PhaseSpace::new(6);
        let s = random_operator(6, 17);
        let fw = fourier_wigner(&sp, &s).unwrap();
        for z in sp.points() {
            let direct = (&tf_shift(&sp, &z).adjoint() * &s).trace();
            assert!((fw.entry(&z) - direct).norm() < 1e-12);
        }
    }

    #[test]
    fn symplectic_dft_cases() {
        let sp = PhaseSpace::new(4);
        // delta measure at origin -> constant 1
        let g = symplectic_dft_measure(&sp, &DiscreteMeasure::delta(PhasePoint::origin()));
        for z in sp.points() {
            assert!((g.entry(&z) - C64::new(1.0, 0.0)).norm() < 1e-12);
        }
        // all-ones grid -> L at the origin only (the frozen L = 4 fixture)
        let ones = PhaseGrid::constant(&sp, C64::new(1.0, 0.0));
        let hat = symplectic_dft_grid(&sp, &ones).unwrap();
        for z in sp.points() {
            let want = if z == PhasePoint::origin() { 4.0 } else { 0.0 };
            assert!((hat.entry(&z) - C64::new(want, 0.0)).norm() < 1e-12);
        }
        // involution on a random grid
        let mut rng = ChaCha8Rng::seed_from_u64(18);
        let r = PhaseGrid::from_fn(&sp, |_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>()));
        let twice = symplectic_dft_grid(&sp, &symplectic_dft_grid(&sp, &r).unwrap()).unwrap();
        assert!(twice.max_abs_diff(&r) < 1e-12);
    }

    #[test]
    fn convolution_theorem_exact() {
        let sp8 = PhaseSpace::new(8);
        let s8 = random_operator(8, 19);
        let single = random_measure(&sp8, 1, 20);
        assert!(convolution_theorem_residual(&sp8, &single, &s8).unwrap() < 1e-10);

        let sp16 = PhaseSpace::new(16);
        let s16 = random_operator(16, 21);
        let five = random_measure(&sp16, 5, 22);
        assert!(convolution_theorem_residual(&sp16, &five, &s16).unwrap() < 1e-10);

        // delta at origin: exactly zero
        let res =
            convolution_theorem_residual(&sp8, &DiscreteMeasure::delta(PhasePoint::origin()), &s8)
                .unwrap();
        assert!(res == 0.0);
    }

    #[test]
    fn flipped_kernel_breaks_theorem() {
        let sp = PhaseSpace::new(8);
        let s = random_operator(8, 23);
        let mu = random_measure(&sp, 3, 24);
        let good = convolution_theorem_residual(&sp, &mu, &s).unwrap();
        let bad = convolution_theorem_residual_flipped_kernel(&sp, &mu, &s).unwrap();
        assert!(good < 1e-10);
        assert!(bad > 1e-3, "flipped kernel unexpectedly small: {bad}");
    }

    #[test]
    fn adjoint_and_parity_identities() {
        let sp = PhaseSpace::new(6);
        let s = random_operator(6, 25);
        let mu = random_measure(&sp, 4, 26);
        let conv = measure_op_conv(&sp, &mu, &s).unwrap();
        // (mu * S)^* = conj(mu) * S^*
        let lhs = conv.adjoint();
        let rhs = measure_op_conv(&sp, &mu.conj(), &s.adjoint()).unwrap();
        assert!((&lhs - &rhs).max_norm() < 1e-12);
        // (mu * S)-check = mu-check * S-check
        let lhs2 = parity_conjugate(&sp, &conv);
        let rhs2 =
            measure_op_conv(&sp, &mu.check(&sp), &parity_conjugate(&sp, &s)).unwrap();
        assert!((&lhs2 - &rhs2).max_norm() < 1e-12);
    }

    #[test]
    fn associativity_both_forms() {
        let sp = PhaseSpace::new(6);
        let s = random_operator(6, 27);
        let t = random_operator(6, 28);
        let mu = random_measure(&sp, 3, 29);
        let nu = random_measure(&sp, 4, 30);

        // (mu * S) * T = mu conv (S * T) as functions on phase space
        let lhs = op_op_conv(&sp, &measure_op_conv(&sp, &mu, &s).unwrap(), &t).unwrap();
        let st = op_op_conv(&sp, &s, &t).unwrap();
        let mut rhs = PhaseGrid::zeros(&sp);
        for z in sp.points() {
            let mut acc = C64::new(0.0, 0.0);
            for (y, w) in &mu.atoms {
                acc += w * st.entry(&z.sub(&sp, y));
            }
            rhs.set(&z, acc);
        }
        assert!(lhs.max_abs_diff(&rhs) < 1e-10);

        // (mu conv nu) * S = mu * (nu * S)
        let lhs2 = measure_op_conv(&sp, &mu.convolve(&nu, &sp), &s).unwrap();
        let rhs2 =
            measure_op_conv(&sp, &mu, &measure_op_conv(&sp, &nu, &s).unwrap()).unwrap();
        assert!((&lhs2 - &rhs2).max_norm() < 1e-10);
    }

    #[test]
    fn positive_measure_positive_operator() {
        let sp = PhaseSpace::new(6);
        let psi = random_signal(&sp, 31);
        let s = OperatorMatrix::outer(&psi, &psi);
        let mu = DiscreteMeasure::from_atoms([
            (PhasePoint::new(&sp, 1, 2), C64::new(0.4, 0.0)),
            (PhasePoint::new(&sp, 5, 0), C64::new(1.1, 0.0)),
        ]);
        let out = measure_op_conv(&sp, &mu, &s).unwrap();
        assert!(min_eigenvalue(&out).unwrap() >= -1e-10);
    }
}
