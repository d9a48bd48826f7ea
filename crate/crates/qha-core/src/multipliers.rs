//! Gabor multipliers, localization operators, mask discretization, the
//! eigenvalue-plateau analysis and Berezin-Lieb inequality checks.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::conv::{measure_op_conv, s_tilde};
use crate::error::{QhaError, Result};
use crate::frames::{frame_bounds, frame_operator};
use crate::operator::{conjugate_by_shift, parity_conjugate, DiscreteMeasure, OperatorMatrix};
use crate::phase::{LatticeSpec, PhasePoint, PhaseSpace, RegionSpec};
use crate::spectral::{hermitian_eig, matrix_function, require_positive, ScalarMap};
use crate::tfa::PhaseGrid;

/// Real-valued phase-space mask: a region indicator, a sampled grid
/// (row-major `(k, l)` order, length `L^2`), or a Gaussian bump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MaskSpec {
    Indicator { region: RegionSpec },
    Sampled { values: Vec<f64> },
    Bump { center: (f64, f64), widths: (f64, f64) },
}

impl MaskSpec {
    /// Centered Gaussian bump with equal widths.
    pub fn centered_bump(width: f64) -> Self {
        MaskSpec::Bump {
            center: (0.0, 0.0),
            widths: (width, width),
        }
    }

    pub fn validate(&self, space: &PhaseSpace) -> Result<()> {
        match self {
            MaskSpec::Indicator { region } => region.validate(space),
            MaskSpec::Sampled { values } => {
                let want = space.len() * space.len();
                if values.len() != want {
                    return Err(QhaError::LengthMismatch(values.len(), want));
                }
                Ok(())
            }
            MaskSpec::Bump { widths, .. } => {
                if widths.0 <= 0.0 || widths.1 <= 0.0 {
                    return Err(QhaError::Config(format!(
                        "bump widths must be positive, got {widths:?}"
                    )));
                }
                Ok(())
            }
        }
    }

    /// Mask value at a phase-space point; box/disc/bump geometry uses the
    /// signed coordinate representatives.
    pub fn eval(&self, space: &PhaseSpace, z: &PhasePoint) -> f64 {
        match self {
            MaskSpec::Indicator { region } => {
                if region.contains(space, z) {
                    1.0
                } else {
                    0.0
                }
            }
            MaskSpec::Sampled { values } => values[z.k * space.len() + z.l],
            MaskSpec::Bump { center, widths } => {
                let dk = (space.signed(z.k) as f64 - center.0) / widths.0;
                let dl = (space.signed(z.l) as f64 - center.1) / widths.1;
                (-std::f64::consts::PI * (dk * dk + dl * dl)).exp()
            }
        }
    }

    pub fn as_grid(&self, space: &PhaseSpace) -> PhaseGrid {
        PhaseGrid::from_real_fn(space, |z| self.eval(space, z))
    }
}

/// Discretization of a mask over a lattice: atoms at the lattice points with
/// weights `(a b / L) m(lambda)`.
///
/// The cell weight `a b / L` is the finite analogue of the cell volume under
/// the `1/L` Haar convention, so `a = b = 1` recovers exactly the
/// Haar-weighted full-grid measure of `m`.
pub fn discretize_mask(
    space: &PhaseSpace,
    mask: &MaskSpec,
    lattice: &LatticeSpec,
) -> Result<DiscreteMeasure> {
    mask.validate(space)?;
    let w = lattice.a() as f64 * lattice.b() as f64 / space.len() as f64;
    Ok(DiscreteMeasure::from_atoms(
        lattice
            .points(space)
            .into_iter()
            .map(|z| (z, C64::new(w * mask.eval(space, &z), 0.0))),
    ))
}

/// Wiener-amalgam norm `W(L^inf, l^1)`: the grid is tiled by `box_a x box_b`
/// boxes and the suprema of `|m|` over the boxes are summed.
pub fn amalgam_norm(m: &PhaseGrid, box_a: usize, box_b: usize) -> Result<f64> {
    let l = m.len();
    if box_a == 0 || box_b == 0 || l % box_a != 0 || l % box_b != 0 {
        return Err(QhaError::NonTilingBoxes(box_a, box_b, l));
    }
    let mut total = 0.0;
    for k0 in (0..l).step_by(box_a) {
        for l0 in (0..l).step_by(box_b) {
            let mut sup = 0.0f64;
            for dk in 0..box_a {
                for dl in 0..box_b {
                    sup = sup.max(m.values[(k0 + dk, l0 + dl)].norm());
                }
            }
            total += sup;
        }
    }
    Ok(total)
}

/// Normalized Gabor multiplier `G = discretize_mask(m, Lambda) * S`.
pub fn gabor_multiplier(
    space: &PhaseSpace,
    mask: &MaskSpec,
    lattice: &LatticeSpec,
    s: &OperatorMatrix,
) -> Result<OperatorMatrix> {
    let mu = discretize_mask(space, mask, lattice)?;
    measure_op_conv(space, &mu, s)
}

/// Localization operator: the Gabor multiplier over the full grid, which is
/// exactly `function_op_conv(m, S)` under the `1/L` Haar convention.
pub fn localization_operator(
    space: &PhaseSpace,
    mask: &MaskSpec,
    s: &OperatorMatrix,
) -> Result<OperatorMatrix> {
    gabor_multiplier(space, mask, &LatticeSpec::full(space), s)
}

/// Unnormalized mixed-state Gabor multiplier of a region:
/// `G = sum over Omega intersect Lambda of pi(lambda) S pi(lambda)^*`.
pub fn mixed_multiplier_region(
    space: &PhaseSpace,
    region: &RegionSpec,
    lattice: &LatticeSpec,
    s: &OperatorMatrix,
) -> Result<OperatorMatrix> {
    s.check_space(space)?;
    region.validate(space)?;
    let mut g = OperatorMatrix::zeros(space);
    for lambda in region.lattice_points(space, lattice) {
        g = &g + &conjugate_by_shift(space, &lambda, s);
    }
    Ok(g)
}

/// Eigenvalue-plateau statistics of an unnormalized region multiplier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlateauReport {
    pub delta: f64,
    /// Ascending eigenvalues of the region multiplier, all in `[0, 1]` up to
    /// `1e-10` rounding.
    pub eigenvalues: Vec<f64>,
    /// Number of eigenvalues strictly above `1 - delta`.
    pub count_above: usize,
    /// `|Omega intersect Lambda| tr(S)`, which equals `sum of eigenvalues`.
    pub target: f64,
    pub ratio: f64,
    pub lemma_lhs: f64,
    pub lemma_bound: f64,
}

const DENSITY_TOL: f64 = 1e-8;

/// Checks that `S` is a density operator with respect to the lattice:
/// `frame_operator(S-check, Lambda) = I` to `1e-8` max-entry.
pub fn require_density_operator(
    space: &PhaseSpace,
    s: &OperatorMatrix,
    lattice: &LatticeSpec,
) -> Result<()> {
    let f = frame_operator(space, &parity_conjugate(space, s), lattice)?;
    let dev = (&f - &OperatorMatrix::identity(space)).max_norm();
    if dev > DENSITY_TOL {
        return Err(QhaError::NotDensityOperator(dev));
    }
    Ok(())
}

/// Full plateau analysis of `G = sum over Omega intersect Lambda of
/// alpha_lambda(S)` for a density operator `S`.
///
/// Also cross-checks the exact square-trace identity
/// `tr(G^2) = sum over pairs of S-tilde(lambda' - lambda)` and assembles the
/// counting-lemma bound
/// `|count_above - target| <= max(1/delta, 1/(1-delta)) |double sum - target|`.
pub fn plateau_analysis(
    space: &PhaseSpace,
    region: &RegionSpec,
    lattice: &LatticeSpec,
    s: &OperatorMatrix,
    delta: f64,
) -> Result<PlateauReport> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(QhaError::BadDelta(delta));
    }
    require_density_operator(space, s, lattice)?;
    let g = mixed_multiplier_region(space, region, lattice, s)?;
    let spec = hermitian_eig(&g)?;
    let h = ScalarMap::PlateauH { delta };
    let mut clamped = Vec::with_capacity(spec.eigenvalues.len());
    for &t in &spec.eigenvalues {
        // eval rejects eigenvalues outside [0,1] by more than 1e-10
        h.eval(t)?;
        clamped.push(t.clamp(0.0, 1.0));
    }
    let count_above = clamped.iter().filter(|&&t| t > 1.0 - delta).count();
    let pts = region.lattice_points(space, lattice);
    let target = pts.len() as f64 * s.trace().re;

    let st = s_tilde(space, s)?;
    let mut double_sum = 0.0;
    for a in &pts {
        for b in &pts {
            double_sum += st.entry(&b.sub(space, a)).re;
        }
    }
    let tr_g2: f64 = clamped.iter().map(|t| t * t).sum();
    assert!(
        (tr_g2 - double_sum).abs() <= 1e-8 * double_sum.abs().max(1.0),
        "square-trace identity violated: tr(G^2) = {tr_g2}, double sum = {double_sum}"
    );

    let c = (1.0 / delta).max(1.0 / (1.0 - delta));
    Ok(PlateauReport {
        delta,
        count_above,
        ratio: if target != 0.0 {
            count_above as f64 / target
        } else {
            0.0
        },
        lemma_lhs: (count_above as f64 - target).abs(),
        lemma_bound: c * (double_sum - target).abs(),
        target,
        eigenvalues: clamped,
    })
}

/// Rescale a positive operator to unit trace.
fn normalize_trace(s: &OperatorMatrix) -> Result<OperatorMatrix> {
    require_positive(s)?;
    let tr = s.trace().re;
    if tr <= 0.0 {
        return Err(QhaError::NotPositive(-tr));
    }
    Ok(s.scale(C64::new(1.0 / tr, 0.0)))
}

/// Berezin-Lieb lower direction:
/// `sum over Lambda of Phi((T * S-check)(lambda)) <= B tr(Phi(T))`.
///
/// The inequality holds for the trace-one normalization of `S` (the Jensen
/// step averages against weights summing to `tr(S)`), so `S` is rescaled to
/// unit trace internally and `B` is the upper frame bound of that rescaled
/// system.
///
/// Returns `(lhs, rhs, slack = rhs - lhs)`.
pub fn berezin_lieb_lower(
    space: &PhaseSpace,
    t: &OperatorMatrix,
    s: &OperatorMatrix,
    lattice: &LatticeSpec,
    phi: &ScalarMap,
) -> Result<(f64, f64, f64)> {
    require_positive(t)?;
    let s = normalize_trace(s)?;
    let report = frame_bounds(space, &s, lattice)?;
    let grid = crate::conv::op_op_conv(space, t, &parity_conjugate(space, &s))?;
    let mut lhs = 0.0;
    for lambda in lattice.points(space) {
        lhs += phi.eval(grid.entry(&lambda).re)?;
    }
    let rhs = report.upper_bound * matrix_function(t, phi)?.trace().re;
    Ok((lhs, rhs, rhs - lhs))
}

/// Berezin-Lieb upper direction:
/// `tr(Phi(mu_c * S)) <= sum over Lambda of Phi(B c(lambda))`
/// for non-negative weights `c` listed in lattice order.
///
/// As in [`berezin_lieb_lower`], `S` is rescaled to unit trace and `B` is
/// the upper frame bound of the rescaled system.
///
/// Returns `(lhs, rhs, slack = rhs - lhs)`.
pub fn berezin_lieb_upper(
    space: &PhaseSpace,
    c: &[f64],
    s: &OperatorMatrix,
    lattice: &LatticeSpec,
    phi: &ScalarMap,
) -> Result<(f64, f64, f64)> {
    let points = lattice.points(space);
    if c.len() != points.len() {
        return Err(QhaError::LengthMismatch(c.len(), points.len()));
    }
    for &w in c {
        if w < 0.0 {
            return Err(QhaError::NegativeWeight(w));
        }
    }
    let s = normalize_trace(s)?;
    let report = frame_bounds(space, &s, lattice)?;
    let mu = DiscreteMeasure::from_atoms(
        points.iter().zip(c).map(|(z, &w)| (*z, C64::new(w, 0.0))),
    );
    let conv = measure_op_conv(space, &mu, &s)?;
    let lhs = matrix_function(&conv, phi)?.trace().re;
    let mut rhs = 0.0;
    for &w in c {
        rhs += phi.eval(report.upper_bound * w)?;
    }
    Ok((lhs, rhs, rhs - lhs))
}
