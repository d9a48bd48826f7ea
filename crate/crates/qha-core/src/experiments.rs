//! Scripted experiment runners: plateau scaling, Gabor-multiplier
//! convergence, mask/window continuity, Berezin-Lieb sweeps and the
//! invariant property suite, plus the finite spanning check.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::conv::{
    convolution_theorem_residual, convolution_theorem_residual_flipped_kernel, fourier_wigner,
    function_op_conv, measure_op_conv, op_op_conv, s_tilde,
};
use crate::error::{QhaError, Result};
use crate::frames::tighten;
use crate::multipliers::{
    discretize_mask, gabor_multiplier, localization_operator, mixed_multiplier_region,
    plateau_analysis, berezin_lieb_lower, berezin_lieb_upper, MaskSpec,
};
use crate::operator::{parity_conjugate, DiscreteMeasure, OperatorMatrix};
use crate::phase::{LatticeSpec, PhasePoint, PhaseSpace, RegionSpec};
use crate::signal::{gaussian_window, hermite_window, random_signal_with, Signal};
use crate::spectral::{hermitian_eig, schatten_norm, singular_values, trace_norm, ScalarMap};
use crate::tfa::{spectrogram, stft, PhaseGrid};

/// Which experiment a config drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Plateau,
    Converge,
    Continuity,
    BerezinLieb,
    Props,
}

/// Window construction for the experiment's mixed-state operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum WindowSpec {
    Gaussian { width: f64 },
    HermiteLike { order: usize },
    Random { seed: u64 },
    /// Path to a QHAOP v1 file holding a signal (single window) or an
    /// operator (used directly as the mixed state).
    Explicit { file: String },
}

impl Default for WindowSpec {
    fn default() -> Self {
        WindowSpec::Gaussian { width: 1.0 }
    }
}

/// A single lattice pair or an ordered list of them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LatticeField {
    One([usize; 2]),
    Many(Vec<[usize; 2]>),
}

/// A region, or a list of centered-box radii for sweeps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RegionField {
    Radii(Vec<f64>),
    Spec(RegionSpec),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Declarative experiment description; mirrored one-to-one by the config
/// file. `seed` fully determines all randomness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(default)]
    pub lattice: Option<LatticeField>,
    #[serde(default)]
    pub window: Option<WindowSpec>,
    /// With `n > 1` weights the mixed state combines `n` windows: Hermite
    /// orders `0..n` for the Gaussian/Hermite kinds, seeds `seed..seed+n`
    /// for the random kind.
    #[serde(default)]
    pub weights: Option<Vec<f64>>,
    #[serde(default)]
    pub region: Option<RegionField>,
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default)]
    pub mask: Option<MaskSpec>,
    #[serde(default)]
    pub repeats: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub out: Option<String>,
    #[serde(default)]
    pub format: Option<OutputFormat>,
    /// Acceptance window for the final plateau ratio (default `[0.8, 1.2]`).
    #[serde(default)]
    pub ratio_window: Option<(f64, f64)>,
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentKind, l: usize) -> Self {
        ExperimentConfig {
            experiment,
            l,
            lattice: None,
            window: None,
            weights: None,
            region: None,
            delta: None,
            mask: None,
            repeats: None,
            seed: 0,
            out: None,
            format: None,
            ratio_window: None,
        }
    }

    pub fn space(&self) -> Result<PhaseSpace> {
        if self.l == 0 {
            return Err(QhaError::Config("L must be positive".to_string()));
        }
        Ok(PhaseSpace::new(self.l))
    }

    fn lattice_single(&self, space: &PhaseSpace, default: (usize, usize)) -> Result<LatticeSpec> {
        let (a, b) = match &self.lattice {
            None => default,
            Some(LatticeField::One([a, b])) => (*a, *b),
            Some(LatticeField::Many(_)) => {
                return Err(QhaError::Config(
                    "this experiment takes a single lattice pair, not a list".to_string(),
                ))
            }
        };
        LatticeSpec::new(space, a, b)
    }

    fn lattice_list(&self, space: &PhaseSpace, default: &[[usize; 2]]) -> Result<Vec<LatticeSpec>> {
        let raw: Vec<[usize; 2]> = match &self.lattice {
            None => default.to_vec(),
            Some(LatticeField::One(p)) => vec![*p],
            Some(LatticeField::Many(v)) => v.clone(),
        };
        raw.iter()
            .map(|[a, b]| LatticeSpec::new(space, *a, *b))
            .collect()
    }

    fn radii(&self, default: &[f64]) -> Result<Vec<f64>> {
        match &self.region {
            None => Ok(default.to_vec()),
            Some(RegionField::Radii(r)) => Ok(r.clone()),
            Some(RegionField::Spec(_)) => Err(QhaError::Config(
                "the plateau sweep takes a list of radii, not a single region".to_string(),
            )),
        }
    }
}

/// Builds the experiment's window operator from the config.
pub fn build_window_operator(space: &PhaseSpace, cfg: &ExperimentConfig) -> Result<OperatorMatrix> {
    let window = cfg.window.clone().unwrap_or_default();
    let n = cfg.weights.as_ref().map_or(1, |w| w.len().max(1));
    let weights: Vec<f64> = cfg
        .weights
        .clone()
        .unwrap_or_else(|| vec![1.0]);
    let signals: Vec<Signal> = match &window {
        WindowSpec::Gaussian { width } => {
            if *width <= 0.0 {
                return Err(QhaError::Config("gaussian width must be positive".to_string()));
            }
            if n == 1 {
                vec![gaussian_window(space, *width)]
            } else {
                (0..n).map(|k| hermite_window(space, k)).collect()
            }
        }
        WindowSpec::HermiteLike { order } => {
            (0..n).map(|k| hermite_window(space, order + k)).collect()
        }
        WindowSpec::Random { seed } => (0..n)
            .map(|k| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(k as u64));
                random_signal_with(space, &mut rng)
            })
            .collect(),
        WindowSpec::Explicit { file } => {
            let text = std::fs::read_to_string(file)?;
            let (fspace, obj) = crate::qhaop::from_json(&text)?;
            if fspace.len() != space.len() {
                return Err(QhaError::Config(format!(
                    "window file has L = {}, config has L = {}",
                    fspace.len(),
                    space.len()
                )));
            }
            match obj {
                crate::qhaop::QhaopObject::Signal(s) => vec![s],
                crate::qhaop::QhaopObject::Operator(op) => return Ok(op),
                other => {
                    return Err(QhaError::Config(format!(
                        "window file must hold a signal or operator, found {}",
                        other.kind()
                    )))
                }
            }
        }
    };
    crate::frames::mixed_state_from_windows(&weights, &signals)
}

/// One table cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Real(f64),
    Bool(bool),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Real(v) => format!("{v:.12e}"),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(v) => v.clone(),
        }
    }
}

/// Deterministic tabular result: named columns, typed rows and a metadata
/// block. No wall-clock data is recorded, so identical config and seed give
/// byte-identical serializations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub metadata: BTreeMap<String, String>,
    pub passed: bool,
}

impl ResultTable {
    fn new(columns: &[&str], cfg: &ExperimentConfig) -> Self {
        let mut metadata = BTreeMap::new();
        metadata.insert("code_version".to_string(), env!("CARGO_PKG_VERSION").to_string());
        metadata.insert(
            "config".to_string(),
            serde_json::to_string(cfg).unwrap_or_default(),
        );
        ResultTable {
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
            metadata,
            passed: true,
        }
    }

    fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width mismatch");
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            out.push_str(&format!("# {k}: {v}\n"));
        }
        out.push_str(&format!("# status: {}\n", if self.passed { "pass" } else { "fail" }));
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let rendered: Vec<String> = row.iter().map(Cell::render).collect();
            out.push_str(&rendered.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("table serialization cannot fail")
    }

    /// Column index by name; panics on unknown names (internal misuse).
    pub fn column(&self, name: &str) -> usize {
        self.columns
            .iter()
            .position(|c| c == name)
            .unwrap_or_else(|| panic!("no column named {name}"))
    }

    pub fn real(&self, row: usize, name: &str) -> f64 {
        match &self.rows[row][self.column(name)] {
            Cell::Real(v) => *v,
            Cell::Int(v) => *v as f64,
            other => panic!("column {name} is not numeric: {other:?}"),
        }
    }
}

const H_SLACK_TOL: f64 = 1e-8;

/// Plateau sweep: one row per box radius `R`, with the H-estimate asserted
/// row-wise through the `pass` column.
pub fn run_plateau(cfg: &ExperimentConfig) -> Result<ResultTable> {
    let space = cfg.space()?;
    let lattice = cfg.lattice_single(&space, (2, 2))?;
    let delta = cfg.delta.unwrap_or(0.3);
    let radii = cfg.radii(&[6.0, 12.0, 18.0, 24.0, 30.0, 36.0, 42.0])?;
    let s0 = build_window_operator(&space, cfg)?;
    let s = tighten(&space, &s0, &lattice)?;

    let mut table = ResultTable::new(
        &[
            "L", "a", "b", "R", "delta", "count_above", "target", "ratio", "lemma_lhs",
            "lemma_bound", "pass",
        ],
        cfg,
    );
    for &r in &radii {
        let region = RegionSpec::CenteredBox { radius: r };
        let report = plateau_analysis(&space, &region, &lattice, &s, delta)?;
        let ok = report.lemma_lhs <= report.lemma_bound + H_SLACK_TOL;
        table.passed &= ok;
        table.push(vec![
            Cell::Int(space.len() as i64),
            Cell::Int(lattice.a() as i64),
            Cell::Int(lattice.b() as i64),
            Cell::Real(r),
            Cell::Real(delta),
            Cell::Int(report.count_above as i64),
            Cell::Real(report.target),
            Cell::Real(report.ratio),
            Cell::Real(report.lemma_lhs),
            Cell::Real(report.lemma_bound),
            Cell::Bool(ok),
        ]);
    }
    // trend checks: the final ratio must land in the acceptance window and
    // be strictly closer to 1 than the first row's
    if table.rows.len() >= 2 {
        let (lo, hi) = cfg.ratio_window.unwrap_or((0.8, 1.2));
        let first = table.real(0, "ratio");
        let last = table.real(table.rows.len() - 1, "ratio");
        table.passed &=
            last >= lo && last <= hi && (last - 1.0).abs() < (first - 1.0).abs();
    }
    Ok(table)
}

/// Gabor-multiplier-to-localization-operator convergence over a coarse-to-
/// fine lattice list ending at `(1, 1)`.
pub fn run_convergence(cfg: &ExperimentConfig) -> Result<ResultTable> {
    let space = cfg.space()?;
    let lattices = cfg.lattice_list(
        &space,
        &[[16, 16], [8, 8], [4, 4], [2, 2], [1, 1]],
    )?;
    match lattices.last() {
        Some(last) if last.a() == 1 && last.b() == 1 => {}
        _ => {
            return Err(QhaError::Config(
                "convergence lattice list must end at (1, 1)".to_string(),
            ))
        }
    }
    let mask = cfg
        .mask
        .clone()
        .unwrap_or_else(|| MaskSpec::centered_bump(space.len() as f64 / 8.0));
    mask.validate(&space)?;
    let s0 = build_window_operator(&space, cfg)?;
    let s = tighten(&space, &s0, &LatticeSpec::full(&space))?;
    let limit = localization_operator(&space, &mask, &s)?;

    let mut table = ResultTable::new(&["a", "b", "trace_norm_error"], cfg);
    let mut errors = Vec::new();
    for lat in &lattices {
        let g = gabor_multiplier(&space, &mask, lat, &s)?;
        let err = trace_norm(&(&g - &limit));
        errors.push(err);
        table.push(vec![
            Cell::Int(lat.a() as i64),
            Cell::Int(lat.b() as i64),
            Cell::Real(err),
        ]);
    }
    let final_ok = *errors.last().unwrap() < 1e-10;
    let coarse_to_fine_ok = errors.len() < 2 || errors[errors.len() - 2] < errors[0] || errors[0] == 0.0;
    table.passed = final_ok && coarse_to_fine_ok;
    Ok(table)
}

/// Amplitude given to the continuity perturbation directions. Chosen so the
/// trace-norm errors drop below `1e-9` well before the end of the
/// `epsilon = 2^-n` schedule.
pub const PERTURBATION_SCALE: f64 = 1e-7;

/// Continuity of the Gabor multiplier in the window and in the mask, along
/// the schedule `epsilon_n = 2^-n`, `n = 0..=10`.
pub fn run_continuity(cfg: &ExperimentConfig) -> Result<ResultTable> {
    let space = cfg.space()?;
    let lattice = cfg.lattice_single(&space, (2, 2))?;
    let mask = cfg
        .mask
        .clone()
        .unwrap_or_else(|| MaskSpec::centered_bump(space.len() as f64 / 8.0));
    mask.validate(&space)?;
    let s0 = build_window_operator(&space, cfg)?;
    let s = tighten(&space, &s0, &lattice)?;
    let mu = discretize_mask(&space, &mask, &lattice)?;
    let mu_norm = mu.total_variation();
    let s_norm = trace_norm(&s);
    let base = gabor_multiplier(&space, &mask, &lattice, &s)?;
    let l = space.len();

    // Hermitian perturbation direction with trace norm PERTURBATION_SCALE
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let raw = DMatrix::from_fn(l, l, |_, _| {
        C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
    });
    let herm = OperatorMatrix::new((&raw + raw.adjoint()).scale(0.5));
    let delta_dir = herm.scale(C64::new(PERTURBATION_SCALE / trace_norm(&herm), 0.0));

    // real mask perturbation direction with max modulus PERTURBATION_SCALE
    let rho = PhaseGrid::from_real_fn(&space, |_| {
        PERTURBATION_SCALE * 2.0 * (rng.gen::<f64>() - 0.5)
    });
    let mask_grid = mask.as_grid(&space);

    let mut table = ResultTable::new(
        &["epsilon", "window_error", "bound_w", "mask_error", "bound_m", "pass"],
        cfg,
    );
    for n in 0..=10u32 {
        let eps = 0.5f64.powi(n as i32);
        let s_n = &s + &delta_dir.scale(C64::new(eps, 0.0));
        let g_w = measure_op_conv(&space, &mu, &s_n)?;
        let window_error = trace_norm(&(&g_w - &base));
        let bound_w = mu_norm * trace_norm(&(&s_n - &s));

        let perturbed_grid = PhaseGrid::new(&mask_grid.values + &rho.values * C64::new(eps, 0.0));
        let m_n = MaskSpec::Sampled {
            values: (0..l)
                .flat_map(|k| (0..l).map(move |f| (k, f)))
                .map(|(k, f)| perturbed_grid.values[(k, f)].re)
                .collect(),
        };
        let g_m = gabor_multiplier(&space, &m_n, &lattice, &s)?;
        let mask_error = trace_norm(&(&g_m - &base));
        let diff_mask = MaskSpec::Sampled {
            values: (0..l)
                .flat_map(|k| (0..l).map(move |f| (k, f)))
                .map(|(k, f)| eps * rho.values[(k, f)].re)
                .collect(),
        };
        let bound_m = discretize_mask(&space, &diff_mask, &lattice)?.total_variation() * s_norm;

        let ok = window_error <= bound_w + 1e-10 && mask_error <= bound_m + 1e-10;
        table.passed &= ok;
        table.push(vec![
            Cell::Real(eps),
            Cell::Real(window_error),
            Cell::Real(bound_w),
            Cell::Real(mask_error),
            Cell::Real(bound_m),
            Cell::Bool(ok),
        ]);
    }
    let last = table.rows.len() - 1;
    let tail_ok = table.real(last, "window_error") < 1e-9 && table.real(last, "mask_error") < 1e-9;
    table.passed &= tail_ok;
    Ok(table)
}

/// Berezin-Lieb sweep: both inequality directions for `Phi` in
/// `{t^2, t^3, exp}` over seeded random positive operators and weights.
pub fn run_berezin_lieb(cfg: &ExperimentConfig) -> Result<ResultTable> {
    let space = cfg.space()?;
    let lattice = cfg.lattice_single(&space, (2, 2))?;
    let repeats = cfg.repeats.unwrap_or(20);
    let s0 = build_window_operator(&space, cfg)?;
    let s = tighten(&space, &s0, &lattice)?;
    let maps: [(&str, ScalarMap); 3] = [
        ("t^2", ScalarMap::Power(2.0)),
        ("t^3", ScalarMap::Power(3.0)),
        ("exp", ScalarMap::Exp),
    ];

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut table = ResultTable::new(
        &["repeat", "phi", "direction", "lhs", "rhs", "slack", "pass"],
        cfg,
    );
    for rep in 0..repeats {
        let a = random_signal_with(&space, &mut rng);
        let b = random_signal_with(&space, &mut rng);
        let t = &OperatorMatrix::outer(&a, &a).scale(C64::new(rng.gen::<f64>() + 0.1, 0.0))
            + &OperatorMatrix::outer(&b, &b).scale(C64::new(rng.gen::<f64>() + 0.1, 0.0));
        let c: Vec<f64> = (0..lattice.count(&space)).map(|_| rng.gen::<f64>()).collect();
        for (name, map) in &maps {
            let (lhs, rhs, slack) = berezin_lieb_lower(&space, &t, &s, &lattice, map)?;
            let ok = slack >= -1e-10;
            table.passed &= ok;
            table.push(vec![
                Cell::Int(rep as i64),
                Cell::Text(name.to_string()),
                Cell::Text("lower".to_string()),
                Cell::Real(lhs),
                Cell::Real(rhs),
                Cell::Real(slack),
                Cell::Bool(ok),
            ]);
            let (lhs, rhs, slack) = berezin_lieb_upper(&space, &c, &s, &lattice, map)?;
            let ok = slack >= -1e-10;
            table.passed &= ok;
            table.push(vec![
                Cell::Int(rep as i64),
                Cell::Text(name.to_string()),
                Cell::Text("upper".to_string()),
                Cell::Real(lhs),
                Cell::Real(rhs),
                Cell::Real(slack),
                Cell::Bool(ok),
            ]);
        }
    }
    Ok(table)
}

/// The invariant property suite: one row per invariant with the max
/// deviation over `repeats` seeded random instances.
pub fn run_props(cfg: &ExperimentConfig) -> Result<ResultTable> {
    run_props_with_convention(cfg, false)
}

/// Like [`run_props`], with an optional flipped symplectic-kernel sign in
/// the convolution-theorem row. The flip is a test-only negative control:
/// it must make that row fail.
pub fn run_props_with_convention(cfg: &ExperimentConfig, flip_kernel: bool) -> Result<ResultTable> {
    let space = cfg.space()?;
    let l = space.len();
    let repeats = cfg.repeats.unwrap_or(50);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut table = ResultTable::new(&["invariant", "instances", "max_deviation", "tolerance", "pass"], cfg);

    let random_op = |rng: &mut ChaCha8Rng| {
        OperatorMatrix::new(DMatrix::from_fn(l, l, |_, _| {
            C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        }))
    };
    let random_measure = |rng: &mut ChaCha8Rng, n: usize| {
        DiscreteMeasure::from_atoms((0..n).map(|_| {
            (
                PhasePoint::new(&space, rng.gen_range(0..l) as i64, rng.gen_range(0..l) as i64),
                C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5),
            )
        }))
    };

    struct Row {
        name: &'static str,
        tol: f64,
        dev: f64,
    }
    let mut rows: Vec<Row> = [
        ("moyal", 1e-8),
        ("depolarizing", 1e-8),
        ("conv_trace", 1e-8),
        ("conv_adjoint", 1e-8),
        ("conv_parity", 1e-8),
        ("associativity_a", 1e-8),
        ("associativity_b", 1e-8),
        ("schatten_bound", 1e-10),
        ("convolution_theorem", 1e-10),
        ("op_op_commutativity", 1e-10),
        ("square_trace", 1e-8),
        ("lidskii_trace", 1e-8),
        ("polarization", 1e-8),
    ]
    .iter()
    .map(|(name, tol)| Row {
        name,
        tol: *tol,
        dev: 0.0,
    })
    .collect();

    for _ in 0..repeats {
        let psi = random_signal_with(&space, &mut rng);
        let phi = random_signal_with(&space, &mut rng);
        let s = random_op(&mut rng);
        let t = random_op(&mut rng);
        let mu = random_measure(&mut rng, 4);
        let nu = random_measure(&mut rng, 3);

        // moyal: sum |V|^2 = L ||psi||^2 ||phi||^2
        let mass = spectrogram(&psi, &phi)?.sum().re;
        let want = l as f64 * psi.norm().powi(2) * phi.norm().powi(2);
        rows[0].dev = rows[0].dev.max((mass - want).abs() / want.abs().max(1.0));

        // depolarizing: 1 * S = tr(S) I
        let ones = PhaseGrid::constant(&space, C64::new(1.0, 0.0));
        let dep = function_op_conv(&space, &ones, &s)?;
        let dep_want = OperatorMatrix::identity(&space).scale(s.trace());
        rows[1].dev = rows[1].dev.max((&dep - &dep_want).max_norm());

        // trace of a measure convolution
        let conv = measure_op_conv(&space, &mu, &s)?;
        let tr_want = mu.total_mass() * s.trace();
        rows[2].dev = rows[2]
            .dev
            .max((conv.trace() - tr_want).norm() / tr_want.norm().max(1.0));

        // adjoint and parity identities
        let adj = (&conv.adjoint() - &measure_op_conv(&space, &mu.conj(), &s.adjoint())?).max_norm();
        rows[3].dev = rows[3].dev.max(adj);
        let par = (&parity_conjugate(&space, &conv)
            - &measure_op_conv(&space, &mu.check(&space), &parity_conjugate(&space, &s))?)
            .max_norm();
        rows[4].dev = rows[4].dev.max(par);

        // associativity A: (mu * S) * T = mu conv (S * T)
        let lhs_a = op_op_conv(&space, &conv, &t)?;
        let st = op_op_conv(&space, &s, &t)?;
        let mut dev_a = 0.0f64;
        for z in space.points() {
            let mut acc = C64::new(0.0, 0.0);
            for (y, w) in &mu.atoms {
                acc += w * st.entry(&z.sub(&space, y));
            }
            dev_a = dev_a.max((lhs_a.entry(&z) - acc).norm());
        }
        rows[5].dev = rows[5].dev.max(dev_a);

        // associativity B: (mu conv nu) * S = mu * (nu * S)
        let lhs_b = measure_op_conv(&space, &mu.convolve(&nu, &space), &s)?;
        let rhs_b = measure_op_conv(&space, &mu, &measure_op_conv(&space, &nu, &s)?)?;
        rows[6].dev = rows[6].dev.max((&lhs_b - &rhs_b).max_norm());

        // Schatten bound violation, p in {1, 2, inf}
        for p in [1.0, 2.0, f64::INFINITY] {
            let excess = schatten_norm(&conv, p)?
                - mu.total_variation() * schatten_norm(&s, p)?;
            rows[7].dev = rows[7].dev.max(excess.max(0.0));
        }

        // Fourier-Wigner convolution theorem (optionally sabotaged)
        let residual = if flip_kernel {
            convolution_theorem_residual_flipped_kernel(&space, &mu, &s)?
        } else {
            convolution_theorem_residual(&space, &mu, &s)?
        };
        rows[8].dev = rows[8].dev.max(residual);

        // op-op commutativity
        let comm = op_op_conv(&space, &t, &s)?.max_abs_diff(&op_op_conv(&space, &s, &t)?);
        rows[9].dev = rows[9].dev.max(comm);

        // square-trace and Lidskii identities for a small region multiplier
        let pos = &OperatorMatrix::outer(&psi, &psi) + &OperatorMatrix::outer(&phi, &phi).scale(C64::new(0.5, 0.0));
        let lat = LatticeSpec::new(&space, 2, 2).unwrap_or_else(|_| LatticeSpec::full(&space));
        let region = RegionSpec::CenteredBox {
            radius: (l as f64 / 4.0).max(1.0),
        };
        let g = mixed_multiplier_region(&space, &region, &lat, &pos)?;
        let spec = hermitian_eig(&g)?;
        let tr_g2: f64 = spec.eigenvalues.iter().map(|x| x * x).sum();
        let stg = s_tilde(&space, &pos)?;
        let pts = region.lattice_points(&space, &lat);
        let mut dsum = 0.0;
        for za in &pts {
            for zb in &pts {
                dsum += stg.entry(&zb.sub(&space, za)).re;
            }
        }
        rows[10].dev = rows[10]
            .dev
            .max((tr_g2 - dsum).abs() / dsum.abs().max(1.0));
        let tr_want = pts.len() as f64 * pos.trace().re;
        let tr_got: f64 = spec.eigenvalues.iter().sum();
        rows[11].dev = rows[11]
            .dev
            .max((tr_got - tr_want).abs() / tr_want.abs().max(1.0));

        // STFT polarization (Moyal cross form)
        let psi2 = random_signal_with(&space, &mut rng);
        let phi2 = random_signal_with(&space, &mut rng);
        let v1 = stft(&psi, &phi)?;
        let v2 = stft(&psi2, &phi2)?;
        let cross = v1
            .values
            .iter()
            .zip(v2.values.iter())
            .map(|(x, y)| x * y.conj())
            .sum::<C64>()
            * C64::new(space.haar(), 0.0);
        let cross_want = psi.inner(&psi2) * phi.inner(&phi2).conj();
        rows[12].dev = rows[12].dev.max((cross - cross_want).norm());
    }

    for row in &rows {
        let ok = repeats == 0 || row.dev <= row.tol;
        table.passed &= ok;
        table.push(vec![
            Cell::Text(row.name.to_string()),
            Cell::Int(repeats as i64),
            Cell::Real(row.dev),
            Cell::Real(row.tol),
            Cell::Bool(ok),
        ]);
    }
    if repeats == 0 {
        table.rows.clear();
    }
    Ok(table)
}

/// Dispatches a config to its experiment runner.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ResultTable> {
    match cfg.experiment {
        ExperimentKind::Plateau => run_plateau(cfg),
        ExperimentKind::Converge => run_convergence(cfg),
        ExperimentKind::Continuity => run_continuity(cfg),
        ExperimentKind::BerezinLieb => run_berezin_lieb(cfg),
        ExperimentKind::Props => run_props(cfg),
    }
}

/// Finite spanning check: the dimension of the span of the phase-space
/// translates `{alpha_z(S)}` inside the `L^2`-dimensional operator space.
///
/// When the Fourier-Wigner transform of `S` is zero-free the translates span
/// everything and the result is `L^2`; a vanishing transform raises
/// `FourierWignerZero`.
pub fn spanning_check(space: &PhaseSpace, s: &OperatorMatrix) -> Result<usize> {
    s.check_space(space)?;
    let fw = fourier_wigner(space, s)?;
    let min_mod = fw.values.iter().map(|c| c.norm()).fold(f64::INFINITY, f64::min);
    if min_mod <= 1e-12 {
        return Err(QhaError::FourierWignerZero(min_mod));
    }
    let l = space.len();
    let n2 = l * l;
    let mut big = DMatrix::<C64>::zeros(n2, n2);
    for (col, z) in space.points().enumerate() {
        let t = crate::operator::conjugate_by_shift(space, &z, s);
        for i in 0..l {
            for j in 0..l {
                big[(i * l + j, col)] = t.mat[(i, j)];
            }
        }
    }
    let sv = singular_values(&OperatorMatrix::new(big));
    let cutoff = 1e-8 * sv.first().copied().unwrap_or(0.0).max(1.0);
    Ok(sv.iter().filter(|&&x| x > cutoff).count())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn props_small_all_pass() {
        let mut cfg = ExperimentConfig::new(ExperimentKind::Props, 8);
        cfg.repeats = Some(5);
        cfg.seed = 7;
        let table = run_props(&cfg).unwrap();
        assert!(table.passed, "{}", table.to_csv());
        assert_eq!(table.rows.len(), 13);
    }

    #[test]
    fn props_zero_repeats_empty_pass() {
        let mut cfg = ExperimentConfig::new(ExperimentKind::Props, 8);
        cfg.repeats = Some(0);
        let table = run_props(&cfg).unwrap();
        assert!(table.passed);
        assert!(table.rows.is_empty());
    }

    #[test]
    fn props_flipped_kernel_fails() {
        let mut cfg = ExperimentConfig::new(ExperimentKind::Props, 8);
        cfg.repeats = Some(3);
        let table = run_props_with_convention(&cfg, true).unwrap();
        assert!(!table.passed);
        let idx = table.column("invariant");
        let row = table
            .rows
            .iter()
            .position(|r| r[idx] == Cell::Text("convolution_theorem".to_string()))
            .unwrap();
        assert_eq!(
            table.rows[row][table.column("pass")],
            Cell::Bool(false)
        );
    }

    #[test]
    fn props_deterministic() {
        let mut cfg = ExperimentConfig::new(ExperimentKind::Props, 8);
        cfg.repeats = Some(4);
        cfg.seed = 7;
        let a = run_props(&cfg).unwrap().to_csv();
        let b = run_props(&cfg).unwrap().to_csv();
        assert_eq!(a, b);
    }

    #[test]
    fn plateau_small_run() {
        let mut cfg = ExperimentConfig::new(ExperimentKind::Plateau, 16);
        cfg.region = Some(RegionField::Radii(vec![2.0, 4.0, 6.0]));
        let table = run_plateau(&cfg).unwrap();
        assert!(table.passed, "{}", table.to_csv());
        assert_eq!(table.rows.len(), 3);
    }

    #[test]
    fn convergence_small_run() {
        let mut cfg = ExperimentConfig::new(ExperimentKind::Converge, 16);
        cfg.lattice = Some(LatticeField::Many(vec![[4, 4], [2, 2], [1, 1]]));
        let table = run_convergence(&cfg).unwrap();
        assert!(table.passed, "{}", table.to_csv());
        let last = table.rows.len() - 1;
        assert!(table.real(last, "trace_norm_error") < 1e-10);
        assert!(table.real(1, "trace_norm_error") < table.real(0, "trace_norm_error"));
    }

    #[test]
    fn convergence_requires_full_tail() {
        let mut cfg = ExperimentConfig::new(ExperimentKind::Converge, 16);
        cfg.lattice = Some(LatticeField::Many(vec![[4, 4], [2, 2]]));
        assert!(matches!(run_convergence(&cfg), Err(QhaError::Config(_))));
    }

    #[test]
    fn continuity_small_run() {
        let cfg = ExperimentConfig::new(ExperimentKind::Continuity, 16);
        let table = run_continuity(&cfg).unwrap();
        assert!(table.passed, "{}", table.to_csv());
        assert_eq!(table.rows.len(), 11);
    }

    #[test]
    fn berezin_lieb_small_run() {
        let mut cfg = ExperimentConfig::new(ExperimentKind::BerezinLieb, 8);
        cfg.repeats = Some(3);
        let table = run_berezin_lieb(&cfg).unwrap();
        assert!(table.passed, "{}", table.to_csv());
        assert_eq!(table.rows.len(), 3 * 3 * 2);
    }

    #[test]
    fn spanning_cases() {
        // zero-free Fourier-Wigner transform at L = 4 spans all 16 dimensions;
        // a generic (asymmetric, complex) rank-one operator is zero-free,
        // whereas the even real Gaussian has an exact zero at (2, 1)
        let sp = PhaseSpace::new(4);
        let psi = crate::signal::random_signal(&sp, 3);
        let s = OperatorMatrix::outer(&psi, &psi);
        assert_eq!(spanning_check(&sp, &s).unwrap(), 16);

        let g = gaussian_window(&sp, 1.0);
        let even = OperatorMatrix::outer(&g, &g);
        assert!(matches!(
            spanning_check(&sp, &even),
            Err(QhaError::FourierWignerZero(_))
        ));

        // identity: F_W vanishes off the origin
        assert!(matches!(
            spanning_check(&sp, &OperatorMatrix::identity(&sp)),
            Err(QhaError::FourierWignerZero(_))
        ));

        let sp2 = PhaseSpace::new(2);
        let psi2 = crate::signal::random_signal(&sp2, 5);
        let s2 = OperatorMatrix::outer(&psi2, &psi2);
        assert_eq!(spanning_check(&sp2, &s2).unwrap(), 4);
    }

    #[test]
    fn config_parses_from_json_and_toml() {
        let json = r#"{
            "experiment": "plateau",
            "L": 16,
            "lattice": [2, 2],
            "window": {"kind": "gaussian", "width": 1.0},
            "delta": 0.3,
            "region": [2.0, 4.0],
            "seed": 9
        }"#;
        let cfg: ExperimentConfig = serde_json::from_str(json).unwrap();
        assert_eq!(cfg.experiment, ExperimentKind::Plateau);
        assert_eq!(cfg.lattice, Some(LatticeField::One([2, 2])));
        assert_eq!(cfg.seed, 9);

        let json_list = r#"{
            "experiment": "converge",
            "L": 16,
            "lattice": [[4, 4], [1, 1]]
        }"#;
        let cfg2: ExperimentConfig = serde_json::from_str(json_list).unwrap();
        assert_eq!(cfg2.lattice, Some(LatticeField::Many(vec![[4, 4], [1, 1]])));

        let bad = r#"{"experiment": "plateau", "L": 16, "unknown_field": 3}"#;
        assert!(serde_json::from_str::<ExperimentConfig>(bad).is_err());
    }

    #[test]
    fn table_serialization_shapes() {
        let mut cfg = ExperimentConfig::new(ExperimentKind::Props, 4);
        cfg.repeats = Some(1);
        let table = run_props(&cfg).unwrap();
        let csv = table.to_csv();
        assert!(csv.contains("invariant,instances,max_deviation,tolerance,pass"));
        assert!(csv.contains("# status: pass"));
        let json = table.to_json();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["columns"][0], "invariant");
        assert_eq!(v["passed"], true);
    }
}
