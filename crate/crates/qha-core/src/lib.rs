//! Finite-dimensional quantum harmonic analysis on the phase space
//! `Z_L x Z_L`: time-frequency shifts, measure-operator convolutions,
//! mixed-state Gabor frames and multipliers, eigenvalue-plateau analysis,
//! Berezin-Lieb inequalities and reproducible experiment runners.
//!
//! All conventions (the symplectic kernel sign, Haar weight `1/L`, cocycle
//! phases) are frozen by brute-force oracles at small `L` in the module
//! tests; see the normalization ledger in the README.

pub mod conv;
pub mod error;
pub mod experiments;
pub mod frames;
pub mod multipliers;
pub mod operator;
pub mod phase;
pub mod qhaop;
pub mod signal;
pub mod spectral;
pub mod tfa;

pub use conv::{
    convolution_theorem_residual, fourier_wigner, fourier_wigner_inverse, function_op_conv,
    measure_op_conv, op_op_conv, s_tilde, symplectic_dft_grid, symplectic_dft_measure,
};
pub use error::{QhaError, Result};
pub use experiments::{
    build_window_operator, run_berezin_lieb, run_continuity, run_convergence, run_experiment,
    run_plateau, run_props, spanning_check, Cell, ExperimentConfig, ExperimentKind, LatticeField,
    OutputFormat, RegionField, ResultTable, WindowSpec,
};
pub use frames::{
    augment_data_operator, frame_bounds, frame_operator, frame_transform_under_convolution,
    mixed_state_from_windows, tighten, FrameReport,
};
pub use multipliers::{
    amalgam_norm, berezin_lieb_lower, berezin_lieb_upper, discretize_mask, gabor_multiplier,
    localization_operator, mixed_multiplier_region, plateau_analysis, MaskSpec, PlateauReport,
};
pub use operator::{
    adjoint_shift, adjoint_shift_signal, conjugate_by_shift, measure_check, parity_conjugate,
    shift_signal, tf_shift, DiscreteMeasure, OperatorMatrix,
};
pub use phase::{symplectic_form, LatticeSpec, PhasePoint, PhaseSpace, RegionSpec};
pub use qhaop::{from_json as qhaop_from_json, to_json as qhaop_to_json, QhaopObject};
pub use signal::{gaussian_window, hermite_window, random_signal, random_signal_with, Signal};
pub use spectral::{
    hermitian_eig, inv_sqrt_psd, matrix_function, min_eigenvalue, schatten_norm, trace_norm,
    ScalarMap, SpectralData,
};
pub use tfa::{cohen_q, cohen_q_cross, spectrogram, stft, stft_naive, PhaseGrid};
