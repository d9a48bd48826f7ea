//! `qha` — command-line runner for the finite quantum-harmonic-analysis
//! experiment suite.
//!
//! Exit codes: 0 on success, 1 on assertion failure, 2 on configuration
//! errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64 as C64;
use qha_core::experiments::{ExperimentConfig, ExperimentKind, OutputFormat};
use qha_core::qhaop::{from_json, to_json, QhaopObject};
use qha_core::{
    gaussian_window, run_experiment, spectrogram, DiscreteMeasure, OperatorMatrix, PhasePoint,
    PhaseSpace, QhaError,
};

#[derive(Parser)]
#[command(
    name = "qha",
    version,
    about = "Quantum harmonic analysis experiments on the finite phase space Z_L x Z_L"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalue-plateau sweep over box radii
    Plateau(RunArgs),
    /// Gabor-multiplier to localization-operator convergence
    Converge(RunArgs),
    /// Continuity of multipliers in the window and the mask
    Continuity(RunArgs),
    /// Berezin-Lieb inequality sweep
    BerezinLieb(RunArgs),
    /// Invariant property-test suite
    Props(RunArgs),
    /// Write a sample QHAOP v1 file
    Save(SaveArgs),
    /// Read a QHAOP v1 file, print a summary, optionally rewrite it
    Load(LoadArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Path to a JSON or TOML config mirroring ExperimentConfig
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write the result table here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format
    #[arg(long, value_enum)]
    format: Option<CliFormat>,
    /// Seed override
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (accepted for interface stability; execution is
    /// single-threaded and results never depend on this value)
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum CliFormat {
    Csv,
    Json,
}

#[derive(Args)]
struct SaveArgs {
    /// Destination path
    #[arg(long)]
    out: PathBuf,
    /// Object kind to generate
    #[arg(long, value_enum, default_value_t = SaveKind::Operator)]
    kind: SaveKind,
    /// Signal length L
    #[arg(long, default_value_t = 16)]
    l: usize,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum SaveKind {
    Operator,
    Signal,
    Measure,
    Grid,
}

#[derive(Args)]
struct LoadArgs {
    /// QHAOP v1 file to read
    file: PathBuf,
    /// Re-serialize the object here (round-trip)
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Plateau(a) => run(ExperimentKind::Plateau, a),
        Command::Converge(a) => run(ExperimentKind::Converge, a),
        Command::Continuity(a) => run(ExperimentKind::Continuity, a),
        Command::BerezinLieb(a) => run(ExperimentKind::BerezinLieb, a),
        Command::Props(a) => run(ExperimentKind::Props, a),
        Command::Save(a) => save(a),
        Command::Load(a) => load(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(classify(&e))
        }
    }
}

/// Exit code for an error: 2 for configuration problems, 1 otherwise.
fn classify(e: &QhaError) -> u8 {
    match e {
        QhaError::Config(_)
        | QhaError::Format(_)
        | QhaError::Io(_)
        | QhaError::NonDivisorLattice(..)
        | QhaError::RegionTooLarge(..)
        | QhaError::BadDelta(_)
        | QhaError::InvalidExponent(_) => 2,
        _ => 1,
    }
}

fn default_l(kind: ExperimentKind) -> usize {
    match kind {
        ExperimentKind::Plateau => 96,
        ExperimentKind::Converge => 64,
        ExperimentKind::Continuity => 32,
        ExperimentKind::BerezinLieb => 16,
        ExperimentKind::Props => 16,
    }
}

fn read_config(path: &Path, kind: ExperimentKind) -> Result<ExperimentConfig, QhaError> {
    let text = std::fs::read_to_string(path)?;
    let by_toml = path.extension().and_then(|e| e.to_str()) == Some("toml");
    let cfg: ExperimentConfig = if by_toml {
        toml::from_str(&text).map_err(|e| QhaError::Config(format!("{}: {e}", path.display())))?
    } else {
        serde_json::from_str(&text)
            .map_err(|e| QhaError::Config(format!("{}: {e}", path.display())))?
    };
    if cfg.experiment != kind {
        return Err(QhaError::Config(format!(
            "config file is for a different experiment ({:?})",
            cfg.experiment
        )));
    }
    Ok(cfg)
}

fn run(kind: ExperimentKind, args: RunArgs) -> Result<ExitCode, QhaError> {
    let mut cfg = match &args.config {
        Some(path) => read_config(path, kind)?,
        None => ExperimentConfig::new(kind, default_l(kind)),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(format) = args.format {
        cfg.format = Some(match format {
            CliFormat::Csv => OutputFormat::Csv,
            CliFormat::Json => OutputFormat::Json,
        });
    }
    if let Some(out) = &args.out {
        cfg.out = Some(out.display().to_string());
    }
    let _ = args.threads; // single-threaded; accepted for interface stability

    let table = run_experiment(&cfg)?;
    let rendered = match cfg.format.unwrap_or(OutputFormat::Csv) {
        OutputFormat::Csv => table.to_csv(),
        OutputFormat::Json => table.to_json(),
    };
    match &cfg.out {
        Some(path) => std::fs::write(path, rendered)?,
        None => print!("{rendered}"),
    }
    Ok(if table.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn save(args: SaveArgs) -> Result<ExitCode, QhaError> {
    if args.l == 0 {
        return Err(QhaError::Config("L must be positive".to_string()));
    }
    let space = PhaseSpace::new(args.l);
    let g = gaussian_window(&space, 1.0);
    let obj = match args.kind {
        SaveKind::Signal => QhaopObject::Signal(g),
        SaveKind::Operator => QhaopObject::Operator(OperatorMatrix::outer(&g, &g)),
        SaveKind::Grid => QhaopObject::Grid(spectrogram(&g, &g)?),
        SaveKind::Measure => QhaopObject::Measure(DiscreteMeasure::from_atoms([
            (PhasePoint::origin(), C64::new(1.0, 0.0)),
            (
                PhasePoint::new(&space, 1, 1),
                C64::new(0.5, 0.0),
            ),
        ])),
    };
    std::fs::write(&args.out, to_json(&space, &obj)?)?;
    println!("wrote {} (kind {}, L = {})", args.out.display(), obj.kind(), args.l);
    Ok(ExitCode::SUCCESS)
}

fn load(args: LoadArgs) -> Result<ExitCode, QhaError> {
    let text = std::fs::read_to_string(&args.file)?;
    let (space, obj) = from_json(&text)?;
    let summary = match &obj {
        QhaopObject::Operator(a) => format!(
            "operator, L = {}, trace = {:.6} + {:.6}i, max entry = {:.6}",
            space.len(),
            a.trace().re,
            a.trace().im,
            a.max_norm()
        ),
        QhaopObject::Signal(s) => {
            format!("signal, L = {}, norm = {:.6}", space.len(), s.norm())
        }
        QhaopObject::Measure(m) => format!(
            "measure, L = {}, atoms = {}, total variation = {:.6}",
            space.len(),
            m.atoms.len(),
            m.total_variation()
        ),
        QhaopObject::Grid(g) => format!(
            "grid, L = {}, max entry = {:.6}",
            space.len(),
            g.max_norm()
        ),
    };
    println!("{summary}");
    if let Some(out) = &args.out {
        std::fs::write(out, to_json(&space, &obj)?)?;
        println!("rewrote {}", out.display());
    }
    Ok(ExitCode::SUCCESS)
}
