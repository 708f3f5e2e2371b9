//! Command-line interface: scene generation, per-stage checks, and structured
//! JSON reports.
//!
//! Exit codes: 0 when every check passes, 1 on check failures, 2 on parse or
//! configuration errors, 3 on internal errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use projvar::commands;
use projvar::config::{cmat_from_json, FundamentalMatrixFile, SceneConfig, SceneFile};
use projvar::report::SceneReport;
use projvar::scene::Scene;

#[derive(Parser)]
#[command(
    name = "projvar",
    version,
    about = "Two-view recovery of projective varieties over synthetic seeded scenes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ReportArgs {
    /// Scene file produced by `generate`.
    #[arg(long)]
    scene: PathBuf,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Tolerance overrides, NAME=VALUE; repeatable.
    #[arg(long = "tol", value_parser = parse_tolerance)]
    tol: Vec<(String, f64)>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a deterministic scene from a configuration file.
    Generate {
        /// Scene configuration (JSON).
        #[arg(long)]
        config: PathBuf,
        /// Output path of the scene file.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the configuration seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Fundamental matrix of one order: shape, rank profile, correspondence.
    Fundamental {
        #[command(flatten)]
        report: ReportArgs,
        /// Order of the fundamental matrix.
        #[arg(short, default_value_t = 2)]
        k: usize,
    },
    /// Generalized (and classical, at m = 3) Kruppa residuals at ground truth.
    KruppaCheck {
        #[command(flatten)]
        report: ReportArgs,
    },
    /// Perturbation trials of the constrained solver plus the isolation test.
    KruppaSolve {
        #[command(flatten)]
        report: ReportArgs,
        /// Number of seeded trials (defaults to the configuration value).
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Canonical-pair recovery and alignment checks.
    Recover {
        /// Scene file; alternatively pass --fmatrix.
        #[arg(long, conflicts_with = "fmatrix")]
        scene: Option<PathBuf>,
        /// JSON file with a reduced fundamental matrix {m, k, entries}.
        #[arg(long)]
        fmatrix: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long = "tol", value_parser = parse_tolerance)]
        tol: Vec<(String, f64)>,
    },
    /// Epipolar-fiber census of the cone intersection.
    Reconstruct {
        #[command(flatten)]
        report: ReportArgs,
        /// Number of sampled fibers.
        #[arg(long, default_value_t = 200)]
        fibers: usize,
    },
    /// Dimension diagnostics for ambient dimension M and total class C.
    Diagnose {
        m: usize,
        c: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_tolerance(raw: &str) -> Result<(String, f64), String> {
    let (name, value) = raw
        .split_once('=')
        .ok_or_else(|| format!("expected NAME=VALUE, got '{raw}'"))?;
    let value: f64 = value
        .parse()
        .map_err(|e| format!("invalid tolerance value '{value}': {e}"))?;
    Ok((name.to_string(), value))
}

enum CliError {
    Parse(String),
    Internal(String),
}

impl CliError {
    fn code(&self) -> ExitCode {
        match self {
            CliError::Parse(_) => ExitCode::from(2),
            CliError::Internal(_) => ExitCode::from(3),
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Parse(msg) | CliError::Internal(msg) => msg,
        }
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Parse(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Parse(format!("cannot parse {}: {e}", path.display())))
}

fn load_scene(path: &Path) -> Result<(Scene, SceneFile), CliError> {
    let file: SceneFile = read_json(path)?;
    let scene = file
        .to_scene()
        .map_err(|e| CliError::Parse(format!("invalid scene file: {e}")))?;
    Ok((scene, file))
}

fn effective_tolerances(
    file: Option<&SceneFile>,
    overrides: &[(String, f64)],
) -> std::collections::BTreeMap<String, f64> {
    let mut tol = match file {
        Some(f) => f.config.effective_tolerances(),
        None => projvar::config::default_tolerances(),
    };
    for (name, value) in overrides {
        tol.insert(name.clone(), *value);
    }
    tol
}

fn emit(report: &SceneReport, out: Option<&PathBuf>) -> Result<bool, CliError> {
    let json = report
        .to_json()
        .map_err(|e| CliError::Internal(format!("report emission failed: {e}")))?;
    match out {
        Some(path) => std::fs::write(path, json.as_bytes())
            .map_err(|e| CliError::Internal(format!("cannot write {}: {e}", path.display())))?,
        None => println!("{json}"),
    }
    for check in &report.checks {
        eprintln!(
            "{} {}: {:.3e} (threshold {:.3e})",
            if check.pass { "pass" } else { "FAIL" },
            check.name,
            check.value,
            check.threshold
        );
    }
    Ok(report.overall_pass)
}

fn run(cli: Cli) -> Result<bool, CliError> {
    match cli.command {
        Command::Generate { config, out, seed } => {
            let mut config: SceneConfig = read_json(&config)?;
            if let Some(seed) = seed {
                config.seed = seed;
            }
            config
                .validate()
                .map_err(|e| CliError::Parse(format!("invalid configuration: {e}")))?;
            let file = commands::cmd_generate(&config)
                .map_err(|e| CliError::Internal(format!("scene generation failed: {e}")))?;
            let json = serde_json::to_string_pretty(&file)
                .map_err(|e| CliError::Internal(format!("scene serialization failed: {e}")))?;
            match out {
                Some(path) => std::fs::write(&path, json.as_bytes()).map_err(|e| {
                    CliError::Internal(format!("cannot write {}: {e}", path.display()))
                })?,
                None => println!("{json}"),
            }
            Ok(true)
        }
        Command::Fundamental { report, k } => {
            let (scene, file) = load_scene(&report.scene)?;
            let tol = effective_tolerances(Some(&file), &report.tol);
            let fragment = commands::cmd_fundamental(&scene, k, &tol)
                .map_err(|e| CliError::Internal(format!("fundamental stage failed: {e}")))?;
            emit(&fragment, report.out.as_ref())
        }
        Command::KruppaCheck { report } => {
            let (scene, file) = load_scene(&report.scene)?;
            let tol = effective_tolerances(Some(&file), &report.tol);
            let fragment = commands::cmd_kruppa_check(&scene, &tol)
                .map_err(|e| CliError::Internal(format!("kruppa check failed: {e}")))?;
            emit(&fragment, report.out.as_ref())
        }
        Command::KruppaSolve { report, trials } => {
            let (scene, file) = load_scene(&report.scene)?;
            let tol = effective_tolerances(Some(&file), &report.tol);
            let mut solver = file.config.solver.clone();
            if let Some(trials) = trials {
                solver.trials = trials;
            }
            let fragment = commands::cmd_kruppa_solve(&scene, &tol, &solver)
                .map_err(|e| CliError::Internal(format!("kruppa solve failed: {e}")))?;
            emit(&fragment, report.out.as_ref())
        }
        Command::Recover {
            scene,
            fmatrix,
            out,
            tol,
        } => match (scene, fmatrix) {
            (Some(scene_path), None) => {
                let (scene, file) = load_scene(&scene_path)?;
                let tolerances = effective_tolerances(Some(&file), &tol);
                let fragment = commands::cmd_recover(&scene, &tolerances)
                    .map_err(|e| CliError::Internal(format!("recovery failed: {e}")))?;
                emit(&fragment, out.as_ref())
            }
            (None, Some(fmatrix_path)) => {
                let file: FundamentalMatrixFile = read_json(&fmatrix_path)?;
                let entries = cmat_from_json(&file.entries)
                    .map_err(|e| CliError::Parse(format!("invalid matrix: {e}")))?;
                let tolerances = effective_tolerances(None, &tol);
                let fragment = commands::cmd_recover_from_matrix(file.m, &entries, &tolerances)
                    .map_err(|e| CliError::Internal(format!("recovery failed: {e}")))?;
                emit(&fragment, out.as_ref())
            }
            _ => Err(CliError::Parse(
                "recover needs exactly one of --scene or --fmatrix".into(),
            )),
        },
        Command::Reconstruct { report, fibers } => {
            let (scene, file) = load_scene(&report.scene)?;
            let tol = effective_tolerances(Some(&file), &report.tol);
            let fragment = commands::cmd_reconstruct(&scene, fibers, &tol)
                .map_err(|e| CliError::Internal(format!("reconstruction failed: {e}")))?;
            emit(&fragment, report.out.as_ref())
        }
        Command::Diagnose { m, c, out } => {
            let fragment = commands::cmd_diagnose(m, c)
                .map_err(|e| CliError::Parse(format!("diagnose failed: {e}")))?;
            emit(&fragment, out.as_ref())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {}", err.message());
            err.code()
        }
    }
}
