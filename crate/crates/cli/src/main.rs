use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use hardy_cli::{
    emit_report, parse_ladder, parse_map_file, parse_points_file, parse_reals, run_analyze, CliError,
    OutputFormat, RunConfig, EXIT_NOT_SELF_MAP,
};
use hardy_core::certify::certify_self_map;
use hardy_core::kernels::{norm_kernel_check, PointSets};
use hardy_core::operator::{build_with, default_radius, OperatorConfig};

#[derive(Parser)]
#[command(name = "hardy", version, about = "Composition operators on the Hardy space of the half-plane")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Truncation ladder, e.g. "16,32,64", or "none".
    #[arg(long, global = true)]
    truncations: Option<String>,

    /// PSD tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Exponents for the Hᵖ norm, e.g. "1,2,4".
    #[arg(long, global = true)]
    p: Option<String>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Include per-stage durations in the report.
    #[arg(long, global = true)]
    timings: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Full analysis: certificate, angular derivative, verdict, kernel checks and numerics.
    Analyze { map: PathBuf },
    /// Self-map certificate only.
    Certify { map: PathBuf },
    /// Truncated matrix of the disk model.
    Matrix {
        map: PathBuf,
        #[arg(long, default_value_t = 32)]
        n: usize,
        /// Coefficient extraction radius (defaults by size).
        #[arg(long)]
        rho: Option<f64>,
    },
    /// Positivity of the norm kernel at a given λ.
    Psd {
        map: PathBuf,
        #[arg(long)]
        lambda: f64,
        /// "auto" or a JSON file of [re, im] points.
        #[arg(long, default_value = "auto")]
        points: String,
    },
}

fn map_id(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "map".to_string())
}

fn config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::default();
    if let Some(t) = &cli.truncations {
        cfg.truncations = parse_ladder(t)?;
    }
    if let Some(tol) = cli.tol {
        cfg.psd_tol = tol;
    }
    if let Some(p) = &cli.p {
        cfg.p_values = parse_reals(p)?;
    }
    cfg.format = match cli.format {
        Format::Json => OutputFormat::Json,
        Format::Csv => OutputFormat::Csv,
    };
    cfg.timings = cli.timings;
    cfg.validate()?;
    Ok(cfg)
}

fn to_json<T: serde::Serialize>(value: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(value).map_err(|e| CliError::Internal(e.to_string()))
}

fn run(cli: &Cli) -> Result<(String, i32), CliError> {
    let cfg = config(cli)?;
    match &cli.command {
        Command::Analyze { map } => {
            let spec = parse_map_file(map)?;
            let report = run_analyze(&spec, &map_id(map), &cfg)?;
            Ok((emit_report(&report, cfg.format)?, report.exit_code()))
        }
        Command::Certify { map } => {
            let spec = parse_map_file(map)?;
            let cert = certify_self_map(&spec, &cfg.certify)?;
            let code = if cert.is_violation() { EXIT_NOT_SELF_MAP } else { 0 };
            Ok((to_json(&cert)?, code))
        }
        Command::Matrix { map, n, rho } => {
            let spec = parse_map_file(map)?;
            if *n == 0 {
                return Err(CliError::Usage("--n must be positive".into()));
            }
            let radius = rho.unwrap_or_else(|| default_radius(*n));
            if !(radius > 0.0 && radius < 1.0) {
                return Err(CliError::Usage("--rho must lie in (0, 1)".into()));
            }
            let op = build_with(
                &spec,
                *n,
                &OperatorConfig {
                    radius: Some(radius),
                    ..cfg.operator.clone()
                },
            )?;
            if op.aliasing_warning {
                eprintln!(
                    "warning: trailing coefficients at {:.3e} of the column scale; results may be aliased",
                    op.aliasing_indicator
                );
            }
            let text = match cfg.format {
                OutputFormat::Csv => op.to_csv(),
                OutputFormat::Json => to_json(&op)?,
            };
            Ok((text, 0))
        }
        Command::Psd { map, lambda, points } => {
            let spec = parse_map_file(map)?;
            if !(*lambda > 0.0 && lambda.is_finite()) {
                return Err(CliError::Usage("--lambda must be positive".into()));
            }
            let sets: Vec<_> = if points == "auto" {
                let gen = PointSets::<f64>::default();
                (0..cfg.psd_sets).map(|i| gen.set(i)).collect()
            } else {
                vec![parse_points_file(Path::new(points))?]
            };
            let reports = sets
                .iter()
                .map(|s| norm_kernel_check(&spec, *lambda, s, cfg.psd_tol))
                .collect::<Result<Vec<_>, _>>()?;
            Ok((to_json(&reports)?, 0))
        }
    }
}

fn main() -> ExitCode {
    if let Some(n) = std::env::var("HARDY_NUM_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|n| *n > 0)
    {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            let code = if e.use_stderr() { 64 } else { 0 };
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok((text, code)) => {
            let mut out = std::io::stdout().lock();
            let _ = writeln!(out, "{}", text.trim_end());
            ExitCode::from(code as u8)
        }
        Err(e) => {
            eprintln!("hardy: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
