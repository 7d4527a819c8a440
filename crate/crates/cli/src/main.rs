use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qfiext_cli::config::{preset, Format, SweepSpec, PRESETS};
use qfiext_cli::error::exit;
use qfiext_cli::model::{ExtensionConfig, Method, Model, ModelKind};
use qfiext_cli::report::{cmd_report, parse_params, ReportRequest};
use qfiext_cli::sweep::{run_sweep, to_csv, to_json, SweepOptions};
use qfiext_cli::validate::cmd_validate;
use qfiext_cli::{CliError, Result};

#[derive(Parser)]
#[command(name = "qfiext", version, about = "Channel quantum Fisher information of extended Hamiltonians")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate channel QFI, upper bound and ratio over a parameter grid
    Sweep {
        /// Embedded preset (see `presets`)
        #[arg(long, conflicts_with = "config", required_unless_present = "config")]
        preset: Option<String>,
        /// JSON sweep specification
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output file; stdout when absent
        #[arg(long)]
        out: Option<PathBuf>,
        /// csv or json
        #[arg(long)]
        format: Option<String>,
        /// Worker threads (default: available processors)
        #[arg(long)]
        jobs: Option<usize>,
        /// Only evaluate the run with this label
        #[arg(long)]
        run: Option<String>,
    },
    /// Evaluate a single point and print a JSON report
    Report {
        /// nv, direction, broken-phase-shift or custom
        #[arg(long)]
        model: String,
        /// Family file (custom) or operators file with `g` and `f` (broken-phase-shift)
        #[arg(long, alias = "operators")]
        family: Option<PathBuf>,
        /// Model or extension parameter, k=v
        #[arg(long = "param")]
        params: Vec<String>,
        /// flood:beta=..,theta0=.. | subtract:theta0=.. |
        /// subtract-perturbed:theta0=..,eps=.. | add-operator:file=..|operator=sz,eps=..
        #[arg(long)]
        extension: Option<String>,
        /// spectral, quadrature or finite_difference
        #[arg(long, default_value = "spectral")]
        method: String,
        /// Random restarts of the brute-force oracle
        #[arg(long, default_value_t = 8)]
        starts: usize,
    },
    /// Check a custom family file
    Validate { file: PathBuf },
    /// List the embedded presets
    Presets,
}

fn env_f64(name: &str, default: f64) -> Result<f64> {
    match std::env::var(name) {
        Ok(v) => v
            .trim()
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite() && *x > 0.0)
            .ok_or_else(|| CliError::Args(format!("{name}={v} is not a positive number"))),
        Err(_) => Ok(default),
    }
}

fn env_seed() -> Result<u64> {
    match std::env::var("QFIEXT_SEED") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Args(format!("QFIEXT_SEED={v} is not an unsigned integer"))),
        Err(_) => Ok(0),
    }
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| CliError::Io {
            path: p.to_path_buf(),
            source,
        }),
        None => {
            use std::io::Write;
            match std::io::stdout().lock().write_all(text.as_bytes()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::Io {
                    path: PathBuf::from("<stdout>"),
                    source: e,
                }),
                _ => Ok(()),
            }
        }
    }
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Sweep {
            preset: name,
            config,
            out,
            format,
            jobs,
            run,
        } => {
            let (spec, base_dir) = match (name, config) {
                (Some(name), _) => (preset(&name)?, PathBuf::from(".")),
                (None, Some(path)) => {
                    let text = std::fs::read_to_string(&path).map_err(|source| CliError::Io {
                        path: path.clone(),
                        source,
                    })?;
                    let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
                    (SweepSpec::from_json(&text, &path)?, dir)
                }
                (None, None) => return Err(CliError::Args("sweep needs --preset or --config".into())),
            };
            let format = match format {
                Some(f) => Format::parse(&f)?,
                None => spec.output.format,
            };
            let result = run_sweep(&spec, &base_dir, &SweepOptions { jobs, run })?;
            let text = match format {
                Format::Csv => to_csv(&result),
                Format::Json => to_json(&result),
            };
            let out = out.or_else(|| spec.output.path.as_ref().map(|p| base_dir.join(p)));
            write_output(out.as_deref(), &text)?;
            Ok(exit::OK)
        }
        Command::Report {
            model,
            family,
            params,
            extension,
            method,
            starts,
        } => {
            let kind = ModelKind::parse(&model)?;
            let request = ReportRequest {
                model: Model::load(kind, family.as_deref())?,
                params: parse_params(&params)?,
                extension: extension.as_deref().map(ExtensionConfig::parse).transpose()?,
                method: Method::parse(&method)?,
                seed: env_seed()?,
                brute_starts: starts.max(1),
                tolerance_scale: env_f64("QFIEXT_TOL", 1.0)?,
            };
            let report = cmd_report(&request, Path::new("."))?;
            let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
            text.push('\n');
            write_output(None, &text)?;
            Ok(exit::OK)
        }
        Command::Validate { file } => {
            let diagnostics = cmd_validate(&file, env_f64("QFIEXT_TOL", 1.0)?)?;
            write_output(None, &diagnostics.render())?;
            Ok(if diagnostics.passed() { exit::OK } else { exit::VALIDATION_FAILURE })
        }
        Command::Presets => {
            use std::fmt::Write as _;
            let mut out = String::new();
            for p in PRESETS {
                let spec = preset(p.name)?;
                let _ = writeln!(out, "{}", p.name);
                if let Some(d) = &spec.description {
                    let _ = writeln!(out, "  {d}");
                }
                let _ = writeln!(out, "  model: {}", spec.model);
                let _ = writeln!(
                    out,
                    "  sweep: {} from {} to {} ({} points, {:?})",
                    spec.sweep_variable, spec.grid.start, spec.grid.stop, spec.grid.points, spec.grid.scale
                );
                let fixed: Vec<String> = spec.fixed_params.iter().map(|(k, v)| format!("{k}={v}")).collect();
                let _ = writeln!(out, "  fixed: {}", fixed.join(", "));
                for run in spec.plan() {
                    let ext = run
                        .extension
                        .map(|e| serde_json::to_string(&e).expect("extension serializes"))
                        .unwrap_or_else(|| "none".into());
                    let _ = writeln!(out, "  run {}: extension {ext}", run.label.as_deref().unwrap_or("-"));
                }
            }
            write_output(None, &out)?;
            Ok(exit::OK)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { exit::INVALID_ARGUMENTS } else { exit::OK };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
