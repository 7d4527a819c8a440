//! Grid evaluation and CSV/JSON emission.

use std::fmt::Write as _;
use std::path::Path;

use qfiext_core::qfi::channel_qfi_from_generator;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{PlannedRun, SweepSpec};
use crate::error::{CliError, Result};
use crate::model::{build_point, Method, Model};

pub const CSV_HEADER: &str = "sweep_value,channel_qfi,upper_bound,ratio,generator_method,estimated_error";

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Row {
    pub sweep_value: f64,
    pub channel_qfi: f64,
    pub upper_bound: f64,
    pub ratio: f64,
    pub generator_method: &'static str,
    pub estimated_error: f64,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct RunResult {
    pub label: Option<String>,
    pub rows: Vec<Row>,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct SweepResult {
    pub sweep_variable: String,
    pub runs: Vec<RunResult>,
}

#[derive(Clone, Debug, Default)]
pub struct SweepOptions {
    /// Worker threads; `None` uses every available processor.
    pub jobs: Option<usize>,
    /// Evaluate only the run with this label.
    pub run: Option<String>,
}

/// Evaluates every run of `spec` on its grid. Relative paths in the spec
/// resolve against `base_dir`.
pub fn run_sweep(spec: &SweepSpec, base_dir: &Path, options: &SweepOptions) -> Result<SweepResult> {
    spec.validate()?;
    let model = Model::load(spec.model, spec.family.as_ref().map(|f| base_dir.join(f)).as_deref())?;
    let mut plan = spec.plan();
    if let Some(label) = &options.run {
        plan.retain(|r| r.label.as_deref() == Some(label.as_str()));
        if plan.is_empty() {
            let labels: Vec<_> = spec.runs.iter().map(|r| r.label.as_str()).collect();
            return Err(CliError::Args(format!("no run labelled `{label}` (runs: {})", labels.join(", "))));
        }
    }
    for run in &plan {
        model.check_params(run.params.keys(), "fixed_params")?;
    }
    let grid = spec.grid.values();
    let tasks: Vec<(usize, f64)> = (0..plan.len())
        .flat_map(|r| grid.iter().map(move |&v| (r, v)))
        .collect();

    let evaluate = || -> Vec<Result<Row>> {
        tasks
            .par_iter()
            .map(|&(r, value)| evaluate_point(&model, &plan[r], &spec.sweep_variable, value, spec.method, base_dir))
            .collect()
    };
    let results = match options.jobs {
        Some(jobs) => rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build()
            .map_err(|e| CliError::Args(format!("cannot start {jobs} workers: {e}")))?
            .install(evaluate),
        None => evaluate(),
    };

    let mut rows = results.into_iter();
    let mut runs = Vec::with_capacity(plan.len());
    for run in &plan {
        let rows: Vec<Row> = rows.by_ref().take(grid.len()).collect::<Result<_>>()?;
        runs.push(RunResult {
            label: run.label.clone(),
            rows,
        });
    }
    Ok(SweepResult {
        sweep_variable: spec.sweep_variable.clone(),
        runs,
    })
}

fn evaluate_point(
    model: &Model,
    run: &PlannedRun,
    variable: &str,
    value: f64,
    method: Method,
    base_dir: &Path,
) -> Result<Row> {
    let mut params = run.params.clone();
    params.insert(variable.to_string(), value);
    let at = |source: qfiext_core::Error| CliError::AtPoint {
        variable: variable.to_string(),
        value,
        source,
    };
    let point_error = |e: CliError| match e {
        CliError::Model(source) => at(source),
        other => other,
    };
    let (family, theta, t) = build_point(model, run.extension.as_ref(), &params, base_dir).map_err(point_error)?;
    let generator = method.generator(&family, theta, t).map_err(at)?;
    let report = channel_qfi_from_generator(family.as_ref(), theta, t, &generator);
    let slack = 1e-9 * report.upper_bound + report.estimated_error;
    if !(report.channel_qfi <= report.upper_bound + slack) {
        return Err(CliError::Validation(format!(
            "at {variable} = {value}: channel QFI {} exceeds the upper bound {}",
            report.channel_qfi, report.upper_bound
        )));
    }
    Ok(Row {
        sweep_value: value,
        channel_qfi: report.channel_qfi,
        upper_bound: report.upper_bound,
        ratio: report.ratio,
        generator_method: report.generator_method.as_str(),
        estimated_error: report.estimated_error,
    })
}

/// Shortest round-trip representation.
pub fn format_float(x: f64) -> String {
    ryu::Buffer::new().format(x).to_string()
}

/// CSV text. A single unlabeled run is plain CSV; labeled runs are emitted
/// as consecutive sections, each introduced by a `# run=<label>` line.
pub fn to_csv(result: &SweepResult) -> String {
    let mut out = String::new();
    for run in &result.runs {
        if let Some(label) = &run.label {
            let _ = writeln!(out, "# run={label}");
        }
        out.push_str(CSV_HEADER);
        out.push('\n');
        for row in &run.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                format_float(row.sweep_value),
                format_float(row.channel_qfi),
                format_float(row.upper_bound),
                format_float(row.ratio),
                row.generator_method,
                format_float(row.estimated_error)
            );
        }
    }
    out
}

pub fn to_json(result: &SweepResult) -> String {
    let mut s = serde_json::to_string_pretty(result).expect("sweep results serialize");
    s.push('\n');
    s
}
