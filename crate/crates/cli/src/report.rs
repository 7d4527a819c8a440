//! Single-point evaluation.

use std::path::Path;

use qfiext_core::qfi::{channel_qfi_brute, channel_qfi_from_generator, check_saturation_with, SATURATION_TOL};
use serde::Serialize;

use crate::error::Result;
use crate::model::{build_point, ExtensionConfig, Method, Model, Params};

#[derive(Clone, Debug)]
pub struct ReportRequest {
    pub model: Model,
    pub params: Params,
    pub extension: Option<ExtensionConfig>,
    pub method: Method,
    pub seed: u64,
    pub brute_starts: usize,
    /// Multiplies the saturation tolerance.
    pub tolerance_scale: f64,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Saturation {
    pub verdict: &'static str,
    pub witness: Option<(usize, usize)>,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Report {
    pub model: &'static str,
    pub params: Params,
    pub extension: Option<ExtensionConfig>,
    pub theta: f64,
    pub t: f64,
    pub channel_qfi: f64,
    pub upper_bound: f64,
    pub ratio: f64,
    pub generator_method: &'static str,
    pub estimated_error: f64,
    pub brute_force_qfi: f64,
    pub saturation: Saturation,
    /// [re, im] pairs.
    pub optimal_probe: Vec<[f64; 2]>,
}

pub fn cmd_report(request: &ReportRequest, base_dir: &Path) -> Result<Report> {
    request
        .model
        .check_params(request.params.keys(), "param")?;
    let (family, theta, t) = build_point(&request.model, request.extension.as_ref(), &request.params, base_dir)?;
    let generator = request.method.generator(&family, theta, t)?;
    let report = channel_qfi_from_generator(family.as_ref(), theta, t, &generator);
    let saturation = check_saturation_with(family.as_ref(), theta, SATURATION_TOL * request.tolerance_scale);
    let brute = channel_qfi_brute(family.as_ref(), theta, t, request.brute_starts, request.seed)?;
    Ok(Report {
        model: request.model.kind.as_str(),
        params: request.params.clone(),
        extension: request.extension.clone(),
        theta,
        t,
        channel_qfi: report.channel_qfi,
        upper_bound: report.upper_bound,
        ratio: report.ratio,
        generator_method: report.generator_method.as_str(),
        estimated_error: report.estimated_error,
        brute_force_qfi: brute,
        saturation: Saturation {
            verdict: saturation.verdict.as_str(),
            witness: saturation.witness,
        },
        optimal_probe: report
            .optimal_probe
            .amplitudes()
            .iter()
            .map(|z| [z.re, z.im])
            .collect(),
    })
}

/// Parses `k=v` into a parameter map.
pub fn parse_params(pairs: &[String]) -> Result<Params> {
    let mut params = Params::new();
    for pair in pairs {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| crate::error::CliError::Args(format!("parameter `{pair}` is not key=value")))?;
        let value: f64 = v
            .trim()
            .parse()
            .map_err(|_| crate::error::CliError::Args(format!("parameter {k}={v} is not a number")))?;
        if !value.is_finite() {
            return Err(crate::error::CliError::Args(format!("parameter {k} must be finite")));
        }
        params.insert(k.trim().to_string(), value);
    }
    Ok(params)
}
