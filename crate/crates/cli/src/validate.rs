//! Diagnostics for custom family files.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use qfiext_core::generator::{validate_derivative, DerivativeCheck, HamiltonianFamily};

use crate::custom::CustomFamily;
use crate::error::Result;
use crate::sweep::format_float;

/// θ values at which the derivative is checked.
pub fn check_points() -> Vec<f64> {
    (0..9).map(|i| -PI + 2.0 * PI * i as f64 / 8.0).collect()
}

#[derive(Clone, Debug)]
pub struct Diagnostics {
    pub dim: usize,
    pub terms: usize,
    pub checks: Vec<DerivativeCheck>,
    /// (θ, multiplicity of the smallest, multiplicity of the largest) eigenvalue of Ḣ.
    pub extremal_multiplicities: Vec<(f64, usize, usize)>,
}

impl Diagnostics {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(DerivativeCheck::passed)
    }

    pub fn max_deviation(&self) -> (f64, f64, f64) {
        self.checks
            .iter()
            .map(|c| (c.theta, c.max_deviation, c.tolerance))
            .fold((0.0, 0.0, 0.0), |best, c| if c.1 > best.1 { c } else { best })
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "dimension: {}", self.dim);
        let _ = writeln!(out, "terms: {}", self.terms);
        let _ = writeln!(out, "hermiticity: ok");
        for c in &self.checks {
            let _ = writeln!(
                out,
                "derivative at theta={}: max deviation {} (tolerance {}) {}",
                format_float(c.theta),
                format_float(c.max_deviation),
                format_float(c.tolerance),
                if c.passed() { "ok" } else { "MISMATCH" }
            );
        }
        for (theta, low, high) in &self.extremal_multiplicities {
            let status = if *low == 1 && *high == 1 { "non-degenerate" } else { "degenerate" };
            let _ = writeln!(
                out,
                "extremal eigenvalues of derivative at theta={}: multiplicities min={low} max={high} ({status})",
                format_float(*theta)
            );
        }
        let (theta, dev, tol) = self.max_deviation();
        if self.passed() {
            let _ = writeln!(out, "result: ok");
        } else {
            let _ = writeln!(
                out,
                "result: derivative mismatch, max deviation {} at theta={} exceeds tolerance {}",
                format_float(dev),
                format_float(theta),
                format_float(tol)
            );
        }
        out
    }
}

/// Loads and checks a custom family file. Parse errors and non-Hermitian
/// matrices are returned as errors; derivative mismatches are reported in
/// the diagnostics.
pub fn cmd_validate(path: &Path, tolerance_scale: f64) -> Result<Diagnostics> {
    let text = crate::model::read(path)?;
    let spec = serde_json::from_str(&text).map_err(|e| crate::error::CliError::parse(path, &e))?;
    let family = CustomFamily::from_spec(&spec)?;
    let points = check_points();
    let checks = points
        .iter()
        .map(|&theta| validate_derivative(&family, theta, tolerance_scale))
        .collect();
    let extremal_multiplicities = points
        .iter()
        .map(|&theta| {
            let (low, high) = family.derivative(theta).eig().extremal_multiplicities();
            (theta, low, high)
        })
        .collect();
    Ok(Diagnostics {
        dim: family.dim(),
        terms: spec.terms.len(),
        checks,
        extremal_multiplicities,
    })
}
