//! User-defined families: H(θ) = Σ_k c_k(θ) M_k from a JSON file.
//!
//! ```json
//! {
//!   "dim": 2,
//!   "terms": [
//!     {"coefficient": "linear", "matrix": {"re": [[1, 0], [0, -1]]}},
//!     {"coefficient": "cos", "scale": 0.5, "frequency": 2, "phase": 0.1,
//!      "matrix": {"re": [[0, 1], [1, 0]], "im": [[0, 0], [0, 0]]}}
//!   ]
//! }
//! ```
//!
//! Coefficients are `const` (s), `linear` (sθ), `sin` (s sin(fθ + p)) and
//! `cos` (s cos(fθ + p)); their derivatives are analytic. An optional
//! `derivative_terms` list, in the same format, replaces the analytic
//! derivative and is what `validate` checks against finite differences.

use std::path::Path;

use qfiext_core::generator::HamiltonianFamily;
use qfiext_core::linalg::HermitianOperator;
use qfiext_core::Error as CoreError;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MatrixSpec {
    pub re: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<Vec<f64>>>,
}

impl MatrixSpec {
    pub fn to_operator(&self) -> std::result::Result<HermitianOperator, CoreError> {
        HermitianOperator::from_parts(&self.re, self.im.as_deref())
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Coefficient {
    Const,
    Linear,
    Sin,
    Cos,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub coefficient: Coefficient,
    #[serde(default = "one")]
    pub scale: f64,
    #[serde(default = "one")]
    pub frequency: f64,
    #[serde(default)]
    pub phase: f64,
    pub matrix: MatrixSpec,
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CustomFamilySpec {
    pub dim: usize,
    pub terms: Vec<TermSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub derivative_terms: Option<Vec<TermSpec>>,
}

#[derive(Clone, Debug)]
struct Term {
    coefficient: Coefficient,
    scale: f64,
    frequency: f64,
    phase: f64,
    matrix: HermitianOperator,
}

impl Term {
    /// d^order/dθ^order of the coefficient.
    fn coefficient(&self, theta: f64, order: u32) -> f64 {
        let (s, f, x) = (self.scale, self.frequency, self.frequency * theta + self.phase);
        match (self.coefficient, order) {
            (Coefficient::Const, 0) => s,
            (Coefficient::Const, _) => 0.0,
            (Coefficient::Linear, 0) => s * theta,
            (Coefficient::Linear, 1) => s,
            (Coefficient::Linear, _) => 0.0,
            (Coefficient::Sin, 0) => s * x.sin(),
            (Coefficient::Sin, 1) => s * f * x.cos(),
            (Coefficient::Sin, _) => -s * f * f * x.sin(),
            (Coefficient::Cos, 0) => s * x.cos(),
            (Coefficient::Cos, 1) => -s * f * x.sin(),
            (Coefficient::Cos, _) => -s * f * f * x.cos(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CustomFamily {
    dim: usize,
    terms: Vec<Term>,
    derivative_override: Option<Vec<Term>>,
}

impl CustomFamily {
    pub fn from_spec(spec: &CustomFamilySpec) -> Result<Self> {
        if spec.dim == 0 {
            return Err(CliError::spec("dim", "must be at least 1"));
        }
        if spec.terms.is_empty() {
            return Err(CliError::spec("terms", "at least one term is required"));
        }
        let terms = build_terms(spec.dim, &spec.terms, "terms")?;
        let derivative_override = spec
            .derivative_terms
            .as_ref()
            .map(|t| build_terms(spec.dim, t, "derivative_terms"))
            .transpose()?;
        Ok(Self {
            dim: spec.dim,
            terms,
            derivative_override,
        })
    }

    pub fn from_json(text: &str, origin: &Path) -> Result<Self> {
        let spec: CustomFamilySpec = serde_json::from_str(text).map_err(|e| CliError::parse(origin, &e))?;
        Self::from_spec(&spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text, path)
    }

    pub fn has_derivative_override(&self) -> bool {
        self.derivative_override.is_some()
    }

    fn sum(&self, terms: &[Term], theta: f64, order: u32) -> HermitianOperator {
        terms.iter().fold(HermitianOperator::zeros(self.dim), |acc, term| {
            acc + term.matrix.scale(term.coefficient(theta, order))
        })
    }
}

fn build_terms(dim: usize, specs: &[TermSpec], field: &str) -> Result<Vec<Term>> {
    specs
        .iter()
        .enumerate()
        .map(|(k, spec)| {
            for (name, v) in [("scale", spec.scale), ("frequency", spec.frequency), ("phase", spec.phase)] {
                if !v.is_finite() {
                    return Err(CliError::spec(format!("{field}[{k}].{name}"), "must be finite"));
                }
            }
            let matrix = spec.matrix.to_operator().map_err(CliError::Model)?;
            if matrix.dim() != dim {
                return Err(CliError::Model(CoreError::DimensionMismatch {
                    expected: dim,
                    found: matrix.dim(),
                }));
            }
            Ok(Term {
                coefficient: spec.coefficient,
                scale: spec.scale,
                frequency: spec.frequency,
                phase: spec.phase,
                matrix,
            })
        })
        .collect()
}

impl HamiltonianFamily for CustomFamily {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, theta: f64) -> HermitianOperator {
        self.sum(&self.terms, theta, 0)
    }

    fn derivative(&self, theta: f64) -> HermitianOperator {
        match &self.derivative_override {
            Some(terms) => self.sum(terms, theta, 0),
            None => self.sum(&self.terms, theta, 1),
        }
    }

    fn second_derivative(&self, theta: f64) -> Option<HermitianOperator> {
        match &self.derivative_override {
            Some(terms) => Some(self.sum(terms, theta, 1)),
            None => Some(self.sum(&self.terms, theta, 2)),
        }
    }
}
