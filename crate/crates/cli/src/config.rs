//! Sweep specifications and the embedded presets.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::model::{ExtensionConfig, Method, ModelKind, Params, EXTENSION_PARAMETERS};

#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    #[default]
    Linear,
    Log,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    #[serde(default)]
    pub scale: Scale,
}

impl Grid {
    pub fn validate(&self) -> Result<()> {
        if self.points < 1 {
            return Err(CliError::spec("grid.points", "must be at least 1"));
        }
        if !self.start.is_finite() || !self.stop.is_finite() {
            return Err(CliError::spec("grid", "start and stop must be finite"));
        }
        if self.points > 1 && !(self.start < self.stop) {
            return Err(CliError::spec("grid.stop", "start must be below stop when points > 1"));
        }
        if self.scale == Scale::Log && !(self.start > 0.0) {
            return Err(CliError::spec("grid.start", "log scale requires start > 0"));
        }
        Ok(())
    }

    /// Grid values in ascending order; the end points are exact.
    pub fn values(&self) -> Vec<f64> {
        let n = self.points;
        if n == 1 {
            return vec![self.start];
        }
        let last = (n - 1) as f64;
        (0..n)
            .map(|i| {
                if i == 0 {
                    return self.start;
                }
                if i == n - 1 {
                    return self.stop;
                }
                let u = i as f64 / last;
                match self.scale {
                    Scale::Linear => self.start + (self.stop - self.start) * u,
                    Scale::Log => (self.start.ln() + (self.stop.ln() - self.start.ln()) * u).exp(),
                }
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(CliError::Args(format!("unknown format `{other}` (expected csv or json)"))),
        }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Output {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

/// One curve of a multi-run sweep.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extension: Option<ExtensionConfig>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub fixed_params: Params,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub model: ModelKind,
    /// Family file for `custom`, operators file for `broken-phase-shift`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extension: Option<ExtensionConfig>,
    pub sweep_variable: String,
    pub grid: Grid,
    #[serde(default)]
    pub fixed_params: Params,
    #[serde(default)]
    pub method: Method,
    /// Separate curves sharing the grid; each overrides `extension` and
    /// adds to `fixed_params`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub runs: Vec<RunSpec>,
    #[serde(default)]
    pub output: Output,
}

impl SweepSpec {
    pub fn from_json(text: &str, origin: &Path) -> Result<Self> {
        let spec: SweepSpec = serde_json::from_str(text).map_err(|e| CliError::parse(origin, &e))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        let allowed = |name: &str| self.model.parameters().contains(&name) || EXTENSION_PARAMETERS.contains(&name);
        if !allowed(&self.sweep_variable) {
            return Err(CliError::spec(
                "sweep_variable",
                format!("`{}` is not a parameter of model {}", self.sweep_variable, self.model),
            ));
        }
        for (k, v) in &self.fixed_params {
            if !allowed(k) {
                return Err(CliError::spec(format!("fixed_params.{k}"), format!("unknown for model {}", self.model)));
            }
            if !v.is_finite() {
                return Err(CliError::spec(format!("fixed_params.{k}"), "must be finite"));
            }
        }
        let mut labels = std::collections::BTreeSet::new();
        for (i, run) in self.runs.iter().enumerate() {
            if !labels.insert(run.label.as_str()) {
                return Err(CliError::spec(format!("runs[{i}].label"), "duplicate label"));
            }
            if run.label.contains(['\n', '\r']) {
                return Err(CliError::spec(format!("runs[{i}].label"), "must be a single line"));
            }
            for k in run.fixed_params.keys() {
                if !allowed(k) {
                    return Err(CliError::spec(format!("runs[{i}].fixed_params.{k}"), "unknown parameter"));
                }
            }
        }
        if matches!(self.model, ModelKind::Custom | ModelKind::BrokenPhaseShift) && self.family.is_none() {
            return Err(CliError::spec("family", format!("model {} needs a `family` file", self.model)));
        }
        Ok(())
    }

    /// The runs to evaluate; a spec without `runs` is a single unlabeled run.
    pub fn plan(&self) -> Vec<PlannedRun> {
        if self.runs.is_empty() {
            return vec![PlannedRun {
                label: None,
                extension: self.extension.clone(),
                params: self.fixed_params.clone(),
            }];
        }
        self.runs
            .iter()
            .map(|run| {
                let mut params = self.fixed_params.clone();
                params.extend(run.fixed_params.clone());
                PlannedRun {
                    label: Some(run.label.clone()),
                    extension: run.extension.clone().or_else(|| self.extension.clone()),
                    params,
                }
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlannedRun {
    pub label: Option<String>,
    pub extension: Option<ExtensionConfig>,
    pub params: Params,
}

pub struct Preset {
    pub name: &'static str,
    pub source: &'static str,
}

pub const PRESETS: &[Preset] = &[
    Preset {
        name: "fig1",
        source: include_str!("../presets/fig1.json"),
    },
    Preset {
        name: "fig2",
        source: include_str!("../presets/fig2.json"),
    },
    Preset {
        name: "fig3",
        source: include_str!("../presets/fig3.json"),
    },
];

pub fn preset(name: &str) -> Result<SweepSpec> {
    let p = PRESETS.iter().find(|p| p.name == name).ok_or_else(|| {
        let names: Vec<_> = PRESETS.iter().map(|p| p.name).collect();
        CliError::Args(format!("unknown preset `{name}` (available: {})", names.join(", ")))
    })?;
    SweepSpec::from_json(p.source, Path::new(p.name))
}
