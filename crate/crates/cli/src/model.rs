//! Turning a model name, parameters and an optional extension into a family.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use qfiext_core::extensions::ExtensionSpec;
use qfiext_core::generator::{
    default_fd_step, generator_fd, generator_quadrature, generator_spectral, GeneratorMethod, GeneratorResult,
    SharedFamily,
};
use qfiext_core::linalg::HermitianOperator;
use qfiext_core::models::{
    broken_phase_shift_family, direction_family, nv_family, spin1_matrices, DirectionParams, NvParams,
    PhysicalConstants,
};
use serde::{Deserialize, Serialize};

use crate::custom::{CustomFamily, MatrixSpec};
use crate::error::{CliError, Result};

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Nv,
    Direction,
    BrokenPhaseShift,
    Custom,
}

impl ModelKind {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "nv" => Ok(ModelKind::Nv),
            "direction" => Ok(ModelKind::Direction),
            "broken-phase-shift" => Ok(ModelKind::BrokenPhaseShift),
            "custom" => Ok(ModelKind::Custom),
            other => Err(CliError::Args(format!(
                "unknown model `{other}` (expected nv, direction, broken-phase-shift or custom)"
            ))),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Nv => "nv",
            ModelKind::Direction => "direction",
            ModelKind::BrokenPhaseShift => "broken-phase-shift",
            ModelKind::Custom => "custom",
        }
    }

    /// Parameters the model itself understands.
    pub fn parameters(self) -> &'static [&'static str] {
        match self {
            ModelKind::Nv => &["bx", "by", "bz", "d", "e", "g", "t", "mu_b", "hbar"],
            ModelKind::Direction => &["b", "theta", "phi", "t", "g", "mu_b", "hbar"],
            ModelKind::BrokenPhaseShift | ModelKind::Custom => &["theta", "t"],
        }
    }

    /// The estimated parameter θ.
    pub fn theta_name(self) -> &'static str {
        match self {
            ModelKind::Nv => "bz",
            _ => "theta",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Parameters consumed by extensions rather than models.
pub const EXTENSION_PARAMETERS: &[&str] = &["beta", "theta0", "eps", "kappa"];

pub type Params = BTreeMap<String, f64>;

/// G and F of K(θ) = θG + F.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OperatorsSpec {
    pub g: MatrixSpec,
    pub f: MatrixSpec,
}

/// A model together with any operator data it needs.
#[derive(Clone, Debug)]
pub struct Model {
    pub kind: ModelKind,
    custom: Option<Arc<CustomFamily>>,
    operators: Option<(HermitianOperator, HermitianOperator)>,
}

impl Model {
    pub fn new(kind: ModelKind) -> Result<Self> {
        match kind {
            ModelKind::Nv | ModelKind::Direction => Ok(Self {
                kind,
                custom: None,
                operators: None,
            }),
            ModelKind::Custom => Err(CliError::Args("model custom requires a family file".into())),
            ModelKind::BrokenPhaseShift => Err(CliError::Args(
                "model broken-phase-shift requires an operators file with `g` and `f`".into(),
            )),
        }
    }

    pub fn custom(family: CustomFamily) -> Self {
        Self {
            kind: ModelKind::Custom,
            custom: Some(Arc::new(family)),
            operators: None,
        }
    }

    pub fn broken_phase_shift(spec: &OperatorsSpec) -> Result<Self> {
        let g = spec.g.to_operator()?;
        let f = spec.f.to_operator()?;
        broken_phase_shift_family(g.clone(), f.clone())?;
        Ok(Self {
            kind: ModelKind::BrokenPhaseShift,
            custom: None,
            operators: Some((g, f)),
        })
    }

    /// Builds the model from its name and an optional data file.
    pub fn load(kind: ModelKind, file: Option<&Path>) -> Result<Self> {
        match (kind, file) {
            (ModelKind::Custom, Some(path)) => Ok(Self::custom(CustomFamily::load(path)?)),
            (ModelKind::BrokenPhaseShift, Some(path)) => {
                let text = read(path)?;
                let spec: OperatorsSpec = serde_json::from_str(&text).map_err(|e| CliError::parse(path, &e))?;
                Self::broken_phase_shift(&spec)
            }
            (_, _) => Self::new(kind),
        }
    }

    /// Checks that every parameter name is known to the model or an extension.
    pub fn check_params<'a>(&self, names: impl IntoIterator<Item = &'a String>, field: &str) -> Result<()> {
        for name in names {
            if !self.kind.parameters().contains(&name.as_str()) && !EXTENSION_PARAMETERS.contains(&name.as_str()) {
                return Err(CliError::spec(
                    format!("{field}.{name}"),
                    format!(
                        "unknown parameter for model {} (expected one of {})",
                        self.kind,
                        self.kind
                            .parameters()
                            .iter()
                            .chain(EXTENSION_PARAMETERS)
                            .copied()
                            .collect::<Vec<_>>()
                            .join(", ")
                    ),
                ));
            }
        }
        Ok(())
    }

    /// Family, θ and t at one parameter point, before any extension.
    pub fn instantiate(&self, params: &Params) -> Result<Instance> {
        let get = |name: &str, default: f64| params.get(name).copied().unwrap_or(default);
        match self.kind {
            ModelKind::Nv => {
                let d = NvParams::default();
                let p = NvParams {
                    bx: get("bx", d.bx),
                    by: get("by", d.by),
                    bz: get("bz", d.bz),
                    d: get("d", d.d),
                    e: get("e", d.e),
                    g: get("g", d.g),
                    t: get("t", d.t),
                    constants: constants(params),
                };
                p.validate()?;
                Ok(Instance {
                    family: Arc::new(nv_family(&p)),
                    theta: p.bz,
                    t: p.t,
                    sz: Some(spin1_matrices().z.scale(p.gamma())),
                })
            }
            ModelKind::Direction => {
                let d = DirectionParams::default();
                let p = DirectionParams {
                    b: get("b", d.b),
                    theta: get("theta", d.theta),
                    phi: get("phi", d.phi),
                    t: get("t", d.t),
                    g: get("g", d.g),
                    constants: constants(params),
                };
                p.validate()?;
                Ok(Instance {
                    family: Arc::new(direction_family(&p)),
                    theta: p.theta,
                    t: p.t,
                    sz: Some(spin1_matrices().z.scale(p.larmor())),
                })
            }
            ModelKind::BrokenPhaseShift => {
                let (g, f) = self.operators.clone().expect("operators loaded");
                Ok(Instance {
                    family: Arc::new(broken_phase_shift_family(g, f)?),
                    theta: get("theta", 0.0),
                    t: get("t", 1.0),
                    sz: None,
                })
            }
            ModelKind::Custom => Ok(Instance {
                family: self.custom.clone().expect("custom family loaded"),
                theta: get("theta", 0.0),
                t: get("t", 1.0),
                sz: None,
            }),
        }
    }
}

fn constants(params: &Params) -> PhysicalConstants {
    let d = PhysicalConstants::default();
    PhysicalConstants {
        mu_b: params.get("mu_b").copied().unwrap_or(d.mu_b),
        hbar: params.get("hbar").copied().unwrap_or(d.hbar),
    }
}

pub(crate) fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub struct Instance {
    pub family: SharedFamily,
    pub theta: f64,
    pub t: f64,
    /// The model's field-along-z operator, when it has one.
    sz: Option<HermitianOperator>,
}

/// The operator added by an `add-operator` extension.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum OperatorSource {
    /// `"sz"`: γ S_z for nv, γB S_z for direction.
    Named(String),
    File { file: PathBuf },
    Matrix(MatrixSpec),
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ExtensionConfig {
    Flood {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        beta: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        theta0: Option<f64>,
    },
    Subtract {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        theta0: Option<f64>,
    },
    SubtractPerturbed {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        theta0: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        eps: Option<f64>,
    },
    AddOperator {
        operator: OperatorSource,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        eps: Option<f64>,
    },
}

impl ExtensionConfig {
    /// Parses `flood:beta=..,theta0=..`, `subtract:theta0=..`,
    /// `subtract-perturbed:theta0=..,eps=..` or
    /// `add-operator:file=..|operator=sz,eps=..`.
    pub fn parse(text: &str) -> Result<Self> {
        let (kind, rest) = text.split_once(':').unwrap_or((text, ""));
        let mut values = BTreeMap::new();
        for pair in rest.split(',').filter(|s| !s.is_empty()) {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| CliError::Args(format!("extension field `{pair}` is not key=value")))?;
            values.insert(k.trim().to_string(), v.trim().to_string());
        }
        let mut take_f64 = |name: &str| -> Result<Option<f64>> {
            values
                .remove(name)
                .map(|v| {
                    v.parse::<f64>()
                        .map_err(|_| CliError::Args(format!("extension field {name}={v} is not a number")))
                })
                .transpose()
        };
        let config = match kind {
            "flood" => ExtensionConfig::Flood {
                beta: take_f64("beta")?,
                theta0: take_f64("theta0")?,
            },
            "subtract" => ExtensionConfig::Subtract {
                theta0: take_f64("theta0")?,
            },
            "subtract-perturbed" => ExtensionConfig::SubtractPerturbed {
                theta0: take_f64("theta0")?,
                eps: take_f64("eps")?,
            },
            "add-operator" => {
                let eps = take_f64("eps")?.or(take_f64("kappa")?);
                let operator = match (values.remove("file"), values.remove("operator")) {
                    (Some(file), None) => OperatorSource::File { file: file.into() },
                    (None, Some(name)) => OperatorSource::Named(name),
                    _ => {
                        return Err(CliError::Args(
                            "add-operator needs exactly one of file=<path> or operator=sz".into(),
                        ))
                    }
                };
                ExtensionConfig::AddOperator { operator, eps }
            }
            other => {
                return Err(CliError::Args(format!(
                    "unknown extension `{other}` (expected flood, subtract, subtract-perturbed or add-operator)"
                )))
            }
        };
        if let Some(extra) = values.keys().next() {
            return Err(CliError::Args(format!("extension {kind} has no field `{extra}`")));
        }
        Ok(config)
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ExtensionConfig::Flood { .. } => "flood",
            ExtensionConfig::Subtract { .. } => "subtract",
            ExtensionConfig::SubtractPerturbed { .. } => "subtract-perturbed",
            ExtensionConfig::AddOperator { .. } => "add-operator",
        }
    }

    /// Resolves defaults and parameter overrides at one point. Parameters
    /// `beta`, `theta0`, `eps` and `kappa` take precedence over the
    /// configured values; θ₀ defaults to the current θ.
    pub fn resolve(&self, params: &Params, instance: &Instance, base_dir: &Path) -> Result<ExtensionSpec> {
        let over = |name: &str, configured: Option<f64>| params.get(name).copied().or(configured);
        let theta0 = |configured: Option<f64>| over("theta0", configured).unwrap_or(instance.theta);
        let require = |name: &str, v: Option<f64>| {
            v.ok_or_else(|| CliError::spec(format!("extension.{name}"), format!("{} needs `{name}`", self.kind())))
        };
        let spec = match self {
            ExtensionConfig::Flood { beta, theta0: t0 } => ExtensionSpec::Flood {
                beta: require("beta", over("beta", *beta))?,
                theta0: theta0(*t0),
            },
            ExtensionConfig::Subtract { theta0: t0 } => ExtensionSpec::Subtract { theta0: theta0(*t0) },
            ExtensionConfig::SubtractPerturbed { theta0: t0, eps } => ExtensionSpec::SubtractPerturbed {
                theta0: theta0(*t0),
                epsilon: require("eps", over("eps", *eps))?,
            },
            ExtensionConfig::AddOperator { operator, eps } => {
                let epsilon = require("eps", over("kappa", over("eps", *eps)))?;
                let operator = match operator {
                    OperatorSource::Named(name) if name == "sz" => instance.sz.clone().ok_or_else(|| {
                        CliError::spec("extension.operator", "`sz` is only defined for the nv and direction models")
                    })?,
                    OperatorSource::Named(name) => {
                        return Err(CliError::spec(
                            "extension.operator",
                            format!("unknown operator `{name}` (expected sz, a matrix or a file)"),
                        ))
                    }
                    OperatorSource::File { file } => {
                        let path = base_dir.join(file);
                        let text = read(&path)?;
                        let m: MatrixSpec = serde_json::from_str(&text).map_err(|e| CliError::parse(&path, &e))?;
                        m.to_operator()?
                    }
                    OperatorSource::Matrix(m) => m.to_operator()?,
                };
                ExtensionSpec::AddOperator { operator, epsilon }
            }
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    #[default]
    Spectral,
    Quadrature,
    FiniteDifference,
}

impl Method {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "spectral" => Ok(Method::Spectral),
            "quadrature" => Ok(Method::Quadrature),
            "finite_difference" => Ok(Method::FiniteDifference),
            other => Err(CliError::Args(format!(
                "unknown method `{other}` (expected spectral, quadrature or finite_difference)"
            ))),
        }
    }

    pub fn generator(self, family: &SharedFamily, theta: f64, t: f64) -> qfiext_core::Result<GeneratorResult> {
        match self {
            Method::Spectral => generator_spectral(family.as_ref(), theta, t),
            Method::Quadrature => generator_quadrature(family.as_ref(), theta, t, 16),
            Method::FiniteDifference => generator_fd(family.as_ref(), theta, t, default_fd_step(theta)),
        }
    }

    pub fn core(self) -> GeneratorMethod {
        match self {
            Method::Spectral => GeneratorMethod::Spectral,
            Method::Quadrature => GeneratorMethod::Quadrature,
            Method::FiniteDifference => GeneratorMethod::FiniteDifference,
        }
    }
}

/// The evaluated family at one point: model plus extension.
pub fn build_point(
    model: &Model,
    extension: Option<&ExtensionConfig>,
    params: &Params,
    base_dir: &Path,
) -> Result<(SharedFamily, f64, f64)> {
    let instance = model.instantiate(params)?;
    let family = match extension {
        Some(ext) => {
            let spec = ext.resolve(params, &instance, base_dir)?;
            Arc::new(spec.apply(instance.family.clone())?) as SharedFamily
        }
        None => instance.family.clone(),
    };
    Ok((family, instance.theta, instance.t))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extension_strings() {
        assert_eq!(
            ExtensionConfig::parse("flood:beta=0.1,theta0=2").unwrap(),
            ExtensionConfig::Flood {
                beta: Some(0.1),
                theta0: Some(2.0)
            }
        );
        assert_eq!(
            ExtensionConfig::parse("subtract").unwrap(),
            ExtensionConfig::Subtract { theta0: None }
        );
        assert_eq!(
            ExtensionConfig::parse("add-operator:operator=sz,eps=10").unwrap(),
            ExtensionConfig::AddOperator {
                operator: OperatorSource::Named("sz".into()),
                eps: Some(10.0)
            }
        );
        assert!(ExtensionConfig::parse("flood:beta=x").is_err());
        assert!(ExtensionConfig::parse("flood:gamma=1").is_err());
        assert!(ExtensionConfig::parse("shift:beta=1").is_err());
        assert!(ExtensionConfig::parse("add-operator:eps=1").is_err());
    }

    #[test]
    fn extension_json() {
        let e: ExtensionConfig = serde_json::from_str(r#"{"kind": "add-operator", "operator": "sz", "eps": 1}"#).unwrap();
        assert_eq!(e.kind(), "add-operator");
        let e: ExtensionConfig =
            serde_json::from_str(r#"{"kind": "add-operator", "operator": {"re": [[1]]}, "eps": 1}"#).unwrap();
        assert!(matches!(e, ExtensionConfig::AddOperator { operator: OperatorSource::Matrix(_), .. }));
    }

    #[test]
    fn theta0_defaults_to_current_theta() {
        let model = Model::new(ModelKind::Direction).unwrap();
        let params: Params = [("theta".to_string(), 0.8)].into();
        let inst = model.instantiate(&params).unwrap();
        let spec = ExtensionConfig::Subtract { theta0: None }
            .resolve(&params, &inst, Path::new("."))
            .unwrap();
        assert_eq!(spec, ExtensionSpec::Subtract { theta0: 0.8 });
    }

    #[test]
    fn unknown_parameter_rejected() {
        let model = Model::new(ModelKind::Nv).unwrap();
        let err = model.check_params(&["bq".to_string()], "fixed_params").unwrap_err();
        assert!(err.to_string().contains("fixed_params.bq"));
        model.check_params(&["bz".to_string(), "beta".to_string()], "fixed_params").unwrap();
    }
}
