//! Hamiltonian extensions: θ-independent offsets added to a family.
//!
//! Every transformer here returns an [`ExtendedFamily`], H(θ) + O with the
//! offset O fixed at construction, so the derivative of the source family is
//! kept unchanged.

use crate::error::{Error, Result};
use crate::generator::{HamiltonianFamily, SharedFamily};
use crate::linalg::{commutator, expm_unitary, HermitianOperator, PureState, C64};

#[derive(Clone, Debug, PartialEq)]
pub enum ExtensionSpec {
    /// H(θ) + β Ḣ(θ₀).
    Flood { beta: f64, theta0: f64 },
    /// H(θ) − H(θ₀).
    Subtract { theta0: f64 },
    /// H(θ) − H(θ₀ + ε).
    SubtractPerturbed { theta0: f64, epsilon: f64 },
    /// H(θ) + ε V.
    AddOperator { operator: HermitianOperator, epsilon: f64 },
}

impl ExtensionSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            ExtensionSpec::Flood { beta, theta0 } => {
                finite("beta", *beta)?;
                finite("theta0", *theta0)
            }
            ExtensionSpec::Subtract { theta0 } => finite("theta0", *theta0),
            ExtensionSpec::SubtractPerturbed { theta0, epsilon } => {
                finite("theta0", *theta0)?;
                finite("epsilon", *epsilon)
            }
            ExtensionSpec::AddOperator { epsilon, .. } => finite("epsilon", *epsilon),
        }
    }

    pub fn apply(&self, family: SharedFamily) -> Result<ExtendedFamily> {
        match self {
            ExtensionSpec::Flood { beta, theta0 } => flood(family, *theta0, *beta),
            ExtensionSpec::Subtract { theta0 } => subtract(family, *theta0),
            ExtensionSpec::SubtractPerturbed { theta0, epsilon } => subtract_perturbed(family, *theta0, *epsilon),
            ExtensionSpec::AddOperator { operator, epsilon } => add_operator(family, operator, *epsilon),
        }
    }
}

fn finite(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("must be finite, got {value}"),
        })
    }
}

/// H(θ) + offset.
#[derive(Clone)]
pub struct ExtendedFamily {
    base: SharedFamily,
    offset: HermitianOperator,
}

impl ExtendedFamily {
    pub fn new(base: SharedFamily, offset: HermitianOperator) -> Result<Self> {
        if offset.dim() != base.dim() {
            return Err(Error::DimensionMismatch {
                expected: base.dim(),
                found: offset.dim(),
            });
        }
        Ok(Self { base, offset })
    }

    pub fn base(&self) -> &SharedFamily {
        &self.base
    }

    pub fn offset(&self) -> &HermitianOperator {
        &self.offset
    }
}

impl std::fmt::Debug for ExtendedFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ExtendedFamily")
            .field("dim", &self.base.dim())
            .field("offset", &self.offset)
            .finish()
    }
}

impl HamiltonianFamily for ExtendedFamily {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn value(&self, theta: f64) -> HermitianOperator {
        &self.base.value(theta) + &self.offset
    }

    fn derivative(&self, theta: f64) -> HermitianOperator {
        self.base.derivative(theta)
    }

    fn second_derivative(&self, theta: f64) -> Option<HermitianOperator> {
        self.base.second_derivative(theta)
    }
}

/// Signal flooding H(θ) + β Ḣ(θ₀).
pub fn flood(family: SharedFamily, theta0: f64, beta: f64) -> Result<ExtendedFamily> {
    finite("theta0", theta0)?;
    finite("beta", beta)?;
    let offset = family.derivative(theta0).scale(beta);
    ExtendedFamily::new(family, offset)
}

/// H(θ) − H(θ₀).
pub fn subtract(family: SharedFamily, theta0: f64) -> Result<ExtendedFamily> {
    finite("theta0", theta0)?;
    let offset = -family.value(theta0);
    ExtendedFamily::new(family, offset)
}

/// H(θ) − H(θ₀ + ε).
pub fn subtract_perturbed(family: SharedFamily, theta0: f64, epsilon: f64) -> Result<ExtendedFamily> {
    finite("theta0", theta0)?;
    finite("epsilon", epsilon)?;
    let offset = -family.value(theta0 + epsilon);
    ExtendedFamily::new(family, offset)
}

/// H(θ) + ε V.
pub fn add_operator(family: SharedFamily, operator: &HermitianOperator, epsilon: f64) -> Result<ExtendedFamily> {
    finite("epsilon", epsilon)?;
    ExtendedFamily::new(family, operator.scale(epsilon))
}

/// Second-order prediction of t²‖Ḣ(θ₀)‖²_sn − C for H(θ) − H(θ₀ + ε) at θ₀:
///
/// ```text
/// −i ε² t³ (e₁ − e_d)(⟨1|Γ|1⟩ − ⟨d|Γ|d⟩),   Γ = [Ḧ(θ₀), Ḣ(θ₀)]/2,
/// ```
///
/// where e₁ > … > e_d are the eigenvalues of Ḣ(θ₀) with eigenvectors |1⟩, |d⟩.
/// Γ is anti-Hermitian, so its diagonal is imaginary and the product real.
pub fn predicted_subtraction_deficit(family: &dyn HamiltonianFamily, theta0: f64, epsilon: f64, t: f64) -> Result<f64> {
    let hd = family.derivative(theta0);
    let hdd = family.second_derivative(theta0).ok_or(Error::MissingSecondDerivative)?;
    let eig = hd.eig();
    let d = eig.dim();
    if d == 1 {
        return Ok(0.0);
    }
    if eig.extremal_multiplicities() != (1, 1) {
        return Err(Error::DegenerateExtremalEigenvalues);
    }
    let gamma = commutator(&hdd, &hd)? * C64::new(0.5, 0.0);
    let top = eig.vector(d - 1);
    let bottom = eig.vector(0);
    let g_top = top.dotc(&(&gamma * &top));
    let g_bottom = bottom.dotc(&(&gamma * &bottom));
    let value = C64::new(0.0, -1.0) * epsilon * epsilon * t.powi(3) * eig.spread() * (g_top - g_bottom);
    Ok(value.re)
}

/// λ_i + ε⟨ψ_i|V|ψ_i⟩ over the ascending spectrum of H.
pub fn perturbed_eigenvalues_first_order(h: &HermitianOperator, v: &HermitianOperator, epsilon: f64) -> Result<Vec<f64>> {
    if h.dim() != v.dim() {
        return Err(Error::DimensionMismatch {
            expected: h.dim(),
            found: v.dim(),
        });
    }
    let eig = h.eig();
    for i in 1..eig.dim() {
        if eig.degenerate(i - 1, i) {
            return Err(Error::DegenerateSpectrum { lower: i - 1, upper: i });
        }
    }
    Ok(eig
        .eigenvalues()
        .iter()
        .enumerate()
        .map(|(i, &lambda)| {
            let psi = eig.vector(i);
            lambda + epsilon * psi.dotc(&(v.matrix() * &psi)).re
        })
        .collect())
}

/// QFI of e^{−it(H(θ₀) + βḢ(θ₀))}|ψ₀⟩ with respect to β, by central
/// differences of the final state with step 1e-5·max(1, |β|).
pub fn flooding_beta_qfi(family: &dyn HamiltonianFamily, theta0: f64, beta: f64, t: f64, psi0: &PureState) -> Result<f64> {
    if psi0.dim() != family.dim() {
        return Err(Error::DimensionMismatch {
            expected: family.dim(),
            found: psi0.dim(),
        });
    }
    let h0 = family.value(theta0);
    let hd = family.derivative(theta0);
    let evolve = |b: f64| expm_unitary(&(&h0 + &hd.scale(b)), t).matrix() * psi0.amplitudes();
    let step = 1e-5 * beta.abs().max(1.0);
    let psi = evolve(beta);
    let dpsi = (evolve(beta + step) - evolve(beta - step)) / C64::new(2.0 * step, 0.0);
    let overlap = psi.dotc(&dpsi);
    Ok(4.0 * (dpsi.norm_squared() - overlap.norm_sqr()))
}
