//! Parametrized Hamiltonians θ ↦ H(θ).

use std::fmt;
use std::sync::Arc;

use crate::linalg::{max_abs, max_abs_diff, HermitianOperator};

/// A differentiable one-parameter family of Hermitian operators.
///
/// Implementations must be stateless: every method may be called
/// concurrently and must return the same value for the same θ.
pub trait HamiltonianFamily: Send + Sync {
    fn dim(&self) -> usize;

    fn value(&self, theta: f64) -> HermitianOperator;

    /// ∂H/∂θ.
    fn derivative(&self, theta: f64) -> HermitianOperator;

    /// ∂²H/∂θ², when the family knows it.
    fn second_derivative(&self, _theta: f64) -> Option<HermitianOperator> {
        None
    }
}

pub type SharedFamily = Arc<dyn HamiltonianFamily>;

impl<F: HamiltonianFamily + ?Sized> HamiltonianFamily for Arc<F> {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn value(&self, theta: f64) -> HermitianOperator {
        (**self).value(theta)
    }

    fn derivative(&self, theta: f64) -> HermitianOperator {
        (**self).derivative(theta)
    }

    fn second_derivative(&self, theta: f64) -> Option<HermitianOperator> {
        (**self).second_derivative(theta)
    }
}

impl<F: HamiltonianFamily + ?Sized> HamiltonianFamily for &F {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn value(&self, theta: f64) -> HermitianOperator {
        (**self).value(theta)
    }

    fn derivative(&self, theta: f64) -> HermitianOperator {
        (**self).derivative(theta)
    }

    fn second_derivative(&self, theta: f64) -> Option<HermitianOperator> {
        (**self).second_derivative(theta)
    }
}

type OperatorFn = Arc<dyn Fn(f64) -> HermitianOperator + Send + Sync>;

/// A family defined by closures. Without an analytic derivative, the
/// derivative is a central difference with the declared step.
#[derive(Clone)]
pub struct FnFamily {
    dim: usize,
    value: OperatorFn,
    derivative: Option<OperatorFn>,
    second_derivative: Option<OperatorFn>,
    fd_step: f64,
}

impl FnFamily {
    pub fn new<F>(dim: usize, value: F) -> Self
    where
        F: Fn(f64) -> HermitianOperator + Send + Sync + 'static,
    {
        Self {
            dim,
            value: Arc::new(value),
            derivative: None,
            second_derivative: None,
            fd_step: 1e-5,
        }
    }

    pub fn with_derivative<F>(mut self, derivative: F) -> Self
    where
        F: Fn(f64) -> HermitianOperator + Send + Sync + 'static,
    {
        self.derivative = Some(Arc::new(derivative));
        self
    }

    pub fn with_second_derivative<F>(mut self, second: F) -> Self
    where
        F: Fn(f64) -> HermitianOperator + Send + Sync + 'static,
    {
        self.second_derivative = Some(Arc::new(second));
        self
    }

    /// Step for the fallback central difference, scaled by max(1, |θ|).
    pub fn with_fd_step(mut self, step: f64) -> Self {
        self.fd_step = step;
        self
    }

    pub fn has_analytic_derivative(&self) -> bool {
        self.derivative.is_some()
    }
}

impl fmt::Debug for FnFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnFamily")
            .field("dim", &self.dim)
            .field("analytic_derivative", &self.derivative.is_some())
            .field("fd_step", &self.fd_step)
            .finish()
    }
}

impl HamiltonianFamily for FnFamily {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, theta: f64) -> HermitianOperator {
        (self.value)(theta)
    }

    fn derivative(&self, theta: f64) -> HermitianOperator {
        match &self.derivative {
            Some(d) => d(theta),
            None => central_difference(|x| (self.value)(x), theta, self.fd_step * theta.abs().max(1.0)),
        }
    }

    fn second_derivative(&self, theta: f64) -> Option<HermitianOperator> {
        self.second_derivative.as_ref().map(|d| d(theta))
    }
}

/// H(θ) = Σ_k θ^k C_k.
#[derive(Clone, Debug, PartialEq)]
pub struct PolynomialFamily {
    coefficients: Vec<HermitianOperator>,
}

impl PolynomialFamily {
    /// Panics when the coefficient list is empty or dimensions differ.
    pub fn new(coefficients: Vec<HermitianOperator>) -> Self {
        assert!(!coefficients.is_empty(), "PolynomialFamily: no coefficients");
        let dim = coefficients[0].dim();
        assert!(
            coefficients.iter().all(|c| c.dim() == dim),
            "PolynomialFamily: coefficient dimensions differ"
        );
        Self { coefficients }
    }

    pub fn coefficients(&self) -> &[HermitianOperator] {
        &self.coefficients
    }

    fn eval(&self, theta: f64, order: usize) -> HermitianOperator {
        let mut acc = HermitianOperator::zeros(self.dim());
        for (k, c) in self.coefficients.iter().enumerate().skip(order) {
            // k!/(k-order)! θ^(k-order)
            let falling: f64 = ((k - order + 1)..=k).map(|j| j as f64).product();
            acc = acc + c.scale(falling * theta.powi((k - order) as i32));
        }
        acc
    }
}

impl HamiltonianFamily for PolynomialFamily {
    fn dim(&self) -> usize {
        self.coefficients[0].dim()
    }

    fn value(&self, theta: f64) -> HermitianOperator {
        self.eval(theta, 0)
    }

    fn derivative(&self, theta: f64) -> HermitianOperator {
        self.eval(theta, 1)
    }

    fn second_derivative(&self, theta: f64) -> Option<HermitianOperator> {
        Some(self.eval(theta, 2))
    }
}

/// H(θ) ⊗ I on a probe-plus-ancilla space.
#[derive(Clone)]
pub struct AncillaFamily<F> {
    base: F,
    ancilla_dim: usize,
}

impl<F: HamiltonianFamily> AncillaFamily<F> {
    pub fn new(base: F, ancilla_dim: usize) -> Self {
        assert!(ancilla_dim > 0, "AncillaFamily: ancilla dimension must be positive");
        Self { base, ancilla_dim }
    }
}

impl<F: HamiltonianFamily> HamiltonianFamily for AncillaFamily<F> {
    fn dim(&self) -> usize {
        self.base.dim() * self.ancilla_dim
    }

    fn value(&self, theta: f64) -> HermitianOperator {
        self.base.value(theta).kron_identity(self.ancilla_dim)
    }

    fn derivative(&self, theta: f64) -> HermitianOperator {
        self.base.derivative(theta).kron_identity(self.ancilla_dim)
    }

    fn second_derivative(&self, theta: f64) -> Option<HermitianOperator> {
        self.base
            .second_derivative(theta)
            .map(|h| h.kron_identity(self.ancilla_dim))
    }
}

pub(crate) fn central_difference(
    f: impl Fn(f64) -> HermitianOperator,
    theta: f64,
    h: f64,
) -> HermitianOperator {
    (f(theta + h) - f(theta - h)).scale(0.5 / h)
}

/// Outcome of comparing a family's derivative with a central difference.
#[derive(Clone, Debug, PartialEq)]
pub struct DerivativeCheck {
    pub theta: f64,
    pub step: f64,
    pub max_deviation: f64,
    pub tolerance: f64,
}

impl DerivativeCheck {
    pub fn passed(&self) -> bool {
        self.max_deviation <= self.tolerance
    }
}

/// Checks ‖Ḣ(θ) − FD(H, θ, h)‖_max ≤ 1e-6·(1 + ‖Ḣ(θ)‖_max) with
/// h = 1e-5·max(1, |θ|). `tolerance_scale` multiplies the tolerance.
pub fn validate_derivative(
    family: &dyn HamiltonianFamily,
    theta: f64,
    tolerance_scale: f64,
) -> DerivativeCheck {
    let step = 1e-5 * theta.abs().max(1.0);
    let analytic = family.derivative(theta);
    let numeric = central_difference(|x| family.value(x), theta, step);
    let max_deviation = max_abs_diff(analytic.matrix(), numeric.matrix());
    let tolerance = tolerance_scale * 1e-6 * (1.0 + max_abs(analytic.matrix()));
    DerivativeCheck {
        theta,
        step,
        max_deviation,
        tolerance,
    }
}
