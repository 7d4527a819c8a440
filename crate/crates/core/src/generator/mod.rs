//! The local generator ℋ = i U(θ)† ∂_θ U(θ) of U(θ) = e^{−itH(θ)}.
//!
//! Three independent routes are provided:
//!
//! * [`generator_spectral`] evaluates the closed form in the eigenbasis
//!   {λ_k, |ψ_k⟩} of H(θ),
//!
//!   ```text
//!   ⟨ψ_l|ℋ|ψ_k⟩ = ⟨ψ_l|Ḣ|ψ_k⟩ · φ(λ_k − λ_l),   φ(x) = i (e^{−itx} − 1)/x,  φ(0) = t.
//!   ```
//!
//!   φ is continuous at 0, so the same expression covers degenerate and
//!   nearly degenerate spectra without any block bookkeeping.
//! * [`generator_quadrature`] integrates ℋ = t ∫_{−1}^{0} V(α) Ḣ V(α)† dα,
//!   V(α) = e^{−iαtH}, by Gauss–Legendre quadrature.
//! * [`generator_fd`] differentiates U(θ) by central differences.

mod family;
mod quadrature;

pub use family::{
    validate_derivative, AncillaFamily, DerivativeCheck, FnFamily, HamiltonianFamily,
    PolynomialFamily, SharedFamily,
};
pub use quadrature::GaussLegendre;

use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{expm_unitary, max_abs, max_abs_diff, CMatrix, HermitianOperator, C64};

/// Largest Gauss–Legendre order tried by [`generator_quadrature`].
pub const MAX_QUADRATURE_ORDER: usize = 1024;
/// Below this phase |t·Δλ| the exponential kernels use their Taylor series.
const SERIES_THRESHOLD: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GeneratorMethod {
    Spectral,
    Quadrature,
    FiniteDifference,
}

impl GeneratorMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            GeneratorMethod::Spectral => "spectral",
            GeneratorMethod::Quadrature => "quadrature",
            GeneratorMethod::FiniteDifference => "finite_difference",
        }
    }
}

impl fmt::Display for GeneratorMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorResult {
    pub generator: HermitianOperator,
    pub method: GeneratorMethod,
    /// Max-entry error estimate of `generator`.
    pub estimated_error: f64,
}

fn require_finite(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("must be finite, got {value}"),
        })
    }
}

fn evaluate(family: &dyn HamiltonianFamily, theta: f64) -> Result<(HermitianOperator, HermitianOperator)> {
    let h = family.value(theta);
    let hd = family.derivative(theta);
    for found in [h.dim(), hd.dim()] {
        if found != family.dim() {
            return Err(Error::DimensionMismatch {
                expected: family.dim(),
                found,
            });
        }
    }
    Ok((h, hd))
}

/// φ(x) = i (e^{−itx} − 1)/x with φ(0) = t.
fn spectral_kernel(t: f64, x: f64) -> C64 {
    let y = t * x;
    if y.abs() < SERIES_THRESHOLD {
        // t (e^z − 1)/z, z = −iy
        let z = C64::new(0.0, -y);
        (C64::new(1.0, 0.0) + z / 2.0 + z * z / 6.0 + z * z * z / 24.0) * t
    } else {
        let half = (0.5 * y).sin();
        C64::new(y.sin(), -2.0 * half * half) / x
    }
}

/// Closed-form generator from the eigendecomposition of H(θ).
pub fn generator_spectral(family: &dyn HamiltonianFamily, theta: f64, t: f64) -> Result<GeneratorResult> {
    require_finite("theta", theta)?;
    require_finite("t", t)?;
    let (h, hd) = evaluate(family, theta)?;
    let eig = h.eig();
    let lambda = eig.eigenvalues();
    let n = eig.dim();
    let hd_eig = eig.to_eigenbasis(hd.matrix());
    let in_basis = CMatrix::from_fn(n, n, |l, k| hd_eig[(l, k)] * spectral_kernel(t, lambda[k] - lambda[l]));
    let generator = HermitianOperator::hermitian_part(&eig.from_eigenbasis(&in_basis));
    // Eigenvalue errors of order ε‖H‖ enter through phases t·λ.
    let scale = t.abs() * hd.max_abs() * (1.0 + t.abs() * eig.spread());
    Ok(GeneratorResult {
        generator,
        method: GeneratorMethod::Spectral,
        estimated_error: f64::EPSILON * n as f64 * scale,
    })
}

/// Gauss–Legendre evaluation of t ∫_{−1}^{0} V(α) Ḣ V(α)† dα.
///
/// Starting at `order`, the order doubles until two successive rules agree to
/// 1e-9·(1 + ‖ℋ‖_max) or [`MAX_QUADRATURE_ORDER`] is exceeded, in which case
/// the best estimate is returned inside [`Error::QuadratureNotConverged`].
pub fn generator_quadrature(
    family: &dyn HamiltonianFamily,
    theta: f64,
    t: f64,
    order: usize,
) -> Result<GeneratorResult> {
    require_finite("theta", theta)?;
    require_finite("t", t)?;
    if order < 2 {
        return Err(Error::InvalidParameter {
            name: "order",
            reason: format!("quadrature order must be at least 2, got {order}"),
        });
    }
    let (h, hd) = evaluate(family, theta)?;
    let eig = h.eig();
    let n = h.dim();
    let integrate = |nodes: usize| -> CMatrix {
        let rule = GaussLegendre::new(nodes);
        let mut acc = CMatrix::zeros(n, n);
        for (alpha, w) in rule.on_interval(-1.0, 0.0) {
            let v = eig.evolution(alpha * t);
            acc += (v.matrix() * hd.matrix() * v.matrix().adjoint()) * C64::new(w * t, 0.0);
        }
        acc
    };

    let mut order = order;
    let mut coarse = integrate((order / 2).max(1));
    let mut fine = integrate(order);
    loop {
        let estimated_error = max_abs_diff(&fine, &coarse);
        let converged = estimated_error < 1e-9 * (1.0 + max_abs(&fine));
        let result = GeneratorResult {
            generator: HermitianOperator::hermitian_part(&fine),
            method: GeneratorMethod::Quadrature,
            estimated_error,
        };
        if converged {
            return Ok(result);
        }
        if order * 2 > MAX_QUADRATURE_ORDER {
            return Err(Error::QuadratureNotConverged {
                order,
                estimated_error,
                best: Box::new(result),
            });
        }
        order *= 2;
        coarse = fine;
        fine = integrate(order);
    }
}

/// cbrt(ε)·max(1, |θ|), the usual optimum for central differences.
pub fn default_fd_step(theta: f64) -> f64 {
    f64::EPSILON.cbrt() * theta.abs().max(1.0)
}

/// i U(θ)† [U(θ+h) − U(θ−h)]/(2h), Hermitized.
///
/// The error estimate is (4/3)‖D(h) − D(h/2)‖_max, the Richardson estimate
/// of the O(h²) truncation error of D(h).
pub fn generator_fd(family: &dyn HamiltonianFamily, theta: f64, t: f64, h: f64) -> Result<GeneratorResult> {
    require_finite("theta", theta)?;
    require_finite("t", t)?;
    let floor = 1e3 * f64::EPSILON * theta.abs().max(1.0);
    if !(h >= floor) || !h.is_finite() {
        return Err(Error::StepTooSmall { step: h, floor });
    }
    let (h0, _) = evaluate(family, theta)?;
    let u0_adj = expm_unitary(&h0, t).adjoint();
    let difference = |step: f64| -> HermitianOperator {
        let up = expm_unitary(&family.value(theta + step), t);
        let um = expm_unitary(&family.value(theta - step), t);
        let du = (up.matrix() - um.matrix()) / C64::new(2.0 * step, 0.0);
        let x = u0_adj.matrix() * du * C64::new(0.0, 1.0);
        HermitianOperator::hermitian_part(&x)
    };
    let coarse = difference(h);
    let fine = difference(0.5 * h);
    let estimated_error = 4.0 / 3.0 * max_abs_diff(coarse.matrix(), fine.matrix());
    Ok(GeneratorResult {
        generator: coarse,
        method: GeneratorMethod::FiniteDifference,
        estimated_error,
    })
}

/// Generator of K(θ) = θG + F at θ = 0, in the eigenbasis {f_i, |i⟩} of F:
///
/// ```text
/// 𝒦 = t Σ_i g_ii |i⟩⟨i| + i Σ_{i≠j} g_ij (1 − e^{it(f_i − f_j)})/(f_i − f_j) |i⟩⟨j|,
/// ```
///
/// with g_ij = ⟨i|G|j⟩. Pairs with |t(f_i − f_j)| < 1e-4 use the series of
/// (1 − e^{itx})/x → −it.
pub fn broken_phase_shift_generator_at_zero(
    g: &HermitianOperator,
    f: &HermitianOperator,
    t: f64,
) -> Result<HermitianOperator> {
    if g.dim() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            found: g.dim(),
        });
    }
    require_finite("t", t)?;
    let eig = f.eig();
    let fv = eig.eigenvalues();
    let gm = eig.to_eigenbasis(g.matrix());
    let n = f.dim();
    let i_unit = C64::new(0.0, 1.0);
    let k = CMatrix::from_fn(n, n, |i, j| {
        if i == j {
            return gm[(i, i)] * t;
        }
        let x = fv[i] - fv[j];
        let y = t * x;
        let ratio = if y.abs() < SERIES_THRESHOLD {
            // (1 − e^{iy})/x = −it (1 + iy/2 + (iy)²/6 + (iy)³/24)
            let iy = C64::new(0.0, y);
            -i_unit * t * (C64::new(1.0, 0.0) + iy / 2.0 + iy * iy / 6.0 + iy * iy * iy / 24.0)
        } else {
            (C64::new(1.0, 0.0) - C64::from_polar(1.0, y)) / x
        };
        i_unit * gm[(i, j)] * ratio
    });
    Ok(HermitianOperator::hermitian_part(&eig.from_eigenbasis(&k)))
}
