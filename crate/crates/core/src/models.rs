//! Physical Hamiltonians in SI units, converted to angular frequencies.
//!
//! Magnetic fields are in tesla and times in seconds. A Zeeman term
//! g μ_B B·S/ħ becomes γ B·S with γ = g μ_B/ħ in rad s⁻¹ T⁻¹; zero-field
//! splittings are given directly in rad/s.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::extensions::{add_operator, flood, ExtendedFamily};
use crate::generator::{HamiltonianFamily, SharedFamily};
use crate::linalg::{CMatrix, HermitianOperator, C64};

/// Bohr magneton in J/T.
pub const MU_B: f64 = 9.2740100783e-24;
/// Reduced Planck constant in J·s.
pub const HBAR: f64 = 1.054571817e-34;
/// Landé factor of the NV center.
pub const NV_G: f64 = 2.003;
/// Axial zero-field splitting, 2π × 2.87 GHz.
pub const NV_D: f64 = 2.0 * PI * 2.87e9;
/// Off-axis zero-field splitting, 2π × 5 MHz.
pub const NV_E: f64 = 2.0 * PI * 5e6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhysicalConstants {
    pub mu_b: f64,
    pub hbar: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self { mu_b: MU_B, hbar: HBAR }
    }
}

impl PhysicalConstants {
    /// g μ_B/ħ.
    pub fn gyromagnetic_ratio(&self, g: f64) -> f64 {
        g * self.mu_b / self.hbar
    }
}

/// Dimensionless spin-1 matrices with S_z = diag(1, 0, −1).
#[derive(Clone, Debug, PartialEq)]
pub struct Spin1 {
    pub x: HermitianOperator,
    pub y: HermitianOperator,
    pub z: HermitianOperator,
}

pub fn spin1_matrices() -> Spin1 {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let zero = C64::new(0.0, 0.0);
    let re = C64::new(r, 0.0);
    let im = C64::new(0.0, r);
    let x = CMatrix::from_row_slice(3, 3, &[zero, re, zero, re, zero, re, zero, re, zero]);
    let y = CMatrix::from_row_slice(3, 3, &[zero, -im, zero, im, zero, -im, zero, im, zero]);
    Spin1 {
        x: HermitianOperator::new(x).expect("S_x is Hermitian"),
        y: HermitianOperator::new(y).expect("S_y is Hermitian"),
        z: HermitianOperator::diagonal(&[1.0, 0.0, -1.0]),
    }
}

/// K(θ) = θG + F.
#[derive(Clone, Debug, PartialEq)]
pub struct BrokenPhaseShiftFamily {
    g: HermitianOperator,
    f: HermitianOperator,
}

impl BrokenPhaseShiftFamily {
    pub fn g(&self) -> &HermitianOperator {
        &self.g
    }

    pub fn f(&self) -> &HermitianOperator {
        &self.f
    }
}

impl HamiltonianFamily for BrokenPhaseShiftFamily {
    fn dim(&self) -> usize {
        self.g.dim()
    }

    fn value(&self, theta: f64) -> HermitianOperator {
        &self.g.scale(theta) + &self.f
    }

    fn derivative(&self, _theta: f64) -> HermitianOperator {
        self.g.clone()
    }

    fn second_derivative(&self, _theta: f64) -> Option<HermitianOperator> {
        Some(HermitianOperator::zeros(self.g.dim()))
    }
}

pub fn broken_phase_shift_family(g: HermitianOperator, f: HermitianOperator) -> Result<BrokenPhaseShiftFamily> {
    if g.dim() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: g.dim(),
            found: f.dim(),
        });
    }
    Ok(BrokenPhaseShiftFamily { g, f })
}

/// NV-center triplet. Fields in tesla, D and E in rad/s, t in seconds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NvParams {
    pub bx: f64,
    pub by: f64,
    pub bz: f64,
    pub d: f64,
    pub e: f64,
    pub g: f64,
    pub t: f64,
    pub constants: PhysicalConstants,
}

impl Default for NvParams {
    fn default() -> Self {
        Self {
            bx: 0.0,
            by: 0.0,
            bz: 0.0,
            d: NV_D,
            e: NV_E,
            g: NV_G,
            t: 1e-3,
            constants: PhysicalConstants::default(),
        }
    }
}

impl NvParams {
    pub fn gamma(&self) -> f64 {
        self.constants.gyromagnetic_ratio(self.g)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("bx", self.bx),
            ("by", self.by),
            ("bz", self.bz),
            ("d", self.d),
            ("e", self.e),
            ("g", self.g),
            ("t", self.t),
        ] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be finite, got {v}"),
                });
            }
        }
        Ok(())
    }
}

/// H_NV = γ(B_x S_x + B_y S_y + B_z S_z) + D S_z² + E(S_x² − S_y²) as a
/// family in θ = B_z: G = γ S_z, F = the remaining terms.
pub fn nv_family(params: &NvParams) -> BrokenPhaseShiftFamily {
    let s = spin1_matrices();
    let gamma = params.gamma();
    let g = s.z.scale(gamma);
    let zeeman = &s.x.scale(gamma * params.bx) + &s.y.scale(gamma * params.by);
    let zfs = &s.z.square().scale(params.d) + &(&s.x.square() - &s.y.square()).scale(params.e);
    BrokenPhaseShiftFamily { g, f: &zeeman + &zfs }
}

/// H_NV + β γ S_z.
pub fn nv_flooded_family(params: &NvParams, beta: f64) -> Result<ExtendedFamily> {
    let base: SharedFamily = Arc::new(nv_family(params));
    flood(base, params.bz, beta)
}

/// Free spin-1 in a field of magnitude B along (θ, φ).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DirectionParams {
    pub b: f64,
    pub theta: f64,
    pub phi: f64,
    pub t: f64,
    pub g: f64,
    pub constants: PhysicalConstants,
}

impl Default for DirectionParams {
    fn default() -> Self {
        Self {
            b: 1e-9,
            theta: PI / 3.0,
            phi: PI / 4.0,
            t: 1e-2,
            g: NV_G,
            constants: PhysicalConstants::default(),
        }
    }
}

impl DirectionParams {
    pub fn gamma(&self) -> f64 {
        self.constants.gyromagnetic_ratio(self.g)
    }

    /// γB in rad/s.
    pub fn larmor(&self) -> f64 {
        self.gamma() * self.b
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("theta", self.theta), ("phi", self.phi), ("t", self.t), ("g", self.g)] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be finite, got {v}"),
                });
            }
        }
        if !(self.b >= 0.0) || !self.b.is_finite() {
            return Err(Error::InvalidParameter {
                name: "b",
                reason: format!("field magnitude must be finite and non-negative, got {}", self.b),
            });
        }
        Ok(())
    }
}

/// H(θ) = γB(sinθ cosφ S_x + sinθ sinφ S_y + cosθ S_z), parameter θ.
#[derive(Clone, Debug, PartialEq)]
pub struct DirectionFamily {
    larmor: f64,
    phi: f64,
    spin: Spin1,
}

impl DirectionFamily {
    fn field(&self, nx: f64, ny: f64, nz: f64) -> HermitianOperator {
        let w = self.larmor;
        &(&self.spin.x.scale(w * nx) + &self.spin.y.scale(w * ny)) + &self.spin.z.scale(w * nz)
    }
}

impl HamiltonianFamily for DirectionFamily {
    fn dim(&self) -> usize {
        3
    }

    fn value(&self, theta: f64) -> HermitianOperator {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        self.field(st * cp, st * sp, ct)
    }

    fn derivative(&self, theta: f64) -> HermitianOperator {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        self.field(ct * cp, ct * sp, -st)
    }

    fn second_derivative(&self, theta: f64) -> Option<HermitianOperator> {
        Some(-self.value(theta))
    }
}

pub fn direction_family(params: &DirectionParams) -> DirectionFamily {
    DirectionFamily {
        larmor: params.larmor(),
        phi: params.phi,
        spin: spin1_matrices(),
    }
}

/// H + κγB S_z.
pub fn direction_sz_family(params: &DirectionParams, kappa: f64) -> Result<ExtendedFamily> {
    let base: SharedFamily = Arc::new(direction_family(params));
    let sz = spin1_matrices().z.scale(params.larmor());
    add_operator(base, &sz, kappa)
}

/// 16 sin²(γBt/2).
pub fn direction_reference_qfi(params: &DirectionParams) -> f64 {
    let s = (0.5 * params.larmor() * params.t).sin();
    16.0 * s * s
}

/// 4(γBt)².
pub fn direction_reference_upper_bound(params: &DirectionParams) -> f64 {
    let w = params.larmor() * params.t;
    4.0 * w * w
}

/// 4(γBt)² cos²(ε/2) + 4 sin²(γBt sin(ε/2)), the channel QFI of
/// H(θ) − H(θ₀ + ε) at θ₀. Independent of θ₀ and φ.
pub fn direction_reference_subtraction_qfi(params: &DirectionParams, _theta0: f64, epsilon: f64) -> f64 {
    let w = params.larmor() * params.t;
    let c = (0.5 * epsilon).cos();
    let s = (w * (0.5 * epsilon).sin()).sin();
    4.0 * w * w * c * c + 4.0 * s * s
}
