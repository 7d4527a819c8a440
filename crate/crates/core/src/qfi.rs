//! Quantum Fisher information of unitary channels.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::generator::{generator_spectral, GeneratorMethod, GeneratorResult, HamiltonianFamily};
use crate::linalg::{random_state_with, seminorm, variance, CMatrix, CVector, HermitianOperator, PureState, C64};

/// Default relative tolerance on eigenvector residuals in [`check_saturation`].
pub const SATURATION_TOL: f64 = 1e-8;

/// Brute-force ascent hyperparameters.
pub const BRUTE_INITIAL_STEP: f64 = 0.1;
pub const BRUTE_ITERATIONS: usize = 60;

/// 4 Var(ℋ) in `psi0`, with ℋ the spectral generator at θ.
pub fn qfi_pure(family: &dyn HamiltonianFamily, theta: f64, t: f64, psi0: &PureState) -> Result<f64> {
    let g = generator_spectral(family, theta, t)?;
    Ok(4.0 * variance(&g.generator, psi0)?)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChannelQfiReport {
    pub channel_qfi: f64,
    pub upper_bound: f64,
    /// channel_qfi / upper_bound, or 1 when the bound vanishes.
    pub ratio: f64,
    pub optimal_probe: PureState,
    pub generator_method: GeneratorMethod,
    pub estimated_error: f64,
}

/// Channel QFI ‖ℋ‖²_sn with the spectral generator.
pub fn channel_qfi(family: &dyn HamiltonianFamily, theta: f64, t: f64) -> Result<ChannelQfiReport> {
    let g = generator_spectral(family, theta, t)?;
    Ok(channel_qfi_from_generator(family, theta, t, &g))
}

/// Channel QFI report for an already computed generator.
pub fn channel_qfi_from_generator(
    family: &dyn HamiltonianFamily,
    theta: f64,
    t: f64,
    g: &GeneratorResult,
) -> ChannelQfiReport {
    let eig = g.generator.eig();
    let sn = eig.spread();
    let channel_qfi = sn * sn;
    let bound = upper_bound(family, theta, t);
    let ratio = if bound > 0.0 { channel_qfi / bound } else { 1.0 };
    let n = eig.dim();
    let optimal_probe = if n == 1 {
        PureState::basis(1, 0)
    } else {
        PureState::balanced(&eig.vector(n - 1), &eig.vector(0)).expect("eigenvectors are orthonormal")
    };
    ChannelQfiReport {
        channel_qfi,
        upper_bound: bound,
        ratio,
        optimal_probe,
        generator_method: g.method,
        // d(sn²) = 2 sn d(sn), and d(sn) ≤ 2‖δℋ‖.
        estimated_error: 4.0 * sn * g.estimated_error * n as f64,
    }
}

/// t²‖Ḣ(θ)‖²_sn.
pub fn upper_bound(family: &dyn HamiltonianFamily, theta: f64, t: f64) -> f64 {
    let sn = seminorm(&family.derivative(theta));
    t * t * sn * sn
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Saturates,
    NotSaturating,
    DegenerateSufficientHolds,
    DegenerateInconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Saturates => "Saturates",
            Verdict::NotSaturating => "NotSaturating",
            Verdict::DegenerateSufficientHolds => "DegenerateSufficientHolds",
            Verdict::DegenerateInconclusive => "DegenerateInconclusive",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SaturationVerdict {
    pub verdict: Verdict,
    /// Indices into the ascending spectrum. Non-degenerate case: the
    /// eigenvector of Ḣ (0 or d−1) failing the test, paired with itself.
    /// Degenerate case: the eigenspaces of H containing a maximal and a
    /// minimal eigenvector of Ḣ, given by their first index.
    pub witness: Option<(usize, usize)>,
}

/// Saturation test with the default tolerance [`SATURATION_TOL`].
pub fn check_saturation(family: &dyn HamiltonianFamily, theta: f64) -> SaturationVerdict {
    check_saturation_with(family, theta, SATURATION_TOL)
}

/// Checks whether the extremal eigenvectors of Ḣ(θ) are eigenvectors of H(θ).
///
/// With non-degenerate extremal eigenvalues each extremal eigenvector v must
/// satisfy ‖(H − ⟨v|H|v⟩)v‖ ≤ tol·‖H‖. Otherwise the sufficient condition is
/// tested: some eigenspace of H must meet the maximal eigenspace 𝒫 of Ḣ and
/// some eigenspace the minimal one 𝒟, detected by a principal cosine above
/// 1 − 1e-8.
pub fn check_saturation_with(family: &dyn HamiltonianFamily, theta: f64, tol: f64) -> SaturationVerdict {
    let h = family.value(theta);
    let hd_eig = family.derivative(theta).eig();
    let d = hd_eig.dim();
    let (low, high) = hd_eig.extremal_multiplicities();
    let h_norm = h.eig().eigenvalues().iter().fold(0.0_f64, |m, x| m.max(x.abs()));

    if d == 1 {
        return SaturationVerdict {
            verdict: Verdict::Saturates,
            witness: None,
        };
    }

    if low == 1 && high == 1 && hd_eig.spread() > 0.0 {
        for k in [d - 1, 0] {
            let v = hd_eig.vector(k);
            let hv = h.matrix() * &v;
            let mean = v.dotc(&hv);
            let residual = (hv - &v * mean).norm();
            if residual > tol * h_norm {
                return SaturationVerdict {
                    verdict: Verdict::NotSaturating,
                    witness: Some((k, k)),
                };
            }
        }
        return SaturationVerdict {
            verdict: Verdict::Saturates,
            witness: None,
        };
    }

    let vectors = hd_eig.eigenvectors();
    let p = vectors.columns(d - high, high).into_owned();
    let dd = vectors.columns(0, low).into_owned();
    let h_eig = h.eig();
    let mut in_p = None;
    let mut in_d = None;
    for block in h_eig.blocks() {
        let q = h_eig.eigenvectors().columns(block.start, block.len()).into_owned();
        if in_p.is_none() && max_principal_cosine(&p, &q) > 1.0 - 1e-8 {
            in_p = Some(block.start);
        }
        if in_d.is_none() && max_principal_cosine(&dd, &q) > 1.0 - 1e-8 {
            in_d = Some(block.start);
        }
    }
    match (in_p, in_d) {
        (Some(a), Some(b)) => SaturationVerdict {
            verdict: Verdict::DegenerateSufficientHolds,
            witness: Some((a, b)),
        },
        _ => SaturationVerdict {
            verdict: Verdict::DegenerateInconclusive,
            witness: None,
        },
    }
}

/// Largest singular value of A†B for orthonormal column sets A, B.
fn max_principal_cosine(a: &CMatrix, b: &CMatrix) -> f64 {
    let m = a.adjoint() * b;
    m.singular_values().iter().fold(0.0_f64, |acc, &s| acc.max(s))
}

/// Best 4 Var(ℋ) found by projected gradient ascent on the unit sphere.
///
/// Each of `n_starts` restarts begins at a random state drawn from its own
/// stream of a ChaCha8 generator seeded with `seed`, so the result does not
/// depend on evaluation order. The step is an angle along the normalized
/// tangent gradient, starting at [`BRUTE_INITIAL_STEP`] and halved whenever
/// a move does not improve. The closed-form probe is evaluated as well and
/// the maximum is returned.
pub fn channel_qfi_brute(
    family: &dyn HamiltonianFamily,
    theta: f64,
    t: f64,
    n_starts: usize,
    seed: u64,
) -> Result<f64> {
    let g = generator_spectral(family, theta, t)?.generator;
    let n = g.dim();
    let objective = |psi: &PureState| 4.0 * variance(&g, psi).expect("dimensions match");

    let eig = g.eig();
    let candidate = if n == 1 {
        PureState::basis(1, 0)
    } else {
        PureState::balanced(&eig.vector(n - 1), &eig.vector(0))?
    };
    let mut best = objective(&candidate);

    for start in 0..n_starts.max(1) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(start as u64);
        let psi = random_state_with(&mut rng, n);
        let value = ascend(&g, psi, &objective);
        best = best.max(value);
    }
    Ok(best)
}

fn ascend(g: &HermitianOperator, mut psi: PureState, objective: &impl Fn(&PureState) -> f64) -> f64 {
    let mut value = objective(&psi);
    let mut step = BRUTE_INITIAL_STEP;
    for _ in 0..BRUTE_ITERATIONS {
        let Some(direction) = tangent_gradient(g, &psi) else {
            break;
        };
        let (c, s) = (step.cos(), step.sin());
        let moved = psi.amplitudes() * C64::new(c, 0.0) + direction * C64::new(s, 0.0);
        let Ok(next) = PureState::normalize(moved) else {
            break;
        };
        let next_value = objective(&next);
        if next_value > value {
            psi = next;
            value = next_value;
        } else {
            step *= 0.5;
        }
    }
    value
}

/// Unit tangent direction of ∇_{ψ*} 4Var = 4(ℋ²ψ − 2⟨ℋ⟩ℋψ), or None at a
/// stationary point.
fn tangent_gradient(g: &HermitianOperator, psi: &PureState) -> Option<CVector> {
    let a = psi.amplitudes();
    let ga = g.matrix() * a;
    let mean = a.dotc(&ga).re;
    let gga = g.matrix() * &ga;
    let grad = (gga - &ga * C64::new(2.0 * mean, 0.0)) * C64::new(4.0, 0.0);
    let tangent = &grad - a * a.dotc(&grad);
    let norm = tangent.norm();
    if norm <= f64::EPSILON * grad.norm().max(f64::MIN_POSITIVE) || norm == 0.0 {
        None
    } else {
        Some(tangent / C64::new(norm, 0.0))
    }
}
