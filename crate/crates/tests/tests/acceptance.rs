//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any of them fails.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::sync::Arc;

use qfiext_cli::config::{preset, Grid, Scale};
use qfiext_cli::model::ExtensionConfig;
use qfiext_cli::sweep::{run_sweep, SweepOptions};
use qfiext_core::extensions::{flood, flooding_beta_qfi, predicted_subtraction_deficit, subtract_perturbed};
use qfiext_core::generator::{
    broken_phase_shift_generator_at_zero, default_fd_step, generator_fd, generator_quadrature, generator_spectral,
    AncillaFamily, HamiltonianFamily, PolynomialFamily, SharedFamily,
};
use qfiext_core::linalg::{
    commutator, max_abs, max_abs_diff, random_hermitian_with, random_state_with, seminorm, HermitianOperator,
};
use qfiext_core::models::{
    direction_family, direction_reference_qfi, direction_reference_subtraction_qfi,
    direction_reference_upper_bound, direction_sz_family, DirectionParams,
};
use qfiext_core::qfi::{channel_qfi, channel_qfi_brute, qfi_pure};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn log_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| (a.ln() + (b.ln() - a.ln()) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

fn polynomial(rng: &mut ChaCha8Rng, dim: usize, degree: usize) -> PolynomialFamily {
    PolynomialFamily::new((0..=degree).map(|_| random_hermitian_with(rng, dim)).collect())
}

fn ensure(ok: bool, message: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(message())
    }
}

fn phase_shift_saturation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for case in 0..100 {
        let dim = rng.random_range(2..=6);
        let g = random_hermitian_with(&mut rng, dim);
        let fam = PolynomialFamily::new(vec![HermitianOperator::zeros(dim), g.clone()]);
        let theta = rng.random_range(-3.0..3.0);
        let t = [0.1, 1.0, 10.0][case % 3];
        let r = channel_qfi(&fam, theta, t).map_err(|e| e.to_string())?;
        let want = t * t * seminorm(&g).powi(2);
        let err = rel(r.channel_qfi, want);
        worst = worst.max(err);
        ensure(err <= 1e-10, || format!("case {case}: {} vs {want}", r.channel_qfi))?;
        ensure((r.ratio - 1.0).abs() <= 1e-10, || format!("case {case}: ratio {}", r.ratio))?;
    }
    Ok(format!("100 cases, worst relative error {worst:.1e}"))
}

fn direction_closed_forms() -> Outcome {
    let base = DirectionParams {
        b: 1e-9,
        theta: PI / 3.0,
        phi: PI / 4.0,
        ..DirectionParams::default()
    };
    let mut worst = 0.0f64;
    for t in log_grid(1e-3, 1e-1, 50) {
        let p = DirectionParams { t, ..base };
        let r = channel_qfi(&direction_family(&p), p.theta, t).map_err(|e| e.to_string())?;
        let (want_c, want_b) = (direction_reference_qfi(&p), direction_reference_upper_bound(&p));
        let err = rel(r.channel_qfi, want_c).max(rel(r.upper_bound, want_b));
        worst = worst.max(err);
        ensure(err <= 1e-8, || {
            format!("t={t}: qfi {} vs {want_c}, bound {} vs {want_b}", r.channel_qfi, r.upper_bound)
        })?;
    }
    Ok(format!("50 points, worst relative error {worst:.1e}"))
}

fn subtraction_exactness() -> Outcome {
    let p = DirectionParams::default();
    let theta0 = PI / 3.0;
    let base: SharedFamily = Arc::new(direction_family(&p));
    let qfi = |eps: f64| -> Result<(f64, f64), String> {
        let fam = subtract_perturbed(base.clone(), theta0, eps).map_err(|e| e.to_string())?;
        let r = channel_qfi(&fam, theta0, p.t).map_err(|e| e.to_string())?;
        Ok((r.channel_qfi, r.ratio))
    };
    for eps in [0.0, 0.01, 0.1, 0.3, 0.6] {
        let (c, ratio) = qfi(eps)?;
        let want = direction_reference_subtraction_qfi(&p, theta0, eps);
        ensure(rel(c, want) <= 1e-6, || format!("eps={eps}: {c} vs {want}"))?;
        if eps == 0.0 {
            ensure((ratio - 1.0).abs() <= 1e-9, || format!("ratio at eps=0 is {ratio}"))?;
        }
    }
    let bound = direction_reference_upper_bound(&p);
    let eps = log_grid(1e-3, 1e-1, 9);
    let mut deficits = Vec::new();
    for &e in &eps {
        deficits.push(bound - qfi(e)?.0);
    }
    let s = loglog_slope(&eps, &deficits);
    ensure((s - 4.0).abs() <= 0.2, || format!("deficit slope {s:.3}"))?;
    Ok(format!("closed form within 1e-6, deficit slope {s:.3}"))
}

fn flooding_equality_and_convergence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for case in 0..50 {
        let dim = rng.random_range(2..=5);
        let fam: SharedFamily = Arc::new(polynomial(&mut rng, dim, 2));
        let psi = random_state_with(&mut rng, dim);
        let theta0 = rng.random_range(-1.0..1.0);
        let beta = rng.random_range(-3.0..3.0);
        let flooded = flood(fam.clone(), theta0, beta).map_err(|e| e.to_string())?;
        let a = qfi_pure(&flooded, theta0, 1.0, &psi).map_err(|e| e.to_string())?;
        let b = flooding_beta_qfi(fam.as_ref(), theta0, beta, 1.0, &psi).map_err(|e| e.to_string())?;
        ensure(rel(a, b) <= 1e-6, || format!("case {case}: theta-QFI {a} vs beta-QFI {b}"))?;
    }

    let mut spec = preset("fig1").map_err(|e| e.to_string())?;
    spec.grid = Grid {
        start: 1e-6,
        stop: 1e-6,
        points: 1,
        scale: Scale::Linear,
    };
    let result = run_sweep(&spec, Path::new("."), &SweepOptions::default()).map_err(|e| e.to_string())?;
    let mut flooded: Vec<(f64, f64)> = spec
        .plan()
        .iter()
        .zip(&result.runs)
        .filter_map(|(plan, run)| match plan.extension {
            Some(ExtensionConfig::Flood { beta: Some(beta), .. }) => Some((beta, run.rows[0].ratio)),
            _ => None,
        })
        .collect();
    flooded.sort_by(|x, y| x.0.total_cmp(&y.0));
    let betas: Vec<f64> = flooded.iter().map(|f| f.0).collect();
    ensure(betas == [1e-6, 1e-3, 1e-1], || format!("fig1 flood runs use beta {betas:?}"))?;
    let listing = flooded
        .iter()
        .map(|(beta, ratio)| format!("beta={beta:e}: {ratio:.4}"))
        .collect::<Vec<_>>()
        .join(", ");
    ensure(flooded.windows(2).all(|w| w[1].1 > w[0].1), || {
        format!("ratio at B_z=1e-6 not increasing in beta ({listing})")
    })?;
    let top = flooded[2].1;
    ensure(top > 0.99, || {
        format!("ratio at B_z=1e-6, beta=1e-1 is {top:.4}, not above 0.99 ({listing})")
    })?;
    Ok(format!("50 equality cases; {listing}"))
}

fn shift_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    for case in 0..100 {
        let dim = rng.random_range(2..=5);
        let fam: SharedFamily = Arc::new(polynomial(&mut rng, dim, 1));
        let theta0 = rng.random_range(-2.0..2.0);
        let beta = rng.random_range(-2.0..2.0);
        let flooded = flood(fam.clone(), theta0, beta).map_err(|e| e.to_string())?;
        let a = channel_qfi(&flooded, theta0, 1.0).map_err(|e| e.to_string())?.channel_qfi;
        let b = channel_qfi(&fam, theta0 + beta, 1.0).map_err(|e| e.to_string())?.channel_qfi;
        worst = worst.max((a - b).abs());
        ensure((a - b).abs() <= 1e-10, || format!("case {case}: {a} vs {b}"))?;
    }
    Ok(format!("100 cases, worst difference {worst:.1e}"))
}

fn generator_cross_validation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    for case in 0..200 {
        let dim = rng.random_range(2..=5);
        let fam = polynomial(&mut rng, dim, 2);
        let theta = rng.random_range(-1.0..1.0);
        let t = rng.random_range(0.1..1.5);
        let s = generator_spectral(&fam, theta, t).map_err(|e| e.to_string())?.generator;
        let q = generator_quadrature(&fam, theta, t, 8).map_err(|e| e.to_string())?.generator;
        let f = generator_fd(&fam, theta, t, default_fd_step(theta)).map_err(|e| e.to_string())?.generator;
        let d = max_abs_diff(s.matrix(), q.matrix())
            .max(max_abs_diff(s.matrix(), f.matrix()))
            .max(max_abs_diff(q.matrix(), f.matrix()));
        worst = worst.max(d);
        ensure(d <= 1e-6, || format!("case {case}: methods differ by {d:e}"))?;
    }
    let mut worst_bps = 0.0f64;
    for case in 0..50 {
        let dim = rng.random_range(2..=5);
        let g = random_hermitian_with(&mut rng, dim);
        let f = random_hermitian_with(&mut rng, dim);
        let t = rng.random_range(0.1..1.5);
        let fam = PolynomialFamily::new(vec![f.clone(), g.clone()]);
        let k = broken_phase_shift_generator_at_zero(&g, &f, t).map_err(|e| e.to_string())?;
        let s = generator_spectral(&fam, 0.0, t).map_err(|e| e.to_string())?.generator;
        let q = generator_quadrature(&fam, 0.0, t, 8).map_err(|e| e.to_string())?.generator;
        let d = max_abs_diff(k.matrix(), s.matrix()).max(max_abs_diff(k.matrix(), q.matrix()));
        worst_bps = worst_bps.max(d);
        ensure(d <= 1e-7, || format!("broken phase shift case {case}: differs by {d:e}"))?;
    }
    Ok(format!("200 families within {worst:.1e}, 50 broken phase shifts within {worst_bps:.1e}"))
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for case in 0..50u64 {
        let dim = rng.random_range(2..=4);
        let fam = polynomial(&mut rng, dim, 2);
        let theta = rng.random_range(-1.0..1.0);
        let exact = channel_qfi(&fam, theta, 1.0).map_err(|e| e.to_string())?.channel_qfi;
        let brute = channel_qfi_brute(&fam, theta, 1.0, 8, case).map_err(|e| e.to_string())?;
        // Excess at the level of rounding is not an excess.
        ensure(brute <= exact * (1.0 + 1e-12), || format!("case {case}: brute {brute} above {exact}"))?;
        let gap = (exact - brute) / exact;
        worst = worst.max(gap);
        ensure(gap <= 1e-4, || format!("case {case}: brute {brute} vs {exact}"))?;
    }
    Ok(format!("50 families, worst relative gap {worst:.1e}"))
}

fn time_scaling() -> Outcome {
    let p = DirectionParams::default();
    let ts = log_grid(1e-3, 1e-1, 50);
    let ext = direction_sz_family(&p, 10.0).map_err(|e| e.to_string())?;
    let huge = direction_sz_family(&p, 1e9).map_err(|e| e.to_string())?;
    let plain = direction_family(&p);
    let mut qfi = Vec::new();
    let mut plain_max = 0.0f64;
    let mut huge_max = 0.0f64;
    for &t in &ts {
        qfi.push(channel_qfi(&ext, p.theta, t).map_err(|e| e.to_string())?.channel_qfi);
        plain_max = plain_max.max(channel_qfi(&plain, p.theta, t).map_err(|e| e.to_string())?.channel_qfi);
        huge_max = huge_max.max(channel_qfi(&huge, p.theta, t).map_err(|e| e.to_string())?.ratio);
    }
    let s = loglog_slope(&ts, &qfi);
    ensure((s - 2.0).abs() <= 0.05, || format!("kappa=10 slope {s:.4}"))?;
    ensure(plain_max <= 16.0 * (1.0 + 1e-12), || format!("unextended QFI reaches {plain_max}"))?;
    ensure(huge_max < 1.0, || format!("kappa=1e9 ratio reaches {huge_max}"))?;
    Ok(format!(
        "kappa=10 slope {s:.4}, unextended max {plain_max:.4}, kappa=1e9 max ratio {huge_max:.3e}"
    ))
}

fn deficit_prediction() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (theta0, t, eps) = (0.3, 1.0, 1e-3);
    let mut families = 0;
    while families < 20 {
        let fam: SharedFamily = Arc::new(polynomial(&mut rng, 3, 2));
        let hd = fam.derivative(theta0);
        let hdd = fam.second_derivative(theta0).ok_or("missing second derivative")?;
        let gamma = commutator(&hdd, &hd).map_err(|e| e.to_string())?;
        if max_abs(&gamma) < 1e-6 {
            continue;
        }
        families += 1;
        let r = channel_qfi(&fam, theta0, t).map_err(|e| e.to_string())?;
        let sub = subtract_perturbed(fam.clone(), theta0, eps).map_err(|e| e.to_string())?;
        let measured = r.upper_bound - channel_qfi(&sub, theta0, t).map_err(|e| e.to_string())?.channel_qfi;
        let predicted = predicted_subtraction_deficit(fam.as_ref(), theta0, eps, t).map_err(|e| e.to_string())?;
        let ratio = measured / predicted;
        ensure((ratio - 1.0).abs() <= 0.1, || {
            format!("family {families}: measured {measured:e}, predicted {predicted:e}, ratio {ratio}")
        })?;
    }
    Ok("20 families within 10%".into())
}

fn ancilla_noop() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst = 0.0f64;
    for case in 0..50 {
        let dim = rng.random_range(2..=4);
        let ancilla = rng.random_range(2..=3);
        let fam = polynomial(&mut rng, dim, 2);
        let theta = rng.random_range(-1.0..1.0);
        let a = channel_qfi(&fam, theta, 1.0).map_err(|e| e.to_string())?.channel_qfi;
        let b = channel_qfi(&AncillaFamily::new(&fam, ancilla), theta, 1.0)
            .map_err(|e| e.to_string())?
            .channel_qfi;
        worst = worst.max((a - b).abs());
        ensure((a - b).abs() <= 1e-10, || format!("case {case}: {a} vs {b}"))?;
    }
    Ok(format!("50 families, worst difference {worst:.1e}"))
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../cli/tests/fixtures").join(name)
}

/// Builds the `qfiext` binary into the profile directory this suite runs
/// from and returns its path.
fn qfiext_binary() -> Result<PathBuf, String> {
    let exe = std::env::current_exe().map_err(|e| e.to_string())?;
    let profile_dir = exe
        .parent()
        .and_then(Path::parent)
        .ok_or("cannot locate the target directory")?;
    let target_dir = profile_dir.parent().ok_or("cannot locate the target directory")?;
    let cargo = std::env::var("CARGO").unwrap_or_else(|_| "cargo".into());
    let mut build = Command::new(cargo);
    build
        .args(["build", "--quiet", "-p", "qfiext-cli", "--bin", "qfiext", "--target-dir"])
        .arg(target_dir)
        .current_dir(env!("CARGO_MANIFEST_DIR"));
    if profile_dir.file_name().is_some_and(|n| n == "release") {
        build.arg("--release");
    }
    let status = build.status().map_err(|e| format!("cannot run cargo: {e}"))?;
    ensure(status.success(), || format!("building qfiext failed with {status}"))?;
    Ok(profile_dir.join(format!("qfiext{}", std::env::consts::EXE_SUFFIX)))
}

fn cli_determinism() -> Outcome {
    let binary = qfiext_binary()?;
    let sweep = || -> Result<Vec<u8>, String> {
        let out = Command::new(&binary)
            .args(["sweep", "--preset", "fig3"])
            .output()
            .map_err(|e| e.to_string())?;
        ensure(out.status.success(), || format!("sweep exited with {}", out.status))?;
        Ok(out.stdout)
    };
    let (a, b) = (sweep()?, sweep()?);
    ensure(!a.is_empty() && a == b, || "fig3 output differs between runs".into())?;
    let status = Command::new(&binary)
        .arg("validate")
        .arg(fixture("corrupted_derivative.json"))
        .output()
        .map_err(|e| e.to_string())?
        .status;
    ensure(status.code() == Some(3), || format!("validate exited with {status}"))?;
    Ok(format!("{} identical bytes, corrupted fixture exits 3", a.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("phase-shift saturation", phase_shift_saturation),
        ("direction-model closed forms", direction_closed_forms),
        ("subtraction exactness and quartic deficit", subtraction_exactness),
        ("flooding equality and convergence", flooding_equality_and_convergence),
        ("broken-phase-shift shift identity", shift_identity),
        ("generator cross-validation", generator_cross_validation),
        ("brute-force oracle equivalence", oracle_equivalence),
        ("time-scaling engineering", time_scaling),
        ("second-order deficit prediction", deficit_prediction),
        ("ancilla no-op", ancilla_noop),
        ("CLI determinism", cli_determinism),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|panic| {
            let message = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {message}"))
        });
        match outcome {
            Ok(detail) => println!("[PASS] criterion {}: {name} ({detail})", i + 1),
            Err(reason) => {
                failed += 1;
                println!("[FAIL] criterion {}: {name}: {reason}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
