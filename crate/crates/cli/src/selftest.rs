//! The `selftest` subcommand: a quick pass over the engine invariants,
//! printed as a pass/fail table.

use num_complex::Complex64;
use twistim_core::hom::*;
use twistim_core::imaging::*;
use twistim_core::mask::PhaseMask;
use twistim_core::math::{bessel_j, integrate_2d_polar, QuadratureRule};
use twistim_core::states::*;

const PI: f64 = std::f64::consts::PI;

type Check = (&'static str, fn() -> Result<(), String>);

fn envelope() -> BesselGaussEnvelope {
    let lambda = 500e-9;
    BesselGaussEnvelope::from_wavelength(lambda, 1000.0 * lambda, 1000.0 * lambda, 0.001 * PI)
        .expect("reference envelope")
}

fn state(family: StateFamily, m: i32) -> TwoPhotonState {
    TwoPhotonState::new(family, TwistedMode::new(envelope(), m).expect("mode"), 0.0)
        .expect("state")
}

fn ensure(cond: bool, msg: &str) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.to_string())
    }
}

fn check_bessel() -> Result<(), String> {
    let parity = (bessel_j(-3, 2.2).unwrap() + bessel_j(3, 2.2).unwrap()).abs();
    ensure(parity < 1e-14, &format!("parity residual {parity:e}"))?;
    for (m, x) in [(0i32, 7.3), (5, 19.0), (12, 44.0)] {
        let lhs = bessel_j(m - 1, x).unwrap() + bessel_j(m + 1, x).unwrap();
        let rhs = 2.0 * m as f64 / x * bessel_j(m, x).unwrap();
        ensure(
            (lhs - rhs).abs() < 1e-9,
            &format!("recurrence residual at m={m} x={x}"),
        )?;
    }
    Ok(())
}

fn check_quadrature() -> Result<(), String> {
    let rule = QuadratureRule::gauss_legendre(5).map_err(|e| e.to_string())?;
    let moment = rule.integrate(-1.0, 1.0, |x| x.powi(8));
    ensure(
        (moment - 2.0 / 9.0).abs() < 1e-13,
        &format!("x^8 moment {moment}"),
    )?;
    let sum: f64 = rule.weights().iter().sum();
    ensure((sum - 2.0).abs() < 1e-12, "weight sum")?;

    let area = integrate_2d_polar(|_, _| Complex64::new(1.0, 0.0), 2.0, 16, 16)
        .map_err(|e| e.to_string())?;
    ensure(
        (area.re - 4.0 * PI).abs() < 1e-10,
        &format!("disk area {}", area.re),
    )?;
    let phase = integrate_2d_polar(|_, phi| Complex64::from_polar(1.0, phi), 1.0, 8, 32)
        .map_err(|e| e.to_string())?;
    ensure(phase.norm() < 1e-12, "azimuthal cancellation")
}

fn check_envelope() -> Result<(), String> {
    let env = envelope();
    let mode = TwistedMode::new(env, 1).map_err(|e| e.to_string())?;
    let b = env.rho_k_center();
    let scale = eta_tilde_closed(&mode, 1.84 / b, 0.0, 0.0)
        .map_err(|e| e.to_string())?
        .norm();
    for rho in [0.7 / b, 1.84 / b, 2.9 / b] {
        let closed = eta_tilde_closed(&mode, rho, 0.0, 0.0).map_err(|e| e.to_string())?;
        let quad = eta_tilde_quadrature(&mode, rho, 0.0, 0.0, 48).map_err(|e| e.to_string())?;
        ensure(quad.converged, "quadrature convergence flag")?;
        let err = (closed - quad.value).norm() / scale;
        ensure(err < 1e-2, &format!("closed/quadrature mismatch {err:e}"))?;
    }
    Ok(())
}

fn check_hom_table() -> Result<(), String> {
    let grid = KSpaceGrid::default();
    let cases = [
        (StateFamily::ProductOpposite, 1, (0.5, 0.5, 0.0)),
        (StateFamily::ProductSame, 0, (0.5, 0.5, 0.0)),
        (StateFamily::ProductSame, 1, (0.25, 0.25, 0.5)),
        (StateFamily::EntangledOpposite(Sign::Plus), 1, (0.5, 0.5, 0.0)),
        (StateFamily::EntangledSame(Sign::Minus), 1, (0.0, 0.0, 1.0)),
    ];
    for (family, m, want) in cases {
        let s = state(family, m);
        let a = hom_probabilities_analytic(&s).map_err(|e| e.to_string())?;
        ensure(
            (a.p_cc, a.p_dd, a.p_cd) == want,
            &format!("analytic table at {family:?} m={m}"),
        )?;
        let n = hom_probabilities_numeric(&s, &grid).map_err(|e| e.to_string())?;
        ensure(
            (n.p_cc - want.0).abs() < 1e-3
                && (n.p_dd - want.1).abs() < 1e-3
                && (n.p_cd - want.2).abs() < 1e-3,
            &format!("numeric table at {family:?} m={m}"),
        )?;
        ensure(n.conservation_defect() < 1e-9, "conservation")?;
    }
    Ok(())
}

fn check_dip_asymptote() -> Result<(), String> {
    let env = envelope();
    let tau = 10.0 * env.sigma_z() / SPEED_OF_LIGHT;
    let s = state(StateFamily::ProductOpposite, 1)
        .with_delay(tau)
        .map_err(|e| e.to_string())?;
    let p = hom_probabilities_numeric(&s, &KSpaceGrid::default()).map_err(|e| e.to_string())?;
    ensure(
        (p.p_cd - 0.5).abs() < 1e-2,
        &format!("distinguishable limit p_cd = {}", p.p_cd),
    )
}

fn check_overlaps() -> Result<(), String> {
    let mode = TwistedMode::new(envelope(), 1).map_err(|e| e.to_string())?;
    let window = 1.5 * SensorGrid::new(50, 50, 10e-6, (0.0, 0.0), 4)
        .map_err(|e| e.to_string())?
        .half_diagonal();
    let sector = PhaseMask::sector(0.25, PI).map_err(|e| e.to_string())?;
    let ov = overlap_integrals(&mode, &sector, window, (256, 256)).map_err(|e| e.to_string())?;
    ensure(
        (ov.i2.re - 0.5).abs() < 1e-6 && ov.i2.im.abs() < 1e-9,
        &format!("sector overlap {}", ov.i2),
    )?;
    ensure(
        (ov.i1 - ov.i2).norm() < 1e-9,
        &format!("I1 = I2 identity: {:e}", (ov.i1 - ov.i2).norm()),
    )?;
    let checker = PhaseMask::checkerboard(37e-6, 1.3, (5e-6, -3e-6)).map_err(|e| e.to_string())?;
    let ov = overlap_integrals(&mode, &checker, window, (192, 256)).map_err(|e| e.to_string())?;
    ensure(
        (ov.i1 - ov.i2).norm() < 1e-9,
        "I1 = I2 on a checkerboard",
    )?;
    ensure(ov.i1.norm() <= 1.0 + 1e-9, "overlap modulus bound")
}

fn check_imaging() -> Result<(), String> {
    let s = state(StateFamily::ProductOpposite, 1);
    let grid = SensorGrid::new(50, 50, 10e-6, (0.0, 0.0), 4).map_err(|e| e.to_string())?;
    let params = RenderParams::default();

    let clear = density_port_d(&s, None, &grid, &params).map_err(|e| e.to_string())?;
    let mask = PhaseMask::checkerboard(40e-6, PI, (0.0, 0.0)).map_err(|e| e.to_string())?;
    let masked = density_port_d(&s, Some(&mask), &grid, &params).map_err(|e| e.to_string())?;
    let dev = masked
        .values
        .iter()
        .zip(&clear.values)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max)
        / clear.max_value();
    ensure(dev < 1e-6, &format!("texture leaked into the density: {dev:e}"))?;

    let zero = PhaseMask::uniform(0.0).map_err(|e| e.to_string())?;
    let c0 = coincidence_port_d(&s, Some(&zero), &grid, &params).map_err(|e| e.to_string())?;
    ensure(
        c0.values.iter().all(|v| v.abs() < 1e-12),
        "calibration coincidence is not zero",
    )?;

    let n0 = density_port_d(&s, Some(&zero), &grid, &params).map_err(|e| e.to_string())?;
    let s0 = rescaled_signal(&c0, &n0, params.floor).map_err(|e| e.to_string())?;
    for idx in 0..s0.values.len() {
        if s0.valid[idx] && (s0.values[idx] + 1.0).abs() > 1e-9 {
            return Err("calibration re-scaled signal is not -1".to_string());
        }
    }
    Ok(())
}

fn check_roundtrip() -> Result<(), String> {
    let s = state(StateFamily::ProductOpposite, 1);
    let grid = SensorGrid::new(50, 50, 10e-6, (0.0, 0.0), 4).map_err(|e| e.to_string())?;
    let origin = (-25.0 * 10e-6, -25.0 * 10e-6);
    let mask = PhaseMask::checkerboard(4.0 * 10e-6, PI, origin).map_err(|e| e.to_string())?;
    let report = encryption_roundtrip(
        &s,
        &mask,
        &grid,
        &RenderParams::default(),
        &RoundtripThresholds::default(),
    )
    .map_err(|e| e.to_string())?;
    ensure(
        report.passed,
        &format!("round trip failed: accuracy {}", report.accuracy),
    )
}

/// Runs every check, prints one line each, returns the failure count.
pub fn run_all() -> usize {
    let checks: &[Check] = &[
        ("bessel parity and recurrence", check_bessel),
        ("quadrature exactness", check_quadrature),
        ("envelope closed form vs quadrature", check_envelope),
        ("beam-splitter case table", check_hom_table),
        ("distinguishable-delay asymptote", check_dip_asymptote),
        ("overlap integrals", check_overlaps),
        ("imaging invariants", check_imaging),
        ("encryption round trip", check_roundtrip),
    ];
    let mut failures = 0;
    for (name, check) in checks {
        match check() {
            Ok(()) => println!("PASS  {name}"),
            Err(msg) => {
                failures += 1;
                println!("FAIL  {name}: {msg}");
            }
        }
    }
    if failures == 0 {
        println!("selftest: all {} checks passed", checks.len());
    } else {
        println!("selftest: {failures} of {} checks FAILED", checks.len());
    }
    failures
}
