//! Quick self-contained checks of every module's elementary identities,
//! runnable from the CLI without any configuration beyond the defaults.

use kplab_core::control::{apply_control_op, make_bump, Orientation};
use kplab_core::counterexample::{build_packet, gaussian_coeff, lift_packet, two_sided_bump};
use kplab_core::hum::{gramian_block, min_eig, time_kernel};
use kplab_core::nonlinear::{duhamel_tail, evolve_nonlinear, SolverParams};
use kplab_core::observability::{gap, ingham_estimate, transit_report};
use kplab_core::spectral::{
    from_physical_1d, omega_1d, omega_2d, propagate_2d, ray_flow, to_physical_1d,
    DispersionVariant, ModeGrid1D, ModeGrid2D, RayBranch, RayState, Spectrum1D, Spectrum2D,
};
use ndarray::Array2;
use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, PI, TAU};

pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, run: impl FnOnce() -> Result<(), String>) -> CheckResult {
    match run() {
        Ok(()) => CheckResult {
            name,
            passed: true,
            detail: String::new(),
        },
        Err(detail) => CheckResult {
            name,
            passed: false,
            detail,
        },
    }
}

fn expect(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn near(x: f64, y: f64, tol: f64) -> bool {
    (x - y).abs() <= tol
}

/// Run the whole battery; every check covers one of the elementary
/// identities pinned by the module contracts.
pub fn run_all() -> Vec<CheckResult> {
    let mut results = Vec::new();

    results.push(check("dispersion.kp2d_values", || {
        expect(
            omega_2d(1, 1, DispersionVariant::Kp2d).map_err(|e| e.to_string())? == 0.0,
            "ω(1,1) must vanish",
        )?;
        expect(
            omega_2d(2, 1, DispersionVariant::Kp2d).map_err(|e| e.to_string())? == 7.5,
            "ω(2,1) must equal 7.5",
        )
    }));

    results.push(check("dispersion.lambda_and_schrodinger", || {
        expect(
            omega_1d(-1, DispersionVariant::Lambda1d(1.0)).map_err(|e| e.to_string())? == 0.0,
            "ω₁(-1) must vanish",
        )?;
        expect(
            omega_1d(2, DispersionVariant::Schrodinger(0.5)).map_err(|e| e.to_string())? == -2.0,
            "Schrödinger ω(2) must equal -2",
        )
    }));

    results.push(check("dispersion.zero_mode_rejected", || {
        expect(
            omega_1d(0, DispersionVariant::Lambda1d(1.0)).is_err(),
            "k = 0 must be rejected",
        )
    }));

    results.push(check("propagate.identity_and_unitarity", || {
        let grid = ModeGrid2D::new(3, 2).map_err(|e| e.to_string())?;
        let u = Spectrum2D::from_fn(grid, |k, l| Complex64::new(0.1 * k as f64, 0.05 * l as f64));
        let same = propagate_2d(&u, 0.0, DispersionVariant::Kp2d).map_err(|e| e.to_string())?;
        expect(same == u, "t = 0 must be the identity")?;
        let moved = propagate_2d(&u, 1.7, DispersionVariant::Kp2d).map_err(|e| e.to_string())?;
        expect(
            near(moved.l2_norm(), u.l2_norm(), 1e-12 * u.l2_norm()),
            "flow must preserve the L² norm",
        )
    }));

    results.push(check("norm.single_mode_values", || {
        let grid = ModeGrid1D::new(4, false).map_err(|e| e.to_string())?;
        let mut u = Spectrum1D::zeros(grid);
        u.set(3, Complex64::new(1.0, 0.0));
        expect(
            near(u.l2_norm(), TAU.sqrt(), 1e-13),
            "L² of a single mode must be √(2π)",
        )?;
        expect(
            near(
                u.norm(kplab_core::spectral::NormKind::Hminus1),
                (TAU / 10.0).sqrt(),
                1e-13,
            ),
            "H⁻¹ of mode 3 must be √(2π/10)",
        )
    }));

    results.push(check("transform.round_trip", || {
        let grid = ModeGrid1D::new(5, true).map_err(|e| e.to_string())?;
        let u = Spectrum1D::from_fn(grid, |k| Complex64::new((k as f64).cos(), 0.2));
        let samples = to_physical_1d(&u, 16).map_err(|e| e.to_string())?;
        let v = from_physical_1d(grid, &samples).map_err(|e| e.to_string())?;
        let worst = u
            .coeffs
            .iter()
            .zip(v.coeffs.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0f64, f64::max);
        expect(worst < 1e-12, format!("round-trip defect {worst}"))
    }));

    results.push(check("ray.identity_and_frozen_frequency", || {
        let s = RayState {
            x: 0.3,
            xi: 1.0,
            epsilon: 1.0,
        };
        let same = ray_flow(s, 0.0, RayBranch::P).map_err(|e| e.to_string())?;
        expect(same == s, "t = 0 must be the identity")?;
        let moved = ray_flow(s, 2.0, RayBranch::Q).map_err(|e| e.to_string())?;
        expect(moved.xi == s.xi, "ξ must be invariant")?;
        expect((-PI..PI).contains(&moved.x), "x must be wrapped")
    }));

    results.push(check("control.bump_normalization", || {
        let bump = make_bump(-FRAC_PI_2, FRAC_PI_2, 4).map_err(|e| e.to_string())?;
        let g0 = bump.coeff(0).map_err(|e| e.to_string())?;
        expect(
            near(g0.re, 1.0 / TAU, 1e-10) && g0.im.abs() < 1e-12,
            "ĝ(0) must equal 1/(2π)",
        )?;
        for m in -bump.m_max()..=bump.m_max() {
            let c = bump.coeff(m).map_err(|e| e.to_string())?;
            expect(c.norm() <= 1.0 / TAU + 1e-12, format!("|ĝ({m})| above mass"))?;
            expect(c.im.abs() < 1e-12, format!("ĝ({m}) must be real"))?;
        }
        Ok(())
    }));

    results.push(check("control.kills_constant_fields", || {
        let bump = make_bump(-FRAC_PI_2, FRAC_PI_2, 4).map_err(|e| e.to_string())?;
        let nx = 4096;
        let ny = 4;
        let mut field = Array2::default((ny, nx));
        for iy in 0..ny {
            for ix in 0..nx {
                field[(iy, ix)] = Complex64::new(1.3, -0.4);
            }
        }
        let out = apply_control_op(&bump, Orientation::Vertical, &field)
            .map_err(|e| e.to_string())?;
        let worst = out.iter().map(|z| z.norm()).fold(0.0f64, f64::max);
        expect(worst < 1e-10, format!("vertical leak {worst}"))?;
        let out = apply_control_op(&bump, Orientation::Horizontal, &field.t().to_owned())
            .map_err(|e| e.to_string())?;
        let worst = out.iter().map(|z| z.norm()).fold(0.0f64, f64::max);
        expect(worst < 1e-10, format!("horizontal leak {worst}"))
    }));

    results.push(check("hum.time_kernel_values", || {
        expect(
            time_kernel(0.0, 2.0) == Complex64::new(2.0, 0.0),
            "Δ = 0 must integrate to T",
        )?;
        expect(
            time_kernel(TAU, 1.0).norm() < 1e-14,
            "a full period must integrate to zero",
        )
    }));

    results.push(check("hum.gramian_diagonal", || {
        let bump = make_bump(-FRAC_PI_2, FRAC_PI_2, 2).map_err(|e| e.to_string())?;
        let m = kplab_core::control::control_matrix(&bump, 2).map_err(|e| e.to_string())?;
        let g = gramian_block(&m, 1.0, 0.7).map_err(|e| e.to_string())?;
        let w = m.gram();
        for i in 0..m.dim() {
            expect(
                g.matrix[(i, i)] == w[(i, i)] * Complex64::new(0.7, 0.0),
                "diagonal must be T·(MMᴴ)",
            )?;
        }
        expect(g.min_eig >= -1e-10, "gramian must be PSD")
    }));

    results.push(check("hum.min_eig_diagonal_case", || {
        let mut a: Array2<Complex64> = Array2::eye(3);
        a[(0, 0)] = Complex64::new(3.0, 0.0);
        a[(2, 2)] = Complex64::new(2.0, 0.0);
        let (val, vec) = min_eig(&a).map_err(|e| e.to_string())?;
        expect(near(val, 1.0, 1e-12), format!("min eig {val}"))?;
        expect((vec[1].norm() - 1.0).abs() < 1e-10, "eigvector must be e₂")
    }));

    results.push(check("observability.ingham_trivial_cases", || {
        let single = ingham_estimate(&[4.0], 2.5).map_err(|e| e.to_string())?;
        expect(
            near(single.c1, 2.5, 1e-12) && near(single.c2, 2.5, 1e-12),
            "single frequency must give C1 = C2 = T",
        )?;
        let t = 0.9;
        let pair = ingham_estimate(&[0.0, TAU / t], t).map_err(|e| e.to_string())?;
        expect(
            near(pair.c1, t, 1e-12) && near(pair.c2, t, 1e-12),
            "orthogonal pair must give C1 = C2 = T",
        )
    }));

    results.push(check("observability.gap_progression", || {
        let g = gap(&[0.0, 1.5, 3.0]).map_err(|e| e.to_string())?;
        expect(g == 1.5, format!("gap of an arithmetic progression: {g}"))
    }));

    results.push(check("observability.transit_baseline", || {
        let rows =
            transit_report(-FRAC_PI_2, FRAC_PI_2, &[0.0], 4).map_err(|e| e.to_string())?;
        expect(
            near(rows[0].v_min, 3.0, 1e-14) && near(rows[0].t_max, PI / 3.0, 1e-14),
            "λ = 0 baseline must be v = 3, t = π/3",
        )
    }));

    results.push(check("counterexample.packet_basics", || {
        expect(
            gaussian_coeff(0.25, 5) == gaussian_coeff(0.25, -5),
            "Gaussian coefficients must be even",
        )?;
        let p = build_packet(8, 0.5, 0.25, 5).map_err(|e| e.to_string())?;
        expect(
            p.initial_spectrum().is_real_valued(1e-14),
            "packet must be real-valued",
        )?;
        let grid = ModeGrid2D::new(8, 5).map_err(|e| e.to_string())?;
        let lifted = lift_packet(&p, &grid).map_err(|e| e.to_string())?;
        for (k, l) in grid.modes() {
            if k != 8 {
                expect(
                    lifted.get(k, l) == Complex64::default(),
                    "lift must occupy a single column",
                )?;
            }
        }
        Ok(())
    }));

    results.push(check("counterexample.two_sided_profile", || {
        let bump = two_sided_bump(1.0, 8).map_err(|e| e.to_string())?;
        let g0 = bump.coeff(0).map_err(|e| e.to_string())?;
        expect(near(g0.re, 1.0 / TAU, 1e-10), "∫g must equal 1")?;
        bump.check_clearance(1.0).map_err(|e| e.to_string())
    }));

    results.push(check("nonlinear.zero_data_fixed", || {
        let grid = ModeGrid2D::new(3, 1).map_err(|e| e.to_string())?;
        let zero = Spectrum2D::zeros(grid);
        let params = SolverParams {
            dt: 1e-2,
            ..Default::default()
        };
        let traj =
            evolve_nonlinear(&zero, None, 0.3, &params, None).map_err(|e| e.to_string())?;
        expect(traj.terminal().l2_norm() == 0.0, "zero must stay zero")?;
        let tail = duhamel_tail(&traj).map_err(|e| e.to_string())?;
        expect(tail.l2_norm() == 0.0, "tail of zero must vanish")
    }));

    results
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn battery_is_green() {
        let results = run_all();
        for r in &results {
            assert!(r.passed, "{} failed: {}", r.name, r.detail);
        }
        assert!(results.len() >= 15);
    }
}
