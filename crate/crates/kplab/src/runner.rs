//! Experiment dispatch: builds the inputs each experiment needs, runs the
//! owning module, writes CSV outputs and finishes with an atomically
//! renamed `manifest.json` recording the full configuration and headline
//! metrics.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use kplab_core::control::{make_bump, BumpProfile};
use kplab_core::counterexample::{
    fit_log_slope, observability_quotient, two_sided_bump, vertical_contrast_quotient,
};
use kplab_core::error::Error as CoreError;
use kplab_core::hum::hum_solve;
use kplab_core::nonlinear::{picard_steer, SolverParams};
use kplab_core::observability::{ingham_estimate, lambda_scan, transit_report};
use kplab_core::spectral::{ModeGrid2D, Spectrum2D};

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::selftest;

#[derive(Debug)]
pub enum RunError {
    /// Invalid setup: bad paths, incompatible parameters.
    Config(String),
    /// The computation itself signalled a numerical regime problem
    /// (unobservable truncation, non-convergent Picard, blow-up).
    Regime(String),
    Io(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Regime(_) => 2,
            RunError::Config(_) | RunError::Io(_) => 1,
        }
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(m) => write!(f, "configuration error: {m}"),
            RunError::Regime(m) => write!(f, "numerical regime error: {m}"),
            RunError::Io(m) => write!(f, "io error: {m}"),
        }
    }
}

impl std::error::Error for RunError {}

fn classify(err: CoreError) -> RunError {
    match err {
        CoreError::Unobservable { .. }
        | CoreError::Instability { .. }
        | CoreError::OutsideContraction { .. } => RunError::Regime(err.to_string()),
        CoreError::Domain(_) | CoreError::Config(_) => RunError::Config(err.to_string()),
    }
}

pub struct RunOutcome {
    pub output_dir: PathBuf,
    pub manifest: serde_json::Value,
}

/// Deterministic real-valued random spectrum with unit-seeded ChaCha.
pub fn random_real_spectrum(grid: ModeGrid2D, seed: u64, norm: f64) -> Spectrum2D {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut u = Spectrum2D::zeros(grid);
    for (k, l) in grid.modes() {
        if k > 0 || (k < 0 && l > 0) {
            let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            u.set(k, l, z);
            u.set(-k, -l, z.conj());
        }
    }
    let scale = norm / u.l2_norm();
    u.scaled(Complex64::new(scale, 0.0))
}

fn write_file(dir: &Path, name: &str, content: &[u8]) -> Result<(), RunError> {
    fs::write(dir.join(name), content).map_err(|e| RunError::Io(e.to_string()))
}

fn bump_from_strip(cfg: &ExperimentConfig) -> Result<BumpProfile, RunError> {
    make_bump(cfg.strip.a, cfg.strip.b, cfg.grid.k_max).map_err(classify)
}

struct Artifacts {
    metrics: serde_json::Value,
    files: Vec<(String, Vec<u8>)>,
}

fn run_hum(cfg: &ExperimentConfig) -> Result<Artifacts, RunError> {
    let grid = ModeGrid2D::new(cfg.grid.k_max, cfg.grid.l_max).map_err(classify)?;
    let bump = bump_from_strip(cfg)?;
    let pairs = cfg.sweep.pairs.unwrap_or(1).max(1);

    let mut rows = String::from("run,residual,control_norm,condition,min_eig\n");
    let mut worst_residual = 0.0f64;
    let mut last = None;
    for run in 0..pairs {
        let u0 = random_real_spectrum(grid, cfg.seed.wrapping_add(2 * run as u64), 1.0);
        let u1 = random_real_spectrum(grid, cfg.seed.wrapping_add(2 * run as u64 + 1), 1.0);
        let sol = hum_solve(&u0, &u1, cfg.t_final, &bump).map_err(classify)?;
        let min_eig = sol
            .block_stats
            .iter()
            .map(|s| s.min_eig)
            .fold(f64::INFINITY, f64::min);
        rows.push_str(&format!(
            "{},{},{},{},{}\n",
            run, sol.residual, sol.control_norm, sol.condition, min_eig
        ));
        worst_residual = worst_residual.max(sol.residual);
        last = Some(sol);
    }
    let last = last.expect("at least one run");
    let mut control_csv = Vec::new();
    last.control_csv(&mut control_csv)
        .map_err(|e| RunError::Io(e.to_string()))?;

    Ok(Artifacts {
        metrics: json!({
            "pairs": pairs,
            "max_residual": worst_residual,
            "last_solution": last.manifest(),
        }),
        files: vec![
            ("hum_runs.csv".into(), rows.into_bytes()),
            ("control.csv".into(), control_csv),
        ],
    })
}

fn run_scan_lambda(cfg: &ExperimentConfig) -> Result<Artifacts, RunError> {
    let bump = bump_from_strip(cfg)?;
    let lambdas = cfg.sweep.lambdas.clone().unwrap_or_default();
    let rows = lambda_scan(
        &bump,
        cfg.grid.k_max,
        cfg.t_final,
        &lambdas,
        cfg.sweep.kappa,
    )
    .map_err(classify)?;

    let mut csv = String::from("lambda,min_eig,condition,gap\n");
    for r in &rows {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            r.lambda, r.min_eig, r.condition, r.gap
        ));
    }
    let min_min = rows.iter().map(|r| r.min_eig).fold(f64::INFINITY, f64::min);
    let baseline = rows
        .iter()
        .find(|r| r.lambda == 0.0)
        .map(|r| r.min_eig);
    Ok(Artifacts {
        metrics: json!({
            "rows": rows.len(),
            "min_min_eig": min_min,
            "lambda0_min_eig": baseline,
            "all_positive": min_min > 0.0,
            "weak_kappa": cfg.sweep.kappa,
        }),
        files: vec![("lambda_scan.csv".into(), csv.into_bytes())],
    })
}

fn run_ingham(cfg: &ExperimentConfig) -> Result<Artifacts, RunError> {
    let freqs = cfg.sweep.freqs.clone().unwrap_or_default();
    let report = ingham_estimate(&freqs, cfg.t_final).map_err(classify)?;
    let csv = format!(
        "gamma,T,C1,C2\n{},{},{},{}\n",
        report.gamma, report.t_final, report.c1, report.c2
    );
    Ok(Artifacts {
        metrics: json!({
            "gamma": report.gamma,
            "C1": report.c1,
            "C2": report.c2,
            "coercive": report.c1 > 0.0,
            "ingham_time_threshold": std::f64::consts::TAU / report.gamma,
        }),
        files: vec![("ingham.csv".into(), csv.into_bytes())],
    })
}

fn run_transit(cfg: &ExperimentConfig) -> Result<Artifacts, RunError> {
    let lambdas = cfg.sweep.lambdas.clone().unwrap_or_default();
    let rows =
        transit_report(cfg.strip.a, cfg.strip.b, &lambdas, cfg.grid.k_max).map_err(classify)?;
    let mut csv = String::from("lambda,v_min,t_max\n");
    for r in &rows {
        csv.push_str(&format!("{},{},{}\n", r.lambda, r.v_min, r.t_max));
    }
    let worst = rows.iter().map(|r| r.t_max).fold(0.0f64, f64::max);
    Ok(Artifacts {
        metrics: json!({ "rows": rows.len(), "max_transit_time": worst }),
        files: vec![("transit.csv".into(), csv.into_bytes())],
    })
}

fn run_counterexample(cfg: &ExperimentConfig) -> Result<Artifacts, RunError> {
    let alpha = cfg.sweep.alpha.expect("validated");
    let n_list = cfg.sweep.n_list.clone().expect("validated");
    let b_outer = cfg
        .sweep
        .b_outer
        .unwrap_or(alpha / (2.5 * cfg.t_final));
    let max_n = *n_list.iter().max().expect("nonempty");
    let bump_k = ((b_outer * max_n as f64).ceil() as u32 + 8).max(32);
    let bump = two_sided_bump(alpha, bump_k).map_err(classify)?;
    let rows =
        observability_quotient(&n_list, cfg.t_final, alpha, &bump, b_outer).map_err(classify)?;

    let mut csv = String::from("n,h,eps,mass,Q,sup_omega\n");
    for r in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.n, r.h, r.eps, r.mass, r.q, r.sup_omega
        ));
    }
    let hs: Vec<f64> = rows.iter().map(|r| r.h).collect();
    let qs: Vec<f64> = rows.iter().map(|r| r.q.max(1e-300)).collect();
    let exponent = if rows.len() >= 2 {
        Some(fit_log_slope(&hs, &qs))
    } else {
        None
    };
    let decreasing = rows.windows(2).all(|w| w[1].q < w[0].q);

    // Vertical contrast on the same packets.
    let vbump = make_bump(
        -std::f64::consts::FRAC_PI_2,
        std::f64::consts::FRAC_PI_2,
        8,
    )
    .map_err(classify)?;
    let contrast =
        vertical_contrast_quotient(&n_list, cfg.t_final, &vbump, b_outer).map_err(classify)?;
    let mut contrast_csv = String::from("n,Q_vertical\n");
    for (n, q) in &contrast {
        contrast_csv.push_str(&format!("{},{}\n", n, q));
    }

    Ok(Artifacts {
        metrics: json!({
            "alpha": alpha,
            "B": b_outer,
            "b_small": b_outer / 2.0,
            "rows": rows.len(),
            "strictly_decreasing": decreasing,
            "first_q": rows.first().map(|r| r.q),
            "last_q": rows.last().map(|r| r.q),
            "fitted_q_exponent_in_h": exponent,
            "masses": rows.iter().map(|r| r.mass).collect::<Vec<_>>(),
        }),
        files: vec![
            ("counterexample.csv".into(), csv.into_bytes()),
            ("vertical_contrast.csv".into(), contrast_csv.into_bytes()),
        ],
    })
}

fn run_nonlinear_steer(cfg: &ExperimentConfig) -> Result<Artifacts, RunError> {
    let grid = ModeGrid2D::new(cfg.grid.k_max, cfg.grid.l_max).map_err(classify)?;
    let bump = bump_from_strip(cfg)?;
    let params = SolverParams {
        dt: cfg.solver.dt,
        dealias: cfg.solver.dealias,
        max_picard: cfg.solver.max_picard,
        picard_tol: cfg.solver.picard_tol,
        r_bound: cfg.solver.r_bound,
        linear_only: false,
        record_stride: 1,
    };
    let u0 = random_real_spectrum(grid, cfg.seed, cfg.solver.r_bound);
    let u1 = random_real_spectrum(grid, cfg.seed.wrapping_add(1), cfg.solver.r_bound);

    let (control, traj, history) =
        picard_steer(&u0, &u1, cfg.t_final, &params, &bump).map_err(classify)?;
    let miss = traj
        .terminal()
        .sub(&u1)
        .map_err(classify)?
        .l2_norm()
        / u1.l2_norm().max(1e-30);

    let mut control_csv = Vec::new();
    control
        .control_csv(&mut control_csv)
        .map_err(|e| RunError::Io(e.to_string()))?;

    // Trajectory CSV at a readable number of snapshots.
    let stride = (traj.times.len() / 64).max(1);
    let mut traj_csv = String::from("t,k,l,re,im\n");
    for (idx, (t, state)) in traj.times.iter().zip(traj.states.iter()).enumerate() {
        if idx % stride != 0 && idx + 1 != traj.times.len() {
            continue;
        }
        for (col, (k, l)) in state.grid.modes().enumerate() {
            let z = state.coeffs.as_slice().expect("contiguous")[col];
            traj_csv.push_str(&format!("{},{},{},{},{}\n", t, k, l, z.re, z.im));
        }
    }

    Ok(Artifacts {
        metrics: json!({
            "R": cfg.solver.r_bound,
            "iterations": history.len(),
            "history": history,
            "terminal_relative_miss": miss,
            "dt": params.dt,
            "warnings": traj.warnings,
            "control": control.manifest(),
        }),
        files: vec![
            ("control.csv".into(), control_csv),
            ("trajectory.csv".into(), traj_csv.into_bytes()),
        ],
    })
}

fn run_selftest() -> Result<Artifacts, RunError> {
    let results = selftest::run_all();
    let mut csv = String::from("check,status,detail\n");
    let mut all_pass = true;
    for r in &results {
        all_pass &= r.passed;
        csv.push_str(&format!(
            "{},{},{}\n",
            r.name,
            if r.passed { "pass" } else { "fail" },
            r.detail.replace(',', ";")
        ));
        println!(
            "{} {}{}",
            if r.passed { "PASS" } else { "FAIL" },
            r.name,
            if r.detail.is_empty() {
                String::new()
            } else {
                format!(": {}", r.detail)
            }
        );
    }
    let artifacts = Artifacts {
        metrics: json!({
            "checks": results.len(),
            "passed": results.iter().filter(|r| r.passed).count(),
            "all_pass": all_pass,
        }),
        files: vec![("selftest.csv".into(), csv.into_bytes())],
    };
    if all_pass {
        Ok(artifacts)
    } else {
        Err(RunError::Regime("selftest checks failed".into()))
    }
}

fn resolve_output_dir(cfg: &ExperimentConfig, override_dir: Option<&Path>) -> PathBuf {
    if let Some(dir) = override_dir {
        return dir.to_path_buf();
    }
    if let Ok(env_dir) = std::env::var("KPLAB_OUTPUT") {
        if !env_dir.is_empty() {
            return PathBuf::from(env_dir);
        }
    }
    PathBuf::from(&cfg.output_dir)
}

/// Run one experiment; outputs land in the resolved directory and the
/// manifest is written last via an atomic rename. Errors raised by the
/// computation are recorded in the manifest as well.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    output_override: Option<&Path>,
    threads: Option<usize>,
) -> Result<RunOutcome, RunError> {
    let out_dir = resolve_output_dir(cfg, output_override);
    fs::create_dir_all(&out_dir).map_err(|e| RunError::Io(e.to_string()))?;
    let started = Instant::now();

    let dispatch = || match cfg.experiment {
        ExperimentKind::Hum => run_hum(cfg),
        ExperimentKind::ScanLambda => run_scan_lambda(cfg),
        ExperimentKind::Ingham => run_ingham(cfg),
        ExperimentKind::Counterexample => run_counterexample(cfg),
        ExperimentKind::NonlinearSteer => run_nonlinear_steer(cfg),
        ExperimentKind::Transit => run_transit(cfg),
        ExperimentKind::Selftest => run_selftest(),
    };

    let result = match threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| RunError::Config(e.to_string()))?;
            pool.install(dispatch)
        }
        None => dispatch(),
    };

    let (metrics, files, error) = match result {
        Ok(art) => (art.metrics, art.files, None),
        Err(e) => (json!(null), Vec::new(), Some(e)),
    };

    for (name, content) in &files {
        write_file(&out_dir, name, content)?;
    }

    let manifest = json!({
        "experiment": cfg.experiment.to_string(),
        "config": cfg,
        "version": env!("CARGO_PKG_VERSION"),
        "wall_clock_seconds": started.elapsed().as_secs_f64(),
        "threads": threads,
        "outputs": files.iter().map(|(n, _)| n.clone()).collect::<Vec<_>>(),
        "metrics": metrics,
        "error": error.as_ref().map(|e| e.to_string()),
    });
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| RunError::Io(e.to_string()))?;
    let tmp = out_dir.join("manifest.json.tmp");
    {
        let mut f = fs::File::create(&tmp).map_err(|e| RunError::Io(e.to_string()))?;
        f.write_all(text.as_bytes())
            .map_err(|e| RunError::Io(e.to_string()))?;
    }
    fs::rename(&tmp, out_dir.join("manifest.json")).map_err(|e| RunError::Io(e.to_string()))?;

    match error {
        Some(e) => Err(e),
        None => Ok(RunOutcome {
            output_dir: out_dir,
            manifest,
        }),
    }
}
