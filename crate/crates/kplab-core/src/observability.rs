//! Quantitative observability experiments: λ-scans of Gramian coercivity,
//! Ingham-constant estimation, frequency-gap analysis and the geodesic
//! transit-time criterion.
//!
//! The scans measure truncated surrogates of the observability constant:
//! the smallest eigenvalue of the per-λ Gramian, the extremal eigenvalues
//! of the exponential Gram matrix on `L²(0,T)`, and the worst-case time a
//! horizontal ray needs to enter a strip at the minimal group speed
//! `min_k (3k² + λ²/k²)`.

use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::{PI, TAU};

use crate::control::BumpProfile;
use crate::control::{control_matrix, ControlMatrix};
use crate::error::{Error, Result};
use crate::hum::{block_frequencies, gramian_block, time_kernel};
use crate::linalg::jacobi_eigen;

/// One row of a λ-scan.
#[derive(Debug, Clone, Serialize)]
pub struct ScanRow {
    pub lambda: f64,
    pub min_eig: f64,
    pub condition: f64,
    /// Minimal frequency separation `|ω_λ(k) - ω_λ(k')|` over `k ≠ k'`.
    pub gap: f64,
}

/// Extremal quadratic-form bounds of an exponential family on `L²(0,T)`.
#[derive(Debug, Clone, Serialize)]
pub struct InghamReport {
    pub freqs: Vec<f64>,
    pub t_final: f64,
    /// Minimal consecutive frequency gap.
    pub gamma: f64,
    pub c1: f64,
    pub c2: f64,
}

/// Transit data of horizontal rays for one λ.
#[derive(Debug, Clone, Serialize)]
pub struct TransitRow {
    pub lambda: f64,
    /// Minimal group speed over integer modes `1 ≤ |k| ≤ K`.
    pub v_min: f64,
    /// Worst-case entry time into the strip from the farthest point.
    pub t_max: f64,
}

fn pairwise_gap(freqs: &[f64]) -> f64 {
    let mut sorted = freqs.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    sorted
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min)
}

/// Scan Gramian coercivity over a λ list.
///
/// With `weak_kappa` present, the spectrum of `Λ + κ·diag(1/(1+k²))` is
/// measured instead: the discrete form of weak observability with an
/// `H⁻¹` remainder.
pub fn lambda_scan(
    bump: &BumpProfile,
    k_max: u32,
    t_final: f64,
    lambdas: &[f64],
    weak_kappa: Option<f64>,
) -> Result<Vec<ScanRow>> {
    if lambdas.is_empty() {
        return Err(Error::config("lambda_scan requires a nonempty lambda list"));
    }
    if lambdas.iter().any(|&l| l < 0.0) {
        return Err(Error::config("lambda_scan requires lambdas >= 0"));
    }
    let m = control_matrix(bump, k_max)?;
    lambdas
        .par_iter()
        .map(|&lambda| scan_row(&m, k_max, t_final, lambda, weak_kappa))
        .collect()
}

fn scan_row(
    m: &ControlMatrix,
    k_max: u32,
    t_final: f64,
    lambda: f64,
    weak_kappa: Option<f64>,
) -> Result<ScanRow> {
    let block = gramian_block(m, lambda, t_final)?;
    let freqs = block_frequencies(k_max, lambda);
    let mut gap = f64::INFINITY;
    for i in 0..freqs.len() {
        for j in (i + 1)..freqs.len() {
            gap = gap.min((freqs[i] - freqs[j]).abs());
        }
    }
    let (min_eig, condition) = match weak_kappa {
        None => (block.min_eig, block.condition()),
        Some(kappa) => {
            let k = k_max as i64;
            let mut shifted = block.matrix.clone();
            for (i, kk) in (-k..=k).filter(|&v| v != 0).enumerate() {
                shifted[(i, i)] += Complex64::new(kappa / (1.0 + (kk * kk) as f64), 0.0);
            }
            let eig = jacobi_eigen(&shifted)?;
            let min = eig.values[0];
            let max = *eig.values.last().expect("nonempty");
            (min, if min > 0.0 { max / min } else { f64::INFINITY })
        }
    };
    Ok(ScanRow {
        lambda,
        min_eig,
        condition,
        gap,
    })
}

/// λ values at which two represented frequencies collide exactly:
/// `ω_λ(k) = ω_λ(k')` forces `λ² = -k k' (k² + k k' + k'²)`, solvable for
/// opposite-sign pairs.
pub fn resonant_lambdas(k_max: u32) -> Vec<f64> {
    let k = k_max as i64;
    let mut out = Vec::new();
    for a in 1..=k {
        for b in 1..=k {
            // Pair (a, -b): λ² = a·b·(a² - ab + b²).
            let sq = (a * b * (a * a - a * b + b * b)) as f64;
            if sq > 0.0 {
                let lam = sq.sqrt();
                if !out.iter().any(|&x: &f64| (x - lam).abs() < 1e-9) {
                    out.push(lam);
                }
            }
        }
    }
    out.sort_by(|x, y| x.partial_cmp(y).unwrap());
    out
}

/// Gram matrix bounds of `{e^{itλ_k}}` on `L²(0,T)`.
pub fn ingham_estimate(freqs: &[f64], t_final: f64) -> Result<InghamReport> {
    if freqs.is_empty() {
        return Err(Error::domain("ingham_estimate requires frequencies"));
    }
    let mut sorted = freqs.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::domain("duplicate frequencies in Ingham family"));
    }
    let n = sorted.len();
    let mut a: Array2<Complex64> = Array2::default((n, n));
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] = time_kernel(sorted[i] - sorted[j], t_final);
        }
    }
    let eig = jacobi_eigen(&a)?;
    let gamma = if n >= 2 { pairwise_gap(&sorted) } else { f64::INFINITY };
    Ok(InghamReport {
        freqs: sorted,
        t_final,
        gamma,
        c1: eig.values[0],
        c2: *eig.values.last().expect("nonempty"),
    })
}

/// Minimal consecutive difference of a sorted frequency list.
pub fn gap(freqs: &[f64]) -> Result<f64> {
    if freqs.len() < 2 {
        return Err(Error::domain("gap requires at least two frequencies"));
    }
    Ok(pairwise_gap(freqs))
}

/// Worst-case transit times of horizontal rays into the strip `(a,b)`.
pub fn transit_report(a: f64, b: f64, lambdas: &[f64], k_max: u32) -> Result<Vec<TransitRow>> {
    if !(a >= -PI && a < b && b <= PI) {
        return Err(Error::config(format!(
            "strip endpoints must satisfy -π <= a < b <= π, got a = {a}, b = {b}"
        )));
    }
    let worst_distance = TAU - (b - a);
    Ok(lambdas
        .iter()
        .map(|&lambda| {
            let v_min = (1..=k_max as i64)
                .map(|k| {
                    let k2 = (k * k) as f64;
                    3.0 * k2 + lambda * lambda / k2
                })
                .fold(f64::INFINITY, f64::min);
            TransitRow {
                lambda,
                v_min,
                t_max: worst_distance / v_min,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::make_bump;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn scan_is_deterministic_and_matches_direct_recompute() {
        let bump = make_bump(-FRAC_PI_2, FRAC_PI_2, 4).unwrap();
        let lambdas = [0.0, 0.5, 1.0];
        let rows = lambda_scan(&bump, 4, 2.0, &lambdas, None).unwrap();
        // λ = 0 row equals an independent gramian_block call, bit for bit.
        let m = control_matrix(&bump, 4).unwrap();
        let direct = gramian_block(&m, 0.0, 2.0).unwrap();
        assert_eq!(rows[0].min_eig.to_bits(), direct.min_eig.to_bits());
        // Rerun the whole scan: identical rows.
        let again = lambda_scan(&bump, 4, 2.0, &lambdas, None).unwrap();
        for (x, y) in rows.iter().zip(again.iter()) {
            assert_eq!(x.min_eig.to_bits(), y.min_eig.to_bits());
            assert_eq!(x.condition.to_bits(), y.condition.to_bits());
            assert_eq!(x.gap.to_bits(), y.gap.to_bits());
        }
    }

    #[test]
    fn resonant_lambda_one_keeps_coercivity() {
        // At λ = 1 the modes k = ±1 are frequency-degenerate (ω = 0), yet
        // the Gramian stays positive because M Mᴴ couples them.
        let bump = make_bump(-FRAC_PI_2, FRAC_PI_2, 4).unwrap();
        let rows = lambda_scan(&bump, 4, 2.0, &[1.0], None).unwrap();
        assert!(rows[0].gap < 1e-9, "gap {} should vanish", rows[0].gap);
        assert!(rows[0].min_eig > 0.0);
    }

    #[test]
    fn resonant_values_include_known_cases() {
        let res = resonant_lambdas(4);
        for expect in [1.0, 6f64.sqrt(), 4.0, 9.0, 16.0] {
            assert!(
                res.iter().any(|&x| (x - expect).abs() < 1e-9),
                "{expect} missing from {res:?}"
            );
        }
    }

    #[test]
    fn weak_variant_shifts_spectrum_up() {
        let bump = make_bump(-FRAC_PI_2, FRAC_PI_2, 4).unwrap();
        let plain = lambda_scan(&bump, 4, 2.0, &[3.0], None).unwrap();
        let weak = lambda_scan(&bump, 4, 2.0, &[3.0], Some(1.0)).unwrap();
        assert!(weak[0].min_eig > plain[0].min_eig);
        // κ·diag(1/(1+k²)) lifts the bottom by at least κ/(1+K²).
        assert!(weak[0].min_eig >= plain[0].min_eig + 1.0 / 17.0 - 1e-12);
    }

    #[test]
    fn ingham_single_frequency() {
        let r = ingham_estimate(&[5.0], 2.5).unwrap();
        assert!((r.c1 - 2.5).abs() < 1e-12);
        assert!((r.c2 - 2.5).abs() < 1e-12);
    }

    #[test]
    fn ingham_orthogonal_pair_over_full_period() {
        let t = 0.7;
        let r = ingham_estimate(&[0.0, TAU / t], t).unwrap();
        assert!((r.c1 - t).abs() < 1e-12);
        assert!((r.c2 - t).abs() < 1e-12);
    }

    #[test]
    fn ingham_cubic_family_is_coercive() {
        let freqs: Vec<f64> = (1..=6).map(|k| (k * k * k) as f64).collect();
        let t = 1.5 * TAU / 7.0;
        let r = ingham_estimate(&freqs, t).unwrap();
        assert_eq!(r.gamma, 7.0);
        assert!(r.c1 > 0.0);
        assert!(r.c1 <= r.c2);
    }

    #[test]
    fn ingham_rejects_duplicates() {
        assert!(matches!(
            ingham_estimate(&[1.0, 1.0, 2.0], 1.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn ingham_sandwich_on_random_vectors() {
        let freqs: Vec<f64> = (1..=5).map(|k| (k * k * k) as f64).collect();
        let t = 1.5 * TAU / 7.0;
        let r = ingham_estimate(&freqs, t).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n_t = 8192;
        let h = t / n_t as f64;
        for _ in 0..20 {
            let a: Vec<Complex64> = (0..freqs.len())
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let sum_sq: f64 = a.iter().map(|z| z.norm_sqr()).sum();
            let mut middle = 0.0;
            for j in 0..=n_t {
                let w = if j == 0 || j == n_t {
                    1.0
                } else if j % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                let tv = h * j as f64;
                let val: Complex64 = a
                    .iter()
                    .zip(freqs.iter())
                    .map(|(z, &f)| z * Complex64::from_polar(1.0, f * tv))
                    .sum();
                middle += w * val.norm_sqr();
            }
            middle *= h / 3.0;
            let slack = 1e-9 * r.c2 * sum_sq;
            assert!(r.c1 * sum_sq - slack <= middle);
            assert!(middle <= r.c2 * sum_sq + slack);
        }
    }

    #[test]
    fn gap_hand_values() {
        assert_eq!(gap(&[1.0, 8.0, 27.0]).unwrap(), 7.0);
        assert_eq!(gap(&[0.0, 3.0, 6.0]).unwrap(), 3.0);
        assert!(gap(&[1.0]).is_err());
    }

    #[test]
    fn gap_of_lambda_family_matches_consecutive_minimum() {
        // λ = 10, k = 1..5: ω is increasing, so the sorted consecutive gap
        // is the minimum of ω(k+1) - ω(k).
        let lambda = 10.0f64;
        let omega = |k: f64| k * k * k - lambda * lambda / k;
        let freqs: Vec<f64> = (1..=5).map(|k| omega(k as f64)).collect();
        let direct = (1..5)
            .map(|k| omega(k as f64 + 1.0) - omega(k as f64))
            .fold(f64::INFINITY, f64::min);
        assert!((gap(&freqs).unwrap() - direct).abs() < 1e-12);
    }

    #[test]
    fn transit_hand_values() {
        // λ = 0: v_min = 3 at k = ±1; strip (-π/2, π/2) leaves distance
        // 2π - π = π, so t_max = π/3.
        let rows = transit_report(-FRAC_PI_2, FRAC_PI_2, &[0.0, 6.0], 4).unwrap();
        assert!((rows[0].v_min - 3.0).abs() < 1e-14);
        assert!((rows[0].t_max - PI / 3.0).abs() < 1e-14);
        // λ = 6: min(3 + 36, 12 + 9, 27 + 4) = 21 at k = ±2.
        assert!((rows[1].v_min - 21.0).abs() < 1e-12);
    }

    #[test]
    fn transit_speed_am_gm_lower_bound() {
        let lambdas: Vec<f64> = (0..40).map(|i| i as f64 * 1.3).collect();
        let rows = transit_report(-1.0, 1.0, &lambdas, 6).unwrap();
        for row in rows {
            assert!(row.v_min >= 2.0 * 3f64.sqrt() * row.lambda - 1e-9);
        }
    }
}
