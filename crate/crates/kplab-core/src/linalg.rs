//! Dense complex Hermitian kernels sized for desk-scale Gramians
//! (n ≤ 512): a cyclic Jacobi eigensolver, Cholesky with a fixed number of
//! refinement passes, Jacobi-preconditioned conjugate gradient, and power
//! iteration for spectral norms.
//!
//! Everything here is deterministic: no pivolt randomization, fixed
//! iteration orders, fixed starting vectors.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest entrywise deviation from Hermitian symmetry.
pub fn hermitian_defect(a: &Array2<Complex64>) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn frobenius_norm(a: &Array2<Complex64>) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn off_diagonal_norm(a: &Array2<Complex64>) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += a[(i, j)].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

/// Full eigendecomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Eigenvalues, ascending.
    pub values: Vec<f64>,
    /// Unit eigenvectors; column `i` pairs with `values[i]`.
    pub vectors: Array2<Complex64>,
}

/// Cyclic Jacobi rotations for complex Hermitian matrices.
///
/// Each sweep annihilates every off-diagonal pair `(p, q)` in turn with a
/// unitary plane rotation; quadratic convergence sets in after a few
/// sweeps. Input symmetry is checked against `1e-10` times the matrix
/// scale.
pub fn jacobi_eigen(a: &Array2<Complex64>) -> Result<HermitianEigen> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::domain("jacobi_eigen requires a square matrix"));
    }
    let scale = frobenius_norm(a).max(f64::MIN_POSITIVE);
    if hermitian_defect(a) > 1e-10 * scale {
        return Err(Error::domain(format!(
            "matrix is not Hermitian: defect {:.3e} exceeds 1e-10 * {:.3e}",
            hermitian_defect(a),
            scale
        )));
    }

    let mut h = a.clone();
    // Symmetrize exactly so rounding in the input cannot bias sweeps.
    for i in 0..n {
        h[(i, i)] = Complex64::new(h[(i, i)].re, 0.0);
        for j in (i + 1)..n {
            let m = (h[(i, j)] + h[(j, i)].conj()) * 0.5;
            h[(i, j)] = m;
            h[(j, i)] = m.conj();
        }
    }
    let mut v: Array2<Complex64> = Array2::eye(n);
    let tol = 1e-13 * scale;

    for _sweep in 0..60 {
        if off_diagonal_norm(&h) <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = h[(p, q)];
                let r = apq.norm();
                if r <= tol / (n as f64) {
                    continue;
                }
                let alpha = apq.arg();
                let phase = Complex64::from_polar(1.0, alpha);
                let app = h[(p, p)].re;
                let aqq = h[(q, q)].re;
                // tan θ of the equivalent real rotation, smaller root.
                let tau = (aqq - app) / (2.0 * r);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let sp = phase * s; // s · e^{iα}

                // Columns p, q of H and of the accumulated basis.
                for i in 0..n {
                    let hip = h[(i, p)];
                    let hiq = h[(i, q)];
                    h[(i, p)] = hip * c - hiq * sp.conj();
                    h[(i, q)] = hip * sp + hiq * c;
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = vip * c - viq * sp.conj();
                    v[(i, q)] = vip * sp + viq * c;
                }
                // Rows p, q of H (left multiplication by Jᴴ).
                for j in 0..n {
                    let hpj = h[(p, j)];
                    let hqj = h[(q, j)];
                    h[(p, j)] = hpj * c - hqj * sp;
                    h[(q, j)] = hpj * sp.conj() + hqj * c;
                }
                h[(p, q)] = Complex64::default();
                h[(q, p)] = Complex64::default();
                h[(p, p)] = Complex64::new(app - t * r, 0.0);
                h[(q, q)] = Complex64::new(aqq + t * r, 0.0);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| h[(i, i)].re.partial_cmp(&h[(j, j)].re).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| h[(i, i)].re).collect();
    let mut vectors = Array2::default((n, n));
    for (dst, &src) in order.iter().enumerate() {
        for i in 0..n {
            vectors[(i, dst)] = v[(i, src)];
        }
    }
    Ok(HermitianEigen { values, vectors })
}

/// Smallest eigenvalue and its unit eigenvector.
pub fn min_eig(a: &Array2<Complex64>) -> Result<(f64, Array1<Complex64>)> {
    let eig = jacobi_eigen(a)?;
    let vec = eig.vectors.column(0).to_owned();
    Ok((eig.values[0], vec))
}

/// Lower Cholesky factor of a Hermitian positive definite matrix.
pub fn cholesky(a: &Array2<Complex64>) -> Result<Array2<Complex64>> {
    let n = a.nrows();
    let mut l: Array2<Complex64> = Array2::default((n, n));
    for j in 0..n {
        let mut d = a[(j, j)].re;
        for p in 0..j {
            d -= l[(j, p)].norm_sqr();
        }
        if d <= 0.0 || !d.is_finite() {
            return Err(Error::domain(format!(
                "Cholesky breakdown at column {j}: pivot {d:.3e}"
            )));
        }
        let djj = d.sqrt();
        l[(j, j)] = Complex64::new(djj, 0.0);
        for i in (j + 1)..n {
            let mut sum = a[(i, j)];
            for p in 0..j {
                sum -= l[(i, p)] * l[(j, p)].conj();
            }
            l[(i, j)] = sum / djj;
        }
    }
    Ok(l)
}

/// Solve `L Lᴴ x = b` given the lower factor.
pub fn cholesky_solve(l: &Array2<Complex64>, b: &Array1<Complex64>) -> Array1<Complex64> {
    let n = l.nrows();
    let mut y = b.clone();
    for i in 0..n {
        for j in 0..i {
            let yj = y[j];
            y[i] -= l[(i, j)] * yj;
        }
        y[i] /= l[(i, i)];
    }
    for i in (0..n).rev() {
        for j in (i + 1)..n {
            let yj = y[j];
            y[i] -= l[(j, i)].conj() * yj;
        }
        y[i] /= l[(i, i)];
    }
    y
}

pub fn matvec(a: &Array2<Complex64>, x: &Array1<Complex64>) -> Array1<Complex64> {
    let n = a.nrows();
    let mut out = Array1::default(n);
    for i in 0..n {
        let mut acc = Complex64::default();
        for j in 0..a.ncols() {
            acc += a[(i, j)] * x[j];
        }
        out[i] = acc;
    }
    out
}

fn inner(x: &Array1<Complex64>, y: &Array1<Complex64>) -> Complex64 {
    x.iter().zip(y.iter()).map(|(a, b)| a.conj() * b).sum()
}

pub fn vec_norm(x: &Array1<Complex64>) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Cholesky solve with a fixed number of refinement passes.
///
/// The pass count is unconditional rather than residual-driven so that
/// structurally identical systems take bitwise identical paths.
pub fn solve_refined(
    a: &Array2<Complex64>,
    l: &Array2<Complex64>,
    b: &Array1<Complex64>,
    passes: usize,
) -> Array1<Complex64> {
    let mut x = cholesky_solve(l, b);
    for _ in 0..passes {
        let r = b - &matvec(a, &x);
        let dx = cholesky_solve(l, &r);
        x = &x + &dx;
    }
    x
}

/// Jacobi-preconditioned conjugate gradient for Hermitian positive
/// definite systems.
pub fn cg_jacobi(
    a: &Array2<Complex64>,
    b: &Array1<Complex64>,
    rel_tol: f64,
    max_iter: usize,
) -> Result<Array1<Complex64>> {
    let n = a.nrows();
    let precond: Vec<f64> = (0..n)
        .map(|i| {
            let d = a[(i, i)].re;
            if d > 0.0 {
                1.0 / d
            } else {
                1.0
            }
        })
        .collect();
    let apply_precond = |r: &Array1<Complex64>| -> Array1<Complex64> {
        Array1::from_iter(r.iter().zip(precond.iter()).map(|(z, &m)| z * m))
    };

    let b_norm = vec_norm(b).max(f64::MIN_POSITIVE);
    let mut x: Array1<Complex64> = Array1::default(n);
    let mut r = b.clone();
    let mut z = apply_precond(&r);
    let mut p = z.clone();
    let mut rz = inner(&r, &z).re;
    for _ in 0..max_iter {
        if vec_norm(&r) <= rel_tol * b_norm {
            return Ok(x);
        }
        let ap = matvec(a, &p);
        let pap = inner(&p, &ap).re;
        if pap <= 0.0 || !pap.is_finite() {
            return Err(Error::domain(
                "conjugate gradient encountered a non-positive curvature direction",
            ));
        }
        let alpha = rz / pap;
        x = &x + &p.mapv(|v| v * alpha);
        r = &r - &ap.mapv(|v| v * alpha);
        z = apply_precond(&r);
        let rz_new = inner(&r, &z).re;
        let beta = rz_new / rz;
        p = &z + &p.mapv(|v| v * beta);
        rz = rz_new;
    }
    if vec_norm(&r) <= rel_tol * b_norm {
        Ok(x)
    } else {
        Err(Error::domain(format!(
            "conjugate gradient stalled: residual {:.3e} after {max_iter} iterations",
            vec_norm(&r) / b_norm
        )))
    }
}

/// Spectral norm estimate by power iteration on `AᴴA`.
///
/// The starting vector is the deterministic all-ones direction.
pub fn spectral_norm(a: &Array2<Complex64>, max_iter: usize) -> f64 {
    let n = a.ncols();
    if n == 0 {
        return 0.0;
    }
    let mut v: Array1<Complex64> =
        Array1::from_elem(n, Complex64::new(1.0 / (n as f64).sqrt(), 0.0));
    let at = a.t().mapv(|z| z.conj());
    let mut sigma2 = 0.0f64;
    for _ in 0..max_iter {
        let w = matvec(a, &v);
        let u = matvec(&at, &w);
        let norm = vec_norm(&u);
        if norm == 0.0 {
            return 0.0;
        }
        let next = u.mapv(|z| z / norm);
        let new_sigma2 = inner(&next, &matvec(&at, &matvec(a, &next))).re;
        let done = (new_sigma2 - sigma2).abs() <= 1e-12 * new_sigma2.max(1e-300);
        sigma2 = new_sigma2;
        v = next;
        if done {
            break;
        }
    }
    sigma2.max(0.0).sqrt()
}
