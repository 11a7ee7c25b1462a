//! Fourier-side matrix of the strip control operator.
//!
//! Under the crate's convention the operator `h ↦ g·(h - ∫g h)` acts on
//! coefficient vectors of zero-mean fields as
//!
//! ```text
//!     (Gh)^(k) = Σ_{k₁}  ( ĝ(k-k₁) - 2π ĝ(k) ĝ(-k₁) ) ĥ(k₁),
//! ```
//!
//! the convolution by `ĝ` minus the rank-one mean correction. For a real
//! profile `ĝ(-k₁) = conj(ĝ(k₁))` and the matrix is Hermitian; for a bump
//! centered at the origin `ĝ` is real and the rank-one term reduces to
//! `2π ĝ(k) ĝ(k₁)`. The physical-space quadrature of the operator is the
//! source of truth and is pinned by tests.

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use std::f64::consts::TAU;
use std::io::Write;

use super::BumpProfile;
use crate::error::{Error, Result};
use crate::linalg::{matvec, spectral_norm};
use crate::spectral::ModeGrid1D;

/// Dense matrix of the control operator over the modes
/// `k ∈ {-K..K} \ {0}` in enumeration order.
#[derive(Debug, Clone)]
pub struct ControlMatrix {
    pub k_max: u32,
    pub entries: Array2<Complex64>,
}

impl ControlMatrix {
    pub fn grid(&self) -> ModeGrid1D {
        ModeGrid1D {
            k_max: self.k_max,
            include_zero: false,
        }
    }

    pub fn dim(&self) -> usize {
        2 * self.k_max as usize
    }

    pub fn entry(&self, k: i64, k1: i64) -> Option<Complex64> {
        let g = self.grid();
        Some(self.entries[(g.index(k)?, g.index(k1)?)])
    }

    /// Apply to a coefficient vector in enumeration order.
    pub fn apply(&self, v: &Array1<Complex64>) -> Array1<Complex64> {
        matvec(&self.entries, v)
    }

    /// Conjugate transpose: the adjoint with respect to the ℓ² pairing,
    /// which is the L² adjoint up to the uniform 2π weight.
    pub fn adjoint(&self) -> Array2<Complex64> {
        self.entries.t().mapv(|z| z.conj())
    }

    /// `M Mᴴ`, the Hermitian kernel entering observability Gramians.
    pub fn gram(&self) -> Array2<Complex64> {
        let n = self.dim();
        let mut out = Array2::default((n, n));
        for i in 0..n {
            for j in 0..=i {
                let mut acc = Complex64::default();
                for p in 0..n {
                    acc += self.entries[(i, p)] * self.entries[(j, p)].conj();
                }
                out[(i, j)] = acc;
                out[(j, i)] = acc.conj();
            }
        }
        out
    }

    /// CSV export with columns `k,k1,re,im`.
    pub fn to_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "k,k1,re,im")?;
        let grid = self.grid();
        for (i, k) in grid.ks().enumerate() {
            for (j, k1) in grid.ks().enumerate() {
                let z = self.entries[(i, j)];
                writeln!(out, "{},{},{},{}", k, k1, z.re, z.im)?;
            }
        }
        Ok(())
    }
}

/// Build the control matrix on modes `|k| ≤ K`; the bump must carry
/// coefficients up to `|m| ≤ 2K`.
pub fn control_matrix(bump: &BumpProfile, k_max: u32) -> Result<ControlMatrix> {
    if bump.m_max() < 2 * k_max as i64 {
        return Err(Error::config(format!(
            "control matrix at K = {k_max} needs bump coefficients up to |m| = {}, \
             profile holds |m| <= {}",
            2 * k_max,
            bump.m_max()
        )));
    }
    let grid = ModeGrid1D {
        k_max,
        include_zero: false,
    };
    let ks: Vec<i64> = grid.ks().collect();
    let n = ks.len();
    let mut entries = Array2::default((n, n));
    for (i, &k) in ks.iter().enumerate() {
        let gk = bump.coeff(k)?;
        for (j, &k1) in ks.iter().enumerate() {
            entries[(i, j)] = bump.coeff(k - k1)? - TAU * gk * bump.coeff(-k1)?;
        }
    }
    Ok(ControlMatrix { k_max, entries })
}

/// High-pass cutoff `χ`: 0 for `|ξ| ≤ inner`, 1 for `|ξ| ≥ outer`, cubic
/// smoothstep between.
#[derive(Debug, Clone, Copy)]
pub struct ChiCutoff {
    pub inner: f64,
    pub outer: f64,
}

impl Default for ChiCutoff {
    fn default() -> Self {
        ChiCutoff {
            inner: 1.0,
            outer: 2.0,
        }
    }
}

impl ChiCutoff {
    pub fn eval(&self, xi: f64) -> f64 {
        let a = xi.abs();
        if a <= self.inner {
            0.0
        } else if a >= self.outer {
            1.0
        } else {
            let s = (a - self.inner) / (self.outer - self.inner);
            s * s * (3.0 - 2.0 * s)
        }
    }
}

/// Matrix of the commutator `[χ(hD), g·]` on modes `|k| ≤ k_big` (zero
/// mode included): entries `(χ(hk) - χ(hk₁)) ĝ(k-k₁)`, zero beyond the
/// profile bandwidth.
pub fn commutator_matrix(
    g_hat: &dyn Fn(i64) -> Complex64,
    bandwidth: i64,
    chi: &dyn Fn(f64) -> f64,
    h: f64,
    k_big: i64,
) -> Array2<Complex64> {
    let n = (2 * k_big + 1) as usize;
    let mut c = Array2::default((n, n));
    for (i, k) in (-k_big..=k_big).enumerate() {
        let chi_k = chi(h * k as f64);
        for (j, k1) in (-k_big..=k_big).enumerate() {
            if (k - k1).abs() > bandwidth {
                continue;
            }
            let delta = chi_k - chi(h * k1 as f64);
            if delta != 0.0 {
                c[(i, j)] = g_hat(k - k1) * delta;
            }
        }
    }
    c
}

/// Operator-norm estimates of `[χ(hD), g·]` over a decreasing list of
/// semiclassical parameters.
///
/// The truncation `|k| ≤ ⌈outer/h⌉ + m_max` is exact: beyond it every
/// entry of the commutator vanishes because both cutoff values equal 1.
pub fn commutator_scaling(
    bump: &BumpProfile,
    chi: &ChiCutoff,
    h_list: &[f64],
) -> Result<Vec<(f64, f64)>> {
    if h_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::config("h_list must be strictly decreasing"));
    }
    let g_hat = |m: i64| bump.coeff(m).expect("within bandwidth");
    let chi_fn = |xi: f64| chi.eval(xi);
    h_list
        .iter()
        .map(|&h| {
            if h <= 0.0 {
                return Err(Error::config("h must be positive"));
            }
            let k_big = (chi.outer / h).ceil() as i64 + bump.m_max();
            let c = commutator_matrix(&g_hat, bump.m_max(), &chi_fn, h, k_big);
            Ok((h, spectral_norm(&c, 400)))
        })
        .collect()
}
