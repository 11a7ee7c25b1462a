//! The localization profile `g` and the strip control operators.
//!
//! For a vertical strip `(a,b) × T` the control input is
//!
//! ```text
//!     (G⊥h)(x,y) = g(x) ( h(x,y) - ∫_T g(x') h(x',y) dx' ),
//! ```
//!
//! and for a horizontal strip `T × (a,b)` the mirrored operator `G∥` acts
//! in `y`. Subtracting the `g`-weighted mean keeps the output in the zero
//! x-mean state space where `∂ₓ⁻¹` is defined.
//!
//! The profile is the polynomial bump `g(x) = c·(1 - s(x)²)³` on `[a,b]`
//! (`s` the affine map onto `[-1,1]`), which is `C²` at the endpoints and
//! normalized so `∫_T g = 1`, hence `ĝ(0) = 1/(2π)`.

mod matrix;

pub use matrix::{commutator_scaling, control_matrix, ChiCutoff, ControlMatrix};

use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::spectral::x_grid;

/// Direction a strip control acts in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    /// Strip `(a,b) × T`; the operator localizes in `x`.
    Vertical,
    /// Strip `T × (a,b)`; the operator localizes in `y`.
    Horizontal,
}

/// Localization profile: strip endpoints, closed-form evaluation and
/// Fourier coefficients `ĝ(m)` for `|m| ≤ m_max`.
#[derive(Debug, Clone)]
pub struct BumpProfile {
    pub a: f64,
    pub b: f64,
    /// Quadrature resolution at which the coefficients converged.
    pub n_quad: usize,
    coeffs: Vec<Complex64>,
    m_max: i64,
}

impl BumpProfile {
    /// Peak-normalization constant `c = 35 / (16 (b-a))`.
    fn amplitude(a: f64, b: f64) -> f64 {
        35.0 / (16.0 * (b - a))
    }

    /// Evaluate `g` at a point of `[-π, π)`.
    pub fn eval(&self, x: f64) -> f64 {
        if x <= self.a || x >= self.b {
            return 0.0;
        }
        let s = (2.0 * x - self.a - self.b) / (self.b - self.a);
        let w = 1.0 - s * s;
        Self::amplitude(self.a, self.b) * w * w * w
    }

    /// Largest represented coefficient index.
    pub fn m_max(&self) -> i64 {
        self.m_max
    }

    /// Fourier coefficient `ĝ(m)`.
    pub fn coeff(&self, m: i64) -> Result<Complex64> {
        if m.abs() > self.m_max {
            return Err(Error::config(format!(
                "bump coefficient ĝ({m}) not computed; profile holds |m| <= {}",
                self.m_max
            )));
        }
        Ok(self.coeffs[(m + self.m_max) as usize])
    }

    /// Samples of `g` on the uniform grid of `n` points.
    pub fn samples(&self, n: usize) -> Vec<f64> {
        x_grid(n).into_iter().map(|x| self.eval(x)).collect()
    }

    /// Serialized form `{a, b, coeffs}` with `[re, im]` coefficient pairs.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "a": self.a,
            "b": self.b,
            "coeffs": self.coeffs.iter().map(|c| [c.re, c.im]).collect::<Vec<_>>(),
        })
    }
}

/// Composite Simpson quadrature of `∫_a^b g(x) e^{-imx} dx / (2π)` for all
/// `|m| ≤ m_max` at a fixed resolution.
fn coeffs_at_resolution(a: f64, b: f64, m_max: i64, n: usize) -> Vec<Complex64> {
    let h = (b - a) / n as f64;
    let amp = BumpProfile::amplitude(a, b);
    // Simpson weights times g, precomputed once.
    let weighted: Vec<f64> = (0..=n)
        .map(|j| {
            let x = a + h * j as f64;
            let s = (2.0 * x - a - b) / (b - a);
            let w = 1.0 - s * s;
            let g = amp * w * w * w;
            let simpson = if j == 0 || j == n {
                1.0
            } else if j % 2 == 1 {
                4.0
            } else {
                2.0
            };
            g * simpson
        })
        .collect();

    (-m_max..=m_max)
        .into_par_iter()
        .map(|m| {
            let mf = m as f64;
            let step = Complex64::from_polar(1.0, -mf * h);
            let mut rot = Complex64::from_polar(1.0, -mf * a);
            let mut acc = Complex64::default();
            for (j, &w) in weighted.iter().enumerate() {
                // Re-anchor the incremental rotation so phase drift stays
                // below the 1e-10 refinement gate.
                if j % 1024 == 0 {
                    rot = Complex64::from_polar(1.0, -mf * (a + h * j as f64));
                }
                acc += rot * w;
                rot *= step;
            }
            acc * (h / 3.0) / TAU
        })
        .collect()
}

/// Build the bump profile on `[a, b]` with coefficients for
/// `|m| ≤ 2K + 1`.
///
/// The quadrature resolution starts at 4096 and doubles until two
/// successive resolutions agree to `1e-10` on every coefficient.
pub fn make_bump(a: f64, b: f64, k_max: u32) -> Result<BumpProfile> {
    if !(a >= -PI && a < b && b <= PI) {
        return Err(Error::config(format!(
            "bump endpoints must satisfy -π <= a < b <= π, got a = {a}, b = {b}"
        )));
    }
    let m_max = 2 * k_max as i64 + 1;
    let mut n = 4096usize;
    let mut coarse = coeffs_at_resolution(a, b, m_max, n);
    loop {
        let fine = coeffs_at_resolution(a, b, m_max, 2 * n);
        let diff = coarse
            .iter()
            .zip(fine.iter())
            .map(|(c, f)| (c - f).norm())
            .fold(0.0f64, f64::max);
        if diff <= 1e-10 {
            let g0 = fine[m_max as usize];
            debug_assert!((g0.re - 1.0 / TAU).abs() <= 1e-10 && g0.im.abs() <= 1e-12);
            return Ok(BumpProfile {
                a,
                b,
                n_quad: 2 * n,
                coeffs: fine,
                m_max,
            });
        }
        coarse = fine;
        n *= 2;
        if n > 1 << 20 {
            return Err(Error::config(
                "bump quadrature did not converge to 1e-10; endpoints too extreme",
            ));
        }
    }
}

/// Apply a strip control operator with an explicitly sampled profile.
///
/// `g` must be sampled on the same uniform grid as the field axis it acts
/// on; the inner integral uses the periodic trapezoid rule, exact for
/// band-limited integrands.
pub fn apply_localized(
    g: &[f64],
    orientation: Orientation,
    field: &Array2<Complex64>,
) -> Result<Array2<Complex64>> {
    let (ny, nx) = field.dim();
    let axis_len = match orientation {
        Orientation::Vertical => nx,
        Orientation::Horizontal => ny,
    };
    if g.len() != axis_len {
        return Err(Error::config(format!(
            "profile sampled on {} points but the {} axis has {}",
            g.len(),
            match orientation {
                Orientation::Vertical => "x",
                Orientation::Horizontal => "y",
            },
            axis_len
        )));
    }
    let mut out = Array2::default((ny, nx));
    match orientation {
        Orientation::Vertical => {
            let weight = TAU / nx as f64;
            for iy in 0..ny {
                let mut mean = Complex64::default();
                for ix in 0..nx {
                    mean += field[(iy, ix)] * g[ix];
                }
                mean *= weight;
                for ix in 0..nx {
                    out[(iy, ix)] = g[ix] * (field[(iy, ix)] - mean);
                }
            }
        }
        Orientation::Horizontal => {
            let weight = TAU / ny as f64;
            for ix in 0..nx {
                let mut mean = Complex64::default();
                for iy in 0..ny {
                    mean += field[(iy, ix)] * g[iy];
                }
                mean *= weight;
                for iy in 0..ny {
                    out[(iy, ix)] = g[iy] * (field[(iy, ix)] - mean);
                }
            }
        }
    }
    Ok(out)
}

/// Apply `G⊥` (vertical) or `G∥` (horizontal) to physical samples.
pub fn apply_control_op(
    bump: &BumpProfile,
    orientation: Orientation,
    field: &Array2<Complex64>,
) -> Result<Array2<Complex64>> {
    let (ny, nx) = field.dim();
    if nx < 2 || ny < 2 {
        return Err(Error::config("control operator needs at least a 2×2 grid"));
    }
    let g = match orientation {
        Orientation::Vertical => bump.samples(nx),
        Orientation::Horizontal => bump.samples(ny),
    };
    apply_localized(&g, orientation, field)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::x_grid;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn invalid_endpoints_rejected() {
        assert!(make_bump(0.5, 0.5, 4).is_err());
        assert!(make_bump(1.0, 0.0, 4).is_err());
        assert!(make_bump(-4.0, 0.0, 4).is_err());
    }

    #[test]
    fn zeroth_coefficient_is_one_over_two_pi() {
        let bump = make_bump(-FRAC_PI_2, FRAC_PI_2, 4).unwrap();
        let g0 = bump.coeff(0).unwrap();
        assert!((g0.re - 1.0 / TAU).abs() < 1e-10);
        assert!(g0.im.abs() < 1e-12);
    }

    #[test]
    fn centered_bump_has_real_coefficients() {
        let bump = make_bump(-FRAC_PI_2, FRAC_PI_2, 6).unwrap();
        for m in -bump.m_max()..=bump.m_max() {
            assert!(
                bump.coeff(m).unwrap().im.abs() < 1e-12,
                "ĝ({m}) not real"
            );
        }
    }

    #[test]
    fn coefficients_bounded_by_mass() {
        let bump = make_bump(0.0, 1.0, 8).unwrap();
        for m in -bump.m_max()..=bump.m_max() {
            assert!(bump.coeff(m).unwrap().norm() <= 1.0 / TAU + 1e-12);
        }
    }

    #[test]
    fn off_center_bump_is_even_about_its_midpoint() {
        // ĝ(m) e^{im(a+b)/2} is real for a bump even about the midpoint.
        let bump = make_bump(0.2, 1.4, 6).unwrap();
        let mid = (bump.a + bump.b) / 2.0;
        for m in -bump.m_max()..=bump.m_max() {
            let rotated = bump.coeff(m).unwrap() * Complex64::from_polar(1.0, m as f64 * mid);
            assert!(rotated.im.abs() < 1e-10, "m = {m}: {rotated}");
        }
    }

    #[test]
    fn refinement_oracle_for_a_single_coefficient() {
        // Independent quadrature at double the stored resolution.
        let bump = make_bump(-1.0, 1.0, 4).unwrap();
        let check = coeffs_at_resolution(-1.0, 1.0, bump.m_max(), 2 * bump.n_quad);
        let m = 1i64;
        let stored = bump.coeff(m).unwrap();
        let refined = check[(m + bump.m_max()) as usize];
        assert!((stored - refined).norm() < 1e-10);
    }

    #[test]
    fn normalization_against_simpson() {
        let bump = make_bump(-1.3, 0.4, 2).unwrap();
        // ∫ g = 2π ĝ(0) = 1.
        assert!((bump.coeff(0).unwrap().re * TAU - 1.0).abs() < 1e-10);
    }

    fn constant_in_x(ny: usize, nx: usize) -> Array2<Complex64> {
        let mut f = Array2::default((ny, nx));
        for (iy, y) in x_grid(ny).iter().enumerate() {
            for ix in 0..nx {
                f[(iy, ix)] = Complex64::new(y.cos(), 0.3 * y.sin());
            }
        }
        f
    }

    #[test]
    fn vertical_kills_fields_constant_in_x() {
        // The cancellation h - ∫gh needs the quadrature of ∫g = 1, whose
        // trapezoid error decays like N⁻⁴; a fine x grid reaches 1e-10.
        let bump = make_bump(-FRAC_PI_2, FRAC_PI_2, 4).unwrap();
        let field = constant_in_x(16, 4096);
        let out = apply_control_op(&bump, Orientation::Vertical, &field).unwrap();
        let worst = out.iter().map(|z| z.norm()).fold(0.0f64, f64::max);
        assert!(worst < 1e-10);
    }

    #[test]
    fn horizontal_kills_fields_constant_in_y() {
        let bump = make_bump(-1.0, 1.0, 4).unwrap();
        let mut field = Array2::default((4096, 16));
        for (ix, x) in x_grid(16).iter().enumerate() {
            for iy in 0..4096 {
                field[(iy, ix)] = Complex64::new(x.sin(), x.cos());
            }
        }
        let out = apply_control_op(&bump, Orientation::Horizontal, &field).unwrap();
        let worst = out.iter().map(|z| z.norm()).fold(0.0f64, f64::max);
        assert!(worst < 1e-10);
    }

    #[test]
    fn vertical_output_has_zero_x_mean() {
        // ∫ (G⊥h) dx = ∫gh - (∫g)(∫gh) = 0 since ∫g = 1; discretely the
        // defect is the trapezoid error of ∫g, which is O(N⁻⁴) for the C²
        // bump.
        let bump = make_bump(-FRAC_PI_2, FRAC_PI_2, 4).unwrap();
        let nx = 4096;
        let ny = 6;
        let mut field = Array2::default((ny, nx));
        for (iy, y) in x_grid(ny).iter().enumerate() {
            for (ix, x) in x_grid(nx).iter().enumerate() {
                field[(iy, ix)] = Complex64::new((2.0 * x).sin() + y.cos(), x.cos());
            }
        }
        let out = apply_control_op(&bump, Orientation::Vertical, &field).unwrap();
        for iy in 0..ny {
            let mut mean = Complex64::default();
            for ix in 0..nx {
                mean += out[(iy, ix)];
            }
            mean *= TAU / nx as f64;
            assert!(mean.norm() < 1e-10, "x-mean {mean} at row {iy}");
        }
    }

    #[test]
    fn vertical_on_the_bump_itself_matches_direct_quadrature() {
        // h(x,y) = g(x): result should be g·(g - ∫g²).
        let bump = make_bump(-FRAC_PI_2, FRAC_PI_2, 4).unwrap();
        let nx = 1024;
        let ny = 4;
        let g = bump.samples(nx);
        let mut field = Array2::default((ny, nx));
        for iy in 0..ny {
            for ix in 0..nx {
                field[(iy, ix)] = Complex64::new(g[ix], 0.0);
            }
        }
        let out = apply_control_op(&bump, Orientation::Vertical, &field).unwrap();
        let g_sq_int: f64 = g.iter().map(|v| v * v).sum::<f64>() * TAU / nx as f64;
        for ix in 0..nx {
            let expect = g[ix] * (g[ix] - g_sq_int);
            assert!((out[(0, ix)].re - expect).abs() < 1e-9);
            assert!(out[(0, ix)].im.abs() < 1e-12);
        }
    }

    #[test]
    fn profile_length_mismatch_is_config_error() {
        let bump = make_bump(-1.0, 1.0, 2).unwrap();
        let field = Array2::default((8, 16));
        let g = bump.samples(8);
        assert!(apply_localized(&g, Orientation::Vertical, &field).is_err());
    }
}
