//! Dispersion relations and exact linear propagators.
//!
//! Every linear evolution handled here is diagonal on Fourier modes: the
//! solution of the free equation is `û(t) = e^{itω} û(0)` with the
//! frequency `ω` listed below, so propagation is an exact unitary phase
//! multiplication and no time-stepping error enters the linear theory.

use num_complex::Complex64;

use super::spectrum::{Spectrum1D, Spectrum2D};
use crate::error::{Error, Result};

/// The dispersion family of the laboratory.
///
/// * `Kp2d` — linearized KP-II on `T²`: `ω(k,l) = k³ - l²/k`.
/// * `Lambda1d(λ)` — the transverse-frequency reduction
///   `∂ₜu + ∂ₓ³u - λ²∂ₓ⁻¹u = 0`: `ω_λ(k) = k³ - λ²/k`.
/// * `Semiclassical(h)` — `h∂ₜu + (h∂ₓ)³u - (h∂ₓ)⁻¹u = 0`:
///   `ω(k) = h²k³ - 1/(h²k)`.
/// * `Schrodinger(h)` — `ih∂ₜu + h²∂ₓ²u = 0`: `ω(k) = -hk²`.
///
/// With `λ² = h⁻⁴` the `Lambda1d` flow at time `h²t` coincides with the
/// `Semiclassical(h)` flow at time `t`, exactly:
/// `(k³ - h⁻⁴/k)·h²t = (h²k³ - 1/(h²k))·t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DispersionVariant {
    Kp2d,
    Lambda1d(f64),
    Semiclassical(f64),
    Schrodinger(f64),
}

impl DispersionVariant {
    pub fn validate(&self) -> Result<()> {
        match *self {
            DispersionVariant::Kp2d => Ok(()),
            DispersionVariant::Lambda1d(lambda) => {
                if lambda < 0.0 || !lambda.is_finite() {
                    Err(Error::domain(format!(
                        "Lambda1d requires lambda >= 0, got {lambda}"
                    )))
                } else {
                    Ok(())
                }
            }
            DispersionVariant::Semiclassical(h) | DispersionVariant::Schrodinger(h) => {
                if h <= 0.0 || h >= 1.0 {
                    Err(Error::domain(format!(
                        "semiclassical parameter must lie in (0,1), got {h}"
                    )))
                } else {
                    Ok(())
                }
            }
        }
    }

    fn name(&self) -> &'static str {
        match self {
            DispersionVariant::Kp2d => "Kp2d",
            DispersionVariant::Lambda1d(_) => "Lambda1d",
            DispersionVariant::Semiclassical(_) => "Semiclassical",
            DispersionVariant::Schrodinger(_) => "Schrodinger",
        }
    }
}

/// Frequency of the 2D mode `(k, l)`; only `Kp2d` is a 2D variant.
pub fn omega_2d(k: i64, l: i64, variant: DispersionVariant) -> Result<f64> {
    variant.validate()?;
    match variant {
        DispersionVariant::Kp2d => {
            if k == 0 {
                return Err(Error::domain("k = 0 is forbidden for variant Kp2d"));
            }
            let kf = k as f64;
            Ok(kf * kf * kf - (l * l) as f64 / kf)
        }
        other => Err(Error::domain(format!(
            "variant {} is one-dimensional; use omega_1d",
            other.name()
        ))),
    }
}

/// Frequency of the 1D mode `k` under a one-dimensional variant.
pub fn omega_1d(k: i64, variant: DispersionVariant) -> Result<f64> {
    variant.validate()?;
    let kf = k as f64;
    match variant {
        DispersionVariant::Kp2d => Err(Error::domain(
            "variant Kp2d is two-dimensional; use omega_2d",
        )),
        DispersionVariant::Lambda1d(lambda) => {
            if k == 0 {
                return Err(Error::domain("k = 0 is forbidden for variant Lambda1d"));
            }
            Ok(kf * kf * kf - lambda * lambda / kf)
        }
        DispersionVariant::Semiclassical(h) => {
            if k == 0 {
                return Err(Error::domain(
                    "k = 0 is forbidden for variant Semiclassical",
                ));
            }
            let h2 = h * h;
            Ok(h2 * kf * kf * kf - 1.0 / (h2 * kf))
        }
        DispersionVariant::Schrodinger(h) => Ok(-h * kf * kf),
    }
}

fn phase(omega: f64, t: f64) -> Complex64 {
    Complex64::from_polar(1.0, omega * t)
}

/// Exact linear flow on a 1D spectrum: each coefficient is multiplied by
/// `e^{itω(k)}`.
pub fn propagate_1d(u: &Spectrum1D, t: f64, variant: DispersionVariant) -> Result<Spectrum1D> {
    variant.validate()?;
    if matches!(
        variant,
        DispersionVariant::Lambda1d(_) | DispersionVariant::Semiclassical(_)
    ) && u.grid.include_zero
    {
        return Err(Error::domain(format!(
            "grid includes k = 0 but variant {} forbids it",
            variant.name()
        )));
    }
    let mut out = u.clone();
    for (i, k) in u.grid.ks().enumerate() {
        out.coeffs[i] *= phase(omega_1d(k, variant)?, t);
    }
    Ok(out)
}

/// Exact linear flow on a 2D spectrum (KP-II dispersion).
pub fn propagate_2d(u: &Spectrum2D, t: f64, variant: DispersionVariant) -> Result<Spectrum2D> {
    if !matches!(variant, DispersionVariant::Kp2d) {
        return Err(Error::domain(format!(
            "2D propagation supports only Kp2d, got {}",
            variant.name()
        )));
    }
    let mut out = u.clone();
    for (row, l) in u.grid.ls().enumerate() {
        for (col, k) in u.grid.ks().enumerate() {
            out.coeffs[(row, col)] *= phase(omega_2d(k, l, variant)?, t);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::grid::{ModeGrid1D, ModeGrid2D};

    #[test]
    fn kp2d_hand_values() {
        // (1,1): 1 - 1/1 cancels exactly.
        assert_eq!(omega_2d(1, 1, DispersionVariant::Kp2d).unwrap(), 0.0);
        // (2,1): 8 - 1/2.
        assert_eq!(omega_2d(2, 1, DispersionVariant::Kp2d).unwrap(), 7.5);
    }

    #[test]
    fn lambda1d_odd_symmetry_at_resonance() {
        let v = DispersionVariant::Lambda1d(1.0);
        assert_eq!(omega_1d(-1, v).unwrap(), 0.0);
        for k in [1i64, 2, 3, 5] {
            let plus = omega_1d(k, v).unwrap();
            let minus = omega_1d(-k, v).unwrap();
            assert_eq!(plus, -minus);
        }
    }

    #[test]
    fn schrodinger_hand_value() {
        assert_eq!(
            omega_1d(2, DispersionVariant::Schrodinger(0.5)).unwrap(),
            -2.0
        );
    }

    #[test]
    fn zero_mode_rejected_with_variant_name() {
        let err = omega_1d(0, DispersionVariant::Lambda1d(2.0)).unwrap_err();
        assert!(err.to_string().contains("Lambda1d"));
        let err = omega_2d(0, 3, DispersionVariant::Kp2d).unwrap_err();
        assert!(err.to_string().contains("Kp2d"));
        let err = omega_1d(0, DispersionVariant::Semiclassical(0.5)).unwrap_err();
        assert!(err.to_string().contains("Semiclassical"));
        // Schrodinger allows the zero mode.
        assert_eq!(
            omega_1d(0, DispersionVariant::Schrodinger(0.5)).unwrap(),
            0.0
        );
    }

    #[test]
    fn propagation_identity_at_t_zero_and_stationary_mode() {
        let grid = ModeGrid2D::new(3, 2).unwrap();
        let u = Spectrum2D::from_fn(grid, |k, l| Complex64::new(0.1 * k as f64, 0.2 * l as f64));
        let v = propagate_2d(&u, 0.0, DispersionVariant::Kp2d).unwrap();
        assert_eq!(u, v);

        let mut single = Spectrum2D::zeros(grid);
        single.set(1, 1, Complex64::new(0.7, -0.4));
        let moved = propagate_2d(&single, 3.21, DispersionVariant::Kp2d).unwrap();
        assert!((moved.get(1, 1) - single.get(1, 1)).norm() < 1e-15);
    }

    #[test]
    fn l2_norm_preserved_by_linear_flow() {
        let grid = ModeGrid2D::new(4, 3).unwrap();
        let u = Spectrum2D::from_fn(grid, |k, l| {
            Complex64::new((k as f64 * 0.3).sin(), (l as f64 * 0.7).cos())
        });
        let v = propagate_2d(&u, 1.37, DispersionVariant::Kp2d).unwrap();
        assert!((u.l2_norm() - v.l2_norm()).abs() < 1e-12 * u.l2_norm());
    }

    #[test]
    fn rescaling_identity_lambda_equals_h_minus_two() {
        // With λ² = h⁻⁴ the Lambda1d flow at time h²t equals the
        // Semiclassical(h) flow at time t, coefficientwise.
        let h = 0.5f64;
        let lambda = 1.0 / (h * h);
        let grid = ModeGrid1D::new(6, false).unwrap();
        let u = Spectrum1D::from_fn(grid, |k| Complex64::new(1.0 / (1.0 + k.abs() as f64), 0.3));
        let t = 0.83;
        let a = propagate_1d(&u, h * h * t, DispersionVariant::Lambda1d(lambda)).unwrap();
        let b = propagate_1d(&u, t, DispersionVariant::Semiclassical(h)).unwrap();
        for (x, y) in a.coeffs.iter().zip(b.coeffs.iter()) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn reality_preserved_by_flow() {
        // ω is odd under (k,l) -> (-k,-l), so conjugate symmetry survives.
        let grid = ModeGrid2D::new(3, 2).unwrap();
        let mut u = Spectrum2D::zeros(grid);
        for (k, l) in [(1i64, 0i64), (2, 1), (3, -2)] {
            let z = Complex64::new(0.3 * k as f64, 0.1 * (l as f64 + 2.0));
            u.set(k, l, z);
            u.set(-k, -l, z.conj());
        }
        assert!(u.is_real_valued(1e-15));
        let v = propagate_2d(&u, 2.17, DispersionVariant::Kp2d).unwrap();
        assert!(v.is_real_valued(1e-12));
    }
}
