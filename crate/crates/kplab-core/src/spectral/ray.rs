//! Explicit bicharacteristic ray flows of the two semiclassical symbol
//! branches.
//!
//! The cutoff χ is taken ≡ 1 on the evaluation region `1/2 ≤ |ξ| ≤ 2`, so
//! the χ′ terms of the full flow formulas vanish and the flow transports
//! position at the frozen group speed:
//!
//! * branch `P`:  x(t) = x₀ - (ε⁴/ξ₀² + 3ξ₀²) t,   ξ(t) = ξ₀;
//! * branch `Q`:  x(t) = x₀ - (1/ξ₀² + 3ε⁴ξ₀²) t,  ξ(t) = ξ₀.

use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};

/// Point of phase space carried by the ray flow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayState {
    /// Torus position, reported in `[-π, π)`.
    pub x: f64,
    /// Frequency variable; invariant under the flow.
    pub xi: f64,
    /// Scale parameter of the symbol, in `(0, 1]`.
    pub epsilon: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RayBranch {
    /// Symbol `(ε⁴/ξ - ξ³) χ(ξ)`.
    P,
    /// Symbol `(1/ξ - ε⁴ξ³) χ(ξ)`.
    Q,
}

/// Reduce an angle to `[-π, π)`; in-range values pass through untouched.
pub fn wrap_angle(x: f64) -> f64 {
    if (-PI..PI).contains(&x) {
        return x;
    }
    let w = (x + PI).rem_euclid(TAU) - PI;
    // rem_euclid can land exactly on 2π for inputs just below -π due to
    // rounding; fold the endpoint back.
    if w >= PI {
        w - TAU
    } else {
        w
    }
}

/// Transport speed of a branch at frozen frequency.
pub fn ray_speed(branch: RayBranch, xi: f64, epsilon: f64) -> Result<f64> {
    if xi == 0.0 {
        return Err(Error::domain("ray flow is singular at xi = 0"));
    }
    let e4 = epsilon.powi(4);
    let xi2 = xi * xi;
    Ok(match branch {
        RayBranch::P => e4 / xi2 + 3.0 * xi2,
        RayBranch::Q => 1.0 / xi2 + 3.0 * e4 * xi2,
    })
}

/// Flow a ray state for time `t` along the chosen branch.
pub fn ray_flow(state: RayState, t: f64, branch: RayBranch) -> Result<RayState> {
    if !(0.0..=1.0).contains(&state.epsilon) || state.epsilon == 0.0 {
        return Err(Error::domain(format!(
            "epsilon must lie in (0, 1], got {}",
            state.epsilon
        )));
    }
    let speed = ray_speed(branch, state.xi, state.epsilon)?;
    Ok(RayState {
        x: wrap_angle(state.x - speed * t),
        xi: state.xi,
        epsilon: state.epsilon,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_at_t_zero() {
        let s = RayState {
            x: 1.2,
            xi: 0.8,
            epsilon: 0.5,
        };
        let moved = ray_flow(s, 0.0, RayBranch::P).unwrap();
        assert_eq!(moved, s);
    }

    #[test]
    fn branch_p_hand_value() {
        // ε = 1, ξ = 1: speed = 1 + 3 = 4, so x = -4 mod 2π ≈ 2.2832.
        let s = RayState {
            x: 0.0,
            xi: 1.0,
            epsilon: 1.0,
        };
        let moved = ray_flow(s, 1.0, RayBranch::P).unwrap();
        assert!((moved.x - (TAU - 4.0)).abs() < 1e-12);
        assert_eq!(moved.xi, 1.0);
    }

    #[test]
    fn xi_is_invariant() {
        let s = RayState {
            x: -2.0,
            xi: -1.3,
            epsilon: 0.25,
        };
        for &t in &[0.1, 1.0, 7.3, -4.0] {
            assert_eq!(ray_flow(s, t, RayBranch::Q).unwrap().xi, s.xi);
        }
    }

    #[test]
    fn singular_at_zero_frequency() {
        let s = RayState {
            x: 0.0,
            xi: 0.0,
            epsilon: 0.5,
        };
        assert!(ray_flow(s, 1.0, RayBranch::P).is_err());
    }

    #[test]
    fn branch_p_speed_lower_bound_on_evaluation_region() {
        // For ε ≤ 1 and 1/2 ≤ |ξ| ≤ 2 the speed ε⁴/ξ² + 3ξ² is at least 3/4.
        for i in 0..=40 {
            let xi = 0.5 + 1.5 * i as f64 / 40.0;
            for j in 1..=10 {
                let eps = j as f64 / 10.0;
                for sign in [-1.0, 1.0] {
                    let v = ray_speed(RayBranch::P, sign * xi, eps).unwrap();
                    assert!(v >= 0.75, "speed {v} below 3/4 at xi={xi}, eps={eps}");
                }
            }
        }
    }

    #[test]
    fn positions_reported_in_half_open_interval() {
        for &x0 in &[0.0, 3.0, -3.0, 100.0] {
            let s = RayState {
                x: x0,
                xi: 1.0,
                epsilon: 1.0,
            };
            let moved = ray_flow(s, 17.7, RayBranch::Q).unwrap();
            assert!((-PI..PI).contains(&moved.x), "x = {}", moved.x);
        }
    }
}
