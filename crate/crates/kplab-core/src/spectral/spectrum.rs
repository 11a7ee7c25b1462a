//! Complex Fourier coefficient arrays on truncated mode grids.

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::f64::consts::TAU;

use super::grid::{ModeGrid1D, ModeGrid2D};
use crate::error::{Error, Result};

/// Norm selector for [`Spectrum1D::norm`] / [`Spectrum2D::norm`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormKind {
    L2,
    Hminus1,
}

/// One-dimensional spectrum: one complex amplitude per mode of a
/// [`ModeGrid1D`], stored in enumeration order.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum1D {
    pub grid: ModeGrid1D,
    pub coeffs: Array1<Complex64>,
}

impl Spectrum1D {
    pub fn zeros(grid: ModeGrid1D) -> Self {
        Spectrum1D {
            grid,
            coeffs: Array1::zeros(grid.len()),
        }
    }

    pub fn from_fn(grid: ModeGrid1D, mut f: impl FnMut(i64) -> Complex64) -> Self {
        let coeffs = grid.ks().map(&mut f).collect::<Vec<_>>();
        Spectrum1D {
            grid,
            coeffs: Array1::from_vec(coeffs),
        }
    }

    pub fn get(&self, k: i64) -> Complex64 {
        self.grid
            .index(k)
            .map(|i| self.coeffs[i])
            .unwrap_or_default()
    }

    pub fn set(&mut self, k: i64, value: Complex64) {
        if let Some(i) = self.grid.index(k) {
            self.coeffs[i] = value;
        }
    }

    pub fn norm(&self, kind: NormKind) -> f64 {
        let sum: f64 = match kind {
            NormKind::L2 => self.coeffs.iter().map(|c| c.norm_sqr()).sum(),
            NormKind::Hminus1 => self
                .grid
                .ks()
                .zip(self.coeffs.iter())
                .map(|(k, c)| c.norm_sqr() / (1.0 + (k * k) as f64))
                .sum(),
        };
        (TAU * sum).sqrt()
    }

    pub fn l2_norm(&self) -> f64 {
        self.norm(NormKind::L2)
    }

    /// Deviation from the conjugate symmetry `f̂(-k) = conj(f̂(k))` of a
    /// real-valued field.
    pub fn conjugate_asymmetry(&self) -> f64 {
        self.grid
            .ks()
            .map(|k| (self.get(-k) - self.get(k).conj()).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_real_valued(&self, tol: f64) -> bool {
        self.conjugate_asymmetry() <= tol
    }
}

/// Two-dimensional spectrum on a [`ModeGrid2D`].
///
/// Coefficients are stored as an array with one row per transverse mode
/// `l` and one column per longitudinal mode `k`, matching the grid's
/// enumeration order when flattened row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum2D {
    pub grid: ModeGrid2D,
    pub coeffs: Array2<Complex64>,
}

impl Spectrum2D {
    pub fn zeros(grid: ModeGrid2D) -> Self {
        Spectrum2D {
            grid,
            coeffs: Array2::zeros((grid.n_rows(), grid.row_len())),
        }
    }

    pub fn from_fn(grid: ModeGrid2D, mut f: impl FnMut(i64, i64) -> Complex64) -> Self {
        let mut s = Spectrum2D::zeros(grid);
        for (row, l) in grid.ls().enumerate() {
            for (col, k) in grid.ks().enumerate() {
                s.coeffs[(row, col)] = f(k, l);
            }
        }
        s
    }

    pub fn get(&self, k: i64, l: i64) -> Complex64 {
        match (self.grid.l_index(l), self.grid.k_index(k)) {
            (Some(r), Some(c)) => self.coeffs[(r, c)],
            _ => Complex64::default(),
        }
    }

    pub fn set(&mut self, k: i64, l: i64, value: Complex64) {
        if let (Some(r), Some(c)) = (self.grid.l_index(l), self.grid.k_index(k)) {
            self.coeffs[(r, c)] = value;
        }
    }

    /// Coefficients of the transverse row `l`, in `k` enumeration order.
    pub fn row(&self, l: i64) -> Option<Array1<Complex64>> {
        self.grid.l_index(l).map(|r| self.coeffs.row(r).to_owned())
    }

    pub fn norm(&self, kind: NormKind) -> f64 {
        let sum: f64 = match kind {
            NormKind::L2 => self.coeffs.iter().map(|c| c.norm_sqr()).sum(),
            NormKind::Hminus1 => {
                let mut acc = 0.0;
                for (row, l) in self.grid.ls().enumerate() {
                    for (col, k) in self.grid.ks().enumerate() {
                        acc += self.coeffs[(row, col)].norm_sqr()
                            / (1.0 + (k * k + l * l) as f64);
                    }
                }
                acc
            }
        };
        (TAU * TAU * sum).sqrt()
    }

    pub fn l2_norm(&self) -> f64 {
        self.norm(NormKind::L2)
    }

    pub fn conjugate_asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for (k, l) in self.grid.modes() {
            let d = (self.get(-k, -l) - self.get(k, l).conj()).norm();
            worst = worst.max(d);
        }
        worst
    }

    pub fn is_real_valued(&self, tol: f64) -> bool {
        self.conjugate_asymmetry() <= tol
    }

    pub fn scaled(&self, factor: Complex64) -> Spectrum2D {
        Spectrum2D {
            grid: self.grid,
            coeffs: self.coeffs.mapv(|c| c * factor),
        }
    }

    /// `self + factor * other`; the grids must agree.
    pub fn add_scaled(&self, other: &Spectrum2D, factor: Complex64) -> Result<Spectrum2D> {
        if self.grid != other.grid {
            return Err(Error::config("spectrum grids differ"));
        }
        Ok(Spectrum2D {
            grid: self.grid,
            coeffs: &self.coeffs + &other.coeffs.mapv(|c| c * factor),
        })
    }

    pub fn sub(&self, other: &Spectrum2D) -> Result<Spectrum2D> {
        self.add_scaled(other, Complex64::new(-1.0, 0.0))
    }
}

// Serialized form shared by both spectra:
// {"grid": {...}, "coeffs": [[re, im], ...]} in enumeration order.

fn coeffs_to_pairs<'a>(iter: impl Iterator<Item = &'a Complex64>) -> Vec<[f64; 2]> {
    iter.map(|c| [c.re, c.im]).collect()
}

#[derive(Serialize, Deserialize)]
struct Spectrum1DRepr {
    grid: ModeGrid1D,
    coeffs: Vec<[f64; 2]>,
}

#[derive(Serialize, Deserialize)]
struct Spectrum2DRepr {
    grid: ModeGrid2D,
    coeffs: Vec<[f64; 2]>,
}

impl Serialize for Spectrum1D {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        Spectrum1DRepr {
            grid: self.grid,
            coeffs: coeffs_to_pairs(self.coeffs.iter()),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Spectrum1D {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = Spectrum1DRepr::deserialize(deserializer)?;
        if repr.coeffs.len() != repr.grid.len() {
            return Err(D::Error::custom(format!(
                "expected {} coefficients, got {}",
                repr.grid.len(),
                repr.coeffs.len()
            )));
        }
        Ok(Spectrum1D {
            grid: repr.grid,
            coeffs: repr
                .coeffs
                .into_iter()
                .map(|[re, im]| Complex64::new(re, im))
                .collect(),
        })
    }
}

impl Serialize for Spectrum2D {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        Spectrum2DRepr {
            grid: self.grid,
            coeffs: coeffs_to_pairs(self.coeffs.iter()),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Spectrum2D {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = Spectrum2DRepr::deserialize(deserializer)?;
        if repr.coeffs.len() != repr.grid.len() {
            return Err(D::Error::custom(format!(
                "expected {} coefficients, got {}",
                repr.grid.len(),
                repr.coeffs.len()
            )));
        }
        let flat: Vec<Complex64> = repr
            .coeffs
            .into_iter()
            .map(|[re, im]| Complex64::new(re, im))
            .collect();
        let coeffs = Array2::from_shape_vec((repr.grid.n_rows(), repr.grid.row_len()), flat)
            .map_err(D::Error::custom)?;
        Ok(Spectrum2D {
            grid: repr.grid,
            coeffs,
        })
    }
}
