//! Physical/spectral transforms on the uniform torus grid
//! `x_j = -π + 2πj/N`.
//!
//! Synthesis evaluates the trigonometric polynomial exactly; analysis
//! recovers the represented modes exactly for band-limited input, so the
//! round trip is the identity up to rounding. Both directions run through
//! FFTs; the grid offset `x_0 = -π` turns into the alternating phase
//! `(-1)^k` on coefficients.

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::{PI, TAU};
use std::io::Write;

use super::grid::{ModeGrid1D, ModeGrid2D};
use super::spectrum::{Spectrum1D, Spectrum2D};
use crate::error::{Error, Result};

/// Sample points `x_j = -π + 2πj/N`.
pub fn x_grid(n: usize) -> Vec<f64> {
    (0..n).map(|j| -PI + TAU * j as f64 / n as f64).collect()
}

fn sign_of_mode(k: i64) -> f64 {
    if k.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

fn wrap_index(k: i64, n: usize) -> usize {
    k.rem_euclid(n as i64) as usize
}

fn check_samples_1d(n: usize, k_max: u32) -> Result<()> {
    if n < 2 * k_max as usize + 2 {
        return Err(Error::config(format!(
            "{n} samples cannot represent modes up to |k| = {k_max}; need at least {}",
            2 * k_max + 2
        )));
    }
    Ok(())
}

/// Evaluate a 1D spectrum on `n` uniform samples.
pub fn to_physical_1d(u: &Spectrum1D, n: usize) -> Result<Array1<Complex64>> {
    check_samples_1d(n, u.grid.k_max)?;
    let mut buf = vec![Complex64::default(); n];
    for (i, k) in u.grid.ks().enumerate() {
        buf[wrap_index(k, n)] += u.coeffs[i] * sign_of_mode(k);
    }
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    Ok(Array1::from_vec(buf))
}

/// Recover the represented modes of a 1D sample vector.
pub fn from_physical_1d(grid: ModeGrid1D, samples: &Array1<Complex64>) -> Result<Spectrum1D> {
    let n = samples.len();
    check_samples_1d(n, grid.k_max)?;
    let mut buf = samples.to_vec();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    let mut out = Spectrum1D::zeros(grid);
    for (i, k) in grid.ks().enumerate() {
        out.coeffs[i] = buf[wrap_index(k, n)] * sign_of_mode(k) * scale;
    }
    Ok(out)
}

fn fft2_cols_then_rows(data: &mut Array2<Complex64>, inverse: bool) {
    let (ny, nx) = data.dim();
    let mut planner = FftPlanner::new();
    let row_fft = if inverse {
        planner.plan_fft_inverse(nx)
    } else {
        planner.plan_fft_forward(nx)
    };
    let col_fft = if inverse {
        planner.plan_fft_inverse(ny)
    } else {
        planner.plan_fft_forward(ny)
    };
    for mut row in data.rows_mut() {
        let slice = row.as_slice_mut().expect("row-major layout");
        row_fft.process(slice);
    }
    let mut col = vec![Complex64::default(); ny];
    for j in 0..nx {
        for i in 0..ny {
            col[i] = data[(i, j)];
        }
        col_fft.process(&mut col);
        for i in 0..ny {
            data[(i, j)] = col[i];
        }
    }
}

fn check_samples_2d(nx: usize, ny: usize, grid: &ModeGrid2D) -> Result<()> {
    check_samples_1d(nx, grid.k_max)?;
    if ny < 2 * grid.l_max as usize + 2 {
        return Err(Error::config(format!(
            "{ny} transverse samples cannot represent modes up to |l| = {}; need at least {}",
            grid.l_max,
            2 * grid.l_max + 2
        )));
    }
    Ok(())
}

/// Evaluate a 2D spectrum on an `ny × nx` uniform grid; entry `(j, i)`
/// holds `f(x_i, y_j)`.
pub fn to_physical_2d(u: &Spectrum2D, nx: usize, ny: usize) -> Result<Array2<Complex64>> {
    check_samples_2d(nx, ny, &u.grid)?;
    let mut data = Array2::default((ny, nx));
    for (row, l) in u.grid.ls().enumerate() {
        for (col, k) in u.grid.ks().enumerate() {
            let target = (wrap_index(l, ny), wrap_index(k, nx));
            data[target] += u.coeffs[(row, col)] * sign_of_mode(k + l);
        }
    }
    fft2_cols_then_rows(&mut data, true);
    Ok(data)
}

/// Recover the represented modes of a 2D sample grid.
pub fn from_physical_2d(grid: ModeGrid2D, samples: &Array2<Complex64>) -> Result<Spectrum2D> {
    let (ny, nx) = samples.dim();
    check_samples_2d(nx, ny, &grid)?;
    let mut data = samples.clone();
    fft2_cols_then_rows(&mut data, false);
    let scale = 1.0 / (nx * ny) as f64;
    let mut out = Spectrum2D::zeros(grid);
    for (row, l) in grid.ls().enumerate() {
        for (col, k) in grid.ks().enumerate() {
            let source = (wrap_index(l, ny), wrap_index(k, nx));
            out.coeffs[(row, col)] = data[source] * sign_of_mode(k + l) * scale;
        }
    }
    Ok(out)
}

/// Write physical samples as CSV with columns `x,y,re,im`.
pub fn physical_to_csv<W: Write>(samples: &Array2<Complex64>, out: &mut W) -> std::io::Result<()> {
    let (ny, nx) = samples.dim();
    let xs = x_grid(nx);
    let ys = x_grid(ny);
    writeln!(out, "x,y,re,im")?;
    for (j, y) in ys.iter().enumerate() {
        for (i, x) in xs.iter().enumerate() {
            let v = samples[(j, i)];
            writeln!(out, "{},{},{},{}", x, y, v.re, v.im)?;
        }
    }
    Ok(())
}
