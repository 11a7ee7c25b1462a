//! Truncated integer mode grids.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mode set `{(k,l) : 1 ≤ |k| ≤ K, |l| ≤ L}` for fields with zero x-mean.
///
/// The longitudinal mode `k = 0` is excluded: the state space of the
/// evolution is the subspace on which `∂ₓ⁻¹` is defined, i.e. fields with
/// `û(0,l) = 0` for every `l`.
///
/// Enumeration order is fixed so that matrices and serialized spectra are
/// reproducible: row-major in `l` ascending from `-L` to `L`, and within a
/// row `k` ascending from `-K` to `K` with `0` skipped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModeGrid2D {
    #[serde(rename = "K")]
    pub k_max: u32,
    #[serde(rename = "L")]
    pub l_max: u32,
}

impl ModeGrid2D {
    pub fn new(k_max: u32, l_max: u32) -> Result<Self> {
        if k_max == 0 {
            return Err(Error::config("ModeGrid2D requires K >= 1"));
        }
        Ok(ModeGrid2D { k_max, l_max })
    }

    /// Number of longitudinal modes per transverse row.
    pub fn row_len(&self) -> usize {
        2 * self.k_max as usize
    }

    /// Number of transverse rows.
    pub fn n_rows(&self) -> usize {
        2 * self.l_max as usize + 1
    }

    /// Total number of represented modes.
    pub fn len(&self) -> usize {
        self.row_len() * self.n_rows()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Longitudinal modes in enumeration order.
    pub fn ks(&self) -> impl Iterator<Item = i64> + '_ {
        let k = self.k_max as i64;
        (-k..=k).filter(|&v| v != 0)
    }

    /// Transverse modes in enumeration order.
    pub fn ls(&self) -> impl Iterator<Item = i64> + '_ {
        let l = self.l_max as i64;
        -l..=l
    }

    /// All modes `(k, l)` in enumeration order.
    pub fn modes(&self) -> impl Iterator<Item = (i64, i64)> + '_ {
        self.ls().flat_map(move |l| self.ks().map(move |k| (k, l)))
    }

    /// Column index of longitudinal mode `k` within a row.
    pub fn k_index(&self, k: i64) -> Option<usize> {
        let km = self.k_max as i64;
        if k == 0 || k.abs() > km {
            return None;
        }
        Some(if k < 0 {
            (k + km) as usize
        } else {
            (k + km - 1) as usize
        })
    }

    /// Row index of transverse mode `l`.
    pub fn l_index(&self, l: i64) -> Option<usize> {
        let lm = self.l_max as i64;
        if l.abs() > lm {
            return None;
        }
        Some((l + lm) as usize)
    }

    /// Flat enumeration index of `(k, l)`.
    pub fn index(&self, k: i64, l: i64) -> Option<usize> {
        Some(self.l_index(l)? * self.row_len() + self.k_index(k)?)
    }
}

/// Mode set `{k : |k| ≤ K}`, with `k = 0` removed unless `include_zero`.
///
/// The zero mode is kept only on the Schrödinger side of the wave-packet
/// construction, where the x-mean is unconstrained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModeGrid1D {
    #[serde(rename = "K")]
    pub k_max: u32,
    pub include_zero: bool,
}

impl ModeGrid1D {
    pub fn new(k_max: u32, include_zero: bool) -> Result<Self> {
        if k_max == 0 {
            return Err(Error::config("ModeGrid1D requires K >= 1"));
        }
        Ok(ModeGrid1D {
            k_max,
            include_zero,
        })
    }

    pub fn len(&self) -> usize {
        2 * self.k_max as usize + usize::from(self.include_zero)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Modes in enumeration order (`k` ascending).
    pub fn ks(&self) -> impl Iterator<Item = i64> + '_ {
        let k = self.k_max as i64;
        let include_zero = self.include_zero;
        (-k..=k).filter(move |&v| include_zero || v != 0)
    }

    /// Flat enumeration index of mode `k`.
    pub fn index(&self, k: i64) -> Option<usize> {
        let km = self.k_max as i64;
        if k.abs() > km || (k == 0 && !self.include_zero) {
            return None;
        }
        Some(if self.include_zero || k < 0 {
            (k + km) as usize
        } else {
            (k + km - 1) as usize
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid2d_rejects_zero_k() {
        assert!(ModeGrid2D::new(0, 2).is_err());
    }

    #[test]
    fn grid2d_enumeration_is_row_major_in_l_then_k_ascending() {
        let g = ModeGrid2D::new(2, 1).unwrap();
        let modes: Vec<_> = g.modes().collect();
        assert_eq!(
            modes,
            vec![
                (-2, -1),
                (-1, -1),
                (1, -1),
                (2, -1),
                (-2, 0),
                (-1, 0),
                (1, 0),
                (2, 0),
                (-2, 1),
                (-1, 1),
                (1, 1),
                (2, 1),
            ]
        );
        for (i, (k, l)) in modes.iter().enumerate() {
            assert_eq!(g.index(*k, *l), Some(i));
        }
        assert_eq!(g.len(), modes.len());
    }

    #[test]
    fn grid2d_excludes_zero_mode() {
        let g = ModeGrid2D::new(3, 0).unwrap();
        assert_eq!(g.index(0, 0), None);
        assert!(g.ks().all(|k| k != 0));
    }

    #[test]
    fn grid1d_zero_mode_flag() {
        let with = ModeGrid1D::new(2, true).unwrap();
        let without = ModeGrid1D::new(2, false).unwrap();
        assert_eq!(with.ks().collect::<Vec<_>>(), vec![-2, -1, 0, 1, 2]);
        assert_eq!(without.ks().collect::<Vec<_>>(), vec![-2, -1, 1, 2]);
        assert_eq!(with.index(0), Some(2));
        assert_eq!(without.index(0), None);
        for (i, k) in without.ks().enumerate() {
            assert_eq!(without.index(k), Some(i));
        }
    }
}
