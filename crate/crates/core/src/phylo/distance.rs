//! Symmetric distance matrices and sequence-based distance estimation.

use crate::error::{Error, Result};
use crate::phylo::evolve::Alignment;

/// Fraction threshold beyond which the Jukes-Cantor transform diverges; raw
/// mismatch proportions at or above 3/4 are capped just below it and flagged.
pub const JC_SATURATION_CAP: f64 = 0.74999;

/// An n×n symmetric non-negative matrix with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    pub fn zeros(n: usize) -> Self {
        DistanceMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    /// Build from a full row-major matrix, checking symmetry and the zero
    /// diagonal.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        let mut m = DistanceMatrix::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::contract("distance matrix must be square"));
            }
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::contract("distances must be finite and >= 0"));
                }
                if i == j && v != 0.0 {
                    return Err(Error::contract("diagonal must be zero"));
                }
                if (v - rows[j][i]).abs() > 1e-12 {
                    return Err(Error::contract("distance matrix must be symmetric"));
                }
                m.data[i * n + j] = v;
            }
        }
        Ok(m)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    /// Set d(i,j) and d(j,i).
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }

    pub fn max_value(&self) -> f64 {
        self.data.iter().copied().fold(0.0, f64::max)
    }

    /// Largest absolute entry difference between two matrices.
    pub fn max_abs_diff(&self, other: &DistanceMatrix) -> f64 {
        assert_eq!(self.n, other.n);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Pairwise Jukes-Cantor distances d = -(3/4)·ln(1 - (4/3)p) from mismatch
/// proportions p. Proportions at or beyond the 3/4 singularity are capped at
/// [`JC_SATURATION_CAP`]; the count of capped pairs is returned alongside.
pub fn jc_distance_matrix(alignment: &Alignment) -> (DistanceMatrix, usize) {
    let n = alignment.n_sequences();
    let mut m = DistanceMatrix::zeros(n);
    let mut saturated = 0usize;
    for i in 0..n {
        for j in (i + 1)..n {
            let p = alignment.mismatch_fraction(i, j);
            let p = if p >= 0.75 {
                saturated += 1;
                JC_SATURATION_CAP
            } else {
                p
            };
            m.set(i, j, -0.75 * (1.0 - 4.0 * p / 3.0).ln());
        }
    }
    (m, saturated)
}
