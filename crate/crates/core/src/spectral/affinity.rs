use crate::error::{Error, Result};
use crate::kernel::{eval_omega, KernelGrid, Normalization};
use crate::lifting::StimulusSet;
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// What goes on the diagonal of the affinity matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DiagonalPolicy {
    /// `A_ii = γμ ω(ξ_i, ξ_i)`, the kernel at zero displacement.
    #[default]
    SelfAffinity,
    Zero,
}

impl std::str::FromStr for DiagonalPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "self" | "self_affinity" => Ok(Self::SelfAffinity),
            "zero" => Ok(Self::Zero),
            other => Err(format!("unknown diagonal policy '{other}' (expected self|zero)")),
        }
    }
}

/// Symmetric nonnegative matrix `A_ij = γμ ω(ξ_i, ξ_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffinityMatrix {
    entries: DMatrix<f64>,
    element_ids: Vec<usize>,
    scale: f64,
    diagonal: DiagonalPolicy,
}

impl AffinityMatrix {
    /// Wraps an explicit matrix, checking symmetry and nonnegativity exactly.
    pub fn from_matrix(entries: DMatrix<f64>, scale: f64) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::InvalidParameter("affinity matrix must be square".into()));
        }
        let n = entries.nrows();
        for i in 0..n {
            for j in 0..n {
                let v = entries[(i, j)];
                if !(v >= 0.0 && v.is_finite()) || v != entries[(j, i)] {
                    return Err(Error::InvalidParameter(format!(
                        "entry ({i}, {j}) = {v} breaks symmetry or nonnegativity"
                    )));
                }
            }
        }
        Ok(Self {
            entries,
            element_ids: (0..n).collect(),
            scale,
            diagonal: DiagonalPolicy::SelfAffinity,
        })
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn element_ids(&self) -> &[usize] {
        &self.element_ids
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn diagonal_policy(&self) -> DiagonalPolicy {
        self.diagonal
    }

    pub fn len(&self) -> usize {
        self.entries.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The bare kernel matrix `ω(ξ_i, ξ_j) = A_ij / (γμ)`.
    pub fn kernel_matrix(&self) -> Result<DMatrix<f64>> {
        if !(self.scale > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "cannot divide out a scale of {}",
                self.scale
            )));
        }
        Ok(&self.entries / self.scale)
    }

    /// Restriction to the given rows/columns, keeping their element ids.
    pub fn submatrix(&self, rows: &[usize]) -> AffinityMatrix {
        AffinityMatrix {
            entries: self.entries.select_rows(rows).select_columns(rows),
            element_ids: rows.iter().map(|&r| self.element_ids[r]).collect(),
            scale: self.scale,
            diagonal: self.diagonal,
        }
    }

    /// Full symmetric matrix as CSV, one row per line.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for i in 0..self.len() {
            let row: Vec<String> = (0..self.len()).map(|j| format!("{:e}", self.entries[(i, j)])).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    /// JSON sidecar describing the CSV export.
    pub fn sidecar(&self) -> serde_json::Value {
        serde_json::json!({
            "element_ids": self.element_ids,
            "scale": self.scale,
            "diagonal": self.diagonal,
        })
    }
}

/// Builds `A_ij = γμ ω(ξ_i, ξ_j)` over a stimulus. Each unordered pair is
/// evaluated once and mirrored, so the result is exactly symmetric.
pub fn build_affinity(
    stimulus: &StimulusSet,
    grid: &KernelGrid,
    gamma: f64,
    mu: f64,
    diagonal: DiagonalPolicy,
) -> Result<AffinityMatrix> {
    if !grid.symmetrized || grid.normalization != Normalization::MaxOne {
        return Err(Error::InvalidGrid(
            "affinities need a symmetrised, max-one normalised kernel".into(),
        ));
    }
    if !(gamma >= 0.0 && mu >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "gamma ({gamma}) and mu ({mu}) must be nonnegative"
        )));
    }
    let scale = gamma * mu;
    let mode = stimulus.angle_mode();
    let pts = stimulus.elements();
    let n = pts.len();
    let upper: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (i..n)
                .map(|j| {
                    if i == j && diagonal == DiagonalPolicy::Zero {
                        0.0
                    } else {
                        scale * eval_omega(grid, &pts[i], &pts[j], mode)
                    }
                })
                .collect()
        })
        .collect();
    let mut entries = DMatrix::zeros(n, n);
    for (i, row) in upper.iter().enumerate() {
        for (k, &v) in row.iter().enumerate() {
            let j = i + k;
            entries[(i, j)] = v;
            entries[(j, i)] = v;
        }
    }
    Ok(AffinityMatrix {
        entries,
        element_ids: (0..n).collect(),
        scale,
        diagonal,
    })
}
