use super::eigen::{full_spectrum, top_eigenpair, EigenPair, DEFAULT_MAX_ITER, DEFAULT_TOL};
use super::AffinityMatrix;
use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Power iteration, falling back to the dense solver when the leading
/// eigenvalue is too close to the next one for iteration to settle.
pub(crate) fn leading_pair(a: &DMatrix<f64>, tol: f64, max_iter: usize) -> Result<EigenPair> {
    match top_eigenpair(a, tol, max_iter) {
        Err(Error::NoConvergence { residual, .. }) => {
            log::debug!("power iteration stalled (residual {residual:e}); using dense solver");
            let s = full_spectrum(a)?;
            Ok(EigenPair {
                value: s.eigenvalues[0],
                vector: s.eigenvectors[0].clone(),
            })
        }
        other => other,
    }
}

/// Best rank-one fit `p pᵀ` in Frobenius norm: `p = √λ₁ · v₁`.
pub fn rank_one_approx(a: &AffinityMatrix) -> Result<DVector<f64>> {
    if a.is_empty() {
        return Err(Error::InvalidParameter("empty matrix".into()));
    }
    let pair = leading_pair(a.entries(), 1e-13, DEFAULT_MAX_ITER)?;
    if !(pair.value > 0.0) {
        return Err(Error::NonPositiveEigenvalue(pair.value));
    }
    Ok(pair.value.sqrt() * pair.vector)
}

/// `|A - p pᵀ|_F`.
pub fn rank_one_residual(a: &DMatrix<f64>, p: &DVector<f64>) -> f64 {
    (a - p * p.transpose()).norm()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtractionOptions {
    /// Stop once the leading eigenvalue drops to this fraction of the first one.
    pub eigen_stop: f64,
    /// Membership cut, relative to the eigenvector's largest entry.
    pub member_threshold: f64,
    pub max_units: usize,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for ExtractionOptions {
    fn default() -> Self {
        Self {
            eigen_stop: 0.1,
            member_threshold: 0.5,
            max_units: 10,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

/// A group of elements picked out by one dominant eigenvector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerceptualUnit {
    /// Element ids, ascending.
    pub member_indices: Vec<usize>,
    pub eigenvalue: f64,
    /// Element ids of the matrix the unit was extracted from.
    pub active_indices: Vec<usize>,
    /// Dominant eigenvector over `active_indices`.
    pub eigenvector: Vec<f64>,
}

/// Repeatedly takes the dominant eigenvector, groups the elements where it
/// is at least `member_threshold` of its maximum, and deletes those rows and
/// columns before looking again.
///
/// Stops when nothing is left, after `max_units`, when the leading eigenvalue
/// is not positive, or when it falls to `eigen_stop` times the first unit's.
pub fn extract_units(a: &AffinityMatrix, options: &ExtractionOptions) -> Result<Vec<PerceptualUnit>> {
    if !(options.member_threshold > 0.0 && options.member_threshold < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "member threshold must lie in (0, 1), got {}",
            options.member_threshold
        )));
    }
    if !(options.eigen_stop >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "eigen_stop must be nonnegative, got {}",
            options.eigen_stop
        )));
    }
    let mut active: Vec<usize> = (0..a.len()).collect();
    let mut units: Vec<PerceptualUnit> = Vec::new();
    while units.len() < options.max_units && !active.is_empty() {
        let sub = a.submatrix(&active);
        let pair = leading_pair(sub.entries(), options.tol, options.max_iter)?;
        if !(pair.value > 0.0) {
            break;
        }
        if let Some(first) = units.first() {
            if pair.value <= options.eigen_stop * first.eigenvalue {
                break;
            }
        }
        let peak = pair.vector.max();
        let cut = options.member_threshold * peak;
        let local: Vec<usize> = (0..active.len()).filter(|&k| pair.vector[k] >= cut).collect();
        if local.is_empty() || !(peak > 0.0) {
            break;
        }
        let mut members: Vec<usize> = local.iter().map(|&k| sub.element_ids()[k]).collect();
        members.sort_unstable();
        units.push(PerceptualUnit {
            member_indices: members,
            eigenvalue: pair.value,
            active_indices: sub.element_ids().to_vec(),
            eigenvector: pair.vector.iter().copied().collect(),
        });
        let removed: std::collections::HashSet<usize> = local.into_iter().collect();
        active = active
            .into_iter()
            .enumerate()
            .filter(|(k, _)| !removed.contains(k))
            .map(|(_, i)| i)
            .collect();
    }
    Ok(units)
}

/// JSON list of `{eigenvalue, member_indices}`.
pub fn units_to_json(units: &[PerceptualUnit]) -> serde_json::Value {
    serde_json::Value::Array(
        units
            .iter()
            .map(|u| {
                serde_json::json!({
                    "eigenvalue": u.eigenvalue,
                    "member_indices": u.member_indices,
                })
            })
            .collect(),
    )
}
