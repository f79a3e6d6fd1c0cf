use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Default relative residual for power iteration.
pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub value: f64,
    pub vector: DVector<f64>,
}

/// All eigenpairs, eigenvalues descending.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralResult {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<DVector<f64>>,
}

impl SpectralResult {
    /// `Σ λ_k v_k v_kᵀ`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let n = self.eigenvalues.len();
        let mut m = DMatrix::zeros(n, n);
        for (l, v) in self.eigenvalues.iter().zip(&self.eigenvectors) {
            m += *l * v * v.transpose();
        }
        m
    }

    /// One eigenvalue per line, descending.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("eigenvalue\n");
        for l in &self.eigenvalues {
            out.push_str(&format!("{l:e}\n"));
        }
        out
    }
}

/// Flips the sign so that the largest-magnitude entry is positive.
pub(crate) fn fix_sign(v: &mut DVector<f64>) {
    let pivot = v
        .iter()
        .copied()
        .fold(0.0f64, |best, x| if x.abs() > best.abs() { x } else { best });
    if pivot < 0.0 {
        v.neg_mut();
    }
}

fn gershgorin_bound(a: &DMatrix<f64>) -> f64 {
    a.row_iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Leading `k` eigenpairs of a symmetric matrix by shifted power iteration,
/// deflating each found vector out of the iterate.
///
/// The shift by a Gershgorin bound makes the iteration matrix positive
/// semidefinite, so the largest *algebraic* eigenvalue dominates even when a
/// negative eigenvalue has the same magnitude. A pair is accepted once
/// `|P A v - λ v| <= tol · |λ|`, with `P` projecting out the pairs found so far.
pub fn top_eigenpairs(a: &DMatrix<f64>, k: usize, tol: f64, max_iter: usize) -> Result<Vec<EigenPair>> {
    let n = a.nrows();
    if n == 0 || !a.is_square() {
        return Err(Error::InvalidParameter("need a non-empty square matrix".into()));
    }
    let shift = gershgorin_bound(a);
    let mut found: Vec<EigenPair> = Vec::with_capacity(k.min(n));
    for round in 0..k.min(n) {
        let mut v = DVector::from_element(n, 1.0);
        if round > 0 {
            // break the symmetry of the all-ones start deterministically
            for (i, x) in v.iter_mut().enumerate() {
                *x += ((i * 7919 + round * 104_729) % 1000) as f64 / 1000.0;
            }
        }
        deflate(&mut v, &found);
        if v.norm() == 0.0 {
            v = DVector::from_fn(n, |i, _| if i == round { 1.0 } else { 0.0 });
            deflate(&mut v, &found);
        }
        v.normalize_mut();

        let mut converged = None;
        let mut residual = f64::INFINITY;
        for _ in 0..max_iter {
            // residual of the deflated operator, so that the small error in
            // earlier vectors does not put a floor under later rounds
            let mut w = a * &v;
            deflate(&mut w, &found);
            let lambda = v.dot(&w);
            residual = (&w - lambda * &v).norm();
            if residual <= tol * lambda.abs().max(f64::MIN_POSITIVE) || residual == 0.0 {
                converged = Some(lambda);
                break;
            }
            let mut next = w + shift * &v;
            deflate(&mut next, &found);
            let norm = next.norm();
            if norm == 0.0 {
                converged = Some(lambda);
                break;
            }
            v = next / norm;
        }
        let value = converged.ok_or(Error::NoConvergence {
            iterations: max_iter,
            residual,
        })?;
        fix_sign(&mut v);
        found.push(EigenPair { value, vector: v });
    }
    Ok(found)
}

fn deflate(v: &mut DVector<f64>, found: &[EigenPair]) {
    for p in found {
        let c = p.vector.dot(v);
        v.axpy(-c, &p.vector, 1.0);
    }
}

/// Dominant eigenpair `(λ₁, v₁)`, `|v₁| = 1`, largest-magnitude entry positive.
pub fn top_eigenpair(a: &DMatrix<f64>, tol: f64, max_iter: usize) -> Result<EigenPair> {
    Ok(top_eigenpairs(a, 1, tol, max_iter)?.remove(0))
}

/// Complete dense symmetric decomposition, eigenvalues descending.
pub fn full_spectrum(a: &DMatrix<f64>) -> Result<SpectralResult> {
    if a.nrows() == 0 || !a.is_square() {
        return Err(Error::InvalidParameter("need a non-empty square matrix".into()));
    }
    let eig = SymmetricEigen::new(a.clone());
    let mut order: Vec<usize> = (0..a.nrows()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let eigenvectors = order
        .iter()
        .map(|&i| {
            let mut v = eig.eigenvectors.column(i).into_owned();
            fix_sign(&mut v);
            v
        })
        .collect();
    Ok(SpectralResult {
        eigenvalues,
        eigenvectors,
    })
}
