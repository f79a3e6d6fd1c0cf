//! Affinity matrices over a stimulus and their spectral analysis.
//!
//! Grouping follows the rank-one view of an affinity matrix: the best
//! Frobenius fit `p pᵀ` is `√λ₁ v₁`, and the salient groups are read off the
//! leading eigenvectors, one at a time, removing each group before looking
//! for the next.

mod affinity;
mod eigen;
mod units;

pub use affinity::{build_affinity, AffinityMatrix, DiagonalPolicy};
pub use eigen::{
    full_spectrum, top_eigenpair, top_eigenpairs, EigenPair, SpectralResult, DEFAULT_MAX_ITER, DEFAULT_TOL,
};
pub use units::{extract_units, rank_one_approx, rank_one_residual, units_to_json, ExtractionOptions, PerceptualUnit};
