//! Dense real linear algebra used by every other module.
//!
//! Everything here is small-matrix code (n up to a couple of hundred): cyclic
//! Jacobi for symmetric input, Hessenberg + Francis double-shift QR otherwise,
//! plus LU, Cholesky, one-sided Jacobi SVD and a few structural helpers.

mod eigen;
mod factor;
mod matrix;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use eigen::{eigendecompose, hurwitz_margin, sort_key, spectral_distance, SpectralClass, Spectrum};
pub use factor::{
    cholesky, determinant, flag_basis, gram_schmidt, inverse, is_positive_definite, kron, lu_solve,
    null_space, orthonormal_complement, schur_complement, singular_values, solve, svd, GramSchmidt,
    PosDefReport, Svd,
};
pub use matrix::{axpy, dot, norm2, Matrix};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumError {
    #[error("{op}: shape mismatch ({detail})")]
    Shape { op: &'static str, detail: String },
    #[error("non-finite entry at flat index {index}")]
    NonFinite { index: usize },
    #[error("{op}: expected a square matrix, got {rows}x{cols}")]
    NotSquare { op: &'static str, rows: usize, cols: usize },
    #[error("{op}: matrix is not symmetric within tolerance")]
    NotSymmetric { op: &'static str },
    #[error("invalid tolerances: {0}")]
    InvalidTolerance(String),
    #[error("{algo} did not converge after {iterations} iterations")]
    NoConvergence { algo: &'static str, iterations: usize },
    #[error("{op}: singular matrix")]
    Singular { op: &'static str },
    #[error("{op}: rank deficient (rank {rank} < {expected})")]
    RankDeficient { op: &'static str, rank: usize, expected: usize },
}

impl NumError {
    /// True for errors caused by malformed input rather than numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Self::Shape { .. }
                | Self::NonFinite { .. }
                | Self::NotSquare { .. }
                | Self::NotSymmetric { .. }
                | Self::InvalidTolerance(_)
        )
    }
}

pub(crate) fn require_square(op: &'static str, m: &Matrix) -> Result<usize, NumError> {
    if m.is_square() {
        Ok(m.rows())
    } else {
        Err(NumError::NotSquare { op, rows: m.rows(), cols: m.cols() })
    }
}

/// Tolerance policy shared across modules.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// |Re λ| below `zero_eig * ‖M‖∞` counts as zero.
    pub zero_eig: f64,
    /// Minimum separation for an eigenvalue to count as simple.
    pub gap: f64,
    /// Minimum eigenvalue of the symmetric part for positive definiteness.
    pub posdef_margin: f64,
    /// Convergence threshold for iterative kernels.
    pub iter_eps: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { zero_eig: 1e-8, gap: 1e-6, posdef_margin: 1e-10, iter_eps: 1e-13 }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<(), NumError> {
        let all = [self.zero_eig, self.gap, self.posdef_margin, self.iter_eps];
        if all.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(NumError::InvalidTolerance("all tolerances must be finite and > 0".into()));
        }
        if self.zero_eig >= self.gap {
            return Err(NumError::InvalidTolerance(format!(
                "zero_eig ({}) must be below gap ({})",
                self.zero_eig, self.gap
            )));
        }
        Ok(())
    }

    /// Absolute zero threshold for eigenvalues of `m`.
    pub fn zero_threshold(&self, m: &Matrix) -> f64 {
        let n = m.norm_inf();
        self.zero_eig * if n > 0.0 { n } else { 1.0 }
    }
}
