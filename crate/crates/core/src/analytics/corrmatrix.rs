//! Validation and spectral repair of correlation matrices.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{PricingError, Result};

const PSD_TOLERANCE: f64 = 1e-10;

/// Outcome of [`validate_correlation_matrix`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorrelationRepairReport {
    pub repaired: bool,
    pub min_eigenvalue_before: f64,
    /// Frobenius distance between the input and the repaired matrix (0 if unchanged).
    pub frobenius_distance: f64,
}

/// Checks symmetry, unit diagonal and entry bounds, then repairs the matrix to
/// the nearest-by-clipping positive semidefinite correlation matrix if the
/// smallest eigenvalue is below `-1e-10`: negative eigenvalues are clipped to
/// zero and the result renormalized back to unit diagonal.
pub fn validate_correlation_matrix(m: &[Vec<f64>]) -> Result<(Vec<Vec<f64>>, CorrelationRepairReport)> {
    let n = m.len();
    if n == 0 || m.iter().any(|row| row.len() != n) {
        return Err(PricingError::Domain("correlation matrix must be square and non-empty".into()));
    }
    for i in 0..n {
        if (m[i][i] - 1.0).abs() > 1e-12 {
            return Err(PricingError::Domain(format!("diagonal entry ({i},{i}) = {} != 1", m[i][i])));
        }
        for j in 0..n {
            if !m[i][j].is_finite() || m[i][j].abs() > 1.0 + 1e-12 {
                return Err(PricingError::Domain(format!("entry ({i},{j}) = {} outside [-1, 1]", m[i][j])));
            }
            if (m[i][j] - m[j][i]).abs() > 1e-12 {
                return Err(PricingError::Domain(format!("matrix not symmetric at ({i},{j})")));
            }
        }
    }
    let dm = DMatrix::from_fn(n, n, |i, j| m[i][j]);
    let eig = SymmetricEigen::new(dm.clone());
    let min_ev = eig.eigenvalues.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    if min_ev >= -PSD_TOLERANCE {
        return Ok((
            m.to_vec(),
            CorrelationRepairReport {
                repaired: false,
                min_eigenvalue_before: min_ev,
                frobenius_distance: 0.0,
            },
        ));
    }
    // Clip negative eigenvalues, rebuild, renormalize to unit diagonal.
    let clipped = DMatrix::from_diagonal(&eig.eigenvalues.map(|v| v.max(0.0)));
    let rebuilt = &eig.eigenvectors * clipped * eig.eigenvectors.transpose();
    let mut out = vec![vec![0.0; n]; n];
    let scale: Vec<f64> = (0..n).map(|i| rebuilt[(i, i)].max(1e-300).sqrt()).collect();
    for i in 0..n {
        for j in 0..n {
            let v = (rebuilt[(i, j)] / (scale[i] * scale[j])).clamp(-1.0, 1.0);
            out[i][j] = v;
        }
        out[i][i] = 1.0;
    }
    // Symmetrize against rounding noise.
    for i in 0..n {
        for j in 0..i {
            let v = 0.5 * (out[i][j] + out[j][i]);
            out[i][j] = v;
            out[j][i] = v;
        }
    }
    let mut dist2 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let d = out[i][j] - m[i][j];
            dist2 += d * d;
        }
    }
    Ok((
        out,
        CorrelationRepairReport {
            repaired: true,
            min_eigenvalue_before: min_ev,
            frobenius_distance: dist2.sqrt(),
        },
    ))
}

/// Smallest eigenvalue of a symmetric matrix (diagnostic helper).
pub fn min_eigenvalue(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    let dm = DMatrix::from_fn(n, n, |i, j| m[i][j]);
    SymmetricEigen::new(dm).eigenvalues.iter().fold(f64::INFINITY, |a, &b| a.min(b))
}
