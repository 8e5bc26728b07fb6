use super::{nesterov_update, Algorithm, PrimingState};
use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, DenseMatrix, SymmetricMatrix};

const DENOMINATOR_FLOOR: f64 = 1e-12;

/// Player utilities
/// `U_j = v_j^T M v_j - sum_{i<j} (v_j^T M v_i)^2 / (v_i^T M v_i)`.
pub fn eigengame_utilities(vectors: &[Vec<f64>], m: &SymmetricMatrix) -> Result<Vec<f64>> {
    let mv: Vec<Vec<f64>> = vectors.iter().map(|v| m.matvec(v)).collect();
    utilities_from_products(vectors, &mv)
}

fn utilities_from_products(vectors: &[Vec<f64>], mv: &[Vec<f64>]) -> Result<Vec<f64>> {
    let q = denominators(vectors, mv)?;
    Ok((0..vectors.len())
        .map(|j| {
            let penalty: f64 = (0..j)
                .map(|i| {
                    let b = dot(&vectors[j], &mv[i]);
                    b * (b / q[i])
                })
                .sum();
            q[j] - penalty
        })
        .collect())
}

/// `v_i^T M v_i` for every player; errors if one that serves as a
/// denominator is at or below `1e-12`.
fn denominators(vectors: &[Vec<f64>], mv: &[Vec<f64>]) -> Result<Vec<f64>> {
    let q: Vec<f64> = vectors.iter().zip(mv).map(|(v, w)| dot(v, w)).collect();
    let used = q.len().saturating_sub(1);
    if let Some(index) = q[..used].iter().position(|x| !(*x > DENOMINATOR_FLOOR)) {
        return Err(Error::DegenerateDenominator { index });
    }
    Ok(q)
}

/// Riemannian ascent directions: the utility gradients
/// `2 M v_j - 2 sum_{i<j} (v_j^T M v_i / v_i^T M v_i) M v_i`, projected onto
/// the tangent space of the sphere at `v_j`.
pub fn eigengame_ascent(vectors: &[Vec<f64>], m: &SymmetricMatrix) -> Result<Vec<Vec<f64>>> {
    let mv: Vec<Vec<f64>> = vectors.iter().map(|v| m.matvec(v)).collect();
    ascent_from_products(vectors, &mv)
}

fn ascent_from_products(vectors: &[Vec<f64>], mv: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let q = denominators(vectors, mv)?;
    Ok((0..vectors.len())
        .map(|j| {
            let mut grad: Vec<f64> = mv[j].iter().map(|x| 2.0 * x).collect();
            for i in 0..j {
                let coef = dot(&vectors[j], &mv[i]) / q[i];
                axpy(-2.0 * coef, &mv[i], &mut grad);
            }
            let radial = dot(&grad, &vectors[j]);
            axpy(-radial, &vectors[j], &mut grad);
            grad
        })
        .collect())
}

impl PrimingState {
    /// Simultaneous ascent step of all players on `M_b = batch^T batch`,
    /// followed by renormalization onto the sphere.
    pub fn eigengame_step(&mut self, batch: &DenseMatrix) -> Result<()> {
        self.require(Algorithm::EigenGame)?;
        let d = self.dim();
        if batch.cols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: batch.cols(),
            });
        }
        // M_b v = X_b^T (X_b v), never forming the d x d matrix.
        let mv: Vec<Vec<f64>> = self
            .vectors
            .iter()
            .map(|v| {
                let mut out = vec![0.0; d];
                for x in batch.row_iter() {
                    axpy(dot(x, v), x, &mut out);
                }
                out
            })
            .collect();
        let directions = ascent_from_products(&self.vectors, &mv)?;

        let (lr, mu) = (self.config.learning_rate, self.config.momentum);
        for ((w, v), r) in self
            .vectors
            .iter_mut()
            .zip(self.velocities.iter_mut())
            .zip(&directions)
        {
            nesterov_update(w, v, r, lr, mu);
            let n = crate::linalg::norm(w);
            if n.is_finite() && n > 0.0 {
                w.iter_mut().for_each(|x| *x /= n);
            }
        }
        self.step += 1;
        self.check_finite()?;
        if let Some(index) = self
            .vectors
            .iter()
            .position(|w| crate::linalg::norm(w) == 0.0)
        {
            return Err(Error::ZeroVector { index });
        }
        Ok(())
    }
}
