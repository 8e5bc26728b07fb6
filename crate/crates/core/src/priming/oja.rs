use super::{nesterov_update, Algorithm, PrimingState};
use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, DenseMatrix};

impl PrimingState {
    /// Sanger's generalization of Oja's rule on one mini-batch.
    ///
    /// For weight `m` the ascent direction is the batch mean of
    /// `y_m (x - sum_{l <= m} y_l w_l)` with `y_l = <w_l, x>`. Weights are
    /// not renormalized afterwards.
    pub fn oja_step(&mut self, batch: &DenseMatrix) -> Result<()> {
        self.require(Algorithm::Oja)?;
        let d = self.dim();
        if batch.cols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: batch.cols(),
            });
        }
        let m = self.vectors.len();
        let mut grads = vec![vec![0.0; d]; m];
        if batch.rows() > 0 {
            let mut y = vec![0.0; m];
            let mut residual = vec![0.0; d];
            for x in batch.row_iter() {
                for (yl, w) in y.iter_mut().zip(&self.vectors) {
                    *yl = dot(w, x);
                }
                residual.copy_from_slice(x);
                for (j, g) in grads.iter_mut().enumerate() {
                    axpy(-y[j], &self.vectors[j], &mut residual);
                    axpy(y[j], &residual, g);
                }
            }
            let inv = 1.0 / batch.rows() as f64;
            grads.iter_mut().flatten().for_each(|g| *g *= inv);
        }

        let (lr, mu) = (self.config.learning_rate, self.config.momentum);
        for ((w, v), g) in self
            .vectors
            .iter_mut()
            .zip(self.velocities.iter_mut())
            .zip(&grads)
        {
            nesterov_update(w, v, g, lr, mu);
        }
        self.step += 1;
        self.check_finite()
    }
}
