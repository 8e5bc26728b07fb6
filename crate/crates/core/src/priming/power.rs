use super::{Algorithm, PrimingState};
use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, norm, SymmetricMatrix};

impl PrimingState {
    /// One pass of simultaneous iteration on `covariance`.
    ///
    /// Each `M v_j` is orthogonalized against the already-updated
    /// `v_1, ..., v_{j-1}` and normalized. Returns per-component convergence
    /// flags: `|v_new - v_old| < epsilon` after flipping `v_new` onto the
    /// half-space of `v_old`.
    pub fn power_step(&mut self, covariance: &SymmetricMatrix) -> Result<Vec<bool>> {
        self.require(Algorithm::Power)?;
        if covariance.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: covariance.dim(),
            });
        }
        let eps = self.config.power_epsilon;
        let mut updated: Vec<Vec<f64>> = Vec::with_capacity(self.vectors.len());
        let mut flags = Vec::with_capacity(self.vectors.len());

        for (index, old) in self.vectors.iter().enumerate() {
            let mut y = covariance.matvec(old);
            for _pass in 0..2 {
                for q in &updated {
                    let c = dot(q, &y);
                    axpy(-c, q, &mut y);
                }
            }
            let n = norm(&y);
            if !(n >= 1e-300) {
                return Err(Error::ZeroVector { index });
            }
            y.iter_mut().for_each(|x| *x /= n);
            if dot(&y, old) < 0.0 {
                y.iter_mut().for_each(|x| *x = -*x);
            }
            let moved: f64 = y
                .iter()
                .zip(old)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            flags.push(moved < eps);
            updated.push(y);
        }

        self.vectors = updated;
        self.step += 1;
        self.check_finite()?;
        Ok(flags)
    }
}

#[cfg(test)]
mod tests {
    use super::super::PrimingConfig;
    use super::*;
    use crate::data::counterexample_dataset;
    use crate::linalg::covariance;

    fn state(vectors: Vec<Vec<f64>>, eps: f64) -> PrimingState {
        let mut s = PrimingState::init(
            Algorithm::Power,
            PrimingConfig {
                num_components: vectors.len(),
                power_epsilon: eps,
                ..Default::default()
            },
            vectors[0].len(),
        )
        .unwrap();
        s.vectors = vectors;
        s
    }

    #[test]
    fn eigenvector_is_fixed() {
        let m = SymmetricMatrix::diagonal(&[2.0, 1.0]).unwrap();
        let mut s = state(vec![vec![1.0, 0.0]], 1e-12);
        assert_eq!(s.power_step(&m).unwrap(), vec![true]);
        assert_eq!(s.vectors[0], vec![1.0, 0.0]);
        assert_eq!(s.step, 1);
    }

    #[test]
    fn tangent_halves_each_step() {
        let m = SymmetricMatrix::diagonal(&[2.0, 1.0]).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut s = state(vec![vec![h, h]], 1e-12);
        let mut tan = 1.0;
        for _ in 0..10 {
            s.power_step(&m).unwrap();
            let v = &s.vectors[0];
            let t = v[1].abs() / v[0].abs();
            assert!((t / tan - 0.5).abs() < 1e-12);
            tan = t;
        }
    }

    #[test]
    fn counterexample_converges_to_axes() {
        let cov = covariance(counterexample_dataset().matrix(), false);
        let mut s = state(
            vec![vec![0.5, 0.5, 0.5_f64.sqrt()], vec![0.6, -0.8, 0.0]],
            1e-10,
        );
        let mut done = false;
        for _ in 0..200 {
            if s.power_step(&cov).unwrap().iter().all(|f| *f) {
                done = true;
                break;
            }
        }
        assert!(done);
        assert!((s.vectors[0][0].abs() - 1.0).abs() < 1e-9);
        assert!((s.vectors[1][1].abs() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn annihilated_vector_errors() {
        let m = SymmetricMatrix::diagonal(&[1.0, 0.0]).unwrap();
        let mut s = state(vec![vec![0.0, 1.0]], 1e-6);
        assert!(matches!(
            s.power_step(&m),
            Err(Error::ZeroVector { index: 0 })
        ));
    }

    #[test]
    fn wrong_algorithm() {
        let m = SymmetricMatrix::diagonal(&[1.0, 0.0]).unwrap();
        let mut s = PrimingState::init(Algorithm::Oja, PrimingConfig::default(), 2).unwrap();
        assert!(matches!(
            s.power_step(&m),
            Err(Error::WrongAlgorithm { .. })
        ));
    }
}
