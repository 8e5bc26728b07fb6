//! Primed PCA: project the data onto the span of the primed directions,
//! solve the small eigenproblem there exactly and lift the result back.

use rand::seq::index;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linalg::{self, dot, eigh, gram_schmidt, norm, OrthonormalBasis, SymmetricMatrix};
use crate::metrics::angle_between;

/// Ordered unit vectors with optional eigenvalue estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentSet {
    dim: usize,
    vectors: Vec<Vec<f64>>,
    eigenvalue_estimates: Option<Vec<f64>>,
}

impl ComponentSet {
    pub fn new(dim: usize, vectors: Vec<Vec<f64>>) -> Result<Self> {
        if vectors.is_empty() {
            return Err(Error::EmptyInput);
        }
        for v in &vectors {
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: v.len(),
                });
            }
            let n = norm(v);
            if (n - 1.0).abs() > 1e-9 {
                return Err(Error::NotUnit { norm: n });
            }
        }
        Ok(Self {
            dim,
            vectors,
            eigenvalue_estimates: None,
        })
    }

    pub fn with_estimates(dim: usize, vectors: Vec<Vec<f64>>, estimates: Vec<f64>) -> Result<Self> {
        if estimates.len() != vectors.len() {
            return Err(Error::DimensionMismatch {
                expected: vectors.len(),
                found: estimates.len(),
            });
        }
        let mut set = Self::new(dim, vectors)?;
        set.eigenvalue_estimates = Some(estimates);
        Ok(set)
    }

    /// Normalizes every vector first.
    pub fn from_unnormalized(dim: usize, vectors: &[Vec<f64>]) -> Result<Self> {
        let vectors = vectors
            .iter()
            .enumerate()
            .map(|(index, v)| linalg::normalized(v).ok_or(Error::ZeroVector { index }))
            .collect::<Result<Vec<_>>>()?;
        Self::new(dim, vectors)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    pub fn eigenvalue_estimates(&self) -> Option<&[f64]> {
        self.eigenvalue_estimates.as_deref()
    }

    /// The first `k` vectors (all of them if `k` exceeds the count).
    pub fn truncated(&self, k: usize) -> ComponentSet {
        let k = k.clamp(1, self.vectors.len());
        ComponentSet {
            dim: self.dim,
            vectors: self.vectors[..k].to_vec(),
            eigenvalue_estimates: self.eigenvalue_estimates.as_ref().map(|e| e[..k].to_vec()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PpcaOptions {
    /// Fraction of rows used to build the projected covariance.
    pub sample_fraction: f64,
    /// Seed for the row subsample; unused at fraction 1.
    pub sample_seed: u64,
    /// Report eigenvalue estimates divided by the number of rows used.
    pub normalize_eigenvalues: bool,
}

impl Default for PpcaOptions {
    fn default() -> Self {
        Self {
            sample_fraction: 1.0,
            sample_seed: 0,
            normalize_eigenvalues: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ProjectedCovariance {
    /// `Y^T Y` with `Y = X B`, unnormalized.
    pub matrix: SymmetricMatrix,
    pub basis: OrthonormalBasis,
    pub sample_fraction: f64,
    pub rows_used: usize,
}

#[derive(Debug, Clone)]
pub struct PpcaResult {
    pub components: ComponentSet,
    /// Dimension of the primed span after dependent directions were dropped.
    pub subspace_dim: usize,
    /// All eigenvalues of the projected covariance, descending.
    pub projected_eigenvalues: Vec<f64>,
}

fn require_compatible(ds: &Dataset, primed: &ComponentSet) -> Result<()> {
    if !ds.is_centered() {
        return Err(Error::InvalidConfig("dataset must be centered".into()));
    }
    if primed.dim() != ds.cols() {
        return Err(Error::DimensionMismatch {
            expected: ds.cols(),
            found: primed.dim(),
        });
    }
    Ok(())
}

pub fn projected_covariance(ds: &Dataset, primed: &ComponentSet) -> Result<ProjectedCovariance> {
    projected_covariance_with(ds, primed, &PpcaOptions::default())
}

/// Builds `Y^T Y` row by row without ever forming projected points in the
/// ambient dimension.
pub fn projected_covariance_with(
    ds: &Dataset,
    primed: &ComponentSet,
    opts: &PpcaOptions,
) -> Result<ProjectedCovariance> {
    require_compatible(ds, primed)?;
    if !(opts.sample_fraction > 0.0 && opts.sample_fraction <= 1.0) {
        return Err(Error::InvalidConfig(format!(
            "sample_fraction must lie in (0, 1], got {}",
            opts.sample_fraction
        )));
    }
    let basis = gram_schmidt(primed.vectors())?;
    let m = basis.len();
    let x = ds.matrix();

    let rows: Vec<usize> = if opts.sample_fraction < 1.0 {
        let n = x.rows();
        let take = ((opts.sample_fraction * n as f64).ceil() as usize).clamp(1, n);
        let mut rng = crate::data::seeded_rng(opts.sample_seed, crate::data::RngStream::Subsample);
        let mut idx = index::sample(&mut rng, n, take).into_vec();
        idx.sort_unstable();
        idx
    } else {
        (0..x.rows()).collect()
    };

    let mut c = vec![0.0; m * m];
    let mut y = vec![0.0; m];
    for &r in &rows {
        let row = x.row(r);
        for (yj, b) in y.iter_mut().zip(basis.vectors()) {
            *yj = dot(row, b);
        }
        for i in 0..m {
            let yi = y[i];
            for j in i..m {
                c[i * m + j] += yi * y[j];
            }
        }
    }
    Ok(ProjectedCovariance {
        matrix: SymmetricMatrix::new(m, c)?,
        basis,
        sample_fraction: opts.sample_fraction,
        rows_used: rows.len(),
    })
}

pub fn ppca(ds: &Dataset, primed: &ComponentSet, k: usize) -> Result<PpcaResult> {
    ppca_with(ds, primed, k, &PpcaOptions::default())
}

/// Returns the top `k` eigenvectors of the data restricted to
/// `span(primed)`, lifted back to the ambient space.
pub fn ppca_with(
    ds: &Dataset,
    primed: &ComponentSet,
    k: usize,
    opts: &PpcaOptions,
) -> Result<PpcaResult> {
    if k == 0 || primed.len() < k {
        return Err(Error::InvalidConfig(format!(
            "need 1 <= k <= {} primed vectors, got k = {k}",
            primed.len()
        )));
    }
    let proj = projected_covariance_with(ds, primed, opts)?;
    let subspace_dim = proj.basis.len();
    if subspace_dim < k {
        return Err(Error::SubspaceCollapse {
            needed: k,
            available: subspace_dim,
        });
    }
    let eig = eigh(&proj.matrix)?;
    let vectors: Vec<Vec<f64>> = eig.vectors.vectors()[..k]
        .iter()
        .map(|u| proj.basis.lift(u))
        .collect();
    let scale = if opts.normalize_eigenvalues {
        1.0 / proj.rows_used as f64
    } else {
        1.0
    };
    let estimates = eig.values[..k].iter().map(|v| v * scale).collect();
    Ok(PpcaResult {
        components: ComponentSet::with_estimates(ds.cols(), vectors, estimates)?,
        subspace_dim,
        projected_eigenvalues: eig.values,
    })
}

/// Angle tolerance for deciding that a projected true component is the
/// variance maximizer on its residual subspace.
pub const PROP3_ANGLE_TOL: f64 = 1e-8;

/// Evaluates the chain of variance-maximization conditions that guarantee the
/// exact step cannot lose accuracy on the first `upto` components.
///
/// Condition `i` holds when the top eigenvector of the projected covariance,
/// restricted to the part of the primed span orthogonal to
/// `pi_S(e_1), ..., pi_S(e_{i-1})`, points along `pi_S(e_i)`. Once a
/// condition fails, every later flag is false.
pub fn check_prop3(
    ds: &Dataset,
    primed: &ComponentSet,
    truth: &ComponentSet,
    upto: usize,
) -> Result<Vec<bool>> {
    if truth.len() < upto {
        return Err(Error::InvalidConfig(format!(
            "truth has {} components, {upto} requested",
            truth.len()
        )));
    }
    let proj = projected_covariance(ds, primed)?;
    let m = proj.basis.len();

    // Coordinates of pi_S(e_i) in the primed basis.
    let coords = truth.vectors()[..upto]
        .iter()
        .enumerate()
        .map(|(index, e)| {
            let c = linalg::project_coords(e, &proj.basis)?;
            if norm(&c) < 1e-10 {
                return Err(Error::DegenerateProjection { index });
            }
            Ok(c)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut flags = vec![false; upto];
    for i in 0..upto {
        let residual = complement(&coords[..i], m);
        if residual.is_empty() {
            break;
        }
        let r = residual.len();
        let mut restricted = vec![0.0; r * r];
        let cr: Vec<Vec<f64>> = residual.iter().map(|q| proj.matrix.matvec(q)).collect();
        for a in 0..r {
            for b in a..r {
                restricted[a * r + b] = dot(&residual[a], &cr[b]);
            }
        }
        let eig = eigh(&SymmetricMatrix::new(r, restricted)?)?;
        let z = &eig.vectors.vectors()[0];
        let mut u = vec![0.0; m];
        for (zj, q) in z.iter().zip(&residual) {
            linalg::axpy(*zj, q, &mut u);
        }
        if angle_between(&u, &coords[i]) >= PROP3_ANGLE_TOL {
            break;
        }
        flags[i] = true;
    }
    Ok(flags)
}

/// Orthonormal basis of the orthogonal complement of `span(vs)` in `R^m`.
fn complement(vs: &[Vec<f64>], m: usize) -> Vec<Vec<f64>> {
    let mut candidates: Vec<Vec<f64>> = vs.to_vec();
    let spanned = if vs.is_empty() {
        0
    } else {
        gram_schmidt(vs).map(|b| b.len()).unwrap_or(0)
    };
    for j in 0..m {
        let mut e = vec![0.0; m];
        e[j] = 1.0;
        candidates.push(e);
    }
    match gram_schmidt(&candidates) {
        Ok(b) => b.into_vectors().split_off(spanned),
        Err(_) => Vec::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::counterexample_dataset;

    fn primed_counterexample(eps: f64) -> ComponentSet {
        ComponentSet::new(
            3,
            vec![
                vec![eps, 0.0, (1.0 - eps * eps).sqrt()],
                vec![0.0, 1.0, 0.0],
            ],
        )
        .unwrap()
    }

    #[test]
    fn counterexample_projected_covariance() {
        let ds = counterexample_dataset();
        for eps in [0.01, 0.1, 0.5] {
            let p = projected_covariance(&ds, &primed_counterexample(eps)).unwrap();
            let c = p.matrix.scaled(1.0 / 6.0);
            // Hand sum over the six points: 2*(3 eps)^2 + 2*(1 - eps^2) on
            // the first primed axis, 2*2^2 on the second.
            let first = (9.0 * eps * eps + (1.0 - eps * eps)) / 3.0;
            assert!((c.get(0, 0) - first).abs() < 1e-12);
            assert!((c.get(1, 1) - 4.0 / 3.0).abs() < 1e-12);
            assert_eq!(c.get(0, 1), 0.0);
        }
    }

    #[test]
    fn counterexample_swaps_ordering() {
        let ds = counterexample_dataset();
        let eps = 0.01;
        let r = ppca(&ds, &primed_counterexample(eps), 2).unwrap();
        let v = r.components.vectors();
        assert_eq!(v[0], vec![0.0, 1.0, 0.0]);
        assert!((v[1][0] - eps).abs() < 1e-15);
        assert!((v[1][2] - (1.0 - eps * eps).sqrt()).abs() < 1e-15);
        assert_eq!(dot(&v[0], &[1.0, 0.0, 0.0]).powi(2), 0.0);
    }

    #[test]
    fn identity_projection_reproduces_covariance() {
        let ds = counterexample_dataset();
        let primed = ComponentSet::new(
            3,
            vec![
                vec![1.0, 0.0, 0.0],
                vec![0.0, 1.0, 0.0],
                vec![0.0, 0.0, 1.0],
            ],
        )
        .unwrap();
        let p = projected_covariance(&ds, &primed).unwrap();
        assert_eq!(p.matrix, linalg::covariance(ds.matrix(), false));
    }

    #[test]
    fn collapse_detected() {
        let ds = counterexample_dataset();
        let primed = ComponentSet::new(3, vec![vec![1.0, 0.0, 0.0], vec![1.0, 0.0, 0.0]]).unwrap();
        assert!(matches!(
            ppca(&ds, &primed, 2),
            Err(Error::SubspaceCollapse {
                needed: 2,
                available: 1
            })
        ));
    }

    #[test]
    fn prop3_flags_on_counterexample() {
        let ds = counterexample_dataset();
        let truth = ComponentSet::new(3, vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]).unwrap();
        assert_eq!(
            check_prop3(&ds, &primed_counterexample(0.01), &truth, 2).unwrap(),
            vec![false, false]
        );
        assert_eq!(
            check_prop3(&ds, &truth, &truth, 2).unwrap(),
            vec![true, true]
        );
    }

    #[test]
    fn prop3_degenerate_projection() {
        let ds = counterexample_dataset();
        let truth = ComponentSet::new(3, vec![vec![1.0, 0.0, 0.0]]).unwrap();
        let primed = ComponentSet::new(3, vec![vec![0.0, 1.0, 0.0]]).unwrap();
        assert!(matches!(
            check_prop3(&ds, &primed, &truth, 1),
            Err(Error::DegenerateProjection { index: 0 })
        ));
    }

    #[test]
    fn subsampled_projection_uses_fewer_rows() {
        let ds = counterexample_dataset();
        let opts = PpcaOptions {
            sample_fraction: 0.5,
            ..Default::default()
        };
        let p = projected_covariance_with(&ds, &primed_counterexample(0.1), &opts).unwrap();
        assert_eq!(p.rows_used, 3);
    }
}
