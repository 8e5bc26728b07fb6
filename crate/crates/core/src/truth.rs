//! Exact ground-truth eigendecomposition of `X^T X`, cached on disk.
//!
//! Cache layout (CSV):
//!
//! ```text
//! hash,<sha256 of the dataset>
//! dim,<d>
//! <eigenvalues, descending>
//! <eigenvector 1>
//! ...
//! <eigenvector d>
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linalg::{covariance, eigh};
use crate::ppca::ComponentSet;

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub hash: String,
    /// Eigenvalues of the unnormalized `X^T X`, descending.
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

impl GroundTruth {
    pub fn compute(ds: &Dataset) -> Result<Self> {
        let eig = eigh(&covariance(ds.matrix(), false))?;
        Ok(Self {
            hash: ds.content_hash(),
            values: eig.values,
            vectors: eig.vectors.into_vectors(),
        })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// The leading `k` eigenvectors as a component set.
    pub fn top(&self, k: usize) -> Result<ComponentSet> {
        let k = k.min(self.vectors.len());
        ComponentSet::with_estimates(
            self.dim(),
            self.vectors[..k].to_vec(),
            self.values[..k].to_vec(),
        )
    }

    /// Indices `i < k` whose eigenvalue is within `1e-9` (relative) of the
    /// next one; per-index angles are ill-defined there.
    pub fn near_ties(&self, k: usize) -> Vec<usize> {
        let k = k.min(self.values.len());
        (0..k)
            .filter(|&i| {
                let next = self.values.get(i + 1);
                let prev = i.checked_sub(1).map(|p| self.values[p]);
                let v = self.values[i];
                let tied = |o: f64| (v - o).abs() <= 1e-9 * v.abs().max(o.abs());
                next.is_some_and(|&n| tied(n)) || prev.is_some_and(tied)
            })
            .collect()
    }

    pub fn cache_path(dir: &Path, hash: &str) -> PathBuf {
        dir.join(format!("truth_{}.csv", &hash[..16.min(hash.len())]))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut out = format!("hash,{}\ndim,{}\n", self.hash, self.dim());
        let line = |v: &[f64]| {
            v.iter()
                .map(|x| format!("{x:e}"))
                .collect::<Vec<_>>()
                .join(",")
        };
        out.push_str(&line(&self.values));
        out.push('\n');
        for v in &self.vectors {
            out.push_str(&line(v));
            out.push('\n');
        }
        fs::write(path, out).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let corrupt = |reason: &str| Error::CorruptCache {
            path: path.to_path_buf(),
            reason: reason.to_string(),
        };
        let mut lines = text.lines();
        let hash = lines
            .next()
            .and_then(|l| l.strip_prefix("hash,"))
            .ok_or_else(|| corrupt("missing hash line"))?
            .to_string();
        let dim: usize = lines
            .next()
            .and_then(|l| l.strip_prefix("dim,"))
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| corrupt("missing dim line"))?;
        let parse = |l: &str| -> Result<Vec<f64>> {
            let v: Option<Vec<f64>> = l.split(',').map(|c| c.parse().ok()).collect();
            v.filter(|v| v.len() == dim)
                .ok_or_else(|| corrupt("malformed row"))
        };
        let values = parse(lines.next().ok_or_else(|| corrupt("missing eigenvalues"))?)?;
        let vectors = lines
            .filter(|l| !l.trim().is_empty())
            .map(parse)
            .collect::<Result<Vec<_>>>()?;
        if vectors.len() != dim {
            return Err(corrupt("wrong number of eigenvectors"));
        }
        Ok(Self {
            hash,
            values,
            vectors,
        })
    }

    /// Returns the cached decomposition for `ds` from `dir`, computing and
    /// writing it on a miss (or when the stored hash disagrees).
    pub fn load_or_compute(ds: &Dataset, dir: Option<&Path>) -> Result<Self> {
        let Some(dir) = dir else {
            return Self::compute(ds);
        };
        let hash = ds.content_hash();
        let path = Self::cache_path(dir, &hash);
        if path.exists() {
            match Self::load(&path) {
                Ok(t) if t.hash == hash => return Ok(t),
                Ok(_) => log::warn!(
                    "cache {} belongs to another dataset; recomputing",
                    path.display()
                ),
                Err(e) => log::warn!("{e}; recomputing"),
            }
        }
        let truth = Self::compute(ds)?;
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        truth.save(&path)?;
        Ok(truth)
    }
}
