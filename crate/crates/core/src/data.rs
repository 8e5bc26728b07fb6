//! Datasets: synthetic spectra, the three-axis counterexample, CSV ingestion,
//! centering and shuffled mini-batching.

use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::linalg::{gram_schmidt, DenseMatrix};

/// An `n x d` data matrix (rows are points) plus centering metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    matrix: DenseMatrix,
    centered: bool,
    mean: Vec<f64>,
}

impl Dataset {
    /// Wraps an uncentered matrix.
    pub fn from_matrix(matrix: DenseMatrix) -> Self {
        let mean = vec![0.0; matrix.cols()];
        Self {
            matrix,
            centered: false,
            mean,
        }
    }

    /// Wraps a matrix the caller guarantees to have zero column means.
    pub fn from_centered_matrix(matrix: DenseMatrix) -> Self {
        let mean = vec![0.0; matrix.cols()];
        Self {
            matrix,
            centered: true,
            mean,
        }
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }

    pub fn rows(&self) -> usize {
        self.matrix.rows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.cols()
    }

    pub fn is_centered(&self) -> bool {
        self.centered
    }

    /// The mean subtracted by `center` (zeros if never centered that way).
    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn column_means(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.cols()];
        for row in self.matrix.row_iter() {
            for (mi, x) in m.iter_mut().zip(row) {
                *mi += x;
            }
        }
        let n = self.rows().max(1) as f64;
        m.iter_mut().for_each(|x| *x /= n);
        m
    }

    /// SHA-256 over the shape and the little-endian entry bytes.
    pub fn content_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.rows() as u64).to_le_bytes());
        h.update((self.cols() as u64).to_le_bytes());
        for x in self.matrix.as_slice() {
            h.update(x.to_le_bytes());
        }
        hex::encode(h.finalize())
    }
}

/// Subtracts column means. Already-centered datasets are returned as-is.
pub fn center(ds: &Dataset) -> Dataset {
    if ds.centered {
        return ds.clone();
    }
    let mean = ds.column_means();
    let mut matrix = ds.matrix.clone();
    for i in 0..matrix.rows() {
        for (x, m) in matrix.row_mut(i).iter_mut().zip(&mean) {
            *x -= m;
        }
    }
    Dataset {
        matrix,
        centered: true,
        mean,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Decay {
    Exponential,
    Linear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSpec {
    pub dim: usize,
    pub n_points: usize,
    pub decay: Decay,
    pub top: f64,
    pub bottom: f64,
    pub seed: u64,
}

impl SpectrumSpec {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::InvalidSpec("dim must be at least 1".into()));
        }
        if self.n_points < self.dim {
            return Err(Error::InvalidSpec(format!(
                "n_points ({}) must be >= dim ({})",
                self.n_points, self.dim
            )));
        }
        if !(self.bottom > 0.0 && self.top > self.bottom && self.top.is_finite()) {
            return Err(Error::InvalidSpec(
                "need top > bottom > 0 (both finite)".into(),
            ));
        }
        Ok(())
    }

    /// Target population eigenvalues, descending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let d = self.dim;
        if d == 1 {
            return vec![self.top];
        }
        let span = (d - 1) as f64;
        (0..d)
            .map(|i| {
                let t = i as f64 / span;
                match self.decay {
                    Decay::Exponential => self.top * (self.bottom / self.top).powf(t),
                    Decay::Linear => self.top - t * (self.top - self.bottom),
                }
            })
            .collect()
    }
}

/// Independent random streams per purpose, so equal seed values used for
/// different things never produce correlated draws.
#[derive(Debug, Clone, Copy)]
pub(crate) enum RngStream {
    Synthetic = 0,
    Init = 1,
    Batches = 2,
    Subsample = 3,
}

pub(crate) fn seeded_rng(seed: u64, stream: RngStream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

/// Gaussian samples with population covariance `Q diag(lambda) Q^T`, where `Q`
/// is a seeded random orthogonal matrix. The result is centered.
pub fn generate_synthetic(spec: &SpectrumSpec) -> Result<Dataset> {
    spec.validate()?;
    let d = spec.dim;
    let mut rng = seeded_rng(spec.seed, RngStream::Synthetic);
    let q = random_orthogonal(d, &mut rng)?;
    let scales: Vec<f64> = spec.eigenvalues().iter().map(|l| l.sqrt()).collect();

    let mut data = vec![0.0; spec.n_points * d];
    let mut z = vec![0.0; d];
    for row in data.chunks_exact_mut(d) {
        for zi in z.iter_mut() {
            *zi = StandardNormal.sample(&mut rng);
        }
        for ((col, s), zi) in q.iter().zip(&scales).zip(&z) {
            let c = s * zi;
            for (x, qv) in row.iter_mut().zip(col) {
                *x += c * qv;
            }
        }
    }
    let matrix = DenseMatrix::new(spec.n_points, d, data)?;
    Ok(center(&Dataset::from_matrix(matrix)))
}

/// Columns of a Haar-distributed orthogonal matrix (Gram-Schmidt QR of a
/// Gaussian matrix, which fixes `R` to a positive diagonal).
pub(crate) fn random_orthogonal(d: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Vec<f64>>> {
    loop {
        let cols: Vec<Vec<f64>> = (0..d)
            .map(|_| (0..d).map(|_| StandardNormal.sample(&mut *rng)).collect())
            .collect();
        let basis = gram_schmidt(&cols)?;
        if basis.len() == d {
            return Ok(basis.into_vectors());
        }
    }
}

/// `{±3 e1, ±2 e2, ±e3}` in three dimensions.
pub fn counterexample_dataset() -> Dataset {
    let rows = vec![
        vec![3.0, 0.0, 0.0],
        vec![-3.0, 0.0, 0.0],
        vec![0.0, 2.0, 0.0],
        vec![0.0, -2.0, 0.0],
        vec![0.0, 0.0, 1.0],
        vec![0.0, 0.0, -1.0],
    ];
    Dataset::from_centered_matrix(DenseMatrix::from_rows(&rows).expect("static data"))
}

/// Reads comma-separated rows of reals. A non-numeric first line is treated
/// as a header. The result is not centered.
pub fn load_csv(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_csv(&text)
}

pub fn parse_csv(text: &str) -> Result<Dataset> {
    let mut cols = None;
    let mut data = Vec::new();
    let mut rows = 0;
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed: Vec<Option<f64>> = cells
            .iter()
            .map(|c| c.parse::<f64>().ok().filter(|x| x.is_finite()))
            .collect();
        if idx == 0 && parsed.iter().any(Option::is_none) {
            continue;
        }
        match cols {
            None => cols = Some(cells.len()),
            Some(c) if c != cells.len() => return Err(Error::RaggedRows { line: line_no }),
            _ => {}
        }
        for (j, v) in parsed.into_iter().enumerate() {
            data.push(v.ok_or(Error::Parse {
                line: line_no,
                column: j + 1,
            })?);
        }
        rows += 1;
    }
    let cols = cols.ok_or(Error::EmptyInput)?;
    Ok(Dataset::from_matrix(DenseMatrix::new(rows, cols, data)?))
}

/// Writes `ds` as plain CSV without a header.
pub fn write_csv(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    for row in ds.matrix().row_iter() {
        let cells: Vec<String> = row.iter().map(|x| format!("{x:e}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Epoch-shuffled mini-batches drawn without replacement.
///
/// Each epoch uses the permutation seeded by `rng_seed + epoch`; the last
/// batch of an epoch may be short.
#[derive(Debug)]
pub struct BatchStream<'a> {
    ds: &'a Dataset,
    batch_size: usize,
    rng_seed: u64,
    epoch: u64,
    order: Vec<usize>,
    pos: usize,
}

impl<'a> BatchStream<'a> {
    pub fn new(ds: &'a Dataset, batch_size: usize, rng_seed: u64) -> Self {
        let mut s = Self {
            ds,
            batch_size: batch_size.max(1),
            rng_seed,
            epoch: 0,
            order: (0..ds.rows()).collect(),
            pos: 0,
        };
        s.shuffle();
        s
    }

    fn shuffle(&mut self) {
        self.order.sort_unstable();
        let mut rng = seeded_rng(self.rng_seed.wrapping_add(self.epoch), RngStream::Batches);
        self.order.shuffle(&mut rng);
    }

    pub fn epoch(&self) -> u64 {
        self.epoch
    }

    /// Row indices of the next batch.
    pub fn next_indices(&mut self) -> Vec<usize> {
        if self.order.is_empty() {
            return Vec::new();
        }
        if self.pos >= self.order.len() {
            self.epoch += 1;
            self.pos = 0;
            self.shuffle();
        }
        let end = (self.pos + self.batch_size).min(self.order.len());
        let idx = self.order[self.pos..end].to_vec();
        self.pos = end;
        idx
    }

    pub fn next_batch(&mut self) -> DenseMatrix {
        let idx = self.next_indices();
        self.ds.matrix().select_rows(&idx)
    }
}
