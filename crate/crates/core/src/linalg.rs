//! Dense vector and matrix primitives.
//!
//! Everything here is plain row-major `Vec<f64>` storage with straightforward
//! loops. The matrices the method needs are either `n x d` data matrices that
//! are streamed row by row, or small `m x m` projected covariances where
//! `m = k + l` rarely exceeds a few dozen.

use crate::error::{Error, Result};

/// Residual norm (relative to the input norm) below which `gram_schmidt`
/// treats a vector as linearly dependent on its predecessors.
pub const DEPENDENCE_TOL: f64 = 1e-10;

/// Maximum number of cyclic Jacobi sweeps.
pub const MAX_SWEEPS: usize = 100;

const JACOBI_TOL: f64 = 1e-12;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y += alpha * x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Returns `v / |v|`, or `None` when `|v|` is below `1e-300`.
pub fn normalized(v: &[f64]) -> Option<Vec<f64>> {
    let n = norm(v);
    if !(n >= 1e-300) || !n.is_finite() {
        return None;
    }
    Some(v.iter().map(|x| x / n).collect())
}

/// Dense `rows x cols` matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        if let Some(idx) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFiniteEntry(idx));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let first = rows.first().ok_or(Error::EmptyInput)?;
        let cols = first.len();
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    found: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Self::new(rows.len(), cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub(crate) fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_iter(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.cols.max(1)).take(self.rows)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    /// Copies the listed rows into a new matrix.
    pub fn select_rows(&self, indices: &[usize]) -> DenseMatrix {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        DenseMatrix {
            rows: indices.len(),
            cols: self.cols,
            data,
        }
    }

    /// `X v`, one entry per row.
    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: v.len(),
            });
        }
        Ok(self.row_iter().map(|r| dot(r, v)).collect())
    }
}

/// Symmetric `dim x dim` matrix stored in full; the upper triangle is the
/// source of truth and is mirrored on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SymmetricMatrix {
    pub fn new(dim: usize, mut data: Vec<f64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: data.len(),
            });
        }
        if let Some(idx) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFiniteEntry(idx));
        }
        for i in 0..dim {
            for j in 0..i {
                data[i * dim + j] = data[j * dim + i];
            }
        }
        Ok(Self { dim, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        let flat = DenseMatrix::from_rows(rows)?;
        if flat.cols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: flat.cols(),
            });
        }
        Self::new(dim, flat.data)
    }

    pub fn diagonal(values: &[f64]) -> Result<Self> {
        let dim = values.len();
        let mut data = vec![0.0; dim * dim];
        for (i, v) in values.iter().enumerate() {
            data[i * dim + i] = *v;
        }
        Self::new(dim, data)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.dim);
        (0..self.dim).map(|i| dot(self.row(i), v)).collect()
    }

    /// `v^T M w`
    pub fn bilinear(&self, v: &[f64], w: &[f64]) -> f64 {
        dot(v, &self.matvec(w))
    }

    pub fn scaled(&self, c: f64) -> SymmetricMatrix {
        SymmetricMatrix {
            dim: self.dim,
            data: self.data.iter().map(|x| x * c).collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm(&self.data)
    }
}

/// Ordered orthonormal vectors in `dim`-dimensional space.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthonormalBasis {
    dim: usize,
    vectors: Vec<Vec<f64>>,
}

impl OrthonormalBasis {
    /// Validates orthonormality within `1e-10`.
    pub fn new(dim: usize, vectors: Vec<Vec<f64>>) -> Result<Self> {
        for v in &vectors {
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: v.len(),
                });
            }
            let n = norm(v);
            if (n - 1.0).abs() > 1e-10 {
                return Err(Error::NotUnit { norm: n });
            }
        }
        for (i, a) in vectors.iter().enumerate() {
            for b in &vectors[..i] {
                if dot(a, b).abs() > 1e-10 {
                    return Err(Error::InvalidConfig(
                        "basis vectors are not mutually orthogonal".into(),
                    ));
                }
            }
        }
        Ok(Self { dim, vectors })
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

    pub fn into_vectors(self) -> Vec<Vec<f64>> {
        self.vectors
    }

    /// Ambient vector `sum_j coeffs[j] * b_j`.
    pub fn lift(&self, coeffs: &[f64]) -> Vec<f64> {
        debug_assert_eq!(coeffs.len(), self.vectors.len());
        let mut out = vec![0.0; self.dim];
        for (c, b) in coeffs.iter().zip(&self.vectors) {
            axpy(*c, b, &mut out);
        }
        out
    }
}

/// Modified Gram-Schmidt with one reorthogonalization pass.
///
/// Vectors whose residual falls below `DEPENDENCE_TOL` relative to their
/// original norm are dropped; surviving vectors keep their order.
pub fn gram_schmidt(vectors: &[Vec<f64>]) -> Result<OrthonormalBasis> {
    let dim = vectors.first().ok_or(Error::EmptyInput)?.len();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(vectors.len().min(dim));
    for v in vectors {
        if v.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: v.len(),
            });
        }
        let original = norm(v);
        let mut w = v.clone();
        for _pass in 0..2 {
            for q in &basis {
                let c = dot(q, &w);
                axpy(-c, q, &mut w);
            }
        }
        let residual = norm(&w);
        if !(residual >= DEPENDENCE_TOL * original) || residual == 0.0 {
            continue;
        }
        w.iter_mut().for_each(|x| *x /= residual);
        basis.push(w);
    }
    Ok(OrthonormalBasis {
        dim,
        vectors: basis,
    })
}

/// Eigendecomposition of a symmetric matrix.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    /// Descending.
    pub values: Vec<f64>,
    /// `vectors.vectors()[i]` belongs to `values[i]`.
    pub vectors: OrthonormalBasis,
}

/// Cyclic Jacobi eigensolver.
///
/// Sweeps until the off-diagonal Frobenius norm drops below `1e-12` times the
/// diagonal Frobenius norm. Eigenvalues are returned in descending order
/// (stable with respect to the original diagonal index on ties) and each
/// eigenvector is signed so its largest-magnitude entry is positive.
pub fn eigh(m: &SymmetricMatrix) -> Result<SymmetricEigen> {
    let n = m.dim();
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    let mut a = m.as_slice().to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }

    let mut sweeps = 0;
    loop {
        let mut off = 0.0;
        let mut diag = 0.0;
        for i in 0..n {
            for j in 0..n {
                let x = a[i * n + j];
                if i == j {
                    diag += x * x;
                } else {
                    off += x * x;
                }
            }
        }
        if off.sqrt() <= JACOBI_TOL * diag.sqrt() {
            break;
        }
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence { sweeps });
        }
        sweeps += 1;

        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta.is_infinite() {
                    // |theta| overflowed: the rotation is negligible but still
                    // has to zero the entry.
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    let new_kp = c * akp - s * akq;
                    let new_kq = s * akp + c * akq;
                    a[k * n + p] = new_kp;
                    a[p * n + k] = new_kp;
                    a[k * n + q] = new_kq;
                    a[q * n + k] = new_kq;
                }
                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;

                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j * n + j].total_cmp(&a[i * n + i]));

    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let vectors = order
        .iter()
        .map(|&col| {
            let mut vec: Vec<f64> = (0..n).map(|k| v[k * n + col]).collect();
            fix_sign(&mut vec);
            vec
        })
        .collect();

    Ok(SymmetricEigen {
        values,
        vectors: OrthonormalBasis { dim: n, vectors },
    })
}

/// Flips `v` so that its largest-magnitude entry (first one on ties) is positive.
pub fn fix_sign(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v.get(best).is_some_and(|x| *x < 0.0) {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Coordinates of `x` in the basis `b`: `(<x, b_1>, ..., <x, b_m>)`.
pub fn project_coords(x: &[f64], b: &OrthonormalBasis) -> Result<Vec<f64>> {
    if x.len() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: b.dim(),
            found: x.len(),
        });
    }
    Ok(b.vectors().iter().map(|v| dot(x, v)).collect())
}

/// `X^T X`, divided by the row count when `normalize` is set.
pub fn covariance(x: &DenseMatrix, normalize: bool) -> SymmetricMatrix {
    let d = x.cols();
    let mut c = vec![0.0; d * d];
    for row in x.row_iter() {
        for i in 0..d {
            let ri = row[i];
            if ri == 0.0 {
                continue;
            }
            let dst = &mut c[i * d + i..(i + 1) * d];
            for (cij, rj) in dst.iter_mut().zip(&row[i..]) {
                *cij += ri * rj;
            }
        }
    }
    if normalize && x.rows() > 0 {
        let inv = 1.0 / x.rows() as f64;
        c.iter_mut().for_each(|v| *v *= inv);
    }
    for i in 0..d {
        for j in 0..i {
            c[i * d + j] = c[j * d + i];
        }
    }
    SymmetricMatrix { dim: d, data: c }
}
