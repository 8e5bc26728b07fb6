//! Reference computations for the integration tests. Nothing here calls the
//! library's linear algebra.
#![allow(dead_code)]

use primed_pca::data::{center, Dataset};
use primed_pca::linalg::DenseMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn unit(a: &[f64]) -> Vec<f64> {
    let n = norm(a);
    a.iter().map(|x| x / n).collect()
}

pub fn basis_vector(d: usize, i: usize) -> Vec<f64> {
    let mut e = vec![0.0; d];
    e[i] = 1.0;
    e
}

/// Sign-invariant angle between two directions, via the perpendicular part.
pub fn oracle_angle(u: &[f64], v: &[f64]) -> f64 {
    let u = unit(u);
    let v = unit(v);
    let c = dot(&u, &v);
    let perp: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a - c * b).collect();
    norm(&perp).atan2(c.abs())
}

pub fn gaussian_vec(d: usize, rng: &mut impl Rng) -> Vec<f64> {
    (0..d).map(|_| StandardNormal.sample(&mut *rng)).collect()
}

pub fn random_symmetric(d: usize, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    let mut a = vec![vec![0.0; d]; d];
    for i in 0..d {
        for j in i..d {
            let x: f64 = rng.random_range(-1.0..1.0);
            a[i][j] = x;
            a[j][i] = x;
        }
    }
    a
}

/// Rows of a random orthogonal matrix (classical Gram-Schmidt, applied twice).
pub fn random_orthogonal(d: usize, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(d);
    while out.len() < d {
        let mut v = gaussian_vec(d, rng);
        for _ in 0..2 {
            for q in &out {
                let c = dot(&v, q);
                v.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
            }
        }
        let n = norm(&v);
        if n > 1e-6 {
            out.push(v.iter().map(|x| x / n).collect());
        }
    }
    out
}

pub fn matvec(a: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    a.iter().map(|row| dot(row, v)).collect()
}

/// `X^T X` summed naively row by row.
pub fn gram(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let d = rows[0].len();
    let mut c = vec![vec![0.0; d]; d];
    for r in rows {
        for i in 0..d {
            for j in 0..d {
                c[i][j] += r[i] * r[j];
            }
        }
    }
    c
}

fn solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let scale = a
        .iter()
        .flatten()
        .map(|x| x.abs())
        .fold(0.0, f64::max)
        .max(1e-300);
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(*bi);
            r
        })
        .collect();
    for col in 0..n {
        let p = (col..n)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap();
        m.swap(col, p);
        if m[col][col].abs() < f64::EPSILON * scale {
            m[col][col] = f64::EPSILON * scale;
        }
        for r in col + 1..n {
            let f = m[r][col] / m[col][col];
            for c in col..=n {
                m[r][c] -= f * m[col][c];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| m[r][c] * x[c]).sum();
        x[r] = (m[r][n] - s) / m[r][r];
    }
    x
}

fn deflate(v: &mut [f64], found: &[Vec<f64>]) {
    for _ in 0..2 {
        for q in found {
            let c = dot(v, q);
            v.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
        }
    }
}

/// Eigenpairs of a symmetric matrix, descending, by shifted power iteration
/// with deflation followed by inverse and Rayleigh-quotient refinement.
pub fn oracle_eigh(a: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let d = a.len();
    let shift: f64 = a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
    let shifted: Vec<Vec<f64>> = (0..d)
        .map(|i| {
            (0..d)
                .map(|j| a[i][j] + if i == j { shift } else { 0.0 })
                .collect()
        })
        .collect();
    let mut values = Vec::with_capacity(d);
    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(d);
    for i in 0..d {
        let mut v: Vec<f64> = (0..d)
            .map(|j| 1.0 + ((i * 7 + j * 13) % 11) as f64 / 10.0)
            .collect();
        deflate(&mut v, &vectors);
        v = unit(&v);
        for _ in 0..3000 {
            let mut w = matvec(&shifted, &v);
            deflate(&mut w, &vectors);
            v = unit(&w);
        }
        let mut mu = dot(&v, &matvec(a, &v));
        for it in 0..30 {
            let shifted_by_mu: Vec<Vec<f64>> = (0..d)
                .map(|r| {
                    (0..d)
                        .map(|c| a[r][c] - if r == c { mu } else { 0.0 })
                        .collect()
                })
                .collect();
            let mut w = solve(&shifted_by_mu, &v);
            deflate(&mut w, &vectors);
            v = unit(&w);
            // Fixed shift first, then let the Rayleigh quotient take over.
            if it >= 3 {
                mu = dot(&v, &matvec(a, &v));
            }
        }
        values.push(dot(&v, &matvec(a, &v)));
        vectors.push(v);
    }
    (values, vectors)
}

/// Dataset whose `X^T X` equals `sum_j lambda_j q_j q_j^T` exactly: rows
/// `±sqrt(lambda_j / 2) q_j`.
pub fn exact_spectrum_dataset(q: &[Vec<f64>], lambdas: &[f64]) -> Dataset {
    let mut rows = Vec::with_capacity(2 * q.len());
    for (qj, l) in q.iter().zip(lambdas) {
        let s = (l / 2.0).sqrt();
        rows.push(qj.iter().map(|x| s * x).collect::<Vec<f64>>());
        rows.push(qj.iter().map(|x| -s * x).collect::<Vec<f64>>());
    }
    center(&Dataset::from_matrix(
        DenseMatrix::from_rows(&rows).unwrap(),
    ))
}

pub fn gaussian_dataset(n: usize, d: usize, rng: &mut impl Rng) -> Dataset {
    let scales: Vec<f64> = (0..d).map(|j| 1.0 + (d - j) as f64).collect();
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            gaussian_vec(d, rng)
                .iter()
                .zip(&scales)
                .map(|(z, s)| z * s)
                .collect()
        })
        .collect();
    center(&Dataset::from_matrix(
        DenseMatrix::from_rows(&rows).unwrap(),
    ))
}

pub fn rows_of(ds: &Dataset) -> Vec<Vec<f64>> {
    ds.matrix().row_iter().map(|r| r.to_vec()).collect()
}

/// `v_j = sum_i r_ji b_i` for a random orthogonal `r`.
pub fn rotate_within(vectors: &[Vec<f64>], rng: &mut impl Rng) -> Vec<Vec<f64>> {
    let r = random_orthogonal(vectors.len(), rng);
    r.iter()
        .map(|coef| {
            let mut out = vec![0.0; vectors[0].len()];
            for (c, b) in coef.iter().zip(vectors) {
                out.iter_mut().zip(b).for_each(|(o, x)| *o += c * x);
            }
            out
        })
        .collect()
}
