//! Independent oracles shared by the integration suites. Nothing here calls
//! into the library's fitting or likelihood code.

#![allow(dead_code)]

use nalgebra::DMatrix;

/// Inverse of a small dense matrix by Gauss-Jordan elimination with partial
/// pivoting, on plain nested vectors.
pub fn invert(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let p = a.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..p).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    for col in 0..p {
        let piv = (col..p)
            .max_by(|&x, &y| m[x][col].abs().total_cmp(&m[y][col].abs()))
            .unwrap();
        m.swap(col, piv);
        let d = m[col][col];
        assert!(d.abs() > 1e-300, "singular matrix in oracle");
        for v in m[col].iter_mut() {
            *v /= d;
        }
        for r in 0..p {
            if r != col {
                let f = m[r][col];
                if f != 0.0 {
                    for c in 0..2 * p {
                        m[r][c] -= f * m[col][c];
                    }
                }
            }
        }
    }
    m.into_iter().map(|r| r[p..].to_vec()).collect()
}

pub fn xtx_xty(x: &DMatrix<f64>, y: &[f64]) -> (Vec<Vec<f64>>, Vec<f64>) {
    let (n, p) = x.shape();
    let mut xtx = vec![vec![0.0; p]; p];
    let mut xty = vec![0.0; p];
    for i in 0..n {
        for a in 0..p {
            xty[a] += x[(i, a)] * y[i];
            for b in 0..p {
                xtx[a][b] += x[(i, a)] * x[(i, b)];
            }
        }
    }
    (xtx, xty)
}

/// `(X^T X)^{-1} X^T y`.
pub fn normal_equations(x: &DMatrix<f64>, y: &[f64]) -> Vec<f64> {
    let (xtx, xty) = xtx_xty(x, y);
    let inv = invert(&xtx);
    inv.iter()
        .map(|row| row.iter().zip(&xty).map(|(a, b)| a * b).sum())
        .collect()
}

/// Classical OLS standard errors with the unbiased residual variance.
pub fn standard_errors(x: &DMatrix<f64>, y: &[f64], beta: &[f64]) -> Vec<f64> {
    let (n, p) = x.shape();
    let rss: f64 = (0..n)
        .map(|i| {
            let pred: f64 = (0..p).map(|j| x[(i, j)] * beta[j]).sum();
            (y[i] - pred).powi(2)
        })
        .sum();
    let s2 = rss / (n - p) as f64;
    let (xtx, _) = xtx_xty(x, y);
    let inv = invert(&xtx);
    (0..p).map(|j| (s2 * inv[j][j]).sqrt()).collect()
}

/// Sum over rows of the normal log-density with mean `x_i beta` and
/// variance `sigma2`.
pub fn pointwise_ll(x: &DMatrix<f64>, y: &[f64], beta: &[f64], sigma2: f64) -> f64 {
    let (n, p) = x.shape();
    (0..n)
        .map(|i| {
            let mu: f64 = (0..p).map(|j| x[(i, j)] * beta[j]).sum();
            let z = y[i] - mu;
            (1.0 / (2.0 * std::f64::consts::PI * sigma2).sqrt() * (-z * z / (2.0 * sigma2)).exp()).ln()
        })
        .sum()
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

/// Deterministic pseudo-random numbers for building test problems.
pub struct Lcg(u64);

impl Lcg {
    pub fn new(seed: u64) -> Self {
        Self(seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407))
    }

    pub fn uniform(&mut self) -> f64 {
        self.0 = self
            .0
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        ((self.0 >> 11) as f64) / ((1u64 << 53) as f64)
    }

    /// Box-Muller standard normal.
    pub fn normal(&mut self) -> f64 {
        let u1 = self.uniform().max(1e-300);
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.uniform() * n as f64) as usize % n
    }
}

/// Random design with an intercept column and `p - 1` standard normal columns.
pub fn random_problem(rng: &mut Lcg, n: usize, p: usize, noise: f64) -> (DMatrix<f64>, Vec<f64>) {
    let x = DMatrix::from_fn(n, p, |_, j| if j == 0 { 1.0 } else { rng.normal() });
    let truth: Vec<f64> = (0..p).map(|_| rng.normal() * 2.0).collect();
    let y = (0..n)
        .map(|i| (0..p).map(|j| x[(i, j)] * truth[j]).sum::<f64>() + noise * rng.normal())
        .collect();
    (x, y)
}

/// 2-norm condition number via the oracle inverse: ||A|| ||A^-1|| on X^T X,
/// square-rooted, using Frobenius norms as a cheap upper bound.
pub fn condition_bound(x: &DMatrix<f64>) -> f64 {
    let (xtx, _) = xtx_xty(x, &vec![0.0; x.nrows()]);
    let inv = invert(&xtx);
    let fro = |m: &[Vec<f64>]| m.iter().flatten().map(|v| v * v).sum::<f64>().sqrt();
    (fro(&xtx) * fro(&inv)).sqrt()
}
