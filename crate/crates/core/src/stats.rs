//! Correlation, least-squares fitting and the likelihood / BIC / Bayes factor
//! chain used to compare a frozen regression across two datasets.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tabular::DataTable;

/// Error variances are floored here before any logarithm is taken, so exact
/// relations keep a finite likelihood.
pub const SIGMA2_FLOOR: f64 = 1e-12;

/// Relative singular value below which a design is considered rank deficient.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// Sample Pearson correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::DimensionMismatch(format!(
            "pearson needs equal lengths >= 2, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(Error::ZeroVariance("x".into()));
    }
    if syy == 0.0 {
        return Err(Error::ZeroVariance("y".into()));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Matrix of absolute pairwise Pearson correlations.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    pub names: Vec<String>,
    pub values: DMatrix<f64>,
    /// Columns with zero variance; their rows and columns are all zero.
    pub constant: Vec<bool>,
}

impl CorrelationMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[(i, j)]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

pub fn correlation_matrix(table: &DataTable) -> Result<CorrelationMatrix> {
    let n = table.n_rows();
    if n < 2 {
        return Err(Error::TableTooSmall { rows: n, needed: 1 });
    }
    let m = table.n_cols();
    let constant: Vec<bool> = table
        .columns()
        .iter()
        .map(|c| c.iter().all(|v| *v == c[0]))
        .collect();
    let mut values = DMatrix::zeros(m, m);
    for i in 0..m {
        if constant[i] {
            continue;
        }
        values[(i, i)] = 1.0;
        for j in (i + 1)..m {
            if constant[j] {
                continue;
            }
            let r = pearson(table.column(i), table.column(j))?.abs();
            values[(i, j)] = r;
            values[(j, i)] = r;
        }
    }
    Ok(CorrelationMatrix {
        names: table.names().to_vec(),
        values,
        constant,
    })
}

/// Result of an ordinary least-squares fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OlsFit {
    pub beta: Vec<f64>,
    /// Maximum-likelihood error variance, RSS / n.
    pub sigma2: f64,
    pub r2: f64,
    pub n_train: usize,
    /// Number of estimated parameters: coefficients plus the error variance.
    pub dim: usize,
}

impl OlsFit {
    pub fn predict(&self, design: &DMatrix<f64>) -> Result<DVector<f64>> {
        if design.ncols() != self.beta.len() {
            return Err(Error::DimensionMismatch(format!(
                "design has {} columns, fit has {} coefficients",
                design.ncols(),
                self.beta.len()
            )));
        }
        Ok(design * DVector::from_column_slice(&self.beta))
    }

    fn floored_sigma2(&self) -> f64 {
        self.sigma2.max(SIGMA2_FLOOR)
    }
}

/// Least-squares fit of `target` on the columns of `design` using a
/// Householder QR factorization.
pub fn fit_ols(design: &DMatrix<f64>, target: &[f64]) -> Result<OlsFit> {
    let (n, p) = design.shape();
    if target.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "design has {n} rows, target has {}",
            target.len()
        )));
    }
    if p == 0 || n <= p {
        return Err(Error::InsufficientRows { rows: n, cols: p });
    }
    if target.iter().all(|v| *v == target[0]) {
        return Err(Error::DegenerateTarget);
    }

    let qr = design.clone().qr();
    let r = qr.r();
    // R shares its singular values with the design
    let sv = r.singular_values();
    let (smax, smin) = sv
        .iter()
        .fold((0.0f64, f64::INFINITY), |(hi, lo), &s| (hi.max(s), lo.min(s)));
    if !(smax > 0.0) || smin < RANK_TOLERANCE * smax {
        return Err(Error::RankDeficient {
            ratio: if smax > 0.0 { smin / smax } else { 0.0 },
        });
    }

    let y = DVector::from_column_slice(target);
    let mut qty = y.clone();
    qr.q_tr_mul(&mut qty);
    let beta = r
        .solve_upper_triangular(&qty.rows(0, p).into_owned())
        .ok_or(Error::RankDeficient { ratio: 0.0 })?;

    let resid = design * &beta - &y;
    let rss = resid.norm_squared();
    let mean = target.iter().sum::<f64>() / n as f64;
    let tss: f64 = target.iter().map(|v| (v - mean).powi(2)).sum();
    Ok(OlsFit {
        beta: beta.iter().copied().collect(),
        sigma2: rss / n as f64,
        r2: (1.0 - rss / tss).clamp(0.0, 1.0),
        n_train: n,
        dim: p + 1,
    })
}

/// Exact Gaussian log-likelihood of `target` under the frozen fit, with the
/// fit's own error variance. `n` is the number of supplied rows.
pub fn gaussian_log_likelihood(fit: &OlsFit, design: &DMatrix<f64>, target: &[f64]) -> Result<f64> {
    if design.nrows() != target.len() {
        return Err(Error::DimensionMismatch(format!(
            "design has {} rows, target has {}",
            design.nrows(),
            target.len()
        )));
    }
    let pred = fit.predict(design)?;
    let rss: f64 = pred
        .iter()
        .zip(target)
        .map(|(p, y)| (p - y).powi(2))
        .sum();
    let s2 = fit.floored_sigma2();
    let n = target.len() as f64;
    Ok(-0.5 * n * (2.0 * std::f64::consts::PI * s2).ln() - rss / (2.0 * s2))
}

/// `-2 LL + dim * ln(n)`.
pub fn bic(fit: &OlsFit, design: &DMatrix<f64>, target: &[f64]) -> Result<f64> {
    let ll = gaussian_log_likelihood(fit, design, target)?;
    Ok(bic_from_ll(ll, fit.dim, target.len()))
}

pub fn bic_from_ll(ll: f64, dim: usize, n: usize) -> f64 {
    -2.0 * ll + dim as f64 * (n as f64).ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BayesFactor {
    /// `exp(-(bic_1 - bic_2) / 2)`; overflows to infinity for large gaps.
    pub bf: f64,
    /// `-(bic_1 - bic_2)`, always finite for finite inputs.
    pub two_ln_bf: f64,
}

/// BIC approximation to the Bayes factor of pairing 1 over pairing 2.
pub fn bayes_factor(bic_1: f64, bic_2: f64) -> BayesFactor {
    let two_ln_bf = -(bic_1 - bic_2);
    BayesFactor {
        bf: (0.5 * two_ln_bf).exp(),
        two_ln_bf,
    }
}
