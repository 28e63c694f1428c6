//! Seeded synthetic datasets used by the test suites, the CLI examples and
//! the Python smoke test.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::sim::UnfairRoles;
use crate::tabular::{column_stats, DataTable};

fn normals(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

/// Six columns `x1..x5, y` where
/// `y = 3 + 2*x1 - x2 + 0.5*x1*x2 + e`, with `e` Gaussian at 5% of the
/// standard deviation of the noiseless signal.
///
/// `x1, x2` are independent standard normals. `x3` and `x4` are correlated
/// with each other (rho = 0.6) but not with anything else, and `x5` is pure
/// noise, so the relation targeting `x5` is weak.
pub fn planted_relation(n: usize, seed: u64) -> DataTable {
    planted_relation_with_noise(n, seed, 0.05)
}

pub fn planted_relation_with_noise(n: usize, seed: u64, noise_frac: f64) -> DataTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x1 = normals(&mut rng, n);
    let x2 = normals(&mut rng, n);
    let x4 = normals(&mut rng, n);
    let x3: Vec<f64> = x4
        .iter()
        .zip(normals(&mut rng, n))
        .map(|(a, e)| 0.6 * a + 0.8 * e)
        .collect();
    let x5 = normals(&mut rng, n);
    let signal: Vec<f64> = x1
        .iter()
        .zip(&x2)
        .map(|(a, b)| 3.0 + 2.0 * a - b + 0.5 * a * b)
        .collect();
    let sd = noise_frac * column_stats(&signal).std;
    let y = signal
        .iter()
        .zip(normals(&mut rng, n))
        .map(|(s, e)| s + sd * e)
        .collect();
    DataTable::from_columns(vec![
        ("x1", x1),
        ("x2", x2),
        ("x3", x3),
        ("x4", x4),
        ("x5", x5),
        ("y", y),
    ])
    .expect("valid synthetic table")
}

/// Loan-style table with columns `income, ccavg, age, family, mortgage`.
///
/// The four predictors are jointly Gaussian with correlation matrix
///
/// ```text
///            income ccavg  age   family
/// income     1.00   0.60   0.10  0.05
/// ccavg      0.60   1.00   0.05  0.05
/// age        0.10   0.05   1.00  0.30
/// family     0.05   0.05   0.30  1.00
/// ```
///
/// and marginal (mean, sd) of (74, 45), (1.9, 1.7), (45, 11), (2.4, 1.1).
/// `mortgage = 20 + 1.2*income + 8*ccavg + 2*age + 15*family + N(0, 12^2)`,
/// so spending-power features dominate and age / family size carry a
/// smaller, genuine effect.
pub fn loan_like(n: usize, seed: u64) -> DataTable {
    let corr = DMatrix::from_row_slice(
        4,
        4,
        &[
            1.00, 0.60, 0.10, 0.05, //
            0.60, 1.00, 0.05, 0.05, //
            0.10, 0.05, 1.00, 0.30, //
            0.05, 0.05, 0.30, 1.00,
        ],
    );
    let chol = corr.cholesky().expect("correlation matrix is positive definite");
    let lower = chol.l();
    let means = [74.0, 1.9, 45.0, 2.4];
    let sds = [45.0, 1.7, 11.0, 1.1];
    let coef = [1.2, 8.0, 2.0, 15.0];

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cols: Vec<Vec<f64>> = (0..5).map(|_| Vec::with_capacity(n)).collect();
    for _ in 0..n {
        let z = &lower * DVector::from_vec(normals(&mut rng, 4));
        let e: f64 = StandardNormal.sample(&mut rng);
        let mut mortgage = 20.0 + 12.0 * e;
        for j in 0..4 {
            let v = means[j] + sds[j] * z[j];
            mortgage += coef[j] * v;
            cols[j].push(v);
        }
        cols[4].push(mortgage);
    }
    let names = ["income", "ccavg", "age", "family", "mortgage"];
    DataTable::new(names.iter().map(|s| s.to_string()).collect(), cols)
        .expect("valid synthetic table")
}

/// Roles matching [`loan_like`]: spending power relevant, demographics sensitive.
pub fn loan_roles() -> UnfairRoles {
    UnfairRoles {
        target: "mortgage".into(),
        relevant: vec!["income".into(), "ccavg".into()],
        sensitive: vec!["age".into(), "family".into()],
    }
}
