//! Drift injection and parameter sweeps.
//!
//! Two injectors are provided: per-column partial row permutation, which keeps
//! every marginal distribution but breaks associations between columns, and
//! "unfairness", which regenerates a target column with the influence of a
//! set of sensitive features scaled by `u`.

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::DMatrix;
use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{build_profile, score_drift, Decision};
use crate::error::{Error, Result};
use crate::io::write_atomic;
use crate::relations::DiscoveryParams;
use crate::stats::{fit_ols, pearson};
use crate::tabular::{column_stats, split_rows, standardize, DataTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DriftKind {
    RowPermutation,
    Unfairness,
}

impl DriftKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DriftKind::RowPermutation => "permute",
            DriftKind::Unfairness => "unfair",
        }
    }
}

/// Feature roles for the unfairness injector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnfairRoles {
    pub target: String,
    pub relevant: Vec<String>,
    pub sensitive: Vec<String>,
}

impl UnfairRoles {
    pub fn validate(&self, table: &DataTable) -> Result<()> {
        if self.relevant.is_empty() || self.sensitive.is_empty() {
            return Err(Error::InvalidParameter(
                "relevant and sensitive feature lists must be non-empty".into(),
            ));
        }
        let mut all: Vec<&String> = self.relevant.iter().chain(&self.sensitive).collect();
        if all.contains(&&self.target) {
            return Err(Error::InvalidParameter(format!(
                "target '{}' cannot also be a predictor",
                self.target
            )));
        }
        all.sort();
        if all.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidParameter(
                "relevant and sensitive features must be distinct".into(),
            ));
        }
        for name in all.into_iter().chain(std::iter::once(&self.target)) {
            table.column_by_name(name)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSpec {
    pub kind: DriftKind,
    /// `R` in `[0, 1]` for permutation, `u >= 0` for unfairness.
    pub param: f64,
    pub seed: u64,
    pub roles: Option<UnfairRoles>,
}

impl SimulationSpec {
    pub fn validate(&self, table: &DataTable) -> Result<()> {
        match self.kind {
            DriftKind::RowPermutation if !(0.0..=1.0).contains(&self.param) => Err(
                Error::InvalidParameter(format!("permutation proportion {} not in [0, 1]", self.param)),
            ),
            DriftKind::Unfairness if !(self.param >= 0.0 && self.param.is_finite()) => Err(
                Error::InvalidParameter(format!("unfairness {} must be finite and >= 0", self.param)),
            ),
            DriftKind::Unfairness => self
                .roles
                .as_ref()
                .ok_or_else(|| Error::InvalidParameter("unfairness needs feature roles".into()))?
                .validate(table),
            DriftKind::RowPermutation => Ok(()),
        }
    }

    /// Applies the configured drift to `table`. Unfairness replaces the target
    /// column with the regenerated one.
    pub fn apply(&self, table: &DataTable) -> Result<DataTable> {
        self.validate(table)?;
        match self.kind {
            DriftKind::RowPermutation => permute_rows(table, self.param, self.seed),
            DriftKind::Unfairness => {
                let roles = self.roles.as_ref().expect("validated");
                let y = gen_unfair_target(table, roles, self.param, self.seed)?;
                table.with_column(&roles.target, y)
            }
        }
    }
}

/// Per column, moves `floor(r * n)` randomly chosen values among their own
/// positions. `r = 0` instead resamples whole rows with replacement.
pub fn permute_rows(table: &DataTable, r: f64, seed: u64) -> Result<DataTable> {
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::InvalidParameter(format!(
            "permutation proportion {r} not in [0, 1]"
        )));
    }
    let n = table.n_rows();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if r == 0.0 {
        let rows: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
        return table.select_rows(&rows);
    }
    let count = (r * n as f64).floor() as usize;
    let columns = table
        .columns()
        .iter()
        .map(|col| {
            let mut out = col.clone();
            let positions = index::sample(&mut rng, n, count).into_vec();
            let mut values: Vec<f64> = positions.iter().map(|&p| col[p]).collect();
            values.shuffle(&mut rng);
            for (&p, v) in positions.iter().zip(values) {
                out[p] = v;
            }
            out
        })
        .collect();
    DataTable::new(table.names().to_vec(), columns)
}

/// Synthetic target whose dependence on the sensitive features is scaled by `u`.
///
/// The target and all role features are standardized, the target is regressed
/// on relevant and sensitive features (with intercept), the sensitive
/// coefficients are multiplied by `u`, and a new target is drawn from the
/// modified linear model with Gaussian noise of the base fit's residual
/// variance. The result is rescaled to the original target's mean and
/// population standard deviation.
pub fn gen_unfair_target(table: &DataTable, roles: &UnfairRoles, u: f64, seed: u64) -> Result<Vec<f64>> {
    let y = column_stats(table.column_by_name(&roles.target)?);
    gen_unfair_target_scaled(table, roles, u, seed, y.mean, y.std)
}

/// As [`gen_unfair_target`], rescaled to a caller-chosen mean and std.
pub fn gen_unfair_target_scaled(
    table: &DataTable,
    roles: &UnfairRoles,
    u: f64,
    seed: u64,
    mean: f64,
    std: f64,
) -> Result<Vec<f64>> {
    roles.validate(table)?;
    if !(u >= 0.0 && u.is_finite()) {
        return Err(Error::InvalidParameter(format!("unfairness {u} must be finite and >= 0")));
    }
    let standardized = |name: &String| -> Result<Vec<f64>> {
        standardize(table.column_by_name(name)?)
            .map(|(z, _)| z)
            .map_err(|_| Error::ZeroVariance(name.clone()))
    };
    let y_std = standardized(&roles.target)?;
    let predictors: Vec<Vec<f64>> = roles
        .relevant
        .iter()
        .chain(&roles.sensitive)
        .map(standardized)
        .collect::<Result<_>>()?;

    let n = table.n_rows();
    let design = DMatrix::from_fn(n, predictors.len() + 1, |i, j| {
        if j == 0 {
            1.0
        } else {
            predictors[j - 1][i]
        }
    });
    let base = fit_ols(&design, &y_std)?;
    let mut coef = base.beta.clone();
    let first_sensitive = 1 + roles.relevant.len();
    for c in &mut coef[first_sensitive..] {
        *c *= u;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, base.sigma2.sqrt())
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let coef = nalgebra::DVector::from_vec(coef);
    let signal = &design * &coef;
    let generated: Vec<f64> = signal.iter().map(|s| s + noise.sample(&mut rng)).collect();

    let (z, _) = standardize(&generated)
        .map_err(|_| Error::ZeroVariance(format!("generated {}", roles.target)))?;
    Ok(z.into_iter().map(|v| v * std + mean).collect())
}

/// Mixes a base seed with a stream index (splitmix64 finalizer).
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    let mut z = base ^ stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "median of empty slice");
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        0.5 * (v[mid - 1] + v[mid])
    }
}

fn ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut out = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // average rank for ties, 1-based
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &o in &order[i..=j] {
            out[o] = r;
        }
        i = j + 1;
    }
    out
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    pearson(&ranks(x), &ranks(y))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord {
    pub param: f64,
    pub seed: u64,
    pub target: String,
    pub strong: bool,
    pub r2_baseline: f64,
    pub two_ln_bf: f64,
    pub decision: Decision,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelationPoint {
    pub target: String,
    pub two_ln_bf: f64,
    pub r2_baseline: f64,
    /// How many seeds produced this relation.
    pub n_seeds: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub param: f64,
    pub per_relation: Vec<RelationPoint>,
}

/// Absolute correlation between the regenerated target and one predictor.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TargetCorrelation {
    pub param: f64,
    pub seed: u64,
    pub feature: String,
    pub abs_corr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub kind: DriftKind,
    /// Medians over seeds, ascending in the drift parameter.
    pub points: Vec<SweepPoint>,
    pub records: Vec<SweepRecord>,
    /// Filled by unfairness sweeps only.
    pub correlations: Vec<TargetCorrelation>,
    pub seeds_used: Vec<u64>,
}

impl SweepResult {
    /// Median `2 ln BF` series for one target, in parameter order.
    pub fn series(&self, target: &str) -> Vec<(f64, f64)> {
        self.points
            .iter()
            .filter_map(|p| {
                p.per_relation
                    .iter()
                    .find(|r| r.target == target)
                    .map(|r| (p.param, r.two_ln_bf))
            })
            .collect()
    }

    /// Spearman correlation between the parameter and the median `2 ln BF`,
    /// per target.
    pub fn monotonicity(&self) -> Vec<(String, Option<f64>)> {
        let targets: Vec<String> = self
            .points
            .first()
            .map(|p| p.per_relation.iter().map(|r| r.target.clone()).collect())
            .unwrap_or_default();
        targets
            .into_iter()
            .map(|t| {
                let (x, y): (Vec<f64>, Vec<f64>) = self.series(&t).into_iter().unzip();
                let rho = if x.len() >= 2 { spearman(&x, &y).ok() } else { None };
                (t, rho)
            })
            .collect()
    }

    pub fn per_seed_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["kind", "param", "seed", "target", "r2_baseline", "two_ln_bf", "decision"])?;
        for r in &self.records {
            w.write_record([
                self.kind.as_str().to_string(),
                r.param.to_string(),
                r.seed.to_string(),
                r.target.clone(),
                r.r2_baseline.to_string(),
                r.two_ln_bf.to_string(),
                format!("{:?}", r.decision),
            ])?;
        }
        finish_csv(w)
    }

    pub fn aggregated_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["kind", "param", "target", "median_two_ln_bf"])?;
        for p in &self.points {
            for r in &p.per_relation {
                w.write_record([
                    self.kind.as_str().to_string(),
                    p.param.to_string(),
                    r.target.clone(),
                    r.two_ln_bf.to_string(),
                ])?;
            }
        }
        finish_csv(w)
    }

    pub fn correlations_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["param", "seed", "feature", "abs_corr"])?;
        for c in &self.correlations {
            w.write_record([
                c.param.to_string(),
                c.seed.to_string(),
                c.feature.clone(),
                c.abs_corr.to_string(),
            ])?;
        }
        finish_csv(w)
    }

    /// Writes `per_seed.csv`, `aggregated.csv` and, for unfairness sweeps,
    /// `correlations.csv` into `dir`.
    pub fn write_csvs(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        write_atomic(&dir.join("per_seed.csv"), self.per_seed_csv()?.as_bytes())?;
        write_atomic(&dir.join("aggregated.csv"), self.aggregated_csv()?.as_bytes())?;
        if !self.correlations.is_empty() {
            write_atomic(&dir.join("correlations.csv"), self.correlations_csv()?.as_bytes())?;
        }
        Ok(())
    }
}

fn finish_csv(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w
        .into_inner()
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepConfig {
    pub params: DiscoveryParams,
    pub threshold_2lnbf: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            params: DiscoveryParams::default(),
            threshold_2lnbf: crate::engine::DEFAULT_THRESHOLD_2LNBF,
        }
    }
}

fn check_sweep_inputs(values: &[f64], seeds: &[u64], what: &str) -> Result<()> {
    if values.is_empty() {
        return Err(Error::InvalidParameter(format!("{what} list is empty")));
    }
    if values.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::InvalidParameter(format!("{what} list must be sorted ascending")));
    }
    if seeds.is_empty() {
        return Err(Error::InvalidParameter("seed list is empty".into()));
    }
    Ok(())
}

type SeedOutput = (Vec<SweepRecord>, Vec<TargetCorrelation>);

fn collect_sweep(
    kind: DriftKind,
    table: &DataTable,
    values: &[f64],
    seeds: &[u64],
    per_seed: impl Fn(u64) -> Result<SeedOutput> + Sync,
) -> Result<SweepResult> {
    let outputs: Vec<SeedOutput> = seeds
        .par_iter()
        .map(|&s| per_seed(s))
        .collect::<Result<_>>()?;
    let (records, correlations): (Vec<_>, Vec<_>) = outputs.into_iter().unzip();
    let records: Vec<SweepRecord> = records.into_iter().flatten().collect();
    let correlations = correlations.into_iter().flatten().collect();

    // relations keyed by target column position, so output order is stable
    let order = |t: &str| table.index_of(t).unwrap_or(usize::MAX);
    let points = values
        .iter()
        .enumerate()
        .map(|(i, &param)| {
            let mut by_target: BTreeMap<(usize, String), (Vec<f64>, Vec<f64>)> = BTreeMap::new();
            for r in records.iter().filter(|r| r.param.to_bits() == values[i].to_bits()) {
                let e = by_target.entry((order(&r.target), r.target.clone())).or_default();
                e.0.push(r.two_ln_bf);
                e.1.push(r.r2_baseline);
            }
            SweepPoint {
                param,
                per_relation: by_target
                    .into_iter()
                    .map(|((_, target), (bf, r2))| RelationPoint {
                        target,
                        two_ln_bf: median(&bf),
                        r2_baseline: median(&r2),
                        n_seeds: bf.len(),
                    })
                    .collect(),
            }
        })
        .collect();
    Ok(SweepResult {
        kind,
        points,
        records,
        correlations,
        seeds_used: seeds.to_vec(),
    })
}

/// Split 50/50 per seed, build a profile on the baseline half, then score the
/// field half after permuting it at each proportion in `r_values`.
pub fn run_permutation_sweep(
    table: &DataTable,
    config: SweepConfig,
    r_values: &[f64],
    seeds: &[u64],
) -> Result<SweepResult> {
    check_sweep_inputs(r_values, seeds, "r")?;
    if let Some(r) = r_values.iter().find(|r| !(0.0..=1.0).contains(*r)) {
        return Err(Error::InvalidParameter(format!("permutation proportion {r} not in [0, 1]")));
    }
    collect_sweep(DriftKind::RowPermutation, table, r_values, seeds, |seed| {
        let split = split_rows(table, 0.5, seed)?;
        let profile = build_profile(&split.baseline, config.params, None)?;
        let mut records = Vec::new();
        for (i, &r) in r_values.iter().enumerate() {
            let drifted = permute_rows(&split.field, r, derive_seed(seed, i as u64))?;
            let report = score_drift(&profile, &drifted, config.threshold_2lnbf)?;
            records.extend(report.findings.into_iter().map(|f| SweepRecord {
                param: r,
                seed,
                target: f.target,
                strong: f.strong,
                r2_baseline: f.r2_baseline,
                two_ln_bf: f.two_ln_bf,
                decision: f.decision,
            }));
        }
        Ok((records, Vec::new()))
    })
}

/// Split 50/50 per seed, regenerate the target on the baseline half at `u = 0`
/// and build a profile, then regenerate the field half's target at each `u`
/// (features untouched) and score it.
pub fn run_unfairness_sweep(
    table: &DataTable,
    roles: &UnfairRoles,
    config: SweepConfig,
    u_values: &[f64],
    seeds: &[u64],
) -> Result<SweepResult> {
    check_sweep_inputs(u_values, seeds, "u")?;
    if u_values[0] != 0.0 {
        return Err(Error::InvalidParameter("u list must start at 0".into()));
    }
    roles.validate(table)?;
    collect_sweep(DriftKind::Unfairness, table, u_values, seeds, |seed| {
        let split = split_rows(table, 0.5, seed)?;
        let base_y = gen_unfair_target(&split.baseline, roles, 0.0, derive_seed(seed, u64::MAX))?;
        let baseline = split.baseline.with_column(&roles.target, base_y)?;
        let profile = build_profile(&baseline, config.params, None)?;
        let mut records = Vec::new();
        let mut correlations = Vec::new();
        for (i, &u) in u_values.iter().enumerate() {
            let y = gen_unfair_target(&split.field, roles, u, derive_seed(seed, i as u64))?;
            for f in roles.relevant.iter().chain(&roles.sensitive) {
                correlations.push(TargetCorrelation {
                    param: u,
                    seed,
                    feature: f.clone(),
                    abs_corr: pearson(&y, split.field.column_by_name(f)?)?.abs(),
                });
            }
            let drifted = split.field.with_column(&roles.target, y)?;
            let report = score_drift(&profile, &drifted, config.threshold_2lnbf)?;
            records.extend(report.findings.into_iter().map(|f| SweepRecord {
                param: u,
                seed,
                target: f.target,
                strong: f.strong,
                r2_baseline: f.r2_baseline,
                two_ln_bf: f.two_ln_bf,
                decision: f.decision,
            }));
        }
        Ok((records, correlations))
    })
}
