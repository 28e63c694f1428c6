//! Polynomial relation discovery.
//!
//! For every non-constant feature, the `k` other features most correlated with
//! it are expanded into all monomials of total degree at most `l`, and the
//! feature is regressed on that embedding. Fits whose R^2 reaches the
//! threshold are kept as strong relations.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{correlation_matrix, fit_ols, CorrelationMatrix, OlsFit};
use crate::tabular::DataTable;

/// Exponents of one monomial, one entry per chosen feature. All zeros is the
/// constant term.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TermExponents(pub Vec<u32>);

impl TermExponents {
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_constant(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    /// Human readable form such as `a*b^2`, or `1` for the constant.
    pub fn label(&self, features: &[String]) -> String {
        let parts: Vec<String> = self
            .0
            .iter()
            .zip(features)
            .filter(|(e, _)| **e > 0)
            .map(|(&e, f)| if e == 1 { f.clone() } else { format!("{f}^{e}") })
            .collect();
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join("*")
        }
    }
}

/// All exponent vectors over `k` variables with total degree at most `l`.
///
/// Ordered by total degree, then lexicographically descending on the exponent
/// vector, which for two variables gives `1, x1, x2, x1x2, x1^2, x2^2`.
/// The count is `C(k + l, k)`.
pub fn enumerate_terms(k: usize, l: u32) -> Vec<TermExponents> {
    assert!(k >= 1, "enumerate_terms needs k >= 1");
    let mut out = Vec::new();
    for deg in 0..=l {
        let mut same_degree = Vec::new();
        compositions(k, deg, &mut Vec::with_capacity(k), &mut same_degree);
        // within a degree: products of distinct features before pure powers
        same_degree.sort_by(|a: &Vec<u32>, b: &Vec<u32>| {
            let max_a = a.iter().max().copied().unwrap_or(0);
            let max_b = b.iter().max().copied().unwrap_or(0);
            max_a.cmp(&max_b).then_with(|| b.cmp(a))
        });
        out.extend(same_degree.into_iter().map(TermExponents));
    }
    out
}

fn compositions(slots: usize, remaining: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if prefix.len() + 1 == slots {
        prefix.push(remaining);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    for e in (0..=remaining).rev() {
        prefix.push(e);
        compositions(slots, remaining - e, prefix, out);
        prefix.pop();
    }
}

/// Evaluates each term rowwise on the named features of `table`.
pub fn embed(table: &DataTable, features: &[String], terms: &[TermExponents]) -> Result<DMatrix<f64>> {
    let cols: Vec<&[f64]> = features
        .iter()
        .map(|f| table.column_by_name(f))
        .collect::<Result<_>>()?;
    if let Some(t) = terms.iter().find(|t| t.0.len() != features.len()) {
        return Err(Error::DimensionMismatch(format!(
            "term {:?} does not match {} features",
            t.0,
            features.len()
        )));
    }
    let n = table.n_rows();
    Ok(DMatrix::from_fn(n, terms.len(), |i, t| {
        terms[t]
            .0
            .iter()
            .zip(&cols)
            .filter(|(e, _)| **e > 0)
            .map(|(&e, c)| c[i].powi(e as i32))
            .product()
    }))
}

/// Names of the `k` features most correlated with `target`, excluding the
/// target itself and constant columns. Ties go to the lower column index.
pub fn top_k_correlated(corr: &CorrelationMatrix, target: &str, k: usize) -> Result<Vec<String>> {
    let t = corr
        .index_of(target)
        .ok_or_else(|| Error::UnknownFeature(target.to_string()))?;
    let mut candidates: Vec<usize> = (0..corr.names.len())
        .filter(|&j| j != t && !corr.constant[j])
        .collect();
    if candidates.len() < k {
        return Err(Error::NotEnoughFeatures {
            needed: k,
            available: candidates.len(),
        });
    }
    // stable sort keeps index order among equal correlations
    candidates.sort_by(|&a, &b| corr.get(t, b).total_cmp(&corr.get(t, a)));
    Ok(candidates[..k].iter().map(|&j| corr.names[j].clone()).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscoveryParams {
    pub k: usize,
    pub l: u32,
    pub r2_threshold: f64,
}

impl Default for DiscoveryParams {
    fn default() -> Self {
        Self {
            k: 2,
            l: 2,
            r2_threshold: 0.9,
        }
    }
}

impl DiscoveryParams {
    pub fn n_terms(&self) -> usize {
        binomial(self.k + self.l as usize, self.k)
    }

    fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidParameter("k must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.r2_threshold) {
            return Err(Error::InvalidParameter(format!(
                "r2 threshold must lie in [0, 1], got {}",
                self.r2_threshold
            )));
        }
        Ok(())
    }
}

pub(crate) fn binomial(n: usize, k: usize) -> usize {
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// One fitted relation `target ~ sum_t beta_t * term_t(features)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Relation {
    pub target: String,
    pub features: Vec<String>,
    pub terms: Vec<TermExponents>,
    pub fit: OlsFit,
}

impl Relation {
    pub fn design(&self, table: &DataTable) -> Result<DMatrix<f64>> {
        embed(table, &self.features, &self.terms)
    }

    pub fn formula(&self) -> String {
        let rhs: Vec<String> = self
            .terms
            .iter()
            .zip(&self.fit.beta)
            .map(|(t, b)| format!("{b:+.4}*{}", t.label(&self.features)))
            .collect();
        format!("{} ~ {}", self.target, rhs.join(" "))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SkippedTarget {
    pub target: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelationSet {
    pub strong: Vec<Relation>,
    pub weak: Vec<Relation>,
    pub params: DiscoveryParams,
    pub source_fingerprint: String,
    pub skipped: Vec<SkippedTarget>,
}

impl RelationSet {
    /// Strong relations followed by weak ones.
    pub fn iter(&self) -> impl Iterator<Item = (&Relation, bool)> {
        self.strong
            .iter()
            .map(|r| (r, true))
            .chain(self.weak.iter().map(|r| (r, false)))
    }

    pub fn len(&self) -> usize {
        self.strong.len() + self.weak.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub fn discover_relations(table: &DataTable, params: DiscoveryParams) -> Result<RelationSet> {
    params.validate()?;
    let n_terms = params.n_terms();
    if table.n_rows() <= n_terms {
        return Err(Error::TableTooSmall {
            rows: table.n_rows(),
            needed: n_terms,
        });
    }
    let corr = correlation_matrix(table)?;
    let usable = corr.constant.iter().filter(|c| !**c).count();
    if usable <= params.k {
        return Err(Error::NotEnoughFeatures {
            needed: params.k + 1,
            available: usable,
        });
    }
    let terms = enumerate_terms(params.k, params.l);

    let mut set = RelationSet {
        strong: Vec::new(),
        weak: Vec::new(),
        params,
        source_fingerprint: table.fingerprint(),
        skipped: Vec::new(),
    };
    for (j, target) in table.names().iter().enumerate() {
        if corr.constant[j] {
            log::info!("skipping constant feature '{target}'");
            set.skipped.push(SkippedTarget {
                target: target.clone(),
                reason: "constant feature".into(),
            });
            continue;
        }
        let features = top_k_correlated(&corr, target, params.k)?;
        let design = embed(table, &features, &terms)?;
        match fit_ols(&design, table.column(j)) {
            Ok(fit) => {
                let rel = Relation {
                    target: target.clone(),
                    features,
                    terms: terms.clone(),
                    fit,
                };
                if rel.fit.r2 >= params.r2_threshold {
                    set.strong.push(rel);
                } else {
                    set.weak.push(rel);
                }
            }
            Err(e @ (Error::RankDeficient { .. } | Error::DegenerateTarget)) => {
                log::warn!("skipping target '{target}': {e}");
                set.skipped.push(SkippedTarget {
                    target: target.clone(),
                    reason: e.to_string(),
                });
            }
            Err(e) => return Err(e),
        }
    }
    Ok(set)
}
