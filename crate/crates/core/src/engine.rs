//! Baseline profiles and drift scoring.
//!
//! A profile freezes each relation's coefficients and error variance together
//! with its BIC on the baseline table. Scoring evaluates the same frozen
//! relation on field data, without refitting, and compares the two BICs.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::write_atomic;
use crate::relations::{discover_relations, DiscoveryParams, Relation, RelationSet, TermExponents};
use crate::stats::{bayes_factor, bic, OlsFit};
use crate::tabular::DataTable;

pub const FORMAT_VERSION: u32 = 1;

/// Default decision threshold on the `2 ln BF` scale.
pub const DEFAULT_THRESHOLD_2LNBF: f64 = 10.0;

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineProfile {
    pub relations: RelationSet,
    /// BIC of each relation on its own baseline data, in `relations.iter()` order.
    pub baseline_bic: Vec<f64>,
    pub created_at: Option<String>,
    pub format_version: u32,
}

pub fn build_profile(
    table: &DataTable,
    params: DiscoveryParams,
    created_at: Option<String>,
) -> Result<BaselineProfile> {
    let relations = discover_relations(table, params)?;
    let baseline_bic = relations
        .iter()
        .map(|(rel, _)| bic(&rel.fit, &rel.design(table)?, table.column_by_name(&rel.target)?))
        .collect::<Result<_>>()?;
    Ok(BaselineProfile {
        relations,
        baseline_bic,
        created_at,
        format_version: FORMAT_VERSION,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Decision {
    NoDrift,
    Drift,
}

/// Evidence bands on the `2 ln BF` scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Grade {
    Negligible,
    Positive,
    Strong,
    Decisive,
}

impl Grade {
    pub fn from_two_ln_bf(v: f64) -> Self {
        if v > 10.0 {
            Grade::Decisive
        } else if v > 6.0 {
            Grade::Strong
        } else if v > 2.0 {
            Grade::Positive
        } else {
            Grade::Negligible
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DriftFinding {
    pub target: String,
    pub features: Vec<String>,
    pub strong: bool,
    pub r2_baseline: f64,
    pub bic_baseline: f64,
    pub bic_field: f64,
    pub two_ln_bf: f64,
    #[serde(serialize_with = "finite_or_null")]
    pub bf: f64,
    pub grade: Grade,
    pub decision: Decision,
}

fn finite_or_null<S: serde::Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DriftReport {
    pub findings: Vec<DriftFinding>,
    pub field_fingerprint: String,
    pub threshold_2lnbf: f64,
    pub any_strong_drift: bool,
    /// Relations left out because the field table lacks one of their columns.
    pub skipped: Vec<String>,
}

fn score_relation(
    rel: &Relation,
    strong: bool,
    bic_baseline: f64,
    field: &DataTable,
    threshold: f64,
) -> Result<DriftFinding> {
    let bic_field = bic(&rel.fit, &rel.design(field)?, field.column_by_name(&rel.target)?)?;
    let bf = bayes_factor(bic_baseline, bic_field);
    Ok(DriftFinding {
        target: rel.target.clone(),
        features: rel.features.clone(),
        strong,
        r2_baseline: rel.fit.r2,
        bic_baseline,
        bic_field,
        two_ln_bf: bf.two_ln_bf,
        bf: bf.bf,
        grade: Grade::from_two_ln_bf(bf.two_ln_bf),
        decision: if bf.two_ln_bf > threshold {
            Decision::Drift
        } else {
            Decision::NoDrift
        },
    })
}

/// Scores every profile relation whose columns exist in `field`.
pub fn score_drift(profile: &BaselineProfile, field: &DataTable, threshold_2lnbf: f64) -> Result<DriftReport> {
    if profile.relations.is_empty() {
        return Err(Error::EmptyProfile);
    }
    if field.n_rows() < 2 {
        return Err(Error::TableTooSmall {
            rows: field.n_rows(),
            needed: 1,
        });
    }
    if threshold_2lnbf.is_nan() {
        return Err(Error::InvalidParameter("threshold is NaN".into()));
    }
    let mut findings = Vec::with_capacity(profile.relations.len());
    let mut skipped = Vec::new();
    for ((rel, strong), &bic_base) in profile.relations.iter().zip(&profile.baseline_bic) {
        let missing = std::iter::once(&rel.target)
            .chain(&rel.features)
            .find(|f| field.index_of(f).is_none());
        if let Some(f) = missing {
            log::warn!("skipping relation on '{}': field data lacks '{f}'", rel.target);
            skipped.push(rel.target.clone());
            continue;
        }
        findings.push(score_relation(rel, strong, bic_base, field, threshold_2lnbf)?);
    }
    // strong first, then by descending baseline R^2; stable for ties
    findings.sort_by(|a, b| {
        b.strong
            .cmp(&a.strong)
            .then(b.r2_baseline.total_cmp(&a.r2_baseline))
    });
    let any_strong_drift = findings
        .iter()
        .any(|f| f.strong && f.decision == Decision::Drift);
    Ok(DriftReport {
        findings,
        field_fingerprint: field.fingerprint(),
        threshold_2lnbf,
        any_strong_drift,
        skipped,
    })
}

impl DriftReport {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::InvalidParameter(e.to_string()))
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "target",
            "features",
            "strong",
            "r2_baseline",
            "bic_baseline",
            "bic_field",
            "two_ln_bf",
            "bf",
            "grade",
            "decision",
        ])?;
        for f in &self.findings {
            w.write_record([
                f.target.clone(),
                f.features.join(";"),
                f.strong.to_string(),
                f.r2_baseline.to_string(),
                f.bic_baseline.to_string(),
                f.bic_field.to_string(),
                f.two_ln_bf.to_string(),
                f.bf.to_string(),
                format!("{:?}", f.grade),
                format!("{:?}", f.decision),
            ])?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::InvalidParameter(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    /// Writes CSV when the path ends in `.csv`, JSON otherwise.
    pub fn save(&self, path: &Path) -> Result<()> {
        let is_csv = path
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
        let body = if is_csv { self.to_csv()? } else { self.to_json()? };
        write_atomic(path, body.as_bytes())
    }
}

// On-disk profile layout.

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileDoc {
    format_version: u32,
    created_at: Option<String>,
    hyperparams: DiscoveryParams,
    source_fingerprint: String,
    relations: Vec<RelationDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RelationDoc {
    target: String,
    strong: bool,
    features: Vec<String>,
    terms: Vec<TermExponents>,
    beta: Vec<f64>,
    sigma2: f64,
    r2: f64,
    n_train: usize,
    dim: usize,
    bic_baseline: f64,
}

impl BaselineProfile {
    pub fn to_json(&self) -> Result<String> {
        let doc = ProfileDoc {
            format_version: self.format_version,
            created_at: self.created_at.clone(),
            hyperparams: self.relations.params,
            source_fingerprint: self.relations.source_fingerprint.clone(),
            relations: self
                .relations
                .iter()
                .zip(&self.baseline_bic)
                .map(|((r, strong), &bic_baseline)| RelationDoc {
                    target: r.target.clone(),
                    strong,
                    features: r.features.clone(),
                    terms: r.terms.clone(),
                    beta: r.fit.beta.clone(),
                    sigma2: r.fit.sigma2,
                    r2: r.fit.r2,
                    n_train: r.fit.n_train,
                    dim: r.fit.dim,
                    bic_baseline,
                })
                .collect(),
        };
        let mut s =
            serde_json::to_string_pretty(&doc).map_err(|e| Error::CorruptProfile(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(s).map_err(|e| Error::CorruptProfile(e.to_string()))?;
        match value.get("format_version").and_then(|v| v.as_u64()) {
            Some(v) if v == FORMAT_VERSION as u64 => {}
            Some(v) => {
                return Err(Error::VersionMismatch {
                    found: v,
                    expected: FORMAT_VERSION,
                })
            }
            None => return Err(Error::CorruptProfile("missing format_version".into())),
        }
        let doc: ProfileDoc =
            serde_json::from_value(value).map_err(|e| Error::CorruptProfile(e.to_string()))?;

        let mut strong = Vec::new();
        let mut weak = Vec::new();
        let mut strong_bic = Vec::new();
        let mut weak_bic = Vec::new();
        for r in doc.relations {
            let k = r.features.len();
            if r.beta.len() != r.terms.len()
                || r.dim != r.beta.len() + 1
                || r.terms.iter().any(|t| t.0.len() != k)
                || r.features.contains(&r.target)
                || !r.sigma2.is_finite()
                || !r.bic_baseline.is_finite()
            {
                return Err(Error::CorruptProfile(format!(
                    "inconsistent relation for target '{}'",
                    r.target
                )));
            }
            let rel = Relation {
                target: r.target,
                features: r.features,
                terms: r.terms,
                fit: OlsFit {
                    beta: r.beta,
                    sigma2: r.sigma2,
                    r2: r.r2,
                    n_train: r.n_train,
                    dim: r.dim,
                },
            };
            if r.strong {
                strong.push(rel);
                strong_bic.push(r.bic_baseline);
            } else {
                weak.push(rel);
                weak_bic.push(r.bic_baseline);
            }
        }
        strong_bic.extend(weak_bic);
        Ok(BaselineProfile {
            relations: RelationSet {
                strong,
                weak,
                params: doc.hyperparams,
                source_fingerprint: doc.source_fingerprint,
                skipped: Vec::new(),
            },
            baseline_bic: strong_bic,
            created_at: doc.created_at,
            format_version: doc.format_version,
        })
    }
}

pub fn save_profile(profile: &BaselineProfile, path: &Path) -> Result<()> {
    write_atomic(path, profile.to_json()?.as_bytes())
}

pub fn load_profile(path: &Path) -> Result<BaselineProfile> {
    let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    BaselineProfile::from_json(&s)
}
