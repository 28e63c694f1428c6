use reldrift::synthetic::planted_relation;
use reldrift::{
    build_profile, load_profile, permute_rows, save_profile, score_drift, split_rows, DataTable,
    Decision, DiscoveryParams, DEFAULT_THRESHOLD_2LNBF,
};

fn finding<'a>(rep: &'a reldrift::DriftReport, target: &str) -> &'a reldrift::DriftFinding {
    rep.findings.iter().find(|f| f.target == target).unwrap()
}

#[test]
fn planted_profile_stores_finite_bics() {
    let t = planted_relation(2000, 1);
    let p = build_profile(&t, DiscoveryParams::default(), None).unwrap();
    assert!(p.relations.strong.iter().any(|r| r.target == "y"));
    assert_eq!(p.baseline_bic.len(), p.relations.len());
    assert!(p.baseline_bic.iter().all(|b| b.is_finite()));
    assert_eq!(p.format_version, 1);
}

#[test]
fn noise_profile_has_only_weak_relations() {
    let t = DataTable::from_columns(vec![
        ("a", (0..500).map(|i| ((i * 7919) % 1013) as f64).collect()),
        ("b", (0..500).map(|i| ((i * 104729) % 887) as f64).collect()),
        ("c", (0..500).map(|i| ((i * 1299709) % 641) as f64).collect()),
    ])
    .unwrap();
    let p = build_profile(&t, DiscoveryParams::default(), None).unwrap();
    assert!(p.relations.strong.is_empty());
    assert!(!p.relations.weak.is_empty());
}

#[test]
fn repeated_builds_serialize_identically() {
    let t = planted_relation(600, 4);
    let a = build_profile(&t, DiscoveryParams::default(), None).unwrap();
    let b = build_profile(&t, DiscoveryParams::default(), None).unwrap();
    assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
}

#[test]
fn heavy_permutation_is_flagged() {
    let t = planted_relation(4000, 6);
    let s = split_rows(&t, 0.5, 6).unwrap();
    let p = build_profile(&s.baseline, DiscoveryParams::default(), None).unwrap();
    let drifted = permute_rows(&s.field, 0.5, 60).unwrap();
    let rep = score_drift(&p, &drifted, DEFAULT_THRESHOLD_2LNBF).unwrap();
    let y = finding(&rep, "y");
    assert!(y.two_ln_bf > 1000.0, "two_ln_bf = {}", y.two_ln_bf);
    assert_eq!(y.decision, Decision::Drift);
    assert!(rep.any_strong_drift);
}

#[test]
fn findings_are_ordered_strong_first_by_r2() {
    let t = planted_relation(1000, 8);
    let p = build_profile(&t, DiscoveryParams::default(), None).unwrap();
    let rep = score_drift(&p, &t, 10.0).unwrap();
    let keys: Vec<(bool, f64)> = rep.findings.iter().map(|f| (f.strong, f.r2_baseline)).collect();
    for w in keys.windows(2) {
        assert!(w[0].0 > w[1].0 || (w[0].0 == w[1].0 && w[0].1 >= w[1].1));
    }
}

#[test]
fn row_order_does_not_matter() {
    let t = planted_relation(1000, 10);
    let s = split_rows(&t, 0.5, 10).unwrap();
    let p = build_profile(&s.baseline, DiscoveryParams::default(), None).unwrap();
    let rev: Vec<usize> = (0..s.field.n_rows()).rev().collect();
    let a = score_drift(&p, &s.field, 10.0).unwrap();
    let b = score_drift(&p, &s.field.select_rows(&rev).unwrap(), 10.0).unwrap();
    for (x, y) in a.findings.iter().zip(&b.findings) {
        assert_eq!(x.target, y.target);
        assert!((x.two_ln_bf - y.two_ln_bf).abs() <= 1e-9 * x.bic_field.abs().max(1.0));
        assert_eq!(x.decision, y.decision);
    }
}

#[test]
fn duplicating_drifted_field_keeps_drift() {
    let t = planted_relation(1000, 12);
    let s = split_rows(&t, 0.5, 12).unwrap();
    let p = build_profile(&s.baseline, DiscoveryParams::default(), None).unwrap();
    let drifted = permute_rows(&s.field, 0.3, 5).unwrap();
    let n = drifted.n_rows();
    let doubled = drifted
        .select_rows(&(0..2 * n).map(|i| i % n).collect::<Vec<_>>())
        .unwrap();
    let a = score_drift(&p, &drifted, 10.0).unwrap();
    let b = score_drift(&p, &doubled, 10.0).unwrap();
    for fa in &a.findings {
        let fb = finding(&b, &fa.target);
        assert_ne!(fa.bic_field, fb.bic_field);
        if fa.decision == Decision::Drift {
            assert_eq!(fb.decision, Decision::Drift);
        }
    }
}

#[test]
fn removing_a_relation_leaves_others_bit_identical() {
    let t = planted_relation(1000, 14);
    let s = split_rows(&t, 0.5, 14).unwrap();
    let p = build_profile(&s.baseline, DiscoveryParams::default(), None).unwrap();
    let full = score_drift(&p, &s.field, 10.0).unwrap();

    let mut reduced = p.clone();
    let removed = reduced.relations.weak.remove(0).target;
    let idx = reduced.relations.strong.len();
    reduced.baseline_bic.remove(idx);
    let part = score_drift(&reduced, &s.field, 10.0).unwrap();
    assert_eq!(part.findings.len() + 1, full.findings.len());
    for f in &part.findings {
        assert_ne!(f.target, removed);
        assert_eq!(f, finding(&full, &f.target));
    }
}

#[test]
fn saved_profile_scores_identically() {
    let t = planted_relation(1000, 16);
    let s = split_rows(&t, 0.5, 16).unwrap();
    let p = build_profile(&s.baseline, DiscoveryParams::default(), Some("now".into())).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("profile.json");
    save_profile(&p, &path).unwrap();
    let back = load_profile(&path).unwrap();
    assert_eq!(back.relations.strong, p.relations.strong);
    assert_eq!(back.relations.weak, p.relations.weak);
    assert_eq!(back.baseline_bic, p.baseline_bic);
    assert_eq!(
        score_drift(&back, &s.field, 10.0).unwrap(),
        score_drift(&p, &s.field, 10.0).unwrap()
    );
}

#[test]
fn profile_load_errors() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.json");
    std::fs::write(&path, "{\"format_version\": 2, \"relations\": []}").unwrap();
    assert!(matches!(
        load_profile(&path),
        Err(reldrift::Error::VersionMismatch { found: 2, .. })
    ));
    std::fs::write(&path, "{\"format_version\": 1, \"relat").unwrap();
    assert!(matches!(load_profile(&path), Err(reldrift::Error::CorruptProfile(_))));
    assert!(matches!(
        load_profile(&dir.path().join("missing.json")),
        Err(reldrift::Error::FileNotFound(_))
    ));
}
