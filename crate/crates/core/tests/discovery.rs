mod common;

use common::{normal_equations, standard_errors, Lcg};
use reldrift::synthetic::planted_relation;
use reldrift::{discover_relations, embed, fit_ols, DataTable, DiscoveryParams};

fn noise_table(seed: u64, n: usize, m: usize) -> DataTable {
    let mut rng = Lcg::new(seed);
    DataTable::new(
        (0..m).map(|j| format!("n{j}")).collect(),
        (0..m).map(|_| (0..n).map(|_| rng.normal()).collect()).collect(),
    )
    .unwrap()
}

#[test]
fn planted_relation_is_recovered() {
    let t = planted_relation(2000, 17);
    let set = discover_relations(&t, DiscoveryParams::default()).unwrap();
    let rel = set.strong.iter().find(|r| r.target == "y").expect("y is strong");
    assert_eq!(rel.features, ["x1", "x2"]);

    let x = embed(&t, &rel.features, &rel.terms).unwrap();
    let y = t.column_by_name("y").unwrap();
    let se = standard_errors(&x, y, &normal_equations(&x, y));
    let truth = [3.0, 2.0, -1.0, 0.5, 0.0, 0.0];
    for ((b, s), t) in rel.fit.beta.iter().zip(&se).zip(truth) {
        assert!((b - t).abs() <= 3.0 * s, "beta {b} vs {t} (se {s})");
    }
}

#[test]
fn independent_noise_yields_no_strong_relations() {
    let empty = (0..100)
        .filter(|&seed| {
            let set = discover_relations(&noise_table(seed, 300, 5), DiscoveryParams::default())
                .unwrap();
            set.strong.is_empty()
        })
        .count();
    println!("noise tables with empty strong set: {empty}/100");
    assert!(empty >= 99);
}

#[test]
fn zero_threshold_accepts_everything() {
    let t = noise_table(5, 200, 4);
    let p = DiscoveryParams {
        r2_threshold: 0.0,
        ..Default::default()
    };
    let set = discover_relations(&t, p).unwrap();
    assert_eq!(set.strong.len(), 4);
    assert!(set.weak.is_empty());
}

#[test]
fn too_few_rows_is_rejected() {
    let t = noise_table(1, 6, 3);
    assert!(matches!(
        discover_relations(&t, DiscoveryParams::default()),
        Err(reldrift::Error::TableTooSmall { .. })
    ));
}

#[test]
fn constant_and_collinear_features_are_skipped() {
    let mut rng = Lcg::new(4);
    let a: Vec<f64> = (0..100).map(|_| rng.normal()).collect();
    let flag: Vec<f64> = (0..100).map(|i| (i % 2) as f64).collect();
    let b: Vec<f64> = a.iter().zip(&flag).map(|(x, f)| x + f + 0.1 * rng.normal()).collect();
    let t = DataTable::from_columns(vec![
        ("a", a),
        ("flag", flag),
        ("b", b),
        ("c", vec![1.0; 100]),
    ])
    .unwrap();
    let set = discover_relations(&t, DiscoveryParams::default()).unwrap();
    let skipped: Vec<&str> = set.skipped.iter().map(|s| s.target.as_str()).collect();
    assert!(skipped.contains(&"c"));
    // flag^2 == flag makes every embedding containing flag singular
    assert!(set
        .skipped
        .iter()
        .any(|s| s.target != "c" && s.reason.contains("rank deficient")));
    for (rel, _) in set.iter() {
        assert!(!rel.features.contains(&"c".to_string()));
        assert!(!rel.features.contains(&rel.target));
    }
}

#[test]
fn discovery_is_deterministic_and_refit_reproduces_beta() {
    let t = planted_relation(800, 2);
    let a = discover_relations(&t, DiscoveryParams::default()).unwrap();
    let b = discover_relations(&t, DiscoveryParams::default()).unwrap();
    assert_eq!(a, b);
    for (rel, _) in a.iter() {
        let x = embed(&t, &rel.features, &rel.terms).unwrap();
        let refit = fit_ols(&x, t.column_by_name(&rel.target).unwrap()).unwrap();
        for (p, q) in refit.beta.iter().zip(&rel.fit.beta) {
            assert!((p - q).abs() <= 1e-10 * q.abs().max(1.0));
        }
    }
}

#[test]
fn positive_rescaling_keeps_r2_and_partition() {
    let t = planted_relation(800, 9);
    let scales = [3.0, 0.25, 1.0, 7.5, 0.01, 12.0];
    let scaled = DataTable::new(
        t.names().to_vec(),
        t.columns()
            .iter()
            .zip(scales)
            .map(|(c, s)| c.iter().map(|v| v * s).collect())
            .collect(),
    )
    .unwrap();
    let a = discover_relations(&t, DiscoveryParams::default()).unwrap();
    let b = discover_relations(&scaled, DiscoveryParams::default()).unwrap();
    let targets = |s: &reldrift::RelationSet| -> (Vec<String>, Vec<String>) {
        (
            s.strong.iter().map(|r| r.target.clone()).collect(),
            s.weak.iter().map(|r| r.target.clone()).collect(),
        )
    };
    assert_eq!(targets(&a), targets(&b));
    for ((ra, _), (rb, _)) in a.iter().zip(b.iter()) {
        assert!((ra.fit.r2 - rb.fit.r2).abs() < 1e-9);
    }
}
