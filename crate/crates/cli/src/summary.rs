use std::fmt::Write;

use reldrift::{BaselineProfile, DriftReport, SweepResult};

pub fn relations(profile: &BaselineProfile) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:<16} {:<7} {:>8}  features", "target", "kind", "r2");
    for (rel, strong) in profile.relations.iter() {
        let _ = writeln!(
            s,
            "{:<16} {:<7} {:>8.4}  {}",
            rel.target,
            if strong { "strong" } else { "weak" },
            rel.fit.r2,
            rel.features.join(",")
        );
    }
    for sk in &profile.relations.skipped {
        let _ = writeln!(s, "{:<16} skipped  {}", sk.target, sk.reason);
    }
    let _ = writeln!(
        s,
        "{} strong, {} weak relations",
        profile.relations.strong.len(),
        profile.relations.weak.len()
    );
    s
}

pub fn report(report: &DriftReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<16} {:<7} {:>12} {:<10} decision",
        "target", "kind", "2lnBF", "grade"
    );
    for f in &report.findings {
        let _ = writeln!(
            s,
            "{:<16} {:<7} {:>12.3} {:<10} {:?}",
            f.target,
            if f.strong { "strong" } else { "weak" },
            f.two_ln_bf,
            format!("{:?}", f.grade),
            f.decision
        );
    }
    for t in &report.skipped {
        let _ = writeln!(s, "{t:<16} skipped (missing column)");
    }
    s
}

pub fn sweep(result: &SweepResult) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:<16} spearman(param, median 2lnBF)", "target");
    for (target, rho) in result.monotonicity() {
        match rho {
            Some(r) => {
                let _ = writeln!(s, "{target:<16} {r:.3}");
            }
            None => {
                let _ = writeln!(s, "{target:<16} n/a");
            }
        }
    }
    s
}
