//! Plain-text rendering of analysis reports.

use semislant_core::analyze::AnalysisReport;
use semislant_core::report::CheckReport;
use std::fmt::Write;

fn yesno(v: Option<bool>) -> &'static str {
    match v {
        Some(true) => "yes",
        Some(false) => "no",
        None => "n/a",
    }
}

pub fn render_check(check: &CheckReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<14} {:<8} max residual {:10.3e}",
        check.name,
        check.verdict.symbol(),
        check.max_residual()
    );
    let _ = writeln!(out, "  verifies: {}", check.statement);
    for row in &check.rows {
        let _ = writeln!(
            out,
            "  {:<58} {:10.3e}  tol {:8.1e}  {}",
            row.label,
            row.max_residual,
            row.tolerance,
            if row.pass { "ok" } else { "EXCEEDED" }
        );
    }
    for a in &check.agreements {
        let _ = writeln!(
            out,
            "  {:<58} condition {} / oracle {} -> {}",
            a.label,
            if a.condition_pass { "pass" } else { "fail" },
            if a.oracle_pass { "pass" } else { "fail" },
            if a.agree { "agree" } else { "DISAGREE" }
        );
    }
    for (k, v) in &check.values {
        let _ = writeln!(out, "  {k} = {v}");
    }
    if let Some(w) = &check.witness {
        let _ = writeln!(
            out,
            "  witness: sample {} at {:?} ({}, value {:.3e})",
            w.sample, w.point, w.label, w.value
        );
    }
    for a in &check.annotations {
        let _ = writeln!(out, "  note: {a}");
    }
    out
}

pub fn render_report(report: &AnalysisReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "analysis of `{}` ({} -> {})",
        report.spec_name, report.dim_source, report.dim_target
    );
    if !report.params.0.is_empty() {
        let params: Vec<String> = report
            .params
            .0
            .iter()
            .map(|(k, v)| format!("{k} = {v}"))
            .collect();
        let _ = writeln!(out, "parameters: {}", params.join(", "));
    }
    let _ = writeln!(
        out,
        "plan: {} points, {} vectors per subspace, seed {}",
        report.plan.points, report.plan.vectors_per_subspace, report.plan.seed
    );
    let _ = writeln!(out);
    let _ = writeln!(out, "{:<16} {:<8} {:>13}", "check", "verdict", "max residual");
    for check in &report.checks {
        let _ = writeln!(
            out,
            "{:<16} {:<8} {:>13.3e}",
            check.name,
            check.verdict.symbol(),
            check.max_residual()
        );
    }
    let s = &report.summary;
    let _ = writeln!(out);
    let _ = writeln!(out, "summary:");
    let _ = writeln!(
        out,
        "  riemannian map     {} (rank {})",
        if s.riemannian_map { "yes" } else { "no" },
        s.rank
    );
    let _ = writeln!(
        out,
        "  hermitian / kahler {} / {}",
        if s.hermitian { "yes" } else { "no" },
        if s.kahler { "yes" } else { "no" }
    );
    let dims = match (s.dim_d1, s.dim_d2) {
        (Some(a), Some(b)) => format!("dim D1 = {a}, dim D2 = {b}"),
        _ => "dims n/a".to_string(),
    };
    let theta = match s.theta {
        Some(t) => format!("theta = {t:.12}"),
        None => "theta n/a".to_string(),
    };
    let _ = writeln!(
        out,
        "  semi-slant         {} ({dims}, {theta})",
        yesno(s.semi_slant)
    );
    let _ = writeln!(out, "  eikonal equality   {}", yesno(s.eikonal));
    let _ = writeln!(out, "  fiber J-structure  {}", yesno(s.jhat_complex_structure));
    let _ = writeln!(out, "  harmonic           {}", yesno(s.harmonic));
    let _ = writeln!(out, "  totally geodesic   {}", yesno(s.totally_geodesic));
    let _ = writeln!(out, "  umbilical fibers   {}", yesno(s.umbilical));
    let _ = writeln!(
        out,
        "  D1 / D2 integrable {} / {}",
        yesno(s.d1_integrable),
        yesno(s.d2_integrable)
    );
    let _ = writeln!(
        out,
        "  local products     whole {} / fibers {}",
        yesno(s.product_whole),
        yesno(s.product_fibers)
    );
    if !s.annotations.is_empty() {
        let _ = writeln!(out, "annotations:");
        for a in &s.annotations {
            let _ = writeln!(out, "  - {a}");
        }
    }
    out
}
