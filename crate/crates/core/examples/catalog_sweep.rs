//! Analyzes every catalog entry at default parameters and prints a one-line
//! summary with wall-clock timing.

use semislant_core::analyze::{analyze_builtin, AnalyzeOptions};
use semislant_core::catalog;
use semislant_core::expr::ParamSet;
use std::time::Instant;

fn main() {
    let opts = AnalyzeOptions::default();
    let start = Instant::now();
    for e in catalog::entries() {
        let t = Instant::now();
        let rep = analyze_builtin(e.name, &ParamSet::new(), &opts).unwrap();
        let s = &rep.summary;
        println!(
            "{:<14} {:>9.1?}  rank {}  D1 {:?}  D2 {:?}  theta {:?}  checks failed: {}",
            e.name,
            t.elapsed(),
            s.rank,
            s.dim_d1,
            s.dim_d2,
            s.theta,
            rep.checks.iter().filter(|c| c.verdict.is_fail()).count()
        );
    }
    println!("total: {:?}", start.elapsed());
}
