//! Library side of the command-line tool: map description files, report
//! rendering, and the plumbing shared by the subcommands.

pub mod mapspec;
pub mod render;

use anyhow::{bail, Context, Result};
use semislant_core::analyze::{AnalyzeOptions, CHECK_NAMES};
use semislant_core::catalog;
use semislant_core::expr::ParamSet;
use semislant_core::map::MapSpec;
use semislant_core::report::{FdSteps, Tolerances};
use semislant_core::sample::SamplePlan;
use std::path::Path;

/// Resolves `<name|file>`: a known catalog name wins, anything else is read
/// as a JSON map description path.
pub fn resolve_spec(arg: &str, params: &ParamSet) -> Result<(MapSpec, bool)> {
    if catalog::entry(arg).is_ok() {
        let spec = catalog::builtin(arg, params)
            .with_context(|| format!("building catalog entry `{arg}`"))?;
        return Ok((spec, true));
    }
    let path = Path::new(arg);
    if !path.exists() {
        bail!(
            "`{arg}` is neither a catalog entry ({}) nor an existing file",
            catalog_names().join(", ")
        );
    }
    let mut spec = mapspec::load_mapspec(path)?;
    // command-line parameters override the file's bindings
    for (k, v) in params.0.iter() {
        spec.params.set(k, *v);
    }
    Ok((spec, false))
}

pub fn catalog_names() -> Vec<&'static str> {
    catalog::entries().iter().map(|e| e.name).collect()
}

pub fn check_names() -> &'static [&'static str] {
    CHECK_NAMES
}

/// Parses repeated `--param name=value` occurrences.
pub fn parse_params(pairs: &[String]) -> Result<ParamSet> {
    let mut out = ParamSet::new();
    for pair in pairs {
        let (k, v) = pair
            .split_once('=')
            .with_context(|| format!("`--param {pair}`: expected name=value"))?;
        let value: f64 = v
            .trim()
            .parse()
            .with_context(|| format!("`--param {pair}`: `{v}` is not a number"))?;
        out.set(k.trim(), value);
    }
    Ok(out)
}

/// Assembles analysis options from the common command-line flags.
pub fn build_options(
    samples: usize,
    seed: u64,
    tol: Option<f64>,
    fd_step: Option<f64>,
    richardson: bool,
) -> AnalyzeOptions {
    let plan = SamplePlan {
        points: samples,
        seed,
        ..SamplePlan::default()
    };
    let tolerances = match tol {
        Some(t) => Tolerances::scaled_to(t),
        None => Tolerances::default(),
    };
    let mut fd = match fd_step {
        Some(h) => FdSteps::with_first(h),
        None => FdSteps::default(),
    };
    fd.richardson = richardson;
    AnalyzeOptions {
        plan,
        tolerances,
        fd,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_parse_and_reject() {
        let p = parse_params(&["alpha=0.5".into(), "c = 2".into()]).unwrap();
        assert_eq!(p.get("alpha"), Some(0.5));
        assert_eq!(p.get("c"), Some(2.0));
        assert!(parse_params(&["alpha".into()]).is_err());
        assert!(parse_params(&["alpha=x".into()]).is_err());
    }

    #[test]
    fn resolve_prefers_catalog_names() {
        let (spec, builtin) = resolve_spec("radial2", &ParamSet::new()).unwrap();
        assert!(builtin);
        assert_eq!(spec.dim_source, 2);
        assert!(resolve_spec("no_such_entry_or_file", &ParamSet::new()).is_err());
    }

    #[test]
    fn tolerance_override_scales_profile() {
        let opts = build_options(10, 7, Some(1e-5), Some(1e-4), true);
        assert_eq!(opts.plan.points, 10);
        assert_eq!(opts.plan.seed, 7);
        assert!((opts.tolerances.first_order - 1e-5).abs() < 1e-18);
        assert!((opts.fd.first - 1e-4).abs() < 1e-18);
        assert!(opts.fd.richardson);
    }
}
