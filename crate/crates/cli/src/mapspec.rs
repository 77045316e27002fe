//! JSON map-description format.
//!
//! ```json
//! {
//!   "name": "my_map",
//!   "dim_source": 4,
//!   "dim_target": 2,
//!   "components": ["sqrt(x1^2 + x2^2)", "x3"],
//!   "metric_source": "euclidean",
//!   "metric_target": "euclidean",
//!   "J": "canonical",
//!   "params": {"alpha": 0.523598775598},
//!   "box": {"min": [0.6, -0.4, -1, -1], "max": [1.6, 0.4, 1, 1]},
//!   "exclude": "x1^2 + x2^2 - 0.25"
//! }
//! ```
//!
//! Metrics and `J` are either the literal `"euclidean"` / `"canonical"` or a
//! square matrix of expression strings. Points where the optional `exclude`
//! expression is not positive are rejected from sampling, so the box must
//! clear the excluded region with margin.

use anyhow::{bail, Context, Result};
use semislant_core::expr::{Expr, ParamSet};
use semislant_core::geometry::{canonical_j, AlmostComplex, ExprMatrix, MetricField};
use semislant_core::map::{MapSpec, SampleBox};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MapSpecFile {
    pub name: String,
    pub dim_source: usize,
    pub dim_target: usize,
    pub components: Vec<String>,
    pub metric_source: MatrixOrTag,
    pub metric_target: MatrixOrTag,
    #[serde(rename = "J")]
    pub j: MatrixOrTag,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(rename = "box")]
    pub sample_box: BoxSpec,
    #[serde(default)]
    pub exclude: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixOrTag {
    Tag(String),
    Matrix(Vec<Vec<String>>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoxSpec {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

fn parse_square(
    what: &str,
    rows: &[Vec<String>],
    n: usize,
    vars: usize,
) -> Result<ExprMatrix> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        bail!("{what}: expected a {n}x{n} matrix of expressions");
    }
    let mut entries = Vec::with_capacity(n * n);
    for (i, row) in rows.iter().enumerate() {
        for (j, cell) in row.iter().enumerate() {
            let e = Expr::parse(cell, vars)
                .with_context(|| format!("{what}[{i}][{j}] = `{cell}`"))?;
            entries.push(e);
        }
    }
    Ok(ExprMatrix::new(n, entries, vars))
}

impl MapSpecFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).context("map description is not valid JSON for the schema")
    }

    pub fn build(&self) -> Result<MapSpec> {
        let m = self.dim_source;
        let n = self.dim_target;
        let components = self
            .components
            .iter()
            .enumerate()
            .map(|(i, src)| {
                Expr::parse(src, m).with_context(|| format!("components[{i}] = `{src}`"))
            })
            .collect::<Result<Vec<_>>>()?;
        let metric_source = match &self.metric_source {
            MatrixOrTag::Tag(t) if t == "euclidean" => MetricField::Euclidean(m),
            MatrixOrTag::Tag(t) => bail!("metric_source: unknown tag `{t}` (expected \"euclidean\" or a matrix)"),
            MatrixOrTag::Matrix(rows) => {
                MetricField::Matrix(parse_square("metric_source", rows, m, m)?)
            }
        };
        let metric_target = match &self.metric_target {
            MatrixOrTag::Tag(t) if t == "euclidean" => MetricField::Euclidean(n),
            MatrixOrTag::Tag(t) => bail!("metric_target: unknown tag `{t}` (expected \"euclidean\" or a matrix)"),
            MatrixOrTag::Matrix(rows) => {
                MetricField::Matrix(parse_square("metric_target", rows, n, n)?)
            }
        };
        let j = match &self.j {
            MatrixOrTag::Tag(t) if t == "canonical" => {
                canonical_j(m).context("J: \"canonical\" needs an even source dimension")?
            }
            MatrixOrTag::Tag(t) => bail!("J: unknown tag `{t}` (expected \"canonical\" or a matrix)"),
            MatrixOrTag::Matrix(rows) => AlmostComplex::Matrix(parse_square("J", rows, m, m)?),
        };
        let mut params = ParamSet::new();
        for (k, v) in &self.params {
            params.set(k, *v);
        }
        let sample_box = SampleBox::new(self.sample_box.min.clone(), self.sample_box.max.clone())
            .context("box")?;
        let exclude = match &self.exclude {
            None => None,
            Some(src) => Some(Expr::parse(src, m).with_context(|| format!("exclude = `{src}`"))?),
        };
        MapSpec::new(
            &self.name,
            m,
            n,
            components,
            metric_source,
            metric_target,
            j,
            params,
            sample_box,
            exclude,
        )
        .context("map description rejected")
    }
}

/// Reads a map description from a JSON file.
pub fn load_mapspec(path: &std::path::Path) -> Result<MapSpec> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read `{}`", path.display()))?;
    let file = MapSpecFile::from_json(&text)?;
    file.build()
}

#[cfg(test)]
mod tests {
    use super::*;

    const POLAR: &str = r#"{
        "name": "polar_file",
        "dim_source": 4,
        "dim_target": 2,
        "components": ["sqrt(x1^2 + x2^2)", "x3"],
        "metric_source": "euclidean",
        "metric_target": "euclidean",
        "J": "canonical",
        "box": {"min": [0.6, -0.4, -1.0, -1.0], "max": [1.6, 0.4, 1.0, 1.0]},
        "exclude": "x1^2 + x2^2 - 0.25"
    }"#;

    #[test]
    fn parses_and_builds_a_file_spec() {
        let file = MapSpecFile::from_json(POLAR).unwrap();
        let spec = file.build().unwrap();
        assert_eq!(spec.dim_source, 4);
        assert_eq!(spec.name, "polar_file");
        assert!(spec.exclude.is_some());
    }

    #[test]
    fn warped_metric_matrix_parses() {
        let text = r#"{
            "name": "warped_file",
            "dim_source": 2,
            "dim_target": 1,
            "components": ["x1"],
            "metric_source": [["1", "0"], ["0", "exp(2*x1)"]],
            "metric_target": "euclidean",
            "J": "canonical",
            "box": {"min": [-1.0, -1.0], "max": [1.0, 1.0]}
        }"#;
        let spec = MapSpecFile::from_json(text).unwrap().build().unwrap();
        assert!(!spec.metric_source.is_euclidean());
    }

    #[test]
    fn rejects_bad_matrix_shape() {
        let text = r#"{
            "name": "bad",
            "dim_source": 2,
            "dim_target": 1,
            "components": ["x1"],
            "metric_source": [["1", "0"]],
            "metric_target": "euclidean",
            "J": "canonical",
            "box": {"min": [-1.0, -1.0], "max": [1.0, 1.0]}
        }"#;
        let err = MapSpecFile::from_json(text).unwrap().build().unwrap_err();
        assert!(format!("{err:#}").contains("2x2"));
    }

    #[test]
    fn rejects_unbound_parameters() {
        let text = r#"{
            "name": "bad",
            "dim_source": 2,
            "dim_target": 1,
            "components": ["alpha*x1"],
            "metric_source": "euclidean",
            "metric_target": "euclidean",
            "J": "canonical",
            "box": {"min": [-1.0, -1.0], "max": [1.0, 1.0]}
        }"#;
        let err = MapSpecFile::from_json(text).unwrap().build().unwrap_err();
        assert!(format!("{err:#}").contains("alpha"));
    }
}
