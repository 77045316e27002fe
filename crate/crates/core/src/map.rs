//! Candidate map representation, its differential, and the pointwise
//! splittings `TM = ker F_* ⊕ (ker F_*)^⊥` and
//! `F^{-1}TN = range F_* ⊕ (range F_*)^⊥`.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::expr::{EvalError, Expr, ParamSet};
use crate::geometry::{AlmostComplex, GeomError, MetricField};
use crate::linalg::{self, OrthoFrame};
use crate::report::{statements, CheckReport, ResidualRow, Tolerances, Witness};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MapError {
    #[error("invalid map description: {0}")]
    Spec(String),
    #[error("evaluation failed: {0}")]
    Eval(#[from] EvalError),
    #[error("geometry failure: {0}")]
    Geometry(#[from] GeomError),
    #[error("rank is ambiguous at the point: singular value {value} sits inside the band [{lo}, {hi}]")]
    AmbiguousRank { value: f64, lo: f64, hi: f64 },
}

/// Axis-aligned sampling box, optionally minus a declared excluded region.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBox {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl SampleBox {
    pub fn new(min: Vec<f64>, max: Vec<f64>) -> Result<Self, MapError> {
        if min.len() != max.len() {
            return Err(MapError::Spec(
                "box min and max have different lengths".to_string(),
            ));
        }
        if min.iter().zip(&max).any(|(a, b)| a >= b) {
            return Err(MapError::Spec(
                "box min must be strictly below max in every coordinate".to_string(),
            ));
        }
        Ok(SampleBox { min, max })
    }

    pub fn cube(dim: usize, lo: f64, hi: f64) -> Self {
        SampleBox {
            min: alloc::vec![lo; dim],
            max: alloc::vec![hi; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.min.len()
    }

    pub fn contains_with_margin(&self, p: &[f64], margin: f64) -> bool {
        p.len() == self.dim()
            && p.iter()
                .zip(self.min.iter().zip(&self.max))
                .all(|(&c, (&lo, &hi))| c >= lo + margin && c <= hi - margin)
    }

    /// Maps a unit-cube sample into the box, inset 5% from every face so
    /// finite-difference stencils stay inside.
    pub fn embed(&self, unit: &[f64]) -> Vec<f64> {
        unit.iter()
            .zip(self.min.iter().zip(&self.max))
            .map(|(&u, (&lo, &hi))| lo + (hi - lo) * (0.05 + 0.9 * u))
            .collect()
    }
}

/// Declarative description of a candidate Riemannian map.
#[derive(Debug, Clone)]
pub struct MapSpec {
    pub name: String,
    pub dim_source: usize,
    pub dim_target: usize,
    pub components: Vec<Expr>,
    /// Symbolic Jacobian, row-major `n x m`, differentiated once at build.
    jacobian_exprs: Vec<Expr>,
    pub metric_source: MetricField,
    pub metric_target: MetricField,
    pub j_source: AlmostComplex,
    pub params: ParamSet,
    pub sample_box: SampleBox,
    /// Points where this expression is `<= 0` are excluded from sampling.
    pub exclude: Option<Expr>,
}

impl MapSpec {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: &str,
        dim_source: usize,
        dim_target: usize,
        components: Vec<Expr>,
        metric_source: MetricField,
        metric_target: MetricField,
        j_source: AlmostComplex,
        params: ParamSet,
        sample_box: SampleBox,
        exclude: Option<Expr>,
    ) -> Result<Self, MapError> {
        if components.len() != dim_target {
            return Err(MapError::Spec(format!(
                "expected {dim_target} components, got {}",
                components.len()
            )));
        }
        if metric_source.dim() != dim_source {
            return Err(MapError::Spec("source metric dimension mismatch".into()));
        }
        if metric_target.dim() != dim_target {
            return Err(MapError::Spec("target metric dimension mismatch".into()));
        }
        if j_source.dim() != dim_source {
            return Err(MapError::Spec(
                "almost complex structure dimension mismatch".into(),
            ));
        }
        if sample_box.dim() != dim_source {
            return Err(MapError::Spec("sampling box dimension mismatch".into()));
        }
        for c in &components {
            if let Some(&v) = c.free_vars().iter().next_back() {
                if v >= dim_source {
                    return Err(MapError::Spec(format!(
                        "component uses x{} beyond the source dimension {dim_source}",
                        v + 1
                    )));
                }
            }
            for p in c.free_params() {
                if params.get(&p).is_none() {
                    return Err(MapError::Spec(format!("parameter `{p}` is not bound")));
                }
            }
        }
        let mut jacobian_exprs = Vec::with_capacity(dim_target * dim_source);
        for comp in &components {
            for var in 0..dim_source {
                jacobian_exprs.push(comp.diff(var));
            }
        }
        Ok(MapSpec {
            name: name.to_string(),
            dim_source,
            dim_target,
            components,
            jacobian_exprs,
            metric_source,
            metric_target,
            j_source,
            params,
            sample_box,
            exclude,
        })
    }

    /// `F(p)` in target coordinates.
    pub fn value(&self, p: &[f64]) -> Result<DVector<f64>, MapError> {
        let mut out = DVector::zeros(self.dim_target);
        for (a, comp) in self.components.iter().enumerate() {
            out[a] = comp.eval(p, &self.params)?;
        }
        Ok(out)
    }

    /// Differential at `p`: entry `(a, i) = ∂F_a/∂x_i`, symbolic then
    /// evaluated.
    pub fn jacobian(&self, p: &[f64]) -> Result<DMatrix<f64>, MapError> {
        let mut out = DMatrix::zeros(self.dim_target, self.dim_source);
        for a in 0..self.dim_target {
            for i in 0..self.dim_source {
                out[(a, i)] = self.jacobian_exprs[a * self.dim_source + i].eval(p, &self.params)?;
            }
        }
        Ok(out)
    }

    /// Positive clearance from the excluded region (infinite when no region
    /// is declared).
    pub fn clearance(&self, p: &[f64]) -> Result<f64, MapError> {
        match &self.exclude {
            None => Ok(f64::INFINITY),
            Some(e) => Ok(e.eval(p, &self.params)?),
        }
    }
}

/// Orthonormal basis of a subspace, stored both in coordinates and in the
/// metric-orthonormal (hat) frame.
#[derive(Debug, Clone)]
pub struct Basis {
    /// Columns are coordinate representations.
    pub coord: DMatrix<f64>,
    /// Columns are hat-frame representations (Euclidean-orthonormal).
    pub hat: DMatrix<f64>,
}

impl Basis {
    pub fn dim(&self) -> usize {
        self.hat.ncols()
    }

    fn from_hat(hat: DMatrix<f64>, frame: &OrthoFrame) -> Basis {
        Basis {
            coord: &frame.from_hat * &hat,
            hat,
        }
    }
}

/// Pointwise splitting of the source and pullback tangent spaces.
#[derive(Debug, Clone)]
pub struct PointSplit {
    pub point: Vec<f64>,
    pub rank: usize,
    pub vertical: Basis,
    pub horizontal: Basis,
    pub range: Basis,
    pub corange: Basis,
    pub singular_values: Vec<f64>,
    pub source_frame: OrthoFrame,
    pub target_frame: OrthoFrame,
    /// Differential in hat frames (`n x m`).
    pub jac_hat: DMatrix<f64>,
    pub flags: Vec<String>,
}

impl PointSplit {
    /// `g_M`-orthogonal projector onto the vertical space, in coordinates.
    pub fn vertical_projector(&self) -> DMatrix<f64> {
        coord_projector(&self.vertical, &self.source_frame)
    }

    pub fn horizontal_projector(&self) -> DMatrix<f64> {
        coord_projector(&self.horizontal, &self.source_frame)
    }

    /// `g_N`-orthogonal projector onto `range F_*`, in target coordinates.
    pub fn range_projector(&self) -> DMatrix<f64> {
        coord_projector(&self.range, &self.target_frame)
    }

    pub fn corange_projector(&self) -> DMatrix<f64> {
        coord_projector(&self.corange, &self.target_frame)
    }
}

fn coord_projector(basis: &Basis, frame: &OrthoFrame) -> DMatrix<f64> {
    // from_hat · (B̂ B̂ᵀ) · to_hat is the metric-orthogonal projector
    // expressed on coordinate components.
    &frame.from_hat * linalg::projector(&basis.hat) * &frame.to_hat
}

/// Splits the tangent spaces at `p` by a singular value decomposition of the
/// differential expressed in metric-orthonormal frames.
///
/// `rank_tol` is relative to the largest singular value. A singular value
/// within a factor of ten of the cutoff (on either side) makes the rank
/// decision ambiguous; the split is still produced but carries a flag, and
/// the strict variant [`point_split_strict`] turns it into an error.
pub fn point_split(spec: &MapSpec, p: &[f64], rank_tol: f64) -> Result<PointSplit, MapError> {
    let m = spec.dim_source;
    let n = spec.dim_target;
    let source_frame = spec.metric_source.frame(p, &spec.params)?;
    let fp = spec.value(p)?;
    let fp_slice: Vec<f64> = fp.iter().cloned().collect();
    let target_frame = spec.metric_target.frame(&fp_slice, &spec.params)?;
    let jac = spec.jacobian(p)?;
    let jac_hat = &target_frame.to_hat * &jac * &source_frame.from_hat;

    let svd = linalg::sorted_svd(&jac_hat);
    let smax = svd.singular_values.first().cloned().unwrap_or(0.0);
    let cutoff = rank_tol * smax;
    let rank = if smax == 0.0 {
        0
    } else {
        svd.singular_values.iter().take_while(|&&s| s >= cutoff).count()
    };

    let mut flags = Vec::new();
    if smax > 0.0 {
        for &s in &svd.singular_values {
            if s >= cutoff / 10.0 && s <= cutoff * 10.0 {
                flags.push(format!(
                    "ambiguous rank: singular value {s:.3e} within [{:.3e}, {:.3e}]",
                    cutoff / 10.0,
                    cutoff * 10.0
                ));
            }
        }
    }

    // full factors: v is m x m, u is n x n
    let horizontal_hat = svd.v.columns(0, rank).into_owned();
    let kernel_cols = svd.v.columns(rank, m - rank).into_owned();
    let range_hat = svd.u.columns(0, rank).into_owned();
    let corange_cols = svd.u.columns(rank, n - rank).into_owned();

    Ok(PointSplit {
        point: p.to_vec(),
        rank,
        vertical: Basis::from_hat(kernel_cols, &source_frame),
        horizontal: Basis::from_hat(horizontal_hat, &source_frame),
        range: Basis::from_hat(range_hat, &target_frame),
        corange: Basis::from_hat(corange_cols, &target_frame),
        singular_values: svd.singular_values,
        source_frame,
        target_frame,
        jac_hat,
        flags,
    })
}

/// Like [`point_split`] but promotes rank ambiguity to an error.
pub fn point_split_strict(spec: &MapSpec, p: &[f64], rank_tol: f64) -> Result<PointSplit, MapError> {
    let split = point_split(spec, p, rank_tol)?;
    if let Some(flag) = split.flags.first() {
        let smax = split.singular_values.first().cloned().unwrap_or(0.0);
        let cutoff = rank_tol * smax;
        let value = split
            .singular_values
            .iter()
            .cloned()
            .find(|&s| s >= cutoff / 10.0 && s <= cutoff * 10.0)
            .unwrap_or(f64::NAN);
        let _ = flag;
        return Err(MapError::AmbiguousRank {
            value,
            lo: cutoff / 10.0,
            hi: cutoff * 10.0,
        });
    }
    Ok(split)
}

/// At each sampled point, measures how far the differential is from a
/// linear isometry on the horizontal space, and whether the rank stays
/// constant across the samples.
pub fn riemannian_map_check(
    spec: &MapSpec,
    points: &[Vec<f64>],
    tol: &Tolerances,
) -> Result<CheckReport, MapError> {
    let mut report = CheckReport::new("riemannian", statements::RIEMANNIAN_MAP);
    let mut gram_res = Vec::with_capacity(points.len());
    let mut kernel_push = Vec::with_capacity(points.len());
    let mut ranks = Vec::with_capacity(points.len());
    let mut worst: Option<(usize, f64)> = None;
    for (idx, p) in points.iter().enumerate() {
        let split = point_split(spec, p, tol.rank_rel)?;
        for f in &split.flags {
            report.annotations.push(format!("sample {idx}: {f}"));
        }
        // Gram matrix of pushed horizontal frame vs identity, measured with
        // g_N in the hat frame of the target.
        let pushed = &split.jac_hat * &split.horizontal.hat;
        let gram = pushed.transpose() * &pushed;
        let resid = if split.rank == 0 {
            0.0
        } else {
            linalg::max_abs(&(gram - DMatrix::identity(split.rank, split.rank)))
        };
        gram_res.push(resid);
        // the differential must annihilate the kernel basis
        let pushed_kernel = &split.jac_hat * &split.vertical.hat;
        kernel_push.push(linalg::max_abs(&pushed_kernel));
        ranks.push(split.rank);
        if worst.map(|(_, w)| resid > w).unwrap_or(true) {
            worst = Some((idx, resid));
        }
    }
    let rank0 = ranks.first().cloned().unwrap_or(0);
    let rank_constant = ranks.iter().all(|&r| r == rank0);
    report.set_value("rank", rank0 as f64);
    if !rank_constant {
        report
            .annotations
            .push("rank is not constant across the sample set".to_string());
    }
    report.push_row(ResidualRow::new(
        "Gram(F_* h_i, F_* h_j) - id",
        gram_res,
        tol.first_order.min(1e-6),
    ));
    report.push_row(ResidualRow::new(
        "|F_* (kernel basis)|",
        kernel_push,
        tol.rank_rel * 10.0,
    ));
    report.push_row(ResidualRow::new(
        "rank jumps",
        ranks.iter().map(|&r| (r as f64 - rank0 as f64).abs()).collect(),
        0.0,
    ));
    if let Some((idx, val)) = worst {
        report.witness = Some(Witness {
            sample: idx,
            point: points[idx].clone(),
            value: val,
            label: "largest isometry residual".to_string(),
        });
    }
    report.settle();
    Ok(report)
}

/// Verifies `‖F_*‖² = rank F` (twice the energy density) at every sample.
pub fn eikonal_check(
    spec: &MapSpec,
    points: &[Vec<f64>],
    tol: &Tolerances,
) -> Result<CheckReport, MapError> {
    let mut report = CheckReport::new("eikonal", statements::EIKONAL);
    let mut residuals = Vec::with_capacity(points.len());
    let mut norm_sq_first = None;
    for p in points {
        let split = point_split(spec, p, tol.rank_rel)?;
        let norm_sq: f64 = split.singular_values.iter().map(|s| s * s).sum();
        if norm_sq_first.is_none() {
            norm_sq_first = Some(norm_sq);
            report.set_value("hs_norm_squared", norm_sq);
            report.set_value("energy_density_doubled", norm_sq);
            report.set_value("rank", split.rank as f64);
        }
        residuals.push((norm_sq - split.rank as f64).abs());
    }
    report.push_row(ResidualRow::new(
        "| ||F_*||^2 - rank |",
        residuals,
        tol.angle.max(1e-9),
    ));
    report.settle();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::geometry::canonical_j;
    use alloc::vec;
    use approx::assert_abs_diff_eq;
    use core::f64::consts::FRAC_PI_6;

    fn euclid_spec(name: &str, m: usize, n: usize, comps: &[&str]) -> MapSpec {
        let components = comps
            .iter()
            .map(|c| Expr::parse(c, m).unwrap())
            .collect();
        MapSpec::new(
            name,
            m,
            n,
            components,
            MetricField::Euclidean(m),
            MetricField::Euclidean(n),
            canonical_j(m).unwrap(),
            ParamSet::new(),
            SampleBox::cube(m, -1.0, 1.0),
            None,
        )
        .unwrap()
    }

    #[test]
    fn jacobian_entry_of_linear_catalog_map() {
        let spec = catalog::builtin("ex5_7", &ParamSet::new()).unwrap();
        let jac = spec.jacobian(&[0.0; 8]).unwrap();
        // entry (3,5) in 1-based labelling
        assert_abs_diff_eq!(
            jac[(2, 4)],
            FRAC_PI_6.cos() / 2f64.sqrt(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn zero_map_has_rank_zero() {
        let spec = euclid_spec("zero", 2, 2, &["0", "0"]);
        let jac = spec.jacobian(&[0.3, 0.4]).unwrap();
        assert_eq!(jac, DMatrix::zeros(2, 2));
        let split = point_split(&spec, &[0.3, 0.4], 1e-8).unwrap();
        assert_eq!(split.rank, 0);
        assert_eq!(split.vertical.dim(), 2);
        assert_eq!(split.corange.dim(), 2);
    }

    #[test]
    fn identity_map_split() {
        let spec = euclid_spec("identity", 2, 2, &["x1", "x2"]);
        let split = point_split(&spec, &[0.1, 0.9], 1e-8).unwrap();
        assert_eq!(split.rank, 2);
        assert_eq!(split.vertical.dim(), 0);
        assert_eq!(split.range.dim(), 2);
    }

    #[test]
    fn linear_catalog_map_split_dimensions() {
        let spec = catalog::builtin("ex5_7", &ParamSet::new()).unwrap();
        let split = point_split(&spec, &[0.2; 8], 1e-8).unwrap();
        assert_eq!(split.rank, 4);
        assert_eq!(split.vertical.dim(), 4);
        assert_eq!(split.horizontal.dim(), 4);
        assert_eq!(split.range.dim(), 4);
        assert_eq!(split.corange.dim(), 1);
        // orthonormality of every basis in the hat frame
        for basis in [&split.vertical, &split.horizontal, &split.range, &split.corange] {
            if basis.dim() > 0 {
                let gram = basis.hat.transpose() * &basis.hat;
                assert_abs_diff_eq!(
                    linalg::max_abs(&(gram - DMatrix::identity(basis.dim(), basis.dim()))),
                    0.0,
                    epsilon = 1e-10
                );
            }
        }
    }

    #[test]
    fn constant_components_lower_rank_without_error() {
        let spec = catalog::builtin("ex5_8", &ParamSet::new()).unwrap();
        let split = point_split(&spec, &[0.1; 6], 1e-8).unwrap();
        assert_eq!(split.rank, 2);
        let spec10 = catalog::builtin("ex5_10", &ParamSet::new()).unwrap();
        let split10 = point_split(&spec10, &[0.1; 10], 1e-8).unwrap();
        assert_eq!(split10.rank, 4);
    }

    #[test]
    fn kernel_dimension_of_tall_example() {
        let spec = catalog::builtin("ex5_9", &ParamSet::new()).unwrap();
        let split = point_split(&spec, &[0.0; 10], 1e-8).unwrap();
        assert_eq!(split.rank, 5);
        assert_eq!(split.vertical.dim(), 5);
    }

    #[test]
    fn riemannian_check_passes_on_linear_catalog_map() {
        let spec = catalog::builtin("ex5_7", &ParamSet::new()).unwrap();
        let points = vec![vec![0.0; 8], vec![0.3; 8], vec![-0.2; 8]];
        let rep = riemannian_map_check(&spec, &points, &Tolerances::default()).unwrap();
        assert_eq!(rep.verdict, crate::report::Verdict::Pass);
        assert_eq!(rep.values["rank"], 4.0);
    }

    #[test]
    fn scaled_map_fails_with_stretch_residual() {
        let spec = euclid_spec("scaled", 2, 1, &["2*x1"]);
        let points = vec![vec![0.2, 0.4]];
        let rep = riemannian_map_check(&spec, &points, &Tolerances::default()).unwrap();
        assert_eq!(rep.verdict, crate::report::Verdict::Fail);
        assert_abs_diff_eq!(rep.rows[0].max_residual, 3.0, epsilon = 1e-12);
    }

    #[test]
    fn polar_map_is_riemannian_off_the_axis() {
        let spec = catalog::builtin("polar4", &ParamSet::new()).unwrap();
        let points = vec![vec![1.0, 0.0, 0.0, 0.0], vec![0.8, 0.3, 0.5, -0.5]];
        let rep = riemannian_map_check(&spec, &points, &Tolerances::default()).unwrap();
        assert_eq!(rep.verdict, crate::report::Verdict::Pass);
        assert_eq!(rep.values["rank"], 2.0);
    }

    #[test]
    fn eikonal_equality_on_catalog_maps() {
        for (name, expected) in [("ex5_7", 4.0), ("ex5_10", 4.0), ("ex5_9", 5.0)] {
            let spec = catalog::builtin(name, &ParamSet::new()).unwrap();
            let points = vec![vec![0.1; spec.dim_source], vec![-0.3; spec.dim_source]];
            let rep = eikonal_check(&spec, &points, &Tolerances::default()).unwrap();
            assert_eq!(rep.verdict, crate::report::Verdict::Pass, "{name}");
            assert_abs_diff_eq!(rep.values["hs_norm_squared"], expected, epsilon = 1e-9);
        }
        let zero = euclid_spec("zero", 2, 1, &["0"]);
        let rep = eikonal_check(&zero, &[vec![0.5, 0.5]], &Tolerances::default()).unwrap();
        assert_abs_diff_eq!(rep.values["hs_norm_squared"], 0.0);
    }

    #[test]
    fn near_cutoff_singular_value_is_flagged_not_silent() {
        // second component contributes a singular value of 1e-8, inside the
        // ambiguity band relative to the leading value 1
        let spec = euclid_spec("ambiguous", 2, 2, &["x1", "x2/100000000"]);
        let split = point_split(&spec, &[0.3, 0.4], 1e-8).unwrap();
        assert!(!split.flags.is_empty(), "expected an ambiguity flag");
        assert!(matches!(
            point_split_strict(&spec, &[0.3, 0.4], 1e-8),
            Err(MapError::AmbiguousRank { .. })
        ));
        // far from the band, both variants agree quietly
        let clean = point_split_strict(&spec, &[0.3, 0.4], 1e-3).unwrap();
        assert_eq!(clean.rank, 1);
    }

    #[test]
    fn warped_metric_split_is_isometric() {
        let spec = catalog::builtin("warped_slant", &ParamSet::new()).unwrap();
        let points = vec![vec![0.0; 6], vec![0.2, -0.1, 0.3, 0.1, -0.2, 0.25]];
        let rep = riemannian_map_check(&spec, &points, &Tolerances::default()).unwrap();
        assert_eq!(rep.verdict, crate::report::Verdict::Pass);
        let rep = eikonal_check(&spec, &points, &Tolerances::default()).unwrap();
        assert_abs_diff_eq!(rep.values["hs_norm_squared"], 2.0, epsilon = 1e-12);
    }
}
