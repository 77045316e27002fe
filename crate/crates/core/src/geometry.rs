//! Metrics, Christoffel symbols, covariant differentiation, and almost
//! complex structures on coordinate boxes.
//!
//! Metric and structure entries are closed-form expressions, so their first
//! partial derivatives are symbolic; only derivatives of general vector
//! fields (projector frames and the like) fall back to central differences.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::expr::{EvalError, Expr, ParamSet};
use crate::linalg::{self, OrthoFrame};
use crate::report::{statements, CheckReport, FdSteps, ResidualRow, Tolerances};
use crate::sample::VectorSampler;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeomError {
    #[error("evaluation failed: {0}")]
    Eval(#[from] EvalError),
    #[error("metric is singular or not positive definite at the point (smallest eigenvalue {0})")]
    DegenerateMetric(f64),
    #[error("almost complex structure requires an even dimension, got {0}")]
    OddDimension(usize),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("point too close to the domain boundary for step {0}")]
    NearBoundary(f64),
}

/// Square matrix of expressions with precomputed symbolic partials.
#[derive(Debug, Clone)]
pub struct ExprMatrix {
    pub n: usize,
    /// Row-major entries.
    entries: Vec<Expr>,
    /// `partials[l]` holds the row-major entry derivatives with respect to
    /// coordinate `l`.
    partials: Vec<Vec<Expr>>,
}

impl ExprMatrix {
    pub fn new(n: usize, entries: Vec<Expr>, vars: usize) -> Self {
        assert_eq!(entries.len(), n * n, "entry count must be n^2");
        let partials = (0..vars)
            .map(|l| entries.iter().map(|e| e.diff(l)).collect())
            .collect();
        ExprMatrix {
            n,
            entries,
            partials,
        }
    }

    pub fn eval(&self, point: &[f64], params: &ParamSet) -> Result<DMatrix<f64>, EvalError> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                m[(i, j)] = self.entries[i * self.n + j].eval(point, params)?;
            }
        }
        Ok(m)
    }

    /// `d/dx_l` of the matrix at the point, from the symbolic partials.
    pub fn eval_partial(
        &self,
        l: usize,
        point: &[f64],
        params: &ParamSet,
    ) -> Result<DMatrix<f64>, EvalError> {
        let mut m = DMatrix::zeros(self.n, self.n);
        if l >= self.partials.len() {
            return Ok(m);
        }
        for i in 0..self.n {
            for j in 0..self.n {
                m[(i, j)] = self.partials[l][i * self.n + j].eval(point, params)?;
            }
        }
        Ok(m)
    }

    pub fn entry(&self, i: usize, j: usize) -> &Expr {
        &self.entries[i * self.n + j]
    }
}

/// Riemannian metric on a coordinate patch: either the flat Euclidean metric
/// or a full expression matrix.
#[derive(Debug, Clone)]
pub enum MetricField {
    Euclidean(usize),
    Matrix(ExprMatrix),
}

impl MetricField {
    pub fn dim(&self) -> usize {
        match self {
            MetricField::Euclidean(n) => *n,
            MetricField::Matrix(m) => m.n,
        }
    }

    pub fn is_euclidean(&self) -> bool {
        matches!(self, MetricField::Euclidean(_))
    }

    pub fn eval(&self, point: &[f64], params: &ParamSet) -> Result<DMatrix<f64>, GeomError> {
        match self {
            MetricField::Euclidean(n) => Ok(DMatrix::identity(*n, *n)),
            MetricField::Matrix(m) => Ok(m.eval(point, params)?),
        }
    }

    /// Metric-orthonormal frame at a point; fails on non-SPD values.
    pub fn frame(&self, point: &[f64], params: &ParamSet) -> Result<OrthoFrame, GeomError> {
        match self {
            MetricField::Euclidean(n) => Ok(OrthoFrame::identity(*n)),
            MetricField::Matrix(_) => {
                let g = self.eval(point, params)?;
                let min_eig = linalg::min_symmetric_eigenvalue(&g);
                if min_eig <= 1e-10 {
                    return Err(GeomError::DegenerateMetric(min_eig));
                }
                OrthoFrame::from_metric(&g).map_err(|_| GeomError::DegenerateMetric(min_eig))
            }
        }
    }

    /// Inner product of coordinate vectors at a point.
    pub fn inner(
        &self,
        point: &[f64],
        params: &ParamSet,
        a: &DVector<f64>,
        b: &DVector<f64>,
    ) -> Result<f64, GeomError> {
        match self {
            MetricField::Euclidean(_) => Ok(a.dot(b)),
            MetricField::Matrix(_) => {
                let g = self.eval(point, params)?;
                Ok((a.transpose() * g * b)[(0, 0)])
            }
        }
    }
}

/// Connection coefficients `Γ^k_{ij}` of a metric at a point.
#[derive(Debug, Clone)]
pub struct Christoffel {
    pub n: usize,
    /// Indexed `[k][i][j]` flattened; symmetric in `(i, j)`.
    gamma: Vec<f64>,
}

impl Christoffel {
    pub fn zeros(n: usize) -> Self {
        Christoffel {
            n,
            gamma: alloc::vec![0.0; n * n * n],
        }
    }

    #[inline]
    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.gamma[(k * self.n + i) * self.n + j]
    }

    #[inline]
    fn set(&mut self, k: usize, i: usize, j: usize, v: f64) {
        self.gamma[(k * self.n + i) * self.n + j] = v;
    }

    /// Contraction `Γ(x, y)^k = Γ^k_{ij} x^i y^j`.
    pub fn contract(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.n);
        for k in 0..self.n {
            let mut acc = 0.0;
            for i in 0..self.n {
                let xi = x[i];
                if xi == 0.0 {
                    continue;
                }
                for j in 0..self.n {
                    acc += self.get(k, i, j) * xi * y[j];
                }
            }
            out[k] = acc;
        }
        out
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for k in 0..self.n {
            for i in 0..self.n {
                for j in 0..i {
                    worst = worst.max((self.get(k, i, j) - self.get(k, j, i)).abs());
                }
            }
        }
        worst
    }
}

/// `Γ^k_{ij} = 1/2 g^{kl} (∂_i g_{jl} + ∂_j g_{il} − ∂_l g_{ij})` with exact
/// symbolic metric derivatives.
pub fn christoffel(
    g: &MetricField,
    point: &[f64],
    params: &ParamSet,
) -> Result<Christoffel, GeomError> {
    let n = g.dim();
    match g {
        MetricField::Euclidean(_) => Ok(Christoffel::zeros(n)),
        MetricField::Matrix(m) => {
            let gval = m.eval(point, params)?;
            let min_eig = linalg::min_symmetric_eigenvalue(&gval);
            if min_eig <= 1e-10 {
                return Err(GeomError::DegenerateMetric(min_eig));
            }
            let ginv = gval
                .clone()
                .try_inverse()
                .ok_or(GeomError::DegenerateMetric(min_eig))?;
            let dg: Vec<DMatrix<f64>> = (0..n)
                .map(|l| m.eval_partial(l, point, params))
                .collect::<Result<_, _>>()?;
            let mut out = Christoffel::zeros(n);
            for k in 0..n {
                for i in 0..n {
                    for j in 0..=i {
                        let mut acc = 0.0;
                        for l in 0..n {
                            acc += ginv[(k, l)]
                                * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)]);
                        }
                        let v = 0.5 * acc;
                        out.set(k, i, j, v);
                        out.set(k, j, i, v);
                    }
                }
            }
            Ok(out)
        }
    }
}

/// Almost complex structure on the source patch.
#[derive(Debug, Clone)]
pub enum AlmostComplex {
    /// `J ∂_{2k-1} = ∂_{2k}`, `J ∂_{2k} = -∂_{2k-1}` in coordinate pairs.
    Canonical(usize),
    Matrix(ExprMatrix),
}

/// Builds the block-pair structure; the dimension must be even.
pub fn canonical_j(n: usize) -> Result<AlmostComplex, GeomError> {
    if !n.is_multiple_of(2) {
        return Err(GeomError::OddDimension(n));
    }
    Ok(AlmostComplex::Canonical(n))
}

impl AlmostComplex {
    pub fn dim(&self) -> usize {
        match self {
            AlmostComplex::Canonical(n) => *n,
            AlmostComplex::Matrix(m) => m.n,
        }
    }

    pub fn eval(&self, point: &[f64], params: &ParamSet) -> Result<DMatrix<f64>, GeomError> {
        match self {
            AlmostComplex::Canonical(n) => {
                let mut j = DMatrix::zeros(*n, *n);
                for k in 0..n / 2 {
                    j[(2 * k + 1, 2 * k)] = 1.0;
                    j[(2 * k, 2 * k + 1)] = -1.0;
                }
                Ok(j)
            }
            AlmostComplex::Matrix(m) => Ok(m.eval(point, params)?),
        }
    }

    /// `∂_l J` at the point (zero for the canonical structure).
    pub fn eval_partial(
        &self,
        l: usize,
        point: &[f64],
        params: &ParamSet,
    ) -> Result<DMatrix<f64>, GeomError> {
        match self {
            AlmostComplex::Canonical(n) => Ok(DMatrix::zeros(*n, *n)),
            AlmostComplex::Matrix(m) => Ok(m.eval_partial(l, point, params)?),
        }
    }
}

/// Procedure type backing a [`VectorField`].
pub type FieldFn<'a> = alloc::boxed::Box<FieldDyn<'a>>;
/// Unboxed procedure type for borrowed field arguments.
pub type FieldDyn<'a> = dyn Fn(&[f64]) -> Result<DVector<f64>, GeomError> + 'a;

/// A vector field given as a procedure, with the box on which it is defined.
pub struct VectorField<'a> {
    pub dim: usize,
    pub domain: crate::map::SampleBox,
    pub eval: FieldFn<'a>,
}

impl<'a> VectorField<'a> {
    pub fn value(&self, point: &[f64]) -> Result<DVector<f64>, GeomError> {
        (self.eval)(point)
    }
}

/// Directional central difference of a vector-valued function along `dir`.
///
/// The step is `h · max(1, |p|_inf)`; with `richardson` set, one level of
/// extrapolation removes the leading `h^2` truncation term.
pub fn central_difference(
    f: &FieldDyn<'_>,
    dir: &DVector<f64>,
    point: &[f64],
    h: f64,
    richardson: bool,
) -> Result<DVector<f64>, GeomError> {
    let scale = point.iter().fold(1.0_f64, |m, &c| m.max(c.abs()));
    let t = h * scale;
    let stencil = |tt: f64| -> Result<DVector<f64>, GeomError> {
        let plus: Vec<f64> = point
            .iter()
            .zip(dir.iter())
            .map(|(&p, &d)| p + tt * d)
            .collect();
        let minus: Vec<f64> = point
            .iter()
            .zip(dir.iter())
            .map(|(&p, &d)| p - tt * d)
            .collect();
        Ok((f(&plus)? - f(&minus)?) / (2.0 * tt))
    };
    let d1 = stencil(t)?;
    if richardson {
        let d2 = stencil(t / 2.0)?;
        Ok((d2 * 4.0 - d1) / 3.0)
    } else {
        Ok(d1)
    }
}

/// `(∇_X V)^k = X^i ∂_i V^k + Γ^k_{ij} X^i V^j` with numeric `∂_i V`.
pub fn covariant_derivative(
    g: &MetricField,
    params: &ParamSet,
    field: &VectorField<'_>,
    direction: &DVector<f64>,
    point: &[f64],
    fd: FdSteps,
) -> Result<DVector<f64>, GeomError> {
    let scale = point.iter().fold(1.0_f64, |m, &c| m.max(c.abs()));
    if !field.domain.contains_with_margin(point, 2.0 * fd.first * scale) {
        return Err(GeomError::NearBoundary(fd.first * scale));
    }
    covariant_derivative_of(g, params, &|x| field.value(x), direction, point, fd.first, fd.richardson)
}

/// Internal variant taking any closure as the field.
pub fn covariant_derivative_of(
    g: &MetricField,
    params: &ParamSet,
    field: &FieldDyn<'_>,
    direction: &DVector<f64>,
    point: &[f64],
    h: f64,
    richardson: bool,
) -> Result<DVector<f64>, GeomError> {
    let partial = central_difference(field, direction, point, h, richardson)?;
    let gamma = christoffel(g, point, params)?;
    let v = field(point)?;
    Ok(partial + gamma.contract(direction, &v))
}

/// Samples `J^2 + id`, `g(JX,JY) - g(X,Y)`, and `(∇_X J)Y` residuals over
/// the given points; the Kähler verdict needs all three below tolerance.
///
/// The parallelism residual is fully algebraic:
/// `(∇_X J)Y = (∂_X J) Y + Γ(X, JY) − J Γ(X, Y)` for constant coordinate
/// vectors, exact because metric and structure derivatives are symbolic.
pub fn hermitian_kahler_check(
    g: &MetricField,
    j: &AlmostComplex,
    params: &ParamSet,
    points: &[Vec<f64>],
    plan_vectors: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<CheckReport, GeomError> {
    let n = g.dim();
    if j.dim() != n {
        return Err(GeomError::Dimension(
            "metric and almost complex structure dimensions differ".to_string(),
        ));
    }
    let mut report = CheckReport::new("kahler", statements::HERMITIAN_KAHLER);
    let mut sampler = VectorSampler::new(seed, "hermitian_kahler");
    let mut sq_res = Vec::with_capacity(points.len());
    let mut compat_res = Vec::with_capacity(points.len());
    let mut parallel_res = Vec::with_capacity(points.len());
    let mut worst: Option<(usize, f64)> = None;
    for (idx, p) in points.iter().enumerate() {
        let jmat = j.eval(p, params)?;
        let gmat = g.eval(p, params)?;
        let sq = linalg::max_abs(&(&jmat * &jmat + DMatrix::identity(n, n)));
        sq_res.push(sq);
        // compatibility over random vector pairs
        let mut compat: f64 = 0.0;
        for _ in 0..plan_vectors {
            let x = sampler.unit_coeffs(n);
            let y = sampler.unit_coeffs(n);
            let jx = &jmat * &x;
            let jy = &jmat * &y;
            let lhs = (jx.transpose() * &gmat * &jy)[(0, 0)];
            let rhs = (x.transpose() * &gmat * &y)[(0, 0)];
            compat = compat.max((lhs - rhs).abs());
        }
        compat_res.push(compat);
        // parallelism over coordinate pairs
        let gamma = christoffel(g, p, params)?;
        let dj: Vec<DMatrix<f64>> = (0..n)
            .map(|l| j.eval_partial(l, p, params))
            .collect::<Result<_, _>>()?;
        let mut parallel: f64 = 0.0;
        for (xi, dj_x) in dj.iter().enumerate() {
            let x = DVector::from_fn(n, |r, _| if r == xi { 1.0 } else { 0.0 });
            for yi in 0..n {
                let y = DVector::from_fn(n, |r, _| if r == yi { 1.0 } else { 0.0 });
                let jy = &jmat * &y;
                let term = dj_x * &y + gamma.contract(&x, &jy) - &jmat * gamma.contract(&x, &y);
                let norm = term.amax();
                if norm > parallel {
                    parallel = norm;
                }
            }
        }
        parallel_res.push(parallel);
        let local = sq.max(compat).max(parallel);
        if worst.map(|(_, w)| local > w).unwrap_or(true) {
            worst = Some((idx, local));
        }
    }
    report.push_row(ResidualRow::new("J^2 + id", sq_res, tol.orthonormal));
    report.push_row(ResidualRow::new(
        "g(JX,JY) - g(X,Y)",
        compat_res,
        tol.orthonormal,
    ));
    report.push_row(ResidualRow::new(
        "(nabla_X J)Y",
        parallel_res,
        tol.orthonormal,
    ));
    let hermitian =
        report.rows[0].pass && report.rows[1].pass;
    report.set_value("hermitian", if hermitian { 1.0 } else { 0.0 });
    report.set_value("kahler", if hermitian && report.rows[2].pass { 1.0 } else { 0.0 });
    if let Some((idx, val)) = worst {
        report.witness = Some(crate::report::Witness {
            sample: idx,
            point: points[idx].clone(),
            value: val,
            label: "largest combined residual".to_string(),
        });
    }
    report.settle();
    Ok(report)
}
