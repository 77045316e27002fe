//! Fundamental tensors of the splitting, the second fundamental form, the
//! tension field, and executable verdicts for the covariant-derivative
//! identities, integrability, harmonicity, totally geodesic and umbilical
//! conditions, and the local product decompositions.
//!
//! Pointwise vectors are extended to fields as *projected constant fields*:
//! the smoothly varying projector of a distribution applied to a frozen
//! coefficient vector. Where an identity is tensorial only when its argument
//! stays inside a particular distribution, the extension projects onto that
//! distribution. Every theorem condition is evaluated next to an independent
//! oracle (finite-difference brackets, direct covariant derivatives, or the
//! raw second fundamental form) and the pair of verdicts must agree.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::rc::Rc;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cell::RefCell;
use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::expr::EvalError;
use crate::geometry::{christoffel, Christoffel, GeomError};
use crate::linalg;
use crate::map::{point_split, MapError, MapSpec, PointSplit};
use crate::num;
use crate::report::{
    statements, AgreementRow, CheckReport, FdSteps, ResidualRow, Tolerances, Verdict, Witness,
};
use crate::sample::VectorSampler;
use crate::slant::{kernel_split_with, structure_operators, SlantDecomposition, SlantError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TensorError {
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Slant(#[from] SlantError),
    #[error("geometry failure: {0}")]
    Geometry(#[from] GeomError),
    #[error("evaluation failed: {0}")]
    Eval(#[from] EvalError),
    #[error("input vector is not {0} at the point (residual {1})")]
    WrongSlot(&'static str, f64),
}

type Field<'c> = Box<dyn Fn(&[f64]) -> Result<DVector<f64>, TensorError> + 'c>;

fn point_key(x: &[f64]) -> Vec<u64> {
    x.iter().map(|v| v.to_bits()).collect()
}

/// Memoized pair of coordinate matrices keyed by evaluation point.
type MatrixPairCache = RefCell<BTreeMap<Vec<u64>, Rc<(DMatrix<f64>, DMatrix<f64>)>>>;

/// Shared environment for tensor evaluation: the map, the rank tolerance
/// for splits, and finite-difference configuration.
///
/// Finite-difference stencils revisit the same handful of shifted points
/// over and over, so splits, distribution projectors, and connection
/// coefficients are memoized per point. The context is single-threaded.
pub struct FieldContext<'a> {
    pub spec: &'a MapSpec,
    pub rank_tol: f64,
    pub fd: FdSteps,
    split_cache: RefCell<BTreeMap<Vec<u64>, Rc<PointSplit>>>,
    proj_cache: MatrixPairCache,
    dist_cache: MatrixPairCache,
    gamma_cache: RefCell<BTreeMap<Vec<u64>, Rc<Christoffel>>>,
}

impl<'a> FieldContext<'a> {
    pub fn new(spec: &'a MapSpec, tol: &Tolerances, fd: FdSteps) -> Self {
        FieldContext {
            spec,
            rank_tol: tol.rank_rel,
            fd,
            split_cache: RefCell::new(BTreeMap::new()),
            proj_cache: RefCell::new(BTreeMap::new()),
            dist_cache: RefCell::new(BTreeMap::new()),
            gamma_cache: RefCell::new(BTreeMap::new()),
        }
    }

    fn split_rc(&self, x: &[f64]) -> Result<Rc<PointSplit>, TensorError> {
        let key = point_key(x);
        if let Some(hit) = self.split_cache.borrow().get(&key) {
            return Ok(hit.clone());
        }
        let split = Rc::new(point_split(self.spec, x, self.rank_tol)?);
        self.split_cache.borrow_mut().insert(key, split.clone());
        Ok(split)
    }

    pub fn split(&self, x: &[f64]) -> Result<PointSplit, TensorError> {
        Ok((*self.split_rc(x)?).clone())
    }

    pub fn decomposition(&self, x: &[f64]) -> Result<SlantDecomposition, TensorError> {
        let split = self.split_rc(x)?;
        Ok(structure_operators(self.spec, &split)?)
    }

    fn j_coord(&self, x: &[f64]) -> Result<DMatrix<f64>, TensorError> {
        Ok(self.spec.j_source.eval(x, &self.spec.params)?)
    }

    #[allow(clippy::type_complexity)]
    fn projectors(&self, x: &[f64]) -> Result<Rc<(DMatrix<f64>, DMatrix<f64>)>, TensorError> {
        let key = point_key(x);
        if let Some(hit) = self.proj_cache.borrow().get(&key) {
            return Ok(hit.clone());
        }
        let split = self.split_rc(x)?;
        let pair = Rc::new((split.vertical_projector(), split.horizontal_projector()));
        self.proj_cache.borrow_mut().insert(key, pair.clone());
        Ok(pair)
    }

    fn vproj(&self, x: &[f64]) -> Result<DMatrix<f64>, TensorError> {
        Ok(self.projectors(x)?.0.clone())
    }

    fn hproj(&self, x: &[f64]) -> Result<DMatrix<f64>, TensorError> {
        Ok(self.projectors(x)?.1.clone())
    }

    fn christoffel_at(&self, x: &[f64]) -> Result<Rc<Christoffel>, TensorError> {
        let key = point_key(x);
        if let Some(hit) = self.gamma_cache.borrow().get(&key) {
            return Ok(hit.clone());
        }
        let gamma = Rc::new(christoffel(&self.spec.metric_source, x, &self.spec.params)?);
        self.gamma_cache.borrow_mut().insert(key, gamma.clone());
        Ok(gamma)
    }

    /// Coordinate projectors onto `D1` and `D2` at an arbitrary point.
    fn d1d2_proj(&self, x: &[f64]) -> Result<(DMatrix<f64>, DMatrix<f64>), TensorError> {
        let key = point_key(x);
        if let Some(hit) = self.dist_cache.borrow().get(&key) {
            return Ok((hit.0.clone(), hit.1.clone()));
        }
        let split = self.split_rc(x)?;
        let jmat = self.j_coord(x)?;
        let j_hat = split.source_frame.conjugate(&jmat);
        let (d1_hat, d2_hat, _) = kernel_split_with(&j_hat, &split.vertical.hat);
        let to_coord = |hat: &DMatrix<f64>| {
            &split.source_frame.from_hat * linalg::projector(hat) * &split.source_frame.to_hat
        };
        let pair = Rc::new((to_coord(&d1_hat), to_coord(&d2_hat)));
        self.dist_cache.borrow_mut().insert(key, pair.clone());
        Ok((pair.0.clone(), pair.1.clone()))
    }

    // ----- field constructors -----

    /// Constant-coefficient extension.
    pub fn const_ext(&self, v: &DVector<f64>) -> Field<'a> {
        let v = v.clone();
        Box::new(move |_| Ok(v.clone()))
    }

    /// Vertical projected constant field `x ↦ 𝒱(x) v`.
    pub fn vert_ext<'c>(&'c self, v: &DVector<f64>) -> Field<'c> {
        let v = v.clone();
        Box::new(move |x| Ok(self.vproj(x)? * &v))
    }

    /// Horizontal projected constant field.
    pub fn horiz_ext<'c>(&'c self, v: &DVector<f64>) -> Field<'c> {
        let v = v.clone();
        Box::new(move |x| Ok(self.hproj(x)? * &v))
    }

    /// `D1`-projected constant field.
    pub fn d1_ext<'c>(&'c self, v: &DVector<f64>) -> Field<'c> {
        let v = v.clone();
        Box::new(move |x| Ok(self.d1d2_proj(x)?.0 * &v))
    }

    /// `D2`-projected constant field.
    pub fn d2_ext<'c>(&'c self, v: &DVector<f64>) -> Field<'c> {
        let v = v.clone();
        Box::new(move |x| Ok(self.d1d2_proj(x)?.1 * &v))
    }

    /// Vertical part of `J` applied to a field (`φ` on vertical arguments,
    /// `B` on horizontal ones).
    pub fn vert_j<'c>(&'c self, f: Field<'c>) -> Field<'c> {
        Box::new(move |x| Ok(self.vproj(x)? * (self.j_coord(x)? * f(x)?)))
    }

    /// Horizontal part of `J` applied to a field (`ω` / `C`).
    pub fn horiz_j<'c>(&'c self, f: Field<'c>) -> Field<'c> {
        Box::new(move |x| Ok(self.hproj(x)? * (self.j_coord(x)? * f(x)?)))
    }

    // ----- derivatives -----

    /// Plain directional derivative of a field (no connection terms).
    fn partial(
        &self,
        f: &Field<'_>,
        dir: &DVector<f64>,
        p: &[f64],
    ) -> Result<DVector<f64>, TensorError> {
        let scale = p.iter().fold(1.0_f64, |m, &c| m.max(num::abs(c)));
        let t = self.fd.second * scale;
        let eval = |tt: f64| -> Result<DVector<f64>, TensorError> {
            let plus: Vec<f64> = p.iter().zip(dir.iter()).map(|(&a, &d)| a + tt * d).collect();
            let minus: Vec<f64> = p.iter().zip(dir.iter()).map(|(&a, &d)| a - tt * d).collect();
            Ok((f(&plus)? - f(&minus)?) / (2.0 * tt))
        };
        let d1 = eval(t)?;
        if self.fd.richardson {
            let d2 = eval(t / 2.0)?;
            Ok((d2 * 4.0 - d1) / 3.0)
        } else {
            Ok(d1)
        }
    }

    /// Covariant derivative `∇_dir f` at `p` with the source connection.
    pub fn covd(
        &self,
        f: &Field<'_>,
        dir: &DVector<f64>,
        p: &[f64],
    ) -> Result<DVector<f64>, TensorError> {
        let partial = self.partial(f, dir, p)?;
        let gamma = self.christoffel_at(p)?;
        let v = f(p)?;
        Ok(partial + gamma.contract(dir, &v))
    }

    /// Lie bracket `[f1, f2]` at `p` by central differences.
    pub fn bracket(
        &self,
        f1: &Field<'_>,
        f2: &Field<'_>,
        p: &[f64],
    ) -> Result<DVector<f64>, TensorError> {
        let d12 = self.partial(f2, &f1(p)?, p)?;
        let d21 = self.partial(f1, &f2(p)?, p)?;
        Ok(d12 - d21)
    }

    /// `𝒯_E F = ℋ∇_{𝒱E}(𝒱F) + 𝒱∇_{𝒱E}(ℋF)` for a direction vector `e`
    /// at `p` and a field `f`.
    pub fn t_tensor(
        &self,
        p: &[f64],
        split: &PointSplit,
        e: &DVector<f64>,
        f: &Field<'_>,
    ) -> Result<DVector<f64>, TensorError> {
        let ve = split.vertical_projector() * e;
        let fv: Field<'_> = Box::new(move |x| Ok(self.vproj(x)? * f(x)?));
        let fh: Field<'_> = Box::new(move |x| Ok(self.hproj(x)? * f(x)?));
        let horiz_part = split.horizontal_projector() * self.covd(&fv, &ve, p)?;
        let vert_part = split.vertical_projector() * self.covd(&fh, &ve, p)?;
        Ok(horiz_part + vert_part)
    }

    /// `𝒜_E F = ℋ∇_{ℋE}(𝒱F) + 𝒱∇_{ℋE}(ℋF)`.
    pub fn a_tensor(
        &self,
        p: &[f64],
        split: &PointSplit,
        e: &DVector<f64>,
        f: &Field<'_>,
    ) -> Result<DVector<f64>, TensorError> {
        let he = split.horizontal_projector() * e;
        let fv: Field<'_> = Box::new(move |x| Ok(self.vproj(x)? * f(x)?));
        let fh: Field<'_> = Box::new(move |x| Ok(self.hproj(x)? * f(x)?));
        let horiz_part = split.horizontal_projector() * self.covd(&fv, &he, p)?;
        let vert_part = split.vertical_projector() * self.covd(&fh, &he, p)?;
        Ok(horiz_part + vert_part)
    }

    /// Second fundamental form `(∇F_*)(e, f̃)` at `p`, valued in target
    /// coordinates: the pullback derivative of `x ↦ F_*(x) f̃(x)` along `e`
    /// minus `F_*` of the source covariant derivative.
    pub fn second_fundamental(
        &self,
        p: &[f64],
        split: &PointSplit,
        e: &DVector<f64>,
        f: &Field<'_>,
    ) -> Result<DVector<f64>, TensorError> {
        let spec = self.spec;
        let pushed: Field<'_> = Box::new(move |x| Ok(spec.jacobian(x)? * f(x)?));
        let d_push = self.partial(&pushed, e, p)?;
        let fp = spec.value(p)?;
        let fp_slice: Vec<f64> = fp.iter().cloned().collect();
        let gamma_n = christoffel(&spec.metric_target, &fp_slice, &spec.params)?;
        let jac_p = spec.jacobian(p)?;
        let pushed_dir = &jac_p * e;
        let w = pushed(p)?;
        let pullback_term = gamma_n.contract(&pushed_dir, &w);
        let src = self.covd(f, e, p)?;
        let _ = split;
        Ok(d_push + pullback_term - jac_p * src)
    }

    /// Norm of a source-tangent coordinate vector in the metric at `p`.
    fn source_norm(&self, split: &PointSplit, v: &DVector<f64>) -> f64 {
        (&split.source_frame.to_hat * v).norm()
    }

    /// Norm of a target coordinate vector in the target metric at `F(p)`.
    fn target_norm(&self, split: &PointSplit, v: &DVector<f64>) -> f64 {
        (&split.target_frame.to_hat * v).norm()
    }
}

/// One evaluation of the fundamental tensors and the second fundamental
/// form on a pair of frozen vectors, with all the distinguished splits.
#[derive(Debug, Clone)]
pub struct TensorSample {
    pub point: Vec<f64>,
    pub e: DVector<f64>,
    pub f: DVector<f64>,
    pub t_ef: DVector<f64>,
    pub t_ef_vertical: DVector<f64>,
    pub t_ef_horizontal: DVector<f64>,
    pub a_ef: DVector<f64>,
    pub a_ef_vertical: DVector<f64>,
    pub a_ef_horizontal: DVector<f64>,
    pub second_fundamental: DVector<f64>,
    pub sff_range: DVector<f64>,
    pub sff_corange: DVector<f64>,
}

/// Evaluates `𝒯_E F`, `𝒜_E F`, and `(∇F_*)(E, F)` with the constant
/// extension of `f` (projector compositions inside the defining formulas
/// supply the vertical/horizontal parts).
pub fn tensor_sample(
    ctx: &FieldContext<'_>,
    p: &[f64],
    e: &DVector<f64>,
    f: &DVector<f64>,
) -> Result<TensorSample, TensorError> {
    let split = ctx.split(p)?;
    let f_field = ctx.const_ext(f);
    let t = ctx.t_tensor(p, &split, e, &f_field)?;
    let a = ctx.a_tensor(p, &split, e, &f_field)?;
    let sff = ctx.second_fundamental(p, &split, e, &f_field)?;
    let vp = split.vertical_projector();
    let hp = split.horizontal_projector();
    let rp = split.range_projector();
    let qp = split.corange_projector();
    Ok(TensorSample {
        point: p.to_vec(),
        e: e.clone(),
        f: f.clone(),
        t_ef_vertical: &vp * &t,
        t_ef_horizontal: &hp * &t,
        t_ef: t,
        a_ef_vertical: &vp * &a,
        a_ef_horizontal: &hp * &a,
        a_ef: a,
        sff_range: &rp * &sff,
        sff_corange: &qp * &sff,
        second_fundamental: sff,
    })
}

/// `((∇_X φ)Y, (∇_X ω)Y)` for vertical `x`, `y` at `p`, using the
/// vertical projected extension of `y`.
pub fn nabla_phi_omega(
    ctx: &FieldContext<'_>,
    p: &[f64],
    x: &DVector<f64>,
    y: &DVector<f64>,
) -> Result<(DVector<f64>, DVector<f64>), TensorError> {
    let split = ctx.split(p)?;
    let vp = split.vertical_projector();
    let hp = split.horizontal_projector();
    for (label, v) in [("vertical", x), ("vertical", y)] {
        let resid = ctx.source_norm(&split, &(v - &vp * v));
        let norm = ctx.source_norm(&split, v).max(1e-300);
        if resid / norm > 1e-6 {
            return Err(TensorError::WrongSlot(label, resid / norm));
        }
    }
    let y_ext = ctx.vert_ext(y);
    let phi_y: Field<'_> = ctx.vert_j(ctx.vert_ext(y));
    let omega_y: Field<'_> = ctx.horiz_j(ctx.vert_ext(y));
    let jmat = ctx.j_coord(p)?;
    let hat_nabla_y = &vp * ctx.covd(&y_ext, x, p)?;
    let nabla_phi = &vp * ctx.covd(&phi_y, x, p)? - &vp * (&jmat * &hat_nabla_y);
    let nabla_omega = &hp * ctx.covd(&omega_y, x, p)? - &hp * (&jmat * &hat_nabla_y);
    Ok((nabla_phi, nabla_omega))
}

/// Tension field and its traces over the distinguished sub-frames.
#[derive(Debug, Clone)]
pub struct TensionSample {
    pub tau: DVector<f64>,
    pub trace_d1: DVector<f64>,
    pub trace_d2: DVector<f64>,
    pub trace_horizontal: DVector<f64>,
    /// Mean curvature of the range: horizontal trace divided by the rank.
    pub h_tilde: DVector<f64>,
}

/// Computes `τ(F) = Σ (∇F_*)(u_i, u_i)` over a metric-orthonormal frame
/// organized by `D1`, `D2`, and the horizontal space, extending each frame
/// vector inside its own distribution.
pub fn tension_at(ctx: &FieldContext<'_>, p: &[f64]) -> Result<TensionSample, TensorError> {
    let dec = ctx.decomposition(p)?;
    let split = &dec.split;
    let n = ctx.spec.dim_target;
    let mut trace_d1 = DVector::zeros(n);
    for j in 0..dec.d1.dim() {
        let u = dec.d1.coord.column(j).into_owned();
        let ext = ctx.d1_ext(&u);
        trace_d1 += ctx.second_fundamental(p, split, &u, &ext)?;
    }
    let mut trace_d2 = DVector::zeros(n);
    for j in 0..dec.d2.dim() {
        let u = dec.d2.coord.column(j).into_owned();
        let ext = ctx.d2_ext(&u);
        trace_d2 += ctx.second_fundamental(p, split, &u, &ext)?;
    }
    let mut trace_horizontal = DVector::zeros(n);
    for j in 0..split.horizontal.dim() {
        let u = split.horizontal.coord.column(j).into_owned();
        let ext = ctx.horiz_ext(&u);
        trace_horizontal += ctx.second_fundamental(p, split, &u, &ext)?;
    }
    let l = split.horizontal.dim().max(1) as f64;
    let h_tilde = &trace_horizontal / l;
    Ok(TensionSample {
        tau: &trace_d1 + &trace_d2 + &trace_horizontal,
        trace_d1,
        trace_d2,
        trace_horizontal,
        h_tilde,
    })
}

// ---------------------------------------------------------------------
// check builders
// ---------------------------------------------------------------------

struct RowCollector {
    labels: Vec<String>,
    series: Vec<Vec<f64>>,
    max_terms: Vec<f64>,
}

impl RowCollector {
    fn new(labels: &[&str]) -> Self {
        RowCollector {
            labels: labels.iter().map(|s| s.to_string()).collect(),
            series: labels.iter().map(|_| Vec::new()).collect(),
            max_terms: labels.iter().map(|_| 0.0).collect(),
        }
    }

    fn push(&mut self, row: usize, value: f64) {
        self.series[row].push(value);
    }

    fn note_term(&mut self, row: usize, term: f64) {
        if term > self.max_terms[row] {
            self.max_terms[row] = term;
        }
    }

    fn into_rows(self, tol: f64) -> Vec<ResidualRow> {
        self.labels
            .into_iter()
            .zip(self.series)
            .zip(self.max_terms)
            .map(|((label, series), max_term)| {
                ResidualRow::new(label, series, tol).with_max_term(max_term)
            })
            .collect()
    }
}

/// The eight covariant-derivative identities coupling `φ, ω, B, C` with
/// `𝒯` and `𝒜` on a Kähler source, evaluated on random vertical and
/// horizontal inputs. Not applicable when the source fails the Kähler
/// check.
pub fn fundamental_identities_check(
    ctx: &FieldContext<'_>,
    points: &[Vec<f64>],
    seed: u64,
    tol: &Tolerances,
    kahler: bool,
) -> Result<CheckReport, TensorError> {
    if !kahler {
        return Ok(CheckReport::not_applicable(
            "identities",
            statements::FUNDAMENTAL_IDENTITIES,
            "source is not Kahler; the identities assume a parallel structure",
        ));
    }
    let mut report = CheckReport::new("identities", statements::FUNDAMENTAL_IDENTITIES);
    let mut sampler = VectorSampler::new(seed, "fundamental_identities");
    let labels = [
        "vertical phi part: hat_nabla_X phi Y + T_X omega Y = phi hat_nabla_X Y + B T_X Y",
        "vertical omega part: T_X phi Y + H nabla_X omega Y = omega hat_nabla_X Y + C T_X Y",
        "horizontal B part: V nabla_Z B W + A_Z C W = phi A_Z W + B H nabla_Z W",
        "horizontal C part: A_Z B W + H nabla_Z C W = omega A_Z W + C H nabla_Z W",
        "mixed vertical-horizontal: hat_nabla_X B Z + T_X C Z = phi T_X Z + B H nabla_X Z",
        "mixed horizontal trace: T_X B Z + H nabla_X C Z = omega T_X Z + C H nabla_X Z",
        "mixed phi transport: V nabla_Z phi X + A_Z omega X = phi V nabla_Z X + B A_Z X",
        "mixed omega transport: A_Z phi X + H nabla_Z omega X = omega V nabla_Z X + C A_Z X",
    ];
    let mut col = RowCollector::new(&labels);
    for p in points {
        let split = ctx.split(p)?;
        let vp = split.vertical_projector();
        let hp = split.horizontal_projector();
        let jmat = ctx.j_coord(p)?;
        let vj = |v: &DVector<f64>| &vp * (&jmat * v);
        let hj = |v: &DVector<f64>| &hp * (&jmat * v);
        let k = split.vertical.dim();
        let r = split.horizontal.dim();

        // the frame vectors surface nontrivial terms deterministically; one
        // random pair guards against accidental alignment with the frame
        let mut vert_pairs: Vec<(DVector<f64>, DVector<f64>)> = Vec::new();
        for i in 0..k {
            let u = split.vertical.coord.column(i).into_owned();
            vert_pairs.push((u.clone(), u));
        }
        if k > 0 {
            vert_pairs.push((
                sampler.unit_in_span(&split.vertical.coord),
                sampler.unit_in_span(&split.vertical.coord),
            ));
        }
        let mut horiz_pairs: Vec<(DVector<f64>, DVector<f64>)> = Vec::new();
        for i in 0..r {
            let u = split.horizontal.coord.column(i).into_owned();
            horiz_pairs.push((u.clone(), u));
        }
        if r > 0 {
            horiz_pairs.push((
                sampler.unit_in_span(&split.horizontal.coord),
                sampler.unit_in_span(&split.horizontal.coord),
            ));
        }
        let mut mixed_pairs: Vec<(DVector<f64>, DVector<f64>)> = Vec::new();
        for i in 0..k.min(r) {
            mixed_pairs.push((
                split.vertical.coord.column(i).into_owned(),
                split.horizontal.coord.column(i).into_owned(),
            ));
        }
        if k > 0 && r > 0 {
            mixed_pairs.push((
                sampler.unit_in_span(&split.vertical.coord),
                sampler.unit_in_span(&split.horizontal.coord),
            ));
        }

        let mut acc = [0.0_f64; 8];
        for (x, y) in &vert_pairs {
            let y_ext = ctx.vert_ext(y);
            let phi_y = ctx.vert_j(ctx.vert_ext(y));
            let omega_y = ctx.horiz_j(ctx.vert_ext(y));
            let hat_nabla = &vp * ctx.covd(&y_ext, x, p)?;
            let t_xy = ctx.t_tensor(p, &split, x, &y_ext)?;
            // identity 0
            let t1 = &vp * ctx.covd(&phi_y, x, p)?;
            let t2 = ctx.t_tensor(p, &split, x, &omega_y)?;
            let t3 = vj(&hat_nabla);
            let t4 = vj(&t_xy);
            acc[0] = acc[0].max(ctx.source_norm(&split, &(&t1 + &t2 - &t3 - &t4)));
            for t in [&t1, &t2, &t3, &t4] {
                col.note_term(0, ctx.source_norm(&split, t));
            }
            // identity 1
            let t1 = ctx.t_tensor(p, &split, x, &phi_y)?;
            let t2 = &hp * ctx.covd(&omega_y, x, p)?;
            let t3 = hj(&hat_nabla);
            let t4 = hj(&t_xy);
            acc[1] = acc[1].max(ctx.source_norm(&split, &(&t1 + &t2 - &t3 - &t4)));
            for t in [&t1, &t2, &t3, &t4] {
                col.note_term(1, ctx.source_norm(&split, t));
            }
        }
        for (z, w) in &horiz_pairs {
            let w_ext = ctx.horiz_ext(w);
            let b_w = ctx.vert_j(ctx.horiz_ext(w));
            let c_w = ctx.horiz_j(ctx.horiz_ext(w));
            let h_nabla_w = &hp * ctx.covd(&w_ext, z, p)?;
            let a_zw = ctx.a_tensor(p, &split, z, &w_ext)?;
            // identity 2
            let t1 = &vp * ctx.covd(&b_w, z, p)?;
            let t2 = ctx.a_tensor(p, &split, z, &c_w)?;
            let t3 = vj(&a_zw);
            let t4 = vj(&h_nabla_w);
            acc[2] = acc[2].max(ctx.source_norm(&split, &(&t1 + &t2 - &t3 - &t4)));
            for t in [&t1, &t2, &t3, &t4] {
                col.note_term(2, ctx.source_norm(&split, t));
            }
            // identity 3
            let t1 = ctx.a_tensor(p, &split, z, &b_w)?;
            let t2 = &hp * ctx.covd(&c_w, z, p)?;
            let t3 = hj(&a_zw);
            let t4 = hj(&h_nabla_w);
            acc[3] = acc[3].max(ctx.source_norm(&split, &(&t1 + &t2 - &t3 - &t4)));
            for t in [&t1, &t2, &t3, &t4] {
                col.note_term(3, ctx.source_norm(&split, t));
            }
        }
        for (x, z) in &mixed_pairs {
            let z_ext = ctx.horiz_ext(z);
            let b_z = ctx.vert_j(ctx.horiz_ext(z));
            let c_z = ctx.horiz_j(ctx.horiz_ext(z));
            let t_xz = ctx.t_tensor(p, &split, x, &z_ext)?;
            let h_nabla_xz = &hp * ctx.covd(&z_ext, x, p)?;
            // identity 4
            let t1 = &vp * ctx.covd(&b_z, x, p)?;
            let t2 = ctx.t_tensor(p, &split, x, &c_z)?;
            let t3 = vj(&t_xz);
            let t4 = vj(&h_nabla_xz);
            acc[4] = acc[4].max(ctx.source_norm(&split, &(&t1 + &t2 - &t3 - &t4)));
            for t in [&t1, &t2, &t3, &t4] {
                col.note_term(4, ctx.source_norm(&split, t));
            }
            // identity 5
            let t1 = ctx.t_tensor(p, &split, x, &b_z)?;
            let t2 = &hp * ctx.covd(&c_z, x, p)?;
            let t3 = hj(&t_xz);
            let t4 = hj(&h_nabla_xz);
            acc[5] = acc[5].max(ctx.source_norm(&split, &(&t1 + &t2 - &t3 - &t4)));
            for t in [&t1, &t2, &t3, &t4] {
                col.note_term(5, ctx.source_norm(&split, t));
            }
            // identity 6
            let x_ext = ctx.vert_ext(x);
            let phi_x = ctx.vert_j(ctx.vert_ext(x));
            let omega_x = ctx.horiz_j(ctx.vert_ext(x));
            let v_nabla_zx = &vp * ctx.covd(&x_ext, z, p)?;
            let a_zx = ctx.a_tensor(p, &split, z, &x_ext)?;
            let t1 = &vp * ctx.covd(&phi_x, z, p)?;
            let t2 = ctx.a_tensor(p, &split, z, &omega_x)?;
            let t3 = vj(&v_nabla_zx);
            let t4 = vj(&a_zx);
            acc[6] = acc[6].max(ctx.source_norm(&split, &(&t1 + &t2 - &t3 - &t4)));
            for t in [&t1, &t2, &t3, &t4] {
                col.note_term(6, ctx.source_norm(&split, t));
            }
            // identity 7
            let t1 = ctx.a_tensor(p, &split, z, &phi_x)?;
            let t2 = &hp * ctx.covd(&omega_x, z, p)?;
            let t3 = hj(&v_nabla_zx);
            let t4 = hj(&a_zx);
            acc[7] = acc[7].max(ctx.source_norm(&split, &(&t1 + &t2 - &t3 - &t4)));
            for t in [&t1, &t2, &t3, &t4] {
                col.note_term(7, ctx.source_norm(&split, t));
            }
        }
        for (row, value) in acc.iter().enumerate() {
            col.push(row, *value);
        }
    }
    for row in col.into_rows(tol.second_order) {
        report.push_row(row);
    }
    report.settle();
    Ok(report)
}

/// Integrability of `D1` and `D2`: the operator conditions next to a
/// finite-difference bracket oracle. The verdict pairs must agree.
pub fn integrability_checks(
    ctx: &FieldContext<'_>,
    points: &[Vec<f64>],
    tol: &Tolerances,
) -> Result<CheckReport, TensorError> {
    let mut report = CheckReport::new("integrability", statements::INTEGRABILITY);
    let mut d1_cond: Vec<f64> = Vec::new();
    let mut d1_oracle: Vec<f64> = Vec::new();
    let mut d2_cond: Vec<f64> = Vec::new();
    let mut d2_oracle: Vec<f64> = Vec::new();
    let mut d1_pairs = 0usize;
    let mut d2_pairs = 0usize;
    for p in points {
        let dec = ctx.decomposition(p)?;
        let split = &dec.split;
        let vp = split.vertical_projector();
        let hp = split.horizontal_projector();
        let jmat = ctx.j_coord(p)?;
        let (d1p, d2p) = ctx.d1d2_proj(p)?;
        let mut c1: f64 = 0.0;
        let mut o1: f64 = 0.0;
        for i in 0..dec.d1.dim() {
            for j in (i + 1)..dec.d1.dim() {
                d1_pairs += 1;
                let xi = dec.d1.coord.column(i).into_owned();
                let yj = dec.d1.coord.column(j).into_owned();
                let x_ext = ctx.d1_ext(&xi);
                let y_ext = ctx.d1_ext(&yj);
                let diff =
                    &vp * ctx.covd(&y_ext, &xi, p)? - &vp * ctx.covd(&x_ext, &yj, p)?;
                let cond = &hp * (&jmat * &diff);
                c1 = c1.max(ctx.source_norm(split, &cond));
                let br = ctx.bracket(&x_ext, &y_ext, p)?;
                let resid = &br - &d1p * &br;
                o1 = o1.max(ctx.source_norm(split, &resid));
            }
        }
        d1_cond.push(c1);
        d1_oracle.push(o1);
        let mut c2: f64 = 0.0;
        let mut o2: f64 = 0.0;
        for i in 0..dec.d2.dim() {
            for j in (i + 1)..dec.d2.dim() {
                d2_pairs += 1;
                let xi = dec.d2.coord.column(i).into_owned();
                let yj = dec.d2.coord.column(j).into_owned();
                let x_ext = ctx.d2_ext(&xi);
                let y_ext = ctx.d2_ext(&yj);
                let diff =
                    &vp * ctx.covd(&y_ext, &xi, p)? - &vp * ctx.covd(&x_ext, &yj, p)?;
                let cond = &d1p * (&vp * (&jmat * &diff));
                c2 = c2.max(ctx.source_norm(split, &cond));
                let br = ctx.bracket(&x_ext, &y_ext, p)?;
                let resid = &br - &d2p * &br;
                o2 = o2.max(ctx.source_norm(split, &resid));
            }
        }
        d2_cond.push(c2);
        d2_oracle.push(o2);
    }
    if d1_pairs == 0 {
        report
            .annotations
            .push("D1 has at most one direction; integrability is vacuous".to_string());
    }
    if d2_pairs == 0 {
        report
            .annotations
            .push("D2 has at most one direction; integrability is vacuous".to_string());
    }
    let rows = [
        ("D1 condition: omega(hat_nabla_X Y - hat_nabla_Y X)", d1_cond.clone()),
        ("D1 bracket oracle: [X,Y] stays in D1", d1_oracle.clone()),
        ("D2 condition: P(phi(hat_nabla_X Y - hat_nabla_Y X))", d2_cond.clone()),
        ("D2 bracket oracle: [X,Y] stays in D2", d2_oracle.clone()),
    ];
    for (label, series) in rows {
        report.push_row(ResidualRow::new(label, series, tol.first_order));
    }
    let pass = |v: &Vec<f64>| v.iter().cloned().fold(0.0, f64::max) <= tol.first_order;
    report
        .agreements
        .push(AgreementRow::new("D1 condition vs bracket oracle", pass(&d1_cond), pass(&d1_oracle)));
    report
        .agreements
        .push(AgreementRow::new("D2 condition vs bracket oracle", pass(&d2_cond), pass(&d2_oracle)));
    report.set_value("d1_integrable", if pass(&d1_oracle) { 1.0 } else { 0.0 });
    report.set_value("d2_integrable", if pass(&d2_oracle) { 1.0 } else { 0.0 });
    report.settle();
    Ok(report)
}

/// Tension field, harmonicity verdict, and the trace bookkeeping that the
/// harmonicity theorem prescribes on a Kähler source with integrable `D1`.
pub fn tension_and_harmonicity(
    ctx: &FieldContext<'_>,
    points: &[Vec<f64>],
    tol: &Tolerances,
    kahler: bool,
    d1_integrable: Option<bool>,
) -> Result<CheckReport, TensorError> {
    let mut report = CheckReport::new("harmonicity", statements::HARMONICITY);
    let mut tau_norms = Vec::new();
    let mut d1_norms = Vec::new();
    let mut d2_norms = Vec::new();
    let mut h_norms = Vec::new();
    let mut worst: Option<(usize, f64)> = None;
    for (idx, p) in points.iter().enumerate() {
        let split = ctx.split(p)?;
        let t = tension_at(ctx, p)?;
        let tau = ctx.target_norm(&split, &t.tau);
        tau_norms.push(tau);
        d1_norms.push(ctx.target_norm(&split, &t.trace_d1));
        d2_norms.push(ctx.target_norm(&split, &t.trace_d2));
        h_norms.push(ctx.target_norm(&split, &t.h_tilde));
        if worst.map(|(_, w)| tau > w).unwrap_or(true) {
            worst = Some((idx, tau));
        }
    }
    let max = |v: &Vec<f64>| v.iter().cloned().fold(0.0, f64::max);
    let harmonic = max(&tau_norms) <= tol.second_order;
    report.set_value("tau_norm", max(&tau_norms));
    report.set_value("trace_d1_norm", max(&d1_norms));
    report.set_value("trace_d2_norm", max(&d2_norms));
    report.set_value("h_tilde_norm", max(&h_norms));
    report.set_value("harmonic", if harmonic { 1.0 } else { 0.0 });
    if let Some((idx, val)) = worst {
        report.witness = Some(Witness {
            sample: idx,
            point: points[idx].clone(),
            value: val,
            label: "largest tension norm".to_string(),
        });
    }
    report.push_row(ResidualRow::new("|tau|", tau_norms, tol.second_order));
    // the split traces are findings, not pass/fail rows
    if kahler {
        if let Some(true) = d1_integrable {
            // harmonic iff the D2 trace and the range mean curvature vanish
            let reduced = max(&d2_norms) <= tol.second_order && max(&h_norms) <= tol.second_order;
            report.agreements.push(AgreementRow::new(
                "harmonic iff D2-trace = 0 and mean curvature of range = 0",
                harmonic,
                reduced,
            ));
        }
        report.settle();
    } else {
        report.verdict = Verdict::NotApplicable;
        report.annotations.push(
            "source is not Kahler; raw tension values reported without the theorem reduction"
                .to_string(),
        );
    }
    Ok(report)
}

/// Totally-geodesic verdict: the three operator conditions (on a Kähler
/// source) next to the direct `∇F_* = 0` oracle.
pub fn totally_geodesic_check(
    ctx: &FieldContext<'_>,
    points: &[Vec<f64>],
    seed: u64,
    tol: &Tolerances,
    kahler: bool,
) -> Result<CheckReport, TensorError> {
    let mut report = CheckReport::new("geodesic", statements::TOTALLY_GEODESIC);
    let mut sampler = VectorSampler::new(seed, "totally_geodesic");
    let mut cond_vv = Vec::new();
    let mut cond_vh = Vec::new();
    let mut cond_hh = Vec::new();
    let mut oracle = Vec::new();
    for p in points {
        let split = ctx.split(p)?;
        let vp = split.vertical_projector();
        let hp = split.horizontal_projector();
        let jmat = ctx.j_coord(p)?;
        let hj = |v: &DVector<f64>| &hp * (&jmat * v);
        let m = ctx.spec.dim_source;
        // raw oracle over random pairs plus the frame diagonal
        let mut o: f64 = 0.0;
        for _ in 0..3 {
            let e = sampler.unit_coeffs(m);
            let f = sampler.unit_coeffs(m);
            let s = ctx.second_fundamental(p, &split, &e, &ctx.const_ext(&f))?;
            o = o.max(ctx.target_norm(&split, &s));
        }
        for j in 0..split.vertical.dim() {
            let u = split.vertical.coord.column(j).into_owned();
            let s = ctx.second_fundamental(p, &split, &u, &ctx.vert_ext(&u))?;
            o = o.max(ctx.target_norm(&split, &s));
        }
        oracle.push(o);
        if kahler {
            // condition on vertical pairs
            let mut c1: f64 = 0.0;
            if split.vertical.dim() > 0 {
                for _ in 0..2 {
                    let x = sampler.unit_in_span(&split.vertical.coord);
                    let y = sampler.unit_in_span(&split.vertical.coord);
                    let phi_y = ctx.vert_j(ctx.vert_ext(&y));
                    let omega_y = ctx.horiz_j(ctx.vert_ext(&y));
                    let a = &vp * ctx.covd(&phi_y, &x, p)?;
                    let b = ctx.t_tensor(p, &split, &x, &omega_y)?;
                    let c = ctx.t_tensor(p, &split, &x, &phi_y)?;
                    let d = &hp * ctx.covd(&omega_y, &x, p)?;
                    let term = hj(&(&a + &b)) + hj(&(&c + &d));
                    c1 = c1.max(ctx.source_norm(&split, &term));
                }
            }
            cond_vv.push(c1);
            // condition on mixed pairs
            let mut c2: f64 = 0.0;
            if split.vertical.dim() > 0 && split.horizontal.dim() > 0 {
                for _ in 0..2 {
                    let x = sampler.unit_in_span(&split.vertical.coord);
                    let z = sampler.unit_in_span(&split.horizontal.coord);
                    let b_z = ctx.vert_j(ctx.horiz_ext(&z));
                    let c_z = ctx.horiz_j(ctx.horiz_ext(&z));
                    let a = &vp * ctx.covd(&b_z, &x, p)?;
                    let b = ctx.t_tensor(p, &split, &x, &c_z)?;
                    let c = ctx.t_tensor(p, &split, &x, &b_z)?;
                    let d = &hp * ctx.covd(&c_z, &x, p)?;
                    let term = hj(&(&a + &vp * &b)) + hj(&(&hp * &c + &d));
                    c2 = c2.max(ctx.source_norm(&split, &term));
                }
            }
            cond_vh.push(c2);
            // condition on horizontal pairs: the co-range part of the
            // pullback derivative
            let mut c3: f64 = 0.0;
            if split.horizontal.dim() > 0 {
                for _ in 0..2 {
                    let z1 = sampler.unit_in_span(&split.horizontal.coord);
                    let z2 = sampler.unit_in_span(&split.horizontal.coord);
                    let s = ctx.second_fundamental(p, &split, &z1, &ctx.horiz_ext(&z2))?;
                    let qbar = split.corange_projector() * &s;
                    c3 = c3.max(ctx.target_norm(&split, &qbar));
                }
            }
            cond_hh.push(c3);
        }
    }
    let max = |v: &Vec<f64>| v.iter().cloned().fold(0.0, f64::max);
    let oracle_pass = max(&oracle) <= tol.second_order;
    report.set_value("totally_geodesic", if oracle_pass { 1.0 } else { 0.0 });
    if !kahler {
        report.push_row(ResidualRow::new(
            "max |(nabla F_*)(E, F)| (direct oracle)",
            oracle,
            tol.second_order,
        ));
        report.verdict = Verdict::NotApplicable;
        report.annotations.push(
            "source is not Kahler; only the direct second-fundamental-form oracle is reported"
                .to_string(),
        );
        return Ok(report);
    }
    let cond_pass = max(&cond_vv) <= tol.second_order
        && max(&cond_vh) <= tol.second_order
        && max(&cond_hh) <= tol.second_order;
    report.push_row(ResidualRow::new(
        "vertical pairs: omega(hat_nabla phi + T omega) + C(T phi + H nabla omega)",
        cond_vv,
        tol.second_order,
    ));
    report.push_row(ResidualRow::new(
        "mixed pairs: omega(hat_nabla B + T C) + C(T B + H nabla C)",
        cond_vh,
        tol.second_order,
    ));
    report.push_row(ResidualRow::new(
        "horizontal pairs: corange part of the pullback derivative",
        cond_hh,
        tol.second_order,
    ));
    report.push_row(ResidualRow::new(
        "max |(nabla F_*)(E, F)| (direct oracle)",
        oracle,
        tol.second_order,
    ));
    report.agreements.push(AgreementRow::new(
        "operator conditions vs direct oracle",
        cond_pass,
        oracle_pass,
    ));
    report.settle();
    Ok(report)
}

/// Umbilical-fiber verdict: fits the mean curvature vector `H` and measures
/// `𝒯_X Y - g(X,Y) H`; when the fibers are umbilical on a Kähler source,
/// also verifies `H` lies in `omega D2`.
pub fn umbilical_check(
    ctx: &FieldContext<'_>,
    points: &[Vec<f64>],
    seed: u64,
    tol: &Tolerances,
    kahler: bool,
) -> Result<CheckReport, TensorError> {
    let mut report = CheckReport::new("umbilical", statements::UMBILICAL);
    let mut sampler = VectorSampler::new(seed, "umbilical");
    let mut fit_res = Vec::new();
    let mut membership_res = Vec::new();
    let mut h_norm_max: f64 = 0.0;
    let mut worst: Option<(usize, f64, String)> = None;
    for (idx, p) in points.iter().enumerate() {
        let dec = ctx.decomposition(p)?;
        let split = &dec.split;
        let k = split.vertical.dim();
        if k == 0 {
            return Ok(CheckReport::not_applicable(
                "umbilical",
                statements::UMBILICAL,
                "fibers are zero-dimensional",
            ));
        }
        let gm = ctx.spec.metric_source.eval(p, &ctx.spec.params)?;
        let mut h = DVector::zeros(ctx.spec.dim_source);
        for j in 0..k {
            let u = split.vertical.coord.column(j).into_owned();
            h += ctx.t_tensor(p, split, &u, &ctx.vert_ext(&u))?;
        }
        h /= k as f64;
        h_norm_max = h_norm_max.max(ctx.source_norm(split, &h));
        // frame pairs plus random pairs
        let mut pairs: Vec<(DVector<f64>, DVector<f64>, String)> = Vec::new();
        for i in 0..k {
            for j in i..k {
                pairs.push((
                    split.vertical.coord.column(i).into_owned(),
                    split.vertical.coord.column(j).into_owned(),
                    format!("frame pair ({i}, {j})"),
                ));
            }
        }
        for n in 0..2 {
            pairs.push((
                sampler.unit_in_span(&split.vertical.coord),
                sampler.unit_in_span(&split.vertical.coord),
                format!("random pair {n}"),
            ));
        }
        let mut res: f64 = 0.0;
        for (x, y, label) in pairs {
            let t = ctx.t_tensor(p, split, &x, &ctx.vert_ext(&y))?;
            let gxy = (x.transpose() * &gm * &y)[(0, 0)];
            let r = ctx.source_norm(split, &(&t - &h * gxy));
            if r > res {
                res = r;
            }
            if worst.as_ref().map(|(_, w, _)| r > *w).unwrap_or(true) {
                worst = Some((idx, r, label));
            }
        }
        fit_res.push(res);
        let omega_proj = if dec.omega_d2.dim() == 0 {
            DMatrix::zeros(ctx.spec.dim_source, ctx.spec.dim_source)
        } else {
            &split.source_frame.from_hat
                * linalg::projector(&dec.omega_d2.hat)
                * &split.source_frame.to_hat
        };
        membership_res.push(ctx.source_norm(split, &(&h - omega_proj * &h)));
    }
    let max = |v: &Vec<f64>| v.iter().cloned().fold(0.0, f64::max);
    let umbilical = max(&fit_res) <= tol.second_order;
    report.set_value("umbilical", if umbilical { 1.0 } else { 0.0 });
    report.set_value("mean_curvature_norm", h_norm_max);
    report.push_row(ResidualRow::new(
        "T_X Y - g(X,Y) H",
        fit_res,
        tol.second_order,
    ));
    if umbilical && kahler {
        report.push_row(ResidualRow::new(
            "H outside omega D2",
            membership_res,
            tol.first_order.max(1e-6),
        ));
    } else if umbilical && !kahler {
        report
            .annotations
            .push("membership of H in omega D2 assumes a Kahler source; skipped".to_string());
    }
    if let Some((idx, val, label)) = worst {
        report.witness = Some(Witness {
            sample: idx,
            point: points[idx].clone(),
            value: val,
            label,
        });
    }
    report.settle();
    Ok(report)
}

/// Local-product verdicts: the operator conditions for `(ker, horizontal)`
/// and `(D1, D2)` to be autoparallel pairs, next to direct
/// covariant-derivative oracles. Not applicable on a non-Kähler source
/// (oracle values are still reported).
pub fn decomposition_checks(
    ctx: &FieldContext<'_>,
    points: &[Vec<f64>],
    tol: &Tolerances,
    kahler: bool,
) -> Result<CheckReport, TensorError> {
    let mut report = CheckReport::new("decomposition", statements::DECOMPOSITION);
    let mut cond_ker = Vec::new();
    let mut cond_horiz = Vec::new();
    let mut oracle_ker = Vec::new();
    let mut oracle_horiz = Vec::new();
    let mut cond_d1 = Vec::new();
    let mut cond_d2 = Vec::new();
    let mut oracle_d1 = Vec::new();
    let mut oracle_d2 = Vec::new();
    for p in points {
        let dec = ctx.decomposition(p)?;
        let split = &dec.split;
        let vp = split.vertical_projector();
        let hp = split.horizontal_projector();
        let jmat = ctx.j_coord(p)?;
        let vj = |v: &DVector<f64>| &vp * (&jmat * v);
        let hj = |v: &DVector<f64>| &hp * (&jmat * v);
        let (d1p, d2p) = ctx.d1d2_proj(p)?;

        // kernel and horizontal autoparallelism (whole-space product)
        let mut ck: f64 = 0.0;
        let mut ok: f64 = 0.0;
        for i in 0..split.vertical.dim() {
            for j in 0..split.vertical.dim() {
                let x = split.vertical.coord.column(i).into_owned();
                let y = split.vertical.coord.column(j).into_owned();
                let y_ext = ctx.vert_ext(&y);
                let phi_y = ctx.vert_j(ctx.vert_ext(&y));
                let omega_y = ctx.horiz_j(ctx.vert_ext(&y));
                let a = &vp * ctx.covd(&phi_y, &x, p)?;
                let b = ctx.t_tensor(p, split, &x, &omega_y)?;
                let c = ctx.t_tensor(p, split, &x, &phi_y)?;
                let d = &hp * ctx.covd(&omega_y, &x, p)?;
                let term = hj(&(&a + &vp * &b)) + hj(&(&hp * &c + &d));
                ck = ck.max(ctx.source_norm(split, &term));
                let nabla = ctx.covd(&y_ext, &x, p)?;
                ok = ok.max(ctx.source_norm(split, &(&hp * &nabla)));
            }
        }
        cond_ker.push(ck);
        oracle_ker.push(ok);
        let mut ch: f64 = 0.0;
        let mut oh: f64 = 0.0;
        for i in 0..split.horizontal.dim() {
            for j in 0..split.horizontal.dim() {
                let z = split.horizontal.coord.column(i).into_owned();
                let w = split.horizontal.coord.column(j).into_owned();
                let w_ext = ctx.horiz_ext(&w);
                let b_w = ctx.vert_j(ctx.horiz_ext(&w));
                let c_w = ctx.horiz_j(ctx.horiz_ext(&w));
                let a = &vp * ctx.covd(&b_w, &z, p)?;
                let b = ctx.a_tensor(p, split, &z, &c_w)?;
                let c = ctx.a_tensor(p, split, &z, &b_w)?;
                let d = &hp * ctx.covd(&c_w, &z, p)?;
                let term = vj(&(&a + &vp * &b)) + vj(&(&hp * &c + &d));
                ch = ch.max(ctx.source_norm(split, &term));
                let nabla = ctx.covd(&w_ext, &z, p)?;
                oh = oh.max(ctx.source_norm(split, &(&vp * &nabla)));
            }
        }
        cond_horiz.push(ch);
        oracle_horiz.push(oh);

        // D1/D2 autoparallelism (fiber product)
        let mut c1: f64 = 0.0;
        let mut o1: f64 = 0.0;
        for i in 0..dec.d1.dim() {
            for j in 0..dec.d1.dim() {
                let u = dec.d1.coord.column(i).into_owned();
                let v = dec.d1.coord.column(j).into_owned();
                let v_ext = ctx.d1_ext(&v);
                let phi_v = ctx.vert_j(ctx.d1_ext(&v));
                let a = &vp * ctx.covd(&phi_v, &u, p)?;
                let b = ctx.t_tensor(p, split, &u, &phi_v)?;
                let q_term = &d2p * (vj(&a) + vj(&(&hp * &b)));
                let omega_term = hj(&a) + hj(&(&hp * &b));
                c1 = c1
                    .max(ctx.source_norm(split, &q_term))
                    .max(ctx.source_norm(split, &omega_term));
                let nabla = ctx.covd(&v_ext, &u, p)?;
                o1 = o1.max(ctx.source_norm(split, &(&nabla - &d1p * &nabla)));
            }
        }
        cond_d1.push(c1);
        oracle_d1.push(o1);
        let mut c2: f64 = 0.0;
        let mut o2: f64 = 0.0;
        for i in 0..dec.d2.dim() {
            for j in 0..dec.d2.dim() {
                let x = dec.d2.coord.column(i).into_owned();
                let y = dec.d2.coord.column(j).into_owned();
                let y_ext = ctx.d2_ext(&y);
                let phi_y = ctx.vert_j(ctx.d2_ext(&y));
                let omega_y = ctx.horiz_j(ctx.d2_ext(&y));
                let a = &vp * ctx.covd(&phi_y, &x, p)?;
                let b = ctx.t_tensor(p, split, &x, &omega_y)?;
                let c = ctx.t_tensor(p, split, &x, &phi_y)?;
                let d = &hp * ctx.covd(&omega_y, &x, p)?;
                let inner_v = &a + &vp * &b;
                let inner_h = &hp * &c + &d;
                let p_term = &d1p * (vj(&inner_v) + vj(&inner_h));
                let omega_term = hj(&inner_v) + hj(&inner_h);
                c2 = c2
                    .max(ctx.source_norm(split, &p_term))
                    .max(ctx.source_norm(split, &omega_term));
                let nabla = ctx.covd(&y_ext, &x, p)?;
                o2 = o2.max(ctx.source_norm(split, &(&nabla - &d2p * &nabla)));
            }
        }
        cond_d2.push(c2);
        oracle_d2.push(o2);
    }
    let max = |v: &Vec<f64>| v.iter().cloned().fold(0.0, f64::max);
    let t = tol.second_order;
    let whole_cond = max(&cond_ker) <= t && max(&cond_horiz) <= t;
    let whole_oracle = max(&oracle_ker) <= t && max(&oracle_horiz) <= t;
    let fiber_cond = max(&cond_d1) <= t && max(&cond_d2) <= t;
    let fiber_oracle = max(&oracle_d1) <= t && max(&oracle_d2) <= t;
    report.set_value("product_whole", if whole_oracle { 1.0 } else { 0.0 });
    report.set_value("product_fibers", if fiber_oracle { 1.0 } else { 0.0 });
    for (label, series) in [
        ("kernel condition", cond_ker),
        ("kernel autoparallel oracle", oracle_ker),
        ("horizontal condition", cond_horiz),
        ("horizontal autoparallel oracle", oracle_horiz),
        ("D1 condition", cond_d1),
        ("D1 autoparallel oracle", oracle_d1),
        ("D2 condition", cond_d2),
        ("D2 autoparallel oracle", oracle_d2),
    ] {
        report.push_row(ResidualRow::new(label, series, t));
    }
    if !kahler {
        report.rows.clear();
        report.verdict = Verdict::NotApplicable;
        report.annotations.push(
            "source is not Kahler; autoparallel oracles computed but the operator conditions assume a parallel structure"
                .to_string(),
        );
        return Ok(report);
    }
    report.agreements.push(AgreementRow::new(
        "whole-space condition vs autoparallel oracle",
        whole_cond,
        whole_oracle,
    ));
    report.agreements.push(AgreementRow::new(
        "fiber condition vs autoparallel oracle",
        fiber_cond,
        fiber_oracle,
    ));
    report.settle();
    Ok(report)
}

/// Parallel-`ω` diagnostic: measures `(∇_X ω)Y`, and when `ω` is parallel
/// on a Kähler source verifies `𝒯_{φX} φX = -cos²(θ) 𝒯_X X` on `D2`.
pub fn omega_parallel_check(
    ctx: &FieldContext<'_>,
    points: &[Vec<f64>],
    seed: u64,
    tol: &Tolerances,
    kahler: bool,
) -> Result<CheckReport, TensorError> {
    if !kahler {
        return Ok(CheckReport::not_applicable(
            "omega_parallel",
            statements::OMEGA_PARALLEL,
            "source is not Kahler",
        ));
    }
    let mut report = CheckReport::new("omega_parallel", statements::OMEGA_PARALLEL);
    let mut sampler = VectorSampler::new(seed, "omega_parallel");
    let mut parallel_res = Vec::new();
    let mut scaling_res = Vec::new();
    let mut max_term: f64 = 0.0;
    for p in points {
        let dec = ctx.decomposition(p)?;
        let split = &dec.split;
        let mut pr: f64 = 0.0;
        if split.vertical.dim() > 0 {
            for _ in 0..3 {
                let x = sampler.unit_in_span(&split.vertical.coord);
                let y = sampler.unit_in_span(&split.vertical.coord);
                let (_, nw) = nabla_phi_omega(ctx, p, &x, &y)?;
                pr = pr.max(ctx.source_norm(split, &nw));
            }
        }
        parallel_res.push(pr);
        let mut sr: f64 = 0.0;
        if dec.d2.dim() > 0 {
            let cos2 = num::cos(dec.theta) * num::cos(dec.theta);
            let vp = split.vertical_projector();
            let jmat = ctx.j_coord(p)?;
            for j in 0..dec.d2.dim() {
                let x = dec.d2.coord.column(j).into_owned();
                let phi_x = &vp * (&jmat * &x);
                let t_phi = ctx.t_tensor(p, split, &phi_x, &ctx.vert_ext(&phi_x))?;
                let t_x = ctx.t_tensor(p, split, &x, &ctx.vert_ext(&x))?;
                sr = sr.max(ctx.source_norm(split, &(&t_phi + &t_x * cos2)));
                max_term = max_term
                    .max(ctx.source_norm(split, &t_phi))
                    .max(ctx.source_norm(split, &(&t_x * cos2)));
            }
        }
        scaling_res.push(sr);
    }
    let parallel = parallel_res.iter().cloned().fold(0.0, f64::max) <= tol.second_order;
    report.set_value("omega_parallel", if parallel { 1.0 } else { 0.0 });
    report.push_row(ResidualRow::new(
        "(nabla_X omega) Y",
        parallel_res,
        tol.second_order,
    ));
    if parallel {
        report.push_row(
            ResidualRow::new(
                "T_{phi X} phi X + cos^2(theta) T_X X on D2",
                scaling_res,
                tol.second_order,
            )
            .with_max_term(max_term),
        );
        if max_term <= tol.second_order {
            report.annotations.push(
                "identity verified only in a degenerate instance: every term vanishes on this map"
                    .to_string(),
            );
        }
    } else {
        report
            .annotations
            .push("omega is not parallel on this map; the scaling identity does not apply".to_string());
    }
    report.settle();
    Ok(report)
}
