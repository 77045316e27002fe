//! Invariant/slant splitting of the kernel, the structure operators, the
//! slant angle, the adapted frame, and the induced complex structure on the
//! fibers.
//!
//! All subspace work happens in metric-orthonormal (hat) coordinates where
//! inner products are Euclidean. The invariant part `D1 = ker F_* ∩ J(ker
//! F_*)` is detected through principal angles computed by the sine method,
//! which keeps near-zero angles well conditioned; `D2` is its orthogonal
//! complement inside the kernel.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::linalg;
use crate::map::{point_split, Basis, MapError, MapSpec, PointSplit};
use crate::num;
use crate::report::{statements, CheckReport, ResidualRow, Tolerances, Witness};
use crate::sample::VectorSampler;

/// Principal sines below this are treated as exactly zero when detecting the
/// invariant subspace.
pub const D1_DETECTION_TOL: f64 = 1e-8;
/// Sines inside `[D1_DETECTION_TOL, AMBIGUITY_BAND_HIGH]` are flagged.
pub const AMBIGUITY_BAND_HIGH: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SlantError {
    #[error(transparent)]
    Map(#[from] MapError),
    #[error("the test vector is zero")]
    ZeroVector,
    #[error("the vector is not in the slant distribution (residual {0})")]
    NotInD2(f64),
    #[error("the slant angle is a right angle; sec(theta) is undefined")]
    RightAngle,
    #[error("the slant angle is zero but D2 is nonempty")]
    ZeroAngleWithSlantDirections,
    #[error("block of dimension {0} cannot be grouped into structure pairs")]
    OddBlock(usize),
}

/// Pointwise semi-slant data: bases of the four distinguished subspaces, the
/// structure operator matrices, the angle, and a residual ledger for the
/// algebraic identities the structure must satisfy.
#[derive(Debug, Clone)]
pub struct SlantDecomposition {
    pub split: PointSplit,
    pub d1: Basis,
    pub d2: Basis,
    pub omega_d2: Basis,
    pub mu: Basis,
    /// `J` at the point, in hat coordinates (`m x m`).
    pub j_hat: DMatrix<f64>,
    /// Vertical part of `J` on the kernel, in the kernel basis (`k x k`).
    pub phi: DMatrix<f64>,
    /// Horizontal part of `J` on the kernel (`r x k`).
    pub omega: DMatrix<f64>,
    /// Vertical part of `J` on the horizontal space (`k x r`).
    pub b: DMatrix<f64>,
    /// Horizontal part of `J` on the horizontal space (`r x r`).
    pub c: DMatrix<f64>,
    /// Projector onto `D1` in the kernel basis (`k x k`).
    pub p_proj: DMatrix<f64>,
    /// Projector onto `D2` in the kernel basis (`k x k`).
    pub q_proj: DMatrix<f64>,
    /// `D1` basis coefficients in the kernel basis (`k x dim D1`).
    pub d1_in_ker: DMatrix<f64>,
    /// `D2` basis coefficients in the kernel basis (`k x dim D2`).
    pub d2_in_ker: DMatrix<f64>,
    /// Representative slant angle at this point (0 when `D2` is trivial).
    pub theta: f64,
    /// Named residuals of the structural identities at this point.
    pub residuals: Vec<(String, f64)>,
    pub flags: Vec<String>,
}

impl SlantDecomposition {
    pub fn dim_d1(&self) -> usize {
        self.d1.dim()
    }

    pub fn dim_d2(&self) -> usize {
        self.d2.dim()
    }

    /// `phi` applied to an ambient hat vector (projects to the kernel, then
    /// takes the vertical part of `J`).
    fn phi_ambient(&self, x_hat: &DVector<f64>) -> DVector<f64> {
        let vert = linalg::projector(&self.split.vertical.hat);
        &vert * (&self.j_hat * (&vert * x_hat))
    }
}

/// Bases of `D1` and `D2` in hat coordinates, with any ambiguity flags.
pub type KernelSplit = (DMatrix<f64>, DMatrix<f64>, Vec<String>);

/// Splits the kernel into the maximal `J`-invariant part and its orthogonal
/// complement. Returns the two bases in hat coordinates together with any
/// ambiguity flags.
pub fn kernel_split(spec: &MapSpec, split: &PointSplit) -> Result<KernelSplit, SlantError> {
    let jmat = spec
        .j_source
        .eval(&split.point, &spec.params)
        .map_err(MapError::Geometry)?;
    let j_hat = split.source_frame.conjugate(&jmat);
    Ok(kernel_split_with(&j_hat, &split.vertical.hat))
}

/// Core of [`kernel_split`], working directly on hat-coordinate data.
pub fn kernel_split_with(j_hat: &DMatrix<f64>, kernel_hat: &DMatrix<f64>) -> KernelSplit {
    let mut flags = Vec::new();
    let k = kernel_hat.ncols();
    if k == 0 {
        let m = kernel_hat.nrows();
        return (DMatrix::zeros(m, 0), DMatrix::zeros(m, 0), flags);
    }
    // J is a g-isometry, so J(kernel basis) is orthonormal up to input error;
    // re-orthonormalize defensively.
    let j_kernel = linalg::orthonormal_span(&(j_hat * kernel_hat), 1e-10);
    let (sines, dirs) = linalg::principal_sines(kernel_hat, &j_kernel);
    for &s in &sines {
        if (D1_DETECTION_TOL..=AMBIGUITY_BAND_HIGH).contains(&s) {
            flags.push(format!(
                "principal angle {s:.3e} inside the ambiguity band [{D1_DETECTION_TOL:.0e}, {AMBIGUITY_BAND_HIGH:.0e}]"
            ));
        }
    }
    let zero_count = sines.iter().take_while(|&&s| s < D1_DETECTION_TOL).count();
    let d1 = if zero_count == 0 {
        DMatrix::zeros(kernel_hat.nrows(), 0)
    } else {
        // project the intersection directions back into the kernel span
        let raw = dirs.columns(0, zero_count).into_owned();
        let in_ker = kernel_hat * (kernel_hat.transpose() * raw);
        linalg::orthonormal_span(&in_ker, 1e-8)
    };
    let d2 = linalg::complement_within(kernel_hat, &d1);
    (d1, d2, flags)
}

/// Builds the full pointwise decomposition: `D1`, `D2`, `omega D2`, `mu`,
/// the operator matrices, the angle, and the identity residual ledger.
pub fn structure_operators(spec: &MapSpec, split: &PointSplit) -> Result<SlantDecomposition, SlantError> {
    let jmat = spec
        .j_source
        .eval(&split.point, &spec.params)
        .map_err(MapError::Geometry)?;
    let j_hat = split.source_frame.conjugate(&jmat);
    let (d1_hat, d2_hat, flags) = kernel_split_with(&j_hat, &split.vertical.hat);

    let vert = &split.vertical.hat; // m x k
    let horiz = &split.horizontal.hat; // m x r
    let k = vert.ncols();
    let r = horiz.ncols();

    let phi = vert.transpose() * &j_hat * vert;
    let omega = horiz.transpose() * &j_hat * vert;
    let b = vert.transpose() * &j_hat * horiz;
    let c = horiz.transpose() * &j_hat * horiz;

    let d1_in_ker = vert.transpose() * &d1_hat;
    let d2_in_ker = vert.transpose() * &d2_hat;
    let p_proj = &d1_in_ker * d1_in_ker.transpose();
    let q_proj = &d2_in_ker * d2_in_ker.transpose();

    // omega D2 inside the horizontal space, and its complement mu
    let omega_d2_raw = linalg::projector(horiz) * &j_hat * &d2_hat;
    let omega_d2_hat = linalg::orthonormal_span(&omega_d2_raw, 1e-8);
    let mu_hat = linalg::complement_within(horiz, &omega_d2_hat);

    // representative angle from the D2 basis directions
    let mut angles: Vec<f64> = Vec::new();
    for j in 0..d2_hat.ncols() {
        let x = d2_hat.column(j).into_owned();
        let jx = &j_hat * &x;
        let phix = vert * (vert.transpose() * &jx);
        let ratio = (phix.norm() / jx.norm()).clamp(0.0, 1.0);
        angles.push(num::acos(ratio));
    }
    let theta = median(&angles).unwrap_or(0.0);

    let mut residuals = Vec::new();
    let ik = DMatrix::identity(k, k);
    let ir = DMatrix::identity(r, r);
    residuals.push((
        "phi^2 + B omega + id".to_string(),
        linalg::max_abs(&(&phi * &phi + &b * &omega + &ik)),
    ));
    residuals.push((
        "C^2 + omega B + id".to_string(),
        linalg::max_abs(&(&c * &c + &omega * &b + &ir)),
    ));
    residuals.push((
        "omega phi + C omega".to_string(),
        linalg::max_abs(&(&omega * &phi + &c * &omega)),
    ));
    residuals.push((
        "B C + phi B".to_string(),
        linalg::max_abs(&(&b * &c + &phi * &b)),
    ));
    residuals.push((
        "J D1 = D1".to_string(),
        if d1_hat.ncols() == 0 {
            0.0
        } else {
            let jd1 = &j_hat * &d1_hat;
            linalg::max_abs(&(&jd1 - &d1_hat * (d1_hat.transpose() * &jd1)))
        },
    ));
    residuals.push((
        "omega D1 = 0".to_string(),
        linalg::max_abs(&(horiz.transpose() * &j_hat * &d1_hat)),
    ));
    residuals.push((
        "phi D2 in D2".to_string(),
        linalg::max_abs(&(d1_hat.transpose() * &j_hat * &d2_hat)),
    ));
    residuals.push((
        "B horizontal in D2".to_string(),
        linalg::max_abs(&(d1_hat.transpose() * &j_hat * horiz)),
    ));
    // B must reach all of D2
    let b_to_d2 = d2_hat.transpose() * &j_hat * horiz;
    let missing = if d2_hat.ncols() == 0 {
        0.0
    } else {
        let svd = linalg::sorted_svd(&b_to_d2);
        let rank = svd
            .singular_values
            .iter()
            .take_while(|&&s| s > 1e-8)
            .count();
        (d2_hat.ncols() - rank) as f64
    };
    residuals.push(("B horizontal covers D2".to_string(), missing));
    residuals.push((
        "mu J-invariant".to_string(),
        if mu_hat.ncols() == 0 {
            0.0
        } else {
            let jmu = &j_hat * &mu_hat;
            linalg::max_abs(&(&jmu - &mu_hat * (mu_hat.transpose() * &jmu)))
        },
    ));
    // projector algebra on the kernel
    residuals.push((
        "P^2 - P".to_string(),
        linalg::max_abs(&(&p_proj * &p_proj - &p_proj)),
    ));
    residuals.push((
        "Q^2 - Q".to_string(),
        linalg::max_abs(&(&q_proj * &q_proj - &q_proj)),
    ));
    residuals.push((
        "P Q".to_string(),
        linalg::max_abs(&(&p_proj * &q_proj)),
    ));
    residuals.push((
        "P + Q - id".to_string(),
        linalg::max_abs(&(&p_proj + &q_proj - &ik)),
    ));

    let frame = &split.source_frame;
    Ok(SlantDecomposition {
        d1: basis_from_hat(d1_hat, frame),
        d2: basis_from_hat(d2_hat, frame),
        omega_d2: basis_from_hat(omega_d2_hat, frame),
        mu: basis_from_hat(mu_hat, frame),
        split: split.clone(),
        j_hat,
        phi,
        omega,
        b,
        c,
        p_proj,
        q_proj,
        d1_in_ker,
        d2_in_ker,
        theta,
        residuals,
        flags,
    })
}

fn basis_from_hat(hat: DMatrix<f64>, frame: &linalg::OrthoFrame) -> Basis {
    Basis {
        coord: &frame.from_hat * &hat,
        hat,
    }
}

fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
    let n = sorted.len();
    Some(if !n.is_multiple_of(2) {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    })
}

/// Slant angle of a coordinate vector in `D2`, measured two ways: from the
/// norm ratio `|phi X| / |J X|` and from the quadratic form
/// `-g(X, phi^2 X) / |X|^2`.
#[derive(Debug, Clone, Copy)]
pub struct AngleSample {
    pub ratio: f64,
    pub quadratic: f64,
}

pub fn slant_angle(dec: &SlantDecomposition, x_coord: &DVector<f64>) -> Result<AngleSample, SlantError> {
    let x_hat = &dec.split.source_frame.to_hat * x_coord;
    let norm = x_hat.norm();
    if norm < 1e-12 {
        return Err(SlantError::ZeroVector);
    }
    let ratio_in_d2 = if dec.d2.dim() == 0 {
        f64::INFINITY
    } else {
        linalg::membership_residual(&dec.d2.hat, &x_hat) / norm
    };
    if ratio_in_d2 > 1e-6 {
        return Err(SlantError::NotInD2(ratio_in_d2));
    }
    let jx = &dec.j_hat * &x_hat;
    let phix = dec.phi_ambient(&x_hat);
    let ratio = num::acos((phix.norm() / jx.norm()).clamp(0.0, 1.0));
    let phi2x = dec.phi_ambient(&phix);
    let quad_val = (-x_hat.dot(&phi2x) / (norm * norm)).clamp(0.0, 1.0);
    let quadratic = num::acos(num::sqrt(quad_val));
    Ok(AngleSample { ratio, quadratic })
}

/// Aggregated slant verification over a sample set: dimensions must be
/// constant, the angle must be constant in both the vector and the point,
/// and every eigenvalue of `phi^2` restricted to `D2` must equal
/// `-cos^2(theta)`; the eigenvalue route must report the same angle as the
/// direct route.
pub fn semi_slant_verify(
    spec: &MapSpec,
    points: &[Vec<f64>],
    vectors_per_point: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<CheckReport, SlantError> {
    let mut report = CheckReport::new("semi_slant", statements::SEMI_SLANT);
    let mut sampler = VectorSampler::new(seed, "semi_slant");
    let mut dims: Vec<(usize, usize)> = Vec::new();
    let mut all_angles: Vec<f64> = Vec::new();
    let mut route_gap: Vec<f64> = Vec::new();
    let mut decs: Vec<SlantDecomposition> = Vec::new();
    for p in points {
        let split = point_split(spec, p, tol.rank_rel)?;
        let dec = structure_operators(spec, &split)?;
        for f in &dec.flags {
            report.annotations.push(f.clone());
        }
        dims.push((dec.dim_d1(), dec.dim_d2()));
        if dec.dim_d2() > 0 {
            for j in 0..dec.d2.dim() {
                let x = dec.d2.coord.column(j).into_owned();
                let a = slant_angle(&dec, &x)?;
                all_angles.push(a.ratio);
                route_gap.push(num::abs(a.ratio - a.quadratic));
            }
            for _ in 0..vectors_per_point {
                let x = sampler.unit_in_span(&dec.d2.coord);
                let a = slant_angle(&dec, &x)?;
                all_angles.push(a.ratio);
                route_gap.push(num::abs(a.ratio - a.quadratic));
            }
        }
        decs.push(dec);
    }
    let (d1_0, d2_0) = dims.first().cloned().unwrap_or((0, 0));
    let dims_constant = dims.iter().all(|&d| d == (d1_0, d2_0));
    report.set_value("dim_d1", d1_0 as f64);
    report.set_value("dim_d2", d2_0 as f64);
    report.push_row(ResidualRow::new(
        "dimension jumps",
        dims
            .iter()
            .map(|&(a, b)| {
                ((a as f64 - d1_0 as f64).abs()).max((b as f64 - d2_0 as f64).abs())
            })
            .collect(),
        0.0,
    ));
    if !dims_constant {
        let witness_idx = dims.iter().position(|&d| d != (d1_0, d2_0)).unwrap_or(0);
        report.witness = Some(Witness {
            sample: witness_idx,
            point: points[witness_idx].clone(),
            value: dims[witness_idx].0 as f64,
            label: "dimension jump".to_string(),
        });
    }

    let theta = median(&all_angles).unwrap_or(0.0);
    report.set_value("theta", theta);
    let spreads: Vec<f64> = all_angles.iter().map(|a| num::abs(a - theta)).collect();
    let spread = spreads.iter().cloned().fold(0.0, f64::max);
    report.set_value("theta_spread", spread);
    report.push_row(ResidualRow::new("angle spread about the median", spreads, tol.angle));
    report.push_row(ResidualRow::new(
        "ratio vs quadratic-form angle",
        route_gap,
        tol.angle,
    ));

    // eigen route: every eigenvalue of phi^2 restricted to D2 is -cos^2(theta)
    let cos2 = num::cos(theta) * num::cos(theta);
    let mut eig_res: Vec<f64> = Vec::new();
    let mut eig_angle_gap: Vec<f64> = Vec::new();
    for dec in &decs {
        if dec.dim_d2() == 0 {
            eig_res.push(0.0);
            eig_angle_gap.push(0.0);
            continue;
        }
        let phi2 = &dec.phi * &dec.phi;
        let restricted = dec.d2_in_ker.transpose() * phi2 * &dec.d2_in_ker;
        let (vals, skew) = linalg::symmetric_eigenvalues(&restricted);
        let worst = vals
            .iter()
            .map(|l| num::abs(l + cos2))
            .fold(0.0, f64::max)
            .max(skew);
        eig_res.push(worst);
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        let theta_eig = num::acos(num::sqrt((-mean).clamp(0.0, 1.0)));
        eig_angle_gap.push(num::abs(theta_eig - theta));
    }
    report.push_row(ResidualRow::new(
        "phi^2 + cos^2(theta) id on D2",
        eig_res,
        tol.eigen,
    ));
    report.push_row(ResidualRow::new(
        "eigenvalue route vs direct angle",
        eig_angle_gap,
        tol.angle,
    ));
    if d2_0 == 0 && dims_constant {
        report
            .annotations
            .push("kernel is J-invariant: no slant directions, angle defaults to 0".to_string());
    }
    report.settle();
    if !dims_constant {
        report.verdict = crate::report::Verdict::Fail;
    }
    Ok(report)
}

/// Aggregates the pointwise structural-identity ledger over the sample set.
pub fn structure_identities_check(
    spec: &MapSpec,
    points: &[Vec<f64>],
    tol: &Tolerances,
) -> Result<CheckReport, SlantError> {
    let mut report = CheckReport::new("structure", statements::STRUCTURE);
    let mut columns: Vec<(String, Vec<f64>)> = Vec::new();
    for p in points {
        let split = point_split(spec, p, tol.rank_rel)?;
        let dec = structure_operators(spec, &split)?;
        if columns.is_empty() {
            columns = dec
                .residuals
                .iter()
                .map(|(label, _)| (label.clone(), Vec::with_capacity(points.len())))
                .collect();
        }
        for (slot, (_, value)) in columns.iter_mut().zip(dec.residuals.iter()) {
            slot.1.push(*value);
        }
    }
    for (label, series) in columns {
        // projector algebra and subspace residuals are algebraic; the
        // defining identities of the operators likewise
        report.push_row(ResidualRow::new(label, series, tol.algebraic));
    }
    report.settle();
    Ok(report)
}

/// Orthonormal frame adapted to the decomposition blocks.
#[derive(Debug, Clone)]
pub struct AdaptedFrame {
    /// Pair counts for `D1`, `D2`, and `mu`.
    pub k: usize,
    pub s: usize,
    pub t: usize,
    /// Frame vectors in hat coordinates, grouped `D1 | D2 | omega D2 | mu`.
    pub vectors: DMatrix<f64>,
    pub group_sizes: [usize; 4],
    pub gram_residual: f64,
    pub annotations: Vec<String>,
}

/// Builds the adapted frame `{e_i, J e_i} ∪ {f_j, sec(θ) φ f_j} ∪
/// {csc(θ) ω f_j, csc(θ) sec(θ) ω φ f_j} ∪ {g_l, J g_l}`.
///
/// Requires `θ` strictly between 0 and a right angle when `D2` is nonempty.
pub fn adapted_frame(dec: &SlantDecomposition) -> Result<AdaptedFrame, SlantError> {
    let theta = dec.theta;
    let m = dec.j_hat.nrows();
    let d2_dim = dec.dim_d2();
    if d2_dim > 0 {
        if num::abs(theta - core::f64::consts::FRAC_PI_2) < 1e-9 {
            return Err(SlantError::RightAngle);
        }
        if theta < 1e-9 {
            return Err(SlantError::ZeroAngleWithSlantDirections);
        }
        if !d2_dim.is_multiple_of(2) {
            return Err(SlantError::OddBlock(d2_dim));
        }
    }
    if !dec.dim_d1().is_multiple_of(2) {
        return Err(SlantError::OddBlock(dec.dim_d1()));
    }
    if !dec.mu.dim().is_multiple_of(2) {
        return Err(SlantError::OddBlock(dec.mu.dim()));
    }

    let mut annotations = Vec::new();
    let vert_proj = linalg::projector(&dec.split.vertical.hat);
    let horiz_proj = linalg::projector(&dec.split.horizontal.hat);
    let phi_of = |x: &DVector<f64>| &vert_proj * (&dec.j_hat * x);
    let omega_of = |x: &DVector<f64>| &horiz_proj * (&dec.j_hat * x);

    // invariant blocks pair each vector with its J-image
    let d1_pairs = pair_block(&dec.d1.hat, &dec.j_hat)?;
    let mu_pairs = pair_block(&dec.mu.hat, &dec.j_hat)?;

    // slant block pairs f with sec(theta) phi f, and spawns the omega pair
    let sec = 1.0 / num::cos(theta);
    let csc = 1.0 / num::sin(theta);
    let s = d2_dim / 2;
    let mut d2_vectors: Vec<DVector<f64>> = Vec::new();
    let mut omega_vectors: Vec<DVector<f64>> = Vec::new();
    let mut remaining = dec.d2.hat.clone();
    for _ in 0..s {
        if remaining.ncols() == 0 {
            return Err(SlantError::OddBlock(d2_dim));
        }
        let f = remaining.column(0).into_owned();
        let f = &f / f.norm();
        let partner = phi_of(&f) * sec;
        d2_vectors.push(f.clone());
        d2_vectors.push(partner.clone());
        omega_vectors.push(omega_of(&f) * csc);
        omega_vectors.push(omega_of(&partner) * csc);
        let span = DMatrix::from_columns(&[f, partner]);
        let rest = &remaining - &span * (span.transpose() * &remaining);
        remaining = linalg::orthonormal_span(&rest, 0.5);
    }
    if s > 0 {
        annotations.push(format!(
            "omega D2 frame has {} vectors; the classical listing names only {s} of them",
            2 * s
        ));
    }

    let group_sizes = [
        d1_pairs.len(),
        d2_vectors.len(),
        omega_vectors.len(),
        mu_pairs.len(),
    ];
    let total = group_sizes.iter().sum::<usize>();
    let mut vectors = DMatrix::zeros(m, total);
    for (idx, v) in d1_pairs
        .iter()
        .chain(d2_vectors.iter())
        .chain(omega_vectors.iter())
        .chain(mu_pairs.iter())
        .enumerate()
    {
        vectors.set_column(idx, v);
    }
    let gram = vectors.transpose() * &vectors;
    let gram_residual = linalg::max_abs(&(gram - DMatrix::identity(total, total)));
    Ok(AdaptedFrame {
        k: d1_pairs.len() / 2,
        s,
        t: mu_pairs.len() / 2,
        vectors,
        group_sizes,
        gram_residual,
        annotations,
    })
}

/// Groups a J-invariant block into `{e, Je}` pairs.
fn pair_block(basis: &DMatrix<f64>, j_hat: &DMatrix<f64>) -> Result<Vec<DVector<f64>>, SlantError> {
    let dim = basis.ncols();
    if !dim.is_multiple_of(2) {
        return Err(SlantError::OddBlock(dim));
    }
    let mut out: Vec<DVector<f64>> = Vec::new();
    let mut remaining = basis.clone();
    while out.len() < dim {
        if remaining.ncols() == 0 {
            return Err(SlantError::OddBlock(dim));
        }
        let e = remaining.column(0).into_owned();
        let e = &e / e.norm();
        let mut je = j_hat * &e;
        // clean up numerical drift against e
        let d = e.dot(&je);
        je -= &e * d;
        let je = &je / je.norm();
        out.push(e.clone());
        out.push(je.clone());
        let span = DMatrix::from_columns(&[e, je]);
        let rest = &remaining - &span * (span.transpose() * &remaining);
        remaining = linalg::orthonormal_span(&rest, 0.5);
    }
    Ok(out)
}

/// Wraps [`adapted_frame`] into a check report (not-applicable at a right
/// angle).
pub fn adapted_frame_check(dec_per_point: &[SlantDecomposition], tol: &Tolerances) -> CheckReport {
    let mut report = CheckReport::new("frame", statements::ADAPTED_FRAME);
    let mut residuals = Vec::with_capacity(dec_per_point.len());
    for dec in dec_per_point {
        match adapted_frame(dec) {
            Ok(frame) => {
                residuals.push(frame.gram_residual);
                for a in frame.annotations {
                    if !report.annotations.contains(&a) {
                        report.annotations.push(a);
                    }
                }
                report.set_value("pairs_d1", frame.k as f64);
                report.set_value("pairs_d2", frame.s as f64);
                report.set_value("pairs_mu", frame.t as f64);
            }
            Err(SlantError::RightAngle) => {
                return CheckReport::not_applicable(
                    "frame",
                    statements::ADAPTED_FRAME,
                    "slant angle is a right angle; sec(theta) is undefined",
                );
            }
            Err(e) => {
                report.annotations.push(format!("frame construction failed: {e}"));
                report.verdict = crate::report::Verdict::Fail;
                return report;
            }
        }
    }
    report.push_row(ResidualRow::new(
        "frame Gram - id",
        residuals,
        tol.algebraic,
    ));
    report.settle();
    report
}

/// Residual of `(JP + sec(θ) φ Q)^2 + id` on the kernel.
pub fn jhat_residual(dec: &SlantDecomposition) -> Result<f64, SlantError> {
    let k = dec.phi.nrows();
    if k == 0 {
        return Ok(0.0);
    }
    if dec.dim_d2() > 0 && num::abs(dec.theta - core::f64::consts::FRAC_PI_2) < 1e-9 {
        return Err(SlantError::RightAngle);
    }
    let sec = if dec.dim_d2() == 0 {
        1.0
    } else {
        1.0 / num::cos(dec.theta)
    };
    let jhat = &dec.phi * (&dec.p_proj + &dec.q_proj * sec);
    let resid = linalg::max_abs(&(&jhat * &jhat + DMatrix::identity(k, k)));
    Ok(resid)
}

/// Verifies the induced complex structure on the fibers over the sample set.
pub fn jhat_check(dec_per_point: &[SlantDecomposition], tol: &Tolerances) -> CheckReport {
    let mut residuals = Vec::with_capacity(dec_per_point.len());
    for dec in dec_per_point {
        match jhat_residual(dec) {
            Ok(r) => residuals.push(r),
            Err(SlantError::RightAngle) => {
                return CheckReport::not_applicable(
                    "jhat",
                    statements::JHAT,
                    "slant angle is a right angle; sec(theta) is undefined",
                );
            }
            Err(e) => {
                let mut rep = CheckReport::new("jhat", statements::JHAT);
                rep.annotations.push(format!("failed: {e}"));
                rep.verdict = crate::report::Verdict::Fail;
                return rep;
            }
        }
    }
    let mut report = CheckReport::new("jhat", statements::JHAT);
    report.push_row(ResidualRow::new(
        "Jhat^2 + id on ker",
        residuals,
        tol.algebraic,
    ));
    report.settle();
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::expr::{Expr, ParamSet};
    use crate::geometry::{canonical_j, MetricField};
    use crate::map::SampleBox;
    use alloc::vec;
    use approx::assert_abs_diff_eq;
    use core::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_6, PI};

    fn decompose(spec: &MapSpec, p: &[f64]) -> SlantDecomposition {
        let split = point_split(spec, p, 1e-8).unwrap();
        structure_operators(spec, &split).unwrap()
    }

    #[test]
    fn invariant_complement_split_of_classic_example() {
        let spec = catalog::builtin("ex5_7", &ParamSet::new()).unwrap();
        let dec = decompose(&spec, &[0.1; 8]);
        assert_eq!(dec.dim_d1(), 2);
        assert_eq!(dec.dim_d2(), 2);
        // D1 is the x7/x8 plane
        for j in 0..2 {
            let col = dec.d1.coord.column(j);
            for i in 0..6 {
                assert_abs_diff_eq!(col[i], 0.0, epsilon = 1e-9);
            }
        }
        assert_abs_diff_eq!(dec.theta, FRAC_PI_4, epsilon = 1e-12);
    }

    #[test]
    fn tall_example_dimensions_and_right_angle() {
        let spec = catalog::builtin("ex5_9", &ParamSet::new()).unwrap();
        let dec = decompose(&spec, &[0.05; 10]);
        assert_eq!((dec.dim_d1(), dec.dim_d2()), (4, 1));
        assert_abs_diff_eq!(dec.theta, FRAC_PI_2, epsilon = 1e-12);
        assert!(matches!(adapted_frame(&dec), Err(SlantError::RightAngle)));
    }

    #[test]
    fn fully_invariant_kernel_has_no_slant_part() {
        // (x3, x4) on R^4: kernel = span{d1, d2} is J-invariant
        let components = vec![
            Expr::parse("x3", 4).unwrap(),
            Expr::parse("x4", 4).unwrap(),
        ];
        let spec = MapSpec::new(
            "invariant",
            4,
            2,
            components,
            MetricField::Euclidean(4),
            MetricField::Euclidean(2),
            canonical_j(4).unwrap(),
            ParamSet::new(),
            SampleBox::cube(4, -1.0, 1.0),
            None,
        )
        .unwrap();
        let dec = decompose(&spec, &[0.2, -0.3, 0.4, 0.6]);
        assert_eq!((dec.dim_d1(), dec.dim_d2()), (2, 0));
        assert_abs_diff_eq!(dec.theta, 0.0);
        // Jhat reduces to J on the kernel
        assert_abs_diff_eq!(jhat_residual(&dec).unwrap(), 0.0, epsilon = 1e-12);
        // the adapted frame consists of the invariant pairs alone
        let frame = adapted_frame(&dec).unwrap();
        assert_eq!(frame.group_sizes, [2, 0, 0, 2]);
        assert!(frame.gram_residual < 1e-12);
    }

    #[test]
    fn structure_operator_on_classic_example_matches_projection() {
        // phi(d3) has norm 1/sqrt(2) and is proportional to
        // d4 - cos(a) d5 - sin(a) d6
        let a = FRAC_PI_6;
        let spec = catalog::builtin("ex5_7", &ParamSet::new()).unwrap();
        let dec = decompose(&spec, &[0.0; 8]);
        let mut x = DVector::zeros(8);
        x[2] = 1.0; // d3
        let x_hat = &dec.split.source_frame.to_hat * &x;
        let phix = dec.phi_ambient(&x_hat);
        assert_abs_diff_eq!(phix.norm(), 1.0 / 2f64.sqrt(), epsilon = 1e-10);
        let mut expected = DVector::zeros(8);
        expected[3] = 1.0;
        expected[4] = -a.cos();
        expected[5] = -a.sin();
        expected /= expected.norm();
        let cosine = phix.dot(&expected) / phix.norm();
        assert_abs_diff_eq!(cosine.abs(), 1.0, epsilon = 1e-10);
        // omega vanishes on D1
        let omega_d1 = &dec.omega * &dec.d1_in_ker;
        assert_abs_diff_eq!(linalg::max_abs(&omega_d1), 0.0, epsilon = 1e-10);
    }

    #[test]
    fn structural_identity_residuals_are_tiny_on_catalog() {
        for name in ["ex5_7", "ex5_8", "ex5_9", "ex5_10", "ex5_11", "polar4", "radial2", "warped_slant"] {
            let spec = catalog::builtin(name, &ParamSet::new()).unwrap();
            let p: Vec<f64> = spec.sample_box.embed(&vec![0.4; spec.dim_source]);
            let dec = decompose(&spec, &p);
            for (label, value) in &dec.residuals {
                assert!(
                    *value <= 1e-9,
                    "{name}: identity `{label}` residual {value}"
                );
            }
        }
    }

    #[test]
    fn slant_angle_of_two_parameter_example() {
        let params = ParamSet::new().with("alpha", FRAC_PI_6).with("beta", FRAC_PI_6);
        let spec = catalog::builtin("ex5_11", &params).unwrap();
        let dec = decompose(&spec, &[0.0; 8]);
        let a = FRAC_PI_6;
        let mut x = DVector::zeros(8);
        x[2] = a.sin();
        x[4] = a.cos();
        let sample = slant_angle(&dec, &x).unwrap();
        assert_abs_diff_eq!(sample.ratio, FRAC_PI_6, epsilon = 1e-10);
        assert_abs_diff_eq!(sample.quadratic, FRAC_PI_6, epsilon = 1e-10);
    }

    #[test]
    fn slant_angle_rejects_vectors_outside_d2() {
        let spec = catalog::builtin("ex5_7", &ParamSet::new()).unwrap();
        let dec = decompose(&spec, &[0.0; 8]);
        let mut x = DVector::zeros(8);
        x[6] = 1.0; // D1 direction
        assert!(matches!(
            slant_angle(&dec, &x),
            Err(SlantError::NotInD2(_))
        ));
        assert!(matches!(
            slant_angle(&dec, &DVector::zeros(8)),
            Err(SlantError::ZeroVector)
        ));
    }

    #[test]
    fn verify_passes_on_constant_angle_examples() {
        let cases = [
            ("ex5_7", 2.0, 2.0, FRAC_PI_4),
            ("ex5_10", 2.0, 4.0, FRAC_PI_4),
            ("ex5_9", 4.0, 1.0, FRAC_PI_2),
            ("polar4", 0.0, 2.0, FRAC_PI_2),
        ];
        for (name, d1, d2, theta) in cases {
            let spec = catalog::builtin(name, &ParamSet::new()).unwrap();
            let points: Vec<Vec<f64>> = crate::sample::halton_points(spec.dim_source, 6)
                .iter()
                .map(|u| spec.sample_box.embed(u))
                .collect();
            let rep = semi_slant_verify(&spec, &points, 4, 42, &Tolerances::default()).unwrap();
            assert_eq!(rep.verdict, crate::report::Verdict::Pass, "{name}");
            assert_abs_diff_eq!(rep.values["dim_d1"], d1, epsilon = 0.0);
            assert_abs_diff_eq!(rep.values["dim_d2"], d2, epsilon = 0.0);
            assert_abs_diff_eq!(rep.values["theta"], theta, epsilon = 1e-9);
        }
    }

    #[test]
    fn verify_fails_on_tilted_kernel_map() {
        // (x3 + x1^2/2, x4) has a kernel that tilts with x1, so the angle
        // moves across the box
        let components = vec![
            Expr::parse("x3 + x1^2/2", 4).unwrap(),
            Expr::parse("x4", 4).unwrap(),
        ];
        let mut sample_box = SampleBox::cube(4, -1.0, 1.0);
        sample_box.min[0] = 0.5;
        sample_box.max[0] = 1.5;
        let spec = MapSpec::new(
            "tilted",
            4,
            2,
            components,
            MetricField::Euclidean(4),
            MetricField::Euclidean(2),
            canonical_j(4).unwrap(),
            ParamSet::new(),
            sample_box,
            None,
        )
        .unwrap();
        let points: Vec<Vec<f64>> = crate::sample::halton_points(4, 8)
            .iter()
            .map(|u| spec.sample_box.embed(u))
            .collect();
        let rep = semi_slant_verify(&spec, &points, 4, 42, &Tolerances::default()).unwrap();
        assert_eq!(rep.verdict, crate::report::Verdict::Fail);
        assert!(rep.values["theta_spread"] > 1e-2);
    }

    #[test]
    fn adapted_frame_of_classic_example() {
        let spec = catalog::builtin("ex5_7", &ParamSet::new()).unwrap();
        let dec = decompose(&spec, &[0.0; 8]);
        let frame = adapted_frame(&dec).unwrap();
        assert_eq!(frame.group_sizes, [2, 2, 2, 2]);
        assert_eq!((frame.k, frame.s, frame.t), (1, 1, 1));
        assert!(frame.gram_residual < 1e-9, "gram {}", frame.gram_residual);
    }

    #[test]
    fn adapted_frame_groups_of_wide_slant_example() {
        let spec = catalog::builtin("ex5_10", &ParamSet::new()).unwrap();
        let dec = decompose(&spec, &[0.0; 10]);
        let frame = adapted_frame(&dec).unwrap();
        assert_eq!(frame.group_sizes, [2, 4, 4, 0]);
        assert!(frame.gram_residual < 1e-9);
    }

    #[test]
    fn jhat_is_a_complex_structure_on_proper_angles() {
        for name in ["ex5_7", "ex5_8", "ex5_10", "ex5_11", "warped_slant"] {
            let spec = catalog::builtin(name, &ParamSet::new()).unwrap();
            let p: Vec<f64> = spec.sample_box.embed(&vec![0.3; spec.dim_source]);
            let dec = decompose(&spec, &p);
            let r = jhat_residual(&dec).unwrap();
            assert!(r < 1e-9, "{name}: residual {r}");
        }
    }

    #[test]
    fn warped_product_instance_has_slant_angle_alpha() {
        let params = ParamSet::new().with("alpha", PI / 3.0);
        let spec = catalog::builtin("warped_slant", &params).unwrap();
        let dec = decompose(&spec, &[0.1, -0.2, 0.3, 0.2, -0.1, 0.15]);
        assert_eq!((dec.dim_d1(), dec.dim_d2()), (2, 2));
        assert_abs_diff_eq!(dec.theta, PI / 3.0, epsilon = 1e-10);
    }
}
