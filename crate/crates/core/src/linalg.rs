//! Dense linear-algebra helpers shared by the geometric modules.
//!
//! Everything here works on small dynamically sized matrices (dimensions are
//! bounded by the source/target dimensions of the map, ten or so). Bases are
//! stored column-wise. "Hat" coordinates refer to components in a
//! metric-orthonormal frame: for a metric matrix `G = L Lᵀ` the frame columns
//! are `L^{-T}`, so `v̂ = Lᵀ v` and Euclidean inner products of hatted vectors
//! equal `g`-inner products of the originals.
//!
//! Decompositions are one-sided (SVD) and classical (symmetric eigen) Jacobi
//! iterations. At these sizes they are exact to working precision even for
//! repeated singular values and rank-deficient inputs, and they produce full
//! orthogonal factors, which the splitting code needs for kernel and
//! co-range bases.

use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::num;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix of size {0}x{0} is not positive definite")]
    NotPositiveDefinite(usize),
    #[error("matrix is numerically singular")]
    Singular,
}

/// Change of basis between coordinate components and metric-orthonormal
/// ("hat") components at a point.
#[derive(Debug, Clone)]
pub struct OrthoFrame {
    /// `Lᵀ`, mapping coordinate components to hat components.
    pub to_hat: DMatrix<f64>,
    /// `L^{-T}`, mapping hat components back to coordinates.
    pub from_hat: DMatrix<f64>,
}

impl OrthoFrame {
    pub fn identity(n: usize) -> Self {
        OrthoFrame {
            to_hat: DMatrix::identity(n, n),
            from_hat: DMatrix::identity(n, n),
        }
    }

    /// Builds the frame from a symmetric positive definite metric matrix.
    pub fn from_metric(g: &DMatrix<f64>) -> Result<Self, LinalgError> {
        let n = g.nrows();
        let chol = nalgebra::Cholesky::new(g.clone())
            .ok_or(LinalgError::NotPositiveDefinite(n))?;
        let lt = chol.l().transpose();
        let from_hat = lt.clone().try_inverse().ok_or(LinalgError::Singular)?;
        Ok(OrthoFrame {
            to_hat: lt,
            from_hat,
        })
    }

    /// Matrix of a coordinate-space endomorphism expressed in the frame.
    pub fn conjugate(&self, a: &DMatrix<f64>) -> DMatrix<f64> {
        &self.to_hat * a * &self.from_hat
    }
}

/// Singular value decomposition `A = U Σ Vᵀ` with full square orthogonal
/// factors and singular values sorted descending.
pub struct SortedSvd {
    /// Full `nrows x nrows` orthogonal factor.
    pub u: DMatrix<f64>,
    /// `min(nrows, ncols)` values, descending.
    pub singular_values: Vec<f64>,
    /// Full `ncols x ncols` orthogonal factor.
    pub v: DMatrix<f64>,
}

/// One-sided Jacobi SVD. The working columns are rotated until mutually
/// orthogonal; their norms are the singular values and the accumulated
/// rotations form `V`. Null directions are completed to full orthogonal
/// factors by re-orthogonalized Gram-Schmidt against coordinate axes, so the
/// factors are deterministic for a given input.
pub fn sorted_svd(a: &DMatrix<f64>) -> SortedSvd {
    let (rows, cols) = a.shape();
    if rows < cols {
        // factor the transpose and swap the roles of U and V
        let t = sorted_svd(&a.transpose());
        return SortedSvd {
            u: t.v,
            singular_values: t.singular_values,
            v: t.u,
        };
    }
    let mut w = a.clone();
    let mut v = DMatrix::identity(cols, cols);
    let eps = 1e-15;
    for _sweep in 0..100 {
        let mut rotated = false;
        for p in 0..cols {
            for q in (p + 1)..cols {
                let wp = w.column(p);
                let wq = w.column(q);
                let alpha = wp.dot(&wp);
                let beta = wq.dot(&wq);
                let gamma = wp.dot(&wq);
                if num::abs(gamma) <= eps * num::sqrt(alpha * beta) || gamma == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = {
                    let s = if zeta >= 0.0 { 1.0 } else { -1.0 };
                    s / (num::abs(zeta) + num::sqrt(1.0 + zeta * zeta))
                };
                let c = 1.0 / num::sqrt(1.0 + t * t);
                let s = c * t;
                for i in 0..rows {
                    let wip = w[(i, p)];
                    let wiq = w[(i, q)];
                    w[(i, p)] = c * wip - s * wiq;
                    w[(i, q)] = s * wip + c * wiq;
                }
                for i in 0..cols {
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = c * vip - s * viq;
                    v[(i, q)] = s * vip + c * viq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    // norms, sorted descending
    let mut norms: Vec<f64> = (0..cols).map(|j| w.column(j).norm()).collect();
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&i, &j| {
        norms[j]
            .partial_cmp(&norms[i])
            .unwrap_or(core::cmp::Ordering::Equal)
    });
    let mut v_sorted = DMatrix::zeros(cols, cols);
    let mut w_sorted = DMatrix::zeros(rows, cols);
    for (dst, &src) in order.iter().enumerate() {
        v_sorted.set_column(dst, &v.column(src));
        w_sorted.set_column(dst, &w.column(src));
    }
    norms.sort_by(|x, y| y.partial_cmp(x).unwrap_or(core::cmp::Ordering::Equal));
    // normalize the nonzero columns into U, then complete to a full factor
    let smax = norms.first().cloned().unwrap_or(0.0);
    let floor = smax * 1e-14;
    let mut u_cols: Vec<DVector<f64>> = Vec::with_capacity(rows);
    for (j, &norm) in norms.iter().enumerate() {
        if norm > floor && norm > 0.0 {
            u_cols.push(w_sorted.column(j).into_owned() / norm);
        }
    }
    complete_orthonormal(&mut u_cols, rows);
    let mut u = DMatrix::zeros(rows, rows);
    for (j, col) in u_cols.iter().enumerate() {
        u.set_column(j, col);
    }
    SortedSvd {
        u,
        singular_values: norms,
        v: v_sorted,
    }
}

/// Extends a set of orthonormal columns to a full orthonormal basis of
/// `R^dim` using coordinate axes, with one re-orthogonalization pass.
fn complete_orthonormal(cols: &mut Vec<DVector<f64>>, dim: usize) {
    let mut axis = 0;
    while cols.len() < dim && axis < dim {
        let mut cand = DVector::zeros(dim);
        cand[axis] = 1.0;
        axis += 1;
        for _ in 0..2 {
            for c in cols.iter() {
                let d = c.dot(&cand);
                cand -= c * d;
            }
        }
        let n = cand.norm();
        if n > 0.5 {
            cols.push(cand / n);
        }
    }
    debug_assert_eq!(cols.len(), dim, "orthonormal completion fell short");
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_symmetric_eigenvalue(g: &DMatrix<f64>) -> f64 {
    symmetric_eigenvalues(g)
        .0
        .first()
        .cloned()
        .unwrap_or(f64::INFINITY)
}

/// Eigenvalues of the symmetric part of a square matrix, sorted ascending,
/// together with the asymmetry residual `max |A - Aᵀ|`. Classical Jacobi
/// rotations; exact to working precision at these sizes.
pub fn symmetric_eigenvalues(a: &DMatrix<f64>) -> (Vec<f64>, f64) {
    let n = a.nrows();
    if n == 0 {
        return (Vec::new(), 0.0);
    }
    let skew = max_abs(&(a - a.transpose()));
    let mut m = (a + a.transpose()) * 0.5;
    for _sweep in 0..100 {
        let mut off: f64 = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(num::abs(m[(p, q)]));
            }
        }
        let scale = (0..n).fold(0.0_f64, |acc, i| acc.max(num::abs(m[(i, i)])));
        if off <= 1e-15 * scale.max(1e-300) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if num::abs(apq) <= 1e-18 * scale.max(1e-300) {
                    continue;
                }
                let app = m[(p, p)];
                let aqq = m[(q, q)];
                let zeta = (aqq - app) / (2.0 * apq);
                let t = {
                    let s = if zeta >= 0.0 { 1.0 } else { -1.0 };
                    s / (num::abs(zeta) + num::sqrt(1.0 + zeta * zeta))
                };
                let c = 1.0 / num::sqrt(1.0 + t * t);
                let s = c * t;
                for i in 0..n {
                    let mip = m[(i, p)];
                    let miq = m[(i, q)];
                    m[(i, p)] = c * mip - s * miq;
                    m[(i, q)] = s * mip + c * miq;
                }
                for i in 0..n {
                    let mpi = m[(p, i)];
                    let mqi = m[(q, i)];
                    m[(p, i)] = c * mpi - s * mqi;
                    m[(q, i)] = s * mpi + c * mqi;
                }
            }
        }
    }
    let mut vals: Vec<f64> = (0..n).map(|i| m[(i, i)]).collect();
    vals.sort_by(|x, y| x.partial_cmp(y).unwrap_or(core::cmp::Ordering::Equal));
    (vals, skew)
}

/// Orthonormal basis of the column span, keeping directions whose singular
/// value exceeds `rel_tol` times the largest one. Returns an `m x rank`
/// matrix (possibly zero columns).
pub fn orthonormal_span(a: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    if a.ncols() == 0 {
        return DMatrix::zeros(a.nrows(), 0);
    }
    let svd = sorted_svd(a);
    let smax = svd.singular_values.first().cloned().unwrap_or(0.0);
    if smax == 0.0 {
        return DMatrix::zeros(a.nrows(), 0);
    }
    let rank = svd
        .singular_values
        .iter()
        .take_while(|&&s| s > rel_tol * smax)
        .count();
    svd.u.columns(0, rank).into_owned()
}

/// Orthogonal projector `B Bᵀ` onto the span of the orthonormal columns of `b`.
pub fn projector(b: &DMatrix<f64>) -> DMatrix<f64> {
    if b.ncols() == 0 {
        return DMatrix::zeros(b.nrows(), b.nrows());
    }
    b * b.transpose()
}

/// Residual of `v` against the span of the orthonormal columns of `b`.
pub fn membership_residual(b: &DMatrix<f64>, v: &DVector<f64>) -> f64 {
    let proj = if b.ncols() == 0 {
        DVector::zeros(v.len())
    } else {
        b * (b.transpose() * v)
    };
    (v - proj).amax()
}

/// Sines of the principal angles between two subspaces given by orthonormal
/// column bases, sorted ascending, together with the corresponding principal
/// directions of the second subspace (ambient coordinates, one column per
/// angle).
///
/// Small angles are resolved through the residual matrix `U2 - U1 (U1ᵀ U2)`,
/// whose singular values are the sines; this stays accurate where the cosine
/// formulation loses all precision.
pub fn principal_sines(u1: &DMatrix<f64>, u2: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    if u1.ncols() == 0 || u2.ncols() == 0 {
        return (Vec::new(), DMatrix::zeros(u2.nrows(), 0));
    }
    let c = u1.transpose() * u2;
    let r = u2 - u1 * c;
    let svd = sorted_svd(&r);
    let k = svd.singular_values.len();
    let mut sines: Vec<f64> = Vec::with_capacity(k);
    let mut dirs = DMatrix::zeros(u2.nrows(), k);
    // sorted_svd is descending; we want ascending angles.
    for (dst, src) in (0..k).rev().enumerate() {
        sines.push(svd.singular_values[src].min(1.0));
        let dir = u2 * svd.v.column(src);
        dirs.set_column(dst, &dir);
    }
    (sines, dirs)
}

/// Orthonormal basis of the part of `ambient` orthogonal to `sub`.
/// Both arguments must have orthonormal columns with `span(sub)` inside
/// `span(ambient)`.
pub fn complement_within(ambient: &DMatrix<f64>, sub: &DMatrix<f64>) -> DMatrix<f64> {
    if sub.ncols() == 0 {
        return ambient.clone();
    }
    let residual = ambient - sub * (sub.transpose() * ambient);
    let svd = sorted_svd(&residual);
    let smax = svd.singular_values.first().cloned().unwrap_or(0.0);
    if smax < 1e-10 {
        return DMatrix::zeros(ambient.nrows(), 0);
    }
    let rank = svd
        .singular_values
        .iter()
        .take_while(|&&s| s > 0.5 * smax)
        .count();
    svd.u.columns(0, rank).into_owned()
}

/// Largest absolute entry of a matrix; zero for empty matrices.
pub fn max_abs(a: &DMatrix<f64>) -> f64 {
    if a.is_empty() {
        0.0
    } else {
        a.amax()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn frame_orthonormalizes_metric() {
        let g = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let f = OrthoFrame::from_metric(&g).unwrap();
        // columns of from_hat are g-orthonormal
        let gram = f.from_hat.transpose() * &g * &f.from_hat;
        assert_abs_diff_eq!(gram, DMatrix::identity(2, 2), epsilon = 1e-12);
        // to_hat and from_hat are inverses
        let id = &f.to_hat * &f.from_hat;
        assert_abs_diff_eq!(id, DMatrix::identity(2, 2), epsilon = 1e-12);
    }

    #[test]
    fn jacobi_svd_reconstructs_and_is_orthogonal() {
        let a = DMatrix::from_row_slice(
            3,
            4,
            &[1.0, 2.0, 0.5, -1.0, 0.0, 1.0, -2.0, 0.3, 4.0, -0.7, 0.2, 0.9],
        );
        let svd = sorted_svd(&a);
        assert_eq!(svd.u.shape(), (3, 3));
        assert_eq!(svd.v.shape(), (4, 4));
        assert_abs_diff_eq!(
            (svd.u.transpose() * &svd.u - DMatrix::identity(3, 3)).amax(),
            0.0,
            epsilon = 1e-13
        );
        assert_abs_diff_eq!(
            (svd.v.transpose() * &svd.v - DMatrix::identity(4, 4)).amax(),
            0.0,
            epsilon = 1e-13
        );
        let mut sigma = DMatrix::zeros(3, 4);
        for (i, s) in svd.singular_values.iter().enumerate() {
            sigma[(i, i)] = *s;
        }
        let recon = &svd.u * sigma * svd.v.transpose();
        assert_abs_diff_eq!((recon - a).amax(), 0.0, epsilon = 1e-13);
        // descending
        for w in svd.singular_values.windows(2) {
            assert!(w[0] >= w[1]);
        }
    }

    #[test]
    fn jacobi_svd_exact_on_rank_deficient_projector() {
        // I - V Vᵀ for orthonormal V has singular values exactly {1, 0}
        let v = DMatrix::from_column_slice(4, 2, &[0.5, 0.5, 0.5, 0.5, 0.5, -0.5, 0.5, -0.5]);
        let proj = DMatrix::identity(4, 4) - &v * v.transpose();
        let svd = sorted_svd(&proj);
        assert_abs_diff_eq!(svd.singular_values[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(svd.singular_values[1], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(svd.singular_values[2], 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(svd.singular_values[3], 0.0, epsilon = 1e-14);
    }

    #[test]
    fn zero_matrix_svd() {
        let a = DMatrix::zeros(3, 2);
        let svd = sorted_svd(&a);
        assert_eq!(svd.singular_values, alloc::vec![0.0, 0.0]);
        assert_abs_diff_eq!(
            (svd.u.transpose() * &svd.u - DMatrix::identity(3, 3)).amax(),
            0.0,
            epsilon = 1e-14
        );
    }

    #[test]
    fn symmetric_eigen_matches_hand_values() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let (vals, skew) = symmetric_eigenvalues(&a);
        assert_abs_diff_eq!(vals[0], 1.0, epsilon = 1e-13);
        assert_abs_diff_eq!(vals[1], 3.0, epsilon = 1e-13);
        assert_eq!(skew, 0.0);
    }

    #[test]
    fn principal_sines_detect_intersection() {
        // span{e1, e2} vs span{e1, e3} in R^3: angles {0, pi/2}
        let u1 = DMatrix::from_column_slice(3, 2, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let u2 = DMatrix::from_column_slice(3, 2, &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        let (sines, dirs) = principal_sines(&u1, &u2);
        assert_eq!(sines.len(), 2);
        assert_abs_diff_eq!(sines[0], 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(sines[1], 1.0, epsilon = 1e-14);
        // direction of the zero angle is e1
        assert_abs_diff_eq!(dirs.column(0)[0].abs(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn complement_is_orthogonal() {
        let ambient = DMatrix::identity(3, 3);
        let sub = DMatrix::from_column_slice(3, 1, &[1.0, 0.0, 0.0]);
        let comp = complement_within(&ambient, &sub);
        assert_eq!(comp.ncols(), 2);
        assert_abs_diff_eq!((sub.transpose() * &comp).amax(), 0.0, epsilon = 1e-12);
        // complement of a full span is empty
        let full = complement_within(&ambient, &ambient);
        assert_eq!(full.ncols(), 0);
    }

    #[test]
    fn span_rank_detection() {
        // two copies of the same direction span a line
        let a = DMatrix::from_column_slice(3, 2, &[1.0, 1.0, 0.0, 2.0, 2.0, 0.0]);
        let b = orthonormal_span(&a, 1e-10);
        assert_eq!(b.ncols(), 1);
    }
}
