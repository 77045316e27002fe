//! Connection-level invariants on the catalog metrics: symmetry of the
//! coefficients, metric compatibility, torsion-freeness, and the exact
//! period-four behaviour of the canonical structure.

use nalgebra::{DMatrix, DVector};
use semislant_core::catalog;
use semislant_core::expr::ParamSet;
use semislant_core::geometry::{
    canonical_j, christoffel, covariant_derivative_of, GeomError,
};
use semislant_core::sample::{halton_points, VectorSampler};

type MetricCase = (semislant_core::geometry::MetricField, Vec<Vec<f64>>, ParamSet);

fn catalog_metrics() -> Vec<MetricCase> {
    catalog::entries()
        .iter()
        .map(|e| {
            let spec = e.build(&ParamSet::new()).unwrap();
            let points: Vec<Vec<f64>> = halton_points(spec.dim_source, 6)
                .iter()
                .map(|u| spec.sample_box.embed(u))
                .collect();
            (spec.metric_source.clone(), points, spec.params.clone())
        })
        .collect()
}

#[test]
fn christoffel_symmetry_on_catalog_metrics() {
    for (g, points, params) in catalog_metrics() {
        for p in &points {
            let gamma = christoffel(&g, p, &params).unwrap();
            assert!(
                gamma.max_asymmetry() <= 1e-12,
                "asymmetry {} at {p:?}",
                gamma.max_asymmetry()
            );
        }
    }
}

#[test]
fn connection_is_metric_compatible() {
    // X<V,W> = <nabla_X V, W> + <V, nabla_X W> for seeded random constant
    // fields, the left side by central differences of the metric pairing
    let h = 1e-5;
    let mut sampler = VectorSampler::new(42, "metric_compat");
    for (g, points, params) in catalog_metrics() {
        let n = g.dim();
        for p in points.iter().take(3) {
            let v = sampler.unit_coeffs(n);
            let w = sampler.unit_coeffs(n);
            let x = sampler.unit_coeffs(n);
            let field_v = |_: &[f64]| -> Result<DVector<f64>, GeomError> { Ok(v.clone()) };
            let field_w = |_: &[f64]| -> Result<DVector<f64>, GeomError> { Ok(w.clone()) };
            let pairing = |q: &[f64]| -> f64 {
                let gm = g.eval(q, &params).unwrap();
                (v.transpose() * gm * &w)[(0, 0)]
            };
            let plus: Vec<f64> = p.iter().zip(x.iter()).map(|(&a, &d)| a + h * d).collect();
            let minus: Vec<f64> = p.iter().zip(x.iter()).map(|(&a, &d)| a - h * d).collect();
            let lhs = (pairing(&plus) - pairing(&minus)) / (2.0 * h);
            let gm = g.eval(p, &params).unwrap();
            let dv = covariant_derivative_of(&g, &params, &field_v, &x, p, h, false).unwrap();
            let dw = covariant_derivative_of(&g, &params, &field_w, &x, p, h, false).unwrap();
            let rhs = (dv.transpose() * &gm * &w)[(0, 0)] + (v.transpose() * &gm * &dw)[(0, 0)];
            assert!(
                (lhs - rhs).abs() <= 1e-5,
                "compatibility residual {} at {p:?}",
                (lhs - rhs).abs()
            );
        }
    }
}

#[test]
fn connection_is_torsion_free() {
    // nabla_X Y - nabla_Y X = [X, Y] for coordinate-expression fields,
    // the bracket by central differences
    let h = 1e-5;
    for (g, points, params) in catalog_metrics() {
        let n = g.dim();
        // a mildly position-dependent field keeps the test honest
        let field_x = move |q: &[f64]| -> Result<DVector<f64>, GeomError> {
            Ok(DVector::from_fn(n, |i, _| {
                if i == 0 {
                    1.0 + 0.3 * q[1 % n]
                } else {
                    0.1 * q[(i - 1) % n]
                }
            }))
        };
        let field_y = move |q: &[f64]| -> Result<DVector<f64>, GeomError> {
            Ok(DVector::from_fn(n, |i, _| {
                if i == n - 1 {
                    1.0 - 0.2 * q[0]
                } else {
                    0.05 * q[(i + 1) % n]
                }
            }))
        };
        for p in points.iter().take(3) {
            let x0 = field_x(p).unwrap();
            let y0 = field_y(p).unwrap();
            let nabla_x_y =
                covariant_derivative_of(&g, &params, &field_y, &x0, p, h, false).unwrap();
            let nabla_y_x =
                covariant_derivative_of(&g, &params, &field_x, &y0, p, h, false).unwrap();
            let bracket = {
                let d = |f: &semislant_core::geometry::FieldDyn<'_>,
                         dir: &DVector<f64>|
                 -> DVector<f64> {
                    let plus: Vec<f64> =
                        p.iter().zip(dir.iter()).map(|(&a, &t)| a + h * t).collect();
                    let minus: Vec<f64> =
                        p.iter().zip(dir.iter()).map(|(&a, &t)| a - h * t).collect();
                    (f(&plus).unwrap() - f(&minus).unwrap()) / (2.0 * h)
                };
                d(&field_y, &x0) - d(&field_x, &y0)
            };
            let torsion = &nabla_x_y - &nabla_y_x - &bracket;
            assert!(
                torsion.amax() <= 1e-5,
                "torsion {} at {p:?}",
                torsion.amax()
            );
        }
    }
}

#[test]
fn canonical_structure_squares_to_exact_negation() {
    for n in [2usize, 4, 6, 8, 10] {
        let j = canonical_j(n).unwrap();
        let jm = j.eval(&vec![0.0; n], &ParamSet::new()).unwrap();
        let squared = &jm * &jm;
        assert_eq!(squared, -DMatrix::<f64>::identity(n, n));
    }
}
