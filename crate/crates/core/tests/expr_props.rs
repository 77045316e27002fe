//! Grammar-level properties: print/parse round trips, totality of
//! differentiation, and agreement of symbolic derivatives with central
//! differences on every catalog expression.

use proptest::prelude::*;
use semislant_core::catalog;
use semislant_core::expr::{Expr, ParamSet};
use semislant_core::sample::VectorSampler;

fn arb_expr(dim: usize) -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (-3.0..3.0f64).prop_map(Expr::Const),
        (0..dim).prop_map(Expr::Var),
        Just(Expr::Param("alpha".to_string())),
        Just(Expr::Param("beta".to_string())),
    ];
    leaf.prop_recursive(4, 48, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
            inner.clone().prop_map(|e| Expr::Sin(Box::new(e))),
            inner.clone().prop_map(|e| Expr::Cos(Box::new(e))),
            inner.clone().prop_map(|e| Expr::Exp(Box::new(e))),
            inner.clone().prop_map(|e| Expr::Sqrt(Box::new(e))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Add(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Sub(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Mul(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Div(Box::new(a), Box::new(b))),
            (inner, -3..4i32).prop_map(|(a, n)| Expr::PowI(Box::new(a), n)),
        ]
    })
}

proptest! {
    #[test]
    fn printed_form_evaluates_identically(e in arb_expr(4), px in proptest::collection::vec(-2.0..2.0f64, 4)) {
        let params = ParamSet::new().with("alpha", 0.37).with("beta", -1.2);
        let printed = e.to_string();
        let reparsed = Expr::parse(&printed, 4)
            .unwrap_or_else(|err| panic!("printed `{printed}` failed to reparse: {err}"));
        match (e.eval(&px, &params), reparsed.eval(&px, &params)) {
            (Ok(a), Ok(b)) => prop_assert!(
                a == b || (a - b).abs() <= 1e-12 * (1.0 + a.abs()),
                "eval mismatch: {a} vs {b} for `{printed}`"
            ),
            (Err(_), Err(_)) => {}
            (a, b) => prop_assert!(false, "domain disagreement: {a:?} vs {b:?} for `{printed}`"),
        }
    }

    #[test]
    fn differentiation_is_total_over_the_grammar(e in arb_expr(4), var in 0usize..4) {
        // must not panic, and the derivative must evaluate wherever the
        // expression itself is comfortably inside its domain
        let d = e.diff(var);
        let params = ParamSet::new().with("alpha", 0.37).with("beta", -1.2);
        let _ = d.eval(&[0.3, -0.4, 0.8, 1.1], &params);
    }
}

/// An expression, its variable count, an in-domain box, and bindings.
type BoxedExpr = (Expr, usize, Vec<f64>, Vec<f64>, ParamSet);

/// Every closed-form expression the catalog uses, with an in-domain box.
fn catalog_expressions() -> Vec<BoxedExpr> {
    let mut out = Vec::new();
    for entry in catalog::entries() {
        let params = entry.merge(&ParamSet::new()).unwrap();
        let spec = entry.build(&ParamSet::new()).unwrap();
        for comp in &spec.components {
            out.push((
                comp.clone(),
                spec.dim_source,
                spec.sample_box.min.clone(),
                spec.sample_box.max.clone(),
                params.clone(),
            ));
        }
    }
    // the warped metric entry
    out.push((
        Expr::parse("exp(2*x3)", 6).unwrap(),
        6,
        vec![-0.5; 6],
        vec![0.5; 6],
        ParamSet::new(),
    ));
    out
}

#[test]
fn round_trip_on_catalog_expressions_at_100_points() {
    let mut sampler = VectorSampler::new(42, "expr_round_trip");
    for (expr, dim, lo, hi, params) in catalog_expressions() {
        let printed = expr.to_string();
        let back = Expr::parse(&printed, dim).expect("printed form parses");
        for _ in 0..100 {
            let coeffs = sampler.unit_coeffs(dim);
            let p: Vec<f64> = (0..dim)
                .map(|i| lo[i] + (hi[i] - lo[i]) * (0.5 + 0.45 * coeffs[i]))
                .collect();
            let a = expr.eval(&p, &params).expect("in-domain");
            let b = back.eval(&p, &params).expect("in-domain");
            assert_eq!(a, b, "`{printed}` at {p:?}");
        }
    }
}

#[test]
fn symbolic_derivatives_match_central_differences() {
    let h = 1e-5;
    let mut sampler = VectorSampler::new(42, "expr_derivatives");
    for (expr, dim, lo, hi, params) in catalog_expressions() {
        for var in 0..dim {
            let d = expr.diff(var);
            for _ in 0..20 {
                let coeffs = sampler.unit_coeffs(dim);
                let p: Vec<f64> = (0..dim)
                    .map(|i| lo[i] + (hi[i] - lo[i]) * (0.5 + 0.4 * coeffs[i]))
                    .collect();
                let sym = d.eval(&p, &params).expect("derivative evaluates");
                let mut plus = p.clone();
                plus[var] += h;
                let mut minus = p.clone();
                minus[var] -= h;
                let fd = (expr.eval(&plus, &params).unwrap()
                    - expr.eval(&minus, &params).unwrap())
                    / (2.0 * h);
                assert!(
                    (sym - fd).abs() <= 1e-7 * (1.0 + sym.abs()),
                    "{expr} d/dx{} at {p:?}: symbolic {sym} vs fd {fd}",
                    var + 1
                );
            }
        }
    }
}
