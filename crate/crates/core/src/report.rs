//! Check reports, verdicts, tolerances, and the fixed table of condition
//! statements attached to every check.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

/// Outcome of a single named check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    NotApplicable,
    /// Something needs human attention (ambiguous rank, value discrepancy)
    /// without being a failure.
    Flagged,
}

impl Verdict {
    pub fn from_residual(max_residual: f64, tolerance: f64) -> Verdict {
        if max_residual <= tolerance {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn is_fail(self) -> bool {
        self == Verdict::Fail
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "FAIL",
            Verdict::NotApplicable => "n/a",
            Verdict::Flagged => "flagged",
        }
    }
}

/// One residual series (a named quantity measured over the sample set).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResidualRow {
    pub label: String,
    /// Residual per sample index, in sample order.
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// Largest norm among the individual terms entering the residual, when
    /// meaningful; lets a report distinguish `0 = 0` from a real cancellation.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_term: Option<f64>,
}

impl ResidualRow {
    pub fn new(label: impl Into<String>, residuals: Vec<f64>, tolerance: f64) -> Self {
        let max_residual = residuals.iter().cloned().fold(0.0, f64::max);
        ResidualRow {
            label: label.into(),
            residuals,
            max_residual,
            tolerance,
            pass: max_residual <= tolerance,
            max_term: None,
        }
    }

    pub fn with_max_term(mut self, t: f64) -> Self {
        self.max_term = Some(t);
        self
    }
}

/// Agreement between a theorem condition and its independent oracle.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AgreementRow {
    pub label: String,
    pub condition_pass: bool,
    pub oracle_pass: bool,
    pub agree: bool,
}

impl AgreementRow {
    pub fn new(label: impl Into<String>, condition_pass: bool, oracle_pass: bool) -> Self {
        AgreementRow {
            label: label.into(),
            condition_pass,
            oracle_pass,
            agree: condition_pass == oracle_pass,
        }
    }
}

/// Witness data for the worst sample of a failing or flagged check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Witness {
    pub sample: usize,
    pub point: Vec<f64>,
    pub value: f64,
    pub label: String,
}

/// Full record of one named check: what was verified, the measured
/// residuals, scalar findings, and the verdict.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    /// The condition being verified, from [`statements`].
    pub statement: String,
    pub verdict: Verdict,
    pub rows: Vec<ResidualRow>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub agreements: Vec<AgreementRow>,
    /// Scalar findings (angle, rank, dimensions, trace norms ...).
    #[serde(skip_serializing_if = "BTreeMap::is_empty", default)]
    pub values: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub annotations: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

impl CheckReport {
    pub fn new(name: &str, statement: &str) -> Self {
        CheckReport {
            name: String::from(name),
            statement: String::from(statement),
            verdict: Verdict::Pass,
            rows: Vec::new(),
            agreements: Vec::new(),
            values: BTreeMap::new(),
            annotations: Vec::new(),
            witness: None,
        }
    }

    pub fn not_applicable(name: &str, statement: &str, reason: impl Into<String>) -> Self {
        let mut r = CheckReport::new(name, statement);
        r.verdict = Verdict::NotApplicable;
        r.annotations.push(reason.into());
        r
    }

    pub fn push_row(&mut self, row: ResidualRow) {
        self.rows.push(row);
    }

    pub fn set_value(&mut self, key: &str, v: f64) {
        self.values.insert(String::from(key), v);
    }

    pub fn max_residual(&self) -> f64 {
        self.rows.iter().map(|r| r.max_residual).fold(0.0, f64::max)
    }

    /// Sets the verdict from the rows (and agreement rows) already pushed.
    pub fn settle(&mut self) {
        let rows_ok = self.rows.iter().all(|r| r.pass);
        let agree_ok = self.agreements.iter().all(|a| a.agree);
        self.verdict = if rows_ok && agree_ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
    }
}

/// Check tolerances, tiered by how many layers of numerical differentiation
/// sit underneath the measured quantity.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Tolerances {
    /// Pure linear-algebra identities evaluated from exact Jacobians.
    pub algebraic: f64,
    /// Basis orthonormality and projector residuals.
    pub orthonormal: f64,
    /// Relative singular-value cutoff for rank decisions.
    pub rank_rel: f64,
    /// Quantities involving one finite difference.
    pub first_order: f64,
    /// Finite differences of quantities that are themselves derivative-like.
    pub second_order: f64,
    /// Slant-angle spread and cross-formula agreement.
    pub angle: f64,
    /// Eigenvalue comparisons for the slant operator.
    pub eigen: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            algebraic: 1e-9,
            orthonormal: 1e-10,
            rank_rel: 1e-8,
            first_order: 1e-6,
            second_order: 1e-5,
            angle: 1e-9,
            eigen: 1e-8,
        }
    }
}

impl Tolerances {
    /// Uniformly rescales the profile so that `first_order == base`.
    pub fn scaled_to(base: f64) -> Self {
        let d = Tolerances::default();
        let k = base / d.first_order;
        Tolerances {
            algebraic: d.algebraic * k,
            orthonormal: d.orthonormal * k,
            rank_rel: d.rank_rel,
            first_order: base,
            second_order: d.second_order * k,
            angle: d.angle * k,
            eigen: d.eigen * k,
        }
    }
}

/// Finite-difference step sizes (scaled by the coordinate magnitude at the
/// evaluation point).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FdSteps {
    /// Step for first derivatives of closed-form quantities.
    pub first: f64,
    /// Step for derivatives of quantities that already contain a derivative
    /// or a decomposition; coarser to control round-off amplification.
    pub second: f64,
    /// Apply one level of Richardson extrapolation to central differences.
    pub richardson: bool,
}

impl Default for FdSteps {
    fn default() -> Self {
        FdSteps {
            first: 1e-5,
            second: 1e-4,
            richardson: false,
        }
    }
}

impl FdSteps {
    pub fn with_first(base: f64) -> Self {
        FdSteps {
            first: base,
            second: base * 10.0,
            richardson: false,
        }
    }
}

/// Fixed table of the condition statements a check can verify. Reports
/// always quote one of these, so downstream tooling can key on them.
pub mod statements {
    pub const HERMITIAN_KAHLER: &str =
        "J^2 = -id, g(JX,JY) = g(X,Y), and nabla J = 0 at every sampled point";
    pub const RIEMANNIAN_MAP: &str =
        "the differential is a linear isometry from the horizontal space onto its image, with locally constant rank";
    pub const EIKONAL: &str =
        "the squared Hilbert-Schmidt norm of the differential equals its rank (twice the energy density)";
    pub const SEMI_SLANT: &str =
        "ker F_* splits as an invariant distribution D1 plus a distribution D2 whose angle to J is constant in the vector and the point";
    pub const STRUCTURE: &str =
        "phi^2 + B omega = -id, C^2 + omega B = -id, omega phi + C omega = 0, BC + phi B = 0, with phi D1 = D1, omega D1 = 0, phi D2 in D2, B maps the horizontal space onto D2, and mu is J-invariant";
    pub const JHAT: &str = "(JP + sec(theta) phi Q)^2 = -id on ker F_*";
    pub const ADAPTED_FRAME: &str =
        "the blocks {e,Je}, {f, sec(theta) phi f}, {csc(theta) omega f, csc(theta) sec(theta) omega phi f}, {g, Jg} assemble into an orthonormal frame";
    pub const FUNDAMENTAL_IDENTITIES: &str =
        "the covariant-derivative identities coupling phi, omega, B, C with the fundamental tensors T and A hold on a Kahler source";
    pub const INTEGRABILITY: &str =
        "D1 is integrable iff omega(hat_nabla_X Y - hat_nabla_Y X) = 0; D2 is integrable iff P(phi(hat_nabla_X Y - hat_nabla_Y X)) = 0; both verified against a bracket oracle";
    pub const HARMONICITY: &str =
        "the tension field (trace of the second fundamental form) vanishes; on a Kahler source with integrable D1 this reduces to the D2-trace and the mean curvature of the range";
    pub const TOTALLY_GEODESIC: &str =
        "the three operator conditions equivalent to nabla F_* = 0 hold, verified against the direct second-fundamental-form oracle";
    pub const UMBILICAL: &str =
        "T_X Y = g(X,Y) H for vertical X, Y, and the mean curvature vector H lies in omega D2";
    pub const DECOMPOSITION: &str =
        "the operator conditions for (ker F_*, horizontal) and (D1, D2) to be autoparallel pairs hold, verified against direct covariant-derivative oracles";
    pub const OMEGA_PARALLEL: &str =
        "when omega is parallel on a Kahler source, T_{phi X} phi X = -cos^2(theta) T_X X on D2";
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn residual_row_settles_verdict() {
        let mut rep = CheckReport::new("demo", "demo statement");
        rep.push_row(ResidualRow::new("ok", vec![1e-12, 3e-11], 1e-9));
        rep.settle();
        assert_eq!(rep.verdict, Verdict::Pass);
        rep.push_row(ResidualRow::new("bad", vec![1e-3], 1e-9));
        rep.settle();
        assert_eq!(rep.verdict, Verdict::Fail);
        assert!(rep.max_residual() > 1e-4);
    }

    #[test]
    fn disagreement_fails_the_check() {
        let mut rep = CheckReport::new("demo", "demo statement");
        rep.agreements.push(AgreementRow::new("cond vs oracle", true, false));
        rep.settle();
        assert_eq!(rep.verdict, Verdict::Fail);
    }

    #[test]
    fn tolerance_scaling_keeps_ratios() {
        let t = Tolerances::scaled_to(1e-5);
        assert!((t.second_order - 1e-4).abs() < 1e-18);
        assert!((t.algebraic - 1e-8).abs() < 1e-20);
    }
}
