//! Model parameters and the nonlinear function pack `(eta, f)`.
//!
//! `eta` modulates the attractiveness diffusion (near-repeat victimization
//! strength), `f` is the criminals' perception of attractiveness that
//! drives the advective flux `2 rho grad log f(A)`. The analysis needs both
//! functions with derivatives up to third order, evaluated pointwise; packs
//! are supplied as paired value/derivative evaluators, not expressions.

use crate::error::{Error, Result};
use serde::Serialize;
use std::fmt;
use std::sync::Arc;

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Which attractiveness-flux form the model uses.
///
/// `Departure` transfers attractiveness at a rate set by the source site,
/// `Arrival` at a rate set by the destination site. The two coincide when
/// `eta` is constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Variant {
    Departure,
    Arrival,
}

impl fmt::Display for Variant {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Variant::Departure => write!(out, "departure"),
            Variant::Arrival => write!(out, "arrival"),
        }
    }
}

/// Recognized built-in packs get closed-form fast paths in the solver's
/// hot loops; custom packs go through the boxed evaluators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum PackKind {
    PaperDefault,
    ConstEtaLinearF,
    Custom,
}

/// Nonlinear diffusion heterogeneity `eta` and perception `f`, with first,
/// second and third derivatives. All evaluators must be pure.
#[derive(Clone)]
pub struct KineticsPack {
    pub name: String,
    pub(crate) kind: PackKind,
    eta: ScalarFn,
    eta1: ScalarFn,
    eta2: ScalarFn,
    eta3: ScalarFn,
    f: ScalarFn,
    f1: ScalarFn,
    f2: ScalarFn,
    f3: ScalarFn,
}

impl fmt::Debug for KineticsPack {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(out, "KineticsPack({})", self.name)
    }
}

/// All eight kinetics values at a single point, as used by the analysis at
/// the homogeneous state.
#[derive(Debug, Clone, Copy)]
pub struct KineticsAt {
    pub eta: f64,
    pub eta1: f64,
    pub eta2: f64,
    pub eta3: f64,
    pub f: f64,
    pub f1: f64,
    pub f2: f64,
    pub f3: f64,
}

impl KineticsPack {
    /// Build a pack from explicit evaluators.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        eta: impl Fn(f64) -> f64 + Send + Sync + 'static,
        eta1: impl Fn(f64) -> f64 + Send + Sync + 'static,
        eta2: impl Fn(f64) -> f64 + Send + Sync + 'static,
        eta3: impl Fn(f64) -> f64 + Send + Sync + 'static,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        f1: impl Fn(f64) -> f64 + Send + Sync + 'static,
        f2: impl Fn(f64) -> f64 + Send + Sync + 'static,
        f3: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            kind: PackKind::Custom,
            eta: Arc::new(eta),
            eta1: Arc::new(eta1),
            eta2: Arc::new(eta2),
            eta3: Arc::new(eta3),
            f: Arc::new(f),
            f1: Arc::new(f1),
            f2: Arc::new(f2),
            f3: Arc::new(f3),
        }
    }

    /// Replace one derivative evaluator; used to build deliberately broken
    /// packs in validation tests.
    pub fn with_f1(mut self, f1: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.f1 = Arc::new(f1);
        self.kind = PackKind::Custom;
        self
    }

    #[inline]
    pub fn eta(&self, a: f64) -> f64 {
        (self.eta)(a)
    }
    #[inline]
    pub fn eta1(&self, a: f64) -> f64 {
        (self.eta1)(a)
    }
    #[inline]
    pub fn eta2(&self, a: f64) -> f64 {
        (self.eta2)(a)
    }
    #[inline]
    pub fn eta3(&self, a: f64) -> f64 {
        (self.eta3)(a)
    }
    #[inline]
    pub fn f(&self, a: f64) -> f64 {
        (self.f)(a)
    }
    #[inline]
    pub fn f1(&self, a: f64) -> f64 {
        (self.f1)(a)
    }
    #[inline]
    pub fn f2(&self, a: f64) -> f64 {
        (self.f2)(a)
    }
    #[inline]
    pub fn f3(&self, a: f64) -> f64 {
        (self.f3)(a)
    }

    pub fn at(&self, a: f64) -> KineticsAt {
        KineticsAt {
            eta: self.eta(a),
            eta1: self.eta1(a),
            eta2: self.eta2(a),
            eta3: self.eta3(a),
            f: self.f(a),
            f1: self.f1(a),
            f2: self.f2(a),
            f3: self.f3(a),
        }
    }
}

/// Look up a built-in kinetics pack.
///
/// * `"paper-default"`: `eta(A) = 1 - exp(-A)`, `f(A) = log(1 + A)` with
///   exact derivatives.
/// * `"constant-eta-linear-f"`: `eta == 1`, `f(A) = A`; with `lambda0 = 1`
///   this degenerates both variants to the classical linear-diffusion
///   crime model.
pub fn builtin_kinetics(name: &str) -> Result<KineticsPack> {
    match name {
        "paper-default" => {
            let mut pack = KineticsPack::new(
                name,
                |a| -f64::exp_m1(-a),
                |a| f64::exp(-a),
                |a| -f64::exp(-a),
                |a| f64::exp(-a),
                f64::ln_1p,
                |a| 1.0 / (1.0 + a),
                |a| -1.0 / ((1.0 + a) * (1.0 + a)),
                |a| 2.0 / ((1.0 + a) * (1.0 + a) * (1.0 + a)),
            );
            pack.kind = PackKind::PaperDefault;
            Ok(pack)
        }
        "constant-eta-linear-f" => {
            let mut pack = KineticsPack::new(
                name,
                |_| 1.0,
                |_| 0.0,
                |_| 0.0,
                |_| 0.0,
                |a| a,
                |_| 1.0,
                |_| 0.0,
                |_| 0.0,
            );
            pack.kind = PackKind::ConstEtaLinearF;
            Ok(pack)
        }
        other => Err(Error::KineticsNotFound(other.to_string())),
    }
}

/// Model parameters shared by both variants.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ModelParams {
    /// Static baseline attractiveness, `> 0`.
    pub a0: f64,
    /// Mean dynamic attractiveness, `> 0`.
    pub bbar: f64,
    /// Return-home probability rate, in `(0, 1]`.
    pub lambda0: f64,
    /// Intrinsic near-repeat victimization rate, `> 0`.
    pub eps: f64,
    pub variant: Variant,
}

impl ModelParams {
    pub fn new(a0: f64, bbar: f64, lambda0: f64, eps: f64, variant: Variant) -> Result<Self> {
        let p = Self { a0, bbar, lambda0, eps, variant };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParameter(what.to_string()));
        if !(self.a0 > 0.0 && self.a0.is_finite()) {
            return bad("a0 must be positive and finite");
        }
        if !(self.bbar > 0.0 && self.bbar.is_finite()) {
            return bad("bbar must be positive and finite");
        }
        if !(self.lambda0 > 0.0 && self.lambda0 <= 1.0) {
            return bad("lambda0 must lie in (0, 1]");
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return bad("eps must be positive and finite");
        }
        Ok(())
    }

    /// The spatially constant equilibrium `(Abar, rhobar)`.
    ///
    /// Both reaction terms vanish there: `-Abar + a0 + rhobar*Abar = 0` and
    /// `-lambda0*rhobar*Abar + lambda0*bbar = 0`. Note `rhobar < 1` always.
    pub fn homogeneous_state(&self) -> (f64, f64) {
        let abar = self.a0 + self.bbar;
        (abar, self.bbar / abar)
    }
}

/// Taylor data of the attractiveness flux potential at the homogeneous
/// state, shared by both variants.
///
/// Writing the flux as `eps * Laplacian(F(A))` with `F' = eta + eta'*(A-A0)`
/// (departure) or `F' = eta - eta'*(A-A0)` (arrival), the analysis only ever
/// needs `d = F'(Abar)`, `c2 = F''(Abar)` and `c3 = F'''(Abar)/6`.
#[derive(Debug, Clone, Copy)]
pub struct FluxDerivs {
    pub d: f64,
    pub c2: f64,
    pub c3: f64,
}

impl FluxDerivs {
    pub fn new(variant: Variant, kat: &KineticsAt, bbar: f64) -> Self {
        match variant {
            Variant::Departure => Self {
                d: kat.eta + kat.eta1 * bbar,
                c2: 2.0 * kat.eta1 + kat.eta2 * bbar,
                c3: kat.eta2 / 2.0 + kat.eta3 * bbar / 6.0,
            },
            Variant::Arrival => Self {
                d: kat.eta - kat.eta1 * bbar,
                c2: -kat.eta2 * bbar,
                c3: -(kat.eta2 + kat.eta3 * bbar) / 6.0,
            },
        }
    }
}

/// Outcome of one validation check.
#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    /// First violating sample `(A, detail)`, if any.
    pub first_violation: Option<(f64, String)>,
}

/// Numerical validation of the standing assumptions on a kinetics pack.
#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub pack: String,
    pub range: (f64, f64),
    pub samples: usize,
    pub checks: Vec<CheckResult>,
    /// `f(A) <= A` holds for the built-in packs but is not required by the
    /// analysis; reported separately and never failed on.
    pub informational: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Default validation range for a model: `[1e-3, 10 * Abar]`, wide enough to
/// cover simulated amplitudes with margin.
pub fn default_validation_range(params: &ModelParams) -> (f64, f64) {
    let (abar, _) = params.homogeneous_state();
    (1e-3, 10.0 * abar)
}

/// Check positivity, monotonicity, `eta >= eta' * A` and consistency of each
/// derivative against a central difference of the order below, on `samples`
/// points of `range`. Failures are reported, not raised.
pub fn validate_kinetics(pack: &KineticsPack, range: (f64, f64), samples: usize) -> ValidationReport {
    assert!(samples >= 2, "need at least two samples");
    assert!(range.0 > 0.0 && range.1 > range.0, "range must be within (0, inf)");

    let grid: Vec<f64> = (0..samples)
        .map(|i| range.0 + (range.1 - range.0) * i as f64 / (samples - 1) as f64)
        .collect();

    let mut checks = Vec::new();
    let mut scan = |name: &str, test: &dyn Fn(f64) -> Option<String>| {
        let mut first = None;
        for &a in &grid {
            if let Some(detail) = test(a) {
                first = Some((a, detail));
                break;
            }
        }
        checks.push(CheckResult {
            name: name.to_string(),
            passed: first.is_none(),
            first_violation: first,
        });
    };

    scan("eta_positive", &|a| {
        (pack.eta(a) <= 0.0).then(|| format!("eta({a}) = {}", pack.eta(a)))
    });
    scan("eta_increasing", &|a| {
        (pack.eta1(a) <= 0.0).then(|| format!("eta'({a}) = {}", pack.eta1(a)))
    });
    scan("eta_dominates_eta1_times_a", &|a| {
        let lhs = pack.eta(a);
        let rhs = pack.eta1(a) * a;
        (lhs < rhs).then(|| format!("eta({a}) = {lhs} < eta'({a})*A = {rhs}"))
    });
    scan("f_positive", &|a| (pack.f(a) <= 0.0).then(|| format!("f({a}) = {}", pack.f(a))));
    scan("f_nondecreasing", &|a| {
        (pack.f1(a) < 0.0).then(|| format!("f'({a}) = {}", pack.f1(a)))
    });

    // Derivative consistency: central difference of the field one order
    // below, relative error < 1e-6 at step 1e-5.
    let step = 1e-5;
    let tol = 1e-6;
    let pairs: [(&str, ScalarFn, ScalarFn); 6] = [
        ("eta1_matches_eta", pack.eta.clone(), pack.eta1.clone()),
        ("eta2_matches_eta1", pack.eta1.clone(), pack.eta2.clone()),
        ("eta3_matches_eta2", pack.eta2.clone(), pack.eta3.clone()),
        ("f1_matches_f", pack.f.clone(), pack.f1.clone()),
        ("f2_matches_f1", pack.f1.clone(), pack.f2.clone()),
        ("f3_matches_f2", pack.f2.clone(), pack.f3.clone()),
    ];
    for (name, base, deriv) in &pairs {
        scan(name, &|a| {
            let fd = (base(a + step) - base(a - step)) / (2.0 * step);
            let exact = deriv(a);
            // The finite difference itself carries O(step^2) truncation and
            // O(eps/step) roundoff; scale the tolerance accordingly.
            let scale = exact.abs().max(fd.abs()).max(1e-3);
            let err = (fd - exact).abs() / scale;
            (err > tol).then(|| format!("fd = {fd}, exact = {exact}, rel err = {err:.2e}"))
        });
    }

    let mut informational = Vec::new();
    {
        let mut first = None;
        for &a in &grid {
            if pack.f(a) > a {
                first = Some((a, format!("f({a}) = {} > A", pack.f(a))));
                break;
            }
        }
        informational.push(CheckResult {
            name: "f_below_identity".to_string(),
            passed: first.is_none(),
            first_violation: first,
        });
    }

    ValidationReport {
        pack: pack.name.clone(),
        range,
        samples,
        checks,
        informational,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn paper_default_values() {
        let pack = builtin_kinetics("paper-default").unwrap();
        assert!(close(pack.eta(3.0), 1.0 - (-3.0f64).exp(), 1e-15));
        assert!(close(pack.f1(3.0), 0.25, 1e-15));
        assert!(close(pack.f(3.0), 4.0f64.ln(), 1e-15));
    }

    #[test]
    fn constant_pack_values() {
        let pack = builtin_kinetics("constant-eta-linear-f").unwrap();
        for a in [0.3, 1.0, 7.5] {
            assert_eq!(pack.eta(a), 1.0);
            assert_eq!(pack.eta1(a), 0.0);
            assert_eq!(pack.f(a), a);
            assert_eq!(pack.f1(a), 1.0);
        }
    }

    #[test]
    fn unknown_pack_is_not_found() {
        assert!(matches!(
            builtin_kinetics("nope"),
            Err(Error::KineticsNotFound(name)) if name == "nope"
        ));
    }

    #[test]
    fn homogeneous_state_formula() {
        let p = ModelParams::new(1.0, 2.0, 0.1, 0.03, Variant::Departure).unwrap();
        let (abar, rhobar) = p.homogeneous_state();
        assert_eq!(abar, 3.0);
        assert!(close(rhobar, 2.0 / 3.0, 1e-15));

        let p = ModelParams::new(1.0, 3.0, 0.9, 0.01, Variant::Departure).unwrap();
        assert_eq!(p.homogeneous_state(), (4.0, 0.75));

        // Figure-6(b)-style parameters.
        let p = ModelParams::new(0.967, 13.09, 0.1, 0.03, Variant::Arrival).unwrap();
        let (abar, rhobar) = p.homogeneous_state();
        assert!(close(abar, 14.057, 1e-12));
        assert!(close(rhobar, 13.09 / 14.057, 1e-12));
        assert!(rhobar < 1.0);
    }

    #[test]
    fn homogeneous_state_is_reaction_fixed_point() {
        for (a0, bbar, l0) in [(1.0, 2.0, 0.1), (1.0, 3.0, 0.9), (0.967, 13.09, 0.1)] {
            let p = ModelParams::new(a0, bbar, l0, 0.02, Variant::Departure).unwrap();
            let (abar, rhobar) = p.homogeneous_state();
            let ra = -abar + a0 + rhobar * abar;
            let rr = -l0 * rhobar * abar + l0 * bbar;
            assert!(ra.abs() < 1e-14, "A-reaction residual {ra}");
            assert!(rr.abs() < 1e-14, "rho-reaction residual {rr}");
        }
    }

    #[test]
    fn params_validation_rejects_bad_inputs() {
        assert!(ModelParams::new(0.0, 2.0, 0.1, 0.03, Variant::Departure).is_err());
        assert!(ModelParams::new(1.0, -1.0, 0.1, 0.03, Variant::Departure).is_err());
        assert!(ModelParams::new(1.0, 2.0, 1.5, 0.03, Variant::Departure).is_err());
        assert!(ModelParams::new(1.0, 2.0, 0.1, 0.0, Variant::Departure).is_err());
    }

    #[test]
    fn paper_default_validates_clean() {
        let pack = builtin_kinetics("paper-default").unwrap();
        let report = validate_kinetics(&pack, (0.1, 20.0), 100);
        assert!(report.all_passed(), "{:#?}", report.checks);
        assert!(report.informational[0].passed, "log(1+A) <= A should hold");
    }

    #[test]
    fn quadratic_eta_fails_domination() {
        let pack = KineticsPack::new(
            "quadratic-eta",
            |a| a * a,
            |a| 2.0 * a,
            |_| 2.0,
            |_| 0.0,
            |a| a,
            |_| 1.0,
            |_| 0.0,
            |_| 0.0,
        );
        let report = validate_kinetics(&pack, (2.0, 3.0), 16);
        let dom = report
            .checks
            .iter()
            .find(|c| c.name == "eta_dominates_eta1_times_a")
            .unwrap();
        assert!(!dom.passed);
        assert!(dom.first_violation.is_some());
    }

    #[test]
    fn mismatched_derivative_fails_consistency() {
        let pack = builtin_kinetics("paper-default").unwrap().with_f1(|_| 0.0);
        let report = validate_kinetics(&pack, (0.5, 5.0), 32);
        let c = report.checks.iter().find(|c| c.name == "f1_matches_f").unwrap();
        assert!(!c.passed);
    }

    #[test]
    fn flux_derivs_match_variant_expansion() {
        let pack = builtin_kinetics("paper-default").unwrap();
        let bbar = 2.0;
        let kat = pack.at(3.0);
        let dep = FluxDerivs::new(Variant::Departure, &kat, bbar);
        let arr = FluxDerivs::new(Variant::Arrival, &kat, bbar);
        // eta' = exp(-3), eta'' = -exp(-3): the quadratic departure
        // coefficient cancels exactly at bbar = 2.
        assert!(close(dep.d, kat.eta + bbar * kat.eta1, 1e-15));
        assert!(dep.c2.abs() < 1e-16);
        assert!(close(arr.d, kat.eta - bbar * kat.eta1, 1e-15));
        assert!(close(arr.c2, -kat.eta2 * bbar, 1e-15));
        assert!(close(arr.c3, -(kat.eta2 + kat.eta3 * bbar) / 6.0, 1e-15));
    }
}
