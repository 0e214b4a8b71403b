//! Linear stability of the homogeneous state and bifurcation thresholds.
//!
//! Projecting the linearization onto the mode with eigenvalue `sigma` gives
//! the 2x2 block
//!
//! ```text
//! H = [ -eps*D*sigma + rhobar - 1                        Abar            ]
//!     [ (2 rhobar f'/f) sigma - lambda0 rhobar   -sigma - lambda0 Abar   ]
//! ```
//!
//! with `D = eta(Abar) + eta'(Abar) Bbar` (departure) or
//! `eta(Abar) - eta'(Abar) Bbar` (arrival). Its characteristic trace is
//! positive because `rhobar < 1`, so a mode destabilizes exactly when the
//! determinant turns negative, which happens for
//! `eps < eps_bar(sigma) = (C sigma - lambda0 Abar) / (D (sigma + lambda0 Abar) sigma)`
//! with `C = 2 Bbar f'/f + rhobar - 1`. Only the mode maximizing `eps_bar`
//! can carry a stable bifurcating pattern, which is the wavemode-selection
//! rule this module implements.

use crate::error::{Error, Result};
use crate::kinetics::{FluxDerivs, KineticsAt, KineticsPack, ModelParams, Variant};
use crate::spectral::{enumerate_modes, DomainKind, DomainSpec, EigenMode, ModeIndex};
use serde::Serialize;

/// Relative tolerance under which two square-mode thresholds count as the
/// same degenerate value. Symmetric pairs tie exactly; anything wider is a
/// genuine difference.
pub const TIE_REL_TOL: f64 = 1e-12;

/// Analysis constants evaluated at the homogeneous state.
#[derive(Debug, Clone, Copy)]
pub struct StateCoeffs {
    pub abar: f64,
    pub rhobar: f64,
    /// `lambda0 * Abar`
    pub lam_abar: f64,
    /// `lambda0 * rhobar`
    pub lam_rhobar: f64,
    /// `C = 2 Bbar f'(Abar)/f(Abar) + rhobar - 1`
    pub big_c: f64,
    /// `p = 2 rhobar f'(Abar)/f(Abar)`
    pub p: f64,
    pub flux: FluxDerivs,
    pub kat: KineticsAt,
}

impl StateCoeffs {
    pub fn new(params: &ModelParams, kin: &KineticsPack) -> Self {
        let (abar, rhobar) = params.homogeneous_state();
        let kat = kin.at(abar);
        let fr = kat.f1 / kat.f;
        StateCoeffs {
            abar,
            rhobar,
            lam_abar: params.lambda0 * abar,
            lam_rhobar: params.lambda0 * rhobar,
            big_c: 2.0 * params.bbar * fr + rhobar - 1.0,
            p: 2.0 * rhobar * fr,
            flux: FluxDerivs::new(params.variant, &kat, params.bbar),
            kat,
        }
    }

    /// Threshold at eigenvalue `sigma`; negative values mean the mode never
    /// destabilizes for positive `eps`.
    pub fn eps_bar(&self, sigma: f64) -> f64 {
        (self.big_c * sigma - self.lam_abar)
            / (self.flux.d * (sigma + self.lam_abar) * sigma)
    }

    /// Continuous-in-`sigma` argmax of `eps_bar`, when one exists
    /// (`C > 0`). Setting the derivative of the rational function to zero
    /// leaves `-C sigma^2 + 2 a sigma + a^2 = 0` with `a = lambda0 Abar`.
    pub fn sigma_peak(&self) -> Option<f64> {
        (self.big_c > 0.0)
            .then(|| self.lam_abar * (1.0 + (1.0 + self.big_c).sqrt()) / self.big_c)
    }

    /// Null-eigenvector ratio between the attractiveness and density
    /// components at the bifurcation point, `None` if its denominator
    /// vanishes.
    pub fn qk(&self, sigma: f64) -> Option<f64> {
        let den = self.p * sigma - self.lam_rhobar;
        let scale = (self.p * sigma).abs().max(self.lam_rhobar.abs());
        (den.abs() > 1e-12 * scale).then(|| (sigma + self.lam_abar) / den)
    }
}

fn check_variant_hypothesis(params: &ModelParams, co: &StateCoeffs) -> Result<()> {
    if params.variant == Variant::Arrival && co.flux.d <= 0.0 {
        return Err(Error::HypothesisViolated(format!(
            "arrival variant needs eta(Abar) > eta'(Abar)*Bbar, got eta = {}, eta'*Bbar = {}",
            co.kat.eta,
            co.kat.eta1 * params.bbar
        )));
    }
    Ok(())
}

/// Bifurcation threshold `eps_bar` for the mode with eigenvalue `sigma`.
pub fn bifurcation_value(params: &ModelParams, kin: &KineticsPack, sigma: f64) -> Result<f64> {
    if sigma <= 0.0 {
        return Err(Error::ZeroModeExcluded(format!("sigma = {sigma}")));
    }
    let co = StateCoeffs::new(params, kin);
    check_variant_hypothesis(params, &co)?;
    Ok(co.eps_bar(sigma))
}

/// Characteristic data of one mode's linearization block at `params.eps`.
#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    pub index: ModeIndex,
    pub sigma: f64,
    pub eps_bar: f64,
    /// Characteristic trace; always positive.
    pub trace: f64,
    /// Characteristic determinant; the mode grows iff it is negative.
    pub det: f64,
    pub unstable: bool,
}

/// Trace/determinant evaluation of one mode at the configured `eps`.
pub fn stability_report(
    params: &ModelParams,
    kin: &KineticsPack,
    mode: &EigenMode,
) -> Result<StabilityReport> {
    let co = StateCoeffs::new(params, kin);
    check_variant_hypothesis(params, &co)?;
    let sigma = mode.sigma;
    let diff = params.eps * co.flux.d * sigma;
    let trace = diff + 1.0 - co.rhobar + sigma + co.lam_abar;
    let det = (diff + 1.0 - co.rhobar) * (sigma + co.lam_abar)
        - co.abar * (co.p * sigma - co.lam_rhobar);
    Ok(StabilityReport {
        index: mode.index,
        sigma,
        eps_bar: co.eps_bar(sigma),
        trace,
        det,
        unstable: det < 0.0,
    })
}

/// How far a mode scan enumerates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModeCutoff {
    /// Enumerate until `sigma` exceeds 100x the continuous argmax of
    /// `eps_bar` (and at least one mode), which encloses the discrete
    /// argmax because `eps_bar` decays monotonically past its single peak.
    Auto,
    /// First `n` modes in eigenvalue order.
    Count(usize),
    /// All modes with `sigma <= max`.
    MaxSigma(f64),
}

/// Modes the cutoff selects, in deterministic scan order.
pub fn scan_modes(
    params: &ModelParams,
    kin: &KineticsPack,
    domain: DomainSpec,
    cutoff: ModeCutoff,
) -> Result<Vec<EigenMode>> {
    let co = StateCoeffs::new(params, kin);
    check_variant_hypothesis(params, &co)?;
    let first_sigma = match domain.kind {
        DomainKind::Interval => crate::spectral::eigenvalue(domain, ModeIndex::K(1))?,
        DomainKind::Square => crate::spectral::eigenvalue(domain, ModeIndex::Pair(0, 1))?,
    };
    let modes = match cutoff {
        ModeCutoff::Auto => {
            let target = match co.sigma_peak() {
                Some(peak) => 100.0 * peak,
                // No interior maximum: every threshold is negative and any
                // small scan reports that faithfully.
                None => 100.0 * first_sigma,
            };
            enumerate_modes(domain, target.max(first_sigma * 1.000001))
        }
        ModeCutoff::MaxSigma(s) => enumerate_modes(domain, s),
        ModeCutoff::Count(n) => {
            let mut sigma_max = first_sigma * (n.max(1) as f64).powi(2) * 2.0;
            loop {
                let all = enumerate_modes(domain, sigma_max);
                if all.len() >= n {
                    break all.into_iter().take(n).collect();
                }
                sigma_max *= 4.0;
            }
        }
    };
    if modes.is_empty() {
        return Err(Error::InvalidParameter(
            "mode cutoff selected no modes".to_string(),
        ));
    }
    Ok(modes)
}

/// `(mode, eps_bar)` rows for a table scan.
pub fn threshold_table(
    params: &ModelParams,
    kin: &KineticsPack,
    domain: DomainSpec,
    cutoff: ModeCutoff,
) -> Result<Vec<(EigenMode, f64)>> {
    let co = StateCoeffs::new(params, kin);
    check_variant_hypothesis(params, &co)?;
    let modes = scan_modes(params, kin, domain, cutoff)?;
    Ok(modes.into_iter().map(|m| (m, co.eps_bar(m.sigma))).collect())
}

/// Whether the homogeneous state is unstable at `params.eps`, together with
/// the most dangerous (threshold-maximizing) mode when it is.
pub fn is_homogeneous_unstable(
    params: &ModelParams,
    kin: &KineticsPack,
    domain: DomainSpec,
    cutoff: ModeCutoff,
) -> Result<(bool, Option<ModeIndex>)> {
    let table = threshold_table(params, kin, domain, cutoff)?;
    let (best, &(_, max_eps)) = table
        .iter()
        .enumerate()
        .map(|(i, row)| (i, row))
        .max_by(|a, b| (a.1).1.partial_cmp(&(b.1).1).expect("finite thresholds"))
        .expect("non-empty scan");
    if max_eps > 0.0 && params.eps < max_eps {
        Ok((true, Some(table[best].0.index)))
    } else {
        Ok((false, None))
    }
}

/// Result of the wavemode-selection rule: the threshold-maximizing mode(s)
/// and the maximum value. On squares all index pairs attaining the maximum
/// within [`TIE_REL_TOL`] are returned.
#[derive(Debug, Clone, Serialize)]
pub struct WavemodeSelection {
    pub modes: Vec<ModeIndex>,
    pub eps_bar_max: f64,
}

pub fn select_wavemode(
    params: &ModelParams,
    kin: &KineticsPack,
    domain: DomainSpec,
    cutoff: ModeCutoff,
) -> Result<WavemodeSelection> {
    let table = threshold_table(params, kin, domain, cutoff)?;
    let max_eps = table
        .iter()
        .map(|&(_, e)| e)
        .fold(f64::NEG_INFINITY, f64::max);
    if !(max_eps > 0.0) {
        return Err(Error::NoPositiveBifurcation);
    }
    let modes = table
        .iter()
        .filter(|&&(_, e)| (max_eps - e) <= TIE_REL_TOL * max_eps)
        .map(|&(m, _)| m.index)
        .collect();
    Ok(WavemodeSelection { modes, eps_bar_max: max_eps })
}

/// Applicability checks for a bifurcation point.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConditionFlags {
    /// The null-eigenvector denominator `p*sigma - lambda0*rhobar` is
    /// nonzero (equivalently `sigma != lambda0 f / (2 f')`).
    pub qk_denominator_nonzero: bool,
    /// `eps_bar > 0`, stated as `(lambda0 Abar + (1 - rhobar) sigma) /
    /// (2 sigma Bbar) < f'(Abar)/f(Abar)`.
    pub eps_positive: bool,
    /// No other admissible eigenvalue sits at the single resonant value
    /// `sigma* = lambda0 Abar (sigma_k + lambda0 Abar) / (C sigma_k - lambda0 Abar)`.
    pub non_resonant: bool,
    /// `eps_bar` differs from the threshold of every other distinct
    /// eigenvalue within the scan cutoff.
    pub eps_distinct: bool,
}

impl ConditionFlags {
    pub fn all_pass(&self) -> bool {
        self.qk_denominator_nonzero && self.eps_positive && self.non_resonant && self.eps_distinct
    }
}

/// A candidate bifurcation point with its applicability record.
#[derive(Debug, Clone, Serialize)]
pub struct BifurcationPoint {
    pub index: ModeIndex,
    pub sigma: f64,
    pub eps_bar: f64,
    /// Null-eigenvector ratio; `None` when its denominator vanishes.
    pub qk: Option<f64>,
    pub conditions: ConditionFlags,
    /// Human-readable details for each failed condition.
    pub failures: Vec<String>,
}

/// Resonant eigenvalue paired with mode `k`, if one exists.
///
/// The resonance relation `C sigma_k sigma_j = lambda0 Abar (sigma_k +
/// sigma_j + lambda0 Abar)` is linear in `sigma_j`, so at most one value can
/// resonate; it is admissible only when `C sigma_k > lambda0 Abar`.
pub fn resonant_sigma(co: &StateCoeffs, sigma_k: f64) -> Option<f64> {
    let den = co.big_c * sigma_k - co.lam_abar;
    (den > 0.0).then(|| co.lam_abar * (sigma_k + co.lam_abar) / den)
}

fn sigma_is_eigenvalue(domain: DomainSpec, sigma: f64, rel_tol: f64) -> bool {
    if sigma <= 0.0 {
        return false;
    }
    let unit = (std::f64::consts::PI / domain.length).powi(2);
    let target = sigma / unit;
    match domain.kind {
        DomainKind::Interval => {
            let j = target.sqrt().round();
            j >= 1.0 && (j * j * unit - sigma).abs() <= rel_tol * sigma
        }
        DomainKind::Square => {
            // Any integer near target expressible as m^2 + n^2 (not both 0).
            for s in [target.round() - 1.0, target.round(), target.round() + 1.0] {
                if s < 1.0 || (s * unit - sigma).abs() > rel_tol * sigma {
                    continue;
                }
                let s_int = s as u64;
                let mut m = 0u64;
                while m * m <= s_int {
                    let rest = s_int - m * m;
                    let n = (rest as f64).sqrt().round() as u64;
                    if n * n == rest {
                        return true;
                    }
                    m += 1;
                }
            }
            false
        }
    }
}

/// Evaluate every applicability condition for `mode`.
pub fn check_bifurcation_conditions(
    params: &ModelParams,
    kin: &KineticsPack,
    domain: DomainSpec,
    index: ModeIndex,
    cutoff: ModeCutoff,
) -> Result<BifurcationPoint> {
    let co = StateCoeffs::new(params, kin);
    check_variant_hypothesis(params, &co)?;
    let mode = EigenMode::new(domain, index)?;
    let sigma = mode.sigma;
    let eps_bar = co.eps_bar(sigma);
    let qk = co.qk(sigma);
    let mut failures = Vec::new();

    let qk_denominator_nonzero = qk.is_some();
    if !qk_denominator_nonzero {
        failures.push(format!(
            "sigma = {sigma} hits lambda0 f/(2 f') = {}",
            co.lam_rhobar / co.p
        ));
    }

    let fr = co.kat.f1 / co.kat.f;
    let eps_positive =
        (co.lam_abar + (1.0 - co.rhobar) * sigma) / (2.0 * sigma * params.bbar) < fr;
    if !eps_positive {
        failures.push(format!("threshold not positive: eps_bar = {eps_bar}"));
    }

    let non_resonant = match resonant_sigma(&co, sigma) {
        Some(sigma_star) => {
            let hit = (sigma_star - sigma).abs() > 1e-9 * sigma.max(sigma_star)
                && sigma_is_eigenvalue(domain, sigma_star, 1e-9);
            if hit {
                failures.push(format!("eigenvalue at resonant sigma* = {sigma_star}"));
            }
            !hit
        }
        None => true,
    };

    let mut eps_distinct = true;
    for other in scan_modes(params, kin, domain, cutoff)? {
        if (other.sigma - sigma).abs() <= TIE_REL_TOL * sigma.max(other.sigma) {
            continue; // same eigenvalue (the mode itself or a degenerate twin)
        }
        let e = co.eps_bar(other.sigma);
        if (e - eps_bar).abs() <= TIE_REL_TOL * eps_bar.abs().max(e.abs()).max(f64::MIN_POSITIVE) {
            eps_distinct = false;
            failures.push(format!(
                "eps_bar({}) = {e} coincides with eps_bar({index})",
                other.index
            ));
            break;
        }
    }

    Ok(BifurcationPoint {
        index,
        sigma,
        eps_bar,
        qk,
        conditions: ConditionFlags {
            qk_denominator_nonzero,
            eps_positive,
            non_resonant,
            eps_distinct,
        },
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinetics::builtin_kinetics;
    use std::f64::consts::PI;

    fn table1_params(eps: f64) -> (ModelParams, KineticsPack) {
        (
            ModelParams::new(1.0, 2.0, 0.1, eps, Variant::Departure).unwrap(),
            builtin_kinetics("paper-default").unwrap(),
        )
    }

    #[test]
    fn unit_interval_thresholds_match_reference() {
        let (params, kin) = table1_params(0.03);
        let expected = [0.0335, 0.0091, 0.0041, 0.0023, 0.0015, 0.0010, 0.0008];
        for (k, want) in (1..=7).zip(expected) {
            let sigma = (k as f64 * PI).powi(2);
            let got = bifurcation_value(&params, &kin, sigma).unwrap();
            assert!(
                (got - want).abs() < 5e-5,
                "k = {k}: eps_bar = {got}, reference {want}"
            );
            assert_eq!((got * 1e4).round() / 1e4, want, "k = {k} rounding");
        }
    }

    #[test]
    fn arrival_departure_ratio_is_flux_ratio() {
        let kin = builtin_kinetics("paper-default").unwrap();
        let dep = ModelParams::new(1.0, 2.0, 0.1, 0.03, Variant::Departure).unwrap();
        let arr = ModelParams { variant: Variant::Arrival, ..dep };
        let co_dep = StateCoeffs::new(&dep, &kin);
        let co_arr = StateCoeffs::new(&arr, &kin);
        let ratio = co_dep.flux.d / co_arr.flux.d;
        for k in 1..40 {
            let sigma = (k as f64 * PI / 3.0).powi(2);
            let vd = bifurcation_value(&dep, &kin, sigma).unwrap();
            let va = bifurcation_value(&arr, &kin, sigma).unwrap();
            assert!((va / vd - ratio).abs() < 1e-12 * ratio.abs());
        }
    }

    #[test]
    fn constant_eta_variants_coincide() {
        let kin = builtin_kinetics("constant-eta-linear-f").unwrap();
        let dep = ModelParams::new(1.0, 2.0, 1.0, 0.03, Variant::Departure).unwrap();
        let arr = ModelParams { variant: Variant::Arrival, ..dep };
        for k in 1..10 {
            let sigma = (k as f64 * PI / 2.0).powi(2);
            let vd = bifurcation_value(&dep, &kin, sigma).unwrap();
            let va = bifurcation_value(&arr, &kin, sigma).unwrap();
            assert_eq!(vd, va);
        }
    }

    #[test]
    fn zero_mode_and_hypothesis_errors() {
        let (params, kin) = table1_params(0.03);
        assert!(matches!(
            bifurcation_value(&params, &kin, 0.0),
            Err(Error::ZeroModeExcluded(_))
        ));
        // eta - eta' * Bbar < 0 for large Bbar with a steep custom eta.
        let steep = crate::kinetics::KineticsPack::new(
            "steep",
            |a| a.min(20.0) * 0.05 + 0.01,
            |_| 0.05,
            |_| 0.0,
            |_| 0.0,
            |a| a,
            |_| 1.0,
            |_| 0.0,
            |_| 0.0,
        );
        let arr = ModelParams::new(1.0, 50.0, 0.1, 0.03, Variant::Arrival).unwrap();
        assert!(matches!(
            bifurcation_value(&arr, &steep, 1.0),
            Err(Error::HypothesisViolated(_))
        ));
    }

    #[test]
    fn instability_verdicts_for_reference_setting() {
        let kin = builtin_kinetics("paper-default").unwrap();
        let domain = DomainSpec::interval(1.0);

        let (params, _) = table1_params(0.029);
        let (unstable, witness) =
            is_homogeneous_unstable(&params, &kin, domain, ModeCutoff::Auto).unwrap();
        assert!(unstable);
        assert_eq!(witness, Some(ModeIndex::K(1)));

        let (params, _) = table1_params(0.05);
        let (unstable, witness) =
            is_homogeneous_unstable(&params, &kin, domain, ModeCutoff::Auto).unwrap();
        assert!(!unstable);
        assert_eq!(witness, None);
    }

    #[test]
    fn vanishing_bbar_has_no_positive_threshold() {
        let kin = builtin_kinetics("paper-default").unwrap();
        let params = ModelParams::new(1.0, 1e-9, 0.1, 0.01, Variant::Departure).unwrap();
        let domain = DomainSpec::interval(1.0);
        let (unstable, witness) =
            is_homogeneous_unstable(&params, &kin, domain, ModeCutoff::Auto).unwrap();
        assert!(!unstable);
        assert!(witness.is_none());
        assert!(matches!(
            select_wavemode(&params, &kin, domain, ModeCutoff::Auto),
            Err(Error::NoPositiveBifurcation)
        ));
    }

    #[test]
    fn interval_wavemode_selection_matches_reference_sweep() {
        let kin = builtin_kinetics("paper-default").unwrap();
        let expect: [(f64, u32, f64, f64); 10] = [
            (3.0, 1, 0.0781, 0.0963),
            (5.0, 2, 0.1004, 0.1239),
            (7.0, 3, 0.1003, 0.1238),
            (9.0, 4, 0.0991, 0.1224),
            // The arrival value here is pinned by the exact ratio identity
            // eps_arr = eps_dep * D_plus / D_minus applied to the departure
            // column, not by an independently tabulated number.
            (11.0, 5, 0.0981, 0.1211),
            (13.0, 5, 0.0988, 0.1219),
            (15.0, 6, 0.1004, 0.1239),
            (17.0, 7, 0.1008, 0.1243),
            (19.0, 8, 0.1006, 0.1242),
            // sigma(k = 9, L = 21) coincides with sigma(k = 3, L = 7), so
            // this row repeats the L = 7 values exactly.
            (21.0, 9, 0.1003, 0.1238),
        ];
        let mut last_k0 = 0;
        for (l, k0, dep_max, arr_max) in expect {
            let domain = DomainSpec::interval(l);
            let dep = ModelParams::new(1.0, 2.0, 0.1, 0.05, Variant::Departure).unwrap();
            let sel = select_wavemode(&dep, &kin, domain, ModeCutoff::Auto).unwrap();
            assert_eq!(sel.modes, vec![ModeIndex::K(k0)], "L = {l}");
            assert!((sel.eps_bar_max - dep_max).abs() < 5e-5, "L = {l} departure");

            let arr = ModelParams { variant: Variant::Arrival, ..dep };
            let sel = select_wavemode(&arr, &kin, domain, ModeCutoff::Auto).unwrap();
            assert_eq!(sel.modes, vec![ModeIndex::K(k0)], "L = {l} arrival");
            assert!((sel.eps_bar_max - arr_max).abs() < 5e-5, "L = {l} arrival");

            assert!(k0 >= last_k0, "selected mode number must grow with L");
            last_k0 = k0;
        }
    }

    #[test]
    fn square_selection_and_ties() {
        let kin = builtin_kinetics("paper-default").unwrap();
        let params = ModelParams::new(1.0, 3.0, 0.9, 0.01, Variant::Departure).unwrap();

        let sel =
            select_wavemode(&params, &kin, DomainSpec::square(1.0), ModeCutoff::Auto).unwrap();
        assert_eq!(sel.modes, vec![ModeIndex::Pair(1, 1)]);
        assert!((sel.eps_bar_max - 0.0129).abs() < 5e-5);

        let sel =
            select_wavemode(&params, &kin, DomainSpec::square(3.0), ModeCutoff::Auto).unwrap();
        assert_eq!(sel.modes, vec![ModeIndex::Pair(0, 4), ModeIndex::Pair(4, 0)]);
        assert!((sel.eps_bar_max - 0.0132).abs() < 5e-5);
    }

    #[test]
    fn conditions_pass_at_reference_mode() {
        let (params, kin) = table1_params(0.029);
        let point = check_bifurcation_conditions(
            &params,
            &kin,
            DomainSpec::interval(1.0),
            ModeIndex::K(1),
            ModeCutoff::Count(12),
        )
        .unwrap();
        assert!(point.conditions.all_pass(), "failures: {:?}", point.failures);
        let qk = point.qk.unwrap();
        // Q = (sigma + lambda0 Abar) / (p sigma - lambda0 rhobar).
        let co = StateCoeffs::new(&params, &kin);
        let sigma = PI * PI;
        let expect = (sigma + co.lam_abar) / (co.p * sigma - co.lam_rhobar);
        assert!((qk - expect).abs() < 1e-14 * expect.abs());
    }

    #[test]
    fn engineered_qk_denominator_failure() {
        // Choose L so the first eigenvalue lands exactly on
        // lambda0 f / (2 f') where the null-vector denominator vanishes.
        let kin = builtin_kinetics("paper-default").unwrap();
        let params = ModelParams::new(1.0, 2.0, 0.1, 0.01, Variant::Departure).unwrap();
        let co = StateCoeffs::new(&params, &kin);
        let sigma_bad = co.lam_rhobar / co.p;
        let l = PI / sigma_bad.sqrt();
        let point = check_bifurcation_conditions(
            &params,
            &kin,
            DomainSpec::interval(l),
            ModeIndex::K(1),
            ModeCutoff::Count(8),
        )
        .unwrap();
        assert!(!point.conditions.qk_denominator_nonzero);
        assert!(point.qk.is_none());
    }

    #[test]
    fn thresholds_pairwise_distinct_in_reference_table() {
        let (params, kin) = table1_params(0.03);
        for k in 1..=7u32 {
            let point = check_bifurcation_conditions(
                &params,
                &kin,
                DomainSpec::interval(1.0),
                ModeIndex::K(k),
                ModeCutoff::Count(7),
            )
            .unwrap();
            assert!(point.conditions.eps_distinct, "k = {k}");
        }
    }

    #[test]
    fn resonance_closed_form_matches_brute_force() {
        // The closed form says at most one sigma can resonate with mode k.
        // Scan j <= 10^4 directly and compare verdicts on several domains.
        let kin = builtin_kinetics("paper-default").unwrap();
        let params = ModelParams::new(1.0, 2.0, 0.1, 0.03, Variant::Departure).unwrap();
        let co = StateCoeffs::new(&params, &kin);
        for l in [1.0_f64, 3.0, 7.0] {
            for k in 1..=6u32 {
                let sigma_k = (k as f64 * PI / l).powi(2);
                let closed = resonant_sigma(&co, sigma_k);
                let mut brute_hit = None;
                for j in 1..=10_000u32 {
                    if j == k {
                        continue;
                    }
                    let sigma_j = (j as f64 * PI / l).powi(2);
                    let lhs = co.big_c * sigma_k * sigma_j;
                    let rhs = co.lam_abar * (sigma_k + sigma_j + co.lam_abar);
                    if (lhs - rhs).abs() <= 1e-9 * rhs.abs() {
                        brute_hit = Some(sigma_j);
                        break;
                    }
                }
                match (closed, brute_hit) {
                    (None, None) => {}
                    (Some(star), None) => {
                        // No admissible eigenvalue equals sigma*; verify.
                        assert!(!sigma_is_eigenvalue(DomainSpec::interval(l), star, 1e-9));
                    }
                    (Some(star), Some(hit)) => {
                        assert!((star - hit).abs() <= 1e-6 * star.abs());
                    }
                    (None, Some(hit)) => panic!("brute force found {hit} but closed form none"),
                }
            }
        }
    }

    #[test]
    fn trace_positive_and_det_sign_drives_instability() {
        let kin = builtin_kinetics("paper-default").unwrap();
        for eps in [0.005, 0.029, 0.05, 0.2] {
            let params = ModelParams::new(1.0, 2.0, 0.1, eps, Variant::Departure).unwrap();
            for k in 1..=6u32 {
                let mode = EigenMode::new(DomainSpec::interval(1.0), ModeIndex::K(k)).unwrap();
                let rep = stability_report(&params, &kin, &mode).unwrap();
                assert!(rep.trace > 0.0);
                assert_eq!(rep.unstable, rep.det < 0.0);
                assert_eq!(rep.unstable, eps < rep.eps_bar);
            }
        }
    }

    #[test]
    fn auto_cutoff_encloses_peak() {
        let kin = builtin_kinetics("paper-default").unwrap();
        let params = ModelParams::new(1.0, 2.0, 0.1, 0.05, Variant::Departure).unwrap();
        let co = StateCoeffs::new(&params, &kin);
        let peak = co.sigma_peak().unwrap();
        for l in [0.2_f64, 1.0, 7.0, 40.0] {
            let modes = scan_modes(&params, &kin, DomainSpec::interval(l), ModeCutoff::Auto)
                .unwrap();
            let last_sigma = modes.last().unwrap().sigma;
            // Either the scan reaches past the continuous peak or the first
            // eigenvalue already exceeds it; both enclose the argmax.
            assert!(
                last_sigma >= peak || modes[0].sigma >= peak,
                "L = {l}: cutoff at sigma = {last_sigma}, peak = {peak}"
            );
        }
    }
}
