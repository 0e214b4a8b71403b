//! Weakly-nonlinear coefficients of the bifurcating branch.
//!
//! Near a bifurcation point the nonconstant steady state expands as
//!
//! ```text
//! A   = Abar + s Q Phi + s^2 psi1 + s^3 psi2 + ...
//! rho = rhobar + s Phi + s^2 phi1 + s^3 phi2 + ...
//! eps = eps_bar + K1 s + K2 s^2 + ...
//! ```
//!
//! `K1` is proportional to `int Phi^3` and vanishes identically on intervals
//! and rectangles, making the branch a pitchfork; the sign of `K2` then
//! decides its direction and, for the threshold-maximizing mode, its
//! stability. Evaluating `K2` needs six projections of the correctors, obtained
//! from one 4x4 linear system (first order, tested against `|grad Phi|^2`
//! and `Phi^2`) and one 2x2 system (second order, paired with the
//! null-space-complement constraint `Q int psi2 Phi + int phi2 Phi = 0`).
//!
//! Both model variants share every density-equation coefficient; the
//! attractiveness flux enters only through [`FluxDerivs`], so one assembly
//! path serves the departure and arrival forms alike.

use crate::error::{Error, Result};
use crate::kinetics::{KineticsPack, ModelParams};
use crate::linalg::{residual_inf, solve_dense};
use crate::linstab::{BifurcationPoint, StateCoeffs};
use crate::spectral::{EigenMode, SelfIntegrals};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BranchClass {
    /// `K1 < 0`: transcritical, stable portion at `s > 0`.
    TranscriticalSub,
    /// `K1 > 0`: transcritical, stable portion at `s < 0`.
    TranscriticalSuper,
    /// `K1 = 0, K2 > 0`: patterns branch into `eps > eps_bar`.
    PitchforkSub,
    /// `K1 = 0, K2 < 0`: patterns branch into `eps < eps_bar`.
    PitchforkSuper,
    Degenerate,
}

/// Stability of the bifurcating pattern near `s = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BranchVerdict {
    /// Branches at modes other than the threshold maximizer are always
    /// unstable.
    UnstableNonPrincipal,
    StableForPositiveS,
    StableForNegativeS,
    StableBothSides,
    UnstableBothSides,
    Degenerate,
}

/// The four first-order corrector integrals, in the order the projection
/// system solves them.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FirstOrderIntegrals {
    /// `int psi1 |grad Phi|^2`
    pub psi_grad: f64,
    /// `int phi1 |grad Phi|^2`
    pub phi_grad: f64,
    /// `int psi1 Phi^2`
    pub psi_sq: f64,
    /// `int phi1 Phi^2`
    pub phi_sq: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BranchCoefficients {
    pub k1: f64,
    /// Populated only on the pitchfork path (`k1 = 0`).
    pub k2: Option<f64>,
    /// `(int psi1 Phi, int phi1 Phi)`; both vanish with `int Phi^3`.
    pub projections: (f64, f64),
    pub first_order: Option<FirstOrderIntegrals>,
    /// `(int psi2 Phi, int phi2 Phi)`.
    pub second_order: Option<(f64, f64)>,
    /// 1-norm condition estimate of the 4x4 projection system.
    pub cond_first_order: Option<f64>,
    /// Max-norm relative back-substitution residuals of the 4x4 and 2x2
    /// solves.
    pub residuals: (f64, f64),
    pub classification: BranchClass,
    pub stability: Option<BranchVerdict>,
}

fn qk_or_degenerate(point: &BifurcationPoint) -> Result<f64> {
    point.qk.ok_or_else(|| {
        Error::DegenerateProjection(format!(
            "null-vector denominator vanishes at mode {}",
            point.index
        ))
    })
}

/// First-order projection denominator `p sigma - lambda0 rhobar + (sigma +
/// lambda0 Abar) Q`; shared by the `K1` fraction and the second-order 2x2
/// system.
fn projection_denominator(co: &StateCoeffs, sigma: f64, q: f64) -> Result<f64> {
    let den = co.p * sigma - co.lam_rhobar + (sigma + co.lam_abar) * q;
    let scale = (co.p * sigma).abs() + co.lam_rhobar.abs() + ((sigma + co.lam_abar) * q).abs();
    if den.abs() <= 1e-14 * scale {
        return Err(Error::DegenerateProjection(format!(
            "projection denominator {den:.3e} vanishes"
        )));
    }
    Ok(den)
}

/// `f''/f - (f'/f)^2` at the homogeneous state.
fn f_curv(co: &StateCoeffs) -> f64 {
    let fr = co.kat.f1 / co.kat.f;
    co.kat.f2 / co.kat.f - fr * fr
}

/// `f'''/f - 3 f' f''/f^2 + 2 (f'/f)^3` at the homogeneous state.
fn f_third(co: &StateCoeffs) -> f64 {
    let f = co.kat.f;
    co.kat.f3 / f - 3.0 * co.kat.f1 * co.kat.f2 / (f * f)
        + 2.0 * co.kat.f1.powi(3) / (f * f * f)
}

/// First branch coefficient, with the corrector projections
/// `(int psi1 Phi, int phi1 Phi)`.
pub fn compute_k1(
    point: &BifurcationPoint,
    params: &ModelParams,
    kin: &KineticsPack,
    mode: &EigenMode,
) -> Result<(f64, (f64, f64))> {
    compute_k1_with_integrals(point, params, kin, &mode.self_integrals())
}

/// `compute_k1` against caller-supplied self-integrals. This is the
/// validation hook: feeding a manufactured `int Phi^3 != 0` exercises the
/// transcritical path that rectangles never reach.
pub fn compute_k1_with_integrals(
    point: &BifurcationPoint,
    params: &ModelParams,
    kin: &KineticsPack,
    ints: &SelfIntegrals,
) -> Result<(f64, (f64, f64))> {
    let co = StateCoeffs::new(params, kin);
    let q = qk_or_degenerate(point)?;
    let sigma = point.sigma;
    let eps = point.eps_bar;
    let den = projection_denominator(&co, sigma, q)?;

    let fr = co.kat.f1 / co.kat.f;
    // rho-equation quadratic source projected on Phi.
    let rho_src = params.lambda0 * q - (fr + co.rhobar * f_curv(&co) * q) * q * sigma;
    let psi_proj = rho_src * ints.i3 / den;
    let phi_proj = -q * psi_proj;

    let d = co.flux.d;
    let dxs = d * eps * sigma;
    let bracket = (co.rhobar - 1.0 - dxs - co.abar * q) * rho_src / den
        + (q - 0.5 * co.flux.c2 * q * q * eps * sigma);
    let k1 = bracket * ints.i3 / (d * q * sigma);
    Ok((k1, (psi_proj, phi_proj)))
}

/// Alternative `K1` evaluation, term by term through the corrector
/// projections instead of the collapsed single fraction. Algebraically
/// identical; kept as an independent transcription check.
pub fn k1_via_projections(
    point: &BifurcationPoint,
    params: &ModelParams,
    kin: &KineticsPack,
    ints: &SelfIntegrals,
) -> Result<f64> {
    let co = StateCoeffs::new(params, kin);
    let q = qk_or_degenerate(point)?;
    let sigma = point.sigma;
    let eps = point.eps_bar;
    let den = projection_denominator(&co, sigma, q)?;
    let fr = co.kat.f1 / co.kat.f;
    let rho_src = params.lambda0 * q - (fr + co.rhobar * f_curv(&co) * q) * q * sigma;
    let psi_proj = rho_src * ints.i3 / den;
    let phi_proj = -q * psi_proj;
    let d = co.flux.d;
    let dxs = d * eps * sigma;
    let total = (co.rhobar - 1.0 - dxs) * psi_proj + co.abar * phi_proj
        + (q - 0.5 * co.flux.c2 * q * q * eps * sigma) * ints.i3;
    Ok(total / (d * q * sigma))
}

/// The assembled first-order projection system `m x = rhs` with
/// `x = (int psi1 |grad Phi|^2, int phi1 |grad Phi|^2, int psi1 Phi^2,
/// int phi1 Phi^2)`.
pub(crate) fn first_order_system(
    co: &StateCoeffs,
    lambda0: f64,
    sigma: f64,
    q: f64,
    eps: f64,
    ints: &SelfIntegrals,
) -> ([f64; 16], [f64; 4]) {
    let d = co.flux.d;
    let c2 = co.flux.c2;
    let p = co.p;
    let rb = co.rhobar;
    let ab = co.abar;
    let la = co.lam_abar;
    let lr = co.lam_rhobar;
    let fr = co.kat.f1 / co.kat.f;
    let dxs = d * eps * sigma;
    // Quadratic advection/reaction source of the density equation.
    let g = 2.0 * fr * q + 2.0 * rb * f_curv(co) * q * q;

    #[rustfmt::skip]
    let m = [
        rb - 1.0 - 2.0 * dxs,  ab,             2.0 * dxs * sigma,      0.0,
        lr - 2.0 * p * sigma,  la + 2.0 * sigma, 2.0 * p * sigma * sigma, -2.0 * sigma * sigma,
        2.0 * d * eps,         0.0,            rb - 1.0 - 2.0 * dxs,   ab,
        2.0 * p,               -2.0,           lr - 2.0 * p * sigma,   la + 2.0 * sigma,
    ];
    let two_thirds = 2.0 / 3.0;
    let rhs = [
        -(two_thirds * c2 * q * q * eps * sigma * sigma + q * sigma / 3.0) * ints.i4,
        -(two_thirds * g * sigma * sigma + lambda0 * q * sigma / 3.0) * ints.i4,
        (two_thirds * c2 * q * q * eps * sigma - q) * ints.i4,
        (two_thirds * g * sigma - lambda0 * q) * ints.i4,
    ];
    (m, rhs)
}

/// Closed-form solvability check of the first-order system: it degenerates
/// exactly when `C = lambda0 Abar (lambda0 Abar + 5 sigma) / (4 sigma^2)`.
fn check_solvable(co: &StateCoeffs, sigma: f64) -> Result<()> {
    let bad = co.lam_abar * (co.lam_abar + 5.0 * sigma) / (4.0 * sigma * sigma);
    if (co.big_c - bad).abs() <= 1e-12 * co.big_c.abs().max(bad.abs()) {
        return Err(Error::ResonantK2(format!(
            "solvability condition fails: C = {} hits {bad}",
            co.big_c
        )));
    }
    Ok(())
}

/// Second branch coefficient and every intermediate projection.
///
/// Requires `K1 = 0`, which holds whenever `int Phi^3 = 0` (all interval and
/// square modes).
pub fn compute_k2(
    point: &BifurcationPoint,
    params: &ModelParams,
    kin: &KineticsPack,
    mode: &EigenMode,
) -> Result<BranchCoefficients> {
    let ints = mode.self_integrals();
    let (k1, projections) = compute_k1_with_integrals(point, params, kin, &ints)?;
    if k1 != 0.0 {
        return Err(Error::Precondition(format!(
            "pitchfork coefficient requested on a branch with K1 = {k1}"
        )));
    }

    let co = StateCoeffs::new(params, kin);
    let q = qk_or_degenerate(point)?;
    let sigma = point.sigma;
    let eps = point.eps_bar;
    check_solvable(&co, sigma)?;

    let (m, rhs) = first_order_system(&co, params.lambda0, sigma, q, eps, &ints);
    let (x, cond) = solve_dense(&m, &rhs, 4)?;
    let res4 = residual_inf(&m, &x, &rhs, 4);
    let first = FirstOrderIntegrals {
        psi_grad: x[0],
        phi_grad: x[1],
        psi_sq: x[2],
        phi_sq: x[3],
    };

    // Second-order projections: the density equation tested with Phi, plus
    // the null-space-complement constraint.
    let fr = co.kat.f1 / co.kat.f;
    let a_row = co.p * sigma - co.lam_rhobar;
    let b_row = sigma + co.lam_abar;
    let r = (params.lambda0 - 2.0 * fr * sigma - 2.0 * co.rhobar * f_curv(&co) * q * sigma)
        * first.psi_sq
        + params.lambda0 * q * first.phi_sq
        + 2.0 * fr * first.psi_grad
        - 2.0 * fr * q * first.phi_grad
        - (co.rhobar * f_third(&co) * q + 2.0 * f_curv(&co)) * q * q * sigma * ints.i4 / 3.0;
    let m2 = [a_row, -b_row, q, 1.0];
    let rhs2 = [r, 0.0];
    let (x2, _) = solve_dense(&m2, &rhs2, 2).map_err(|_| {
        Error::DegenerateProjection("second-order projection system singular".to_string())
    })?;
    let res2 = residual_inf(&m2, &x2, &rhs2, 2);
    let (psi2_proj, phi2_proj) = (x2[0], x2[1]);

    let d = co.flux.d;
    let dxs = d * eps * sigma;
    let k2 = ((co.rhobar - 1.0 - dxs) * psi2_proj
        + co.abar * phi2_proj
        + (1.0 - co.flux.c2 * q * eps * sigma) * first.psi_sq
        + q * first.phi_sq
        - co.flux.c3 * q * q * q * eps * sigma * ints.i4)
        / (d * q * sigma);

    let classification = if k2 < 0.0 {
        BranchClass::PitchforkSuper
    } else if k2 > 0.0 {
        BranchClass::PitchforkSub
    } else {
        BranchClass::Degenerate
    };

    Ok(BranchCoefficients {
        k1,
        k2: Some(k2),
        projections,
        first_order: Some(first),
        second_order: Some((psi2_proj, phi2_proj)),
        cond_first_order: Some(cond),
        residuals: (res4, res2),
        classification,
        stability: None,
    })
}

/// Stability verdict for a branch, per the wavemode-selection theorem:
/// non-principal branches are unstable outright; the principal branch
/// follows the signs of `K1` then `K2`.
pub fn classify_branch(coeffs: &BranchCoefficients, is_principal: bool) -> BranchVerdict {
    if !is_principal {
        return BranchVerdict::UnstableNonPrincipal;
    }
    if coeffs.k1 < 0.0 {
        BranchVerdict::StableForPositiveS
    } else if coeffs.k1 > 0.0 {
        BranchVerdict::StableForNegativeS
    } else {
        match coeffs.k2 {
            Some(k2) if k2 < 0.0 => BranchVerdict::StableBothSides,
            Some(k2) if k2 > 0.0 => BranchVerdict::UnstableBothSides,
            _ => BranchVerdict::Degenerate,
        }
    }
}

/// Independent re-assembly of the first-order projection system from the
/// unsimplified weak forms (the attractiveness and density corrector
/// equations tested with `|grad Phi|^2` and with `Phi^2`, with each
/// integration-by-parts identity applied term by term). Returns the max
/// relative deviation against the production assembly; it validates the
/// matrix transcription, not the solve.
pub fn first_order_oracle_rows(
    params: &ModelParams,
    kin: &KineticsPack,
    point: &BifurcationPoint,
    mode: &EigenMode,
) -> Result<f64> {
    let co = StateCoeffs::new(params, kin);
    let q = qk_or_degenerate(point)?;
    let sigma = point.sigma;
    let eps = point.eps_bar;
    let ints = mode.self_integrals();
    let (m, rhs) = first_order_system(&co, params.lambda0, sigma, q, eps, &ints);

    let d = co.flux.d;
    let c2 = co.flux.c2;
    let p = co.p;
    let fr = co.kat.f1 / co.kat.f;
    let curv = f_curv(&co);
    let g_coef = (2.0 * fr + 2.0 * co.rhobar * curv * q) * q;
    let igrad4 = ints.igrad4;
    let mixed = sigma / 3.0 * ints.i4; // int Phi^2 |grad Phi|^2
    let lam = params.lambda0;

    #[rustfmt::skip]
    let oracle_m = [
        // attractiveness eq. x |grad Phi|^2
        co.rhobar - 1.0 + d * eps * (-2.0 * sigma), co.abar, d * eps * 2.0 * sigma * sigma, 0.0,
        // density eq. x |grad Phi|^2 (negated)
        co.lam_rhobar - 2.0 * p * sigma, co.lam_abar + 2.0 * sigma, p * 2.0 * sigma * sigma, -(2.0 * sigma * sigma),
        // attractiveness eq. x Phi^2
        d * eps * 2.0, 0.0, co.rhobar - 1.0 + d * eps * (-2.0 * sigma), co.abar,
        // density eq. x Phi^2 (negated)
        p * 2.0, -2.0, co.lam_rhobar - 2.0 * p * sigma, co.lam_abar + 2.0 * sigma,
    ];
    let oracle_rhs = [
        -(c2 * q * q * eps * igrad4 + (q - c2 * q * q * eps * sigma) * mixed),
        -(g_coef * igrad4) + (g_coef * sigma - lam * q) * mixed,
        -(c2 * q * q * eps * mixed + (q - c2 * q * q * eps * sigma) * ints.i4),
        -(g_coef * mixed) + (g_coef * sigma - lam * q) * ints.i4,
    ];

    let mut worst: f64 = 0.0;
    let scale = m.iter().fold(0.0_f64, |s, v| s.max(v.abs()));
    for i in 0..16 {
        worst = worst.max((m[i] - oracle_m[i]).abs() / scale);
    }
    let rscale = rhs.iter().fold(0.0_f64, |s, v| s.max(v.abs())).max(1e-300);
    for i in 0..4 {
        worst = worst.max((rhs[i] - oracle_rhs[i]).abs() / rscale);
    }
    Ok(worst)
}

/// Branch-type label including the transcritical cases that manufactured
/// `int Phi^3 != 0` geometries produce.
pub fn classify_shape(k1: f64, k2: Option<f64>) -> BranchClass {
    if k1 < 0.0 {
        BranchClass::TranscriticalSub
    } else if k1 > 0.0 {
        BranchClass::TranscriticalSuper
    } else {
        match k2 {
            Some(v) if v < 0.0 => BranchClass::PitchforkSuper,
            Some(v) if v > 0.0 => BranchClass::PitchforkSub,
            _ => BranchClass::Degenerate,
        }
    }
}
