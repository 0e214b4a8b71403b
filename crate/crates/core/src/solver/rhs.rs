//! Spatial operator: conservative face fluxes plus pointwise reactions.
//!
//! Attractiveness flux through a face, per variant:
//!
//! * departure: `eps * (u_R - u_L) / h` with `u = eta(A) (A - A0)`,
//! * arrival:   `eps * mean(eta^2) * (w_R - w_L) / h` with `w = (A - A0)/eta(A)`
//!   and `mean` the arithmetic face average of the nodal `eta^2`.
//!
//! Density flux: `(rho_R - rho_L)/h - 2 rho_face (g_R - g_L)/h` with
//! `g = log f(A)` and `rho_face` central or upwinded against the drift
//! `v = 2 grad g`. Boundary faces carry exactly zero flux, so the
//! divergence telescopes and both fields are conserved up to reactions.

use super::mesh::Mesh;
use crate::exec::{fill2_indexed, fill_indexed};
use crate::kinetics::{KineticsPack, ModelParams, PackKind, Variant};
use crate::spectral::DomainKind;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AdvectionScheme {
    /// Second-order face average (default; the patterns of interest are
    /// smooth).
    Central,
    /// First-order upwinding against the drift, for steep spike regimes.
    Upwind,
}

/// Reusable per-stage tables and face buffers.
pub(super) struct Scratch {
    /// Flux potential: `eta*(A-A0)` (departure) or `(A-A0)/eta` (arrival).
    pot: Vec<f64>,
    /// Nodal `eta^2`; arrival only.
    eta2: Vec<f64>,
    /// `log f(A)`.
    g: Vec<f64>,
    fxa: Vec<f64>,
    fxr: Vec<f64>,
    fya: Vec<f64>,
    fyr: Vec<f64>,
}

impl Scratch {
    pub(super) fn new(mesh: &Mesh, variant: Variant) -> Self {
        let cells = mesh.num_cells();
        let n = mesh.n;
        let (nfx, nfy) = match mesh.domain.kind {
            DomainKind::Interval => (n - 1, 0),
            DomainKind::Square => (n * (n - 1), (n - 1) * n),
        };
        Scratch {
            pot: vec![0.0; cells],
            eta2: match variant {
                Variant::Arrival => vec![0.0; cells],
                Variant::Departure => Vec::new(),
            },
            g: vec![0.0; cells],
            fxa: vec![0.0; nfx],
            fxr: vec![0.0; nfx],
            fya: vec![0.0; nfy],
            fyr: vec![0.0; nfy],
        }
    }
}

/// Per-cell tables for one stage state. The built-in packs get inlined
/// closed forms; this loop runs four times per step and dominates every
/// simulation's cost.
pub(super) fn eval_tables(
    params: &ModelParams,
    kin: &KineticsPack,
    a: &[f64],
    scratch: &mut Scratch,
    force_seq: bool,
) {
    let a0 = params.a0;
    let (pot, eta2, g) = (&mut scratch.pot, &mut scratch.eta2, &mut scratch.g);
    match (params.variant, kin.kind) {
        (Variant::Departure, PackKind::PaperDefault) => {
            fill2_indexed(pot, g, force_seq, |i| {
                let ai = a[i];
                ((1.0 - (-ai).exp()) * (ai - a0), ai.ln_1p().ln())
            });
        }
        (Variant::Arrival, PackKind::PaperDefault) => {
            fill2_indexed(pot, eta2, force_seq, |i| {
                let ai = a[i];
                let e = 1.0 - (-ai).exp();
                ((ai - a0) / e, e * e)
            });
            fill_indexed(g, force_seq, |i| a[i].ln_1p().ln());
        }
        (Variant::Departure, PackKind::ConstEtaLinearF) => {
            fill2_indexed(pot, g, force_seq, |i| (a[i] - a0, a[i].ln()));
        }
        (Variant::Arrival, PackKind::ConstEtaLinearF) => {
            fill2_indexed(pot, eta2, force_seq, |i| (a[i] - a0, 1.0));
            fill_indexed(g, force_seq, |i| a[i].ln());
        }
        (Variant::Departure, PackKind::Custom) => {
            fill2_indexed(pot, g, force_seq, |i| {
                (kin.eta(a[i]) * (a[i] - a0), kin.f(a[i]).ln())
            });
        }
        (Variant::Arrival, PackKind::Custom) => {
            fill2_indexed(pot, eta2, force_seq, |i| {
                let e = kin.eta(a[i]);
                ((a[i] - a0) / e, e * e)
            });
            fill_indexed(g, force_seq, |i| kin.f(a[i]).ln());
        }
    }
}

/// Stability data extracted from the current state: the largest effective
/// attractiveness diffusivity and the largest face drift speed. Reductions
/// are sequential so results do not depend on the thread count.
pub(super) struct CflInfo {
    pub max_diff: f64,
    pub max_speed: f64,
}

pub(super) fn cfl_from_tables(
    params: &ModelParams,
    kin: &KineticsPack,
    mesh: &Mesh,
    a: &[f64],
    scratch: &Scratch,
) -> CflInfo {
    let a0 = params.a0;
    let sign = match params.variant {
        Variant::Departure => 1.0,
        Variant::Arrival => -1.0,
    };
    let mut max_diff: f64 = 0.0;
    match kin.kind {
        PackKind::PaperDefault => {
            for &ai in a {
                let e1 = (-ai).exp();
                max_diff = max_diff.max(((1.0 - e1) + sign * e1 * (ai - a0)).abs());
            }
        }
        PackKind::ConstEtaLinearF => max_diff = 1.0,
        PackKind::Custom => {
            for &ai in a {
                let d = kin.eta(ai) + sign * kin.eta1(ai) * (ai - a0);
                max_diff = max_diff.max(d.abs());
            }
        }
    }
    let mut max_dg: f64 = 0.0;
    let n = mesh.n;
    match mesh.domain.kind {
        DomainKind::Interval => {
            for i in 0..n - 1 {
                max_dg = max_dg.max((scratch.g[i + 1] - scratch.g[i]).abs());
            }
        }
        DomainKind::Square => {
            for j in 0..n {
                for i in 0..n - 1 {
                    let idx = j * n + i;
                    max_dg = max_dg.max((scratch.g[idx + 1] - scratch.g[idx]).abs());
                }
            }
            for j in 0..n - 1 {
                for i in 0..n {
                    let idx = j * n + i;
                    max_dg = max_dg.max((scratch.g[idx + n] - scratch.g[idx]).abs());
                }
            }
        }
    }
    CflInfo { max_diff, max_speed: 2.0 * max_dg / mesh.h }
}

#[allow(clippy::too_many_arguments)]
fn face_fluxes(
    params: &ModelParams,
    mesh: &Mesh,
    scheme: AdvectionScheme,
    rho: &[f64],
    scratch: &mut Scratch,
    stride: usize,
    horizontal: bool,
    force_seq: bool,
) {
    let n = mesh.n;
    let inv_h = 1.0 / mesh.h;
    let eps = params.eps;
    let variant = params.variant;
    let (pot, eta2, g) = (&scratch.pot, &scratch.eta2, &scratch.g);
    let (fa, fr) = if horizontal {
        (&mut scratch.fxa, &mut scratch.fxr)
    } else {
        (&mut scratch.fya, &mut scratch.fyr)
    };
    // Map face slot -> left cell index.
    let left_of = move |f: usize| -> usize {
        if stride == 1 {
            // x-faces: n-1 per row.
            let row = f / (n - 1);
            let fi = f % (n - 1);
            row * n + fi
        } else {
            // y-faces: flat layout already matches cell indexing.
            f
        }
    };
    fill2_indexed(fa, fr, force_seq, |fidx| {
        let l = left_of(fidx);
        let r = l + stride;
        let flux_a = match variant {
            Variant::Departure => eps * (pot[r] - pot[l]) * inv_h,
            Variant::Arrival => eps * 0.5 * (eta2[l] + eta2[r]) * (pot[r] - pot[l]) * inv_h,
        };
        let dg = g[r] - g[l];
        let rho_face = match scheme {
            AdvectionScheme::Central => 0.5 * (rho[l] + rho[r]),
            AdvectionScheme::Upwind => {
                if dg > 0.0 {
                    rho[l]
                } else {
                    rho[r]
                }
            }
        };
        let flux_r = (rho[r] - rho[l]) * inv_h - 2.0 * rho_face * dg * inv_h;
        (flux_a, flux_r)
    });
}

pub(super) type Forcing = dyn Fn(f64, f64, f64) -> (f64, f64) + Send + Sync;

/// Full right-hand side for one stage, given tables already evaluated for
/// the same `(a, rho)`.
#[allow(clippy::too_many_arguments)]
pub(super) fn spatial_rhs(
    params: &ModelParams,
    mesh: &Mesh,
    scheme: AdvectionScheme,
    reactions: bool,
    forcing: Option<&Forcing>,
    a: &[f64],
    rho: &[f64],
    t: f64,
    scratch: &mut Scratch,
    da: &mut [f64],
    drho: &mut [f64],
    force_seq: bool,
) {
    let n = mesh.n;
    let h = mesh.h;
    let inv_h = 1.0 / h;
    match mesh.domain.kind {
        DomainKind::Interval => {
            face_fluxes(params, mesh, scheme, rho, scratch, 1, true, force_seq);
        }
        DomainKind::Square => {
            face_fluxes(params, mesh, scheme, rho, scratch, 1, true, force_seq);
            face_fluxes(params, mesh, scheme, rho, scratch, n, false, force_seq);
        }
    }
    let (fxa, fxr, fya, fyr) = (&scratch.fxa, &scratch.fxr, &scratch.fya, &scratch.fyr);
    let a0 = params.a0;
    let lambda0 = params.lambda0;
    let lb = params.lambda0 * params.bbar;
    let two_d = mesh.domain.kind == DomainKind::Square;

    fill2_indexed(da, drho, force_seq, |idx| {
        let (mut div_a, mut div_r);
        if two_d {
            let i = idx % n;
            let j = idx / n;
            let fl = j * (n - 1) + i;
            let xr = if i < n - 1 { (fxa[fl], fxr[fl]) } else { (0.0, 0.0) };
            let xl = if i > 0 { (fxa[fl - 1], fxr[fl - 1]) } else { (0.0, 0.0) };
            let yu = if j < n - 1 { (fya[idx], fyr[idx]) } else { (0.0, 0.0) };
            let yd = if j > 0 { (fya[idx - n], fyr[idx - n]) } else { (0.0, 0.0) };
            div_a = (xr.0 - xl.0) * inv_h + (yu.0 - yd.0) * inv_h;
            div_r = (xr.1 - xl.1) * inv_h + (yu.1 - yd.1) * inv_h;
        } else {
            let right = if idx < n - 1 { (fxa[idx], fxr[idx]) } else { (0.0, 0.0) };
            let left = if idx > 0 { (fxa[idx - 1], fxr[idx - 1]) } else { (0.0, 0.0) };
            div_a = (right.0 - left.0) * inv_h;
            div_r = (right.1 - left.1) * inv_h;
        }
        if reactions {
            div_a += -a[idx] + a0 + rho[idx] * a[idx];
            div_r += -lambda0 * rho[idx] * a[idx] + lb;
        }
        if let Some(force) = forcing {
            let (x, y) = mesh.center(idx);
            let (sa, sr) = force(x, y, t);
            div_a += sa;
            div_r += sr;
        }
        (div_a, div_r)
    });
}
