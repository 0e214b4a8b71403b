//! Method-of-lines time integration of both model variants.
//!
//! Space: conservative cell-centered finite volumes with exact zero-flux
//! boundary faces (see [`rhs`] internals). Time: classical four-stage
//! Runge-Kutta under a parabolic/advective CFL bound with halving-on-
//! rejection, plus normalized steady-state detection
//! `||rhs||_inf / (1 + ||state||_inf) < ss_tol`.

mod mesh;
mod rhs;

pub use mesh::Mesh;
pub use rhs::AdvectionScheme;

use crate::error::{Error, Result};
use crate::kinetics::{KineticsPack, ModelParams};
use rand::Rng;
use rhs::{cfl_from_tables, eval_tables, spatial_rhs, Forcing, Scratch};
use serde::Serialize;

/// Cell-centered attractiveness and criminal-density fields at one time.
#[derive(Debug, Clone, Serialize)]
pub struct FieldPair {
    pub a: Vec<f64>,
    pub rho: Vec<f64>,
    pub t: f64,
}

impl FieldPair {
    pub fn homogeneous(params: &ModelParams, mesh: &Mesh) -> Self {
        let (abar, rhobar) = params.homogeneous_state();
        let cells = mesh.num_cells();
        FieldPair {
            a: vec![abar; cells],
            rho: vec![rhobar; cells],
            t: 0.0,
        }
    }

    pub fn norm_inf(&self) -> f64 {
        let ma = self.a.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        self.rho.iter().fold(ma, |m, v| m.max(v.abs()))
    }

    /// Positivity and finiteness gate used for step acceptance: `A > 0`,
    /// `rho >= 0`, everything finite.
    pub fn is_admissible(&self) -> bool {
        self.a.iter().all(|v| v.is_finite() && *v > 0.0)
            && self.rho.iter().all(|v| v.is_finite() && *v >= 0.0)
    }
}

/// Cosine wave of an initial perturbation; wavenumbers may be fractional
/// (such profiles simply fail to be flux-free at the far wall, which the
/// dynamics immediately smooths out).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum IcWave {
    /// `cos(k pi x / L)`
    Axis { k: f64 },
    /// `cos(m pi x / L) cos(n pi y / L)`
    Tensor { m: f64, n: f64 },
}

/// One additive perturbation of the homogeneous state, with separate
/// amplitudes for the two fields.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Perturb {
    pub wave: IcWave,
    pub amp_a: f64,
    pub amp_rho: f64,
}

/// Homogeneous state plus cosine perturbations plus optional uniform noise
/// in `[-noise_amp, noise_amp]`, drawn per cell and field in a fixed order
/// so a seeded generator reproduces the field exactly.
pub fn initial_condition(
    params: &ModelParams,
    mesh: &Mesh,
    perturbs: &[Perturb],
    noise_amp: f64,
    rng: &mut impl Rng,
) -> FieldPair {
    let mut state = FieldPair::homogeneous(params, mesh);
    let l = mesh.domain.length;
    let pi = std::f64::consts::PI;
    for idx in 0..mesh.num_cells() {
        let (x, y) = mesh.center(idx);
        for p in perturbs {
            let w = match p.wave {
                IcWave::Axis { k } => (k * pi * x / l).cos(),
                IcWave::Tensor { m, n } => (m * pi * x / l).cos() * (n * pi * y / l).cos(),
            };
            state.a[idx] += p.amp_a * w;
            state.rho[idx] += p.amp_rho * w;
        }
        if noise_amp > 0.0 {
            state.a[idx] += noise_amp * (2.0 * rng.gen::<f64>() - 1.0);
            state.rho[idx] += noise_amp * (2.0 * rng.gen::<f64>() - 1.0);
        }
    }
    state
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveConfig {
    pub dt_init: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    /// CFL safety factor in `(0, 1]`.
    pub safety: f64,
    pub t_end: f64,
    /// Normalized steady-state residual threshold.
    pub ss_tol: f64,
    /// Snapshot cadence in time units; `INFINITY` records only the initial
    /// and final states.
    pub snapshot_every: f64,
    pub advection: AdvectionScheme,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            dt_init: 1e-4,
            dt_min: 1e-14,
            dt_max: 1.0,
            safety: 0.9,
            t_end: 500.0,
            ss_tol: 1e-8,
            snapshot_every: f64::INFINITY,
            advection: AdvectionScheme::Central,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParameter(what.to_string()));
        if !(self.dt_min > 0.0 && self.dt_min <= self.dt_init && self.dt_init <= self.dt_max) {
            return bad("need 0 < dt_min <= dt_init <= dt_max");
        }
        if !(self.safety > 0.0 && self.safety <= 1.0) {
            return bad("safety must lie in (0, 1]");
        }
        if !(self.ss_tol > 0.0) {
            return bad("ss_tol must be positive");
        }
        if !(self.t_end > 0.0) {
            return bad("t_end must be positive");
        }
        if !(self.snapshot_every > 0.0) {
            return bad("snapshot_every must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Outcome {
    SteadyState,
    TEndReached,
    Blowup,
}

/// One accepted (or steady-detected) step.
#[derive(Debug, Clone, Copy)]
pub struct StepInfo {
    pub dt: f64,
    /// Normalized residual at the step's starting state.
    pub residual: f64,
    pub rejects: u32,
    /// The starting state already met the steady-state tolerance; nothing
    /// was advanced.
    pub steady: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunResult {
    pub state: FieldPair,
    pub outcome: Outcome,
    pub snapshots: Vec<FieldPair>,
    pub steps: u64,
    pub rejects: u64,
    /// Normalized residual at the final state.
    pub residual: f64,
}

/// Owns the buffers of one run; distinct simulations are independent.
pub struct Simulation {
    pub params: ModelParams,
    pub kin: KineticsPack,
    pub mesh: Mesh,
    pub cfg: SolveConfig,
    reactions: bool,
    forcing: Option<Box<Forcing>>,
    scratch: Scratch,
    k1: (Vec<f64>, Vec<f64>),
    k2: (Vec<f64>, Vec<f64>),
    k3: (Vec<f64>, Vec<f64>),
    k4: (Vec<f64>, Vec<f64>),
    stage: (Vec<f64>, Vec<f64>),
    next: (Vec<f64>, Vec<f64>),
    first_step_done: bool,
}

impl Simulation {
    pub fn new(params: ModelParams, kin: KineticsPack, mesh: Mesh, cfg: SolveConfig) -> Result<Self> {
        params.validate()?;
        cfg.validate()?;
        let cells = mesh.num_cells();
        let pair = || (vec![0.0; cells], vec![0.0; cells]);
        let scratch = Scratch::new(&mesh, params.variant);
        Ok(Simulation {
            params,
            kin,
            mesh,
            cfg,
            reactions: true,
            forcing: None,
            scratch,
            k1: pair(),
            k2: pair(),
            k3: pair(),
            k4: pair(),
            stage: pair(),
            next: pair(),
            first_step_done: false,
        })
    }

    /// Disable the reaction terms, leaving the bare conservative transport
    /// operator. Used by conservation checks.
    pub fn set_reactions(&mut self, on: bool) {
        self.reactions = on;
    }

    /// Attach an additive source `(x, y, t) -> (dA/dt, drho/dt)`; the
    /// manufactured-solution convergence harness drives the solver this way.
    pub fn set_forcing(
        &mut self,
        f: impl Fn(f64, f64, f64) -> (f64, f64) + Send + Sync + 'static,
    ) {
        self.forcing = Some(Box::new(f));
    }

    fn eval_rhs_into(&mut self, a: &[f64], rho: &[f64], t: f64, which: usize) {
        let Simulation {
            params, kin, mesh, cfg, reactions, forcing, scratch, k1, k2, k3, k4, ..
        } = self;
        eval_tables(params, kin, a, scratch, false);
        let out = match which {
            1 => k1,
            2 => k2,
            3 => k3,
            _ => k4,
        };
        spatial_rhs(
            params,
            mesh,
            cfg.advection,
            *reactions,
            forcing.as_deref(),
            a,
            rho,
            t,
            scratch,
            &mut out.0,
            &mut out.1,
            false,
        );
    }

    /// Right-hand side at the given state (allocating convenience wrapper).
    pub fn rhs(&mut self, state: &FieldPair) -> (Vec<f64>, Vec<f64>) {
        self.eval_rhs_into(&state.a, &state.rho, state.t, 1);
        (self.k1.0.clone(), self.k1.1.clone())
    }

    fn stage_state(&mut self, base: &FieldPair, coeff: f64, which: usize) {
        let k = match which {
            1 => &self.k1,
            2 => &self.k2,
            _ => &self.k3,
        };
        for i in 0..base.a.len() {
            self.stage.0[i] = base.a[i] + coeff * k.0[i];
            self.stage.1[i] = base.rho[i] + coeff * k.1[i];
        }
    }

    /// CFL-limited step size at the current state; assumes tables for the
    /// state are already in scratch.
    fn cfl_dt(&self, a: &[f64]) -> f64 {
        let info = cfl_from_tables(&self.params, &self.kin, &self.mesh, a, &self.scratch);
        let h = self.mesh.h;
        let dim = self.mesh.dim() as f64;
        // rho diffuses with unit coefficient alongside the nonlinear
        // attractiveness diffusivity.
        let diff = (self.params.eps * info.max_diff).max(1.0);
        let mut dt = self.cfg.safety * h * h / (2.0 * dim * diff);
        if info.max_speed > 0.0 {
            dt = dt.min(self.cfg.safety * h / info.max_speed);
        }
        dt.min(self.cfg.dt_max)
    }

    /// Advance one accepted RK4 step (or detect steadiness without moving).
    pub fn step(&mut self, state: &mut FieldPair) -> Result<StepInfo> {
        // Stage 1 doubles as the residual probe.
        self.eval_rhs_into(&state.a, &state.rho, state.t, 1);
        let rhs_norm = {
            let ma = self.k1.0.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            self.k1.1.iter().fold(ma, |m, v| m.max(v.abs()))
        };
        let residual = rhs_norm / (1.0 + state.norm_inf());
        if residual < self.cfg.ss_tol {
            return Ok(StepInfo { dt: 0.0, residual, rejects: 0, steady: true });
        }

        let mut dt = self.cfl_dt(&state.a);
        if !self.first_step_done {
            dt = dt.min(self.cfg.dt_init);
        }
        let remaining = self.cfg.t_end - state.t;
        if remaining > 0.0 {
            dt = dt.min(remaining);
        }

        let mut rejects = 0u32;
        loop {
            // Stages 2..4 from the frozen stage-1 slope.
            self.stage_state(state, 0.5 * dt, 1);
            let (sa, sr) = (std::mem::take(&mut self.stage.0), std::mem::take(&mut self.stage.1));
            self.eval_rhs_into(&sa, &sr, state.t + 0.5 * dt, 2);
            (self.stage.0, self.stage.1) = (sa, sr);

            self.stage_state(state, 0.5 * dt, 2);
            let (sa, sr) = (std::mem::take(&mut self.stage.0), std::mem::take(&mut self.stage.1));
            self.eval_rhs_into(&sa, &sr, state.t + 0.5 * dt, 3);
            (self.stage.0, self.stage.1) = (sa, sr);

            self.stage_state(state, dt, 3);
            let (sa, sr) = (std::mem::take(&mut self.stage.0), std::mem::take(&mut self.stage.1));
            self.eval_rhs_into(&sa, &sr, state.t + dt, 4);
            (self.stage.0, self.stage.1) = (sa, sr);

            let sixth = dt / 6.0;
            let mut ok = true;
            for i in 0..state.a.len() {
                let na = state.a[i]
                    + sixth * (self.k1.0[i] + 2.0 * self.k2.0[i] + 2.0 * self.k3.0[i] + self.k4.0[i]);
                let nr = state.rho[i]
                    + sixth * (self.k1.1[i] + 2.0 * self.k2.1[i] + 2.0 * self.k3.1[i] + self.k4.1[i]);
                self.next.0[i] = na;
                self.next.1[i] = nr;
                ok &= na.is_finite() && na > 0.0 && nr.is_finite() && nr >= 0.0;
            }
            if ok {
                std::mem::swap(&mut state.a, &mut self.next.0);
                std::mem::swap(&mut state.rho, &mut self.next.1);
                state.t += dt;
                self.first_step_done = true;
                return Ok(StepInfo { dt, residual, rejects, steady: false });
            }
            rejects += 1;
            dt *= 0.5;
            if dt < self.cfg.dt_min {
                return Err(Error::NumericalBlowup { t: state.t, dt });
            }
        }
    }

    /// Integrate until the steady-state criterion triggers or `t_end` is
    /// reached, recording snapshots every `snapshot_every` time units plus
    /// the initial and final states.
    pub fn run_to_steady(&mut self, state0: FieldPair) -> RunResult {
        let mut state = state0;
        let mut snapshots = vec![state.clone()];
        let mut next_snap = state.t + self.cfg.snapshot_every;
        let mut steps = 0u64;
        let mut rejects = 0u64;
        let mut residual = f64::NAN;
        let outcome = loop {
            match self.step(&mut state) {
                Ok(info) => {
                    residual = info.residual;
                    rejects += info.rejects as u64;
                    if info.steady {
                        break Outcome::SteadyState;
                    }
                    steps += 1;
                    if state.t >= next_snap {
                        snapshots.push(state.clone());
                        next_snap += self.cfg.snapshot_every;
                    }
                    if state.t >= self.cfg.t_end {
                        break Outcome::TEndReached;
                    }
                }
                Err(Error::NumericalBlowup { .. }) => break Outcome::Blowup,
                Err(_) => unreachable!("step only fails with NumericalBlowup"),
            }
        };
        if snapshots.last().map(|s| s.t) != Some(state.t) {
            snapshots.push(state.clone());
        }
        RunResult { state, outcome, snapshots, steps, rejects, residual }
    }
}

/// One-off right-hand side evaluation.
pub fn rhs(
    state: &FieldPair,
    params: &ModelParams,
    kin: &KineticsPack,
    mesh: &Mesh,
    scheme: AdvectionScheme,
) -> (Vec<f64>, Vec<f64>) {
    rhs_inner(state, params, kin, mesh, scheme, true, false)
}

/// Sequential-only variant of [`rhs`], kept callable for benchmarking the
/// parallel speedup.
pub fn rhs_seq(
    state: &FieldPair,
    params: &ModelParams,
    kin: &KineticsPack,
    mesh: &Mesh,
    scheme: AdvectionScheme,
) -> (Vec<f64>, Vec<f64>) {
    rhs_inner(state, params, kin, mesh, scheme, true, true)
}

/// Flux-divergence part only (reaction terms off); the conservation checks
/// sum exactly this.
pub fn flux_divergence(
    state: &FieldPair,
    params: &ModelParams,
    kin: &KineticsPack,
    mesh: &Mesh,
    scheme: AdvectionScheme,
) -> (Vec<f64>, Vec<f64>) {
    rhs_inner(state, params, kin, mesh, scheme, false, false)
}

fn rhs_inner(
    state: &FieldPair,
    params: &ModelParams,
    kin: &KineticsPack,
    mesh: &Mesh,
    scheme: AdvectionScheme,
    reactions: bool,
    force_seq: bool,
) -> (Vec<f64>, Vec<f64>) {
    let cells = mesh.num_cells();
    let mut scratch = Scratch::new(mesh, params.variant);
    let mut da = vec![0.0; cells];
    let mut drho = vec![0.0; cells];
    eval_tables(params, kin, &state.a, &mut scratch, force_seq);
    spatial_rhs(
        params,
        mesh,
        scheme,
        reactions,
        None,
        &state.a,
        &state.rho,
        state.t,
        &mut scratch,
        &mut da,
        &mut drho,
        force_seq,
    );
    (da, drho)
}
