//! Quantitative descriptors of simulated patterns: cosine-mode spectra,
//! spike counts, amplitudes, monotonicity and coarsening events. This is
//! the bridge between the wavemode-selection predictions and solver output.
//!
//! "Spike" has no canonical definition; the operational rule here is a
//! strict local maximum whose prominence exceeds a configurable fraction of
//! the field's total range. In 2D the prominence of a peak is measured
//! against the field minimum, which is adequate for the well-separated
//! hotspots these models produce.

use crate::error::{Error, Result};
use crate::kinetics::{KineticsPack, ModelParams};
use crate::linstab::{select_wavemode, ModeCutoff};
use crate::solver::{initial_condition, IcWave, Mesh, Outcome, Perturb, Simulation, SolveConfig};
use crate::spectral::{DomainKind, EigenMode, ModeIndex};
use serde::Serialize;

/// Projection coefficients `int (field - mean) Phi_k` by midpoint
/// quadrature on the cell centers. On uniform cell-centered grids the
/// sampled cosines are exactly discretely orthogonal, so a pure mode
/// yields a one-hot spectrum.
pub fn mode_projection(
    field: &[f64],
    mesh: &Mesh,
    modes: &[ModeIndex],
) -> Result<Vec<(ModeIndex, f64)>> {
    let vol = mesh.cell_volume();
    let mean = field.iter().sum::<f64>() / field.len() as f64;
    let mut out = Vec::with_capacity(modes.len());
    for &index in modes {
        let mode = EigenMode::new(mesh.domain, index)?;
        let mut acc = 0.0;
        for (idx, &v) in field.iter().enumerate() {
            let (x, y) = mesh.center(idx);
            acc += (v - mean) * mode.eval(x, y);
        }
        out.push((index, acc * vol));
    }
    Ok(out)
}

/// Mode with the largest absolute projection coefficient.
pub fn dominant_mode(spectrum: &[(ModeIndex, f64)]) -> Option<ModeIndex> {
    spectrum
        .iter()
        .max_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).expect("finite spectrum"))
        .map(|&(m, _)| m)
}

/// Default spectrum index set for a mesh: every axis mode (or index pair)
/// the grid can resolve, capped to keep reports small.
pub fn default_mode_set(mesh: &Mesh) -> Vec<ModeIndex> {
    match mesh.domain.kind {
        DomainKind::Interval => {
            let kmax = (mesh.n / 2).min(64) as u32;
            (1..=kmax).map(ModeIndex::K).collect()
        }
        DomainKind::Square => {
            let mmax = (mesh.n / 2).min(16) as u32;
            let mut v = Vec::new();
            for m in 0..=mmax {
                for n in 0..=mmax {
                    if m != 0 || n != 0 {
                        v.push(ModeIndex::Pair(m, n));
                    }
                }
            }
            v
        }
    }
}

/// `max - min` of a field.
pub fn amplitude(field: &[f64]) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in field {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if field.is_empty() {
        0.0
    } else {
        hi - lo
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Monotonicity {
    Decreasing,
    Increasing,
}

/// Strict monotonicity of a 1D profile.
pub fn monotonicity(field: &[f64]) -> Option<Monotonicity> {
    if field.len() < 2 {
        return None;
    }
    if field.windows(2).all(|w| w[1] < w[0]) {
        Some(Monotonicity::Decreasing)
    } else if field.windows(2).all(|w| w[1] > w[0]) {
        Some(Monotonicity::Increasing)
    } else {
        None
    }
}

/// Spike detection controls.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SpikeParams {
    /// Fraction of the field range a peak's prominence must exceed.
    pub prominence_frac: f64,
    /// Count one-sided maxima at the domain boundary (they are a genuine
    /// phenomenon here: boundary spikes).
    pub include_boundary: bool,
}

impl Default for SpikeParams {
    fn default() -> Self {
        SpikeParams { prominence_frac: 0.1, include_boundary: true }
    }
}

/// Spike (1D) / hotspot (2D) count with flat cell indices of the maxima.
pub fn count_spikes(field: &[f64], mesh: &Mesh, params: SpikeParams) -> (usize, Vec<usize>) {
    assert!(
        params.prominence_frac > 0.0 && params.prominence_frac < 1.0,
        "prominence fraction must lie in (0, 1)"
    );
    let range = amplitude(field);
    if range == 0.0 {
        return (0, Vec::new());
    }
    let threshold = params.prominence_frac * range;
    match mesh.domain.kind {
        DomainKind::Interval => {
            let peaks = interval_peaks(field, params.include_boundary);
            let kept: Vec<usize> = peaks
                .into_iter()
                .filter(|&p| prominence_1d(field, p) > threshold)
                .collect();
            (kept.len(), kept)
        }
        DomainKind::Square => {
            let n = mesh.n;
            let min = field.iter().cloned().fold(f64::INFINITY, f64::min);
            let mut kept = Vec::new();
            for j in 0..n {
                for i in 0..n {
                    let idx = j * n + i;
                    if !params.include_boundary && (i == 0 || j == 0 || i == n - 1 || j == n - 1)
                    {
                        continue;
                    }
                    let v = field[idx];
                    let mut is_max = true;
                    for dj in -1i64..=1 {
                        for di in -1i64..=1 {
                            if di == 0 && dj == 0 {
                                continue;
                            }
                            let (ni, nj) = (i as i64 + di, j as i64 + dj);
                            if ni < 0 || nj < 0 || ni >= n as i64 || nj >= n as i64 {
                                continue;
                            }
                            let nidx = nj as usize * n + ni as usize;
                            // Ties break toward the lowest flat index so a
                            // plateau contributes exactly one hotspot.
                            if field[nidx] > v || (field[nidx] == v && nidx < idx) {
                                is_max = false;
                            }
                        }
                    }
                    if is_max && (v - min) > threshold {
                        kept.push(idx);
                    }
                }
            }
            (kept.len(), kept)
        }
    }
}

fn interval_peaks(field: &[f64], include_boundary: bool) -> Vec<usize> {
    let n = field.len();
    let mut peaks = Vec::new();
    if n < 2 {
        return peaks;
    }
    // Plateau-aware scan: a run of equal values bounded by strictly lower
    // neighbors is one peak, reported at its middle cell. Symmetric
    // profiles on even grids tie at the top, so plain strictness would
    // miss them.
    let mut i = 0usize;
    while i < n {
        let mut j = i;
        while j + 1 < n && field[j + 1] == field[i] {
            j += 1;
        }
        let left_ok = if i == 0 { include_boundary } else { field[i] > field[i - 1] };
        let right_ok = if j == n - 1 { include_boundary } else { field[i] > field[j + 1] };
        if left_ok && right_ok && !(i == 0 && j == n - 1) {
            peaks.push((i + j) / 2);
        }
        i = j + 1;
    }
    peaks
}

/// Topographic prominence of a 1D peak: height above the higher of the two
/// key cols toward the nearest higher terrain (or the rim for the global
/// maximum).
fn prominence_1d(field: &[f64], peak: usize) -> f64 {
    let h = field[peak];
    let mut col_left = f64::INFINITY;
    let mut i = peak;
    while i > 0 {
        i -= 1;
        col_left = col_left.min(field[i]);
        if field[i] > h {
            break;
        }
    }
    let mut col_right = f64::INFINITY;
    let mut i = peak;
    while i + 1 < field.len() {
        i += 1;
        col_right = col_right.min(field[i]);
        if field[i] > h {
            break;
        }
    }
    // Peaks at the array ends see only one side.
    let col = match (col_left.is_finite(), col_right.is_finite()) {
        (true, true) => col_left.max(col_right),
        (true, false) => col_left,
        (false, true) => col_right,
        (false, false) => h,
    };
    h - col
}

/// Time-stamped spike-count change.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SpikeEvent {
    pub t: f64,
    pub count_before: usize,
    pub count_after: usize,
}

/// Spike-count changes of the attractiveness field across a snapshot trace;
/// merging shows up as a decrease, emergence as an increase.
pub fn spike_events(
    snapshots: &[crate::solver::FieldPair],
    mesh: &Mesh,
    params: SpikeParams,
) -> Vec<SpikeEvent> {
    let mut events = Vec::new();
    let mut prev: Option<usize> = None;
    for snap in snapshots {
        let (count, _) = count_spikes(&snap.a, mesh, params);
        if let Some(p) = prev {
            if count != p {
                events.push(SpikeEvent { t: snap.t, count_before: p, count_after: count });
            }
        }
        prev = Some(count);
    }
    events
}

/// Full descriptor bundle for one run.
#[derive(Debug, Clone, Serialize)]
pub struct PatternReport {
    pub dominant_mode: Option<ModeIndex>,
    pub mode_spectrum: Vec<(ModeIndex, f64)>,
    pub spike_count: usize,
    pub amplitude: f64,
    /// 1D only.
    pub monotone: Option<Monotonicity>,
    pub event_log: Vec<SpikeEvent>,
}

pub fn pattern_report(
    final_a: &[f64],
    snapshots: &[crate::solver::FieldPair],
    mesh: &Mesh,
    spike: SpikeParams,
) -> Result<PatternReport> {
    let spectrum = mode_projection(final_a, mesh, &default_mode_set(mesh))?;
    let (count, _) = count_spikes(final_a, mesh, spike);
    Ok(PatternReport {
        dominant_mode: dominant_mode(&spectrum),
        mode_spectrum: spectrum,
        spike_count: count,
        amplitude: amplitude(final_a),
        monotone: match mesh.domain.kind {
            DomainKind::Interval => monotonicity(final_a),
            DomainKind::Square => None,
        },
        event_log: spike_events(snapshots, mesh, spike),
    })
}

/// Least-squares slope of `log(amplitude)` against `log(gap)`.
///
/// Near a supercritical pitchfork the steady amplitude scales like the
/// square root of the distance below the threshold, so the fitted exponent
/// should sit near one half.
pub fn fit_scaling_exponent(samples: &[(f64, f64)]) -> Result<f64> {
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .filter(|&&(gap, amp)| gap > 0.0 && amp > 0.0)
        .map(|&(gap, amp)| (gap.ln(), amp.ln()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "scaling fit needs at least 3 positive samples, got {}",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-300 {
        return Err(Error::InsufficientData("degenerate abscissae".to_string()));
    }
    Ok((n * sxy - sx * sy) / denom)
}

/// Outcome of the amplitude-scaling oracle.
#[derive(Debug, Clone, Serialize)]
pub struct ScalingFit {
    pub exponent: f64,
    /// `(eps, gap, amplitude)` of each run that reached a steady state.
    pub samples: Vec<(f64, f64, f64)>,
    pub excluded: usize,
    pub eps_bar_max: f64,
}

/// Run the solver at each `eps` below the principal threshold, measure the
/// steady pattern amplitude of `A`, and fit the scaling exponent.
///
/// Each run seeds the principal wavemode with the same fixed amplitude, so
/// the measured steady states are comparable; runs that fail to settle are
/// excluded (with a count). `params.eps` in the template is ignored.
pub fn amplitude_vs_eps(
    params: &ModelParams,
    kin: &KineticsPack,
    mesh: &Mesh,
    eps_list: &[f64],
    cfg: &SolveConfig,
    seed_amp: f64,
) -> Result<ScalingFit> {
    let sel = select_wavemode(params, kin, mesh.domain, ModeCutoff::Auto)?;
    let eps_bar = sel.eps_bar_max;
    let wave = match sel.modes[0] {
        ModeIndex::K(k) => IcWave::Axis { k: k as f64 },
        ModeIndex::Pair(m, n) => IcWave::Tensor { m: m as f64, n: n as f64 },
    };

    let run_one = |&eps: &f64| -> Option<(f64, f64, f64)> {
        if !(eps > 0.0 && eps < eps_bar) {
            return None;
        }
        let p = ModelParams { eps, ..*params };
        let perturbs = [Perturb { wave, amp_a: seed_amp, amp_rho: seed_amp }];
        let mut rng = NoRng;
        let ic = initial_condition(&p, mesh, &perturbs, 0.0, &mut rng);
        let mut sim = Simulation::new(p, kin.clone(), mesh.clone(), cfg.clone()).ok()?;
        let result = sim.run_to_steady(ic);
        (result.outcome == Outcome::SteadyState)
            .then(|| (eps, eps_bar - eps, amplitude(&result.state.a)))
    };

    #[cfg(feature = "parallel")]
    let results: Vec<Option<(f64, f64, f64)>> = {
        use rayon::prelude::*;
        eps_list.par_iter().map(run_one).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let results: Vec<Option<(f64, f64, f64)>> = eps_list.iter().map(run_one).collect();

    let samples: Vec<(f64, f64, f64)> = results.into_iter().flatten().collect();
    let excluded = eps_list.len() - samples.len();
    let exponent =
        fit_scaling_exponent(&samples.iter().map(|&(_, g, a)| (g, a)).collect::<Vec<_>>())?;
    Ok(ScalingFit { exponent, samples, excluded, eps_bar_max: eps_bar })
}

/// Zero-noise placeholder RNG for deterministic seeding paths.
struct NoRng;

impl rand::RngCore for NoRng {
    fn next_u32(&mut self) -> u32 {
        0
    }
    fn next_u64(&mut self) -> u64 {
        0
    }
    fn fill_bytes(&mut self, dest: &mut [u8]) {
        dest.fill(0);
    }
    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> std::result::Result<(), rand::Error> {
        dest.fill(0);
        Ok(())
    }
}
