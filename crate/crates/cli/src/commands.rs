//! Command implementations shared by the binary and the test suites.

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::output::{full, write_json, write_snapshot, write_text, Manifest};
use hotspot_core::branch::{classify_branch, classify_shape, compute_k1, compute_k2};
use hotspot_core::kinetics::validate_kinetics;
use hotspot_core::linstab::{
    check_bifurcation_conditions, select_wavemode, threshold_table, ModeCutoff, TIE_REL_TOL,
};
use hotspot_core::pattern::{pattern_report, PatternReport, SpikeParams};
use hotspot_core::solver::{
    initial_condition, FieldPair, IcWave, Mesh, Outcome, Perturb, Simulation,
};
use hotspot_core::spectral::{DomainKind, DomainSpec, EigenMode, ModeIndex};
use hotspot_core::verify::{verify_bundle, OracleReport, VerifyOptions};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

fn cutoff_for(cfg: &RunConfig) -> ModeCutoff {
    match (cfg.domain.kind, cfg.table_max_mode) {
        (_, None) => ModeCutoff::Auto,
        (DomainKind::Interval, Some(max)) => ModeCutoff::Count(max as usize),
        (DomainKind::Square, Some(max)) => {
            // All pairs with m, n <= max fit under this eigenvalue.
            let unit = (std::f64::consts::PI / cfg.domain.length).powi(2);
            ModeCutoff::MaxSigma(unit * (2 * max * max) as f64 + unit * 0.5)
        }
    }
}

/// `stability-table`: per-mode bifurcation thresholds, full precision plus
/// a 4-decimal view, argmax rows flagged; square domains additionally get
/// the grid layout with the undefined constant-mode corner.
pub fn stability_table(cfg: &RunConfig, out_dir: &Path) -> Result<()> {
    let kin = cfg.kinetics_pack()?;
    let mut manifest = Manifest::new("stability-table");
    let variants = cfg.model.variants();

    let mut tables = Vec::new();
    for &variant in &variants {
        let params = cfg.params(variant)?;
        let rows = threshold_table(&params, &kin, cfg.domain, cutoff_for(cfg))?;
        tables.push(rows);
    }

    // Long form: one row per mode, one threshold column per variant.
    let mut s = String::new();
    let mut s_round = String::new();
    let head_vals: Vec<String> = variants.iter().map(|v| format!("eps_bar_{v}")).collect();
    let _ = writeln!(s, "mode,sigma,{},is_argmax", head_vals.join(","));
    let _ = writeln!(s_round, "mode,sigma,{},is_argmax", head_vals.join(","));
    let max0 = tables[0]
        .iter()
        .map(|&(_, e)| e)
        .fold(f64::NEG_INFINITY, f64::max);
    for i in 0..tables[0].len() {
        let (mode, _) = tables[0][i];
        let vals: Vec<f64> = tables.iter().map(|t| t[i].1).collect();
        let is_argmax = (max0 - vals[0]).abs() <= TIE_REL_TOL * max0.abs();
        let full_vals: Vec<String> = vals.iter().map(|&v| full(v)).collect();
        let round_vals: Vec<String> = vals.iter().map(|&v| format!("{v:.4}")).collect();
        let _ = writeln!(s, "{},{},{},{}", mode.index, full(mode.sigma), full_vals.join(","), is_argmax);
        let _ = writeln!(
            s_round,
            "{},{:.4},{},{}",
            mode.index,
            mode.sigma,
            round_vals.join(","),
            is_argmax
        );
    }
    write_text(&out_dir.join("stability_table.csv"), &s)?;
    manifest.add("stability_table.csv", "table", None);
    write_text(&out_dir.join("stability_table_rounded.csv"), &s_round)?;
    manifest.add("stability_table_rounded.csv", "table-rounded", None);

    if cfg.domain.kind == DomainKind::Square {
        let max_mode = cfg.table_max_mode.unwrap_or(5);
        for (vi, &variant) in variants.iter().enumerate() {
            let params = cfg.params(variant)?;
            let co = hotspot_core::linstab::StateCoeffs::new(&params, &kin);
            let mut grid = String::new();
            let header: Vec<String> = (0..=max_mode).map(|m| format!("m={m}")).collect();
            let _ = writeln!(grid, "n\\m,{}", header.join(","));
            for n in 0..=max_mode {
                let mut row = vec![format!("n={n}")];
                for m in 0..=max_mode {
                    if m == 0 && n == 0 {
                        row.push("undefined".to_string());
                    } else {
                        let sigma = hotspot_core::spectral::eigenvalue(
                            cfg.domain,
                            ModeIndex::Pair(m, n),
                        )
                        .expect("nonzero mode");
                        row.push(format!("{:.4}", co.eps_bar(sigma)));
                    }
                }
                let _ = writeln!(grid, "{}", row.join(","));
            }
            let name = format!("stability_grid_{}.csv", variants[vi]);
            write_text(&out_dir.join(&name), &grid)?;
            manifest.add(&name, "grid-rounded", None);
        }
    }

    manifest.write(out_dir)?;
    Ok(())
}

/// `wavemode`: threshold-maximizing mode(s) per domain size and variant.
pub fn wavemode(cfg: &RunConfig, out_dir: &Path) -> Result<()> {
    let kin = cfg.kinetics_pack()?;
    let lengths = if cfg.lengths.is_empty() {
        vec![cfg.domain.length]
    } else {
        cfg.lengths.clone()
    };
    let mut s = String::new();
    let mut s_round = String::new();
    let _ = writeln!(s, "L,variant,modes,eps_bar_max");
    let _ = writeln!(s_round, "L,variant,modes,eps_bar_max");
    for &l in &lengths {
        let domain = DomainSpec { length: l, ..cfg.domain };
        for variant in cfg.model.variants() {
            let params = cfg.params(variant)?;
            let sel = select_wavemode(&params, &kin, domain, ModeCutoff::Auto)
                .map_err(CliError::from)?;
            let modes: Vec<String> = sel.modes.iter().map(|m| m.to_string()).collect();
            let joined = modes.join(";");
            let _ = writeln!(s, "{l},{variant},{joined},{}", full(sel.eps_bar_max));
            let _ = writeln!(s_round, "{l},{variant},{joined},{:.4}", sel.eps_bar_max);
        }
    }
    let mut manifest = Manifest::new("wavemode");
    write_text(&out_dir.join("wavemode.csv"), &s)?;
    manifest.add("wavemode.csv", "table", None);
    write_text(&out_dir.join("wavemode_rounded.csv"), &s_round)?;
    manifest.add("wavemode_rounded.csv", "table-rounded", None);
    manifest.write(out_dir)?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct BifurcationArtifact {
    point: hotspot_core::BifurcationPoint,
    /// Whether the homogeneous state is unstable at the configured eps,
    /// with the threshold-maximizing witness mode.
    homogeneous_unstable: (bool, Option<ModeIndex>),
    is_principal: bool,
    k1: Option<f64>,
    coefficients: Option<hotspot_core::branch::BranchCoefficients>,
    shape: Option<hotspot_core::branch::BranchClass>,
    verdict: Option<hotspot_core::branch::BranchVerdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    kinetics_validation: hotspot_core::kinetics::ValidationReport,
}

/// `bifurcation`: applicability conditions, branch coefficients and the
/// stability verdict for one mode (default: the selected wavemode).
pub fn bifurcation(cfg: &RunConfig, out_dir: &Path) -> Result<()> {
    let variant = cfg.model.single()?;
    let params = cfg.params(variant)?;
    let kin = cfg.kinetics_pack()?;
    let selected = select_wavemode(&params, &kin, cfg.domain, ModeCutoff::Auto);
    let index = match (cfg.bifurcation_mode, &selected) {
        (Some(mode), _) => mode,
        (None, Ok(sel)) => sel.modes[0],
        (None, Err(e)) => return Err(CliError::Config(format!("no mode to analyze: {e}"))),
    };
    let is_principal = selected
        .as_ref()
        .map(|sel| sel.modes.contains(&index))
        .unwrap_or(false);

    let point =
        check_bifurcation_conditions(&params, &kin, cfg.domain, index, ModeCutoff::Auto)?;
    let mode = EigenMode::new(cfg.domain, index)?;
    let homogeneous_unstable = hotspot_core::linstab::is_homogeneous_unstable(
        &params,
        &kin,
        cfg.domain,
        ModeCutoff::Auto,
    )?;

    let mut artifact = BifurcationArtifact {
        homogeneous_unstable,
        is_principal,
        k1: None,
        coefficients: None,
        shape: None,
        verdict: None,
        error: None,
        kinetics_validation: validate_kinetics(
            &kin,
            hotspot_core::kinetics::default_validation_range(&params),
            200,
        ),
        point,
    };

    match compute_k1(&artifact.point, &params, &kin, &mode) {
        Ok((k1, _)) => {
            artifact.k1 = Some(k1);
            if k1 == 0.0 {
                match compute_k2(&artifact.point, &params, &kin, &mode) {
                    Ok(coeffs) => {
                        let verdict = classify_branch(&coeffs, is_principal);
                        artifact.shape = Some(coeffs.classification);
                        artifact.verdict = Some(verdict);
                        artifact.coefficients = Some(coeffs);
                    }
                    Err(e) => artifact.error = Some(e.to_string()),
                }
            } else {
                artifact.shape = Some(classify_shape(k1, None));
            }
        }
        Err(e) => artifact.error = Some(e.to_string()),
    }

    let mut manifest = Manifest::new("bifurcation");
    write_json(&out_dir.join("bifurcation.json"), &artifact)?;
    manifest.add("bifurcation.json", "analysis", None);
    manifest.write(out_dir)?;
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub outcome: Outcome,
    pub t_final: f64,
    pub steps: u64,
    pub rejects: u64,
    pub residual: f64,
    pub dominant_mode: Option<ModeIndex>,
    pub spike_count: usize,
    pub amplitude: f64,
    pub monotone: Option<hotspot_core::pattern::Monotonicity>,
}

/// `simulate`: one run to steady state with snapshot, summary, pattern and
/// manifest artifacts. Blowups still write their partial artifacts before
/// reporting the numerical failure.
pub fn simulate(cfg: &RunConfig, out_dir: &Path) -> Result<RunSummary> {
    let variant = cfg.model.single()?;
    let params = cfg.params(variant)?;
    let kin = cfg.kinetics_pack()?;
    let mesh = Mesh::new(cfg.domain, cfg.n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let ic = initial_condition(&params, &mesh, &cfg.ic_modes, cfg.noise, &mut rng);

    let mut sim = Simulation::new(params, kin, mesh.clone(), cfg.solver.clone())?;
    let started = Instant::now();
    let result = sim.run_to_steady(ic);
    let wall = started.elapsed().as_secs_f64();

    let report = pattern_report(&result.state.a, &result.snapshots, &mesh, SpikeParams::default())?;
    let summary = RunSummary {
        outcome: result.outcome,
        t_final: result.state.t,
        steps: result.steps,
        rejects: result.rejects,
        residual: result.residual,
        dominant_mode: report.dominant_mode,
        spike_count: report.spike_count,
        amplitude: report.amplitude,
        monotone: report.monotone,
    };

    write_artifacts(cfg, out_dir, &result.snapshots, &mesh, &summary, &report, wall)?;

    if result.outcome == Outcome::Blowup {
        return Err(CliError::Numerical(format!(
            "run blew up at t = {} (artifacts in {})",
            result.state.t,
            out_dir.display()
        )));
    }
    Ok(summary)
}

#[allow(clippy::too_many_arguments)]
fn write_artifacts(
    cfg: &RunConfig,
    out_dir: &Path,
    snapshots: &[FieldPair],
    mesh: &Mesh,
    summary: &RunSummary,
    report: &PatternReport,
    wall: f64,
) -> Result<()> {
    let mut manifest = Manifest::new("simulate");
    write_text(&out_dir.join("config.resolved.conf"), &cfg.to_conf_string())?;
    manifest.add("config.resolved.conf", "config", None);

    for (i, snap) in snapshots.iter().enumerate() {
        let name = format!("snapshots/snap_{i:06}.csv");
        write_snapshot(&out_dir.join(&name), snap, mesh)?;
        manifest.add(&name, "snapshot", Some(snap.t));
    }

    write_json(&out_dir.join("summary.json"), summary)?;
    manifest.add("summary.json", "summary", None);

    write_json(&out_dir.join("pattern.json"), report)?;
    manifest.add("pattern.json", "pattern", None);

    // Wall time is machine-dependent; it lives outside the deterministic
    // artifact set.
    write_text(&out_dir.join("timing.txt"), &format!("wall_seconds = {wall:.3}\n"))?;
    manifest.add("timing.txt", "timing", None);

    manifest.write(out_dir)
}

#[derive(Debug, Clone, Serialize)]
struct SweepRow {
    dir: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    eps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    length: Option<f64>,
    outcome: Option<Outcome>,
    amplitude: Option<f64>,
    dominant_mode: Option<ModeIndex>,
    spike_count: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
struct SweepManifest {
    axis: String,
    rows: Vec<SweepRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    eps_bar_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    scaling_exponent: Option<f64>,
}

/// `sweep`: independent runs across an `eps` or domain-size axis, dispatched
/// on the worker pool; per-run artifacts land in subdirectories and the
/// coordinator writes the sweep manifest last.
pub fn sweep(cfg: &RunConfig, out_dir: &Path) -> Result<()> {
    let variant = cfg.model.single()?;
    let (axis, values): (&str, Vec<f64>) = if !cfg.sweep_eps.is_empty() {
        ("eps", cfg.sweep_eps.clone())
    } else if !cfg.sweep_lengths.is_empty() {
        ("length", cfg.sweep_lengths.clone())
    } else {
        return Err(CliError::Config(
            "sweep needs sweep.eps or sweep.lengths".to_string(),
        ));
    };

    // Default seeding for eps sweeps: the principal wavemode, so the runs
    // measure the selected branch's saturated amplitude.
    let kin = cfg.kinetics_pack()?;
    let params_template = cfg.params(variant)?;
    let eps_bar_max = select_wavemode(&params_template, &kin, cfg.domain, ModeCutoff::Auto)
        .ok()
        .map(|sel| sel.eps_bar_max);

    let runs: Vec<(f64, RunConfig, std::path::PathBuf)> = values
        .iter()
        .map(|&v| {
            let mut sub = cfg.clone();
            let dir;
            if axis == "eps" {
                sub.eps = v;
                dir = out_dir.join(format!("eps_{v}"));
                if sub.ic_modes.is_empty() {
                    if let Ok(sel) =
                        select_wavemode(&params_template, &kin, cfg.domain, ModeCutoff::Auto)
                    {
                        let wave = match sel.modes[0] {
                            ModeIndex::K(k) => IcWave::Axis { k: k as f64 },
                            ModeIndex::Pair(m, n) => {
                                IcWave::Tensor { m: m as f64, n: n as f64 }
                            }
                        };
                        sub.ic_modes = vec![Perturb {
                            wave,
                            amp_a: cfg.sweep_seed_amp,
                            amp_rho: cfg.sweep_seed_amp,
                        }];
                    }
                }
            } else {
                sub.domain = DomainSpec { length: v, ..cfg.domain };
                dir = out_dir.join(format!("L_{v}"));
            }
            (v, sub, dir)
        })
        .collect();

    use rayon::prelude::*;
    let rows: Vec<SweepRow> = runs
        .par_iter()
        .map(|(v, sub, dir)| {
            let mut row = SweepRow {
                dir: dir.to_string_lossy().into_owned(),
                eps: (axis == "eps").then_some(*v),
                length: (axis == "length").then_some(*v),
                outcome: None,
                amplitude: None,
                dominant_mode: None,
                spike_count: None,
                error: None,
            };
            match simulate(sub, dir) {
                Ok(summary) => {
                    row.outcome = Some(summary.outcome);
                    row.amplitude = Some(summary.amplitude);
                    row.dominant_mode = summary.dominant_mode;
                    row.spike_count = Some(summary.spike_count);
                }
                Err(e) => row.error = Some(e.to_string()),
            }
            row
        })
        .collect();

    let scaling_exponent = match (axis, eps_bar_max) {
        ("eps", Some(eb)) => {
            let samples: Vec<(f64, f64)> = rows
                .iter()
                .filter(|r| r.outcome == Some(Outcome::SteadyState))
                .filter_map(|r| r.eps.zip(r.amplitude))
                .filter(|&(eps, _)| eps < eb)
                .map(|(eps, amp)| (eb - eps, amp))
                .collect();
            hotspot_core::pattern::fit_scaling_exponent(&samples).ok()
        }
        _ => None,
    };

    let failed = rows.iter().any(|r| r.error.is_some());
    let manifest = SweepManifest { axis: axis.to_string(), rows, eps_bar_max, scaling_exponent };
    write_json(&out_dir.join("sweep_manifest.json"), &manifest)?;
    if failed {
        return Err(CliError::Numerical(format!(
            "at least one sweep run failed; see {}",
            out_dir.join("sweep_manifest.json").display()
        )));
    }
    Ok(())
}

/// `verify`: run the oracle bundle, print one line per oracle, write the
/// machine-readable report, and fail (exit 4) if anything failed.
pub fn verify(cfg: &RunConfig, out_dir: &Path) -> Result<Vec<OracleReport>> {
    let opts = VerifyOptions {
        include_scaling: cfg.verify_scaling,
        include_mms_2d: cfg.verify_mms_2d,
    };
    let reports = verify_bundle(opts).map_err(|e| CliError::Numerical(e.to_string()))?;
    for r in &reports {
        println!(
            "{} {:<28} measured {:>13.6e}  required {}",
            if r.passed { "PASS" } else { "FAIL" },
            r.name,
            r.measured,
            r.criterion
        );
    }
    write_json(&out_dir.join("verify.json"), &reports)?;
    let failures: Vec<&OracleReport> = reports.iter().filter(|r| !r.passed).collect();
    if !failures.is_empty() {
        return Err(CliError::Verification(format!(
            "{} oracle(s) failed: {}",
            failures.len(),
            failures.iter().map(|r| r.name.as_str()).collect::<Vec<_>>().join(", ")
        )));
    }
    Ok(reports)
}
