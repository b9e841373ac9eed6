//! Perturbed 2-soliton sweep: evolution, modulation, near-singular energy windows and the
//! Backlund transport cross-check.

use std::sync::Arc;

use rayon::prelude::*;
use sglab::backlund::{Chain, ConstraintMode, SolverOptions};
use sglab::evolution::{evolve, near_singular_energy, EvolveOptions, EvolvingState};
use sglab::modulation::{modulate_trajectory, ModulationOptions, ModulationTrack};
use sglab::numerics::energy_norm;
use sglab::profiles::{is_singular, singular_times, ExactSolution, Vacuum, EPS0};
use sglab::{FieldPair, Grid, ProfileKind, SolitonParams};

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};
use crate::perturb::gaussian_bumps;
use crate::report::{num, opt, Report};

pub const HEADER: [&str; 23] = [
    "kind",
    "beta",
    "x1",
    "x2",
    "L",
    "N",
    "dt",
    "T",
    "eta",
    "seed",
    "snapshots",
    "sup_distance",
    "distance_ratio",
    "speed_defect",
    "speed_ratio",
    "energy_drift",
    "momentum_drift",
    "windows",
    "window_constant",
    "transport_time",
    "transport_gap",
    "transport_imag",
    "status",
];

/// Settings shared by all sweep points.
#[derive(Clone, Copy, Debug)]
pub struct SweepSettings {
    pub beta: f64,
    pub x1: f64,
    pub x2: f64,
    pub grid: Grid,
    pub t_end: f64,
    pub sample_dt: f64,
    pub evolve: EvolveOptions,
    pub transport_time: Option<f64>,
}

impl SweepSettings {
    pub fn from_config(cfg: &ExperimentConfig) -> Result<Self> {
        let t_end = cfg.real("T");
        let sample_dt = cfg.real("sample_dt");
        if !(t_end > 0.0 && sample_dt > 0.0) {
            return Err(CliError::BadValue { key: "T".into(), value: format!("{t_end}"), expected: "a positive time" });
        }
        Ok(SweepSettings {
            beta: cfg.real("beta"),
            x1: cfg.real("x1"),
            x2: cfg.real("x2"),
            grid: cfg.grid()?,
            t_end,
            sample_dt,
            evolve: EvolveOptions { dt: cfg.step("dt"), ..EvolveOptions::default() },
            transport_time: cfg.flag("transport").then(|| cfg.real("transport_time")),
        })
    }

    pub fn params(&self) -> Result<SolitonParams> {
        Ok(SolitonParams::new(self.beta, self.x1, self.x2)?)
    }
}

/// Growth of the near-singular energy across `[t_k - eps0, t_k + eps0]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Window {
    pub t_k: f64,
    pub before: f64,
    pub after: f64,
    /// Largest `(x1' - drift)^2 + x2'^2` inside the window.
    pub speed_sq: f64,
    /// `|after - before| / (eps0 (max(before, after) + speed_sq))`.
    pub constant: f64,
}

/// Top-level perturbation obtained by Backlund transport.
#[derive(Clone, Debug, PartialEq)]
pub struct Transported {
    pub top: FieldPair,
    /// `sup|Im|` of the evolved vacuum-level perturbation.
    pub imag: f64,
    pub outer_iterations: usize,
}

/// Backlund transport compared with direct evolution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Transport {
    pub time: f64,
    /// H¹×L² distance between the ascended and the modulated perturbation.
    pub gap: f64,
    pub imag: f64,
}

/// One sweep point.
#[derive(Clone, Debug)]
pub struct StabilityRun {
    pub kind: ProfileKind,
    pub eta: f64,
    pub seed: u64,
    pub snapshots: usize,
    pub sup_distance: f64,
    pub speed_defect: f64,
    pub energy_drift: f64,
    pub momentum_drift: f64,
    pub windows: Vec<Window>,
    pub transport: Option<std::result::Result<Transport, String>>,
    pub failure: Option<String>,
}

impl StabilityRun {
    pub fn distance_ratio(&self) -> f64 {
        self.sup_distance / self.eta
    }

    pub fn speed_ratio(&self) -> f64 {
        self.speed_defect / self.eta
    }

    pub fn window_constant(&self) -> Option<f64> {
        self.windows.iter().map(|w| w.constant).reduce(f64::max)
    }
}

/// Output times: a uniform sampling plus `t_k ± eps0` for the breather and the transport time.
pub fn sample_times(kind: ProfileKind, p: &SolitonParams, s: &SweepSettings) -> Vec<f64> {
    let n = (s.t_end / s.sample_dt).round() as usize;
    let mut t: Vec<f64> = (0..=n).map(|k| (k as f64 * s.sample_dt).min(s.t_end)).collect();
    if kind == ProfileKind::Breather {
        for tk in singular_times(p, (EPS0, s.t_end - EPS0)) {
            t.extend([tk - EPS0, tk + EPS0]);
        }
    }
    if let Some(tt) = s.transport_time.filter(|&tt| tt <= s.t_end) {
        t.push(tt);
    }
    t.sort_by(f64::total_cmp);
    t.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    t
}

fn index_of(times: &[f64], t: f64) -> Option<usize> {
    times.iter().position(|&s| (s - t).abs() < 1e-9)
}

/// Near-singular energy windows along a breather track.
pub fn energy_windows(track: &ModulationTrack, p: &SolitonParams, drift: f64, t_end: f64) -> Vec<Window> {
    let mut out = Vec::new();
    for t_k in singular_times(p, (EPS0, t_end - EPS0)) {
        let (Some(i), Some(j)) = (index_of(&track.times, t_k - EPS0), index_of(&track.times, t_k + EPS0)) else {
            continue;
        };
        let e = |k: usize| near_singular_energy(&track.residuals[k].phi, &track.residuals[k].phi_t);
        let (before, after) = (e(i), e(j));
        let speed_sq = (i..=j)
            .map(|k| (track.x1_speed[k] - drift).powi(2) + track.x2_speed[k].powi(2))
            .fold(0.0, f64::max);
        let scale = EPS0 * (before.max(after) + speed_sq);
        let constant = if scale > 0.0 { (after - before).abs() / scale } else { 0.0 };
        out.push(Window { t_k, before, after, speed_sq, constant });
    }
    out
}

/// Descends `top` at time 0, evolves the vacuum-level perturbation to `t`, and ascends with
/// the modulated shifts `(x1, x2)` and the self-consistent constraint. Returns the ascended
/// top-level perturbation.
pub fn bt_transport(
    kind: ProfileKind,
    p: &SolitonParams,
    top: &FieldPair,
    t: f64,
    shifts: (f64, f64),
    evolve_opts: &EvolveOptions,
    solver: &SolverOptions,
) -> sglab::Result<Transported> {
    let g = *top.grid();
    let d = Chain::new(kind, p, &g)?.descend(top, solver)?;
    let start = EvolvingState::new(Arc::new(Vacuum), d.bottom.pair(), 0.0);
    let traj = evolve(&start, t, &[t], evolve_opts)?;
    if let Some(b) = traj.blowup {
        return Err(sglab::Error::NoConvergence { what: "vacuum-level evolution", iterations: traj.steps, residual: b.sup_phi_t });
    }
    let y = traj.perturbations.last().expect("final snapshot").clone();
    let pt = p.with_shifts(shifts.0, shifts.1);
    let up = Chain::new(kind, &pt, &g)?.ascend(
        &y,
        d.bottom.correction,
        d.middle.correction,
        ConstraintMode::SelfConsistent,
        solver,
    )?;
    let imag = y.phi.sup_im().max(y.phi_t.sup_im());
    Ok(Transported { top: up.top.pair(), imag, outer_iterations: up.outer_iterations })
}

/// Evolves, modulates and cross-checks one sweep point.
pub fn run_point(kind: ProfileKind, eta: f64, seed: u64, s: &SweepSettings) -> Result<StabilityRun> {
    let p = s.params()?;
    let g = s.grid;
    let pert = gaussian_bumps(g, eta, seed);
    let bg = Arc::new(ExactSolution::new(kind, p));
    let times = sample_times(kind, &p, s);
    let traj = evolve(&EvolvingState::new(bg, pert.clone(), 0.0), s.t_end, &times, &s.evolve)?;
    let track = modulate_trajectory(&traj, kind, s.beta, (s.x1, s.x2), &ModulationOptions::default());
    let drift = kind.drift(&p);
    let (energy_drift, momentum_drift) = traj.conservation_drift();
    let mut failure = track.failure.as_ref().map(|(t, e)| format!("modulation failed at t = {t}: {e}"));
    if failure.is_none() {
        if let Some(b) = &traj.blowup {
            failure = Some(format!("blow-up flagged at t = {}", b.time));
        }
    }
    let windows = if kind == ProfileKind::Breather { energy_windows(&track, &p, drift, s.t_end) } else { Vec::new() };

    let transport = s.transport_time.filter(|&tt| tt <= s.t_end).map(|tt| {
        let i = index_of(&track.times, tt).ok_or_else(|| "no modulated snapshot at the transport time".to_string())?;
        let pt = p.with_shifts(track.x1[i], track.x2[i]);
        if kind == ProfileKind::Breather && is_singular(pt.x1(), &pt) {
            return Err(format!("transport time {tt} lies in a near-singular window"));
        }
        let up = bt_transport(kind, &p, &pert, tt, (track.x1[i], track.x2[i]), &s.evolve, &SolverOptions::default())
            .map_err(|e| e.to_string())?;
        Ok(Transport { time: tt, gap: energy_norm(&(&up.top - &track.residuals[i])), imag: up.imag })
    });

    Ok(StabilityRun {
        kind,
        eta,
        seed,
        snapshots: track.len(),
        sup_distance: track.sup_residual(),
        speed_defect: track.speed_defect(drift),
        energy_drift,
        momentum_drift,
        windows,
        transport,
        failure,
    })
}

/// Ratio `max/min` of positive values, infinite if any is non-positive or non-finite.
pub fn spread(values: &[f64]) -> f64 {
    let (lo, hi) = values.iter().fold((f64::INFINITY, 0.0_f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if values.iter().all(|v| v.is_finite() && *v > 0.0) {
        hi / lo
    } else {
        f64::INFINITY
    }
}

pub fn run_stability(cfg: &ExperimentConfig) -> Result<Report> {
    let s = SweepSettings::from_config(cfg)?;
    let etas = cfg.reals("etas").to_vec();
    let (seed0, seeds) = (cfg.count("seed"), cfg.count("seeds"));
    let mut points: Vec<(ProfileKind, f64, u64)> = Vec::new();
    for &k in cfg.kinds("kinds") {
        for j in 0..seeds {
            points.extend(etas.iter().map(|&e| (k, e, seed0 + j)));
        }
    }
    let runs: Vec<(ProfileKind, f64, u64, Result<StabilityRun>)> =
        points.par_iter().map(|&(k, e, sd)| (k, e, sd, run_point(k, e, sd, &s))).collect();

    let factor = cfg.real("ratio_factor");
    let transport_tol = cfg.real("transport_tol");
    let dt = s.evolve.step(&s.grid);
    let mut report = Report::new(HEADER.to_vec());
    for (kind, eta, seed, r) in &runs {
        let mut row = vec![
            kind.name().to_string(),
            num(s.beta),
            num(s.x1),
            num(s.x2),
            num(s.grid.l()),
            s.grid.n().to_string(),
            num(dt),
            num(s.t_end),
            num(*eta),
            seed.to_string(),
        ];
        match r {
            Ok(run) => {
                let ok = run.failure.is_none() && run.sup_distance.is_finite();
                let transport_error = match &run.transport {
                    Some(Ok(t)) if !(t.gap < transport_tol) => Some(format!("transport gap {:e}", t.gap)),
                    Some(Err(e)) => Some(format!("transport: {e}")),
                    _ => None,
                };
                report.check(ok && transport_error.is_none());
                let status = run.failure.clone().or(transport_error).unwrap_or_else(|| "ok".to_string());
                let t = run.transport.as_ref().and_then(|t| t.as_ref().ok());
                row.extend([
                    run.snapshots.to_string(),
                    num(run.sup_distance),
                    num(run.distance_ratio()),
                    num(run.speed_defect),
                    num(run.speed_ratio()),
                    num(run.energy_drift),
                    num(run.momentum_drift),
                    run.windows.len().to_string(),
                    opt(run.window_constant()),
                    opt(s.transport_time.filter(|&tt| tt <= s.t_end)),
                    opt(t.map(|t| t.gap)),
                    opt(t.map(|t| t.imag)),
                    status,
                ]);
            }
            Err(e) => {
                report.check(false);
                row.extend(std::iter::repeat_n(String::new(), 12));
                row.push(e.to_string());
            }
        }
        report.push(row);
    }

    for &kind in cfg.kinds("kinds") {
        let mut worst = (1.0_f64, 1.0_f64);
        for j in 0..seeds {
            let of_seed: Vec<&StabilityRun> = runs
                .iter()
                .filter(|(k, _, sd, _)| *k == kind && *sd == seed0 + j)
                .filter_map(|(_, _, _, r)| r.as_ref().ok())
                .collect();
            if etas.iter().all(|&e| e == 0.0) {
                continue;
            }
            let d: Vec<f64> = of_seed.iter().filter(|r| r.eta > 0.0).map(|r| r.distance_ratio()).collect();
            let v: Vec<f64> = of_seed.iter().filter(|r| r.eta > 0.0).map(|r| r.speed_ratio()).collect();
            worst = (worst.0.max(spread(&d)), worst.1.max(spread(&v)));
        }
        let ok = report.check(worst.0 <= factor) & report.check(worst.1 <= factor);
        let constants: Vec<f64> = runs
            .iter()
            .filter(|(k, _, _, _)| *k == kind)
            .filter_map(|(_, _, _, r)| r.as_ref().ok().and_then(|r| r.window_constant()))
            .collect();
        let c = constants.iter().copied().reduce(f64::max);
        report.note(format!(
            "{}: distance-ratio spread {:.3}, speed-ratio spread {:.3} (allowed {factor}){}{}",
            kind.name(),
            worst.0,
            worst.1,
            c.map(|c| format!(", near-singular energy constant {c:.3e}")).unwrap_or_default(),
            if ok { "" } else { " [FAIL]" }
        ));
    }
    let failures = report.rows.iter().filter(|r| r.last().is_some_and(|s| s != "ok")).count();
    report.note(format!("{} sweep points, {failures} with failures", report.rows.len()));
    Ok(report)
}
