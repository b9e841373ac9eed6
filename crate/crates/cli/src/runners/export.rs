//! Trajectory and modulation-track export.

use std::io::Write;
use std::sync::Arc;

use sglab::evolution::{evolve, EvolveOptions, EvolvingState, Trajectory};
use sglab::modulation::{modulate_trajectory, ModulationOptions, ModulationTrack};
use sglab::profiles::ExactSolution;
use sglab::SolitonParams;

use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::perturb::gaussian_bumps;
use crate::report::{num, write_to, Report};

pub const SNAPSHOT_HEADER: [&str; 6] = ["t", "x", "re_phi", "im_phi", "re_phi_t", "im_phi_t"];
pub const TRACK_HEADER: [&str; 6] = ["t", "x1", "x2", "x1_speed", "x2_speed", "residual_norm"];

/// Writes the full field `(phi, phi_t)` of every snapshot, every `stride`-th node.
pub fn write_snapshots<W: Write>(traj: &Trajectory, stride: usize, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SNAPSHOT_HEADER)?;
    for i in 0..traj.len() {
        let full = traj.total(i);
        let g = *full.grid();
        let t = num(traj.times[i]);
        for j in (0..g.n()).step_by(stride.max(1)) {
            let (f, ft) = (full.phi.values()[j], full.phi_t.values()[j]);
            w.write_record([t.clone(), num(g.x(j)), num(f.re), num(f.im), num(ft.re), num(ft.im)])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn track_report(track: &ModulationTrack) -> Report {
    let mut r = Report::new(TRACK_HEADER.to_vec());
    for i in 0..track.len() {
        r.push(vec![
            num(track.times[i]),
            num(track.x1[i]),
            num(track.x2[i]),
            num(track.x1_speed[i]),
            num(track.x2_speed[i]),
            num(track.residual_norms[i]),
        ]);
    }
    r
}

/// Evolves the configured state and exports its snapshots; the report carries the summary
/// and is not itself written.
pub fn run_evolve(cfg: &ExperimentConfig) -> Result<Report> {
    let g = cfg.grid()?;
    let kind = cfg.kind("kind");
    let p = SolitonParams::new(cfg.real("beta"), cfg.real("x1"), cfg.real("x2"))?;
    let t_end = cfg.real("T");
    let every = cfg.real("snapshot_dt");
    let n = (t_end / every).round().max(1.0) as usize;
    let times: Vec<f64> = (0..=n).map(|k| k as f64 * t_end / n as f64).collect();
    let pert = gaussian_bumps(g, cfg.real("eta"), cfg.count("seed"));
    let state = EvolvingState::new(Arc::new(ExactSolution::new(kind, p)), pert, 0.0);
    let opts = EvolveOptions { dt: cfg.step("dt"), ..EvolveOptions::default() };
    let traj = evolve(&state, t_end, &times, &opts)?;
    write_to(cfg.text("output"), |w| write_snapshots(&traj, cfg.count("stride") as usize, w))?;

    let mut report = Report::new(SNAPSHOT_HEADER.to_vec());
    report.note(format!("{} snapshots of {} up to t = {t_end}, {} steps", traj.len(), kind.name(), traj.steps));
    if state.domain_warning() || t_end > g.l() - 10.0 {
        report.note(format!("warning: T = {t_end} exceeds L - 10 or the perturbation reaches the edges"));
    }
    if let Some(b) = &traj.blowup {
        report.note(format!(
            "blow-up flagged at t = {:.6} (sup|phi_t| = {:.3e}), nearest predicted t_k = {}",
            b.time,
            b.sup_phi_t,
            b.predicted.map(|t| format!("{t:.6}")).unwrap_or_else(|| "none".into())
        ));
    }
    if !kind.is_complex() {
        let (de, dp) = traj.conservation_drift();
        let tol = cfg.real("conservation_tol");
        let ok = report.check(de < tol && dp < tol);
        report.note(format!("energy drift {de:.3e}, momentum drift {dp:.3e}{}", if ok { "" } else { " [FAIL]" }));
    }
    let track_path = cfg.text("track_output");
    if !track_path.is_empty() {
        if kind.is_complex() {
            report.note("modulation track skipped for complex backgrounds");
        } else {
            let track = modulate_trajectory(&traj, kind, p.beta(), (p.x1(), p.x2()), &ModulationOptions::default());
            if let Some((t, e)) = &track.failure {
                report.check(false);
                report.note(format!("modulation failed at t = {t}: {e}"));
            }
            track_report(&track).save(track_path)?;
        }
    }
    Ok(report)
}
