//! End-to-end acceptance run: one PASS/FAIL line per criterion.

use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use sglab::conservation::{breather_identity, energy, momentum};
use sglab::evolution::{evolve, EvolveOptions, EvolvingState};
use sglab::numerics::energy_norm;
use sglab::profiles::{eval_profile, ExactSolution, Solution};
use sglab::{Field, FieldPair, Grid, ProfileKind, SolitonParams, C64};
use sglab_cli::perturb::gaussian_bumps;
use sglab_cli::runners::roundtrip::{round_trip, RoundTrip, RoundTripTolerances};
use sglab_cli::runners::{run_identities, run_nondegeneracy_scan, run_stability};
use sglab_cli::{Command, ExperimentConfig, Report};

type Outcome = Result<(bool, String), String>;

struct Criterion {
    id: usize,
    name: &'static str,
    budget: Duration,
    run: fn(&mut Shared) -> Outcome,
}

/// Results reused by several criteria.
#[derive(Default)]
struct Shared {
    identities: Option<Report>,
    round_trips: Option<Vec<RoundTrip>>,
    stability: Option<(Report, Duration)>,
}

impl Shared {
    fn identities(&mut self) -> Result<&Report, String> {
        if self.identities.is_none() {
            let cfg = ExperimentConfig::defaults(Command::Identities);
            self.identities = Some(run_identities(&cfg).map_err(|e| e.to_string())?);
        }
        Ok(self.identities.as_ref().expect("identities report"))
    }

    fn round_trips(&mut self) -> Result<&[RoundTrip], String> {
        if self.round_trips.is_none() {
            let cfg = ExperimentConfig::defaults(Command::Roundtrip);
            let g = cfg.grid().map_err(|e| e.to_string())?;
            let p = roundtrip_params(&cfg)?;
            let top = gaussian_bumps(g, cfg.real("eta"), cfg.count("seed"));
            let opts = sglab::backlund::SolverOptions::default();
            let runs = [ProfileKind::Breather, ProfileKind::KinkAntikink, ProfileKind::TwoKink]
                .iter()
                .map(|&k| round_trip(k, &p, &top, &opts).map_err(|e| format!("{}: {e}", k.name())))
                .collect::<Result<Vec<_>, _>>()?;
            self.round_trips = Some(runs);
        }
        Ok(self.round_trips.as_deref().expect("round trips"))
    }

    fn stability(&mut self) -> Result<&Report, String> {
        if self.stability.is_none() {
            let cfg = ExperimentConfig::defaults(Command::Stability);
            let start = Instant::now();
            let report = run_stability(&cfg).map_err(|e| e.to_string())?;
            self.stability = Some((report, start.elapsed()));
        }
        Ok(&self.stability.as_ref().expect("stability report").0)
    }
}

fn roundtrip_params(cfg: &ExperimentConfig) -> Result<SolitonParams, String> {
    SolitonParams::new(cfg.real("beta"), cfg.real("x1"), cfg.real("x2")).map_err(|e| e.to_string())
}

/// Worst identity row whose name starts with one of `prefixes`: (all pass, count, worst ratio).
fn identity_rows(r: &Report, prefixes: &[&str]) -> (bool, usize, f64) {
    let (name, measured, threshold, pass) =
        (col(r, "name"), col(r, "measured"), col(r, "threshold"), col(r, "pass"));
    let rows: Vec<&Vec<String>> = r.rows.iter().filter(|row| prefixes.iter().any(|p| row[name].starts_with(p))).collect();
    let ok = !rows.is_empty() && rows.iter().all(|row| row[pass] == "true");
    let worst = rows.iter().map(|row| real(&row[measured]) / real(&row[threshold])).fold(0.0, f64::max);
    (ok, rows.len(), worst)
}

fn col(r: &Report, name: &str) -> usize {
    r.column(name).unwrap_or_else(|| panic!("column {name}"))
}

fn real(s: &str) -> f64 {
    s.parse().unwrap_or(f64::NAN)
}

fn identities_outcome(s: &mut Shared, prefixes: &[&str]) -> Outcome {
    let (ok, n, worst) = identity_rows(s.identities()?, prefixes);
    Ok((ok, format!("{n} checks, worst measured/threshold {worst:.3e}")))
}

fn breather_energy(s: &mut Shared) -> Outcome {
    identities_outcome(s, &["energy:breather", "energy-forms:breather"])
}

fn bt_suite(s: &mut Shared) -> Outcome {
    identities_outcome(s, &["bt:", "bt-half-angle:"])
}

fn integral_identities(s: &mut Shared) -> Outcome {
    identities_outcome(s, &["selection:", "balance:", "orthogonality:", "conjugate:", "composition:"])
}

fn factor_odes(s: &mut Shared) -> Outcome {
    identities_outcome(s, &["factor-ode:"])
}

fn round_trips(s: &mut Shared) -> Outcome {
    let tol = RoundTripTolerances::from_config(&ExperimentConfig::defaults(Command::Roundtrip));
    let runs = s.round_trips()?;
    let mut ok = true;
    let mut parts = Vec::new();
    for r in runs {
        ok &= r.roundtrip_error < tol.roundtrip && r.middle_error < tol.roundtrip;
        parts.push(format!("{} {:.2e}", r.kind.name(), r.roundtrip_error.max(r.middle_error)));
        if let Some(q) = &r.permutability {
            let worst = q.top_discrepancy.max(q.middle_discrepancy).max(q.composition_gap).max(q.composition_residual);
            ok &= r.imag_y0 < tol.realness && q.delta_defect < tol.delta && worst < tol.permutability;
            parts.push(format!("Im y0 {:.2e}, delta defect {:.2e}, permutability {worst:.2e}", r.imag_y0, q.delta_defect));
        }
    }
    ok &= runs.iter().any(|r| r.permutability.is_some());
    Ok((ok, parts.join(", ")))
}

fn energy_identities(s: &mut Shared) -> Outcome {
    let cfg = ExperimentConfig::defaults(Command::Roundtrip);
    let tol = cfg.real("identity_tol");
    let p = roundtrip_params(&cfg)?;
    let g = cfg.grid().map_err(|e| e.to_string())?;
    let runs = s.round_trips()?;
    let worst = runs.iter().map(|r| r.energy_gap().max(r.momentum_gap())).fold(0.0, f64::max);
    let (e0, p0) = breather_identity(C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), &p).map_err(|e| e.to_string())?;
    let closed = (e0 - 16.0 * p.beta()).norm().max(p0.norm());
    let b = eval_profile(ProfileKind::Breather, &p, &g).map_err(|e| e.to_string())?;
    let quad = (energy(&b) - 16.0 * p.beta()).norm().max(momentum(&b).norm());
    let ok = worst < tol && closed < 1e-14 && quad < 1e-8;
    Ok((ok, format!("worst side gap {worst:.3e}, delta = 0: closed form {closed:.1e}, quadrature {quad:.3e}")))
}

fn exact_final(bg: Arc<dyn Solution>, g: Grid, t: f64, dt: f64) -> Result<FieldPair, String> {
    let s = EvolvingState::new(bg, FieldPair::zeros(g), 0.0);
    let tr = evolve(&s, t, &[t], &EvolveOptions::with_dt(dt)).map_err(|e| e.to_string())?;
    Ok(tr.perturbations[0].clone())
}

fn exact(kind: ProfileKind, beta: f64, x1: f64) -> Result<Arc<dyn Solution>, String> {
    let p = SolitonParams::new(beta, x1, 0.0).map_err(|e| e.to_string())?;
    Ok(Arc::new(ExactSolution::new(kind, p)))
}

fn evolution_exactness(_: &mut Shared) -> Outcome {
    let g = Grid::standard();
    let mut growth = 0.0_f64;
    for kind in [ProfileKind::Breather, ProfileKind::TwoKink, ProfileKind::KinkAntikink] {
        let pert = exact_final(exact(kind, 0.5, 0.3)?, g, 10.0, EvolveOptions::default().step(&g))?;
        growth = growth.max(energy_norm(&pert));
    }

    let bg = exact(ProfileKind::Breather, 0.5, 0.4)?;
    let gt = Grid::new(20.0, 1025).map_err(|e| e.to_string())?;
    let e1 = energy_norm(&exact_final(bg.clone(), gt, 2.0, gt.h() / 2.0)?);
    let e2 = energy_norm(&exact_final(bg.clone(), gt, 2.0, gt.h() / 4.0)?);
    let time_order = (e1 / e2).log2();

    let grids = [201, 401, 801].map(|n| Grid::new(20.0, n).expect("grid"));
    let dt = grids[2].h() / 8.0;
    let mut finals: Vec<Field> = Vec::new();
    for g in grids {
        let s = EvolvingState::new(bg.clone(), FieldPair::zeros(g), 0.0);
        let tr = evolve(&s, 1.0, &[1.0], &EvolveOptions::with_dt(dt)).map_err(|e| e.to_string())?;
        finals.push(tr.total(0).phi);
    }
    let coarse = |f: &Field, step: usize| f.subsample(step, grids[0]).expect("subsample");
    let d1 = (&finals[0] - &coarse(&finals[1], 2)).sup_norm();
    let d2 = (&coarse(&finals[1], 2) - &coarse(&finals[2], 4)).sup_norm();
    let space_order = (d1 / d2).log2();

    let ok = growth < 1e-5 && (1.8..2.2).contains(&time_order) && (3.7..4.3).contains(&space_order);
    Ok((ok, format!("growth {growth:.3e}, time order {time_order:.3}, space order {space_order:.3}")))
}

fn stability_column(r: &Report, name: &str, kind: Option<&str>, eta: Option<f64>) -> Vec<f64> {
    let (k, e, c) = (col(r, "kind"), col(r, "eta"), col(r, name));
    r.rows
        .iter()
        .filter(|row| kind.is_none_or(|n| row[k] == n) && eta.is_none_or(|x| real(&row[e]) == x))
        .map(|row| real(&row[c]))
        .collect()
}

fn conservation(_: &mut Shared) -> Outcome {
    let g = Grid::new(80.0, 8192).map_err(|e| e.to_string())?;
    let outputs: Vec<f64> = (0..=50).map(f64::from).collect();
    let (mut worst_e, mut worst_p, mut runs) = (0.0_f64, 0.0_f64, 0);
    for kind in [ProfileKind::Breather, ProfileKind::TwoKink, ProfileKind::KinkAntikink] {
        for eta in [1e-3, 3e-3, 1e-2] {
            let s = EvolvingState::new(exact(kind, 0.5, 0.0)?, gaussian_bumps(g, eta, 1), 0.0);
            let tr = evolve(&s, 50.0, &outputs, &EvolveOptions::default()).map_err(|e| e.to_string())?;
            let (de, dp) = tr.conservation_drift();
            worst_e = worst_e.max(de);
            worst_p = worst_p.max(dp);
            runs += 1;
        }
    }
    let ok = worst_e < 1e-6 && worst_p < 1e-6;
    Ok((ok, format!("{runs} trajectories on L = 80, energy drift {worst_e:.3e}, momentum drift {worst_p:.3e}")))
}

fn transport(s: &mut Shared) -> Outcome {
    let r = s.stability()?;
    let gaps = stability_column(r, "transport_gap", Some(ProfileKind::Breather.name()), None);
    let worst = gaps.iter().copied().fold(0.0, |a: f64, b| if b.is_nan() { f64::INFINITY } else { a.max(b) });
    let ok = !gaps.is_empty() && worst < 1e-4;
    Ok((ok, format!("{} breather transports at t = 5, worst gap {worst:.3e}", gaps.len())))
}

fn stability_sweep(s: &mut Shared) -> Outcome {
    let r = s.stability()?;
    let status = col(r, "status");
    let broken = r.rows.iter().filter(|row| row[status] != "ok" && !row[status].starts_with("transport")).count();
    let spreads_ok = r.notes.iter().filter(|n| n.contains("spread")).all(|n| !n.contains("[FAIL]"));
    let constant = stability_column(r, "window_constant", Some(ProfileKind::Breather.name()), None)
        .into_iter()
        .fold(0.0, f64::max);
    let summary: Vec<&str> = r.notes.iter().filter(|n| n.contains("spread")).map(String::as_str).collect();
    let points = r.rows.len();
    let summary = summary.join("; ");
    let took = s.stability.as_ref().expect("stability report").1;
    let ok = broken == 0 && spreads_ok && points == 45 && took < Duration::from_secs(1800);
    Ok((
        ok,
        format!("{points} points, {broken} failed, sweep {:.0} s; window constant {constant:.3e}; {summary}", took.as_secs_f64()),
    ))
}

fn nondegeneracy(_: &mut Shared) -> Outcome {
    let r = run_nondegeneracy_scan(&ExperimentConfig::defaults(Command::Nondegeneracy)).map_err(|e| e.to_string())?;
    let detail = r.notes.last().cloned().unwrap_or_default();
    Ok((r.passed, detail))
}

fn blowup(_: &mut Shared) -> Outcome {
    let g = Grid::new(40.0, 4097).map_err(|e| e.to_string())?;
    let mut ok = true;
    let mut parts = Vec::new();
    for beta in [0.5, 3f64.sqrt() / 2.0] {
        let bg = exact(ProfileKind::ComplexKink, beta, 0.0)?;
        let tk = *bg.singular_times((0.0, 10.0)).first().ok_or("no singular time")?;
        let s = EvolvingState::new(bg, FieldPair::zeros(g), 0.0);
        let tr = evolve(&s, tk + 1.0, &[], &EvolveOptions::default()).map_err(|e| e.to_string())?;
        match tr.blowup.and_then(|b| b.distance()) {
            Some(d) => {
                ok &= d < 0.05;
                parts.push(format!("beta {beta:.4}: |t - t_k| = {d:.3e}"));
            }
            None => {
                ok = false;
                parts.push(format!("beta {beta:.4}: no flag"));
            }
        }
    }
    Ok((ok, parts.join(", ")))
}

const CRITERIA: [Criterion; 12] = [
    Criterion { id: 1, name: "breather energy", budget: Duration::from_secs(1), run: breather_energy },
    Criterion { id: 2, name: "BT residual suite", budget: Duration::from_secs(1), run: bt_suite },
    Criterion { id: 3, name: "integral identities", budget: Duration::from_secs(2), run: integral_identities },
    Criterion { id: 4, name: "integrating-factor ODEs", budget: Duration::from_secs(1), run: factor_odes },
    Criterion { id: 5, name: "descent/ascent round trips", budget: Duration::from_secs(30), run: round_trips },
    Criterion { id: 6, name: "energy and momentum identities", budget: Duration::from_secs(5), run: energy_identities },
    Criterion { id: 7, name: "exactness and order of evolution", budget: Duration::from_secs(60), run: evolution_exactness },
    Criterion { id: 8, name: "conservation", budget: Duration::from_secs(120), run: conservation },
    Criterion { id: 9, name: "BT transport", budget: Duration::from_secs(120), run: transport },
    Criterion { id: 10, name: "stability sweep", budget: Duration::from_secs(1800), run: stability_sweep },
    Criterion { id: 11, name: "nondegeneracy scan", budget: Duration::from_secs(300), run: nondegeneracy },
    Criterion { id: 12, name: "blow-up detection", budget: Duration::from_secs(10), run: blowup },
];

fn main() -> ExitCode {
    let mut shared = Shared::default();
    let mut failures = 0;
    if let Err(e) = shared.stability() {
        println!("stability sweep failed: {e}");
    } else if let Some((_, took)) = &shared.stability {
        println!("stability sweep for criteria 9 and 10 took {:.0} s", took.as_secs_f64());
    }
    for c in &CRITERIA {
        let start = Instant::now();
        let outcome = (c.run)(&mut shared);
        let elapsed = start.elapsed();
        let (ok, detail) = match outcome {
            Ok((ok, d)) => (ok, d),
            Err(e) => (false, format!("error: {e}")),
        };
        let verdict = if ok { "PASS" } else { "FAIL" };
        failures += usize::from(!ok);
        println!("{verdict} {:>2} {}: {detail} [{:.1} s, budget {} s]", c.id, c.name, elapsed.as_secs_f64(), c.budget.as_secs());
    }
    println!("{} of {} criteria pass", CRITERIA.len() - failures, CRITERIA.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
