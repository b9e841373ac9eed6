use std::sync::Arc;

use sglab::backlund::{Chain, SolverOptions};
use sglab::conservation::energy;
use sglab::evolution::{evolve, EvolveOptions, EvolvingState};
use sglab::modulation::{modulate_static, ModulationOptions};
use sglab::numerics::energy_norm;
use sglab::profiles::{eval_profile, ExactSolution};
use sglab::{Field, FieldPair, Grid, ProfileKind, SolitonParams};

fn bump(g: Grid, c: f64, w: f64, amp: f64) -> Field {
    Field::from_real_fn(g, |x| amp * (-((x - c) / w).powi(2)).exp())
}

#[test]
fn shifted_profile_is_recovered_by_modulation() {
    let g = Grid::standard();
    for kind in [ProfileKind::Breather, ProfileKind::TwoKink, ProfileKind::KinkAntikink] {
        let p = SolitonParams::new(0.5, 0.2, -0.1).unwrap();
        let state = eval_profile(kind, &p, &g).unwrap();
        let fit = modulate_static(&state, kind, 0.5, (0.25, -0.05), &ModulationOptions::default()).unwrap();
        assert!((fit.x1 - 0.2).abs() < 1e-8 && (fit.x2 + 0.1).abs() < 1e-8, "{kind:?}: {} {}", fit.x1, fit.x2);
        assert!(fit.distance < 1e-8);
    }
}

#[test]
fn perturbation_stays_small_and_energy_is_conserved() {
    let g = Grid::standard();
    let p = SolitonParams::new(0.5, 0.3, 0.0).unwrap();
    let pert = FieldPair::new(bump(g, 1.0, 1.0, 1e-3), bump(g, -1.0, 1.5, 1e-3)).unwrap();
    let eta = energy_norm(&pert);
    let bg = Arc::new(ExactSolution::new(ProfileKind::TwoKink, p));
    let outs = [0.0, 1.0, 2.0, 3.0];
    let tr = evolve(&EvolvingState::new(bg, pert, 0.0), 3.0, &outs, &EvolveOptions::default()).unwrap();
    let e0 = energy(&tr.total(0));
    for i in 0..tr.len() {
        assert!((energy(&tr.total(i)) - e0).norm() < 1e-8 * e0.norm());
        assert!(energy_norm(&tr.perturbations[i]) < 10.0 * eta);
    }
}

#[test]
fn descent_of_zero_is_the_vacuum() {
    let g = Grid::standard();
    let p = SolitonParams::new(0.5, 0.3, 0.2).unwrap();
    for kind in [ProfileKind::Breather, ProfileKind::TwoKink, ProfileKind::KinkAntikink] {
        let d = Chain::new(kind, &p, &g).unwrap().descend(&FieldPair::zeros(g), &SolverOptions::default()).unwrap();
        assert!(energy_norm(&d.bottom.pair()) < 1e-9, "{kind:?}");
        assert!(d.bottom.correction.norm() < 1e-9 && d.middle.correction.norm() < 1e-9, "{kind:?}");
    }
}
