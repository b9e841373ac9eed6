//! Descent to the vacuum level and ascent back, with the permutability and
//! energy/momentum checks of the breather chain.

use rayon::prelude::*;
use sglab::backlund::{BtParam, Chain, SolverOptions};
use sglab::conservation::{boundary_limits, breather_identity, bt_transfer, energy, momentum};
use sglab::numerics::energy_norm;
use sglab::permutability::verify_permutability;
use sglab::profiles::eval_profile;
use sglab::{FieldPair, Grid, ProfileKind, SolitonParams, C64};

use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::perturb::gaussian_bumps;
use crate::report::{num, opt, Report};

pub const HEADER: [&str; 28] = [
    "kind",
    "beta",
    "x1",
    "x2",
    "L",
    "N",
    "eta",
    "seed",
    "roundtrip_error",
    "middle_error",
    "delta_re",
    "delta_im",
    "delta_tilde_re",
    "delta_tilde_im",
    "delta_defect",
    "imag_y0",
    "top_discrepancy",
    "middle_discrepancy",
    "composition_gap",
    "composition_residual",
    "energy_lhs",
    "energy_rhs",
    "momentum_lhs",
    "momentum_rhs",
    "energy_y0",
    "momentum_y0",
    "pass",
    "error",
];

/// Outcome of one round trip.
#[derive(Clone, Debug, PartialEq)]
pub struct RoundTrip {
    pub kind: ProfileKind,
    pub roundtrip_error: f64,
    pub middle_error: f64,
    /// Top-level parameter correction.
    pub delta: C64,
    /// Bottom-level parameter correction.
    pub delta_tilde: C64,
    /// `max(sup|Im y0|, sup|Im v0|)`.
    pub imag_y0: f64,
    pub permutability: Option<Permutability>,
    /// Energy and momentum of the perturbed top state.
    pub lhs: (C64, C64),
    /// The same predicted from the vacuum level.
    pub rhs: (C64, C64),
    /// Energy and momentum of `(y0, v0)`.
    pub bottom: (C64, C64),
}

/// Two-path discrepancies of the breather chain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Permutability {
    pub delta_defect: f64,
    pub top_discrepancy: f64,
    pub middle_discrepancy: f64,
    pub composition_gap: f64,
    pub composition_residual: f64,
}

/// Thresholds of a round trip.
#[derive(Clone, Copy, Debug)]
pub struct RoundTripTolerances {
    pub roundtrip: f64,
    pub realness: f64,
    pub delta: f64,
    pub permutability: f64,
    pub identity: f64,
}

impl RoundTripTolerances {
    pub fn from_config(cfg: &ExperimentConfig) -> Self {
        RoundTripTolerances {
            roundtrip: cfg.real("roundtrip_tol"),
            realness: cfg.real("realness_tol"),
            delta: cfg.real("delta_tol"),
            permutability: cfg.real("permutability_tol"),
            identity: cfg.real("identity_tol"),
        }
    }
}

impl RoundTrip {
    pub fn energy_gap(&self) -> f64 {
        (self.lhs.0 - self.rhs.0).norm()
    }

    pub fn momentum_gap(&self) -> f64 {
        (self.lhs.1 - self.rhs.1).norm()
    }

    pub fn passed(&self, tol: &RoundTripTolerances) -> bool {
        let base = self.roundtrip_error < tol.roundtrip
            && self.middle_error < tol.roundtrip
            && self.energy_gap() < tol.identity
            && self.momentum_gap() < tol.identity;
        let perm = match &self.permutability {
            Some(q) => {
                self.imag_y0 < tol.realness
                    && q.delta_defect < tol.delta
                    && q.top_discrepancy.max(q.middle_discrepancy).max(q.composition_gap) < tol.permutability
                    && q.composition_residual < tol.permutability
            }
            None => true,
        };
        base && perm
    }
}

/// Descends `top` through the chain of `kind` and ascends back with the recorded constraint
/// values.
pub fn round_trip(kind: ProfileKind, p: &SolitonParams, top: &FieldPair, opts: &SolverOptions) -> Result<RoundTrip> {
    let g = *top.grid();
    let chain = Chain::new(kind, p, &g)?;
    let d = chain.descend(top, opts)?;
    let (target, _) = chain.top_orthogonality(top);
    let up = chain.ascend_to(&d.bottom.pair(), d.bottom.correction, d.middle.correction, d.constraint_value, target, opts)?;
    let (delta, delta_tilde) = (d.middle.correction, d.bottom.correction);
    let bottom = d.bottom.pair();
    let profile = eval_profile(kind, p, &g)?;
    let full = &profile + top;
    let lhs = (energy(&full), momentum(&full));
    let ey = (energy(&bottom), momentum(&bottom));

    let (rhs, permutability) = if kind == ProfileKind::Breather {
        let r = verify_permutability(&top.phi, &top.phi_t, p, opts)?;
        let perm = Permutability {
            delta_defect: r.delta_defect,
            top_discrepancy: r.top_discrepancy,
            middle_discrepancy: r.middle_discrepancy,
            composition_gap: r.composition_gap,
            composition_residual: r.composition_residual,
        };
        (breather_identity(ey.0, ey.1, delta, p)?, Some(perm))
    } else {
        let middle = chain.bottom_link().upper() + &d.middle.pair();
        let a_bottom = chain.bottom_link().parameter() + delta_tilde;
        let a_top = chain.top_link().parameter() + delta;
        let low = bt_transfer(ey.0, ey.1, &boundary_limits(&middle, &bottom)?, BtParam::new(a_bottom)?);
        let high = bt_transfer(low.0, low.1, &boundary_limits(&full, &middle)?, BtParam::new(a_top)?);
        (high, None)
    };

    Ok(RoundTrip {
        kind,
        roundtrip_error: energy_norm(&(&up.top.pair() - top)),
        middle_error: energy_norm(&(&up.middle.pair() - &d.middle.pair())),
        delta,
        delta_tilde,
        imag_y0: bottom.phi.sup_im().max(bottom.phi_t.sup_im()),
        permutability,
        lhs,
        rhs,
        bottom: ey,
    })
}

fn row(cfg: &ExperimentConfig, g: &Grid, kind: ProfileKind, r: &Result<RoundTrip>, ok: bool) -> Vec<String> {
    let mut v = vec![
        kind.name().to_string(),
        num(cfg.real("beta")),
        num(cfg.real("x1")),
        num(cfg.real("x2")),
        num(g.l()),
        g.n().to_string(),
        num(cfg.real("eta")),
        cfg.count("seed").to_string(),
    ];
    match r {
        Ok(t) => {
            let q = t.permutability;
            v.extend([
                num(t.roundtrip_error),
                num(t.middle_error),
                num(t.delta.re),
                num(t.delta.im),
                num(t.delta_tilde.re),
                num(t.delta_tilde.im),
                opt(q.map(|q| q.delta_defect)),
                num(t.imag_y0),
                opt(q.map(|q| q.top_discrepancy)),
                opt(q.map(|q| q.middle_discrepancy)),
                opt(q.map(|q| q.composition_gap)),
                opt(q.map(|q| q.composition_residual)),
                num(t.lhs.0.re),
                num(t.rhs.0.re),
                num(t.lhs.1.re),
                num(t.rhs.1.re),
                num(t.bottom.0.re),
                num(t.bottom.1.re),
                ok.to_string(),
                String::new(),
            ]);
        }
        Err(e) => {
            v.extend(std::iter::repeat_n(String::new(), 18));
            v.extend(["false".to_string(), e.to_string()]);
        }
    }
    v
}

pub fn run_roundtrip(cfg: &ExperimentConfig) -> Result<Report> {
    let g = cfg.grid()?;
    let p = SolitonParams::new(cfg.real("beta"), cfg.real("x1"), cfg.real("x2"))?;
    let top = gaussian_bumps(g, cfg.real("eta"), cfg.count("seed"));
    let tol = RoundTripTolerances::from_config(cfg);
    let opts = SolverOptions::default();
    let kinds = cfg.kinds("kinds");
    let results: Vec<Result<RoundTrip>> = kinds.par_iter().map(|&k| round_trip(k, &p, &top, &opts)).collect();
    let mut report = Report::new(HEADER.to_vec());
    for (&kind, r) in kinds.iter().zip(&results) {
        let ok = report.check(r.as_ref().is_ok_and(|t| t.passed(&tol)));
        match r {
            Ok(t) => report.note(format!(
                "{}: round trip {:.3e}, energy gap {:.3e}, momentum gap {:.3e}{}",
                kind.name(),
                t.roundtrip_error,
                t.energy_gap(),
                t.momentum_gap(),
                if ok { "" } else { " [FAIL]" }
            )),
            Err(e) => report.note(format!("{}: {e} [FAIL]", kind.name())),
        }
        report.push(row(cfg, &g, kind, r, ok));
    }
    Ok(report)
}
