//! Fitting the shifts `(x1, x2)` of a 2-soliton profile so that the residual satisfies the
//! orthogonality conditions, for single states and along trajectories.

use crate::error::{Error, Result};
use crate::evolution::Trajectory;
use crate::numerics::{differentiate, energy_norm, integrate, Field, FieldPair, Grid, C64};
use crate::profiles::{eval_profile, shift_derivatives, ProfileKind, SolitonParams};

/// Default radius of the modulation neighborhood in H¹×L².
pub const NU0: f64 = 0.1;

/// Largest accepted Newton step in the shifts.
pub const TRUST_RADIUS: f64 = 0.5;

const FD_SHIFT: f64 = 1e-5;

/// Pairing used in the orthogonality conditions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Pairing {
    /// `∫ z D_j + ∫ w (D_j)_t`.
    #[default]
    L2,
    /// `∫ (z D_j + z_x (D_j)_x) + ∫ w (D_j)_t`.
    H1,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModulationOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub nu0: f64,
    pub trust_radius: f64,
    pub pairing: Pairing,
    /// Half width and spacing of the coarse shift scan.
    pub scan_half_width: f64,
    pub scan_step: f64,
}

impl Default for ModulationOptions {
    fn default() -> Self {
        ModulationOptions {
            tol: 1e-10,
            max_iter: 30,
            nu0: NU0,
            trust_radius: TRUST_RADIUS,
            pairing: Pairing::L2,
            scan_half_width: 1.5,
            scan_step: 0.1,
        }
    }
}

fn pair_with(z: &Field, w: &Field, d: &FieldPair, pairing: Pairing) -> C64 {
    let base = integrate(&(z * &d.phi)) + integrate(&(w * &d.phi_t));
    match pairing {
        Pairing::L2 => base,
        Pairing::H1 => base + integrate(&(&differentiate(z) * &differentiate(&d.phi))),
    }
}

/// `(∫(z, w)·(D_1, (D_1)_t), ∫(z, w)·(D_2, (D_2)_t))`.
pub fn orthogonality_residual(z: &Field, w: &Field, kind: ProfileKind, p: &SolitonParams) -> Result<(C64, C64)> {
    orthogonality_residual_with(z, w, kind, p, Pairing::L2)
}

pub fn orthogonality_residual_with(
    z: &Field,
    w: &Field,
    kind: ProfileKind,
    p: &SolitonParams,
    pairing: Pairing,
) -> Result<(C64, C64)> {
    let g = *z.grid();
    if w.grid() != &g {
        return Err(Error::GridMismatch);
    }
    let d1 = shift_derivatives(kind, p, &g, 1)?;
    let d2 = shift_derivatives(kind, p, &g, 2)?;
    Ok((pair_with(z, w, &d1, pairing), pair_with(z, w, &d2, pairing)))
}

/// `G_ij = <(D_i, (D_i)_t), (D_j, (D_j)_t)>`.
pub fn gram_matrix(kind: ProfileKind, p: &SolitonParams, g: &Grid, pairing: Pairing) -> Result<[[f64; 2]; 2]> {
    let d = [shift_derivatives(kind, p, g, 1)?, shift_derivatives(kind, p, g, 2)?];
    let mut m = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            m[i][j] = pair_with(&d[i].phi, &d[i].phi_t, &d[j], pairing).re;
        }
    }
    Ok(m)
}

/// Result of a static fit.
#[derive(Clone, Debug)]
pub struct StaticFit {
    pub x1: f64,
    pub x2: f64,
    pub z: Field,
    pub w: Field,
    pub residuals: (C64, C64),
    pub iterations: usize,
    /// H¹×L² size of `(z, w)`.
    pub distance: f64,
}

impl StaticFit {
    pub fn pair(&self) -> FieldPair {
        FieldPair { phi: self.z.clone(), phi_t: self.w.clone() }
    }
}

struct Fitter<'a> {
    state: &'a FieldPair,
    kind: ProfileKind,
    beta: f64,
    opts: &'a ModulationOptions,
}

impl Fitter<'_> {
    fn params(&self, x: [f64; 2]) -> Result<SolitonParams> {
        SolitonParams::new(self.beta, x[0], x[1])
    }

    fn residual(&self, x: [f64; 2]) -> Result<(FieldPair, (C64, C64))> {
        let p = self.params(x)?;
        let g = *self.state.grid();
        let pert = self.state - &eval_profile(self.kind, &p, &g)?;
        let r = orthogonality_residual_with(&pert.phi, &pert.phi_t, self.kind, &p, self.opts.pairing)?;
        Ok((pert, r))
    }

    fn map(&self, x: [f64; 2]) -> Result<[f64; 2]> {
        let (_, r) = self.residual(x)?;
        Ok([r.0.re, r.1.re])
    }

    fn distance(&self, x: [f64; 2]) -> Result<f64> {
        let p = self.params(x)?;
        Ok(energy_norm(&(self.state - &eval_profile(self.kind, &p, self.state.grid())?)))
    }

    fn scan(&self, center: [f64; 2]) -> Result<([f64; 2], f64)> {
        let n = (self.opts.scan_half_width / self.opts.scan_step).round() as i64;
        let mut best = (center, f64::INFINITY);
        for i in -n..=n {
            for j in -n..=n {
                let x = [center[0] + i as f64 * self.opts.scan_step, center[1] + j as f64 * self.opts.scan_step];
                let d = self.distance(x)?;
                if d < best.1 {
                    best = (x, d);
                }
            }
        }
        Ok(best)
    }

    fn start(&self, guess: [f64; 2]) -> Result<[f64; 2]> {
        if self.distance(guess)? < self.opts.nu0 {
            return Ok(guess);
        }
        Ok(self.scan(guess)?.0)
    }

    fn jacobian(&self, x: [f64; 2]) -> Result<[[f64; 2]; 2]> {
        let mut j = [[0.0; 2]; 2];
        for k in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[k] += FD_SHIFT;
            xm[k] -= FD_SHIFT;
            let (fp, fm) = (self.map(xp)?, self.map(xm)?);
            for i in 0..2 {
                j[i][k] = (fp[i] - fm[i]) / (2.0 * FD_SHIFT);
            }
        }
        Ok(j)
    }

    fn fit(&self, guess: [f64; 2]) -> Result<StaticFit> {
        let g = *self.state.grid();
        let gram = gram_matrix(self.kind, &self.params(guess)?, &g, self.opts.pairing)?;
        let gdet = gram[0][0] * gram[1][1] - gram[0][1] * gram[1][0];
        if gdet.abs() <= 1e-12 * (gram[0][0] * gram[1][1]).abs() {
            return Err(Error::SingularJacobian { det: gdet });
        }
        let mut x = self.start(guess)?;
        let mut rescanned = false;
        for it in 0..=self.opts.max_iter {
            let (pert, r) = self.residual(x)?;
            if r.0.re.abs() < self.opts.tol && r.1.re.abs() < self.opts.tol {
                let distance = energy_norm(&pert);
                if distance >= self.opts.nu0 {
                    return Err(Error::OutOfNeighborhood { distance });
                }
                return Ok(StaticFit {
                    x1: x[0],
                    x2: x[1],
                    distance,
                    z: pert.phi,
                    w: pert.phi_t,
                    residuals: r,
                    iterations: it,
                });
            }
            if it == self.opts.max_iter {
                break;
            }
            let j = self.jacobian(x)?;
            let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
            if det.abs() <= 1e-12 * (j[0][0] * j[1][1]).abs().max(1e-300) {
                return Err(Error::SingularJacobian { det });
            }
            let f = [r.0.re, r.1.re];
            let step = [(-f[0] * j[1][1] + f[1] * j[0][1]) / det, (f[0] * j[1][0] - f[1] * j[0][0]) / det];
            if step[0].hypot(step[1]) > self.opts.trust_radius {
                if rescanned {
                    return Err(Error::OutOfNeighborhood { distance: self.distance(x)? });
                }
                rescanned = true;
                x = self.scan(x)?.0;
                continue;
            }
            x = [x[0] + step[0], x[1] + step[1]];
        }
        let (_, r) = self.residual(x)?;
        Err(Error::NoConvergence {
            what: "static modulation",
            iterations: self.opts.max_iter,
            residual: r.0.re.abs().max(r.1.re.abs()),
        })
    }
}

/// Shifts `(x1, x2)` of the profile `kind` closest to `state` in the sense of the
/// orthogonality conditions, starting from `guess`.
pub fn modulate_static(
    state: &FieldPair,
    kind: ProfileKind,
    beta: f64,
    guess: (f64, f64),
    opts: &ModulationOptions,
) -> Result<StaticFit> {
    Fitter { state, kind, beta, opts }.fit([guess.0, guess.1])
}

/// Fitted shifts along a trajectory.
#[derive(Clone, Debug, Default)]
pub struct ModulationTrack {
    pub times: Vec<f64>,
    pub x1: Vec<f64>,
    pub x2: Vec<f64>,
    pub x1_speed: Vec<f64>,
    pub x2_speed: Vec<f64>,
    pub residuals: Vec<FieldPair>,
    pub residual_norms: Vec<f64>,
    /// Time and cause of the first failed fit, if the track was truncated.
    pub failure: Option<(f64, Error)>,
}

impl ModulationTrack {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `sup_t |x1'(t) - drift| + |x2'(t)|`.
    pub fn speed_defect(&self, drift: f64) -> f64 {
        self.x1_speed.iter().zip(&self.x2_speed).map(|(a, b)| (a - drift).abs() + b.abs()).fold(0.0, f64::max)
    }

    pub fn sup_residual(&self) -> f64 {
        self.residual_norms.iter().copied().fold(0.0, f64::max)
    }
}

fn centered_speeds(t: &[f64], x: &[f64]) -> Vec<f64> {
    let n = t.len();
    (0..n)
        .map(|k| match (k, n) {
            (_, 0 | 1) => 0.0,
            (0, _) => (x[1] - x[0]) / (t[1] - t[0]),
            (k, n) if k == n - 1 => (x[k] - x[k - 1]) / (t[k] - t[k - 1]),
            (k, _) => (x[k + 1] - x[k - 1]) / (t[k + 1] - t[k - 1]),
        })
        .collect()
}

/// Fits every snapshot of `traj` by continuation from `guess`.
pub fn modulate_trajectory(
    traj: &Trajectory,
    kind: ProfileKind,
    beta: f64,
    guess: (f64, f64),
    opts: &ModulationOptions,
) -> ModulationTrack {
    let mut track = ModulationTrack::default();
    for i in 0..traj.len() {
        let k = track.len();
        let g = match k {
            0 => guess,
            1 => (track.x1[0], track.x2[0]),
            _ => (2.0 * track.x1[k - 1] - track.x1[k - 2], 2.0 * track.x2[k - 1] - track.x2[k - 2]),
        };
        match modulate_static(&traj.total(i), kind, beta, g, opts) {
            Ok(fit) => {
                track.times.push(traj.times[i]);
                track.x1.push(fit.x1);
                track.x2.push(fit.x2);
                track.residual_norms.push(fit.distance);
                track.residuals.push(fit.pair());
            }
            Err(e) => {
                track.failure = Some((traj.times[i], e));
                break;
            }
        }
    }
    track.x1_speed = centered_speeds(&track.times, &track.x1);
    track.x2_speed = centered_speeds(&track.times, &track.x2);
    track
}
