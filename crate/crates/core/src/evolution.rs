//! Time integration of the sine-Gordon system for a background exact solution plus a
//! decaying perturbation, with conservation logging and blow-up monitoring.

use std::ops::{Add, Mul, Sub};
use std::sync::Arc;

use crate::conservation::{energy, momentum};
use crate::error::{Error, Result};
use crate::numerics::{differentiate, integrate, Field, FieldPair, Grid, C64};
use crate::profiles::Solution;

/// Default blow-up threshold on `sup|phi_t|`.
pub const BLOWUP_THRESHOLD: f64 = 1e6;

/// Ratio of edge to interior size of a perturbation above which the domain is too small.
pub const EDGE_RATIO_WARN: f64 = 1e-4;

/// Number of clamped nodes at each end of the grid.
const CLAMPED: usize = 2;

/// Background exact solution plus a perturbation at time `t`.
#[derive(Clone, Debug)]
pub struct EvolvingState {
    pub background: Arc<dyn Solution>,
    pub perturbation: FieldPair,
    pub t: f64,
}

impl EvolvingState {
    pub fn new(background: Arc<dyn Solution>, perturbation: FieldPair, t: f64) -> Self {
        EvolvingState { background, perturbation, t }
    }

    pub fn grid(&self) -> &Grid {
        self.perturbation.grid()
    }

    /// `background(t) + perturbation`.
    pub fn total(&self) -> FieldPair {
        &self.background.eval(self.t, self.grid()) + &self.perturbation
    }

    /// Edge size of the perturbation relative to its interior size.
    pub fn edge_ratio(&self) -> f64 {
        let edge = self.perturbation.phi.edge_sup(0.01).max(self.perturbation.phi_t.edge_sup(0.01));
        let sup = self.perturbation.phi.sup_norm().max(self.perturbation.phi_t.sup_norm());
        if sup == 0.0 {
            0.0
        } else {
            edge / sup
        }
    }

    /// Whether the perturbation is too large at the grid edges for the domain.
    pub fn domain_warning(&self) -> bool {
        self.edge_ratio() > EDGE_RATIO_WARN
    }
}

/// Blow-up flag raised by the monitor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlowupReport {
    pub time: f64,
    pub sup_phi_t: f64,
    /// Nearest predicted singular time of the background, if any.
    pub predicted: Option<f64>,
}

impl BlowupReport {
    /// Distance from the flag to the nearest predicted singular time.
    pub fn distance(&self) -> Option<f64> {
        self.predicted.map(|t| (t - self.time).abs())
    }
}

fn nearest_predicted(bg: &dyn Solution, t: f64) -> Option<f64> {
    bg.singular_times((t - 10.0, t + 10.0))
        .into_iter()
        .min_by(|a, b| (a - t).abs().total_cmp(&(b - t).abs()))
}

/// Flags the state when `sup|phi_t|` exceeds `threshold` or a sample is non-finite.
pub fn blowup_monitor(state: &EvolvingState, threshold: f64) -> Option<BlowupReport> {
    let total = state.total();
    let sup = total.phi_t.sup_norm();
    if sup > threshold || !total.phi.is_finite() || !total.phi_t.is_finite() {
        return Some(BlowupReport {
            time: state.t,
            sup_phi_t: sup,
            predicted: nearest_predicted(state.background.as_ref(), state.t),
        });
    }
    None
}

/// `(1/2)∫(|z_x|^2 + |z|^2 + |w|^2)`.
pub fn near_singular_energy(z: &Field, w: &Field) -> f64 {
    let zx = differentiate(z);
    let dens = Field::from_real(
        *z.grid(),
        &z.values()
            .iter()
            .zip(zx.values())
            .zip(w.values())
            .map(|((a, b), c)| a.norm_sqr() + b.norm_sqr() + c.norm_sqr())
            .collect::<Vec<_>>(),
    )
    .expect("grid length");
    0.5 * integrate(&dens).re
}

/// Integrator settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvolveOptions {
    /// Time step; `None` selects `h/16`.
    pub dt: Option<f64>,
    pub blowup_threshold: f64,
    /// Halve the step when `sup|phi_t|` more than doubles in one step (complex states).
    pub adaptive: bool,
    pub min_dt: f64,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions { dt: None, blowup_threshold: BLOWUP_THRESHOLD, adaptive: true, min_dt: 1e-12 }
    }
}

impl EvolveOptions {
    pub fn with_dt(dt: f64) -> Self {
        EvolveOptions { dt: Some(dt), ..Self::default() }
    }

    pub fn step(&self, g: &Grid) -> f64 {
        self.dt.unwrap_or(g.h() / 16.0)
    }
}

/// Snapshots of an evolution.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub background: Arc<dyn Solution>,
    pub times: Vec<f64>,
    /// Perturbations relative to the background at each output time.
    pub perturbations: Vec<FieldPair>,
    pub energies: Vec<C64>,
    pub momenta: Vec<C64>,
    pub blowup: Option<BlowupReport>,
    pub steps: usize,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn state(&self, i: usize) -> EvolvingState {
        EvolvingState::new(self.background.clone(), self.perturbations[i].clone(), self.times[i])
    }

    pub fn total(&self, i: usize) -> FieldPair {
        self.state(i).total()
    }

    /// `max_t |Q(t) - Q(t0)| / max(|Q(t0)|, 1)` for the energy and the momentum.
    pub fn conservation_drift(&self) -> (f64, f64) {
        let drift = |q: &[C64]| match q.first() {
            Some(q0) => q.iter().map(|v| (v - q0).norm()).fold(0.0, f64::max) / q0.norm().max(1.0),
            None => 0.0,
        };
        (drift(&self.energies), drift(&self.momenta))
    }
}

/// Trajectory sampled from the background itself, with zero perturbation.
pub fn exact_trajectory(background: Arc<dyn Solution>, grid: Grid, times: &[f64]) -> Trajectory {
    let mut traj = Trajectory {
        background: background.clone(),
        times: times.to_vec(),
        perturbations: Vec::with_capacity(times.len()),
        energies: Vec::with_capacity(times.len()),
        momenta: Vec::with_capacity(times.len()),
        blowup: None,
        steps: 0,
    };
    for &t in times {
        let full = background.eval(t, &grid);
        traj.energies.push(energy(&full));
        traj.momenta.push(momentum(&full));
        traj.perturbations.push(FieldPair::zeros(grid));
    }
    traj
}

trait Sample: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn sine(self) -> Self;
    fn modulus(self) -> f64;
    fn finite(self) -> bool;
    fn from_c64(z: C64) -> Self;
    fn to_c64(self) -> C64;
}

impl Sample for f64 {
    fn sine(self) -> Self {
        self.sin()
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn finite(self) -> bool {
        self.is_finite()
    }
    fn from_c64(z: C64) -> Self {
        z.re
    }
    fn to_c64(self) -> C64 {
        C64::new(self, 0.0)
    }
}

impl Sample for C64 {
    fn sine(self) -> Self {
        self.sin()
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
    fn from_c64(z: C64) -> Self {
        z
    }
    fn to_c64(self) -> C64 {
        self
    }
}

struct Stepper<'a, S: Sample> {
    bg: &'a dyn Solution,
    grid: Grid,
    inv_h2: f64,
    phi: Vec<S>,
    v: Vec<S>,
    acc: Vec<S>,
}

impl<'a, S: Sample> Stepper<'a, S> {
    fn new(bg: &'a dyn Solution, total: &FieldPair) -> Self {
        let grid = *total.grid();
        let phi: Vec<S> = total.phi.values().iter().map(|&z| S::from_c64(z)).collect();
        let v = total.phi_t.values().iter().map(|&z| S::from_c64(z)).collect();
        let mut s = Stepper { bg, grid, inv_h2: 1.0 / (grid.h() * grid.h()), acc: phi.clone(), phi, v };
        s.force();
        s
    }

    fn force(&mut self) {
        let n = self.phi.len();
        let f = &self.phi;
        let c = self.inv_h2 / 12.0;
        for i in CLAMPED..n - CLAMPED {
            let lap = (f[i - 1] + f[i + 1]) * 16.0 - (f[i - 2] + f[i + 2]) - f[i] * 30.0;
            self.acc[i] = lap * c - f[i].sine();
        }
    }

    fn clamp(&mut self, t: f64, velocity: bool) {
        let n = self.phi.len();
        for i in (0..CLAMPED).chain(n - CLAMPED..n) {
            let j = self.bg.jet(t, self.grid.x(i));
            if velocity {
                self.v[i] = S::from_c64(j.dt);
            } else {
                self.phi[i] = S::from_c64(j.value);
            }
        }
    }

    fn step(&mut self, t_new: f64, dt: f64) {
        let n = self.phi.len();
        for i in CLAMPED..n - CLAMPED {
            self.v[i] = self.v[i] + self.acc[i] * (0.5 * dt);
            self.phi[i] = self.phi[i] + self.v[i] * dt;
        }
        self.clamp(t_new, false);
        self.force();
        for i in CLAMPED..n - CLAMPED {
            self.v[i] = self.v[i] + self.acc[i] * (0.5 * dt);
        }
        self.clamp(t_new, true);
    }

    fn sup_v(&self) -> f64 {
        self.v.iter().map(|z| z.modulus()).fold(0.0, f64::max)
    }

    fn finite(&self) -> bool {
        self.phi.iter().chain(&self.v).all(|z| z.finite())
    }

    fn snapshot(&self) -> FieldPair {
        let to = |v: &[S]| Field::new(self.grid, v.iter().map(|z| z.to_c64()).collect()).expect("grid length");
        FieldPair { phi: to(&self.phi), phi_t: to(&self.v) }
    }

    fn save(&self) -> (Vec<S>, Vec<S>, Vec<S>) {
        (self.phi.clone(), self.v.clone(), self.acc.clone())
    }

    fn restore(&mut self, s: (Vec<S>, Vec<S>, Vec<S>)) {
        (self.phi, self.v, self.acc) = s;
    }
}

/// Advances `initial` to `t_end` (forward or backward), recording snapshots at `outputs`,
/// which must be strictly monotone in the direction of integration and lie between the
/// initial time and `t_end`.
pub fn evolve(initial: &EvolvingState, t_end: f64, outputs: &[f64], opts: &EvolveOptions) -> Result<Trajectory> {
    let g = *initial.grid();
    let dt = opts.step(&g).abs();
    if !(dt > 0.0) || dt > 0.5 * g.h() {
        return Err(Error::Cfl { dt, bound: 0.5 * g.h() });
    }
    let t0 = initial.t;
    let dir = if t_end >= t0 { 1.0 } else { -1.0 };
    let mut prev = t0;
    for (i, &t) in outputs.iter().enumerate() {
        let ok = (t - t0) * dir >= 0.0 && (t_end - t) * dir >= 0.0 && (i == 0 || (t - prev) * dir > 0.0);
        if !ok {
            return Err(Error::InvalidParameter(format!("output time {t} out of order or outside the run")));
        }
        prev = t;
    }
    let total = initial.total();
    let real = initial.background.is_real() && total.phi.sup_im() == 0.0 && total.phi_t.sup_im() == 0.0;
    if real {
        run::<f64>(initial, t_end, outputs, opts, dt * dir, &total, false)
    } else {
        run::<C64>(initial, t_end, outputs, opts, dt * dir, &total, true)
    }
}

fn run<S: Sample>(
    initial: &EvolvingState,
    t_end: f64,
    outputs: &[f64],
    opts: &EvolveOptions,
    dt: f64,
    total: &FieldPair,
    watch: bool,
) -> Result<Trajectory> {
    let bg = initial.background.as_ref();
    let g = *initial.grid();
    let mut st = Stepper::<S>::new(bg, total);
    let mut traj = Trajectory {
        background: initial.background.clone(),
        times: Vec::new(),
        perturbations: Vec::new(),
        energies: Vec::new(),
        momenta: Vec::new(),
        blowup: None,
        steps: 0,
    };
    let record = |st: &Stepper<S>, t: f64, traj: &mut Trajectory| {
        let full = st.snapshot();
        traj.energies.push(energy(&full));
        traj.momenta.push(momentum(&full));
        traj.perturbations.push(&full - &bg.eval(t, &g));
        traj.times.push(t);
    };
    let mut t = initial.t;
    let mut h = dt;
    let mut targets: Vec<f64> = outputs.to_vec();
    if targets.last().is_none_or(|&l| l != t_end) {
        targets.push(t_end);
    }
    let mut out_iter = outputs.iter().peekable();
    if out_iter.peek().is_some_and(|&&o| o == t) {
        record(&st, t, &mut traj);
        out_iter.next();
    }
    for &target in &targets {
        if watch {
            while (target - t) * dt.signum() > 0.0 {
                let step = if (target - t).abs() <= h.abs() * (1.0 + 1e-12) { target - t } else { h };
                let before = st.sup_v();
                let saved = if opts.adaptive { Some(st.save()) } else { None };
                st.step(t + step, step);
                let after = st.sup_v();
                if opts.adaptive && after > 2.0 * before.max(1.0) && step.abs() > opts.min_dt {
                    st.restore(saved.expect("saved state"));
                    h = step * 0.5;
                    continue;
                }
                t = if step == target - t { target } else { t + step };
                traj.steps += 1;
                if after > opts.blowup_threshold || !st.finite() {
                    traj.blowup = Some(BlowupReport { time: t, sup_phi_t: after, predicted: nearest_predicted(bg, t) });
                    return Ok(traj);
                }
            }
        } else {
            let n = ((target - t) / dt).abs().ceil().max(if target == t { 0.0 } else { 1.0 }) as usize;
            let step = if n > 0 { (target - t) / n as f64 } else { 0.0 };
            let start = t;
            for k in 1..=n {
                st.step(start + step * k as f64, step);
            }
            traj.steps += n;
            t = target;
            if !st.finite() {
                traj.blowup = Some(BlowupReport { time: t, sup_phi_t: st.sup_v(), predicted: None });
                return Ok(traj);
            }
        }
        if out_iter.peek().is_some_and(|&&o| o == target) {
            record(&st, t, &mut traj);
            out_iter.next();
        }
    }
    Ok(traj)
}
