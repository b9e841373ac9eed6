//! Closed-form kink, breather and 2-soliton profiles and their exact time evolution.
//!
//! Every profile of the form `4 arctan(u)` uses `cos(D/2) = (1 - u^2)/(1 + u^2)`, so for the
//! kinks `cos(Q/2) = -tanh(gamma (x + x0))` and `cos(K/2) = -tanh(theta)`.

use std::f64::consts::PI;
use std::fmt::Debug;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numerics::{differentiate, Field, FieldPair, Grid, C64};

/// Width of the time window around a singular time of the complex kink.
pub const EPS0: f64 = 0.05;

/// Distance to a pole below which complex-kink profiles refuse to evaluate.
pub const SINGULAR_EVAL_TOL: f64 = 1e-12;

const I: C64 = C64::new(0.0, 1.0);

/// Speed and shifts of a 2-soliton (and of the kinks attached to it).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolitonParams {
    beta: f64,
    x1: f64,
    x2: f64,
    alpha: f64,
    gamma: f64,
}

impl SolitonParams {
    pub fn new(beta: f64, x1: f64, x2: f64) -> Result<Self> {
        if !(beta.is_finite() && beta != 0.0 && beta.abs() < 1.0) {
            return Err(Error::InvalidParameter(format!("beta must lie in (-1,1)\\{{0}}, got {beta}")));
        }
        if !(x1.is_finite() && x2.is_finite()) {
            return Err(Error::InvalidParameter("shifts must be finite".into()));
        }
        let alpha = (1.0 - beta * beta).sqrt();
        Ok(SolitonParams { beta, x1, x2, alpha, gamma: 1.0 / alpha })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn x1(&self) -> f64 {
        self.x1
    }

    pub fn x2(&self) -> f64 {
        self.x2
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn with_shifts(&self, x1: f64, x2: f64) -> Self {
        SolitonParams { x1, x2, ..*self }
    }

    /// Breather period in time, `2 pi / alpha`.
    pub fn period(&self) -> f64 {
        2.0 * PI / self.alpha
    }
}

/// The profile families.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ProfileKind {
    /// `Q(x; beta, x0) = 4 arctan(e^{gamma (x + x0)})`; ignores the shared parameters.
    RealKink { x0: f64, beta: f64 },
    ComplexKink,
    ConjugateKink,
    Breather,
    TwoKink,
    KinkAntikink,
}

impl ProfileKind {
    pub fn name(&self) -> &'static str {
        match self {
            ProfileKind::RealKink { .. } => "kink",
            ProfileKind::ComplexKink => "complex-kink",
            ProfileKind::ConjugateKink => "conjugate-kink",
            ProfileKind::Breather => "breather",
            ProfileKind::TwoKink => "two-kink",
            ProfileKind::KinkAntikink => "kink-antikink",
        }
    }

    pub fn is_complex(&self) -> bool {
        matches!(self, ProfileKind::ComplexKink | ProfileKind::ConjugateKink)
    }

    /// Speed at which `x1` advances along the exact solution.
    pub fn drift(&self, p: &SolitonParams) -> f64 {
        match self {
            ProfileKind::TwoKink | ProfileKind::KinkAntikink => p.beta,
            _ => 1.0,
        }
    }

    /// The real kink `Q(.; -beta, x1 + x2)` linked to a real 2-soliton.
    pub fn companion_kink(p: &SolitonParams) -> ProfileKind {
        ProfileKind::RealKink { x0: p.x1 + p.x2, beta: -p.beta }
    }
}

/// Value with its time and space derivatives at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    pub value: C64,
    pub dt: C64,
    pub dx: C64,
}

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

pub(crate) fn sech_c(z: C64) -> C64 {
    let e = if z.re >= 0.0 { (-z).exp() } else { z.exp() };
    e * 2.0 / (C64::new(1.0, 0.0) + e * e)
}

pub(crate) fn tanh_c(z: C64) -> C64 {
    if z.re >= 0.0 {
        let e = (-2.0 * z).exp();
        (C64::new(1.0, 0.0) - e) / (C64::new(1.0, 0.0) + e)
    } else {
        let e = (2.0 * z).exp();
        (e - 1.0) / (e + 1.0)
    }
}

fn sech(x: f64) -> f64 {
    1.0 / x.cosh()
}

/// `(sin, cos)` of `2 arctan(num/den)`, scaled against overflow.
fn half_of_ratio(num: f64, den: f64) -> (f64, f64) {
    let m = num.abs().max(den.abs());
    if m == 0.0 {
        return (0.0, 1.0);
    }
    let (a, b) = (num / m, den / m);
    let r = a * a + b * b;
    (2.0 * a * b / r, (b * b - a * a) / r)
}

/// Hyperbolic functions of the two 2-soliton phases, normalized by the larger cosh.
struct Hyper {
    c1: f64,
    s1: f64,
    c2: f64,
    s2: f64,
}

impl Hyper {
    fn new(t1: f64, t2: f64) -> Self {
        let m = t1.abs().max(t2.abs()).cosh();
        Hyper { c1: t1.cosh() / m, s1: t1.sinh() / m, c2: t2.cosh() / m, s2: t2.sinh() / m }
    }
}

/// Second x-derivative of `u/(p u^2 + q)` given `u, u', u''`.
fn ratio_dxx(p: f64, q: f64, u: f64, up: f64, upp: f64) -> f64 {
    if u.abs() <= 1.0 {
        let dn = p * u * u + q;
        let g1 = (q - p * u * u) / (dn * dn);
        let g2 = -2.0 * p * u * (3.0 * q - p * u * u) / (dn * dn * dn);
        g2 * up * up + g1 * upp
    } else {
        let r = 1.0 / u;
        let w = p + q * r * r;
        let g1 = (q * r * r - p) / (w * w);
        let g2 = -2.0 * p * (3.0 * q * r * r - p) / (w * w * w);
        r * (g2 * (up * r) * (up * r) + g1 * (upp * r))
    }
}

/// Pointwise value and derivatives of a profile (no singularity check).
pub fn jet(kind: ProfileKind, p: &SolitonParams, x: f64) -> Jet {
    let (b, a) = (p.beta, p.alpha);
    let y = x + p.x2;
    match kind {
        ProfileKind::RealKink { x0, beta } => {
            let g = 1.0 / (1.0 - beta * beta).sqrt();
            let z = g * (x + x0);
            let s = sech(z);
            Jet {
                value: re(4.0 * z.exp().atan()),
                dt: re(-2.0 * beta * g * s),
                dx: re(2.0 * g * s),
            }
        }
        ProfileKind::ComplexKink | ProfileKind::ConjugateKink => {
            let sign = if kind == ProfileKind::ComplexKink { 1.0 } else { -1.0 };
            let ph = a * p.x1;
            let theta = C64::new(b * y, sign * ph);
            let s = sech_c(theta);
            let value = C64::new(
                2.0 * ph.cos().atan2(-(b * y).sinh()),
                sign * 2.0 * (ph.sin() / (b * y).cosh()).atanh(),
            );
            Jet { value, dt: I * (2.0 * sign * a) * s, dx: s * (2.0 * b) }
        }
        ProfileKind::Breather => {
            let (s, c) = (a * p.x1).sin_cos();
            let (cc, ss) = ((b * y).cosh(), (b * y).sinh());
            let den = a * a * cc * cc + b * b * s * s;
            Jet {
                value: re(4.0 * (b * s / (a * cc)).atan()),
                dt: re(4.0 * a * a * b * c * cc / den),
                dx: re(-4.0 * a * b * b * s * ss / den),
            }
        }
        ProfileKind::TwoKink => {
            let g = p.gamma;
            let hy = Hyper::new(g * p.x1, g * y);
            let den = hy.c1 * hy.c1 + b * b * hy.s2 * hy.s2;
            Jet {
                value: re(4.0 * (b * (g * y).sinh() / (g * p.x1).cosh()).atan()),
                dt: re(-4.0 * b * b * g * hy.s2 * hy.s1 / den),
                dx: re(4.0 * b * g * hy.c1 * hy.c2 / den),
            }
        }
        ProfileKind::KinkAntikink => {
            let g = p.gamma;
            let hy = Hyper::new(g * p.x1, g * y);
            let den = b * b * hy.c2 * hy.c2 + hy.s1 * hy.s1;
            Jet {
                value: re(4.0 * ((g * p.x1).sinh() / (b * (g * y).cosh())).atan()),
                dt: re(4.0 * b * b * g * hy.c2 * hy.c1 / den),
                dx: re(-4.0 * b * g * hy.s1 * hy.s2 / den),
            }
        }
    }
}

/// `(sin(D/2), cos(D/2))` at one point.
pub fn half_angle_at(kind: ProfileKind, p: &SolitonParams, x: f64) -> (C64, C64) {
    let (b, a) = (p.beta, p.alpha);
    let y = x + p.x2;
    match kind {
        ProfileKind::RealKink { x0, beta } => {
            let z = (x + x0) / (1.0 - beta * beta).sqrt();
            (re(sech(z)), re(-z.tanh()))
        }
        ProfileKind::ComplexKink | ProfileKind::ConjugateKink => {
            let sign = if kind == ProfileKind::ComplexKink { 1.0 } else { -1.0 };
            let theta = C64::new(b * y, sign * a * p.x1);
            (sech_c(theta), -tanh_c(theta))
        }
        ProfileKind::Breather => {
            let (s, c) = half_of_ratio(b * (a * p.x1).sin(), a * (b * y).cosh());
            (re(s), re(c))
        }
        ProfileKind::TwoKink => {
            let hy = Hyper::new(p.gamma * p.x1, p.gamma * y);
            let (s, c) = half_of_ratio(b * hy.s2, hy.c1);
            (re(s), re(c))
        }
        ProfileKind::KinkAntikink => {
            let hy = Hyper::new(p.gamma * p.x1, p.gamma * y);
            let (s, c) = half_of_ratio(hy.s1, b * hy.c2);
            (re(s), re(c))
        }
    }
}

/// Index `k` and distance of the nearest pole `x1 = (pi/alpha)(1/2 + k)`.
pub fn nearest_singularity(x1: f64, p: &SolitonParams) -> (i64, f64) {
    let period = PI / p.alpha;
    let k = (x1 / period - 0.5).round();
    (k as i64, (x1 - period * (0.5 + k)).abs())
}

/// Whether `x1` lies within `EPS0` of a pole of the complex kink.
pub fn is_singular(x1: f64, p: &SolitonParams) -> bool {
    nearest_singularity(x1, p).1 < EPS0
}

/// Blow-up times `t_k = -x1 + (pi/alpha)(1/2 + k)` inside `[t0, t1]`.
pub fn singular_times(p: &SolitonParams, window: (f64, f64)) -> Vec<f64> {
    let period = PI / p.alpha;
    let kmin = ((window.0 + p.x1) / period - 0.5).ceil() as i64;
    let mut out = Vec::new();
    let mut k = kmin;
    loop {
        let t = -p.x1 + period * (0.5 + k as f64);
        if t > window.1 {
            break;
        }
        if t >= window.0 {
            out.push(t);
        }
        k += 1;
    }
    out
}

fn check_regular(kind: ProfileKind, p: &SolitonParams) -> Result<()> {
    if kind.is_complex() {
        let (k, d) = nearest_singularity(p.x1, p);
        if d < SINGULAR_EVAL_TOL {
            return Err(Error::SingularProfile { k });
        }
    }
    Ok(())
}

/// `(D, D_t)` sampled on the grid.
pub fn eval_profile(kind: ProfileKind, p: &SolitonParams, g: &Grid) -> Result<FieldPair> {
    check_regular(kind, p)?;
    let jets: Vec<Jet> = g.nodes().into_iter().map(|x| jet(kind, p, x)).collect();
    Ok(FieldPair {
        phi: Field::new(*g, jets.iter().map(|j| j.value).collect())?,
        phi_t: Field::new(*g, jets.iter().map(|j| j.dt).collect())?,
    })
}

/// Closed-form `D_x` on the grid.
pub fn profile_dx(kind: ProfileKind, p: &SolitonParams, g: &Grid) -> Result<Field> {
    check_regular(kind, p)?;
    Ok(Field::from_fn(*g, |x| jet(kind, p, x).dx))
}

/// Parameters of the exact solution at time `t`.
pub fn shifted(kind: ProfileKind, p: &SolitonParams, t: f64) -> (ProfileKind, SolitonParams) {
    match kind {
        ProfileKind::RealKink { x0, beta } => (ProfileKind::RealKink { x0: x0 - beta * t, beta }, *p),
        ProfileKind::TwoKink | ProfileKind::KinkAntikink => (kind, p.with_shifts(p.x1 + p.beta * t, p.x2)),
        _ => (kind, p.with_shifts(p.x1 + t, p.x2)),
    }
}

/// The exact solution of the sine-Gordon equation at time `t`.
pub fn eval_exact_solution(kind: ProfileKind, p: &SolitonParams, t: f64, g: &Grid) -> Result<FieldPair> {
    let (k, q) = shifted(kind, p, t);
    eval_profile(k, &q, g)
}

/// `sin(D/2)` and `cos(D/2)` from closed forms.
pub fn half_angle(kind: ProfileKind, p: &SolitonParams, g: &Grid) -> Result<(Field, Field)> {
    check_regular(kind, p)?;
    let pairs: Vec<(C64, C64)> = g.nodes().into_iter().map(|x| half_angle_at(kind, p, x)).collect();
    Ok((
        Field::new(*g, pairs.iter().map(|v| v.0).collect())?,
        Field::new(*g, pairs.iter().map(|v| v.1).collect())?,
    ))
}

fn shift_derivative_at(kind: ProfileKind, p: &SolitonParams, x: f64, j: u8) -> (f64, f64) {
    let (b, a, g) = (p.beta, p.alpha, p.gamma);
    let y = x + p.x2;
    match kind {
        ProfileKind::Breather => {
            let (s, c) = (a * p.x1).sin_cos();
            let (cc, ss) = ((b * y).cosh(), (b * y).sinh());
            let den = a * a * cc * cc + b * b * s * s;
            if j == 1 {
                let bt = 4.0 * a * a * b * c * cc / den;
                let bt1 = -4.0 * a.powi(3) * b * cc * s * (den + 2.0 * b * b * c * c) / (den * den);
                (bt, bt1)
            } else {
                let bx = -4.0 * a * b * b * s * ss / den;
                let bt2 = 4.0 * a * a * b * b * c * ss * (b * b * s * s - a * a * cc * cc) / (den * den);
                (bx, bt2)
            }
        }
        ProfileKind::TwoKink => {
            let h = Hyper::new(g * p.x1, g * y);
            let den = h.c1 * h.c1 + b * b * h.s2 * h.s2;
            if j == 1 {
                let r1 = -4.0 * b * g * h.s1 * h.s2 / den;
                let rt1 = -4.0 * b * b * g * g * h.s2 * h.c1 * (den - 2.0 * h.s1 * h.s1) / (den * den);
                (r1, rt1)
            } else {
                let rx = 4.0 * b * g * h.c1 * h.c2 / den;
                let rt2 = -4.0 * b * b * g * g * h.s1 * h.c2 * (den - 2.0 * b * b * h.s2 * h.s2) / (den * den);
                (rx, rt2)
            }
        }
        ProfileKind::KinkAntikink => {
            let h = Hyper::new(g * p.x1, g * y);
            let den = b * b * h.c2 * h.c2 + h.s1 * h.s1;
            if j == 1 {
                let a1 = 4.0 * b * g * h.c1 * h.c2 / den;
                let at1 = 4.0 * b * b * g * g * h.c2 * h.s1 * (den - 2.0 * h.c1 * h.c1) / (den * den);
                (a1, at1)
            } else {
                let ax = -4.0 * b * g * h.s1 * h.s2 / den;
                let at2 = 4.0 * b * b * g * g * h.c1 * h.s2 * (den - 2.0 * b * b * h.c2 * h.c2) / (den * den);
                (ax, at2)
            }
        }
        _ => unreachable!("checked by caller"),
    }
}

fn require_two_soliton(kind: ProfileKind) -> Result<()> {
    match kind {
        ProfileKind::Breather | ProfileKind::TwoKink | ProfileKind::KinkAntikink => Ok(()),
        other => Err(Error::UnsupportedKind(other.name().into())),
    }
}

/// `(D_j, (D_t)_j)` with `D_j = ∂D/∂x_j`, `j ∈ {1, 2}`.
pub fn shift_derivatives(kind: ProfileKind, p: &SolitonParams, g: &Grid, j: u8) -> Result<FieldPair> {
    require_two_soliton(kind)?;
    if j != 1 && j != 2 {
        return Err(Error::InvalidParameter(format!("shift index must be 1 or 2, got {j}")));
    }
    let v: Vec<(f64, f64)> = g.nodes().into_iter().map(|x| shift_derivative_at(kind, p, x, j)).collect();
    Ok(FieldPair {
        phi: Field::new(*g, v.iter().map(|t| re(t.0)).collect())?,
        phi_t: Field::new(*g, v.iter().map(|t| re(t.1)).collect())?,
    })
}

/// Closed-form `D_{txx}` for the 2-soliton families.
pub fn profile_dtxx(kind: ProfileKind, p: &SolitonParams, g: &Grid) -> Result<Field> {
    require_two_soliton(kind)?;
    let (b, a, gm) = (p.beta, p.alpha, p.gamma);
    Ok(Field::from_real_fn(*g, |x| {
        let y = x + p.x2;
        match kind {
            ProfileKind::Breather => {
                let (s, c) = (a * p.x1).sin_cos();
                let (cc, ss) = ((b * y).cosh(), (b * y).sinh());
                4.0 * a * a * b * c * ratio_dxx(a * a, b * b * s * s, cc, b * ss, b * b * cc)
            }
            ProfileKind::KinkAntikink => {
                let h = Hyper::new(gm * p.x1, gm * y);
                4.0 * b * b * gm * h.c1 * ratio_dxx(b * b, h.s1 * h.s1, h.c2, gm * h.s2, gm * gm * h.c2)
            }
            _ => {
                let h = Hyper::new(gm * p.x1, gm * y);
                -4.0 * b * b * gm * h.s1 * ratio_dxx(b * b, h.c1 * h.c1, h.s2, gm * h.c2, gm * gm * h.s2)
            }
        }
    }))
}

/// An exact solution of the sine-Gordon equation, evaluable pointwise.
pub trait Solution: Send + Sync + Debug {
    fn jet(&self, t: f64, x: f64) -> Jet;

    fn is_real(&self) -> bool;

    /// Blow-up times in the window (empty for real solutions).
    fn singular_times(&self, _window: (f64, f64)) -> Vec<f64> {
        Vec::new()
    }

    fn eval(&self, t: f64, g: &Grid) -> FieldPair {
        let jets: Vec<Jet> = g.nodes().into_iter().map(|x| self.jet(t, x)).collect();
        FieldPair {
            phi: Field::new(*g, jets.iter().map(|j| j.value).collect()).expect("grid length"),
            phi_t: Field::new(*g, jets.iter().map(|j| j.dt).collect()).expect("grid length"),
        }
    }
}

/// The zero solution.
#[derive(Clone, Copy, Debug, Default)]
pub struct Vacuum;

impl Solution for Vacuum {
    fn jet(&self, _t: f64, _x: f64) -> Jet {
        let z = C64::new(0.0, 0.0);
        Jet { value: z, dt: z, dx: z }
    }

    fn is_real(&self) -> bool {
        true
    }
}

/// A profile family moving along its exact time evolution.
#[derive(Clone, Copy, Debug)]
pub struct ExactSolution {
    pub kind: ProfileKind,
    pub params: SolitonParams,
}

impl ExactSolution {
    pub fn new(kind: ProfileKind, params: SolitonParams) -> Self {
        ExactSolution { kind, params }
    }
}

impl Solution for ExactSolution {
    fn jet(&self, t: f64, x: f64) -> Jet {
        let (k, q) = shifted(self.kind, &self.params, t);
        jet(k, &q, x)
    }

    fn is_real(&self) -> bool {
        !self.kind.is_complex()
    }

    fn singular_times(&self, window: (f64, f64)) -> Vec<f64> {
        if self.kind.is_complex() {
            singular_times(&self.params, window)
        } else {
            Vec::new()
        }
    }
}

/// Lorentz-boosted solution `phi(gamma (t - beta x), gamma (x - beta t))`.
#[derive(Clone, Debug)]
pub struct Boosted {
    inner: Arc<dyn Solution>,
    beta: f64,
    gamma: f64,
}

impl Solution for Boosted {
    fn jet(&self, t: f64, x: f64) -> Jet {
        let (b, g) = (self.beta, self.gamma);
        let j = self.inner.jet(g * (t - b * x), g * (x - b * t));
        Jet {
            value: j.value,
            dt: j.dt * g - j.dx * (b * g),
            dx: j.dx * g - j.dt * (b * g),
        }
    }

    fn is_real(&self) -> bool {
        self.inner.is_real()
    }
}

pub fn lorentz_boost(inner: Arc<dyn Solution>, beta: f64) -> Result<Boosted> {
    if !(beta.is_finite() && beta.abs() < 1.0) {
        return Err(Error::InvalidParameter(format!("boost speed must satisfy |beta| < 1, got {beta}")));
    }
    Ok(Boosted { inner, beta, gamma: 1.0 / (1.0 - beta * beta).sqrt() })
}

/// `phi_tt - phi_xx + sin(phi)` with centered time differences.
pub fn sg_residual(sol: &dyn Solution, t: f64, dt_probe: f64, g: &Grid) -> Field {
    let m = sol.eval(t - dt_probe, g).phi;
    let c = sol.eval(t, g).phi;
    let p = sol.eval(t + dt_probe, g).phi;
    let phi_tt = (&(&p - &(&c * 2.0)) + &m) * (1.0 / (dt_probe * dt_probe));
    let phi_xx = differentiate(&differentiate(&c));
    &(&phi_tt - &phi_xx) + &c.map(|z| z.sin())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid() -> Grid {
        Grid::standard()
    }

    fn params(beta: f64, x1: f64, x2: f64) -> SolitonParams {
        SolitonParams::new(beta, x1, x2).unwrap()
    }

    const TWO_SOLITONS: [ProfileKind; 3] = [ProfileKind::Breather, ProfileKind::TwoKink, ProfileKind::KinkAntikink];

    fn mirrored(f: &Field) -> Vec<C64> {
        f.values().iter().rev().copied().collect()
    }

    fn parity_defect(f: &Field, sign: f64) -> f64 {
        f.values().iter().zip(mirrored(f)).fold(0.0, |m, (a, b)| m.max((a - b * sign).norm()))
    }

    #[test]
    fn params_validation() {
        assert!(SolitonParams::new(0.0, 0.0, 0.0).is_err());
        assert!(SolitonParams::new(1.0, 0.0, 0.0).is_err());
        let p = params(0.6, 0.0, 0.0);
        assert!((p.alpha() - 0.8).abs() < 1e-15);
        assert!((p.gamma() * p.alpha() - 1.0).abs() < 1e-15);
        assert!((p.alpha().powi(2) + p.beta().powi(2) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn breather_vanishes_when_phase_is_zero() {
        let b = 3f64.sqrt() / 2.0;
        let p = params(b, 0.0, 0.0);
        let g = grid();
        let f = eval_profile(ProfileKind::Breather, &p, &g).unwrap();
        assert!(f.phi.sup_norm() == 0.0);
        let i0 = g.nearest_index(0.0);
        let x0 = g.x(i0);
        let expected = 4.0 * b / (b * x0).cosh();
        assert!((f.phi_t.values()[i0].re - expected).abs() < 1e-12);
        assert!((4.0 * b - 2.0 * 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn two_kink_is_odd_and_kink_antikink_decays() {
        let g = grid();
        let p = params(0.5, 0.7, 0.0);
        let r = eval_profile(ProfileKind::TwoKink, &p, &g).unwrap();
        assert!(parity_defect(&r.phi, -1.0) < 1e-12);
        assert!((r.phi.values()[g.n() - 1].re - 2.0 * PI).abs() < 1e-6);
        assert!((r.phi.values()[0].re + 2.0 * PI).abs() < 1e-6);
        let a = eval_profile(ProfileKind::KinkAntikink, &p, &g).unwrap();
        assert!(a.phi.edge_sup(0.001) < 1e-6);
        assert!(a.phi_t.edge_sup(0.001) < 1e-6);
    }

    #[test]
    fn parities_at_zero_shift() {
        let g = grid();
        let p = params(0.6, 0.4, 0.0);
        let b = eval_profile(ProfileKind::Breather, &p, &g).unwrap();
        assert!(parity_defect(&b.phi, 1.0) < 1e-12);
        assert!(parity_defect(&b.phi_t, 1.0) < 1e-12);
        assert!(parity_defect(&profile_dx(ProfileKind::Breather, &p, &g).unwrap(), -1.0) < 1e-12);
        let r = eval_profile(ProfileKind::TwoKink, &p, &g).unwrap();
        assert!(parity_defect(&r.phi_t, -1.0) < 1e-12);
        assert!(parity_defect(&profile_dx(ProfileKind::TwoKink, &p, &g).unwrap(), 1.0) < 1e-12);
        let a = eval_profile(ProfileKind::KinkAntikink, &p, &g).unwrap();
        assert!(parity_defect(&a.phi, 1.0) < 1e-12);
        assert!(parity_defect(&a.phi_t, 1.0) < 1e-12);
        assert!(parity_defect(&profile_dx(ProfileKind::KinkAntikink, &p, &g).unwrap(), -1.0) < 1e-12);
        let kx = profile_dx(ProfileKind::ComplexKink, &p, &g).unwrap();
        assert!(parity_defect(&kx.real_part(), 1.0) < 1e-12);
        let im = Field::from_real(g, &kx.im()).unwrap();
        assert!(parity_defect(&im, -1.0) < 1e-12);
    }

    #[test]
    fn shift_derivative_parities() {
        let g = grid();
        let p = params(0.5, 0.3, 0.0);
        let b1 = shift_derivatives(ProfileKind::Breather, &p, &g, 1).unwrap();
        let b2 = shift_derivatives(ProfileKind::Breather, &p, &g, 2).unwrap();
        assert!(parity_defect(&b1.phi_t, 1.0) < 1e-12);
        assert!(parity_defect(&b2.phi_t, -1.0) < 1e-12);
        let a1 = shift_derivatives(ProfileKind::KinkAntikink, &p, &g, 1).unwrap();
        let a2 = shift_derivatives(ProfileKind::KinkAntikink, &p, &g, 2).unwrap();
        assert!(parity_defect(&a1.phi_t, 1.0) < 1e-12);
        assert!(parity_defect(&a2.phi_t, -1.0) < 1e-12);
        let r1 = shift_derivatives(ProfileKind::TwoKink, &p, &g, 1).unwrap();
        let r2 = shift_derivatives(ProfileKind::TwoKink, &p, &g, 2).unwrap();
        assert!(parity_defect(&r1.phi_t, -1.0) < 1e-12);
        assert!(parity_defect(&r2.phi_t, 1.0) < 1e-12);
        assert!(shift_derivatives(ProfileKind::ComplexKink, &p, &g, 1).is_err());
    }

    #[test]
    fn breather_shift_derivatives_are_time_and_space_derivatives() {
        let g = grid();
        let p = params(0.5, 0.3, -0.2);
        let prof = eval_profile(ProfileKind::Breather, &p, &g).unwrap();
        let b1 = shift_derivatives(ProfileKind::Breather, &p, &g, 1).unwrap();
        let b2 = shift_derivatives(ProfileKind::Breather, &p, &g, 2).unwrap();
        assert!((&b1.phi - &prof.phi_t).sup_norm() < 1e-14);
        assert!((&b2.phi - &profile_dx(ProfileKind::Breather, &p, &g).unwrap()).sup_norm() < 1e-14);
    }

    #[test]
    fn shift_derivatives_match_central_differences() {
        let g = grid();
        let eps = 1e-4;
        for kind in TWO_SOLITONS {
            let p = params(0.6, 0.35, -0.15);
            for j in [1u8, 2] {
                let (pp, pm) = if j == 1 {
                    (p.with_shifts(p.x1 + eps, p.x2), p.with_shifts(p.x1 - eps, p.x2))
                } else {
                    (p.with_shifts(p.x1, p.x2 + eps), p.with_shifts(p.x1, p.x2 - eps))
                };
                let fp = eval_profile(kind, &pp, &g).unwrap();
                let fm = eval_profile(kind, &pm, &g).unwrap();
                let d = shift_derivatives(kind, &p, &g, j).unwrap();
                let e0 = (&(&(&fp.phi - &fm.phi) * (0.5 / eps)) - &d.phi).sup_norm();
                let e1 = (&(&(&fp.phi_t - &fm.phi_t) * (0.5 / eps)) - &d.phi_t).sup_norm();
                assert!(e0 < 1e-6 && e1 < 1e-6, "{kind:?} j={j}: {e0} {e1}");
            }
        }
    }

    #[test]
    fn closed_form_dtxx_matches_differences() {
        let g = grid();
        let p = params(0.7, 0.45, 0.1);
        for kind in TWO_SOLITONS {
            let dtx = shift_derivatives(kind, &p, &g, 2).unwrap().phi_t;
            let fd = differentiate(&dtx);
            let cf = profile_dtxx(kind, &p, &g).unwrap();
            assert!((&fd - &cf).sup_norm() < 1e-9, "{kind:?}");
            let t = eval_profile(kind, &p, &g).unwrap().phi_t;
            assert!((&differentiate(&t) - &dtx).sup_norm() < 1e-9, "{kind:?}");
        }
    }

    #[test]
    fn closed_form_dx_matches_differences() {
        let g = grid();
        let p = params(0.5, 0.3, -0.1);
        for kind in [
            ProfileKind::RealKink { x0: 0.4, beta: 0.5 },
            ProfileKind::ComplexKink,
            ProfileKind::ConjugateKink,
            ProfileKind::Breather,
            ProfileKind::TwoKink,
            ProfileKind::KinkAntikink,
        ] {
            let f = eval_profile(kind, &p, &g).unwrap().phi;
            let err = (&differentiate(&f) - &profile_dx(kind, &p, &g).unwrap()).sup_norm();
            assert!(err < 1e-10, "{kind:?}: {err}");
        }
    }

    #[test]
    fn half_angles_match_values() {
        let g = grid();
        let p = params(0.5, 0.3, -0.1);
        for kind in [
            ProfileKind::RealKink { x0: 0.4, beta: -0.5 },
            ProfileKind::ComplexKink,
            ProfileKind::ConjugateKink,
            ProfileKind::Breather,
            ProfileKind::TwoKink,
            ProfileKind::KinkAntikink,
        ] {
            let f = eval_profile(kind, &p, &g).unwrap().phi;
            let (s, c) = half_angle(kind, &p, &g).unwrap();
            let es = (&f.map(|z| (z * 0.5).sin()) - &s).sup_norm();
            let ec = (&f.map(|z| (z * 0.5).cos()) - &c).sup_norm();
            let pyth = (&(&s * &s) + &(&c * &c)).map(|z| z - 1.0).sup_norm();
            assert!(es < 1e-12 && ec < 1e-12 && pyth < 1e-12, "{kind:?}: {es} {ec} {pyth}");
        }
    }

    #[test]
    fn real_kink_half_angle_signs() {
        let g = grid();
        let p = params(0.5, 0.0, 0.0);
        let (s, c) = half_angle(ProfileKind::RealKink { x0: 0.3, beta: 0.5 }, &p, &g).unwrap();
        let gm = p.gamma();
        let i = g.nearest_index(2.0);
        let z = gm * (g.x(i) + 0.3);
        assert!((s.values()[i].re - 1.0 / z.cosh()).abs() < 1e-15);
        assert!((c.values()[i].re + z.tanh()).abs() < 1e-15);
    }

    #[test]
    fn breather_is_periodic_and_starts_at_profile() {
        let g = grid();
        let p = params(0.5, 0.3, 0.2);
        let f0 = eval_exact_solution(ProfileKind::Breather, &p, 0.0, &g).unwrap();
        assert_eq!(f0, eval_profile(ProfileKind::Breather, &p, &g).unwrap());
        let f1 = eval_exact_solution(ProfileKind::Breather, &p, p.period(), &g).unwrap();
        assert!((&f1.phi - &f0.phi).sup_norm() < 1e-12);
        assert!((&f1.phi_t - &f0.phi_t).sup_norm() < 1e-12);
    }

    #[test]
    fn singular_times_and_flags() {
        let p = params(3f64.sqrt() / 2.0, 0.0, 0.0);
        let ts = singular_times(&p, (0.0, 10.0));
        assert_eq!(ts.len(), 2);
        assert!((ts[0] - PI).abs() < 1e-12 && (ts[1] - 3.0 * PI).abs() < 1e-12);
        assert!(is_singular(PI / (2.0 * p.alpha()), &p));
        assert!(!is_singular(0.0, &p));
        let bad = p.with_shifts(PI / (2.0 * p.alpha()), 0.0);
        assert!(matches!(
            eval_profile(ProfileKind::ComplexKink, &bad, &grid()),
            Err(Error::SingularProfile { k: 0 })
        ));
    }

    #[test]
    fn exact_solutions_satisfy_sine_gordon() {
        let g = grid();
        let p = params(0.5, 0.3, -0.2);
        for kind in TWO_SOLITONS {
            let s = ExactSolution::new(kind, p);
            let r = sg_residual(&s, 0.7, 1e-4, &g).sup_norm();
            assert!(r < 1e-6, "{kind:?}: {r}");
        }
        let k = ExactSolution::new(ProfileKind::ComplexKink, p);
        assert!(sg_residual(&k, 0.2, 1e-4, &g).sup_norm() < 1e-6);
        assert!(sg_residual(&Vacuum, 0.0, 1e-3, &g).sup_norm() == 0.0);
    }

    #[test]
    fn boosts() {
        let g = grid();
        let p = params(0.5, 0.3, 0.0);
        let br: Arc<dyn Solution> = Arc::new(ExactSolution::new(ProfileKind::Breather, p));
        let same = lorentz_boost(br.clone(), 0.0).unwrap();
        assert_eq!(same.eval(0.4, &g), br.eval(0.4, &g));
        let stat: Arc<dyn Solution> = Arc::new(ExactSolution::new(ProfileKind::RealKink { x0: 0.0, beta: 0.0 }, p));
        let moving = lorentz_boost(stat, 0.6).unwrap();
        let target = ExactSolution::new(ProfileKind::RealKink { x0: 0.0, beta: 0.6 }, p);
        for t in [0.0, 1.3, -2.0] {
            let a = moving.eval(t, &g);
            let b = target.eval(t, &g);
            assert!((&a.phi - &b.phi).sup_norm() < 1e-10);
            assert!((&a.phi_t - &b.phi_t).sup_norm() < 1e-10);
        }
        let boosted = lorentz_boost(br, 0.4).unwrap();
        assert!(sg_residual(&boosted, 0.7, 1e-4, &g).sup_norm() < 1e-6);
        assert!(lorentz_boost(Arc::new(Vacuum), 1.0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn pythagoras_for_all_kinds(beta in 0.2f64..0.95, x1 in -3.0f64..3.0, x2 in -2.0f64..2.0) {
            let p = params(beta, x1, x2);
            prop_assume!(nearest_singularity(x1, &p).1 > 0.05);
            let g = Grid::new(20.0, 257).unwrap();
            for kind in [ProfileKind::ComplexKink, ProfileKind::ConjugateKink, ProfileKind::Breather,
                         ProfileKind::TwoKink, ProfileKind::KinkAntikink, ProfileKind::RealKink { x0: x1, beta }] {
                let (s, c) = half_angle(kind, &p, &g).unwrap();
                let d = (&(&s * &s) + &(&c * &c)).map(|z| z - 1.0).sup_norm();
                let scale = (s.sup_norm().powi(2) + c.sup_norm().powi(2)).max(1.0);
                prop_assert!(d < 1e-14 * scale, "{kind:?}: {d:e} at scale {scale:e}");
            }
        }

        #[test]
        fn complex_kink_is_conjugate_of_its_mirror(beta in 0.2f64..0.95, x1 in -3.0f64..3.0) {
            let p = params(beta, x1, 0.4);
            prop_assume!(nearest_singularity(x1, &p).1 > 0.05);
            let g = Grid::new(20.0, 257).unwrap();
            let k = eval_profile(ProfileKind::ComplexKink, &p, &g).unwrap();
            let kb = eval_profile(ProfileKind::ConjugateKink, &p, &g).unwrap();
            prop_assert!((&k.phi.conj() - &kb.phi).sup_norm() < 1e-14);
            prop_assert!((&k.phi_t.conj() - &kb.phi_t).sup_norm() < 1e-14);
        }
    }
}
