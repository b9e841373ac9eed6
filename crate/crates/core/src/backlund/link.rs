//! One Backlund link between an upper and a lower profile, with Newton descent and ascent
//! of perturbations across it.

use crate::error::{Error, Result};
use crate::numerics::{cumulative_integral, differentiate, integrate, Field, FieldPair, Grid, Origin, C64};
use crate::profiles::{eval_profile, half_angle, ProfileKind, SolitonParams};

use super::factors::{integrating_factor, IntegratingFactorKind};
use super::{kink_parameter, BtParam};

/// Smallest pairing accepted by the constrained linear solve.
pub const MIN_PAIRING: f64 = 1e-8;

/// Newton controls shared by descents and ascents.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Bound on `|u|` over the outer 1% of nodes of a descended perturbation.
    pub decay_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tol: 1e-10, max_iter: 50, decay_tol: 1e-6 }
    }
}

/// Output of one descent or ascent.
#[derive(Clone, Debug, PartialEq)]
pub struct DescentResult {
    /// Perturbation of the target profile.
    pub u: Field,
    /// Its time component.
    pub s: Field,
    /// Parameter correction (`delta`, `delta~`, `b` or `b~`).
    pub correction: C64,
    pub residual_norm: f64,
    pub iterations: usize,
}

impl DescentResult {
    pub fn pair(&self) -> FieldPair {
        FieldPair { phi: self.u.clone(), phi_t: self.s.clone() }
    }
}

/// The links used by the 2-soliton chains.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LinkKind {
    /// Breather over the complex kink, `a = beta + i alpha`.
    Breather,
    /// Breather over the conjugate kink, `a = beta - i alpha`.
    BreatherConj,
    /// Complex kink over the vacuum, `a = beta - i alpha`.
    Kink,
    /// Conjugate kink over the vacuum, `a = beta + i alpha`.
    KinkConj,
    /// Kink-antikink over `Q(.; -beta, x1 + x2)`, `a = a(beta)`.
    KinkAntikink,
    /// 2-kink over `Q(.; -beta, x1 + x2)`, `a = -a(beta)`.
    TwoKink,
    /// `Q(.; -beta, x1 + x2)` over the vacuum, `a = a(-beta)`.
    CompanionKink,
}

impl LinkKind {
    pub fn upper(&self, p: &SolitonParams) -> ProfileKind {
        match self {
            LinkKind::Breather | LinkKind::BreatherConj => ProfileKind::Breather,
            LinkKind::Kink => ProfileKind::ComplexKink,
            LinkKind::KinkConj => ProfileKind::ConjugateKink,
            LinkKind::KinkAntikink => ProfileKind::KinkAntikink,
            LinkKind::TwoKink => ProfileKind::TwoKink,
            LinkKind::CompanionKink => ProfileKind::companion_kink(p),
        }
    }

    /// Lower profile, `None` for the vacuum.
    pub fn lower(&self, p: &SolitonParams) -> Option<ProfileKind> {
        match self {
            LinkKind::Breather => Some(ProfileKind::ComplexKink),
            LinkKind::BreatherConj => Some(ProfileKind::ConjugateKink),
            LinkKind::KinkAntikink | LinkKind::TwoKink => Some(ProfileKind::companion_kink(p)),
            LinkKind::Kink | LinkKind::KinkConj | LinkKind::CompanionKink => None,
        }
    }

    pub fn parameter(&self, p: &SolitonParams) -> BtParam {
        match self {
            LinkKind::Breather | LinkKind::KinkConj => BtParam::breather_level(p),
            LinkKind::BreatherConj | LinkKind::Kink => BtParam::kink_level(p),
            LinkKind::KinkAntikink => BtParam::kink(p.beta()),
            LinkKind::TwoKink => BtParam::kink(p.beta()).neg(),
            LinkKind::CompanionKink => BtParam(C64::new(kink_parameter(-p.beta()), 0.0)),
        }
    }

    fn factor(&self) -> (IntegratingFactorKind, bool) {
        match self {
            LinkKind::Breather => (IntegratingFactorKind::MuB, false),
            LinkKind::BreatherConj => (IntegratingFactorKind::MuB, true),
            LinkKind::Kink => (IntegratingFactorKind::MuK, false),
            LinkKind::KinkConj => (IntegratingFactorKind::MuK, true),
            LinkKind::KinkAntikink => (IntegratingFactorKind::MuA, false),
            LinkKind::TwoKink => (IntegratingFactorKind::MuR, false),
            LinkKind::CompanionKink => (IntegratingFactorKind::MuQDecaying, false),
        }
    }
}

/// Linear solve mode of [`solve_constrained_ode`].
#[derive(Clone, Copy, Debug)]
pub enum Constraint<'a> {
    /// `u = (1/mu) ∫_{-∞}^x mu (f + delta g)` with `delta` making the integrand mean zero.
    Delta { g: &'a Field },
    /// `u = mu ∫_0^x f/mu + C mu` with `C` fixed by `∫ w0 u + ∫ w1 e u = target`.
    Functional { w0: &'a Field, w1: &'a Field, e: &'a Field, target: C64 },
}

/// Solves the first-order linear ODE attached to the integrating factor `mu`.
///
/// In delta mode the equation is `u_x + c u = f + delta g` with `mu_x = c mu`; in functional
/// mode it is `u_x - c u = f`. Returns `u` and the free scalar (`delta` or `C`).
pub fn solve_constrained_ode(mu: &Field, f: &Field, mode: Constraint) -> Result<(Field, C64)> {
    match mode {
        Constraint::Delta { g } => {
            let pg = integrate(&(mu * g));
            if pg.norm() < MIN_PAIRING {
                return Err(Error::IllPosed { what: "descent selection", value: pg.norm() });
            }
            let delta = -integrate(&(mu * f)) / pg;
            let integrand = mu * &(f + &(g * delta));
            let left = cumulative_integral(&integrand, Origin::LeftEdge);
            let right = cumulative_integral(&integrand, Origin::RightEdge);
            let mid = mu.len() / 2;
            let mut vals = left.into_values();
            vals[mid..].copy_from_slice(&right.values()[mid..]);
            let u = Field::new(*mu.grid(), vals)? / mu;
            Ok((u, delta))
        }
        Constraint::Functional { w0, w1, e, target } => {
            let part = mu * &cumulative_integral(&(f / mu), Origin::Zero);
            let functional = |v: &Field| integrate(&(w0 * v)) + integrate(&(&(w1 * e) * v));
            let pm = functional(mu);
            if pm.norm() < MIN_PAIRING {
                return Err(Error::IllPosed { what: "ascent constraint", value: pm.norm() });
            }
            let c = (target - functional(&part)) / pm;
            Ok((part + &(mu * c), c))
        }
    }
}

/// A Backlund link `upper ← a0 → lower` with its linearization frozen at the profiles.
#[derive(Clone, Debug)]
pub struct BtLink {
    kind: LinkKind,
    a0: C64,
    upper: FieldPair,
    lower: FieldPair,
    sp: Field,
    cp: Field,
    sm: Field,
    cm: Field,
    m: Field,
    c: Field,
    e: Field,
    g: Field,
}

impl BtLink {
    pub fn new(kind: LinkKind, p: &SolitonParams, grid: &Grid) -> Result<Self> {
        let uk = kind.upper(p);
        let upper = eval_profile(uk, p, grid)?;
        let (su, cu) = half_angle(uk, p, grid)?;
        let (lower, sl, cl) = match kind.lower(p) {
            Some(lk) => {
                let (s, c) = half_angle(lk, p, grid)?;
                (eval_profile(lk, p, grid)?, s, c)
            }
            None => (FieldPair::zeros(*grid), Field::zeros(*grid), Field::constant(*grid, C64::new(1.0, 0.0))),
        };
        let sp = &(&su * &cl) + &(&cu * &sl);
        let cp = &(&cu * &cl) - &(&su * &sl);
        let sm = &(&su * &cl) - &(&cu * &sl);
        let cm = &(&cu * &cl) + &(&su * &sl);
        let a0 = kind.parameter(p).value();
        let (fk, conj) = kind.factor();
        let m = integrating_factor(fk, p, grid)?;
        let m = if conj { m.conj() } else { m };
        let c = &(&cp * (0.5 / a0)) + &(&cm * (0.5 * a0));
        let e = &(&cp * (0.5 / a0)) - &(&cm * (0.5 * a0));
        let g = &(&sp / (a0 * a0)) + &sm;
        Ok(BtLink { kind, a0, upper, lower, sp, cp, sm, cm, m, c, e, g })
    }

    pub fn kind(&self) -> LinkKind {
        self.kind
    }

    pub fn parameter(&self) -> C64 {
        self.a0
    }

    pub fn upper(&self) -> &FieldPair {
        &self.upper
    }

    pub fn lower(&self) -> &FieldPair {
        &self.lower
    }

    /// Decaying integrating factor `m` with `m_x = c m`.
    pub fn factor(&self) -> &Field {
        &self.m
    }

    /// `c = cos((U+L)/2)/(2 a0) + (a0/2) cos((U-L)/2)`.
    pub fn coefficient(&self) -> &Field {
        &self.c
    }

    /// Derivative of the upper time component with respect to the upper perturbation.
    pub fn slope(&self) -> &Field {
        &self.e
    }

    /// Direction of the parameter correction in the descent equation.
    pub fn selection(&self) -> &Field {
        &self.g
    }

    /// `(cos((U+L)/2), cos((U-L)/2))`.
    pub fn cosines(&self) -> (&Field, &Field) {
        (&self.cp, &self.cm)
    }

    /// `(sin((U+L)/2), sin((U-L)/2))`.
    pub fn sines(&self) -> (&Field, &Field) {
        (&self.sp, &self.sm)
    }

    /// `sin((U+L)/2 + eps)` for a perturbation `eps`.
    pub fn sin_plus(&self, eps: &Field) -> Field {
        let mut out = self.sp.clone();
        for ((o, &e), &c) in out.values_mut().iter_mut().zip(eps.values()).zip(self.cp.values()) {
            *o = *o * e.cos() + c * e.sin();
        }
        out
    }

    /// `sin((U-L)/2 + eps)` for a perturbation `eps`.
    pub fn sin_minus(&self, eps: &Field) -> Field {
        let mut out = self.sm.clone();
        for ((o, &e), &c) in out.values_mut().iter_mut().zip(eps.values()).zip(self.cm.values()) {
            *o = *o * e.cos() + c * e.sin();
        }
        out
    }

    /// Nonlinear part of the BT system relative to the profiles:
    /// `-(1/a) S+ + (1/a0) s+` and `a S- - a0 s-` for perturbations `(p, l)`.
    fn sine_terms(&self, p: &Field, l: &Field, a: C64) -> (Field, Field) {
        let half_sum = (p + l) * 0.5;
        let half_diff = (p - l) * 0.5;
        let plus = &(&self.sin_plus(&half_sum) * (-1.0 / a)) + &(&self.sp * (1.0 / self.a0));
        let minus = &(&self.sin_minus(&half_diff) * a) - &(&self.sm * self.a0);
        (plus, minus)
    }

    /// Residual of the second BT equation for upper `(p, q)` and lower `l`.
    fn descent_residual(&self, p: &Field, q: &Field, l: &Field, a: C64) -> Field {
        let (plus, minus) = self.sine_terms(p, l, a);
        q - &differentiate(l) + &plus + &minus
    }

    /// Lower time component from the first BT equation.
    fn lower_time(&self, px: &Field, p: &Field, l: &Field, a: C64) -> Field {
        let (plus, minus) = self.sine_terms(p, l, a);
        px + &plus - &minus
    }

    /// Upper time component from the second BT equation.
    fn upper_time(&self, lx: &Field, p: &Field, l: &Field, a: C64) -> Field {
        let (plus, minus) = self.sine_terms(p, l, a);
        &(lx - &plus) - &minus
    }

    fn check_decay(&self, u: &Field, opts: &SolverOptions, what: &'static str) -> Result<()> {
        let edge = u.edge_sup(0.01);
        if edge > opts.decay_tol {
            return Err(Error::NotDecaying { what, edge });
        }
        Ok(())
    }

    /// Given an upper perturbation `(p, q)`, finds the lower perturbation and the
    /// parameter correction solving the BT system at `a0 + delta`.
    pub fn descend(&self, upper: &FieldPair, opts: &SolverOptions) -> Result<DescentResult> {
        if upper.grid() != self.m.grid() {
            return Err(Error::GridMismatch);
        }
        let (p, q) = (&upper.phi, &upper.phi_t);
        let grid = *p.grid();
        let mut l = Field::zeros(grid);
        let mut delta = C64::new(0.0, 0.0);
        let mut r = self.descent_residual(p, q, &l, self.a0);
        let mut res = r.l2_norm();
        let mut it = 0;
        while res >= opts.tol {
            if it == opts.max_iter {
                return Err(Error::NoConvergence { what: "descent", iterations: it, residual: res });
            }
            it += 1;
            let (dl, dd) = solve_constrained_ode(&self.m, &r, Constraint::Delta { g: &self.g })?;
            let mut lambda = 1.0;
            loop {
                let l_new = &l + &(&dl * lambda);
                let d_new = delta + dd * lambda;
                let r_new = self.descent_residual(p, q, &l_new, self.a0 + d_new);
                let res_new = r_new.l2_norm();
                if res_new < res || lambda < 1.0 / 32.0 {
                    l = l_new;
                    delta = d_new;
                    r = r_new;
                    res = res_new;
                    break;
                }
                lambda *= 0.5;
            }
        }
        self.check_decay(&l, opts, "descent")?;
        let s = self.lower_time(&differentiate(p), p, &l, self.a0 + delta);
        Ok(DescentResult { u: l, s, correction: delta, residual_norm: res, iterations: it })
    }

    /// Given a lower perturbation `(l, q_l)` and a fixed correction `delta`, finds the upper
    /// perturbation satisfying `∫ w0 p + ∫ w1 q = target`.
    pub fn ascend(
        &self,
        lower: &FieldPair,
        delta: C64,
        weights: (&Field, &Field),
        target: C64,
        opts: &SolverOptions,
    ) -> Result<DescentResult> {
        if lower.grid() != self.m.grid() {
            return Err(Error::GridMismatch);
        }
        let (l, ql) = (&lower.phi, &lower.phi_t);
        let a = self.a0 + delta;
        let lx = differentiate(l);
        let grid = *l.grid();
        let mut p = Field::zeros(grid);
        let mut it = 0;
        let functional = |p: &Field, q: &Field| integrate(&(weights.0 * p)) + integrate(&(weights.1 * q));
        loop {
            let (plus, minus) = self.sine_terms(&p, l, a);
            let r1 = &(&(&differentiate(&p) - ql) + &plus) - &minus;
            let q = &(&lx - &plus) - &minus;
            let gap = target - functional(&p, &q);
            let res = r1.l2_norm().max(gap.norm());
            if res < opts.tol {
                return Ok(DescentResult { u: p, s: q, correction: delta, residual_norm: res, iterations: it });
            }
            if it == opts.max_iter {
                return Err(Error::NoConvergence { what: "ascent", iterations: it, residual: res });
            }
            it += 1;
            let (dp, _) = solve_constrained_ode(
                &self.m,
                &(-r1),
                Constraint::Functional { w0: weights.0, w1: weights.1, e: &self.e, target: gap },
            )?;
            p = p + &dp;
        }
    }

    /// Upper time component for given perturbations, from the second BT equation.
    pub fn upper_time_component(&self, p: &Field, l: &Field, delta: C64) -> Field {
        self.upper_time(&differentiate(l), p, l, self.a0 + delta)
    }
}
