//! Two-link chains `2-soliton ← middle kink ← vacuum`: descents, constrained ascents and
//! the nondegeneracy objects attached to the middle level.

use crate::error::{Error, Result};
use crate::numerics::{integrate, Field, FieldPair, Grid, C64};
use crate::profiles::{profile_dx, profile_dtxx, shift_derivatives, ProfileKind, SolitonParams};

use super::link::{BtLink, DescentResult, LinkKind, SolverOptions};

/// How the constraint value `c = ∫(u, s)·(D~0, D)` of the middle-level ascent is chosen.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ConstraintMode {
    /// Value recorded during a previous descent.
    RoundTrip(C64),
    /// Fixed point `c = N(delta, u, z)`, which makes the ascended top perturbation
    /// orthogonal to both shift directions.
    SelfConsistent,
}

/// Both stages of a chain descent.
#[derive(Clone, Debug)]
pub struct ChainDescent {
    /// Middle-level perturbation with the top-link correction.
    pub middle: DescentResult,
    /// Vacuum-level perturbation with the bottom-link correction.
    pub bottom: DescentResult,
    /// `∫(u, s)·(D~0, D)` of the middle perturbation.
    pub constraint_value: C64,
}

/// Both stages of a chain ascent.
#[derive(Clone, Debug)]
pub struct ChainAscent {
    pub middle: DescentResult,
    pub top: DescentResult,
    pub constraint_value: C64,
    pub outer_iterations: usize,
}

/// A 2-soliton profile with its middle kink and the vacuum.
#[derive(Clone, Debug)]
pub struct Chain {
    kind: ProfileKind,
    top: BtLink,
    bottom: BtLink,
    tilde: Field,
    d: Field,
    d2: Field,
    dtx: Field,
    dtxx: Field,
    d1: Field,
    dt1: Field,
}

fn links(kind: ProfileKind, conjugate: bool) -> Result<(LinkKind, LinkKind)> {
    match (kind, conjugate) {
        (ProfileKind::Breather, false) => Ok((LinkKind::Breather, LinkKind::Kink)),
        (ProfileKind::Breather, true) => Ok((LinkKind::BreatherConj, LinkKind::KinkConj)),
        (ProfileKind::KinkAntikink, false) => Ok((LinkKind::KinkAntikink, LinkKind::CompanionKink)),
        (ProfileKind::TwoKink, false) => Ok((LinkKind::TwoKink, LinkKind::CompanionKink)),
        (other, _) => Err(Error::UnsupportedKind(other.name().into())),
    }
}

fn tilde_profile(link: &BtLink, d: &Field, dtx: &Field, dtxx: &Field) -> Field {
    let a0 = link.parameter();
    let (cp, cm) = link.cosines();
    dtxx + &(&(&(d - dtx) * cp) * (0.5 / a0)) - &(&(&(d + dtx) * cm) * (0.5 * a0))
}

impl Chain {
    /// The chain through the complex kink (breather) or the companion kink (2-kink,
    /// kink-antikink).
    pub fn new(kind: ProfileKind, p: &SolitonParams, g: &Grid) -> Result<Self> {
        Self::build(kind, p, g, false)
    }

    /// The breather chain through the conjugate kink.
    pub fn conjugate_breather(p: &SolitonParams, g: &Grid) -> Result<Self> {
        Self::build(ProfileKind::Breather, p, g, true)
    }

    fn build(kind: ProfileKind, p: &SolitonParams, g: &Grid, conjugate: bool) -> Result<Self> {
        let (tk, bk) = links(kind, conjugate)?;
        let top = BtLink::new(tk, p, g)?;
        let bottom = BtLink::new(bk, p, g)?;
        let d = top.upper().phi.clone();
        let s2 = shift_derivatives(kind, p, g, 2)?;
        let s1 = shift_derivatives(kind, p, g, 1)?;
        let dtxx = profile_dtxx(kind, p, g)?;
        let tilde = tilde_profile(&top, &d, &s2.phi_t, &dtxx);
        Ok(Chain { kind, top, bottom, tilde, d, d2: s2.phi, dtx: s2.phi_t, dtxx, d1: s1.phi, dt1: s1.phi_t })
    }

    pub fn kind(&self) -> ProfileKind {
        self.kind
    }

    pub fn top_link(&self) -> &BtLink {
        &self.top
    }

    pub fn bottom_link(&self) -> &BtLink {
        &self.bottom
    }

    /// `D~0 = D_txx + (D - D_tx) cos((D+M)/2)/(2 a0) - (a0/2)(D + D_tx) cos((D-M)/2)`.
    pub fn nondegeneracy_profile(&self) -> &Field {
        &self.tilde
    }

    /// `(D_1, (D_1)_t)`, the weights of the top-level ascent constraint.
    pub fn top_weights(&self) -> (&Field, &Field) {
        (&self.d1, &self.dt1)
    }

    /// `∫ D~0 u + ∫ D s`.
    pub fn constraint_value(&self, middle: &FieldPair) -> C64 {
        integrate(&(&self.tilde * &middle.phi)) + integrate(&(&self.d * &middle.phi_t))
    }

    /// Value `N(delta, u, z)` that `∫ D~0 u + ∫ D s` must take for the top perturbation `z`
    /// to satisfy the second orthogonality condition.
    pub fn consistency_value(&self, top_correction: C64, u: &Field, z: &Field) -> C64 {
        let a0 = self.top.parameter();
        let a = a0 + top_correction;
        let (sp, sm) = self.top.sines();
        let big_sp = self.top.sin_plus(&((z + u) * 0.5));
        let big_sm = self.top.sin_minus(&((z - u) * 0.5));
        let minus = &self.d - &self.dtx;
        let plus = &self.d + &self.dtx;
        integrate(&(&(&self.tilde - &self.dtxx) * u))
            + integrate(&(&minus * &(&(sp * (1.0 / a0)) - &(&big_sp * (1.0 / a)))))
            + integrate(&(&plus * &(&(sm * a0) - &(&big_sm * a))))
    }

    /// `(∫ z D_1 + ∫ w (D_1)_t, ∫ z D_2 + ∫ w (D_2)_t)` for a top perturbation.
    pub fn top_orthogonality(&self, top: &FieldPair) -> (C64, C64) {
        (
            integrate(&(&top.phi * &self.d1)) + integrate(&(&top.phi_t * &self.dt1)),
            integrate(&(&top.phi * &self.d2)) + integrate(&(&top.phi_t * &self.dtx)),
        )
    }

    /// Descends a top perturbation to the middle level and then to the vacuum.
    pub fn descend(&self, top: &FieldPair, opts: &SolverOptions) -> Result<ChainDescent> {
        let middle = self.top.descend(top, opts)?;
        let bottom = self.bottom.descend(&middle.pair(), opts)?;
        let constraint_value = self.constraint_value(&middle.pair());
        Ok(ChainDescent { middle, bottom, constraint_value })
    }

    fn ascend_with(
        &self,
        bottom: &FieldPair,
        bottom_correction: C64,
        top_correction: C64,
        c: C64,
        opts: &SolverOptions,
    ) -> Result<(DescentResult, DescentResult)> {
        self.ascend_pair(bottom, bottom_correction, top_correction, c, C64::new(0.0, 0.0), opts)
    }

    fn ascend_pair(
        &self,
        bottom: &FieldPair,
        bottom_correction: C64,
        top_correction: C64,
        c: C64,
        top_target: C64,
        opts: &SolverOptions,
    ) -> Result<(DescentResult, DescentResult)> {
        let middle = self.bottom.ascend(bottom, bottom_correction, (&self.tilde, &self.d), c, opts)?;
        let top = self.top.ascend(&middle.pair(), top_correction, (&self.d1, &self.dt1), top_target, opts)?;
        Ok((middle, top))
    }

    /// Ascent with prescribed constraint values at both levels: `∫(u, s)·(D~0, D) = c` and
    /// `∫(z, w)·(D_1, (D_1)_t) = top_target`.
    pub fn ascend_to(
        &self,
        bottom: &FieldPair,
        bottom_correction: C64,
        top_correction: C64,
        c: C64,
        top_target: C64,
        opts: &SolverOptions,
    ) -> Result<ChainAscent> {
        let (middle, top) = self.ascend_pair(bottom, bottom_correction, top_correction, c, top_target, opts)?;
        Ok(ChainAscent { middle, top, constraint_value: c, outer_iterations: 1 })
    }

    /// Ascends a vacuum-level perturbation to the middle and then to the top level.
    pub fn ascend(
        &self,
        bottom: &FieldPair,
        bottom_correction: C64,
        top_correction: C64,
        mode: ConstraintMode,
        opts: &SolverOptions,
    ) -> Result<ChainAscent> {
        match mode {
            ConstraintMode::RoundTrip(c) => {
                let (middle, top) = self.ascend_with(bottom, bottom_correction, top_correction, c, opts)?;
                Ok(ChainAscent { middle, top, constraint_value: c, outer_iterations: 1 })
            }
            ConstraintMode::SelfConsistent => {
                let gap = |c: C64| -> Result<(C64, DescentResult, DescentResult)> {
                    let (m, t) = self.ascend_with(bottom, bottom_correction, top_correction, c, opts)?;
                    let n = self.consistency_value(top_correction, &m.u, &t.u);
                    Ok((n - c, m, t))
                };
                let mut c0 = C64::new(0.0, 0.0);
                let (mut f0, _, _) = gap(c0)?;
                let mut c1 = c0 + f0;
                for it in 1..=opts.max_iter {
                    let (f1, m, t) = gap(c1)?;
                    let step = if (f1 - f0).norm() > 0.0 { -f1 * (c1 - c0) / (f1 - f0) } else { f1 };
                    if step.norm() < opts.tol || f1.norm() < opts.tol {
                        return Ok(ChainAscent { middle: m, top: t, constraint_value: c1, outer_iterations: it });
                    }
                    c0 = c1;
                    f0 = f1;
                    c1 += step;
                }
                Err(Error::NoConvergence { what: "self-consistent constraint", iterations: opts.max_iter, residual: f0.norm() })
            }
        }
    }
}

fn grid_of(f: &Field) -> Grid {
    *f.grid()
}

/// Descent `(B + z0, B_t + w0) → (K + u0, K_t + s0)` with correction `delta`.
pub fn descend_breather(z0: &Field, w0: &Field, p: &SolitonParams, opts: &SolverOptions) -> Result<DescentResult> {
    let link = BtLink::new(LinkKind::Breather, p, &grid_of(z0))?;
    link.descend(&FieldPair::new(z0.clone(), w0.clone())?, opts)
}

/// Descent `(K + u0, K_t + s0) → (y0, v0)` with correction `delta~`.
pub fn descend_kink_to_zero(u0: &Field, s0: &Field, p: &SolitonParams, opts: &SolverOptions) -> Result<DescentResult> {
    let link = BtLink::new(LinkKind::Kink, p, &grid_of(u0))?;
    link.descend(&FieldPair::new(u0.clone(), s0.clone())?, opts)
}

/// Ascent `(y, v) → (K + u, K_t + s)` at `beta - i alpha + delta~` with `∫(u, s)·(B~0, B) = c`.
pub fn ascend_zero_to_kink(
    y: &Field,
    v: &Field,
    delta_tilde: C64,
    p: &SolitonParams,
    c: C64,
    opts: &SolverOptions,
) -> Result<DescentResult> {
    let chain = Chain::new(ProfileKind::Breather, p, &grid_of(y))?;
    chain.bottom.ascend(&FieldPair::new(y.clone(), v.clone())?, delta_tilde, (&chain.tilde, &chain.d), c, opts)
}

/// Ascent `(K + u, K_t + s) → (B + z, B_t + w)` at `beta + i alpha + delta` with
/// `∫(z, w)·(B_1, (B_1)_t) = 0`.
pub fn ascend_kink_to_breather(
    u: &Field,
    s: &Field,
    delta: C64,
    p: &SolitonParams,
    opts: &SolverOptions,
) -> Result<DescentResult> {
    let chain = Chain::new(ProfileKind::Breather, p, &grid_of(u))?;
    chain.top.ascend(&FieldPair::new(u.clone(), s.clone())?, delta, (&chain.d1, &chain.dt1), C64::new(0.0, 0.0), opts)
}

/// Descent of a 2-kink or kink-antikink perturbation to the companion kink and the vacuum.
pub fn descend_2soliton(
    z0: &Field,
    w0: &Field,
    kind: ProfileKind,
    p: &SolitonParams,
    opts: &SolverOptions,
) -> Result<(DescentResult, DescentResult)> {
    if kind == ProfileKind::Breather {
        return Err(Error::UnsupportedKind(kind.name().into()));
    }
    let chain = Chain::new(kind, p, &grid_of(z0))?;
    let d = chain.descend(&FieldPair::new(z0.clone(), w0.clone())?, opts)?;
    Ok((d.middle, d.bottom))
}

/// Ascent of `(y, v)` through the companion kink to a 2-kink or kink-antikink perturbation.
#[allow(clippy::too_many_arguments)]
pub fn ascend_2soliton(
    y: &Field,
    v: &Field,
    b_tilde: C64,
    b: C64,
    kind: ProfileKind,
    p: &SolitonParams,
    mode: ConstraintMode,
    opts: &SolverOptions,
) -> Result<(DescentResult, DescentResult)> {
    if kind == ProfileKind::Breather {
        return Err(Error::UnsupportedKind(kind.name().into()));
    }
    let chain = Chain::new(kind, p, &grid_of(y))?;
    let a = chain.ascend(&FieldPair::new(y.clone(), v.clone())?, b_tilde, b, mode, opts)?;
    Ok((a.middle, a.top))
}

/// `D~0` for a 2-soliton kind.
pub fn nondegeneracy_profile(kind: ProfileKind, p: &SolitonParams, g: &Grid) -> Result<Field> {
    let (tk, _) = links(kind, false)?;
    let top = BtLink::new(tk, p, g)?;
    let dtx = shift_derivatives(kind, p, g, 2)?.phi_t;
    let dtxx = profile_dtxx(kind, p, g)?;
    Ok(tilde_profile(&top, &top.upper().phi, &dtx, &dtxx))
}

/// `I(x1, beta) = ∫ B~0 K_x` with `x2 = 0` on a given grid.
pub fn nondegeneracy_integral_on(x1: f64, beta: f64, g: &Grid) -> Result<C64> {
    let p = SolitonParams::new(beta, x1, 0.0)?;
    let tilde = nondegeneracy_profile(ProfileKind::Breather, &p, g)?;
    let kx = profile_dx(ProfileKind::ComplexKink, &p, g)?;
    Ok(integrate(&(&tilde * &kx)))
}

/// `I(x1, beta)` on the default grid, doubled in width for `|beta| < 0.2`.
pub fn nondegeneracy_integral(x1: f64, beta: f64) -> Result<C64> {
    let g = if beta.abs() < 0.2 { Grid::standard().doubled() } else { Grid::standard() };
    nondegeneracy_integral_on(x1, beta, &g)
}

/// The four-term balance
/// `i Im∫B_tx K_x - i Im∫B K_t - (1/a0)∫(B - B_tx) sin((B+K)/2) - a0 ∫(B + B_tx) sin((B-K)/2)`,
/// which vanishes identically.
pub fn breather_kink_balance(p: &SolitonParams, g: &Grid) -> Result<C64> {
    let chain = Chain::new(ProfileKind::Breather, p, g)?;
    let a0 = chain.top.parameter();
    let kx = profile_dx(ProfileKind::ComplexKink, p, g)?;
    let kt = &chain.top.lower().phi_t;
    let (sp, sm) = chain.top.sines();
    let i = C64::new(0.0, 1.0);
    Ok(i * integrate(&(&chain.dtx * &kx)).im - i * integrate(&(&chain.d * kt)).im
        - integrate(&(&(&chain.d - &chain.dtx) * sp)) / a0
        - integrate(&(&(&chain.d + &chain.dtx) * sm)) * a0)
}
