//! Closed-form double Backlund composition, the permutability check for perturbed
//! breathers and the realness shortcut for the vacuum-level perturbation.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::backlund::{bt_residual_sup, BtParam, Chain, ChainAscent, ChainDescent, SolverOptions};
use crate::error::{Error, Result};
use crate::numerics::{energy_norm, Field, FieldPair, Grid, C64};
use crate::profiles::{eval_profile, ProfileKind, SolitonParams};

/// Poles of `tan((varphi - phi)/4)` closer than this switch to the cotangent form.
pub const POLE_TOL: f64 = 1e-6;

/// Input pairs of a composition must satisfy their BTs to this sup residual.
pub const INPUT_TOL: f64 = 1e-6;

/// Parameters of a double BT.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CompositionParams {
    pub a1: BtParam,
    pub a2: BtParam,
    pub ell: C64,
    pub ell_tilde: C64,
}

impl CompositionParams {
    pub fn new(a1: BtParam, a2: BtParam) -> Result<Self> {
        let (p, q) = (a1.value(), a2.value());
        let scale = p.norm().max(q.norm());
        if (p - q).norm() <= 1e-14 * scale || (p + q).norm() <= 1e-14 * scale {
            return Err(Error::InvalidParameter(format!("composition needs a1 != ±a2, got {p} and {q}")));
        }
        Ok(CompositionParams { a1, a2, ell: (p - q) / (p + q), ell_tilde: (p + q) / (p - q) })
    }

    /// Parameters with the roles of `a1` and `a2` exchanged.
    pub fn swapped(&self) -> Self {
        CompositionParams { a1: self.a2, a2: self.a1, ell: -self.ell, ell_tilde: -self.ell_tilde }
    }
}

/// `base - 4 atan(ell tan((top - bottom)/4))` with its time component, lifted continuously
/// from the left edge.
fn bianchi(base: &FieldPair, top: &FieldPair, bottom: &FieldPair, ell: C64) -> Result<FieldPair> {
    let g = *base.grid();
    if top.grid() != &g || bottom.grid() != &g {
        return Err(Error::GridMismatch);
    }
    let n = g.n();
    let mut phi = Vec::with_capacity(n);
    let mut phi_t = Vec::with_capacity(n);
    let mut lift = 0.0;
    let mut prev: Option<C64> = None;
    for i in 0..n {
        let x = (top.phi.values()[i] - bottom.phi.values()[i]) * 0.25;
        let (s, c) = (x.sin(), x.cos());
        let den = c * c + ell * ell * s * s;
        if den.norm() < 1e-14 {
            return Err(Error::CompositionSingular);
        }
        let a = if c.norm() < POLE_TOL {
            let sign = if (ell * s / c).re >= 0.0 { 1.0 } else { -1.0 };
            sign * FRAC_PI_2 - (c / (ell * s)).atan()
        } else {
            (ell * s / c).atan()
        };
        let mut v = base.phi.values()[i] - 4.0 * a;
        if let Some(p) = prev {
            let k = ((v.re + lift - p.re) / (4.0 * PI)).round();
            lift -= 4.0 * PI * k;
        }
        v += lift;
        prev = Some(v);
        phi.push(v);
        let dt = top.phi_t.values()[i] - bottom.phi_t.values()[i];
        phi_t.push(base.phi_t.values()[i] - ell * dt / den);
    }
    FieldPair::new(Field::new(g, phi)?, Field::new(g, phi_t)?)
}

/// `phi3 = phi1 - 4 atan(ell tan((varphi1 - phi0)/4))` with the matching time component,
/// where `phi1` is the `a2`-BT of `phi0` and `varphi1` the `a1`-BT of `phi1`. The result is
/// the `a1`-BT of `phi0`.
pub fn compose_double_bt(
    varphi1: &FieldPair,
    phi0: &FieldPair,
    phi1: &FieldPair,
    cp: &CompositionParams,
) -> Result<FieldPair> {
    let r_low = bt_residual_sup(phi1, phi0, cp.a2)?;
    if r_low > INPUT_TOL {
        return Err(Error::InputResidual { what: "lower composition input", residual: r_low });
    }
    let r_up = bt_residual_sup(varphi1, phi1, cp.a1)?;
    if r_up > INPUT_TOL {
        return Err(Error::InputResidual { what: "upper composition input", residual: r_up });
    }
    bianchi(phi1, varphi1, phi0, cp.ell)
}

/// Terminal solution of the Bianchi diagram: given `phi1` (the `a2`-BT of `phi0`) and `phi2`
/// (the `a1`-BT of `phi0`), returns the common `a1`-BT of `phi1` and `a2`-BT of `phi2`.
pub fn superpose(phi0: &FieldPair, phi1: &FieldPair, phi2: &FieldPair, cp: &CompositionParams) -> Result<FieldPair> {
    bianchi(phi0, phi2, phi1, cp.ell_tilde)
}

/// `tan((varphi1 - phi0)/4) + ell_tilde tan((phi2 - phi1)/4)`.
pub fn tangent_identity_residual(
    varphi1: &FieldPair,
    phi0: &FieldPair,
    phi1: &FieldPair,
    phi2: &FieldPair,
    cp: &CompositionParams,
) -> Result<Field> {
    let g = *varphi1.grid();
    if [phi0.grid(), phi1.grid(), phi2.grid()].iter().any(|q| **q != g) {
        return Err(Error::GridMismatch);
    }
    let a = varphi1.phi.zip_map(&phi0.phi, |u, v| ((u - v) * 0.25).tan());
    let b = phi2.phi.zip_map(&phi1.phi, |u, v| ((u - v) * 0.25).tan());
    Ok(a + &(b * cp.ell_tilde))
}

/// `y0` from `tan((B + z0 - y0)/4) = ((beta + Re delta)/(alpha + Im delta)) tanh(Im(K + u0)/2)`.
pub fn realness_shortcut(z0: &Field, u0: &Field, delta: C64, p: &SolitonParams, g: &Grid) -> Result<Field> {
    let den = p.alpha() + delta.im;
    if den.abs() < 1e-14 {
        return Err(Error::IllPosed { what: "realness shortcut denominator", value: den });
    }
    let r = (p.beta() + delta.re) / den;
    let b = eval_profile(ProfileKind::Breather, p, g)?.phi;
    let k = eval_profile(ProfileKind::ComplexKink, p, g)?.phi;
    let ku = &k + u0;
    let mut out = &b + z0;
    for (o, q) in out.values_mut().iter_mut().zip(ku.values()) {
        *o = C64::new(o.re - 4.0 * (r * (q.im * 0.5).tanh()).atan(), 0.0);
    }
    Ok(out)
}

/// Sup discrepancies of the conjugate-kink and breather identities.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConjugateKinkReport {
    /// `tan((K - conj K)/4)` against `i sin(alpha x1)/cosh(beta(x + x2))`.
    pub kink_difference: f64,
    /// `sec^2(B/4)` against `1 + (beta sin(alpha x1)/(alpha cosh))^2`.
    pub secant: f64,
    /// `tan^2(B/4)` against `(beta sin(alpha x1)/(alpha cosh))^2`.
    pub tangent: f64,
    /// `B_t sec^2(B/4)/(1 + l^2 tan^2(B/4))` against its closed form, `l = i alpha/beta`.
    pub weighted_rate: f64,
}

impl ConjugateKinkReport {
    pub fn max(&self) -> f64 {
        self.kink_difference.max(self.secant).max(self.tangent).max(self.weighted_rate)
    }
}

pub fn conjugate_kink_identities(p: &SolitonParams, g: &Grid) -> Result<ConjugateKinkReport> {
    let (b, a, x1, x2) = (p.beta(), p.alpha(), p.x1(), p.x2());
    let k = eval_profile(ProfileKind::ComplexKink, p, g)?;
    let kb = eval_profile(ProfileKind::ConjugateKink, p, g)?;
    let br = eval_profile(ProfileKind::Breather, p, g)?;
    let (s1, c1) = (a * x1).sin_cos();
    let i = C64::new(0.0, 1.0);
    let ell = i * a / b;
    let mut rep = ConjugateKinkReport { kink_difference: 0.0, secant: 0.0, tangent: 0.0, weighted_rate: 0.0 };
    for (j, x) in g.nodes().into_iter().enumerate() {
        let ch = (b * (x + x2)).cosh();
        let lhs = ((k.phi.values()[j] - kb.phi.values()[j]) * 0.25).tan();
        rep.kink_difference = rep.kink_difference.max((lhs - i * s1 / ch).norm());
        let q = b * s1 / (a * ch);
        let t = (br.phi.values()[j] * 0.25).tan();
        let sec2 = 1.0 + t * t;
        rep.secant = rep.secant.max((sec2 - (1.0 + q * q)).norm());
        rep.tangent = rep.tangent.max((t * t - q * q).norm());
        let lhs = br.phi_t.values()[j] * sec2 / (1.0 + ell * ell * t * t);
        let rhs = 4.0 * a * a * b * c1 * ch / (a * a * ch * ch + ell * ell * b * b * s1 * s1);
        rep.weighted_rate = rep.weighted_rate.max((lhs - rhs).norm());
    }
    Ok(rep)
}

/// Outcome of the two-path permutability experiment for a breather perturbation.
#[derive(Clone, Debug)]
pub struct PermutabilityReport {
    /// Descent through the complex kink.
    pub descent: ChainDescent,
    /// Ascent from the vacuum level through the conjugate kink.
    pub conjugate: ChainAscent,
    /// `‖(z~0, w~0) - (z0, w0)‖` in H¹×L².
    pub top_discrepancy: f64,
    /// `‖(u~0, s~0) - conj(u0, s0)‖` in H¹×L².
    pub middle_discrepancy: f64,
    /// `|delta~ - conj(delta)|`.
    pub delta_defect: f64,
    /// `max(sup|Im y0|, sup|Im v0|)`.
    pub imaginary_part: f64,
    /// `‖compose(B + z0, y0, K + u0) - (conj K + u~0)‖` in H¹×L².
    pub composition_gap: f64,
    /// Sup BT residual of the composed pair against `(y0, v0)` at `a1`.
    pub composition_residual: f64,
    /// `sup|realness_shortcut - y0|`.
    pub shortcut_gap: f64,
}

impl PermutabilityReport {
    pub fn y0(&self) -> FieldPair {
        self.descent.bottom.pair()
    }

    pub fn max_discrepancy(&self) -> f64 {
        [self.top_discrepancy, self.middle_discrepancy, self.delta_defect, self.composition_gap]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

/// Descends a real breather perturbation through the complex kink, climbs back through the
/// conjugate kink and compares both routes.
pub fn verify_permutability(
    z0: &Field,
    w0: &Field,
    p: &SolitonParams,
    opts: &SolverOptions,
) -> Result<PermutabilityReport> {
    let g = *z0.grid();
    let top = FieldPair::new(z0.clone(), w0.clone())?;
    let chain = Chain::new(ProfileKind::Breather, p, &g)?;
    let descent = chain.descend(&top, opts)?;
    let (delta, delta_tilde) = (descent.middle.correction, descent.bottom.correction);
    let bottom = descent.bottom.pair();
    let (target, _) = chain.top_orthogonality(&top);
    let conj_chain = Chain::conjugate_breather(p, &g)?;
    let conjugate =
        conj_chain.ascend_to(&bottom, delta, delta_tilde, descent.constraint_value.conj(), target, opts)?;

    let b = eval_profile(ProfileKind::Breather, p, &g)?;
    let k = eval_profile(ProfileKind::ComplexKink, p, &g)?;
    let kb = eval_profile(ProfileKind::ConjugateKink, p, &g)?;
    let cp = CompositionParams::new(
        BtParam::breather_level(p).shifted(delta)?,
        BtParam::kink_level(p).shifted(delta_tilde)?,
    )?;
    let composed = compose_double_bt(&(&b + &top), &bottom, &(&k + &descent.middle.pair()), &cp)?;
    let newton = &kb + &conjugate.middle.pair();
    let shortcut = realness_shortcut(z0, &descent.middle.u, delta, p, &g)?;

    Ok(PermutabilityReport {
        top_discrepancy: energy_norm(&(&conjugate.top.pair() - &top)),
        middle_discrepancy: energy_norm(&(&conjugate.middle.pair() - &descent.middle.pair().conj())),
        delta_defect: (delta_tilde - delta.conj()).norm(),
        imaginary_part: bottom.phi.sup_im().max(bottom.phi_t.sup_im()),
        composition_gap: energy_norm(&(&composed - &newton)),
        composition_residual: bt_residual_sup(&composed, &bottom, cp.a1)?,
        shortcut_gap: (&shortcut - &bottom.phi).sup_norm(),
        descent,
        conjugate,
    })
}
