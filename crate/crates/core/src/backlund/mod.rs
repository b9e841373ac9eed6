//! Backlund transformations: residual functionals, integrating factors, the constrained
//! linear solver and the Newton descent/ascent between the vacuum, the kinks and the
//! 2-soliton profiles.

mod chain;
mod factors;
mod link;

pub use chain::{
    ascend_2soliton, ascend_kink_to_breather, ascend_zero_to_kink, breather_kink_balance, descend_2soliton,
    descend_breather, descend_kink_to_zero, nondegeneracy_integral, nondegeneracy_integral_on, nondegeneracy_profile,
    Chain, ChainAscent, ChainDescent, ConstraintMode,
};
pub use factors::{factor_ode_residual, integrating_factor, IntegratingFactorKind};
pub use link::{solve_constrained_ode, BtLink, Constraint, DescentResult, LinkKind, SolverOptions};

use crate::error::{Error, Result};
use crate::numerics::{differentiate, Field, FieldPair, C64};
use crate::profiles::SolitonParams;

/// Nonzero complex Backlund parameter.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BtParam(C64);

/// `a(beta) = ((1 + beta)/(1 - beta))^{1/2}`.
pub fn kink_parameter(beta: f64) -> f64 {
    ((1.0 + beta) / (1.0 - beta)).sqrt()
}

impl BtParam {
    pub fn new(a: C64) -> Result<Self> {
        if !(a.re.is_finite() && a.im.is_finite()) || a.norm() == 0.0 {
            return Err(Error::InvalidParameter(format!("Backlund parameter must be nonzero and finite, got {a}")));
        }
        Ok(BtParam(a))
    }

    pub fn value(&self) -> C64 {
        self.0
    }

    /// `a(beta)`, linking the vacuum to the kink of speed `beta`.
    pub fn kink(beta: f64) -> Self {
        BtParam(C64::new(kink_parameter(beta), 0.0))
    }

    /// `beta + i alpha`, linking the complex kink to the breather.
    pub fn breather_level(p: &SolitonParams) -> Self {
        BtParam(C64::new(p.beta(), p.alpha()))
    }

    /// `beta - i alpha`, linking the vacuum to the complex kink.
    pub fn kink_level(p: &SolitonParams) -> Self {
        BtParam(C64::new(p.beta(), -p.alpha()))
    }

    /// Shifted parameter `a + delta`.
    pub fn shifted(&self, delta: C64) -> Result<Self> {
        BtParam::new(self.0 + delta)
    }

    pub fn neg(&self) -> Self {
        BtParam(-self.0)
    }
}

/// `(F1, F2)` of the Backlund system with `varphi` the new and `phi` the old solution.
pub fn bt_residual(varphi: &FieldPair, phi: &FieldPair, a: BtParam) -> Result<(Field, Field)> {
    if varphi.grid() != phi.grid() {
        return Err(Error::GridMismatch);
    }
    let a = a.value();
    let inv = 1.0 / a;
    let sp = varphi.phi.zip_map(&phi.phi, |u, v| ((u + v) * 0.5).sin());
    let sm = varphi.phi.zip_map(&phi.phi, |u, v| ((u - v) * 0.5).sin());
    let f1 = &differentiate(&varphi.phi) - &phi.phi_t - &(&sp * inv) - &(&sm * a);
    let f2 = &varphi.phi_t - &differentiate(&phi.phi) - &(&sp * inv) + &(&sm * a);
    Ok((f1, f2))
}

/// Larger sup norm of the two residual components.
pub fn bt_residual_sup(varphi: &FieldPair, phi: &FieldPair, a: BtParam) -> Result<f64> {
    let (f1, f2) = bt_residual(varphi, phi, a)?;
    Ok(f1.sup_norm().max(f2.sup_norm()))
}
