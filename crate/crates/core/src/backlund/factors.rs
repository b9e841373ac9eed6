//! Closed-form integrating factors of the linearized Backlund equations.

use crate::error::{Error, Result};
use crate::numerics::{differentiate, Field, Grid, C64};
use crate::profiles::{nearest_singularity, sech_c, SolitonParams, SINGULAR_EVAL_TOL};

use super::link::{BtLink, LinkKind};

/// The integrating factors; the `Inverse`/`Growing` variants are reciprocals.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IntegratingFactorKind {
    /// `sech(beta (x + x2) + i alpha x1)`.
    MuK,
    /// `cosh(beta (x + x2) + i alpha x1) / (alpha^2 cosh^2 + beta^2 sin^2)`.
    MuB,
    /// `cosh(gamma (x + x1 + x2)) / (cosh^2(gamma x1) + beta^2 sinh^2(gamma (x + x2)))`.
    MuR,
    /// `cosh(gamma (x + x1 + x2)) / (beta^2 cosh^2(gamma (x + x2)) + sinh^2(gamma x1))`.
    MuA,
    /// `sech(gamma (x + x1 + x2))`.
    MuQDecaying,
    MuBInverse,
    MuAInverse,
    MuRInverse,
    MuQGrowing,
}

impl IntegratingFactorKind {
    fn base(&self) -> (IntegratingFactorKind, bool) {
        match self {
            IntegratingFactorKind::MuBInverse => (IntegratingFactorKind::MuB, true),
            IntegratingFactorKind::MuAInverse => (IntegratingFactorKind::MuA, true),
            IntegratingFactorKind::MuRInverse => (IntegratingFactorKind::MuR, true),
            IntegratingFactorKind::MuQGrowing => (IntegratingFactorKind::MuQDecaying, true),
            k => (*k, false),
        }
    }

    fn link(&self) -> LinkKind {
        match self.base().0 {
            IntegratingFactorKind::MuK => LinkKind::Kink,
            IntegratingFactorKind::MuB => LinkKind::Breather,
            IntegratingFactorKind::MuR => LinkKind::TwoKink,
            IntegratingFactorKind::MuA => LinkKind::KinkAntikink,
            _ => LinkKind::CompanionKink,
        }
    }
}

fn check_regular(p: &SolitonParams) -> Result<()> {
    let (k, d) = nearest_singularity(p.x1(), p);
    if d < SINGULAR_EVAL_TOL {
        return Err(Error::SingularProfile { k });
    }
    Ok(())
}

/// Closed-form integrating factor on the grid.
pub fn integrating_factor(kind: IntegratingFactorKind, p: &SolitonParams, g: &Grid) -> Result<Field> {
    let (base, inverse) = kind.base();
    let (b, a, gm) = (p.beta(), p.alpha(), p.gamma());
    let (x1, x2) = (p.x1(), p.x2());
    let m = match base {
        IntegratingFactorKind::MuK => {
            check_regular(p)?;
            Field::from_fn(*g, |x| sech_c(C64::new(b * (x + x2), a * x1)))
        }
        IntegratingFactorKind::MuB => {
            check_regular(p)?;
            let s = (a * x1).sin();
            Field::from_fn(*g, |x| {
                let cc = (b * (x + x2)).cosh();
                C64::new(b * (x + x2), a * x1).cosh() / (a * a * cc * cc + b * b * s * s)
            })
        }
        IntegratingFactorKind::MuR => Field::from_real_fn(*g, |x| {
            let (c1, s2) = ((gm * x1).cosh(), (gm * (x + x2)).sinh());
            (gm * (x + x1 + x2)).cosh() / (c1 * c1 + b * b * s2 * s2)
        }),
        IntegratingFactorKind::MuA => Field::from_real_fn(*g, |x| {
            let (s1, c2) = ((gm * x1).sinh(), (gm * (x + x2)).cosh());
            (gm * (x + x1 + x2)).cosh() / (b * b * c2 * c2 + s1 * s1)
        }),
        _ => Field::from_real_fn(*g, |x| 1.0 / (gm * (x + x1 + x2)).cosh()),
    };
    Ok(if inverse { m.map(|z| 1.0 / z) } else { m })
}

/// Left side of the first-order ODE solved by the factor, with `c` the link coefficient:
/// `m_x - c m` for the decaying factors and `(n_x + c n)/n` for their reciprocals, which
/// grow exponentially and are therefore checked relative to their size.
pub fn factor_ode_residual(kind: IntegratingFactorKind, p: &SolitonParams, g: &Grid) -> Result<Field> {
    let m = integrating_factor(kind, p, g)?;
    let link = BtLink::new(kind.link(), p, g)?;
    let cm = link.coefficient() * &m;
    let mx = differentiate(&m);
    Ok(if kind.base().1 { (mx + &cm) / &m } else { mx - &cm })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::integrate;
    use crate::profiles::{eval_profile, half_angle, profile_dx, ProfileKind};

    const ALL: [IntegratingFactorKind; 9] = [
        IntegratingFactorKind::MuK,
        IntegratingFactorKind::MuB,
        IntegratingFactorKind::MuR,
        IntegratingFactorKind::MuA,
        IntegratingFactorKind::MuQDecaying,
        IntegratingFactorKind::MuBInverse,
        IntegratingFactorKind::MuAInverse,
        IntegratingFactorKind::MuRInverse,
        IntegratingFactorKind::MuQGrowing,
    ];

    fn p() -> SolitonParams {
        SolitonParams::new(0.5, 0.3, -0.1).unwrap()
    }

    #[test]
    fn ode_residuals_vanish() {
        let g = Grid::standard();
        for kind in ALL {
            let r = factor_ode_residual(kind, &p(), &g).unwrap();
            assert!(r.sup_norm() < 1e-8, "{kind:?}: {}", r.sup_norm());
        }
    }

    #[test]
    fn kink_factor_ode_matches_the_explicit_form() {
        let g = Grid::standard();
        let q = p();
        let m = integrating_factor(IntegratingFactorKind::MuK, &q, &g).unwrap();
        let (_, ck) = half_angle(ProfileKind::ComplexKink, &q, &g).unwrap();
        let r = &differentiate(&m) - &(&(&ck * &m) * q.beta());
        assert!(r.sup_norm() < 1e-8);
    }

    #[test]
    fn closed_forms_against_profile_derivatives() {
        let g = Grid::standard();
        let q = p();
        let (b, a) = (q.beta(), q.alpha());
        let mk = integrating_factor(IntegratingFactorKind::MuK, &q, &g).unwrap();
        let kx = profile_dx(ProfileKind::ComplexKink, &q, &g).unwrap();
        assert!((&mk - &(&kx / (2.0 * b))).sup_norm() < 1e-14);
        let mb = integrating_factor(IntegratingFactorKind::MuB, &q, &g).unwrap();
        let bt = eval_profile(ProfileKind::Breather, &q, &g).unwrap().phi_t;
        let bx = profile_dx(ProfileKind::Breather, &q, &g).unwrap();
        let alt = (&(&bt * b) - &(&bx * C64::new(0.0, a))) / (4.0 * a * a * b * b);
        assert!((&mb - &alt).sup_norm() < 1e-12);
        let inv = integrating_factor(IntegratingFactorKind::MuBInverse, &q, &Grid::new(10.0, 501).unwrap()).unwrap();
        let direct = integrating_factor(IntegratingFactorKind::MuB, &q, &Grid::new(10.0, 501).unwrap()).unwrap();
        assert!((&(&inv * &direct) - 1.0).sup_norm() < 1e-12);
    }

    #[test]
    fn selection_integrals() {
        let g = Grid::standard();
        for beta in [0.3, 0.5, 0.8] {
            let q = SolitonParams::new(beta, 0.3, -0.1).unwrap();
            let (b, a, gm) = (q.beta(), q.alpha(), q.gamma());
            let prof = |k| eval_profile(k, &q, &g).unwrap();
            let mk = integrating_factor(IntegratingFactorKind::MuK, &q, &g).unwrap();
            let (sk, _) = half_angle(ProfileKind::ComplexKink, &q, &g).unwrap();
            assert!((integrate(&(&mk * &sk)) - 2.0 / b).norm() < 1e-8);
            let mb = integrating_factor(IntegratingFactorKind::MuB, &q, &g).unwrap();
            let bx = profile_dx(ProfileKind::Breather, &q, &g).unwrap();
            let kt = prof(ProfileKind::ComplexKink).phi_t;
            assert!((integrate(&(&mb * &(&bx - &kt))) - C64::new(0.0, -4.0 / (a * b))).norm() < 1e-8);
            let qk = ProfileKind::companion_kink(&q);
            let qt = prof(qk).phi_t;
            let ma = integrating_factor(IntegratingFactorKind::MuA, &q, &g).unwrap();
            let ax = profile_dx(ProfileKind::KinkAntikink, &q, &g).unwrap();
            assert!((integrate(&(&ma * &(&ax - &qt))).re + 4.0 / b).abs() < 1e-8);
            let mr = integrating_factor(IntegratingFactorKind::MuR, &q, &g).unwrap();
            let rx = profile_dx(ProfileKind::TwoKink, &q, &g).unwrap();
            assert!((integrate(&(&mr * &(&rx - &qt))).re - 4.0 / b).abs() < 1e-8);
            let mq = integrating_factor(IntegratingFactorKind::MuQDecaying, &q, &g).unwrap();
            let (sq, _) = half_angle(qk, &q, &g).unwrap();
            assert!((integrate(&(&mq * &sq)).re - 2.0 / gm).abs() < 1e-8);
        }
    }

    #[test]
    fn singular_shift_is_rejected() {
        let q = p();
        let bad = q.with_shifts(std::f64::consts::PI / (2.0 * q.alpha()), 0.0);
        assert!(integrating_factor(IntegratingFactorKind::MuB, &bad, &Grid::standard()).is_err());
    }
}
