//! Energy, momentum, boundary limits and their transfer across a Backlund transformation.

use crate::backlund::BtParam;
use crate::error::{Error, Result};
use crate::numerics::{differentiate, integrate, Field, FieldPair, C64};
use crate::profiles::SolitonParams;

/// Fraction of the grid averaged when estimating a limit at infinity.
pub const LIMIT_WINDOW: f64 = 0.02;

/// Fraction of the grid over which a limit must be stationary.
pub const STATIONARY_WINDOW: f64 = 0.05;

/// Maximal spread of the tail samples for a limit to count as defined.
pub const STATIONARY_TOL: f64 = 1e-6;

/// `(1/2)∫(phi_x^2 + phi_t^2) + ∫(1 - cos phi)`.
pub fn energy(p: &FieldPair) -> C64 {
    let dx = differentiate(&p.phi);
    let dens = p.phi.zip_map(&dx, |f, fx| fx * fx * 0.5 + (1.0 - f.cos())) + &(&p.phi_t * &p.phi_t) * 0.5;
    integrate(&dens)
}

/// Energy with the potential written as `2 sin^2(phi/2)`.
pub fn energy_sin_form(p: &FieldPair) -> C64 {
    let dx = differentiate(&p.phi);
    let dens = p.phi.zip_map(&dx, |f, fx| {
        let s = (f * 0.5).sin();
        fx * fx * 0.5 + s * s * 2.0
    }) + &(&p.phi_t * &p.phi_t) * 0.5;
    integrate(&dens)
}

/// `(1/2)∫ phi_t phi_x`.
pub fn momentum(p: &FieldPair) -> C64 {
    integrate(&(&p.phi_t * &differentiate(&p.phi))) * 0.5
}

/// The four limits `l_±^s = lim_{x→s∞} (1 - cos((varphi ± phi)/2))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryLimits {
    pub plus_plus: C64,
    pub minus_plus: C64,
    pub plus_minus: C64,
    pub minus_minus: C64,
}

impl BoundaryLimits {
    pub fn zero() -> Self {
        let z = C64::new(0.0, 0.0);
        BoundaryLimits { plus_plus: z, minus_plus: z, plus_minus: z, minus_minus: z }
    }
}

fn tail_limit(f: &Field, right: bool) -> Result<C64> {
    let v = f.values();
    let n = v.len();
    let w = ((n as f64 * LIMIT_WINDOW).ceil() as usize).max(1);
    let ws = ((n as f64 * STATIONARY_WINDOW).ceil() as usize).max(w);
    let (avg_range, stat_range) = if right { (n - w..n, n - ws..n) } else { (0..w, 0..ws) };
    let mean = v[avg_range].iter().sum::<C64>() / w as f64;
    let spread = v[stat_range].iter().map(|z| (z - mean).norm()).fold(0.0, f64::max);
    if spread > STATIONARY_TOL {
        return Err(Error::LimitUndefined { spread });
    }
    Ok(mean)
}

/// Limits at `±∞` of `1 - cos((varphi ± phi)/2)` estimated from the grid tails.
pub fn boundary_limits(varphi: &FieldPair, phi: &FieldPair) -> Result<BoundaryLimits> {
    if varphi.grid() != phi.grid() {
        return Err(Error::GridMismatch);
    }
    let plus = varphi.phi.zip_map(&phi.phi, |a, b| 1.0 - ((a + b) * 0.5).cos());
    let minus = varphi.phi.zip_map(&phi.phi, |a, b| 1.0 - ((a - b) * 0.5).cos());
    Ok(BoundaryLimits {
        plus_plus: tail_limit(&plus, true)?,
        minus_plus: tail_limit(&plus, false)?,
        plus_minus: tail_limit(&minus, true)?,
        minus_minus: tail_limit(&minus, false)?,
    })
}

/// Energy and momentum of `varphi` from those of `phi` when `varphi` is a BT of `phi`.
pub fn bt_transfer(e_phi: C64, p_phi: C64, lims: &BoundaryLimits, a: BtParam) -> (C64, C64) {
    let a = a.value();
    let dp = lims.plus_plus - lims.minus_plus;
    let dm = lims.plus_minus - lims.minus_minus;
    (e_phi + dp * 2.0 / a + dm * 2.0 * a, p_phi + dp / a - dm * a)
}

/// Energy and momentum of the breather-level state obtained by two ascents from `(y, v)`
/// with parameter correction `delta`.
pub fn breather_identity(e_y: C64, p_y: C64, delta: C64, p: &SolitonParams) -> Result<(C64, C64)> {
    let (b, a) = (p.beta(), p.alpha());
    let mod2 = 1.0 + 2.0 * b * delta.re + 2.0 * a * delta.im + delta.norm_sqr();
    if mod2.abs() < 1e-14 {
        return Err(Error::IllPosed { what: "breather identity denominator", value: mod2 });
    }
    let s = b + delta.re;
    Ok((e_y + 8.0 * s * (1.0 + 1.0 / mod2), p_y + 4.0 * s * (1.0 / mod2 - 1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Grid;
    use crate::profiles::{eval_profile, ProfileKind};
    use proptest::prelude::*;

    fn params(beta: f64, x1: f64, x2: f64) -> SolitonParams {
        SolitonParams::new(beta, x1, x2).unwrap()
    }

    #[test]
    fn breather_energy_is_sixteen_beta() {
        let g = Grid::standard();
        for beta in [0.3, 0.5, 0.8] {
            let p = params(beta, 0.37, -0.4);
            let s = eval_profile(ProfileKind::Breather, &p, &g).unwrap();
            let e = energy(&s);
            assert!((e.re - 16.0 * beta).abs() < 1e-8 && e.im == 0.0, "{beta}: {e}");
            assert!((e - energy_sin_form(&s)).norm() < 1e-12);
            assert!(momentum(&s).norm() < 1e-10);
        }
    }

    #[test]
    fn moving_kink_energy_and_momentum() {
        let g = Grid::standard();
        let p = params(0.6, 0.0, 0.0);
        let q = eval_profile(ProfileKind::RealKink { x0: 0.3, beta: 0.6 }, &p, &g).unwrap();
        assert!((energy(&q).re - 10.0).abs() < 1e-9);
        assert!((momentum(&q).re + 3.0).abs() < 1e-9);
        let z = FieldPair::zeros(g);
        assert_eq!(energy(&z), C64::new(0.0, 0.0));
        assert_eq!(momentum(&z), C64::new(0.0, 0.0));
    }

    #[test]
    fn two_kink_energy_is_finite_and_matches_sin_form() {
        let g = Grid::standard();
        let p = params(0.5, 0.4, 0.1);
        let r = eval_profile(ProfileKind::TwoKink, &p, &g).unwrap();
        let a = eval_profile(ProfileKind::KinkAntikink, &p, &g).unwrap();
        for s in [r, a] {
            let e = energy(&s);
            assert!((e.re - 16.0 * p.gamma()).abs() < 1e-8, "{e}");
            assert!((e - energy_sin_form(&s)).norm() < 1e-12);
        }
    }

    #[test]
    fn limits_and_transfer_from_vacuum_to_kink() {
        let g = Grid::standard();
        let beta = 0.6;
        let p = params(beta, 0.0, 0.0);
        let q = eval_profile(ProfileKind::RealKink { x0: 0.0, beta }, &p, &g).unwrap();
        let z = FieldPair::zeros(g);
        let l = boundary_limits(&q, &z).unwrap();
        assert!((l.plus_plus.re - 2.0).abs() < 1e-9 && l.minus_plus.norm() < 1e-9);
        assert!((l.plus_minus.re - 2.0).abs() < 1e-9 && l.minus_minus.norm() < 1e-9);
        let (e, m) = bt_transfer(C64::new(0.0, 0.0), C64::new(0.0, 0.0), &l, BtParam::kink(beta));
        assert!((e.re - 8.0 * p.gamma()).abs() < 1e-8);
        assert!((m.re + 4.0 * beta * p.gamma()).abs() < 1e-8);
        assert_eq!(boundary_limits(&z, &z).unwrap(), BoundaryLimits::zero());
    }

    #[test]
    fn limits_for_breather_over_complex_kink() {
        let g = Grid::standard();
        let p = params(0.5, 0.3, 0.2);
        let b = eval_profile(ProfileKind::Breather, &p, &g).unwrap();
        let k = eval_profile(ProfileKind::ComplexKink, &p, &g).unwrap();
        let l = boundary_limits(&b, &k).unwrap();
        assert!((l.plus_plus - 2.0).norm() < 1e-9 && l.minus_plus.norm() < 1e-9);
        assert!((l.plus_minus - 2.0).norm() < 1e-9 && l.minus_minus.norm() < 1e-9);
        let a = eval_profile(ProfileKind::KinkAntikink, &p, &g).unwrap();
        let q = eval_profile(ProfileKind::companion_kink(&p), &p, &g).unwrap();
        let l = boundary_limits(&a, &q).unwrap();
        assert!((l.plus_plus - 2.0).norm() < 1e-9 && l.minus_plus.norm() < 1e-9);
        assert!((l.plus_minus - 2.0).norm() < 1e-9 && l.minus_minus.norm() < 1e-9);
    }

    #[test]
    fn double_transfer_gives_breather_energy() {
        let g = Grid::standard();
        let p = params(0.5, 0.3, 0.2);
        let z = FieldPair::zeros(g);
        let k = eval_profile(ProfileKind::ComplexKink, &p, &g).unwrap();
        let b = eval_profile(ProfileKind::Breather, &p, &g).unwrap();
        let (ek, pk) = bt_transfer(
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            &boundary_limits(&k, &z).unwrap(),
            BtParam::kink_level(&p),
        );
        assert!((ek - energy(&k)).norm() < 1e-8 && (pk - momentum(&k)).norm() < 1e-8);
        let (eb, pb) = bt_transfer(ek, pk, &boundary_limits(&b, &k).unwrap(), BtParam::breather_level(&p));
        assert!((eb - 8.0).norm() < 1e-8 && pb.norm() < 1e-8);
        let (e0, p0) = breather_identity(C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), &p).unwrap();
        assert!((e0.re - 8.0).abs() < 1e-15 && p0.norm() == 0.0);
    }

    #[test]
    fn non_stationary_tail_is_rejected() {
        let g = Grid::new(10.0, 401).unwrap();
        let ramp = FieldPair::new(Field::from_real_fn(g, |x| x), Field::zeros(g)).unwrap();
        assert!(matches!(
            boundary_limits(&ramp, &FieldPair::zeros(g)),
            Err(Error::LimitUndefined { .. })
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn energy_forms_agree(amp in 0.0f64..3.0, w in 0.3f64..3.0, c in -5.0f64..5.0) {
            let g = Grid::new(30.0, 1025).unwrap();
            let s = FieldPair::new(
                Field::from_real_fn(g, |x| amp * (-((x - c) / w).powi(2)).exp()),
                Field::from_real_fn(g, |x| amp * (x - c) * (-((x - c) / w).powi(2)).exp()),
            ).unwrap();
            prop_assert!((energy(&s) - energy_sin_form(&s)).norm() < 1e-12);
        }
    }
}
