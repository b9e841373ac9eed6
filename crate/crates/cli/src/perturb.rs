//! Seeded smooth real perturbations of prescribed energy-space size.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sglab::numerics::energy_norm;
use sglab::{Field, FieldPair, Grid};

pub const BUMPS: usize = 5;
pub const CENTER_RANGE: (f64, f64) = (-10.0, 10.0);
pub const WIDTH_RANGE: (f64, f64) = (0.5, 2.0);

fn bumps(g: Grid, rng: &mut ChaCha8Rng) -> Field {
    let params: Vec<(f64, f64, f64)> = (0..BUMPS)
        .map(|_| {
            let c = rng.gen_range(CENTER_RANGE.0..=CENTER_RANGE.1);
            let w = rng.gen_range(WIDTH_RANGE.0..=WIDTH_RANGE.1);
            let a = rng.gen_range(-1.0..=1.0);
            (c, w, a)
        })
        .collect();
    Field::from_real_fn(g, |x| params.iter().map(|(c, w, a)| a * (-((x - c) / w).powi(2)).exp()).sum())
}

/// Sum of five Gaussians in each component, scaled to H¹×L² size `eta`.
pub fn gaussian_bumps(g: Grid, eta: f64, seed: u64) -> FieldPair {
    if eta == 0.0 {
        return FieldPair::zeros(g);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z = bumps(g, &mut rng);
    let w = bumps(g, &mut rng);
    let p = FieldPair { phi: z, phi_t: w };
    let n = energy_norm(&p);
    p.scale(eta / n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn size_reality_and_determinism() {
        let g = Grid::standard();
        let p = gaussian_bumps(g, 1e-3, 7);
        assert!((energy_norm(&p) - 1e-3).abs() < 1e-15);
        assert_eq!(p.phi.sup_im(), 0.0);
        assert_eq!(p.phi_t.sup_im(), 0.0);
        assert_eq!(p, gaussian_bumps(g, 1e-3, 7));
        assert_ne!(p, gaussian_bumps(g, 1e-3, 8));
        assert_eq!(gaussian_bumps(g, 0.0, 7), FieldPair::zeros(g));
    }

    #[test]
    fn perturbations_decay_at_the_edges() {
        let p = gaussian_bumps(Grid::standard(), 1.0, 3);
        assert!(p.phi.edge_sup(0.2) < 1e-12 && p.phi_t.edge_sup(0.2) < 1e-12);
    }
}
