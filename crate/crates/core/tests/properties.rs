//! Property tests for the spectral invariants.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

use csmlab_core::velocity::seeded_solenoidal_field;
use csmlab_core::{SpectralField, VelocityField, WavenumberGrid, DIVERGENCE_TOL};

const PI: f64 = std::f64::consts::PI;

fn grid(n: usize) -> Arc<WavenumberGrid> {
    WavenumberGrid::new(n, 2.0 * PI).unwrap()
}

fn field_from_seed(n: usize, seed: u64) -> SpectralField {
    let g = grid(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    SpectralField::from_physical(g, &samples).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn round_trip_is_identity(n_idx in 0usize..4, seed in 0u64..1_000_000) {
        let n = [8usize, 16, 32, 64][n_idx];
        let f = field_from_seed(n, seed);
        let phys = f.to_physical().unwrap();
        let f2 = SpectralField::from_physical(f.grid().clone(), &phys).unwrap();
        let max = f.max_amplitude();
        for (a, b) in f.coeffs().iter().zip(f2.coeffs().iter()) {
            prop_assert!((a - b).norm() <= 1e-12 * max.max(1e-30));
        }
    }

    #[test]
    fn parseval_against_quadrature(n_idx in 0usize..2, seed in 0u64..1_000_000) {
        let n = [8usize, 16][n_idx];
        let f = field_from_seed(n, seed);
        let phys = f.to_physical().unwrap();
        let h = f.grid().length() / n as f64;
        let quad: f64 = phys.iter().map(|v| v * v).sum::<f64>() * h * h;
        let l2 = f.l2_norm_sq();
        prop_assert!((l2 - quad).abs() <= 1e-10 * quad.max(1e-30));
    }

    #[test]
    fn hs_norm_is_monotone_in_order(seed in 0u64..1_000_000, s1 in 0.0f64..6.0, ds in 0.0f64..3.0) {
        let f = field_from_seed(8, seed);
        let a = f.hs_norm_sq(s1).unwrap();
        let b = f.hs_norm_sq(s1 + ds).unwrap();
        prop_assert!(a <= b * (1.0 + 1e-12));
    }

    #[test]
    fn projection_is_idempotent(seed in 0u64..1_000_000) {
        let g = grid(16);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sx: Vec<f64> = (0..256).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let sy: Vec<f64> = (0..256).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let v = VelocityField::new(
            SpectralField::from_physical(g.clone(), &sx).unwrap(),
            SpectralField::from_physical(g, &sy).unwrap(),
        ).unwrap();
        let p1 = v.leray_project();
        let p2 = p1.leray_project();
        let amp = p1.max_mode_amplitude().max(1e-30);
        prop_assert!(p1.divergence_max() <= DIVERGENCE_TOL * amp);
        let dx = p1.x.sub(&p2.x).max_amplitude();
        let dy = p1.y.sub(&p2.y).max_amplitude();
        prop_assert!(dx.max(dy) <= 1e-12 * amp);
        // projection preserves conjugate symmetry: output converts back
        prop_assert!(p1.x.to_physical().is_ok());
        prop_assert!(p1.y.to_physical().is_ok());
    }

    #[test]
    fn dealias_is_idempotent_and_masked(seed in 0u64..1_000_000) {
        let f = field_from_seed(16, seed);
        let d1 = f.dealiased();
        let d2 = d1.dealiased();
        for (a, b) in d1.coeffs().iter().zip(d2.coeffs().iter()) {
            prop_assert_eq!(a, b);
        }
        let g = d1.grid().clone();
        for iy in 0..16 {
            for ix in 0..16 {
                let c = d1.coeffs()[iy * 16 + ix];
                if g.retained(ix, iy) {
                    prop_assert_eq!(c, f.coeffs()[iy * 16 + ix]);
                } else {
                    prop_assert_eq!(c.norm(), 0.0);
                }
            }
        }
    }

    #[test]
    fn seeded_fields_are_solenoidal_and_hermitian(seed in 0u64..1_000_000) {
        let g = grid(16);
        let v = seeded_solenoidal_field(&g, seed, 1, 16);
        let amp = v.max_mode_amplitude().max(1e-30);
        prop_assert!(v.divergence_max() <= DIVERGENCE_TOL * amp);
        prop_assert!(v.x.hermitian_residual() <= 1e-12);
        prop_assert!(v.y.hermitian_residual() <= 1e-12);
    }
}
