//! Independent direct-summation DFT oracle: every transform and norm on a
//! small grid must agree with the O(n^4) definition to near round-off.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

use csmlab_core::{SpectralField, WavenumberGrid};

const PI: f64 = std::f64::consts::PI;

/// Plain O(n^4) DFT with the crate's convention: (1/n^2) sum f e^{-ik.x}.
fn direct_dft(samples: &[f64], n: usize) -> Vec<Complex64> {
    let mut coeffs = vec![Complex64::default(); n * n];
    for my in 0..n {
        for mx in 0..n {
            let mut acc = Complex64::default();
            for jy in 0..n {
                for jx in 0..n {
                    let phase = -2.0 * PI * (mx * jx + my * jy) as f64 / n as f64;
                    acc += samples[jy * n + jx] * Complex64::new(phase.cos(), phase.sin());
                }
            }
            coeffs[my * n + mx] = acc / (n * n) as f64;
        }
    }
    coeffs
}

/// Integer mode for an FFT slot, Nyquist negative.
fn slot_mode(i: usize, n: usize) -> i32 {
    if i < n / 2 {
        i as i32
    } else {
        i as i32 - n as i32
    }
}

fn oracle_hs_norm_sq(coeffs: &[Complex64], n: usize, length: f64, s: f64) -> f64 {
    let k0 = 2.0 * PI / length;
    let mut sum = 0.0;
    for iy in 0..n {
        let ky = k0 * slot_mode(iy, n) as f64;
        for ix in 0..n {
            let kx = k0 * slot_mode(ix, n) as f64;
            sum += (1.0 + kx * kx + ky * ky).powf(s) * coeffs[iy * n + ix].norm_sqr();
        }
    }
    length * length * sum
}

fn random_samples(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n * n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn grid(n: usize) -> Arc<WavenumberGrid> {
    WavenumberGrid::new(n, 2.0 * PI).unwrap()
}

#[test]
fn transform_matches_direct_summation_on_100_fields() {
    let g = grid(8);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for trial in 0..100 {
        let samples = random_samples(&mut rng, 8);
        let field = SpectralField::from_physical(g.clone(), &samples).unwrap();
        let oracle = direct_dft(&samples, 8);
        let max_amp = oracle.iter().map(|c| c.norm()).fold(0.0f64, f64::max);
        for (a, b) in field.coeffs().iter().zip(oracle.iter()) {
            assert!(
                (a - b).norm() <= 1e-12 * max_amp,
                "trial {trial}: coefficient mismatch {a} vs {b}"
            );
        }
    }
}

#[test]
fn norms_match_direct_summation_and_quadrature_on_100_fields() {
    let g = grid(8);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for trial in 0..100 {
        let samples = random_samples(&mut rng, 8);
        let field = SpectralField::from_physical(g.clone(), &samples).unwrap();
        let oracle = direct_dft(&samples, 8);

        // Parseval against physical-space quadrature
        let h = g.length() / 8.0;
        let quad: f64 = samples.iter().map(|v| v * v).sum::<f64>() * h * h;
        let l2 = field.l2_norm_sq();
        assert!(
            (l2 - quad).abs() <= 1e-10 * quad.max(1e-30),
            "trial {trial}: Parseval {l2} vs quadrature {quad}"
        );

        for s in [0.0, 1.0, 2.0] {
            let ours = field.hs_norm_sq(s).unwrap();
            let theirs = oracle_hs_norm_sq(&oracle, 8, g.length(), s);
            assert!(
                (ours - theirs).abs() <= 1e-12 * theirs.max(1e-30),
                "trial {trial}: H^{s} norm {ours} vs oracle {theirs}"
            );
        }
    }
}

#[test]
fn oracle_agrees_on_the_cosine_example() {
    let g = grid(8);
    let samples: Vec<f64> = (0..64)
        .map(|i| (2.0 * PI * (i % 8) as f64 / 8.0).cos())
        .collect();
    let oracle = direct_dft(&samples, 8);
    // modes (+-1, 0) carry 1/2
    assert!((oracle[1] - Complex64::new(0.5, 0.0)).norm() < 1e-12);
    assert!((oracle[7] - Complex64::new(0.5, 0.0)).norm() < 1e-12);
    let field = SpectralField::from_physical(g, &samples).unwrap();
    for (a, b) in field.coeffs().iter().zip(oracle.iter()) {
        assert!((a - b).norm() < 1e-12);
    }
}

#[test]
fn round_trip_identity_across_grid_sizes() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for n in [8usize, 16, 32, 64] {
        let g = grid(n);
        let samples = random_samples(&mut rng, n);
        let max = samples.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        let back = SpectralField::from_physical(g, &samples)
            .unwrap()
            .to_physical()
            .unwrap();
        for (a, b) in samples.iter().zip(back.iter()) {
            assert!((a - b).abs() <= 1e-12 * max.max(1.0), "n={n}");
        }
    }
}
