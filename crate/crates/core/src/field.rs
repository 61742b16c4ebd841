//! Scalar fields stored as complex Fourier coefficients.
//!
//! Transform convention: coeff_k = (1/n^2) sum_j f(x_j) e^{-i k.x_j}, so the
//! DC coefficient equals the field mean and Parseval reads
//! integral |f|^2 dx = length^2 * sum_k |coeff_k|^2.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{CoreError, Result};
use crate::grid::{WavenumberGrid, HERMITIAN_TOL};

#[derive(Clone, Debug)]
pub struct SpectralField {
    grid: Arc<WavenumberGrid>,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: Arc<WavenumberGrid>) -> Self {
        let len = grid.len();
        SpectralField {
            grid,
            coeffs: vec![Complex64::default(); len],
        }
    }

    /// Wrap raw coefficients. Rejects wrong-sized or non-finite data.
    pub fn from_coeffs(grid: Arc<WavenumberGrid>, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(CoreError::Mismatch(format!(
                "coefficient buffer has {} entries, grid needs {}",
                coeffs.len(),
                grid.len()
            )));
        }
        let field = SpectralField { grid, coeffs };
        if !field.is_finite() {
            return Err(CoreError::NonFinite {
                context: "spectral coefficients".into(),
            });
        }
        Ok(field)
    }

    /// Forward transform of real samples on the n x n grid (row-major, y outer).
    pub fn from_physical(grid: Arc<WavenumberGrid>, samples: &[f64]) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(CoreError::Mismatch(format!(
                "sample buffer has {} entries, grid needs {}",
                samples.len(),
                grid.len()
            )));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(CoreError::NonFinite {
                context: "physical samples".into(),
            });
        }
        let mut buf: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        grid.fft2_forward_raw(&mut buf);
        let norm = 1.0 / (grid.len() as f64);
        for c in &mut buf {
            *c *= norm;
        }
        Ok(SpectralField { grid, coeffs: buf })
    }

    /// Build a field by assigning each (mx, my) integer mode pair a coefficient.
    pub fn from_mode_fn(grid: Arc<WavenumberGrid>, f: impl Fn(i32, i32) -> Complex64) -> Self {
        let n = grid.n();
        let mut coeffs = vec![Complex64::default(); grid.len()];
        for iy in 0..n {
            let my = grid.mode(iy);
            for ix in 0..n {
                coeffs[grid.idx(ix, iy)] = f(grid.mode(ix), my);
            }
        }
        SpectralField { grid, coeffs }
    }

    /// Inverse transform back to real grid samples. Rejects fields whose
    /// conjugate symmetry is broken beyond the relative tolerance.
    pub fn to_physical(&self) -> Result<Vec<f64>> {
        let res = self.hermitian_residual();
        if res > HERMITIAN_TOL {
            return Err(CoreError::NotHermitian {
                max_rel: res,
                tol: HERMITIAN_TOL,
            });
        }
        Ok(self.to_physical_trusted())
    }

    /// Inverse transform without the symmetry check, for pipeline-internal
    /// fields that are Hermitian by construction.
    pub(crate) fn to_physical_trusted(&self) -> Vec<f64> {
        let mut buf = self.coeffs.clone();
        self.grid.fft2_inverse_raw(&mut buf);
        buf.into_iter().map(|c| c.re).collect()
    }

    #[inline]
    pub fn grid(&self) -> &Arc<WavenumberGrid> {
        &self.grid
    }

    #[inline]
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    #[inline]
    pub(crate) fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Coefficient of the integer mode pair (mx, my); panics on out-of-range modes.
    pub fn coeff_at(&self, mx: i32, my: i32) -> Complex64 {
        let n = self.grid.n() as i32;
        let wrap = |m: i32| -> usize {
            assert!(m >= -n / 2 && m < n / 2 || m == -n / 2, "mode {m} out of range");
            ((m + n) % n) as usize
        };
        self.coeffs[self.grid.idx(wrap(mx), wrap(my))]
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Max |coeff(-k) - conj(coeff(k))| over modes, relative to the largest amplitude.
    pub fn hermitian_residual(&self) -> f64 {
        let n = self.grid.n();
        let mut max_amp: f64 = 0.0;
        let mut max_asym: f64 = 0.0;
        for iy in 0..n {
            let cy = self.grid.conj_slot(iy);
            for ix in 0..n {
                let cx = self.grid.conj_slot(ix);
                let a = self.coeffs[self.grid.idx(ix, iy)];
                let b = self.coeffs[self.grid.idx(cx, cy)];
                max_amp = max_amp.max(a.norm());
                max_asym = max_asym.max((b - a.conj()).norm());
            }
        }
        if max_amp == 0.0 {
            0.0
        } else {
            max_asym / max_amp
        }
    }

    /// Zero every mode outside the 2/3 dealias ball, leaving the rest untouched.
    pub fn dealiased(&self) -> Self {
        let mut out = self.clone();
        out.dealias_in_place();
        out
    }

    pub(crate) fn dealias_in_place(&mut self) {
        let n = self.grid.n();
        for iy in 0..n {
            for ix in 0..n {
                if !self.grid.retained(ix, iy) {
                    self.coeffs[self.grid.idx(ix, iy)] = Complex64::default();
                }
            }
        }
    }

    /// Spectral derivative pair (d/dx, d/dy): component j carries i*k_j*coeff.
    pub fn gradient(&self) -> (SpectralField, SpectralField) {
        let n = self.grid.n();
        let mut gx = SpectralField::zeros(self.grid.clone());
        let mut gy = SpectralField::zeros(self.grid.clone());
        for iy in 0..n {
            let ky = self.grid.k_deriv(iy);
            for ix in 0..n {
                let kx = self.grid.k_deriv(ix);
                let idx = self.grid.idx(ix, iy);
                let c = self.coeffs[idx];
                gx.coeffs[idx] = Complex64::new(-kx * c.im, kx * c.re);
                gy.coeffs[idx] = Complex64::new(-ky * c.im, ky * c.re);
            }
        }
        (gx, gy)
    }

    /// Spectral Laplacian: multiply each mode by -|k|^2.
    pub fn laplacian(&self) -> SpectralField {
        let n = self.grid.n();
        let mut out = self.clone();
        for iy in 0..n {
            let ky = self.grid.k(iy);
            for ix in 0..n {
                let kx = self.grid.k(ix);
                out.coeffs[self.grid.idx(ix, iy)] *= -(kx * kx + ky * ky);
            }
        }
        out
    }

    /// length^2 * sum |coeff|^2 = integral of |f|^2 over the domain.
    pub fn l2_norm_sq(&self) -> f64 {
        let l2 = self.grid.length() * self.grid.length();
        l2 * self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>()
    }

    /// Spectral Sobolev norm: length^2 * sum (1+|k|^2)^s |coeff|^2.
    pub fn hs_norm_sq(&self, s: f64) -> Result<f64> {
        if !s.is_finite() || s < 0.0 {
            return Err(CoreError::invalid(
                "s",
                format!("Sobolev order must be finite and >= 0, got {s}"),
            ));
        }
        let n = self.grid.n();
        let mut sum = 0.0;
        for iy in 0..n {
            let ky = self.grid.k(iy);
            for ix in 0..n {
                let kx = self.grid.k(ix);
                let c = self.coeffs[self.grid.idx(ix, iy)];
                sum += (1.0 + kx * kx + ky * ky).powf(s) * c.norm_sqr();
            }
        }
        Ok(self.grid.length() * self.grid.length() * sum)
    }

    /// |k|^2-weighted Sobolev sum: length^2 * sum |k|^2 (1+|k|^2)^s |coeff|^2,
    /// the H^s norm of the gradient computed without forming it.
    pub fn grad_hs_norm_sq(&self, s: f64) -> Result<f64> {
        if !s.is_finite() || s < 0.0 {
            return Err(CoreError::invalid(
                "s",
                format!("Sobolev order must be finite and >= 0, got {s}"),
            ));
        }
        let n = self.grid.n();
        let mut sum = 0.0;
        for iy in 0..n {
            let ky = self.grid.k(iy);
            for ix in 0..n {
                let kx = self.grid.k(ix);
                let ksq = kx * kx + ky * ky;
                let c = self.coeffs[self.grid.idx(ix, iy)];
                sum += ksq * (1.0 + ksq).powf(s) * c.norm_sqr();
            }
        }
        Ok(self.grid.length() * self.grid.length() * sum)
    }

    /// self += a * rhs
    pub fn axpy(&mut self, a: f64, rhs: &SpectralField) {
        debug_assert!(self.grid.compatible(&rhs.grid));
        for (c, r) in self.coeffs.iter_mut().zip(rhs.coeffs.iter()) {
            *c += a * r;
        }
    }

    pub fn scale(&mut self, a: f64) {
        for c in &mut self.coeffs {
            *c *= a;
        }
    }

    pub fn sub(&self, rhs: &SpectralField) -> SpectralField {
        debug_assert!(self.grid.compatible(&rhs.grid));
        let coeffs = self
            .coeffs
            .iter()
            .zip(rhs.coeffs.iter())
            .map(|(a, b)| a - b)
            .collect();
        SpectralField {
            grid: self.grid.clone(),
            coeffs,
        }
    }

    /// Multiply each mode by a precomputed real factor (flattened like coeffs).
    pub(crate) fn mul_factors(&mut self, factors: &[f64]) {
        debug_assert_eq!(factors.len(), self.coeffs.len());
        for (c, &f) in self.coeffs.iter_mut().zip(factors.iter()) {
            *c *= f;
        }
    }

    pub fn max_amplitude(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid(n: usize) -> Arc<WavenumberGrid> {
        WavenumberGrid::new(n, 2.0 * PI).unwrap()
    }

    fn cos_x_samples(n: usize) -> Vec<f64> {
        let mut s = vec![0.0; n * n];
        for iy in 0..n {
            for ix in 0..n {
                s[iy * n + ix] = (2.0 * PI * ix as f64 / n as f64).cos();
            }
        }
        s
    }

    #[test]
    fn zero_samples_give_zero_coefficients() {
        let g = grid(8);
        let f = SpectralField::from_physical(g.clone(), &vec![0.0; 64]).unwrap();
        assert!(f.coeffs().iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn constant_field_is_pure_dc() {
        let g = grid(8);
        let f = SpectralField::from_physical(g.clone(), &vec![3.25; 64]).unwrap();
        assert!((f.coeff_at(0, 0) - Complex64::new(3.25, 0.0)).norm() < 1e-12);
        for iy in 0..8 {
            for ix in 0..8 {
                if ix == 0 && iy == 0 {
                    continue;
                }
                assert!(f.coeffs()[g.idx(ix, iy)].norm() < 1e-12);
            }
        }
    }

    #[test]
    fn cos_x_lands_on_unit_modes() {
        let g = grid(8);
        let f = SpectralField::from_physical(g.clone(), &cos_x_samples(8)).unwrap();
        assert!((f.coeff_at(1, 0) - Complex64::new(0.5, 0.0)).norm() < 1e-12);
        assert!((f.coeff_at(-1, 0) - Complex64::new(0.5, 0.0)).norm() < 1e-12);
        let mut leak: f64 = 0.0;
        for iy in 0..8 {
            for ix in 0..8 {
                if iy == 0 && (ix == 1 || ix == 7) {
                    continue;
                }
                leak = leak.max(f.coeffs()[g.idx(ix, iy)].norm());
            }
        }
        assert!(leak < 1e-12);
    }

    #[test]
    fn rejects_non_finite_samples() {
        let g = grid(8);
        let mut s = vec![0.0; 64];
        s[5] = f64::NAN;
        assert!(matches!(
            SpectralField::from_physical(g, &s),
            Err(CoreError::NonFinite { .. })
        ));
    }

    #[test]
    fn round_trip_is_identity() {
        let g = grid(16);
        // deterministic pseudo-random real samples
        let mut x = 0x12345678u64;
        let samples: Vec<f64> = (0..256)
            .map(|_| {
                x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                (x >> 11) as f64 / (1u64 << 53) as f64 - 0.5
            })
            .collect();
        let f = SpectralField::from_physical(g, &samples).unwrap();
        let back = f.to_physical().unwrap();
        let max_err = samples
            .iter()
            .zip(back.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        assert!(max_err < 1e-12, "round trip error {max_err}");
    }

    #[test]
    fn inverse_of_unit_modes_is_cos_x() {
        let g = grid(8);
        let f = SpectralField::from_mode_fn(g.clone(), |mx, my| {
            if my == 0 && (mx == 1 || mx == -1) {
                Complex64::new(0.5, 0.0)
            } else {
                Complex64::default()
            }
        });
        let samples = f.to_physical().unwrap();
        let expected = cos_x_samples(8);
        for (a, b) in samples.iter().zip(expected.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn inverse_rejects_broken_symmetry() {
        let g = grid(8);
        let f = SpectralField::from_mode_fn(g, |mx, my| {
            if mx == 1 && my == 0 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::default()
            }
        });
        assert!(matches!(f.to_physical(), Err(CoreError::NotHermitian { .. })));
    }

    #[test]
    fn dealias_zeroes_only_masked_modes() {
        let g = grid(16);
        let keep = SpectralField::from_mode_fn(g.clone(), |mx, my| {
            if mx == 1 && my == 0 {
                Complex64::new(1.0, 1.0)
            } else {
                Complex64::default()
            }
        });
        let out = keep.dealiased();
        assert_eq!(out.coeff_at(1, 0), Complex64::new(1.0, 1.0));

        let drop = SpectralField::from_mode_fn(g, |mx, my| {
            if mx == 7 && my == 0 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::default()
            }
        });
        let out = drop.dealiased();
        assert_eq!(out.max_amplitude(), 0.0);
    }

    #[test]
    fn gradient_of_cos_x_is_minus_sin_x() {
        let g = grid(8);
        let f = SpectralField::from_physical(g.clone(), &cos_x_samples(8)).unwrap();
        let (gx, gy) = f.gradient();
        let gx_phys = gx.to_physical().unwrap();
        let gy_phys = gy.to_physical().unwrap();
        for iy in 0..8 {
            for ix in 0..8 {
                let x = 2.0 * PI * ix as f64 / 8.0;
                assert!((gx_phys[iy * 8 + ix] + x.sin()).abs() < 1e-12);
                assert!(gy_phys[iy * 8 + ix].abs() < 1e-12);
            }
        }
        // squared L2 of the gradient: integral of sin^2 x over [0,2pi)^2 = 2 pi^2
        let e = gx.l2_norm_sq() + gy.l2_norm_sq();
        assert!((e - 2.0 * PI * PI).abs() < 1e-10);
    }

    #[test]
    fn constant_field_has_zero_gradient() {
        let g = grid(8);
        let f = SpectralField::from_physical(g, &vec![7.0; 64]).unwrap();
        let (gx, gy) = f.gradient();
        assert_eq!(gx.max_amplitude(), 0.0);
        assert_eq!(gy.max_amplitude(), 0.0);
    }

    #[test]
    fn l2_norm_of_cos_x() {
        let g = grid(8);
        let f = SpectralField::from_physical(g, &cos_x_samples(8)).unwrap();
        assert!((f.l2_norm_sq() - 2.0 * PI * PI).abs() < 1e-10);
        assert_eq!(SpectralField::zeros(grid(8)).l2_norm_sq(), 0.0);
    }

    #[test]
    fn hs_norm_reduces_to_l2_at_zero_order() {
        let g = grid(8);
        let f = SpectralField::from_physical(g, &cos_x_samples(8)).unwrap();
        let l2 = f.l2_norm_sq();
        let h0 = f.hs_norm_sq(0.0).unwrap();
        assert!((l2 - h0).abs() <= 1e-12 * l2.max(1.0));
        // s = 1 on the |k|^2 = 1 shell: multiplier 2
        let h1 = f.hs_norm_sq(1.0).unwrap();
        assert!((h1 - 4.0 * PI * PI).abs() < 1e-10);
        // matches ||f||^2 + ||grad f||^2 at s = 1
        let (gx, gy) = f.gradient();
        let alt = l2 + gx.l2_norm_sq() + gy.l2_norm_sq();
        assert!((h1 - alt).abs() < 1e-10);
    }

    #[test]
    fn hs_norm_rejects_negative_order() {
        let g = grid(8);
        let f = SpectralField::zeros(g);
        assert!(f.hs_norm_sq(-1.0).is_err());
        assert_eq!(f.hs_norm_sq(3.5).unwrap(), 0.0);
    }
}
