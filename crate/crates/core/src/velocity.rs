//! Two-component velocity fields and the divergence-free machinery.

use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{CoreError, Result};
use crate::field::SpectralField;
use crate::grid::WavenumberGrid;

#[derive(Clone, Debug)]
pub struct VelocityField {
    pub x: SpectralField,
    pub y: SpectralField,
}

impl VelocityField {
    pub fn zeros(grid: Arc<WavenumberGrid>) -> Self {
        VelocityField {
            x: SpectralField::zeros(grid.clone()),
            y: SpectralField::zeros(grid),
        }
    }

    pub fn new(x: SpectralField, y: SpectralField) -> Result<Self> {
        x.grid().ensure_compatible(y.grid())?;
        Ok(VelocityField { x, y })
    }

    #[inline]
    pub fn grid(&self) -> &Arc<WavenumberGrid> {
        self.x.grid()
    }

    /// Orthogonal projection onto divergence-free fields: per mode k != 0,
    /// u <- u - k (k.u)/|k|^2. The mean mode passes through. Modes carrying a
    /// Nyquist index are zeroed: their wavenumber sign is ambiguous, so no
    /// consistent projector exists for them.
    pub fn leray_project(&self) -> Self {
        let grid = self.grid().clone();
        let n = grid.n();
        let mut out = self.clone();
        for iy in 0..n {
            let my = grid.mode(iy) as f64;
            let ny_y = grid.is_nyquist(iy);
            for ix in 0..n {
                let idx = grid.idx(ix, iy);
                if ix == 0 && iy == 0 {
                    continue;
                }
                if ny_y || grid.is_nyquist(ix) {
                    out.x.coeffs_mut()[idx] = Complex64::default();
                    out.y.coeffs_mut()[idx] = Complex64::default();
                    continue;
                }
                // integer modes suffice: the 2*pi/length factors cancel
                let mx = grid.mode(ix) as f64;
                let msq = mx * mx + my * my;
                let ux = out.x.coeffs()[idx];
                let uy = out.y.coeffs()[idx];
                let d = (mx * ux + my * uy) / msq;
                out.x.coeffs_mut()[idx] = ux - mx * d;
                out.y.coeffs_mut()[idx] = uy - my * d;
            }
        }
        out
    }

    /// Max over modes of |k . u_hat|, the absolute discrete divergence residual.
    pub fn divergence_max(&self) -> f64 {
        let grid = self.grid();
        let n = grid.n();
        let mut max = 0.0f64;
        for iy in 0..n {
            let ky = grid.k(iy);
            for ix in 0..n {
                let kx = grid.k(ix);
                let idx = grid.idx(ix, iy);
                let d = kx * self.x.coeffs()[idx] + ky * self.y.coeffs()[idx];
                max = max.max(d.norm());
            }
        }
        max
    }

    /// Largest per-mode vector amplitude; scale reference for the divergence invariant.
    pub fn max_mode_amplitude(&self) -> f64 {
        self.x
            .coeffs()
            .iter()
            .zip(self.y.coeffs().iter())
            .map(|(a, b)| (a.norm_sqr() + b.norm_sqr()).sqrt())
            .fold(0.0, f64::max)
    }

    pub fn l2_norm_sq(&self) -> f64 {
        self.x.l2_norm_sq() + self.y.l2_norm_sq()
    }

    /// Componentwise vector Sobolev norm: sum of the two scalar norms.
    pub fn hs_norm_sq(&self, s: f64) -> Result<f64> {
        Ok(self.x.hs_norm_sq(s)? + self.y.hs_norm_sq(s)?)
    }

    pub fn grad_hs_norm_sq(&self, s: f64) -> Result<f64> {
        Ok(self.x.grad_hs_norm_sq(s)? + self.y.grad_hs_norm_sq(s)?)
    }

    /// Parseval inner product of two velocity fields (real part).
    pub fn inner_l2(&self, other: &VelocityField) -> f64 {
        let l2 = self.grid().length() * self.grid().length();
        let dot = |a: &SpectralField, b: &SpectralField| -> f64 {
            a.coeffs()
                .iter()
                .zip(b.coeffs().iter())
                .map(|(p, q)| (p.conj() * q).re)
                .sum::<f64>()
        };
        l2 * (dot(&self.x, &other.x) + dot(&self.y, &other.y))
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn dealiased(&self) -> Self {
        VelocityField {
            x: self.x.dealiased(),
            y: self.y.dealiased(),
        }
    }

    pub(crate) fn dealias_in_place(&mut self) {
        self.x.dealias_in_place();
        self.y.dealias_in_place();
    }

    pub fn axpy(&mut self, a: f64, rhs: &VelocityField) {
        self.x.axpy(a, &rhs.x);
        self.y.axpy(a, &rhs.y);
    }

    pub fn scale(&mut self, a: f64) {
        self.x.scale(a);
        self.y.scale(a);
    }

    pub fn sub(&self, rhs: &VelocityField) -> VelocityField {
        VelocityField {
            x: self.x.sub(&rhs.x),
            y: self.y.sub(&rhs.y),
        }
    }

    pub(crate) fn mul_factors(&mut self, factors: &[f64]) {
        self.x.mul_factors(factors);
        self.y.mul_factors(factors);
    }

    /// Both components in physical space.
    pub fn to_physical(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        Ok((self.x.to_physical()?, self.y.to_physical()?))
    }

    /// Pointwise maximum speed on the collocation grid.
    pub fn max_speed(&self) -> Result<f64> {
        let (ux, uy) = self.to_physical()?;
        Ok(ux
            .iter()
            .zip(uy.iter())
            .map(|(a, b)| (a * a + b * b).sqrt())
            .fold(0.0, f64::max))
    }
}

/// Seeded, band-limited, solenoidal random field. Modes with integer
/// |m|^2 in [min_msq, max_msq] (Nyquist and dealiased modes excluded) get
/// independent uniform complex amplitudes; the result is projected
/// divergence-free. Deterministic in (grid, seed, band).
pub fn seeded_solenoidal_field(
    grid: &Arc<WavenumberGrid>,
    seed: u64,
    min_msq: u32,
    max_msq: u32,
) -> VelocityField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = grid.n();
    let mut v = VelocityField::zeros(grid.clone());
    for iy in 0..n {
        let my = grid.mode(iy);
        for ix in 0..n {
            let mx = grid.mode(ix);
            // one canonical representative per conjugate pair
            if !(my > 0 || (my == 0 && mx > 0)) {
                continue;
            }
            if grid.is_nyquist(ix) || grid.is_nyquist(iy) || !grid.retained(ix, iy) {
                continue;
            }
            let msq = (mx * mx + my * my) as u32;
            if msq < min_msq || msq > max_msq {
                continue;
            }
            let mut draw = || Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let cx = draw();
            let cy = draw();
            let idx = grid.idx(ix, iy);
            let cidx = grid.idx(grid.conj_slot(ix), grid.conj_slot(iy));
            v.x.coeffs_mut()[idx] = cx;
            v.x.coeffs_mut()[cidx] = cx.conj();
            v.y.coeffs_mut()[idx] = cy;
            v.y.coeffs_mut()[cidx] = cy.conj();
        }
    }
    v.leray_project()
}

/// Seeded solenoidal field rescaled so that its L2 norm is exactly `target_l2`.
pub fn seeded_solenoidal_with_l2(
    grid: &Arc<WavenumberGrid>,
    seed: u64,
    min_msq: u32,
    max_msq: u32,
    target_l2: f64,
) -> Result<VelocityField> {
    if !(target_l2.is_finite() && target_l2 >= 0.0) {
        return Err(CoreError::invalid(
            "target_l2",
            format!("must be finite and >= 0, got {target_l2}"),
        ));
    }
    let mut v = seeded_solenoidal_field(grid, seed, min_msq, max_msq);
    if target_l2 == 0.0 {
        return Ok(VelocityField::zeros(grid.clone()));
    }
    let cur = v.l2_norm_sq().sqrt();
    if cur == 0.0 {
        return Err(CoreError::invalid(
            "band",
            format!(
                "no modes available in |m|^2 range [{min_msq}, {max_msq}] on an n={} grid",
                grid.n()
            ),
        ));
    }
    v.scale(target_l2 / cur);
    Ok(v)
}
