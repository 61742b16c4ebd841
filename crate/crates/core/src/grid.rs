//! Periodic n x n collocation grid and its Fourier-space bookkeeping.
//!
//! Conventions used throughout the crate:
//! - samples live on the uniform grid x_j = j * length / n, row-major with the
//!   y index outermost;
//! - spectral slots follow FFT order, integer modes m = 0..n/2-1, -n/2..-1,
//!   so the Nyquist mode sits at slot n/2 with m = -n/2;
//! - physical wavenumbers are k = 2*pi*m / length;
//! - the 2/3 dealias rule retains a mode iff 3*|m_i| <= n in both directions.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{CoreError, Result};

/// Relative tolerance for the conjugate-symmetry (real field) check.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Relative tolerance for the discrete divergence-free invariant.
pub const DIVERGENCE_TOL: f64 = 1e-10;

pub struct WavenumberGrid {
    n: usize,
    length: f64,
    /// Integer mode per FFT slot.
    modes: Vec<i32>,
    /// Physical wavenumber per FFT slot (2*pi*m/length).
    k_phys: Vec<f64>,
    /// 1D dealias retain flag per slot; the 2D mask is the outer AND.
    keep: Vec<bool>,
    fft_fwd: Arc<dyn Fft<f64>>,
    fft_inv: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for WavenumberGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WavenumberGrid")
            .field("n", &self.n)
            .field("length", &self.length)
            .finish()
    }
}

impl WavenumberGrid {
    pub fn new(n: usize, length: f64) -> Result<Arc<Self>> {
        if n < 8 || n % 2 != 0 {
            return Err(CoreError::invalid(
                "n",
                format!("grid size must be even and >= 8, got {n}"),
            ));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(CoreError::invalid(
                "length",
                format!("domain edge length must be positive and finite, got {length}"),
            ));
        }
        let half = (n / 2) as i32;
        let modes: Vec<i32> = (0..n as i32).map(|i| if i < half { i } else { i - n as i32 }).collect();
        let k0 = 2.0 * std::f64::consts::PI / length;
        let k_phys = modes.iter().map(|&m| k0 * m as f64).collect();
        let keep = modes.iter().map(|&m| 3 * m.unsigned_abs() as usize <= n).collect();
        let mut planner = FftPlanner::new();
        let fft_fwd = planner.plan_fft_forward(n);
        let fft_inv = planner.plan_fft_inverse(n);
        Ok(Arc::new(WavenumberGrid {
            n,
            length,
            modes,
            k_phys,
            keep,
            fft_fwd,
            fft_inv,
        }))
    }

    /// Points per dimension.
    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Domain edge length.
    #[inline]
    pub fn length(&self) -> f64 {
        self.length
    }

    /// Grid spacing length/n.
    #[inline]
    pub fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }

    /// Number of spectral slots (= number of grid points).
    #[inline]
    pub fn len(&self) -> usize {
        self.n * self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Integer mode at a 1D slot.
    #[inline]
    pub fn mode(&self, slot: usize) -> i32 {
        self.modes[slot]
    }

    /// Physical wavenumber at a 1D slot.
    #[inline]
    pub fn k(&self, slot: usize) -> f64 {
        self.k_phys[slot]
    }

    /// Wavenumber used for differentiation: the Nyquist slot maps to zero so
    /// that odd derivatives of real fields stay real.
    #[inline]
    pub fn k_deriv(&self, slot: usize) -> f64 {
        if self.is_nyquist(slot) {
            0.0
        } else {
            self.k_phys[slot]
        }
    }

    #[inline]
    pub fn is_nyquist(&self, slot: usize) -> bool {
        slot == self.n / 2
    }

    /// Flattened index of the (ix, iy) slot pair; y outermost.
    #[inline]
    pub fn idx(&self, ix: usize, iy: usize) -> usize {
        iy * self.n + ix
    }

    /// 1D slot holding the negated mode.
    #[inline]
    pub fn conj_slot(&self, slot: usize) -> usize {
        if slot == 0 {
            0
        } else {
            self.n - slot
        }
    }

    /// 2/3-rule retain flag for the (ix, iy) mode pair.
    #[inline]
    pub fn retained(&self, ix: usize, iy: usize) -> bool {
        self.keep[ix] && self.keep[iy]
    }

    /// True when the two grids are interchangeable for field arithmetic.
    pub fn compatible(&self, other: &WavenumberGrid) -> bool {
        self.n == other.n && self.length == other.length
    }

    pub(crate) fn ensure_compatible(&self, other: &WavenumberGrid) -> Result<()> {
        if self.compatible(other) {
            Ok(())
        } else {
            Err(CoreError::Mismatch(format!(
                "fields on n={} length={} vs n={} length={}",
                self.n, self.length, other.n, other.length
            )))
        }
    }

    /// Unnormalized 2D FFT, in place: rows, transpose, rows, transpose back.
    fn fft2(&self, data: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
        debug_assert_eq!(data.len(), self.len());
        thread_local! {
            static SCRATCH: std::cell::RefCell<Vec<Complex64>> = const { std::cell::RefCell::new(Vec::new()) };
        }
        SCRATCH.with(|cell| {
            let mut scratch = cell.borrow_mut();
            scratch.resize(fft.get_inplace_scratch_len(), Complex64::default());
            fft.process_with_scratch(data, &mut scratch);
            transpose_square(data, self.n);
            fft.process_with_scratch(data, &mut scratch);
            transpose_square(data, self.n);
        });
    }

    /// Forward DFT of the raw buffer, without the 1/n^2 normalization.
    pub(crate) fn fft2_forward_raw(&self, data: &mut [Complex64]) {
        self.fft2(data, &self.fft_fwd);
    }

    /// Inverse DFT of the raw buffer (unnormalized: sum over modes).
    pub(crate) fn fft2_inverse_raw(&self, data: &mut [Complex64]) {
        self.fft2(data, &self.fft_inv);
    }
}

fn transpose_square(data: &mut [Complex64], n: usize) {
    for iy in 0..n {
        for ix in (iy + 1)..n {
            data.swap(iy * n + ix, ix * n + iy);
        }
    }
}
