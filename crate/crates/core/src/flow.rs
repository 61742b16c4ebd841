//! Right-hand sides of the two governed systems: incompressible
//! Navier-Stokes and the corrected Smagorinsky model (NSE plus a nonlinear
//! eddy-viscosity diffusion term). Pressure never appears: tendencies are
//! Leray-projected, which annihilates every gradient term.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::field::SpectralField;
use crate::grid::WavenumberGrid;
use crate::velocity::VelocityField;

/// Which system a run integrates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Model {
    #[serde(rename = "NSE")]
    Nse,
    #[serde(rename = "CSM")]
    Csm,
}

/// Pointwise magnitude entering the eddy viscosity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EddyVariant {
    /// nu_T = cs^2 delta^2 sqrt(sum_ij (d_j v_i)^2)
    GradientMagnitude,
    /// nu_T = cs^2 delta^2 sqrt(2 sum_ij S_ij S_ij), S = (grad v + grad v^T)/2
    StrainRateMagnitude,
}

/// Sign convention for the closure term on the right-hand side.
/// `Dissipative` adds +div(nu_T grad v), which removes energy;
/// `Antidissipative` flips the sign and injects energy instead.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClosureSign {
    Dissipative,
    Antidissipative,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Kinematic viscosity.
    pub nu: f64,
    /// Smagorinsky constant.
    pub cs: f64,
    /// Filter width.
    pub delta: f64,
    /// Sobolev order used by the diagnostics.
    pub s: f64,
    pub eddy_variant: EddyVariant,
    pub closure_sign: ClosureSign,
}

impl ModelParams {
    /// Library defaults: nu = 0.1, cs = 0.17, delta = grid spacing, s = 2.
    pub fn defaults_for(n: usize, length: f64) -> Self {
        ModelParams {
            nu: 0.1,
            cs: 0.17,
            delta: length / n as f64,
            s: 2.0,
            eddy_variant: EddyVariant::GradientMagnitude,
            closure_sign: ClosureSign::Dissipative,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.nu.is_finite() && self.nu > 0.0) {
            return Err(CoreError::invalid("params.nu", format!("viscosity must be > 0, got {}", self.nu)));
        }
        if !(self.cs.is_finite() && self.cs >= 0.0) {
            return Err(CoreError::invalid("params.cs", format!("Smagorinsky constant must be >= 0, got {}", self.cs)));
        }
        if !(self.delta.is_finite() && self.delta > 0.0) {
            return Err(CoreError::invalid("params.delta", format!("filter width must be > 0, got {}", self.delta)));
        }
        if !(self.s.is_finite() && self.s > 1.0) {
            return Err(CoreError::invalid("params.s", format!("Sobolev order must exceed d/2 = 1, got {}", self.s)));
        }
        Ok(())
    }
}

/// External forcing. Band-limited by construction (|m| <= 2), so every
/// forcing stays in the dealias ball and in each Sobolev space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum ForcingSpec {
    Zero,
    SteadyBandLimited {
        amplitude: f64,
        active_modes: Vec<(i32, i32)>,
    },
    ExponentiallyDecaying {
        amplitude: f64,
        active_modes: Vec<(i32, i32)>,
        decay_rate: f64,
    },
}

impl ForcingSpec {
    /// Default mode set for the built-in band-limited patterns.
    pub fn default_modes() -> Vec<(i32, i32)> {
        vec![(1, 0), (0, 1)]
    }

    pub fn validate(&self) -> Result<()> {
        let check = |amplitude: f64, modes: &[(i32, i32)]| -> Result<()> {
            if !amplitude.is_finite() {
                return Err(CoreError::invalid("forcing.amplitude", "must be finite"));
            }
            if modes.is_empty() {
                return Err(CoreError::invalid("forcing.active_modes", "must not be empty"));
            }
            for &(mx, my) in modes {
                let msq = mx * mx + my * my;
                if msq == 0 {
                    return Err(CoreError::invalid("forcing.active_modes", "mean mode (0,0) not allowed"));
                }
                if msq > 4 {
                    return Err(CoreError::invalid(
                        "forcing.active_modes",
                        format!("mode ({mx},{my}) outside |k| <= 2"),
                    ));
                }
            }
            Ok(())
        };
        match self {
            ForcingSpec::Zero => Ok(()),
            ForcingSpec::SteadyBandLimited { amplitude, active_modes } => check(*amplitude, active_modes),
            ForcingSpec::ExponentiallyDecaying { amplitude, active_modes, decay_rate } => {
                check(*amplitude, active_modes)?;
                if !(decay_rate.is_finite() && *decay_rate >= 0.0) {
                    return Err(CoreError::invalid("forcing.decay_rate", "must be finite and >= 0"));
                }
                Ok(())
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            ForcingSpec::Zero => true,
            ForcingSpec::SteadyBandLimited { amplitude, .. }
            | ForcingSpec::ExponentiallyDecaying { amplitude, .. } => *amplitude == 0.0,
        }
    }

    /// Forcing field at time t. Each active mode m contributes a solenoidal
    /// cosine: amplitude * e_perp(m) * cos(k_m . x) with e_perp = (-my, mx)/|m|.
    pub fn evaluate(&self, grid: &Arc<WavenumberGrid>, t: f64) -> VelocityField {
        let (amplitude, modes, scale) = match self {
            ForcingSpec::Zero => return VelocityField::zeros(grid.clone()),
            ForcingSpec::SteadyBandLimited { amplitude, active_modes } => (*amplitude, active_modes, 1.0),
            ForcingSpec::ExponentiallyDecaying { amplitude, active_modes, decay_rate } => {
                (*amplitude, active_modes, (-decay_rate * t).exp())
            }
        };
        let mut f = VelocityField::zeros(grid.clone());
        let n = grid.n() as i32;
        let slot = |m: i32| -> usize { ((m + n) % n) as usize };
        for &(mx, my) in modes {
            let mag = ((mx * mx + my * my) as f64).sqrt();
            let ex = -(my as f64) / mag;
            let ey = mx as f64 / mag;
            let half = 0.5 * amplitude * scale;
            let i = grid.idx(slot(mx), slot(my));
            let j = grid.idx(slot(-mx), slot(-my));
            f.x.coeffs_mut()[i] += Complex64::new(half * ex, 0.0);
            f.x.coeffs_mut()[j] += Complex64::new(half * ex, 0.0);
            f.y.coeffs_mut()[i] += Complex64::new(half * ey, 0.0);
            f.y.coeffs_mut()[j] += Complex64::new(half * ey, 0.0);
        }
        f
    }

    /// ||f(t)||^2 in the spectral H^s norm.
    pub fn hs_norm_sq(&self, grid: &Arc<WavenumberGrid>, s: f64, t: f64) -> Result<f64> {
        if self.is_zero() {
            return Ok(0.0);
        }
        self.evaluate(grid, t).hs_norm_sq(s)
    }
}

/// Instantaneous state of one run.
#[derive(Clone, Debug)]
pub struct SimState {
    pub t: f64,
    pub step_index: u64,
    pub velocity: VelocityField,
}

impl SimState {
    pub fn initial(velocity: VelocityField) -> Self {
        SimState { t: 0.0, step_index: 0, velocity }
    }
}

/// Physical-space evaluation of a velocity field and its full gradient,
/// shared by the advection and closure terms.
struct PhysEval {
    ux: Vec<f64>,
    uy: Vec<f64>,
    dx_ux: Vec<f64>,
    dy_ux: Vec<f64>,
    dx_uy: Vec<f64>,
    dy_uy: Vec<f64>,
}

fn phys_eval(v: &VelocityField) -> Result<PhysEval> {
    if !v.is_finite() {
        return Err(CoreError::NonFinite { context: "velocity state".into() });
    }
    // states inside the pipeline stay Hermitian: they are built from real
    // samples and only touched by real multipliers, projection, and dealiasing
    let (gxx, gxy) = v.x.gradient();
    let (gyx, gyy) = v.y.gradient();
    Ok(PhysEval {
        ux: v.x.to_physical_trusted(),
        uy: v.y.to_physical_trusted(),
        dx_ux: gxx.to_physical_trusted(),
        dy_ux: gxy.to_physical_trusted(),
        dx_uy: gyx.to_physical_trusted(),
        dy_uy: gyy.to_physical_trusted(),
    })
}

fn advection_from(p: &PhysEval, grid: &Arc<WavenumberGrid>) -> Result<VelocityField> {
    let len = grid.len();
    let mut tx = vec![0.0; len];
    let mut ty = vec![0.0; len];
    for i in 0..len {
        tx[i] = p.ux[i] * p.dx_ux[i] + p.uy[i] * p.dy_ux[i];
        ty[i] = p.ux[i] * p.dx_uy[i] + p.uy[i] * p.dy_uy[i];
    }
    let mut out = VelocityField::new(
        SpectralField::from_physical(grid.clone(), &tx)?,
        SpectralField::from_physical(grid.clone(), &ty)?,
    )?;
    out.dealias_in_place();
    Ok(out)
}

fn eddy_viscosity_from(p: &PhysEval, params: &ModelParams) -> Vec<f64> {
    let factor = params.cs * params.cs * params.delta * params.delta;
    let len = p.ux.len();
    let mut nut = vec![0.0; len];
    match params.eddy_variant {
        EddyVariant::GradientMagnitude => {
            for i in 0..len {
                let g = p.dx_ux[i] * p.dx_ux[i]
                    + p.dy_ux[i] * p.dy_ux[i]
                    + p.dx_uy[i] * p.dx_uy[i]
                    + p.dy_uy[i] * p.dy_uy[i];
                nut[i] = factor * g.sqrt();
            }
        }
        EddyVariant::StrainRateMagnitude => {
            for i in 0..len {
                let s11 = p.dx_ux[i];
                let s22 = p.dy_uy[i];
                let s12 = 0.5 * (p.dy_ux[i] + p.dx_uy[i]);
                nut[i] = factor * (2.0 * (s11 * s11 + s22 * s22 + 2.0 * s12 * s12)).sqrt();
            }
        }
    }
    nut
}

fn closure_from(p: &PhysEval, params: &ModelParams, grid: &Arc<WavenumberGrid>) -> Result<VelocityField> {
    if params.cs == 0.0 {
        return Ok(VelocityField::zeros(grid.clone()));
    }
    let nut = eddy_viscosity_from(p, params);
    let len = grid.len();
    let n = grid.n();
    let sign = match params.closure_sign {
        ClosureSign::Dissipative => 1.0,
        ClosureSign::Antidissipative => -1.0,
    };
    let divergence = |flux_x: &[f64], flux_y: &[f64]| -> Result<SpectralField> {
        let fx = SpectralField::from_physical(grid.clone(), flux_x)?.dealiased();
        let fy = SpectralField::from_physical(grid.clone(), flux_y)?.dealiased();
        let mut out = SpectralField::zeros(grid.clone());
        for iy in 0..n {
            let ky = grid.k_deriv(iy);
            for ix in 0..n {
                let kx = grid.k_deriv(ix);
                let idx = grid.idx(ix, iy);
                let a = fx.coeffs()[idx];
                let b = fy.coeffs()[idx];
                // i*k_x*a + i*k_y*b
                out.coeffs_mut()[idx] = Complex64::new(
                    -(kx * a.im + ky * b.im),
                    kx * a.re + ky * b.re,
                ) * sign;
            }
        }
        Ok(out)
    };
    let mut hx = vec![0.0; len];
    let mut hy = vec![0.0; len];
    for i in 0..len {
        hx[i] = nut[i] * p.dx_ux[i];
        hy[i] = nut[i] * p.dy_ux[i];
    }
    let cx = divergence(&hx, &hy)?;
    for i in 0..len {
        hx[i] = nut[i] * p.dx_uy[i];
        hy[i] = nut[i] * p.dy_uy[i];
    }
    let cy = divergence(&hx, &hy)?;
    VelocityField::new(cx, cy)
}

/// Pseudo-spectral advection term (v.grad)v: physical-space products,
/// transformed back and dealiased. Not projected; callers project.
pub fn nonlinear_term(v: &VelocityField) -> Result<VelocityField> {
    let p = phys_eval(v)?;
    advection_from(&p, v.grid())
}

/// Pointwise eddy viscosity field on the collocation grid.
pub fn eddy_viscosity(v: &VelocityField, params: &ModelParams) -> Result<Vec<f64>> {
    let p = phys_eval(v)?;
    Ok(eddy_viscosity_from(&p, params))
}

/// Closure term div(nu_T grad v) per component, evaluated pseudo-spectrally
/// and returned as a right-hand-side tendency with the configured sign
/// (`Dissipative` gives +div(nu_T grad v), which never injects energy).
pub fn csm_diffusion_term(v: &VelocityField, params: &ModelParams) -> Result<VelocityField> {
    let p = phys_eval(v)?;
    closure_from(&p, params, v.grid())
}

fn assemble_rhs(
    v: &VelocityField,
    t: f64,
    params: &ModelParams,
    forcing: &ForcingSpec,
    closure: Option<&VelocityField>,
    advection: &VelocityField,
    viscous: bool,
) -> Result<VelocityField> {
    let grid = v.grid().clone();
    let mut acc = forcing.evaluate(&grid, t);
    acc.axpy(-1.0, advection);
    if let Some(c) = closure {
        acc.axpy(1.0, c);
    }
    let mut out = acc.leray_project();
    if viscous {
        let mut lap = VelocityField {
            x: v.x.laplacian(),
            y: v.y.laplacian(),
        };
        lap.scale(params.nu);
        out.axpy(1.0, &lap);
    }
    Ok(out)
}

/// Full Navier-Stokes tendency: P[-(v.grad)v + f] + nu*Lap v.
pub fn nse_rhs(state: &SimState, params: &ModelParams, forcing: &ForcingSpec) -> Result<VelocityField> {
    let p = phys_eval(&state.velocity)?;
    let adv = advection_from(&p, state.velocity.grid())?;
    assemble_rhs(&state.velocity, state.t, params, forcing, None, &adv, true)
}

/// Full corrected-Smagorinsky tendency: the NSE tendency plus the projected
/// closure term. Collapses to `nse_rhs` exactly when cs = 0.
pub fn csm_rhs(state: &SimState, params: &ModelParams, forcing: &ForcingSpec) -> Result<VelocityField> {
    let p = phys_eval(&state.velocity)?;
    let adv = advection_from(&p, state.velocity.grid())?;
    let closure = closure_from(&p, params, state.velocity.grid())?;
    let c = if params.cs == 0.0 { None } else { Some(&closure) };
    assemble_rhs(&state.velocity, state.t, params, forcing, c, &adv, true)
}

/// Tendency without the viscous part, for integrators that apply the
/// viscous factor exactly: P[-(v.grad)v + f (+ closure)].
pub(crate) fn nonviscous_tendency(
    model: Model,
    v: &VelocityField,
    t: f64,
    params: &ModelParams,
    forcing: &ForcingSpec,
) -> Result<VelocityField> {
    let p = phys_eval(v)?;
    let adv = advection_from(&p, v.grid())?;
    let closure = match model {
        Model::Nse => None,
        Model::Csm => {
            if params.cs == 0.0 {
                None
            } else {
                Some(closure_from(&p, params, v.grid())?)
            }
        }
    };
    assemble_rhs(v, t, params, forcing, closure.as_ref(), &adv, false)
}

/// Decaying vortex array (cos kx sin ky, -sin kx cos ky) e^{-2 nu k^2 t}
/// with k the fundamental wavenumber of the grid; exact unforced
/// Navier-Stokes solution, used as the solver correctness oracle.
pub fn taylor_green(grid: &Arc<WavenumberGrid>, t: f64, nu: f64) -> VelocityField {
    let n = grid.n();
    let k0 = 2.0 * std::f64::consts::PI / grid.length();
    let decay = (-2.0 * nu * k0 * k0 * t).exp();
    let mut ux = vec![0.0; grid.len()];
    let mut uy = vec![0.0; grid.len()];
    for iy in 0..n {
        let ay = 2.0 * std::f64::consts::PI * iy as f64 / n as f64;
        for ix in 0..n {
            let ax = 2.0 * std::f64::consts::PI * ix as f64 / n as f64;
            ux[iy * n + ix] = ax.cos() * ay.sin() * decay;
            uy[iy * n + ix] = -(ax.sin() * ay.cos()) * decay;
        }
    }
    let fx = SpectralField::from_physical(grid.clone(), &ux).expect("finite samples");
    let fy = SpectralField::from_physical(grid.clone(), &uy).expect("finite samples");
    VelocityField { x: fx, y: fy }
}
