//! Time advancement: integrating-factor RK4 over the spectral state, run
//! orchestration with per-record diagnostics, and paired NSE/CSM runs that
//! track the error field between the two models.
//!
//! The viscous term is integrated exactly through the factor
//! e^{-nu |k|^2 dt}; advection, forcing, and the closure are treated
//! explicitly by classical four-stage Runge-Kutta.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::flow::{self, ForcingSpec, Model, ModelParams, SimState};
use crate::grid::WavenumberGrid;
use crate::velocity::{seeded_solenoidal_with_l2, VelocityField};

/// Safety factor on the advective CFL bound dt <= spacing / max|v|.
pub const CFL_ADVECTIVE_SAFETY: f64 = 0.5;
/// Explicit-closure stability bound dt <= 0.25 spacing^2 / max(nu_T).
pub const CFL_CLOSURE_SAFETY: f64 = 0.25;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum InitialCondition {
    TaylorGreen,
    /// Seeded solenoidal noise on integer modes 1 <= |m|^2 <= 16, scaled so
    /// that the squared L2 norm equals `energy`.
    BandLimitedSeeded { seed: u64, energy: f64 },
    /// Resolved by the I/O layer; the core rejects it.
    FromCheckpoint { path: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub model: Model,
    pub n: usize,
    pub length: f64,
    pub dt: f64,
    pub t_end: f64,
    /// Steps between diagnostic records.
    pub record_every: usize,
    pub params: ModelParams,
    pub forcing: ForcingSpec,
    pub initial_condition: InitialCondition,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 8 || self.n % 2 != 0 {
            return Err(CoreError::invalid("n", format!("grid size must be even and >= 8, got {}", self.n)));
        }
        if !(self.length.is_finite() && self.length > 0.0) {
            return Err(CoreError::invalid("length", format!("must be positive and finite, got {}", self.length)));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(CoreError::invalid("dt", format!("time step must be > 0, got {}", self.dt)));
        }
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return Err(CoreError::invalid("t_end", format!("final time must be > 0, got {}", self.t_end)));
        }
        if self.record_every == 0 {
            return Err(CoreError::invalid("record_every", "must be >= 1"));
        }
        self.step_count()?;
        self.params.validate()?;
        self.forcing.validate()?;
        if let InitialCondition::BandLimitedSeeded { energy, .. } = &self.initial_condition {
            if !(energy.is_finite() && *energy >= 0.0) {
                return Err(CoreError::invalid("initial_condition.energy", format!("must be finite and >= 0, got {energy}")));
            }
        }
        Ok(())
    }

    /// Number of steps; t_end must be an integer multiple of dt.
    pub fn step_count(&self) -> Result<u64> {
        let ratio = self.t_end / self.dt;
        let steps = ratio.round();
        if steps < 1.0 || (ratio - steps).abs() > 1e-9 * ratio.max(1.0) {
            return Err(CoreError::invalid(
                "t_end",
                format!("must be an integer multiple of dt (t_end/dt = {ratio})"),
            ));
        }
        Ok(steps as u64)
    }

    pub fn grid(&self) -> Result<Arc<WavenumberGrid>> {
        WavenumberGrid::new(self.n, self.length)
    }
}

/// Per-record norms and running time integrals.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiagnosticRecord {
    pub t: f64,
    pub l2_sq: f64,
    pub hs_sq: f64,
    pub grad_hs_sq: f64,
    pub forcing_hs_sq: f64,
    pub cum_grad_hs: f64,
    pub cum_forcing_hs: f64,
    pub divergence_residual: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum AbortReason {
    Cfl { t: f64, dt: f64, bound: f64 },
    NonFinite { t: f64, detail: String },
}

impl std::fmt::Display for AbortReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AbortReason::Cfl { t, dt, bound } => {
                write!(f, "CFL violation at t={t:.6}: dt={dt:.3e} exceeds stability bound {bound:.3e}")
            }
            AbortReason::NonFinite { t, detail } => {
                write!(f, "non-finite state at t={t:.6}: {detail}")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum RunStatus {
    Completed,
    Aborted(AbortReason),
}

impl RunStatus {
    pub fn completed(&self) -> bool {
        matches!(self, RunStatus::Completed)
    }
}

#[derive(Debug)]
pub struct RunOutcome {
    pub records: Vec<DiagnosticRecord>,
    pub final_state: SimState,
    pub status: RunStatus,
}

/// One integrating-factor RK4 stepper with precomputed viscous factors.
pub struct Stepper {
    grid: Arc<WavenumberGrid>,
    model: Model,
    params: ModelParams,
    forcing: ForcingSpec,
    dt: f64,
    e_full: Vec<f64>,
    e_half: Vec<f64>,
}

impl Stepper {
    pub fn new(
        grid: Arc<WavenumberGrid>,
        model: Model,
        params: ModelParams,
        forcing: ForcingSpec,
        dt: f64,
    ) -> Self {
        let n = grid.n();
        let mut e_full = vec![0.0; grid.len()];
        let mut e_half = vec![0.0; grid.len()];
        for iy in 0..n {
            let ky = grid.k(iy);
            for ix in 0..n {
                let kx = grid.k(ix);
                let ksq = kx * kx + ky * ky;
                let idx = grid.idx(ix, iy);
                e_full[idx] = (-params.nu * ksq * dt).exp();
                e_half[idx] = (-params.nu * ksq * 0.5 * dt).exp();
            }
        }
        Stepper { grid, model, params, forcing, dt, e_full, e_half }
    }

    fn tendency(&self, v: &VelocityField, t: f64) -> Result<VelocityField> {
        flow::nonviscous_tendency(self.model, v, t, &self.params, &self.forcing)
    }

    /// Advance one step. The output is reprojected and dealiased, so the
    /// divergence invariant and the band limit survive round-off.
    pub fn step(&self, state: &SimState) -> Result<SimState> {
        let u = &state.velocity;
        let t = state.t;
        let h = self.dt;

        let k1 = self.tendency(u, t)?;

        let mut s2 = u.clone();
        s2.axpy(0.5 * h, &k1);
        s2.mul_factors(&self.e_half);
        let k2 = self.tendency(&s2, t + 0.5 * h)?;

        let mut s3 = u.clone();
        s3.mul_factors(&self.e_half);
        s3.axpy(0.5 * h, &k2);
        let k3 = self.tendency(&s3, t + 0.5 * h)?;

        let mut s4 = u.clone();
        s4.mul_factors(&self.e_full);
        let mut k3e = k3.clone();
        k3e.mul_factors(&self.e_half);
        s4.axpy(h, &k3e);
        let k4 = self.tendency(&s4, t + h)?;

        // u' = E u + h/6 [E k1 + 2 E_half (k2 + k3) + k4]
        let mut out = u.clone();
        out.mul_factors(&self.e_full);
        let mut acc = k1;
        acc.mul_factors(&self.e_full);
        let mut mid = k2;
        mid.axpy(1.0, &k3);
        mid.mul_factors(&self.e_half);
        acc.axpy(2.0, &mid);
        acc.axpy(1.0, &k4);
        out.axpy(h / 6.0, &acc);

        let mut out = out.leray_project();
        out.dealias_in_place();
        Ok(SimState {
            t: t + h,
            step_index: state.step_index + 1,
            velocity: out,
        })
    }

    /// Advance `count` steps with per-step finiteness checks.
    fn advance(&self, mut state: SimState, count: u64) -> std::result::Result<SimState, AbortReason> {
        for _ in 0..count {
            let t = state.t;
            match self.step(&state) {
                Ok(next) => {
                    if !next.velocity.is_finite() {
                        return Err(AbortReason::NonFinite { t: next.t, detail: "NaN/Inf in spectral state".into() });
                    }
                    state = next;
                }
                Err(e) => {
                    return Err(AbortReason::NonFinite { t, detail: e.to_string() });
                }
            }
        }
        Ok(state)
    }

    /// Stability bound for the current state: min of the advective CFL bound
    /// and, when the closure is active, the explicit-diffusion bound.
    pub fn stability_bound(&self, state: &SimState) -> Result<f64> {
        let spacing = self.grid.spacing();
        let speed = state.velocity.max_speed()?;
        let mut bound = if speed > 0.0 {
            CFL_ADVECTIVE_SAFETY * spacing / speed
        } else {
            f64::INFINITY
        };
        if self.model == Model::Csm && self.params.cs > 0.0 {
            let nut_max = flow::eddy_viscosity(&state.velocity, &self.params)?
                .into_iter()
                .fold(0.0f64, f64::max);
            if nut_max > 0.0 {
                bound = bound.min(CFL_CLOSURE_SAFETY * spacing * spacing / nut_max);
            }
        }
        Ok(bound)
    }

    fn check_cfl(&self, state: &SimState) -> std::result::Result<(), AbortReason> {
        match self.stability_bound(state) {
            Ok(bound) => {
                if self.dt > bound {
                    Err(AbortReason::Cfl { t: state.t, dt: self.dt, bound })
                } else {
                    Ok(())
                }
            }
            Err(e) => Err(AbortReason::NonFinite { t: state.t, detail: e.to_string() }),
        }
    }
}

/// Single public step, matching `Stepper::step` exactly.
pub fn step(
    state: &SimState,
    model: Model,
    params: &ModelParams,
    forcing: &ForcingSpec,
    dt: f64,
) -> Result<SimState> {
    let stepper = Stepper::new(state.velocity.grid().clone(), model, *params, forcing.clone(), dt);
    stepper.step(state)
}

/// Build the starting state for a config. Checkpoint-backed initial
/// conditions carry a file path and must be resolved by the I/O layer.
pub fn initial_state(config: &RunConfig, grid: &Arc<WavenumberGrid>) -> Result<SimState> {
    let velocity = match &config.initial_condition {
        InitialCondition::TaylorGreen => flow::taylor_green(grid, 0.0, config.params.nu),
        InitialCondition::BandLimitedSeeded { seed, energy } => {
            seeded_solenoidal_with_l2(grid, *seed, 1, 16, energy.sqrt())?
        }
        InitialCondition::FromCheckpoint { path } => {
            return Err(CoreError::invalid(
                "initial_condition",
                format!("FromCheckpoint({path}) must be resolved by the I/O layer before running"),
            ));
        }
    };
    let mut velocity = velocity;
    velocity.dealias_in_place();
    Ok(SimState::initial(velocity))
}

struct Recorder {
    s: f64,
    forcing: ForcingSpec,
    grid: Arc<WavenumberGrid>,
    prev_t: f64,
    prev_grad: f64,
    prev_forcing: f64,
    cum_grad: f64,
    cum_forcing: f64,
    first: bool,
}

impl Recorder {
    fn new(grid: Arc<WavenumberGrid>, s: f64, forcing: ForcingSpec) -> Self {
        Recorder {
            s,
            forcing,
            grid,
            prev_t: 0.0,
            prev_grad: 0.0,
            prev_forcing: 0.0,
            cum_grad: 0.0,
            cum_forcing: 0.0,
            first: true,
        }
    }

    fn record(&mut self, state: &SimState) -> Result<DiagnosticRecord> {
        let v = &state.velocity;
        let grad_hs_sq = v.grad_hs_norm_sq(self.s)?;
        let forcing_hs_sq = self.forcing.hs_norm_sq(&self.grid, self.s, state.t)?;
        if self.first {
            self.first = false;
        } else {
            let dt = state.t - self.prev_t;
            self.cum_grad += 0.5 * dt * (self.prev_grad + grad_hs_sq);
            self.cum_forcing += 0.5 * dt * (self.prev_forcing + forcing_hs_sq);
        }
        self.prev_t = state.t;
        self.prev_grad = grad_hs_sq;
        self.prev_forcing = forcing_hs_sq;
        Ok(DiagnosticRecord {
            t: state.t,
            l2_sq: v.l2_norm_sq(),
            hs_sq: v.hs_norm_sq(self.s)?,
            grad_hs_sq,
            forcing_hs_sq,
            cum_grad_hs: self.cum_grad,
            cum_forcing_hs: self.cum_forcing,
            divergence_residual: v.divergence_max(),
        })
    }
}

/// Run a config from its own initial condition.
pub fn run(config: &RunConfig) -> Result<RunOutcome> {
    config.validate()?;
    let grid = config.grid()?;
    let state = initial_state(config, &grid)?;
    run_prepared(config, state)
}

/// Run a config from an explicit starting state (t is taken as 0).
pub fn run_prepared(config: &RunConfig, state0: SimState) -> Result<RunOutcome> {
    config.validate()?;
    let grid = config.grid()?;
    grid.ensure_compatible(state0.velocity.grid())?;
    let steps = config.step_count()?;
    let stepper = Stepper::new(grid.clone(), config.model, config.params, config.forcing.clone(), config.dt);
    let mut recorder = Recorder::new(grid, config.params.s, config.forcing.clone());

    let mut state = state0;
    let mut records = Vec::with_capacity((steps / config.record_every as u64 + 2) as usize);

    if let Err(reason) = stepper.check_cfl(&state) {
        records.push(recorder.record(&state)?);
        return Ok(RunOutcome { records, final_state: state, status: RunStatus::Aborted(reason) });
    }
    records.push(recorder.record(&state)?);

    let re = config.record_every as u64;
    let mut step = 0u64;
    while step < steps {
        let target = ((step / re + 1) * re).min(steps);
        match stepper.advance(state.clone(), target - step) {
            Ok(next) => {
                state = next;
                step = target;
                if let Err(reason) = stepper.check_cfl(&state) {
                    records.push(recorder.record(&state)?);
                    return Ok(RunOutcome { records, final_state: state, status: RunStatus::Aborted(reason) });
                }
                records.push(recorder.record(&state)?);
            }
            Err(reason) => {
                return Ok(RunOutcome { records, final_state: state, status: RunStatus::Aborted(reason) });
            }
        }
    }
    Ok(RunOutcome { records, final_state: state, status: RunStatus::Completed })
}

/// Seeded perturbation describing w(0) = u(0) + p with ||p||_L2 = epsilon.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerturbationSpec {
    pub seed: u64,
    pub epsilon: f64,
    /// Inclusive band of integer |m|^2 carrying the noise.
    pub min_msq: u32,
    pub max_msq: u32,
}

impl Default for PerturbationSpec {
    fn default() -> Self {
        PerturbationSpec { seed: 7, epsilon: 1e-3, min_msq: 1, max_msq: 16 }
    }
}

impl PerturbationSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon.is_finite() && self.epsilon >= 0.0) {
            return Err(CoreError::invalid("perturbation.epsilon", format!("must be finite and >= 0, got {}", self.epsilon)));
        }
        if self.min_msq == 0 || self.min_msq > self.max_msq {
            return Err(CoreError::invalid(
                "perturbation.min_msq",
                format!("need 1 <= min_msq <= max_msq, got [{}, {}]", self.min_msq, self.max_msq),
            ));
        }
        Ok(())
    }

    pub fn field(&self, grid: &Arc<WavenumberGrid>) -> Result<VelocityField> {
        seeded_solenoidal_with_l2(grid, self.seed, self.min_msq, self.max_msq, self.epsilon)
    }
}

/// Error-field diagnostics for a paired run, phi = u - w.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairRecord {
    pub t: f64,
    pub phi_l2_sq: f64,
    pub grad_phi_l2_sq: f64,
    /// Running trapezoid of nu * ||grad phi||^2_{L2}.
    pub cum_nu_grad_phi: f64,
    pub forcing_hs_sq: f64,
    pub cum_forcing_hs: f64,
}

#[derive(Debug)]
pub struct PairOutcome {
    pub u_records: Vec<DiagnosticRecord>,
    pub w_records: Vec<DiagnosticRecord>,
    pub phi_records: Vec<PairRecord>,
    pub final_u: SimState,
    pub final_w: SimState,
    pub status: RunStatus,
}

fn validate_pair(cfg_u: &RunConfig, cfg_w: &RunConfig) -> Result<()> {
    cfg_u.validate()?;
    cfg_w.validate()?;
    if cfg_u.model != Model::Nse {
        return Err(CoreError::Mismatch("paired run: u must use model NSE".into()));
    }
    if cfg_w.model != Model::Csm {
        return Err(CoreError::Mismatch("paired run: w must use model CSM".into()));
    }
    let same = [
        ("n", cfg_u.n == cfg_w.n),
        ("length", cfg_u.length == cfg_w.length),
        ("dt", cfg_u.dt == cfg_w.dt),
        ("t_end", cfg_u.t_end == cfg_w.t_end),
        ("record_every", cfg_u.record_every == cfg_w.record_every),
        ("forcing", cfg_u.forcing == cfg_w.forcing),
        ("params.nu", cfg_u.params.nu == cfg_w.params.nu),
        ("params.s", cfg_u.params.s == cfg_w.params.s),
    ];
    for (key, ok) in same {
        if !ok {
            return Err(CoreError::Mismatch(format!("paired run: `{key}` differs between u and w configs")));
        }
    }
    Ok(())
}

/// Run the NSE/CSM pair in lockstep from u(0) given by `cfg_u`'s initial
/// condition and w(0) = u(0) + perturbation.
pub fn run_pair(cfg_u: &RunConfig, cfg_w: &RunConfig, pert: &PerturbationSpec) -> Result<PairOutcome> {
    validate_pair(cfg_u, cfg_w)?;
    let grid = cfg_u.grid()?;
    let u0 = initial_state(cfg_u, &grid)?;
    run_pair_prepared(cfg_u, cfg_w, pert, u0)
}

/// Same as `run_pair` but with the u(0) state supplied by the caller.
pub fn run_pair_prepared(
    cfg_u: &RunConfig,
    cfg_w: &RunConfig,
    pert: &PerturbationSpec,
    u0: SimState,
) -> Result<PairOutcome> {
    validate_pair(cfg_u, cfg_w)?;
    pert.validate()?;
    let grid = cfg_u.grid()?;
    grid.ensure_compatible(u0.velocity.grid())?;

    let mut w0 = SimState::initial(u0.velocity.clone());
    if pert.epsilon > 0.0 {
        let p = pert.field(&grid)?;
        w0.velocity.axpy(1.0, &p);
        w0.velocity.dealias_in_place();
    }
    let u0 = SimState::initial(u0.velocity);

    let steps = cfg_u.step_count()?;
    let nu = cfg_u.params.nu;
    let stepper_u = Stepper::new(grid.clone(), Model::Nse, cfg_u.params, cfg_u.forcing.clone(), cfg_u.dt);
    let stepper_w = Stepper::new(grid.clone(), Model::Csm, cfg_w.params, cfg_w.forcing.clone(), cfg_w.dt);
    let mut rec_u = Recorder::new(grid.clone(), cfg_u.params.s, cfg_u.forcing.clone());
    let mut rec_w = Recorder::new(grid.clone(), cfg_w.params.s, cfg_w.forcing.clone());

    let mut u_records = Vec::new();
    let mut w_records = Vec::new();
    let mut phi_records = Vec::new();
    let mut cum_nu_grad_phi = 0.0;
    let mut prev_grad_phi = 0.0;
    let mut prev_t = 0.0;
    let mut first_phi = true;

    let mut u = u0;
    let mut w = w0;

    let mut record_all = |u: &SimState,
                          w: &SimState,
                          rec_u: &mut Recorder,
                          rec_w: &mut Recorder|
     -> Result<(DiagnosticRecord, DiagnosticRecord, PairRecord)> {
        let ru = rec_u.record(u)?;
        let rw = rec_w.record(w)?;
        let phi = u.velocity.sub(&w.velocity);
        let grad_phi = phi.grad_hs_norm_sq(0.0)?;
        if first_phi {
            first_phi = false;
        } else {
            cum_nu_grad_phi += 0.5 * (u.t - prev_t) * nu * (prev_grad_phi + grad_phi);
        }
        prev_t = u.t;
        prev_grad_phi = grad_phi;
        let rp = PairRecord {
            t: u.t,
            phi_l2_sq: phi.l2_norm_sq(),
            grad_phi_l2_sq: grad_phi,
            cum_nu_grad_phi,
            forcing_hs_sq: ru.forcing_hs_sq,
            cum_forcing_hs: ru.cum_forcing_hs,
        };
        Ok((ru, rw, rp))
    };

    // CFL preconditions at start
    let initial_abort = stepper_u
        .check_cfl(&u)
        .and_then(|_| stepper_w.check_cfl(&w))
        .err();
    let (ru, rw, rp) = record_all(&u, &w, &mut rec_u, &mut rec_w)?;
    u_records.push(ru);
    w_records.push(rw);
    phi_records.push(rp);
    if let Some(reason) = initial_abort {
        return Ok(PairOutcome {
            u_records,
            w_records,
            phi_records,
            final_u: u,
            final_w: w,
            status: RunStatus::Aborted(reason),
        });
    }

    let re = cfg_u.record_every as u64;
    let mut step = 0u64;
    while step < steps {
        let target = ((step / re + 1) * re).min(steps);
        let count = target - step;
        // advance the two trajectories on separate threads; they share nothing
        let (res_u, res_w) = std::thread::scope(|scope| {
            let hu = scope.spawn(|| stepper_u.advance(u.clone(), count));
            let rw = stepper_w.advance(w.clone(), count);
            (hu.join().expect("u thread panicked"), rw)
        });
        let abort = match (res_u, res_w) {
            (Ok(nu_state), Ok(nw_state)) => {
                u = nu_state;
                w = nw_state;
                step = target;
                let abort = stepper_u
                    .check_cfl(&u)
                    .and_then(|_| stepper_w.check_cfl(&w))
                    .err();
                let (ru, rw, rp) = record_all(&u, &w, &mut rec_u, &mut rec_w)?;
                u_records.push(ru);
                w_records.push(rw);
                phi_records.push(rp);
                abort
            }
            (Err(r), _) | (_, Err(r)) => Some(r),
        };
        if let Some(reason) = abort {
            return Ok(PairOutcome {
                u_records,
                w_records,
                phi_records,
                final_u: u,
                final_w: w,
                status: RunStatus::Aborted(reason),
            });
        }
    }
    Ok(PairOutcome {
        u_records,
        w_records,
        phi_records,
        final_u: u,
        final_w: w,
        status: RunStatus::Completed,
    })
}
