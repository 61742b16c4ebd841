//! One-off instrumentation runs that fix the regression fixtures and the
//! achievable oracle tolerances before they are frozen into tests.

use std::time::Instant;

use csmlab_core::field::SpectralField;
use csmlab_core::flow::{
    csm_diffusion_term, ForcingSpec, Model, ModelParams, SimState,
};
use csmlab_core::integrate::{
    run_pair, InitialCondition, PerturbationSpec, RunConfig,
};
use csmlab_core::monitors::{monitor_theorem2, monitor_theorem3, DECAY_THRESHOLD};
use csmlab_core::velocity::VelocityField;
use csmlab_core::WavenumberGrid;

const PI: f64 = std::f64::consts::PI;

fn base_config(model: Model, cs: f64, nu: f64, t_end: f64, forcing: ForcingSpec) -> RunConfig {
    let n = 64;
    let length = 2.0 * PI;
    let mut params = ModelParams::defaults_for(n, length);
    params.cs = cs;
    params.nu = nu;
    RunConfig {
        model,
        n,
        length,
        dt: 2e-3,
        t_end,
        record_every: 10,
        params,
        forcing,
        initial_condition: InitialCondition::TaylorGreen,
    }
}

fn closure_fd_oracle() {
    // v = (sin y, 0), cs = delta = 1: x-component of the closure is
    // d/dy(|cos y| cos y); oracle = 8th-order centered differences of the
    // analytic flux on the same n = 256 grid.
    let n = 256usize;
    let grid = WavenumberGrid::new(n, 2.0 * PI).unwrap();
    let mut ux = vec![0.0; n * n];
    for iy in 0..n {
        let y = 2.0 * PI * iy as f64 / n as f64;
        for ix in 0..n {
            ux[iy * n + ix] = y.sin();
        }
    }
    let v = VelocityField::new(
        SpectralField::from_physical(grid.clone(), &ux).unwrap(),
        SpectralField::zeros(grid.clone()),
    )
    .unwrap();
    let mut params = ModelParams::defaults_for(n, grid.length());
    params.cs = 1.0;
    params.delta = 1.0;
    let term = csm_diffusion_term(&v, &params).unwrap();
    let tx = term.x.to_physical().unwrap();
    let ty = term.y.to_physical().unwrap();

    // flux g(y) = |cos y| cos y sampled analytically
    let h = 2.0 * PI / n as f64;
    let flux: Vec<f64> = (0..n)
        .map(|iy| {
            let y = 2.0 * PI * iy as f64 / n as f64;
            y.cos().abs() * y.cos()
        })
        .collect();
    // 8th-order centered first derivative
    let c = [4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0];
    let d_flux: Vec<f64> = (0..n)
        .map(|i| {
            let g = |o: i64| flux[((i as i64 + o).rem_euclid(n as i64)) as usize];
            (c[0] * (g(1) - g(-1)) + c[1] * (g(2) - g(-2)) + c[2] * (g(3) - g(-3)) + c[3] * (g(4) - g(-4))) / h
        })
        .collect();

    let mut num = 0.0;
    let mut den = 0.0;
    let mut max_err = 0.0f64;
    let mut max_ref = 0.0f64;
    for iy in 0..n {
        for ix in 0..n {
            let e = tx[iy * n + ix] - d_flux[iy];
            num += e * e;
            den += d_flux[iy] * d_flux[iy];
            max_err = max_err.max(e.abs());
            max_ref = max_ref.max(d_flux[iy].abs());
        }
    }
    let ty_max = ty.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    println!("closure FD oracle (n=256):");
    println!("  rel L2 error   = {:.4e}", (num / den).sqrt());
    println!("  rel max error  = {:.4e}", max_err / max_ref);
    println!("  y-component max = {ty_max:.4e}");
}

fn pair_pilot(label: &str, cs: f64, nu: f64, t_end: f64, forcing: ForcingSpec, pert: PerturbationSpec) {
    let start = Instant::now();
    let cfg_u = base_config(Model::Nse, cs, nu, t_end, forcing.clone());
    let cfg_w = base_config(Model::Csm, cs, nu, t_end, forcing);
    let out = run_pair(&cfg_u, &cfg_w, &pert).unwrap();
    assert!(out.status.completed(), "pilot aborted: {:?}", out.status);
    let t2 = monitor_theorem2(&out.phi_records).unwrap();
    let t3 = monitor_theorem3(&out.phi_records, nu, DECAY_THRESHOLD).unwrap();
    let max_phi = out
        .phi_records
        .iter()
        .map(|r| r.phi_l2_sq)
        .fold(0.0f64, f64::max)
        .sqrt();
    let end_phi = out.phi_records.last().unwrap().phi_l2_sq.sqrt();
    println!("pair pilot [{label}] (cs={cs}, nu={nu}, T={t_end}):");
    println!("  theorem2: pass={} C={:?}", t2.pass, t2.fitted_constants.get("C"));
    println!(
        "  theorem3: pass={} C1={:?} C2={:?} C2_nu={:?} lambda={:?} reason={:?}",
        t3.pass,
        t3.fitted_constants.get("C1"),
        t3.fitted_constants.get("C2"),
        t3.fitted_constants.get("C2_nu"),
        t3.decay_rate,
        t3.reason
    );
    println!(
        "  max ||phi|| = {max_phi:.6e}, ||phi(T)|| = {end_phi:.6e}, ratio = {:.4}",
        end_phi / max_phi.max(1e-300)
    );
    println!("  wall time {:?}", start.elapsed());
}

fn main() {
    closure_fd_oracle();

    // same-equation contraction, fitted C should be <= 1
    pair_pilot(
        "cs=0 contraction",
        0.0,
        0.1,
        10.0,
        ForcingSpec::Zero,
        PerturbationSpec::default(),
    );

    // closure on: fixture for the theorem-2 constant and the drift ceiling
    pair_pilot(
        "cs=0.17 drift",
        0.17,
        0.1,
        10.0,
        ForcingSpec::Zero,
        PerturbationSpec::default(),
    );

    // decay study horizon
    pair_pilot(
        "decay T=40",
        0.17,
        0.1,
        40.0,
        ForcingSpec::Zero,
        PerturbationSpec::default(),
    );

    // pure-shell perturbation: lambda should approach 4 nu (squared-norm rate)
    pair_pilot(
        "shell-2 lambda",
        0.0,
        0.1,
        40.0,
        ForcingSpec::Zero,
        PerturbationSpec { seed: 7, epsilon: 1e-3, min_msq: 2, max_msq: 2 },
    );

    // forced pairs across nu: the C2 fixture
    for nu in [0.05, 0.1, 0.2] {
        pair_pilot(
            "forced sweep",
            0.17,
            nu,
            10.0,
            ForcingSpec::SteadyBandLimited { amplitude: 0.1, active_modes: ForcingSpec::default_modes() },
            PerturbationSpec::default(),
        );
    }
}
