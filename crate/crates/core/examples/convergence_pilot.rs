//! Pilot for the temporal-order study: self-convergence ratios of the
//! integrating-factor RK4 on a perturbed Taylor-Green state.

use csmlab_core::flow::{taylor_green, ForcingSpec, Model, ModelParams, SimState};
use csmlab_core::integrate::Stepper;
use csmlab_core::velocity::seeded_solenoidal_with_l2;
use csmlab_core::WavenumberGrid;

fn advance(stepper: &Stepper, mut s: SimState, steps: u64) -> SimState {
    for _ in 0..steps {
        s = stepper.step(&s).unwrap();
    }
    s
}

fn main() {
    let pi = std::f64::consts::PI;
    let t_end = 1.0;

    for (n, pert_l2, band) in [
        (32usize, 20.0, 64u32),
        (32, 12.0, 64),
        (64, 20.0, 16),
    ] {
        let grid = WavenumberGrid::new(n, 2.0 * pi).unwrap();
        let params = ModelParams::defaults_for(n, grid.length());
        let mut v = taylor_green(&grid, 0.0, params.nu);
        let p = seeded_solenoidal_with_l2(&grid, 2024, 1, band, pert_l2).unwrap();
        v.axpy(1.0, &p);
        let state0 = SimState::initial(v);
        let speed = state0.velocity.max_speed().unwrap();
        let cfl_limit = 0.5 * grid.spacing() / speed;
        println!(
            "n = {n}, pert L2 = {pert_l2}, band |m|^2 <= {band}: max speed = {speed:.3}, cfl dt limit = {cfl_limit:.4e}"
        );

        let dt_ref = 5e-4 / 8.0;
        let stepper = Stepper::new(grid.clone(), Model::Nse, params, ForcingSpec::Zero, dt_ref);
        let reference = advance(&stepper, state0.clone(), (t_end / dt_ref).round() as u64);

        let mut errs = Vec::new();
        for dt in [4e-3, 2e-3, 1e-3, 5e-4] {
            let stepper = Stepper::new(grid.clone(), Model::Nse, params, ForcingSpec::Zero, dt);
            let s = advance(&stepper, state0.clone(), (t_end / dt).round() as u64);
            let err = s.velocity.sub(&reference.velocity).l2_norm_sq().sqrt();
            errs.push(err);
            println!("  dt = {dt:.4e}: L2 error vs reference = {err:.6e}");
        }
        for i in 0..errs.len() - 1 {
            println!("  ratio {}: {:.3}", i, errs[i] / errs[i + 1]);
        }
    }
}
