//! Quick wall-clock probe for one NSE and one CSM step at n = 64.

use std::time::Instant;

use csmlab_core::flow::{taylor_green, ForcingSpec, Model, ModelParams};
use csmlab_core::integrate::Stepper;
use csmlab_core::WavenumberGrid;

fn main() {
    let grid = WavenumberGrid::new(64, 2.0 * std::f64::consts::PI).unwrap();
    let params = ModelParams::defaults_for(64, grid.length());
    let tg = taylor_green(&grid, 0.0, params.nu);
    let state = csmlab_core::flow::SimState::initial(tg);

    for (name, model) in [("NSE", Model::Nse), ("CSM", Model::Csm)] {
        let stepper = Stepper::new(grid.clone(), model, params, ForcingSpec::Zero, 1e-3);
        let mut s = state.clone();
        let start = Instant::now();
        let steps = 200;
        for _ in 0..steps {
            s = stepper.step(&s).unwrap();
        }
        let dt = start.elapsed();
        println!("{name}: {:?} per step", dt / steps);
    }
}
