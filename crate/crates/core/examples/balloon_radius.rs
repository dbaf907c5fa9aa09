//! The balloon radius against its closed form under sinusoidal inflow. The
//! error at t = 1 halves with the time step.
//!
//! cargo run --release --example balloon_radius

use partitioned_fsi::accel::UpdateStrategy;
use partitioned_fsi::metrics::analytic_balloon_radius_sine;
use partitioned_fsi::models::{BalloonConfig, BalloonProblem};
use partitioned_fsi::schemes::{run_simulation, ConvergenceConfig, Scheme, SimulationSettings};

fn main() -> partitioned_fsi::Result<()> {
    let config = BalloonConfig::default();
    let exact = analytic_balloon_radius_sine(1.0, config.r0, config.inflow_amplitude)?;
    let mut previous: Option<f64> = None;
    println!("R(1) exact = {exact:.8} m");
    for dt in [0.02, 0.01, 0.005, 0.0025] {
        let mut balloon = BalloonProblem::new(config.clone())?;
        let settings = SimulationSettings {
            scheme: Scheme::RnQn,
            robin_parameter: Some(1e5),
            convergence: ConvergenceConfig::default(),
            n_steps: (1.0 / dt as f64).round() as usize,
            dt,
            sample_stride: 0,
            keep_iterates_steps: 0,
        };
        run_simulation(&mut balloon, &UpdateStrategy::imvls(), &settings)?;
        let err = (balloon.radius() - exact).abs() / exact;
        match previous {
            Some(p) => println!("dt = {dt:<7} relative error {err:.3e}  ratio {:.2}", p / err),
            None => println!("dt = {dt:<7} relative error {err:.3e}"),
        }
        previous = Some(err);
    }
    Ok(())
}
