//! A pressure pulse travelling through the open flexible tube, coupled with
//! RN-QN. Prints the wall displacement and pressure along the tube at a few
//! instants.
//!
//! cargo run --release --example tube_pressure_wave

use partitioned_fsi::accel::UpdateStrategy;
use partitioned_fsi::models::{Outlet, TubeConfig, TubeProblem};
use partitioned_fsi::schemes::{run_simulation, ConvergenceConfig, Scheme, SimulationSettings};

fn main() -> partitioned_fsi::Result<()> {
    let config = TubeConfig::default();
    let mut tube = TubeProblem::new(config.clone(), Outlet::Open, 1e-10)?;
    let settings = SimulationSettings {
        scheme: Scheme::RnQn,
        robin_parameter: Some(1e5),
        convergence: ConvergenceConfig::default(),
        n_steps: 200,
        dt: 2.5e-5,
        sample_stride: 40,
        keep_iterates_steps: 0,
    };
    let result = run_simulation(&mut tube, &UpdateStrategy::imvls(), &settings)?;
    println!(
        "{} after {} steps, {:.2} iterations per step, worst mass defect {:.1e}",
        result.termination.label(),
        result.iterations.per_step.len(),
        result.iterations.mean,
        result.mass_audit.iter().cloned().fold(0.0, f64::max)
    );
    let every = (config.cells / 5).max(1);
    for s in &result.trajectory {
        let w: Vec<String> = s.displacement.iter().step_by(every).map(|w| format!("{:+.2e}", w)).collect();
        let p: Vec<String> = s.traction.iter().step_by(every).map(|p| format!("{:+.0}", p)).collect();
        println!("t = {:.5} s", s.time);
        println!("  w [m]  {}", w.join(" "));
        println!("  p [Pa] {}", p.join(" "));
    }
    Ok(())
}
