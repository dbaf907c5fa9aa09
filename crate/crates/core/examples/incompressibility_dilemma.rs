//! Enclosed fluids cannot take prescribed wall motion: every DN variant
//! stops at the first step, while RN-QN runs through.
//!
//! cargo run --release --example incompressibility_dilemma

use partitioned_fsi::accel::UpdateStrategy;
use partitioned_fsi::models::{BalloonConfig, BalloonProblem, Outlet, TubeConfig, TubeProblem};
use partitioned_fsi::schemes::{
    run_simulation, ConvergenceConfig, CoupledProblem, Scheme, SimulationSettings,
};

fn problems() -> Vec<(Box<dyn CoupledProblem>, f64, usize)> {
    vec![
        (Box::new(BalloonProblem::new(BalloonConfig::default()).unwrap()), 0.01, 100),
        (
            Box::new(TubeProblem::new(TubeConfig::default(), Outlet::Closed, 1e-10).unwrap()),
            2.5e-5,
            100,
        ),
    ]
}

fn main() -> partitioned_fsi::Result<()> {
    for scheme in [Scheme::Dn, Scheme::DnQnS, Scheme::DnQnF, Scheme::RnQn] {
        for (mut problem, dt, n_steps) in problems() {
            let (update, robin) = match scheme {
                Scheme::Dn => (UpdateStrategy::aitken(), None),
                Scheme::RnQn => (UpdateStrategy::imvls(), Some(1e5)),
                _ => (UpdateStrategy::imvls(), None),
            };
            let settings = SimulationSettings {
                scheme,
                robin_parameter: robin,
                convergence: ConvergenceConfig::default(),
                n_steps,
                dt,
                sample_stride: 0,
                keep_iterates_steps: 0,
            };
            let r = run_simulation(problem.as_mut(), &update, &settings)?;
            println!(
                "{:<14} {:<8} {:<10} {}",
                r.problem,
                scheme.name(),
                r.termination.label(),
                r.failure.unwrap_or_default()
            );
        }
    }
    Ok(())
}
