mod common;

use common::balloon_radius_exact;
use partitioned_fsi::accel::UpdateStrategy;
use partitioned_fsi::models::{BalloonConfig, BalloonProblem};
use partitioned_fsi::schemes::{
    run_simulation, ConvergenceConfig, Scheme, SimulationResult, SimulationSettings,
};

fn run(scheme: Scheme, update: UpdateStrategy, alpha: f64, dt: f64, t_end: f64) -> (SimulationResult, f64) {
    let mut p = BalloonProblem::new(BalloonConfig::default()).unwrap();
    let settings = SimulationSettings {
        scheme,
        robin_parameter: Some(alpha),
        convergence: ConvergenceConfig::default(),
        n_steps: (t_end / dt).round() as usize,
        dt,
        sample_stride: 0,
        keep_iterates_steps: 0,
    };
    let r = run_simulation(&mut p, &update, &settings).unwrap();
    (r, p.radius())
}

#[test]
fn artificial_flux_scales_inversely_with_alpha() {
    let eps: Vec<f64> = [1e4, 1e5, 1e6]
        .iter()
        .map(|&a| run(Scheme::RnQn, UpdateStrategy::imvls(), a, 0.01, 1.0).0.eps_rel)
        .collect();
    for w in eps.windows(2) {
        let ratio = w[0] / w[1];
        assert!((ratio - 10.0).abs() < 0.5, "ratio {ratio}");
    }
}

#[test]
fn radius_tracks_volume_balance() {
    let exact = balloon_radius_exact(1.0, 0.28, 0.05 * std::f64::consts::PI);
    let err = |dt| (run(Scheme::RnQn, UpdateStrategy::imvls(), 1e5, dt, 1.0).1 - exact).abs() / exact;
    let (coarse, fine) = (err(0.01), err(0.005));
    assert!(coarse < 0.01);
    assert!((1.6..=2.4).contains(&(coarse / fine)), "{coarse} {fine}");
}

#[test]
fn every_update_converges_to_the_same_radius() {
    let radii: Vec<f64> = [UpdateStrategy::aitken(), UpdateStrategy::ils(), UpdateStrategy::imvls()]
        .into_iter()
        .map(|u| run(Scheme::RnQn, u, 1e5, 0.01, 0.5).1)
        .collect();
    for r in &radii {
        assert!((r - radii[0]).abs() < 1e-8 * radii[0]);
    }
}

#[test]
fn plain_robin_needs_small_alpha() {
    let (low, _) = run(Scheme::Rn, UpdateStrategy::None, 1e3, 0.01, 0.3);
    assert!(low.termination.is_completed());
    let (high, _) = run(Scheme::Rn, UpdateStrategy::None, 1e6, 0.01, 0.3);
    assert!(!high.termination.is_completed());
}
