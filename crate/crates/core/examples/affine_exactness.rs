//! DN coupling of two affine maps. IQN-ILS hits the fixed point of an
//! m-dimensional affine problem within m + 2 iterations, whatever the
//! spectral radius of the composed map; plain iteration needs it below one.
//!
//! cargo run --example affine_exactness

use partitioned_fsi::accel::UpdateStrategy;
use partitioned_fsi::densela::{HouseholderQr, Matrix};
use partitioned_fsi::models::AffineProblem;
use partitioned_fsi::schemes::{run_simulation, ConvergenceConfig, Scheme, SimulationSettings};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `A_f = Q`, `A_s = Q D Q^T Q^T`, so the composed map `A_s A_f = Q D Q^T`
/// has spectral radius `max |D|`.
fn problem(m: usize, radius: f64, rng: &mut ChaCha8Rng) -> AffineProblem {
    let mut g = Matrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            g[(i, j)] = rng.gen_range(-1.0..1.0);
        }
    }
    let qr = HouseholderQr::new(&g).unwrap();
    let cols: Vec<Vec<f64>> = (0..m)
        .map(|j| {
            let mut e = vec![0.0; m];
            e[j] = 1.0;
            qr.apply_q(&mut e);
            e
        })
        .collect();
    let q = Matrix::from_columns(m, &cols).unwrap();
    let mut d = Matrix::zeros(m, m);
    for i in 0..m {
        d[(i, i)] = radius * rng.gen_range(-1.0..1.0);
    }
    d[(0, 0)] = radius;
    let qt = Matrix::from_rows(&cols).unwrap();
    let a_s = q.mul(&d).unwrap().mul(&qt).unwrap().mul(&qt).unwrap();
    let b = |rng: &mut ChaCha8Rng| (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
    AffineProblem::new(a_s, q, b(rng), b(rng)).unwrap()
}

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let convergence = ConvergenceConfig {
        eps_coupling: 1e-13,
        ..Default::default()
    };
    let settings = SimulationSettings {
        scheme: Scheme::DnQnS,
        robin_parameter: None,
        convergence,
        n_steps: 1,
        dt: 1.0,
        sample_stride: 0,
        keep_iterates_steps: 0,
    };
    println!("{:>3} {:>6} {:>16} {:>16}", "m", "radius", "ils |R| <= 1e-12", "plain iteration");
    for (m, radius) in [(2, 0.5), (5, 0.9), (5, 1.3), (8, 1.5)] {
        let mut p = problem(m, radius, &mut rng);
        let ils = run_simulation(&mut p, &UpdateStrategy::ils(), &settings).unwrap();
        let mut p = problem(m, radius, &mut rng);
        let plain = SimulationSettings {
            scheme: Scheme::Dn,
            convergence: ConvergenceConfig {
                max_coupling_iterations: 2000,
                ..convergence
            },
            ..settings
        };
        let none = run_simulation(&mut p, &UpdateStrategy::None, &plain).unwrap();
        let hit = ils.steps[0]
            .records
            .iter()
            .find(|r| r.residual_norm <= 1e-12)
            .map(|r| format!("k = {}", r.k))
            .unwrap_or_else(|| "never".into());
        println!("{m:>3} {radius:>6.2} {hit:>16} {:>16}", none.termination.label());
    }
}
