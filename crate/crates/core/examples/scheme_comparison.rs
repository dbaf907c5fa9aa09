//! Open tube under DN-QN(S), DN-QN(F) and RN-QN. Both DN variants settle on
//! the same interface state; RN-QN needs fewer iterations.
//!
//! cargo run --release --example scheme_comparison

use partitioned_fsi::config::{ProblemConfig, RunConfig};
use partitioned_fsi::densela::norm2;
use partitioned_fsi::models::TubeConfig;
use partitioned_fsi::report::summary_string;
use partitioned_fsi::schemes::Scheme;
use partitioned_fsi::sweep::{default_workers, run_all};

fn main() -> partitioned_fsi::Result<()> {
    let config = |scheme, robin| {
        let mut c = RunConfig::new(ProblemConfig::TubeOpen(TubeConfig::default()), scheme);
        c.robin_parameter = robin;
        c.sample_stride = 1;
        c
    };
    let runs = run_all(
        vec![
            config(Scheme::DnQnS, None),
            config(Scheme::DnQnF, None),
            config(Scheme::RnQn, Some(1e4)),
            config(Scheme::RnQn, Some(1e5)),
        ],
        default_workers(),
    )?;
    print!("{}", summary_string(&runs)?);

    let worst = runs[0]
        .result
        .trajectory
        .iter()
        .zip(&runs[1].result.trajectory)
        .map(|(a, b)| {
            let diff: Vec<f64> = a.displacement.iter().zip(&b.displacement).map(|(x, y)| x - y).collect();
            norm2(&diff) / norm2(&a.displacement).max(f64::MIN_POSITIVE)
        })
        .fold(0.0, f64::max);
    println!("largest relative gap between the DN variants: {worst:.2e}");
    Ok(())
}
