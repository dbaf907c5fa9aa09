//! Aitken, IQN-ILS and IQN-IMVLS on the closed tube with RN coupling.
//! Reusing past time steps makes IMVLS the cheapest.
//!
//! cargo run --release --example update_comparison

use partitioned_fsi::config::{ProblemConfig, RunConfig};
use partitioned_fsi::models::TubeConfig;
use partitioned_fsi::report::summary_string;
use partitioned_fsi::schemes::Scheme;
use partitioned_fsi::sweep::{default_workers, run_sweep, SweepAxis};

fn main() -> partitioned_fsi::Result<()> {
    let updates: Vec<String> = ["aitken", "ils", "imvls"].map(String::from).to_vec();
    let mut reports = Vec::new();
    for alpha in [1e5, 1e6, 1e7] {
        let mut base = RunConfig::new(ProblemConfig::TubeClosed(TubeConfig::default()), Scheme::RnQn);
        base.robin_parameter = Some(alpha);
        base.sample_stride = 0;
        reports.extend(run_sweep(&base, SweepAxis::Update, &updates, default_workers())?.runs);
    }
    print!("{}", summary_string(&reports)?);
    Ok(())
}
