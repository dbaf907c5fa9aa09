//! Robin parameter sweep on the balloon. Plain RN stalls or blows up as
//! alpha grows, while RN-QN stays at a handful of iterations and the
//! artificial flux falls like 1/alpha.
//!
//! cargo run --release --example balloon_robin_sweep

use partitioned_fsi::accel::UpdateStrategy;
use partitioned_fsi::config::{ProblemConfig, RunConfig};
use partitioned_fsi::models::BalloonConfig;
use partitioned_fsi::report::summary_string;
use partitioned_fsi::schemes::Scheme;
use partitioned_fsi::sweep::{default_workers, run_sweep, SweepAxis};

fn main() -> partitioned_fsi::Result<()> {
    let alphas: Vec<String> = ["1e3", "1e4", "1e5", "1e6", "1e7"].map(String::from).to_vec();
    let mut base = RunConfig::new(ProblemConfig::Balloon(BalloonConfig::default()), Scheme::Rn);
    base.robin_parameter = Some(1e5);
    base.n_steps = Some(100);

    let plain = run_sweep(&base, SweepAxis::RobinParameter, &alphas, default_workers())?;
    base.scheme = Scheme::RnQn;
    base.update = Some(UpdateStrategy::imvls());
    let qn = run_sweep(&base, SweepAxis::RobinParameter, &alphas, default_workers())?;

    print!("{}", summary_string(&[plain.runs, qn.runs].concat())?);
    Ok(())
}
