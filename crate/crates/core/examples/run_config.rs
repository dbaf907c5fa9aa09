//! Runs a JSON config and writes `summary.csv` and `report.json`, the same
//! as `partitioned-fsi run`.
//!
//! cargo run --release --example run_config -- examples/configs/balloon_rn_qn.json out/balloon

use std::path::PathBuf;

use partitioned_fsi::config::RunConfig;
use partitioned_fsi::report::{summary_string, write_outputs, RunReport};

fn main() -> partitioned_fsi::Result<()> {
    let mut args = std::env::args().skip(1);
    let path = args.next().unwrap_or_else(|| {
        concat!(env!("CARGO_MANIFEST_DIR"), "/examples/configs/balloon_rn_qn.json").to_string()
    });
    let out = args.next().map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("partitioned-fsi"));

    let config = RunConfig::from_file(&path)?;
    let result = config.run()?;
    let reports = [RunReport { config, result }];
    let files = write_outputs(&reports, &out)?;
    print!("{}", summary_string(&reports)?);
    println!("full report in {}", files.report.display());
    Ok(())
}
