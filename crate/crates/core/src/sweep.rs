//! Parameter sweeps: one independent run per value of a single axis,
//! executed on a bounded worker pool. Reports come back in value order.

use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::accel::UpdateStrategy;
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::report::RunReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    RobinParameter,
    Update,
    Omega,
    /// Keeps the end time of the base config fixed.
    Dt,
}

impl SweepAxis {
    pub const ALL: [SweepAxis; 4] = [
        SweepAxis::RobinParameter,
        SweepAxis::Update,
        SweepAxis::Omega,
        SweepAxis::Dt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::RobinParameter => "robin_parameter",
            SweepAxis::Update => "update",
            SweepAxis::Omega => "omega",
            SweepAxis::Dt => "dt",
        }
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SweepAxis::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::config("axis", format!("unknown sweep axis `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub axis: SweepAxis,
    pub values: Vec<String>,
    pub runs: Vec<RunReport>,
}

impl SweepReport {
    pub fn all_completed(&self) -> bool {
        self.runs.iter().all(RunReport::completed)
    }
}

/// Splits a comma-separated value list, dropping blanks.
pub fn split_values(list: &str) -> Vec<String> {
    list.split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(String::from)
        .collect()
}

fn number(value: &str, index: usize) -> Result<f64> {
    value
        .parse::<f64>()
        .map_err(|_| Error::config(format!("values[{index}]"), format!("`{value}` is not a number")))
}

/// The config for one sweep value, validated.
pub fn derive_config(base: &RunConfig, axis: SweepAxis, value: &str, index: usize) -> Result<RunConfig> {
    let mut c = base.clone();
    let at = |e: Error| match e {
        Error::Config { path, reason } => Error::config(
            format!("values[{index}]"),
            format!("{} = {value}: {path}: {reason}", axis.name()),
        ),
        other => other,
    };
    match axis {
        SweepAxis::RobinParameter => c.robin_parameter = Some(number(value, index)?),
        SweepAxis::Update => {
            let update = UpdateStrategy::from_name(value).ok_or_else(|| {
                Error::config(format!("values[{index}]"), format!("unknown update `{value}`"))
            })?;
            // the base first-iteration factor carries over
            let omega = base.update_strategy().omega();
            c.update = Some(match omega {
                Some(w) if update.omega().is_some() => update.with_omega(w).unwrap_or(update),
                _ => update,
            });
        }
        SweepAxis::Omega => {
            let w = number(value, index)?;
            c.update = Some(base.update_strategy().with_omega(w).ok_or_else(|| {
                Error::config("axis", "omega sweep needs an update with a relaxation factor")
            })?);
        }
        SweepAxis::Dt => {
            let dt = number(value, index)?;
            let (dt0, n0) = base.time_grid();
            let steps = (dt0 * n0 as f64 / dt).round();
            if !(dt > 0.0) || !(steps >= 1.0) {
                return Err(Error::config(format!("values[{index}]"), format!("dt {value} is invalid")));
            }
            c.dt = Some(dt);
            c.n_steps = Some(steps as usize);
        }
    }
    c.validate().map_err(at)?;
    Ok(c)
}

/// Runs `f` on every item with at most `workers` threads, returning results
/// in input order.
pub fn parallel_map<T: Sync, R: Send>(items: &[T], workers: usize, f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let workers = workers.clamp(1, items.len().max(1));
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<R>>> = items.iter().map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(item) = items.get(i) else { break };
                let out = f(item);
                *slots[i].lock().expect("result slot poisoned") = Some(out);
            });
        }
    });
    slots
        .into_iter()
        .map(|s| s.into_inner().expect("result slot poisoned").expect("every item is processed"))
        .collect()
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Runs every config, failed runs included, keeping input order.
pub fn run_all(configs: Vec<RunConfig>, workers: usize) -> Result<Vec<RunReport>> {
    parallel_map(&configs, workers, |c| c.run())
        .into_iter()
        .zip(configs.iter())
        .map(|(result, config)| {
            Ok(RunReport {
                config: config.clone(),
                result: result?,
            })
        })
        .collect()
}

/// One run per value along `axis`. Every derived config is validated before
/// any run starts.
pub fn run_sweep(base: &RunConfig, axis: SweepAxis, values: &[String], workers: usize) -> Result<SweepReport> {
    if values.is_empty() {
        return Err(Error::config("values", "a sweep needs at least one value"));
    }
    let configs = values
        .iter()
        .enumerate()
        .map(|(i, v)| derive_config(base, axis, v, i))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepReport {
        axis,
        values: values.to_vec(),
        runs: run_all(configs, workers)?,
    })
}
