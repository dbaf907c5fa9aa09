//! JSON run configuration.
//!
//! A config names a test problem with its model parameters, a coupling
//! scheme with its update strategy and the time-stepping controls. Unknown
//! keys are rejected, and every error carries the key path it refers to.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::accel::UpdateStrategy;
use crate::densela::Matrix;
use crate::error::{Error, Result};
use crate::models::{AffineProblem, BalloonConfig, BalloonProblem, Outlet, TubeConfig, TubeProblem};
use crate::schemes::{
    run_simulation, ConvergenceConfig, CoupledProblem, Scheme, SimulationResult,
    SimulationSettings,
};

/// Dense affine maps given row by row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AffineConfig {
    pub a_s: Vec<Vec<f64>>,
    pub a_f: Vec<Vec<f64>>,
    pub b_s: Vec<f64>,
    pub b_f: Vec<f64>,
}

impl AffineConfig {
    pub fn build(&self) -> Result<AffineProblem> {
        AffineProblem::new(
            Matrix::from_rows(&self.a_s)?,
            Matrix::from_rows(&self.a_f)?,
            self.b_s.clone(),
            self.b_f.clone(),
        )
    }
}

/// Test problem with its model parameters, tagged by `kind`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum ProblemConfig {
    #[serde(rename = "affine")]
    Affine(AffineConfig),
    #[serde(rename = "balloon0d")]
    Balloon(BalloonConfig),
    #[serde(rename = "tube1d_open")]
    TubeOpen(TubeConfig),
    #[serde(rename = "tube1d_closed")]
    TubeClosed(TubeConfig),
}

impl ProblemConfig {
    pub fn name(&self) -> &'static str {
        match self {
            ProblemConfig::Affine(_) => "affine",
            ProblemConfig::Balloon(_) => "balloon0d",
            ProblemConfig::TubeOpen(_) => "tube1d_open",
            ProblemConfig::TubeClosed(_) => "tube1d_closed",
        }
    }

    /// `(dt, n_steps)` used when the config leaves them out.
    pub fn default_time_grid(&self) -> (f64, usize) {
        match self {
            ProblemConfig::Affine(_) => (1.0, 1),
            ProblemConfig::Balloon(_) => (0.01, 500),
            ProblemConfig::TubeOpen(_) | ProblemConfig::TubeClosed(_) => (2.5e-5, 300),
        }
    }

    pub fn build(&self, eps_problem: f64) -> Result<Box<dyn CoupledProblem>> {
        Ok(match self {
            ProblemConfig::Affine(c) => Box::new(c.build()?),
            ProblemConfig::Balloon(c) => Box::new(BalloonProblem::new(c.clone())?),
            ProblemConfig::TubeOpen(c) => Box::new(TubeProblem::new(c.clone(), Outlet::Open, eps_problem)?),
            ProblemConfig::TubeClosed(c) => {
                Box::new(TubeProblem::new(c.clone(), Outlet::Closed, eps_problem)?)
            }
        })
    }
}

fn default_eps_coupling() -> f64 {
    ConvergenceConfig::default().eps_coupling
}

fn default_eps_problem() -> f64 {
    ConvergenceConfig::default().eps_problem
}

fn default_max_iterations() -> usize {
    ConvergenceConfig::default().max_coupling_iterations
}

fn default_stride() -> usize {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemConfig,
    pub scheme: Scheme,
    /// Missing means `none` for `dn`/`rn` and IMVLS with defaults otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub update: Option<UpdateStrategy>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub robin_parameter: Option<f64>,
    #[serde(default = "default_eps_coupling")]
    pub eps_coupling: f64,
    #[serde(default = "default_eps_problem")]
    pub eps_problem: f64,
    #[serde(default = "default_max_iterations")]
    pub max_coupling_iterations: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_steps: Option<usize>,
    /// Trajectory sampling stride in steps; 0 disables sampling.
    #[serde(default = "default_stride")]
    pub sample_stride: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_path: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(problem: ProblemConfig, scheme: Scheme) -> Self {
        RunConfig {
            problem,
            scheme,
            update: None,
            robin_parameter: None,
            eps_coupling: default_eps_coupling(),
            eps_problem: default_eps_problem(),
            max_coupling_iterations: default_max_iterations(),
            dt: None,
            n_steps: None,
            sample_stride: default_stride(),
            output_path: None,
        }
    }

    /// Parses and validates one JSON document.
    pub fn parse(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let config: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::config(path, e.into_inner().to_string())
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_file(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::config(".", e.to_string()))
    }

    pub fn update_strategy(&self) -> UpdateStrategy {
        self.update.clone().unwrap_or(match self.scheme {
            Scheme::Dn | Scheme::Rn => UpdateStrategy::None,
            _ => UpdateStrategy::imvls(),
        })
    }

    pub fn time_grid(&self) -> (f64, usize) {
        let (dt, n) = self.problem.default_time_grid();
        (self.dt.unwrap_or(dt), self.n_steps.unwrap_or(n))
    }

    pub fn convergence(&self) -> ConvergenceConfig {
        ConvergenceConfig {
            eps_coupling: self.eps_coupling,
            eps_problem: self.eps_problem,
            max_coupling_iterations: self.max_coupling_iterations,
        }
    }

    pub fn settings(&self) -> SimulationSettings {
        let (dt, n_steps) = self.time_grid();
        SimulationSettings {
            scheme: self.scheme,
            robin_parameter: self.robin_parameter,
            convergence: self.convergence(),
            n_steps,
            dt,
            sample_stride: self.sample_stride,
            keep_iterates_steps: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (dt, n_steps) = self.time_grid();
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::config("dt", format!("must be positive, got {dt}")));
        }
        if n_steps == 0 {
            return Err(Error::config("n_steps", "must be at least 1"));
        }
        if !(self.eps_coupling > 0.0) {
            return Err(Error::config("eps_coupling", "must be positive"));
        }
        if !(self.eps_problem > 0.0) {
            return Err(Error::config("eps_problem", "must be positive"));
        }
        if self.max_coupling_iterations == 0 {
            return Err(Error::config("max_coupling_iterations", "must be at least 1"));
        }
        let update = self.update_strategy();
        update
            .validate()
            .map_err(|e| Error::config("update", e.to_string()))?;
        self.scheme.check_compatible(&update, self.robin_parameter)?;
        self.problem
            .build(self.eps_problem)
            .map_err(|e| Error::config("problem", e.to_string()))?;
        Ok(())
    }

    /// Builds the problem and runs it to the end or to its first failure.
    pub fn run(&self) -> Result<SimulationResult> {
        self.validate()?;
        let mut problem = self.problem.build(self.eps_problem)?;
        run_simulation(problem.as_mut(), &self.update_strategy(), &self.settings())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "problem": {"kind": "balloon0d"},
        "scheme": "rn_qn",
        "update": {"kind": "imvls"},
        "robin_parameter": 1e5
    }"#;

    fn config_path(text: &str) -> String {
        match RunConfig::parse(text).unwrap_err() {
            Error::Config { path, .. } => path,
            other => panic!("expected a config error, got {other}"),
        }
    }

    #[test]
    fn minimal_balloon_gets_defaults() {
        let c = RunConfig::parse(MINIMAL).unwrap();
        assert_eq!(c.problem, ProblemConfig::Balloon(BalloonConfig::default()));
        assert_eq!(
            c.update_strategy(),
            UpdateStrategy::Imvls {
                omega0: 0.1,
                eps_filter: 1e-8,
                max_blocks: 8
            }
        );
        assert_eq!(c.time_grid(), (0.01, 500));
        assert_eq!(c.convergence(), ConvergenceConfig::default());
    }

    #[test]
    fn rn_without_robin_parameter() {
        let text = r#"{"problem": {"kind": "balloon0d"}, "scheme": "rn"}"#;
        assert_eq!(config_path(text), "robin_parameter");
    }

    #[test]
    fn negative_dt() {
        let text = MINIMAL.replace("\"robin_parameter\"", "\"dt\": -0.01, \"robin_parameter\"");
        assert_eq!(config_path(&text), "dt");
    }

    #[test]
    fn unknown_keys_carry_their_path() {
        let text = MINIMAL.replace("\"kind\": \"balloon0d\"", "\"kind\": \"balloon0d\", \"radius\": 1");
        assert!(config_path(&text).starts_with("problem"));
        let text = MINIMAL.replace("\"scheme\"", "\"colour\": 1, \"scheme\"");
        assert!(RunConfig::parse(&text).is_err());
        let text = MINIMAL.replace("\"kind\": \"imvls\"", "\"kind\": \"imvls\", \"q\": 3");
        assert!(config_path(&text).starts_with("update"));
    }

    #[test]
    fn bad_scheme_pairing() {
        let text = r#"{"problem": {"kind": "balloon0d"}, "scheme": "rn",
            "update": {"kind": "ils"}, "robin_parameter": 10}"#;
        assert_eq!(config_path(text), "update");
        let text = r#"{"problem": {"kind": "tube1d_open"}, "scheme": "dn_qn_s",
            "robin_parameter": 10}"#;
        assert_eq!(config_path(text), "robin_parameter");
    }

    #[test]
    fn bad_model_parameters() {
        let text = r#"{"problem": {"kind": "tube1d_closed", "cells": 2}, "scheme": "rn_qn",
            "robin_parameter": 1e5}"#;
        assert_eq!(config_path(text), "problem");
    }

    #[test]
    fn round_trip() {
        let mut c = RunConfig::new(
            ProblemConfig::Affine(AffineConfig {
                a_s: vec![vec![0.5, 0.1], vec![0.0, -0.3]],
                a_f: vec![vec![1.0, 0.0], vec![0.2, 1.0]],
                b_s: vec![1.0, 2.0],
                b_f: vec![0.0, -1.0],
            }),
            Scheme::DnQnS,
        );
        c.update = Some(UpdateStrategy::ils());
        c.n_steps = Some(3);
        c.output_path = Some("out/affine".into());
        let again = RunConfig::parse(&c.to_json().unwrap()).unwrap();
        assert_eq!(again, c);
        let b = RunConfig::parse(MINIMAL).unwrap();
        assert_eq!(RunConfig::parse(&b.to_json().unwrap()).unwrap(), b);
    }

    #[test]
    fn affine_config_runs() {
        let text = r#"{"problem": {"kind": "affine", "a_s": [[0.5]], "a_f": [[1.0]],
            "b_s": [1.0], "b_f": [0.0]}, "scheme": "dn_qn_s", "update": {"kind": "ils"}}"#;
        let r = RunConfig::parse(text).unwrap().run().unwrap();
        assert!(r.termination.is_completed());
        // d = 0.5 d + 1
        let d = r.trajectory.last().unwrap().displacement[0];
        assert!((d - 2.0).abs() < 1e-9);
    }
}
