//! Update strategies applied to the raw output `x~` of a coupling iteration.
//!
//! The free functions mirror the individual update formulas; the
//! [`Accelerator`] implementations wrap them with the per-time-step state a
//! coupling loop needs.

mod aitken;
mod history;
mod iqn;

pub use aitken::AitkenState;
pub use history::{filter_columns, FilteredPair, FixedPointSnapshot, PairHistory};
pub use iqn::{
    ils_update, imvls_finalize_timestep, imvls_update, mvj_apply, IqnStep, MultiVectorJacobian,
};

use serde::{Deserialize, Serialize};

use crate::densela::{check_same_len, norm2, sub, Matrix};
use crate::error::{Error, Result};

/// Relaxation factor of the first iteration of a time step.
pub const DEFAULT_OMEGA0: f64 = 0.1;
pub const DEFAULT_EPS_FILTER: f64 = 1e-8;
pub const DEFAULT_MAX_BLOCKS: usize = 8;
pub const DEFAULT_AITKEN_BOUNDS: [f64; 2] = [1e-4, 1.0];

/// `x~ - x`
pub fn residual(x_tilde: &[f64], x: &[f64]) -> Result<Vec<f64>> {
    sub(x_tilde, x)
}

/// `omega x~ + (1 - omega) x` for `0 < omega <= 1`.
pub fn relax(x_tilde: &[f64], x: &[f64], omega: f64) -> Result<Vec<f64>> {
    if !(omega > 0.0 && omega <= 1.0) {
        return Err(Error::Parameter(format!(
            "relaxation factor must lie in (0, 1], got {omega}"
        )));
    }
    check_same_len(x_tilde, x)?;
    if omega == 1.0 {
        return Ok(x_tilde.to_vec());
    }
    Ok(x_tilde
        .iter()
        .zip(x)
        .map(|(xt, xi)| omega * xt + (1.0 - omega) * xi)
        .collect())
}

/// What an update step did, for diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct UpdateOutcome {
    pub next: Vec<f64>,
    /// Relaxation factor, when the step was a relaxation.
    pub omega: Option<f64>,
    /// Norm of the least-squares coefficients, when the step was quasi-Newton.
    pub alpha_norm: Option<f64>,
    /// Columns removed by filtering.
    pub filtered: usize,
}

impl UpdateOutcome {
    fn relaxed(next: Vec<f64>, omega: f64) -> Self {
        UpdateOutcome {
            next,
            omega: Some(omega),
            alpha_norm: None,
            filtered: 0,
        }
    }

    fn quasi_newton(step: IqnStep) -> Self {
        UpdateOutcome {
            alpha_norm: Some(norm2(&step.alpha)),
            filtered: step.dropped.len(),
            next: step.next,
            omega: None,
        }
    }
}

/// Stateful update `x^{k+1} = U(x~^k)` owned by one coupling loop.
pub trait Accelerator: Send {
    fn label(&self) -> &'static str;

    /// Computes the next input from the input `x` and raw output `x_tilde` of
    /// iteration `iteration` (1-based within the time step).
    fn update(&mut self, x: &[f64], x_tilde: &[f64], iteration: usize) -> Result<UpdateOutcome>;

    /// Called instead of [`Accelerator::update`] for the iteration that met
    /// the convergence criteria.
    fn record_converged(&mut self, _x: &[f64], _x_tilde: &[f64], _iteration: usize) -> Result<()> {
        Ok(())
    }

    /// Closes the time step; within-step data is discarded.
    fn end_time_step(&mut self) -> Result<()>;
}

/// Passes `x~` through unchanged.
#[derive(Debug, Default, Clone)]
pub struct NoUpdate;

impl Accelerator for NoUpdate {
    fn label(&self) -> &'static str {
        "none"
    }

    fn update(&mut self, _x: &[f64], x_tilde: &[f64], _k: usize) -> Result<UpdateOutcome> {
        Ok(UpdateOutcome {
            next: x_tilde.to_vec(),
            omega: None,
            alpha_norm: None,
            filtered: 0,
        })
    }

    fn end_time_step(&mut self) -> Result<()> {
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct ConstantRelaxation {
    omega: f64,
}

impl ConstantRelaxation {
    pub fn new(omega: f64) -> Result<Self> {
        relax(&[0.0], &[0.0], omega)?;
        Ok(ConstantRelaxation { omega })
    }
}

impl Accelerator for ConstantRelaxation {
    fn label(&self) -> &'static str {
        "relax"
    }

    fn update(&mut self, x: &[f64], x_tilde: &[f64], _k: usize) -> Result<UpdateOutcome> {
        Ok(UpdateOutcome::relaxed(relax(x_tilde, x, self.omega)?, self.omega))
    }

    fn end_time_step(&mut self) -> Result<()> {
        Ok(())
    }
}

/// Aitken's dynamic relaxation; restarts from `omega0` every time step.
#[derive(Debug, Clone)]
pub struct Aitken {
    omega0: f64,
    state: AitkenState,
}

impl Aitken {
    pub fn new(omega0: f64, bounds: [f64; 2]) -> Result<Self> {
        relax(&[0.0], &[0.0], omega0)?;
        Ok(Aitken {
            omega0,
            state: AitkenState::new(omega0, bounds[0], bounds[1])?,
        })
    }

    pub fn state(&self) -> &AitkenState {
        &self.state
    }
}

impl Accelerator for Aitken {
    fn label(&self) -> &'static str {
        "aitken"
    }

    fn update(&mut self, x: &[f64], x_tilde: &[f64], _k: usize) -> Result<UpdateOutcome> {
        let r = residual(x_tilde, x)?;
        let omega = match self.state.step(&r) {
            Ok(w) => w,
            Err(Error::DegenerateResidual) => self.state.omega(),
            Err(e) => return Err(e),
        };
        Ok(UpdateOutcome::relaxed(relax(x_tilde, x, omega)?, omega))
    }

    fn end_time_step(&mut self) -> Result<()> {
        self.state.reset(self.omega0);
        Ok(())
    }
}

/// IQN-ILS without reuse of past time steps.
#[derive(Debug, Clone)]
pub struct IqnIls {
    omega0: f64,
    eps_filter: f64,
    history: PairHistory,
}

impl IqnIls {
    pub fn new(dim: usize, omega0: f64, eps_filter: f64) -> Result<Self> {
        relax(&[0.0], &[0.0], omega0)?;
        if !(eps_filter > 0.0) {
            return Err(Error::Parameter("filter threshold must be positive".into()));
        }
        Ok(IqnIls {
            omega0,
            eps_filter,
            history: PairHistory::new(dim),
        })
    }

    pub fn history(&self) -> &PairHistory {
        &self.history
    }
}

impl Accelerator for IqnIls {
    fn label(&self) -> &'static str {
        "ils"
    }

    fn update(&mut self, x: &[f64], x_tilde: &[f64], k: usize) -> Result<UpdateOutcome> {
        let snapshot = FixedPointSnapshot::new(x_tilde, x, k)?;
        let r = snapshot.residual().to_vec();
        self.history.push(snapshot)?;
        if self.history.columns() == 0 {
            return Ok(UpdateOutcome::relaxed(relax(x_tilde, x, self.omega0)?, self.omega0));
        }
        match ils_update(&self.history, x_tilde, &r, self.eps_filter) {
            Ok(step) => Ok(UpdateOutcome::quasi_newton(step)),
            Err(Error::AllColumnsFiltered) => {
                Ok(UpdateOutcome::relaxed(relax(x_tilde, x, self.omega0)?, self.omega0))
            }
            Err(e) => Err(e),
        }
    }

    fn end_time_step(&mut self) -> Result<()> {
        self.history.clear();
        Ok(())
    }
}

/// IQN-IMVLS: ILS plus an implicit inverse Jacobian built from past steps.
#[derive(Debug, Clone)]
pub struct IqnImvls {
    omega0: f64,
    eps_filter: f64,
    history: PairHistory,
    /// `J V` for the current history, newest column first.
    jv: Matrix,
    jacobian: MultiVectorJacobian,
}

impl IqnImvls {
    pub fn new(dim: usize, omega0: f64, eps_filter: f64, max_blocks: usize) -> Result<Self> {
        relax(&[0.0], &[0.0], omega0)?;
        Ok(IqnImvls {
            omega0,
            eps_filter,
            history: PairHistory::new(dim),
            jv: Matrix::empty(dim),
            jacobian: MultiVectorJacobian::new(dim, max_blocks, eps_filter)?,
        })
    }

    pub fn jacobian(&self) -> &MultiVectorJacobian {
        &self.jacobian
    }

    pub fn history(&self) -> &PairHistory {
        &self.history
    }

    fn record(&mut self, x: &[f64], x_tilde: &[f64], k: usize) -> Result<Vec<f64>> {
        let snapshot = FixedPointSnapshot::new(x_tilde, x, k)?;
        let r = snapshot.residual().to_vec();
        let before = self.history.columns();
        self.history.push(snapshot)?;
        if self.history.columns() > before {
            let jv_new = self.jacobian.apply(self.history.v().column(0))?;
            self.jv.insert_column(0, &jv_new)?;
        }
        Ok(r)
    }

    fn past_jacobian_step(&self, x: &[f64], x_tilde: &[f64], r: &[f64]) -> Result<UpdateOutcome> {
        if self.jacobian.is_empty() {
            return Ok(UpdateOutcome::relaxed(relax(x_tilde, x, self.omega0)?, self.omega0));
        }
        let jr = self.jacobian.apply(r)?;
        let next = x_tilde.iter().zip(&jr).map(|(a, b)| a - b).collect();
        Ok(UpdateOutcome {
            next,
            omega: None,
            alpha_norm: Some(0.0),
            filtered: 0,
        })
    }
}

impl Accelerator for IqnImvls {
    fn label(&self) -> &'static str {
        "imvls"
    }

    fn update(&mut self, x: &[f64], x_tilde: &[f64], k: usize) -> Result<UpdateOutcome> {
        let r = self.record(x, x_tilde, k)?;
        if self.history.columns() == 0 {
            return self.past_jacobian_step(x, x_tilde, &r);
        }
        match imvls_update(&self.jacobian, &self.history, &self.jv, x_tilde, &r, self.eps_filter) {
            Ok(step) => Ok(UpdateOutcome::quasi_newton(step)),
            Err(Error::AllColumnsFiltered) => self.past_jacobian_step(x, x_tilde, &r),
            Err(e) => Err(e),
        }
    }

    fn record_converged(&mut self, x: &[f64], x_tilde: &[f64], k: usize) -> Result<()> {
        self.record(x, x_tilde, k).map(|_| ())
    }

    fn end_time_step(&mut self) -> Result<()> {
        imvls_finalize_timestep(&mut self.jacobian, &self.history, &self.jv)?;
        self.history.clear();
        self.jv = Matrix::empty(self.history.dim());
        Ok(())
    }
}

fn default_omega0() -> f64 {
    DEFAULT_OMEGA0
}
fn default_eps_filter() -> f64 {
    DEFAULT_EPS_FILTER
}
fn default_max_blocks() -> usize {
    DEFAULT_MAX_BLOCKS
}
fn default_aitken_bounds() -> [f64; 2] {
    DEFAULT_AITKEN_BOUNDS
}

/// Serializable choice of update strategy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum UpdateStrategy {
    None,
    Relax {
        omega: f64,
    },
    Aitken {
        #[serde(default = "default_omega0")]
        omega0: f64,
        #[serde(default = "default_aitken_bounds")]
        bounds: [f64; 2],
    },
    Ils {
        #[serde(default = "default_omega0")]
        omega0: f64,
        #[serde(default = "default_eps_filter")]
        eps_filter: f64,
    },
    Imvls {
        #[serde(default = "default_omega0")]
        omega0: f64,
        #[serde(default = "default_eps_filter")]
        eps_filter: f64,
        #[serde(default = "default_max_blocks")]
        max_blocks: usize,
    },
}

impl UpdateStrategy {
    pub fn aitken() -> Self {
        UpdateStrategy::Aitken {
            omega0: DEFAULT_OMEGA0,
            bounds: DEFAULT_AITKEN_BOUNDS,
        }
    }

    pub fn ils() -> Self {
        UpdateStrategy::Ils {
            omega0: DEFAULT_OMEGA0,
            eps_filter: DEFAULT_EPS_FILTER,
        }
    }

    pub fn imvls() -> Self {
        UpdateStrategy::Imvls {
            omega0: DEFAULT_OMEGA0,
            eps_filter: DEFAULT_EPS_FILTER,
            max_blocks: DEFAULT_MAX_BLOCKS,
        }
    }

    /// Parses a bare strategy name with default parameters.
    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "none" => UpdateStrategy::None,
            "relax" => UpdateStrategy::Relax { omega: 1.0 },
            "aitken" => Self::aitken(),
            "ils" => Self::ils(),
            "imvls" => Self::imvls(),
            _ => return None,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            UpdateStrategy::None => "none",
            UpdateStrategy::Relax { .. } => "relax",
            UpdateStrategy::Aitken { .. } => "aitken",
            UpdateStrategy::Ils { .. } => "ils",
            UpdateStrategy::Imvls { .. } => "imvls",
        }
    }

    /// The relaxation factor this strategy uses (fixed factor or first-iteration factor).
    pub fn omega(&self) -> Option<f64> {
        match self {
            UpdateStrategy::None => None,
            UpdateStrategy::Relax { omega } => Some(*omega),
            UpdateStrategy::Aitken { omega0, .. }
            | UpdateStrategy::Ils { omega0, .. }
            | UpdateStrategy::Imvls { omega0, .. } => Some(*omega0),
        }
    }

    pub fn with_omega(&self, omega: f64) -> Option<Self> {
        let mut out = self.clone();
        match &mut out {
            UpdateStrategy::None => return None,
            UpdateStrategy::Relax { omega: w }
            | UpdateStrategy::Aitken { omega0: w, .. }
            | UpdateStrategy::Ils { omega0: w, .. }
            | UpdateStrategy::Imvls { omega0: w, .. } => *w = omega,
        }
        Some(out)
    }

    pub fn validate(&self) -> Result<()> {
        self.build(1).map(|_| ())
    }

    pub fn build(&self, dim: usize) -> Result<Box<dyn Accelerator>> {
        Ok(match *self {
            UpdateStrategy::None => Box::new(NoUpdate),
            UpdateStrategy::Relax { omega } => Box::new(ConstantRelaxation::new(omega)?),
            UpdateStrategy::Aitken { omega0, bounds } => Box::new(Aitken::new(omega0, bounds)?),
            UpdateStrategy::Ils { omega0, eps_filter } => {
                Box::new(IqnIls::new(dim, omega0, eps_filter)?)
            }
            UpdateStrategy::Imvls {
                omega0,
                eps_filter,
                max_blocks,
            } => Box::new(IqnImvls::new(dim, omega0, eps_filter, max_blocks)?),
        })
    }
}
