use crate::densela::{dot, norm2, sub};
use crate::error::{Error, Result};

/// Dynamic relaxation factor, adapted from consecutive residuals.
#[derive(Debug, Clone, PartialEq)]
pub struct AitkenState {
    omega: f64,
    omega_min: f64,
    omega_max: f64,
    previous_residual: Option<Vec<f64>>,
}

impl AitkenState {
    pub fn new(omega: f64, omega_min: f64, omega_max: f64) -> Result<Self> {
        if !(0.0 < omega_min && omega_min <= omega_max && omega_max <= 1.0) {
            return Err(Error::Parameter(format!(
                "Aitken bounds must satisfy 0 < min <= max <= 1, got [{omega_min}, {omega_max}]"
            )));
        }
        Ok(AitkenState {
            omega: omega.clamp(omega_min, omega_max),
            omega_min,
            omega_max,
            previous_residual: None,
        })
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.omega_min, self.omega_max)
    }

    pub fn previous_residual(&self) -> Option<&[f64]> {
        self.previous_residual.as_deref()
    }

    /// Unclamped secant estimate `-w_prev * R_prev.(R - R_prev) / |R - R_prev|^2`.
    pub fn raw_factor(omega_prev: f64, r_prev: &[f64], r_cur: &[f64]) -> Result<f64> {
        let diff = sub(r_cur, r_prev)?;
        let denom = norm2(&diff);
        if denom == 0.0 {
            return Err(Error::DegenerateResidual);
        }
        Ok(-omega_prev * dot(r_prev, &diff) / (denom * denom))
    }

    /// Feeds the residual of the current iteration. The first call after a
    /// reset keeps the factor; later calls apply the clamped secant estimate.
    /// On [`Error::DegenerateResidual`] the factor is kept and the residual
    /// is still stored.
    pub fn step(&mut self, residual: &[f64]) -> Result<f64> {
        if !crate::densela::all_finite(residual) {
            return Err(Error::NonFinite("Aitken residual"));
        }
        let outcome = match &self.previous_residual {
            None => Ok(self.omega),
            Some(prev) => Self::raw_factor(self.omega, prev, residual).map(|raw| {
                self.omega = raw.clamp(self.omega_min, self.omega_max);
                self.omega
            }),
        };
        self.previous_residual = Some(residual.to_vec());
        outcome
    }

    /// Forgets the stored residual and restarts from `omega`.
    pub fn reset(&mut self, omega: f64) {
        self.omega = omega.clamp(self.omega_min, self.omega_max);
        self.previous_residual = None;
    }
}
