//! Run diagnostics: artificial interface flux, the analytic balloon radius
//! and iteration statistics.

use serde::{Deserialize, Serialize};

use crate::densela::check_same_len;
use crate::error::{Error, Result};

/// `sum_i w_i |u_s,i - u_f,i|`
pub fn artificial_flux_rate(u_s: &[f64], u_f: &[f64], weights: &[f64]) -> Result<f64> {
    check_same_len(u_s, u_f)?;
    check_same_len(u_s, weights)?;
    Ok(u_s
        .iter()
        .zip(u_f)
        .zip(weights)
        .map(|((s, f), w)| w * (s - f).abs())
        .sum())
}

/// Running relative artificial flux, integrated with the rectangle rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluxAccumulator {
    eps_rel: f64,
    volume: f64,
    initial_volume: f64,
}

impl FluxAccumulator {
    pub fn new(initial_volume: f64) -> Result<Self> {
        if !(initial_volume > 0.0) || !initial_volume.is_finite() {
            return Err(Error::NonPhysical(format!(
                "initial volume must be positive, got {initial_volume}"
            )));
        }
        Ok(FluxAccumulator {
            eps_rel: 0.0,
            volume: initial_volume,
            initial_volume,
        })
    }

    pub fn eps_rel(&self) -> f64 {
        self.eps_rel
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }

    pub fn initial_volume(&self) -> f64 {
        self.initial_volume
    }

    /// `eps_rel += dt * flux_rate / V`, then `V += dt * volume_rate`.
    pub fn accumulate(&mut self, flux_rate: f64, volume_rate: f64, dt: f64) -> Result<()> {
        if !(dt > 0.0) {
            return Err(Error::Parameter(format!("dt must be positive, got {dt}")));
        }
        if !flux_rate.is_finite() || !volume_rate.is_finite() {
            return Err(Error::NonFinite("flux accumulation"));
        }
        let next = self.volume + dt * volume_rate;
        if next <= 0.0 {
            return Err(Error::NonPhysical(format!("fluid volume would become {next}")));
        }
        self.eps_rel += dt * flux_rate.abs() / self.volume;
        self.volume = next;
        Ok(())
    }
}

/// `sqrt(R0^2 + (1/pi) int_0^t Q)` with the integral by composite Simpson on
/// 10^4 subintervals.
pub fn analytic_balloon_radius<Q: Fn(f64) -> f64>(t: f64, r0: f64, q_in: Q) -> Result<f64> {
    radius_from_volume_integral(r0, simpson(&q_in, 0.0, t, 10_000))
}

/// Closed form for `Q(t) = q_hat sin(pi t)`.
pub fn analytic_balloon_radius_sine(t: f64, r0: f64, q_hat: f64) -> Result<f64> {
    let integral = q_hat * (1.0 - (std::f64::consts::PI * t).cos()) / std::f64::consts::PI;
    radius_from_volume_integral(r0, integral)
}

fn radius_from_volume_integral(r0: f64, integral: f64) -> Result<f64> {
    let radicand = r0 * r0 + integral / std::f64::consts::PI;
    if !(radicand > 0.0) {
        return Err(Error::NonPhysical(format!("radius squared {radicand}")));
    }
    Ok(radicand.sqrt())
}

fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut sum = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + i as f64 * h);
    }
    sum * h / 3.0
}

/// Coupling iterations per time step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationStats {
    pub per_step: Vec<usize>,
    pub mean: f64,
    pub max: usize,
}

impl IterationStats {
    pub fn from_counts(per_step: Vec<usize>) -> Self {
        let max = per_step.iter().copied().max().unwrap_or(0);
        let mean = if per_step.is_empty() {
            0.0
        } else {
            per_step.iter().sum::<usize>() as f64 / per_step.len() as f64
        };
        IterationStats {
            per_step,
            mean,
            max,
        }
    }
}
