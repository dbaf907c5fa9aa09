//! Enclosed circular balloon filled through a prescribed inflow `Q_in(t)`.
//!
//! The wall is a single [`RingWall`] and the interface field is the radius
//! `R`. The fluid is quasi-static: mass conservation fixes the normal fluid
//! velocity at the wall, `2 pi R u_f = Q_in`, and the pressure only has an
//! equation when the wall condition is of Robin type. With prescribed wall
//! motion the problem is overdetermined and the solve is refused.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::ring::RingWall;
use crate::error::{Error, Result};
use crate::schemes::{
    BoundaryData, CoupledProblem, FluidResponse, FluidSolver, InterfaceSample, StructureResponse,
    StructureSolver,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BalloonConfig {
    pub r0: f64,
    pub thickness: f64,
    pub rho_s: f64,
    pub rho_f: f64,
    pub mu_f: f64,
    pub e_s: f64,
    /// Kept for reference; the ring law has no Poisson effect.
    pub nu_s: f64,
    /// `Q_hat` in `Q_in(t) = Q_hat sin(pi t)`.
    pub inflow_amplitude: f64,
}

impl Default for BalloonConfig {
    fn default() -> Self {
        BalloonConfig {
            r0: 0.28,
            thickness: 0.02,
            rho_s: 1000.0,
            rho_f: 1000.0,
            mu_f: 1.0,
            e_s: 1.4e6,
            nu_s: 0.3,
            inflow_amplitude: 0.05 * PI,
        }
    }
}

impl BalloonConfig {
    pub fn validate(&self) -> Result<()> {
        RingWall::new(self.rho_s, self.thickness, self.e_s, self.r0)?;
        if !(self.rho_f > 0.0) || !(self.mu_f >= 0.0) || !self.inflow_amplitude.is_finite() {
            return Err(Error::Parameter(
                "balloon needs rho_f > 0, mu_f >= 0 and a finite inflow".into(),
            ));
        }
        Ok(())
    }

    pub fn inflow(&self, t: f64) -> f64 {
        self.inflow_amplitude * (PI * t).sin()
    }

    pub fn ring(&self) -> Result<RingWall> {
        RingWall::new(self.rho_s, self.thickness, self.e_s, self.r0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct FluidState {
    radius: f64,
    fluid_velocity: f64,
    pressure: f64,
    traction: f64,
    inflow: f64,
}

#[derive(Debug, Clone)]
pub struct BalloonFluid {
    config: BalloonConfig,
    last: Option<FluidState>,
    committed: FluidState,
}

impl BalloonFluid {
    pub fn new(config: BalloonConfig) -> Result<Self> {
        config.validate()?;
        Ok(BalloonFluid {
            committed: FluidState {
                radius: config.r0,
                fluid_velocity: 0.0,
                pressure: 0.0,
                traction: 0.0,
                inflow: 0.0,
            },
            config,
            last: None,
        })
    }

    /// Pressure of the last solve.
    pub fn pressure(&self) -> Option<f64> {
        self.last.map(|s| s.pressure)
    }
}

impl FluidSolver for BalloonFluid {
    fn dim(&self) -> usize {
        1
    }

    fn solve(&mut self, boundary: &BoundaryData, t: f64, _dt: f64) -> Result<FluidResponse> {
        boundary.validate(1)?;
        let (radius, wall_velocity, traction, alpha) = match boundary {
            BoundaryData::Robin {
                displacement,
                velocity,
                traction,
                alpha,
            } => (displacement[0], velocity[0], traction[0], *alpha),
            BoundaryData::Dirichlet { .. } => {
                return Err(Error::IncompressibilityDilemma(
                    "enclosed fluid with prescribed wall motion has no pressure equation".into(),
                ))
            }
            BoundaryData::Neumann { .. } => {
                return Err(Error::UnsupportedBoundary(
                    "balloon fluid takes Robin data".into(),
                ))
            }
        };
        if !(radius > 0.0) {
            return Err(Error::NonPhysical(format!("balloon radius {radius}")));
        }
        let q = self.config.inflow(t);
        let u_f = q / (2.0 * PI * radius);
        let p = traction + alpha * (u_f - wall_velocity);
        // normal viscous stress of the radial source flow
        let load = p + self.config.mu_f * q / (PI * radius * radius);
        self.last = Some(FluidState {
            radius,
            fluid_velocity: u_f,
            pressure: p,
            traction: load,
            inflow: q,
        });
        Ok(FluidResponse {
            traction: vec![load],
            wall_velocity: vec![u_f],
            converged: true,
        })
    }

    fn commit(&mut self) -> Result<()> {
        self.committed = self
            .last
            .take()
            .ok_or_else(|| Error::Parameter("commit without a solve".into()))?;
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct BalloonStructure {
    ring: RingWall,
    radius: [f64; 1],
    velocity: [f64; 1],
    trial: Option<(f64, f64)>,
}

impl BalloonStructure {
    pub fn new(ring: RingWall) -> Self {
        BalloonStructure {
            radius: [ring.r0],
            ring,
            velocity: [0.0],
            trial: None,
        }
    }

}

impl StructureSolver for BalloonStructure {
    fn dim(&self) -> usize {
        1
    }

    fn solve(&mut self, traction: &[f64], _t: f64, dt: f64) -> Result<StructureResponse> {
        if traction.len() != 1 {
            return Err(Error::Dimension("balloon load is a scalar".into()));
        }
        let w_prev = self.radius[0] - self.ring.r0;
        let (w, wdot) = self.ring.step(traction[0], w_prev, self.velocity[0], dt)?;
        let r = self.ring.r0 + w;
        self.trial = Some((r, wdot));
        Ok(StructureResponse {
            displacement: vec![r],
            velocity: vec![wdot],
            converged: true,
        })
    }

    fn rate_of(&self, displacement: &[f64], dt: f64) -> Result<Vec<f64>> {
        if displacement.len() != 1 {
            return Err(Error::Dimension("balloon radius is a scalar".into()));
        }
        Ok(vec![(displacement[0] - self.radius[0]) / dt])
    }

    fn commit(&mut self) -> Result<()> {
        let (r, v) = self
            .trial
            .take()
            .ok_or_else(|| Error::Parameter("commit without a solve".into()))?;
        self.radius = [r];
        self.velocity = [v];
        Ok(())
    }

    fn displacement(&self) -> &[f64] {
        &self.radius
    }

    fn velocity(&self) -> &[f64] {
        &self.velocity
    }
}

/// Balloon fluid and wall, starting at rest with `R = R0`.
#[derive(Debug, Clone)]
pub struct BalloonProblem {
    config: BalloonConfig,
    fluid: BalloonFluid,
    structure: BalloonStructure,
}

impl BalloonProblem {
    pub fn new(config: BalloonConfig) -> Result<Self> {
        Ok(BalloonProblem {
            fluid: BalloonFluid::new(config.clone())?,
            structure: BalloonStructure::new(config.ring()?),
            config,
        })
    }

    pub fn config(&self) -> &BalloonConfig {
        &self.config
    }

    pub fn radius(&self) -> f64 {
        self.structure.radius[0]
    }
}

impl CoupledProblem for BalloonProblem {
    fn name(&self) -> &'static str {
        "balloon0d"
    }

    fn dim(&self) -> usize {
        1
    }

    fn parts(&mut self) -> (&mut dyn FluidSolver, &mut dyn StructureSolver) {
        (&mut self.fluid, &mut self.structure)
    }

    fn initial_traction(&self) -> Vec<f64> {
        vec![0.0]
    }

    fn initial_volume(&self) -> f64 {
        PI * self.config.r0 * self.config.r0
    }

    fn interface_sample(&self) -> InterfaceSample {
        let s = &self.fluid.committed;
        InterfaceSample {
            structure_velocity: self.structure.velocity.to_vec(),
            fluid_velocity: vec![s.fluid_velocity],
            weights: vec![2.0 * PI * s.radius],
            net_inflow: s.inflow,
        }
    }

    fn snapshot(&self) -> (Vec<f64>, Vec<f64>) {
        (vec![self.radius()], vec![self.fluid.committed.traction])
    }
}
