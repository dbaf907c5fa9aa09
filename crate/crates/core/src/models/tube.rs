//! One-dimensional flexible tube driven by a pressure pulse at the inlet.
//!
//! Staggered finite volumes: cell `i` carries the area `a_i`, pressure `p_i`
//! and wall displacement `w_i`; face `j` (between cells `j-1` and `j`)
//! carries the section-mean axial velocity `u_j`. Face 0 is the inlet, face
//! `N` the outlet. Every wall cell is an independent [`RingWall`].
//!
//! The fluid is integrated with backward Euler and solved by damped Newton
//! iteration with an analytic Jacobian. Under Robin data the wall is
//! permeable: `q_i = -2 pi R_i (p_i - h_i) / alpha` enters the continuity
//! equation, so the pressure level is fixed even for a closed outlet.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::ring::RingWall;
use crate::densela::{HouseholderQr, Matrix};
use crate::error::{Error, Result};
use crate::schemes::{
    BoundaryData, CoupledProblem, FluidResponse, FluidSolver, InterfaceSample, StructureResponse,
    StructureSolver,
};

const NEWTON_MAX_ITERATIONS: usize = 50;
const NEWTON_DAMPING: f64 = 0.5;
const NEWTON_MAX_HALVINGS: usize = 12;
/// Relative pivot size below which the linearization counts as singular.
const SINGULAR_PIVOT: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outlet {
    /// Zero ambient pressure behind the last face.
    Open,
    /// Wall at the last face.
    Closed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TubeConfig {
    pub length: f64,
    pub cells: usize,
    pub r0: f64,
    pub thickness: f64,
    pub rho_f: f64,
    pub rho_s: f64,
    pub mu_f: f64,
    pub e_s: f64,
    /// Kept for reference; the ring law has no Poisson effect.
    pub nu_s: f64,
    pub pulse_amplitude: f64,
    pub pulse_period: f64,
}

impl Default for TubeConfig {
    fn default() -> Self {
        TubeConfig {
            length: 0.05,
            cells: 25,
            r0: 0.005,
            thickness: 0.001,
            rho_f: 1000.0,
            rho_s: 1000.0,
            mu_f: 0.003,
            e_s: 3e5,
            nu_s: 0.3,
            pulse_amplitude: 3.75,
            pulse_period: 0.003,
        }
    }
}

impl TubeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.cells < 4 {
            return Err(Error::Parameter(format!("tube needs at least 4 cells, got {}", self.cells)));
        }
        RingWall::new(self.rho_s, self.thickness, self.e_s, self.r0)?;
        for (name, v) in [
            ("length", self.length),
            ("rho_f", self.rho_f),
            ("pulse_period", self.pulse_period),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Parameter(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.mu_f >= 0.0) || !self.pulse_amplitude.is_finite() {
            return Err(Error::Parameter("mu_f >= 0 and finite pulse amplitude".into()));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        self.length / self.cells as f64
    }

    /// Centerline inflow velocity `A (1 - cos(2 pi t / T))` during the first period.
    pub fn pulse(&self, t: f64) -> f64 {
        if t <= self.pulse_period {
            self.pulse_amplitude * (1.0 - (2.0 * PI * t / self.pulse_period).cos())
        } else {
            0.0
        }
    }

    /// Section mean of the parabolic inlet profile.
    pub fn inlet_velocity(&self, t: f64) -> f64 {
        0.5 * self.pulse(t)
    }

    pub fn ring(&self) -> Result<RingWall> {
        RingWall::new(self.rho_s, self.thickness, self.e_s, self.r0)
    }
}

/// Fluid state at the end of a step.
#[derive(Debug, Clone, PartialEq)]
struct Flow {
    p: Vec<f64>,
    /// Face velocities, inlet and outlet included.
    u: Vec<f64>,
    a: Vec<f64>,
    radius: Vec<f64>,
    wall_velocity: Vec<f64>,
    audit: f64,
}

impl Flow {
    fn rest(cfg: &TubeConfig) -> Self {
        let n = cfg.cells;
        Flow {
            p: vec![0.0; n],
            u: vec![0.0; n + 1],
            a: vec![PI * cfg.r0 * cfg.r0; n],
            radius: vec![cfg.r0; n],
            wall_velocity: vec![0.0; n],
            audit: 0.0,
        }
    }
}

fn face_areas(a: &[f64]) -> Vec<f64> {
    let n = a.len();
    let mut af = Vec::with_capacity(n + 1);
    af.push(a[0]);
    for j in 1..n {
        af.push(0.5 * (a[j - 1] + a[j]));
    }
    af.push(a[n - 1]);
    af
}

/// Discrete equations of one fluid solve. Unknowns are
/// `[p_0 .. p_{N-1}, u_1 .. u_{nu}]`.
struct FlowSystem<'a> {
    n: usize,
    open: bool,
    dt: f64,
    dx: f64,
    rho: f64,
    friction: f64,
    a_ref: f64,
    a: &'a [f64],
    a_prev: &'a [f64],
    af: Vec<f64>,
    af_prev: Vec<f64>,
    u_prev: &'a [f64],
    u_in: f64,
    kappa: Vec<f64>,
    h: Vec<f64>,
}

struct Evaluated {
    f: Vec<f64>,
    scale: Vec<f64>,
}

impl FlowSystem<'_> {
    fn face_unknowns(&self) -> usize {
        if self.open {
            self.n
        } else {
            self.n - 1
        }
    }

    fn len(&self) -> usize {
        self.n + self.face_unknowns()
    }

    fn column_of_face(&self, j: usize) -> Option<usize> {
        (j >= 1 && j <= self.face_unknowns()).then(|| self.n + j - 1)
    }

    fn faces(&self, z: &[f64]) -> Vec<f64> {
        let mut u = vec![0.0; self.n + 1];
        u[0] = self.u_in;
        for j in 1..=self.face_unknowns() {
            u[j] = z[self.n + j - 1];
        }
        u
    }

    /// Upwind convective flux of cell `i` and its upwind face.
    fn convective(&self, u: &[f64], i: usize) -> (f64, f64, usize) {
        let mean = 0.5 * (self.af[i] * u[i] + self.af[i + 1] * u[i + 1]);
        let up = if mean >= 0.0 { i } else { i + 1 };
        (mean * u[up], mean, up)
    }

    fn evaluate(&self, z: &[f64]) -> Evaluated {
        let (n, dt, dx) = (self.n, self.dt, self.dx);
        let p = &z[..n];
        let u = self.faces(z);
        let mut f = Vec::with_capacity(self.len());
        let mut scale = Vec::with_capacity(self.len());
        let mut push = |terms: &[f64]| {
            f.push(terms.iter().sum::<f64>() / self.a_ref);
            scale.push(terms.iter().map(|t| t.abs()).sum::<f64>() / self.a_ref);
        };
        for i in 0..n {
            push(&[
                (self.a[i] - self.a_prev[i]) / dt,
                self.af[i + 1] * u[i + 1] / dx,
                -self.af[i] * u[i] / dx,
                self.kappa[i] * p[i],
                -self.kappa[i] * self.h[i],
            ]);
        }
        let fc: Vec<f64> = (0..n).map(|i| self.convective(&u, i).0).collect();
        for j in 1..=self.face_unknowns() {
            let storage = [
                self.af[j] * u[j] / dt,
                -self.af_prev[j] * self.u_prev[j] / dt,
            ];
            if j < n {
                push(&[
                    storage[0],
                    storage[1],
                    fc[j] / dx,
                    -fc[j - 1] / dx,
                    self.af[j] * p[j] / (self.rho * dx),
                    -self.af[j] * p[j - 1] / (self.rho * dx),
                    self.friction * u[j],
                ]);
            } else {
                let half = 0.5 * dx;
                push(&[
                    storage[0],
                    storage[1],
                    self.af[n] * u[n] * u[n] / half,
                    -fc[n - 1] / half,
                    -self.af[n] * p[n - 1] / (self.rho * half),
                    self.friction * u[n],
                ]);
            }
        }
        Evaluated { f, scale }
    }

    fn jacobian(&self, z: &[f64]) -> Matrix {
        let (n, dt, dx) = (self.n, self.dt, self.dx);
        let size = self.len();
        let u = self.faces(z);
        let mut jac = Matrix::zeros(size, size);
        let s = 1.0 / self.a_ref;
        for i in 0..n {
            jac[(i, i)] = self.kappa[i] * s;
            if let Some(c) = self.column_of_face(i + 1) {
                jac[(i, c)] += self.af[i + 1] / dx * s;
            }
            if let Some(c) = self.column_of_face(i) {
                jac[(i, c)] -= self.af[i] / dx * s;
            }
        }
        // d fc_i / d u_i and d fc_i / d u_{i+1}
        let dfc: Vec<(f64, f64)> = (0..n)
            .map(|i| {
                let (_, mean, up) = self.convective(&u, i);
                let left = 0.5 * self.af[i] * u[up] + if up == i { mean } else { 0.0 };
                let right = 0.5 * self.af[i + 1] * u[up] + if up == i + 1 { mean } else { 0.0 };
                (left, right)
            })
            .collect();
        for j in 1..=self.face_unknowns() {
            let row = n + j - 1;
            let mut add = |face: usize, v: f64| {
                if let Some(c) = self.column_of_face(face) {
                    jac[(row, c)] += v * s;
                }
            };
            if j < n {
                add(j, self.af[j] / dt + self.friction);
                add(j, dfc[j].0 / dx);
                add(j + 1, dfc[j].1 / dx);
                add(j - 1, -dfc[j - 1].0 / dx);
                add(j, -dfc[j - 1].1 / dx);
                jac[(row, j)] += self.af[j] / (self.rho * dx) * s;
                jac[(row, j - 1)] -= self.af[j] / (self.rho * dx) * s;
            } else {
                let half = 0.5 * dx;
                add(n, self.af[n] / dt + self.friction + 2.0 * self.af[n] * u[n] / half);
                add(n - 1, -dfc[n - 1].0 / half);
                add(n, -dfc[n - 1].1 / half);
                jac[(row, n - 1)] -= self.af[n] / (self.rho * half) * s;
            }
        }
        jac
    }
}

fn within_tolerance(ev: &Evaluated, eps: f64) -> bool {
    let max_scale = ev.scale.iter().cloned().fold(0.0, f64::max);
    let floor = 1e-3 * eps * max_scale;
    ev.f
        .iter()
        .zip(&ev.scale)
        .all(|(f, s)| f.abs() <= eps * s + floor)
}

fn weighted_norm(f: &[f64], weights: &[f64]) -> f64 {
    f.iter()
        .zip(weights)
        .map(|(f, w)| (f * w) * (f * w))
        .sum::<f64>()
        .sqrt()
}

/// Newton iteration from `z`. Returns the solution and the number of steps.
fn newton(system: &FlowSystem<'_>, mut z: Vec<f64>, eps: f64) -> Result<(Vec<f64>, usize)> {
    let size = system.len();
    for it in 0..NEWTON_MAX_ITERATIONS {
        let ev = system.evaluate(&z);
        if !crate::densela::all_finite(&ev.f) {
            return Err(Error::NonFinite("tube flow residual"));
        }
        if within_tolerance(&ev, eps) {
            return Ok((z, it));
        }
        let mut jac = system.jacobian(&z);
        let row_w: Vec<f64> = (0..size)
            .map(|i| {
                let m = (0..size).map(|j| jac[(i, j)].abs()).fold(0.0, f64::max);
                if m > 0.0 {
                    1.0 / m
                } else {
                    1.0
                }
            })
            .collect();
        for j in 0..size {
            for i in 0..size {
                jac[(i, j)] *= row_w[i];
            }
        }
        let col_w: Vec<f64> = (0..size)
            .map(|j| {
                let m = jac.column(j).iter().map(|v| v.abs()).fold(0.0, f64::max);
                if m > 0.0 {
                    1.0 / m
                } else {
                    1.0
                }
            })
            .collect();
        for (j, w) in col_w.iter().enumerate() {
            for v in jac.column_mut(j) {
                *v *= w;
            }
        }
        let qr = HouseholderQr::new(&jac)?;
        if qr.first_deficient_column(SINGULAR_PIVOT).is_some() {
            return Err(Error::IncompressibilityDilemma(
                "fluid linearization is singular and the discrete equations are unsatisfied"
                    .into(),
            ));
        }
        let rhs: Vec<f64> = ev.f.iter().zip(&row_w).map(|(f, w)| -f * w).collect();
        let y = qr.solve_least_squares(&rhs, 0.0)?;
        let delta: Vec<f64> = y.iter().zip(&col_w).map(|(y, c)| y * c).collect();

        let merit = weighted_norm(&ev.f, &row_w);
        let mut lambda = 1.0;
        let mut trial: Vec<f64>;
        let mut halvings = 0;
        loop {
            trial = z.iter().zip(&delta).map(|(z, d)| z + lambda * d).collect();
            let next = system.evaluate(&trial);
            let m = weighted_norm(&next.f, &row_w);
            if m <= merit || halvings == NEWTON_MAX_HALVINGS {
                break;
            }
            lambda *= NEWTON_DAMPING;
            halvings += 1;
        }
        z = trial;
    }
    Err(Error::SolverDiverged(format!(
        "tube flow Newton iteration exceeded {NEWTON_MAX_ITERATIONS} steps"
    )))
}

#[derive(Debug, Clone)]
pub struct TubeFluid {
    config: TubeConfig,
    outlet: Outlet,
    eps_problem: f64,
    committed: Flow,
    last: Option<Flow>,
    last_newton_steps: usize,
}

impl TubeFluid {
    pub fn new(config: TubeConfig, outlet: Outlet, eps_problem: f64) -> Result<Self> {
        config.validate()?;
        if !(eps_problem > 0.0) {
            return Err(Error::Parameter("eps_problem must be positive".into()));
        }
        Ok(TubeFluid {
            committed: Flow::rest(&config),
            config,
            outlet,
            eps_problem,
            last: None,
            last_newton_steps: 0,
        })
    }

    /// Face velocities of the last solve, inlet and outlet included.
    pub fn last_velocity(&self) -> Option<&[f64]> {
        self.last.as_ref().map(|f| f.u.as_slice())
    }

    pub fn last_newton_steps(&self) -> usize {
        self.last_newton_steps
    }

    /// Relative discrete mass-balance defect of the committed step.
    pub fn committed_audit(&self) -> f64 {
        self.committed.audit
    }
}

impl FluidSolver for TubeFluid {
    fn dim(&self) -> usize {
        self.config.cells
    }

    fn solve(&mut self, boundary: &BoundaryData, t: f64, dt: f64) -> Result<FluidResponse> {
        let n = self.config.cells;
        boundary.validate(n)?;
        let (w, wdot, robin) = match boundary {
            BoundaryData::Dirichlet {
                displacement,
                velocity,
            } => (displacement, velocity, None),
            BoundaryData::Robin {
                displacement,
                velocity,
                traction,
                alpha,
            } => (displacement, velocity, Some((traction, *alpha))),
            BoundaryData::Neumann { .. } => {
                return Err(Error::UnsupportedBoundary(
                    "tube fluid takes Dirichlet or Robin data".into(),
                ))
            }
        };
        let cfg = &self.config;
        let radius: Vec<f64> = w.iter().map(|w| cfg.r0 + w).collect();
        if let Some(r) = radius.iter().find(|r| !(**r > 0.0)) {
            return Err(Error::NonPhysical(format!("tube radius {r}")));
        }
        let a: Vec<f64> = radius.iter().map(|r| PI * r * r).collect();
        let (kappa, h) = match robin {
            None => (vec![0.0; n], vec![0.0; n]),
            Some((h, alpha)) => (
                radius.iter().map(|r| 2.0 * PI * r / alpha).collect(),
                h.clone(),
            ),
        };
        let system = FlowSystem {
            n,
            open: self.outlet == Outlet::Open,
            dt,
            dx: cfg.dx(),
            rho: cfg.rho_f,
            friction: 8.0 * PI * cfg.mu_f / cfg.rho_f,
            a_ref: PI * cfg.r0 * cfg.r0,
            af: face_areas(&a),
            af_prev: face_areas(&self.committed.a),
            a: &a,
            a_prev: &self.committed.a,
            u_prev: &self.committed.u,
            u_in: cfg.inlet_velocity(t),
            kappa,
            h,
        };
        let mut z0 = self.committed.p.clone();
        z0.extend_from_slice(&self.committed.u[1..=system.face_unknowns()]);
        let (z, steps) = newton(&system, z0, self.eps_problem)?;

        let ev = system.evaluate(&z);
        let defect: f64 = ev.f[..n].iter().sum();
        let scale: f64 = ev.scale[..n].iter().sum();
        let audit = if scale > 0.0 { defect.abs() / scale } else { 0.0 };
        let p = z[..n].to_vec();
        let wall_velocity: Vec<f64> = match robin {
            None => wdot.clone(),
            Some((h, alpha)) => wdot
                .iter()
                .zip(p.iter().zip(h))
                .map(|(v, (p, h))| v + (p - h) / alpha)
                .collect(),
        };
        let flow = Flow {
            u: system.faces(&z),
            p: p.clone(),
            a: a.clone(),
            radius,
            wall_velocity: wall_velocity.clone(),
            audit,
        };
        self.last = Some(flow);
        self.last_newton_steps = steps;
        Ok(FluidResponse {
            traction: p,
            wall_velocity,
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
pub struct TubeStructure {
    ring: RingWall,
    w: Vec<f64>,
    wdot: Vec<f64>,
    trial: Option<(Vec<f64>, Vec<f64>)>,
}

impl TubeStructure {
    pub fn new(ring: RingWall, cells: usize) -> Self {
        TubeStructure {
            ring,
            w: vec![0.0; cells],
            wdot: vec![0.0; cells],
            trial: None,
        }
    }
}

impl StructureSolver for TubeStructure {
    fn dim(&self) -> usize {
        self.w.len()
    }

    fn solve(&mut self, traction: &[f64], _t: f64, dt: f64) -> Result<StructureResponse> {
        crate::densela::check_same_len(traction, &self.w)?;
        let mut w = Vec::with_capacity(self.w.len());
        let mut v = Vec::with_capacity(self.w.len());
        for ((p, wn), vn) in traction.iter().zip(&self.w).zip(&self.wdot) {
            let (wi, vi) = self.ring.step(*p, *wn, *vn, dt)?;
            w.push(wi);
            v.push(vi);
        }
        self.trial = Some((w.clone(), v.clone()));
        Ok(StructureResponse {
            displacement: w,
            velocity: v,
            converged: true,
        })
    }

    fn rate_of(&self, displacement: &[f64], dt: f64) -> Result<Vec<f64>> {
        crate::densela::check_same_len(displacement, &self.w)?;
        Ok(displacement
            .iter()
            .zip(&self.w)
            .map(|(w, wn)| (w - wn) / dt)
            .collect())
    }

    fn commit(&mut self) -> Result<()> {
        let (w, v) = self
            .trial
            .take()
            .ok_or_else(|| Error::Parameter("commit without a solve".into()))?;
        self.w = w;
        self.wdot = v;
        Ok(())
    }

    fn displacement(&self) -> &[f64] {
        &self.w
    }

    fn velocity(&self) -> &[f64] {
        &self.wdot
    }
}

/// Tube fluid and wall, starting at rest.
#[derive(Debug, Clone)]
pub struct TubeProblem {
    config: TubeConfig,
    outlet: Outlet,
    fluid: TubeFluid,
    structure: TubeStructure,
}

impl TubeProblem {
    pub fn new(config: TubeConfig, outlet: Outlet, eps_problem: f64) -> Result<Self> {
        Ok(TubeProblem {
            fluid: TubeFluid::new(config.clone(), outlet, eps_problem)?,
            structure: TubeStructure::new(config.ring()?, config.cells),
            config,
            outlet,
        })
    }

    pub fn config(&self) -> &TubeConfig {
        &self.config
    }

    pub fn outlet(&self) -> Outlet {
        self.outlet
    }

    pub fn fluid(&self) -> &TubeFluid {
        &self.fluid
    }

    /// Committed face velocities.
    pub fn velocity(&self) -> &[f64] {
        &self.fluid.committed.u
    }
}

impl CoupledProblem for TubeProblem {
    fn name(&self) -> &'static str {
        match self.outlet {
            Outlet::Open => "tube1d_open",
            Outlet::Closed => "tube1d_closed",
        }
    }

    fn dim(&self) -> usize {
        self.config.cells
    }

    fn parts(&mut self) -> (&mut dyn FluidSolver, &mut dyn StructureSolver) {
        (&mut self.fluid, &mut self.structure)
    }

    fn initial_traction(&self) -> Vec<f64> {
        vec![0.0; self.config.cells]
    }

    fn initial_volume(&self) -> f64 {
        PI * self.config.r0 * self.config.r0 * self.config.length
    }

    fn interface_sample(&self) -> InterfaceSample {
        let flow = &self.fluid.committed;
        let dx = self.config.dx();
        let af = face_areas(&flow.a);
        let n = self.config.cells;
        InterfaceSample {
            structure_velocity: self.structure.wdot.clone(),
            fluid_velocity: flow.wall_velocity.clone(),
            weights: flow.radius.iter().map(|r| 2.0 * PI * r * dx).collect(),
            net_inflow: af[0] * flow.u[0] - af[n] * flow.u[n],
        }
    }

    fn mass_audit(&self) -> Option<f64> {
        Some(self.fluid.committed.audit)
    }

    fn snapshot(&self) -> (Vec<f64>, Vec<f64>) {
        (self.structure.w.clone(), self.fluid.committed.p.clone())
    }
}
