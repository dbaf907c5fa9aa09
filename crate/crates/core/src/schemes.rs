//! Coupling loops for the partitioned schemes and the time loop around them.
//!
//! The fluid and structure solvers are black boxes behind [`FluidSolver`] and
//! [`StructureSolver`]. A solve call never advances time; [`FluidSolver::commit`]
//! and [`StructureSolver::commit`] accept the last solution once the coupling
//! iteration has converged.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::accel::{residual, Accelerator, UpdateStrategy};
use crate::densela::{all_finite, norm2, sub};
use crate::error::{Error, Result};
use crate::metrics::{artificial_flux_rate, FluxAccumulator, IterationStats};

/// Lower bound of the denominator in relative norms.
pub const RELATIVE_FLOOR: f64 = 1e-12;

/// Interface condition handed to the fluid solver, or the load handed to the structure.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryData {
    /// Prescribed wall motion.
    Dirichlet {
        displacement: Vec<f64>,
        velocity: Vec<f64>,
    },
    Neumann { traction: Vec<f64> },
    /// `T_f n = T_s n + alpha (u_s - u_f)` with the structure traction taken
    /// from the previous iterate. The displacement fixes the wall geometry.
    Robin {
        displacement: Vec<f64>,
        velocity: Vec<f64>,
        traction: Vec<f64>,
        alpha: f64,
    },
}

impl BoundaryData {
    pub fn kind(&self) -> &'static str {
        match self {
            BoundaryData::Dirichlet { .. } => "dirichlet",
            BoundaryData::Neumann { .. } => "neumann",
            BoundaryData::Robin { .. } => "robin",
        }
    }

    /// Checks payload lengths against `dim` and the sign of `alpha`.
    pub fn validate(&self, dim: usize) -> Result<()> {
        let lens: Vec<usize> = match self {
            BoundaryData::Dirichlet {
                displacement,
                velocity,
            } => vec![displacement.len(), velocity.len()],
            BoundaryData::Neumann { traction } => vec![traction.len()],
            BoundaryData::Robin {
                displacement,
                velocity,
                traction,
                alpha,
            } => {
                if !(*alpha > 0.0) || !alpha.is_finite() {
                    return Err(Error::Parameter(format!(
                        "Robin parameter must be positive, got {alpha}"
                    )));
                }
                vec![displacement.len(), velocity.len(), traction.len()]
            }
        };
        if lens.iter().any(|&l| l != dim) {
            return Err(Error::Dimension(format!(
                "{} data of lengths {lens:?} for interface dimension {dim}",
                self.kind()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FluidResponse {
    /// Load the fluid exerts on the wall (pressure-like, positive outward).
    pub traction: Vec<f64>,
    /// Normal velocity of the fluid at the wall.
    pub wall_velocity: Vec<f64>,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StructureResponse {
    pub displacement: Vec<f64>,
    pub velocity: Vec<f64>,
    pub converged: bool,
}

pub trait FluidSolver: Send {
    fn dim(&self) -> usize;

    /// Solves the fluid subproblem of the step ending at `t` from the last
    /// committed state.
    fn solve(&mut self, boundary: &BoundaryData, t: f64, dt: f64) -> Result<FluidResponse>;

    /// Accepts the last solution as the state at the end of the step.
    fn commit(&mut self) -> Result<()>;
}

pub trait StructureSolver: Send {
    fn dim(&self) -> usize;

    fn solve(&mut self, traction: &[f64], t: f64, dt: f64) -> Result<StructureResponse>;

    /// Wall velocity implied by reaching `displacement` at the end of the step.
    fn rate_of(&self, displacement: &[f64], dt: f64) -> Result<Vec<f64>>;

    fn commit(&mut self) -> Result<()>;

    /// Committed interface displacement.
    fn displacement(&self) -> &[f64];

    /// Committed interface velocity.
    fn velocity(&self) -> &[f64];
}

/// Interface quantities of the committed state used by the diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct InterfaceSample {
    pub structure_velocity: Vec<f64>,
    pub fluid_velocity: Vec<f64>,
    /// Quadrature weights of the wall (its measure per node).
    pub weights: Vec<f64>,
    /// Physical inflow minus outflow through the non-wall boundaries.
    pub net_inflow: f64,
}

/// A coupled problem: a fluid and a structure sharing one interface.
pub trait CoupledProblem: Send {
    fn name(&self) -> &'static str;

    fn dim(&self) -> usize;

    fn parts(&mut self) -> (&mut dyn FluidSolver, &mut dyn StructureSolver);

    /// Interface traction of the initial state.
    fn initial_traction(&self) -> Vec<f64>;

    /// Fluid volume of the initial state.
    fn initial_volume(&self) -> f64;

    fn interface_sample(&self) -> InterfaceSample;

    /// Relative discrete mass-balance defect of the last committed step, for
    /// models that track it.
    fn mass_audit(&self) -> Option<f64> {
        None
    }

    /// Committed `(displacement, traction)` for trajectory output.
    fn snapshot(&self) -> (Vec<f64>, Vec<f64>);
}

/// Stopping rules of the coupling loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceConfig {
    pub eps_coupling: f64,
    pub eps_problem: f64,
    pub max_coupling_iterations: usize,
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        ConvergenceConfig {
            eps_coupling: 1e-6,
            eps_problem: 1e-10,
            max_coupling_iterations: 500,
        }
    }
}

impl ConvergenceConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps_coupling > 0.0) || !(self.eps_problem > 0.0) {
            return Err(Error::Parameter("tolerances must be positive".into()));
        }
        if self.max_coupling_iterations == 0 {
            return Err(Error::Parameter("at least one coupling iteration".into()));
        }
        Ok(())
    }
}

/// Loop state after evaluating iteration `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingState {
    pub k: usize,
    pub x_in: Vec<f64>,
    pub x_out_raw: Vec<f64>,
    pub residual_norm_rel: f64,
    /// Relative change of the field that is not updated.
    pub secondary_change_rel: f64,
    pub criterion_i_met: bool,
    pub criterion_ii_met: bool,
}

impl CouplingState {
    pub fn new(
        k: usize,
        x_in: Vec<f64>,
        x_out_raw: Vec<f64>,
        secondary_change_rel: f64,
        eps_coupling: f64,
    ) -> Result<Self> {
        let r = residual(&x_out_raw, &x_in)?;
        let residual_norm_rel = relative_norm(&r, &x_out_raw);
        Ok(CouplingState {
            k,
            criterion_i_met: residual_norm_rel <= eps_coupling
                && secondary_change_rel <= eps_coupling,
            x_in,
            x_out_raw,
            residual_norm_rel,
            secondary_change_rel,
            criterion_ii_met: false,
        })
    }
}

/// `|a| / max(|reference|, floor)`; infinite when either norm overflows,
/// so an exploding iterate never looks converged.
pub fn relative_norm(a: &[f64], reference: &[f64]) -> f64 {
    let (num, den) = (norm2(a), norm2(reference));
    if !num.is_finite() || !den.is_finite() {
        return f64::INFINITY;
    }
    num / den.max(RELATIVE_FLOOR)
}

/// Both criteria: relative changes below `eps_coupling` and both
/// subproblems converged. Records the outcome in `state`.
pub fn check_convergence(
    state: &mut CouplingState,
    config: &ConvergenceConfig,
    fluid_converged: bool,
    structure_converged: bool,
) -> bool {
    state.criterion_i_met = state.residual_norm_rel <= config.eps_coupling
        && state.secondary_change_rel <= config.eps_coupling;
    state.criterion_ii_met = fluid_converged && structure_converged;
    state.criterion_i_met && state.criterion_ii_met
}

/// Diagnostics of one coupling iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub k: usize,
    pub residual_norm: f64,
    pub residual_norm_rel: f64,
    pub secondary_change_rel: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_norm: Option<f64>,
    pub filtered: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeStepReport {
    pub step: usize,
    pub time: f64,
    /// Fluid solver calls.
    pub iterations: usize,
    pub records: Vec<IterationRecord>,
    /// Loop inputs `x^k`, when requested.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub iterates: Vec<Vec<f64>>,
    /// Converged updated field.
    pub interface: Vec<f64>,
    /// Converged field that is not updated.
    pub secondary: Vec<f64>,
}

/// Interface fields carried from one time step to the next.
#[derive(Debug, Clone, PartialEq)]
pub struct StepSeed {
    pub displacement: Vec<f64>,
    pub traction: Vec<f64>,
}

/// Per-step time context and bookkeeping switches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepContext {
    pub step: usize,
    pub time: f64,
    pub dt: f64,
    pub keep_iterates: bool,
}

struct Evaluation {
    output: Vec<f64>,
    secondary: Vec<f64>,
    fluid_converged: bool,
    structure_converged: bool,
}

/// Runs `x^{k+1} = U(x~^k)` until convergence. `secondary_prev` seeds the
/// change test of the field that is not updated.
fn coupling_loop<E>(
    x0: Vec<f64>,
    secondary_prev: &[f64],
    update: &mut dyn Accelerator,
    config: &ConvergenceConfig,
    ctx: StepContext,
    mut evaluate: E,
) -> Result<TimeStepReport>
where
    E: FnMut(&[f64]) -> Result<Evaluation>,
{
    let mut x = x0;
    let mut secondary_prev = secondary_prev.to_vec();
    let mut records = Vec::new();
    let mut iterates = Vec::new();
    let mut last_rel = f64::INFINITY;
    for k in 1..=config.max_coupling_iterations {
        if ctx.keep_iterates {
            iterates.push(x.clone());
        }
        let ev = evaluate(&x)?;
        if !all_finite(&ev.output) || !all_finite(&ev.secondary) {
            return Err(Error::NonFinite("solver output"));
        }
        let change = relative_norm(&sub(&ev.secondary, &secondary_prev)?, &ev.secondary);
        let mut state = CouplingState::new(k, x, ev.output, change, config.eps_coupling)?;
        let residual_norm = norm2(&residual(&state.x_out_raw, &state.x_in)?);
        last_rel = state.residual_norm_rel;
        let mut record = IterationRecord {
            k,
            residual_norm,
            residual_norm_rel: state.residual_norm_rel,
            secondary_change_rel: change,
            omega: None,
            alpha_norm: None,
            filtered: 0,
        };
        if check_convergence(&mut state, config, ev.fluid_converged, ev.structure_converged) {
            update.record_converged(&state.x_in, &state.x_out_raw, k)?;
            update.end_time_step()?;
            records.push(record);
            return Ok(TimeStepReport {
                step: ctx.step,
                time: ctx.time,
                iterations: k,
                records,
                iterates,
                interface: state.x_out_raw,
                secondary: ev.secondary,
            });
        }
        let out = update.update(&state.x_in, &state.x_out_raw, k)?;
        if !all_finite(&out.next) {
            return Err(Error::NonFinite("updated interface field"));
        }
        record.omega = out.omega;
        record.alpha_norm = out.alpha_norm;
        record.filtered = out.filtered;
        records.push(record);
        x = out.next;
        secondary_prev = ev.secondary;
    }
    Err(Error::MaxIterationsExceeded {
        iterations: config.max_coupling_iterations,
        residual: last_rel,
    })
}

/// Dirichlet-Neumann loop on the displacement: `h = F(d)`, `d~ = S(h)`,
/// `d <- U(d~)`. With a quasi-Newton update this is DN-QN(S).
///
/// The first iterate continues the committed wall motion,
/// `d^1 = d^n + dt d'^n`; `seed.displacement` is not read.
pub fn run_dn_step(
    fluid: &mut dyn FluidSolver,
    structure: &mut dyn StructureSolver,
    update: &mut dyn Accelerator,
    seed: &mut StepSeed,
    config: &ConvergenceConfig,
    ctx: StepContext,
) -> Result<TimeStepReport> {
    let (t, dt) = (ctx.time, ctx.dt);
    let x0: Vec<f64> = structure
        .displacement()
        .iter()
        .zip(structure.velocity())
        .map(|(d, v)| d + dt * v)
        .collect();
    let report = coupling_loop(
        x0,
        &seed.traction,
        update,
        config,
        ctx,
        |d| {
            let velocity = structure.rate_of(d, dt)?;
            let f = fluid.solve(
                &BoundaryData::Dirichlet {
                    displacement: d.to_vec(),
                    velocity,
                },
                t,
                dt,
            )?;
            let s = structure.solve(&f.traction, t, dt)?;
            Ok(Evaluation {
                output: s.displacement,
                secondary: f.traction,
                fluid_converged: f.converged,
                structure_converged: s.converged,
            })
        },
    )?;
    fluid.commit()?;
    structure.commit()?;
    seed.displacement = report.interface.clone();
    seed.traction = report.secondary.clone();
    Ok(report)
}

/// Loop on the fluid load: `d = S(h)`, `h~ = F(d)` with Dirichlet data,
/// `h <- U(h~)`. This is DN-QN(F).
pub fn run_dn_forces_step(
    fluid: &mut dyn FluidSolver,
    structure: &mut dyn StructureSolver,
    update: &mut dyn Accelerator,
    seed: &mut StepSeed,
    config: &ConvergenceConfig,
    ctx: StepContext,
) -> Result<TimeStepReport> {
    traction_step(fluid, structure, None, update, seed, config, ctx)
}

/// Robin-Neumann loop: `d = S(h)`, `h~ = F(Robin(d', h, alpha))`,
/// `h <- U(h~)`. [`crate::accel::NoUpdate`] gives plain RN, a quasi-Newton
/// update gives RN-QN.
pub fn run_rn_step(
    fluid: &mut dyn FluidSolver,
    structure: &mut dyn StructureSolver,
    robin_parameter: f64,
    update: &mut dyn Accelerator,
    seed: &mut StepSeed,
    config: &ConvergenceConfig,
    ctx: StepContext,
) -> Result<TimeStepReport> {
    if !(robin_parameter > 0.0) || !robin_parameter.is_finite() {
        return Err(Error::Parameter(format!(
            "Robin parameter must be positive, got {robin_parameter}"
        )));
    }
    traction_step(fluid, structure, Some(robin_parameter), update, seed, config, ctx)
}

fn traction_step(
    fluid: &mut dyn FluidSolver,
    structure: &mut dyn StructureSolver,
    robin: Option<f64>,
    update: &mut dyn Accelerator,
    seed: &mut StepSeed,
    config: &ConvergenceConfig,
    ctx: StepContext,
) -> Result<TimeStepReport> {
    let (t, dt) = (ctx.time, ctx.dt);
    let report = coupling_loop(
        seed.traction.clone(),
        &seed.displacement,
        update,
        config,
        ctx,
        |h| {
            let s = structure.solve(h, t, dt)?;
            let boundary = match robin {
                None => BoundaryData::Dirichlet {
                    displacement: s.displacement.clone(),
                    velocity: s.velocity,
                },
                Some(alpha) => BoundaryData::Robin {
                    displacement: s.displacement.clone(),
                    velocity: s.velocity,
                    traction: h.to_vec(),
                    alpha,
                },
            };
            let f = fluid.solve(&boundary, t, dt)?;
            Ok(Evaluation {
                output: f.traction,
                secondary: s.displacement,
                fluid_converged: f.converged,
                structure_converged: s.converged,
            })
        },
    )?;
    fluid.commit()?;
    structure.commit()?;
    seed.traction = report.interface.clone();
    seed.displacement = report.secondary.clone();
    Ok(report)
}

/// The partitioned algorithms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Dn,
    DnQnS,
    DnQnF,
    Rn,
    RnQn,
}

impl Scheme {
    pub const ALL: [Scheme; 5] = [
        Scheme::Dn,
        Scheme::DnQnS,
        Scheme::DnQnF,
        Scheme::Rn,
        Scheme::RnQn,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Dn => "dn",
            Scheme::DnQnS => "dn_qn_s",
            Scheme::DnQnF => "dn_qn_f",
            Scheme::Rn => "rn",
            Scheme::RnQn => "rn_qn",
        }
    }

    pub fn uses_robin(self) -> bool {
        matches!(self, Scheme::Rn | Scheme::RnQn)
    }

    /// Checks the scheme/update pairing and the Robin parameter.
    pub fn check_compatible(self, update: &UpdateStrategy, robin: Option<f64>) -> Result<()> {
        match (self, update) {
            (Scheme::Rn, u) if *u != UpdateStrategy::None => {
                return Err(Error::config("update", "scheme rn takes no update"));
            }
            (Scheme::DnQnS | Scheme::DnQnF | Scheme::RnQn, UpdateStrategy::None) => {
                return Err(Error::config(
                    "update",
                    format!("scheme {} needs an update strategy", self.name()),
                ));
            }
            _ => {}
        }
        match (self.uses_robin(), robin) {
            (true, None) => Err(Error::config(
                "robin_parameter",
                format!("required by scheme {}", self.name()),
            )),
            (true, Some(a)) if !(a > 0.0) || !a.is_finite() => {
                Err(Error::config("robin_parameter", "must be positive"))
            }
            (false, Some(_)) => Err(Error::config(
                "robin_parameter",
                format!("not used by scheme {}", self.name()),
            )),
            _ => Ok(()),
        }
    }
}

/// How a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Termination {
    Completed,
    Diverged { step: usize },
    Dilemma { step: usize },
}

impl Termination {
    pub fn label(&self) -> &'static str {
        match self {
            Termination::Completed => "completed",
            Termination::Diverged { .. } => "diverged",
            Termination::Dilemma { .. } => "dilemma",
        }
    }

    pub fn is_completed(&self) -> bool {
        matches!(self, Termination::Completed)
    }
}

/// Committed interface fields at one time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub step: usize,
    pub time: f64,
    pub displacement: Vec<f64>,
    pub traction: Vec<f64>,
}

/// Time-loop settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationSettings {
    pub scheme: Scheme,
    pub robin_parameter: Option<f64>,
    pub convergence: ConvergenceConfig,
    pub n_steps: usize,
    pub dt: f64,
    /// Trajectory sampling stride in steps, plus the final step; 0 disables
    /// sampling.
    pub sample_stride: usize,
    /// Number of leading steps whose loop inputs are stored.
    pub keep_iterates_steps: usize,
}

/// Everything a run produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationResult {
    pub problem: String,
    pub scheme: Scheme,
    pub update: UpdateStrategy,
    pub robin_parameter: Option<f64>,
    pub termination: Termination,
    /// Error message of the failing step.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
    pub iterations: IterationStats,
    pub eps_rel: f64,
    /// Relative mass-balance defect per committed step, where tracked.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub mass_audit: Vec<f64>,
    pub steps: Vec<TimeStepReport>,
    pub trajectory: Vec<TrajectorySample>,
    pub wall_clock_seconds: f64,
}

impl SimulationResult {
    pub fn mean_iterations(&self) -> Option<f64> {
        self.termination
            .is_completed()
            .then_some(self.iterations.mean)
    }
}

fn classify(err: &Error, step: usize) -> Option<Termination> {
    match err {
        Error::IncompressibilityDilemma(_) => Some(Termination::Dilemma { step }),
        Error::MaxIterationsExceeded { .. }
        | Error::NonPhysical(_)
        | Error::NonFinite(_)
        | Error::SolverDiverged(_) => Some(Termination::Diverged { step }),
        _ => None,
    }
}

/// Advances `problem` by `settings.n_steps` committed time steps.
///
/// Failures of the coupled problem end the run with a `Diverged` or
/// `Dilemma` termination; misuse (bad parameters, unsupported boundary
/// data) is returned as an error.
pub fn run_simulation(
    problem: &mut dyn CoupledProblem,
    update: &UpdateStrategy,
    settings: &SimulationSettings,
) -> Result<SimulationResult> {
    if settings.n_steps == 0 {
        return Err(Error::Parameter("n_steps must be at least 1".into()));
    }
    if !(settings.dt > 0.0) || !settings.dt.is_finite() {
        return Err(Error::Parameter(format!("dt must be positive, got {}", settings.dt)));
    }
    settings.convergence.validate()?;
    settings
        .scheme
        .check_compatible(update, settings.robin_parameter)?;

    let clock = Instant::now();
    let dim = problem.dim();
    let mut accel = update.build(dim)?;
    let mut seed = {
        let (_, structure) = problem.parts();
        StepSeed {
            displacement: structure.displacement().to_vec(),
            traction: Vec::new(),
        }
    };
    seed.traction = problem.initial_traction();
    let mut flux = FluxAccumulator::new(problem.initial_volume())?;
    let mut steps = Vec::with_capacity(settings.n_steps);
    let mut trajectory = Vec::new();
    let mut mass_audit = Vec::new();
    let mut termination = Termination::Completed;
    let mut failure = None;

    if settings.sample_stride > 0 {
        let (displacement, traction) = problem.snapshot();
        trajectory.push(TrajectorySample {
            step: 0,
            time: 0.0,
            displacement,
            traction,
        });
    }

    for step in 1..=settings.n_steps {
        let ctx = StepContext {
            step,
            time: step as f64 * settings.dt,
            dt: settings.dt,
            keep_iterates: step <= settings.keep_iterates_steps,
        };
        let cfg = &settings.convergence;
        let outcome = {
            let (fluid, structure) = problem.parts();
            match settings.scheme {
                Scheme::Dn | Scheme::DnQnS => {
                    run_dn_step(fluid, structure, accel.as_mut(), &mut seed, cfg, ctx)
                }
                Scheme::DnQnF => {
                    run_dn_forces_step(fluid, structure, accel.as_mut(), &mut seed, cfg, ctx)
                }
                Scheme::Rn | Scheme::RnQn => run_rn_step(
                    fluid,
                    structure,
                    settings.robin_parameter.unwrap_or_default(),
                    accel.as_mut(),
                    &mut seed,
                    cfg,
                    ctx,
                ),
            }
        };
        let report = match outcome {
            Ok(r) => r,
            Err(e) => match classify(&e, step) {
                Some(t) => {
                    termination = t;
                    failure = Some(e.to_string());
                    break;
                }
                None => return Err(e),
            },
        };
        steps.push(report);

        let sample = problem.interface_sample();
        let rate = artificial_flux_rate(
            &sample.structure_velocity,
            &sample.fluid_velocity,
            &sample.weights,
        )?;
        let signed: f64 = sample
            .weights
            .iter()
            .zip(sample.structure_velocity.iter().zip(&sample.fluid_velocity))
            .map(|(w, (us, uf))| w * (us - uf))
            .sum();
        if let Err(e) = flux.accumulate(rate, sample.net_inflow + signed, settings.dt) {
            termination = Termination::Diverged { step };
            failure = Some(e.to_string());
            break;
        }
        if let Some(defect) = problem.mass_audit() {
            mass_audit.push(defect);
        }
        let last = step == settings.n_steps;
        if settings.sample_stride > 0 && (step % settings.sample_stride == 0 || last) {
            let (displacement, traction) = problem.snapshot();
            trajectory.push(TrajectorySample {
                step,
                time: ctx.time,
                displacement,
                traction,
            });
        }
    }

    let per_step: Vec<usize> = steps.iter().map(|s| s.iterations).collect();
    Ok(SimulationResult {
        problem: problem.name().to_string(),
        scheme: settings.scheme,
        update: update.clone(),
        robin_parameter: settings.robin_parameter,
        termination,
        failure,
        iterations: IterationStats::from_counts(per_step),
        eps_rel: flux.eps_rel(),
        mass_audit,
        steps,
        trajectory,
        wall_clock_seconds: clock.elapsed().as_secs_f64(),
    })
}
