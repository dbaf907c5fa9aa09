//! Affine fluid and structure maps, `F(d) = A_f d + b_f` and
//! `S(h) = A_s h + b_s`, whose coupled fixed point is known in closed form.

use crate::densela::{check_same_len, Matrix};
use crate::error::{Error, Result};
use crate::schemes::{
    BoundaryData, CoupledProblem, FluidResponse, FluidSolver, InterfaceSample, StructureResponse,
    StructureSolver,
};

#[derive(Debug, Clone)]
pub struct AffineFluid {
    a: Matrix,
    b: Vec<f64>,
    last_velocity: Vec<f64>,
    committed_velocity: Vec<f64>,
    last_traction: Vec<f64>,
    committed_traction: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct AffineStructure {
    a: Matrix,
    b: Vec<f64>,
    displacement: Vec<f64>,
    velocity: Vec<f64>,
    trial: Option<StructureResponse>,
}

/// Coupled affine maps; state starts at `d = 0`.
#[derive(Debug, Clone)]
pub struct AffineProblem {
    fluid: AffineFluid,
    structure: AffineStructure,
}

fn check_square(a: &Matrix, b: &[f64], name: &str) -> Result<()> {
    if a.rows() != a.cols() || a.rows() != b.len() || b.is_empty() {
        return Err(Error::Dimension(format!(
            "{name}: {}x{} matrix with offset of length {}",
            a.rows(),
            a.cols(),
            b.len()
        )));
    }
    if !a.is_finite() || !crate::densela::all_finite(b) {
        return Err(Error::NonFinite("affine map"));
    }
    Ok(())
}

impl AffineProblem {
    pub fn new(a_s: Matrix, a_f: Matrix, b_s: Vec<f64>, b_f: Vec<f64>) -> Result<Self> {
        check_square(&a_s, &b_s, "structure map")?;
        check_square(&a_f, &b_f, "fluid map")?;
        check_same_len(&b_s, &b_f)?;
        let m = b_s.len();
        Ok(AffineProblem {
            fluid: AffineFluid {
                a: a_f,
                last_traction: b_f.clone(),
                committed_traction: b_f.clone(),
                b: b_f,
                last_velocity: vec![0.0; m],
                committed_velocity: vec![0.0; m],
            },
            structure: AffineStructure {
                a: a_s,
                b: b_s,
                displacement: vec![0.0; m],
                velocity: vec![0.0; m],
                trial: None,
            },
        })
    }

    pub fn structure_map(&self) -> (&Matrix, &[f64]) {
        (&self.structure.a, &self.structure.b)
    }

    pub fn fluid_map(&self) -> (&Matrix, &[f64]) {
        (&self.fluid.a, &self.fluid.b)
    }
}

impl FluidSolver for AffineFluid {
    fn dim(&self) -> usize {
        self.b.len()
    }

    fn solve(&mut self, boundary: &BoundaryData, _t: f64, _dt: f64) -> Result<FluidResponse> {
        boundary.validate(self.dim())?;
        let BoundaryData::Dirichlet {
            displacement,
            velocity,
        } = boundary
        else {
            return Err(Error::UnsupportedBoundary(format!(
                "affine fluid takes Dirichlet data, got {}",
                boundary.kind()
            )));
        };
        let mut traction = self.a.mul_vec(displacement)?;
        for (t, b) in traction.iter_mut().zip(&self.b) {
            *t += b;
        }
        self.last_velocity = velocity.clone();
        self.last_traction = traction.clone();
        Ok(FluidResponse {
            traction,
            wall_velocity: velocity.clone(),
            converged: true,
        })
    }

    fn commit(&mut self) -> Result<()> {
        self.committed_velocity = self.last_velocity.clone();
        self.committed_traction = self.last_traction.clone();
        Ok(())
    }
}

impl StructureSolver for AffineStructure {
    fn dim(&self) -> usize {
        self.b.len()
    }

    fn solve(&mut self, traction: &[f64], _t: f64, dt: f64) -> Result<StructureResponse> {
        let mut displacement = self.a.mul_vec(traction)?;
        for (d, b) in displacement.iter_mut().zip(&self.b) {
            *d += b;
        }
        let velocity = self.rate_of(&displacement, dt)?;
        let out = StructureResponse {
            displacement,
            velocity,
            converged: true,
        };
        self.trial = Some(out.clone());
        Ok(out)
    }

    /// The maps are static, so the wall never moves in time.
    fn rate_of(&self, displacement: &[f64], _dt: f64) -> Result<Vec<f64>> {
        check_same_len(displacement, &self.displacement)?;
        Ok(vec![0.0; displacement.len()])
    }

    fn commit(&mut self) -> Result<()> {
        let trial = self
            .trial
            .take()
            .ok_or_else(|| Error::Parameter("commit without a solve".into()))?;
        self.displacement = trial.displacement;
        self.velocity = trial.velocity;
        Ok(())
    }

    fn displacement(&self) -> &[f64] {
        &self.displacement
    }

    fn velocity(&self) -> &[f64] {
        &self.velocity
    }
}

impl CoupledProblem for AffineProblem {
    fn name(&self) -> &'static str {
        "affine"
    }

    fn dim(&self) -> usize {
        self.structure.b.len()
    }

    fn parts(&mut self) -> (&mut dyn FluidSolver, &mut dyn StructureSolver) {
        (&mut self.fluid, &mut self.structure)
    }

    fn initial_traction(&self) -> Vec<f64> {
        self.fluid.b.clone()
    }

    fn initial_volume(&self) -> f64 {
        1.0
    }

    fn interface_sample(&self) -> InterfaceSample {
        let m = self.dim();
        InterfaceSample {
            structure_velocity: self.structure.velocity.clone(),
            fluid_velocity: self.fluid.committed_velocity.clone(),
            weights: vec![1.0; m],
            net_inflow: 0.0,
        }
    }

    fn snapshot(&self) -> (Vec<f64>, Vec<f64>) {
        (
            self.structure.displacement.clone(),
            self.fluid.committed_traction.clone(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn solve_pair(p: &mut AffineProblem, d: &[f64], h: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let (f, s) = p.parts();
        let bc = BoundaryData::Dirichlet {
            displacement: d.to_vec(),
            velocity: vec![0.0; d.len()],
        };
        (
            f.solve(&bc, 1.0, 1.0).unwrap().traction,
            s.solve(h, 1.0, 1.0).unwrap().displacement,
        )
    }

    #[test]
    fn zero_matrix_returns_offset() {
        let mut p = AffineProblem::new(
            Matrix::zeros(2, 2),
            Matrix::zeros(2, 2),
            vec![1.0, 2.0],
            vec![3.0, 4.0],
        )
        .unwrap();
        let (h, d) = solve_pair(&mut p, &[9.0, 9.0], &[7.0, 7.0]);
        assert_eq!(h, vec![3.0, 4.0]);
        assert_eq!(d, vec![1.0, 2.0]);
    }

    #[test]
    fn identity_maps() {
        let mut p =
            AffineProblem::new(Matrix::identity(2), Matrix::identity(2), vec![0.0; 2], vec![0.0; 2])
                .unwrap();
        let (h, d) = solve_pair(&mut p, &[1.5, -2.0], &[0.5, 3.0]);
        assert_eq!(h, vec![1.5, -2.0]);
        assert_eq!(d, vec![0.5, 3.0]);
    }

    #[test]
    fn robin_and_neumann_rejected() {
        let mut p =
            AffineProblem::new(Matrix::identity(1), Matrix::identity(1), vec![0.0], vec![0.0])
                .unwrap();
        let (f, _) = p.parts();
        let bc = BoundaryData::Neumann {
            traction: vec![1.0],
        };
        assert!(matches!(f.solve(&bc, 0.0, 1.0), Err(Error::UnsupportedBoundary(_))));
    }

    #[test]
    fn shape_checks() {
        assert!(AffineProblem::new(Matrix::zeros(2, 3), Matrix::zeros(2, 2), vec![0.0; 2], vec![0.0; 2])
            .is_err());
        assert!(AffineProblem::new(Matrix::zeros(2, 2), Matrix::zeros(3, 3), vec![0.0; 2], vec![0.0; 3])
            .is_err());
    }
}
