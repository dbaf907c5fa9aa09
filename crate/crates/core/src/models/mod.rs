//! Reduced solvers: an affine oracle problem, a 0-D inflating balloon and a
//! 1-D flexible tube.

pub mod affine;
pub mod balloon;
pub mod ring;
pub mod tube;

pub use affine::AffineProblem;
pub use balloon::{BalloonConfig, BalloonProblem};
pub use ring::RingWall;
pub use tube::{Outlet, TubeConfig, TubeProblem};
