use crate::error::{Error, Result};

/// Massive elastic ring, `m w'' + k w = p` per unit wall area, integrated
/// with backward Euler.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RingWall {
    /// `rho_s s`
    pub mass: f64,
    /// Hoop stiffness `E_s s / R0^2`.
    pub stiffness: f64,
    pub r0: f64,
}

impl RingWall {
    pub fn new(rho_s: f64, thickness: f64, e_s: f64, r0: f64) -> Result<Self> {
        for (name, v) in [("rho_s", rho_s), ("thickness", thickness), ("e_s", e_s), ("r0", r0)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Parameter(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(RingWall {
            mass: rho_s * thickness,
            stiffness: e_s * thickness / (r0 * r0),
            r0,
        })
    }

    /// Solves `m (w - w_n - dt w'_n) / dt^2 + k w = p` together with
    /// `w' = (w - w_n) / dt`.
    pub fn step(&self, p: f64, w_prev: f64, wdot_prev: f64, dt: f64) -> Result<(f64, f64)> {
        let m_dt2 = self.mass / (dt * dt);
        let w = (p + m_dt2 * w_prev + self.mass * wdot_prev / dt) / (m_dt2 + self.stiffness);
        if !w.is_finite() {
            return Err(Error::NonFinite("ring displacement"));
        }
        if self.r0 + w <= 0.0 {
            return Err(Error::NonPhysical(format!(
                "wall radius {} is not positive",
                self.r0 + w
            )));
        }
        Ok((w, (w - w_prev) / dt))
    }

    /// Derivative of the end-of-step velocity with respect to the load.
    pub fn velocity_compliance(&self, dt: f64) -> f64 {
        1.0 / (self.mass / dt + self.stiffness * dt)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring() -> RingWall {
        RingWall::new(1000.0, 0.02, 1.4e6, 0.28).unwrap()
    }

    #[test]
    fn rest_is_equilibrium() {
        assert_eq!(ring().step(0.0, 0.0, 0.0, 0.01).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn constant_load_settles_at_static_deflection() {
        let r = ring();
        let p = 500.0;
        let (mut w, mut v) = (0.0, 0.0);
        for _ in 0..20_000 {
            (w, v) = r.step(p, w, v, 0.01).unwrap();
        }
        assert!((r.stiffness * w - p).abs() < 1e-9 * p);
    }

    #[test]
    fn positive_load_pushes_outward() {
        let (w, v) = ring().step(10.0, 0.0, 0.0, 0.01).unwrap();
        assert!(w > 0.0 && v > 0.0);
        // direct 2x2 elimination
        let r = ring();
        let expect = 10.0 / (r.mass / 1e-4 + r.stiffness);
        assert!((w - expect).abs() < 1e-18);
    }

    #[test]
    fn collapse_is_rejected() {
        assert!(matches!(ring().step(-1e12, 0.0, 0.0, 0.01), Err(Error::NonPhysical(_))));
    }

    #[test]
    fn compliance_matches_difference_quotient() {
        let r = ring();
        let (_, v1) = r.step(1.0, 0.01, 0.2, 0.01).unwrap();
        let (_, v0) = r.step(0.0, 0.01, 0.2, 0.01).unwrap();
        assert!(((v1 - v0) - r.velocity_compliance(0.01)).abs() < 1e-15);
    }
}
