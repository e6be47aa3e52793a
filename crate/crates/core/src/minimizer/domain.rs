use crate::error::{Error, Result};
use crate::vec3::{dist, Vec3};
use serde::{Deserialize, Serialize};

/// The two admissible balls: radius `eta/4`, centers `eta` apart on the
/// x axis with the point-mass barycenter at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainPair {
    pub m: f64,
    pub eta: f64,
    pub center_planet: Vec3,
    pub center_star: Vec3,
    pub ball_radius: f64,
}

/// `eta = J^2 / mu^2` with `mu = m (1 - m)`.
pub fn separation(j: f64, m: f64) -> f64 {
    let mu = m * (1.0 - m);
    j * j / (mu * mu)
}

pub fn make_domains(j: f64, m: f64) -> Result<DomainPair> {
    if !(j.is_finite() && j > 0.0) {
        return Err(Error::domain(format!("J must be positive, got {j}")));
    }
    if !(m > 0.0 && m < 1.0) {
        return Err(Error::domain(format!("m must lie in (0, 1), got {m}")));
    }
    let eta = separation(j, m);
    if !eta.is_finite() {
        return Err(Error::domain("separation overflows"));
    }
    Ok(DomainPair {
        m,
        eta,
        center_planet: [(1.0 - m) * eta, 0.0, 0.0],
        center_star: [-m * eta, 0.0, 0.0],
        ball_radius: eta / 4.0,
    })
}

impl DomainPair {
    /// Gap between the two balls, `eta/2`.
    pub fn dist(&self) -> f64 {
        dist(self.center_planet, self.center_star) - 2.0 * self.ball_radius
    }

    /// Diameter of the union, `3 eta / 2`.
    pub fn diam(&self) -> f64 {
        dist(self.center_planet, self.center_star) + 2.0 * self.ball_radius
    }

    /// Density of the uniform ball of radius `eta/8` that holds mass `m`.
    pub fn uniform_seed_density(&self, mass: f64) -> f64 {
        384.0 * mass / (std::f64::consts::PI * self.eta.powi(3))
    }

    /// Smallest cap for which the admissible class is non-empty.
    pub fn nonempty_cap_threshold(&self) -> f64 {
        384.0 / (std::f64::consts::PI * self.eta.powi(3))
    }
}
