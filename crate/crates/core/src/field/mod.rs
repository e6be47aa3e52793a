//! Densities on uniform grids, their Newtonian potential, and the energy,
//! inertia and center-of-mass functionals, including the two-patch layout
//! used for widely separated bodies.

mod fft;
mod grid;
mod kernel;
mod multipole;
mod patch;

pub use grid::{GridDensity, GridField, Geometry};
pub use kernel::self_cell_integral;
pub use multipole::{potential_at_external, FarField, Multipole};
pub use patch::{Label, Patch, PatchSystem, SystemPotential};

pub(crate) use grid::grid_sum;
pub(crate) use kernel::unit_kernel;

use crate::eos::PolytropicEos;
use crate::error::{Error, Result};
use crate::vec3::{axial_r2, sub, Vec3};
use fft::Convolver;
use serde::{Deserialize, Serialize};

/// Constant of the sup bound `|V| <= k |rho|_1^{2/3} |rho|_inf^{1/3}`,
/// `k = (3/2)(4 pi)^{1/3}`.
pub fn potential_bound_constant() -> f64 {
    1.5 * (4.0 * std::f64::consts::PI).cbrt()
}

/// `k |rho|_1^{2/3} |rho|_inf^{1/3}` for a grid density.
pub fn potential_bound(rho: &GridDensity) -> f64 {
    potential_bound_constant() * rho.mass().cbrt().powi(2) * rho.max_value().cbrt()
}

/// Discrete Newtonian potential `V(x) = sum_y rho(y) w(x - y) h^3` with the
/// cell-averaged kernel and free-space boundaries.
pub fn potential(rho: &GridDensity) -> GridField {
    let g = *rho.geometry();
    if rho.max_value() == 0.0 {
        return GridField::zeros(g);
    }
    let conv = Convolver::for_dims(g.dims);
    let mut out = conv.convolve(rho.values());
    // unit-lattice kernel scales as 1/h, cell volume as h^3
    let s = g.h * g.h;
    out.iter_mut().for_each(|v| *v = (*v * s).max(0.0));
    GridField::new(g, out).expect("geometry preserved")
}

/// `G(sigma, rho) = sum V_sigma rho h^3` for two densities on one lattice.
pub fn interaction(sigma: &GridDensity, rho: &GridDensity) -> Result<f64> {
    if !sigma.geometry().same_lattice(rho.geometry()) {
        return Err(Error::precondition("interaction needs both densities on one lattice"));
    }
    let v = potential(sigma);
    Ok(dot_field(rho, &v))
}

/// `sum rho * field * h^3` in fixed order.
pub(crate) fn dot_field(rho: &GridDensity, field: &GridField) -> f64 {
    let g = rho.geometry();
    let f = field.values();
    g.cell_volume() * grid_sum(g, rho.values(), |idx, v| if v == 0.0 { 0.0 } else { v * f[idx] })
}

/// Internal energy `U = sum A(rho) h^3`.
pub fn internal_energy(rho: &GridDensity, eos: &PolytropicEos) -> f64 {
    let g = rho.geometry();
    g.cell_volume() * grid_sum(g, rho.values(), |_, v| eos.a_unchecked(v))
}

/// Moment of inertia about the axis through the center of mass parallel to
/// `e_z`, and the center of mass.
pub fn moment_of_inertia(rho: &GridDensity) -> Result<(f64, Vec3)> {
    let xbar = rho.center_of_mass()?;
    let g = rho.geometry();
    let i = g.cell_volume()
        * grid_sum(g, rho.values(), |idx, v| {
            if v == 0.0 {
                0.0
            } else {
                v * axial_r2(sub(g.center_of(idx), xbar))
            }
        });
    Ok((i, xbar))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    #[serde(rename = "U")]
    pub u: f64,
    #[serde(rename = "Gself")]
    pub g_self: f64,
    #[serde(rename = "Ginter")]
    pub g_inter: Option<f64>,
    #[serde(rename = "TJ")]
    pub t_j: f64,
    #[serde(rename = "EJ")]
    pub e_j: f64,
    #[serde(rename = "I")]
    pub inertia: f64,
    pub xbar: Vec3,
    pub masses: Vec<f64>,
}

impl EnergyBreakdown {
    pub(crate) fn assemble(u: f64, g_self: f64, g_inter: Option<f64>, j: f64, inertia: f64, xbar: Vec3, masses: Vec<f64>) -> Result<Self> {
        let total: f64 = masses.iter().sum();
        let t_j = if j == 0.0 {
            0.0
        } else {
            if !(total > 0.0 && inertia > 0.0) {
                return Err(Error::precondition("rotational energy needs positive mass and inertia"));
            }
            crate::testing::rotation_sign() * j * j / (2.0 * inertia)
        };
        Ok(Self { u, g_self, g_inter, t_j, e_j: u - 0.5 * g_self + t_j, inertia, xbar, masses })
    }

    /// Non-rotating energy `U - G/2`.
    pub fn e0(&self) -> f64 {
        self.u - 0.5 * self.g_self
    }
}

/// Energy breakdown of a single grid density at angular momentum `j`.
pub fn energies(rho: &GridDensity, j: f64, eos: &PolytropicEos) -> Result<EnergyBreakdown> {
    if !(j.is_finite() && j >= 0.0) {
        return Err(Error::domain(format!("angular momentum must be >= 0, got {j}")));
    }
    let mass = rho.mass();
    if j > 0.0 && mass <= 0.0 {
        return Err(Error::precondition("J > 0 with zero mass leaves I undefined"));
    }
    let v = potential(rho);
    let (inertia, xbar) = if mass > 0.0 { moment_of_inertia(rho)? } else { (0.0, [0.0; 3]) };
    EnergyBreakdown::assemble(internal_energy(rho, eos), dot_field(rho, &v), None, j, inertia, xbar, vec![mass])
}

/// Checks `|f|_r <= |f|_p^a |f|_q^(1-a)` with `1/r = a/p + (1-a)/q`.
/// Use `f64::INFINITY` for the sup norm.
pub fn interpolation_check(rho: &GridDensity, p: f64, r: f64, q: f64) -> Result<bool> {
    if !(p >= 1.0 && p <= r && r <= q) || p.is_infinite() {
        return Err(Error::domain(format!("need 1 <= p <= r <= q, got ({p}, {r}, {q})")));
    }
    if p == q {
        return Ok(true);
    }
    let alpha = if q.is_infinite() { p / r } else { (1.0 / r - 1.0 / q) / (1.0 / p - 1.0 / q) };
    let np = lp_norm(rho, p);
    let nr = lp_norm(rho, r);
    let nq = lp_norm(rho, q);
    let rhs = np.powf(alpha) * nq.powf(1.0 - alpha);
    Ok(nr <= rhs * (1.0 + 1e-12) + f64::MIN_POSITIVE)
}

/// Discrete `L^p` norm; `p = inf` gives the max.
pub fn lp_norm(rho: &GridDensity, p: f64) -> f64 {
    if p.is_infinite() {
        return rho.max_value();
    }
    let g = rho.geometry();
    (g.cell_volume() * grid_sum(g, rho.values(), |_, v| v.powf(p))).powf(1.0 / p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bound_constant() {
        assert!((potential_bound_constant() - 3.487).abs() < 1e-3);
    }

    #[test]
    fn zero_density_has_zero_potential() {
        let g = Geometry::centered(6, 0.2, [0.0; 3]).unwrap();
        let v = potential(&GridDensity::zeros(g));
        assert!(v.values().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn single_cell_far_value() {
        let g = Geometry::new([24, 4, 4], 0.1, [0.0; 3]).unwrap();
        let mut vals = vec![0.0; g.len()];
        vals[g.index(0, 1, 1)] = 2.5 / g.cell_volume();
        let rho = GridDensity::new(g, vals).unwrap();
        let v = potential(&rho);
        let d = 10.0 * g.h;
        let got = v.values()[g.index(10, 1, 1)];
        assert!((got - 2.5 / d).abs() < 1e-3 * 2.5 / d);
    }

    #[test]
    fn zero_j_energy() {
        let g = Geometry::centered(8, 0.25, [0.0; 3]).unwrap();
        let rho = GridDensity::from_fn(g, |x| 1.0 - crate::vec3::norm(x));
        let eos = PolytropicEos::new(1.0, 2.0).unwrap();
        let e = energies(&rho, 0.0, &eos).unwrap();
        assert_eq!(e.t_j, 0.0);
        assert_eq!(e.e_j, e.u - e.g_self / 2.0);
        assert!(e.inertia > 0.0);
        assert!(energies(&GridDensity::zeros(g), 1.0, &eos).is_err());
    }

    #[test]
    fn interpolation_saturates_on_constants() {
        let g = Geometry::centered(4, 0.5, [0.0; 3]).unwrap();
        let rho = GridDensity::from_fn(g, |_| 3.0);
        assert!(interpolation_check(&rho, 1.0, 4.0 / 3.0, 2.0).unwrap());
        let a = lp_norm(&rho, 4.0 / 3.0);
        // alpha = 1/2 for (1, 4/3, 2)
        let b = lp_norm(&rho, 1.0).sqrt() * lp_norm(&rho, 2.0).sqrt();
        assert!((a - b).abs() < 1e-12 * a);
        assert!(interpolation_check(&GridDensity::zeros(g), 1.0, 4.0 / 3.0, f64::INFINITY).unwrap());
        assert!(interpolation_check(&rho, 2.0, 1.5, 3.0).is_err());
    }
}
