//! Far-field expansion of a patch about its center of mass.

use super::grid::{grid_sum, GridDensity};
use crate::error::{Error, Result};
use crate::vec3::{dot, norm, sub, Vec3};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FarField {
    #[default]
    Monopole,
    Quadrupole,
}

impl FarField {
    pub fn order(self) -> u32 {
        match self {
            FarField::Monopole => 0,
            FarField::Quadrupole => 2,
        }
    }
}

/// Mass, center of mass and traceless quadrupole `Q_ab = sum m (3 y_a y_b - |y|^2 d_ab)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Multipole {
    pub mass: f64,
    pub com: Vec3,
    pub quad: [[f64; 3]; 3],
    /// Largest distance from `com` to an occupied cell center, plus half a
    /// cell diagonal.
    pub extent: f64,
}

impl Multipole {
    pub fn of(rho: &GridDensity) -> Result<Multipole> {
        let g = rho.geometry();
        let v = rho.values();
        let com = rho.center_of_mass()?;
        let dv = g.cell_volume();
        let mass = dv * grid_sum(g, v, |_, x| x);
        let mut quad = [[0.0; 3]; 3];
        for a in 0..3 {
            for b in a..3 {
                let q = dv
                    * grid_sum(g, v, |idx, x| {
                        if x == 0.0 {
                            return 0.0;
                        }
                        let y = sub(g.center_of(idx), com);
                        let d = if a == b { dot(y, y) } else { 0.0 };
                        x * (3.0 * y[a] * y[b] - d)
                    });
                quad[a][b] = q;
                quad[b][a] = q;
            }
        }
        let mut extent: f64 = 0.0;
        for (idx, &x) in v.iter().enumerate() {
            if x > 0.0 {
                extent = extent.max(norm(sub(g.center_of(idx), com)));
            }
        }
        extent += 0.5 * 3f64.sqrt() * g.h;
        Ok(Multipole { mass, com, quad, extent })
    }

    /// Potential `M/r + (1/2) Q_ab n_a n_b / r^3` at `p`.
    #[inline]
    pub fn eval(&self, p: Vec3, order: FarField) -> f64 {
        let d = sub(p, self.com);
        let r = norm(d);
        let mut v = self.mass / r;
        if order == FarField::Quadrupole {
            let mut s = 0.0;
            for a in 0..3 {
                for b in 0..3 {
                    s += self.quad[a][b] * d[a] * d[b];
                }
            }
            v += 0.5 * s / (r * r * r * r * r);
        }
        v
    }

    /// Truncation bound `m/r * (extent/r)^(order+1)`.
    pub fn error_bound(&self, p: Vec3, order: FarField) -> f64 {
        let r = norm(sub(p, self.com));
        self.mass / r * (self.extent / r).powi(order.order() as i32 + 1)
    }
}

/// `V_rho` at points well outside the patch, by multipole expansion.
///
/// Every point must lie at least `2h` outside the patch bounding box. The
/// second return value holds the per-point truncation bound.
pub fn potential_at_external(rho: &GridDensity, points: &[Vec3], order: FarField) -> Result<(Vec<f64>, Vec<f64>)> {
    let g = rho.geometry();
    for p in points {
        if !inflated_outside(g, *p) {
            return Err(Error::precondition(format!(
                "point {p:?} lies inside the patch box inflated by 2h"
            )));
        }
    }
    if rho.max_value() == 0.0 {
        return Ok((vec![0.0; points.len()], vec![0.0; points.len()]));
    }
    let mp = Multipole::of(rho)?;
    let vals = points.iter().map(|&p| mp.eval(p, order)).collect();
    let errs = points.iter().map(|&p| mp.error_bound(p, order)).collect();
    Ok((vals, errs))
}

fn inflated_outside(g: &super::grid::Geometry, p: Vec3) -> bool {
    let (lo, hi) = g.bbox();
    (0..3).any(|a| p[a] < lo[a] - 2.0 * g.h || p[a] > hi[a] + 2.0 * g.h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::grid::Geometry;

    #[test]
    fn point_mass_monopole() {
        let g = Geometry::centered(5, 0.1, [0.0; 3]).unwrap();
        let mut v = vec![0.0; 125];
        v[g.index(2, 2, 2)] = 1000.0;
        let rho = GridDensity::new(g, v).unwrap();
        let (out, _) = potential_at_external(&rho, &[[3.0, 4.0, 0.0]], FarField::Monopole).unwrap();
        assert!((out[0] - 1.0 / 5.0).abs() < 1e-15);
    }

    #[test]
    fn symmetric_ball_has_no_quadrupole() {
        let g = Geometry::centered(16, 0.1, [0.0; 3]).unwrap();
        let rho = GridDensity::from_fn(g, |x| if norm(x) < 0.6 { 1.0 } else { 0.0 });
        let mp = Multipole::of(&rho).unwrap();
        for a in 0..3 {
            for b in 0..3 {
                assert!(mp.quad[a][b].abs() < 1e-12 * mp.mass);
            }
        }
        let p = [5.0, 1.0, 2.0];
        assert!((mp.eval(p, FarField::Monopole) - mp.eval(p, FarField::Quadrupole)).abs() < 1e-14);
    }

    #[test]
    fn rejects_points_near_the_box() {
        let g = Geometry::centered(4, 1.0, [0.0; 3]).unwrap();
        let rho = GridDensity::from_fn(g, |_| 1.0);
        assert!(potential_at_external(&rho, &[[3.0, 0.0, 0.0]], FarField::Monopole).is_err());
        assert!(potential_at_external(&rho, &[[4.1, 0.0, 0.0]], FarField::Monopole).is_ok());
    }
}
