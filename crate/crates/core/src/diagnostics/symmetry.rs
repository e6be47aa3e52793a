use crate::error::{Error, Result};
use crate::field::GridDensity;
use crate::minimizer::MinimizerResult;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SymmetryReport {
    /// `|rho(x, y, z) - rho(x, y, -z)|_1 / |rho|_1`.
    pub mirror_l1: f64,
    /// Largest increase of `rho` along a column moving away from the
    /// mid-plane, relative to `max rho`.
    pub monotone_violation: f64,
}

/// Mirror deviation and `|z|`-monotonicity about the mid-plane of the grid.
pub fn symmetry_of(rho: &GridDensity) -> Result<SymmetryReport> {
    let g = rho.geometry();
    let [nx, ny, nz] = g.dims;
    let v = rho.values();
    let linf = rho.max_value();
    if linf <= 0.0 {
        return Err(Error::precondition("symmetry of an empty density"));
    }
    let mut diff = 0.0;
    let mut total = 0.0;
    let mut worst: f64 = 0.0;
    for i in 0..nx {
        for j in 0..ny {
            for k in 0..nz {
                let a = v[g.index(i, j, k)];
                diff += (a - v[g.index(i, j, nz - 1 - k)]).abs();
                total += a;
            }
            // upper half outward
            for k in nz / 2..nz - 1 {
                worst = worst.max(v[g.index(i, j, k + 1)] - v[g.index(i, j, k)]);
            }
            // lower half outward
            for k in 1..nz.div_ceil(2) {
                worst = worst.max(v[g.index(i, j, k - 1)] - v[g.index(i, j, k)]);
            }
        }
    }
    Ok(SymmetryReport { mirror_l1: diff / total, monotone_violation: worst / linf })
}

/// [`symmetry_of`] on every patch of a result, keeping the worst values.
/// Every patch must be centered on the plane `z = 0`.
pub fn symmetry_check(result: &MinimizerResult) -> Result<SymmetryReport> {
    let mut out = SymmetryReport { mirror_l1: 0.0, monotone_violation: 0.0 };
    for p in result.densities.patches() {
        let g = p.density.geometry();
        let mid = g.midpoint()[2];
        if mid.abs() > 1e-9 * g.h {
            return Err(Error::precondition(format!("patch mid-plane at z = {mid}, not 0")));
        }
        let r = symmetry_of(&p.density)?;
        out.mirror_l1 = out.mirror_l1.max(r.mirror_l1);
        out.monotone_violation = out.monotone_violation.max(r.monotone_violation);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Geometry;
    use crate::vec3::norm;

    #[test]
    fn ball_is_symmetric() {
        let g = Geometry::centered(20, 0.1, [0.0; 3]).unwrap();
        let rho = GridDensity::from_fn(g, |x| (1.0 - norm(x)).max(0.0));
        let r = symmetry_of(&rho).unwrap();
        assert!(r.mirror_l1 < 1e-14);
        assert!(r.monotone_violation < 1e-14);
    }

    #[test]
    fn shifted_blob_is_not() {
        let g = Geometry::centered(20, 0.1, [0.0; 3]).unwrap();
        let rho = GridDensity::from_fn(g, |x| (0.5 - norm([x[0], x[1], x[2] - 0.3])).max(0.0));
        let r = symmetry_of(&rho).unwrap();
        assert!(r.mirror_l1 > 0.1);
        assert!(r.monotone_violation > 0.1);
    }
}
