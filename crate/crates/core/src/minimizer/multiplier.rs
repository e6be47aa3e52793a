use crate::eos::PolytropicEos;
use crate::error::{Error, Result};
use crate::field::{grid_sum, GridDensity, GridField};

/// Density `min(cap, (A')^{-1}([phi + lambda]_+))` on the admissible cells.
pub fn density_for(phi: &GridField, mask: Option<&[bool]>, lambda: f64, eos: &PolytropicEos, cap: Option<f64>) -> Vec<f64> {
    let cap = cap.unwrap_or(f64::INFINITY);
    phi.values()
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            if mask.is_some_and(|m| !m[i]) {
                return 0.0;
            }
            let y = p + lambda;
            if y <= 0.0 {
                0.0
            } else {
                eos.a_prime_inv_unchecked(y).min(cap)
            }
        })
        .collect()
}

/// Mass carried by `density_for` at `lambda`.
pub fn mapped_mass(phi: &GridField, mask: Option<&[bool]>, lambda: f64, eos: &PolytropicEos, cap: Option<f64>) -> f64 {
    let g = phi.geometry();
    let capv = cap.unwrap_or(f64::INFINITY);
    g.cell_volume()
        * grid_sum(g, phi.values(), |i, p| {
            if mask.is_some_and(|m| !m[i]) {
                return 0.0;
            }
            let y = p + lambda;
            if y <= 0.0 {
                0.0
            } else {
                eos.a_prime_inv_unchecked(y).min(capv)
            }
        })
}

/// Find the multiplier whose mapped mass equals `target_mass` within
/// `tol * target_mass`, and the corresponding density rescaled to the exact
/// mass.
///
/// The mapped mass is nondecreasing in `lambda`, zero at `-max phi` and, with
/// a cap, maximal at `A'(cap) - min phi`. Without a cap the upper end is
/// found by doubling. The bracket is refined by the Illinois variant of
/// regula falsi, falling back to bisection when it stalls.
pub fn solve_multiplier(
    phi: &GridField,
    mask: Option<&[bool]>,
    target_mass: f64,
    eos: &PolytropicEos,
    cap: Option<f64>,
    tol: f64,
) -> Result<(f64, GridDensity)> {
    if !(target_mass.is_finite() && target_mass > 0.0) {
        return Err(Error::domain(format!("target mass must be positive, got {target_mass}")));
    }
    let admissible = |i: usize| mask.map_or(true, |m| m[i]);
    let mut pmax = f64::NEG_INFINITY;
    let mut pmin = f64::INFINITY;
    for (i, &p) in phi.values().iter().enumerate() {
        if admissible(i) {
            if !p.is_finite() {
                return Err(Error::precondition("effective potential is not finite"));
            }
            pmax = pmax.max(p);
            pmin = pmin.min(p);
        }
    }
    if !pmax.is_finite() {
        return Err(Error::precondition("no admissible cells"));
    }
    let f = |l: f64| mapped_mass(phi, mask, l, eos, cap) - target_mass;

    let mut lo = -pmax;
    let mut f_lo = f(lo);
    let (mut hi, mut f_hi);
    match cap {
        Some(c) => {
            hi = eos.a_prime_unchecked(c) - pmin;
            f_hi = f(hi);
            if f_hi < 0.0 {
                return Err(Error::InfeasibleCap { cap: c, max_mass: f_hi + target_mass, target: target_mass });
            }
        }
        None => {
            let mut step = pmax.abs().max(pmax - pmin).max(1e-300);
            loop {
                hi = -pmax + step;
                f_hi = f(hi);
                if f_hi >= 0.0 {
                    break;
                }
                lo = hi;
                f_lo = f_hi;
                step *= 2.0;
                if !step.is_finite() {
                    return Err(Error::precondition("multiplier bracket diverged"));
                }
            }
        }
    }

    let mut side = 0i32;
    let mut lambda = hi;
    let mut f_l = f_hi;
    for it in 0..200 {
        if f_l.abs() <= tol * target_mass {
            break;
        }
        let bisect = it % 8 == 7 || f_hi == f_lo;
        let mut x = if bisect { 0.5 * (lo + hi) } else { (lo * f_hi - hi * f_lo) / (f_hi - f_lo) };
        if !(x > lo && x < hi) {
            x = 0.5 * (lo + hi);
        }
        if x <= lo || x >= hi {
            break;
        }
        let fx = f(x);
        lambda = x;
        f_l = fx;
        if fx < 0.0 {
            lo = x;
            f_lo = fx;
            if side == -1 {
                f_hi *= 0.5;
            }
            side = -1;
        } else {
            hi = x;
            f_hi = fx;
            if side == 1 {
                f_lo *= 0.5;
            }
            side = 1;
        }
    }
    let mut values = density_for(phi, mask, lambda, eos, cap);
    let g = *phi.geometry();
    let mass = g.cell_volume() * grid_sum(&g, &values, |_, v| v);
    if mass <= 0.0 {
        // all mass sits on a single level set; fall back to the upper bracket
        values = density_for(phi, mask, hi, eos, cap);
        lambda = hi;
    }
    let mut rho = GridDensity::new(g, values)?;
    rho.renormalize(target_mass)?;
    if let Some(c) = cap {
        rho.values_mut().iter_mut().for_each(|v| *v = v.min(c));
    }
    Ok((lambda, rho))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Geometry;

    fn ball_mask(g: &Geometry, r: f64) -> Vec<bool> {
        let c = g.midpoint();
        (0..g.len()).map(|i| crate::vec3::dist(g.center_of(i), c) < r).collect()
    }

    #[test]
    fn constant_field_closed_form() {
        let g = Geometry::centered(12, 0.1, [0.0; 3]).unwrap();
        let mask = ball_mask(&g, 0.5);
        let cells = mask.iter().filter(|&&b| b).count() as f64;
        let vol = cells * g.cell_volume();
        let c = 0.7;
        let phi = GridField::new(g, vec![c; g.len()]).unwrap();
        let eos = PolytropicEos::new(1.0, 2.0).unwrap();
        let (l, rho) = solve_multiplier(&phi, Some(&mask), 0.3, &eos, None, 1e-12).unwrap();
        assert!((l - (2.0 * 0.3 / vol - c)).abs() < 1e-10);
        assert!((rho.mass() - 0.3).abs() < 1e-14);
    }

    #[test]
    fn small_target_approaches_sup() {
        let g = Geometry::centered(10, 0.1, [0.0; 3]).unwrap();
        let phi = GridField::new(g, (0..g.len()).map(|i| 1.0 - crate::vec3::norm(g.center_of(i))).collect()).unwrap();
        let eos = PolytropicEos::new(1.0, 2.0).unwrap();
        let sup = phi.max_value();
        let (l, _) = solve_multiplier(&phi, None, 1e-12, &eos, None, 1e-12).unwrap();
        assert!((l + sup).abs() < 1e-3);
    }

    #[test]
    fn inactive_cap_and_infeasible_cap() {
        let g = Geometry::centered(10, 0.1, [0.0; 3]).unwrap();
        let phi = GridField::new(g, (0..g.len()).map(|i| 2.0 - crate::vec3::norm(g.center_of(i))).collect()).unwrap();
        let eos = PolytropicEos::new(1.0, 2.0).unwrap();
        let (l0, rho) = solve_multiplier(&phi, None, 0.2, &eos, None, 1e-13).unwrap();
        let big = 2.0 * rho.max_value();
        let (l1, _) = solve_multiplier(&phi, None, 0.2, &eos, Some(big), 1e-13).unwrap();
        let (l2, _) = solve_multiplier(&phi, None, 0.2, &eos, Some(2.0 * big), 1e-13).unwrap();
        assert!((l1 - l0).abs() < 1e-12 * l0.abs().max(1.0));
        assert!((l2 - l1).abs() < 1e-12 * l1.abs().max(1.0));
        let err = solve_multiplier(&phi, None, 0.2, &eos, Some(1e-3), 1e-12).unwrap_err();
        assert!(matches!(err, Error::InfeasibleCap { .. }));
    }
}
