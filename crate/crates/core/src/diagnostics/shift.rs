use super::support::{default_floor, split_components};
use crate::eos::PolytropicEos;
use crate::error::{Error, Result};
use crate::field::{dot_field, internal_energy, moment_of_inertia, potential, Geometry, GridDensity, Label};
use crate::lane_emden::{rescale, solve_unit, to_grid};
use crate::minimizer::MinimizerResult;
use crate::quadrature::Neumaier;
use crate::vec3::{add, axial_r2, dot, norm, scale, sub, Vec3};
use rayon::prelude::*;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShiftRecord {
    /// Gap between the two components along the line joining their centers.
    pub d: f64,
    /// Threshold `32 (1-m)^5 R^3 m^((12g-18)/(3g-4)) / J^4` beyond which the
    /// approach move must lower `E_J`.
    pub d_star: f64,
    pub h_step: f64,
    pub m1: f64,
    pub m2: f64,
    pub e_before: f64,
    pub e_after: f64,
    /// `E_J(original) - E_J(shifted)`.
    pub delta_e: f64,
    /// Displacement of the pair's center of mass.
    pub com_shift: f64,
}

/// `32 (1-m)^5 R^3 m^((12 gamma - 18)/(3 gamma - 4)) / J^4`, where `R` is the
/// support radius of the unit-mass body.
pub fn shift_threshold(m: f64, j: f64, r_unit: f64, gamma: f64) -> f64 {
    let p = (12.0 * gamma - 18.0) / (3.0 * gamma - 4.0);
    32.0 * (1.0 - m).powi(5) * r_unit.powi(3) * m.powf(p) / j.powi(4)
}

struct Cells {
    points: Vec<Vec3>,
    masses: Vec<f64>,
}

fn cells(rho: &GridDensity) -> Cells {
    let g = rho.geometry();
    let dv = g.cell_volume();
    let mut points = Vec::new();
    let mut masses = Vec::new();
    for (idx, &v) in rho.values().iter().enumerate() {
        if v > 0.0 {
            points.push(g.center_of(idx));
            masses.push(v * dv);
        }
    }
    Cells { points, masses }
}

/// `sum_x sum_y m_x m_y / |x - y|` over two disjoint cell sets.
fn cross_interaction(a: &Cells, b: &Cells) -> f64 {
    let partial: Vec<f64> = a
        .points
        .par_iter()
        .zip(a.masses.par_iter())
        .map(|(x, mx)| {
            let mut acc = Neumaier::default();
            for (y, my) in b.points.iter().zip(&b.masses) {
                acc.add(my / norm(sub(*x, *y)));
            }
            mx * acc.sum()
        })
        .collect();
    crate::quadrature::sum(&partial)
}

/// `E_J` of densities on separate lattices: grid self energies plus pairwise
/// cross terms summed cell by cell.
pub fn pieces_energy(pieces: &[&GridDensity], j: f64, eos: &PolytropicEos) -> Result<f64> {
    let mut u = 0.0;
    let mut g = 0.0;
    let mut parts = Vec::new();
    for rho in pieces {
        u += internal_energy(rho, eos);
        g += dot_field(rho, &potential(rho));
        let m = rho.mass();
        if m > 0.0 {
            let (i, c) = moment_of_inertia(rho)?;
            parts.push((m, i, c));
        }
    }
    let sets: Vec<Cells> = pieces.iter().map(|r| cells(r)).collect();
    for a in 0..sets.len() {
        for b in a + 1..sets.len() {
            g += 2.0 * cross_interaction(&sets[a], &sets[b]);
        }
    }
    let total: f64 = parts.iter().map(|p| p.0).sum();
    if total <= 0.0 {
        return Err(Error::precondition("energy of a zero density"));
    }
    let mut xbar = [0.0; 3];
    for (m, _, c) in &parts {
        xbar = add(xbar, scale(*c, m / total));
    }
    let inertia: f64 = parts.iter().map(|(m, i, c)| i + m * axial_r2(sub(*c, xbar))).sum();
    let t = if j == 0.0 { 0.0 } else { j * j / (2.0 * inertia) };
    Ok(u - 0.5 * g + t)
}

/// Gap between the occupied cells of `a` and `b` along `dir`.
fn gap_along(a: &GridDensity, b: &GridDensity, dir: Vec3) -> f64 {
    let proj = |rho: &GridDensity| {
        let g = rho.geometry();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (idx, &v) in rho.values().iter().enumerate() {
            if v > 0.0 {
                let p = dot(g.center_of(idx), dir);
                lo = lo.min(p);
                hi = hi.max(p);
            }
        }
        (lo, hi)
    };
    let (_, a_hi) = proj(a);
    let (b_lo, _) = proj(b);
    b_lo - a_hi - 0.5 * (a.geometry().h + b.geometry().h)
}

fn pair_com(a: &GridDensity, b: &GridDensity) -> Result<(Vec3, Vec3, Vec3)> {
    let (ma, mb) = (a.mass(), b.mass());
    let ca = a.center_of_mass()?;
    let cb = b.center_of_mass()?;
    Ok((ca, cb, scale(add(scale(ca, ma), scale(cb, mb)), 1.0 / (ma + mb))))
}

/// Moves two components of one body toward each other by `h1`, `h2` with
/// `h1 m1 = h2 m2` and `h1 + h2 = h_step`, and compares `E_J` before and
/// after. `others` are the remaining bodies; `r_unit` the unit-mass radius.
pub fn component_shift(
    planet: [&GridDensity; 2],
    others: &[&GridDensity],
    j: f64,
    eos: &PolytropicEos,
    h_step: f64,
    r_unit: f64,
) -> Result<ShiftRecord> {
    let [a, b] = planet;
    let (m1, m2) = (a.mass(), b.mass());
    if !(m1 > 0.0 && m2 > 0.0) {
        return Err(Error::precondition("both components need mass"));
    }
    if !(j > 0.0) {
        return Err(Error::domain("the shift threshold needs J > 0"));
    }
    let (ca, cb, com) = pair_com(a, b)?;
    let axis = sub(cb, ca);
    let dir = scale(axis, 1.0 / norm(axis));
    let d = gap_along(a, b, dir);
    if !(h_step >= 0.0 && h_step < d) {
        return Err(Error::precondition(format!("step {h_step} must lie in [0, gap {d})")));
    }
    let m = m1 + m2;
    let h1 = h_step * m2 / m;
    let h2 = h_step * m1 / m;
    let a2 = a.translated(scale(dir, h1));
    let b2 = b.translated(scale(dir, -h2));
    let (_, _, com2) = pair_com(&a2, &b2)?;

    let mut before = vec![a, b];
    before.extend_from_slice(others);
    let mut after = vec![&a2, &b2];
    after.extend_from_slice(others);
    let e_before = pieces_energy(&before, j, eos)?;
    let e_after = pieces_energy(&after, j, eos)?;
    Ok(ShiftRecord {
        d,
        d_star: shift_threshold(m, j, r_unit, eos.gamma()),
        h_step,
        m1,
        m2,
        e_before,
        e_after,
        delta_e: e_before - e_after,
        com_shift: norm(sub(com2, com)),
    })
}

/// [`component_shift`] on the planet of a solver result. `None` unless the
/// planet has exactly two components.
pub fn component_shift_result(result: &MinimizerResult, h_step: f64) -> Result<Option<ShiftRecord>> {
    let planet = result
        .densities
        .find(Label::Planet)
        .ok_or_else(|| Error::precondition("result has no planet"))?;
    let parts = split_components(&planet.density, default_floor(&planet.density))?;
    if parts.len() != 2 {
        return Ok(None);
    }
    let others: Vec<&GridDensity> =
        result.densities.patches().iter().filter(|p| p.label != Label::Planet).map(|p| &p.density).collect();
    let rec = component_shift([&parts[0], &parts[1]], &others, result.config.j, &result.eos, h_step, result.unit_profile.radius)?;
    Ok(Some(rec))
}

/// Two Lane–Emden blobs of masses `m1`, `m2`, each on its own lattice with
/// `cpr` cells per radius, lined up along `x` with their joint center of
/// mass at `center` and exactly `gap` between their occupied cells.
pub fn two_blob_planet(eos: &PolytropicEos, m1: f64, m2: f64, gap: f64, cpr: usize, center: Vec3) -> Result<[GridDensity; 2]> {
    if !(gap > 0.0) {
        return Err(Error::domain(format!("gap must be positive, got {gap}")));
    }
    let unit = solve_unit(eos)?;
    let blob = |mass: f64| -> Result<GridDensity> {
        let p = rescale(&unit, mass)?;
        let h = p.radius / cpr as f64;
        let n = 2 * (1.25 * cpr as f64).ceil() as usize;
        let g = Geometry::centered(n, h, [0.0; 3])?;
        to_grid(&p, &g, [0.0; 3])
    };
    let a = blob(m1)?;
    let b = blob(m2)?;
    let x = [1.0, 0.0, 0.0];
    // place at distance 0 apart along x, then open the measured gap
    let base = gap_along(&a, &b, x);
    let sep = gap - base;
    let m = m1 + m2;
    let a = a.translated(add(center, scale(x, -sep * m2 / m)));
    let b = b.translated(add(center, scale(x, sep * m1 / m)));
    Ok([a, b])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_step_and_center_of_mass() {
        let eos = PolytropicEos::new(1.0, 2.0).unwrap();
        let [a, b] = two_blob_planet(&eos, 0.03, 0.02, 0.4, 8, [1.0, 0.0, 0.0]).unwrap();
        let d = gap_along(&a, &b, [1.0, 0.0, 0.0]);
        assert!((d - 0.4).abs() < 1e-12);
        let r0 = component_shift([&a, &b], &[], 0.5, &eos, 0.0, 1.0).unwrap();
        assert_eq!(r0.delta_e, 0.0);
        let r = component_shift([&a, &b], &[], 0.5, &eos, 0.1, 1.0).unwrap();
        assert!(r.com_shift < 1e-12, "{}", r.com_shift);
    }
}
