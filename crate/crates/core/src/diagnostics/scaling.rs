use crate::eos::PolytropicEos;
use crate::error::{Error, Result};
use crate::field::{energies, grid_sum, Geometry, GridDensity, Label};
use crate::lane_emden::RadialProfile;
use crate::minimizer::MinimizerResult;
use crate::vec3::{dist, scale, sub};
use serde::Serialize;

/// `rho~(x) = A(m) rho(B(m) x)` about the center of mass of `rho`: spacing
/// `h / B`, values times `A`. Unit mass when `rho` has mass `m`.
pub fn scaling_density(rho: &GridDensity, m: f64, eos: &PolytropicEos) -> Result<GridDensity> {
    if !(m.is_finite() && m > 0.0) {
        return Err(Error::domain(format!("mass must be positive, got {m}")));
    }
    let (a, b) = eos.scaling_coeffs(m)?;
    let g = rho.geometry();
    let xbar = rho.center_of_mass()?;
    let geom = Geometry::new(g.dims, g.h / b, scale(sub(g.origin, xbar), 1.0 / b))?;
    GridDensity::new(geom, rho.values().iter().map(|v| v * a).collect())
}

/// `sum |rho - sigma(|x - xbar|)| h^3` with `sigma` the radial profile placed
/// at the center of mass of `rho`.
pub fn l1_to_profile(rho: &GridDensity, profile: &RadialProfile) -> Result<f64> {
    let xbar = rho.center_of_mass()?;
    let sigma = profile.density_interp();
    let g = rho.geometry();
    let outside = |r: f64| r >= profile.radius;
    Ok(g.cell_volume()
        * grid_sum(g, rho.values(), |idx, v| {
            let r = dist(g.center_of(idx), xbar);
            let s = if outside(r) { 0.0 } else { sigma.eval(r) };
            (v - s).abs()
        }))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MultiplierBound {
    /// `A(m)^(gamma - 1) lambda_m`.
    pub scaled: f64,
    /// Unit-mass multiplier `kappa_1`.
    pub kappa: f64,
    pub eps: f64,
    pub holds: bool,
    /// `kappa + eps - scaled`; non-negative when the bound holds.
    pub margin: f64,
}

/// Checks `A(m)^(gamma - 1) lambda_m <= kappa_1 + eps` with
/// `eps = |kappa_1| / 10` on the planet (the only body when `J = 0`).
pub fn multiplier_bound_check(result: &MinimizerResult, unit: &RadialProfile) -> Result<MultiplierBound> {
    let (label, m) = body(result);
    let lambda = result
        .multiplier(label)
        .ok_or_else(|| Error::precondition("result has no matching component"))?;
    let (a, _) = result.eos.scaling_coeffs(m)?;
    let scaled = a.powf(result.eos.gamma() - 1.0) * lambda;
    let kappa = unit.lambda;
    let eps = 0.1 * kappa.abs();
    let margin = kappa + eps - scaled;
    Ok(MultiplierBound { scaled, kappa, eps, holds: margin >= 0.0, margin })
}

/// The small body and its mass.
fn body(result: &MinimizerResult) -> (Label, f64) {
    if result.config.is_single_body() {
        (Label::Star, 1.0)
    } else {
        (Label::Planet, result.config.m)
    }
}

/// Non-rotating energy `U - G/2` of one component on its own.
pub fn component_e0(result: &MinimizerResult, label: Label) -> Result<f64> {
    let p = result
        .densities
        .find(label)
        .ok_or_else(|| Error::precondition(format!("result has no {label:?} component")))?;
    Ok(energies(&p.density, 0.0, &result.eos)?.e0())
}

/// `E0(rho~_m) - e0` for the planet, with `E0(rho~_m) = m^{-(5g-6)/(3g-4)} E0(rho_m)`.
pub fn scaled_energy_gap(result: &MinimizerResult) -> Result<f64> {
    let (label, m) = body(result);
    let e = component_e0(result, label)?;
    Ok(m.powf(-result.eos.energy_exponent()) * e - result.unit_profile.e0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyLaw {
    pub exponent: f64,
    /// Constant fitted at the largest mass.
    pub c: f64,
    pub holds: bool,
}

/// Fits `C` in `gap(m) <= C m^p` at the largest mass and checks the law at
/// the others, allowing `slack` in absolute terms.
pub fn energy_law(points: &[(f64, f64)], exponent: f64, slack: f64) -> Result<EnergyLaw> {
    let Some(&(m_top, g_top)) = points.iter().max_by(|a, b| a.0.total_cmp(&b.0)) else {
        return Err(Error::domain("no samples"));
    };
    if !(m_top > 0.0) {
        return Err(Error::domain("masses must be positive"));
    }
    let c = g_top / m_top.powf(exponent);
    let holds = points.iter().all(|&(m, g)| g <= c * m.powf(exponent) + slack);
    Ok(EnergyLaw { exponent, c, holds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lane_emden::{rescale, solve_unit, to_grid};

    #[test]
    fn unit_mass_and_identity() {
        let eos = PolytropicEos::new(1.0, 2.5).unwrap();
        let unit = solve_unit(&eos).unwrap();
        let p = rescale(&unit, 0.1).unwrap();
        let h = p.radius / 10.0;
        let g = Geometry::centered(30, h, [0.3, 0.0, 0.0]).unwrap();
        let rho = to_grid(&p, &g, [0.3, 0.0, 0.0]).unwrap();
        let t = scaling_density(&rho, 0.1, &eos).unwrap();
        assert!((t.mass() - 1.0).abs() < 1e-10);
        let same = scaling_density(&rho, 1.0, &eos).unwrap();
        assert_eq!(same.values(), rho.values());
        assert!(scaling_density(&rho, 0.0, &eos).is_err());
    }
}
