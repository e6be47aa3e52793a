use super::support::support_stats;
use crate::error::{Error, Result};
use crate::field::Label;
use crate::minimizer::MinimizerResult;
use crate::vec3::dist;

/// Two-point-mass energy `-mu/d + J^2/(2 mu d^2)` at separation `d`.
pub fn kepler_energy(d: f64, mu: f64, j: f64) -> Result<f64> {
    if !(d.is_finite() && d > 0.0) {
        return Err(Error::domain(format!("separation must be positive, got {d}")));
    }
    check_mu_j(mu, j)?;
    Ok(-mu / d + j * j / (2.0 * mu * d * d))
}

/// Separation minimizing [`kepler_energy`], `J^2 / mu^2`. Without angular
/// momentum the energy decreases all the way to `d = 0`; the minimizer is
/// reported as `+inf`.
pub fn kepler_argmin(mu: f64, j: f64) -> Result<f64> {
    check_mu_j(mu, j)?;
    if j == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(j * j / (mu * mu))
}

fn check_mu_j(mu: f64, j: f64) -> Result<()> {
    if !(mu.is_finite() && mu > 0.0) {
        return Err(Error::domain(format!("reduced mass must be positive, got {mu}")));
    }
    if !(j.is_finite() && j >= 0.0) {
        return Err(Error::domain(format!("angular momentum must be >= 0, got {j}")));
    }
    Ok(())
}

/// `(g_eps(z), g_0(z))` with
/// `g_eps(z) = -1/(z - 2 eps) + 1/(2 (z^2 + eps^{3/2} R^{1/2} / J)) + 1/(1 + 2 eps) - 1/2`
/// and `g_0(z) = -1/z + 1/(2 z^2) + 1/2`, for `z >= 1/2`.
pub fn g_functions(z: f64, eps: f64, r: f64, j: f64) -> Result<(f64, f64)> {
    if !(z.is_finite() && z >= 0.5) {
        return Err(Error::domain(format!("g is only used on z >= 1/2, got {z}")));
    }
    if !(eps.is_finite() && (0.0..0.25).contains(&eps)) {
        return Err(Error::domain(format!("eps must lie in [0, 1/4), got {eps}")));
    }
    if !(r.is_finite() && r >= 0.0) {
        return Err(Error::domain(format!("radius must be >= 0, got {r}")));
    }
    let g0 = -1.0 / z + 1.0 / (2.0 * z * z) + 0.5;
    if eps == 0.0 {
        return Ok((g0, g0));
    }
    if !(j.is_finite() && j > 0.0) {
        return Err(Error::domain(format!("g_eps needs J > 0, got {j}")));
    }
    let shift = eps.powf(1.5) * r.sqrt() / j;
    let ge = -1.0 / (z - 2.0 * eps) + 1.0 / (2.0 * (z * z + shift)) + 1.0 / (1.0 + 2.0 * eps) - 0.5;
    Ok((ge, g0))
}

/// `sup |g_eps - g_0|` over `samples + 1` equispaced points of `[1/2, 3/2]`.
pub fn g_uniform_gap(eps: f64, r: f64, j: f64, samples: usize) -> Result<f64> {
    if samples == 0 {
        return Err(Error::domain("need at least one interval"));
    }
    let mut gap: f64 = 0.0;
    for i in 0..=samples {
        let z = 0.5 + i as f64 / samples as f64;
        let (ge, g0) = g_functions(z, eps, r, j)?;
        gap = gap.max((ge - g0).abs());
    }
    Ok(gap)
}

/// `|xbar(planet) - xbar(star)| / eta`.
pub fn separation_ratio(result: &MinimizerResult) -> Result<f64> {
    let d = result
        .domains
        .as_ref()
        .ok_or_else(|| Error::precondition("separation needs a star-planet result"))?;
    let com = |label: Label| -> Result<[f64; 3]> {
        result
            .densities
            .find(label)
            .ok_or_else(|| Error::precondition(format!("result has no {label:?} component")))?
            .density
            .center_of_mass()
    };
    Ok(dist(com(Label::Planet)?, com(Label::Star)?) / d.eta)
}

/// `(x, eps, g_eps(x))` at `x = d / eta`, `eps = R / eta`, with `R` the
/// larger measured support radius. A minimizer has `g_eps(x) <= 0` up to
/// grid error.
pub fn g_gate(result: &MinimizerResult) -> Result<(f64, f64, f64)> {
    let x = separation_ratio(result)?;
    let eta = result.domains.as_ref().map(|d| d.eta).unwrap_or(f64::NAN);
    let mut r: f64 = 0.0;
    for p in result.densities.patches() {
        r = r.max(support_stats(&p.density, None)?.radius);
    }
    let eps = r / eta;
    let (ge, _) = g_functions(x, eps, r, result.config.j)?;
    Ok((x, eps, ge))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn argmin_and_value() {
        assert_eq!(kepler_argmin(0.25, 1.0).unwrap(), 16.0);
        let eta = kepler_argmin(0.16, 0.5).unwrap();
        let e = kepler_energy(eta, 0.16, 0.5).unwrap();
        assert!((e + 0.16 / (2.0 * eta)).abs() < 1e-15);
        assert!(kepler_argmin(0.2, 0.0).unwrap().is_infinite());
        assert!(kepler_energy(0.0, 0.2, 1.0).is_err());
    }

    #[test]
    fn g0_values() {
        assert_eq!(g_functions(1.0, 0.0, 1.0, 1.0).unwrap().1, 0.0);
        assert_eq!(g_functions(0.5, 0.0, 1.0, 1.0).unwrap().1, 0.5);
        assert!(g_functions(0.49, 0.0, 1.0, 1.0).is_err());
    }
}
