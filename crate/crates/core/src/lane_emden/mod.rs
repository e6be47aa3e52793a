//! Non-rotating polytropic minimizers from the Lane–Emden equation
//! `theta'' + (2/xi) theta' + theta^n = 0`, mapped to physical units and
//! normalized to unit mass through the homology scaling.

mod interp;
mod ode;

pub use interp::MonotoneCubic;

use crate::eos::PolytropicEos;
use crate::error::{Error, Result};
use crate::field::{Geometry, GridDensity};
use crate::vec3::{dist, Vec3};
use std::f64::consts::PI;
use std::io::Write;

/// Number of radial intervals in a stored profile.
pub const RADIAL_INTERVALS: usize = 2048;

/// Surface abscissa `xi_1` and `theta'(xi_1)` for index `n`.
pub fn surface(n: f64) -> Result<(f64, f64)> {
    check_index(n)?;
    let (xi1, y) = ode::first_zero(n);
    Ok((xi1, y[1]))
}

/// `theta(xi)` at increasing abscissas below the surface.
pub fn theta(n: f64, xi: &[f64]) -> Result<Vec<f64>> {
    check_index(n)?;
    Ok(ode::sample(n, xi).into_iter().map(|s| s[0]).collect())
}

fn check_index(n: f64) -> Result<()> {
    if !(n >= 0.0 && n < 5.0) {
        return Err(Error::Unsupported(format!(
            "polytropic index {n} has no finite radius (need gamma > 6/5)"
        )));
    }
    Ok(())
}

/// Radial non-rotating minimizer with its multiplier and energies.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    pub eos: PolytropicEos,
    pub mass: f64,
    pub radius: f64,
    pub central_density: f64,
    /// `RADIAL_INTERVALS + 1` uniform radii from 0 to `radius`.
    pub r: Vec<f64>,
    pub rho: Vec<f64>,
    /// Potential `V(r)` at the sample radii.
    pub potential: Vec<f64>,
    pub lambda: f64,
    /// Internal energy `U`.
    pub u: f64,
    /// Interaction energy `G(sigma, sigma)`.
    pub g: f64,
    pub e0: f64,
}

/// Unit-mass radial minimizer for `eos`.
pub fn solve_unit(eos: &PolytropicEos) -> Result<RadialProfile> {
    let raw = solve_central(eos, 1.0)?;
    let m0 = raw.mass;
    let mut p = scale_profile(&raw, 1.0 / m0);
    p.mass = 1.0;
    Ok(p)
}

/// Radial minimizer with central density `rho_c`; its mass follows from the
/// solution.
pub fn solve_central(eos: &PolytropicEos, rho_c: f64) -> Result<RadialProfile> {
    if !(rho_c.is_finite() && rho_c > 0.0) {
        return Err(Error::domain(format!("central density must be positive, got {rho_c}")));
    }
    let gamma = eos.gamma();
    if gamma <= 6.0 / 5.0 {
        return Err(Error::Unsupported(format!("gamma = {gamma} <= 6/5 has infinite radius")));
    }
    let n = eos.index();
    check_index(n)?;
    let k = eos.k();
    let (xi1, end) = ode::first_zero(n);

    let alpha = ((n + 1.0) * k * rho_c.powf(1.0 / n - 1.0) / (4.0 * PI)).sqrt();
    let mu1 = -xi1 * xi1 * end[1];
    let m0 = 4.0 * PI * alpha.powi(3) * rho_c * mu1;
    let r0 = alpha * xi1;
    let u0 = k / (gamma - 1.0) * 4.0 * PI * alpha.powi(3) * rho_c.powf(gamma) * end[2];
    let g0 = 32.0 * PI * PI * alpha.powi(5) * rho_c * rho_c * end[4];
    let q = |i2: f64| 4.0 * PI * alpha * alpha * rho_c * i2;
    let q_surface = q(end[3]);

    let xs: Vec<f64> = (0..=RADIAL_INTERVALS).map(|i| xi1 * i as f64 / RADIAL_INTERVALS as f64).collect();
    let states = ode::sample(n, &xs[..RADIAL_INTERVALS]);
    let mut r = Vec::with_capacity(xs.len());
    let mut rho = Vec::with_capacity(xs.len());
    let mut pot = Vec::with_capacity(xs.len());
    for (x, s) in xs.iter().zip(states.iter().chain(std::iter::once(&end))) {
        r.push(alpha * x);
        let th = s[0].max(0.0);
        rho.push(if *x == xi1 { 0.0 } else { rho_c * th.powf(n) });
        let mass_inside = 4.0 * PI * alpha.powi(3) * rho_c * (-x * x * s[1]);
        let v = if *x == 0.0 { q_surface } else { mass_inside / (alpha * x) + q_surface - q(s[3]) };
        pot.push(v);
    }
    Ok(RadialProfile {
        eos: *eos,
        mass: m0,
        radius: r0,
        central_density: rho_c,
        r,
        rho,
        potential: pot,
        lambda: -m0 / r0,
        u: u0,
        g: g0,
        e0: u0 - 0.5 * g0,
    })
}

/// Map `sigma_m -> sigma_{m f}` through `(A, B)` of the factor `f`.
fn scale_profile(p: &RadialProfile, f: f64) -> RadialProfile {
    let (a, b) = p.eos.scaling_coeffs(f).expect("positive factor");
    let e = f.powf(p.eos.energy_exponent());
    let vs = b * b / a;
    RadialProfile {
        eos: p.eos,
        mass: p.mass * f,
        radius: p.radius * b,
        central_density: p.central_density / a,
        r: p.r.iter().map(|r| r * b).collect(),
        rho: p.rho.iter().map(|v| v / a).collect(),
        potential: p.potential.iter().map(|v| v * vs).collect(),
        lambda: p.lambda * vs,
        u: p.u * e,
        g: p.g * e,
        e0: p.e0 * e,
    }
}

/// `sigma_m` from the unit-mass profile.
pub fn rescale(unit: &RadialProfile, m: f64) -> Result<RadialProfile> {
    if !(m.is_finite() && m > 0.0) {
        return Err(Error::domain(format!("mass must be positive, got {m}")));
    }
    check_unit(unit)?;
    let mut p = scale_profile(unit, m);
    p.mass = m;
    Ok(p)
}

/// Closed form `lambda_m = -(5g-6) m^((2g-2)/(3g-4)) U(sigma_1)`.
pub fn lambda_of_mass(unit: &RadialProfile, m: f64) -> Result<f64> {
    if !(m.is_finite() && m >= 0.0) {
        return Err(Error::domain(format!("mass must be non-negative, got {m}")));
    }
    check_unit(unit)?;
    if m == 0.0 {
        return Ok(0.0);
    }
    let g = unit.eos.gamma();
    Ok(-(5.0 * g - 6.0) * m.powf(unit.eos.multiplier_exponent()) * unit.u)
}

/// `e0(m) = m^((5g-6)/(3g-4)) e0(1)`.
pub fn e0_of_mass(unit: &RadialProfile, m: f64) -> Result<f64> {
    if !(m.is_finite() && m > 0.0) {
        return Err(Error::domain(format!("mass must be positive, got {m}")));
    }
    check_unit(unit)?;
    Ok(m.powf(unit.eos.energy_exponent()) * unit.e0)
}

fn check_unit(p: &RadialProfile) -> Result<()> {
    if (p.mass - 1.0).abs() > 1e-8 {
        return Err(Error::precondition(format!("expected a unit-mass profile, got mass {}", p.mass)));
    }
    Ok(())
}

impl RadialProfile {
    pub fn density_interp(&self) -> MonotoneCubic {
        MonotoneCubic::new(self.r.clone(), self.rho.clone())
    }

    pub fn potential_interp(&self) -> MonotoneCubic {
        MonotoneCubic::new(self.r.clone(), self.potential.clone())
    }

    /// Potential at any radius; `m/r` outside the support.
    pub fn potential_at(&self, r: f64) -> f64 {
        if r >= self.radius {
            self.mass / r
        } else {
            self.potential_interp().eval(r)
        }
    }

    /// Mass `4 pi int rho r^2 dr` by Gauss–Legendre on panels graded toward
    /// the surface, with `theta` re-integrated at the nodes.
    pub fn quadrature_mass(&self) -> f64 {
        let n = self.eos.index();
        let (xi1, _) = ode::first_zero(n);
        let (gx, gw) = crate::quadrature::gauss_legendre(16);
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        let (mut lo, mut width) = (0.0, 0.5 * xi1);
        for _ in 0..48 {
            for (x, w) in gx.iter().zip(&gw) {
                nodes.push(lo + 0.5 * width * (1.0 + x));
                weights.push(0.5 * width * w);
            }
            lo += width;
            width *= 0.5;
        }
        let th = ode::sample(n, &nodes);
        let integral = crate::quadrature::sum_by(
            nodes.iter().zip(&weights).zip(&th).map(|((x, w), t)| w * t[0].max(0.0).powf(n) * x * x),
        );
        let scale = self.radius / xi1;
        4.0 * PI * scale.powi(3) * self.central_density * integral
    }

    /// `U - G/2` by composite Simpson on the samples, independent of the
    /// integrals carried by the ODE.
    pub fn quadrature_e0(&self) -> f64 {
        let u = 4.0 * PI * self.simpson(|i| self.eos.a_unchecked(self.rho[i]) * self.r[i] * self.r[i]);
        let g = 4.0 * PI * self.simpson(|i| self.rho[i] * self.potential[i] * self.r[i] * self.r[i]);
        u - 0.5 * g
    }

    fn simpson<F: Fn(usize) -> f64>(&self, f: F) -> f64 {
        let n = self.r.len() - 1;
        let h = self.radius / n as f64;
        let mut s = f(0) + f(n);
        for i in 1..n {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i);
        }
        s * h / 3.0
    }

    /// `sup |A'(rho) - [V + lambda]_+|` over the samples.
    pub fn el0_residual(&self) -> f64 {
        self.rho
            .iter()
            .zip(&self.potential)
            .map(|(&rho, &v)| (self.eos.a_prime_unchecked(rho) - (v + self.lambda).max(0.0)).abs())
            .fold(0.0, f64::max)
    }

    /// Write `r,rho,V` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "r,rho,V")?;
        for i in 0..self.r.len() {
            writeln!(w, "{:.16e},{:.16e},{:.16e}", self.r[i], self.rho[i], self.potential[i])?;
        }
        Ok(())
    }
}

/// Sample the profile onto `geom` about `center`, renormalized to the
/// profile mass. The radius must span at least 8 cells.
pub fn to_grid(profile: &RadialProfile, geom: &Geometry, center: Vec3) -> Result<GridDensity> {
    if profile.radius < 8.0 * geom.h {
        return Err(Error::precondition(format!(
            "radius {} is resolved by fewer than 8 cells of size {}",
            profile.radius, geom.h
        )));
    }
    let interp = profile.density_interp();
    let radius = profile.radius;
    let mut rho = GridDensity::from_fn(*geom, |x| {
        let r = dist(x, center);
        if r >= radius {
            0.0
        } else {
            interp.eval(r)
        }
    });
    rho.renormalize(profile.mass)?;
    Ok(rho)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(g: f64) -> RadialProfile {
        solve_unit(&PolytropicEos::new(1.0, g).unwrap()).unwrap()
    }

    #[test]
    fn n1_radius() {
        let p = unit(2.0);
        assert!((p.radius - (PI / 2.0).sqrt()).abs() < 1e-9);
        assert!((p.mass - 1.0).abs() < 1e-15);
        assert_eq!(*p.rho.last().unwrap(), 0.0);
        assert!((p.quadrature_mass() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn rejects_soft_index() {
        let eos = PolytropicEos::new(1.0, 1.19).unwrap_err();
        assert!(matches!(eos, Error::Domain(_)));
        assert!(matches!(surface(5.5), Err(Error::Unsupported(_))));
    }

    #[test]
    fn rescale_identity_and_mass() {
        let p = unit(2.5);
        let q = rescale(&p, 1.0).unwrap();
        assert_eq!(q, p);
        let q = rescale(&p, 0.1).unwrap();
        assert!((q.quadrature_mass() - 0.1).abs() < 1e-9, "{}", q.quadrature_mass() - 0.1);
        assert!((q.e0 / p.e0 - 0.1f64.powf(6.5 / 3.5)).abs() < 1e-12);
        assert!(rescale(&p, 0.0).is_err());
        assert!(rescale(&q, 0.5).is_err());
    }

    #[test]
    fn lambda_zero_mass_limit() {
        assert_eq!(lambda_of_mass(&unit(2.0), 0.0).unwrap(), 0.0);
    }

    #[test]
    fn el0_residual_small() {
        for g in [1.8, 2.0, 2.5] {
            let p = unit(g);
            assert!(p.el0_residual() <= 1e-6 * p.lambda.abs(), "g={g} res={}", p.el0_residual());
            assert!(p.lambda < 0.0);
        }
    }

    #[test]
    fn csv_header() {
        let p = unit(2.0);
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("r,rho,V\n"));
        assert_eq!(s.lines().count(), RADIAL_INTERVALS + 2);
    }
}
