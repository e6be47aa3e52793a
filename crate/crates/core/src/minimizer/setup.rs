use super::config::{Seed, SolverConfig};
use super::domain::{make_domains, DomainPair};
use crate::eos::PolytropicEos;
use crate::error::{Error, Result};
use crate::field::{FarField, Geometry, GridDensity, Label, Patch, PatchSystem};
use crate::lane_emden::{rescale, solve_unit, to_grid, RadialProfile};
use crate::vec3::{dist, Vec3};

/// Fixed data of a solve: equation of state, admissible cells per patch and
/// the domain balls.
#[derive(Debug, Clone)]
pub struct Setup {
    pub config: SolverConfig,
    pub eos: PolytropicEos,
    pub j: f64,
    pub cap: Option<f64>,
    pub domains: Option<DomainPair>,
    /// Ball centers and radii of the admissible region inside each patch.
    pub regions: Vec<(Vec3, f64)>,
    pub masks: Vec<Vec<bool>>,
    pub unit_profile: RadialProfile,
}

/// Ratio of patch half-width to body radius.
const PATCH_MARGIN: f64 = 1.5;

/// Largest seed offset from the ball center, in body radii.
const MAX_SEED_SHIFT: f64 = 0.25;

/// Separation minimizing `-m1 m2 / d + J^2 / (2 (mu d^2 + inertia))`, the
/// energy of two rigid spherical bodies whose own moments of inertia sum to
/// `inertia`. Equals `eta` when `inertia = 0` and lies below it otherwise.
pub fn seed_separation(j: f64, m: f64, inertia: f64) -> Result<f64> {
    let eta = super::domain::separation(j, m);
    if !(inertia >= 0.0 && inertia.is_finite() && eta.is_finite() && eta > 0.0) {
        return Err(Error::domain(format!("bad seed separation input: J {j}, m {m}, inertia {inertia}")));
    }
    let mu = m * (1.0 - m);
    // sign of dE/dd, scaled by d^2 / mu
    let slope = |d: f64| 1.0 - j * j * d.powi(3) / (mu * d * d + inertia).powi(2);
    if inertia == 0.0 {
        return Ok(eta);
    }
    let (mut lo, mut hi) = (0.0, eta);
    if slope(hi) <= 0.0 {
        return Ok(eta);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if slope(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Smallest `J` for which both Lane–Emden bodies fit into their balls, and
/// the largest planet mass that fits at the given `J`.
pub fn feasibility_hint(unit: &RadialProfile, eos: &PolytropicEos, j: f64, m: f64) -> (f64, f64) {
    let r = |mass: f64| unit.radius * eos.scaling_coeffs(mass).expect("positive").1;
    let rmax = |mass: f64| r(mass).max(r(1.0 - mass));
    let mu = m * (1.0 - m);
    let min_j = 2.0 * mu * rmax(m).sqrt();
    let fits = |mass: f64| super::domain::separation(j, mass) / 4.0 >= rmax(mass);
    let max_m = if !fits(1e-9) {
        0.0
    } else if fits(0.5 - 1e-12) {
        0.5
    } else {
        let (mut lo, mut hi) = (1e-9, 0.5 - 1e-12);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if fits(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };
    (min_j, max_m)
}

impl Setup {
    /// Validate the configuration and build the seed system.
    pub fn new(config: &SolverConfig) -> Result<(Setup, PatchSystem)> {
        config.validate()?;
        let eos = config.eos()?;
        let unit = solve_unit(&eos)?;
        let cap = config.cap.value();
        let cpr = config.cells_per_radius;

        let bodies: Vec<(Label, f64, Vec3, f64)> = if config.is_single_body() {
            vec![(Label::Star, 1.0, [0.0; 3], f64::INFINITY)]
        } else {
            let d = make_domains(config.j, config.m)?;
            vec![
                (Label::Planet, config.m, d.center_planet, d.ball_radius),
                (Label::Star, 1.0 - config.m, d.center_star, d.ball_radius),
            ]
        };
        let domains = if config.is_single_body() { None } else { Some(make_domains(config.j, config.m)?) };

        if let Some(d) = &domains {
            for &(_, mass, _, ball) in &bodies {
                let r = rescale(&unit, mass)?.radius;
                if r > ball {
                    let (min_j, max_m) = feasibility_hint(&unit, &eos, config.j, config.m);
                    return Err(Error::InfeasibleGeometry {
                        reason: format!("body of mass {mass} has radius {r:.6e} beyond the ball radius {ball:.6e}"),
                        min_j,
                        max_m,
                    });
                }
            }
            if let Some(c) = cap {
                let need = d.nonempty_cap_threshold() * config.m.max(1.0 - config.m);
                if c < need {
                    return Err(Error::Config(format!("cap {c} is below the non-emptiness threshold {need}")));
                }
            }
        }

        let mut patches = Vec::new();
        let mut masks = Vec::new();
        let mut regions = Vec::new();
        for &(label, mass, center, ball) in &bodies {
            let profile = rescale(&unit, mass)?;
            let h = profile.radius / cpr as f64;
            let half = ball.min(PATCH_MARGIN * profile.radius);
            let n = 2 * (half / h - 1e-9).ceil() as usize;
            let geom = Geometry::centered(n, h, center)?;
            let region = half.min(0.5 * n as f64 * h);
            let mask: Vec<bool> = (0..geom.len()).map(|i| dist(geom.center_of(i), center) < region).collect();
            let density = match config.seed {
                Seed::LaneEmden | Seed::Centered => to_grid(&profile, &geom, center)?,
                Seed::Uniform => {
                    let rad = match &domains {
                        Some(d) => (d.eta / 8.0).min(region),
                        None => region,
                    };
                    let mut rho = GridDensity::from_fn(geom, |x| if dist(x, center) < rad { 1.0 } else { 0.0 });
                    rho.renormalize(mass)?;
                    rho
                }
            };
            if let Some(c) = cap {
                if density.max_value() > c {
                    return Err(Error::Config(format!(
                        "seed density {} exceeds the cap {c}",
                        density.max_value()
                    )));
                }
            }
            patches.push(Patch { density, label, target_mass: mass });
            masks.push(mask);
            regions.push((center, region));
        }
        if let (Some(d), Seed::LaneEmden) = (&domains, config.seed) {
            // move the seeds to the separation of the rigid-body model, which
            // spares the iteration its slowest mode
            let mut inertia = 0.0;
            for p in &patches {
                inertia += crate::field::moment_of_inertia(&p.density)?.0;
            }
            let d0 = seed_separation(config.j, config.m, inertia)?;
            // planet from (1-m) eta to (1-m) d0, star from -m eta to -m d0
            let shifts = [-(1.0 - config.m) * (d.eta - d0), config.m * (d.eta - d0)];
            for (k, &(_, mass, center, _)) in bodies.iter().enumerate() {
                let profile = rescale(&unit, mass)?;
                let limit = MAX_SEED_SHIFT * profile.radius;
                let at = [center[0] + shifts[k].clamp(-limit, limit), center[1], center[2]];
                let geom = *patches[k].density.geometry();
                patches[k].density = to_grid(&profile, &geom, at)?;
            }
        }
        let sys = PatchSystem::new(patches, config.coupling)?;
        let setup = Setup { config: *config, eos, j: config.j, cap, domains, regions, masks, unit_profile: unit };
        Ok((setup, sys))
    }

    pub fn coupling(&self) -> FarField {
        self.config.coupling
    }
}
