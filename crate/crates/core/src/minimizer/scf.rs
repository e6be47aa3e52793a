use super::anderson::Anderson;
use super::config::SolverConfig;
use super::multiplier::solve_multiplier;
use super::residual::el_residual_fields;
use super::result::{HistoryEntry, MinimizerResult};
use super::setup::Setup;
use crate::error::{Error, Result};
use crate::field::{grid_sum, potential_bound_constant, EnergyBreakdown, GridDensity, GridField, PatchSystem, SystemPotential};
use crate::vec3::{axial_r2, sub};

/// `Phi = V + (J^2 / (2 I^2)) r^2(x - xbar)` on every patch, with `V`
/// including the other patches and `xbar`, `I` taken over the whole system.
pub fn effective_potential(sys: &PatchSystem, j: f64) -> Result<Vec<GridField>> {
    let pot = sys.potentials()?;
    effective_from(sys, &pot, j)
}

pub(crate) fn effective_from(sys: &PatchSystem, pot: &SystemPotential, j: f64) -> Result<Vec<GridField>> {
    if sys.total_mass() <= 0.0 {
        return Err(Error::precondition("effective potential of a zero density"));
    }
    let (omega2_half, xbar) = if j > 0.0 {
        let (i, xbar) = sys.moment_of_inertia()?;
        (j * j / (2.0 * i * i), xbar)
    } else {
        (0.0, [0.0; 3])
    };
    Ok((0..sys.patches().len())
        .map(|p| {
            let mut f = pot.total(p);
            if omega2_half > 0.0 {
                let g = *f.geometry();
                f.values_mut()
                    .iter_mut()
                    .enumerate()
                    .for_each(|(idx, v)| *v += omega2_half * axial_r2(sub(g.center_of(idx), xbar)));
            }
            f
        })
        .collect())
}

/// Everything known about one iterate.
pub(crate) struct Evaluation {
    pub lambdas: Vec<f64>,
    /// Picard image `min(cap, (A')^{-1}([Phi + lambda]_+))` per patch.
    pub images: Vec<GridDensity>,
    /// Relative L1 distance between iterate and image, per patch.
    pub change: Vec<f64>,
    pub el: Vec<f64>,
    pub mass_errors: Vec<f64>,
    /// Effective potential `Phi` of the iterate, per patch.
    pub phi: Vec<GridField>,
    pub breakdown: EnergyBreakdown,
    /// Whether `max V <= k |rho|_1^{2/3} |rho|_inf^{1/3}` held.
    pub bound_ok: bool,
}

pub(crate) fn evaluate(setup: &Setup, sys: &PatchSystem) -> Result<Evaluation> {
    let pot = sys.potentials()?;
    let phi = effective_from(sys, &pot, setup.j)?;
    let breakdown = sys.energies_with(&pot, setup.j, &setup.eos)?;
    let mut lambdas = Vec::new();
    let mut images = Vec::new();
    let mut change = Vec::new();
    let mut mass_errors = Vec::new();
    for (p, patch) in sys.patches().iter().enumerate() {
        let (l, img) = solve_multiplier(
            &phi[p],
            Some(&setup.masks[p]),
            patch.target_mass,
            &setup.eos,
            setup.cap,
            setup.config.tol_multiplier,
        )?;
        let g = patch.density.geometry();
        let cur = patch.density.values();
        let new = img.values();
        let diff = grid_sum(g, cur, |i, v| (new[i] - v).abs());
        let norm = grid_sum(g, cur, |_, v| v);
        change.push(diff / norm);
        mass_errors.push((patch.density.mass() - patch.target_mass).abs() / patch.target_mass);
        lambdas.push(l);
        images.push(img);
    }
    let el = el_residual_fields(sys, &phi, &lambdas, &setup.eos, setup.cap);

    let total_mass = sys.total_mass();
    let rho_max = sys.patches().iter().map(|p| p.density.max_value()).fold(0.0, f64::max);
    let bound = potential_bound_constant() * total_mass.cbrt().powi(2) * rho_max.cbrt();
    let v_max = (0..sys.patches().len()).map(|p| pot.total(p).max_value()).fold(0.0, f64::max);
    let bound_ok = v_max <= bound;
    Ok(Evaluation { lambdas, images, change, el, mass_errors, phi, breakdown, bound_ok })
}

/// Clamp to `[0, cap]`, clear cells outside the admissible ball and rescale
/// each patch to its target mass.
pub(crate) fn project(setup: &Setup, sys: &mut PatchSystem, values: Vec<Vec<f64>>) -> Result<()> {
    let cap = setup.cap.unwrap_or(f64::INFINITY);
    for ((patch, mask), mut v) in sys.patches_mut().iter_mut().zip(&setup.masks).zip(values) {
        for (x, &ok) in v.iter_mut().zip(mask) {
            *x = if ok && x.is_finite() { x.clamp(0.0, cap) } else { 0.0 };
        }
        let mut rho = GridDensity::new(*patch.density.geometry(), v)?;
        rho.renormalize(patch.target_mass)?;
        if setup.cap.is_some() {
            rho.values_mut().iter_mut().for_each(|x| *x = x.min(cap));
        }
        patch.density = rho;
    }
    Ok(())
}

/// One damped step `rho <- (1 - theta) rho + theta rho_new` with exact mass
/// re-projection. Returns the new system, the multipliers and the per-patch
/// relative L1 change between `rho` and `rho_new`.
pub fn scf_step(setup: &Setup, sys: &PatchSystem, theta: f64) -> Result<(PatchSystem, Vec<f64>, Vec<f64>)> {
    let ev = evaluate(setup, sys)?;
    let mut next = sys.clone();
    let mixed: Vec<Vec<f64>> = sys
        .patches()
        .iter()
        .zip(&ev.images)
        .map(|(p, img)| {
            p.density.values().iter().zip(img.values()).map(|(a, b)| (1.0 - theta) * a + theta * b).collect()
        })
        .collect();
    project(setup, &mut next, mixed)?;
    Ok((next, ev.lambdas, ev.change))
}

fn max_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(0.0, f64::max)
}

/// Minimize `E_J` over the admissible class by self-consistent-field
/// iteration, accelerated by Anderson extrapolation.
pub fn minimize(config: &SolverConfig) -> Result<MinimizerResult> {
    let (setup, sys) = Setup::new(config)?;
    minimize_from(setup, sys)
}

/// Density of every patch from effective potentials `u`.
fn densities_from(setup: &Setup, sys: &PatchSystem, u: &[GridField]) -> Result<PatchSystem> {
    let mut next = sys.clone();
    for (p, patch) in next.patches_mut().iter_mut().enumerate() {
        let (_, rho) = solve_multiplier(
            &u[p],
            Some(&setup.masks[p]),
            patch.target_mass,
            &setup.eos,
            setup.cap,
            setup.config.tol_multiplier,
        )?;
        patch.density = rho;
    }
    Ok(next)
}

fn flatten(fields: &[GridField]) -> Vec<f64> {
    fields.iter().flat_map(|f| f.values().iter().copied()).collect()
}

fn unflatten(like: &[GridField], v: &[f64]) -> Result<Vec<GridField>> {
    let mut off = 0;
    like.iter()
        .map(|f| {
            let n = f.values().len();
            let out = GridField::new(*f.geometry(), v[off..off + n].to_vec());
            off += n;
            out
        })
        .collect()
}

/// Continue from a given feasible system.
///
/// With `anderson_depth = 0` this is the damped iteration of [`scf_step`],
/// halving the mixing after three growing changes in a row. Otherwise the
/// effective potential is the iteration variable: `u -> Phi(rho(u))` with
/// `rho(u) = min(cap, (A')^{-1}([u + lambda]_+))`, extrapolated by Anderson.
/// Unlike densities, potentials need no clipping, so the extrapolation stays
/// consistent near the free boundary.
pub fn minimize_from(setup: Setup, mut sys: PatchSystem) -> Result<MinimizerResult> {
    let cfg = setup.config;
    let mut accel = Anderson::new(cfg.anderson_depth);
    let mut theta = cfg.mixing;
    let mut rising = 0usize;
    let mut last_change = f64::INFINITY;
    let mut prev_res = f64::INFINITY;
    let mut history = Vec::new();
    let mut bound_violations = 0usize;
    let mut converged = false;
    let mut ev = evaluate(&setup, &sys)?;
    let seed_energy = ev.breakdown.e_j;
    // potential that produced the current iterate, once there is one
    let mut u: Option<Vec<GridField>> = None;
    let mut iterations = 0;

    loop {
        if !ev.bound_ok {
            bound_violations += 1;
        }
        let change = max_of(&ev.change);
        let el_ok = ev.el.iter().zip(&ev.lambdas).all(|(r, l)| *r <= 10.0 * cfg.tol_fixedpoint * l.abs());
        history.push(HistoryEntry {
            iteration: iterations,
            e_j: ev.breakdown.e_j,
            change,
            el_residual: max_of(&ev.el),
            theta,
        });
        if max_of(&ev.mass_errors) <= cfg.tol_mass && change <= cfg.tol_fixedpoint && el_ok {
            converged = true;
            break;
        }
        if iterations >= cfg.max_iter {
            break;
        }

        if cfg.anderson_depth == 0 {
            if change > last_change {
                rising += 1;
            } else {
                rising = 0;
            }
            last_change = change;
            if rising >= 3 {
                theta = (0.5 * theta).max(cfg.mixing / 64.0);
                rising = 0;
            }
            let mixed: Vec<Vec<f64>> = sys
                .patches()
                .iter()
                .zip(&ev.images)
                .map(|(p, img)| {
                    p.density.values().iter().zip(img.values()).map(|(a, b)| (1.0 - theta) * a + theta * b).collect()
                })
                .collect();
            project(&setup, &mut sys, mixed)?;
        } else {
            match u.take() {
                None => {
                    // first step: the plain image of the seed
                    sys = densities_from(&setup, &sys, &ev.phi)?;
                    u = Some(ev.phi.clone());
                }
                Some(prev) => {
                    let x = flatten(&prev);
                    let f: Vec<f64> = flatten(&ev.phi).iter().zip(&x).map(|(a, b)| a - b).collect();
                    let res = f.iter().map(|v| v.abs()).sum::<f64>();
                    // the extrapolation can settle into a cycle away from the
                    // fixed point; any growth of the residual drops the history
                    if res >= prev_res {
                        accel.reset();
                    }
                    prev_res = res;
                    let next = unflatten(&prev, &accel.next(&x, &f, theta))?;
                    sys = densities_from(&setup, &sys, &next)?;
                    u = Some(next);
                }
            }
        }
        iterations += 1;
        ev = evaluate(&setup, &sys)?;
    }

    let interpolation_ok = sys
        .patches()
        .iter()
        .all(|p| crate::field::interpolation_check(&p.density, 1.0, 4.0 / 3.0, f64::INFINITY).unwrap_or(false));
    Ok(MinimizerResult {
        config: cfg,
        domains: setup.domains,
        regions: setup.regions.clone(),
        densities: sys,
        multipliers: ev.lambdas,
        breakdown: ev.breakdown,
        iterations,
        mass_errors: ev.mass_errors,
        change: ev.change,
        el_residuals: ev.el,
        converged,
        seed_energy,
        bound_violations,
        interpolation_ok,
        history,
        unit_profile: setup.unit_profile,
        eos: setup.eos,
    })
}
