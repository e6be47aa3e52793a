use super::result::MinimizerResult;
use super::scf::effective_from;
use crate::eos::PolytropicEos;
use crate::error::Result;
use crate::field::{GridField, PatchSystem};
use crate::quadrature::Neumaier;

/// Per patch: sup over occupied cells of `|A'(rho) - [Phi + lambda]_+|` and
/// over empty admissible cells of `[Phi + lambda]_+`. Cells with density at
/// most `1e-6` times the cap (or the patch maximum when uncapped) and cells
/// sitting at the cap are skipped.
pub(crate) fn el_residual_fields(
    sys: &PatchSystem,
    phi: &[GridField],
    lambdas: &[f64],
    eos: &PolytropicEos,
    cap: Option<f64>,
) -> Vec<f64> {
    sys.patches()
        .iter()
        .zip(phi)
        .zip(lambdas)
        .map(|((patch, phi), &l)| {
            let rho = patch.density.values();
            let floor = 1e-6 * cap.unwrap_or_else(|| patch.density.max_value());
            let mut worst: f64 = 0.0;
            for (&r, &p) in rho.iter().zip(phi.values()) {
                let rhs = (p + l).max(0.0);
                if r == 0.0 {
                    worst = worst.max(rhs);
                } else if r > floor && cap.map_or(true, |c| r < c) {
                    worst = worst.max((eos.a_prime_unchecked(r) - rhs).abs());
                }
            }
            worst
        })
        .collect()
}

/// Euler–Lagrange residual of a result, with `Phi` recomputed from its
/// densities and its stored multipliers.
pub fn el_residual(result: &MinimizerResult) -> Result<Vec<f64>> {
    let sys = &result.densities;
    let pot = sys.potentials()?;
    let phi = effective_from(sys, &pot, result.config.j)?;
    Ok(el_residual_fields(sys, &phi, &result.multipliers, &result.eos, result.config.cap.value()))
}

/// Normalized hydrostatic residual per patch,
/// `|D P - rho D V - omega^2 rho P12(x - xbar)|_2 / |rho D V|_2`, with
/// central differences on cells whose 5^3 neighborhood is fully occupied.
pub fn ep_residual(result: &MinimizerResult) -> Result<Vec<f64>> {
    ep_residual_of(&result.densities, result.config.j, &result.eos)
}

pub fn ep_residual_of(sys: &PatchSystem, j: f64, eos: &PolytropicEos) -> Result<Vec<f64>> {
    let pot = sys.potentials()?;
    let (omega2, xbar) = if j > 0.0 {
        let (i, xbar) = sys.moment_of_inertia()?;
        ((j / i).powi(2), xbar)
    } else {
        (0.0, [0.0; 3])
    };
    let mut out = Vec::new();
    for (p, patch) in sys.patches().iter().enumerate() {
        let g = *patch.density.geometry();
        let rho = patch.density.values();
        let v = pot.total(p);
        let v = v.values();
        let pr: Vec<f64> = rho.iter().map(|&r| eos.pressure_unchecked(r)).collect();
        let [nx, ny, nz] = g.dims;
        let occupied = |i: usize, j: usize, k: usize| -> bool {
            if i < 2 || j < 2 || k < 2 || i + 2 >= nx || j + 2 >= ny || k + 2 >= nz {
                return false;
            }
            for dk in 0..5 {
                for dj in 0..5 {
                    for di in 0..5 {
                        if rho[g.index(i + di - 2, j + dj - 2, k + dk - 2)] <= 0.0 {
                            return false;
                        }
                    }
                }
            }
            true
        };
        let mut num = Neumaier::default();
        let mut den = Neumaier::default();
        let inv2h = 0.5 / g.h;
        for k in 0..nz {
            for jj in 0..ny {
                for i in 0..nx {
                    let idx = g.index(i, jj, k);
                    if rho[idx] <= 0.0 || !occupied(i, jj, k) {
                        continue;
                    }
                    let x = g.center(i, jj, k);
                    let steps = [1, nx, nx * ny];
                    for (a, &s) in steps.iter().enumerate() {
                        let dp = (pr[idx + s] - pr[idx - s]) * inv2h;
                        let dv = (v[idx + s] - v[idx - s]) * inv2h;
                        let cent = if a < 2 { omega2 * (x[a] - xbar[a]) } else { 0.0 };
                        let r = dp - rho[idx] * dv - rho[idx] * cent;
                        num.add(r * r);
                        den.add((rho[idx] * dv).powi(2));
                    }
                }
            }
        }
        let d = den.sum();
        out.push(if d > 0.0 { (num.sum() / d).sqrt() } else { 0.0 });
    }
    Ok(out)
}
