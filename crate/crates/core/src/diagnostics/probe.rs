use super::support::{default_floor, support_stats};
use crate::error::{Error, Result};
use crate::field::{unit_kernel, Multipole, PatchSystem, SystemPotential};
use crate::minimizer::MinimizerResult;
use crate::vec3::{add, dist, dot, norm, scale, sub, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Sparse zero-mass change of one patch: `(cell index, value)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct Perturbation {
    pub patch: usize,
    pub cells: Vec<(usize, f64)>,
}

impl Perturbation {
    pub fn negated(&self) -> Perturbation {
        Perturbation { patch: self.patch, cells: self.cells.iter().map(|&(i, v)| (i, -v)).collect() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbeReport {
    pub trials: usize,
    pub rejections: usize,
    pub e_j: f64,
    /// Smallest `E_J(rho + s) - E_J(rho)` seen.
    pub worst: f64,
    /// Trials where `-s` was feasible as well.
    pub pairs: usize,
    /// Smallest `dE(s) + dE(-s)` over those trials.
    pub pair_min: f64,
}

/// Energy change of `result` under `s`, evaluated with the solver's own
/// energy: the self potential is updated by direct summation over the cells
/// of `s` and the far field of the changed patch is rebuilt.
pub struct EnergyProbe<'a> {
    sys: &'a PatchSystem,
    pot: SystemPotential,
    j: f64,
    eos: crate::eos::PolytropicEos,
    e_j: f64,
}

impl<'a> EnergyProbe<'a> {
    pub fn new(result: &'a MinimizerResult) -> Result<Self> {
        let sys = &result.densities;
        let pot = sys.potentials()?;
        let e_j = sys.energies_with(&pot, result.config.j, &result.eos)?.e_j;
        Ok(Self { sys, pot, j: result.config.j, eos: result.eos, e_j })
    }

    pub fn energy(&self) -> f64 {
        self.e_j
    }

    /// `E_J(rho + s) - E_J(rho)`; `s` must keep the density non-negative.
    pub fn delta(&self, s: &Perturbation) -> Result<f64> {
        if s.cells.is_empty() {
            return Ok(0.0);
        }
        let p = s.patch;
        let mut sys = self.sys.clone();
        let old = &self.sys.patches()[p].density;
        let g = *old.geometry();
        {
            let v = sys.patches_mut()[p].density.values_mut();
            for &(i, x) in &s.cells {
                v[i] += x;
                if v[i] < 0.0 {
                    if v[i] < -1e-14 * old.max_value() {
                        return Err(Error::precondition("perturbation drives the density negative"));
                    }
                    v[i] = 0.0;
                }
            }
        }
        let mut pot = self.pot.clone();
        let sites: Vec<([usize; 3], f64)> = s.cells.iter().map(|&(i, x)| (g.unindex(i), x)).collect();
        let h2 = g.h * g.h;
        for (idx, v) in pot.self_part[p].values_mut().iter_mut().enumerate() {
            let [a, b, c] = g.unindex(idx);
            let mut acc = 0.0;
            for &([i, j, k], x) in &sites {
                acc += x * unit_kernel(a as i64 - i as i64, b as i64 - j as i64, c as i64 - k as i64);
            }
            *v += h2 * acc;
        }
        let changed = &sys.patches()[p].density;
        let before = Multipole::of(old)?;
        let after = Multipole::of(changed)?;
        for (q, other) in sys.patches().iter().enumerate() {
            if q == p {
                continue;
            }
            let gq = other.density.geometry();
            for (idx, e) in pot.external[q].iter_mut().enumerate() {
                let x = gq.center_of(idx);
                *e += after.eval(x, sys.coupling()) - before.eval(x, sys.coupling());
            }
        }
        Ok(sys.energies_with(&pot, self.j, &self.eos)?.e_j - self.e_j)
    }
}

fn random_in_ball(rng: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let v = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        if norm(v) <= 1.0 {
            return v;
        }
    }
}

/// Truncated cosine bump of radius `r` at `c` split by the plane through `c`
/// normal to `n`: the two halves, each normalized to unit grid mass.
fn split_bump(sys: &PatchSystem, p: usize, c: Vec3, r: f64, n: Vec3) -> (Vec<(usize, f64)>, Vec<(usize, f64)>) {
    let g = sys.patches()[p].density.geometry();
    let reach = (r / g.h).ceil() as i64 + 1;
    let ci = [0, 1, 2].map(|a| ((c[a] - g.origin[a]) / g.h).round() as i64);
    let mut plus = Vec::new();
    let mut minus = Vec::new();
    for di in -reach..=reach {
        for dj in -reach..=reach {
            for dk in -reach..=reach {
                let (i, j, k) = (ci[0] + di, ci[1] + dj, ci[2] + dk);
                let inside = |v: i64, n: usize| v >= 0 && (v as usize) < n;
                if !(inside(i, g.dims[0]) && inside(j, g.dims[1]) && inside(k, g.dims[2])) {
                    continue;
                }
                let idx = g.index(i as usize, j as usize, k as usize);
                let y = sub(g.center_of(idx), c);
                let d = norm(y);
                if d >= r {
                    continue;
                }
                let w = 0.5 * (1.0 + (std::f64::consts::PI * d / r).cos());
                let side = dot(y, n);
                if side > 0.0 {
                    plus.push((idx, w));
                } else if side < 0.0 {
                    minus.push((idx, w));
                }
            }
        }
    }
    for half in [&mut plus, &mut minus] {
        let total: f64 = half.iter().map(|x| x.1).sum::<f64>() * g.cell_volume();
        if total > 0.0 {
            half.iter_mut().for_each(|x| x.1 /= total);
        }
    }
    (plus, minus)
}

fn feasible(result: &MinimizerResult, s: &Perturbation) -> bool {
    let rho = &result.densities.patches()[s.patch].density;
    let g = rho.geometry();
    let (c, r) = result.regions[s.patch];
    let cap = result.config.cap.value().unwrap_or(f64::INFINITY);
    s.cells.iter().all(|&(i, x)| {
        let v = rho.values()[i] + x;
        dist(g.center_of(i), c) < r && v >= 0.0 && v <= cap
    })
}

/// Random zero-mass perturbations: a truncated-cosine bump in a ball of
/// radius `radius_frac` times the support radius of the patch, positive on
/// one side of a random plane through its center and negative on the other. Returns the smallest energy change.
pub fn local_min_probe(result: &MinimizerResult, trials: usize, radius_frac: f64, seed: u64) -> Result<ProbeReport> {
    if !(radius_frac > 0.0 && radius_frac.is_finite()) {
        return Err(Error::domain(format!("radius fraction must be positive, got {radius_frac}")));
    }
    let probe = EnergyProbe::new(result)?;
    let sys = &result.densities;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut occupied = Vec::new();
    let mut ball = Vec::new();
    for p in sys.patches() {
        let floor = default_floor(&p.density);
        occupied.push(p.density.values().iter().enumerate().filter(|(_, &v)| v > floor).map(|(i, _)| i).collect::<Vec<_>>());
        ball.push(radius_frac * support_stats(&p.density, None)?.radius);
    }
    let mut report = ProbeReport {
        trials,
        rejections: 0,
        e_j: probe.energy(),
        worst: f64::INFINITY,
        pairs: 0,
        pair_min: f64::INFINITY,
    };
    let mut done = 0;
    while done < trials {
        if report.rejections > 100 * trials.max(1) {
            return Err(Error::precondition(format!(
                "{} infeasible perturbations after {done} accepted",
                report.rejections
            )));
        }
        let p = rng.gen_range(0..sys.patches().len());
        let g = *sys.patches()[p].density.geometry();
        let cell = occupied[p][rng.gen_range(0..occupied[p].len())];
        let rb = ball[p];
        let center = add(g.center_of(cell), scale(random_in_ball(&mut rng), 0.5 * g.h));
        let dir = random_in_ball(&mut rng);
        if norm(dir) < 1e-3 {
            report.rejections += 1;
            continue;
        }
        let (plus, minus) = split_bump(sys, p, center, rb, dir);
        if plus.is_empty() || minus.is_empty() {
            report.rejections += 1;
            continue;
        }
        // the largest amplitude keeping rho - a * minus >= 0
        let rho = sys.patches()[p].density.values();
        let amax = minus.iter().map(|&(i, b)| rho[i] / b).fold(f64::INFINITY, f64::min);
        let amp = rng.gen_range(0.0..1.0) * amax;
        let mut cells = plus.iter().map(|&(i, b)| (i, amp * b)).collect::<Vec<_>>();
        cells.extend(minus.iter().map(|&(i, b)| (i, -amp * b)));
        let s = Perturbation { patch: p, cells };
        if amp == 0.0 || !feasible(result, &s) {
            report.rejections += 1;
            continue;
        }
        let de = probe.delta(&s)?;
        report.worst = report.worst.min(de);
        let neg = s.negated();
        if feasible(result, &neg) {
            let back = probe.delta(&neg)?;
            report.pairs += 1;
            report.pair_min = report.pair_min.min(de + back);
        }
        done += 1;
    }
    if trials == 0 {
        report.worst = 0.0;
    }
    Ok(report)
}
