use crate::exit::{Failure, OK, VERIFY_FAILED};
use crate::{Suite, VerifyArgs};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use starplanet::diagnostics::*;
use starplanet::eos::PolytropicEos;
use starplanet::field::*;
use starplanet::lane_emden::*;
use starplanet::minimizer::{el_residual, ep_residual, minimize, SolverConfig};
use starplanet::Result;
use std::f64::consts::PI;
use std::time::Instant;

/// Soft runtime budget of the full suite.
const BUDGET_SECS: f64 = 600.0;

struct Check {
    name: &'static str,
    measured: String,
    expected: String,
    pass: bool,
}

fn check(name: &'static str, measured: impl ToString, expected: impl ToString, pass: bool) -> Check {
    Check { name, measured: measured.to_string(), expected: expected.to_string(), pass }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn random_density(rng: &mut ChaCha8Rng, dims: [usize; 3], h: f64, origin: [f64; 3], fill: f64) -> Result<GridDensity> {
    let g = Geometry::new(dims, h, origin)?;
    let values = (0..g.len()).map(|_| if rng.gen::<f64>() < fill { rng.gen_range(0.0..3.0) } else { 0.0 }).collect();
    GridDensity::new(g, values)
}

/// Non-empty random density; redraws until a cell is occupied.
fn nonempty(rng: &mut ChaCha8Rng, dims: [usize; 3], h: f64, origin: [f64; 3], fill: f64) -> Result<GridDensity> {
    loop {
        let rho = random_density(rng, dims, h, origin, fill)?;
        if rho.mass() > 0.0 {
            return Ok(rho);
        }
    }
}

fn inertia_expansion(rng: &mut ChaCha8Rng) -> Result<Check> {
    let mut worst: f64 = 0.0;
    for _ in 0..25 {
        let h = rng.gen_range(0.05..0.3);
        let dims = [rng.gen_range(2..7), rng.gen_range(2..7), rng.gen_range(2..7)];
        let o1 = [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0), rng.gen_range(-1.0..1.0)];
        let o2 = [o1[0] + (dims[0] as f64 + 1.0) * h + rng.gen_range(0.0..4.0), rng.gen_range(-3.0..3.0), 0.0];
        let a = nonempty(rng, dims, h, o1, 0.6)?;
        let b = nonempty(rng, dims, 1.3 * h, o2, 0.6)?;
        // second moment of the union about its own center of mass, cell by cell
        let cells: Vec<([f64; 3], f64)> = [&a, &b]
            .iter()
            .flat_map(|rho| {
                let g = *rho.geometry();
                rho.values().iter().enumerate().map(move |(i, &v)| (g.center_of(i), v * g.cell_volume())).collect::<Vec<_>>()
            })
            .collect();
        let mass: f64 = cells.iter().map(|c| c.1).sum();
        let cx = cells.iter().map(|c| c.0[0] * c.1).sum::<f64>() / mass;
        let cy = cells.iter().map(|c| c.0[1] * c.1).sum::<f64>() / mass;
        let direct: f64 = cells.iter().map(|c| c.1 * ((c.0[0] - cx).powi(2) + (c.0[1] - cy).powi(2))).sum();
        let (ma, mb) = (a.mass(), b.mass());
        let sys = PatchSystem::new(
            vec![
                Patch { density: a, label: Label::Planet, target_mass: ma },
                Patch { density: b, label: Label::Star, target_mass: mb },
            ],
            FarField::Monopole,
        )?;
        worst = worst.max(rel(sys.moment_of_inertia()?.0, direct));
    }
    Ok(check("inertia expansion", format!("{worst:.2e}"), "<= 1e-10", worst <= 1e-10))
}

fn potential_bound_check(rng: &mut ChaCha8Rng) -> Result<Check> {
    let mut worst: f64 = 0.0;
    for _ in 0..25 {
        let dims = [rng.gen_range(3..12), rng.gen_range(3..12), rng.gen_range(3..12)];
        let fill = rng.gen_range(0.05..1.0);
        let h = rng.gen_range(0.01..1.0);
        let rho = nonempty(rng, dims, h, [0.0; 3], fill)?;
        worst = worst.max(potential(&rho).max_value() / potential_bound(&rho));
    }
    Ok(check("potential bound", format!("max V/bound {worst:.4}"), "<= 1", worst <= 1.0))
}

/// `∫ 1/|u| du` over the unit cube.
fn cube_integral() -> f64 {
    let s3 = 3f64.sqrt();
    3.0 * ((s3 + 1.0) / (s3 - 1.0)).ln() - PI / 2.0
}

fn fft_vs_direct(rng: &mut ChaCha8Rng) -> Result<Check> {
    let rho = nonempty(rng, [9, 7, 8], 0.2, [0.3, -0.1, 0.0], 0.5)?;
    let g = *rho.geometry();
    let v = rho.values();
    let fft = potential(&rho);
    let mut worst: f64 = 0.0;
    for i in 0..g.len() {
        let x = g.center_of(i);
        let mut acc = 0.0;
        for (j, &w) in v.iter().enumerate() {
            acc += w * if i == j {
                cube_integral() / g.h
            } else {
                let y = g.center_of(j);
                1.0 / ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2) + (x[2] - y[2]).powi(2)).sqrt()
            };
        }
        worst = worst.max(rel(fft.values()[i], acc * g.cell_volume()));
    }
    Ok(check("FFT potential vs direct sum", format!("{worst:.2e}"), "<= 1e-10", worst <= 1e-10))
}

fn g_zero_at_one() -> Result<Check> {
    let (_, g0) = g_functions(1.0, 0.0, 1.0, 0.5)?;
    Ok(check("g0(1)", g0, "0 exactly", g0 == 0.0))
}

fn kepler() -> Result<Check> {
    let (mu, j) = (0.18, 0.5);
    let d = kepler_argmin(mu, j)?;
    let e = kepler_energy(d, mu, j)?;
    let closed = -mu.powi(3) / (2.0 * j * j);
    // minimality against neighbours
    let local = kepler_energy(d * 0.99, mu, j)? > e && kepler_energy(d * 1.01, mu, j)? > e;
    let ok = rel(d, j * j / (mu * mu)) <= 1e-14 && rel(e, closed) <= 1e-12 && local;
    Ok(check("Kepler argmin and minimum", format!("d {d:.6}, E {e:.6e}"), format!("d {:.6}, E {closed:.6e}", j * j / (mu * mu)), ok))
}

fn interpolation(rng: &mut ChaCha8Rng) -> Result<Check> {
    let mut ok = true;
    for _ in 0..20 {
        let rho = nonempty(rng, [6, 5, 7], 0.3, [0.0; 3], 0.7)?;
        for (p, r, q) in [(1.0, 2.0, f64::INFINITY), (1.0, 4.0 / 3.0, 2.0), (1.5, 2.0, 3.0)] {
            ok &= interpolation_check(&rho, p, r, q)?;
        }
    }
    Ok(check("interpolation inequality", if ok { "holds" } else { "violated" }, "holds on 60 cases", ok))
}

fn analytic_polytrope() -> Result<Check> {
    let unit = solve_unit(&PolytropicEos::new(1.0, 2.0)?)?;
    let r_err = rel(unit.radius, (PI / 2.0).sqrt());
    let xi: Vec<f64> = (1..=400).map(|i| i as f64 * PI / 401.0).collect();
    let t_err = theta(1.0, &xi)?.iter().zip(&xi).map(|(t, x)| (t - x.sin() / x).abs()).fold(0.0, f64::max);
    Ok(check(
        "gamma=2 radius and theta",
        format!("R err {r_err:.1e}, theta err {t_err:.1e}"),
        "<= 1e-4, <= 1e-8",
        r_err <= 1e-4 && t_err <= 1e-8,
    ))
}

/// Recomputes `E_J = U - G/2 + J^2/(2I)` from its parts.
fn energy_assembly() -> Result<Check> {
    let eos = PolytropicEos::new(1.0, 2.0)?;
    let p = rescale(&solve_unit(&eos)?, 0.3)?;
    let g = Geometry::centered(24, p.radius / 8.0, [0.7, 0.0, 0.0])?;
    let rho = to_grid(&p, &g, g.midpoint())?;
    let j = 0.5;
    let e = energies(&rho, j, &eos)?;
    let v = potential(&rho);
    let g_self = rho.values().iter().zip(v.values()).map(|(a, b)| a * b).sum::<f64>() * g.cell_volume();
    let (inertia, _) = moment_of_inertia(&rho)?;
    let expected = internal_energy(&rho, &eos) - 0.5 * g_self + j * j / (2.0 * inertia);
    let err = rel(e.e_j, expected);
    Ok(check("energy assembly", format!("{:.12e}", e.e_j), format!("{expected:.12e}"), err <= 1e-12))
}

fn multiplier_formula() -> Result<Check> {
    let mut worst: f64 = 0.0;
    for gamma in [1.8, 2.0, 2.5] {
        let unit = solve_unit(&PolytropicEos::new(1.0, gamma)?)?;
        for m in [0.1, 0.5, 1.0] {
            let closed = lambda_of_mass(&unit, m)?;
            worst = worst.max(rel(closed, -m / rescale(&unit, m)?.radius));
        }
    }
    Ok(check("multiplier closed form vs surface", format!("{worst:.2e}"), "<= 1e-3", worst <= 1e-3))
}

fn fast_checks() -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    Ok(vec![
        inertia_expansion(&mut rng)?,
        potential_bound_check(&mut rng)?,
        fft_vs_direct(&mut rng)?,
        g_zero_at_one()?,
        kepler()?,
        interpolation(&mut rng)?,
        analytic_polytrope()?,
        energy_assembly()?,
        multiplier_formula()?,
    ])
}

fn nonrotating_solve() -> Result<Check> {
    let r = minimize(&SolverConfig { j: 0.0, m: 0.2, gamma: 2.0, cells_per_radius: 16, ..Default::default() })?;
    let rho = &r.densities.patches()[0].density;
    let l1 = l1_to_profile(rho, &r.unit_profile)?;
    Ok(check("J=0 grid solve vs analytic", format!("converged={} L1 {l1:.4}", r.converged), "converged, L1 <= 0.02", r.converged && l1 <= 0.02))
}

fn rotating_solve() -> Result<Vec<Check>> {
    let r = minimize(&SolverConfig { j: 0.5, m: 0.1, gamma: 2.0, cells_per_radius: 8, ..Default::default() })?;
    let el = el_residual(&r)?;
    let el_ok = el.iter().zip(&r.multipliers).all(|(e, l)| *e <= 10.0 * r.config.tol_fixedpoint * l.abs());
    let ep = ep_residual(&r)?.into_iter().fold(0.0, f64::max);
    let ratio = separation_ratio(&r)?;
    let sym = symmetry_check(&r)?;
    Ok(vec![
        check("rotating solve converged", r.converged, true, r.converged),
        check("rotating Euler-Lagrange residual", format!("{:.2e}", el.iter().cloned().fold(0.0, f64::max)), "<= 10 tol |lambda|", el_ok),
        check("rotating Euler-Poisson residual", format!("{ep:.4}"), "<= 0.1", ep <= 0.1),
        check("separation ratio d/eta", format!("{ratio:.4}"), "in (0.9, 1.1)", ratio > 0.9 && ratio < 1.1),
        check(
            "mid-plane symmetry",
            format!("mirror {:.1e}, monotone {:.1e}", sym.mirror_l1, sym.monotone_violation),
            "<= 1e-6, <= 1e-9",
            sym.mirror_l1 <= 1e-6 && sym.monotone_violation <= 1e-9,
        ),
    ])
}

fn scaling_fit() -> Result<Check> {
    let gamma = 2.5;
    let eos = PolytropicEos::new(1.0, gamma)?;
    let unit = solve_unit(&eos)?;
    // independent radial solves at the central density of each mass
    let pts = [0.05, 0.1, 0.2, 0.5, 1.0]
        .iter()
        .map(|&m| {
            let p = solve_central(&eos, rescale(&unit, m)?.central_density)?;
            Ok((p.mass, -p.e0))
        })
        .collect::<Result<Vec<_>>>()?;
    let slope = exponent_fit(&pts)?.slope;
    let expected = (5.0 * gamma - 6.0) / (3.0 * gamma - 4.0);
    Ok(check("energy scaling exponent", format!("{slope:.6}"), format!("{expected:.6}"), (slope - expected).abs() <= 1e-3))
}

fn full_checks() -> Result<Vec<Check>> {
    let mut out = vec![nonrotating_solve()?];
    out.extend(rotating_solve()?);
    out.push(scaling_fit()?);
    Ok(out)
}

fn print_table(checks: &[Check]) {
    let w = checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
    println!("{:<4}  {:<w$}  {:<40}  expected", "", "check", "measured");
    for c in checks {
        let verdict = if c.pass { "PASS" } else { "FAIL" };
        println!("{verdict:<4}  {:<w$}  {:<40}  {}", c.name, c.measured, c.expected);
    }
}

pub fn run(a: &VerifyArgs) -> u8 {
    if a.inject_rotation_sign_fault {
        starplanet::testing::set_flip_rotation_sign(true);
    }
    let start = Instant::now();
    let checks = fast_checks().and_then(|mut c| {
        if a.suite == Suite::Full {
            c.extend(full_checks()?);
        }
        Ok(c)
    });
    let checks = match checks {
        Ok(c) => c,
        Err(e) => {
            let f = Failure::from(e);
            eprintln!("error: verification aborted: {}", f.message);
            return VERIFY_FAILED;
        }
    };
    print_table(&checks);
    let elapsed = start.elapsed().as_secs_f64();
    if elapsed > BUDGET_SECS {
        eprintln!("warning: suite took {elapsed:.0} s, over the {BUDGET_SECS:.0} s budget");
    }
    let failed: Vec<&Check> = checks.iter().filter(|c| !c.pass).collect();
    for c in &failed {
        eprintln!("FAILED {}: measured {}, expected {}", c.name, c.measured, c.expected);
    }
    println!("{} of {} checks passed in {elapsed:.1} s", checks.len() - failed.len(), checks.len());
    if failed.is_empty() {
        OK
    } else {
        VERIFY_FAILED
    }
}
