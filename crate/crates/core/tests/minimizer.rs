mod common;

use common::*;
use proptest::prelude::*;
use rand::Rng;
use starplanet::eos::PolytropicEos;
use starplanet::field::*;
use starplanet::lane_emden::{rescale, solve_unit, to_grid};
use starplanet::minimizer::*;
use starplanet::Error;
use std::f64::consts::PI;
use std::sync::OnceLock;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

fn l1_rel(a: &GridDensity, b: &GridDensity) -> f64 {
    let d: f64 = a.values().iter().zip(b.values()).map(|(x, y)| (x - y).abs()).sum();
    d / b.values().iter().sum::<f64>()
}

fn rotating() -> &'static MinimizerResult {
    static R: OnceLock<MinimizerResult> = OnceLock::new();
    R.get_or_init(|| {
        let cfg = SolverConfig { j: 0.5, m: 0.1, cells_per_radius: 8, ..Default::default() };
        minimize(&cfg).unwrap()
    })
}

#[test]
fn domain_examples() {
    let d = make_domains(1.0, 0.5).unwrap();
    assert_eq!(d.eta, 16.0);
    assert_eq!(d.ball_radius, 4.0);
    assert!((d.dist() - 8.0).abs() < 1e-12);
    assert!((d.diam() - 24.0).abs() < 1e-12);
    assert_eq!(make_domains(2.0, 0.5).unwrap().eta, 64.0);
    assert!(make_domains(1.0, 1e-4).unwrap().eta > 1e7);

    let d = make_domains(0.7, 0.13).unwrap();
    assert_eq!(d.center_planet[2], 0.0);
    assert_eq!(d.center_star[2], 0.0);
    assert!(rel(dist(d.center_planet, d.center_star), d.eta) < 1e-15);
    let bary: Vec<f64> = (0..3).map(|k| 0.13 * d.center_planet[k] + 0.87 * d.center_star[k]).collect();
    assert!(bary.iter().all(|x| x.abs() < 1e-12 * d.eta));
    assert!(rel(d.dist(), d.eta / 2.0) < 1e-14);

    assert!(matches!(make_domains(1.0, 0.0), Err(Error::Domain(_))));
    assert!(matches!(make_domains(1.0, 1.0), Err(Error::Domain(_))));
    assert!(matches!(make_domains(0.0, 0.2), Err(Error::Domain(_))));
}

#[test]
fn uniform_seed_arithmetic() {
    let d = make_domains(0.5, 0.2).unwrap();
    for m in [0.2, 0.8] {
        let mass = 4.0 / 3.0 * PI * (d.eta / 8.0).powi(3) * d.uniform_seed_density(m);
        assert!(rel(mass, m) < 1e-14);
    }
    assert!(rel(d.nonempty_cap_threshold() * 0.8, d.uniform_seed_density(0.8)) < 1e-14);
}

#[test]
fn seeds_are_feasible() {
    for seed in [Seed::LaneEmden, Seed::Centered, Seed::Uniform] {
        let cfg = SolverConfig { j: 0.5, m: 0.2, cells_per_radius: 8, seed, ..Default::default() };
        let (setup, sys) = Setup::new(&cfg).unwrap();
        for ((p, mask), target) in sys.patches().iter().zip(&setup.masks).zip([0.2, 0.8]) {
            assert!((p.density.mass() - target).abs() < 1e-14);
            for (v, ok) in p.density.values().iter().zip(mask) {
                assert!(*ok || *v == 0.0);
            }
        }
    }
}

#[test]
fn infeasible_configurations_are_rejected() {
    let cfg = SolverConfig { m: 0.5, ..Default::default() };
    assert!(matches!(Setup::new(&cfg), Err(Error::Config(_))));
    // the gamma = 2 bodies have radius sqrt(pi/2) and need eta/4 above it
    let cfg = SolverConfig { j: 0.3, m: 0.2, cells_per_radius: 8, ..Default::default() };
    match Setup::new(&cfg) {
        Err(Error::InfeasibleGeometry { min_j, max_m, .. }) => {
            let expected = 2.0 * 0.16 * (PI / 2.0).sqrt().sqrt();
            assert!(rel(min_j, expected) < 1e-6, "{min_j}");
            assert!(max_m > 0.0 && max_m < 0.2);
        }
        other => panic!("expected an infeasible geometry, got {other:?}"),
    }
    let cfg = SolverConfig { cap: Cap::Value(1e-6), cells_per_radius: 8, ..Default::default() };
    assert!(Setup::new(&cfg).is_err());
}

#[test]
fn seed_separation_minimizes_the_rigid_body_energy() {
    let (j, m) = (0.5, 0.2);
    let eta = separation(j, m);
    assert_eq!(seed_separation(j, m, 0.0).unwrap(), eta);
    let mu = m * (1.0 - m);
    let inertia = 0.3;
    let d0 = seed_separation(j, m, inertia).unwrap();
    assert!(d0 < eta);
    let energy = |d: f64| -mu / d + j * j / (2.0 * (mu * d * d + inertia));
    for f in [0.99, 0.999, 1.001, 1.01] {
        assert!(energy(d0) < energy(d0 * f));
    }
    assert!(seed_separation(j, m, -1.0).is_err());
}

#[test]
fn multiplier_for_a_constant_potential() {
    let eos = PolytropicEos::new(1.0, 2.0).unwrap();
    let g = Geometry::centered(20, 0.1, [0.0; 3]).unwrap();
    let mask: Vec<bool> = (0..g.len()).map(|i| dist(g.center_of(i), g.midpoint()) < 0.8).collect();
    let vol = mask.iter().filter(|&&b| b).count() as f64 * g.cell_volume();
    let c = 0.37;
    let phi = GridField::new(g, vec![c; g.len()]).unwrap();
    for target in [0.01, 0.5, 3.0] {
        let (l, rho) = solve_multiplier(&phi, Some(&mask), target, &eos, None, 1e-12).unwrap();
        assert!((l - (2.0 * target / vol - c)).abs() < 1e-10, "{l}");
        assert!((rho.mass() - target).abs() < 1e-12 * target);
        assert!(rho.values().iter().zip(&mask).all(|(v, ok)| *ok || *v == 0.0));
    }
    assert!(matches!(solve_multiplier(&phi, Some(&mask), 0.0, &eos, None, 1e-12), Err(Error::Domain(_))));
}

#[test]
fn vanishing_mass_multiplier_tends_to_minus_sup_phi() {
    let eos = PolytropicEos::new(1.0, 2.0).unwrap();
    let g = Geometry::centered(12, 0.1, [0.0; 3]).unwrap();
    let phi = GridField::new(g, (0..g.len()).map(|i| 1.0 - dist(g.center_of(i), g.midpoint())).collect()).unwrap();
    let sup = phi.values().iter().cloned().fold(f64::MIN, f64::max);
    let mut last = f64::INFINITY;
    for target in [1e-2, 1e-4, 1e-6, 1e-8] {
        let (l, _) = solve_multiplier(&phi, None, target, &eos, None, 1e-12).unwrap();
        let gap = l + sup;
        assert!(gap > 0.0 && gap < last);
        last = gap;
    }
    assert!(last < 1e-5);
}

#[test]
fn inactive_cap_leaves_the_multiplier_alone() {
    let eos = PolytropicEos::new(1.0, 2.5).unwrap();
    let mut r = rng(2);
    let g = Geometry::centered(14, 0.1, [0.0; 3]).unwrap();
    let phi = GridField::new(g, (0..g.len()).map(|i| 2.0 - dist(g.center_of(i), g.midpoint()) + 0.01 * r.gen::<f64>()).collect()).unwrap();
    let (l0, rho) = solve_multiplier(&phi, None, 0.4, &eos, None, 1e-12).unwrap();
    let cap = rho.max_value() * 1.01;
    let (l1, _) = solve_multiplier(&phi, None, 0.4, &eos, Some(cap), 1e-12).unwrap();
    let (l2, _) = solve_multiplier(&phi, None, 0.4, &eos, Some(2.0 * cap), 1e-12).unwrap();
    assert!((l1 - l0).abs() <= 1e-12 * l0.abs());
    assert!((l2 - l1).abs() <= 1e-12 * l1.abs());

    // an active cap still meets the mass, and a tiny one cannot
    let (_, capped) = solve_multiplier(&phi, None, 0.4, &eos, Some(0.6 * cap), 1e-12).unwrap();
    assert!(capped.max_value() <= 0.6 * cap);
    assert!((capped.mass() - 0.4).abs() < 1e-12);
    let tiny = 0.4 / (g.len() as f64 * g.cell_volume()) * 0.5;
    assert!(matches!(solve_multiplier(&phi, None, 0.4, &eos, Some(tiny), 1e-12), Err(Error::InfeasibleCap { .. })));
}

#[test]
fn effective_potential_sees_the_other_body_as_a_point_mass() {
    let m = 0.1;
    let gp = Geometry::centered(4, 0.05, [10.0, 0.0, 0.0]).unwrap();
    let gs = Geometry::centered(4, 0.05, [0.0, 0.0, 0.0]).unwrap();
    let point = |g: Geometry, mass: f64| {
        let mut v = vec![0.0; g.len()];
        v[g.index(1, 1, 1)] = mass / g.cell_volume();
        GridDensity::new(g, v).unwrap()
    };
    let planet = point(gp, m);
    let star = point(gs, 1.0 - m);
    let own = potential(&planet);
    let sys = PatchSystem::new(
        vec![
            Patch { density: planet, label: Label::Planet, target_mass: m },
            Patch { density: star, label: Label::Star, target_mass: 1.0 - m },
        ],
        FarField::Monopole,
    )
    .unwrap();
    let phi = effective_potential(&sys, 0.0).unwrap();
    let s = gs.center(1, 1, 1);
    for i in 0..gp.len() {
        let d = dist(gp.center_of(i), s);
        assert!((phi[0].values()[i] - own.values()[i] - (1.0 - m) / d).abs() < 1e-12);
    }
}

#[test]
fn effective_potential_is_invariant_under_half_turns_about_the_axis() {
    let mut r = rng(9);
    let n = 8;
    let h = 0.1;
    let mk = |r: &mut rand_chacha::ChaCha8Rng, origin| random_density(r, [n, n, n], h, origin, 0.7);
    let a = mk(&mut r, [3.0, 0.4, -0.2]);
    let b = mk(&mut r, [-1.0, -0.3, 0.1]);
    let build = |a: GridDensity, b: GridDensity| {
        let (ma, mb) = (a.mass(), b.mass());
        PatchSystem::new(
            vec![
                Patch { density: a, label: Label::Planet, target_mass: ma },
                Patch { density: b, label: Label::Star, target_mass: mb },
            ],
            FarField::Quadrupole,
        )
        .unwrap()
    };
    let sys = build(a.clone(), b.clone());
    let (_, xbar) = sys.moment_of_inertia().unwrap();
    // the half turn about the z line through xbar maps (i, j, k) to
    // (n-1-i, n-1-j, k) with a mirrored origin
    let turn = |rho: &GridDensity| {
        let g = rho.geometry();
        let o = g.origin;
        let far = [o[0] + (n - 1) as f64 * h, o[1] + (n - 1) as f64 * h];
        let ng = Geometry::new([n, n, n], h, [2.0 * xbar[0] - far[0], 2.0 * xbar[1] - far[1], o[2]]).unwrap();
        let mut v = vec![0.0; g.len()];
        for k in 0..n {
            for j in 0..n {
                for i in 0..n {
                    v[ng.index(n - 1 - i, n - 1 - j, k)] = rho.values()[g.index(i, j, k)];
                }
            }
        }
        GridDensity::new(ng, v).unwrap()
    };
    let turned = build(turn(&a), turn(&b));
    let phi = effective_potential(&sys, 0.8).unwrap();
    let phi_t = effective_potential(&turned, 0.8).unwrap();
    for p in 0..2 {
        let g = *phi[p].geometry();
        let gt = *phi_t[p].geometry();
        for k in 0..n {
            for j in 0..n {
                for i in 0..n {
                    let x = phi[p].values()[g.index(i, j, k)];
                    let y = phi_t[p].values()[gt.index(n - 1 - i, n - 1 - j, k)];
                    assert!((x - y).abs() <= 1e-10 * x.abs());
                }
            }
        }
    }
}

#[test]
fn full_mixing_reproduces_the_image() {
    let cfg = SolverConfig { j: 0.5, m: 0.2, cells_per_radius: 8, ..Default::default() };
    let (setup, sys) = Setup::new(&cfg).unwrap();
    let (next, lambdas, change) = scf_step(&setup, &sys, 1.0).unwrap();
    let phi = effective_potential(&sys, 0.5).unwrap();
    for p in 0..2 {
        let target = sys.patches()[p].target_mass;
        let (l, img) = solve_multiplier(&phi[p], Some(&setup.masks[p]), target, &setup.eos, None, 1e-12).unwrap();
        assert!((l - lambdas[p]).abs() <= 1e-12 * l.abs());
        let d = next.patches()[p].density.values().iter().zip(img.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(d <= 1e-12 * img.max_value());
        assert!(lambdas[p] < 0.0);
        assert!(change[p] > 0.0);
        assert!((next.patches()[p].density.mass() - target).abs() < 1e-14);
    }
}

#[test]
fn single_body_seed_is_nearly_a_fixed_point() {
    let cfg = SolverConfig { j: 0.0, gamma: 2.0, cells_per_radius: 16, ..Default::default() };
    let (setup, sys) = Setup::new(&cfg).unwrap();
    assert_eq!(sys.patches()[0].density.geometry().dims, [48; 3]);
    let (next, _, change) = scf_step(&setup, &sys, 1.0).unwrap();
    assert!(change[0] < 0.02, "{}", change[0]);
    assert!(l1_rel(&next.patches()[0].density, &sys.patches()[0].density) < 0.02);
}

#[test]
fn single_body_converges_to_the_lane_emden_profile() {
    let cfg = SolverConfig { j: 0.0, gamma: 2.0, cells_per_radius: 16, ..Default::default() };
    let r = minimize(&cfg).unwrap();
    assert!(r.converged);
    let rho = &r.densities.patches()[0].density;
    let unit = solve_unit(&r.eos).unwrap();
    let reference = to_grid(&unit, rho.geometry(), rho.geometry().midpoint()).unwrap();
    assert!(l1_rel(rho, &reference) < 0.02);
    assert!(r.breakdown.e_j <= r.seed_energy);
    assert_eq!(r.breakdown.t_j, 0.0);
    let ep = ep_residual(&r).unwrap();
    assert!(ep[0] <= 0.05, "{ep:?}");
}

#[test]
fn rotating_run_contracts() {
    let r = rotating();
    assert!(r.converged, "{:?}", r.history.last());
    let (j, m): (f64, f64) = (0.5, 0.1);
    let mu = m * (1.0 - m);
    for (p, target) in r.densities.patches().iter().zip([m, 1.0 - m]) {
        assert!((p.density.mass() - target).abs() <= 1e-10 * target);
    }
    let d = r.domains.unwrap();
    for (p, center) in r.densities.patches().iter().zip([d.center_planet, d.center_star]) {
        let g = p.density.geometry();
        for (i, &v) in p.density.values().iter().enumerate() {
            if v > 0.0 {
                assert!(dist(g.center_of(i), center) <= d.ball_radius);
            }
        }
    }
    assert!(r.multipliers.iter().all(|&l| l < 0.0));
    for (res, l) in el_residual(r).unwrap().iter().zip(&r.multipliers) {
        assert!(*res <= 10.0 * r.config.tol_fixedpoint * l.abs());
    }
    assert!(r.breakdown.e_j < r.seed_energy);
    let inertia = r.breakdown.inertia;
    let floor = j.powi(4) / (4.0 * mu.powi(3));
    assert!(inertia >= floor, "{inertia} < {floor}");
    let xbar = r.breakdown.xbar;
    let mut vmax: f64 = 0.0;
    for p in r.densities.patches() {
        let g = p.density.geometry();
        for (i, &v) in p.density.values().iter().enumerate() {
            if v > 0.0 {
                let x = g.center_of(i);
                vmax = vmax.max(j * ((x[0] - xbar[0]).powi(2) + (x[1] - xbar[1]).powi(2)).sqrt() / inertia);
            }
        }
    }
    assert!(vmax <= j * 1.5 * d.eta / floor);
    assert!(ep_residual(r).unwrap().iter().all(|&e| e <= 0.1));
}

#[test]
fn rotating_energy_respects_the_lower_bound_chain() {
    let r = rotating();
    let (m, eta) = (0.1, r.domains.unwrap().eta);
    let unit = &r.unit_profile;
    let e_split = rescale(unit, m).unwrap().e0 + rescale(unit, 1.0 - m).unwrap().e0;
    let mu = m * (1.0 - m);
    assert!(r.breakdown.e_j > e_split - 2.0 * mu / eta, "{} vs {}", r.breakdown.e_j, e_split - 2.0 * mu / eta);
    let g_inter = r.breakdown.g_inter.unwrap();
    assert!(g_inter <= 2.0 * mu / eta);
}

#[test]
fn generous_cap_is_slack_at_convergence() {
    let free = rotating();
    let star = rescale(&free.unit_profile, 0.9).unwrap();
    let cap = 2.0 * star.central_density;
    let cfg = SolverConfig { cap: Cap::Value(cap), ..free.config };
    let r = minimize(&cfg).unwrap();
    assert!(r.converged);
    for p in r.densities.patches() {
        assert!(p.density.values().iter().all(|&v| v < cap));
    }
    for (a, b) in r.densities.patches().iter().zip(free.densities.patches()) {
        assert!(l1_rel(&a.density, &b.density) < 1e-6);
    }
}

#[test]
fn plain_damped_iteration_reaches_the_same_state() {
    let cfg = SolverConfig { j: 0.5, m: 0.1, cells_per_radius: 8, anderson_depth: 0, max_iter: 40, ..Default::default() };
    let r = minimize(&cfg).unwrap();
    assert_eq!(r.history.len(), 41);
    assert!(r.history.last().unwrap().change < r.history[0].change);
    assert!(r.breakdown.e_j < r.seed_energy);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn mapped_mass_is_nondecreasing(seed in any::<u64>(), gamma in 1.6f64..3.0, capped in any::<bool>(), l1 in -3.0f64..1.0, dl in 0.0f64..2.0) {
        let mut r = rng(seed);
        let g = Geometry::new([6, 5, 4], 0.2, [0.0; 3]).unwrap();
        let phi = GridField::new(g, (0..g.len()).map(|_| r.gen_range(-1.0..2.0)).collect()).unwrap();
        let eos = PolytropicEos::new(1.0, gamma).unwrap();
        let cap = if capped { Some(r.gen_range(0.1..2.0)) } else { None };
        let mask: Vec<bool> = (0..g.len()).map(|_| r.gen::<f64>() < 0.8).collect();
        let a = mapped_mass(&phi, Some(&mask), l1, &eos, cap);
        let b = mapped_mass(&phi, Some(&mask), l1 + dl, &eos, cap);
        prop_assert!(b >= a);
    }

    #[test]
    fn multiplier_meets_the_mass(seed in any::<u64>(), gamma in 1.6f64..3.0, target in 0.01f64..2.0) {
        let mut r = rng(seed);
        let g = Geometry::new([6, 6, 6], 0.2, [0.0; 3]).unwrap();
        let phi = GridField::new(g, (0..g.len()).map(|_| r.gen_range(-1.0..2.0)).collect()).unwrap();
        let eos = PolytropicEos::new(1.0, gamma).unwrap();
        let (l, rho) = solve_multiplier(&phi, None, target, &eos, None, 1e-12).unwrap();
        prop_assert!((mapped_mass(&phi, None, l, &eos, None) - target).abs() <= 1e-12 * target * 10.0);
        prop_assert!((rho.mass() - target).abs() <= 1e-13 * target * 10.0);
        prop_assert!(rho.values().iter().all(|&v| v >= 0.0));
    }
}
