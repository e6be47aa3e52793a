use starplanet::eos::PolytropicEos;
use starplanet::field::{energies, Geometry};
use starplanet::lane_emden::*;
use starplanet::Error;
use std::f64::consts::PI;

fn eos(gamma: f64) -> PolytropicEos {
    PolytropicEos::new(1.0, gamma).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn index_one_solution_is_sin_over_xi() {
    let (xi1, _) = surface(1.0).unwrap();
    assert!((xi1 - PI).abs() < 1e-8);
    let xi: Vec<f64> = (1..200).map(|i| i as f64 * PI / 200.0).collect();
    for (x, t) in xi.iter().zip(theta(1.0, &xi).unwrap()) {
        assert!((t - x.sin() / x).abs() < 1e-8, "xi {x}: {t}");
    }
    assert!(matches!(surface(5.0), Err(Error::Unsupported(_))));
    assert!(matches!(theta(6.0, &[0.5]), Err(Error::Unsupported(_))));
}

#[test]
fn gamma_two_closed_form() {
    let p = solve_unit(&eos(2.0)).unwrap();
    assert!((p.radius - (PI / 2.0).sqrt()).abs() < 1e-9);
    let k = (2.0 * PI).sqrt();
    for (r, rho) in p.r.iter().zip(&p.rho).skip(1) {
        let exact = (k * r).sin() / (2.0 * PI * r);
        assert!((rho - exact).abs() < 1e-8 * p.central_density, "r {r}");
    }
    assert!((p.central_density - k / (2.0 * PI)).abs() < 1e-8);
    assert_eq!(*p.rho.last().unwrap(), 0.0);
    assert!((p.quadrature_mass() - 1.0).abs() < 1e-8);
}

#[test]
fn profile_invariants() {
    for gamma in [1.6, 1.8, 2.0, 2.5, 3.0] {
        let p = solve_unit(&eos(gamma)).unwrap();
        assert!(p.rho.windows(2).all(|w| w[1] < w[0]), "gamma {gamma}");
        assert!(rel(p.quadrature_mass(), 1.0) < 1e-8, "gamma {gamma}");
        assert!(p.lambda < 0.0);
        assert!(rel(p.lambda, -1.0 / p.radius) < 1e-12);
        assert!(p.el0_residual() <= 1e-6 * p.lambda.abs(), "gamma {gamma}: {}", p.el0_residual());
    }
}

#[test]
fn radial_e0_matches_a_grid_evaluation() {
    let p = solve_unit(&eos(2.0)).unwrap();
    let h = p.radius / 32.0;
    let g = Geometry::centered(68, h, [0.0; 3]).unwrap();
    let rho = to_grid(&p, &g, g.midpoint()).unwrap();
    let e = energies(&rho, 0.0, &p.eos).unwrap();
    assert!(rel(e.e0(), p.e0) < 1e-3, "{} vs {}", e.e0(), p.e0);
    assert!(rel(p.quadrature_e0(), p.e0) < 1e-6);
}

#[test]
fn rescaling() {
    let unit = solve_unit(&eos(2.0)).unwrap();
    let same = rescale(&unit, 1.0).unwrap();
    assert_eq!(same.radius, unit.radius);
    assert!(rel(same.e0, unit.e0) < 1e-15);
    for m in [0.05, 0.3, 2.0] {
        let p = rescale(&unit, m).unwrap();
        assert!(rel(p.radius, unit.radius) < 1e-14);
        assert!(rel(p.central_density, m * unit.central_density) < 1e-14);
        assert!(rel(p.quadrature_mass(), m) < 1e-8);
    }
    let unit = solve_unit(&eos(2.5)).unwrap();
    let p = rescale(&unit, 0.1).unwrap();
    assert!(rel(p.e0 / unit.e0, 0.1f64.powf(6.5 / 3.5)) < 1e-12);
    assert!(rel(p.radius, 0.1f64.powf(0.5 / 3.5) * unit.radius) < 1e-12);
    assert!(matches!(rescale(&unit, 0.0), Err(Error::Domain(_))));
    assert!(matches!(rescale(&unit, -1.0), Err(Error::Domain(_))));
    assert!(matches!(rescale(&p, 0.5), Err(Error::Precondition(_))));
}

#[test]
fn multiplier_closed_form_agrees_with_the_surface_value() {
    for gamma in [1.8, 2.0, 2.5] {
        let unit = solve_unit(&eos(gamma)).unwrap();
        assert_eq!(lambda_of_mass(&unit, 0.0).unwrap(), 0.0);
        for m in [0.1, 0.5, 1.0] {
            let closed = lambda_of_mass(&unit, m).unwrap();
            let surface = -m / rescale(&unit, m).unwrap().radius;
            assert!(rel(closed, surface) < 1e-4, "gamma {gamma} m {m}: {closed} vs {surface}");
        }
        assert!(matches!(lambda_of_mass(&unit, -0.1), Err(Error::Domain(_))));
    }
}

#[test]
fn energy_derivative_is_the_multiplier() {
    // masses from independent solves at nearby central densities
    for gamma in [1.8, 2.0, 2.5] {
        let e = eos(gamma);
        let (lo, mid, hi) = (
            solve_central(&e, 0.999).unwrap(),
            solve_central(&e, 1.0).unwrap(),
            solve_central(&e, 1.001).unwrap(),
        );
        let slope = (hi.e0 - lo.e0) / (hi.mass - lo.mass);
        assert!(rel(slope, mid.lambda) < 1e-3, "gamma {gamma}: {slope} vs {}", mid.lambda);
    }
}

#[test]
fn energy_scaling_law() {
    for gamma in [1.8, 2.0, 2.5] {
        let e = eos(gamma);
        let unit = solve_unit(&e).unwrap();
        // central densities reaching the masses through independent solves
        let pts: Vec<(f64, f64)> = [0.05, 0.1, 0.2, 0.5, 1.0]
            .iter()
            .map(|&m| {
                let rc = rescale(&unit, m).unwrap().central_density * 1.01;
                let p = solve_central(&e, rc).unwrap();
                (p.mass.ln(), (-p.e0).ln())
            })
            .collect();
        let n = pts.len() as f64;
        let (sx, sy) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
        let (mx, my) = (sx / n, sy / n);
        let num: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let den: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let slope = num / den;
        let expected = (5.0 * gamma - 6.0) / (3.0 * gamma - 4.0);
        assert!((slope - expected).abs() < 1e-3, "gamma {gamma}: {slope} vs {expected}");
    }
}

#[test]
fn multiplier_decreases_with_mass() {
    for gamma in [1.6, 2.0, 2.5] {
        let unit = solve_unit(&eos(gamma)).unwrap();
        let l: Vec<f64> = [0.05, 0.1, 0.2, 0.5, 1.0].iter().map(|&m| lambda_of_mass(&unit, m).unwrap()).collect();
        assert!(l.iter().all(|&x| x < 0.0));
        assert!(l.windows(2).all(|w| w[1] < w[0]), "gamma {gamma}: {l:?}");
    }
}

#[test]
fn grid_sampling_contracts() {
    let p = rescale(&solve_unit(&eos(2.0)).unwrap(), 0.3).unwrap();
    let h = 2.0 * p.radius / 48.0 * 1.2;
    let g = Geometry::centered(48, h, [0.2, -0.1, 0.0]).unwrap();
    let c = g.midpoint();
    let rho = to_grid(&p, &g, c).unwrap();
    assert!((rho.mass() - 0.3).abs() < 1e-14);
    let support = (0..g.len())
        .filter(|&i| rho.values()[i] > 0.0)
        .map(|i| {
            let x = g.center_of(i);
            ((x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2) + (x[2] - c[2]).powi(2)).sqrt()
        })
        .fold(0.0, f64::max);
    assert!(support >= p.radius - 2.0 * h && support <= p.radius + 2.0 * h);
    let e = energies(&rho, 0.0, &p.eos).unwrap();
    assert!(rel(e.e0(), p.e0) < 2e-2, "{} vs {}", e.e0(), p.e0);

    let coarse = Geometry::centered(16, p.radius / 6.0, [0.0; 3]).unwrap();
    assert!(matches!(to_grid(&p, &coarse, coarse.midpoint()), Err(Error::Precondition(_))));
}

#[test]
fn csv_export() {
    let p = solve_unit(&eos(2.0)).unwrap();
    let mut buf = Vec::new();
    p.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("r,rho,V"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), RADIAL_INTERVALS + 1);
    assert_eq!(rows[5][1], p.rho[5]);
    assert_eq!(rows[7][2], p.potential[7]);
}
