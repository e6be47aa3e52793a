#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use starplanet::field::{Geometry, GridDensity};

/// `∫ 1/|u| du` over the unit cube, in closed form.
pub fn cube_integral() -> f64 {
    let s3 = 3f64.sqrt();
    3.0 * ((s3 + 1.0) / (s3 - 1.0)).ln() - std::f64::consts::FRAC_PI_2
}

/// O(N^2) potential at every cell center: `1/|x - y|` between distinct cells
/// and the exact cube average on the diagonal.
pub fn direct_potential(rho: &GridDensity) -> Vec<f64> {
    let g = rho.geometry();
    let h = g.h;
    let v = rho.values();
    let occupied: Vec<usize> = (0..v.len()).filter(|&i| v[i] != 0.0).collect();
    (0..g.len())
        .map(|i| {
            let x = g.center_of(i);
            let mut acc = 0.0;
            for &j in &occupied {
                let w = if i == j {
                    cube_integral() / h
                } else {
                    let y = g.center_of(j);
                    1.0 / ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2) + (x[2] - y[2]).powi(2)).sqrt()
                };
                acc += v[j] * w;
            }
            acc * h * h * h
        })
        .collect()
}

/// Potential of `rho` at an arbitrary point by direct summation over cells.
pub fn direct_potential_at(rho: &GridDensity, p: [f64; 3]) -> f64 {
    let g = rho.geometry();
    let mut acc = 0.0;
    for (j, &v) in rho.values().iter().enumerate() {
        if v != 0.0 {
            let y = g.center_of(j);
            acc += v / ((p[0] - y[0]).powi(2) + (p[1] - y[1]).powi(2) + (p[2] - y[2]).powi(2)).sqrt();
        }
    }
    acc * g.cell_volume()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random non-negative density with roughly `fill` of its cells occupied.
pub fn random_density(rng: &mut ChaCha8Rng, dims: [usize; 3], h: f64, origin: [f64; 3], fill: f64) -> GridDensity {
    let g = Geometry::new(dims, h, origin).unwrap();
    let values = (0..g.len()).map(|_| if rng.gen::<f64>() < fill { rng.gen_range(0.0..3.0) } else { 0.0 }).collect();
    GridDensity::new(g, values).unwrap()
}

/// Uniform ball of density `rho0` sampled at cell centers.
pub fn ball(g: Geometry, center: [f64; 3], radius: f64, rho0: f64) -> GridDensity {
    GridDensity::from_fn(g, |x| {
        let d = ((x[0] - center[0]).powi(2) + (x[1] - center[1]).powi(2) + (x[2] - center[2]).powi(2)).sqrt();
        if d < radius {
            rho0
        } else {
            0.0
        }
    })
}
