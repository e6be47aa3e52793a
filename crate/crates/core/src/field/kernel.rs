//! Cell-averaged Newtonian kernel on a unit lattice.

use crate::quadrature::gauss_legendre;
use std::sync::OnceLock;

/// `∫ 1/|u| du` over the unit cube centered at the origin.
///
/// By the divergence theorem applied to `u/|u|` the volume integral reduces
/// to six identical face integrals of a smooth integrand.
pub fn self_cell_integral() -> f64 {
    static C: OnceLock<f64> = OnceLock::new();
    *C.get_or_init(|| {
        let (x, w) = gauss_legendre(48);
        let mut s = 0.0;
        for (xi, wi) in x.iter().zip(&w) {
            for (yj, wj) in x.iter().zip(&w) {
                let (a, b) = (0.5 * xi, 0.5 * yj);
                s += wi * wj / (a * a + b * b + 0.25).sqrt();
            }
        }
        // face integral over [-1/2,1/2]^2 -> factor 1/4 from the map
        1.5 * 0.25 * s
    })
}

/// Kernel value for a lattice offset at unit spacing.
#[inline]
pub fn unit_kernel(di: i64, dj: i64, dk: i64) -> f64 {
    if di == 0 && dj == 0 && dk == 0 {
        self_cell_integral()
    } else {
        1.0 / ((di * di + dj * dj + dk * dk) as f64).sqrt()
    }
}
