//! Lane–Emden integration with an adaptive Dormand–Prince 5(4) pair.
//!
//! State: `[theta, theta', int theta^(n+1) xi^2, int theta^n xi, int mu theta^n xi]`
//! with `mu = -xi^2 theta'`. All integrals run from 0.

pub(crate) type State = [f64; 5];

const RTOL: f64 = 1e-12;
const ATOL: f64 = 1e-14;
/// Start of numerical integration; below it the power series is used.
pub(crate) const XI_START: f64 = 1e-3;

fn rhs(n: f64, xi: f64, y: &State) -> State {
    let t = y[0].max(0.0);
    let tn = t.powf(n);
    [y[1], -tn - 2.0 * y[1] / xi, t * tn * xi * xi, tn * xi, -xi * xi * y[1] * tn * xi]
}

/// Series solution near the center.
pub(crate) fn series_start(n: f64, xi: f64) -> State {
    let x2 = xi * xi;
    let theta = 1.0 - x2 / 6.0 + n * x2 * x2 / 120.0;
    let dtheta = -xi / 3.0 + n * xi * x2 / 30.0;
    [theta, dtheta, xi * x2 / 3.0, x2 / 2.0, xi * x2 * x2 / 15.0]
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// One step; returns the 5th-order solution and the scaled error norm.
fn dp_step(n: f64, xi: f64, y: &State, h: f64) -> (State, f64) {
    let mut k = [[0.0; 5]; 7];
    for s in 0..7 {
        let mut ys = *y;
        for (r, kr) in k.iter().enumerate().take(s) {
            for d in 0..5 {
                ys[d] += h * A[s][r] * kr[d];
            }
        }
        k[s] = rhs(n, xi + C[s] * h, &ys);
    }
    let mut y5 = *y;
    let mut err: f64 = 0.0;
    for d in 0..5 {
        let mut s5 = 0.0;
        let mut s4 = 0.0;
        for s in 0..7 {
            s5 += B5[s] * k[s][d];
            s4 += B4[s] * k[s][d];
        }
        y5[d] += h * s5;
        let sc = ATOL + RTOL * y[d].abs().max(y5[d].abs());
        err = err.max((h * (s5 - s4)).abs() / sc);
    }
    (y5, err)
}

pub(crate) enum Stop {
    /// Reached the requested abscissa.
    Reached,
    /// `theta` reached zero at the returned abscissa.
    Zero,
}

/// Integrate from `(xi, y)` up to `xi_end`, stopping early at the first zero
/// of `theta`. `h` carries the step-size guess between calls.
pub(crate) fn advance(n: f64, xi: &mut f64, y: &mut State, xi_end: f64, h: &mut f64) -> Stop {
    let mut guard = 0usize;
    while *xi < xi_end {
        guard += 1;
        assert!(guard < 10_000_000, "Lane-Emden integration did not terminate");
        let last = *xi + *h >= xi_end;
        let step = if last { xi_end - *xi } else { *h };
        let (y5, err) = dp_step(n, *xi, y, step);
        if err > 1.0 {
            *h = step * (0.9 * err.powf(-0.2)).max(0.1);
            continue;
        }
        if y5[0] < 0.0 {
            // bisect on the step length for the surface
            let (mut lo, mut hi) = (0.0, step);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if dp_step(n, *xi, y, mid).0[0] >= 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let (yl, _) = dp_step(n, *xi, y, lo);
            *xi += lo;
            *y = yl;
            y[0] = 0.0;
            return Stop::Zero;
        }
        *xi = if last { xi_end } else { *xi + step };
        *y = y5;
        let grow = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        if !last {
            *h = step * grow;
        }
    }
    Stop::Reached
}

/// First zero of `theta` and the state there.
pub(crate) fn first_zero(n: f64) -> (f64, State) {
    let mut xi = XI_START;
    let mut y = series_start(n, xi);
    let mut h = 1e-3;
    match advance(n, &mut xi, &mut y, 1e4, &mut h) {
        Stop::Zero => (xi, y),
        Stop::Reached => panic!("no surface found for n = {n}"),
    }
}

/// States at the requested increasing abscissas, all below the surface.
pub(crate) fn sample(n: f64, at: &[f64]) -> Vec<State> {
    let mut xi = XI_START;
    let mut y = series_start(n, xi);
    let mut h = 1e-3;
    let mut out = Vec::with_capacity(at.len());
    for &x in at {
        if x <= XI_START {
            out.push(series_start(n, x.max(0.0)));
            continue;
        }
        if let Stop::Zero = advance(n, &mut xi, &mut y, x, &mut h) {
            // sample at or beyond the surface
            out.push(y);
            continue;
        }
        out.push(y);
    }
    out
}
