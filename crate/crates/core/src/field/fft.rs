//! Free-space convolution with the unit-lattice kernel through a zero-padded
//! cyclic FFT. Passes over all-zero lines are skipped.

use super::kernel::unit_kernel;
use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

pub(crate) struct Convolver {
    n: [usize; 3],
    big: [usize; 3],
    fwd: [Arc<dyn Fft<f64>>; 3],
    inv: [Arc<dyn Fft<f64>>; 3],
    /// Kernel spectrum in the (z, x, y) layout produced by `forward`.
    kernel_hat: Vec<Complex64>,
}

impl Convolver {
    /// Shared convolver for a grid shape; built once per shape.
    pub(crate) fn for_dims(n: [usize; 3]) -> Arc<Convolver> {
        static CACHE: OnceLock<Mutex<HashMap<[usize; 3], Arc<Convolver>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        if let Some(c) = cache.lock().unwrap().get(&n) {
            return c.clone();
        }
        let c = Arc::new(Convolver::build(n));
        cache.lock().unwrap().entry(n).or_insert(c).clone()
    }

    fn build(n: [usize; 3]) -> Convolver {
        let big = [2 * n[0], 2 * n[1], 2 * n[2]];
        let mut planner = FftPlanner::new();
        let fwd = [0, 1, 2].map(|a| planner.plan_fft_forward(big[a]));
        let inv = [0, 1, 2].map(|a| planner.plan_fft_inverse(big[a]));
        let mut c = Convolver { n, big, fwd, inv, kernel_hat: Vec::new() };
        let wrap = |p: usize, len: usize| if p < len / 2 { p as i64 } else { p as i64 - len as i64 };
        let mut kern = vec![0.0; big[0] * big[1] * big[2]];
        kern.par_chunks_mut(big[0]).enumerate().for_each(|(line, row)| {
            let j = wrap(line % big[1], big[1]);
            let k = wrap(line / big[1], big[2]);
            for (p, v) in row.iter_mut().enumerate() {
                *v = unit_kernel(wrap(p, big[0]), j, k);
            }
        });
        c.kernel_hat = c.forward(&kern, big);
        c
    }

    /// Forward transform of a real block of extent `ext` (x fastest) embedded
    /// at the low corner of the padded box. Output layout: z fastest, then x,
    /// then y.
    fn forward(&self, data: &[f64], ext: [usize; 3]) -> Vec<Complex64> {
        let [b0, b1, b2] = self.big;
        let [e0, e1, e2] = ext;
        // pass x: lines indexed by (j, k) with j < e1, k < e2
        let mut a = vec![Complex64::default(); b0 * e1 * e2];
        a.par_chunks_mut(b0).enumerate().for_each(|(line, row)| {
            let src = &data[line * e0..line * e0 + e0];
            for (r, s) in row.iter_mut().zip(src) {
                *r = Complex64::new(*s, 0.0);
            }
            self.fwd[0].process(row);
        });
        // pass y: layout j + b1 * (k + e2 * i)
        let mut b = vec![Complex64::default(); b1 * e2 * b0];
        b.par_chunks_mut(b1).enumerate().for_each(|(line, row)| {
            let k = line % e2;
            let i = line / e2;
            for (j, r) in row.iter_mut().enumerate().take(e1) {
                *r = a[i + b0 * (j + e1 * k)];
            }
            self.fwd[1].process(row);
        });
        drop(a);
        // pass z: layout k + b2 * (i + b0 * j)
        let mut c = vec![Complex64::default(); b2 * b0 * b1];
        c.par_chunks_mut(b2).enumerate().for_each(|(line, row)| {
            let i = line % b0;
            let j = line / b0;
            for (k, r) in row.iter_mut().enumerate().take(e2) {
                *r = b[j + b1 * (k + e2 * i)];
            }
            self.fwd[2].process(row);
        });
        c
    }

    /// Inverse of `forward` restricted to the low `n` block; returns the real
    /// part, x fastest, without the 1/N normalization.
    fn inverse(&self, mut c: Vec<Complex64>) -> Vec<f64> {
        let [b0, b1, b2] = self.big;
        let [n0, n1, n2] = self.n;
        c.par_chunks_mut(b2).for_each(|row| self.inv[2].process(row));
        // pass x: layout i + b0 * (j + b1 * k), k < n2
        let mut d = vec![Complex64::default(); b0 * b1 * n2];
        d.par_chunks_mut(b0).enumerate().for_each(|(line, row)| {
            let j = line % b1;
            let k = line / b1;
            for (i, r) in row.iter_mut().enumerate() {
                *r = c[k + b2 * (i + b0 * j)];
            }
            self.inv[0].process(row);
        });
        drop(c);
        // pass y: layout j + b1 * (k + n2 * i), i < n0
        let mut e = vec![Complex64::default(); b1 * n2 * n0];
        e.par_chunks_mut(b1).enumerate().for_each(|(line, row)| {
            let k = line % n2;
            let i = line / n2;
            for (j, r) in row.iter_mut().enumerate() {
                *r = d[i + b0 * (j + b1 * k)];
            }
            self.inv[1].process(row);
        });
        drop(d);
        let mut out = vec![0.0; n0 * n1 * n2];
        out.par_chunks_mut(n0).enumerate().for_each(|(line, row)| {
            let j = line % n1;
            let k = line / n1;
            for (i, r) in row.iter_mut().enumerate() {
                *r = e[j + b1 * (k + n2 * i)].re;
            }
        });
        out
    }

    /// `out[x] = sum_y data[y] * w(x - y)` at unit spacing.
    pub(crate) fn convolve(&self, data: &[f64]) -> Vec<f64> {
        assert_eq!(data.len(), self.n[0] * self.n[1] * self.n[2]);
        let mut spec = self.forward(data, self.n);
        spec.par_iter_mut().zip(self.kernel_hat.par_iter()).for_each(|(s, k)| *s *= k);
        let norm = 1.0 / (self.big[0] * self.big[1] * self.big[2]) as f64;
        let mut out = self.inverse(spec);
        out.iter_mut().for_each(|v| *v *= norm);
        out
    }
}
