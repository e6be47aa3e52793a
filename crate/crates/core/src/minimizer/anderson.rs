//! Anderson extrapolation of a fixed-point map `x -> x + f(x)`.

use crate::quadrature::Neumaier;
use std::collections::VecDeque;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = Neumaier::default();
    for (x, y) in a.iter().zip(b) {
        acc.add(x * y);
    }
    acc.sum()
}

pub(crate) struct Anderson {
    depth: usize,
    prev: Option<(Vec<f64>, Vec<f64>)>,
    dx: VecDeque<Vec<f64>>,
    df: VecDeque<Vec<f64>>,
}

impl Anderson {
    pub(crate) fn new(depth: usize) -> Self {
        Self { depth, prev: None, dx: VecDeque::new(), df: VecDeque::new() }
    }

    pub(crate) fn reset(&mut self) {
        self.prev = None;
        self.dx.clear();
        self.df.clear();
    }

    /// Next iterate from the current point `x` and its residual `f`, with
    /// damping `beta`.
    pub(crate) fn next(&mut self, x: &[f64], f: &[f64], beta: f64) -> Vec<f64> {
        if let Some((px, pf)) = self.prev.take() {
            self.dx.push_back(x.iter().zip(&px).map(|(a, b)| a - b).collect());
            self.df.push_back(f.iter().zip(&pf).map(|(a, b)| a - b).collect());
            if self.dx.len() > self.depth {
                self.dx.pop_front();
                self.df.pop_front();
            }
        }
        self.prev = Some((x.to_vec(), f.to_vec()));

        let gamma = self.coefficients(f);
        let mut out: Vec<f64> = x.iter().zip(f).map(|(a, b)| a + beta * b).collect();
        for (g, (dx, df)) in gamma.iter().zip(self.dx.iter().zip(&self.df)) {
            if *g == 0.0 {
                continue;
            }
            for ((o, a), b) in out.iter_mut().zip(dx).zip(df) {
                *o -= g * (a + beta * b);
            }
        }
        out
    }

    /// Least-squares `min |f - dF gamma|` by modified Gram–Schmidt; nearly
    /// dependent columns get a zero coefficient.
    fn coefficients(&self, f: &[f64]) -> Vec<f64> {
        let k = self.df.len();
        let mut q: Vec<Vec<f64>> = Vec::with_capacity(k);
        let mut r = vec![vec![0.0; k]; k];
        let mut keep = vec![false; k];
        for j in 0..k {
            let mut v = self.df[j].clone();
            let norm0 = dot(&v, &v).sqrt();
            for (i, qi) in q.iter().enumerate() {
                if !keep[i] {
                    continue;
                }
                let c = dot(qi, &v);
                r[i][j] = c;
                v.iter_mut().zip(qi).for_each(|(a, b)| *a -= c * b);
            }
            let nv = dot(&v, &v).sqrt();
            if nv > 1e-10 * norm0 && nv > 0.0 {
                keep[j] = true;
                r[j][j] = nv;
                v.iter_mut().for_each(|a| *a /= nv);
            }
            q.push(v);
        }
        let rhs: Vec<f64> = (0..k).map(|i| if keep[i] { dot(&q[i], f) } else { 0.0 }).collect();
        let mut gamma = vec![0.0; k];
        for i in (0..k).rev() {
            if !keep[i] {
                continue;
            }
            let mut s = rhs[i];
            for j in i + 1..k {
                if keep[j] {
                    s -= r[i][j] * gamma[j];
                }
            }
            gamma[i] = s / r[i][i];
        }
        gamma
    }
}
