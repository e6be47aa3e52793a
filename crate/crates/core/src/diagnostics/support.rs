use crate::error::{Error, Result};
use crate::field::{Geometry, GridDensity};
use crate::minimizer::MinimizerResult;
use crate::vec3::dist;
use serde::Serialize;

/// Relative floor below which cells count as empty.
pub const SUPPORT_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SupportStats {
    /// Largest distance from the center of mass to an occupied cell center.
    pub radius: f64,
    pub components: usize,
    /// Largest distance between two distinct components; 0 for one.
    pub max_gap: f64,
    pub linf: f64,
    pub occupied: usize,
}

/// `SUPPORT_FLOOR * max rho`.
pub fn default_floor(rho: &GridDensity) -> f64 {
    SUPPORT_FLOOR * rho.max_value()
}

/// Component labels under 6-connectivity of the cells with `rho > floor`.
/// Empty cells get label 0; components are numbered from 1 in index order.
pub fn component_labels(rho: &GridDensity, floor: f64) -> (Vec<u32>, usize) {
    let g = rho.geometry();
    let [nx, ny, nz] = g.dims;
    let v = rho.values();
    let mut labels = vec![0u32; v.len()];
    let mut count = 0u32;
    let mut stack = Vec::new();
    for start in 0..v.len() {
        if labels[start] != 0 || v[start] <= floor {
            continue;
        }
        count += 1;
        labels[start] = count;
        stack.push(start);
        while let Some(idx) = stack.pop() {
            let [i, j, k] = g.unindex(idx);
            let mut visit = |i: usize, j: usize, k: usize| {
                let n = g.index(i, j, k);
                if labels[n] == 0 && v[n] > floor {
                    labels[n] = count;
                    stack.push(n);
                }
            };
            if i > 0 {
                visit(i - 1, j, k);
            }
            if i + 1 < nx {
                visit(i + 1, j, k);
            }
            if j > 0 {
                visit(i, j - 1, k);
            }
            if j + 1 < ny {
                visit(i, j + 1, k);
            }
            if k > 0 {
                visit(i, j, k - 1);
            }
            if k + 1 < nz {
                visit(i, j, k + 1);
            }
        }
    }
    (labels, count as usize)
}

/// One density per component, each on a copy of the lattice.
pub fn split_components(rho: &GridDensity, floor: f64) -> Result<Vec<GridDensity>> {
    let (labels, count) = component_labels(rho, floor);
    (1..=count as u32)
        .map(|c| {
            let vals = rho.values().iter().zip(&labels).map(|(&v, &l)| if l == c { v } else { 0.0 }).collect();
            GridDensity::new(*rho.geometry(), vals)
        })
        .collect()
}

fn is_boundary(g: &Geometry, labels: &[u32], idx: usize) -> bool {
    let [i, j, k] = g.unindex(idx);
    let [nx, ny, nz] = g.dims;
    let l = labels[idx];
    if i == 0 || j == 0 || k == 0 || i + 1 == nx || j + 1 == ny || k + 1 == nz {
        return true;
    }
    [
        g.index(i - 1, j, k),
        g.index(i + 1, j, k),
        g.index(i, j - 1, k),
        g.index(i, j + 1, k),
        g.index(i, j, k - 1),
        g.index(i, j, k + 1),
    ]
    .iter()
    .any(|&n| labels[n] != l)
}

/// Radius, component count, largest inter-component gap and sup norm of the
/// cells above `floor` (default [`default_floor`]).
pub fn support_stats(rho: &GridDensity, floor: Option<f64>) -> Result<SupportStats> {
    let linf = rho.max_value();
    if linf <= 0.0 {
        return Err(Error::precondition("support of an empty density"));
    }
    let floor = floor.unwrap_or_else(|| default_floor(rho));
    if !(floor.is_finite() && floor >= 0.0) {
        return Err(Error::domain(format!("floor must be >= 0, got {floor}")));
    }
    let g = rho.geometry();
    let (labels, components) = component_labels(rho, floor);
    let occupied = labels.iter().filter(|&&l| l != 0).count();
    if occupied == 0 {
        return Err(Error::precondition("no cell above the floor"));
    }
    let xbar = rho.center_of_mass()?;
    let radius = labels
        .iter()
        .enumerate()
        .filter(|(_, &l)| l != 0)
        .map(|(idx, _)| dist(g.center_of(idx), xbar))
        .fold(0.0, f64::max);

    let mut max_gap: f64 = 0.0;
    if components > 1 {
        let mut edges: Vec<Vec<usize>> = vec![Vec::new(); components];
        for (idx, &l) in labels.iter().enumerate() {
            if l != 0 && is_boundary(g, &labels, idx) {
                edges[l as usize - 1].push(idx);
            }
        }
        for a in 0..components {
            for b in a + 1..components {
                let mut d = f64::INFINITY;
                for &p in &edges[a] {
                    let x = g.center_of(p);
                    for &q in &edges[b] {
                        d = d.min(dist(x, g.center_of(q)));
                    }
                }
                // cell centers sit half a cell inside each hull
                max_gap = max_gap.max((d - g.h).max(0.0));
            }
        }
    }
    Ok(SupportStats { radius, components, max_gap, linf, occupied })
}

/// Smallest distance between an occupied cell center and the boundary of
/// the admissible ball of its patch, over all patches.
pub fn boundary_margin(result: &MinimizerResult) -> Result<f64> {
    let mut margin = f64::INFINITY;
    for (p, (c, r)) in result.densities.patches().iter().zip(&result.regions) {
        let g = p.density.geometry();
        let floor = default_floor(&p.density);
        for (idx, &v) in p.density.values().iter().enumerate() {
            if v > floor {
                margin = margin.min(r - dist(g.center_of(idx), *c));
            }
        }
    }
    if margin.is_infinite() {
        return Err(Error::precondition("result has no occupied cell"));
    }
    Ok(margin)
}
