use crate::error::{Error, Result};
use crate::quadrature::Neumaier;
use crate::vec3::Vec3;
use rayon::prelude::*;
use std::io::{Read, Write};

/// Uniform cubic-cell lattice. `origin` is the center of cell `(0, 0, 0)`;
/// linear index is `i + nx * (j + ny * k)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometry {
    pub dims: [usize; 3],
    pub h: f64,
    pub origin: Vec3,
}

impl Geometry {
    pub fn new(dims: [usize; 3], h: f64, origin: Vec3) -> Result<Self> {
        if dims.iter().any(|&d| d == 0) {
            return Err(Error::domain("grid dimensions must be positive"));
        }
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::domain(format!("grid spacing must be positive, got {h}")));
        }
        if origin.iter().any(|o| !o.is_finite()) {
            return Err(Error::domain("grid origin must be finite"));
        }
        Ok(Self { dims, h, origin })
    }

    /// Cube of `n^3` cells whose geometric center is `center`.
    pub fn centered(n: usize, h: f64, center: Vec3) -> Result<Self> {
        let off = 0.5 * (n as f64 - 1.0) * h;
        Self::new([n; 3], h, [center[0] - off, center[1] - off, center[2] - off])
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn cell_volume(&self) -> f64 {
        self.h * self.h * self.h
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }

    #[inline]
    pub fn unindex(&self, idx: usize) -> [usize; 3] {
        let i = idx % self.dims[0];
        let r = idx / self.dims[0];
        [i, r % self.dims[1], r / self.dims[1]]
    }

    #[inline]
    pub fn center(&self, i: usize, j: usize, k: usize) -> Vec3 {
        [
            self.origin[0] + i as f64 * self.h,
            self.origin[1] + j as f64 * self.h,
            self.origin[2] + k as f64 * self.h,
        ]
    }

    #[inline]
    pub fn center_of(&self, idx: usize) -> Vec3 {
        let [i, j, k] = self.unindex(idx);
        self.center(i, j, k)
    }

    /// Geometric center of the lattice.
    pub fn midpoint(&self) -> Vec3 {
        let mut c = self.origin;
        for (a, c) in c.iter_mut().enumerate() {
            *c += 0.5 * (self.dims[a] as f64 - 1.0) * self.h;
        }
        c
    }

    /// Bounding box of the cells (cell faces, not centers).
    pub fn bbox(&self) -> (Vec3, Vec3) {
        let mut lo = [0.0; 3];
        let mut hi = [0.0; 3];
        for a in 0..3 {
            lo[a] = self.origin[a] - 0.5 * self.h;
            hi[a] = self.origin[a] + (self.dims[a] as f64 - 0.5) * self.h;
        }
        (lo, hi)
    }

    /// Distance from `p` to the bounding box (0 inside).
    pub fn distance_to_box(&self, p: Vec3) -> f64 {
        let (lo, hi) = self.bbox();
        let mut s = 0.0;
        for a in 0..3 {
            let d = (lo[a] - p[a]).max(p[a] - hi[a]).max(0.0);
            s += d * d;
        }
        s.sqrt()
    }

    pub fn same_lattice(&self, other: &Geometry) -> bool {
        self.dims == other.dims && self.h == other.h && self.origin == other.origin
    }

    pub fn translated(&self, by: Vec3) -> Geometry {
        Geometry { origin: crate::vec3::add(self.origin, by), ..*self }
    }
}

/// Fixed-order compensated sum of `f(idx, value)` over a lattice, reduced per
/// z-plane so the result does not depend on the thread count.
pub(crate) fn grid_sum<F>(geom: &Geometry, values: &[f64], f: F) -> f64
where
    F: Fn(usize, f64) -> f64 + Sync,
{
    let plane = geom.dims[0] * geom.dims[1];
    let partials: Vec<Neumaier> = values
        .par_chunks(plane)
        .enumerate()
        .map(|(k, chunk)| {
            let mut acc = Neumaier::default();
            let base = k * plane;
            for (o, &v) in chunk.iter().enumerate() {
                acc.add(f(base + o, v));
            }
            acc
        })
        .collect();
    let mut acc = Neumaier::default();
    for p in partials {
        acc.merge(p);
    }
    acc.sum()
}

/// Non-negative density sampled at cell centers.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDensity {
    geom: Geometry,
    values: Vec<f64>,
}

impl GridDensity {
    pub fn new(geom: Geometry, values: Vec<f64>) -> Result<Self> {
        if values.len() != geom.len() {
            return Err(Error::domain(format!(
                "expected {} values, got {}",
                geom.len(),
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::domain(format!("density values must be finite and >= 0, got {v}")));
        }
        Ok(Self { geom, values })
    }

    pub fn zeros(geom: Geometry) -> Self {
        Self { values: vec![0.0; geom.len()], geom }
    }

    /// Sample `f` at cell centers; negative samples are clipped to zero.
    pub fn from_fn<F: Fn(Vec3) -> f64 + Sync>(geom: Geometry, f: F) -> Self {
        let values = (0..geom.len())
            .into_par_iter()
            .map(|idx| f(geom.center_of(idx)).max(0.0))
            .collect();
        Self { geom, values }
    }

    #[inline]
    pub fn geometry(&self) -> &Geometry {
        &self.geom
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Mutable access; callers keep values finite and non-negative.
    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn mass(&self) -> f64 {
        self.geom.cell_volume() * grid_sum(&self.geom, &self.values, |_, v| v)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn scale(&mut self, s: f64) {
        assert!(s.is_finite() && s >= 0.0);
        self.values.iter_mut().for_each(|v| *v *= s);
    }

    /// Rescale so the grid mass equals `target`. Fails on an empty density.
    pub fn renormalize(&mut self, target: f64) -> Result<()> {
        let m = self.mass();
        if m <= 0.0 {
            return Err(Error::precondition("cannot renormalize a zero density"));
        }
        self.scale(target / m);
        Ok(())
    }

    pub fn translated(&self, by: Vec3) -> Self {
        Self { geom: self.geom.translated(by), values: self.values.clone() }
    }

    /// Center of mass.
    pub fn center_of_mass(&self) -> Result<Vec3> {
        let m = grid_sum(&self.geom, &self.values, |_, v| v);
        if m <= 0.0 {
            return Err(Error::precondition("center of mass of a zero density"));
        }
        let mut c = [0.0; 3];
        for (a, c) in c.iter_mut().enumerate() {
            *c = grid_sum(&self.geom, &self.values, |idx, v| v * self.geom.center_of(idx)[a]) / m;
        }
        Ok(c)
    }

    /// Write the "GPD1" binary snapshot.
    pub fn write_snapshot<W: Write>(&self, mut w: W) -> Result<()> {
        let g = &self.geom;
        let mut buf = Vec::with_capacity(4 + 12 + 32 + 8 * self.values.len());
        buf.extend_from_slice(b"GPD1");
        for d in g.dims {
            let d = u32::try_from(d).map_err(|_| Error::Format("dimension exceeds u32".into()))?;
            buf.extend_from_slice(&d.to_le_bytes());
        }
        for x in [g.h, g.origin[0], g.origin[1], g.origin[2]] {
            buf.extend_from_slice(&x.to_le_bytes());
        }
        for v in &self.values {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_snapshot<R: Read>(mut r: R) -> Result<Self> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        if bytes.len() < 48 {
            return Err(Error::Format("snapshot header truncated".into()));
        }
        if &bytes[0..4] != b"GPD1" {
            return Err(Error::Format("bad snapshot magic".into()));
        }
        let u = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap()) as usize;
        let f = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
        let dims = [u(4), u(8), u(12)];
        let h = f(16);
        let origin = [f(24), f(32), f(40)];
        let n = dims
            .iter()
            .try_fold(1usize, |a, &d| a.checked_mul(d))
            .ok_or_else(|| Error::Format("snapshot dimensions overflow".into()))?;
        if bytes.len() != 48 + 8 * n {
            return Err(Error::Format(format!(
                "snapshot payload has {} bytes, expected {}",
                bytes.len() - 48,
                8 * n
            )));
        }
        let values = bytes[48..].chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        let geom = Geometry::new(dims, h, origin).map_err(|e| Error::Format(e.to_string()))?;
        GridDensity::new(geom, values).map_err(|e| Error::Format(e.to_string()))
    }
}

/// Signed field on the same lattice as a density.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    geom: Geometry,
    values: Vec<f64>,
}

impl GridField {
    pub fn new(geom: Geometry, values: Vec<f64>) -> Result<Self> {
        if values.len() != geom.len() {
            return Err(Error::domain("field length does not match geometry"));
        }
        Ok(Self { geom, values })
    }

    pub fn zeros(geom: Geometry) -> Self {
        Self { values: vec![0.0; geom.len()], geom }
    }

    #[inline]
    pub fn geometry(&self) -> &Geometry {
        &self.geom
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub(crate) fn add_assign(&mut self, other: &[f64]) {
        self.values.iter_mut().zip(other).for_each(|(a, b)| *a += b);
    }
}
