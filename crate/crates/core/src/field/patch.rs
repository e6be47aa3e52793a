use super::grid::{GridDensity, GridField};
use super::multipole::{FarField, Multipole};
use super::{dot_field, internal_energy, moment_of_inertia, potential, EnergyBreakdown};
use crate::eos::PolytropicEos;
use crate::error::{Error, Result};
use crate::vec3::{axial_r2, sub, Vec3};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Planet,
    Star,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Patch {
    pub density: GridDensity,
    pub label: Label,
    pub target_mass: f64,
}

/// Bodies on separate grids. Self-gravity is convolved on each grid; the
/// mutual attraction uses the far-field expansion of the other patch.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchSystem {
    patches: Vec<Patch>,
    coupling: FarField,
}

/// Potential split per patch into the self part (grid convolution) and the
/// part generated by the other patches.
#[derive(Debug, Clone)]
pub struct SystemPotential {
    pub self_part: Vec<GridField>,
    pub external: Vec<Vec<f64>>,
}

impl SystemPotential {
    pub fn total(&self, p: usize) -> GridField {
        let mut f = self.self_part[p].clone();
        f.add_assign(&self.external[p]);
        f
    }
}

impl PatchSystem {
    pub fn new(patches: Vec<Patch>, coupling: FarField) -> Result<Self> {
        if patches.is_empty() {
            return Err(Error::domain("a patch system needs at least one patch"));
        }
        for p in &patches {
            if !(p.target_mass.is_finite() && p.target_mass > 0.0) {
                return Err(Error::domain("patch target masses must be positive"));
            }
        }
        for a in 0..patches.len() {
            for b in a + 1..patches.len() {
                if boxes_overlap(&patches[a].density, &patches[b].density) {
                    return Err(Error::domain(format!("patches {a} and {b} have overlapping boxes")));
                }
            }
        }
        Ok(Self { patches, coupling })
    }

    /// One body on one grid; its current mass is the target.
    pub fn single(density: GridDensity, label: Label) -> Result<Self> {
        let target_mass = density.mass();
        Self::new(vec![Patch { density, label, target_mass }], FarField::Monopole)
    }

    pub fn patches(&self) -> &[Patch] {
        &self.patches
    }

    pub(crate) fn patches_mut(&mut self) -> &mut [Patch] {
        &mut self.patches
    }

    pub fn coupling(&self) -> FarField {
        self.coupling
    }

    pub fn find(&self, label: Label) -> Option<&Patch> {
        self.patches.iter().find(|p| p.label == label)
    }

    pub fn masses(&self) -> Vec<f64> {
        self.patches.iter().map(|p| p.density.mass()).collect()
    }

    pub fn total_mass(&self) -> f64 {
        self.masses().iter().sum()
    }

    /// Whole-system inertia via per-patch inertia plus the parallel-axis
    /// terms of each patch's center of mass.
    pub fn moment_of_inertia(&self) -> Result<(f64, Vec3)> {
        let mut parts = Vec::new();
        for p in &self.patches {
            let m = p.density.mass();
            if m > 0.0 {
                let (i, c) = moment_of_inertia(&p.density)?;
                parts.push((m, i, c));
            }
        }
        let total: f64 = parts.iter().map(|p| p.0).sum();
        if total <= 0.0 {
            return Err(Error::precondition("inertia of a zero density"));
        }
        let mut xbar = [0.0; 3];
        for (m, _, c) in &parts {
            for a in 0..3 {
                xbar[a] += m * c[a] / total;
            }
        }
        let inertia = parts.iter().map(|(m, i, c)| i + m * axial_r2(sub(*c, xbar))).sum();
        Ok((inertia, xbar))
    }

    pub fn potentials(&self) -> Result<SystemPotential> {
        let self_part: Vec<GridField> = self.patches.iter().map(|p| potential(&p.density)).collect();
        let mut external: Vec<Vec<f64>> = self.patches.iter().map(|p| vec![0.0; p.density.geometry().len()]).collect();
        for (q, src) in self.patches.iter().enumerate() {
            if src.density.max_value() == 0.0 {
                continue;
            }
            let mp = Multipole::of(&src.density)?;
            for (p, dst) in self.patches.iter().enumerate() {
                if p == q {
                    continue;
                }
                let g = dst.density.geometry();
                if box_gap(&dst.density, &src.density) < 2.0 * src.density.geometry().h {
                    return Err(Error::precondition("patches too close for the far-field expansion"));
                }
                for (idx, e) in external[p].iter_mut().enumerate() {
                    *e += mp.eval(g.center_of(idx), self.coupling);
                }
            }
        }
        Ok(SystemPotential { self_part, external })
    }

    pub fn energies(&self, j: f64, eos: &PolytropicEos) -> Result<EnergyBreakdown> {
        let pot = self.potentials()?;
        self.energies_with(&pot, j, eos)
    }

    /// Energy breakdown reusing already computed potentials.
    pub fn energies_with(&self, pot: &SystemPotential, j: f64, eos: &PolytropicEos) -> Result<EnergyBreakdown> {
        if !(j.is_finite() && j >= 0.0) {
            return Err(Error::domain(format!("angular momentum must be >= 0, got {j}")));
        }
        let masses = self.masses();
        let total: f64 = masses.iter().sum();
        if j > 0.0 && total <= 0.0 {
            return Err(Error::precondition("J > 0 with zero mass leaves I undefined"));
        }
        let mut u = 0.0;
        let mut g_own = 0.0;
        let mut g_ext = 0.0;
        for (p, patch) in self.patches.iter().enumerate() {
            u += internal_energy(&patch.density, eos);
            g_own += dot_field(&patch.density, &pot.self_part[p]);
            let ext = GridField::new(*patch.density.geometry(), pot.external[p].clone())?;
            g_ext += dot_field(&patch.density, &ext);
        }
        // g_ext counts each pair from both sides; its half is the symmetrized cross term
        let g_inter = (self.patches.len() > 1).then_some(0.5 * g_ext);
        let (inertia, xbar) = if total > 0.0 { self.moment_of_inertia()? } else { (0.0, [0.0; 3]) };
        EnergyBreakdown::assemble(u, g_own + g_ext, g_inter, j, inertia, xbar, masses)
    }
}

fn boxes_overlap(a: &GridDensity, b: &GridDensity) -> bool {
    let (alo, ahi) = a.geometry().bbox();
    let (blo, bhi) = b.geometry().bbox();
    (0..3).all(|k| alo[k] < bhi[k] && blo[k] < ahi[k])
}

fn box_gap(a: &GridDensity, b: &GridDensity) -> f64 {
    let (alo, ahi) = a.geometry().bbox();
    let (blo, bhi) = b.geometry().bbox();
    let mut s = 0.0;
    for k in 0..3 {
        let d = (blo[k] - ahi[k]).max(alo[k] - bhi[k]).max(0.0);
        s += d * d;
    }
    s.sqrt()
}
