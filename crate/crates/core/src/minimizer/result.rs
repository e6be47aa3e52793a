use super::config::SolverConfig;
use super::domain::DomainPair;
use crate::eos::PolytropicEos;
use crate::error::Result;
use crate::field::{EnergyBreakdown, Label, PatchSystem};
use crate::lane_emden::RadialProfile;
use crate::vec3::Vec3;
use serde::Serialize;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HistoryEntry {
    pub iteration: usize,
    #[serde(rename = "EJ")]
    pub e_j: f64,
    pub change: f64,
    pub el_residual: f64,
    pub theta: f64,
}

#[derive(Debug, Clone)]
pub struct MinimizerResult {
    pub config: SolverConfig,
    pub eos: PolytropicEos,
    pub domains: Option<DomainPair>,
    /// Admissible ball (center, radius) inside each patch.
    pub regions: Vec<(Vec3, f64)>,
    pub densities: PatchSystem,
    pub multipliers: Vec<f64>,
    pub breakdown: EnergyBreakdown,
    pub iterations: usize,
    pub mass_errors: Vec<f64>,
    pub change: Vec<f64>,
    pub el_residuals: Vec<f64>,
    pub converged: bool,
    /// `E_J` of the initial density.
    pub seed_energy: f64,
    /// Iterates whose potential exceeded the sup bound.
    pub bound_violations: usize,
    /// Interpolation inequality `(1, 4/3, inf)` on the final densities.
    pub interpolation_ok: bool,
    pub history: Vec<HistoryEntry>,
    pub unit_profile: RadialProfile,
}

#[derive(Serialize)]
struct PatchDoc {
    label: Label,
    target_mass: f64,
    mass: f64,
    multiplier: f64,
    mass_error: f64,
    change: f64,
    el_residual: f64,
    dims: [usize; 3],
    h: f64,
    origin: Vec3,
    region_center: Vec3,
    region_radius: f64,
    snapshot: String,
}

#[derive(Serialize)]
struct ResultDoc<'a> {
    config: &'a SolverConfig,
    converged: bool,
    iterations: usize,
    domains: &'a Option<DomainPair>,
    breakdown: &'a EnergyBreakdown,
    seed_energy: f64,
    bound_violations: usize,
    interpolation_ok: bool,
    patches: Vec<PatchDoc>,
    history: &'a [HistoryEntry],
}

impl MinimizerResult {
    pub fn patch_index(&self, label: Label) -> Option<usize> {
        self.densities.patches().iter().position(|p| p.label == label)
    }

    pub fn multiplier(&self, label: Label) -> Option<f64> {
        self.patch_index(label).map(|i| self.multipliers[i])
    }

    fn snapshot_name(label: Label) -> &'static str {
        match label {
            Label::Planet => "planet.gpd",
            Label::Star => "star.gpd",
        }
    }

    pub fn to_json(&self) -> String {
        let patches = self
            .densities
            .patches()
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let g = p.density.geometry();
                PatchDoc {
                    label: p.label,
                    target_mass: p.target_mass,
                    mass: p.density.mass(),
                    multiplier: self.multipliers[i],
                    mass_error: self.mass_errors[i],
                    change: self.change[i],
                    el_residual: self.el_residuals[i],
                    dims: g.dims,
                    h: g.h,
                    origin: g.origin,
                    region_center: self.regions[i].0,
                    region_radius: self.regions[i].1,
                    snapshot: Self::snapshot_name(p.label).into(),
                }
            })
            .collect();
        let doc = ResultDoc {
            config: &self.config,
            converged: self.converged,
            iterations: self.iterations,
            domains: &self.domains,
            breakdown: &self.breakdown,
            seed_energy: self.seed_energy,
            bound_violations: self.bound_violations,
            interpolation_ok: self.interpolation_ok,
            patches,
            history: &self.history,
        };
        serde_json::to_string_pretty(&doc).expect("result serializes")
    }

    /// Write `result.json` and one snapshot per patch into `dir`.
    pub fn write_outputs(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut out = Vec::new();
        let json = dir.join("result.json");
        std::fs::write(&json, self.to_json())?;
        out.push(json);
        for p in self.densities.patches() {
            let path = dir.join(Self::snapshot_name(p.label));
            let f = std::io::BufWriter::new(std::fs::File::create(&path)?);
            p.density.write_snapshot(f)?;
            out.push(path);
        }
        Ok(out)
    }
}
