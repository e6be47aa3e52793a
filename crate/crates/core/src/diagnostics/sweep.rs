use super::fit::exponent_fit;
use super::kepler::separation_ratio;
use super::scaling::component_e0;
use super::support::support_stats;
use crate::error::{Error, Result};
use crate::field::Label;
use crate::minimizer::{minimize, MinimizerResult, SolverConfig};
use rayon::prelude::*;
use serde::Serialize;
use std::io::Write;

/// Parameter lists of a sweep; every other solver setting comes from `base`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub j: Vec<f64>,
    pub m: Vec<f64>,
    pub gamma: Vec<f64>,
    pub base: SolverConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    #[serde(rename = "J")]
    pub j: f64,
    pub m: f64,
    pub gamma: f64,
}

/// Measurements of one body; absent when the point failed or has no such
/// body.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct BodyRecord {
    pub e0: Option<f64>,
    pub lambda: Option<f64>,
    pub radius: Option<f64>,
    pub linf: Option<f64>,
    pub components: Option<usize>,
    pub max_gap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord {
    #[serde(flatten)]
    pub point: SweepPoint,
    pub converged: bool,
    pub iterations: Option<usize>,
    #[serde(rename = "EJ")]
    pub e_j: Option<f64>,
    pub separation_ratio: Option<f64>,
    pub planet: BodyRecord,
    pub star: BodyRecord,
    pub error: Option<String>,
}

/// Log-log slopes over the masses of one `(gamma, J)` group.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitRow {
    pub gamma: f64,
    #[serde(rename = "J")]
    pub j: f64,
    pub samples: usize,
    pub linf_slope: f64,
    pub linf_expected: f64,
    pub linf_residual: f64,
    pub radius_slope: f64,
    pub radius_expected: f64,
    pub radius_residual: f64,
    pub e0_slope: f64,
    pub e0_expected: f64,
    pub e0_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub records: Vec<SweepRecord>,
    pub fits: Vec<FitRow>,
    pub warnings: Vec<String>,
}

/// All `(J, m, gamma)` combinations in sorted order, duplicates removed with
/// a warning each.
pub fn sweep_points(spec: &SweepSpec) -> (Vec<SweepPoint>, Vec<String>) {
    let mut pts = Vec::new();
    for &gamma in &spec.gamma {
        for &j in &spec.j {
            for &m in &spec.m {
                pts.push(SweepPoint { j, m, gamma });
            }
        }
    }
    pts.sort_by(|a, b| a.gamma.total_cmp(&b.gamma).then(a.j.total_cmp(&b.j)).then(a.m.total_cmp(&b.m)));
    let mut warnings = Vec::new();
    let mut out: Vec<SweepPoint> = Vec::new();
    for p in pts {
        if out.last() == Some(&p) {
            warnings.push(format!("duplicate point J={} m={} gamma={} dropped", p.j, p.m, p.gamma));
        } else {
            out.push(p);
        }
    }
    (out, warnings)
}

fn body(result: &MinimizerResult, label: Label) -> Result<BodyRecord> {
    let Some(p) = result.densities.find(label) else {
        return Ok(BodyRecord::default());
    };
    let s = support_stats(&p.density, None)?;
    Ok(BodyRecord {
        e0: Some(component_e0(result, label)?),
        lambda: result.multiplier(label),
        radius: Some(s.radius),
        linf: Some(s.linf),
        components: Some(s.components),
        max_gap: Some(s.max_gap),
    })
}

/// Measurements of one solver result.
pub fn record_for(point: SweepPoint, result: &MinimizerResult) -> Result<SweepRecord> {
    let separation = if result.domains.is_some() { Some(separation_ratio(result)?) } else { None };
    Ok(SweepRecord {
        point,
        converged: result.converged,
        iterations: Some(result.iterations),
        e_j: Some(result.breakdown.e_j),
        separation_ratio: separation,
        planet: body(result, Label::Planet)?,
        star: body(result, Label::Star)?,
        error: None,
    })
}

fn failed(point: SweepPoint, e: &Error) -> SweepRecord {
    SweepRecord {
        point,
        converged: false,
        iterations: None,
        e_j: None,
        separation_ratio: None,
        planet: BodyRecord::default(),
        star: BodyRecord::default(),
        error: Some(e.to_string()),
    }
}

fn run_point(base: &SolverConfig, point: SweepPoint) -> SweepRecord {
    let cfg = SolverConfig { j: point.j, m: point.m, gamma: point.gamma, ..*base };
    match minimize(&cfg).and_then(|r| record_for(point, &r)) {
        Ok(r) => r,
        Err(e) => failed(point, &e),
    }
}

/// Solve every point with up to `jobs` concurrent workers and fit the rate
/// laws of each `(gamma, J)` group.
pub fn run_sweep(spec: &SweepSpec, jobs: usize) -> Result<SweepReport> {
    if jobs == 0 {
        return Err(Error::Config("jobs must be at least 1".into()));
    }
    let (points, mut warnings) = sweep_points(spec);
    if points.is_empty() {
        return Err(Error::Config("sweep has no points".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {jobs} workers: {e}")))?;
    let base = spec.base;
    let records: Vec<SweepRecord> = pool.install(|| points.par_iter().map(|&p| run_point(&base, p)).collect());
    let fits = fit_groups(&records, &mut warnings);
    Ok(SweepReport { records, fits, warnings })
}

/// One fit row per `(gamma, J)` group with enough converged planets.
pub fn fit_groups(records: &[SweepRecord], warnings: &mut Vec<String>) -> Vec<FitRow> {
    let mut keys: Vec<(f64, f64)> = records.iter().map(|r| (r.point.gamma, r.point.j)).collect();
    keys.dedup();
    let mut out = Vec::new();
    for (gamma, j) in keys {
        let group: Vec<&SweepRecord> = records
            .iter()
            .filter(|r| r.point.gamma == gamma && r.point.j == j && r.converged && r.planet.linf.is_some())
            .collect();
        let take = |f: &dyn Fn(&SweepRecord) -> Option<f64>| -> Vec<(f64, f64)> {
            group.iter().filter_map(|r| f(r).map(|v| (r.point.m, v))).collect()
        };
        let linf = exponent_fit(&take(&|r| r.planet.linf));
        let radius = exponent_fit(&take(&|r| r.planet.radius));
        let e0 = exponent_fit(&take(&|r| r.planet.e0.map(f64::abs)));
        match (linf, radius, e0) {
            (Ok(l), Ok(r), Ok(e)) => {
                let d = 3.0 * gamma - 4.0;
                out.push(FitRow {
                    gamma,
                    j,
                    samples: group.len(),
                    linf_slope: l.slope,
                    linf_expected: 2.0 / d,
                    linf_residual: l.residual,
                    radius_slope: r.slope,
                    radius_expected: (gamma - 2.0) / d,
                    radius_residual: r.residual,
                    e0_slope: e.slope,
                    e0_expected: (5.0 * gamma - 6.0) / d,
                    e0_residual: e.residual,
                });
            }
            (Err(e), _, _) | (_, Err(e), _) | (_, _, Err(e)) => {
                warnings.push(format!("no fit for gamma={gamma} J={j}: {e}"));
            }
        }
    }
    out
}

pub const RECORD_COLUMNS: &str = "J,m,gamma,converged,iterations,EJ,separation_ratio,\
planet_e0,planet_lambda,planet_radius,planet_linf,planet_components,planet_max_gap,\
star_e0,star_lambda,star_radius,star_linf,star_components,star_max_gap,error";

pub const FIT_COLUMNS: &str = "gamma,J,samples,linf_slope,linf_expected,linf_residual,\
radius_slope,radius_expected,radius_residual,e0_slope,e0_expected,e0_residual";

/// 17 significant digits.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_float).unwrap_or_default()
}

fn opt_n(v: Option<usize>) -> String {
    v.map(|n| n.to_string()).unwrap_or_default()
}

fn body_cells(b: &BodyRecord) -> [String; 6] {
    [opt(b.e0), opt(b.lambda), opt(b.radius), opt(b.linf), opt_n(b.components), opt(b.max_gap)]
}

impl SweepReport {
    pub fn converged_fraction(&self) -> f64 {
        self.records.iter().filter(|r| r.converged).count() as f64 / self.records.len().max(1) as f64
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# columns: {RECORD_COLUMNS}")?;
        writeln!(w, "{RECORD_COLUMNS}")?;
        for r in &self.records {
            let mut cells = vec![
                fmt_float(r.point.j),
                fmt_float(r.point.m),
                fmt_float(r.point.gamma),
                r.converged.to_string(),
                opt_n(r.iterations),
                opt(r.e_j),
                opt(r.separation_ratio),
            ];
            cells.extend(body_cells(&r.planet));
            cells.extend(body_cells(&r.star));
            let err = r.error.as_deref().unwrap_or("").replace(['"', '\n'], " ");
            cells.push(if err.is_empty() { err } else { format!("\"{err}\"") });
            writeln!(w, "{}", cells.join(","))?;
        }
        Ok(())
    }

    pub fn write_fit_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# columns: {FIT_COLUMNS}")?;
        writeln!(w, "{FIT_COLUMNS}")?;
        for f in &self.fits {
            let cells = [
                fmt_float(f.gamma),
                fmt_float(f.j),
                f.samples.to_string(),
                fmt_float(f.linf_slope),
                fmt_float(f.linf_expected),
                fmt_float(f.linf_residual),
                fmt_float(f.radius_slope),
                fmt_float(f.radius_expected),
                fmt_float(f.radius_residual),
                fmt_float(f.e0_slope),
                fmt_float(f.e0_expected),
                fmt_float(f.e0_residual),
            ];
            writeln!(w, "{}", cells.join(","))?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
