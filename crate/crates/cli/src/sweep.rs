use crate::exit::{Failure, NOT_CONVERGED, OK, USAGE};
use crate::manifest::RunManifest;
use crate::SweepArgs;
use starplanet::diagnostics::{run_sweep, SweepSpec};
use starplanet::minimizer::SolverConfig;
use starplanet::Error;

/// Smallest converged fraction of a successful sweep.
const MIN_CONVERGED: f64 = 0.9;

pub fn run(a: &SweepArgs) -> u8 {
    let mut manifest = RunManifest::start("sweep");
    let outcome = sweep(a, &mut manifest);
    manifest.finish(&a.out, outcome)
}

/// A scalar or a list of numbers under `key`; `None` when absent.
fn number_list(table: &mut toml::Table, key: &str) -> Result<Option<Vec<f64>>, Failure> {
    let bad = || Failure::new(USAGE, format!("{key} must be a number or a list of numbers"));
    let num = |v: &toml::Value| v.as_float().or_else(|| v.as_integer().map(|i| i as f64));
    match table.remove(key) {
        None => Ok(None),
        Some(toml::Value::Array(items)) => items.iter().map(|v| num(v).ok_or_else(bad)).collect::<Result<_, _>>().map(Some),
        Some(v) => num(&v).map(|x| Some(vec![x])).ok_or_else(bad),
    }
}

pub fn parse_spec(text: &str) -> Result<SweepSpec, Failure> {
    let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| Failure::from(Error::Config(e.to_string())))?;
    let j = number_list(&mut table, "J")?;
    let m = number_list(&mut table, "m")?;
    let gamma = number_list(&mut table, "gamma")?;
    let base = SolverConfig::from_toml_str(&table.to_string())?;
    let spec = SweepSpec {
        j: j.unwrap_or_else(|| vec![base.j]),
        m: m.unwrap_or_else(|| vec![base.m]),
        gamma: gamma.unwrap_or_else(|| vec![base.gamma]),
        base,
    };
    if spec.j.is_empty() || spec.m.is_empty() || spec.gamma.is_empty() {
        return Err(Failure::new(USAGE, "J, m and gamma lists must not be empty"));
    }
    Ok(spec)
}

fn sweep(a: &SweepArgs, manifest: &mut RunManifest) -> Result<u8, Failure> {
    if a.jobs == 0 {
        return Err(Failure::new(USAGE, "--jobs must be at least 1"));
    }
    let text = std::fs::read_to_string(&a.config)
        .map_err(|e| Failure::from(Error::Config(format!("cannot read {}: {e}", a.config.display()))))?;
    let spec = parse_spec(&text)?;
    manifest.config = format!("J = {:?}\nm = {:?}\ngamma = {:?}\n{}", spec.j, spec.m, spec.gamma, spec.base.to_toml_string());
    let report = run_sweep(&spec, a.jobs)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    std::fs::create_dir_all(&a.out)?;
    let csv = a.out.join("sweep.csv");
    let mut buf = Vec::new();
    report.write_csv(&mut buf)?;
    std::fs::write(&csv, buf)?;
    let fits = a.out.join("fits.csv");
    let mut buf = Vec::new();
    report.write_fit_csv(&mut buf)?;
    std::fs::write(&fits, buf)?;
    let json = a.out.join("sweep.json");
    std::fs::write(&json, report.to_json())?;
    manifest.outputs = vec![csv, fits, json];
    let fraction = report.converged_fraction();
    manifest.note("points", report.records.len());
    manifest.note("converged_fraction", fraction);
    manifest.note("fits", report.fits.len());
    manifest.note("warnings", report.warnings.len());
    manifest.note("jobs", a.jobs);
    println!("{} points, {:.0}% converged, {} fit rows", report.records.len(), 100.0 * fraction, report.fits.len());
    Ok(if fraction >= MIN_CONVERGED { OK } else { NOT_CONVERGED })
}
