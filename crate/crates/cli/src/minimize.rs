use crate::exit::{Failure, NOT_CONVERGED, OK};
use crate::manifest::RunManifest;
use crate::MinimizeArgs;
use starplanet::diagnostics::fmt_float;
use starplanet::minimizer::{minimize, SolverConfig};
use starplanet::Error;

pub fn run(a: &MinimizeArgs) -> u8 {
    let mut manifest = RunManifest::start("minimize");
    let outcome = solve(a, &mut manifest);
    manifest.finish(&a.out, outcome)
}

fn solve(a: &MinimizeArgs, manifest: &mut RunManifest) -> Result<u8, Failure> {
    let text = std::fs::read_to_string(&a.config)
        .map_err(|e| Failure::from(Error::Config(format!("cannot read {}: {e}", a.config.display()))))?;
    let cfg = SolverConfig::from_toml_str(&text)?;
    manifest.config = cfg.to_toml_string();
    let r = minimize(&cfg)?;
    manifest.outputs = r.write_outputs(&a.out)?;
    manifest.note("converged", r.converged);
    manifest.note("iterations", r.iterations);
    manifest.note("EJ", fmt_float(r.breakdown.e_j));
    manifest.note("max_change", fmt_float(r.change.iter().cloned().fold(0.0, f64::max)));
    manifest.note("max_el_residual", fmt_float(r.el_residuals.iter().cloned().fold(0.0, f64::max)));
    println!(
        "converged = {}, iterations = {}, EJ = {}",
        r.converged,
        r.iterations,
        fmt_float(r.breakdown.e_j)
    );
    if r.converged {
        Ok(OK)
    } else {
        eprintln!("warning: max_iter reached before convergence");
        Ok(NOT_CONVERGED)
    }
}
