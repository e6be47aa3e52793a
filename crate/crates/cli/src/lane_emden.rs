use crate::exit::{Failure, OK, UNSUPPORTED, USAGE};
use crate::manifest::RunManifest;
use crate::LaneEmdenArgs;
use starplanet::diagnostics::fmt_float;
use starplanet::eos::PolytropicEos;
use starplanet::lane_emden::{rescale, solve_unit};
use std::io::Write;

pub const SUMMARY_COLUMNS: &str = "m,R_m,rho_c,lambda_m,e0_m";

pub fn run(a: &LaneEmdenArgs) -> u8 {
    let mut manifest = RunManifest::start("lane-emden");
    manifest.config = format!("gamma = {}\nK = {}\nmasses = {:?}\n", a.gamma, a.kpress, a.masses);
    let outcome = tabulate(a, &mut manifest);
    manifest.finish(&a.out, outcome)
}

fn tabulate(a: &LaneEmdenArgs, manifest: &mut RunManifest) -> Result<u8, Failure> {
    if !(a.kpress.is_finite() && a.kpress > 0.0) {
        return Err(Failure::new(USAGE, format!("--kpress must be positive, got {}", a.kpress)));
    }
    if !a.gamma.is_finite() {
        return Err(Failure::new(USAGE, format!("--gamma must be finite, got {}", a.gamma)));
    }
    if let Some(m) = a.masses.iter().find(|m| !(m.is_finite() && **m > 0.0)) {
        return Err(Failure::new(USAGE, format!("--mass must be positive, got {m}")));
    }
    // exponents at or below 4/3 have no bound polytrope to tabulate
    let eos = PolytropicEos::new(a.kpress, a.gamma).map_err(|e| Failure::new(UNSUPPORTED, e.to_string()))?;
    let unit = solve_unit(&eos)?;
    std::fs::create_dir_all(&a.out)?;
    let mut summary = format!("{SUMMARY_COLUMNS}\n");
    for (i, &m) in a.masses.iter().enumerate() {
        let p = rescale(&unit, m)?;
        let path = a.out.join(format!("profile_{i}.csv"));
        let mut f = std::io::BufWriter::new(std::fs::File::create(&path)?);
        p.write_csv(&mut f)?;
        f.flush()?;
        manifest.outputs.push(path);
        let cells = [m, p.radius, p.central_density, p.lambda, p.e0].map(fmt_float);
        summary.push_str(&cells.join(","));
        summary.push('\n');
    }
    let path = a.out.join("summary.csv");
    std::fs::write(&path, &summary)?;
    manifest.outputs.push(path);
    manifest.note("bodies", a.masses.len());
    manifest.note("unit_radius", fmt_float(unit.radius));
    print!("{summary}");
    Ok(OK)
}
