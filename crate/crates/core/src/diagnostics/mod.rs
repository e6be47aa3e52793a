//! Measurements on solver output and synthetic densities: two-body
//! separation, support geometry, scaling densities, rate-law fits,
//! component shifts, local-minimality probes, symmetry and sweeps.

mod fit;
mod kepler;
mod probe;
mod scaling;
mod shift;
mod support;
mod sweep;
mod symmetry;

pub use fit::{exponent_fit, ExponentFit};
pub use kepler::{g_functions, g_gate, g_uniform_gap, kepler_argmin, kepler_energy, separation_ratio};
pub use probe::{local_min_probe, EnergyProbe, Perturbation, ProbeReport};
pub use scaling::{
    component_e0, energy_law, l1_to_profile, multiplier_bound_check, scaled_energy_gap, scaling_density, EnergyLaw,
    MultiplierBound,
};
pub use shift::{component_shift, component_shift_result, pieces_energy, shift_threshold, two_blob_planet, ShiftRecord};
pub use support::{boundary_margin, component_labels, default_floor, split_components, support_stats, SupportStats, SUPPORT_FLOOR};
pub use sweep::{
    fit_groups, fmt_float, record_for, run_sweep, sweep_points, BodyRecord, FitRow, SweepPoint, SweepRecord, SweepReport,
    SweepSpec, FIT_COLUMNS, RECORD_COLUMNS,
};
pub use symmetry::{symmetry_check, symmetry_of, SymmetryReport};
