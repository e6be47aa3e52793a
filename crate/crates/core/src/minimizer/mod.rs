//! Constrained minimization of `E_J` over densities supported in two fixed
//! balls with prescribed masses, by self-consistent-field iteration on the
//! Euler–Lagrange relation `A'(rho) = [Phi + lambda]_+`.

mod anderson;
mod config;
mod domain;
mod multiplier;
mod residual;
mod result;
mod scf;
mod setup;

pub use config::{Cap, Seed, SolverConfig};
pub use domain::{make_domains, separation, DomainPair};
pub use multiplier::{mapped_mass, solve_multiplier};
pub use residual::{el_residual, ep_residual, ep_residual_of};
pub use result::{HistoryEntry, MinimizerResult};
pub use scf::{effective_potential, minimize, minimize_from, scf_step};
pub use setup::{feasibility_hint, seed_separation, Setup};
