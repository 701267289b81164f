//! Discrete budgets, stability constants and manufactured-solution studies.

mod budgets;
mod convergence;
mod infsup;
mod mms;
mod verify;

pub use budgets::{energy_budget, kinetic_energy, rho_square_budget, BudgetReport};
pub use convergence::{convergence_study, ConvergenceConfig, ConvergenceRow, ConvergenceTable};
pub use infsup::inf_sup_constant;
pub use mms::{mms_error, ManufacturedSolution, MmsError};
pub use verify::{verify_suite, Check};
