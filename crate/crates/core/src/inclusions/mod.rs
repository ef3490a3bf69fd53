//! First- and second-order differential inclusions driven by Hölder signals.
//!
//! A solution of `x(t) ∈ ξ + ∫_0^t Φ(s, x(s)) dw(s)` (the set-valued
//! integral with budget `r`) is sought as a fixed point of a single-valued
//! branch `x ↦ ξ + ∫ φ dw`, `φ(s) = σ(Φ(s, x(s)))` for a fixed Steiner-type
//! selector `σ`. Picard iteration runs on windows short enough for the
//! fixed-point argument, and solutions are glued across windows. Each
//! converged branch is then checked for membership against the Aumann–Young
//! integral of `Φ(·, x(·))`.

mod coefficient;
mod solver;
mod stochastic;

use thiserror::Error;

pub use coefficient::{natural_constants, Coefficient, ProbeReport};
pub use solver::{
    solution_funnel, solve_first_order, solve_second_order, window_schedule, FunnelReport,
    InclusionProblem, Order, SolutionReport, Strategy, Window,
};
pub use stochastic::{stochastic_inclusion_run, EnsembleReport, PathOutcome, ProblemTemplate};

use crate::aumann::AumannError;
use crate::convex_bodies::GeometryError;
use crate::paths::PathError;
use crate::young::YoungError;

#[derive(Debug, Error)]
pub enum InclusionError {
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("Picard iteration did not converge (residual {residual:.3e})", residual = report.residual)]
    NonConvergence { report: Box<SolutionReport> },
    #[error(transparent)]
    Aumann(#[from] AumannError),
    #[error(transparent)]
    Young(#[from] YoungError),
    #[error(transparent)]
    Path(#[from] PathError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

pub type Result<T> = std::result::Result<T, InclusionError>;
