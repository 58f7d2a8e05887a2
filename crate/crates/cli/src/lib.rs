//! Command-line front end for `bdlawson`: CSV ingestion, result bundles and
//! the built-in experiments.

pub mod bundle;
pub mod commands;
pub mod experiments;
pub mod format;
pub mod problem;

use bdlawson::{TerminationReason, Verdict};
use bundle::RunSummary;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;
pub const EXIT_BREAKDOWN: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad flags, unreadable or malformed input files, infeasible sizes.
    #[error("{0}")]
    Input(String),

    /// The solver could not produce a first iterate.
    #[error("solver failed: {0}")]
    Solve(bdlawson::Error),

    #[error("cannot write output: {0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) | CliError::Output(_) => EXIT_INPUT,
            CliError::Solve(e) => solve_error_code(e),
        }
    }
}

fn solve_error_code(e: &bdlawson::Error) -> i32 {
    use bdlawson::Error::*;
    match e {
        Argument(_) | SupportSelection(_) => EXIT_INPUT,
        SingularMatrix { .. }
        | Conditioning { .. }
        | DegeneratePencil
        | TooFewWeights { .. }
        | Pole { .. }
        | PoleAtSample { .. } => EXIT_BREAKDOWN,
    }
}

impl From<bdlawson::Error> for CliError {
    fn from(e: bdlawson::Error) -> Self {
        match e {
            bdlawson::Error::Argument(msg) => CliError::Input(msg),
            other => CliError::Solve(other),
        }
    }
}

/// 0 when converged or certified, 3 on breakdown, 2 otherwise.
pub fn run_exit_code(summary: &RunSummary) -> i32 {
    match summary.termination {
        TerminationReason::DegenerateDual | TerminationReason::ConditioningFailure => {
            EXIT_BREAKDOWN
        }
        _ if summary.certificate.verdict == Verdict::Degenerate => EXIT_BREAKDOWN,
        TerminationReason::Converged => EXIT_OK,
        _ if summary.certificate.verdict == Verdict::Certified => EXIT_OK,
        TerminationReason::MaxIterations | TerminationReason::AscentStalled => EXIT_NOT_CONVERGED,
    }
}
