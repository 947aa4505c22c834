//! File formats and subcommands behind the `circle-pattern` binary.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod format;

pub use commands::{cmd_check, cmd_flow, cmd_report, cmd_solve, cmd_validate, Io};
pub use format::{parse_problem, print_problem, Diagnostic, Problem, ProblemDoc, ResultDoc};
