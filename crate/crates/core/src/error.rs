use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::complex::Violation;
use crate::solve::NonConvergence;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("face index {face} out of range for a complex with {face_count} faces")]
    FaceOutOfRange { face: usize, face_count: usize },

    #[error("{}theta must lie in {interval} for delta = {delta}, got {theta}", edge_prefix(.edge))]
    ThetaDomain {
        edge: Option<usize>,
        theta: f64,
        delta: i8,
        interval: &'static str,
    },

    #[error("u[{face}] = {value} is not admissible: coordinates must be finite and negative")]
    Inadmissible { face: usize, value: f64 },

    #[error("pattern type (epsilon = {epsilon}, delta = {delta}) is not supported")]
    UnsupportedType { epsilon: i8, delta: i8 },

    #[error("face subset must be nonempty")]
    EmptySubset,

    #[error("{what}: expected length {expected}, got {got}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("target curvature must be positive, face {face} has {value}")]
    NonPositiveTarget { face: usize, value: f64 },

    #[error("exhaustive subset check is limited to {limit} faces, complex has {face_count}; use the max-flow check")]
    TooManyFaces { face_count: usize, limit: usize },

    #[error("invalid complex: {} violation(s)", .0.len())]
    InvalidComplex(Vec<Violation>),

    #[error("invalid option {name}: {reason}")]
    InvalidOption {
        name: &'static str,
        reason: &'static str,
    },

    #[error("{0}")]
    NonConvergence(Box<NonConvergence>),
}

fn edge_prefix(edge: &Option<usize>) -> String {
    match edge {
        Some(e) => format!("edge {e}: "),
        None => String::new(),
    }
}
