//! JSON problem and result documents.
//!
//! Reals are written in the shortest form that parses back to the same
//! `f64`, so every document round-trips bit for bit.

use std::fmt;

use circle_pattern_core::{
    Edge, FlowMethod, FlowOptions, Integrator, Pattern, PatternComplex, PatternType, SolveOptions,
};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const PROBLEM_FORMAT: &str = "circle-pattern/problem@1";
pub const RESULT_FORMAT: &str = "circle-pattern/result@1";
pub const FEASIBILITY_FORMAT: &str = "circle-pattern/feasibility@1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemDoc {
    pub format: String,
    pub pattern_type: TypeDoc,
    pub faces: FacesDoc,
    pub edges: Vec<EdgeDoc>,
    pub targets: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_u: Option<Vec<f64>>,
    /// Radii, accepted on input only; converted to `initial_u`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_r: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flow: Option<FlowDoc>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TypeDoc {
    pub epsilon: i8,
    pub delta: i8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FacesDoc {
    pub count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeDoc {
    pub id: usize,
    pub face_a: usize,
    pub face_b: usize,
    pub theta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FlowMethodDoc {
    Ricci,
    Calabi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IntegratorDoc {
    Rk4,
    Euler,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<FlowMethodDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub integrator: Option<IntegratorDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_every: Option<usize>,
}

impl From<FlowMethodDoc> for FlowMethod {
    fn from(m: FlowMethodDoc) -> Self {
        match m {
            FlowMethodDoc::Ricci => FlowMethod::Ricci,
            FlowMethodDoc::Calabi => FlowMethod::Calabi,
        }
    }
}

impl From<IntegratorDoc> for Integrator {
    fn from(i: IntegratorDoc) -> Self {
        match i {
            IntegratorDoc::Rk4 => Integrator::Rk4,
            IntegratorDoc::Euler => Integrator::Euler,
        }
    }
}

/// A validated problem. `doc` is normalized: radii given as `initial_r`
/// have been moved to `initial_u`.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub doc: ProblemDoc,
    pub pattern: Pattern,
}

impl Problem {
    pub fn targets(&self) -> &[f64] {
        &self.doc.targets
    }

    pub fn initial_u(&self) -> Option<&[f64]> {
        self.doc.initial_u.as_deref()
    }

    pub fn solve_options(&self) -> SolveOptions {
        solve_options(&self.doc)
    }

    pub fn flow_options(&self) -> FlowOptions {
        flow_options(&self.doc)
    }

    /// Hex SHA-256 of the compact serialization of the normalized document.
    pub fn hash(&self) -> String {
        hash_doc(&self.doc)
    }
}

fn solve_options(doc: &ProblemDoc) -> SolveOptions {
    let mut opts = SolveOptions::default();
    if let Some(s) = doc.solver {
        opts.tol_residual = s.tol.unwrap_or(opts.tol_residual);
        opts.max_iter = s.max_iter.unwrap_or(opts.max_iter);
    }
    opts
}

fn flow_options(doc: &ProblemDoc) -> FlowOptions {
    let mut opts = FlowOptions::default();
    if let Some(f) = doc.flow {
        opts.method = f.method.map_or(opts.method, Into::into);
        opts.integrator = f.integrator.map_or(opts.integrator, Into::into);
        opts.dt = f.dt.unwrap_or(opts.dt);
        opts.t_max = f.t_max.unwrap_or(opts.t_max);
        opts.tol_residual = f.tol.unwrap_or(opts.tol_residual);
        opts.sample_every = f.sample_every.unwrap_or(opts.sample_every);
    }
    opts
}

pub fn hash_doc(doc: &ProblemDoc) -> String {
    let bytes = serde_json::to_vec(doc).expect("problem documents always serialize");
    Sha256::digest(&bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// One problem with the document location it concerns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub location: String,
    pub message: String,
}

impl Diagnostic {
    fn new(location: impl Into<String>, message: impl fmt::Display) -> Self {
        Self {
            location: location.into(),
            message: message.to_string(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.location, self.message)
    }
}

/// Parses and validates a problem document.
pub fn parse_problem(text: &str) -> Result<Problem, Vec<Diagnostic>> {
    let doc: ProblemDoc =
        serde_json::from_str(text).map_err(|e| vec![Diagnostic::new("syntax", e)])?;
    validate_doc(doc)
}

pub fn validate_doc(mut doc: ProblemDoc) -> Result<Problem, Vec<Diagnostic>> {
    let mut diags = Vec::new();
    if doc.format != PROBLEM_FORMAT {
        diags.push(Diagnostic::new(
            "format",
            format!("expected \"{PROBLEM_FORMAT}\", got \"{}\"", doc.format),
        ));
    }
    let kind =
        match PatternType::from_epsilon_delta(doc.pattern_type.epsilon, doc.pattern_type.delta) {
            Ok(k) => Some(k),
            Err(e) => {
                diags.push(Diagnostic::new("pattern_type", e));
                None
            }
        };

    let faces = doc.faces.count;
    for (i, e) in doc.edges.iter().enumerate() {
        for (field, face) in [("face_a", e.face_a), ("face_b", e.face_b)] {
            if face >= faces {
                diags.push(Diagnostic::new(
                    format!("edges[{i}].{field}"),
                    format!("face {face} out of range for {faces} faces"),
                ));
            }
        }
        if let Some(kind) = kind {
            if let Err(err) = kind.check_theta(e.id, e.theta) {
                diags.push(Diagnostic::new(format!("edges[{i}].theta"), err));
            }
        }
    }
    let labelled = doc.edges.iter().filter(|e| e.label.is_some()).count();
    if labelled != 0 && labelled != doc.edges.len() {
        diags.push(Diagnostic::new(
            "edges",
            "labels must be given for all edges or for none",
        ));
    }

    check_face_vector(&mut diags, "targets", &doc.targets, faces, |i, k| {
        (!(k > 0.0 && k.is_finite()))
            .then(|| format!("target curvature of face {i} must be positive and finite, got {k}"))
    });
    if doc.initial_u.is_some() && doc.initial_r.is_some() {
        diags.push(Diagnostic::new(
            "initial_r",
            "give at most one of initial_u and initial_r",
        ));
    }
    if let Some(u) = &doc.initial_u {
        check_face_vector(&mut diags, "initial_u", u, faces, |_, v| {
            (!(v < 0.0 && v.is_finite())).then(|| format!("u must be finite and negative, got {v}"))
        });
    }
    if let Some(r) = &doc.initial_r {
        check_face_vector(&mut diags, "initial_r", r, faces, |_, v| {
            (!v.is_finite()).then(|| format!("r must be finite, got {v}"))
        });
    }

    let mut edges: Vec<&EdgeDoc> = doc.edges.iter().collect();
    edges.sort_by_key(|e| e.id);
    let mut complex = PatternComplex::new(
        faces,
        edges
            .iter()
            .map(|e| Edge::new(e.id, e.face_a, e.face_b))
            .collect(),
    );
    if let Some(labels) = &doc.faces.labels {
        complex = complex.with_face_labels(labels.clone());
    }
    if labelled == doc.edges.len() && labelled > 0 {
        complex = complex.with_edge_labels(edges.iter().filter_map(|e| e.label.clone()).collect());
    }
    for v in complex.validate() {
        // out-of-range faces are already reported per edge
        if !matches!(v, circle_pattern_core::Violation::FaceOutOfRange { .. }) {
            diags.push(Diagnostic::new("faces/edges", v));
        }
    }

    if let Err(e) = solve_options(&doc).validate() {
        diags.push(Diagnostic::new("solver", e));
    }
    if let Err(e) = flow_options(&doc).validate() {
        diags.push(Diagnostic::new("flow", e));
    }

    if !diags.is_empty() {
        return Err(diags);
    }
    let theta = edges.iter().map(|e| e.theta).collect();
    let pattern = Pattern::new(complex, kind.expect("checked above"), theta)
        .map_err(|e| vec![Diagnostic::new("problem", e)])?;
    if let Some(r) = doc.initial_r.take() {
        doc.initial_u = Some(
            r.iter()
                .map(|&r| circle_pattern_core::geometry::u_from_radius(r))
                .collect(),
        );
    }
    Ok(Problem { doc, pattern })
}

fn check_face_vector(
    diags: &mut Vec<Diagnostic>,
    name: &str,
    values: &[f64],
    faces: usize,
    bad: impl Fn(usize, f64) -> Option<String>,
) {
    if values.len() != faces {
        diags.push(Diagnostic::new(
            name,
            format!(
                "expected {faces} entries, one per face, got {}",
                values.len()
            ),
        ));
    }
    for (i, &v) in values.iter().enumerate() {
        if let Some(msg) = bad(i, v) {
            diags.push(Diagnostic::new(format!("{name}[{i}]"), msg));
        }
    }
}

/// Pretty-printed JSON of the normalized document.
pub fn print_problem(problem: &Problem) -> String {
    let mut s =
        serde_json::to_string_pretty(&problem.doc).expect("problem documents always serialize");
    s.push('\n');
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResultDoc {
    pub format: String,
    pub problem: ProblemDoc,
    pub problem_hash: String,
    /// `closed_form`, `newton`, `ricci_flow` or `calabi_flow`.
    pub method: String,
    pub converged: bool,
    /// `converged`, `max_iterations`, `line_search`, `reached_boundary`,
    /// `time_limit` or `step_underflow`.
    pub termination: String,
    /// Newton iterations or accepted flow steps.
    pub iterations: usize,
    pub wall_time_s: f64,
    pub u: Vec<f64>,
    pub r: Vec<f64>,
    #[serde(rename = "K")]
    pub curvature: Vec<f64>,
    pub target: Vec<f64>,
    /// Per edge, in edge id order: the angle at `face_a` and at `face_b`.
    pub beta: Vec<[f64; 2]>,
    pub lengths: Vec<f64>,
    pub residual: ResidualDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnosis: Option<DiagnosisDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<Vec<SampleDoc>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResidualDoc {
    pub sup: f64,
    pub l2: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosisDoc {
    pub toward_zero: Vec<usize>,
    pub toward_neg_infinity: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleDoc {
    pub t: f64,
    pub residual_sup: f64,
    pub ricci_energy: f64,
    pub calabi_energy: f64,
}

pub fn print_result(result: &ResultDoc) -> String {
    let mut s = serde_json::to_string_pretty(result).expect("result documents always serialize");
    s.push('\n');
    s
}

pub fn parse_result(text: &str) -> Result<ResultDoc, String> {
    let doc: ResultDoc = serde_json::from_str(text).map_err(|e| e.to_string())?;
    if doc.format != RESULT_FORMAT {
        return Err(format!(
            "format: expected \"{RESULT_FORMAT}\", got \"{}\"",
            doc.format
        ));
    }
    Ok(doc)
}
