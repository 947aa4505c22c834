//! The five subcommands. Each returns the process exit code:
//! 0 success, 1 mathematical failure (invalid problem for `validate`,
//! infeasible or marginal target, no convergence), 2 I/O or format failure.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use circle_pattern_core::feasibility::{Method, Witness};
use circle_pattern_core::geometry::radius_from_u;
use circle_pattern_core::solve::FailureReason;
use circle_pattern_core::{
    check_exhaustive, check_maxflow, check_positivity, closed_form_solve_00d, run_flow,
    solve_newton_from, BoundaryDiagnosis, Error, FeasibilityReport, FlowMethod, Integrator,
    PatternType, RadiusState, Termination, Verdict,
};
use serde_json::json;

use crate::format::{
    hash_doc, parse_problem, parse_result, print_result, validate_doc, DiagnosisDoc, Problem,
    ResidualDoc, ResultDoc, SampleDoc, FEASIBILITY_FORMAT, RESULT_FORMAT,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_IO: i32 = 2;

/// Maximum disagreement between stored and recomputed curvature accepted
/// by `report`.
pub const CONSISTENCY_TOL: f64 = 1e-12;

/// Where command output goes; tests substitute buffers.
pub struct Io<'a> {
    pub out: &'a mut dyn Write,
    pub err: &'a mut dyn Write,
}

macro_rules! say {
    ($w:expr, $($arg:tt)*) => {
        // a closed stdout or stderr is not worth failing over
        let _ = writeln!($w, $($arg)*);
    };
}

fn read(path: &Path, io: &mut Io) -> Result<String, i32> {
    std::fs::read_to_string(path).map_err(|e| {
        say!(io.err, "error: cannot read {}: {e}", path.display());
        EXIT_IO
    })
}

fn load(path: &Path, io: &mut Io, invalid_code: i32) -> Result<Problem, i32> {
    let text = read(path, io)?;
    parse_problem(&text).map_err(|diags| {
        for d in diags {
            say!(io.err, "{}: {d}", path.display());
        }
        invalid_code
    })
}

pub fn cmd_validate(path: &Path, io: &mut Io) -> i32 {
    match load(path, io, EXIT_FAILURE) {
        Ok(p) => {
            say!(
                io.err,
                "{}: valid {} problem, {} faces, {} edges",
                path.display(),
                p.pattern.kind(),
                p.pattern.face_count(),
                p.pattern.complex().edge_count()
            );
            EXIT_OK
        }
        Err(code) => code,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum CheckMethod {
    /// Positivity for `epsilon = 0`, max-flow for `(1, 1, 0)`.
    Auto,
    Positivity,
    Exhaustive,
    Maxflow,
}

pub fn cmd_check(path: &Path, method: CheckMethod, io: &mut Io) -> i32 {
    let problem = match load(path, io, EXIT_IO) {
        Ok(p) => p,
        Err(code) => return code,
    };
    let complex = problem.pattern.complex();
    let khat = problem.targets();
    let method = match (method, problem.pattern.kind()) {
        (CheckMethod::Auto, PatternType::OneOneZero) => CheckMethod::Maxflow,
        (CheckMethod::Auto, PatternType::ZeroZero(_)) => CheckMethod::Positivity,
        (m, _) => m,
    };
    let report = match method {
        CheckMethod::Positivity | CheckMethod::Auto => Ok(check_positivity(khat)),
        CheckMethod::Exhaustive => check_exhaustive(complex, khat),
        CheckMethod::Maxflow => check_maxflow(complex, khat),
    };
    let report = match report {
        Ok(r) => r,
        Err(e) => {
            say!(io.err, "error: {e}");
            return EXIT_IO;
        }
    };
    say!(io.out, "{}", feasibility_json(&report));
    match report.verdict {
        Verdict::Feasible => EXIT_OK,
        Verdict::Marginal => {
            say!(
                io.err,
                "target is within the tolerance band of a subset bound; treated as infeasible"
            );
            EXIT_FAILURE
        }
        Verdict::Infeasible => EXIT_FAILURE,
    }
}

pub fn feasibility_json(report: &FeasibilityReport) -> String {
    let witness = match &report.witness {
        None => serde_json::Value::Null,
        Some(Witness::Subset {
            faces,
            edges,
            lhs,
            rhs,
        }) => json!({"faces": faces.faces(), "edges": edges, "lhs": lhs, "rhs": rhs}),
        Some(Witness::NonPositive { face, value }) => json!({"face": face, "value": value}),
    };
    let doc = json!({
        "format": FEASIBILITY_FORMAT,
        "feasible": report.is_feasible(),
        "verdict": match report.verdict {
            Verdict::Feasible => "feasible",
            Verdict::Marginal => "marginal",
            Verdict::Infeasible => "infeasible",
        },
        "method": match report.method {
            Method::Positivity => "positivity",
            Method::Exhaustive => "exhaustive",
            Method::MaxFlow => "maxflow",
        },
        "witness": witness,
    });
    serde_json::to_string_pretty(&doc).expect("json values serialize")
}

#[derive(Debug, Clone, Default)]
pub struct SolveArgs {
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub out: Option<PathBuf>,
}

struct Outcome {
    method: &'static str,
    converged: bool,
    termination: &'static str,
    iterations: usize,
    u: Vec<f64>,
    diagnosis: Option<BoundaryDiagnosis>,
    trajectory: Option<Vec<SampleDoc>>,
}

fn start_point(problem: &Problem) -> RadiusState {
    let n = problem.pattern.face_count();
    match problem.initial_u() {
        Some(u) => RadiusState::new(u.to_vec()).expect("validated at parse time"),
        None => RadiusState::uniform(n, -1.0).expect("-1 is admissible"),
    }
}

pub fn cmd_solve(path: &Path, args: &SolveArgs, io: &mut Io) -> i32 {
    let problem = match load(path, io, EXIT_IO) {
        Ok(p) => p,
        Err(code) => return code,
    };
    let mut opts = problem.solve_options();
    opts.tol_residual = args.tol.unwrap_or(opts.tol_residual);
    opts.max_iter = args.max_iter.unwrap_or(opts.max_iter);

    let clock = Instant::now();
    let khat = problem.targets();
    let outcome = if problem.pattern.s_sums().is_some() {
        closed_form_solve_00d(&problem.pattern, khat).map(|u| Outcome {
            method: "closed_form",
            converged: true,
            termination: "converged",
            iterations: 0,
            u: u.into_vec(),
            diagnosis: None,
            trajectory: None,
        })
    } else {
        match solve_newton_from(&problem.pattern, khat, &start_point(&problem), &opts) {
            Ok(sol) => Ok(Outcome {
                method: "newton",
                converged: true,
                termination: "converged",
                iterations: sol.iterations,
                u: sol.u.into_vec(),
                diagnosis: None,
                trajectory: None,
            }),
            Err(Error::NonConvergence(nc)) => Ok(Outcome {
                method: "newton",
                converged: false,
                termination: match nc.reason {
                    FailureReason::MaxIterations => "max_iterations",
                    FailureReason::LineSearch => "line_search",
                    FailureReason::ReachedBoundary => "reached_boundary",
                },
                iterations: nc.iterations,
                u: nc.u,
                diagnosis: Some(nc.diagnosis),
                trajectory: None,
            }),
            Err(e) => Err(e),
        }
    };
    finish(&problem, outcome, clock, args.out.as_deref(), io)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum FlowMethodArg {
    Ricci,
    Calabi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum IntegratorArg {
    Rk4,
    Euler,
}

#[derive(Debug, Clone, Default)]
pub struct FlowArgs {
    pub method: Option<FlowMethodArg>,
    pub integrator: Option<IntegratorArg>,
    pub dt: Option<f64>,
    pub t_max: Option<f64>,
    pub tol: Option<f64>,
    pub sample_every: Option<usize>,
    pub out: Option<PathBuf>,
}

pub fn cmd_flow(path: &Path, args: &FlowArgs, io: &mut Io) -> i32 {
    let problem = match load(path, io, EXIT_IO) {
        Ok(p) => p,
        Err(code) => return code,
    };
    let mut opts = problem.flow_options();
    if let Some(m) = args.method {
        opts.method = match m {
            FlowMethodArg::Ricci => FlowMethod::Ricci,
            FlowMethodArg::Calabi => FlowMethod::Calabi,
        };
    }
    if let Some(i) = args.integrator {
        opts.integrator = match i {
            IntegratorArg::Rk4 => Integrator::Rk4,
            IntegratorArg::Euler => Integrator::Euler,
        };
    }
    opts.dt = args.dt.unwrap_or(opts.dt);
    opts.t_max = args.t_max.unwrap_or(opts.t_max);
    opts.tol_residual = args.tol.unwrap_or(opts.tol_residual);
    opts.sample_every = args.sample_every.unwrap_or(opts.sample_every);

    let clock = Instant::now();
    let outcome = run_flow(
        &problem.pattern,
        problem.targets(),
        &start_point(&problem),
        &opts,
    )
    .map(|traj| {
        let samples = traj
            .samples
            .iter()
            .map(|s| SampleDoc {
                t: s.t,
                residual_sup: s.residual_sup,
                ricci_energy: s.ricci_energy,
                calabi_energy: s.calabi_energy,
            })
            .collect();
        Outcome {
            method: match opts.method {
                FlowMethod::Ricci => "ricci_flow",
                FlowMethod::Calabi => "calabi_flow",
            },
            converged: traj.converged(),
            termination: match traj.termination {
                Termination::Converged => "converged",
                Termination::TimeLimit => "time_limit",
                Termination::StepUnderflow => "step_underflow",
            },
            iterations: traj.accepted_steps,
            u: traj.last().u.clone(),
            diagnosis: traj.diagnosis.clone(),
            trajectory: Some(samples),
        }
    });
    finish(&problem, outcome, clock, args.out.as_deref(), io)
}

fn finish(
    problem: &Problem,
    outcome: circle_pattern_core::Result<Outcome>,
    clock: Instant,
    out: Option<&Path>,
    io: &mut Io,
) -> i32 {
    let outcome = match outcome {
        Ok(o) => o,
        Err(e) => {
            say!(io.err, "error: {e}");
            return EXIT_IO;
        }
    };
    let report = match problem.pattern.report(&outcome.u, problem.targets()) {
        Ok(r) => r,
        Err(e) => {
            say!(io.err, "error: final state is unusable: {e}");
            return EXIT_FAILURE;
        }
    };
    let result = ResultDoc {
        format: RESULT_FORMAT.to_string(),
        problem: problem.doc.clone(),
        problem_hash: problem.hash(),
        method: outcome.method.to_string(),
        converged: outcome.converged,
        termination: outcome.termination.to_string(),
        iterations: outcome.iterations,
        wall_time_s: clock.elapsed().as_secs_f64(),
        r: outcome.u.iter().map(|&u| radius_from_u(u)).collect(),
        u: outcome.u,
        curvature: report.curvature,
        target: problem.targets().to_vec(),
        beta: report.beta,
        lengths: report.lengths,
        residual: ResidualDoc {
            sup: report.residual_sup,
            l2: report.residual_l2,
        },
        diagnosis: outcome.diagnosis.as_ref().map(|d| DiagnosisDoc {
            toward_zero: d.toward_zero.clone(),
            toward_neg_infinity: d.toward_neg_infinity.clone(),
        }),
        trajectory: outcome.trajectory,
    };
    let text = print_result(&result);
    match out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, text) {
                say!(io.err, "error: cannot write {}: {e}", path.display());
                return EXIT_IO;
            }
        }
        None => {
            let _ = io.out.write_all(text.as_bytes());
        }
    }
    if result.converged {
        say!(
            io.err,
            "{}: converged after {} iterations, residual {:e}",
            result.method,
            result.iterations,
            result.residual.sup
        );
        EXIT_OK
    } else {
        say!(
            io.err,
            "{}: did not converge ({}) after {} iterations, residual {:e}",
            result.method,
            result.termination,
            result.iterations,
            result.residual.sup
        );
        if let Some(d) = &outcome.diagnosis {
            say!(io.err, "boundary diagnosis: {d}");
        }
        EXIT_FAILURE
    }
}

pub fn cmd_report(path: &Path, io: &mut Io) -> i32 {
    let text = match read(path, io) {
        Ok(t) => t,
        Err(code) => return code,
    };
    match verify_result(&text) {
        Ok(doc) => {
            let _ = io.out.write_all(render_report(&doc).as_bytes());
            EXIT_OK
        }
        Err(msg) => {
            say!(io.err, "{}: corrupt result file: {msg}", path.display());
            EXIT_IO
        }
    }
}

/// Parses a result document and checks that it is consistent with the
/// problem it embeds.
pub fn verify_result(text: &str) -> Result<ResultDoc, String> {
    let doc = parse_result(text)?;
    let expected = hash_doc(&doc.problem);
    if expected != doc.problem_hash {
        return Err(format!(
            "problem_hash {} does not match embedded problem ({expected})",
            doc.problem_hash
        ));
    }
    let problem = validate_doc(doc.problem.clone()).map_err(|diags| {
        let shown: Vec<String> = diags.iter().map(ToString::to_string).collect();
        format!("embedded problem is invalid: {}", shown.join("; "))
    })?;
    let n = problem.pattern.face_count();
    let m = problem.pattern.complex().edge_count();
    for (what, len, want) in [
        ("u", doc.u.len(), n),
        ("r", doc.r.len(), n),
        ("K", doc.curvature.len(), n),
        ("target", doc.target.len(), n),
        ("beta", doc.beta.len(), m),
        ("lengths", doc.lengths.len(), m),
    ] {
        if len != want {
            return Err(format!("{what} has {len} entries, expected {want}"));
        }
    }
    if doc.target != problem.targets() {
        return Err("target differs from the embedded problem".into());
    }
    let k = problem
        .pattern
        .curvature(&doc.u)
        .map_err(|e| format!("u: {e}"))?;
    for (i, (a, b)) in k.iter().zip(&doc.curvature).enumerate() {
        if !((a - b).abs() <= CONSISTENCY_TOL) {
            return Err(format!("K[{i}] = {b} but recomputing from u gives {a}"));
        }
    }
    Ok(doc)
}

/// Deterministic plain-text summary. Wall time is omitted so that reports
/// of the same result compare equal.
pub fn render_report(doc: &ResultDoc) -> String {
    let mut s = String::new();
    let p = &doc.problem;
    let _ = writeln!(s, "problem_hash  {}", doc.problem_hash);
    let _ = writeln!(
        s,
        "pattern_type  ({e}, {e}, {})",
        p.pattern_type.delta,
        e = p.pattern_type.epsilon
    );
    let _ = writeln!(s, "faces         {}", p.faces.count);
    let _ = writeln!(s, "edges         {}", p.edges.len());
    let _ = writeln!(s, "method        {}", doc.method);
    let _ = writeln!(s, "converged     {}", doc.converged);
    let _ = writeln!(s, "termination   {}", doc.termination);
    let _ = writeln!(s, "iterations    {}", doc.iterations);
    let _ = writeln!(s, "residual_sup  {:.6e}", doc.residual.sup);
    let _ = writeln!(s, "residual_l2   {:.6e}", doc.residual.l2);
    if let Some(d) = &doc.diagnosis {
        let _ = writeln!(s, "toward_zero   {:?}", d.toward_zero);
        let _ = writeln!(s, "toward_-inf   {:?}", d.toward_neg_infinity);
    }
    let _ = writeln!(s);
    let _ = writeln!(s, "face u r K target");
    for i in 0..doc.u.len() {
        let _ = writeln!(
            s,
            "{i} {:.12e} {:.12e} {:.12e} {:.12e}",
            doc.u[i], doc.r[i], doc.curvature[i], doc.target[i]
        );
    }
    if let Some(traj) = &doc.trajectory {
        let _ = writeln!(s);
        let _ = writeln!(s, "t log_C");
        for sample in traj.iter().filter(|x| x.calabi_energy > 0.0) {
            let _ = writeln!(s, "{:.12e} {:.9e}", sample.t, sample.calabi_energy.ln());
        }
    }
    s
}
