//! Prescribed-curvature solvers: damped Newton on the Ricci energy, the
//! closed form for `(0, 0, delta)`, and the combinatorial Ricci and Calabi
//! flows integrated in `u`.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::curvature::{
    calabi_energy_unchecked, check_admissible, LaplaceMatrix, Pattern, RadiusState,
};
use crate::error::{Error, Result};
use crate::geometry::PatternType;
use crate::linalg::{conjugate_gradient, dot, norm_l2, norm_sup, Cholesky};

/// Above this size the Newton system is solved by conjugate gradients on
/// the sparse operator instead of a dense Cholesky factorization.
pub const DENSE_LIMIT: usize = 64;

/// Coordinates beyond these magnitudes are treated as having reached the
/// boundary of the admissible space.
pub const BOUNDARY_FAR: f64 = 1e15;
pub const BOUNDARY_NEAR: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Sup-norm tolerance on `K - K_hat`.
    pub tol_residual: f64,
    pub max_iter: usize,
    /// Step shrink factor of the backtracking line search.
    pub backtrack: f64,
    /// Armijo sufficient-decrease constant.
    pub armijo: f64,
    /// When the full Newton step would reach `u = 0`, the fraction of the
    /// way to the boundary taken instead.
    pub domain_margin: f64,
    pub max_backtracks: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol_residual: 1e-10,
            max_iter: 100,
            backtrack: 0.5,
            armijo: 1e-4,
            domain_margin: 0.9,
            max_backtracks: 60,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol_residual > 0.0) {
            return Err(Error::InvalidOption {
                name: "tol_residual",
                reason: "must be positive",
            });
        }
        for (name, v) in [
            ("backtrack", self.backtrack),
            ("armijo", self.armijo),
            ("domain_margin", self.domain_margin),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidOption {
                    name,
                    reason: "must lie in (0, 1)",
                });
            }
        }
        Ok(())
    }
}

/// Faces whose coordinates are running off the admissible space.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BoundaryDiagnosis {
    /// Still increasing and within a tenth of `min(|u0_i|, 1)` of `u = 0`.
    pub toward_zero: Vec<usize>,
    /// Still decreasing and beyond ten times `max(|u0_i|, 1)`.
    pub toward_neg_infinity: Vec<usize>,
}

impl BoundaryDiagnosis {
    /// `velocity` is the last direction of motion of each coordinate.
    pub fn assess(start: &[f64], end: &[f64], velocity: &[f64]) -> Self {
        let mut out = Self::default();
        for (i, ((&u0, &u), &v)) in start.iter().zip(end).zip(velocity).enumerate() {
            let scale = u0.abs();
            if u <= -BOUNDARY_FAR || (v < 0.0 && u < -10.0 * scale.max(1.0)) {
                out.toward_neg_infinity.push(i);
            } else if u >= -BOUNDARY_NEAR || (v > 0.0 && u > -0.1 * scale.min(1.0)) {
                out.toward_zero.push(i);
            }
        }
        out
    }

    pub fn is_empty(&self) -> bool {
        self.toward_zero.is_empty() && self.toward_neg_infinity.is_empty()
    }
}

impl fmt::Display for BoundaryDiagnosis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "no coordinate is near the boundary");
        }
        if !self.toward_neg_infinity.is_empty() {
            write!(
                f,
                "faces {:?} drifting to u = -inf",
                self.toward_neg_infinity
            )?;
            if !self.toward_zero.is_empty() {
                write!(f, "; ")?;
            }
        }
        if !self.toward_zero.is_empty() {
            write!(f, "faces {:?} approaching u = 0", self.toward_zero)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureReason {
    MaxIterations,
    LineSearch,
    ReachedBoundary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NonConvergence {
    pub reason: FailureReason,
    pub iterations: usize,
    pub residual_sup: f64,
    /// Last accepted iterate.
    pub u: Vec<f64>,
    pub diagnosis: BoundaryDiagnosis,
}

impl fmt::Display for NonConvergence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let why = match self.reason {
            FailureReason::MaxIterations => "iteration limit reached",
            FailureReason::LineSearch => "line search failed",
            FailureReason::ReachedBoundary => {
                "iterate reached the boundary of the admissible space"
            }
        };
        write!(
            f,
            "no convergence after {} iterations ({why}), residual {:e}; {}",
            self.iterations, self.residual_sup, self.diagnosis
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonSolution {
    pub u: RadiusState,
    pub iterations: usize,
    pub residual_sup: f64,
    pub residual_l2: f64,
    /// Iterations where the Newton system could not be solved and a
    /// gradient step was taken instead.
    pub gradient_steps: usize,
}

fn check_target(pattern: &Pattern, khat: &[f64]) -> Result<()> {
    if khat.len() != pattern.face_count() {
        return Err(Error::LengthMismatch {
            what: "target curvature",
            expected: pattern.face_count(),
            got: khat.len(),
        });
    }
    match khat.iter().position(|&k| !(k > 0.0 && k.is_finite())) {
        Some(face) => Err(Error::NonPositiveTarget {
            face,
            value: khat[face],
        }),
        None => Ok(()),
    }
}

/// Exact solution `u_i = -K_hat_i / S_i` for `(0, 0, delta)` patterns.
pub fn closed_form_solve_00d(pattern: &Pattern, khat: &[f64]) -> Result<RadiusState> {
    check_target(pattern, khat)?;
    let sums = pattern.s_sums().ok_or(Error::UnsupportedType {
        epsilon: pattern.kind().epsilon(),
        delta: pattern.kind().delta().value(),
    })?;
    RadiusState::new(khat.iter().zip(&sums).map(|(k, s)| -k / s).collect())
}

/// Newton's method from `u = (-1, ..., -1)`.
pub fn solve_newton(
    pattern: &Pattern,
    khat: &[f64],
    opts: &SolveOptions,
) -> Result<NewtonSolution> {
    let start = RadiusState::uniform(pattern.face_count(), -1.0)?;
    solve_newton_from(pattern, khat, &start, opts)
}

/// Damped Newton iteration for `K(u) = K_hat`.
///
/// Each step solves `-Laplace d = K - K_hat`, i.e. the Newton system of
/// the Ricci energy, then backtracks on `||K - K_hat||^2` with an Armijo
/// test. A step that would leave the admissible space is first cut to
/// `domain_margin` of the distance to `u = 0`.
pub fn solve_newton_from(
    pattern: &Pattern,
    khat: &[f64],
    start: &RadiusState,
    opts: &SolveOptions,
) -> Result<NewtonSolution> {
    opts.validate()?;
    check_target(pattern, khat)?;
    if start.len() != pattern.face_count() {
        return Err(Error::LengthMismatch {
            what: "initial u",
            expected: pattern.face_count(),
            got: start.len(),
        });
    }

    let n = pattern.face_count();
    let mut u = start.as_slice().to_vec();
    let mut residual = residual_at(pattern, &u, khat);
    let mut merit = 0.5 * dot(&residual, &residual);
    let mut last_step = vec![0.0; n];
    let mut gradient_steps = 0;

    let fail = |reason, iterations, u: &[f64], residual: &[f64], step: &[f64]| {
        Err(Error::NonConvergence(alloc::boxed::Box::new(
            NonConvergence {
                reason,
                iterations,
                residual_sup: norm_sup(residual),
                u: u.to_vec(),
                diagnosis: BoundaryDiagnosis::assess(start.as_slice(), u, step),
            },
        )))
    };

    for iter in 0..=opts.max_iter {
        let sup = norm_sup(&residual);
        log::debug!("newton iter {iter}: residual {sup:e}");
        if sup <= opts.tol_residual {
            return Ok(NewtonSolution {
                u: RadiusState::new(u)?,
                iterations: iter,
                residual_sup: sup,
                residual_l2: norm_l2(&residual),
                gradient_steps,
            });
        }
        if iter == opts.max_iter {
            break;
        }

        let lap = pattern.laplacian_unchecked(&u);
        let lap_r = lap.mul_vec(&residual);
        let direction = match newton_direction(&lap, &residual) {
            Some(d) => d,
            None => {
                gradient_steps += 1;
                let scale = lap.diagonal().iter().fold(0.0f64, |m, d| m.max(d.abs()));
                residual.iter().map(|r| r / scale.max(1.0)).collect()
            }
        };
        // d(merit)/d(alpha) at alpha = 0 is (Laplace r) . d
        let slope = dot(&lap_r, &direction);
        if !(slope < 0.0) {
            return fail(FailureReason::LineSearch, iter, &u, &residual, &direction);
        }

        // only a step that would reach u = 0 is cut back, to a fraction
        // of the way there
        let to_boundary = u
            .iter()
            .zip(&direction)
            .filter(|(_, d)| **d > 0.0)
            .fold(f64::INFINITY, |m, (u, d)| m.min(-u / d));
        let mut alpha = if to_boundary > 1.0 {
            1.0
        } else {
            opts.domain_margin * to_boundary
        };

        let mut accepted = None;
        let mut trial = vec![0.0; n];
        for _ in 0..opts.max_backtracks {
            for ((t, ui), di) in trial.iter_mut().zip(&u).zip(&direction) {
                *t = ui + alpha * di;
            }
            if check_admissible(&trial).is_ok() {
                let r = residual_at(pattern, &trial, khat);
                let m = 0.5 * dot(&r, &r);
                if m.is_finite() && m <= merit + opts.armijo * alpha * slope {
                    accepted = Some((r, m));
                    break;
                }
            }
            alpha *= opts.backtrack;
        }
        let Some((r, m)) = accepted else {
            return fail(FailureReason::LineSearch, iter, &u, &residual, &direction);
        };
        for (l, d) in last_step.iter_mut().zip(&direction) {
            *l = alpha * d;
        }
        u.copy_from_slice(&trial);
        residual = r;
        merit = m;

        if u.iter().any(|&x| x <= -BOUNDARY_FAR || x >= -BOUNDARY_NEAR) {
            return fail(
                FailureReason::ReachedBoundary,
                iter + 1,
                &u,
                &residual,
                &last_step,
            );
        }
    }
    fail(
        FailureReason::MaxIterations,
        opts.max_iter,
        &u,
        &residual,
        &last_step,
    )
}

fn residual_at(pattern: &Pattern, u: &[f64], khat: &[f64]) -> Vec<f64> {
    pattern
        .curvature_unchecked(u)
        .iter()
        .zip(khat)
        .map(|(k, t)| k - t)
        .collect()
}

/// Solves `(-Laplace) d = residual`; `None` when `-Laplace` is not
/// numerically positive definite.
fn newton_direction(lap: &LaplaceMatrix, residual: &[f64]) -> Option<Vec<f64>> {
    let d = if lap.dim() <= DENSE_LIMIT {
        Cholesky::factor(&lap.to_dense().scaled(-1.0))?.solve(residual)
    } else {
        conjugate_gradient(
            |x| lap.mul_vec(x).into_iter().map(|v| -v).collect(),
            residual,
            1e-14,
            10 * lap.dim(),
        )?
    };
    d.iter().all(|x| x.is_finite()).then_some(d)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowMethod {
    /// `du/dt = K - K_hat`
    Ricci,
    /// `du/dt = -Laplace (K - K_hat)`
    Calabi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Integrator {
    Rk4,
    Euler,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowOptions {
    pub method: FlowMethod,
    pub integrator: Integrator,
    /// Initial step; halved whenever a step leaves the admissible space or
    /// increases either energy.
    pub dt: f64,
    pub t_max: f64,
    pub tol_residual: f64,
    /// Record every `sample_every`-th accepted step.
    pub sample_every: usize,
    pub min_dt: f64,
}

impl Default for FlowOptions {
    fn default() -> Self {
        Self {
            method: FlowMethod::Ricci,
            integrator: Integrator::Rk4,
            dt: 0.1,
            t_max: 100.0,
            tol_residual: 1e-10,
            sample_every: 1,
            min_dt: 1e-12,
        }
    }
}

impl FlowOptions {
    pub fn validate(&self) -> Result<()> {
        let checks = [
            ("dt", self.dt > 0.0 && self.dt.is_finite()),
            ("t_max", self.t_max > 0.0 && self.t_max.is_finite()),
            ("tol_residual", self.tol_residual > 0.0),
            ("min_dt", self.min_dt > 0.0),
        ];
        for (name, ok) in checks {
            if !ok {
                return Err(Error::InvalidOption {
                    name,
                    reason: "must be positive and finite",
                });
            }
        }
        if self.sample_every == 0 {
            return Err(Error::InvalidOption {
                name: "sample_every",
                reason: "must be at least 1",
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowSample {
    pub t: f64,
    pub u: Vec<f64>,
    pub curvature: Vec<f64>,
    pub ricci_energy: f64,
    pub calabi_energy: f64,
    pub residual_sup: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Converged,
    TimeLimit,
    StepUnderflow,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<FlowSample>,
    pub termination: Termination,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    /// Present unless the flow converged.
    pub diagnosis: Option<BoundaryDiagnosis>,
}

impl Trajectory {
    pub fn converged(&self) -> bool {
        self.termination == Termination::Converged
    }

    pub fn last(&self) -> &FlowSample {
        self.samples
            .last()
            .expect("trajectory always holds the initial sample")
    }

    pub fn final_state(&self) -> RadiusState {
        RadiusState::new(self.last().u.clone()).expect("flow states are admissible")
    }

    /// Least-squares slope of `ln C` against `t` over the samples in the
    /// last decade of decay (`C <= 10 C_final`), or over the last three
    /// positive samples if that decade holds fewer.
    pub fn fitted_log_calabi_slope(&self) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self
            .samples
            .iter()
            .filter(|s| s.calabi_energy > 0.0)
            .map(|s| (s.t, libm::log(s.calabi_energy)))
            .collect();
        let &(_, last) = pts.last()?;
        let cut = last + libm::log(10.0);
        let start = pts.iter().position(|&(_, c)| c <= cut).unwrap_or(pts.len());
        let start = start.min(pts.len().saturating_sub(3));
        linear_fit_slope(&pts[start..])
    }
}

fn linear_fit_slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt) * (p.0 - mt)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

pub fn ricci_flow(
    pattern: &Pattern,
    khat: &[f64],
    start: &RadiusState,
    opts: &FlowOptions,
) -> Result<Trajectory> {
    run_flow(
        pattern,
        khat,
        start,
        &FlowOptions {
            method: FlowMethod::Ricci,
            ..*opts
        },
    )
}

pub fn calabi_flow(
    pattern: &Pattern,
    khat: &[f64],
    start: &RadiusState,
    opts: &FlowOptions,
) -> Result<Trajectory> {
    run_flow(
        pattern,
        khat,
        start,
        &FlowOptions {
            method: FlowMethod::Calabi,
            ..*opts
        },
    )
}

/// Per-step slack on the energy monotonicity test.
const MONOTONE_TOL: f64 = 1e-12;

/// Fraction of the first-order decrease `h |du/dt|^2` of the flow's own
/// energy that an accepted step must realize. Without it a step size at
/// the stability limit of a stiff mode can oscillate forever while the
/// energy stays flat.
const SUFFICIENT_DECREASE: f64 = 0.1;

struct FlowState {
    u: Vec<f64>,
    curvature: Vec<f64>,
    ricci: f64,
    calabi: f64,
}

/// Integrates the flow selected by `opts.method` until the residual drops
/// below `opts.tol_residual`, `t_max` is reached, or the step underflows.
pub fn run_flow(
    pattern: &Pattern,
    khat: &[f64],
    start: &RadiusState,
    opts: &FlowOptions,
) -> Result<Trajectory> {
    opts.validate()?;
    if khat.len() != pattern.face_count() {
        return Err(Error::LengthMismatch {
            what: "target curvature",
            expected: pattern.face_count(),
            got: khat.len(),
        });
    }
    let u0 = start.as_slice();
    let k0 = pattern.curvature(u0)?;
    let mut state = FlowState {
        u: u0.to_vec(),
        calabi: calabi_energy_unchecked(&k0, khat),
        ricci: pattern.ricci_energy(u0, khat)?,
        curvature: k0,
    };

    let rhs = |u: &[f64]| -> Option<Vec<f64>> {
        check_admissible(u).ok()?;
        let k = pattern.curvature_unchecked(u);
        let r: Vec<f64> = k.iter().zip(khat).map(|(k, t)| k - t).collect();
        let v = match opts.method {
            FlowMethod::Ricci => r,
            FlowMethod::Calabi => pattern
                .laplacian_unchecked(u)
                .mul_vec(&r)
                .into_iter()
                .map(|x| -x)
                .collect(),
        };
        v.iter().all(|x| x.is_finite()).then_some(v)
    };

    let mut t = 0.0;
    let mut dt = opts.dt;
    let mut samples = vec![sample(0.0, &state, khat)];
    let mut accepted = 0usize;
    let mut rejected = 0usize;
    let mut velocity = vec![0.0; u0.len()];

    let termination = loop {
        if norm_sup_residual(&state.curvature, khat) <= opts.tol_residual {
            break Termination::Converged;
        }
        if t >= opts.t_max * (1.0 - 1e-15) {
            break Termination::TimeLimit;
        }
        if dt < opts.min_dt {
            break Termination::StepUnderflow;
        }
        let h = dt.min(opts.t_max - t);
        let next = step(&rhs, &state.u, h, opts.integrator)
            .and_then(|proposal| evaluate(pattern, khat, opts.method, &state, proposal, h));
        match next {
            Some((next, v)) => {
                accepted += 1;
                t = if h == opts.t_max - t {
                    opts.t_max
                } else {
                    t + h
                };
                velocity = v;
                state = next;
                if accepted.is_multiple_of(opts.sample_every) {
                    samples.push(sample(t, &state, khat));
                }
            }
            None => {
                rejected += 1;
                dt *= 0.5;
                log::debug!("flow step rejected at t = {t}, dt -> {dt:e}");
            }
        }
    };
    if samples.last().map(|s| s.t) != Some(t) {
        samples.push(sample(t, &state, khat));
    }
    let diagnosis = (termination != Termination::Converged)
        .then(|| BoundaryDiagnosis::assess(u0, &state.u, &velocity));
    Ok(Trajectory {
        samples,
        termination,
        accepted_steps: accepted,
        rejected_steps: rejected,
        diagnosis,
    })
}

fn norm_sup_residual(k: &[f64], khat: &[f64]) -> f64 {
    k.iter()
        .zip(khat)
        .fold(0.0, |m, (k, t)| m.max((k - t).abs()))
}

fn sample(t: f64, state: &FlowState, khat: &[f64]) -> FlowSample {
    FlowSample {
        t,
        u: state.u.clone(),
        curvature: state.curvature.clone(),
        ricci_energy: state.ricci,
        calabi_energy: state.calabi,
        residual_sup: norm_sup_residual(&state.curvature, khat),
    }
}

/// One integrator step; also returns `|du/dt|^2` at the start point.
fn step<F>(rhs: &F, u: &[f64], h: f64, integrator: Integrator) -> Option<(Vec<f64>, f64)>
where
    F: Fn(&[f64]) -> Option<Vec<f64>>,
{
    let axpy =
        |k: &[f64], a: f64| -> Vec<f64> { u.iter().zip(k).map(|(x, d)| x + a * d).collect() };
    let k1 = rhs(u)?;
    let speed = dot(&k1, &k1);
    let next = match integrator {
        Integrator::Euler => axpy(&k1, h),
        Integrator::Rk4 => {
            let k2 = rhs(&axpy(&k1, 0.5 * h))?;
            let k3 = rhs(&axpy(&k2, 0.5 * h))?;
            let k4 = rhs(&axpy(&k3, h))?;
            (0..u.len())
                .map(|i| u[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
                .collect()
        }
    };
    Some((next, speed))
}

/// Accepts the proposed point if it is admissible, neither energy
/// increases beyond [`MONOTONE_TOL`], and the energy the flow descends
/// (Ricci energy for the Ricci flow, `C` for the Calabi flow) drops by at
/// least [`SUFFICIENT_DECREASE`] of `h * speed`. Returns the new state and
/// the displacement.
fn evaluate(
    pattern: &Pattern,
    khat: &[f64],
    method: FlowMethod,
    prev: &FlowState,
    (u, speed): (Vec<f64>, f64),
    h: f64,
) -> Option<(FlowState, Vec<f64>)> {
    check_admissible(&u).ok()?;
    let required = SUFFICIENT_DECREASE * h * speed;
    let curvature = pattern.curvature_unchecked(&u);
    let calabi = calabi_energy_unchecked(&curvature, khat);
    let calabi_drop = if method == FlowMethod::Calabi {
        required
    } else {
        0.0
    };
    if !calabi.is_finite()
        || calabi > prev.calabi - calabi_drop + MONOTONE_TOL * (1.0 + prev.calabi)
    {
        return None;
    }
    let ricci = match pattern.kind() {
        PatternType::ZeroZero(_) => pattern.ricci_energy(&u, khat).ok()?,
        PatternType::OneOneZero => {
            let tol = 1e-3 * MONOTONE_TOL * (1.0 + prev.ricci.abs());
            prev.ricci + pattern.ricci_energy_increment(&prev.u, &u, khat, tol)
        }
    };
    let ricci_drop = if method == FlowMethod::Ricci {
        required
    } else {
        0.0
    };
    if !ricci.is_finite()
        || ricci > prev.ricci - ricci_drop + MONOTONE_TOL * (1.0 + prev.ricci.abs())
    {
        return None;
    }
    let displacement = u.iter().zip(&prev.u).map(|(a, b)| a - b).collect();
    Some((
        FlowState {
            u,
            curvature,
            ricci,
            calabi,
        },
        displacement,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::builtin_torus_grid;
    use crate::geometry::Delta;
    use core::f64::consts::PI;

    fn torus(kind: PatternType, theta: f64) -> Pattern {
        Pattern::uniform(builtin_torus_grid(2, 2), kind, theta).unwrap()
    }

    #[test]
    fn newton_00d_closed_form_in_one_step() {
        let p = torus(PatternType::ZeroZero(Delta::Cusp), 1.0);
        let sol = solve_newton(&p, &[2.0 * PI; 4], &SolveOptions::default()).unwrap();
        assert_eq!(sol.iterations, 1);
        for u in sol.u.as_slice() {
            assert!((u + PI / 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn newton_symmetric_110() {
        let p = torus(PatternType::OneOneZero, 1.0);
        let sol = solve_newton_from(
            &p,
            &[2.0 * PI; 4],
            &RadiusState::uniform(4, -0.3).unwrap(),
            &SolveOptions::default(),
        )
        .unwrap();
        for u in sol.u.as_slice() {
            assert!((u + 1.0).abs() < 1e-9);
        }
        assert!(sol.residual_sup <= 1e-10);
    }

    #[test]
    fn newton_asymmetric_target_agrees_with_flow() {
        let p = torus(PatternType::OneOneZero, 1.0);
        let khat = [PI, 2.0 * PI, 2.0 * PI, 3.0 * PI];
        let sol = solve_newton(&p, &khat, &SolveOptions::default()).unwrap();
        assert!(sol.residual_sup <= 1e-10);
        let opts = FlowOptions {
            tol_residual: 1e-10,
            t_max: 200.0,
            ..FlowOptions::default()
        };
        let traj = ricci_flow(&p, &khat, &RadiusState::uniform(4, -1.0).unwrap(), &opts).unwrap();
        assert!(traj.converged());
        let uf = &traj.last().u;
        for (a, b) in uf.iter().zip(sol.u.as_slice()) {
            assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
    }

    #[test]
    fn closed_form_examples() {
        let p = torus(PatternType::ZeroZero(Delta::Cusp), 1.0);
        let u = closed_form_solve_00d(&p, &[2.0 * PI; 4]).unwrap();
        assert!(u.as_slice().iter().all(|x| (x + PI / 2.0).abs() < 1e-15));

        let one = Pattern::uniform(
            builtin_torus_grid(1, 1),
            PatternType::ZeroZero(Delta::Cone),
            PI / 2.0,
        )
        .unwrap();
        let u = closed_form_solve_00d(&one, &[4.0]).unwrap();
        assert!((u.as_slice()[0] + 1.0).abs() < 1e-15);

        let coth1 = 1.313_035_285_499_331_3;
        let flare = Pattern::uniform(
            builtin_torus_grid(1, 1),
            PatternType::ZeroZero(Delta::Flare),
            2.0,
        )
        .unwrap();
        let u = closed_form_solve_00d(&flare, &[4.0 * coth1]).unwrap();
        assert!((u.as_slice()[0] + 1.0).abs() < 1e-15);

        assert!(closed_form_solve_00d(&torus(PatternType::OneOneZero, 1.0), &[1.0; 4]).is_err());
        assert_eq!(
            closed_form_solve_00d(&p, &[1.0, 0.0, 1.0, 1.0]),
            Err(Error::NonPositiveTarget {
                face: 1,
                value: 0.0
            })
        );
    }

    #[test]
    fn newton_reports_boundary_on_infeasible_target() {
        let p = torus(PatternType::OneOneZero, 1.0);
        let err = solve_newton(&p, &[4.0 * PI + 0.5; 4], &SolveOptions::default()).unwrap_err();
        let Error::NonConvergence(nc) = err else {
            panic!("expected non-convergence, got {err:?}");
        };
        assert_eq!(nc.diagnosis.toward_neg_infinity, vec![0, 1, 2, 3]);
        assert!(nc.diagnosis.toward_zero.is_empty());
    }

    #[test]
    fn flow_at_equilibrium_stays_put() {
        let p = torus(PatternType::OneOneZero, 1.0);
        for method in [FlowMethod::Ricci, FlowMethod::Calabi] {
            let opts = FlowOptions {
                method,
                ..FlowOptions::default()
            };
            let traj = run_flow(
                &p,
                &[2.0 * PI; 4],
                &RadiusState::uniform(4, -1.0).unwrap(),
                &opts,
            )
            .unwrap();
            assert!(traj.converged());
            assert_eq!(traj.samples.len(), 1);
            assert_eq!(traj.last().t, 0.0);
        }
    }

    #[test]
    fn ricci_flow_linear_ode_00d() {
        // single face, four incidences with s = 1: du/dt = -4u - K_hat
        let p = Pattern::uniform(
            builtin_torus_grid(1, 1),
            PatternType::ZeroZero(Delta::Cusp),
            1.0,
        )
        .unwrap();
        let khat = 2.0 * PI;
        let u0 = -1.0;
        let opts = FlowOptions {
            dt: 0.01,
            t_max: 1.0,
            tol_residual: 1e-300,
            ..FlowOptions::default()
        };
        let traj = ricci_flow(&p, &[khat], &RadiusState::new(vec![u0]).unwrap(), &opts).unwrap();
        assert_eq!(traj.termination, Termination::TimeLimit);
        assert_eq!(traj.last().t, 1.0);
        let exact = (u0 + khat / 4.0) * libm::exp(-4.0) - khat / 4.0;
        assert!((traj.last().u[0] - exact).abs() < 1e-8);
    }

    #[test]
    fn calabi_flow_linear_ode_00d() {
        // torus 2x2, theta = 1: du/dt = -Laplace (K - K_hat) = 4(-4u - K_hat)
        let p = torus(PatternType::ZeroZero(Delta::Cusp), 1.0);
        let khat = 2.0 * PI;
        let u0 = -0.5;
        let opts = FlowOptions {
            method: FlowMethod::Calabi,
            dt: 0.01,
            t_max: 1.0,
            tol_residual: 1e-300,
            ..FlowOptions::default()
        };
        let traj = run_flow(&p, &[khat; 4], &RadiusState::uniform(4, u0).unwrap(), &opts).unwrap();
        let exact = (u0 + khat / 4.0) * libm::exp(-16.0) - khat / 4.0;
        for u in &traj.last().u {
            assert!((u - exact).abs() < 1e-8);
        }
    }

    #[test]
    fn euler_agrees_with_rk4_roughly() {
        let p = torus(PatternType::OneOneZero, 1.0);
        let start = RadiusState::uniform(4, -0.5).unwrap();
        let base = FlowOptions {
            dt: 0.01,
            tol_residual: 1e-9,
            ..FlowOptions::default()
        };
        let rk = ricci_flow(&p, &[2.0 * PI; 4], &start, &base).unwrap();
        let eu = ricci_flow(
            &p,
            &[2.0 * PI; 4],
            &start,
            &FlowOptions {
                integrator: Integrator::Euler,
                ..base
            },
        )
        .unwrap();
        assert!(rk.converged() && eu.converged());
        for (a, b) in rk.last().u.iter().zip(&eu.last().u) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn flows_are_monotone_and_admissible() {
        let p = torus(PatternType::OneOneZero, 1.0);
        let khat = [PI, 2.0 * PI, 2.0 * PI, 3.0 * PI];
        for method in [FlowMethod::Ricci, FlowMethod::Calabi] {
            let opts = FlowOptions {
                method,
                tol_residual: 1e-9,
                ..FlowOptions::default()
            };
            let traj = run_flow(&p, &khat, &RadiusState::uniform(4, -0.4).unwrap(), &opts).unwrap();
            assert!(traj.converged(), "{method:?}");
            for w in traj.samples.windows(2) {
                assert!(w[1].t > w[0].t);
                assert!(
                    w[1].ricci_energy
                        <= w[0].ricci_energy + 1e-12 * (1.0 + w[0].ricci_energy.abs())
                );
                assert!(
                    w[1].calabi_energy <= w[0].calabi_energy + 1e-12 * (1.0 + w[0].calabi_energy)
                );
                assert!(w[1].u.iter().all(|&x| x < 0.0));
            }
        }
    }

    #[test]
    fn accumulated_ricci_energy_matches_direct_evaluation() {
        let p = torus(PatternType::OneOneZero, 0.7);
        let khat = [5.0, 6.0, 7.0, 4.0];
        let opts = FlowOptions {
            tol_residual: 1e-9,
            ..FlowOptions::default()
        };
        let traj = ricci_flow(&p, &khat, &RadiusState::uniform(4, -2.0).unwrap(), &opts).unwrap();
        let last = traj.last();
        let direct = p.ricci_energy(&last.u, &khat).unwrap();
        assert!(
            (last.ricci_energy - direct).abs() < 1e-7,
            "{} vs {direct}",
            last.ricci_energy
        );
    }

    #[test]
    fn invalid_options_are_rejected() {
        let p = torus(PatternType::OneOneZero, 1.0);
        let start = RadiusState::uniform(4, -1.0).unwrap();
        let bad = FlowOptions {
            dt: 0.0,
            ..FlowOptions::default()
        };
        assert!(matches!(
            run_flow(&p, &[1.0; 4], &start, &bad),
            Err(Error::InvalidOption { name: "dt", .. })
        ));
        let bad = SolveOptions {
            backtrack: 1.0,
            ..SolveOptions::default()
        };
        assert!(solve_newton(&p, &[1.0; 4], &bad).is_err());
    }

    #[test]
    fn slope_fit() {
        assert_eq!(
            linear_fit_slope(&[(0.0, 1.0), (1.0, 3.0), (2.0, 5.0)]),
            Some(2.0)
        );
        assert_eq!(linear_fit_slope(&[(0.0, 1.0)]), None);
    }
}
