//! Which target curvatures are attainable.
//!
//! For `(1, 1, 0)` a target `K_hat` is attainable iff every nonempty face
//! subset `F'` satisfies `sum_{F'} K_hat < 2 pi |E(F')|`, where `E(F')` is
//! the set of edges touching `F'`. For `(0, 0, delta)` positivity suffices.
//!
//! Floating point cannot decide strict inequalities at ties, so each check
//! reports one of three verdicts. A subset whose slack is within
//! [`band`] of zero makes the target [`Verdict::Marginal`], which callers
//! should treat as not attainable.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::complex::{FaceSubset, PatternComplex};
use crate::error::{Error, Result};

/// Largest complex accepted by [`check_exhaustive`].
pub const EXHAUSTIVE_LIMIT: usize = 24;

/// Relative size of the strictness perturbation, `2^-40`.
pub const PERTURBATION: f64 = 1.0 / (1u64 << 40) as f64;

/// Residual capacities below this fraction of the largest capacity are
/// treated as exhausted.
const RESIDUAL_EPS: f64 = 1.0 / (1u64 << 50) as f64;
/// Relative shortfall of the flow still counted as saturation.
const DEFICIT_TOL: f64 = 1.0 / (1u64 << 44) as f64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Feasible,
    /// Some subset is within the tolerance band of its bound.
    Marginal,
    Infeasible,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Positivity,
    Exhaustive,
    MaxFlow,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Witness {
    /// `lhs = sum of K_hat over faces`, `rhs = 2 pi |edges|`.
    Subset {
        faces: FaceSubset,
        edges: Vec<usize>,
        lhs: f64,
        rhs: f64,
    },
    NonPositive {
        face: usize,
        value: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityReport {
    pub verdict: Verdict,
    /// Present unless the verdict is `Feasible`; for subset checks it is
    /// the subset with the least slack found.
    pub witness: Option<Witness>,
    pub method: Method,
}

impl FeasibilityReport {
    pub fn is_feasible(&self) -> bool {
        self.verdict == Verdict::Feasible
    }
}

/// Width of the marginal band for `khat`:
/// `2^-40 (sum K_hat + |F| max K_hat)`, which bounds the total strictness
/// perturbation applied by [`check_maxflow`] to any subset.
pub fn band(khat: &[f64]) -> f64 {
    let max = khat.iter().fold(0.0f64, |m, k| m.max(k.abs()));
    let sum: f64 = khat.iter().map(|k| k.abs()).sum();
    PERTURBATION * (sum + khat.len() as f64 * max)
}

fn classify(lhs: f64, rhs: f64, band: f64) -> Verdict {
    let d = lhs - rhs;
    // differences at the rounding level of the sums count as ties
    let tie = 8.0 * f64::EPSILON * (lhs.abs() + rhs);
    if d > -tie {
        Verdict::Infeasible
    } else if d >= -band {
        Verdict::Marginal
    } else {
        Verdict::Feasible
    }
}

/// Feasible iff every entry is positive; otherwise the first offending
/// face is the witness.
pub fn check_positivity(khat: &[f64]) -> FeasibilityReport {
    let bad = khat.iter().position(|&k| !(k > 0.0));
    FeasibilityReport {
        verdict: if bad.is_some() {
            Verdict::Infeasible
        } else {
            Verdict::Feasible
        },
        witness: bad.map(|face| Witness::NonPositive {
            face,
            value: khat[face],
        }),
        method: Method::Positivity,
    }
}

fn check_len(complex: &PatternComplex, khat: &[f64]) -> Result<()> {
    if khat.len() != complex.face_count() {
        return Err(Error::LengthMismatch {
            what: "target curvature",
            expected: complex.face_count(),
            got: khat.len(),
        });
    }
    if let Some(e) = complex
        .edges()
        .iter()
        .find(|e| e.face_a >= khat.len() || e.face_b >= khat.len())
    {
        return Err(Error::FaceOutOfRange {
            face: e.face_a.max(e.face_b),
            face_count: khat.len(),
        });
    }
    Ok(())
}

fn subset_witness(complex: &PatternComplex, khat: &[f64], faces: FaceSubset) -> Result<Witness> {
    let edges: Vec<usize> = complex.edge_neighborhood(&faces)?.into_iter().collect();
    let lhs = faces.faces().iter().map(|&f| khat[f]).sum();
    let rhs = 2.0 * PI * edges.len() as f64;
    Ok(Witness::Subset {
        faces,
        edges,
        lhs,
        rhs,
    })
}

/// Enumerates all `2^|F| - 1` nonempty subsets. A non-positive entry is
/// reported as in [`check_positivity`]: such curvature is never attained.
pub fn check_exhaustive(complex: &PatternComplex, khat: &[f64]) -> Result<FeasibilityReport> {
    check_len(complex, khat)?;
    let n = complex.face_count();
    if n > EXHAUSTIVE_LIMIT {
        return Err(Error::TooManyFaces {
            face_count: n,
            limit: EXHAUSTIVE_LIMIT,
        });
    }
    if n == 0 {
        return Err(Error::EmptySubset);
    }
    let positivity = check_positivity(khat);
    if !positivity.is_feasible() {
        return Ok(FeasibilityReport {
            method: Method::Exhaustive,
            ..positivity
        });
    }
    let endpoint_masks: Vec<u64> = complex
        .edges()
        .iter()
        .map(|e| (1u64 << e.face_a) | (1u64 << e.face_b))
        .collect();

    let mut worst = (f64::NEG_INFINITY, 0u64, 0.0, 0.0);
    for mask in 1u64..(1u64 << n) {
        let mut lhs = 0.0;
        let mut bits = mask;
        while bits != 0 {
            lhs += khat[bits.trailing_zeros() as usize];
            bits &= bits - 1;
        }
        let touching = endpoint_masks.iter().filter(|&&m| m & mask != 0).count();
        let rhs = 2.0 * PI * touching as f64;
        if lhs - rhs > worst.0 {
            worst = (lhs - rhs, mask, lhs, rhs);
        }
    }
    let (_, mask, lhs, rhs) = worst;
    let verdict = classify(lhs, rhs, band(khat));
    let witness = match verdict {
        Verdict::Feasible => None,
        _ => Some(subset_witness(complex, khat, FaceSubset::from_mask(mask))?),
    };
    Ok(FeasibilityReport {
        verdict,
        witness,
        method: Method::Exhaustive,
    })
}

/// Decides the subset condition by a maximum flow.
///
/// The network is source -> face `i` (capacity `K_hat_i`) -> each edge
/// touching it (unbounded) -> sink (capacity `2 pi`). By Hall-type
/// duality the non-strict inequalities all hold iff the flow saturates the
/// source arcs. Strictness is tested by inflating the source capacities to
/// `K_hat_i (1 + 2^-40) + 2^-40 max K_hat`; if the inflated network still
/// saturates, the target is feasible. Otherwise the faces reachable from
/// the source in the residual network form the witness.
pub fn check_maxflow(complex: &PatternComplex, khat: &[f64]) -> Result<FeasibilityReport> {
    check_len(complex, khat)?;
    if complex.face_count() == 0 {
        return Err(Error::EmptySubset);
    }
    let positivity = check_positivity(khat);
    if !positivity.is_feasible() {
        return Ok(FeasibilityReport {
            method: Method::MaxFlow,
            ..positivity
        });
    }
    let max = khat.iter().fold(0.0f64, |m, &k| m.max(k));
    let caps: Vec<f64> = khat
        .iter()
        .map(|&k| k * (1.0 + PERTURBATION) + PERTURBATION * max)
        .collect();

    let n = complex.face_count();
    let m = complex.edge_count();
    let source = 0;
    let sink = n + m + 1;
    let mut net = Network::new(n + m + 2);
    for (i, &c) in caps.iter().enumerate() {
        net.add_arc(source, 1 + i, c);
    }
    for (j, e) in complex.edges().iter().enumerate() {
        net.add_arc(1 + e.face_a, 1 + n + j, f64::INFINITY);
        if !e.is_self_adjacent() {
            net.add_arc(1 + e.face_b, 1 + n + j, f64::INFINITY);
        }
        net.add_arc(1 + n + j, sink, 2.0 * PI);
    }

    let total: f64 = caps.iter().sum();
    let flow = net.max_flow(source, sink, RESIDUAL_EPS * max.max(2.0 * PI));
    let deficit_tol = DEFICIT_TOL * max;
    if flow >= total - deficit_tol {
        return Ok(FeasibilityReport {
            verdict: Verdict::Feasible,
            witness: None,
            method: Method::MaxFlow,
        });
    }

    let reach = net.reachable(source);
    let faces = FaceSubset::from_indices((0..n).filter(|&i| reach[1 + i]));
    let witness = subset_witness(complex, khat, faces)?;
    let Witness::Subset { lhs, rhs, .. } = witness else {
        unreachable!()
    };
    let verdict = match classify(lhs, rhs, band(khat)) {
        Verdict::Infeasible => Verdict::Infeasible,
        // the inflated network failed, so the target is within the band
        _ => Verdict::Marginal,
    };
    Ok(FeasibilityReport {
        verdict,
        witness: Some(witness),
        method: Method::MaxFlow,
    })
}

struct Arc {
    to: usize,
    cap: f64,
}

/// Residual network; arc `2k + 1` is the reverse of arc `2k`.
struct Network {
    arcs: Vec<Arc>,
    out: Vec<Vec<usize>>,
    eps: f64,
}

impl Network {
    fn new(nodes: usize) -> Self {
        Self {
            arcs: Vec::new(),
            out: vec![Vec::new(); nodes],
            eps: 0.0,
        }
    }

    fn add_arc(&mut self, from: usize, to: usize, cap: f64) {
        self.out[from].push(self.arcs.len());
        self.arcs.push(Arc { to, cap });
        self.out[to].push(self.arcs.len());
        self.arcs.push(Arc { to: from, cap: 0.0 });
    }

    /// Edmonds–Karp: augment along shortest paths, ignoring residual
    /// capacities at or below `eps`.
    fn max_flow(&mut self, s: usize, t: usize, eps: f64) -> f64 {
        self.eps = eps;
        let mut total = 0.0;
        loop {
            let mut pred = vec![usize::MAX; self.out.len()];
            let mut queue = VecDeque::from([s]);
            let mut seen = vec![false; self.out.len()];
            seen[s] = true;
            while let Some(v) = queue.pop_front() {
                if v == t {
                    break;
                }
                for &a in &self.out[v] {
                    let w = self.arcs[a].to;
                    if !seen[w] && self.arcs[a].cap > eps {
                        seen[w] = true;
                        pred[w] = a;
                        queue.push_back(w);
                    }
                }
            }
            if !seen[t] {
                return total;
            }
            let mut push = f64::INFINITY;
            let mut v = t;
            while v != s {
                let a = pred[v];
                push = push.min(self.arcs[a].cap);
                v = self.arcs[a ^ 1].to;
            }
            let mut v = t;
            while v != s {
                let a = pred[v];
                self.arcs[a].cap -= push;
                self.arcs[a ^ 1].cap += push;
                v = self.arcs[a ^ 1].to;
            }
            total += push;
        }
    }

    fn reachable(&self, s: usize) -> Vec<bool> {
        let mut seen = vec![false; self.out.len()];
        seen[s] = true;
        let mut stack = vec![s];
        while let Some(v) = stack.pop() {
            for &a in &self.out[v] {
                let w = self.arcs[a].to;
                if !seen[w] && self.arcs[a].cap > self.eps {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen
    }
}
