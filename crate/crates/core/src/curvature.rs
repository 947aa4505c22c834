//! Curvature assembly, the discrete Laplace operator, and the Ricci and
//! Calabi energies.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::complex::PatternComplex;
use crate::error::{Error, Result};
use crate::geometry::{
    edge_geometry_unchecked, partials_110_unchecked, radius_from_u, s_factor_unchecked,
    u_from_radius, EdgeGeometry, PatternType,
};
use crate::linalg::{norm_l2, norm_sup, DenseMatrix};
use crate::quadrature;

/// Absolute tolerance of the line integral behind [`Pattern::ricci_energy`].
pub const ENERGY_QUADRATURE_TOL: f64 = 1e-9;

/// Reference point of the `(1, 1, 0)` Ricci energy: `u_ref = (-1, ..., -1)`.
pub const ENERGY_REFERENCE_U: f64 = -1.0;

/// A point of the admissible space `(-inf, 0)^|F|`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadiusState(Vec<f64>);

impl RadiusState {
    pub fn new(u: Vec<f64>) -> Result<Self> {
        check_admissible(&u)?;
        Ok(Self(u))
    }

    /// Converts generalized radii with `u_i = -2 exp(-r_i)`.
    pub fn from_radii(r: &[f64]) -> Result<Self> {
        Self::new(r.iter().map(|&r| u_from_radius(r)).collect())
    }

    pub fn uniform(face_count: usize, u: f64) -> Result<Self> {
        Self::new(vec![u; face_count])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn radii(&self) -> Vec<f64> {
        self.0.iter().map(|&u| radius_from_u(u)).collect()
    }
}

pub(crate) fn check_admissible(u: &[f64]) -> Result<()> {
    match u.iter().position(|&v| !(v < 0.0 && v.is_finite())) {
        Some(face) => Err(Error::Inadmissible {
            face,
            value: u[face],
        }),
        None => Ok(()),
    }
}

/// `d K / d u`, symmetric, with nonzeros on the diagonal and on pairs of
/// faces that share an edge.
#[derive(Debug, Clone, PartialEq)]
pub struct LaplaceMatrix {
    diag: Vec<f64>,
    /// Entries `(i, j)` with `i < j`.
    upper: BTreeMap<(usize, usize), f64>,
}

impl LaplaceMatrix {
    fn zeros(n: usize) -> Self {
        Self {
            diag: vec![0.0; n],
            upper: BTreeMap::new(),
        }
    }

    fn add(&mut self, i: usize, j: usize, v: f64) {
        use core::cmp::Ordering;
        match i.cmp(&j) {
            Ordering::Equal => self.diag[i] += v,
            Ordering::Less => *self.upper.entry((i, j)).or_insert(0.0) += v,
            Ordering::Greater => *self.upper.entry((j, i)).or_insert(0.0) += v,
        }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            self.diag[i]
        } else {
            let key = if i < j { (i, j) } else { (j, i) };
            self.upper.get(&key).copied().unwrap_or(0.0)
        }
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diag
    }

    /// Off-diagonal entries `(i, j, value)` with `i < j`.
    pub fn off_diagonal(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.upper.iter().map(|(&(i, j), &v)| (i, j, v))
    }

    pub fn nnz(&self) -> usize {
        self.diag.len() + 2 * self.upper.len()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y: Vec<f64> = self.diag.iter().zip(x).map(|(d, x)| d * x).collect();
        for (&(i, j), &v) in &self.upper {
            y[i] += v * x[j];
            y[j] += v * x[i];
        }
        y
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.dim());
        for (i, &d) in self.diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        for (&(i, j), &v) in &self.upper {
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
        m
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureReport {
    /// `K_i = 2 * sum of beta over the incidences of face i`.
    pub curvature: Vec<f64>,
    /// Per edge, `[beta at face_a, beta at face_b]`.
    pub beta: Vec<[f64; 2]>,
    /// Generalized edge lengths.
    pub lengths: Vec<f64>,
    /// `K - K_hat`.
    pub residual: Vec<f64>,
    pub residual_sup: f64,
    pub residual_l2: f64,
}

/// A complex together with a pattern type and an admissible `theta` on
/// every edge.
#[derive(Debug, Clone, PartialEq)]
pub struct Pattern {
    complex: PatternComplex,
    kind: PatternType,
    theta: Vec<f64>,
}

impl Pattern {
    pub fn new(complex: PatternComplex, kind: PatternType, theta: Vec<f64>) -> Result<Self> {
        complex.ensure_valid()?;
        if theta.len() != complex.edge_count() {
            return Err(Error::LengthMismatch {
                what: "theta",
                expected: complex.edge_count(),
                got: theta.len(),
            });
        }
        for (edge, &t) in theta.iter().enumerate() {
            kind.check_theta(edge, t)?;
        }
        Ok(Self {
            complex,
            kind,
            theta,
        })
    }

    /// Same `theta` on every edge.
    pub fn uniform(complex: PatternComplex, kind: PatternType, theta: f64) -> Result<Self> {
        let n = complex.edge_count();
        Self::new(complex, kind, vec![theta; n])
    }

    pub fn complex(&self) -> &PatternComplex {
        &self.complex
    }

    pub fn kind(&self) -> PatternType {
        self.kind
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn face_count(&self) -> usize {
        self.complex.face_count()
    }

    fn check_u(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.face_count() {
            return Err(Error::LengthMismatch {
                what: "u",
                expected: self.face_count(),
                got: u.len(),
            });
        }
        check_admissible(u)
    }

    fn check_target(&self, khat: &[f64]) -> Result<()> {
        if khat.len() != self.face_count() {
            return Err(Error::LengthMismatch {
                what: "target curvature",
                expected: self.face_count(),
                got: khat.len(),
            });
        }
        Ok(())
    }

    fn edge_at(&self, edge: usize, u: &[f64]) -> EdgeGeometry {
        let e = self.complex.edges()[edge];
        edge_geometry_unchecked(self.kind, self.theta[edge], u[e.face_a], u[e.face_b])
    }

    /// Curvature vector `K(u)`. Edges are summed in ascending id order.
    pub fn curvature(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.check_u(u)?;
        Ok(self.curvature_unchecked(u))
    }

    pub(crate) fn curvature_unchecked(&self, u: &[f64]) -> Vec<f64> {
        let mut k = vec![0.0; self.face_count()];
        for e in self.complex.edges() {
            let (b1, b2) = match self.kind {
                PatternType::OneOneZero => crate::geometry::angles_110_unchecked(
                    self.theta[e.id],
                    u[e.face_a],
                    u[e.face_b],
                ),
                PatternType::ZeroZero(delta) => {
                    let s = s_factor_unchecked(delta, self.theta[e.id]);
                    (-0.5 * s * u[e.face_a], -0.5 * s * u[e.face_b])
                }
            };
            k[e.face_a] += 2.0 * b1;
            k[e.face_b] += 2.0 * b2;
        }
        k
    }

    pub fn report(&self, u: &[f64], khat: &[f64]) -> Result<CurvatureReport> {
        self.check_u(u)?;
        self.check_target(khat)?;
        let n_edges = self.complex.edge_count();
        let mut curvature = vec![0.0; self.face_count()];
        let mut beta = Vec::with_capacity(n_edges);
        let mut lengths = Vec::with_capacity(n_edges);
        for e in self.complex.edges() {
            let g = self.edge_at(e.id, u);
            curvature[e.face_a] += 2.0 * g.beta1;
            curvature[e.face_b] += 2.0 * g.beta2;
            beta.push([g.beta1, g.beta2]);
            lengths.push(g.length);
        }
        let residual: Vec<f64> = curvature.iter().zip(khat).map(|(k, t)| k - t).collect();
        Ok(CurvatureReport {
            residual_sup: norm_sup(&residual),
            residual_l2: norm_l2(&residual),
            curvature,
            beta,
            lengths,
            residual,
        })
    }

    /// The discrete Laplace operator `d K_i / d u_j`.
    pub fn laplacian(&self, u: &[f64]) -> Result<LaplaceMatrix> {
        self.check_u(u)?;
        Ok(self.laplacian_unchecked(u))
    }

    pub(crate) fn laplacian_unchecked(&self, u: &[f64]) -> LaplaceMatrix {
        let mut lap = LaplaceMatrix::zeros(self.face_count());
        for e in self.complex.edges() {
            let theta = self.theta[e.id];
            let m = match self.kind {
                PatternType::OneOneZero => partials_110_unchecked(theta, u[e.face_a], u[e.face_b]),
                PatternType::ZeroZero(delta) => {
                    let d = -0.5 * s_factor_unchecked(delta, theta);
                    [[d, 0.0], [0.0, d]]
                }
            };
            let (a, b) = (e.face_a, e.face_b);
            lap.add(a, a, 2.0 * m[0][0]);
            lap.add(a, b, 2.0 * m[0][1]);
            if a != b {
                // the (b, a) entry is the same stored value; symmetry of m
                // makes m[1][0] redundant
                lap.add(b, b, 2.0 * m[1][1]);
            } else {
                lap.add(a, a, 2.0 * (m[1][0] + m[1][1]));
            }
        }
        lap
    }

    /// `K_hat - K(u)`, the gradient of the Ricci energy.
    pub fn ricci_energy_gradient(&self, u: &[f64], khat: &[f64]) -> Result<Vec<f64>> {
        self.check_target(khat)?;
        let k = self.curvature(u)?;
        Ok(khat.iter().zip(&k).map(|(t, k)| t - k).collect())
    }

    /// Ricci energy `E(u) + sum K_hat_i u_i`.
    ///
    /// For `(0, 0, delta)` the per-edge potential is `s (u_a^2 + u_b^2) / 4`,
    /// counted twice. For `(1, 1, 0)` the value is a line integral of the
    /// gradient along the segment from `u_ref`, normalized so that the energy
    /// at `u_ref` equals `sum K_hat_i * u_ref`.
    pub fn ricci_energy(&self, u: &[f64], khat: &[f64]) -> Result<f64> {
        self.check_u(u)?;
        self.check_target(khat)?;
        let linear: f64 = khat.iter().zip(u).map(|(t, u)| t * u).sum();
        match self.kind {
            PatternType::ZeroZero(delta) => {
                let mut e = 0.0;
                for edge in self.complex.edges() {
                    let s = s_factor_unchecked(delta, self.theta[edge.id]);
                    let (ua, ub) = (u[edge.face_a], u[edge.face_b]);
                    e += 2.0 * 0.25 * s * (ua * ua + ub * ub);
                }
                Ok(e + linear)
            }
            PatternType::OneOneZero => {
                let start = vec![ENERGY_REFERENCE_U; self.face_count()];
                let at_start: f64 = khat.iter().map(|t| t * ENERGY_REFERENCE_U).sum();
                Ok(at_start + self.ricci_energy_increment(&start, u, khat, ENERGY_QUADRATURE_TOL))
            }
        }
    }

    /// `E~(to) - E~(from)` as the integral of `(K_hat - K) . du` along the
    /// straight segment. Both endpoints must be admissible.
    pub(crate) fn ricci_energy_increment(
        &self,
        from: &[f64],
        to: &[f64],
        khat: &[f64],
        abs_tol: f64,
    ) -> f64 {
        let delta: Vec<f64> = to.iter().zip(from).map(|(b, a)| b - a).collect();
        if delta.iter().all(|&d| d == 0.0) {
            return 0.0;
        }
        let mut point = vec![0.0; from.len()];
        quadrature::integrate(
            |s| {
                for ((p, a), d) in point.iter_mut().zip(from).zip(&delta) {
                    *p = a + s * d;
                }
                let k = self.curvature_unchecked(&point);
                khat.iter()
                    .zip(&k)
                    .zip(&delta)
                    .map(|((t, k), d)| (t - k) * d)
                    .sum()
            },
            0.0,
            1.0,
            abs_tol,
        )
    }

    /// For `(0, 0, delta)`: `sum of s(theta(e))` over the incidences of
    /// each face, so that `K_i = -S_i u_i`. `None` for `(1, 1, 0)`.
    pub fn s_sums(&self) -> Option<Vec<f64>> {
        let PatternType::ZeroZero(delta) = self.kind else {
            return None;
        };
        let mut sums = vec![0.0; self.face_count()];
        for e in self.complex.edges() {
            let s = s_factor_unchecked(delta, self.theta[e.id]);
            sums[e.face_a] += s;
            sums[e.face_b] += s;
        }
        Some(sums)
    }
}

/// Calabi energy `||K - K_hat||^2 / 2`.
pub fn calabi_energy(k: &[f64], khat: &[f64]) -> Result<f64> {
    if k.len() != khat.len() {
        return Err(Error::LengthMismatch {
            what: "target curvature",
            expected: k.len(),
            got: khat.len(),
        });
    }
    Ok(calabi_energy_unchecked(k, khat))
}

pub(crate) fn calabi_energy_unchecked(k: &[f64], khat: &[f64]) -> f64 {
    0.5 * k
        .iter()
        .zip(khat)
        .map(|(k, t)| (k - t) * (k - t))
        .sum::<f64>()
}
