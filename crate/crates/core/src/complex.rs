//! Face–edge incidence structure of a cellular decomposed surface.
//!
//! Only the incidence between faces and edges is stored. Every edge is
//! shared by two faces `face_a` and `face_b`, which may coincide; such a
//! self-adjacent edge contributes two incidences to the same face.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Edge {
    pub id: usize,
    pub face_a: usize,
    pub face_b: usize,
}

impl Edge {
    pub fn new(id: usize, face_a: usize, face_b: usize) -> Self {
        Self { id, face_a, face_b }
    }

    pub fn is_self_adjacent(&self) -> bool {
        self.face_a == self.face_b
    }
}

/// Which side of an edge an incidence refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Slot {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Incidence {
    pub edge: usize,
    pub slot: Slot,
}

/// A broken invariant found by [`PatternComplex::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    NoFaces,
    FaceOutOfRange {
        edge: usize,
        face: usize,
        face_count: usize,
    },
    IsolatedFace {
        face: usize,
    },
    DuplicateEdgeId {
        id: usize,
    },
    EdgeIdOutOfRange {
        id: usize,
        edge_count: usize,
    },
    LabelCount {
        what: &'static str,
        expected: usize,
        got: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoFaces => write!(f, "complex has no faces"),
            Violation::FaceOutOfRange {
                edge,
                face,
                face_count,
            } => write!(
                f,
                "edge {edge} references face {face}, but the complex has {face_count} faces"
            ),
            Violation::IsolatedFace { face } => write!(f, "face {face} has no edge incidences"),
            Violation::DuplicateEdgeId { id } => write!(f, "edge id {id} is used more than once"),
            Violation::EdgeIdOutOfRange { id, edge_count } => write!(
                f,
                "edge id {id} is outside [0, {edge_count}); edge ids must be dense"
            ),
            Violation::LabelCount {
                what,
                expected,
                got,
            } => write!(f, "{what} labels: expected {expected}, got {got}"),
        }
    }
}

/// Immutable face–edge incidence structure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternComplex {
    face_count: usize,
    edges: Vec<Edge>,
    face_labels: Option<Vec<String>>,
    edge_labels: Option<Vec<String>>,
}

impl PatternComplex {
    /// Builds a complex without checking it. Use [`validate`](Self::validate)
    /// or [`try_new`](Self::try_new) before handing it to the solvers.
    pub fn new(face_count: usize, mut edges: Vec<Edge>) -> Self {
        edges.sort_by_key(|e| e.id);
        Self {
            face_count,
            edges,
            face_labels: None,
            edge_labels: None,
        }
    }

    pub fn try_new(face_count: usize, edges: Vec<Edge>) -> Result<Self> {
        let complex = Self::new(face_count, edges);
        complex.ensure_valid()?;
        Ok(complex)
    }

    pub fn with_face_labels(mut self, labels: Vec<String>) -> Self {
        self.face_labels = Some(labels);
        self
    }

    pub fn with_edge_labels(mut self, labels: Vec<String>) -> Self {
        self.edge_labels = Some(labels);
        self
    }

    pub fn face_count(&self) -> usize {
        self.face_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges in ascending id order.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn face_labels(&self) -> Option<&[String]> {
        self.face_labels.as_deref()
    }

    pub fn edge_labels(&self) -> Option<&[String]> {
        self.edge_labels.as_deref()
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.face_count == 0 {
            out.push(Violation::NoFaces);
        }

        let edge_count = self.edges.len();
        let mut seen = vec![false; edge_count];
        let mut incidences = vec![0usize; self.face_count];
        for edge in &self.edges {
            if edge.id >= edge_count {
                out.push(Violation::EdgeIdOutOfRange {
                    id: edge.id,
                    edge_count,
                });
            } else if seen[edge.id] {
                out.push(Violation::DuplicateEdgeId { id: edge.id });
            } else {
                seen[edge.id] = true;
            }
            for face in [edge.face_a, edge.face_b] {
                if face >= self.face_count {
                    out.push(Violation::FaceOutOfRange {
                        edge: edge.id,
                        face,
                        face_count: self.face_count,
                    });
                } else {
                    incidences[face] += 1;
                }
            }
        }
        for (face, &count) in incidences.iter().enumerate() {
            if count == 0 {
                out.push(Violation::IsolatedFace { face });
            }
        }

        if let Some(labels) = &self.face_labels {
            if labels.len() != self.face_count {
                out.push(Violation::LabelCount {
                    what: "face",
                    expected: self.face_count,
                    got: labels.len(),
                });
            }
        }
        if let Some(labels) = &self.edge_labels {
            if labels.len() != edge_count {
                out.push(Violation::LabelCount {
                    what: "edge",
                    expected: edge_count,
                    got: labels.len(),
                });
            }
        }
        out
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let violations = self.validate();
        if violations.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidComplex(violations))
        }
    }

    /// Incidences of `face` in ascending edge id, slot `A` before slot `B`.
    /// A self-adjacent edge appears twice.
    pub fn incidences_of(&self, face: usize) -> Result<Vec<Incidence>> {
        self.check_face(face)?;
        let mut out = Vec::new();
        for edge in &self.edges {
            if edge.face_a == face {
                out.push(Incidence {
                    edge: edge.id,
                    slot: Slot::A,
                });
            }
            if edge.face_b == face {
                out.push(Incidence {
                    edge: edge.id,
                    slot: Slot::B,
                });
            }
        }
        Ok(out)
    }

    /// Number of incidences per face.
    pub fn degrees(&self) -> Vec<usize> {
        let mut out = vec![0; self.face_count];
        for edge in &self.edges {
            for face in [edge.face_a, edge.face_b] {
                if let Some(d) = out.get_mut(face) {
                    *d += 1;
                }
            }
        }
        out
    }

    /// The set of edges incident to at least one face of `subset`.
    pub fn edge_neighborhood(&self, subset: &FaceSubset) -> Result<BTreeSet<usize>> {
        if subset.is_empty() {
            return Err(Error::EmptySubset);
        }
        if let Some(&last) = subset.faces().last() {
            self.check_face(last)?;
        }
        Ok(self
            .edges
            .iter()
            .filter(|e| subset.contains(e.face_a) || subset.contains(e.face_b))
            .map(|e| e.id)
            .collect())
    }

    fn check_face(&self, face: usize) -> Result<()> {
        if face < self.face_count {
            Ok(())
        } else {
            Err(Error::FaceOutOfRange {
                face,
                face_count: self.face_count,
            })
        }
    }
}

/// A set of faces, kept as a sorted, deduplicated index list.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct FaceSubset(Vec<usize>);

impl FaceSubset {
    pub fn from_indices<I: IntoIterator<Item = usize>>(faces: I) -> Self {
        let mut v: Vec<usize> = faces.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        Self(v)
    }

    pub fn full(face_count: usize) -> Self {
        Self((0..face_count).collect())
    }

    /// Faces whose bit is set in `mask`.
    pub fn from_mask(mask: u64) -> Self {
        Self((0..64).filter(|i| mask >> i & 1 == 1).collect())
    }

    pub fn faces(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, face: usize) -> bool {
        self.0.binary_search(&face).is_ok()
    }

    pub fn is_subset_of(&self, other: &FaceSubset) -> bool {
        self.0.iter().all(|&f| other.contains(f))
    }
}

/// Quad-grid decomposition of the torus with `m * n` faces.
///
/// Face `(i, j)` has index `i + m * j`. It owns edge `2f` to its right
/// neighbour `(i + 1 mod m, j)` and edge `2f + 1` to its upper neighbour
/// `(i, j + 1 mod n)`, so every face has four incidences. For `m = 1` or
/// `n = 1` the wrapping edges are self-adjacent.
///
/// # Panics
///
/// Panics if `m` or `n` is zero.
pub fn builtin_torus_grid(m: usize, n: usize) -> PatternComplex {
    assert!(m >= 1 && n >= 1, "torus grid needs m, n >= 1");
    let mut edges = Vec::with_capacity(2 * m * n);
    let mut face_labels = Vec::with_capacity(m * n);
    let mut edge_labels = Vec::with_capacity(2 * m * n);
    for j in 0..n {
        for i in 0..m {
            let f = i + m * j;
            let right = (i + 1) % m + m * j;
            let up = i + m * ((j + 1) % n);
            edges.push(Edge::new(2 * f, f, right));
            edges.push(Edge::new(2 * f + 1, f, up));
            face_labels.push(format!("f{i}_{j}"));
            edge_labels.push(format!("h{i}_{j}"));
            edge_labels.push(format!("v{i}_{j}"));
        }
    }
    PatternComplex::new(m * n, edges)
        .with_face_labels(face_labels)
        .with_edge_labels(edge_labels)
}
