//! Tropical curves as mapped metric trees.
//!
//! A [`MappedTree`] stores vertex positions (exact rationals, or a point at
//! infinity), edges with a length and the weight vector along `tail -> head`,
//! and marked legs. Marks come in three kinds:
//!
//! * `Interior` marks a finite vertex carrying a constant infinite leg;
//! * `Boundary` marks the infinite endpoint of an edge running to the boundary;
//! * `Finite` marks a finite one-valent endpoint.
//!
//! Unmarked infinite endpoints are the leaves of twigs.

mod classify;
mod cylinder;
mod extend;
mod line;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Sub};

use num_rational::Ratio;
use num_traits::{Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::lattice::LatticeVector;

pub use classify::{
    classify, spine_decomposition, validate_balancing, Classification, DecompositionError,
    SpineDecomposition, VertexBalance, Violation, TWIG_ROOT_LABEL,
};
pub use cylinder::{
    generic_walls, smallest_complement, CylinderError, LeafEnd, LeafPlan, PrimitiveCylinder,
    TreePlan,
};
pub use extend::{
    extend_spine, extension_class, path_crossings, Crossing, ExtendError, ExtendedSpine,
};
pub use line::{tropical_line, LineError, TropicalLine};

/// Exact rational scalar used for positions and lengths.
pub type Q = Ratio<i64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point {
    pub x: Q,
    pub y: Q,
}

impl Point {
    pub fn new(x: Q, y: Q) -> Self {
        Self { x, y }
    }

    pub fn from_ints(x: i64, y: i64) -> Self {
        Self::new(Q::from_integer(x), Q::from_integer(y))
    }

    pub fn origin() -> Self {
        Self::from_ints(0, 0)
    }

    pub fn is_origin(&self) -> bool {
        self.x.is_zero() && self.y.is_zero()
    }

    /// `self + t * v`.
    pub fn offset(self, v: LatticeVector, t: Q) -> Self {
        Self::new(self.x + t * v.x, self.y + t * v.y)
    }

    /// `t * v`.
    pub fn along(v: LatticeVector, t: Q) -> Self {
        Self::origin().offset(v, t)
    }

    /// `det(self, v)`.
    pub fn det(self, v: LatticeVector) -> Q {
        self.x * v.y - self.y * v.x
    }

    pub fn dot(self, v: LatticeVector) -> Q {
        self.x * v.x + self.y * v.y
    }

    /// The scalar `t` with `self = t * v`, if any.
    pub fn multiple_of(self, v: LatticeVector) -> Option<Q> {
        if v.is_zero() || !self.det(v).is_zero() {
            return None;
        }
        Some(self.dot(v) / Q::from_integer(v.dot(v)))
    }

    /// True when the point lies on the closed ray spanned by `u`, origin excluded.
    pub fn on_ray(self, u: LatticeVector) -> bool {
        self.det(u).is_zero() && self.dot(u).is_positive()
    }

    pub fn to_f64(self) -> (f64, f64) {
        (ratio_to_f64(self.x), ratio_to_f64(self.y))
    }
}

pub fn ratio_to_f64(q: Q) -> f64 {
    *q.numer() as f64 / *q.denom() as f64
}

/// Points serialize as a pair of rational strings such as `["3/2", "1"]`.
impl Serialize for Point {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        [self.x.to_string(), self.y.to_string()].serialize(s)
    }
}

impl Serialize for Length {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Length::Finite(q) => q.to_string().serialize(s),
            Length::Infinite => "inf".serialize(s),
        }
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Length {
    Finite(Q),
    Infinite,
}

impl Length {
    pub fn is_infinite(&self) -> bool {
        matches!(self, Length::Infinite)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum VertexPos {
    Finite(Point),
    Infinite,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Edge {
    pub tail: usize,
    pub head: usize,
    pub length: Length,
    /// Weight vector along `tail -> head`.
    pub weight: LatticeVector,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum LegKind {
    Interior,
    Boundary,
    Finite,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Leg {
    pub label: String,
    pub vertex: usize,
    pub kind: LegKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("vertex {0} does not exist")]
    NoSuchVertex(usize),
    #[error("edge {0} is not affinely consistent with its weight")]
    AffineInconsistent(usize),
    #[error("edge {0} has an infinite tail or a finite head with infinite length")]
    BadInfiniteEdge(usize),
    #[error("the underlying graph is not a tree")]
    NotATree,
    #[error("leg `{0}` is attached to a vertex of the wrong kind")]
    BadLeg(String),
    #[error("leg label `{0}` is used twice")]
    DuplicateLabel(String),
}

/// A metric tree mapped affinely into the plane.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct MappedTree {
    vertices: Vec<VertexPos>,
    edges: Vec<Edge>,
    legs: Vec<Leg>,
}

/// An edge seen from one of its endpoints.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Incidence {
    pub edge: usize,
    pub other: usize,
    /// Weight pointing away from the vertex.
    pub outgoing: LatticeVector,
}

impl MappedTree {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn vertices(&self) -> &[VertexPos] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn legs(&self) -> &[Leg] {
        &self.legs
    }

    pub fn add_vertex(&mut self, p: Point) -> usize {
        self.vertices.push(VertexPos::Finite(p));
        self.vertices.len() - 1
    }

    /// Adds a finite edge; the length is read off from the positions.
    pub fn add_edge(
        &mut self,
        tail: usize,
        head: usize,
        weight: LatticeVector,
    ) -> Result<usize, TreeError> {
        let (a, b) = (self.position(tail)?, self.position(head)?);
        let idx = self.edges.len();
        let len = (b - a)
            .multiple_of(weight)
            .ok_or(TreeError::AffineInconsistent(idx))?;
        if !len.is_positive() {
            return Err(TreeError::AffineInconsistent(idx));
        }
        self.edges.push(Edge {
            tail,
            head,
            length: Length::Finite(len),
            weight,
        });
        Ok(idx)
    }

    /// Adds an infinite edge leaving `tail` with the given weight; returns the
    /// new infinite vertex.
    pub fn add_ray(&mut self, tail: usize, weight: LatticeVector) -> Result<usize, TreeError> {
        self.position(tail)?;
        self.vertices.push(VertexPos::Infinite);
        let head = self.vertices.len() - 1;
        self.edges.push(Edge {
            tail,
            head,
            length: Length::Infinite,
            weight,
        });
        Ok(head)
    }

    pub fn add_leg(
        &mut self,
        label: impl Into<String>,
        vertex: usize,
        kind: LegKind,
    ) -> Result<(), TreeError> {
        let label = label.into();
        if vertex >= self.vertices.len() {
            return Err(TreeError::NoSuchVertex(vertex));
        }
        if self.legs.iter().any(|l| l.label == label) {
            return Err(TreeError::DuplicateLabel(label));
        }
        self.legs.push(Leg {
            label,
            vertex,
            kind,
        });
        Ok(())
    }

    /// Raw edge insertion without any consistency check; used to build
    /// deliberately malformed fixtures.
    pub fn push_edge_unchecked(&mut self, edge: Edge) {
        self.edges.push(edge);
    }

    pub fn set_weight(&mut self, edge: usize, weight: LatticeVector) {
        self.edges[edge].weight = weight;
    }

    pub fn position(&self, v: usize) -> Result<Point, TreeError> {
        match self.vertices.get(v) {
            Some(VertexPos::Finite(p)) => Ok(*p),
            Some(VertexPos::Infinite) => {
                Err(TreeError::BadLeg(format!("vertex {v} is at infinity")))
            }
            None => Err(TreeError::NoSuchVertex(v)),
        }
    }

    pub fn finite_position(&self, v: usize) -> Option<Point> {
        match self.vertices.get(v)? {
            VertexPos::Finite(p) => Some(*p),
            VertexPos::Infinite => None,
        }
    }

    pub fn is_infinite(&self, v: usize) -> bool {
        matches!(self.vertices.get(v), Some(VertexPos::Infinite))
    }

    pub fn incidences(&self, v: usize) -> Vec<Incidence> {
        self.edges
            .iter()
            .enumerate()
            .filter_map(|(i, e)| {
                if e.tail == v {
                    Some(Incidence {
                        edge: i,
                        other: e.head,
                        outgoing: e.weight,
                    })
                } else if e.head == v {
                    Some(Incidence {
                        edge: i,
                        other: e.tail,
                        outgoing: -e.weight,
                    })
                } else {
                    None
                }
            })
            .collect()
    }

    pub fn valence(&self, v: usize) -> usize {
        self.edges
            .iter()
            .filter(|e| e.tail == v || e.head == v)
            .count()
    }

    pub fn leg(&self, label: &str) -> Option<&Leg> {
        self.legs.iter().find(|l| l.label == label)
    }

    pub fn legs_at(&self, v: usize) -> impl Iterator<Item = &Leg> {
        self.legs.iter().filter(move |l| l.vertex == v)
    }

    pub fn marked_vertices(&self) -> BTreeSet<usize> {
        self.legs.iter().map(|l| l.vertex).collect()
    }

    /// Sum of outgoing weights at `v`.
    pub fn weight_sum(&self, v: usize) -> LatticeVector {
        self.incidences(v).iter().map(|i| i.outgoing).sum()
    }

    /// Checks the tree, affine-consistency and leg placement conditions.
    pub fn check_structure(&self) -> Result<(), TreeError> {
        let n = self.vertices.len();
        for (i, e) in self.edges.iter().enumerate() {
            if e.tail >= n || e.head >= n {
                return Err(TreeError::NoSuchVertex(e.tail.max(e.head)));
            }
            match (self.vertices[e.tail], self.vertices[e.head], e.length) {
                (VertexPos::Finite(a), VertexPos::Finite(b), Length::Finite(len)) => {
                    if !len.is_positive() || a.offset(e.weight, len) != b {
                        return Err(TreeError::AffineInconsistent(i));
                    }
                }
                (VertexPos::Finite(_), VertexPos::Infinite, Length::Infinite) => {
                    if e.weight.is_zero() {
                        return Err(TreeError::AffineInconsistent(i));
                    }
                }
                _ => return Err(TreeError::BadInfiniteEdge(i)),
            }
        }
        if n == 0 || self.edges.len() + 1 != n || !self.connected() {
            return Err(TreeError::NotATree);
        }
        for v in 0..n {
            if self.is_infinite(v) && self.valence(v) != 1 {
                return Err(TreeError::NotATree);
            }
        }
        let mut seen = BTreeSet::new();
        for leg in &self.legs {
            if !seen.insert(leg.label.as_str()) {
                return Err(TreeError::DuplicateLabel(leg.label.clone()));
            }
            let ok = match leg.kind {
                LegKind::Interior => !self.is_infinite(leg.vertex),
                LegKind::Boundary => self.is_infinite(leg.vertex),
                LegKind::Finite => !self.is_infinite(leg.vertex) && self.valence(leg.vertex) <= 1,
            };
            if !ok || leg.vertex >= n {
                return Err(TreeError::BadLeg(leg.label.clone()));
            }
        }
        Ok(())
    }

    fn connected(&self) -> bool {
        let n = self.vertices.len();
        let mut adj = vec![Vec::new(); n];
        for e in &self.edges {
            adj[e.tail].push(e.head);
            adj[e.head].push(e.tail);
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Edges of the convex hull of the marked vertices: the tree with
    /// unmarked one-valent vertices pruned repeatedly.
    pub fn hull_edges(&self) -> BTreeSet<usize> {
        let marked = self.marked_vertices();
        let mut alive: BTreeSet<usize> = (0..self.edges.len()).collect();
        if marked.is_empty() {
            return BTreeSet::new();
        }
        loop {
            let mut degree = vec![0usize; self.vertices.len()];
            for &e in &alive {
                degree[self.edges[e].tail] += 1;
                degree[self.edges[e].head] += 1;
            }
            let prune: Vec<usize> = alive
                .iter()
                .copied()
                .filter(|&e| {
                    let Edge { tail, head, .. } = self.edges[e];
                    (degree[tail] == 1 && !marked.contains(&tail))
                        || (degree[head] == 1 && !marked.contains(&head))
                })
                .collect();
            if prune.is_empty() {
                return alive;
            }
            for e in prune {
                alive.remove(&e);
            }
        }
    }

    /// Vertices touched by hull edges, plus isolated marked vertices.
    pub fn hull_vertices(&self) -> BTreeSet<usize> {
        let mut out = self.marked_vertices();
        for e in self.hull_edges() {
            out.insert(self.edges[e].tail);
            out.insert(self.edges[e].head);
        }
        out
    }

    /// Connected components of the complement of the hull, each with the hull
    /// vertex it hangs from and its edge set.
    pub fn twig_components(&self) -> Vec<(usize, Vec<usize>)> {
        let hull = self.hull_edges();
        let hull_v = self.hull_vertices();
        let rest: Vec<usize> = (0..self.edges.len())
            .filter(|e| !hull.contains(e))
            .collect();
        let mut assigned: BTreeMap<usize, usize> = BTreeMap::new();
        let mut comps: Vec<(usize, Vec<usize>)> = Vec::new();
        for &start in &rest {
            if assigned.contains_key(&start) {
                continue;
            }
            let id = comps.len();
            let mut edges = vec![start];
            assigned.insert(start, id);
            let mut frontier = vec![start];
            while let Some(e) = frontier.pop() {
                for v in [self.edges[e].tail, self.edges[e].head] {
                    if hull_v.contains(&v) {
                        continue;
                    }
                    for &f in &rest {
                        if !assigned.contains_key(&f)
                            && (self.edges[f].tail == v || self.edges[f].head == v)
                        {
                            assigned.insert(f, id);
                            edges.push(f);
                            frontier.push(f);
                        }
                    }
                }
            }
            edges.sort_unstable();
            let root = edges
                .iter()
                .flat_map(|&e| [self.edges[e].tail, self.edges[e].head])
                .find(|v| hull_v.contains(v))
                .unwrap_or(self.edges[edges[0]].tail);
            comps.push((root, edges));
        }
        comps
    }

    /// Splits edge `e` at parameter `t` (measured from the tail) by a new
    /// two-valent vertex, which is returned.
    pub fn subdivide_edge(&mut self, e: usize, t: Q) -> Result<usize, TreeError> {
        let edge = self.edges[e];
        let a = self.position(edge.tail)?;
        if let Length::Finite(len) = edge.length {
            if t >= len {
                return Err(TreeError::AffineInconsistent(e));
            }
        }
        if !t.is_positive() {
            return Err(TreeError::AffineInconsistent(e));
        }
        let mid = self.add_vertex(a.offset(edge.weight, t));
        self.edges[e].head = mid;
        self.edges[e].length = Length::Finite(t);
        let rest = match edge.length {
            Length::Finite(len) => Length::Finite(len - t),
            Length::Infinite => Length::Infinite,
        };
        self.edges.push(Edge {
            tail: mid,
            head: edge.head,
            length: rest,
            weight: edge.weight,
        });
        Ok(mid)
    }

    /// Merges unmarked two-valent finite vertices where the tree runs
    /// straight through, and drops vertices left unused.
    pub fn simplify(&self) -> MappedTree {
        let mut t = self.clone();
        loop {
            let marked = t.marked_vertices();
            let candidate = (0..t.vertices.len()).find(|&v| {
                if t.is_infinite(v) || marked.contains(&v) {
                    return false;
                }
                let inc = t.incidences(v);
                inc.len() == 2 && inc[0].outgoing == -inc[1].outgoing
            });
            let Some(v) = candidate else { break };
            let inc = t.incidences(v);
            // Orient the merged edge from inc[0].other through v to inc[1].other.
            let (a, b) = (inc[0], inc[1]);
            let len = match (t.edges[a.edge].length, t.edges[b.edge].length) {
                (Length::Finite(x), Length::Finite(y)) => Length::Finite(x + y),
                _ => Length::Infinite,
            };
            let (tail, head) = if t.is_infinite(a.other) {
                (b.other, a.other)
            } else {
                (a.other, b.other)
            };
            let weight = if tail == a.other {
                b.outgoing
            } else {
                a.outgoing
            };
            let merged = Edge {
                tail,
                head,
                length: len,
                weight,
            };
            let (lo, hi) = (a.edge.min(b.edge), a.edge.max(b.edge));
            t.edges.remove(hi);
            t.edges[lo] = merged;
            t.remove_vertex(v);
        }
        t
    }

    fn remove_vertex(&mut self, v: usize) {
        self.vertices.remove(v);
        let fix = |x: &mut usize| {
            if *x > v {
                *x -= 1;
            }
        };
        for e in &mut self.edges {
            fix(&mut e.tail);
            fix(&mut e.head);
        }
        for l in &mut self.legs {
            fix(&mut l.vertex);
        }
    }

    /// Describes the image of a vertex independently of numbering. Infinite
    /// vertices are described by the finite end and direction of their edge.
    fn vertex_key(&self, v: usize) -> String {
        match self.vertices[v] {
            VertexPos::Finite(p) => format!("{p}"),
            VertexPos::Infinite => {
                let inc = self.incidences(v);
                match inc.first() {
                    Some(i) => format!("inf[{} -> {}]", self.vertex_key(i.other), -i.outgoing),
                    None => "inf[]".to_string(),
                }
            }
        }
    }

    /// A numbering-independent description of the simplified tree: sorted
    /// edge and leg descriptors.
    pub fn signature(&self) -> Vec<String> {
        let t = self.simplify();
        let mut out: Vec<String> = t
            .edges
            .iter()
            .map(|e| {
                let (a, b) = (t.vertex_key(e.tail), t.vertex_key(e.head));
                // Orient finite edges canonically by their endpoint keys.
                if !t.is_infinite(e.head) && b < a {
                    format!("edge {b} -> {a} weight {}", -e.weight)
                } else {
                    format!("edge {a} -> {b} weight {}", e.weight)
                }
            })
            .collect();
        out.extend(
            t.legs
                .iter()
                .map(|l| format!("leg {} {:?} at {}", l.label, l.kind, t.vertex_key(l.vertex))),
        );
        out.sort();
        out
    }

    /// Restricts to the given edges, keeping the legs whose vertices survive.
    pub fn restrict(&self, edges: &BTreeSet<usize>, keep_vertices: &BTreeSet<usize>) -> MappedTree {
        let mut used: BTreeSet<usize> = keep_vertices.clone();
        for &e in edges {
            used.insert(self.edges[e].tail);
            used.insert(self.edges[e].head);
        }
        let index: BTreeMap<usize, usize> = used.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        MappedTree {
            vertices: used.iter().map(|&v| self.vertices[v]).collect(),
            edges: edges
                .iter()
                .map(|&e| {
                    let mut edge = self.edges[e];
                    edge.tail = index[&edge.tail];
                    edge.head = index[&edge.head];
                    edge
                })
                .collect(),
            legs: self
                .legs
                .iter()
                .filter(|l| index.contains_key(&l.vertex))
                .map(|l| Leg {
                    label: l.label.clone(),
                    vertex: index[&l.vertex],
                    kind: l.kind,
                })
                .collect(),
        }
    }

    /// Moves the leg `label` to vertex `v` with a new kind.
    pub fn retarget_leg(&mut self, label: &str, v: usize, kind: LegKind) {
        if let Some(l) = self.legs.iter_mut().find(|l| l.label == label) {
            l.vertex = v;
            l.kind = kind;
        }
    }

    pub fn remove_leg(&mut self, label: &str) {
        self.legs.retain(|l| l.label != label);
    }

    pub fn without_legs(mut self) -> MappedTree {
        self.legs.clear();
        self
    }

    /// Glues `other` onto `self`, identifying finite vertices at equal
    /// position `glue_at`. The leg of `other` labelled `drop_label` is
    /// discarded.
    pub fn glue(&self, other: &MappedTree, glue_at: Point, drop_label: &str) -> MappedTree {
        let mut out = self.clone();
        let target = (0..self.vertices.len()).find(|&v| self.finite_position(v) == Some(glue_at));
        let mut map = BTreeMap::new();
        for (v, pos) in other.vertices.iter().enumerate() {
            let reuse = match (pos, target) {
                (VertexPos::Finite(p), Some(t)) if *p == glue_at => Some(t),
                _ => None,
            };
            let id = reuse.unwrap_or_else(|| {
                out.vertices.push(*pos);
                out.vertices.len() - 1
            });
            map.insert(v, id);
        }
        for e in &other.edges {
            out.edges.push(Edge {
                tail: map[&e.tail],
                head: map[&e.head],
                ..*e
            });
        }
        for l in &other.legs {
            if l.label != drop_label {
                out.legs.push(Leg {
                    label: l.label.clone(),
                    vertex: map[&l.vertex],
                    kind: l.kind,
                });
            }
        }
        out
    }
}
