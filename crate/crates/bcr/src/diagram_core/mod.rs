//! BCR diagrams: data model, validation and local combinatorics.

mod canon;
mod json;
mod orient;

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use canon::{Automorphisms, CanonicalKey};
pub use json::{DiagramJson, JsonError};
pub use orient::{orientation_order, orientation_sign, orientation_sign_of, ConfigLayout};

/// Colour of a vertex or an edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Kind {
    Internal,
    External,
}

impl Kind {
    pub fn code(self) -> char {
        match self {
            Kind::Internal => 'i',
            Kind::External => 'e',
        }
    }

    pub fn from_code(c: char) -> Option<Kind> {
        match c {
            'i' => Some(Kind::Internal),
            'e' => Some(Kind::External),
            _ => None,
        }
    }

    /// Dimension of the sphere an edge of this kind maps to, `n(e)`.
    pub fn sphere_dim(self, n: usize) -> usize {
        match self {
            Kind::Internal => n - 1,
            Kind::External => n + 1,
        }
    }

    /// Number of coordinates a vertex of this kind carries.
    pub fn coord_dim(self, n: usize) -> usize {
        match self {
            Kind::Internal => n,
            Kind::External => n + 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Vertex {
    pub id: usize,
    pub kind: Kind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub source: usize,
    pub target: usize,
    pub kind: Kind,
}

impl Edge {
    pub fn new(source: usize, target: usize, kind: Kind) -> Self {
        Edge { source, target, kind }
    }

    pub fn reversed(self) -> Self {
        Edge { source: self.target, target: self.source, kind: self.kind }
    }
}

/// An unchecked directed 2-coloured graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawGraph {
    pub vertices: Vec<Vertex>,
    pub edges: Vec<Edge>,
}

impl RawGraph {
    /// Graph with vertex ids `0..kinds.len()`.
    pub fn from_kinds(kinds: &[Kind], edges: Vec<Edge>) -> Self {
        let vertices = kinds.iter().enumerate().map(|(id, &kind)| Vertex { id, kind }).collect();
        RawGraph { vertices, edges }
    }
}

/// The local shape a vertex of a valid diagram has.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rule {
    /// External, in: one leg and one external edge, out: external.
    ExternalTrivalent,
    /// Internal, in: internal edge and a leg, out: internal.
    InternalTrivalent,
    /// Internal, no incoming edge, out: external (the source of a leg).
    Univalent,
    /// Internal, in: external, out: internal.
    BivalentExternalIn,
    /// Internal, in: internal, out: external.
    BivalentExternalOut,
}

impl Rule {
    pub fn index(self) -> u8 {
        match self {
            Rule::ExternalTrivalent => 1,
            Rule::InternalTrivalent => 2,
            Rule::Univalent => 3,
            Rule::BivalentExternalIn => 4,
            Rule::BivalentExternalOut => 5,
        }
    }

    pub fn is_trivalent(self) -> bool {
        matches!(self, Rule::ExternalTrivalent | Rule::InternalTrivalent)
    }

    pub fn is_bivalent(self) -> bool {
        matches!(self, Rule::BivalentExternalIn | Rule::BivalentExternalOut)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    Empty,
    DuplicateVertexId { id: usize },
    UnknownEndpoint { edge: usize, vertex: usize },
    LoopEdge { edge: usize },
    DuplicateEdge { edge: usize, first: usize },
    OutgoingEdges { vertex: usize, count: usize },
    NoLocalRule { vertex: usize },
    Disconnected { unreachable: usize },
    OddVertexCount { count: usize },
    EdgeCount { vertices: usize, edges: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Empty => write!(f, "empty graph"),
            Violation::DuplicateVertexId { id } => write!(f, "duplicate vertex id {id}"),
            Violation::UnknownEndpoint { edge, vertex } => {
                write!(f, "edge {edge} references unknown vertex {vertex}")
            }
            Violation::LoopEdge { edge } => write!(f, "loop edge: edge {edge} joins a vertex to itself"),
            Violation::DuplicateEdge { edge, first } => {
                write!(f, "multiple edge: edge {edge} repeats the ordered pair of edge {first}")
            }
            Violation::OutgoingEdges { vertex, count } => write!(
                f,
                "outgoing-edge rule: vertex {vertex} has {count} outgoing edges, expected exactly one"
            ),
            Violation::NoLocalRule { vertex } => {
                write!(f, "local rule: vertex {vertex} matches none of the five vertex rules")
            }
            Violation::Disconnected { unreachable } => {
                write!(f, "connectivity: vertex {unreachable} is not reachable from vertex 0")
            }
            Violation::OddVertexCount { count } => write!(f, "degree: {count} vertices is odd"),
            Violation::EdgeCount { vertices, edges } => {
                write!(f, "edge count: {edges} edges for {vertices} vertices")
            }
        }
    }
}

/// Outcome of [`validate`]; violations are data, not errors.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return write!(f, "ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ValidationReport {}

/// Checks a raw graph against the BCR diagram definition.
pub fn validate(graph: &RawGraph) -> ValidationReport {
    let mut violations = Vec::new();
    let nv = graph.vertices.len();
    if nv == 0 {
        violations.push(Violation::Empty);
        return ValidationReport { violations };
    }

    // Vertex ids may be arbitrary; index them by position.
    let mut index_of = std::collections::HashMap::new();
    for (pos, v) in graph.vertices.iter().enumerate() {
        if index_of.insert(v.id, pos).is_some() {
            violations.push(Violation::DuplicateVertexId { id: v.id });
        }
    }
    let mut edges = Vec::with_capacity(graph.edges.len());
    let mut seen = std::collections::HashMap::new();
    for (i, e) in graph.edges.iter().enumerate() {
        let s = index_of.get(&e.source).copied();
        let t = index_of.get(&e.target).copied();
        match (s, t) {
            (Some(s), Some(t)) => {
                if s == t {
                    violations.push(Violation::LoopEdge { edge: i });
                    continue;
                }
                if let Some(&first) = seen.get(&(s, t)) {
                    violations.push(Violation::DuplicateEdge { edge: i, first });
                    continue;
                }
                seen.insert((s, t), i);
                edges.push((i, Edge::new(s, t, e.kind)));
            }
            (None, _) => violations.push(Violation::UnknownEndpoint { edge: i, vertex: e.source }),
            (_, None) => violations.push(Violation::UnknownEndpoint { edge: i, vertex: e.target }),
        }
    }

    let kinds: Vec<Kind> = graph.vertices.iter().map(|v| v.kind).collect();
    let inc = Incidence::new(nv, edges.iter().map(|(_, e)| *e));
    for v in 0..nv {
        let outs = inc.outgoing[v].len();
        if outs != 1 {
            violations.push(Violation::OutgoingEdges { vertex: graph.vertices[v].id, count: outs });
        }
        if local_rule(v, &kinds, &inc).is_none() {
            violations.push(Violation::NoLocalRule { vertex: graph.vertices[v].id });
        }
    }

    if let Some(u) = first_unreachable(nv, &inc) {
        violations.push(Violation::Disconnected { unreachable: graph.vertices[u].id });
    }
    if nv % 2 == 1 {
        violations.push(Violation::OddVertexCount { count: nv });
    }
    if graph.edges.len() != nv {
        violations.push(Violation::EdgeCount { vertices: nv, edges: graph.edges.len() });
    }
    ValidationReport { violations }
}

struct Incidence {
    edges: Vec<Edge>,
    outgoing: Vec<Vec<usize>>,
    incoming: Vec<Vec<usize>>,
}

impl Incidence {
    fn new(nv: usize, edges: impl Iterator<Item = Edge>) -> Self {
        let edges: Vec<Edge> = edges.collect();
        let mut outgoing = vec![Vec::new(); nv];
        let mut incoming = vec![Vec::new(); nv];
        for (i, e) in edges.iter().enumerate() {
            outgoing[e.source].push(i);
            incoming[e.target].push(i);
        }
        Incidence { edges, outgoing, incoming }
    }

    fn valence(&self, v: usize) -> usize {
        self.outgoing[v].len() + self.incoming[v].len()
    }
}

fn local_rule(v: usize, kinds: &[Kind], inc: &Incidence) -> Option<Rule> {
    use Kind::{External as E, Internal as I};
    let outs = &inc.outgoing[v];
    let ins = &inc.incoming[v];
    if outs.len() != 1 {
        return None;
    }
    let out_kind = inc.edges[outs[0]].kind;
    let from_univalent = |e: usize| inc.valence(inc.edges[e].source) == 1;
    let in_kinds: Vec<Kind> = ins.iter().map(|&e| inc.edges[e].kind).collect();
    match (kinds[v], ins.len(), out_kind) {
        (E, 2, E) => {
            let ok = in_kinds.iter().all(|&k| k == E) && ins.iter().any(|&e| from_univalent(e));
            ok.then_some(Rule::ExternalTrivalent)
        }
        (I, 2, I) => {
            let (int_in, ext_in): (Vec<usize>, Vec<usize>) =
                ins.iter().partition(|&&e| inc.edges[e].kind == I);
            let ok = int_in.len() == 1 && ext_in.len() == 1 && from_univalent(ext_in[0]);
            ok.then_some(Rule::InternalTrivalent)
        }
        (I, 0, E) => Some(Rule::Univalent),
        (I, 1, I) if in_kinds[0] == E => Some(Rule::BivalentExternalIn),
        (I, 1, E) if in_kinds[0] == I => Some(Rule::BivalentExternalOut),
        _ => None,
    }
}

fn first_unreachable(nv: usize, inc: &Incidence) -> Option<usize> {
    let mut seen = vec![false; nv];
    let mut stack = vec![0usize];
    seen[0] = true;
    while let Some(v) = stack.pop() {
        for &e in inc.outgoing[v].iter().chain(inc.incoming[v].iter()) {
            let ed = inc.edges[e];
            for w in [ed.source, ed.target] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
    }
    seen.iter().position(|&s| !s)
}

/// A validated BCR diagram. Vertex ids are `0..2k`.
///
/// Every vertex has exactly one outgoing edge; edges keep the order they were
/// given in, which matters for numberings and for [`reverse_cycle`].
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BcrDiagram {
    kinds: Vec<Kind>,
    edges: Vec<Edge>,
    out_edge: Vec<usize>,
    in_edges: Vec<Vec<usize>>,
    rules: Vec<Rule>,
}

impl BcrDiagram {
    /// Validates and builds a diagram with vertex ids `0..kinds.len()`.
    pub fn new(kinds: Vec<Kind>, edges: Vec<Edge>) -> Result<Self, ValidationReport> {
        let raw = RawGraph::from_kinds(&kinds, edges);
        Self::from_raw(&raw)
    }

    /// Validates a raw graph; vertex ids are renumbered in increasing order.
    pub fn from_raw(raw: &RawGraph) -> Result<Self, ValidationReport> {
        let report = validate(raw);
        if !report.is_ok() {
            return Err(report);
        }
        let mut ids: Vec<usize> = raw.vertices.iter().map(|v| v.id).collect();
        ids.sort_unstable();
        let pos = |id: usize| ids.binary_search(&id).expect("validated id");
        let mut kinds = vec![Kind::Internal; ids.len()];
        for v in &raw.vertices {
            kinds[pos(v.id)] = v.kind;
        }
        let edges = raw.edges.iter().map(|e| Edge::new(pos(e.source), pos(e.target), e.kind)).collect();
        Ok(Self::assemble(kinds, edges))
    }

    /// Builds the incidence caches of an already valid graph.
    pub(crate) fn assemble(kinds: Vec<Kind>, edges: Vec<Edge>) -> Self {
        let nv = kinds.len();
        let inc = Incidence::new(nv, edges.iter().copied());
        let rules = (0..nv)
            .map(|v| local_rule(v, &kinds, &inc).expect("assemble called on a valid graph"))
            .collect();
        let out_edge = inc.outgoing.iter().map(|o| o[0]).collect();
        BcrDiagram { kinds, edges, out_edge, in_edges: inc.incoming, rules }
    }

    pub fn n_vertices(&self) -> usize {
        self.kinds.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn degree(&self) -> usize {
        self.kinds.len() / 2
    }

    pub fn kinds(&self) -> &[Kind] {
        &self.kinds
    }

    pub fn kind(&self, v: usize) -> Kind {
        self.kinds[v]
    }

    pub fn vertices(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.kinds.iter().enumerate().map(|(id, &kind)| Vertex { id, kind })
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> Edge {
        self.edges[e]
    }

    pub fn out_edge(&self, v: usize) -> usize {
        self.out_edge[v]
    }

    pub fn in_edges(&self, v: usize) -> &[usize] {
        &self.in_edges[v]
    }

    /// All edges adjacent to `v`, incoming first.
    pub fn adjacent_edges(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.in_edges[v].iter().copied().chain(std::iter::once(self.out_edge[v]))
    }

    pub fn rule(&self, v: usize) -> Rule {
        self.rules[v]
    }

    pub fn valence(&self, v: usize) -> usize {
        self.in_edges[v].len() + 1
    }

    pub fn is_leg(&self, e: usize) -> bool {
        self.rules[self.edges[e].source] == Rule::Univalent
    }

    /// The leg arriving at a trivalent vertex.
    pub fn leg_into(&self, v: usize) -> Option<usize> {
        self.in_edges[v].iter().copied().find(|&e| self.is_leg(e))
    }

    /// The incoming cycle edge of a non-univalent vertex.
    pub fn cycle_in_edge(&self, v: usize) -> Option<usize> {
        self.in_edges[v].iter().copied().find(|&e| !self.is_leg(e))
    }

    pub fn raw(&self) -> RawGraph {
        RawGraph::from_kinds(&self.kinds, self.edges.clone())
    }

    /// Number of internal trivalent vertices, `N_{T,i}`.
    pub fn internal_trivalent_count(&self) -> usize {
        self.rules.iter().filter(|&&r| r == Rule::InternalTrivalent).count()
    }

    pub fn external_edge_count(&self) -> usize {
        self.edges.iter().filter(|e| e.kind == Kind::External).count()
    }

    pub fn internal_edge_count(&self) -> usize {
        self.edges.len() - self.external_edge_count()
    }

    /// `ε(Γ) = (-1)^{N_{T,i} + |E_e|}`.
    pub fn sign_epsilon(&self) -> i8 {
        if (self.internal_trivalent_count() + self.external_edge_count()) % 2 == 0 {
            1
        } else {
            -1
        }
    }

    /// Splits the diagram into its directed cycle and its legs.
    pub fn cycle_and_legs(&self) -> CycleLegs {
        let legs: Vec<usize> = (0..self.n_edges()).filter(|&e| self.is_leg(e)).collect();
        let start = (0..self.n_vertices())
            .find(|&v| self.rules[v] != Rule::Univalent)
            .expect("a valid diagram has a cycle");
        let mut vertices = Vec::new();
        let mut edges = Vec::new();
        let mut v = start;
        loop {
            vertices.push(v);
            let e = self.out_edge[v];
            edges.push(e);
            v = self.edges[e].target;
            if v == start {
                break;
            }
        }
        CycleLegs { vertices, edges, legs }
    }

    /// Maximal runs of consecutive cycle edges of one kind, in cycle order.
    pub fn cycle_runs(&self) -> Vec<(Kind, usize)> {
        let cyc = self.cycle_and_legs();
        let kinds: Vec<Kind> = cyc.edges.iter().map(|&e| self.edges[e].kind).collect();
        let l = kinds.len();
        let Some(boundary) = (0..l).find(|&i| kinds[i] != kinds[(i + l - 1) % l]) else {
            return vec![(kinds[0], l)];
        };
        let mut runs: Vec<(Kind, usize)> = Vec::new();
        for j in 0..l {
            let k = kinds[(boundary + j) % l];
            match runs.last_mut() {
                Some((rk, len)) if *rk == k => *len += 1,
                _ => runs.push((k, 1)),
            }
        }
        runs
    }

    /// Counts `(L, r, t, b)` entering the cycle-reversal sign.
    pub fn parity_data(&self) -> ParityData {
        let cyc = self.cycle_and_legs();
        let t = self.rules.iter().filter(|r| r.is_trivalent()).count();
        let b = self.rules.iter().filter(|r| r.is_bivalent()).count();
        let r = if self.internal_edge_count() == 0 {
            0
        } else {
            self.cycle_runs().iter().filter(|(k, _)| *k == Kind::External).count()
        };
        ParityData { l: cyc.edges.len(), r, t, b }
    }

    /// Reverses every cycle edge in place; legs and edge indices are kept.
    pub fn reverse_cycle(&self) -> BcrDiagram {
        let edges = self
            .edges
            .iter()
            .enumerate()
            .map(|(i, &e)| if self.is_leg(i) { e } else { e.reversed() })
            .collect();
        BcrDiagram::assemble(self.kinds.clone(), edges)
    }

    /// The same diagram with vertices relabelled by `perm[old] = new`; edges
    /// follow their sources so that edge `i` leaves vertex `i`.
    pub fn relabel(&self, perm: &[usize]) -> BcrDiagram {
        let nv = self.n_vertices();
        let mut kinds = vec![Kind::Internal; nv];
        for v in 0..nv {
            kinds[perm[v]] = self.kinds[v];
        }
        let mut edges = vec![Edge::new(0, 0, Kind::Internal); nv];
        for e in &self.edges {
            edges[perm[e.source]] = Edge::new(perm[e.source], perm[e.target], e.kind);
        }
        BcrDiagram::assemble(kinds, edges)
    }

    /// Edge permutation induced by a vertex permutation (`perm[old] = new`).
    pub fn edge_image(&self, perm: &[usize], other: &BcrDiagram) -> Vec<usize> {
        (0..self.n_edges()).map(|e| other.out_edge(perm[self.edges[e].source])).collect()
    }

    pub fn canonical_key(&self) -> CanonicalKey {
        canon::canonical(self).key
    }

    /// Canonical relabelling and the permutation `old -> new` that produces it.
    pub fn canonical_form(&self) -> (BcrDiagram, Vec<usize>) {
        let c = canon::canonical(self);
        (self.relabel(&c.perm), c.perm)
    }

    pub fn automorphisms(&self) -> Automorphisms {
        canon::automorphisms(self)
    }

    pub fn is_isomorphic(&self, other: &BcrDiagram) -> bool {
        self.n_vertices() == other.n_vertices() && self.canonical_key() == other.canonical_key()
    }

    /// Distinct vertices joined to `v` by an edge, sorted.
    pub fn neighbours(&self, v: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .adjacent_edges(v)
            .map(|e| {
                let ed = self.edges[e];
                if ed.source == v {
                    ed.target
                } else {
                    ed.source
                }
            })
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

impl fmt::Display for BcrDiagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kinds: String = self.kinds.iter().map(|k| k.code()).collect();
        write!(f, "{kinds}:")?;
        for e in &self.edges {
            write!(f, " {}{}{}", e.source, if e.kind == Kind::Internal { "->" } else { "~>" }, e.target)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycleLegs {
    /// Cycle vertices in the order the cycle visits them.
    pub vertices: Vec<usize>,
    /// `edges[i]` leaves `vertices[i]`.
    pub edges: Vec<usize>,
    pub legs: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ParityData {
    /// Cycle length.
    pub l: usize,
    /// Number of maximal external runs of the cycle (0 when there is no internal edge).
    pub r: usize,
    pub t: usize,
    pub b: usize,
}

#[derive(Clone, Debug, thiserror::Error, PartialEq, Eq)]
pub enum NumberingError {
    #[error("numbering has {got} entries, the diagram has {expected} edges")]
    Length { expected: usize, got: usize },
    #[error("numbering is not a bijection onto 1..={0}")]
    NotBijection(usize),
}

/// A diagram together with a bijection `σ` from its edges to `1..=2k`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct NumberedDiagram {
    diagram: BcrDiagram,
    numbering: Vec<usize>,
}

impl NumberedDiagram {
    pub fn new(diagram: BcrDiagram, numbering: Vec<usize>) -> Result<Self, NumberingError> {
        let m = diagram.n_edges();
        if numbering.len() != m {
            return Err(NumberingError::Length { expected: m, got: numbering.len() });
        }
        let set: HashSet<usize> = numbering.iter().copied().collect();
        if set.len() != m || numbering.iter().any(|&s| s == 0 || s > m) {
            return Err(NumberingError::NotBijection(m));
        }
        Ok(NumberedDiagram { diagram, numbering })
    }

    /// `σ(e) = e + 1`.
    pub fn identity(diagram: BcrDiagram) -> Self {
        let numbering = (1..=diagram.n_edges()).collect();
        NumberedDiagram { diagram, numbering }
    }

    pub fn diagram(&self) -> &BcrDiagram {
        &self.diagram
    }

    pub fn numbering(&self) -> &[usize] {
        &self.numbering
    }

    pub fn sigma(&self, e: usize) -> usize {
        self.numbering[e]
    }

    pub fn degree(&self) -> usize {
        self.diagram.degree()
    }

    /// Edge carrying label `s`.
    pub fn edge_with_label(&self, s: usize) -> usize {
        self.numbering.iter().position(|&x| x == s).expect("label in range")
    }

    /// Cycle reversal; the numbering follows the edges, which keep their indices.
    pub fn reverse_cycle(&self) -> NumberedDiagram {
        NumberedDiagram { diagram: self.diagram.reverse_cycle(), numbering: self.numbering.clone() }
    }

    /// `σ ∘ ρ` for the transposition `ρ = (e f)` of two edges.
    pub fn swap_labels(&self, e: usize, f: usize) -> NumberedDiagram {
        let mut numbering = self.numbering.clone();
        numbering.swap(e, f);
        NumberedDiagram { diagram: self.diagram.clone(), numbering }
    }

    pub fn with_diagram(&self, diagram: BcrDiagram) -> NumberedDiagram {
        assert_eq!(diagram.n_edges(), self.numbering.len());
        NumberedDiagram { diagram, numbering: self.numbering.clone() }
    }

    /// Canonical form up to numbered isomorphism: vertex `v` is relabelled by
    /// the label of its outgoing edge.
    pub fn canonical_form(&self) -> NumberedDiagram {
        let perm: Vec<usize> =
            (0..self.diagram.n_vertices()).map(|v| self.numbering[self.diagram.out_edge(v)] - 1).collect();
        let diagram = self.diagram.relabel(&perm);
        let numbering = (1..=diagram.n_edges()).collect();
        NumberedDiagram { diagram, numbering }
    }

    pub fn is_isomorphic(&self, other: &NumberedDiagram) -> bool {
        self.canonical_form() == other.canonical_form()
    }

    pub fn orientation_sign(&self, n: usize) -> i8 {
        orientation_sign(self, n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use Kind::{External as E, Internal as I};

    pub(crate) fn degree_one() -> BcrDiagram {
        BcrDiagram::new(vec![I, I], vec![Edge::new(0, 1, I), Edge::new(1, 0, E)]).unwrap()
    }

    /// The square with alternating edge kinds.
    pub(crate) fn square() -> BcrDiagram {
        BcrDiagram::new(
            vec![I, I, I, I],
            vec![Edge::new(0, 1, I), Edge::new(1, 2, E), Edge::new(2, 3, I), Edge::new(3, 0, E)],
        )
        .unwrap()
    }

    /// Internal 2-cycle with a leg into each vertex.
    pub(crate) fn internal_two_cycle() -> BcrDiagram {
        BcrDiagram::new(
            vec![I, I, I, I],
            vec![Edge::new(0, 1, E), Edge::new(1, 2, I), Edge::new(2, 1, I), Edge::new(3, 2, E)],
        )
        .unwrap()
    }

    #[test]
    fn square_is_valid() {
        let d = square();
        assert_eq!(d.degree(), 2);
        assert_eq!(d.cycle_and_legs().legs.len(), 0);
    }

    #[test]
    fn loop_edge_is_reported() {
        let g = RawGraph::from_kinds(&[I, I], vec![Edge::new(0, 0, I), Edge::new(1, 0, E)]);
        let rep = validate(&g);
        assert!(rep.violations.contains(&Violation::LoopEdge { edge: 0 }));
        assert!(rep.to_string().contains("loop edge"));
    }

    #[test]
    fn two_outgoing_edges_are_reported() {
        let g = RawGraph::from_kinds(
            &[I, I, I],
            vec![Edge::new(0, 1, I), Edge::new(0, 2, E), Edge::new(1, 0, E)],
        );
        let rep = validate(&g);
        assert!(rep.violations.contains(&Violation::OutgoingEdges { vertex: 0, count: 2 }));
        assert!(rep.to_string().contains("outgoing-edge rule"));
    }

    #[test]
    fn duplicate_pair_is_reported() {
        let g = RawGraph::from_kinds(&[I, I], vec![Edge::new(0, 1, I), Edge::new(0, 1, E)]);
        assert!(validate(&g).violations.iter().any(|v| matches!(v, Violation::DuplicateEdge { .. })));
    }

    #[test]
    fn disconnected_union_is_reported() {
        let g = RawGraph::from_kinds(
            &[I, I, I, I],
            vec![Edge::new(0, 1, I), Edge::new(1, 0, E), Edge::new(2, 3, I), Edge::new(3, 2, E)],
        );
        let rep = validate(&g);
        assert_eq!(rep.violations, vec![Violation::Disconnected { unreachable: 2 }]);
    }

    #[test]
    fn sparse_ids_are_renumbered() {
        let raw = RawGraph {
            vertices: vec![Vertex { id: 10, kind: I }, Vertex { id: 4, kind: I }],
            edges: vec![Edge::new(4, 10, I), Edge::new(10, 4, E)],
        };
        let d = BcrDiagram::from_raw(&raw).unwrap();
        assert_eq!(d.edges(), &[Edge::new(0, 1, I), Edge::new(1, 0, E)]);
    }

    #[test]
    fn degree_one_counts() {
        let d = degree_one();
        assert_eq!(d.degree(), 1);
        let cl = d.cycle_and_legs();
        assert_eq!(cl.edges.len(), 2);
        assert!(cl.legs.is_empty());
        assert_eq!(d.parity_data(), ParityData { l: 2, r: 1, t: 0, b: 2 });
    }

    #[test]
    fn epsilon_on_small_diagrams() {
        // two internal trivalent vertices, two external edges
        assert_eq!(internal_two_cycle().sign_epsilon(), 1);
        // no trivalent vertex, two external edges
        assert_eq!(square().sign_epsilon(), 1);
        // one internal trivalent vertex, two external edges
        let d = BcrDiagram::new(
            vec![I, I, I, I],
            vec![Edge::new(0, 1, E), Edge::new(1, 2, I), Edge::new(2, 3, E), Edge::new(3, 1, I)],
        );
        let d = d.unwrap();
        assert_eq!(d.internal_trivalent_count(), 1);
        assert_eq!(d.sign_epsilon(), -1);
    }

    #[test]
    fn parity_of_internal_two_cycle() {
        assert_eq!(internal_two_cycle().parity_data(), ParityData { l: 2, r: 0, t: 2, b: 0 });
    }

    #[test]
    fn cycle_runs_alternate() {
        let runs = square().cycle_runs();
        assert_eq!(runs.len(), 4);
        let ext = runs.iter().filter(|(k, _)| *k == E).count();
        assert_eq!(ext, 2);
    }

    #[test]
    fn reverse_cycle_is_an_involution() {
        for d in [degree_one(), square(), internal_two_cycle()] {
            let nd = NumberedDiagram::identity(d);
            assert_eq!(nd.reverse_cycle().reverse_cycle(), nd);
            let p = nd.diagram().parity_data();
            let q = nd.reverse_cycle().diagram().parity_data();
            assert_eq!((p.l, p.r), (q.l, q.r));
        }
    }

    #[test]
    fn reversed_square_is_isomorphic_to_itself() {
        let d = square();
        assert!(d.reverse_cycle().is_isomorphic(&d));
    }

    #[test]
    fn numbering_must_be_bijective() {
        let d = degree_one();
        assert!(NumberedDiagram::new(d.clone(), vec![1, 1]).is_err());
        assert!(NumberedDiagram::new(d.clone(), vec![1]).is_err());
        assert!(NumberedDiagram::new(d, vec![2, 1]).is_ok());
    }
}
