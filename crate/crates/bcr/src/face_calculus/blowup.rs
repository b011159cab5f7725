//! The graphs `Γ_{S₁,S₂}` used for additivity under connected sum.
//!
//! Edges with both ends in `S₁` (or both in `S₂`) are dropped, isolated
//! vertices are removed, and every remaining vertex of `S₁ ⊔ S₂` is replaced by
//! one univalent copy per adjacent half-edge. Copies are pinned to fixed points
//! and carry no configuration dimensions.

use serde::Serialize;

use super::{contains, full_mask, FaceError, VertexMask};
use crate::diagram_core::{Kind, NumberedDiagram};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Part {
    S1,
    S2,
    Untouched,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct BlowupVertex {
    /// Vertex of `Γ` this one comes from.
    pub origin: usize,
    pub part: Part,
    pub kind: Kind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct BlowupEdge {
    pub origin: usize,
    pub source: usize,
    pub target: usize,
    pub kind: Kind,
    /// `σ_{S₁,S₂}` of the edge.
    pub label: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BlowupGraph {
    /// Untouched vertices first, in their original order, then the copies in
    /// the order of the half-edges they sit on.
    pub vertices: Vec<BlowupVertex>,
    pub edges: Vec<BlowupEdge>,
}

impl BlowupGraph {
    pub fn part(&self, v: usize) -> Part {
        self.vertices[v].part
    }

    /// `dim C_{Γ_{S₁,S₂}}`: only untouched vertices move.
    pub fn dimension(&self, n: usize) -> usize {
        self.vertices.iter().filter(|v| v.part == Part::Untouched).map(|v| v.kind.coord_dim(n)).sum()
    }

    pub fn edge_dimension_sum(&self, n: usize) -> usize {
        self.edges.iter().map(|e| e.kind.sphere_dim(n)).sum()
    }

    /// Half-edge weights `d̃(e₋), d̃(e₊)`: zero at pinned copies, the usual
    /// `(n, 1)` / `(n−1, 0)` elsewhere.
    pub fn half_edge_weights(&self, n: usize) -> Vec<(usize, usize)> {
        self.edges
            .iter()
            .map(|e| {
                let (tail, head) = match e.kind {
                    Kind::External => (n, 1),
                    Kind::Internal => (n - 1, 0),
                };
                let pinned = |v: usize| self.vertices[v].part != Part::Untouched;
                (if pinned(e.source) { 0 } else { tail }, if pinned(e.target) { 0 } else { head })
            })
            .collect()
    }
}

pub fn blowup_graph(nd: &NumberedDiagram, s1: VertexMask, s2: VertexMask) -> Result<BlowupGraph, FaceError> {
    let d = nd.diagram();
    let full = full_mask(d);
    if (s1 | s2) & !full != 0 {
        return Err(FaceError::OutOfRange((s1 | s2) & !full));
    }
    if s1 & s2 != 0 {
        return Err(FaceError::Overlap);
    }
    if s1 | s2 == full {
        return Err(FaceError::FullCover);
    }
    let part = |v: usize| {
        if contains(s1, v) {
            Part::S1
        } else if contains(s2, v) {
            Part::S2
        } else {
            Part::Untouched
        }
    };
    let kept: Vec<usize> = (0..d.n_edges())
        .filter(|&e| {
            let ed = d.edge(e);
            let (a, b) = (part(ed.source), part(ed.target));
            a == Part::Untouched || a != b
        })
        .collect();

    let mut vertices = Vec::new();
    let mut index = vec![usize::MAX; d.n_vertices()];
    for v in 0..d.n_vertices() {
        if part(v) == Part::Untouched {
            index[v] = vertices.len();
            vertices.push(BlowupVertex { origin: v, part: Part::Untouched, kind: d.kind(v) });
        }
    }
    let copy = |v: usize, vertices: &mut Vec<BlowupVertex>| match part(v) {
        Part::Untouched => index[v],
        p => {
            vertices.push(BlowupVertex { origin: v, part: p, kind: Kind::Internal });
            vertices.len() - 1
        }
    };
    let mut edges = Vec::with_capacity(kept.len());
    for &e in &kept {
        let ed = d.edge(e);
        let source = copy(ed.source, &mut vertices);
        let target = copy(ed.target, &mut vertices);
        edges.push(BlowupEdge { origin: e, source, target, kind: ed.kind, label: nd.sigma(e) });
    }
    Ok(BlowupGraph { vertices, edges })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram_core::BcrDiagram;
    use crate::diagram_enum::enumerate;

    fn all_splits(d: &BcrDiagram) -> Vec<(VertexMask, VertexMask)> {
        let nv = d.n_vertices() as u32;
        let mut out = Vec::new();
        // each vertex goes to S1, S2 or neither
        for code in 0..3usize.pow(nv) {
            let (mut s1, mut s2, mut c) = (0, 0, code);
            for v in 0..nv {
                match c % 3 {
                    1 => s1 |= 1 << v,
                    2 => s2 |= 1 << v,
                    _ => {}
                }
                c /= 3;
            }
            if s1 | s2 != full_mask(d) {
                out.push((s1, s2));
            }
        }
        out
    }

    #[test]
    fn empty_split_is_the_diagram() {
        for d in enumerate(2).unwrap() {
            let nd = NumberedDiagram::identity(d.clone());
            let g = blowup_graph(&nd, 0, 0).unwrap();
            assert_eq!(g.vertices.len(), d.n_vertices());
            assert_eq!(g.edges.len(), d.n_edges());
            assert_eq!(g.dimension(3), g.edge_dimension_sum(3));
        }
    }

    #[test]
    fn lone_external_vertex_splits_into_three() {
        let d = enumerate(2).unwrap().into_iter().find(|d| d.kinds().contains(&Kind::External)).unwrap();
        let x = (0..d.n_vertices()).find(|&v| d.kind(v) == Kind::External).unwrap();
        let nd = NumberedDiagram::identity(d.clone());
        let g = blowup_graph(&nd, 0, 1 << x).unwrap();
        let copies: Vec<&BlowupVertex> = g.vertices.iter().filter(|v| v.origin == x).collect();
        assert_eq!(copies.len(), 3);
        assert!(copies.iter().all(|v| v.part == Part::S2 && v.kind == Kind::Internal));
        for (i, v) in g.vertices.iter().enumerate() {
            if v.part != Part::Untouched {
                let deg = g.edges.iter().filter(|e| e.source == i || e.target == i).count();
                assert_eq!(deg, 1);
            }
        }
    }

    #[test]
    fn invalid_splits() {
        let d = enumerate(1).unwrap().remove(0);
        let nd = NumberedDiagram::identity(d);
        assert_eq!(blowup_graph(&nd, 1, 1), Err(FaceError::Overlap));
        assert_eq!(blowup_graph(&nd, 1, 2), Err(FaceError::FullCover));
    }

    #[test]
    fn dimension_inequality_is_strict_off_the_empty_split() {
        for k in 2..=3 {
            for d in enumerate(k).unwrap() {
                let nd = NumberedDiagram::identity(d.clone());
                for (s1, s2) in all_splits(&d) {
                    let g = blowup_graph(&nd, s1, s2).unwrap();
                    for (i, e) in g.edges.iter().enumerate() {
                        assert!(g.part(e.source) != g.part(e.target) || g.part(e.source) == Part::Untouched, "edge {i}");
                    }
                    let w = g.half_edge_weights(3);
                    // d̃ sums to the dimension, and each edge weight is at most n(e)
                    let total: usize = w.iter().map(|(a, b)| a + b).sum();
                    assert_eq!(total, g.dimension(3), "{d} {s1:#b} {s2:#b}");
                    for (e, &(a, b)) in g.edges.iter().zip(&w) {
                        assert!(a + b <= e.kind.sphere_dim(3));
                    }
                    let (dim, sum) = (g.dimension(3), g.edge_dimension_sum(3));
                    if s1 | s2 == 0 {
                        assert_eq!(dim, sum);
                    } else {
                        assert!(dim < sum, "{d} {s1:#b} {s2:#b}");
                    }
                    assert!(g.edges.iter().all(|e| e.label == nd.sigma(e.origin)));
                }
            }
        }
    }
}
