//! Combinatorics of the codimension-one faces of `C_Γ(ψ)`: the face
//! taxonomy, the subgraphs `Γ_S`, the cancellation involutions on hidden and
//! principal faces, the blow-ups `Γ_{S₁,S₂}` and half-edge dimension counts.
//!
//! Faces are indexed by subsets `S ⊆ V(Γ) ∪ {*}` with `|S| ≥ 2`; the vertex part
//! is a bit mask and `*` (the point at infinity) is a separate flag.

mod blowup;
mod hidden;
mod principal;

use serde::Serialize;

use crate::diagram_core::{BcrDiagram, Kind};

pub use blowup::{blowup_graph, BlowupEdge, BlowupGraph, BlowupVertex, Part};
pub use hidden::{classify_hidden, hb_closure_holds, hidden_involution, hidden_transposition, HiddenClass, HiddenSwap, SwapRule};
pub use principal::{principal_pairing, PrincipalOutcome, PrincipalPattern};

/// Vertex subset as a bit mask (bit `v` set when `v ∈ S`).
pub type VertexMask = u64;

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum FaceError {
    #[error("the face is {0:?}, not hidden")]
    NotHidden(FaceKind),
    #[error("the face is an h-face; its contribution vanishes without an involution")]
    HFace,
    #[error("edge {0} does not span a principal face")]
    NotPrincipal(usize),
    #[error("S1 and S2 intersect")]
    Overlap,
    #[error("S1 and S2 together cover every vertex")]
    FullCover,
    #[error("vertex mask {0:#x} has bits outside the diagram")]
    OutOfRange(VertexMask),
    #[error("no admissible transposition found for the face {0:#x}")]
    NoTransposition(VertexMask),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum FaceKind {
    Infinite,
    Anomalous,
    Principal { edge: usize },
    Hidden,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Face {
    pub vertices: VertexMask,
    pub star: bool,
    pub kind: FaceKind,
}

impl Face {
    pub fn size(&self) -> usize {
        self.vertices.count_ones() as usize + usize::from(self.star)
    }

    pub fn members(&self) -> Vec<usize> {
        mask_members(self.vertices)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct FaceCounts {
    pub infinite: usize,
    pub anomalous: usize,
    pub principal: usize,
    pub hidden: usize,
}

impl FaceCounts {
    pub fn total(&self) -> usize {
        self.infinite + self.anomalous + self.principal + self.hidden
    }
}

pub fn mask_members(mask: VertexMask) -> Vec<usize> {
    (0..64).filter(|&v| mask >> v & 1 == 1).collect()
}

pub fn full_mask(d: &BcrDiagram) -> VertexMask {
    (1u64 << d.n_vertices()) - 1
}

fn contains(mask: VertexMask, v: usize) -> bool {
    mask >> v & 1 == 1
}

/// Edges joining two vertices of `mask`.
fn inner_edges(d: &BcrDiagram, mask: VertexMask) -> Vec<usize> {
    (0..d.n_edges())
        .filter(|&e| {
            let ed = d.edge(e);
            contains(mask, ed.source) && contains(mask, ed.target)
        })
        .collect()
}

/// Classifies one subset.
pub fn classify_face(d: &BcrDiagram, vertices: VertexMask, star: bool) -> Face {
    let kind = if star {
        FaceKind::Infinite
    } else if vertices == full_mask(d) {
        FaceKind::Anomalous
    } else {
        let inner = inner_edges(d, vertices);
        if vertices.count_ones() == 2 && inner.len() == 1 {
            FaceKind::Principal { edge: inner[0] }
        } else {
            FaceKind::Hidden
        }
    };
    Face { vertices, star, kind }
}

/// All faces of `d`, ordered by (vertex mask, star), with counts per kind.
pub fn faces(d: &BcrDiagram) -> (Vec<Face>, FaceCounts) {
    let nv = d.n_vertices();
    let mut out = Vec::new();
    let mut counts = FaceCounts::default();
    for vertices in 0..(1u64 << nv) {
        for star in [false, true] {
            if vertices.count_ones() as usize + usize::from(star) < 2 {
                continue;
            }
            let f = classify_face(d, vertices, star);
            match f.kind {
                FaceKind::Infinite => counts.infinite += 1,
                FaceKind::Anomalous => counts.anomalous += 1,
                FaceKind::Principal { .. } => counts.principal += 1,
                FaceKind::Hidden => counts.hidden += 1,
            }
            out.push(f);
        }
    }
    (out, counts)
}

/// The subgraph `Γ_S` spanned by a vertex subset.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubgraphS {
    pub vertices: Vec<usize>,
    pub edges: Vec<usize>,
    pub connected: bool,
}

impl SubgraphS {
    /// Number of `Γ_S` edges at `v`.
    pub fn valence(&self, d: &BcrDiagram, v: usize) -> usize {
        self.edges.iter().filter(|&&e| d.edge(e).source == v || d.edge(e).target == v).count()
    }

    pub fn edges_at(&self, d: &BcrDiagram, v: usize) -> Vec<usize> {
        self.edges.iter().copied().filter(|&e| d.edge(e).source == v || d.edge(e).target == v).collect()
    }
}

pub fn gamma_s(d: &BcrDiagram, mask: VertexMask) -> SubgraphS {
    let vertices = mask_members(mask);
    let edges = inner_edges(d, mask);
    let connected = match vertices.first() {
        None => false,
        Some(&start) => {
            let mut seen: VertexMask = 1 << start;
            let mut stack = vec![start];
            while let Some(v) = stack.pop() {
                for &e in &edges {
                    let ed = d.edge(e);
                    let w = if ed.source == v {
                        ed.target
                    } else if ed.target == v {
                        ed.source
                    } else {
                        continue;
                    };
                    if !contains(seen, w) {
                        seen |= 1 << w;
                        stack.push(w);
                    }
                }
            }
            seen == mask
        }
    };
    SubgraphS { vertices, edges, connected }
}

/// Half-edge dimensions `(d(e₋), d(e₊))` per edge and their vertex sums.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HalfEdgeDims {
    pub per_edge: Vec<(usize, usize)>,
    pub per_vertex: Vec<usize>,
    pub total: usize,
}

pub fn half_edge_dims(d: &BcrDiagram, n: usize) -> HalfEdgeDims {
    let per_edge: Vec<(usize, usize)> = d
        .edges()
        .iter()
        .map(|e| match e.kind {
            Kind::External => (n, 1),
            Kind::Internal => (n - 1, 0),
        })
        .collect();
    let mut per_vertex = vec![0; d.n_vertices()];
    for (e, &(tail, head)) in d.edges().iter().zip(&per_edge) {
        per_vertex[e.source] += tail;
        per_vertex[e.target] += head;
    }
    let total = per_edge.iter().map(|(a, b)| a + b).sum();
    HalfEdgeDims { per_edge, per_vertex, total }
}

/// `Σ_e n(e)`.
pub fn edge_dimension_sum(d: &BcrDiagram, n: usize) -> usize {
    d.edges().iter().map(|e| e.kind.sphere_dim(n)).sum()
}

/// Outcome of running every involution over all numbered diagrams of one degree.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct InvolutionCensus {
    pub k: usize,
    pub numbered: usize,
    pub reversal_failures: usize,
    /// `(Γ, σ, S)` with `S` a hidden face of type `H_A` or `H_B`.
    pub hidden_faces: usize,
    pub h_faces: usize,
    pub hidden_failures: usize,
    pub principal_faces: usize,
    pub principal_partners: usize,
    pub principal_vanishing: usize,
    pub principal_sphere: usize,
    pub principal_failures: usize,
}

impl InvolutionCensus {
    pub fn ok(&self) -> bool {
        self.reversal_failures == 0 && self.hidden_failures == 0 && self.principal_failures == 0
    }
}

/// Checks cycle reversal, the hidden-face involution and the principal
/// pairing on every numbered diagram of degree `k`: each must square to the
/// identity, hidden orbits must have two elements and principal partners
/// must have the expected `ε` ratio.
pub fn involution_census(
    k: usize,
    sphere_factorization: bool,
) -> Result<InvolutionCensus, crate::diagram_enum::EnumError> {
    let mut c = InvolutionCensus { k, ..Default::default() };
    for d in crate::diagram_enum::enumerate(k)? {
        let (all, _) = faces(&d);
        let hidden: Vec<VertexMask> =
            all.iter().filter(|f| f.kind == FaceKind::Hidden).map(|f| f.vertices).collect();
        let principal: Vec<usize> = all
            .iter()
            .filter_map(|f| match f.kind {
                FaceKind::Principal { edge } => Some(edge),
                _ => None,
            })
            .collect();
        for num in crate::diagram_enum::numberings(&d) {
            let nd = crate::NumberedDiagram::new(d.clone(), num).expect("numbering from enumeration");
            c.numbered += 1;
            if nd.reverse_cycle().reverse_cycle() != nd {
                c.reversal_failures += 1;
            }
            for &s in &hidden {
                match hidden_involution(&nd, s) {
                    Ok(star) => {
                        c.hidden_faces += 1;
                        if star == nd || hidden_involution(&star, s).as_ref() != Ok(&nd) {
                            c.hidden_failures += 1;
                        }
                    }
                    Err(FaceError::HFace) => c.h_faces += 1,
                    Err(_) => c.hidden_failures += 1,
                }
            }
            for &e in &principal {
                c.principal_faces += 1;
                match principal_pairing(&nd, e, sphere_factorization) {
                    Ok(PrincipalOutcome::Partner { partner, edge, pattern }) => {
                        c.principal_partners += 1;
                        let back = principal_pairing(&partner, edge, sphere_factorization);
                        let returns = matches!(&back, Ok(PrincipalOutcome::Partner { partner: p, .. }) if *p == nd);
                        let ratio = partner.diagram().sign_epsilon() * nd.diagram().sign_epsilon();
                        if !returns || ratio != pattern.epsilon_ratio() {
                            c.principal_failures += 1;
                        }
                    }
                    Ok(PrincipalOutcome::Vanishing { .. }) => c.principal_vanishing += 1,
                    Ok(PrincipalOutcome::NeedsSphereFactorization { .. }) => c.principal_sphere += 1,
                    Err(_) => c.principal_failures += 1,
                }
            }
        }
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram_core::{ConfigLayout, Edge};
    use crate::diagram_enum::enumerate;
    use Kind::{External as E, Internal as I};

    fn degree_one() -> BcrDiagram {
        BcrDiagram::new(vec![I, I], vec![Edge::new(0, 1, I), Edge::new(1, 0, E)]).unwrap()
    }

    fn internal_two_cycle() -> BcrDiagram {
        BcrDiagram::new(
            vec![I, I, I, I],
            vec![Edge::new(0, 1, E), Edge::new(1, 2, I), Edge::new(2, 1, I), Edge::new(3, 2, E)],
        )
        .unwrap()
    }

    #[test]
    fn census_is_clean_for_small_degrees() {
        for k in 2..=3 {
            let c = involution_census(k, false).unwrap();
            assert!(c.ok(), "{c:?}");
            assert!(c.hidden_faces > 0 && c.principal_partners > 0);
            let with = involution_census(k, true).unwrap();
            assert_eq!(with.principal_sphere, 0);
            assert_eq!(with.principal_partners, c.principal_partners + c.principal_sphere);
        }
    }

    #[test]
    fn degree_one_has_four_faces() {
        let (fs, counts) = faces(&degree_one());
        assert_eq!(fs.len(), 4);
        // {0,1} is anomalous (two edges join the pair), the rest are infinite
        assert_eq!(counts, FaceCounts { infinite: 3, anomalous: 1, principal: 0, hidden: 0 });
    }

    #[test]
    fn face_count_formula() {
        for k in 1..=3 {
            for d in enumerate(k).unwrap() {
                let m = d.n_vertices() + 1;
                assert_eq!(faces(&d).0.len(), (1usize << m) - 1 - m);
            }
        }
    }

    #[test]
    fn principal_and_anomalous_examples() {
        let d = internal_two_cycle();
        assert_eq!(classify_face(&d, 0b0011, false).kind, FaceKind::Principal { edge: 0 });
        assert_eq!(classify_face(&d, 0b1111, false).kind, FaceKind::Anomalous);
        // the two cycle vertices are joined by two edges
        assert_eq!(classify_face(&d, 0b0110, false).kind, FaceKind::Hidden);
    }

    #[test]
    fn gamma_s_examples() {
        let d = internal_two_cycle();
        let leg = gamma_s(&d, 0b0011);
        assert!(leg.connected);
        assert_eq!(leg.edges, vec![0]);
        // the two univalent vertices
        assert!(!gamma_s(&d, 0b1001).connected);
        assert!(gamma_s(&d, full_mask(&d)).connected);
        assert_eq!(gamma_s(&d, full_mask(&d)).edges.len(), 4);
    }

    #[test]
    fn half_edges_sum_to_dimension() {
        for k in 1..=4 {
            for d in enumerate(k).unwrap() {
                for n in [3, 5] {
                    let h = half_edge_dims(&d, n);
                    let layout = ConfigLayout::new(&d, n);
                    for v in 0..d.n_vertices() {
                        assert_eq!(h.per_vertex[v], d.kind(v).coord_dim(n));
                    }
                    assert_eq!(h.total, layout.total);
                    assert_eq!(h.total, edge_dimension_sum(&d, n));
                }
            }
        }
    }

    #[test]
    fn all_internal_vertex_diagrams_have_dimension_twelve() {
        for d in enumerate(2).unwrap() {
            if d.kinds().iter().all(|&k| k == I) {
                assert_eq!(half_edge_dims(&d, 3).total, 12);
            }
        }
    }
}
