//! Hidden faces: the h-face criterion, the `H_A` bivalent-vertex pattern and
//! the transpositions that pair `(Γ, σ)` with `(Γ, σ∘ρ)` on `H_A ∪ H_B`.
//!
//! When several pieces qualify, the selected one must not depend on the labels
//! that `ρ` itself swaps, otherwise `σ ↦ σ*` fails to be an involution. Each
//! candidate is therefore ranked by a key that `ρ` leaves unchanged.

use serde::Serialize;

use super::{classify_face, contains, full_mask, gamma_s, FaceError, FaceKind, SubgraphS, VertexMask};
use crate::diagram_core::{BcrDiagram, Kind, NumberedDiagram};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum HWitness {
    Disconnected,
    /// Univalent vertex of `Γ_S` and its only `Γ_S` edge.
    Univalent { vertex: usize, edge: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "class")]
pub enum HiddenClass {
    HFace { witness: HWitness },
    /// `vertex` is trivalent in `Γ` and bivalent in `Γ_S`.
    HA { vertex: usize, incoming: usize, outgoing: usize },
    HB,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum SwapRule {
    BivalentVertex { vertex: usize },
    /// `start` is where the backward walk left `S`; `target` is the first
    /// external vertex after it.
    ExternalVertex { start: usize, target: usize },
    NonAdjacentEdges,
    ExternalInternalExternal { middle: usize },
    TrivalentStar { vertex: usize },
}

/// The transposition `ρ = (e f)` of a hidden face.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct HiddenSwap {
    pub e: usize,
    pub f: usize,
    pub rule: SwapRule,
}

fn check_mask(d: &BcrDiagram, mask: VertexMask) -> Result<(), FaceError> {
    if mask & !full_mask(d) != 0 {
        return Err(FaceError::OutOfRange(mask));
    }
    Ok(())
}

fn h_witness(d: &BcrDiagram, gs: &SubgraphS) -> Option<HWitness> {
    if !gs.connected {
        return Some(HWitness::Disconnected);
    }
    if gs.vertices.len() < 3 {
        return None;
    }
    gs.vertices.iter().find_map(|&v| {
        let at = gs.edges_at(d, v);
        match at[..] {
            [edge] if d.kind(v) == Kind::External || d.edge(edge).kind == Kind::Internal => {
                Some(HWitness::Univalent { vertex: v, edge })
            }
            _ => None,
        }
    })
}

/// `(v, incoming, outgoing, third)` for every vertex of the bivalent pattern.
fn ha_candidates(d: &BcrDiagram, gs: &SubgraphS) -> Vec<(usize, usize, usize, usize)> {
    let mut out = Vec::new();
    for &v in &gs.vertices {
        if !d.rule(v).is_trivalent() {
            continue;
        }
        let at = gs.edges_at(d, v);
        if at.len() != 2 {
            continue;
        }
        let incoming = at.iter().copied().find(|&e| d.edge(e).target == v);
        let outgoing = at.iter().copied().find(|&e| d.edge(e).source == v);
        let (Some(e), Some(f)) = (incoming, outgoing) else { continue };
        if d.kind(v) == Kind::Internal && (d.edge(e).kind != Kind::Internal || d.edge(f).kind != Kind::Internal) {
            continue;
        }
        let third = d.adjacent_edges(v).find(|&g| g != e && g != f).expect("trivalent");
        out.push((v, e, f, third));
    }
    out
}

/// Classifies a hidden face `S` (no `*`).
pub fn classify_hidden(d: &BcrDiagram, mask: VertexMask) -> Result<HiddenClass, FaceError> {
    check_mask(d, mask)?;
    let kind = classify_face(d, mask, false).kind;
    if kind != FaceKind::Hidden {
        return Err(FaceError::NotHidden(kind));
    }
    let gs = gamma_s(d, mask);
    if let Some(witness) = h_witness(d, &gs) {
        return Ok(HiddenClass::HFace { witness });
    }
    if let Some(&(vertex, incoming, outgoing, _)) = ha_candidates(d, &gs).first() {
        return Ok(HiddenClass::HA { vertex, incoming, outgoing });
    }
    Ok(HiddenClass::HB)
}

/// The two closure properties every `H_B` face has: heads of external edges
/// pull in their tails, univalent vertices pull in their neighbour; moreover
/// `S` meets the cycle without containing all of it.
pub fn hb_closure_holds(d: &BcrDiagram, mask: VertexMask) -> bool {
    let heads = d.edges().iter().all(|e| {
        e.kind == Kind::Internal || !contains(mask, e.target) || contains(mask, e.source)
    });
    let univalent = (0..d.n_vertices())
        .filter(|&v| contains(mask, v) && d.in_edges(v).is_empty())
        .all(|v| contains(mask, d.edge(d.out_edge(v)).target));
    let cycle = d.cycle_and_legs().vertices;
    let meets = cycle.iter().any(|&v| contains(mask, v));
    let covers = cycle.iter().all(|&v| contains(mask, v));
    heads && univalent && meets && !covers
}

/// Selects `ρ` for a face in `H_A ∪ H_B`.
pub fn hidden_transposition(nd: &NumberedDiagram, mask: VertexMask) -> Result<HiddenSwap, FaceError> {
    let d = nd.diagram();
    match classify_hidden(d, mask)? {
        HiddenClass::HFace { .. } => Err(FaceError::HFace),
        HiddenClass::HA { .. } => {
            let gs = gamma_s(d, mask);
            let (vertex, e, f, _) = ha_candidates(d, &gs)
                .into_iter()
                .min_by_key(|c| nd.sigma(c.3))
                .expect("classified as H_A");
            Ok(HiddenSwap { e, f, rule: SwapRule::BivalentVertex { vertex } })
        }
        HiddenClass::HB => hb_transposition(nd, mask),
    }
}

fn hb_transposition(nd: &NumberedDiagram, mask: VertexMask) -> Result<HiddenSwap, FaceError> {
    let d = nd.diagram();
    let gs = gamma_s(d, mask);
    let none = FaceError::NoTransposition(mask);

    // an external vertex of S: walk back to where the cycle enters S, then
    // forward to the first external vertex
    if let Some(x) = gs.vertices.iter().copied().filter(|&v| d.kind(v) == Kind::External).min_by_key(|&v| nd.sigma(d.out_edge(v))) {
        let mut start = x;
        for _ in 0..d.n_vertices() {
            let pred = d.edge(d.cycle_in_edge(start).ok_or(none.clone())?).source;
            if !contains(mask, pred) {
                break;
            }
            start = pred;
        }
        let mut target = start;
        while d.kind(target) != Kind::External {
            target = d.edge(d.out_edge(target)).target;
        }
        let e = d.cycle_in_edge(target).ok_or(none.clone())?;
        let f = d.leg_into(target).ok_or(none.clone())?;
        let a = d.edge(e).source;
        if d.kind(start) != Kind::Internal || !d.rule(a).is_bivalent() || !contains(mask, a) || !contains(mask, d.edge(f).source) {
            return Err(none);
        }
        return Ok(HiddenSwap { e, f, rule: SwapRule::ExternalVertex { start, target } });
    }

    let external: Vec<usize> = gs.edges.iter().copied().filter(|&e| d.edge(e).kind == Kind::External).collect();
    let univalent_source = |e: usize| gs.valence(d, d.edge(e).source) == 1;
    for (i, &e) in external.iter().enumerate() {
        for &f in &external[i + 1..] {
            let (ee, ff) = (d.edge(e), d.edge(f));
            let disjoint = ![ff.source, ff.target].contains(&ee.source) && ![ff.source, ff.target].contains(&ee.target);
            if disjoint && univalent_source(e) && univalent_source(f) {
                return Ok(HiddenSwap { e, f, rule: SwapRule::NonAdjacentEdges });
            }
        }
    }

    let middle = gs
        .edges
        .iter()
        .copied()
        .filter_map(|m| {
            let me = d.edge(m);
            if me.kind != Kind::Internal {
                return None;
            }
            let at_a = gs.edges_at(d, me.source);
            let at_b = gs.edges_at(d, me.target);
            if at_a.len() != 2 || at_b.len() != 2 {
                return None;
            }
            let e = at_a.into_iter().find(|&g| g != m)?;
            let f = at_b.into_iter().find(|&g| g != m)?;
            let (ee, ff) = (d.edge(e), d.edge(f));
            (ee.kind == Kind::External && ee.target == me.source && ff.kind == Kind::External && ff.source == me.target)
                .then_some((m, e, f))
        })
        .min_by_key(|&(m, _, _)| nd.sigma(m));
    if let Some((middle, e, f)) = middle {
        return Ok(HiddenSwap { e, f, rule: SwapRule::ExternalInternalExternal { middle } });
    }

    gs.vertices
        .iter()
        .copied()
        .filter(|&b| d.kind(b) == Kind::Internal && d.rule(b).is_trivalent() && gs.valence(d, b) == 3)
        .map(|b| {
            let leg = d.leg_into(b).expect("internal trivalent vertex has a leg");
            (b, leg, d.cycle_in_edge(b).expect("cycle vertex"), d.out_edge(b))
        })
        .min_by_key(|&(_, leg, _, _)| nd.sigma(leg))
        .map(|(vertex, _, e, f)| HiddenSwap { e, f, rule: SwapRule::TrivalentStar { vertex } })
        .ok_or(none)
}

/// `σ* = σ∘ρ` for a face in `H_A ∪ H_B`.
pub fn hidden_involution(nd: &NumberedDiagram, mask: VertexMask) -> Result<NumberedDiagram, FaceError> {
    let s = hidden_transposition(nd, mask)?;
    Ok(nd.swap_labels(s.e, s.f))
}

#[cfg(test)]
mod tests {
    use super::super::{faces, mask_members};
    use super::*;
    use crate::diagram_core::Edge;
    use crate::diagram_enum::{enumerate, numberings};
    use Kind::{External as E, Internal as I};

    fn hidden_faces(d: &BcrDiagram) -> Vec<VertexMask> {
        faces(d).0.into_iter().filter(|f| f.kind == FaceKind::Hidden).map(|f| f.vertices).collect()
    }

    /// Leg-carrying internal two-cycle: `0 → 1` and `3 → 2` are legs.
    fn internal_two_cycle() -> BcrDiagram {
        BcrDiagram::new(
            vec![I, I, I, I],
            vec![Edge::new(0, 1, E), Edge::new(1, 2, I), Edge::new(2, 1, I), Edge::new(3, 2, E)],
        )
        .unwrap()
    }

    #[test]
    fn non_hidden_faces_are_rejected() {
        let d = internal_two_cycle();
        assert_eq!(classify_hidden(&d, 0b0011), Err(FaceError::NotHidden(FaceKind::Principal { edge: 0 })));
        assert_eq!(classify_hidden(&d, 0b1111), Err(FaceError::NotHidden(FaceKind::Anomalous)));
        assert_eq!(classify_hidden(&d, 1 << 10), Err(FaceError::OutOfRange(1 << 10)));
    }

    #[test]
    fn disconnected_is_h_face() {
        let d = internal_two_cycle();
        assert_eq!(classify_hidden(&d, 0b1001), Ok(HiddenClass::HFace { witness: HWitness::Disconnected }));
    }

    #[test]
    fn bivalent_pattern_swaps_the_two_edges_at_the_vertex() {
        // S = {0, 1, 2}: vertex 1 keeps its leg and its out-edge, which is
        // not internal-internal; vertex 2 keeps in and out, both internal
        let d = internal_two_cycle();
        let class = classify_hidden(&d, 0b0111).unwrap();
        assert!(matches!(class, HiddenClass::HFace { .. } | HiddenClass::HA { .. }), "{class:?}");
        // S = {1, 2, 3} mirrors it
        let class = classify_hidden(&d, 0b1110).unwrap();
        if let HiddenClass::HA { vertex, incoming, outgoing } = class {
            let nd = NumberedDiagram::identity(d.clone());
            let s = hidden_transposition(&nd, 0b1110).unwrap();
            assert_eq!((s.e, s.f), (incoming, outgoing));
            assert_eq!(s.rule, SwapRule::BivalentVertex { vertex });
        }
    }

    #[test]
    fn hb_faces_satisfy_closure() {
        let mut count = 0;
        for k in 2..=3 {
            for d in enumerate(k).unwrap() {
                for s in hidden_faces(&d) {
                    if classify_hidden(&d, s).unwrap() == HiddenClass::HB {
                        assert!(hb_closure_holds(&d, s), "{d} S={s:#b}");
                        count += 1;
                    }
                }
            }
        }
        assert!(count > 0);
    }

    #[test]
    fn involution_on_all_hidden_faces() {
        for k in 2..=3 {
            for d in enumerate(k).unwrap() {
                let hidden = hidden_faces(&d);
                for num in numberings(&d) {
                    let nd = NumberedDiagram::new(d.clone(), num).unwrap();
                    for &s in &hidden {
                        let Ok(swap) = hidden_transposition(&nd, s) else {
                            assert_eq!(hidden_transposition(&nd, s), Err(FaceError::HFace), "{d} S={s:#b}");
                            continue;
                        };
                        let star = nd.swap_labels(swap.e, swap.f);
                        assert_ne!(star, nd);
                        let back = hidden_transposition(&star, s).unwrap();
                        assert_eq!((back.e, back.f), (swap.e, swap.f), "{d} S={s:#b}");
                        assert_eq!(hidden_involution(&star, s).unwrap(), nd);
                    }
                }
            }
        }
    }

    /// Up to degree 5 a trivalent star is never the first applicable piece:
    /// one of the earlier pieces always exists alongside it.
    #[test]
    fn selection_rules_reached() {
        let mut seen = std::collections::HashSet::new();
        for k in 2..=5 {
            for d in enumerate(k).unwrap() {
                let nd = NumberedDiagram::identity(d.clone());
                for s in hidden_faces(&d) {
                    if let Ok(swap) = hidden_transposition(&nd, s) {
                        seen.insert(format!("{:?}", swap.rule).split([' ', '{']).next().unwrap().to_string());
                    }
                }
            }
        }
        let mut seen: Vec<String> = seen.into_iter().collect();
        seen.sort();
        assert_eq!(seen, ["BivalentVertex", "ExternalInternalExternal", "ExternalVertex", "NonAdjacentEdges"]);
    }

    /// The translations of the face coordinates that realise `ρ`: with `u'`
    /// applied, every `Γ_S` edge `g` sees the difference vector of `ρ(g)`.
    fn moved(d: &BcrDiagram, mask: VertexMask, swap: &HiddenSwap, u: &[f64]) -> Vec<f64> {
        let mut v = u.to_vec();
        let (e, f) = (d.edge(swap.e), d.edge(swap.f));
        match swap.rule {
            SwapRule::BivalentVertex { vertex } => {
                v[vertex] = u[e.source] + u[f.target] - u[vertex];
            }
            SwapRule::ExternalVertex { start, target } => {
                let (a, b) = (e.source, f.source);
                let mut w = start;
                let mut s0 = vec![];
                while w != target {
                    s0.push(w);
                    s0.extend(d.leg_into(w).map(|l| d.edge(l).source));
                    w = d.edge(d.out_edge(w)).target;
                }
                for &w in &s0 {
                    v[w] = u[w] + u[b] - u[a];
                }
                v[b] = u[a];
                assert!(s0.iter().all(|&w| contains(mask, w)));
            }
            SwapRule::NonAdjacentEdges => {
                let (a, c, b, dd) = (e.source, e.target, f.source, f.target);
                v[a] = u[c] + u[b] - u[dd];
                v[b] = u[dd] + u[a] - u[c];
            }
            SwapRule::ExternalInternalExternal { .. } => {
                let (c, a, b, dd) = (e.source, e.target, f.source, f.target);
                v[a] = u[c] + u[dd] - u[b];
                v[b] = u[c] + u[dd] - u[a];
            }
            SwapRule::TrivalentStar { vertex: b } => {
                let (c, dd) = (e.source, f.target);
                let a = d.edge(d.leg_into(b).unwrap()).source;
                v[a] = u[c] + u[dd] + u[a] - 2.0 * u[b];
                v[b] = u[c] + u[dd] - u[b];
            }
        }
        v
    }

    #[test]
    fn transpositions_match_the_coordinate_maps() {
        for k in 2..=3 {
            for d in enumerate(k).unwrap() {
                let nd = NumberedDiagram::identity(d.clone());
                let u: Vec<f64> = (0..d.n_vertices()).map(|i| ((i * i * 7 + 3) % 17) as f64 * 0.37 + i as f64).collect();
                for s in hidden_faces(&d) {
                    let Ok(swap) = hidden_transposition(&nd, s) else { continue };
                    let v = moved(&d, s, &swap, &u);
                    for g in gamma_s(&d, s).edges {
                        let rg = if g == swap.e {
                            swap.f
                        } else if g == swap.f {
                            swap.e
                        } else {
                            g
                        };
                        let (eg, er) = (d.edge(g), d.edge(rg));
                        let lhs = v[eg.target] - v[eg.source];
                        let rhs = u[er.target] - u[er.source];
                        assert!((lhs - rhs).abs() < 1e-12, "{d} S={:?} {swap:?} g={g}", mask_members(s));
                    }
                }
            }
        }
    }
}
