//! Principal faces: the collision of the two ends of an edge `e` that is the
//! only edge between them.
//!
//! Four local rewrites pair `(Γ, σ)` with a different diagram `(Γ*, σ*)`, and
//! the trivalent-pair pattern pairs `σ` with `σ∘(f g)` on the same diagram.
//! Rewrites keep vertex and edge indices, so `σ*` is `σ` itself and `e* = e`.

use serde::Serialize;

use super::{classify_face, FaceError, FaceKind};
use crate::diagram_core::{BcrDiagram, Edge, Kind, NumberedDiagram, Rule};

/// Local shape around `e`; the partner shape is listed second.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PrincipalPattern {
    /// Leg into an internal trivalent vertex; external edge from a bivalent
    /// vertex with external out-edge to one with external in-edge.
    LegIntoInternalTrivalent,
    ExternalBetweenBivalents,
    /// Internal edge between the two kinds of bivalent vertex; leg into an
    /// external vertex.
    InternalBetweenBivalents,
    LegIntoExternal,
    /// Internal edge from a bivalent vertex into an internal trivalent one;
    /// external edge from an external vertex into a bivalent one.
    BivalentIntoTrivalent,
    ExternalIntoBivalent,
    /// Internal edge from an internal trivalent vertex to a bivalent one;
    /// external edge from a bivalent vertex into an external one.
    TrivalentIntoBivalent,
    BivalentIntoExternal,
    /// Edge between two trivalent vertices of the same kind; self-paired.
    TrivalentPair,
}

impl PrincipalPattern {
    pub fn partner(self) -> PrincipalPattern {
        use PrincipalPattern::*;
        match self {
            LegIntoInternalTrivalent => ExternalBetweenBivalents,
            ExternalBetweenBivalents => LegIntoInternalTrivalent,
            InternalBetweenBivalents => LegIntoExternal,
            LegIntoExternal => InternalBetweenBivalents,
            BivalentIntoTrivalent => ExternalIntoBivalent,
            ExternalIntoBivalent => BivalentIntoTrivalent,
            TrivalentIntoBivalent => BivalentIntoExternal,
            BivalentIntoExternal => TrivalentIntoBivalent,
            TrivalentPair => TrivalentPair,
        }
    }

    /// `ε(Γ*)/ε(Γ)`.
    pub fn epsilon_ratio(self) -> i8 {
        use PrincipalPattern::*;
        match self {
            LegIntoInternalTrivalent | ExternalBetweenBivalents | InternalBetweenBivalents | LegIntoExternal => -1,
            _ => 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PrincipalOutcome {
    Partner { partner: NumberedDiagram, edge: usize, pattern: PrincipalPattern },
    /// `σ(e) = 1` and the face contribution vanishes for degree reasons.
    Vanishing { pattern: PrincipalPattern },
    /// `σ(e) = 1` on the leg/bivalent pair: paired only when the propagator
    /// difference has the sphere factorization property.
    NeedsSphereFactorization { pattern: PrincipalPattern },
}

impl PrincipalOutcome {
    pub fn pattern(&self) -> PrincipalPattern {
        match self {
            PrincipalOutcome::Partner { pattern, .. }
            | PrincipalOutcome::Vanishing { pattern }
            | PrincipalOutcome::NeedsSphereFactorization { pattern } => *pattern,
        }
    }
}

/// The pattern of a principal edge; every one of the ten edge types matches.
pub fn principal_pattern(d: &BcrDiagram, e: usize) -> PrincipalPattern {
    use PrincipalPattern::*;
    use Rule::*;
    let ed = d.edge(e);
    match (d.rule(ed.source), ed.kind, d.rule(ed.target)) {
        (Univalent, _, InternalTrivalent) => LegIntoInternalTrivalent,
        (BivalentExternalOut, Kind::External, BivalentExternalIn) => ExternalBetweenBivalents,
        (BivalentExternalIn, Kind::Internal, BivalentExternalOut) => InternalBetweenBivalents,
        (Univalent, _, ExternalTrivalent) => LegIntoExternal,
        (BivalentExternalIn, Kind::Internal, InternalTrivalent) => BivalentIntoTrivalent,
        (ExternalTrivalent, _, BivalentExternalIn) => ExternalIntoBivalent,
        (InternalTrivalent, Kind::Internal, BivalentExternalOut) => TrivalentIntoBivalent,
        (BivalentExternalOut, Kind::External, ExternalTrivalent) => BivalentIntoExternal,
        (InternalTrivalent, _, InternalTrivalent) | (ExternalTrivalent, _, ExternalTrivalent) => TrivalentPair,
        other => unreachable!("edge type {other:?} cannot occur in a valid diagram"),
    }
}

fn rewrite(d: &BcrDiagram, e: usize, pattern: PrincipalPattern) -> BcrDiagram {
    use PrincipalPattern::*;
    let mut kinds = d.kinds().to_vec();
    let mut edges: Vec<Edge> = d.edges().to_vec();
    let Edge { source: v, target: w, .. } = d.edge(e);
    match pattern {
        LegIntoInternalTrivalent => {
            let f = d.cycle_in_edge(w).expect("cycle vertex");
            edges[f].target = v;
        }
        ExternalBetweenBivalents => {
            let f = d.cycle_in_edge(v).expect("cycle vertex");
            edges[f].target = w;
        }
        InternalBetweenBivalents => {
            let f = d.cycle_in_edge(v).expect("cycle vertex");
            edges[f].target = w;
            edges[e].kind = Kind::External;
            kinds[w] = Kind::External;
        }
        LegIntoExternal => {
            let f = d.cycle_in_edge(w).expect("cycle vertex");
            edges[f].target = v;
            edges[e].kind = Kind::Internal;
            kinds[w] = Kind::Internal;
        }
        BivalentIntoTrivalent => {
            let g = d.leg_into(w).expect("trivalent vertex has a leg");
            edges[g].target = v;
            edges[e].kind = Kind::External;
            kinds[v] = Kind::External;
        }
        ExternalIntoBivalent => {
            let g = d.leg_into(v).expect("trivalent vertex has a leg");
            edges[g].target = w;
            edges[e].kind = Kind::Internal;
            kinds[v] = Kind::Internal;
        }
        TrivalentIntoBivalent => {
            let g = d.leg_into(v).expect("trivalent vertex has a leg");
            edges[g].target = w;
            edges[e].kind = Kind::External;
            kinds[w] = Kind::External;
        }
        BivalentIntoExternal => {
            let g = d.leg_into(w).expect("trivalent vertex has a leg");
            edges[g].target = v;
            edges[e].kind = Kind::Internal;
            kinds[w] = Kind::Internal;
        }
        TrivalentPair => unreachable!("self-paired"),
    }
    BcrDiagram::new(kinds, edges).expect("principal rewrites preserve validity")
}

/// The partner of the principal face of `e` in `(Γ, σ)`.
///
/// `sphere_factorization` states whether the propagator difference for label
/// `1` has the sphere factorization property; it only matters for the
/// leg/bivalent pair with `σ(e) = 1`.
pub fn principal_pairing(
    nd: &NumberedDiagram,
    e: usize,
    sphere_factorization: bool,
) -> Result<PrincipalOutcome, FaceError> {
    let d = nd.diagram();
    if e >= d.n_edges() {
        return Err(FaceError::NotPrincipal(e));
    }
    let ed = d.edge(e);
    let mask = (1u64 << ed.source) | (1u64 << ed.target);
    if classify_face(d, mask, false).kind != (FaceKind::Principal { edge: e }) {
        return Err(FaceError::NotPrincipal(e));
    }
    let pattern = principal_pattern(d, e);
    if nd.sigma(e) == 1 {
        let has_external_end = d.kind(ed.source) == Kind::External || d.kind(ed.target) == Kind::External;
        if ed.kind == Kind::Internal || has_external_end {
            return Ok(PrincipalOutcome::Vanishing { pattern });
        }
        if !sphere_factorization {
            return Ok(PrincipalOutcome::NeedsSphereFactorization { pattern });
        }
    }
    let partner = match pattern {
        PrincipalPattern::TrivalentPair => {
            let f = d.leg_into(ed.source).expect("trivalent vertex has a leg");
            let g = d.leg_into(ed.target).expect("trivalent vertex has a leg");
            nd.swap_labels(f, g)
        }
        _ => nd.with_diagram(rewrite(d, e, pattern)),
    };
    Ok(PrincipalOutcome::Partner { partner, edge: e, pattern })
}

#[cfg(test)]
mod tests {
    use super::super::faces;
    use super::*;
    use crate::diagram_enum::{enumerate, numberings};
    use std::collections::HashSet;

    fn principal_edges(d: &BcrDiagram) -> Vec<usize> {
        faces(d)
            .0
            .into_iter()
            .filter_map(|f| match f.kind {
                FaceKind::Principal { edge } => Some(edge),
                _ => None,
            })
            .collect()
    }

    #[test]
    fn every_pattern_occurs_and_ratios_match_the_table() {
        let mut seen = HashSet::new();
        for k in 1..=3 {
            for d in enumerate(k).unwrap() {
                for e in principal_edges(&d) {
                    let mut s: Vec<usize> = (1..=d.n_edges()).collect();
                    if e == 0 {
                        s.swap(0, 1);
                    }
                    let nd = NumberedDiagram::new(d.clone(), s).unwrap();
                    let out = principal_pairing(&nd, e, false).unwrap();
                    let PrincipalOutcome::Partner { partner, edge, pattern } = out else {
                        panic!("{d} e={e}: {out:?}")
                    };
                    seen.insert(pattern);
                    let ratio = partner.diagram().sign_epsilon() * d.sign_epsilon();
                    assert_eq!(ratio, pattern.epsilon_ratio(), "{d} e={e}");
                    assert_eq!(principal_pattern(partner.diagram(), edge), pattern.partner());
                    assert_eq!(partner.sigma(edge), nd.sigma(e));
                }
            }
        }
        assert_eq!(seen.len(), 9);
    }

    #[test]
    fn pairing_is_an_involution() {
        for k in 1..=3 {
            for d in enumerate(k).unwrap() {
                let edges = principal_edges(&d);
                for num in numberings(&d) {
                    let nd = NumberedDiagram::new(d.clone(), num).unwrap();
                    for &e in &edges {
                        for flag in [false, true] {
                            match principal_pairing(&nd, e, flag).unwrap() {
                                PrincipalOutcome::Partner { partner, edge, pattern } => {
                                    assert_ne!(partner, nd, "no fixed points");
                                    let back = principal_pairing(&partner, edge, flag).unwrap();
                                    assert_eq!(
                                        back,
                                        PrincipalOutcome::Partner { partner: nd.clone(), edge: e, pattern }
                                            .with_pattern(pattern.partner())
                                    );
                                }
                                PrincipalOutcome::Vanishing { .. } => assert_eq!(nd.sigma(e), 1),
                                PrincipalOutcome::NeedsSphereFactorization { pattern } => {
                                    assert!(!flag);
                                    assert_eq!(nd.sigma(e), 1);
                                    assert!(matches!(
                                        pattern,
                                        PrincipalPattern::LegIntoInternalTrivalent | PrincipalPattern::ExternalBetweenBivalents
                                    ));
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn vanishing_cases() {
        for k in 1..=3 {
            for d in enumerate(k).unwrap() {
                for e in principal_edges(&d) {
                    let mut s: Vec<usize> = (1..=d.n_edges()).collect();
                    s.swap(0, e);
                    let nd = NumberedDiagram::new(d.clone(), s).unwrap();
                    let ed = d.edge(e);
                    let external_end = d.kind(ed.source) == Kind::External || d.kind(ed.target) == Kind::External;
                    let out = principal_pairing(&nd, e, false).unwrap();
                    let vanishes = matches!(out, PrincipalOutcome::Vanishing { .. });
                    assert_eq!(vanishes, ed.kind == Kind::Internal || external_end, "{d} e={e}");
                }
            }
        }
    }

    #[test]
    fn non_principal_edges_are_rejected() {
        let d = &enumerate(1).unwrap()[0];
        let nd = NumberedDiagram::identity(d.clone());
        assert_eq!(principal_pairing(&nd, 0, false), Err(FaceError::NotPrincipal(0)));
        assert_eq!(principal_pairing(&nd, 7, false), Err(FaceError::NotPrincipal(7)));
    }

    impl PrincipalOutcome {
        fn with_pattern(self, p: PrincipalPattern) -> Self {
            match self {
                PrincipalOutcome::Partner { partner, edge, .. } => PrincipalOutcome::Partner { partner, edge, pattern: p },
                other => other,
            }
        }
    }
}
