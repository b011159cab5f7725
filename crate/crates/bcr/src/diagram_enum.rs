//! Enumeration of BCR diagrams and numbered BCR diagrams up to isomorphism.
//!
//! A diagram is its cycle plus legs. Reading the cycle in its direction gives
//! a cyclic word over four letters, one per non-univalent vertex:
//!
//! | letter | vertex | in (cycle) | out |
//! |---|---|---|---|
//! | `X` | external trivalent, carries a leg | external | external |
//! | `T` | internal trivalent, carries a leg | internal | internal |
//! | `A` | internal bivalent | external | internal |
//! | `B` | internal bivalent | internal | external |
//!
//! Consecutive letters must agree on the kind of the edge between them, and a
//! word of length `L` with `m` legs has degree `(L + m) / 2`.

use std::collections::BTreeMap;

use crate::diagram_core::{BcrDiagram, CanonicalKey, Edge, Kind, NumberedDiagram};

/// Default upper bound on the degree accepted by the enumerators.
pub const DEFAULT_K_MAX: usize = 5;

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum EnumError {
    #[error("degree must be at least 1")]
    ZeroDegree,
    #[error("degree {k} exceeds the enumeration limit {limit}")]
    ResourceLimit { k: usize, limit: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Letter {
    X,
    T,
    A,
    B,
}

impl Letter {
    const ALL: [Letter; 4] = [Letter::X, Letter::T, Letter::A, Letter::B];

    fn out_kind(self) -> Kind {
        match self {
            Letter::X | Letter::B => Kind::External,
            Letter::T | Letter::A => Kind::Internal,
        }
    }

    fn in_kind(self) -> Kind {
        match self {
            Letter::X | Letter::A => Kind::External,
            Letter::T | Letter::B => Kind::Internal,
        }
    }

    fn has_leg(self) -> bool {
        matches!(self, Letter::X | Letter::T)
    }

    fn vertex_kind(self) -> Kind {
        match self {
            Letter::X => Kind::External,
            _ => Kind::Internal,
        }
    }
}

/// The diagram spelled by a cyclic word: cycle vertices `0..L` in order, then
/// one univalent vertex per leg.
pub fn diagram_from_word(word: &[Letter]) -> BcrDiagram {
    let l = word.len();
    let mut kinds: Vec<Kind> = word.iter().map(|w| w.vertex_kind()).collect();
    let mut edges: Vec<Edge> = (0..l).map(|i| Edge::new(i, (i + 1) % l, word[i].out_kind())).collect();
    for (i, w) in word.iter().enumerate() {
        if w.has_leg() {
            let u = kinds.len();
            kinds.push(Kind::Internal);
            edges.push(Edge::new(u, i, Kind::External));
        }
    }
    BcrDiagram::new(kinds, edges).expect("words with matching letters spell valid diagrams")
}

fn check_degree(k: usize, limit: usize) -> Result<(), EnumError> {
    if k == 0 {
        return Err(EnumError::ZeroDegree);
    }
    if k > limit {
        return Err(EnumError::ResourceLimit { k, limit });
    }
    Ok(())
}

/// All admissible cyclic words of degree `k` (every rotation included).
pub fn cycle_words(k: usize) -> Vec<Vec<Letter>> {
    let mut out = Vec::new();
    for l in 2..=2 * k {
        let legs = 2 * k - l;
        let mut word = Vec::with_capacity(l);
        extend_words(&mut word, l, legs, &mut out);
    }
    out
}

fn extend_words(word: &mut Vec<Letter>, l: usize, legs: usize, out: &mut Vec<Vec<Letter>>) {
    let used = word.iter().filter(|w| w.has_leg()).count();
    if word.len() == l {
        if used == legs && word[l - 1].out_kind() == word[0].in_kind() {
            out.push(word.clone());
        }
        return;
    }
    for c in Letter::ALL {
        if let Some(prev) = word.last() {
            if prev.out_kind() != c.in_kind() {
                continue;
            }
        }
        let extra = usize::from(c.has_leg());
        if used + extra > legs || legs - used - extra > l - word.len() - 1 {
            continue;
        }
        word.push(c);
        extend_words(word, l, legs, out);
        word.pop();
    }
}

/// One canonical representative per isomorphism class of degree-`k` diagrams,
/// sorted by canonical key.
pub fn enumerate(k: usize) -> Result<Vec<BcrDiagram>, EnumError> {
    enumerate_with_limit(k, DEFAULT_K_MAX)
}

pub fn enumerate_with_limit(k: usize, limit: usize) -> Result<Vec<BcrDiagram>, EnumError> {
    check_degree(k, limit)?;
    let mut classes: BTreeMap<CanonicalKey, BcrDiagram> = BTreeMap::new();
    for w in cycle_words(k) {
        let (c, _) = diagram_from_word(&w).canonical_form();
        classes.entry(c.canonical_key()).or_insert(c);
    }
    Ok(classes.into_values().collect())
}

/// Representatives of the numberings of `d` modulo its automorphisms, in
/// lexicographic order of the numbering.
pub fn numberings(d: &BcrDiagram) -> Vec<Vec<usize>> {
    let aut = d.automorphisms();
    let edge_perms: Vec<Vec<usize>> = aut.elements.iter().skip(1).map(|g| d.edge_image(g, d)).collect();
    let m = d.n_edges();
    let mut out = Vec::new();
    let mut sigma: Vec<usize> = (1..=m).collect();
    loop {
        // σ is kept when it is the smallest numbering in its orbit σ ∘ γ.
        let minimal = edge_perms.iter().all(|g| {
            let other: Vec<usize> = (0..m).map(|e| sigma[g[e]]).collect();
            other >= sigma
        });
        if minimal {
            out.push(sigma.clone());
        }
        if !next_permutation(&mut sigma) {
            break;
        }
    }
    out
}

/// All numbered diagrams of degree `k` up to numbered isomorphism.
pub fn enumerate_numbered(k: usize) -> Result<Vec<NumberedDiagram>, EnumError> {
    Ok(enumerate(k)?
        .into_iter()
        .flat_map(|d| {
            numberings(&d).into_iter().map(move |s| NumberedDiagram::new(d.clone(), s).expect("bijection"))
        })
        .collect())
}

pub(crate) fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

pub fn factorial(n: usize) -> usize {
    (1..=n).product()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn degree_one_is_the_two_cycle() {
        let ds = enumerate(1).unwrap();
        assert_eq!(ds.len(), 1);
        let d = &ds[0];
        assert_eq!(d.cycle_and_legs().edges.len(), 2);
        assert_eq!(d.internal_edge_count(), 1);
        assert_eq!(d.automorphisms().order, 1);
    }

    #[test]
    fn degree_two_census() {
        let ds = enumerate(2).unwrap();
        assert_eq!(ds.len(), 5);
        let mut legs: Vec<usize> = ds.iter().map(|d| d.cycle_and_legs().legs.len()).collect();
        legs.sort_unstable();
        assert_eq!(legs, vec![0, 1, 1, 2, 2]);
    }

    #[test]
    fn numbered_counts_follow_automorphism_orders() {
        for k in 1..=3 {
            for d in enumerate(k).unwrap() {
                let a = d.automorphisms().order;
                let nums = numberings(&d);
                assert_eq!(nums.len() * a, factorial(2 * k), "{d}");
                let keys: HashSet<NumberedDiagram> = nums
                    .into_iter()
                    .map(|s| NumberedDiagram::new(d.clone(), s).unwrap().canonical_form())
                    .collect();
                assert_eq!(keys.len() * a, factorial(2 * k));
            }
        }
    }

    #[test]
    fn degree_two_has_84_numbered_classes() {
        assert_eq!(enumerate_numbered(2).unwrap().len(), 84);
    }

    #[test]
    fn limits_are_enforced() {
        assert_eq!(enumerate(0), Err(EnumError::ZeroDegree));
        assert_eq!(enumerate(6), Err(EnumError::ResourceLimit { k: 6, limit: 5 }));
        assert!(enumerate_with_limit(6, 6).is_ok());
    }

    #[test]
    fn words_of_degree_two() {
        let mut words: Vec<String> = cycle_words(2)
            .into_iter()
            .map(|w| w.iter().map(|l| format!("{l:?}")).collect())
            .collect();
        words.sort();
        // ABAB and BABA, the three rotations of ATB and of BXA, TT, XX
        assert_eq!(words.len(), 2 + 3 + 3 + 1 + 1);
    }
}
