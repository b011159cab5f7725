//! Canonical labelling by colour refinement and exhaustive individualisation.
//!
//! Every leaf of the search tree is a discrete partition, i.e. a relabelling.
//! The smallest encoding over all leaves is the canonical key, and the leaves
//! reaching it differ by automorphisms, so their number is `|Aut|`.

use super::{BcrDiagram, Kind};

/// Encoding of a relabelled diagram: vertex kinds, then sorted `(src, dst, kind)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalKey(pub Vec<u16>);

pub(crate) struct Canonical {
    pub key: CanonicalKey,
    /// `perm[old] = new` for the first leaf reaching the key.
    pub perm: Vec<usize>,
    /// All leaves reaching the key.
    pub leaves: Vec<Vec<usize>>,
}

/// Automorphism group of a diagram, as vertex permutations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Automorphisms {
    pub order: usize,
    /// A generating set; empty for the trivial group.
    pub generators: Vec<Vec<usize>>,
    /// Every element, identity first.
    pub elements: Vec<Vec<usize>>,
}

fn kind_code(k: Kind) -> u16 {
    match k {
        Kind::Internal => 0,
        Kind::External => 1,
    }
}

fn encode(d: &BcrDiagram, perm: &[usize]) -> CanonicalKey {
    let nv = d.n_vertices();
    let mut key = vec![0u16; nv];
    for v in 0..nv {
        key[perm[v]] = kind_code(d.kind(v));
    }
    let mut edges: Vec<[u16; 3]> = d
        .edges()
        .iter()
        .map(|e| [perm[e.source] as u16, perm[e.target] as u16, kind_code(e.kind)])
        .collect();
    edges.sort_unstable();
    key.extend(edges.into_iter().flatten());
    CanonicalKey(key)
}

/// Replaces colours by the rank of their signature; keeps the cell order.
fn rank<T: Ord + Clone>(sigs: &[T]) -> Vec<usize> {
    let mut uniq: Vec<T> = sigs.to_vec();
    uniq.sort();
    uniq.dedup();
    sigs.iter().map(|s| uniq.binary_search(s).expect("present")).collect()
}

fn refine(d: &BcrDiagram, mut colours: Vec<usize>) -> Vec<usize> {
    let nv = d.n_vertices();
    let mut cells = count_cells(&colours);
    loop {
        let sigs: Vec<(usize, Vec<(u8, u16, usize)>)> = (0..nv)
            .map(|v| {
                let mut nb: Vec<(u8, u16, usize)> = d
                    .adjacent_edges(v)
                    .map(|e| {
                        let ed = d.edge(e);
                        if ed.source == v {
                            (1, kind_code(ed.kind), colours[ed.target])
                        } else {
                            (0, kind_code(ed.kind), colours[ed.source])
                        }
                    })
                    .collect();
                nb.sort_unstable();
                (colours[v], nb)
            })
            .collect();
        colours = rank(&sigs);
        let c = count_cells(&colours);
        if c == cells {
            return colours;
        }
        cells = c;
    }
}

fn count_cells(colours: &[usize]) -> usize {
    let mut c = colours.to_vec();
    c.sort_unstable();
    c.dedup();
    c.len()
}

fn initial_colours(d: &BcrDiagram) -> Vec<usize> {
    let sigs: Vec<(u16, usize, u8)> =
        (0..d.n_vertices()).map(|v| (kind_code(d.kind(v)), d.in_edges(v).len(), d.rule(v).index())).collect();
    rank(&sigs)
}

fn search(d: &BcrDiagram, colours: Vec<usize>, best: &mut Option<Canonical>) {
    let nv = d.n_vertices();
    let colours = refine(d, colours);
    // first non-singleton cell, in colour order
    let mut sizes = vec![0usize; nv];
    for &c in &colours {
        sizes[c] += 1;
    }
    let target = (0..nv).find(|&c| sizes[c] > 1);
    match target {
        None => {
            let key = encode(d, &colours);
            match best {
                Some(b) if key > b.key => {}
                Some(b) if key == b.key => b.leaves.push(colours),
                _ => *best = Some(Canonical { key, perm: colours.clone(), leaves: vec![colours] }),
            }
        }
        Some(cell) => {
            for v in (0..nv).filter(|&v| colours[v] == cell) {
                let sigs: Vec<(usize, u8)> =
                    (0..nv).map(|u| (colours[u], u8::from(colours[u] == cell && u != v))).collect();
                search(d, rank(&sigs), best);
            }
        }
    }
}

pub(crate) fn canonical(d: &BcrDiagram) -> Canonical {
    let mut best = None;
    search(d, initial_colours(d), &mut best);
    best.expect("search reaches at least one leaf")
}

fn compose(a: &[usize], b: &[usize]) -> Vec<usize> {
    // (a ∘ b)(v) = a(b(v))
    b.iter().map(|&x| a[x]).collect()
}

fn invert(p: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; p.len()];
    for (i, &x) in p.iter().enumerate() {
        inv[x] = i;
    }
    inv
}

fn closure(gens: &[Vec<usize>], nv: usize) -> Vec<Vec<usize>> {
    let id: Vec<usize> = (0..nv).collect();
    let mut elems = vec![id];
    let mut i = 0;
    while i < elems.len() {
        for g in gens {
            let h = compose(g, &elems[i]);
            if !elems.contains(&h) {
                elems.push(h);
            }
        }
        i += 1;
    }
    elems
}

pub(crate) fn automorphisms(d: &BcrDiagram) -> Automorphisms {
    let c = canonical(d);
    let nv = d.n_vertices();
    let p0_inv = invert(&c.perm);
    let mut elements: Vec<Vec<usize>> = c.leaves.iter().map(|p| compose(&p0_inv, p)).collect();
    elements.sort();
    let id: Vec<usize> = (0..nv).collect();
    elements.retain(|g| *g != id);
    elements.insert(0, id);

    let mut generators: Vec<Vec<usize>> = Vec::new();
    let mut generated = closure(&generators, nv);
    for g in elements.iter().skip(1) {
        if !generated.contains(g) {
            generators.push(g.clone());
            generated = closure(&generators, nv);
        }
    }
    Automorphisms { order: elements.len(), generators, elements }
}

#[cfg(test)]
mod tests {
    use super::super::{BcrDiagram, Edge, Kind};
    use Kind::{External as E, Internal as I};

    fn is_automorphism(d: &BcrDiagram, p: &[usize]) -> bool {
        let mut a: Vec<(usize, usize, Kind)> = d.edges().iter().map(|e| (p[e.source], p[e.target], e.kind)).collect();
        let mut b: Vec<(usize, usize, Kind)> = d.edges().iter().map(|e| (e.source, e.target, e.kind)).collect();
        a.sort();
        b.sort();
        a == b && (0..d.n_vertices()).all(|v| d.kind(p[v]) == d.kind(v))
    }

    fn all_perms(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in all_perms(n - 1) {
            for pos in 0..n {
                let mut q = p.clone();
                q.insert(pos, n - 1);
                out.push(q);
            }
        }
        out
    }

    fn samples() -> Vec<BcrDiagram> {
        vec![
            BcrDiagram::new(vec![I, I], vec![Edge::new(0, 1, I), Edge::new(1, 0, E)]).unwrap(),
            BcrDiagram::new(
                vec![I, I, I, I],
                vec![Edge::new(0, 1, I), Edge::new(1, 2, E), Edge::new(2, 3, I), Edge::new(3, 0, E)],
            )
            .unwrap(),
            BcrDiagram::new(
                vec![E, E, I, I],
                vec![Edge::new(0, 1, E), Edge::new(1, 0, E), Edge::new(2, 0, E), Edge::new(3, 1, E)],
            )
            .unwrap(),
        ]
    }

    #[test]
    fn group_order_matches_exhaustive_permutation_check() {
        for d in samples() {
            let brute = all_perms(d.n_vertices()).iter().filter(|p| is_automorphism(&d, p)).count();
            let aut = d.automorphisms();
            assert_eq!(aut.order, brute, "{d}");
            assert!(aut.elements.iter().all(|g| is_automorphism(&d, g)));
            assert_eq!(aut.elements[0], (0..d.n_vertices()).collect::<Vec<_>>());
        }
    }

    #[test]
    fn degree_one_has_trivial_group() {
        assert_eq!(samples()[0].automorphisms().order, 1);
        assert!(samples()[0].automorphisms().generators.is_empty());
    }

    #[test]
    fn key_is_invariant_under_relabelling() {
        for d in samples() {
            let key = d.canonical_key();
            for p in all_perms(d.n_vertices()) {
                assert_eq!(d.relabel(&p).canonical_key(), key);
            }
        }
    }
}
