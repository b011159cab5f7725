//! Coordinate layout of configuration spaces and the orientation sign.

use super::{BcrDiagram, Kind, NumberedDiagram};

/// Positions of each vertex's coordinates in the canonical order: vertices by
/// id, `n` parameters for an internal vertex, `n + 2` for an external one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigLayout {
    pub n: usize,
    pub offsets: Vec<usize>,
    pub dims: Vec<usize>,
    pub total: usize,
}

impl ConfigLayout {
    pub fn new(d: &BcrDiagram, n: usize) -> Self {
        Self::from_kinds(d.kinds(), n)
    }

    pub fn from_kinds(kinds: &[Kind], n: usize) -> Self {
        let mut offsets = Vec::with_capacity(kinds.len());
        let mut dims = Vec::with_capacity(kinds.len());
        let mut total = 0;
        for k in kinds {
            offsets.push(total);
            let d = k.coord_dim(n);
            dims.push(d);
            total += d;
        }
        ConfigLayout { n, offsets, dims, total }
    }

    pub fn range(&self, v: usize) -> std::ops::Range<usize> {
        self.offsets[v]..self.offsets[v] + self.dims[v]
    }
}

/// Canonical coordinate indices in the order the orientation form lists them:
/// for each external edge (by index), the coordinates of its tail half-edge
/// then those of its head half-edge.
pub fn orientation_order(d: &BcrDiagram, n: usize) -> Vec<usize> {
    let layout = ConfigLayout::new(d, n);
    let mut order = Vec::with_capacity(layout.total);
    for (i, e) in d.edges().iter().enumerate() {
        if e.kind != Kind::External {
            continue;
        }
        let tail = layout.offsets[e.source];
        match d.kind(e.source) {
            Kind::Internal => order.extend(tail..tail + n),
            Kind::External => order.extend(tail + 2..tail + n + 2),
        }
        let head = layout.offsets[e.target];
        match d.kind(e.target) {
            Kind::Internal => order.extend(head..head + n),
            Kind::External if d.is_leg(i) => order.push(head),
            Kind::External => order.push(head + 1),
        }
    }
    debug_assert_eq!(order.len(), layout.total);
    order
}

/// Parity of a permutation given as a sequence of distinct indices `0..len`.
pub(crate) fn permutation_sign(p: &[usize]) -> i8 {
    let mut seen = vec![false; p.len()];
    let mut sign = 1i8;
    for start in 0..p.len() {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            i = p[i];
            len += 1;
        }
        if len % 2 == 0 {
            sign = -sign;
        }
    }
    sign
}

/// `ε(Γ)` times the sign of the permutation from the canonical coordinate
/// order to the orientation-form order. Independent of the numbering.
pub fn orientation_sign_of(d: &BcrDiagram, n: usize) -> i8 {
    d.sign_epsilon() * permutation_sign(&orientation_order(d, n))
}

pub fn orientation_sign(d: &NumberedDiagram, n: usize) -> i8 {
    orientation_sign_of(d.diagram(), n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram_core::Edge;
    use Kind::{External as E, Internal as I};

    #[test]
    fn permutation_sign_of_transposition() {
        assert_eq!(permutation_sign(&[0, 1, 2]), 1);
        assert_eq!(permutation_sign(&[1, 0, 2]), -1);
        assert_eq!(permutation_sign(&[1, 2, 0]), 1);
    }

    #[test]
    fn order_covers_every_coordinate_once() {
        let d = BcrDiagram::new(
            vec![E, E, I, I],
            vec![Edge::new(0, 1, E), Edge::new(1, 0, E), Edge::new(2, 0, E), Edge::new(3, 1, E)],
        )
        .unwrap();
        for n in [3, 5] {
            let mut o = orientation_order(&d, n);
            o.sort_unstable();
            assert_eq!(o, (0..ConfigLayout::new(&d, n).total).collect::<Vec<_>>());
        }
    }

    #[test]
    fn identity_order_gives_epsilon() {
        // Degree one: the external edge 1 -> 0 lists Y_1 then Y_0, two n-blocks.
        let d = BcrDiagram::new(vec![I, I], vec![Edge::new(0, 1, I), Edge::new(1, 0, E)]).unwrap();
        // Swapping two odd blocks is an odd permutation.
        assert_eq!(orientation_sign_of(&d, 3), -d.sign_epsilon());
        let d = BcrDiagram::new(vec![I, I], vec![Edge::new(0, 1, E), Edge::new(1, 0, I)]).unwrap();
        assert_eq!(orientation_sign_of(&d, 3), d.sign_epsilon());
    }
}
