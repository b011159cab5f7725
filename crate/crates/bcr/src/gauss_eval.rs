//! Configurations, Gauss maps and the edge-direction map `P_Γ`.
//!
//! A configuration stores `n` knot parameters for every internal vertex and a
//! point of `ℝⁿ⁺²` for every external one, laid out by [`ConfigLayout`]. An
//! internal edge points along the parameter difference (in `S^{n-1}`), an
//! external edge along the difference of ambient images (in `S^{n+1}`).
//!
//! Jacobians are exact (chain rule through the symbolic knot derivative);
//! [`p_gamma_jacobian_fd`] is the finite-difference reference they are tested
//! against.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::diagram_core::{orientation_order, BcrDiagram, ConfigLayout, Kind};
use crate::knot_model::{EvalError, KnotSpec};
use crate::linalg::{dot, norm, tangent_frame, Matrix};
use crate::Scalar;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GaussError {
    #[error("coincident points ({0})")]
    Coincident(String),
    #[error("knot evaluation failed: {0}")]
    Eval(#[from] EvalError),
    #[error("configuration has {got} coordinates, layout needs {expected}")]
    Layout { expected: usize, got: usize },
    #[error("knot has n = {knot}, layout uses n = {layout}")]
    Dimension { knot: usize, layout: usize },
}

/// `(y − x)/‖y − x‖`.
pub fn gauss<T: Scalar>(x: &[T], y: &[T]) -> Result<Vec<T>, GaussError> {
    let u: Vec<T> = y.iter().zip(x).map(|(&a, &b)| a - b).collect();
    let l = norm(&u);
    if !(l > T::zero()) || !l.is_finite() {
        return Err(GaussError::Coincident("gauss map".into()));
    }
    Ok(u.into_iter().map(|v| v / l).collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct Configuration<T> {
    pub layout: ConfigLayout,
    pub coords: Vec<T>,
}

impl<T: Scalar> Configuration<T> {
    pub fn new(layout: ConfigLayout, coords: Vec<T>) -> Result<Self, GaussError> {
        if coords.len() != layout.total {
            return Err(GaussError::Layout { expected: layout.total, got: coords.len() });
        }
        Ok(Configuration { layout, coords })
    }

    pub fn zeros(layout: ConfigLayout) -> Self {
        let coords = vec![T::zero(); layout.total];
        Configuration { layout, coords }
    }

    /// Independent normal coordinates with standard deviation `spread`.
    pub fn random<R: Rng>(layout: ConfigLayout, rng: &mut R, spread: f64) -> Self {
        let coords = (0..layout.total).map(|_| T::lit(spread * rng.sample::<f64, _>(StandardNormal))).collect();
        Configuration { layout, coords }
    }

    pub fn n_vertices(&self) -> usize {
        self.layout.dims.len()
    }

    pub fn is_internal(&self, v: usize) -> bool {
        self.layout.dims[v] == self.layout.n
    }

    /// Knot parameter of an internal vertex, ambient point of an external one.
    pub fn point(&self, v: usize) -> &[T] {
        &self.coords[self.layout.range(v)]
    }

    /// Ambient image of every vertex.
    pub fn ambient(&self, knot: &KnotSpec) -> Result<Vec<Vec<T>>, GaussError> {
        Ok(Geometry::new(knot, self)?.positions)
    }

    /// Checks the distinctness invariants with separation `tol`.
    pub fn validate(&self, knot: &KnotSpec, tol: T) -> Result<(), GaussError> {
        let pos = self.ambient(knot)?;
        let nv = self.n_vertices();
        for v in 0..nv {
            for w in 0..v {
                let dist = |a: &[T], b: &[T]| norm(&a.iter().zip(b).map(|(&p, &q)| p - q).collect::<Vec<T>>());
                if !(dist(&pos[v], &pos[w]) > tol) {
                    return Err(GaussError::Coincident(format!("vertices {w} and {v}")));
                }
                if self.is_internal(v) && self.is_internal(w) && !(dist(self.point(v), self.point(w)) > tol) {
                    return Err(GaussError::Coincident(format!("parameters of {w} and {v}")));
                }
            }
        }
        Ok(())
    }

    /// The same configuration with every coordinate converted to `f64`.
    pub fn to_f64(&self) -> Configuration<f64> {
        Configuration { layout: self.layout.clone(), coords: self.coords.iter().map(|x| x.to_f64_lossy()).collect() }
    }
}

/// Ambient positions and knot derivatives at the internal vertices of one
/// configuration; shared between all diagrams evaluated on it.
#[derive(Clone, Debug)]
pub struct Geometry<T> {
    pub positions: Vec<Vec<T>>,
    pub knot_jacobians: Vec<Option<Matrix<T>>>,
}

impl<T: Scalar> Geometry<T> {
    pub fn new(knot: &KnotSpec, c: &Configuration<T>) -> Result<Self, GaussError> {
        if knot.n() != c.layout.n {
            return Err(GaussError::Dimension { knot: knot.n(), layout: c.layout.n });
        }
        let nv = c.n_vertices();
        let mut positions = Vec::with_capacity(nv);
        let mut knot_jacobians = Vec::with_capacity(nv);
        for v in 0..nv {
            if c.is_internal(v) {
                positions.push(knot.eval(c.point(v))?);
                knot_jacobians.push(Some(knot.jacobian(c.point(v))?));
            } else {
                positions.push(c.point(v).to_vec());
                knot_jacobians.push(None);
            }
        }
        Ok(Geometry { positions, knot_jacobians })
    }
}

fn check_layout<T>(d: &BcrDiagram, c: &Configuration<T>) {
    debug_assert_eq!(c.layout, ConfigLayout::new(d, c.layout.n), "configuration laid out for another diagram");
}

/// Difference vector of edge `e`: parameters for internal edges, ambient
/// images for external ones.
fn edge_vector<T: Scalar>(d: &BcrDiagram, c: &Configuration<T>, geo: &Geometry<T>, e: usize) -> Vec<T> {
    let edge = d.edge(e);
    let (x, y) = match edge.kind {
        Kind::Internal => (c.point(edge.source), c.point(edge.target)),
        Kind::External => (&geo.positions[edge.source][..], &geo.positions[edge.target][..]),
    };
    y.iter().zip(x).map(|(&a, &b)| a - b).collect()
}

pub fn edge_directions_with<T: Scalar>(
    d: &BcrDiagram,
    c: &Configuration<T>,
    geo: &Geometry<T>,
) -> Result<Vec<Vec<T>>, GaussError> {
    check_layout(d, c);
    (0..d.n_edges())
        .map(|e| {
            let u = edge_vector(d, c, geo, e);
            let l = norm(&u);
            if !(l > T::zero()) || !l.is_finite() {
                return Err(GaussError::Coincident(format!("edge {e}")));
            }
            Ok(u.into_iter().map(|x| x / l).collect())
        })
        .collect()
}

/// Unit direction of every edge, indexed by edge id (edge `e` carries label `σ(e)`).
pub fn edge_directions<T: Scalar>(
    d: &BcrDiagram,
    knot: &KnotSpec,
    c: &Configuration<T>,
) -> Result<Vec<Vec<T>>, GaussError> {
    edge_directions_with(d, c, &Geometry::new(knot, c)?)
}

/// Derivative of the edge directions read in the given frames.
///
/// Row block `e` is `F_eᵀ (I − d dᵀ)(∂y − ∂x)/‖y − x‖` where `F_e = frame(e, d_e)`
/// has `n(e)` columns; the projection is skipped when the frame is tangent at
/// `d_e`. Columns follow the canonical coordinate order. Also returns the
/// directions.
pub fn jacobian_in_frames<T: Scalar>(
    d: &BcrDiagram,
    c: &Configuration<T>,
    geo: &Geometry<T>,
    mut frame: impl FnMut(usize, &[T]) -> (Matrix<T>, bool),
) -> Result<(Matrix<T>, Vec<Vec<T>>), GaussError> {
    check_layout(d, c);
    let layout = &c.layout;
    let n = layout.n;
    let dim = layout.total;
    let mut jac = Matrix::zeros(dim, dim);
    let mut dirs = Vec::with_capacity(d.n_edges());
    let mut row0 = 0;
    for e in 0..d.n_edges() {
        let edge = d.edge(e);
        let u = edge_vector(d, c, geo, e);
        let l = norm(&u);
        if !(l > T::zero()) || !l.is_finite() {
            return Err(GaussError::Coincident(format!("edge {e}")));
        }
        let dir: Vec<T> = u.iter().map(|&x| x / l).collect();
        let (f, tangent) = frame(e, &dir);
        let m = dir.len();
        let rows = f.cols();
        debug_assert_eq!(rows, edge.kind.sphere_dim(n));
        // r = Fᵀ(I − ddᵀ)/l, an rows × m block
        let mut r = Matrix::zeros(rows, m);
        for a in 0..rows {
            let fa = f.column(a);
            let proj = if tangent { T::zero() } else { dot(&fa, &dir) };
            for b in 0..m {
                r[(a, b)] = (fa[b] - proj * dir[b]) / l;
            }
        }
        for (vertex, sign) in [(edge.target, T::one()), (edge.source, -T::one())] {
            let cols = layout.range(vertex);
            match (&geo.knot_jacobians[vertex], edge.kind) {
                (Some(jpsi), Kind::External) => {
                    let block = r.mul(jpsi);
                    for a in 0..rows {
                        for (b, col) in cols.clone().enumerate() {
                            jac[(row0 + a, col)] = jac[(row0 + a, col)] + sign * block[(a, b)];
                        }
                    }
                }
                _ => {
                    for a in 0..rows {
                        for (b, col) in cols.clone().enumerate() {
                            jac[(row0 + a, col)] = jac[(row0 + a, col)] + sign * r[(a, b)];
                        }
                    }
                }
            }
        }
        dirs.push(dir);
        row0 += rows;
    }
    debug_assert_eq!(row0, dim);
    Ok((jac, dirs))
}

/// `D × D` derivative of `P_Γ` in the deterministic tangent frames at the edge
/// directions; rows grouped by edge id, columns in canonical order.
pub fn p_gamma_jacobian<T: Scalar>(
    d: &BcrDiagram,
    knot: &KnotSpec,
    c: &Configuration<T>,
) -> Result<Matrix<T>, GaussError> {
    let geo = Geometry::new(knot, c)?;
    Ok(jacobian_in_frames(d, c, &geo, |_, dir| (tangent_frame(dir), true))?.0)
}

/// Central-difference version of [`p_gamma_jacobian`] with step `h`; frames
/// are taken at the unperturbed directions.
pub fn p_gamma_jacobian_fd(
    d: &BcrDiagram,
    knot: &KnotSpec,
    c: &Configuration<f64>,
    h: f64,
) -> Result<Matrix<f64>, GaussError> {
    let dirs = edge_directions(d, knot, c)?;
    let frames: Vec<Matrix<f64>> = dirs.iter().map(|x| tangent_frame(x)).collect();
    let dim = c.layout.total;
    let mut jac = Matrix::zeros(dim, dim);
    for j in 0..dim {
        let (mut cp, mut cm) = (c.clone(), c.clone());
        cp.coords[j] += h;
        cm.coords[j] -= h;
        let (dp, dm) = (edge_directions(d, knot, &cp)?, edge_directions(d, knot, &cm)?);
        let mut row = 0;
        for e in 0..d.n_edges() {
            let diff: Vec<f64> = dp[e].iter().zip(&dm[e]).map(|(a, b)| (a - b) / (2.0 * h)).collect();
            for a in 0..frames[e].cols() {
                jac[(row, j)] = dot(&frames[e].column(a), &diff);
                row += 1;
            }
        }
    }
    Ok(jac)
}

/// Reorders the columns of a canonical-order Jacobian into the order of the
/// orientation form.
pub fn oriented_columns<T: Scalar>(jac: &Matrix<T>, d: &BcrDiagram, n: usize) -> Matrix<T> {
    jac.select_columns(&orientation_order(d, n))
}

/// Componentwise `t = tan(πu/2)` from `(−1, 1)^D`, with `ln |dt/du|`.
pub fn domain_chart<T: Scalar>(layout: &ConfigLayout, u: &[T]) -> (Configuration<T>, T) {
    assert_eq!(u.len(), layout.total);
    let half_pi = T::lit(std::f64::consts::FRAC_PI_2);
    let ln_half_pi = half_pi.ln();
    let mut log_jac = T::zero();
    let coords = u
        .iter()
        .map(|&x| {
            let a = half_pi * x;
            let cos = a.cos();
            log_jac = log_jac + ln_half_pi - T::lit(2.0) * cos.abs().ln();
            a.sin() / cos
        })
        .collect();
    (Configuration { layout: layout.clone(), coords }, log_jac)
}

/// Volume of the chart's domain cube, `2^D`.
pub fn cube_volume<T: Scalar>(dim: usize) -> T {
    T::lit(2.0).powi(dim as i32)
}

/// `2k` unit vectors in `S^{n−1}` and in `S^{n+1}`, one of each per label.
#[derive(Clone, Debug, PartialEq)]
pub struct DirectionFamily<T> {
    pub internal: Vec<Vec<T>>,
    pub external: Vec<Vec<T>>,
    pub seed: u64,
}

fn random_unit<R: Rng>(rng: &mut R, m: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
        let l = norm(&v);
        if l > 1e-6 {
            return v.into_iter().map(|x| x / l).collect();
        }
    }
}

impl<T: Scalar> DirectionFamily<T> {
    /// Uniform samples on the spheres, reproducible from `seed`.
    pub fn sample(k: usize, n: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let conv = |v: Vec<f64>| v.into_iter().map(T::lit).collect::<Vec<T>>();
        let internal = (0..2 * k).map(|_| conv(random_unit(&mut rng, n))).collect();
        let external = (0..2 * k).map(|_| conv(random_unit(&mut rng, n + 2))).collect();
        DirectionFamily { internal, external, seed }
    }

    /// Vector attached to label `label` (1-based) on the sphere of `kind`.
    pub fn get(&self, kind: Kind, label: usize) -> &[T] {
        match kind {
            Kind::Internal => &self.internal[label - 1],
            Kind::External => &self.external[label - 1],
        }
    }

    pub fn degree(&self) -> usize {
        self.internal.len() / 2
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram_enum::enumerate;
    use crate::knot_model::{perturbed_unknot, trivial};
    use approx::assert_relative_eq;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(11)
    }

    #[test]
    fn gauss_basics() {
        assert_eq!(gauss(&[0.0, 0.0, 0.0], &[1.0, 0.0, 0.0]).unwrap(), vec![1.0, 0.0, 0.0]);
        assert!(gauss(&[1.0, 2.0], &[1.0, 2.0]).is_err());
        let mut r = rng();
        for _ in 0..10_000 {
            let x: Vec<f64> = (0..5).map(|_| r.random::<f64>() - 0.5).collect();
            let y: Vec<f64> = (0..5).map(|_| r.random::<f64>() - 0.5).collect();
            let (a, b) = (gauss(&x, &y).unwrap(), gauss(&y, &x).unwrap());
            let lam = 0.1 + 10.0 * r.random::<f64>();
            let xs: Vec<f64> = x.iter().map(|v| v * lam).collect();
            let ys: Vec<f64> = y.iter().map(|v| v * lam).collect();
            let s = gauss(&xs, &ys).unwrap();
            for i in 0..5 {
                assert_eq!(a[i], -b[i]);
                assert!((a[i] - s[i]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn internal_edges_follow_parameters() {
        let t = trivial(3);
        let mut r = rng();
        for d in enumerate(2).unwrap() {
            let layout = ConfigLayout::new(&d, 3);
            let c = Configuration::<f64>::random(layout.clone(), &mut r, 1.0);
            let dirs = edge_directions(&d, &t, &c).unwrap();
            for e in 0..d.n_edges() {
                let edge = d.edge(e);
                assert_relative_eq!(norm(&dirs[e]), 1.0, epsilon = 1e-14);
                if edge.kind == Kind::Internal {
                    assert_eq!(dirs[e], gauss(c.point(edge.source), c.point(edge.target)).unwrap());
                }
            }
            // translating every parameter, and every external point along ℝⁿ, changes nothing
            let mut moved = c.clone();
            let shift = [0.3, -1.1, 0.7];
            for v in 0..d.n_vertices() {
                let off = if c.is_internal(v) { 0 } else { 2 };
                for i in 0..3 {
                    moved.coords[layout.offsets[v] + off + i] += shift[i];
                }
            }
            let dirs2 = edge_directions(&d, &t, &moved).unwrap();
            for (a, b) in dirs.iter().flatten().zip(dirs2.iter().flatten()) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn analytic_jacobian_matches_differences() {
        let k = perturbed_unknot(3);
        let mut r = rng();
        for d in enumerate(2).unwrap() {
            for _ in 0..20 {
                let c = Configuration::<f64>::random(ConfigLayout::new(&d, 3), &mut r, 0.6);
                let a = p_gamma_jacobian(&d, &k, &c).unwrap();
                let b = p_gamma_jacobian_fd(&d, &k, &c, 1e-5).unwrap();
                let scale = a.max_abs();
                for i in 0..a.rows() {
                    for j in 0..a.cols() {
                        assert!((a[(i, j)] - b[(i, j)]).abs() < 1e-6 * scale, "{d} {i},{j}");
                    }
                }
            }
        }
    }

    #[test]
    fn step_halving_is_second_order() {
        let k = perturbed_unknot(3);
        let d = &enumerate(2).unwrap()[0];
        let c = Configuration::<f64>::random(ConfigLayout::new(d, 3), &mut rng(), 0.6);
        let exact = p_gamma_jacobian(d, &k, &c).unwrap();
        let err = |h: f64| {
            let fd = p_gamma_jacobian_fd(d, &k, &c, h).unwrap();
            (0..exact.rows())
                .flat_map(|i| (0..exact.cols()).map(move |j| (i, j)))
                .fold(0.0f64, |m, (i, j)| m.max((fd[(i, j)] - exact[(i, j)]).abs()))
        };
        let (e1, e2) = (err(2e-3), err(1e-3));
        assert!(e2 < e1 / 3.0, "{e1} {e2}");
    }

    #[test]
    fn trivial_knot_jacobians_are_singular() {
        let t = trivial(3);
        let mut r = rng();
        for d in enumerate(2).unwrap() {
            for _ in 0..50 {
                let c = Configuration::<f64>::random(ConfigLayout::new(&d, 3), &mut r, 1.0);
                let j = p_gamma_jacobian(&d, &t, &c).unwrap();
                assert!(j.rank(1e-9) <= j.rows() - 3);
                assert!(j.det_with_rank_check(crate::linalg::default_pivot_tol()).singular);
            }
        }
    }

    #[test]
    fn jacobians_are_bit_reproducible() {
        let k = perturbed_unknot(3);
        let d = &enumerate(2).unwrap()[2];
        let c = Configuration::<f64>::random(ConfigLayout::new(d, 3), &mut rng(), 0.6);
        let a = p_gamma_jacobian(d, &k, &c).unwrap();
        let b = p_gamma_jacobian(d, &k, &c).unwrap();
        assert_eq!(format!("{a:?}"), format!("{b:?}"));
    }

    #[test]
    fn single_precision_agrees() {
        let k = perturbed_unknot(3);
        let d = &enumerate(2).unwrap()[1];
        let c = Configuration::<f64>::random(ConfigLayout::new(d, 3), &mut rng(), 0.6);
        let c32 = Configuration { layout: c.layout.clone(), coords: c.coords.iter().map(|&x| x as f32).collect() };
        let a = p_gamma_jacobian(d, &k, &c).unwrap();
        let b = p_gamma_jacobian(d, &k, &c32).unwrap();
        for i in 0..a.rows() {
            for j in 0..a.cols() {
                assert!((a[(i, j)] - b[(i, j)] as f64).abs() < 1e-3 * a.max_abs());
            }
        }
    }

    #[test]
    fn chart_basics() {
        let layout = ConfigLayout::new(&enumerate(2).unwrap()[0], 3);
        let (c, lj) = domain_chart(&layout, &vec![0.0; layout.total]);
        assert!(c.coords.iter().all(|&x| x == 0.0));
        assert_relative_eq!(lj, layout.total as f64 * std::f64::consts::FRAC_PI_2.ln(), epsilon = 1e-12);
        let mut r = rng();
        for _ in 0..100 {
            let u: Vec<f64> = (0..layout.total).map(|_| 1.8 * r.random::<f64>() - 0.9).collect();
            let (_, lj) = domain_chart(&layout, &u);
            // the chart is diagonal: product of one-dimensional differences
            let h = 1e-6;
            let mut fd = 0.0;
            for i in 0..u.len() {
                let (mut up, mut um) = (u.clone(), u.clone());
                up[i] += h;
                um[i] -= h;
                let (cp, _) = domain_chart(&layout, &up);
                let (cm, _) = domain_chart(&layout, &um);
                fd += ((cp.coords[i] - cm.coords[i]) / (2.0 * h)).ln();
            }
            assert!((lj.exp() / fd.exp() - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn direction_families_are_unit_and_seeded() {
        let a = DirectionFamily::<f64>::sample(3, 3, 5);
        let b = DirectionFamily::<f64>::sample(3, 3, 5);
        assert_eq!(a, b);
        assert_eq!(a.internal.len(), 6);
        assert!(a.internal.iter().all(|v| v.len() == 3 && (norm(v) - 1.0).abs() < 1e-14));
        assert!(a.external.iter().all(|v| v.len() == 5 && (norm(v) - 1.0).abs() < 1e-14));
        assert_ne!(a, DirectionFamily::sample(3, 3, 6));
    }

    #[test]
    fn validation_catches_coincidences() {
        let d = &enumerate(2).unwrap()[0];
        let c = Configuration::<f64>::zeros(ConfigLayout::new(d, 3));
        assert!(c.validate(&trivial(3), 1e-9).is_err());
        assert!(edge_directions(d, &trivial(3), &c).is_err());
        let r = Configuration::<f64>::random(ConfigLayout::new(d, 3), &mut rng(), 1.0);
        assert!(r.validate(&trivial(3), 1e-9).is_ok());
    }
}
