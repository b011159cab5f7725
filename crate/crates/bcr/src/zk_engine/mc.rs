//! The configuration-space integrand and its Monte Carlo integration.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{Propagators, ZkError};
use crate::diagram_core::{orientation_sign_of, BcrDiagram, ConfigLayout, NumberedDiagram};
use crate::gauss_eval::{cube_volume, domain_chart, jacobian_in_frames, Configuration, Geometry};
use crate::knot_model::KnotSpec;
use crate::linalg::{default_pivot_tol, tangent_frame};
use crate::Scalar;

/// Samples per reduction chunk. Chunks are summed in index order, so the
/// result does not depend on how they are scheduled.
pub const CHUNK: usize = 1024;

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct Estimate<T> {
    pub mean: T,
    pub stderr: T,
    pub samples: usize,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegrandValue<T> {
    pub value: T,
    /// Coincident points or a non-finite intermediate; `value` is then 0.
    pub degenerate: bool,
}

/// Running mean and squared deviation.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Moments<T> {
    pub count: usize,
    pub mean: T,
    pub m2: T,
}

impl<T: Scalar> Default for Moments<T> {
    fn default() -> Self {
        Moments { count: 0, mean: T::zero(), m2: T::zero() }
    }
}

impl<T: Scalar> Moments<T> {
    pub fn push(&mut self, x: T) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean = self.mean + delta / T::lit(self.count as f64);
        self.m2 = self.m2 + delta * (x - self.mean);
    }

    pub fn merge(&mut self, o: &Moments<T>) {
        if o.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *o;
            return;
        }
        let (na, nb) = (T::lit(self.count as f64), T::lit(o.count as f64));
        let n = na + nb;
        let delta = o.mean - self.mean;
        self.mean = self.mean + delta * nb / n;
        self.m2 = self.m2 + o.m2 + delta * delta * na * nb / n;
        self.count += o.count;
    }

    /// Sample standard deviation over `√count`.
    pub fn stderr(&self) -> T {
        if self.count < 2 {
            return T::zero();
        }
        let c = T::lit(self.count as f64);
        (self.m2 / (c - T::one())).sqrt() / c.sqrt()
    }

    pub fn estimate(&self, seed: u64) -> Estimate<T> {
        Estimate { mean: self.mean, stderr: self.stderr(), samples: self.count, seed }
    }
}

/// Counter-based stream: key from `(seed, task)`, stream id = sample index.
pub fn sample_rng(seed: u64, task: u64, index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&task.to_le_bytes());
    key[16..22].copy_from_slice(b"zk-mc\0");
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng
}

/// A diagram with its orientation sign, ready to be evaluated on many
/// configurations.
#[derive(Clone, Debug)]
pub struct DiagramEval {
    pub diagram: BcrDiagram,
    pub sign: i8,
}

impl DiagramEval {
    pub fn new(diagram: BcrDiagram, n: usize) -> Self {
        let sign = orientation_sign_of(&diagram, n);
        DiagramEval { diagram, sign }
    }

    /// `orientation_sign · det P_Γ'` (snapped to exactly 0 when numerically
    /// singular) and the edge directions; `None` on coincident points.
    pub fn signed_det<T: Scalar>(&self, c: &Configuration<T>, geo: &Geometry<T>) -> Option<(T, Vec<Vec<T>>)> {
        let (jac, dirs) = jacobian_in_frames(&self.diagram, c, geo, |_, d| (tangent_frame(d), true)).ok()?;
        let det = jac.det_with_rank_check(default_pivot_tol::<T>());
        if !det.value.is_finite() {
            return None;
        }
        Some((T::lit(self.sign as f64) * det.value, dirs))
    }

    /// Product of the propagator densities of the labelling `sigma`.
    pub fn density<T: Scalar>(&self, props: &Propagators<T>, sigma: &[usize], dirs: &[Vec<T>]) -> T {
        (0..self.diagram.n_edges())
            .fold(T::one(), |acc, e| acc * props.get(self.diagram.edge(e).kind, sigma[e]).eval(&dirs[e]))
    }
}

/// `ω(Γ, σ, ψ)` at `c`: orientation sign × det of `P_Γ'` × densities.
pub fn integrand<T: Scalar>(
    nd: &NumberedDiagram,
    knot: &KnotSpec,
    c: &Configuration<T>,
    props: &Propagators<T>,
) -> IntegrandValue<T> {
    let eval = DiagramEval::new(nd.diagram().clone(), knot.n());
    let degenerate = IntegrandValue { value: T::zero(), degenerate: true };
    let Ok(geo) = Geometry::new(knot, c) else { return degenerate };
    let Some((det, dirs)) = eval.signed_det(c, &geo) else { return degenerate };
    if det == T::zero() {
        return IntegrandValue { value: T::zero(), degenerate: false };
    }
    let value = det * eval.density(props, nd.numbering(), &dirs);
    if value.is_finite() {
        IntegrandValue { value, degenerate: false }
    } else {
        degenerate
    }
}

/// All labellings of one diagram, integrated on shared samples.
#[derive(Clone, Debug)]
pub(crate) struct Group {
    pub eval: DiagramEval,
    pub reversed: Option<DiagramEval>,
    pub sigmas: Vec<Vec<usize>>,
    pub task: u64,
}

#[derive(Clone, Debug)]
pub(crate) struct GroupStats<T> {
    /// One entry per labelling.
    pub per_sigma: Vec<Moments<T>>,
    /// Sum over the labellings, sample by sample.
    pub total: Moments<T>,
    pub degenerate: usize,
}

pub(crate) fn run_group<T: Scalar>(
    group: &Group,
    knot: &KnotSpec,
    props: &Propagators<T>,
    samples: usize,
    seed: u64,
) -> GroupStats<T> {
    let layout = ConfigLayout::new(&group.eval.diagram, knot.n());
    let dim = layout.total;
    let cube: T = cube_volume(dim);
    let nsig = group.sigmas.len();
    let half = T::lit(0.5);
    let chunks = samples.div_ceil(CHUNK);
    let partial: Vec<GroupStats<T>> = (0..chunks)
        .into_par_iter()
        .map(|ci| {
            let mut st =
                GroupStats { per_sigma: vec![Moments::default(); nsig], total: Moments::default(), degenerate: 0 };
            let mut vals = vec![T::zero(); nsig];
            for j in ci * CHUNK..((ci + 1) * CHUNK).min(samples) {
                let mut rng = sample_rng(seed, group.task, j as u64);
                let u: Vec<T> = (0..dim).map(|_| T::lit(2.0 * rng.random::<f64>() - 1.0)).collect();
                let (c, log_jac) = domain_chart(&layout, &u);
                vals.iter_mut().for_each(|v| *v = T::zero());
                let mut degenerate = false;
                match Geometry::new(knot, &c) {
                    Ok(geo) => {
                        let fwd = group.eval.signed_det(&c, &geo);
                        let rev = group.reversed.as_ref().map(|r| r.signed_det(&c, &geo));
                        let weight = log_jac.exp() * cube;
                        match (fwd, rev) {
                            (Some((det, dirs)), None) => {
                                for (v, sigma) in vals.iter_mut().zip(&group.sigmas) {
                                    if det != T::zero() {
                                        *v = det * group.eval.density(props, sigma, &dirs) * weight;
                                    }
                                }
                            }
                            (Some((det, dirs)), Some(Some((rdet, rdirs)))) => {
                                let r = group.reversed.as_ref().expect("reversed diagram");
                                for (v, sigma) in vals.iter_mut().zip(&group.sigmas) {
                                    let a = if det != T::zero() { det * group.eval.density(props, sigma, &dirs) } else { T::zero() };
                                    let b = if rdet != T::zero() { rdet * r.density(props, sigma, &rdirs) } else { T::zero() };
                                    let s = (a + b) * half;
                                    if s != T::zero() {
                                        *v = s * weight;
                                    }
                                }
                            }
                            _ => degenerate = true,
                        }
                    }
                    Err(_) => degenerate = true,
                }
                if vals.iter().any(|v| !v.is_finite()) {
                    vals.iter_mut().for_each(|v| *v = T::zero());
                    degenerate = true;
                }
                let mut total = T::zero();
                for (m, &v) in st.per_sigma.iter_mut().zip(&vals) {
                    m.push(v);
                    total = total + v;
                }
                st.total.push(total);
                st.degenerate += degenerate as usize;
            }
            st
        })
        .collect();
    let mut out = GroupStats { per_sigma: vec![Moments::default(); nsig], total: Moments::default(), degenerate: 0 };
    for p in &partial {
        for (a, b) in out.per_sigma.iter_mut().zip(&p.per_sigma) {
            a.merge(b);
        }
        out.total.merge(&p.total);
        out.degenerate += p.degenerate;
    }
    out
}

/// Estimate of `I(Γ, σ, ψ)` from `samples` chart samples (task index 0).
pub fn mc_estimate<T: Scalar>(
    nd: &NumberedDiagram,
    knot: &KnotSpec,
    props: &Propagators<T>,
    samples: usize,
    seed: u64,
) -> Result<Estimate<T>, ZkError> {
    if samples == 0 {
        return Err(ZkError::NoSamples);
    }
    if nd.degree() < 2 {
        return Err(ZkError::Degree(nd.degree()));
    }
    super::check_props(props, nd.degree(), knot.n())?;
    let group = Group {
        eval: DiagramEval::new(nd.diagram().clone(), knot.n()),
        reversed: None,
        sigmas: vec![nd.numbering().to_vec()],
        task: 0,
    };
    Ok(run_group(&group, knot, props, samples, seed).per_sigma[0].estimate(seed))
}
