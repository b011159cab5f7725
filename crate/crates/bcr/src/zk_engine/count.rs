//! Signed counting of configurations whose edge directions all lie in
//! `{±X_σ(e)}`.
//!
//! One Newton system covers every sign vector at once: the unknowns are the
//! configuration coordinates, the equations `F_eᵀ dir_e = 0` with `F_e` a
//! tangent frame at `X_σ(e)`, which vanish exactly when `dir_e = ±X_σ(e)`.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use super::mc::{sample_rng, DiagramEval};
use super::ZkError;
use crate::diagram_core::{ConfigLayout, NumberedDiagram};
use crate::gauss_eval::{edge_directions_with, jacobian_in_frames, Configuration, DirectionFamily, Geometry};
use crate::knot_model::KnotSpec;
use crate::linalg::{dot, norm, tangent_frame, Matrix};

/// Accepted roots have `max_e ‖dir_e − ε_e X_e‖` below this.
pub const RESIDUAL_TOL: f64 = 1e-9;
/// Accepted roots have `|det P_Γ'|` above this.
pub const DET_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct CountOptions {
    /// Newton starts per system.
    pub starts: usize,
    pub max_iter: usize,
    pub seed: u64,
    /// Two roots closer than `dedup · (1 + ‖c‖∞)` are merged.
    pub dedup: f64,
    pub threads: Option<usize>,
    /// Also sign every root under the cycle-reversed diagram and average.
    pub pairing: bool,
}

impl Default for CountOptions {
    fn default() -> Self {
        CountOptions { starts: 10_000, max_iter: 60, seed: 0, dedup: 1e-6, threads: None, pairing: false }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Root {
    pub config: Configuration<f64>,
    /// Orientation sign times the sign of the direction-map determinant.
    pub sign: i8,
    pub residual: f64,
    pub det: f64,
    /// `ε_e = ±1` with `dir_e ≈ ε_e X_σ(e)`.
    pub epsilon: Vec<i8>,
    /// Index of the first start that reached this root.
    pub first_start: usize,
    /// Sign of the same configuration for the cycle-reversed diagram, when
    /// pairing is on.
    pub reversed_sign: Option<i8>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RootCensus {
    #[serde(skip)]
    pub roots: Vec<Root>,
    pub starts: usize,
    /// Starts that converged to an acceptable root (before deduplication).
    pub converged: usize,
    /// Starts that converged but were rejected as singular.
    pub singular: usize,
    /// False when a new root first appeared in the last tenth of the starts.
    pub complete: bool,
}

impl RootCensus {
    pub fn signed_count(&self) -> i64 {
        self.roots.iter().map(|r| r.sign as i64).sum()
    }

    /// Twice the pairing-aware count: `Σ (sign + reversed sign)`, or twice
    /// the signed count when pairing is off.
    pub fn paired_count_x2(&self) -> i64 {
        self.roots.iter().map(|r| r.sign as i64 + r.reversed_sign.unwrap_or(r.sign) as i64).sum()
    }
}

/// The Newton system of one numbered diagram.
pub struct System<'a> {
    eval: DiagramEval,
    reversed: Option<DiagramEval>,
    knot: &'a KnotSpec,
    layout: ConfigLayout,
    targets: Vec<Vec<f64>>,
    frames: Vec<Matrix<f64>>,
}

enum Outcome {
    Root(Root),
    Singular,
    Failed,
}

impl<'a> System<'a> {
    pub fn new(nd: &NumberedDiagram, knot: &'a KnotSpec, dirs: &DirectionFamily<f64>) -> Self {
        let d = nd.diagram();
        let targets: Vec<Vec<f64>> =
            (0..d.n_edges()).map(|e| dirs.get(d.edge(e).kind, nd.sigma(e)).to_vec()).collect();
        let frames = targets.iter().map(|x| tangent_frame(x)).collect();
        System {
            eval: DiagramEval::new(d.clone(), knot.n()),
            reversed: None,
            knot,
            layout: ConfigLayout::new(d, knot.n()),
            targets,
            frames,
        }
    }

    /// Signs roots under the cycle-reversed diagram as well.
    pub fn with_pairing(mut self) -> Self {
        self.reversed = Some(DiagramEval::new(self.eval.diagram.reverse_cycle(), self.knot.n()));
        self
    }

    fn residual_vector(&self, dirs: &[Vec<f64>]) -> Vec<f64> {
        let mut f = Vec::with_capacity(self.layout.total);
        for (e, dir) in dirs.iter().enumerate() {
            for a in 0..self.frames[e].cols() {
                f.push(dot(&self.frames[e].column(a), dir));
            }
        }
        f
    }

    fn max_abs(v: &[f64]) -> f64 {
        v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }

    fn residual_at(&self, c: &Configuration<f64>) -> Option<f64> {
        let geo = Geometry::new(self.knot, c).ok()?;
        let dirs = edge_directions_with(&self.eval.diagram, c, &geo).ok()?;
        Some(Self::max_abs(&self.residual_vector(&dirs)))
    }

    /// Damped Newton from `c`; the converged configuration or `None`.
    pub fn newton(&self, mut c: Configuration<f64>, max_iter: usize) -> Option<Configuration<f64>> {
        for _ in 0..max_iter {
            let geo = Geometry::new(self.knot, &c).ok()?;
            let (jac, dirs) =
                jacobian_in_frames(&self.eval.diagram, &c, &geo, |e, _| (self.frames[e].clone(), false)).ok()?;
            let f = self.residual_vector(&dirs);
            let fnorm = Self::max_abs(&f);
            if fnorm < 1e-14 {
                return Some(c);
            }
            let step = jac.solve(&f, 1e-13)?;
            let mut t = 1.0;
            loop {
                let trial = Configuration {
                    layout: c.layout.clone(),
                    coords: c.coords.iter().zip(&step).map(|(x, s)| x - t * s).collect(),
                };
                match self.residual_at(&trial) {
                    Some(r) if r < fnorm => {
                        c = trial;
                        break;
                    }
                    _ if t < 1e-4 => return self.converged(c),
                    _ => t *= 0.5,
                }
            }
            if Self::max_abs(&c.coords) > 1e6 {
                return None;
            }
        }
        self.converged(c)
    }

    fn converged(&self, c: Configuration<f64>) -> Option<Configuration<f64>> {
        (self.residual_at(&c)? < RESIDUAL_TOL * 1e-2).then_some(c)
    }

    /// Classifies a converged configuration.
    fn judge(&self, c: Configuration<f64>, first_start: usize) -> Outcome {
        let Ok(geo) = Geometry::new(self.knot, &c) else { return Outcome::Failed };
        let Ok(dirs) = edge_directions_with(&self.eval.diagram, &c, &geo) else { return Outcome::Failed };
        let mut epsilon = Vec::with_capacity(dirs.len());
        let mut residual = 0.0f64;
        for (dir, x) in dirs.iter().zip(&self.targets) {
            let s: i8 = if dot(dir, x) >= 0.0 { 1 } else { -1 };
            let diff: Vec<f64> = dir.iter().zip(x).map(|(a, b)| a - s as f64 * b).collect();
            residual = residual.max(norm(&diff));
            epsilon.push(s);
        }
        if !(residual < RESIDUAL_TOL) {
            return Outcome::Failed;
        }
        let Ok((jac, _)) = jacobian_in_frames(&self.eval.diagram, &c, &geo, |_, d| (tangent_frame(d), true)) else {
            return Outcome::Failed;
        };
        let det = jac.det();
        if !(det.abs() > DET_TOL) {
            return Outcome::Singular;
        }
        let sign = self.eval.sign * if det > 0.0 { 1 } else { -1 };
        let mut reversed_sign = None;
        if let Some(rev) = &self.reversed {
            let Ok((rjac, _)) = jacobian_in_frames(&rev.diagram, &c, &geo, |_, d| (tangent_frame(d), true)) else {
                return Outcome::Failed;
            };
            let rdet = rjac.det();
            if !(rdet.abs() > DET_TOL) {
                return Outcome::Singular;
            }
            reversed_sign = Some(rev.sign * if rdet > 0.0 { 1 } else { -1 });
        }
        Outcome::Root(Root { config: c, sign, residual, det, epsilon, first_start, reversed_sign })
    }

    /// Re-polishes a configuration near a root and classifies it.
    pub fn polish(&self, c: Configuration<f64>, max_iter: usize) -> Option<Root> {
        match self.judge(self.newton(c, max_iter)?, 0) {
            Outcome::Root(r) => Some(r),
            _ => None,
        }
    }

    /// Start configuration `index`: normal coordinates with a scale cycling
    /// through `¼, ½, 1, 2, 4`, internal parameters at half that scale.
    pub fn start(&self, seed: u64, task: u64, index: usize) -> Configuration<f64> {
        let scale = [0.25, 0.5, 1.0, 2.0, 4.0][index % 5];
        let mut rng = sample_rng(seed, task, index as u64);
        let mut c = Configuration::zeros(self.layout.clone());
        for v in 0..c.n_vertices() {
            let s = if c.is_internal(v) { 0.5 * scale } else { scale };
            for i in self.layout.range(v) {
                c.coords[i] = s * rng.sample::<f64, _>(StandardNormal);
            }
        }
        c
    }
}

fn same_root(a: &Configuration<f64>, b: &Configuration<f64>, tol: f64) -> bool {
    let scale = 1.0 + a.coords.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    a.coords.iter().zip(&b.coords).all(|(x, y)| (x - y).abs() < tol * scale)
}

/// Multi-start search for the intersection points of one numbered diagram;
/// `task` keys the random starts.
pub fn solve_intersections(
    nd: &NumberedDiagram,
    knot: &KnotSpec,
    dirs: &DirectionFamily<f64>,
    opts: &CountOptions,
    task: u64,
) -> Result<RootCensus, ZkError> {
    if opts.starts == 0 {
        return Err(ZkError::NoStarts);
    }
    if nd.degree() < 2 {
        return Err(ZkError::Degree(nd.degree()));
    }
    super::check_dirs(dirs, nd.degree(), knot.n())?;
    let mut system = System::new(nd, knot, dirs);
    if opts.pairing {
        system = system.with_pairing();
    }
    let outcomes: Vec<Outcome> = (0..opts.starts)
        .into_par_iter()
        .map(|i| match system.newton(system.start(opts.seed, task, i), opts.max_iter) {
            Some(c) => system.judge(c, i),
            None => Outcome::Failed,
        })
        .collect();
    let mut census = RootCensus { roots: Vec::new(), starts: opts.starts, converged: 0, singular: 0, complete: true };
    for o in outcomes {
        match o {
            Outcome::Root(r) => {
                census.converged += 1;
                if !census.roots.iter().any(|q| same_root(&q.config, &r.config, opts.dedup)) {
                    census.roots.push(r);
                }
            }
            Outcome::Singular => census.singular += 1,
            Outcome::Failed => {}
        }
    }
    let late = opts.starts - opts.starts / 10;
    census.complete = census.roots.iter().all(|r| r.first_start < late);
    Ok(census)
}
