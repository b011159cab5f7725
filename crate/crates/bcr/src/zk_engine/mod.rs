//! The two evaluators of `Z_k = 1/(2k)! Σ_{(Γ,σ)} I(Γ, σ, ψ)`.
//!
//! [`zk_mc`] integrates `ω(Γ, σ, ψ)` over the tan-chart of the open
//! configuration space; [`zk_count`] counts configurations whose edge
//! directions hit `±X_σ(e)`, each weighted by `±(½)^{2k}`.
//!
//! All labellings of one diagram share their samples (the determinant is
//! computed once per sample), so their estimates are correlated; the total
//! standard error is therefore formed per diagram from the sample-wise sum
//! over labellings, and only then combined across diagrams in quadrature.

mod count;
mod density;
mod mc;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;

pub use count::{solve_intersections, CountOptions, Root, RootCensus, System, DET_TOL, RESIDUAL_TOL};
pub use density::{sphere_volume, DensityKind, PropagatorDensity, Propagators};
pub use mc::{integrand, mc_estimate, sample_rng, DiagramEval, Estimate, IntegrandValue, CHUNK};

use crate::diagram_enum::{enumerate_numbered, factorial, EnumError};
use crate::gauss_eval::DirectionFamily;
use crate::knot_model::KnotSpec;
use crate::{NumberedDiagram, Scalar};
use mc::{run_group, Group};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ZkError {
    #[error("at least one sample is required")]
    NoSamples,
    #[error("at least one Newton start is required")]
    NoStarts,
    #[error("degree must be at least 2, got {0}")]
    Degree(usize),
    #[error(transparent)]
    Enumeration(#[from] EnumError),
    #[error("{what} prepared for degree {got_k} and n = {got_n}, need degree {k} and n = {n}")]
    Mismatch { what: &'static str, got_k: usize, got_n: usize, k: usize, n: usize },
    #[error("thread pool: {0}")]
    Threads(String),
}

pub(crate) fn check_props<T: Scalar>(props: &Propagators<T>, k: usize, n: usize) -> Result<(), ZkError> {
    if props.degree() < k || props.external.len() != props.internal.len() || props.n != n {
        return Err(ZkError::Mismatch { what: "propagators", got_k: props.degree(), got_n: props.n, k, n });
    }
    Ok(())
}

pub(crate) fn check_dirs(dirs: &DirectionFamily<f64>, k: usize, n: usize) -> Result<(), ZkError> {
    let got_n = dirs.internal.first().map_or(0, |v| v.len());
    if dirs.degree() < k || got_n != n || dirs.external.len() != dirs.internal.len() {
        return Err(ZkError::Mismatch { what: "direction family", got_k: dirs.degree(), got_n, k, n });
    }
    Ok(())
}

/// Runs `f` on a dedicated pool when a thread count is given.
pub fn with_threads<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R, ZkError> {
    match threads {
        None => Ok(f()),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| ZkError::Threads(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Mc,
    Count,
}

/// One `(Γ, σ)` term; `value` is `I(Γ, σ, ψ)` before the `1/(2k)!` weight.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiagramTerm {
    pub diagram: String,
    pub sigma: Vec<usize>,
    pub value: f64,
    pub stderr: f64,
    pub roots: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub signed_roots: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub complete: Option<bool>,
}

/// The results document shared by both evaluators.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZkReport {
    pub k: usize,
    pub n: usize,
    pub knot: String,
    pub method: Method,
    pub per_diagram: Vec<DiagramTerm>,
    #[serde(rename = "Z_k")]
    pub z_k: f64,
    pub stderr: f64,
    pub seed: u64,
    /// Samples per diagram (mc) or Newton starts per system (count).
    pub budget: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pairing: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degenerate_samples: Option<usize>,
    /// Exact value of the count as a fraction.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<String>,
    /// `Z_k · 2^{2k} · (2k)!`, the signed number of roots.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scaled: Option<String>,
    /// False when some root search looked incomplete; the count is then a
    /// lower-confidence estimate.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub complete: Option<bool>,
}

impl ZkReport {
    pub fn estimate(&self) -> Estimate<f64> {
        Estimate { mean: self.z_k, stderr: self.stderr, samples: self.budget, seed: self.seed }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("diagram,sigma,value,stderr,roots\n");
        for t in &self.per_diagram {
            let sigma: Vec<String> = t.sigma.iter().map(|s| s.to_string()).collect();
            let roots = t.roots.map(|r| r.to_string()).unwrap_or_default();
            out.push_str(&format!("\"{}\",{},{:e},{:e},{}\n", t.diagram, sigma.join(" "), t.value, t.stderr, roots));
        }
        out.push_str(&format!("total,,{:e},{:e},\n", self.z_k, self.stderr));
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct McOptions {
    /// Samples per diagram (shared by its labellings).
    pub samples: usize,
    pub seed: u64,
    /// Average every term with its cycle-reversed partner on the same samples.
    pub pairing: bool,
    pub threads: Option<usize>,
}

impl Default for McOptions {
    fn default() -> Self {
        McOptions { samples: 100_000, seed: 0, pairing: false, threads: None }
    }
}

fn groups(numbered: &[NumberedDiagram], n: usize, pairing: bool) -> Vec<Group> {
    let mut out: Vec<Group> = Vec::new();
    for nd in numbered {
        match out.last_mut() {
            Some(g) if g.eval.diagram == *nd.diagram() => g.sigmas.push(nd.numbering().to_vec()),
            _ => out.push(Group {
                eval: DiagramEval::new(nd.diagram().clone(), n),
                reversed: pairing.then(|| DiagramEval::new(nd.diagram().reverse_cycle(), n)),
                sigmas: vec![nd.numbering().to_vec()],
                task: out.len() as u64,
            }),
        }
    }
    out
}

/// Monte Carlo estimate of `Z_k(ψ)`.
pub fn zk_mc<T: Scalar>(
    k: usize,
    knot: &KnotSpec,
    props: &Propagators<T>,
    opts: &McOptions,
) -> Result<ZkReport, ZkError> {
    if k < 2 {
        return Err(ZkError::Degree(k));
    }
    if opts.samples == 0 {
        return Err(ZkError::NoSamples);
    }
    check_props(props, k, knot.n())?;
    let numbered = enumerate_numbered(k)?;
    let groups = groups(&numbered, knot.n(), opts.pairing);
    let stats = with_threads(opts.threads, || {
        groups.iter().map(|g| run_group(g, knot, props, opts.samples, opts.seed)).collect::<Vec<_>>()
    })?;
    let weight = 1.0 / factorial(2 * k) as f64;
    let mut per_diagram = Vec::with_capacity(numbered.len());
    let (mut sum, mut var, mut degenerate) = (0.0, 0.0, 0);
    for (g, st) in groups.iter().zip(&stats) {
        for (sigma, m) in g.sigmas.iter().zip(&st.per_sigma) {
            per_diagram.push(DiagramTerm {
                diagram: g.eval.diagram.to_string(),
                sigma: sigma.clone(),
                value: m.mean.to_f64_lossy(),
                stderr: m.stderr().to_f64_lossy(),
                roots: None,
                signed_roots: None,
                complete: None,
            });
        }
        sum += st.total.mean.to_f64_lossy();
        var += st.total.stderr().to_f64_lossy().powi(2);
        degenerate += st.degenerate;
    }
    log::info!("zk_mc k={k} knot={} samples={} degenerate={degenerate}", knot.name(), opts.samples);
    Ok(ZkReport {
        k,
        n: knot.n(),
        knot: knot.name().to_string(),
        method: Method::Mc,
        per_diagram,
        z_k: sum * weight,
        stderr: var.sqrt() * weight,
        seed: opts.seed,
        budget: opts.samples,
        pairing: Some(opts.pairing),
        degenerate_samples: Some(degenerate),
        exact: None,
        scaled: None,
        complete: None,
    })
}

/// Signed intersection count of `Z_k(ψ)` against the chains of `dirs`.
pub fn zk_count(
    k: usize,
    knot: &KnotSpec,
    dirs: &DirectionFamily<f64>,
    opts: &CountOptions,
) -> Result<ZkReport, ZkError> {
    if k < 2 {
        return Err(ZkError::Degree(k));
    }
    if opts.starts == 0 {
        return Err(ZkError::NoStarts);
    }
    check_dirs(dirs, k, knot.n())?;
    let numbered = enumerate_numbered(k)?;
    let censuses = with_threads(opts.threads, || {
        numbered
            .iter()
            .enumerate()
            .map(|(task, nd)| solve_intersections(nd, knot, dirs, opts, task as u64))
            .collect::<Result<Vec<_>, _>>()
    })??;
    let root_weight = 0.5f64.powi(2 * k as i32);
    let mut twice_total: i64 = 0;
    let mut complete = true;
    let per_diagram = numbered
        .iter()
        .zip(&censuses)
        .map(|(nd, c)| {
            let s = c.signed_count();
            let s2 = c.paired_count_x2();
            twice_total += s2;
            complete &= c.complete;
            DiagramTerm {
                diagram: nd.diagram().to_string(),
                sigma: nd.numbering().to_vec(),
                value: s2 as f64 * 0.5 * root_weight,
                stderr: 0.0,
                roots: Some(c.roots.len()),
                signed_roots: Some(s),
                complete: Some(c.complete),
            }
        })
        .collect();
    let denom = BigInt::from(4u32).pow(k as u32) * BigInt::from(factorial(2 * k));
    let scaled = BigRational::new(BigInt::from(twice_total), BigInt::from(2));
    let exact = &scaled / BigRational::from_integer(denom);
    log::info!("zk_count k={k} knot={} signed roots={scaled} complete={complete}", knot.name());
    Ok(ZkReport {
        k,
        n: knot.n(),
        knot: knot.name().to_string(),
        method: Method::Count,
        per_diagram,
        z_k: twice_total as f64 * 0.5 * root_weight / factorial(2 * k) as f64,
        stderr: 0.0,
        seed: opts.seed,
        budget: opts.starts,
        pairing: Some(opts.pairing),
        degenerate_samples: None,
        exact: Some(exact.to_string()),
        scaled: Some(scaled.to_string()),
        complete: Some(complete),
    })
}
