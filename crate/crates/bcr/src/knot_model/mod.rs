//! Long knots `ψ: ℝⁿ → ℝⁿ⁺²` given by expressions in `x1..xn`.
//!
//! A knot must equal `(0, 0, x)` for `‖x‖ ≥ 1`. [`KnotSpec::new`] checks this
//! on a fixed sample of points outside the unit ball and symbolically: after
//! removing the standard term, every summand of a coordinate has to carry a
//! bump factor whose support lies in the unit ball. The Jacobian is derived
//! symbolically once at construction.
//!
//! File format:
//!
//! ```text
//! name: perturbed
//! n: 3
//! coords: (0.4*b(r)*sin(2*x1 + 1), 0, x1, x2, x3)
//! ```
//!
//! or the one-line form `trivial: (0, 0, x1, x2, x3)`.

mod expr;
mod parse;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{norm, Matrix};
use crate::Scalar;

pub use expr::{bump, EvalError, EvalErrorKind, Expr};
pub use parse::{parse_expr, split_tuple, ParseError};

/// Tolerance of the sampled boundary check.
pub const BOUNDARY_TOL: f64 = 1e-12;
/// Relative singular-value style threshold for the immersion check.
pub const IMMERSION_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum KnotError {
    #[error(transparent)]
    Syntax(#[from] ParseError),
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("n must be odd and at least 3, got {0}")]
    Dimension(usize),
    #[error("expected {expected} coordinates, got {got}")]
    CoordinateCount { expected: usize, got: usize },
    #[error("coordinate {coord} uses a variable or centre outside x1..x{n}")]
    Arity { coord: usize, n: usize },
    #[error("boundary condition violated at {witness:?}: coordinate {coord} is off by {deviation:e}")]
    Boundary { witness: Vec<f64>, coord: usize, deviation: f64 },
    #[error("coordinate {coord}: term `{term}` carries no bump supported in the unit ball")]
    Uncertified { coord: usize, term: String },
    #[error("not an immersion at {witness:?}")]
    NotImmersed { witness: Vec<f64> },
    #[error("evaluation failed: {0}")]
    Eval(#[from] EvalError),
    #[error("knots have different n ({0} and {1})")]
    Mismatch(usize, usize),
    #[error("unknown builtin knot {0:?}")]
    UnknownBuiltin(String),
}

/// Non-fatal findings of [`KnotSpec::new`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct KnotReport {
    pub boundary_points: usize,
    pub max_boundary_deviation: f64,
    pub interior_points: usize,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct KnotSpec {
    name: String,
    n: usize,
    coords: Vec<Expr>,
    jacobian: Vec<Vec<Expr>>,
    report: KnotReport,
}

impl PartialEq for KnotSpec {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.n == other.n && self.coords == other.coords
    }
}

/// The standard coordinate `(0, 0, x)_j`.
fn standard(j: usize) -> Expr {
    if j < 2 {
        Expr::Const(0.0)
    } else {
        Expr::Var(j - 2)
    }
}

/// `λ·dist2(p)` with `‖p‖ + 1/√λ ≤ 1`, the support condition of `bsq`.
fn bump_arg_certified(arg: &Expr) -> bool {
    let (scale, centre) = match arg {
        Expr::DistSq(c) => (1.0, c),
        Expr::Mul(a, b) => match (&**a, &**b) {
            (Expr::Const(l), Expr::DistSq(c)) | (Expr::DistSq(c), Expr::Const(l)) => (*l, c),
            _ => return false,
        },
        Expr::Div(a, b) => match (&**a, &**b) {
            (Expr::DistSq(c), Expr::Const(m)) => (1.0 / m, c),
            _ => return false,
        },
        _ => return false,
    };
    scale > 0.0 && norm(centre) + 1.0 / scale.sqrt() <= 1.0 + 1e-15
}

/// `dist2(c) ≤ ρ²` describing a ball inside the closed unit ball.
fn inner_ball(u: &Expr, v: &Expr) -> bool {
    match (u, v) {
        (Expr::DistSq(c), Expr::Const(r2)) => *r2 >= 0.0 && norm(c) + r2.sqrt() <= 1.0 + 1e-15,
        _ => false,
    }
}

/// Whether a summand vanishes identically outside the unit ball.
fn vanishes_outside(e: &Expr) -> bool {
    match e {
        Expr::Const(c) => *c == 0.0,
        Expr::Bump { arg, .. } => bump_arg_certified(arg),
        Expr::Mul(a, b) => vanishes_outside(a) || vanishes_outside(b),
        Expr::Div(a, _) | Expr::Neg(a) => vanishes_outside(a),
        Expr::Add(..) | Expr::Sub(..) => e.terms().iter().all(|(_, t)| vanishes_outside(t)),
        Expr::IfLe(u, v, _, b) if inner_ball(u, v) => vanishes_outside(b),
        Expr::IfLe(_, _, a, b) => vanishes_outside(a) && vanishes_outside(b),
        _ => false,
    }
}

/// Symbolic boundary certificate for coordinate `j`; returns an offending
/// term on failure.
fn certify(e: &Expr, j: usize) -> Result<(), String> {
    if let Expr::IfLe(u, v, _, b) = e {
        if inner_ball(u, v) {
            return certify(b, j);
        }
    }
    let std_term = standard(j);
    let mut terms = e.terms();
    if !std_term.is_zero() {
        match terms.iter().position(|(pos, t)| *pos && **t == std_term) {
            Some(i) => {
                terms.remove(i);
            }
            None => return Err(format!("missing standard term {std_term}")),
        }
    }
    for (_, t) in terms {
        if !vanishes_outside(t) {
            return Err(t.to_string());
        }
    }
    Ok(())
}

fn unit_vectors(count: usize, n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count + 2 * n);
    for i in 0..n {
        for s in [1.0, -1.0] {
            let mut v = vec![0.0; n];
            v[i] = s;
            out.push(v);
        }
    }
    while out.len() < count + 2 * n {
        let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let l = norm(&v);
        if l > 1e-3 {
            out.push(v.into_iter().map(|x| x / l).collect());
        }
    }
    out
}

/// Fixed sample of at least 1000 parameters with `‖x‖ ≥ 1`.
pub fn boundary_sample(n: usize) -> Vec<Vec<f64>> {
    let radii = [1.0, 1.0 + 1e-9, 1.001, 1.2, 2.0, 10.0];
    let dirs = unit_vectors(170, n, 0x5eed_b0d1);
    dirs.iter()
        .flat_map(|d| radii.iter().map(move |&r| d.iter().map(|x| x * r).collect::<Vec<f64>>()))
        .collect()
}

/// Fixed sample of parameters inside the unit ball.
pub fn interior_sample(n: usize, count: usize) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x1a7e_0101);
    let dirs = unit_vectors(count, n, 0x1a7e_0202);
    let mut out: Vec<Vec<f64>> = vec![vec![0.0; n]];
    for d in dirs.into_iter().take(count.saturating_sub(1)) {
        let r: f64 = rng.random::<f64>().powf(1.0 / n as f64);
        out.push(d.into_iter().map(|x| x * r).collect());
    }
    out
}

impl KnotSpec {
    /// Builds and validates a knot.
    pub fn new(name: impl Into<String>, n: usize, coords: Vec<Expr>) -> Result<Self, KnotError> {
        if n < 3 || n % 2 == 0 {
            return Err(KnotError::Dimension(n));
        }
        if coords.len() != n + 2 {
            return Err(KnotError::CoordinateCount { expected: n + 2, got: coords.len() });
        }
        for (j, c) in coords.iter().enumerate() {
            if c.arity() > n || !c.dist_dims_match(n) {
                return Err(KnotError::Arity { coord: j, n });
            }
        }
        let jacobian = coords.iter().map(|c| (0..n).map(|i| c.diff(i)).collect()).collect();
        let mut k = KnotSpec { name: name.into(), n, coords, jacobian, report: KnotReport::default() };
        k.report = k.validate()?;
        Ok(k)
    }

    fn validate(&self) -> Result<KnotReport, KnotError> {
        let n = self.n;
        let mut report = KnotReport::default();
        for x in boundary_sample(n) {
            let y = self.eval(&x)?;
            for (j, &yj) in y.iter().enumerate() {
                let expected = if j < 2 { 0.0 } else { x[j - 2] };
                let dev = (yj - expected).abs();
                report.max_boundary_deviation = report.max_boundary_deviation.max(dev);
                if !(dev < BOUNDARY_TOL) {
                    return Err(KnotError::Boundary { witness: x, coord: j, deviation: dev });
                }
            }
            report.boundary_points += 1;
        }
        for (j, c) in self.coords.iter().enumerate() {
            certify(c, j).map_err(|term| KnotError::Uncertified { coord: j, term })?;
        }
        let interior = interior_sample(n, 200);
        let mut images = Vec::with_capacity(interior.len());
        let mut outside_ball = 0;
        for x in &interior {
            let jac = self.jacobian(x)?;
            let scale = jac.max_abs().max(1.0);
            if jac.rank(IMMERSION_TOL * scale) < n {
                return Err(KnotError::NotImmersed { witness: x.clone() });
            }
            let y = self.eval(x)?;
            if norm(&y) > 1.0 + 1e-12 {
                outside_ball += 1;
            }
            images.push(y);
        }
        if outside_ball > 0 {
            report.warnings.push(format!("{outside_ball} sampled interior points map outside the unit ball"));
        }
        let mut close_pairs = 0;
        for i in 0..interior.len() {
            for j in 0..i {
                let dp: Vec<f64> = interior[i].iter().zip(&interior[j]).map(|(a, b)| a - b).collect();
                let di: Vec<f64> = images[i].iter().zip(&images[j]).map(|(a, b)| a - b).collect();
                if norm(&dp) > 1e-3 && norm(&di) < 1e-6 {
                    close_pairs += 1;
                }
            }
        }
        if close_pairs > 0 {
            report.warnings.push(format!("{close_pairs} sampled pairs have nearly equal images; embedding doubtful"));
        }
        report.interior_points = interior.len();
        Ok(report)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coords(&self) -> &[Expr] {
        &self.coords
    }

    pub fn report(&self) -> &KnotReport {
        &self.report
    }

    pub fn eval<T: Scalar>(&self, x: &[T]) -> Result<Vec<T>, EvalError> {
        self.coords.iter().map(|c| c.eval(x)).collect()
    }

    /// The `(n+2) × n` derivative, from the symbolic Jacobian.
    pub fn jacobian<T: Scalar>(&self, x: &[T]) -> Result<Matrix<T>, EvalError> {
        let mut m = Matrix::zeros(self.n + 2, self.n);
        for (j, row) in self.jacobian.iter().enumerate() {
            for (i, e) in row.iter().enumerate() {
                m[(j, i)] = e.eval(x)?;
            }
        }
        Ok(m)
    }

    /// Central finite-difference Jacobian, the oracle for [`KnotSpec::jacobian`].
    pub fn jacobian_fd(&self, x: &[f64], h: f64) -> Result<Matrix<f64>, EvalError> {
        let mut m = Matrix::zeros(self.n + 2, self.n);
        for i in 0..self.n {
            let (mut xp, mut xm) = (x.to_vec(), x.to_vec());
            xp[i] += h;
            xm[i] -= h;
            let (fp, fm) = (self.eval(&xp)?, self.eval(&xm)?);
            for j in 0..self.n + 2 {
                m[(j, i)] = (fp[j] - fm[j]) / (2.0 * h);
            }
        }
        Ok(m)
    }

    /// Whether every coordinate is literally the standard one.
    pub fn is_trivial(&self) -> bool {
        self.coords.iter().enumerate().all(|(j, c)| *c == standard(j))
    }

    /// Parses the file format described in the module docs.
    pub fn parse(text: &str) -> Result<Self, KnotError> {
        let mut name = None;
        let mut n = None;
        let mut coords: Option<(String, usize)> = None;
        let mut lines = text.lines().enumerate().peekable();
        while let Some((ln, raw)) = lines.next() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once(':')
                .ok_or(KnotError::Format { line: ln + 1, message: "expected `key: value`".into() })?;
            let (key, mut value) = (key.trim(), value.trim().to_string());
            if value.starts_with('(') {
                // a tuple may continue over several lines
                while value.matches('(').count() > value.matches(')').count() {
                    match lines.next() {
                        Some((_, more)) => {
                            value.push(' ');
                            value.push_str(more.split('#').next().unwrap_or("").trim());
                        }
                        None => return Err(KnotError::Format { line: ln + 1, message: "unterminated tuple".into() }),
                    }
                }
            }
            match key {
                "name" => name = Some(value),
                "n" => {
                    n = Some(value.parse::<usize>().map_err(|_| KnotError::Format {
                        line: ln + 1,
                        message: format!("bad n {value:?}"),
                    })?)
                }
                "coords" => coords = Some((value, ln + 1)),
                other if value.starts_with('(') && coords.is_none() => {
                    name = Some(other.to_string());
                    coords = Some((value, ln + 1));
                }
                other => return Err(KnotError::Format { line: ln + 1, message: format!("unknown key {other:?}") }),
            }
        }
        let (tuple, line) = coords.ok_or(KnotError::Format { line: 1, message: "no coordinates".into() })?;
        let parts = split_tuple(&tuple).map_err(|e| KnotError::Format { line, message: e.to_string() })?;
        let n = n.unwrap_or(parts.len().saturating_sub(2));
        if parts.len() != n + 2 {
            return Err(KnotError::CoordinateCount { expected: n + 2, got: parts.len() });
        }
        if n < 3 || n % 2 == 0 {
            return Err(KnotError::Dimension(n));
        }
        let exprs = parts
            .iter()
            .map(|(s, col)| {
                parse_expr(s, n).map_err(|e| KnotError::Format {
                    line,
                    message: format!("column {}: {}", col + e.column - 1, e.message),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        KnotSpec::new(name.unwrap_or_else(|| "knot".into()), n, exprs)
    }

    /// Serialises in the file format; [`KnotSpec::parse`] reads it back.
    pub fn to_text(&self) -> String {
        let coords: Vec<String> = self.coords.iter().map(|c| c.to_string()).collect();
        format!("name: {}\nn: {}\ncoords: ({})\n", self.name, self.n, coords.join(", "))
    }
}

pub fn trivial(n: usize) -> KnotSpec {
    KnotSpec::new("trivial", n, (0..n + 2).map(standard).collect()).expect("the trivial knot is valid")
}

/// A graph-of-a-function perturbation of the trivial knot, hence an embedding
/// isotopic to it; it stays inside the unit ball.
pub fn perturbed_unknot(n: usize) -> KnotSpec {
    let src = format!(
        "perturbed_unknot: (0.4*b(r)*sin(2*x1 + 1), 0.4*b(r)*cos(3*x2), {})",
        (1..=n).map(|i| format!("x{i}")).collect::<Vec<_>>().join(", ")
    );
    KnotSpec::parse(&src).expect("builtin knot is valid")
}

/// An off-centre bump, exercising `dist2` centres.
pub fn offset_bump(n: usize) -> KnotSpec {
    let mut centre = vec!["0".to_string(); n];
    centre[0] = "0.3".into();
    let src = format!(
        "offset_bump: (0.2*bsq(4*dist2({}))*sin(5*x2), 0.1*bsq(4*dist2({})), {})",
        centre.join(", "),
        centre.join(", "),
        (1..=n).map(|i| format!("x{i}")).collect::<Vec<_>>().join(", ")
    );
    KnotSpec::parse(&src).expect("builtin knot is valid")
}

pub const BUILTIN_NAMES: [&str; 3] = ["trivial", "perturbed_unknot", "offset_bump"];

pub fn builtin(name: &str, n: usize) -> Result<KnotSpec, KnotError> {
    if n < 3 || n % 2 == 0 {
        return Err(KnotError::Dimension(n));
    }
    match name {
        "trivial" => Ok(trivial(n)),
        "perturbed_unknot" => Ok(perturbed_unknot(n)),
        "offset_bump" => Ok(offset_bump(n)),
        other => Err(KnotError::UnknownBuiltin(other.to_string())),
    }
}

pub fn builtin_knots(n: usize) -> Vec<KnotSpec> {
    BUILTIN_NAMES.iter().map(|name| builtin(name, n).expect("builtin")).collect()
}

/// Centre `Ω_i` of the `i`-th ball of a connected sum (`i ∈ {1, 2}`), and the
/// matching parameter centre.
pub fn sum_centre(i: usize, dim: usize) -> Vec<f64> {
    let mut c = vec![0.0; dim];
    c[dim - 1] = if i == 1 { -0.5 } else { 0.5 };
    c
}

/// `ψ₁ ♯ ψ₂`: on `‖x − (0,…,±½)‖ ≤ ¼` the knot is `¼ψ_i(4x ± 2e_n) + Ω_i`,
/// elsewhere `(0, 0, x)`.
pub fn connected_sum(k1: &KnotSpec, k2: &KnotSpec) -> Result<KnotSpec, KnotError> {
    if k1.n != k2.n {
        return Err(KnotError::Mismatch(k1.n, k2.n));
    }
    let n = k1.n;
    let branch = |k: &KnotSpec, i: usize, j: usize| {
        let shift: Vec<f64> = sum_centre(i, n).iter().map(|c| -4.0 * c).collect();
        let inner = k.coords[j].affine_substitute(4.0, &shift);
        Expr::add(Expr::mul(Expr::Const(0.25), inner), Expr::Const(sum_centre(i, n + 2)[j]))
    };
    let coords = (0..n + 2)
        .map(|j| {
            Expr::if_le(
                Expr::DistSq(sum_centre(2, n)),
                Expr::Const(1.0 / 16.0),
                branch(k2, 2, j),
                Expr::if_le(Expr::DistSq(sum_centre(1, n)), Expr::Const(1.0 / 16.0), branch(k1, 1, j), standard(j)),
            )
        })
        .collect();
    KnotSpec::new(format!("{}#{}", k1.name, k2.name), n, coords)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn trivial_knot_values() {
        let t = KnotSpec::parse("trivial: (0, 0, x1, x2, x3)").unwrap();
        assert_eq!(t.n(), 3);
        assert!(t.is_trivial());
        assert_eq!(t.eval(&[2.0, 0.0, 0.0]).unwrap(), vec![0.0, 0.0, 2.0, 0.0, 0.0]);
        assert_eq!(t.eval(&[0.0; 3]).unwrap(), vec![0.0; 5]);
        let j = t.jacobian(&[0.3, 0.1, -0.2]).unwrap();
        for r in 0..5 {
            for c in 0..3 {
                assert_eq!(j[(r, c)], if r >= 2 && r - 2 == c { 1.0 } else { 0.0 });
            }
        }
        assert_eq!(t, trivial(3));
    }

    #[test]
    fn missing_bump_is_a_boundary_violation() {
        let err = KnotSpec::parse("bad: (0, sin(x1), x1, x2, x3)").unwrap_err();
        let KnotError::Boundary { witness, coord, .. } = err else { panic!("{err:?}") };
        assert_eq!(coord, 1);
        assert!(norm(&witness) >= 1.0);
    }

    #[test]
    fn uncertified_terms_are_rejected() {
        // vanishes on the sample but not provably
        let err = KnotSpec::parse("sneaky: (0, (x1 - x1)*sin(x2), x1, x2, x3)").unwrap_err();
        assert!(matches!(err, KnotError::Uncertified { coord: 1, .. }), "{err:?}");
        // a bump whose support leaves the unit ball
        let err = KnotSpec::parse("wide: (0, bsq(0.5*r2), x1, x2, x3)").unwrap_err();
        assert!(matches!(err, KnotError::Boundary { .. } | KnotError::Uncertified { .. }), "{err:?}");
    }

    #[test]
    fn perturbed_spec_from_the_examples() {
        let k = KnotSpec::parse("p: (0, b(‖x‖)·sin(x₁), x₁, x₂, x₃)").unwrap();
        for x in boundary_sample(3) {
            let y = k.eval(&x).unwrap();
            assert_eq!(&y[2..], &x[..]);
            assert_eq!(y[0], 0.0);
            assert!(y[1].abs() < 1e-12);
        }
    }

    #[test]
    fn format_errors() {
        assert!(matches!(KnotSpec::parse("name: a\nn: 4\ncoords: (0,0,x1,x2,x3,x4)"), Err(KnotError::Dimension(4))));
        assert!(matches!(KnotSpec::parse("name: a\nn: 3\ncoords: (0,0,x1,x2)"), Err(KnotError::CoordinateCount { .. })));
        assert!(matches!(KnotSpec::parse("name a"), Err(KnotError::Format { line: 1, .. })));
        let err = KnotSpec::parse("t: (0, 0, x1, x2 +, x3)").unwrap_err();
        assert!(err.to_string().contains("column"), "{err}");
    }

    #[test]
    fn multi_line_files_round_trip() {
        let text = "# a comment\nname: p\nn: 3\ncoords: (0.4*b(r)*sin(2*x1 + 1),\n  0, x1, x2, x3)\n";
        let k = KnotSpec::parse(text).unwrap();
        let back = KnotSpec::parse(&k.to_text()).unwrap();
        assert_eq!(back, k);
    }

    #[test]
    fn not_an_immersion() {
        let err = KnotSpec::parse("flat: (0, 0, x1 + 0.5*b(r)*(0 - x1), x2, x3)");
        // x1 ↦ x1(1 − b/2) has derivative 1 − b/2 − x1 b'/2, positive: still an immersion
        assert!(err.is_ok());
        let err = KnotSpec::parse("fold: (0, 0, x1 - b(r)*x1, x2, x3)").unwrap_err();
        assert!(matches!(err, KnotError::NotImmersed { .. }), "{err:?}");
    }

    #[test]
    fn builtins_are_valid_and_stay_in_the_ball() {
        for k in builtin_knots(3) {
            assert!(k.report().warnings.is_empty(), "{}: {:?}", k.name(), k.report().warnings);
            assert!(k.report().boundary_points >= 1000);
        }
        assert!(builtin("perturbed_unknot", 5).is_ok());
        assert!(matches!(builtin("nope", 3), Err(KnotError::UnknownBuiltin(_))));
    }

    #[test]
    fn symbolic_jacobians_match_differences() {
        let mut knots = builtin_knots(3);
        knots.push(connected_sum(&perturbed_unknot(3), &offset_bump(3)).unwrap());
        for k in &knots {
            for x in interior_sample(3, 100) {
                let a = k.jacobian(&x).unwrap();
                let b = k.jacobian_fd(&x, 1e-6).unwrap();
                for r in 0..5 {
                    for c in 0..3 {
                        assert_relative_eq!(a[(r, c)], b[(r, c)], max_relative = 1e-6, epsilon = 1e-8);
                    }
                }
            }
        }
    }

    #[test]
    fn trivial_sum_is_trivial() {
        let t = trivial(3);
        let s = connected_sum(&t, &t).unwrap();
        for i in 0..10 {
            for j in 0..10 {
                for l in 0..10 {
                    let x = [-1.2 + 0.24 * i as f64, -1.2 + 0.24 * j as f64, -1.2 + 0.24 * l as f64 + 0.01];
                    let (a, b) = (s.eval(&x).unwrap(), t.eval(&x).unwrap());
                    for (p, q) in a.iter().zip(&b) {
                        assert!((p - q).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn sum_with_trivial_re_embeds_the_first_knot() {
        let k = perturbed_unknot(3);
        let s = connected_sum(&k, &trivial(3)).unwrap();
        for x in interior_sample(3, 50) {
            let y: Vec<f64> = x.iter().enumerate().map(|(i, v)| 0.25 * v + if i == 2 { -0.5 } else { 0.0 }).collect();
            let z: Vec<f64> = y.iter().enumerate().map(|(i, v)| 4.0 * v + if i == 2 { 2.0 } else { 0.0 }).collect();
            let expect: Vec<f64> =
                k.eval(&z).unwrap().iter().enumerate().map(|(j, v)| 0.25 * v + if j == 4 { -0.5 } else { 0.0 }).collect();
            let got = s.eval(&y).unwrap();
            for (p, q) in got.iter().zip(&expect) {
                assert!((p - q).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sum_branches_meet_continuously() {
        let s = connected_sum(&perturbed_unknot(3), &offset_bump(3)).unwrap();
        for d in unit_vectors(200, 3, 9) {
            for i in [1, 2] {
                let c = sum_centre(i, 3);
                let on: Vec<f64> = c.iter().zip(&d).map(|(ci, di)| ci + 0.25 * di).collect();
                let out: Vec<f64> = c.iter().zip(&d).map(|(ci, di)| ci + (0.25 + 1e-12) * di).collect();
                let (a, b) = (s.eval(&on).unwrap(), s.eval(&out).unwrap());
                for (p, q) in a.iter().zip(&b) {
                    assert!((p - q).abs() < 1e-10);
                }
                // images of a branch stay within ½ of its centre
                let inside: Vec<f64> = c.iter().zip(&d).map(|(ci, di)| ci + 0.2 * di).collect();
                let img = s.eval(&inside).unwrap();
                let omega = sum_centre(i, 5);
                let dist: f64 = img.iter().zip(&omega).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt();
                assert!(dist <= 0.5);
            }
        }
    }

    #[test]
    fn mismatched_dimensions() {
        assert_eq!(connected_sum(&trivial(3), &trivial(5)), Err(KnotError::Mismatch(3, 5)));
    }
}
