//! Expression trees in the knot parameters `x1..xn`, with generic evaluation,
//! symbolic differentiation and a fully parenthesised printer that the
//! parser reads back to the same tree.

use std::fmt;

use crate::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    /// `x_{i+1}`.
    Var(usize),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    /// Constant exponent.
    Pow(Box<Expr>, f64),
    Exp(Box<Expr>),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
    Sqrt(Box<Expr>),
    /// `order`-th derivative of `β(s) = exp(1 − 1/(1 − s))` for `s < 1`, zero
    /// for `s ≥ 1`. The bump of the radius is `b(r) = β(r²)`.
    Bump { order: u32, arg: Box<Expr> },
    /// `Σ (x_i − c_i)²`.
    DistSq(Vec<f64>),
    /// `if lhs ≤ rhs { then } else { otherwise }`.
    IfLe(Box<Expr>, Box<Expr>, Box<Expr>, Box<Expr>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EvalErrorKind {
    DivisionByZero,
    Domain,
    NonFinite,
    UnknownVariable,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{kind:?} while evaluating `{at}`")]
pub struct EvalError {
    pub kind: EvalErrorKind,
    /// The offending subexpression.
    pub at: String,
}

fn fault(kind: EvalErrorKind, at: &Expr) -> EvalError {
    EvalError { kind, at: at.to_string() }
}

/// Coefficients of `P_m(t)` with `β⁽ᵐ⁾(s) = P_m(t) β(s)`, `t = 1/(1 − s)`.
/// From `dt/ds = t²`: `P_{m+1} = (P_m' − P_m) t²`.
fn bump_poly(order: u32) -> Vec<f64> {
    let mut p = vec![1.0];
    for _ in 0..order {
        let mut next = vec![0.0; p.len() + 2];
        for (i, &c) in p.iter().enumerate() {
            if i > 0 {
                next[i - 1 + 2] += c * i as f64;
            }
            next[i + 2] -= c;
        }
        p = next;
    }
    p
}

pub fn bump<T: Scalar>(order: u32, s: T) -> T {
    if s >= T::one() {
        return T::zero();
    }
    let t = T::one() / (T::one() - s);
    let f = (T::one() - t).exp();
    if f == T::zero() {
        return T::zero();
    }
    let p = bump_poly(order);
    let poly = p.iter().rev().fold(T::zero(), |acc, &c| acc * t + T::lit(c));
    poly * f
}

impl Expr {
    pub fn c(v: f64) -> Expr {
        Expr::Const(v)
    }

    pub fn var(i: usize) -> Expr {
        Expr::Var(i)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Const(c) if *c == 0.0)
    }

    fn is_one(&self) -> bool {
        matches!(self, Expr::Const(c) if *c == 1.0)
    }

    /// Sum with constant folding and zero elimination.
    pub fn add(a: Expr, b: Expr) -> Expr {
        match (a, b) {
            (Expr::Const(x), Expr::Const(y)) => Expr::Const(x + y),
            (a, b) if a.is_zero() => b,
            (a, b) if b.is_zero() => a,
            (a, b) => Expr::Add(Box::new(a), Box::new(b)),
        }
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        match (a, b) {
            (Expr::Const(x), Expr::Const(y)) => Expr::Const(x - y),
            (a, b) if b.is_zero() => a,
            (a, b) if a.is_zero() => Expr::neg(b),
            (a, b) => Expr::Sub(Box::new(a), Box::new(b)),
        }
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        match (a, b) {
            (Expr::Const(x), Expr::Const(y)) => Expr::Const(x * y),
            (a, _) | (_, a) if a.is_zero() => Expr::Const(0.0),
            (a, b) if a.is_one() => b,
            (a, b) if b.is_one() => a,
            (a, b) => Expr::Mul(Box::new(a), Box::new(b)),
        }
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        match (a, b) {
            (a, _) if a.is_zero() => Expr::Const(0.0),
            (a, b) if b.is_one() => a,
            (a, b) => Expr::Div(Box::new(a), Box::new(b)),
        }
    }

    pub fn neg(a: Expr) -> Expr {
        match a {
            Expr::Const(x) => Expr::Const(-x),
            Expr::Neg(inner) => *inner,
            a => Expr::Neg(Box::new(a)),
        }
    }

    pub fn pow(a: Expr, p: f64) -> Expr {
        if p == 0.0 {
            Expr::Const(1.0)
        } else if p == 1.0 {
            a
        } else {
            Expr::Pow(Box::new(a), p)
        }
    }

    pub fn bump_of(arg: Expr) -> Expr {
        Expr::Bump { order: 0, arg: Box::new(arg) }
    }

    pub fn if_le(lhs: Expr, rhs: Expr, then: Expr, otherwise: Expr) -> Expr {
        Expr::IfLe(Box::new(lhs), Box::new(rhs), Box::new(then), Box::new(otherwise))
    }

    /// Largest variable index used, plus one.
    pub fn arity(&self) -> usize {
        match self {
            Expr::Const(_) => 0,
            Expr::Var(i) => i + 1,
            Expr::DistSq(c) => c.len(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => a.arity().max(b.arity()),
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Exp(a) | Expr::Sin(a) | Expr::Cos(a) | Expr::Sqrt(a) => a.arity(),
            Expr::Bump { arg, .. } => arg.arity(),
            Expr::IfLe(a, b, c, d) => a.arity().max(b.arity()).max(c.arity()).max(d.arity()),
        }
    }

    /// Checks that every `DistSq` has exactly `n` centre coordinates.
    pub fn dist_dims_match(&self, n: usize) -> bool {
        match self {
            Expr::Const(_) | Expr::Var(_) => true,
            Expr::DistSq(c) => c.len() == n,
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.dist_dims_match(n) && b.dist_dims_match(n)
            }
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Exp(a) | Expr::Sin(a) | Expr::Cos(a) | Expr::Sqrt(a) => {
                a.dist_dims_match(n)
            }
            Expr::Bump { arg, .. } => arg.dist_dims_match(n),
            Expr::IfLe(a, b, c, d) => [a, b, c, d].iter().all(|e| e.dist_dims_match(n)),
        }
    }

    pub fn eval<T: Scalar>(&self, x: &[T]) -> Result<T, EvalError> {
        let v = match self {
            Expr::Const(c) => T::lit(*c),
            Expr::Var(i) => *x.get(*i).ok_or_else(|| fault(EvalErrorKind::UnknownVariable, self))?,
            Expr::Add(a, b) => a.eval(x)? + b.eval(x)?,
            Expr::Sub(a, b) => a.eval(x)? - b.eval(x)?,
            Expr::Mul(a, b) => a.eval(x)? * b.eval(x)?,
            Expr::Div(a, b) => {
                let den = b.eval(x)?;
                if den == T::zero() {
                    return Err(fault(EvalErrorKind::DivisionByZero, self));
                }
                a.eval(x)? / den
            }
            Expr::Neg(a) => -a.eval(x)?,
            Expr::Pow(a, p) => {
                let base = a.eval(x)?;
                if base < T::zero() && p.fract() != 0.0 {
                    return Err(fault(EvalErrorKind::Domain, self));
                }
                if base == T::zero() && *p < 0.0 {
                    return Err(fault(EvalErrorKind::DivisionByZero, self));
                }
                if p.fract() == 0.0 && p.abs() < 64.0 {
                    base.powi(*p as i32)
                } else {
                    base.powf(T::lit(*p))
                }
            }
            Expr::Exp(a) => a.eval(x)?.exp(),
            Expr::Sin(a) => a.eval(x)?.sin(),
            Expr::Cos(a) => a.eval(x)?.cos(),
            Expr::Sqrt(a) => {
                let v = a.eval(x)?;
                if v < T::zero() {
                    return Err(fault(EvalErrorKind::Domain, self));
                }
                v.sqrt()
            }
            Expr::Bump { order, arg } => bump(*order, arg.eval(x)?),
            Expr::DistSq(c) => {
                if x.len() < c.len() {
                    return Err(fault(EvalErrorKind::UnknownVariable, self));
                }
                c.iter().zip(x).fold(T::zero(), |acc, (&ci, &xi)| {
                    let d = xi - T::lit(ci);
                    acc + d * d
                })
            }
            Expr::IfLe(u, v, a, b) => {
                if u.eval(x)? <= v.eval(x)? {
                    a.eval(x)?
                } else {
                    b.eval(x)?
                }
            }
        };
        if !v.is_finite() {
            return Err(fault(EvalErrorKind::NonFinite, self));
        }
        Ok(v)
    }

    /// `∂/∂x_{var+1}`, lightly simplified.
    pub fn diff(&self, var: usize) -> Expr {
        use Expr::*;
        match self {
            Const(_) => Const(0.0),
            Var(i) => Const(if *i == var { 1.0 } else { 0.0 }),
            Add(a, b) => Expr::add(a.diff(var), b.diff(var)),
            Sub(a, b) => Expr::sub(a.diff(var), b.diff(var)),
            Mul(a, b) => Expr::add(Expr::mul(a.diff(var), (**b).clone()), Expr::mul((**a).clone(), b.diff(var))),
            Div(a, b) => {
                let (da, db) = (a.diff(var), b.diff(var));
                if db.is_zero() {
                    return Expr::div(da, (**b).clone());
                }
                Expr::div(
                    Expr::sub(Expr::mul(da, (**b).clone()), Expr::mul((**a).clone(), db)),
                    Expr::pow((**b).clone(), 2.0),
                )
            }
            Neg(a) => Expr::neg(a.diff(var)),
            Pow(a, p) => Expr::mul(Expr::mul(Const(*p), Expr::pow((**a).clone(), p - 1.0)), a.diff(var)),
            Exp(a) => Expr::mul(self.clone(), a.diff(var)),
            Sin(a) => Expr::mul(Cos(a.clone()), a.diff(var)),
            Cos(a) => Expr::neg(Expr::mul(Sin(a.clone()), a.diff(var))),
            Sqrt(a) => Expr::div(a.diff(var), Expr::mul(Const(2.0), self.clone())),
            Bump { order, arg } => {
                let da = arg.diff(var);
                if da.is_zero() {
                    return Const(0.0);
                }
                Expr::mul(Bump { order: order + 1, arg: arg.clone() }, da)
            }
            DistSq(c) => match c.get(var) {
                None => Const(0.0),
                Some(&ci) => Expr::mul(Const(2.0), Expr::sub(Var(var), Const(ci))),
            },
            IfLe(u, v, a, b) => {
                let (da, db) = (a.diff(var), b.diff(var));
                if da.is_zero() && db.is_zero() {
                    return Const(0.0);
                }
                Expr::if_le((**u).clone(), (**v).clone(), da, db)
            }
        }
    }

    /// Substitutes `x_i ↦ a·x_i + b_i`.
    pub fn affine_substitute(&self, a: f64, b: &[f64]) -> Expr {
        use Expr::*;
        let rec = |e: &Expr| Box::new(e.affine_substitute(a, b));
        match self {
            Const(c) => Const(*c),
            Var(i) => Expr::add(Expr::mul(Const(a), Var(*i)), Const(b.get(*i).copied().unwrap_or(0.0))),
            // Σ (a x_i + b_i − c_i)² = a² Σ (x_i − (c_i − b_i)/a)²
            DistSq(c) => {
                let centre = c.iter().enumerate().map(|(i, &ci)| (ci - b.get(i).copied().unwrap_or(0.0)) / a).collect();
                Expr::mul(Const(a * a), DistSq(centre))
            }
            Add(x, y) => Add(rec(x), rec(y)),
            Sub(x, y) => Sub(rec(x), rec(y)),
            Mul(x, y) => Mul(rec(x), rec(y)),
            Div(x, y) => Div(rec(x), rec(y)),
            Neg(x) => Neg(rec(x)),
            Pow(x, p) => Pow(rec(x), *p),
            Exp(x) => Exp(rec(x)),
            Sin(x) => Sin(rec(x)),
            Cos(x) => Cos(rec(x)),
            Sqrt(x) => Sqrt(rec(x)),
            Bump { order, arg } => Bump { order: *order, arg: rec(arg) },
            IfLe(u, v, x, y) => IfLe(rec(u), rec(v), rec(x), rec(y)),
        }
    }

    /// Signed summands of the top-level sum.
    pub fn terms(&self) -> Vec<(bool, &Expr)> {
        let mut out = Vec::new();
        self.collect_terms(true, &mut out);
        out
    }

    fn collect_terms<'a>(&'a self, positive: bool, out: &mut Vec<(bool, &'a Expr)>) {
        match self {
            Expr::Add(a, b) => {
                a.collect_terms(positive, out);
                b.collect_terms(positive, out);
            }
            Expr::Sub(a, b) => {
                a.collect_terms(positive, out);
                b.collect_terms(!positive, out);
            }
            Expr::Neg(a) => a.collect_terms(!positive, out),
            e => out.push((positive, e)),
        }
    }
}

fn fmt_const(c: f64, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if c.is_sign_negative() {
        write!(f, "({c:?})")
    } else {
        write!(f, "{c:?}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Expr::*;
        match self {
            Const(c) => fmt_const(*c, f),
            Var(i) => write!(f, "x{}", i + 1),
            Add(a, b) => write!(f, "({a} + {b})"),
            Sub(a, b) => write!(f, "({a} - {b})"),
            Mul(a, b) => write!(f, "({a} * {b})"),
            Div(a, b) => write!(f, "({a} / {b})"),
            Neg(a) => match **a {
                Const(_) => write!(f, "(-({a}))"),
                _ => write!(f, "(-{a})"),
            },
            Pow(a, p) => {
                write!(f, "({a} ^ ")?;
                fmt_const(*p, f)?;
                write!(f, ")")
            }
            Exp(a) => write!(f, "exp({a})"),
            Sin(a) => write!(f, "sin({a})"),
            Cos(a) => write!(f, "cos({a})"),
            Sqrt(a) => write!(f, "sqrt({a})"),
            Bump { order: 0, arg } => write!(f, "bsq({arg})"),
            Bump { order, arg } => write!(f, "bsq_{order}({arg})"),
            DistSq(c) => {
                write!(f, "dist2(")?;
                for (i, &ci) in c.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    fmt_const(ci, f)?;
                }
                write!(f, ")")
            }
            IfLe(u, v, a, b) => write!(f, "ifle({u}, {v}, {a}, {b})"),
        }
    }
}
