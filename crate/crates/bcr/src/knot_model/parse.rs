//! Recursive-descent parser for knot expressions.
//!
//! ```text
//! sum     := product (('+' | '-') product)*
//! product := unary (('*' | '/' | '·' | '×')? unary)*     juxtaposition multiplies
//! unary   := '-' unary | power
//! power   := atom ('^' unary)?                           constant exponent
//! atom    := number | x1..xn | r | r2 | pi | ‖x‖ | |x| | call | '(' sum ')'
//! ```
//!
//! Calls: `exp sin cos sqrt pow(e, p) b(e) bsq(s) bsq_m(s) dist2(c1, .., cn)
//! ifle(u, v, a, b)`. `b(e)` is the bump of a radius, rewritten as `bsq(e²)`;
//! `r` is `sqrt(dist2(0))` and `r2` is `dist2(0)`.

use super::expr::Expr;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("syntax error at column {column}: {message}")]
pub struct ParseError {
    /// 1-based character column in the parsed text.
    pub column: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    Norm,
    End,
}

struct Lexer {
    toks: Vec<(Tok, usize)>,
}

fn subscript_digit(c: char) -> Option<char> {
    let s = "₀₁₂₃₄₅₆₇₈₉";
    s.chars().position(|d| d == c).map(|i| (b'0' + i as u8) as char)
}

impl Lexer {
    fn new(text: &str) -> Result<Self, ParseError> {
        let chars: Vec<char> = text.chars().collect();
        let mut toks = Vec::new();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let start = i;
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    let mut j = i + 1;
                    if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].is_ascii_digit() {
                        i = j;
                        while i < chars.len() && chars[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let s: String = chars[start..i].iter().collect();
                let v = s.parse::<f64>().map_err(|_| ParseError { column: start + 1, message: format!("bad number {s:?}") })?;
                toks.push((Tok::Num(v), start));
                continue;
            }
            if c.is_alphabetic() || c == '_' {
                let mut s = String::new();
                while i < chars.len() {
                    let ch = chars[i];
                    if let Some(d) = subscript_digit(ch) {
                        s.push(d);
                    } else if ch.is_alphanumeric() || ch == '_' {
                        s.push(ch);
                    } else {
                        break;
                    }
                    i += 1;
                }
                toks.push((Tok::Ident(s), start));
                continue;
            }
            if c == '‖' || c == '|' {
                // only the norm of the parameter vector is supported
                let rest: String = chars[i + 1..].iter().take(2).collect();
                if rest.starts_with('x') && rest.ends_with(c) && rest.chars().count() == 2 {
                    toks.push((Tok::Norm, start));
                    i += 3;
                    continue;
                }
                return Err(ParseError { column: start + 1, message: format!("only {c}x{c} is supported") });
            }
            if "+-*/^(),·×".contains(c) {
                let op = match c {
                    '·' | '×' => '*',
                    other => other,
                };
                toks.push((Tok::Op(op), start));
                i += 1;
                continue;
            }
            return Err(ParseError { column: start + 1, message: format!("unexpected character {c:?}") });
        }
        toks.push((Tok::End, chars.len()));
        Ok(Lexer { toks })
    }
}

/// Parses one expression in `n` variables.
pub fn parse_expr(text: &str, n: usize) -> Result<Expr, ParseError> {
    let lexer = Lexer::new(text)?;
    let mut p = Parser { toks: lexer.toks, pos: 0, n };
    let e = p.sum()?;
    match p.peek() {
        Tok::End => Ok(e),
        t => Err(p.error(format!("unexpected {t:?} after expression"))),
    }
}

/// Splits `(e1, ..., em)` at top-level commas; returns the pieces and the
/// column where each starts.
pub fn split_tuple(text: &str) -> Result<Vec<(String, usize)>, ParseError> {
    let trimmed = text.trim();
    let offset = text.find(trimmed).unwrap_or(0);
    let lead = text[..offset].chars().count();
    let inner = trimmed
        .strip_prefix('(')
        .and_then(|t| t.strip_suffix(')'))
        .ok_or(ParseError { column: lead + 1, message: "coordinates must be a parenthesised tuple".into() })?;
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    let mut start = lead + 2;
    for (i, c) in inner.chars().enumerate() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            _ => {}
        }
        if depth < 0 {
            return Err(ParseError { column: lead + 2 + i, message: "unbalanced ')'".into() });
        }
        if c == ',' && depth == 0 {
            out.push((std::mem::take(&mut cur), start));
            start = lead + 3 + i;
        } else {
            cur.push(c);
        }
    }
    if depth != 0 {
        return Err(ParseError { column: lead + 1, message: "unbalanced '('".into() });
    }
    out.push((cur, start));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    n: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].0
    }

    fn error(&self, message: String) -> ParseError {
        ParseError { column: self.toks[self.pos].1 + 1, message }
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if *self.peek() == Tok::Op(c) {
            self.bump();
            Ok(())
        } else {
            Err(self.error(format!("expected '{c}'")))
        }
    }

    fn sum(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.product()?;
        loop {
            match self.peek() {
                Tok::Op('+') => {
                    self.bump();
                    e = Expr::Add(Box::new(e), Box::new(self.product()?));
                }
                Tok::Op('-') => {
                    self.bump();
                    e = Expr::Sub(Box::new(e), Box::new(self.product()?));
                }
                _ => return Ok(e),
            }
        }
    }

    fn product(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.unary()?;
        loop {
            match self.peek() {
                Tok::Op('*') => {
                    self.bump();
                    e = Expr::Mul(Box::new(e), Box::new(self.unary()?));
                }
                Tok::Op('/') => {
                    self.bump();
                    e = Expr::Div(Box::new(e), Box::new(self.unary()?));
                }
                Tok::Num(_) | Tok::Ident(_) | Tok::Norm | Tok::Op('(') => {
                    e = Expr::Mul(Box::new(e), Box::new(self.power()?));
                }
                _ => return Ok(e),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Op('-') {
            self.bump();
            if let Tok::Num(v) = *self.peek() {
                if *self.peek_at(1) != Tok::Op('^') {
                    self.bump();
                    return Ok(Expr::Const(-v));
                }
            }
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if *self.peek() == Tok::Op('^') {
            self.bump();
            let exponent = self.constant_of(|p| p.unary())?;
            return Ok(Expr::Pow(Box::new(base), exponent));
        }
        Ok(base)
    }

    fn constant_of(&mut self, f: impl FnOnce(&mut Self) -> Result<Expr, ParseError>) -> Result<f64, ParseError> {
        let at = self.pos;
        let e = f(self)?;
        match e.eval::<f64>(&[]) {
            Ok(v) if e.arity() == 0 => Ok(v),
            _ => Err(ParseError { column: self.toks[at].1 + 1, message: "expected a constant".into() }),
        }
    }

    fn args(&mut self) -> Result<Vec<Expr>, ParseError> {
        self.expect('(')?;
        let mut out = vec![self.sum()?];
        while *self.peek() == Tok::Op(',') {
            self.bump();
            out.push(self.sum()?);
        }
        self.expect(')')?;
        Ok(out)
    }

    fn one_arg(&mut self, name: &str) -> Result<Expr, ParseError> {
        let at = self.pos;
        let mut a = self.args()?;
        if a.len() != 1 {
            return Err(ParseError { column: self.toks[at].1 + 1, message: format!("{name} takes one argument") });
        }
        Ok(a.pop().unwrap())
    }

    fn origin(&self) -> Expr {
        Expr::DistSq(vec![0.0; self.n])
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let at = self.pos;
        match self.bump() {
            Tok::Num(v) => Ok(Expr::Const(v)),
            Tok::Norm => Ok(Expr::Sqrt(Box::new(self.origin()))),
            Tok::Op('(') => {
                let e = self.sum()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => self.ident(name, at),
            t => {
                self.pos = at;
                Err(self.error(format!("unexpected {t:?}")))
            }
        }
    }

    fn ident(&mut self, name: String, at: usize) -> Result<Expr, ParseError> {
        let column = self.toks[at].1 + 1;
        let err = move |message: String| ParseError { column, message };
        if let Some(idx) = name.strip_prefix('x').and_then(|d| d.parse::<usize>().ok()) {
            if idx == 0 || idx > self.n {
                return Err(err(format!("variable {name} outside x1..x{}", self.n)));
            }
            return Ok(Expr::Var(idx - 1));
        }
        let boxed = |e: Expr| Box::new(e);
        match name.as_str() {
            "r" => Ok(Expr::Sqrt(boxed(self.origin()))),
            "r2" => Ok(self.origin()),
            "pi" => Ok(Expr::Const(std::f64::consts::PI)),
            "exp" => Ok(Expr::Exp(boxed(self.one_arg("exp")?))),
            "sin" => Ok(Expr::Sin(boxed(self.one_arg("sin")?))),
            "cos" => Ok(Expr::Cos(boxed(self.one_arg("cos")?))),
            "sqrt" => Ok(Expr::Sqrt(boxed(self.one_arg("sqrt")?))),
            "b" => {
                let a = self.one_arg("b")?;
                let arg = match a {
                    Expr::Sqrt(s) => *s,
                    other => Expr::Mul(boxed(other.clone()), boxed(other)),
                };
                Ok(Expr::bump_of(arg))
            }
            "pow" => {
                self.expect('(')?;
                let base = self.sum()?;
                self.expect(',')?;
                let p = self.constant_of(|p| p.sum())?;
                self.expect(')')?;
                Ok(Expr::Pow(boxed(base), p))
            }
            "dist2" => {
                self.expect('(')?;
                let mut c = vec![self.constant_of(|p| p.sum())?];
                while *self.peek() == Tok::Op(',') {
                    self.bump();
                    c.push(self.constant_of(|p| p.sum())?);
                }
                self.expect(')')?;
                if c.len() != self.n {
                    return Err(err(format!("dist2 needs {} coordinates, got {}", self.n, c.len())));
                }
                Ok(Expr::DistSq(c))
            }
            "ifle" => {
                let a = self.args()?;
                let [u, v, x, y]: [Expr; 4] = a.try_into().map_err(|_| err("ifle takes four arguments".into()))?;
                Ok(Expr::if_le(u, v, x, y))
            }
            other => {
                if let Some(order) = other.strip_prefix("bsq") {
                    let order = match order {
                        "" => 0,
                        o => o
                            .strip_prefix('_')
                            .and_then(|d| d.parse::<u32>().ok())
                            .ok_or_else(|| err(format!("unknown function {other}")))?,
                    };
                    return Ok(Expr::Bump { order, arg: boxed(self.one_arg("bsq")?) });
                }
                Err(err(format!("unknown identifier {other}")))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Expr {
        parse_expr(s, 3).unwrap()
    }

    #[test]
    fn precedence_and_juxtaposition() {
        let x = [0.3f64, -0.7, 1.1];
        let v: f64 = p("2x1 + 3*x2^2 - x3/2").eval(&x).unwrap();
        assert!((v - (0.6 + 3.0 * 0.49 - 0.55)).abs() < 1e-15);
        assert_eq!(p("-2^2").eval::<f64>(&x).unwrap(), -4.0);
        assert_eq!(p("-2"), Expr::Const(-2.0));
        assert_eq!(p("-x1"), Expr::Neg(Box::new(Expr::Var(0))));
    }

    #[test]
    fn radius_forms() {
        let norm = Expr::Sqrt(Box::new(Expr::DistSq(vec![0.0; 3])));
        assert_eq!(p("r"), norm);
        assert_eq!(p("‖x‖"), norm);
        assert_eq!(p("|x|"), norm);
        assert_eq!(p("b(r)"), Expr::bump_of(Expr::DistSq(vec![0.0; 3])));
        assert_eq!(p("b(‖x‖)·sin(x₁)"), p("bsq(r2) * sin(x1)"));
    }

    #[test]
    fn errors_carry_columns() {
        let e = parse_expr("x1 + $", 3).unwrap_err();
        assert_eq!(e.column, 6);
        let e = parse_expr("x1 + x4", 3).unwrap_err();
        assert_eq!(e.column, 6);
        assert!(parse_expr("sin(x1", 3).is_err());
        assert!(parse_expr("x1 ^ x2", 3).is_err());
        assert!(parse_expr("dist2(1, 2)", 3).is_err());
        assert!(parse_expr("foo(x1)", 3).is_err());
    }

    #[test]
    fn tuples_split_at_top_level() {
        let parts = split_tuple("(0, sin(x1, 2), x3)").unwrap();
        let texts: Vec<&str> = parts.iter().map(|(s, _)| s.trim()).collect();
        assert_eq!(texts, ["0", "sin(x1, 2)", "x3"]);
        assert!(split_tuple("0, 1").is_err());
        assert!(split_tuple("(0, (1)").is_err());
    }

    #[test]
    fn printed_expressions_read_back() {
        for s in [
            "ifle(dist2(0.0, 0.0, 0.5), 0.0625, (0.25 * x1), x2)",
            "(-((-2.0)))",
            "bsq_3((4.0 * dist2(0.1, (-0.2), 0.0)))",
            "(exp((x1 ^ (-1.5))) / cos(1e-7))",
        ] {
            let e = p(s);
            assert_eq!(e.to_string(), s);
            assert_eq!(p(&e.to_string()), e);
        }
    }
}
