//! Small expression language for `f(x, t)` and `α(x)`.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' INTEGER)?
//! primary := NUMBER | 't' | 'x'k | FUNC '(' expr ')' | '(' expr ')'
//! FUNC    := sin | cos | exp | abs
//! ```

use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExprError {
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown identifier `{name}` at {pos}")]
    UnknownIdentifier { pos: usize, name: String },
    #[error("exponent `{text}` at {pos} is not a non-negative integer literal")]
    NonIntegerExponent { pos: usize, text: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Abs,
    /// Derivative of `abs`; never produced by the parser.
    Sign,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Abs => "abs",
            Func::Sign => "sign",
        }
    }

    fn apply(self, v: f64) -> f64 {
        match self {
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
            Func::Exp => v.exp(),
            Func::Abs => v.abs(),
            Func::Sign => {
                if v > 0.0 {
                    1.0
                } else if v < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    T,
    /// Coordinate `x_{k+1}` (0-based index).
    X(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
    Call(Func, Box<Expr>),
}

/// Which variables an expression may mention.
#[derive(Debug, Clone, Copy)]
pub struct Vars {
    pub dim: usize,
    pub allow_t: bool,
}

pub fn parse(text: &str, vars: Vars) -> Result<Expr, ExprError> {
    let tokens = tokenize(text)?;
    let mut p = Parser { tokens, pos: 0, vars };
    let e = p.expr()?;
    match p.peek() {
        Tok { kind: Kind::End, .. } => Ok(e),
        t => Err(ExprError::Syntax { pos: t.pos, msg: format!("unexpected {}", t.kind) }),
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Num(f64, String),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    End,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kind::Num(_, s) => write!(f, "number `{s}`"),
            Kind::Ident(s) => write!(f, "identifier `{s}`"),
            Kind::Op(c) => write!(f, "`{c}`"),
            Kind::LParen => write!(f, "`(`"),
            Kind::RParen => write!(f, "`)`"),
            Kind::End => write!(f, "end of input"),
        }
    }
}

#[derive(Debug, Clone)]
struct Tok {
    kind: Kind,
    pos: usize,
}

fn tokenize(text: &str) -> Result<Vec<Tok>, ExprError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_digit() || c == '.' {
            while i < bytes.len() && ((bytes[i] as char).is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    i = j;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let s = &text[start..i];
            let v: f64 = s
                .parse()
                .map_err(|_| ExprError::Syntax { pos: start, msg: format!("malformed number `{s}`") })?;
            out.push(Tok { kind: Kind::Num(v, s.to_string()), pos: start });
        } else if c.is_ascii_alphabetic() || c == '_' {
            while i < bytes.len() && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push(Tok { kind: Kind::Ident(text[start..i].to_string()), pos: start });
        } else {
            let kind = match c {
                '+' | '-' | '*' | '/' | '^' => Kind::Op(c),
                '(' => Kind::LParen,
                ')' => Kind::RParen,
                _ => {
                    let ch = text[start..].chars().next().unwrap_or('?');
                    return Err(ExprError::Syntax { pos: start, msg: format!("unexpected character `{ch}`") });
                }
            };
            out.push(Tok { kind, pos: start });
            i += 1;
        }
    }
    out.push(Tok { kind: Kind::End, pos: text.len() });
    Ok(out)
}

struct Parser {
    tokens: Vec<Tok>,
    pos: usize,
    vars: Vars,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos]
    }

    fn next(&mut self) -> Tok {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek().kind {
                Kind::Op('+') => {
                    self.next();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Kind::Op('-') => {
                    self.next();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek().kind {
                Kind::Op('*') => {
                    self.next();
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Kind::Op('/') => {
                    self.next();
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if self.peek().kind == Kind::Op('-') {
            self.next();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.primary()?;
        if self.peek().kind != Kind::Op('^') {
            return Ok(base);
        }
        self.next();
        let tok = self.next();
        let k = match &tok.kind {
            Kind::Num(v, _) if v.fract() == 0.0 && *v >= 0.0 && *v <= u32::MAX as f64 => *v as u32,
            Kind::Num(_, s) => return Err(ExprError::NonIntegerExponent { pos: tok.pos, text: s.clone() }),
            Kind::Op('-') => {
                let rest = match &self.peek().kind {
                    Kind::Num(_, s) => format!("-{s}"),
                    _ => "-".to_string(),
                };
                return Err(ExprError::NonIntegerExponent { pos: tok.pos, text: rest });
            }
            other => {
                return Err(ExprError::Syntax {
                    pos: tok.pos,
                    msg: format!("expected an integer exponent, found {other}"),
                })
            }
        };
        if self.peek().kind == Kind::Op('^') {
            return Err(ExprError::Syntax { pos: self.peek().pos, msg: "chained exponents need parentheses".into() });
        }
        Ok(Expr::Pow(Box::new(base), k))
    }

    fn primary(&mut self) -> Result<Expr, ExprError> {
        let tok = self.next();
        match tok.kind {
            Kind::Num(v, _) => Ok(Expr::Num(v)),
            Kind::LParen => {
                let e = self.expr()?;
                self.expect_rparen()?;
                Ok(e)
            }
            Kind::Ident(name) => {
                let func = match name.as_str() {
                    "sin" => Some(Func::Sin),
                    "cos" => Some(Func::Cos),
                    "exp" => Some(Func::Exp),
                    "abs" => Some(Func::Abs),
                    _ => None,
                };
                if let Some(func) = func {
                    if self.peek().kind != Kind::LParen {
                        return Err(ExprError::Syntax {
                            pos: self.peek().pos,
                            msg: format!("expected `(` after `{name}`"),
                        });
                    }
                    self.next();
                    let arg = self.expr()?;
                    self.expect_rparen()?;
                    return Ok(Expr::Call(func, Box::new(arg)));
                }
                if name == "t" && self.vars.allow_t {
                    return Ok(Expr::T);
                }
                if let Some(k) = name.strip_prefix('x').and_then(|d| d.parse::<usize>().ok()) {
                    if k >= 1 && k <= self.vars.dim && !name[1..].starts_with('0') {
                        return Ok(Expr::X(k - 1));
                    }
                }
                Err(ExprError::UnknownIdentifier { pos: tok.pos, name })
            }
            other => Err(ExprError::Syntax { pos: tok.pos, msg: format!("unexpected {other}") }),
        }
    }

    fn expect_rparen(&mut self) -> Result<(), ExprError> {
        let t = self.next();
        if t.kind == Kind::RParen {
            Ok(())
        } else {
            Err(ExprError::Syntax { pos: t.pos, msg: format!("expected `)`, found {}", t.kind) })
        }
    }
}

fn num(v: f64) -> Expr {
    Expr::Num(v)
}

fn add(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (Expr::Num(x), Expr::Num(y)) => num(x + y),
        (Expr::Num(z), e) | (e, Expr::Num(z)) if z == 0.0 => e,
        (a, b) => Expr::Add(Box::new(a), Box::new(b)),
    }
}

fn sub(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (Expr::Num(x), Expr::Num(y)) => num(x - y),
        (e, Expr::Num(0.0)) => e,
        (Expr::Num(0.0), e) => neg(e),
        (a, b) => Expr::Sub(Box::new(a), Box::new(b)),
    }
}

fn mul(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (Expr::Num(x), Expr::Num(y)) => num(x * y),
        (Expr::Num(z), _) | (_, Expr::Num(z)) if z == 0.0 => num(0.0),
        (Expr::Num(o), e) | (e, Expr::Num(o)) if o == 1.0 => e,
        (a, b) => Expr::Mul(Box::new(a), Box::new(b)),
    }
}

fn div(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (Expr::Num(0.0), _) => num(0.0),
        (e, Expr::Num(1.0)) => e,
        (a, b) => Expr::Div(Box::new(a), Box::new(b)),
    }
}

fn neg(a: Expr) -> Expr {
    match a {
        Expr::Num(x) => num(-x),
        Expr::Neg(e) => *e,
        e => Expr::Neg(Box::new(e)),
    }
}

fn pow(a: Expr, k: u32) -> Expr {
    match (a, k) {
        (_, 0) => num(1.0),
        (e, 1) => e,
        (Expr::Num(x), k) => num(x.powi(k as i32)),
        (e, k) => Expr::Pow(Box::new(e), k),
    }
}

impl Expr {
    pub fn eval(&self, t: f64, x: &[f64]) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::T => t,
            Expr::X(k) => x[*k],
            Expr::Neg(e) => -e.eval(t, x),
            Expr::Add(a, b) => a.eval(t, x) + b.eval(t, x),
            Expr::Sub(a, b) => a.eval(t, x) - b.eval(t, x),
            Expr::Mul(a, b) => a.eval(t, x) * b.eval(t, x),
            Expr::Div(a, b) => a.eval(t, x) / b.eval(t, x),
            Expr::Pow(e, k) => e.eval(t, x).powi(*k as i32),
            Expr::Call(f, e) => f.apply(e.eval(t, x)),
        }
    }

    pub fn depends_on_t(&self) -> bool {
        self.any(&|e| matches!(e, Expr::T))
    }

    pub fn depends_on_x(&self) -> bool {
        self.any(&|e| matches!(e, Expr::X(_)))
    }

    fn any(&self, pred: &dyn Fn(&Expr) -> bool) -> bool {
        if pred(self) {
            return true;
        }
        match self {
            Expr::Num(_) | Expr::T | Expr::X(_) => false,
            Expr::Neg(e) | Expr::Pow(e, _) | Expr::Call(_, e) => e.any(pred),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => a.any(pred) || b.any(pred),
        }
    }

    /// Symbolic derivative in `t`.
    pub fn diff_t(&self) -> Expr {
        match self {
            Expr::Num(_) | Expr::X(_) => num(0.0),
            Expr::T => num(1.0),
            Expr::Neg(e) => neg(e.diff_t()),
            Expr::Add(a, b) => add(a.diff_t(), b.diff_t()),
            Expr::Sub(a, b) => sub(a.diff_t(), b.diff_t()),
            Expr::Mul(a, b) => add(mul(a.diff_t(), (**b).clone()), mul((**a).clone(), b.diff_t())),
            Expr::Div(a, b) => {
                if !b.depends_on_t() {
                    div(a.diff_t(), (**b).clone())
                } else {
                    div(
                        sub(mul(a.diff_t(), (**b).clone()), mul((**a).clone(), b.diff_t())),
                        pow((**b).clone(), 2),
                    )
                }
            }
            Expr::Pow(e, k) => mul(mul(num(*k as f64), pow((**e).clone(), k - 1)), e.diff_t()),
            Expr::Call(f, e) => {
                let inner = e.diff_t();
                let outer = match f {
                    Func::Sin => Expr::Call(Func::Cos, e.clone()),
                    Func::Cos => neg(Expr::Call(Func::Sin, e.clone())),
                    Func::Exp => Expr::Call(Func::Exp, e.clone()),
                    Func::Abs => Expr::Call(Func::Sign, e.clone()),
                    Func::Sign => num(0.0),
                };
                mul(outer, inner)
            }
        }
    }

    /// Coefficients `c_k(x)` with `self = Σ c_k(x) t^k`, when the expression
    /// is a polynomial in `t` with `t`-free coefficients.
    pub fn as_poly_in_t(&self) -> Option<Vec<Expr>> {
        const MAX_DEGREE: usize = 64;
        if !self.depends_on_t() {
            return Some(vec![self.clone()]);
        }
        let poly = match self {
            Expr::T => vec![num(0.0), num(1.0)],
            Expr::Neg(e) => e.as_poly_in_t()?.into_iter().map(neg).collect(),
            Expr::Add(a, b) => poly_add(a.as_poly_in_t()?, b.as_poly_in_t()?, false),
            Expr::Sub(a, b) => poly_add(a.as_poly_in_t()?, b.as_poly_in_t()?, true),
            Expr::Mul(a, b) => poly_mul(&a.as_poly_in_t()?, &b.as_poly_in_t()?),
            Expr::Div(a, b) if !b.depends_on_t() => {
                a.as_poly_in_t()?.into_iter().map(|c| div(c, (**b).clone())).collect()
            }
            Expr::Pow(e, k) => {
                let base = e.as_poly_in_t()?;
                if (base.len() - 1) * (*k as usize) > MAX_DEGREE {
                    return None;
                }
                let mut acc = vec![num(1.0)];
                for _ in 0..*k {
                    acc = poly_mul(&acc, &base);
                }
                acc
            }
            _ => return None,
        };
        (poly.len() <= MAX_DEGREE + 1).then_some(poly)
    }
}

fn poly_add(a: Vec<Expr>, b: Vec<Expr>, subtract: bool) -> Vec<Expr> {
    let len = a.len().max(b.len());
    let mut a = a.into_iter();
    let mut b = b.into_iter();
    (0..len)
        .map(|_| {
            let x = a.next().unwrap_or(num(0.0));
            let y = b.next().unwrap_or(num(0.0));
            if subtract {
                sub(x, y)
            } else {
                add(x, y)
            }
        })
        .collect()
}

fn poly_mul(a: &[Expr], b: &[Expr]) -> Vec<Expr> {
    let mut out = vec![num(0.0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            let term = mul(x.clone(), y.clone());
            out[i + j] = add(std::mem::replace(&mut out[i + j], num(0.0)), term);
        }
    }
    out
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::T => write!(f, "t"),
            Expr::X(k) => write!(f, "x{}", k + 1),
            Expr::Neg(e) => write!(f, "-({e})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Pow(e, k) => write!(f, "({e})^{k}"),
            Expr::Call(func, e) => write!(f, "{}({e})", func.name()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TX: Vars = Vars { dim: 2, allow_t: true };

    fn ev(s: &str, t: f64, x: &[f64]) -> f64 {
        parse(s, TX).unwrap().eval(t, x)
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(ev("1 + 2 * 3", 0.0, &[0.0, 0.0]), 7.0);
        assert_eq!(ev("-t^2", 3.0, &[0.0, 0.0]), -9.0);
        assert_eq!(ev("8 / 4 / 2", 0.0, &[0.0, 0.0]), 1.0);
        assert_eq!(ev("10 - 4 - 3", 0.0, &[0.0, 0.0]), 3.0);
        assert_eq!(ev("(1 + x1) * x2", 0.0, &[1.0, 2.0]), 4.0);
        assert_eq!(ev("--t", 2.0, &[0.0, 0.0]), 2.0);
        assert_eq!(ev("2.5e-1 * 4", 0.0, &[0.0, 0.0]), 1.0);
        assert!((ev("exp(0) + cos(0) + sin(0) + abs(-2)", 0.0, &[0.0, 0.0]) - 4.0).abs() < 1e-15);
    }

    #[test]
    fn errors_carry_positions() {
        assert_eq!(
            parse("t +* 2", TX),
            Err(ExprError::Syntax { pos: 3, msg: "unexpected `*`".into() })
        );
        assert_eq!(parse("y + 1", TX), Err(ExprError::UnknownIdentifier { pos: 0, name: "y".into() }));
        assert_eq!(parse("x3", TX), Err(ExprError::UnknownIdentifier { pos: 0, name: "x3".into() }));
        assert_eq!(
            parse("t^1.5", TX),
            Err(ExprError::NonIntegerExponent { pos: 2, text: "1.5".into() })
        );
        assert!(matches!(parse("t^-1", TX), Err(ExprError::NonIntegerExponent { pos: 2, .. })));
        assert!(matches!(parse("(t + 1", TX), Err(ExprError::Syntax { pos: 6, .. })));
        assert!(matches!(parse("t # 1", TX), Err(ExprError::Syntax { pos: 2, .. })));
        assert!(matches!(
            parse("t", Vars { dim: 1, allow_t: false }),
            Err(ExprError::UnknownIdentifier { .. })
        ));
    }

    #[test]
    fn derivative_matches_central_difference() {
        let cases = ["-(t^3 + 1)", "sin(t) * exp(x1 * t)", "t / (1 + t^2)", "abs(t - 0.3) * cos(t)", "x2 - t"];
        let x = [0.3, -0.7];
        for s in cases {
            let e = parse(s, TX).unwrap();
            let d = e.diff_t();
            for &t in &[-1.3, -0.1, 0.45, 2.0] {
                let h = 1e-6;
                let fd = (e.eval(t + h, &x) - e.eval(t - h, &x)) / (2.0 * h);
                assert!((d.eval(t, &x) - fd).abs() < 1e-6 * (1.0 + fd.abs()), "{s} at {t}");
            }
        }
    }

    #[test]
    fn polynomial_detection() {
        let p = parse("-(t^3 + 1) * (1 + x1)", TX).unwrap().as_poly_in_t().unwrap();
        assert_eq!(p.len(), 4);
        let x = [0.25, 0.0];
        let vals: Vec<f64> = p.iter().map(|c| c.eval(0.0, &x)).collect();
        assert_eq!(vals, vec![-1.25, 0.0, 0.0, -1.25]);
        assert!(parse("sin(t)", TX).unwrap().as_poly_in_t().is_none());
        assert!(parse("1 / t", TX).unwrap().as_poly_in_t().is_none());
        assert!(parse("t / (2 + x1)", TX).unwrap().as_poly_in_t().is_some());
        assert!(parse("(t + 1)^100", TX).unwrap().as_poly_in_t().is_none());
    }
}
