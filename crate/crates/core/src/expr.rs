//! Expression trees over two variables with symbolic differentiation.

use std::fmt;
use std::sync::Arc;

use crate::error::{GeoError, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(usize),
    Neg(Arc<Expr>),
    Add(Arc<Expr>, Arc<Expr>),
    Sub(Arc<Expr>, Arc<Expr>),
    Mul(Arc<Expr>, Arc<Expr>),
    Div(Arc<Expr>, Arc<Expr>),
    Pow(Arc<Expr>, i32),
    Exp(Arc<Expr>),
    Sin(Arc<Expr>),
    Cos(Arc<Expr>),
}

use Expr::*;

impl Expr {
    pub fn c(v: f64) -> Expr {
        Const(v)
    }

    pub fn var(i: usize) -> Expr {
        Var(i)
    }

    fn as_const(&self) -> Option<f64> {
        match self {
            Const(v) => Some(*v),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const() == Some(0.0)
    }

    pub fn neg(a: Expr) -> Expr {
        match a {
            Const(v) => Const(-v),
            Neg(inner) => (*inner).clone(),
            other => Neg(Arc::new(other)),
        }
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) => Const(x + y),
            (Some(x), _) if x == 0.0 => b,
            (_, Some(y)) if y == 0.0 => a,
            _ => Add(Arc::new(a), Arc::new(b)),
        }
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) => Const(x - y),
            (Some(x), _) if x == 0.0 => Expr::neg(b),
            (_, Some(y)) if y == 0.0 => a,
            _ => Sub(Arc::new(a), Arc::new(b)),
        }
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) => Const(x * y),
            (Some(x), _) | (_, Some(x)) if x == 0.0 => Const(0.0),
            (Some(x), _) if x == 1.0 => b,
            (_, Some(y)) if y == 1.0 => a,
            (Some(x), _) if x == -1.0 => Expr::neg(b),
            (_, Some(y)) if y == -1.0 => Expr::neg(a),
            _ => Mul(Arc::new(a), Arc::new(b)),
        }
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(x), _) if x == 0.0 => Const(0.0),
            (_, Some(y)) if y == 1.0 => a,
            _ => Div(Arc::new(a), Arc::new(b)),
        }
    }

    pub fn pow(a: Expr, n: i32) -> Expr {
        match (a.as_const(), n) {
            (_, 0) => Const(1.0),
            (_, 1) => a,
            (Some(x), _) => Const(x.powi(n)),
            _ => Pow(Arc::new(a), n),
        }
    }

    pub fn exp(a: Expr) -> Expr {
        match a.as_const() {
            Some(x) => Const(x.exp()),
            None => Exp(Arc::new(a)),
        }
    }

    pub fn sin(a: Expr) -> Expr {
        match a.as_const() {
            Some(x) => Const(x.sin()),
            None => Sin(Arc::new(a)),
        }
    }

    pub fn cos(a: Expr) -> Expr {
        match a.as_const() {
            Some(x) => Const(x.cos()),
            None => Cos(Arc::new(a)),
        }
    }

    /// Evaluate at `v = [var0, var1]`.
    pub fn eval(&self, v: [f64; 2]) -> Result<f64> {
        Ok(match self {
            Const(c) => *c,
            Var(i) => v[*i],
            Neg(a) => -a.eval(v)?,
            Add(a, b) => a.eval(v)? + b.eval(v)?,
            Sub(a, b) => a.eval(v)? - b.eval(v)?,
            Mul(a, b) => a.eval(v)? * b.eval(v)?,
            Div(a, b) => {
                let d = b.eval(v)?;
                if d == 0.0 || !d.is_finite() {
                    return Err(GeoError::Domain(format!("division by zero at ({}, {})", v[0], v[1])));
                }
                a.eval(v)? / d
            }
            Pow(a, n) => {
                let base = a.eval(v)?;
                if *n < 0 && base == 0.0 {
                    return Err(GeoError::Domain(format!("negative power of zero at ({}, {})", v[0], v[1])));
                }
                base.powi(*n)
            }
            Exp(a) => a.eval(v)?.exp(),
            Sin(a) => a.eval(v)?.sin(),
            Cos(a) => a.eval(v)?.cos(),
        })
    }

    /// Symbolic partial derivative with respect to variable `i`.
    pub fn diff(&self, i: usize) -> Expr {
        match self {
            Const(_) => Const(0.0),
            Var(j) => Const(if *j == i { 1.0 } else { 0.0 }),
            Neg(a) => Expr::neg(a.diff(i)),
            Add(a, b) => Expr::add(a.diff(i), b.diff(i)),
            Sub(a, b) => Expr::sub(a.diff(i), b.diff(i)),
            Mul(a, b) => Expr::add(
                Expr::mul(a.diff(i), (**b).clone()),
                Expr::mul((**a).clone(), b.diff(i)),
            ),
            Div(a, b) => {
                // (a'b - ab') / b^2
                let num = Expr::sub(
                    Expr::mul(a.diff(i), (**b).clone()),
                    Expr::mul((**a).clone(), b.diff(i)),
                );
                Expr::div(num, Expr::pow((**b).clone(), 2))
            }
            Pow(a, n) => Expr::mul(
                Expr::mul(Const(*n as f64), Expr::pow((**a).clone(), n - 1)),
                a.diff(i),
            ),
            Exp(a) => Expr::mul(self.clone(), a.diff(i)),
            Sin(a) => Expr::mul(Expr::cos((**a).clone()), a.diff(i)),
            Cos(a) => Expr::neg(Expr::mul(Expr::sin((**a).clone()), a.diff(i))),
        }
    }

    /// Render with the given variable names.
    pub fn render(&self, names: [&str; 2]) -> String {
        let mut s = String::new();
        self.write(&mut s, names, 0);
        s
    }

    fn write(&self, out: &mut String, names: [&str; 2], prec: u8) {
        let wrap = |out: &mut String, p: u8, f: &dyn Fn(&mut String)| {
            if prec > p {
                out.push('(');
                f(out);
                out.push(')');
            } else {
                f(out);
            }
        };
        match self {
            Const(c) => {
                if *c < 0.0 {
                    wrap(out, 2, &|o: &mut String| o.push_str(&format!("{}", c)));
                } else {
                    out.push_str(&format!("{}", c));
                }
            }
            Var(i) => out.push_str(names[*i]),
            Neg(a) => wrap(out, 1, &|o: &mut String| {
                o.push('-');
                a.write(o, names, 3);
            }),
            Add(a, b) => wrap(out, 1, &|o: &mut String| {
                a.write(o, names, 1);
                o.push_str(" + ");
                b.write(o, names, 2);
            }),
            Sub(a, b) => wrap(out, 1, &|o: &mut String| {
                a.write(o, names, 1);
                o.push_str(" - ");
                b.write(o, names, 2);
            }),
            Mul(a, b) => wrap(out, 2, &|o: &mut String| {
                a.write(o, names, 2);
                o.push('*');
                b.write(o, names, 3);
            }),
            Div(a, b) => wrap(out, 2, &|o: &mut String| {
                a.write(o, names, 2);
                o.push('/');
                b.write(o, names, 3);
            }),
            Pow(a, n) => wrap(out, 3, &|o: &mut String| {
                a.write(o, names, 4);
                if *n < 0 {
                    o.push_str(&format!("^({})", n));
                } else {
                    o.push_str(&format!("^{}", n));
                }
            }),
            Exp(a) | Sin(a) | Cos(a) => {
                let f = match self {
                    Exp(_) => "exp",
                    Sin(_) => "sin",
                    _ => "cos",
                };
                out.push_str(f);
                out.push('(');
                a.write(out, names, 0);
                out.push(')');
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(["x", "y"]))
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
}

fn tokenize(src: &str) -> Result<Vec<(Tok, usize)>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let ch = chars[i];
        if ch.is_whitespace() {
            i += 1;
        } else if ch.is_ascii_digit() || ch == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            // exponent part, only if followed by a digit or sign+digit
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
            let text: String = chars[start..i].iter().collect();
            let v: f64 = text
                .parse()
                .map_err(|_| GeoError::Parse { pos: start, msg: format!("bad number '{}'", text) })?;
            out.push((Tok::Num(v), start));
        } else if ch.is_alphabetic() || ch == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), start));
        } else if "+-*/^()".contains(ch) {
            out.push((Tok::Op(ch), i));
            i += 1;
        } else {
            return Err(GeoError::Parse { pos: i, msg: format!("unexpected character '{}'", ch) });
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    vars: [&'a str; 2],
    end: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map(|t| t.1).unwrap_or(self.end)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Op(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Expr::add(lhs, self.term()?);
            } else if self.eat('-') {
                lhs = Expr::sub(lhs, self.term()?);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Expr::mul(lhs, self.unary()?);
            } else if self.eat('/') {
                lhs = Expr::div(lhs, self.unary()?);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat('-') {
            return Ok(Expr::neg(self.unary()?));
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.eat('^') {
            let at = self.here();
            let neg = self.eat('-');
            let paren = !neg && self.eat('(');
            let neg = neg || (paren && self.eat('-'));
            let n = match self.peek() {
                Some(Tok::Num(v)) if v.fract() == 0.0 && v.abs() < 1e6 => *v as i32,
                _ => return Err(GeoError::Parse { pos: at, msg: "exponent must be an integer literal".into() }),
            };
            self.pos += 1;
            if paren && !self.eat(')') {
                return Err(GeoError::Parse { pos: self.here(), msg: "expected ')'".into() });
            }
            return Ok(Expr::pow(base, if neg { -n } else { n }));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        let at = self.here();
        match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(Const(v))
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return Err(GeoError::Parse { pos: self.here(), msg: "expected ')'".into() });
                }
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if let Some(i) = self.vars.iter().position(|v| *v == name) {
                    return Ok(Var(i));
                }
                match name.as_str() {
                    "pi" => return Ok(Const(std::f64::consts::PI)),
                    "exp" | "sin" | "cos" => {}
                    _ => return Err(GeoError::UnknownIdent { pos: at, name }),
                }
                if !self.eat('(') {
                    return Err(GeoError::Parse { pos: self.here(), msg: format!("expected '(' after {}", name) });
                }
                let arg = self.expr()?;
                if !self.eat(')') {
                    return Err(GeoError::Parse { pos: self.here(), msg: "expected ')'".into() });
                }
                Ok(match name.as_str() {
                    "exp" => Expr::exp(arg),
                    "sin" => Expr::sin(arg),
                    _ => Expr::cos(arg),
                })
            }
            Some(Tok::Op(c)) => Err(GeoError::Parse { pos: at, msg: format!("unexpected '{}'", c) }),
            None => Err(GeoError::Parse { pos: at, msg: "unexpected end of input".into() }),
        }
    }
}

/// Parse an expression in the variables `vars`. Positions in errors are
/// character offsets into `src` shifted by `offset`.
pub fn parse_expr_in(src: &str, vars: [&str; 2], offset: usize) -> Result<Expr> {
    let shift = |e: GeoError| match e {
        GeoError::Parse { pos, msg } => GeoError::Parse { pos: pos + offset, msg },
        GeoError::UnknownIdent { pos, name } => GeoError::UnknownIdent { pos: pos + offset, name },
        other => other,
    };
    let toks = tokenize(src).map_err(shift)?;
    let mut p = Parser { toks, pos: 0, vars, end: src.chars().count() };
    let e = p.expr().map_err(shift)?;
    if p.pos != p.toks.len() {
        return Err(shift(GeoError::Parse { pos: p.here(), msg: "trailing input".into() }));
    }
    Ok(e)
}

pub fn parse_expr(src: &str) -> Result<Expr> {
    parse_expr_in(src, ["x", "y"], 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_eval() {
        let e = parse_expr("1 + (y - 0.5)^2 - 2*x/4").unwrap();
        assert!((e.eval([1.0, 1.5]).unwrap() - 1.5).abs() < 1e-15);
        let e = parse_expr("-y^2").unwrap();
        assert_eq!(e.eval([0.0, 3.0]).unwrap(), -9.0);
        let e = parse_expr("x^(-2)").unwrap();
        assert_eq!(e.eval([2.0, 0.0]).unwrap(), 0.25);
        let e = parse_expr("1e-3*x + 2E2").unwrap();
        assert!((e.eval([1.0, 0.0]).unwrap() - 200.001).abs() < 1e-12);
    }

    #[test]
    fn derivatives() {
        let e = parse_expr("exp(y)*sin(x) + x^3/y").unwrap();
        let ex = e.diff(0);
        let ey = e.diff(1);
        let (x, y): (f64, f64) = (0.7, 1.3);
        let want_x = y.exp() * x.cos() + 3.0 * x * x / y;
        let want_y = y.exp() * x.sin() - x.powi(3) / (y * y);
        assert!((ex.eval([x, y]).unwrap() - want_x).abs() < 1e-13);
        assert!((ey.eval([x, y]).unwrap() - want_y).abs() < 1e-13);
    }

    #[test]
    fn errors_carry_position() {
        match parse_expr("x + zeta") {
            Err(GeoError::UnknownIdent { pos, name }) => {
                assert_eq!(pos, 4);
                assert_eq!(name, "zeta");
            }
            other => panic!("{:?}", other),
        }
        match parse_expr("x + (y") {
            Err(GeoError::Parse { pos, .. }) => assert_eq!(pos, 6),
            other => panic!("{:?}", other),
        }
        assert!(parse_expr("x^y").is_err());
        assert!(parse_expr("x $ 2").is_err());
    }

    #[test]
    fn division_by_zero_is_domain_error() {
        let e = parse_expr("1/x").unwrap();
        assert!(matches!(e.eval([0.0, 1.0]), Err(GeoError::Domain(_))));
    }

    #[test]
    fn render_roundtrip() {
        for s in ["1 + (y - 0.5)^2", "-x*y/(1 + x)", "exp(-y)*cos(2*x) - x^(-1)", "(x - y)^2 - -3"] {
            let e = parse_expr(s).unwrap();
            let back = parse_expr(&e.to_string()).unwrap();
            for p in [[0.3, 0.9], [1.7, -0.4]] {
                assert!((e.eval(p).unwrap() - back.eval(p).unwrap()).abs() < 1e-14, "{}", s);
            }
        }
    }
}
