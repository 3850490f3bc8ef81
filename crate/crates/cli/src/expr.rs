//! Arithmetic expressions over named variables: `+ - * / ^`, parentheses,
//! numeric literals and `sin cos exp log sqrt cosh sinh`.
//!
//! Derivatives are taken symbolically on the tree, so a field read from a
//! manifest carries exact gradients and Hessians.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use cdsplit_core::chart::ScalarField;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Cosh,
    Sinh,
}

impl Func {
    fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "cosh" => Func::Cosh,
            "sinh" => Func::Sinh,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Cosh => "cosh",
            Func::Sinh => "sinh",
        }
    }

    fn apply(self, x: f64) -> f64 {
        match self {
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Exp => x.exp(),
            Func::Log => x.ln(),
            Func::Sqrt => x.sqrt(),
            Func::Cosh => x.cosh(),
            Func::Sinh => x.sinh(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

/// Error with a 1-based column into the expression text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExprError {
    pub col: usize,
    pub msg: String,
}

impl fmt::Display for ExprError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "column {}: {}", self.col, self.msg)
    }
}

impl std::error::Error for ExprError {}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ExprError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
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
            let text: String = chars[start..i].iter().collect();
            let v = text.parse::<f64>().map_err(|_| ExprError {
                col,
                msg: format!("malformed number {text:?}"),
            })?;
            out.push((Tok::Num(v), col));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), col));
        } else {
            let t = match c {
                '+' | '-' | '*' | '/' | '^' => Tok::Op(c),
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                _ => {
                    return Err(ExprError {
                        col,
                        msg: format!("unexpected character {c:?}"),
                    })
                }
            };
            out.push((t, col));
            i += 1;
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    vars: &'a [&'a str],
    end_col: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map(|(_, c)| *c).unwrap_or(self.end_col)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ExprError> {
        Err(ExprError {
            col: self.col(),
            msg: msg.into(),
        })
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        while let Some(Tok::Op(op @ ('+' | '-'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.term()?;
            lhs = if op == '+' {
                Expr::Add(Box::new(lhs), Box::new(rhs))
            } else {
                Expr::Sub(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        while let Some(Tok::Op(op @ ('*' | '/'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = if op == '*' {
                Expr::Mul(Box::new(lhs), Box::new(rhs))
            } else {
                Expr::Div(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        match self.peek() {
            Some(Tok::Op('-')) => {
                self.pos += 1;
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Some(Tok::Op('+')) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    // right associative, binds tighter than unary minus on its left
    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.primary()?;
        if let Some(Tok::Op('^')) = self.peek() {
            self.pos += 1;
            let exp = self.unary()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ExprError> {
        match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(Expr::Num(v))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let e = self.expr()?;
                self.close()?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                let col = self.col();
                self.pos += 1;
                if let Some(Tok::LParen) = self.peek() {
                    let Some(f) = Func::from_name(&name) else {
                        return Err(ExprError {
                            col,
                            msg: format!("unknown function {name:?}"),
                        });
                    };
                    self.pos += 1;
                    let arg = self.expr()?;
                    self.close()?;
                    return Ok(Expr::Call(f, Box::new(arg)));
                }
                match self.vars.iter().position(|v| *v == name) {
                    Some(k) => Ok(Expr::Var(k)),
                    None => Err(ExprError {
                        col,
                        msg: format!("unknown variable {name:?} (allowed: {})", self.vars.join(", ")),
                    }),
                }
            }
            Some(_) => self.err("expected a number, variable, function or '('"),
            None => self.err("unexpected end of expression"),
        }
    }

    fn close(&mut self) -> Result<(), ExprError> {
        match self.peek() {
            Some(Tok::RParen) => {
                self.pos += 1;
                Ok(())
            }
            _ => self.err("expected ')'"),
        }
    }
}

/// Variable names of a chart with `n` coordinates: `r, y1, …, y{n-1}`.
pub fn chart_vars(n: usize) -> Vec<String> {
    std::iter::once("r".to_string())
        .chain((1..n).map(|k| format!("y{k}")))
        .collect()
}

/// Fiber variables `y1, …, y{m}`.
pub fn fiber_vars(m: usize) -> Vec<String> {
    (1..=m).map(|k| format!("y{k}")).collect()
}

impl Expr {
    pub fn parse(src: &str, vars: &[String]) -> Result<Expr, ExprError> {
        let names: Vec<&str> = vars.iter().map(String::as_str).collect();
        let mut p = Parser {
            toks: lex(src)?,
            pos: 0,
            vars: &names,
            end_col: src.chars().count() + 1,
        };
        if p.toks.is_empty() {
            return p.err("empty expression");
        }
        let e = p.expr()?;
        if p.pos != p.toks.len() {
            return p.err("unexpected trailing input");
        }
        Ok(e)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Var(k) => x[*k],
            Expr::Neg(a) => -a.eval(x),
            Expr::Add(a, b) => a.eval(x) + b.eval(x),
            Expr::Sub(a, b) => a.eval(x) - b.eval(x),
            Expr::Mul(a, b) => a.eval(x) * b.eval(x),
            Expr::Div(a, b) => a.eval(x) / b.eval(x),
            Expr::Pow(a, b) => match **b {
                Expr::Num(e) if e == e.trunc() && e.abs() <= 64.0 => a.eval(x).powi(e as i32),
                _ => a.eval(x).powf(b.eval(x)),
            },
            Expr::Call(f, a) => f.apply(a.eval(x)),
        }
    }

    pub fn is_const(&self) -> bool {
        match self {
            Expr::Num(_) => true,
            Expr::Var(_) => false,
            Expr::Neg(a) | Expr::Call(_, a) => a.is_const(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                a.is_const() && b.is_const()
            }
        }
    }

    /// Largest variable index used, plus one.
    pub fn arity(&self) -> usize {
        match self {
            Expr::Num(_) => 0,
            Expr::Var(k) => k + 1,
            Expr::Neg(a) | Expr::Call(_, a) => a.arity(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                a.arity().max(b.arity())
            }
        }
    }

    pub fn uses(&self, var: usize) -> bool {
        match self {
            Expr::Num(_) => false,
            Expr::Var(k) => *k == var,
            Expr::Neg(a) | Expr::Call(_, a) => a.uses(var),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                a.uses(var) || b.uses(var)
            }
        }
    }

    /// `∂/∂x_var`, lightly simplified.
    pub fn diff(&self, var: usize) -> Expr {
        use Expr::*;
        match self {
            Num(_) => Num(0.0),
            Var(k) => Num(if *k == var { 1.0 } else { 0.0 }),
            Neg(a) => neg(a.diff(var)),
            Add(a, b) => add(a.diff(var), b.diff(var)),
            Sub(a, b) => sub(a.diff(var), b.diff(var)),
            Mul(a, b) => add(mul(a.diff(var), (**b).clone()), mul((**a).clone(), b.diff(var))),
            Div(a, b) => div(
                sub(mul(a.diff(var), (**b).clone()), mul((**a).clone(), b.diff(var))),
                pow((**b).clone(), Num(2.0)),
            ),
            Pow(a, b) => {
                if !b.uses(var) {
                    // b u^{b-1} u'
                    let lowered = pow((**a).clone(), sub((**b).clone(), Num(1.0)));
                    mul(mul((**b).clone(), lowered), a.diff(var))
                } else {
                    // u^v (v' log u + v u'/u)
                    let inner = add(
                        mul(b.diff(var), call(Func::Log, (**a).clone())),
                        div(mul((**b).clone(), a.diff(var)), (**a).clone()),
                    );
                    mul(self.clone(), inner)
                }
            }
            Call(f, a) => {
                let u = (**a).clone();
                let outer = match f {
                    Func::Sin => call(Func::Cos, u),
                    Func::Cos => neg(call(Func::Sin, u)),
                    Func::Exp => call(Func::Exp, u),
                    Func::Log => div(Num(1.0), u),
                    Func::Sqrt => div(Num(0.5), call(Func::Sqrt, u)),
                    Func::Cosh => call(Func::Sinh, u),
                    Func::Sinh => call(Func::Cosh, u),
                };
                mul(outer, a.diff(var))
            }
        }
    }

    /// A scalar field on `n` coordinates with symbolic gradient and Hessian.
    pub fn to_field(&self, n: usize) -> ScalarField {
        let grad: Vec<Expr> = (0..n).map(|i| self.diff(i)).collect();
        let hess: Vec<Expr> = (0..n * n).map(|k| grad[k / n].diff(k % n)).collect();
        let (v, g, h) = (Arc::new(self.clone()), Arc::new(grad), Arc::new(hess));
        ScalarField::new(move |x| v.eval(x))
            .with_gradient(move |x| DVector::from_iterator(n, g.iter().map(|e| e.eval(x))))
            .with_second_partials(move |x| DMatrix::from_fn(n, n, |i, j| h[i * n + j].eval(x)))
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, vars: &[String], prec: u8) -> fmt::Result {
        let (p, open) = match self {
            Expr::Add(..) | Expr::Sub(..) => (1, prec > 1),
            Expr::Mul(..) | Expr::Div(..) => (2, prec > 2),
            Expr::Neg(..) => (3, prec > 3),
            Expr::Pow(..) => (4, prec > 3),
            _ => (5, false),
        };
        if open {
            write!(f, "(")?;
        }
        match self {
            Expr::Num(v) => write!(f, "{v}")?,
            Expr::Var(k) => write!(f, "{}", vars.get(*k).map(String::as_str).unwrap_or("?"))?,
            Expr::Neg(a) => {
                write!(f, "-")?;
                a.fmt_prec(f, vars, 4)?;
            }
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                let sym = match self {
                    Expr::Add(..) => " + ",
                    Expr::Sub(..) => " - ",
                    Expr::Mul(..) => "*",
                    Expr::Div(..) => "/",
                    _ => "^",
                };
                let (lp, rp) = match self {
                    Expr::Pow(..) => (5, 4),
                    _ => (p, p + 1),
                };
                a.fmt_prec(f, vars, lp)?;
                write!(f, "{sym}")?;
                b.fmt_prec(f, vars, rp)?;
            }
            Expr::Call(func, a) => {
                write!(f, "{}(", func.name())?;
                a.fmt_prec(f, vars, 0)?;
                write!(f, ")")?;
            }
        }
        if open {
            write!(f, ")")?;
        }
        Ok(())
    }

    /// Render with the given variable names; re-parses to the same tree.
    pub fn display<'a>(&'a self, vars: &'a [String]) -> impl fmt::Display + 'a {
        struct D<'a>(&'a Expr, &'a [String]);
        impl fmt::Display for D<'_> {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                self.0.fmt_prec(f, self.1, 0)
            }
        }
        D(self, vars)
    }
}

fn num(e: &Expr) -> Option<f64> {
    match e {
        Expr::Num(v) => Some(*v),
        _ => None,
    }
}

fn neg(a: Expr) -> Expr {
    match a {
        Expr::Num(v) => Expr::Num(-v),
        Expr::Neg(b) => *b,
        a => Expr::Neg(Box::new(a)),
    }
}

fn add(a: Expr, b: Expr) -> Expr {
    match (num(&a), num(&b)) {
        (Some(x), Some(y)) => Expr::Num(x + y),
        (Some(x), _) if x == 0.0 => b,
        (_, Some(y)) if y == 0.0 => a,
        _ => Expr::Add(Box::new(a), Box::new(b)),
    }
}

fn sub(a: Expr, b: Expr) -> Expr {
    match (num(&a), num(&b)) {
        (Some(x), Some(y)) => Expr::Num(x - y),
        (Some(x), _) if x == 0.0 => neg(b),
        (_, Some(y)) if y == 0.0 => a,
        _ => Expr::Sub(Box::new(a), Box::new(b)),
    }
}

fn mul(a: Expr, b: Expr) -> Expr {
    match (num(&a), num(&b)) {
        (Some(x), Some(y)) => Expr::Num(x * y),
        (Some(x), _) | (_, Some(x)) if x == 0.0 => Expr::Num(0.0),
        (Some(x), _) if x == 1.0 => b,
        (_, Some(y)) if y == 1.0 => a,
        _ => Expr::Mul(Box::new(a), Box::new(b)),
    }
}

fn div(a: Expr, b: Expr) -> Expr {
    match (num(&a), num(&b)) {
        (Some(x), _) if x == 0.0 => Expr::Num(0.0),
        (_, Some(y)) if y == 1.0 => a,
        _ => Expr::Div(Box::new(a), Box::new(b)),
    }
}

fn pow(a: Expr, b: Expr) -> Expr {
    match num(&b) {
        Some(y) if y == 0.0 => Expr::Num(1.0),
        Some(y) if y == 1.0 => a,
        _ => Expr::Pow(Box::new(a), Box::new(b)),
    }
}

fn call(f: Func, a: Expr) -> Expr {
    Expr::Call(f, Box::new(a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn vars() -> Vec<String> {
        chart_vars(3)
    }

    fn p(s: &str) -> Expr {
        Expr::parse(s, &vars()).unwrap()
    }

    #[test]
    fn precedence() {
        assert_eq!(p("1 + 2*3").eval(&[0.0; 3]), 7.0);
        assert_eq!(p("-2^2").eval(&[0.0; 3]), -4.0);
        assert_eq!(p("2^3^2").eval(&[0.0; 3]), 512.0);
        assert_eq!(p("2^-1").eval(&[0.0; 3]), 0.5);
        assert_eq!(p("(1 + 2)*3 - 4/2").eval(&[0.0; 3]), 7.0);
        assert_eq!(p("1.5e-3*2").eval(&[0.0; 3]), 3e-3);
        assert_eq!(p("r*y1 - y2").eval(&[2.0, 3.0, 1.0]), 5.0);
    }

    #[test]
    fn errors_carry_columns() {
        let e = Expr::parse("sin(r) + q", &vars()).unwrap_err();
        assert_eq!(e.col, 10);
        let e = Expr::parse("foo(r)", &vars()).unwrap_err();
        assert_eq!(e.col, 1);
        let e = Expr::parse("(r + 1", &vars()).unwrap_err();
        assert_eq!(e.col, 7);
        assert!(Expr::parse("r $ 2", &vars()).is_err());
        assert!(Expr::parse("", &vars()).is_err());
        assert!(Expr::parse("r r", &vars()).is_err());
    }

    #[test]
    fn derivatives_of_elementary_functions() {
        let x = [0.7, 0.3, -0.2];
        let cases: [(&str, f64); 7] = [
            ("sin(r)", 0.7f64.cos()),
            ("cos(r)", -0.7f64.sin()),
            ("exp(2*r)", 2.0 * 1.4f64.exp()),
            ("log(r)", 1.0 / 0.7),
            ("sqrt(r)", 0.5 / 0.7f64.sqrt()),
            ("cosh(r)^2", 2.0 * 0.7f64.cosh() * 0.7f64.sinh()),
            ("r^r", 0.7f64.powf(0.7) * (0.7f64.ln() + 1.0)),
        ];
        for (s, d) in cases {
            assert!((p(s).diff(0).eval(&x) - d).abs() < 1e-14, "{s}");
        }
    }

    #[test]
    fn display_round_trips() {
        for s in ["1 - (r - y1)", "-(r + 1)^2", "2^3^y2", "r/(y1*y2)", "sin(-r)*exp(y1/2)"] {
            let e = p(s);
            let back = p(&e.display(&vars()).to_string());
            assert_eq!(e, back, "{s}");
        }
    }

    proptest! {
        #[test]
        fn symbolic_matches_central_difference(a in -1.0..1.0f64, b in -1.0..1.0f64, c in 0.1..2.0f64) {
            let e = p("sin(r*y1) + exp(y2/3)*r^2 - sqrt(1 + r^2)/cosh(y1) + log(1 + y2^2)*y1");
            let x = [a, b, c];
            let f = e.to_field(3);
            let g = f.analytic_gradient(&x).unwrap();
            for k in 0..3 {
                let h = 1e-5;
                let (mut xp, mut xm) = (x, x);
                xp[k] += h;
                xm[k] -= h;
                let fd = (e.eval(&xp) - e.eval(&xm)) / (2.0 * h);
                prop_assert!((g[k] - fd).abs() < 1e-7);
            }
            let hs = f.analytic_second(&x).unwrap();
            prop_assert!((hs.clone() - hs.transpose()).amax() < 1e-12);
        }
    }
}
