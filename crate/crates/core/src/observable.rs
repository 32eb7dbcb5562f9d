//! Bounded-continuous observables of finitely many modes, parsed from a
//! small expression grammar.
//!
//! Atoms: `re(k)`, `im(k)`, `abs2(k)` for the k-th Fourier coefficient and
//! `l2(K)` for `||P_K u||_2^2`. Functions: `cos`, `sin`, `clamp(expr, c)`
//! (two-sided at |c|). Arithmetic: `+ - * /`, parentheses, numeric literals.
//! Example: `clamp(abs2(2), 10)` is the spec's "|c_2|^2 wedge 10".

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{l2_norm, project, SpectralField};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Expr {
    Const(f64),
    Re(usize),
    Im(usize),
    Abs2(usize),
    L2(usize),
    Cos(Box<Expr>),
    Sin(Box<Expr>),
    Clamp(Box<Expr>, f64),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn eval(&self, f: &SpectralField) -> f64 {
        match self {
            Expr::Const(v) => *v,
            Expr::Re(k) => f.coeff_signed(*k as i64).re,
            Expr::Im(k) => f.coeff_signed(*k as i64).im,
            Expr::Abs2(k) => f.coeff_signed(*k as i64).norm_sqr(),
            Expr::L2(k) => {
                let cap = (*k).min(f.max_mode()).max(1);
                l2_norm(&project(f, cap)).powi(2)
            }
            Expr::Cos(e) => e.eval(f).cos(),
            Expr::Sin(e) => e.eval(f).sin(),
            Expr::Clamp(e, c) => e.eval(f).clamp(-c.abs(), c.abs()),
            Expr::Neg(e) => -e.eval(f),
            Expr::Add(a, b) => a.eval(f) + b.eval(f),
            Expr::Sub(a, b) => a.eval(f) - b.eval(f),
            Expr::Mul(a, b) => a.eval(f) * b.eval(f),
            Expr::Div(a, b) => a.eval(f) / b.eval(f),
        }
    }
}

/// A named observable, parsed from `name=expression` or a bare expression.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Observable {
    pub name: String,
    pub expr: Expr,
}

impl Observable {
    pub fn parse(spec: &str) -> Result<Self> {
        let (name, body) = match spec.split_once('=') {
            Some((n, b)) => (n.trim().to_string(), b),
            None => (spec.trim().to_string(), spec),
        };
        Ok(Self {
            name,
            expr: parse_expr(body)?,
        })
    }

    pub fn eval(&self, f: &SpectralField) -> f64 {
        self.expr.eval(f)
    }
}

pub fn parse_expr(src: &str) -> Result<Expr> {
    let tokens = lex(src)?;
    let mut p = Parser { tokens, pos: 0 };
    let e = p.expr()?;
    if p.pos != p.tokens.len() {
        return Err(Error::ObservableParse(format!(
            "trailing input at token {} in {src:?}",
            p.pos
        )));
    }
    Ok(e)
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    LParen,
    RParen,
    Comma,
    Plus,
    Minus,
    Star,
    Slash,
}

fn lex(src: &str) -> Result<Vec<Tok>> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' => i += 1,
            '(' => {
                out.push(Tok::LParen);
                i += 1;
            }
            ')' => {
                out.push(Tok::RParen);
                i += 1;
            }
            ',' => {
                out.push(Tok::Comma);
                i += 1;
            }
            '+' => {
                out.push(Tok::Plus);
                i += 1;
            }
            '-' => {
                out.push(Tok::Minus);
                i += 1;
            }
            '*' => {
                out.push(Tok::Star);
                i += 1;
            }
            '/' => {
                out.push(Tok::Slash);
                i += 1;
            }
            '0'..='9' | '.' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                let v = s
                    .parse::<f64>()
                    .map_err(|_| Error::ObservableParse(format!("bad number {s:?}")))?;
                out.push(Tok::Num(v));
            }
            c if c.is_ascii_alphabetic() => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push(Tok::Ident(chars[start..i].iter().collect()));
            }
            other => {
                return Err(Error::ObservableParse(format!(
                    "unexpected character {other:?}"
                )))
            }
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, t: Tok) -> Result<()> {
        match self.next() {
            Some(got) if got == t => Ok(()),
            got => Err(Error::ObservableParse(format!(
                "expected {t:?}, found {got:?}"
            ))),
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.next();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(Tok::Minus) => {
                    self.next();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.next();
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
                }
                Some(Tok::Slash) => {
                    self.next();
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.factor()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        match self.next() {
            Some(Tok::Num(v)) => Ok(Expr::Const(v)),
            Some(Tok::Minus) => Ok(Expr::Neg(Box::new(self.factor()?))),
            Some(Tok::LParen) => {
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => self.call(&name),
            got => Err(Error::ObservableParse(format!("unexpected token {got:?}"))),
        }
    }

    fn mode_arg(&mut self) -> Result<usize> {
        match self.next() {
            Some(Tok::Num(v)) if v >= 1.0 && v.fract() == 0.0 => Ok(v as usize),
            got => Err(Error::ObservableParse(format!(
                "mode index must be a positive integer, found {got:?}"
            ))),
        }
    }

    fn call(&mut self, name: &str) -> Result<Expr> {
        self.expect(Tok::LParen)?;
        let e = match name {
            "re" => Expr::Re(self.mode_arg()?),
            "im" => Expr::Im(self.mode_arg()?),
            "abs2" => Expr::Abs2(self.mode_arg()?),
            "l2" => Expr::L2(self.mode_arg()?),
            "cos" => Expr::Cos(Box::new(self.expr()?)),
            "sin" => Expr::Sin(Box::new(self.expr()?)),
            "clamp" => {
                let inner = self.expr()?;
                self.expect(Tok::Comma)?;
                let c = match self.next() {
                    Some(Tok::Num(v)) => v,
                    got => {
                        return Err(Error::ObservableParse(format!(
                            "clamp bound must be numeric, found {got:?}"
                        )))
                    }
                };
                Expr::Clamp(Box::new(inner), c)
            }
            other => {
                return Err(Error::ObservableParse(format!(
                    "unknown function {other:?}"
                )))
            }
        };
        self.expect(Tok::RParen)?;
        Ok(e)
    }
}
