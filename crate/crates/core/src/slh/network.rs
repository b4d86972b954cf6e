// Copyright 2026 Kerrnet Contributors
// SPDX-License-Identifier: Apache-2.0

//! Textual network descriptions.
//!
//! A description is a TOML document with named components and a network expression.
//! In the expression `+` is concatenation, `<` is the series product (the right operand
//! feeds the left one), `fb(X, k, l)` routes output `k` of `X` back into input `l`
//! (1-based), and parentheses group. `+` binds tighter than `<`.
//!
//! ```toml
//! name = "driven cavity"
//! drives = ["eps"]
//! output = 2
//! network = "K < (D + one)"
//!
//! [components.K]
//! kind = "kerr"
//! cavity = 0
//!
//! [components.D]
//! kind = "displacement"
//! drive = "eps"
//!
//! [components.one]
//! kind = "identity"
//! channels = 1
//! ```

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;
use serde::Deserialize;

use super::expr::DriveExpr;
use super::triple::{
    beamsplitter, cavity_from_ops, cavity_halves_from_ops, displacement, identity_network,
    permutation, phase_shifter, SlhTriple,
};
use crate::error::{Error, Result};
use crate::fock::{Operator, SpaceDescriptor};

/// Source of cavity operators for `kerr`, `kerr_in` and `kerr_out` components.
pub trait CavityProvider {
    fn space(&self) -> &SpaceDescriptor;
    fn kappa(&self) -> f64;
    /// Lowering operator of cavity `index` on the joint space.
    fn lowering(&self, index: usize) -> Result<&Operator>;
    /// Bare Hamiltonian of cavity `index` on the joint space.
    fn bare_hamiltonian(&self, index: usize) -> Result<&Operator>;
}

/// A number or the name of a bound constant.
#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum Value {
    Real(f64),
    Complex { re: f64, im: f64 },
    Name(String),
}

impl Value {
    fn resolve(&self, bindings: &BTreeMap<String, C64>) -> Result<C64> {
        match self {
            Value::Real(x) => Ok(C64::new(*x, 0.0)),
            Value::Complex { re, im } => Ok(C64::new(*re, *im)),
            Value::Name(n) => bindings.get(n).copied().ok_or_else(|| Error::UnboundParameter(n.clone())),
        }
    }

    fn resolve_real(&self, bindings: &BTreeMap<String, C64>) -> Result<f64> {
        let v = self.resolve(bindings)?;
        if v.im != 0.0 {
            return Err(Error::InvalidArgument(format!("{self:?} must be real, got {v}")));
        }
        Ok(v.re)
    }
}

/// One named building block.
#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ComponentSpec {
    Identity { channels: usize },
    Beamsplitter { theta: Value },
    Phase { phi: Value },
    /// Either a named drive parameter or a fixed amplitude.
    Displacement {
        #[serde(default)]
        drive: Option<String>,
        #[serde(default)]
        amplitude: Option<Value>,
    },
    Permutation { sigma: Vec<usize> },
    Kerr { cavity: usize },
    /// Loss-only half `(1, sqrt(κ) a, 0)`.
    KerrIn { cavity: usize },
    /// Half carrying the Hamiltonian `(1, sqrt(κ) a, H0)`.
    KerrOut { cavity: usize },
}

/// Parsed network description.
#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct NetworkDescription {
    pub name: String,
    #[serde(default)]
    pub description: String,
    /// Drive parameters left symbolic in the composed triple.
    #[serde(default)]
    pub drives: Vec<String>,
    /// 1-based index of the logical output channel.
    #[serde(default)]
    pub output: Option<usize>,
    pub network: String,
    pub components: BTreeMap<String, ComponentSpec>,
}

impl NetworkDescription {
    pub fn parse(text: &str) -> Result<Self> {
        let d: NetworkDescription =
            toml::from_str(text).map_err(|e| Error::Parse { line: 0, msg: e.to_string() })?;
        parse_expr(&d.network)?;
        Ok(d)
    }

    /// Composes the network; named constants resolve through `bindings`.
    pub fn build(&self, cavities: &dyn CavityProvider, bindings: &BTreeMap<String, C64>) -> Result<SlhTriple> {
        let ast = parse_expr(&self.network)?;
        let mut cache: BTreeMap<String, SlhTriple> = BTreeMap::new();
        self.eval(&ast, cavities, bindings, &mut cache)
    }

    fn component(&self, name: &str, cavities: &dyn CavityProvider, bindings: &BTreeMap<String, C64>) -> Result<SlhTriple> {
        let spec = self
            .components
            .get(name)
            .ok_or_else(|| Error::Parse { line: 0, msg: format!("unknown component `{name}`") })?;
        let space = cavities.space();
        match spec {
            ComponentSpec::Identity { channels } => identity_network(space, *channels),
            ComponentSpec::Beamsplitter { theta } => beamsplitter(space, theta.resolve_real(bindings)?),
            ComponentSpec::Phase { phi } => phase_shifter(space, phi.resolve_real(bindings)?),
            ComponentSpec::Displacement { drive, amplitude } => {
                let expr = match (drive, amplitude) {
                    (Some(d), None) => {
                        if !self.drives.contains(d) {
                            return Err(Error::UnboundParameter(d.clone()));
                        }
                        DriveExpr::drive(d.clone())
                    }
                    (None, Some(v)) => DriveExpr::constant(v.resolve(bindings)?),
                    _ => {
                        return Err(Error::InvalidArgument(format!(
                            "displacement `{name}` needs exactly one of `drive` or `amplitude`"
                        )))
                    }
                };
                displacement(space, expr)
            }
            ComponentSpec::Permutation { sigma } => permutation(space, sigma),
            ComponentSpec::Kerr { cavity } => {
                cavity_from_ops(cavities.lowering(*cavity)?, cavities.bare_hamiltonian(*cavity)?, cavities.kappa())
            }
            ComponentSpec::KerrIn { cavity } | ComponentSpec::KerrOut { cavity } => {
                let (k1, k2) = cavity_halves_from_ops(
                    cavities.lowering(*cavity)?,
                    cavities.bare_hamiltonian(*cavity)?,
                    cavities.kappa(),
                )?;
                Ok(if matches!(spec, ComponentSpec::KerrIn { .. }) { k1 } else { k2 })
            }
        }
    }

    fn eval(
        &self,
        ast: &Expr,
        cavities: &dyn CavityProvider,
        bindings: &BTreeMap<String, C64>,
        cache: &mut BTreeMap<String, SlhTriple>,
    ) -> Result<SlhTriple> {
        match ast {
            Expr::Name(n) => {
                if let Some(t) = cache.get(n) {
                    return Ok(t.clone());
                }
                let t = self.component(n, cavities, bindings)?;
                cache.insert(n.clone(), t.clone());
                Ok(t)
            }
            Expr::Concat(parts) => {
                let mut acc = self.eval(&parts[0], cavities, bindings, cache)?;
                for p in &parts[1..] {
                    acc = acc.concat(&self.eval(p, cavities, bindings, cache)?)?;
                }
                Ok(acc)
            }
            Expr::Series(parts) => {
                let mut acc = self.eval(&parts[0], cavities, bindings, cache)?;
                for p in &parts[1..] {
                    acc = acc.series(&self.eval(p, cavities, bindings, cache)?)?;
                }
                Ok(acc)
            }
            Expr::Feedback(inner, k, l) => self.eval(inner, cavities, bindings, cache)?.feedback(*k, *l),
        }
    }
}

/// Network expression syntax tree.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Name(String),
    Concat(Vec<Expr>),
    /// `a < b < c`, evaluated left to right as `(a ◁ b) ◁ c`.
    Series(Vec<Expr>),
    Feedback(Box<Expr>, usize, usize),
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Int(usize),
    Plus,
    Lt,
    LParen,
    RParen,
    Comma,
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>> {
    let err = |pos: usize, msg: String| Error::Parse { line: 1, msg: format!("column {}: {msg}", pos + 1) };
    let b = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < b.len() {
        let c = b[i] as char;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => { out.push((i, Tok::Plus)); i += 1 }
            '<' => { out.push((i, Tok::Lt)); i += 1 }
            '(' => { out.push((i, Tok::LParen)); i += 1 }
            ')' => { out.push((i, Tok::RParen)); i += 1 }
            ',' => { out.push((i, Tok::Comma)); i += 1 }
            c if c.is_ascii_digit() => {
                let start = i;
                while i < b.len() && (b[i] as char).is_ascii_digit() {
                    i += 1;
                }
                let v = src[start..i].parse().map_err(|e| err(start, format!("{e}")))?;
                out.push((start, Tok::Int(v)));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < b.len() && ((b[i] as char).is_ascii_alphanumeric() || b[i] == b'_') {
                    i += 1;
                }
                out.push((start, Tok::Ident(src[start..i].to_string())));
            }
            other => return Err(err(i, format!("unexpected character `{other}`"))),
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    len: usize,
}

impl Parser {
    fn err(&self, msg: &str) -> Error {
        let col = self.toks.get(self.pos).map(|t| t.0).unwrap_or(self.len);
        Error::Parse { line: 1, msg: format!("column {}: {msg}", col + 1) }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.1)
    }

    fn expect(&mut self, t: Tok) -> Result<()> {
        if self.peek() == Some(&t) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(&format!("expected {t:?}")))
        }
    }

    fn int(&mut self) -> Result<usize> {
        match self.peek() {
            Some(Tok::Int(v)) => {
                let v = *v;
                self.pos += 1;
                Ok(v)
            }
            _ => Err(self.err("expected a channel index")),
        }
    }

    fn series(&mut self) -> Result<Expr> {
        let mut parts = vec![self.concat()?];
        while self.peek() == Some(&Tok::Lt) {
            self.pos += 1;
            parts.push(self.concat()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Expr::Series(parts) })
    }

    fn concat(&mut self) -> Result<Expr> {
        let mut parts = vec![self.atom()?];
        while self.peek() == Some(&Tok::Plus) {
            self.pos += 1;
            parts.push(self.atom()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Expr::Concat(parts) })
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek().cloned() {
            Some(Tok::LParen) => {
                self.pos += 1;
                let e = self.series()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Some(Tok::Ident(name)) if name == "fb" && self.toks.get(self.pos + 1).map(|t| &t.1) == Some(&Tok::LParen) => {
                self.pos += 2;
                let inner = self.series()?;
                self.expect(Tok::Comma)?;
                let k = self.int()?;
                self.expect(Tok::Comma)?;
                let l = self.int()?;
                self.expect(Tok::RParen)?;
                Ok(Expr::Feedback(Box::new(inner), k, l))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                Ok(Expr::Name(name))
            }
            _ => Err(self.err("expected a component, `(` or `fb(`")),
        }
    }
}

/// Parses a network expression.
pub fn parse_expr(src: &str) -> Result<Expr> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0, len: src.len() };
    let e = p.series()?;
    if p.pos != p.toks.len() {
        return Err(p.err("trailing input"));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn name(s: &str) -> Expr {
        Expr::Name(s.into())
    }

    #[test]
    fn concat_binds_tighter_than_series() {
        let e = parse_expr("a < b + c < d").unwrap();
        assert_eq!(
            e,
            Expr::Series(vec![name("a"), Expr::Concat(vec![name("b"), name("c")]), name("d")])
        );
    }

    #[test]
    fn feedback_and_parentheses() {
        let e = parse_expr("fb((x + y) < z, 3, 6)").unwrap();
        assert_eq!(
            e,
            Expr::Feedback(
                Box::new(Expr::Series(vec![Expr::Concat(vec![name("x"), name("y")]), name("z")])),
                3,
                6
            )
        );
    }

    #[test]
    fn syntax_errors_are_located() {
        for bad in ["a +", "(a < b", "fb(a, 1)", "a $ b", "a b"] {
            assert!(matches!(parse_expr(bad), Err(Error::Parse { .. })), "{bad}");
        }
    }
}
