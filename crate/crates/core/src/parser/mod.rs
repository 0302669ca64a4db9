//! Concrete syntax: lexer, recursive-descent parser and printer.

mod lexer;
mod print;

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::str::FromStr;

use lexer::{lex, Tok, Token};
pub use print::{print_process, print_unit};

use crate::ast::{Name, Process, Term, Value};
use crate::kernel::{GroundType, GroundValue, Monomial, Polynomial};
use crate::typing::{LinearEnv, SessionType, TermEnv, UnrestrictedEnv};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{line}:{col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl ParseError {
    fn new(line: usize, col: usize, message: &str) -> Self {
        ParseError { line, col, message: message.to_string() }
    }
}

const MAX_DEPTH: usize = 400;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum DeclKind {
    Proc,
    Ctx,
}

/// A typed declaration `proc Name(contexts) :: (z : C) = body`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decl {
    pub kind: DeclKind,
    pub name: Name,
    pub gamma: Vec<(Name, Polynomial, SessionType)>,
    pub delta: Vec<(Name, SessionType)>,
    pub theta: Vec<(Name, GroundType)>,
    pub offered: (Name, SessionType),
    pub body: Process,
}

impl Decl {
    pub fn gamma_env(&self) -> UnrestrictedEnv {
        self.gamma.iter().map(|(u, p, a)| (u.clone(), (p.clone(), a.clone()))).collect()
    }

    pub fn delta_env(&self) -> LinearEnv {
        self.delta.iter().cloned().collect()
    }

    pub fn theta_env(&self) -> TermEnv {
        self.theta.iter().cloned().collect()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SourceUnit {
    pub params: Vec<Name>,
    pub aliases: Vec<(Name, SessionType)>,
    pub decls: Vec<Decl>,
}

impl SourceUnit {
    pub fn decl(&self, name: &str) -> Option<&Decl> {
        self.decls.iter().find(|d| d.name == name)
    }

    pub fn procs(&self) -> impl Iterator<Item = &Decl> {
        self.decls.iter().filter(|d| d.kind == DeclKind::Proc)
    }

    pub fn contexts(&self) -> impl Iterator<Item = &Decl> {
        self.decls.iter().filter(|d| d.kind == DeclKind::Ctx)
    }
}

type Header = (Vec<(Name, Polynomial, SessionType)>, Vec<(Name, SessionType)>, Vec<(Name, GroundType)>);

struct Parser<'a> {
    toks: &'a [Token],
    pos: usize,
    depth: usize,
    aliases: BTreeMap<Name, SessionType>,
    procs: BTreeMap<Name, Process>,
    allow_hole: bool,
}

type PResult<T> = Result<T, ParseError>;

fn is_construct(w: &str) -> bool {
    matches!(w, "new" | "send" | "recv" | "in" | "out" | "let" | "case" | "if")
}

impl<'a> Parser<'a> {
    fn new(toks: &'a [Token]) -> Self {
        Parser { toks, pos: 0, depth: 0, aliases: BTreeMap::new(), procs: BTreeMap::new(), allow_hole: false }
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn err<T>(&self, msg: &str) -> PResult<T> {
        let t = &self.toks[self.pos];
        Err(ParseError::new(t.line, t.col, &alloc::format!("{msg}, found {}", t.tok.describe())))
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn is_word(&self, w: &str) -> bool {
        matches!(self.peek(), Tok::Word(x) if x == w)
    }

    fn expect_sym(&mut self, s: &str) -> PResult<()> {
        if self.is_sym(s) {
            self.bump();
            Ok(())
        } else {
            self.err(&alloc::format!("expected `{s}`"))
        }
    }

    fn expect_word(&mut self, w: &str) -> PResult<()> {
        if self.is_word(w) {
            self.bump();
            Ok(())
        } else {
            self.err(&alloc::format!("expected `{w}`"))
        }
    }

    fn ident(&mut self) -> PResult<Name> {
        match self.peek().clone() {
            Tok::Word(w) => {
                self.bump();
                Ok(w)
            }
            _ => self.err("expected a name"),
        }
    }

    fn enter(&mut self) -> PResult<()> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return self.err("nesting too deep");
        }
        Ok(())
    }

    // ---- polynomials ----

    fn poly(&mut self) -> PResult<Polynomial> {
        let mut acc = self.poly_product()?;
        while self.is_sym("+") {
            self.bump();
            acc = &acc + &self.poly_product()?;
        }
        Ok(acc)
    }

    fn poly_product(&mut self) -> PResult<Polynomial> {
        let mut acc = self.poly_factor()?;
        while self.is_sym("*") {
            self.bump();
            acc = &acc * &self.poly_factor()?;
        }
        Ok(acc)
    }

    fn poly_factor(&mut self) -> PResult<Polynomial> {
        let base = match self.peek().clone() {
            Tok::Num(k) => {
                self.bump();
                return Ok(Polynomial::constant(k));
            }
            Tok::Word(w) => {
                self.bump();
                w
            }
            _ => return self.err("expected a polynomial"),
        };
        let mut e = 1u32;
        if self.is_sym("^") {
            self.bump();
            match self.bump() {
                Tok::Num(k) if k <= 64 => e = k as u32,
                _ => return self.err("expected a small exponent"),
            }
        }
        Ok(Polynomial::monomial(1, Monomial::var(&base)).pow(e))
    }

    fn bracket_poly(&mut self) -> PResult<Polynomial> {
        self.expect_sym("[")?;
        let p = self.poly()?;
        self.expect_sym("]")?;
        Ok(p)
    }

    // ---- types ----

    fn ty(&mut self) -> PResult<SessionType> {
        self.enter()?;
        let a = self.ty_sum()?;
        let r = if self.is_sym("-o") {
            self.bump();
            Ok(SessionType::lolli(a, self.ty()?))
        } else {
            Ok(a)
        };
        self.depth -= 1;
        r
    }

    fn ty_sum(&mut self) -> PResult<SessionType> {
        let a = self.ty_tensor()?;
        if self.is_sym("+") || self.is_sym("&") {
            let plus = self.is_sym("+");
            self.bump();
            self.enter()?;
            let b = self.ty_sum()?;
            self.depth -= 1;
            return Ok(if plus { SessionType::plus(a, b) } else { SessionType::with(a, b) });
        }
        Ok(a)
    }

    fn ty_tensor(&mut self) -> PResult<SessionType> {
        let a = self.ty_unary()?;
        if self.is_sym("*") {
            self.bump();
            self.enter()?;
            let b = self.ty_tensor()?;
            self.depth -= 1;
            return Ok(SessionType::tensor(a, b));
        }
        Ok(a)
    }

    fn ty_unary(&mut self) -> PResult<SessionType> {
        if self.is_sym("!") {
            self.bump();
            let p = self.bracket_poly()?;
            self.enter()?;
            let a = self.ty_unary()?;
            self.depth -= 1;
            return Ok(SessionType::bang(p, a));
        }
        match self.peek().clone() {
            Tok::Num(1) => {
                self.bump();
                Ok(SessionType::One)
            }
            Tok::Sym("(") => {
                self.bump();
                let a = self.ty()?;
                self.expect_sym(")")?;
                Ok(a)
            }
            Tok::Word(w) if w == "Bool" => {
                self.bump();
                Ok(SessionType::Bool)
            }
            Tok::Word(w) if w == "Str" => {
                self.bump();
                Ok(SessionType::Str(self.bracket_poly()?))
            }
            Tok::Word(w) => match self.aliases.get(&w) {
                Some(t) => {
                    let t = t.clone();
                    self.bump();
                    Ok(t)
                }
                None => self.err("unknown type"),
            },
            _ => self.err("expected a type"),
        }
    }

    fn ground_ty(&mut self) -> PResult<GroundType> {
        let t = self.ty()?;
        match t.as_ground() {
            Some(g) => Ok(g),
            None => self.err("expected a ground type"),
        }
    }

    // ---- values and terms ----

    fn value(&mut self) -> PResult<Value> {
        match self.peek().clone() {
            Tok::Bits(b) => {
                self.bump();
                Ok(Value::Lit(GroundValue::Bits(b)))
            }
            Tok::Word(w) if w == "true" || w == "false" => {
                self.bump();
                Ok(Value::bool(w == "true"))
            }
            Tok::Word(w) => {
                self.bump();
                Ok(Value::Var(w))
            }
            _ => self.err("expected a value"),
        }
    }

    fn term(&mut self) -> PResult<Term> {
        let is_app = matches!(self.peek(), Tok::Word(_))
            && matches!(self.peek_at(1), Tok::Sym("(") | Tok::Sym("["));
        if !is_app {
            return Ok(Term::Val(self.value()?));
        }
        let symbol = self.ident()?;
        let index = if self.is_sym("[") {
            self.bracket_poly()?
        } else {
            Polynomial::var(crate::funsym::INDEX_VAR)
        };
        self.expect_sym("(")?;
        let mut args = Vec::new();
        if !self.is_sym(")") {
            args.push(self.value()?);
            while self.is_sym(",") {
                self.bump();
                args.push(self.value()?);
            }
        }
        self.expect_sym(")")?;
        Ok(Term::App { symbol, index, args })
    }

    // ---- processes ----

    fn process(&mut self) -> PResult<Process> {
        self.enter()?;
        let mut acc = self.prefix()?;
        while self.is_sym("|") {
            self.bump();
            let rhs = self.prefix()?;
            acc = Process::par(acc, rhs);
        }
        self.depth -= 1;
        Ok(acc)
    }

    fn binder(&mut self) -> PResult<Name> {
        self.expect_sym("(")?;
        let y = self.ident()?;
        self.expect_sym(")")?;
        Ok(y)
    }

    fn dot_prefix(&mut self) -> PResult<Box<Process>> {
        self.expect_sym(".")?;
        self.enter()?;
        let p = self.prefix()?;
        self.depth -= 1;
        Ok(Box::new(p))
    }

    fn prefix(&mut self) -> PResult<Process> {
        match self.peek().clone() {
            Tok::Num(0) => {
                self.bump();
                Ok(Process::Nil)
            }
            Tok::Sym("(") => {
                self.bump();
                let p = self.process()?;
                self.expect_sym(")")?;
                Ok(p)
            }
            Tok::Sym("[") => {
                if !self.allow_hole {
                    return self.err("holes are only allowed in `ctx` declarations");
                }
                self.bump();
                self.expect_sym("]")?;
                Ok(Process::Hole)
            }
            Tok::Sym("@") => {
                self.bump();
                let name = self.ident()?;
                match self.procs.get(&name) {
                    Some(p) => Ok(p.clone()),
                    None => self.err("reference to an undeclared process"),
                }
            }
            Tok::Sym("!") => {
                self.bump();
                self.expect_word("in")?;
                let x = self.ident()?;
                let y = self.binder()?;
                Ok(Process::RepIn(x, y, self.dot_prefix()?))
            }
            Tok::Word(w) if matches!(self.peek_at(1), Tok::Sym(".")) => {
                self.bump();
                self.bump();
                let left = match self.peek() {
                    Tok::Word(s) if s == "inl" => true,
                    Tok::Word(s) if s == "inr" => false,
                    _ => return self.err("expected `inl` or `inr`"),
                };
                self.bump();
                let p = self.dot_prefix()?;
                Ok(if left { Process::SelL(w, p) } else { Process::SelR(w, p) })
            }
            Tok::Word(w) if is_construct(&w) => {
                self.bump();
                self.construct(&w)
            }
            _ => self.err("expected a process"),
        }
    }

    fn construct(&mut self, w: &str) -> PResult<Process> {
        match w {
            "new" => {
                let y = self.ident()?;
                Ok(Process::Res(y, self.dot_prefix()?))
            }
            "send" => {
                let x = self.ident()?;
                if self.is_sym("(") {
                    self.bump();
                    self.expect_word("new")?;
                    let y = self.ident()?;
                    self.expect_sym(")")?;
                    let p = self.dot_prefix()?;
                    Ok(Process::Res(y.clone(), Box::new(Process::OutCh(x, y, p))))
                } else {
                    let y = self.ident()?;
                    Ok(Process::OutCh(x, y, self.dot_prefix()?))
                }
            }
            "recv" => {
                let x = self.ident()?;
                let y = self.binder()?;
                Ok(Process::InCh(x, y, self.dot_prefix()?))
            }
            "in" => {
                let x = self.ident()?;
                let z = self.binder()?;
                Ok(Process::InVal(x, z, self.dot_prefix()?))
            }
            "out" => {
                let x = self.ident()?;
                Ok(Process::OutVal(x, self.value()?))
            }
            "let" => {
                let z = self.ident()?;
                self.expect_sym("=")?;
                let t = self.term()?;
                self.expect_word("in")?;
                self.enter()?;
                let p = self.prefix()?;
                self.depth -= 1;
                Ok(Process::Let(z, t, Box::new(p)))
            }
            "case" => {
                let x = self.ident()?;
                self.expect_word("of")?;
                self.expect_word("inl")?;
                self.expect_sym("=>")?;
                self.enter()?;
                let p = self.prefix()?;
                self.expect_sym("/")?;
                self.expect_word("inr")?;
                self.expect_sym("=>")?;
                let q = self.prefix()?;
                self.depth -= 1;
                Ok(Process::Case(x, Box::new(p), Box::new(q)))
            }
            "if" => {
                let v = self.value()?;
                self.expect_word("then")?;
                self.enter()?;
                let p = self.prefix()?;
                self.expect_word("else")?;
                let q = self.prefix()?;
                self.depth -= 1;
                Ok(Process::If(v, Box::new(p), Box::new(q)))
            }
            _ => self.err("expected a process"),
        }
    }

    // ---- declarations ----

    fn header(&mut self) -> PResult<Header> {
        let (mut gamma, mut delta, mut theta) = (Vec::new(), Vec::new(), Vec::new());
        self.expect_sym("(")?;
        while !self.is_sym(")") {
            let part = self.ident()?;
            self.expect_sym("{")?;
            while !self.is_sym("}") {
                let x = self.ident()?;
                match part.as_str() {
                    "lin" => {
                        self.expect_sym(":")?;
                        delta.push((x, self.ty()?));
                    }
                    "exp" => {
                        let p = self.bracket_poly()?;
                        self.expect_sym(":")?;
                        gamma.push((x, p, self.ty()?));
                    }
                    "tm" => {
                        self.expect_sym(":")?;
                        theta.push((x, self.ground_ty()?));
                    }
                    _ => return self.err("expected `lin`, `exp` or `tm`"),
                }
                if self.is_sym(",") {
                    self.bump();
                } else if !self.is_sym("}") {
                    return self.err("expected `,` or `}`");
                }
            }
            self.expect_sym("}")?;
            if self.is_sym(";") {
                self.bump();
            } else if !self.is_sym(")") {
                return self.err("expected `;` or `)`");
            }
        }
        self.expect_sym(")")?;
        Ok((gamma, delta, theta))
    }

    fn decl(&mut self, kind: DeclKind) -> PResult<Decl> {
        let name = self.ident()?;
        let (gamma, delta, theta) = self.header()?;
        self.expect_sym("::")?;
        self.expect_sym("(")?;
        let z = self.ident()?;
        self.expect_sym(":")?;
        let c = self.ty()?;
        self.expect_sym(")")?;
        self.expect_sym("=")?;
        self.allow_hole = kind == DeclKind::Ctx;
        let body = self.process()?;
        self.allow_hole = false;
        if kind == DeclKind::Ctx && body.count_holes() != 1 {
            return self.err("a context needs exactly one hole");
        }
        Ok(Decl { kind, name, gamma, delta, theta, offered: (z, c), body })
    }

    fn unit(&mut self) -> PResult<SourceUnit> {
        let mut unit = SourceUnit::default();
        loop {
            match self.peek().clone() {
                Tok::Eof => break,
                Tok::Word(w) if w == "params" => {
                    self.bump();
                    unit.params.push(self.ident()?);
                    while self.is_sym(",") {
                        self.bump();
                        unit.params.push(self.ident()?);
                    }
                    self.expect_sym(".")?;
                }
                Tok::Word(w) if w == "type" => {
                    self.bump();
                    let name = self.ident()?;
                    self.expect_sym("=")?;
                    let t = self.ty()?;
                    self.expect_sym(".")?;
                    self.aliases.insert(name.clone(), t.clone());
                    unit.aliases.push((name, t));
                }
                Tok::Word(w) if w == "proc" || w == "ctx" => {
                    self.bump();
                    let kind = if w == "proc" { DeclKind::Proc } else { DeclKind::Ctx };
                    let d = self.decl(kind)?;
                    if unit.decl(&d.name).is_some() {
                        return self.err("duplicate declaration");
                    }
                    if kind == DeclKind::Proc {
                        self.procs.insert(d.name.clone(), d.body.clone());
                    }
                    unit.decls.push(d);
                }
                _ => return self.err("expected `params`, `type`, `proc` or `ctx`"),
            }
        }
        Ok(unit)
    }

    fn finish<T>(&mut self, v: T) -> PResult<T> {
        if *self.peek() != Tok::Eof {
            return self.err("trailing input");
        }
        Ok(v)
    }
}

pub fn parse_unit(src: &str) -> Result<SourceUnit, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser::new(&toks);
    let u = p.unit()?;
    p.finish(u)
}

/// Parse a single process; `[]` is accepted as a hole.
pub fn parse_process(src: &str) -> Result<Process, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser::new(&toks);
    p.allow_hole = true;
    let q = p.process()?;
    p.finish(q)
}

pub fn parse_type(src: &str) -> Result<SessionType, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser::new(&toks);
    let t = p.ty()?;
    p.finish(t)
}

pub fn parse_polynomial(src: &str) -> Result<Polynomial, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser::new(&toks);
    let q = p.poly()?;
    p.finish(q)
}

impl FromStr for Polynomial {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_polynomial(s)
    }
}

impl FromStr for SessionType {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_type(s)
    }
}

impl FromStr for Process {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_process(s)
    }
}
