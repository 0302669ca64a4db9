//! The checker proper. Compositions built from `|` and `ν` are typed as a
//! cut tree over their flattened threads, so any arrangement equal up to
//! associativity, commutativity and scope extrusion is accepted. Cut types
//! are not annotated in the syntax and are inferred by unification.

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::types::{LinearEnv, SessionType, TermEnv, UnrestrictedEnv};
use super::{node_weight, Rule, TypingDerivation, TypingError};
use crate::ast::{Name, Process, Term, Value};
use crate::funsym::{FunsymError, Kind, Registry, INDEX_VAR};
use crate::kernel::{poly_leq, GroundType, GroundValue, Polynomial};
use crate::parser::{Decl, SourceUnit};

type R<T> = Result<T, TypingError>;

#[derive(Clone, Debug, PartialEq, Eq)]
enum Len {
    Poly(Polynomial),
    Meta(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Ty {
    One,
    Lolli(Box<Ty>, Box<Ty>),
    Tensor(Box<Ty>, Box<Ty>),
    Plus(Box<Ty>, Box<Ty>),
    With(Box<Ty>, Box<Ty>),
    Bang(Polynomial, Box<Ty>),
    Bool,
    Str(Len),
    Meta(usize),
}

impl Ty {
    fn from_session(t: &SessionType) -> Ty {
        use SessionType as S;
        let b = |x: &SessionType| Box::new(Ty::from_session(x));
        match t {
            S::One => Ty::One,
            S::Bool => Ty::Bool,
            S::Str(p) => Ty::Str(Len::Poly(p.clone())),
            S::Bang(p, a) => Ty::Bang(p.clone(), b(a)),
            S::Lolli(a, c) => Ty::Lolli(b(a), b(c)),
            S::Tensor(a, c) => Ty::Tensor(b(a), b(c)),
            S::Plus(a, c) => Ty::Plus(b(a), b(c)),
            S::With(a, c) => Ty::With(b(a), b(c)),
        }
    }

    fn from_ground(g: &GroundType) -> Ty {
        match g {
            GroundType::Bool => Ty::Bool,
            GroundType::Str(p) => Ty::Str(Len::Poly(p.clone())),
        }
    }
}

/// Judgment assigned to the hole of a context.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HoleSpec {
    pub gamma: UnrestrictedEnv,
    pub delta: LinearEnv,
    pub theta: TermEnv,
    pub offered: (Name, SessionType),
}

impl HoleSpec {
    pub fn from_decl(d: &Decl) -> Self {
        HoleSpec { gamma: d.gamma_env(), delta: d.delta_env(), theta: d.theta_env(), offered: d.offered.clone() }
    }
}

#[derive(Clone, Default)]
struct State {
    metas: Vec<Option<Ty>>,
    ground: Vec<bool>,
    lens: Vec<Option<Len>>,
    lower: Vec<(Len, usize)>,
}

#[derive(Clone)]
struct GEntry {
    ty: Ty,
}

type GEnv = BTreeMap<Name, GEntry>;
type DEnv = BTreeMap<Name, Ty>;
type TEnv = BTreeMap<Name, Ty>;
type Usage = BTreeMap<Name, (Polynomial, Ty)>;

struct Node {
    rule: Rule,
    process: Process,
    gamma: Usage,
    delta: DEnv,
    theta: TEnv,
    offered: (Name, Ty),
    premises: Vec<Node>,
    mult: Option<Polynomial>,
    cost: Option<Polynomial>,
}

struct Checker<'a> {
    reg: &'a Registry,
    params: BTreeSet<String>,
    st: State,
    hole: Option<&'a HoleSpec>,
}

fn short(p: &Process) -> String {
    let s = p.to_string();
    if s.len() > 60 {
        let mut cut = 60;
        while !s.is_char_boundary(cut) {
            cut -= 1;
        }
        format!("{}...", &s[..cut])
    } else {
        s
    }
}

fn usage_sum(a: &Usage, b: &Usage) -> R<Usage> {
    let mut out = a.clone();
    for (u, (p, t)) in b {
        match out.get_mut(u) {
            Some((q, t2)) => {
                if t2 != t {
                    return Err(TypingError::TypeMismatchAtName(u.clone()));
                }
                *q = &*q + p;
            }
            None => {
                out.insert(u.clone(), (p.clone(), t.clone()));
            }
        }
    }
    Ok(out)
}

/// Pointwise upper bound for rules whose premises share Γ.
fn usage_join(a: &Usage, b: &Usage) -> Usage {
    let mut out = a.clone();
    for (u, (p, t)) in b {
        match out.get_mut(u) {
            Some((q, _)) => {
                if poly_leq(q, p).holds() {
                    *q = p.clone();
                } else if !poly_leq(p, q).holds() {
                    *q = &*q + p;
                }
            }
            None => {
                out.insert(u.clone(), (p.clone(), t.clone()));
            }
        }
    }
    out
}

fn usage_scale(p: &Polynomial, u: &Usage) -> Usage {
    u.iter()
        .map(|(k, (q, t))| (k.clone(), (p * q, t.clone())))
        .filter(|(_, (q, _))| !q.is_zero())
        .collect()
}

fn union_find(n: usize) -> Vec<usize> {
    (0..n).collect()
}

fn find(uf: &mut [usize], mut i: usize) -> usize {
    while uf[i] != i {
        uf[i] = uf[uf[i]];
        i = uf[i];
    }
    i
}

impl<'a> Checker<'a> {
    fn new(reg: &'a Registry, params: BTreeSet<String>, hole: Option<&'a HoleSpec>) -> Self {
        Checker { reg, params, st: State::default(), hole }
    }

    // ---- metas and unification ----

    fn meta(&mut self) -> Ty {
        self.st.metas.push(None);
        self.st.ground.push(false);
        Ty::Meta(self.st.metas.len() - 1)
    }

    fn ground_meta(&mut self) -> Ty {
        let m = self.meta();
        if let Ty::Meta(i) = m {
            self.st.ground[i] = true;
        }
        m
    }

    fn len_meta(&mut self) -> Len {
        self.st.lens.push(None);
        Len::Meta(self.st.lens.len() - 1)
    }

    fn walk(&self, t: &Ty) -> Ty {
        let mut cur = t.clone();
        while let Ty::Meta(i) = cur {
            match &self.st.metas[i] {
                Some(next) => cur = next.clone(),
                None => break,
            }
        }
        cur
    }

    fn walk_len(&self, l: &Len) -> Len {
        let mut cur = l.clone();
        while let Len::Meta(i) = cur {
            match &self.st.lens[i] {
                Some(next) => cur = next.clone(),
                None => break,
            }
        }
        cur
    }

    fn show(&self, t: &Ty) -> String {
        match self.walk(t) {
            Ty::One => "1".into(),
            Ty::Bool => "Bool".into(),
            Ty::Str(l) => match self.walk_len(&l) {
                Len::Poly(p) => format!("Str[{p}]"),
                Len::Meta(i) => format!("Str[?{i}]"),
            },
            Ty::Meta(i) => format!("?{i}"),
            Ty::Bang(p, a) => format!("![{p}] {}", self.show(&a)),
            Ty::Lolli(a, b) => format!("({} -o {})", self.show(&a), self.show(&b)),
            Ty::Tensor(a, b) => format!("({} * {})", self.show(&a), self.show(&b)),
            Ty::Plus(a, b) => format!("({} + {})", self.show(&a), self.show(&b)),
            Ty::With(a, b) => format!("({} & {})", self.show(&a), self.show(&b)),
        }
    }

    fn mismatch<T>(&self, expected: &Ty, found: &Ty) -> R<T> {
        Err(TypingError::TypeMismatch { expected: self.show(expected), found: self.show(found) })
    }

    fn occurs(&self, i: usize, t: &Ty) -> bool {
        match self.walk(t) {
            Ty::Meta(j) => i == j,
            Ty::Bang(_, a) => self.occurs(i, &a),
            Ty::Lolli(a, b) | Ty::Tensor(a, b) | Ty::Plus(a, b) | Ty::With(a, b) => {
                self.occurs(i, &a) || self.occurs(i, &b)
            }
            _ => false,
        }
    }

    fn bind(&mut self, i: usize, t: &Ty) -> R<()> {
        if self.occurs(i, t) {
            return self.mismatch(&Ty::Meta(i), t);
        }
        if self.st.ground[i] {
            match t {
                Ty::Bool | Ty::Str(_) => {}
                Ty::Meta(j) => self.st.ground[*j] = true,
                _ => return self.mismatch(&Ty::Bool, t),
            }
        }
        self.st.metas[i] = Some(t.clone());
        Ok(())
    }

    fn unify(&mut self, a: &Ty, b: &Ty) -> R<()> {
        let (a, b) = (self.walk(a), self.walk(b));
        match (&a, &b) {
            (Ty::Meta(i), Ty::Meta(j)) if i == j => Ok(()),
            (Ty::Meta(i), _) => self.bind(*i, &b),
            (_, Ty::Meta(j)) => self.bind(*j, &a),
            (Ty::One, Ty::One) | (Ty::Bool, Ty::Bool) => Ok(()),
            (Ty::Str(l1), Ty::Str(l2)) => self.unify_len(l1, l2, &a, &b),
            (Ty::Bang(p, x), Ty::Bang(q, y)) if p == q => self.unify(x, y),
            (Ty::Lolli(a1, b1), Ty::Lolli(a2, b2))
            | (Ty::Tensor(a1, b1), Ty::Tensor(a2, b2))
            | (Ty::Plus(a1, b1), Ty::Plus(a2, b2))
            | (Ty::With(a1, b1), Ty::With(a2, b2)) => {
                self.unify(a1, a2)?;
                self.unify(b1, b2)
            }
            _ => self.mismatch(&a, &b),
        }
    }

    fn unify_len(&mut self, l1: &Len, l2: &Len, a: &Ty, b: &Ty) -> R<()> {
        match (self.walk_len(l1), self.walk_len(l2)) {
            (Len::Meta(i), Len::Meta(j)) if i == j => Ok(()),
            (Len::Meta(i), other) | (other, Len::Meta(i)) => {
                self.st.lens[i] = Some(other);
                Ok(())
            }
            (Len::Poly(p), Len::Poly(q)) if p == q => Ok(()),
            _ => self.mismatch(a, b),
        }
    }

    // ---- polynomials in scope ----

    fn check_vars(&self, p: &Polynomial) -> R<()> {
        let out: Vec<String> = p.vars().into_iter().filter(|v| !self.params.contains(v)).collect();
        if out.is_empty() {
            Ok(())
        } else {
            Err(TypingError::VarsOutsideV(out.join(", ")))
        }
    }

    fn check_type_vars(&self, t: &SessionType) -> R<()> {
        let out: Vec<String> = t.poly_vars().into_iter().filter(|v| !self.params.contains(v)).collect();
        if out.is_empty() {
            Ok(())
        } else {
            Err(TypingError::VarsOutsideV(out.join(", ")))
        }
    }

    // ---- terms ----

    fn value_kind(&self, t: &TEnv, v: &Value) -> Kind {
        match v {
            Value::Lit(g) => Kind::of_value(g),
            Value::Var(x) => match t.get(x).map(|ty| self.walk(ty)) {
                Some(Ty::Bool) => Kind::Bool,
                _ => Kind::Str,
            },
        }
    }

    fn check_value(&mut self, t: &TEnv, v: &Value, expected: &Ty) -> R<()> {
        match v {
            Value::Var(x) => {
                let ty = t.get(x).cloned().ok_or_else(|| TypingError::UnboundName(x.clone()))?;
                self.unify(&ty, expected)
            }
            Value::Lit(GroundValue::Bool(_)) => self.unify(&Ty::Bool, expected),
            Value::Lit(GroundValue::Bits(s)) => match self.walk(expected) {
                Ty::Str(l) => {
                    self.st.lower.push((l, s.len()));
                    Ok(())
                }
                Ty::Meta(_) => {
                    let l = self.len_meta();
                    self.st.lower.push((l.clone(), s.len()));
                    self.unify(&Ty::Str(l), expected)
                }
                other => self.mismatch(&other, &Ty::Str(Len::Poly(Polynomial::constant(s.len() as u64)))),
            },
        }
    }

    fn value_ty(&mut self, t: &TEnv, v: &Value) -> R<Ty> {
        let m = self.ground_meta();
        self.check_value(t, v, &m)?;
        Ok(self.walk(&m))
    }

    /// Type of a term and, for applications, its instantiated cost.
    fn term_ty(&mut self, t: &TEnv, a: &Term) -> R<(Ty, Option<Polynomial>)> {
        match a {
            Term::Val(v) => Ok((self.value_ty(t, v)?, None)),
            Term::App { symbol, index, args } => {
                self.check_vars(index)?;
                let kinds: Vec<Kind> = args.iter().map(|v| self.value_kind(t, v)).collect();
                let sym = self.reg.resolve(symbol, &kinds)?;
                if sym.args.len() != args.len() {
                    return Err(FunsymError::ArityMismatch {
                        name: symbol.clone(),
                        expected: sym.args.len(),
                        got: args.len(),
                    }
                    .into());
                }
                let inst = |g: &GroundType| match g {
                    GroundType::Bool => GroundType::Bool,
                    GroundType::Str(p) => GroundType::Str(p.substitute(INDEX_VAR, index)),
                };
                let expected: Vec<Ty> = sym.args.iter().map(|g| Ty::from_ground(&inst(g))).collect();
                let result = Ty::from_ground(&inst(&sym.result));
                let cost = sym.cost.substitute(INDEX_VAR, index);
                for (v, e) in args.iter().zip(expected) {
                    self.check_value(t, v, &e)?;
                }
                Ok((result, Some(cost)))
            }
        }
    }

    // ---- helpers ----

    fn fnh(&self, p: &Process) -> BTreeSet<Name> {
        let mut s = p.free_names();
        if p.count_holes() > 0 {
            if let Some(h) = self.hole {
                s.extend(h.delta.keys().cloned());
                s.insert(h.offered.0.clone());
            }
        }
        s
    }

    #[allow(clippy::too_many_arguments)]
    fn node(
        &self,
        rule: Rule,
        process: &Process,
        gamma: Usage,
        d: &DEnv,
        t: &TEnv,
        z: &Name,
        c: &Ty,
        premises: Vec<Node>,
    ) -> Node {
        Node {
            rule,
            process: process.clone(),
            gamma,
            delta: d.clone(),
            theta: t.clone(),
            offered: (z.clone(), c.clone()),
            premises,
            mult: None,
            cost: None,
        }
    }

    /// Close a leaf: every remaining linear channel must have type 1 and is
    /// weakened by `T1L`.
    #[allow(clippy::too_many_arguments)]
    fn leaf(&mut self, rule: Rule, p: &Process, d: &DEnv, t: &TEnv, z: &Name, c: &Ty, gamma: Usage) -> R<Node> {
        for (x, ty) in d {
            if self.unify(ty, &Ty::One).is_err() {
                return Err(TypingError::LinearityViolation(x.clone()));
            }
        }
        let mut node = self.node(rule, p, gamma, &DEnv::new(), t, z, c, Vec::new());
        let mut acc = DEnv::new();
        for x in d.keys() {
            acc.insert(x.clone(), Ty::One);
            let g = node.gamma.clone();
            node = self.node(Rule::OneL, p, g, &acc, t, z, c, alloc::vec![node]);
        }
        Ok(node)
    }

    /// Check `p` after adding `new` to Δ; channels of type `![q] A` go to Γ
    /// straight away (`T!L`).
    #[allow(clippy::too_many_arguments)]
    fn with_linear(&mut self, g: &GEnv, d: &DEnv, t: &TEnv, new: Vec<(Name, Ty)>, p: &Process, z: &Name, c: &Ty) -> R<Node> {
        let mut g2 = g.clone();
        let mut d2 = d.clone();
        let mut bangs = Vec::new();
        for (x, ty) in new {
            if d2.contains_key(&x) || g2.contains_key(&x) {
                return Err(TypingError::LinearityViolation(x));
            }
            match self.walk(&ty) {
                Ty::Bang(q, a) => {
                    g2.insert(x.clone(), GEntry { ty: (*a).clone() });
                    bangs.push((x, q, ty));
                }
                _ => {
                    d2.insert(x, ty);
                }
            }
        }
        let mut node = self.check(&g2, &d2, t, p, z, c)?;
        let mut acc = d2;
        for (x, q, ty) in bangs.into_iter().rev() {
            let used = node.gamma.get(&x).map(|e| e.0.clone()).unwrap_or_default();
            if !poly_leq(&used, &q).holds() {
                return Err(TypingError::PolyNotLeq(used, q));
            }
            let mut gamma = node.gamma.clone();
            gamma.remove(&x);
            acc.insert(x, ty);
            let mut n = self.node(Rule::BangL, p, gamma, &acc, t, z, c, alloc::vec![node]);
            n.mult = Some(q);
            node = n;
        }
        Ok(node)
    }

    fn split(&self, d: &DEnv, left: &Process, right: &Process) -> R<(DEnv, DEnv)> {
        let (fl, fr) = (self.fnh(left), self.fnh(right));
        let (mut dl, mut dr) = (DEnv::new(), DEnv::new());
        for (x, ty) in d {
            match (fl.contains(x), fr.contains(x)) {
                (true, true) => return Err(TypingError::LinearityViolation(x.clone())),
                (true, false) => {
                    dl.insert(x.clone(), ty.clone());
                }
                _ => {
                    dr.insert(x.clone(), ty.clone());
                }
            }
        }
        Ok((dl, dr))
    }

    fn no_rule<T>(&self, p: &Process) -> R<T> {
        Err(TypingError::NoRuleApplies(short(p)))
    }

    // ---- the rules ----

    fn check(&mut self, g: &GEnv, d: &DEnv, t: &TEnv, p: &Process, z: &Name, c: &Ty) -> R<Node> {
        use Process::*;
        if let Some((x, y, cont)) = p.as_bound_out() {
            return self.check_bound_out(g, d, t, p, x, y, cont, z, c);
        }
        match p {
            Par(..) | Res(..) => self.check_soup(g, d, t, p, z, c),
            Hole => self.check_hole(g, d, t, p, z, c),
            Nil => {
                self.unify(c, &Ty::One)?;
                self.leaf(Rule::OneR, p, d, t, z, c, Usage::new())
            }
            OutVal(x, v) if x == z => {
                self.check_value(t, v, c)?;
                let rule = match self.walk(c) {
                    Ty::Bool => Rule::BoolR,
                    _ => Rule::StrR,
                };
                self.leaf(rule, p, d, t, z, c, Usage::new())
            }
            InVal(x, y, q) if d.contains_key(x) => {
                let ty = d[x].clone();
                let gm = self.ground_meta();
                self.unify(&ty, &gm)?;
                let mut d2 = d.clone();
                d2.remove(x);
                let mut t2 = t.clone();
                t2.insert(y.clone(), ty.clone());
                let prem = self.check(g, &d2, &t2, q, z, c)?;
                let rule = match self.walk(&ty) {
                    Ty::Bool => Rule::BoolL,
                    _ => Rule::StrL,
                };
                let gamma = prem.gamma.clone();
                Ok(self.node(rule, p, gamma, d, t, z, c, alloc::vec![prem]))
            }
            Let(y, a, q) => {
                let (ty, cost) = self.term_ty(t, a)?;
                let mut t2 = t.clone();
                t2.insert(y.clone(), ty);
                let prem = self.check(g, d, &t2, q, z, c)?;
                let gamma = prem.gamma.clone();
                let mut n = self.node(Rule::Let, p, gamma, d, t, z, c, alloc::vec![prem]);
                n.cost = cost;
                Ok(n)
            }
            If(v, l, r) => {
                self.check_value(t, v, &Ty::Bool)?;
                let pl = self.check(g, d, t, l, z, c)?;
                let pr = self.check(g, d, t, r, z, c)?;
                let gamma = usage_join(&pl.gamma, &pr.gamma);
                Ok(self.node(Rule::If, p, gamma, d, t, z, c, alloc::vec![pl, pr]))
            }
            SelL(x, q) | SelR(x, q) => {
                let left = matches!(p, SelL(..));
                let (a, b) = (self.meta(), self.meta());
                let (rule, prem) = if x == z {
                    self.unify(c, &Ty::Plus(Box::new(a.clone()), Box::new(b.clone())))?;
                    let next = if left { a } else { b };
                    let prem = self.check(g, d, t, q, z, &next)?;
                    (if left { Rule::PlusR1 } else { Rule::PlusR2 }, prem)
                } else if let Some(ty) = d.get(x).cloned() {
                    self.unify(&ty, &Ty::With(Box::new(a.clone()), Box::new(b.clone())))?;
                    let mut d2 = d.clone();
                    d2.insert(x.clone(), if left { a } else { b });
                    let prem = self.check(g, &d2, t, q, z, c)?;
                    (if left { Rule::WithL1 } else { Rule::WithL2 }, prem)
                } else {
                    return Err(TypingError::UnboundName(x.clone()));
                };
                let gamma = prem.gamma.clone();
                Ok(self.node(rule, p, gamma, d, t, z, c, alloc::vec![prem]))
            }
            Case(x, l, r) => {
                let (a, b) = (self.meta(), self.meta());
                let (rule, pl, pr) = if x == z {
                    self.unify(c, &Ty::With(Box::new(a.clone()), Box::new(b.clone())))?;
                    let pl = self.check(g, d, t, l, z, &a)?;
                    let pr = self.check(g, d, t, r, z, &b)?;
                    (Rule::WithR, pl, pr)
                } else if let Some(ty) = d.get(x).cloned() {
                    self.unify(&ty, &Ty::Plus(Box::new(a.clone()), Box::new(b.clone())))?;
                    let mut dl = d.clone();
                    dl.insert(x.clone(), a);
                    let mut dr = d.clone();
                    dr.insert(x.clone(), b);
                    let pl = self.check(g, &dl, t, l, z, c)?;
                    let pr = self.check(g, &dr, t, r, z, c)?;
                    (Rule::PlusL, pl, pr)
                } else {
                    return Err(TypingError::UnboundName(x.clone()));
                };
                let gamma = usage_join(&pl.gamma, &pr.gamma);
                Ok(self.node(rule, p, gamma, d, t, z, c, alloc::vec![pl, pr]))
            }
            InCh(x, y, q) => {
                let (a, b) = (self.meta(), self.meta());
                if x == z {
                    self.unify(c, &Ty::Lolli(Box::new(a.clone()), Box::new(b.clone())))?;
                    let prem = self.with_linear(g, d, t, alloc::vec![(y.clone(), a)], q, z, &b)?;
                    let gamma = prem.gamma.clone();
                    Ok(self.node(Rule::LolliR, p, gamma, d, t, z, c, alloc::vec![prem]))
                } else if let Some(ty) = d.get(x).cloned() {
                    self.unify(&ty, &Ty::Tensor(Box::new(a.clone()), Box::new(b.clone())))?;
                    let mut d2 = d.clone();
                    d2.insert(x.clone(), b);
                    let prem = self.with_linear(g, &d2, t, alloc::vec![(y.clone(), a)], q, z, c)?;
                    let gamma = prem.gamma.clone();
                    Ok(self.node(Rule::TensorL, p, gamma, d, t, z, c, alloc::vec![prem]))
                } else {
                    Err(TypingError::UnboundName(x.clone()))
                }
            }
            RepIn(x, y, q) if x == z => {
                let (mult, a) = match self.walk(c) {
                    Ty::Bang(m, a) => (m, *a),
                    _ => return self.no_rule(p),
                };
                for (w, ty) in d {
                    if self.unify(ty, &Ty::One).is_err() {
                        return Err(TypingError::LinearityViolation(w.clone()));
                    }
                }
                let prem = self.check(g, &DEnv::new(), t, q, y, &a)?;
                let gamma = usage_scale(&mult, &prem.gamma);
                let mut n = self.node(Rule::BangR, p, gamma, &DEnv::new(), t, z, c, alloc::vec![prem]);
                n.mult = Some(mult);
                Ok(self.weaken(n, d, p))
            }
            _ => self.no_rule(p),
        }
    }

    /// Wrap `n` in `T1L` for each (unit-typed) channel of `d`.
    fn weaken(&self, mut n: Node, d: &DEnv, p: &Process) -> Node {
        let mut acc = n.delta.clone();
        for x in d.keys() {
            if acc.contains_key(x) {
                continue;
            }
            acc.insert(x.clone(), Ty::One);
            let (g, t, (z, c)) = (n.gamma.clone(), n.theta.clone(), n.offered.clone());
            n = self.node(Rule::OneL, p, g, &acc, &t, &z, &c, alloc::vec![n]);
        }
        n
    }

    fn split_cont<'p>(&self, p: &Process, cont: &'p Process, y: &Name) -> R<(&'p Process, &'p Process)> {
        match cont {
            Process::Par(l, r) => {
                if !self.fnh(l).contains(y) && self.fnh(r).contains(y) {
                    Ok((r, l))
                } else {
                    Ok((l, r))
                }
            }
            _ => self.no_rule(p),
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn check_bound_out(
        &mut self,
        g: &GEnv,
        d: &DEnv,
        t: &TEnv,
        p: &Process,
        x: &Name,
        y: &Name,
        cont: &Process,
        z: &Name,
        c: &Ty,
    ) -> R<Node> {
        let (a, b) = (self.meta(), self.meta());
        if x == z {
            self.unify(c, &Ty::Tensor(Box::new(a.clone()), Box::new(b.clone())))?;
            let (pp, qq) = self.split_cont(p, cont, y)?;
            let (dl, dr) = self.split(d, pp, qq)?;
            let pl = self.check(g, &dl, t, pp, y, &a)?;
            let pr = self.check(g, &dr, t, qq, x, &b)?;
            let gamma = usage_sum(&pl.gamma, &pr.gamma)?;
            Ok(self.node(Rule::TensorR, p, gamma, d, t, z, c, alloc::vec![pl, pr]))
        } else if let Some(ty) = d.get(x).cloned() {
            self.unify(&ty, &Ty::Lolli(Box::new(a.clone()), Box::new(b.clone())))?;
            let (pp, qq) = self.split_cont(p, cont, y)?;
            let mut d2 = d.clone();
            d2.remove(x);
            let (dl, dr) = self.split(&d2, pp, qq)?;
            let pl = self.check(g, &dl, t, pp, y, &a)?;
            let pr = self.with_linear(g, &dr, t, alloc::vec![(x.clone(), b)], qq, z, c)?;
            let gamma = usage_sum(&pl.gamma, &pr.gamma)?;
            Ok(self.node(Rule::LolliL, p, gamma, d, t, z, c, alloc::vec![pl, pr]))
        } else if let Some(entry) = g.get(x).cloned() {
            let prem = self.with_linear(g, d, t, alloc::vec![(y.clone(), entry.ty.clone())], cont, z, c)?;
            let mut one = Usage::new();
            one.insert(x.clone(), (Polynomial::one(), entry.ty));
            let gamma = usage_sum(&one, &prem.gamma)?;
            Ok(self.node(Rule::Copy, p, gamma, d, t, z, c, alloc::vec![prem]))
        } else {
            Err(TypingError::UnboundName(x.clone()))
        }
    }

    fn check_hole(&mut self, g: &GEnv, d: &DEnv, t: &TEnv, p: &Process, z: &Name, c: &Ty) -> R<Node> {
        let h = match self.hole {
            Some(h) => h,
            None => return self.no_rule(p),
        };
        if *z != h.offered.0 {
            return self.no_rule(p);
        }
        self.unify(c, &Ty::from_session(&h.offered.1))?;
        let mut usage = Usage::new();
        for (x, a) in &h.delta {
            let want = Ty::from_session(a);
            if let Some(ty) = d.get(x) {
                self.unify(ty, &want)?;
            } else if let (Some(entry), SessionType::Bang(q, inner)) = (g.get(x), a) {
                self.unify(&entry.ty, &Ty::from_session(inner))?;
                usage.insert(x.clone(), (q.clone(), entry.ty.clone()));
            } else {
                return Err(TypingError::UnboundName(x.clone()));
            }
        }
        for (x, ty) in d {
            if !h.delta.contains_key(x) && self.unify(ty, &Ty::One).is_err() {
                return Err(TypingError::LinearityViolation(x.clone()));
            }
        }
        for (v, gt) in &h.theta {
            let ty = t.get(v).cloned().ok_or_else(|| TypingError::UnboundName(v.clone()))?;
            self.unify(&ty, &Ty::from_ground(gt))?;
        }
        for (u, (q, a)) in &h.gamma {
            let entry = g.get(u).cloned().ok_or_else(|| TypingError::UnboundName(u.clone()))?;
            self.unify(&entry.ty, &Ty::from_session(a))?;
            let one = [(u.clone(), (q.clone(), entry.ty))].into_iter().collect();
            usage = usage_sum(&usage, &one)?;
        }
        Ok(self.node(Rule::Hole, p, usage, d, t, z, c, Vec::new()))
    }

    // ---- compositions ----

    fn flatten(p: &Process, names: &mut Vec<Name>, threads: &mut Vec<Process>) {
        match p {
            Process::Par(a, b) => {
                Self::flatten(a, names, threads);
                Self::flatten(b, names, threads);
            }
            Process::Res(y, body) if p.as_bound_out().is_none() => {
                names.push(y.clone());
                Self::flatten(body, names, threads);
            }
            Process::Nil => {}
            _ => threads.push(p.clone()),
        }
    }

    fn check_soup(&mut self, g: &GEnv, d: &DEnv, t: &TEnv, p: &Process, z: &Name, c: &Ty) -> R<Node> {
        let (mut names, mut threads) = (Vec::new(), Vec::new());
        Self::flatten(p, &mut names, &mut threads);
        let cut_set: BTreeSet<Name> = names.iter().cloned().collect();

        let mut servers: Vec<(Name, Name, Process, Ty)> = Vec::new();
        let mut linear = Vec::new();
        for th in threads {
            match &th {
                Process::RepIn(u, y, body) if cut_set.contains(u) => {
                    if servers.iter().any(|s| &s.0 == u) {
                        return Err(TypingError::LinearityViolation(u.clone()));
                    }
                    let m = self.meta();
                    servers.push((u.clone(), y.clone(), (**body).clone(), m));
                }
                _ => linear.push(th),
            }
        }
        let server_names: BTreeSet<Name> = servers.iter().map(|s| s.0.clone()).collect();
        let lin_cuts: BTreeSet<Name> = cut_set.difference(&server_names).cloned().collect();

        let mut g_all = g.clone();
        for (u, _, _, m) in &servers {
            g_all.insert(u.clone(), GEntry { ty: m.clone() });
        }

        let mut node = if linear.is_empty() {
            self.unify(c, &Ty::One)?;
            self.leaf(Rule::OneR, &Process::Nil, d, t, z, c, Usage::new())?
        } else {
            self.cut_tree(&g_all, d, t, linear, &lin_cuts, z, c)?
        };

        let mut bodies: Vec<Option<(Name, Name, Node)>> = Vec::new();
        for (u, y, body, m) in &servers {
            let mut gs = g_all.clone();
            gs.remove(u);
            let bn = self.check(&gs, &DEnv::new(), t, body, y, m)?;
            bodies.push(Some((u.clone(), y.clone(), bn)));
        }
        // Innermost first: a server no remaining body uses.
        while bodies.iter().any(|b| b.is_some()) {
            let pick = (0..bodies.len()).find(|&i| {
                let Some((u, _, _)) = &bodies[i] else { return false };
                !bodies.iter().enumerate().any(|(j, b)| {
                    j != i && b.as_ref().is_some_and(|(_, _, bn)| bn.gamma.contains_key(u))
                })
            });
            let Some(i) = pick else {
                return self.no_rule(p);
            };
            let (u, y, bn) = bodies[i].take().expect("picked a live server");
            let mult = node.gamma.get(&u).map(|e| e.0.clone()).unwrap_or_default();
            let mut rest = node.gamma.clone();
            rest.remove(&u);
            let gamma = usage_sum(&usage_scale(&mult, &bn.gamma), &rest)?;
            let process = Process::res(
                &u,
                Process::par(Process::RepIn(u.clone(), y.clone(), Box::new(bn.process.clone())), node.process.clone()),
            );
            let mut n = self.node(Rule::CutBang, &process, gamma, d, t, z, c, alloc::vec![bn, node]);
            n.mult = Some(mult);
            node = n;
        }

        if node.process.canonicalize() != p.canonicalize() {
            let gamma = node.gamma.clone();
            node = self.node(Rule::Struct, p, gamma, d, t, z, c, alloc::vec![node]);
        }
        Ok(node)
    }

    #[allow(clippy::too_many_arguments)]
    fn cut_tree(
        &mut self,
        g: &GEnv,
        d: &DEnv,
        t: &TEnv,
        threads: Vec<Process>,
        cuts: &BTreeSet<Name>,
        z: &Name,
        c: &Ty,
    ) -> R<Node> {
        let owners: Vec<usize> = (0..threads.len()).filter(|&i| self.fnh(&threads[i]).contains(z)).collect();
        let candidates = match owners.len() {
            0 => (0..threads.len()).collect(),
            1 => owners,
            _ => return Err(TypingError::LinearityViolation(z.clone())),
        };
        let mut last = None;
        for root in candidates {
            let snapshot = self.st.clone();
            match self.try_root(g, d, t, &threads, root, cuts, z, c) {
                Ok(n) => return Ok(n),
                Err(e) => {
                    self.st = snapshot;
                    last = Some(e);
                }
            }
        }
        Err(last.unwrap_or_else(|| TypingError::NoRuleApplies(z.clone())))
    }

    #[allow(clippy::too_many_arguments)]
    fn try_root(
        &mut self,
        g: &GEnv,
        d: &DEnv,
        t: &TEnv,
        threads: &[Process],
        root: usize,
        cuts: &BTreeSet<Name>,
        z: &Name,
        c: &Ty,
    ) -> R<Node> {
        let rest: Vec<usize> = (0..threads.len()).filter(|&i| i != root).collect();
        let fns: Vec<BTreeSet<Name>> = threads.iter().map(|th| self.fnh(th)).collect();
        let root_fn = &fns[root];

        let mut uf = union_find(rest.len());
        for x in cuts {
            let holders: Vec<usize> = (0..rest.len()).filter(|&k| fns[rest[k]].contains(x)).collect();
            for w in holders.windows(2) {
                let (a, b) = (find(&mut uf, w[0]), find(&mut uf, w[1]));
                uf[a] = b;
            }
        }
        let mut comps: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (k, &t) in rest.iter().enumerate() {
            let r = find(&mut uf, k);
            comps.entry(r).or_default().push(t);
        }

        // Linear channels of the enclosing judgment go where they occur.
        let mut assigned: Vec<DEnv> = alloc::vec![DEnv::new(); threads.len()];
        for (x, ty) in d {
            let holders: Vec<usize> = (0..threads.len()).filter(|&i| fns[i].contains(x)).collect();
            let comp_holders: BTreeSet<usize> = holders
                .iter()
                .map(|&i| if i == root { usize::MAX } else { *comps.iter().find(|(_, v)| v.contains(&i)).map(|(k, _)| k).unwrap_or(&0) })
                .collect();
            if comp_holders.len() > 1 {
                return Err(TypingError::LinearityViolation(x.clone()));
            }
            let target = holders.first().copied().unwrap_or(root);
            assigned[target].insert(x.clone(), ty.clone());
        }

        let mut subtrees = Vec::new();
        for members in comps.values() {
            let comp_fn: BTreeSet<Name> = members.iter().flat_map(|&i| fns[i].iter().cloned()).collect();
            let conn: Vec<Name> = cuts.iter().filter(|x| root_fn.contains(*x) && comp_fn.contains(*x)).cloned().collect();
            if conn.len() != 1 {
                let th = &threads[members[0]];
                return match conn.first() {
                    Some(x) => Err(TypingError::LinearityViolation(x.clone())),
                    None => self.no_rule(th),
                };
            }
            let x = conn[0].clone();
            let mut dk = DEnv::new();
            for &i in members {
                dk.extend(assigned[i].clone());
            }
            let m = self.meta();
            let sub: Vec<Process> = members.iter().map(|&i| threads[i].clone()).collect();
            let n = self.cut_tree(g, &dk, t, sub, cuts, &x, &m)?;
            subtrees.push((x, m, n));
        }

        let new: Vec<(Name, Ty)> = subtrees.iter().map(|(x, m, _)| (x.clone(), m.clone())).collect();
        let mut node = self.with_linear(g, &assigned[root], t, new, &threads[root], z, c)?;
        for (x, _, sub) in subtrees.into_iter().rev() {
            let gamma = usage_sum(&sub.gamma, &node.gamma)?;
            let mut delta = sub.delta.clone();
            for (k, v) in &node.delta {
                if k != &x {
                    delta.insert(k.clone(), v.clone());
                }
            }
            let process = Process::res(&x, Process::par(sub.process.clone(), node.process.clone()));
            node = self.node(Rule::Cut, &process, gamma, &delta, t, z, c, alloc::vec![sub, node]);
        }
        Ok(node)
    }

    // ---- finishing ----

    fn defaults(&mut self) {
        for i in 0..self.st.lens.len() {
            if let Len::Meta(r) = self.walk_len(&Len::Meta(i)) {
                let lb = self
                    .st
                    .lower
                    .iter()
                    .filter(|(l, _)| self.walk_len(l) == Len::Meta(r))
                    .map(|(_, k)| *k)
                    .max()
                    .unwrap_or(0);
                self.st.lens[r] = Some(Len::Poly(Polynomial::constant(lb as u64)));
            }
        }
        for i in 0..self.st.metas.len() {
            if let Ty::Meta(r) = self.walk(&Ty::Meta(i)) {
                self.st.metas[r] = Some(if self.st.ground[r] { Ty::Bool } else { Ty::One });
            }
        }
    }

    fn zonk_len(&self, l: &Len) -> Polynomial {
        match self.walk_len(l) {
            Len::Poly(p) => p,
            Len::Meta(_) => Polynomial::zero(),
        }
    }

    fn check_lengths(&self) -> R<()> {
        for (l, k) in &self.st.lower {
            let bound = self.zonk_len(l);
            if !poly_leq(&Polynomial::constant(*k as u64), &bound).holds() {
                return Err(TypingError::StringTooLong { len: *k, bound });
            }
        }
        Ok(())
    }

    fn zonk(&self, t: &Ty) -> SessionType {
        let b = |x: &Ty| Box::new(self.zonk(x));
        match self.walk(t) {
            Ty::One | Ty::Meta(_) => SessionType::One,
            Ty::Bool => SessionType::Bool,
            Ty::Str(l) => SessionType::Str(self.zonk_len(&l)),
            Ty::Bang(p, a) => SessionType::Bang(p, b(&a)),
            Ty::Lolli(a, c) => SessionType::Lolli(b(&a), b(&c)),
            Ty::Tensor(a, c) => SessionType::Tensor(b(&a), b(&c)),
            Ty::Plus(a, c) => SessionType::Plus(b(&a), b(&c)),
            Ty::With(a, c) => SessionType::With(b(&a), b(&c)),
        }
    }

    fn zonk_ground(&self, t: &Ty) -> GroundType {
        self.zonk(t).as_ground().unwrap_or(GroundType::Bool)
    }

    fn finish(&self, n: Node) -> TypingDerivation {
        let premises: Vec<TypingDerivation> = n.premises.into_iter().map(|p| self.finish(p)).collect();
        let ws: Vec<Polynomial> = premises.iter().map(|p| p.weight.clone()).collect();
        let weight = node_weight(n.rule, &ws, n.mult.as_ref(), n.cost.as_ref());
        TypingDerivation {
            rule: n.rule,
            process: n.process,
            gamma: n.gamma.iter().map(|(u, (p, a))| (u.clone(), (p.clone(), self.zonk(a)))).collect(),
            delta: n.delta.iter().map(|(x, a)| (x.clone(), self.zonk(a))).collect(),
            theta: n.theta.iter().map(|(x, a)| (x.clone(), self.zonk_ground(a))).collect(),
            offered: (n.offered.0, self.zonk(&n.offered.1)),
            premises,
            multiplicity: n.mult,
            cost: n.cost,
            weight,
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn run(
    reg: &Registry,
    params: &[Name],
    hole: Option<&HoleSpec>,
    gamma: &UnrestrictedEnv,
    delta: &LinearEnv,
    theta: &TermEnv,
    p: &Process,
    z: &Name,
    c: &SessionType,
) -> R<TypingDerivation> {
    let mut ck = Checker::new(reg, params.iter().cloned().collect(), hole);
    for (p, a) in gamma.values() {
        ck.check_vars(p)?;
        ck.check_type_vars(a)?;
    }
    for a in delta.values() {
        ck.check_type_vars(a)?;
    }
    for g in theta.values() {
        ck.check_type_vars(&SessionType::from_ground(g))?;
    }
    ck.check_type_vars(c)?;

    let g: GEnv = gamma
        .iter()
        .map(|(u, (_, a))| (u.clone(), GEntry { ty: Ty::from_session(a) }))
        .collect();
    let t: TEnv = theta.iter().map(|(x, b)| (x.clone(), Ty::from_ground(b))).collect();
    let mut avoid: BTreeSet<Name> = p.free_names();
    avoid.extend(gamma.keys().cloned());
    avoid.extend(delta.keys().cloned());
    avoid.extend(theta.keys().cloned());
    avoid.insert(z.clone());
    // Hole names are left out: the binders that capture them must keep their names.
    let p2 = p.freshen_binders(&mut avoid);
    let new: Vec<(Name, Ty)> = delta.iter().map(|(x, a)| (x.clone(), Ty::from_session(a))).collect();
    let node = ck.with_linear(&g, &DEnv::new(), &t, new, &p2, z, &Ty::from_session(c))?;
    for (u, (used, _)) in &node.gamma {
        let (budget, _) = gamma.get(u).ok_or_else(|| TypingError::UnboundName(u.clone()))?;
        if !poly_leq(used, budget).holds() {
            return Err(TypingError::PolyNotLeq(used.clone(), budget.clone()));
        }
    }
    ck.defaults();
    ck.check_lengths()?;
    let mut d = ck.finish(node);
    d.gamma = gamma.clone();
    Ok(d)
}

/// `Γ; Δ; Θ ⊢ P :: z : C` over parameter set `params`.
#[allow(clippy::too_many_arguments)]
pub fn check_process(
    params: &[Name],
    gamma: &UnrestrictedEnv,
    delta: &LinearEnv,
    theta: &TermEnv,
    p: &Process,
    z: &Name,
    c: &SessionType,
    reg: &Registry,
) -> Result<TypingDerivation, TypingError> {
    run(reg, params, None, gamma, delta, theta, p, z, c)
}

/// Type a context body whose hole carries the judgment `hole`.
#[allow(clippy::too_many_arguments)]
pub fn check_context(
    params: &[Name],
    gamma: &UnrestrictedEnv,
    delta: &LinearEnv,
    theta: &TermEnv,
    ctx: &Process,
    hole: &HoleSpec,
    z: &Name,
    c: &SessionType,
    reg: &Registry,
) -> Result<TypingDerivation, TypingError> {
    run(reg, params, Some(hole), gamma, delta, theta, ctx, z, c)
}

pub fn check_decl(unit: &SourceUnit, decl: &Decl, reg: &Registry) -> Result<TypingDerivation, TypingError> {
    check_process(
        &unit.params,
        &decl.gamma_env(),
        &decl.delta_env(),
        &decl.theta_env(),
        &decl.body,
        &decl.offered.0,
        &decl.offered.1,
        reg,
    )
}

/// Check every `proc` declaration of a unit.
pub fn check_unit(unit: &SourceUnit, reg: &Registry) -> Vec<(Name, Result<TypingDerivation, TypingError>)> {
    unit.procs().map(|d| (d.name.clone(), check_decl(unit, d, reg))).collect()
}

pub fn check_term(params: &[Name], theta: &TermEnv, a: &Term, reg: &Registry) -> Result<GroundType, TypingError> {
    let mut ck = Checker::new(reg, params.iter().cloned().collect(), None);
    let t: TEnv = theta.iter().map(|(x, b)| (x.clone(), Ty::from_ground(b))).collect();
    let (ty, _) = ck.term_ty(&t, a)?;
    ck.defaults();
    ck.check_lengths()?;
    Ok(ck.zonk_ground(&ty))
}
