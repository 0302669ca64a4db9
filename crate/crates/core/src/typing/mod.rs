//! Session typing with polynomial multiplicities, derivations and weights.

mod check;
mod types;
mod validate;

pub use check::{check_context, check_decl, check_process, check_term, check_unit, HoleSpec};
pub use types::{env_leq, env_scale, env_sum, LinearEnv, SessionType, TermEnv, UnrestrictedEnv};
pub use validate::{validate_derivation, InvalidDerivation};

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::{self, Write};

use crate::ast::{Name, Process, Term};
use crate::funsym::FunsymError;
use crate::kernel::{GroundType, Polynomial};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TypingError {
    #[error("unbound name `{0}`")]
    UnboundName(Name),
    #[error("linearity violated on `{0}`")]
    LinearityViolation(Name),
    #[error("type mismatch: expected {expected}, found {found}")]
    TypeMismatch { expected: String, found: String },
    #[error("cannot show {0} <= {1}")]
    PolyNotLeq(Polynomial, Polynomial),
    #[error("string literal of length {len} does not fit Str[{bound}]")]
    StringTooLong { len: usize, bound: Polynomial },
    #[error("polynomial mentions variables outside the parameter set: {0}")]
    VarsOutsideV(String),
    #[error("no typing rule applies to `{0}`")]
    NoRuleApplies(String),
    #[error("`{0}` has different types in the two environments")]
    TypeMismatchAtName(Name),
    #[error(transparent)]
    Funsym(#[from] FunsymError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rule {
    OneL,
    OneR,
    TensorL,
    TensorR,
    LolliL,
    LolliR,
    Cut,
    CutBang,
    Copy,
    BangL,
    BangR,
    PlusL,
    PlusR1,
    PlusR2,
    WithL1,
    WithL2,
    WithR,
    StrL,
    StrR,
    BoolL,
    BoolR,
    Let,
    If,
    /// Rearrangement of `|` and `ν`; the premise types an equivalent process.
    Struct,
    Hole,
}

impl Rule {
    pub fn name(&self) -> &'static str {
        use Rule::*;
        match self {
            OneL => "T1L",
            OneR => "T1R",
            TensorL => "T*L",
            TensorR => "T*R",
            LolliL => "T-oL",
            LolliR => "T-oR",
            Cut => "Tcut",
            CutBang => "Tcut!",
            Copy => "Tcopy",
            BangL => "T!L",
            BangR => "T!R",
            PlusL => "T+L",
            PlusR1 => "T+R1",
            PlusR2 => "T+R2",
            WithL1 => "T&L1",
            WithL2 => "T&L2",
            WithR => "T&R",
            StrL => "TSL",
            StrR => "TSR",
            BoolL => "TBL",
            BoolR => "TBR",
            Let => "Tlet",
            If => "Tif",
            Struct => "Struct",
            Hole => "Hole",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A typing derivation. `gamma` holds the multiplicities actually consumed
/// by the subtree, inferred bottom-up.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypingDerivation {
    pub rule: Rule,
    pub process: Process,
    pub gamma: UnrestrictedEnv,
    pub delta: LinearEnv,
    pub theta: TermEnv,
    pub offered: (Name, SessionType),
    pub premises: Vec<TypingDerivation>,
    /// `p` of `Tcut!`, `T!R` and `T!L`.
    pub multiplicity: Option<Polynomial>,
    /// `Compl(f){n/p}` of a `let` on a function application.
    pub cost: Option<Polynomial>,
    pub weight: Polynomial,
}

/// Weight of a node given the weights of its premises.
pub(crate) fn node_weight(
    rule: Rule,
    premises: &[Polynomial],
    multiplicity: Option<&Polynomial>,
    cost: Option<&Polynomial>,
) -> Polynomial {
    let one = Polynomial::one();
    let sum = premises.iter().fold(Polynomial::zero(), |a, w| &a + w);
    match rule {
        Rule::CutBang => {
            let p = multiplicity.cloned().unwrap_or_default();
            &(&one + &(&p * &(&premises[0] + &one))) + &premises[1]
        }
        Rule::BangR => {
            let p = multiplicity.cloned().unwrap_or_default();
            &one + &(&p * &(&premises[0] + &one))
        }
        Rule::Let => &(&one + cost.unwrap_or(&Polynomial::zero())) + &sum,
        Rule::Struct => sum,
        _ => &one + &sum,
    }
}

impl TypingDerivation {
    /// `W(π)` recomputed from the leaves.
    pub fn weight(&self) -> Polynomial {
        let ws: Vec<Polynomial> = self.premises.iter().map(|p| p.weight()).collect();
        node_weight(self.rule, &ws, self.multiplicity.as_ref(), self.cost.as_ref())
    }

    pub fn size(&self) -> usize {
        1 + self.premises.iter().map(|p| p.size()).sum::<usize>()
    }

    pub fn rules(&self) -> Vec<Rule> {
        let mut v = alloc::vec![self.rule];
        for p in &self.premises {
            v.extend(p.rules());
        }
        v
    }

    /// `π{q/v}`: substitute a polynomial for a parameter variable throughout.
    pub fn substitute_params(&self, var: &str, q: &Polynomial) -> TypingDerivation {
        let sp = |p: &Polynomial| p.substitute(var, q);
        let st = |t: &SessionType| t.map_polys(|p| p.substitute(var, q));
        let gt = |g: &GroundType| match g {
            GroundType::Bool => GroundType::Bool,
            GroundType::Str(p) => GroundType::Str(p.substitute(var, q)),
        };
        let premises: Vec<TypingDerivation> =
            self.premises.iter().map(|p| p.substitute_params(var, q)).collect();
        let multiplicity = self.multiplicity.as_ref().map(sp);
        let cost = self.cost.as_ref().map(sp);
        let ws: Vec<Polynomial> = premises.iter().map(|p| p.weight.clone()).collect();
        let weight = node_weight(self.rule, &ws, multiplicity.as_ref(), cost.as_ref());
        TypingDerivation {
            rule: self.rule,
            process: subst_process_polys(&self.process, var, q),
            gamma: self.gamma.iter().map(|(u, (p, a))| (u.clone(), (sp(p), st(a)))).collect(),
            delta: self.delta.iter().map(|(x, a)| (x.clone(), st(a))).collect(),
            theta: self.theta.iter().map(|(z, g)| (z.clone(), gt(g))).collect(),
            offered: (self.offered.0.clone(), st(&self.offered.1)),
            premises,
            multiplicity,
            cost,
            weight,
        }
    }

    /// S-expression rendering.
    pub fn to_sexpr(&self) -> String {
        let mut s = String::new();
        self.write_sexpr(&mut s, 0);
        s
    }

    fn write_sexpr(&self, s: &mut String, indent: usize) {
        let pad = " ".repeat(indent);
        let _ = write!(s, "{pad}({} \"{}\" ({} : {})", self.rule, self.process, self.offered.0, self.offered.1);
        if !self.delta.is_empty() {
            s.push_str(" (lin");
            for (x, a) in &self.delta {
                let _ = write!(s, " ({x} : {a})");
            }
            s.push(')');
        }
        if !self.gamma.is_empty() {
            s.push_str(" (exp");
            for (u, (p, a)) in &self.gamma {
                let _ = write!(s, " ({u} [{p}] : {a})");
            }
            s.push(')');
        }
        let _ = write!(s, " (weight {})", self.weight);
        for p in &self.premises {
            s.push('\n');
            p.write_sexpr(s, indent + 2);
        }
        s.push(')');
    }
}

fn subst_process_polys(p: &Process, var: &str, q: &Polynomial) -> Process {
    use alloc::boxed::Box;
    use Process::*;
    let b = |x: &Process| Box::new(subst_process_polys(x, var, q));
    match p {
        Let(z, Term::App { symbol, index, args }, c) => Let(
            z.clone(),
            Term::App { symbol: symbol.clone(), index: index.substitute(var, q), args: args.clone() },
            b(c),
        ),
        Let(z, t, c) => Let(z.clone(), t.clone(), b(c)),
        Nil => Nil,
        Hole => Hole,
        OutVal(x, v) => OutVal(x.clone(), v.clone()),
        Par(l, r) => Par(b(l), b(r)),
        Res(y, c) => Res(y.clone(), b(c)),
        OutCh(x, y, c) => OutCh(x.clone(), y.clone(), b(c)),
        InCh(x, y, c) => InCh(x.clone(), y.clone(), b(c)),
        InVal(x, y, c) => InVal(x.clone(), y.clone(), b(c)),
        RepIn(x, y, c) => RepIn(x.clone(), y.clone(), b(c)),
        SelL(x, c) => SelL(x.clone(), b(c)),
        SelR(x, c) => SelR(x.clone(), b(c)),
        Case(x, l, r) => Case(x.clone(), b(l), b(r)),
        If(v, l, r) => If(v.clone(), b(l), b(r)),
    }
}

/// Substitute polynomials for parameters in every function index of `p`.
pub fn instantiate_indices(p: &Process, sub: &BTreeMap<String, Polynomial>) -> Process {
    let mut out = p.clone();
    for (v, q) in sub {
        out = subst_process_polys(&out, v, q);
    }
    out
}

#[cfg(test)]
mod tests;
