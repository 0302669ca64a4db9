//! Process syntax, names, substitution and structural congruence.

mod congruence;
mod context;
mod label;
mod names;

pub use congruence::{congruence_closure, normalize_congruence, struct_congruent, CLOSURE_CAP};
pub use context::{ContextError, LinearContext};
pub use label::ActionLabel;
pub use names::fresh_name;

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

use crate::kernel::{BitString, GroundValue, Polynomial};

pub type Name = String;

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Value {
    Var(Name),
    Lit(GroundValue),
}

impl Value {
    pub fn bool(b: bool) -> Value {
        Value::Lit(GroundValue::Bool(b))
    }

    pub fn bits(b: BitString) -> Value {
        Value::Lit(GroundValue::Bits(b))
    }

    pub fn var(x: &str) -> Value {
        Value::Var(x.into())
    }

    pub fn as_literal(&self) -> Option<&GroundValue> {
        match self {
            Value::Lit(v) => Some(v),
            Value::Var(_) => None,
        }
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Term {
    Val(Value),
    App {
        symbol: Name,
        index: Polynomial,
        args: Vec<Value>,
    },
}

impl Term {
    pub fn values(&self) -> impl Iterator<Item = &Value> {
        let v: Vec<&Value> = match self {
            Term::Val(v) => alloc::vec![v],
            Term::App { args, .. } => args.iter().collect(),
        };
        v.into_iter()
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Process {
    Nil,
    Par(Box<Process>, Box<Process>),
    Res(Name, Box<Process>),
    /// `send x y. P`
    OutCh(Name, Name, Box<Process>),
    /// `recv x (y). P`
    InCh(Name, Name, Box<Process>),
    /// `out x v`
    OutVal(Name, Value),
    /// `in x (z). P`
    InVal(Name, Name, Box<Process>),
    Let(Name, Term, Box<Process>),
    /// `!in x (y). P`
    RepIn(Name, Name, Box<Process>),
    SelL(Name, Box<Process>),
    SelR(Name, Box<Process>),
    Case(Name, Box<Process>, Box<Process>),
    If(Value, Box<Process>, Box<Process>),
    /// Context hole; only meaningful inside a [`LinearContext`].
    Hole,
}

impl Process {
    pub fn par(p: Process, q: Process) -> Process {
        Process::Par(Box::new(p), Box::new(q))
    }

    pub fn res(y: &str, p: Process) -> Process {
        Process::Res(y.into(), Box::new(p))
    }

    /// `(νy) x̄⟨y⟩.P`
    pub fn bound_out(x: &str, y: &str, p: Process) -> Process {
        Process::res(y, Process::OutCh(x.into(), y.into(), Box::new(p)))
    }

    pub fn out_val(x: &str, v: Value) -> Process {
        Process::OutVal(x.into(), v)
    }

    pub fn in_val(x: &str, z: &str, p: Process) -> Process {
        Process::InVal(x.into(), z.into(), Box::new(p))
    }

    pub fn recv(x: &str, y: &str, p: Process) -> Process {
        Process::InCh(x.into(), y.into(), Box::new(p))
    }

    pub fn let_in(z: &str, t: Term, p: Process) -> Process {
        Process::Let(z.into(), t, Box::new(p))
    }

    pub fn if_then(v: Value, p: Process, q: Process) -> Process {
        Process::If(v, Box::new(p), Box::new(q))
    }

    /// Matches `(νy) x̄⟨y⟩.P` and returns `(x, y, P)`.
    pub fn as_bound_out(&self) -> Option<(&Name, &Name, &Process)> {
        match self {
            Process::Res(y, body) => match &**body {
                Process::OutCh(x, y2, p) if y == y2 => Some((x, y, p)),
                _ => None,
            },
            _ => None,
        }
    }

    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }

    pub fn children(&self) -> Vec<&Process> {
        use Process::*;
        match self {
            Nil | OutVal(..) | Hole => Vec::new(),
            Par(a, b) | Case(_, a, b) | If(_, a, b) => alloc::vec![&**a, &**b],
            Res(_, p) | OutCh(_, _, p) | InCh(_, _, p) | InVal(_, _, p) | Let(_, _, p)
            | RepIn(_, _, p) | SelL(_, p) | SelR(_, p) => alloc::vec![&**p],
        }
    }

    pub fn count_holes(&self) -> usize {
        match self {
            Process::Hole => 1,
            p => p.children().iter().map(|c| c.count_holes()).sum(),
        }
    }

    /// Garbage collection on the active region (positions reachable
    /// through `|` and `ν` only): drop `0` components and vacuous
    /// restrictions. Guarded subterms are left alone.
    pub fn tidy(&self) -> Process {
        match self {
            Process::Par(a, b) => {
                let (a, b) = (a.tidy(), b.tidy());
                match (&a, &b) {
                    (Process::Nil, _) => b,
                    (_, Process::Nil) => a,
                    _ => Process::par(a, b),
                }
            }
            Process::Res(y, body) => {
                let body = body.tidy();
                if body.free_names().contains(y) {
                    Process::Res(y.clone(), Box::new(body))
                } else {
                    body
                }
            }
            p => p.clone(),
        }
    }

    /// Tidy, then rename bound names canonically.
    pub fn normal(&self) -> Process {
        self.tidy().canonicalize()
    }
}
