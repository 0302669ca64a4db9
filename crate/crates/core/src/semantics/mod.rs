//! Operational semantics: term evaluation, the labeled transition system,
//! reduction, normalization under a scheduler, confluence checks.

mod diamond;
mod normalize;
mod progress;

pub use diamond::{diamond_check, DiamondCase, DiamondReport};
pub use normalize::{
    build_tree, lift_step, normalize, normalize_traced, EvalReport, NormalizeOptions, ReductionTree, Scheduler, DEFAULT_CEILING,
};
pub use progress::{live, progress, ProgressShape};

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use crate::ast::{ActionLabel, Name, Process, Term, Value};
use crate::funsym::{FunsymError, Registry};
use crate::kernel::{Distribution, GroundValue, KernelError, ParamSubstitution};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SemError {
    #[error("term mentions unbound variable `{0}`")]
    OpenTerm(Name),
    #[error(transparent)]
    Funsym(#[from] FunsymError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error("not every process in the support can perform `{0}`")]
    LabelNotUniformlyEnabled(String),
    #[error("cost ceiling {ceiling} exceeded")]
    StepCeilingExceeded { ceiling: u64 },
    #[error("path cost {cost} exceeds the bound {bound}")]
    BoundViolated { cost: u64, bound: u64 },
    #[error("no confluence witness for `{first}` and `{second}` from {source_process}")]
    ConfluenceViolation { source_process: String, first: String, second: String },
}

/// Registry plus parameter values: everything a step needs besides the process.
#[derive(Clone, Copy)]
pub struct Env<'a> {
    pub reg: &'a Registry,
    pub rho: &'a ParamSubstitution,
}

impl<'a> Env<'a> {
    pub fn new(reg: &'a Registry, rho: &'a ParamSubstitution) -> Self {
        Env { reg, rho }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionStep {
    pub source: Process,
    pub result: Distribution<Process>,
    pub cost: u64,
    pub rule: &'static str,
    /// Position of the redex: 0 = left/body, 1 = right.
    pub path: Vec<u8>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabeledStep {
    pub source: Process,
    pub label: ActionLabel,
    pub result: Distribution<Process>,
    pub cost: u64,
    pub rule: &'static str,
    pub path: Vec<u8>,
}

fn value_of(v: &Value) -> Result<GroundValue, SemError> {
    match v {
        Value::Lit(g) => Ok(g.clone()),
        Value::Var(x) => Err(SemError::OpenTerm(x.clone())),
    }
}

/// `a ↪ 𝒟`, together with the cost of the evaluation.
pub fn eval_term_cost(a: &Term, env: Env<'_>) -> Result<(Distribution<GroundValue>, u64), SemError> {
    match a {
        Term::Val(v) => Ok((Distribution::pure(value_of(v)?), 1)),
        Term::App { symbol, index, args } => {
            let i = index.eval(env.rho)?;
            let vals: Vec<GroundValue> = args.iter().map(value_of).collect::<Result<_, _>>()?;
            let d = env.reg.apply(symbol, i, &vals)?;
            let kinds: Vec<_> = vals.iter().map(crate::funsym::Kind::of_value).collect();
            let cost = env.reg.cost(symbol, &kinds, i)?;
            Ok((d, cost))
        }
    }
}

pub fn eval_term(a: &Term, env: Env<'_>) -> Result<Distribution<GroundValue>, SemError> {
    Ok(eval_term_cost(a, env)?.0)
}

struct Raw {
    label: ActionLabel,
    result: Distribution<Process>,
    cost: u64,
    rule: &'static str,
    path: Vec<u8>,
}

impl Raw {
    fn new(label: ActionLabel, result: Distribution<Process>, rule: &'static str) -> Raw {
        Raw { label, result, cost: 1, rule, path: Vec::new() }
    }

    fn wrap<F: FnMut(&Process) -> Process>(self, dir: u8, f: F) -> Raw {
        let mut path = alloc::vec![dir];
        path.extend(self.path);
        Raw { result: self.result.map(f), path, ..self }
    }
}

/// Rule name, the name a CLOSE restricts, and the fix-up of the receiver.
type Sync = (&'static str, Option<Name>, Box<dyn Fn(&Process) -> Process>);

fn sync(sender: &Raw, receiver: &Raw) -> Option<Sync> {
    use ActionLabel::*;
    match (&sender.label, &receiver.label) {
        (Out(x, w), In(x2, y)) if x == x2 => {
            let (w, y) = (w.clone(), y.clone());
            Some(("COM", None, Box::new(move |r: &Process| r.rename_free(&y, &w))))
        }
        (BoundOut(x, w), In(x2, y)) if x == x2 => {
            let (w2, y) = (w.clone(), y.clone());
            Some(("CLOSE", Some(w.clone()), Box::new(move |r: &Process| r.rename_free(&y, &w2))))
        }
        (OutV(x, v), InV(x2, z)) if x == x2 => {
            let (v, z) = (v.clone(), z.clone());
            Some(("COM_value", None, Box::new(move |r: &Process| r.subst_value(&z, &v))))
        }
        (OutL(x), InL(x2)) | (OutR(x), InR(x2)) if x == x2 => {
            Some(("COM_choice", None, Box::new(|r: &Process| r.clone())))
        }
        _ => None,
    }
}

fn lts(p: &Process, env: Env<'_>) -> Result<Vec<Raw>, SemError> {
    use ActionLabel as L;
    use Process::*;
    let pure = |q: &Process| Distribution::pure(q.clone());
    Ok(match p {
        Nil | Hole => Vec::new(),
        OutCh(x, y, q) => alloc::vec![Raw::new(L::Out(x.clone(), y.clone()), pure(q), "OUT")],
        InCh(x, y, q) => alloc::vec![Raw::new(L::In(x.clone(), y.clone()), pure(q), "IN")],
        RepIn(x, y, q) => alloc::vec![Raw::new(
            L::In(x.clone(), y.clone()),
            Distribution::pure(Process::par((**q).clone(), p.clone())),
            "REP",
        )],
        OutVal(x, v) => match v {
            Value::Lit(g) => alloc::vec![Raw::new(L::OutV(x.clone(), g.clone()), Distribution::pure(Nil), "OUT_value")],
            Value::Var(_) => Vec::new(),
        },
        InVal(x, z, q) => alloc::vec![Raw::new(L::InV(x.clone(), z.clone()), pure(q), "IN_value")],
        SelL(x, q) => alloc::vec![Raw::new(L::OutL(x.clone()), pure(q), "LOUT")],
        SelR(x, q) => alloc::vec![Raw::new(L::OutR(x.clone()), pure(q), "ROUT")],
        Case(x, l, r) => alloc::vec![
            Raw::new(L::InL(x.clone()), pure(l), "LIN"),
            Raw::new(L::InR(x.clone()), pure(r), "RIN"),
        ],
        If(v, l, r) => match v {
            Value::Lit(GroundValue::Bool(true)) => alloc::vec![Raw::new(L::Tau, pure(l), "IF_true")],
            Value::Lit(GroundValue::Bool(false)) => alloc::vec![Raw::new(L::Tau, pure(r), "IF_false")],
            _ => Vec::new(),
        },
        Let(z, a, q) => {
            let (d, cost) = eval_term_cost(a, env)?;
            let result = d.map(|v| q.subst_value(z, v));
            alloc::vec![Raw { label: L::Tau, result, cost, rule: "EVAL_term", path: Vec::new() }]
        }
        Res(y, q) => {
            let mut out = Vec::new();
            for s in lts(q, env)? {
                match &s.label {
                    L::Out(x, w) if w == y && x != y => {
                        let label = L::BoundOut(x.clone(), y.clone());
                        out.push(Raw { label, rule: "OPEN", ..s.wrap(0, |r| r.clone()) });
                    }
                    l if !l.free_names().contains(y) => out.push(s.wrap(0, |r| Process::Res(y.clone(), Box::new(r.clone())))),
                    _ => {}
                }
            }
            out
        }
        Par(a, b) => {
            let (sa, sb) = (lts(a, env)?, lts(b, env)?);
            let mut out = Vec::new();
            for s in &sa {
                for t in &sb {
                    for (left_sends, (snd, rcv)) in [(true, (s, t)), (false, (t, s))] {
                        let Some((rule, scope, fix)) = sync(snd, rcv) else { continue };
                        let result = snd.result.bind(|r1| {
                            rcv.result.map(|r2| {
                                let r2 = fix(r2);
                                let body = if left_sends {
                                    Process::par(r1.clone(), r2)
                                } else {
                                    Process::par(r2, r1.clone())
                                };
                                match &scope {
                                    Some(w) => Process::Res(w.clone(), Box::new(body)),
                                    None => body,
                                }
                            })
                        });
                        out.push(Raw { label: L::Tau, result, cost: 1, rule, path: Vec::new() });
                    }
                }
            }
            let mut par = Vec::new();
            for s in sa {
                par.push(s.wrap(0, |r| Process::par(r.clone(), (**b).clone())));
            }
            for s in sb {
                par.push(s.wrap(1, |r| Process::par((**a).clone(), r.clone())));
            }
            par.extend(out);
            par
        }
    })
}

fn fresh(p: &Process) -> Process {
    let mut avoid: BTreeSet<Name> = p.free_names();
    p.freshen_binders(&mut avoid)
}

/// Every labeled transition of `p`, residuals tidied and canonicalized.
pub fn labeled_steps(p: &Process, env: Env<'_>) -> Result<Vec<LabeledStep>, SemError> {
    let q = fresh(p);
    Ok(lts(&q, env)?
        .into_iter()
        .map(|s| LabeledStep {
            source: p.clone(),
            label: s.label,
            result: s.result.map(|r| r.normal()),
            cost: s.cost,
            rule: s.rule,
            path: s.path,
        })
        .collect())
}

/// All one-step reductions `P → 𝒟` anywhere in `p`.
pub fn enabled_reductions(p: &Process, env: Env<'_>) -> Result<Vec<ReductionStep>, SemError> {
    Ok(labeled_steps(p, env)?
        .into_iter()
        .filter(|s| s.label == ActionLabel::Tau)
        .map(|s| ReductionStep { source: s.source, result: s.result, cost: s.cost, rule: s.rule, path: s.path })
        .collect())
}

#[cfg(test)]
mod tests;
