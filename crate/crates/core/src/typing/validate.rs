//! Independent re-check of a derivation tree, node by node.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::types::{LinearEnv, SessionType, UnrestrictedEnv};
use super::{node_weight, Rule, TypingDerivation};
use crate::ast::{Name, Process, Term, Value};
use crate::funsym::{Kind, Registry, INDEX_VAR};
use crate::kernel::{poly_leq, GroundType, GroundValue, Polynomial};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid {rule} node at `{process}`: {reason}")]
pub struct InvalidDerivation {
    pub rule: Rule,
    pub process: String,
    pub reason: String,
}

type V = Result<(), InvalidDerivation>;

struct Ctx<'a> {
    reg: &'a Registry,
    d: &'a TypingDerivation,
}

impl Ctx<'_> {
    fn fail(&self, reason: impl Into<String>) -> V {
        Err(InvalidDerivation { rule: self.d.rule, process: format!("{}", self.d.process), reason: reason.into() })
    }

    fn ensure(&self, ok: bool, reason: &str) -> V {
        if ok {
            Ok(())
        } else {
            self.fail(reason)
        }
    }

    fn arity(&self, n: usize) -> V {
        self.ensure(self.d.premises.len() == n, "wrong number of premises")
    }

    fn prem(&self, i: usize) -> &TypingDerivation {
        &self.d.premises[i]
    }
}

/// Usage a node should report given its premises.
fn expected_usage(d: &TypingDerivation) -> Option<UnrestrictedEnv> {
    let ps = &d.premises;
    let sum = |a: &UnrestrictedEnv, b: &UnrestrictedEnv| super::env_sum(a, b).ok();
    match d.rule {
        Rule::OneR | Rule::BoolR | Rule::StrR => Some(UnrestrictedEnv::new()),
        Rule::Hole => Some(d.gamma.clone()),
        Rule::Cut | Rule::TensorR | Rule::LolliL => sum(&ps[0].gamma, &ps[1].gamma),
        Rule::If | Rule::WithR | Rule::PlusL => {
            let mut out = ps[0].gamma.clone();
            for (u, (p, a)) in &ps[1].gamma {
                match out.get_mut(u) {
                    Some((q, _)) => {
                        if poly_leq(q, p).holds() {
                            *q = p.clone();
                        } else if !poly_leq(p, q).holds() {
                            *q = &*q + p;
                        }
                    }
                    None => {
                        out.insert(u.clone(), (p.clone(), a.clone()));
                    }
                }
            }
            Some(out)
        }
        Rule::Copy => {
            let (x, _, _) = d.process.as_bound_out()?;
            let a = ps[0].delta.get(&bound_of(&d.process)?)?.clone();
            let one = [(x.clone(), (Polynomial::one(), a))].into_iter().collect();
            sum(&one, &ps[0].gamma)
        }
        Rule::BangL => {
            let mut g = ps[0].gamma.clone();
            let x = d.delta.keys().find(|x| !ps[0].delta.contains_key(*x))?;
            g.remove(x);
            Some(g)
        }
        Rule::BangR => Some(super::env_scale(d.multiplicity.as_ref()?, &ps[0].gamma)),
        Rule::CutBang => {
            let u = match &d.process {
                Process::Res(u, _) => u,
                _ => return None,
            };
            let mut rest = ps[1].gamma.clone();
            rest.remove(u);
            sum(&super::env_scale(d.multiplicity.as_ref()?, &ps[0].gamma), &rest)
        }
        _ => Some(ps[0].gamma.clone()),
    }
}

fn bound_of(p: &Process) -> Option<Name> {
    p.as_bound_out().map(|(_, y, _)| y.clone())
}

fn flatten(p: &Process, names: &mut BTreeSet<Name>, threads: &mut Vec<Process>) {
    match p {
        Process::Par(a, b) => {
            flatten(a, names, threads);
            flatten(b, names, threads);
        }
        Process::Res(y, body) if p.as_bound_out().is_none() => {
            names.insert(y.clone());
            flatten(body, names, threads);
        }
        Process::Nil => {}
        _ => threads.push(p.clone()),
    }
}

/// Same threads under the same restrictions, in any arrangement.
fn same_soup(p: &Process, q: &Process) -> bool {
    let (mut n1, mut t1, mut n2, mut t2) = (BTreeSet::new(), Vec::new(), BTreeSet::new(), Vec::new());
    flatten(p, &mut n1, &mut t1);
    flatten(q, &mut n2, &mut t2);
    t1.sort();
    t2.sort();
    n1 == n2 && t1 == t2
}

fn minus(d: &LinearEnv, x: &str) -> LinearEnv {
    let mut out = d.clone();
    out.remove(x);
    out
}

fn with(d: &LinearEnv, x: &str, a: &SessionType) -> LinearEnv {
    let mut out = d.clone();
    out.insert(x.into(), a.clone());
    out
}

/// Premise Δ after receiving `y : a`; a banged `a` lives under a `T!L` wrapper.
fn receives(prem: &TypingDerivation, base: &LinearEnv, y: &str, a: &SessionType) -> bool {
    prem.delta == with(base, y, a)
}

fn disjoint_union(a: &LinearEnv, b: &LinearEnv) -> Option<LinearEnv> {
    let mut out = a.clone();
    for (k, v) in b {
        if out.insert(k.clone(), v.clone()).is_some() {
            return None;
        }
    }
    Some(out)
}

fn value_ground(theta: &super::TermEnv, v: &Value) -> Option<Option<GroundType>> {
    match v {
        Value::Var(x) => theta.get(x).cloned().map(Some),
        Value::Lit(GroundValue::Bool(_)) => Some(Some(GroundType::Bool)),
        Value::Lit(GroundValue::Bits(_)) => Some(None),
    }
}

fn fits(v: &Value, theta: &super::TermEnv, want: &GroundType) -> bool {
    match (v, want) {
        (Value::Lit(GroundValue::Bits(s)), GroundType::Str(p)) => {
            poly_leq(&Polynomial::constant(s.len() as u64), p).holds()
        }
        _ => value_ground(theta, v) == Some(Some(want.clone())),
    }
}

fn check_node(reg: &Registry, d: &TypingDerivation, root: bool) -> V {
    use Process as P;
    use SessionType as S;
    let cx = Ctx { reg, d };
    let (z, c) = (&d.offered.0, &d.offered.1);
    let ws: Vec<Polynomial> = d.premises.iter().map(|p| p.weight.clone()).collect();
    let weight_ok = match d.rule {
        Rule::CutBang => ws.len() == 2,
        Rule::BangR => ws.len() == 1,
        _ => true,
    };
    cx.ensure(weight_ok, "wrong number of premises")?;
    cx.ensure(
        node_weight(d.rule, &ws, d.multiplicity.as_ref(), d.cost.as_ref()) == d.weight,
        "weight does not match its premises",
    )?;
    for p in &d.premises {
        cx.ensure(p.theta.iter().all(|(k, v)| d.theta.get(k).is_none_or(|w| w == v) || k == z), "Θ changed")?;
    }
    match d.rule {
        Rule::OneR => {
            cx.arity(0)?;
            cx.ensure(d.process == P::Nil && *c == S::One && d.delta.is_empty(), "expects 0 offering 1 with Δ empty")
        }
        Rule::OneL => {
            cx.arity(1)?;
            let p = cx.prem(0);
            let dropped: Vec<&Name> = d.delta.keys().filter(|x| !p.delta.contains_key(*x)).collect();
            cx.ensure(
                dropped.len() == 1 && d.delta[dropped[0]] == S::One && p.delta.len() + 1 == d.delta.len(),
                "must drop exactly one channel of type 1",
            )?;
            cx.ensure(p.offered == d.offered && p.process == d.process, "premise must keep the process")
        }
        Rule::BoolR | Rule::StrR => {
            cx.arity(0)?;
            cx.ensure(d.delta.is_empty(), "Δ must be empty")?;
            match (&d.process, c.as_ground()) {
                (P::OutVal(x, v), Some(g)) if x == z => {
                    let kind_ok = matches!((d.rule, &g), (Rule::BoolR, GroundType::Bool) | (Rule::StrR, GroundType::Str(_)));
                    cx.ensure(kind_ok && fits(v, &d.theta, &g), "value does not have the offered type")
                }
                _ => cx.fail("expects an output on the offered channel"),
            }
        }
        Rule::BoolL | Rule::StrL => {
            cx.arity(1)?;
            let p = cx.prem(0);
            match &d.process {
                P::InVal(x, y, q) => {
                    let a = d.delta.get(x).and_then(|a| a.as_ground());
                    let Some(g) = a else { return cx.fail("input channel must carry a ground type") };
                    cx.ensure(p.process == **q && p.delta == minus(&d.delta, x), "premise Δ")?;
                    cx.ensure(p.theta.get(y) == Some(&g) && p.offered == d.offered, "premise must bind the value")
                }
                _ => cx.fail("expects a value input"),
            }
        }
        Rule::Let => {
            cx.arity(1)?;
            let p = cx.prem(0);
            let P::Let(y, a, q) = &d.process else { return cx.fail("expects a let") };
            cx.ensure(p.process == **q && p.delta == d.delta && p.offered == d.offered, "premise shape")?;
            let Some(bound) = p.theta.get(y) else { return cx.fail("premise must bind the result") };
            match a {
                Term::Val(v) => {
                    cx.ensure(fits(v, &d.theta, bound) && d.cost.is_none(), "value does not have the bound type")
                }
                Term::App { symbol, index, args } => {
                    let kinds: Vec<Kind> = args
                        .iter()
                        .map(|v| match value_ground(&d.theta, v) {
                            Some(Some(GroundType::Bool)) => Kind::Bool,
                            _ => Kind::Str,
                        })
                        .collect();
                    let Ok(sym) = cx.reg.resolve(symbol, &kinds) else { return cx.fail("unknown function symbol") };
                    let inst = |g: &GroundType| match g {
                        GroundType::Bool => GroundType::Bool,
                        GroundType::Str(p) => GroundType::Str(p.substitute(INDEX_VAR, index)),
                    };
                    cx.ensure(sym.args.len() == args.len(), "arity")?;
                    for (v, g) in args.iter().zip(&sym.args) {
                        cx.ensure(fits(v, &d.theta, &inst(g)), "argument type")?;
                    }
                    cx.ensure(*bound == inst(&sym.result), "result type")?;
                    cx.ensure(d.cost == Some(sym.cost.substitute(INDEX_VAR, index)), "cost annotation")
                }
            }
        }
        Rule::If => {
            cx.arity(2)?;
            let P::If(v, l, r) = &d.process else { return cx.fail("expects a conditional") };
            cx.ensure(fits(v, &d.theta, &GroundType::Bool), "guard must be Bool")?;
            for (p, q) in d.premises.iter().zip([l, r]) {
                cx.ensure(p.process == **q && p.delta == d.delta && p.offered == d.offered, "branch shape")?;
            }
            Ok(())
        }
        Rule::PlusR1 | Rule::PlusR2 | Rule::WithL1 | Rule::WithL2 => {
            cx.arity(1)?;
            let p = cx.prem(0);
            let (x, q, left) = match &d.process {
                P::SelL(x, q) => (x, q, true),
                P::SelR(x, q) => (x, q, false),
                _ => return cx.fail("expects a selection"),
            };
            cx.ensure(p.process == **q, "premise process")?;
            let pick = |a: &SessionType, b: &SessionType| if left { a.clone() } else { b.clone() };
            let want_left = matches!(d.rule, Rule::PlusR1 | Rule::WithL1);
            cx.ensure(want_left == left, "label")?;
            if matches!(d.rule, Rule::PlusR1 | Rule::PlusR2) {
                let S::Plus(a, b) = c else { return cx.fail("offered type must be +") };
                cx.ensure(x == z && p.offered == (z.clone(), pick(a, b)) && p.delta == d.delta, "premise shape")
            } else {
                let Some(S::With(a, b)) = d.delta.get(x) else { return cx.fail("channel must have type &") };
                cx.ensure(p.offered == d.offered && p.delta == with(&d.delta, x, &pick(a, b)), "premise shape")
            }
        }
        Rule::WithR | Rule::PlusL => {
            cx.arity(2)?;
            let P::Case(x, l, r) = &d.process else { return cx.fail("expects a case") };
            let (p0, p1) = (cx.prem(0), cx.prem(1));
            cx.ensure(p0.process == **l && p1.process == **r, "branch processes")?;
            if d.rule == Rule::WithR {
                let S::With(a, b) = c else { return cx.fail("offered type must be &") };
                cx.ensure(x == z, "case must be on the offered channel")?;
                cx.ensure(p0.offered == (z.clone(), (**a).clone()) && p1.offered == (z.clone(), (**b).clone()), "branches")?;
                cx.ensure(p0.delta == d.delta && p1.delta == d.delta, "Δ")
            } else {
                let Some(S::Plus(a, b)) = d.delta.get(x) else { return cx.fail("channel must have type +") };
                cx.ensure(p0.offered == d.offered && p1.offered == d.offered, "offered")?;
                cx.ensure(p0.delta == with(&d.delta, x, a) && p1.delta == with(&d.delta, x, b), "Δ")
            }
        }
        Rule::LolliR => {
            cx.arity(1)?;
            let p = cx.prem(0);
            let P::InCh(x, y, q) = &d.process else { return cx.fail("expects a channel input") };
            let S::Lolli(a, b) = c else { return cx.fail("offered type must be -o") };
            cx.ensure(x == z && p.process == **q && p.offered == (z.clone(), (**b).clone()), "premise shape")?;
            cx.ensure(receives(p, &d.delta, y, a), "premise Δ")
        }
        Rule::TensorL => {
            cx.arity(1)?;
            let p = cx.prem(0);
            let P::InCh(x, y, q) = &d.process else { return cx.fail("expects a channel input") };
            let Some(S::Tensor(a, b)) = d.delta.get(x) else { return cx.fail("channel must have type *") };
            cx.ensure(p.process == **q && p.offered == d.offered, "premise shape")?;
            cx.ensure(receives(p, &with(&d.delta, x, b), y, a), "premise Δ")
        }
        Rule::TensorR | Rule::LolliL => {
            cx.arity(2)?;
            let Some((x, y, cont)) = d.process.as_bound_out() else { return cx.fail("expects a bound output") };
            let P::Par(l, r) = cont else { return cx.fail("continuation must be a composition") };
            let (p0, p1) = (cx.prem(0), cx.prem(1));
            let split_ok = (p0.process == **l && p1.process == **r) || (p0.process == **r && p1.process == **l);
            cx.ensure(split_ok, "premises must type the two components")?;
            if d.rule == Rule::TensorR {
                let S::Tensor(a, b) = c else { return cx.fail("offered type must be *") };
                cx.ensure(x == z, "output must be on the offered channel")?;
                cx.ensure(p0.offered == (y.clone(), (**a).clone()) && p1.offered == (z.clone(), (**b).clone()), "offers")?;
                cx.ensure(disjoint_union(&p0.delta, &p1.delta).as_ref() == Some(&d.delta), "Δ must split")
            } else {
                let Some(S::Lolli(a, b)) = d.delta.get(x) else { return cx.fail("channel must have type -o") };
                cx.ensure(p0.offered == (y.clone(), (**a).clone()) && p1.offered == d.offered, "offers")?;
                cx.ensure(p1.delta.get(x) == Some(b), "continuation must use the result type")?;
                let merged = disjoint_union(&p0.delta, &minus(&p1.delta, x));
                cx.ensure(merged.as_ref() == Some(&minus(&d.delta, x)), "Δ must split")
            }
        }
        Rule::Copy => {
            cx.arity(1)?;
            let p = cx.prem(0);
            let Some((u, y, cont)) = d.process.as_bound_out() else { return cx.fail("expects a bound output") };
            cx.ensure(!d.delta.contains_key(u) && p.process == *cont && p.offered == d.offered, "premise shape")?;
            let a = p.delta.get(y).cloned();
            cx.ensure(a.is_some() && p.delta == with(&d.delta, y, &a.unwrap_or(S::One)), "premise Δ")?;
            cx.ensure(p.gamma.get(u).is_none_or(|e| Some(&e.1) == p.delta.get(y)), "copied type")
        }
        Rule::BangL => {
            cx.arity(1)?;
            let p = cx.prem(0);
            let moved: Vec<&Name> = d.delta.keys().filter(|x| !p.delta.contains_key(*x)).collect();
            let [x] = moved.as_slice() else { return cx.fail("must move exactly one channel") };
            let Some(S::Bang(q, a)) = d.delta.get(*x) else { return cx.fail("moved channel must be banged") };
            cx.ensure(d.multiplicity.as_ref() == Some(q), "multiplicity")?;
            cx.ensure(p.process == d.process && p.offered == d.offered && p.delta == minus(&d.delta, x), "premise")?;
            match p.gamma.get(*x) {
                Some((used, b)) => {
                    cx.ensure(b == &**a, "type of the moved channel")?;
                    cx.ensure(poly_leq(used, q).holds(), "usage exceeds the multiplicity")
                }
                None => Ok(()),
            }
        }
        Rule::BangR => {
            let p = cx.prem(0);
            let P::RepIn(x, y, q) = &d.process else { return cx.fail("expects a replicated input") };
            let S::Bang(m, a) = c else { return cx.fail("offered type must be !") };
            cx.ensure(x == z && d.delta.is_empty() && p.delta.is_empty(), "no linear resources")?;
            cx.ensure(d.multiplicity.as_ref() == Some(m), "multiplicity")?;
            cx.ensure(p.process == **q && p.offered == (y.clone(), (**a).clone()), "premise shape")
        }
        Rule::Cut => {
            cx.arity(2)?;
            let P::Res(x, body) = &d.process else { return cx.fail("expects a restriction") };
            let P::Par(l, r) = &**body else { return cx.fail("expects a composition") };
            let (p0, p1) = (cx.prem(0), cx.prem(1));
            cx.ensure(p0.process == **l && p1.process == **r, "premise processes")?;
            cx.ensure(p0.offered.0 == *x && p1.delta.get(x) == Some(&p0.offered.1), "cut types")?;
            cx.ensure(p1.offered == d.offered, "offered")?;
            let merged = disjoint_union(&p0.delta, &minus(&p1.delta, x));
            cx.ensure(merged.as_ref() == Some(&d.delta), "Δ must split")
        }
        Rule::CutBang => {
            let P::Res(u, body) = &d.process else { return cx.fail("expects a restriction") };
            let P::Par(l, r) = &**body else { return cx.fail("expects a composition") };
            let P::RepIn(u2, y, server) = &**l else { return cx.fail("left component must be a server") };
            let (p0, p1) = (cx.prem(0), cx.prem(1));
            cx.ensure(u == u2 && p0.process == **server && p1.process == **r, "premise processes")?;
            cx.ensure(p0.offered.0 == *y && p0.delta.is_empty(), "server premise")?;
            cx.ensure(p1.offered == d.offered && p1.delta == d.delta, "client premise")?;
            let used = p1.gamma.get(u).map(|e| e.0.clone()).unwrap_or_default();
            cx.ensure(d.multiplicity.as_ref() == Some(&used), "multiplicity must be the client's usage")?;
            cx.ensure(p1.gamma.get(u).is_none_or(|e| e.1 == p0.offered.1), "server type")
        }
        Rule::Struct => {
            cx.arity(1)?;
            let p = cx.prem(0);
            cx.ensure(p.offered == d.offered && p.delta == d.delta, "premise judgment")?;
            cx.ensure(same_soup(&p.process, &d.process), "premise is not a rearrangement")
        }
        Rule::Hole => {
            cx.arity(0)?;
            cx.ensure(d.process == P::Hole, "expects a hole")
        }
    }
    .and_then(|_| {
        let Some(want) = expected_usage(d) else { return cx.fail("malformed usage") };
        if root {
            let ok = want.iter().all(|(u, (p, a))| {
                d.gamma.get(u).is_some_and(|(q, b)| a == b && poly_leq(p, q).holds())
            });
            cx.ensure(ok, "usage exceeds the declared budget")
        } else {
            cx.ensure(want == d.gamma, "usage does not match its premises")
        }
    })
}

fn walk(reg: &Registry, d: &TypingDerivation, root: bool) -> V {
    check_node(reg, d, root)?;
    for p in &d.premises {
        walk(reg, p, false)?;
    }
    Ok(())
}

/// Re-check every node of `d` against the rule it names.
pub fn validate_derivation(d: &TypingDerivation, reg: &Registry) -> Result<(), InvalidDerivation> {
    walk(reg, d, true)
}
