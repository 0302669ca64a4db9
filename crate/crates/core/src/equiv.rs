//! Kleene semantics, observations on a boolean channel, and sampled
//! observational-equivalence checks under chosen contexts.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_traits::{Signed, Zero};

use crate::ast::{LinearContext, Name, Process, Value};
use crate::funsym::Registry;
use crate::kernel::{Distribution, GroundValue, ParamSubstitution, Prob};
use crate::semantics::{enabled_reductions, normalize, Env, NormalizeOptions, Scheduler, SemError, DEFAULT_CEILING};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EquivError {
    #[error(transparent)]
    Sem(#[from] SemError),
    #[error("irreducible process `{0}` does not emit a boolean on the observed channel")]
    NonBooleanResidual(String),
}

/// `⟦P⟧`, by memoized recursion on the leftmost silent step.
pub fn kleene_sem(p: &Process, env: Env<'_>) -> Result<Distribution<Process>, SemError> {
    fn go(
        p: &Process,
        env: Env<'_>,
        memo: &mut BTreeMap<Process, Distribution<Process>>,
        budget: &mut u64,
    ) -> Result<Distribution<Process>, SemError> {
        if let Some(d) = memo.get(p) {
            return Ok(d.clone());
        }
        if *budget == 0 {
            return Err(SemError::StepCeilingExceeded { ceiling: DEFAULT_CEILING });
        }
        *budget -= 1;
        let steps = enabled_reductions(p, env)?;
        let d = match steps.first() {
            None => Distribution::pure(p.clone()),
            Some(s) => s.result.try_bind(|r| go(r, env, memo, budget))?,
        };
        memo.insert(p.clone(), d.clone());
        Ok(d)
    }
    let mut budget = DEFAULT_CEILING;
    go(&p.normal(), env, &mut BTreeMap::new(), &mut budget)
}

pub fn kleene_equiv(p: &Process, q: &Process, env: Env<'_>) -> Result<bool, SemError> {
    Ok(kleene_sem(p, env)? == kleene_sem(q, env)?)
}

/// Distribution of the boolean emitted on the observed channel.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObsOutcome {
    pub p_true: Prob,
    pub p_false: Prob,
    /// Mass of runs that end without a boolean on the channel.
    pub residual: Prob,
}

/// The boolean `q` emits on `x`, if `q` is `out x b` next to idle servers.
fn emitted(q: &Process, x: &Name) -> Option<bool> {
    fn threads<'p>(p: &'p Process, out: &mut Vec<&'p Process>) {
        match p {
            Process::Par(a, b) => {
                threads(a, out);
                threads(b, out);
            }
            Process::Res(_, body) => threads(body, out),
            Process::Nil => {}
            _ => out.push(p),
        }
    }
    let mut ts = Vec::new();
    threads(q, &mut ts);
    let mut found = None;
    for t in ts {
        match t {
            Process::OutVal(y, Value::Lit(GroundValue::Bool(b))) if y == x && found.is_none() => found = Some(*b),
            Process::RepIn(y, _, _) if y != x => {}
            _ => return None,
        }
    }
    found
}

/// `Obs(P, ρ, x, ·)`; runs that end elsewhere are reported as residual mass.
pub fn observe(p: &Process, x: &Name, reg: &Registry, rho: &ParamSubstitution) -> Result<ObsOutcome, SemError> {
    observe_with(p, x, reg, rho, Scheduler::Leftmost)
}

pub fn observe_with(
    p: &Process,
    x: &Name,
    reg: &Registry,
    rho: &ParamSubstitution,
    sched: Scheduler,
) -> Result<ObsOutcome, SemError> {
    Ok(tally(p, x, reg, rho, sched)?.0)
}

fn tally(
    p: &Process,
    x: &Name,
    reg: &Registry,
    rho: &ParamSubstitution,
    sched: Scheduler,
) -> Result<(ObsOutcome, Option<Process>), SemError> {
    let report = normalize(p, sched, Env::new(reg, rho), NormalizeOptions::default())?;
    let mut out = ObsOutcome { p_true: Prob::zero(), p_false: Prob::zero(), residual: Prob::zero() };
    let mut bad = None;
    for (q, w) in report.final_dist.iter() {
        match emitted(q, x) {
            Some(true) => out.p_true += w,
            Some(false) => out.p_false += w,
            None => {
                out.residual += w;
                bad.get_or_insert_with(|| q.clone());
            }
        }
    }
    Ok((out, bad))
}

/// As [`observe`], but any residual mass is an error.
pub fn observe_strict(p: &Process, x: &Name, reg: &Registry, rho: &ParamSubstitution) -> Result<ObsOutcome, EquivError> {
    match tally(p, x, reg, rho, Scheduler::Leftmost)? {
        (_, Some(q)) => Err(EquivError::NonBooleanResidual(format!("{q}"))),
        (o, None) => Ok(o),
    }
}

/// `C[P]`, capture-permitting, then alpha-canonicalized.
pub fn plug(c: &LinearContext, p: &Process) -> Process {
    c.plug(p).canonicalize()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObsVerdict {
    pub context: usize,
    pub rho: ParamSubstitution,
    /// `|Pr[Obs(C[P]) = true] − Pr[Obs(C[Q]) = true]|`
    pub gap: Prob,
    pub within: bool,
}

/// Compare `C[P]` and `C[Q]` for every context and grid point. Evidence for
/// `P ≅ Q`, never a proof of it.
pub fn obs_equiv_sampled(
    p: &Process,
    q: &Process,
    contexts: &[LinearContext],
    x: &Name,
    grid: &[ParamSubstitution],
    eps: &Prob,
    reg: &Registry,
) -> Result<Vec<ObsVerdict>, SemError> {
    let mut out = Vec::new();
    for (k, c) in contexts.iter().enumerate() {
        let (cp, cq) = (plug(c, p), plug(c, q));
        for r in grid {
            let a = observe(&cp, x, reg, r)?;
            let b = observe(&cq, x, reg, r)?;
            let gap = (&a.p_true - &b.p_true).abs();
            out.push(ObsVerdict { context: k, rho: r.clone(), within: gap <= *eps, gap });
        }
    }
    Ok(out)
}
