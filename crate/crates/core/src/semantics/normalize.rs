use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::vec::Vec;

use num_traits::{One, Zero};
use rand::rngs::SmallRng;
use rand::{Rng, SeedableRng};

use super::{enabled_reductions, labeled_steps, Env, LabeledStep, ReductionStep, SemError};
use crate::ast::{ActionLabel, Process};
use crate::kernel::{Distribution, Prob};

/// Cumulative cost allowed when no bound is supplied.
pub const DEFAULT_CEILING: u64 = 1_000_000;

/// Picks one of the enabled reductions of a process.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheduler {
    Leftmost,
    Rightmost,
    Seeded(u64),
}

impl Scheduler {
    pub fn name(&self) -> alloc::string::String {
        match self {
            Scheduler::Leftmost => "leftmost".into(),
            Scheduler::Rightmost => "rightmost".into(),
            Scheduler::Seeded(s) => format!("seeded:{s}"),
        }
    }

    fn rng(&self) -> SmallRng {
        SmallRng::seed_from_u64(match self {
            Scheduler::Seeded(s) => *s,
            _ => 0,
        })
    }

    fn choose(&self, n: usize, rng: &mut SmallRng) -> usize {
        match self {
            Scheduler::Leftmost => 0,
            Scheduler::Rightmost => n - 1,
            Scheduler::Seeded(_) => rng.gen_range(0..n),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NormalizeOptions {
    /// `W(π)(ρ)` of a derivation for the process, if one is known.
    pub bound: Option<u64>,
    pub ceiling: u64,
}

impl Default for NormalizeOptions {
    fn default() -> Self {
        NormalizeOptions { bound: None, ceiling: DEFAULT_CEILING }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvalReport {
    pub final_dist: Distribution<Process>,
    /// Longest path, in steps.
    pub total_steps: u64,
    /// Most expensive path.
    pub total_cost: u64,
    pub bound: Option<u64>,
}

/// `P ⇛ 𝒟`: reduce every support element with `sched` until irreducible.
pub fn normalize(p: &Process, sched: Scheduler, env: Env<'_>, opts: NormalizeOptions) -> Result<EvalReport, SemError> {
    normalize_traced(p, sched, env, opts, |_, _| {})
}

/// As [`normalize`], calling `trace` on each step taken.
pub fn normalize_traced<F: FnMut(&ReductionStep, &Prob)>(
    p: &Process,
    sched: Scheduler,
    env: Env<'_>,
    opts: NormalizeOptions,
    mut trace: F,
) -> Result<EvalReport, SemError> {
    let mut rng = sched.rng();
    let mut frontier: BTreeMap<Process, (Prob, u64, u64)> = BTreeMap::new();
    frontier.insert(p.normal(), (Prob::one(), 0, 0));
    let mut finals: Vec<(Process, Prob)> = Vec::new();
    let (mut max_steps, mut max_cost) = (0u64, 0u64);
    while let Some((q, (w, steps, cost))) = frontier.pop_first() {
        let enabled = enabled_reductions(&q, env)?;
        if enabled.is_empty() {
            max_steps = max_steps.max(steps);
            max_cost = max_cost.max(cost);
            finals.push((q, w));
            continue;
        }
        let st = &enabled[sched.choose(enabled.len(), &mut rng)];
        trace(st, &w);
        let c2 = cost.saturating_add(st.cost);
        if let Some(bound) = opts.bound {
            if c2 > bound {
                return Err(SemError::BoundViolated { cost: c2, bound });
            }
        }
        if c2 > opts.ceiling || steps >= opts.ceiling {
            return Err(SemError::StepCeilingExceeded { ceiling: opts.ceiling });
        }
        for (r, pr) in st.result.iter() {
            let e = frontier.entry(r.clone()).or_insert((Prob::zero(), 0, 0));
            e.0 += &w * pr;
            e.1 = e.1.max(steps + 1);
            e.2 = e.2.max(c2);
        }
    }
    Ok(EvalReport {
        final_dist: Distribution::from_weights(finals)?,
        total_steps: max_steps,
        total_cost: max_cost,
        bound: opts.bound,
    })
}

/// Steps of `p` performing `label`, binders renamed to the label's.
pub(super) fn steps_with(p: &Process, label: &ActionLabel, env: Env<'_>) -> Result<Vec<LabeledStep>, SemError> {
    let mut out = Vec::new();
    for mut s in labeled_steps(p, env)? {
        if !s.label.same_action(label) {
            continue;
        }
        if let (Some(have), Some(want)) = (s.label.binder(), label.binder()) {
            if have != want {
                let (have, want) = (have.clone(), want.clone());
                s.result = s.result.map(|r| r.rename_free(&have, &want).normal());
                s.label = label.clone();
            }
        }
        out.push(s);
    }
    Ok(out)
}

/// `𝒟 ⇒α Σ rᵢ·ℰᵢ`, taking the first matching transition of each element.
pub fn lift_step(d: &Distribution<Process>, label: &ActionLabel, env: Env<'_>) -> Result<Distribution<Process>, SemError> {
    let mut parts = Vec::new();
    for (p, r) in d.iter() {
        let steps = steps_with(p, label, env)?;
        let s = steps
            .into_iter()
            .next()
            .ok_or_else(|| SemError::LabelNotUniformlyEnabled(format!("{label}")))?;
        parts.push((r.clone(), s.result));
    }
    Ok(Distribution::sum(parts)?)
}

/// Every lifting of `label` over `d`, one transition chosen per element;
/// at most `cap` combinations are produced.
pub(super) fn all_lifts(
    d: &Distribution<Process>,
    label: &ActionLabel,
    env: Env<'_>,
    cap: usize,
) -> Result<BTreeSet<Distribution<Process>>, SemError> {
    let mut partial: Vec<Vec<(Prob, Distribution<Process>)>> = alloc::vec![Vec::new()];
    for (p, r) in d.iter() {
        let mut options: Vec<Distribution<Process>> = steps_with(p, label, env)?.into_iter().map(|s| s.result).collect();
        options.sort();
        options.dedup();
        if options.is_empty() {
            return Ok(BTreeSet::new());
        }
        let mut next = Vec::new();
        'outer: for base in &partial {
            for o in &options {
                if next.len() >= cap {
                    break 'outer;
                }
                let mut v = base.clone();
                v.push((r.clone(), o.clone()));
                next.push(v);
            }
        }
        partial = next;
    }
    let mut out = BTreeSet::new();
    for parts in partial {
        out.insert(Distribution::sum(parts)?);
    }
    Ok(out)
}

/// A reduction tree rooted at a process: each node records the transition
/// taken and the subtrees for its outcomes.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum ReductionTree {
    Leaf(Process),
    Node(Process, ActionLabel, Distribution<ReductionTree>),
}

impl ReductionTree {
    pub fn root(&self) -> &Process {
        match self {
            ReductionTree::Leaf(p) | ReductionTree::Node(p, _, _) => p,
        }
    }

    /// Distribution over the leaves.
    pub fn leaves(&self) -> Distribution<Process> {
        match self {
            ReductionTree::Leaf(p) => Distribution::pure(p.clone()),
            ReductionTree::Node(_, _, d) => d.bind(|t| t.leaves()),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            ReductionTree::Leaf(_) => 0,
            ReductionTree::Node(_, _, d) => 1 + d.support().map(|t| t.depth()).max().unwrap_or(0),
        }
    }
}

/// The silent, normal tree `sched` induces, cut off at `max_depth`.
pub fn build_tree(p: &Process, sched: Scheduler, env: Env<'_>, max_depth: usize) -> Result<ReductionTree, SemError> {
    let mut rng = sched.rng();
    fn go(p: &Process, sched: Scheduler, env: Env<'_>, depth: usize, rng: &mut SmallRng) -> Result<ReductionTree, SemError> {
        let enabled = enabled_reductions(p, env)?;
        if enabled.is_empty() || depth == 0 {
            return Ok(ReductionTree::Leaf(p.clone()));
        }
        let st = &enabled[sched.choose(enabled.len(), rng)];
        let kids = st.result.try_bind(|r| go(r, sched, env, depth - 1, rng).map(Distribution::pure))?;
        Ok(ReductionTree::Node(p.clone(), ActionLabel::Tau, kids))
    }
    go(&p.normal(), sched, env, max_depth, &mut rng)
}
