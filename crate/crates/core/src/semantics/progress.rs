use alloc::vec::Vec;

use super::{enabled_reductions, Env, SemError};
use crate::ast::Process;

/// The three admissible shapes of a typed closed process.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ProgressShape {
    Terminated,
    /// Only replicated servers remain.
    Replicated,
    Reduces,
    /// None of the above: a counterexample.
    Stuck,
}

fn threads(p: &Process, out: &mut Vec<Process>) {
    match p {
        Process::Par(a, b) => {
            threads(a, out);
            threads(b, out);
        }
        Process::Res(_, body) if p.as_bound_out().is_none() => threads(body, out),
        Process::Nil => {}
        _ => out.push(p.clone()),
    }
}

/// Whether `p` still has a non-replicated guarded thread.
pub fn live(p: &Process) -> bool {
    let mut ts = Vec::new();
    threads(p, &mut ts);
    ts.iter().any(|t| !matches!(t, Process::RepIn(..)))
}

pub fn progress(p: &Process, env: Env<'_>) -> Result<ProgressShape, SemError> {
    let q = p.normal();
    if q == Process::Nil {
        return Ok(ProgressShape::Terminated);
    }
    if !live(&q) {
        return Ok(ProgressShape::Replicated);
    }
    if enabled_reductions(&q, env)?.is_empty() {
        Ok(ProgressShape::Stuck)
    } else {
        Ok(ProgressShape::Reduces)
    }
}
