use alloc::boxed::Box;

use super::Process;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ContextError {
    #[error("a linear context needs exactly one hole, found {0}")]
    HoleCount(usize),
    #[error("the hole sits under a replicated input")]
    HoleUnderReplication,
}

/// A process with exactly one hole, not under `!in`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct LinearContext(Process);

impl LinearContext {
    pub fn new(p: Process) -> Result<Self, ContextError> {
        let holes = p.count_holes();
        if holes != 1 {
            return Err(ContextError::HoleCount(holes));
        }
        if hole_under_rep(&p, false) {
            return Err(ContextError::HoleUnderReplication);
        }
        Ok(LinearContext(p))
    }

    /// The identity context `[·]`.
    pub fn identity() -> Self {
        LinearContext(Process::Hole)
    }

    pub fn body(&self) -> &Process {
        &self.0
    }

    /// Replace the hole by `p`. Binders of the context may capture free
    /// names of `p`; that is the point.
    pub fn plug(&self, p: &Process) -> Process {
        fill(&self.0, p)
    }
}

fn hole_under_rep(p: &Process, under: bool) -> bool {
    match p {
        Process::Hole => under,
        Process::RepIn(_, _, c) => hole_under_rep(c, true),
        q => q.children().into_iter().any(|c| hole_under_rep(c, under)),
    }
}

fn fill(c: &Process, p: &Process) -> Process {
    use Process::*;
    let b = |x: &Process| Box::new(fill(x, p));
    match c {
        Hole => p.clone(),
        Nil => Nil,
        OutVal(x, v) => OutVal(x.clone(), v.clone()),
        Par(a, q) => Par(b(a), b(q)),
        Res(y, q) => Res(y.clone(), b(q)),
        OutCh(x, y, q) => OutCh(x.clone(), y.clone(), b(q)),
        InCh(x, y, q) => InCh(x.clone(), y.clone(), b(q)),
        InVal(x, y, q) => InVal(x.clone(), y.clone(), b(q)),
        RepIn(x, y, q) => RepIn(x.clone(), y.clone(), b(q)),
        Let(z, t, q) => Let(z.clone(), t.clone(), b(q)),
        SelL(x, q) => SelL(x.clone(), b(q)),
        SelR(x, q) => SelR(x.clone(), b(q)),
        Case(x, l, r) => Case(x.clone(), b(l), b(r)),
        If(v, l, r) => If(v.clone(), b(l), b(r)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::Value;

    #[test]
    fn hole_rules() {
        assert_eq!(LinearContext::new(Process::Nil), Err(ContextError::HoleCount(0)));
        let rep = Process::RepIn("u".into(), "y".into(), Box::new(Process::Hole));
        assert_eq!(LinearContext::new(rep), Err(ContextError::HoleUnderReplication));
        let c = LinearContext::new(Process::res("x", Process::par(Process::Hole, Process::Nil))).unwrap();
        let p = Process::out_val("x", Value::bool(true));
        assert_eq!(c.plug(&p), Process::res("x", Process::par(p.clone(), Process::Nil)));
    }
}
