use alloc::boxed::Box;
use alloc::collections::{BTreeSet, VecDeque};
use alloc::vec::Vec;

use super::Process;

/// Upper bound on the number of terms explored per closure.
pub const CLOSURE_CAP: usize = 20_000;

/// Single rewrites at the root by the scope axioms (both directions) and
/// by garbage removal `(νx)(P|0) → P`.
fn root_moves(p: &Process) -> Vec<Process> {
    use Process::*;
    let mut out = Vec::new();
    if let Res(x, body) = p {
        if let Par(pp, rest) = &**body {
            // (νx)(P|0) → P
            if **rest == Nil && !pp.free_names().contains(x) {
                out.push((**pp).clone());
            }
            if let Res(y, inner) = &**rest {
                if let Par(q, r) = &**inner {
                    let fp = pp.free_names();
                    if x != y && !fp.contains(y) {
                        if !r.free_names().contains(x) {
                            // (νy)((νx)(P|Q) | R)
                            out.push(Process::res(
                                y,
                                Process::par(Process::res(x, Process::par((**pp).clone(), (**q).clone())), (**r).clone()),
                            ));
                        }
                        if !q.free_names().contains(x) {
                            // (νy)(Q | (νx)(P|R))
                            out.push(Process::res(
                                y,
                                Process::par((**q).clone(), Process::res(x, Process::par((**pp).clone(), (**r).clone()))),
                            ));
                        }
                    }
                }
            }
        }
    }
    // Reverse of the first axiom: (νy)((νx)(P|Q) | R) → (νx)(P | (νy)(Q|R)).
    if let Res(y, body) = p {
        if let Par(left, r) = &**body {
            if let Res(x, inner) = &**left {
                if let Par(pp, q) = &**inner {
                    if x != y && !r.free_names().contains(x) && !pp.free_names().contains(y) {
                        out.push(Process::res(
                            x,
                            Process::par((**pp).clone(), Process::res(y, Process::par((**q).clone(), (**r).clone()))),
                        ));
                    }
                }
            }
        }
    }
    out
}

/// All single-step rewrites anywhere in `p`, canonicalized.
fn moves(p: &Process) -> Vec<Process> {
    fn go(p: &Process) -> Vec<Process> {
        use Process::*;
        let mut out = root_moves(p);
        let wrap1 = |c: &Process, k: &dyn Fn(Process) -> Process, out: &mut Vec<Process>| {
            for m in go(c) {
                out.push(k(m));
            }
        };
        match p {
            Nil | OutVal(..) | Hole => {}
            Par(a, b) => {
                wrap1(a, &|m| Process::par(m, (**b).clone()), &mut out);
                wrap1(b, &|m| Process::par((**a).clone(), m), &mut out);
            }
            Case(x, a, b) => {
                wrap1(a, &|m| Case(x.clone(), Box::new(m), b.clone()), &mut out);
                wrap1(b, &|m| Case(x.clone(), a.clone(), Box::new(m)), &mut out);
            }
            If(v, a, b) => {
                wrap1(a, &|m| If(v.clone(), Box::new(m), b.clone()), &mut out);
                wrap1(b, &|m| If(v.clone(), a.clone(), Box::new(m)), &mut out);
            }
            Res(y, c) => wrap1(c, &|m| Res(y.clone(), Box::new(m)), &mut out),
            OutCh(x, y, c) => wrap1(c, &|m| OutCh(x.clone(), y.clone(), Box::new(m)), &mut out),
            InCh(x, y, c) => wrap1(c, &|m| InCh(x.clone(), y.clone(), Box::new(m)), &mut out),
            InVal(x, y, c) => wrap1(c, &|m| InVal(x.clone(), y.clone(), Box::new(m)), &mut out),
            RepIn(x, y, c) => wrap1(c, &|m| RepIn(x.clone(), y.clone(), Box::new(m)), &mut out),
            Let(z, t, c) => wrap1(c, &|m| Let(z.clone(), t.clone(), Box::new(m)), &mut out),
            SelL(x, c) => wrap1(c, &|m| SelL(x.clone(), Box::new(m)), &mut out),
            SelR(x, c) => wrap1(c, &|m| SelR(x.clone(), Box::new(m)), &mut out),
        }
        out
    }
    go(p).into_iter().map(|q| q.canonicalize()).collect()
}

/// Canonical forms reachable from `p` by the congruence axioms, capped at
/// [`CLOSURE_CAP`] elements.
pub fn congruence_closure(p: &Process) -> BTreeSet<Process> {
    let start = p.canonicalize();
    let mut seen = BTreeSet::new();
    let mut queue = VecDeque::new();
    seen.insert(start.clone());
    queue.push_back(start);
    while let Some(q) = queue.pop_front() {
        if seen.len() >= CLOSURE_CAP {
            break;
        }
        for m in moves(&q) {
            if seen.insert(m.clone()) {
                queue.push_back(m);
            }
        }
    }
    seen
}

/// Least element of the closure, ordered by size and then structurally.
pub fn normalize_congruence(p: &Process) -> Process {
    congruence_closure(p)
        .into_iter()
        .min_by(|a, b| a.size().cmp(&b.size()).then_with(|| a.cmp(b)))
        .expect("closure contains its seed")
}

/// Decide `P ≡ Q`. Commutativity and associativity of `|` are not axioms
/// here, so `P | Q` and `Q | P` are distinct.
pub fn struct_congruent(p: &Process, q: &Process) -> bool {
    let (cp, cq) = (p.canonicalize(), q.canonicalize());
    if cp == cq {
        return true;
    }
    let a = congruence_closure(&cp);
    if a.contains(&cq) {
        return true;
    }
    let b = congruence_closure(&cq);
    a.iter().any(|x| b.contains(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::Value;

    fn out(x: &str) -> Process {
        Process::out_val(x, Value::bool(true))
    }

    #[test]
    fn garbage_and_commutation() {
        let p = out("a");
        let q = Process::res("x", Process::par(out("a"), Process::Nil));
        assert!(struct_congruent(&p, &q));
        assert!(!struct_congruent(&Process::par(out("a"), out("b")), &Process::par(out("b"), out("a"))));
    }

    #[test]
    fn scope_axiom() {
        // (νx)(P | (νy)(Q | R)) ≡ (νy)((νx)(P | Q) | R)
        let pp = Process::out_val("x", Value::var("a"));
        let q = Process::in_val("x", "z", Process::out_val("y", Value::var("z")));
        let r = Process::in_val("y", "w", out("o"));
        let lhs = Process::res("x", Process::par(pp.clone(), Process::res("y", Process::par(q.clone(), r.clone()))));
        let rhs = Process::res("y", Process::par(Process::res("x", Process::par(pp, q)), r));
        assert!(struct_congruent(&lhs, &rhs));
        assert_eq!(normalize_congruence(&lhs), normalize_congruence(&rhs));
    }
}
