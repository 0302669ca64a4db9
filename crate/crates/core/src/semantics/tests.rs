use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::string::ToString;
use alloc::vec::Vec;

use proptest::prelude::*;

use super::*;
use crate::funsym::builtin_registry;
use crate::kernel::{prob, rho, BitString};
use crate::parser::parse_process;

fn pp(s: &str) -> Process {
    parse_process(s).unwrap()
}

fn with_env<T>(i: u64, f: impl FnOnce(Env<'_>) -> T) -> T {
    let reg = builtin_registry();
    let r = rho("n", i);
    f(Env::new(&reg, &r))
}

// ---- an independent reduction oracle over flattened compositions ----

type Soup = (BTreeSet<Name>, Vec<Process>);

fn flatten(p: &Process, s: &mut Soup) {
    match p {
        Process::Par(a, b) => {
            flatten(a, s);
            flatten(b, s);
        }
        Process::Res(y, body) if p.as_bound_out().is_none() => {
            s.0.insert(y.clone());
            flatten(body, s);
        }
        Process::Nil => {}
        _ => s.1.push(p.clone()),
    }
}

fn soup(p: &Process) -> Soup {
    let mut avoid = p.free_names();
    let q = p.freshen_binders(&mut avoid);
    let mut s = (BTreeSet::new(), Vec::new());
    flatten(&q, &mut s);
    s
}

/// Canonical key: cut names renamed by first use after sorting threads on
/// a name-blind shape.
fn key(p: &Process) -> Vec<Process> {
    let (names, threads) = soup(p);
    let blind = |t: &Process| {
        let mut t = t.clone();
        for x in &names {
            t = t.rename_free(x, "#");
        }
        t.canonicalize()
    };
    let mut ts: Vec<(Process, Process)> = threads.iter().map(|t| (blind(t), t.clone())).collect();
    ts.sort();
    let mut order: Vec<Name> = Vec::new();
    for (_, t) in &ts {
        let mut fns: Vec<Name> = t.free_names().into_iter().filter(|x| names.contains(x)).collect();
        fns.sort();
        for x in fns {
            if !order.contains(&x) {
                order.push(x);
            }
        }
    }
    let mut out: Vec<Process> = ts
        .into_iter()
        .map(|(_, mut t)| {
            for (k, x) in order.iter().enumerate() {
                t = t.rename_free(x, &alloc::format!("cut{k}"));
            }
            t.canonicalize()
        })
        .collect();
    out.sort();
    out
}

fn rebuild(names: &BTreeSet<Name>, threads: &[Process]) -> Process {
    let body = threads.iter().cloned().fold(Process::Nil, Process::par);
    names.iter().rev().fold(body, |acc, y| Process::res(y, acc))
}

fn oracle(p: &Process, env: Env<'_>) -> BTreeSet<Distribution<Vec<Process>>> {
    use Process::*;
    let (names, threads) = soup(p);
    let mut out = BTreeSet::new();
    let replace = |edits: &[(usize, Option<Process>)], extra: Option<&Name>| {
        let mut ts = threads.clone();
        for (i, t) in edits.iter().rev() {
            match t {
                Some(t) => ts[*i] = t.clone(),
                None => {
                    ts.remove(*i);
                }
            }
        }
        let mut ns = names.clone();
        ns.extend(extra.cloned());
        key(&rebuild(&ns, &ts))
    };
    for (i, t) in threads.iter().enumerate() {
        match t {
            Let(z, a, q) => {
                let d = eval_term(a, env).unwrap();
                out.insert(d.map(|v| replace(&[(i, Some(q.subst_value(z, v)))], None)));
            }
            If(Value::Lit(crate::kernel::GroundValue::Bool(b)), l, r) => {
                let q = if *b { l } else { r };
                out.insert(Distribution::pure(replace(&[(i, Some((**q).clone()))], None)));
            }
            _ => {}
        }
    }
    for (i, s) in threads.iter().enumerate() {
        for (j, r) in threads.iter().enumerate() {
            if i == j {
                continue;
            }
            let edit = |si: Option<Process>, rj: Option<Process>| {
                let mut e = [(i, si), (j, rj)];
                e.sort_by_key(|x| x.0);
                e
            };
            let recv = |x: &Name, w: &Name| -> Option<Process> {
                match r {
                    InCh(x2, y, q) if x2 == x => Some(q.rename_free(y, w)),
                    RepIn(x2, y, q) if x2 == x => Some(Process::par(q.rename_free(y, w), r.clone())),
                    _ => None,
                }
            };
            let result = match s {
                OutCh(x, w, p) => recv(x, w).map(|q| replace(&edit(Some((**p).clone()), Some(q)), None)),
                Res(..) => {
                    let (x, w, p) = s.as_bound_out().unwrap();
                    recv(x, w).map(|q| replace(&edit(Some(p.clone()), Some(q)), Some(w)))
                }
                OutVal(x, Value::Lit(v)) => match r {
                    InVal(x2, z, q) if x2 == x => Some(replace(&edit(Some(Nil), Some(q.subst_value(z, v))), None)),
                    _ => None,
                },
                SelL(x, p) | SelR(x, p) => match r {
                    Case(x2, l, rr) if x2 == x => {
                        let q = if matches!(s, SelL(..)) { l } else { rr };
                        Some(replace(&edit(Some((**p).clone()), Some((**q).clone())), None))
                    }
                    _ => None,
                },
                _ => None,
            };
            if let Some(k) = result {
                out.insert(Distribution::pure(k));
            }
        }
    }
    out
}

fn agree(p: &Process, env: Env<'_>) {
    let got: BTreeSet<Distribution<Vec<Process>>> =
        enabled_reductions(p, env).unwrap().iter().map(|s| s.result.map(key)).collect();
    let want = oracle(p, env);
    assert_eq!(got, want, "tau steps of {p}");
}

#[test]
fn tau_agreement_on_examples() {
    let corpus = [
        "0",
        "new x. (out x true | in x (v). out o v)",
        "new x. (in x (v). out o v | out x true)",
        "send x (new y). out y #01 | recv x (z). in z (v). out o v",
        "new u. (!in u (y). out y true | send u (new a). in a (v). out o v)",
        "new c. (c.inl. 0 | case c of inl => out o true / inr => out o false)",
        "let b = flipcoin() in out o b | if true then out p false else 0",
        "new x. new y. (out x true | out y false | in x (a). in y (b). out o a)",
        "send a b. 0 | recv a (z). send z w. 0",
    ];
    with_env(2, |env| {
        for src in corpus {
            agree(&pp(src), env);
        }
    });
}

#[test]
fn examples_from_the_rules() {
    with_env(2, |env| {
        assert!(enabled_reductions(&Process::Nil, env).unwrap().is_empty());
        let s = enabled_reductions(&pp("if true then out o true else out o false"), env).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].result, Distribution::pure(pp("out o true")));

        let s = enabled_reductions(&pp("let b = flipcoin() in out exp b"), env).unwrap();
        assert_eq!(s[0].result.prob(&pp("out exp true")), prob(1, 2));
        assert_eq!(s[0].result.prob(&pp("out exp false")), prob(1, 2));

        let l = labeled_steps(&pp("send x y. out y true"), env).unwrap();
        assert_eq!(l[0].label, ActionLabel::Out("x".into(), "y".into()));

        let l = labeled_steps(&pp("!in x (y). out y true"), env).unwrap();
        assert!(matches!(&l[0].label, ActionLabel::In(x, _) if x == "x"));
        assert_eq!(l[0].rule, "REP");

        let l = labeled_steps(&pp("out x #01"), env).unwrap();
        assert_eq!(l[0].label, ActionLabel::OutV("x".into(), crate::kernel::GroundValue::Bits(BitString::parse_bits("01").unwrap())));
        assert_eq!(l[0].result, Distribution::pure(Process::Nil));
    });
}

#[test]
fn term_evaluation() {
    with_env(2, |env| {
        let t = crate::ast::Term::App {
            symbol: "xor".into(),
            index: "n".parse().unwrap(),
            args: alloc::vec![Value::bits(BitString::parse_bits("01").unwrap()), Value::bits(BitString::parse_bits("11").unwrap())],
        };
        let d = eval_term(&t, env).unwrap();
        assert_eq!(d, Distribution::pure(crate::kernel::GroundValue::Bits(BitString::parse_bits("10").unwrap())));
        let open = crate::ast::Term::Val(Value::var("k"));
        assert!(matches!(eval_term(&open, env), Err(SemError::OpenTerm(_))));
    });
}

#[test]
fn normalization() {
    with_env(2, |env| {
        let r = normalize(&Process::Nil, Scheduler::Leftmost, env, NormalizeOptions::default()).unwrap();
        assert_eq!(r.final_dist, Distribution::pure(Process::Nil));
        assert_eq!(r.total_steps, 0);

        let p = pp("let b = flipcoin() in out exp b");
        let r = normalize(&p, Scheduler::Leftmost, env, NormalizeOptions::default()).unwrap();
        assert_eq!(r.final_dist.len(), 2);
        assert_eq!(r.total_cost, 1);

        let p = pp("new exp. (let b = flipcoin() in out exp b | in exp (v). out o v)");
        let a = normalize(&p, Scheduler::Leftmost, env, NormalizeOptions::default()).unwrap();
        let b = normalize(&p, Scheduler::Rightmost, env, NormalizeOptions::default()).unwrap();
        assert_eq!(a.final_dist, b.final_dist);
        assert_eq!(a.final_dist.prob(&pp("out o true")), prob(1, 2));
    });
}

#[test]
fn runaway_processes_hit_the_ceiling() {
    // A server that keeps calling itself.
    let p = pp("new u. (!in u (y). send u (new z). 0 | send u (new a). 0)");
    with_env(1, |env| {
        let opts = NormalizeOptions { bound: None, ceiling: 50 };
        let e = normalize(&p, Scheduler::Leftmost, env, opts).unwrap_err();
        assert_eq!(e, SemError::StepCeilingExceeded { ceiling: 50 });
        let opts = NormalizeOptions { bound: Some(3), ceiling: 50 };
        assert!(matches!(normalize(&p, Scheduler::Leftmost, env, opts), Err(SemError::BoundViolated { .. })));
    });
}

#[test]
fn lifting() {
    with_env(1, |env| {
        let d = Distribution::from_weights([
            (pp("let b = flipcoin() in out o b"), prob(1, 2)),
            (pp("if true then out o true else 0"), prob(1, 2)),
        ])
        .unwrap();
        let l = lift_step(&d, &ActionLabel::Tau, env).unwrap();
        assert_eq!(l.prob(&pp("out o true")), prob(3, 4));
        let stuck = Distribution::from_weights([(pp("out o true"), prob(1, 2)), (pp("if true then 0 else 0"), prob(1, 2))]).unwrap();
        assert!(matches!(lift_step(&stuck, &ActionLabel::Tau, env), Err(SemError::LabelNotUniformlyEnabled(_))));
    });
}

#[test]
fn diamond_cases() {
    with_env(1, |env| {
        let p = pp("new x. (out x true | in x (v). out o v)");
        let r = diamond_check(&p, env).unwrap();
        assert_eq!(r.steps, 1);

        let p = pp("new x. new y. (out x true | in x (a). out o a | out y false | in y (b). out q b)");
        let r = diamond_check(&p, env).unwrap();
        assert!(r.joined() >= 1, "{r:?}");

        let p = pp("let b = flipcoin() in out o b | if true then out q true else 0");
        let r = diamond_check(&p, env).unwrap();
        assert!(r.pairs.iter().any(|(_, _, c)| matches!(c, DiamondCase::Joined(_))));

        // Two competing senders: outside the typed fragment and not confluent.
        let race = pp("new x. (out x true | out x false | in x (v). out o v)");
        assert!(matches!(diamond_check(&race, env), Err(SemError::ConfluenceViolation { .. })));
    });
}

#[test]
fn progress_shapes() {
    with_env(1, |env| {
        assert_eq!(progress(&pp("new x. 0"), env).unwrap(), ProgressShape::Terminated);
        assert_eq!(progress(&pp("new u. !in u (y). 0"), env).unwrap(), ProgressShape::Replicated);
        assert_eq!(progress(&pp("new x. (out x true | in x (v). 0)"), env).unwrap(), ProgressShape::Reduces);
        assert_eq!(progress(&pp("new x. in x (v). 0"), env).unwrap(), ProgressShape::Stuck);
    });
}

#[test]
fn trees_match_normalization() {
    with_env(2, |env| {
        let p = pp("new exp. (let b = flipcoin() in out exp b | in exp (v). let k = gen() in out o v)");
        let t = build_tree(&p, Scheduler::Leftmost, env, 100).unwrap();
        let r = normalize(&p, Scheduler::Leftmost, env, NormalizeOptions::default()).unwrap();
        assert_eq!(t.leaves(), r.final_dist);
        assert_eq!(t.depth() as u64, r.total_steps);
    });
}

// ---- random processes ----

fn arb_process() -> impl Strategy<Value = Process> {
    let chan = prop_oneof![Just("a"), Just("b"), Just("c")].prop_map(|s: &str| s.to_string());
    let leaf = prop_oneof![
        Just(Process::Nil),
        (chan.clone(), any::<bool>()).prop_map(|(x, b)| Process::out_val(&x, Value::bool(b))),
    ];
    leaf.prop_recursive(4, 24, 2, move |inner| {
        let chan = chan.clone();
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(p, q)| Process::par(p, q)),
            (chan.clone(), inner.clone()).prop_map(|(x, p)| Process::res(&x, p)),
            (chan.clone(), chan.clone(), inner.clone()).prop_map(|(x, y, p)| Process::OutCh(x, y, Box::new(p))),
            (chan.clone(), chan.clone(), inner.clone()).prop_map(|(x, y, p)| Process::recv(&x, &y, p)),
            (chan.clone(), inner.clone()).prop_map(|(x, p)| Process::in_val(&x, "v", p)),
            (chan.clone(), inner.clone()).prop_map(|(x, p)| Process::bound_out(&x, "d", p)),
            (chan.clone(), inner.clone()).prop_map(|(x, p)| Process::SelL(x, Box::new(p))),
            (chan.clone(), inner.clone(), inner.clone()).prop_map(|(x, p, q)| Process::Case(x, Box::new(p), Box::new(q))),
            inner.clone().prop_map(|p| Process::let_in("z", crate::ast::Term::App {
                symbol: "flipcoin".into(),
                index: "n".parse().unwrap(),
                args: Vec::new(),
            }, p)),
            (chan, inner).prop_map(|(x, p)| Process::RepIn(x, "r".into(), Box::new(p))),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn tau_agreement(p in arb_process()) {
        with_env(1, |env| agree(&p, env));
    }

    #[test]
    fn alpha_equivalent_processes_step_alike(p in arb_process()) {
        with_env(1, |env| {
            let mut avoid = BTreeSet::new();
            avoid.extend(["a", "b", "c", "v", "d", "z", "r"].map(|s| s.to_string()));
            let q = p.freshen_binders(&mut avoid);
            let steps = |x: &Process| -> BTreeSet<Distribution<Process>> {
                enabled_reductions(x, env).unwrap().into_iter().map(|s| s.result).collect()
            };
            prop_assert_eq!(steps(&p), steps(&q));
            Ok(())
        })?;
    }

    #[test]
    fn step_results_are_distributions(p in arb_process()) {
        with_env(1, |env| {
            for s in labeled_steps(&p, env).unwrap() {
                let total = s.result.iter().fold(crate::kernel::Prob::default(), |a, (_, w)| a + w);
                assert_eq!(total, prob(1, 1));
            }
        });
    }
}
