use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::{Name, Process, Term, Value};
use crate::kernel::GroundValue;

/// A name built from `base` that avoids every name in `avoid`.
pub fn fresh_name(base: &str, avoid: &BTreeSet<Name>) -> Name {
    let stem = base.split('\'').next().unwrap_or(base);
    let mut k = 1usize;
    loop {
        let cand = format!("{stem}'{k}");
        if !avoid.contains(&cand) {
            return cand;
        }
        k += 1;
    }
}

impl Value {
    pub fn free_vars(&self) -> Option<&Name> {
        match self {
            Value::Var(x) => Some(x),
            Value::Lit(_) => None,
        }
    }
}

impl Term {
    pub fn free_vars(&self) -> BTreeSet<Name> {
        self.values().filter_map(|v| v.free_vars().cloned()).collect()
    }
}

#[derive(Clone, Debug)]
enum Sub<'a> {
    Name(&'a str, &'a str),
    Val(&'a str, &'a GroundValue),
}

impl Sub<'_> {
    fn from(&self) -> &str {
        match self {
            Sub::Name(f, _) | Sub::Val(f, _) => f,
        }
    }

    fn captured_by(&self, binder: &str) -> bool {
        matches!(self, Sub::Name(_, to) if *to == binder)
    }

    fn name(&self, x: &Name) -> Name {
        match self {
            Sub::Name(f, t) if x == f => (*t).into(),
            _ => x.clone(),
        }
    }

    fn value(&self, v: &Value) -> Value {
        match (self, v) {
            (Sub::Name(f, t), Value::Var(x)) if x == f => Value::Var((*t).into()),
            (Sub::Val(f, g), Value::Var(x)) if x == f => Value::Lit((*g).clone()),
            _ => v.clone(),
        }
    }

    fn term(&self, t: &Term) -> Term {
        match t {
            Term::Val(v) => Term::Val(self.value(v)),
            Term::App { symbol, index, args } => Term::App {
                symbol: symbol.clone(),
                index: index.clone(),
                args: args.iter().map(|a| self.value(a)).collect(),
            },
        }
    }
}

impl Process {
    /// Channel names and term variables occurring free.
    pub fn free_names(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut out);
        out
    }

    fn collect_free(&self, out: &mut BTreeSet<Name>) {
        use Process::*;
        let under = |b: &Name, p: &Process, out: &mut BTreeSet<Name>| {
            let mut inner = p.free_names();
            inner.remove(b);
            out.extend(inner);
        };
        match self {
            Nil | Hole => {}
            Par(a, b) => {
                a.collect_free(out);
                b.collect_free(out);
            }
            Res(y, p) => under(y, p, out),
            OutCh(x, y, p) => {
                out.insert(x.clone());
                out.insert(y.clone());
                p.collect_free(out);
            }
            InCh(x, y, p) | InVal(x, y, p) | RepIn(x, y, p) => {
                out.insert(x.clone());
                under(y, p, out);
            }
            OutVal(x, v) => {
                out.insert(x.clone());
                out.extend(v.free_vars().cloned());
            }
            Let(z, t, p) => {
                out.extend(t.free_vars());
                under(z, p, out);
            }
            SelL(x, p) | SelR(x, p) => {
                out.insert(x.clone());
                p.collect_free(out);
            }
            Case(x, p, q) => {
                out.insert(x.clone());
                p.collect_free(out);
                q.collect_free(out);
            }
            If(v, p, q) => {
                out.extend(v.free_vars().cloned());
                p.collect_free(out);
                q.collect_free(out);
            }
        }
    }

    /// Every name occurring anywhere, bound or free.
    pub fn all_names(&self) -> BTreeSet<Name> {
        use Process::*;
        let mut out = BTreeSet::new();
        match self {
            Nil | Hole => {}
            Res(y, _) => {
                out.insert(y.clone());
            }
            OutCh(x, y, _) | InCh(x, y, _) | InVal(x, y, _) | RepIn(x, y, _) => {
                out.insert(x.clone());
                out.insert(y.clone());
            }
            OutVal(x, v) => {
                out.insert(x.clone());
                out.extend(v.free_vars().cloned());
            }
            Let(z, t, _) => {
                out.insert(z.clone());
                out.extend(t.free_vars());
            }
            SelL(x, _) | SelR(x, _) | Case(x, _, _) => {
                out.insert(x.clone());
            }
            If(v, _, _) => out.extend(v.free_vars().cloned()),
            Par(..) => {}
        }
        for c in self.children() {
            out.extend(c.all_names());
        }
        out
    }

    /// Capture-avoiding `P{to/from}` on channel and value positions.
    pub fn rename_free(&self, from: &str, to: &str) -> Process {
        if from == to {
            return self.clone();
        }
        self.subst(&Sub::Name(from, to))
    }

    /// `P{val/var}` on value positions.
    pub fn subst_value(&self, var: &str, val: &GroundValue) -> Process {
        self.subst(&Sub::Val(var, val))
    }

    fn subst(&self, s: &Sub) -> Process {
        use Process::*;
        match self {
            Nil => Nil,
            Hole => Hole,
            Par(a, b) => Process::par(a.subst(s), b.subst(s)),
            OutCh(x, y, p) => OutCh(s.name(x), s.name(y), Box::new(p.subst(s))),
            OutVal(x, v) => OutVal(s.name(x), s.value(v)),
            SelL(x, p) => SelL(s.name(x), Box::new(p.subst(s))),
            SelR(x, p) => SelR(s.name(x), Box::new(p.subst(s))),
            Case(x, p, q) => Case(s.name(x), Box::new(p.subst(s)), Box::new(q.subst(s))),
            If(v, p, q) => If(s.value(v), Box::new(p.subst(s)), Box::new(q.subst(s))),
            Res(y, p) => {
                let (y, p) = s.under(y, p);
                Res(y, Box::new(p))
            }
            InCh(x, y, p) => {
                let (y, p) = s.under(y, p);
                InCh(s.name(x), y, Box::new(p))
            }
            InVal(x, y, p) => {
                let (y, p) = s.under(y, p);
                InVal(s.name(x), y, Box::new(p))
            }
            RepIn(x, y, p) => {
                let (y, p) = s.under(y, p);
                RepIn(s.name(x), y, Box::new(p))
            }
            Let(z, t, p) => {
                let t = s.term(t);
                let (z, p) = s.under(z, p);
                Let(z, t, Box::new(p))
            }
        }
    }

    /// Rename bound names to `%d`, `d` being the binder depth, so that
    /// alpha-equivalent processes become equal.
    pub fn canonicalize(&self) -> Process {
        let mut env = Vec::new();
        self.canon(&mut env)
    }

    fn canon(&self, env: &mut Vec<(Name, Name)>) -> Process {
        use Process::*;
        fn look(env: &[(Name, Name)], x: &Name) -> Name {
            env.iter()
                .rev()
                .find(|(o, _)| o == x)
                .map(|(_, n)| n.clone())
                .unwrap_or_else(|| x.clone())
        }
        fn val(env: &[(Name, Name)], v: &Value) -> Value {
            match v {
                Value::Var(x) => Value::Var(look(env, x)),
                l => l.clone(),
            }
        }
        fn bind<F: FnOnce(&mut Vec<(Name, Name)>) -> Process>(
            env: &mut Vec<(Name, Name)>,
            b: &Name,
            k: F,
        ) -> (Name, Process) {
            let fresh: Name = format!("%{}", env.len());
            env.push((b.clone(), fresh.clone()));
            let p = k(env);
            env.pop();
            (fresh, p)
        }
        match self {
            Nil => Nil,
            Hole => Hole,
            Par(a, b) => Process::par(a.canon(env), b.canon(env)),
            OutCh(x, y, p) => OutCh(look(env, x), look(env, y), Box::new(p.canon(env))),
            OutVal(x, v) => OutVal(look(env, x), val(env, v)),
            SelL(x, p) => SelL(look(env, x), Box::new(p.canon(env))),
            SelR(x, p) => SelR(look(env, x), Box::new(p.canon(env))),
            Case(x, p, q) => Case(look(env, x), Box::new(p.canon(env)), Box::new(q.canon(env))),
            If(v, p, q) => If(val(env, v), Box::new(p.canon(env)), Box::new(q.canon(env))),
            Res(y, p) => {
                let (y, p) = bind(env, y, |e| p.canon(e));
                Res(y, Box::new(p))
            }
            InCh(x, y, p) => {
                let x = look(env, x);
                let (y, p) = bind(env, y, |e| p.canon(e));
                InCh(x, y, Box::new(p))
            }
            InVal(x, y, p) => {
                let x = look(env, x);
                let (y, p) = bind(env, y, |e| p.canon(e));
                InVal(x, y, Box::new(p))
            }
            RepIn(x, y, p) => {
                let x = look(env, x);
                let (y, p) = bind(env, y, |e| p.canon(e));
                RepIn(x, y, Box::new(p))
            }
            Let(z, t, p) => {
                let t = match t {
                    Term::Val(v) => Term::Val(val(env, v)),
                    Term::App { symbol, index, args } => Term::App {
                        symbol: symbol.clone(),
                        index: index.clone(),
                        args: args.iter().map(|a| val(env, a)).collect(),
                    },
                };
                let (z, p) = bind(env, z, |e| p.canon(e));
                Let(z, t, Box::new(p))
            }
        }
    }

    pub fn alpha_eq(&self, other: &Process) -> bool {
        self.canonicalize() == other.canonicalize()
    }

    /// Give every binder a name distinct from all free names and from each
    /// other; handy before flattening.
    pub fn freshen_binders(&self, avoid: &mut BTreeSet<Name>) -> Process {
        use Process::*;
        let rebind = |y: &Name, p: &Process, avoid: &mut BTreeSet<Name>| -> (Name, Process) {
            let y2 = if avoid.contains(y) { fresh_name(y, avoid) } else { y.clone() };
            avoid.insert(y2.clone());
            let body = p.rename_free(y, &y2).freshen_binders(avoid);
            (y2, body)
        };
        match self {
            Nil => Nil,
            Hole => Hole,
            OutVal(x, v) => OutVal(x.clone(), v.clone()),
            Par(a, b) => {
                let a = a.freshen_binders(avoid);
                Process::par(a, b.freshen_binders(avoid))
            }
            OutCh(x, y, p) => OutCh(x.clone(), y.clone(), Box::new(p.freshen_binders(avoid))),
            SelL(x, p) => SelL(x.clone(), Box::new(p.freshen_binders(avoid))),
            SelR(x, p) => SelR(x.clone(), Box::new(p.freshen_binders(avoid))),
            Case(x, p, q) => {
                let p = p.freshen_binders(avoid);
                Case(x.clone(), Box::new(p), Box::new(q.freshen_binders(avoid)))
            }
            If(v, p, q) => {
                let p = p.freshen_binders(avoid);
                If(v.clone(), Box::new(p), Box::new(q.freshen_binders(avoid)))
            }
            Res(y, p) => {
                let (y, p) = rebind(y, p, avoid);
                Res(y, Box::new(p))
            }
            InCh(x, y, p) => {
                let (y, p) = rebind(y, p, avoid);
                InCh(x.clone(), y, Box::new(p))
            }
            InVal(x, y, p) => {
                let (y, p) = rebind(y, p, avoid);
                InVal(x.clone(), y, Box::new(p))
            }
            RepIn(x, y, p) => {
                let (y, p) = rebind(y, p, avoid);
                RepIn(x.clone(), y, Box::new(p))
            }
            Let(z, t, p) => {
                let (z, p) = rebind(z, p, avoid);
                Let(z, t.clone(), Box::new(p))
            }
        }
    }
}

impl Sub<'_> {
    /// Push the substitution under binder `b`, renaming it if it would
    /// capture the substituted name.
    fn under(&self, b: &Name, body: &Process) -> (Name, Process) {
        if b == self.from() {
            return (b.clone(), body.clone());
        }
        let fv = body.free_names();
        if self.captured_by(b) && fv.contains(self.from()) {
            let mut avoid = fv;
            avoid.insert(b.clone());
            if let Sub::Name(f, t) = self {
                avoid.insert(String::from(*f));
                avoid.insert(String::from(*t));
            }
            let b2 = fresh_name(b, &avoid);
            let body2 = body.rename_free(b, &b2);
            return (b2, body2.subst(self));
        }
        (b.clone(), body.subst(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_names_examples() {
        let p = Process::res("y", Process::OutCh("x".into(), "y".into(), Box::new(Process::Nil)));
        assert_eq!(p.free_names(), ["x".into()].into_iter().collect());
        let q = Process::recv("x", "y", Process::out_val("y", Value::var("z")));
        assert_eq!(q.free_names(), ["x".into(), "z".into()].into_iter().collect());
    }

    #[test]
    fn substitution_avoids_capture() {
        // (recv x (y). out y w){y/w} must not capture.
        let p = Process::recv("x", "y", Process::out_val("y", Value::var("w")));
        let q = p.rename_free("w", "y");
        match &q {
            Process::InCh(_, b, body) => {
                assert_ne!(b, "y");
                assert_eq!(**body, Process::out_val(b, Value::var("y")));
            }
            _ => panic!(),
        }
    }

    #[test]
    fn alpha() {
        let a = Process::res("a", Process::out_val("a", Value::bool(true)));
        let b = Process::res("b", Process::out_val("b", Value::bool(true)));
        assert!(a.alpha_eq(&b));
        let c = Process::res("b", Process::out_val("a", Value::bool(true)));
        assert!(!a.alpha_eq(&c));
    }
}
