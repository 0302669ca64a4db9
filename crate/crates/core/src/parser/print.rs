use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::{self, Write};

use super::{Decl, DeclKind, SourceUnit};
use crate::ast::{Process, Term, Value};

/// Reserved names (`%k`) from canonicalization print as `_k`.
fn name(n: &str) -> String {
    n.replace('%', "_")
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Var(x) => f.write_str(&name(x)),
            Value::Lit(v) => write!(f, "{v}"),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Val(v) => write!(f, "{v}"),
            Term::App { symbol, index, args } => {
                write!(f, "{symbol}[{index}](")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

fn write_proc(p: &Process, top: bool, out: &mut String) {
    use Process::*;
    match p {
        Par(a, b) => {
            if !top {
                out.push('(');
            }
            write_proc(a, true, out);
            out.push_str(" | ");
            write_proc(b, false, out);
            if !top {
                out.push(')');
            }
        }
        Nil => out.push('0'),
        Hole => out.push_str("[]"),
        Res(y, body) => match &**body {
            OutCh(x, y2, cont) if y == y2 => {
                let _ = write!(out, "send {} (new {}). ", name(x), name(y));
                write_proc(cont, false, out);
            }
            _ => {
                let _ = write!(out, "new {}. ", name(y));
                write_proc(body, false, out);
            }
        },
        OutCh(x, y, c) => {
            let _ = write!(out, "send {} {}. ", name(x), name(y));
            write_proc(c, false, out);
        }
        InCh(x, y, c) => {
            let _ = write!(out, "recv {} ({}). ", name(x), name(y));
            write_proc(c, false, out);
        }
        OutVal(x, v) => {
            let _ = write!(out, "out {} {v}", name(x));
        }
        InVal(x, z, c) => {
            let _ = write!(out, "in {} ({}). ", name(x), name(z));
            write_proc(c, false, out);
        }
        Let(z, t, c) => {
            let _ = write!(out, "let {} = {t} in ", name(z));
            write_proc(c, false, out);
        }
        RepIn(x, y, c) => {
            let _ = write!(out, "!in {} ({}). ", name(x), name(y));
            write_proc(c, false, out);
        }
        SelL(x, c) => {
            let _ = write!(out, "{}.inl. ", name(x));
            write_proc(c, false, out);
        }
        SelR(x, c) => {
            let _ = write!(out, "{}.inr. ", name(x));
            write_proc(c, false, out);
        }
        Case(x, l, r) => {
            let _ = write!(out, "case {} of inl => ", name(x));
            write_proc(l, false, out);
            out.push_str(" / inr => ");
            write_proc(r, false, out);
        }
        If(v, l, r) => {
            let _ = write!(out, "if {v} then ");
            write_proc(l, false, out);
            out.push_str(" else ");
            write_proc(r, false, out);
        }
    }
}

pub fn print_process(p: &Process) -> String {
    let mut s = String::new();
    write_proc(p, true, &mut s);
    s
}

impl fmt::Display for Process {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_process(self))
    }
}

fn write_decl(d: &Decl, out: &mut String) {
    let kw = match d.kind {
        DeclKind::Proc => "proc",
        DeclKind::Ctx => "ctx",
    };
    let mut parts: Vec<String> = Vec::new();
    if !d.delta.is_empty() {
        let items: Vec<String> = d.delta.iter().map(|(x, a)| alloc::format!("{x} : {a}")).collect();
        parts.push(alloc::format!("lin{{{}}}", items.join(", ")));
    }
    if !d.gamma.is_empty() {
        let items: Vec<String> = d.gamma.iter().map(|(u, p, a)| alloc::format!("{u}[{p}] : {a}")).collect();
        parts.push(alloc::format!("exp{{{}}}", items.join(", ")));
    }
    if !d.theta.is_empty() {
        let items: Vec<String> = d.theta.iter().map(|(z, b)| alloc::format!("{z} : {b}")).collect();
        parts.push(alloc::format!("tm{{{}}}", items.join(", ")));
    }
    let _ = writeln!(
        out,
        "{kw} {}({}) :: ({} : {}) =\n  {}\n",
        d.name,
        parts.join("; "),
        d.offered.0,
        d.offered.1,
        print_process(&d.body)
    );
}

pub fn print_unit(u: &SourceUnit) -> String {
    let mut out = String::new();
    if !u.params.is_empty() {
        let _ = writeln!(out, "params {}.\n", u.params.join(", "));
    }
    for (n, t) in &u.aliases {
        let _ = writeln!(out, "type {n} = {t}.");
    }
    if !u.aliases.is_empty() {
        out.push('\n');
    }
    for d in &u.decls {
        write_decl(d, &mut out);
    }
    out
}

impl fmt::Display for SourceUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_unit(self))
    }
}
