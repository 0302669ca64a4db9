use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use core::fmt;

use crate::ast::Name;
use crate::kernel::{poly_leq, GroundType, Polynomial};

use super::TypingError;

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum SessionType {
    One,
    Lolli(Box<SessionType>, Box<SessionType>),
    Tensor(Box<SessionType>, Box<SessionType>),
    Plus(Box<SessionType>, Box<SessionType>),
    With(Box<SessionType>, Box<SessionType>),
    Bang(Polynomial, Box<SessionType>),
    Bool,
    Str(Polynomial),
}

impl SessionType {
    pub fn lolli(a: SessionType, b: SessionType) -> Self {
        SessionType::Lolli(Box::new(a), Box::new(b))
    }

    pub fn tensor(a: SessionType, b: SessionType) -> Self {
        SessionType::Tensor(Box::new(a), Box::new(b))
    }

    pub fn plus(a: SessionType, b: SessionType) -> Self {
        SessionType::Plus(Box::new(a), Box::new(b))
    }

    pub fn with(a: SessionType, b: SessionType) -> Self {
        SessionType::With(Box::new(a), Box::new(b))
    }

    pub fn bang(p: Polynomial, a: SessionType) -> Self {
        SessionType::Bang(p, Box::new(a))
    }

    pub fn str_n(p: Polynomial) -> Self {
        SessionType::Str(p)
    }

    pub fn as_ground(&self) -> Option<GroundType> {
        match self {
            SessionType::Bool => Some(GroundType::Bool),
            SessionType::Str(p) => Some(GroundType::Str(p.clone())),
            _ => None,
        }
    }

    pub fn from_ground(g: &GroundType) -> Self {
        match g {
            GroundType::Bool => SessionType::Bool,
            GroundType::Str(p) => SessionType::Str(p.clone()),
        }
    }

    pub fn poly_vars(&self) -> BTreeSet<String> {
        use SessionType::*;
        match self {
            One | Bool => BTreeSet::new(),
            Str(p) => p.vars(),
            Bang(p, a) => {
                let mut v = p.vars();
                v.extend(a.poly_vars());
                v
            }
            Lolli(a, b) | Tensor(a, b) | Plus(a, b) | With(a, b) => {
                let mut v = a.poly_vars();
                v.extend(b.poly_vars());
                v
            }
        }
    }

    /// Apply a polynomial substitution to every annotation.
    pub fn map_polys<F: Fn(&Polynomial) -> Polynomial + Copy>(&self, f: F) -> SessionType {
        use SessionType::*;
        match self {
            One => One,
            Bool => Bool,
            Str(p) => Str(f(p)),
            Bang(p, a) => Bang(f(p), Box::new(a.map_polys(f))),
            Lolli(a, b) => Lolli(Box::new(a.map_polys(f)), Box::new(b.map_polys(f))),
            Tensor(a, b) => Tensor(Box::new(a.map_polys(f)), Box::new(b.map_polys(f))),
            Plus(a, b) => Plus(Box::new(a.map_polys(f)), Box::new(b.map_polys(f))),
            With(a, b) => With(Box::new(a.map_polys(f)), Box::new(b.map_polys(f))),
        }
    }

    fn prec(&self) -> u8 {
        use SessionType::*;
        match self {
            Lolli(..) => 0,
            Plus(..) | With(..) => 1,
            Tensor(..) => 2,
            Bang(..) => 3,
            One | Bool | Str(_) => 4,
        }
    }

    fn fmt_at(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        use SessionType::*;
        if self.prec() < min {
            f.write_str("(")?;
            self.fmt_at(f, 0)?;
            return f.write_str(")");
        }
        match self {
            One => f.write_str("1"),
            Bool => f.write_str("Bool"),
            Str(p) => write!(f, "Str[{p}]"),
            Bang(p, a) => {
                write!(f, "![{p}] ")?;
                a.fmt_at(f, 3)
            }
            Lolli(a, b) => {
                a.fmt_at(f, 1)?;
                f.write_str(" -o ")?;
                b.fmt_at(f, 0)
            }
            Plus(a, b) | With(a, b) => {
                a.fmt_at(f, 2)?;
                f.write_str(if matches!(self, Plus(..)) { " + " } else { " & " })?;
                b.fmt_at(f, 1)
            }
            Tensor(a, b) => {
                a.fmt_at(f, 3)?;
                f.write_str(" * ")?;
                b.fmt_at(f, 2)
            }
        }
    }
}

impl fmt::Display for SessionType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_at(f, 0)
    }
}

/// Γ: unrestricted channels with their multiplicity.
pub type UnrestrictedEnv = BTreeMap<Name, (Polynomial, SessionType)>;
/// Δ: linear channels.
pub type LinearEnv = BTreeMap<Name, SessionType>;
/// Θ: term variables.
pub type TermEnv = BTreeMap<Name, GroundType>;

/// `Γ₁ ⊞ Γ₂`: add multiplicities name by name.
pub fn env_sum(g1: &UnrestrictedEnv, g2: &UnrestrictedEnv) -> Result<UnrestrictedEnv, TypingError> {
    let mut out = g1.clone();
    for (u, (p, a)) in g2 {
        match out.get_mut(u) {
            Some((q, b)) => {
                if a != b {
                    return Err(TypingError::TypeMismatchAtName(u.clone()));
                }
                *q = &*q + p;
            }
            None => {
                out.insert(u.clone(), (p.clone(), a.clone()));
            }
        }
    }
    Ok(out)
}

/// `Γ₁ ⊑ Γ₂`; a name missing on either side counts as multiplicity 0.
pub fn env_leq(g1: &UnrestrictedEnv, g2: &UnrestrictedEnv) -> bool {
    g1.iter().all(|(u, (p, a))| match g2.get(u) {
        Some((q, b)) => a == b && poly_leq(p, q).holds(),
        None => p.is_zero(),
    })
}

/// `p·Γ`.
pub fn env_scale(p: &Polynomial, g: &UnrestrictedEnv) -> UnrestrictedEnv {
    g.iter()
        .map(|(u, (q, a))| (u.clone(), (p * q, a.clone())))
        .filter(|(_, (q, _))| !q.is_zero())
        .collect()
}
