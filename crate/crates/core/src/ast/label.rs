use alloc::collections::BTreeSet;
use core::fmt;

use super::Name;
use crate::kernel::GroundValue;

/// Transition labels. Inputs are symbolic: `In(x, y)` and `InV(x, y)` name
/// the receiver's binder, which is left free in the residual and filled in
/// by the synchronizing rule.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum ActionLabel {
    Tau,
    Out(Name, Name),
    In(Name, Name),
    BoundOut(Name, Name),
    InL(Name),
    InR(Name),
    OutL(Name),
    OutR(Name),
    InV(Name, Name),
    OutV(Name, GroundValue),
}

impl ActionLabel {
    pub fn subject(&self) -> Option<&Name> {
        use ActionLabel::*;
        match self {
            Tau => None,
            Out(x, _) | In(x, _) | BoundOut(x, _) | InL(x) | InR(x) | OutL(x) | OutR(x) | InV(x, _)
            | OutV(x, _) => Some(x),
        }
    }

    /// Names the label exposes; binders of inputs and bound outputs excluded.
    pub fn free_names(&self) -> BTreeSet<Name> {
        let mut s: BTreeSet<Name> = self.subject().cloned().into_iter().collect();
        if let ActionLabel::Out(_, y) = self {
            s.insert(y.clone());
        }
        s
    }

    /// Binder introduced by the label, if any.
    pub fn binder(&self) -> Option<&Name> {
        match self {
            ActionLabel::In(_, y) | ActionLabel::BoundOut(_, y) | ActionLabel::InV(_, y) => Some(y),
            _ => None,
        }
    }

    /// Same action up to the choice of binder.
    pub fn same_action(&self, other: &ActionLabel) -> bool {
        use ActionLabel::*;
        match (self, other) {
            (In(x, _), In(y, _)) | (BoundOut(x, _), BoundOut(y, _)) | (InV(x, _), InV(y, _)) => x == y,
            _ => self == other,
        }
    }
}

impl fmt::Display for ActionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use ActionLabel::*;
        match self {
            Tau => f.write_str("tau"),
            Out(x, y) => write!(f, "{x}<{y}>"),
            In(x, y) => write!(f, "{x}({y})"),
            BoundOut(x, y) => write!(f, "(new {y}){x}<{y}>"),
            InL(x) => write!(f, "{x}.inl?"),
            InR(x) => write!(f, "{x}.inr?"),
            OutL(x) => write!(f, "{x}.inl"),
            OutR(x) => write!(f, "{x}.inr"),
            InV(x, y) => write!(f, "{x}?({y})"),
            OutV(x, v) => write!(f, "{x}!{v}"),
        }
    }
}
