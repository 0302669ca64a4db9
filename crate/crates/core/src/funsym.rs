//! Function symbols: signatures, costs and probabilistic semantics.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::kernel::{
    carrier, rho, BitString, Carrier, Distribution, GroundType, GroundValue, KernelError,
    Polynomial,
};

/// The variable that signatures and costs are stated in.
pub const INDEX_VAR: &str = "n";

/// `semantics(i, args)`; `None` means undefined at that point.
pub type Semantics =
    Arc<dyn Fn(u64, &[GroundValue]) -> Option<Distribution<GroundValue>> + Send + Sync>;

pub type Prg = Arc<dyn Fn(&BitString) -> BitString + Send + Sync>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FunsymError {
    #[error("unknown function symbol `{0}`")]
    UnknownSymbol(String),
    #[error("`{name}` expects {expected} arguments, got {got}")]
    ArityMismatch { name: String, expected: usize, got: usize },
    #[error("argument {index} of `{name}` is outside its carrier")]
    CarrierViolation { name: String, index: usize },
    #[error("function symbol `{0}` is already registered")]
    DuplicateSymbol(String),
    #[error("`{name}` is undefined at index {index} on these arguments")]
    Undefined { name: String, index: u64 },
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

#[derive(Clone)]
pub struct FunctionSymbol {
    pub name: String,
    pub args: Vec<GroundType>,
    pub result: GroundType,
    pub cost: Polynomial,
    semantics: Semantics,
}

impl fmt::Debug for FunctionSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FunctionSymbol")
            .field("name", &self.name)
            .field("args", &self.args)
            .field("result", &self.result)
            .field("cost", &self.cost)
            .finish()
    }
}

impl FunctionSymbol {
    pub fn new(
        name: &str,
        args: Vec<GroundType>,
        result: GroundType,
        cost: Polynomial,
        semantics: Semantics,
    ) -> Self {
        FunctionSymbol { name: name.to_string(), args, result, cost, semantics }
    }

    pub fn deterministic<F>(name: &str, args: Vec<GroundType>, result: GroundType, cost: Polynomial, f: F) -> Self
    where
        F: Fn(u64, &[GroundValue]) -> Option<GroundValue> + Send + Sync + 'static,
    {
        Self::new(name, args, result, cost, Arc::new(move |i, a| f(i, a).map(Distribution::pure)))
    }

    pub fn cost_at(&self, i: u64) -> Result<u64, KernelError> {
        self.cost.eval(&rho(INDEX_VAR, i))
    }

    pub fn kinds_match(&self, kinds: &[Kind]) -> bool {
        self.args.len() == kinds.len()
            && self.args.iter().zip(kinds).all(|(t, k)| Kind::of_type(t) == *k)
    }
}

/// Coarse shape of a ground type, used to pick an overload.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Kind {
    Bool,
    Str,
}

impl Kind {
    pub fn of_type(t: &GroundType) -> Kind {
        match t {
            GroundType::Bool => Kind::Bool,
            GroundType::Str(_) => Kind::Str,
        }
    }

    pub fn of_value(v: &GroundValue) -> Kind {
        match v {
            GroundValue::Bool(_) => Kind::Bool,
            GroundValue::Bits(_) => Kind::Str,
        }
    }
}

#[derive(Clone, Default, Debug)]
pub struct Registry {
    symbols: BTreeMap<String, FunctionSymbol>,
    overloads: BTreeMap<String, Vec<String>>,
}

impl Registry {
    pub fn empty() -> Self {
        Registry::default()
    }

    pub fn register(&mut self, sym: FunctionSymbol) -> Result<(), FunsymError> {
        if self.symbols.contains_key(&sym.name) || self.overloads.contains_key(&sym.name) {
            return Err(FunsymError::DuplicateSymbol(sym.name));
        }
        self.symbols.insert(sym.name.clone(), sym);
        Ok(())
    }

    /// Make `name` stand for whichever candidate matches the argument kinds.
    pub fn overload(&mut self, name: &str, candidates: &[&str]) -> Result<(), FunsymError> {
        if self.symbols.contains_key(name) || self.overloads.contains_key(name) {
            return Err(FunsymError::DuplicateSymbol(name.to_string()));
        }
        for c in candidates {
            self.lookup(c)?;
        }
        self.overloads
            .insert(name.to_string(), candidates.iter().map(|c| c.to_string()).collect());
        Ok(())
    }

    pub fn lookup(&self, name: &str) -> Result<&FunctionSymbol, FunsymError> {
        self.symbols
            .get(name)
            .ok_or_else(|| FunsymError::UnknownSymbol(name.to_string()))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.symbols.contains_key(name) || self.overloads.contains_key(name)
    }

    pub fn symbols(&self) -> impl Iterator<Item = &FunctionSymbol> {
        self.symbols.values()
    }

    /// Resolve a possibly overloaded name against argument kinds.
    pub fn resolve(&self, name: &str, kinds: &[Kind]) -> Result<&FunctionSymbol, FunsymError> {
        if let Some(cands) = self.overloads.get(name) {
            let syms: Vec<&FunctionSymbol> = cands.iter().filter_map(|c| self.symbols.get(c)).collect();
            return syms
                .iter()
                .find(|s| s.kinds_match(kinds))
                .or_else(|| syms.first())
                .copied()
                .ok_or_else(|| FunsymError::UnknownSymbol(name.to_string()));
        }
        self.lookup(name)
    }

    pub fn apply(
        &self,
        name: &str,
        i: u64,
        args: &[GroundValue],
    ) -> Result<Distribution<GroundValue>, FunsymError> {
        let kinds: Vec<Kind> = args.iter().map(Kind::of_value).collect();
        let sym = self.resolve(name, &kinds)?;
        if sym.args.len() != args.len() {
            return Err(FunsymError::ArityMismatch {
                name: name.to_string(),
                expected: sym.args.len(),
                got: args.len(),
            });
        }
        let r = rho(INDEX_VAR, i);
        let mut normalized = Vec::with_capacity(args.len());
        for (index, (t, v)) in sym.args.iter().zip(args).enumerate() {
            let c = carrier(t, &r)?;
            let nv = c.normalize(v).ok_or_else(|| FunsymError::CarrierViolation {
                name: name.to_string(),
                index,
            })?;
            normalized.push(nv);
        }
        (sym.semantics)(i, &normalized).ok_or_else(|| FunsymError::Undefined {
            name: name.to_string(),
            index: i,
        })
    }

    pub fn cost(&self, name: &str, kinds: &[Kind], i: u64) -> Result<u64, FunsymError> {
        Ok(self.resolve(name, kinds)?.cost_at(i)?)
    }
}

fn n() -> Polynomial {
    Polynomial::var(INDEX_VAR)
}

fn str_n() -> GroundType {
    GroundType::Str(n())
}

fn bits(v: &GroundValue) -> Option<&BitString> {
    match v {
        GroundValue::Bits(b) => Some(b),
        GroundValue::Bool(_) => None,
    }
}

fn uniform_bits(i: u64) -> Option<Distribution<GroundValue>> {
    Distribution::uniform(BitString::all(i as usize).map(GroundValue::Bits)).ok()
}

fn xor_symbol(name: &str) -> FunctionSymbol {
    FunctionSymbol::deterministic(name, alloc::vec![str_n(), str_n()], str_n(), n(), |_, a| {
        Some(GroundValue::Bits(bits(&a[0])?.xor(bits(&a[1])?)))
    })
}

/// Built-in symbols with the identity function as the PRG.
pub fn builtin_registry() -> Registry {
    builtin_registry_with_prg(Arc::new(|s: &BitString| s.clone()))
}

pub fn builtin_registry_with_prg(prg: Prg) -> Registry {
    let mut r = Registry::empty();
    let syms = [
        FunctionSymbol::new(
            "flipcoin",
            Vec::new(),
            GroundType::Bool,
            Polynomial::one(),
            Arc::new(|_, _| {
                Distribution::uniform([GroundValue::Bool(false), GroundValue::Bool(true)]).ok()
            }),
        ),
        FunctionSymbol::new("gen", Vec::new(), str_n(), n(), Arc::new(|i, _| uniform_bits(i))),
        FunctionSymbol::new("rand", Vec::new(), str_n(), n(), Arc::new(|i, _| uniform_bits(i))),
        FunctionSymbol::deterministic("zeros", Vec::new(), str_n(), n(), |i, _| {
            Some(GroundValue::Bits(BitString::zeros(i as usize)))
        }),
        FunctionSymbol::deterministic("ones", Vec::new(), str_n(), n(), |i, _| {
            Some(GroundValue::Bits(BitString::ones(i as usize)))
        }),
        FunctionSymbol::deterministic(
            "eqb",
            alloc::vec![GroundType::Bool, GroundType::Bool],
            GroundType::Bool,
            n(),
            |_, a| Some(GroundValue::Bool(a[0] == a[1])),
        ),
        FunctionSymbol::deterministic("eqs", alloc::vec![str_n(), str_n()], GroundType::Bool, n(), |_, a| {
            Some(GroundValue::Bool(a[0] == a[1]))
        }),
        xor_symbol("xor"),
        xor_symbol("otp_enc"),
        FunctionSymbol::deterministic("g_prg", alloc::vec![str_n()], str_n(), n().pow(2), {
            let prg = prg.clone();
            move |i, a| {
                let out = prg(bits(&a[0])?);
                Carrier::Bits(i as usize).normalize(&GroundValue::Bits(out))
            }
        }),
        // Encryption of the PRG-based scheme: the message xor the stretched key.
        FunctionSymbol::deterministic("prg_enc", alloc::vec![str_n(), str_n()], str_n(), &n().pow(2) + &n(), move |i, a| {
            let pad = Carrier::Bits(i as usize).normalize(&GroundValue::Bits(prg(bits(&a[0])?)))?;
            Some(GroundValue::Bits(bits(&pad)?.xor(bits(&a[1])?)))
        }),
    ];
    for s in syms {
        r.register(s).expect("builtin names are distinct");
    }
    r.overload("eq", &["eqb", "eqs"]).expect("eq candidates exist");
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::prob;

    #[test]
    fn flipcoin_is_fair() {
        let r = builtin_registry();
        let d = r.apply("flipcoin", 5, &[]).unwrap();
        assert_eq!(d.prob(&GroundValue::Bool(true)), prob(1, 2));
        assert_eq!(r.cost("flipcoin", &[], 5).unwrap(), 1);
    }

    #[test]
    fn gen_is_uniform() {
        let r = builtin_registry();
        let d = r.apply("gen", 3, &[]).unwrap();
        assert_eq!(d.len(), 8);
        assert!(d.iter().all(|(_, w)| *w == prob(1, 8)));
        assert_eq!(r.cost("gen", &[], 3).unwrap(), 3);
    }

    #[test]
    fn eq_overload_and_padding() {
        let r = builtin_registry();
        let a = GroundValue::Bits(BitString::parse_bits("1").unwrap());
        let b = GroundValue::Bits(BitString::parse_bits("001").unwrap());
        let d = r.apply("eq", 3, &[a.clone(), b]).unwrap();
        assert_eq!(d, Distribution::pure(GroundValue::Bool(true)));
        let d = r.apply("eq", 3, &[GroundValue::Bool(true), GroundValue::Bool(false)]).unwrap();
        assert_eq!(d, Distribution::pure(GroundValue::Bool(false)));
        let long = GroundValue::Bits(BitString::parse_bits("0101").unwrap());
        assert!(matches!(r.apply("xor", 3, &[a, long]), Err(FunsymError::CarrierViolation { index: 1, .. })));
    }

    #[test]
    fn errors() {
        let mut r = builtin_registry();
        assert!(matches!(r.apply("nope", 1, &[]), Err(FunsymError::UnknownSymbol(_))));
        assert!(matches!(
            r.apply("flipcoin", 1, &[GroundValue::Bool(true)]),
            Err(FunsymError::ArityMismatch { .. })
        ));
        let dup = r.lookup("gen").unwrap().clone();
        assert!(matches!(r.register(dup), Err(FunsymError::DuplicateSymbol(_))));
    }
}
