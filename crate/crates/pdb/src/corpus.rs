//! The fixture corpus and exploration helpers shared by the CLI and the
//! acceptance suite.

use std::collections::{BTreeSet, VecDeque};
use std::path::{Path, PathBuf};

use pdb_core::ast::Process;
use pdb_core::funsym::Registry;
use pdb_core::kernel::{Distribution, Prob};
use pdb_core::parser::{Decl, DeclKind, SourceUnit};
use pdb_core::semantics::{enabled_reductions, Env, SemError};
use pdb_core::typing::{check_context, check_decl, HoleSpec, LinearEnv, SessionType, TermEnv, TypingDerivation,
    TypingError, UnrestrictedEnv};
use rand::Rng;

use crate::load::{load_unit, LoadError};

/// Fixtures that are expected to type-check.
pub const TYPED_FILES: [&str; 7] =
    ["privk.pdb", "otp.pdb", "prg_reduction.pdb", "fairflip.pdb", "commute.pdb", "collision.pdb", "servers.pdb"];

/// Fixtures with golden `.expected` files.
pub const GOLDEN_FILES: [&str; 4] = ["privk.pdb", "otp.pdb", "prg_reduction.pdb", "fairflip.pdb"];

pub fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

pub fn fixture(name: &str) -> PathBuf {
    fixtures_dir().join(name)
}

/// All `.pdb` files under the fixture directory, sorted.
pub fn fixture_files() -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(fixtures_dir())
        .map(|rd| rd.filter_map(|e| e.ok().map(|e| e.path())).collect())
        .unwrap_or_default();
    v.retain(|p| p.extension().is_some_and(|e| e == "pdb"));
    v.sort();
    v
}

/// A `proc` declaration together with its derivation.
#[derive(Clone, Debug)]
pub struct TypedProc {
    pub file: String,
    pub params: Vec<String>,
    pub decl: Decl,
    pub derivation: TypingDerivation,
}

impl TypedProc {
    pub fn is_closed(&self) -> bool {
        self.decl.gamma.is_empty() && self.decl.delta.is_empty() && self.decl.theta.is_empty()
    }

    pub fn label(&self) -> String {
        format!("{}:{}", self.file, self.decl.name)
    }
}

/// Every typed `proc` of the typed fixtures, in file order.
pub fn typed_procs(reg: &Registry) -> Result<Vec<TypedProc>, LoadError> {
    let mut out = Vec::new();
    for f in TYPED_FILES {
        let unit = load_unit(&fixture(f))?;
        for d in unit.procs() {
            if let Ok(derivation) = check_decl(&unit, d, reg) {
                out.push(TypedProc { file: f.into(), params: unit.params.clone(), decl: d.clone(), derivation });
            }
        }
    }
    Ok(out)
}

/// Contexts are typed as closed processes offering `exp : Bool`, with the
/// hole carrying the judgment of the declaration header.
pub fn check_ctx(unit: &SourceUnit, d: &Decl, reg: &Registry) -> Result<TypingDerivation, TypingError> {
    check_context(
        &unit.params,
        &UnrestrictedEnv::new(),
        &LinearEnv::new(),
        &TermEnv::new(),
        &d.body,
        &HoleSpec::from_decl(d),
        &"exp".into(),
        &SessionType::Bool,
        reg,
    )
}

/// Type-check a declaration of either kind.
pub fn check_any(unit: &SourceUnit, d: &Decl, reg: &Registry) -> Result<TypingDerivation, TypingError> {
    match d.kind {
        DeclKind::Proc => check_decl(unit, d, reg),
        DeclKind::Ctx => check_ctx(unit, d, reg),
    }
}

/// States reachable from `p` by silent steps, in breadth-first order,
/// stopping after `cap` states.
pub fn reachable(p: &Process, env: Env<'_>, cap: usize) -> Result<Vec<Process>, SemError> {
    let start = p.normal();
    let mut seen = BTreeSet::from([start.clone()]);
    let mut queue = VecDeque::from([start]);
    let mut out = Vec::new();
    while let Some(q) = queue.pop_front() {
        if out.len() >= cap {
            break;
        }
        for s in enabled_reductions(&q, env)? {
            for r in s.result.support() {
                if seen.insert(r.clone()) {
                    queue.push_back(r.clone());
                }
            }
        }
        out.push(q);
    }
    Ok(out)
}

/// Pick an outcome of `d` with probability proportional to its weight.
pub fn sample<R: Rng>(d: &Distribution<Process>, rng: &mut R) -> Process {
    let mut x: f64 = rng.gen();
    let entries: Vec<(&Process, &Prob)> = d.iter().collect();
    for (p, w) in &entries {
        let w = num_traits::ToPrimitive::to_f64(*w).unwrap_or(0.0);
        if x < w {
            return (*p).clone();
        }
        x -= w;
    }
    entries.last().map(|(p, _)| (*p).clone()).unwrap_or(Process::Nil)
}

/// Random runs from `p` totalling `choices` reductions; `visit` sees every
/// successor. Each run picks a redex and an outcome at random, restarting
/// from `p` once a run is irreducible.
pub fn random_walk<R: Rng, F>(p: &Process, env: Env<'_>, choices: usize, rng: &mut R, mut visit: F) -> Result<(), SemError>
where
    F: FnMut(&Process),
{
    let start = p.normal();
    let mut cur = start.clone();
    let mut restarts_in_a_row = 0;
    let mut done = 0;
    while done < choices {
        let steps = enabled_reductions(&cur, env)?;
        if steps.is_empty() {
            if cur == start {
                restarts_in_a_row += 1;
                if restarts_in_a_row > 1 {
                    break;
                }
            }
            cur = start.clone();
            continue;
        }
        restarts_in_a_row = 0;
        let st = &steps[rng.gen_range(0..steps.len())];
        cur = sample(&st.result, rng);
        visit(&cur);
        done += 1;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use pdb_core::funsym::builtin_registry;
    use pdb_core::kernel::rho;
    use pdb_core::parser::parse_process;
    use rand::rngs::SmallRng;
    use rand::SeedableRng;

    #[test]
    fn exploration() {
        let reg = builtin_registry();
        let r = rho("n", 1);
        let env = Env::new(&reg, &r);
        let p = parse_process("let b = flipcoin() in out x b").unwrap();
        assert_eq!(reachable(&p, env, 100).unwrap().len(), 3);
        assert_eq!(reachable(&p, env, 1).unwrap().len(), 1);
        let mut seen = 0;
        random_walk(&p, env, 10, &mut SmallRng::seed_from_u64(1), |_| seen += 1).unwrap();
        assert_eq!(seen, 10);
        let mut seen = 0;
        random_walk(&parse_process("out x true").unwrap(), env, 10, &mut SmallRng::seed_from_u64(1), |_| seen += 1)
            .unwrap();
        assert_eq!(seen, 0);
    }

    #[test]
    fn corpus_loads() {
        let reg = builtin_registry();
        let procs = typed_procs(&reg).unwrap();
        assert!(procs.iter().any(|t| t.decl.name == "OtpCoin" && t.is_closed()));
        assert!(fixture_files().len() >= TYPED_FILES.len());
    }
}
