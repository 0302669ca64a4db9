//! The cryptographic experiments: PRIVK for a scheme, the OTP and PRG
//! instances, key sources, and the distinguisher used in the reduction from
//! PRG security to OTP secrecy.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use num_traits::{Signed, Zero};

use crate::ast::{struct_congruent, Name, Process};
use crate::equiv::observe;
use crate::funsym::{FunsymError, Kind, Registry};
use crate::kernel::{GroundType, ParamSubstitution, Polynomial, Prob};
use crate::parser::{parse_process, parse_type};
use crate::typing::{check_process, LinearEnv, SessionType, TermEnv, TypingError, UnrestrictedEnv};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CryptoError {
    #[error("unknown function symbol `{0}`")]
    UnknownSymbol(String),
    #[error("`{name}` does not have the signature the scheme needs")]
    BadSignature { name: String },
    #[error("adversary is ill-typed: {0}")]
    IllTypedAdversary(TypingError),
    #[error(transparent)]
    Typing(#[from] TypingError),
    #[error("evaluation failed: {0}")]
    Eval(String),
}

/// `Π = (Gen, Enc, Dec)` given by function-symbol names.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncryptionScheme {
    pub name: String,
    pub gen: String,
    pub enc: String,
    pub dec: Option<String>,
}

impl EncryptionScheme {
    pub fn otp() -> Self {
        EncryptionScheme { name: "OTP".into(), gen: "gen".into(), enc: "otp_enc".into(), dec: Some("xor".into()) }
    }

    /// Encrypt with the key stretched by the registered PRG.
    pub fn prg() -> Self {
        EncryptionScheme { name: "PRG".into(), gen: "gen".into(), enc: "prg_enc".into(), dec: None }
    }

    fn validate(&self, reg: &Registry) -> Result<(), CryptoError> {
        let s = |n: &str| {
            reg.lookup(n).map_err(|e| match e {
                FunsymError::UnknownSymbol(n) => CryptoError::UnknownSymbol(n),
                _ => CryptoError::UnknownSymbol(n.to_string()),
            })
        };
        let str_n = GroundType::Str(Polynomial::var("n"));
        let g = s(&self.gen)?;
        if !g.args.is_empty() || g.result != str_n {
            return Err(CryptoError::BadSignature { name: self.gen.clone() });
        }
        let e = s(&self.enc)?;
        if !e.kinds_match(&[Kind::Str, Kind::Str]) || e.result != str_n {
            return Err(CryptoError::BadSignature { name: self.enc.clone() });
        }
        if let Some(d) = &self.dec {
            s(d)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExperimentBundle {
    pub experiment: Process,
    /// Type of `adv` in the experiment's linear context.
    pub interface: SessionType,
    pub result: Name,
}

/// `Str[n] * Str[n] * (Str[n] -o Bool)`
pub fn adversary_interface() -> SessionType {
    parse_type("Str[n] * Str[n] * (Str[n] -o Bool)").expect("well-formed type")
}

fn parse(src: &str) -> Process {
    parse_process(src).expect("builder sources parse")
}

/// The experiment body after the key is in `k`; the coin picks `m1` on true.
fn privk_source(key: &str, enc: &str) -> String {
    let cont = "send adv (new y). (out y c | in adv (g). let r = eq(g, b) in out exp r)";
    format!(
        "recv adv (m0). in m0 (m0v). recv adv (m1). in m1 (m1v). {key} let b = flipcoin() in \
         if b then let c = {enc}(k, m1v) in {cont} else let c = {enc}(k, m0v) in {cont}"
    )
}

/// `PRIVK_Π`, typable at `adv : Str[n] * Str[n] * (Str[n] -o Bool) ⊢ :: exp : Bool`.
pub fn build_privk(scheme: &EncryptionScheme, reg: &Registry) -> Result<ExperimentBundle, CryptoError> {
    scheme.validate(reg)?;
    let src = privk_source(&format!("let k = {}() in", scheme.gen), &scheme.enc);
    Ok(ExperimentBundle { experiment: parse(&src), interface: adversary_interface(), result: "exp".into() })
}

/// The OTP experiment reading its key from channel `out`.
pub fn build_privkeyk_otp() -> Process {
    parse(&privk_source("in out (k).", "xor"))
}

/// Sends all-zeros and all-ones, then guesses with a coin.
pub fn adversary_coin() -> Process {
    parse(
        "let z = zeros() in let o = ones() in \
         send adv (new m0). (out m0 z | send adv (new m1). (out m1 o | \
         recv adv (c). in c (cv). let g = flipcoin() in out adv g))",
    )
}

/// Guesses `m0` exactly when the ciphertext equals it.
pub fn adversary_compare() -> Process {
    parse(
        "let z = zeros() in let o = ones() in \
         send adv (new m0). (out m0 z | send adv (new m1). (out m1 o | \
         recv adv (c). in c (cv). let e = eq(cv, z) in if e then out adv false else out adv true))",
    )
}

/// Always answers `true`.
pub fn adversary_constant() -> Process {
    parse(
        "let z = zeros() in let o = ones() in \
         send adv (new m0). (out m0 z | send adv (new m1). (out m1 o | \
         recv adv (c). in c (cv). out adv true))",
    )
}

pub fn adversaries() -> Vec<(&'static str, Process)> {
    alloc::vec![("coin", adversary_coin()), ("compare", adversary_compare()), ("constant", adversary_constant())]
}

/// `let b = flipcoin() in out x b`
pub fn build_fairflip(channel: &str) -> Process {
    parse(&format!("let b = flipcoin() in out {channel} b"))
}

/// `let k = rand() in out out k`
pub fn build_outr() -> Process {
    parse("let k = rand() in out out k")
}

/// `let s = rand() in let k = g(s) in out out k`
pub fn build_outpr(g: &str, reg: &Registry) -> Result<Process, CryptoError> {
    let sym = reg.lookup(g).map_err(|_| CryptoError::UnknownSymbol(g.into()))?;
    let str_n = GroundType::Str(Polynomial::var("n"));
    if sym.args != [str_n.clone()] || sym.result != str_n {
        return Err(CryptoError::BadSignature { name: g.into() });
    }
    Ok(parse(&format!("let s = rand() in let k = {g}(s) in out out k")))
}

fn one(x: &str, t: SessionType) -> LinearEnv {
    [(x.to_string(), t)].into_iter().collect()
}

fn params() -> Vec<Name> {
    alloc::vec!["n".into()]
}

/// `(νadv)(PRIVKEYK | ADV)`, once `ADV` checks at `⊢ ADV :: adv : interface`.
pub fn build_distinguisher(adv: &Process, reg: &Registry) -> Result<Process, CryptoError> {
    check_process(
        &params(),
        &UnrestrictedEnv::new(),
        &LinearEnv::new(),
        &TermEnv::new(),
        adv,
        &"adv".into(),
        &adversary_interface(),
        reg,
    )
    .map_err(CryptoError::IllTypedAdversary)?;
    Ok(Process::res("adv", Process::par(build_privkeyk_otp(), adv.clone())))
}

/// `(νadv)(E | ADV)`
pub fn compose(experiment: &Process, adv: &Process) -> Process {
    Process::res("adv", Process::par(experiment.clone(), adv.clone()))
}

/// `(νout)(K | D)` for a key source `K`.
pub fn with_key_source(source: &Process, d: &Process) -> Process {
    Process::res("out", Process::par(source.clone(), d.clone()))
}

/// Type-check a closed experiment `⊢ P :: exp : Bool`.
pub fn check_closed_experiment(p: &Process, reg: &Registry) -> Result<(), CryptoError> {
    check_process(
        &params(),
        &UnrestrictedEnv::new(),
        &LinearEnv::new(),
        &TermEnv::new(),
        p,
        &"exp".into(),
        &SessionType::Bool,
        reg,
    )?;
    Ok(())
}

/// Type-check `out : Str[n] ⊢ D :: exp : Bool`.
pub fn check_distinguisher(d: &Process, reg: &Registry) -> Result<(), CryptoError> {
    check_process(
        &params(),
        &UnrestrictedEnv::new(),
        &one("out", SessionType::Str(Polynomial::var("n"))),
        &TermEnv::new(),
        d,
        &"exp".into(),
        &SessionType::Bool,
        reg,
    )?;
    Ok(())
}

/// One line of the reduction from PRG security to OTP secrecy.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SkeletonStep {
    pub description: String,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SkeletonGap {
    pub description: String,
    pub adversary: String,
    pub rho: ParamSubstitution,
    pub gap: Prob,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SkeletonReport {
    pub steps: Vec<SkeletonStep>,
    pub gaps: Vec<SkeletonGap>,
}

impl SkeletonReport {
    pub fn all_ok(&self) -> bool {
        self.steps.iter().all(|s| s.ok)
    }

    pub fn max_gap(&self) -> Prob {
        self.gaps.iter().map(|g| g.gap.clone()).max().unwrap_or_else(Prob::zero)
    }
}

fn rho_label(r: &ParamSubstitution) -> String {
    r.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(",")
}

fn true_prob(p: &Process, reg: &Registry, r: &ParamSubstitution) -> Result<Prob, CryptoError> {
    let o = observe(p, &"exp".into(), reg, r).map_err(|e| CryptoError::Eval(format!("{e}")))?;
    if !o.residual.is_zero() {
        return Err(CryptoError::Eval(format!("residual mass {} on {p}", o.residual)));
    }
    Ok(o.p_true)
}

/// Replay the reduction: build `D_ADV` for every fixture adversary, confirm
/// the scope rearrangements, and measure both gaps on `grid`.
pub fn proof_skeleton(reg: &Registry, grid: &[ParamSubstitution]) -> Result<SkeletonReport, CryptoError> {
    let mut rep = SkeletonReport::default();
    let outr = build_outr();
    let outpr = build_outpr("g_prg", reg)?;
    let privk_prg = build_privk(&EncryptionScheme::prg(), reg)?.experiment;
    let flip = build_fairflip("exp");
    for (name, adv) in adversaries() {
        let d = build_distinguisher(&adv, reg)?;
        rep.steps.push(SkeletonStep {
            description: format!("out : Str[n] |- D_{name} :: exp : Bool"),
            ok: check_distinguisher(&d, reg).is_ok(),
        });
        for (label, source) in [("OUTPR", &outpr), ("OUTR", &outr)] {
            let lhs = with_key_source(source, &d);
            let rhs = compose(&with_key_source(source, &build_privkeyk_otp()), &adv);
            rep.steps.push(SkeletonStep {
                description: format!("(new out)({label} | D_{name}) == (new adv)((new out)({label} | PRIVKEYK) | {name})"),
                ok: struct_congruent(&lhs, &rhs),
            });
        }
        let game = compose(&privk_prg, &adv);
        rep.steps.push(SkeletonStep {
            description: format!("|- PRIVK_PRG with {name} :: exp : Bool"),
            ok: check_closed_experiment(&game, reg).is_ok(),
        });
        for r in grid {
            let with_prg = true_prob(&with_key_source(&outpr, &d), reg, r)?;
            let with_rand = true_prob(&with_key_source(&outr, &d), reg, r)?;
            let fair = true_prob(&flip, reg, r)?;
            let direct = true_prob(&game, reg, r)?;
            rep.steps.push(SkeletonStep {
                description: format!("PRIVK_PRG with {name} agrees with (new out)(OUTPR | D_{name}) at {}", rho_label(r)),
                ok: direct == with_prg,
            });
            rep.gaps.push(SkeletonGap {
                description: "OUTPR vs OUTR under D".into(),
                adversary: name.into(),
                rho: r.clone(),
                gap: (&with_prg - &with_rand).abs(),
            });
            rep.gaps.push(SkeletonGap {
                description: "OUTR under D vs FAIRFLIP".into(),
                adversary: name.into(),
                rho: r.clone(),
                gap: (&with_rand - &fair).abs(),
            });
        }
    }
    Ok(rep)
}
