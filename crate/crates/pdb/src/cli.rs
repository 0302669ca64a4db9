//! `pdb check|run|weight|equiv|diamond|demo-crypto`.
//!
//! Exit codes: 0 ok, 1 type error, 2 parse error, 3 resource bound or
//! ceiling exceeded, 4 equivalence or confluence refuted.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_traits::Zero;

use pdb_core::ast::{LinearContext, Name, Process};
use pdb_core::cryptolib::proof_skeleton;
use pdb_core::equiv::obs_equiv_sampled;
use pdb_core::funsym::{builtin_registry, Registry};
use pdb_core::kernel::{ParamSubstitution, Prob};
use pdb_core::parser::{parse_process, Decl, DeclKind, SourceUnit};
use pdb_core::semantics::{diamond_check, normalize, Env, NormalizeOptions, Scheduler, SemError, DEFAULT_CEILING};
use pdb_core::typing::{validate_derivation, TypingDerivation};

use crate::corpus::{check_any, reachable};
use crate::format::{dist_entries, parse_grid, rho_label};
use crate::load::{load_unit, LoadError};

pub const EXIT_OK: u8 = 0;
pub const EXIT_TYPE: u8 = 1;
pub const EXIT_PARSE: u8 = 2;
pub const EXIT_RESOURCE: u8 = 3;
pub const EXIT_REFUTED: u8 = 4;

/// States explored per process by `diamond`.
const DIAMOND_STATES: usize = 20_000;

#[derive(Parser, Debug)]
#[command(name = "pdb", version, about = "Type-check and run session-typed probabilistic processes")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    #[default]
    Text,
    /// Tab-separated records.
    Lines,
}

#[derive(Args, Debug, Clone, Default)]
struct GridArgs {
    /// Parameter values, `n=1,2,3` or `n=0..4`; repeat for several parameters.
    #[arg(long = "grid", value_name = "VAR=VALUES")]
    grid: Vec<String>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Type-check every declaration of a file.
    Check {
        file: PathBuf,
        /// Print W(π) for each derivation.
        #[arg(long)]
        emit_weight: bool,
        /// Print each derivation as an s-expression.
        #[arg(long)]
        emit_derivation: bool,
        #[arg(long, value_enum, default_value_t)]
        format: OutputFormat,
    },
    /// Normalize processes and print their exact final distributions.
    Run {
        file: PathBuf,
        /// Declarations to run; all closed `proc`s by default.
        #[arg(long = "proc")]
        procs: Vec<String>,
        #[command(flatten)]
        grid: GridArgs,
        /// `leftmost`, `rightmost` or `seed:N`.
        #[arg(long, default_value = "leftmost")]
        sched: String,
        #[arg(long, default_value_t = DEFAULT_CEILING)]
        ceiling: u64,
        #[arg(long, value_enum, default_value_t)]
        format: OutputFormat,
    },
    /// Print W(π) and its values on the grid.
    Weight {
        file: PathBuf,
        #[arg(long = "proc")]
        procs: Vec<String>,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, value_enum, default_value_t)]
        format: OutputFormat,
    },
    /// Compare two processes under closing contexts.
    Equiv {
        /// Declaration name in `--file`, or process source.
        left: String,
        right: String,
        #[arg(long)]
        file: Option<PathBuf>,
        /// Context declarations from `--file`; the empty context by default.
        #[arg(long = "ctx")]
        contexts: Vec<String>,
        #[arg(long, default_value = "exp")]
        channel: String,
        /// Largest gap accepted, as a fraction.
        #[arg(long, default_value = "0")]
        eps: String,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, value_enum, default_value_t)]
        format: OutputFormat,
    },
    /// Check the diamond property on every reachable state.
    Diamond {
        file: PathBuf,
        #[arg(long = "proc")]
        procs: Vec<String>,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, value_enum, default_value_t)]
        format: OutputFormat,
    },
    /// Replay the reduction from PRG security to the secrecy of the PRG scheme.
    DemoCrypto {
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, value_enum, default_value_t)]
        format: OutputFormat,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure { code, message: message.into() }
    }
}

impl From<LoadError> for Failure {
    fn from(e: LoadError) -> Self {
        let code = match e {
            LoadError::Io { .. } => EXIT_PARSE,
            LoadError::Parse { .. } => EXIT_PARSE,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<crate::format::FormatError> for Failure {
    fn from(e: crate::format::FormatError) -> Self {
        Failure::new(EXIT_PARSE, e.to_string())
    }
}

impl From<SemError> for Failure {
    fn from(e: SemError) -> Self {
        let code = match e {
            SemError::StepCeilingExceeded { .. } | SemError::BoundViolated { .. } => EXIT_RESOURCE,
            SemError::ConfluenceViolation { .. } => EXIT_REFUTED,
            _ => EXIT_TYPE,
        };
        Failure::new(code, e.to_string())
    }
}

struct Out<'a> {
    w: &'a mut dyn Write,
    format: OutputFormat,
}

impl Out<'_> {
    /// Emit a record as text or as a tab-separated line.
    fn record(&mut self, fields: &[&str], text: String) {
        let _ = match self.format {
            OutputFormat::Lines => writeln!(self.w, "{}", fields.join("\t")),
            OutputFormat::Text => writeln!(self.w, "{text}"),
        };
    }
}

/// Parse `args` (program name first), run the command, and return the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARSE } else { EXIT_OK };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    let reg = builtin_registry();
    let res = match cli.cmd {
        Cmd::Check { file, emit_weight, emit_derivation, format } => {
            cmd_check(&file, emit_weight, emit_derivation, &reg, &mut Out { w: out, format })
        }
        Cmd::Run { file, procs, grid, sched, ceiling, format } => {
            cmd_run(&file, &procs, &grid.grid, &sched, ceiling, &reg, &mut Out { w: out, format })
        }
        Cmd::Weight { file, procs, grid, format } => cmd_weight(&file, &procs, &grid.grid, &reg, &mut Out { w: out, format }),
        Cmd::Equiv { left, right, file, contexts, channel, eps, grid, format } => {
            let q = EquivQuery { left, right, file, contexts, channel, eps, grid: grid.grid };
            cmd_equiv(&q, &reg, &mut Out { w: out, format })
        }
        Cmd::Diamond { file, procs, grid, format } => cmd_diamond(&file, &procs, &grid.grid, &reg, &mut Out { w: out, format }),
        Cmd::DemoCrypto { grid, format } => cmd_demo_crypto(&grid.grid, &reg, &mut Out { w: out, format }),
    };
    match res {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn judgment(d: &Decl) -> String {
    let gamma: Vec<String> = d.gamma.iter().map(|(u, p, a)| format!("{u} :[{p}] {a}")).collect();
    let delta: Vec<String> = d.delta.iter().map(|(x, a)| format!("{x} : {a}")).collect();
    let theta: Vec<String> = d.theta.iter().map(|(x, b)| format!("{x} : {b}")).collect();
    let part = |v: Vec<String>| if v.is_empty() { "·".to_string() } else { v.join(", ") };
    let hole = if d.kind == DeclKind::Ctx { "[]" } else { d.name.as_str() };
    format!(
        "{}; {}; {} |- {hole} :: {} : {}",
        part(gamma),
        part(delta),
        part(theta),
        d.offered.0,
        d.offered.1
    )
}

fn cmd_check(
    file: &Path,
    emit_weight: bool,
    emit_derivation: bool,
    reg: &Registry,
    out: &mut Out<'_>,
) -> Result<u8, Failure> {
    let unit = load_unit(file)?;
    let mut code = EXIT_OK;
    for d in &unit.decls {
        let kind = if d.kind == DeclKind::Proc { "proc" } else { "ctx" };
        let res = check_any(&unit, d, reg).and_then(|der| {
            validate_derivation(&der, reg)
                .map(|_| der)
                .map_err(|e| pdb_core::typing::TypingError::NoRuleApplies(format!("invalid derivation: {e}")))
        });
        match res {
            Ok(der) => {
                let j = judgment(d);
                out.record(&["check", kind, &d.name, "ok", &j], format!("ok     {kind} {}: {j}", d.name));
                if emit_weight {
                    let w = der.weight.to_string();
                    out.record(&["weight", &d.name, &w], format!("       W = {w}"));
                }
                if emit_derivation {
                    let s = der.to_sexpr();
                    out.record(&["derivation", &d.name, &s], format!("       {s}"));
                }
            }
            Err(e) => {
                code = EXIT_TYPE;
                let m = e.to_string();
                out.record(&["check", kind, &d.name, "error", &m], format!("error  {kind} {}: {m}", d.name));
            }
        }
    }
    Ok(code)
}

fn parse_sched(s: &str) -> Result<Scheduler, Failure> {
    match s {
        "leftmost" => Ok(Scheduler::Leftmost),
        "rightmost" => Ok(Scheduler::Rightmost),
        _ => s
            .strip_prefix("seed:")
            .or_else(|| s.strip_prefix("seeded:"))
            .and_then(|n| n.parse().ok())
            .map(Scheduler::Seeded)
            .ok_or_else(|| Failure::new(EXIT_PARSE, format!("unknown scheduler `{s}`"))),
    }
}

/// The named `proc`s, or every closed one.
fn select<'u>(unit: &'u SourceUnit, names: &[String]) -> Result<Vec<&'u Decl>, Failure> {
    if names.is_empty() {
        return Ok(unit
            .procs()
            .filter(|d| d.gamma.is_empty() && d.delta.is_empty() && d.theta.is_empty())
            .collect());
    }
    names
        .iter()
        .map(|n| unit.decl(n).ok_or_else(|| Failure::new(EXIT_PARSE, format!("no declaration `{n}`"))))
        .collect()
}

fn derivation(unit: &SourceUnit, d: &Decl, reg: &Registry) -> Option<TypingDerivation> {
    check_any(unit, d, reg).ok()
}

fn cmd_run(
    file: &Path,
    names: &[String],
    grid: &[String],
    sched: &str,
    ceiling: u64,
    reg: &Registry,
    out: &mut Out<'_>,
) -> Result<u8, Failure> {
    let unit = load_unit(file)?;
    let sched = parse_sched(sched)?;
    let grid = parse_grid(grid, &unit.params)?;
    for d in select(&unit, names)? {
        let der = derivation(&unit, d, reg);
        for r in &grid {
            let bound = match &der {
                Some(der) => Some(der.weight.eval(r).map_err(|e| Failure::new(EXIT_TYPE, e.to_string()))?),
                None => None,
            };
            let rep = normalize(&d.body, sched, Env::new(reg, r), NormalizeOptions { bound, ceiling })
                .map_err(|e| Failure::from(e).with_context(&d.name, r))?;
            let rl = rho_label(r);
            if out.format == OutputFormat::Text {
                let _ = writeln!(out.w, "{} {rl}", d.name);
            }
            for (w, p) in dist_entries(&rep.final_dist) {
                out.record(&["dist", &d.name, &rl, &w.to_string(), &p], format!("  {w} {p}"));
            }
            let b = bound.map_or("-".to_string(), |b| b.to_string());
            let c = rep.total_cost.to_string();
            let text = match bound {
                Some(_) => format!("  cost {c} <= bound {b}"),
                None => format!("  cost {c} (untyped, no bound)"),
            };
            out.record(&["cost", &d.name, &rl, &c, &b], text);
        }
    }
    Ok(EXIT_OK)
}

impl Failure {
    fn with_context(self, name: &str, r: &ParamSubstitution) -> Self {
        Failure { message: format!("{name} at {}: {}", rho_label(r), self.message), ..self }
    }
}

fn cmd_weight(file: &Path, names: &[String], grid: &[String], reg: &Registry, out: &mut Out<'_>) -> Result<u8, Failure> {
    let unit = load_unit(file)?;
    let grid = parse_grid(grid, &unit.params)?;
    let decls: Vec<&Decl> = if names.is_empty() { unit.procs().collect() } else { select(&unit, names)? };
    let mut code = EXIT_OK;
    for d in decls {
        match check_any(&unit, d, reg) {
            Ok(der) => {
                let w = der.weight.to_string();
                out.record(&["weight", &d.name, &w], format!("{}: W = {w}", d.name));
                for r in &grid {
                    let v = der.weight.eval(r).map_err(|e| Failure::new(EXIT_TYPE, e.to_string()))?.to_string();
                    let rl = rho_label(r);
                    out.record(&["value", &d.name, &rl, &v], format!("  {rl}: {v}"));
                }
            }
            Err(e) => {
                code = EXIT_TYPE;
                let m = e.to_string();
                out.record(&["weight", &d.name, "error", &m], format!("{}: {m}", d.name));
            }
        }
    }
    Ok(code)
}

struct EquivQuery {
    left: String,
    right: String,
    file: Option<PathBuf>,
    contexts: Vec<String>,
    channel: String,
    eps: String,
    grid: Vec<String>,
}

fn cmd_equiv(q: &EquivQuery, reg: &Registry, out: &mut Out<'_>) -> Result<u8, Failure> {
    let unit = match &q.file {
        Some(f) => load_unit(f)?,
        None => SourceUnit { params: vec!["n".into()], ..SourceUnit::default() },
    };
    let resolve = |s: &str| -> Result<Process, Failure> {
        match unit.decl(s) {
            Some(d) => Ok(d.body.clone()),
            None => parse_process(s).map_err(|e| Failure::new(EXIT_PARSE, format!("`{s}`: {e}"))),
        }
    };
    let (p, r) = (resolve(&q.left)?, resolve(&q.right)?);
    let mut ctxs = Vec::new();
    let mut names = Vec::new();
    for c in &q.contexts {
        let d = unit
            .decl(c)
            .filter(|d| d.kind == DeclKind::Ctx)
            .ok_or_else(|| Failure::new(EXIT_PARSE, format!("no context `{c}`")))?;
        ctxs.push(LinearContext::new(d.body.clone()).map_err(|e| Failure::new(EXIT_PARSE, e.to_string()))?);
        names.push(c.clone());
    }
    if ctxs.is_empty() {
        ctxs.push(LinearContext::identity());
        names.push("[]".into());
    }
    let eps: Prob = q.eps.parse().map_err(|_| Failure::new(EXIT_PARSE, format!("bad epsilon `{}`", q.eps)))?;
    if eps < Prob::zero() || eps > Prob::from_integer(1.into()) {
        return Err(Failure::new(EXIT_PARSE, "epsilon must lie in [0, 1]"));
    }
    let grid = parse_grid(&q.grid, &unit.params)?;
    let x: Name = q.channel.clone();
    let verdicts = obs_equiv_sampled(&p, &r, &ctxs, &x, &grid, &eps, reg)?;
    let mut code = EXIT_OK;
    for v in verdicts {
        let rl = rho_label(&v.rho);
        let verdict = if v.within { "within" } else { "refuted" };
        if !v.within {
            code = EXIT_REFUTED;
        }
        let (gap, name) = (v.gap.to_string(), &names[v.context]);
        out.record(&["gap", name, &rl, &gap, verdict], format!("{name} {rl}: gap {gap} ({verdict})"));
    }
    Ok(code)
}

fn cmd_diamond(file: &Path, names: &[String], grid: &[String], reg: &Registry, out: &mut Out<'_>) -> Result<u8, Failure> {
    let unit = load_unit(file)?;
    let grid = parse_grid(grid, &unit.params)?;
    for d in select(&unit, names)? {
        for r in &grid {
            let env = Env::new(reg, r);
            let states = reachable(&d.body, env, DIAMOND_STATES)?;
            let (mut pairs, mut joined) = (0, 0);
            for s in &states {
                let rep = diamond_check(s, env).map_err(|e| Failure::from(e).with_context(&d.name, r))?;
                pairs += rep.pairs.len();
                joined += rep.joined();
            }
            let rl = rho_label(r);
            let (n, p, j) = (states.len().to_string(), pairs.to_string(), joined.to_string());
            out.record(
                &["diamond", &d.name, &rl, &n, &p, &j, "ok"],
                format!("{} {rl}: {n} states, {p} pairs, {j} joined: ok", d.name),
            );
        }
    }
    Ok(EXIT_OK)
}

fn cmd_demo_crypto(grid: &[String], reg: &Registry, out: &mut Out<'_>) -> Result<u8, Failure> {
    let grid = parse_grid(grid, &["n".into()])?;
    let rep = proof_skeleton(reg, &grid).map_err(|e| Failure::new(EXIT_TYPE, e.to_string()))?;
    let mut code = EXIT_OK;
    for s in &rep.steps {
        let v = if s.ok { "ok" } else { "FAILED" };
        if !s.ok {
            code = EXIT_REFUTED;
        }
        out.record(&["step", v, &s.description], format!("{v:<6} {}", s.description));
    }
    for g in &rep.gaps {
        let (rl, gap) = (rho_label(&g.rho), g.gap.to_string());
        if !g.gap.is_zero() {
            code = EXIT_REFUTED;
        }
        out.record(
            &["gap", &g.description, g.adversary.as_str(), &rl, &gap],
            format!("gap    {} [{}] {rl}: {gap}", g.description, g.adversary),
        );
    }
    Ok(code)
}
