//! Parameter grids, distribution printouts and the golden `.expected` format.
//!
//! A golden file holds one tab-separated record per outcome:
//! `proc  rho  probability  process`, e.g. `FairFlip n=2 1/2 out exp true`
//! with tabs between the fields.
//! Blank lines and lines starting with `//` are ignored.

use std::collections::BTreeMap;
use std::fmt::Write;

use pdb_core::ast::{Name, Process};
use pdb_core::kernel::{Distribution, ParamSubstitution, Prob};
use pdb_core::parser::print_process;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FormatError {
    #[error("bad grid spec `{0}`; expected `var=1,2,3` or `var=lo..hi`")]
    BadGrid(String),
    #[error("grid names `{0}`, which is not a parameter")]
    UnknownParam(String),
    #[error("line {line}: {message}")]
    BadRecord { line: usize, message: String },
}

/// Values used for a parameter the grid does not mention.
pub const DEFAULT_VALUES: [u64; 3] = [1, 2, 3];

fn parse_values(s: &str) -> Option<Vec<u64>> {
    if let Some((lo, hi)) = s.split_once("..") {
        let (lo, hi): (u64, u64) = (lo.trim().parse().ok()?, hi.trim().parse().ok()?);
        return (lo <= hi).then(|| (lo..=hi).collect());
    }
    s.split(',').map(|v| v.trim().parse().ok()).collect()
}

/// Cartesian product of the per-parameter value lists, first parameter
/// varying slowest.
pub fn parse_grid(specs: &[String], params: &[Name]) -> Result<Vec<ParamSubstitution>, FormatError> {
    let mut values: BTreeMap<&str, Vec<u64>> = BTreeMap::new();
    for s in specs {
        let (var, vals) = s.split_once('=').ok_or_else(|| FormatError::BadGrid(s.clone()))?;
        let var = var.trim();
        if !params.iter().any(|p| p == var) {
            return Err(FormatError::UnknownParam(var.to_string()));
        }
        let vals = parse_values(vals).filter(|v| !v.is_empty()).ok_or_else(|| FormatError::BadGrid(s.clone()))?;
        values.insert(var, vals);
    }
    let mut grid = vec![ParamSubstitution::new()];
    for p in params {
        let vals = values.get(p.as_str()).cloned().unwrap_or_else(|| DEFAULT_VALUES.to_vec());
        grid = grid
            .into_iter()
            .flat_map(|r| {
                vals.iter().map(move |v| {
                    let mut r = r.clone();
                    r.insert(p.clone(), *v);
                    r
                })
            })
            .collect();
    }
    Ok(grid)
}

/// `n=2,m=1`, or `-` for the empty substitution.
pub fn rho_label(rho: &ParamSubstitution) -> String {
    if rho.is_empty() {
        return "-".into();
    }
    rho.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(",")
}

/// Outcomes sorted by their printed canonical form.
pub fn dist_entries(d: &Distribution<Process>) -> Vec<(Prob, String)> {
    let mut out: Vec<(Prob, String)> =
        d.iter().map(|(p, w)| (w.clone(), print_process(&p.canonicalize()))).collect();
    out.sort_by(|a, b| a.1.cmp(&b.1));
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExpectedRow {
    pub proc_name: String,
    pub rho: String,
    pub prob: Prob,
    pub process: String,
}

impl ExpectedRow {
    pub fn from_dist(proc_name: &str, rho: &ParamSubstitution, d: &Distribution<Process>) -> Vec<ExpectedRow> {
        dist_entries(d)
            .into_iter()
            .map(|(prob, process)| ExpectedRow { proc_name: proc_name.into(), rho: rho_label(rho), prob, process })
            .collect()
    }
}

pub fn render_expected(rows: &[ExpectedRow]) -> String {
    let mut out = String::new();
    for r in rows {
        let _ = writeln!(out, "{}\t{}\t{}\t{}", r.proc_name, r.rho, r.prob, r.process);
    }
    out
}

pub fn parse_expected(text: &str) -> Result<Vec<ExpectedRow>, FormatError> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() || t.starts_with("//") {
            continue;
        }
        let bad = |message: &str| FormatError::BadRecord { line: i + 1, message: message.into() };
        let fields: Vec<&str> = line.splitn(4, '\t').collect();
        let [proc_name, rho, prob, process] = fields[..] else {
            return Err(bad("expected four tab-separated fields"));
        };
        let prob: Prob = prob.trim().parse().map_err(|_| bad("probability is not a fraction"))?;
        rows.push(ExpectedRow { proc_name: proc_name.into(), rho: rho.into(), prob, process: process.trim().into() });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use pdb_core::kernel::prob;
    use pdb_core::parser::parse_process;

    #[test]
    fn grids() {
        let params = vec!["n".to_string(), "m".to_string()];
        let g = parse_grid(&["n=0..1".into(), "m=5".into()], &params).unwrap();
        assert_eq!(g.iter().map(rho_label).collect::<Vec<_>>(), ["m=5,n=0", "m=5,n=1"]);
        assert_eq!(parse_grid(&[], &["n".into()]).unwrap().len(), 3);
        assert_eq!(parse_grid(&[], &[]).unwrap(), vec![ParamSubstitution::new()]);
        assert!(matches!(parse_grid(&["k=1".into()], &params), Err(FormatError::UnknownParam(_))));
        assert!(matches!(parse_grid(&["n=2..1".into()], &params), Err(FormatError::BadGrid(_))));
        assert!(matches!(parse_grid(&["n".into()], &params), Err(FormatError::BadGrid(_))));
    }

    #[test]
    fn golden_round_trip() {
        let d = Distribution::uniform([parse_process("out exp true").unwrap(), parse_process("out exp false").unwrap()])
            .unwrap();
        let rows = ExpectedRow::from_dist("F", &pdb_core::kernel::rho("n", 2), &d);
        assert_eq!(rows[0].process, "out exp false");
        assert_eq!(rows[0].prob, prob(1, 2));
        let text = render_expected(&rows);
        assert_eq!(text, "F\tn=2\t1/2\tout exp false\nF\tn=2\t1/2\tout exp true\n");
        assert_eq!(parse_expected(&format!("// header\n\n{text}")).unwrap(), rows);
        assert!(parse_expected("F\tn=2\thalf\tout exp true").is_err());
        assert!(parse_expected("F\tn=2").is_err());
    }
}
