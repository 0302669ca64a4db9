use alloc::format;
use alloc::vec::Vec;

use super::normalize::all_lifts;
use super::{labeled_steps, Env, SemError};
use crate::ast::{ActionLabel, Process};
use crate::kernel::Distribution;

/// Combinations tried per lifting when searching for a common successor.
const LIFT_CAP: usize = 4096;

/// Which disjunct of the diamond property a pair of transitions satisfies.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DiamondCase {
    /// Both silent, same outcome.
    SameTau,
    /// Both visible on the same channel.
    SameSubject(crate::ast::Name),
    /// Each side can do the other's action, meeting in this distribution.
    Joined(Distribution<Process>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiamondReport {
    pub steps: usize,
    /// `(i, j, case)` for each pair `i < j` of transitions.
    pub pairs: Vec<(usize, usize, DiamondCase)>,
}

impl DiamondReport {
    pub fn joined(&self) -> usize {
        self.pairs.iter().filter(|(_, _, c)| matches!(c, DiamondCase::Joined(_))).count()
    }
}

/// Check every pair of transitions of `p` against the diamond property.
pub fn diamond_check(p: &Process, env: Env<'_>) -> Result<DiamondReport, SemError> {
    let steps = labeled_steps(p, env)?;
    let mut pairs = Vec::new();
    for i in 0..steps.len() {
        for j in i + 1..steps.len() {
            let (a, b) = (&steps[i], &steps[j]);
            let case = match (&a.label, &b.label) {
                (ActionLabel::Tau, ActionLabel::Tau) if a.result == b.result => Some(DiamondCase::SameTau),
                (la, lb) if la.subject().is_some() && la.subject() == lb.subject() => {
                    Some(DiamondCase::SameSubject(la.subject().cloned().unwrap_or_default()))
                }
                _ => None,
            };
            let case = match case {
                Some(c) => c,
                None => {
                    let left = all_lifts(&a.result, &b.label, env, LIFT_CAP)?;
                    let right = all_lifts(&b.result, &a.label, env, LIFT_CAP)?;
                    match left.intersection(&right).next() {
                        Some(f) => DiamondCase::Joined(f.clone()),
                        None => {
                            return Err(SemError::ConfluenceViolation {
                                source_process: format!("{p}"),
                                first: format!("{}", a.label),
                                second: format!("{}", b.label),
                            })
                        }
                    }
                }
            };
            pairs.push((i, j, case));
        }
    }
    Ok(DiamondReport { steps: steps.len(), pairs })
}
