//! Labelled transition system on global types.
//!
//! An interaction can fire at the head of a type, or underneath a prefix
//! whose roles are disjoint from it, provided the same interaction is
//! available in every branch of that prefix.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::syntax::{BaseType, GlobalBranch, GlobalType, Label, Role, TypeTerm};

/// Maximum nesting of prefixes searched for a delayed interaction.
pub const CONTEXT_DEPTH: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct GtLabel {
    pub from: Role,
    pub to: Role,
    pub label: Label,
    pub payload: BaseType,
}

impl fmt::Display for GtLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->{}:{}({})", self.from, self.to, self.label, self.payload)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GtError {
    #[error("no transition labelled {0}")]
    NoSuchTransition(String),
    #[error("prefix nesting exceeds {0} while searching for transitions")]
    DepthExceeded(usize),
    #[error("recursion is not guarded")]
    Unguarded,
}

fn head(g: &GlobalType) -> Result<GlobalType, GtError> {
    let mut g = g.clone();
    for _ in 0..256 {
        if g.as_rec().is_none() {
            return Ok(g);
        }
        g = g.unfold();
    }
    Err(GtError::Unguarded)
}

fn roles_of(g: &GlobalType) -> BTreeSet<Role> {
    crate::syntax::roles(g)
}

/// All transitions of `g`, in a deterministic order.
pub fn gt_transitions(g: &GlobalType) -> Result<Vec<(GtLabel, GlobalType)>, GtError> {
    let mut visiting = Vec::new();
    let mut out = search(g, &BTreeSet::new(), 0, &mut visiting)?;
    let mut seen = BTreeSet::new();
    out.retain(|(l, _)| seen.insert(l.clone()));
    Ok(out)
}

fn search(
    g: &GlobalType,
    blocked: &BTreeSet<Role>,
    depth: usize,
    visiting: &mut Vec<(GlobalType, BTreeSet<Role>)>,
) -> Result<Vec<(GtLabel, GlobalType)>, GtError> {
    let g = head(g)?;
    let GlobalType::Comm { from, to, branches } = &g else {
        return Ok(Vec::new());
    };
    let mut out = Vec::new();
    if !blocked.contains(from) && !blocked.contains(to) {
        for b in branches {
            out.push((
                GtLabel {
                    from: from.clone(),
                    to: to.clone(),
                    label: b.label.clone(),
                    payload: b.payload.clone(),
                },
                b.cont.clone(),
            ));
        }
    }
    let mut inner = blocked.clone();
    inner.insert(from.clone());
    inner.insert(to.clone());
    let live = branches
        .iter()
        .any(|b| !roles_of(&b.cont).is_subset(&inner));
    if !live {
        return Ok(out);
    }
    let key = (g.clone(), blocked.clone());
    if visiting.contains(&key) {
        return Ok(out);
    }
    if depth >= CONTEXT_DEPTH {
        return Err(GtError::DepthExceeded(CONTEXT_DEPTH));
    }
    visiting.push(key);
    let mut per_branch = Vec::with_capacity(branches.len());
    for b in branches {
        per_branch.push(search(&b.cont, &inner, depth + 1, visiting)?);
    }
    visiting.pop();
    for (alpha, _) in &per_branch[0] {
        let mut conts = Vec::with_capacity(branches.len());
        for ts in &per_branch {
            match ts.iter().find(|(l, _)| l == alpha) {
                Some((_, g2)) => conts.push(g2.clone()),
                None => break,
            }
        }
        if conts.len() != branches.len() {
            continue;
        }
        let next = GlobalType::Comm {
            from: from.clone(),
            to: to.clone(),
            branches: branches
                .iter()
                .zip(conts)
                .map(|(b, cont)| GlobalBranch {
                    label: b.label.clone(),
                    payload: b.payload.clone(),
                    cont,
                })
                .collect(),
        };
        if !out.iter().any(|(l, _)| l == alpha) {
            out.push((alpha.clone(), next));
        }
    }
    Ok(out)
}

/// The unique successor of `g` under `label`.
pub fn gt_step(g: &GlobalType, label: &GtLabel) -> Result<GlobalType, GtError> {
    gt_transitions(g)?
        .into_iter()
        .find(|(l, _)| l == label)
        .map(|(_, g)| g)
        .ok_or_else(|| GtError::NoSuchTransition(label.to_string()))
}

/// Transition matching an observed communication, whatever its payload type.
pub fn find_transition(
    g: &GlobalType,
    from: &Role,
    to: &Role,
    label: &Label,
) -> Result<Option<(GtLabel, GlobalType)>, GtError> {
    Ok(gt_transitions(g)?
        .into_iter()
        .find(|(l, _)| &l.from == from && &l.to == to && &l.label == label))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_global;

    fn g(s: &str) -> GlobalType {
        parse_global(s).unwrap()
    }

    #[test]
    fn head_and_delayed() {
        let t = g("p->q:(bit).r->s:(bit).end");
        let ts = gt_transitions(&t).unwrap();
        assert_eq!(ts.len(), 2);
        assert_eq!(ts[0].0.from.as_str(), "p");
        assert_eq!(ts[1].0.from.as_str(), "r");
        assert_eq!(ts[1].1, g("p->q:(bit).end"));
    }

    #[test]
    fn delayed_requires_all_branches() {
        let t = g("p->q:{a.r->s:(bit).end, b.end}");
        assert_eq!(gt_transitions(&t).unwrap().len(), 2);
        let t = g("p->q:{a.r->s:(bit).end, b.r->s:(bit).end}");
        assert_eq!(gt_transitions(&t).unwrap().len(), 3);
    }

    #[test]
    fn recursion_terminates() {
        let t = g("mu t.p->q:{a.t, b.r->s:(bit).end}");
        let ts = gt_transitions(&t).unwrap();
        assert_eq!(ts.len(), 2);
        let t = g("mu t.p->q:(bit).t");
        assert_eq!(gt_transitions(&t).unwrap().len(), 1);
    }

    #[test]
    fn step_unknown() {
        let t = g("p->q:(bit).end");
        let l = GtLabel {
            from: Role::new("q"),
            to: Role::new("p"),
            label: Label::implicit(),
            payload: BaseType::Bit,
        };
        assert!(matches!(gt_step(&t, &l), Err(GtError::NoSuchTransition(_))));
    }
}
