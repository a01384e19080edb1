//! Projection of global types onto roles, with full merging.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::syntax::{
    check_closed, check_contractive, roles, type_equal, GlobalType, LocalBranch, LocalType, Role,
    SyntaxError, TypeTerm,
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind")]
pub enum ProjectionErrorKind {
    MergeClash {
        left: String,
        right: String,
        reason: String,
    },
    UnprojectableRole {
        role: String,
        cause: Box<ProjectionErrorKind>,
    },
    NotContractive {
        var: String,
    },
    IllFormed {
        reason: String,
    },
}

impl ProjectionErrorKind {
    pub fn name(&self) -> &'static str {
        match self {
            ProjectionErrorKind::MergeClash { .. } => "MergeClash",
            ProjectionErrorKind::UnprojectableRole { .. } => "UnprojectableRole",
            ProjectionErrorKind::NotContractive { .. } => "NotContractive",
            ProjectionErrorKind::IllFormed { .. } => "IllFormed",
        }
    }
}

/// Projection failure, located by the interactions leading to it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProjectionError {
    #[serde(flatten)]
    pub kind: ProjectionErrorKind,
    pub path: Vec<String>,
}

impl fmt::Display for ProjectionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn kind(k: &ProjectionErrorKind, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            match k {
                ProjectionErrorKind::MergeClash { left, right, reason } => {
                    write!(f, "cannot merge `{left}` with `{right}`: {reason}")
                }
                ProjectionErrorKind::UnprojectableRole { role, cause } => {
                    write!(f, "role {role} has no projection: ")?;
                    kind(cause, f)
                }
                ProjectionErrorKind::NotContractive { var } => {
                    write!(f, "recursion variable `{var}` is not guarded")
                }
                ProjectionErrorKind::IllFormed { reason } => f.write_str(reason),
            }
        }
        kind(&self.kind, f)?;
        if !self.path.is_empty() {
            write!(f, " (at {})", self.path.join(" / "))?;
        }
        Ok(())
    }
}

impl std::error::Error for ProjectionError {}

fn clash(left: &LocalType, right: &LocalType, reason: &str) -> ProjectionError {
    ProjectionError {
        kind: ProjectionErrorKind::MergeClash {
            left: left.to_string(),
            right: right.to_string(),
            reason: reason.to_string(),
        },
        path: Vec::new(),
    }
}

/// Full merge of two local types.
pub fn merge(a: &LocalType, b: &LocalType) -> Result<LocalType, ProjectionError> {
    merge_with(a, b, &BTreeSet::new())
}

/// `droppable` holds recursion variables the projected role has not acted
/// under since their binder; looping back on such a variable is
/// indistinguishable from the other branch for that role.
fn merge_with(
    a: &LocalType,
    b: &LocalType,
    droppable: &BTreeSet<String>,
) -> Result<LocalType, ProjectionError> {
    match (a, b) {
        (LocalType::Var(t), other) | (other, LocalType::Var(t))
            if droppable.contains(t) && !matches!(other, LocalType::Var(s) if s == t) =>
        {
            Ok(other.clone())
        }
        (LocalType::End, LocalType::End) => Ok(LocalType::End),
        (LocalType::Var(x), LocalType::Var(y)) if x == y => Ok(a.clone()),
        (
            LocalType::IntChoice { to: p, branches: xs },
            LocalType::IntChoice { to: q, branches: ys },
        ) => {
            if p != q {
                return Err(clash(a, b, "internal choices towards different roles"));
            }
            let lx: BTreeSet<_> = xs.iter().map(|x| &x.label).collect();
            let ly: BTreeSet<_> = ys.iter().map(|y| &y.label).collect();
            if lx != ly {
                return Err(clash(a, b, "internal choices with different labels"));
            }
            let mut out = Vec::new();
            for x in xs {
                let y = ys.iter().find(|y| y.label == x.label).expect("same label set");
                if x.payload != y.payload {
                    return Err(clash(a, b, "payload types differ"));
                }
                out.push(LocalBranch {
                    label: x.label.clone(),
                    payload: x.payload.clone(),
                    cont: merge(&x.cont, &y.cont)?,
                });
            }
            Ok(LocalType::IntChoice {
                to: p.clone(),
                branches: out,
            })
        }
        (
            LocalType::ExtChoice { from: p, branches: xs },
            LocalType::ExtChoice { from: q, branches: ys },
        ) => {
            if p != q {
                return Err(clash(a, b, "external choices from different roles"));
            }
            let mut out = Vec::new();
            for x in xs {
                match ys.iter().find(|y| y.label == x.label) {
                    Some(y) => {
                        if x.payload != y.payload {
                            return Err(clash(a, b, "payload types differ on a shared label"));
                        }
                        out.push(LocalBranch {
                            label: x.label.clone(),
                            payload: x.payload.clone(),
                            cont: merge(&x.cont, &y.cont)?,
                        });
                    }
                    None => out.push(x.clone()),
                }
            }
            for y in ys {
                if !xs.iter().any(|x| x.label == y.label) {
                    out.push(y.clone());
                }
            }
            Ok(LocalType::ExtChoice {
                from: p.clone(),
                branches: out,
            })
        }
        (LocalType::Rec { var: x, body: bx }, LocalType::Rec { var: y, body: by }) => {
            let by = if x == y {
                (**by).clone()
            } else {
                by.subst(y, &LocalType::Var(x.clone()))
            };
            Ok(LocalType::Rec {
                var: x.clone(),
                body: Box::new(merge(bx, &by)?),
            })
        }
        // A variable next to a copy of its own binder, as left by unfolding
        // the global type.
        (LocalType::Var(t), r @ LocalType::Rec { var, .. }) | (r @ LocalType::Rec { var, .. }, LocalType::Var(t))
            if t == var =>
        {
            Ok(r.clone())
        }
        (r @ LocalType::Rec { .. }, other) | (other, r @ LocalType::Rec { .. })
            if !matches!(other, LocalType::Var(_)) =>
        {
            merge_with(&r.unfold(), other, droppable)
        }
        _ if type_equal(a, b) => Ok(a.clone()),
        _ => Err(clash(a, b, "incompatible shapes")),
    }
}

/// Projects `g` onto `r`.
pub fn project(g: &GlobalType, r: &Role) -> Result<LocalType, ProjectionError> {
    check_contractive(g).map_err(syntax_error)?;
    check_closed(g).map_err(syntax_error)?;
    proj(g, r, &BTreeSet::new())
}

fn syntax_error(e: SyntaxError) -> ProjectionError {
    let kind = match e {
        SyntaxError::NotContractive(var) => ProjectionErrorKind::NotContractive { var },
        other => ProjectionErrorKind::IllFormed {
            reason: other.to_string(),
        },
    };
    ProjectionError {
        kind,
        path: Vec::new(),
    }
}

fn at(mut e: ProjectionError, step: String) -> ProjectionError {
    e.path.insert(0, step);
    e
}

fn proj(g: &GlobalType, r: &Role, droppable: &BTreeSet<String>) -> Result<LocalType, ProjectionError> {
    match g {
        GlobalType::Comm { from, to, branches } => {
            let step = |l: &crate::syntax::Label| format!("{from}->{to}:{l}");
            if r == from || r == to {
                let mut out = Vec::new();
                for b in branches {
                    let cont = proj(&b.cont, r, &BTreeSet::new()).map_err(|e| at(e, step(&b.label)))?;
                    out.push(LocalBranch {
                        label: b.label.clone(),
                        payload: b.payload.clone(),
                        cont,
                    });
                }
                Ok(if r == from {
                    LocalType::IntChoice {
                        to: to.clone(),
                        branches: out,
                    }
                } else {
                    LocalType::ExtChoice {
                        from: from.clone(),
                        branches: out,
                    }
                })
            } else {
                let mut acc: Option<LocalType> = None;
                for b in branches {
                    let t = proj(&b.cont, r, droppable).map_err(|e| at(e, step(&b.label)))?;
                    acc = Some(match acc {
                        None => t,
                        Some(prev) => merge_with(&prev, &t, droppable)
                            .map_err(|e| at(e, format!("{from}->{to}")))?,
                    });
                }
                Ok(acc.unwrap_or(LocalType::End))
            }
        }
        GlobalType::Rec { var, body } => {
            if roles(body).contains(r) || !g.free_type_vars().is_empty() {
                let mut d = droppable.clone();
                d.insert(var.clone());
                let t = proj(body, r, &d)?;
                Ok(normalize_rec(var, t))
            } else {
                Ok(LocalType::End)
            }
        }
        GlobalType::Var(v) => Ok(LocalType::Var(v.clone())),
        GlobalType::End => Ok(LocalType::End),
    }
}

/// `mu t.t` becomes `end`; `mu t.T` with `t` unused becomes `T`.
fn normalize_rec(var: &str, body: LocalType) -> LocalType {
    match body {
        LocalType::Var(ref v) if v == var => LocalType::End,
        b if !b.free_type_vars().contains(var) => b,
        b => LocalType::Rec {
            var: var.to_string(),
            body: Box::new(b),
        },
    }
}

/// Contractive, closed and projectable onto every role.
pub fn well_formed(g: &GlobalType) -> Result<(), Vec<ProjectionError>> {
    if let Err(e) = check_contractive(g) {
        return Err(vec![syntax_error(e)]);
    }
    if let Err(e) = check_closed(g) {
        return Err(vec![syntax_error(e)]);
    }
    let errs: Vec<_> = roles(g)
        .into_iter()
        .filter_map(|r| {
            proj(g, &r, &BTreeSet::new()).err().map(|e| ProjectionError {
                kind: ProjectionErrorKind::UnprojectableRole {
                    role: r.to_string(),
                    cause: Box::new(e.kind),
                },
                path: e.path,
            })
        })
        .collect();
    if errs.is_empty() {
        Ok(())
    } else {
        Err(errs)
    }
}
