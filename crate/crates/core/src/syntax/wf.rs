//! Structural operations on types and processes: roles, free variables,
//! contractivity, unfolding and equi-recursive equality.

use std::collections::{BTreeSet, HashSet};

use super::ast::*;
use super::SyntaxError;

/// Participants of a global type.
pub fn roles(g: &GlobalType) -> BTreeSet<Role> {
    let mut out = BTreeSet::new();
    collect_roles(g, &mut out);
    out
}

fn collect_roles(g: &GlobalType, out: &mut BTreeSet<Role>) {
    match g {
        GlobalType::Comm { from, to, branches } => {
            out.insert(from.clone());
            out.insert(to.clone());
            for b in branches {
                collect_roles(&b.cont, out);
            }
        }
        GlobalType::Rec { body, .. } => collect_roles(body, out),
        GlobalType::Var(_) | GlobalType::End => {}
    }
}

/// Operations shared by global and local types.
pub trait TypeTerm: Sized + Clone {
    fn free_type_vars(&self) -> BTreeSet<String>;
    /// Capture-avoiding substitution of `with` for the free variable `var`.
    fn subst(&self, var: &str, with: &Self) -> Self;
    /// One unfolding step `mu t.T => T[mu t.T/t]`; other terms are unchanged.
    fn unfold(&self) -> Self;
    fn as_rec(&self) -> Option<(&str, &Self)>;
}

fn fresh_var(base: &str, avoid: &BTreeSet<String>) -> String {
    (0..)
        .map(|k| format!("{base}{k}"))
        .find(|v| !avoid.contains(v))
        .expect("infinite supply")
}

impl TypeTerm for GlobalType {
    fn free_type_vars(&self) -> BTreeSet<String> {
        match self {
            GlobalType::Comm { branches, .. } => branches
                .iter()
                .flat_map(|b| b.cont.free_type_vars())
                .collect(),
            GlobalType::Rec { var, body } => {
                let mut s = body.free_type_vars();
                s.remove(var);
                s
            }
            GlobalType::Var(v) => BTreeSet::from([v.clone()]),
            GlobalType::End => BTreeSet::new(),
        }
    }

    fn subst(&self, x: &str, with: &Self) -> Self {
        match self {
            GlobalType::Comm { from, to, branches } => GlobalType::Comm {
                from: from.clone(),
                to: to.clone(),
                branches: branches
                    .iter()
                    .map(|b| GlobalBranch {
                        label: b.label.clone(),
                        payload: b.payload.clone(),
                        cont: b.cont.subst(x, with),
                    })
                    .collect(),
            },
            GlobalType::Rec { var, .. } if var == x => self.clone(),
            GlobalType::Rec { var, body } => {
                let fv = with.free_type_vars();
                if fv.contains(var) {
                    let mut avoid = fv;
                    avoid.extend(body.free_type_vars());
                    let v2 = fresh_var(var, &avoid);
                    let body2 = body.subst(var, &GlobalType::Var(v2.clone()));
                    GlobalType::Rec {
                        var: v2,
                        body: Box::new(body2.subst(x, with)),
                    }
                } else {
                    GlobalType::Rec {
                        var: var.clone(),
                        body: Box::new(body.subst(x, with)),
                    }
                }
            }
            GlobalType::Var(v) if v == x => with.clone(),
            other => other.clone(),
        }
    }

    fn unfold(&self) -> Self {
        match self {
            GlobalType::Rec { var, body } => body.subst(var, self),
            other => other.clone(),
        }
    }

    fn as_rec(&self) -> Option<(&str, &Self)> {
        match self {
            GlobalType::Rec { var, body } => Some((var, body)),
            _ => None,
        }
    }
}

impl TypeTerm for LocalType {
    fn free_type_vars(&self) -> BTreeSet<String> {
        match self {
            LocalType::ExtChoice { branches, .. } | LocalType::IntChoice { branches, .. } => branches
                .iter()
                .flat_map(|b| b.cont.free_type_vars())
                .collect(),
            LocalType::Rec { var, body } => {
                let mut s = body.free_type_vars();
                s.remove(var);
                s
            }
            LocalType::Var(v) => BTreeSet::from([v.clone()]),
            LocalType::End => BTreeSet::new(),
        }
    }

    fn subst(&self, x: &str, with: &Self) -> Self {
        let map = |bs: &Vec<LocalBranch>| {
            bs.iter()
                .map(|b| LocalBranch {
                    label: b.label.clone(),
                    payload: b.payload.clone(),
                    cont: b.cont.subst(x, with),
                })
                .collect()
        };
        match self {
            LocalType::ExtChoice { from, branches } => LocalType::ExtChoice {
                from: from.clone(),
                branches: map(branches),
            },
            LocalType::IntChoice { to, branches } => LocalType::IntChoice {
                to: to.clone(),
                branches: map(branches),
            },
            LocalType::Rec { var, .. } if var == x => self.clone(),
            LocalType::Rec { var, body } => {
                let fv = with.free_type_vars();
                if fv.contains(var) {
                    let mut avoid = fv;
                    avoid.extend(body.free_type_vars());
                    let v2 = fresh_var(var, &avoid);
                    let body2 = body.subst(var, &LocalType::Var(v2.clone()));
                    LocalType::Rec {
                        var: v2,
                        body: Box::new(body2.subst(x, with)),
                    }
                } else {
                    LocalType::Rec {
                        var: var.clone(),
                        body: Box::new(body.subst(x, with)),
                    }
                }
            }
            LocalType::Var(v) if v == x => with.clone(),
            other => other.clone(),
        }
    }

    fn unfold(&self) -> Self {
        match self {
            LocalType::Rec { var, body } => body.subst(var, self),
            other => other.clone(),
        }
    }

    fn as_rec(&self) -> Option<(&str, &Self)> {
        match self {
            LocalType::Rec { var, body } => Some((var, body)),
            _ => None,
        }
    }
}

/// Contractivity: every recursion variable occurs under a communication.
pub trait Contractive {
    fn contractive_check(&self, unguarded: &mut Vec<String>) -> Result<(), SyntaxError>;
}

impl Contractive for GlobalType {
    fn contractive_check(&self, unguarded: &mut Vec<String>) -> Result<(), SyntaxError> {
        match self {
            GlobalType::Comm { branches, .. } => {
                for b in branches {
                    b.cont.contractive_check(&mut Vec::new())?;
                }
                Ok(())
            }
            GlobalType::Rec { var, body } => {
                unguarded.push(var.clone());
                let r = body.contractive_check(unguarded);
                unguarded.pop();
                r
            }
            GlobalType::Var(v) if unguarded.contains(v) => Err(SyntaxError::NotContractive(v.clone())),
            _ => Ok(()),
        }
    }
}

impl Contractive for LocalType {
    fn contractive_check(&self, unguarded: &mut Vec<String>) -> Result<(), SyntaxError> {
        match self {
            LocalType::ExtChoice { branches, .. } | LocalType::IntChoice { branches, .. } => {
                for b in branches {
                    b.cont.contractive_check(&mut Vec::new())?;
                }
                Ok(())
            }
            LocalType::Rec { var, body } => {
                unguarded.push(var.clone());
                let r = body.contractive_check(unguarded);
                unguarded.pop();
                r
            }
            LocalType::Var(v) if unguarded.contains(v) => Err(SyntaxError::NotContractive(v.clone())),
            _ => Ok(()),
        }
    }
}

pub fn check_contractive<T: Contractive>(t: &T) -> Result<(), SyntaxError> {
    t.contractive_check(&mut Vec::new())
}

pub fn check_closed<T: TypeTerm>(t: &T) -> Result<(), SyntaxError> {
    match t.free_type_vars().into_iter().next() {
        Some(v) => Err(SyntaxError::Unbound(v)),
        None => Ok(()),
    }
}

/// Unfolds top-level recursion until a non-`mu` head appears. Returns `None`
/// for non-contractive terms that never expose a constructor.
fn head_unfold(t: &LocalType) -> Option<LocalType> {
    let mut cur = t.clone();
    for _ in 0..256 {
        match cur {
            LocalType::Rec { .. } => cur = cur.unfold(),
            other => return Some(other),
        }
    }
    None
}

/// Equality of the regular trees denoted by two local types.
pub fn type_equal(a: &LocalType, b: &LocalType) -> bool {
    if a == b && check_contractive(a).is_ok() {
        return true;
    }
    let mut seen = HashSet::new();
    bisim(a, b, &mut seen)
}

fn bisim(a: &LocalType, b: &LocalType, seen: &mut HashSet<(LocalType, LocalType)>) -> bool {
    if !seen.insert((a.clone(), b.clone())) {
        return true;
    }
    let (Some(a), Some(b)) = (head_unfold(a), head_unfold(b)) else {
        return false;
    };
    match (&a, &b) {
        (LocalType::End, LocalType::End) => true,
        (LocalType::Var(x), LocalType::Var(y)) => x == y,
        (
            LocalType::ExtChoice { from: p, branches: xs },
            LocalType::ExtChoice { from: q, branches: ys },
        )
        | (
            LocalType::IntChoice { to: p, branches: xs },
            LocalType::IntChoice { to: q, branches: ys },
        ) => {
            p == q
                && xs.len() == ys.len()
                && xs.iter().all(|x| {
                    ys.iter().any(|y| {
                        x.label == y.label && x.payload == y.payload && bisim(&x.cont, &y.cont, seen)
                    })
                })
        }
        _ => false,
    }
}

/// Free variables and references of a process.
pub fn free_process_vars(p: &Process) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    fv_proc(p, &mut out);
    out
}

pub fn free_expr_vars(e: &Expr, out: &mut BTreeSet<String>) {
    match e {
        Expr::Var(x) | Expr::QubitRef(x) => {
            out.insert(x.clone());
        }
        Expr::Const(v) => {
            let mut refs = Vec::new();
            v.qubit_refs(&mut refs);
            out.extend(refs);
        }
        Expr::BinOp(_, l, r) => {
            free_expr_vars(l, out);
            free_expr_vars(r, out);
        }
        Expr::UnOp(_, e) | Expr::Proj(_, e) => free_expr_vars(e, out),
        Expr::Tuple(es) | Expr::List(es) => es.iter().for_each(|e| free_expr_vars(e, out)),
    }
}

fn minus(mut s: BTreeSet<String>, names: &[&str]) -> BTreeSet<String> {
    for n in names {
        s.remove(*n);
    }
    s
}

fn fv_proc(p: &Process, out: &mut BTreeSet<String>) {
    match p {
        Process::Inaction { owned } => out.extend(owned.iter().map(|q| q.name().to_string())),
        Process::Select { payload, cont, .. } => {
            free_expr_vars(payload, out);
            fv_proc(cont, out);
        }
        Process::Branch { branches, .. } => {
            for b in branches {
                out.extend(minus(free_process_vars(&b.cont), &b.binder.names()));
            }
        }
        Process::Def {
            params, body, cont, ..
        } => {
            let names: Vec<&str> = params.iter().map(|(x, _)| x.as_str()).collect();
            out.extend(minus(free_process_vars(body), &names));
            fv_proc(cont, out);
        }
        Process::Call { args, .. } => args.iter().for_each(|e| free_expr_vars(e, out)),
        Process::If { cond, then, els } => {
            free_expr_vars(cond, out);
            fv_proc(then, out);
            fv_proc(els, out);
        }
        Process::Measure {
            binder,
            targets,
            cont,
        } => {
            let mut s = free_process_vars(cont);
            s.extend(targets.iter().map(|q| q.name().to_string()));
            out.extend(minus(s, &binder.names()));
        }
        Process::NewQubit { binders, cont } => {
            let names: Vec<&str> = binders.iter().map(String::as_str).collect();
            out.extend(minus(free_process_vars(cont), &names));
        }
        Process::Unitary { targets, cont, .. } => {
            out.extend(targets.iter().map(|q| q.name().to_string()));
            fv_proc(cont, out);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::parser::*;
    use super::*;

    fn g(s: &str) -> GlobalType {
        parse_global(s).unwrap()
    }

    fn l(s: &str) -> LocalType {
        parse_local(s).unwrap()
    }

    #[test]
    fn roles_of_rec_and_end() {
        assert!(roles(&GlobalType::End).is_empty());
        let r = roles(&g("mu t.p->q:l(bit).t"));
        assert_eq!(r, BTreeSet::from([Role::new("p"), Role::new("q")]));
    }

    #[test]
    fn contractivity() {
        assert_eq!(
            check_contractive(&g("mu t.t")),
            Err(SyntaxError::NotContractive("t".into()))
        );
        assert!(check_contractive(&g("mu t.p->q:l(bit).t")).is_ok());
        assert!(check_contractive(&g("mu t.mu s.t")).is_err());
        assert!(check_contractive(&l("mu t.p&{a.t, b.mu s.s}")).is_err());
    }

    #[test]
    fn unfold_once() {
        assert_eq!(GlobalType::End.unfold(), GlobalType::End);
        let t = g("mu t.p->q:l(bit).t");
        assert_eq!(t.unfold(), g("p->q:l(bit).mu t.p->q:l(bit).t"));
    }

    #[test]
    fn equi_recursion() {
        let a = l("mu t.p+l(bit).t");
        let b = l("p+l(bit).mu t.p+l(bit).t");
        assert!(type_equal(&a, &b));
        assert!(!type_equal(&LocalType::End, &a));
        assert!(type_equal(&l("mu t.p+l(bit).t"), &l("mu s.p+l(bit).p+l(bit).s")));
        assert!(type_equal(&l("p&{a.end, b.end}"), &l("p&{b.end, a.end}")));
        assert!(!type_equal(&l("p&{a.end, b.end}"), &l("p+{b.end, a.end}")));
    }

    #[test]
    fn capture_avoiding_subst() {
        // unfolding the outer binder must not capture the inner `s`
        let t = l("mu t.p+a.mu s.p+{x.t, y.s}");
        let u = t.unfold();
        assert!(u.free_type_vars().is_empty());
        assert!(type_equal(&t, &u));
    }

    #[test]
    fn process_free_variables() {
        let p = parse_process("meas x = z.0").unwrap();
        assert_eq!(free_process_vars(&p), BTreeSet::from(["z".to_string()]));
        let p = parse_process("Alice!<q>. Bob?(y). 0[y]").unwrap();
        assert_eq!(free_process_vars(&p), BTreeSet::from(["q".to_string()]));
    }
}
