//! Substitution of closed values for variables.
//!
//! Values are closed, so no capture can occur; binders only stop the
//! substitution from reaching shadowed occurrences.

use std::collections::BTreeSet;

use crate::syntax::{Binder, Expr, ProcBranch, Process, QubitExpr, Value};

pub fn subst_expr(e: &Expr, x: &str, v: &Value) -> Expr {
    match e {
        Expr::Var(y) if y == x => Expr::from_value(v),
        Expr::Var(_) | Expr::QubitRef(_) | Expr::Const(_) => e.clone(),
        Expr::BinOp(op, l, r) => Expr::bin(*op, subst_expr(l, x, v), subst_expr(r, x, v)),
        Expr::UnOp(op, a) => Expr::un(*op, subst_expr(a, x, v)),
        Expr::Tuple(es) => Expr::tuple(es.iter().map(|e| subst_expr(e, x, v)).collect()),
        Expr::List(es) => Expr::list(es.iter().map(|e| subst_expr(e, x, v)).collect()),
        Expr::Proj(k, a) => Expr::Proj(*k, Box::new(subst_expr(a, x, v))),
    }
}

fn subst_q(q: &QubitExpr, x: &str, v: &Value) -> QubitExpr {
    match (q, v) {
        (QubitExpr::Var(y), Value::QubitRef(r)) if y == x => QubitExpr::Ref(r.clone()),
        _ => q.clone(),
    }
}

fn subst_qs(qs: &[QubitExpr], x: &str, v: &Value) -> Vec<QubitExpr> {
    qs.iter().map(|q| subst_q(q, x, v)).collect()
}

/// `p[v/x]`.
pub fn subst_process(p: &Process, x: &str, v: &Value) -> Process {
    let under = |binds: bool, q: &Process| {
        if binds {
            q.clone()
        } else {
            subst_process(q, x, v)
        }
    };
    match p {
        Process::Inaction { owned } => Process::Inaction {
            owned: subst_qs(owned, x, v),
        },
        Process::Select {
            to,
            label,
            payload,
            cont,
        } => Process::Select {
            to: to.clone(),
            label: label.clone(),
            payload: subst_expr(payload, x, v),
            cont: Box::new(subst_process(cont, x, v)),
        },
        Process::Branch { from, branches } => Process::Branch {
            from: from.clone(),
            branches: branches
                .iter()
                .map(|b| ProcBranch {
                    label: b.label.clone(),
                    binder: b.binder.clone(),
                    cont: under(b.binder.binds(x), &b.cont),
                })
                .collect(),
        },
        Process::Def {
            name,
            params,
            body,
            cont,
        } => Process::Def {
            name: name.clone(),
            params: params.clone(),
            body: Box::new(under(params.iter().any(|(p, _)| p == x), body)),
            cont: Box::new(subst_process(cont, x, v)),
        },
        Process::Call { name, args } => Process::Call {
            name: name.clone(),
            args: args.iter().map(|a| subst_expr(a, x, v)).collect(),
        },
        Process::If { cond, then, els } => Process::If {
            cond: subst_expr(cond, x, v),
            then: Box::new(subst_process(then, x, v)),
            els: Box::new(subst_process(els, x, v)),
        },
        Process::Measure {
            binder,
            targets,
            cont,
        } => Process::Measure {
            binder: binder.clone(),
            targets: subst_qs(targets, x, v),
            cont: Box::new(under(binder.binds(x), cont)),
        },
        Process::NewQubit { binders, cont } => Process::NewQubit {
            binders: binders.clone(),
            cont: Box::new(under(binders.iter().any(|b| b == x), cont)),
        },
        Process::Unitary {
            gate,
            targets,
            cont,
        } => Process::Unitary {
            gate: *gate,
            targets: subst_qs(targets, x, v),
            cont: Box::new(subst_process(cont, x, v)),
        },
    }
}

/// Substitutes a value for a binding pattern.
pub fn subst_binder(p: &Process, b: &Binder, v: &Value) -> Option<Process> {
    match (b, v) {
        (Binder::Wildcard, _) => Some(p.clone()),
        (Binder::Var(x), _) => Some(subst_process(p, x, v)),
        (Binder::Tuple(xs), Value::Tuple(vs)) if xs.len() == vs.len() => Some(
            xs.iter()
                .zip(vs)
                .fold(p.clone(), |acc, (x, v)| subst_process(&acc, x, v)),
        ),
        _ => None,
    }
}

fn expr_refs(e: &Expr, out: &mut BTreeSet<String>) {
    match e {
        Expr::QubitRef(q) => {
            out.insert(q.clone());
        }
        Expr::Const(v) => {
            let mut qs = Vec::new();
            v.qubit_refs(&mut qs);
            out.extend(qs);
        }
        Expr::Var(_) => {}
        Expr::BinOp(_, l, r) => {
            expr_refs(l, out);
            expr_refs(r, out);
        }
        Expr::UnOp(_, a) | Expr::Proj(_, a) => expr_refs(a, out),
        Expr::Tuple(es) | Expr::List(es) => es.iter().for_each(|e| expr_refs(e, out)),
    }
}

fn q_refs(qs: &[QubitExpr], out: &mut BTreeSet<String>) {
    for q in qs {
        if let QubitExpr::Ref(r) = q {
            out.insert(r.clone());
        }
    }
}

/// Register references occurring in `p`.
pub fn qubit_refs(p: &Process) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    collect_refs(p, &mut out);
    out
}

fn collect_refs(p: &Process, out: &mut BTreeSet<String>) {
    match p {
        Process::Inaction { owned } => q_refs(owned, out),
        Process::Select { payload, cont, .. } => {
            expr_refs(payload, out);
            collect_refs(cont, out);
        }
        Process::Branch { branches, .. } => branches.iter().for_each(|b| collect_refs(&b.cont, out)),
        Process::Def { body, cont, .. } => {
            collect_refs(body, out);
            collect_refs(cont, out);
        }
        Process::Call { args, .. } => args.iter().for_each(|a| expr_refs(a, out)),
        Process::If { cond, then, els } => {
            expr_refs(cond, out);
            collect_refs(then, out);
            collect_refs(els, out);
        }
        Process::Measure { targets, cont, .. } | Process::Unitary { targets, cont, .. } => {
            q_refs(targets, out);
            collect_refs(cont, out);
        }
        Process::NewQubit { cont, .. } => collect_refs(cont, out),
    }
}

/// Names of process variables called anywhere in `p`.
pub fn called(p: &Process) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    fn go(p: &Process, out: &mut BTreeSet<String>) {
        match p {
            Process::Inaction { .. } => {}
            Process::Call { name, .. } => {
                out.insert(name.clone());
            }
            Process::Select { cont, .. }
            | Process::Measure { cont, .. }
            | Process::Unitary { cont, .. }
            | Process::NewQubit { cont, .. } => go(cont, out),
            Process::Branch { branches, .. } => branches.iter().for_each(|b| go(&b.cont, out)),
            Process::Def { body, cont, .. } => {
                go(body, out);
                go(cont, out);
            }
            Process::If { then, els, .. } => {
                go(then, out);
                go(els, out);
            }
        }
    }
    go(p, &mut out);
    out
}

/// Drops definitions no longer called.
pub fn collect_garbage(p: Process) -> Process {
    match p {
        Process::Def {
            name,
            params,
            body,
            cont,
        } => {
            let cont = collect_garbage(*cont);
            if called(&cont).contains(&name) {
                Process::Def {
                    name,
                    params,
                    body,
                    cont: Box::new(cont),
                }
            } else {
                cont
            }
        }
        other => other,
    }
}
