use std::collections::BTreeSet;

use super::eval::eval_expr;
use super::subst::{collect_garbage, qubit_refs, subst_binder, subst_process};
use super::{Configuration, Redex, Step, TransitionLabel};
use crate::syntax::{Process, QubitExpr, Role, System, Value};

/// The redex of a role: its process with leading definitions stripped.
fn active(p: &Process) -> &Process {
    match p {
        Process::Def { cont, .. } => active(cont),
        other => other,
    }
}

/// Replaces the active process, keeping the definitions still in use.
fn with_active(p: &Process, new: Process) -> Process {
    fn go(p: &Process, new: Process) -> Process {
        match p {
            Process::Def {
                name,
                params,
                body,
                cont,
            } => Process::Def {
                name: name.clone(),
                params: params.clone(),
                body: body.clone(),
                cont: Box::new(go(cont, new)),
            },
            _ => new,
        }
    }
    collect_garbage(go(p, new))
}

fn find_def<'a>(p: &'a Process, name: &str) -> Option<(&'a [(String, crate::syntax::BaseType)], &'a Process)> {
    let mut found = None;
    let mut cur = p;
    while let Process::Def {
        name: n,
        params,
        body,
        cont,
    } = cur
    {
        if n == name {
            found = Some((params.as_slice(), &**body));
        }
        cur = cont;
    }
    found
}

fn refs(qs: &[QubitExpr]) -> Option<Vec<&str>> {
    qs.iter()
        .map(|q| match q {
            QubitExpr::Ref(r) => Some(r.as_str()),
            QubitExpr::Var(_) => None,
        })
        .collect()
}

/// `base#k` for the smallest `k` not naming a register qubit or a
/// reference in the system; `base` is `x` up to its first `#`.
pub fn fresh_name(c: &Configuration, x: &str) -> String {
    let base = x.split('#').next().unwrap_or(x);
    let mut used: BTreeSet<String> = c.state.qubits().iter().cloned().collect();
    for p in c.system.roles.values() {
        used.extend(qubit_refs(p));
    }
    (0..)
        .map(|k| format!("{base}#{k}"))
        .find(|n| !used.contains(n))
        .expect("unbounded search")
}

fn replace(system: &System, r: &Role, p: Process) -> System {
    let mut s = system.clone();
    s.roles.insert(r.clone(), p);
    s
}

/// Computation steps of one role; empty when its redex is stuck or
/// waiting for a partner.
fn comp_steps(c: &Configuration, r: &Role, p: &Process) -> Vec<Step> {
    let comp = |state, proc_: Process, prob| Step {
        redex: Redex::Comp(r.clone()),
        label: TransitionLabel::Comp { role: r.clone() },
        prob,
        next: Configuration {
            state,
            system: replace(&c.system, r, with_active(p, proc_)),
        },
    };
    match active(p) {
        Process::NewQubit { binders, cont } => {
            let Some(x) = binders.first() else {
                return vec![comp(c.state.clone(), (**cont).clone(), 1.0)];
            };
            let name = fresh_name(c, x);
            let mut state = c.state.clone();
            if state.alloc(&name).is_err() {
                return vec![];
            }
            let rest = if binders.len() > 1 {
                Process::NewQubit {
                    binders: binders[1..].to_vec(),
                    cont: cont.clone(),
                }
            } else {
                (**cont).clone()
            };
            vec![comp(state, subst_process(&rest, x, &Value::QubitRef(name)), 1.0)]
        }
        Process::Unitary {
            gate,
            targets,
            cont,
        } => {
            let Some(ts) = refs(targets) else { return vec![] };
            let mut state = c.state.clone();
            match state.apply(*gate, &ts) {
                Ok(()) => vec![comp(state, (**cont).clone(), 1.0)],
                Err(_) => vec![],
            }
        }
        Process::Measure {
            binder,
            targets,
            cont,
        } => {
            let Some(ts) = refs(targets) else { return vec![] };
            let Ok(outcomes) = c.state.measure_branches(&ts) else {
                return vec![];
            };
            outcomes
                .into_iter()
                .filter_map(|(bits, prob, state)| {
                    let v = if bits.len() == 1 {
                        Value::Bit(bits[0])
                    } else {
                        Value::Tuple(bits.into_iter().map(Value::Bit).collect())
                    };
                    Some(comp(state, subst_binder(cont, binder, &v)?, prob))
                })
                .collect()
        }
        Process::If { cond, then, els } => match eval_expr(cond) {
            Ok(Value::Bit(1)) => vec![comp(c.state.clone(), (**then).clone(), 1.0)],
            Ok(Value::Bit(0)) => vec![comp(c.state.clone(), (**els).clone(), 1.0)],
            _ => vec![],
        },
        Process::Call { name, args } => {
            let Some((params, body)) = find_def(p, name) else {
                return vec![];
            };
            if params.len() != args.len() {
                return vec![];
            }
            let Ok(vals) = args.iter().map(eval_expr).collect::<Result<Vec<_>, _>>() else {
                return vec![];
            };
            let unfolded = params
                .iter()
                .zip(&vals)
                .fold(body.clone(), |acc, ((x, _), v)| subst_process(&acc, x, v));
            vec![comp(c.state.clone(), unfolded, 1.0)]
        }
        Process::Inaction { .. } | Process::Select { .. } | Process::Branch { .. } | Process::Def { .. } => {
            vec![]
        }
    }
}

fn comm_step(c: &Configuration, from: &Role, p: &Process) -> Option<Step> {
    let Process::Select {
        to,
        label,
        payload,
        cont,
    } = active(p)
    else {
        return None;
    };
    let q = c.system.roles.get(to)?;
    let Process::Branch { from: src, branches } = active(q) else {
        return None;
    };
    if src != from {
        return None;
    }
    let b = branches.iter().find(|b| &b.label == label)?;
    let v = eval_expr(payload).ok()?;
    let q_next = subst_binder(&b.cont, &b.binder, &v)?;
    let mut system = replace(&c.system, from, with_active(p, (**cont).clone()));
    system.roles.insert(to.clone(), with_active(q, q_next));
    Some(Step {
        redex: Redex::Comm(from.clone(), to.clone()),
        label: TransitionLabel::Comm {
            from: from.clone(),
            to: to.clone(),
            label: label.clone(),
            value: v,
        },
        prob: 1.0,
        next: Configuration {
            state: c.state.clone(),
            system,
        },
    })
}

/// Every step enabled in `c`, grouped by redex in role order.
pub fn enabled(c: &Configuration) -> Vec<Step> {
    let mut out = Vec::new();
    for (r, p) in &c.system.roles {
        out.extend(comp_steps(c, r, p));
        out.extend(comm_step(c, r, p));
    }
    out.sort_by(|a, b| a.redex.key().cmp(b.redex.key()).then(a.redex.cmp(&b.redex)));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::QuantumState;
    use crate::syntax::{parse_system, Gate};

    #[test]
    fn measurement_splits() {
        let mut s = QuantumState::new();
        s.alloc("z").unwrap();
        s.apply(Gate::H, &["z"]).unwrap();
        let m = parse_system("system { A :: meas x = z.B!<x>.0 ; B :: A?(y).0 }").unwrap();
        let c = Configuration::new(s, m);
        let steps = enabled(&c);
        assert_eq!(steps.len(), 2);
        for (i, st) in steps.iter().enumerate() {
            assert!((st.prob - 0.5).abs() < 1e-12);
            assert!(st.next.state.is_empty());
            assert_eq!(st.next.system.get("A").unwrap().to_string(), format!("B!<{i}>"));
        }
    }

    #[test]
    fn terminal_has_no_steps() {
        let m = parse_system("system { A :: 0 ; B :: 0 }").unwrap();
        assert!(enabled(&Configuration::new(QuantumState::new(), m)).is_empty());
    }

    #[test]
    fn fresh_names_skip_used() {
        let mut s = QuantumState::new();
        s.alloc("x#0").unwrap();
        let m = parse_system("system { A :: qbit x.0[x, 'x#0] }").unwrap();
        let c = Configuration::new(s, m);
        let st = &enabled(&c)[0];
        assert_eq!(st.next.state.qubits(), ["x#0".to_string(), "x#1".to_string()]);
    }

    #[test]
    fn def_unfolds_and_is_collected() {
        let m = parse_system("system { A :: def X(n: int) = if n > 0 then X<n - 1> else 0 in X<int(2)> }").unwrap();
        let mut c = Configuration::new(QuantumState::new(), m);
        let mut n = 0;
        while let Some(st) = enabled(&c).into_iter().next() {
            c = st.next;
            n += 1;
        }
        assert!(c.is_terminal());
        assert_eq!(n, 6);
    }
}
