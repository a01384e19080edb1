#![allow(dead_code)]

pub mod corpus;
pub mod oracle;

use proptest::prelude::*;
use qmpst::syntax::*;

pub const ROLES: [&str; 4] = ["p", "q", "r", "s"];
const LABELS: [&str; 3] = ["a", "b", "c"];

pub fn base_type() -> BoxedStrategy<BaseType> {
    let leaf = prop_oneof![
        Just(BaseType::Bit),
        Just(BaseType::Qubit),
        Just(BaseType::Unit),
        Just(BaseType::Int),
    ];
    leaf.prop_recursive(2, 6, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 2..=3).prop_map(BaseType::Tuple),
            inner
                .prop_filter("classical", |t| t.is_classical())
                .prop_map(|t| BaseType::List(Box::new(t))),
        ]
    })
    .boxed()
}

fn role_pair() -> impl Strategy<Value = (Role, Role)> {
    (0..ROLES.len(), 1..ROLES.len()).prop_map(|(a, d)| {
        let b = (a + d) % ROLES.len();
        (Role::new(ROLES[a]), Role::new(ROLES[b]))
    })
}

/// Labels for `n` branches; a single branch is sometimes unlabelled.
fn labels(n: usize) -> impl Strategy<Value = Vec<Label>> {
    (Just(n), any::<bool>(), Just(LABELS.to_vec()).prop_shuffle()).prop_map(|(n, implicit, ls)| {
        if n == 1 && implicit {
            vec![Label::implicit()]
        } else {
            ls[..n].iter().map(|l| Label::new(*l)).collect()
        }
    })
}

/// Closed, contractive global types. Recursion bodies start with an
/// interaction and variables only occur under one.
pub fn global(depth: u32) -> BoxedStrategy<GlobalType> {
    global_in(depth, Vec::new(), false)
}

fn global_in(depth: u32, bound: Vec<String>, guarded: bool) -> BoxedStrategy<GlobalType> {
    let mut leaves: Vec<BoxedStrategy<GlobalType>> = vec![Just(GlobalType::End).boxed()];
    if guarded {
        for v in &bound {
            leaves.push(Just(GlobalType::Var(v.clone())).boxed());
        }
    }
    let leaf = proptest::strategy::Union::new(leaves).boxed();
    if depth == 0 {
        return leaf;
    }
    let comm = global_comm(depth, bound.clone());
    let var = format!("t{}", bound.len());
    let mut inner = bound;
    inner.push(var.clone());
    let rec = global_comm(depth, inner).prop_map(move |b| GlobalType::rec(&var, b));
    prop_oneof![1 => leaf, 3 => comm, 1 => rec].boxed()
}

fn global_comm(depth: u32, bound: Vec<String>) -> BoxedStrategy<GlobalType> {
    (role_pair(), 1usize..=3)
        .prop_flat_map(move |((from, to), n)| {
            let conts = prop::collection::vec(
                (base_type(), global_in(depth - 1, bound.clone(), true)),
                n,
            );
            (Just(from), Just(to), labels(n), conts)
        })
        .prop_map(|(from, to, ls, conts)| GlobalType::Comm {
            from,
            to,
            branches: ls
                .into_iter()
                .zip(conts)
                .map(|(label, (payload, cont))| GlobalBranch {
                    label,
                    payload,
                    cont,
                })
                .collect(),
        })
        .boxed()
}

/// Closed, contractive local types.
pub fn local(depth: u32) -> BoxedStrategy<LocalType> {
    local_in(depth, Vec::new(), false)
}

fn local_in(depth: u32, bound: Vec<String>, guarded: bool) -> BoxedStrategy<LocalType> {
    let mut leaves: Vec<BoxedStrategy<LocalType>> = vec![Just(LocalType::End).boxed()];
    if guarded {
        for v in &bound {
            leaves.push(Just(LocalType::Var(v.clone())).boxed());
        }
    }
    let leaf = proptest::strategy::Union::new(leaves).boxed();
    if depth == 0 {
        return leaf;
    }
    let choice = local_choice(depth, bound.clone());
    let var = format!("t{}", bound.len());
    let mut inner = bound;
    inner.push(var.clone());
    let rec = local_choice(depth, inner).prop_map(move |b| LocalType::rec(&var, b));
    prop_oneof![1 => leaf, 3 => choice, 1 => rec].boxed()
}

fn local_choice(depth: u32, bound: Vec<String>) -> BoxedStrategy<LocalType> {
    (0..ROLES.len(), any::<bool>(), 1usize..=3)
        .prop_flat_map(move |(r, send, n)| {
            let conts = prop::collection::vec((base_type(), local_in(depth - 1, bound.clone(), true)), n);
            (Just(Role::new(ROLES[r])), Just(send), labels(n), conts)
        })
        .prop_map(|(peer, send, ls, conts)| {
            let branches = ls
                .into_iter()
                .zip(conts)
                .map(|(label, (payload, cont))| LocalBranch { label, payload, cont })
                .collect();
            if send {
                LocalType::IntChoice { to: peer, branches }
            } else {
                LocalType::ExtChoice { from: peer, branches }
            }
        })
        .boxed()
}

fn ident() -> impl Strategy<Value = String> {
    prop::sample::select(vec!["x", "y", "z", "w"]).prop_map(String::from)
}

fn value() -> BoxedStrategy<Value> {
    let leaf = prop_oneof![
        (0u8..=1).prop_map(Value::Bit),
        (2i64..100).prop_map(Value::Int),
        Just(Value::Unit),
    ];
    leaf.prop_recursive(2, 6, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 2..=3).prop_map(Value::Tuple),
            prop::collection::vec((0u8..=1).prop_map(Value::Bit), 0..=3).prop_map(Value::List),
        ]
    })
    .boxed()
}

pub fn expr() -> BoxedStrategy<Expr> {
    let leaf = prop_oneof![ident().prop_map(Expr::Var), value().prop_map(Expr::Const)];
    leaf.prop_recursive(3, 16, 3, |inner| {
        let bin = prop::sample::select(vec![
            BinOp::Add,
            BinOp::Sub,
            BinOp::Mul,
            BinOp::Eq,
            BinOp::Neq,
            BinOp::Lt,
            BinOp::Le,
            BinOp::Gt,
            BinOp::Ge,
            BinOp::And,
            BinOp::Or,
            BinOp::Append,
        ]);
        let un = prop::sample::select(vec![UnOp::Not, UnOp::Neg, UnOp::Head, UnOp::Tail, UnOp::IsEmpty]);
        prop_oneof![
            (bin, inner.clone(), inner.clone()).prop_map(|(o, l, r)| Expr::bin(o, l, r)),
            (un, inner.clone()).prop_map(|(o, e)| Expr::un(o, e)),
            prop::collection::vec(inner.clone(), 2..=3).prop_map(Expr::tuple),
            prop::collection::vec(inner.clone(), 1..=3).prop_map(Expr::list),
            (0usize..2, inner).prop_map(|(i, e)| Expr::Proj(i, Box::new(e))),
        ]
    })
    .boxed()
}

fn qexpr() -> impl Strategy<Value = QubitExpr> {
    ident().prop_map(QubitExpr::Var)
}

fn binder() -> impl Strategy<Value = Binder> {
    prop_oneof![
        ident().prop_map(Binder::Var),
        prop::collection::vec(ident(), 2..=3).prop_map(Binder::Tuple),
    ]
}

fn gate() -> impl Strategy<Value = Gate> {
    prop::sample::select(vec![Gate::H, Gate::X, Gate::Y, Gate::Z, Gate::Cnot, Gate::Cswap])
}

pub fn process() -> BoxedStrategy<Process> {
    let leaf = prop_oneof![
        prop::collection::vec(qexpr(), 0..=2).prop_map(|owned| Process::Inaction { owned }),
        (Just("X".to_string()), prop::collection::vec(expr(), 0..=2))
            .prop_map(|(name, args)| Process::Call { name, args }),
    ];
    leaf.prop_recursive(4, 24, 3, |inner| {
        let role = prop::sample::select(ROLES.to_vec()).prop_map(Role::new);
        let select = (role.clone(), prop::option::of(prop::sample::select(LABELS.to_vec())), expr(), inner.clone())
            .prop_map(|(to, label, payload, cont)| Process::Select {
                to,
                label: label.map(Label::new).unwrap_or_else(Label::implicit),
                payload,
                cont: Box::new(cont),
            });
        let branch = (role, 1usize..=3)
            .prop_flat_map({
                let inner = inner.clone();
                move |(from, n)| {
                    (
                        Just(from),
                        labels(n),
                        prop::collection::vec((binder(), inner.clone()), n),
                    )
                }
            })
            .prop_map(|(from, ls, bs)| Process::Branch {
                from,
                branches: ls
                    .into_iter()
                    .zip(bs)
                    .map(|(label, (binder, cont))| ProcBranch { label, binder, cont })
                    .collect(),
            });
        let cond = (expr(), inner.clone(), inner.clone()).prop_map(|(cond, t, e)| Process::If {
            cond,
            then: Box::new(t),
            els: Box::new(e),
        });
        let meas = (prop::collection::vec((ident(), qexpr()), 1..=2), inner.clone()).prop_map(
            |(pairs, cont)| {
                let (mut xs, targets): (Vec<String>, Vec<QubitExpr>) = pairs.into_iter().unzip();
                let binder = if xs.len() == 1 { Binder::Var(xs.remove(0)) } else { Binder::Tuple(xs) };
                Process::Measure {
                    binder,
                    targets,
                    cont: Box::new(cont),
                }
            },
        );
        let new = (prop::collection::vec(ident(), 1..=2), inner.clone()).prop_map(|(binders, cont)| {
            Process::NewQubit {
                binders,
                cont: Box::new(cont),
            }
        });
        let unitary = (gate(), inner.clone()).prop_flat_map(|(g, cont)| {
            (Just(g), prop::collection::vec(qexpr(), g.arity()), Just(cont)).prop_map(
                |(gate, targets, cont)| Process::Unitary {
                    gate,
                    targets,
                    cont: Box::new(cont),
                },
            )
        });
        let param_ty = base_type().prop_filter("classical or a qubit", |t| {
            t.is_classical() || *t == BaseType::Qubit
        });
        let params = prop::collection::btree_map(ident(), param_ty, 0..=2).prop_map(|m| {
            let mut ps: Vec<(String, BaseType)> = m.into_iter().collect();
            ps.sort_by_key(|(_, t)| t.has_qubit());
            ps
        });
        let def = (
            params,
            inner.clone(),
            inner,
        )
            .prop_map(|(params, body, cont)| Process::Def {
                name: "X".into(),
                params,
                body: Box::new(body),
                cont: Box::new(cont),
            });
        prop_oneof![select, branch, cond, meas, new, unitary, def]
    })
    .boxed()
}
