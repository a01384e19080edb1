use std::collections::BTreeSet;

use proptest::prelude::*;
use qmpst::cli::load_str;
use qmpst::semantics::subst_process;
use qmpst::syntax::*;
use qmpst::typecheck::*;

fn corpus(name: &str) -> String {
    let path = format!("{}/../../corpus/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"))
}

const PROTOCOLS: [&str; 4] = [
    "teleportation.qmpst",
    "secret_sharing.qmpst",
    "bit_commitment.qmpst",
    "key_distribution.qmpst",
];

const MUTANTS: [(&str, TypeErrorKind); 8] = [
    ("double_send", TypeErrorKind::LinearityViolation),
    ("missing_ownership", TypeErrorKind::UnusedQubit),
    ("wrong_peer", TypeErrorKind::RoleMismatch),
    ("label_mismatch", TypeErrorKind::BranchMismatch),
    ("payload_swap", TypeErrorKind::PayloadMismatch),
    ("unguarded_recursion", TypeErrorKind::ProjectionMismatch),
    ("unknown_variable", TypeErrorKind::UnknownVariable),
    ("missing_role", TypeErrorKind::RoleMismatch),
];

#[test]
fn corpus_protocols_type_check() {
    for f in PROTOCOLS {
        let l = load_str(&corpus(f), &[], &[]).unwrap();
        if let Err(es) = l.check() {
            panic!("{f}: {}", es[0]);
        }
    }
}

#[test]
fn mutants_fail_with_their_kind() {
    for (name, kind) in MUTANTS {
        let l = load_str(&corpus(&format!("mutants/{name}.qmpst")), &[], &[]).unwrap();
        let es = l.check().expect_err(name);
        assert!(es.iter().any(|e| e.kind == kind), "{name}: {es:?}");
    }
}

#[test]
fn errors_carry_role_and_line() {
    let l = load_str(&corpus("mutants/double_send.qmpst"), &[], &[]).unwrap();
    let e = &l.check().unwrap_err()[0];
    assert_eq!(e.location.role.as_deref(), Some("Source"));
    assert_eq!(e.location.line, Some(8));
    assert_eq!(e.location.path.last().map(String::as_str), Some("Bob!_"));
}

#[test]
fn sigma_partition_is_disjoint_on_the_corpus() {
    for f in PROTOCOLS {
        let l = load_str(&corpus(f), &[], &[]).unwrap();
        let sigma = l.sigma();
        let parts = partition_sigma(&sigma, &l.config.system).unwrap();
        let mut seen = BTreeSet::new();
        for (r, qs) in &parts {
            assert_eq!(qs, &free_qubits(&l.config.system.roles[r], &sigma));
            for q in qs {
                assert!(seen.insert(q.clone()), "{f}: {q} owned twice");
            }
        }
        assert_eq!(seen, sigma);
    }
}

fn typed_expr(want: BaseType, var: BaseType, depth: u32) -> BoxedStrategy<Expr> {
    let mut leaves: Vec<BoxedStrategy<Expr>> = vec![match want {
        BaseType::Bit => (0u8..=1).prop_map(Expr::bit).boxed(),
        _ => (0i64..50).prop_map(|n| Expr::Const(Value::Int(n))).boxed(),
    }];
    if want == var {
        leaves.push(Just(Expr::var("x")).boxed());
    }
    let leaf = proptest::strategy::Union::new(leaves).boxed();
    if depth == 0 {
        return leaf;
    }
    let sub = |t: BaseType| typed_expr(t, var.clone(), depth - 1);
    let nodes: BoxedStrategy<Expr> = match want {
        BaseType::Bit => prop_oneof![
            sub(BaseType::Bit).prop_map(|e| Expr::un(UnOp::Not, e)),
            (prop::sample::select(vec![BinOp::And, BinOp::Or, BinOp::Eq]), sub(BaseType::Bit), sub(BaseType::Bit))
                .prop_map(|(o, l, r)| Expr::bin(o, l, r)),
            (
                prop::sample::select(vec![BinOp::Lt, BinOp::Le, BinOp::Gt, BinOp::Ge, BinOp::Neq]),
                sub(BaseType::Int),
                sub(BaseType::Int)
            )
                .prop_map(|(o, l, r)| Expr::bin(o, l, r)),
        ]
        .boxed(),
        _ => prop_oneof![
            sub(BaseType::Int).prop_map(|e| Expr::un(UnOp::Neg, e)),
            (prop::sample::select(vec![BinOp::Add, BinOp::Sub, BinOp::Mul]), sub(BaseType::Int), sub(BaseType::Int))
                .prop_map(|(o, l, r)| Expr::bin(o, l, r)),
        ]
        .boxed(),
    };
    prop_oneof![1 => leaf, 2 => nodes].boxed()
}

/// `q!<e0>.if c then q!a<e1>.0 else q!b<e2>.0` with `x` free.
fn classical_process() -> impl Strategy<Value = (BaseType, Process, Value)> {
    prop_oneof![Just(BaseType::Bit), Just(BaseType::Int)].prop_flat_map(|b| {
        let v = match b {
            BaseType::Bit => (0u8..=1).prop_map(Value::Bit).boxed(),
            _ => (-20i64..20).prop_map(Value::Int).boxed(),
        };
        (
            Just(b.clone()),
            typed_expr(BaseType::Int, b.clone(), 3),
            typed_expr(BaseType::Bit, b.clone(), 3),
            typed_expr(BaseType::Int, b.clone(), 2),
            typed_expr(BaseType::Int, b, 2),
            v,
        )
            .prop_map(|(b, e0, c, e1, e2, v)| {
                let send = |label: &str, e: Expr| Process::Select {
                    to: Role::new("q"),
                    label: Label::new(label),
                    payload: e,
                    cont: Box::new(Process::nil()),
                };
                let p = Process::Select {
                    to: Role::new("q"),
                    label: Label::implicit(),
                    payload: e0,
                    cont: Box::new(Process::If {
                        cond: c,
                        then: Box::new(send("a", e1)),
                        els: Box::new(send("b", e2)),
                    }),
                };
                (b, p, v)
            })
    })
}

fn gate_run() -> impl Strategy<Value = Vec<(Gate, bool)>> {
    prop::collection::vec(
        (prop::sample::select(vec![Gate::H, Gate::X, Gate::Z, Gate::Cnot, Gate::Ry(0.3)]), any::<bool>()),
        0..6,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn substituting_a_value_preserves_typing((b, p, v) in classical_process()) {
        let t = parse_local("q+(int).q+{a(int).end, b(int).end}").unwrap();
        let gamma: ClassicalEnv = [("x".to_string(), b)].into_iter().collect();
        let sigma = QubitEnv::new();
        prop_assert!(type_process(&ProcEnv::new(), &gamma, &sigma, &p, &t).is_ok(), "{p}");
        let closed = subst_process(&p, "x", &v);
        let r = type_process(&ProcEnv::new(), &ClassicalEnv::new(), &sigma, &closed, &t);
        prop_assert!(r.is_ok(), "{closed}: {r:?}");
    }

    #[test]
    fn renaming_a_qubit_preserves_typing(gates in gate_run()) {
        let mut p = Process::Select {
            to: Role::new("q"),
            label: Label::implicit(),
            payload: Expr::var("z"),
            cont: Box::new(Process::nil_owning(&["u"])),
        };
        for (g, flip) in gates.into_iter().rev() {
            let targets = match (g.arity(), flip) {
                (1, false) => vec!["z"],
                (1, true) => vec!["u"],
                (_, false) => vec!["z", "u"],
                (_, true) => vec!["u", "z"],
            };
            p = Process::Unitary {
                gate: g,
                targets: targets.into_iter().map(QubitExpr::var).collect(),
                cont: Box::new(p),
            };
        }
        let t = parse_local("q+(qbit).end").unwrap();
        let sigma: QubitEnv = ["z", "u"].iter().map(|s| s.to_string()).collect();
        prop_assert!(type_process(&ProcEnv::new(), &ClassicalEnv::new(), &sigma, &p, &t).is_ok());
        let renamed = subst_process(&p, "z", &Value::QubitRef("w".into()));
        let sigma: QubitEnv = ["w", "u"].iter().map(|s| s.to_string()).collect();
        let r = type_process(&ProcEnv::new(), &ClassicalEnv::new(), &sigma, &renamed, &t);
        prop_assert!(r.is_ok(), "{renamed}: {r:?}");
    }

    #[test]
    fn accepted_systems_own_disjoint_qubits(owner in prop::collection::vec(0usize..3, 0..6), dup in any::<bool>()) {
        let roles = ["p", "q", "r"];
        let names: Vec<String> = (0..owner.len()).map(|i| format!("k{i}")).collect();
        let mut m = System::new();
        for (i, r) in roles.iter().enumerate() {
            let mine: Vec<&str> = names
                .iter()
                .zip(&owner)
                .filter(|(_, o)| **o == i)
                .map(|(n, _)| n.as_str())
                .collect();
            m = m.with(r, Process::nil_owning(&mine));
        }
        let sigma: QubitEnv = names.iter().cloned().collect();
        if dup && !names.is_empty() {
            let stolen = names[0].clone();
            let thief = roles[(owner[0] + 1) % 3];
            if let Some(Process::Inaction { owned }) = m.roles.get_mut(&Role::new(thief)) {
                owned.push(QubitExpr::Var(stolen));
            }
            let es = type_system(&ClassicalEnv::new(), &sigma, &m, &GlobalType::End).unwrap_err();
            prop_assert!(es.iter().any(|e| e.kind == TypeErrorKind::LinearityViolation));
        } else {
            prop_assert!(type_system(&ClassicalEnv::new(), &sigma, &m, &GlobalType::End).is_ok());
            let parts = partition_sigma(&sigma, &m).unwrap();
            let all: Vec<&String> = parts.values().flatten().collect();
            let distinct: BTreeSet<&String> = all.iter().copied().collect();
            prop_assert_eq!(all.len(), distinct.len());
            prop_assert_eq!(distinct.len(), sigma.len());
        }
    }
}

type Row<'a> = (&'a str, &'a str, &'a str, &'a str, &'a str);

fn flatten(d: &Derivation, out: &mut Vec<(String, String, String, String, String)>) {
    let gamma: Vec<String> = d.gamma.iter().map(|(k, v)| format!("{k}:{v}")).collect();
    out.push((d.rule.clone(), d.sigma.join(","), gamma.join(","), d.subject.clone(), d.ty.clone()));
    for p in &d.premises {
        flatten(p, out);
    }
}

fn role_derivation(file: &str, role: &str) -> Derivation {
    let l = load_str(&corpus(file), &[], &[]).unwrap();
    let d = derive_system(&l.gamma, &l.sigma(), &l.config.system, l.global.as_ref().unwrap()).unwrap();
    assert_eq!(d.rule, "MPSystem");
    let i = l.config.system.roles.keys().position(|r| r.as_str() == role).unwrap();
    d.premises[i].clone()
}

fn assert_rows(d: &Derivation, want: &[Row]) {
    let mut got = Vec::new();
    flatten(d, &mut got);
    assert_eq!(got.len(), want.len());
    for (g, w) in got.iter().zip(want) {
        assert_eq!((g.0.as_str(), g.1.as_str(), g.2.as_str(), g.3.as_str(), g.4.as_str()), *w);
    }
}

#[test]
fn teleportation_alice_derivation() {
    assert_rows(
        &role_derivation("teleportation.qmpst", "Alice"),
        &[
            ("MPBranch", "", "", "Env?(w).Source?(x).CNOT(w, x).H(w).meas r = (w, x).Bob!<r>", "Env&(qbit).Source&(qbit).Bob+(bit^2)"),
            ("MPBranch", "w", "", "Source?(x).CNOT(w, x).H(w).meas r = (w, x).Bob!<r>", "Source&(qbit).Bob+(bit^2)"),
            ("Unitary", "w,x", "", "CNOT(w, x).H(w).meas r = (w, x).Bob!<r>", "Bob+(bit^2)"),
            ("Unitary", "w,x", "", "H(w).meas r = (w, x).Bob!<r>", "Bob+(bit^2)"),
            ("Meas", "w,x", "", "meas r = (w, x).Bob!<r>", "Bob+(bit^2)"),
            ("MPSel", "", "r:bit^2", "Bob!<r>", "Bob+(bit^2)"),
            ("Var", "", "r:bit^2", "r", "bit^2"),
            ("MPNil", "", "r:bit^2", "0", "end"),
        ],
    );
}

#[test]
fn bit_commitment_random_derivation() {
    const T: &str = "mu t.Bob+(bit).Bob&{loop.t, stop}";
    let d = role_derivation("bit_commitment.qmpst", "Random");
    assert!(d.theta.is_empty());
    assert_eq!(d.premises[0].theta.get("X").map(String::as_str), Some("(; mu t.Bob+(bit).Bob&{loop.t, stop})"));
    assert_rows(
        &d,
        &[
            ("MPDef", "", "", "def X() = qbit xq.H(xq).meas r = xq.Bob!<r>.Bob?{loop.X<>, stop} in X<>", T),
            ("QBit", "", "", "qbit xq.H(xq).meas r = xq.Bob!<r>.Bob?{loop.X<>, stop}", T),
            ("Unitary", "xq", "", "H(xq).meas r = xq.Bob!<r>.Bob?{loop.X<>, stop}", T),
            ("Meas", "xq", "", "meas r = xq.Bob!<r>.Bob?{loop.X<>, stop}", T),
            ("MPSel", "", "r:bit", "Bob!<r>.Bob?{loop.X<>, stop}", T),
            ("Var", "", "r:bit", "r", "bit"),
            ("MPBranch", "", "r:bit", "Bob?{loop.X<>, stop}", "Bob&{loop.mu t.Bob+(bit).Bob&{loop.t, stop}, stop}"),
            ("MPCall", "", "r:bit", "X<>", T),
            ("MPNil", "", "r:bit", "0", "end"),
            ("MPCall", "", "", "X<>", T),
        ],
    );
}
