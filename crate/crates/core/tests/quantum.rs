mod common;

use common::oracle::*;
use num_complex::Complex64;
use proptest::prelude::*;
use qmpst::quantum::{matrix, QuantumState};
use qmpst::syntax::Gate;

fn register(max: usize) -> impl Strategy<Value = QuantumState> {
    (1..=max).prop_flat_map(|n| {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1 << n).prop_filter_map(
            "non-zero vector",
            move |raw| {
                let amps: Vec<Complex64> = raw.iter().map(|&(r, i)| Complex64::new(r, i)).collect();
                if amps.iter().map(|a| a.norm_sqr()).sum::<f64>() < 1e-6 {
                    return None;
                }
                let names = (0..n).map(|k| format!("q{k}")).collect();
                QuantumState::from_amplitudes(names, amps).ok()
            },
        )
    })
}

fn gate() -> impl Strategy<Value = Gate> {
    prop_oneof![
        Just(Gate::H),
        Just(Gate::X),
        Just(Gate::Y),
        Just(Gate::Z),
        Just(Gate::I),
        Just(Gate::Cnot),
        Just(Gate::Cswap),
        (-6.3f64..6.3).prop_map(Gate::Ry),
    ]
}

/// A register, a gate and distinct targets for it.
fn application() -> impl Strategy<Value = (QuantumState, Gate, Vec<String>)> {
    (register(6), gate())
        .prop_filter("enough qubits", |(s, g)| s.len() >= g.arity())
        .prop_flat_map(|(s, g)| {
            let names = s.qubits().to_vec();
            let k = g.arity();
            (Just(s), Just(g), Just(names).prop_shuffle().prop_map(move |v| v[..k].to_vec()))
        })
}

fn refs(v: &[String]) -> Vec<&str> {
    v.iter().map(String::as_str).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn gates_preserve_norm((s, g, ts) in application()) {
        let mut t = s.clone();
        t.apply(g, &refs(&ts)).unwrap();
        prop_assert!((t.norm() - 1.0).abs() < TOL);
    }

    #[test]
    fn gates_are_unitary((s, g, ts) in application()) {
        let mut t = s.clone();
        t.apply(g, &refs(&ts)).unwrap();
        t.apply_operator(&adjoint(&matrix(g)), &refs(&ts)).unwrap();
        prop_assert!(close(t.amplitudes(), s.amplitudes()));
    }

    #[test]
    fn outcome_probabilities_are_complete(s in register(6), pick in any::<prop::sample::Index>()) {
        let q = pick.get(s.qubits()).clone();
        let p0 = s.prob(&[&q], &[0]).unwrap();
        let p1 = s.prob(&[&q], &[1]).unwrap();
        prop_assert!((p0 + p1 - 1.0).abs() < TOL);
        let branches = s.measure_branches(&[&q]).unwrap();
        let total: f64 = branches.iter().map(|b| b.1).sum();
        prop_assert!((total - 1.0).abs() < TOL);
        for (_, _, post) in &branches {
            prop_assert!((post.norm() - 1.0).abs() < TOL);
        }
    }

    #[test]
    fn measurement_matches_enumeration(s in register(6), mask in any::<u8>(), out in any::<u8>()) {
        let names = s.qubits().to_vec();
        let targets: Vec<&str> = names
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, q)| q.as_str())
            .collect();
        prop_assume!(!targets.is_empty());
        let outcome: Vec<u8> = (0..targets.len()).map(|i| out >> i & 1).collect();
        let (p, names, amps) = brute_force(&s, &targets, &outcome);
        match s.project_measure(&targets, &outcome) {
            Ok((q, post)) => {
                prop_assert!((p - q).abs() < TOL);
                prop_assert_eq!(post.qubits(), &names[..]);
                prop_assert!(close(post.amplitudes(), &amps));
            }
            Err(_) => prop_assert!(p < 1e-12),
        }
    }

    #[test]
    fn register_order_is_irrelevant(s in register(5), perm in any::<prop::sample::Index>(), out in any::<u8>()) {
        let mut order = s.qubits().to_vec();
        let k = perm.index(order.len());
        order.rotate_left(k);
        order.reverse();
        let r = s.reordered(&refs(&order)).unwrap();
        let t = [s.qubits()[0].as_str()];
        let bit = [out & 1];
        prop_assert!((s.prob(&t, &bit).unwrap() - r.prob(&t, &bit).unwrap()).abs() < TOL);
        if let (Ok((_, a)), Ok((_, b))) = (s.project_measure(&t, &bit), r.project_measure(&t, &bit)) {
            let names: Vec<String> = a.qubits().to_vec();
            let b = b.reordered(&refs(&names)).unwrap();
            prop_assert!(close(a.amplitudes(), b.amplitudes()));
        }
    }

    #[test]
    fn alloc_keeps_norm(s in register(5)) {
        let mut t = s.clone();
        t.alloc("fresh").unwrap();
        prop_assert!((t.norm() - 1.0).abs() < TOL);
        prop_assert!((t.prob(&["fresh"], &[0]).unwrap() - 1.0).abs() < TOL);
    }
}

#[test]
fn bell_pair_measurement() {
    let mut s = QuantumState::new();
    s.alloc("a").unwrap();
    s.alloc("b").unwrap();
    s.apply(Gate::H, &["a"]).unwrap();
    s.apply(Gate::Cnot, &["a", "b"]).unwrap();
    let bs = s.measure_branches(&["a"]).unwrap();
    assert_eq!(bs.len(), 2);
    for (bits, p, post) in bs {
        assert!((p - 0.5).abs() < TOL);
        assert!((post.prob(&["b"], &bits).unwrap() - 1.0).abs() < TOL);
    }
}
