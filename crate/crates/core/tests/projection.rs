mod common;

use std::collections::BTreeMap;

use common::*;
use proptest::prelude::*;
use qmpst::gtsem::{gt_step, gt_transitions};
use qmpst::projection::{merge, project, well_formed};
use qmpst::syntax::*;

fn well_formed_global() -> impl Strategy<Value = GlobalType> {
    global(4).prop_filter("projectable", |g| well_formed(g).is_ok())
}

fn head(t: &LocalType) -> LocalType {
    let mut t = t.clone();
    while t.as_rec().is_some() {
        t = t.unfold();
    }
    t
}

fn offered(branches: &[LocalBranch]) -> BTreeMap<Label, BaseType> {
    branches.iter().map(|b| (b.label.clone(), b.payload.clone())).collect()
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 300,
        max_global_rejects: 100_000,
        ..ProptestConfig::default()
    })]

    #[test]
    fn projection_harmony(g in well_formed_global()) {
        for (l, next) in gt_transitions(&g).unwrap() {
            let before = roles(&g);
            prop_assert!(roles(&next).is_subset(&before));
            let tp = head(&project(&g, &l.from).unwrap());
            let tq = head(&project(&g, &l.to).unwrap());
            let LocalType::IntChoice { to, branches: sent } = &tp else {
                return Err(TestCaseError::fail(format!("{} does not send in {g}", l.from)));
            };
            let LocalType::ExtChoice { from, branches: got } = &tq else {
                return Err(TestCaseError::fail(format!("{} does not receive in {g}", l.to)));
            };
            prop_assert_eq!(to, &l.to);
            prop_assert_eq!(from, &l.from);
            let (sent, got) = (offered(sent), offered(got));
            prop_assert_eq!(sent.get(&l.label), Some(&l.payload));
            for (lab, pay) in &sent {
                prop_assert_eq!(got.get(lab), Some(pay));
            }
            prop_assert!(well_formed(&next).is_ok(), "{} -> {}", g, next);
            for r in before.iter().filter(|r| **r != l.from && **r != l.to) {
                let a = project(&g, r).unwrap();
                let b = if roles(&next).contains(r) { project(&next, r).unwrap() } else { LocalType::End };
                prop_assert!(type_equal(&a, &b), "{r}: {a} vs {b} after {l} from {g}");
            }
        }
    }

    #[test]
    fn projection_ignores_unfolding(g in well_formed_global()) {
        let u = g.unfold();
        for r in roles(&g) {
            prop_assert!(type_equal(&project(&u, &r).unwrap(), &project(&g, &r).unwrap()));
        }
    }

    #[test]
    fn global_progress(g in well_formed_global()) {
        let ts = gt_transitions(&g).unwrap();
        let ended = matches!(head_global(&g), GlobalType::End);
        prop_assert_eq!(ts.is_empty(), ended);
    }

    #[test]
    fn one_successor_per_label(g in well_formed_global()) {
        let ts = gt_transitions(&g).unwrap();
        for (l, next) in &ts {
            prop_assert_eq!(ts.iter().filter(|(m, _)| m == l).count(), 1);
            prop_assert_eq!(&gt_step(&g, l).unwrap(), next);
        }
    }

    #[test]
    fn delayed_moves_avoid_the_head(g in well_formed_global()) {
        if let GlobalType::Comm { from, to, branches } = head_global(&g) {
            for (l, _) in gt_transitions(&g).unwrap() {
                let at_head = l.from == from && l.to == to && branches.iter().any(|b| b.label == l.label);
                if !at_head {
                    prop_assert!(l.from != from && l.from != to && l.to != from && l.to != to);
                }
            }
        }
    }

    #[test]
    fn merge_is_idempotent(t in local(4)) {
        let m = merge(&t, &t).unwrap();
        prop_assert!(type_equal(&m, &t));
    }

    #[test]
    fn merge_is_commutative(a in local(3), b in local(3), peer in 0..ROLES.len()) {
        let pairs = [(a.clone(), b.clone()), receive_both(peer, &a, &b)];
        for (x, y) in pairs {
            match (merge(&x, &y), merge(&y, &x)) {
                (Ok(m), Ok(n)) => prop_assert!(type_equal(&m, &n), "{m} vs {n}"),
                (Err(_), Err(_)) => {}
                (l, r) => return Err(TestCaseError::fail(format!("{x} / {y}: {l:?} vs {r:?}"))),
            }
        }
    }
}

fn head_global(g: &GlobalType) -> GlobalType {
    let mut g = g.clone();
    while g.as_rec().is_some() {
        g = g.unfold();
    }
    g
}

/// Two receptions from one peer under different labels, so that merging
/// usually succeeds.
fn receive_both(peer: usize, a: &LocalType, b: &LocalType) -> (LocalType, LocalType) {
    let from = Role::new(ROLES[peer]);
    let wrap = |label: &str, t: &LocalType| LocalType::ExtChoice {
        from: from.clone(),
        branches: vec![
            LocalBranch::new("shared", BaseType::Bit, LocalType::End),
            LocalBranch::new(label, BaseType::Bit, t.clone()),
        ],
    };
    (wrap("left", a), wrap("right", b))
}

#[test]
fn paper_style_merge_examples() {
    let l = parse_local("p&{a.end}").unwrap();
    let r = parse_local("p&{b(bit).end}").unwrap();
    assert!(type_equal(&merge(&l, &r).unwrap(), &parse_local("p&{a.end, b(bit).end}").unwrap()));
    let l = parse_local("p+{a(bit).end}").unwrap();
    let r = parse_local("p+{b(bit).end}").unwrap();
    assert!(merge(&l, &r).is_err());
}
