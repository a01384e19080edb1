mod common;

use common::corpus::{faults, load};
use qmpst::cli::Loaded;
use qmpst::properties::*;
use qmpst::semantics::*;

fn failing(reports: &[CheckReport]) -> Vec<Check> {
    reports.iter().filter(|r| !r.pass).map(|r| r.check).collect()
}

fn sample(l: &Loaded, seed: u64) -> Trace {
    run_sample(&l.config, seed, DEFAULT_MAX_STEPS).unwrap()
}

fn tree(l: &Loaded) -> BranchTree {
    run_exhaustive(&l.config, DEFAULT_MAX_STEPS).unwrap()
}

fn verify(l: &Loaded, t: &Trace) -> Vec<Check> {
    failing(&verify_trace(t, l.global.as_ref().unwrap(), &l.gamma))
}

#[test]
fn corpus_trees_pass_every_check() {
    for (f, ps) in [
        ("teleportation.qmpst", &[][..]),
        ("secret_sharing.qmpst", &[]),
        ("bit_commitment.qmpst", &[]),
        ("bit_commitment.qmpst", &["xs=[1,1,0]"]),
        ("key_distribution.qmpst", &[]),
    ] {
        let l = load(f, ps);
        let reports = verify_tree(&tree(&l), l.global.as_ref().unwrap(), &l.gamma);
        assert_eq!(reports.len(), Check::ALL.len());
        assert!(failing(&reports).is_empty(), "{f}: {reports:?}");
    }
}

#[test]
fn corpus_samples_pass_every_check() {
    for f in ["teleportation.qmpst", "secret_sharing.qmpst", "bit_commitment.qmpst", "key_distribution.qmpst"] {
        let l = load(f, &[]);
        for seed in 0..40 {
            assert!(verify(&l, &sample(&l, seed)).is_empty(), "{f} seed {seed}");
        }
    }
}

#[test]
fn duplicated_qubit_is_caught() {
    let l = load("teleportation.qmpst", &[]);
    let mut t = sample(&l, 1);
    faults::duplicate_qubit(&mut t, "Bob");
    assert!(!check_unique_ownership(t.terminal()).pass);
    assert!(verify(&l, &t).contains(&Check::UniqueOwnership));
}

#[test]
fn reordered_communication_is_caught() {
    let l = load("teleportation.qmpst", &[]);
    let mut t = sample(&l, 1);
    faults::reorder_comms(&mut t);
    let r = check_session_fidelity(&t, l.global.as_ref().unwrap());
    assert!(!r.pass);
    assert!(r.counterexample.unwrap().reason.contains("no transition"));
}

/// A run that reaches the end without one of the protocol's messages.
#[test]
fn skipped_communication_is_caught() {
    let l = load("teleportation.qmpst", &[]);
    let mut t = sample(&l, 1);
    let end = t.terminal().clone();
    let last_comm = (0..t.steps.len())
        .rev()
        .find(|&i| matches!(t.steps[i].label, TransitionLabel::Comm { .. }))
        .unwrap();
    t.steps.remove(last_comm);
    t.steps.last_mut().unwrap().config = end;
    let r = check_session_fidelity(&t, l.global.as_ref().unwrap());
    assert!(r.counterexample.unwrap().reason.contains("still pending"));
    assert!(verify(&l, &t).contains(&Check::SessionFidelity));
}

#[test]
fn kept_measured_qubit_is_caught() {
    let l = load("teleportation.qmpst", &[]);
    let mut t = sample(&l, 1);
    faults::keep_measured_qubit(&mut t);
    let r = check_qubit_safety(&t);
    assert!(!r.pass);
    assert!(r.counterexample.unwrap().reason.contains("orphaned"));
}

#[test]
fn ill_typed_configuration_is_caught() {
    let l = load("teleportation.qmpst", &[]);
    let mut t = sample(&l, 1);
    faults::drop_process(&mut t, "Bob");
    assert!(!check_subject_reduction(&t, l.global.as_ref().unwrap(), &l.gamma).pass);
}

#[test]
fn dropped_measurement_outcome_is_caught() {
    let l = load("teleportation.qmpst", &[]);
    let mut tr = tree(&l);
    faults::drop_outcome(&mut tr);
    let bad = failing(&verify_tree(&tr, l.global.as_ref().unwrap(), &l.gamma));
    assert_eq!(bad, vec![Check::ProbabilitySums]);
}

#[test]
fn dropped_branch_is_caught() {
    let l = load("secret_sharing.qmpst", &[]);
    let mut tr = tree(&l);
    faults::drop_branch(&mut tr);
    assert!(!check_progress(&tr).pass);
    let bad = failing(&verify_tree(&tr, l.global.as_ref().unwrap(), &l.gamma));
    assert!(bad.contains(&Check::Progress));
}

#[test]
fn bad_step_probability_is_caught() {
    let l = load("teleportation.qmpst", &[]);
    let tr = tree(&l);
    let node = tr.nodes().into_iter().find(|n| n.children.len() > 1).unwrap();
    let mut steps = enabled(&node.config);
    let m = steps.iter_mut().find(|s| s.prob < 1.0).unwrap();
    m.prob *= 0.9;
    assert!(!probability_sums_of(&steps, &node.config, &[]).pass);
    assert!(check_probability_sums(&node.config).pass);
}

#[test]
fn counterexamples_serialise() {
    let l = load("teleportation.qmpst", &[]);
    let mut t = sample(&l, 1);
    let i = faults::keep_measured_qubit(&mut t);
    let j = serde_json::to_value(check_qubit_safety(&t)).unwrap();
    assert_eq!(j["check"], "qubit-safety");
    assert_eq!(j["pass"], false);
    assert_eq!(j["counterexample"]["path"].as_array().unwrap().len(), i + 1);
}
