//! Runtime oracles for the metatheory: each check inspects a run and
//! reports the first configuration that violates its property.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;

use crate::gtsem::{find_transition, gt_transitions};
use crate::semantics::{enabled, qubit_refs, BranchTree, Configuration, Redex, Step, Trace, TransitionLabel};
use crate::syntax::{GlobalType, Role, System};
use crate::typecheck::{type_runtime_system, value_has_type, ClassicalEnv, QubitEnv};

pub const PROB_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Check {
    SubjectReduction,
    SessionFidelity,
    UniqueOwnership,
    QubitSafety,
    Progress,
    ProbabilitySums,
}

impl Check {
    pub const ALL: [Check; 6] = [
        Check::SubjectReduction,
        Check::SessionFidelity,
        Check::UniqueOwnership,
        Check::QubitSafety,
        Check::Progress,
        Check::ProbabilitySums,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::SubjectReduction => "subject-reduction",
            Check::SessionFidelity => "session-fidelity",
            Check::UniqueOwnership => "unique-ownership",
            Check::QubitSafety => "qubit-safety",
            Check::Progress => "progress",
            Check::ProbabilitySums => "probability-sums",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Counterexample {
    /// Transition labels from the initial configuration.
    pub path: Vec<String>,
    pub configuration: serde_json::Value,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub check: Check,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Counterexample>,
}

impl CheckReport {
    fn pass(check: Check) -> Self {
        CheckReport {
            check,
            pass: true,
            counterexample: None,
        }
    }

    fn fail(check: Check, path: &[&TransitionLabel], c: &Configuration, reason: impl Into<String>) -> Self {
        CheckReport {
            check,
            pass: false,
            counterexample: Some(Counterexample {
                path: path.iter().map(|l| l.to_string()).collect(),
                configuration: config_summary(c),
                reason: reason.into(),
            }),
        }
    }
}

fn config_summary(c: &Configuration) -> serde_json::Value {
    let roles: BTreeMap<String, String> = c
        .system
        .roles
        .iter()
        .map(|(r, p)| (r.to_string(), p.to_string()))
        .collect();
    serde_json::json!({ "roles": roles, "register": c.state.qubits() })
}

fn register(c: &Configuration) -> QubitEnv {
    c.state.qubits().iter().cloned().collect()
}

/// Advances `g` along a communication, or explains why it cannot.
fn advance(g: &GlobalType, label: &TransitionLabel) -> Result<GlobalType, String> {
    let TransitionLabel::Comm {
        from,
        to,
        label: l,
        value,
    } = label
    else {
        return Ok(g.clone());
    };
    match find_transition(g, from, to, l) {
        Ok(Some((gl, next))) => {
            if value_has_type(value, &gl.payload) {
                Ok(next)
            } else {
                Err(format!("value {value} does not have the payload type {}", gl.payload))
            }
        }
        Ok(None) => Err(format!("the global type {g} has no transition {label}")),
        Err(e) => Err(e.to_string()),
    }
}

fn typed(gamma: &ClassicalEnv, c: &Configuration, g: &GlobalType) -> Result<(), String> {
    type_runtime_system(gamma, &register(c), &c.system, g).map_err(|es| {
        es.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("; ")
    })
}

fn owners(c: &Configuration) -> BTreeMap<&Role, BTreeSet<String>> {
    c.system.roles.iter().map(|(r, p)| (r, qubit_refs(p))).collect()
}

/// Distinct roles own disjoint qubits, all of them in the register.
pub fn check_unique_ownership(c: &Configuration) -> CheckReport {
    unique_ownership_at(c, &[])
}

fn unique_ownership_at(c: &Configuration, path: &[&TransitionLabel]) -> CheckReport {
    let reg = register(c);
    let mut seen: BTreeMap<&String, &Role> = BTreeMap::new();
    let own = owners(c);
    for (r, qs) in &own {
        for q in qs {
            if let Some(other) = seen.insert(q, r) {
                return CheckReport::fail(
                    Check::UniqueOwnership,
                    path,
                    c,
                    format!("qubit {q} is held by both {other} and {r}"),
                );
            }
            if !reg.contains(q) {
                return CheckReport::fail(
                    Check::UniqueOwnership,
                    path,
                    c,
                    format!("{r} refers to {q}, which is not in the register"),
                );
            }
        }
    }
    CheckReport::pass(Check::UniqueOwnership)
}

fn qubit_safety_at(c: &Configuration, path: &[&TransitionLabel]) -> Option<CheckReport> {
    let held: BTreeSet<String> = owners(c).into_values().flatten().collect();
    let reg = register(c);
    if held != reg {
        let orphaned: Vec<_> = reg.difference(&held).cloned().collect();
        let dangling: Vec<_> = held.difference(&reg).cloned().collect();
        return Some(CheckReport::fail(
            Check::QubitSafety,
            path,
            c,
            format!("orphaned qubits {orphaned:?}, dangling references {dangling:?}"),
        ));
    }
    None
}

/// Alternative outcomes of each redex sum to one.
pub fn check_probability_sums(c: &Configuration) -> CheckReport {
    probability_sums_of(&enabled(c), c, &[])
}

/// Same check over an explicit list of steps.
pub fn probability_sums_of(steps: &[Step], c: &Configuration, path: &[&TransitionLabel]) -> CheckReport {
    let mut sums: BTreeMap<&Redex, f64> = BTreeMap::new();
    for s in steps {
        if !(s.prob > 0.0 && s.prob <= 1.0 + PROB_TOLERANCE) {
            return CheckReport::fail(
                Check::ProbabilitySums,
                path,
                c,
                format!("step {} has probability {}", s.label, s.prob),
            );
        }
        *sums.entry(&s.redex).or_default() += s.prob;
    }
    for (r, total) in sums {
        if (total - 1.0).abs() > PROB_TOLERANCE {
            return CheckReport::fail(
                Check::ProbabilitySums,
                path,
                c,
                format!("outcomes of {r:?} sum to {total}"),
            );
        }
    }
    CheckReport::pass(Check::ProbabilitySums)
}

/// Re-types every configuration of the run, advancing `g` on communications.
pub fn check_subject_reduction(run: &Trace, g: &GlobalType, gamma: &ClassicalEnv) -> CheckReport {
    subject_reduction_with(run, g, &mut |c, g| typed(gamma, c, g))
}

fn subject_reduction_with(
    run: &Trace,
    g: &GlobalType,
    typed: &mut dyn FnMut(&Configuration, &GlobalType) -> Result<(), String>,
) -> CheckReport {
    let mut cur = g.clone();
    let mut path = Vec::new();
    if let Err(e) = typed(&run.initial, &cur) {
        return CheckReport::fail(Check::SubjectReduction, &path, &run.initial, e);
    }
    for s in &run.steps {
        path.push(&s.label);
        cur = match advance(&cur, &s.label) {
            Ok(n) => n,
            Err(e) => return CheckReport::fail(Check::SubjectReduction, &path, &s.config, e),
        };
        if let Err(e) = typed(&s.config, &cur) {
            return CheckReport::fail(Check::SubjectReduction, &path, &s.config, e);
        }
    }
    CheckReport::pass(Check::SubjectReduction)
}

/// The communications of the run form a path of the global LTS; a run
/// that terminates leaves nothing of the protocol pending.
pub fn check_session_fidelity(run: &Trace, g: &GlobalType) -> CheckReport {
    let mut cur = g.clone();
    let mut path = Vec::new();
    for s in &run.steps {
        path.push(&s.label);
        cur = match advance(&cur, &s.label) {
            Ok(n) => n,
            Err(e) => return CheckReport::fail(Check::SessionFidelity, &path, &s.config, e),
        };
    }
    let end = run.terminal();
    if end.is_terminal() {
        match gt_transitions(&cur) {
            Ok(ts) if ts.is_empty() => {}
            Ok(ts) => {
                return CheckReport::fail(
                    Check::SessionFidelity,
                    &path,
                    end,
                    format!("run ended while {} is still pending", ts[0].0),
                )
            }
            Err(e) => return CheckReport::fail(Check::SessionFidelity, &path, end, e.to_string()),
        }
    }
    CheckReport::pass(Check::SessionFidelity)
}

/// At every configuration the register holds exactly the referenced qubits.
pub fn check_qubit_safety(run: &Trace) -> CheckReport {
    let mut path = Vec::new();
    if let Some(r) = qubit_safety_at(&run.initial, &path) {
        return r;
    }
    for s in &run.steps {
        path.push(&s.label);
        if let Some(r) = qubit_safety_at(&s.config, &path) {
            return r;
        }
    }
    CheckReport::pass(Check::QubitSafety)
}

/// No leaf of the tree is stuck.
pub fn check_progress(tree: &BranchTree) -> CheckReport {
    fn go<'a>(t: &'a BranchTree, path: &mut Vec<&'a TransitionLabel>) -> Option<CheckReport> {
        if t.children.is_empty() && !t.config.is_terminal() {
            return Some(CheckReport::fail(
                Check::Progress,
                path,
                &t.config,
                "configuration is stuck",
            ));
        }
        for (l, _, c) in &t.children {
            path.push(l);
            if let Some(r) = go(c, path) {
                return Some(r);
            }
            path.pop();
        }
        None
    }
    go(tree, &mut Vec::new()).unwrap_or_else(|| CheckReport::pass(Check::Progress))
}

/// Runs every check along a single trace.
pub fn verify_trace(run: &Trace, g: &GlobalType, gamma: &ClassicalEnv) -> Vec<CheckReport> {
    Verifier::new(g, gamma).trace(run)
}

/// Checks many runs of one protocol. A verdict depends only on the
/// configuration and the remaining global type, so it is kept for
/// configurations met again in later runs.
pub struct Verifier<'a> {
    g: &'a GlobalType,
    gamma: &'a ClassicalEnv,
    typed: HashMap<(System, Vec<String>, GlobalType), Result<(), String>>,
    sums_ok: HashMap<u64, Vec<Configuration>>,
}

impl<'a> Verifier<'a> {
    pub fn new(g: &'a GlobalType, gamma: &'a ClassicalEnv) -> Self {
        Verifier {
            g,
            gamma,
            typed: HashMap::new(),
            sums_ok: HashMap::new(),
        }
    }

    pub fn trace(&mut self, run: &Trace) -> Vec<CheckReport> {
        let labels: Vec<&TransitionLabel> = run.steps.iter().map(|s| &s.label).collect();
        let configs: Vec<&Configuration> = run.configurations().collect();
        let first_failure = |f: &mut dyn FnMut(&Configuration, &[&TransitionLabel]) -> CheckReport, check| {
            for (i, c) in configs.iter().enumerate() {
                let r = f(c, &labels[..i]);
                if !r.pass {
                    return r;
                }
            }
            CheckReport::pass(check)
        };
        let progress = if run.terminal().is_terminal() {
            CheckReport::pass(Check::Progress)
        } else {
            CheckReport::fail(Check::Progress, &labels, run.terminal(), "configuration is stuck")
        };
        let (gamma, cache) = (self.gamma, &mut self.typed);
        let subject = subject_reduction_with(run, self.g, &mut |c, g| {
            let key = (c.system.clone(), c.state.qubits().to_vec(), g.clone());
            if let Some(r) = cache.get(&key) {
                return r.clone();
            }
            let r = typed(gamma, c, g);
            cache.insert(key, r.clone());
            r
        });
        let sums_ok = &mut self.sums_ok;
        let sums = first_failure(
            &mut |c, p| {
                let seen = sums_ok.entry(c.fingerprint()).or_default();
                if seen.contains(c) {
                    return CheckReport::pass(Check::ProbabilitySums);
                }
                let r = probability_sums_of(&enabled(c), c, p);
                if r.pass {
                    seen.push(c.clone());
                }
                r
            },
            Check::ProbabilitySums,
        );
        vec![
            subject,
            check_session_fidelity(run, self.g),
            first_failure(&mut unique_ownership_at, Check::UniqueOwnership),
            check_qubit_safety(run),
            progress,
            sums,
        ]
    }
}

/// Runs every check on each node and along each path of an exhaustive tree.
pub fn verify_tree(tree: &BranchTree, g: &GlobalType, gamma: &ClassicalEnv) -> Vec<CheckReport> {
    let mut reports: BTreeMap<&'static str, CheckReport> = Check::ALL
        .iter()
        .map(|c| (c.name(), CheckReport::pass(*c)))
        .collect();
    let mut record = |r: CheckReport| {
        let slot = reports.get_mut(r.check.name()).expect("known check");
        if slot.pass && !r.pass {
            *slot = r;
        }
    };
    if let Err(e) = typed(gamma, &tree.config, g) {
        record(CheckReport::fail(Check::SubjectReduction, &[], &tree.config, e));
    }
    record(check_progress(tree));
    let mut stack: Vec<(&BranchTree, GlobalType, Vec<&TransitionLabel>)> = vec![(tree, g.clone(), vec![])];
    while let Some((node, g_here, path)) = stack.pop() {
        let c = &node.config;
        record(unique_ownership_at(c, &path));
        if let Some(r) = qubit_safety_at(c, &path) {
            record(r);
        }
        record(probability_sums_of(&enabled(c), c, &path));
        if !node.children.is_empty() {
            let total: f64 = node.children.iter().map(|(_, p, _)| p).sum();
            if (total - 1.0).abs() > PROB_TOLERANCE {
                record(CheckReport::fail(
                    Check::ProbabilitySums,
                    &path,
                    c,
                    format!("explored outcomes sum to {total}"),
                ));
            }
        } else if c.is_terminal() {
            if let Ok(ts) = gt_transitions(&g_here) {
                if let Some((l, _)) = ts.first() {
                    record(CheckReport::fail(
                        Check::SessionFidelity,
                        &path,
                        c,
                        format!("run ended while {l} is still pending"),
                    ));
                }
            }
        }
        for (l, _, child) in &node.children {
            let mut p = path.clone();
            p.push(l);
            match advance(&g_here, l) {
                Ok(next) => {
                    if let Err(e) = typed(gamma, &child.config, &next) {
                        record(CheckReport::fail(Check::SubjectReduction, &p, &child.config, e));
                    }
                    stack.push((child, next, p));
                }
                Err(e) => {
                    record(CheckReport::fail(Check::SessionFidelity, &p, &child.config, e.clone()));
                    record(CheckReport::fail(Check::SubjectReduction, &p, &child.config, e));
                }
            }
        }
    }
    Check::ALL.iter().map(|c| reports.remove(c.name()).expect("present")).collect()
}
