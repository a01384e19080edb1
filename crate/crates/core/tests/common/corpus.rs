use qmpst::cli::{load_str, Loaded};
use qmpst::semantics::{BranchTree, Trace, TransitionLabel};
use qmpst::syntax::{Process, QubitExpr, Role};

pub fn path(name: &str) -> String {
    format!("{}/../../corpus/{name}", env!("CARGO_MANIFEST_DIR"))
}

pub fn source(name: &str) -> String {
    std::fs::read_to_string(path(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn load(name: &str, params: &[&str]) -> Loaded {
    load_with(name, params, &[])
}

pub fn load_with(name: &str, params: &[&str], init: &[String]) -> Loaded {
    let params: Vec<String> = params.iter().map(|s| s.to_string()).collect();
    load_str(&source(name), &params, init).unwrap_or_else(|e| panic!("{name}: {e:?}"))
}

fn role(t: &Trace, name: &str) -> Role {
    t.initial.system.roles.keys().find(|r| r.as_str() == name).unwrap().clone()
}

/// Faults planted in otherwise valid runs, one per runtime check.
pub mod faults {
    use super::*;

    /// `victim` also claims a qubit of the final register.
    pub fn duplicate_qubit(t: &mut Trace, victim: &str) {
        let who = role(t, victim);
        let end = &mut t.steps.last_mut().unwrap().config;
        let q = end.state.qubits()[0].clone();
        match end.system.roles.get_mut(&who).unwrap() {
            Process::Inaction { owned } => owned.push(QubitExpr::Ref(q)),
            p => panic!("{victim} has not finished: {p}"),
        }
    }

    /// Swaps the labels of the first two communications.
    pub fn reorder_comms(t: &mut Trace) {
        let comms: Vec<usize> = (0..t.steps.len())
            .filter(|&i| matches!(t.steps[i].label, TransitionLabel::Comm { .. }))
            .collect();
        let (a, b) = (comms[0], comms[1]);
        let la = t.steps[a].label.clone();
        t.steps[a].label = t.steps[b].label.clone();
        t.steps[b].label = la;
    }

    /// Leaves the register untouched by the first measurement.
    pub fn keep_measured_qubit(t: &mut Trace) -> usize {
        let i = (1..t.steps.len())
            .find(|&i| t.steps[i].config.state.len() < t.steps[i - 1].config.state.len())
            .expect("a measurement");
        t.steps[i].config.state = t.steps[i - 1].config.state.clone();
        i
    }

    /// Replaces a role's process by `0` right after the first step.
    pub fn drop_process(t: &mut Trace, victim: &str) {
        let who = role(t, victim);
        t.steps[0].config.system.roles.insert(who, Process::nil());
    }

    fn first_branching(t: &mut BranchTree) -> &mut BranchTree {
        if t.children.len() > 1 {
            return t;
        }
        first_branching(&mut t.children[0].2)
    }

    /// Forgets one outcome of the first measurement.
    pub fn drop_outcome(t: &mut BranchTree) {
        first_branching(t).children.pop();
    }

    /// Cuts the tree at its first measurement.
    pub fn drop_branch(t: &mut BranchTree) {
        first_branching(t).children.clear();
    }
}
