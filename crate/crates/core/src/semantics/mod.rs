//! Probabilistic reduction of configurations `<register, system>`.

mod eval;
mod explore;
mod step;
mod subst;
mod trace;

use std::collections::hash_map::DefaultHasher;
use std::fmt;
use std::hash::{Hash, Hasher};

use thiserror::Error;

pub use eval::{eval_expr, EvalError};
pub use explore::{
    explore_interleavings, run_exhaustive, run_sample, schedule, BranchTree, Interleavings, Leaf,
    Trace, TraceStep, DEFAULT_MAX_STEPS,
};
pub use step::{enabled, fresh_name};
pub use subst::{called, collect_garbage, qubit_refs, subst_binder, subst_expr, subst_process};
pub use trace::{config_json, trace_json, tree_json};

use crate::quantum::QuantumState;
use crate::syntax::{free_process_vars, Label, Role, System, Value};

#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    pub state: QuantumState,
    pub system: System,
}

impl Configuration {
    /// Pairs a register with a system, turning free variables that name
    /// register qubits into references.
    pub fn new(state: QuantumState, system: System) -> Self {
        let names: Vec<String> = state.qubits().to_vec();
        let roles = system
            .roles
            .into_iter()
            .map(|(r, mut p)| {
                let fv = free_process_vars(&p);
                for q in names.iter().filter(|q| fv.contains(*q)) {
                    p = subst_process(&p, q, &Value::QubitRef(q.clone()));
                }
                (r, p)
            })
            .collect();
        Configuration {
            state,
            system: System { roles },
        }
    }

    pub fn is_terminal(&self) -> bool {
        self.system.is_terminal()
    }

    /// Hash of the system and the amplitudes rounded to 1e-9.
    pub fn fingerprint(&self) -> u64 {
        let mut h = DefaultHasher::new();
        self.system.hash(&mut h);
        self.state.qubits().hash(&mut h);
        for a in self.state.amplitudes() {
            ((a.re * 1e9).round() as i64).hash(&mut h);
            ((a.im * 1e9).round() as i64).hash(&mut h);
        }
        h.finish()
    }
}

/// The participants of one redex.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Redex {
    Comp(Role),
    Comm(Role, Role),
}

impl Redex {
    /// Scheduling key: the lowest role involved.
    pub fn key(&self) -> &Role {
        match self {
            Redex::Comp(r) => r,
            Redex::Comm(a, b) => a.min(b),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TransitionLabel {
    Comm {
        from: Role,
        to: Role,
        label: Label,
        value: Value,
    },
    Comp {
        role: Role,
    },
}

impl fmt::Display for TransitionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TransitionLabel::Comm {
                from,
                to,
                label,
                value,
            } => write!(f, "{from}->{to}:{label}({value})"),
            TransitionLabel::Comp { role } => write!(f, "{role}"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Step {
    pub redex: Redex,
    pub label: TransitionLabel,
    pub prob: f64,
    pub next: Configuration,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SemanticsError {
    #[error("run exceeded {0} steps")]
    DepthExceeded(usize),
    #[error("exploration exceeded {0} distinct configurations")]
    StateLimit(usize),
}
