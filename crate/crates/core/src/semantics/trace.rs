use serde_json::{json, Map, Value as Json};

use super::{BranchTree, Configuration, Trace, TransitionLabel};
use crate::syntax::Process;

fn step_json(label: &TransitionLabel, prob: f64) -> Json {
    match label {
        TransitionLabel::Comm {
            from,
            to,
            label,
            value,
        } => json!({
            "kind": "comm",
            "from": from.as_str(),
            "to": to.as_str(),
            "label": label.as_str(),
            "value": value.to_string(),
            "prob": prob,
        }),
        TransitionLabel::Comp { role } => json!({
            "kind": "comp",
            "from": role.as_str(),
            "prob": prob,
        }),
    }
}

/// A configuration as `{roles, register}`.
pub fn config_json(c: &Configuration) -> Json {
    let mut roles = Map::new();
    for (r, p) in &c.system.roles {
        let shown = match p {
            Process::Inaction { .. } => p.to_string(),
            other => crate::syntax::one_line(other),
        };
        roles.insert(r.to_string(), Json::String(shown));
    }
    json!({
        "roles": roles,
        "register": c.state.to_json(),
    })
}

/// Trace in the documented JSON layout.
pub fn trace_json(t: &Trace) -> Json {
    json!({
        "steps": t.steps.iter().map(|s| step_json(&s.label, s.prob)).collect::<Vec<_>>(),
        "terminal": config_json(t.terminal()),
    })
}

/// Leaves of an exhaustive run with their paths and probabilities.
pub fn tree_json(t: &BranchTree) -> Json {
    let leaves: Vec<Json> = t
        .leaves()
        .iter()
        .map(|l| {
            json!({
                "prob": l.prob,
                "path": l.labels.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
                "terminal": config_json(l.config),
            })
        })
        .collect();
    json!({ "leaves": leaves, "nodes": t.node_count() })
}
