use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::step::enabled;
use super::{Configuration, Redex, SemanticsError, Step, TransitionLabel};

pub const DEFAULT_MAX_STEPS: usize = 10_000;

/// Steps of the redex chosen by the default scheduler: the one whose
/// lowest participating role sorts first.
pub fn schedule(c: &Configuration) -> Vec<Step> {
    let steps = enabled(c);
    let Some(first) = steps.first().map(|s| s.redex.clone()) else {
        return steps;
    };
    steps.into_iter().filter(|s| s.redex == first).collect()
}

#[derive(Debug, Clone)]
pub struct TraceStep {
    pub redex: Redex,
    pub label: TransitionLabel,
    pub prob: f64,
    /// Configuration reached by this step.
    pub config: Configuration,
}

#[derive(Debug, Clone)]
pub struct Trace {
    pub initial: Configuration,
    pub steps: Vec<TraceStep>,
}

impl Trace {
    pub fn terminal(&self) -> &Configuration {
        self.steps.last().map(|s| &s.config).unwrap_or(&self.initial)
    }

    /// Configurations before each step, then the final one.
    pub fn configurations(&self) -> impl Iterator<Item = &Configuration> {
        std::iter::once(&self.initial).chain(self.steps.iter().map(|s| &s.config))
    }

    pub fn probability(&self) -> f64 {
        self.steps.iter().map(|s| s.prob).product()
    }
}

/// Runs the default scheduler, sampling measurement outcomes from a
/// generator seeded with `seed`.
pub fn run_sample(c: &Configuration, seed: u64, max_steps: usize) -> Result<Trace, SemanticsError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cur = c.clone();
    let mut steps = Vec::new();
    loop {
        let mut choices = schedule(&cur);
        if choices.is_empty() {
            break;
        }
        if steps.len() == max_steps {
            return Err(SemanticsError::DepthExceeded(max_steps));
        }
        let pick = if choices.len() == 1 {
            0
        } else {
            let u: f64 = rng.gen();
            let mut acc = 0.0;
            let mut idx = choices.len() - 1;
            for (i, s) in choices.iter().enumerate() {
                acc += s.prob;
                if u < acc {
                    idx = i;
                    break;
                }
            }
            idx
        };
        let s = choices.swap_remove(pick);
        cur = s.next.clone();
        steps.push(TraceStep {
            redex: s.redex,
            label: s.label,
            prob: s.prob,
            config: s.next,
        });
    }
    Ok(Trace {
        initial: c.clone(),
        steps,
    })
}

#[derive(Debug, Clone)]
pub struct BranchTree {
    pub config: Configuration,
    pub children: Vec<(TransitionLabel, f64, BranchTree)>,
}

#[derive(Debug, Clone)]
pub struct Leaf<'a> {
    pub prob: f64,
    pub labels: Vec<&'a TransitionLabel>,
    pub config: &'a Configuration,
}

impl BranchTree {
    pub fn leaves(&self) -> Vec<Leaf<'_>> {
        let mut out = Vec::new();
        fn go<'a>(t: &'a BranchTree, prob: f64, path: &mut Vec<&'a TransitionLabel>, out: &mut Vec<Leaf<'a>>) {
            if t.children.is_empty() {
                out.push(Leaf {
                    prob,
                    labels: path.clone(),
                    config: &t.config,
                });
            }
            for (l, p, c) in &t.children {
                path.push(l);
                go(c, prob * p, path, out);
                path.pop();
            }
        }
        go(self, 1.0, &mut Vec::new(), &mut out);
        out
    }

    pub fn node_count(&self) -> usize {
        1 + self.children.iter().map(|(_, _, c)| c.node_count()).sum::<usize>()
    }

    /// Every node with its children, preorder.
    pub fn nodes(&self) -> Vec<&BranchTree> {
        let mut out = vec![self];
        for (_, _, c) in &self.children {
            out.extend(c.nodes());
        }
        out
    }
}

/// Enumerates every probabilistic outcome under the default scheduler.
pub fn run_exhaustive(c: &Configuration, max_depth: usize) -> Result<BranchTree, SemanticsError> {
    fn go(c: Configuration, depth: usize, max: usize) -> Result<BranchTree, SemanticsError> {
        let steps = schedule(&c);
        if !steps.is_empty() && depth == max {
            return Err(SemanticsError::DepthExceeded(max));
        }
        let mut children = Vec::with_capacity(steps.len());
        for s in steps {
            children.push((s.label, s.prob, go(s.next, depth + 1, max)?));
        }
        Ok(BranchTree { config: c, children })
    }
    go(c.clone(), 0, max_depth)
}

/// Summary of an exploration over every redex order.
#[derive(Debug, Clone)]
pub struct Interleavings {
    pub states: usize,
    /// Distinct final configurations, by fingerprint.
    pub terminal: Vec<Configuration>,
    pub stuck: Vec<Configuration>,
}

/// Explores all scheduling choices and outcomes, visiting each distinct
/// configuration once.
pub fn explore_interleavings(c: &Configuration, max_states: usize) -> Result<Interleavings, SemanticsError> {
    let mut seen = HashSet::new();
    let mut stack = vec![c.clone()];
    let mut out = Interleavings {
        states: 0,
        terminal: Vec::new(),
        stuck: Vec::new(),
    };
    seen.insert(c.fingerprint());
    while let Some(cur) = stack.pop() {
        out.states += 1;
        if out.states > max_states {
            return Err(SemanticsError::StateLimit(max_states));
        }
        let steps = enabled(&cur);
        if steps.is_empty() {
            if cur.is_terminal() {
                out.terminal.push(cur);
            } else {
                out.stuck.push(cur);
            }
            continue;
        }
        for s in steps.into_iter().rev() {
            if seen.insert(s.next.fingerprint()) {
                stack.push(s.next);
            }
        }
    }
    Ok(out)
}
