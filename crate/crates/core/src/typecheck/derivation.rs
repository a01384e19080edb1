use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

/// One judgement `Θ; Γ; Σ ⊢ subject : ty` with the premises that justify it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Default)]
pub struct Derivation {
    pub rule: String,
    pub theta: BTreeMap<String, String>,
    pub gamma: BTreeMap<String, String>,
    pub sigma: Vec<String>,
    pub subject: String,
    pub ty: String,
    pub premises: Vec<Derivation>,
}

impl Derivation {
    /// Rule names along the leftmost spine, then each premise in order.
    pub fn rules_preorder(&self) -> Vec<&str> {
        let mut out = vec![self.rule.as_str()];
        for p in &self.premises {
            out.extend(p.rules_preorder());
        }
        out
    }

    pub fn size(&self) -> usize {
        1 + self.premises.iter().map(Derivation::size).sum::<usize>()
    }

    fn judgement(&self) -> String {
        let theta: Vec<String> = self.theta.iter().map(|(k, v)| format!("{k}:{v}")).collect();
        let gamma: Vec<String> = self.gamma.iter().map(|(k, v)| format!("{k}:{v}")).collect();
        let sigma: Vec<String> = self.sigma.iter().map(|q| format!("{q}:qbit")).collect();
        let show = |v: &[String]| if v.is_empty() { "∅".to_string() } else { v.join(", ") };
        format!(
            "{}; {}; {} ⊢ {} : {}",
            show(&theta),
            show(&gamma),
            show(&sigma),
            self.subject,
            self.ty
        )
    }

    fn write_tree(&self, f: &mut fmt::Formatter<'_>, depth: usize) -> fmt::Result {
        writeln!(f, "{:indent$}[{}] {}", "", self.rule, self.judgement(), indent = depth * 2)?;
        for p in &self.premises {
            p.write_tree(f, depth + 1)?;
        }
        Ok(())
    }
}

impl fmt::Display for Derivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_tree(f, 0)
    }
}
