//! Abstract syntax for types, expressions, processes and systems.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// A protocol participant, compared by name.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Role(pub String);

impl Role {
    pub fn new(name: impl Into<String>) -> Self {
        Role(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A choice label. The implicit label of an unlabelled singleton choice is `_`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Label(pub String);

impl Label {
    pub const IMPLICIT: &'static str = "_";

    pub fn new(name: impl Into<String>) -> Self {
        Label(name.into())
    }

    pub fn implicit() -> Self {
        Label(Self::IMPLICIT.to_string())
    }

    pub fn is_implicit(&self) -> bool {
        self.0 == Self::IMPLICIT
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Basic (payload) types.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum BaseType {
    Bit,
    Qubit,
    Unit,
    Int,
    /// Arity is at least two.
    Tuple(Vec<BaseType>),
    /// Element type is classical.
    List(Box<BaseType>),
}

impl BaseType {
    pub fn bits(n: usize) -> BaseType {
        BaseType::Tuple(vec![BaseType::Bit; n])
    }

    pub fn qubits(n: usize) -> BaseType {
        BaseType::Tuple(vec![BaseType::Qubit; n])
    }

    pub fn bit_list() -> BaseType {
        BaseType::List(Box::new(BaseType::Bit))
    }

    /// True when a qubit occurs anywhere inside the type.
    pub fn has_qubit(&self) -> bool {
        match self {
            BaseType::Qubit => true,
            BaseType::Tuple(ts) => ts.iter().any(BaseType::has_qubit),
            BaseType::List(t) => t.has_qubit(),
            _ => false,
        }
    }

    pub fn is_classical(&self) -> bool {
        !self.has_qubit()
    }
}

/// One branch of a global interaction.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GlobalBranch {
    pub label: Label,
    pub payload: BaseType,
    pub cont: GlobalType,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum GlobalType {
    Comm {
        from: Role,
        to: Role,
        branches: Vec<GlobalBranch>,
    },
    Rec {
        var: String,
        body: Box<GlobalType>,
    },
    Var(String),
    End,
}

impl GlobalType {
    pub fn comm(from: &str, to: &str, branches: Vec<GlobalBranch>) -> Self {
        GlobalType::Comm {
            from: Role::new(from),
            to: Role::new(to),
            branches,
        }
    }

    /// Unlabelled singleton interaction `from->to:(payload).cont`.
    pub fn send(from: &str, to: &str, payload: BaseType, cont: GlobalType) -> Self {
        Self::comm(
            from,
            to,
            vec![GlobalBranch {
                label: Label::implicit(),
                payload,
                cont,
            }],
        )
    }

    pub fn rec(var: &str, body: GlobalType) -> Self {
        GlobalType::Rec {
            var: var.to_string(),
            body: Box::new(body),
        }
    }

    pub fn var(var: &str) -> Self {
        GlobalType::Var(var.to_string())
    }
}

impl GlobalBranch {
    pub fn new(label: &str, payload: BaseType, cont: GlobalType) -> Self {
        GlobalBranch {
            label: Label::new(label),
            payload,
            cont,
        }
    }
}

/// One branch of a local choice.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LocalBranch {
    pub label: Label,
    pub payload: BaseType,
    pub cont: LocalType,
}

impl LocalBranch {
    pub fn new(label: &str, payload: BaseType, cont: LocalType) -> Self {
        LocalBranch {
            label: Label::new(label),
            payload,
            cont,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LocalType {
    /// Receive from `from` (external choice).
    ExtChoice {
        from: Role,
        branches: Vec<LocalBranch>,
    },
    /// Send to `to` (internal choice).
    IntChoice {
        to: Role,
        branches: Vec<LocalBranch>,
    },
    Rec {
        var: String,
        body: Box<LocalType>,
    },
    Var(String),
    End,
}

impl LocalType {
    pub fn recv(from: &str, payload: BaseType, cont: LocalType) -> Self {
        LocalType::ExtChoice {
            from: Role::new(from),
            branches: vec![LocalBranch {
                label: Label::implicit(),
                payload,
                cont,
            }],
        }
    }

    pub fn send(to: &str, payload: BaseType, cont: LocalType) -> Self {
        LocalType::IntChoice {
            to: Role::new(to),
            branches: vec![LocalBranch {
                label: Label::implicit(),
                payload,
                cont,
            }],
        }
    }

    pub fn rec(var: &str, body: LocalType) -> Self {
        LocalType::Rec {
            var: var.to_string(),
            body: Box::new(body),
        }
    }

    pub fn var(var: &str) -> Self {
        LocalType::Var(var.to_string())
    }

    pub fn branches(&self) -> Option<&[LocalBranch]> {
        match self {
            LocalType::ExtChoice { branches, .. } | LocalType::IntChoice { branches, .. } => {
                Some(branches)
            }
            _ => None,
        }
    }
}

/// Runtime values. Qubit references name entries of the quantum register.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Value {
    Bit(u8),
    Int(i64),
    Unit,
    QubitRef(String),
    Tuple(Vec<Value>),
    List(Vec<Value>),
}

impl Value {
    pub fn bit(b: bool) -> Value {
        Value::Bit(b as u8)
    }

    /// Qubit references occurring in the value.
    pub fn qubit_refs(&self, out: &mut Vec<String>) {
        match self {
            Value::QubitRef(q) => out.push(q.clone()),
            Value::Tuple(vs) | Value::List(vs) => vs.iter().for_each(|v| v.qubit_refs(out)),
            _ => {}
        }
    }

    pub fn has_qubit(&self) -> bool {
        let mut refs = Vec::new();
        self.qubit_refs(&mut refs);
        !refs.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Eq,
    Neq,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
    /// List append `@`.
    Append,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Eq => "=",
            BinOp::Neq => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::And => "&&",
            BinOp::Or => "||",
            BinOp::Append => "@",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnOp {
    Not,
    Neg,
    Head,
    Tail,
    IsEmpty,
}

impl UnOp {
    pub fn keyword(self) -> &'static str {
        match self {
            UnOp::Not => "not",
            UnOp::Neg => "-",
            UnOp::Head => "hd",
            UnOp::Tail => "tl",
            UnOp::IsEmpty => "isempty",
        }
    }
}

/// Expressions. Operators work on classical data only.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Var(String),
    QubitRef(String),
    Const(Value),
    BinOp(BinOp, Box<Expr>, Box<Expr>),
    UnOp(UnOp, Box<Expr>),
    Tuple(Vec<Expr>),
    List(Vec<Expr>),
    /// Zero-based tuple projection (`fst` is 0, `snd` is 1).
    Proj(usize, Box<Expr>),
}

impl Expr {
    pub fn var(name: &str) -> Expr {
        Expr::Var(name.to_string())
    }

    pub fn bit(b: u8) -> Expr {
        Expr::Const(Value::Bit(b))
    }

    pub fn unit() -> Expr {
        Expr::Const(Value::Unit)
    }

    pub fn bin(op: BinOp, l: Expr, r: Expr) -> Expr {
        Expr::BinOp(op, Box::new(l), Box::new(r))
    }

    pub fn un(op: UnOp, e: Expr) -> Expr {
        Expr::UnOp(op, Box::new(e))
    }

    /// Tuple expression; folds to a constant when every component is one.
    pub fn tuple(items: Vec<Expr>) -> Expr {
        match consts(&items) {
            Some(vs) => Expr::Const(Value::Tuple(vs)),
            None => Expr::Tuple(items),
        }
    }

    /// List expression; folds to a constant when every element is one.
    pub fn list(items: Vec<Expr>) -> Expr {
        match consts(&items) {
            Some(vs) => Expr::Const(Value::List(vs)),
            None => Expr::List(items),
        }
    }

    /// Expression denoting a runtime value.
    pub fn from_value(v: &Value) -> Expr {
        match v {
            Value::QubitRef(q) => Expr::QubitRef(q.clone()),
            Value::Tuple(vs) if v.has_qubit() => Expr::Tuple(vs.iter().map(Expr::from_value).collect()),
            Value::List(vs) if v.has_qubit() => Expr::List(vs.iter().map(Expr::from_value).collect()),
            other => Expr::Const(other.clone()),
        }
    }
}

fn consts(items: &[Expr]) -> Option<Vec<Value>> {
    items
        .iter()
        .map(|e| match e {
            Expr::Const(v) => Some(v.clone()),
            _ => None,
        })
        .collect()
}

/// Qubit positions: a variable or a reference into the register.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum QubitExpr {
    Var(String),
    Ref(String),
}

impl QubitExpr {
    pub fn var(name: &str) -> Self {
        QubitExpr::Var(name.to_string())
    }

    pub fn name(&self) -> &str {
        match self {
            QubitExpr::Var(n) | QubitExpr::Ref(n) => n,
        }
    }
}

/// Variable binding pattern for receptions and measurements.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Binder {
    /// Binds nothing; used for unit payloads.
    Wildcard,
    Var(String),
    Tuple(Vec<String>),
}

impl Binder {
    pub fn var(name: &str) -> Self {
        Binder::Var(name.to_string())
    }

    pub fn names(&self) -> Vec<&str> {
        match self {
            Binder::Wildcard => vec![],
            Binder::Var(x) => vec![x.as_str()],
            Binder::Tuple(xs) => xs.iter().map(String::as_str).collect(),
        }
    }

    pub fn binds(&self, name: &str) -> bool {
        self.names().contains(&name)
    }
}

/// Library gates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    H,
    X,
    Y,
    Z,
    I,
    Cnot,
    Cswap,
    /// Rotation about the Y axis by the given angle in radians.
    Ry(f64),
}

impl Eq for Gate {}

impl std::hash::Hash for Gate {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        std::mem::discriminant(self).hash(state);
        if let Gate::Ry(a) = self {
            a.to_bits().hash(state);
        }
    }
}

impl Gate {
    pub fn arity(self) -> usize {
        match self {
            Gate::Cnot => 2,
            Gate::Cswap => 3,
            _ => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Gate::H => "H",
            Gate::X => "X",
            Gate::Y => "Y",
            Gate::Z => "Z",
            Gate::I => "I",
            Gate::Cnot => "CNOT",
            Gate::Cswap => "CSWAP",
            Gate::Ry(_) => "Ry",
        }
    }

    pub fn from_name(name: &str) -> Option<Gate> {
        Some(match name {
            "H" => Gate::H,
            "X" | "sigma1" => Gate::X,
            "Y" | "sigma2" => Gate::Y,
            "Z" | "sigma3" => Gate::Z,
            "I" | "sigma0" => Gate::I,
            "CNOT" | "CNot" | "CX" => Gate::Cnot,
            "CSWAP" | "CSwap" | "Fredkin" => Gate::Cswap,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ProcBranch {
    pub label: Label,
    pub binder: Binder,
    pub cont: Process,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Process {
    /// Terminated process owning the listed qubits.
    Inaction { owned: Vec<QubitExpr> },
    Select {
        to: Role,
        label: Label,
        payload: Expr,
        cont: Box<Process>,
    },
    Branch {
        from: Role,
        branches: Vec<ProcBranch>,
    },
    Def {
        name: String,
        /// Classical parameters come before quantum ones.
        params: Vec<(String, BaseType)>,
        body: Box<Process>,
        cont: Box<Process>,
    },
    Call { name: String, args: Vec<Expr> },
    If {
        cond: Expr,
        then: Box<Process>,
        els: Box<Process>,
    },
    Measure {
        binder: Binder,
        targets: Vec<QubitExpr>,
        cont: Box<Process>,
    },
    NewQubit {
        binders: Vec<String>,
        cont: Box<Process>,
    },
    Unitary {
        gate: Gate,
        targets: Vec<QubitExpr>,
        cont: Box<Process>,
    },
}

impl Process {
    pub fn nil() -> Process {
        Process::Inaction { owned: vec![] }
    }

    pub fn nil_owning(names: &[&str]) -> Process {
        Process::Inaction {
            owned: names.iter().map(|n| QubitExpr::var(n)).collect(),
        }
    }

    pub fn is_inaction(&self) -> bool {
        matches!(self, Process::Inaction { .. })
    }

    /// Splits multi-binder `qbit x,y,z` into nested single allocations.
    pub fn desugar(self) -> Process {
        match self {
            Process::NewQubit { binders, cont } => {
                let cont = cont.desugar();
                binders.into_iter().rev().fold(cont, |acc, x| Process::NewQubit {
                    binders: vec![x],
                    cont: Box::new(acc),
                })
            }
            Process::Inaction { .. } | Process::Call { .. } => self,
            Process::Select {
                to,
                label,
                payload,
                cont,
            } => Process::Select {
                to,
                label,
                payload,
                cont: Box::new(cont.desugar()),
            },
            Process::Branch { from, branches } => Process::Branch {
                from,
                branches: branches
                    .into_iter()
                    .map(|b| ProcBranch {
                        cont: b.cont.desugar(),
                        ..b
                    })
                    .collect(),
            },
            Process::Def {
                name,
                params,
                body,
                cont,
            } => Process::Def {
                name,
                params,
                body: Box::new(body.desugar()),
                cont: Box::new(cont.desugar()),
            },
            Process::If { cond, then, els } => Process::If {
                cond,
                then: Box::new(then.desugar()),
                els: Box::new(els.desugar()),
            },
            Process::Measure {
                binder,
                targets,
                cont,
            } => Process::Measure {
                binder,
                targets,
                cont: Box::new(cont.desugar()),
            },
            Process::Unitary {
                gate,
                targets,
                cont,
            } => Process::Unitary {
                gate,
                targets,
                cont: Box::new(cont.desugar()),
            },
        }
    }
}

/// A multiparty system: parallel composition of named processes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct System {
    pub roles: BTreeMap<Role, Process>,
}

impl System {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, role: &str, p: Process) -> Self {
        self.roles.insert(Role::new(role), p);
        self
    }

    pub fn get(&self, role: &str) -> Option<&Process> {
        self.roles.get(&Role::new(role))
    }

    pub fn role_names(&self) -> impl Iterator<Item = &Role> {
        self.roles.keys()
    }

    pub fn desugar(self) -> System {
        System {
            roles: self
                .roles
                .into_iter()
                .map(|(r, p)| (r, p.desugar()))
                .collect(),
        }
    }

    /// True when every role is an inaction `0[...]`.
    pub fn is_terminal(&self) -> bool {
        self.roles.values().all(Process::is_inaction)
    }
}

/// A parsed `.qmpst` file.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ProtocolFile {
    pub global: Option<GlobalType>,
    pub system: Option<System>,
    /// Default values for free variables of the system.
    pub params: BTreeMap<String, Value>,
    /// Initial register, when declared; otherwise the free variables of
    /// the system that are not parameters.
    pub register: Option<Vec<String>>,
    /// Source line of each role declaration.
    pub role_lines: BTreeMap<Role, usize>,
}
