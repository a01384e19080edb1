//! Linear type checking of processes against local types, and of systems
//! against global types.
//!
//! Checking is directed by the process: each constructor selects its rule and
//! the expected type is unfolded on demand. Qubit contexts are threaded
//! functionally, so a premise's context is the conclusion's minus whatever
//! the rule consumed.

mod derivation;
mod expr;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

pub use derivation::Derivation;
pub use expr::{type_expr, value_has_type, value_type};
use expr::ExprChecker;

use crate::projection::{project, well_formed};
use crate::syntax::{
    free_process_vars, roles, type_equal, BaseType, Binder, Expr, GlobalType, Label, LocalBranch,
    LocalType, Process, QubitExpr, Role, System, TypeTerm,
};

pub type ClassicalEnv = BTreeMap<String, BaseType>;
pub type QubitEnv = BTreeSet<String>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum TypeErrorKind {
    LinearityViolation,
    UnknownVariable,
    PayloadMismatch,
    BranchMismatch,
    UnusedQubit,
    RoleMismatch,
    ProjectionMismatch,
}

impl fmt::Display for TypeErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Where an error was found: the role, its declaration line and the
/// process prefixes leading to the offending term.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct Location {
    pub role: Option<String>,
    pub line: Option<usize>,
    pub path: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TypeError {
    pub kind: TypeErrorKind,
    pub message: String,
    pub location: Location,
    pub expected: Option<String>,
    pub actual: Option<String>,
}

impl TypeError {
    pub fn new(kind: TypeErrorKind, message: impl Into<String>) -> Self {
        TypeError {
            kind,
            message: message.into(),
            location: Location::default(),
            expected: None,
            actual: None,
        }
    }

    pub fn expected(mut self, e: impl ToString) -> Self {
        self.expected = Some(e.to_string());
        self
    }

    pub fn actual(mut self, a: impl ToString) -> Self {
        self.actual = Some(a.to_string());
        self
    }

    fn in_role(mut self, r: &Role) -> Self {
        self.location.role.get_or_insert_with(|| r.to_string());
        self
    }
}

impl fmt::Display for TypeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind, self.message)?;
        if let Some(e) = &self.expected {
            write!(f, "; expected {e}")?;
        }
        if let Some(a) = &self.actual {
            write!(f, ", found {a}")?;
        }
        if let Some(r) = &self.location.role {
            write!(f, " [role {r}")?;
            if let Some(l) = self.location.line {
                write!(f, ", line {l}")?;
            }
            f.write_str("]")?;
        }
        if !self.location.path.is_empty() {
            write!(f, " at {}", self.location.path.join(" . "))?;
        }
        Ok(())
    }
}

impl std::error::Error for TypeError {}

/// Signature of a process variable in Θ.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcSig {
    pub params: Vec<BaseType>,
    pub body_type: LocalType,
}

/// Process-variable context; later entries shadow earlier ones.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ProcEnv {
    entries: Vec<(String, ProcSig)>,
}

impl ProcEnv {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, sig: ProcSig) -> Self {
        self.entries.push((name.to_string(), sig));
        self
    }

    pub fn get(&self, name: &str) -> Option<&ProcSig> {
        self.entries.iter().rev().find(|(n, _)| n == name).map(|(_, s)| s)
    }
}

#[derive(Debug, Clone)]
struct Frame<'p> {
    name: String,
    params: Vec<(String, BaseType)>,
    body: Option<&'p Process>,
    gamma: ClassicalEnv,
    scope: Vec<usize>,
    body_type: Option<LocalType>,
    body_derivation: Option<Derivation>,
}

#[derive(Debug, Clone, Default)]
struct Ctx {
    gamma: ClassicalEnv,
    sigma: QubitEnv,
    /// Qubits consumed on the way here; reusing one is a linearity error.
    spent: BTreeSet<String>,
}

impl Ctx {
    fn consume(&self, used: &[String]) -> Ctx {
        let mut c = self.clone();
        for q in used {
            c.sigma.remove(q);
            c.spent.insert(q.clone());
        }
        c
    }

    fn add_qubit(&mut self, x: &str) -> Result<(), TypeError> {
        if self.sigma.contains(x) {
            return Err(TypeError::new(
                TypeErrorKind::LinearityViolation,
                format!("binding `{x}` would discard a live qubit of the same name"),
            ));
        }
        self.gamma.remove(x);
        self.spent.remove(x);
        self.sigma.insert(x.to_string());
        Ok(())
    }

    fn add_classical(&mut self, x: &str, t: BaseType) -> Result<(), TypeError> {
        if self.sigma.contains(x) {
            return Err(TypeError::new(
                TypeErrorKind::LinearityViolation,
                format!("binding `{x}` would discard a live qubit of the same name"),
            ));
        }
        self.spent.remove(x);
        self.gamma.insert(x.to_string(), t);
        Ok(())
    }
}

const UNFOLD_LIMIT: usize = 256;

fn unfold_head(t: &LocalType) -> Result<LocalType, TypeError> {
    let mut t = t.clone();
    for _ in 0..UNFOLD_LIMIT {
        if t.as_rec().is_none() {
            return Ok(t);
        }
        t = t.unfold();
    }
    Err(TypeError::new(
        TypeErrorKind::ProjectionMismatch,
        "local type is not contractive",
    ))
}

fn shape_mismatch(t: &LocalType, p: &Process) -> TypeError {
    TypeError::new(
        TypeErrorKind::ProjectionMismatch,
        "process does not follow its local type",
    )
    .expected(t)
    .actual(head(p))
}

fn wrong_peer(want: &Role, got: &Role) -> TypeError {
    TypeError::new(TypeErrorKind::RoleMismatch, "process interacts with the wrong role")
        .expected(want)
        .actual(got)
}

/// Short description of a process head, used for error paths.
fn head(p: &Process) -> String {
    match p {
        Process::Inaction { .. } => p.to_string(),
        Process::Select { to, label, .. } => format!("{to}!{label}"),
        Process::Branch { from, .. } => format!("{from}?"),
        Process::Def { name, .. } => format!("def {name}"),
        Process::Call { .. } => p.to_string(),
        Process::If { cond, .. } => format!("if {cond}"),
        Process::Measure { binder, targets, .. } => format!(
            "meas {binder} = {}",
            targets.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(", ")
        ),
        Process::NewQubit { binders, .. } => format!("qbit {}", binders.join(", ")),
        Process::Unitary { gate, targets, .. } => format!(
            "{gate}({})",
            targets.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(", ")
        ),
    }
}

fn restrict(t: &LocalType, labels: &BTreeSet<Label>) -> LocalType {
    match t {
        LocalType::IntChoice { to, branches } => LocalType::IntChoice {
            to: to.clone(),
            branches: branches
                .iter()
                .filter(|b| labels.contains(&b.label))
                .cloned()
                .collect(),
        },
        other => other.clone(),
    }
}

struct Checker<'p> {
    frames: Vec<Frame<'p>>,
    scope: Vec<usize>,
    external: ProcEnv,
    record: bool,
    /// Accept a selection of one label among several and branchings
    /// offering more labels than the type; used for configurations reached
    /// at run time, after a conditional or a peer has chosen.
    narrow: bool,
}

impl<'p> Checker<'p> {
    fn new(external: ProcEnv, record: bool, narrow: bool) -> Self {
        Checker {
            frames: Vec::new(),
            scope: Vec::new(),
            external,
            record,
            narrow,
        }
    }

    fn node(
        &self,
        rule: &str,
        ctx: &Ctx,
        subject: impl FnOnce() -> String,
        ty: impl FnOnce() -> String,
        premises: Vec<Derivation>,
    ) -> Derivation {
        if !self.record {
            return Derivation::default();
        }
        let mut theta = BTreeMap::new();
        for (n, s) in &self.external.entries {
            let ps: Vec<String> = s.params.iter().map(|t| t.to_string()).collect();
            theta.insert(n.clone(), format!("({}; {})", ps.join(", "), s.body_type));
        }
        for &i in &self.scope {
            let f = &self.frames[i];
            let ps: Vec<String> = f.params.iter().map(|(_, t)| t.to_string()).collect();
            let t = f
                .body_type
                .as_ref()
                .map(|t| t.to_string())
                .unwrap_or_else(|| "?".into());
            theta.insert(f.name.clone(), format!("({}; {t})", ps.join(", ")));
        }
        Derivation {
            rule: rule.to_string(),
            theta,
            gamma: ctx.gamma.iter().map(|(k, v)| (k.clone(), v.to_string())).collect(),
            sigma: ctx.sigma.iter().cloned().collect(),
            subject: subject(),
            ty: ty(),
            premises,
        }
    }

    fn expr_node(&self, ctx: &Ctx, e: &Expr, t: &BaseType) -> Derivation {
        let rule = match e {
            Expr::Var(x) if ctx.gamma.contains_key(x) => "Var",
            Expr::Var(_) | Expr::QubitRef(_) => "QVar",
            Expr::Const(crate::syntax::Value::Bit(_)) => "Bit",
            Expr::Const(_) => "Const",
            Expr::Tuple(_) => "Tuple",
            Expr::List(_) => "List",
            _ => "Op",
        };
        self.node(rule, ctx, || e.to_string(), || t.to_string(), vec![])
    }

    fn check_expr(&self, ctx: &Ctx, e: &Expr, want: &BaseType) -> Result<Vec<String>, TypeError> {
        let mut c = ExprChecker::new(&ctx.gamma, &ctx.sigma, &ctx.spent);
        c.check(e, want)?;
        Ok(c.used)
    }

    fn qubit_targets(&self, ctx: &Ctx, targets: &[QubitExpr]) -> Result<Vec<String>, TypeError> {
        let mut c = ExprChecker::new(&ctx.gamma, &ctx.sigma, &ctx.spent);
        for q in targets {
            c.use_qubit(q.name())?;
        }
        Ok(c.used)
    }

    fn check(&mut self, ctx: &Ctx, p: &'p Process, t: &LocalType) -> Result<Derivation, TypeError> {
        self.check_inner(ctx, p, t).map_err(|mut e| {
            e.location.path.insert(0, head(p));
            e
        })
    }

    fn check_inner(&mut self, ctx: &Ctx, p: &'p Process, t: &LocalType) -> Result<Derivation, TypeError> {
        let subject = || p.to_string();
        let ty = || t.to_string();
        match p {
            Process::Inaction { owned } => {
                let u = unfold_head(t)?;
                if u != LocalType::End {
                    return Err(shape_mismatch(t, p));
                }
                let used = self.qubit_targets(ctx, owned)?;
                let rest: Vec<&String> = ctx.sigma.iter().filter(|q| !used.contains(q)).collect();
                if !rest.is_empty() {
                    let names: Vec<&str> = rest.iter().map(|s| s.as_str()).collect();
                    return Err(TypeError::new(
                        TypeErrorKind::UnusedQubit,
                        format!("qubits {} are still owned at termination", names.join(", ")),
                    )
                    .expected(format!("0[{}]", ctx.sigma.iter().cloned().collect::<Vec<_>>().join(", ")))
                    .actual(p));
                }
                Ok(self.node("MPNil", ctx, subject, ty, vec![]))
            }
            Process::Select {
                to,
                label,
                payload,
                cont,
            } => {
                let u = unfold_head(t)?;
                let LocalType::IntChoice { to: peer, branches } = &u else {
                    return Err(shape_mismatch(t, p));
                };
                if peer != to {
                    return Err(wrong_peer(peer, to));
                }
                let chosen = branches.iter().find(|b| &b.label == label);
                let b = match (branches.as_slice(), chosen) {
                    ([b], _) if &b.label == label => b,
                    (_, Some(b)) if self.narrow => b,
                    _ => {
                        let labels: Vec<String> = branches.iter().map(|b| b.label.to_string()).collect();
                        let msg = if branches.iter().any(|b| &b.label == label) {
                            "a selection fixes one label; choosing among several needs a conditional"
                        } else {
                            "selected label is not offered by the type"
                        };
                        return Err(TypeError::new(TypeErrorKind::BranchMismatch, msg)
                            .expected(format!("{{{}}}", labels.join(", ")))
                            .actual(label));
                    }
                };
                let used = self.check_expr(ctx, payload, &b.payload)?;
                let e_node = self.expr_node(ctx, payload, &b.payload);
                let next = ctx.consume(&used);
                let d = self.check(&next, cont, &b.cont)?;
                Ok(self.node("MPSel", ctx, subject, ty, vec![e_node, d]))
            }
            Process::Branch { from, branches } => {
                let u = unfold_head(t)?;
                let LocalType::ExtChoice { from: peer, branches: tbs } = &u else {
                    return Err(shape_mismatch(t, p));
                };
                if peer != from {
                    return Err(wrong_peer(peer, from));
                }
                let want: BTreeSet<&Label> = tbs.iter().map(|b| &b.label).collect();
                let have: BTreeSet<&Label> = branches.iter().map(|b| &b.label).collect();
                let fits = if self.narrow { want.is_subset(&have) } else { want == have };
                if !fits {
                    let show = |s: &BTreeSet<&Label>| {
                        format!("{{{}}}", s.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(", "))
                    };
                    return Err(TypeError::new(
                        TypeErrorKind::BranchMismatch,
                        "branch labels differ from the offered choice",
                    )
                    .expected(show(&want))
                    .actual(show(&have)));
                }
                let mut premises = Vec::new();
                for tb in tbs {
                    let pb = branches.iter().find(|b| b.label == tb.label).expect("same labels");
                    let mut next = ctx.clone();
                    bind(&mut next, &pb.binder, &tb.payload)?;
                    premises.push(self.check(&next, &pb.cont, &tb.cont)?);
                }
                Ok(self.node("MPBranch", ctx, subject, ty, premises))
            }
            Process::Unitary { gate, targets, cont } => {
                if targets.len() != gate.arity() {
                    return Err(TypeError::new(
                        TypeErrorKind::PayloadMismatch,
                        format!("{gate} takes {} qubits", gate.arity()),
                    ));
                }
                self.qubit_targets(ctx, targets)?;
                let d = self.check(ctx, cont, t)?;
                Ok(self.node("Unitary", ctx, subject, ty, vec![d]))
            }
            Process::Measure {
                binder,
                targets,
                cont,
            } => {
                let used = self.qubit_targets(ctx, targets)?;
                let mut next = ctx.consume(&used);
                let bt = if targets.len() == 1 {
                    BaseType::Bit
                } else {
                    BaseType::bits(targets.len())
                };
                bind(&mut next, binder, &bt)?;
                let d = self.check(&next, cont, t)?;
                Ok(self.node("Meas", ctx, subject, ty, vec![d]))
            }
            Process::NewQubit { binders, cont } => {
                let mut next = ctx.clone();
                for x in binders {
                    next.add_qubit(x)?;
                }
                let d = self.check(&next, cont, t)?;
                Ok(self.node("QBit", ctx, subject, ty, vec![d]))
            }
            Process::If { cond, then, els } => self.check_if(ctx, p, cond, then, els, t),
            Process::Def {
                name,
                params,
                body,
                cont,
            } => {
                let idx = self.frames.len();
                self.frames.push(Frame {
                    name: name.clone(),
                    params: params.clone(),
                    body: Some(&**body),
                    gamma: ctx.gamma.clone(),
                    scope: self.scope.clone(),
                    body_type: None,
                    body_derivation: None,
                });
                self.scope.push(idx);
                let r = self.check(ctx, cont, t);
                self.scope.pop();
                // The conclusion is judged under the outer Θ.
                r.map(|d| {
                    let mut premises = Vec::new();
                    if let Some(b) = self.frames[idx].body_derivation.clone() {
                        premises.push(b);
                    }
                    premises.push(d);
                    self.node("MPDef", ctx, subject, ty, premises)
                })
            }
            Process::Call { name, args } => self.check_call(ctx, p, name, args, t),
        }
    }

    fn check_if(
        &mut self,
        ctx: &Ctx,
        p: &Process,
        cond: &Expr,
        then: &'p Process,
        els: &'p Process,
        t: &LocalType,
    ) -> Result<Derivation, TypeError> {
        if self.narrow {
            // A closed condition has already decided which branch runs; the
            // other may mention values, such as `hd([])`, with no type.
            let mut fv = BTreeSet::new();
            crate::syntax::wf::free_expr_vars(cond, &mut fv);
            if fv.is_empty() {
                if let Ok(crate::syntax::Value::Bit(b)) = crate::semantics::eval_expr(cond) {
                    return self.check(ctx, if b != 0 { then } else { els }, t);
                }
            }
        }
        let used = self.check_expr(ctx, cond, &BaseType::Bit)?;
        if !used.is_empty() {
            return Err(TypeError::new(
                TypeErrorKind::PayloadMismatch,
                "conditions must be classical",
            ));
        }
        let c_node = self.expr_node(ctx, cond, &BaseType::Bit);
        let saved = self.frames.clone();
        let plain = self
            .check(ctx, then, t)
            .and_then(|d1| self.check(ctx, els, t).map(|d2| (d1, d2)));
        let first_err = match plain {
            Ok((d1, d2)) => {
                return Ok(self.node("IfThen", ctx, || p.to_string(), || t.to_string(), vec![c_node, d1, d2]))
            }
            Err(e) => e,
        };
        self.frames = saved.clone();
        let u = unfold_head(t)?;
        let LocalType::IntChoice { to, branches } = &u else {
            return Err(first_err);
        };
        let all: BTreeSet<Label> = branches.iter().map(|b| b.label.clone()).collect();
        let (Some(i), Some(j)) = (self.selected(then, to), self.selected(els, to)) else {
            return Err(first_err);
        };
        if !i.is_subset(&all) || !j.is_subset(&all) || i.union(&j).cloned().collect::<BTreeSet<_>>() != all {
            return Err(first_err);
        }
        if i == all && j == all {
            return Err(first_err);
        }
        let (ti, tj) = (restrict(&u, &i), restrict(&u, &j));
        let r = self
            .check(ctx, then, &ti)
            .and_then(|d1| self.check(ctx, els, &tj).map(|d2| (d1, d2)));
        match r {
            Ok((d1, d2)) => Ok(self.node("MPIfThen", ctx, || p.to_string(), || t.to_string(), vec![c_node, d1, d2])),
            Err(e) => {
                self.frames = saved;
                Err(e)
            }
        }
    }

    /// Labels a process may select towards `to` as its first interaction.
    fn selected(&self, p: &Process, to: &Role) -> Option<BTreeSet<Label>> {
        match p {
            Process::Select { to: r, label, .. } => (r == to).then(|| BTreeSet::from([label.clone()])),
            Process::Unitary { cont, .. }
            | Process::Measure { cont, .. }
            | Process::NewQubit { cont, .. }
            | Process::Def { cont, .. } => self.selected(cont, to),
            Process::If { then, els, .. } => {
                let mut a = self.selected(then, to)?;
                a.extend(self.selected(els, to)?);
                Some(a)
            }
            Process::Call { name, .. } => {
                let t = match self.lookup(name) {
                    Some(i) => self.frames[i].body_type.clone()?,
                    None => self.external.get(name)?.body_type.clone(),
                };
                match unfold_head(&t).ok()? {
                    LocalType::IntChoice { to: r, branches } if &r == to => {
                        Some(branches.into_iter().map(|b| b.label).collect())
                    }
                    _ => None,
                }
            }
            Process::Inaction { .. } | Process::Branch { .. } => None,
        }
    }

    fn lookup(&self, name: &str) -> Option<usize> {
        self.scope.iter().rev().copied().find(|&i| self.frames[i].name == name)
    }

    fn check_call(
        &mut self,
        ctx: &Ctx,
        p: &Process,
        name: &str,
        args: &[Expr],
        t: &LocalType,
    ) -> Result<Derivation, TypeError> {
        let local = self.lookup(name);
        let params: Vec<BaseType> = match local {
            Some(i) => self.frames[i].params.iter().map(|(_, t)| t.clone()).collect(),
            None => match self.external.get(name) {
                Some(s) => s.params.clone(),
                None => {
                    return Err(TypeError::new(
                        TypeErrorKind::UnknownVariable,
                        format!("unknown process variable `{name}`"),
                    ))
                }
            },
        };
        if params.len() != args.len() {
            return Err(TypeError::new(
                TypeErrorKind::PayloadMismatch,
                format!("`{name}` takes {} arguments", params.len()),
            )
            .expected(params.len())
            .actual(args.len()));
        }
        let mut c = ExprChecker::new(&ctx.gamma, &ctx.sigma, &ctx.spent);
        for (a, pt) in args.iter().zip(&params) {
            c.check(a, pt)?;
        }
        let used = c.used;
        let rest: Vec<String> = ctx.sigma.iter().filter(|q| !used.contains(q)).cloned().collect();
        if !rest.is_empty() {
            return Err(TypeError::new(
                TypeErrorKind::UnusedQubit,
                format!("qubits {} are dropped by the call", rest.join(", ")),
            ));
        }
        let arg_nodes: Vec<Derivation> = args
            .iter()
            .zip(&params)
            .map(|(a, pt)| self.expr_node(ctx, a, pt))
            .collect();
        let declared = match local {
            Some(i) => self.frames[i].body_type.clone(),
            None => self.external.get(name).map(|s| s.body_type.clone()),
        };
        match declared {
            Some(t1) => {
                if !type_equal(&t1, t) {
                    return Err(TypeError::new(
                        TypeErrorKind::ProjectionMismatch,
                        format!("`{name}` is used at two different types"),
                    )
                    .expected(&t1)
                    .actual(t));
                }
            }
            None => {
                let i = local.expect("external entries carry a type");
                self.frames[i].body_type = Some(t.clone());
                let f = self.frames[i].clone();
                let mut body_ctx = Ctx {
                    gamma: f.gamma.clone(),
                    ..Ctx::default()
                };
                for (x, pt) in &f.params {
                    if pt == &BaseType::Qubit {
                        body_ctx.add_qubit(x)?;
                    } else if pt.is_classical() {
                        body_ctx.add_classical(x, pt.clone())?;
                    } else {
                        return Err(TypeError::new(
                            TypeErrorKind::PayloadMismatch,
                            format!("parameter `{x}` mixes qubits into a compound type"),
                        ));
                    }
                }
                let saved_scope = std::mem::replace(&mut self.scope, f.scope.clone());
                self.scope.push(i);
                let body = f.body.as_ref().expect("local frames have bodies");
                let r = self.check(&body_ctx, body, t);
                self.scope = saved_scope;
                let d = r.map_err(|mut e| {
                    e.location.path.insert(0, format!("body of {name}"));
                    e
                })?;
                self.frames[i].body_derivation = Some(d);
            }
        }
        Ok(self.node("MPCall", ctx, || p.to_string(), || t.to_string(), arg_nodes))
    }
}

fn bind(ctx: &mut Ctx, binder: &Binder, payload: &BaseType) -> Result<(), TypeError> {
    let one = |ctx: &mut Ctx, x: &str, t: &BaseType| -> Result<(), TypeError> {
        if t == &BaseType::Qubit {
            ctx.add_qubit(x)
        } else if t.is_classical() {
            ctx.add_classical(x, t.clone())
        } else {
            Err(TypeError::new(
                TypeErrorKind::PayloadMismatch,
                format!("`{x}` cannot bind a compound value holding qubits; use a tuple pattern"),
            )
            .actual(t))
        }
    };
    match binder {
        Binder::Wildcard => {
            if payload.has_qubit() {
                Err(TypeError::new(
                    TypeErrorKind::UnusedQubit,
                    "received qubits are discarded by `_`",
                )
                .actual(payload))
            } else {
                Ok(())
            }
        }
        Binder::Var(x) => one(ctx, x, payload),
        Binder::Tuple(xs) => match payload {
            BaseType::Tuple(ts) if ts.len() == xs.len() => {
                xs.iter().zip(ts).try_for_each(|(x, t)| one(ctx, x, t))
            }
            _ => Err(TypeError::new(
                TypeErrorKind::PayloadMismatch,
                format!("pattern binds {} components", xs.len()),
            )
            .actual(payload)),
        },
    }
}

/// Checks `Θ; Γ; Σ ⊢ p : t`.
pub fn type_process(
    theta: &ProcEnv,
    gamma: &ClassicalEnv,
    sigma: &QubitEnv,
    p: &Process,
    t: &LocalType,
) -> Result<(), TypeError> {
    check_process(theta, gamma, sigma, p, t, false, false).map(|_| ())
}

/// Like [`type_process`], returning the derivation tree.
pub fn derive_process(
    theta: &ProcEnv,
    gamma: &ClassicalEnv,
    sigma: &QubitEnv,
    p: &Process,
    t: &LocalType,
) -> Result<Derivation, TypeError> {
    check_process(theta, gamma, sigma, p, t, true, false)
}

fn check_process(
    theta: &ProcEnv,
    gamma: &ClassicalEnv,
    sigma: &QubitEnv,
    p: &Process,
    t: &LocalType,
    record: bool,
    narrow: bool,
) -> Result<Derivation, TypeError> {
    let ctx = Ctx {
        gamma: gamma.clone(),
        sigma: sigma.clone(),
        spent: BTreeSet::new(),
    };
    Checker::new(theta.clone(), record, narrow).check(&ctx, p, t)
}

/// `Σ ∩ fv(p)`.
pub fn free_qubits(p: &Process, sigma: &QubitEnv) -> QubitEnv {
    free_process_vars(p).intersection(sigma).cloned().collect()
}

/// Splits Σ among the roles by free occurrence. Errors when a qubit is free
/// in two roles or in none.
pub fn partition_sigma(sigma: &QubitEnv, m: &System) -> Result<BTreeMap<Role, QubitEnv>, Vec<TypeError>> {
    let parts: BTreeMap<Role, QubitEnv> = m
        .roles
        .iter()
        .map(|(r, p)| (r.clone(), free_qubits(p, sigma)))
        .collect();
    let mut errs = Vec::new();
    for q in sigma {
        let owners: Vec<&Role> = parts.iter().filter(|(_, s)| s.contains(q)).map(|(r, _)| r).collect();
        match owners.as_slice() {
            [] => errs.push(TypeError::new(
                TypeErrorKind::UnusedQubit,
                format!("qubit `{q}` is not owned by any role"),
            )),
            [_] => {}
            [_, second, ..] => errs.push(
                TypeError::new(
                    TypeErrorKind::LinearityViolation,
                    format!(
                        "qubit `{q}` occurs in roles {}",
                        owners.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(", ")
                    ),
                )
                .in_role(second),
            ),
        }
    }
    if errs.is_empty() {
        Ok(parts)
    } else {
        Err(errs)
    }
}

/// Checks a system against a global type.
pub fn type_system(
    gamma: &ClassicalEnv,
    sigma: &QubitEnv,
    m: &System,
    g: &GlobalType,
) -> Result<(), Vec<TypeError>> {
    check_system(gamma, sigma, m, g, false, false).map(|_| ())
}

/// Like [`type_system`], returning the `MPSystem` derivation.
pub fn derive_system(
    gamma: &ClassicalEnv,
    sigma: &QubitEnv,
    m: &System,
    g: &GlobalType,
) -> Result<Derivation, Vec<TypeError>> {
    check_system(gamma, sigma, m, g, true, false)
}

/// Checks a configuration reached by execution. Once a choice is made the
/// global type keeps only the chosen continuation, while a process may
/// still hold a single selection out of several labels or branches the
/// peer will no longer take; both are accepted here.
pub fn type_runtime_system(
    gamma: &ClassicalEnv,
    sigma: &QubitEnv,
    m: &System,
    g: &GlobalType,
) -> Result<(), Vec<TypeError>> {
    check_system(gamma, sigma, m, g, false, true).map(|_| ())
}

fn check_system(
    gamma: &ClassicalEnv,
    sigma: &QubitEnv,
    m: &System,
    g: &GlobalType,
    record: bool,
    narrow: bool,
) -> Result<Derivation, Vec<TypeError>> {
    if let Err(es) = well_formed(g) {
        return Err(es
            .into_iter()
            .map(|e| TypeError::new(TypeErrorKind::ProjectionMismatch, e.to_string()))
            .collect());
    }
    let mut errs = Vec::new();
    for r in roles(g) {
        if !m.roles.contains_key(&r) {
            errs.push(
                TypeError::new(
                    TypeErrorKind::RoleMismatch,
                    format!("role {r} of the protocol has no process"),
                )
                .in_role(&r),
            );
        }
    }
    let parts = match partition_sigma(sigma, m) {
        Ok(p) => p,
        Err(es) => {
            errs.extend(es);
            return Err(errs);
        }
    };
    let g_roles = roles(g);
    let mut premises = Vec::new();
    for (r, p) in &m.roles {
        let t = if g_roles.contains(r) {
            project(g, r).expect("well-formed")
        } else {
            LocalType::End
        };
        match check_process(&ProcEnv::new(), gamma, &parts[r], p, &t, record, narrow) {
            Ok(d) => premises.push(d),
            Err(e) if !g_roles.contains(r) => errs.push(
                TypeError::new(
                    TypeErrorKind::RoleMismatch,
                    format!("role {r} does not take part in the protocol but is not idle ({})", e.message),
                )
                .in_role(r),
            ),
            Err(e) => errs.push(e.in_role(r)),
        }
    }
    if !errs.is_empty() {
        return Err(errs);
    }
    if !record {
        return Ok(Derivation::default());
    }
    Ok(Derivation {
        rule: "MPSystem".into(),
        theta: BTreeMap::new(),
        gamma: gamma.iter().map(|(k, v)| (k.clone(), v.to_string())).collect(),
        sigma: sigma.iter().cloned().collect(),
        subject: m
            .roles
            .iter()
            .map(|(r, p)| format!("{r} :: {}", crate::syntax::one_line(p)))
            .collect::<Vec<_>>()
            .join(" | "),
        ty: g.to_string(),
        premises,
    })
}

/// Local type branches offered by `t` after unfolding, for callers that
/// need to inspect a projection.
pub fn head_branches(t: &LocalType) -> Option<Vec<LocalBranch>> {
    unfold_head(t).ok()?.branches().map(|b| b.to_vec())
}
