use std::collections::BTreeSet;

use super::{ClassicalEnv, QubitEnv, TypeError, TypeErrorKind};
use crate::syntax::{BaseType, BinOp, Expr, UnOp, Value};

/// Type of a closed value, if it can be read off without an annotation.
pub fn value_type(v: &Value) -> Option<BaseType> {
    Some(match v {
        Value::Bit(_) => BaseType::Bit,
        Value::Int(_) => BaseType::Int,
        Value::Unit => BaseType::Unit,
        Value::QubitRef(_) => BaseType::Qubit,
        Value::Tuple(vs) => BaseType::Tuple(vs.iter().map(value_type).collect::<Option<_>>()?),
        Value::List(vs) => {
            let t = value_type(vs.first()?)?;
            BaseType::List(Box::new(t))
        }
    })
}

/// Whether `v` inhabits `t`; bit literals also inhabit `int`.
pub fn value_has_type(v: &Value, t: &BaseType) -> bool {
    match (v, t) {
        (Value::Bit(_), BaseType::Bit | BaseType::Int) => true,
        (Value::Int(_), BaseType::Int) => true,
        (Value::Unit, BaseType::Unit) => true,
        (Value::QubitRef(_), BaseType::Qubit) => true,
        (Value::Tuple(vs), BaseType::Tuple(ts)) => {
            vs.len() == ts.len() && vs.iter().zip(ts).all(|(v, t)| value_has_type(v, t))
        }
        (Value::List(vs), BaseType::List(t)) => vs.iter().all(|v| value_has_type(v, t)),
        _ => false,
    }
}

pub(crate) struct ExprChecker<'a> {
    pub gamma: &'a ClassicalEnv,
    pub sigma: &'a QubitEnv,
    pub spent: &'a BTreeSet<String>,
    pub used: Vec<String>,
}

fn mismatch(expected: &BaseType, actual: impl ToString, e: &Expr) -> TypeError {
    TypeError::new(
        TypeErrorKind::PayloadMismatch,
        format!("expression `{e}` has the wrong type"),
    )
    .expected(expected)
    .actual(actual)
}

impl<'a> ExprChecker<'a> {
    pub fn new(gamma: &'a ClassicalEnv, sigma: &'a QubitEnv, spent: &'a BTreeSet<String>) -> Self {
        ExprChecker {
            gamma,
            sigma,
            spent,
            used: Vec::new(),
        }
    }

    pub fn use_qubit(&mut self, q: &str) -> Result<(), TypeError> {
        if self.used.iter().any(|u| u == q) {
            return Err(TypeError::new(
                TypeErrorKind::LinearityViolation,
                format!("qubit `{q}` is used twice"),
            ));
        }
        if self.sigma.contains(q) {
            self.used.push(q.to_string());
            return Ok(());
        }
        if self.spent.contains(q) {
            return Err(TypeError::new(
                TypeErrorKind::LinearityViolation,
                format!("qubit `{q}` was already consumed"),
            ));
        }
        if let Some(t) = self.gamma.get(q) {
            return Err(mismatch(&BaseType::Qubit, t, &Expr::Var(q.to_string())));
        }
        Err(TypeError::new(
            TypeErrorKind::UnknownVariable,
            format!("unknown qubit `{q}`"),
        ))
    }

    fn var(&mut self, x: &str) -> Result<BaseType, TypeError> {
        if let Some(t) = self.gamma.get(x) {
            return Ok(t.clone());
        }
        if self.sigma.contains(x) || self.spent.contains(x) || self.used.iter().any(|u| u == x) {
            self.use_qubit(x)?;
            return Ok(BaseType::Qubit);
        }
        Err(TypeError::new(
            TypeErrorKind::UnknownVariable,
            format!("unknown variable `{x}`"),
        ))
    }

    fn inferable(e: &Expr) -> bool {
        match e {
            Expr::Const(v) => value_type(v).is_some(),
            Expr::List(es) => !es.is_empty(),
            Expr::BinOp(BinOp::Append, l, r) => Self::inferable(l) || Self::inferable(r),
            Expr::UnOp(UnOp::Head | UnOp::Tail, x) => Self::inferable(x),
            _ => true,
        }
    }

    fn is_literal(e: &Expr) -> bool {
        matches!(e, Expr::Const(_))
    }

    pub fn infer(&mut self, e: &Expr) -> Result<BaseType, TypeError> {
        match e {
            Expr::Var(x) => self.var(x),
            Expr::QubitRef(q) => {
                self.use_qubit(q)?;
                Ok(BaseType::Qubit)
            }
            Expr::Const(v) => value_type(v).ok_or_else(|| {
                TypeError::new(
                    TypeErrorKind::PayloadMismatch,
                    format!("cannot infer the element type of `{e}`"),
                )
            }),
            Expr::Tuple(es) => Ok(BaseType::Tuple(
                es.iter().map(|e| self.infer(e)).collect::<Result<_, _>>()?,
            )),
            Expr::List(es) => {
                let first = es.first().ok_or_else(|| {
                    TypeError::new(
                        TypeErrorKind::PayloadMismatch,
                        "cannot infer the element type of `[]`",
                    )
                })?;
                let t = self.infer(first)?;
                for x in &es[1..] {
                    self.check(x, &t)?;
                }
                self.classical(&t, e)?;
                Ok(BaseType::List(Box::new(t)))
            }
            Expr::Proj(k, inner) => {
                let t = self.infer(inner)?;
                match &t {
                    BaseType::Tuple(ts) if *k < ts.len() => {
                        self.classical(&t, e)?;
                        Ok(ts[*k].clone())
                    }
                    _ => Err(TypeError::new(
                        TypeErrorKind::PayloadMismatch,
                        format!("`{inner}` is not a tuple with component {k}"),
                    )
                    .actual(&t)),
                }
            }
            Expr::UnOp(op, inner) => match op {
                UnOp::Not => {
                    self.check(inner, &BaseType::Bit)?;
                    Ok(BaseType::Bit)
                }
                UnOp::Neg => {
                    self.check(inner, &BaseType::Int)?;
                    Ok(BaseType::Int)
                }
                UnOp::IsEmpty if !Self::inferable(inner) => Ok(BaseType::Bit),
                UnOp::Head | UnOp::Tail | UnOp::IsEmpty => {
                    let t = self.infer(inner)?;
                    let BaseType::List(elem) = &t else {
                        return Err(TypeError::new(
                            TypeErrorKind::PayloadMismatch,
                            format!("`{}` expects a list", op.keyword()),
                        )
                        .actual(&t));
                    };
                    Ok(match op {
                        UnOp::Head => (**elem).clone(),
                        UnOp::Tail => t.clone(),
                        _ => BaseType::Bit,
                    })
                }
            },
            Expr::BinOp(op, l, r) => match op {
                BinOp::Add | BinOp::Sub | BinOp::Mul => {
                    self.check(l, &BaseType::Int)?;
                    self.check(r, &BaseType::Int)?;
                    Ok(BaseType::Int)
                }
                BinOp::And | BinOp::Or => {
                    self.check(l, &BaseType::Bit)?;
                    self.check(r, &BaseType::Bit)?;
                    Ok(BaseType::Bit)
                }
                BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
                    for side in [l, r] {
                        let t = self.infer(side)?;
                        if !matches!(t, BaseType::Int | BaseType::Bit) {
                            return Err(mismatch(&BaseType::Int, &t, side));
                        }
                    }
                    Ok(BaseType::Bit)
                }
                BinOp::Eq | BinOp::Neq => {
                    if let (Expr::Const(a), Expr::Const(b)) = (l.as_ref(), r.as_ref()) {
                        // Constants left by substitution, possibly both empty lists.
                        if !a.has_qubit() && !b.has_qubit() {
                            return Ok(BaseType::Bit);
                        }
                    }
                    let left_first =
                        Self::inferable(l) && !(Self::is_literal(l) && Self::inferable(r));
                    let t = if left_first {
                        let t = self.infer(l)?;
                        self.check(r, &t)?;
                        t
                    } else {
                        let t = self.infer(r)?;
                        self.check(l, &t)?;
                        t
                    };
                    self.classical(&t, e)?;
                    Ok(BaseType::Bit)
                }
                BinOp::Append => {
                    let t = if Self::inferable(l) {
                        self.infer(l)?
                    } else {
                        self.infer(r)?
                    };
                    if !matches!(t, BaseType::List(_)) {
                        return Err(TypeError::new(
                            TypeErrorKind::PayloadMismatch,
                            "`@` expects lists",
                        )
                        .actual(&t));
                    }
                    self.check(l, &t)?;
                    self.check(r, &t)?;
                    Ok(t)
                }
            },
        }
    }

    fn classical(&self, t: &BaseType, e: &Expr) -> Result<(), TypeError> {
        if t.is_classical() {
            Ok(())
        } else {
            Err(TypeError::new(
                TypeErrorKind::PayloadMismatch,
                format!("`{e}` would copy or discard qubits"),
            )
            .actual(t))
        }
    }

    pub fn check(&mut self, e: &Expr, want: &BaseType) -> Result<(), TypeError> {
        match (e, want) {
            (Expr::Const(v), _) if value_has_type(v, want) => Ok(()),
            (Expr::Const(v), _) => Err(mismatch(
                want,
                value_type(v).map(|t| t.to_string()).unwrap_or_else(|| v.to_string()),
                e,
            )),
            (Expr::Tuple(es), BaseType::Tuple(ts)) if es.len() == ts.len() => {
                es.iter().zip(ts).try_for_each(|(e, t)| self.check(e, t))
            }
            (Expr::List(es), BaseType::List(t)) => es.iter().try_for_each(|e| self.check(e, t)),
            (Expr::BinOp(BinOp::Append, l, r), BaseType::List(_)) => {
                self.check(l, want)?;
                self.check(r, want)
            }
            (Expr::UnOp(UnOp::Head, x), _) if !Self::inferable(x) => {
                self.check(x, &BaseType::List(Box::new(want.clone())))
            }
            (Expr::UnOp(UnOp::Tail, x), BaseType::List(_)) if !Self::inferable(x) => self.check(x, want),
            (Expr::BinOp(BinOp::Add | BinOp::Sub | BinOp::Mul, ..), BaseType::Int) => {
                self.infer(e).map(|_| ())
            }
            _ => {
                let got = self.infer(e)?;
                if &got == want {
                    Ok(())
                } else {
                    Err(mismatch(want, &got, e))
                }
            }
        }
    }
}

/// Type of `e` and the qubits it consumes.
pub fn type_expr(
    gamma: &ClassicalEnv,
    sigma: &QubitEnv,
    e: &Expr,
) -> Result<(BaseType, QubitEnv), TypeError> {
    let spent = BTreeSet::new();
    let mut c = ExprChecker::new(gamma, sigma, &spent);
    let t = c.infer(e)?;
    Ok((t, c.used.into_iter().collect()))
}
