use thiserror::Error;

use crate::syntax::{BinOp, Expr, UnOp, Value};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("`{0}` of an empty list")]
    EmptyList(&'static str),
    #[error("operator `{op}` cannot be applied to {args}")]
    BadOperands { op: String, args: String },
    #[error("tuple has no component {0}")]
    BadProjection(usize),
    #[error("integer overflow")]
    Overflow,
}

fn bad(op: &str, args: &[&Value]) -> EvalError {
    EvalError::BadOperands {
        op: op.to_string(),
        args: args.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", "),
    }
}

fn as_int(v: &Value) -> Option<i64> {
    match v {
        Value::Bit(b) => Some(*b as i64),
        Value::Int(n) => Some(*n),
        _ => None,
    }
}

/// Equality with bit literals read as integers, matching the checker.
fn values_eq(a: &Value, b: &Value) -> bool {
    match (a, b) {
        (Value::Tuple(xs), Value::Tuple(ys)) | (Value::List(xs), Value::List(ys)) => {
            xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| values_eq(x, y))
        }
        _ => match (as_int(a), as_int(b)) {
            (Some(x), Some(y)) => x == y,
            _ => a == b,
        },
    }
}

fn truth(op: &str, v: &Value) -> Result<bool, EvalError> {
    match v {
        Value::Bit(b) => Ok(*b == 1),
        _ => Err(bad(op, &[v])),
    }
}

/// Big-step evaluation of a closed expression.
pub fn eval_expr(e: &Expr) -> Result<Value, EvalError> {
    match e {
        Expr::Var(x) => Err(EvalError::Unbound(x.clone())),
        Expr::QubitRef(q) => Ok(Value::QubitRef(q.clone())),
        Expr::Const(v) => Ok(v.clone()),
        Expr::Tuple(es) => Ok(Value::Tuple(es.iter().map(eval_expr).collect::<Result<_, _>>()?)),
        Expr::List(es) => Ok(Value::List(es.iter().map(eval_expr).collect::<Result<_, _>>()?)),
        Expr::Proj(k, inner) => match eval_expr(inner)? {
            Value::Tuple(mut vs) if *k < vs.len() => Ok(vs.swap_remove(*k)),
            _ => Err(EvalError::BadProjection(*k)),
        },
        Expr::UnOp(op, inner) => {
            let v = eval_expr(inner)?;
            match (op, &v) {
                (UnOp::Not, _) => Ok(Value::bit(!truth("not", &v)?)),
                (UnOp::Neg, _) => as_int(&v)
                    .and_then(i64::checked_neg)
                    .map(Value::Int)
                    .ok_or_else(|| bad("-", &[&v])),
                (UnOp::Head, Value::List(vs)) => vs.first().cloned().ok_or(EvalError::EmptyList("hd")),
                (UnOp::Tail, Value::List(vs)) => {
                    if vs.is_empty() {
                        Err(EvalError::EmptyList("tl"))
                    } else {
                        Ok(Value::List(vs[1..].to_vec()))
                    }
                }
                (UnOp::IsEmpty, Value::List(vs)) => Ok(Value::bit(vs.is_empty())),
                _ => Err(bad(op.keyword(), &[&v])),
            }
        }
        Expr::BinOp(op, l, r) => {
            let a = eval_expr(l)?;
            // short-circuit on the left operand
            match (op, &a) {
                (BinOp::And, Value::Bit(0)) => return Ok(Value::Bit(0)),
                (BinOp::Or, Value::Bit(1)) => return Ok(Value::Bit(1)),
                _ => {}
            }
            let b = eval_expr(r)?;
            let ints = || match (as_int(&a), as_int(&b)) {
                (Some(x), Some(y)) => Ok((x, y)),
                _ => Err(bad(op.symbol(), &[&a, &b])),
            };
            match op {
                BinOp::Add | BinOp::Sub | BinOp::Mul => {
                    let (x, y) = ints()?;
                    let n = match op {
                        BinOp::Add => x.checked_add(y),
                        BinOp::Sub => x.checked_sub(y),
                        _ => x.checked_mul(y),
                    };
                    n.map(Value::Int).ok_or(EvalError::Overflow)
                }
                BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
                    let (x, y) = ints()?;
                    Ok(Value::bit(match op {
                        BinOp::Lt => x < y,
                        BinOp::Le => x <= y,
                        BinOp::Gt => x > y,
                        _ => x >= y,
                    }))
                }
                BinOp::Eq => Ok(Value::bit(values_eq(&a, &b))),
                BinOp::Neq => Ok(Value::bit(!values_eq(&a, &b))),
                BinOp::And | BinOp::Or => {
                    truth(op.symbol(), &a)?;
                    Ok(Value::bit(truth(op.symbol(), &b)?))
                }
                BinOp::Append => match (&a, &b) {
                    (Value::List(xs), Value::List(ys)) => {
                        Ok(Value::List(xs.iter().chain(ys).cloned().collect()))
                    }
                    _ => Err(bad("@", &[&a, &b])),
                },
            }
        }
    }
}
