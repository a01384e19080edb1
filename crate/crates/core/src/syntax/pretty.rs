//! Pretty-printer producing DSL text that parses back to the same AST.

use std::fmt::{self, Display, Formatter, Write};

use super::ast::*;

impl Display for BaseType {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            BaseType::Bit => f.write_str("bit"),
            BaseType::Qubit => f.write_str("qbit"),
            BaseType::Unit => f.write_str("unit"),
            BaseType::Int => f.write_str("int"),
            BaseType::List(t) if **t == BaseType::Bit => f.write_str("bitlist"),
            BaseType::List(t) => write!(f, "list({t})"),
            BaseType::Tuple(ts) => {
                let uniform = ts.iter().all(|t| t == &ts[0]) && !matches!(ts[0], BaseType::Tuple(_));
                if uniform {
                    write!(f, "{}^{}", ts[0], ts.len())
                } else {
                    f.write_str("(")?;
                    comma_sep(f, ts)?;
                    f.write_str(")")
                }
            }
        }
    }
}

fn comma_sep<T: Display>(f: &mut Formatter<'_>, items: &[T]) -> fmt::Result {
    for (i, x) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{x}")?;
    }
    Ok(())
}

/// Payload annotation of a branch: `(T)` or nothing for a labelled unit.
fn payload(f: &mut Formatter<'_>, label: &Label, t: &BaseType) -> fmt::Result {
    match (label.is_implicit(), t) {
        (true, BaseType::Unit) => f.write_str("()"),
        (false, BaseType::Unit) => write!(f, "{label}"),
        (true, t) => write!(f, "({t})"),
        (false, t) => write!(f, "{label}({t})"),
    }
}

fn branches<C: Display>(
    f: &mut Formatter<'_>,
    items: &[(&Label, &BaseType, &C)],
    is_end: impl Fn(&C) -> bool,
) -> fmt::Result {
    let single = items.len() == 1;
    if !single {
        f.write_str("{")?;
    }
    for (i, (l, t, k)) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        payload(f, l, t)?;
        if !is_end(k) {
            write!(f, ".{k}")?;
        }
    }
    if !single {
        f.write_str("}")?;
    }
    Ok(())
}

impl Display for GlobalType {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            GlobalType::Comm { from, to, branches: bs } => {
                write!(f, "{from}->{to}:")?;
                let items: Vec<_> = bs.iter().map(|b| (&b.label, &b.payload, &b.cont)).collect();
                branches(f, &items, |g| *g == GlobalType::End)
            }
            GlobalType::Rec { var, body } => write!(f, "mu {var}.{body}"),
            GlobalType::Var(v) => f.write_str(v),
            GlobalType::End => f.write_str("end"),
        }
    }
}

impl Display for LocalType {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        let (peer, sym, bs) = match self {
            LocalType::ExtChoice { from, branches } => (from, "&", branches),
            LocalType::IntChoice { to, branches } => (to, "+", branches),
            LocalType::Rec { var, body } => return write!(f, "mu {var}.{body}"),
            LocalType::Var(v) => return f.write_str(v),
            LocalType::End => return f.write_str("end"),
        };
        write!(f, "{peer}{sym}")?;
        let items: Vec<_> = bs.iter().map(|b| (&b.label, &b.payload, &b.cont)).collect();
        branches(f, &items, |t| *t == LocalType::End)
    }
}

impl Display for Value {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bit(b) => write!(f, "{b}"),
            Value::Int(n) if *n == 0 || *n == 1 || *n < 0 => write!(f, "int({n})"),
            Value::Int(n) => write!(f, "{n}"),
            Value::Unit => f.write_str("()"),
            Value::QubitRef(q) => write!(f, "'{q}"),
            Value::Tuple(vs) => {
                f.write_str("(")?;
                comma_sep(f, vs)?;
                f.write_str(")")
            }
            Value::List(vs) => {
                f.write_str("[")?;
                comma_sep(f, vs)?;
                f.write_str("]")
            }
        }
    }
}

impl Display for QubitExpr {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            QubitExpr::Var(x) => f.write_str(x),
            QubitExpr::Ref(q) => write!(f, "'{q}"),
        }
    }
}

fn level(e: &Expr) -> u8 {
    match e {
        Expr::BinOp(op, _, _) => match op {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::Neq | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 3,
            BinOp::Append => 4,
            BinOp::Add | BinOp::Sub => 5,
            BinOp::Mul => 6,
        },
        Expr::UnOp(UnOp::Not | UnOp::Neg, _) => 7,
        _ => 8,
    }
}

fn has_angle_op(e: &Expr) -> bool {
    match e {
        Expr::BinOp(op, l, r) => {
            matches!(op, BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge)
                || has_angle_op(l)
                || has_angle_op(r)
        }
        Expr::UnOp(_, e) => has_angle_op(e),
        // components are printed inside parentheses or brackets
        _ => false,
    }
}

fn expr_at(f: &mut Formatter<'_>, e: &Expr, min: u8) -> fmt::Result {
    if level(e) < min {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl Display for Expr {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Var(x) => f.write_str(x),
            Expr::QubitRef(q) => write!(f, "'{q}"),
            Expr::Const(v) => write!(f, "{v}"),
            Expr::BinOp(op, l, r) => {
                let lv = level(self);
                let (lmin, rmin) = if lv == 3 { (lv + 1, lv + 1) } else { (lv, lv + 1) };
                expr_at(f, l, lmin)?;
                write!(f, " {} ", op.symbol())?;
                expr_at(f, r, rmin)
            }
            Expr::UnOp(op @ (UnOp::Not | UnOp::Neg), e) => {
                f.write_str(if *op == UnOp::Not { "not " } else { "-" })?;
                // `-` directly before an integer literal would fold into the literal
                if *op == UnOp::Neg && matches!(**e, Expr::Const(_)) {
                    write!(f, "({e})")
                } else {
                    expr_at(f, e, 7)
                }
            }
            Expr::UnOp(op, e) => write!(f, "{}({e})", op.keyword()),
            Expr::Tuple(es) => {
                f.write_str("(")?;
                comma_sep(f, es)?;
                f.write_str(")")
            }
            Expr::List(es) => {
                f.write_str("[")?;
                comma_sep(f, es)?;
                f.write_str("]")
            }
            Expr::Proj(0, e) => write!(f, "fst({e})"),
            Expr::Proj(1, e) => write!(f, "snd({e})"),
            Expr::Proj(k, e) => write!(f, "proj({k}, {e})"),
        }
    }
}

/// Expression placed between `<` and `>`.
struct Angled<'a>(&'a Expr);

impl Display for Angled<'_> {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        if has_angle_op(self.0) {
            write!(f, "({})", self.0)
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl Display for Binder {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Binder::Wildcard => f.write_str("()"),
            Binder::Var(x) => write!(f, "({x})"),
            Binder::Tuple(xs) => {
                f.write_str("(")?;
                comma_sep(f, xs)?;
                f.write_str(")")
            }
        }
    }
}

impl Display for Gate {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Gate::Ry(a) => write!(f, "Ry[{a}]"),
            g => f.write_str(g.name()),
        }
    }
}

fn cont(f: &mut Formatter<'_>, p: &Process) -> fmt::Result {
    match p {
        Process::Inaction { owned } if owned.is_empty() => Ok(()),
        p => write!(f, ".{p}"),
    }
}

fn targets(f: &mut Formatter<'_>, ts: &[QubitExpr]) -> fmt::Result {
    f.write_str("(")?;
    comma_sep(f, ts)?;
    f.write_str(")")
}

impl Display for Process {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Process::Inaction { owned } => {
                f.write_str("0")?;
                if !owned.is_empty() {
                    f.write_str("[")?;
                    comma_sep(f, owned)?;
                    f.write_str("]")?;
                }
                Ok(())
            }
            Process::Select {
                to,
                label,
                payload,
                cont: k,
            } => {
                write!(f, "{to}!")?;
                let unit = *payload == Expr::unit();
                if !label.is_implicit() {
                    write!(f, "{label}")?;
                }
                if !unit || label.is_implicit() {
                    write!(f, "<{}>", Angled(payload))?;
                }
                cont(f, k)
            }
            Process::Branch { from, branches } => {
                write!(f, "{from}?")?;
                let single = branches.len() == 1 && branches[0].label.is_implicit();
                if !single {
                    f.write_str("{")?;
                }
                for (i, b) in branches.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    if b.label.is_implicit() {
                        write!(f, "{}", b.binder)?;
                    } else {
                        write!(f, "{}", b.label)?;
                        if b.binder != Binder::Wildcard {
                            write!(f, "{}", b.binder)?;
                        }
                    }
                    cont(f, &b.cont)?;
                }
                if !single {
                    f.write_str("}")?;
                }
                Ok(())
            }
            Process::Def {
                name,
                params,
                body,
                cont: k,
            } => {
                write!(f, "def {name}(")?;
                for (i, (x, t)) in params.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{x}: {t}")?;
                }
                write!(f, ") = {body} in {k}")
            }
            Process::Call { name, args } => {
                write!(f, "{name}<")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{}", Angled(a))?;
                }
                f.write_str(">")
            }
            Process::If { cond, then, els } => write!(f, "if {cond} then {then} else {els}"),
            Process::Measure {
                binder,
                targets: ts,
                cont: k,
            } => {
                f.write_str("meas ")?;
                match binder {
                    Binder::Var(x) => f.write_str(x)?,
                    b => write!(f, "{b}")?,
                }
                f.write_str(" = ")?;
                if ts.len() == 1 {
                    write!(f, "{}", ts[0])?;
                } else {
                    targets(f, ts)?;
                }
                cont(f, k)
            }
            Process::NewQubit { binders, cont: k } => {
                f.write_str("qbit ")?;
                comma_sep(f, binders)?;
                // A bare binder list would swallow a following `, l(x)` branch.
                match &**k {
                    Process::Inaction { owned } if owned.is_empty() => f.write_str(".0"),
                    k => cont(f, k),
                }
            }
            Process::Unitary {
                gate,
                targets: ts,
                cont: k,
            } => {
                write!(f, "{gate}")?;
                targets(f, ts)?;
                cont(f, k)
            }
        }
    }
}

impl Display for System {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        f.write_str("system {\n")?;
        for (r, p) in &self.roles {
            writeln!(f, "  {r} :: {p}")?;
        }
        f.write_str("}")
    }
}

impl Display for ProtocolFile {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        if let Some(g) = &self.global {
            writeln!(out, "global G = {g}")?;
        }
        if !self.params.is_empty() {
            out.push_str("params { ");
            for (i, (k, v)) in self.params.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write!(out, "{k} = {v}")?;
            }
            out.push_str(" }\n");
        }
        if let Some(r) = &self.register {
            writeln!(out, "register {{ {} }}", r.join(", "))?;
        }
        if let Some(s) = &self.system {
            writeln!(out, "{s}")?;
        }
        f.write_str(&out)
    }
}

/// Compact one-line rendering of a process, used in reports.
pub fn one_line(p: &Process) -> String {
    p.to_string()
}

#[cfg(test)]
mod tests {
    use super::super::parser::*;

    #[test]
    fn alice_local_types_print() {
        let t = parse_local("Env&(qbit).Source&(qbit).Bob+(bit^2).end").unwrap();
        assert_eq!(t.to_string(), "Env&(qbit).Source&(qbit).Bob+(bit^2)");
    }

    #[test]
    fn round_trip_samples() {
        for src in [
            "mu t.Random->Bob:(bit).Alice->Bob:{data(qbit).Bob->Random:loop.t, stop.Bob->Random:stop}",
            "p->q:().end",
            "p->q:{a, b((bit, bitlist)).end}",
        ] {
            let g = parse_global(src).unwrap();
            assert_eq!(parse_global(&g.to_string()).unwrap(), g, "{src}");
        }
        for src in [
            "Env?(w).Source?(x).CNOT(w, x).H(w).meas r = (w, x).Bob!<r>",
            "def X(xs: bitlist, q: qbit) = if xs != [] then X<tl(xs), q> else 0[q] in X<[1, 0], 'a>",
            "p!<(a < b) || c>.q?{l(x).0, m.0[z]}",
            "p!l.p!<-(1)>.p!<int(-3)>.p!<1 - (2 - 3)>",
            "Ry[0.7853981633974483](x).meas (m, n) = (x, 'y#0)",
        ] {
            let p = parse_process(src).unwrap();
            assert_eq!(parse_process(&p.to_string()).unwrap(), p, "{src}");
        }
    }
}
