//! Recursive-descent parser for the `.qmpst` DSL.
//!
//! Grammar (informal EBNF):
//!
//! ```text
//! file    ::= item*
//! item    ::= "global" [IDENT] "=" gtype
//!           | "params" "{" [IDENT "=" expr ("," IDENT "=" expr)*] "}"
//!           | "register" "{" [IDENT ("," IDENT)*] "}"
//!           | "system" "{" (ROLE "::" proc [";"])* "}"
//! type    ::= tatom ["^" INT]
//! tatom   ::= "bit" | "qbit" | "unit" | "int" | "bitlist" | "list" "(" type ")"
//!           | "(" [type ("," type)*] ")"
//! gtype   ::= "mu" IDENT "." gtype | "end" | IDENT | "(" gtype ")"
//!           | ROLE "->" ROLE ":" (gbranch | "{" gbranch ("," gbranch)* "}")
//! gbranch ::= (LABEL [payload] | payload) ["." gtype]
//! payload ::= "(" [type ("," type)*] ")"
//! ltype   ::= as gtype, with ROLE "&" (receive) and ROLE "+" (send)
//! proc    ::= "0" ["[" qexpr ("," qexpr)* "]"]
//!           | ROLE "!" [LABEL] ["<" expr {"," expr} ">"] cont
//!           | ROLE "?" (pbranch | "{" pbranch ("," pbranch)* "}")
//!           | "def" IDENT ["(" param ("," param)* ")"] "=" proc "in" proc
//!           | IDENT "<" [expr ("," expr)*] ">"
//!           | "if" expr "then" proc ["else" proc]
//!           | "meas" binder "=" qtargets cont
//!           | "qbit" IDENT ("," IDENT)* cont | IDENT ":=" "new" "qbit" cont
//!           | IDENT "=" "QST" "(" qexpr "," qexpr ")" cont
//!           | IDENT "=" "qow" "(" expr ")" cont
//!           | GATE ["[" angle "]"] "(" qexpr ("," qexpr)* ")" cont
//!           | "(" proc ")" cont
//! pbranch ::= (LABEL ["(" binder ")"] | "(" binder ")") ["." proc]
//! cont    ::= ["." proc]
//! ```
//!
//! `(P).Q` stands for `P` with every plain `0` replaced by `Q`; in
//! particular `(if e then P).Q` is `if e then P.Q else Q`.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;

use super::ast::*;
use super::lexer::{tokenize, Spanned, Tok};
use super::{ParseError, SyntaxError};

type PResult<T> = Result<T, SyntaxError>;

const KEYWORDS: &[&str] = &[
    "def", "in", "if", "then", "else", "meas", "qbit", "new", "mu", "end", "not", "hd", "tl",
    "fst", "snd", "isempty", "proj", "int", "global", "system", "params", "register",
];

/// Prefix of reserved ancilla names introduced by `QST`.
pub const QST_ANCILLA: &str = "qst#";

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    fresh: usize,
}

impl Parser {
    fn new(src: &str) -> PResult<Self> {
        Ok(Parser {
            toks: tokenize(src)?,
            pos: 0,
            fresh: 0,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn line(&self) -> usize {
        self.toks[self.pos].line
    }

    fn error<T>(&self, expected: &[&str]) -> PResult<T> {
        let t = &self.toks[self.pos];
        Err(SyntaxError::Parse(ParseError {
            line: t.line,
            col: t.col,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: t.tok.to_string(),
        }))
    }

    fn malformed<T>(&self, msg: impl Into<String>) -> PResult<T> {
        let t = &self.toks[self.pos];
        Err(SyntaxError::Malformed(format!(
            "{}:{}: {}",
            t.line,
            t.col,
            msg.into()
        )))
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok) -> PResult<()> {
        if self.eat(&tok) {
            Ok(())
        } else {
            self.error(&[&tok.to_string()])
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_kw(&mut self, kw: &str) -> PResult<()> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            self.error(&[&format!("`{kw}`")])
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.bump();
                Ok(s)
            }
            _ => self.error(&["identifier"]),
        }
    }

    fn at_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }

    fn finish(&self) -> PResult<()> {
        if self.at_eof() {
            Ok(())
        } else {
            self.error(&["end of input"])
        }
    }

    // ---- basic types ----

    fn base_type(&mut self) -> PResult<BaseType> {
        let atom = self.type_atom()?;
        if self.eat(&Tok::Caret) {
            match self.bump() {
                Tok::Int(n) if n >= 2 => Ok(BaseType::Tuple(vec![atom; n as usize])),
                Tok::Int(1) => Ok(atom),
                _ => {
                    self.pos -= 1;
                    self.error(&["tuple arity"])
                }
            }
        } else {
            Ok(atom)
        }
    }

    fn type_atom(&mut self) -> PResult<BaseType> {
        if self.eat(&Tok::LParen) {
            let items = self.type_list_tail()?;
            return Ok(tuple_type(items));
        }
        let name = match self.peek().clone() {
            Tok::Ident(s) => s,
            _ => return self.error(&["type"]),
        };
        let t = match name.as_str() {
            "bit" | "Bit" | "bool" => BaseType::Bit,
            "qbit" | "qubit" | "Qbit" | "QBit" | "Qubit" => BaseType::Qubit,
            "unit" | "Unit" => BaseType::Unit,
            "int" | "Int" => BaseType::Int,
            "bitlist" | "BitList" => BaseType::bit_list(),
            "list" | "List" => {
                self.bump();
                self.expect(Tok::LParen)?;
                let elem = self.base_type()?;
                self.expect(Tok::RParen)?;
                if elem.has_qubit() {
                    return self.malformed("list elements must be classical");
                }
                return Ok(BaseType::List(Box::new(elem)));
            }
            _ => return self.error(&["type"]),
        };
        self.bump();
        Ok(t)
    }

    /// After `(`: zero or more comma-separated types and `)`.
    fn type_list_tail(&mut self) -> PResult<Vec<BaseType>> {
        let mut items = Vec::new();
        if self.eat(&Tok::RParen) {
            return Ok(items);
        }
        loop {
            items.push(self.base_type()?);
            if self.eat(&Tok::Comma) {
                continue;
            }
            self.expect(Tok::RParen)?;
            return Ok(items);
        }
    }

    // ---- global types ----

    fn global(&mut self) -> PResult<GlobalType> {
        if self.eat(&Tok::LParen) {
            let g = self.global()?;
            self.expect(Tok::RParen)?;
            return Ok(g);
        }
        if self.eat_kw("mu") {
            let var = self.ident()?;
            self.expect(Tok::Dot)?;
            let body = self.global()?;
            return Ok(GlobalType::Rec {
                var,
                body: Box::new(body),
            });
        }
        if self.eat_kw("end") {
            return Ok(GlobalType::End);
        }
        let name = self.ident()?;
        if !self.eat(&Tok::Arrow) {
            return Ok(GlobalType::Var(name));
        }
        let to = self.ident()?;
        if to == name {
            return self.malformed(format!("role `{name}` interacts with itself"));
        }
        self.expect(Tok::Colon)?;
        let raw = self.choice_branches(Self::global, GlobalType::End)?;
        let branches = raw
            .into_iter()
            .map(|(label, payload, cont)| GlobalBranch {
                label,
                payload,
                cont,
            })
            .collect();
        Ok(GlobalType::Comm {
            from: Role(name),
            to: Role(to),
            branches,
        })
    }

    /// Shared by global and local choices.
    fn choice_branches<T>(
        &mut self,
        cont: fn(&mut Self) -> PResult<T>,
        end: T,
    ) -> PResult<Vec<(Label, BaseType, T)>>
    where
        T: Clone,
    {
        let mut out = Vec::new();
        if self.eat(&Tok::LBrace) {
            loop {
                out.push(self.type_branch(cont, end.clone(), true)?);
                if self.eat(&Tok::Comma) {
                    if self.eat(&Tok::RBrace) {
                        break;
                    }
                    continue;
                }
                self.expect(Tok::RBrace)?;
                break;
            }
        } else {
            out.push(self.type_branch(cont, end, false)?);
        }
        let mut seen = BTreeSet::new();
        for (l, _, _) in &out {
            if !seen.insert(l.clone()) {
                return Err(SyntaxError::DuplicateLabel(l.clone()));
            }
        }
        Ok(out)
    }

    fn type_branch<T>(
        &mut self,
        cont: fn(&mut Self) -> PResult<T>,
        end: T,
        _braced: bool,
    ) -> PResult<(Label, BaseType, T)> {
        let label = match self.peek() {
            Tok::LParen => Label::implicit(),
            Tok::Ident(_) => Label(self.ident()?),
            _ => return self.error(&["label", "`(`"]),
        };
        let payload = if self.eat(&Tok::LParen) {
            tuple_type(self.type_list_tail()?)
        } else {
            BaseType::Unit
        };
        let k = if self.eat(&Tok::Dot) { cont(self)? } else { end };
        Ok((label, payload, k))
    }

    // ---- local types ----

    fn local(&mut self) -> PResult<LocalType> {
        if self.eat(&Tok::LParen) {
            let t = self.local()?;
            self.expect(Tok::RParen)?;
            return Ok(t);
        }
        if self.eat_kw("mu") {
            let var = self.ident()?;
            self.expect(Tok::Dot)?;
            let body = self.local()?;
            return Ok(LocalType::Rec {
                var,
                body: Box::new(body),
            });
        }
        if self.eat_kw("end") {
            return Ok(LocalType::End);
        }
        let name = self.ident()?;
        let send = match self.peek() {
            Tok::Amp => false,
            Tok::Plus => true,
            _ => return Ok(LocalType::Var(name)),
        };
        self.bump();
        let raw = self.choice_branches(Self::local, LocalType::End)?;
        let branches = raw
            .into_iter()
            .map(|(label, payload, cont)| LocalBranch {
                label,
                payload,
                cont,
            })
            .collect();
        Ok(if send {
            LocalType::IntChoice {
                to: Role(name),
                branches,
            }
        } else {
            LocalType::ExtChoice {
                from: Role(name),
                branches,
            }
        })
    }

    // ---- expressions ----

    fn expr(&mut self, angle: bool) -> PResult<Expr> {
        let mut lhs = self.and_expr(angle)?;
        while self.eat(&Tok::OrOr) {
            let rhs = self.and_expr(angle)?;
            lhs = Expr::bin(BinOp::Or, lhs, rhs);
        }
        Ok(lhs)
    }

    fn and_expr(&mut self, angle: bool) -> PResult<Expr> {
        let mut lhs = self.cmp_expr(angle)?;
        while self.eat(&Tok::AndAnd) {
            let rhs = self.cmp_expr(angle)?;
            lhs = Expr::bin(BinOp::And, lhs, rhs);
        }
        Ok(lhs)
    }

    fn cmp_expr(&mut self, angle: bool) -> PResult<Expr> {
        let lhs = self.app_expr(angle)?;
        let op = match self.peek() {
            Tok::Eq => BinOp::Eq,
            Tok::Neq => BinOp::Neq,
            Tok::Lt if !angle => BinOp::Lt,
            Tok::Le if !angle => BinOp::Le,
            Tok::Gt if !angle => BinOp::Gt,
            Tok::Ge if !angle => BinOp::Ge,
            _ => return Ok(lhs),
        };
        self.bump();
        let rhs = self.app_expr(angle)?;
        Ok(Expr::bin(op, lhs, rhs))
    }

    fn app_expr(&mut self, angle: bool) -> PResult<Expr> {
        let mut lhs = self.add_expr(angle)?;
        while self.eat(&Tok::At) {
            let rhs = self.add_expr(angle)?;
            lhs = Expr::bin(BinOp::Append, lhs, rhs);
        }
        Ok(lhs)
    }

    fn add_expr(&mut self, angle: bool) -> PResult<Expr> {
        let mut lhs = self.mul_expr(angle)?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.mul_expr(angle)?;
            lhs = Expr::bin(op, lhs, rhs);
        }
    }

    fn mul_expr(&mut self, angle: bool) -> PResult<Expr> {
        let mut lhs = self.unary_expr(angle)?;
        while self.eat(&Tok::Star) {
            let rhs = self.unary_expr(angle)?;
            lhs = Expr::bin(BinOp::Mul, lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary_expr(&mut self, angle: bool) -> PResult<Expr> {
        if self.eat_kw("not") {
            return Ok(Expr::un(UnOp::Not, self.unary_expr(angle)?));
        }
        if self.eat(&Tok::Minus) {
            if let Tok::Int(n) = *self.peek() {
                self.bump();
                return Ok(Expr::Const(Value::Int(-n)));
            }
            return Ok(Expr::un(UnOp::Neg, self.unary_expr(angle)?));
        }
        self.atom_expr(angle)
    }

    fn atom_expr(&mut self, angle: bool) -> PResult<Expr> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(Expr::Const(if n == 0 || n == 1 {
                    Value::Bit(n as u8)
                } else {
                    Value::Int(n)
                }))
            }
            Tok::QRef(q) => {
                self.bump();
                Ok(Expr::QubitRef(q))
            }
            Tok::LParen => {
                self.bump();
                if self.eat(&Tok::RParen) {
                    return Ok(Expr::unit());
                }
                let mut items = vec![self.expr(false)?];
                while self.eat(&Tok::Comma) {
                    items.push(self.expr(false)?);
                }
                self.expect(Tok::RParen)?;
                Ok(if items.len() == 1 {
                    items.pop().unwrap()
                } else {
                    Expr::tuple(items)
                })
            }
            Tok::LBracket => {
                self.bump();
                let mut items = Vec::new();
                if !self.eat(&Tok::RBracket) {
                    loop {
                        items.push(self.expr(false)?);
                        if self.eat(&Tok::Comma) {
                            continue;
                        }
                        self.expect(Tok::RBracket)?;
                        break;
                    }
                }
                Ok(Expr::list(items))
            }
            Tok::Ident(name) => {
                let unop = match name.as_str() {
                    "hd" => Some(UnOp::Head),
                    "tl" => Some(UnOp::Tail),
                    "isempty" => Some(UnOp::IsEmpty),
                    _ => None,
                };
                if let Some(op) = unop {
                    self.bump();
                    let e = self.paren_expr()?;
                    return Ok(Expr::un(op, e));
                }
                match name.as_str() {
                    "fst" | "snd" => {
                        self.bump();
                        let e = self.paren_expr()?;
                        Ok(Expr::Proj(if name == "fst" { 0 } else { 1 }, Box::new(e)))
                    }
                    "proj" => {
                        self.bump();
                        self.expect(Tok::LParen)?;
                        let k = match self.bump() {
                            Tok::Int(k) if k >= 0 => k as usize,
                            _ => {
                                self.pos -= 1;
                                return self.error(&["projection index"]);
                            }
                        };
                        self.expect(Tok::Comma)?;
                        let e = self.expr(false)?;
                        self.expect(Tok::RParen)?;
                        Ok(Expr::Proj(k, Box::new(e)))
                    }
                    "int" => {
                        self.bump();
                        self.expect(Tok::LParen)?;
                        let neg = self.eat(&Tok::Minus);
                        let n = match self.bump() {
                            Tok::Int(n) => n,
                            _ => {
                                self.pos -= 1;
                                return self.error(&["integer"]);
                            }
                        };
                        self.expect(Tok::RParen)?;
                        Ok(Expr::Const(Value::Int(if neg { -n } else { n })))
                    }
                    _ => {
                        let _ = angle;
                        Ok(Expr::Var(self.ident()?))
                    }
                }
            }
            _ => self.error(&["expression"]),
        }
    }

    fn paren_expr(&mut self) -> PResult<Expr> {
        self.expect(Tok::LParen)?;
        let e = self.expr(false)?;
        self.expect(Tok::RParen)?;
        Ok(e)
    }

    // ---- processes ----

    fn cont(&mut self) -> PResult<Process> {
        if self.eat(&Tok::Dot) {
            self.process()
        } else {
            Ok(Process::nil())
        }
    }

    fn qexpr(&mut self) -> PResult<QubitExpr> {
        match self.peek().clone() {
            Tok::QRef(q) => {
                self.bump();
                Ok(QubitExpr::Ref(q))
            }
            Tok::Ident(_) => Ok(QubitExpr::Var(self.ident()?)),
            _ => self.error(&["qubit"]),
        }
    }

    fn qexpr_list_paren(&mut self) -> PResult<Vec<QubitExpr>> {
        self.expect(Tok::LParen)?;
        let mut out = vec![self.qexpr()?];
        while self.eat(&Tok::Comma) {
            out.push(self.qexpr()?);
        }
        self.expect(Tok::RParen)?;
        Ok(out)
    }

    fn binder_inner(&mut self) -> PResult<Binder> {
        // after `(`
        if self.eat(&Tok::RParen) {
            return Ok(Binder::Wildcard);
        }
        let mut names = vec![self.ident()?];
        while self.eat(&Tok::Comma) {
            names.push(self.ident()?);
        }
        self.expect(Tok::RParen)?;
        Ok(if names.len() == 1 {
            Binder::Var(names.pop().unwrap())
        } else {
            Binder::Tuple(names)
        })
    }

    fn process(&mut self) -> PResult<Process> {
        match self.peek().clone() {
            Tok::Int(0) => {
                self.bump();
                let mut owned = Vec::new();
                if self.eat(&Tok::LBracket) && !self.eat(&Tok::RBracket) {
                    loop {
                        owned.push(self.qexpr()?);
                        if self.eat(&Tok::Comma) {
                            continue;
                        }
                        self.expect(Tok::RBracket)?;
                        break;
                    }
                }
                Ok(Process::Inaction { owned })
            }
            Tok::LParen => {
                self.bump();
                let p = self.process()?;
                self.expect(Tok::RParen)?;
                if self.eat(&Tok::Dot) {
                    let q = self.process()?;
                    Ok(seq(p, &q))
                } else {
                    Ok(p)
                }
            }
            Tok::Ident(kw) if kw == "def" => self.def(),
            Tok::Ident(kw) if kw == "if" => {
                self.bump();
                let cond = self.expr(false)?;
                self.expect_kw("then")?;
                let then = self.process()?;
                let els = if self.eat_kw("else") {
                    self.process()?
                } else {
                    Process::nil()
                };
                Ok(Process::If {
                    cond,
                    then: Box::new(then),
                    els: Box::new(els),
                })
            }
            Tok::Ident(kw) if kw == "meas" => {
                self.bump();
                let binder = if self.eat(&Tok::LParen) {
                    match self.binder_inner()? {
                        Binder::Wildcard => return self.error(&["variable"]),
                        b => b,
                    }
                } else {
                    Binder::Var(self.ident()?)
                };
                self.expect(Tok::Eq)?;
                let targets = if matches!(self.peek(), Tok::LParen) {
                    self.qexpr_list_paren()?
                } else {
                    vec![self.qexpr()?]
                };
                if let Binder::Tuple(xs) = &binder {
                    if xs.len() != targets.len() {
                        return self.malformed("measurement binder and target counts differ");
                    }
                }
                let cont = self.cont()?;
                Ok(Process::Measure {
                    binder,
                    targets,
                    cont: Box::new(cont),
                })
            }
            Tok::Ident(kw) if kw == "qbit" => {
                self.bump();
                let mut binders = vec![self.ident()?];
                while self.eat(&Tok::Comma) {
                    binders.push(self.ident()?);
                }
                let cont = self.cont()?;
                Ok(Process::NewQubit {
                    binders,
                    cont: Box::new(cont),
                })
            }
            Tok::Ident(name) => match self.peek_at(1).clone() {
                Tok::Bang => self.select(),
                Tok::Question => self.branch(),
                Tok::Lt => {
                    let name = self.ident()?;
                    self.bump();
                    let mut args = Vec::new();
                    if !self.eat(&Tok::Gt) {
                        loop {
                            args.push(self.expr(true)?);
                            if self.eat(&Tok::Comma) {
                                continue;
                            }
                            self.expect(Tok::Gt)?;
                            break;
                        }
                    }
                    Ok(Process::Call { name, args })
                }
                Tok::ColonEq => {
                    let x = self.ident()?;
                    self.bump();
                    self.expect_kw("new")?;
                    self.expect_kw("qbit")?;
                    let cont = self.cont()?;
                    Ok(Process::NewQubit {
                        binders: vec![x],
                        cont: Box::new(cont),
                    })
                }
                Tok::Eq => self.assignment(),
                Tok::LParen | Tok::LBracket => {
                    if name == "Ry" || Gate::from_name(&name).is_some() {
                        self.unitary()
                    } else {
                        self.error(&["gate"])
                    }
                }
                _ => {
                    self.bump();
                    self.error(&["`!`", "`?`", "`<`", "`(`", "`=`", "`:=`"])
                }
            },
            _ => self.error(&["process"]),
        }
    }

    fn select(&mut self) -> PResult<Process> {
        let to = Role(self.ident()?);
        self.expect(Tok::Bang)?;
        let label = match self.peek() {
            Tok::Ident(_) => Some(Label(self.ident()?)),
            _ => None,
        };
        let payload = if self.eat(&Tok::Lt) {
            let mut items = vec![self.expr(true)?];
            while self.eat(&Tok::Comma) {
                items.push(self.expr(true)?);
            }
            self.expect(Tok::Gt)?;
            Some(if items.len() == 1 { items.remove(0) } else { Expr::tuple(items) })
        } else {
            None
        };
        if label.is_none() && payload.is_none() {
            return self.error(&["label", "`<`"]);
        }
        let cont = self.cont()?;
        Ok(Process::Select {
            to,
            label: label.unwrap_or_else(Label::implicit),
            payload: payload.unwrap_or_else(Expr::unit),
            cont: Box::new(cont),
        })
    }

    fn branch(&mut self) -> PResult<Process> {
        let from = Role(self.ident()?);
        self.expect(Tok::Question)?;
        let mut branches = Vec::new();
        if self.eat(&Tok::LBrace) {
            loop {
                branches.push(self.proc_branch()?);
                if self.eat(&Tok::Comma) {
                    if self.eat(&Tok::RBrace) {
                        break;
                    }
                    continue;
                }
                self.expect(Tok::RBrace)?;
                break;
            }
        } else {
            branches.push(self.proc_branch()?);
        }
        let mut seen = BTreeSet::new();
        for b in &branches {
            if !seen.insert(b.label.clone()) {
                return Err(SyntaxError::DuplicateLabel(b.label.clone()));
            }
        }
        Ok(Process::Branch { from, branches })
    }

    fn proc_branch(&mut self) -> PResult<ProcBranch> {
        let label = match self.peek() {
            Tok::LParen => Label::implicit(),
            Tok::Ident(_) => Label(self.ident()?),
            _ => return self.error(&["label", "`(`"]),
        };
        let binder = if self.eat(&Tok::LParen) {
            self.binder_inner()?
        } else {
            Binder::Wildcard
        };
        let cont = self.cont()?;
        Ok(ProcBranch {
            label,
            binder,
            cont,
        })
    }

    fn def(&mut self) -> PResult<Process> {
        self.expect_kw("def")?;
        let name = self.ident()?;
        let mut params = Vec::new();
        if self.eat(&Tok::LParen) && !self.eat(&Tok::RParen) {
            loop {
                let x = self.ident()?;
                self.expect(Tok::Colon)?;
                let t = self.base_type()?;
                params.push((x, t));
                if self.eat(&Tok::Comma) {
                    continue;
                }
                self.expect(Tok::RParen)?;
                break;
            }
        }
        let mut seen_quantum = false;
        for (x, t) in &params {
            match t {
                BaseType::Qubit => seen_quantum = true,
                t if t.has_qubit() => {
                    return self.malformed(format!("parameter `{x}` mixes qubits and classical data"))
                }
                _ if seen_quantum => {
                    return self.malformed("classical parameters must precede qubit parameters")
                }
                _ => {}
            }
        }
        self.expect(Tok::Eq)?;
        let body = self.process()?;
        self.expect_kw("in")?;
        let cont = self.process()?;
        Ok(Process::Def {
            name,
            params,
            body: Box::new(body),
            cont: Box::new(cont),
        })
    }

    fn assignment(&mut self) -> PResult<Process> {
        let x = self.ident()?;
        self.expect(Tok::Eq)?;
        let f = match self.peek().clone() {
            Tok::Ident(f) => f,
            _ => return self.error(&["`QST`", "`qow`"]),
        };
        self.bump();
        match f.as_str() {
            "QST" => {
                let qs = self.qexpr_list_paren()?;
                if qs.len() != 2 {
                    return self.malformed("QST compares exactly two qubits");
                }
                let cont = self.cont()?;
                let anc = format!("{QST_ANCILLA}{}", self.fresh);
                self.fresh += 1;
                Ok(swap_test(&x, &anc, qs[0].clone(), qs[1].clone(), cont))
            }
            "qow" => {
                let e = self.paren_expr()?;
                let bits = match &e {
                    Expr::Const(Value::List(bs)) => bs
                        .iter()
                        .map(|b| match b {
                            Value::Bit(b) => Ok(*b),
                            _ => Err(()),
                        })
                        .collect::<Result<Vec<u8>, ()>>(),
                    _ => Err(()),
                };
                let bits = match bits {
                    Ok(b) if !b.is_empty() => b,
                    _ => return self.malformed("qow expects a non-empty literal bit list"),
                };
                let cont = self.cont()?;
                Ok(Process::NewQubit {
                    binders: vec![x.clone()],
                    cont: Box::new(Process::Unitary {
                        gate: Gate::Ry(qow_angle(&bits)),
                        targets: vec![QubitExpr::Var(x)],
                        cont: Box::new(cont),
                    }),
                })
            }
            _ => {
                self.pos -= 1;
                self.error(&["`QST`", "`qow`"])
            }
        }
    }

    fn unitary(&mut self) -> PResult<Process> {
        let name = self.ident()?;
        let gate = if name == "Ry" {
            self.expect(Tok::LBracket)?;
            let a = self.angle()?;
            self.expect(Tok::RBracket)?;
            Gate::Ry(a)
        } else {
            Gate::from_name(&name).expect("checked by caller")
        };
        let targets = self.qexpr_list_paren()?;
        if targets.len() != gate.arity() {
            return self.malformed(format!(
                "gate {} takes {} qubit(s), given {}",
                gate.name(),
                gate.arity(),
                targets.len()
            ));
        }
        let cont = self.cont()?;
        Ok(Process::Unitary {
            gate,
            targets,
            cont: Box::new(cont),
        })
    }

    fn angle(&mut self) -> PResult<f64> {
        let mut acc = self.angle_atom()?;
        loop {
            if self.eat(&Tok::Star) {
                acc *= self.angle_atom()?;
            } else if self.eat(&Tok::Slash) {
                acc /= self.angle_atom()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn angle_atom(&mut self) -> PResult<f64> {
        match self.bump() {
            Tok::Minus => Ok(-self.angle_atom()?),
            Tok::Int(n) => Ok(n as f64),
            Tok::Float(x) => Ok(x),
            Tok::Ident(s) if s == "pi" => Ok(PI),
            _ => {
                self.pos -= 1;
                self.error(&["angle"])
            }
        }
    }

    // ---- files ----

    fn role_decls(&mut self, close: Option<Tok>) -> PResult<(System, BTreeMap<Role, usize>)> {
        let mut system = System::new();
        let mut lines = BTreeMap::new();
        loop {
            if let Some(c) = &close {
                if self.eat(c) {
                    break;
                }
            } else if self.at_eof() {
                break;
            }
            let line = self.line();
            let role = Role(self.ident()?);
            self.expect(Tok::ColonColon)?;
            let p = self.process()?;
            self.eat(&Tok::Semi);
            if system.roles.contains_key(&role) {
                return Err(SyntaxError::DuplicateRole(role));
            }
            lines.insert(role.clone(), line);
            system.roles.insert(role, p);
        }
        Ok((system, lines))
    }

    fn file(&mut self) -> PResult<ProtocolFile> {
        let mut file = ProtocolFile::default();
        while !self.at_eof() {
            if self.eat_kw("global") {
                if !matches!(self.peek(), Tok::Eq) {
                    self.ident()?;
                }
                self.expect(Tok::Eq)?;
                file.global = Some(self.global()?);
            } else if self.eat_kw("params") {
                self.expect(Tok::LBrace)?;
                if !self.eat(&Tok::RBrace) {
                    loop {
                        let x = self.ident()?;
                        self.expect(Tok::Eq)?;
                        let e = self.expr(false)?;
                        match e {
                            Expr::Const(v) => {
                                file.params.insert(x, v);
                            }
                            _ => return self.malformed("parameter values must be literals"),
                        }
                        if self.eat(&Tok::Comma) {
                            continue;
                        }
                        self.expect(Tok::RBrace)?;
                        break;
                    }
                }
            } else if self.eat_kw("register") {
                self.expect(Tok::LBrace)?;
                let mut names = Vec::new();
                if !self.eat(&Tok::RBrace) {
                    loop {
                        names.push(self.ident()?);
                        if self.eat(&Tok::Comma) {
                            continue;
                        }
                        self.expect(Tok::RBrace)?;
                        break;
                    }
                }
                file.register = Some(names);
            } else if self.eat_kw("system") {
                self.expect(Tok::LBrace)?;
                let (system, lines) = self.role_decls(Some(Tok::RBrace))?;
                file.system = Some(system);
                file.role_lines = lines;
            } else {
                return self.error(&["`global`", "`params`", "`register`", "`system`"]);
            }
        }
        Ok(file)
    }
}

fn tuple_type(mut items: Vec<BaseType>) -> BaseType {
    match items.len() {
        0 => BaseType::Unit,
        1 => items.pop().unwrap(),
        _ => BaseType::Tuple(items),
    }
}

/// Angle used for the one-way function stub on an m-bit key (MSB first).
pub fn qow_angle(bits: &[u8]) -> f64 {
    let k = bits.iter().fold(0u64, |acc, b| (acc << 1) | *b as u64);
    PI * k as f64 / (1u64 << bits.len()) as f64
}

/// Swap test on `q1`, `q2` with a fresh ancilla; binds `x` to 1 when equal.
pub fn swap_test(x: &str, anc: &str, q1: QubitExpr, q2: QubitExpr, cont: Process) -> Process {
    let a = || QubitExpr::Var(anc.to_string());
    let u = |gate, targets, cont| Process::Unitary {
        gate,
        targets,
        cont: Box::new(cont),
    };
    let meas = Process::Measure {
        binder: Binder::Var(x.to_string()),
        targets: vec![a()],
        cont: Box::new(cont),
    };
    Process::NewQubit {
        binders: vec![anc.to_string()],
        cont: Box::new(u(
            Gate::H,
            vec![a()],
            u(
                Gate::Cswap,
                vec![a(), q1, q2],
                u(Gate::H, vec![a()], u(Gate::X, vec![a()], meas)),
            ),
        )),
    }
}

/// `P[Q/0]`: replaces every plain `0` of `p` (outside definition bodies) by `q`.
pub fn seq(p: Process, q: &Process) -> Process {
    let rec = |p: Box<Process>| Box::new(seq(*p, q));
    match p {
        Process::Inaction { owned } if owned.is_empty() => q.clone(),
        Process::Inaction { owned } => Process::Inaction { owned },
        Process::Call { .. } => p,
        Process::Select {
            to,
            label,
            payload,
            cont,
        } => Process::Select {
            to,
            label,
            payload,
            cont: rec(cont),
        },
        Process::Branch { from, branches } => Process::Branch {
            from,
            branches: branches
                .into_iter()
                .map(|b| ProcBranch {
                    cont: seq(b.cont, q),
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
            body,
            cont: rec(cont),
        },
        Process::If { cond, then, els } => Process::If {
            cond,
            then: rec(then),
            els: rec(els),
        },
        Process::Measure {
            binder,
            targets,
            cont,
        } => Process::Measure {
            binder,
            targets,
            cont: rec(cont),
        },
        Process::NewQubit { binders, cont } => Process::NewQubit {
            binders,
            cont: rec(cont),
        },
        Process::Unitary {
            gate,
            targets,
            cont,
        } => Process::Unitary {
            gate,
            targets,
            cont: rec(cont),
        },
    }
}

pub fn parse_type(src: &str) -> Result<BaseType, SyntaxError> {
    let mut p = Parser::new(src)?;
    let t = p.base_type()?;
    p.finish()?;
    Ok(t)
}

pub fn parse_global(src: &str) -> Result<GlobalType, SyntaxError> {
    let mut p = Parser::new(src)?;
    let g = p.global()?;
    p.finish()?;
    Ok(g)
}

pub fn parse_local(src: &str) -> Result<LocalType, SyntaxError> {
    let mut p = Parser::new(src)?;
    let t = p.local()?;
    p.finish()?;
    Ok(t)
}

pub fn parse_expr(src: &str) -> Result<Expr, SyntaxError> {
    let mut p = Parser::new(src)?;
    let e = p.expr(false)?;
    p.finish()?;
    Ok(e)
}

pub fn parse_process(src: &str) -> Result<Process, SyntaxError> {
    let mut p = Parser::new(src)?;
    let proc_ = p.process()?;
    p.finish()?;
    Ok(proc_)
}

/// Parses a list of `Role :: Process` declarations, optionally wrapped in
/// `system { ... }`.
pub fn parse_system(src: &str) -> Result<System, SyntaxError> {
    let mut p = Parser::new(src)?;
    let (system, _) = if p.eat_kw("system") {
        p.expect(Tok::LBrace)?;
        let r = p.role_decls(Some(Tok::RBrace))?;
        p.finish()?;
        r
    } else {
        p.role_decls(None)?
    };
    Ok(system)
}

pub fn parse_file(src: &str) -> Result<ProtocolFile, SyntaxError> {
    let mut p = Parser::new(src)?;
    p.file()
}
