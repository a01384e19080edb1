//! Syntax of session types, expressions and quantum processes: AST,
//! parser, pretty-printer and structural well-formedness.

pub mod ast;
pub mod lexer;
pub mod parser;
pub mod pretty;
pub mod wf;

use std::fmt;

use thiserror::Error;

pub use ast::*;
pub use pretty::one_line;
pub use parser::{parse_expr, parse_file, parse_global, parse_local, parse_process, parse_system, parse_type};
pub use wf::{
    check_closed, check_contractive, free_process_vars, roles, type_equal, Contractive, TypeTerm,
};

/// Malformed input text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub expected: Vec<String>,
    pub found: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}: expected {}, found {}",
            self.line,
            self.col,
            self.expected.join(" or "),
            self.found
        )
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SyntaxError {
    #[error("parse error at {0}")]
    Parse(#[from] ParseError),
    #[error("role `{0}` is declared twice")]
    DuplicateRole(Role),
    #[error("label `{0}` occurs twice in one choice")]
    DuplicateLabel(Label),
    #[error("{0}")]
    Malformed(String),
    #[error("recursion variable `{0}` is not guarded by a communication")]
    NotContractive(String),
    #[error("type variable `{0}` is not bound")]
    Unbound(String),
}
