//! Tokenizer for the `.qmpst` DSL.

use std::fmt;

use super::ParseError;

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    /// Qubit reference `'name`.
    QRef(String),
    Int(i64),
    Float(f64),
    Arrow,
    ColonColon,
    ColonEq,
    Colon,
    Dot,
    Comma,
    Semi,
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Neq,
    Bang,
    Question,
    Amp,
    AndAnd,
    OrOr,
    Plus,
    Minus,
    Star,
    Slash,
    At,
    Caret,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(s) => return write!(f, "identifier `{s}`"),
            Tok::QRef(s) => return write!(f, "qubit reference `'{s}`"),
            Tok::Int(n) => return write!(f, "integer `{n}`"),
            Tok::Float(x) => return write!(f, "number `{x}`"),
            Tok::Arrow => "->",
            Tok::ColonColon => "::",
            Tok::ColonEq => ":=",
            Tok::Colon => ":",
            Tok::Dot => ".",
            Tok::Comma => ",",
            Tok::Semi => ";",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::Lt => "<",
            Tok::Le => "<=",
            Tok::Gt => ">",
            Tok::Ge => ">=",
            Tok::Eq => "=",
            Tok::Neq => "!=",
            Tok::Bang => "!",
            Tok::Question => "?",
            Tok::Amp => "&",
            Tok::AndAnd => "&&",
            Tok::OrOr => "||",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Slash => "/",
            Tok::At => "@",
            Tok::Caret => "^",
            Tok::Eof => return f.write_str("end of input"),
        };
        write!(f, "`{s}`")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spanned {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

fn ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '#'
}

pub fn tokenize(src: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let err = |line, col, found: String| ParseError {
        line,
        col,
        expected: vec!["token".to_string()],
        found,
    };
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let (start_line, start_col) = (line, col);
        let two: String = chars[i..(i + 2).min(chars.len())].iter().collect();
        let tok2 = match two.as_str() {
            "->" => Some(Tok::Arrow),
            "::" => Some(Tok::ColonColon),
            ":=" => Some(Tok::ColonEq),
            "<=" => Some(Tok::Le),
            ">=" => Some(Tok::Ge),
            "!=" => Some(Tok::Neq),
            "&&" => Some(Tok::AndAnd),
            "||" => Some(Tok::OrOr),
            _ => None,
        };
        if let Some(tok) = tok2 {
            out.push(Spanned {
                tok,
                line: start_line,
                col: start_col,
            });
            i += 2;
            col += 2;
            continue;
        }
        let tok = if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let mut float = false;
            if i + 1 < chars.len() && chars[i] == '.' && chars[i + 1].is_ascii_digit() {
                float = true;
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            let text: String = chars[start..i].iter().collect();
            col += i - start;
            let tok = if float {
                Tok::Float(text.parse().map_err(|_| err(start_line, start_col, text.clone()))?)
            } else {
                Tok::Int(text.parse().map_err(|_| err(start_line, start_col, text.clone()))?)
            };
            out.push(Spanned {
                tok,
                line: start_line,
                col: start_col,
            });
            continue;
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && ident_char(chars[i]) {
                i += 1;
            }
            col += i - start;
            out.push(Spanned {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                line: start_line,
                col: start_col,
            });
            continue;
        } else if c == '\'' {
            let start = i + 1;
            i += 1;
            while i < chars.len() && ident_char(chars[i]) {
                i += 1;
            }
            if i == start {
                return Err(err(start_line, start_col, "'".into()));
            }
            col += i - start + 1;
            out.push(Spanned {
                tok: Tok::QRef(chars[start..i].iter().collect()),
                line: start_line,
                col: start_col,
            });
            continue;
        } else {
            match c {
                ':' => Tok::Colon,
                '.' => Tok::Dot,
                ',' => Tok::Comma,
                ';' => Tok::Semi,
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '{' => Tok::LBrace,
                '}' => Tok::RBrace,
                '[' => Tok::LBracket,
                ']' => Tok::RBracket,
                '<' => Tok::Lt,
                '>' => Tok::Gt,
                '=' => Tok::Eq,
                '!' => Tok::Bang,
                '?' => Tok::Question,
                '&' => Tok::Amp,
                '+' => Tok::Plus,
                '-' => Tok::Minus,
                '*' => Tok::Star,
                '/' => Tok::Slash,
                '@' => Tok::At,
                '^' => Tok::Caret,
                other => return Err(err(start_line, start_col, other.to_string())),
            }
        };
        out.push(Spanned {
            tok,
            line: start_line,
            col: start_col,
        });
        i += 1;
        col += 1;
    }
    out.push(Spanned {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}
