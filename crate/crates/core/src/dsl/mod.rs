//! The `.risk` text format.
//!
//! ```text
//! model "example"
//! # comments directly above an item are kept as its notes
//! decision review_boards label "Review boards"
//! event a label "A happens" { p = 0.2 }
//! event b { p ~ beta(2, 8) }
//! gate t = ANDOR(w = 0.5; a, b)
//! influence review_boards -> a { factor = 0.5 }
//! top = t
//! ```
//!
//! Modules are declared with `module name { ... output = local_id }` and
//! instantiated with `instance id = name`; the instance output is `id.out`.
//! [`serialize`] produces the canonical form, and
//! `parse(serialize(doc)) == doc` for every valid document.

mod lexer;
mod parser;
mod serialize;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use parser::parse;
pub use serialize::{serialize, serialize_unchecked};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SourceSpan {
    /// 1-based.
    pub line: usize,
    /// 1-based, counted in characters.
    pub column: usize,
    pub length: usize,
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ParseErrorCode {
    Syntax,
    DuplicateId,
    Arity,
    InvalidIdentifier,
    InvalidUtf8,
    Misplaced,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseError {
    pub code: ParseErrorCode,
    pub span: SourceSpan,
    pub expected: String,
    pub found: String,
    /// For duplicates: where the first declaration is.
    pub related: Option<SourceSpan>,
}

impl ParseError {
    /// `file:line:col: expected X, found Y`
    pub fn render(&self, file: &str) -> String {
        format!("{file}:{self}")
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: expected {}, found {}", self.span, self.expected, self.found)
    }
}

impl std::error::Error for ParseError {}

/// Parse raw bytes; invalid UTF-8 is reported as a parse error.
pub fn parse_bytes(bytes: &[u8]) -> Result<crate::ModelDoc, Vec<ParseError>> {
    match std::str::from_utf8(bytes) {
        Ok(text) => parse(text),
        Err(e) => {
            let valid = std::str::from_utf8(&bytes[..e.valid_up_to()]).expect("valid prefix");
            let line = valid.matches('\n').count() + 1;
            let column = valid.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
            Err(vec![ParseError {
                code: ParseErrorCode::InvalidUtf8,
                span: SourceSpan { line, column, length: 1 },
                expected: "UTF-8 text".into(),
                found: format!("byte 0x{:02x}", bytes[e.valid_up_to()]),
                related: None,
            }])
        }
    }
}
