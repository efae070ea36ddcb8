//! Lexing and the numeric sub-grammar shared by the `.cqp` and `.qccs`
//! formats: complex scalar expressions, ket sums and matrix literals.

mod lexer;
mod numeric;

pub use lexer::{Lexer, Tok, Token};
pub use numeric::{fmt_complex, fmt_ket_sum, fmt_real, parse_complex, parse_ket_sum, parse_matrix, state_from_kets, KetTerm};

use std::fmt;
use thiserror::Error;

/// 1-based source location.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{pos}: {message}")]
pub struct ParseError {
    pub pos: Pos,
    pub message: String,
}

impl ParseError {
    pub fn new(pos: Pos, message: impl Into<String>) -> Self {
        ParseError { pos, message: message.into() }
    }
}
