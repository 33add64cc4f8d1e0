//! Lite-Eiffel front end: lexing, parsing, pretty-printing, type checking.

pub mod ast;
mod classes;
pub mod lexer;
pub mod parser;
pub mod printer;
pub mod typecheck;

use std::fmt;

use crate::span::Span;

pub use classes::TypedProgram;
pub use parser::parse;
pub use printer::print_program;
pub use typecheck::typecheck;

/// Name of the built-in opaque reference class.
pub const STRING_CLASS: &str = "STRING";

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub struct ParseError {
    pub span: Span,
    pub message: String,
    /// Tokens or constructs that would have been accepted at `span`.
    pub expected: Vec<String>,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: parse error: {}", self.span, self.message)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{span}: type error: {message}")]
pub struct TypeError {
    pub span: Span,
    pub message: String,
}

impl TypeError {
    pub fn new(span: Span, message: impl Into<String>) -> TypeError {
        TypeError { span, message: message.into() }
    }
}

/// Either kind of front-end failure.
#[derive(Clone, Debug, thiserror::Error)]
pub enum FrontendError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("{} type error(s)", .0.len())]
    Type(Vec<TypeError>),
}

/// Parses and typechecks in one step.
pub fn check_source(src: &str) -> Result<TypedProgram, FrontendError> {
    let program = parse(src)?;
    typecheck(program).map_err(FrontendError::Type)
}
