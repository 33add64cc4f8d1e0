//! Static verifier for Lite-Eiffel, a small contract-annotated object-oriented
//! language.
//!
//! The pipeline is `frontend` (lex, parse, typecheck) → `translate` (into a
//! Boogie-style intermediate verification language, see `ivl`) → `vcgen`
//! (weakest preconditions, SMT-LIB2 emission, external solver) → `driver`
//! (CLI orchestration, corpus harness, reports).

pub mod driver;
pub mod frontend;
pub mod ivl;
pub mod span;
pub mod translate;
pub mod vcgen;

pub use span::Span;
