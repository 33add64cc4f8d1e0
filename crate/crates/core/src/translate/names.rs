//! Mangled IVL names.

use crate::frontend::TypedProgram;

pub fn procedure(class: &str, routine: &str) -> String {
    format!("{class}.{routine}")
}

pub fn field(class: &str, attribute: &str) -> String {
    format!("{class}.{attribute}")
}

pub fn post(class: &str, routine: &str) -> String {
    format!("post.{class}.{routine}")
}

pub fn pre(class: &str, routine: &str) -> String {
    format!("pre.{class}.{routine}")
}

pub fn function(class: &str, routine: &str) -> String {
    format!("fn.{class}.{routine}")
}

/// The class whose declaration of `routine` applies to targets of static
/// type `class`.
pub fn declaring_class(tp: &TypedProgram, class: &str, routine: &str) -> String {
    tp.routine(class, routine).map(|(c, _)| c.name.clone()).unwrap_or_else(|| class.to_string())
}
