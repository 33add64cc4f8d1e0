//! Label discipline of structured IVL bodies.
//!
//! A `goto l` resolves to the innermost enclosing construct labeled `l`:
//! a labeled block means "leave the block", a labeled loop means "continue
//! with the next iteration". A block immediately followed by a loop with the
//! same label leaves to the loop head, so both readings coincide there.

use std::collections::BTreeMap;

use super::Stmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JumpTarget {
    Exit,
    Continue,
}

/// Resolves `label` against a stack of enclosing constructs (innermost
/// last).
pub fn resolve(enclosing: &[(String, JumpTarget)], label: &str) -> Option<JumpTarget> {
    enclosing.iter().rev().find(|(l, _)| l == label).map(|(_, t)| *t)
}

/// Renames labels to `L0`, `L1`, ... in order of first occurrence, so that
/// statement trees built with different label names compare equal.
pub fn canonical_labels(stmts: &[Stmt]) -> Vec<Stmt> {
    let mut names = BTreeMap::new();
    collect(stmts, &mut names);
    rename(stmts, &names)
}

fn collect(stmts: &[Stmt], names: &mut BTreeMap<String, String>) {
    let note = |l: &String, names: &mut BTreeMap<String, String>| {
        if !names.contains_key(l) {
            let n = format!("L{}", names.len());
            names.insert(l.clone(), n);
        }
    };
    for s in stmts {
        match s {
            Stmt::Block { label, body } => {
                note(label, names);
                collect(body, names);
            }
            Stmt::While { label, body, .. } => {
                if let Some(l) = label {
                    note(l, names);
                }
                collect(body, names);
            }
            Stmt::If { then, els, .. } => {
                collect(then, names);
                collect(els, names);
            }
            _ => {}
        }
    }
}

fn rename(stmts: &[Stmt], names: &BTreeMap<String, String>) -> Vec<Stmt> {
    let r = |l: &String| names.get(l).cloned().unwrap_or_else(|| l.clone());
    stmts
        .iter()
        .map(|s| match s {
            Stmt::Block { label, body } => Stmt::Block { label: r(label), body: rename(body, names) },
            Stmt::While { label, cond, invariants, body } => Stmt::While {
                label: label.as_ref().map(r),
                cond: cond.clone(),
                invariants: invariants.clone(),
                body: rename(body, names),
            },
            Stmt::If { cond, then, els } => {
                Stmt::If { cond: cond.clone(), then: rename(then, names), els: rename(els, names) }
            }
            Stmt::Goto(l) => Stmt::Goto(r(l)),
            other => other.clone(),
        })
        .collect()
}
