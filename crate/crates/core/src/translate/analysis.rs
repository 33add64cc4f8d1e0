//! Whole-program analyses feeding the translation: purity, exception
//! behaviour of routine families, and frames.

use std::collections::{BTreeMap, BTreeSet};

use crate::frontend::ast::{AssignTarget, ClassDecl, Expr, ExprKind, Routine, Stmt, StmtKind};
use crate::frontend::TypedProgram;

use super::{names, TranslateError};

/// A routine declaration: (declaring class, routine name).
pub type DeclKey = (String, String);

fn walk_stmts<'a>(stmts: &'a [Stmt], f: &mut dyn FnMut(&'a Stmt)) {
    for s in stmts {
        f(s);
        match &s.kind {
            StmtKind::If { branches, otherwise } => {
                for (_, b) in branches {
                    walk_stmts(b, f);
                }
                walk_stmts(otherwise, f);
            }
            StmtKind::Loop { init, body, .. } => {
                walk_stmts(init, f);
                walk_stmts(body, f);
            }
            _ => {}
        }
    }
}

/// Every statement of a routine body, including its rescue clause.
pub fn body_stmts(r: &Routine) -> Vec<&Stmt> {
    let mut out = Vec::new();
    if let Some(b) = &r.body {
        walk_stmts(&b.stmts, &mut |s| out.push(s));
        if let Some(rescue) = &b.rescue {
            walk_stmts(rescue, &mut |s| out.push(s));
        }
    }
    out
}

/// Expressions directly contained in a statement (not in nested statements).
pub fn stmt_exprs(s: &Stmt) -> Vec<&Expr> {
    match &s.kind {
        StmtKind::Assign { value, .. } => vec![value],
        StmtKind::Create { args, .. } => args.iter().collect(),
        StmtKind::Call { target, args, .. } => target.iter().chain(args.iter()).collect(),
        StmtKind::If { branches, .. } => branches.iter().map(|(c, _)| c).collect(),
        StmtKind::Loop { invariant, until, .. } => {
            invariant.iter().map(|c| &c.expr).chain(std::iter::once(until)).collect()
        }
        StmtKind::Check(cs) => cs.iter().map(|c| &c.expr).collect(),
        StmtKind::Retry(e) => vec![e],
        StmtKind::Raise => vec![],
    }
}

/// All contract expressions of a routine.
fn contract_exprs(r: &Routine) -> Vec<&Expr> {
    let c = &r.contract;
    c.require
        .iter()
        .chain(&c.require_else)
        .chain(&c.ensure)
        .chain(&c.ensure_then)
        .chain(&c.rescue_invariant)
        .map(|c| &c.expr)
        .collect()
}

/// Declarations invoked by a body: procedure calls, creation procedures and
/// function calls, resolved against static types.
fn callees(tp: &TypedProgram, r: &Routine) -> Vec<DeclKey> {
    let mut out = Vec::new();
    for s in body_stmts(r) {
        match &s.kind {
            StmtKind::Call { class: Some(c), routine, .. } => {
                out.push((names::declaring_class(tp, c, routine), routine.clone()));
            }
            StmtKind::Create { class, creator: Some(m), .. } => {
                out.push((names::declaring_class(tp, class, m), m.clone()));
            }
            _ => {}
        }
        for e in stmt_exprs(s) {
            out.extend(expr_fn_calls(tp, e));
        }
    }
    out
}

fn expr_fn_calls(tp: &TypedProgram, e: &Expr) -> Vec<DeclKey> {
    let mut out = Vec::new();
    e.walk(&mut |x| {
        if let ExprKind::FnCall { class, routine, .. } = &x.kind {
            out.push((names::declaring_class(tp, class, routine), routine.clone()));
        }
    });
    out
}

/// Declarations reachable by dynamic dispatch from a call bound statically
/// to `key`: the declaration itself and redeclarations in descendants.
pub fn dispatch_targets(tp: &TypedProgram, key: &DeclKey) -> Vec<DeclKey> {
    tp.descendants(&key.0)
        .into_iter()
        .filter(|c| c.routine(&key.1).is_some())
        .map(|c| (c.name.clone(), key.1.clone()))
        .collect()
}

/// The key of the original declaration of the family `key` belongs to.
pub fn family(tp: &TypedProgram, key: &DeclKey) -> DeclKey {
    let (c, _) = tp.origin(&key.0, &key.1).expect("declared routine");
    (c.name.clone(), key.1.clone())
}

/// Families (keyed by original declaration) whose members may terminate
/// with an exception: a member raises, calls into such a family, or has a
/// postcondition speaking about `ExcV`.
pub fn raising_families(tp: &TypedProgram) -> BTreeSet<DeclKey> {
    let mut raising = BTreeSet::new();
    loop {
        let before = raising.len();
        for (c, r) in tp.routines() {
            let fam = family(tp, &(c.name.clone(), r.name.clone()));
            if raising.contains(&fam) {
                continue;
            }
            let raises = body_stmts(r).iter().any(|s| matches!(s.kind, StmtKind::Raise))
                || r.contract.ensure.iter().chain(&r.contract.ensure_then).any(|c| super::expr::mentions_excv(&c.expr))
                || callees(tp, r).iter().any(|k| raising.contains(&family(tp, k)));
            if raises {
                raising.insert(fam);
            }
        }
        if raising.len() == before {
            return raising;
        }
    }
}

/// Routines that must be pure: declared `pure`, invoked from a contract or
/// an expression, or invoked by another pure routine; and every
/// redeclaration of those. Checks that none of them writes attributes,
/// creates objects, raises, or calls impure code.
pub fn check_purity(tp: &TypedProgram) -> Result<BTreeSet<DeclKey>, TranslateError> {
    let raising = raising_families(tp);
    let mut pure: BTreeSet<DeclKey> = BTreeSet::new();
    let mut work: Vec<DeclKey> = Vec::new();
    for (c, r) in tp.routines() {
        let key = (c.name.clone(), r.name.clone());
        if r.pure {
            work.push(key);
        }
        for e in contract_exprs(r) {
            work.extend(expr_fn_calls(tp, e));
        }
        for s in body_stmts(r) {
            for e in stmt_exprs(s) {
                work.extend(expr_fn_calls(tp, e));
            }
        }
        for cl in tp.invariant(&c.name) {
            work.extend(expr_fn_calls(tp, &cl.expr));
        }
    }
    while let Some(key) = work.pop() {
        for k in dispatch_targets(tp, &key) {
            if pure.insert(k.clone()) {
                let r = tp.class(&k.0).and_then(|c| c.routine(&k.1)).expect("declared routine");
                work.extend(callees(tp, r));
            }
        }
    }
    for key in &pure {
        let class = tp.class(&key.0).expect("class");
        let r = class.routine(&key.1).expect("routine");
        let fail = |reason: &str| TranslateError::PurityError {
            routine: format!("{}.{}", key.0, key.1),
            span: r.span,
            reason: reason.to_string(),
        };
        if raising.contains(&family(tp, key)) {
            return Err(fail("may raise an exception"));
        }
        for s in body_stmts(r) {
            match &s.kind {
                StmtKind::Assign { target: AssignTarget::Attr { name, .. }, .. } => {
                    return Err(fail(&format!("assigns attribute {name}")));
                }
                StmtKind::Create { .. } => return Err(fail("creates an object")),
                _ => {}
            }
        }
    }
    Ok(pure)
}

/// A frame location: attribute `field` (mangled) of `receiver`, which is
/// `None` for Current or the name of a formal argument.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Location {
    pub receiver: Option<String>,
    pub field: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Frame {
    /// The routine leaves the heap unchanged.
    Pure,
    /// Allocated locations outside this set are unchanged.
    Locations(Vec<Location>),
}

/// The frame of a routine family, determined by its original declaration:
/// an explicit `modify` clause, or else every attribute mentioned in its
/// `ensure` clauses (post-state or under `old`).
pub fn infer_frame(
    tp: &TypedProgram,
    class: &ClassDecl,
    routine: &Routine,
    pure: &BTreeSet<DeclKey>,
) -> Result<Frame, TranslateError> {
    if pure.contains(&(class.name.clone(), routine.name.clone())) {
        return Ok(Frame::Pure);
    }
    let (oc, orig) = tp.origin(&class.name, &routine.name).expect("declared routine");
    let mut locs = BTreeSet::new();
    if let Some(targets) = &orig.modify {
        for t in targets {
            let static_class = match &t.receiver {
                None => oc.name.clone(),
                Some(f) => {
                    let v = orig.formal(f).expect("checked modify receiver");
                    v.ty.class_name().expect("reference formal").to_string()
                }
            };
            let decl = tp.attribute(&static_class, &t.attribute).expect("checked modify attribute").0;
            locs.insert(Location { receiver: t.receiver.clone(), field: names::field(&decl.name, &t.attribute) });
        }
        return Ok(Frame::Locations(locs.into_iter().collect()));
    }
    for clause in &orig.contract.ensure {
        let mut err = None;
        clause.expr.walk(&mut |e| {
            if let ExprKind::Attr { target, class: decl, name } = &e.kind {
                let receiver = match &target.kind {
                    ExprKind::Current => None,
                    ExprKind::Local(n) if orig.formal(n).is_some() => Some(n.clone()),
                    _ => {
                        err.get_or_insert(TranslateError::FrameReceiverUnsupported {
                            routine: format!("{}.{}", oc.name, orig.name),
                            span: e.span,
                            attribute: name.clone(),
                        });
                        return;
                    }
                };
                locs.insert(Location { receiver, field: names::field(decl, name) });
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
    }
    Ok(Frame::Locations(locs.into_iter().collect()))
}

/// Frames of every declaration in the program.
pub fn all_frames(tp: &TypedProgram, pure: &BTreeSet<DeclKey>) -> Result<BTreeMap<DeclKey, Frame>, TranslateError> {
    let mut out = BTreeMap::new();
    for (c, r) in tp.routines() {
        out.insert((c.name.clone(), r.name.clone()), infer_frame(tp, c, r, pure)?);
    }
    Ok(out)
}
