//! Source expressions to IVL expressions.

use std::collections::BTreeMap;

use crate::frontend::ast::{self, ExprKind, Type, UnOp};
use crate::frontend::TypedProgram;
use crate::ivl::{self, bin, BinOp, Expr, Sort};

use super::names;

pub fn sort_of(t: &Type) -> Sort {
    match t {
        Type::Integer => Sort::Int,
        Type::Boolean => Sort::Bool,
        Type::Class(_) | Type::None => Sort::Ref,
    }
}

pub fn default_value(s: Sort) -> Expr {
    match s {
        Sort::Int => Expr::Int(0),
        Sort::Bool => Expr::Bool(false),
        _ => Expr::Null,
    }
}

/// How the implicit entities of a source expression map into the IVL.
#[derive(Clone, Debug)]
pub struct Env {
    pub heap: Expr,
    /// Heap for `old` subexpressions.
    pub old_heap: Expr,
    pub current: Expr,
    pub result: Expr,
    pub exc: Expr,
    /// Renaming of locals and formals; unmapped names stay as they are.
    pub vars: BTreeMap<String, Expr>,
}

impl Env {
    /// Procedure contracts and bodies: `Heap`, `old(Heap)`, `Current`, ...
    pub fn procedure() -> Env {
        Env {
            heap: ivl::var(ivl::HEAP),
            old_heap: ivl::old(ivl::var(ivl::HEAP)),
            current: ivl::var("Current"),
            result: ivl::var("Result"),
            exc: ivl::var(ivl::EXCV),
            vars: BTreeMap::new(),
        }
    }

    pub fn with_heap(&self, heap: Expr) -> Env {
        Env { heap, ..self.clone() }
    }
}

pub fn translate_expr(tp: &TypedProgram, env: &Env, e: &ast::Expr) -> Expr {
    match &e.kind {
        ExprKind::Int(n) => Expr::Int(*n),
        ExprKind::Bool(b) => Expr::Bool(*b),
        ExprKind::Void => Expr::Null,
        ExprKind::Current => env.current.clone(),
        ExprKind::Result => env.result.clone(),
        ExprKind::ExcV => env.exc.clone(),
        ExprKind::Local(n) => env.vars.get(n).cloned().unwrap_or_else(|| ivl::var(n)),
        ExprKind::Attr { target, class, name } => {
            let sort = sort_of(e.ty.as_ref().expect("typed attribute"));
            let t = translate_expr(tp, env, target);
            ivl::unbox(sort, ivl::read(env.heap.clone(), t, &names::field(class, name)))
        }
        ExprKind::FnCall { target, class, routine, args } => {
            let decl = names::declaring_class(tp, class, routine);
            let mut a = vec![env.heap.clone(), translate_expr(tp, env, target)];
            a.extend(args.iter().map(|x| translate_expr(tp, env, x)));
            ivl::app(&names::function(&decl, routine), a)
        }
        ExprKind::Old(x) => translate_expr(tp, &env.with_heap(env.old_heap.clone()), x),
        ExprKind::Unary(UnOp::Not, x) => ivl::not(translate_expr(tp, env, x)),
        ExprKind::Unary(UnOp::Neg, x) => match translate_expr(tp, env, x) {
            Expr::Int(n) => Expr::Int(-n),
            t => Expr::Neg(Box::new(t)),
        },
        ExprKind::Binary(op, l, r) => {
            let op = match op {
                ast::BinOp::Add => BinOp::Add,
                ast::BinOp::Sub => BinOp::Sub,
                ast::BinOp::Mul => BinOp::Mul,
                ast::BinOp::Eq => BinOp::Eq,
                ast::BinOp::Ne => BinOp::Ne,
                ast::BinOp::Lt => BinOp::Lt,
                ast::BinOp::Le => BinOp::Le,
                ast::BinOp::Gt => BinOp::Gt,
                ast::BinOp::Ge => BinOp::Ge,
                ast::BinOp::And => BinOp::And,
                ast::BinOp::Or => BinOp::Or,
                ast::BinOp::Implies => BinOp::Implies,
            };
            bin(op, translate_expr(tp, env, l), translate_expr(tp, env, r))
        }
        ExprKind::Ident(_) | ExprKind::Member { .. } | ExprKind::Call { .. } => {
            panic!("unresolved expression reached the translator")
        }
    }
}

/// Conjunction of translated clauses.
pub fn translate_clauses(tp: &TypedProgram, env: &Env, clauses: &[&ast::Clause]) -> Expr {
    ivl::and_all(clauses.iter().map(|c| translate_expr(tp, env, &c.expr)))
}

/// Function calls occurring in `e`, innermost first.
pub fn fn_calls(e: &ast::Expr) -> Vec<&ast::Expr> {
    let mut out = Vec::new();
    collect_calls(e, &mut out);
    out
}

fn collect_calls<'a>(e: &'a ast::Expr, out: &mut Vec<&'a ast::Expr>) {
    match &e.kind {
        ExprKind::FnCall { target, args, .. } => {
            collect_calls(target, out);
            args.iter().for_each(|a| collect_calls(a, out));
            out.push(e);
        }
        ExprKind::Attr { target, .. } => collect_calls(target, out),
        ExprKind::Old(x) | ExprKind::Unary(_, x) => collect_calls(x, out),
        ExprKind::Binary(_, l, r) => {
            collect_calls(l, out);
            collect_calls(r, out);
        }
        _ => {}
    }
}

pub fn mentions_excv(e: &ast::Expr) -> bool {
    e.any(&mut |x| matches!(x.kind, ExprKind::ExcV))
}
