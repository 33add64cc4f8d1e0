//! Routine bodies, including exception plumbing and rescue/retry loops.

use crate::frontend::ast::{self, AssignTarget, ClassDecl, ExprKind, Routine, StmtKind};
use crate::ivl::{self, BinOp, Expr, Invariant, ObligationKind, Origin, Sort, Stmt};
use crate::span::Span;

use super::expr::{default_value, sort_of, translate_expr, Env};
use super::{names, Translator};

const EXC_LABEL: &str = "excL";
const END_LABEL: &str = "endL";
const RETRY: &str = "Retry";

/// `s` followed by a jump to `label` when `s` may set `ExcV` (a call or an
/// explicit raise).
pub fn exception_check(s: Stmt, label: &str) -> Vec<Stmt> {
    let raises = matches!(&s, Stmt::Call { .. }) || matches!(&s, Stmt::Assign(v, _) if v == ivl::EXCV);
    if raises {
        vec![s, Stmt::If { cond: ivl::var(ivl::EXCV), then: vec![Stmt::Goto(label.into())], els: vec![] }]
    } else {
        vec![s]
    }
}

/// Call of routine `routine` on `target`, whose static class is
/// `static_class`. Binds to the declaration applying in the static class;
/// non-Current targets must be non-void.
pub fn translate_call(
    t: &Translator,
    target: Expr,
    static_class: &str,
    routine: &str,
    args: Vec<Expr>,
    rets: Vec<String>,
    span: Span,
) -> Vec<Stmt> {
    let mut out = target_facts(&target, static_class, span);
    let decl = names::declaring_class(t.tp, static_class, routine);
    let mut all = vec![target];
    all.extend(args);
    out.push(Stmt::Call { proc: names::procedure(&decl, routine), args: all, rets, span });
    out
}

/// Non-void check and type facts for a call target other than Current.
fn target_facts(target: &Expr, static_class: &str, span: Span) -> Vec<Stmt> {
    if *target == ivl::var("Current") {
        return vec![];
    }
    vec![
        Stmt::Assert(
            ivl::bin(BinOp::Ne, target.clone(), Expr::Null),
            Origin::new(ObligationKind::CalleePrecondition, span, "target is attached"),
        ),
        Stmt::Assume(ivl::and_all([
            ivl::subtype(ivl::type_of(target.clone()), ivl::var(static_class)),
            ivl::allocated(ivl::var(ivl::HEAP), target.clone()),
        ])),
    ]
}

struct BodyCx<'t, 'a> {
    t: &'t Translator<'a>,
    routine: &'a Routine,
    env: Env,
    locals: Vec<(String, Sort)>,
    temps: usize,
    /// Frame condition, carried as an extra invariant by loops touching the heap.
    frame: Expr,
}

/// Implementation of `class.routine`. Without a rescue clause the body
/// jumps to its end on an exception. With a rescue clause `s2` and body
/// `s1` the shape is
///
/// ```text
///   s1 (exceptions jump to excL)
/// excL: while (ExcV) invariant I;
///   { ExcV := false; Retry := false; s2 (exceptions jump to endL);
///     if (!Retry) { ExcV := true; goto endL; }
///     s1 (exceptions jump to excL) }
/// endL:
/// ```
pub fn translate_body(t: &Translator, class: &ClassDecl, routine: &Routine, p: &ivl::Program) -> ivl::Implementation {
    let key = (class.name.clone(), routine.name.clone());
    let mut cx =
        BodyCx { t, routine, env: Env::procedure(), locals: Vec::new(), temps: 0, frame: t.frame_expr(&key, p) };
    let body = routine.body.as_ref().expect("effective routine");
    let mut out = Vec::new();
    for v in &routine.locals {
        let s = sort_of(&v.ty);
        cx.locals.push((v.name.clone(), s));
        out.push(Stmt::Assign(v.name.clone(), default_value(s)));
    }
    if let Some(rt) = &routine.result {
        out.push(Stmt::Assign("Result".into(), default_value(sort_of(rt))));
    }
    match &body.rescue {
        None => {
            let s1 = cx.stmts(&body.stmts, END_LABEL);
            if jumps_to(&s1, END_LABEL) {
                out.push(Stmt::Block { label: END_LABEL.into(), body: s1 });
            } else {
                out.extend(s1);
            }
        }
        Some(rescue) => {
            cx.locals.push((RETRY.into(), Sort::Bool));
            out.push(Stmt::Assign(RETRY.into(), Expr::Bool(false)));
            let invariants: Vec<(Expr, &ast::Clause)> =
                routine.contract.rescue_invariant.iter().map(|c| (translate_expr(t.tp, &cx.env, &c.expr), c)).collect();
            let mut loop_body =
                vec![Stmt::Assign(ivl::EXCV.into(), Expr::Bool(false)), Stmt::Assign(RETRY.into(), Expr::Bool(false))];
            loop_body.extend(cx.stmts(rescue, END_LABEL));
            let give_up = vec![Stmt::Assign(ivl::EXCV.into(), Expr::Bool(true)), Stmt::Goto(END_LABEL.into())];
            loop_body.push(Stmt::If { cond: ivl::not(ivl::var(RETRY)), then: give_up, els: vec![] });
            loop_body.extend(cx.stmts(&body.stmts, EXC_LABEL));
            let mut loop_invs: Vec<Invariant> = invariants
                .iter()
                .map(|(e, c)| Invariant {
                    expr: e.clone(),
                    origin: Origin::new(ObligationKind::LoopInvariantEntry, c.expr.span, "rescue invariant"),
                })
                .collect();
            loop_invs.push(cx.frame_invariant(routine.span));
            let first = cx.stmts(&body.stmts, EXC_LABEL);
            out.push(Stmt::Block {
                label: END_LABEL.into(),
                body: vec![
                    Stmt::Block { label: EXC_LABEL.into(), body: first },
                    Stmt::While {
                        label: Some(EXC_LABEL.into()),
                        cond: ivl::var(ivl::EXCV),
                        invariants: loop_invs,
                        body: loop_body,
                    },
                ],
            });
        }
    }
    ivl::Implementation { name: names::procedure(&class.name, &routine.name), locals: cx.locals, body: out }
}

fn jumps_to(stmts: &[Stmt], label: &str) -> bool {
    let mut found = false;
    ivl::walk_stmts(stmts, &mut |s| found |= matches!(s, Stmt::Goto(l) if l == label));
    found
}

impl BodyCx<'_, '_> {
    fn expr(&self, e: &ast::Expr) -> Expr {
        translate_expr(self.t.tp, &self.env, e)
    }

    fn temp(&mut self, sort: Sort) -> String {
        let name = format!("$tmp{}", self.temps);
        self.temps += 1;
        self.locals.push((name.clone(), sort));
        name
    }

    fn frame_invariant(&self, span: Span) -> Invariant {
        Invariant { expr: self.frame.clone(), origin: Origin::new(ObligationKind::Frame, span, "loop frame") }
    }

    /// Assertions that every function call in `e` is applied to an attached
    /// target within its precondition. Operands of `and`, `or` and
    /// `implies` are checked only where they are evaluated.
    fn wd(&self, e: &ast::Expr) -> Vec<Stmt> {
        let mut out = Vec::new();
        self.wd_under(e, &Expr::Bool(true), &mut out);
        out
    }

    fn wd_under(&self, e: &ast::Expr, guard: &Expr, out: &mut Vec<Stmt>) {
        match &e.kind {
            ExprKind::Binary(op @ (ast::BinOp::And | ast::BinOp::Or | ast::BinOp::Implies), l, r) => {
                self.wd_under(l, guard, out);
                let lt = self.expr(l);
                let g = match op {
                    ast::BinOp::Or => ivl::not(lt),
                    _ => lt,
                };
                self.wd_under(r, &ivl::and_all([guard.clone(), g]), out);
            }
            ExprKind::Binary(_, l, r) => {
                self.wd_under(l, guard, out);
                self.wd_under(r, guard, out);
            }
            ExprKind::Unary(_, x) | ExprKind::Old(x) => self.wd_under(x, guard, out),
            ExprKind::Attr { target, .. } => self.wd_under(target, guard, out),
            ExprKind::FnCall { target, class, routine, args } => {
                self.wd_under(target, guard, out);
                args.iter().for_each(|a| self.wd_under(a, guard, out));
                let tgt = self.expr(target);
                let decl = names::declaring_class(self.t.tp, class, routine);
                let mut conds = Vec::new();
                if tgt != ivl::var("Current") {
                    conds.push((ivl::bin(BinOp::Ne, tgt.clone(), Expr::Null), "target is attached"));
                }
                let pre = if self.t.opts.static_only {
                    let (_, own) = self.t.tp.routine(class, routine).expect("routine");
                    let mut env = Env { current: tgt.clone(), ..self.env.clone() };
                    for (f, a) in own.formals.iter().zip(args) {
                        env.vars.insert(f.name.clone(), self.expr(a));
                    }
                    self.t.pre_cumulative(class, routine, &env)
                } else {
                    let mut a = vec![ivl::var(ivl::HEAP), tgt.clone()];
                    a.extend(args.iter().map(|x| self.expr(x)));
                    ivl::app(&names::pre(&decl, routine), a)
                };
                conds.push((pre, "precondition of function call"));
                for (c, note) in conds {
                    out.push(Stmt::Assert(
                        ivl::implies(guard.clone(), c),
                        Origin::new(ObligationKind::CalleePrecondition, e.span, note),
                    ));
                }
                if tgt != ivl::var("Current") {
                    out.push(Stmt::Assume(ivl::implies(
                        guard.clone(),
                        ivl::subtype(ivl::type_of(tgt), ivl::var(class)),
                    )));
                }
            }
            _ => {}
        }
    }

    fn stmts(&mut self, stmts: &[ast::Stmt], label: &str) -> Vec<Stmt> {
        stmts.iter().flat_map(|s| self.stmt(s, label)).collect()
    }

    fn assign(&self, target: &AssignTarget, value: Expr, sort: Sort) -> Stmt {
        match target {
            AssignTarget::Local(n) | AssignTarget::Name(n) => Stmt::Assign(n.clone(), value),
            AssignTarget::Result => Stmt::Assign("Result".into(), value),
            AssignTarget::Attr { class, name } => {
                Stmt::heap_write(ivl::var("Current"), &names::field(class, name), ivl::boxed(sort, value))
            }
        }
    }

    fn target_sort(&self, target: &AssignTarget) -> Sort {
        let tp = self.t.tp;
        match target {
            AssignTarget::Local(n) | AssignTarget::Name(n) => self
                .routine
                .locals
                .iter()
                .chain(&self.routine.formals)
                .find(|v| &v.name == n)
                .map(|v| sort_of(&v.ty))
                .expect("declared local"),
            AssignTarget::Result => sort_of(self.routine.result.as_ref().expect("function")),
            AssignTarget::Attr { class, name } => sort_of(&tp.attribute(class, name).expect("declared attribute").1.ty),
        }
    }

    fn stmt(&mut self, s: &ast::Stmt, label: &str) -> Vec<Stmt> {
        let tp = self.t.tp;
        let mut out = Vec::new();
        match &s.kind {
            StmtKind::Assign { target, value } => {
                out.extend(self.wd(value));
                let sort = self.target_sort(target);
                out.push(self.assign(target, self.expr(value), sort));
            }
            StmtKind::Create { target, class, creator, args } => {
                args.iter().for_each(|a| out.extend(self.wd(a)));
                let obj = match target {
                    AssignTarget::Local(n) | AssignTarget::Name(n) => n.clone(),
                    _ => self.temp(Sort::Ref),
                };
                let o = ivl::var(&obj);
                let heap = ivl::var(ivl::HEAP);
                out.push(Stmt::Havoc(vec![obj.clone()]));
                out.push(Stmt::Assume(ivl::bin(BinOp::Ne, o.clone(), Expr::Null)));
                out.push(Stmt::Assume(ivl::not(ivl::allocated(heap.clone(), o.clone()))));
                out.push(Stmt::heap_write(o.clone(), ivl::ALLOCATED, ivl::boxed(Sort::Bool, Expr::Bool(true))));
                out.push(Stmt::Assume(ivl::eq(ivl::type_of(o.clone()), ivl::var(class))));
                let defaults = tp.all_attributes(class).into_iter().map(|(d, a)| {
                    let sort = sort_of(&a.ty);
                    ivl::eq(
                        ivl::unbox(sort, ivl::read(heap.clone(), o.clone(), &names::field(&d.name, &a.name))),
                        default_value(sort),
                    )
                });
                let defaults = ivl::and_all(defaults);
                if defaults != Expr::Bool(true) {
                    out.push(Stmt::Assume(defaults));
                }
                match creator {
                    Some(m) => {
                        let args = args.iter().map(|a| self.expr(a)).collect();
                        let decl = names::declaring_class(tp, class, m);
                        let call = Stmt::Call {
                            proc: names::procedure(&decl, m),
                            args: [vec![o.clone()], args].concat(),
                            rets: vec![],
                            span: s.span,
                        };
                        out.extend(exception_check(call, label));
                    }
                    None => {
                        for (e, c) in self.t.invariant_clauses(class, heap.clone(), o.clone()) {
                            out.push(Stmt::Assert(
                                e,
                                Origin::new(
                                    ObligationKind::ClassInvariantExit,
                                    c.expr.span,
                                    "class invariant of default object",
                                ),
                            ));
                        }
                    }
                }
                if !matches!(target, AssignTarget::Local(_) | AssignTarget::Name(_)) {
                    out.push(self.assign(target, o, Sort::Ref));
                }
            }
            StmtKind::Call { target, class, routine, args } => {
                let target = target.as_ref().expect("resolved call target");
                let class = class.as_ref().expect("resolved call class");
                out.extend(self.wd(target));
                args.iter().for_each(|a| out.extend(self.wd(a)));
                let tgt = self.expr(target);
                let args = args.iter().map(|a| self.expr(a)).collect();
                let mut call = translate_call(self.t, tgt, class, routine, args, vec![], s.span);
                let last = call.pop().expect("call statement");
                out.extend(call);
                out.extend(exception_check(last, label));
            }
            StmtKind::If { branches, otherwise } => {
                let mut els = self.stmts(otherwise, label);
                for (cond, body) in branches.iter().rev() {
                    let then = self.stmts(body, label);
                    let mut branch = self.wd(cond);
                    branch.push(Stmt::If { cond: self.expr(cond), then, els });
                    els = branch;
                }
                out.extend(els);
            }
            StmtKind::Loop { init, invariant, until, body } => {
                out.extend(self.stmts(init, label));
                let mut invs: Vec<Invariant> = invariant
                    .iter()
                    .map(|c| Invariant {
                        expr: self.expr(&c.expr),
                        origin: Origin::new(ObligationKind::LoopInvariantEntry, c.expr.span, "loop invariant"),
                    })
                    .collect();
                let mut inner = self.stmts(body, label);
                if touches_heap(body) {
                    invs.push(self.frame_invariant(s.span));
                }
                if may_set_exc(&inner) {
                    invs.push(Invariant {
                        expr: ivl::not(ivl::var(ivl::EXCV)),
                        origin: Origin::new(ObligationKind::LoopInvariantEntry, s.span, "no pending exception"),
                    });
                }
                let until_wd = self.wd(until);
                out.extend(until_wd.iter().cloned());
                inner.extend(until_wd);
                out.push(Stmt::While { label: None, cond: ivl::not(self.expr(until)), invariants: invs, body: inner });
            }
            StmtKind::Check(clauses) => {
                for c in clauses {
                    out.extend(self.wd(&c.expr));
                    out.push(Stmt::Assert(
                        self.expr(&c.expr),
                        Origin::new(ObligationKind::Assert, c.expr.span, "check"),
                    ));
                }
            }
            StmtKind::Retry(e) => {
                out.extend(self.wd(e));
                out.push(Stmt::Assign(RETRY.into(), self.expr(e)));
            }
            StmtKind::Raise => out.extend(exception_check(Stmt::Assign(ivl::EXCV.into(), Expr::Bool(true)), label)),
        }
        out
    }
}

fn may_set_exc(stmts: &[Stmt]) -> bool {
    let mut found = false;
    ivl::walk_stmts(stmts, &mut |s| {
        found |= matches!(s, Stmt::Call { .. }) || matches!(s, Stmt::Assign(v, _) if v == ivl::EXCV)
    });
    found
}

/// Whether executing `stmts` may change the heap.
fn touches_heap(stmts: &[ast::Stmt]) -> bool {
    stmts.iter().any(|s| match &s.kind {
        StmtKind::Assign { target: AssignTarget::Attr { .. }, .. }
        | StmtKind::Create { .. }
        | StmtKind::Call { .. } => true,
        StmtKind::If { branches, otherwise } => {
            branches.iter().any(|(_, b)| touches_heap(b)) || touches_heap(otherwise)
        }
        StmtKind::Loop { init, body, .. } => touches_heap(init) || touches_heap(body),
        _ => false,
    })
}
