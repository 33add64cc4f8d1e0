//! Reduction of an implementation to loop-free, call-free code.
//!
//! Calls become assert-precondition / havoc / assume-postcondition; loops
//! are cut at their heads (assert invariant, havoc targets, assume
//! invariant); `old` refers to snapshot variables taken at entry.

use std::collections::BTreeMap;

use crate::ivl::{
    self, structure::JumpTarget, Expr, Invariant, ObligationKind, Origin, Procedure, Program, Sort, Stmt,
};

/// Loop- and call-free statements. Asserts refer to an obligation by index;
/// several assert sites may share one obligation.
#[derive(Clone, Debug, PartialEq)]
pub enum Basic {
    Assign(String, Expr),
    Havoc(Vec<String>),
    Assume(Expr),
    Assert(Expr, usize),
    If(Expr, Vec<Basic>, Vec<Basic>),
    /// Labeled block; `Goto` leaves it.
    Block(String, Vec<Basic>),
    Goto(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ObligationInfo {
    pub kind: ObligationKind,
    pub origin: Origin,
}

/// A desugared implementation.
#[derive(Clone, Debug)]
pub struct Desugared {
    pub procedure: String,
    pub vars: BTreeMap<String, Sort>,
    pub body: Vec<Basic>,
    pub obligations: Vec<ObligationInfo>,
}

pub const OLD_PREFIX: &str = "old$";

pub fn desugar(p: &Program, proc: &Procedure, imp: &ivl::Implementation) -> Desugared {
    let mut d = Cx { p, vars: BTreeMap::new(), obligations: Vec::new(), calls: 0 };
    for (n, s) in p.globals.iter().chain(&proc.params).chain(&proc.returns).chain(&imp.locals) {
        d.vars.insert(n.clone(), *s);
    }
    let mut body = Vec::new();
    for (g, s) in &p.globals {
        let snap = format!("{OLD_PREFIX}{g}");
        d.vars.insert(snap.clone(), *s);
        body.push(Basic::Assume(ivl::eq(ivl::var(&snap), ivl::var(g))));
    }
    for r in &proc.requires {
        body.push(Basic::Assume(r.expr.clone()));
    }
    let mut enclosing = Vec::new();
    let inner = d.stmts(&imp.body, &mut enclosing);
    body.push(Basic::Block("$exit".into(), inner));
    for e in proc.ensures.iter().filter(|e| !e.free) {
        let ob = d.obligation(e.origin.kind, e.origin.clone());
        body.push(Basic::Assert(d.entry_old(&e.expr), ob));
    }
    Desugared { procedure: proc.name.clone(), vars: d.vars, body, obligations: d.obligations }
}

/// Label, jump target and pending loop invariants of an enclosing block.
type Enclosing = (String, JumpTarget, Vec<(Expr, usize)>);

struct Cx<'a> {
    p: &'a Program,
    vars: BTreeMap<String, Sort>,
    obligations: Vec<ObligationInfo>,
    calls: usize,
}

/// Replaces `old(e)` by `e` with variables renamed through `map`.
pub fn elim_old(e: &Expr, map: &dyn Fn(&str) -> Option<Expr>) -> Expr {
    match e {
        Expr::Old(x) => elim_old(x, &|_| None).subst(map),
        Expr::Forall(vs, body) => Expr::Forall(vs.clone(), Box::new(elim_old(body, map))),
        _ => {
            let mut kids = e.children().into_iter().map(|c| elim_old(c, map));
            ivl::rebuild(e, &mut kids)
        }
    }
}

impl Cx<'_> {
    fn obligation(&mut self, kind: ObligationKind, origin: Origin) -> usize {
        self.obligations.push(ObligationInfo { kind, origin });
        self.obligations.len() - 1
    }

    fn fresh(&mut self, base: &str, sort: Sort) -> String {
        let name = format!("{base}${}", self.vars.len());
        self.vars.insert(name.clone(), sort);
        name
    }

    /// `old` in the implementation's own context refers to entry values.
    fn entry_old(&self, e: &Expr) -> Expr {
        let globals: Vec<&str> = self.p.globals.iter().map(|(g, _)| g.as_str()).collect();
        elim_old(e, &|v| globals.contains(&v).then(|| ivl::var(&format!("{OLD_PREFIX}{v}"))))
    }

    fn stmts(&mut self, stmts: &[Stmt], enclosing: &mut Vec<Enclosing>) -> Vec<Basic> {
        let mut out = Vec::new();
        for s in stmts {
            self.stmt(s, enclosing, &mut out);
        }
        out
    }

    fn stmt(&mut self, s: &Stmt, enclosing: &mut Vec<Enclosing>, out: &mut Vec<Basic>) {
        match s {
            Stmt::Assign(v, e) => out.push(Basic::Assign(v.clone(), self.entry_old(e))),
            Stmt::Havoc(vs) => out.push(Basic::Havoc(vs.clone())),
            Stmt::Assume(e) => out.push(Basic::Assume(self.entry_old(e))),
            Stmt::Assert(e, origin) => {
                let ob = self.obligation(origin.kind, origin.clone());
                out.push(Basic::Assert(self.entry_old(e), ob));
            }
            Stmt::Call { proc, args, rets, span } => self.call(proc, args, rets, *span, out),
            Stmt::If { cond, then, els } => {
                let t = self.stmts(then, enclosing);
                let e = self.stmts(els, enclosing);
                out.push(Basic::If(self.entry_old(cond), t, e));
            }
            Stmt::Block { label, body } => {
                enclosing.push((label.clone(), JumpTarget::Exit, vec![]));
                let b = self.stmts(body, enclosing);
                enclosing.pop();
                out.push(Basic::Block(label.clone(), b));
            }
            Stmt::Goto(l) => {
                let target = enclosing.iter().rev().find(|(n, _, _)| n == l).cloned();
                match target {
                    Some((_, JumpTarget::Continue, invs)) => {
                        for (e, ob) in invs {
                            out.push(Basic::Assert(e, ob));
                        }
                        out.push(Basic::Assume(Expr::Bool(false)));
                    }
                    _ => out.push(Basic::Goto(l.clone())),
                }
            }
            Stmt::While { label, cond, invariants, body } => self.loop_(label, cond, invariants, body, enclosing, out),
        }
    }

    fn loop_(
        &mut self,
        label: &Option<String>,
        cond: &Expr,
        invariants: &[Invariant],
        body: &[Stmt],
        enclosing: &mut Vec<Enclosing>,
        out: &mut Vec<Basic>,
    ) {
        let invs: Vec<(Expr, Origin)> =
            invariants.iter().map(|i| (self.entry_old(&i.expr), i.origin.clone())).collect();
        // frame invariants keep their kind on entry and on the back edge
        let kind = |o: &Origin, k| if o.kind == ObligationKind::Frame { ObligationKind::Frame } else { k };
        for (e, o) in &invs {
            let ob = self.obligation(kind(o, ObligationKind::LoopInvariantEntry), o.clone());
            out.push(Basic::Assert(e.clone(), ob));
        }
        let mut targets = ivl::assigned_vars(body, self.p);
        targets.retain(|v| self.vars.contains_key(v));
        if !targets.is_empty() {
            out.push(Basic::Havoc(targets));
        }
        for (e, _) in &invs {
            out.push(Basic::Assume(e.clone()));
        }
        let inductive: Vec<(Expr, usize)> = invs
            .iter()
            .map(|(e, o)| (e.clone(), self.obligation(kind(o, ObligationKind::LoopInvariantInductive), o.clone())))
            .collect();
        let depth = enclosing.len();
        if let Some(l) = label {
            enclosing.push((l.clone(), JumpTarget::Continue, inductive.clone()));
        }
        let mut then = self.stmts(body, enclosing);
        enclosing.truncate(depth);
        for (e, ob) in &inductive {
            then.push(Basic::Assert(e.clone(), *ob));
        }
        then.push(Basic::Assume(Expr::Bool(false)));
        let c = self.entry_old(cond);
        out.push(Basic::If(c, then, vec![]));
    }

    fn call(&mut self, name: &str, args: &[Expr], rets: &[String], span: crate::span::Span, out: &mut Vec<Basic>) {
        let callee = self.p.procedure(name).expect("declared procedure").clone();
        self.calls += 1;
        let k = self.calls;
        let mut actuals: BTreeMap<String, Expr> = BTreeMap::new();
        for ((formal, sort), a) in callee.params.iter().zip(args) {
            let tmp = self.fresh(&format!("call{k}.{formal}"), *sort);
            out.push(Basic::Assign(tmp.clone(), self.entry_old(a)));
            actuals.insert(formal.clone(), ivl::var(&tmp));
        }
        for r in callee.requires.iter().filter(|r| !r.free) {
            let note = format!("precondition of {name}: {}", r.origin.note);
            let ob = self.obligation(
                ObligationKind::CalleePrecondition,
                Origin::new(ObligationKind::CalleePrecondition, span, note),
            );
            out.push(Basic::Assert(r.expr.subst(&|v| actuals.get(v).cloned()), ob));
        }
        let mut snapshots: BTreeMap<String, Expr> = BTreeMap::new();
        for g in &callee.modifies {
            let sort = self.vars[g];
            let tmp = self.fresh(&format!("call{k}.old.{g}"), sort);
            out.push(Basic::Assign(tmp.clone(), ivl::var(g)));
            snapshots.insert(g.clone(), ivl::var(&tmp));
        }
        let mut havoc: Vec<String> = callee.modifies.clone();
        havoc.extend(rets.iter().cloned());
        out.push(Basic::Havoc(havoc));
        for ((ret, _), actual) in callee.returns.iter().zip(rets) {
            actuals.insert(ret.clone(), ivl::var(actual));
        }
        for e in &callee.ensures {
            let post = elim_old(&e.expr, &|v| snapshots.get(v).cloned().or_else(|| actuals.get(v).cloned()));
            out.push(Basic::Assume(post.subst(&|v| actuals.get(v).cloned())));
        }
    }
}
