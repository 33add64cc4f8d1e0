//! Well-formedness: scoping, sorting, label discipline and frame
//! (`modifies`) discipline of IVL programs.

use std::collections::{BTreeMap, BTreeSet};

use super::*;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{context}: {message}")]
pub struct WellFormednessError {
    /// Declaration in which the problem occurs.
    pub context: String,
    pub message: String,
}

/// Checks the whole program; returns every violation found.
pub fn well_formed(p: &Program) -> Result<(), Vec<WellFormednessError>> {
    let mut c = Checker::new(p);
    c.program();
    if c.errors.is_empty() {
        Ok(())
    } else {
        Err(c.errors)
    }
}

struct Checker<'a> {
    p: &'a Program,
    consts: BTreeMap<String, Sort>,
    globals: BTreeMap<String, Sort>,
    errors: Vec<WellFormednessError>,
    context: String,
}

#[derive(Clone, Default)]
struct Scope {
    vars: BTreeMap<String, Sort>,
    /// Names that may not be assigned.
    readonly: BTreeSet<String>,
    old_allowed: bool,
}

impl<'a> Checker<'a> {
    fn new(p: &'a Program) -> Checker<'a> {
        let mut consts = BTreeMap::new();
        for t in &p.types {
            consts.insert(t.name.clone(), Sort::TypeName);
        }
        for (f, _) in p.all_fields() {
            consts.insert(f, Sort::Field);
        }
        let globals = p.globals.iter().cloned().collect();
        Checker { p, consts, globals, errors: Vec::new(), context: String::new() }
    }

    fn err(&mut self, message: impl Into<String>) {
        self.errors.push(WellFormednessError { context: self.context.clone(), message: message.into() });
    }

    fn program(&mut self) {
        let mut seen = BTreeSet::new();
        for name in self
            .p
            .types
            .iter()
            .map(|t| &t.name)
            .chain(self.p.fields.iter().map(|f| &f.0))
            .chain(self.p.globals.iter().map(|g| &g.0))
            .chain(self.p.functions.iter().map(|f| &f.name))
            .chain(self.p.procedures.iter().map(|f| &f.name))
        {
            if !seen.insert(name.clone()) {
                self.context = "program".into();
                self.err(format!("duplicate declaration of {name}"));
            }
        }
        for t in &self.p.types {
            if let Some(parent) = &t.parent {
                if !self.p.types.iter().any(|d| &d.name == parent) {
                    self.context = t.name.clone();
                    self.err(format!("unknown parent type {parent}"));
                }
            }
        }
        for (i, a) in self.p.axioms.iter().enumerate() {
            self.context = format!("axiom #{i}");
            self.expect(&a.expr, Sort::Bool, &Scope::default());
        }
        for proc in &self.p.procedures {
            self.procedure(proc);
        }
        for imp in &self.p.implementations {
            match self.p.procedure(&imp.name) {
                Some(proc) => self.implementation(proc, imp),
                None => {
                    self.context = imp.name.clone();
                    self.err("implementation without procedure");
                }
            }
        }
    }

    fn procedure(&mut self, proc: &Procedure) {
        self.context = format!("procedure {}", proc.name);
        let mut scope = Scope::default();
        for (n, s) in &proc.params {
            scope.vars.insert(n.clone(), *s);
        }
        for r in &proc.requires {
            self.expect(&r.expr, Sort::Bool, &scope);
        }
        for m in &proc.modifies {
            if !self.globals.contains_key(m) {
                self.err(format!("modifies non-global {m}"));
            }
        }
        for (n, s) in &proc.returns {
            scope.vars.insert(n.clone(), *s);
        }
        scope.old_allowed = true;
        for e in &proc.ensures {
            self.expect(&e.expr, Sort::Bool, &scope);
        }
    }

    fn implementation(&mut self, proc: &Procedure, imp: &Implementation) {
        self.context = format!("implementation {}", proc.name);
        let mut scope = Scope { old_allowed: true, ..Scope::default() };
        for (n, s) in &proc.params {
            scope.vars.insert(n.clone(), *s);
            scope.readonly.insert(n.clone());
        }
        for (n, s) in proc.returns.iter().chain(&imp.locals) {
            if scope.vars.insert(n.clone(), *s).is_some() {
                self.err(format!("duplicate variable {n}"));
            }
        }
        let mut labels = Vec::new();
        self.collect_labels(&imp.body, &mut labels);
        let mut enclosing = Vec::new();
        self.stmts(&imp.body, &scope, proc, &mut enclosing);
    }

    /// Labels must be unique, except that a block may share its label with
    /// a loop that immediately follows it.
    fn collect_labels(&mut self, stmts: &[Stmt], seen: &mut Vec<String>) {
        for (i, s) in stmts.iter().enumerate() {
            match s {
                Stmt::Block { label, body } => {
                    if seen.contains(label) {
                        self.err(format!("duplicate label {label}"));
                    }
                    seen.push(label.clone());
                    self.collect_labels(body, seen);
                }
                Stmt::While { label, body, .. } => {
                    if let Some(l) = label {
                        let merged = i > 0 && matches!(&stmts[i - 1], Stmt::Block { label: b, .. } if b == l);
                        if !merged && seen.contains(l) {
                            self.err(format!("duplicate label {l}"));
                        }
                        if !merged {
                            seen.push(l.clone());
                        }
                    }
                    self.collect_labels(body, seen);
                }
                Stmt::If { then, els, .. } => {
                    self.collect_labels(then, seen);
                    self.collect_labels(els, seen);
                }
                _ => {}
            }
        }
    }

    fn stmts(&mut self, stmts: &[Stmt], scope: &Scope, proc: &Procedure, enclosing: &mut Vec<String>) {
        for s in stmts {
            self.stmt(s, scope, proc, enclosing);
        }
    }

    fn assignable(&mut self, v: &str, scope: &Scope, proc: &Procedure) -> Option<Sort> {
        if let Some(s) = scope.vars.get(v) {
            if scope.readonly.contains(v) {
                self.err(format!("assignment to in-parameter {v}"));
            }
            return Some(*s);
        }
        if let Some(s) = self.globals.get(v).copied() {
            if !proc.modifies.iter().any(|m| m == v) {
                self.err(format!("global {v} assigned but not in modifies clause"));
            }
            return Some(s);
        }
        self.err(format!("assignment to undeclared {v}"));
        None
    }

    fn stmt(&mut self, s: &Stmt, scope: &Scope, proc: &Procedure, enclosing: &mut Vec<String>) {
        match s {
            Stmt::Assign(v, e) => {
                if let Some(sort) = self.assignable(v, scope, proc) {
                    self.expect(e, sort, scope);
                }
            }
            Stmt::Havoc(vs) => {
                for v in vs {
                    self.assignable(v, scope, proc);
                }
            }
            Stmt::Assume(e) | Stmt::Assert(e, _) => self.expect(e, Sort::Bool, scope),
            Stmt::Call { proc: callee, args, rets, .. } => {
                let Some(target) = self.p.procedure(callee) else {
                    self.err(format!("call to undeclared procedure {callee}"));
                    return;
                };
                if target.params.len() != args.len() || target.returns.len() != rets.len() {
                    self.err(format!("arity mismatch in call to {callee}"));
                    return;
                }
                for (a, (_, s)) in args.iter().zip(&target.params) {
                    self.expect(a, *s, scope);
                }
                for (r, (_, s)) in rets.iter().zip(&target.returns) {
                    if let Some(rs) = self.assignable(r, scope, proc) {
                        if rs != *s {
                            self.err(format!("call result {r} has sort {rs}, expected {s}"));
                        }
                    }
                }
                for m in &target.modifies {
                    if !proc.modifies.contains(m) {
                        self.err(format!("callee {callee} modifies {m}, which the caller does not"));
                    }
                }
            }
            Stmt::If { cond, then, els } => {
                self.expect(cond, Sort::Bool, scope);
                self.stmts(then, scope, proc, enclosing);
                self.stmts(els, scope, proc, enclosing);
            }
            Stmt::While { label, cond, invariants, body } => {
                self.expect(cond, Sort::Bool, scope);
                for inv in invariants {
                    self.expect(&inv.expr, Sort::Bool, scope);
                }
                enclosing.extend(label.clone());
                self.stmts(body, scope, proc, enclosing);
                if label.is_some() {
                    enclosing.pop();
                }
            }
            Stmt::Block { label, body } => {
                enclosing.push(label.clone());
                self.stmts(body, scope, proc, enclosing);
                enclosing.pop();
            }
            Stmt::Goto(l) => {
                if !enclosing.contains(l) {
                    self.err(format!("goto {l} does not target an enclosing block or loop"));
                }
            }
        }
    }

    fn expect(&mut self, e: &Expr, want: Sort, scope: &Scope) {
        match self.sort(e, scope) {
            Ok(s) if s == want => {}
            Ok(s) => self.err(format!("expected {want}, found {s} in {}", print::expr(e))),
            Err(m) => self.err(m),
        }
    }

    fn sort(&self, e: &Expr, scope: &Scope) -> Result<Sort, String> {
        let want = |e: &Expr, s: Sort| -> Result<(), String> {
            let got = self.sort(e, scope)?;
            if got == s {
                Ok(())
            } else {
                Err(format!("expected {s}, found {got} in {}", print::expr(e)))
            }
        };
        Ok(match e {
            Expr::Bool(_) => Sort::Bool,
            Expr::Int(_) => Sort::Int,
            Expr::Null => Sort::Ref,
            Expr::Var(v) => *scope
                .vars
                .get(v)
                .or_else(|| self.globals.get(v))
                .or_else(|| self.consts.get(v))
                .ok_or_else(|| format!("undeclared identifier {v}"))?,
            Expr::Old(x) => {
                if !scope.old_allowed {
                    return Err("old is not allowed here".into());
                }
                self.sort(x, scope)?
            }
            Expr::Read(h, o, f) => {
                want(h, Sort::Heap)?;
                want(o, Sort::Ref)?;
                want(f, Sort::Field)?;
                Sort::Value
            }
            Expr::Store(h, o, f, v) => {
                want(h, Sort::Heap)?;
                want(o, Sort::Ref)?;
                want(f, Sort::Field)?;
                want(v, Sort::Value)?;
                Sort::Heap
            }
            Expr::Box(s, x) => {
                want(x, *s)?;
                Sort::Value
            }
            Expr::Unbox(s, x) => {
                want(x, Sort::Value)?;
                *s
            }
            Expr::App(f, args) => {
                if f == TYPE_FN {
                    if args.len() != 1 {
                        return Err("$type takes one argument".into());
                    }
                    want(&args[0], Sort::Ref)?;
                    return Ok(Sort::TypeName);
                }
                let func = self.p.function(f).ok_or_else(|| format!("undeclared function {f}"))?;
                if func.params.len() != args.len() {
                    return Err(format!("arity mismatch in application of {f}"));
                }
                for (a, (_, s)) in args.iter().zip(&func.params) {
                    want(a, *s)?;
                }
                func.result
            }
            Expr::Not(x) => {
                want(x, Sort::Bool)?;
                Sort::Bool
            }
            Expr::Neg(x) => {
                want(x, Sort::Int)?;
                Sort::Int
            }
            Expr::Bin(op, l, r) => match op {
                BinOp::Add | BinOp::Sub | BinOp::Mul => {
                    want(l, Sort::Int)?;
                    want(r, Sort::Int)?;
                    Sort::Int
                }
                BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
                    want(l, Sort::Int)?;
                    want(r, Sort::Int)?;
                    Sort::Bool
                }
                BinOp::And | BinOp::Or | BinOp::Implies | BinOp::Iff => {
                    want(l, Sort::Bool)?;
                    want(r, Sort::Bool)?;
                    Sort::Bool
                }
                BinOp::Eq | BinOp::Ne => {
                    let s = self.sort(l, scope)?;
                    want(r, s)?;
                    Sort::Bool
                }
            },
            Expr::Subtype(a, b) => {
                want(a, Sort::TypeName)?;
                want(b, Sort::TypeName)?;
                Sort::Bool
            }
            Expr::Forall(vs, body) => {
                let mut inner = scope.clone();
                for (n, s) in vs {
                    inner.vars.insert(n.clone(), *s);
                }
                let s = self.sort(body, &inner)?;
                if s != Sort::Bool {
                    return Err("quantifier body is not boolean".into());
                }
                Sort::Bool
            }
        })
    }
}
