//! Name resolution and type checking.
//!
//! All violations are collected; the result is either a fully resolved
//! [`TypedProgram`] or the complete error list sorted by source position.

use std::collections::{BTreeMap, BTreeSet};

use crate::span::Span;

use super::ast::*;
use super::classes::TypedProgram;
use super::{TypeError, STRING_CLASS};

pub fn typecheck(program: Program) -> Result<TypedProgram, Vec<TypeError>> {
    let mut errors = Vec::new();
    check_hierarchy(&program, &mut errors);
    if !errors.is_empty() {
        return Err(sorted(errors));
    }
    let view = TypedProgram::new(program.clone());
    let mut out = TypedProgram::new(program);
    let mut checker = Checker { view: &view, errors: Vec::new() };
    for class in out.program_mut().classes.iter_mut() {
        checker.class(class);
    }
    if let Some(root) = &view.program.root {
        match view.routine(&root.class, &root.routine) {
            Some(_) => {}
            None => checker.err(root.span, format!("root routine `{}.{}` does not exist", root.class, root.routine)),
        }
    }
    if checker.errors.is_empty() {
        Ok(out)
    } else {
        Err(sorted(checker.errors))
    }
}

fn sorted(mut errors: Vec<TypeError>) -> Vec<TypeError> {
    errors.sort_by(|a, b| a.span.key().cmp(&b.span.key()).then_with(|| a.message.cmp(&b.message)));
    errors.dedup();
    errors
}

fn check_hierarchy(p: &Program, errors: &mut Vec<TypeError>) {
    let mut seen: BTreeMap<&str, &ClassDecl> = BTreeMap::new();
    for c in &p.classes {
        if c.name == STRING_CLASS || matches!(c.name.as_str(), "INTEGER" | "BOOLEAN") {
            errors.push(TypeError::new(c.span, format!("`{}` is a built-in type and cannot be redeclared", c.name)));
        } else if seen.insert(&c.name, c).is_some() {
            errors.push(TypeError::new(c.span, format!("duplicate class `{}`", c.name)));
        }
    }
    for c in &p.classes {
        if let Some(parent) = &c.parent {
            if !seen.contains_key(parent.as_str()) {
                errors.push(TypeError::new(c.span, format!("class `{}` inherits unknown class `{parent}`", c.name)));
            }
        }
    }
    for c in &p.classes {
        let mut visited = BTreeSet::new();
        let mut cur = Some(c);
        while let Some(k) = cur {
            if !visited.insert(k.name.as_str()) {
                errors.push(TypeError::new(c.span, format!("inheritance cycle through class `{}`", c.name)));
                break;
            }
            cur = k.parent.as_deref().and_then(|n| seen.get(n).copied());
        }
    }
}

/// Where an expression occurs; governs `old`, `ExcV` and `Result`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Ctx {
    Require,
    Ensure,
    RescueInvariant,
    ClassInvariant,
    Body,
}

struct Scope<'r> {
    class: String,
    routine: Option<&'r Routine>,
    vars: BTreeMap<String, Type>,
    ctx: Ctx,
}

struct Checker<'v> {
    view: &'v TypedProgram,
    errors: Vec<TypeError>,
}

impl<'v> Checker<'v> {
    fn err(&mut self, span: Span, msg: impl Into<String>) {
        self.errors.push(TypeError::new(span, msg));
    }

    fn check_type_exists(&mut self, ty: &Type, span: Span) {
        if let Type::Class(n) = ty {
            if !self.view.is_class(n) {
                self.err(span, format!("unknown type `{n}`"));
            }
        }
    }

    fn class(&mut self, class: &mut ClassDecl) {
        let view = self.view;
        let name = class.name.clone();
        let inherited = |f: &str| class.parent.as_deref().is_some_and(|p| view.attribute(p, f).is_some());

        let mut names = BTreeSet::new();
        for a in &class.attributes {
            self.check_type_exists(&a.ty, a.span);
            if !names.insert(a.name.clone()) {
                self.err(a.span, format!("duplicate feature `{}` in class `{name}`", a.name));
            }
            if inherited(&a.name) {
                self.err(a.span, format!("attribute `{}` is already declared in an ancestor of `{name}`", a.name));
            }
            if let Some(p) = &class.parent {
                if view.routine(p, &a.name).is_some() {
                    self.err(a.span, format!("attribute `{}` clashes with an inherited routine", a.name));
                }
            }
        }
        for r in &class.routines {
            if !names.insert(r.name.clone()) {
                self.err(r.span, format!("duplicate feature `{}` in class `{name}`", r.name));
            }
            if inherited(&r.name) {
                self.err(r.span, format!("routine `{}` clashes with an inherited attribute", r.name));
            }
        }
        for rd in &class.redefines {
            let in_parent = class.parent.as_deref().and_then(|p| view.routine(p, rd)).is_some();
            if !in_parent {
                self.err(class.span, format!("`redefine {rd}`: no ancestor of `{name}` declares `{rd}`"));
            } else if class.routine(rd).is_none() {
                self.err(class.span, format!("`redefine {rd}`: class `{name}` does not redeclare `{rd}`"));
            }
        }
        for cr in &class.creators {
            match view.routine(&name, cr) {
                None => self.err(class.span, format!("creation procedure `{cr}` is not a routine of `{name}`")),
                Some((_, r)) if r.result.is_some() => {
                    self.err(class.span, format!("creation procedure `{cr}` must not return a result"))
                }
                _ => {}
            }
        }
        if !class.deferred {
            let mut visible: BTreeSet<&str> = BTreeSet::new();
            for c in view.ancestors(&name) {
                visible.extend(c.routines.iter().map(|r| r.name.as_str()));
            }
            for r in visible {
                if let Some((decl, routine)) = view.routine(&name, r) {
                    if routine.is_deferred() {
                        let span = if decl.name == name { routine.span } else { class.span };
                        self.err(span, format!("effective class `{name}` has deferred routine `{r}`"));
                    }
                }
            }
        }

        for r in class.routines.iter_mut() {
            self.routine(class_ref(&name, &class.parent, &class.redefines), r);
        }

        let mut scope = Scope { class: name.clone(), routine: None, vars: BTreeMap::new(), ctx: Ctx::ClassInvariant };
        for cl in class.invariant.iter_mut() {
            self.bool_expr(&mut cl.expr, &mut scope);
        }
    }

    fn routine(&mut self, class: ClassRef, r: &mut Routine) {
        let view = self.view;
        let ancestor = class.parent.as_deref().and_then(|p| view.routine(p, &r.name));
        let mut vars = BTreeMap::new();
        for v in r.formals.iter().chain(r.locals.iter()) {
            self.check_type_exists(&v.ty, v.span);
            if vars.insert(v.name.clone(), v.ty.clone()).is_some() {
                self.err(v.span, format!("duplicate variable `{}` in routine `{}`", v.name, r.name));
            }
            if view.attribute(class.name, &v.name).is_some() {
                self.err(v.span, format!("variable `{}` shadows an attribute", v.name));
            }
        }
        if let Some(t) = &r.result {
            self.check_type_exists(t, r.span);
        }

        match ancestor {
            Some((anc_class, anc)) => {
                let sig = |x: &Routine| (x.formals.iter().map(|v| v.ty.clone()).collect::<Vec<_>>(), x.result.clone());
                if sig(anc) != sig(r) {
                    self.err(
                        r.span,
                        format!(
                            "redeclaration of `{}` must keep the signature of `{}.{}`",
                            r.name, anc_class.name, r.name
                        ),
                    );
                }
                if !anc.is_deferred() && !class.redefines.iter().any(|n| n == &r.name) {
                    self.err(
                        r.span,
                        format!("`{}` redefines an effective routine and must be listed in `redefine`", r.name),
                    );
                }
                if !r.contract.ensure.is_empty() {
                    self.err(r.span, format!("redeclared routine `{}` must use `ensure then`, not `ensure`", r.name));
                }
                if !r.contract.require.is_empty() {
                    self.err(r.span, format!("redeclared routine `{}` must use `require else`, not `require`", r.name));
                }
                if anc.pure && !r.pure {
                    self.err(r.span, format!("redeclaration of pure routine `{}` must be declared pure", r.name));
                }
            }
            None => {
                if !r.contract.ensure_then.is_empty() {
                    self.err(
                        r.span,
                        format!("`ensure then` on `{}`, which does not redefine an inherited routine", r.name),
                    );
                }
                if !r.contract.require_else.is_empty() {
                    self.err(
                        r.span,
                        format!("`require else` on `{}`, which does not redefine an inherited routine", r.name),
                    );
                }
            }
        }
        if !r.contract.rescue_invariant.is_empty() && !r.has_rescue() {
            self.err(r.span, format!("`rescue invariant` on `{}`, which has no rescue clause", r.name));
        }
        if let Some(targets) = &r.modify {
            for t in targets {
                let owner = match &t.receiver {
                    None => Some(class.name.to_string()),
                    Some(rc) => match r.formal(rc).map(|v| &v.ty) {
                        Some(Type::Class(c)) => Some(c.clone()),
                        _ => {
                            self.err(t.span, format!("modify receiver `{rc}` must be a formal argument of class type"));
                            None
                        }
                    },
                };
                if let Some(owner) = owner {
                    if view.attribute(&owner, &t.attribute).is_none() {
                        self.err(t.span, format!("`{}` is not an attribute of `{owner}`", t.attribute));
                    }
                }
            }
        }

        let snapshot = r.clone();
        let mut scope = Scope { class: class.name.to_string(), routine: Some(&snapshot), vars, ctx: Ctx::Require };
        for cl in r.contract.require.iter_mut().chain(r.contract.require_else.iter_mut()) {
            self.bool_expr(&mut cl.expr, &mut scope);
        }
        scope.ctx = Ctx::Ensure;
        for cl in r.contract.ensure.iter_mut().chain(r.contract.ensure_then.iter_mut()) {
            self.bool_expr(&mut cl.expr, &mut scope);
        }
        scope.ctx = Ctx::RescueInvariant;
        for cl in r.contract.rescue_invariant.iter_mut() {
            self.bool_expr(&mut cl.expr, &mut scope);
        }
        scope.ctx = Ctx::Body;
        if let Some(body) = r.body.as_mut() {
            self.stmts(&mut body.stmts, &mut scope);
            if let Some(rescue) = body.rescue.as_mut() {
                self.stmts(rescue, &mut scope);
            }
        }
    }

    fn stmts(&mut self, stmts: &mut [Stmt], scope: &mut Scope) {
        for s in stmts {
            self.stmt(s, scope);
        }
    }

    fn resolve_target(&mut self, target: &mut AssignTarget, span: Span, scope: &Scope) -> Option<Type> {
        match target.clone() {
            AssignTarget::Result => match scope.routine.and_then(|r| r.result.clone()) {
                Some(t) => Some(t),
                None => {
                    self.err(span, "`Result` used in a routine without a result type");
                    None
                }
            },
            AssignTarget::Name(n) => {
                let routine = scope.routine.expect("statements only occur in routines");
                if routine.formal(&n).is_some() {
                    self.err(span, format!("formal argument `{n}` cannot be assigned"));
                    return None;
                }
                if let Some(t) = scope.vars.get(&n) {
                    *target = AssignTarget::Local(n);
                    return Some(t.clone());
                }
                if let Some((decl, a)) = self.view.attribute(&scope.class, &n) {
                    *target = AssignTarget::Attr { class: decl.name.clone(), name: n };
                    return Some(a.ty.clone());
                }
                self.err(span, format!("unknown assignment target `{n}`"));
                None
            }
            AssignTarget::Local(n) => scope.vars.get(&n).cloned(),
            AssignTarget::Attr { class, name } => self.view.attribute(&class, &name).map(|(_, a)| a.ty.clone()),
        }
    }

    fn stmt(&mut self, s: &mut Stmt, scope: &mut Scope) {
        let span = s.span;
        match &mut s.kind {
            StmtKind::Assign { target, value } => {
                let tt = self.resolve_target(target, span, scope);
                let vt = self.expr(value, scope);
                if let (Some(tt), Some(vt)) = (tt, vt) {
                    if !self.view.conforms(&vt, &tt) {
                        self.err(span, format!("cannot assign a value of type {vt} to a target of type {tt}"));
                    }
                }
            }
            StmtKind::Create { target, class, creator, args } => {
                let tt = self.resolve_target(target, span, scope);
                let Some(decl) = self.view.class(class) else {
                    self.err(span, format!("cannot create an object of unknown or built-in class `{class}`"));
                    return;
                };
                if decl.deferred {
                    self.err(span, format!("cannot create an instance of deferred class `{class}`"));
                }
                if let Some(tt) = tt {
                    if !self.view.conforms(&Type::Class(class.clone()), &tt) {
                        self.err(span, format!("created type {class} does not conform to target type {tt}"));
                    }
                }
                match creator {
                    None if !decl.creators.is_empty() => self.err(
                        span,
                        format!("class `{class}` must be created with one of: {}", decl.creators.join(", ")),
                    ),
                    None => {
                        for a in args.iter_mut() {
                            self.expr(a, scope);
                        }
                    }
                    Some(cr) => {
                        if !decl.creators.contains(cr) {
                            self.err(span, format!("`{cr}` is not a creation procedure of `{class}`"));
                        }
                        match self.view.routine(class, cr) {
                            Some((_, r)) => self.check_args(r, args, span, scope),
                            None => self.err(span, format!("class `{class}` has no routine `{cr}`")),
                        }
                    }
                }
            }
            StmtKind::Call { target, class, routine, args } => {
                let tgt = target.get_or_insert_with(|| Expr::new(ExprKind::Current, span));
                let Some(tty) = self.expr(tgt, scope) else { return };
                let Some(cname) = self.class_of(&tty, tgt.span) else { return };
                match self.view.routine(&cname, routine) {
                    Some((_, r)) => {
                        if r.result.is_some() {
                            self.err(span, format!("function `{routine}` cannot be called as an instruction"));
                        }
                        let r = r.clone();
                        self.check_args(&r, args, span, scope);
                        *class = Some(cname);
                    }
                    None => self.err(span, format!("class `{cname}` has no routine `{routine}`")),
                }
            }
            StmtKind::If { branches, otherwise } => {
                for (c, body) in branches.iter_mut() {
                    self.bool_expr(c, scope);
                    self.stmts(body, scope);
                }
                self.stmts(otherwise, scope);
            }
            StmtKind::Loop { init, invariant, until, body } => {
                self.stmts(init, scope);
                for cl in invariant.iter_mut() {
                    self.bool_expr(&mut cl.expr, scope);
                }
                self.bool_expr(until, scope);
                self.stmts(body, scope);
            }
            StmtKind::Check(clauses) => {
                for cl in clauses.iter_mut() {
                    self.bool_expr(&mut cl.expr, scope);
                }
            }
            StmtKind::Retry(e) => self.bool_expr(e, scope),
            StmtKind::Raise => {}
        }
    }

    fn check_args(&mut self, r: &Routine, args: &mut [Expr], span: Span, scope: &mut Scope) {
        if args.len() != r.formals.len() {
            self.err(span, format!("`{}` expects {} argument(s), got {}", r.name, r.formals.len(), args.len()));
        }
        for (a, f) in args.iter_mut().zip(r.formals.iter()) {
            if let Some(t) = self.expr(a, scope) {
                if !self.view.conforms(&t, &f.ty) {
                    self.err(a.span, format!("argument of type {t} does not conform to formal `{}: {}`", f.name, f.ty));
                }
            }
        }
        for a in args.iter_mut().skip(r.formals.len()) {
            self.expr(a, scope);
        }
    }

    fn class_of(&mut self, ty: &Type, span: Span) -> Option<String> {
        match ty {
            Type::Class(c) if c != STRING_CLASS => Some(c.clone()),
            other => {
                self.err(span, format!("type {other} has no features"));
                None
            }
        }
    }

    fn bool_expr(&mut self, e: &mut Expr, scope: &mut Scope) {
        if let Some(t) = self.expr(e, scope) {
            if t != Type::Boolean {
                self.err(e.span, format!("expected a BOOLEAN expression, found {t}"));
            }
        }
    }

    /// Resolves `name` on `class` as an attribute read or a function call.
    fn member(
        &mut self,
        target: Expr,
        class: &str,
        name: &str,
        args: Option<Vec<Expr>>,
        span: Span,
        scope: &mut Scope,
    ) -> Option<Expr> {
        if args.is_none() {
            if let Some((decl, a)) = self.view.attribute(class, name) {
                let ty = a.ty.clone();
                let kind =
                    ExprKind::Attr { target: Box::new(target), class: decl.name.clone(), name: name.to_string() };
                return Some(Expr::typed(kind, span, ty));
            }
        }
        match self.view.routine(class, name) {
            Some((_, r)) => {
                let r = r.clone();
                let Some(rt) = r.result.clone() else {
                    self.err(span, format!("procedure `{name}` cannot be used in an expression"));
                    return None;
                };
                let mut args = args.unwrap_or_default();
                self.check_args(&r, &mut args, span, scope);
                let kind = ExprKind::FnCall {
                    target: Box::new(target),
                    class: class.to_string(),
                    routine: name.to_string(),
                    args,
                };
                Some(Expr::typed(kind, span, rt))
            }
            None => {
                self.err(span, format!("class `{class}` has no feature `{name}`"));
                None
            }
        }
    }

    fn expr(&mut self, e: &mut Expr, scope: &mut Scope) -> Option<Type> {
        let span = e.span;
        let ty = match &mut e.kind {
            ExprKind::Int(_) => Type::Integer,
            ExprKind::Bool(_) => Type::Boolean,
            ExprKind::Void => Type::None,
            ExprKind::Current => Type::Class(scope.class.clone()),
            ExprKind::Result => {
                let rt = scope.routine.and_then(|r| r.result.clone());
                match (rt, scope.ctx) {
                    (None, _) => {
                        self.err(span, "`Result` used in a routine without a result type");
                        return None;
                    }
                    (Some(_), Ctx::Require) => {
                        self.err(span, "`Result` cannot appear in a precondition");
                        return None;
                    }
                    (Some(t), _) => t,
                }
            }
            ExprKind::ExcV => {
                if !matches!(scope.ctx, Ctx::Ensure | Ctx::RescueInvariant) {
                    self.err(span, "`ExcV` may only appear in postconditions and rescue invariants");
                    return None;
                }
                Type::Boolean
            }
            ExprKind::Ident(name) => {
                let name = name.clone();
                if let Some(t) = scope.vars.get(&name).cloned() {
                    e.kind = ExprKind::Local(name);
                    t
                } else {
                    let cur = Expr::typed(ExprKind::Current, span, Type::Class(scope.class.clone()));
                    let class = scope.class.clone();
                    let resolved = self.member(cur, &class, &name, None, span, scope)?;
                    *e = resolved;
                    return e.ty.clone();
                }
            }
            ExprKind::Call { name, args } => {
                let (name, args) = (name.clone(), std::mem::take(args));
                let cur = Expr::typed(ExprKind::Current, span, Type::Class(scope.class.clone()));
                let class = scope.class.clone();
                let resolved = self.member(cur, &class, &name, Some(args), span, scope)?;
                *e = resolved;
                return e.ty.clone();
            }
            ExprKind::Member { target, name, args } => {
                let (name, args) = (name.clone(), args.take());
                let mut target = std::mem::replace(target.as_mut(), Expr::new(ExprKind::Void, span));
                let tt = self.expr(&mut target, scope)?;
                let class = self.class_of(&tt, target.span)?;
                let resolved = self.member(target, &class, &name, args, span, scope)?;
                *e = resolved;
                return e.ty.clone();
            }
            ExprKind::Local(n) => scope.vars.get(n).cloned()?,
            ExprKind::Attr { class, name, .. } => self.view.attribute(class, name).map(|(_, a)| a.ty.clone())?,
            ExprKind::FnCall { class, routine, .. } => {
                self.view.routine(class, routine).and_then(|(_, r)| r.result.clone())?
            }
            ExprKind::Old(inner) => {
                if scope.ctx != Ctx::Ensure {
                    self.err(span, "`old` may only appear in postconditions");
                }
                self.expr(inner, scope)?
            }
            ExprKind::Unary(op, inner) => {
                let op = *op;
                let t = self.expr(inner, scope)?;
                let want = if op == UnOp::Not { Type::Boolean } else { Type::Integer };
                if t != want {
                    self.err(
                        span,
                        format!("operand of `{}` must be {want}, found {t}", if op == UnOp::Not { "not" } else { "-" }),
                    );
                    return None;
                }
                want
            }
            ExprKind::Binary(op, l, r) => {
                let op = *op;
                let lt = self.expr(l, scope);
                let rt = self.expr(r, scope);
                let (lt, rt) = (lt?, rt?);
                match op {
                    BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
                        if lt != Type::Integer || rt != Type::Integer {
                            self.err(
                                span,
                                format!("operands of `{}` must be INTEGER, found {lt} and {rt}", op.symbol()),
                            );
                            return None;
                        }
                        if matches!(op, BinOp::Add | BinOp::Sub | BinOp::Mul) {
                            Type::Integer
                        } else {
                            Type::Boolean
                        }
                    }
                    BinOp::Eq | BinOp::Ne => {
                        let ok = self.view.conforms(&lt, &rt) || self.view.conforms(&rt, &lt);
                        if !ok {
                            self.err(span, format!("cannot compare {lt} with {rt}"));
                            return None;
                        }
                        Type::Boolean
                    }
                    BinOp::And | BinOp::Or | BinOp::Implies => {
                        if lt != Type::Boolean || rt != Type::Boolean {
                            self.err(
                                span,
                                format!("operands of `{}` must be BOOLEAN, found {lt} and {rt}", op.symbol()),
                            );
                            return None;
                        }
                        Type::Boolean
                    }
                }
            }
        };
        e.ty = Some(ty.clone());
        Some(ty)
    }
}

struct ClassRef<'a> {
    name: &'a str,
    parent: &'a Option<Name>,
    redefines: &'a [Name],
}

fn class_ref<'a>(name: &'a str, parent: &'a Option<Name>, redefines: &'a [Name]) -> ClassRef<'a> {
    ClassRef { name, parent, redefines }
}
