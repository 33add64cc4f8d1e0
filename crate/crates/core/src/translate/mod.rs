//! Translation of typechecked Lite-Eiffel programs into the IVL.
//!
//! Each routine declaration `C.r` becomes a procedure `C.r` whose body is
//! verified against the routine's cumulative contract. Dynamic binding is
//! encoded by uninterpreted predicates `post.C.r` / `pre.C.r` plus
//! axioms relating them to the contracts of every descendant; the
//! `static_only` option omits those axioms and uses the static
//! precondition at call sites.

mod analysis;
mod axioms;
mod body;
pub mod expr;
pub mod names;

use std::collections::{BTreeMap, BTreeSet};

use crate::frontend::ast::{ClassDecl, Clause, Routine};
use crate::frontend::TypedProgram;
use crate::ivl::{self, Expr, ObligationKind, Origin, Sort, Spec};
use crate::span::Span;

pub use analysis::{check_purity, infer_frame, raising_families, DeclKey, Frame, Location};
pub use axioms::generate_inheritance_axioms;
pub use body::{exception_check, translate_body, translate_call};
use expr::{sort_of, translate_expr, Env};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum TranslateError {
    #[error("{span}: routine {routine} has a rescue clause but no rescue invariant")]
    MissingRescueInvariant { routine: String, span: Span },
    #[error("{span}: cannot infer frame of {routine}: attribute {attribute} is not accessed through Current or a formal argument")]
    FrameReceiverUnsupported { routine: String, span: Span, attribute: String },
    #[error("{span}: routine {routine} must be pure but {reason}")]
    PurityError { routine: String, span: Span, reason: String },
}

impl TranslateError {
    pub fn span(&self) -> Span {
        match self {
            TranslateError::MissingRescueInvariant { span, .. }
            | TranslateError::FrameReceiverUnsupported { span, .. }
            | TranslateError::PurityError { span, .. } => *span,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Options {
    /// Resolve calls against static types only: no inheritance axioms and
    /// static preconditions at call sites.
    pub static_only: bool,
}

/// Program-wide facts shared by all parts of one translation.
pub struct Translator<'a> {
    pub tp: &'a TypedProgram,
    pub opts: Options,
    pub pure: BTreeSet<DeclKey>,
    pub raising: BTreeSet<DeclKey>,
    pub frames: BTreeMap<DeclKey, Frame>,
    /// Families whose post predicate takes the exception variable.
    pub exc_param: BTreeSet<DeclKey>,
    /// Declarations used as creation procedures somewhere.
    pub creators: BTreeSet<DeclKey>,
}

pub fn translate(tp: &TypedProgram, opts: &Options) -> Result<ivl::Program, TranslateError> {
    Ok(Translator::new(tp, opts)?.program())
}

impl<'a> Translator<'a> {
    /// Runs the whole-program analyses; fails on the first translation error.
    pub fn new(tp: &'a TypedProgram, opts: &Options) -> Result<Translator<'a>, TranslateError> {
        for (c, r) in tp.routines() {
            if r.has_rescue() && r.contract.rescue_invariant.is_empty() {
                return Err(TranslateError::MissingRescueInvariant {
                    routine: format!("{}.{}", c.name, r.name),
                    span: r.span,
                });
            }
        }
        let pure = check_purity(tp)?;
        let frames = analysis::all_frames(tp, &pure)?;
        let raising = raising_families(tp);
        let mut exc_param = BTreeSet::new();
        let mut creators = BTreeSet::new();
        for (c, r) in tp.routines() {
            let key = (c.name.clone(), r.name.clone());
            let mentions =
                r.contract.ensure.iter().chain(&r.contract.ensure_then).any(|c| expr::mentions_excv(&c.expr));
            if mentions {
                for (a, _) in tp.declaration_chain(&c.name, &r.name) {
                    exc_param.insert((a.name.clone(), r.name.clone()));
                }
            }
            for k in tp.descendants(&c.name) {
                if k.creators.contains(&r.name) && names::declaring_class(tp, &k.name, &r.name) == c.name {
                    creators.insert(key.clone());
                }
            }
        }
        Ok(Translator { tp, opts: *opts, pure, raising, frames, exc_param, creators })
    }
}

fn origin(kind: ObligationKind, span: Span, note: impl Into<String>) -> Origin {
    Origin::new(kind, span, note)
}

fn clause_note(prefix: &str, c: &Clause) -> String {
    match &c.tag {
        Some(t) => format!("{prefix} {t}"),
        None => prefix.to_string(),
    }
}

impl<'a> Translator<'a> {
    pub fn program(&self) -> ivl::Program {
        let tp = self.tp;
        let mut p = ivl::Program::default();
        for c in &tp.program.classes {
            p.types.push(ivl::TypeDecl { name: c.name.clone(), parent: c.parent.clone() });
        }
        p.types.push(ivl::TypeDecl { name: crate::frontend::STRING_CLASS.into(), parent: None });
        for c in &tp.program.classes {
            for a in &c.attributes {
                p.fields.push((names::field(&c.name, &a.name), sort_of(&a.ty)));
            }
        }
        p.globals = vec![(ivl::HEAP.into(), Sort::Heap), (ivl::EXCV.into(), Sort::Bool)];
        for (c, r) in tp.routines() {
            let (functions, axioms) = generate_inheritance_axioms(self, c, r);
            p.functions.extend(functions);
            p.axioms.extend(axioms);
        }
        for (c, r) in tp.routines() {
            p.procedures.push(self.procedure(c, r, &p));
        }
        for (c, r) in tp.routines() {
            if r.body.is_some() {
                p.implementations.push(translate_body(self, c, r, &p));
            }
        }
        p
    }

    pub fn is_pure(&self, c: &str, r: &str) -> bool {
        self.pure.contains(&(c.to_string(), r.to_string()))
    }

    pub fn is_function(&self, c: &str, r: &Routine) -> bool {
        r.result.is_some() && self.is_pure(c, &r.name)
    }

    pub fn has_exc_param(&self, c: &str, r: &str) -> bool {
        self.exc_param.contains(&(c.to_string(), r.to_string()))
    }

    pub fn may_raise(&self, c: &str, r: &str) -> bool {
        self.raising.contains(&analysis::family(self.tp, &(c.to_string(), r.to_string())))
    }

    /// Postcondition clauses in force for `r` as seen from `class`: the
    /// original `ensure` clauses and every `ensure then` down to `class`.
    pub fn post_clauses(&self, class: &str, r: &str) -> Vec<(&'a Routine, &'a Clause)> {
        let mut out = Vec::new();
        for (_, d) in self.tp.declaration_chain(class, r) {
            out.extend(d.contract.ensure.iter().map(|c| (d, c)));
            out.extend(d.contract.ensure_then.iter().map(|c| (d, c)));
        }
        out
    }

    /// Conjunction of the cumulative postcondition of `r` as seen from
    /// `class`.
    pub fn post_cumulative(&self, class: &str, r: &str, env: &Env) -> Expr {
        ivl::and_all(
            self.post_clauses(class, r)
                .into_iter()
                .map(|(d, c)| translate_expr(self.tp, &self.env_for(env, class, r, d), &c.expr)),
        )
    }

    /// Cumulative precondition of `r` as seen from `class`: the disjunction
    /// over declaration levels of each level's clauses.
    pub fn pre_cumulative(&self, class: &str, r: &str, env: &Env) -> Expr {
        let chain = self.tp.declaration_chain(class, r);
        let mut levels = Vec::new();
        for (i, (_, d)) in chain.iter().enumerate() {
            let clauses: Vec<&Clause> =
                if i == 0 { d.contract.require.iter().collect() } else { d.contract.require_else.iter().collect() };
            if i == 0 || !clauses.is_empty() {
                levels.push(expr::translate_clauses(self.tp, &self.env_for(env, class, r, d), &clauses));
            }
        }
        ivl::or_all(levels)
    }

    /// `env` with the formals of redeclaration `d` renamed positionally to
    /// the names `env` uses for the formals of `class`'s declaration.
    pub fn env_for(&self, env: &Env, class: &str, r: &str, d: &Routine) -> Env {
        let (_, own) = self.tp.routine(class, r).expect("declared routine");
        let mut e = env.clone();
        e.vars = BTreeMap::new();
        for (mine, theirs) in own.formals.iter().zip(&d.formals) {
            let target = env.vars.get(&mine.name).cloned().unwrap_or_else(|| ivl::var(&mine.name));
            e.vars.insert(theirs.name.clone(), target);
        }
        e
    }

    /// Class invariant of `class` for object `obj` in `heap`, clause by clause.
    pub fn invariant_clauses(&self, class: &str, heap: Expr, obj: Expr) -> Vec<(Expr, &'a Clause)> {
        let env = Env { heap: heap.clone(), old_heap: heap, current: obj, ..Env::procedure() };
        self.tp.invariant(class).into_iter().map(|c| (translate_expr(self.tp, &env, &c.expr), c)).collect()
    }

    fn procedure(&self, c: &ClassDecl, r: &Routine, p: &ivl::Program) -> ivl::Procedure {
        let tp = self.tp;
        let key = (c.name.clone(), r.name.clone());
        let env = Env::procedure();
        let mut params = vec![("Current".to_string(), Sort::Ref)];
        params.extend(r.formals.iter().map(|f| (f.name.clone(), sort_of(&f.ty))));
        let returns: Vec<(String, Sort)> = r.result.iter().map(|t| ("Result".to_string(), sort_of(t))).collect();
        let free = |expr: Expr, note: &str| Spec {
            expr,
            free: true,
            origin: origin(ObligationKind::Postcondition, r.span, note),
        };

        let mut requires = vec![free(ivl::eq(ivl::var(ivl::EXCV), Expr::Bool(false)), "no pending exception")];
        let cur = ivl::var("Current");
        requires.push(free(
            ivl::and_all([
                ivl::bin(ivl::BinOp::Ne, cur.clone(), Expr::Null),
                ivl::subtype(ivl::type_of(cur.clone()), ivl::var(&c.name)),
                ivl::allocated(ivl::var(ivl::HEAP), cur.clone()),
            ]),
            "receiver",
        ));
        for f in &r.formals {
            if let Some(cls) = f.ty.class_name() {
                let v = ivl::var(&f.name);
                requires.push(free(
                    ivl::or_all([
                        ivl::eq(v.clone(), Expr::Null),
                        ivl::and_all([
                            ivl::subtype(ivl::type_of(v.clone()), ivl::var(cls)),
                            ivl::allocated(ivl::var(ivl::HEAP), v),
                        ]),
                    ]),
                    "argument type",
                ));
            }
        }
        if !self.creators.contains(&key) {
            for (e, _) in self.invariant_clauses(&c.name, ivl::var(ivl::HEAP), cur.clone()) {
                requires.push(free(e, "class invariant"));
            }
        }
        let chain = tp.declaration_chain(&c.name, &r.name);
        if self.opts.static_only {
            if chain.len() == 1 {
                for cl in &r.contract.require {
                    requires.push(Spec {
                        expr: translate_expr(tp, &env, &cl.expr),
                        free: false,
                        origin: origin(
                            ObligationKind::CalleePrecondition,
                            cl.expr.span,
                            clause_note("precondition", cl),
                        ),
                    });
                }
            } else {
                requires.push(Spec {
                    expr: self.pre_cumulative(&c.name, &r.name, &env),
                    free: false,
                    origin: origin(ObligationKind::CalleePrecondition, r.span, "precondition"),
                });
            }
        } else {
            let mut args = vec![ivl::var(ivl::HEAP), cur.clone()];
            args.extend(r.formals.iter().map(|f| ivl::var(&f.name)));
            requires.push(Spec {
                expr: ivl::app(&names::pre(&c.name, &r.name), args),
                free: false,
                origin: origin(ObligationKind::CalleePrecondition, r.span, "precondition"),
            });
            requires.push(free(self.pre_cumulative(&c.name, &r.name, &env), "precondition"));
        }

        let mut ensures = Vec::new();
        for (d, cl) in self.post_clauses(&c.name, &r.name) {
            ensures.push(Spec {
                expr: translate_expr(tp, &self.env_for(&env, &c.name, &r.name, d), &cl.expr),
                free: false,
                origin: origin(ObligationKind::Postcondition, cl.expr.span, clause_note("postcondition", cl)),
            });
        }
        if !self.may_raise(&c.name, &r.name) {
            ensures.push(Spec {
                expr: ivl::not(ivl::var(ivl::EXCV)),
                free: false,
                origin: origin(ObligationKind::Postcondition, r.span, "routine terminates normally"),
            });
        }
        ensures.push(Spec {
            expr: self.frame_expr(&key, p),
            free: false,
            origin: origin(ObligationKind::Frame, r.span, "frame"),
        });
        for (e, cl) in self.invariant_clauses(&c.name, ivl::var(ivl::HEAP), cur.clone()) {
            ensures.push(Spec {
                expr: ivl::implies(ivl::not(ivl::var(ivl::EXCV)), e),
                free: false,
                origin: origin(ObligationKind::ClassInvariantExit, cl.expr.span, clause_note("class invariant", cl)),
            });
        }
        let mut post_args = vec![ivl::var(ivl::HEAP), ivl::old(ivl::var(ivl::HEAP))];
        if self.has_exc_param(&c.name, &r.name) {
            post_args.push(ivl::var(ivl::EXCV));
        }
        post_args.push(cur.clone());
        post_args.extend(r.formals.iter().map(|f| ivl::var(&f.name)));
        if r.result.is_some() {
            post_args.push(ivl::var("Result"));
        }
        ensures.push(free(ivl::app(&names::post(&c.name, &r.name), post_args), "dynamic postcondition"));
        if self.is_function(&c.name, r) {
            let mut args = vec![ivl::var(ivl::HEAP), cur];
            args.extend(r.formals.iter().map(|f| ivl::var(&f.name)));
            ensures.push(free(
                ivl::eq(ivl::var("Result"), ivl::app(&names::function(&c.name, &r.name), args)),
                "function value",
            ));
        }
        requires.retain(|s| !(s.free && s.expr == Expr::Bool(true)));
        ivl::Procedure {
            name: names::procedure(&c.name, &r.name),
            params,
            returns,
            requires,
            ensures,
            modifies: vec![ivl::HEAP.into(), ivl::EXCV.into()],
            span: r.span,
        }
    }

    /// Frame condition of a declaration relative to `old(Heap)`.
    pub fn frame_expr(&self, key: &DeclKey, p: &ivl::Program) -> Expr {
        let heap = ivl::var(ivl::HEAP);
        let old_heap = ivl::old(heap.clone());
        match &self.frames[key] {
            Frame::Pure => ivl::eq(heap, old_heap),
            Frame::Locations(locs) => {
                let o = ivl::var("$o");
                ivl::and_all(p.all_fields().into_iter().map(|(f, _)| {
                    let mut guard = vec![
                        ivl::bin(ivl::BinOp::Ne, o.clone(), Expr::Null),
                        ivl::allocated(old_heap.clone(), o.clone()),
                    ];
                    for l in locs.iter().filter(|l| l.field == f) {
                        let recv = ivl::var(l.receiver.as_deref().unwrap_or("Current"));
                        guard.push(ivl::bin(ivl::BinOp::Ne, o.clone(), recv));
                    }
                    ivl::forall(
                        vec![("$o".into(), Sort::Ref)],
                        ivl::implies(
                            ivl::and_all(guard),
                            ivl::eq(ivl::read(heap.clone(), o.clone(), &f), ivl::read(old_heap.clone(), o.clone(), &f)),
                        ),
                    )
                }))
            }
        }
    }
}
