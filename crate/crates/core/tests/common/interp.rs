//! Reference interpreter for typechecked Lite-Eiffel programs.
//!
//! Contracts are checked at run time. A routine with a rescue clause runs
//! its body; on an exception the handler runs with `ExcV` cleared and
//! `Retry` false, and the body re-runs while the handler sets `Retry`. The
//! rescue invariant is evaluated after every body execution. An exception
//! leaving a routine is checked against its postcondition with `ExcV` set.

use std::collections::BTreeMap;

use lev::frontend::ast::{AssignTarget, BinOp, Clause, Expr, ExprKind, Routine, Stmt, StmtKind, Type, UnOp};
use lev::frontend::TypedProgram;
use lev::Span;

const FUEL: u64 = 200_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Value {
    Int(i64),
    Bool(bool),
    Ref(Option<usize>),
}

impl Value {
    fn default_of(t: &Type) -> Value {
        match t {
            Type::Integer => Value::Int(0),
            Type::Boolean => Value::Bool(false),
            _ => Value::Ref(None),
        }
    }

    fn int(&self) -> i64 {
        match self {
            Value::Int(n) => *n,
            v => panic!("expected integer, got {v:?}"),
        }
    }

    fn bool(&self) -> bool {
        match self {
            Value::Bool(b) => *b,
            v => panic!("expected boolean, got {v:?}"),
        }
    }
}

#[derive(Clone, Debug)]
struct Object {
    class: String,
    fields: BTreeMap<(String, String), Value>,
}

/// A contract violation: what failed and where.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub what: String,
    pub span: Span,
}

#[derive(Debug)]
enum Stop {
    Exception,
    Violation(Violation),
    OutOfFuel,
}

/// Outcome of one complete run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Run {
    Normal,
    /// An exception reached the root.
    Exception,
    Violation(Violation),
    OutOfFuel,
    /// The inputs violate the root routine's precondition.
    Skipped,
}

struct Frame {
    current: Option<usize>,
    locals: BTreeMap<String, Value>,
    old_heap: Option<Vec<Object>>,
    excv: bool,
}

#[derive(Clone)]
pub struct Interpreter<'a> {
    tp: &'a TypedProgram,
    heap: Vec<Object>,
    fuel: u64,
}

fn violation(what: impl Into<String>, span: Span) -> Stop {
    Stop::Violation(Violation { what: what.into(), span })
}

impl<'a> Interpreter<'a> {
    pub fn new(tp: &'a TypedProgram) -> Interpreter<'a> {
        Interpreter { tp, heap: Vec::new(), fuel: FUEL }
    }

    /// Creates an object of `class` with creation procedure `creator`
    /// applied to `args`.
    pub fn run_creation(&mut self, class: &str, creator: &str, args: Vec<Value>) -> Run {
        let obj = self.alloc(class);
        self.run_call(obj, creator, args)
    }

    /// Calls `name` on object `obj` from outside, skipping calls whose
    /// precondition does not hold.
    pub fn run_call(&mut self, obj: usize, name: &str, args: Vec<Value>) -> Run {
        let class = self.heap[obj].class.clone();
        let (_, r) = self.tp.routine(&class, name).expect("routine exists");
        let pre_ok = {
            let frame = self.entry_frame(Some(obj), r, &args);
            self.precondition(&class, r, &frame)
        };
        match pre_ok {
            Ok(true) => {}
            Ok(false) => return Run::Skipped,
            Err(s) => return to_run(s),
        }
        match self.invoke(obj, name, args) {
            Ok(_) => Run::Normal,
            Err(s) => to_run(s),
        }
    }

    /// The object created first.
    pub fn first_object(&self) -> usize {
        0
    }

    fn alloc(&mut self, class: &str) -> usize {
        let mut fields = BTreeMap::new();
        for (c, a) in self.tp.all_attributes(class) {
            fields.insert((c.name.clone(), a.name.clone()), Value::default_of(&a.ty));
        }
        self.heap.push(Object { class: class.to_string(), fields });
        self.heap.len() - 1
    }

    fn entry_frame(&self, current: Option<usize>, r: &Routine, args: &[Value]) -> Frame {
        let mut locals = BTreeMap::new();
        for (f, v) in r.formals.iter().zip(args) {
            locals.insert(f.name.clone(), v.clone());
        }
        for l in &r.locals {
            locals.insert(l.name.clone(), Value::default_of(&l.ty));
        }
        if let Some(t) = &r.result {
            locals.insert("Result".into(), Value::default_of(t));
        }
        Frame { current, locals, old_heap: None, excv: false }
    }

    fn tick(&mut self) -> Result<(), Stop> {
        if self.fuel == 0 {
            return Err(Stop::OutOfFuel);
        }
        self.fuel -= 1;
        Ok(())
    }

    /// Cumulative precondition of the declaration executed for `class`,
    /// with formals renamed per level.
    fn precondition(&mut self, class: &str, r: &Routine, frame: &Frame) -> Result<bool, Stop> {
        let chain = self.tp.declaration_chain(class, &r.name);
        let mut any_level = false;
        for (i, (_, d)) in chain.iter().enumerate() {
            let clauses: &[Clause] = if i == 0 { &d.contract.require } else { &d.contract.require_else };
            if i > 0 && clauses.is_empty() {
                continue;
            }
            let f = renamed(frame, r, d);
            let mut ok = true;
            for c in clauses {
                if !self.eval(&c.expr, &f)?.bool() {
                    ok = false;
                    break;
                }
            }
            any_level |= ok;
        }
        Ok(any_level)
    }

    fn clauses_hold(&mut self, clauses: &[Clause], frame: &Frame, what: &str) -> Result<(), Stop> {
        for c in clauses {
            if !self.eval(&c.expr, frame)?.bool() {
                return Err(violation(what, c.expr.span));
            }
        }
        Ok(())
    }

    fn invariant_holds(&mut self, class: &str, obj: usize, what: &str) -> Result<(), Stop> {
        let frame = Frame { current: Some(obj), locals: BTreeMap::new(), old_heap: None, excv: false };
        let clauses: Vec<Clause> = self.tp.invariant(class).into_iter().cloned().collect();
        self.clauses_hold(&clauses, &frame, what)
    }

    /// Calls routine `name` on `obj`, dispatching on its dynamic class.
    /// Returns the result value of functions.
    fn invoke(&mut self, obj: usize, name: &str, args: Vec<Value>) -> Result<Option<Value>, Stop> {
        self.tick()?;
        let dynamic = self.heap[obj].class.clone();
        let tp = self.tp;
        let (decl, r) = tp.routine(&dynamic, name).expect("routine resolves");
        let decl = decl.name.clone();
        let mut frame = self.entry_frame(Some(obj), r, &args);
        frame.old_heap = Some(self.heap.clone());
        let body = r.body.as_ref().expect("effective routine");

        let mut excv = false;
        match &body.rescue {
            None => match self.exec_block(&body.stmts, &mut frame) {
                Ok(()) => {}
                Err(Stop::Exception) => excv = true,
                Err(s) => return Err(s),
            },
            Some(rescue) => loop {
                let raised = match self.exec_block(&body.stmts, &mut frame) {
                    Ok(()) => false,
                    Err(Stop::Exception) => true,
                    Err(s) => return Err(s),
                };
                frame.excv = raised;
                self.clauses_hold(&r.contract.rescue_invariant, &frame, "rescue invariant")?;
                frame.excv = false;
                if !raised {
                    break;
                }
                frame.locals.insert("Retry".into(), Value::Bool(false));
                match self.exec_block(rescue, &mut frame) {
                    Ok(()) => {}
                    Err(Stop::Exception) => {
                        excv = true;
                        break;
                    }
                    Err(s) => return Err(s),
                }
                if frame.locals.get("Retry") != Some(&Value::Bool(true)) {
                    excv = true;
                    break;
                }
                self.tick()?;
            },
        }

        frame.excv = excv;
        for (_, d) in tp.declaration_chain(&decl, name) {
            let f = renamed(&frame, r, d);
            let clauses: Vec<Clause> = d.contract.ensure.iter().chain(&d.contract.ensure_then).cloned().collect();
            self.clauses_hold(&clauses, &f, "postcondition")?;
        }
        if !excv {
            self.invariant_holds(&decl, obj, "class invariant")?;
        }
        if excv {
            return Err(Stop::Exception);
        }
        Ok(frame.locals.get("Result").cloned())
    }

    fn exec_block(&mut self, stmts: &[Stmt], frame: &mut Frame) -> Result<(), Stop> {
        for s in stmts {
            self.exec(s, frame)?;
        }
        Ok(())
    }

    fn assign(&mut self, target: &AssignTarget, v: Value, frame: &mut Frame) {
        match target {
            AssignTarget::Local(n) | AssignTarget::Name(n) => {
                frame.locals.insert(n.clone(), v);
            }
            AssignTarget::Result => {
                frame.locals.insert("Result".into(), v);
            }
            AssignTarget::Attr { class, name } => {
                let obj = frame.current.expect("attribute assignment needs Current");
                self.heap[obj].fields.insert((class.clone(), name.clone()), v);
            }
        }
    }

    fn call(
        &mut self,
        target: &Expr,
        routine: &str,
        args: &[Expr],
        frame: &Frame,
        span: Span,
    ) -> Result<Option<Value>, Stop> {
        let Value::Ref(t) = self.eval(target, frame)? else { panic!("call target is a reference") };
        let Some(obj) = t else { return Err(violation("target is attached", span)) };
        let mut vals = Vec::new();
        for a in args {
            vals.push(self.eval(a, frame)?);
        }
        let dynamic = self.heap[obj].class.clone();
        let (_, r) = self.tp.routine(&dynamic, routine).expect("routine resolves");
        let callee = self.entry_frame(Some(obj), r, &vals);
        if !self.precondition(&dynamic, r, &callee)? {
            return Err(violation("precondition", span));
        }
        self.invoke(obj, routine, vals)
    }

    fn exec(&mut self, s: &Stmt, frame: &mut Frame) -> Result<(), Stop> {
        self.tick()?;
        match &s.kind {
            StmtKind::Assign { target, value } => {
                let v = self.eval(value, frame)?;
                self.assign(target, v, frame);
            }
            StmtKind::Create { target, class, creator, args } => {
                let obj = self.alloc(class);
                match creator {
                    Some(c) => {
                        let this = Expr::typed(ExprKind::Local("$new".into()), s.span, Type::Class(class.clone()));
                        frame.locals.insert("$new".into(), Value::Ref(Some(obj)));
                        let r = self.call(&this, c, args, frame, s.span);
                        frame.locals.remove("$new");
                        r?;
                    }
                    None => self.invariant_holds(class, obj, "class invariant of default object")?,
                }
                self.assign(target, Value::Ref(Some(obj)), frame);
            }
            StmtKind::Call { target, routine, args, .. } => {
                let target = target.as_ref().expect("resolved call");
                self.call(target, routine, args, frame, s.span)?;
            }
            StmtKind::If { branches, otherwise } => {
                for (c, body) in branches {
                    if self.eval(c, frame)?.bool() {
                        return self.exec_block(body, frame);
                    }
                }
                self.exec_block(otherwise, frame)?;
            }
            StmtKind::Loop { init, invariant, until, body } => {
                self.exec_block(init, frame)?;
                loop {
                    self.tick()?;
                    self.clauses_hold(invariant, frame, "loop invariant")?;
                    if self.eval(until, frame)?.bool() {
                        break;
                    }
                    self.exec_block(body, frame)?;
                }
            }
            StmtKind::Check(clauses) => self.clauses_hold(clauses, frame, "check")?,
            StmtKind::Retry(e) => {
                let v = self.eval(e, frame)?;
                frame.locals.insert("Retry".into(), v);
            }
            StmtKind::Raise => return Err(Stop::Exception),
        }
        Ok(())
    }

    fn read(&self, obj: usize, class: &str, name: &str, old: Option<&Vec<Object>>) -> Value {
        let heap = old.unwrap_or(&self.heap);
        heap.get(obj).and_then(|o| o.fields.get(&(class.to_string(), name.to_string())).cloned()).unwrap_or_else(|| {
            let ty = self.tp.attribute(class, name).map(|(_, a)| a.ty.clone()).unwrap_or(Type::Integer);
            Value::default_of(&ty)
        })
    }

    fn eval(&mut self, e: &Expr, frame: &Frame) -> Result<Value, Stop> {
        self.eval_in(e, frame, false)
    }

    fn eval_in(&mut self, e: &Expr, frame: &Frame, in_old: bool) -> Result<Value, Stop> {
        Ok(match &e.kind {
            ExprKind::Int(n) => Value::Int(*n),
            ExprKind::Bool(b) => Value::Bool(*b),
            ExprKind::Void => Value::Ref(None),
            ExprKind::Current => Value::Ref(frame.current),
            ExprKind::Result => frame.locals.get("Result").cloned().expect("Result in scope"),
            ExprKind::ExcV => Value::Bool(frame.excv),
            ExprKind::Local(n) | ExprKind::Ident(n) => {
                frame.locals.get(n).cloned().unwrap_or_else(|| panic!("unbound local {n}"))
            }
            ExprKind::Attr { target, class, name } => {
                let Value::Ref(t) = self.eval_in(target, frame, in_old)? else { panic!("attribute of non-reference") };
                let Some(obj) = t else { return Err(violation("target is attached", e.span)) };
                let old = if in_old { frame.old_heap.as_ref() } else { None };
                self.read(obj, class, name, old)
            }
            ExprKind::FnCall { target, routine, args, .. } => {
                if in_old {
                    let snapshot = frame.old_heap.clone().expect("old outside routine");
                    let saved = std::mem::replace(&mut self.heap, snapshot);
                    let r = self.call(target, routine, args, &plain(frame), e.span);
                    self.heap = saved;
                    r?.expect("function result")
                } else {
                    self.call(target, routine, args, frame, e.span)?.expect("function result")
                }
            }
            ExprKind::Old(x) => self.eval_in(x, frame, true)?,
            ExprKind::Unary(UnOp::Not, x) => Value::Bool(!self.eval_in(x, frame, in_old)?.bool()),
            ExprKind::Unary(UnOp::Neg, x) => Value::Int(-self.eval_in(x, frame, in_old)?.int()),
            ExprKind::Binary(op, l, r) => {
                let lv = self.eval_in(l, frame, in_old)?;
                match op {
                    BinOp::And if !lv.bool() => return Ok(Value::Bool(false)),
                    BinOp::Or if lv.bool() => return Ok(Value::Bool(true)),
                    BinOp::Implies if !lv.bool() => return Ok(Value::Bool(true)),
                    _ => {}
                }
                let rv = self.eval_in(r, frame, in_old)?;
                match op {
                    BinOp::Add => Value::Int(lv.int() + rv.int()),
                    BinOp::Sub => Value::Int(lv.int() - rv.int()),
                    BinOp::Mul => Value::Int(lv.int() * rv.int()),
                    BinOp::Eq => Value::Bool(lv == rv),
                    BinOp::Ne => Value::Bool(lv != rv),
                    BinOp::Lt => Value::Bool(lv.int() < rv.int()),
                    BinOp::Le => Value::Bool(lv.int() <= rv.int()),
                    BinOp::Gt => Value::Bool(lv.int() > rv.int()),
                    BinOp::Ge => Value::Bool(lv.int() >= rv.int()),
                    BinOp::And | BinOp::Or | BinOp::Implies => Value::Bool(rv.bool()),
                }
            }
            ExprKind::Member { .. } | ExprKind::Call { .. } => panic!("unresolved expression"),
        })
    }
}

/// `frame` without its `old` snapshot, for evaluating inside `old`.
fn plain(frame: &Frame) -> Frame {
    Frame { current: frame.current, locals: frame.locals.clone(), old_heap: None, excv: frame.excv }
}

/// `frame` with the formals of `own` renamed to those of redeclaration `d`.
fn renamed(frame: &Frame, own: &Routine, d: &Routine) -> Frame {
    let mut locals = frame.locals.clone();
    for (mine, theirs) in own.formals.iter().zip(&d.formals) {
        if let Some(v) = frame.locals.get(&mine.name) {
            locals.insert(theirs.name.clone(), v.clone());
        }
    }
    Frame { current: frame.current, locals, old_heap: frame.old_heap.clone(), excv: frame.excv }
}

fn to_run(s: Stop) -> Run {
    match s {
        Stop::Exception => Run::Exception,
        Stop::Violation(v) => Run::Violation(v),
        Stop::OutOfFuel => Run::OutOfFuel,
    }
}

/// All argument vectors for `formals` with integers in `0..=max` and both
/// booleans; references are Void.
pub fn inputs(formals: &[Type], max: i64) -> Vec<Vec<Value>> {
    let mut out = vec![Vec::new()];
    for t in formals {
        let choices: Vec<Value> = match t {
            Type::Integer => (0..=max).map(Value::Int).collect(),
            Type::Boolean => vec![Value::Bool(false), Value::Bool(true)],
            _ => vec![Value::Ref(None)],
        };
        out = out
            .into_iter()
            .flat_map(|prefix| {
                choices.iter().map(move |c| {
                    let mut v = prefix.clone();
                    v.push(c.clone());
                    v
                })
            })
            .collect();
    }
    out
}

/// Runs every creation procedure of the root class on every bounded input.
pub fn explore(tp: &TypedProgram, max: i64) -> Vec<(String, Vec<Value>, Run)> {
    let root = tp.program.root.as_ref().expect("program has a root");
    let class = tp.class(&root.class).expect("root class");
    let mut out = Vec::new();
    for creator in &class.creators {
        let (_, r) = tp.routine(&class.name, creator).expect("creator");
        let formals: Vec<Type> = r.formals.iter().map(|f| f.ty.clone()).collect();
        for args in inputs(&formals, max) {
            let run = Interpreter::new(tp).run_creation(&class.name, creator, args.clone());
            out.push((creator.clone(), args, run));
        }
    }
    out
}

/// Every creation procedure of every effective class on every bounded
/// input, each followed by one call of every effective routine of the new
/// object on every bounded input.
pub fn explore_all(tp: &TypedProgram, max: i64) -> Vec<(String, Vec<Value>, Run)> {
    let mut out = Vec::new();
    for class in tp.program.classes.iter().filter(|c| !c.deferred) {
        for creator in &class.creators {
            let (_, r) = tp.routine(&class.name, creator).expect("creator");
            let formals: Vec<Type> = r.formals.iter().map(|f| f.ty.clone()).collect();
            for args in inputs(&formals, max) {
                let mut it = Interpreter::new(tp);
                let run = it.run_creation(&class.name, creator, args.clone());
                let label = format!("{}.{creator}", class.name);
                if run != Run::Normal {
                    out.push((label, args, run));
                    continue;
                }
                out.push((label.clone(), args.clone(), run));
                let mut names: Vec<&str> =
                    tp.ancestors(&class.name).iter().flat_map(|c| c.routines.iter().map(|r| r.name.as_str())).collect();
                names.sort();
                names.dedup();
                for name in names {
                    let (_, r) = tp.routine(&class.name, name).expect("routine");
                    if r.is_deferred() {
                        continue;
                    }
                    let formals: Vec<Type> = r.formals.iter().map(|f| f.ty.clone()).collect();
                    for call_args in inputs(&formals, max) {
                        let mut next = it.clone();
                        let run = next.run_call(it.first_object(), name, call_args.clone());
                        let mut all = args.clone();
                        all.extend(call_args);
                        out.push((format!("{label} then {name}"), all, run));
                    }
                }
            }
        }
    }
    out
}
