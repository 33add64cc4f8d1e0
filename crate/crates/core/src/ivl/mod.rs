//! A Boogie-subset intermediate verification language.
//!
//! Programs are built by `translate`, printed as Boogie text by [`print`],
//! checked by [`wf`], and consumed by `vcgen`. Control flow is structured:
//! besides `if` and `while`, bodies may contain labeled blocks and `goto`s
//! that either leave an enclosing labeled block or continue an enclosing
//! labeled loop (see [`structure`]).

pub mod print;
pub mod structure;
pub mod wf;

use std::fmt;

use crate::span::Span;

pub use print::print_boogie;
pub use wf::{well_formed, WellFormednessError};

pub const HEAP: &str = "Heap";
pub const EXCV: &str = "ExcV";
pub const ALLOCATED: &str = "$allocated";
pub const TYPE_FN: &str = "$type";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sort {
    Bool,
    Int,
    Ref,
    /// `[ref, Field]Value`.
    Heap,
    TypeName,
    Field,
    /// Sum of int, bool and ref; the range of the heap.
    Value,
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sort::Bool => "bool",
            Sort::Int => "int",
            Sort::Ref => "ref",
            Sort::Heap => "HeapType",
            Sort::TypeName => "TypeName",
            Sort::Field => "Field",
            Sort::Value => "Value",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
    Implies,
    Iff,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::And => "&&",
            BinOp::Or => "||",
            BinOp::Implies => "==>",
            BinOp::Iff => "<==>",
        }
    }

    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Iff => 1,
            BinOp::Implies => 2,
            BinOp::Or => 3,
            BinOp::And => 4,
            BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 5,
            BinOp::Add | BinOp::Sub => 6,
            BinOp::Mul => 7,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Bool(bool),
    Int(i64),
    Null,
    /// Variable, global, constant or bound variable.
    Var(String),
    Old(Box<Expr>),
    /// `heap[obj, field]`, of sort Value.
    Read(Box<Expr>, Box<Expr>, Box<Expr>),
    /// `heap[obj, field := value]`, of sort Heap.
    Store(Box<Expr>, Box<Expr>, Box<Expr>, Box<Expr>),
    /// Injection of an int/bool/ref into Value.
    Box(Sort, Box<Expr>),
    /// Projection of a Value back to int/bool/ref.
    Unbox(Sort, Box<Expr>),
    App(String, Vec<Expr>),
    Not(Box<Expr>),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    /// `a <: b` over type names.
    Subtype(Box<Expr>, Box<Expr>),
    Forall(Vec<(String, Sort)>, Box<Expr>),
}

pub fn var(name: &str) -> Expr {
    Expr::Var(name.to_string())
}

pub fn bin(op: BinOp, l: Expr, r: Expr) -> Expr {
    Expr::Bin(op, Box::new(l), Box::new(r))
}

pub fn not(e: Expr) -> Expr {
    match e {
        Expr::Bool(b) => Expr::Bool(!b),
        e => Expr::Not(Box::new(e)),
    }
}

pub fn eq(l: Expr, r: Expr) -> Expr {
    bin(BinOp::Eq, l, r)
}

pub fn implies(l: Expr, r: Expr) -> Expr {
    match (&l, &r) {
        (Expr::Bool(true), _) => r,
        (_, Expr::Bool(true)) => Expr::Bool(true),
        _ => bin(BinOp::Implies, l, r),
    }
}

/// Conjunction; `true` for an empty list.
pub fn and_all(items: impl IntoIterator<Item = Expr>) -> Expr {
    items
        .into_iter()
        .filter(|e| *e != Expr::Bool(true))
        .reduce(|a, b| bin(BinOp::And, a, b))
        .unwrap_or(Expr::Bool(true))
}

/// Disjunction; `false` for an empty list.
pub fn or_all(items: impl IntoIterator<Item = Expr>) -> Expr {
    items.into_iter().reduce(|a, b| bin(BinOp::Or, a, b)).unwrap_or(Expr::Bool(false))
}

pub fn read(heap: Expr, obj: Expr, field: &str) -> Expr {
    Expr::Read(Box::new(heap), Box::new(obj), Box::new(var(field)))
}

pub fn unbox(sort: Sort, e: Expr) -> Expr {
    Expr::Unbox(sort, Box::new(e))
}

pub fn boxed(sort: Sort, e: Expr) -> Expr {
    Expr::Box(sort, Box::new(e))
}

pub fn old(e: Expr) -> Expr {
    Expr::Old(Box::new(e))
}

pub fn app(f: &str, args: Vec<Expr>) -> Expr {
    Expr::App(f.to_string(), args)
}

pub fn subtype(a: Expr, b: Expr) -> Expr {
    Expr::Subtype(Box::new(a), Box::new(b))
}

pub fn forall(vars: Vec<(String, Sort)>, body: Expr) -> Expr {
    if vars.is_empty() {
        body
    } else {
        Expr::Forall(vars, Box::new(body))
    }
}

/// `$type(e)`.
pub fn type_of(e: Expr) -> Expr {
    app(TYPE_FN, vec![e])
}

/// `$bool(h[o, $allocated])`.
pub fn allocated(heap: Expr, obj: Expr) -> Expr {
    unbox(Sort::Bool, read(heap, obj, ALLOCATED))
}

impl Expr {
    /// Applies `f` to every direct child.
    pub fn children(&self) -> Vec<&Expr> {
        match self {
            Expr::Bool(_) | Expr::Int(_) | Expr::Null | Expr::Var(_) => vec![],
            Expr::Old(e) | Expr::Box(_, e) | Expr::Unbox(_, e) | Expr::Not(e) | Expr::Neg(e) | Expr::Forall(_, e) => {
                vec![e]
            }
            Expr::Read(a, b, c) => vec![a, b, c],
            Expr::Store(a, b, c, d) => vec![a, b, c, d],
            Expr::App(_, args) => args.iter().collect(),
            Expr::Bin(_, a, b) | Expr::Subtype(a, b) => vec![a, b],
        }
    }

    /// Rebuilds the expression bottom-up, replacing each node by `f(node)`
    /// after its children have been rewritten.
    pub fn map(self, f: &mut dyn FnMut(Expr) -> Expr) -> Expr {
        let bx = |e: Box<Expr>, f: &mut dyn FnMut(Expr) -> Expr| Box::new(e.map(f));
        let e = match self {
            e @ (Expr::Bool(_) | Expr::Int(_) | Expr::Null | Expr::Var(_)) => e,
            Expr::Old(e) => Expr::Old(bx(e, f)),
            Expr::Box(s, e) => Expr::Box(s, bx(e, f)),
            Expr::Unbox(s, e) => Expr::Unbox(s, bx(e, f)),
            Expr::Not(e) => Expr::Not(bx(e, f)),
            Expr::Neg(e) => Expr::Neg(bx(e, f)),
            Expr::Forall(vs, e) => Expr::Forall(vs, bx(e, f)),
            Expr::Read(a, b, c) => Expr::Read(bx(a, f), bx(b, f), bx(c, f)),
            Expr::Store(a, b, c, d) => Expr::Store(bx(a, f), bx(b, f), bx(c, f), bx(d, f)),
            Expr::App(n, args) => Expr::App(n, args.into_iter().map(|a| a.map(f)).collect()),
            Expr::Bin(op, a, b) => Expr::Bin(op, bx(a, f), bx(b, f)),
            Expr::Subtype(a, b) => Expr::Subtype(bx(a, f), bx(b, f)),
        };
        f(e)
    }

    pub fn any(&self, pred: &dyn Fn(&Expr) -> bool) -> bool {
        pred(self) || self.children().into_iter().any(|c| c.any(pred))
    }

    pub fn mentions_var(&self, name: &str) -> bool {
        self.any(&|e| matches!(e, Expr::Var(v) if v == name))
    }

    /// Replaces free occurrences of variables by expressions. Bound
    /// variables shadow the substitution; callers keep bound names disjoint
    /// from substituted expressions' free variables.
    pub fn subst(&self, map: &dyn Fn(&str) -> Option<Expr>) -> Expr {
        match self {
            Expr::Var(v) => map(v).unwrap_or_else(|| self.clone()),
            Expr::Forall(vs, body) => {
                let bound: Vec<&str> = vs.iter().map(|(n, _)| n.as_str()).collect();
                let inner = |n: &str| if bound.contains(&n) { None } else { map(n) };
                Expr::Forall(vs.clone(), Box::new(body.subst(&inner)))
            }
            other => {
                let mut kids = other.children().into_iter().map(|c| c.subst(map));
                rebuild(other, &mut kids)
            }
        }
    }
}

/// Rebuilds `e` with its children taken in order from `kids`.
pub fn rebuild(e: &Expr, kids: &mut dyn Iterator<Item = Expr>) -> Expr {
    let mut next = || Box::new(kids.next().expect("child count"));
    match e {
        Expr::Bool(_) | Expr::Int(_) | Expr::Null | Expr::Var(_) => e.clone(),
        Expr::Old(_) => Expr::Old(next()),
        Expr::Box(s, _) => Expr::Box(*s, next()),
        Expr::Unbox(s, _) => Expr::Unbox(*s, next()),
        Expr::Not(_) => Expr::Not(next()),
        Expr::Neg(_) => Expr::Neg(next()),
        Expr::Forall(vs, _) => Expr::Forall(vs.clone(), next()),
        Expr::Read(..) => {
            let (a, b, c) = (next(), next(), next());
            Expr::Read(a, b, c)
        }
        Expr::Store(..) => {
            let (a, b, c, d) = (next(), next(), next(), next());
            Expr::Store(a, b, c, d)
        }
        Expr::App(n, args) => Expr::App(n.clone(), (0..args.len()).map(|_| *next()).collect()),
        Expr::Bin(op, ..) => {
            let (a, b) = (next(), next());
            Expr::Bin(*op, a, b)
        }
        Expr::Subtype(..) => {
            let (a, b) = (next(), next());
            Expr::Subtype(a, b)
        }
    }
}

/// What a checked assertion establishes; one verification condition is
/// generated per obligation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ObligationKind {
    Postcondition,
    Frame,
    Assert,
    LoopInvariantEntry,
    LoopInvariantInductive,
    CalleePrecondition,
    ClassInvariantExit,
}

impl ObligationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ObligationKind::Postcondition => "postcondition",
            ObligationKind::Frame => "frame",
            ObligationKind::Assert => "assert",
            ObligationKind::LoopInvariantEntry => "loop-invariant-entry",
            ObligationKind::LoopInvariantInductive => "loop-invariant-inductive",
            ObligationKind::CalleePrecondition => "callee-precondition",
            ObligationKind::ClassInvariantExit => "class-invariant-exit",
        }
    }
}

impl fmt::Display for ObligationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Provenance of an assertion or contract clause.
#[derive(Clone, Debug, PartialEq)]
pub struct Origin {
    pub kind: ObligationKind,
    pub span: Span,
    pub note: String,
}

impl Origin {
    pub fn new(kind: ObligationKind, span: Span, note: impl Into<String>) -> Origin {
        Origin { kind, span, note: note.into() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Spec {
    pub expr: Expr,
    /// Free clauses are assumed but never checked.
    pub free: bool,
    pub origin: Origin,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Invariant {
    pub expr: Expr,
    pub origin: Origin,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Stmt {
    Assign(String, Expr),
    Havoc(Vec<String>),
    Assume(Expr),
    Assert(Expr, Origin),
    Call {
        proc: String,
        args: Vec<Expr>,
        rets: Vec<String>,
        span: Span,
    },
    If {
        cond: Expr,
        then: Vec<Stmt>,
        els: Vec<Stmt>,
    },
    While {
        label: Option<String>,
        cond: Expr,
        invariants: Vec<Invariant>,
        body: Vec<Stmt>,
    },
    /// Labeled block; the label names the point right after the block.
    Block {
        label: String,
        body: Vec<Stmt>,
    },
    /// Jump to the exit of an enclosing block or to the head of an
    /// enclosing loop with this label.
    Goto(String),
}

impl Stmt {
    /// `Heap[obj, field] := value`.
    pub fn heap_write(obj: Expr, field: &str, value: Expr) -> Stmt {
        Stmt::Assign(
            HEAP.into(),
            Expr::Store(Box::new(var(HEAP)), Box::new(obj), Box::new(var(field)), Box::new(value)),
        )
    }
}

/// A class type constant with its direct parent.
#[derive(Clone, Debug, PartialEq)]
pub struct TypeDecl {
    pub name: String,
    pub parent: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Function {
    pub name: String,
    pub params: Vec<(String, Sort)>,
    pub result: Sort,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Axiom {
    pub expr: Expr,
    pub comment: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Procedure {
    pub name: String,
    pub params: Vec<(String, Sort)>,
    pub returns: Vec<(String, Sort)>,
    pub requires: Vec<Spec>,
    pub ensures: Vec<Spec>,
    pub modifies: Vec<String>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Implementation {
    pub name: String,
    pub locals: Vec<(String, Sort)>,
    pub body: Vec<Stmt>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Program {
    pub types: Vec<TypeDecl>,
    /// Field constants other than `$allocated`, with the sort they store.
    pub fields: Vec<(String, Sort)>,
    pub globals: Vec<(String, Sort)>,
    pub functions: Vec<Function>,
    pub axioms: Vec<Axiom>,
    pub procedures: Vec<Procedure>,
    pub implementations: Vec<Implementation>,
}

impl Program {
    pub fn procedure(&self, name: &str) -> Option<&Procedure> {
        self.procedures.iter().find(|p| p.name == name)
    }

    pub fn implementation(&self, name: &str) -> Option<&Implementation> {
        self.implementations.iter().find(|i| i.name == name)
    }

    pub fn function(&self, name: &str) -> Option<&Function> {
        self.functions.iter().find(|f| f.name == name)
    }

    /// All field constants including `$allocated`.
    pub fn all_fields(&self) -> Vec<(String, Sort)> {
        let mut v = vec![(ALLOCATED.to_string(), Sort::Bool)];
        v.extend(self.fields.iter().cloned());
        v
    }

    /// Reflexive-transitive subtype pairs `(sub, sup)` over declared types.
    pub fn subtype_pairs(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        for t in &self.types {
            let mut cur = Some(t.name.clone());
            let mut guard = 0;
            while let Some(c) = cur {
                out.push((t.name.clone(), c.clone()));
                cur = self.types.iter().find(|d| d.name == c).and_then(|d| d.parent.clone());
                guard += 1;
                if guard > self.types.len() {
                    break;
                }
            }
        }
        out
    }
}

/// Walks statements recursively in pre-order.
pub fn walk_stmts<'a>(stmts: &'a [Stmt], f: &mut dyn FnMut(&'a Stmt)) {
    for s in stmts {
        f(s);
        match s {
            Stmt::If { then, els, .. } => {
                walk_stmts(then, f);
                walk_stmts(els, f);
            }
            Stmt::While { body, .. } | Stmt::Block { body, .. } => walk_stmts(body, f),
            _ => {}
        }
    }
}

/// Variables syntactically assigned (or havocked, or modified by calls) in
/// `stmts`, in first-occurrence order.
pub fn assigned_vars(stmts: &[Stmt], program: &Program) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    let mut add = |v: &str| {
        if !out.iter().any(|x| x == v) {
            out.push(v.to_string());
        }
    };
    walk_stmts(stmts, &mut |s| match s {
        Stmt::Assign(v, _) => add(v),
        Stmt::Havoc(vs) => vs.iter().for_each(|v| add(v)),
        Stmt::Call { proc, rets, .. } => {
            rets.iter().for_each(|v| add(v));
            if let Some(p) = program.procedure(proc) {
                p.modifies.iter().for_each(|v| add(v));
            }
        }
        _ => {}
    });
    out
}
