//! Lite-Eiffel abstract syntax.
//!
//! The parser produces the unresolved forms (`Ident`, `Member`, `Call` and
//! `AssignTarget::Name`); the type checker rewrites them into the resolved
//! forms (`Local`, `Attr`, `FnCall`, ...) and fills in `Expr::ty`.

use std::fmt;

use crate::span::Span;

pub type Name = String;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Type {
    Integer,
    Boolean,
    /// Reference to an object of the named class. `STRING` is a built-in
    /// opaque class.
    Class(Name),
    /// Type of the `Void` literal; conforms to every class type.
    None,
}

impl Type {
    pub fn is_reference(&self) -> bool {
        matches!(self, Type::Class(_) | Type::None)
    }

    pub fn class_name(&self) -> Option<&str> {
        match self {
            Type::Class(n) => Some(n),
            _ => None,
        }
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Integer => f.write_str("INTEGER"),
            Type::Boolean => f.write_str("BOOLEAN"),
            Type::Class(n) => f.write_str(n),
            Type::None => f.write_str("NONE"),
        }
    }
}

/// Whole-program entry point: `root CLASS.routine`.
#[derive(Clone, Debug, PartialEq)]
pub struct RootDecl {
    pub class: Name,
    pub routine: Name,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Program {
    pub root: Option<RootDecl>,
    pub classes: Vec<ClassDecl>,
}

impl Program {
    pub fn class(&self, name: &str) -> Option<&ClassDecl> {
        self.classes.iter().find(|c| c.name == name)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassDecl {
    pub name: Name,
    pub deferred: bool,
    pub parent: Option<Name>,
    /// Routines listed after `redefine` in the inherit clause.
    pub redefines: Vec<Name>,
    /// Creation procedures listed in the `create` clause.
    pub creators: Vec<Name>,
    pub attributes: Vec<Attribute>,
    pub routines: Vec<Routine>,
    pub invariant: Vec<Clause>,
    pub span: Span,
}

impl ClassDecl {
    pub fn routine(&self, name: &str) -> Option<&Routine> {
        self.routines.iter().find(|r| r.name == name)
    }

    pub fn attribute(&self, name: &str) -> Option<&Attribute> {
        self.attributes.iter().find(|a| a.name == name)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Attribute {
    pub name: Name,
    pub ty: Type,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Var {
    pub name: Name,
    pub ty: Type,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Routine {
    pub name: Name,
    pub pure: bool,
    pub formals: Vec<Var>,
    pub result: Option<Type>,
    pub locals: Vec<Var>,
    /// `None` iff the routine is deferred.
    pub body: Option<Body>,
    pub contract: Contract,
    /// Explicit `modify` clause; overrides frame inference when present.
    pub modify: Option<Vec<ModTarget>>,
    pub span: Span,
}

impl Routine {
    pub fn is_deferred(&self) -> bool {
        self.body.is_none()
    }

    pub fn has_rescue(&self) -> bool {
        self.body.as_ref().is_some_and(|b| b.rescue.is_some())
    }

    pub fn formal(&self, name: &str) -> Option<&Var> {
        self.formals.iter().find(|v| v.name == name)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Body {
    pub stmts: Vec<Stmt>,
    pub rescue: Option<Vec<Stmt>>,
}

/// One entry of a `modify` clause: `attr` (on Current) or `formal.attr`.
#[derive(Clone, Debug, PartialEq)]
pub struct ModTarget {
    pub receiver: Option<Name>,
    pub attribute: Name,
    pub span: Span,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Contract {
    pub require: Vec<Clause>,
    pub require_else: Vec<Clause>,
    pub ensure: Vec<Clause>,
    pub ensure_then: Vec<Clause>,
    pub rescue_invariant: Vec<Clause>,
}

/// An assertion clause, optionally tagged (`positive_value: value >= 0`).
#[derive(Clone, Debug, PartialEq)]
pub struct Clause {
    pub tag: Option<Name>,
    pub expr: Expr,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub enum AssignTarget {
    /// Unresolved name as written.
    Name(Name),
    Local(Name),
    Result,
    /// Attribute of Current, with its declaring class.
    Attr {
        class: Name,
        name: Name,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub enum StmtKind {
    Assign {
        target: AssignTarget,
        value: Expr,
    },
    /// `x := create {C}` or `x := create {C}.make (args)`.
    Create {
        target: AssignTarget,
        class: Name,
        creator: Option<Name>,
        args: Vec<Expr>,
    },
    /// `target.r (args)` or unqualified `r (args)`; after typechecking
    /// `target` is always present (`Current` for unqualified calls) and
    /// `class` names the static class whose routine is invoked.
    Call {
        target: Option<Expr>,
        class: Option<Name>,
        routine: Name,
        args: Vec<Expr>,
    },
    If {
        branches: Vec<(Expr, Vec<Stmt>)>,
        otherwise: Vec<Stmt>,
    },
    Loop {
        init: Vec<Stmt>,
        invariant: Vec<Clause>,
        until: Expr,
        body: Vec<Stmt>,
    },
    Check(Vec<Clause>),
    /// `Retry := e`; only legal inside a rescue clause.
    Retry(Expr),
    /// Raise an exception; sets `ExcV`.
    Raise,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UnOp {
    Not,
    Neg,
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
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Eq => "=",
            BinOp::Ne => "/=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::And => "and",
            BinOp::Or => "or",
            BinOp::Implies => "implies",
        }
    }

    /// Binding strength; higher binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Implies => 1,
            BinOp::Or => 2,
            BinOp::And => 3,
            BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 4,
            BinOp::Add | BinOp::Sub => 5,
            BinOp::Mul => 6,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
    /// Filled in by the type checker.
    pub ty: Option<Type>,
}

impl Expr {
    pub fn new(kind: ExprKind, span: Span) -> Expr {
        Expr { kind, span, ty: None }
    }

    pub fn typed(kind: ExprKind, span: Span, ty: Type) -> Expr {
        Expr { kind, span, ty: Some(ty) }
    }

    /// Pre-order traversal over this expression and all subexpressions.
    pub fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a Expr)) {
        f(self);
        match &self.kind {
            ExprKind::Member { target, args, .. } => {
                target.walk(f);
                for a in args.iter().flatten() {
                    a.walk(f);
                }
            }
            ExprKind::Call { args, .. } => args.iter().for_each(|a| a.walk(f)),
            ExprKind::Attr { target, .. } => target.walk(f),
            ExprKind::FnCall { target, args, .. } => {
                target.walk(f);
                args.iter().for_each(|a| a.walk(f));
            }
            ExprKind::Old(e) | ExprKind::Unary(_, e) => e.walk(f),
            ExprKind::Binary(_, l, r) => {
                l.walk(f);
                r.walk(f);
            }
            _ => {}
        }
    }

    pub fn any(&self, pred: &mut dyn FnMut(&Expr) -> bool) -> bool {
        let mut found = false;
        self.walk(&mut |e| found = found || pred(e));
        found
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExprKind {
    Int(i64),
    Bool(bool),
    Void,
    Current,
    Result,
    ExcV,
    /// Unresolved bare identifier.
    Ident(Name),
    /// Unresolved `target.name` or `target.name (args)`.
    Member {
        target: Box<Expr>,
        name: Name,
        args: Option<Vec<Expr>>,
    },
    /// Unresolved unqualified call `name (args)`.
    Call {
        name: Name,
        args: Vec<Expr>,
    },
    /// Local variable or formal argument.
    Local(Name),
    /// Attribute read; `class` is the declaring class.
    Attr {
        target: Box<Expr>,
        class: Name,
        name: Name,
    },
    /// Call of a function routine; `class` is the static class of the target.
    FnCall {
        target: Box<Expr>,
        class: Name,
        routine: Name,
        args: Vec<Expr>,
    },
    Old(Box<Expr>),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
}
