//! SMT-LIB2 rendering of IVL sorts, expressions and program preambles.

use std::collections::BTreeSet;
use std::fmt::Write;

use crate::ivl::{Axiom, BinOp, Expr, Program, Sort, TYPE_FN};

pub fn sort(s: Sort) -> &'static str {
    match s {
        Sort::Bool => "Bool",
        Sort::Int => "Int",
        Sort::Ref => "Ref",
        Sort::Heap => "HeapType",
        Sort::TypeName => "TypeName",
        Sort::Field => "Field",
        Sort::Value => "Value",
    }
}

pub fn symbol(name: &str) -> String {
    format!("|{}|", name.replace(['|', '\\'], "_"))
}

fn field_symbol(name: &str) -> String {
    symbol(&format!("F:{name}"))
}

fn type_symbol(name: &str) -> String {
    symbol(&format!("T:{name}"))
}

/// Names of the program's type and field constants, which are rendered as
/// datatype constructors.
#[derive(Clone, Debug, Default)]
pub struct Constants {
    pub types: BTreeSet<String>,
    pub fields: BTreeSet<String>,
}

impl Constants {
    pub fn of(p: &Program) -> Constants {
        Constants {
            types: p.types.iter().map(|t| t.name.clone()).collect(),
            fields: p.all_fields().into_iter().map(|(f, _)| f).collect(),
        }
    }
}

/// Heap values are integers: ints box to themselves, booleans to 0/1 and
/// references through an injection.
const VALUE_ENCODING: &str = "(define-sort Value () Int)
(define-fun |$box_int| ((x Int)) Value x)
(define-fun |$int| ((v Value)) Int v)
(define-fun |$box_bool| ((x Bool)) Value (ite x 1 0))
(define-fun |$bool| ((v Value)) Bool (not (= v 0)))
(declare-fun |$box_ref| (Ref) Value)
(declare-fun |$ref| (Value) Ref)
(assert (forall ((x Ref)) (! (= (|$ref| (|$box_ref| x)) x) :pattern ((|$box_ref| x)))))
";

/// Declarations shared by every condition of a program: sorts, the
/// subtype relation, uninterpreted functions and the given axioms.
pub fn preamble(p: &Program, axioms: &[Axiom]) -> String {
    let k = Constants::of(p);
    let mut out = String::new();
    out.push_str("(set-logic ALL)\n(set-option :produce-models true)\n");
    out.push_str("(declare-sort Ref 0)\n(declare-const |null| Ref)\n");
    let ctors = |names: &BTreeSet<String>, f: fn(&str) -> String| {
        names.iter().map(|n| format!("({})", f(n))).collect::<Vec<_>>().join(" ")
    };
    if k.types.is_empty() {
        out.push_str("(declare-sort TypeName 0)\n");
    } else {
        let _ = writeln!(out, "(declare-datatypes ((TypeName 0)) (({})))", ctors(&k.types, type_symbol));
    }
    let _ = writeln!(out, "(declare-datatypes ((Field 0)) (({})))", ctors(&k.fields, field_symbol));
    out.push_str(VALUE_ENCODING);
    out.push_str("(define-sort HeapType () (Array Ref (Array Field Value)))\n");
    let _ = writeln!(out, "(declare-fun {} (Ref) TypeName)", symbol(TYPE_FN));
    let pairs: Vec<String> = p
        .subtype_pairs()
        .iter()
        .map(|(a, b)| format!("(and (= a {}) (= b {}))", type_symbol(a), type_symbol(b)))
        .collect();
    let body = match pairs.len() {
        0 => "false".to_string(),
        1 => pairs[0].clone(),
        _ => format!("(or {})", pairs.join(" ")),
    };
    let _ = writeln!(out, "(define-fun |$subtype| ((a TypeName) (b TypeName)) Bool {body})");
    for f in &p.functions {
        let params: Vec<&str> = f.params.iter().map(|(_, s)| sort(*s)).collect();
        let _ = writeln!(out, "(declare-fun {} ({}) {})", symbol(&f.name), params.join(" "), sort(f.result));
    }
    for a in axioms {
        if let Some(c) = &a.comment {
            let _ = writeln!(out, "; {c}");
        }
        let _ = writeln!(out, "(assert {})", expr(&a.expr, &k));
    }
    out
}

pub fn expr(e: &Expr, k: &Constants) -> String {
    let mut out = String::new();
    render(e, k, &mut Vec::new(), &mut out);
    out
}

fn render(e: &Expr, k: &Constants, bound: &mut Vec<String>, out: &mut String) {
    let app = |head: &str, args: &[&Expr], bound: &mut Vec<String>, out: &mut String| {
        out.push('(');
        out.push_str(head);
        for a in args {
            out.push(' ');
            render(a, k, bound, out);
        }
        out.push(')');
    };
    match e {
        Expr::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Expr::Int(n) if *n < 0 => {
            let _ = write!(out, "(- {})", n.unsigned_abs());
        }
        Expr::Int(n) => {
            let _ = write!(out, "{n}");
        }
        Expr::Null => out.push_str("|null|"),
        Expr::Var(v) => {
            if bound.iter().any(|b| b == v) {
                out.push_str(&symbol(v))
            } else if k.fields.contains(v) {
                out.push_str(&field_symbol(v))
            } else if k.types.contains(v) {
                out.push_str(&type_symbol(v))
            } else {
                out.push_str(&symbol(v))
            }
        }
        Expr::Old(x) => render(x, k, bound, out),
        Expr::Read(h, o, f) => {
            out.push_str("(select (select ");
            render(h, k, bound, out);
            out.push(' ');
            render(o, k, bound, out);
            out.push_str(") ");
            render(f, k, bound, out);
            out.push(')');
        }
        Expr::Store(h, o, f, v) => {
            let mut hs = String::new();
            render(h, k, bound, &mut hs);
            let mut os = String::new();
            render(o, k, bound, &mut os);
            let _ = write!(out, "(store {hs} {os} (store (select {hs} {os}) ");
            render(f, k, bound, out);
            out.push(' ');
            render(v, k, bound, out);
            out.push_str("))");
        }
        Expr::Box(s, x) => app(box_ctor(*s), &[x], bound, out),
        Expr::Unbox(s, x) => app(unbox_sel(*s), &[x], bound, out),
        Expr::App(f, args) if args.is_empty() => out.push_str(&symbol(f)),
        Expr::App(f, args) => app(&symbol(f), &args.iter().collect::<Vec<_>>(), bound, out),
        Expr::Not(x) => app("not", &[x], bound, out),
        Expr::Neg(x) => app("-", &[x], bound, out),
        Expr::Bin(BinOp::Ne, l, r) => {
            out.push_str("(not ");
            app("=", &[l, r], bound, out);
            out.push(')');
        }
        Expr::Bin(op, l, r) => {
            let head = match op {
                BinOp::Add => "+",
                BinOp::Sub => "-",
                BinOp::Mul => "*",
                BinOp::Eq | BinOp::Iff => "=",
                BinOp::Lt => "<",
                BinOp::Le => "<=",
                BinOp::Gt => ">",
                BinOp::Ge => ">=",
                BinOp::And => "and",
                BinOp::Or => "or",
                BinOp::Implies => "=>",
                BinOp::Ne => unreachable!(),
            };
            app(head, &[l, r], bound, out)
        }
        Expr::Subtype(a, b) => app("|$subtype|", &[a, b], bound, out),
        Expr::Forall(vs, body) => {
            out.push_str("(forall (");
            for (i, (n, s)) in vs.iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                let _ = write!(out, "({} {})", symbol(n), sort(*s));
            }
            out.push_str(") ");
            let depth = bound.len();
            bound.extend(vs.iter().map(|(n, _)| n.clone()));
            render(body, k, bound, out);
            bound.truncate(depth);
            out.push(')');
        }
    }
}

fn box_ctor(s: Sort) -> &'static str {
    match s {
        Sort::Int => "|$box_int|",
        Sort::Bool => "|$box_bool|",
        _ => "|$box_ref|",
    }
}

fn unbox_sel(s: Sort) -> &'static str {
    match s {
        Sort::Int => "|$int|",
        Sort::Bool => "|$bool|",
        _ => "|$ref|",
    }
}
