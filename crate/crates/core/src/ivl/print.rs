//! Boogie concrete syntax for IVL programs.

use std::fmt::Write;

use super::*;

pub fn print_boogie(p: &Program) -> String {
    let mut out = String::new();
    out.push_str(PRELUDE);
    out.push('\n');
    for t in &p.types {
        let _ = writeln!(out, "const unique {}: TypeName;", t.name);
    }
    for t in &p.types {
        if let Some(parent) = &t.parent {
            let _ = writeln!(out, "axiom {} <: {};", t.name, parent);
        }
    }
    out.push('\n');
    for (f, _) in p.all_fields() {
        let _ = writeln!(out, "const unique {f}: Field;");
    }
    out.push('\n');
    for (g, s) in &p.globals {
        let _ = writeln!(out, "var {g}: {s};");
    }
    out.push('\n');
    for f in &p.functions {
        let _ = writeln!(out, "function {}({}): {};", f.name, params(&f.params), f.result);
    }
    if !p.functions.is_empty() {
        out.push('\n');
    }
    for a in &p.axioms {
        if let Some(c) = &a.comment {
            let _ = writeln!(out, "// {c}");
        }
        let _ = writeln!(out, "axiom {};", expr(&a.expr));
    }
    for proc in &p.procedures {
        out.push('\n');
        print_procedure(&mut out, proc);
        if let Some(imp) = p.implementation(&proc.name) {
            out.push('\n');
            print_implementation(&mut out, proc, imp);
        }
    }
    out
}

const PRELUDE: &str = "\
type ref;
const null: ref;
type TypeName;
type Field;
type Value;
type HeapType = [ref, Field]Value;

function $box_int(x: int): Value;
function $box_bool(x: bool): Value;
function $box_ref(x: ref): Value;
function $int(v: Value): int;
function $bool(v: Value): bool;
function $ref(v: Value): ref;
axiom (forall x: int :: $int($box_int(x)) == x);
axiom (forall x: bool :: $bool($box_bool(x)) == x);
axiom (forall x: ref :: $ref($box_ref(x)) == x);

function $type(r: ref): TypeName;
";

fn params(ps: &[(String, Sort)]) -> String {
    ps.iter().map(|(n, s)| format!("{n}: {s}")).collect::<Vec<_>>().join(", ")
}

fn print_procedure(out: &mut String, p: &Procedure) {
    let _ = write!(out, "procedure {}({})", p.name, params(&p.params));
    if !p.returns.is_empty() {
        let _ = write!(out, " returns ({})", params(&p.returns));
    }
    out.push_str(";\n");
    for r in &p.requires {
        let free = if r.free { "free " } else { "" };
        let _ = writeln!(out, "  {free}requires {};", expr(&r.expr));
    }
    if !p.modifies.is_empty() {
        let _ = writeln!(out, "  modifies {};", p.modifies.join(", "));
    }
    for e in &p.ensures {
        let free = if e.free { "free " } else { "" };
        let _ = writeln!(out, "  {free}ensures {};", expr(&e.expr));
    }
}

fn print_implementation(out: &mut String, p: &Procedure, imp: &Implementation) {
    let _ = write!(out, "implementation {}({})", p.name, params(&p.params));
    if !p.returns.is_empty() {
        let _ = write!(out, " returns ({})", params(&p.returns));
    }
    out.push_str("\n{\n");
    for (n, s) in &imp.locals {
        let _ = writeln!(out, "  var {n}: {s};");
    }
    if !imp.locals.is_empty() {
        out.push('\n');
    }
    out.push_str("  entry:\n");
    print_stmts(out, &imp.body, 4);
    out.push_str("}\n");
}

/// Prints statements of one list. The exit label of a block is printed on
/// its own line after the block, except when the next statement is a loop
/// carrying the same label, in which case the loop's label stands for both.
pub fn print_stmts(out: &mut String, stmts: &[Stmt], indent: usize) {
    for (i, s) in stmts.iter().enumerate() {
        print_stmt(out, s, indent);
        if let Stmt::Block { label, .. } = s {
            let merged = matches!(stmts.get(i + 1), Some(Stmt::While { label: Some(l), .. }) if l == label);
            if !merged {
                let _ = writeln!(out, "{:w$}{label}:", "", w = indent.saturating_sub(2));
            }
        }
    }
}

fn print_stmt(out: &mut String, s: &Stmt, indent: usize) {
    let pad = " ".repeat(indent);
    match s {
        Stmt::Assign(v, Expr::Store(h, o, f, val)) if v == HEAP && **h == var(HEAP) => {
            let _ = writeln!(out, "{pad}Heap[{}, {}] := {};", expr(o), expr(f), expr(val));
        }
        Stmt::Assign(v, e) => {
            let _ = writeln!(out, "{pad}{v} := {};", expr(e));
        }
        Stmt::Havoc(vs) => {
            let _ = writeln!(out, "{pad}havoc {};", vs.join(", "));
        }
        Stmt::Assume(e) => {
            let _ = writeln!(out, "{pad}assume {};", expr(e));
        }
        Stmt::Assert(e, _) => {
            let _ = writeln!(out, "{pad}assert {};", expr(e));
        }
        Stmt::Call { proc, args, rets, .. } => {
            let args = args.iter().map(expr).collect::<Vec<_>>().join(", ");
            if rets.is_empty() {
                let _ = writeln!(out, "{pad}call {proc}({args});");
            } else {
                let _ = writeln!(out, "{pad}call {} := {proc}({args});", rets.join(", "));
            }
        }
        Stmt::If { cond, then, els } => {
            let _ = writeln!(out, "{pad}if ({}) {{", expr(cond));
            print_stmts(out, then, indent + 2);
            let mut els = els;
            loop {
                match els.as_slice() {
                    [] => break,
                    [Stmt::If { cond, then, els: next }] => {
                        let _ = writeln!(out, "{pad}}} else if ({}) {{", expr(cond));
                        print_stmts(out, then, indent + 2);
                        els = next;
                    }
                    _ => {
                        let _ = writeln!(out, "{pad}}} else {{");
                        print_stmts(out, els, indent + 2);
                        break;
                    }
                }
            }
            let _ = writeln!(out, "{pad}}}");
        }
        Stmt::While { label, cond, invariants, body } => {
            if let Some(l) = label {
                let _ = writeln!(out, "{:w$}{l}:", "", w = indent.saturating_sub(2));
            }
            let _ = writeln!(out, "{pad}while ({})", expr(cond));
            for inv in invariants {
                let _ = writeln!(out, "{pad}  invariant {};", expr(&inv.expr));
            }
            let _ = writeln!(out, "{pad}{{");
            print_stmts(out, body, indent + 2);
            let _ = writeln!(out, "{pad}}}");
        }
        Stmt::Block { body, .. } => print_stmts(out, body, indent),
        Stmt::Goto(l) => {
            let _ = writeln!(out, "{pad}goto {l};");
        }
    }
}

fn box_fn(s: Sort) -> &'static str {
    match s {
        Sort::Int => "int",
        Sort::Bool => "bool",
        _ => "ref",
    }
}

pub fn expr(e: &Expr) -> String {
    match e {
        Expr::Bool(b) => b.to_string(),
        Expr::Int(n) if *n < 0 => format!("({n})"),
        Expr::Int(n) => n.to_string(),
        Expr::Null => "null".into(),
        Expr::Var(v) => v.clone(),
        Expr::Old(x) => format!("old({})", expr(x)),
        Expr::Read(h, o, f) => format!("{}[{}, {}]", map_operand(h), expr(o), expr(f)),
        Expr::Store(h, o, f, v) => format!("{}[{}, {} := {}]", map_operand(h), expr(o), expr(f), expr(v)),
        Expr::Box(s, x) => format!("$box_{}({})", box_fn(*s), expr(x)),
        Expr::Unbox(s, x) => format!("${}({})", box_fn(*s), expr(x)),
        Expr::App(f, args) => format!("{f}({})", args.iter().map(expr).collect::<Vec<_>>().join(", ")),
        Expr::Not(x) => format!("!{}", unary_operand(x)),
        Expr::Neg(x) => format!("-{}", unary_operand(x)),
        Expr::Bin(op, l, r) => {
            let p = op.precedence();
            let assoc = matches!(op, BinOp::And | BinOp::Or | BinOp::Add | BinOp::Mul);
            let left = match &**l {
                Expr::Bin(lop, ..) if lop.precedence() > p || (lop == op && assoc) => expr(l),
                Expr::Bin(..) | Expr::Forall(..) => format!("({})", expr(l)),
                _ => expr(l),
            };
            let right = match &**r {
                Expr::Bin(rop, ..) if rop.precedence() > p => expr(r),
                Expr::Bin(..) | Expr::Forall(..) => format!("({})", expr(r)),
                _ => expr(r),
            };
            format!("{left} {} {right}", op.symbol())
        }
        Expr::Subtype(a, b) => format!("{} <: {}", unary_operand(a), unary_operand(b)),
        Expr::Forall(vs, body) => format!("(forall {} :: {})", params(vs), expr(body)),
    }
}

fn unary_operand(e: &Expr) -> String {
    match e {
        Expr::Bin(..) | Expr::Subtype(..) => format!("({})", expr(e)),
        _ => expr(e),
    }
}

fn map_operand(e: &Expr) -> String {
    match e {
        Expr::Var(_) | Expr::Old(_) | Expr::App(..) => expr(e),
        _ => format!("({})", expr(e)),
    }
}
