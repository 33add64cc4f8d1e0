//! Pretty-printer producing re-parseable Lite-Eiffel text.

use std::fmt::Write;

use super::ast::*;

pub fn print_program(p: &Program) -> String {
    let mut out = String::new();
    if let Some(r) = &p.root {
        let _ = writeln!(out, "root {}.{}\n", r.class, r.routine);
    }
    for c in &p.classes {
        print_class(&mut out, c);
        out.push('\n');
    }
    out
}

fn print_class(out: &mut String, c: &ClassDecl) {
    if c.deferred {
        out.push_str("deferred ");
    }
    let _ = write!(out, "class {}", c.name);
    if let Some(p) = &c.parent {
        let _ = write!(out, " inherit {p}");
        if !c.redefines.is_empty() {
            let _ = write!(out, " redefine {} end", c.redefines.join(", "));
        }
    }
    out.push('\n');
    if !c.creators.is_empty() {
        let _ = writeln!(out, "create {}", c.creators.join(", "));
    }
    if !c.attributes.is_empty() || !c.routines.is_empty() {
        out.push_str("feature\n");
        for a in &c.attributes {
            let _ = writeln!(out, "  {}: {}", a.name, a.ty);
        }
        for r in &c.routines {
            print_routine(out, r);
        }
    }
    if !c.invariant.is_empty() {
        out.push_str("invariant\n");
        print_clauses(out, &c.invariant, 2);
    }
    out.push_str("end\n");
}

fn vars(vs: &[Var]) -> String {
    vs.iter().map(|v| format!("{}: {}", v.name, v.ty)).collect::<Vec<_>>().join("; ")
}

fn print_routine(out: &mut String, r: &Routine) {
    out.push_str("  ");
    if r.pure {
        out.push_str("pure ");
    }
    out.push_str(&r.name);
    if !r.formals.is_empty() {
        let _ = write!(out, " ({})", vars(&r.formals));
    }
    if let Some(t) = &r.result {
        let _ = write!(out, ": {t}");
    }
    out.push('\n');
    let c = &r.contract;
    section(out, "require", &c.require);
    section(out, "require else", &c.require_else);
    if let Some(m) = &r.modify {
        let items: Vec<String> = m
            .iter()
            .map(|t| match &t.receiver {
                Some(rc) => format!("{rc}.{}", t.attribute),
                None => t.attribute.clone(),
            })
            .collect();
        let _ = writeln!(out, "    modify {}", items.join(", "));
    }
    if !r.locals.is_empty() {
        let _ = writeln!(out, "    local {}", vars(&r.locals));
    }
    match &r.body {
        None => out.push_str("    deferred\n"),
        Some(b) => {
            out.push_str("    do\n");
            print_stmts(out, &b.stmts, 6);
            if let Some(rescue) = &b.rescue {
                out.push_str("    rescue\n");
                print_stmts(out, rescue, 6);
            }
        }
    }
    section(out, "ensure", &c.ensure);
    section(out, "ensure then", &c.ensure_then);
    section(out, "rescue invariant", &c.rescue_invariant);
    out.push_str("    end\n");
}

fn section(out: &mut String, kw: &str, clauses: &[Clause]) {
    if clauses.is_empty() {
        return;
    }
    let _ = writeln!(out, "    {kw}");
    print_clauses(out, clauses, 6);
}

fn print_clauses(out: &mut String, clauses: &[Clause], indent: usize) {
    for c in clauses {
        let _ = write!(out, "{:indent$}", "");
        if let Some(t) = &c.tag {
            let _ = write!(out, "{t}: ");
        }
        let _ = writeln!(out, "{};", expr_to_string(&c.expr));
    }
}

fn target_to_string(t: &AssignTarget) -> String {
    match t {
        AssignTarget::Name(n) | AssignTarget::Local(n) => n.clone(),
        AssignTarget::Attr { name, .. } => name.clone(),
        AssignTarget::Result => "Result".into(),
    }
}

fn args_to_string(args: &[Expr]) -> String {
    args.iter().map(expr_to_string).collect::<Vec<_>>().join(", ")
}

fn print_stmts(out: &mut String, stmts: &[Stmt], indent: usize) {
    for s in stmts {
        print_stmt(out, s, indent);
    }
}

fn print_stmt(out: &mut String, s: &Stmt, indent: usize) {
    let pad = " ".repeat(indent);
    match &s.kind {
        StmtKind::Assign { target, value } => {
            let _ = writeln!(out, "{pad}{} := {};", target_to_string(target), expr_to_string(value));
        }
        StmtKind::Create { target, class, creator, args } => {
            let _ = write!(out, "{pad}{} := create {{{class}}}", target_to_string(target));
            if let Some(c) = creator {
                let _ = write!(out, ".{c}");
                if !args.is_empty() {
                    let _ = write!(out, " ({})", args_to_string(args));
                }
            }
            out.push_str(";\n");
        }
        StmtKind::Call { target, routine, args, .. } => {
            out.push_str(&pad);
            if let Some(t) = target {
                let _ = write!(out, "{}.", target_str(t));
            }
            out.push_str(routine);
            if !args.is_empty() {
                let _ = write!(out, " ({})", args_to_string(args));
            }
            out.push_str(";\n");
        }
        StmtKind::If { branches, otherwise } => {
            for (i, (c, body)) in branches.iter().enumerate() {
                let kw = if i == 0 { "if" } else { "elseif" };
                let _ = writeln!(out, "{pad}{kw} {} then", expr_to_string(c));
                print_stmts(out, body, indent + 2);
            }
            if !otherwise.is_empty() {
                let _ = writeln!(out, "{pad}else");
                print_stmts(out, otherwise, indent + 2);
            }
            let _ = writeln!(out, "{pad}end;");
        }
        StmtKind::Loop { init, invariant, until, body } => {
            let _ = writeln!(out, "{pad}from");
            print_stmts(out, init, indent + 2);
            if !invariant.is_empty() {
                let _ = writeln!(out, "{pad}invariant");
                print_clauses(out, invariant, indent + 2);
            }
            let _ = writeln!(out, "{pad}until {}", expr_to_string(until));
            let _ = writeln!(out, "{pad}loop");
            print_stmts(out, body, indent + 2);
            let _ = writeln!(out, "{pad}end;");
        }
        StmtKind::Check(clauses) => {
            let _ = writeln!(out, "{pad}check");
            print_clauses(out, clauses, indent + 2);
            let _ = writeln!(out, "{pad}end;");
        }
        StmtKind::Retry(e) => {
            let _ = writeln!(out, "{pad}Retry := {};", expr_to_string(e));
        }
        StmtKind::Raise => {
            let _ = writeln!(out, "{pad}raise;");
        }
    }
}

/// Renders an expression so that it re-parses to the same tree: every
/// compound operand is parenthesized.
pub fn expr_to_string(e: &Expr) -> String {
    match &e.kind {
        ExprKind::Binary(op, l, r) => {
            format!("{} {} {}", operand(l), op.symbol(), operand(r))
        }
        ExprKind::Unary(UnOp::Not, x) => format!("not {}", operand(x)),
        ExprKind::Unary(UnOp::Neg, x) => format!("-{}", operand(x)),
        _ => postfix_to_string(e),
    }
}

fn operand(e: &Expr) -> String {
    match &e.kind {
        ExprKind::Binary(..) | ExprKind::Unary(..) => format!("({})", expr_to_string(e)),
        ExprKind::Int(n) if *n < 0 => format!("({n})"),
        _ => expr_to_string(e),
    }
}

fn target_str(e: &Expr) -> String {
    match &e.kind {
        ExprKind::Old(_) | ExprKind::Int(_) => format!("({})", expr_to_string(e)),
        _ => postfix_to_string(e),
    }
}

fn postfix_to_string(e: &Expr) -> String {
    match &e.kind {
        ExprKind::Int(n) => n.to_string(),
        ExprKind::Bool(b) => if *b { "True" } else { "False" }.into(),
        ExprKind::Void => "Void".into(),
        ExprKind::Current => "Current".into(),
        ExprKind::Result => "Result".into(),
        ExprKind::ExcV => "ExcV".into(),
        ExprKind::Ident(n) | ExprKind::Local(n) => n.clone(),
        ExprKind::Call { name, args } => format!("{name} ({})", args_to_string(args)),
        ExprKind::Member { target, name, args } => {
            let mut s = format!("{}.{name}", target_str(target));
            if let Some(a) = args {
                let _ = write!(s, " ({})", args_to_string(a));
            }
            s
        }
        ExprKind::Attr { target, name, .. } => format!("{}.{name}", target_str(target)),
        ExprKind::FnCall { target, routine, args, .. } => {
            let mut s = format!("{}.{routine}", target_str(target));
            if !args.is_empty() {
                let _ = write!(s, " ({})", args_to_string(args));
            }
            s
        }
        ExprKind::Old(x) => format!("old {}", operand(x)),
        ExprKind::Binary(..) | ExprKind::Unary(..) => format!("({})", expr_to_string(e)),
    }
}
