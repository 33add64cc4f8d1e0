mod common;

use lev::frontend::ast::{BinOp, Expr, ExprKind, StmtKind, UnOp};
use lev::frontend::{self, check_source, parse, print_program, FrontendError};
use lev::Span;
use proptest::prelude::*;

fn type_errors(src: &str) -> Vec<String> {
    match check_source(src) {
        Err(FrontendError::Type(errs)) => errs.into_iter().map(|e| e.message).collect(),
        Err(e) => panic!("expected type errors, got {e}"),
        Ok(_) => panic!("expected type errors"),
    }
}

const SHELL: &str = "class A
create make
feature
  x: INTEGER
  b: BOOLEAN
  make
    do
BODY
    end
end
";

fn in_shell(body: &str) -> String {
    SHELL.replace("BODY", body)
}

#[test]
fn expression_example_typechecks() {
    let tp = common::typed(&common::corpus_source("expression.le"));
    assert!(tp.is_descendant("CONST", "EXP"));
    assert!(tp.is_descendant("PLUS", "EXP"));
    let (decl, eval) = tp.routine("CONST", "eval").unwrap();
    assert_eq!(decl.name, "CONST");
    assert_eq!(eval.contract.ensure_then.len(), 1);
    assert_eq!(tp.declaration_chain("CONST", "eval").len(), 2);
    assert_eq!(tp.origin("CONST", "eval").unwrap().0.name, "EXP");
}

#[test]
fn whole_corpus_typechecks() {
    for path in lev::driver::corpus_files(&common::corpus_dir()).unwrap() {
        let src = common::read(&path);
        check_source(&src).unwrap_or_else(|e| panic!("{}: {e:?}", path.display()));
    }
}

#[test]
fn typechecker_resolves_names() {
    let tp = common::typed(&in_shell("      x := x + 1\n      check x > 0 end"));
    let make = tp.routine("A", "make").unwrap().1;
    let stmts = &make.body.as_ref().unwrap().stmts;
    let StmtKind::Check(clauses) = &stmts[1].kind else { panic!() };
    let ExprKind::Binary(BinOp::Gt, l, _) = &clauses[0].expr.kind else { panic!() };
    assert!(matches!(&l.kind, ExprKind::Attr { class, name, .. } if class == "A" && name == "x"));
}

#[test]
fn rejects_ill_typed_assignment() {
    let errs = type_errors(&in_shell("      x := True"));
    assert_eq!(errs.len(), 1, "{errs:?}");
}

#[test]
fn rejects_non_boolean_condition() {
    assert_eq!(type_errors(&in_shell("      if x then x := 1 end")).len(), 1);
}

#[test]
fn rejects_unknown_name() {
    let errs = type_errors(&in_shell("      x := y"));
    assert!(errs[0].contains('y'), "{errs:?}");
}

#[test]
fn rejects_old_outside_postcondition() {
    assert!(!type_errors(&in_shell("      check old x = x end")).is_empty());
}

#[test]
fn rejects_retry_outside_rescue() {
    let err = parse(&in_shell("      Retry := True")).unwrap_err();
    assert!(err.message.contains("rescue"), "{err}");
}

#[test]
fn rejects_unknown_parent() {
    let src = "class B inherit NOPE\nfeature\n  y: INTEGER\nend\n";
    assert!(!type_errors(src).is_empty());
}

#[test]
fn reports_every_type_error() {
    let errs = type_errors(&in_shell("      x := True\n      b := 1"));
    assert_eq!(errs.len(), 2, "{errs:?}");
}

#[test]
fn parse_error_carries_position() {
    let err = parse("class A\nfeature\n  x: INTEGER\n  f do x := end\nend\n").unwrap_err();
    assert_eq!(err.span.line, 4);
    assert!(!err.expected.is_empty() || !err.message.is_empty());
}

#[test]
fn printed_corpus_reparses_to_same_text() {
    for path in lev::driver::corpus_files(&common::corpus_dir()).unwrap() {
        let once = print_program(&parse(&common::read(&path)).unwrap());
        let twice = print_program(&parse(&once).unwrap_or_else(|e| panic!("{}: {e}\n{once}", path.display())));
        assert_eq!(once, twice, "{}", path.display());
    }
}

/// Structural equality ignoring spans and types.
fn same(a: &Expr, b: &Expr) -> bool {
    match (&a.kind, &b.kind) {
        (ExprKind::Binary(o1, l1, r1), ExprKind::Binary(o2, l2, r2)) => o1 == o2 && same(l1, l2) && same(r1, r2),
        (ExprKind::Unary(o1, x1), ExprKind::Unary(o2, x2)) => o1 == o2 && same(x1, x2),
        (ExprKind::Old(x1), ExprKind::Old(x2)) => same(x1, x2),
        (ExprKind::Member { target: t1, name: n1, args: a1 }, ExprKind::Member { target: t2, name: n2, args: a2 }) => {
            n1 == n2
                && same(t1, t2)
                && match (a1, a2) {
                    (None, None) => true,
                    (Some(x), Some(y)) => x.len() == y.len() && x.iter().zip(y).all(|(p, q)| same(p, q)),
                    _ => false,
                }
        }
        (x, y) => x == y,
    }
}

fn leaf() -> impl Strategy<Value = Expr> {
    let s = Span::default();
    prop_oneof![
        (0i64..1000).prop_map(move |n| Expr::new(ExprKind::Int(n), s)),
        any::<bool>().prop_map(move |b| Expr::new(ExprKind::Bool(b), s)),
        prop::sample::select(vec!["x", "y", "count"]).prop_map(move |n| Expr::new(ExprKind::Ident(n.into()), s)),
        Just(Expr::new(ExprKind::Void, s)),
        Just(Expr::new(ExprKind::Current, s)),
        Just(Expr::new(ExprKind::Result, s)),
    ]
}

fn expr() -> impl Strategy<Value = Expr> {
    let s = Span::default();
    let ops = vec![
        BinOp::Add,
        BinOp::Sub,
        BinOp::Mul,
        BinOp::Eq,
        BinOp::Ne,
        BinOp::Lt,
        BinOp::Le,
        BinOp::Gt,
        BinOp::Ge,
        BinOp::And,
        BinOp::Or,
        BinOp::Implies,
    ];
    leaf().prop_recursive(4, 24, 3, move |inner| {
        prop_oneof![
            (prop::sample::select(ops.clone()), inner.clone(), inner.clone())
                .prop_map(move |(op, l, r)| Expr::new(ExprKind::Binary(op, Box::new(l), Box::new(r)), s)),
            (prop::sample::select(vec![UnOp::Not, UnOp::Neg]), inner.clone())
                .prop_map(move |(op, x)| Expr::new(ExprKind::Unary(op, Box::new(x)), s)),
            inner.clone().prop_map(move |x| Expr::new(ExprKind::Old(Box::new(x)), s)),
            (inner.clone(), prop::sample::select(vec!["item", "next"])).prop_map(move |(t, n)| Expr::new(
                ExprKind::Member { target: Box::new(t), name: n.into(), args: None },
                s
            )),
            (inner.clone(), inner).prop_map(move |(t, a)| {
                Expr::new(ExprKind::Member { target: Box::new(t), name: "at".into(), args: Some(vec![a]) }, s)
            }),
        ]
    })
}

fn checked(src: &str) -> Expr {
    let p = parse(src).unwrap_or_else(|e| panic!("{e}\n{src}"));
    let body = p.classes[0].routines[0].body.as_ref().unwrap();
    let StmtKind::Check(c) = &body.stmts[0].kind else { panic!() };
    c[0].expr.clone()
}

proptest! {
    #[test]
    fn expression_print_parse_roundtrip(e in expr()) {
        let text = frontend::printer::expr_to_string(&e);
        let src = in_shell(&format!("      check {text} end"));
        let back = checked(&src);
        prop_assert!(same(&e, &back), "{} reparsed as {}", text, frontend::printer::expr_to_string(&back));
        let again = print_program(&parse(&src).unwrap());
        prop_assert!(same(&e, &checked(&again)));
    }
}
