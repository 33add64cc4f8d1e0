mod common;

use std::time::Duration;

use lev::ivl::{self, BinOp, Expr, Implementation, ObligationKind, Origin, Procedure, Program, Sort, Stmt};
use lev::vcgen::{self, emit_smt, generate_vcs, generate_vcs_wp, Outcome, SolverClient, SolverError};
use lev::Span;

fn single(body: Vec<Stmt>, locals: Vec<(String, Sort)>) -> Program {
    Program {
        procedures: vec![Procedure {
            name: "P".into(),
            params: vec![],
            returns: vec![],
            requires: vec![],
            ensures: vec![],
            modifies: vec![],
            span: Span::default(),
        }],
        implementations: vec![Implementation { name: "P".into(), locals, body }],
        ..Program::default()
    }
}

fn assert_stmt(e: Expr) -> Stmt {
    Stmt::Assert(e, Origin::new(ObligationKind::Assert, Span::default(), "check"))
}

fn outcome(p: &Program) -> Vec<Outcome> {
    let solver = SolverClient::default();
    generate_vcs(p).iter().map(|vc| vcgen::check(vc, &solver).unwrap().outcome).collect()
}

macro_rules! need_solver {
    () => {
        if !common::solver_available() {
            eprintln!("z3 not found; skipping");
            return;
        }
    };
}

#[test]
fn assert_true_is_valid() {
    need_solver!();
    let p = single(vec![assert_stmt(Expr::Bool(true))], vec![]);
    let vcs = generate_vcs(&p);
    assert_eq!(vcs.len(), 1);
    assert_eq!(vcs[0].id.to_string(), "P.assert.1");
    let v = vcgen::check(&vcs[0], &SolverClient::default()).unwrap();
    assert_eq!(v.outcome, Outcome::Valid);
    assert!(v.time < vcgen::solver::DEFAULT_TIMEOUT);
}

#[test]
fn assignment_then_assert_is_valid() {
    need_solver!();
    let body = vec![Stmt::Assign("x".into(), Expr::Int(5)), assert_stmt(ivl::eq(ivl::var("x"), Expr::Int(5)))];
    let p = single(body, vec![("x".into(), Sort::Int)]);
    assert_eq!(outcome(&p), [Outcome::Valid]);
}

#[test]
fn false_equation_is_invalid() {
    need_solver!();
    let p = single(vec![assert_stmt(ivl::eq(Expr::Int(0), Expr::Int(1)))], vec![]);
    assert!(matches!(outcome(&p)[..], [Outcome::Invalid { .. }]));
}

#[test]
fn each_assert_is_its_own_obligation() {
    need_solver!();
    let x = || ivl::var("x");
    let body = vec![
        Stmt::Havoc(vec!["x".into()]),
        assert_stmt(ivl::bin(BinOp::Ge, x(), Expr::Int(0))),
        assert_stmt(ivl::bin(BinOp::Ge, x(), Expr::Int(0))),
    ];
    let p = single(body, vec![("x".into(), Sort::Int)]);
    // the second assert may assume the first
    assert!(matches!(outcome(&p)[..], [Outcome::Invalid { .. }, Outcome::Valid]));
}

#[test]
fn branches_join() {
    need_solver!();
    let x = || ivl::var("x");
    let body = vec![
        Stmt::Havoc(vec!["x".into()]),
        Stmt::If {
            cond: ivl::bin(BinOp::Lt, x(), Expr::Int(0)),
            then: vec![Stmt::Assign("x".into(), ivl::bin(BinOp::Sub, Expr::Int(0), x()))],
            els: vec![],
        },
        assert_stmt(ivl::bin(BinOp::Ge, x(), Expr::Int(0))),
        assert_stmt(ivl::bin(BinOp::Gt, x(), Expr::Int(0))),
    ];
    let p = single(body, vec![("x".into(), Sort::Int)]);
    assert!(matches!(outcome(&p)[..], [Outcome::Valid, Outcome::Invalid { .. }]));
}

#[test]
fn smt_script_shape() {
    let p = single(vec![assert_stmt(Expr::Bool(true))], vec![]);
    let vc = &generate_vcs(&p)[0];
    let script = emit_smt(vc);
    assert!(script.starts_with("; P.assert.1"));
    assert!(script.contains("(set-logic ALL)"));
    assert!(script.trim_end().ends_with("(check-sat)"));
    assert!(script.contains("(assert (not "));
    assert_eq!(vc.file_name(), "P.assert.1.smt2");
    assert_eq!(script, emit_smt(&generate_vcs(&p)[0]));
}

#[test]
fn emission_is_deterministic() {
    let src = common::corpus_source("sequence.le");
    let a: Vec<String> = generate_vcs(&common::ivl(&src, false)).iter().map(emit_smt).collect();
    let b: Vec<String> = generate_vcs(&common::ivl(&src, false)).iter().map(emit_smt).collect();
    assert_eq!(a, b);
}

#[test]
fn obligation_ids_are_unique_and_counted_per_kind() {
    let p = common::ivl(&common::corpus_source("transmission.le"), false);
    let vcs = generate_vcs(&p);
    let mut ids: Vec<String> = vcs.iter().map(|v| v.id.to_string()).collect();
    let n = ids.len();
    ids.sort();
    ids.dedup();
    assert_eq!(ids.len(), n);
    assert!(ids.contains(&"CLIENT.run.assert.1".to_string()));
    assert!(ids.contains(&"CLIENT.run.assert.2".to_string()));
    assert_eq!(generate_vcs_wp(&p).len(), n);
}

#[test]
fn missing_solver_is_reported() {
    let vc = &generate_vcs(&single(vec![assert_stmt(Expr::Bool(true))], vec![]))[0];
    let solver = SolverClient::new("/nonexistent/solver -in", Duration::from_secs(1));
    assert!(matches!(vcgen::check(vc, &solver), Err(SolverError::SolverUnavailable { .. })));
}

#[test]
fn gibberish_is_a_protocol_error() {
    let vc = &generate_vcs(&single(vec![assert_stmt(Expr::Bool(true))], vec![]))[0];
    let solver = SolverClient::new("echo hello there", Duration::from_secs(5));
    assert!(matches!(vcgen::check(vc, &solver), Err(SolverError::SolverProtocolError { .. })));
}

#[test]
fn hung_solver_times_out_as_unknown() {
    let vc = &generate_vcs(&single(vec![assert_stmt(Expr::Bool(true))], vec![]))[0];
    let solver = SolverClient::new("sleep 5", Duration::from_millis(200));
    let v = vcgen::check(vc, &solver).unwrap();
    assert_eq!(v.outcome, Outcome::Unknown { reason: "timeout".into() });
    assert!(v.time < Duration::from_secs(4));
}

#[test]
fn responses_are_parsed() {
    use lev::vcgen::solver::parse_response;
    assert_eq!(parse_response("unsat\n").unwrap(), Outcome::Valid);
    assert_eq!(parse_response("\nsuccess\nunsat\n").unwrap(), Outcome::Valid);
    assert!(matches!(parse_response("sat\n(model)\n").unwrap(), Outcome::Invalid { model: Some(m) } if m == "(model)"));
    assert!(matches!(parse_response("unknown\n").unwrap(), Outcome::Unknown { .. }));
    assert!(parse_response("(error \"x\")\n").is_err());
    assert!(parse_response("").is_err());
}

#[test]
fn solver_command_precedence() {
    assert_eq!(SolverClient::resolve_command(Some("cvc5 --lang smt2")), "cvc5 --lang smt2");
    if std::env::var(vcgen::solver::SOLVER_ENV).is_err() {
        assert_eq!(SolverClient::resolve_command(None), vcgen::solver::DEFAULT_COMMAND);
    }
}

fn verdicts(vcs: &[vcgen::VerificationCondition]) -> Vec<(String, &'static str)> {
    let solver = SolverClient::default();
    vcs.iter()
        .map(|vc| {
            let v = match vcgen::check(vc, &solver).unwrap().outcome {
                Outcome::Valid => "valid",
                Outcome::Invalid { .. } => "invalid",
                Outcome::Unknown { .. } => "unknown",
            };
            (vc.id.to_string(), v)
        })
        .collect()
}

#[test]
fn control_flow_and_structured_routes_agree() {
    need_solver!();
    let transmission = common::corpus_source("transmission.le");
    let mutated = common::delete_line(&transmission, "not ExcV implies transmitted");
    let broken = transmission
        .replace("      check\n        t.max_attempts = n\n", "      check\n        t.max_attempts = n + 1\n");
    for src in [transmission, mutated, broken, common::corpus_source("counter.le")] {
        let p = common::ivl(&src, false);
        let a = verdicts(&generate_vcs(&p));
        let b = verdicts(&generate_vcs_wp(&p));
        assert_eq!(a, b);
    }
}

#[test]
fn expression_check_needs_dynamic_axioms() {
    need_solver!();
    let src = common::corpus_source("expression.le");
    let id = "ROOT.main.assert.1";
    let pick = |static_only| {
        let vcs = generate_vcs(&common::ivl(&src, static_only));
        let vc = vcs.into_iter().find(|v| v.id.to_string() == id).unwrap();
        vcgen::check(&vc, &SolverClient::default()).unwrap().outcome
    };
    assert_eq!(pick(false), Outcome::Valid);
    assert!(!matches!(pick(true), Outcome::Valid));
}
