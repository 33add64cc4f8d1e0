mod common;

use std::path::Path;
use std::process::{Command, Output};

use lev::driver::{self, CsvRow, Diagnostic, Mode, RunConfig};

fn lev(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lev")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

macro_rules! need_solver {
    () => {
        if !common::solver_available() {
            eprintln!("z3 not found; skipping");
            return;
        }
    };
}

fn corpus(name: &str) -> String {
    common::corpus_dir().join(name).to_string_lossy().into_owned()
}

#[test]
fn expression_verifies_in_dynamic_mode() {
    need_solver!();
    let o = lev(&["verify", &corpus("expression.le")]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains(", verified"));
}

#[test]
fn expression_fails_in_static_mode() {
    need_solver!();
    let o = lev(&["verify", "--static-only", &corpus("expression.le")]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.contains("invalid (ROOT.main.assert.1)"), "{out}");
    // failures come before the summary
    assert!(out.lines().last().unwrap().contains("NOT verified"));
}

#[test]
fn syntax_error_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.le");
    std::fs::write(&bad, "class A\nfeature\n  f do x := end\nend\n").unwrap();
    let o = lev(&["verify", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    let out = stdout(&o);
    assert_eq!(out.matches("parse error").count(), 1, "{out}");
    assert!(out.contains("bad.le: 3:"), "{out}");
}

#[test]
fn type_errors_are_diagnostics() {
    let report = common::verify("t.le", "class A\nfeature\n  x: INTEGER\n  f do x := True end\nend\n", false);
    let Some(Diagnostic::Type(errs)) = &report.diagnostic else { panic!("{:?}", report.diagnostic) };
    assert_eq!(errs.len(), 1);
    assert_eq!(report.diagnostic.as_ref().unwrap().spans()[0].line, 4);
}

#[test]
fn purity_error_is_reported_before_vc_generation() {
    let report = common::verify("p.le", &common::fixture("purity_error.le"), false);
    assert!(report.obligations.is_empty());
    let d = report.diagnostic.expect("diagnostic");
    assert!(matches!(d, Diagnostic::Translate(lev::translate::TranslateError::PurityError { .. })));
    assert_eq!(d.spans()[0].line, 15);
}

#[test]
fn malformed_input_never_crashes() {
    let inputs = [
        "",
        "class",
        "class A feature end end end",
        "root X.y",
        "class A\nfeature\n  f (x: NOPE) do end\nend\n",
        "\u{0}\u{1}",
    ];
    for src in inputs {
        let report = common::verify("m.le", src, false);
        assert!(report.diagnostic.is_some() || report.obligations.is_empty(), "{src:?}");
        assert!(!matches!(report.diagnostic, Some(Diagnostic::Internal(_))), "{src:?}: {:?}", report.diagnostic);
    }
}

#[test]
fn empty_corpus_is_an_empty_table() {
    let dir = tempfile::tempdir().unwrap();
    let report = driver::run_corpus(dir.path(), &RunConfig::verify(vec![])).unwrap();
    assert!(report.files.is_empty());
    assert_eq!(report.exit_code(), 0);
    let o = lev(&["verify", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn missing_corpus_is_an_error() {
    let err = driver::run_corpus(Path::new("/nonexistent/corpus"), &RunConfig::verify(vec![]));
    assert!(matches!(err, Err(driver::CorpusError::MissingDir(..))));
}

#[test]
fn csv_report_has_fixed_columns() {
    need_solver!();
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("report.csv");
    let o = lev(&["verify", "--report", csv_path.to_str().unwrap(), &corpus("transmission.le"), &corpus("cell.le")]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&csv_path).unwrap();
    assert_eq!(text.lines().next().unwrap(), "example,classes,loc,obligations,valid,invalid,unknown,seconds");
    let rows: Vec<CsvRow> = csv::Reader::from_path(&csv_path).unwrap().deserialize().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0].example, "transmission");
    assert_eq!(rows[0].classes, 2);
    assert_eq!(rows[0].valid, rows[0].obligations);
    assert_eq!(rows[0].loc, driver::count_loc(&common::corpus_source("transmission.le")));
    assert_eq!(rows[1].example, "cell");
}

#[test]
fn emit_smt_writes_one_script_per_obligation() {
    let dir = tempfile::tempdir().unwrap();
    let o = lev(&["verify", "--emit-smt", dir.path().to_str().unwrap(), &corpus("transmission.le")]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).trim_end().ends_with("2 classes, emitted"), "{}", stdout(&o));
    let p = common::ivl(&common::corpus_source("transmission.le"), false);
    let vcs = lev::vcgen::generate_vcs(&p);
    for vc in &vcs {
        let written = std::fs::read_to_string(dir.path().join(vc.file_name())).unwrap();
        assert_eq!(written, lev::vcgen::emit_smt(vc));
    }
    assert!(dir.path().join("CLIENT.run.assert.1.smt2").exists());
}

#[test]
fn emit_boogie_writes_program() {
    let dir = tempfile::tempdir().unwrap();
    let o = lev(&["verify", "--emit-boogie", dir.path().to_str().unwrap(), &corpus("transmission.le")]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("transmission.bpl")).unwrap();
    assert_eq!(text, lev::ivl::print_boogie(&common::ivl(&common::corpus_source("transmission.le"), false)));
}

#[test]
fn emit_modes_are_exclusive() {
    let o = lev(&["verify", "--emit-boogie", "a", "--emit-smt", "b", &corpus("transmission.le")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("cannot be used with"));
}

#[test]
fn unavailable_solver_yields_unknown() {
    let o = lev(&["verify", "--solver", "/nonexistent/z3", &corpus("cell.le")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("unknown [solver unavailable"));
}

#[test]
fn solver_flag_overrides_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_lev"))
        .args(["verify", "--solver", "/nonexistent/flag", &corpus("cell.le")])
        .env("LEV_SOLVER", "/nonexistent/env")
        .output()
        .unwrap();
    assert!(stdout(&o).contains("/nonexistent/flag"));
    let o = Command::new(env!("CARGO_BIN_EXE_lev"))
        .args(["verify", &corpus("cell.le")])
        .env("LEV_SOLVER", "/nonexistent/env")
        .output()
        .unwrap();
    assert!(stdout(&o).contains("/nonexistent/env"));
}

#[test]
fn reports_are_deterministic() {
    need_solver!();
    let cfg =
        RunConfig::verify(vec![common::corpus_dir().join("command.le"), common::corpus_dir().join("sequence.le")]);
    let strip = |r: &driver::VerificationReport| {
        r.files
            .iter()
            .map(|f| {
                let mut row = f.row();
                row.seconds.clear();
                let obs: Vec<(String, String, &'static str)> =
                    f.obligations.iter().map(|o| (o.id.to_string(), o.span.to_string(), o.verdict())).collect();
                (row, obs)
            })
            .collect::<Vec<_>>()
    };
    let a = driver::run(&cfg);
    let b = driver::run(&RunConfig { jobs: 1, ..cfg.clone() });
    assert_eq!(strip(&a), strip(&b));
    assert_eq!(cfg.mode, Mode::Verify);
}
