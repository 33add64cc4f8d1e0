#![allow(dead_code)]

pub mod interp;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use lev::driver::{self, FileReport, RunConfig};
use lev::frontend::{self, TypedProgram};
use lev::ivl::{self, BinOp, Expr};
use lev::translate::{self, Options};

pub fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus")
}

pub fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join("fixtures")
}

pub fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

pub fn corpus_source(name: &str) -> String {
    read(&corpus_dir().join(name))
}

pub fn fixture(name: &str) -> String {
    read(&fixture_dir().join(name))
}

pub fn typed(src: &str) -> TypedProgram {
    frontend::check_source(src).unwrap_or_else(|e| panic!("{e:?}"))
}

pub fn ivl(src: &str, static_only: bool) -> ivl::Program {
    translate::translate(&typed(src), &Options { static_only }).unwrap_or_else(|e| panic!("{e}"))
}

/// Verifies `src` as if read from `name`.
pub fn verify(name: &str, src: &str, static_only: bool) -> FileReport {
    let mut cfg = RunConfig::verify(vec![]);
    cfg.static_only = static_only;
    driver::verify_source(Path::new(name), src, &cfg)
}

/// One seeded mutant: the corpus example and the clause line it deletes.
#[derive(Clone, Debug, serde::Deserialize)]
pub struct Mutant {
    pub name: String,
    pub example: String,
    pub line: String,
}

pub fn mutants() -> Vec<Mutant> {
    let mut rdr = csv::Reader::from_path(corpus_dir().join("mutants.csv")).expect("mutants.csv");
    rdr.deserialize().map(|r| r.expect("mutant row")).collect()
}

/// `src` without the single line whose trimmed text is `line`.
pub fn delete_line(src: &str, line: &str) -> String {
    let hits = src.lines().filter(|l| l.trim() == line).count();
    assert_eq!(hits, 1, "line {line:?} must occur exactly once");
    src.lines().filter(|l| l.trim() != line).map(|l| format!("{l}\n")).collect()
}

pub fn solver_available() -> bool {
    std::process::Command::new("z3").arg("-version").output().is_ok()
}

pub fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

/// Number of conjuncts of a right-nested `&&` chain.
fn conjuncts(e: &Expr) -> usize {
    match e {
        Expr::Bin(BinOp::And, l, r) => conjuncts(l) + conjuncts(r),
        Expr::Bool(true) => 0,
        _ => 1,
    }
}

/// Axioms on predicate `name`, keyed by the class in their type guard,
/// with the number of contract conjuncts each implies.
pub fn post_axioms(p: &ivl::Program, name: &str) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    for a in &p.axioms {
        let Expr::Forall(params, body) = &a.expr else { continue };
        let Expr::Bin(BinOp::Implies, guard, rest) = &**body else { continue };
        let Expr::Bin(BinOp::Implies, app, post) = &**rest else { continue };
        let Expr::App(f, args) = &**app else { continue };
        if f != name {
            continue;
        }
        assert_eq!(args.len(), params.len(), "predicate applied to all bound variables");
        let Expr::Subtype(_, ty) = &**guard else { panic!("type guard expected: {guard:?}") };
        let Expr::Var(y) = &**ty else { panic!() };
        assert!(out.insert(y.clone(), conjuncts(post)).is_none(), "duplicate axiom for {y}");
    }
    out
}
