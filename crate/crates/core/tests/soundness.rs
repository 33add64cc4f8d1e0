//! Verifier verdicts against bounded exhaustive interpretation.

mod common;

use common::interp::{explore, explore_all, Run};

const BOUND: i64 = 3;

#[test]
fn verified_corpus_has_no_runtime_violation() {
    if !common::solver_available() {
        eprintln!("z3 not found; skipping");
        return;
    }
    for path in lev::driver::corpus_files(&common::corpus_dir()).unwrap() {
        let src = common::read(&path);
        let name = path.file_name().unwrap().to_string_lossy().to_string();
        let report = common::verify(&name, &src, false);
        assert!(report.verified(), "{name} does not verify");
        let tp = common::typed(&src);
        let runs = explore(&tp, BOUND);
        assert!(runs.iter().any(|(_, _, r)| *r == Run::Normal), "{name}: no complete run");
        for (creator, args, run) in runs.into_iter().chain(explore_all(&tp, BOUND)) {
            assert!(!matches!(run, Run::Violation(_) | Run::OutOfFuel), "{name} {creator}{args:?}: {run:?}");
        }
    }
}

#[test]
fn interpreter_reports_failed_check() {
    let src = "root A.make
class A
create make
feature
  x: INTEGER
  make (n: INTEGER)
    do
      x := n
      check x < 2 end
    end
end
";
    let runs = explore(&common::typed(src), BOUND);
    let bad: Vec<_> = runs.iter().filter(|(_, _, r)| matches!(r, Run::Violation(_))).collect();
    assert_eq!(bad.len(), 2);
}

#[test]
fn interpreter_retries_until_handler_gives_up() {
    let src = common::corpus_source("transmission.le");
    let runs = explore(&common::typed(&src), 2);
    // line down, no attempts allowed: the rescue gives up and the client's
    // check is never reached
    let give_up: Vec<_> = runs.iter().filter(|(_, _, r)| *r == Run::Exception).collect();
    assert!(!give_up.is_empty());
    assert!(runs.iter().all(|(_, _, r)| matches!(r, Run::Normal | Run::Exception)));
}

#[test]
fn interpreter_catches_invariant_breaking_body() {
    let src = "root A.make
class A
create make
feature
  x: INTEGER
  make (n: INTEGER)
    do
      x := n - 1
    end
invariant
  x >= 0
end
";
    let runs = explore(&common::typed(src), BOUND);
    let bad: Vec<_> = runs
        .iter()
        .filter_map(|(_, a, r)| match r {
            Run::Violation(v) => Some((a.clone(), v.what.clone())),
            _ => None,
        })
        .collect();
    assert_eq!(bad, vec![(vec![common::interp::Value::Int(0)], "class invariant".to_string())]);
}
