//! Pipeline orchestration, reports and the corpus harness.

use std::fmt::Write as _;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::Serialize;
use thiserror::Error;

use crate::frontend::{self, FrontendError};
use crate::ivl;
use crate::span::Span;
use crate::translate::{self, TranslateError};
use crate::vcgen::{self, ObligationId, Outcome, SolverClient, VerificationCondition};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Verify,
    EmitBoogie,
    EmitSmt,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub inputs: Vec<PathBuf>,
    pub mode: Mode,
    pub static_only: bool,
    pub solver: SolverClient,
    /// Target directory of the emit modes.
    pub output_dir: Option<PathBuf>,
    /// Worker threads for checking; 0 means one per available core.
    pub jobs: usize,
}

impl RunConfig {
    pub fn verify(inputs: Vec<PathBuf>) -> RunConfig {
        RunConfig {
            inputs,
            mode: Mode::Verify,
            static_only: false,
            solver: SolverClient::default(),
            output_dir: None,
            jobs: 0,
        }
    }
}

/// Why a file produced no conditions.
#[derive(Clone, Debug, Error)]
pub enum Diagnostic {
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Parse(frontend::ParseError),
    #[error("{}", .0.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("\n"))]
    Type(Vec<frontend::TypeError>),
    #[error("{0}")]
    Translate(TranslateError),
    #[error("internal error: {0}")]
    Internal(String),
}

impl Diagnostic {
    pub fn spans(&self) -> Vec<Span> {
        match self {
            Diagnostic::Parse(e) => vec![e.span],
            Diagnostic::Type(es) => es.iter().map(|e| e.span).collect(),
            Diagnostic::Translate(e) => vec![e.span()],
            _ => vec![],
        }
    }
}

#[derive(Clone, Debug)]
pub struct ObligationResult {
    pub id: ObligationId,
    pub span: Span,
    pub note: String,
    pub outcome: Outcome,
    pub time: Duration,
}

impl ObligationResult {
    pub fn verdict(&self) -> &'static str {
        match self.outcome {
            Outcome::Valid => "valid",
            Outcome::Invalid { .. } => "invalid",
            Outcome::Unknown { .. } => "unknown",
        }
    }
}

#[derive(Clone, Debug)]
pub struct FileReport {
    pub path: PathBuf,
    pub classes: usize,
    pub loc: usize,
    pub obligations: Vec<ObligationResult>,
    pub diagnostic: Option<Diagnostic>,
    pub time: Duration,
}

impl FileReport {
    fn count(&self, verdict: &str) -> usize {
        self.obligations.iter().filter(|o| o.verdict() == verdict).count()
    }

    pub fn valid(&self) -> usize {
        self.count("valid")
    }

    pub fn invalid(&self) -> usize {
        self.count("invalid")
    }

    pub fn unknown(&self) -> usize {
        self.count("unknown")
    }

    pub fn verified(&self) -> bool {
        self.diagnostic.is_none() && self.obligations.iter().all(|o| o.outcome == Outcome::Valid)
    }

    /// Result for the obligation with this id, if any.
    pub fn obligation(&self, id: &str) -> Option<&ObligationResult> {
        self.obligations.iter().find(|o| o.id.to_string() == id)
    }

    pub fn row(&self) -> CsvRow {
        CsvRow {
            example: self.path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
            classes: self.classes,
            loc: self.loc,
            obligations: self.obligations.len(),
            valid: self.valid(),
            invalid: self.invalid(),
            unknown: self.unknown(),
            seconds: format!("{:.3}", self.time.as_secs_f64()),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct VerificationReport {
    pub files: Vec<FileReport>,
    /// Set in the emit modes, where nothing is sent to the solver.
    pub emitted: bool,
}

impl VerificationReport {
    /// 3 on any front-end or translation error, else 1 if some obligation
    /// is invalid, else 2 if some is unknown, else 0.
    pub fn exit_code(&self) -> i32 {
        if self.files.iter().any(|f| f.diagnostic.is_some()) {
            3
        } else if self.files.iter().any(|f| f.invalid() > 0) {
            1
        } else if self.files.iter().any(|f| f.unknown() > 0) {
            2
        } else {
            0
        }
    }

    pub fn success(&self) -> bool {
        self.exit_code() == 0
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_path(path)?;
        for f in &self.files {
            w.serialize(f.row())?;
        }
        w.flush()?;
        Ok(())
    }

    /// Human-readable summary: failures first, then one line per file.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for f in &self.files {
            if let Some(d) = &f.diagnostic {
                let _ = writeln!(out, "{}: {d}", f.path.display());
            }
            for o in f.obligations.iter().filter(|o| o.outcome != Outcome::Valid) {
                let reason = match &o.outcome {
                    Outcome::Unknown { reason } => format!(" [{reason}]"),
                    _ => String::new(),
                };
                let _ = writeln!(
                    out,
                    "{} {}:{} {}{reason} ({}): {}",
                    o.id.kind,
                    f.path.display(),
                    o.span,
                    o.verdict(),
                    o.id,
                    o.note
                );
            }
        }
        for f in &self.files {
            if self.emitted {
                let status = if f.diagnostic.is_none() { "emitted" } else { "NOT emitted" };
                let _ = writeln!(out, "{}: {} classes, {status}", f.path.display(), f.classes);
                continue;
            }
            let status = if f.verified() { "verified" } else { "NOT verified" };
            let _ = writeln!(
                out,
                "{}: {} classes, {} obligations, {} valid, {} invalid, {} unknown, {:.2}s, {status}",
                f.path.display(),
                f.classes,
                f.obligations.len(),
                f.valid(),
                f.invalid(),
                f.unknown(),
                f.time.as_secs_f64()
            );
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
pub struct CsvRow {
    pub example: String,
    pub classes: usize,
    pub loc: usize,
    pub obligations: usize,
    pub valid: usize,
    pub invalid: usize,
    pub unknown: usize,
    pub seconds: String,
}

/// Non-blank lines that are not comments.
pub fn count_loc(src: &str) -> usize {
    src.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with("--")).count()
}

/// Front end and translation of one source text.
pub fn compile(src: &str, static_only: bool) -> Result<(usize, ivl::Program), Diagnostic> {
    let tp = frontend::check_source(src).map_err(|e| match e {
        FrontendError::Parse(p) => Diagnostic::Parse(p),
        FrontendError::Type(ts) => Diagnostic::Type(ts),
    })?;
    let classes = tp.class_names().filter(|c| c.as_str() != frontend::STRING_CLASS).count();
    let p = translate::translate(&tp, &translate::Options { static_only }).map_err(Diagnostic::Translate)?;
    if let Err(errs) = ivl::well_formed(&p) {
        let msg = errs.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("; ");
        return Err(Diagnostic::Internal(format!("ill-formed translation: {msg}")));
    }
    Ok((classes, p))
}

fn guarded<T>(f: impl FnOnce() -> Result<T, Diagnostic>) -> Result<T, Diagnostic> {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|panic| {
        let msg = panic
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "unexpected failure".into());
        Err(Diagnostic::Internal(msg))
    })
}

/// Checks conditions on a pool of worker threads; results keep the input
/// order.
pub fn check_all(vcs: &[VerificationCondition], solver: &SolverClient, jobs: usize) -> Vec<ObligationResult> {
    let jobs = if jobs == 0 { std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1) } else { jobs };
    let next = Mutex::new(0usize);
    let results: Mutex<Vec<Option<ObligationResult>>> = Mutex::new(vec![None; vcs.len()]);
    std::thread::scope(|s| {
        for _ in 0..jobs.min(vcs.len()) {
            s.spawn(|| loop {
                let i = {
                    let mut n = next.lock().expect("counter lock");
                    let i = *n;
                    *n += 1;
                    i
                };
                let Some(vc) = vcs.get(i) else { break };
                let start = Instant::now();
                let (outcome, time) = match vcgen::check(vc, solver) {
                    Ok(v) => (v.outcome, v.time),
                    Err(e) => (Outcome::Unknown { reason: e.to_string() }, start.elapsed()),
                };
                let r = ObligationResult {
                    id: vc.id.clone(),
                    span: vc.span(),
                    note: vc.origin.note.clone(),
                    outcome,
                    time,
                };
                results.lock().expect("results lock")[i] = Some(r);
            });
        }
    });
    results.into_inner().expect("results lock").into_iter().map(|r| r.expect("every condition checked")).collect()
}

/// Verifies one source text.
pub fn verify_source(path: &Path, src: &str, cfg: &RunConfig) -> FileReport {
    let start = Instant::now();
    let mut report = FileReport {
        path: path.to_path_buf(),
        classes: 0,
        loc: count_loc(src),
        obligations: vec![],
        diagnostic: None,
        time: Duration::ZERO,
    };
    match guarded(|| {
        let (classes, p) = compile(src, cfg.static_only)?;
        Ok((classes, vcgen::generate_vcs(&p)))
    }) {
        Ok((classes, vcs)) => {
            report.classes = classes;
            report.obligations = check_all(&vcs, &cfg.solver, cfg.jobs);
        }
        Err(d) => report.diagnostic = Some(d),
    }
    report.time = start.elapsed();
    report
}

fn emit(path: &Path, src: &str, cfg: &RunConfig, dir: &Path) -> Result<usize, Diagnostic> {
    let (classes, p) = guarded(|| compile(src, cfg.static_only))?;
    let io = |e: std::io::Error| Diagnostic::Io(format!("{}: {e}", dir.display()));
    fs::create_dir_all(dir).map_err(io)?;
    match cfg.mode {
        Mode::EmitBoogie => {
            let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "out".into());
            fs::write(dir.join(format!("{stem}.bpl")), ivl::print_boogie(&p)).map_err(io)?;
        }
        Mode::EmitSmt => {
            for vc in guarded(|| Ok(vcgen::generate_vcs(&p)))? {
                fs::write(dir.join(vc.file_name()), vcgen::emit_smt(&vc)).map_err(io)?;
            }
        }
        Mode::Verify => unreachable!("emit called in verify mode"),
    }
    Ok(classes)
}

/// Runs the configured mode over every input file.
pub fn run(cfg: &RunConfig) -> VerificationReport {
    let mut report = VerificationReport { emitted: cfg.mode != Mode::Verify, ..Default::default() };
    for path in &cfg.inputs {
        let src = match fs::read_to_string(path) {
            Ok(s) => s,
            Err(e) => {
                report.files.push(FileReport {
                    path: path.clone(),
                    classes: 0,
                    loc: 0,
                    obligations: vec![],
                    diagnostic: Some(Diagnostic::Io(format!("{}: {e}", path.display()))),
                    time: Duration::ZERO,
                });
                continue;
            }
        };
        let file = match (cfg.mode, &cfg.output_dir) {
            (Mode::Verify, _) => verify_source(path, &src, cfg),
            (_, dir) => {
                let start = Instant::now();
                let dir = dir.clone().unwrap_or_else(|| PathBuf::from("."));
                let result = emit(path, &src, cfg, &dir);
                FileReport {
                    path: path.clone(),
                    classes: *result.as_ref().unwrap_or(&0),
                    loc: count_loc(&src),
                    obligations: vec![],
                    diagnostic: result.err(),
                    time: start.elapsed(),
                }
            }
        };
        report.files.push(file);
    }
    report
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("corpus directory {0}: {1}")]
    MissingDir(PathBuf, std::io::Error),
}

/// Source files of a corpus directory in name order.
pub fn corpus_files(dir: &Path) -> Result<Vec<PathBuf>, CorpusError> {
    let entries = fs::read_dir(dir).map_err(|e| CorpusError::MissingDir(dir.to_path_buf(), e))?;
    let mut files: Vec<PathBuf> =
        entries.filter_map(|e| e.ok().map(|e| e.path())).filter(|p| p.extension().is_some_and(|x| x == "le")).collect();
    files.sort();
    Ok(files)
}

/// Verifies every `.le` file of `dir`.
pub fn run_corpus(dir: &Path, cfg: &RunConfig) -> Result<VerificationReport, CorpusError> {
    let inputs = corpus_files(dir)?;
    Ok(run(&RunConfig { inputs, mode: Mode::Verify, ..cfg.clone() }))
}
