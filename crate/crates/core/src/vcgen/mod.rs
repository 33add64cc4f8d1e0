//! Verification-condition generation and checking.
//!
//! Each implementation is desugared to loop- and call-free code, turned
//! into a passive control-flow graph and encoded with one boolean per
//! block. Every obligation yields one condition in which only its own
//! assert sites are checked.

pub mod cfg;
pub mod desugar;
pub mod instantiate;
pub mod smt;
pub mod solver;
pub mod wp;

use std::collections::BTreeMap;
use std::fmt::Write;
use std::sync::Arc;

use crate::ivl::{self, ObligationKind, Origin, Program, Sort};
use crate::span::Span;

pub use solver::{Outcome, SolverClient, SolverError, SolverVerdict};

/// Identity of one proof obligation: `<procedure>.<kind>.<index>`, the
/// index counting obligations of that kind within the procedure.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ObligationId {
    pub procedure: String,
    pub kind: ObligationKind,
    pub index: usize,
}

impl std::fmt::Display for ObligationId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}.{}.{}", self.procedure, self.kind, self.index)
    }
}

#[derive(Clone, Debug)]
pub struct VerificationCondition {
    pub id: ObligationId,
    pub origin: Origin,
    /// Constants with their sorts.
    pub consts: BTreeMap<String, Sort>,
    /// Hypotheses (block definitions).
    pub hypotheses: Vec<ivl::Expr>,
    /// Ground instances of the program's triggered axioms.
    pub instances: Vec<ivl::Expr>,
    pub goal: ivl::Expr,
    preamble: Arc<String>,
    constants: Arc<smt::Constants>,
}

impl VerificationCondition {
    pub fn span(&self) -> Span {
        self.origin.span
    }

    /// File name for emission.
    pub fn file_name(&self) -> String {
        format!("{}.smt2", self.id)
    }
}

fn build(
    id: ObligationId,
    origin: Origin,
    consts: BTreeMap<String, Sort>,
    hypotheses: Vec<ivl::Expr>,
    goal: ivl::Expr,
    shared: &Shared,
) -> VerificationCondition {
    let roots: Vec<&ivl::Expr> = hypotheses.iter().chain([&goal]).collect();
    let instances = instantiate::instances(&shared.triggered, &roots);
    VerificationCondition {
        id,
        origin,
        consts,
        hypotheses,
        instances,
        goal,
        preamble: shared.preamble.clone(),
        constants: shared.constants.clone(),
    }
}

/// Program-level parts common to all conditions.
struct Shared {
    preamble: Arc<String>,
    constants: Arc<smt::Constants>,
    triggered: Vec<instantiate::Triggered>,
}

impl Shared {
    fn of(p: &Program) -> Shared {
        let (triggered, quantified) = instantiate::classify(&p.axioms);
        Shared {
            preamble: Arc::new(smt::preamble(p, &quantified)),
            constants: Arc::new(smt::Constants::of(p)),
            triggered,
        }
    }
}

fn ids(d: &desugar::Desugared) -> Vec<ObligationId> {
    let mut counters: BTreeMap<ObligationKind, usize> = BTreeMap::new();
    d.obligations
        .iter()
        .map(|o| {
            let n = counters.entry(o.kind).or_insert(0);
            *n += 1;
            ObligationId { procedure: d.procedure.clone(), kind: o.kind, index: *n }
        })
        .collect()
}

fn desugared(p: &Program) -> Vec<desugar::Desugared> {
    p.implementations
        .iter()
        .map(|imp| {
            let proc = p.procedure(&imp.name).expect("implementation has a procedure");
            desugar::desugar(p, proc, imp)
        })
        .collect()
}

/// One condition per obligation, in implementation order and then in
/// obligation order.
pub fn generate_vcs(p: &Program) -> Vec<VerificationCondition> {
    let shared = Shared::of(p);
    let mut out = Vec::new();
    for d in desugared(p) {
        let g = cfg::passive_graph(&d);
        for (i, id) in ids(&d).into_iter().enumerate() {
            let (defs, entry) = cfg::block_equations(&g, i);
            let mut consts = g.consts.clone();
            let mut hyps = Vec::new();
            for (name, def) in defs {
                consts.insert(name.clone(), Sort::Bool);
                hyps.push(ivl::bin(ivl::BinOp::Iff, ivl::var(&name), def));
            }
            out.push(build(id, d.obligations[i].origin.clone(), consts, hyps, ivl::var(&entry), &shared));
        }
    }
    out
}

/// The same conditions computed by structured weakest preconditions.
pub fn generate_vcs_wp(p: &Program) -> Vec<VerificationCondition> {
    let shared = Shared::of(p);
    let mut out = Vec::new();
    for d in desugared(p) {
        for (i, id) in ids(&d).into_iter().enumerate() {
            let (goal, consts) = wp::wp(&d, i);
            out.push(build(id, d.obligations[i].origin.clone(), consts, vec![], goal, &shared));
        }
    }
    out
}

/// SMT-LIB2 script asserting the negated condition.
pub fn emit_smt(vc: &VerificationCondition) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "; {} at {}: {}", vc.id, vc.origin.span, vc.origin.note.replace('\n', " "));
    out.push_str(&vc.preamble);
    for (n, s) in &vc.consts {
        let _ = writeln!(out, "(declare-const {} {})", smt::symbol(n), smt::sort(*s));
    }
    for h in vc.hypotheses.iter().chain(&vc.instances) {
        let _ = writeln!(out, "(assert {})", smt::expr(h, &vc.constants));
    }
    let _ = writeln!(out, "(assert (not {}))", smt::expr(&vc.goal, &vc.constants));
    out.push_str("(check-sat)\n");
    out
}

/// Option retried on an inconclusive answer. Dropping extensionality only
/// weakens the array theory, so `unsat` stays sound while quantified frame
/// conditions stop blocking model construction.
const RETRY_OPTION: &str = "(set-option :smt.array.extensional false)\n";

pub fn check(vc: &VerificationCondition, solver: &SolverClient) -> Result<SolverVerdict, SolverError> {
    let script = emit_smt(vc);
    let first = solver.check(&script)?;
    let Outcome::Unknown { reason } = &first.outcome else { return Ok(first) };
    if reason == "timeout" {
        return Ok(first);
    }
    match solver.check(&format!("{RETRY_OPTION}{script}")) {
        Ok(v) if !matches!(v.outcome, Outcome::Unknown { .. }) => {
            Ok(SolverVerdict { outcome: v.outcome, time: first.time + v.time })
        }
        _ => Ok(first),
    }
}
