//! Substitution-based weakest preconditions over the structured desugared
//! body. Exponential in the number of branches; used to cross-check the
//! block-equation conditions on small programs.

use std::collections::BTreeMap;

use crate::ivl::{self, Expr, Sort};

use super::desugar::{Basic, Desugared};

/// `wp(body, true)` for obligation `target`, with other asserts assumed.
/// Returns the formula together with the constants it mentions (program
/// variables plus fresh havoc constants).
pub fn wp(d: &Desugared, target: usize) -> (Expr, BTreeMap<String, Sort>) {
    let mut cx = Wp { target, consts: d.vars.clone(), fresh: 0 };
    let mut labels = Vec::new();
    let e = cx.stmts(&d.body, Expr::Bool(true), &mut labels);
    (e, cx.consts)
}

struct Wp {
    target: usize,
    consts: BTreeMap<String, Sort>,
    fresh: usize,
}

impl Wp {
    fn stmts(&mut self, stmts: &[Basic], mut q: Expr, labels: &mut Vec<(String, Expr)>) -> Expr {
        for s in stmts.iter().rev() {
            q = self.stmt(s, q, labels);
        }
        q
    }

    fn stmt(&mut self, s: &Basic, q: Expr, labels: &mut Vec<(String, Expr)>) -> Expr {
        match s {
            Basic::Assign(v, e) => q.subst(&|x| (x == v).then(|| e.clone())),
            Basic::Havoc(vs) => {
                let mut map = BTreeMap::new();
                for v in vs {
                    self.fresh += 1;
                    let n = format!("{v}#{}", self.fresh);
                    self.consts.insert(n.clone(), self.consts[v]);
                    map.insert(v.clone(), ivl::var(&n));
                }
                q.subst(&|x| map.get(x).cloned())
            }
            Basic::Assume(e) => ivl::bin(ivl::BinOp::Implies, e.clone(), q),
            Basic::Assert(e, ob) if *ob == self.target => ivl::bin(ivl::BinOp::And, e.clone(), q),
            Basic::Assert(e, _) => ivl::bin(ivl::BinOp::Implies, e.clone(), q),
            Basic::If(c, t, e) => {
                let tq = self.stmts(t, q.clone(), labels);
                let eq = self.stmts(e, q, labels);
                ivl::bin(
                    ivl::BinOp::And,
                    ivl::bin(ivl::BinOp::Implies, c.clone(), tq),
                    ivl::bin(ivl::BinOp::Implies, ivl::not(c.clone()), eq),
                )
            }
            Basic::Block(l, body) => {
                labels.push((l.clone(), q.clone()));
                let r = self.stmts(body, q, labels);
                labels.pop();
                r
            }
            Basic::Goto(l) => {
                labels.iter().rev().find(|(n, _)| n == l).expect("goto resolves to an enclosing block").1.clone()
            }
        }
    }
}
