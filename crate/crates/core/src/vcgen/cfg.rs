//! Control-flow graph, passification and block-equation verification
//! conditions.
//!
//! The desugared body is turned into an acyclic graph of basic blocks.
//! Passification gives every assignment a fresh incarnation; where paths
//! with different incarnations meet, a fresh join incarnation is introduced
//! and equated to each predecessor's incarnation in a block placed on the
//! incoming edge. Each block `B` then gets a definition
//! `ok_B <=> wp(B, /\ ok_succ)` and the condition is `ok_entry`.

use std::collections::BTreeMap;

use crate::ivl::{self, Expr, Sort};

use super::desugar::{Basic, Desugared};

#[derive(Clone, Debug, PartialEq)]
pub enum Passive {
    Assume(Expr),
    Assert(Expr, usize),
}

#[derive(Clone, Debug, Default)]
pub struct BasicBlock {
    pub stmts: Vec<Simple>,
    pub succs: Vec<usize>,
}

/// Straight-line statement inside a basic block (before passification).
#[derive(Clone, Debug, PartialEq)]
pub enum Simple {
    Assign(String, Expr),
    Havoc(Vec<String>),
    Assume(Expr),
    Assert(Expr, usize),
}

#[derive(Clone, Debug, Default)]
pub struct Cfg {
    pub blocks: Vec<BasicBlock>,
    pub entry: usize,
}

impl Cfg {
    fn new_block(&mut self) -> usize {
        self.blocks.push(BasicBlock::default());
        self.blocks.len() - 1
    }

    fn edge(&mut self, from: usize, to: usize) {
        if !self.blocks[from].succs.contains(&to) {
            self.blocks[from].succs.push(to);
        }
    }

    pub fn preds(&self) -> Vec<Vec<usize>> {
        let mut p = vec![Vec::new(); self.blocks.len()];
        for (i, b) in self.blocks.iter().enumerate() {
            for &s in &b.succs {
                p[s].push(i);
            }
        }
        p
    }

    /// Blocks in a topological order starting at the entry; unreachable
    /// blocks are omitted.
    pub fn topo_order(&self) -> Vec<usize> {
        let mut seen = vec![false; self.blocks.len()];
        let mut post = Vec::new();
        let mut stack = vec![(self.entry, 0usize)];
        seen[self.entry] = true;
        while let Some((b, i)) = stack.pop() {
            if i < self.blocks[b].succs.len() {
                stack.push((b, i + 1));
                let s = self.blocks[b].succs[i];
                if !seen[s] {
                    seen[s] = true;
                    stack.push((s, 0));
                }
            } else {
                post.push(b);
            }
        }
        post.reverse();
        post
    }
}

/// Builds the graph of a loop-free body.
pub fn build_cfg(body: &[Basic]) -> Cfg {
    let mut g = Cfg::default();
    let entry = g.new_block();
    g.entry = entry;
    let mut labels = Vec::new();
    build(&mut g, body, entry, &mut labels);
    g
}

fn build(g: &mut Cfg, stmts: &[Basic], mut cur: usize, labels: &mut Vec<(String, usize)>) -> usize {
    for s in stmts {
        match s {
            Basic::Assign(v, e) => g.blocks[cur].stmts.push(Simple::Assign(v.clone(), e.clone())),
            Basic::Havoc(vs) => g.blocks[cur].stmts.push(Simple::Havoc(vs.clone())),
            Basic::Assume(e) => g.blocks[cur].stmts.push(Simple::Assume(e.clone())),
            Basic::Assert(e, ob) => g.blocks[cur].stmts.push(Simple::Assert(e.clone(), *ob)),
            Basic::If(c, t, e) => {
                let tb = g.new_block();
                let eb = g.new_block();
                let join = g.new_block();
                g.edge(cur, tb);
                g.edge(cur, eb);
                g.blocks[tb].stmts.push(Simple::Assume(c.clone()));
                g.blocks[eb].stmts.push(Simple::Assume(ivl::not(c.clone())));
                let tend = build(g, t, tb, labels);
                let eend = build(g, e, eb, labels);
                g.edge(tend, join);
                g.edge(eend, join);
                cur = join;
            }
            Basic::Block(l, body) => {
                let after = g.new_block();
                labels.push((l.clone(), after));
                let end = build(g, body, cur, labels);
                labels.pop();
                g.edge(end, after);
                cur = after;
            }
            Basic::Goto(l) => {
                let target = labels.iter().rev().find(|(n, _)| n == l).expect("goto resolves to an enclosing block").1;
                g.edge(cur, target);
                cur = g.new_block();
            }
        }
    }
    cur
}

/// A passive graph: blocks of assumes and asserts over incarnation
/// constants.
#[derive(Clone, Debug, Default)]
pub struct PassiveCfg {
    pub blocks: Vec<(Vec<Passive>, Vec<usize>)>,
    pub entry: usize,
    /// Incarnation constants with their sorts.
    pub consts: BTreeMap<String, Sort>,
}

/// Dynamic single assignment over the reachable part of `g`.
pub fn passify(g: &Cfg, vars: &BTreeMap<String, Sort>) -> PassiveCfg {
    let order = g.topo_order();
    let preds = g.preds();
    let mut out = PassiveCfg::default();
    let mut consts: BTreeMap<String, Sort> = vars.clone();
    let mut counter: BTreeMap<String, usize> = BTreeMap::new();
    let mut fresh = |v: &str, consts: &mut BTreeMap<String, Sort>| {
        let n = counter.entry(v.to_string()).or_insert(0);
        *n += 1;
        let name = format!("{v}@{n}");
        consts.insert(name.clone(), vars[v]);
        name
    };
    let index: BTreeMap<usize, usize> = order.iter().enumerate().map(|(i, b)| (*b, i)).collect();
    out.blocks = vec![(Vec::new(), Vec::new()); order.len()];
    let mut edge_eqns: BTreeMap<(usize, usize), Vec<Expr>> = BTreeMap::new();
    let mut exit_maps: Vec<BTreeMap<String, String>> = vec![BTreeMap::new(); order.len()];
    let initial: BTreeMap<String, String> = vars.keys().map(|v| (v.clone(), v.clone())).collect();
    for (pos, &b) in order.iter().enumerate() {
        let ps: Vec<usize> = preds[b].iter().filter_map(|p| index.get(p).copied()).collect();
        let mut map = if ps.is_empty() { initial.clone() } else { exit_maps[ps[0]].clone() };
        if ps.len() > 1 {
            for v in vars.keys() {
                let differs = ps.iter().any(|&p| exit_maps[p][v] != map[v]);
                if differs {
                    let joined = fresh(v, &mut consts);
                    for &p in &ps {
                        let eqn = ivl::eq(ivl::var(&joined), ivl::var(&exit_maps[p][v]));
                        edge_eqns.entry((p, pos)).or_default().push(eqn);
                    }
                    map.insert(v.clone(), joined);
                }
            }
        }
        let mut stmts = Vec::new();
        for s in &g.blocks[b].stmts {
            let rename = |e: &Expr, map: &BTreeMap<String, String>| e.subst(&|v| map.get(v).map(|n| ivl::var(n)));
            match s {
                Simple::Assume(e) => stmts.push(Passive::Assume(rename(e, &map))),
                Simple::Assert(e, ob) => stmts.push(Passive::Assert(rename(e, &map), *ob)),
                Simple::Assign(v, e) => {
                    let rhs = rename(e, &map);
                    let n = fresh(v, &mut consts);
                    stmts.push(Passive::Assume(ivl::eq(ivl::var(&n), rhs)));
                    map.insert(v.clone(), n);
                }
                Simple::Havoc(vs) => {
                    for v in vs {
                        let n = fresh(v, &mut consts);
                        map.insert(v.clone(), n);
                    }
                }
            }
        }
        out.blocks[pos].0 = stmts;
        exit_maps[pos] = map;
        for s in &g.blocks[b].succs {
            if let Some(&si) = index.get(s) {
                if !out.blocks[pos].1.contains(&si) {
                    out.blocks[pos].1.push(si);
                }
            }
        }
    }
    out.consts = consts;
    out.entry = 0;
    split_edges(&mut out, edge_eqns);
    out
}

/// Places each edge's join equations in a new block on that edge.
fn split_edges(out: &mut PassiveCfg, eqns: BTreeMap<(usize, usize), Vec<Expr>>) {
    for ((from, to), es) in eqns {
        let split = out.blocks.len();
        out.blocks.push((es.into_iter().map(Passive::Assume).collect(), vec![to]));
        for s in out.blocks[from].1.iter_mut() {
            if *s == to {
                *s = split;
            }
        }
    }
}

/// Block-equation condition for obligation `target`: asserts of other
/// obligations are assumed. Returns the block definitions and the name of
/// the entry block's variable.
pub fn block_equations(p: &PassiveCfg, target: usize) -> (Vec<(String, Expr)>, String) {
    let name = |i: usize| format!("ok${i}");
    let mut defs = Vec::new();
    for (i, (stmts, succs)) in p.blocks.iter().enumerate() {
        let mut q = ivl::and_all(succs.iter().map(|s| ivl::var(&name(*s))));
        for s in stmts.iter().rev() {
            q = match s {
                Passive::Assume(e) => ivl::implies(e.clone(), q),
                Passive::Assert(e, ob) if *ob == target => ivl::and_all([e.clone(), q]),
                Passive::Assert(e, _) => ivl::implies(e.clone(), q),
            };
        }
        defs.push((name(i), q));
    }
    (defs, name(p.entry))
}

/// Whether obligation `target` has an assert site in a reachable block.
pub fn mentions(p: &PassiveCfg, target: usize) -> bool {
    p.blocks.iter().any(|(s, _)| s.iter().any(|x| matches!(x, Passive::Assert(_, ob) if *ob == target)))
}

pub fn passive_graph(d: &Desugared) -> PassiveCfg {
    passify(&build_cfg(&d.body), &d.vars)
}
