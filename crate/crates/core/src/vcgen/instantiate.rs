//! Ground instantiation of triggered axioms.
//!
//! An axiom `forall xs :: body` whose body contains an application
//! `f(xs)` of a function to exactly its bound variables is triggered by
//! that application: it is instantiated once for every ground application
//! of `f` in a condition, repeating on the new instances up to a fixed
//! depth. Other axioms stay quantified.

use std::collections::{BTreeMap, BTreeSet};

use crate::ivl::{Axiom, Expr, Sort};

const MAX_ROUNDS: usize = 4;

#[derive(Clone, Debug, PartialEq)]
pub struct Triggered {
    pub function: String,
    pub params: Vec<(String, Sort)>,
    pub body: Expr,
}

/// Splits axioms into triggered ones and those left quantified.
pub fn classify(axioms: &[Axiom]) -> (Vec<Triggered>, Vec<Axiom>) {
    let mut triggered = Vec::new();
    let mut rest = Vec::new();
    for a in axioms {
        match trigger(&a.expr) {
            Some(t) => triggered.push(t),
            None => rest.push(a.clone()),
        }
    }
    (triggered, rest)
}

fn trigger(e: &Expr) -> Option<Triggered> {
    let Expr::Forall(params, body) = e else { return None };
    let names: Vec<&str> = params.iter().map(|(n, _)| n.as_str()).collect();
    let mut found = None;
    find_app(body, &names, &mut found);
    found.map(|function| Triggered { function, params: params.clone(), body: (**body).clone() })
}

fn find_app(e: &Expr, names: &[&str], found: &mut Option<String>) {
    if found.is_some() {
        return;
    }
    if let Expr::App(f, args) = e {
        if args.len() == names.len() && args.iter().zip(names).all(|(a, n)| matches!(a, Expr::Var(v) if v == n)) {
            *found = Some(f.clone());
            return;
        }
    }
    if !matches!(e, Expr::Forall(..)) {
        for c in e.children() {
            find_app(c, names, found);
        }
    }
}

/// Ground applications (outside the scope of any quantifier variable they
/// would mention) of the functions in `wanted`.
fn ground_apps(e: &Expr, wanted: &BTreeSet<&str>, bound: &mut Vec<String>, out: &mut Vec<(String, Vec<Expr>)>) {
    match e {
        Expr::Forall(vs, body) => {
            let depth = bound.len();
            bound.extend(vs.iter().map(|(n, _)| n.clone()));
            ground_apps(body, wanted, bound, out);
            bound.truncate(depth);
        }
        _ => {
            if let Expr::App(f, args) = e {
                if wanted.contains(f.as_str()) && !bound.iter().any(|b| e.mentions_var(b)) {
                    out.push((f.clone(), args.clone()));
                }
            }
            for c in e.children() {
                ground_apps(c, wanted, bound, out);
            }
        }
    }
}

/// Instances of `axioms` for the ground applications in `roots` and,
/// transitively, in the instances themselves.
pub fn instances(axioms: &[Triggered], roots: &[&Expr]) -> Vec<Expr> {
    let mut by_fn: BTreeMap<&str, Vec<&Triggered>> = BTreeMap::new();
    for a in axioms {
        by_fn.entry(a.function.as_str()).or_default().push(a);
    }
    let wanted: BTreeSet<&str> = by_fn.keys().copied().collect();
    let mut seen: BTreeSet<String> = BTreeSet::new();
    let mut out = Vec::new();
    let mut frontier: Vec<Expr> = roots.iter().map(|e| (*e).clone()).collect();
    for _ in 0..MAX_ROUNDS {
        let mut apps = Vec::new();
        for e in &frontier {
            ground_apps(e, &wanted, &mut Vec::new(), &mut apps);
        }
        let mut next = Vec::new();
        for (f, args) in apps {
            let key = format!("{f}{args:?}");
            if !seen.insert(key) {
                continue;
            }
            for a in &by_fn[f.as_str()] {
                let map: BTreeMap<&str, &Expr> = a.params.iter().map(|(n, _)| n.as_str()).zip(&args).collect();
                let inst = a.body.subst(&|v| map.get(v).map(|e| (*e).clone()));
                next.push(inst);
            }
        }
        if next.is_empty() {
            break;
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}
