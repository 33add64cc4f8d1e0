//! Contract predicates and the axioms encoding dynamic binding.

use crate::frontend::ast::{ClassDecl, Routine};
use crate::ivl::{self, Axiom, BinOp, Expr, Function, Sort};

use super::expr::{sort_of, Env};
use super::{names, Translator};

/// Bound variable standing for formal `name` in axioms.
fn bound_formal(name: &str) -> String {
    format!("${name}")
}

/// Environment for `Y`'s contract inside an axiom about declaration
/// `decl` of `X`: formals of `Y`'s declaration map positionally to the
/// bound variables named after `decl`'s formals.
fn axiom_env(t: &Translator, y: &str, decl: &Routine, heap: Expr, old_heap: Expr, exc: Expr, result: Expr) -> Env {
    let (_, own) = t.tp.routine(y, &decl.name).expect("inherited routine");
    let mut env = Env { heap, old_heap, current: ivl::var("c"), result, exc, vars: Default::default() };
    for (mine, orig) in own.formals.iter().zip(&decl.formals) {
        env.vars.insert(mine.name.clone(), ivl::var(&bound_formal(&orig.name)));
    }
    env
}

/// Functions `post.X.r`, `pre.X.r` (dynamic mode) and `fn.X.r` (pure
/// functions) for declaration `X.r`, together with one axiom per
/// descendant `Y` of `X` (including `X`) relating each predicate to the
/// contract of `r` as seen from `Y`. In static mode only the function
/// axiom for `X` itself is produced.
pub fn generate_inheritance_axioms(t: &Translator, x: &ClassDecl, r: &Routine) -> (Vec<Function>, Vec<Axiom>) {
    let mut functions = Vec::new();
    let mut axioms = Vec::new();
    let formals: Vec<(String, Sort)> = r.formals.iter().map(|f| (bound_formal(&f.name), sort_of(&f.ty))).collect();
    let formal_vars: Vec<Expr> = formals.iter().map(|(n, _)| ivl::var(n)).collect();
    let result_sort = r.result.as_ref().map(sort_of);
    let exc = t.has_exc_param(&x.name, &r.name);
    let descendants: Vec<String> = if t.opts.static_only {
        vec![x.name.clone()]
    } else {
        t.tp.descendants(&x.name).into_iter().map(|c| c.name.clone()).collect()
    };
    let c = ivl::var("c");
    let type_guard = |y: &str| ivl::subtype(ivl::type_of(c.clone()), ivl::var(y));

    let mut post_params = vec![("h1".to_string(), Sort::Heap), ("h2".to_string(), Sort::Heap)];
    if exc {
        post_params.push(("exc".into(), Sort::Bool));
    }
    post_params.push(("c".into(), Sort::Ref));
    post_params.extend(formals.iter().cloned());
    if let Some(s) = result_sort {
        post_params.push(("res".into(), s));
    }
    let post_name = names::post(&x.name, &r.name);
    functions.push(Function { name: post_name.clone(), params: post_params.clone(), result: Sort::Bool });
    if !t.opts.static_only {
        let app = ivl::app(&post_name, post_params.iter().map(|(n, _)| ivl::var(n)).collect());
        for y in &descendants {
            let exc_e = if exc { ivl::var("exc") } else { Expr::Bool(false) };
            let env = axiom_env(t, y, r, ivl::var("h1"), ivl::var("h2"), exc_e, ivl::var("res"));
            let body = ivl::bin(
                BinOp::Implies,
                type_guard(y),
                ivl::bin(BinOp::Implies, app.clone(), t.post_cumulative(y, &r.name, &env)),
            );
            axioms.push(Axiom {
                expr: ivl::forall(post_params.clone(), body),
                comment: Some(format!("{post_name} for {y}")),
            });
        }
    }

    let mut pre_params = vec![("h".to_string(), Sort::Heap), ("c".to_string(), Sort::Ref)];
    pre_params.extend(formals.iter().cloned());
    if !t.opts.static_only {
        let pre_name = names::pre(&x.name, &r.name);
        functions.push(Function { name: pre_name.clone(), params: pre_params.clone(), result: Sort::Bool });
        let app = ivl::app(&pre_name, pre_params.iter().map(|(n, _)| ivl::var(n)).collect());
        for y in &descendants {
            let env = axiom_env(t, y, r, ivl::var("h"), ivl::var("h"), Expr::Bool(false), Expr::Null);
            let body = ivl::bin(
                BinOp::Implies,
                type_guard(y),
                ivl::bin(BinOp::Implies, t.pre_cumulative(y, &r.name, &env), app.clone()),
            );
            axioms.push(Axiom {
                expr: ivl::forall(pre_params.clone(), body),
                comment: Some(format!("{pre_name} for {y}")),
            });
        }
    }

    if let (true, Some(s)) = (t.is_function(&x.name, r), result_sort) {
        let fn_name = names::function(&x.name, &r.name);
        functions.push(Function { name: fn_name.clone(), params: pre_params.clone(), result: s });
        let mut args = vec![ivl::var("h"), c.clone()];
        args.extend(formal_vars.iter().cloned());
        let value = ivl::app(&fn_name, args);
        for y in &descendants {
            let env = axiom_env(t, y, r, ivl::var("h"), ivl::var("h"), Expr::Bool(false), value.clone());
            let guard = ivl::and_all([
                ivl::bin(BinOp::Ne, c.clone(), Expr::Null),
                type_guard(y),
                t.pre_cumulative(y, &r.name, &env),
            ]);
            let body = ivl::bin(BinOp::Implies, guard, t.post_cumulative(y, &r.name, &env));
            axioms.push(Axiom {
                expr: ivl::forall(pre_params.clone(), body),
                comment: Some(format!("{fn_name} for {y}")),
            });
        }
    }
    (functions, axioms)
}
