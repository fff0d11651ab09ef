//! Shared helpers for the integration tests: fixture loading and naive
//! reference implementations used as oracles.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::PathBuf;

use aal_core::fixture;
use aal_core::{FiniteAlgebra, Formula, GMatrix, Matrix, Partition, Signature};
use proptest::prelude::*;
use rand::Rng;

pub type Assignment = BTreeMap<String, usize>;

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

pub fn matrix(name: &str) -> Matrix {
    fixture::load_matrix(fixture_path(&format!("{name}.json"))).expect("fixture loads")
}

pub fn gmatrix(name: &str) -> GMatrix {
    fixture::load_gmatrix(fixture_path(&format!("{name}.json"))).expect("fixture loads")
}

/// The shipped single-filter fixtures.
pub fn fixture_matrices() -> Vec<(&'static str, Matrix)> {
    ["b2", "l3", "g3", "b2xb2", "b2_constants"]
        .into_iter()
        .map(|n| (n, matrix(n)))
        .collect()
}

/// Value of `f` computed directly from the tables.
pub fn naive_eval(alg: &FiniteAlgebra, v: &Assignment, f: &Formula) -> usize {
    match f {
        Formula::Var(x) => v[x],
        Formula::App(s, args) => {
            let op = alg.signature().index_of(s).expect("known connective");
            let n = alg.size();
            let idx = args
                .iter()
                .fold(0, |acc, a| acc * n + naive_eval(alg, v, a));
            alg.table(op)[idx] as usize
        }
    }
}

/// Every assignment of `vars` into `{0..n}`.
pub fn assignments(n: usize, vars: &[String]) -> Vec<Assignment> {
    let mut out = vec![Assignment::new()];
    for x in vars {
        out = out
            .into_iter()
            .flat_map(|a| {
                (0..n).map(move |e| {
                    let mut b = a.clone();
                    b.insert(x.clone(), e);
                    b
                })
            })
            .collect();
    }
    out
}

/// Semantic consequence from the definition, over all assignments.
pub fn naive_consequence(alg: &FiniteAlgebra, filters: &[Vec<bool>], premises: &[Formula], conclusion: &Formula) -> bool {
    let vars: Vec<String> = premises
        .iter()
        .chain([conclusion])
        .flat_map(|f| f.vars())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    assignments(alg.size(), &vars).iter().all(|v| {
        filters.iter().all(|f| {
            !premises.iter().all(|p| f[naive_eval(alg, v, p)]) || f[naive_eval(alg, v, conclusion)]
        })
    })
}

/// All formulas over `vars` of depth at most `depth`, by plain recursion.
pub fn formulas_upto(sig: &Signature, vars: &[&str], depth: usize) -> Vec<Formula> {
    let mut all: Vec<Formula> = vars.iter().map(|v| Formula::var(*v)).collect();
    for c in sig.connectives().iter().filter(|c| c.arity == 0) {
        all.push(Formula::app(c.symbol.clone(), vec![]));
    }
    for _ in 0..depth {
        let mut next: BTreeSet<Formula> = all.iter().cloned().collect();
        for c in sig.connectives().iter().filter(|c| c.arity > 0) {
            let mut tuples: Vec<Vec<Formula>> = vec![vec![]];
            for _ in 0..c.arity {
                tuples = tuples
                    .into_iter()
                    .flat_map(|t| {
                        all.iter().map(move |f| {
                            let mut u = t.clone();
                            u.push(f.clone());
                            u
                        })
                    })
                    .collect();
            }
            for args in tuples {
                next.insert(Formula::app(c.symbol.clone(), args));
            }
        }
        all = next.into_iter().collect();
    }
    all
}

/// Every partition of `{0..n}`, by restricted growth strings.
pub fn all_partitions(n: usize) -> Vec<Partition> {
    fn go(prefix: &mut Vec<usize>, n: usize, out: &mut Vec<Partition>) {
        if prefix.len() == n {
            out.push(Partition::from_labels(prefix));
            return;
        }
        let max = prefix.iter().copied().max().map_or(0, |m| m + 1);
        for b in 0..=max {
            prefix.push(b);
            go(prefix, n, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), n, &mut out);
    out
}

/// Every tuple of length `r` over `{0..n}`.
pub fn tuples(n: usize, r: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..r {
        out = out
            .into_iter()
            .flat_map(|t: Vec<usize>| {
                (0..n).map(move |x| {
                    let mut u = t.clone();
                    u.push(x);
                    u
                })
            })
            .collect();
    }
    out
}

fn apply(alg: &FiniteAlgebra, op: usize, args: &[usize]) -> usize {
    let n = alg.size();
    alg.table(op)[args.iter().fold(0, |acc, &a| acc * n + a)] as usize
}

/// Congruence test from the definition: related argument tuples give
/// related results.
pub fn naive_is_congruence(alg: &FiniteAlgebra, p: &Partition) -> bool {
    let n = alg.size();
    (0..alg.signature().len()).all(|op| {
        let r = alg.arity(op);
        let ts = tuples(n, r);
        ts.iter().all(|xs| {
            ts.iter().all(|ys| {
                !xs.iter().zip(ys).all(|(&a, &b)| p.related(a, b))
                    || p.related(apply(alg, op, xs), apply(alg, op, ys))
            })
        })
    })
}

/// Leibniz congruence from its polynomial characterization: `a ~ b` iff
/// `P(a) ∈ F ⇔ P(b) ∈ F` for every unary polynomial `P`. The unary
/// polynomials are the closure of the identity and the constant maps under
/// the pointwise operations.
pub fn leibniz_by_polynomials(m: &Matrix) -> Partition {
    let alg = m.algebra();
    let n = alg.size();
    let mut polys: Vec<Vec<usize>> = vec![(0..n).collect()];
    polys.extend((0..n).map(|c| vec![c; n]));
    let mut seen: HashSet<Vec<usize>> = polys.iter().cloned().collect();
    loop {
        let mut fresh = Vec::new();
        for op in 0..alg.signature().len() {
            for args in tuples(polys.len(), alg.arity(op)) {
                let f: Vec<usize> = (0..n)
                    .map(|x| {
                        let vals: Vec<usize> = args.iter().map(|&g| polys[g][x]).collect();
                        apply(alg, op, &vals)
                    })
                    .collect();
                if seen.insert(f.clone()) {
                    fresh.push(f);
                }
            }
        }
        if fresh.is_empty() {
            break;
        }
        polys.extend(fresh);
    }
    let f = m.mask();
    let profile: Vec<Vec<bool>> = (0..n)
        .map(|a| polys.iter().map(|p| f[p[a]]).collect())
        .collect();
    Partition::from_labels(&profile.iter().collect::<Vec<_>>())
}

/// A uniformly random algebra over `sig` with `n` elements.
pub fn random_algebra(rng: &mut impl Rng, sig: &Signature, n: usize) -> FiniteAlgebra {
    FiniteAlgebra::from_fn(sig.clone(), n, |_, _| rng.gen_range(0..n)).expect("valid tables")
}

/// A random matrix with a random nonempty filter.
pub fn random_matrix(rng: &mut impl Rng, sig: &Signature, n: usize) -> Matrix {
    let alg = random_algebra(rng, sig, n);
    loop {
        let filter: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.5)).collect();
        if filter.contains(&true) {
            return Matrix::from_mask(alg, filter).expect("nonempty filter");
        }
    }
}

/// The same matrix with its elements renamed by `perm`.
pub fn permuted(m: &Matrix, perm: &[usize]) -> Matrix {
    let alg = m.algebra();
    let n = alg.size();
    let mut inv = vec![0; n];
    for (x, &y) in perm.iter().enumerate() {
        inv[y] = x;
    }
    let renamed = FiniteAlgebra::from_fn(alg.signature().clone(), n, |op, args| {
        let orig: Vec<usize> = args.iter().map(|&y| inv[y]).collect();
        perm[apply(alg, op, &orig)]
    })
    .expect("valid tables");
    let filter: Vec<usize> = m.filter().iter().map(|&x| perm[x]).collect();
    Matrix::new(renamed, &filter).expect("nonempty filter")
}

pub fn sig_imp_neg() -> Signature {
    Signature::new("implication_negation", [("imp", 2), ("neg", 1)]).unwrap()
}

/// Random formulas over the given connectives and variables.
pub fn formula_strategy(connectives: Vec<(&'static str, usize)>, vars: Vec<&'static str>) -> impl Strategy<Value = Formula> + Clone {
    let leaf = prop::sample::select(vars).prop_map(Formula::var);
    leaf.prop_recursive(4, 32, 3, move |inner| {
        let options: Vec<BoxedStrategy<Formula>> = connectives
            .iter()
            .map(|&(s, r)| {
                prop::collection::vec(inner.clone(), r)
                    .prop_map(move |args| Formula::app(s, args))
                    .boxed()
            })
            .collect();
        prop::strategy::Union::new(options)
    })
}

pub const CLASSICAL: [(&str, usize); 4] = [("imp", 2), ("neg", 1), ("and", 2), ("or", 2)];

/// Bounded containment `Cn(reference) ⊆ Cn(target)` by exhaustive sequent
/// enumeration: conclusions are the formulas over `p1..pk` up to `depth`,
/// and premise sets range over every subset of them. For a target valuation
/// `v` and filter `F` the largest useful premise set is everything `v`
/// designates, so only that set is tried. Formulas are represented by their
/// values at every valuation of both algebras.
pub fn bounded_models(target: &GMatrix, reference: &GMatrix, k: usize, depth: usize) -> bool {
    let (a, b) = (target.algebra(), reference.algebra());
    let ta = tuples(a.size(), k);
    let tb = tuples(b.size(), k);
    let width = ta.len() + tb.len();
    let value = |op: usize, x: usize, vals: &[usize]| apply(if x < ta.len() { a } else { b }, op, vals);
    let mut terms: BTreeSet<Vec<usize>> = (0..k)
        .map(|i| ta.iter().chain(&tb).map(|t| t[i]).collect())
        .collect();
    for op in (0..a.signature().len()).filter(|&op| a.arity(op) == 0) {
        terms.insert((0..width).map(|x| value(op, x, &[])).collect());
    }
    for _ in 0..depth {
        let cur: Vec<Vec<usize>> = terms.iter().cloned().collect();
        for op in (0..a.signature().len()).filter(|&op| a.arity(op) > 0) {
            for args in tuples(cur.len(), a.arity(op)) {
                terms.insert(
                    (0..width)
                        .map(|x| {
                            let vals: Vec<usize> = args.iter().map(|&g| cur[g][x]).collect();
                            value(op, x, &vals)
                        })
                        .collect(),
                );
            }
        }
        if terms.len() == cur.len() {
            break;
        }
    }
    let terms: Vec<Vec<usize>> = terms.into_iter().collect();
    let off = ta.len();
    for v in 0..ta.len() {
        for f in target.masks() {
            let gamma: Vec<&Vec<usize>> = terms.iter().filter(|g| f[g[v]]).collect();
            let satisfied: Vec<(usize, &Vec<bool>)> = (0..tb.len())
                .flat_map(|w| reference.masks().iter().map(move |g| (w, g)))
                .filter(|(w, g)| gamma.iter().all(|p| g[p[off + w]]))
                .collect();
            let refuted = terms
                .iter()
                .any(|c| !f[c[v]] && satisfied.iter().all(|(w, g)| g[c[off + w]]));
            if refuted {
                return false;
            }
        }
    }
    true
}

/// The `k`-ary term functions of `alg` as tables over `A^k`, generated
/// pointwise from the projections (and constants) until nothing new appears.
pub fn naive_term_functions(alg: &FiniteAlgebra, k: usize) -> BTreeSet<Vec<usize>> {
    let points = tuples(alg.size(), k);
    let mut seen: BTreeSet<Vec<usize>> = (0..k).map(|i| points.iter().map(|t| t[i]).collect()).collect();
    loop {
        let cur: Vec<Vec<usize>> = seen.iter().cloned().collect();
        let before = seen.len();
        for op in 0..alg.signature().len() {
            for args in tuples(cur.len(), alg.arity(op)) {
                let g: Vec<usize> = (0..points.len())
                    .map(|x| {
                        let vals: Vec<usize> = args.iter().map(|&a| cur[a][x]).collect();
                        apply(alg, op, &vals)
                    })
                    .collect();
                seen.insert(g);
            }
        }
        if seen.len() == before {
            return seen;
        }
    }
}
