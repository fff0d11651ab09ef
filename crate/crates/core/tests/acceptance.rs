//! Acceptance suite: one PASS/FAIL line per criterion, each with a pinned
//! time limit. Runs without the libtest harness; exits nonzero on failure.

mod common;

use std::ops::ControlFlow;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use aal_core::congruence::{
    congruence_report, is_implicative_extensional, leibniz_congruence, rasiowa_relation, reduce,
};
use aal_core::equivalence::{same_system, Comparison, Side};
use aal_core::fixture::load_rules;
use aal_core::lindenbaum::{canonical_valuation_check, lt_algebra, pointed_lt, variety_membership};
use aal_core::matrix::{all_tuples, lindenbaum_reduct, Verdict};
use aal_core::rules::{check_derivation, derive, independence_search, Bounds, Independence};
use aal_core::sweep::{EvalSpace, Sweep};
use aal_core::{Caps, Formula, GMatrix, Matrix, Partition, PointedAlgebra};
use common::{
    assignments, bounded_models, fixture_path, leibniz_by_polynomials, matrix, naive_consequence, naive_eval,
    naive_is_congruence, naive_term_functions, permuted, random_matrix, sig_imp_neg,
};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<(), String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn parse(m: &Matrix, s: &str) -> Formula {
    aal_core::parse_formula(m.algebra().signature(), s).unwrap()
}

fn ms(d: Duration) -> String {
    format!("{:.3} ms", d.as_secs_f64() * 1e3)
}

/// Consequence on B2, each check timed on its own.
fn c1() -> Outcome {
    let b2 = matrix("b2");
    let caps = Caps::default();
    let mp = [parse(&b2, "p"), parse(&b2, "imp(p, q)")];
    let half = [parse(&b2, "imp(p, q)")];
    let q = parse(&b2, "q");
    let limit = Duration::from_millis(1);

    let start = Instant::now();
    let first = b2.consequence(&mp, &q, &caps).map_err(|e| e.to_string())?;
    let t1 = start.elapsed();
    let start = Instant::now();
    let second = b2.consequence(&half, &q, &caps).map_err(|e| e.to_string())?;
    let t2 = start.elapsed();

    ensure!(t1 < limit && t2 < limit, "checks took {} and {}", ms(t1), ms(t2));
    ensure!(first == Verdict::Holds, "modus ponens refuted");
    ensure!(naive_consequence(b2.algebra(), &[b2.mask().to_vec()], &mp, &q), "oracle disagrees on modus ponens");
    let Verdict::Fails { valuation, .. } = second else {
        return Err("imp(p, q) |- q reported valid".into());
    };
    ensure!(!naive_consequence(b2.algebra(), &[b2.mask().to_vec()], &half, &q), "oracle disagrees");
    let at = |f: &Formula| naive_eval(b2.algebra(), &valuation, f);
    ensure!(b2.is_designated(at(&half[0])) && !b2.is_designated(at(&q)), "witness {valuation:?} does not refute");
    Ok(())
}

/// Sizes of the free algebras of B2 with constants.
fn c2() -> Outcome {
    let b2c = matrix("b2_constants");
    let caps = Caps::default();
    for (k, expect) in [(1usize, 4usize), (2, 16)] {
        let f = aal_core::TermFunctionAlgebra::new(b2c.algebra(), k, &caps).map_err(|e| e.to_string())?;
        let naive = naive_term_functions(b2c.algebra(), k).len();
        ensure!(f.len() == expect && naive == expect, "k={k}: {} elements, oracle {naive}", f.len());
    }
    Ok(())
}

/// Leibniz congruence against the polynomial definition on small fixtures.
fn c3() -> Outcome {
    for name in ["b2", "b2_constants", "l3", "g3"] {
        let m = matrix(name);
        ensure!(m.algebra().size() <= 3, "{name} is too large for this criterion");
        let (got, expect) = (leibniz_congruence(&m), leibniz_by_polynomials(&m));
        ensure!(got == expect, "{name}: {got} vs {expect}");
    }
    Ok(())
}

/// Reduction does not change the system; B2×B2 reduces to B2.
fn c4() -> Outcome {
    let caps = Caps::default();
    for name in ["b2", "b2_constants", "l3", "g3", "b2xb2"] {
        let m = matrix(name);
        let r = reduce(&m);
        let cmp = same_system(&m.to_gmatrix(), &r.to_gmatrix(), &caps).map_err(|e| e.to_string())?;
        ensure!(cmp.is_same(), "{name} differs from its reduction: {cmp:?}");
    }
    let b2xb2 = matrix("b2xb2");
    ensure!(b2xb2.filter() == vec![2, 3], "B2×B2 fixture should designate (1,0) and (1,1)");
    let r = reduce(&b2xb2);
    let b2 = matrix("b2");
    let iso = r.algebra().find_isomorphism(b2.algebra()).ok_or("reduced B2×B2 is not isomorphic to B2")?;
    ensure!(
        (0..2).all(|x| r.is_designated(x) == b2.is_designated(iso[x])),
        "the isomorphism does not preserve the filter"
    );
    Ok(())
}

fn check_counterexample(cmp: &Comparison, first: &GMatrix, second: &GMatrix) -> Outcome {
    let Comparison::Differ { valid_in, counterexample: cx } = cmp else {
        return Ok(());
    };
    let (valid, refuted) = match valid_in {
        Side::First => (first, second),
        Side::Second => (second, first),
    };
    ensure!(
        naive_consequence(valid.algebra(), valid.masks(), &cx.premises, &cx.conclusion),
        "counterexample is not valid where claimed"
    );
    let f = &refuted.masks()[cx.filter];
    let at = |p: &Formula| naive_eval(refuted.algebra(), &cx.valuation, p);
    ensure!(
        cx.premises.iter().all(|p| f[at(p)]) && !f[at(&cx.conclusion)],
        "counterexample valuation does not refute"
    );
    Ok(())
}

/// Equivalence decision against bounded exhaustive enumeration.
fn c5() -> Outcome {
    let caps = Caps::default();
    let b2 = matrix("b2").to_gmatrix();
    let l3 = matrix("l3").to_gmatrix();
    let cmp = same_system(&b2, &l3, &caps).map_err(|e| e.to_string())?;
    ensure!(!cmp.is_same(), "B2 and Ł3 reported equivalent");
    check_counterexample(&cmp, &b2, &l3)?;

    // Even rounds draw two independent matrices; odd rounds compare a
    // matrix with a renamed copy.
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for i in 0..20 {
        let n = 1 + i % 3;
        let first = random_matrix(&mut rng, &sig_imp_neg(), n);
        let second = if i % 2 == 0 {
            random_matrix(&mut rng, &sig_imp_neg(), 1 + (i / 2) % 3)
        } else {
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(&mut rng);
            permuted(&first, &perm)
        };
        let (a, b) = (first.to_gmatrix(), second.to_gmatrix());
        let cmp = same_system(&a, &b, &caps).map_err(|e| e.to_string())?;
        check_counterexample(&cmp, &a, &b)?;
        let brute = bounded_models(&a, &b, 2, 3) && bounded_models(&b, &a, 2, 3);
        ensure!(cmp.is_same() == brute, "pair {i}: decision {} vs enumeration {brute}", cmp.is_same());
    }
    Ok(())
}

/// Theoremhood in the matrix against membership in the reduct filter, with
/// the term function computed in the reduct's own tables.
fn c6() -> Outcome {
    // B2 with constants has 2.7e8 formulas at k=2, depth 3.
    let caps = Caps { max_formulas: 1 << 29, ..Caps::default() };
    for name in ["b2", "b2_constants", "l3", "g3", "b2xb2"] {
        let m = matrix(name);
        for k in 1..=2 {
            let r = lindenbaum_reduct(&m, k).map_err(|e| e.to_string())?;
            let alg = r.functions().algebra(&caps).map_err(|e| e.to_string())?;
            let gens = r.functions().generator_indices().to_vec();
            let sweep = Sweep::new(
                m.algebra().signature(),
                k,
                3,
                vec![
                    EvalSpace::new(m.algebra(), all_tuples(m.algebra().size(), k)),
                    EvalSpace::new(alg, vec![gens]),
                ],
                &caps,
            )
            .map_err(|e| e.to_string())?;
            let mut bad = None;
            sweep.for_each(|item| {
                let theorem = item.values(0).iter().all(|&x| m.is_designated(x as usize));
                if theorem != r.filter_mask()[item.values(1)[0] as usize] {
                    bad = Some(item.formula());
                    return ControlFlow::Break(());
                }
                ControlFlow::Continue(())
            });
            if let Some(f) = bad {
                return Err(format!("{name} k={k}: {f}"));
            }
        }
    }
    Ok(())
}

/// Inclusion chain of the theory congruences on every closed set.
fn c7() -> Outcome {
    let caps = Caps::default();
    for name in ["b2", "b2_constants", "l3", "g3", "b2xb2"] {
        let m = matrix(name);
        for k in 1..=2 {
            let report = congruence_report(&m, k, &caps).map_err(|e| e.to_string())?;
            let n = report.reduct.len();
            let tarski = report.theories.iter().fold(Partition::total(n), |acc, t| acc.meet(&t.suszko));
            ensure!(tarski == report.tarski, "{name} k={k}: Tarski is not the meet of Suszko");
            let supports: Vec<u64> = report
                .theories
                .iter()
                .map(|t| t.set.support.iter().fold(0u64, |acc, &x| acc | 1 << x))
                .collect();
            for (i, t) in report.theories.iter().enumerate() {
                let at = format!("{name} k={k} theory {i}");
                ensure!(report.tarski.refines(&t.suszko), "{at}: Tarski ⊄ Suszko");
                ensure!(t.suszko.refines(&t.frege), "{at}: Suszko ⊄ Frege");
                ensure!(t.suszko.refines(&t.leibniz), "{at}: Suszko ⊄ Leibniz");
                ensure!(
                    (0..n).all(|g| (0..n).all(|h| !t.suszko.related(g, h) || t.set.mask[g] == t.set.mask[h])),
                    "{at}: Suszko not compatible"
                );
                // Meet over the closed sets containing this one, whose
                // supports are the subsets of its support.
                let mut rows: Vec<Vec<u32>> = vec![Vec::new(); n];
                for (u, s) in report.theories.iter().zip(&supports) {
                    if s & !supports[i] == 0 {
                        for (g, row) in rows.iter_mut().enumerate() {
                            row.push(u.suszko.labels()[g]);
                        }
                    }
                }
                let meet = Partition::from_labels(&rows.iter().collect::<Vec<_>>());
                ensure!(meet == t.leibniz, "{at}: Leibniz is not the meet over extensions");
            }
        }
    }
    Ok(())
}

/// The Rasiowa relation and the Lindenbaum–Tarski algebra of B2.
fn c8() -> Outcome {
    let caps = Caps::default();
    let b2 = matrix("b2");
    let report = is_implicative_extensional(&b2, "imp", &caps).map_err(|e| e.to_string())?;
    ensure!(report.holds(), "B2 is not implicative: {:?}", report.violation);
    let rel = rasiowa_relation(&b2, "imp", 1, &caps).map_err(|e| e.to_string())?;
    let p = rel.to_partition().ok_or("the Rasiowa relation is not an equivalence")?;
    let r = lindenbaum_reduct(&b2, 1).map_err(|e| e.to_string())?;
    let alg = r.functions().algebra(&caps).map_err(|e| e.to_string())?;
    ensure!(naive_is_congruence(alg, &p), "the Rasiowa relation is not a congruence");
    let taut = r.filter();
    ensure!(
        (0..r.len()).all(|g| p.related(g, taut[0]) == r.filter_mask()[g]),
        "the tautologies are not a single class"
    );
    let lt = lt_algebra(&b2, 1, &caps).map_err(|e| e.to_string())?;
    ensure!(lt.quotient.size() == 4, "LT(B2, 1) has {} elements", lt.quotient.size());
    ensure!(lt.admits, "B2 does not admit its Lindenbaum–Tarski algebra");
    let check = canonical_valuation_check(&lt, 3, &caps).map_err(|e| e.to_string())?;
    ensure!(check.passed(), "canonical valuation mismatch at {:?}", check.mismatch);
    Ok(())
}

/// Theorems of B2 are identities `A = 1` of its pointed quotient.
fn c9() -> Outcome {
    let caps = Caps::default();
    let b2 = matrix("b2");
    let p = pointed_lt(&b2, 2, &caps).map_err(|e| e.to_string())?;
    if let Some(fail) = variety_membership(&p, &b2, 2, 3, &caps).map_err(|e| e.to_string())? {
        return Err(format!("pointed LT(B2, 2) fails {}", fail.formula));
    }
    let at_zero = PointedAlgebra::new(b2.algebra().clone(), 0).map_err(|e| e.to_string())?;
    let fail = variety_membership(&at_zero, &b2, 2, 3, &caps)
        .map_err(|e| e.to_string())?
        .ok_or("B2 pointed at 0 passes")?;
    let vars = ["p1".to_string(), "p2".to_string()];
    ensure!(
        assignments(2, &vars).iter().all(|v| naive_eval(b2.algebra(), v, &fail.formula) == 1),
        "reported formula {} is not a theorem",
        fail.formula
    );
    ensure!(
        naive_eval(b2.algebra(), &fail.valuation, &fail.formula) != 0,
        "reported identity holds at the reported valuation"
    );
    Ok(())
}

/// Redundant axiom derived; independent axiom certified by a small matrix.
fn c10() -> Outcome {
    let caps = Caps::default();
    let rs = load_rules(fixture_path("classical_rules.json")).map_err(|e| e.to_string())?;
    let others = rs.without("ID").ok_or("no rules besides ID")?;
    let goal = rs.get("ID").ok_or("no rule ID")?.conclusion.clone();
    let d = derive(&others, &[], &goal, Bounds::default())
        .map_err(|e| e.to_string())?
        .ok_or("no derivation of ID")?;
    check_derivation(&others, &[], &goal, &d).map_err(|e| e.to_string())?;
    match independence_search(&rs, "ID", 3, Bounds::default(), &caps).map_err(|e| e.to_string())? {
        Independence::Derivable(_) => {}
        other => return Err(format!("ID: expected a derivation, got {other:?}")),
    }
    let got = independence_search(&rs, "A3", 3, Bounds::default(), &caps).map_err(|e| e.to_string())?;
    let Independence::Independent { matrix, valuation } = got else {
        return Err(format!("A3: no certificate ({got:?})"));
    };
    for (name, rule) in rs.iter().filter(|(n, _)| *n != "A3") {
        ensure!(
            naive_consequence(matrix.algebra(), &[matrix.mask().to_vec()], &rule.premises, &rule.conclusion),
            "certificate violates {name}"
        );
    }
    let a3 = &rs.get("A3").ok_or("no rule A3")?.conclusion;
    ensure!(!matrix.is_designated(naive_eval(matrix.algebra(), &valuation, a3)), "certificate validates A3");
    Ok(())
}

/// Identifier, title, check and time limit.
type Criterion = (&'static str, &'static str, fn() -> Outcome, Duration);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("C1", "consequence correctness", c1, Duration::from_millis(100)),
        ("C2", "free-algebra sizes", c2, Duration::from_secs(1)),
        ("C3", "Leibniz oracle equivalence", c3, Duration::from_secs(10)),
        ("C4", "reduction preserves the system", c4, Duration::from_secs(10)),
        ("C5", "equivalence vs brute force", c5, Duration::from_secs(120)),
        ("C6", "reduct weak adequacy", c6, Duration::from_secs(30)),
        ("C7", "congruence chain", c7, Duration::from_secs(60)),
        ("C8", "Rasiowa and Lindenbaum–Tarski", c8, Duration::from_secs(10)),
        ("C9", "variety membership", c9, Duration::from_secs(30)),
        ("C10", "independence harness", c10, Duration::from_secs(300)),
    ];
    let mut failed = 0;
    for (id, title, run, limit) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run))
            .unwrap_or_else(|_| Err("panicked".into()))
            .and_then(|()| {
                let spent = start.elapsed();
                if spent > limit {
                    Err(format!("took {:.2?}, limit {:.2?}", spent, limit))
                } else {
                    Ok(())
                }
            });
        let spent = start.elapsed();
        match outcome {
            Ok(()) => println!("PASS {id:<4} {title} ({spent:.2?}, limit {limit:.0?})"),
            Err(why) => {
                failed += 1;
                println!("FAIL {id:<4} {title} ({spent:.2?}, limit {limit:.0?}): {why}");
            }
        }
    }
    println!("{} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
