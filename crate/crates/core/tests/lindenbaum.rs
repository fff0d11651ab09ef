mod common;

use aal_core::congruence::rasiowa_relation;
use aal_core::lindenbaum::{canonical_valuation_check, lt_algebra, pointed_lt, variety_membership};
use aal_core::{Caps, Error, FiniteAlgebra, Matrix, Partition, PointedAlgebra};
use common::{assignments, fixture_matrices, matrix, naive_eval, tuples};

/// Least congruence containing `pairs`, by closing the relation under
/// equivalence and the operations until nothing changes.
fn naive_generated(alg: &FiniteAlgebra, pairs: &[(usize, usize)]) -> Partition {
    let n = alg.size();
    let mut rel = vec![vec![false; n]; n];
    for (x, row) in rel.iter_mut().enumerate() {
        row[x] = true;
    }
    for &(a, b) in pairs {
        rel[a][b] = true;
        rel[b][a] = true;
    }
    loop {
        let mut changed = false;
        for a in 0..n {
            for b in 0..n {
                if !rel[a][b] {
                    continue;
                }
                let reach: Vec<usize> = (0..n).filter(|&c| rel[b][c] && !rel[a][c]).collect();
                for c in reach {
                    rel[a][c] = true;
                    rel[c][a] = true;
                    changed = true;
                }
            }
        }
        for op in 0..alg.signature().len() {
            let r = alg.arity(op);
            for xs in tuples(n, r) {
                for i in 0..r {
                    for y in 0..n {
                        if !rel[xs[i]][y] {
                            continue;
                        }
                        let mut ys = xs.clone();
                        ys[i] = y;
                        let (u, v) = (alg.apply(op, &xs), alg.apply(op, &ys));
                        if !rel[u][v] {
                            rel[u][v] = true;
                            rel[v][u] = true;
                            changed = true;
                        }
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    let rows: Vec<&Vec<bool>> = rel.iter().collect();
    Partition::from_labels(&rows)
}

#[test]
fn congruence_and_admission_match_definitions() {
    let caps = Caps::default();
    for (name, m) in fixture_matrices() {
        let lt = lt_algebra(&m, 1, &caps).unwrap();
        let alg = lt.reduct.functions().algebra(&caps).unwrap();
        let taut = lt.reduct.filter();
        let pairs: Vec<(usize, usize)> = taut.iter().map(|&g| (taut[0], g)).collect();
        assert_eq!(lt.congruence, naive_generated(alg, &pairs), "{name}");
        let admits = (0..lt.reduct.len())
            .all(|g| lt.reduct.filter_mask()[g] == lt.congruence.related(g, taut[0]));
        assert_eq!(lt.admits, admits, "{name}");
        assert_eq!(lt.quotient.size(), lt.congruence.num_blocks());
        assert!(aal_core::algebra::is_homomorphism(alg, &lt.quotient, &lt.projection));
    }
}

#[test]
fn classical_quotient_is_the_free_boolean_algebra() {
    let caps = Caps::default();
    let b2 = matrix("b2");
    for (k, size) in [(1, 4), (2, 16)] {
        let lt = lt_algebra(&b2, k, &caps).unwrap();
        assert!(lt.admits);
        assert_eq!(lt.quotient.size(), size);
        let free = lt.reduct.functions().algebra(&caps).unwrap();
        assert!(lt.quotient.find_isomorphism(free).is_some());
        // The congruence coincides with the Rasiowa relation of `imp`.
        let rasiowa = rasiowa_relation(&b2, "imp", k, &caps).unwrap().to_partition().unwrap();
        assert_eq!(lt.congruence, rasiowa);
    }
}

#[test]
fn canonical_valuation_separates_theorems() {
    let caps = Caps::default();
    let b2 = matrix("b2");
    let lt = lt_algebra(&b2, 1, &caps).unwrap();
    let check = canonical_valuation_check(&lt, 3, &caps).unwrap();
    assert!(check.passed());
    assert!(check.formulas_checked > 1000);
    let lt = lt_algebra(&b2, 2, &caps).unwrap();
    assert!(canonical_valuation_check(&lt, 2, &caps).unwrap().passed());
    // `v0` maps each variable to the class of its projection.
    let v = lt.canonical_valuation();
    assert_eq!(v.keys().cloned().collect::<Vec<_>>(), ["p1", "p2"]);
    for (name, m) in fixture_matrices() {
        let lt = lt_algebra(&m, 1, &caps).unwrap();
        match canonical_valuation_check(&lt, 2, &caps) {
            Ok(c) => assert!(lt.admits && c.passed(), "{name}"),
            Err(Error::NotAdmitted) => assert!(!lt.admits, "{name}"),
            Err(e) => panic!("{name}: {e}"),
        }
    }
}

#[test]
fn pointed_quotients_satisfy_theorem_identities() {
    let caps = Caps::default();
    let b2 = matrix("b2");
    let p = pointed_lt(&b2, 2, &caps).unwrap();
    assert_eq!(p.algebra().size(), 16);
    assert_eq!(variety_membership(&p, &b2, 2, 2, &caps).unwrap(), None);
    // B2 itself, pointed at its designated value, is in the variety.
    let at_one = PointedAlgebra::new(b2.algebra().clone(), 1).unwrap();
    assert_eq!(variety_membership(&at_one, &b2, 2, 2, &caps).unwrap(), None);
}

#[test]
fn pointing_at_the_wrong_element_fails() {
    let caps = Caps::default();
    let b2 = matrix("b2");
    let at_zero = PointedAlgebra::new(b2.algebra().clone(), 0).unwrap();
    let failure = variety_membership(&at_zero, &b2, 2, 3, &caps).unwrap().expect("0 is not 1");
    // The reported formula is a B2 theorem that does not evaluate to 0.
    let vars = ["p1".to_string(), "p2".to_string()];
    for v in assignments(2, &vars) {
        assert_eq!(naive_eval(b2.algebra(), &v, &failure.formula), 1);
    }
    assert_ne!(naive_eval(b2.algebra(), &failure.valuation, &failure.formula), 0);
}

#[test]
fn pointed_quotient_needs_admission() {
    let caps = Caps::default();
    for (name, m) in fixture_matrices() {
        let lt = lt_algebra(&m, 1, &caps).unwrap();
        let pointed = pointed_lt(&m, 1, &caps);
        assert_eq!(lt.admits, pointed.is_ok(), "{name}");
    }
    // A matrix whose filter is the whole universe has every formula as a theorem.
    let b2 = matrix("b2");
    let all = Matrix::new(b2.algebra().clone(), &[0, 1]).unwrap();
    let lt = lt_algebra(&all, 1, &caps).unwrap();
    assert!(lt.admits);
    assert_eq!(lt.quotient.size(), 1);
}
