//! Deciding whether the consequence of one finite g-matrix contains that of
//! another, with a verified counterexample sequent when it does not.
//!
//! `Cn(reference) ⊆ Cn(target)` fails iff some sequent `Γ ⊢ φ` valid in the
//! reference fails in the target at some valuation `v` and filter `F`. The
//! values of `v` generate a subalgebra `U` of the target; choosing a
//! generating tuple `t` of `U` and substituting for each variable a term
//! over `t` that reaches its value (structurality) gives a failing sequent
//! over `p1..pk`, `k = |t|`, at the valuation `p_i ↦ t_i`. Generating tuples
//! of one subalgebra are interchangeable by the same argument, so one tuple
//! per subalgebra is enough. By monotonicity `Γ` may be taken maximal:
//! all `ψ` with `ψ(t) ∈ F`.
//!
//! For every tuple `s` of the reference, the pairs `(ψ(t), ψ(s))` form the
//! subalgebra `C_s` of `target × reference` generated by `(t_i, s_i)`. A
//! reference filter `G` at `s` satisfies the maximal `Γ` iff `C_s` has no
//! pair `(x, y)` with `x ∈ F`, `y ∉ G`. Let `G_s` be the intersection of the
//! satisfied filters at `s`. A counterexample exists iff some formula `φ`
//! has `φ(t) ∉ F` and `φ(s) ∈ G_s` for all `s`, which is a search in the
//! subalgebra of `target × Π_s reference/Ω(G_s)` generated by `t` and the
//! tuples `s`. The premises reported are, for each `(G, s)` where `φ(s)`
//! is undesignated, a formula from `C_s` that separates; they are then
//! pruned greedily and the sequent is re-checked by evaluation.

use std::collections::HashMap;

use crate::algebra::{CompiledFormula, FiniteAlgebra, Valuation};
use crate::closure::VectorClosure;
use crate::congruence::{reduce_with_projection, Reduction};
use crate::error::{Error, Result};
use crate::language::{canonical_var_name, Formula};
use crate::matrix::{all_tuples, Caps, GMatrix, Matrix};

/// A sequent valid in the reference and refuted in the target.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterexample {
    pub premises: Vec<Formula>,
    pub conclusion: Formula,
    /// Valuation into the target refuting the sequent.
    pub valuation: Valuation,
    /// Index of the target filter at which it fails.
    pub filter: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Containment {
    Holds,
    Fails(Counterexample),
}

impl Containment {
    pub fn holds(&self) -> bool {
        matches!(self, Containment::Holds)
    }

    pub fn counterexample(&self) -> Option<&Counterexample> {
        match self {
            Containment::Holds => None,
            Containment::Fails(c) => Some(c),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    First,
    Second,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Comparison {
    Same,
    /// The counterexample sequent is valid in `valid_in` and fails in the
    /// other g-matrix.
    Differ {
        valid_in: Side,
        counterexample: Counterexample,
    },
}

impl Comparison {
    pub fn is_same(&self) -> bool {
        matches!(self, Comparison::Same)
    }
}

/// Whether every sequent valid in `reference` is valid in `target`, i.e.
/// the target's filters are all filters of the reference's consequence.
pub fn models(target: &GMatrix, reference: &GMatrix, caps: &Caps) -> Result<Containment> {
    let a = target.algebra();
    let b = reference.algebra();
    a.signature().ensure_same(b.signature())?;
    let mut ref_filters: Vec<&Vec<bool>> = Vec::new();
    for f in reference.masks() {
        if !ref_filters.contains(&f) {
            ref_filters.push(f);
        }
    }
    let mut reductions: HashMap<Vec<bool>, Reduction> = HashMap::new();
    for t in generating_tuples(a, caps)? {
        let k = t.len();
        let s_count = (b.size() as u128).saturating_pow(k as u32);
        if s_count > caps.max_valuations {
            return Err(Error::cap("reference tuples", s_count, caps.max_valuations));
        }
        let tuples = all_tuples(b.size(), k);
        let pairs: Vec<VectorClosure> = tuples
            .iter()
            .map(|s| {
                let gens: Vec<Vec<u32>> = (0..k).map(|i| vec![t[i] as u32, s[i] as u32]).collect();
                VectorClosure::generate(&[a, b], &gens, usize::MAX, None)
            })
            .collect::<Result<_>>()?;
        let mut done: Vec<&Vec<bool>> = Vec::new();
        for (fi, ft) in target.masks().iter().enumerate() {
            if done.contains(&ft) {
                continue;
            }
            done.push(ft);
            let search = Search {
                target: a,
                reference: b,
                t: &t,
                tuples: &tuples,
                pairs: &pairs,
                ft,
                ref_filters: &ref_filters,
            };
            if let Some(cx) = search.run(&mut reductions, caps)? {
                let cx = Counterexample { filter: fi, ..cx };
                let cx = minimize(cx, reference, caps)?;
                verify(&cx, target, reference, caps)?;
                return Ok(Containment::Fails(cx));
            }
        }
    }
    Ok(Containment::Holds)
}

/// Whether the two g-matrices define the same consequence relation.
pub fn same_system(first: &GMatrix, second: &GMatrix, caps: &Caps) -> Result<Comparison> {
    if let Containment::Fails(counterexample) = models(first, second, caps)? {
        return Ok(Comparison::Differ {
            valid_in: Side::Second,
            counterexample,
        });
    }
    if let Containment::Fails(counterexample) = models(second, first, caps)? {
        return Ok(Comparison::Differ {
            valid_in: Side::First,
            counterexample,
        });
    }
    Ok(Comparison::Same)
}

pub fn matrices_equivalent(first: &Matrix, second: &Matrix, caps: &Caps) -> Result<Comparison> {
    same_system(&first.to_gmatrix(), &second.to_gmatrix(), caps)
}

/// One generating tuple (least size, then lexicographically least set) for
/// every subalgebra of `a`, in that order. The empty tuple appears when the
/// signature has constants.
fn generating_tuples(a: &FiniteAlgebra, caps: &Caps) -> Result<Vec<Vec<usize>>> {
    let n = a.size();
    if n >= 64 || (1u128 << n) > caps.max_valuations {
        return Err(Error::cap("generating sets", 1u128 << n.min(127), caps.max_valuations));
    }
    let mut seen: Vec<Vec<bool>> = Vec::new();
    let mut out = Vec::new();
    for k in 0..=n {
        let mut subset: Vec<usize> = (0..k).collect();
        loop {
            if k > 0 || a.signature().has_constants() {
                let gens: Vec<Vec<u32>> = subset.iter().map(|&x| vec![x as u32]).collect();
                let closure = VectorClosure::generate(&[a], &gens, usize::MAX, None)?;
                let mut mask = vec![false; n];
                for &x in closure.data() {
                    mask[x as usize] = true;
                }
                if !seen.contains(&mask) {
                    seen.push(mask);
                    out.push(subset.clone());
                }
            }
            if !next_subset(&mut subset, n) {
                break;
            }
        }
    }
    Ok(out)
}

/// Advances an increasing sequence to the next one in lexicographic order.
fn next_subset(s: &mut [usize], n: usize) -> bool {
    let k = s.len();
    for i in (0..k).rev() {
        if s[i] < n - k + i {
            s[i] += 1;
            for j in i + 1..k {
                s[j] = s[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

fn var(i: usize) -> Formula {
    Formula::Var(canonical_var_name(i + 1))
}

struct Search<'a> {
    target: &'a FiniteAlgebra,
    reference: &'a FiniteAlgebra,
    t: &'a [usize],
    tuples: &'a [Vec<usize>],
    pairs: &'a [VectorClosure],
    ft: &'a [bool],
    ref_filters: &'a [&'a Vec<bool>],
}

impl Search<'_> {
    fn separated(&self, s: usize, fr: &[bool]) -> Option<usize> {
        let c = &self.pairs[s];
        (0..c.len()).find(|&i| {
            let e = c.element(i);
            self.ft[e[0] as usize] && !fr[e[1] as usize]
        })
    }

    fn run(
        &self,
        reductions: &mut HashMap<Vec<bool>, Reduction>,
        caps: &Caps,
    ) -> Result<Option<Counterexample>> {
        let m = self.reference.size();
        let mut constrained: Vec<(usize, Vec<bool>)> = Vec::new();
        for s in 0..self.tuples.len() {
            let mut g = vec![true; m];
            for fr in self.ref_filters {
                if self.separated(s, fr).is_none() {
                    g.iter_mut().zip(fr.iter()).for_each(|(x, &y)| *x &= y);
                }
            }
            let c = &self.pairs[s];
            let possible = (0..c.len()).any(|i| {
                let e = c.element(i);
                !self.ft[e[0] as usize] && g[e[1] as usize]
            });
            if !possible {
                return Ok(None);
            }
            if g.iter().any(|&x| !x) {
                constrained.push((s, g));
            }
        }

        // Coordinates of the search algebra: the target, then one
        // reference quotient per distinct (G_s, image of s).
        let mut coords: Vec<(Vec<bool>, Vec<u32>)> = Vec::new();
        for (s, g) in &constrained {
            let red = reductions.entry(g.clone()).or_insert_with(|| {
                let m = Matrix::from_mask(self.reference.clone(), g.clone())
                    .expect("some constrained value is designated");
                reduce_with_projection(&m)
            });
            let image: Vec<u32> = self.tuples[*s]
                .iter()
                .map(|&x| red.projection[x] as u32)
                .collect();
            if !coords.iter().any(|(h, i)| h == g && *i == image) {
                coords.push((g.clone(), image));
            }
        }
        let mut algebras: Vec<&FiniteAlgebra> = vec![self.target];
        let mut masks: Vec<&[bool]> = vec![self.ft];
        for (g, _) in &coords {
            let red = &reductions[g];
            algebras.push(red.matrix.algebra());
            masks.push(red.matrix.mask());
        }
        let gens: Vec<Vec<u32>> = (0..self.t.len())
            .map(|i| {
                std::iter::once(self.t[i] as u32)
                    .chain(coords.iter().map(|(_, image)| image[i]))
                    .collect()
            })
            .collect();
        let mut stop = |v: &[u32]| {
            !masks[0][v[0] as usize] && v[1..].iter().zip(&masks[1..]).all(|(&y, g)| g[y as usize])
        };
        let limit = (caps.max_table_cells / algebras.len() as u128).max(1) as usize;
        let closure = VectorClosure::generate(&algebras, &gens, limit, Some(&mut stop))?;
        let Some(found) = closure.stopped_at else {
            return Ok(None);
        };
        let conclusion = closure.formula(found, &var);

        let vars: Vec<String> = (0..self.t.len()).map(|i| canonical_var_name(i + 1)).collect();
        let compiled = CompiledFormula::compile(self.reference, &vars, &conclusion)?;
        let mut premises: Vec<Formula> = Vec::new();
        for (s, tuple) in self.tuples.iter().enumerate() {
            let y = compiled.eval(self.reference, tuple);
            for fr in self.ref_filters {
                if fr[y] {
                    continue;
                }
                let sep = self
                    .separated(s, fr)
                    .expect("unseparated filters contain the conclusion's value");
                let f = self.pairs[s].formula(sep, &var);
                if !premises.contains(&f) {
                    premises.push(f);
                }
            }
        }
        Ok(Some(Counterexample {
            premises,
            conclusion,
            valuation: self
                .t
                .iter()
                .enumerate()
                .map(|(i, &x)| (canonical_var_name(i + 1), x))
                .collect(),
            filter: 0,
        }))
    }
}

/// Drops premises, first to last, while the sequent stays valid in the
/// reference.
fn minimize(mut cx: Counterexample, reference: &GMatrix, caps: &Caps) -> Result<Counterexample> {
    let mut i = 0;
    while i < cx.premises.len() {
        let mut rest = cx.premises.clone();
        rest.remove(i);
        if reference.consequence(&rest, &cx.conclusion, caps)?.holds() {
            cx.premises = rest;
        } else {
            i += 1;
        }
    }
    Ok(cx)
}

fn verify(cx: &Counterexample, target: &GMatrix, reference: &GMatrix, caps: &Caps) -> Result<()> {
    if !reference.consequence(&cx.premises, &cx.conclusion, caps)?.holds() {
        return Err(Error::Verification(
            "counterexample sequent is not valid in the reference".into(),
        ));
    }
    let a = target.algebra();
    let f = &target.masks()[cx.filter];
    let premises_hold = cx
        .premises
        .iter()
        .map(|p| a.eval(&cx.valuation, p))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .all(|x| f[x]);
    if !premises_hold || f[a.eval(&cx.valuation, &cx.conclusion)?] {
        return Err(Error::Verification(
            "counterexample sequent does not fail in the target".into(),
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::language::Signature;

    fn sig() -> Signature {
        Signature::new("cl", [("imp", 2), ("neg", 1), ("and", 2), ("or", 2)]).unwrap()
    }

    fn b2() -> GMatrix {
        let alg = FiniteAlgebra::new(
            sig(),
            2,
            vec![vec![1, 1, 0, 1], vec![1, 0], vec![0, 0, 0, 1], vec![0, 1, 1, 1]],
            None,
        )
        .unwrap();
        GMatrix::new(alg, &[vec![1]]).unwrap()
    }

    fn l3() -> GMatrix {
        let alg = FiniteAlgebra::from_fn(sig(), 3, |op, args| match op {
            0 => (2 - args[0] + args[1]).min(2),
            1 => 2 - args[0],
            2 => args[0].min(args[1]),
            _ => args[0].max(args[1]),
        })
        .unwrap();
        GMatrix::new(alg, &[vec![2]]).unwrap()
    }

    #[test]
    fn reflexive() {
        let caps = Caps::default();
        assert!(models(&b2(), &b2(), &caps).unwrap().holds());
        assert!(models(&l3(), &l3(), &caps).unwrap().holds());
        let dup = GMatrix::new(l3().algebra().clone(), &[vec![2], vec![2]]).unwrap();
        assert!(same_system(&l3(), &dup, &caps).unwrap().is_same());
    }

    #[test]
    fn l3_is_weaker_than_b2() {
        let caps = Caps::default();
        // Every Ł3 consequence is classical.
        assert!(models(&b2(), &l3(), &caps).unwrap().holds());
        let Containment::Fails(cx) = models(&l3(), &b2(), &caps).unwrap() else {
            panic!("classical logic proves more than Ł3");
        };
        assert!(b2().consequence(&cx.premises, &cx.conclusion, &caps).unwrap().holds());
        assert!(!l3().consequence(&cx.premises, &cx.conclusion, &caps).unwrap().holds());
        match same_system(&b2(), &l3(), &caps).unwrap() {
            Comparison::Differ { valid_in, .. } => assert_eq!(valid_in, Side::First),
            Comparison::Same => panic!(),
        }
    }

    #[test]
    fn subsets_in_order() {
        let mut s = vec![0, 1];
        let mut all = vec![s.clone()];
        while next_subset(&mut s, 4) {
            all.push(s.clone());
        }
        assert_eq!(all.len(), 6);
        assert_eq!(all.last().unwrap(), &vec![2, 3]);
    }
}
