//! Lindenbaum–Tarski quotients of term-function reducts, their pointed
//! expansions, and bounded checks of the identities `A = 1` for theorems `A`.

use std::ops::ControlFlow;

use crate::algebra::{FiniteAlgebra, PointedAlgebra, Valuation};
use crate::error::{Error, Result};
use crate::language::{canonical_var_name, Formula};
use crate::matrix::{all_tuples, Caps, LindenbaumReduct, Matrix};
use crate::partition::Partition;
use crate::sweep::{EvalSpace, Sweep};

/// The quotient of `F(k)` by the congruence generated by its tautologies.
#[derive(Debug)]
pub struct LtAlgebra {
    pub reduct: LindenbaumReduct,
    pub congruence: Partition,
    pub quotient: FiniteAlgebra,
    /// Reduct element -> quotient element.
    pub projection: Vec<usize>,
    /// Whether the tautologies form exactly one class.
    pub admits: bool,
}

impl LtAlgebra {
    /// The class of the tautologies, when they form one class.
    pub fn one(&self) -> Option<usize> {
        let first = *self.reduct.filter().first()?;
        self.admits.then(|| self.projection[first])
    }

    /// `v0(p_i)`: the class of the `i`-th projection.
    pub fn canonical_point(&self) -> Vec<usize> {
        self.reduct
            .functions()
            .generator_indices()
            .iter()
            .map(|&g| self.projection[g])
            .collect()
    }

    pub fn canonical_valuation(&self) -> Valuation {
        self.canonical_point()
            .into_iter()
            .enumerate()
            .map(|(i, x)| (canonical_var_name(i + 1), x))
            .collect()
    }
}

pub fn lt_algebra(m: &Matrix, k: usize, caps: &Caps) -> Result<LtAlgebra> {
    let reduct = LindenbaumReduct::new(m, k, caps)?;
    let alg = reduct.functions().algebra(caps)?;
    let filter = reduct.filter();
    let pairs: Vec<(usize, usize)> = filter.windows(2).map(|w| (w[0], w[1])).collect();
    let congruence = alg.congruence_generated(&pairs);
    let (quotient, projection) = alg.quotient_unchecked(&congruence);
    let admits = match filter.first() {
        Some(&g) => {
            let block = congruence.block_of(g);
            (0..reduct.len()).all(|h| reduct.filter_mask()[h] == (congruence.block_of(h) == block))
        }
        None => false,
    };
    Ok(LtAlgebra {
        reduct,
        congruence,
        quotient,
        projection,
        admits,
    })
}

/// Outcome of comparing theoremhood in a matrix with `v0(A) = 1` in its
/// Lindenbaum–Tarski quotient.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CanonicalCheck {
    pub formulas_checked: usize,
    /// The first formula on which the two disagree.
    pub mismatch: Option<Formula>,
}

impl CanonicalCheck {
    pub fn passed(&self) -> bool {
        self.mismatch.is_none()
    }
}

/// For every formula over `p1..pk` up to `depth`: `A` is a theorem of the
/// matrix iff `v0(A)` is the class of the tautologies.
pub fn canonical_valuation_check(lt: &LtAlgebra, depth: usize, caps: &Caps) -> Result<CanonicalCheck> {
    let one = lt.one().ok_or(Error::NotAdmitted)?;
    let base = lt.reduct.base();
    let k = lt.reduct.functions().arity();
    let tuples = all_tuples(base.algebra().size(), k);
    let sweep = Sweep::new(
        base.algebra().signature(),
        k,
        depth,
        vec![
            EvalSpace::new(base.algebra(), tuples),
            EvalSpace::new(&lt.quotient, vec![lt.canonical_point()]),
        ],
        caps,
    )?;
    let mut result = CanonicalCheck {
        formulas_checked: 0,
        mismatch: None,
    };
    sweep.for_each(|item| {
        result.formulas_checked += 1;
        let theorem = item.values(0).iter().all(|&x| base.is_designated(x as usize));
        if theorem != (item.values(1)[0] as usize == one) {
            result.mismatch = Some(item.formula());
            return ControlFlow::Break(());
        }
        ControlFlow::Continue(())
    });
    Ok(result)
}

/// The Lindenbaum–Tarski quotient pointed at the class of the tautologies.
pub fn pointed_lt(m: &Matrix, k: usize, caps: &Caps) -> Result<PointedAlgebra> {
    let lt = lt_algebra(m, k, caps)?;
    let one = lt.one().ok_or(Error::NotAdmitted)?;
    PointedAlgebra::new(lt.quotient, one)
}

/// A theorem `A` of the matrix with a valuation where `A ≠ 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdentityFailure {
    pub formula: Formula,
    pub valuation: Valuation,
}

/// Whether `p` satisfies `A = 1` for every theorem `A` of `m` over
/// `p1..pk` up to `depth`; the first failure in enumeration order otherwise.
pub fn variety_membership(
    p: &PointedAlgebra,
    m: &Matrix,
    k: usize,
    depth: usize,
    caps: &Caps,
) -> Result<Option<IdentityFailure>> {
    let alg = p.algebra();
    m.algebra().signature().ensure_same(alg.signature())?;
    let points = all_tuples(alg.size(), k);
    if points.len() as u128 > caps.max_valuations {
        return Err(Error::cap("valuations", points.len() as u128, caps.max_valuations));
    }
    let sweep = Sweep::new(
        alg.signature(),
        k,
        depth,
        vec![
            EvalSpace::new(m.algebra(), all_tuples(m.algebra().size(), k)),
            EvalSpace::new(alg, points.clone()),
        ],
        caps,
    )?;
    let one = p.one() as u32;
    let mut failure = None;
    sweep.for_each(|item| {
        if !item.values(0).iter().all(|&x| m.is_designated(x as usize)) {
            return ControlFlow::Continue(());
        }
        if let Some(at) = item.values(1).iter().position(|&x| x != one) {
            failure = Some(IdentityFailure {
                formula: item.formula(),
                valuation: points[at]
                    .iter()
                    .enumerate()
                    .map(|(i, &x)| (canonical_var_name(i + 1), x))
                    .collect(),
            });
            return ControlFlow::Break(());
        }
        ControlFlow::Continue(())
    });
    Ok(failure)
}
