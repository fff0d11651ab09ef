//! Logical matrices and g-matrices, consequence by valuation enumeration,
//! term-function algebras `F(k)`, Lindenbaum reducts and their closed sets.
//!
//! Theories are represented on term functions rather than on formulas: over
//! `k` variables a formula matters only through the function it induces, so
//! the infinite formula algebra collapses to the finite algebra `F(k)`.

use std::collections::BTreeSet;
use std::sync::OnceLock;

use crate::algebra::{increment, valuation_count, CompiledFormula, FiniteAlgebra, Valuation};
use crate::closure::VectorClosure;
use crate::error::{Error, Result};
use crate::language::{vars_of, Formula};
use crate::sweep::{EvalSpace, Sweep};

/// Hard limits that turn exponential blowups into explicit errors.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Caps {
    /// Valuations enumerated by a single consequence check.
    pub max_valuations: u128,
    /// Cells of term-function tables: elements × `|A|^k`.
    pub max_cells: u128,
    /// Cells of derived operation tables (quotients, reducts as algebras).
    pub max_table_cells: u128,
    /// Formulas enumerated by a bounded sweep.
    pub max_formulas: u128,
    /// Matrices enumerated by independence search.
    pub max_matrices: u128,
    /// Closed sets of a Lindenbaum reduct.
    pub max_closed_sets: u128,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            max_valuations: 1 << 20,
            max_cells: 1 << 20,
            max_table_cells: 1 << 26,
            max_formulas: 1 << 24,
            max_matrices: 1 << 24,
            max_closed_sets: 1 << 16,
        }
    }
}

/// Outcome of a consequence check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    /// The least refuting valuation in enumeration order, and the index of
    /// the filter it refutes (always 0 for a plain matrix).
    Fails { filter: usize, valuation: Valuation },
}

impl Verdict {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::Holds)
    }

    pub fn valuation(&self) -> Option<&Valuation> {
        match self {
            Verdict::Holds => None,
            Verdict::Fails { valuation, .. } => Some(valuation),
        }
    }
}

fn mask_from(n: usize, elements: &[usize], what: &str) -> Result<Vec<bool>> {
    let mut mask = vec![false; n];
    for &x in elements {
        if x >= n {
            return Err(Error::Matrix(format!(
                "{what} element {x} is outside the universe of size {n}"
            )));
        }
        mask[x] = true;
    }
    Ok(mask)
}

fn members(mask: &[bool]) -> Vec<usize> {
    (0..mask.len()).filter(|&x| mask[x]).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matrix {
    algebra: FiniteAlgebra,
    filter: Vec<bool>,
}

impl Matrix {
    pub fn new(algebra: FiniteAlgebra, filter: &[usize]) -> Result<Self> {
        let mask = mask_from(algebra.size(), filter, "filter")?;
        Matrix::from_mask(algebra, mask)
    }

    pub fn from_mask(algebra: FiniteAlgebra, filter: Vec<bool>) -> Result<Self> {
        if filter.len() != algebra.size() {
            return Err(Error::Matrix("filter mask has the wrong length".into()));
        }
        if !filter.contains(&true) {
            return Err(Error::Matrix("the filter must be nonempty".into()));
        }
        Ok(Matrix { algebra, filter })
    }

    pub fn algebra(&self) -> &FiniteAlgebra {
        &self.algebra
    }

    pub fn filter(&self) -> Vec<usize> {
        members(&self.filter)
    }

    pub fn mask(&self) -> &[bool] {
        &self.filter
    }

    pub fn is_designated(&self, x: usize) -> bool {
        self.filter[x]
    }

    pub fn to_gmatrix(&self) -> GMatrix {
        GMatrix {
            algebra: self.algebra.clone(),
            filters: vec![self.filter.clone()],
        }
    }

    pub fn consequence(
        &self,
        premises: &[Formula],
        conclusion: &Formula,
        caps: &Caps,
    ) -> Result<Verdict> {
        consequence(&self.algebra, std::slice::from_ref(&self.filter), premises, conclusion, caps)
    }
}

/// An algebra with a nonempty family of filters; its consequence is the
/// intersection of the consequences of the member matrices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GMatrix {
    algebra: FiniteAlgebra,
    filters: Vec<Vec<bool>>,
}

impl GMatrix {
    pub fn new(algebra: FiniteAlgebra, filters: &[Vec<usize>]) -> Result<Self> {
        let masks = filters
            .iter()
            .map(|f| mask_from(algebra.size(), f, "filter"))
            .collect::<Result<Vec<_>>>()?;
        GMatrix::from_masks(algebra, masks)
    }

    pub fn from_masks(algebra: FiniteAlgebra, filters: Vec<Vec<bool>>) -> Result<Self> {
        if filters.is_empty() {
            return Err(Error::Matrix("a g-matrix needs at least one filter".into()));
        }
        if filters.iter().any(|f| f.len() != algebra.size()) {
            return Err(Error::Matrix("filter mask has the wrong length".into()));
        }
        Ok(GMatrix { algebra, filters })
    }

    pub fn algebra(&self) -> &FiniteAlgebra {
        &self.algebra
    }

    pub fn filters(&self) -> Vec<Vec<usize>> {
        self.filters.iter().map(|f| members(f)).collect()
    }

    pub fn masks(&self) -> &[Vec<bool>] {
        &self.filters
    }

    pub fn consequence(
        &self,
        premises: &[Formula],
        conclusion: &Formula,
        caps: &Caps,
    ) -> Result<Verdict> {
        consequence(&self.algebra, &self.filters, premises, conclusion, caps)
    }
}

impl From<&Matrix> for GMatrix {
    fn from(m: &Matrix) -> GMatrix {
        m.to_gmatrix()
    }
}

/// Enumerates valuations of the occurring variables in mixed-radix order,
/// first variable (by name) most significant.
fn consequence(
    alg: &FiniteAlgebra,
    filters: &[Vec<bool>],
    premises: &[Formula],
    conclusion: &Formula,
    caps: &Caps,
) -> Result<Verdict> {
    let sig = alg.signature();
    for f in premises.iter().chain([conclusion]) {
        f.check(sig)?;
    }
    let vars: Vec<String> = vars_of(premises.iter().chain([conclusion]))
        .into_iter()
        .collect();
    let total = valuation_count(alg.size(), vars.len(), caps.max_valuations)?;
    let prem: Vec<CompiledFormula> = premises
        .iter()
        .map(|f| CompiledFormula::compile(alg, &vars, f))
        .collect::<Result<_>>()?;
    let concl = CompiledFormula::compile(alg, &vars, conclusion)?;
    let mut point = vec![0usize; vars.len()];
    let mut stack = Vec::new();
    let mut prem_values = vec![0usize; prem.len()];
    for _ in 0..total {
        let c = concl.eval_with(alg, &point, &mut stack);
        let c_ok: Vec<bool> = filters.iter().map(|f| f[c]).collect();
        if c_ok.contains(&false) {
            for (slot, p) in prem_values.iter_mut().zip(&prem) {
                *slot = p.eval_with(alg, &point, &mut stack);
            }
            for (i, f) in filters.iter().enumerate() {
                if !c_ok[i] && prem_values.iter().all(|&v| f[v]) {
                    return Ok(Verdict::Fails {
                        filter: i,
                        valuation: vars.iter().cloned().zip(point.iter().copied()).collect(),
                    });
                }
            }
        }
        increment(&mut point, alg.size());
    }
    Ok(Verdict::Holds)
}

pub fn matrix_consequence(m: &Matrix, premises: &[Formula], conclusion: &Formula) -> Result<Verdict> {
    m.consequence(premises, conclusion, &Caps::default())
}

pub fn gmatrix_consequence(
    gm: &GMatrix,
    premises: &[Formula],
    conclusion: &Formula,
) -> Result<Verdict> {
    gm.consequence(premises, conclusion, &Caps::default())
}

/// All `k`-tuples over `{0..n}` in mixed-radix order, first coordinate most
/// significant.
pub fn all_tuples(n: usize, k: usize) -> Vec<Vec<usize>> {
    let count = n.pow(k as u32);
    let mut out = Vec::with_capacity(count);
    let mut t = vec![0usize; k];
    for _ in 0..count {
        out.push(t.clone());
        increment(&mut t, n);
    }
    out
}

/// Theorems of `m` over `p1..pk` of depth at most `depth`, in sweep order.
pub fn theorems_upto(m: &Matrix, k: usize, depth: usize, caps: &Caps) -> Result<Vec<Formula>> {
    let space = EvalSpace::new(m.algebra(), all_tuples(m.algebra().size(), k));
    let sweep = Sweep::new(m.algebra().signature(), k, depth, vec![space], caps)?;
    let mut out = Vec::new();
    sweep.for_each(|item| {
        if item.values(0).iter().all(|&v| m.filter[v as usize]) {
            out.push(item.formula());
        }
        std::ops::ControlFlow::Continue(())
    });
    Ok(out)
}

/// The first formula (in sweep order) that is a theorem of exactly one of the
/// two matrices, or `None` if their theorems agree up to the bound.
pub fn weak_adequacy_witness(
    m: &Matrix,
    reference: &Matrix,
    k: usize,
    depth: usize,
    caps: &Caps,
) -> Result<Option<Formula>> {
    m.algebra.signature().ensure_same(reference.algebra.signature())?;
    let spaces = vec![
        EvalSpace::new(m.algebra(), all_tuples(m.algebra().size(), k)),
        EvalSpace::new(reference.algebra(), all_tuples(reference.algebra().size(), k)),
    ];
    let sweep = Sweep::new(m.algebra().signature(), k, depth, spaces, caps)?;
    let mut witness = None;
    sweep.for_each(|item| {
        let a = item.values(0).iter().all(|&v| m.filter[v as usize]);
        let b = item.values(1).iter().all(|&v| reference.filter[v as usize]);
        if a != b {
            witness = Some(item.formula());
            std::ops::ControlFlow::Break(())
        } else {
            std::ops::ControlFlow::Continue(())
        }
    });
    Ok(witness)
}

pub fn is_weakly_adequate(
    m: &Matrix,
    reference: &Matrix,
    k: usize,
    depth: usize,
    caps: &Caps,
) -> Result<bool> {
    Ok(weak_adequacy_witness(m, reference, k, depth, caps)?.is_none())
}

/// The subalgebra of `A^(A^k)` generated by the `k` projections: the
/// `k`-generated free algebra of the variety generated by `A`.
///
/// A function is stored as its table over `A^k` in mixed-radix order, so
/// the tuple `(t_1, ..., t_k)` sits at `Σ t_i · |A|^(k-i)`.
pub struct TermFunctionAlgebra {
    base: FiniteAlgebra,
    k: usize,
    closure: VectorClosure,
    representatives: Vec<Formula>,
    generator_indices: Vec<usize>,
    as_algebra: OnceLock<FiniteAlgebra>,
}

impl std::fmt::Debug for TermFunctionAlgebra {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TermFunctionAlgebra")
            .field("k", &self.k)
            .field("size", &self.len())
            .finish()
    }
}

impl TermFunctionAlgebra {
    pub fn new(base: &FiniteAlgebra, k: usize, caps: &Caps) -> Result<Self> {
        let n = base.size();
        let width = (n as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
        if width > caps.max_cells {
            return Err(Error::cap("term-function cells", width, caps.max_cells));
        }
        let width = width as usize;
        let tuples = all_tuples(n, k);
        let gens: Vec<Vec<u32>> = (0..k)
            .map(|i| tuples.iter().map(|t| t[i] as u32).collect())
            .collect();
        let max_elements = (caps.max_cells / width as u128).min(u32::MAX as u128 - 1) as usize;
        let closure = VectorClosure::generate(&vec![base; width], &gens, max_elements, None)
            .map_err(|e| match e {
                Error::CapExceeded { needed, .. } => {
                    Error::cap("term-function cells", needed * width as u128, caps.max_cells)
                }
                other => other,
            })?;
        let representatives = closure.formulas();
        let generator_indices = closure.generator_index().iter().map(|&i| i as usize).collect();
        Ok(TermFunctionAlgebra {
            base: base.clone(),
            k,
            closure,
            representatives,
            generator_indices,
            as_algebra: OnceLock::new(),
        })
    }

    pub fn base(&self) -> &FiniteAlgebra {
        &self.base
    }

    pub fn arity(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.closure.len()
    }

    pub fn is_empty(&self) -> bool {
        self.closure.is_empty()
    }

    /// Number of argument tuples, `|A|^k`.
    pub fn tuple_count(&self) -> usize {
        self.closure.width()
    }

    pub fn tuple(&self, index: usize) -> Vec<usize> {
        let n = self.base.size();
        let mut t = vec![0; self.k];
        let mut rest = index;
        for slot in t.iter_mut().rev() {
            *slot = rest % n;
            rest /= n;
        }
        t
    }

    pub fn function(&self, element: usize) -> &[u32] {
        self.closure.element(element)
    }

    pub fn value(&self, element: usize, tuple: usize) -> usize {
        self.closure.element(element)[tuple] as usize
    }

    pub fn representative(&self, element: usize) -> &Formula {
        &self.representatives[element]
    }

    pub fn representatives(&self) -> &[Formula] {
        &self.representatives
    }

    /// Element index of the projection onto each variable.
    pub fn generator_indices(&self) -> &[usize] {
        &self.generator_indices
    }

    /// The element whose table is `function`, if it is a term function.
    pub fn index_of(&self, function: &[u32]) -> Option<usize> {
        if function.len() != self.tuple_count() {
            return None;
        }
        self.closure.lookup(function)
    }

    /// Pointwise application of the `op`-th connective.
    pub fn apply(&self, op: usize, args: &[usize]) -> usize {
        let coords = vec![&self.base; self.tuple_count()];
        self.closure
            .apply(&coords, op, args)
            .expect("term functions are closed under the operations")
    }

    /// Value of `f` under the assignment `p_i ↦ i-th projection`, computed in
    /// this algebra. Variables other than `p1..pk` are rejected.
    pub fn eval_canonical(&self, f: &Formula) -> Result<usize> {
        match f {
            Formula::Var(v) => (1..=self.k)
                .find(|&i| *v == crate::language::canonical_var_name(i))
                .map(|i| self.generator_indices[i - 1])
                .ok_or_else(|| Error::UnboundVariable(v.clone())),
            Formula::App(symbol, args) => {
                let sig = self.base.signature();
                let op = sig
                    .index_of(symbol)
                    .ok_or_else(|| Error::UnknownConnective(symbol.clone()))?;
                let vals = args
                    .iter()
                    .map(|a| self.eval_canonical(a))
                    .collect::<Result<Vec<_>>>()?;
                Ok(self.apply(op, &vals))
            }
        }
    }

    /// The algebra with explicit operation tables, built once.
    pub fn algebra(&self, caps: &Caps) -> Result<&FiniteAlgebra> {
        if let Some(a) = self.as_algebra.get() {
            return Ok(a);
        }
        let size = self.len() as u128;
        let cells: u128 = self
            .base
            .signature()
            .connectives()
            .iter()
            .map(|c| size.checked_pow(c.arity as u32).unwrap_or(u128::MAX))
            .fold(0u128, |a, b| a.saturating_add(b));
        if cells > caps.max_table_cells {
            return Err(Error::cap("operation table cells", cells, caps.max_table_cells));
        }
        let alg = FiniteAlgebra::from_fn(self.base.signature().clone(), self.len(), |op, args| {
            self.apply(op, args)
        })?;
        let labels = self.representatives.iter().map(|f| f.to_string()).collect();
        let alg = alg.with_labels(Some(labels))?;
        Ok(self.as_algebra.get_or_init(|| alg))
    }
}

pub fn term_function_algebra(alg: &FiniteAlgebra, k: usize) -> Result<TermFunctionAlgebra> {
    TermFunctionAlgebra::new(alg, k, &Caps::default())
}

/// The term-function algebra `F(k)` of a matrix with the tautology functions
/// designated.
#[derive(Debug)]
pub struct LindenbaumReduct {
    base: Matrix,
    functions: TermFunctionAlgebra,
    filter: Vec<bool>,
}

impl LindenbaumReduct {
    pub fn new(m: &Matrix, k: usize, caps: &Caps) -> Result<Self> {
        let functions = TermFunctionAlgebra::new(m.algebra(), k, caps)?;
        let filter = (0..functions.len())
            .map(|g| functions.function(g).iter().all(|&v| m.filter[v as usize]))
            .collect();
        Ok(LindenbaumReduct {
            base: m.clone(),
            functions,
            filter,
        })
    }

    pub fn base(&self) -> &Matrix {
        &self.base
    }

    pub fn functions(&self) -> &TermFunctionAlgebra {
        &self.functions
    }

    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    pub fn filter_mask(&self) -> &[bool] {
        &self.filter
    }

    pub fn filter(&self) -> Vec<usize> {
        members(&self.filter)
    }

    /// `Th_t`: the functions designated at tuple `t`.
    pub fn designated_at(&self, tuple: usize) -> Vec<bool> {
        (0..self.len())
            .map(|g| self.base.filter[self.functions.value(g, tuple)])
            .collect()
    }

    /// The reduct as a matrix with explicit operation tables.
    pub fn to_matrix(&self, caps: &Caps) -> Result<Matrix> {
        let alg = self.functions.algebra(caps)?.clone();
        Matrix::from_mask(alg, self.filter.clone())
    }

    /// Whether `premises` entail `conclusion` in the reduct consequence,
    /// restricted to the tuples in `support`.
    pub fn entails_on(&self, support: &[usize], premises: &[usize], conclusion: usize) -> bool {
        let f = &self.base.filter;
        support.iter().all(|&t| {
            !premises.iter().all(|&g| f[self.functions.value(g, t)])
                || f[self.functions.value(conclusion, t)]
        })
    }
}

pub fn lindenbaum_reduct(m: &Matrix, k: usize) -> Result<LindenbaumReduct> {
    LindenbaumReduct::new(m, k, &Caps::default())
}

/// A theory of the reduct consequence: the functions designated at every
/// tuple of `support`, where `support` is exactly the set of tuples at which
/// all members are designated.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClosedSet {
    pub members: Vec<usize>,
    pub mask: Vec<bool>,
    pub support: Vec<usize>,
}

impl ClosedSet {
    pub fn contains(&self, g: usize) -> bool {
        self.mask[g]
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// All closed sets of the reduct, ordered by size and then by member list.
pub fn closed_sets(reduct: &LindenbaumReduct, caps: &Caps) -> Result<Vec<ClosedSet>> {
    let n = reduct.len();
    let words = n.div_ceil(64);
    let to_bits = |mask: &[bool]| {
        let mut bits = vec![0u64; words];
        for (g, &b) in mask.iter().enumerate() {
            if b {
                bits[g / 64] |= 1 << (g % 64);
            }
        }
        bits
    };
    let tuples = reduct.functions.tuple_count();
    let generators: Vec<Vec<u64>> = (0..tuples)
        .map(|t| to_bits(&reduct.designated_at(t)))
        .collect();
    let full = to_bits(&vec![true; n]);
    let mut seen: BTreeSet<Vec<u64>> = BTreeSet::new();
    let mut work = vec![full.clone()];
    seen.insert(full);
    // Every intersection of generators is reached by adding one at a time.
    while let Some(set) = work.pop() {
        for g in &generators {
            let next: Vec<u64> = set.iter().zip(g).map(|(a, b)| a & b).collect();
            if !seen.contains(&next) {
                if seen.len() as u128 >= caps.max_closed_sets {
                    return Err(Error::cap(
                        "closed sets",
                        seen.len() as u128 + 1,
                        caps.max_closed_sets,
                    ));
                }
                seen.insert(next.clone());
                work.push(next);
            }
        }
    }
    let mut out: Vec<ClosedSet> = seen
        .into_iter()
        .map(|bits| {
            let mask: Vec<bool> = (0..n).map(|g| bits[g / 64] >> (g % 64) & 1 == 1).collect();
            let support = (0..tuples)
                .filter(|&t| {
                    generators[t]
                        .iter()
                        .zip(&bits)
                        .all(|(gen, set)| set & !gen == 0)
                })
                .collect();
            ClosedSet {
                members: members(&mask),
                mask,
                support,
            }
        })
        .collect();
    out.sort_by(|a, b| (a.len(), &a.members).cmp(&(b.len(), &b.members)));
    Ok(out)
}
