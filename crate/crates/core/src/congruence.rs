//! Leibniz, Frege, Suszko, Tarski and Rasiowa relations, matrix reduction,
//! and the implicative-extensional conditions.
//!
//! The relations relative to a theory live on a Lindenbaum reduct `F(k)`.
//! For a closed set with support `T*`, the kernel `θ` of
//! `g ↦ (g(t)/Ω)_{t ∈ T*}` (with `Ω` the Leibniz congruence of the base
//! matrix) is a congruence contained in the Frege relation and compatible
//! with the set. Every congruence asked for here therefore contains `θ`, and
//! is computed on the image algebra `F(k)/θ`, a subalgebra of
//! `(A/Ω)^{T*}`, before being pulled back.

use std::collections::HashMap;

use crate::algebra::FiniteAlgebra;
use crate::equivalence::models;
use crate::error::{Error, Result};
use crate::matrix::{closed_sets, Caps, ClosedSet, GMatrix, LindenbaumReduct, Matrix};
use crate::partition::{Partition, Relation};

/// Whether `filter` is a union of blocks of `part`.
pub fn compatible(part: &Partition, filter: &[bool]) -> bool {
    part.len() == filter.len() && part.saturates(filter)
}

/// The largest congruence of the algebra compatible with the filter.
pub fn leibniz_congruence(m: &Matrix) -> Partition {
    let eq = Partition::two_block(m.algebra().size(), m.mask());
    m.algebra().largest_congruence_below(&eq)
}

/// A matrix reduced by its Leibniz congruence, with the projection.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reduction {
    pub matrix: Matrix,
    pub projection: Vec<usize>,
    pub congruence: Partition,
}

pub fn reduce_with_projection(m: &Matrix) -> Reduction {
    let congruence = leibniz_congruence(m);
    let (alg, projection) = m.algebra().quotient_unchecked(&congruence);
    let mut filter = vec![false; alg.size()];
    for x in m.filter() {
        filter[projection[x]] = true;
    }
    let matrix = Matrix::from_mask(alg, filter).expect("image of a nonempty filter");
    Reduction {
        matrix,
        projection,
        congruence,
    }
}

/// The quotient by the Leibniz congruence, with the image filter.
pub fn reduce(m: &Matrix) -> Matrix {
    reduce_with_projection(m).matrix
}

/// A closed set of a Lindenbaum reduct, viewed as a theory.
#[derive(Clone, Copy, Debug)]
pub struct TheoryOnReduct<'a> {
    pub reduct: &'a LindenbaumReduct,
    pub set: &'a ClosedSet,
}

impl<'a> TheoryOnReduct<'a> {
    pub fn new(reduct: &'a LindenbaumReduct, set: &'a ClosedSet) -> Self {
        TheoryOnReduct { reduct, set }
    }
}

/// `g` and `h` are related when each follows from the theory plus the other.
/// Over the reduct this means they are designated at the same tuples of the
/// theory's support.
pub fn frege_relation(t: TheoryOnReduct) -> Partition {
    let r = t.reduct;
    let f = r.base().mask();
    let patterns: Vec<Vec<bool>> = (0..r.len())
        .map(|g| {
            t.set
                .support
                .iter()
                .map(|&tuple| f[r.functions().value(g, tuple)])
                .collect()
        })
        .collect();
    Partition::from_labels(&patterns.iter().collect::<Vec<_>>())
}

/// The reduct modulo the floor congruence of one theory.
struct Floor {
    algebra: FiniteAlgebra,
    /// Reduct element -> floor element.
    labels: Vec<u32>,
    /// Floor elements designated at every coordinate.
    members: Vec<bool>,
    /// Floor elements as designation patterns over the support.
    patterns: Vec<Vec<bool>>,
}

impl Floor {
    fn new(
        t: TheoryOnReduct,
        base: &Reduction,
        reduct_algebra: &FiniteAlgebra,
        caps: &Caps,
    ) -> Result<Option<Floor>> {
        let r = t.reduct;
        let support = &t.set.support;
        if support.is_empty() {
            return Ok(None);
        }
        let mut index: HashMap<Vec<u32>, u32> = HashMap::new();
        let mut images: Vec<Vec<u32>> = Vec::new();
        let mut reps: Vec<usize> = Vec::new();
        let labels: Vec<u32> = (0..r.len())
            .map(|g| {
                let image: Vec<u32> = support
                    .iter()
                    .map(|&tuple| base.projection[r.functions().value(g, tuple)] as u32)
                    .collect();
                *index.entry(image.clone()).or_insert_with(|| {
                    images.push(image);
                    reps.push(g);
                    reps.len() as u32 - 1
                })
            })
            .collect();
        let size = reps.len() as u128;
        let cells: u128 = reduct_algebra
            .signature()
            .connectives()
            .iter()
            .map(|c| size.saturating_pow(c.arity as u32))
            .fold(0, u128::saturating_add);
        if cells > caps.max_table_cells {
            return Err(Error::cap("operation table cells", cells, caps.max_table_cells));
        }
        let mut lifted = Vec::new();
        let algebra = FiniteAlgebra::from_fn(
            reduct_algebra.signature().clone(),
            reps.len(),
            |op, args| {
                lifted.clear();
                lifted.extend(args.iter().map(|&q| reps[q]));
                labels[reduct_algebra.apply(op, &lifted)] as usize
            },
        )?;
        let bf = base.matrix.mask();
        let patterns: Vec<Vec<bool>> = images
            .iter()
            .map(|v| v.iter().map(|&x| bf[x as usize]).collect())
            .collect();
        let members = patterns.iter().map(|p| p.iter().all(|&d| d)).collect();
        Ok(Some(Floor {
            algebra,
            labels,
            members,
            patterns,
        }))
    }

    fn pull_back(&self, p: &Partition) -> Partition {
        let labels: Vec<usize> = self.labels.iter().map(|&q| p.block_of(q as usize)).collect();
        Partition::from_labels(&labels)
    }

    fn suszko(&self) -> Partition {
        let frege = Partition::from_labels(&self.patterns.iter().collect::<Vec<_>>());
        self.pull_back(&self.algebra.largest_congruence_below(&frege))
    }

    fn leibniz(&self) -> Partition {
        let eq = Partition::two_block(self.algebra.size(), &self.members);
        self.pull_back(&self.algebra.largest_congruence_below(&eq))
    }
}

/// The Leibniz reduction of the base matrix of a reduct.
fn base_reduction(r: &LindenbaumReduct) -> Reduction {
    reduce_with_projection(r.base())
}

/// The largest congruence of the reduct contained in the Frege relation.
pub fn suszko_congruence(t: TheoryOnReduct, caps: &Caps) -> Result<Partition> {
    let base = base_reduction(t.reduct);
    let alg = t.reduct.functions().algebra(caps)?;
    Ok(match Floor::new(t, &base, alg, caps)? {
        Some(floor) => floor.suszko(),
        None => Partition::total(t.reduct.len()),
    })
}

/// The Leibniz congruence of the matrix `⟨F(k), members⟩`.
pub fn leibniz_on_reduct(t: TheoryOnReduct, caps: &Caps) -> Result<Partition> {
    let base = base_reduction(t.reduct);
    let alg = t.reduct.functions().algebra(caps)?;
    Ok(match Floor::new(t, &base, alg, caps)? {
        Some(floor) => floor.leibniz(),
        None => Partition::total(t.reduct.len()),
    })
}

/// Frege, Suszko and Leibniz relations of one closed set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TheoryCongruences {
    pub set: ClosedSet,
    pub frege: Partition,
    pub suszko: Partition,
    pub leibniz: Partition,
}

/// Every closed set of `F(k)` with its relations, and their Tarski meet.
#[derive(Debug)]
pub struct CongruenceReport {
    pub reduct: LindenbaumReduct,
    pub theories: Vec<TheoryCongruences>,
    pub tarski: Partition,
}

pub fn congruence_report(m: &Matrix, k: usize, caps: &Caps) -> Result<CongruenceReport> {
    let reduct = LindenbaumReduct::new(m, k, caps)?;
    let sets = closed_sets(&reduct, caps)?;
    let base = base_reduction(&reduct);
    let alg = reduct.functions().algebra(caps)?;
    let mut theories = Vec::with_capacity(sets.len());
    let mut tarski = Partition::total(reduct.len());
    for set in sets {
        let t = TheoryOnReduct::new(&reduct, &set);
        let frege = frege_relation(t);
        let (suszko, leibniz) = match Floor::new(t, &base, alg, caps)? {
            Some(floor) => (floor.suszko(), floor.leibniz()),
            None => (Partition::total(reduct.len()), Partition::total(reduct.len())),
        };
        tarski = tarski.meet(&suszko);
        theories.push(TheoryCongruences {
            set,
            frege,
            suszko,
            leibniz,
        });
    }
    Ok(CongruenceReport {
        reduct,
        theories,
        tarski,
    })
}

/// A relation of the inclusion chain that fails for one closed set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainFailure {
    /// Index into `CongruenceReport::theories`.
    pub theory: usize,
    pub condition: &'static str,
}

impl CongruenceReport {
    /// Checks, for every closed set `T`: Tarski ⊆ Suszko(T) ⊆ Frege(T),
    /// Suszko(T) ⊆ Leibniz(T), `T` a union of Suszko(T) classes, and
    /// Leibniz(T) equal to the meet of Suszko(T') over closed sets `T' ⊇ T`.
    pub fn chain_failures(&self) -> Vec<ChainFailure> {
        let mut out = Vec::new();
        for (i, t) in self.theories.iter().enumerate() {
            let mut fail = |condition| out.push(ChainFailure { theory: i, condition });
            if !self.tarski.refines(&t.suszko) {
                fail("Tarski refines Suszko");
            }
            if !t.suszko.refines(&t.frege) {
                fail("Suszko refines Frege");
            }
            if !t.suszko.refines(&t.leibniz) {
                fail("Suszko refines Leibniz");
            }
            if !compatible(&t.suszko, &t.set.mask) {
                fail("Suszko compatible with the theory");
            }
            let meet = self
                .theories
                .iter()
                // Larger closed sets have smaller supports.
                .filter(|u| u.set.support.iter().all(|x| t.set.support.contains(x)))
                .fold(Partition::total(self.reduct.len()), |acc, u| acc.meet(&u.suszko));
            if meet != t.leibniz {
                fail("Leibniz is the meet of Suszko over extensions");
            }
        }
        out
    }
}

/// The meet of the Suszko congruences of all closed sets of `F(k)`.
pub fn tarski_congruence(m: &Matrix, k: usize, caps: &Caps) -> Result<Partition> {
    Ok(congruence_report(m, k, caps)?.tarski)
}

pub(crate) fn binary_connective(m: &Matrix, arrow: &str) -> Result<usize> {
    let sig = m.algebra().signature();
    let op = sig
        .index_of(arrow)
        .ok_or_else(|| Error::UnknownConnective(arrow.to_string()))?;
    if sig.connectives()[op].arity != 2 {
        return Err(Error::NotBinary(arrow.to_string()));
    }
    Ok(op)
}

/// `g ≈ h` when `arrow(g, h)` and `arrow(h, g)` are both tautologies, as a
/// relation on the elements of `F(k)`.
pub fn rasiowa_relation(m: &Matrix, arrow: &str, k: usize, caps: &Caps) -> Result<Relation> {
    let op = binary_connective(m, arrow)?;
    let reduct = LindenbaumReduct::new(m, k, caps)?;
    Ok(rasiowa_on(&reduct, op))
}

pub(crate) fn rasiowa_on(reduct: &LindenbaumReduct, op: usize) -> Relation {
    let alg = reduct.base().algebra();
    let f = reduct.base().mask();
    let funcs = reduct.functions();
    Relation::from_fn(reduct.len(), |g, h| {
        (0..funcs.tuple_count()).all(|t| {
            let (x, y) = (funcs.value(g, t), funcs.value(h, t));
            f[alg.apply(op, &[x, y])] && f[alg.apply(op, &[y, x])]
        })
    })
}

/// The first failure of one of the five implicative clauses.
///
/// Clauses, in checking order: 1 `a → a`, 2 `b ⊢ a → b`, 3 `a → b, b → c ⊢ a → c`,
/// 4 `a, a → b ⊢ b`, 5 compatibility of every connective with mutual implication.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClauseViolation {
    /// 1 to 5.
    pub clause: usize,
    /// The S-filter where the clause fails.
    pub filter: Vec<usize>,
    /// Elements `a, b, c` for clauses 1 to 4; for clause 5 the `a` tuple followed by
    /// the `b` tuple.
    pub witnesses: Vec<usize>,
    /// The connective for clause 5.
    pub connective: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ImplicativeReport {
    /// Every subset `G` of the universe for which `⟨A, G⟩` is a model of the
    /// matrix's consequence, by cardinality and then members. The empty set
    /// is not considered.
    pub s_filters: Vec<Vec<usize>>,
    pub violation: Option<ClauseViolation>,
}

impl ImplicativeReport {
    pub fn holds(&self) -> bool {
        self.violation.is_none()
    }
}

/// The nonempty S-filters of the algebra of `m`.
pub fn s_filters(m: &Matrix, caps: &Caps) -> Result<Vec<Vec<bool>>> {
    let n = m.algebra().size();
    if n > 20 {
        return Err(Error::cap("candidate filters", 1u128 << n, 1 << 20));
    }
    let mut subsets: Vec<Vec<usize>> = (1u32..(1 << n))
        .map(|bits| (0..n).filter(|&x| bits >> x & 1 == 1).collect())
        .collect();
    subsets.sort_by(|a, b| (a.len(), a).cmp(&(b.len(), b)));
    let reference = m.to_gmatrix();
    let mut out = Vec::new();
    for s in subsets {
        let g = GMatrix::new(m.algebra().clone(), std::slice::from_ref(&s))?;
        if models(&g, &reference, caps)?.holds() {
            out.push(g.masks()[0].clone());
        }
    }
    Ok(out)
}

/// Least witness (in enumeration order) refuting clause `clause` of the
/// implicative-extensional conditions on the filter `g`.
pub fn check_clause(
    alg: &FiniteAlgebra,
    arrow: usize,
    g: &[bool],
    clause: usize,
) -> Option<(Vec<usize>, Option<String>)> {
    let n = alg.size();
    let imp = |a: usize, b: usize| alg.apply(arrow, &[a, b]);
    match clause {
        1 => (0..n).find(|&a| !g[imp(a, a)]).map(|a| (vec![a], None)),
        2 => {
            for a in 0..n {
                for b in 0..n {
                    if g[b] && !g[imp(a, b)] {
                        return Some((vec![a, b], None));
                    }
                }
            }
            None
        }
        3 => {
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        if g[imp(a, b)] && g[imp(b, c)] && !g[imp(a, c)] {
                            return Some((vec![a, b, c], None));
                        }
                    }
                }
            }
            None
        }
        4 => {
            for a in 0..n {
                for b in 0..n {
                    if g[a] && g[imp(a, b)] && !g[b] {
                        return Some((vec![a, b], None));
                    }
                }
            }
            None
        }
        5 => {
            let equiv = |a: usize, b: usize| g[imp(a, b)] && g[imp(b, a)];
            for (op, c) in alg.signature().connectives().iter().enumerate() {
                let r = c.arity;
                let mut xs = vec![0usize; r];
                loop {
                    let mut ys = vec![0usize; r];
                    loop {
                        if xs.iter().zip(&ys).all(|(&a, &b)| equiv(a, b))
                            && !g[imp(alg.apply(op, &xs), alg.apply(op, &ys))]
                        {
                            let mut w = xs.clone();
                            w.extend(&ys);
                            return Some((w, Some(c.symbol.clone())));
                        }
                        if !crate::algebra::increment(&mut ys, n) {
                            break;
                        }
                    }
                    if !crate::algebra::increment(&mut xs, n) {
                        break;
                    }
                }
            }
            None
        }
        _ => panic!("there are five clauses"),
    }
}

/// Checks the five implicative clauses over every S-filter, clause by clause; the first failing
/// clause is reported with its first filter and least witnesses.
pub fn is_implicative_extensional(
    m: &Matrix,
    arrow: &str,
    caps: &Caps,
) -> Result<ImplicativeReport> {
    let op = binary_connective(m, arrow)?;
    let filters = s_filters(m, caps)?;
    let as_list = |g: &[bool]| (0..g.len()).filter(|&x| g[x]).collect::<Vec<_>>();
    let mut violation = None;
    'clauses: for clause in 1..=5 {
        for g in &filters {
            if let Some((witnesses, connective)) = check_clause(m.algebra(), op, g, clause) {
                violation = Some(ClauseViolation {
                    clause,
                    filter: as_list(g),
                    witnesses,
                    connective,
                });
                break 'clauses;
            }
        }
    }
    Ok(ImplicativeReport {
        s_filters: filters.iter().map(|g| as_list(g)).collect(),
        violation,
    })
}
