//! Finite algebras given by operation tables, and the usual constructions on
//! them: congruences, quotients, products, generated subalgebras and
//! isomorphisms.
//!
//! Tables are row-major with the leftmost argument most significant, so the
//! entry for `f(a0, ..., a(r-1))` sits at `Σ a_i · n^(r-1-i)`.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::closure::VectorClosure;
use crate::error::{Error, Result};
use crate::language::{Formula, Signature};
use crate::partition::{Partition, UnionFind};

/// Variable assignment into a finite algebra.
pub type Valuation = BTreeMap<String, usize>;

/// Name of the distinguished constant of pointed algebras.
pub const ONE: &str = "one";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteAlgebra {
    signature: Signature,
    size: usize,
    tables: Vec<Vec<u32>>,
    labels: Option<Vec<String>>,
}

impl FiniteAlgebra {
    /// `tables[i]` is the table of the i-th connective of `signature`.
    pub fn new(
        signature: Signature,
        size: usize,
        tables: Vec<Vec<u32>>,
        labels: Option<Vec<String>>,
    ) -> Result<Self> {
        if size == 0 {
            return Err(Error::Algebra("the universe must be nonempty".into()));
        }
        if tables.len() != signature.len() {
            return Err(Error::Algebra(format!(
                "{} connectives but {} tables",
                signature.len(),
                tables.len()
            )));
        }
        for (c, table) in signature.connectives().iter().zip(&tables) {
            let expected = checked_pow(size, c.arity).ok_or_else(|| {
                Error::Algebra(format!("table for `{}` is too large", c.symbol))
            })?;
            if table.len() != expected {
                return Err(Error::Algebra(format!(
                    "table for `{}` has {} entries, expected {}",
                    c.symbol,
                    table.len(),
                    expected
                )));
            }
            if let Some(bad) = table.iter().find(|&&v| v as usize >= size) {
                return Err(Error::Algebra(format!(
                    "table for `{}` contains {}, outside the universe of size {}",
                    c.symbol, bad, size
                )));
            }
        }
        if let Some(l) = &labels {
            if l.len() != size {
                return Err(Error::Algebra(format!(
                    "{} labels for {} elements",
                    l.len(),
                    size
                )));
            }
        }
        Ok(FiniteAlgebra {
            signature,
            size,
            tables,
            labels,
        })
    }

    /// Builds the algebra from tables computed by `f(op, args)`.
    pub fn from_fn(
        signature: Signature,
        size: usize,
        mut f: impl FnMut(usize, &[usize]) -> usize,
    ) -> Result<Self> {
        let mut tables = Vec::with_capacity(signature.len());
        for (op, c) in signature.connectives().iter().enumerate() {
            let len = checked_pow(size, c.arity)
                .ok_or_else(|| Error::Algebra(format!("table for `{}` is too large", c.symbol)))?;
            let mut args = vec![0; c.arity];
            let mut table = Vec::with_capacity(len);
            for _ in 0..len {
                table.push(f(op, &args) as u32);
                increment(&mut args, size);
            }
            tables.push(table);
        }
        FiniteAlgebra::new(signature, size, tables, None)
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn table(&self, op: usize) -> &[u32] {
        &self.tables[op]
    }

    pub fn tables(&self) -> &[Vec<u32>] {
        &self.tables
    }

    pub fn table_for(&self, symbol: &str) -> Option<&[u32]> {
        self.signature.index_of(symbol).map(|i| self.table(i))
    }

    pub fn arity(&self, op: usize) -> usize {
        self.signature.connectives()[op].arity
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn label(&self, x: usize) -> String {
        match &self.labels {
            Some(l) => l[x].clone(),
            None => x.to_string(),
        }
    }

    pub fn with_labels(mut self, labels: Option<Vec<String>>) -> Result<Self> {
        if let Some(l) = &labels {
            if l.len() != self.size {
                return Err(Error::Algebra("wrong number of labels".into()));
            }
        }
        self.labels = labels;
        Ok(self)
    }

    /// Total number of table cells.
    pub fn table_cells(&self) -> usize {
        self.tables.iter().map(Vec::len).sum()
    }

    pub fn apply(&self, op: usize, args: &[usize]) -> usize {
        let mut idx = 0;
        for &a in args {
            idx = idx * self.size + a;
        }
        self.tables[op][idx] as usize
    }

    /// The value of `f` under the homomorphic extension of `v`.
    pub fn eval(&self, v: &Valuation, f: &Formula) -> Result<usize> {
        match f {
            Formula::Var(name) => v
                .get(name)
                .copied()
                .filter(|&x| x < self.size)
                .ok_or_else(|| Error::UnboundVariable(name.clone())),
            Formula::App(symbol, args) => {
                let op = self
                    .signature
                    .index_of(symbol)
                    .ok_or_else(|| Error::UnknownConnective(symbol.clone()))?;
                let arity = self.arity(op);
                if arity != args.len() {
                    return Err(Error::Arity {
                        symbol: symbol.clone(),
                        expected: arity,
                        found: args.len(),
                    });
                }
                let mut idx = 0;
                for a in args {
                    idx = idx * self.size + self.eval(v, a)?;
                }
                Ok(self.tables[op][idx] as usize)
            }
        }
    }

    /// Every one-coordinate translation `x ↦ f(c_0, ..., x, ..., c_r)` as
    /// `(op, base, stride)`, so that its value at `x` is
    /// `table[op][base + x * stride]`.
    pub fn translations(&self) -> Vec<(usize, usize, usize)> {
        let n = self.size;
        let mut out = Vec::new();
        for op in 0..self.signature.len() {
            let r = self.arity(op);
            for pos in 0..r {
                let stride = n.pow((r - 1 - pos) as u32);
                let mut others = vec![0usize; r - 1];
                for _ in 0..n.pow((r - 1) as u32) {
                    let mut base = 0;
                    let mut j = 0;
                    for i in 0..r {
                        base *= n;
                        if i != pos {
                            base += others[j];
                            j += 1;
                        }
                    }
                    out.push((op, base, stride));
                    increment(&mut others, n);
                }
            }
        }
        out
    }

    fn translate(&self, (op, base, stride): (usize, usize, usize), x: usize) -> usize {
        self.tables[op][base + x * stride] as usize
    }

    /// Checks compatibility with every basic operation through one-coordinate
    /// translations, which is equivalent to the all-tuples definition by
    /// changing one argument at a time.
    pub fn is_congruence(&self, part: &Partition) -> bool {
        if part.len() != self.size {
            return false;
        }
        let reps = part.representatives();
        self.translations().into_iter().all(|t| {
            (0..self.size).all(|x| {
                let rep = reps[part.block_of(x)];
                part.related(self.translate(t, x), self.translate(t, rep))
            })
        })
    }

    /// The largest congruence contained in `eq`.
    ///
    /// Blocks are split whenever a translation sends two members to
    /// different blocks; splitting only refines, so the loop terminates, and
    /// every congruence below `eq` survives each split.
    pub fn largest_congruence_below(&self, eq: &Partition) -> Partition {
        assert_eq!(eq.len(), self.size, "partition over a different universe");
        let n = self.size;
        let translations = self.translations();
        let mut labels: Vec<u32> = eq.labels().to_vec();
        let mut blocks = eq.num_blocks();
        let mut image = vec![u32::MAX; blocks];
        let mut keys: HashMap<(u32, u32), u32> = HashMap::new();
        loop {
            let mut changed = false;
            for &(op, base, stride) in &translations {
                let table = &self.tables[op];
                image.clear();
                image.resize(blocks, u32::MAX);
                let mut conflict = false;
                for x in 0..n {
                    let fx = labels[table[base + x * stride] as usize];
                    let slot = &mut image[labels[x] as usize];
                    if *slot == u32::MAX {
                        *slot = fx;
                    } else if *slot != fx {
                        conflict = true;
                        break;
                    }
                }
                if !conflict {
                    continue;
                }
                keys.clear();
                let fresh: Vec<u32> = (0..n)
                    .map(|x| {
                        let key = (labels[x], labels[table[base + x * stride] as usize]);
                        let next = keys.len() as u32;
                        *keys.entry(key).or_insert(next)
                    })
                    .collect();
                blocks = keys.len();
                labels = fresh;
                changed = true;
            }
            if !changed {
                break;
            }
        }
        Partition::from_labels(&labels)
    }

    /// The least congruence containing `pairs`.
    pub fn congruence_generated(&self, pairs: &[(usize, usize)]) -> Partition {
        let translations = self.translations();
        let mut uf = UnionFind::new(self.size);
        let mut work: Vec<(usize, usize)> = Vec::new();
        for &(a, b) in pairs {
            if uf.union(a, b) {
                work.push((a, b));
            }
        }
        // Closing each merged edge under all translations suffices: chains of
        // edges map to chains.
        while let Some((a, b)) = work.pop() {
            for &t in &translations {
                let (fa, fb) = (self.translate(t, a), self.translate(t, b));
                if uf.union(fa, fb) {
                    work.push((fa, fb));
                }
            }
        }
        uf.to_partition()
    }

    /// The quotient by `cong` and the canonical projection. Block `i` of the
    /// quotient is block `i` of the partition.
    pub fn quotient(&self, cong: &Partition) -> Result<(FiniteAlgebra, Vec<usize>)> {
        if !self.is_congruence(cong) {
            return Err(Error::NotACongruence);
        }
        Ok(self.quotient_unchecked(cong))
    }

    pub(crate) fn quotient_unchecked(&self, cong: &Partition) -> (FiniteAlgebra, Vec<usize>) {
        let reps = cong.representatives();
        let m = reps.len();
        let sig = self.signature.clone();
        let alg = FiniteAlgebra::from_fn(sig, m, |op, args| {
            let rep_args: Vec<usize> = args.iter().map(|&b| reps[b]).collect();
            cong.block_of(self.apply(op, &rep_args))
        })
        .expect("quotient of a valid algebra is valid");
        let labels = self.labels.as_ref().map(|l| {
            cong.blocks()
                .iter()
                .map(|block| {
                    let inner: Vec<&str> = block.iter().map(|&x| l[x].as_str()).collect();
                    if inner.len() == 1 {
                        inner[0].to_string()
                    } else {
                        format!("[{}]", inner.join("|"))
                    }
                })
                .collect()
        });
        let alg = alg.with_labels(labels).expect("one label per block");
        let projection = (0..self.size).map(|x| cong.block_of(x)).collect();
        (alg, projection)
    }

    /// The direct product; the pair `(i, j)` is element `i * |b| + j`.
    pub fn direct_product(&self, b: &FiniteAlgebra) -> Result<FiniteAlgebra> {
        self.signature.ensure_same(&b.signature)?;
        let nb = b.size;
        let size = self
            .size
            .checked_mul(nb)
            .ok_or_else(|| Error::Algebra("product too large".into()))?;
        let alg = FiniteAlgebra::from_fn(self.signature.clone(), size, |op, args| {
            let left: Vec<usize> = args.iter().map(|&x| x / nb).collect();
            let right: Vec<usize> = args.iter().map(|&x| x % nb).collect();
            self.apply(op, &left) * nb + b.apply(op, &right)
        })?;
        let labels = (0..size)
            .map(|x| format!("({},{})", self.label(x / nb), b.label(x % nb)))
            .collect();
        alg.with_labels(Some(labels))
    }

    /// The subalgebra generated by `gens`, with a witnessing term for every
    /// element. Generator `i` is named `p{i+1}`.
    pub fn subalgebra_generated(&self, gens: &[usize]) -> Result<Subalgebra> {
        if gens.is_empty() && !self.signature.has_constants() {
            return Err(Error::EmptyGenerators);
        }
        if let Some(&g) = gens.iter().find(|&&g| g >= self.size) {
            return Err(Error::Invalid(format!("generator {g} is outside the universe")));
        }
        let vectors: Vec<Vec<u32>> = gens.iter().map(|&g| vec![g as u32]).collect();
        let closure = VectorClosure::generate(&[self], &vectors, usize::MAX, None)?;
        let elements: Vec<usize> = (0..closure.len())
            .map(|i| closure.element(i)[0] as usize)
            .collect();
        let witnesses = closure.formulas();
        Ok(Subalgebra {
            elements,
            witnesses,
        })
    }

    /// A bijection `φ` with `φ(f_a(x..)) = f_b(φ(x)..)` for every operation,
    /// or `None`. The search is deterministic and the result is verified.
    pub fn find_isomorphism(&self, b: &FiniteAlgebra) -> Option<Vec<usize>> {
        if !self.signature.same_connectives(&b.signature) || self.size != b.size {
            return None;
        }
        let inv_a = self.invariants();
        let inv_b = b.invariants();
        let mut ms_a = inv_a.clone();
        let mut ms_b = inv_b.clone();
        ms_a.sort();
        ms_b.sort();
        if ms_a != ms_b {
            return None;
        }
        let mut search = IsoSearch {
            a: self,
            b,
            inv_a,
            inv_b,
            phi: vec![usize::MAX; self.size],
            used: vec![false; self.size],
        };
        if !search.extend(0) {
            return None;
        }
        let phi = search.phi;
        is_isomorphism(self, b, &phi).then_some(phi)
    }

    /// Per-element data preserved by isomorphisms.
    fn invariants(&self) -> Vec<Vec<usize>> {
        let n = self.size;
        let mut inv = vec![Vec::new(); n];
        for op in 0..self.signature.len() {
            let table = &self.tables[op];
            match self.arity(op) {
                0 => {
                    for (x, v) in inv.iter_mut().enumerate() {
                        v.push(usize::from(table[0] as usize == x));
                    }
                }
                1 => {
                    let mut pre = vec![0; n];
                    for &y in table {
                        pre[y as usize] += 1;
                    }
                    for (x, v) in inv.iter_mut().enumerate() {
                        v.push(usize::from(table[x] as usize == x));
                        v.push(pre[x]);
                    }
                }
                2 => {
                    let mut pre = vec![0; n];
                    for &y in table {
                        pre[y as usize] += 1;
                    }
                    for (x, v) in inv.iter_mut().enumerate() {
                        v.push(usize::from(table[x * n + x] as usize == x));
                        v.push(pre[x]);
                        v.push((0..n).filter(|&y| table[x * n + y] as usize == x).count());
                        v.push((0..n).filter(|&y| table[y * n + x] as usize == x).count());
                    }
                }
                _ => {
                    let mut pre = vec![0; n];
                    for &y in table {
                        pre[y as usize] += 1;
                    }
                    for (x, v) in inv.iter_mut().enumerate() {
                        v.push(pre[x]);
                    }
                }
            }
        }
        inv
    }
}

struct IsoSearch<'a> {
    a: &'a FiniteAlgebra,
    b: &'a FiniteAlgebra,
    inv_a: Vec<Vec<usize>>,
    inv_b: Vec<Vec<usize>>,
    phi: Vec<usize>,
    used: Vec<bool>,
}

impl IsoSearch<'_> {
    fn extend(&mut self, x: usize) -> bool {
        if x == self.a.size {
            return true;
        }
        for y in 0..self.b.size {
            if self.used[y] || self.inv_a[x] != self.inv_b[y] {
                continue;
            }
            self.phi[x] = y;
            self.used[y] = true;
            if self.consistent(x) && self.extend(x + 1) {
                return true;
            }
            self.used[y] = false;
            self.phi[x] = usize::MAX;
        }
        false
    }

    /// Checks every table entry whose arguments are assigned and involve `x`.
    fn consistent(&self, x: usize) -> bool {
        for op in 0..self.a.signature.len() {
            let r = self.a.arity(op);
            if r == 0 {
                let (va, vb) = (self.a.tables[op][0] as usize, self.b.tables[op][0] as usize);
                if self.phi[va] != usize::MAX && self.phi[va] != vb {
                    return false;
                }
                continue;
            }
            // Tuples over {0..=x} containing x.
            let mut args = vec![0usize; r];
            loop {
                if args.contains(&x) {
                    let va = self.a.apply(op, &args);
                    let mapped: Vec<usize> = args.iter().map(|&a| self.phi[a]).collect();
                    let vb = self.b.apply(op, &mapped);
                    if self.phi[va] != usize::MAX {
                        if self.phi[va] != vb {
                            return false;
                        }
                    } else if self.used[vb] {
                        return false;
                    }
                }
                if !increment(&mut args, x + 1) {
                    break;
                }
            }
        }
        true
    }
}

/// True when `phi` is a bijection commuting with every operation.
pub fn is_isomorphism(a: &FiniteAlgebra, b: &FiniteAlgebra, phi: &[usize]) -> bool {
    if a.size != b.size || phi.len() != a.size || !a.signature.same_connectives(&b.signature) {
        return false;
    }
    let distinct: BTreeSet<usize> = phi.iter().copied().collect();
    if distinct.len() != a.size || distinct.iter().any(|&y| y >= b.size) {
        return false;
    }
    is_homomorphism(a, b, phi)
}

pub fn is_homomorphism(a: &FiniteAlgebra, b: &FiniteAlgebra, phi: &[usize]) -> bool {
    for op in 0..a.signature.len() {
        let r = a.arity(op);
        let mut args = vec![0usize; r];
        loop {
            let mapped: Vec<usize> = args.iter().map(|&x| phi[x]).collect();
            if phi[a.apply(op, &args)] != b.apply(op, &mapped) {
                return false;
            }
            if !increment(&mut args, a.size) {
                break;
            }
        }
    }
    true
}

/// A generated subalgebra: elements in discovery order, each with a term over
/// the generator variables that evaluates to it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subalgebra {
    pub elements: Vec<usize>,
    pub witnesses: Vec<Formula>,
}

/// An algebra with a distinguished element interpreting the constant `one`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointedAlgebra {
    algebra: FiniteAlgebra,
    one: usize,
    expanded: FiniteAlgebra,
}

impl PointedAlgebra {
    pub fn new(algebra: FiniteAlgebra, one: usize) -> Result<Self> {
        if one >= algebra.size {
            return Err(Error::Invalid(format!(
                "distinguished element {one} is outside the universe"
            )));
        }
        let sig = algebra.signature.with_constant(ONE)?;
        let mut tables = algebra.tables.clone();
        tables.push(vec![one as u32]);
        let expanded = FiniteAlgebra::new(sig, algebra.size, tables, algebra.labels.clone())?;
        Ok(PointedAlgebra {
            algebra,
            one,
            expanded,
        })
    }

    pub fn algebra(&self) -> &FiniteAlgebra {
        &self.algebra
    }

    pub fn one(&self) -> usize {
        self.one
    }

    /// The algebra over the signature extended by `one`.
    pub fn expanded(&self) -> &FiniteAlgebra {
        &self.expanded
    }
}

/// Whether `lhs = rhs` holds under every assignment of the occurring
/// variables. Both sides may use the constant `one`.
pub fn check_identity(p: &PointedAlgebra, lhs: &Formula, rhs: &Formula) -> Result<bool> {
    Ok(identity_counterexample(p, lhs, rhs, 1 << 20)?
        .is_none())
}

/// The first assignment (in mixed-radix order) refuting `lhs = rhs`.
pub fn identity_counterexample(
    p: &PointedAlgebra,
    lhs: &Formula,
    rhs: &Formula,
    max_valuations: u128,
) -> Result<Option<Valuation>> {
    if lhs == rhs {
        return Ok(None);
    }
    let alg = p.expanded();
    lhs.check(alg.signature())?;
    rhs.check(alg.signature())?;
    let vars: Vec<String> = crate::language::vars_of([lhs, rhs]).into_iter().collect();
    let l = CompiledFormula::compile(alg, &vars, lhs)?;
    let r = CompiledFormula::compile(alg, &vars, rhs)?;
    let total = valuation_count(alg.size, vars.len(), max_valuations)?;
    let mut point = vec![0usize; vars.len()];
    let mut stack = Vec::new();
    for _ in 0..total {
        if l.eval_with(alg, &point, &mut stack) != r.eval_with(alg, &point, &mut stack) {
            return Ok(Some(vars.iter().cloned().zip(point).collect()));
        }
        increment(&mut point, alg.size);
    }
    Ok(None)
}

pub(crate) fn valuation_count(n: usize, vars: usize, cap: u128) -> Result<u128> {
    let total = (n as u128).checked_pow(vars as u32).unwrap_or(u128::MAX);
    if total > cap {
        return Err(Error::cap("valuations", total, cap));
    }
    Ok(total)
}

/// A formula flattened to a postfix program over numbered variable slots.
#[derive(Clone, Debug)]
pub struct CompiledFormula {
    code: Vec<Instr>,
}

#[derive(Clone, Copy, Debug)]
enum Instr {
    Var(u32),
    Op { op: u32, arity: u32 },
}

impl CompiledFormula {
    /// Variable `vars[i]` reads slot `i`.
    pub fn compile(alg: &FiniteAlgebra, vars: &[String], f: &Formula) -> Result<Self> {
        let mut code = Vec::with_capacity(f.size());
        Self::emit(alg, vars, f, &mut code)?;
        Ok(CompiledFormula { code })
    }

    fn emit(alg: &FiniteAlgebra, vars: &[String], f: &Formula, code: &mut Vec<Instr>) -> Result<()> {
        match f {
            Formula::Var(name) => {
                let slot = vars
                    .iter()
                    .position(|v| v == name)
                    .ok_or_else(|| Error::UnboundVariable(name.clone()))?;
                code.push(Instr::Var(slot as u32));
            }
            Formula::App(symbol, args) => {
                let op = alg
                    .signature
                    .index_of(symbol)
                    .ok_or_else(|| Error::UnknownConnective(symbol.clone()))?;
                if alg.arity(op) != args.len() {
                    return Err(Error::Arity {
                        symbol: symbol.clone(),
                        expected: alg.arity(op),
                        found: args.len(),
                    });
                }
                for a in args {
                    Self::emit(alg, vars, a, code)?;
                }
                code.push(Instr::Op {
                    op: op as u32,
                    arity: args.len() as u32,
                });
            }
        }
        Ok(())
    }

    pub fn eval(&self, alg: &FiniteAlgebra, point: &[usize]) -> usize {
        self.eval_with(alg, point, &mut Vec::new())
    }

    pub(crate) fn eval_with(
        &self,
        alg: &FiniteAlgebra,
        point: &[usize],
        stack: &mut Vec<usize>,
    ) -> usize {
        stack.clear();
        let n = alg.size;
        for instr in &self.code {
            match *instr {
                Instr::Var(slot) => stack.push(point[slot as usize]),
                Instr::Op { op, arity } => {
                    let start = stack.len() - arity as usize;
                    let mut idx = 0;
                    for &a in &stack[start..] {
                        idx = idx * n + a;
                    }
                    stack.truncate(start);
                    stack.push(alg.tables[op as usize][idx] as usize);
                }
            }
        }
        stack[0]
    }
}

/// Mixed-radix increment with the first position most significant. Returns
/// false after wrapping around to all zeros.
pub(crate) fn increment(digits: &mut [usize], radix: usize) -> bool {
    for d in digits.iter_mut().rev() {
        *d += 1;
        if *d < radix {
            return true;
        }
        *d = 0;
    }
    false
}

pub(crate) fn checked_pow(base: usize, exp: usize) -> Option<usize> {
    base.checked_pow(u32::try_from(exp).ok()?)
}
