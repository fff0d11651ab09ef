//! Subalgebras of finite products `A_0 × ... × A_(w-1)` generated by a list
//! of vectors, closed breadth-first with a witnessing term per element.
//!
//! Generated subalgebras of a single algebra (`w = 1`), term-function
//! algebras (`A^(A^k)`) and the paired structures used when comparing two
//! matrices are all instances.

use std::collections::HashMap;

use crate::algebra::FiniteAlgebra;
use crate::error::{Error, Result};
use crate::language::{canonical_var_name, Formula};

/// How an element was first produced.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Witness {
    Generator(u32),
    Op(u32, Box<[u32]>),
}

enum Index {
    Dense(Vec<u32>),
    Coded(HashMap<u64, u32>),
    Boxed(HashMap<Box<[u32]>, u32>),
}

/// Largest code space for which a dense lookup array is used.
const DENSE_LIMIT: u64 = 1 << 21;

/// Predicate on new elements that ends a closure early.
pub(crate) type StopAt<'a> = &'a mut dyn FnMut(&[u32]) -> bool;

pub(crate) struct VectorClosure {
    width: usize,
    radices: Vec<u64>,
    data: Vec<u32>,
    witnesses: Vec<Witness>,
    generator_index: Vec<u32>,
    index: Index,
    arities: Vec<usize>,
    symbols: Vec<String>,
    /// Element for which the stop predicate fired, if any.
    pub stopped_at: Option<usize>,
}

impl VectorClosure {
    /// Closes `gens` under the operations of the coordinate algebras, which
    /// must share one signature. Fails once more than `max_elements`
    /// elements appear. If `stop` returns true for a new element the closure
    /// ends early and records it in `stopped_at`.
    pub fn generate(
        coords: &[&FiniteAlgebra],
        gens: &[Vec<u32>],
        max_elements: usize,
        mut stop: Option<StopAt>,
    ) -> Result<VectorClosure> {
        let first = coords.first().expect("at least one coordinate");
        for c in &coords[1..] {
            first.signature().ensure_same(c.signature())?;
        }
        let width = coords.len();
        let radices: Vec<u64> = coords.iter().map(|a| a.size() as u64).collect();
        let space = radices
            .iter()
            .try_fold(1u64, |acc, &r| acc.checked_mul(r));
        let index = match space {
            Some(s) if s <= DENSE_LIMIT => Index::Dense(vec![u32::MAX; s as usize]),
            Some(_) => Index::Coded(HashMap::new()),
            None => Index::Boxed(HashMap::new()),
        };
        let sig = first.signature();
        let arities: Vec<usize> = sig.connectives().iter().map(|c| c.arity).collect();
        let mut cl = VectorClosure {
            width,
            radices,
            data: Vec::new(),
            witnesses: Vec::new(),
            generator_index: Vec::new(),
            index,
            arities,
            symbols: sig.connectives().iter().map(|c| c.symbol.clone()).collect(),
            stopped_at: None,
        };
        let tables: Vec<Vec<&[u32]>> = (0..sig.len())
            .map(|op| coords.iter().map(|a| a.table(op)).collect())
            .collect();

        let mut check = |cl: &mut VectorClosure, i: usize| -> bool {
            if let Some(stop) = stop.as_mut() {
                if stop(cl.element(i)) {
                    cl.stopped_at = Some(i);
                    return true;
                }
            }
            false
        };

        for (g, v) in gens.iter().enumerate() {
            assert_eq!(v.len(), width, "generator of the wrong width");
            let (i, fresh) = cl.insert(v, Witness::Generator(g as u32), max_elements)?;
            cl.generator_index.push(i as u32);
            if fresh && check(&mut cl, i) {
                return Ok(cl);
            }
        }
        let mut result = vec![0u32; width];
        // Constants enter in the first round.
        for (op, &r) in cl.arities.clone().iter().enumerate() {
            if r == 0 {
                for c in 0..width {
                    result[c] = tables[op][c][0];
                }
                let (i, fresh) = cl.insert(&result, Witness::Op(op as u32, Box::new([])), max_elements)?;
                if fresh && check(&mut cl, i) {
                    return Ok(cl);
                }
            }
        }
        if cl.is_empty() {
            return Err(Error::EmptyGenerators);
        }

        let mut start = 0;
        let mut end = cl.len();
        let mut args: Vec<usize> = Vec::new();
        while start < end {
            for (op, op_tables) in tables.iter().enumerate() {
                let r = cl.arities[op];
                if r == 0 {
                    continue;
                }
                // Tuples over [0, end) whose first new coordinate is `j`.
                for j in 0..r {
                    let ranges: Vec<(usize, usize)> = (0..r)
                        .map(|p| match p.cmp(&j) {
                            std::cmp::Ordering::Less => (0, start),
                            std::cmp::Ordering::Equal => (start, end),
                            std::cmp::Ordering::Greater => (0, end),
                        })
                        .collect();
                    if ranges.iter().any(|&(lo, hi)| lo >= hi) {
                        continue;
                    }
                    args.clear();
                    args.extend(ranges.iter().map(|&(lo, _)| lo));
                    loop {
                        for c in 0..width {
                            let n = cl.radices[c] as usize;
                            let mut idx = 0usize;
                            for &a in args.iter() {
                                idx = idx * n + cl.data[a * width + c] as usize;
                            }
                            result[c] = op_tables[c][idx];
                        }
                        if cl.lookup(&result).is_none() {
                            let witness_args: Box<[u32]> =
                                args.iter().map(|&a| a as u32).collect();
                            let (i, _) = cl.insert(
                                &result,
                                Witness::Op(op as u32, witness_args),
                                max_elements,
                            )?;
                            if check(&mut cl, i) {
                                return Ok(cl);
                            }
                        }
                        let mut p = r;
                        let mut wrapped = true;
                        while p > 0 {
                            p -= 1;
                            args[p] += 1;
                            if args[p] < ranges[p].1 {
                                wrapped = false;
                                break;
                            }
                            args[p] = ranges[p].0;
                        }
                        if wrapped {
                            break;
                        }
                    }
                }
            }
            start = end;
            end = cl.len();
        }
        Ok(cl)
    }

    fn code(&self, v: &[u32]) -> u64 {
        v.iter()
            .zip(&self.radices)
            .fold(0u64, |acc, (&x, &r)| acc * r + x as u64)
    }

    pub fn lookup(&self, v: &[u32]) -> Option<usize> {
        let found = match &self.index {
            Index::Dense(d) => d[self.code(v) as usize],
            Index::Coded(m) => *m.get(&self.code(v))?,
            Index::Boxed(m) => *m.get(v)?,
        };
        (found != u32::MAX).then_some(found as usize)
    }

    fn insert(&mut self, v: &[u32], w: Witness, max: usize) -> Result<(usize, bool)> {
        if let Some(i) = self.lookup(v) {
            return Ok((i, false));
        }
        let i = self.witnesses.len();
        if i >= max {
            return Err(Error::cap("generated elements", i as u128 + 1, max as u128));
        }
        match &mut self.index {
            Index::Dense(_) | Index::Coded(_) => {
                let code = self.code(v);
                match &mut self.index {
                    Index::Dense(d) => d[code as usize] = i as u32,
                    Index::Coded(m) => {
                        m.insert(code, i as u32);
                    }
                    Index::Boxed(_) => unreachable!(),
                }
            }
            Index::Boxed(m) => {
                m.insert(v.into(), i as u32);
            }
        }
        self.data.extend_from_slice(v);
        self.witnesses.push(w);
        Ok((i, true))
    }

    pub fn len(&self) -> usize {
        self.witnesses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.witnesses.is_empty()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn element(&self, i: usize) -> &[u32] {
        &self.data[i * self.width..(i + 1) * self.width]
    }

    pub fn data(&self) -> &[u32] {
        &self.data
    }

    /// Element index of the i-th generator.
    pub fn generator_index(&self) -> &[u32] {
        &self.generator_index
    }

    /// Pointwise application of operation `op` to elements `args`; `None`
    /// if the result is not in the closure (impossible once closed).
    pub fn apply(&self, coords: &[&FiniteAlgebra], op: usize, args: &[usize]) -> Option<usize> {
        let mut result = vec![0u32; self.width];
        for (c, slot) in result.iter_mut().enumerate() {
            let n = self.radices[c] as usize;
            let mut idx = 0usize;
            for &a in args {
                idx = idx * n + self.data[a * self.width + c] as usize;
            }
            *slot = coords[c].table(op)[idx];
        }
        self.lookup(&result)
    }

    /// Witnessing terms for every element, generators named `p1, p2, ...`.
    pub fn formulas(&self) -> Vec<Formula> {
        self.formulas_with(|g| Formula::Var(canonical_var_name(g + 1)))
    }

    pub fn formulas_with(&self, generator: impl Fn(usize) -> Formula) -> Vec<Formula> {
        let mut out: Vec<Formula> = Vec::with_capacity(self.len());
        // Witness arguments always precede the element they build.
        for w in &self.witnesses {
            let f = match w {
                Witness::Generator(g) => generator(*g as usize),
                Witness::Op(_, _) => self.build(w, &out),
            };
            out.push(f);
        }
        out
    }

    fn build(&self, w: &Witness, done: &[Formula]) -> Formula {
        match w {
            Witness::Generator(_) => unreachable!(),
            Witness::Op(op, args) => Formula::App(
                self.symbol(*op as usize),
                args.iter().map(|&a| done[a as usize].clone()).collect(),
            ),
        }
    }

    /// Witnessing term of a single element.
    pub fn formula(&self, i: usize, generator: &dyn Fn(usize) -> Formula) -> Formula {
        match &self.witnesses[i] {
            Witness::Generator(g) => generator(*g as usize),
            Witness::Op(op, args) => Formula::App(
                self.symbol(*op as usize),
                args.iter()
                    .map(|&a| self.formula(a as usize, generator))
                    .collect(),
            ),
        }
    }

    fn symbol(&self, op: usize) -> String {
        self.symbols[op].clone()
    }
}
