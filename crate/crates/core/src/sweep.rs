//! Bounded enumeration of formulas over `p1..pk`, layer by exact depth,
//! carrying the value of every formula at a fixed set of evaluation points.
//!
//! Layers below the requested depth are stored; the last layer, which holds
//! nearly all formulas, is produced on the fly and materialized as a
//! `Formula` only on request.

use std::ops::ControlFlow;

use crate::algebra::FiniteAlgebra;
use crate::error::{Error, Result};
use crate::language::{canonical_var_name, Formula, Signature};
use crate::matrix::Caps;

/// An algebra together with the `k`-tuples at which formulas are evaluated.
pub struct EvalSpace<'a> {
    algebra: &'a FiniteAlgebra,
    points: Vec<Vec<usize>>,
}

impl<'a> EvalSpace<'a> {
    pub fn new(algebra: &'a FiniteAlgebra, points: Vec<Vec<usize>>) -> Self {
        EvalSpace { algebra, points }
    }
}

#[derive(Clone, Debug)]
enum Node {
    Var(usize),
    App(usize, Box<[u32]>),
}

pub struct Sweep<'a> {
    symbols: Vec<String>,
    arities: Vec<usize>,
    depth: usize,
    spaces: Vec<EvalSpace<'a>>,
    nodes: Vec<Node>,
    /// `layers[d]` is the first node of exact depth `d`.
    layers: Vec<usize>,
    values: Vec<Vec<u32>>,
}

/// One enumerated formula.
pub struct Item<'s, 'a> {
    sweep: &'s Sweep<'a>,
    node: ItemNode<'s>,
    values: &'s [Vec<u32>],
    index: usize,
}

enum ItemNode<'s> {
    Stored(usize),
    Fresh(usize, &'s [usize]),
}

impl Item<'_, '_> {
    /// Values at the points of space `space`, in point order.
    pub fn values(&self, space: usize) -> &[u32] {
        match self.node {
            ItemNode::Stored(i) => {
                let w = self.sweep.spaces[space].points.len();
                &self.sweep.values[space][i * w..(i + 1) * w]
            }
            ItemNode::Fresh(..) => &self.values[space],
        }
    }

    pub fn formula(&self) -> Formula {
        match self.node {
            ItemNode::Stored(i) => self.sweep.formula(i),
            ItemNode::Fresh(op, args) => Formula::App(
                self.sweep.symbols[op].clone(),
                args.iter().map(|&a| self.sweep.formula(a)).collect(),
            ),
        }
    }

    /// Position in enumeration order.
    pub fn index(&self) -> usize {
        self.index
    }
}

/// Number of formulas over `k` variables of depth at most `depth`.
pub fn formula_count(sig: &Signature, k: usize, depth: usize) -> u128 {
    let consts = sig.connectives().iter().filter(|c| c.arity == 0).count() as u128;
    let mut total = k as u128 + consts;
    for _ in 0..depth {
        let mut next = k as u128 + consts;
        for c in sig.connectives().iter().filter(|c| c.arity > 0) {
            next = next.saturating_add(total.saturating_pow(c.arity as u32));
        }
        total = next;
    }
    total
}

impl<'a> Sweep<'a> {
    pub fn new(
        sig: &Signature,
        k: usize,
        depth: usize,
        spaces: Vec<EvalSpace<'a>>,
        caps: &Caps,
    ) -> Result<Self> {
        for s in &spaces {
            sig.ensure_same(s.algebra.signature())?;
            if s.points.iter().any(|p| p.len() != k || p.iter().any(|&x| x >= s.algebra.size())) {
                return Err(Error::Invalid("evaluation point of the wrong shape".into()));
            }
        }
        let count = formula_count(sig, k, depth);
        if count > caps.max_formulas {
            return Err(Error::cap("formulas", count, caps.max_formulas));
        }
        let mut sweep = Sweep {
            symbols: sig.connectives().iter().map(|c| c.symbol.clone()).collect(),
            arities: sig.connectives().iter().map(|c| c.arity).collect(),
            depth,
            values: vec![Vec::new(); spaces.len()],
            spaces,
            nodes: Vec::new(),
            layers: vec![0],
        };
        for i in 0..k {
            sweep.push(Node::Var(i));
        }
        for op in 0..sweep.arities.len() {
            if sweep.arities[op] == 0 {
                sweep.push(Node::App(op, Box::new([])));
            }
        }
        for _ in 1..depth {
            let (start, end) = (*sweep.layers.last().unwrap(), sweep.nodes.len());
            sweep.layers.push(end);
            let mut fresh = Vec::new();
            let _ = sweep.layer(start, end, |op, args| {
                fresh.push(Node::App(op, args.iter().map(|&a| a as u32).collect()));
                ControlFlow::Continue(())
            });
            for node in fresh {
                sweep.push(node);
            }
        }
        Ok(sweep)
    }

    fn push(&mut self, node: Node) {
        for s in 0..self.spaces.len() {
            let space = &self.spaces[s];
            let w = space.points.len();
            for p in 0..w {
                let v = match &node {
                    Node::Var(i) => space.points[p][*i] as u32,
                    Node::App(op, args) => {
                        let n = space.algebra.size();
                        let mut idx = 0usize;
                        for &a in args.iter() {
                            idx = idx * n + self.values[s][a as usize * w + p] as usize;
                        }
                        space.algebra.table(*op)[idx]
                    }
                };
                self.values[s].push(v);
            }
        }
        self.nodes.push(node);
    }

    /// Calls `f(op, args)` for every application whose arguments lie in
    /// `[0, end)` with at least one in `[start, end)`.
    fn layer(
        &self,
        start: usize,
        end: usize,
        mut f: impl FnMut(usize, &[usize]) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        let mut args = Vec::new();
        for (op, &r) in self.arities.iter().enumerate() {
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
                    f(op, &args)?;
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
        ControlFlow::Continue(())
    }

    fn formula(&self, i: usize) -> Formula {
        match &self.nodes[i] {
            Node::Var(v) => Formula::Var(canonical_var_name(v + 1)),
            Node::App(op, args) => Formula::App(
                self.symbols[*op].clone(),
                args.iter().map(|&a| self.formula(a as usize)).collect(),
            ),
        }
    }

    /// Visits every formula in enumeration order until `f` breaks.
    pub fn for_each(&self, mut f: impl FnMut(&Item) -> ControlFlow<()>) {
        let mut index = 0;
        for i in 0..self.nodes.len() {
            let item = Item {
                sweep: self,
                node: ItemNode::Stored(i),
                values: &[],
                index,
            };
            index += 1;
            if f(&item).is_break() {
                return;
            }
        }
        if self.depth == 0 {
            return;
        }
        let start = *self.layers.last().unwrap();
        let end = self.nodes.len();
        let mut scratch: Vec<Vec<u32>> = self
            .spaces
            .iter()
            .map(|s| vec![0; s.points.len()])
            .collect();
        let _ = self.layer(start, end, |op, args| {
            for (s, space) in self.spaces.iter().enumerate() {
                let w = space.points.len();
                let n = space.algebra.size();
                let table = space.algebra.table(op);
                for (p, out) in scratch[s].iter_mut().enumerate() {
                    let mut idx = 0usize;
                    for &a in args {
                        idx = idx * n + self.values[s][a * w + p] as usize;
                    }
                    *out = table[idx];
                }
            }
            let item = Item {
                sweep: self,
                node: ItemNode::Fresh(op, args),
                values: &scratch,
                index,
            };
            index += 1;
            f(&item)
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn counts_match_enumeration() {
        let sig = Signature::new("t", [("imp", 2), ("neg", 1), ("c", 0)]).unwrap();
        let alg = FiniteAlgebra::new(sig.clone(), 2, vec![vec![1, 1, 0, 1], vec![1, 0], vec![0]], None)
            .unwrap();
        for depth in 0..=2 {
            let space = EvalSpace::new(&alg, vec![vec![0, 1]]);
            let sweep = Sweep::new(&sig, 2, depth, vec![space], &Caps::default()).unwrap();
            let mut seen = BTreeSet::new();
            sweep.for_each(|item| {
                let f = item.formula();
                assert!(f.depth() <= depth);
                let v: crate::algebra::Valuation =
                    [("p1".to_string(), 0), ("p2".to_string(), 1)].into();
                assert_eq!(alg.eval(&v, &f).unwrap(), item.values(0)[0] as usize);
                assert!(seen.insert(f));
                ControlFlow::Continue(())
            });
            assert_eq!(seen.len() as u128, formula_count(&sig, 2, depth));
        }
    }

    #[test]
    fn cap_is_enforced() {
        let sig = Signature::new("t", [("imp", 2)]).unwrap();
        let alg = FiniteAlgebra::new(sig.clone(), 2, vec![vec![1, 1, 0, 1]], None).unwrap();
        let caps = Caps {
            max_formulas: 10,
            ..Caps::default()
        };
        let r = Sweep::new(&sig, 2, 3, vec![EvalSpace::new(&alg, vec![])], &caps);
        assert!(matches!(r, Err(Error::CapExceeded { .. })));
    }
}
