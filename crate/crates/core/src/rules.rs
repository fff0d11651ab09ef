//! Hilbert-style rule sets: matrix model checking, bounded derivation search
//! and axiom independence by enumeration of small matrices.
//!
//! Rules are schemata, closed under substitution. A derivation is a list of
//! formulas, each a hypothesis or an instance of a rule whose instantiated
//! premises occur earlier in the list.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::algebra::{increment, CompiledFormula, FiniteAlgebra, Valuation};
use crate::error::{Error, Result};
use crate::language::{vars_of, Formula, Signature, Substitution};
use crate::matrix::{Caps, Matrix};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    pub premises: Vec<Formula>,
    pub conclusion: Formula,
}

impl Rule {
    pub fn new(premises: Vec<Formula>, conclusion: Formula) -> Self {
        Rule {
            premises,
            conclusion,
        }
    }

    pub fn is_axiom(&self) -> bool {
        self.premises.is_empty()
    }

    pub fn vars(&self) -> Vec<String> {
        vars_of(self.premises.iter().chain([&self.conclusion]))
            .into_iter()
            .collect()
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, p) in self.premises.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{p}")?;
        }
        if !self.premises.is_empty() {
            f.write_str(" ")?;
        }
        write!(f, "|- {}", self.conclusion)
    }
}

/// Named rules over one signature.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleSet {
    signature: Signature,
    names: Vec<String>,
    rules: Vec<Rule>,
}

impl RuleSet {
    pub fn new(signature: Signature, rules: Vec<(String, Rule)>) -> Result<Self> {
        if rules.is_empty() {
            return Err(Error::Invalid("a rule set needs at least one rule".into()));
        }
        let mut names = Vec::new();
        let mut list = Vec::new();
        for (name, rule) in rules {
            if names.contains(&name) {
                return Err(Error::Invalid(format!("rule name `{name}` used twice")));
            }
            for f in rule.premises.iter().chain([&rule.conclusion]) {
                f.check(&signature)?;
            }
            names.push(name);
            list.push(rule);
        }
        Ok(RuleSet {
            signature,
            names,
            rules: list,
        })
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<&Rule> {
        self.position(name).map(|i| &self.rules[i])
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Rule)> {
        self.names.iter().map(String::as_str).zip(&self.rules)
    }

    /// The rule set without the named rule, or `None` if it would be empty.
    pub fn without(&self, name: &str) -> Option<RuleSet> {
        let rest: Vec<(String, Rule)> = self
            .iter()
            .filter(|(n, _)| *n != name)
            .map(|(n, r)| (n.to_string(), r.clone()))
            .collect();
        RuleSet::new(self.signature.clone(), rest).ok()
    }
}

/// A rule instance refuted by a valuation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub rule: String,
    pub valuation: Valuation,
}

/// Whether the filter of `m` is closed under every rule; the first violated
/// rule (in rule order) is reported with its least refuting valuation.
pub fn is_model(m: &Matrix, rs: &RuleSet, caps: &Caps) -> Result<Option<Violation>> {
    m.algebra().signature().ensure_same(rs.signature())?;
    for (name, rule) in rs.iter() {
        if let Some(valuation) = m.consequence(&rule.premises, &rule.conclusion, caps)?.valuation() {
            return Ok(Some(Violation {
                rule: name.to_string(),
                valuation: valuation.clone(),
            }));
        }
    }
    Ok(None)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Justification {
    Hypothesis,
    /// A rule instance; `premises` are the earlier lines holding the
    /// instantiated premises, in the rule's premise order.
    Rule { name: String, premises: Vec<usize> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Line {
    pub formula: Formula,
    pub justification: Justification,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Derivation {
    pub lines: Vec<Line>,
}

impl Derivation {
    pub fn conclusion(&self) -> &Formula {
        &self.lines.last().expect("derivations are nonempty").formula
    }

    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    pub fn substitute(&self, s: &Substitution) -> Derivation {
        Derivation {
            lines: self
                .lines
                .iter()
                .map(|l| Line {
                    formula: s.apply(&l.formula),
                    justification: l.justification.clone(),
                })
                .collect(),
        }
    }
}

impl fmt::Display for Derivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, line) in self.lines.iter().enumerate() {
            write!(f, "{:>3}. {}", i + 1, line.formula)?;
            match &line.justification {
                Justification::Hypothesis => writeln!(f, "    [hypothesis]")?,
                Justification::Rule { name, premises } if premises.is_empty() => {
                    writeln!(f, "    [{name}]")?
                }
                Justification::Rule { name, premises } => {
                    let refs: Vec<String> = premises.iter().map(|p| (p + 1).to_string()).collect();
                    writeln!(f, "    [{name} {}]", refs.join(", "))?
                }
            }
        }
        Ok(())
    }
}

/// One-way matching of a schema against a formula, extending `s`.
fn match_schema(schema: &Formula, target: &Formula, s: &mut BTreeMap<String, Formula>) -> bool {
    match (schema, target) {
        (Formula::Var(v), _) => match s.get(v) {
            Some(bound) => bound == target,
            None => {
                s.insert(v.clone(), target.clone());
                true
            }
        },
        (Formula::App(a, xs), Formula::App(b, ys)) => {
            a == b
                && xs.len() == ys.len()
                && xs.iter().zip(ys).all(|(x, y)| match_schema(x, y, s))
        }
        _ => false,
    }
}

/// Checks every line of `d` from scratch; the last line must be `goal`.
pub fn check_derivation(
    rs: &RuleSet,
    hypotheses: &[Formula],
    goal: &Formula,
    d: &Derivation,
) -> Result<()> {
    let fail = |i: usize, why: &str| Err(Error::Verification(format!("line {}: {why}", i + 1)));
    if d.lines.is_empty() {
        return Err(Error::Verification("empty derivation".into()));
    }
    for (i, line) in d.lines.iter().enumerate() {
        line.formula.check(rs.signature())?;
        match &line.justification {
            Justification::Hypothesis => {
                if !hypotheses.contains(&line.formula) {
                    return fail(i, "not a hypothesis");
                }
            }
            Justification::Rule { name, premises } => {
                let Some(rule) = rs.get(name) else {
                    return fail(i, "unknown rule");
                };
                if premises.len() != rule.premises.len() || premises.iter().any(|&p| p >= i) {
                    return fail(i, "premises must cite earlier lines");
                }
                let mut s = BTreeMap::new();
                if !match_schema(&rule.conclusion, &line.formula, &mut s) {
                    return fail(i, "not an instance of the rule's conclusion");
                }
                for (schema, &p) in rule.premises.iter().zip(premises) {
                    if !match_schema(schema, &d.lines[p].formula, &mut s) {
                        return fail(i, "cited line is not the instantiated premise");
                    }
                }
            }
        }
    }
    if d.conclusion() != goal {
        return Err(Error::Verification("the last line is not the goal".into()));
    }
    Ok(())
}

/// Limits of the derivation search.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Bounds {
    /// Maximum number of proof-tree nodes, which bounds the line count.
    pub depth: usize,
    /// Maximum size of any formula occurring in the derivation.
    pub max_size: usize,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds {
            depth: 7,
            max_size: 32,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Term {
    Rigid(String),
    Meta(usize),
    App(String, Vec<Term>),
}

impl Term {
    fn rigid(f: &Formula) -> Term {
        match f {
            Formula::Var(v) => Term::Rigid(v.clone()),
            Formula::App(s, args) => Term::App(s.clone(), args.iter().map(Term::rigid).collect()),
        }
    }

    fn schema(f: &Formula, metas: &HashMap<&str, usize>) -> Term {
        match f {
            Formula::Var(v) => Term::Meta(metas[v.as_str()]),
            Formula::App(s, args) => {
                Term::App(s.clone(), args.iter().map(|a| Term::schema(a, metas)).collect())
            }
        }
    }
}

#[derive(Clone, Debug)]
enum Step {
    Open,
    Hypothesis,
    Rule(usize, Vec<usize>),
}

struct Search<'a> {
    rules: &'a RuleSet,
    hyps: Vec<Term>,
    max_size: usize,
    bindings: Vec<Option<Term>>,
    trail: Vec<usize>,
    goals: Vec<Term>,
    steps: Vec<Step>,
}

impl Search<'_> {
    fn fresh(&mut self) -> usize {
        self.bindings.push(None);
        self.bindings.len() - 1
    }

    fn walk<'t>(&'t self, mut t: &'t Term) -> &'t Term {
        while let Term::Meta(m) = t {
            match &self.bindings[*m] {
                Some(b) => t = b,
                None => break,
            }
        }
        t
    }

    fn occurs(&self, m: usize, t: &Term) -> bool {
        match self.walk(t) {
            Term::Meta(n) => *n == m,
            Term::Rigid(_) => false,
            Term::App(_, args) => args.iter().any(|a| self.occurs(m, a)),
        }
    }

    fn size(&self, t: &Term) -> usize {
        match self.walk(t) {
            Term::App(_, args) => 1 + args.iter().map(|a| self.size(a)).sum::<usize>(),
            _ => 1,
        }
    }

    fn bind(&mut self, m: usize, t: Term) {
        self.bindings[m] = Some(t);
        self.trail.push(m);
    }

    fn undo(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let m = self.trail.pop().unwrap();
            self.bindings[m] = None;
        }
    }

    fn unify(&mut self, a: &Term, b: &Term) -> bool {
        let a = self.walk(a).clone();
        let b = self.walk(b).clone();
        match (&a, &b) {
            (Term::Meta(x), Term::Meta(y)) if x == y => true,
            (Term::Meta(x), _) => {
                if self.occurs(*x, &b) {
                    return false;
                }
                self.bind(*x, b);
                true
            }
            (_, Term::Meta(y)) => {
                if self.occurs(*y, &a) {
                    return false;
                }
                self.bind(*y, a);
                true
            }
            (Term::Rigid(x), Term::Rigid(y)) => x == y,
            (Term::App(f, xs), Term::App(g, ys)) => {
                f == g && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| self.unify(x, y))
            }
            _ => false,
        }
    }

    fn is_bare(&self, node: usize) -> bool {
        matches!(self.walk(&self.goals[node]), Term::Meta(_))
    }

    fn solve(&mut self, open: &mut Vec<usize>, budget: usize) -> bool {
        if open.is_empty() {
            return true;
        }
        if open.len() > budget {
            return false;
        }
        let pick = (0..open.len()).find(|&i| !self.is_bare(open[i])).unwrap_or(0);
        let node = open.remove(pick);
        let goal = self.goals[node].clone();
        let bare = self.is_bare(node);

        for h in 0..self.hyps.len() {
            let mark = self.trail.len();
            let hyp = self.hyps[h].clone();
            if self.unify(&goal, &hyp) {
                self.steps[node] = Step::Hypothesis;
                if self.solve(open, budget - 1) {
                    return true;
                }
            }
            self.undo(mark);
        }
        let rules = self.rules;
        for (r, rule) in rules.rules.iter().enumerate() {
            // An unconstrained goal is closed by an axiom; longer detours
            // through rules with premises add nothing.
            if bare && !rule.is_axiom() {
                continue;
            }
            let mark = self.trail.len();
            let vars = rule.vars();
            let metas: HashMap<&str, usize> =
                vars.iter().map(|v| (v.as_str(), self.fresh())).collect();
            let conclusion = Term::schema(&rule.conclusion, &metas);
            if !self.unify(&goal, &conclusion) || self.size(&goal) > self.max_size {
                self.undo(mark);
                continue;
            }
            let premises: Vec<Term> = rule
                .premises
                .iter()
                .map(|p| Term::schema(p, &metas))
                .collect();
            if premises.iter().any(|p| self.size(p) > self.max_size) {
                self.undo(mark);
                continue;
            }
            let first_child = self.goals.len();
            let children: Vec<usize> = (first_child..first_child + premises.len()).collect();
            for p in premises {
                self.goals.push(p);
                self.steps.push(Step::Open);
            }
            self.steps[node] = Step::Rule(r, children.clone());
            let before = open.len();
            open.extend(&children);
            if self.solve(open, budget - 1) {
                return true;
            }
            open.truncate(before);
            self.goals.truncate(first_child);
            self.steps.truncate(first_child);
            self.undo(mark);
        }
        self.steps[node] = Step::Open;
        open.insert(pick, node);
        false
    }

    fn resolve(&self, t: &Term, ground: &str) -> Formula {
        match self.walk(t) {
            Term::Rigid(v) => Formula::Var(v.clone()),
            Term::Meta(_) => Formula::Var(ground.to_string()),
            Term::App(s, args) => {
                Formula::App(s.clone(), args.iter().map(|a| self.resolve(a, ground)).collect())
            }
        }
    }

    fn linearize(
        &self,
        node: usize,
        ground: &str,
        lines: &mut Vec<Line>,
        seen: &mut HashMap<Formula, usize>,
    ) -> usize {
        let formula = self.resolve(&self.goals[node], ground);
        if let Some(&i) = seen.get(&formula) {
            return i;
        }
        let justification = match &self.steps[node] {
            Step::Hypothesis => Justification::Hypothesis,
            Step::Rule(r, children) => {
                let premises = children
                    .iter()
                    .map(|&c| self.linearize(c, ground, lines, seen))
                    .collect();
                Justification::Rule {
                    name: self.rules.names[*r].clone(),
                    premises,
                }
            }
            Step::Open => unreachable!("linearizing an unfinished proof"),
        };
        // A premise may already have produced this formula.
        if let Some(&i) = seen.get(&formula) {
            return i;
        }
        lines.push(Line {
            formula: formula.clone(),
            justification,
        });
        seen.insert(formula, lines.len() - 1);
        lines.len() - 1
    }
}

/// Searches for a derivation of `goal` from `hypotheses` by backward
/// chaining with unification, deepening the number of proof-tree nodes up to
/// `bounds.depth`. `None` means "not found within bounds", never "not
/// derivable". Found derivations are checked before being returned.
pub fn derive(
    rs: &RuleSet,
    hypotheses: &[Formula],
    goal: &Formula,
    bounds: Bounds,
) -> Result<Option<Derivation>> {
    goal.check(rs.signature())?;
    for h in hypotheses {
        h.check(rs.signature())?;
    }
    // Schema variables left open by the proof are instantiated with a
    // variable of the goal, or of the hypotheses, or `p`.
    let ground = goal
        .vars()
        .into_iter()
        .chain(vars_of(hypotheses))
        .next()
        .unwrap_or_else(|| {
            ["p", "q", "x", "v"]
                .into_iter()
                .find(|v| rs.signature().index_of(v).is_none())
                .unwrap_or("p")
                .to_string()
        });
    for budget in 1..=bounds.depth {
        let mut search = Search {
            rules: rs,
            hyps: hypotheses.iter().map(Term::rigid).collect(),
            max_size: bounds.max_size,
            bindings: Vec::new(),
            trail: Vec::new(),
            goals: vec![Term::rigid(goal)],
            steps: vec![Step::Open],
        };
        if search.size(&search.goals[0].clone()) > bounds.max_size {
            return Ok(None);
        }
        let mut open = vec![0];
        if search.solve(&mut open, budget) {
            let mut lines = Vec::new();
            let root = search.linearize(0, &ground, &mut lines, &mut HashMap::new());
            // Lines after the first occurrence of the goal are never cited.
            lines.truncate(root + 1);
            let d = Derivation { lines };
            check_derivation(rs, hypotheses, goal, &d)?;
            return Ok(Some(d));
        }
    }
    Ok(None)
}

/// Outcome of an independence search for one axiom.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Independence {
    /// The axiom follows from the other rules.
    Derivable(Derivation),
    /// A matrix that is a model of the other rules and refutes the axiom at
    /// `valuation`.
    Independent { matrix: Matrix, valuation: Valuation },
    /// Neither a derivation nor a certificate within the bounds.
    Undecided,
}

/// Number of matrices with `n` elements over `sig`.
fn matrices_of_size(sig: &Signature, n: usize) -> u128 {
    let cells: u128 = sig
        .connectives()
        .iter()
        .map(|c| (n as u128).pow(c.arity as u32))
        .sum();
    (n as u128)
        .checked_pow(cells as u32)
        .and_then(|a| a.checked_mul((1u128 << n) - 1))
        .unwrap_or(u128::MAX)
}

/// Nonempty subsets of `{0..n}` by cardinality, then lexicographically.
fn filters_in_order(n: usize) -> Vec<Vec<bool>> {
    let mut subsets: Vec<Vec<usize>> = (1u32..(1 << n))
        .map(|bits| (0..n).filter(|&x| bits >> x & 1 == 1).collect())
        .collect();
    subsets.sort_by(|a, b| (a.len(), a).cmp(&(b.len(), b)));
    subsets
        .into_iter()
        .map(|s| (0..n).map(|x| s.contains(&x)).collect())
        .collect()
}

struct CompiledRule {
    vars: usize,
    premises: Vec<CompiledFormula>,
    conclusion: CompiledFormula,
}

impl CompiledRule {
    fn new(template: &FiniteAlgebra, rule: &Rule) -> Result<Self> {
        let vars = rule.vars();
        Ok(CompiledRule {
            vars: vars.len(),
            premises: rule
                .premises
                .iter()
                .map(|p| CompiledFormula::compile(template, &vars, p))
                .collect::<Result<_>>()?,
            conclusion: CompiledFormula::compile(template, &vars, &rule.conclusion)?,
        })
    }

    fn holds(&self, alg: &FiniteAlgebra, filter: &[bool], stack: &mut Vec<usize>) -> bool {
        let mut point = vec![0; self.vars];
        loop {
            if !filter[self.conclusion.eval_with(alg, &point, stack)]
                && self
                    .premises
                    .iter()
                    .all(|p| filter[p.eval_with(alg, &point, stack)])
            {
                return false;
            }
            if !increment(&mut point, alg.size()) {
                return true;
            }
        }
    }
}

/// Looks for a proof that the axiom `target` is independent of the other
/// rules. A derivation from the others is tried first; otherwise matrices
/// are enumerated by size, then by concatenated tables (first cell most
/// significant), then by filter (cardinality, then members). The first
/// matrix modelling every other rule but refuting `target` is re-verified
/// and returned.
pub fn independence_search(
    rs: &RuleSet,
    target: &str,
    size_bound: usize,
    bounds: Bounds,
    caps: &Caps,
) -> Result<Independence> {
    let rule = rs
        .get(target)
        .ok_or_else(|| Error::Invalid(format!("no rule named `{target}`")))?;
    if !rule.is_axiom() {
        return Err(Error::Invalid(format!("`{target}` has premises; only axioms are searched")));
    }
    let others = rs.without(target);
    if let Some(others) = &others {
        if let Some(d) = derive(others, &[], &rule.conclusion, bounds)? {
            return Ok(Independence::Derivable(d));
        }
    }
    let sig = rs.signature();
    let total: u128 = (1..=size_bound)
        .map(|n| matrices_of_size(sig, n))
        .fold(0u128, |a, b| a.saturating_add(b));
    if total > caps.max_matrices {
        return Err(Error::cap("matrices", total, caps.max_matrices));
    }
    let template = FiniteAlgebra::from_fn(sig.clone(), 1, |_, _| 0)?;
    let target_rule = CompiledRule::new(&template, rule)?;
    let other_rules: Vec<CompiledRule> = rs
        .iter()
        .filter(|(n, _)| *n != target)
        .map(|(_, r)| CompiledRule::new(&template, r))
        .collect::<Result<_>>()?;
    let target_vars = rule.vars();
    let mut stack = Vec::new();
    for n in 1..=size_bound {
        let filters = filters_in_order(n);
        let lens: Vec<usize> = sig
            .connectives()
            .iter()
            .map(|c| n.pow(c.arity as u32))
            .collect();
        let mut cells = vec![0usize; lens.iter().sum()];
        loop {
            let mut tables = Vec::with_capacity(lens.len());
            let mut at = 0;
            for &len in &lens {
                tables.push(cells[at..at + len].iter().map(|&x| x as u32).collect());
                at += len;
            }
            let alg = FiniteAlgebra::new(sig.clone(), n, tables, None)?;
            // Values the target takes; it fails under a filter missing one.
            let mut values = vec![false; n];
            let mut point = vec![0; target_vars.len()];
            loop {
                values[target_rule.conclusion.eval_with(&alg, &point, &mut stack)] = true;
                if !increment(&mut point, n) {
                    break;
                }
            }
            for filter in &filters {
                if (0..n).all(|x| !values[x] || filter[x]) {
                    continue;
                }
                if other_rules.iter().all(|r| r.holds(&alg, filter, &mut stack)) {
                    let matrix = Matrix::from_mask(alg.clone(), filter.clone())?;
                    return certify(rs, target, matrix, caps);
                }
            }
            if !increment(&mut cells, n) {
                break;
            }
        }
    }
    Ok(Independence::Undecided)
}

fn certify(rs: &RuleSet, target: &str, matrix: Matrix, caps: &Caps) -> Result<Independence> {
    let rule = rs.get(target).expect("target exists");
    let Some(valuation) = matrix
        .consequence(&[], &rule.conclusion, caps)?
        .valuation()
        .cloned()
    else {
        return Err(Error::Verification("certificate validates the target".into()));
    };
    if let Some(others) = rs.without(target) {
        if let Some(v) = is_model(&matrix, &others, caps)? {
            return Err(Error::Verification(format!(
                "certificate violates rule {}",
                v.rule
            )));
        }
    }
    Ok(Independence::Independent { matrix, valuation })
}
