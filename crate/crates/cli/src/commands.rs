use std::path::Path;

use serde_json::{json, Value};

use aal_core::congruence::{self, congruence_report, is_implicative_extensional};
use aal_core::equivalence::{same_system, Comparison, Side};
use aal_core::fixture::{self, AlgebraFile, MatrixFile};
use aal_core::language::parse_sequent;
use aal_core::lindenbaum::{canonical_valuation_check, lt_algebra};
use aal_core::matrix::{closed_sets, theorems_upto, LindenbaumReduct, Verdict};
use aal_core::rules::{derive, independence_search, is_model, Bounds, Derivation, Independence, Justification};
use aal_core::{parse_formula, Caps, Error, Formula, Result, TermFunctionAlgebra};

use crate::report::{blocks_text, element, partition_json, valuation_json, valuation_text, yes, Report};
use crate::Command;

pub fn run(command: Command, caps: &Caps) -> Result<Report> {
    match command {
        Command::Check { matrix, sequent } => check(&matrix, &sequent, caps),
        Command::Theorems { matrix, k, depth } => theorems(&matrix, k, depth, caps),
        Command::Leibniz { matrix } => leibniz(&matrix),
        Command::Reduce { matrix, output } => reduce(&matrix, output.as_deref()),
        Command::Free { algebra, k } => free(&algebra, k, caps),
        Command::Lt { matrix, k, depth } => lt(&matrix, k, depth, caps),
        Command::Congruences { matrix, k } => congruences(&matrix, k, caps),
        Command::Rasiowa { matrix, arrow, k } => rasiowa(&matrix, &arrow, k, caps),
        Command::Implicative { matrix, arrow } => implicative(&matrix, &arrow, caps),
        Command::Equiv { first, second } => equiv(&first, &second, caps),
        Command::ModelCheck { matrix, rules } => model_check(&matrix, &rules, caps),
        Command::Derive {
            rules,
            goal,
            hyps,
            depth,
            max_size,
        } => derivation(&rules, &goal, &hyps, Bounds { depth, max_size }),
        Command::Independence {
            rules,
            target,
            size_bound,
            depth,
        } => independence(&rules, &target, size_bound, depth, caps),
        Command::ClosedSets { matrix, k } => closed(&matrix, k, caps),
    }
}

fn formulas_json(fs: &[Formula]) -> Value {
    json!(fs.iter().map(|f| f.to_string()).collect::<Vec<_>>())
}

fn sequent_text(premises: &[Formula], conclusion: &Formula) -> String {
    let ps: Vec<String> = premises.iter().map(|f| f.to_string()).collect();
    if ps.is_empty() {
        format!("|- {conclusion}")
    } else {
        format!("{} |- {conclusion}", ps.join(", "))
    }
}

fn check(path: &Path, sequent: &str, caps: &Caps) -> Result<Report> {
    let gm = fixture::load_gmatrix(path)?;
    let (premises, conclusion) = parse_sequent(gm.algebra().signature(), sequent)?;
    let verdict = gm.consequence(&premises, &conclusion, caps)?;
    let mut r = Report::new(verdict.holds());
    r.set("sequent", json!(sequent_text(&premises, &conclusion)));
    r.set("holds", json!(verdict.holds()));
    match &verdict {
        Verdict::Holds => r.line("holds"),
        Verdict::Fails { filter, valuation } => {
            r.line("fails");
            r.line(format!("  filter: {:?}", gm.filters()[*filter]));
            r.line(format!("  valuation: {}", valuation_text(gm.algebra(), valuation)));
            r.set("filter", json!(gm.filters()[*filter]));
            r.set("valuation", valuation_json(valuation));
        }
    }
    Ok(r)
}

fn theorems(path: &Path, k: usize, depth: usize, caps: &Caps) -> Result<Report> {
    let m = fixture::load_matrix(path)?;
    let found = theorems_upto(&m, k, depth, caps)?;
    let mut r = Report::new(true);
    r.line(format!("{} theorems over {k} variables up to depth {depth}", found.len()));
    for f in &found {
        r.line(format!("  {f}"));
    }
    r.set("vars", json!(k));
    r.set("depth", json!(depth));
    r.set("theorems", formulas_json(&found));
    Ok(r)
}

fn leibniz(path: &Path) -> Result<Report> {
    let m = fixture::load_matrix(path)?;
    let omega = congruence::leibniz_congruence(&m);
    let mut r = Report::new(true);
    r.line(format!(
        "Leibniz congruence: {}",
        blocks_text(&omega, |x| element(m.algebra(), x))
    ));
    r.line(format!("reduced: {}", yes(omega.is_identity())));
    r.json = partition_json(&omega);
    Ok(r)
}

fn reduce(path: &Path, output: Option<&Path>) -> Result<Report> {
    let m = fixture::load_matrix(path)?;
    let red = congruence::reduce_with_projection(&m);
    let file = fixture::to_json(&MatrixFile::from_matrix(&red.matrix));
    let mut r = Report::new(true);
    r.json = serde_json::from_str(&file).expect("fixture JSON");
    if let Some(out) = output {
        std::fs::write(out, format!("{file}\n"))
            .map_err(|e| Error::Invalid(format!("{}: {e}", out.display())))?;
        r.line(format!(
            "reduced {} elements to {}; written to {}",
            m.algebra().size(),
            red.matrix.algebra().size(),
            out.display()
        ));
    } else {
        r.line(format!(
            "reduced {} elements to {}",
            m.algebra().size(),
            red.matrix.algebra().size()
        ));
        r.line(file);
    }
    Ok(r)
}

fn free(path: &Path, k: usize, caps: &Caps) -> Result<Report> {
    let alg = fixture::load_algebra(path)?;
    let f = TermFunctionAlgebra::new(&alg, k, caps)?;
    let mut r = Report::new(true);
    r.line(format!("F({k}) has {} elements", f.len()));
    let mut elements = Vec::new();
    for e in 0..f.len() {
        let values: Vec<u32> = f.function(e).to_vec();
        r.line(format!("  {:>4}  {}  {:?}", e, f.representative(e), values));
        elements.push(json!({ "formula": f.representative(e).to_string(), "values": values }));
    }
    r.set("vars", json!(k));
    r.set("size", json!(f.len()));
    r.set("elements", json!(elements));
    Ok(r)
}

fn lt(path: &Path, k: usize, depth: usize, caps: &Caps) -> Result<Report> {
    let m = fixture::load_matrix(path)?;
    let lt = lt_algebra(&m, k, caps)?;
    let mut r = Report::new(lt.admits);
    r.line(format!("F({k}): {} elements", lt.reduct.len()));
    r.line(format!("quotient: {} elements", lt.quotient.size()));
    r.line(format!("admits: {}", yes(lt.admits)));
    r.set("vars", json!(k));
    r.set("reduct_size", json!(lt.reduct.len()));
    r.set("admits", json!(lt.admits));
    r.set("quotient", serde_json::to_value(AlgebraFile::from_algebra(&lt.quotient)).expect("serializes"));
    if let Some(one) = lt.one() {
        let check = canonical_valuation_check(&lt, depth, caps)?;
        r.line(format!("one: {one}"));
        match &check.mismatch {
            None => r.line(format!(
                "canonical valuation check at depth {depth}: passed ({} formulas)",
                check.formulas_checked
            )),
            Some(f) => r.line(format!("canonical valuation check at depth {depth}: fails at {f}")),
        }
        r.verdict = check.passed();
        r.set("one", json!(one));
        r.set(
            "canonical_check",
            json!({
                "depth": depth,
                "formulas": check.formulas_checked,
                "mismatch": check.mismatch.map(|f| f.to_string()),
            }),
        );
    } else {
        r.line("the tautologies do not form one class; no canonical valuation check");
    }
    Ok(r)
}

fn reduct_names(reduct: &LindenbaumReduct) -> impl Fn(usize) -> String + '_ {
    move |g| reduct.functions().representative(g).to_string()
}

fn congruences(path: &Path, k: usize, caps: &Caps) -> Result<Report> {
    let m = fixture::load_matrix(path)?;
    let report = congruence_report(&m, k, caps)?;
    let failures = report.chain_failures();
    let name = reduct_names(&report.reduct);
    let mut r = Report::new(failures.is_empty());
    r.line(format!(
        "F({k}): {} elements, {} closed sets",
        report.reduct.len(),
        report.theories.len()
    ));
    let mut theories = Vec::new();
    for (i, t) in report.theories.iter().enumerate() {
        let members: Vec<String> = t.set.members.iter().map(|&g| name(g)).collect();
        r.line(format!("closed set {i}: {{{}}}", members.join(", ")));
        r.line(format!("  Frege:   {}", blocks_text(&t.frege, &name)));
        r.line(format!("  Suszko:  {}", blocks_text(&t.suszko, &name)));
        r.line(format!("  Leibniz: {}", blocks_text(&t.leibniz, &name)));
        theories.push(json!({
            "members": t.set.members,
            "frege": partition_json(&t.frege),
            "suszko": partition_json(&t.suszko),
            "leibniz": partition_json(&t.leibniz),
        }));
    }
    r.line(format!("Tarski: {}", blocks_text(&report.tarski, &name)));
    if failures.is_empty() {
        r.line("inclusion chain: verified for every closed set");
    }
    for f in &failures {
        r.line(format!("inclusion chain fails at closed set {}: {}", f.theory, f.condition));
    }
    r.set("elements", formulas_json(report.reduct.functions().representatives()));
    r.set("theories", json!(theories));
    r.set("tarski", partition_json(&report.tarski));
    r.set(
        "chain_failures",
        json!(failures
            .iter()
            .map(|f| json!({ "theory": f.theory, "condition": f.condition }))
            .collect::<Vec<_>>()),
    );
    Ok(r)
}

fn rasiowa(path: &Path, arrow: &str, k: usize, caps: &Caps) -> Result<Report> {
    let m = fixture::load_matrix(path)?;
    let rel = congruence::rasiowa_relation(&m, arrow, k, caps)?;
    let reduct = LindenbaumReduct::new(&m, k, caps)?;
    let name = reduct_names(&reduct);
    let mut r = Report::new(true);
    r.line(format!("F({k}): {} elements, {} related pairs", reduct.len(), rel.pairs().count()));
    r.set("vars", json!(k));
    r.set("pairs", json!(rel.pairs().collect::<Vec<_>>()));
    match rel.to_partition() {
        Some(p) => {
            let congruence = reduct.functions().algebra(caps)?.is_congruence(&p);
            let taut = reduct.filter();
            let one_class = taut.iter().all(|&g| p.related(g, taut[0]))
                && (0..reduct.len()).all(|g| !p.related(g, taut[0]) || reduct.filter_mask()[g]);
            r.line("equivalence: yes");
            r.line(format!("congruence: {}", yes(congruence)));
            r.line(format!("tautologies form one class: {}", yes(one_class)));
            r.line(format!("classes: {}", blocks_text(&p, &name)));
            r.set("equivalence", json!(true));
            r.set("congruence", json!(congruence));
            r.set("tautologies_one_class", json!(one_class));
            r.set("partition", partition_json(&p));
        }
        None => {
            r.line("equivalence: no");
            r.set("equivalence", json!(false));
        }
    }
    Ok(r)
}

fn implicative(path: &Path, arrow: &str, caps: &Caps) -> Result<Report> {
    let m = fixture::load_matrix(path)?;
    let report = is_implicative_extensional(&m, arrow, caps)?;
    let mut r = Report::new(report.holds());
    r.line(format!("S-filters: {:?}", report.s_filters));
    r.set("s_filters", json!(report.s_filters));
    r.set("holds", json!(report.holds()));
    match &report.violation {
        None => r.line(format!("`{arrow}` satisfies the implicative clauses on every S-filter")),
        Some(v) => {
            let names: &[&str] = match v.clause {
                1 => &["a"],
                2 | 4 => &["a", "b"],
                _ => &["a", "b", "c"],
            };
            let witnesses = if v.clause == 5 {
                let r = v.witnesses.len() / 2;
                format!("a={:?}, b={:?}", &v.witnesses[..r], &v.witnesses[r..])
            } else {
                names
                    .iter()
                    .zip(&v.witnesses)
                    .map(|(n, x)| format!("{n}={}", element(m.algebra(), *x)))
                    .collect::<Vec<_>>()
                    .join(", ")
            };
            let via = v
                .connective
                .as_ref()
                .map(|c| format!(" for `{c}`"))
                .unwrap_or_default();
            r.line(format!(
                "(i{}) fails{via} on S-filter {:?} at {witnesses}",
                v.clause, v.filter
            ));
            r.set(
                "violation",
                json!({
                    "clause": v.clause,
                    "filter": v.filter,
                    "witnesses": v.witnesses,
                    "connective": v.connective,
                }),
            );
        }
    }
    r.line("(conditions are checked over S-filters of the algebra, not over formula theories)");
    Ok(r)
}

fn equiv(first: &Path, second: &Path, caps: &Caps) -> Result<Report> {
    let a = fixture::load_gmatrix(first)?;
    let b = fixture::load_gmatrix(second)?;
    let result = same_system(&a, &b, caps)?;
    let mut r = Report::new(result.is_same());
    r.set("equivalent", json!(result.is_same()));
    match result {
        Comparison::Same => r.line("equivalent"),
        Comparison::Differ {
            valid_in,
            counterexample: cx,
        } => {
            let (valid, invalid, target) = match valid_in {
                Side::First => (first, second, &b),
                Side::Second => (second, first, &a),
            };
            r.line("not equivalent");
            r.line(format!(
                "  {} holds in {} but not in {}",
                sequent_text(&cx.premises, &cx.conclusion),
                valid.display(),
                invalid.display()
            ));
            r.line(format!(
                "  refuting valuation: {} (filter {:?})",
                valuation_text(target.algebra(), &cx.valuation),
                target.filters()[cx.filter]
            ));
            r.set(
                "counterexample",
                json!({
                    "valid_in": valid.display().to_string(),
                    "premises": formulas_json(&cx.premises),
                    "conclusion": cx.conclusion.to_string(),
                    "valuation": valuation_json(&cx.valuation),
                    "filter": target.filters()[cx.filter],
                }),
            );
        }
    }
    Ok(r)
}

fn model_check(matrix: &Path, rules: &Path, caps: &Caps) -> Result<Report> {
    let m = fixture::load_matrix(matrix)?;
    let rs = fixture::load_rules(rules)?;
    let violation = is_model(&m, &rs, caps)?;
    let mut r = Report::new(violation.is_none());
    r.set("model", json!(violation.is_none()));
    match violation {
        None => r.line("model: every rule preserves the filter"),
        Some(v) => {
            r.line(format!(
                "not a model: rule {} fails at {}",
                v.rule,
                valuation_text(m.algebra(), &v.valuation)
            ));
            r.set("violation", json!({ "rule": v.rule, "valuation": valuation_json(&v.valuation) }));
        }
    }
    Ok(r)
}

fn derivation_json(d: &Derivation) -> Value {
    json!(d
        .lines
        .iter()
        .map(|l| match &l.justification {
            Justification::Hypothesis => json!({ "formula": l.formula.to_string(), "hypothesis": true }),
            Justification::Rule { name, premises } => json!({
                "formula": l.formula.to_string(),
                "rule": name,
                "premises": premises.iter().map(|p| p + 1).collect::<Vec<_>>(),
            }),
        })
        .collect::<Vec<_>>())
}

fn derivation(rules: &Path, goal: &str, hyps: &[String], bounds: Bounds) -> Result<Report> {
    let rs = fixture::load_rules(rules)?;
    let goal = parse_formula(rs.signature(), goal)?;
    let hyps = hyps
        .iter()
        .map(|h| parse_formula(rs.signature(), h))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let found = derive(&rs, &hyps, &goal, bounds)?;
    let mut r = Report::new(found.is_some());
    r.set("depth", json!(bounds.depth));
    r.set("max_size", json!(bounds.max_size));
    match found {
        Some(d) => {
            let lines = if d.len() == 1 { "line" } else { "lines" };
            r.line(format!("derivation of {goal} in {} {lines}:", d.len()));
            r.text.push_str(&d.to_string());
            r.set("derivation", derivation_json(&d));
        }
        None => {
            r.line(format!(
                "not found within bounds (depth {}, formula size {})",
                bounds.depth, bounds.max_size
            ));
            r.set("derivation", Value::Null);
        }
    }
    Ok(r)
}

fn independence(rules: &Path, target: &str, size_bound: usize, depth: usize, caps: &Caps) -> Result<Report> {
    let rs = fixture::load_rules(rules)?;
    let bounds = Bounds {
        depth,
        ..Bounds::default()
    };
    let result = independence_search(&rs, target, size_bound, bounds, caps)?;
    let mut r = Report::new(matches!(result, Independence::Independent { .. }));
    match result {
        Independence::Derivable(d) => {
            r.line(format!("{target} is derivable from the other rules; not independent"));
            r.text.push_str(&d.to_string());
            r.set("result", json!("derivable"));
            r.set("derivation", derivation_json(&d));
        }
        Independence::Independent { matrix, valuation } => {
            r.line(format!(
                "{target} is independent: this {}-element matrix models the other rules and refutes it at {}",
                matrix.algebra().size(),
                valuation_text(matrix.algebra(), &valuation)
            ));
            let file = fixture::to_json(&MatrixFile::from_matrix(&matrix));
            r.line(&file);
            r.set("result", json!("independent"));
            r.set("matrix", serde_json::from_str(&file).expect("fixture JSON"));
            r.set("valuation", valuation_json(&valuation));
        }
        Independence::Undecided => {
            r.line(format!(
                "undecided: no derivation within depth {depth} and no certificate up to size {size_bound}"
            ));
            r.set("result", json!("undecided"));
        }
    }
    Ok(r)
}

fn closed(path: &Path, k: usize, caps: &Caps) -> Result<Report> {
    let m = fixture::load_matrix(path)?;
    let reduct = LindenbaumReduct::new(&m, k, caps)?;
    let sets = closed_sets(&reduct, caps)?;
    let name = reduct_names(&reduct);
    let mut r = Report::new(true);
    r.line(format!("F({k}): {} elements, {} closed sets", reduct.len(), sets.len()));
    let mut out = Vec::new();
    for (i, s) in sets.iter().enumerate() {
        let members: Vec<String> = s.members.iter().map(|&g| name(g)).collect();
        let support: Vec<Vec<usize>> = s.support.iter().map(|&x| reduct.functions().tuple(x)).collect();
        r.line(format!("{i}: {} members, support {:?}", s.len(), support));
        r.line(format!("   {{{}}}", members.join(", ")));
        out.push(json!({ "members": s.members, "formulas": members, "support": support }));
    }
    r.set("vars", json!(k));
    r.set("elements", formulas_json(reduct.functions().representatives()));
    r.set("closed_sets", json!(out));
    Ok(r)
}
