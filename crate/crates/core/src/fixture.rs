//! JSON fixture files: signatures, algebras, matrices, g-matrices, rule sets
//! and partitions. One file holds one object.
//!
//! Tables are keyed by connective symbol and laid out row-major with the
//! leftmost argument most significant.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::algebra::FiniteAlgebra;
use crate::error::{Error, Result};
use crate::language::{parse_formula, Signature};
use crate::matrix::{GMatrix, Matrix};
use crate::partition::Partition;
use crate::rules::{Rule, RuleSet};

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct ConnectiveFile {
    pub sym: String,
    pub arity: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct SignatureFile {
    pub name: String,
    pub connectives: Vec<ConnectiveFile>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct AlgebraFile {
    pub signature: SignatureFile,
    pub size: usize,
    pub tables: BTreeMap<String, Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct MatrixFile {
    pub algebra: AlgebraFile,
    pub filter: Vec<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct GMatrixFile {
    pub algebra: AlgebraFile,
    pub filters: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct RuleFile {
    pub name: String,
    pub premises: Vec<String>,
    pub conclusion: String,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct RulesFile {
    pub signature: SignatureFile,
    pub rules: Vec<RuleFile>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct PartitionFile {
    pub blocks: Vec<Vec<usize>>,
}

fn fixture_err(e: impl std::fmt::Display) -> Error {
    Error::Fixture(e.to_string())
}

/// Maps construction errors to fixture errors, keeping everything else.
fn as_fixture(e: Error) -> Error {
    match e {
        Error::Signature(_)
        | Error::Algebra(_)
        | Error::Matrix(_)
        | Error::Parse(_)
        | Error::Invalid(_)
        | Error::UnknownConnective(_)
        | Error::Arity { .. } => Error::Fixture(e.to_string()),
        other => other,
    }
}

impl SignatureFile {
    pub fn build(&self) -> Result<Signature> {
        Signature::new(
            self.name.clone(),
            self.connectives.iter().map(|c| (c.sym.clone(), c.arity)),
        )
        .map_err(as_fixture)
    }

    pub fn from_signature(sig: &Signature) -> Self {
        SignatureFile {
            name: sig.name().to_string(),
            connectives: sig
                .connectives()
                .iter()
                .map(|c| ConnectiveFile {
                    sym: c.symbol.clone(),
                    arity: c.arity,
                })
                .collect(),
        }
    }
}

impl AlgebraFile {
    pub fn build(&self) -> Result<FiniteAlgebra> {
        let sig = self.signature.build()?;
        if let Some(extra) = self.tables.keys().find(|k| sig.index_of(k).is_none()) {
            return Err(Error::Fixture(format!("table for undeclared connective `{extra}`")));
        }
        let tables = sig
            .connectives()
            .iter()
            .map(|c| {
                self.tables
                    .get(&c.symbol)
                    .cloned()
                    .ok_or_else(|| Error::Fixture(format!("missing table for `{}`", c.symbol)))
            })
            .collect::<Result<Vec<_>>>()?;
        FiniteAlgebra::new(sig, self.size, tables, self.labels.clone()).map_err(as_fixture)
    }

    pub fn from_algebra(alg: &FiniteAlgebra) -> Self {
        AlgebraFile {
            signature: SignatureFile::from_signature(alg.signature()),
            size: alg.size(),
            tables: alg
                .signature()
                .connectives()
                .iter()
                .zip(alg.tables())
                .map(|(c, t)| (c.symbol.clone(), t.clone()))
                .collect(),
            labels: alg.labels().map(<[String]>::to_vec),
        }
    }
}

impl MatrixFile {
    pub fn build(&self) -> Result<Matrix> {
        Matrix::new(self.algebra.build()?, &self.filter).map_err(as_fixture)
    }

    pub fn from_matrix(m: &Matrix) -> Self {
        MatrixFile {
            algebra: AlgebraFile::from_algebra(m.algebra()),
            filter: m.filter(),
        }
    }
}

impl GMatrixFile {
    pub fn build(&self) -> Result<GMatrix> {
        GMatrix::new(self.algebra.build()?, &self.filters).map_err(as_fixture)
    }

    pub fn from_gmatrix(gm: &GMatrix) -> Self {
        GMatrixFile {
            algebra: AlgebraFile::from_algebra(gm.algebra()),
            filters: gm.filters(),
        }
    }
}

impl RulesFile {
    pub fn build(&self) -> Result<RuleSet> {
        let sig = self.signature.build()?;
        let mut rules = Vec::new();
        for r in &self.rules {
            let premises = r
                .premises
                .iter()
                .map(|p| parse_formula(&sig, p).map_err(|e| fixture_err(format!("rule {}: {e}", r.name))))
                .collect::<Result<Vec<_>>>()?;
            let conclusion = parse_formula(&sig, &r.conclusion)
                .map_err(|e| fixture_err(format!("rule {}: {e}", r.name)))?;
            rules.push((r.name.clone(), Rule::new(premises, conclusion)));
        }
        RuleSet::new(sig, rules).map_err(as_fixture)
    }

    pub fn from_rules(rs: &RuleSet) -> Self {
        RulesFile {
            signature: SignatureFile::from_signature(rs.signature()),
            rules: rs
                .iter()
                .map(|(name, rule)| RuleFile {
                    name: name.to_string(),
                    premises: rule.premises.iter().map(|p| p.to_string()).collect(),
                    conclusion: rule.conclusion.to_string(),
                })
                .collect(),
        }
    }
}

impl PartitionFile {
    pub fn from_partition(p: &Partition) -> Self {
        PartitionFile { blocks: p.blocks() }
    }

    pub fn build(&self, n: usize) -> Result<Partition> {
        Partition::from_blocks(n, &self.blocks)
            .ok_or_else(|| Error::Fixture("blocks overlap or leave the universe".into()))
    }
}

fn parse<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(fixture_err)
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Fixture(format!("{}: {e}", path.display())))
}

pub fn algebra_from_str(text: &str) -> Result<FiniteAlgebra> {
    parse::<AlgebraFile>(text)?.build()
}

pub fn matrix_from_str(text: &str) -> Result<Matrix> {
    parse::<MatrixFile>(text)?.build()
}

/// Accepts a g-matrix file or a matrix file (a single filter).
pub fn gmatrix_from_str(text: &str) -> Result<GMatrix> {
    let value: serde_json::Value = parse(text)?;
    if value.get("filters").is_some() {
        serde_json::from_value::<GMatrixFile>(value)
            .map_err(fixture_err)?
            .build()
    } else {
        Ok(serde_json::from_value::<MatrixFile>(value)
            .map_err(fixture_err)?
            .build()?
            .to_gmatrix())
    }
}

/// Accepts an algebra file or a matrix file (the filter is ignored).
pub fn any_algebra_from_str(text: &str) -> Result<FiniteAlgebra> {
    let value: serde_json::Value = parse(text)?;
    if value.get("algebra").is_some() {
        let inner = value.get("algebra").cloned().unwrap_or_default();
        serde_json::from_value::<AlgebraFile>(inner)
            .map_err(fixture_err)?
            .build()
    } else {
        serde_json::from_value::<AlgebraFile>(value)
            .map_err(fixture_err)?
            .build()
    }
}

pub fn rules_from_str(text: &str) -> Result<RuleSet> {
    parse::<RulesFile>(text)?.build()
}

pub fn load_matrix(path: impl AsRef<Path>) -> Result<Matrix> {
    matrix_from_str(&read(path.as_ref())?)
}

pub fn load_gmatrix(path: impl AsRef<Path>) -> Result<GMatrix> {
    gmatrix_from_str(&read(path.as_ref())?)
}

pub fn load_algebra(path: impl AsRef<Path>) -> Result<FiniteAlgebra> {
    any_algebra_from_str(&read(path.as_ref())?)
}

pub fn load_rules(path: impl AsRef<Path>) -> Result<RuleSet> {
    rules_from_str(&read(path.as_ref())?)
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("fixture types serialize")
}
