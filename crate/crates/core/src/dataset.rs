//! Complete Boolean databases with record multiplicities.
//!
//! Distinct records are stored once with a positive count. Column `i` holds
//! the values of `vars()[i]`; a freshly loaded database covers variables
//! `1..=n` in order, while projections keep the labels of the columns they
//! retain.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::Var;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Record {
    pub values: Vec<bool>,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    vars: Vec<Var>,
    records: Vec<Record>,
}

impl Dataset {
    /// Builds a database over variables `1..=n` from raw rows, aggregating
    /// duplicates in order of first appearance.
    pub fn from_rows<I>(n: usize, rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = Vec<bool>>,
    {
        Self::from_counts((1..=n).collect(), rows.into_iter().map(|r| (r, 1)))
    }

    /// Builds a database from `(row, count)` pairs. Rows with a zero count are
    /// skipped; repeated rows have their counts merged.
    pub fn from_counts<I>(vars: Vec<Var>, rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<bool>, u64)>,
    {
        let mut sorted = vars.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != vars.len() || vars.contains(&0) {
            return Err(Error::Config(format!("invalid variable labels {vars:?}")));
        }
        let mut index: HashMap<Vec<bool>, usize> = HashMap::new();
        let mut records: Vec<Record> = Vec::new();
        for (values, count) in rows {
            if values.len() != vars.len() {
                return Err(Error::Arity {
                    expected: vars.len(),
                    found: values.len(),
                });
            }
            if count == 0 {
                continue;
            }
            match index.get(&values) {
                Some(&i) => records[i].count += count,
                None => {
                    index.insert(values.clone(), records.len());
                    records.push(Record { values, count });
                }
            }
        }
        Ok(Dataset { vars, records })
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    /// Number of columns.
    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    /// Distinct records.
    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Total number of records `m`, counting multiplicities.
    pub fn total(&self) -> u64 {
        self.records.iter().map(|r| r.count).sum()
    }

    pub fn column(&self, var: Var) -> Option<usize> {
        self.vars.iter().position(|&v| v == var)
    }

    /// Number of records (with multiplicity) where `var` is true.
    pub fn count_true(&self, var: Var) -> Option<u64> {
        let col = self.column(var)?;
        Some(
            self.records
                .iter()
                .filter(|r| r.values[col])
                .map(|r| r.count)
                .sum(),
        )
    }

    /// Keeps only the columns of `vars` (in the given order), merging records
    /// that become identical.
    pub fn project(&self, vars: &[Var]) -> Result<Dataset> {
        let cols = vars
            .iter()
            .map(|&v| {
                self.column(v).ok_or_else(|| Error::VariableMismatch {
                    expected: self.vars.clone(),
                    found: vars.to_vec(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Dataset::from_counts(
            vars.to_vec(),
            self.records
                .iter()
                .map(|r| (cols.iter().map(|&c| r.values[c]).collect(), r.count)),
        )
    }

    /// Keeps only the records at `indices`, with their counts.
    pub fn select(&self, indices: &[usize]) -> Dataset {
        Dataset {
            vars: self.vars.clone(),
            records: indices.iter().map(|&i| self.records[i].clone()).collect(),
        }
    }

    /// Iterates over every record once per unit of multiplicity.
    pub fn expanded(&self) -> impl Iterator<Item = &[bool]> + '_ {
        self.records
            .iter()
            .flat_map(|r| std::iter::repeat_n(r.values.as_slice(), r.count as usize))
    }
}
