//! Run summaries printed by the command-line tool.
//!
//! Every report has a human-readable block and one machine-readable line
//! starting with `report` followed by space-separated `key=value` pairs.
//! Keys, in order:
//!
//! | key | meaning |
//! |-----|---------|
//! | `command` | subcommand name |
//! | `k`, `d`, `seed`, `dedup`, `vtree` | learner settings (learn only) |
//! | `eval` | which records `ll`/`gamma` refer to |
//! | `records` | number of evaluated records (with multiplicity) |
//! | `ll` | summed natural-log likelihood over consistent records |
//! | `gamma` | number of records with probability zero |
//! | `consistent` | records with positive probability |
//! | `baseline_ll` | fully factorized log-likelihood on the same consistent records |
//! | `nodes`, `edges`, `params`, `inputs`, `products`, `sums` | circuit size |
//!
//! Floats use 17 significant digits. Wall-clock time is kept out of the
//! report so that repeated runs print identical bytes; it goes to stderr.

use std::fmt;

use crate::circuit::SizeCounts;
use crate::inference::EvalReport;
use crate::io::format_float;
use crate::learn::LearnConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    /// `train`, `test`, or a file name.
    pub label: String,
    pub ll: f64,
    pub gamma: u64,
    pub consistent_count: u64,
    pub baseline_ll: Option<f64>,
}

impl Evaluation {
    pub fn new(label: impl Into<String>, report: &EvalReport) -> Self {
        Evaluation {
            label: label.into(),
            ll: report.ll,
            gamma: report.gamma,
            consistent_count: report.consistent_count,
            baseline_ll: None,
        }
    }

    pub fn records(&self) -> u64 {
        self.gamma + self.consistent_count
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub command: String,
    pub learn: Option<(LearnConfig, String)>,
    pub evaluation: Option<Evaluation>,
    pub size: SizeCounts,
}

impl RunReport {
    pub fn new(command: impl Into<String>, size: SizeCounts) -> Self {
        RunReport {
            command: command.into(),
            learn: None,
            evaluation: None,
            size,
        }
    }

    fn pairs(&self) -> Vec<(&'static str, String)> {
        let mut kv = vec![("command", self.command.clone())];
        if let Some((cfg, vtree)) = &self.learn {
            kv.push(("k", cfg.k.to_string()));
            kv.push(("d", cfg.min_cluster.to_string()));
            kv.push(("seed", cfg.seed.to_string()));
            kv.push(("dedup", cfg.dedup.to_string()));
            kv.push(("vtree", vtree.clone()));
        }
        if let Some(e) = &self.evaluation {
            kv.push(("eval", e.label.clone()));
            kv.push(("records", e.records().to_string()));
            kv.push(("ll", format_float(e.ll)));
            kv.push(("gamma", e.gamma.to_string()));
            kv.push(("consistent", e.consistent_count.to_string()));
            if let Some(b) = e.baseline_ll {
                kv.push(("baseline_ll", format_float(b)));
            }
        }
        let s = &self.size;
        kv.push(("nodes", s.nodes.to_string()));
        kv.push(("edges", s.edges.to_string()));
        kv.push(("params", s.parameters.to_string()));
        kv.push(("inputs", s.inputs.to_string()));
        kv.push(("products", s.products.to_string()));
        kv.push(("sums", s.sums.to_string()));
        kv
    }

    /// The single `report key=value ...` line. Values never contain spaces
    /// unless a file name does; such spaces are replaced by `_`.
    pub fn record_line(&self) -> String {
        let mut line = String::from("report");
        for (k, v) in self.pairs() {
            line.push(' ');
            line.push_str(k);
            line.push('=');
            line.push_str(&v.replace(char::is_whitespace, "_"));
        }
        line
    }
}

impl fmt::Display for RunReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in self.pairs() {
            writeln!(f, "{k:<12} {v}")?;
        }
        write!(f, "{}", self.record_line())
    }
}
