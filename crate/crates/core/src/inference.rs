//! Exact evaluation of the mass function a PSDD induces.
//!
//! All arithmetic is in natural-log space; `f64::NEG_INFINITY` marks
//! assignments outside the circuit's base.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;

use crate::circuit::{Circuit, CircuitBuilder, Element, PsddNode};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::vtree::Vtree;

/// Default cap on the number of variables for support enumeration.
pub const DEFAULT_ENUMERATION_LIMIT: usize = 20;

/// Log-likelihood of a test database, skipping records the circuit rules out.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    /// Sum of `count · ln P(x)` over consistent records.
    pub ll: f64,
    /// Number of inconsistent records, with multiplicity.
    pub gamma: u64,
    pub consistent_count: u64,
    /// `ln P(x)` per distinct record, when requested.
    pub per_record: Option<Vec<f64>>,
}

impl EvalReport {
    pub fn total(&self) -> u64 {
        self.gamma + self.consistent_count
    }
}

fn check_arity(circuit: &Circuit, len: usize) -> Result<()> {
    if len != circuit.num_vars() {
        return Err(Error::Arity {
            expected: circuit.num_vars(),
            found: len,
        });
    }
    Ok(())
}

/// `ln P(record)`, with `record` indexed by `var - 1`.
pub fn log_prob(circuit: &Circuit, record: &[bool]) -> Result<f64> {
    check_arity(circuit, record.len())?;
    Ok(log_prob_unchecked(circuit, record))
}

fn log_prob_unchecked(circuit: &Circuit, record: &[bool]) -> f64 {
    let mut value: Vec<f64> = Vec::with_capacity(circuit.nodes().len());
    for node in circuit.nodes() {
        let v = match node {
            PsddNode::Literal { var, positive } => {
                if record[var - 1] == *positive {
                    0.0
                } else {
                    f64::NEG_INFINITY
                }
            }
            PsddNode::True { var, theta } => {
                if record[var - 1] {
                    theta.ln()
                } else {
                    (-theta).ln_1p()
                }
            }
            // Primes are exclusive, so only the first satisfied one counts.
            PsddNode::Sum { elements, .. } => elements
                .iter()
                .find(|e| value[e.prime.0] > f64::NEG_INFINITY)
                .map_or(f64::NEG_INFINITY, |e| {
                    let sub = value[e.sub.0];
                    if sub == f64::NEG_INFINITY || e.weight <= 0.0 {
                        f64::NEG_INFINITY
                    } else {
                        e.weight.ln() + value[e.prime.0] + sub
                    }
                }),
        };
        value.push(v);
    }
    *value.last().expect("non-empty circuit")
}

fn check_vars(circuit: &Circuit, data: &Dataset) -> Result<Vec<usize>> {
    let expected: Vec<usize> = (1..=circuit.num_vars()).collect();
    let mut found = data.vars().to_vec();
    found.sort_unstable();
    if found != expected {
        return Err(Error::VariableMismatch { expected, found });
    }
    // column holding each variable
    Ok(expected.iter().map(|&v| data.column(v).expect("checked")).collect())
}

pub fn dataset_ll(circuit: &Circuit, data: &Dataset) -> Result<EvalReport> {
    evaluate(circuit, data, false)
}

/// Like [`dataset_ll`], optionally keeping every distinct record's log-prob.
/// Records are evaluated in parallel but summed in record order.
pub fn evaluate(circuit: &Circuit, data: &Dataset, per_record: bool) -> Result<EvalReport> {
    let cols = check_vars(circuit, data)?;
    let logs: Vec<f64> = data
        .records()
        .par_iter()
        .map(|r| {
            let x: Vec<bool> = cols.iter().map(|&c| r.values[c]).collect();
            log_prob_unchecked(circuit, &x)
        })
        .collect();
    let mut report = EvalReport {
        ll: 0.0,
        gamma: 0,
        consistent_count: 0,
        per_record: None,
    };
    for (r, &lp) in data.records().iter().zip(&logs) {
        if lp == f64::NEG_INFINITY {
            report.gamma += r.count;
        } else {
            report.consistent_count += r.count;
            report.ll += r.count as f64 * lp;
        }
    }
    if per_record {
        report.per_record = Some(logs);
    }
    Ok(report)
}

/// Every complete assignment with positive probability, mapped to its
/// probability. Walks the support from the leaves up instead of testing all
/// `2^n` assignments.
pub fn enumerate_support(circuit: &Circuit, limit: usize) -> Result<BTreeMap<Vec<bool>, f64>> {
    let n = circuit.num_vars();
    if n > limit || n > 63 {
        return Err(Error::EnumerationLimit { scope: n, limit });
    }
    // Per node: bitmask over variables (bit var-1) -> probability.
    let mut supports: Vec<HashMap<u64, f64>> = Vec::with_capacity(circuit.nodes().len());
    for node in circuit.nodes() {
        let mut s = HashMap::new();
        match node {
            PsddNode::Literal { var, positive } => {
                s.insert(if *positive { 1u64 << (var - 1) } else { 0 }, 1.0);
            }
            PsddNode::True { var, theta } => {
                if *theta > 0.0 {
                    s.insert(1u64 << (var - 1), *theta);
                }
                if *theta < 1.0 {
                    s.insert(0, 1.0 - theta);
                }
            }
            PsddNode::Sum { elements, .. } => {
                for Element { prime, sub, weight } in elements {
                    if *weight <= 0.0 {
                        continue;
                    }
                    for (pm, pp) in &supports[prime.0] {
                        for (sm, sp) in &supports[sub.0] {
                            *s.entry(pm | sm).or_insert(0.0) += weight * pp * sp;
                        }
                    }
                }
            }
        }
        supports.push(s);
    }
    let root = supports.pop().expect("non-empty circuit");
    Ok(root
        .into_iter()
        .map(|(mask, p)| ((0..n).map(|i| mask >> i & 1 == 1).collect(), p))
        .collect())
}

/// Independent-variables baseline over a right-linear vtree. Every variable
/// gets a `⊤` unit with add-one smoothed frequency, so the base is the
/// tautology.
pub fn fully_factorized(data: &Dataset) -> Result<Circuit> {
    if data.is_empty() {
        return Err(Error::NoRecords);
    }
    let n = data.num_vars();
    let order: Vec<usize> = (1..=n).collect();
    let vtree = Vtree::right_linear(&order)?;
    let mut found = data.vars().to_vec();
    found.sort_unstable();
    if found != order {
        return Err(Error::VariableMismatch {
            expected: order,
            found,
        });
    }
    let m = data.total() as f64;
    let mut b = CircuitBuilder::new(vtree.clone());
    let theta = |var| (data.count_true(var).expect("checked") as f64 + 1.0) / (m + 2.0);
    if n == 1 {
        let root = b.true_unit(1, theta(1))?;
        return b.finish(root);
    }
    // Build from the deepest internal node up.
    let mut node = vtree.root();
    let mut spine = Vec::new();
    while let Some((_, right)) = vtree.children(node) {
        spine.push(node);
        node = right;
    }
    let last = b.true_unit(n, theta(n))?;
    let mut acc = last;
    for &internal in spine.iter().rev() {
        let (left, _) = vtree.children(internal).expect("internal");
        let var = vtree.vars(left)[0];
        let prime = b.true_unit(var, theta(var))?;
        acc = b.sum(
            internal,
            vec![Element {
                prime,
                sub: acc,
                weight: 1.0,
            }],
        )?;
    }
    b.finish(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{bits, example_circuit, example_data};

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * b.abs().max(1.0)
    }

    #[test]
    fn example_hand_evaluated_records() {
        let (c, _) = example_circuit();
        // 10/30 · 1 · 3/10
        assert!(close(log_prob(&c, &bits("0011")).unwrap(), (1.0f64 / 10.0).ln()));
        // 14/30 · 2/14 · 12/14 · 1/4
        assert!(close(log_prob(&c, &bits("1011")).unwrap(), (1.0f64 / 70.0).ln()));
        assert_eq!(log_prob(&c, &bits("1111")).unwrap(), f64::NEG_INFINITY);
        assert!(log_prob(&c, &bits("11")).is_err());
    }

    #[test]
    fn example_support_has_ten_worlds() {
        let (c, _) = example_circuit();
        let s = enumerate_support(&c, DEFAULT_ENUMERATION_LIMIT).unwrap();
        let keys: Vec<Vec<bool>> = s.keys().cloned().collect();
        let expected: Vec<Vec<bool>> = [
            "0000", "0011", "0101", "0110", "0111", "1001", "1010", "1011", "1101", "1110",
        ]
        .iter()
        .map(|x| bits(x))
        .collect();
        assert_eq!(keys, expected);
        let total: f64 = s.values().sum();
        assert!((total - 1.0).abs() < 1e-9);
        for (x, p) in &s {
            assert!(close(log_prob(&c, x).unwrap(), p.ln()));
        }
    }

    #[test]
    fn single_true_unit_support() {
        let mut b = CircuitBuilder::new(Vtree::leaf(1).unwrap());
        let r = b.true_unit(1, 0.25).unwrap();
        let c = b.finish(r).unwrap();
        let s = enumerate_support(&c, 20).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s[&vec![true]], 0.25);
        assert_eq!(s[&vec![false]], 0.75);
    }

    #[test]
    fn enumeration_limit_enforced() {
        let (c, _) = example_circuit();
        assert!(matches!(
            enumerate_support(&c, 3),
            Err(Error::EnumerationLimit { scope: 4, limit: 3 })
        ));
    }

    #[test]
    fn training_ll_on_example() {
        let (c, _) = example_circuit();
        let data = example_data();
        let report = dataset_ll(&c, &data).unwrap();
        assert_eq!(report.gamma, 0);
        assert_eq!(report.consistent_count, 30);
        // per-record oracle: probabilities evaluated by hand
        let by_hand = [
            (3.0, 10.0 / 30.0 * 0.3),
            (7.0, 10.0 / 30.0 * 0.7),
            (2.0, 14.0 / 30.0 * (2.0 / 14.0) * (2.0 / 14.0)),
            (3.0, 14.0 / 30.0 * (12.0 / 14.0) * (12.0 / 14.0) * 0.25),
            (9.0, 14.0 / 30.0 * (12.0 / 14.0) * (12.0 / 14.0) * 0.75),
            (2.0, 6.0 / 30.0 * (2.0 / 6.0)),
            (4.0, 6.0 / 30.0 * (4.0 / 6.0)),
        ];
        let expected: f64 = by_hand.iter().map(|(c, p): &(f64, f64)| c * p.ln()).sum();
        assert!(close(report.ll, expected), "{} vs {expected}", report.ll);
    }

    #[test]
    fn inconsistent_records_count_in_gamma() {
        let mut b = CircuitBuilder::new(Vtree::leaf(1).unwrap());
        let r = b.literal(1, true).unwrap();
        let c = b.finish(r).unwrap();
        let data = Dataset::from_rows(1, vec![bits("0")]).unwrap();
        let report = dataset_ll(&c, &data).unwrap();
        assert_eq!((report.ll, report.gamma, report.consistent_count), (0.0, 1, 0));
        let empty = Dataset::from_rows(1, Vec::new()).unwrap();
        let report = dataset_ll(&c, &empty).unwrap();
        assert_eq!((report.ll, report.gamma), (0.0, 0));
        let wrong = Dataset::from_rows(2, vec![bits("01")]).unwrap();
        assert!(dataset_ll(&c, &wrong).is_err());
    }

    #[test]
    fn per_record_values_align_with_records() {
        let (c, _) = example_circuit();
        let data = Dataset::from_rows(4, vec![bits("0011"), bits("1111")]).unwrap();
        let report = evaluate(&c, &data, true).unwrap();
        let per = report.per_record.unwrap();
        assert!(close(per[0], 0.1f64.ln()));
        assert_eq!(per[1], f64::NEG_INFINITY);
    }

    #[test]
    fn baseline_single_variable() {
        let data = Dataset::from_rows(1, vec![bits("1"), bits("0")]).unwrap();
        let c = fully_factorized(&data).unwrap();
        assert_eq!(c.nodes(), &[PsddNode::True { var: 1, theta: 0.5 }]);
        let data = Dataset::from_rows(1, vec![bits("1"), bits("1"), bits("0"), bits("1")]).unwrap();
        let c = fully_factorized(&data).unwrap();
        assert_eq!(c.nodes(), &[PsddNode::True { var: 1, theta: 4.0 / 6.0 }]);
    }

    #[test]
    fn baseline_factorizes_and_covers_everything() {
        let data = example_data();
        let c = fully_factorized(&data).unwrap();
        assert!(c.validate().is_valid());
        let thetas: Vec<f64> = (1..=4)
            .map(|v| (data.count_true(v).unwrap() as f64 + 1.0) / 32.0)
            .collect();
        let support = enumerate_support(&c, 20).unwrap();
        assert_eq!(support.len(), 16);
        for (x, _) in support {
            let expected: f64 = x
                .iter()
                .zip(&thetas)
                .map(|(&b, &t)| if b { t.ln() } else { (1.0 - t).ln() })
                .sum();
            assert!(close(log_prob(&c, &x).unwrap(), expected));
        }
        assert_eq!(c.size().nodes, 3 * 4 - 2);
        assert!(fully_factorized(&Dataset::from_rows(2, Vec::new()).unwrap()).is_err());
    }
}
