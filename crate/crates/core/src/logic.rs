//! Logical semantics under the closed-world assumption.
//!
//! A database is read as the DNF whose clauses are its distinct records.
//! Every clause is complete (it fixes every variable), so its only model is
//! the record itself; checking that such a DNF implies a circuit's base
//! therefore reduces to checking each record against the circuit.

use std::collections::{BTreeSet, HashMap};

use crate::circuit::{Circuit, NodeId, PsddNode};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::Var;

/// A DNF of complete conjunctive clauses over `vars`. Each clause is stored
/// as the polarity of every variable, aligned with `vars`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Formula {
    vars: Vec<Var>,
    clauses: BTreeSet<Vec<bool>>,
}

impl Formula {
    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    pub fn clauses(&self) -> &BTreeSet<Vec<bool>> {
        &self.clauses
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    /// Whether `assignment` (aligned with `vars`) satisfies the formula.
    pub fn satisfied_by(&self, assignment: &[bool]) -> bool {
        self.clauses.contains(assignment)
    }
}

pub fn dnf_of_database(data: &Dataset) -> Result<Formula> {
    if data.is_empty() {
        return Err(Error::NoRecords);
    }
    let clauses = data.records().iter().map(|r| r.values.clone()).collect();
    Ok(Formula {
        vars: data.vars().to_vec(),
        clauses,
    })
}

/// Truth value of every node's base under `record` (indexed by `var - 1`).
fn evaluate_base(circuit: &Circuit, record: &[bool]) -> Vec<bool> {
    let mut value = Vec::with_capacity(circuit.nodes().len());
    for node in circuit.nodes() {
        let v = match node {
            PsddNode::Literal { var, positive } => record[var - 1] == *positive,
            PsddNode::True { .. } => true,
            PsddNode::Sum { elements, .. } => elements
                .iter()
                .any(|e| value[e.prime.0] && value[e.sub.0]),
        };
        value.push(v);
    }
    value
}

/// Whether the complete assignment `record` (indexed by `var - 1`) satisfies
/// the base of the circuit's root.
pub fn consistent(circuit: &Circuit, record: &[bool]) -> Result<bool> {
    if record.len() != circuit.num_vars() {
        return Err(Error::Arity {
            expected: circuit.num_vars(),
            found: record.len(),
        });
    }
    Ok(*evaluate_base(circuit, record).last().expect("non-empty circuit"))
}

/// Whether `dnf` logically implies the circuit's base.
pub fn implies(dnf: &Formula, circuit: &Circuit) -> Result<bool> {
    let expected: Vec<Var> = (1..=circuit.num_vars()).collect();
    let mut found = dnf.vars.clone();
    found.sort_unstable();
    if found != expected {
        return Err(Error::VariableMismatch { expected, found });
    }
    let mut record = vec![false; circuit.num_vars()];
    for clause in &dnf.clauses {
        for (&var, &value) in dnf.vars.iter().zip(clause) {
            record[var - 1] = value;
        }
        if !consistent(circuit, &record)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Whether `base(a) ∧ base(b)` is satisfiable; both nodes must be normalized
/// for the same vtree node.
pub fn conjoin_satisfiable(circuit: &Circuit, a: NodeId, b: NodeId) -> Result<bool> {
    for id in [a, b] {
        if id.0 >= circuit.nodes().len() {
            return Err(Error::Structural(format!("node {} does not exist", id.0)));
        }
    }
    conjoin_sat_in(circuit.nodes(), a, b, &mut HashMap::new())
}

/// Pairwise product traversal over an arena, aligned on the shared vtree.
/// `memo` is keyed on the ordered node pair and may be reused across queries
/// on the same (append-only) arena.
pub(crate) fn conjoin_sat_in(
    nodes: &[PsddNode],
    a: NodeId,
    b: NodeId,
    memo: &mut HashMap<(NodeId, NodeId), bool>,
) -> Result<bool> {
    let key = if a <= b { (a, b) } else { (b, a) };
    if let Some(&sat) = memo.get(&key) {
        return Ok(sat);
    }
    let sat = match (&nodes[key.0 .0], &nodes[key.1 .0]) {
        (PsddNode::Sum { vtree: u, elements: xs }, PsddNode::Sum { vtree: w, elements: ys }) => {
            if u != w {
                return Err(Error::ScopeMismatch(format!(
                    "sum units on vtree nodes {} and {}",
                    u.0, w.0
                )));
            }
            let mut sat = false;
            'outer: for x in xs {
                for y in ys {
                    if conjoin_sat_in(nodes, x.prime, y.prime, memo)?
                        && conjoin_sat_in(nodes, x.sub, y.sub, memo)?
                    {
                        sat = true;
                        break 'outer;
                    }
                }
            }
            sat
        }
        (x, y) if x.is_input() && y.is_input() => {
            let var_of = |n: &PsddNode| match n {
                PsddNode::Literal { var, .. } | PsddNode::True { var, .. } => *var,
                PsddNode::Sum { .. } => unreachable!(),
            };
            if var_of(x) != var_of(y) {
                return Err(Error::ScopeMismatch(format!(
                    "input units on variables {} and {}",
                    var_of(x),
                    var_of(y)
                )));
            }
            match (x, y) {
                (
                    PsddNode::Literal { positive: p, .. },
                    PsddNode::Literal { positive: q, .. },
                ) => p == q,
                _ => true,
            }
        }
        _ => {
            return Err(Error::ScopeMismatch(
                "input unit conjoined with a sum unit".into(),
            ))
        }
    };
    memo.insert(key, sat);
    Ok(sat)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::CircuitBuilder;
    use crate::vtree::Vtree;
    use crate::testutil::{bits, example_circuit, example_data};

    /// Every complete assignment over `n` variables, as bit vectors.
    fn all_assignments(n: usize) -> impl Iterator<Item = Vec<bool>> {
        (0u32..1 << n).map(move |m| (0..n).map(|i| m >> (n - 1 - i) & 1 == 1).collect())
    }

    #[test]
    fn dnf_of_example_has_seven_clauses() {
        let f = dnf_of_database(&example_data()).unwrap();
        assert_eq!(f.len(), 7);
        assert!(f.satisfied_by(&bits("0110")));
        assert!(!f.satisfied_by(&bits("1011")));
    }

    #[test]
    fn dnf_single_and_duplicate_records() {
        let d = Dataset::from_rows(2, vec![bits("11")]).unwrap();
        let f = dnf_of_database(&d).unwrap();
        assert_eq!(f.clauses().iter().collect::<Vec<_>>(), vec![&bits("11")]);
        let d = Dataset::from_rows(2, vec![bits("01"), bits("01")]).unwrap();
        assert_eq!(dnf_of_database(&d).unwrap().len(), 1);
    }

    #[test]
    fn dnf_of_empty_database_fails() {
        let d = Dataset::from_rows(2, Vec::new()).unwrap();
        assert!(matches!(dnf_of_database(&d), Err(Error::NoRecords)));
    }

    #[test]
    fn example_consistency() {
        let (c, _) = example_circuit();
        assert!(consistent(&c, &bits("0011")).unwrap());
        assert!(consistent(&c, &bits("1011")).unwrap());
        assert!(!consistent(&c, &bits("1111")).unwrap());
        assert!(consistent(&c, &bits("001")).is_err());
    }

    #[test]
    fn example_support_by_brute_force() {
        let (c, _) = example_circuit();
        let support: Vec<String> = all_assignments(4)
            .filter(|x| consistent(&c, x).unwrap())
            .map(|x| x.iter().map(|&b| if b { '1' } else { '0' }).collect())
            .collect();
        assert_eq!(
            support,
            vec!["0000", "0011", "0101", "0110", "0111", "1001", "1010", "1011", "1101", "1110"]
        );
    }

    #[test]
    fn example_implies_example() {
        let (c, _) = example_circuit();
        let f = dnf_of_database(&example_data()).unwrap();
        assert!(implies(&f, &c).unwrap());
    }

    #[test]
    fn record_outside_support_does_not_imply() {
        let (c, _) = example_circuit();
        for x in ["0001", "0010", "0100", "1000", "1100", "1111"] {
            let d = Dataset::from_rows(4, vec![bits(x)]).unwrap();
            assert!(!implies(&dnf_of_database(&d).unwrap(), &c).unwrap(), "{x}");
        }
        let d = Dataset::from_rows(3, vec![bits("000")]).unwrap();
        assert!(implies(&dnf_of_database(&d).unwrap(), &c).is_err());
    }

    #[test]
    fn literal_conjunctions() {
        let vt = Vtree::leaf(1).unwrap();
        let mut b = CircuitBuilder::new(vt);
        let pos = b.literal(1, true).unwrap();
        let neg = b.literal(1, false).unwrap();
        let top = b.true_unit(1, 0.4).unwrap();
        let sat = |a, c| conjoin_sat_in(b.nodes(), a, c, &mut HashMap::new()).unwrap();
        assert!(!sat(pos, neg));
        assert!(sat(pos, pos));
        assert!(sat(top, neg));
    }

    #[test]
    fn example_root_primes_are_exclusive() {
        let (c, parts) = example_circuit();
        let p = parts.root_primes;
        for i in 0..3 {
            assert!(conjoin_satisfiable(&c, p[i], p[i]).unwrap());
            for j in i + 1..3 {
                assert!(!conjoin_satisfiable(&c, p[i], p[j]).unwrap());
            }
        }
        assert!(conjoin_satisfiable(&c, p[0], parts.cluster2_sub).is_err());
    }
}
