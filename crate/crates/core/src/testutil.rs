//! Hand-built fixtures shared by unit tests.

use crate::circuit::{Circuit, CircuitBuilder, Element, NodeId};
use crate::dataset::Dataset;
use crate::vtree::{Vtree, VtreeId};

pub struct ExampleParts {
    pub root_primes: [NodeId; 3],
    pub cluster2_sub: NodeId,
}

fn el(prime: NodeId, sub: NodeId, weight: f64) -> Element {
    Element { prime, sub, weight }
}

/// The four-variable worked example: three root elements over the balanced
/// vtree `({1,2}, {3,4})`, built node by node.
pub fn example_circuit() -> (Circuit, ExampleParts) {
    let vt = Vtree::balanced(&[1, 2, 3, 4]).unwrap();
    let (left, right) = (VtreeId(2), VtreeId(5));
    let mut b = CircuitBuilder::new(vt.clone());
    let lit = |b: &mut CircuitBuilder, v, pos| b.literal(v, pos).unwrap();

    // cluster 1
    let a = lit(&mut b, 1, false);
    let c = lit(&mut b, 2, false);
    let p1 = b.sum(left, vec![el(a, c, 1.0)]).unwrap();
    let a = lit(&mut b, 3, true);
    let c = lit(&mut b, 4, true);
    let d = lit(&mut b, 3, false);
    let e = lit(&mut b, 4, false);
    let s1 = b.sum(right, vec![el(a, c, 0.3), el(d, e, 0.7)]).unwrap();

    // cluster 2
    let a = lit(&mut b, 1, true);
    let c = lit(&mut b, 2, false);
    let d = lit(&mut b, 1, false);
    let e = lit(&mut b, 2, true);
    let p2 = b
        .sum(left, vec![el(a, c, 2.0 / 14.0), el(d, e, 12.0 / 14.0)])
        .unwrap();
    let a = lit(&mut b, 3, false);
    let c = lit(&mut b, 4, true);
    let d = lit(&mut b, 3, true);
    let e = b.true_unit(4, 0.25).unwrap();
    let s2 = b
        .sum(right, vec![el(a, c, 2.0 / 14.0), el(d, e, 12.0 / 14.0)])
        .unwrap();

    // cluster 3
    let a = lit(&mut b, 1, true);
    let c = lit(&mut b, 2, true);
    let p3 = b.sum(left, vec![el(a, c, 1.0)]).unwrap();
    let a = lit(&mut b, 3, true);
    let c = lit(&mut b, 4, false);
    let d = lit(&mut b, 3, false);
    let e = lit(&mut b, 4, true);
    let s3 = b
        .sum(right, vec![el(a, c, 4.0 / 6.0), el(d, e, 2.0 / 6.0)])
        .unwrap();

    let root = b
        .sum(
            vt.root(),
            vec![
                el(p1, s1, 10.0 / 30.0),
                el(p2, s2, 14.0 / 30.0),
                el(p3, s3, 6.0 / 30.0),
            ],
        )
        .unwrap();
    let circuit = b.finish(root).unwrap();
    (
        circuit,
        ExampleParts {
            root_primes: [p1, p2, p3],
            cluster2_sub: s2,
        },
    )
}

/// The 30-record database with its three unobserved rows left out.
pub fn example_data() -> Dataset {
    let rows = [
        ("0011", 3),
        ("0000", 7),
        ("1001", 2),
        ("0111", 3),
        ("0110", 9),
        ("1101", 2),
        ("1110", 4),
    ];
    Dataset::from_counts(
        vec![1, 2, 3, 4],
        rows.iter().map(|(s, c)| (bits(s), *c)),
    )
    .unwrap()
}

pub fn bits(s: &str) -> Vec<bool> {
    s.chars().map(|c| c == '1').collect()
}
