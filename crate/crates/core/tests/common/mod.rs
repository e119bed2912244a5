#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use slopp::{
    Circuit, CircuitBuilder, Clusterer, Dataset, Element, KMeans, LearnConfig, NodeId, PsddNode,
    Vtree, VtreeId,
};

pub fn bits(s: &str) -> Vec<bool> {
    s.chars().map(|c| c == '1').collect()
}

pub const EXAMPLE_ROWS: [(&str, u64); 7] = [
    ("0011", 3),
    ("0000", 7),
    ("1001", 2),
    ("0111", 3),
    ("0110", 9),
    ("1101", 2),
    ("1110", 4),
];

pub const VIRTUAL: [&str; 3] = ["1011", "1010", "0101"];

pub fn example_data() -> Dataset {
    Dataset::from_counts(vec![1, 2, 3, 4], EXAMPLE_ROWS.iter().map(|(s, c)| (bits(s), *c))).unwrap()
}

pub fn example_csv() -> String {
    EXAMPLE_ROWS
        .iter()
        .flat_map(|(s, c)| {
            let line: Vec<String> = s.chars().map(String::from).collect();
            std::iter::repeat_n(line.join(",") + "\n", *c as usize)
        })
        .collect()
}

pub fn example_vtree() -> Vtree {
    Vtree::balanced(&[1, 2, 3, 4]).unwrap()
}

fn el(prime: NodeId, sub: NodeId, weight: f64) -> Element {
    Element { prime, sub, weight }
}

fn pair(b: &mut CircuitBuilder, (v1, s1): (usize, bool), (v2, s2): (usize, bool)) -> (NodeId, NodeId) {
    (b.literal(v1, s1).unwrap(), b.literal(v2, s2).unwrap())
}

/// The worked four-variable example, built by hand.
pub fn example_circuit() -> Circuit {
    let vt = example_vtree();
    let (left, right) = (VtreeId(2), VtreeId(5));
    let mut b = CircuitBuilder::new(vt.clone());

    let (a, c) = pair(&mut b, (1, false), (2, false));
    let p1 = b.sum(left, vec![el(a, c, 1.0)]).unwrap();
    let (a, c) = pair(&mut b, (3, true), (4, true));
    let (d, e) = pair(&mut b, (3, false), (4, false));
    let s1 = b.sum(right, vec![el(a, c, 0.3), el(d, e, 0.7)]).unwrap();

    let (a, c) = pair(&mut b, (1, true), (2, false));
    let (d, e) = pair(&mut b, (1, false), (2, true));
    let p2 = b.sum(left, vec![el(a, c, 2.0 / 14.0), el(d, e, 12.0 / 14.0)]).unwrap();
    let (a, c) = pair(&mut b, (3, false), (4, true));
    let d = b.literal(3, true).unwrap();
    let e = b.true_unit(4, 0.25).unwrap();
    let s2 = b.sum(right, vec![el(a, c, 2.0 / 14.0), el(d, e, 12.0 / 14.0)]).unwrap();

    let (a, c) = pair(&mut b, (1, true), (2, true));
    let p3 = b.sum(left, vec![el(a, c, 1.0)]).unwrap();
    let (a, c) = pair(&mut b, (3, true), (4, false));
    let (d, e) = pair(&mut b, (3, false), (4, true));
    let s3 = b.sum(right, vec![el(a, c, 4.0 / 6.0), el(d, e, 2.0 / 6.0)]).unwrap();

    let root = b
        .sum(
            vt.root(),
            vec![el(p1, s1, 10.0 / 30.0), el(p2, s2, 14.0 / 30.0), el(p3, s3, 6.0 / 30.0)],
        )
        .unwrap();
    b.finish(root).unwrap()
}

/// Fixed groups of left projections at one vtree node; k-means elsewhere.
pub struct Pinned {
    pub node: VtreeId,
    pub groups: Vec<Vec<Vec<bool>>>,
    pub fallback: KMeans,
}

impl Clusterer for Pinned {
    fn partition(&self, left: &Dataset, node: VtreeId, seed: u64) -> Vec<Vec<usize>> {
        if node != self.node {
            return self.fallback.partition(left, node, seed);
        }
        self.groups
            .iter()
            .map(|g| {
                (0..left.records().len())
                    .filter(|&i| g.contains(&left.records()[i].values))
                    .collect()
            })
            .collect()
    }
}

/// The three root groups of the worked example: `{00}`, `{10, 01}`, `{11}`.
pub fn pinned_root(config: &LearnConfig) -> Pinned {
    Pinned {
        node: example_vtree().root(),
        groups: vec![
            vec![bits("00")],
            vec![bits("10"), bits("01")],
            vec![bits("11")],
        ],
        fallback: KMeans::from(config),
    }
}

/// Probability of `x` computed in linear space by summing over every element
/// (no reliance on prime exclusivity or on log arithmetic).
pub fn oracle_prob(c: &Circuit, x: &[bool]) -> f64 {
    fn go(c: &Circuit, id: NodeId, x: &[bool]) -> f64 {
        match c.node(id) {
            PsddNode::Literal { var, positive } => f64::from(u8::from(x[var - 1] == *positive)),
            PsddNode::True { var, theta } => {
                if x[var - 1] {
                    *theta
                } else {
                    1.0 - theta
                }
            }
            PsddNode::Sum { elements, .. } => elements
                .iter()
                .map(|e| e.weight * go(c, e.prime, x) * go(c, e.sub, x))
                .sum(),
        }
    }
    go(c, c.root(), x)
}

pub fn assignments(n: usize) -> impl Iterator<Item = Vec<bool>> {
    (0..1u64 << n).map(move |m| (0..n).map(|i| m >> (n - 1 - i) & 1 == 1).collect())
}

/// Whether two nodes describe the same distribution node-for-node, up to
/// element order, with parameters matched within `tol` in log space.
pub fn same_structure(a: &Circuit, x: NodeId, b: &Circuit, y: NodeId, tol: f64) -> bool {
    let close = |p: f64, q: f64| (p.ln() - q.ln()).abs() <= tol;
    match (a.node(x), b.node(y)) {
        (PsddNode::Literal { var: v, positive: p }, PsddNode::Literal { var: w, positive: q }) => {
            v == w && p == q
        }
        (PsddNode::True { var: v, theta: s }, PsddNode::True { var: w, theta: t }) => {
            v == w && close(*s, *t)
        }
        (PsddNode::Sum { vtree: vx, elements: ex }, PsddNode::Sum { vtree: vy, elements: ey }) => {
            if a.vtree().vars(*vx) != b.vtree().vars(*vy) || ex.len() != ey.len() {
                return false;
            }
            let mut used = vec![false; ey.len()];
            ex.iter().all(|e| {
                let hit = ey.iter().enumerate().position(|(j, f)| {
                    !used[j]
                        && close(e.weight, f.weight)
                        && same_structure(a, e.prime, b, f.prime, tol)
                        && same_structure(a, e.sub, b, f.sub, tol)
                });
                hit.map(|j| used[j] = true).is_some()
            })
        }
        _ => false,
    }
}

pub fn random_dataset(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Dataset {
    // a few prototypes with noise, so that clustering has structure to find
    let protos: Vec<Vec<bool>> = (0..rng.gen_range(1..=4))
        .map(|_| (0..n).map(|_| rng.gen()).collect())
        .collect();
    let rows: Vec<Vec<bool>> = (0..m)
        .map(|_| {
            let p = &protos[rng.gen_range(0..protos.len())];
            p.iter().map(|&b| b ^ rng.gen_bool(0.15)).collect()
        })
        .collect();
    Dataset::from_rows(n, rows).unwrap()
}

pub struct Trial {
    pub data: Dataset,
    pub vtree: Vtree,
    pub config: LearnConfig,
}

/// Random learning problem with `n` in `1..=max_n` and `m` in `1..=max_m`.
pub fn random_trial(seed: u64, max_n: usize, max_m: usize) -> Trial {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=max_n);
    let m = rng.gen_range(1..=max_m);
    let data = random_dataset(&mut rng, n, m);
    let vtree = Vtree::random(n, rng.gen()).unwrap();
    let config = LearnConfig {
        k: rng.gen_range(1..=3),
        min_cluster: rng.gen_range(1..=10),
        seed: rng.gen(),
        ..LearnConfig::default()
    };
    Trial { data, vtree, config }
}
