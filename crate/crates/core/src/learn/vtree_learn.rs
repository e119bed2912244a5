//! Vtree construction heuristics.

use std::fmt;
use std::str::FromStr;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::vtree::{Vtree, VtreeId, VtreeNode};
use crate::Var;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VtreeMethod {
    Balanced,
    RightLinear,
    Random(u64),
    ChowLiu,
}

impl fmt::Display for VtreeMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VtreeMethod::Balanced => write!(f, "balanced"),
            VtreeMethod::RightLinear => write!(f, "rightlinear"),
            VtreeMethod::Random(_) => write!(f, "random"),
            VtreeMethod::ChowLiu => write!(f, "chowliu"),
        }
    }
}

impl FromStr for VtreeMethod {
    type Err = String;

    /// Parses a method name; `random` gets seed 0 until overridden.
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "balanced" => Ok(VtreeMethod::Balanced),
            "rightlinear" => Ok(VtreeMethod::RightLinear),
            "random" => Ok(VtreeMethod::Random(0)),
            "chowliu" => Ok(VtreeMethod::ChowLiu),
            other => Err(format!(
                "unknown vtree method '{other}' (expected balanced, rightlinear, random or chowliu)"
            )),
        }
    }
}

pub fn learn_vtree(data: &Dataset, method: VtreeMethod) -> Result<Vtree> {
    let n = data.num_vars();
    if n == 0 {
        return Err(Error::NoVariables);
    }
    let mut order = data.vars().to_vec();
    order.sort_unstable();
    match method {
        VtreeMethod::Balanced => Vtree::balanced(&order),
        VtreeMethod::RightLinear => Vtree::right_linear(&order),
        VtreeMethod::Random(seed) => Vtree::random(n, seed),
        VtreeMethod::ChowLiu => {
            if data.is_empty() {
                return Err(Error::NoRecords);
            }
            chow_liu_vtree(data)
        }
    }
}

/// Pairwise mutual information (nats) between columns, from joint counts
/// with one pseudo-count per cell.
pub fn mutual_information(data: &Dataset) -> Vec<Vec<f64>> {
    let n = data.num_vars();
    let mut mi = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let mut joint = [[1.0f64; 2]; 2];
            for r in data.records() {
                joint[usize::from(r.values[i])][usize::from(r.values[j])] += r.count as f64;
            }
            let total: f64 = joint.iter().flatten().sum();
            let pa = [(joint[0][0] + joint[0][1]) / total, (joint[1][0] + joint[1][1]) / total];
            let pb = [(joint[0][0] + joint[1][0]) / total, (joint[0][1] + joint[1][1]) / total];
            let mut sum = 0.0;
            for a in 0..2 {
                for b in 0..2 {
                    let p = joint[a][b] / total;
                    sum += p * (p / (pa[a] * pb[b])).ln();
                }
            }
            mi[i][j] = sum;
            mi[j][i] = sum;
        }
    }
    mi
}

/// Maximum spanning tree over the mutual-information graph (Prim, ties to
/// the lowest column index). Returns edges `(parent, child)` as column
/// indices, in insertion order.
pub fn chow_liu_tree(mi: &[Vec<f64>]) -> Vec<(usize, usize)> {
    let n = mi.len();
    let mut in_tree = vec![false; n];
    let mut best: Vec<(f64, usize)> = vec![(f64::NEG_INFINITY, 0); n];
    let mut edges = Vec::with_capacity(n.saturating_sub(1));
    if n == 0 {
        return edges;
    }
    in_tree[0] = true;
    for j in 1..n {
        best[j] = (mi[0][j], 0);
    }
    for _ in 1..n {
        let mut pick = None;
        for j in 0..n {
            if !in_tree[j] && pick.is_none_or(|p: usize| best[j].0 > best[p].0) {
                pick = Some(j);
            }
        }
        let j = pick.expect("a vertex remains");
        in_tree[j] = true;
        edges.push((best[j].1, j));
        for t in 0..n {
            if !in_tree[t] && mi[j][t] > best[t].0 {
                best[t] = (mi[j][t], j);
            }
        }
    }
    edges
}

/// Chow-Liu tree turned into a vtree by recursive edge cuts. At each step
/// the weakest edge is cut among those whose smaller side holds at least a
/// quarter of the component, keeping strongly dependent variables together
/// while bounding the depth.
fn chow_liu_vtree(data: &Dataset) -> Result<Vtree> {
    let mi = mutual_information(data);
    let edges = chow_liu_tree(&mi);
    let vars = data.vars().to_vec();
    let component: Vec<usize> = (0..vars.len()).collect();
    let mut nodes = Vec::with_capacity(2 * vars.len());
    let root = split(&component, &edges, &mi, &vars, &mut nodes);
    Vtree::from_nodes(&nodes, root)
}

fn split(
    component: &[usize],
    edges: &[(usize, usize)],
    mi: &[Vec<f64>],
    vars: &[Var],
    nodes: &mut Vec<VtreeNode>,
) -> VtreeId {
    if component.len() == 1 {
        nodes.push(VtreeNode::Leaf(vars[component[0]]));
        return VtreeId(nodes.len() - 1);
    }
    let inside: Vec<(usize, usize)> = edges
        .iter()
        .copied()
        .filter(|(a, b)| component.contains(a) && component.contains(b))
        .collect();
    let floor = component.len().div_ceil(4).max(1);

    // (mi, imbalance, edge index) ordered lexicographically
    let mut best: Option<(f64, usize, usize, Vec<usize>)> = None;
    for (e, &(a, b)) in inside.iter().enumerate() {
        let side = reach(b, a, &inside);
        let small = side.len().min(component.len() - side.len());
        if small < floor {
            continue;
        }
        let imbalance = component.len() - 2 * small;
        let w = mi[a][b];
        let better = match &best {
            None => true,
            Some((bw, bi, _, _)) => w < *bw || (w == *bw && imbalance < *bi),
        };
        if better {
            best = Some((w, imbalance, e, side));
        }
    }
    let (_, _, _, side) = best.expect("a spanning tree over 2+ vertices has an eligible edge");
    let other: Vec<usize> = component.iter().copied().filter(|v| !side.contains(v)).collect();
    let min_var = |c: &[usize]| c.iter().map(|&i| vars[i]).min().unwrap_or(usize::MAX);
    let (left, right) = if min_var(&side) < min_var(&other) {
        (side, other)
    } else {
        (other, side)
    };
    let l = split(&left, edges, mi, vars, nodes);
    let r = split(&right, edges, mi, vars, nodes);
    nodes.push(VtreeNode::Internal { left: l, right: r });
    VtreeId(nodes.len() - 1)
}

/// Vertices reachable from `start` in `edges` without crossing into `blocked`.
fn reach(start: usize, blocked: usize, edges: &[(usize, usize)]) -> Vec<usize> {
    let mut seen = vec![start];
    let mut stack = vec![start];
    while let Some(v) = stack.pop() {
        for &(a, b) in edges {
            let next = if a == v {
                b
            } else if b == v {
                a
            } else {
                continue;
            };
            if next != blocked && !seen.contains(&next) {
                seen.push(next);
                stack.push(next);
            }
        }
    }
    seen.sort_unstable();
    seen
}
