//! Vtrees: full binary trees whose leaves are the variables.
//!
//! Nodes are always stored in post-order (left subtree, right subtree,
//! parent), so children precede parents and the root is the last node. The
//! post-order index is the id used by the `.vtree` and `.psdd` formats.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::Var;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VtreeId(pub usize);

impl VtreeId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VtreeNode {
    Leaf(Var),
    Internal { left: VtreeId, right: VtreeId },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vtree {
    nodes: Vec<VtreeNode>,
    // sorted variables below each node
    vars: Vec<Vec<Var>>,
    // leaf id per variable, indexed by var - 1
    leaves: Vec<VtreeId>,
    parents: Vec<Option<VtreeId>>,
}

impl Vtree {
    /// Builds a vtree from nodes in any order. The nodes reachable from `root`
    /// must form a full binary tree whose leaves are exactly the variables
    /// `1..=n`, and no other node may be present. Ids are renumbered to
    /// post-order.
    pub fn from_nodes(nodes: &[VtreeNode], root: VtreeId) -> Result<Vtree> {
        if root.0 >= nodes.len() {
            return Err(Error::Structural(format!("root {} out of range", root.0)));
        }
        let mut parent_count = vec![0usize; nodes.len()];
        for node in nodes {
            if let VtreeNode::Internal { left, right } = *node {
                for child in [left, right] {
                    if child.0 >= nodes.len() {
                        return Err(Error::Structural(format!(
                            "vtree node {} does not exist",
                            child.0
                        )));
                    }
                    parent_count[child.0] += 1;
                }
                if left == right {
                    return Err(Error::Structural("vtree node with twin children".into()));
                }
            }
        }
        if parent_count[root.0] != 0 {
            return Err(Error::Structural("vtree root has a parent".into()));
        }
        for (i, &c) in parent_count.iter().enumerate() {
            if i != root.0 && c != 1 {
                return Err(Error::Structural(format!(
                    "vtree node {i} has {c} parents, expected 1"
                )));
            }
        }

        // Iterative post-order; with unique parents and a parentless root this
        // visits every node exactly once unless a cycle detaches some nodes.
        let mut order = Vec::with_capacity(nodes.len());
        let mut stack = vec![(root, false)];
        while let Some((id, expanded)) = stack.pop() {
            match nodes[id.0] {
                VtreeNode::Internal { left, right } if !expanded => {
                    stack.push((id, true));
                    stack.push((right, false));
                    stack.push((left, false));
                }
                _ => order.push(id),
            }
            if order.len() > nodes.len() {
                return Err(Error::Structural("vtree contains a cycle".into()));
            }
        }
        if order.len() != nodes.len() {
            return Err(Error::Structural("vtree nodes unreachable from root".into()));
        }
        let mut new_id = vec![0usize; nodes.len()];
        for (i, id) in order.iter().enumerate() {
            new_id[id.0] = i;
        }
        let canonical: Vec<VtreeNode> = order
            .iter()
            .map(|id| match nodes[id.0] {
                VtreeNode::Leaf(v) => VtreeNode::Leaf(v),
                VtreeNode::Internal { left, right } => VtreeNode::Internal {
                    left: VtreeId(new_id[left.0]),
                    right: VtreeId(new_id[right.0]),
                },
            })
            .collect();
        Self::index(canonical)
    }

    fn index(nodes: Vec<VtreeNode>) -> Result<Vtree> {
        let mut vars: Vec<Vec<Var>> = Vec::with_capacity(nodes.len());
        let mut parents = vec![None; nodes.len()];
        let n_leaves = nodes
            .iter()
            .filter(|n| matches!(n, VtreeNode::Leaf(_)))
            .count();
        let mut leaves = vec![None; n_leaves];
        for (i, node) in nodes.iter().enumerate() {
            match *node {
                VtreeNode::Leaf(v) => {
                    if v == 0 || v > n_leaves {
                        return Err(Error::Structural(format!(
                            "vtree variable {v} outside 1..={n_leaves}"
                        )));
                    }
                    if leaves[v - 1].is_some() {
                        return Err(Error::Structural(format!("duplicate vtree variable {v}")));
                    }
                    leaves[v - 1] = Some(VtreeId(i));
                    vars.push(vec![v]);
                }
                VtreeNode::Internal { left, right } => {
                    let mut vs = vars[left.0].clone();
                    vs.extend_from_slice(&vars[right.0]);
                    vs.sort_unstable();
                    parents[left.0] = Some(VtreeId(i));
                    parents[right.0] = Some(VtreeId(i));
                    vars.push(vs);
                }
            }
        }
        let leaves = leaves.into_iter().map(|l| l.expect("every variable placed")).collect();
        Ok(Vtree {
            nodes,
            vars,
            leaves,
            parents,
        })
    }

    /// Single-leaf vtree.
    pub fn leaf(var: Var) -> Result<Vtree> {
        Self::from_nodes(&[VtreeNode::Leaf(var)], VtreeId(0))
    }

    /// Balanced vtree over `order`: the first half (rounded up) goes left.
    pub fn balanced(order: &[Var]) -> Result<Vtree> {
        Self::from_splits(order, &mut |len| len.div_ceil(2))
    }

    /// Right-linear vtree over `order`: every left child is a leaf.
    pub fn right_linear(order: &[Var]) -> Result<Vtree> {
        Self::from_splits(order, &mut |_| 1)
    }

    /// Random variable order with random split points.
    pub fn random(n: usize, seed: u64) -> Result<Vtree> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut order: Vec<Var> = (1..=n).collect();
        order.shuffle(&mut rng);
        Self::from_splits(&order, &mut |len| rng.gen_range(1..len))
    }

    /// Builds a vtree by recursively cutting `order`; `split(len)` returns the
    /// size of the left part, in `1..len`.
    pub fn from_splits(order: &[Var], split: &mut dyn FnMut(usize) -> usize) -> Result<Vtree> {
        if order.is_empty() {
            return Err(Error::NoVariables);
        }
        fn go(
            order: &[Var],
            split: &mut dyn FnMut(usize) -> usize,
            nodes: &mut Vec<VtreeNode>,
        ) -> VtreeId {
            if order.len() == 1 {
                nodes.push(VtreeNode::Leaf(order[0]));
            } else {
                let at = split(order.len()).clamp(1, order.len() - 1);
                let left = go(&order[..at], split, nodes);
                let right = go(&order[at..], split, nodes);
                nodes.push(VtreeNode::Internal { left, right });
            }
            VtreeId(nodes.len() - 1)
        }
        let mut nodes = Vec::with_capacity(2 * order.len() - 1);
        let root = go(order, split, &mut nodes);
        Self::from_nodes(&nodes, root)
    }

    pub fn nodes(&self) -> &[VtreeNode] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn root(&self) -> VtreeId {
        VtreeId(self.nodes.len() - 1)
    }

    pub fn num_vars(&self) -> usize {
        self.leaves.len()
    }

    pub fn node(&self, id: VtreeId) -> VtreeNode {
        self.nodes[id.0]
    }

    pub fn contains(&self, id: VtreeId) -> bool {
        id.0 < self.nodes.len()
    }

    /// Sorted variables below `id`.
    pub fn vars(&self, id: VtreeId) -> &[Var] {
        &self.vars[id.0]
    }

    pub fn is_leaf(&self, id: VtreeId) -> bool {
        matches!(self.nodes[id.0], VtreeNode::Leaf(_))
    }

    pub fn children(&self, id: VtreeId) -> Option<(VtreeId, VtreeId)> {
        match self.nodes[id.0] {
            VtreeNode::Internal { left, right } => Some((left, right)),
            VtreeNode::Leaf(_) => None,
        }
    }

    pub fn parent(&self, id: VtreeId) -> Option<VtreeId> {
        self.parents[id.0]
    }

    /// Leaf holding `var`, if the variable is in the vtree.
    pub fn leaf_of(&self, var: Var) -> Option<VtreeId> {
        var.checked_sub(1).and_then(|i| self.leaves.get(i)).copied()
    }
}
