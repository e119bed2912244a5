//! PSDD circuits stored as an arena with children before parents.
//!
//! Product units are not separate arena entries: each sum unit owns its
//! elements `(prime, sub, weight)` inline, mirroring the `.psdd` format.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::error::{Error, Result};
use crate::logic;
use crate::vtree::{Vtree, VtreeId};
use crate::Var;

/// Tolerance on the sum of a sum unit's weights.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

/// Weight tolerance used when merging structurally identical nodes.
pub const DEDUP_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Element {
    pub prime: NodeId,
    pub sub: NodeId,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PsddNode {
    /// `X` or `¬X`.
    Literal { var: Var, positive: bool },
    /// The constant `⊤` on one variable, with `P(X = 1) = theta`.
    True { var: Var, theta: f64 },
    /// Decision node normalized for an internal vtree node.
    Sum { vtree: VtreeId, elements: Vec<Element> },
}

impl PsddNode {
    pub fn is_input(&self) -> bool {
        !matches!(self, PsddNode::Sum { .. })
    }

    pub fn elements(&self) -> &[Element] {
        match self {
            PsddNode::Sum { elements, .. } => elements,
            _ => &[],
        }
    }
}

/// Incrementally assembles a circuit. Only referential integrity is checked
/// here; semantic properties are left to [`Circuit::validate`].
#[derive(Debug, Clone)]
pub struct CircuitBuilder {
    vtree: Vtree,
    nodes: Vec<PsddNode>,
}

impl CircuitBuilder {
    pub fn new(vtree: Vtree) -> Self {
        CircuitBuilder {
            vtree,
            nodes: Vec::new(),
        }
    }

    pub fn vtree(&self) -> &Vtree {
        &self.vtree
    }

    pub fn nodes(&self) -> &[PsddNode] {
        &self.nodes
    }

    pub fn literal(&mut self, var: Var, positive: bool) -> Result<NodeId> {
        self.push(PsddNode::Literal { var, positive })
    }

    pub fn true_unit(&mut self, var: Var, theta: f64) -> Result<NodeId> {
        self.push(PsddNode::True { var, theta })
    }

    pub fn sum(&mut self, vtree: VtreeId, elements: Vec<Element>) -> Result<NodeId> {
        self.push(PsddNode::Sum { vtree, elements })
    }

    pub fn push(&mut self, node: PsddNode) -> Result<NodeId> {
        match &node {
            PsddNode::Literal { var, .. } | PsddNode::True { var, .. } => {
                if self.vtree.leaf_of(*var).is_none() {
                    return Err(Error::Structural(format!("variable {var} not in vtree")));
                }
            }
            PsddNode::Sum { vtree, elements } => {
                if !self.vtree.contains(*vtree) || self.vtree.is_leaf(*vtree) {
                    return Err(Error::Structural(format!(
                        "sum unit on vtree node {} which is not internal",
                        vtree.0
                    )));
                }
                for e in elements {
                    if e.prime.0 >= self.nodes.len() || e.sub.0 >= self.nodes.len() {
                        return Err(Error::Structural(format!(
                            "element refers to undeclared node ({}, {})",
                            e.prime.0, e.sub.0
                        )));
                    }
                }
            }
        }
        self.nodes.push(node);
        Ok(NodeId(self.nodes.len() - 1))
    }

    /// Vtree node an arena node is normalized for.
    pub fn vtree_of(&self, id: NodeId) -> VtreeId {
        vtree_of(&self.vtree, &self.nodes[id.0])
    }

    /// Keeps the nodes reachable from `root`, in arena order, so that the
    /// root ends up last.
    pub fn finish(self, root: NodeId) -> Result<Circuit> {
        if root.0 >= self.nodes.len() {
            return Err(Error::Structural(format!("root {} out of range", root.0)));
        }
        let mut reachable = vec![false; self.nodes.len()];
        reachable[root.0] = true;
        for i in (0..=root.0).rev() {
            if reachable[i] {
                for e in self.nodes[i].elements() {
                    reachable[e.prime.0] = true;
                    reachable[e.sub.0] = true;
                }
            }
        }
        let mut remap = vec![usize::MAX; self.nodes.len()];
        let mut nodes = Vec::new();
        for (i, node) in self.nodes.into_iter().enumerate().take(root.0 + 1) {
            if !reachable[i] {
                continue;
            }
            remap[i] = nodes.len();
            let node = match node {
                PsddNode::Sum { vtree, elements } => PsddNode::Sum {
                    vtree,
                    elements: elements
                        .into_iter()
                        .map(|e| Element {
                            prime: NodeId(remap[e.prime.0]),
                            sub: NodeId(remap[e.sub.0]),
                            weight: e.weight,
                        })
                        .collect(),
                },
                other => other,
            };
            nodes.push(node);
        }
        Ok(Circuit {
            vtree: self.vtree,
            nodes,
        })
    }
}

pub(crate) fn vtree_of(vtree: &Vtree, node: &PsddNode) -> VtreeId {
    match node {
        PsddNode::Literal { var, .. } | PsddNode::True { var, .. } => {
            vtree.leaf_of(*var).expect("checked on insertion")
        }
        PsddNode::Sum { vtree, .. } => *vtree,
    }
}

/// An immutable PSDD. All nodes are reachable from the root, which is the
/// last node of the arena.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    vtree: Vtree,
    nodes: Vec<PsddNode>,
}

/// Node, edge and parameter counts.
///
/// `nodes` counts input units, product units (one per element) and sum
/// units; `edges` counts sum→element and element→prime/sub arcs;
/// `parameters` counts free weights (`k - 1` per sum unit, one per `⊤` unit).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SizeCounts {
    pub inputs: usize,
    pub products: usize,
    pub sums: usize,
    pub nodes: usize,
    pub edges: usize,
    pub parameters: usize,
}

impl Circuit {
    pub fn vtree(&self) -> &Vtree {
        &self.vtree
    }

    pub fn nodes(&self) -> &[PsddNode] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &PsddNode {
        &self.nodes[id.0]
    }

    pub fn root(&self) -> NodeId {
        NodeId(self.nodes.len() - 1)
    }

    pub fn num_vars(&self) -> usize {
        self.vtree.num_vars()
    }

    pub fn vtree_of(&self, id: NodeId) -> VtreeId {
        vtree_of(&self.vtree, &self.nodes[id.0])
    }

    fn check(&self, id: NodeId) -> Result<()> {
        if id.0 < self.nodes.len() {
            Ok(())
        } else {
            Err(Error::Structural(format!("node {} does not exist", id.0)))
        }
    }

    /// Variables of the input units reachable from `id`.
    pub fn scope(&self, id: NodeId) -> Result<BTreeSet<Var>> {
        self.check(id)?;
        let mut seen = vec![false; id.0 + 1];
        let mut stack = vec![id];
        let mut scope = BTreeSet::new();
        while let Some(n) = stack.pop() {
            if std::mem::replace(&mut seen[n.0], true) {
                continue;
            }
            match &self.nodes[n.0] {
                PsddNode::Literal { var, .. } | PsddNode::True { var, .. } => {
                    scope.insert(*var);
                }
                PsddNode::Sum { elements, .. } => {
                    for e in elements {
                        stack.push(e.prime);
                        stack.push(e.sub);
                    }
                }
            }
        }
        Ok(scope)
    }

    pub fn size(&self) -> SizeCounts {
        let mut c = SizeCounts::default();
        for node in &self.nodes {
            match node {
                PsddNode::Literal { .. } => c.inputs += 1,
                PsddNode::True { .. } => {
                    c.inputs += 1;
                    c.parameters += 1;
                }
                PsddNode::Sum { elements, .. } => {
                    c.sums += 1;
                    c.products += elements.len();
                    c.edges += 3 * elements.len();
                    c.parameters += elements.len().saturating_sub(1);
                }
            }
        }
        c.nodes = c.inputs + c.products + c.sums;
        c
    }

    /// Checks every structural and parameter invariant, including pairwise
    /// exclusivity of the primes of each sum unit.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        let vt = &self.vtree;
        let root = self.root();
        let mut push = |node: Option<NodeId>, kind: Violation| {
            violations.push(Located { node, kind });
        };

        match &self.nodes[root.0] {
            PsddNode::Sum { vtree, .. } if *vtree != vt.root() => {
                push(Some(root), Violation::RootScope)
            }
            PsddNode::Sum { .. } => {}
            _ if vt.len() == 1 => {}
            _ => push(Some(root), Violation::RootNotSum),
        }

        let mut memo = HashMap::new();
        for (i, node) in self.nodes.iter().enumerate() {
            let id = NodeId(i);
            match node {
                PsddNode::Literal { .. } => {}
                PsddNode::True { theta, .. } => {
                    if !(*theta > 0.0 && *theta < 1.0) {
                        push(Some(id), Violation::ThetaOutOfRange(*theta));
                    }
                }
                PsddNode::Sum { vtree, elements } => {
                    if elements.is_empty() {
                        push(Some(id), Violation::DeadBranch);
                        continue;
                    }
                    let (left, right) = vt.children(*vtree).expect("sum on internal node");
                    let mut total = 0.0;
                    let mut scopes_ok = true;
                    for (j, e) in elements.iter().enumerate() {
                        if e.weight.is_nan() || e.weight < 0.0 {
                            push(Some(id), Violation::NegativeWeight { element: j, weight: e.weight });
                        }
                        total += e.weight;
                        if self.vtree_of(e.prime) != left {
                            push(Some(id), Violation::PrimeScope { element: j });
                            scopes_ok = false;
                        }
                        if self.vtree_of(e.sub) != right {
                            push(Some(id), Violation::SubScope { element: j });
                            scopes_ok = false;
                        }
                    }
                    if (total - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
                        push(Some(id), Violation::WeightSum(total));
                    }
                    if !scopes_ok {
                        continue;
                    }
                    for a in 0..elements.len() {
                        for b in a + 1..elements.len() {
                            let sat = logic::conjoin_sat_in(
                                &self.nodes,
                                elements[a].prime,
                                elements[b].prime,
                                &mut memo,
                            );
                            // Err means a deeper scope violation, reported on its own node.
                            if let Ok(true) = sat {
                                push(Some(id), Violation::PrimesOverlap { first: a, second: b });
                            }
                        }
                    }
                }
            }
        }
        ValidationReport { violations }
    }

    /// Merges nodes of identical kind, vtree node and children whose
    /// parameters agree within [`DEDUP_TOLERANCE`].
    pub fn dedup(&self) -> Circuit {
        #[derive(Hash, PartialEq, Eq)]
        enum Key {
            Literal(Var, bool),
            True(Var),
            Sum(VtreeId, Vec<(NodeId, NodeId)>),
        }
        let mut buckets: HashMap<Key, Vec<NodeId>> = HashMap::new();
        let mut remap = Vec::with_capacity(self.nodes.len());
        let mut builder = CircuitBuilder::new(self.vtree.clone());
        for node in &self.nodes {
            let node = match node {
                PsddNode::Sum { vtree, elements } => PsddNode::Sum {
                    vtree: *vtree,
                    elements: elements
                        .iter()
                        .map(|e| Element {
                            prime: remap[e.prime.0],
                            sub: remap[e.sub.0],
                            weight: e.weight,
                        })
                        .collect(),
                },
                other => other.clone(),
            };
            let key = match &node {
                PsddNode::Literal { var, positive } => Key::Literal(*var, *positive),
                PsddNode::True { var, .. } => Key::True(*var),
                PsddNode::Sum { vtree, elements } => {
                    Key::Sum(*vtree, elements.iter().map(|e| (e.prime, e.sub)).collect())
                }
            };
            let candidates = buckets.entry(key).or_default();
            let existing = candidates
                .iter()
                .copied()
                .find(|&c| params_close(&builder.nodes()[c.0], &node));
            let id = match existing {
                Some(c) => c,
                None => {
                    let id = builder.push(node).expect("valid source circuit");
                    candidates.push(id);
                    id
                }
            };
            remap.push(id);
        }
        builder
            .finish(remap[self.root().0])
            .expect("root exists")
    }
}

fn params_close(a: &PsddNode, b: &PsddNode) -> bool {
    match (a, b) {
        (PsddNode::True { theta: x, .. }, PsddNode::True { theta: y, .. }) => {
            (x - y).abs() <= DEDUP_TOLERANCE
        }
        (PsddNode::Sum { elements: x, .. }, PsddNode::Sum { elements: y, .. }) => x
            .iter()
            .zip(y)
            .all(|(p, q)| (p.weight - q.weight).abs() <= DEDUP_TOLERANCE),
        (PsddNode::Literal { .. }, PsddNode::Literal { .. }) => true,
        _ => false,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    RootNotSum,
    RootScope,
    ThetaOutOfRange(f64),
    NegativeWeight { element: usize, weight: f64 },
    WeightSum(f64),
    PrimeScope { element: usize },
    SubScope { element: usize },
    PrimesOverlap { first: usize, second: usize },
    DeadBranch,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::RootNotSum => write!(f, "root is not a sum unit"),
            Violation::RootScope => write!(f, "root does not cover every variable"),
            Violation::ThetaOutOfRange(t) => write!(f, "theta {t} outside (0, 1)"),
            Violation::NegativeWeight { element, weight } => {
                write!(f, "element {element} has negative weight {weight}")
            }
            Violation::WeightSum(s) => write!(f, "weights sum to {s}"),
            Violation::PrimeScope { element } => {
                write!(f, "prime of element {element} not on the left vtree child")
            }
            Violation::SubScope { element } => {
                write!(f, "sub of element {element} not on the right vtree child")
            }
            Violation::PrimesOverlap { first, second } => {
                write!(f, "primes of elements {first} and {second} are not exclusive")
            }
            Violation::DeadBranch => write!(f, "element encodes false"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Located {
    pub node: Option<NodeId>,
    pub kind: Violation,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Located>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return writeln!(f, "valid");
        }
        for v in &self.violations {
            match v.node {
                Some(n) => writeln!(f, "node {}: {}", n.0, v.kind)?,
                None => writeln!(f, "{}", v.kind)?,
            }
        }
        Ok(())
    }
}
