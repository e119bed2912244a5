//! Top-down PSDD structure learning by vtree-guided clustering.
//!
//! At an internal vtree node the records are clustered on their projection
//! onto the left variables; every cluster becomes one element whose prime is
//! learned from the cluster's left columns and whose sub from its right
//! columns, weighted by the cluster's share of the records. A single column
//! becomes a literal when it is constant and a `⊤` unit otherwise. The
//! learned base accepts every training record, plus any recombination of a
//! cluster's left and right halves.

mod cluster;
mod vtree_learn;

use std::collections::HashMap;

pub use cluster::{cluster, kmeans, Clusterer, KMeans};
pub use vtree_learn::{chow_liu_tree, learn_vtree, mutual_information, VtreeMethod};

use crate::circuit::{Circuit, CircuitBuilder, Element, NodeId};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::logic;
use crate::vtree::{Vtree, VtreeId, VtreeNode};

#[derive(Debug, Clone, PartialEq)]
pub struct LearnConfig {
    /// Target number of clusters per sum unit.
    pub k: usize,
    /// Minimum number of records (with multiplicity) needed to cluster.
    pub min_cluster: u64,
    pub seed: u64,
    pub max_kmeans_iters: usize,
    /// Merge structurally identical nodes after learning.
    pub dedup: bool,
    /// Additive smoothing of sum weights and `⊤` parameters; 0 keeps raw
    /// frequencies.
    pub smoothing: f64,
}

impl Default for LearnConfig {
    fn default() -> Self {
        LearnConfig {
            k: 2,
            min_cluster: 20,
            seed: 0,
            max_kmeans_iters: 100,
            dedup: false,
            smoothing: 0.0,
        }
    }
}

impl LearnConfig {
    pub fn check(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        if self.min_cluster == 0 {
            return Err(Error::Config("minimum cluster size must be at least 1".into()));
        }
        if !(self.smoothing >= 0.0 && self.smoothing.is_finite()) {
            return Err(Error::Config("smoothing must be a finite non-negative number".into()));
        }
        Ok(())
    }
}

/// Mixes a parent seed with a child tag so that every recursive call gets its
/// own stream, independent of evaluation order.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    fn splitmix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    splitmix(seed ^ splitmix(tag))
}

/// Learns a PSDD from `data` over `vtree` with count-weighted k-means.
pub fn slopp(data: &Dataset, vtree: &Vtree, config: &LearnConfig) -> Result<Circuit> {
    slopp_with(data, vtree, config, &KMeans::from(config))
}

/// Learns a PSDD with a caller-supplied clustering procedure.
pub fn slopp_with(
    data: &Dataset,
    vtree: &Vtree,
    config: &LearnConfig,
    clusterer: &dyn Clusterer,
) -> Result<Circuit> {
    config.check()?;
    if data.is_empty() {
        return Err(Error::NoRecords);
    }
    let mut found = data.vars().to_vec();
    found.sort_unstable();
    let expected = vtree.vars(vtree.root()).to_vec();
    if found != expected {
        return Err(Error::VariableMismatch { expected, found });
    }
    let mut learner = Learner::new(vtree, config, clusterer);
    let root = learner.learn(data, vtree.root(), config.seed)?;
    let circuit = learner.builder.finish(root)?;
    Ok(if config.dedup { circuit.dedup() } else { circuit })
}

/// One element under construction: the records it was learned from (indices
/// into the database of its sum unit) and its prime and sub.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LearnedElement {
    pub records: Vec<usize>,
    pub count: u64,
    pub prime: NodeId,
    pub sub: NodeId,
}

/// Recursive learner state: the arena being grown and a satisfiability memo
/// that stays valid because the arena is append-only.
pub struct Learner<'a> {
    vtree: &'a Vtree,
    config: &'a LearnConfig,
    clusterer: &'a dyn Clusterer,
    builder: CircuitBuilder,
    memo: HashMap<(NodeId, NodeId), bool>,
}

impl<'a> Learner<'a> {
    pub fn new(vtree: &'a Vtree, config: &'a LearnConfig, clusterer: &'a dyn Clusterer) -> Self {
        Learner {
            vtree,
            config,
            clusterer,
            builder: CircuitBuilder::new(vtree.clone()),
            memo: HashMap::new(),
        }
    }

    pub fn builder(&self) -> &CircuitBuilder {
        &self.builder
    }

    pub fn into_builder(self) -> CircuitBuilder {
        self.builder
    }

    /// Learns the sub-circuit for vtree node `node` from `data`, whose
    /// columns must cover exactly the variables of `node`.
    pub fn learn(&mut self, data: &Dataset, node: VtreeId, seed: u64) -> Result<NodeId> {
        let alpha = self.config.smoothing;
        match self.vtree.node(node) {
            VtreeNode::Leaf(var) => {
                let total = data.total();
                let ones = data
                    .count_true(var)
                    .ok_or_else(|| Error::Structural(format!("variable {var} missing")))?;
                if ones == total {
                    self.builder.literal(var, true)
                } else if ones == 0 {
                    self.builder.literal(var, false)
                } else {
                    let theta = (ones as f64 + alpha) / (total as f64 + 2.0 * alpha);
                    self.builder.true_unit(var, theta)
                }
            }
            VtreeNode::Internal { left, .. } => {
                let left_data = data.project(self.vtree.vars(left))?;
                let partition = self.clusterer.partition(&left_data, node, seed);
                let clusters = expand_partition(data, &left_data, &partition)?;
                let mut elements = Vec::with_capacity(clusters.len());
                for (i, records) in clusters.into_iter().enumerate() {
                    elements.push(self.learn_element(data, node, records, derive_seed(seed, i as u64))?);
                }
                let elements = self.enforce_exclusivity(data, node, elements, seed)?;

                let total = data.total() as f64;
                let k = elements.len() as f64;
                let elements = elements
                    .into_iter()
                    .map(|e| Element {
                        prime: e.prime,
                        sub: e.sub,
                        weight: (e.count as f64 + alpha) / (total + k * alpha),
                    })
                    .collect();
                self.builder.sum(node, elements)
            }
        }
    }

    /// Learns the prime and sub of one element from the records at
    /// `records` of `data`.
    pub fn learn_element(
        &mut self,
        data: &Dataset,
        node: VtreeId,
        mut records: Vec<usize>,
        seed: u64,
    ) -> Result<LearnedElement> {
        let (left, right) = self
            .vtree
            .children(node)
            .ok_or_else(|| Error::Structural("element on a vtree leaf".into()))?;
        records.sort_unstable();
        let cluster = data.select(&records);
        if cluster.is_empty() {
            return Err(Error::Structural("empty cluster".into()));
        }
        let prime = self.learn(&cluster.project(self.vtree.vars(left))?, left, derive_seed(seed, 0))?;
        let sub = self.learn(&cluster.project(self.vtree.vars(right))?, right, derive_seed(seed, 1))?;
        Ok(LearnedElement {
            count: cluster.total(),
            records,
            prime,
            sub,
        })
    }

    /// Merges elements whose primes overlap until all primes are pairwise
    /// exclusive. Each merge pools the two record sets and relearns the
    /// element, so the number of elements strictly decreases.
    pub fn enforce_exclusivity(
        &mut self,
        data: &Dataset,
        node: VtreeId,
        mut elements: Vec<LearnedElement>,
        seed: u64,
    ) -> Result<Vec<LearnedElement>> {
        while let Some((i, j)) = self.first_overlap(&elements)? {
            let absorbed = elements.remove(j);
            let mut records = std::mem::take(&mut elements[i].records);
            records.extend(absorbed.records);
            elements[i] = self.learn_element(data, node, records, derive_seed(seed, i as u64))?;
        }
        Ok(elements)
    }

    fn first_overlap(&mut self, elements: &[LearnedElement]) -> Result<Option<(usize, usize)>> {
        for i in 0..elements.len() {
            for j in i + 1..elements.len() {
                if logic::conjoin_sat_in(
                    self.builder.nodes(),
                    elements[i].prime,
                    elements[j].prime,
                    &mut self.memo,
                )? {
                    return Ok(Some((i, j)));
                }
            }
        }
        Ok(None)
    }
}

/// Maps a partition of the distinct left projections back to record indices
/// of `data`, checking that it is a proper partition.
fn expand_partition(
    data: &Dataset,
    left: &Dataset,
    partition: &[Vec<usize>],
) -> Result<Vec<Vec<usize>>> {
    let n = left.records().len();
    let mut owner = vec![usize::MAX; n];
    for (c, members) in partition.iter().enumerate() {
        if members.is_empty() {
            return Err(Error::Structural("clustering produced an empty cluster".into()));
        }
        for &m in members {
            if m >= n || owner[m] != usize::MAX {
                return Err(Error::Structural(format!(
                    "clustering is not a partition (record {m})"
                )));
            }
            owner[m] = c;
        }
    }
    if owner.contains(&usize::MAX) {
        return Err(Error::Structural("clustering does not cover every record".into()));
    }
    let index: HashMap<&[bool], usize> = left
        .records()
        .iter()
        .enumerate()
        .map(|(i, r)| (r.values.as_slice(), i))
        .collect();
    let cols: Vec<usize> = left
        .vars()
        .iter()
        .map(|&v| data.column(v).expect("left variables come from data"))
        .collect();
    let mut clusters = vec![Vec::new(); partition.len()];
    let mut key = Vec::with_capacity(cols.len());
    for (i, r) in data.records().iter().enumerate() {
        key.clear();
        key.extend(cols.iter().map(|&c| r.values[c]));
        clusters[owner[index[key.as_slice()]]].push(i);
    }
    Ok(clusters)
}
