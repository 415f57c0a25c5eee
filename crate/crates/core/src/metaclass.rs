//! Level-1 grouping of structure-only trees into metaclasses.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::tree::{strip_values, MetaTree, Node};
use crate::Scalar;

pub const LDP_BINS: usize = 32;
pub const LDP_STATS: usize = 5;
/// Degree (or degree statistic) mapped to the last bin.
pub const LDP_RANGE: f64 = 1024.0;
pub const LDP_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Abstraction {
    /// Exact match on the digest of the DFS label sequence.
    Hash,
    /// Exact match on the quantized local degree profile.
    Ldp,
}

impl Abstraction {
    pub fn name(self) -> &'static str {
        match self {
            Abstraction::Hash => "hash",
            Abstraction::Ldp => "ldp",
        }
    }
}

impl FromStr for Abstraction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "hash" => Ok(Abstraction::Hash),
            "ldp" => Ok(Abstraction::Ldp),
            other => Err(format!("unknown level-1 abstraction {other:?}")),
        }
    }
}

impl fmt::Display for Abstraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum StructureSignature {
    Hash([u8; 32]),
    /// `LDP_STATS` histograms of `LDP_BINS` bytes each.
    Ldp(Vec<u8>),
}

impl StructureSignature {
    pub fn abstraction(&self) -> Abstraction {
        match self {
            StructureSignature::Hash(_) => Abstraction::Hash,
            StructureSignature::Ldp(_) => Abstraction::Ldp,
        }
    }

    /// Hex key used in the index.
    pub fn key(&self) -> String {
        match self {
            StructureSignature::Hash(d) => hex::encode(d),
            StructureSignature::Ldp(h) => hex::encode(h),
        }
    }
}

/// Undirected adjacency degrees of the tree's nodes in DFS order, each with
/// the degrees of its neighbours.
fn degree_lists(tree: &MetaTree) -> Vec<(usize, Vec<usize>)> {
    fn walk(node: &Node, parent_degree: Option<usize>, out: &mut Vec<(usize, Vec<usize>)>) {
        let degree = node.children.len() + usize::from(parent_degree.is_some());
        let mut nbrs: Vec<usize> = node.children.iter().map(|c| c.children.len() + 1).collect();
        nbrs.extend(parent_degree);
        out.push((degree, nbrs));
        for c in &node.children {
            walk(c, Some(degree), out);
        }
    }
    let mut out = Vec::new();
    walk(&tree.root, None, &mut out);
    out
}

/// Per node: degree and the min, max, mean and population standard
/// deviation of its neighbours' degrees (all zero without neighbours).
pub fn ldp_statistics<F: Scalar>(tree: &MetaTree) -> Vec<[F; LDP_STATS]> {
    degree_lists(tree)
        .into_iter()
        .map(|(d, nbrs)| {
            let deg = F::from_usize_lossy(d);
            if nbrs.is_empty() {
                return [deg, F::zero(), F::zero(), F::zero(), F::zero()];
            }
            let xs: Vec<F> = nbrs.iter().map(|&n| F::from_usize_lossy(n)).collect();
            let n = F::from_usize_lossy(xs.len());
            let mean = xs.iter().copied().sum::<F>() / n;
            let var = xs.iter().map(|&x| (x - mean) * (x - mean)).sum::<F>() / n;
            let min = xs.iter().copied().fold(F::infinity(), F::min);
            let max = xs.iter().copied().fold(F::neg_infinity(), F::max);
            [deg, min, max, mean, var.sqrt()]
        })
        .collect()
}

/// Bin 0 holds values below 1; values from 1 up to `LDP_RANGE` are spread
/// log-uniformly over the remaining bins.
pub fn ldp_bin<F: Scalar>(v: F) -> usize {
    let v = v.to_f64().unwrap_or(0.0);
    if !(v >= 1.0) {
        return 0;
    }
    let b = 1 + ((LDP_BINS - 1) as f64 * v.ln() / LDP_RANGE.ln()).floor() as usize;
    b.min(LDP_BINS - 1)
}

/// Five concatenated histograms of node fractions, each quantized to a byte.
pub fn ldp_embed(tree: &MetaTree) -> Vec<u8> {
    let stats = ldp_statistics::<f64>(tree);
    let mut counts = vec![0usize; LDP_STATS * LDP_BINS];
    for s in &stats {
        for (k, &v) in s.iter().enumerate() {
            counts[k * LDP_BINS + ldp_bin(v)] += 1;
        }
    }
    let n = stats.len() as f64;
    counts.into_iter().map(|c| (255.0 * c as f64 / n).round() as u8).collect()
}

/// SHA-256 over the DFS sequence with each node written as
/// `(` len `:` label children `)`.
pub fn tree_hash(tree: &MetaTree) -> [u8; 32] {
    fn feed(node: &Node, h: &mut Sha256) {
        h.update(format!("({}:", node.label.len()));
        h.update(node.label.as_bytes());
        for c in &node.children {
            feed(c, h);
        }
        h.update(b")");
    }
    let mut h = Sha256::new();
    feed(&tree.root, &mut h);
    h.finalize().into()
}

/// Signature of the tree with its values stripped.
pub fn signature(tree: &MetaTree, abstraction: Abstraction) -> StructureSignature {
    let s = strip_values(tree);
    match abstraction {
        Abstraction::Hash => StructureSignature::Hash(tree_hash(&s)),
        Abstraction::Ldp => StructureSignature::Ldp(ldp_embed(&s)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MetaclassId {
    Known(u32),
    Unknown,
}

impl fmt::Display for MetaclassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetaclassId::Known(i) => write!(f, "{i}"),
            MetaclassId::Unknown => f.write_str("unknown"),
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum MetaclassError {
    #[error("cannot fit a metaclass index on an empty training set")]
    EmptyTrainingSet,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetaclassIndex {
    pub abstraction: Abstraction,
    pub ldp_version: u32,
    ids: BTreeMap<String, u32>,
}

impl MetaclassIndex {
    /// One metaclass per distinct signature; ids follow signature order.
    pub fn fit<'a, I>(trees: I, abstraction: Abstraction) -> Result<Self, MetaclassError>
    where
        I: IntoIterator<Item = &'a MetaTree>,
    {
        let sigs: Vec<StructureSignature> = trees.into_iter().map(|t| signature(t, abstraction)).collect();
        Self::fit_signatures(&sigs, abstraction)
    }

    /// Signatures of another abstraction are ignored.
    pub fn fit_signatures<'a, I>(sigs: I, abstraction: Abstraction) -> Result<Self, MetaclassError>
    where
        I: IntoIterator<Item = &'a StructureSignature>,
    {
        let mut keys: BTreeMap<String, u32> = BTreeMap::new();
        for s in sigs.into_iter().filter(|s| s.abstraction() == abstraction) {
            keys.insert(s.key(), 0);
        }
        if keys.is_empty() {
            return Err(MetaclassError::EmptyTrainingSet);
        }
        for (i, v) in keys.values_mut().enumerate() {
            *v = i as u32;
        }
        Ok(MetaclassIndex { abstraction, ldp_version: LDP_VERSION, ids: keys })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn lookup(&self, sig: &StructureSignature) -> MetaclassId {
        if sig.abstraction() != self.abstraction {
            return MetaclassId::Unknown;
        }
        self.ids.get(&sig.key()).map_or(MetaclassId::Unknown, |&i| MetaclassId::Known(i))
    }

    pub fn assign(&self, tree: &MetaTree) -> MetaclassId {
        self.lookup(&signature(tree, self.abstraction))
    }
}

pub fn fit_index<'a, I>(trees: I, abstraction: Abstraction) -> Result<MetaclassIndex, MetaclassError>
where
    I: IntoIterator<Item = &'a MetaTree>,
{
    MetaclassIndex::fit(trees, abstraction)
}
