//! Path labeling, descriptor vocabularies and the feature vectors built on
//! them.

mod paths;
mod vocab;

use std::collections::{BTreeMap, HashSet};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::h264::{EncodingSetting, ParamSet, ParamSetKind};
use crate::tree::{MetaTree, Node, NodeKind, CODEC_LABEL};
use crate::Scalar;

pub use self::paths::{
    enumerate_paths, escape_label, escape_value, strip_ordinal, visit_node_paths, LabelingScheme, PathEntry,
};
pub use self::vocab::{fit_vocabulary, Descriptor, DescriptorKind, Scope, Vocabulary, VOCABULARY_VERSION};

const FIELD_TYPES: &str = include_str!("../../profiles/field-types.txt");

/// Codec slot value for a parameter that was not signalled or was pruned.
pub const CODEC_ABSENT: f64 = -1e9;

/// Value text of a parameter that was not signalled.
pub const ABSENT_TEXT: &str = "absent";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VectorKind {
    SparseBinary,
    TrackTypeAware,
    CodecParams,
}

impl VectorKind {
    pub fn name(self) -> &'static str {
        match self {
            VectorKind::SparseBinary => "sparse-binary",
            VectorKind::TrackTypeAware => "track-type-aware",
            VectorKind::CodecParams => "codec-params",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [VectorKind::SparseBinary, VectorKind::TrackTypeAware, VectorKind::CodecParams]
            .into_iter()
            .find(|k| k.name() == s)
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum FeatureError {
    #[error("cannot fit a vocabulary on an empty corpus")]
    EmptyCorpus,
    #[error("vocabulary is {found}, expected {expected}")]
    VocabularyKindMismatch { expected: &'static str, found: &'static str },
    #[error("bad vocabulary file at line {line}: {reason}")]
    BadVocabulary { line: usize, reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct FeatureVector<F: Scalar> {
    pub kind: VectorKind,
    pub values: Vec<F>,
    /// Paths of numeric fields whose value did not parse and was dropped.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub non_numeric: Vec<String>,
}

impl<F: Scalar> FeatureVector<F> {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Container field labels whose values are measurements.
pub fn numeric_fields() -> &'static HashSet<String> {
    static SET: OnceLock<HashSet<String>> = OnceLock::new();
    SET.get_or_init(|| {
        FIELD_TYPES
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_owned)
            .collect()
    })
}

fn is_numeric(node: &Node) -> bool {
    match node.kind {
        NodeKind::Param => true,
        NodeKind::Field => numeric_fields().contains(&node.label),
        _ => false,
    }
}

/// Numeric reading of a parameter or field value. Flag lists fold into a
/// bitmask, other lists into their sum.
pub fn numeric_value(name: &str, text: &str) -> Option<f64> {
    if let Some(inner) = text.strip_prefix('[').and_then(|t| t.strip_suffix(']')) {
        let items: Vec<i64> = if inner.is_empty() {
            Vec::new()
        } else {
            inner.split(',').map(|s| s.trim().parse()).collect::<Result<_, _>>().ok()?
        };
        return Some(if name.ends_with("_flag") || name.ends_with("_flags") {
            items.iter().enumerate().fold(0.0, |acc, (i, &v)| acc + if v != 0 { (2f64).powi(i as i32) } else { 0.0 })
        } else {
            items.iter().map(|&v| v as f64).sum()
        });
    }
    text.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// One descriptor occurrence: `None` marks presence (a count of one), a
/// value marks a numeric descriptor.
#[derive(Debug, Clone, PartialEq)]
pub struct DocItem {
    pub descriptor: Descriptor,
    pub value: Option<f64>,
}

impl DocItem {
    fn count(kind: DescriptorKind, text: impl Into<String>) -> Self {
        DocItem { descriptor: Descriptor::new(kind, text), value: None }
    }
}

/// A tree reduced to the descriptor occurrences one vector kind reads, in
/// DFS order. Building it once lets a tree be vectorized against many
/// vocabularies cheaply.
#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub kind: VectorKind,
    pub items: Vec<DocItem>,
    /// Paths of numeric attributes whose value would not parse.
    pub non_numeric: Vec<String>,
}

impl Document {
    pub fn new(tree: &MetaTree, kind: VectorKind, scheme: LabelingScheme, scope: Scope) -> Self {
        let t = scope.apply(tree);
        let (items, non_numeric) = match kind {
            VectorKind::SparseBinary => (sparse_items(&t, scheme), Vec::new()),
            VectorKind::TrackTypeAware => tta_items(&t),
            VectorKind::CodecParams => (codec_items(&t), Vec::new()),
        };
        Document { kind, items, non_numeric }
    }

    pub fn for_vocabulary(tree: &MetaTree, vocab: &Vocabulary) -> Self {
        Self::new(tree, vocab.kind(), vocab.scheme(), vocab.scope())
    }

    /// Distinct descriptors, sorted.
    pub fn descriptors(&self) -> Vec<Descriptor> {
        let mut out: Vec<Descriptor> = self.items.iter().map(|i| i.descriptor.clone()).collect();
        out.sort();
        out.dedup();
        out
    }
}

/// Name-only paths for every entry, plus name+value paths for entries that
/// end in a value.
fn sparse_items(tree: &MetaTree, scheme: LabelingScheme) -> Vec<DocItem> {
    let mut out = Vec::new();
    for e in enumerate_paths(tree, scheme) {
        if e.terminal_value.is_some() {
            out.push(DocItem::count(DescriptorKind::PathValue, e.render()));
        }
        out.push(DocItem::count(DescriptorKind::Path, e.labels));
    }
    out
}

/// Every root-to-node path as a count; categorical values as path/value
/// counts; numeric fields and all codec parameters as values.
fn tta_items(tree: &MetaTree) -> (Vec<DocItem>, Vec<String>) {
    let mut items = Vec::new();
    let mut bad = Vec::new();
    visit_node_paths(tree, LabelingScheme::TrackOnly, |path, node| {
        items.push(DocItem::count(DescriptorKind::Count, path));
        let Some(v) = node.value() else { return };
        if v == ABSENT_TEXT {
            items.push(DocItem::count(DescriptorKind::Count, format!("{path}/{ABSENT_TEXT}")));
        } else if is_numeric(node) {
            match numeric_value(&node.label, v) {
                Some(x) => items.push(DocItem { descriptor: Descriptor::new(DescriptorKind::Numeric, path), value: Some(x) }),
                None => bad.push(path.to_owned()),
            }
        } else {
            items.push(DocItem::count(DescriptorKind::Count, format!("{path}/{}", escape_value(v))));
        }
    });
    (items, bad)
}

fn codec_items(tree: &MetaTree) -> Vec<DocItem> {
    codec_descriptors()
        .into_iter()
        .zip(codec_vectorize_tree::<f64>(tree).values)
        .map(|(descriptor, v)| DocItem { descriptor, value: Some(v) })
        .collect()
}

/// The fixed codec slot names: every SPS, PPS and VUI parameter.
pub fn codec_descriptors() -> Vec<Descriptor> {
    [ParamSetKind::Sps, ParamSetKind::Pps, ParamSetKind::Vui]
        .into_iter()
        .flat_map(|k| {
            k.spec().iter().map(move |(name, _)| Descriptor::new(DescriptorKind::Codec, format!("{}/{name}", k.label())))
        })
        .collect()
}

pub fn codec_dimension() -> usize {
    ParamSetKind::Sps.spec().len() + ParamSetKind::Pps.spec().len() + ParamSetKind::Vui.spec().len()
}

fn slot_values<'a>(kind: ParamSetKind, lookup: impl Fn(&str) -> Option<&'a str>) -> impl Iterator<Item = f64> {
    kind.spec().iter().map(move |(name, _)| match lookup(name) {
        None | Some(ABSENT_TEXT) => CODEC_ABSENT,
        Some(text) => numeric_value(name, text).unwrap_or(CODEC_ABSENT),
    })
}

/// All SPS, first-PPS and VUI values in table order; absent parameters and
/// a missing VUI hold [`CODEC_ABSENT`].
pub fn codec_vectorize<F: Scalar>(setting: &EncodingSetting) -> FeatureVector<F> {
    let text = |set: Option<&ParamSet>, name: &str| set.and_then(|s| s.get(name)).map(|v| v.to_string());
    let mut values = Vec::with_capacity(codec_dimension());
    let sets = [
        (ParamSetKind::Sps, Some(&setting.sps.params)),
        (ParamSetKind::Pps, setting.pps.first().map(|p| &p.params)),
        (ParamSetKind::Vui, setting.vui()),
    ];
    for (kind, set) in sets {
        let owned: BTreeMap<&str, Option<String>> = kind.spec().iter().map(|(n, _)| (*n, text(set, n))).collect();
        values.extend(slot_values(kind, |n| owned.get(n).and_then(|v| v.as_deref())));
    }
    FeatureVector { kind: VectorKind::CodecParams, values: values.into_iter().map(F::from_f64_lossy).collect(), non_numeric: Vec::new() }
}

/// The codec vector read back from a tree's codec subtree, so that pruned
/// parameters also read as absent.
pub fn codec_vectorize_tree<F: Scalar>(tree: &MetaTree) -> FeatureVector<F> {
    let codec = tree.codec();
    let set_node = |label: &str| codec.and_then(|c| c.child(label));
    let mut values = Vec::with_capacity(codec_dimension());
    for kind in [ParamSetKind::Sps, ParamSetKind::Pps, ParamSetKind::Vui] {
        let node = set_node(kind.label());
        values.extend(slot_values(kind, |n| node.and_then(|s| s.child(n)).and_then(Node::value)));
    }
    FeatureVector { kind: VectorKind::CodecParams, values: values.into_iter().map(F::from_f64_lossy).collect(), non_numeric: Vec::new() }
}

/// Vector of a document over a vocabulary of the same kind. Presence items
/// set 1 (sparse) or add 1 (track-and-type-aware); for numeric descriptors
/// the first occurrence wins. Descriptors outside the vocabulary are
/// ignored.
pub fn transform<F: Scalar>(doc: &Document, vocab: &Vocabulary) -> Result<FeatureVector<F>, FeatureError> {
    vocab.expect_kind(doc.kind)?;
    let mut values = vec![F::zero(); vocab.len()];
    let mut set = vec![false; vocab.len()];
    for item in &doc.items {
        let Some(i) = vocab.index_of(&item.descriptor) else { continue };
        match (item.value, doc.kind) {
            (None, VectorKind::SparseBinary) => values[i] = F::one(),
            (None, _) => values[i] = values[i] + F::one(),
            (Some(x), _) => {
                if !set[i] {
                    values[i] = F::from_f64_lossy(x);
                    set[i] = true;
                }
            }
        }
    }
    Ok(FeatureVector { kind: doc.kind, values, non_numeric: doc.non_numeric.clone() })
}

/// Binary vector: 1 where a vocabulary descriptor occurs in the tree.
pub fn sparse_vectorize<F: Scalar>(tree: &MetaTree, vocab: &Vocabulary) -> Result<FeatureVector<F>, FeatureError> {
    vocab.expect_kind(VectorKind::SparseBinary)?;
    transform(&Document::for_vocabulary(tree, vocab), vocab)
}

/// Occurrence counts for path and categorical path/value descriptors,
/// values for numeric fields and codec parameters.
pub fn tta_vectorize<F: Scalar>(tree: &MetaTree, vocab: &Vocabulary) -> Result<FeatureVector<F>, FeatureError> {
    vocab.expect_kind(VectorKind::TrackTypeAware)?;
    transform(&Document::for_vocabulary(tree, vocab), vocab)
}

/// Dispatches on the vocabulary kind.
pub fn vectorize<F: Scalar>(tree: &MetaTree, vocab: &Vocabulary) -> FeatureVector<F> {
    transform(&Document::for_vocabulary(tree, vocab), vocab).expect("document built for this vocabulary")
}

/// True when the tree has a codec subtree.
pub fn has_codec(tree: &MetaTree) -> bool {
    tree.root.children.iter().any(|c| c.label == CODEC_LABEL)
}

/// Distinct descriptors of one tree for the given vocabulary kind, scheme
/// and scope, sorted.
pub fn descriptors(tree: &MetaTree, kind: VectorKind, scheme: LabelingScheme, scope: Scope) -> Vec<Descriptor> {
    Document::new(tree, kind, scheme, scope).descriptors()
}
