use std::borrow::Cow;
use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Document, FeatureError, LabelingScheme, VectorKind};
use crate::tree::{MetaTree, NodeKind};

pub const VOCABULARY_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DescriptorKind {
    /// Labels only.
    Path,
    /// Labels followed by the terminal value.
    PathValue,
    /// Occurrence count of a root-to-node path or a categorical path/value.
    Count,
    /// Value of a numeric field or codec parameter.
    Numeric,
    /// Fixed codec parameter slot.
    Codec,
}

impl DescriptorKind {
    pub fn name(self) -> &'static str {
        match self {
            DescriptorKind::Path => "path",
            DescriptorKind::PathValue => "path-value",
            DescriptorKind::Count => "count",
            DescriptorKind::Numeric => "numeric",
            DescriptorKind::Codec => "codec",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            DescriptorKind::Path,
            DescriptorKind::PathValue,
            DescriptorKind::Count,
            DescriptorKind::Numeric,
            DescriptorKind::Codec,
        ]
        .into_iter()
        .find(|k| k.name() == s)
    }
}

/// Ordered by text first, so vocabularies are lexicographic.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Descriptor {
    pub text: String,
    pub kind: DescriptorKind,
}

impl Descriptor {
    pub fn new(kind: DescriptorKind, text: impl Into<String>) -> Self {
        Descriptor { text: text.into(), kind }
    }
}

impl fmt::Display for Descriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}\t{}", self.kind.name(), self.text)
    }
}

/// Which top-level subtrees of the file tree a vocabulary looks at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scope {
    All,
    Container,
    Codec,
}

impl Scope {
    pub fn name(self) -> &'static str {
        match self {
            Scope::All => "all",
            Scope::Container => "container",
            Scope::Codec => "codec",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [Scope::All, Scope::Container, Scope::Codec].into_iter().find(|k| k.name() == s)
    }

    pub fn apply(self, tree: &MetaTree) -> Cow<'_, MetaTree> {
        match self {
            Scope::All => Cow::Borrowed(tree),
            Scope::Container => Cow::Owned(tree.only(NodeKind::Container)),
            Scope::Codec => Cow::Owned(tree.only(NodeKind::Codec)),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct VocabularyData {
    version: u32,
    kind: VectorKind,
    scheme: LabelingScheme,
    scope: Scope,
    entries: Vec<Descriptor>,
}

/// Frozen descriptor → dimension map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "VocabularyData", into = "VocabularyData")]
pub struct Vocabulary {
    kind: VectorKind,
    scheme: LabelingScheme,
    scope: Scope,
    entries: Vec<Descriptor>,
    index: HashMap<Descriptor, usize>,
}

impl From<VocabularyData> for Vocabulary {
    fn from(d: VocabularyData) -> Self {
        Vocabulary::from_entries(d.kind, d.scheme, d.scope, d.entries)
    }
}

impl From<Vocabulary> for VocabularyData {
    fn from(v: Vocabulary) -> Self {
        VocabularyData { version: VOCABULARY_VERSION, kind: v.kind, scheme: v.scheme, scope: v.scope, entries: v.entries }
    }
}

/// One dimension per distinct descriptor, lexicographically ordered.
pub fn fit_vocabulary<I, D>(corpus: I, kind: VectorKind, scheme: LabelingScheme) -> Result<Vocabulary, FeatureError>
where
    I: IntoIterator<Item = D>,
    D: IntoIterator<Item = Descriptor>,
{
    let mut seen = false;
    let mut set = BTreeSet::new();
    for doc in corpus {
        seen = true;
        set.extend(doc);
    }
    if !seen {
        return Err(FeatureError::EmptyCorpus);
    }
    Ok(Vocabulary::from_entries(kind, scheme, Scope::All, set.into_iter().collect()))
}

impl Vocabulary {
    fn from_entries(kind: VectorKind, scheme: LabelingScheme, scope: Scope, entries: Vec<Descriptor>) -> Self {
        let index = entries.iter().enumerate().map(|(i, d)| (d.clone(), i)).collect();
        Vocabulary { kind, scheme, scope, entries, index }
    }

    /// Fits on the descriptors of the given trees. The codec kind has a
    /// fixed layout and ignores the corpus beyond requiring one tree.
    pub fn fit<'a, I>(kind: VectorKind, scheme: LabelingScheme, scope: Scope, trees: I) -> Result<Self, FeatureError>
    where
        I: IntoIterator<Item = &'a MetaTree>,
    {
        let docs: Vec<Document> = trees.into_iter().map(|t| Document::new(t, kind, scheme, scope)).collect();
        Self::fit_documents(kind, scheme, scope, &docs)
    }

    /// Fits on documents built with the same kind, scheme and scope.
    pub fn fit_documents<'a, I>(kind: VectorKind, scheme: LabelingScheme, scope: Scope, docs: I) -> Result<Self, FeatureError>
    where
        I: IntoIterator<Item = &'a Document>,
    {
        let mut seen = false;
        let mut set: HashSet<&Descriptor> = HashSet::new();
        for d in docs {
            seen = true;
            if d.kind != kind {
                return Err(FeatureError::VocabularyKindMismatch { expected: kind.name(), found: d.kind.name() });
            }
            if kind != VectorKind::CodecParams {
                set.extend(d.items.iter().map(|i| &i.descriptor));
            }
        }
        if !seen {
            return Err(FeatureError::EmptyCorpus);
        }
        let entries = if kind == VectorKind::CodecParams {
            super::codec_descriptors()
        } else {
            let mut e: Vec<Descriptor> = set.into_iter().cloned().collect();
            e.sort();
            e
        };
        Ok(Self::from_entries(kind, scheme, scope, entries))
    }

    pub fn kind(&self) -> VectorKind {
        self.kind
    }

    pub fn scheme(&self) -> LabelingScheme {
        self.scheme
    }

    pub fn scope(&self) -> Scope {
        self.scope
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn descriptors(&self) -> &[Descriptor] {
        &self.entries
    }

    pub fn index_of(&self, d: &Descriptor) -> Option<usize> {
        self.index.get(d).copied()
    }

    pub(super) fn expect_kind(&self, expected: VectorKind) -> Result<(), FeatureError> {
        if self.kind == expected {
            Ok(())
        } else {
            Err(FeatureError::VocabularyKindMismatch { expected: expected.name(), found: self.kind.name() })
        }
    }

    /// Header line with the metadata, then `index<TAB>kind<TAB>descriptor`
    /// per dimension.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "# vocabulary version={} kind={} scheme={} scope={}\n",
            VOCABULARY_VERSION,
            self.kind.name(),
            self.scheme.name(),
            self.scope.name()
        );
        for (i, d) in self.entries.iter().enumerate() {
            out.push_str(&format!("{i}\t{d}\n"));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, FeatureError> {
        let bad = |line: usize, reason: &str| FeatureError::BadVocabulary { line, reason: reason.to_owned() };
        let mut lines = text.lines();
        let header = lines.next().and_then(|h| h.strip_prefix("# vocabulary ")).ok_or_else(|| bad(1, "missing header"))?;
        let meta: HashMap<&str, &str> = header.split_whitespace().filter_map(|kv| kv.split_once('=')).collect();
        if meta.get("version") != Some(&VOCABULARY_VERSION.to_string().as_str()) {
            return Err(bad(1, "unsupported version"));
        }
        let kind = meta.get("kind").and_then(|k| VectorKind::parse(k)).ok_or_else(|| bad(1, "bad kind"))?;
        let scheme = meta.get("scheme").and_then(|s| s.parse().ok()).ok_or_else(|| bad(1, "bad scheme"))?;
        let scope = meta.get("scope").and_then(|s| Scope::parse(s)).ok_or_else(|| bad(1, "bad scope"))?;
        let mut entries = Vec::new();
        for (n, line) in lines.enumerate() {
            let lineno = n + 2;
            let mut parts = line.splitn(3, '\t');
            let (Some(i), Some(k), Some(t)) = (parts.next(), parts.next(), parts.next()) else {
                return Err(bad(lineno, "expected three tab-separated columns"));
            };
            if i.parse::<usize>().ok() != Some(entries.len()) {
                return Err(bad(lineno, "indices must be dense and ascending"));
            }
            let k = DescriptorKind::parse(k).ok_or_else(|| bad(lineno, "unknown descriptor kind"))?;
            entries.push(Descriptor::new(k, t));
        }
        Ok(Self::from_entries(kind, scheme, scope, entries))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(t: &str) -> Descriptor {
        Descriptor::new(DescriptorKind::Path, t)
    }

    #[test]
    fn dense_sorted_dedup() {
        let corpus = vec![vec![d("b"), d("a")], vec![d("c"), d("a")]];
        let v = fit_vocabulary(corpus.clone(), VectorKind::SparseBinary, LabelingScheme::Plain).unwrap();
        assert_eq!(v.len(), 3);
        assert_eq!(v.index_of(&d("a")), Some(0));
        assert_eq!(v.index_of(&d("c")), Some(2));
        assert_eq!(v, fit_vocabulary(corpus, VectorKind::SparseBinary, LabelingScheme::Plain).unwrap());
    }

    #[test]
    fn empty_corpus() {
        let none: Vec<Vec<Descriptor>> = Vec::new();
        assert_eq!(
            fit_vocabulary(none, VectorKind::SparseBinary, LabelingScheme::Plain),
            Err(FeatureError::EmptyCorpus)
        );
    }

    #[test]
    fn text_and_json_round_trip() {
        let corpus = vec![vec![d("x/y"), Descriptor::new(DescriptorKind::PathValue, "x/y/1 2")]];
        let v = fit_vocabulary(corpus, VectorKind::SparseBinary, LabelingScheme::GlobalOrder).unwrap();
        let text = v.to_text();
        assert!(text.lines().nth(1).unwrap().starts_with("0\tpath\t"));
        assert_eq!(Vocabulary::from_text(&text).unwrap(), v);
        let json = serde_json::to_string(&v).unwrap();
        assert_eq!(serde_json::from_str::<Vocabulary>(&json).unwrap(), v);
    }
}
