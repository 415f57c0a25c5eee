//! Level-2 decision trees, the hierarchical model and its evaluation.

mod dt;
mod eval;
mod model;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::features::{transform, Document, FeatureError, LabelingScheme, Scope, VectorKind, Vocabulary};
use crate::metaclass::{signature, Abstraction, MetaclassError, MetaclassId, MetaclassIndex, StructureSignature};
use crate::tree::MetaTree;
use crate::Scalar;

pub use self::dt::{gini, DecisionTree, TreeNode};
pub use self::eval::{
    confusion_matrix, cross_validate, kfold_cv, kfold_cv_vectors, stratified_folds, CvConfig, CvReport, FoldOutcome,
    RunReport,
};
pub use self::model::{ExclusionStamp, ModelFile, MODEL_FORMAT, MODEL_VERSION};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ClassifierError {
    #[error("empty training set")]
    EmptyTrainingSet,
    #[error("feature dimension {found}, expected {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("label sequences differ in length: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("no labels to score")]
    EmptyLabels,
    #[error("class id {0} has no weight")]
    UnknownClass(usize),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("model was trained under exclusion list {model} but {given} was given")]
    ExclusionMismatch { model: String, given: String },
    #[error("model file: {0}")]
    BadModelFile(String),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Metaclass(#[from] MetaclassError),
}

/// `N / (K · n_c)` for each class present in `labels`, with `K` the number
/// of present classes; absent classes get 0.
pub fn balanced_weights<F: Scalar>(labels: &[usize], n_classes: usize) -> Vec<F> {
    let mut counts = vec![0usize; n_classes];
    for &c in labels {
        counts[c] += 1;
    }
    let k = counts.iter().filter(|&&c| c > 0).count();
    let n = F::from_usize_lossy(labels.len());
    counts
        .iter()
        .map(|&c| if c == 0 { F::zero() } else { n / (F::from_usize_lossy(k) * F::from_usize_lossy(c)) })
        .collect()
}

/// Mean per-class recall over the classes that occur in `y_true`.
pub fn balanced_accuracy(y_true: &[usize], y_pred: &[usize]) -> Result<f64, ClassifierError> {
    if y_true.len() != y_pred.len() {
        return Err(ClassifierError::LengthMismatch(y_true.len(), y_pred.len()));
    }
    if y_true.is_empty() {
        return Err(ClassifierError::EmptyLabels);
    }
    let mut per: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    for (&t, &p) in y_true.iter().zip(y_pred) {
        let e = per.entry(t).or_default();
        e.1 += 1;
        if t == p {
            e.0 += 1;
        }
    }
    Ok(per.values().map(|&(hit, n)| hit as f64 / n as f64).sum::<f64>() / per.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Representation {
    /// Metaclass index, then a track-and-type-aware tree per metaclass.
    Hierarchical,
    /// Track-and-type-aware over container and codec.
    Flat,
    /// Sparse path vectors over container and codec.
    Sparse,
    /// Track-and-type-aware over the container only.
    Tta,
    /// Codec parameter slots only.
    Codec,
}

impl Representation {
    pub const ALL: [Representation; 5] = [
        Representation::Hierarchical,
        Representation::Flat,
        Representation::Sparse,
        Representation::Tta,
        Representation::Codec,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Representation::Hierarchical => "hierarchical",
            Representation::Flat => "flat",
            Representation::Sparse => "sparse",
            Representation::Tta => "tta",
            Representation::Codec => "codec",
        }
    }

    /// Vector setup of the flat model; the hierarchical model uses the flat
    /// setup for its per-metaclass trees and its fallback.
    pub fn setup(self) -> VectorSetup {
        let (kind, scheme, scope) = match self {
            Representation::Hierarchical | Representation::Flat => {
                (VectorKind::TrackTypeAware, LabelingScheme::TrackOnly, Scope::All)
            }
            Representation::Sparse => (VectorKind::SparseBinary, LabelingScheme::Plain, Scope::All),
            Representation::Tta => (VectorKind::TrackTypeAware, LabelingScheme::TrackOnly, Scope::Container),
            Representation::Codec => (VectorKind::CodecParams, LabelingScheme::Plain, Scope::All),
        };
        VectorSetup { kind, scheme, scope }
    }
}

impl FromStr for Representation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL.into_iter().find(|r| r.name() == s).ok_or_else(|| format!("unknown representation {s:?}"))
    }
}

impl fmt::Display for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VectorSetup {
    pub kind: VectorKind,
    pub scheme: LabelingScheme,
    pub scope: Scope,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrainConfig {
    pub representation: Representation,
    pub level1: Abstraction,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig { representation: Representation::Hierarchical, level1: Abstraction::Hash }
    }
}

impl TrainConfig {
    pub fn prepare(&self, tree: &MetaTree) -> Prepared {
        let setup = self.representation.setup();
        Prepared {
            doc: Document::new(tree, setup.kind, setup.scheme, setup.scope),
            signature: (self.representation == Representation::Hierarchical).then(|| signature(tree, self.level1)),
        }
    }
}

/// A tree reduced to what training and prediction read, so cross-validation
/// featurizes each file once.
#[derive(Debug, Clone, PartialEq)]
pub struct Prepared {
    pub doc: Document,
    /// Present for the hierarchical representation.
    pub signature: Option<StructureSignature>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub enum Predictor<F: Scalar> {
    /// Training data held a single class.
    Constant(usize),
    Tree(DecisionTree<F>),
}

impl<F: Scalar> Predictor<F> {
    /// Constant when every label agrees, otherwise a decision tree.
    pub fn fit(x: &[Vec<F>], y: &[usize], class_weight: &[F]) -> Result<Self, ClassifierError> {
        match y.first() {
            None => Err(ClassifierError::EmptyTrainingSet),
            Some(&c) if y.iter().all(|&l| l == c) => Ok(Predictor::Constant(c)),
            Some(_) => Ok(Predictor::Tree(DecisionTree::fit(x, y, class_weight)?)),
        }
    }

    pub fn predict(&self, x: &[F]) -> Result<usize, ClassifierError> {
        match self {
            Predictor::Constant(c) => Ok(*c),
            Predictor::Tree(t) => t.predict(x),
        }
    }
}

/// A vocabulary and the predictor trained on its vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct FlatModel<F: Scalar> {
    pub vocabulary: Vocabulary,
    pub predictor: Predictor<F>,
}

impl<F: Scalar> FlatModel<F> {
    pub fn train(
        trees: &[&MetaTree],
        labels: &[usize],
        class_weight: &[F],
        setup: VectorSetup,
    ) -> Result<Self, ClassifierError> {
        let docs: Vec<Document> =
            trees.par_iter().map(|t| Document::new(t, setup.kind, setup.scheme, setup.scope)).collect();
        let refs: Vec<&Document> = docs.iter().collect();
        Self::train_documents(&refs, labels, class_weight, setup)
    }

    /// Documents must have been built under `setup`.
    pub fn train_documents(
        docs: &[&Document],
        labels: &[usize],
        class_weight: &[F],
        setup: VectorSetup,
    ) -> Result<Self, ClassifierError> {
        let vocabulary = Vocabulary::fit_documents(setup.kind, setup.scheme, setup.scope, docs.iter().copied())?;
        let x = docs
            .par_iter()
            .map(|d| transform::<F>(d, &vocabulary).map(|v| v.values))
            .collect::<Result<Vec<_>, _>>()?;
        let predictor = Predictor::fit(&x, labels, class_weight)?;
        Ok(FlatModel { vocabulary, predictor })
    }

    pub fn predict(&self, tree: &MetaTree) -> usize {
        self.predict_document(&Document::for_vocabulary(tree, &self.vocabulary))
            .expect("document built from the model's own vocabulary")
    }

    pub fn predict_document(&self, doc: &Document) -> Result<usize, ClassifierError> {
        let x = transform::<F>(doc, &self.vocabulary)?;
        self.predictor.predict(&x.values)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct HierarchicalModel<F: Scalar> {
    pub index: MetaclassIndex,
    pub per_metaclass: BTreeMap<u32, FlatModel<F>>,
    /// Training classes seen in each metaclass.
    pub metaclass_classes: BTreeMap<u32, Vec<usize>>,
    pub fallback: FlatModel<F>,
}

impl<F: Scalar> HierarchicalModel<F> {
    /// Class weights come from the whole training set and are shared by
    /// every per-metaclass tree.
    pub fn train(
        trees: &[&MetaTree],
        labels: &[usize],
        n_classes: usize,
        level1: Abstraction,
    ) -> Result<Self, ClassifierError> {
        let cfg = TrainConfig { representation: Representation::Hierarchical, level1 };
        let prepared: Vec<Prepared> = trees.par_iter().map(|t| cfg.prepare(t)).collect();
        let refs: Vec<&Prepared> = prepared.iter().collect();
        Self::train_prepared(&refs, labels, n_classes, level1)
    }

    pub fn train_prepared(
        items: &[&Prepared],
        labels: &[usize],
        n_classes: usize,
        level1: Abstraction,
    ) -> Result<Self, ClassifierError> {
        if items.is_empty() {
            return Err(ClassifierError::EmptyTrainingSet);
        }
        if items.len() != labels.len() {
            return Err(ClassifierError::LengthMismatch(items.len(), labels.len()));
        }
        let sigs: Vec<StructureSignature> = items
            .iter()
            .map(|p| p.signature.clone().ok_or_else(|| ClassifierError::InsufficientData("missing signature".into())))
            .collect::<Result<_, _>>()?;
        let weights = balanced_weights::<F>(labels, n_classes);
        let setup = Representation::Hierarchical.setup();
        let index = MetaclassIndex::fit_signatures(&sigs, level1)?;
        let mut groups: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
        for (i, s) in sigs.iter().enumerate() {
            if let MetaclassId::Known(m) = index.lookup(s) {
                groups.entry(m).or_default().push(i);
            }
        }
        let per_metaclass = groups
            .par_iter()
            .map(|(&m, members)| {
                let ds: Vec<&Document> = members.iter().map(|&i| &items[i].doc).collect();
                let ys: Vec<usize> = members.iter().map(|&i| labels[i]).collect();
                FlatModel::train_documents(&ds, &ys, &weights, setup).map(|fm| (m, fm))
            })
            .collect::<Result<BTreeMap<_, _>, _>>()?;
        let metaclass_classes = groups
            .iter()
            .map(|(&m, members)| {
                let mut cs: Vec<usize> = members.iter().map(|&i| labels[i]).collect();
                cs.sort_unstable();
                cs.dedup();
                (m, cs)
            })
            .collect();
        let all: Vec<&Document> = items.iter().map(|p| &p.doc).collect();
        let fallback = FlatModel::train_documents(&all, labels, &weights, setup)?;
        Ok(HierarchicalModel { index, per_metaclass, metaclass_classes, fallback })
    }

    pub fn predict(&self, tree: &MetaTree) -> Prediction {
        let cfg = TrainConfig { representation: Representation::Hierarchical, level1: self.index.abstraction };
        self.predict_prepared(&cfg.prepare(tree)).expect("prepared under the model's own setup")
    }

    pub fn predict_prepared(&self, item: &Prepared) -> Result<Prediction, ClassifierError> {
        let metaclass = item.signature.as_ref().map_or(MetaclassId::Unknown, |s| self.index.lookup(s));
        let (model, fallback) = match metaclass {
            MetaclassId::Known(m) => match self.per_metaclass.get(&m) {
                Some(fm) => (fm, false),
                None => (&self.fallback, true),
            },
            MetaclassId::Unknown => (&self.fallback, true),
        };
        Ok(Prediction { class: model.predict_document(&item.doc)?, metaclass, fallback })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prediction {
    pub class: usize,
    /// Always `Unknown` for flat models.
    pub metaclass: MetaclassId,
    /// True when the flat fallback produced the class.
    pub fallback: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub enum Model<F: Scalar> {
    Hierarchical(HierarchicalModel<F>),
    Flat(FlatModel<F>),
}

impl<F: Scalar> Model<F> {
    pub fn train(
        trees: &[&MetaTree],
        labels: &[usize],
        n_classes: usize,
        cfg: TrainConfig,
    ) -> Result<Self, ClassifierError> {
        let prepared: Vec<Prepared> = trees.par_iter().map(|t| cfg.prepare(t)).collect();
        let refs: Vec<&Prepared> = prepared.iter().collect();
        Self::train_prepared(&refs, labels, n_classes, cfg)
    }

    /// Items must come from `cfg.prepare`.
    pub fn train_prepared(
        items: &[&Prepared],
        labels: &[usize],
        n_classes: usize,
        cfg: TrainConfig,
    ) -> Result<Self, ClassifierError> {
        if items.is_empty() {
            return Err(ClassifierError::EmptyTrainingSet);
        }
        if cfg.representation == Representation::Hierarchical {
            return Ok(Model::Hierarchical(HierarchicalModel::train_prepared(items, labels, n_classes, cfg.level1)?));
        }
        let weights = balanced_weights::<F>(labels, n_classes);
        let docs: Vec<&Document> = items.iter().map(|p| &p.doc).collect();
        Ok(Model::Flat(FlatModel::train_documents(&docs, labels, &weights, cfg.representation.setup())?))
    }

    pub fn predict(&self, tree: &MetaTree) -> Prediction {
        match self {
            Model::Hierarchical(h) => h.predict(tree),
            Model::Flat(f) => Prediction { class: f.predict(tree), metaclass: MetaclassId::Unknown, fallback: false },
        }
    }

    pub fn predict_prepared(&self, item: &Prepared) -> Result<Prediction, ClassifierError> {
        match self {
            Model::Hierarchical(h) => h.predict_prepared(item),
            Model::Flat(f) => {
                Ok(Prediction { class: f.predict_document(&item.doc)?, metaclass: MetaclassId::Unknown, fallback: false })
            }
        }
    }

    pub fn metaclass_count(&self) -> Option<usize> {
        match self {
            Model::Hierarchical(h) => Some(h.index.len()),
            Model::Flat(_) => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights() {
        assert_eq!(balanced_weights::<f64>(&[0; 10].iter().chain(&[1; 10]).copied().collect::<Vec<_>>(), 2), [1.0, 1.0]);
        let mut y = vec![0; 30];
        y.extend([1; 10]);
        let w = balanced_weights::<f64>(&y, 2);
        assert!((w[0] - 40.0 / 60.0).abs() < 1e-12 && w[1] == 2.0);
        assert_eq!(balanced_weights::<f64>(&[2, 2], 3), [0.0, 0.0, 1.0]);
    }

    #[test]
    fn accuracy() {
        let mut t = vec![0; 10];
        t.extend([1; 10]);
        let mut p = vec![0; 10];
        p.extend([1, 1, 1, 1, 1, 0, 0, 0, 0, 0]);
        assert_eq!(balanced_accuracy(&t, &p).unwrap(), 0.75);
        assert_eq!(balanced_accuracy(&t, &t).unwrap(), 1.0);
        let wrong: Vec<usize> = t.iter().map(|c| 1 - c).collect();
        assert_eq!(balanced_accuracy(&t, &wrong).unwrap(), 0.0);
        assert_eq!(balanced_accuracy(&t, &p[1..]), Err(ClassifierError::LengthMismatch(20, 19)));
    }

    #[test]
    fn representation_names() {
        for r in Representation::ALL {
            assert_eq!(r.name().parse::<Representation>().unwrap(), r);
        }
    }
}
