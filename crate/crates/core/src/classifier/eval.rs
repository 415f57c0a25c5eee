use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{balanced_accuracy, balanced_weights, ClassifierError, Model, Predictor, Prepared, TrainConfig};
use crate::metaclass::MetaclassId;
use crate::tree::MetaTree;
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CvConfig {
    pub k: usize,
    pub runs: usize,
    pub seed: u64,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig { k: 5, runs: 10, seed: 0 }
    }
}

/// Predictions for one held-out fold plus level-1 statistics when the model
/// has metaclasses.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FoldOutcome {
    pub predictions: Vec<usize>,
    pub metaclasses: Option<usize>,
    pub unknown: usize,
    /// Test files placed in a known metaclass that held no training file of
    /// their class.
    pub misassigned: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub run: usize,
    pub balanced_accuracy: f64,
    /// Mean metaclass count over the run's folds.
    pub metaclasses: Option<f64>,
    pub pct_unknown: f64,
    pub pct_misassigned: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub k: usize,
    pub runs: usize,
    pub seed: u64,
    pub class_names: Vec<String>,
    pub per_run: Vec<RunReport>,
    pub mean: f64,
    /// Sample standard deviation over runs; 0 for a single run.
    pub std: f64,
    /// Rows are true classes, columns predicted classes, summed over runs.
    pub confusion: Vec<Vec<u64>>,
    pub warnings: Vec<String>,
}

impl CvReport {
    pub fn table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{}-fold cross-validation, {} runs, seed {}", self.k, self.runs, self.seed);
        let _ = writeln!(s, "{:>4}  {:>9}  {:>11}  {:>9}  {:>12}", "run", "bal.acc", "metaclasses", "unknown%", "misassigned%");
        for r in &self.per_run {
            let m = r.metaclasses.map_or("-".to_owned(), |m| format!("{m:.1}"));
            let _ = writeln!(
                s,
                "{:>4}  {:>9.4}  {:>11}  {:>9.2}  {:>12.2}",
                r.run, r.balanced_accuracy, m, r.pct_unknown, r.pct_misassigned
            );
        }
        let _ = writeln!(s, "mean balanced accuracy {:.4} (std {:.4})", self.mean, self.std);
        for w in &self.warnings {
            let _ = writeln!(s, "warning: {w}");
        }
        s
    }

    /// Confusion matrix as CSV with class names on both axes.
    pub fn confusion_csv(&self) -> String {
        let esc = |n: &str| {
            if n.contains([',', '"', '\n']) {
                format!("\"{}\"", n.replace('"', "\"\""))
            } else {
                n.to_owned()
            }
        };
        let mut s = String::from("true\\predicted");
        for n in &self.class_names {
            s.push(',');
            s.push_str(&esc(n));
        }
        s.push('\n');
        for (n, row) in self.class_names.iter().zip(&self.confusion) {
            s.push_str(&esc(n));
            for v in row {
                let _ = write!(s, ",{v}");
            }
            s.push('\n');
        }
        s
    }
}

pub fn confusion_matrix(y_true: &[usize], y_pred: &[usize], n_classes: usize) -> Vec<Vec<u64>> {
    let mut m = vec![vec![0u64; n_classes]; n_classes];
    for (&t, &p) in y_true.iter().zip(y_pred) {
        m[t][p] += 1;
    }
    m
}

/// Fold number per sample. Each class is shuffled on its own and dealt
/// round-robin, continuing where the previous class stopped.
pub fn stratified_folds(labels: &[usize], n_classes: usize, k: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fold = vec![0; labels.len()];
    let mut next = 0;
    for c in 0..n_classes {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == c).collect();
        members.shuffle(&mut rng);
        for &i in &members {
            fold[i] = next;
            next = (next + 1) % k;
        }
    }
    fold
}

fn run_seed(seed: u64, run: usize) -> u64 {
    seed.wrapping_add((run as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Repeated stratified k-fold driver. `fit_predict` gets the training and
/// test indices of one fold and returns predictions for the test indices.
pub fn cross_validate<P>(
    labels: &[usize],
    class_names: &[String],
    cfg: CvConfig,
    fit_predict: P,
) -> Result<CvReport, ClassifierError>
where
    P: Fn(&[usize], &[usize]) -> Result<FoldOutcome, ClassifierError> + Sync,
{
    let n_classes = class_names.len();
    if cfg.k < 2 || cfg.runs == 0 {
        return Err(ClassifierError::InsufficientData(format!("need k >= 2 and runs >= 1, got k={} runs={}", cfg.k, cfg.runs)));
    }
    if labels.len() < cfg.k {
        return Err(ClassifierError::InsufficientData(format!("{} samples for {} folds", labels.len(), cfg.k)));
    }
    if let Some(&c) = labels.iter().find(|&&c| c >= n_classes) {
        return Err(ClassifierError::UnknownClass(c));
    }
    let mut warnings = Vec::new();
    for (c, name) in class_names.iter().enumerate() {
        let n = labels.iter().filter(|&&l| l == c).count();
        if n > 0 && n < cfg.k {
            let w = format!("class {name:?} has {n} samples, fewer than {} folds", cfg.k);
            log::warn!("{w}");
            warnings.push(w);
        }
    }
    let folds: Vec<Vec<usize>> = (0..cfg.runs).map(|r| stratified_folds(labels, n_classes, cfg.k, run_seed(cfg.seed, r))).collect();
    let jobs: Vec<(usize, usize)> = (0..cfg.runs).flat_map(|r| (0..cfg.k).map(move |f| (r, f))).collect();
    let outcomes: Vec<(usize, Vec<usize>, FoldOutcome)> = jobs
        .par_iter()
        .map(|&(r, f)| {
            let (test, train): (Vec<usize>, Vec<usize>) = (0..labels.len()).partition(|&i| folds[r][i] == f);
            if test.is_empty() {
                return Ok((r, test, FoldOutcome::default()));
            }
            let out = fit_predict(&train, &test)?;
            Ok((r, test, out))
        })
        .collect::<Result<_, ClassifierError>>()?;

    let mut confusion = vec![vec![0u64; n_classes]; n_classes];
    let mut per_run = Vec::with_capacity(cfg.runs);
    for r in 0..cfg.runs {
        let mut pred = vec![usize::MAX; labels.len()];
        let (mut unknown, mut mis, mut mcount, mut mfolds) = (0usize, 0usize, 0usize, 0usize);
        for (_, test, out) in outcomes.iter().filter(|o| o.0 == r) {
            for (&i, &p) in test.iter().zip(&out.predictions) {
                pred[i] = p;
            }
            unknown += out.unknown;
            mis += out.misassigned;
            if let Some(m) = out.metaclasses {
                mcount += m;
                mfolds += 1;
            }
        }
        for (&t, &p) in labels.iter().zip(&pred) {
            confusion[t][p] += 1;
        }
        let n = labels.len() as f64;
        per_run.push(RunReport {
            run: r,
            balanced_accuracy: balanced_accuracy(labels, &pred)?,
            metaclasses: (mfolds > 0).then(|| mcount as f64 / mfolds as f64),
            pct_unknown: 100.0 * unknown as f64 / n,
            pct_misassigned: 100.0 * mis as f64 / n,
        });
    }
    let accs: Vec<f64> = per_run.iter().map(|r| r.balanced_accuracy).collect();
    let mean = accs.iter().sum::<f64>() / accs.len() as f64;
    let std = if accs.len() > 1 {
        (accs.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (accs.len() - 1) as f64).sqrt()
    } else {
        0.0
    };
    Ok(CvReport {
        k: cfg.k,
        runs: cfg.runs,
        seed: cfg.seed,
        class_names: class_names.to_vec(),
        per_run,
        mean,
        std,
        confusion,
        warnings,
    })
}

/// Cross-validates a tree model; trees are expected already pruned.
pub fn kfold_cv<F: Scalar>(
    trees: &[MetaTree],
    labels: &[usize],
    class_names: &[String],
    train: TrainConfig,
    cfg: CvConfig,
) -> Result<CvReport, ClassifierError> {
    if trees.len() != labels.len() {
        return Err(ClassifierError::LengthMismatch(trees.len(), labels.len()));
    }
    let n_classes = class_names.len();
    let prepared: Vec<Prepared> = trees.par_iter().map(|t| train.prepare(t)).collect();
    cross_validate(labels, class_names, cfg, |tr, te| {
        let ps: Vec<&Prepared> = tr.iter().map(|&i| &prepared[i]).collect();
        let ys: Vec<usize> = tr.iter().map(|&i| labels[i]).collect();
        let model = Model::<F>::train_prepared(&ps, &ys, n_classes, train)?;
        let mut out = FoldOutcome { metaclasses: model.metaclass_count(), ..FoldOutcome::default() };
        for &i in te {
            let p = model.predict_prepared(&prepared[i])?;
            out.predictions.push(p.class);
            if let Model::Hierarchical(h) = &model {
                match p.metaclass {
                    MetaclassId::Unknown => out.unknown += 1,
                    MetaclassId::Known(m) => {
                        if !h.metaclass_classes.get(&m).is_some_and(|cs| cs.contains(&labels[i])) {
                            out.misassigned += 1;
                        }
                    }
                }
            }
        }
        Ok(out)
    })
}

/// Cross-validates a decision tree on ready-made vectors.
pub fn kfold_cv_vectors<F: Scalar>(
    x: &[Vec<F>],
    labels: &[usize],
    class_names: &[String],
    cfg: CvConfig,
) -> Result<CvReport, ClassifierError> {
    if x.len() != labels.len() {
        return Err(ClassifierError::LengthMismatch(x.len(), labels.len()));
    }
    cross_validate(labels, class_names, cfg, |tr, te| {
        let xs: Vec<Vec<F>> = tr.iter().map(|&i| x[i].clone()).collect();
        let ys: Vec<usize> = tr.iter().map(|&i| labels[i]).collect();
        let w = balanced_weights::<F>(&ys, class_names.len());
        let p = Predictor::fit(&xs, &ys, &w)?;
        let predictions = te.iter().map(|&i| p.predict(&x[i])).collect::<Result<_, _>>()?;
        Ok(FoldOutcome { predictions, ..FoldOutcome::default() })
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(k: usize) -> Vec<String> {
        (0..k).map(|i| format!("c{i}")).collect()
    }

    #[test]
    fn folds_are_stratified() {
        let labels: Vec<usize> = (0..40).map(|i| i % 4).collect();
        let f = stratified_folds(&labels, 4, 5, 7);
        for fold in 0..5 {
            for c in 0..4 {
                let n = (0..40).filter(|&i| f[i] == fold && labels[i] == c).count();
                assert_eq!(n, 2);
            }
        }
        assert_eq!(f, stratified_folds(&labels, 4, 5, 7));
    }

    #[test]
    fn separable_vectors() {
        let labels: Vec<usize> = (0..30).map(|i| i % 3).collect();
        let x: Vec<Vec<f64>> = labels.iter().map(|&c| vec![c as f64 * 10.0, 1.0]).collect();
        let r = kfold_cv_vectors(&x, &labels, &names(3), CvConfig { k: 5, runs: 3, seed: 1 }).unwrap();
        assert_eq!(r.mean, 1.0);
        assert_eq!(r.std, 0.0);
        assert_eq!(r.confusion[1][1], 30);
        assert_eq!(r, kfold_cv_vectors(&x, &labels, &names(3), CvConfig { k: 5, runs: 3, seed: 1 }).unwrap());
    }

    #[test]
    fn small_class_warns() {
        let labels = vec![0, 0, 0, 0, 0, 1, 1];
        let x: Vec<Vec<f64>> = labels.iter().map(|&c| vec![c as f64]).collect();
        let r = kfold_cv_vectors(&x, &labels, &names(2), CvConfig { k: 5, runs: 1, seed: 0 }).unwrap();
        assert_eq!(r.warnings.len(), 1);
    }

    #[test]
    fn csv_export() {
        let r = kfold_cv_vectors(&[vec![0.0f64], vec![1.0]], &[0, 1], &["a,b".into(), "c".into()], CvConfig { k: 2, runs: 1, seed: 0 })
            .unwrap();
        assert!(r.confusion_csv().starts_with("true\\predicted,\"a,b\",c\n"));
    }
}
