use serde::{Deserialize, Serialize};

use super::classifier::{train_predict, ClassifierKind, Depth, Hyper};
use super::derive_seed;
use super::folds::{split, stratified_kfold};
use super::metrics::{metrics, Metrics};
use super::scaler::Standardizer;
use crate::error::{Error, Result};
use crate::exec::Parallelism;
use crate::io::fmt_f64;

/// Feature matrix with integer class labels.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Dataset {
    pub x: Vec<Vec<f64>>,
    pub y: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CvOptions {
    pub folds: usize,
    pub seed: u64,
    pub depth: Depth,
    pub classifiers: Vec<ClassifierKind>,
    /// Configuration label recorded in the reports, e.g. the patch configuration.
    pub config: Option<String>,
    pub par: Parallelism,
}

impl Default for CvOptions {
    fn default() -> Self {
        CvOptions {
            folds: 5,
            seed: 0,
            depth: Depth::Shallow,
            classifiers: ClassifierKind::ALL.to_vec(),
            config: None,
            par: Parallelism::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub hyper: Hyper,
    pub metrics: Metrics,
}

/// Cross-validated performance of one classifier.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub classifier: ClassifierKind,
    pub config: Option<String>,
    pub depth: Depth,
    pub seed: u64,
    /// Original label of each class index.
    pub classes: Vec<usize>,
    /// Test fold of each sample.
    pub fold_of: Vec<usize>,
    pub folds: Vec<FoldResult>,
    pub mean: Metrics,
    /// Population standard deviation across folds.
    pub std: Metrics,
}

fn summarize(folds: &[FoldResult]) -> (Metrics, Metrics) {
    let n = folds.len() as f64;
    let mut mean = [0.0; 5];
    for f in folds {
        for (m, v) in mean.iter_mut().zip(f.metrics.to_array()) {
            *m += v / n;
        }
    }
    let mut var = [0.0; 5];
    for f in folds {
        for ((s, v), m) in var.iter_mut().zip(f.metrics.to_array()).zip(mean) {
            *s += (v - m) * (v - m) / n;
        }
    }
    (
        Metrics::from_array(mean),
        Metrics::from_array(var.map(f64::sqrt)),
    )
}

/// Stratified k-fold CV of each requested classifier; features are
/// z-scored on each training split.
pub fn cross_validate(data: &Dataset, opts: &CvOptions) -> Result<Vec<CvReport>> {
    if data.x.len() != data.y.len() || data.x.is_empty() {
        return Err(Error::InvalidArgument(
            "dataset is empty or labels do not match rows".into(),
        ));
    }
    let width = data.x[0].len();
    if data.x.iter().any(|r| r.len() != width) {
        return Err(Error::InvalidArgument("ragged feature rows".into()));
    }
    if data.x.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite feature value".into()));
    }
    let mut classes = data.y.clone();
    classes.sort_unstable();
    classes.dedup();
    if classes.len() < 2 {
        return Err(Error::Classifier("need at least two classes".into()));
    }
    let y: Vec<usize> = data
        .y
        .iter()
        .map(|l| classes.binary_search(l).expect("label present"))
        .collect();
    let n_classes = classes.len();
    let fold_of = stratified_kfold(&y, opts.folds, opts.seed)?;

    let splits: Vec<_> = (0..opts.folds)
        .map(|f| {
            let (tr, te) = split(&fold_of, f);
            let scaler =
                Standardizer::fit(&tr.iter().map(|&i| data.x[i].clone()).collect::<Vec<_>>());
            let trx: Vec<Vec<f64>> = tr.iter().map(|&i| scaler.apply(&data.x[i])).collect();
            let tex: Vec<Vec<f64>> = te.iter().map(|&i| scaler.apply(&data.x[i])).collect();
            let try_: Vec<usize> = tr.iter().map(|&i| y[i]).collect();
            let tey: Vec<usize> = te.iter().map(|&i| y[i]).collect();
            (trx, try_, tex, tey)
        })
        .collect();

    let jobs: Vec<(ClassifierKind, usize)> = opts
        .classifiers
        .iter()
        .flat_map(|&c| (0..opts.folds).map(move |f| (c, f)))
        .collect();
    let results = opts.par.map(&jobs, |&(kind, f)| -> Result<FoldResult> {
        let (trx, try_, tex, tey) = &splits[f];
        let inner_seed = derive_seed(opts.seed, 1 + f as u64);
        let (pred, hyper) = train_predict(kind, opts.depth, trx, try_, tex, n_classes, inner_seed)?;
        Ok(FoldResult {
            fold: f,
            hyper,
            metrics: metrics(tey, &pred.scores, &pred.labels, n_classes)?,
        })
    });
    let mut results = results.into_iter();
    let mut reports = Vec::with_capacity(opts.classifiers.len());
    for &kind in &opts.classifiers {
        let folds: Vec<FoldResult> = results.by_ref().take(opts.folds).collect::<Result<_>>()?;
        let (mean, std) = summarize(&folds);
        reports.push(CvReport {
            classifier: kind,
            config: opts.config.clone(),
            depth: opts.depth,
            seed: opts.seed,
            classes: classes.clone(),
            fold_of: fold_of.clone(),
            folds,
            mean,
            std,
        });
    }
    Ok(reports)
}

/// Per-fold rows followed by `mean` and `std` rows for each classifier.
pub fn cv_csv(reports: &[CvReport]) -> String {
    let mut out = String::from("classifier,fold,hyper");
    for name in Metrics::NAMES {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    let mut line = |classifier: ClassifierKind, fold: &str, hyper: &str, m: &Metrics| {
        out.push_str(&format!("{classifier},{fold},{hyper}"));
        for v in m.to_array() {
            out.push_str(&format!(",{}", fmt_f64(v)));
        }
        out.push('\n');
    };
    for r in reports {
        for f in &r.folds {
            line(
                r.classifier,
                &f.fold.to_string(),
                &f.hyper.to_string(),
                &f.metrics,
            );
        }
        line(r.classifier, "mean", "", &r.mean);
        line(r.classifier, "std", "", &r.std);
    }
    out
}
