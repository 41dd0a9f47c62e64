use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::folds::{split, stratified_kfold};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassifierKind {
    Lr,
    Knn,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 2] = [ClassifierKind::Lr, ClassifierKind::Knn];

    pub fn name(self) -> &'static str {
        match self {
            ClassifierKind::Lr => "lr",
            ClassifierKind::Knn => "knn",
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lr" | "logistic" => Ok(ClassifierKind::Lr),
            "knn" => Ok(ClassifierKind::Knn),
            _ => Err(Error::InvalidArgument(format!("unknown classifier `{s}`"))),
        }
    }
}

/// Size of the inner-CV hyperparameter grid.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Depth {
    /// One value per hyperparameter.
    #[default]
    Shallow,
    /// Three values per hyperparameter, chosen by inner 3-fold CV.
    Deep,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Hyper {
    /// L2 penalty of logistic regression.
    Lambda(f64),
    /// Neighbour count.
    K(usize),
}

impl fmt::Display for Hyper {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Hyper::Lambda(l) => write!(f, "lambda={l}"),
            Hyper::K(k) => write!(f, "k={k}"),
        }
    }
}

pub fn hyper_grid(kind: ClassifierKind, depth: Depth) -> Vec<Hyper> {
    match (kind, depth) {
        (ClassifierKind::Lr, Depth::Shallow) => vec![Hyper::Lambda(0.1)],
        (ClassifierKind::Lr, Depth::Deep) => [0.01, 0.1, 1.0].map(Hyper::Lambda).to_vec(),
        (ClassifierKind::Knn, Depth::Shallow) => vec![Hyper::K(5)],
        (ClassifierKind::Knn, Depth::Deep) => [3, 5, 7].map(Hyper::K).to_vec(),
    }
}

/// Per-class scores and predicted labels for a test set.
#[derive(Clone, Debug, PartialEq)]
pub struct Prediction {
    pub scores: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
}

const INNER_FOLDS: usize = 3;
const MAX_ITER: usize = 2000;

fn check_training(x: &[Vec<f64>], y: &[usize], n_classes: usize) -> Result<()> {
    if x.is_empty() || x.len() != y.len() {
        return Err(Error::Classifier("empty or ragged training set".into()));
    }
    if y.iter().any(|&c| c >= n_classes) {
        return Err(Error::Classifier("label out of range".into()));
    }
    if y.iter().all(|&c| c == y[0]) {
        return Err(Error::Classifier(
            "training set holds a single class".into(),
        ));
    }
    Ok(())
}

fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

struct Logistic {
    /// One row per output (a single row for two classes), bias last.
    w: Vec<Vec<f64>>,
    n_classes: usize,
}

impl Logistic {
    fn probabilities(&self, x: &[f64]) -> Vec<f64> {
        let logit =
            |w: &[f64]| w[..x.len()].iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + w[x.len()];
        if self.n_classes == 2 {
            let p = 1.0 / (1.0 + (-logit(&self.w[0])).exp());
            vec![1.0 - p, p]
        } else {
            let z: Vec<f64> = self.w.iter().map(|w| logit(w)).collect();
            let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let e: Vec<f64> = z.iter().map(|v| (v - m).exp()).collect();
            let s: f64 = e.iter().sum();
            e.into_iter().map(|v| v / s).collect()
        }
    }

    /// Accelerated gradient descent on mean cross-entropy + λ/2 ‖w‖²
    /// (bias unpenalized).
    fn fit(x: &[Vec<f64>], y: &[usize], n_classes: usize, lambda: f64) -> Self {
        let n = x.len() as f64;
        let p = x[0].len();
        let outputs = if n_classes == 2 { 1 } else { n_classes };
        let curvature = if n_classes == 2 { 0.25 } else { 0.5 };
        let step = 1.0 / (curvature * gram_norm(x) * 1.05 + lambda);
        let zeros = vec![vec![0.0; p + 1]; outputs];
        let mut model = Logistic {
            w: zeros.clone(),
            n_classes,
        };
        let mut prev = zeros.clone();
        let mut look = zeros;
        let mut grad = vec![vec![0.0; p + 1]; outputs];
        for t in 0..MAX_ITER {
            let probe = Logistic {
                w: look.clone(),
                n_classes,
            };
            grad.iter_mut()
                .for_each(|g| g.iter_mut().for_each(|v| *v = 0.0));
            for (xi, &yi) in x.iter().zip(y) {
                let prob = probe.probabilities(xi);
                for (o, g) in grad.iter_mut().enumerate() {
                    let class = if outputs == 1 { 1 } else { o };
                    let r = prob[class] - (yi == class) as u8 as f64;
                    for (gj, xj) in g[..p].iter_mut().zip(xi) {
                        *gj += r * xj;
                    }
                    g[p] += r;
                }
            }
            let mut norm2 = 0.0;
            for (g, w) in grad.iter_mut().zip(&look) {
                for j in 0..=p {
                    g[j] /= n;
                    if j < p {
                        g[j] += lambda * w[j];
                    }
                    norm2 += g[j] * g[j];
                }
            }
            let momentum = t as f64 / (t as f64 + 3.0);
            for o in 0..outputs {
                for j in 0..=p {
                    let next = look[o][j] - step * grad[o][j];
                    let v = next + momentum * (next - prev[o][j]);
                    prev[o][j] = next;
                    look[o][j] = v;
                }
            }
            if norm2.sqrt() < 1e-7 {
                break;
            }
        }
        model.w = prev;
        model
    }
}

/// Largest eigenvalue of XᵀX/n for X with a ones column, by power iteration.
fn gram_norm(x: &[Vec<f64>]) -> f64 {
    let p = x[0].len() + 1;
    let n = x.len() as f64;
    let mut v = vec![1.0 / (p as f64).sqrt(); p];
    let mut lambda = 0.0;
    for _ in 0..50 {
        let mut out = vec![0.0; p];
        for xi in x {
            let dot = xi.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>() + v[p - 1];
            for (o, a) in out.iter_mut().zip(xi.iter().chain(std::iter::once(&1.0))) {
                *o += dot * a / n;
            }
        }
        let norm = out.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 1.0;
        }
        lambda = norm;
        v = out.into_iter().map(|a| a / norm).collect();
    }
    lambda.max(1e-12)
}

fn knn_predict(
    x: &[Vec<f64>],
    y: &[usize],
    test: &[Vec<f64>],
    n_classes: usize,
    k: usize,
) -> Prediction {
    let k = k.min(x.len()).max(1);
    let mut scores = Vec::with_capacity(test.len());
    let mut labels = Vec::with_capacity(test.len());
    for q in test {
        let mut d: Vec<(f64, usize)> = x
            .iter()
            .enumerate()
            .map(|(i, xi)| (xi.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum(), i))
            .collect();
        d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut votes = vec![0usize; n_classes];
        for &(_, i) in &d[..k] {
            votes[y[i]] += 1;
        }
        let top = *votes.iter().max().unwrap();
        // ties go to the class of the nearest tied neighbour
        let label = d[..k]
            .iter()
            .map(|&(_, i)| y[i])
            .find(|&c| votes[c] == top)
            .unwrap();
        scores.push(votes.iter().map(|&v| v as f64 / k as f64).collect());
        labels.push(label);
    }
    Prediction { scores, labels }
}

/// Trains with a fixed hyperparameter and predicts `test`.
pub fn fit_predict(
    hyper: Hyper,
    x: &[Vec<f64>],
    y: &[usize],
    test: &[Vec<f64>],
    n_classes: usize,
) -> Result<Prediction> {
    check_training(x, y, n_classes)?;
    match hyper {
        Hyper::Lambda(lambda) => {
            let model = Logistic::fit(x, y, n_classes, lambda);
            let scores: Vec<Vec<f64>> = test.iter().map(|q| model.probabilities(q)).collect();
            let labels = scores.iter().map(|s| argmax(s)).collect();
            Ok(Prediction { scores, labels })
        }
        Hyper::K(k) => Ok(knn_predict(x, y, test, n_classes, k)),
    }
}

/// Picks the hyperparameter by inner 3-fold accuracy (first of the grid on
/// ties, or when the training set is too small to split), then refits on
/// all of `x`.
pub fn train_predict(
    kind: ClassifierKind,
    depth: Depth,
    x: &[Vec<f64>],
    y: &[usize],
    test: &[Vec<f64>],
    n_classes: usize,
    seed: u64,
) -> Result<(Prediction, Hyper)> {
    check_training(x, y, n_classes)?;
    let grid = hyper_grid(kind, depth);
    let mut chosen = grid[0];
    if grid.len() > 1 {
        if let Ok(folds) = stratified_kfold(y, INNER_FOLDS, seed) {
            let mut best = f64::NEG_INFINITY;
            for &h in &grid {
                let mut correct = 0usize;
                for f in 0..INNER_FOLDS {
                    let (tr, te) = split(&folds, f);
                    let pick = |idx: &[usize]| -> (Vec<Vec<f64>>, Vec<usize>) {
                        (
                            idx.iter().map(|&i| x[i].clone()).collect(),
                            idx.iter().map(|&i| y[i]).collect(),
                        )
                    };
                    let (trx, try_) = pick(&tr);
                    let (tex, tey) = pick(&te);
                    let Ok(pred) = fit_predict(h, &trx, &try_, &tex, n_classes) else {
                        continue;
                    };
                    correct += pred.labels.iter().zip(&tey).filter(|(a, b)| a == b).count();
                }
                let acc = correct as f64 / x.len() as f64;
                if acc > best {
                    best = acc;
                    chosen = h;
                }
            }
        }
    }
    Ok((fit_predict(chosen, x, y, test, n_classes)?, chosen))
}
