use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The five reported metrics, in percent.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub auc: f64,
    pub sensitivity: f64,
    pub specificity: f64,
    pub f1: f64,
}

impl Metrics {
    pub const NAMES: [&'static str; 5] = ["accuracy", "auc", "sensitivity", "specificity", "f1"];

    pub fn to_array(self) -> [f64; 5] {
        [
            self.accuracy,
            self.auc,
            self.sensitivity,
            self.specificity,
            self.f1,
        ]
    }

    pub fn from_array(a: [f64; 5]) -> Self {
        Metrics {
            accuracy: a[0],
            auc: a[1],
            sensitivity: a[2],
            specificity: a[3],
            f1: a[4],
        }
    }
}

/// Area under the ROC curve as a fraction, from average ranks
/// (ties earn half credit).
pub fn auc(positive: &[bool], scores: &[f64]) -> Result<f64> {
    let n_pos = positive.iter().filter(|&&p| p).count();
    let n_neg = positive.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::Classifier("AUC needs both classes in y_true".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &o in &order[i..=j] {
            if positive[o] {
                rank_sum += avg;
            }
        }
        i = j + 1;
    }
    let u = rank_sum - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Ok(u / (n_pos as f64 * n_neg as f64))
}

struct Confusion {
    tp: f64,
    fp: f64,
    tn: f64,
    fn_: f64,
}

impl Confusion {
    fn of(y_true: &[usize], y_pred: &[usize], class: usize) -> Self {
        let mut c = Confusion {
            tp: 0.0,
            fp: 0.0,
            tn: 0.0,
            fn_: 0.0,
        };
        for (&t, &p) in y_true.iter().zip(y_pred) {
            match (t == class, p == class) {
                (true, true) => c.tp += 1.0,
                (false, true) => c.fp += 1.0,
                (false, false) => c.tn += 1.0,
                (true, false) => c.fn_ += 1.0,
            }
        }
        c
    }

    fn ratio(a: f64, b: f64) -> f64 {
        if a + b > 0.0 {
            a / (a + b)
        } else {
            0.0
        }
    }

    fn sensitivity(&self) -> f64 {
        Self::ratio(self.tp, self.fn_)
    }

    fn specificity(&self) -> f64 {
        Self::ratio(self.tn, self.fp)
    }

    fn f1(&self) -> f64 {
        Self::ratio(2.0 * self.tp, self.fp + self.fn_)
    }
}

/// Metrics for labels in `0..n_classes`; `scores[i][c]` is the score of
/// sample `i` for class `c`.
///
/// Two classes treat class 1 as positive. More classes average the
/// one-vs-rest AUC, sensitivity, specificity and F1 over the classes present
/// in `y_true`; accuracy is always the overall fraction correct.
pub fn metrics(
    y_true: &[usize],
    scores: &[Vec<f64>],
    y_pred: &[usize],
    n_classes: usize,
) -> Result<Metrics> {
    if y_true.is_empty() || y_true.len() != y_pred.len() || y_true.len() != scores.len() {
        return Err(Error::InvalidArgument(
            "metric inputs differ in length or are empty".into(),
        ));
    }
    let correct = y_true.iter().zip(y_pred).filter(|(a, b)| a == b).count();
    let accuracy = correct as f64 / y_true.len() as f64;
    let classes: Vec<usize> = if n_classes == 2 {
        vec![1]
    } else {
        (0..n_classes).filter(|c| y_true.contains(c)).collect()
    };
    let mut sums = [0.0; 4];
    for &c in &classes {
        let pos: Vec<bool> = y_true.iter().map(|&t| t == c).collect();
        let s: Vec<f64> = scores.iter().map(|r| r[c]).collect();
        let conf = Confusion::of(y_true, y_pred, c);
        sums[0] += auc(&pos, &s)?;
        sums[1] += conf.sensitivity();
        sums[2] += conf.specificity();
        sums[3] += conf.f1();
    }
    let m = classes.len() as f64;
    Ok(Metrics {
        accuracy: 100.0 * accuracy,
        auc: 100.0 * sums[0] / m,
        sensitivity: 100.0 * sums[1] / m,
        specificity: 100.0 * sums[2] / m,
        f1: 100.0 * sums[3] / m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn binary_scores(s: &[f64]) -> Vec<Vec<f64>> {
        s.iter().map(|&x| vec![1.0 - x, x]).collect()
    }

    #[test]
    fn perfect() {
        let y = [0, 1, 0, 1];
        let m = metrics(&y, &binary_scores(&[0.1, 0.9, 0.2, 0.8]), &y, 2).unwrap();
        assert_eq!(m.to_array(), [100.0; 5]);
    }

    #[test]
    fn constant_scores() {
        let m = metrics(&[0, 1, 0, 1], &binary_scores(&[0.5; 4]), &[1, 1, 1, 1], 2).unwrap();
        assert_eq!(m.auc, 50.0);
    }

    #[test]
    fn hand_counted_confusion() {
        let m = metrics(
            &[1, 1, 0, 0],
            &binary_scores(&[0.9, 0.4, 0.2, 0.1]),
            &[1, 0, 0, 0],
            2,
        )
        .unwrap();
        assert_eq!(m.sensitivity, 50.0);
        assert_eq!(m.specificity, 100.0);
        assert_eq!(m.accuracy, 75.0);
        assert!((m.f1 - 200.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn single_class_auc_fails() {
        assert!(auc(&[true, true], &[0.1, 0.2]).is_err());
    }

    #[test]
    fn multiclass_macro() {
        let y = [0, 1, 2, 0, 1, 2];
        let scores: Vec<Vec<f64>> = y
            .iter()
            .map(|&c| (0..3).map(|k| (k == c) as u8 as f64).collect())
            .collect();
        let m = metrics(&y, &scores, &[0, 1, 2, 0, 1, 1], 3).unwrap();
        assert_eq!(m.auc, 100.0);
        assert!((m.accuracy - 500.0 / 6.0).abs() < 1e-9);
        // class 2: recall 1/2; others full
        assert!((m.sensitivity - 100.0 * (1.0 + 1.0 + 0.5) / 3.0).abs() < 1e-9);
    }

    fn pair_count_auc(pos: &[bool], s: &[f64]) -> f64 {
        let mut total = 0.0;
        let mut pairs = 0.0;
        for i in 0..pos.len() {
            for j in 0..pos.len() {
                if pos[i] && !pos[j] {
                    pairs += 1.0;
                    total += if s[i] > s[j] {
                        1.0
                    } else if s[i] == s[j] {
                        0.5
                    } else {
                        0.0
                    };
                }
            }
        }
        total / pairs
    }

    proptest! {
        #[test]
        fn rank_auc_matches_pairs(v in prop::collection::vec((any::<bool>(), 0u8..6), 2..100)) {
            let pos: Vec<bool> = v.iter().map(|p| p.0).collect();
            prop_assume!(pos.iter().any(|&p| p) && pos.iter().any(|&p| !p));
            let s: Vec<f64> = v.iter().map(|p| p.1 as f64).collect();
            prop_assert!((auc(&pos, &s).unwrap() - pair_count_auc(&pos, &s)).abs() < 1e-12);
        }
    }
}
