use std::fmt;
use std::str::FromStr;

use super::cv::{cross_validate, CvOptions, CvReport, Dataset};
use super::metrics::Metrics;
use crate::error::{Error, Result};
use crate::exec::Parallelism;
use crate::io::fmt_f64;
use crate::patch::{PatchConfig, Stat, PATCH_SIZES};

/// Fraction of stage-one trials promoted to stage two.
pub const TOP_FRACTION: f64 = 0.05;

/// Components kept by the PCA track (Morton axis + 3 = 4-D points).
pub const PCA_COMPONENTS: usize = 3;

/// All 2- and 3-element stat subsets, pairs first, each in lexicographic
/// order of [`Stat::ALL`].
pub fn stat_combinations() -> Vec<Vec<Stat>> {
    let s = Stat::ALL;
    let mut out = Vec::with_capacity(120);
    for i in 0..s.len() {
        for j in i + 1..s.len() {
            out.push(vec![s[i], s[j]]);
        }
    }
    for i in 0..s.len() {
        for j in i + 1..s.len() {
            for k in j + 1..s.len() {
                out.push(vec![s[i], s[j], s[k]]);
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrialSpec {
    pub id: usize,
    pub config: PatchConfig,
}

/// Stage-one trials: every patch size against every stat combination.
pub fn stage1_trials() -> Vec<TrialSpec> {
    let combos = stat_combinations();
    PATCH_SIZES
        .flat_map(|n| combos.iter().map(move |c| PatchConfig::stats(n, c.clone())))
        .enumerate()
        .map(|(id, config)| TrialSpec { id, config })
        .collect()
}

/// PCA track: one trial per patch size.
pub fn pca_trials() -> Vec<TrialSpec> {
    PATCH_SIZES
        .map(|n| PatchConfig::pca(n, PCA_COMPONENTS))
        .enumerate()
        .map(|(id, config)| TrialSpec { id, config })
        .collect()
}

/// Number of trials kept by the top-fraction cut.
pub fn top_count(n: usize) -> usize {
    ((n as f64 * TOP_FRACTION).ceil() as usize).min(n)
}

/// Metric used to rank trials (averaged over classifiers).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum RankMetric {
    Accuracy,
    #[default]
    Auc,
    Sensitivity,
    Specificity,
    F1,
}

impl RankMetric {
    fn index(self) -> usize {
        self as usize
    }

    pub fn of(self, m: &Metrics) -> f64 {
        m.to_array()[self.index()]
    }
}

impl fmt::Display for RankMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(Metrics::NAMES[self.index()])
    }
}

impl FromStr for RankMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "accuracy" | "acc" => Ok(RankMetric::Accuracy),
            "auc" => Ok(RankMetric::Auc),
            "sensitivity" => Ok(RankMetric::Sensitivity),
            "specificity" => Ok(RankMetric::Specificity),
            "f1" => Ok(RankMetric::F1),
            _ => Err(Error::InvalidArgument(format!("unknown metric `{s}`"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct TrialResult {
    pub spec: TrialSpec,
    /// One report per classifier, or the error that stopped the trial.
    pub outcome: std::result::Result<Vec<CvReport>, String>,
}

impl TrialResult {
    /// Mean over classifiers of the ranking metric; `-inf` for failed trials.
    pub fn score(&self, metric: RankMetric) -> f64 {
        match &self.outcome {
            Ok(reps) if !reps.is_empty() => {
                reps.iter().map(|r| metric.of(&r.mean)).sum::<f64>() / reps.len() as f64
            }
            _ => f64::NEG_INFINITY,
        }
    }

    /// Classifier with the highest ranking metric (first on ties).
    pub fn best(&self, metric: RankMetric) -> Option<&CvReport> {
        let reps = self.outcome.as_ref().ok()?;
        reps.iter().reduce(|a, b| {
            if metric.of(&b.mean) > metric.of(&a.mean) {
                b
            } else {
                a
            }
        })
    }
}

/// Runs each trial's cross-validation; trials run concurrently and each is
/// single-threaded inside. Failures are recorded, not propagated.
pub fn run_trials<F>(
    trials: &[TrialSpec],
    dataset: F,
    opts: &CvOptions,
    par: Parallelism,
) -> Vec<TrialResult>
where
    F: Fn(&TrialSpec) -> Result<Dataset> + Sync,
{
    par.map(trials, |spec| {
        let cv = CvOptions {
            config: Some(spec.config.to_string()),
            par: Parallelism::Sequential,
            ..opts.clone()
        };
        let outcome = dataset(spec)
            .and_then(|d| cross_validate(&d, &cv))
            .map_err(|e| e.to_string());
        TrialResult {
            spec: spec.clone(),
            outcome,
        }
    })
}

/// Sorts by descending score, then ascending trial id.
pub fn rank(results: &mut [TrialResult], metric: RankMetric) {
    results.sort_by(|a, b| {
        b.score(metric)
            .total_cmp(&a.score(metric))
            .then(a.spec.id.cmp(&b.spec.id))
    });
}

/// The top [`TOP_FRACTION`] of successful trials by score.
pub fn select_top(results: &[TrialResult], metric: RankMetric) -> Vec<TrialSpec> {
    let mut sorted = results.to_vec();
    rank(&mut sorted, metric);
    sorted
        .into_iter()
        .filter(|r| r.outcome.is_ok())
        .take(top_count(results.len()))
        .map(|r| r.spec)
        .collect()
}

/// One row per trial in the given order, reporting the best classifier.
pub fn grid_csv(results: &[TrialResult], metric: RankMetric) -> String {
    let mut out = String::from("trial,patch_size,encoder,classifier,score");
    for name in Metrics::NAMES {
        out.push_str(&format!(",{name}_mean,{name}_std"));
    }
    out.push_str(",status\n");
    for r in results {
        let c = &r.spec.config;
        let mut row = format!("{},{},{}", r.spec.id, c.patch_size, c.encoder);
        match (r.best(metric), &r.outcome) {
            (Some(best), _) => {
                row.push_str(&format!(
                    ",{},{}",
                    best.classifier,
                    fmt_f64(r.score(metric))
                ));
                for (m, s) in best.mean.to_array().iter().zip(best.std.to_array()) {
                    row.push_str(&format!(",{},{}", fmt_f64(*m), fmt_f64(s)));
                }
                row.push_str(",ok");
            }
            (None, outcome) => {
                row.push_str(",,");
                row.push_str(&",".repeat(10));
                let msg = outcome
                    .as_ref()
                    .err()
                    .map_or("no classifiers".to_string(), |e| {
                        e.replace([',', '\n'], ";")
                    });
                row.push_str(&format!(",error: {msg}"));
            }
        }
        out.push_str(&row);
        out.push('\n');
    }
    out
}

/// Ids of the successful trials listed in a [`grid_csv`] table, in file
/// order.
pub fn parse_grid_ids(text: &str) -> Result<Vec<usize>> {
    let mut reader = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::Format(e.to_string()))?
        .clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Format(format!("grid table lacks a `{name}` column")))
    };
    let (id_col, status_col) = (col("trial")?, col("status")?);
    let mut ids = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Format(e.to_string()))?;
        if record.get(status_col) == Some("ok") {
            let id = record[id_col]
                .parse()
                .map_err(|_| Error::Format(format!("bad trial id `{}`", &record[id_col])))?;
            ids.push(id);
        }
    }
    Ok(ids)
}
