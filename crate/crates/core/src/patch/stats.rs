//! Summary statistics of a flattened patch.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Number of histogram bins used by [`Stat::Entropy`].
pub const ENTROPY_BINS: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Stat {
    Mean,
    Median,
    Mode,
    Std,
    Iqr,
    Entropy,
    Range,
    Min,
    Max,
}

impl Stat {
    pub const ALL: [Stat; 9] = [
        Stat::Mean,
        Stat::Median,
        Stat::Mode,
        Stat::Std,
        Stat::Iqr,
        Stat::Entropy,
        Stat::Range,
        Stat::Min,
        Stat::Max,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stat::Mean => "mean",
            Stat::Median => "median",
            Stat::Mode => "mode",
            Stat::Std => "std",
            Stat::Iqr => "iqr",
            Stat::Entropy => "entropy",
            Stat::Range => "range",
            Stat::Min => "min",
            Stat::Max => "max",
        }
    }

    pub fn index(self) -> usize {
        Stat::ALL.iter().position(|&s| s == self).unwrap()
    }
}

impl fmt::Display for Stat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Stat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace([' ', '-'], "_");
        Ok(match key.as_str() {
            "mean" => Stat::Mean,
            "median" => Stat::Median,
            "mode" => Stat::Mode,
            "std" | "standard_deviation" => Stat::Std,
            "iqr" | "interquartile_range" => Stat::Iqr,
            "entropy" => Stat::Entropy,
            "range" => Stat::Range,
            "min" | "minimum" => Stat::Min,
            "max" | "maximum" => Stat::Max,
            _ => return Err(Error::UnknownStat(s.to_string())),
        })
    }
}

/// Parses a comma-separated stat list such as `mean,iqr`.
pub fn parse_stats(list: &str) -> Result<Vec<Stat>> {
    list.split(',').map(str::parse).collect()
}

/// Percentile with linear interpolation between order statistics;
/// `sorted` must be ascending and non-empty, `q` in `[0, 1]`.
pub fn percentile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

/// All nine statistics, indexed as [`Stat::ALL`].
pub fn all_stats(values: &[f64]) -> [f64; 9] {
    debug_assert!(!values.is_empty());
    let n = values.len() as f64;
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let min = sorted[0];
    let max = sorted[sorted.len() - 1];
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let median = percentile_sorted(&sorted, 0.5);
    let iqr = percentile_sorted(&sorted, 0.75) - percentile_sorted(&sorted, 0.25);
    [
        mean,
        median,
        mode(&sorted),
        var.sqrt(),
        iqr,
        histogram_entropy(values, min, max),
        max - min,
        min,
        max,
    ]
}

/// Requested statistics in request order.
pub fn patch_stats(values: &[f64], stats: &[Stat]) -> Vec<f64> {
    let all = all_stats(values);
    stats.iter().map(|s| all[s.index()]).collect()
}

/// Most frequent value after rounding to the nearest integer; ties go to the
/// smallest value.
fn mode(sorted: &[f64]) -> f64 {
    let mut best = sorted[0].round();
    let mut best_count = 0;
    let mut i = 0;
    while i < sorted.len() {
        let key = sorted[i].round();
        let mut j = i;
        while j < sorted.len() && sorted[j].round() == key {
            j += 1;
        }
        if j - i > best_count {
            best = key;
            best_count = j - i;
        }
        i = j;
    }
    best
}

/// Shannon entropy (nats) of a histogram with [`ENTROPY_BINS`] uniform bins
/// over `[min, max]`.
fn histogram_entropy(values: &[f64], min: f64, max: f64) -> f64 {
    let width = max - min;
    if !(width > 0.0) {
        return 0.0;
    }
    let mut counts = [0usize; ENTROPY_BINS];
    for &v in values {
        let bin = (((v - min) / width) * ENTROPY_BINS as f64).floor() as usize;
        counts[bin.min(ENTROPY_BINS - 1)] += 1;
    }
    let n = values.len() as f64;
    -counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            p * p.ln()
        })
        .sum::<f64>()
}
