//! Fixed-length statistical summaries of barcodes.

use std::sync::OnceLock;

use crate::patch::percentile_sorted;
use crate::persistence::lifespan_entropy;
use crate::persistence::{Bar, Barcode};

pub const SERIES: [&str; 4] = ["birth", "death", "lifespan", "midpoint"];
pub const SERIES_STATS: [&str; 9] = [
    "mean", "median", "std", "range", "iqr", "p10", "p25", "p75", "p90",
];
/// Features per homology dimension.
pub const BLOCK_LEN: usize = SERIES.len() * SERIES_STATS.len() + 2;
pub const FEATURE_LEN: usize = 3 * BLOCK_LEN;

/// Treatment of bars that never die.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum EssentialPolicy {
    /// Close them at the largest finite value over all three barcodes.
    #[default]
    Substitute,
    /// Leave them out of every statistic and count.
    Drop,
}

/// Column names in feature order.
pub fn feature_names() -> &'static [String] {
    static NAMES: OnceLock<Vec<String>> = OnceLock::new();
    NAMES.get_or_init(|| {
        let mut names = Vec::with_capacity(FEATURE_LEN);
        for dim in 0..3 {
            for series in SERIES {
                for stat in SERIES_STATS {
                    names.push(format!("h{dim}_{series}_{stat}"));
                }
            }
            names.push(format!("h{dim}_entropy"));
            names.push(format!("h{dim}_count"));
        }
        names
    })
}

fn series_stats(mut values: Vec<f64>, out: &mut Vec<f64>) {
    values.sort_by(f64::total_cmp);
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let p = |q| percentile_sorted(&values, q);
    out.extend([
        mean,
        p(0.5),
        var.sqrt(),
        values[values.len() - 1] - values[0],
        p(0.75) - p(0.25),
        p(0.1),
        p(0.25),
        p(0.75),
        p(0.9),
    ]);
}

fn block(bars: &[Bar], out: &mut Vec<f64>) {
    if bars.is_empty() {
        out.extend([0.0; BLOCK_LEN]);
        return;
    }
    series_stats(bars.iter().map(|b| b.birth).collect(), out);
    series_stats(bars.iter().map(|b| b.death).collect(), out);
    series_stats(bars.iter().map(|b| b.death - b.birth).collect(), out);
    series_stats(
        bars.iter().map(|b| 0.5 * (b.birth + b.death)).collect(),
        out,
    );
    out.push(lifespan_entropy(bars.iter().map(|b| b.death - b.birth)));
    out.push(bars.len() as f64);
}

/// Bars with essential deaths resolved according to `policy`.
pub fn resolve_essential(barcodes: [&Barcode; 3], policy: EssentialPolicy) -> [Vec<Bar>; 3] {
    let cap = barcodes
        .iter()
        .flat_map(|b| b.bars())
        .flat_map(|b| [b.birth, b.death])
        .filter(|v| v.is_finite())
        .fold(f64::NEG_INFINITY, f64::max);
    barcodes.map(|b| {
        b.bars()
            .iter()
            .filter_map(|bar| match (bar.is_finite(), policy) {
                (true, _) => Some(*bar),
                (false, EssentialPolicy::Drop) => None,
                (false, EssentialPolicy::Substitute) => {
                    Some(Bar::new(bar.birth, cap.max(bar.birth)))
                }
            })
            .collect()
    })
}

/// Feature vector of length [`FEATURE_LEN`] with essential bars substituted.
pub fn vectorize(b0: &Barcode, b1: &Barcode, b2: &Barcode) -> Vec<f64> {
    vectorize_with(b0, b1, b2, EssentialPolicy::Substitute)
}

pub fn vectorize_with(
    b0: &Barcode,
    b1: &Barcode,
    b2: &Barcode,
    policy: EssentialPolicy,
) -> Vec<f64> {
    let resolved = resolve_essential([b0, b1, b2], policy);
    let mut out = Vec::with_capacity(FEATURE_LEN);
    for bars in &resolved {
        block(bars, &mut out);
    }
    out
}
