//! Per-sample feature extraction and batch drivers over a manifest.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::alpha::{alpha_persistence, AlphaOptions};
use crate::cubical::cubical_persistence;
use crate::error::{Error, Result};
use crate::exec::Parallelism;
use crate::io::{load_mask, load_volume, FeatureRow};
use crate::ml::{run_trials, CvOptions, Dataset, TrialResult, TrialSpec};
use crate::patch::{
    build_point_cloud_with, Encoder, PatchConfig, PatchTable, PointCloud, PATCH_SIZES,
};
use crate::persistence::Barcodes;
use crate::preprocess::{average_spacing, mask_and_crop, resample, resample_mask, DEFAULT_PAD};
use crate::vectorize::{vectorize_with, EssentialPolicy};
use crate::volume::{Mask, Volume};

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub volume: PathBuf,
    pub mask: PathBuf,
    pub label: String,
    /// Row identifier; defaults to the volume path as written.
    #[serde(default)]
    pub id: Option<String>,
}

/// A JSON array of `{volume, mask, label}` objects; relative paths resolve
/// against the manifest's directory.
#[derive(Clone, Debug, PartialEq)]
pub struct Manifest {
    pub dir: PathBuf,
    pub entries: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let entries: Vec<ManifestEntry> =
            serde_json::from_str(&text).map_err(|e| Error::Header {
                path: path.to_path_buf(),
                message: e.to_string(),
            })?;
        if entries.is_empty() {
            return Err(Error::Format(format!(
                "{}: manifest lists no samples",
                path.display()
            )));
        }
        Ok(Manifest {
            dir: path.parent().map(Path::to_path_buf).unwrap_or_default(),
            entries,
        })
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.dir.join(p)
        }
    }

    /// Distinct labels in sorted order; a label's position is its class index.
    pub fn labels(&self) -> Vec<String> {
        let mut l: Vec<String> = self.entries.iter().map(|e| e.label.clone()).collect();
        l.sort();
        l.dedup();
        l
    }

    pub fn class_indices(&self) -> Vec<usize> {
        let labels = self.labels();
        self.entries
            .iter()
            .map(|e| labels.binary_search(&e.label).expect("label listed"))
            .collect()
    }
}

/// A loaded sample.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub id: String,
    pub label: String,
    pub volume: Volume,
    pub mask: Mask,
}

/// Resampling applied when samples are loaded.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub enum TargetSpacing {
    #[default]
    Native,
    /// Mean spacing over the manifest.
    Average,
    Fixed([f64; 3]),
}

/// Resamples a volume and its mask to `target`.
pub fn resample_pair(v: &Volume, m: &Mask, target: [f64; 3]) -> Result<(Volume, Mask)> {
    m.check_matches(v)?;
    Ok((resample(v, target)?, resample_mask(m, v.spacing(), target)?))
}

pub fn load_samples(
    manifest: &Manifest,
    spacing: TargetSpacing,
    par: Parallelism,
) -> Result<Vec<Sample>> {
    let raw = par.map(&manifest.entries, |e| -> Result<Sample> {
        let volume = load_volume(manifest.resolve(&e.volume))?;
        let mask = load_mask(manifest.resolve(&e.mask))?;
        mask.check_matches(&volume)?;
        Ok(Sample {
            id: e
                .id
                .clone()
                .unwrap_or_else(|| e.volume.display().to_string()),
            label: e.label.clone(),
            volume,
            mask,
        })
    });
    let mut samples = raw.into_iter().collect::<Result<Vec<_>>>()?;
    let target = match spacing {
        TargetSpacing::Native => return Ok(samples),
        TargetSpacing::Average => average_spacing(samples.iter().map(|s| &s.volume))?,
        TargetSpacing::Fixed(t) => t,
    };
    let resampled = par.map(&samples, |s| resample_pair(&s.volume, &s.mask, target));
    for (s, r) in samples.iter_mut().zip(resampled) {
        (s.volume, s.mask) = r?;
    }
    Ok(samples)
}

/// Which filtration produces the barcodes.
#[derive(Clone, Debug, PartialEq)]
pub enum Method {
    Patch(PatchConfig),
    Cubical,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureOptions {
    pub method: Method,
    pub pad: usize,
    pub alpha: AlphaOptions,
    pub policy: EssentialPolicy,
}

impl FeatureOptions {
    pub fn patch(config: PatchConfig) -> Self {
        FeatureOptions {
            method: Method::Patch(config),
            pad: DEFAULT_PAD,
            alpha: AlphaOptions::default(),
            policy: EssentialPolicy::default(),
        }
    }
}

/// Masks, crops and encodes a sample into a point cloud.
pub fn sample_point_cloud(
    v: &Volume,
    m: &Mask,
    cfg: &PatchConfig,
    pad: usize,
    par: Parallelism,
) -> Result<PointCloud> {
    let cropped = mask_and_crop(v, m, pad)?;
    build_point_cloud_with(&cropped.volume, &cropped.mask, cfg, par)
}

/// Barcodes of one sample. The cubical baseline filters the volume under
/// its mask directly.
pub fn sample_barcodes(
    v: &Volume,
    m: &Mask,
    opts: &FeatureOptions,
    par: Parallelism,
) -> Result<Barcodes> {
    match &opts.method {
        Method::Patch(cfg) => {
            let pc = sample_point_cloud(v, m, cfg, opts.pad, par)?;
            alpha_persistence(&pc, &opts.alpha)
        }
        Method::Cubical => cubical_persistence(v, Some(m)),
    }
}

pub fn barcode_features(b: &Barcodes, policy: EssentialPolicy) -> Vec<f64> {
    vectorize_with(&b.dim(0), &b.dim(1), &b.dim(2), policy)
}

/// Feature rows for every sample, in input order. Samples run concurrently;
/// each is processed single-threaded.
pub fn extract_features(
    samples: &[Sample],
    opts: &FeatureOptions,
    par: Parallelism,
) -> Result<Vec<FeatureRow>> {
    par.map(samples, |s| -> Result<FeatureRow> {
        let b = sample_barcodes(&s.volume, &s.mask, opts, Parallelism::Sequential)
            .map_err(|e| with_context(&s.id, e))?;
        Ok(FeatureRow {
            id: s.id.clone(),
            values: barcode_features(&b, opts.policy),
            label: s.label.clone(),
        })
    })
    .into_iter()
    .collect()
}

fn with_context(id: &str, e: Error) -> Error {
    match e {
        Error::Numerical(m) => Error::Numerical(format!("{id}: {m}")),
        Error::InvalidArgument(m) => Error::InvalidArgument(format!("{id}: {m}")),
        other => other,
    }
}

/// Class index per sample, labels mapped in sorted order.
pub fn class_indices(samples: &[Sample]) -> Vec<usize> {
    let mut labels: Vec<&str> = samples.iter().map(|s| s.label.as_str()).collect();
    labels.sort_unstable();
    labels.dedup();
    samples
        .iter()
        .map(|s| {
            labels
                .binary_search(&s.label.as_str())
                .expect("label listed")
        })
        .collect()
}

/// Grid search over patch configurations. Cropping and the nine patch
/// statistics are computed once per sample and patch size and shared by all
/// stat combinations.
pub fn grid_search(
    samples: &[Sample],
    trials: &[TrialSpec],
    base: &FeatureOptions,
    cv: &CvOptions,
    par: Parallelism,
) -> Result<Vec<TrialResult>> {
    let y = class_indices(samples);
    let cropped = par
        .map(samples, |s| mask_and_crop(&s.volume, &s.mask, base.pad))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let needed: Vec<usize> = {
        let mut sizes: Vec<usize> = trials
            .iter()
            .filter(|t| matches!(t.config.encoder, Encoder::Stats(_)))
            .map(|t| t.config.patch_size)
            .filter(|n| PATCH_SIZES.contains(n))
            .collect();
        sizes.sort_unstable();
        sizes.dedup();
        sizes
    };
    let mut tables: BTreeMap<usize, Vec<PatchTable>> = BTreeMap::new();
    for &n in &needed {
        let built = par
            .map(&cropped, |c| {
                PatchTable::build(&c.volume, &c.mask, n, Parallelism::Sequential)
            })
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        tables.insert(n, built);
    }
    let dataset = |spec: &TrialSpec| -> Result<Dataset> {
        spec.config.validate()?;
        let mut x = Vec::with_capacity(samples.len());
        for (i, c) in cropped.iter().enumerate() {
            let pc = match (&spec.config.encoder, tables.get(&spec.config.patch_size)) {
                (Encoder::Stats(stats), Some(t)) => {
                    t[i].point_cloud(stats, spec.config.normalize_axes)?
                }
                _ => build_point_cloud_with(
                    &c.volume,
                    &c.mask,
                    &spec.config,
                    Parallelism::Sequential,
                )?,
            };
            let b = alpha_persistence(&pc, &base.alpha)?;
            x.push(barcode_features(&b, base.policy));
        }
        Ok(Dataset { x, y: y.clone() })
    };
    Ok(run_trials(trials, dataset, cv, par))
}
