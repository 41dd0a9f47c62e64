//! Patch-to-point conversion: a masked volume becomes a point cloud with one
//! point per non-empty patch.
//!
//! The volume is tiled by non-overlapping `n x n x n` patches anchored at the
//! origin. Partial tiles at the far boundary are zero-padded. A tile is kept
//! iff it covers at least one ROI voxel. Each kept tile becomes a point whose
//! first coordinate is the Morton code of its center and whose remaining
//! coordinates summarize its intensities (statistics or PCA scores).

mod morton;
mod pca;
mod stats;

use std::fmt;

pub use morton::{morton_decode, morton_encode, MORTON_LIMIT};
pub use pca::pca_fit_transform;
pub use stats::{all_stats, parse_stats, patch_stats, percentile_sorted, Stat, ENTROPY_BINS};

use crate::error::{Error, Result};
use crate::exec::Parallelism;
use crate::volume::{Mask, Volume};

/// Patch sizes searched by the grid search.
pub const PATCH_SIZES: std::ops::RangeInclusive<usize> = 3..=10;

/// How patch intensities are summarized.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Encoder {
    Stats(Vec<Stat>),
    Pca(usize),
}

impl Encoder {
    /// Number of intensity axes produced.
    pub fn width(&self) -> usize {
        match self {
            Encoder::Stats(s) => s.len(),
            Encoder::Pca(k) => *k,
        }
    }
}

impl fmt::Display for Encoder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Encoder::Stats(s) => {
                let names: Vec<_> = s.iter().map(|s| s.name()).collect();
                write!(f, "stats:{}", names.join("+"))
            }
            Encoder::Pca(k) => write!(f, "pca:{k}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PatchConfig {
    pub patch_size: usize,
    pub encoder: Encoder,
    pub normalize_axes: bool,
}

impl PatchConfig {
    pub fn stats(patch_size: usize, stats: Vec<Stat>) -> Self {
        PatchConfig {
            patch_size,
            encoder: Encoder::Stats(stats),
            normalize_axes: true,
        }
    }

    pub fn pca(patch_size: usize, k: usize) -> Self {
        PatchConfig {
            patch_size,
            encoder: Encoder::Pca(k),
            normalize_axes: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !PATCH_SIZES.contains(&self.patch_size) {
            return Err(Error::InvalidArgument(format!(
                "patch size {} outside {PATCH_SIZES:?}",
                self.patch_size
            )));
        }
        match &self.encoder {
            Encoder::Stats(stats) => {
                if !(2..=3).contains(&stats.len()) {
                    return Err(Error::InvalidArgument(format!(
                        "expected 2 or 3 stats, got {}",
                        stats.len()
                    )));
                }
                let mut seen = stats.clone();
                seen.sort();
                seen.dedup();
                if seen.len() != stats.len() {
                    return Err(Error::InvalidArgument("duplicate stat".into()));
                }
            }
            Encoder::Pca(k) => {
                if !(2..=3).contains(k) {
                    return Err(Error::InvalidArgument(format!(
                        "PCA must keep 2 or 3 components, got {k}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Dimension of the produced points.
    pub fn point_dim(&self) -> usize {
        1 + self.encoder.width()
    }
}

impl fmt::Display for PatchConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "patch{}:{}", self.patch_size, self.encoder)
    }
}

/// One retained tile.
#[derive(Debug, Clone, PartialEq)]
pub struct Patch {
    /// `n^3` intensities, row-major within the tile, zero past the volume.
    pub values: Vec<f64>,
    /// Approximate center `[z, y, x]`: anchor + n/2, clamped into the volume.
    pub center: [usize; 3],
}

fn tile_counts(dims: [usize; 3], n: usize) -> [usize; 3] {
    dims.map(|d| d.div_ceil(n))
}

/// Tiles `v` with stride `n` and keeps tiles touching the ROI, in z-y-x tile
/// order.
pub fn extract_patches(v: &Volume, m: &Mask, n: usize) -> Result<Vec<Patch>> {
    extract_patches_with(v, m, n, Parallelism::default())
}

pub fn extract_patches_with(
    v: &Volume,
    m: &Mask,
    n: usize,
    par: Parallelism,
) -> Result<Vec<Patch>> {
    if n == 0 {
        return Err(Error::InvalidArgument("patch size must be positive".into()));
    }
    m.check_matches(v)?;
    let dims = v.dims();
    let [tz, ty, tx] = tile_counts(dims, n);
    let tiles = par.map_range(tz * ty * tx, |t| {
        let anchor = [t / (ty * tx) * n, (t / tx) % ty * n, t % tx * n];
        let mut touches = false;
        let mut values = Vec::with_capacity(n * n * n);
        for dz in 0..n {
            for dy in 0..n {
                for dx in 0..n {
                    let (z, y, x) = (anchor[0] + dz, anchor[1] + dy, anchor[2] + dx);
                    if z < dims[0] && y < dims[1] && x < dims[2] {
                        touches |= m.get(z, y, x);
                        values.push(v.get(z, y, x) as f64);
                    } else {
                        values.push(0.0);
                    }
                }
            }
        }
        touches.then(|| Patch {
            values,
            center: std::array::from_fn(|a| (anchor[a] + n / 2).min(dims[a] - 1)),
        })
    });
    Ok(tiles.into_iter().flatten().collect())
}

/// Morton code of a patch center (x in the least significant bit).
pub fn center_code(center: [usize; 3]) -> Result<u64> {
    morton_encode(center[2] as u64, center[1] as u64, center[0] as u64)
}

/// A cloud of `len()` points in `dim()` dimensions. Axis 0 carries the
/// Morton coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    dim: usize,
    coords: Vec<f64>,
    config: Option<PatchConfig>,
}

impl PointCloud {
    pub fn new(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 || !coords.len().is_multiple_of(dim) {
            return Err(Error::InvalidArgument(format!(
                "{} coordinates do not form {dim}-dimensional points",
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::Numerical("non-finite point coordinate".into()));
        }
        Ok(PointCloud {
            dim,
            coords,
            config: None,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidArgument("ragged point rows".into()));
        }
        PointCloud::new(dim.max(1), rows.iter().flatten().copied().collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> std::slice::ChunksExact<'_, f64> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Configuration that produced this cloud, if it came from a volume.
    pub fn config(&self) -> Option<&PatchConfig> {
        self.config.as_ref()
    }

    /// Min-max scales every axis to `[0, 1]`; constant axes map to 0.
    pub fn normalize_axes(&mut self) {
        let d = self.dim;
        for a in 0..d {
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for p in self.coords.chunks_exact(d) {
                lo = lo.min(p[a]);
                hi = hi.max(p[a]);
            }
            let width = hi - lo;
            for p in self.coords.chunks_exact_mut(d) {
                p[a] = if width > 0.0 {
                    (p[a] - lo) / width
                } else {
                    0.0
                };
            }
        }
    }
}

/// Morton codes plus all nine statistics for every retained patch; lets a
/// grid search try every stat combination without re-reading the volume.
#[derive(Debug, Clone)]
pub struct PatchTable {
    pub patch_size: usize,
    pub codes: Vec<u64>,
    pub stats: Vec<[f64; 9]>,
}

impl PatchTable {
    pub fn build(v: &Volume, m: &Mask, patch_size: usize, par: Parallelism) -> Result<Self> {
        let patches = extract_patches_with(v, m, patch_size, par)?;
        let codes = patches
            .iter()
            .map(|p| center_code(p.center))
            .collect::<Result<Vec<_>>>()?;
        let stats = par.map(&patches, |p| all_stats(&p.values));
        Ok(PatchTable {
            patch_size,
            codes,
            stats,
        })
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    /// Point cloud for a stats encoder; identical to [`build_point_cloud`]
    /// with the same configuration.
    pub fn point_cloud(&self, stats: &[Stat], normalize: bool) -> Result<PointCloud> {
        if self.is_empty() {
            return Err(Error::EmptyMask);
        }
        let dim = 1 + stats.len();
        let mut coords = Vec::with_capacity(self.len() * dim);
        for (code, all) in self.codes.iter().zip(&self.stats) {
            coords.push(*code as f64);
            coords.extend(stats.iter().map(|s| all[s.index()]));
        }
        let mut cloud = PointCloud::new(dim, coords)?;
        if normalize {
            cloud.normalize_axes();
        }
        cloud.config = Some(PatchConfig {
            patch_size: self.patch_size,
            encoder: Encoder::Stats(stats.to_vec()),
            normalize_axes: normalize,
        });
        Ok(cloud)
    }
}

/// Converts a masked volume into a point cloud.
pub fn build_point_cloud(v: &Volume, m: &Mask, cfg: &PatchConfig) -> Result<PointCloud> {
    build_point_cloud_with(v, m, cfg, Parallelism::default())
}

pub fn build_point_cloud_with(
    v: &Volume,
    m: &Mask,
    cfg: &PatchConfig,
    par: Parallelism,
) -> Result<PointCloud> {
    cfg.validate()?;
    match &cfg.encoder {
        Encoder::Stats(stats) => {
            PatchTable::build(v, m, cfg.patch_size, par)?.point_cloud(stats, cfg.normalize_axes)
        }
        Encoder::Pca(k) => {
            let patches = extract_patches_with(v, m, cfg.patch_size, par)?;
            if patches.is_empty() {
                return Err(Error::EmptyMask);
            }
            let rows: Vec<Vec<f64>> = patches.iter().map(|p| p.values.clone()).collect();
            let scores = if rows.len() >= 2 {
                pca_fit_transform(&rows, (*k).min(rows.len()))?
            } else {
                vec![vec![0.0; *k]]
            };
            let dim = 1 + k;
            let mut coords = Vec::with_capacity(patches.len() * dim);
            for (p, s) in patches.iter().zip(scores) {
                coords.push(center_code(p.center)? as f64);
                coords.extend(s.iter().copied());
                coords.extend(std::iter::repeat_n(0.0, k - s.len()));
            }
            let mut cloud = PointCloud::new(dim, coords)?;
            if cfg.normalize_axes {
                cloud.normalize_axes();
            }
            cloud.config = Some(cfg.clone());
            Ok(cloud)
        }
    }
}
