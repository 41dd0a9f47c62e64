//! Alpha-complex persistence of point clouds in three or four dimensions.

mod delaunay;
mod filtration;
mod predicates;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use delaunay::{delaunay, Triangulation};
pub use filtration::{alpha_values, smallest_circumsphere, AlphaFiltration, MAX_CELL_DIM};

use crate::error::{Error, Result};
use crate::patch::PointCloud;
use crate::persistence::{compute_persistence, Bar, Barcode, Barcodes};

/// Jitter magnitude relative to each axis' range.
pub const JITTER_SCALE: f64 = 1e-9;

/// Default cap on the number of points triangulated in four dimensions.
pub const DEFAULT_MAX_POINTS_4D: usize = 50_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AlphaOptions {
    /// Seed of the coordinate jitter.
    pub seed: u64,
    pub max_points_4d: usize,
}

impl Default for AlphaOptions {
    fn default() -> Self {
        AlphaOptions {
            seed: 0,
            max_points_4d: DEFAULT_MAX_POINTS_4D,
        }
    }
}

/// Perturbs every coordinate by a uniform offset in `±1e-9 × range` of its
/// axis, drawn in input order from a seeded stream.
///
/// A constant axis borrows the widest range of the cloud (1 if every axis is
/// constant) so that its points still leave the degenerate hyperplane.
pub fn jitter(coords: &[f64], dim: usize, seed: u64) -> Vec<f64> {
    let n = coords.len() / dim;
    let mut ranges = vec![0.0f64; dim];
    for a in 0..dim {
        let (lo, hi) = (0..n)
            .map(|i| coords[i * dim + a])
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(v), hi.max(v))
            });
        ranges[a] = if n > 0 { hi - lo } else { 0.0 };
    }
    let widest = ranges.iter().copied().fold(0.0, f64::max);
    let fallback = if widest > 0.0 { widest } else { 1.0 };
    for r in &mut ranges {
        if *r <= 0.0 {
            *r = fallback;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    coords
        .iter()
        .enumerate()
        .map(|(i, &v)| v + rng.random_range(-1.0..1.0) * JITTER_SCALE * ranges[i % dim])
        .collect()
}

/// Alpha filtration of a cloud: jitter, triangulate, then measure radii on
/// the original coordinates.
pub fn alpha_filtration(pc: &PointCloud, opts: &AlphaOptions) -> Result<AlphaFiltration> {
    let d = pc.dim();
    if !(3..=4).contains(&d) {
        return Err(Error::InvalidArgument(format!(
            "alpha complex needs 3- or 4-dimensional points, got {d}"
        )));
    }
    if d == 4 && pc.len() > opts.max_points_4d {
        return Err(Error::InvalidArgument(format!(
            "{} points exceed the 4-dimensional limit of {}",
            pc.len(),
            opts.max_points_4d
        )));
    }
    let jittered = jitter(pc.coords(), d, opts.seed);
    let tri = delaunay(&jittered, d)?;
    alpha_values(tri.simplices(), pc.coords(), d)
}

/// Persistence barcodes in dimensions 0..=2 of the alpha filtration.
///
/// Clouds with at most `d` points cannot be triangulated and yield one
/// essential H0 bar per point.
pub fn alpha_persistence(pc: &PointCloud, opts: &AlphaOptions) -> Result<Barcodes> {
    if pc.is_empty() {
        return Err(Error::InvalidArgument("empty point cloud".into()));
    }
    if pc.len() <= pc.dim() {
        let mut out = Barcodes::new(2);
        *out.get_mut(0).expect("dimension 0") =
            Barcode::from_bars(0, (0..pc.len()).map(|_| Bar::essential(0.0)));
        return Ok(out);
    }
    let fc = alpha_filtration(pc, opts)?.to_complex(MAX_CELL_DIM)?;
    Ok(compute_persistence(&fc, 2))
}
