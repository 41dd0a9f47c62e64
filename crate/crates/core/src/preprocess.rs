//! Resampling, ROI masking and cropping.

use crate::error::{Error, Result};
use crate::volume::{Dims, Mask, Volume};

/// Default crop margin in voxels.
pub const DEFAULT_PAD: usize = 2;

fn check_spacing(spacing: [f64; 3]) -> Result<()> {
    if spacing.iter().any(|&s| !(s > 0.0) || !s.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "target spacing must be positive, got {spacing:?}"
        )));
    }
    Ok(())
}

fn resampled_dims(dims: Dims, from: [f64; 3], to: [f64; 3]) -> Dims {
    let mut out = [0; 3];
    for a in 0..3 {
        out[a] = ((dims[a] as f64 * from[a] / to[a]).round() as usize).max(1);
    }
    out
}

/// Input-index coordinate of output index `j` along one axis. The first
/// voxel centers coincide; positions past the last input voxel clamp to it.
#[inline]
fn source_coord(j: usize, ratio: f64, n_in: usize) -> f64 {
    (j as f64 * ratio).min((n_in - 1) as f64)
}

/// Trilinear resampling to `target` spacing. Output dims are
/// `round(dims * spacing / target)` with a minimum of one voxel per axis.
pub fn resample(v: &Volume, target: [f64; 3]) -> Result<Volume> {
    check_spacing(target)?;
    let dims = v.dims();
    let spacing = v.spacing();
    if spacing == target {
        return Ok(v.clone());
    }
    let out_dims = resampled_dims(dims, spacing, target);
    let ratio: Vec<f64> = (0..3).map(|a| target[a] / spacing[a]).collect();

    // separable weights per axis: (lower index, upper index, upper weight)
    let axis = |a: usize| -> Vec<(usize, usize, f64)> {
        (0..out_dims[a])
            .map(|j| {
                let c = source_coord(j, ratio[a], dims[a]);
                let lo = c.floor() as usize;
                let hi = (lo + 1).min(dims[a] - 1);
                (lo, hi, c - lo as f64)
            })
            .collect()
    };
    let (wz, wy, wx) = (axis(0), axis(1), axis(2));

    let mut data = Vec::with_capacity(out_dims.iter().product());
    for &(z0, z1, tz) in &wz {
        for &(y0, y1, ty) in &wy {
            for &(x0, x1, tx) in &wx {
                let g = |z, y, x| v.get(z, y, x) as f64;
                let c00 = g(z0, y0, x0) * (1.0 - tx) + g(z0, y0, x1) * tx;
                let c01 = g(z0, y1, x0) * (1.0 - tx) + g(z0, y1, x1) * tx;
                let c10 = g(z1, y0, x0) * (1.0 - tx) + g(z1, y0, x1) * tx;
                let c11 = g(z1, y1, x0) * (1.0 - tx) + g(z1, y1, x1) * tx;
                let c0 = c00 * (1.0 - ty) + c01 * ty;
                let c1 = c10 * (1.0 - ty) + c11 * ty;
                data.push((c0 * (1.0 - tz) + c1 * tz) as f32);
            }
        }
    }
    Volume::new(out_dims, target, data)
}

/// Nearest-neighbour resampling of a mask onto the grid `resample` would
/// produce for a volume with `from` spacing.
pub fn resample_mask(m: &Mask, from: [f64; 3], target: [f64; 3]) -> Result<Mask> {
    check_spacing(from)?;
    check_spacing(target)?;
    if from == target {
        return Ok(m.clone());
    }
    let dims = m.dims();
    let out_dims = resampled_dims(dims, from, target);
    let idx = |a: usize| -> Vec<usize> {
        (0..out_dims[a])
            .map(|j| source_coord(j, target[a] / from[a], dims[a]).round() as usize)
            .collect()
    };
    let (iz, iy, ix) = (idx(0), idx(1), idx(2));
    Mask::from_fn(out_dims, |z, y, x| m.get(iz[z], iy[y], ix[x]))
}

/// Result of [`mask_and_crop`].
#[derive(Debug, Clone, PartialEq)]
pub struct Cropped {
    pub volume: Volume,
    pub mask: Mask,
    /// Index of the crop origin in the input grid, `[z, y, x]`.
    pub offset: [usize; 3],
}

/// Masks `v` to the ROI and crops to the ROI bounding box grown by `pad`.
///
/// ROI intensities are shifted so the ROI minimum becomes 1 and background
/// voxels are set to 0, so background never enters a sublevel filtration
/// before an ROI voxel and coincides with the zero padding used for partial
/// patches.
pub fn mask_and_crop(v: &Volume, m: &Mask, pad: usize) -> Result<Cropped> {
    m.check_matches(v)?;
    let dims = v.dims();
    let mut lo = dims;
    let mut hi = [0usize; 3];
    let mut roi_min = f32::INFINITY;
    let mut any = false;
    for z in 0..dims[0] {
        for y in 0..dims[1] {
            for x in 0..dims[2] {
                if m.get(z, y, x) {
                    any = true;
                    for (a, c) in [z, y, x].into_iter().enumerate() {
                        lo[a] = lo[a].min(c);
                        hi[a] = hi[a].max(c);
                    }
                    roi_min = roi_min.min(v.get(z, y, x));
                }
            }
        }
    }
    if !any {
        return Err(Error::EmptyMask);
    }
    let start: [usize; 3] = std::array::from_fn(|a| lo[a].saturating_sub(pad));
    let end: [usize; 3] = std::array::from_fn(|a| (hi[a] + pad).min(dims[a] - 1));
    let out_dims: Dims = std::array::from_fn(|a| end[a] - start[a] + 1);
    let shift = 1.0 - roi_min as f64;

    let volume = Volume::from_fn(out_dims, |z, y, x| {
        let (sz, sy, sx) = (z + start[0], y + start[1], x + start[2]);
        if m.get(sz, sy, sx) {
            (v.get(sz, sy, sx) as f64 + shift) as f32
        } else {
            0.0
        }
    })?
    .with_spacing(v.spacing())?;
    let mask = Mask::from_fn(out_dims, |z, y, x| {
        m.get(z + start[0], y + start[1], x + start[2])
    })?;
    Ok(Cropped {
        volume,
        mask,
        offset: start,
    })
}

/// Per-axis arithmetic mean of the spacings.
pub fn average_spacing<'a>(volumes: impl IntoIterator<Item = &'a Volume>) -> Result<[f64; 3]> {
    let mut sum = [0.0; 3];
    let mut n = 0usize;
    for v in volumes {
        for (s, vs) in sum.iter_mut().zip(v.spacing()) {
            *s += vs;
        }
        n += 1;
    }
    if n == 0 {
        return Err(Error::InvalidArgument(
            "average spacing of an empty sequence".into(),
        ));
    }
    Ok(sum.map(|s| s / n as f64))
}
