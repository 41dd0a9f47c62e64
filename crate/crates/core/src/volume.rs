//! Volumetric image and ROI mask containers.

use crate::error::{Error, Result};

/// Grid shape as `[nz, ny, nx]`.
pub type Dims = [usize; 3];

/// A 3D scalar image with physical voxel spacing (mm), stored row-major
/// with `x` varying fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Volume {
    dims: Dims,
    spacing: [f64; 3],
    data: Vec<f32>,
}

impl Volume {
    pub fn new(dims: Dims, spacing: [f64; 3], data: Vec<f32>) -> Result<Self> {
        check_dims(dims)?;
        if spacing.iter().any(|&s| !(s > 0.0) || !s.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "spacing must be positive, got {spacing:?}"
            )));
        }
        let expected = dims.iter().product();
        if data.len() != expected {
            return Err(Error::SizeMismatch {
                expected,
                actual: data.len(),
            });
        }
        if let Some(index) = data.iter().position(|v| v.is_nan()) {
            return Err(Error::NaN { index });
        }
        Ok(Volume {
            dims,
            spacing,
            data,
        })
    }

    /// Builds a unit-spacing volume by evaluating `f(z, y, x)` at every voxel.
    pub fn from_fn(dims: Dims, mut f: impl FnMut(usize, usize, usize) -> f32) -> Result<Self> {
        let mut data = Vec::with_capacity(dims.iter().product());
        for z in 0..dims[0] {
            for y in 0..dims[1] {
                for x in 0..dims[2] {
                    data.push(f(z, y, x));
                }
            }
        }
        Volume::new(dims, [1.0; 3], data)
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn spacing(&self) -> [f64; 3] {
        self.spacing
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn index(&self, z: usize, y: usize, x: usize) -> usize {
        (z * self.dims[1] + y) * self.dims[2] + x
    }

    #[inline]
    pub fn get(&self, z: usize, y: usize, x: usize) -> f32 {
        self.data[self.index(z, y, x)]
    }

    pub fn with_spacing(mut self, spacing: [f64; 3]) -> Result<Self> {
        if spacing.iter().any(|&s| !(s > 0.0) || !s.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "spacing must be positive, got {spacing:?}"
            )));
        }
        self.spacing = spacing;
        Ok(self)
    }
}

/// Binary region-of-interest mask paired with a [`Volume`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    dims: Dims,
    data: Vec<u8>,
}

impl Mask {
    pub fn new(dims: Dims, data: Vec<u8>) -> Result<Self> {
        check_dims(dims)?;
        let expected = dims.iter().product();
        if data.len() != expected {
            return Err(Error::SizeMismatch {
                expected,
                actual: data.len(),
            });
        }
        if let Some(i) = data.iter().position(|&v| v > 1) {
            return Err(Error::Format(format!(
                "mask value {} at sample {i} is not binary",
                data[i]
            )));
        }
        Ok(Mask { dims, data })
    }

    pub fn full(dims: Dims) -> Result<Self> {
        Mask::new(dims, vec![1; dims.iter().product()])
    }

    pub fn from_fn(dims: Dims, mut f: impl FnMut(usize, usize, usize) -> bool) -> Result<Self> {
        let mut data = Vec::with_capacity(dims.iter().product());
        for z in 0..dims[0] {
            for y in 0..dims[1] {
                for x in 0..dims[2] {
                    data.push(f(z, y, x) as u8);
                }
            }
        }
        Mask::new(dims, data)
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    #[inline]
    pub fn get(&self, z: usize, y: usize, x: usize) -> bool {
        self.data[(z * self.dims[1] + y) * self.dims[2] + x] != 0
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&v| v != 0).count()
    }

    /// Fails unless this mask matches `volume` voxel for voxel.
    pub fn check_matches(&self, volume: &Volume) -> Result<()> {
        if self.dims != volume.dims() {
            return Err(Error::DimMismatch(volume.dims(), self.dims));
        }
        Ok(())
    }
}

fn check_dims(dims: Dims) -> Result<()> {
    if dims.contains(&0) {
        return Err(Error::InvalidArgument(format!(
            "dims must be positive, got {dims:?}"
        )));
    }
    Ok(())
}
