//! Sublevel-set filtration of a 3D image as a cubical complex.
//!
//! Each voxel is a top-dimensional 3-cube and all of its faces are included.
//! A face takes the minimum value over the voxels it bounds. Cells live on
//! the doubled grid of size `(2nz+1) x (2ny+1) x (2nx+1)`, where a cell's
//! dimension is the number of odd coordinates.

use crate::error::{Error, Result};
use crate::persistence::{compute_persistence, Barcodes, FilteredComplex, FilteredComplexBuilder};
use crate::volume::{Mask, Volume};

const ABSENT: u32 = u32::MAX;

/// Builds the cubical filtration of `v`. With a mask, only ROI voxels become
/// top cubes.
pub fn cubical_filtration(v: &Volume, mask: Option<&Mask>) -> Result<FilteredComplex> {
    if let Some(m) = mask {
        m.check_matches(v)?;
    }
    let [nz, ny, nx] = v.dims();
    let (gz, gy, gx) = (2 * nz + 1, 2 * ny + 1, 2 * nx + 1);
    let cell = |a: usize, b: usize, c: usize| (a * gy + b) * gx + c;

    let mut value = vec![f64::INFINITY; gz * gy * gx];
    let mut any = false;
    for z in 0..nz {
        for y in 0..ny {
            for x in 0..nx {
                if mask.is_some_and(|m| !m.get(z, y, x)) {
                    continue;
                }
                any = true;
                let val = v.get(z, y, x) as f64;
                for a in 2 * z..=2 * z + 2 {
                    for b in 2 * y..=2 * y + 2 {
                        for c in 2 * x..=2 * x + 2 {
                            let slot = &mut value[cell(a, b, c)];
                            if val < *slot {
                                *slot = val;
                            }
                        }
                    }
                }
            }
        }
    }
    if !any {
        return Err(Error::EmptyMask);
    }

    let mut id = vec![ABSENT; value.len()];
    let mut count = 0u32;
    for (i, val) in value.iter().enumerate() {
        if val.is_finite() {
            id[i] = count;
            count += 1;
        }
    }

    let mut builder = FilteredComplexBuilder::with_capacity(count as usize, 6 * count as usize);
    let mut faces = Vec::with_capacity(6);
    for a in 0..gz {
        for b in 0..gy {
            for c in 0..gx {
                let here = cell(a, b, c);
                if id[here] == ABSENT {
                    continue;
                }
                faces.clear();
                let coords = [a, b, c];
                for axis in 0..3 {
                    if coords[axis] % 2 == 1 {
                        for delta in [-1isize, 1] {
                            let mut f = coords;
                            f[axis] = (f[axis] as isize + delta) as usize;
                            faces.push(id[cell(f[0], f[1], f[2])] as usize);
                        }
                    }
                }
                let dim = coords.iter().filter(|&&k| k % 2 == 1).count();
                builder.add_cell(dim, value[here], &faces);
            }
        }
    }
    builder.build()
}

/// Barcodes in dimensions 0..=2 of the cubical sublevel filtration.
pub fn cubical_persistence(v: &Volume, mask: Option<&Mask>) -> Result<Barcodes> {
    let fc = cubical_filtration(v, mask)?;
    Ok(compute_persistence(&fc, 2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::persistence::Bar;

    #[test]
    fn single_cube_closure() {
        let v = Volume::from_fn([1, 1, 1], |_, _, _| 7.0).unwrap();
        let fc = cubical_filtration(&v, None).unwrap();
        assert_eq!(fc.cell_counts(), vec![8, 12, 6, 1]);
        assert!(fc.values().iter().all(|&x| x == 7.0));
    }

    #[test]
    fn shared_face_takes_minimum() {
        let v = Volume::from_fn([1, 1, 2], |_, _, x| (x + 1) as f32).unwrap();
        let fc = cubical_filtration(&v, None).unwrap();
        // 2 cubes, 11 squares: the shared one is the only square at 1 besides cube 1's own 5
        let squares_at_1 = (0..fc.len())
            .filter(|&p| fc.dim(p) == 2 && fc.value(p) == 1.0)
            .count();
        assert_eq!(squares_at_1, 6);
        assert_eq!(fc.cell_counts(), vec![12, 20, 11, 2]);
    }

    #[test]
    fn center_cube_enters_last() {
        let v = Volume::from_fn(
            [3, 3, 3],
            |z, y, x| {
                if (z, y, x) == (1, 1, 1) {
                    9.0
                } else {
                    0.0
                }
            },
        )
        .unwrap();
        let fc = cubical_filtration(&v, None).unwrap();
        let last = fc.len() - 1;
        assert_eq!(fc.dim(last), 3);
        assert_eq!(fc.value(last), 9.0);
        assert!((0..last).all(|p| fc.value(p) == 0.0));
        assert_eq!(fc.len(), 7 * 7 * 7);
    }

    #[test]
    fn constant_volume_is_contractible() {
        let v = Volume::from_fn([3, 4, 2], |_, _, _| 5.0).unwrap();
        let bc = cubical_persistence(&v, None).unwrap();
        assert_eq!(bc.dim(0).bars(), &[Bar::essential(5.0)]);
        assert!(bc.dim(1).is_empty() && bc.dim(2).is_empty());
    }

    #[test]
    fn hollow_shell_void() {
        let v = Volume::from_fn(
            [3, 3, 3],
            |z, y, x| {
                if (z, y, x) == (1, 1, 1) {
                    9.0
                } else {
                    0.0
                }
            },
        )
        .unwrap();
        let bc = cubical_persistence(&v, Some(&Mask::full([3, 3, 3]).unwrap())).unwrap();
        assert_eq!(bc.dim(0).bars(), &[Bar::essential(0.0)]);
        assert!(bc.dim(1).is_empty());
        assert_eq!(bc.dim(2).bars(), &[Bar::new(0.0, 9.0)]);
    }

    #[test]
    fn masked_blobs_stay_apart() {
        let v = Volume::from_fn([1, 1, 5], |_, _, x| if x < 2 { 3.0 } else { 8.0 }).unwrap();
        let m = Mask::from_fn([1, 1, 5], |_, _, x| x != 2).unwrap();
        let bc = cubical_persistence(&v, Some(&m)).unwrap();
        assert_eq!(
            bc.dim(0).sorted(),
            vec![Bar::essential(3.0), Bar::essential(8.0)]
        );
        let empty = Mask::new([1, 1, 5], vec![0; 5]).unwrap();
        assert!(matches!(
            cubical_persistence(&v, Some(&empty)),
            Err(Error::EmptyMask)
        ));
    }

    #[test]
    fn full_grid_cell_count() {
        for dims in [[1, 1, 1], [2, 3, 4], [4, 4, 4], [1, 5, 2]] {
            let v = Volume::from_fn(dims, |z, y, x| (z + 2 * y + 3 * x) as f32).unwrap();
            let fc = cubical_filtration(&v, None).unwrap();
            assert_eq!(
                fc.len(),
                (2 * dims[0] + 1) * (2 * dims[1] + 1) * (2 * dims[2] + 1)
            );
        }
    }
}
