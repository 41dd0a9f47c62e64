//! 3D Morton (Z-order) codes with 21 bits per axis.

use crate::error::{Error, Result};

/// Largest coordinate (exclusive) that fits in a 63-bit code.
pub const MORTON_LIMIT: u64 = 1 << 21;

/// Spreads the low 21 bits of `v` so bit `i` lands on bit `3i`.
#[inline]
fn spread(v: u64) -> u64 {
    let mut x = v & 0x1f_ffff;
    x = (x | x << 32) & 0x001f_0000_0000_ffff;
    x = (x | x << 16) & 0x001f_0000_ff00_00ff;
    x = (x | x << 8) & 0x100f_00f0_0f00_f00f;
    x = (x | x << 4) & 0x10c3_0c30_c30c_30c3;
    x = (x | x << 2) & 0x1249_2492_4924_9249;
    x
}

#[inline]
fn compact(v: u64) -> u64 {
    let mut x = v & 0x1249_2492_4924_9249;
    x = (x ^ (x >> 2)) & 0x10c3_0c30_c30c_30c3;
    x = (x ^ (x >> 4)) & 0x100f_00f0_0f00_f00f;
    x = (x ^ (x >> 8)) & 0x001f_0000_ff00_00ff;
    x = (x ^ (x >> 16)) & 0x001f_0000_0000_ffff;
    x = (x ^ (x >> 32)) & 0x1f_ffff;
    x
}

/// Interleaves coordinates: bit `i` of `x` goes to bit `3i`, of `y` to
/// `3i+1`, of `z` to `3i+2`.
pub fn morton_encode(x: u64, y: u64, z: u64) -> Result<u64> {
    if x >= MORTON_LIMIT || y >= MORTON_LIMIT || z >= MORTON_LIMIT {
        return Err(Error::InvalidArgument(format!(
            "morton coordinate ({x}, {y}, {z}) exceeds 21 bits"
        )));
    }
    Ok(spread(x) | spread(y) << 1 | spread(z) << 2)
}

/// Inverse of [`morton_encode`], returning `(x, y, z)`.
pub fn morton_decode(code: u64) -> (u64, u64, u64) {
    (compact(code), compact(code >> 1), compact(code >> 2))
}
