//! Synthetic volumes for tests, demos and benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::volume::{Dims, Mask, Volume};

/// A ball-shaped ROI, optionally with a darker core.
#[derive(Clone, Debug, PartialEq)]
pub struct SphereSpec {
    pub size: usize,
    /// Centre in voxel coordinates `[z, y, x]`.
    pub center: [f64; 3],
    pub radius: f64,
    /// Radius of the darker core; `None` for a solid ball.
    pub core_radius: Option<f64>,
    pub inside: f32,
    pub core: f32,
    pub background: f32,
    /// Half-width of uniform intensity noise.
    pub noise: f32,
    pub seed: u64,
}

impl SphereSpec {
    pub fn solid(size: usize, radius: f64) -> Self {
        let c = (size as f64 - 1.0) / 2.0;
        SphereSpec {
            size,
            center: [c; 3],
            radius,
            core_radius: None,
            inside: 100.0,
            core: 20.0,
            background: 0.0,
            noise: 0.0,
            seed: 0,
        }
    }

    pub fn render(&self) -> Result<(Volume, Mask)> {
        let dims: Dims = [self.size; 3];
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let dist = |z: usize, y: usize, x: usize| {
            let p = [z as f64, y as f64, x as f64];
            (0..3)
                .map(|a| (p[a] - self.center[a]).powi(2))
                .sum::<f64>()
                .sqrt()
        };
        let volume = Volume::from_fn(dims, |z, y, x| {
            let r = dist(z, y, x);
            let base = if r > self.radius {
                self.background
            } else if self.core_radius.is_some_and(|c| r <= c) {
                self.core
            } else {
                self.inside
            };
            let n: f32 = if self.noise > 0.0 {
                rng.random_range(-self.noise..self.noise)
            } else {
                0.0
            };
            base + n
        })?;
        let mask = Mask::from_fn(dims, |z, y, x| dist(z, y, x) <= self.radius)?;
        Ok((volume, mask))
    }
}

/// Randomized ball for two-class experiments: radius, centre and noise vary
/// with `seed`; `hollow` adds a dark core of half the radius.
pub fn random_sphere(size: usize, hollow: bool, seed: u64) -> Result<(Volume, Mask)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = size as f64;
    let radius = rng.random_range(0.28 * s..0.36 * s);
    let c = (s - 1.0) / 2.0;
    let center = std::array::from_fn(|_| c + rng.random_range(-0.05 * s..0.05 * s));
    SphereSpec {
        size,
        center,
        radius,
        core_radius: hollow.then(|| radius * rng.random_range(0.45..0.6)),
        inside: rng.random_range(90.0..110.0),
        core: rng.random_range(15.0..25.0),
        background: 0.0,
        noise: 10.0,
        seed: rng.random(),
    }
    .render()
}

/// Cube of side `n` whose boundary layer holds `shell` and whose interior
/// holds `center`; the mask keeps everything.
pub fn hollow_shell(n: usize, shell: f32, center: f32) -> Result<(Volume, Mask)> {
    let dims = [n; 3];
    let v = Volume::from_fn(dims, |z, y, x| {
        let edge = [z, y, x].iter().any(|&c| c == 0 || c == n - 1);
        if edge {
            shell
        } else {
            center
        }
    })?;
    Ok((v, Mask::full(dims)?))
}

/// Two separated cubes of side `side` inside an `n`-cube; the mask covers
/// only the cubes.
pub fn two_blobs(n: usize, side: usize) -> Result<(Volume, Mask)> {
    let dims = [n; 3];
    let inside = |z: usize, y: usize, x: usize| {
        let a = z < side && y < side && x < side;
        let b = z >= n - side && y >= n - side && x >= n - side;
        a || b
    };
    let v = Volume::from_fn(dims, |z, y, x| {
        (z + y + x) as f32 + if inside(z, y, x) { 0.0 } else { 1000.0 }
    })?;
    Ok((v, Mask::from_fn(dims, inside)?))
}

/// Uniform noise volume with a spherical mask filling most of the grid.
pub fn random_masked(n: usize, seed: u64) -> Result<(Volume, Mask)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = (n as f64 - 1.0) / 2.0;
    let r2 = (0.45 * n as f64).powi(2);
    let v = Volume::from_fn([n; 3], |_, _, _| rng.random_range(0.0..1000.0f32).round())?;
    let m = Mask::from_fn([n; 3], |z, y, x| {
        (z as f64 - c).powi(2) + (y as f64 - c).powi(2) + (x as f64 - c).powi(2) <= r2
    })?;
    Ok((v, m))
}
