//! Alpha values on the faces of a triangulation.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::persistence::{FilteredComplex, FilteredComplexBuilder};

const MAX_V: usize = 5;
const PAD: u32 = u32::MAX;

/// Relative slack when deciding whether a vertex lies strictly inside a
/// smallest circumsphere.
const GABRIEL_TOL: f64 = 1e-10;

/// Highest cell dimension handed to persistence.
pub const MAX_CELL_DIM: usize = 3;

#[derive(Clone, Debug, Default)]
struct Level {
    simplices: Vec<[u32; MAX_V]>,
    values: Vec<f64>,
    /// `k + 1` facet indices per simplex of dimension `k`.
    facets: Vec<u32>,
}

/// All faces of a triangulation with their alpha values (squared radii).
#[derive(Clone, Debug)]
pub struct AlphaFiltration {
    levels: Vec<Level>,
}

impl AlphaFiltration {
    /// Dimension of the largest simplices.
    pub fn top_dim(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn count(&self, k: usize) -> usize {
        self.levels.get(k).map_or(0, |l| l.simplices.len())
    }

    /// Simplices of dimension `k` with their values.
    pub fn simplices(&self, k: usize) -> impl Iterator<Item = (&[u32], f64)> + '_ {
        self.levels
            .get(k)
            .into_iter()
            .flat_map(move |l| l.simplices.iter().zip(&l.values))
            .map(move |(s, &v)| (&s[..=k], v))
    }

    /// Value of the simplex with the given (sorted) vertices.
    pub fn value_of(&self, vertices: &[u32]) -> Option<f64> {
        let k = vertices.len().checked_sub(1)?;
        self.simplices(k)
            .find(|(s, _)| *s == vertices)
            .map(|(_, v)| v)
    }

    /// True when every face enters no later than its cofaces.
    pub fn is_monotone(&self) -> bool {
        (1..self.levels.len()).all(|k| {
            let l = &self.levels[k];
            (0..l.simplices.len()).all(|j| {
                l.facets[j * (k + 1)..(j + 1) * (k + 1)]
                    .iter()
                    .all(|&f| self.levels[k - 1].values[f as usize] <= l.values[j])
            })
        })
    }

    /// Filtered complex of all finite-valued cells up to `max_dim`.
    pub fn to_complex(&self, max_dim: usize) -> Result<FilteredComplex> {
        let top = self.top_dim().min(max_dim);
        let total: usize = (0..=top).map(|k| self.count(k)).sum();
        let mut b = FilteredComplexBuilder::with_capacity(total, total * 4);
        let mut ids: Vec<Vec<usize>> = Vec::with_capacity(top + 1);
        let mut faces = Vec::with_capacity(MAX_V);
        for k in 0..=top {
            let l = &self.levels[k];
            let mut level_ids = vec![usize::MAX; l.simplices.len()];
            for (j, &v) in l.values.iter().enumerate() {
                if !v.is_finite() {
                    continue;
                }
                faces.clear();
                if k > 0 {
                    for &f in &l.facets[j * (k + 1)..(j + 1) * (k + 1)] {
                        faces.push(ids[k - 1][f as usize]);
                    }
                }
                level_ids[j] = b.add_cell(k, v, &faces);
            }
            ids.push(level_ids);
        }
        b.build()
    }
}

/// Centre and squared radius of the smallest sphere through `pts`, or
/// `None` when no such sphere exists (e.g. three collinear points).
pub fn smallest_circumsphere(pts: &[&[f64]]) -> Option<(Vec<f64>, f64)> {
    let p0 = pts[0];
    let d = p0.len();
    let k = pts.len() - 1;
    if k == 0 {
        return Some((p0.to_vec(), 0.0));
    }
    let diffs: Vec<Vec<f64>> = pts[1..]
        .iter()
        .map(|p| p.iter().zip(p0).map(|(a, b)| a - b).collect())
        .collect();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let mut gram = vec![vec![0.0; k]; k];
    let mut rhs = vec![0.0; k];
    for i in 0..k {
        for j in 0..k {
            gram[i][j] = dot(&diffs[i], &diffs[j]);
        }
        rhs[i] = 0.5 * gram[i][i];
    }
    let lambda = solve_small(&gram, &rhs).or_else(|| solve_pinv(&gram, &rhs))?;
    let mut offset = vec![0.0; d];
    for (l, diff) in lambda.iter().zip(&diffs) {
        for a in 0..d {
            offset[a] += l * diff[a];
        }
    }
    let r2 = dot(&offset, &offset);
    let center = p0.iter().zip(&offset).map(|(p, o)| p + o).collect();
    Some((center, r2))
}

/// Gaussian elimination with partial pivoting; `None` if near-singular.
fn solve_small(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let scale = (0..n).map(|i| a[i][i].abs()).fold(0.0, f64::max);
    if scale == 0.0 {
        return None;
    }
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut x = b.to_vec();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap();
        if m[piv][col].abs() <= 1e-12 * scale {
            return None;
        }
        m.swap(col, piv);
        x.swap(col, piv);
        for r in col + 1..n {
            let f = m[r][col] / m[col][col];
            for c in col..n {
                m[r][c] -= f * m[col][c];
            }
            x[r] -= f * x[col];
        }
    }
    for col in (0..n).rev() {
        let mut s = x[col];
        for c in col + 1..n {
            s -= m[col][c] * x[c];
        }
        x[col] = s / m[col][col];
    }
    Some(x)
}

/// Minimum-norm least-squares solution, accepted only if it solves the
/// system (the points are cospherical within their affine hull).
fn solve_pinv(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let m = DMatrix::from_fn(n, n, |i, j| a[i][j]);
    let rhs = DVector::from_column_slice(b);
    let scale = (0..n).map(|i| a[i][i].abs()).fold(0.0, f64::max);
    let svd = m.clone().svd(true, true);
    let x = svd.solve(&rhs, 1e-10 * scale).ok()?;
    let residual = (&m * &x - &rhs).norm();
    if residual <= 1e-8 * rhs.norm().max(f64::MIN_POSITIVE) {
        Some(x.iter().copied().collect())
    } else {
        None
    }
}

fn key_of(v: &[u32]) -> [u32; MAX_V] {
    let mut k = [PAD; MAX_V];
    k[..v.len()].copy_from_slice(v);
    k
}

/// Alpha values for the faces of `simplices` (maximal simplices, all of the
/// same size) over `coords` (row-major, `dim` per point).
///
/// A simplex whose vertices admit no common sphere (e.g. three collinear
/// points) gets an infinite value, as do its cofaces.
pub fn alpha_values<'s>(
    simplices: impl IntoIterator<Item = &'s [u32]>,
    coords: &[f64],
    dim: usize,
) -> Result<AlphaFiltration> {
    let mut top: Vec<[u32; MAX_V]> = Vec::new();
    let mut size = None;
    for s in simplices {
        if s.is_empty() || s.len() > MAX_V || *size.get_or_insert(s.len()) != s.len() {
            return Err(Error::InvalidArgument(
                "maximal simplices must share one size of at most 5 vertices".into(),
            ));
        }
        if s.iter().any(|&v| (v as usize + 1) * dim > coords.len()) {
            return Err(Error::InvalidArgument("simplex vertex out of range".into()));
        }
        let mut sorted = s.to_vec();
        sorted.sort_unstable();
        top.push(key_of(&sorted));
    }
    let Some(size) = size else {
        return Err(Error::InvalidArgument("no simplices".into()));
    };
    let top_dim = size - 1;

    // enumerate faces level by level, recording facets and cofaces
    let mut levels: Vec<Level> = vec![Level::default(); top_dim + 1];
    levels[top_dim].simplices = top;
    let mut cofaces: Vec<Vec<Vec<(u32, u32)>>> = vec![Vec::new(); top_dim + 1];
    for k in (1..=top_dim).rev() {
        let mut index: HashMap<[u32; MAX_V], u32> = HashMap::new();
        let mut lower: Vec<[u32; MAX_V]> = Vec::new();
        let mut cof: Vec<Vec<(u32, u32)>> = Vec::new();
        let mut facets = Vec::with_capacity(levels[k].simplices.len() * (k + 1));
        for (j, s) in levels[k].simplices.iter().enumerate() {
            for skip in 0..=k {
                let mut f = [PAD; MAX_V];
                let mut t = 0;
                for (i, &v) in s[..=k].iter().enumerate() {
                    if i != skip {
                        f[t] = v;
                        t += 1;
                    }
                }
                let id = *index.entry(f).or_insert_with(|| {
                    lower.push(f);
                    cof.push(Vec::new());
                    (lower.len() - 1) as u32
                });
                cof[id as usize].push((j as u32, s[skip]));
                facets.push(id);
            }
        }
        levels[k].facets = facets;
        levels[k - 1].simplices = lower;
        cofaces[k - 1] = cof;
    }

    let sphere = |s: &[u32]| -> Option<(Vec<f64>, f64)> {
        let pts: Vec<&[f64]> = s
            .iter()
            .map(|&v| &coords[v as usize * dim..(v as usize + 1) * dim])
            .collect();
        smallest_circumsphere(&pts)
    };

    levels[top_dim].values = levels[top_dim]
        .simplices
        .iter()
        .map(|s| sphere(&s[..=top_dim]).map_or(f64::INFINITY, |(_, r2)| r2))
        .collect();
    for k in (1..top_dim).rev() {
        let (below, above) = levels.split_at_mut(k + 1);
        let level = &mut below[k];
        let upper = &above[0];
        level.values = level
            .simplices
            .iter()
            .zip(&cofaces[k])
            .map(|(s, cof)| {
                let Some((center, r2)) = sphere(&s[..=k]) else {
                    return f64::INFINITY;
                };
                let attached = cof.iter().any(|&(_, w)| {
                    let p = &coords[w as usize * dim..(w as usize + 1) * dim];
                    let d2: f64 = p.iter().zip(&center).map(|(a, b)| (a - b) * (a - b)).sum();
                    d2 < r2 * (1.0 - GABRIEL_TOL)
                });
                if attached {
                    cof.iter()
                        .map(|&(c, _)| upper.values[c as usize])
                        .fold(f64::INFINITY, f64::min)
                } else {
                    r2
                }
            })
            .collect();
    }
    levels[0].values = vec![0.0; levels[0].simplices.len()];
    if top_dim == 0 {
        return Ok(AlphaFiltration { levels });
    }

    // numerical safety net: a face never enters after a coface
    for k in 1..=top_dim {
        let (below, above) = levels.split_at_mut(k);
        let lower = &below[k - 1];
        let level = &mut above[0];
        for j in 0..level.simplices.len() {
            let m = level.facets[j * (k + 1)..(j + 1) * (k + 1)]
                .iter()
                .map(|&f| lower.values[f as usize])
                .fold(level.values[j], f64::max);
            level.values[j] = m;
        }
    }
    Ok(AlphaFiltration { levels })
}
