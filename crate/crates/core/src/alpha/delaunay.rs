//! Incremental Delaunay triangulation (Bowyer-Watson) in 3 or 4 dimensions.
//!
//! The convex hull is closed off with ghost cells sharing one vertex at
//! infinity, so every cell has a full set of neighbours. Points are inserted
//! in input order; duplicates are skipped.

use std::collections::HashMap;

use super::predicates::Predicates;
use crate::error::{Error, Result};

const INF: u32 = u32::MAX;
const NONE: u32 = u32::MAX;
const MAX_V: usize = 5;

#[derive(Clone, Debug)]
struct Cell {
    v: [u32; MAX_V],
    n: [u32; MAX_V],
    alive: bool,
}

impl Cell {
    fn is_ghost(&self, k: usize) -> bool {
        self.v[..k].contains(&INF)
    }
}

/// Result of a triangulation.
#[derive(Clone, Debug)]
pub struct Triangulation {
    dim: usize,
    simplices: Vec<[u32; MAX_V]>,
    skipped: Vec<usize>,
}

impl Triangulation {
    /// Ambient dimension.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Top-dimensional simplices, each with sorted vertex indices.
    pub fn simplices(&self) -> impl ExactSizeIterator<Item = &[u32]> + '_ {
        self.simplices.iter().map(move |s| &s[..=self.dim])
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    /// Indices of input points left out as exact duplicates.
    pub fn skipped(&self) -> &[usize] {
        &self.skipped
    }
}

struct Builder<'a> {
    k: usize,
    pred: Predicates<'a>,
    cells: Vec<Cell>,
    free: Vec<u32>,
    stamp: Vec<u32>,
    epoch: u32,
    hint: u32,
    rng: u64,
}

fn ridge_key(v: &[u32], skip: usize, k: usize) -> [u32; MAX_V] {
    let mut key = [NONE; MAX_V];
    let mut j = 0;
    for (i, &x) in v[..k].iter().enumerate() {
        if i != skip {
            key[j] = x;
            j += 1;
        }
    }
    key[..j].sort_unstable();
    key
}

impl<'a> Builder<'a> {
    fn verts(&self, c: u32) -> Vec<usize> {
        self.cells[c as usize].v[..self.k]
            .iter()
            .map(|&x| x as usize)
            .collect()
    }

    fn alloc(&mut self, cell: Cell) -> u32 {
        if let Some(id) = self.free.pop() {
            self.cells[id as usize] = cell;
            id
        } else {
            self.cells.push(cell);
            self.stamp.push(0);
            (self.cells.len() - 1) as u32
        }
    }

    fn next_rand(&mut self) -> u64 {
        // xorshift64: only used to vary the facet scan order during walks
        let mut x = self.rng;
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        self.rng = x;
        x
    }

    /// Links every listed cell to the others across shared facets.
    fn link(&mut self, ids: &[u32]) {
        let k = self.k;
        let mut open: HashMap<[u32; MAX_V], (u32, usize)> = HashMap::new();
        for &c in ids {
            for i in 0..k {
                if self.cells[c as usize].n[i] != NONE {
                    continue;
                }
                let key = ridge_key(&self.cells[c as usize].v, i, k);
                if let Some((other, j)) = open.remove(&key) {
                    self.cells[c as usize].n[i] = other;
                    self.cells[other as usize].n[j] = c;
                } else {
                    open.insert(key, (c, i));
                }
            }
        }
        debug_assert!(open.is_empty(), "unmatched facets");
    }

    fn init(&mut self, first: &[usize]) {
        let k = self.k;
        let mut v = [NONE; MAX_V];
        for (i, &p) in first.iter().enumerate() {
            v[i] = p as u32;
        }
        if self.pred.orient(first) < 0 {
            v.swap(0, 1);
        }
        let root = self.alloc(Cell {
            v,
            n: [NONE; MAX_V],
            alive: true,
        });
        let mut ids = vec![root];
        for i in 0..k {
            let mut g = v;
            g[i] = INF;
            // an odd permutation keeps orientations consistent across the facet
            let (a, b) = match i {
                0 => (1, 2),
                1 => (0, 2),
                _ => (0, 1),
            };
            g.swap(a, b);
            ids.push(self.alloc(Cell {
                v: g,
                n: [NONE; MAX_V],
                alive: true,
            }));
        }
        self.link(&ids);
        self.hint = root;
    }

    fn with_vertex(&self, c: u32, slot: usize, p: usize) -> Vec<usize> {
        let mut v = self.verts(c);
        v[slot] = p;
        v
    }

    fn in_conflict(&self, c: u32, p: usize) -> bool {
        let cell = &self.cells[c as usize];
        match cell.v[..self.k].iter().position(|&x| x == INF) {
            None => self.pred.insphere(&self.verts(c), p) > 0,
            Some(slot) => {
                let o = self.pred.orient(&self.with_vertex(c, slot, p));
                if o != 0 {
                    return o > 0;
                }
                let finite = cell.n[slot];
                self.pred.insphere(&self.verts(finite), p) > 0
            }
        }
    }

    /// Walks from the hint towards `p`; returns a cell whose closure holds `p`
    /// or a ghost cell whose hull facet sees `p`.
    fn locate(&mut self, p: usize) -> Option<u32> {
        let k = self.k;
        let mut c = self.hint;
        if !self.cells[c as usize].alive || self.cells[c as usize].is_ghost(k) {
            c = self
                .cells
                .iter()
                .position(|cell| cell.alive && !cell.is_ghost(k))? as u32;
        }
        let limit = 4 * self.cells.len() + 64;
        'walk: for _ in 0..limit {
            let cell = &self.cells[c as usize];
            if cell.is_ghost(k) {
                return Some(c);
            }
            let start = (self.next_rand() % k as u64) as usize;
            for step in 0..k {
                let i = (start + step) % k;
                if self.pred.orient(&self.with_vertex(c, i, p)) < 0 {
                    c = self.cells[c as usize].n[i];
                    continue 'walk;
                }
            }
            return Some(c);
        }
        None
    }

    fn insert(&mut self, p: usize) -> bool {
        let k = self.k;
        let mut start = self.locate(p).filter(|&c| self.in_conflict(c, p));
        if start.is_none() {
            start = (0..self.cells.len() as u32)
                .find(|&c| self.cells[c as usize].alive && self.in_conflict(c, p));
        }
        let Some(start) = start else {
            return false;
        };

        // stamp == 2 * epoch marks cavity cells, 2 * epoch + 1 rejected ones
        if self.epoch >= u32::MAX / 2 - 1 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.epoch = 0;
        }
        self.epoch += 1;
        let inside = 2 * self.epoch;
        let outside = inside + 1;
        let mut cavity = vec![start];
        self.stamp[start as usize] = inside;
        let mut boundary: Vec<(u32, usize)> = Vec::new();
        let mut head = 0;
        while head < cavity.len() {
            let c = cavity[head];
            head += 1;
            for i in 0..k {
                let nb = self.cells[c as usize].n[i];
                let s = self.stamp[nb as usize];
                if s == inside {
                    continue;
                }
                if s != outside && self.in_conflict(nb, p) {
                    self.stamp[nb as usize] = inside;
                    cavity.push(nb);
                } else {
                    self.stamp[nb as usize] = outside;
                    boundary.push((c, i));
                }
            }
        }

        let mut created = Vec::with_capacity(boundary.len());
        for &(c, i) in &boundary {
            let old = &self.cells[c as usize];
            let mut v = old.v;
            v[i] = p as u32;
            let outside = old.n[i];
            let mut n = [NONE; MAX_V];
            n[i] = outside;
            let id = self.alloc(Cell { v, n, alive: true });
            let back = self.cells[outside as usize].n[..k]
                .iter()
                .position(|&x| x == c)
                .expect("neighbour symmetry");
            self.cells[outside as usize].n[back] = id;
            created.push(id);
        }
        for &c in &cavity {
            self.cells[c as usize].alive = false;
            self.free.push(c);
        }
        self.link(&created);
        if let Some(&last) = created
            .iter()
            .rev()
            .find(|&&c| !self.cells[c as usize].is_ghost(k))
        {
            self.hint = last;
        }
        true
    }
}

fn affinely_independent(coords: &[f64], dim: usize, cand: &[usize]) -> bool {
    // Gram-Schmidt on differences with a relative tolerance
    let p0 = &coords[cand[0] * dim..(cand[0] + 1) * dim];
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for &c in &cand[1..] {
        let p = &coords[c * dim..(c + 1) * dim];
        let mut v: Vec<f64> = p.iter().zip(p0).map(|(a, b)| a - b).collect();
        let scale = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        for b in &basis {
            let dot: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= dot * y);
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if scale == 0.0 || norm <= 1e-13 * scale {
            return false;
        }
        basis.push(v.into_iter().map(|x| x / norm).collect());
    }
    true
}

/// Delaunay triangulation of `coords` (row-major, `dim` per point).
pub fn delaunay(coords: &[f64], dim: usize) -> Result<Triangulation> {
    if !(3..=4).contains(&dim) {
        return Err(Error::InvalidArgument(format!(
            "triangulation dimension must be 3 or 4, got {dim}"
        )));
    }
    if !coords.len().is_multiple_of(dim) {
        return Err(Error::InvalidArgument(
            "coordinate length not a multiple of dim".into(),
        ));
    }
    let n = coords.len() / dim;
    let k = dim + 1;
    if n < k {
        return Err(Error::InvalidArgument(format!(
            "need at least {k} points for a {dim}-dimensional triangulation, got {n}"
        )));
    }
    let pred = Predicates::new(dim, coords);

    let mut first: Vec<usize> = vec![0];
    for i in 1..n {
        if first.len() == k {
            break;
        }
        let mut cand = first.clone();
        cand.push(i);
        if affinely_independent(coords, dim, &cand) {
            first = cand;
        }
    }
    if first.len() < k || pred.orient(&first) == 0 {
        return Err(Error::Numerical(
            "points are affinely dependent; no full-dimensional simplex".into(),
        ));
    }

    let mut b = Builder {
        k,
        pred,
        cells: Vec::with_capacity(n * 8),
        free: Vec::new(),
        stamp: Vec::with_capacity(n * 8),
        epoch: 0,
        hint: 0,
        rng: 0x9e37_79b9_7f4a_7c15,
    };
    b.init(&first);
    let mut skipped = Vec::new();
    for p in 0..n {
        if first.contains(&p) {
            continue;
        }
        if !b.insert(p) {
            skipped.push(p);
        }
    }

    let simplices = b
        .cells
        .iter()
        .filter(|c| c.alive && !c.is_ghost(k))
        .map(|c| {
            let mut v = c.v;
            v[..k].sort_unstable();
            v
        })
        .collect();
    Ok(Triangulation {
        dim,
        simplices,
        skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_tetrahedron() {
        let pts = [0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0];
        let t = delaunay(&pts, 3).unwrap();
        assert_eq!(t.len(), 1);
    }

    #[test]
    fn centroid_splits_into_four() {
        let mut pts = vec![0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0];
        pts.extend([0.25, 0.25, 0.25]);
        let t = delaunay(&pts, 3).unwrap();
        assert_eq!(t.len(), 4);
        assert!(t.simplices().all(|s| s.contains(&4)));
    }

    #[test]
    fn duplicates_are_skipped() {
        let pts = [
            0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0,
        ];
        let t = delaunay(&pts, 3).unwrap();
        assert_eq!(t.skipped(), &[4]);
        assert_eq!(t.len(), 1);
    }

    #[test]
    fn coplanar_input_is_rejected() {
        let pts = [
            0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 0.5, 0.2, 0.0,
        ];
        assert!(matches!(delaunay(&pts, 3), Err(Error::Numerical(_))));
    }

    #[test]
    fn too_few_points() {
        assert!(delaunay(&[0.0; 9], 3).is_err());
    }

    #[test]
    fn cube_corners_tile_the_cube() {
        // cospherical input: any triangulation must cover volume 1
        let mut pts = Vec::new();
        for z in 0..2 {
            for y in 0..2 {
                for x in 0..2 {
                    pts.extend([x as f64, y as f64, z as f64]);
                }
            }
        }
        let t = delaunay(&pts, 3).unwrap();
        let vol: f64 = t
            .simplices()
            .map(|s| {
                let p = |i: u32| &pts[i as usize * 3..i as usize * 3 + 3];
                let a: Vec<f64> = (0..3).map(|j| p(s[1])[j] - p(s[0])[j]).collect();
                let b: Vec<f64> = (0..3).map(|j| p(s[2])[j] - p(s[0])[j]).collect();
                let c: Vec<f64> = (0..3).map(|j| p(s[3])[j] - p(s[0])[j]).collect();
                let det = a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0])
                    + a[2] * (b[0] * c[1] - b[1] * c[0]);
                det.abs() / 6.0
            })
            .sum();
        assert!((vol - 1.0).abs() < 1e-12, "volume {vol}");
    }
}
