//! Orientation and in-sphere predicates in 3 or 4 dimensions.
//!
//! Determinants are evaluated in `f64` by Leibniz expansion alongside the
//! permanent of the absolute entries, which bounds the rounding error. When
//! the result is inside that bound the sign is recomputed exactly with big
//! integers (every `f64` is an integer multiple of a common power of two).

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

/// Relative error budget for the floating-point filter; far above the
/// worst-case rounding of a 5 x 5 Leibniz expansion over differenced inputs.
const FILTER: f64 = 1e-11;

const MAX_N: usize = 5;

struct Permutations {
    by_size: Vec<Vec<([u8; MAX_N], bool)>>,
}

fn permutations() -> &'static Permutations {
    static PERMS: OnceLock<Permutations> = OnceLock::new();
    PERMS.get_or_init(|| {
        let by_size = (0..=MAX_N)
            .map(|n| {
                let mut out = Vec::new();
                let mut current: Vec<u8> = Vec::new();
                let mut used = [false; MAX_N];
                permute(n, &mut current, &mut used, &mut out);
                out
            })
            .collect();
        Permutations { by_size }
    })
}

fn permute(
    n: usize,
    cur: &mut Vec<u8>,
    used: &mut [bool; MAX_N],
    out: &mut Vec<([u8; MAX_N], bool)>,
) {
    if cur.len() == n {
        let mut p = [0u8; MAX_N];
        p[..n].copy_from_slice(cur);
        let mut inversions = 0;
        for i in 0..n {
            for j in i + 1..n {
                if cur[i] > cur[j] {
                    inversions += 1;
                }
            }
        }
        out.push((p, inversions % 2 == 1));
        return;
    }
    for v in 0..n {
        if !used[v] {
            used[v] = true;
            cur.push(v as u8);
            permute(n, cur, used, out);
            cur.pop();
            used[v] = false;
        }
    }
}

type Matrix = [[f64; MAX_N]; MAX_N];

/// Determinant and permanent of |entries| for the leading `n x n` block.
fn det_and_bound(m: &Matrix, n: usize) -> (f64, f64) {
    let mut det = 0.0;
    let mut perm = 0.0;
    for (p, odd) in &permutations().by_size[n] {
        let mut term = 1.0;
        for (row, &col) in p[..n].iter().enumerate() {
            term *= m[row][col as usize];
        }
        perm += term.abs();
        if *odd {
            det -= term;
        } else {
            det += term;
        }
    }
    (det, perm)
}

/// Sign of a determinant over the integers via fraction-free elimination.
fn bareiss_sign(mut m: Vec<Vec<BigInt>>) -> i8 {
    let n = m.len();
    let mut sign = 1i8;
    let mut prev = BigInt::from(1);
    for k in 0..n {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&r| !m[r][k].is_zero()) {
                Some(r) => {
                    m.swap(k, r);
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = v / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    let last = &m[n - 1][n - 1];
    if last.is_zero() {
        0
    } else if last.is_positive() {
        sign
    } else {
        -sign
    }
}

/// Decomposes a finite `f64` into `mantissa * 2^exponent`.
fn decompose(v: f64) -> (i64, i32) {
    if v == 0.0 {
        return (0, 0);
    }
    let bits = v.to_bits();
    let sign = if bits >> 63 == 0 { 1 } else { -1 };
    let exp_bits = ((bits >> 52) & 0x7ff) as i32;
    let frac = (bits & 0x000f_ffff_ffff_ffff) as i64;
    let (mantissa, exponent) = if exp_bits == 0 {
        (frac, -1074)
    } else {
        (frac | 1 << 52, exp_bits - 1075)
    };
    (sign * mantissa, exponent)
}

/// Predicates over a fixed set of points.
pub(crate) struct Predicates<'a> {
    dim: usize,
    coords: &'a [f64],
    exact: OnceLock<Vec<BigInt>>,
    insphere_sign: i8,
    pub(crate) exact_calls: std::cell::Cell<usize>,
}

impl<'a> Predicates<'a> {
    pub(crate) fn new(dim: usize, coords: &'a [f64]) -> Self {
        assert!((2..MAX_N).contains(&dim));
        let mut p = Predicates {
            dim,
            coords,
            exact: OnceLock::new(),
            insphere_sign: 1,
            exact_calls: std::cell::Cell::new(0),
        };
        p.insphere_sign = p.calibrate();
        p
    }

    /// Sign making "inside the circumsphere of a positively oriented simplex"
    /// positive: evaluated on the unit simplex and a point near its centroid.
    fn calibrate(&self) -> i8 {
        let d = self.dim;
        let mut m: Matrix = [[0.0; MAX_N]; MAX_N];
        let q = 1.0 / (d as f64 + 2.0);
        for i in 0..=d {
            let mut norm = 0.0;
            for a in 0..d {
                let c = if i > 0 && a == i - 1 { 1.0 } else { 0.0 };
                m[i][a] = c - q;
                norm += (c - q) * (c - q);
            }
            m[i][d] = norm;
        }
        let (det, _) = det_and_bound(&m, d + 1);
        if det > 0.0 {
            1
        } else {
            -1
        }
    }

    #[inline]
    pub(crate) fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    fn exact_coords(&self) -> &[BigInt] {
        self.exact.get_or_init(|| {
            let parts: Vec<(i64, i32)> = self.coords.iter().map(|&v| decompose(v)).collect();
            let min_exp = parts
                .iter()
                .filter(|(m, _)| *m != 0)
                .map(|&(_, e)| e)
                .min()
                .unwrap_or(0);
            parts
                .into_iter()
                .map(|(m, e)| BigInt::from(m) << (e - min_exp) as usize)
                .collect()
        })
    }

    fn exact_point(&self, i: usize) -> &[BigInt] {
        &self.exact_coords()[i * self.dim..(i + 1) * self.dim]
    }

    /// Sign of `det[v_1 - v_0, ..., v_d - v_0]`; positive for a positively
    /// oriented simplex.
    pub(crate) fn orient(&self, v: &[usize]) -> i8 {
        let d = self.dim;
        debug_assert_eq!(v.len(), d + 1);
        let mut m: Matrix = [[0.0; MAX_N]; MAX_N];
        let p0 = self.point(v[0]);
        for i in 0..d {
            let pi = self.point(v[i + 1]);
            for a in 0..d {
                m[i][a] = pi[a] - p0[a];
            }
        }
        let (det, bound) = det_and_bound(&m, d);
        if det.abs() > FILTER * bound {
            return if det > 0.0 { 1 } else { -1 };
        }
        self.exact_calls.set(self.exact_calls.get() + 1);
        let e0 = self.exact_point(v[0]).to_vec();
        let rows = (0..d)
            .map(|i| {
                let ei = self.exact_point(v[i + 1]);
                (0..d).map(|a| &ei[a] - &e0[a]).collect()
            })
            .collect();
        bareiss_sign(rows)
    }

    /// Positive iff `q` lies strictly inside the circumsphere of the
    /// positively oriented simplex `v`; zero when cospherical.
    pub(crate) fn insphere(&self, v: &[usize], q: usize) -> i8 {
        let d = self.dim;
        debug_assert_eq!(v.len(), d + 1);
        let mut m: Matrix = [[0.0; MAX_N]; MAX_N];
        let pq = self.point(q);
        for (i, &vi) in v.iter().enumerate() {
            let p = self.point(vi);
            let mut norm = 0.0;
            for a in 0..d {
                let diff = p[a] - pq[a];
                m[i][a] = diff;
                norm += diff * diff;
            }
            m[i][d] = norm;
        }
        let (det, bound) = det_and_bound(&m, d + 1);
        if det.abs() > FILTER * bound {
            return if det > 0.0 {
                self.insphere_sign
            } else {
                -self.insphere_sign
            };
        }
        self.exact_calls.set(self.exact_calls.get() + 1);
        let eq = self.exact_point(q).to_vec();
        let rows = v
            .iter()
            .map(|&vi| {
                let p = self.exact_point(vi);
                let mut row: Vec<BigInt> = (0..d).map(|a| &p[a] - &eq[a]).collect();
                let norm = row.iter().map(|x| x * x).sum::<BigInt>();
                row.push(norm);
                row
            })
            .collect();
        bareiss_sign(rows) * self.insphere_sign
    }
}
