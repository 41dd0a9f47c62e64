use super::barcode::{Bar, Barcodes};
use super::complex::FilteredComplex;

const NONE: u32 = u32::MAX;

/// Computes barcodes in dimensions `0..=max_dim` by column reduction of the
/// Z/2 boundary matrix.
///
/// Columns are reduced from the highest dimension down with clearing: once
/// a column of dimension `d` has pivot `i`, column `i` is known to reduce to
/// zero and is skipped. Edge columns are reduced with union-find, which
/// yields the same pairs as the matrix reduction (the younger component dies).
/// Bars of zero length are dropped.
pub fn compute_persistence(fc: &FilteredComplex, max_dim: usize) -> Barcodes {
    let n = fc.len();
    // pivot_col[row] = column whose lowest entry is `row`
    let mut pivot_col = vec![NONE; n];
    let mut killer = vec![NONE; n]; // killer[col] = row paired with col
    let mut cleared = vec![false; n];

    let mut by_dim: Vec<Vec<u32>> = vec![Vec::new(); max_dim + 2];
    for pos in 0..n {
        let d = fc.dim(pos);
        if d <= max_dim + 1 {
            by_dim[d].push(pos as u32);
        }
    }

    let mut reduced: Vec<Option<Vec<u32>>> = vec![None; n];
    let mut scratch = Vec::new();
    for d in (2..=max_dim + 1).rev() {
        for &j in &by_dim[d] {
            let j = j as usize;
            if cleared[j] {
                continue;
            }
            let mut col: Vec<u32> = fc.boundary(j).to_vec();
            while let Some(&low) = col.last() {
                let k = pivot_col[low as usize];
                if k == NONE {
                    break;
                }
                let other = reduced[k as usize]
                    .as_ref()
                    .expect("pivot column is stored");
                xor_into(&mut col, other, &mut scratch);
            }
            if let Some(&low) = col.last() {
                pivot_col[low as usize] = j as u32;
                killer[j] = low;
                cleared[low as usize] = true;
                reduced[j] = Some(col);
            }
        }
        // Columns of dimension d are only ever added to each other.
        for &j in &by_dim[d] {
            reduced[j as usize] = None;
        }
    }

    if max_dim + 1 >= 1 && by_dim.len() > 1 {
        union_find_edges(fc, &by_dim[1], &cleared, &mut pivot_col, &mut killer);
    }

    let mut barcodes = Barcodes::new(max_dim);
    for pos in 0..n {
        let d = fc.dim(pos);
        if d > max_dim {
            continue;
        }
        let birth = fc.value(pos);
        let bars = barcodes.get_mut(d).expect("dimension in range");
        match pivot_col[pos] {
            NONE => {
                if killer[pos] == NONE {
                    bars.push(Bar::essential(birth));
                }
            }
            col => {
                let death = fc.value(col as usize);
                if death > birth {
                    bars.push(Bar::new(birth, death));
                }
            }
        }
    }
    barcodes.sort();
    barcodes
}

fn union_find_edges(
    fc: &FilteredComplex,
    edges: &[u32],
    cleared: &[bool],
    pivot_col: &mut [u32],
    killer: &mut [u32],
) {
    let n = fc.len();
    let mut parent: Vec<u32> = (0..n as u32).collect();
    // the oldest vertex of each component is its root's representative
    let mut oldest: Vec<u32> = (0..n as u32).collect();

    fn find(parent: &mut [u32], mut x: u32) -> u32 {
        while parent[x as usize] != x {
            let p = parent[x as usize];
            parent[x as usize] = parent[p as usize];
            x = p;
        }
        x
    }

    for &e in edges {
        if cleared[e as usize] {
            continue;
        }
        let bd = fc.boundary(e as usize);
        debug_assert_eq!(bd.len(), 2);
        let ra = find(&mut parent, bd[0]);
        let rb = find(&mut parent, bd[1]);
        if ra == rb {
            continue;
        }
        let (oa, ob) = (oldest[ra as usize], oldest[rb as usize]);
        let (young, old) = if oa > ob { (oa, ob) } else { (ob, oa) };
        pivot_col[young as usize] = e;
        killer[e as usize] = young;
        parent[ra as usize] = rb;
        oldest[rb as usize] = old;
    }
}

/// Symmetric difference of two ascending index lists, written into `col`.
fn xor_into(col: &mut Vec<u32>, other: &[u32], scratch: &mut Vec<u32>) {
    scratch.clear();
    scratch.reserve(col.len() + other.len());
    let (mut i, mut j) = (0, 0);
    while i < col.len() && j < other.len() {
        match col[i].cmp(&other[j]) {
            std::cmp::Ordering::Less => {
                scratch.push(col[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                scratch.push(other[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    scratch.extend_from_slice(&col[i..]);
    scratch.extend_from_slice(&other[j..]);
    std::mem::swap(col, scratch);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::persistence::FilteredComplexBuilder;

    #[test]
    fn single_vertex() {
        let mut b = FilteredComplexBuilder::new();
        b.add_cell(0, 0.0, &[]);
        let bc = compute_persistence(&b.build().unwrap(), 2);
        assert_eq!(bc.dim(0).bars(), &[Bar::essential(0.0)]);
        assert!(bc.dim(1).is_empty() && bc.dim(2).is_empty());
    }

    #[test]
    fn one_merge() {
        let mut b = FilteredComplexBuilder::new();
        b.add_cell(0, 0.0, &[]);
        b.add_cell(0, 0.0, &[]);
        b.add_cell(1, 1.0, &[0, 1]);
        let bc = compute_persistence(&b.build().unwrap(), 2);
        assert_eq!(
            bc.dim(0).sorted(),
            vec![Bar::new(0.0, 1.0), Bar::essential(0.0)]
        );
    }

    #[test]
    fn triangle_boundary_loop() {
        let mut b = FilteredComplexBuilder::new();
        for _ in 0..3 {
            b.add_cell(0, 0.0, &[]);
        }
        b.add_cell(1, 1.0, &[0, 1]);
        b.add_cell(1, 1.0, &[1, 2]);
        b.add_cell(1, 1.0, &[0, 2]);
        let bc = compute_persistence(&b.build().unwrap(), 2);
        assert_eq!(
            bc.dim(0).sorted(),
            vec![Bar::new(0.0, 1.0), Bar::new(0.0, 1.0), Bar::essential(0.0)]
        );
        assert_eq!(bc.dim(1).bars(), &[Bar::essential(1.0)]);
        assert!(bc.dim(2).is_empty());
    }

    #[test]
    fn filled_triangle_kills_loop() {
        let mut b = FilteredComplexBuilder::new();
        for _ in 0..3 {
            b.add_cell(0, 0.0, &[]);
        }
        let e: Vec<usize> = [[0, 1], [1, 2], [0, 2]]
            .iter()
            .map(|f| b.add_cell(1, 1.0, f))
            .collect();
        b.add_cell(2, 3.0, &e);
        let bc = compute_persistence(&b.build().unwrap(), 2);
        assert_eq!(bc.dim(1).bars(), &[Bar::new(1.0, 3.0)]);
    }

    #[test]
    fn xor_is_symmetric_difference() {
        let mut col = vec![1, 3, 5, 7];
        let mut scratch = Vec::new();
        xor_into(&mut col, &[2, 3, 7, 9], &mut scratch);
        assert_eq!(col, vec![1, 2, 5, 9]);
    }
}
