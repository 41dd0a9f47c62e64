//! Acceptance gate. Every check prints one PASS/FAIL line; the process exits
//! nonzero if any check fails.
//!
//! Oracles here are deliberately naive: dense Z/2 ranks for persistence,
//! Prim's algorithm for alpha H0, bit loops for Morton codes, and direct
//! arithmetic for patch statistics.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use patchtda::alpha::{alpha_persistence, alpha_values, AlphaOptions};
use patchtda::bench::{bench_ph, BenchOptions};
use patchtda::cubical::cubical_persistence;
use patchtda::io::{save_mask, save_volume};
use patchtda::ml::{
    pca_trials, select_top, stage1_trials, stat_combinations, top_count, ClassifierKind, CvReport,
    Depth, RankMetric, TrialResult,
};
use patchtda::patch::{
    build_point_cloud, extract_patches, morton_decode, morton_encode, PatchConfig, Stat,
    ENTROPY_BINS, MORTON_LIMIT,
};
use patchtda::persistence::{compute_persistence, Bar, Barcode, FilteredComplexBuilder};
use patchtda::phantom::{hollow_shell, random_masked, random_sphere, two_blobs};
use patchtda::preprocess::mask_and_crop;
use patchtda::vectorize::{feature_names, vectorize, FEATURE_LEN};
use patchtda::{Mask, Volume};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Check = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

// ---------------------------------------------------------------- persistence

type Bits = Vec<u64>;

fn unit(n: usize, i: usize) -> Bits {
    let mut b = vec![0u64; n.div_ceil(64).max(1)];
    b[i / 64] |= 1 << (i % 64);
    b
}

fn highest(b: &Bits) -> Option<usize> {
    b.iter()
        .enumerate()
        .rev()
        .find(|(_, w)| **w != 0)
        .map(|(i, w)| i * 64 + 63 - w.leading_zeros() as usize)
}

fn xor(a: &mut Bits, b: &Bits) {
    a.iter_mut().zip(b).for_each(|(x, y)| *x ^= y);
}

fn rank(vecs: impl IntoIterator<Item = Bits>) -> usize {
    let mut pivots: HashMap<usize, Bits> = HashMap::new();
    for mut v in vecs {
        while let Some(h) = highest(&v) {
            match pivots.get(&h) {
                Some(p) => xor(&mut v, p),
                None => {
                    pivots.insert(h, v);
                    break;
                }
            }
        }
    }
    pivots.len()
}

/// Kernel basis of the boundary map restricted to `cols`, as combinations of
/// column indices out of `n_cols`.
fn cycles(cols: &[(usize, Bits)], n_cols: usize) -> Vec<Bits> {
    let mut pivots: HashMap<usize, (Bits, Bits)> = HashMap::new();
    let mut out = Vec::new();
    for (idx, bnd) in cols {
        let mut v = bnd.clone();
        let mut comb = unit(n_cols, *idx);
        loop {
            match highest(&v) {
                None => {
                    out.push(comb);
                    break;
                }
                Some(h) => match pivots.get(&h) {
                    Some((pv, pc)) => {
                        xor(&mut v, pv);
                        xor(&mut comb, pc);
                    }
                    None => {
                        pivots.insert(h, (v, comb));
                        break;
                    }
                },
            }
        }
    }
    out
}

struct Cell {
    verts: Vec<u32>,
    value: f64,
}

fn random_complex(rng: &mut ChaCha8Rng) -> Vec<Cell> {
    let nv = rng.random_range(3..=8u32);
    let mut set: BTreeMap<(usize, Vec<u32>), ()> = (0..nv).map(|v| ((1, vec![v]), ())).collect();
    for _ in 0..rng.random_range(2..=16) {
        let k = rng.random_range(2..=4usize).min(nv as usize);
        let mut all: Vec<u32> = (0..nv).collect();
        all.shuffle(rng);
        let mut top = all[..k].to_vec();
        top.sort_unstable();
        let faces: Vec<Vec<u32>> = (1..1u32 << k)
            .map(|bits| {
                (0..k)
                    .filter(|i| bits >> i & 1 == 1)
                    .map(|i| top[i])
                    .collect()
            })
            .collect();
        let fresh = faces
            .iter()
            .filter(|f| !set.contains_key(&(f.len(), (*f).clone())))
            .count();
        if set.len() + fresh > 200 {
            break;
        }
        for f in faces {
            set.insert((f.len(), f), ());
        }
    }
    let mut values: HashMap<Vec<u32>, f64> = HashMap::new();
    let mut cells = Vec::new();
    for (len, verts) in set.into_keys() {
        let value = if len == 1 {
            rng.random_range(0..5) as f64
        } else {
            let faces_max = (0..len)
                .map(|skip| {
                    let f: Vec<u32> = verts
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| *i != skip)
                        .map(|(_, v)| *v)
                        .collect();
                    values[&f]
                })
                .fold(f64::NEG_INFINITY, f64::max);
            faces_max + rng.random_range(0..3) as f64
        };
        values.insert(verts.clone(), value);
        cells.push(Cell { verts, value });
    }
    cells
}

fn persistent_betti_oracle(cells: &[Cell], k: usize, s: f64, t: f64) -> usize {
    let index_in_dim = |dim: usize| -> HashMap<&[u32], usize> {
        cells
            .iter()
            .filter(|c| c.verts.len() == dim + 1)
            .enumerate()
            .map(|(i, c)| (c.verts.as_slice(), i))
            .collect()
    };
    let kcells = index_in_dim(k);
    let lower = if k > 0 {
        index_in_dim(k - 1)
    } else {
        HashMap::new()
    };
    let boundary = |c: &Cell, faces: &HashMap<&[u32], usize>| -> Bits {
        let mut b = vec![0u64; faces.len().div_ceil(64).max(1)];
        for skip in 0..c.verts.len() {
            let f: Vec<u32> = c
                .verts
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != skip)
                .map(|(_, v)| *v)
                .collect();
            let i = faces[f.as_slice()];
            b[i / 64] ^= 1 << (i % 64);
        }
        b
    };
    let cols: Vec<(usize, Bits)> = cells
        .iter()
        .filter(|c| c.verts.len() == k + 1 && c.value <= s)
        .map(|c| {
            let idx = kcells[c.verts.as_slice()];
            let b = if k == 0 {
                vec![0u64]
            } else {
                boundary(c, &lower)
            };
            (idx, b)
        })
        .collect();
    let z = cycles(&cols, kcells.len());
    let b: Vec<Bits> = cells
        .iter()
        .filter(|c| c.verts.len() == k + 2 && c.value <= t)
        .map(|c| boundary(c, &kcells))
        .collect();
    let rb = rank(b.clone());
    rank(z.into_iter().chain(b)) - rb
}

fn persistence_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checks = 0usize;
    let complexes = 60;
    for trial in 0..complexes {
        let cells = random_complex(&mut rng);
        let mut builder = FilteredComplexBuilder::new();
        let mut ids: HashMap<&[u32], usize> = HashMap::new();
        for c in &cells {
            let faces: Vec<usize> = if c.verts.len() == 1 {
                Vec::new()
            } else {
                (0..c.verts.len())
                    .map(|skip| {
                        let f: Vec<u32> = c
                            .verts
                            .iter()
                            .enumerate()
                            .filter(|(i, _)| *i != skip)
                            .map(|(_, v)| *v)
                            .collect();
                        ids[f.as_slice()]
                    })
                    .collect()
            };
            let id = builder.add_cell(c.verts.len() - 1, c.value, &faces);
            ids.insert(&c.verts, id);
        }
        let fc = builder
            .build()
            .map_err(|e| format!("complex {trial}: {e}"))?;
        let bc = compute_persistence(&fc, 2);
        let mut levels: Vec<f64> = cells.iter().map(|c| c.value).collect();
        levels.sort_by(f64::total_cmp);
        levels.dedup();
        for k in 0..=2 {
            let bars = bc.dim(k);
            for (i, &s) in levels.iter().enumerate() {
                for &t in &levels[i..] {
                    let got = bars
                        .bars()
                        .iter()
                        .filter(|b| b.birth <= s && b.death > t)
                        .count();
                    let want = persistent_betti_oracle(&cells, k, s, t);
                    ensure(got == want, || {
                        format!(
                            "complex {trial} ({} cells): beta_{k}({s},{t}) = {got}, oracle {want}",
                            cells.len()
                        )
                    })?;
                    checks += 1;
                }
            }
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(10), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!(
        "{complexes} complexes, {checks} persistent Betti numbers exact, {elapsed:.2?}"
    ))
}

// ---------------------------------------------------------------- cubical

fn sorted_bars(b: &Barcode) -> Vec<(f64, f64)> {
    let mut v: Vec<(f64, f64)> = b.bars().iter().map(|b| (b.birth, b.death)).collect();
    v.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    v
}

fn map_volume(v: &Volume, f: impl Fn(f32) -> f32) -> Volume {
    Volume::new(
        v.dims(),
        v.spacing(),
        v.data().iter().map(|&x| f(x)).collect(),
    )
    .unwrap()
}

fn cubical_correctness() -> Outcome {
    let (v, m) = hollow_shell(5, 1.0, 7.0).map_err(|e| e.to_string())?;
    let b = cubical_persistence(&v, Some(&m)).map_err(|e| e.to_string())?;
    let h2 = sorted_bars(&b.dim(2));
    ensure(h2 == vec![(1.0, 7.0)], || {
        format!("hollow shell H2 = {h2:?}")
    })?;

    let (v, m) = two_blobs(9, 3).map_err(|e| e.to_string())?;
    let b = cubical_persistence(&v, Some(&m)).map_err(|e| e.to_string())?;
    let essential = b.dim(0).essential_count();
    ensure(essential == 2, || {
        format!("two blobs: {essential} essential H0 bars")
    })?;

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let relabel = |x: f64| x * x * x + 2.0 * x;
    for trial in 0..20 {
        let dims = [
            rng.random_range(1..=4),
            rng.random_range(1..=4),
            rng.random_range(1..=4),
        ];
        let n = dims.iter().product::<usize>();
        let data: Vec<f32> = (0..n).map(|_| rng.random_range(0..10) as f32).collect();
        let v = Volume::new(dims, [1.0; 3], data).unwrap();
        let mut bits: Vec<u8> = (0..n).map(|_| rng.random_bool(0.7) as u8).collect();
        bits[rng.random_range(0..n)] = 1;
        let m = Mask::new(dims, bits).unwrap();
        let mask = if trial % 4 == 0 { None } else { Some(&m) };
        let base = cubical_persistence(&v, mask).map_err(|e| e.to_string())?;
        let shifted =
            cubical_persistence(&map_volume(&v, |x| x + 17.0), mask).map_err(|e| e.to_string())?;
        let relabeled = cubical_persistence(&map_volume(&v, |x| relabel(x as f64) as f32), mask)
            .map_err(|e| e.to_string())?;
        for k in 0..=2 {
            let want = sorted_bars(&base.dim(k));
            let shift: Vec<(f64, f64)> = want.iter().map(|&(b, d)| (b + 17.0, d + 17.0)).collect();
            let got = sorted_bars(&shifted.dim(k));
            ensure(got == shift, || {
                format!("volume {trial} {dims:?}: shifted H{k} {got:?} vs {shift:?}")
            })?;
            let mapped: Vec<(f64, f64)> = want
                .iter()
                .map(|&(b, d)| (relabel(b), relabel(d)))
                .collect();
            let got = sorted_bars(&relabeled.dim(k));
            ensure(got == mapped, || {
                format!("volume {trial} {dims:?}: relabeled H{k} {got:?} vs {mapped:?}")
            })?;
        }
    }
    Ok("shell H2 = (1, 7); two essential H0 bars; shift and relabel exact on 20 volumes".into())
}

// ---------------------------------------------------------------- alpha

fn prim_merge_heights(coords: &[f64], d: usize) -> Vec<f64> {
    let n = coords.len() / d;
    let dist2 = |a: usize, b: usize| {
        (0..d)
            .map(|k| (coords[a * d + k] - coords[b * d + k]).powi(2))
            .sum::<f64>()
    };
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    best[0] = 0.0;
    let mut heights = Vec::new();
    for step in 0..n {
        let u = (0..n)
            .filter(|&i| !in_tree[i])
            .min_by(|&a, &b| best[a].total_cmp(&best[b]))
            .unwrap();
        in_tree[u] = true;
        if step > 0 {
            heights.push(best[u] / 4.0);
        }
        for v in 0..n {
            if !in_tree[v] {
                best[v] = best[v].min(dist2(u, v));
            }
        }
    }
    heights.sort_by(f64::total_cmp);
    heights
}

fn unit_sphere(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(3 * n);
    while out.len() < 3 * n {
        let p: [f64; 3] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let r = p.iter().map(|x| x * x).sum::<f64>().sqrt();
        if r > 0.1 && r <= 1.0 {
            out.extend(p.iter().map(|x| x / r));
        }
    }
    out
}

fn alpha_correctness() -> Outcome {
    let opts = AlphaOptions::default();
    for s in [0.5, 1.0, 2.5] {
        let h = s * 3f64.sqrt() / 2.0;
        let coords = [0.0, 0.0, 0.0, s, 0.0, 0.0, s / 2.0, h, 0.0];
        let fc = alpha_values([&[0u32, 1, 2][..]], &coords, 3)
            .and_then(|f| f.to_complex(2))
            .map_err(|e| e.to_string())?;
        let h1 = sorted_bars(&compute_persistence(&fc, 2).dim(1));
        let want = (s * s / 4.0, s * s / 3.0);
        ensure(
            h1.len() == 1 && close(h1[0].0, want.0, 1e-9) && close(h1[0].1, want.1, 1e-9),
            || format!("triangle s={s}: H1 {h1:?}, want {want:?}"),
        )?;
    }

    let square =
        patchtda::patch::PointCloud::new(3, vec![0., 0., 0., 1., 0., 0., 0., 1., 0., 1., 1., 0.])
            .unwrap();
    let h1 = sorted_bars(
        &alpha_persistence(&square, &opts)
            .map_err(|e| e.to_string())?
            .dim(1),
    );
    ensure(
        h1.len() == 1 && close(h1[0].0, 0.25, 1e-9) && close(h1[0].1, 0.5, 1e-9),
        || format!("unit square H1 {h1:?}"),
    )?;

    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for trial in 0..20 {
        let d = 3 + trial % 2;
        let n = rng.random_range(d + 2..=50);
        let coords: Vec<f64> = (0..n * d).map(|_| rng.random_range(0.0..1.0)).collect();
        let pc = patchtda::patch::PointCloud::new(d, coords.clone()).unwrap();
        let b = alpha_persistence(&pc, &opts).map_err(|e| e.to_string())?;
        let mut deaths: Vec<f64> = b
            .dim(0)
            .bars()
            .iter()
            .filter(|b| b.is_finite())
            .map(|b| b.death)
            .collect();
        deaths.sort_by(f64::total_cmp);
        let want = prim_merge_heights(&coords, d);
        ensure(deaths.len() == want.len(), || {
            format!(
                "cloud {trial}: {} finite H0 bars, MST has {}",
                deaths.len(),
                want.len()
            )
        })?;
        for (a, w) in deaths.iter().zip(&want) {
            ensure((a - w).abs() <= 1e-9, || {
                format!("cloud {trial}: H0 death {a} vs MST {w}")
            })?;
        }
    }

    let pc = patchtda::patch::PointCloud::new(3, unit_sphere(200, 4)).unwrap();
    let b = alpha_persistence(&pc, &opts).map_err(|e| e.to_string())?;
    let mut life: Vec<f64> = b.dim(2).bars().iter().map(|b| b.lifespan()).collect();
    life.sort_by(|a, b| b.total_cmp(a));
    let top = life.first().copied().unwrap_or(0.0);
    let runner = life.get(1).copied().unwrap_or(0.0);
    ensure(top > 0.0 && top >= 5.0 * runner, || {
        format!("sphere H2 lifespans {:?}", &life[..life.len().min(3)])
    })?;
    Ok(format!(
        "triangle, square, 20 MST clouds, sphere H2 ratio {:.1}",
        top / runner
    ))
}

// ---------------------------------------------------------------- patches

fn interleave(x: u64, y: u64, z: u64) -> u64 {
    let mut code = 0;
    for b in 0..21 {
        code |= ((x >> b) & 1) << (3 * b);
        code |= ((y >> b) & 1) << (3 * b + 1);
        code |= ((z >> b) & 1) << (3 * b + 2);
    }
    code
}

fn percentile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let (lo, hi) = (h.floor() as usize, h.ceil() as usize);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn oracle_stats(values: &[f64]) -> HashMap<Stat, f64> {
    let n = values.len() as f64;
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let (min, max) = (sorted[0], sorted[sorted.len() - 1]);
    let mean = values.iter().sum::<f64>() / n;
    let std = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
    let mut counts: BTreeMap<i64, usize> = BTreeMap::new();
    for v in values {
        *counts.entry(v.round() as i64).or_default() += 1;
    }
    let top = *counts.values().max().unwrap();
    let mode = *counts.iter().find(|(_, c)| **c == top).unwrap().0 as f64;
    let mut entropy = 0.0;
    if max > min {
        let mut bins = vec![0usize; ENTROPY_BINS];
        for v in values {
            let b = ((v - min) / (max - min) * ENTROPY_BINS as f64) as usize;
            bins[b.min(ENTROPY_BINS - 1)] += 1;
        }
        for c in bins.into_iter().filter(|&c| c > 0) {
            let p = c as f64 / n;
            entropy -= p * p.ln();
        }
    }
    HashMap::from([
        (Stat::Mean, mean),
        (Stat::Median, percentile(&sorted, 0.5)),
        (Stat::Mode, mode),
        (Stat::Std, std),
        (
            Stat::Iqr,
            percentile(&sorted, 0.75) - percentile(&sorted, 0.25),
        ),
        (Stat::Entropy, entropy),
        (Stat::Range, max - min),
        (Stat::Min, min),
        (Stat::Max, max),
    ])
}

fn patch_encoding() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..100_000 {
        let (x, y, z) = (
            rng.random_range(0..MORTON_LIMIT),
            rng.random_range(0..MORTON_LIMIT),
            rng.random_range(0..MORTON_LIMIT),
        );
        let code = morton_encode(x, y, z).map_err(|e| e.to_string())?;
        ensure(code == interleave(x, y, z), || {
            format!("encode({x},{y},{z}) = {code}")
        })?;
        ensure(morton_decode(code) == (x, y, z), || {
            format!("decode({code}) != ({x},{y},{z})")
        })?;
    }

    let groups = [
        vec![Stat::Mean, Stat::Median, Stat::Mode],
        vec![Stat::Std, Stat::Iqr, Stat::Entropy],
        vec![Stat::Range, Stat::Min, Stat::Max],
    ];
    let mut compared = 0usize;
    for trial in 0..30 {
        let dims = [
            rng.random_range(2..=14),
            rng.random_range(2..=14),
            rng.random_range(2..=14),
        ];
        let n = rng.random_range(3..=10);
        let len = dims.iter().product::<usize>();
        let density = rng.random_range(0.02..0.9);
        let mut bits: Vec<u8> = (0..len).map(|_| rng.random_bool(density) as u8).collect();
        bits[rng.random_range(0..len)] = 1;
        let data: Vec<f32> = (0..len)
            .map(|_| rng.random_range(-500.0..500.0f32))
            .collect();
        let v = Volume::new(dims, [1.0; 3], data).unwrap();
        let m = Mask::new(dims, bits).unwrap();

        // tiles touching the mask, enumerated z-major like the encoder
        let mut touched: HashSet<[usize; 3]> = HashSet::new();
        for z in 0..dims[0] {
            for y in 0..dims[1] {
                for x in 0..dims[2] {
                    if m.get(z, y, x) {
                        touched.insert([z / n, y / n, x / n]);
                    }
                }
            }
        }
        let mut tiles: Vec<[usize; 3]> = touched.into_iter().collect();
        tiles.sort_unstable();
        let patches = extract_patches(&v, &m, n).map_err(|e| e.to_string())?;
        ensure(patches.len() == tiles.len(), || {
            format!(
                "mask {trial} {dims:?} n={n}: {} patches, grid count {}",
                patches.len(),
                tiles.len()
            )
        })?;

        for stats in &groups {
            let mut cfg = PatchConfig::stats(n, stats.clone());
            cfg.normalize_axes = false;
            let pc = build_point_cloud(&v, &m, &cfg).map_err(|e| e.to_string())?;
            ensure(pc.len() == tiles.len(), || {
                format!("mask {trial}: cloud has {} points", pc.len())
            })?;
            for (tile, point) in tiles.iter().zip(pc.points()) {
                let mut values = Vec::with_capacity(n * n * n);
                for dz in 0..n {
                    for dy in 0..n {
                        for dx in 0..n {
                            let (z, y, x) = (tile[0] * n + dz, tile[1] * n + dy, tile[2] * n + dx);
                            values.push(if z < dims[0] && y < dims[1] && x < dims[2] {
                                v.get(z, y, x) as f64
                            } else {
                                0.0
                            });
                        }
                    }
                }
                let center: [u64; 3] =
                    std::array::from_fn(|a| (tile[a] * n + n / 2).min(dims[a] - 1) as u64);
                let code = interleave(center[2], center[1], center[0]) as f64;
                ensure(point[0] == code, || {
                    format!("mask {trial} tile {tile:?}: code {} vs {code}", point[0])
                })?;
                let want = oracle_stats(&values);
                for (s, got) in stats.iter().zip(&point[1..]) {
                    ensure(close(*got, want[s], 1e-12), || {
                        format!(
                            "mask {trial} tile {tile:?}: {s} = {got}, oracle {}",
                            want[s]
                        )
                    })?;
                    compared += 1;
                }
            }
        }
    }
    Ok(format!(
        "1e5 Morton round trips, 30 masks, {compared} stat values within 1e-12"
    ))
}

// ---------------------------------------------------------------- vectorizer

fn random_barcode(rng: &mut ChaCha8Rng, dim: usize) -> Barcode {
    let n = rng.random_range(0..12);
    let bars = (0..n).map(|_| {
        let b = rng.random_range(0.0..5.0);
        if rng.random_bool(0.1) {
            Bar::essential(b)
        } else {
            Bar::new(b, b + rng.random_range(0.0..3.0))
        }
    });
    Barcode::from_bars(dim, bars)
}

fn vectorizer_contract() -> Outcome {
    let mut expected = Vec::new();
    for dim in 0..3 {
        for series in ["birth", "death", "lifespan", "midpoint"] {
            for stat in [
                "mean", "median", "std", "range", "iqr", "p10", "p25", "p75", "p90",
            ] {
                expected.push(format!("h{dim}_{series}_{stat}"));
            }
        }
        expected.push(format!("h{dim}_entropy"));
        expected.push(format!("h{dim}_count"));
    }
    ensure(feature_names() == expected.as_slice(), || {
        "column names differ from the contract".into()
    })?;
    ensure(FEATURE_LEN == 114, || {
        format!("FEATURE_LEN = {FEATURE_LEN}")
    })?;

    let column = |name: &str| expected.iter().position(|n| n == name).unwrap();
    for n in 1..=64usize {
        let bars = Barcode::from_bars(1, std::iter::repeat_n(Bar::new(0.5, 2.0), n));
        let f = vectorize(&Barcode::new(0), &bars, &Barcode::new(2));
        let got = f[column("h1_entropy")];
        ensure((got - (n as f64).ln()).abs() <= 1e-12, || {
            format!("entropy of {n} equal bars = {got}")
        })?;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for trial in 0..300 {
        let b: [Barcode; 3] = std::array::from_fn(|d| random_barcode(&mut rng, d));
        let f = vectorize(&b[0], &b[1], &b[2]);
        ensure(f.len() == 114, || {
            format!("trial {trial}: length {}", f.len())
        })?;
        ensure(f.iter().all(|x| x.is_finite()), || {
            format!("trial {trial}: non-finite entry")
        })?;

        let c = rng.random_range(0.1..10.0);
        let scaled: Vec<Barcode> = b.iter().map(|bc| bc.scaled(c)).collect();
        let g = vectorize(&scaled[0], &scaled[1], &scaled[2]);
        for (i, name) in expected.iter().enumerate() {
            let want = if name.ends_with("_entropy") || name.ends_with("_count") {
                f[i]
            } else {
                c * f[i]
            };
            ensure(close(g[i], want, 1e-9), || {
                format!("trial {trial}: {name} scaled by {c}: {} vs {want}", g[i])
            })?;
        }
    }
    Ok(
        "114 named columns, entropy = ln n for n <= 64, scale equivariance on 300 barcode triples"
            .into(),
    )
}

// ---------------------------------------------------------------- grid

fn fake_report(score: f64) -> CvReport {
    let m = patchtda::ml::Metrics::from_array([score; 5]);
    CvReport {
        classifier: ClassifierKind::Lr,
        config: None,
        depth: Depth::Shallow,
        seed: 0,
        classes: vec![0, 1],
        fold_of: Vec::new(),
        folds: Vec::new(),
        mean: m,
        std: patchtda::ml::Metrics::from_array([0.0; 5]),
    }
}

fn grid_combinatorics() -> Outcome {
    let combos = stat_combinations();
    let distinct: HashSet<Vec<Stat>> = combos
        .iter()
        .map(|c| {
            let mut c = c.clone();
            c.sort();
            c
        })
        .collect();
    ensure(combos.len() == 120 && distinct.len() == 120, || {
        format!("{} combinations, {} distinct", combos.len(), distinct.len())
    })?;
    let stage1 = stage1_trials();
    let configs: HashSet<String> = stage1.iter().map(|t| t.config.to_string()).collect();
    ensure(stage1.len() == 960 && configs.len() == 960, || {
        format!(
            "stage 1: {} trials, {} distinct",
            stage1.len(),
            configs.len()
        )
    })?;
    let pca = pca_trials();
    ensure(pca.len() == 8, || {
        format!("PCA track: {} trials", pca.len())
    })?;

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let results: Vec<TrialResult> = stage1
        .iter()
        .map(|spec| TrialResult {
            spec: spec.clone(),
            outcome: if rng.random_bool(0.05) {
                Err("failed".into())
            } else {
                Ok(vec![fake_report(rng.random_range(0.0..100.0))])
            },
        })
        .collect();
    let mut order: Vec<(f64, usize)> = results
        .iter()
        .map(|r| {
            (
                r.outcome
                    .as_ref()
                    .map(|v| v[0].mean.auc)
                    .unwrap_or(f64::NEG_INFINITY),
                r.spec.id,
            )
        })
        .collect();
    order.sort_by(|a, b| b.0.total_cmp(&a.0));
    let want: HashSet<usize> = order[..48].iter().map(|o| o.1).collect();
    let top = select_top(&results, RankMetric::Auc);
    let got: HashSet<usize> = top.iter().map(|t| t.id).collect();
    ensure(
        top_count(960) == 48 && top.len() == 48 && got == want,
        || format!("top cut advanced {}", top.len()),
    )?;
    Ok("960 stage-1 trials, 120 stat combinations, 8 PCA trials, 48 advanced".into())
}

// ---------------------------------------------------------------- end to end

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_patchtda")
}

fn run(args: &[&str]) -> Result<(), String> {
    let out = Command::new(bin())
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || {
        format!(
            "patchtda {} failed: {}",
            args.join(" "),
            String::from_utf8_lossy(&out.stderr).trim()
        )
    })
}

fn write_phantoms(dir: &Path, per_class: usize, size: usize) -> Result<PathBuf, String> {
    let mut entries = Vec::new();
    for i in 0..2 * per_class {
        let hollow = i % 2 == 1;
        let (v, m) = random_sphere(size, hollow, 1000 + i as u64).map_err(|e| e.to_string())?;
        let (vn, mn) = (format!("v{i:03}.json"), format!("m{i:03}.json"));
        save_volume(&v, dir.join(&vn)).map_err(|e| e.to_string())?;
        save_mask(&m, dir.join(&mn)).map_err(|e| e.to_string())?;
        entries.push(serde_json::json!({
            "volume": vn,
            "mask": mn,
            "label": if hollow { "hollow" } else { "solid" },
        }));
    }
    let manifest = dir.join("manifest.json");
    std::fs::write(&manifest, serde_json::to_string_pretty(&entries).unwrap())
        .map_err(|e| e.to_string())?;
    Ok(manifest)
}

fn lr_mean_auc(report: &Path) -> Result<f64, String> {
    let text = std::fs::read_to_string(report).map_err(|e| e.to_string())?;
    let header: Vec<&str> = text.lines().next().unwrap_or("").split(',').collect();
    let col = header
        .iter()
        .position(|h| *h == "auc")
        .ok_or("no auc column")?;
    let row = text
        .lines()
        .find(|l| l.starts_with("lr,mean,"))
        .ok_or("no lr mean row")?;
    row.split(',')
        .nth(col)
        .ok_or("short row")?
        .parse()
        .map_err(|e| format!("{e}"))
}

fn end_to_end() -> Outcome {
    let start = Instant::now();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let manifest = write_phantoms(dir.path(), 40, 32)?;
    let feats = dir.path().join("features.csv");
    let report = dir.path().join("report.csv");
    let (m, f, r) = (
        manifest.to_str().unwrap(),
        feats.to_str().unwrap(),
        report.to_str().unwrap(),
    );
    run(&[
        "pipeline",
        "--manifest",
        m,
        "--patch-size",
        "3",
        "--stats",
        "mean,std",
        "--seed",
        "0",
        "--out",
        f,
    ])?;
    run(&[
        "cv",
        "--features",
        f,
        "--classifier",
        "lr",
        "--seed",
        "0",
        "--out",
        r,
    ])?;
    let auc = lr_mean_auc(&report)?;
    let elapsed = start.elapsed();
    ensure(auc >= 90.0, || format!("LR mean AUC {auc:.1}"))?;
    ensure(elapsed < Duration::from_secs(300), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!(
        "80 volumes at 32^3, LR mean AUC {auc:.1}, {elapsed:.1?}"
    ))
}

fn timing_direction() -> Outcome {
    let (v, m) = random_masked(64, 2).map_err(|e| e.to_string())?;
    let c = mask_and_crop(&v, &m, 2).map_err(|e| e.to_string())?;
    let cfg = PatchConfig::stats(6, vec![Stat::Mean, Stat::Std]);
    let opts = BenchOptions {
        trials: 20,
        ..BenchOptions::default()
    };
    let report = bench_ph(&c.volume, &c.mask, &cfg, &opts).map_err(|e| e.to_string())?;
    let patch = report.get("patch").ok_or("no patch timing")?;
    let cubical = report.get("cubical").ok_or("no cubical timing")?;
    ensure(patch.d == Some(3), || {
        format!("point dimension {:?}", patch.d)
    })?;
    ensure(patch.mean_s < cubical.mean_s, || {
        format!(
            "patch {:.4}s >= cubical {:.4}s",
            patch.mean_s, cubical.mean_s
        )
    })?;
    Ok(format!(
        "patch {:.4}s vs cubical {:.4}s ({:.0}x) over 20 trials",
        patch.mean_s,
        cubical.mean_s,
        cubical.mean_s / patch.mean_s
    ))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let manifest = write_phantoms(dir.path(), 6, 20)?;
    let m = manifest.to_str().unwrap();
    let mut outputs = Vec::new();
    for round in 0..2 {
        let feats = dir.path().join(format!("f{round}.csv"));
        let report = dir.path().join(format!("r{round}.csv"));
        let (f, r) = (feats.to_str().unwrap(), report.to_str().unwrap());
        run(&[
            "pipeline",
            "--manifest",
            m,
            "--patch-size",
            "4",
            "--stats",
            "median,iqr,entropy",
            "--seed",
            "7",
            "--out",
            f,
        ])?;
        run(&["cv", "--features", f, "--seed", "7", "--deep", "--out", r])?;
        let read = |p: &Path| std::fs::read(p).map_err(|e| e.to_string());
        outputs.push((read(&feats)?, read(&report)?));
    }
    ensure(outputs[0].0 == outputs[1].0, || {
        "feature tables differ".into()
    })?;
    ensure(outputs[0].1 == outputs[1].1, || "cv reports differ".into())?;
    Ok(format!(
        "{} + {} bytes identical across runs",
        outputs[0].0.len(),
        outputs[0].1.len()
    ))
}

fn main() {
    let checks: [Check; 9] = [
        ("persistence oracle equivalence", persistence_oracle),
        ("cubical correctness", cubical_correctness),
        ("alpha correctness", alpha_correctness),
        ("patch encoding", patch_encoding),
        ("vectorizer contract", vectorizer_contract),
        ("grid-search combinatorics", grid_combinatorics),
        ("end-to-end synthetic classification", end_to_end),
        ("timing direction", timing_direction),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (name, check) in checks {
        let t = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into()))
        });
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail} [{:.1?}]", t.elapsed()),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why} [{:.1?}]", t.elapsed());
            }
        }
    }
    println!(
        "{} of {} acceptance checks passed",
        checks.len() - failed,
        checks.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
