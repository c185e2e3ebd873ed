//! Shared helpers for the integration tests: a seeded corpus of valid weighted
//! orbit spaces, random changes of basis and relabelings, and a small exact
//! rank routine that does not go through the library.
#![allow(dead_code)]

use itertools::Itertools;
use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sphere_quotient::lattice::IntegerMatrix;
use sphere_quotient::polytope::{Block, BlockKind, BlockPolytope};
use sphere_quotient::weights::{validate, Mode, WeightedOrbitSpace};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn fixture(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub const FIXTURES: &[&str] = &[
    "cp2.json",
    "s3s3.json",
    "orbifold.json",
    "interval.json",
    "suspension.json",
    "big.json",
];

/// A product of random elementary column operations, `k × k`.
pub fn random_unimodular(rng: &mut impl Rng, k: usize) -> IntegerMatrix {
    let mut v: Vec<Vec<i64>> = (0..k)
        .map(|i| (0..k).map(|j| (i == j) as i64).collect())
        .collect();
    for _ in 0..2 * k + 2 {
        let (s, t) = (rng.gen_range(0..k), rng.gen_range(0..k));
        if s == t {
            if rng.gen_bool(0.5) {
                v.iter_mut().for_each(|r| r[s] = -r[s]);
            }
        } else if rng.gen_bool(0.2) {
            v.iter_mut().for_each(|r| r.swap(s, t));
        } else {
            let f = *[-2i64, -1, 1, 2].choose(rng).unwrap();
            v.iter_mut().for_each(|r| r[t] += f * r[s]);
        }
    }
    IntegerMatrix::from_i64_rows(k, &v)
}

pub fn random_blocks(rng: &mut impl Rng, max_dim: usize) -> Vec<Block> {
    loop {
        let count = rng.gen_range(1..=3);
        let blocks: Vec<Block> = (0..count)
            .map(|_| {
                if rng.gen_bool(0.3) {
                    Block::suspension(rng.gen_range(2..=3)).unwrap()
                } else {
                    Block::simplex(rng.gen_range(1..=3)).unwrap()
                }
            })
            .collect();
        if blocks.iter().map(|b| b.dim()).sum::<usize>() <= max_dim {
            return blocks;
        }
    }
}

/// Local weights of one block: `(rows, columns)`.
///
/// A full simplex gets the identity on `d + 1` columns, a reduced simplex
/// `e_1, ..., e_d, -(e_1 + ... + e_d)` on `d` columns, and a suspension a
/// random unimodular `d × d` matrix.
fn block_weights(rng: &mut impl Rng, b: &Block, full: bool) -> (Vec<Vec<i64>>, usize) {
    let d = b.dim();
    let unit = |n: usize, i: usize| (0..n).map(|j| (i == j) as i64).collect::<Vec<_>>();
    match (b.kind(), full) {
        (BlockKind::Simplex, true) => ((0..=d).map(|i| unit(d + 1, i)).collect(), d + 1),
        (BlockKind::Simplex, false) => {
            let mut rows: Vec<_> = (0..d).map(|i| unit(d, i)).collect();
            rows.push(vec![-1; d]);
            (rows, d)
        }
        (BlockKind::Suspension, _) => {
            let v = random_unimodular(rng, d);
            (v.to_i64_rows().unwrap(), d)
        }
    }
}

/// A random manifold-valid space with `k ≤ max_k` and `dim P ≤ max_dim`.
///
/// With `square` set every simplex block is full, so `m = k`.
pub fn random_space(
    rng: &mut impl Rng,
    max_k: usize,
    max_dim: usize,
    square: bool,
) -> WeightedOrbitSpace {
    loop {
        let blocks = random_blocks(rng, max_dim);
        let parts: Vec<_> = blocks
            .iter()
            .map(|b| {
                let full = square || rng.gen_bool(0.5);
                block_weights(rng, b, full)
            })
            .collect();
        let k: usize = parts.iter().map(|p| p.1).sum();
        if k > max_k {
            continue;
        }
        let mut rows = Vec::new();
        let mut offset = 0;
        for (local, width) in &parts {
            for r in local {
                let mut row = vec![0i64; k];
                row[offset..offset + width].copy_from_slice(r);
                rows.push(row);
            }
            offset += width;
        }
        let p = BlockPolytope::new(blocks).unwrap();
        let plain =
            WeightedOrbitSpace::new(p.clone(), k, IntegerMatrix::from_i64_rows(k, &rows)).unwrap();
        debug_assert!(validate(&plain, Mode::Manifold).passed);

        // Couple the last row of each block to the other blocks' columns.
        let mut w = plain.clone();
        if parts.len() > 1 && rng.gen_bool(0.6) {
            for _ in 0..8 {
                let mut coupled = rows.clone();
                let mut facet = 0;
                let mut col = 0;
                for (local, width) in &parts {
                    facet += local.len();
                    for (c, entry) in coupled[facet - 1].iter_mut().enumerate() {
                        if !(col..col + width).contains(&c) && rng.gen_bool(0.3) {
                            *entry += rng.gen_range(-2..=2);
                        }
                    }
                    col += width;
                }
                let cand = WeightedOrbitSpace::new(
                    p.clone(),
                    k,
                    IntegerMatrix::from_i64_rows(k, &coupled),
                )
                .unwrap();
                if validate(&cand, Mode::Manifold).passed {
                    w = cand;
                    break;
                }
            }
        }

        let v = random_unimodular(rng, k);
        let moved = WeightedOrbitSpace::new(p, k, w.weights().mul(&v).unwrap()).unwrap();
        assert!(
            validate(&moved, Mode::Manifold).passed,
            "basis change broke validity"
        );
        return moved;
    }
}

pub fn corpus(
    seed: u64,
    count: usize,
    max_k: usize,
    max_dim: usize,
    square: bool,
) -> Vec<WeightedOrbitSpace> {
    let mut rng = rng(seed);
    (0..count)
        .map(|_| random_space(&mut rng, max_k, max_dim, square))
        .collect()
}

/// Reorders blocks and the facets inside each block.
///
/// Returns the relabeled space and `perm` with new facet `i` = old facet `perm[i]`.
pub fn relabel(rng: &mut impl Rng, w: &WeightedOrbitSpace) -> (WeightedOrbitSpace, Vec<usize>) {
    let p = w.polytope();
    let mut order: Vec<usize> = (0..p.blocks().len()).collect();
    order.shuffle(rng);
    let mut perm = Vec::with_capacity(p.facet_count());
    for &b in &order {
        let mut local: Vec<usize> = p.facet_range(b).collect();
        local.shuffle(rng);
        perm.extend(local);
    }
    let blocks = order.iter().map(|&b| p.blocks()[b]).collect();
    let rows = perm.iter().map(|&i| w.weights().row(i).to_vec()).collect();
    let weights = IntegerMatrix::from_rows(w.torus_rank(), rows).unwrap();
    let q = BlockPolytope::new(blocks).unwrap();
    (
        WeightedOrbitSpace::new(q, w.torus_rank(), weights).unwrap(),
        perm,
    )
}

pub fn select_columns(m: &IntegerMatrix, perm: &[usize]) -> IntegerMatrix {
    let rows = m
        .iter_rows()
        .map(|r| perm.iter().map(|&j| r[j].clone()).collect())
        .collect();
    IntegerMatrix::from_rows(perm.len(), rows).unwrap()
}

pub fn to_i64(m: &IntegerMatrix) -> Vec<Vec<i64>> {
    m.iter_rows()
        .map(|r| {
            r.iter()
                .map(|x| x.to_i64().expect("small entries"))
                .collect()
        })
        .collect()
}

/// Rank by fraction-free elimination in `i128`, reducing rows by their gcd.
pub fn rank_i128(rows: &[Vec<i64>]) -> usize {
    let mut a: Vec<Vec<i128>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| x as i128).collect())
        .collect();
    let cols = a.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..a.len()).find(|&i| a[i][c] != 0) else {
            continue;
        };
        a.swap(rank, p);
        for i in rank + 1..a.len() {
            if a[i][c] != 0 {
                let (x, y) = (a[rank][c], a[i][c]);
                let (top, bottom) = a.split_at_mut(i);
                for (v, &pv) in bottom[0].iter_mut().zip(&top[rank]) {
                    *v = *v * x - pv * y;
                }
                let g = a[i].iter().fold(0i128, |g, &v| gcd(g, v));
                if g > 1 {
                    a[i].iter_mut().for_each(|v| *v /= g);
                }
            }
        }
        rank += 1;
    }
    rank
}

fn gcd(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Determinant by Laplace expansion, fine for the tiny minors used here.
pub fn det_i128(m: &[Vec<i128>]) -> i128 {
    match m.len() {
        0 => 1,
        1 => m[0][0],
        n => (0..n)
            .map(|j| {
                let minor: Vec<Vec<i128>> = m[1..]
                    .iter()
                    .map(|r| {
                        r.iter()
                            .enumerate()
                            .filter(|&(c, _)| c != j)
                            .map(|(_, &v)| v)
                            .collect()
                    })
                    .collect();
                let sign = if j % 2 == 0 { 1 } else { -1 };
                sign * m[0][j] * det_i128(&minor)
            })
            .sum(),
    }
}

/// An `r × k` matrix of rank `r` is saturated iff its maximal minors have gcd 1.
pub fn saturated_by_minors(rows: &[Vec<i64>]) -> bool {
    let r = rows.len();
    if r == 0 {
        return true;
    }
    let k = rows[0].len();
    let mut g = 0i128;
    for cols in (0..k).combinations(r) {
        let minor: Vec<Vec<i128>> = rows
            .iter()
            .map(|row| cols.iter().map(|&c| row[c] as i128).collect())
            .collect();
        g = gcd(g, det_i128(&minor));
        if g == 1 {
            return true;
        }
    }
    g == 1
}

/// Weight rows of the facets through each vertex, straight from the polytope.
pub fn vertex_rows(w: &WeightedOrbitSpace) -> Vec<Vec<Vec<i64>>> {
    let weights = to_i64(w.weights());
    let p = w.polytope();
    p.vertices()
        .iter()
        .map(|v| {
            p.facets_containing(v)
                .unwrap()
                .iter()
                .map(|&f| weights[f].clone())
                .collect()
        })
        .collect()
}

pub fn big(rows: &[Vec<i64>]) -> Vec<Vec<BigInt>> {
    rows.iter()
        .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
        .collect()
}
