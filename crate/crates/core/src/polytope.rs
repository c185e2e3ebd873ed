//! Products of simplices and suspended simplices, described purely through
//! their face posets.
//!
//! Facet numbering is global and canonical: blocks in declaration order, and
//! inside a block `Δ^d` facet `i` is the one omitting vertex `i`. A suspension
//! `Σ^d` is the suspension of `Δ^{d-1}`; its facet `j` is the suspension of the
//! base facet omitting base vertex `j`, and its only vertices are two poles.

use std::fmt;
use std::ops::Range;

use itertools::Itertools;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolytopeError {
    #[error("a polytope needs at least one block")]
    NoBlocks,
    #[error("{kind} block needs dimension >= {min}, got {dim}")]
    BlockDimension {
        kind: BlockKind,
        dim: usize,
        min: usize,
    },
    #[error("facet count {facets} outside [{dim}, {}]", 2 * .dim)]
    FacetBound { dim: usize, facets: usize },
    #[error("face selector has {got} parts for a polytope with {expected} blocks")]
    FaceArity { expected: usize, got: usize },
    #[error("invalid face on block {block}: {reason}")]
    InvalidFace { block: usize, reason: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BlockKind {
    Simplex,
    Suspension,
}

impl fmt::Display for BlockKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BlockKind::Simplex => "simplex",
            BlockKind::Suspension => "suspension",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Block {
    kind: BlockKind,
    dim: usize,
}

impl Block {
    pub fn new(kind: BlockKind, dim: usize) -> Result<Self, PolytopeError> {
        // Σ^1 would just be Δ^1 again.
        let min = match kind {
            BlockKind::Simplex => 1,
            BlockKind::Suspension => 2,
        };
        if dim < min {
            return Err(PolytopeError::BlockDimension { kind, dim, min });
        }
        Ok(Block { kind, dim })
    }

    pub fn simplex(dim: usize) -> Result<Self, PolytopeError> {
        Self::new(BlockKind::Simplex, dim)
    }

    pub fn suspension(dim: usize) -> Result<Self, PolytopeError> {
        Self::new(BlockKind::Suspension, dim)
    }

    pub fn kind(&self) -> BlockKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn facet_count(&self) -> usize {
        match self.kind {
            BlockKind::Simplex => self.dim + 1,
            BlockKind::Suspension => self.dim,
        }
    }

    fn vertices(&self) -> Vec<BlockFace> {
        match self.kind {
            BlockKind::Simplex => (0..=self.dim)
                .map(|i| BlockFace::Simplex(vec![i]))
                .collect(),
            BlockKind::Suspension => {
                vec![BlockFace::Pole(Pole::North), BlockFace::Pole(Pole::South)]
            }
        }
    }

    fn faces(&self) -> Vec<BlockFace> {
        let mut out = vec![BlockFace::Full];
        match self.kind {
            BlockKind::Simplex => {
                for size in 1..=self.dim {
                    out.extend((0..=self.dim).combinations(size).map(BlockFace::Simplex));
                }
            }
            BlockKind::Suspension => {
                out.push(BlockFace::Pole(Pole::North));
                out.push(BlockFace::Pole(Pole::South));
                for size in 1..self.dim {
                    out.extend((0..self.dim).combinations(size).map(BlockFace::Suspension));
                }
            }
        }
        out
    }

    fn facet(&self, i: usize) -> BlockFace {
        match self.kind {
            BlockKind::Simplex => BlockFace::Simplex((0..=self.dim).filter(|&v| v != i).collect()),
            BlockKind::Suspension => {
                BlockFace::Suspension((0..self.dim).filter(|&v| v != i).collect())
            }
        }
    }

    fn check_face(&self, face: &BlockFace) -> Result<(), String> {
        let check_subset = |s: &[usize], bound: usize| -> Result<(), String> {
            if s.is_empty() {
                return Err("empty vertex set".into());
            }
            if !s.windows(2).all(|w| w[0] < w[1]) {
                return Err(format!("vertex set {s:?} is not strictly increasing"));
            }
            if s.iter().any(|&v| v >= bound) {
                return Err(format!("vertex set {s:?} exceeds {}", bound - 1));
            }
            Ok(())
        };
        match (self.kind, face) {
            (_, BlockFace::Full) => Ok(()),
            (BlockKind::Simplex, BlockFace::Simplex(s)) => check_subset(s, self.dim + 1),
            (BlockKind::Suspension, BlockFace::Pole(_)) => Ok(()),
            (BlockKind::Suspension, BlockFace::Suspension(s)) => {
                check_subset(s, self.dim)?;
                if s.len() == self.dim {
                    return Err("suspension face must use a proper base subset".into());
                }
                Ok(())
            }
            (kind, face) => Err(format!("{face} does not belong to a {kind} block")),
        }
    }

    /// Local indices of this block's facets containing `face`.
    fn facets_containing(&self, face: &BlockFace) -> Vec<usize> {
        match face {
            BlockFace::Full => vec![],
            BlockFace::Simplex(s) => (0..=self.dim).filter(|i| !s.contains(i)).collect(),
            BlockFace::Pole(_) => (0..self.dim).collect(),
            BlockFace::Suspension(s) => (0..self.dim).filter(|j| !s.contains(j)).collect(),
        }
    }
}

impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            BlockKind::Simplex => write!(f, "Δ^{}", self.dim),
            BlockKind::Suspension => write!(f, "Σ^{}", self.dim),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pole {
    North,
    South,
}

/// The factor of a face inside one block.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BlockFace {
    Full,
    /// Face of `Δ^d` spanned by a nonempty vertex subset of `{0..=d}`.
    Simplex(Vec<usize>),
    Pole(Pole),
    /// Suspension of the base face spanned by a nonempty proper subset of `{0..d}`.
    Suspension(Vec<usize>),
}

impl fmt::Display for BlockFace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BlockFace::Full => f.write_str("full"),
            BlockFace::Simplex(s) => write!(f, "simplex{{{}}}", s.iter().join(",")),
            BlockFace::Pole(Pole::North) => f.write_str("north"),
            BlockFace::Pole(Pole::South) => f.write_str("south"),
            BlockFace::Suspension(s) => write!(f, "susp{{{}}}", s.iter().join(",")),
        }
    }
}

/// A face of a [`BlockPolytope`]: one factor per block.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FaceSelector(pub Vec<BlockFace>);

impl FaceSelector {
    pub fn full(blocks: usize) -> Self {
        FaceSelector(vec![BlockFace::Full; blocks])
    }

    pub fn parts(&self) -> &[BlockFace] {
        &self.0
    }
}

impl fmt::Display for FaceSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.iter().join(" x "))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct BlockPolytope {
    blocks: Vec<Block>,
    #[serde(skip)]
    offsets: Vec<usize>,
}

impl BlockPolytope {
    pub fn new(blocks: Vec<Block>) -> Result<Self, PolytopeError> {
        if blocks.is_empty() {
            return Err(PolytopeError::NoBlocks);
        }
        let offsets = blocks
            .iter()
            .scan(0, |acc, b| {
                let start = *acc;
                *acc += b.facet_count();
                Some(start)
            })
            .collect();
        let p = BlockPolytope { blocks, offsets };
        let (dim, facets) = (p.dim(), p.facet_count());
        if facets < dim || facets > 2 * dim {
            return Err(PolytopeError::FacetBound { dim, facets });
        }
        Ok(p)
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn dim(&self) -> usize {
        self.blocks.iter().map(Block::dim).sum()
    }

    pub fn facet_count(&self) -> usize {
        self.blocks.iter().map(Block::facet_count).sum()
    }

    pub fn simplex_block_count(&self) -> usize {
        self.blocks
            .iter()
            .filter(|b| b.kind == BlockKind::Simplex)
            .count()
    }

    /// Global facet indices owned by block `b`.
    pub fn facet_range(&self, b: usize) -> Range<usize> {
        let start = self.offsets[b];
        start..start + self.blocks[b].facet_count()
    }

    /// Human-readable facet name, e.g. `F0^(1)` for facet 0 of the first block.
    pub fn facet_label(&self, facet: usize) -> String {
        let b = (0..self.blocks.len())
            .find(|&b| self.facet_range(b).contains(&facet))
            .expect("facet index in range");
        let prefix = match self.blocks[b].kind {
            BlockKind::Simplex => "F",
            BlockKind::Suspension => "S",
        };
        format!("{prefix}{}^({})", facet - self.offsets[b], b + 1)
    }

    /// All facets in canonical order.
    pub fn facets(&self) -> Vec<FaceSelector> {
        let mut out = Vec::with_capacity(self.facet_count());
        for (b, block) in self.blocks.iter().enumerate() {
            for i in 0..block.facet_count() {
                let mut f = FaceSelector::full(self.blocks.len());
                f.0[b] = block.facet(i);
                out.push(f);
            }
        }
        out
    }

    /// All vertices, the first block varying slowest.
    pub fn vertices(&self) -> Vec<FaceSelector> {
        self.blocks
            .iter()
            .map(Block::vertices)
            .multi_cartesian_product()
            .map(FaceSelector)
            .collect()
    }

    /// Every face, including the full polytope.
    pub fn faces(&self) -> Vec<FaceSelector> {
        self.blocks
            .iter()
            .map(Block::faces)
            .multi_cartesian_product()
            .map(FaceSelector)
            .collect()
    }

    pub fn check_face(&self, face: &FaceSelector) -> Result<(), PolytopeError> {
        if face.0.len() != self.blocks.len() {
            return Err(PolytopeError::FaceArity {
                expected: self.blocks.len(),
                got: face.0.len(),
            });
        }
        for (b, (block, part)) in self.blocks.iter().zip(&face.0).enumerate() {
            block
                .check_face(part)
                .map_err(|reason| PolytopeError::InvalidFace { block: b, reason })?;
        }
        Ok(())
    }

    pub fn codim(&self, face: &FaceSelector) -> Result<usize, PolytopeError> {
        Ok(self.facets_containing(face)?.len())
    }

    /// Sorted global indices of the facets containing `face`.
    pub fn facets_containing(&self, face: &FaceSelector) -> Result<Vec<usize>, PolytopeError> {
        self.check_face(face)?;
        Ok(self
            .blocks
            .iter()
            .zip(&face.0)
            .enumerate()
            .flat_map(|(b, (block, part))| {
                let off = self.offsets[b];
                block
                    .facets_containing(part)
                    .into_iter()
                    .map(move |i| off + i)
            })
            .collect())
    }

    /// One pair of disjoint faces per simplex block: facet `F_0` of the block
    /// and the opposite vertex `v_0`, everything else left full.
    pub fn opposing_pairs(&self) -> Vec<(FaceSelector, FaceSelector)> {
        self.blocks
            .iter()
            .enumerate()
            .filter(|(_, block)| block.kind == BlockKind::Simplex)
            .map(|(b, block)| {
                let mut facet = FaceSelector::full(self.blocks.len());
                facet.0[b] = block.facet(0);
                let mut vertex = FaceSelector::full(self.blocks.len());
                vertex.0[b] = BlockFace::Simplex(vec![0]);
                (facet, vertex)
            })
            .collect()
    }
}

impl fmt::Display for BlockPolytope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.blocks.iter().join(" x "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn poly(blocks: &[(BlockKind, usize)]) -> BlockPolytope {
        BlockPolytope::new(
            blocks
                .iter()
                .map(|&(k, d)| Block::new(k, d).unwrap())
                .collect(),
        )
        .unwrap()
    }

    use BlockKind::{Simplex as D, Suspension as S};

    #[test]
    fn facet_counts() {
        assert_eq!(poly(&[(D, 2)]).facets().len(), 3);
        assert_eq!(poly(&[(S, 2)]).facets().len(), 2);
        let p = poly(&[(D, 1), (S, 2)]);
        let labels: Vec<String> = (0..p.facet_count()).map(|i| p.facet_label(i)).collect();
        assert_eq!(labels, ["F0^(1)", "F1^(1)", "S0^(2)", "S1^(2)"]);
        assert_eq!(
            p.facets()[2],
            FaceSelector(vec![BlockFace::Full, BlockFace::Suspension(vec![1])])
        );
    }

    #[test]
    fn block_dimension_rules() {
        assert!(Block::suspension(1).is_err());
        assert!(Block::simplex(0).is_err());
        assert!(BlockPolytope::new(vec![]).is_err());
    }

    #[test]
    fn vertex_counts() {
        assert_eq!(poly(&[(D, 2)]).vertices().len(), 3);
        let sigma = poly(&[(S, 2)]).vertices();
        assert_eq!(
            sigma,
            vec![
                FaceSelector(vec![BlockFace::Pole(Pole::North)]),
                FaceSelector(vec![BlockFace::Pole(Pole::South)])
            ]
        );
        assert_eq!(poly(&[(D, 1), (D, 1)]).vertices().len(), 4);
    }

    #[test]
    fn facets_containing_examples() {
        let p = poly(&[(D, 2)]);
        let v0 = FaceSelector(vec![BlockFace::Simplex(vec![0])]);
        assert_eq!(p.facets_containing(&v0).unwrap(), vec![1, 2]);
        let q = poly(&[(S, 3)]);
        let north = FaceSelector(vec![BlockFace::Pole(Pole::North)]);
        assert_eq!(q.facets_containing(&north).unwrap(), vec![0, 1, 2]);
        let r = poly(&[(D, 1), (S, 2)]);
        assert!(r
            .facets_containing(&FaceSelector::full(2))
            .unwrap()
            .is_empty());
    }

    #[test]
    fn invalid_faces_are_rejected() {
        let p = poly(&[(D, 2), (S, 3)]);
        let bad = [
            FaceSelector(vec![BlockFace::Full]),
            FaceSelector(vec![BlockFace::Simplex(vec![]), BlockFace::Full]),
            FaceSelector(vec![BlockFace::Simplex(vec![3]), BlockFace::Full]),
            FaceSelector(vec![BlockFace::Simplex(vec![1, 0]), BlockFace::Full]),
            FaceSelector(vec![BlockFace::Pole(Pole::North), BlockFace::Full]),
            FaceSelector(vec![BlockFace::Full, BlockFace::Suspension(vec![0, 1, 2])]),
            FaceSelector(vec![BlockFace::Full, BlockFace::Simplex(vec![0])]),
        ];
        for f in bad {
            assert!(p.facets_containing(&f).is_err(), "{f} accepted");
        }
    }

    #[test]
    fn opposing_pairs_examples() {
        let p = poly(&[(D, 1)]);
        let pairs = p.opposing_pairs();
        assert_eq!(pairs.len(), 1);
        assert_eq!(pairs[0].0, FaceSelector(vec![BlockFace::Simplex(vec![1])]));
        assert_eq!(pairs[0].1, FaceSelector(vec![BlockFace::Simplex(vec![0])]));
        assert_eq!(poly(&[(D, 1), (D, 1)]).opposing_pairs().len(), 2);
        assert!(poly(&[(S, 2)]).opposing_pairs().is_empty());
    }

    fn small_polytopes() -> Vec<BlockPolytope> {
        // Every multiset of blocks with total dimension <= 4.
        fn rec(
            rem: usize,
            min: (BlockKind, usize),
            acc: &mut Vec<(BlockKind, usize)>,
            out: &mut Vec<BlockPolytope>,
        ) {
            if !acc.is_empty() {
                out.push(poly(acc));
            }
            for kind in [D, S] {
                for d in 1..=rem {
                    if (kind, d) < min || (kind == S && d < 2) {
                        continue;
                    }
                    acc.push((kind, d));
                    rec(rem - d, (kind, d), acc, out);
                    acc.pop();
                }
            }
        }
        let mut out = vec![];
        rec(4, (D, 1), &mut vec![], &mut out);
        out
    }

    #[test]
    fn nice_manifold_with_corners_exhaustive() {
        let all = small_polytopes();
        assert!(all.len() > 10);
        for p in all {
            let facets = p.facets();
            assert_eq!(
                facets.len(),
                p.blocks().iter().map(Block::facet_count).sum::<usize>()
            );
            for (i, f) in facets.iter().enumerate() {
                assert_eq!(p.facets_containing(f).unwrap(), vec![i]);
            }
            for face in p.faces() {
                let containing = p.facets_containing(&face).unwrap();
                // Codimension computed from the block formulas.
                let codim: usize = p
                    .blocks()
                    .iter()
                    .zip(face.parts())
                    .map(|(b, part)| match part {
                        BlockFace::Full => 0,
                        BlockFace::Simplex(s) => b.dim() - s.len() + 1,
                        BlockFace::Pole(_) => b.dim(),
                        BlockFace::Suspension(s) => b.dim() - s.len(),
                    })
                    .sum();
                assert_eq!(containing.len(), codim, "{p}: {face}");
            }
            for v in p.vertices() {
                assert_eq!(p.codim(&v).unwrap(), p.dim());
            }
            for (a, b) in p.opposing_pairs() {
                let fa: BTreeSet<_> = p.facets_containing(&a).unwrap().into_iter().collect();
                let fb: BTreeSet<_> = p.facets_containing(&b).unwrap().into_iter().collect();
                assert!(fa.is_disjoint(&fb));
            }
        }
    }
}
