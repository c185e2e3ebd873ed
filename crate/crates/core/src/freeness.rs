//! Which circles and subtori of `T^k` act freely or almost freely.
//!
//! Every face's isotropy torus sits inside the isotropy torus of one of its
//! vertices, so all checks here run over vertices only. For each vertex the
//! isotropy lattice `L` is saturated and a unimodular `V` with `L·V = Z^s × 0`
//! gives the quotient map `Z^k → Z^k / L ≅ Z^{k-s}`, `x ↦ (x·V)[s..]`. A subtorus
//! with basis `B` then acts almost freely at that vertex iff `B` projects to a
//! full-rank matrix, and freely iff the projection is saturated.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::lattice::{self, IntegerMatrix, LatticeError};
use crate::polytope::{BlockKind, FaceSelector};
use crate::weights::{self, Mode, UnimodularChange, WeightedOrbitSpace, WeightsError};

/// Coefficient bound used by [`free_dimension`] unless overridden.
pub const DEFAULT_FREE_DIM_BOUND: u32 = 3;

/// Search nodes [`free_dimension`] may visit before giving up on exhaustiveness.
const FREE_DIM_NODE_BUDGET: usize = 2_000_000;

/// [`free_rank`] never needs coefficients anywhere near this large; hitting it
/// means something upstream is broken.
const FREE_RANK_MAX_BOUND: u32 = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FreenessError {
    #[error("circle weight must be a nonzero primitive vector")]
    NotPrimitive,
    #[error("subtorus basis is not saturated")]
    NotSaturated,
    #[error("circle of rank {circle} does not fit torus of rank {torus}")]
    RankMismatch { circle: usize, torus: usize },
    #[error("weights must be normalized to the identity first")]
    NotNormalized,
    #[error("no subtorus certificate found with coefficients up to {0}")]
    SearchExhausted(u32),
    #[error(transparent)]
    Weights(#[from] WeightsError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// The circle `G(a) = {exp(2πi t·a)}` for a primitive `a`, stored with its
/// first nonzero entry positive since `G(a) = G(-a)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct CircleSubgroup(#[serde(serialize_with = "crate::json::ints")] Vec<BigInt>);

impl CircleSubgroup {
    pub fn new(mut a: Vec<BigInt>) -> Result<Self, FreenessError> {
        if !lattice::is_primitive(&a) {
            return Err(FreenessError::NotPrimitive);
        }
        if a.iter()
            .find(|x| !x.is_zero())
            .is_some_and(Signed::is_negative)
        {
            for x in &mut a {
                *x = -std::mem::take(x);
            }
        }
        Ok(CircleSubgroup(a))
    }

    pub fn from_i64(a: &[i64]) -> Result<Self, FreenessError> {
        Self::new(a.iter().map(|&x| BigInt::from(x)).collect())
    }

    pub fn weight(&self) -> &[BigInt] {
        &self.0
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    /// The same circle written in the basis after `change`.
    pub fn transformed(&self, change: &UnimodularChange) -> Result<Self, FreenessError> {
        Self::new(change.apply(&self.0)?)
    }
}

impl fmt::Display for CircleSubgroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VertexWitness {
    pub vertex: FaceSelector,
    /// Invariant factors of the subtorus basis stacked on the vertex isotropy.
    #[serde(serialize_with = "crate::json::ints")]
    pub invariant_factors: Vec<BigInt>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FreenessCertificate {
    pub subtorus_basis: IntegerMatrix,
    pub witnesses: Vec<VertexWitness>,
    /// Largest coefficient bound the search had to use.
    pub coefficient_bound: u32,
    /// Whether the reported rank is provably the maximum at that bound.
    pub exhaustive: bool,
}

/// True iff `G(a) ∩ T_B` is trivial for the subtorus spanned by the rows of
/// the saturated matrix `b`.
pub fn trivial_intersection(a: &CircleSubgroup, b: &IntegerMatrix) -> Result<bool, FreenessError> {
    if a.rank() != b.cols() {
        return Err(FreenessError::RankMismatch {
            circle: a.rank(),
            torus: b.cols(),
        });
    }
    if !lattice::is_saturated(b)? {
        return Err(FreenessError::NotSaturated);
    }
    if b.rows() == b.cols() {
        return Ok(false);
    }
    Ok(lattice::is_saturated(&b.with_leading_row(a.weight())?)?)
}

/// Checks `a` against the isotropy of every vertex.
pub fn acts_freely(w: &WeightedOrbitSpace, a: &CircleSubgroup) -> Result<bool, FreenessError> {
    let frames = VertexFrames::for_valid(w)?;
    check_rank(w, a)?;
    Ok(frames.circle_is_free(a.weight()))
}

/// Like [`acts_freely`], but walks every face of the polytope and uses the
/// direct stacked-matrix test. Slow; meant for cross-checking.
pub fn acts_freely_all_faces(
    w: &WeightedOrbitSpace,
    a: &CircleSubgroup,
) -> Result<bool, FreenessError> {
    weights::validate(w, Mode::Orbifold).into_result()?;
    check_rank(w, a)?;
    for face in w.polytope().faces() {
        let iso = lattice::saturation(&w.isotropy_matrix(&face)?);
        if !trivial_intersection(a, &iso)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Every isotropy group meets `G(a)` in a finite group.
pub fn acts_almost_freely(
    w: &WeightedOrbitSpace,
    a: &CircleSubgroup,
) -> Result<bool, FreenessError> {
    let frames = VertexFrames::for_valid(w)?;
    check_rank(w, a)?;
    Ok(frames
        .frames
        .iter()
        .all(|f| f.project_big(a.weight()).iter().any(|x| !x.is_zero())))
}

fn check_rank(w: &WeightedOrbitSpace, a: &CircleSubgroup) -> Result<(), FreenessError> {
    if a.rank() != w.torus_rank() {
        return Err(FreenessError::RankMismatch {
            circle: a.rank(),
            torus: w.torus_rank(),
        });
    }
    Ok(())
}

/// Free rank `2k - n`, with a saturated subtorus basis acting almost freely.
///
/// The basis is grown greedily: unit vectors first, then `e_i ± e_j`, then a
/// lexicographic sweep of all primitive vectors with a growing coefficient
/// bound. Each accepted vector keeps the basis saturated and raises the rank of
/// every vertex isotropy, so the search always completes.
pub fn free_rank(w: &WeightedOrbitSpace) -> Result<(usize, FreenessCertificate), FreenessError> {
    let frames = VertexFrames::for_valid(w)?;
    let k = w.torus_rank();
    let target = k - w.polytope().dim();
    let mut basis: Vec<Vec<BigInt>> = Vec::with_capacity(target);
    let mut used_bound = 0;

    let accepts = |basis: &[Vec<BigInt>], x: &[BigInt]| -> bool {
        let mut rows = basis.to_vec();
        rows.push(x.to_vec());
        let m = IntegerMatrix::from_rows(k, rows).expect("uniform width");
        lattice::is_saturated(&m).unwrap_or(false)
            && frames.frames.iter().all(|f| f.almost_free(&m))
    };

    let mut bound = 1;
    'search: while basis.len() < target {
        if bound > FREE_RANK_MAX_BOUND {
            return Err(FreenessError::SearchExhausted(FREE_RANK_MAX_BOUND));
        }
        let staged: Box<dyn Iterator<Item = Vec<i64>>> = if bound == 1 {
            Box::new(search_order(k, 1))
        } else {
            Box::new(
                canonical_vectors(k, bound)
                    .filter(|v| v.iter().any(|x| x.unsigned_abs() == bound as u64)),
            )
        };
        for x in staged {
            let x: Vec<BigInt> = x.into_iter().map(BigInt::from).collect();
            if accepts(&basis, &x) {
                basis.push(x);
                used_bound = used_bound.max(bound);
                continue 'search;
            }
        }
        bound += 1;
    }

    let basis = IntegerMatrix::from_rows(k, basis)?;
    let witnesses = frames.witnesses(&basis)?;
    Ok((
        target,
        FreenessCertificate {
            subtorus_basis: basis,
            witnesses,
            coefficient_bound: used_bound,
            exhaustive: true,
        },
    ))
}

/// Largest rank `r ≤ 2k - n` of a subtorus acting freely whose basis has all
/// coefficients in `[-bound, bound]`.
///
/// Depth-first search over increasing tuples of freely acting circles. The
/// search is complete at the given bound unless the node budget runs out, in
/// which case the certificate is marked non-exhaustive.
pub fn free_dimension(
    w: &WeightedOrbitSpace,
    bound: u32,
) -> Result<(usize, FreenessCertificate), FreenessError> {
    let frames = VertexFrames::for_valid(w)?;
    let k = w.torus_rank();
    let upper = k - w.polytope().dim();
    let candidates: Vec<Vec<i64>> = search_order(k, bound)
        .filter(|v| frames.circle_is_free_i64(v))
        .collect();
    // Projections of every candidate at every vertex, computed once.
    let projected: Vec<Vec<Vec<BigInt>>> = candidates
        .iter()
        .map(|c| {
            let c: Vec<BigInt> = c.iter().map(|&x| BigInt::from(x)).collect();
            frames.frames.iter().map(|f| f.project_big(&c)).collect()
        })
        .collect();

    let mut complete = true;
    for r in (1..=upper).rev() {
        let mut search = TupleSearch {
            projected: &projected,
            frames: &frames,
            budget: FREE_DIM_NODE_BUDGET,
            chosen: Vec::with_capacity(r),
        };
        match search.run(r, 0) {
            Some(true) => {
                let rows = search
                    .chosen
                    .iter()
                    .map(|&i| candidates[i].iter().map(|&x| BigInt::from(x)).collect())
                    .collect();
                let basis = IntegerMatrix::from_rows(k, rows)?;
                let witnesses = frames.witnesses(&basis)?;
                let used = max_abs(&basis);
                return Ok((
                    r,
                    FreenessCertificate {
                        subtorus_basis: basis,
                        witnesses,
                        coefficient_bound: used,
                        exhaustive: complete,
                    },
                ));
            }
            Some(false) => {}
            None => complete = false,
        }
    }
    let basis = IntegerMatrix::zeros(0, k);
    let witnesses = frames.witnesses(&basis)?;
    Ok((
        0,
        FreenessCertificate {
            subtorus_basis: basis,
            witnesses,
            coefficient_bound: 0,
            exhaustive: complete,
        },
    ))
}

struct TupleSearch<'a> {
    projected: &'a [Vec<Vec<BigInt>>],
    frames: &'a VertexFrames,
    budget: usize,
    chosen: Vec<usize>,
}

impl TupleSearch<'_> {
    /// `Some(true)` when a tuple was found, `Some(false)` when none exists,
    /// `None` when the budget ran out first.
    fn run(&mut self, target: usize, start: usize) -> Option<bool> {
        if self.chosen.len() == target {
            return Some(true);
        }
        let mut exhausted = false;
        for i in start..self.projected.len() {
            if self.projected.len() - i < target - self.chosen.len() {
                break;
            }
            if self.budget == 0 {
                return None;
            }
            self.budget -= 1;
            self.chosen.push(i);
            if self.chosen.len() == 1 || self.extends_freely() {
                match self.run(target, i + 1) {
                    Some(true) => return Some(true),
                    Some(false) => {}
                    None => exhausted = true,
                }
            }
            self.chosen.pop();
            if exhausted {
                return None;
            }
        }
        Some(false)
    }

    fn extends_freely(&self) -> bool {
        (0..self.frames.frames.len()).all(|v| {
            let rows: Vec<Vec<BigInt>> = self
                .chosen
                .iter()
                .map(|&i| self.projected[i][v].clone())
                .collect();
            let width = self.frames.frames[v].quotient_rank();
            if rows.len() > width {
                return false;
            }
            let m = IntegerMatrix::from_rows(width, rows).expect("uniform width");
            lattice::is_saturated(&m).unwrap_or(false)
        })
    }
}

/// The diagonal circle of each simplex block of a normalized space: the sum of
/// the unit weights of that block's facets.
pub fn lemma_free_circles(w: &WeightedOrbitSpace) -> Result<Vec<CircleSubgroup>, FreenessError> {
    if !weights::is_normalized(w) {
        return Err(FreenessError::NotNormalized);
    }
    let p = w.polytope();
    let k = w.torus_rank();
    let circles = p
        .blocks()
        .iter()
        .enumerate()
        .filter(|(_, b)| b.kind() == BlockKind::Simplex)
        .map(|(i, _)| {
            let range = p.facet_range(i);
            let a = (0..k)
                .map(|j| BigInt::from(range.contains(&j) as i64))
                .collect();
            CircleSubgroup::new(a)
        })
        .collect::<Result<Vec<_>, _>>()?;
    debug_assert_eq!(circles.len(), 2 * k - w.manifold_dim());
    Ok(circles)
}

/// Brute force: every canonical primitive vector with entries in
/// `[-max_norm, max_norm]` whose circle acts freely, in lexicographic order.
pub fn oracle_enumerate_free_circles(w: &WeightedOrbitSpace, max_norm: u32) -> Vec<CircleSubgroup> {
    let frames = VertexFrames::new(w);
    canonical_vectors(w.torus_rank(), max_norm)
        .filter(|v| frames.circle_is_free_i64(v))
        .map(|v| CircleSubgroup::from_i64(&v).expect("canonical vectors are primitive"))
        .collect()
}

fn max_abs(m: &IntegerMatrix) -> u32 {
    m.iter_rows()
        .flatten()
        .map(|x| x.magnitude().to_u32().unwrap_or(u32::MAX))
        .max()
        .unwrap_or(0)
}

/// Unit vectors, then `e_i ± e_j`, then the remaining canonical vectors up to
/// `bound` in lexicographic order.
fn search_order(k: usize, bound: u32) -> impl Iterator<Item = Vec<i64>> {
    let simple: Vec<Vec<i64>> = if bound == 0 {
        vec![]
    } else {
        unit_and_pair_vectors(k).collect()
    };
    let rest = canonical_vectors(k, bound).filter({
        let simple = simple.clone();
        move |v| !simple.contains(v)
    });
    simple.into_iter().chain(rest)
}

/// `e_i`, then `e_i + e_j` and `e_i - e_j` for `i < j`.
fn unit_and_pair_vectors(k: usize) -> impl Iterator<Item = Vec<i64>> {
    let units = (0..k).map(move |i| {
        let mut v = vec![0; k];
        v[i] = 1;
        v
    });
    let pairs = (0..k).flat_map(move |i| {
        (i + 1..k).flat_map(move |j| {
            [1, -1].into_iter().map(move |s| {
                let mut v = vec![0; k];
                v[i] = 1;
                v[j] = s;
                v
            })
        })
    });
    units.chain(pairs)
}

/// All primitive vectors in `[-bound, bound]^k` whose first nonzero entry is
/// positive, in lexicographic order.
pub fn canonical_vectors(k: usize, bound: u32) -> impl Iterator<Item = Vec<i64>> {
    let b = bound as i64;
    let mut current = if k == 0 || b == 0 {
        None
    } else {
        Some(vec![-b; k])
    };
    std::iter::from_fn(move || loop {
        let v = current.as_mut()?;
        let out = v.clone();
        // odometer increment, last coordinate fastest
        let mut i = k;
        loop {
            if i == 0 {
                current = None;
                break;
            }
            i -= 1;
            if v[i] < b {
                v[i] += 1;
                break;
            }
            v[i] = -b;
        }
        let lead = out.iter().find(|&&x| x != 0);
        if lead.is_some_and(|&x| x > 0) && out.iter().fold(0i64, |g, &x| g.gcd(&x)) == 1 {
            return Some(out);
        }
    })
}

/// Quotient map `Z^k → Z^k / L` for one vertex isotropy lattice `L`.
struct VertexFrame {
    vertex: FaceSelector,
    isotropy: IntegerMatrix,
    /// `k × (k - s)`: the trailing columns of `V`.
    projection: IntegerMatrix,
    projection_i64: Option<Vec<Vec<i64>>>,
}

impl VertexFrame {
    fn new(vertex: FaceSelector, isotropy: IntegerMatrix) -> Self {
        let isotropy = lattice::saturation(&isotropy);
        let snf = lattice::smith_normal_form(&isotropy);
        let cols: Vec<usize> = (snf.rank()..isotropy.cols()).collect();
        let projection = snf.v.select_cols(&cols);
        let projection_i64 = projection.to_i64_rows();
        VertexFrame {
            vertex,
            isotropy,
            projection,
            projection_i64,
        }
    }

    fn quotient_rank(&self) -> usize {
        self.projection.cols()
    }

    fn project_big(&self, x: &[BigInt]) -> Vec<BigInt> {
        self.projection
            .left_apply(x)
            .expect("vector length matches torus rank")
    }

    /// `gcd(x·P) = 1`, on machine integers when nothing overflows.
    fn circle_is_free(&self, x: &[BigInt]) -> bool {
        if let Some(small) = x
            .iter()
            .map(ToPrimitive::to_i64)
            .collect::<Option<Vec<_>>>()
        {
            if let Some(free) = self.circle_is_free_fast(&small) {
                return free;
            }
        }
        lattice::gcd_of(&self.project_big(x)).is_one()
    }

    fn circle_is_free_fast(&self, x: &[i64]) -> Option<bool> {
        let p = self.projection_i64.as_ref()?;
        let mut g: i128 = 0;
        for j in 0..self.quotient_rank() {
            let mut acc: i128 = 0;
            for (row, &xi) in p.iter().zip(x) {
                acc = acc.checked_add((xi as i128).checked_mul(row[j] as i128)?)?;
            }
            g = g.gcd(&acc);
        }
        Some(g == 1)
    }

    fn almost_free(&self, basis: &IntegerMatrix) -> bool {
        let projected = basis
            .mul(&self.projection)
            .expect("basis width matches torus rank");
        lattice::rank(&projected) == basis.rows()
    }
}

/// Isotropy frames for every vertex of a weighted orbit space.
struct VertexFrames {
    frames: Vec<VertexFrame>,
}

impl VertexFrames {
    fn new(w: &WeightedOrbitSpace) -> Self {
        let frames = w
            .polytope()
            .vertices()
            .into_iter()
            .map(|v| {
                let iso = w.isotropy_matrix(&v).expect("enumerated vertex is valid");
                VertexFrame::new(v, iso)
            })
            .collect();
        VertexFrames { frames }
    }

    /// Frames for an input passing at least orbifold-mode validation.
    fn for_valid(w: &WeightedOrbitSpace) -> Result<Self, FreenessError> {
        weights::validate(w, Mode::Orbifold).into_result()?;
        Ok(Self::new(w))
    }

    fn circle_is_free(&self, x: &[BigInt]) -> bool {
        self.frames.iter().all(|f| f.circle_is_free(x))
    }

    fn circle_is_free_i64(&self, x: &[i64]) -> bool {
        self.frames.iter().all(|f| match f.circle_is_free_fast(x) {
            Some(free) => free,
            None => f.circle_is_free(&x.iter().map(|&v| BigInt::from(v)).collect::<Vec<_>>()),
        })
    }

    fn witnesses(&self, basis: &IntegerMatrix) -> Result<Vec<VertexWitness>, FreenessError> {
        self.frames
            .iter()
            .map(|f| {
                let stacked = basis.vstack(&f.isotropy)?;
                Ok(VertexWitness {
                    vertex: f.vertex.clone(),
                    invariant_factors: lattice::invariant_factors(&stacked),
                })
            })
            .collect()
    }
}
