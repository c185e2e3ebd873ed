//! Classification of a weighted orbit space as a free linear torus quotient of
//! a product of spheres, `M ≅ Z_P / T^l` with `l = m - k`.
//!
//! `Z_P` is the moment-angle manifold of the block polytope, a product of one
//! sphere per block. The quotient torus is the kernel of the characteristic map
//! `Z^m → Z^k`, read off directly from the weights.

use std::fmt;

use itertools::Itertools;
use serde::Serialize;

use crate::freeness::{self, FreenessCertificate, FreenessError};
use crate::lattice::{self, IntegerMatrix};
use crate::polytope::{BlockKind, BlockPolytope};
use crate::weights::{self, Mode, ValidationReport, WeightedOrbitSpace};

/// Sphere dimensions of `Z_P`, one per block in block order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct SphereProduct(Vec<usize>);

impl SphereProduct {
    pub fn factors(&self) -> &[usize] {
        &self.0
    }

    pub fn total_dim(&self) -> usize {
        self.0.iter().sum()
    }

    /// Factors as a sorted multiset, for comparisons that ignore block order.
    pub fn sorted(&self) -> Vec<usize> {
        self.0.iter().copied().sorted().collect()
    }
}

impl fmt::Display for SphereProduct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.iter().map(|d| format!("S^{d}")).join(" x "))
    }
}

/// `Δ^d ↦ S^{2d+1}`, `Σ^d ↦ S^{2d}`, multiplied over blocks.
pub fn moment_angle_type(p: &BlockPolytope) -> SphereProduct {
    SphereProduct(
        p.blocks()
            .iter()
            .map(|b| match b.kind() {
                BlockKind::Simplex => 2 * b.dim() + 1,
                BlockKind::Suspension => 2 * b.dim(),
            })
            .collect(),
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundStatus {
    Pass,
    Fail,
    NotApplicable,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoundCheck {
    pub name: &'static str,
    pub statement: String,
    pub lhs: i64,
    pub rhs: i64,
    pub status: BoundStatus,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoundsRecord {
    pub checks: Vec<BoundCheck>,
    pub passed: bool,
}

impl BoundsRecord {
    pub fn get(&self, name: &str) -> Option<&BoundCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

pub const RANK_UPPER: &str = "rank_upper";
pub const MAXIMAL_RANK_LOWER: &str = "maximal_rank_lower";
pub const QUOTIENT_RANK_AT_TOP: &str = "quotient_rank_at_top";
pub const SPHERE_DIM_LOWER: &str = "sphere_product_dim_lower";
pub const SPHERE_DIM_UPPER: &str = "sphere_product_dim_upper";

/// Symmetry-rank inequalities for a rank-`k` action on an `n`-manifold over `p`.
///
/// The lower rank bound only applies to maximal actions, and the quotient-rank
/// bound `l ≤ 2n mod 3` only at `k = ⌊2n/3⌋`.
pub fn check_bounds(n: usize, k: usize, p: &BlockPolytope) -> BoundsRecord {
    let (n, k) = (n as i64, k as i64);
    let m = p.facet_count() as i64;
    let dim_p = p.dim() as i64;
    let dim_z = dim_p + m;
    let l = m - k;
    let maximal = 2 * k - n >= 0 && !p.vertices().is_empty();
    let check = |name, statement: String, lhs: i64, rhs: i64, applies: bool| BoundCheck {
        name,
        statement,
        lhs,
        rhs,
        status: match (applies, lhs <= rhs) {
            (false, _) => BoundStatus::NotApplicable,
            (true, true) => BoundStatus::Pass,
            (true, false) => BoundStatus::Fail,
        },
    };
    let top = 2 * n / 3;
    let checks = vec![
        check(
            RANK_UPPER,
            format!("k = {k} <= floor(2n/3) = {top}"),
            k,
            top,
            true,
        ),
        check(
            MAXIMAL_RANK_LOWER,
            format!("floor(n/2) = {} <= k = {k}", n / 2),
            n / 2,
            k,
            maximal,
        ),
        check(
            QUOTIENT_RANK_AT_TOP,
            format!("l = m - k = {l} <= 2n mod 3 = {}", (2 * n) % 3),
            l,
            (2 * n) % 3,
            k == top,
        ),
        check(
            SPHERE_DIM_LOWER,
            format!("n = {n} <= dim Z = {dim_z}"),
            n,
            dim_z,
            true,
        ),
        check(
            SPHERE_DIM_UPPER,
            format!("dim Z = {dim_z} <= 3n - 3k = {}", 3 * n - 3 * k),
            dim_z,
            3 * n - 3 * k,
            true,
        ),
    ];
    let passed = checks.iter().all(|c| c.status != BoundStatus::Fail);
    BoundsRecord { checks, passed }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FreeDimension {
    pub value: usize,
    pub bound: u32,
    pub exhaustive: bool,
    pub certificate: FreenessCertificate,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FreeRank {
    pub value: usize,
    pub certificate: FreenessCertificate,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Classification {
    pub manifold_dim: usize,
    pub torus_rank: usize,
    pub polytope_dim: usize,
    pub facet_count: usize,
    pub sphere_product: SphereProduct,
    pub dim_z: usize,
    pub quotient_rank: usize,
    /// `l × m` weights of the quotient torus `T^l ⊂ T^m`, in Hermite form.
    pub kernel_basis: IntegerMatrix,
    pub presentation: String,
    pub maximal: bool,
    pub minimal_orbit_dim: usize,
    pub free_rank: FreeRank,
    pub free_dimension: FreeDimension,
    pub bounds: BoundsRecord,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClassificationReport {
    pub mode: Mode,
    pub validation: ValidationReport,
    pub classification: Option<Classification>,
}

/// Validates `w`, then computes its sphere-product quotient presentation.
///
/// A failed validation is reported in the result, not as an error.
pub fn classify(
    w: &WeightedOrbitSpace,
    mode: Mode,
    free_dim_bound: u32,
) -> Result<ClassificationReport, FreenessError> {
    let validation = weights::validate(w, mode);
    if !validation.passed {
        return Ok(ClassificationReport {
            mode,
            validation,
            classification: None,
        });
    }
    let p = w.polytope();
    let (n, k, m) = (w.manifold_dim(), w.torus_rank(), w.facet_count());
    let sphere_product = moment_angle_type(p);
    let kernel_basis = lattice::kernel_basis(&w.weights().transpose());
    let quotient_rank = kernel_basis.rows();
    debug_assert_eq!(quotient_rank, m - k);

    let (fr, fr_cert) = freeness::free_rank(w)?;
    let (fd, fd_cert) = freeness::free_dimension(w, free_dim_bound)?;

    let presentation = if quotient_rank == 0 {
        sphere_product.to_string()
    } else {
        format!("({sphere_product}) / T^{quotient_rank}")
    };
    let mut notes = vec!["almost maximal actions are treated as maximal".to_string()];
    if mode == Mode::Orbifold {
        notes.push(
            "orbifold mode: isotropy checked by rank only; the quotient torus need not act freely"
                .into(),
        );
    }
    if fd < fr {
        notes.push(format!(
            "free dimension {fd} is below free rank {fr} at coefficient bound {free_dim_bound}"
        ));
    }

    let classification = Classification {
        manifold_dim: n,
        torus_rank: k,
        polytope_dim: p.dim(),
        facet_count: m,
        dim_z: sphere_product.total_dim(),
        sphere_product,
        quotient_rank,
        kernel_basis,
        presentation,
        maximal: !p.vertices().is_empty() && 2 * k >= n,
        minimal_orbit_dim: 2 * k - n,
        free_rank: FreeRank {
            value: fr,
            certificate: fr_cert,
        },
        free_dimension: FreeDimension {
            value: fd,
            bound: free_dim_bound,
            exhaustive: fd_cert.exhaustive,
            certificate: fd_cert,
        },
        bounds: check_bounds(n, k, p),
        notes,
    };
    Ok(ClassificationReport {
        mode,
        validation,
        classification: Some(classification),
    })
}
