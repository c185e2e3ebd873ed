//! Weighted orbit spaces: a block polytope whose facets carry the primitive
//! weight vectors of their circle isotropy groups.
//!
//! Weights are stored one facet per row, so the `m × k` matrix here is the
//! transpose of the characteristic map `Z^m → Z^k`.

use std::fmt;

use num_bigint::BigInt;
use num_traits::One;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::{self, IntegerMatrix, LatticeError};
use crate::polytope::{BlockPolytope, FaceSelector, PolytopeError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WeightsError {
    #[error("malformed weighted orbit space: {0}")]
    Structure(String),
    #[error("unsupported input: {0}")]
    Unsupported(String),
    #[error("input fails {mode} validation: {failed}")]
    Invalid { mode: Mode, failed: String },
    #[error(transparent)]
    Polytope(#[from] PolytopeError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

impl WeightsError {
    fn invalid(report: &ValidationReport) -> Self {
        let failed = report
            .rules
            .iter()
            .filter(|r| !r.passed)
            .map(|r| r.rule.to_string())
            .collect::<Vec<_>>()
            .join(", ");
        WeightsError::Invalid {
            mode: report.mode,
            failed,
        }
    }
}

/// Manifold mode demands saturated (connected, generating) isotropy data;
/// orbifold mode only asks for the ranks.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Manifold,
    Orbifold,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Manifold => "manifold",
            Mode::Orbifold => "orbifold",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WeightedOrbitSpace {
    polytope: BlockPolytope,
    torus_rank: usize,
    weights: IntegerMatrix,
}

impl WeightedOrbitSpace {
    pub fn new(
        polytope: BlockPolytope,
        torus_rank: usize,
        weights: IntegerMatrix,
    ) -> Result<Self, WeightsError> {
        if torus_rank == 0 {
            return Err(WeightsError::Structure(
                "torus rank must be positive".into(),
            ));
        }
        if weights.rows() != polytope.facet_count() {
            return Err(WeightsError::Structure(format!(
                "{} weight rows for {} facets",
                weights.rows(),
                polytope.facet_count()
            )));
        }
        if weights.cols() != torus_rank {
            return Err(WeightsError::Structure(format!(
                "weight rows have length {}, torus rank is {torus_rank}",
                weights.cols()
            )));
        }
        Ok(WeightedOrbitSpace {
            polytope,
            torus_rank,
            weights,
        })
    }

    pub fn polytope(&self) -> &BlockPolytope {
        &self.polytope
    }

    pub fn torus_rank(&self) -> usize {
        self.torus_rank
    }

    pub fn weights(&self) -> &IntegerMatrix {
        &self.weights
    }

    pub fn facet_count(&self) -> usize {
        self.weights.rows()
    }

    /// `n = dim P + k`.
    pub fn manifold_dim(&self) -> usize {
        self.polytope.dim() + self.torus_rank
    }

    /// Rows of the weights indexed by the facets containing `face`.
    pub fn isotropy_matrix(&self, face: &FaceSelector) -> Result<IntegerMatrix, WeightsError> {
        let facets = self.polytope.facets_containing(face)?;
        Ok(self.weights.select_rows(&facets))
    }

    /// Same orbit space with the torus basis changed: weights become `weights · V`.
    pub fn change_basis(&self, change: &UnimodularChange) -> Result<Self, WeightsError> {
        Self::new(
            self.polytope.clone(),
            self.torus_rank,
            self.weights.mul(change.matrix())?,
        )
    }
}

/// A unimodular change of torus basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct UnimodularChange {
    v: IntegerMatrix,
}

impl UnimodularChange {
    pub fn new(v: IntegerMatrix) -> Result<Self, WeightsError> {
        if !v.is_square() || !lattice::determinant(&v)?.magnitude().is_one() {
            return Err(LatticeError::NotUnimodular.into());
        }
        Ok(UnimodularChange { v })
    }

    pub fn matrix(&self) -> &IntegerMatrix {
        &self.v
    }

    pub fn inverse(&self) -> UnimodularChange {
        UnimodularChange {
            v: lattice::unimodular_inverse(&self.v).expect("unimodular by construction"),
        }
    }

    /// Coordinates of a circle weight in the new basis.
    pub fn apply(&self, a: &[BigInt]) -> Result<Vec<BigInt>, WeightsError> {
        Ok(self.v.left_apply(a)?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    Primitivity,
    Generation,
    VertexCondition,
    Dimension,
    FacetBound,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rule::Primitivity => "primitivity",
            Rule::Generation => "generation",
            Rule::VertexCondition => "vertex_condition",
            Rule::Dimension => "dimension",
            Rule::FacetBound => "facet_bound",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RuleOutcome {
    pub rule: Rule,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Offense {
    Row {
        facet: usize,
        label: String,
        #[serde(serialize_with = "crate::json::ints")]
        weight: Vec<BigInt>,
        #[serde(serialize_with = "crate::json::int")]
        gcd: BigInt,
    },
    Weights {
        rank: usize,
        #[serde(serialize_with = "crate::json::ints")]
        invariant_factors: Vec<BigInt>,
    },
    Vertex {
        vertex: FaceSelector,
        facets: Vec<usize>,
        rank: usize,
        #[serde(serialize_with = "crate::json::ints")]
        invariant_factors: Vec<BigInt>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub mode: Mode,
    pub rules: Vec<RuleOutcome>,
    pub offenses: Vec<Offense>,
    pub passed: bool,
}

impl ValidationReport {
    pub fn rule(&self, rule: Rule) -> Option<&RuleOutcome> {
        self.rules.iter().find(|r| r.rule == rule)
    }

    pub fn into_result(self) -> Result<ValidationReport, WeightsError> {
        if self.passed {
            Ok(self)
        } else {
            Err(WeightsError::invalid(&self))
        }
    }
}

/// Checks the torus-action axioms on a weighted orbit space.
pub fn validate(w: &WeightedOrbitSpace, mode: Mode) -> ValidationReport {
    let p = w.polytope();
    let (k, m, dim) = (w.torus_rank(), w.facet_count(), p.dim());
    let mut rules = Vec::with_capacity(5);
    let mut offenses = Vec::new();

    let mut bad_rows = 0;
    for (j, row) in w.weights().iter_rows().enumerate() {
        let gcd = lattice::gcd_of(row);
        if !gcd.is_one() {
            bad_rows += 1;
            offenses.push(Offense::Row {
                facet: j,
                label: p.facet_label(j),
                weight: row.to_vec(),
                gcd,
            });
        }
    }
    rules.push(RuleOutcome {
        rule: Rule::Primitivity,
        passed: bad_rows == 0,
        detail: format!("{bad_rows} of {m} weight rows are not primitive"),
    });

    let factors = lattice::invariant_factors(w.weights());
    let rank = factors.len();
    let generates = rank == k && (mode == Mode::Orbifold || factors.iter().all(One::is_one));
    if !generates {
        offenses.push(Offense::Weights {
            rank,
            invariant_factors: factors.clone(),
        });
    }
    rules.push(RuleOutcome {
        rule: Rule::Generation,
        passed: generates,
        detail: match mode {
            Mode::Manifold => {
                format!("weights have rank {rank} of {k}; unit invariant factors required")
            }
            Mode::Orbifold => format!("weights have rank {rank} of {k}"),
        },
    });

    let vertices = p.vertices();
    let mut bad_vertices = 0;
    for v in &vertices {
        let facets = p.facets_containing(v).expect("enumerated vertex is valid");
        let iso = w.weights().select_rows(&facets);
        let f = lattice::invariant_factors(&iso);
        let ok = match mode {
            Mode::Manifold => f.len() == iso.rows() && f.iter().all(One::is_one),
            Mode::Orbifold => f.len() == iso.rows(),
        };
        if !ok {
            bad_vertices += 1;
            offenses.push(Offense::Vertex {
                vertex: v.clone(),
                facets,
                rank: f.len(),
                invariant_factors: f,
            });
        }
    }
    rules.push(RuleOutcome {
        rule: Rule::VertexCondition,
        passed: bad_vertices == 0,
        detail: format!(
            "{bad_vertices} of {} vertices fail the {} isotropy condition",
            vertices.len(),
            match mode {
                Mode::Manifold => "saturated",
                Mode::Orbifold => "full-rank",
            }
        ),
    });

    let n = dim + k;
    rules.push(RuleOutcome {
        rule: Rule::Dimension,
        passed: k >= dim,
        detail: format!(
            "n = dim P + k = {dim} + {k} = {n}; minimal orbit dimension 2k - n = {}",
            2 * k as i64 - n as i64
        ),
    });

    rules.push(RuleOutcome {
        rule: Rule::FacetBound,
        passed: dim <= m && m <= 2 * dim,
        detail: format!("{dim} <= m = {m} <= {}", 2 * dim),
    });

    let passed = rules.iter().all(|r| r.passed);
    ValidationReport {
        mode,
        rules,
        offenses,
        passed,
    }
}

/// Rewrites square unimodular weights as the identity.
///
/// Returns the normalized space and the change `V = weights⁻¹`, so that
/// `weights · V = I`.
pub fn normalize(
    w: &WeightedOrbitSpace,
) -> Result<(WeightedOrbitSpace, UnimodularChange), WeightsError> {
    if w.facet_count() != w.torus_rank() {
        return Err(WeightsError::Unsupported(format!(
            "normalization needs as many facets as the torus rank, got m = {} and k = {}",
            w.facet_count(),
            w.torus_rank()
        )));
    }
    validate(w, Mode::Manifold).into_result()?;
    let v = lattice::unimodular_inverse(w.weights())?;
    let change = UnimodularChange { v };
    let normalized = w.change_basis(&change)?;
    debug_assert_eq!(
        normalized.weights(),
        &IntegerMatrix::identity(w.torus_rank())
    );
    Ok((normalized, change))
}

/// Whether the weights are exactly the identity matrix.
pub fn is_normalized(w: &WeightedOrbitSpace) -> bool {
    w.facet_count() == w.torus_rank() && w.weights() == &IntegerMatrix::identity(w.torus_rank())
}
