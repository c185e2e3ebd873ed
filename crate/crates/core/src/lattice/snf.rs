use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::{IntegerMatrix, LatticeError};

/// Smith normal form `D = U·A·V` together with its unimodular transforms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SnfResult {
    /// rows × rows, unimodular.
    pub u: IntegerMatrix,
    /// cols × cols, unimodular.
    pub v: IntegerMatrix,
    /// rows × cols, diagonal.
    pub d: IntegerMatrix,
    /// Positive diagonal entries of `d`, each dividing the next.
    pub invariant_factors: Vec<BigInt>,
}

impl SnfResult {
    pub fn rank(&self) -> usize {
        self.invariant_factors.len()
    }
}

/// Exact determinant by Bareiss fraction-free elimination.
pub fn determinant(a: &IntegerMatrix) -> Result<BigInt, LatticeError> {
    if !a.is_square() {
        return Err(LatticeError::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let n = a.rows();
    if n == 0 {
        return Ok(BigInt::one());
    }
    let mut m = a.to_rows();
    let mut negate = false;
    let mut prev = BigInt::one();
    for k in 0..n {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&i| !m[i][k].is_zero()) {
                Some(p) => {
                    m.swap(k, p);
                    negate = !negate;
                }
                None => return Ok(BigInt::zero()),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = num / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    let det = m[n - 1][n - 1].clone();
    Ok(if negate { -det } else { det })
}

/// Rank over the rationals, by fraction-free row echelon elimination.
pub fn rank(a: &IntegerMatrix) -> usize {
    let mut m = a.to_rows();
    let (rows, cols) = (a.rows(), a.cols());
    let mut r = 0;
    let mut prev = BigInt::one();
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        for i in r + 1..rows {
            for j in c + 1..cols {
                let num = &m[i][j] * &m[r][c] - &m[i][c] * &m[r][j];
                m[i][j] = num / &prev;
            }
            m[i][c] = BigInt::zero();
        }
        prev = m[r][c].clone();
        r += 1;
    }
    r
}

/// Smith normal form with accumulated transforms.
///
/// Pivots are chosen as the entry of smallest absolute value, ties going to the
/// lowest row and then the lowest column, so the transforms are reproducible.
pub fn smith_normal_form(a: &IntegerMatrix) -> SnfResult {
    let mut red = Reduction::new(a, true);
    red.run();
    let invariant_factors = red.factors();
    SnfResult {
        u: red.u.expect("accumulated"),
        v: red.v.expect("accumulated"),
        d: red.d,
        invariant_factors,
    }
}

/// Invariant factors only; skips transform bookkeeping.
pub fn invariant_factors(a: &IntegerMatrix) -> Vec<BigInt> {
    let mut red = Reduction::new(a, false);
    red.run();
    red.factors()
}

/// Saturated basis of the integral right kernel `{x : A·x = 0}`, as rows,
/// in row Hermite normal form.
pub fn kernel_basis(a: &IntegerMatrix) -> IntegerMatrix {
    let snf = smith_normal_form(a);
    let t = snf.rank();
    let idx: Vec<usize> = (t..a.cols()).collect();
    let basis = snf.v.select_cols(&idx).transpose();
    super::hermite_normal_form(&basis)
}

/// True iff the rows of `a` extend to a basis of `Z^cols`.
pub fn is_saturated(a: &IntegerMatrix) -> Result<bool, LatticeError> {
    if a.rows() > a.cols() {
        return Err(LatticeError::Dimension(format!(
            "saturation test needs rows <= cols, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let f = invariant_factors(a);
    Ok(f.len() == a.rows() && f.iter().all(One::is_one))
}

/// The saturation of the row lattice: `span_Q(rows) ∩ Z^cols`, in Hermite form.
pub fn saturation(a: &IntegerMatrix) -> IntegerMatrix {
    kernel_basis(&kernel_basis(a))
}

/// Inverse of a square matrix with determinant ±1.
pub fn unimodular_inverse(a: &IntegerMatrix) -> Result<IntegerMatrix, LatticeError> {
    if !a.is_square() {
        return Err(LatticeError::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let snf = smith_normal_form(a);
    if snf.rank() != a.rows() || !snf.invariant_factors.iter().all(One::is_one) {
        return Err(LatticeError::NotUnimodular);
    }
    // U·A·V = I, so A⁻¹ = V·U.
    snf.v.mul(&snf.u)
}

pub fn gcd_of(values: &[BigInt]) -> BigInt {
    values.iter().fold(BigInt::zero(), |g, x| g.gcd(x))
}

pub fn is_primitive(values: &[BigInt]) -> bool {
    gcd_of(values).is_one()
}

struct Reduction {
    d: IntegerMatrix,
    u: Option<IntegerMatrix>,
    v: Option<IntegerMatrix>,
}

impl Reduction {
    fn new(a: &IntegerMatrix, accumulate: bool) -> Self {
        Reduction {
            d: a.clone(),
            u: accumulate.then(|| IntegerMatrix::identity(a.rows())),
            v: accumulate.then(|| IntegerMatrix::identity(a.cols())),
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        self.d.swap_rows(a, b);
        if let Some(u) = &mut self.u {
            u.swap_rows(a, b);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        self.d.swap_cols(a, b);
        if let Some(v) = &mut self.v {
            v.swap_cols(a, b);
        }
    }

    fn add_row(&mut self, target: usize, source: usize, factor: &BigInt) {
        self.d.add_row_multiple(target, source, factor);
        if let Some(u) = &mut self.u {
            u.add_row_multiple(target, source, factor);
        }
    }

    fn add_col(&mut self, target: usize, source: usize, factor: &BigInt) {
        self.d.add_col_multiple(target, source, factor);
        if let Some(v) = &mut self.v {
            v.add_col_multiple(target, source, factor);
        }
    }

    fn negate_col(&mut self, j: usize) {
        self.d.negate_col(j);
        if let Some(v) = &mut self.v {
            v.negate_col(j);
        }
    }

    /// Smallest nonzero |entry| in the trailing submatrix starting at (t, t).
    fn pick_pivot(&self, t: usize) -> Option<(usize, usize)> {
        let mut best: Option<(usize, usize)> = None;
        for i in t..self.d.rows() {
            for j in t..self.d.cols() {
                let x = self.d.get(i, j);
                if x.is_zero() {
                    continue;
                }
                match best {
                    Some((bi, bj)) if self.d.get(bi, bj).abs() <= x.abs() => {}
                    _ => best = Some((i, j)),
                }
            }
        }
        best
    }

    /// Smallest nonzero |entry| along row t and column t, from position t onward.
    fn pick_cross_pivot(&self, t: usize) -> (usize, usize) {
        let mut best = (t, t);
        let mut best_abs = self.d.get(t, t).abs();
        let mut consider = |i: usize, j: usize, x: &BigInt| {
            if !x.is_zero() && (best_abs.is_zero() || x.abs() < best_abs) {
                best = (i, j);
                best_abs = x.abs();
            }
        };
        for i in t + 1..self.d.rows() {
            consider(i, t, self.d.get(i, t));
        }
        for j in t + 1..self.d.cols() {
            consider(t, j, self.d.get(t, j));
        }
        best
    }

    fn run(&mut self) {
        let (rows, cols) = (self.d.rows(), self.d.cols());
        for t in 0..rows.min(cols) {
            let Some((pi, pj)) = self.pick_pivot(t) else {
                break;
            };
            self.swap_rows(t, pi);
            self.swap_cols(t, pj);
            loop {
                let mut dirty = false;
                for i in t + 1..rows {
                    if self.d.get(i, t).is_zero() {
                        continue;
                    }
                    let q = self.d.get(i, t).div_floor(self.d.get(t, t));
                    self.add_row(i, t, &-q);
                    dirty |= !self.d.get(i, t).is_zero();
                }
                for j in t + 1..cols {
                    if self.d.get(t, j).is_zero() {
                        continue;
                    }
                    let q = self.d.get(t, j).div_floor(self.d.get(t, t));
                    self.add_col(j, t, &-q);
                    dirty |= !self.d.get(t, j).is_zero();
                }
                if dirty {
                    let (i, j) = self.pick_cross_pivot(t);
                    self.swap_rows(t, i);
                    self.swap_cols(t, j);
                    continue;
                }
                let pivot = self.d.get(t, t).clone();
                let offender = (t + 1..rows)
                    .find(|&i| (t + 1..cols).any(|j| !self.d.get(i, j).is_multiple_of(&pivot)));
                match offender {
                    Some(i) => self.add_row(t, i, &BigInt::one()),
                    None => break,
                }
            }
            if self.d.get(t, t).is_negative() {
                self.negate_col(t);
            }
        }
    }

    fn factors(&self) -> Vec<BigInt> {
        (0..self.d.rows().min(self.d.cols()))
            .map(|i| self.d.get(i, i).clone())
            .take_while(|x| !x.is_zero())
            .collect()
    }
}
