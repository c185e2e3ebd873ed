use num_integer::Integer;
use num_traits::{Signed, Zero};

use super::IntegerMatrix;

/// Row-style Hermite normal form of the lattice spanned by the rows.
///
/// Zero rows are dropped, so the result has `rank(a)` rows. Pivots are
/// positive and the entries above each pivot lie in `[0, pivot)`, which makes
/// the result a unique representative of the row lattice.
pub fn hermite_normal_form(a: &IntegerMatrix) -> IntegerMatrix {
    let mut m = a.clone();
    let (rows, cols) = (m.rows(), m.cols());
    let mut pr = 0;
    for c in 0..cols {
        if pr == rows {
            break;
        }
        loop {
            let mut best: Option<usize> = None;
            for i in pr..rows {
                let x = m.get(i, c);
                if x.is_zero() {
                    continue;
                }
                if best.is_none_or(|b| x.abs() < m.get(b, c).abs()) {
                    best = Some(i);
                }
            }
            let Some(b) = best else { break };
            m.swap_rows(pr, b);
            let mut done = true;
            for i in pr + 1..rows {
                if m.get(i, c).is_zero() {
                    continue;
                }
                let q = m.get(i, c).div_floor(m.get(pr, c));
                m.add_row_multiple(i, pr, &-q);
                done &= m.get(i, c).is_zero();
            }
            if done {
                break;
            }
        }
        if m.get(pr, c).is_zero() {
            continue;
        }
        if m.get(pr, c).is_negative() {
            m.negate_row(pr);
        }
        for i in 0..pr {
            let q = m.get(i, c).div_floor(m.get(pr, c));
            m.add_row_multiple(i, pr, &-q);
        }
        pr += 1;
    }
    let keep: Vec<usize> = (0..pr).collect();
    m.select_rows(&keep)
}
