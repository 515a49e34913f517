//! Exact sparse and dense elimination.

use std::collections::HashMap;

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::novikov::{GaussianRational, NovikovScalar};

/// Coefficients usable in [`SparseEchelon`]. `unit_inverse` returns the inverse
/// when it exists inside the type; otherwise elimination falls back to
/// fraction-free cross multiplication, which is still exact over the fraction
/// field.
pub trait EchelonScalar: Clone + PartialEq + Zero + One {
    fn mul_ref(&self, other: &Self) -> Self;
    fn sub_ref(&self, other: &Self) -> Self;
    fn unit_inverse(&self) -> Option<Self>;
}

impl EchelonScalar for BigRational {
    fn mul_ref(&self, other: &Self) -> Self {
        self * other
    }
    fn sub_ref(&self, other: &Self) -> Self {
        self - other
    }
    fn unit_inverse(&self) -> Option<Self> {
        (!self.is_zero()).then(|| self.recip())
    }
}

impl EchelonScalar for GaussianRational {
    fn mul_ref(&self, other: &Self) -> Self {
        self * other
    }
    fn sub_ref(&self, other: &Self) -> Self {
        self - other
    }
    fn unit_inverse(&self) -> Option<Self> {
        self.inv()
    }
}

impl EchelonScalar for NovikovScalar {
    fn mul_ref(&self, other: &Self) -> Self {
        self * other
    }
    fn sub_ref(&self, other: &Self) -> Self {
        self - other
    }
    fn unit_inverse(&self) -> Option<Self> {
        self.monomial_inverse()
    }
}

/// A sparse row: `(column, value)` pairs sorted by column, no zeros.
pub type SparseRow<S> = Vec<(usize, S)>;

fn axpy<S: EchelonScalar>(row: &SparseRow<S>, alpha: &S, pivot: &SparseRow<S>, beta: &S) -> SparseRow<S> {
    // alpha*row - beta*pivot
    let mut out = Vec::with_capacity(row.len() + pivot.len());
    let (mut i, mut j) = (0, 0);
    let scale = |s: &S, v: &S| if s.is_one() { v.clone() } else { s.mul_ref(v) };
    while i < row.len() || j < pivot.len() {
        let ci = row.get(i).map(|e| e.0).unwrap_or(usize::MAX);
        let cj = pivot.get(j).map(|e| e.0).unwrap_or(usize::MAX);
        if ci < cj {
            out.push((ci, scale(alpha, &row[i].1)));
            i += 1;
        } else if cj < ci {
            let v = S::zero().sub_ref(&beta.mul_ref(&pivot[j].1));
            out.push((cj, v));
            j += 1;
        } else {
            let v = scale(alpha, &row[i].1).sub_ref(&beta.mul_ref(&pivot[j].1));
            if !v.is_zero() {
                out.push((ci, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

/// Incremental row echelon form keyed by leading (smallest) column.
#[derive(Clone, Debug)]
pub struct SparseEchelon<S> {
    pivots: HashMap<usize, SparseRow<S>>,
}

impl<S: EchelonScalar> Default for SparseEchelon<S> {
    fn default() -> Self {
        SparseEchelon { pivots: HashMap::new() }
    }
}

impl<S: EchelonScalar> SparseEchelon<S> {
    pub fn new() -> Self {
        Self::default()
    }

    /// Reduce `row` against the stored pivots; store it if it is independent.
    /// Returns whether the rank grew.
    pub fn insert(&mut self, row: SparseRow<S>) -> bool {
        let mut row: SparseRow<S> = row.into_iter().filter(|(_, v)| !v.is_zero()).collect();
        row.sort_by_key(|e| e.0);
        loop {
            let Some((lead, lead_val)) = row.first().cloned() else {
                return false;
            };
            match self.pivots.get(&lead) {
                None => {
                    if let Some(inv) = lead_val.unit_inverse() {
                        if !lead_val.is_one() {
                            for e in &mut row {
                                e.1 = e.1.mul_ref(&inv);
                            }
                        }
                    }
                    self.pivots.insert(lead, row);
                    return true;
                }
                Some(pivot) => {
                    let p = &pivot[0].1;
                    row = if p.is_one() {
                        axpy(&row, &S::one(), pivot, &lead_val)
                    } else {
                        axpy(&row, p, pivot, &lead_val)
                    };
                }
            }
        }
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Pivot columns in increasing order.
    pub fn pivot_columns(&self) -> Vec<usize> {
        let mut cols: Vec<usize> = self.pivots.keys().copied().collect();
        cols.sort_unstable();
        cols
    }

    /// Number of pivots in columns `< c`; this is the rank of the projection of
    /// the row space onto the first `c` coordinates.
    pub fn rank_of_prefix(&self, c: usize) -> usize {
        self.pivots.keys().filter(|&&k| k < c).count()
    }
}

/// Rank of a dense rational matrix.
pub fn rank_rational(matrix: &[Vec<BigRational>]) -> usize {
    let mut echelon = SparseEchelon::<BigRational>::new();
    for row in matrix {
        echelon.insert(row.iter().cloned().enumerate().filter(|(_, v)| !v.is_zero()).collect());
    }
    echelon.rank()
}

/// Rank of a dense integer matrix, computed exactly.
pub fn rank_integer(matrix: &[Vec<i64>]) -> usize {
    let m: Vec<Vec<BigRational>> =
        matrix.iter().map(|r| r.iter().map(|&v| BigRational::from_integer(v.into())).collect()).collect();
    rank_rational(&m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_ranks() {
        assert_eq!(rank_integer(&[vec![1, 2], vec![2, 4]]), 1);
        assert_eq!(rank_integer(&[vec![0, 1, -1], vec![-1, 0, 1], vec![1, -1, 0]]), 2);
        assert_eq!(rank_integer(&[vec![0, 0], vec![0, 0]]), 0);
    }

    #[test]
    fn prefix_rank_counts_projection() {
        // rows: e0 + e2, e1 + e2, e2 ; projection to first 2 coords has rank 2
        let one = BigRational::one;
        let mut ech = SparseEchelon::new();
        ech.insert(vec![(0, one()), (2, one())]);
        ech.insert(vec![(1, one()), (2, one())]);
        ech.insert(vec![(0, one()), (1, one())]);
        assert_eq!(ech.rank(), 3);
        assert_eq!(ech.rank_of_prefix(2), 2);
        assert_eq!(ech.rank_of_prefix(1), 1);
    }

    #[test]
    fn novikov_fraction_free() {
        let a: NovikovScalar = "1 + q".parse().unwrap();
        let b: NovikovScalar = "1 - q".parse().unwrap();
        let mut ech = SparseEchelon::new();
        assert!(ech.insert(vec![(0, a.clone()), (1, b.clone())]));
        assert!(!ech.insert(vec![(0, &a * &b), (1, &b * &b)]));
        assert!(ech.insert(vec![(0, b), (1, a)]));
    }
}
