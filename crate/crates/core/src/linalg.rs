//! Exact linear algebra over the Gaussian rationals: dense solving for
//! the blockwise coboundary systems and a sparse nullspace for the
//! commutant searches. Elimination order is deterministic, so every
//! solver output is reproducible.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use num_traits::Zero;

use crate::scalar::{s_inv, s_zero, Scalar};

/// Solves `A x = b` exactly by Gauss-Jordan elimination on the augmented
/// matrix. Returns the particular solution with all free variables set
/// to zero, or `None` when the system is inconsistent.
pub fn solve_dense(a: &[Vec<Scalar>], b: &[Scalar]) -> Option<Vec<Scalar>> {
    let nrows = a.len();
    assert_eq!(nrows, b.len());
    let ncols = if nrows == 0 { 0 } else { a[0].len() };
    let mut m: Vec<Vec<Scalar>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            assert_eq!(row.len(), ncols);
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();

    let mut pivot_cols: Vec<usize> = Vec::new();
    let mut pivot_row = 0usize;
    for col in 0..ncols {
        let Some(sel) = (pivot_row..nrows).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(pivot_row, sel);
        let inv = s_inv(&m[pivot_row][col]).expect("pivot nonzero");
        for v in m[pivot_row].iter_mut() {
            *v = v.clone() * inv.clone();
        }
        for r in 0..nrows {
            if r != pivot_row && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for c in col..=ncols {
                    let delta = f.clone() * m[pivot_row][c].clone();
                    m[r][c] = m[r][c].clone() - delta;
                }
            }
        }
        pivot_cols.push(col);
        pivot_row += 1;
        if pivot_row == nrows {
            break;
        }
    }

    // Inconsistent when a zero row has nonzero right-hand side.
    for r in pivot_row..nrows {
        if m[r][..ncols].iter().all(Zero::is_zero) && !m[r][ncols].is_zero() {
            return None;
        }
    }

    let mut x = alloc::vec![s_zero(); ncols];
    for (row, &col) in pivot_cols.iter().enumerate() {
        x[col] = m[row][ncols].clone();
    }
    Some(x)
}

/// Sparse row: column index -> nonzero value.
pub type SparseRow = BTreeMap<usize, Scalar>;

/// Nullspace basis of a sparse homogeneous system with `ncols` unknowns.
/// Basis vectors are produced one per free column, in column order, with
/// the free variable set to one.
pub fn nullspace_sparse(rows: Vec<SparseRow>, ncols: usize) -> Vec<Vec<Scalar>> {
    // Reduced row echelon form with rows kept sparse.
    let mut reduced: Vec<(usize, SparseRow)> = Vec::new(); // (pivot col, row)
    for mut row in rows {
        loop {
            row.retain(|_, v| !v.is_zero());
            let Some((&lead, lead_val)) = row.iter().next() else {
                break;
            };
            if let Some((_, prow)) = reduced.iter().find(|(p, _)| *p == lead) {
                let prow = prow.clone();
                let factor = lead_val.clone();
                for (c, v) in prow {
                    let delta = factor.clone() * v;
                    let entry = row.entry(c).or_insert_with(s_zero);
                    *entry = entry.clone() - delta;
                }
            } else {
                let inv = s_inv(lead_val).expect("lead nonzero");
                let mut norm: SparseRow = BTreeMap::new();
                for (c, v) in &row {
                    let nv = v.clone() * inv.clone();
                    if !nv.is_zero() {
                        norm.insert(*c, nv);
                    }
                }
                // Eliminate this column from earlier rows.
                for (_, prev) in reduced.iter_mut() {
                    if let Some(f) = prev.get(&lead).cloned() {
                        for (c, v) in &norm {
                            let delta = f.clone() * v.clone();
                            let entry = prev.entry(*c).or_insert_with(s_zero);
                            *entry = entry.clone() - delta;
                        }
                        prev.retain(|_, v| !v.is_zero());
                    }
                }
                reduced.push((lead, norm));
                break;
            }
        }
    }
    reduced.sort_by_key(|(p, _)| *p);

    let pivot_cols: Vec<usize> = reduced.iter().map(|(p, _)| *p).collect();
    let mut basis = Vec::new();
    for free in 0..ncols {
        if pivot_cols.binary_search(&free).is_ok() {
            continue;
        }
        let mut v = alloc::vec![s_zero(); ncols];
        v[free] = crate::scalar::s_one();
        for (p, row) in &reduced {
            if let Some(c) = row.get(&free) {
                v[*p] = -c.clone();
            }
        }
        basis.push(v);
    }
    basis
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{s_i, s_int, s_one};

    #[test]
    fn solves_complex_rational_systems() {
        // (1+i) x + y = 2 ; x - y = i
        let a = alloc::vec![
            alloc::vec![s_one() + s_i(), s_one()],
            alloc::vec![s_one(), -s_one()],
        ];
        let b = alloc::vec![s_int(2), s_i()];
        let x = solve_dense(&a, &b).unwrap();
        // verify residual
        for (row, rhs) in a.iter().zip(&b) {
            let mut acc = s_zero();
            for (c, xi) in row.iter().zip(&x) {
                acc += c.clone() * xi.clone();
            }
            assert_eq!(&acc, rhs);
        }
    }

    #[test]
    fn detects_inconsistency() {
        let a = alloc::vec![alloc::vec![s_one(), s_one()], alloc::vec![s_one(), s_one()]];
        let b = alloc::vec![s_one(), s_int(2)];
        assert!(solve_dense(&a, &b).is_none());
    }

    #[test]
    fn underdetermined_sets_free_vars_to_zero() {
        let a = alloc::vec![alloc::vec![s_one(), s_one(), s_one()]];
        let b = alloc::vec![s_int(3)];
        let x = solve_dense(&a, &b).unwrap();
        assert_eq!(x, alloc::vec![s_int(3), s_zero(), s_zero()]);
    }

    #[test]
    fn nullspace_of_rank_one_system() {
        // x + y + z = 0 -> two basis vectors
        let mut row = SparseRow::new();
        row.insert(0, s_one());
        row.insert(1, s_one());
        row.insert(2, s_one());
        let basis = nullspace_sparse(alloc::vec![row], 3);
        assert_eq!(basis.len(), 2);
        for v in basis {
            let sum = v[0].clone() + v[1].clone() + v[2].clone();
            assert!(sum.is_zero());
        }
    }
}
