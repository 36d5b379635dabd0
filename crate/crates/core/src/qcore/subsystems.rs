//! Index bookkeeping for operators acting on a subset of tensor factors.
//!
//! Flat basis index for `dims = [d0, .., dn-1]` and digits `(i0, .., in-1)`
//! is `Σ i_k · Π_{j>k} d_j`, so subsystem 0 is the most significant digit.

use num_complex::Complex64;

use super::ComplexMatrix;
use crate::{Error, Result};

pub fn total_dim(dims: &[usize]) -> usize {
    dims.iter().product()
}

pub(crate) fn validate_targets(dims: &[usize], targets: &[usize]) -> Result<()> {
    if targets.is_empty() {
        return Err(Error::Argument("subsystem list is empty".into()));
    }
    for (n, &t) in targets.iter().enumerate() {
        if t >= dims.len() {
            return Err(Error::Argument(format!(
                "subsystem {t} out of range for {} subsystems",
                dims.len()
            )));
        }
        if targets[..n].contains(&t) {
            return Err(Error::Argument(format!("subsystem {t} listed twice")));
        }
    }
    Ok(())
}

/// `table[r][t]` is the flat index whose target digits (in `targets` order)
/// form `t` and whose remaining digits (in ascending subsystem order) form `r`.
pub(crate) fn index_table(dims: &[usize], targets: &[usize]) -> Vec<Vec<usize>> {
    let rest: Vec<usize> = (0..dims.len()).filter(|k| !targets.contains(k)).collect();
    let t_dim: usize = targets.iter().map(|&k| dims[k]).product();
    let r_dim: usize = rest.iter().map(|&k| dims[k]).product();
    let mut table = vec![vec![0usize; t_dim]; r_dim];
    let mut digits = vec![0usize; dims.len()];
    for flat in 0..total_dim(dims) {
        let mut rem = flat;
        for k in (0..dims.len()).rev() {
            digits[k] = rem % dims[k];
            rem /= dims[k];
        }
        let t = targets.iter().fold(0, |acc, &k| acc * dims[k] + digits[k]);
        let r = rest.iter().fold(0, |acc, &k| acc * dims[k] + digits[k]);
        table[r][t] = flat;
    }
    table
}

/// Left-multiplies the rows of `m` (indexed by `dims`) by `op` embedded on
/// `targets`. Returns the product and the new row dimensions. A rectangular
/// `op` must act on a single subsystem.
pub(crate) fn left_apply(
    op: &ComplexMatrix,
    m: &ComplexMatrix,
    dims: &[usize],
    targets: &[usize],
) -> Result<(ComplexMatrix, Vec<usize>)> {
    validate_targets(dims, targets)?;
    let t_in: usize = targets.iter().map(|&k| dims[k]).product();
    if op.cols() != t_in {
        return Err(Error::Argument(format!(
            "operator acts on dimension {} but the targeted subsystems span {t_in}",
            op.cols()
        )));
    }
    if m.rows() != total_dim(dims) {
        return Err(Error::Argument(format!(
            "matrix has {} rows, dims imply {}",
            m.rows(),
            total_dim(dims)
        )));
    }
    let out_dims = if op.rows() == op.cols() {
        dims.to_vec()
    } else if targets.len() == 1 {
        let mut d = dims.to_vec();
        d[targets[0]] = op.rows();
        d
    } else {
        return Err(Error::Argument(
            "a non-square operator must act on exactly one subsystem".into(),
        ));
    };

    let in_table = index_table(dims, targets);
    let out_table = index_table(&out_dims, targets);
    let cols = m.cols();
    let mut out = ComplexMatrix::zeros(total_dim(&out_dims), cols);
    let zero = Complex64::new(0.0, 0.0);
    for (in_rows, out_rows) in in_table.iter().zip(&out_table) {
        for (t_out, &row_out) in out_rows.iter().enumerate() {
            let dst_start = row_out * cols;
            for (t, &row_in) in in_rows.iter().enumerate() {
                let coef = op[(t_out, t)];
                if coef == zero {
                    continue;
                }
                let src = m.row(row_in);
                let dst = &mut out.data_mut()[dst_start..dst_start + cols];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += coef * s;
                }
            }
        }
    }
    Ok((out, out_dims))
}

/// `O m O†` with `O` embedded on `targets`.
pub(crate) fn sandwich(
    op: &ComplexMatrix,
    m: &ComplexMatrix,
    dims: &[usize],
    targets: &[usize],
) -> Result<(ComplexMatrix, Vec<usize>)> {
    let (half, out_dims) = left_apply(op, m, dims, targets)?;
    let (full_adj, _) = left_apply(op, &half.adjoint(), dims, targets)?;
    Ok((full_adj.adjoint(), out_dims))
}

/// Traces out everything except `keep`. `keep` must be sorted and distinct.
pub(crate) fn partial_trace_matrix(m: &ComplexMatrix, dims: &[usize], keep: &[usize]) -> ComplexMatrix {
    let table = index_table(dims, keep);
    let k_dim = table.first().map_or(0, |r| r.len());
    let mut out = ComplexMatrix::zeros(k_dim, k_dim);
    for rows in &table {
        for (a, &fa) in rows.iter().enumerate() {
            for (b, &fb) in rows.iter().enumerate() {
                out[(a, b)] += m[(fa, fb)];
            }
        }
    }
    out
}

/// Reorders tensor factors: new subsystem `k` is old subsystem `order[k]`.
pub(crate) fn permute_matrix(m: &ComplexMatrix, dims: &[usize], order: &[usize]) -> Result<(ComplexMatrix, Vec<usize>)> {
    if order.len() != dims.len() {
        return Err(Error::Argument(format!(
            "permutation of length {} for {} subsystems",
            order.len(),
            dims.len()
        )));
    }
    validate_targets(dims, order)?;
    let new_dims: Vec<usize> = order.iter().map(|&k| dims[k]).collect();
    // With every subsystem targeted there is a single rest row and the
    // target digits are read in `order`, i.e. in the new layout.
    let map = &index_table(dims, order)[0];
    let n = map.len();
    let out = ComplexMatrix::from_fn(n, n, |i, j| m[(map[i], map[j])]);
    Ok((out, new_dims))
}
