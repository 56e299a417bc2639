use super::matrix::{ComplexMatrix, C64};
use super::DEFAULT_MAX_DIM;
use crate::error::{shape, Error, Result};

/// Kronecker product with the default size limit.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    kron_with_limit(a, b, DEFAULT_MAX_DIM)
}

/// `(a ⊗ b)[i*rb + k][j*cb + l] = a[i][j] * b[k][l]`; dims are concatenated.
pub fn kron_with_limit(a: &ComplexMatrix, b: &ComplexMatrix, limit: usize) -> Result<ComplexMatrix> {
    let (ra, ca, rb, cb) = (a.rows(), a.cols(), b.rows(), b.cols());
    let rows = ra.checked_mul(rb).ok_or(Error::SizeLimit { dim: usize::MAX, limit })?;
    let cols = ca.checked_mul(cb).ok_or(Error::SizeLimit { dim: usize::MAX, limit })?;
    if rows.max(cols) > limit {
        return Err(Error::SizeLimit { dim: rows.max(cols), limit });
    }
    let mut data = vec![C64::new(0.0, 0.0); rows * cols];
    for i in 0..ra {
        for j in 0..ca {
            let x = a[(i, j)];
            if x == C64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..rb {
                let dst = &mut data[(i * rb + k) * cols + j * cb..][..cb];
                for (d, &y) in dst.iter_mut().zip(b.row(k)) {
                    *d = x * y;
                }
            }
        }
    }
    let out = ComplexMatrix::from_vec(rows, cols, data)?;
    if rows == cols && ra == ca && rb == cb {
        let mut dims = a.dims_or_flat();
        dims.extend(b.dims_or_flat());
        return out.with_dims(dims);
    }
    Ok(out)
}

/// Left-to-right Kronecker product of a list; the empty product is `[[1]]`.
pub fn kron_all(factors: &[ComplexMatrix]) -> Result<ComplexMatrix> {
    let mut iter = factors.iter();
    let Some(first) = iter.next() else {
        return Ok(ComplexMatrix::identity(1));
    };
    let mut acc = first.clone();
    if acc.is_square() && acc.dims().is_none() {
        let r = acc.rows();
        acc = acc.with_dims(vec![r])?;
    }
    for f in iter {
        acc = kron(&acc, f)?;
    }
    Ok(acc)
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

/// Flat offsets of every multi-index over the subsystems in `which`.
fn offsets(dims: &[usize], which: &[usize]) -> Vec<usize> {
    let st = strides(dims);
    let mut out = vec![0usize];
    for &k in which {
        let mut next = Vec::with_capacity(out.len() * dims[k]);
        for &o in &out {
            for v in 0..dims[k] {
                next.push(o + v * st[k]);
            }
        }
        out = next;
    }
    out
}

/// Traces out every subsystem not listed in `keep`. Kept subsystems stay in
/// their original relative order.
pub fn partial_trace(m: &ComplexMatrix, dims: &[usize], keep: &[usize]) -> Result<ComplexMatrix> {
    if !m.is_square() {
        return Err(shape(format!("partial trace of non-square {}x{} matrix", m.rows(), m.cols())));
    }
    let total: usize = dims.iter().product();
    if total != m.rows() {
        return Err(shape(format!("dims {dims:?} do not match {} rows", m.rows())));
    }
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if kept.iter().any(|&k| k >= dims.len()) {
        return Err(shape(format!("keep set {keep:?} out of range for {} subsystems", dims.len())));
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|k| !kept.contains(k)).collect();
    let keep_off = offsets(dims, &kept);
    let trace_off = offsets(dims, &traced);
    let n = keep_off.len();
    let cols = m.cols();
    let src = m.data();
    let out = ComplexMatrix::from_fn(n, n, |i, j| {
        let (bi, bj) = (keep_off[i], keep_off[j]);
        trace_off.iter().map(|&t| src[(bi + t) * cols + bj + t]).sum()
    });
    out.with_dims(kept.iter().map(|&k| dims[k]).collect())
}

/// Index map for reordering subsystems: entry `new` is the flat index in the
/// original ordering. Output subsystem `k` is input subsystem `perm[k]`.
pub fn subsystem_permutation(dims: &[usize], perm: &[usize]) -> Result<Vec<usize>> {
    let mut seen = vec![false; dims.len()];
    if perm.len() != dims.len() {
        return Err(shape(format!("permutation {perm:?} has wrong length for dims {dims:?}")));
    }
    for &p in perm {
        if p >= dims.len() || seen[p] {
            return Err(shape(format!("{perm:?} is not a permutation")));
        }
        seen[p] = true;
    }
    let st = strides(dims);
    let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let total: usize = dims.iter().product();
    let mut map = Vec::with_capacity(total);
    let mut digits = vec![0usize; dims.len()];
    for _ in 0..total {
        map.push(digits.iter().zip(perm).map(|(&d, &p)| d * st[p]).sum());
        for k in (0..digits.len()).rev() {
            digits[k] += 1;
            if digits[k] < new_dims[k] {
                break;
            }
            digits[k] = 0;
        }
    }
    Ok(map)
}

/// Reorders the tensor factors of a square operator.
pub fn permute_subsystems(m: &ComplexMatrix, dims: &[usize], perm: &[usize]) -> Result<ComplexMatrix> {
    if !m.is_square() || dims.iter().product::<usize>() != m.rows() {
        return Err(shape(format!("dims {dims:?} do not match a {}x{} operator", m.rows(), m.cols())));
    }
    let map = subsystem_permutation(dims, perm)?;
    let n = m.rows();
    let src = m.data();
    let mut data = Vec::with_capacity(n * n);
    for &r in &map {
        let row = &src[r * n..(r + 1) * n];
        data.extend(map.iter().map(|&c| row[c]));
    }
    ComplexMatrix::from_vec(n, n, data)?.with_dims(perm.iter().map(|&p| dims[p]).collect())
}

/// Reorders the tensor factors of a state vector.
pub fn permute_state(v: &[C64], dims: &[usize], perm: &[usize]) -> Result<Vec<C64>> {
    if dims.iter().product::<usize>() != v.len() {
        return Err(shape(format!("dims {dims:?} do not match a vector of length {}", v.len())));
    }
    Ok(subsystem_permutation(dims, perm)?.into_iter().map(|i| v[i]).collect())
}
