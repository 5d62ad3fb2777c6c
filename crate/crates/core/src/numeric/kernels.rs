//! Row-major GEMM loops over raw slices with explicit leading dimensions, so
//! callers can multiply column blocks of a combined weight matrix in place.
//!
//! All kernels accumulate into `c`. The summation order for every output
//! element depends only on the inner dimension, never on how many rows are
//! in the batch, so a window scores bitwise the same alone or in a batch.

use super::Scalar;

/// `c[m x n] += a[m x k] * b[k x n]`
#[allow(clippy::too_many_arguments)]
#[inline]
pub(crate) fn gemm_nn<T: Scalar>(
    m: usize,
    k: usize,
    n: usize,
    a: &[T],
    lda: usize,
    b: &[T],
    ldb: usize,
    c: &mut [T],
    ldc: usize,
) {
    for i in 0..m {
        let a_row = &a[i * lda..i * lda + k];
        let c_row = &mut c[i * ldc..i * ldc + n];
        for (p, &av) in a_row.iter().enumerate() {
            let b_row = &b[p * ldb..p * ldb + n];
            for (cv, &bv) in c_row.iter_mut().zip(b_row) {
                *cv += av * bv;
            }
        }
    }
}

/// `c[m x n] += a^T * b` where `a` is stored `k x m` and `b` is `k x n`.
#[allow(clippy::too_many_arguments)]
#[inline]
pub(crate) fn gemm_tn<T: Scalar>(
    m: usize,
    k: usize,
    n: usize,
    a: &[T],
    lda: usize,
    b: &[T],
    ldb: usize,
    c: &mut [T],
    ldc: usize,
) {
    for p in 0..k {
        let a_row = &a[p * lda..p * lda + m];
        let b_row = &b[p * ldb..p * ldb + n];
        for (i, &av) in a_row.iter().enumerate() {
            if av == T::zero() {
                continue;
            }
            let c_row = &mut c[i * ldc..i * ldc + n];
            for (cv, &bv) in c_row.iter_mut().zip(b_row) {
                *cv += av * bv;
            }
        }
    }
}

/// `c[m x n] += a * b^T` where `a` is `m x k` and `b` is stored `n x k`.
#[allow(clippy::too_many_arguments)]
#[inline]
pub(crate) fn gemm_nt<T: Scalar>(
    m: usize,
    k: usize,
    n: usize,
    a: &[T],
    lda: usize,
    b: &[T],
    ldb: usize,
    c: &mut [T],
    ldc: usize,
) {
    for i in 0..m {
        let a_row = &a[i * lda..i * lda + k];
        for j in 0..n {
            let b_row = &b[j * ldb..j * ldb + k];
            let mut acc = T::zero();
            for (&x, &y) in a_row.iter().zip(b_row) {
                acc += x * y;
            }
            c[i * ldc + j] += acc;
        }
    }
}
