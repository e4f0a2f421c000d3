//! Dense least squares by Householder QR.

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Ols<T> {
    pub coef: Vec<T>,
    pub rss: T,
    /// Diagonal of (XᵀX)⁻¹.
    pub inv_diag: Vec<T>,
}

/// Solves min ‖Xb − y‖ for a column-major `n × p` design. Both buffers are
/// overwritten. Returns `None` when X is numerically rank deficient.
pub(crate) fn ols<T: Scalar>(x: &mut [T], y: &mut [T], n: usize, p: usize) -> Option<Ols<T>> {
    debug_assert_eq!(x.len(), n * p);
    debug_assert_eq!(y.len(), n);
    if n < p {
        return None;
    }
    let col_norm = |x: &[T], j: usize, from: usize| {
        x[j * n + from..(j + 1) * n]
            .iter()
            .fold(T::zero(), |acc, &v| acc.hypot(v))
    };
    let scale = (0..p).map(|j| col_norm(x, j, 0)).fold(T::zero(), T::max);
    let tol = T::epsilon() * T::from_usize_lossy(n) * scale;

    for j in 0..p {
        let norm = col_norm(x, j, j);
        if norm <= tol {
            return None;
        }
        let head = x[j * n + j];
        let alpha = if head > T::zero() { -norm } else { norm };
        // v = x[j.., j] - alpha e1, stored in place; vᵀv = 2 norm (norm + |head|)
        x[j * n + j] = head - alpha;
        let vtv = T::lit(2.0) * norm * (norm + head.abs());
        let reflect = |target: &mut [T], v: &[T]| {
            let dot = v.iter().zip(target.iter()).fold(T::zero(), |acc, (&a, &b)| acc + a * b);
            let f = T::lit(2.0) * dot / vtv;
            for (t, &vi) in target.iter_mut().zip(v) {
                *t -= f * vi;
            }
        };
        let (left, right) = x.split_at_mut((j + 1) * n);
        let v = &left[j * n + j..];
        for k in 0..p - j - 1 {
            reflect(&mut right[k * n + j..(k + 1) * n], v);
        }
        reflect(&mut y[j..], v);
        x[j * n + j] = alpha;
    }

    let r = |i: usize, j: usize| x[j * n + i];
    let mut coef = vec![T::zero(); p];
    for i in (0..p).rev() {
        let mut s = y[i];
        for k in i + 1..p {
            s -= r(i, k) * coef[k];
        }
        coef[i] = s / r(i, i);
    }
    let rss = y[p..].iter().fold(T::zero(), |acc, &v| acc + v * v);

    // rows of R⁻¹ by back substitution on the upper triangle
    let mut rinv = vec![T::zero(); p * p];
    for j in 0..p {
        rinv[j * p + j] = T::one() / r(j, j);
        for i in (0..j).rev() {
            let mut s = T::zero();
            for k in i + 1..=j {
                s += r(i, k) * rinv[k * p + j];
            }
            rinv[i * p + j] = -s / r(i, i);
        }
    }
    let inv_diag = (0..p)
        .map(|i| (i..p).fold(T::zero(), |acc, k| acc + rinv[i * p + k] * rinv[i * p + k]))
        .collect();
    Some(Ols { coef, rss, inv_diag })
}
