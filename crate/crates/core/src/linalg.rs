//! Small dense-matrix helpers shared by the numerical modules.

use ndarray::linalg::general_mat_mul;
use ndarray::{Array2, ArrayView2, Zip};

use crate::C64;

pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);

/// `c <- alpha * a * b + beta * c`.
#[inline]
pub(crate) fn gemm(alpha: C64, a: &ArrayView2<C64>, b: &ArrayView2<C64>, beta: C64, c: &mut Array2<C64>) {
    general_mat_mul(alpha, a, b, beta, c);
}

pub(crate) fn adjoint(a: &ArrayView2<C64>) -> Array2<C64> {
    a.t().mapv(|z| z.conj())
}

/// Replace `a` by `(a + a^H) / 2`.
pub(crate) fn hermitize(a: &mut Array2<C64>) {
    let n = a.nrows();
    for i in 0..n {
        a[(i, i)] = C64::new(a[(i, i)].re, 0.0);
        for j in (i + 1)..n {
            let avg = (a[(i, j)] + a[(j, i)].conj()) * 0.5;
            a[(i, j)] = avg;
            a[(j, i)] = avg.conj();
        }
    }
}

pub(crate) fn hermiticity_error(a: &ArrayView2<C64>) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

pub(crate) fn trace(a: &ArrayView2<C64>) -> C64 {
    a.diag().iter().sum()
}

pub(crate) fn max_abs(a: &ArrayView2<C64>) -> f64 {
    a.iter().fold(0.0_f64, |m, z| m.max(z.norm()))
}

pub(crate) fn max_abs_diff(a: &ArrayView2<C64>, b: &ArrayView2<C64>) -> f64 {
    let mut worst = 0.0_f64;
    Zip::from(a).and(b).for_each(|x, y| worst = worst.max((x - y).norm()));
    worst
}

/// `Tr[a b]` without forming the product.
pub(crate) fn trace_of_product(a: &ArrayView2<C64>, b: &ArrayView2<C64>) -> C64 {
    let n = a.nrows();
    let mut acc = ZERO;
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

pub(crate) fn is_finite(a: &ArrayView2<C64>) -> bool {
    a.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub(crate) fn to_nalgebra(a: &ArrayView2<C64>) -> nalgebra::DMatrix<C64> {
    nalgebra::DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

/// Kronecker product of two dense matrices.
pub(crate) fn kron(a: &ArrayView2<C64>, b: &ArrayView2<C64>) -> Array2<C64> {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    let mut out = Array2::zeros((ar * br, ac * bc));
    for i in 0..ar {
        for j in 0..ac {
            let s = a[(i, j)];
            if s == ZERO {
                continue;
            }
            let mut block = out.slice_mut(ndarray::s![i * br..(i + 1) * br, j * bc..(j + 1) * bc]);
            Zip::from(&mut block).and(b).for_each(|o, &x| *o = s * x);
        }
    }
    out
}
