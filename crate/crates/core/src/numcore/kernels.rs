//! Row-major matrix kernels. `a` is `m x k`, the result `m x n`.

/// `A * B` with `B` stored `k x n`.
pub(crate) fn matmul_nn(
    a: &[f64],
    b: &[f64],
    m: usize,
    k: usize,
    n: usize,
) -> alloc::vec::Vec<f64> {
    let mut out = alloc::vec![0.0; m * n];
    for i in 0..m {
        let row = &mut out[i * n..(i + 1) * n];
        for p in 0..k {
            let aip = a[i * k + p];
            if aip == 0.0 {
                continue;
            }
            let brow = &b[p * n..(p + 1) * n];
            for (o, &bv) in row.iter_mut().zip(brow) {
                *o += aip * bv;
            }
        }
    }
    out
}

/// `A * B^T` with `B` stored `n x k`.
pub(crate) fn matmul_nt(
    a: &[f64],
    b: &[f64],
    m: usize,
    k: usize,
    n: usize,
) -> alloc::vec::Vec<f64> {
    let mut out = alloc::vec![0.0; m * n];
    for i in 0..m {
        let arow = &a[i * k..(i + 1) * k];
        for j in 0..n {
            let brow = &b[j * k..(j + 1) * k];
            out[i * n + j] = arow.iter().zip(brow).map(|(x, y)| x * y).sum();
        }
    }
    out
}

/// `A^T * B` with `A` stored `k x m` and `B` stored `k x n`; accumulates
/// into `out` (`m x n`).
pub(crate) fn matmul_tn_acc(a: &[f64], b: &[f64], k: usize, m: usize, n: usize, out: &mut [f64]) {
    for p in 0..k {
        let arow = &a[p * m..(p + 1) * m];
        let brow = &b[p * n..(p + 1) * n];
        for (i, &av) in arow.iter().enumerate() {
            if av == 0.0 {
                continue;
            }
            let orow = &mut out[i * n..(i + 1) * n];
            for (o, &bv) in orow.iter_mut().zip(brow) {
                *o += av * bv;
            }
        }
    }
}

pub(crate) fn add_into(dst: &mut [f64], src: &[f64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d += s;
    }
}
