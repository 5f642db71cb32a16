//! Dense kernels on row-major `f64` slices.

/// Borrowed matrix view with arbitrary strides.
#[derive(Clone, Copy)]
pub(crate) struct MatRef<'a> {
    data: &'a [f64],
    rows: usize,
    cols: usize,
    rs: usize,
    cs: usize,
}

impl<'a> MatRef<'a> {
    pub(crate) fn new(data: &'a [f64], rows: usize, cols: usize) -> Self {
        assert!(data.len() >= rows * cols, "matrix view larger than its slice");
        MatRef { data, rows, cols, rs: cols, cs: 1 }
    }

    pub(crate) fn t(self) -> Self {
        MatRef { data: self.data, rows: self.cols, cols: self.rows, rs: self.cs, cs: self.rs }
    }
}

/// `c += a * b`, with `c` row-major `a.rows x b.cols`.
pub(crate) fn gemm_acc(c: &mut [f64], a: MatRef<'_>, b: MatRef<'_>) {
    let (m, k, n) = (a.rows, a.cols, b.cols);
    assert_eq!(k, b.rows, "inner dimensions differ");
    assert!(c.len() >= m * n, "output too small");
    if m == 0 || n == 0 || k == 0 {
        return;
    }
    // SAFETY: every index touched is below `rows * rs + cols * cs` of a view
    // whose slice was checked against `rows * cols` at construction (the
    // transposed view swaps both pairs), and `c` holds `m * n` elements.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.data.as_ptr(),
            a.rs as isize,
            a.cs as isize,
            b.data.as_ptr(),
            b.rs as isize,
            b.cs as isize,
            1.0,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}

/// `out += x^T * w` for `w` row-major `x.len() x out.len()`.
#[inline]
pub(crate) fn vec_mat_acc(out: &mut [f64], x: &[f64], w: &[f64]) {
    let n = out.len();
    debug_assert_eq!(w.len(), x.len() * n);
    for (&xj, row) in x.iter().zip(w.chunks_exact(n)) {
        for (o, &wv) in out.iter_mut().zip(row) {
            *o += xj * wv;
        }
    }
}

pub(crate) fn transpose(w: &[f64], rows: usize, cols: usize) -> Vec<f64> {
    let mut t = vec![0.0; rows * cols];
    for r in 0..rows {
        for c in 0..cols {
            t[c * rows + r] = w[r * cols + c];
        }
    }
    t
}
