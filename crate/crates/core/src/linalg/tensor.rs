use ndarray::{Array2, ArrayD, IxDyn};

/// Contracts `a` and `b` over the paired axes, numpy-style: the result keeps
/// the free axes of `a` in order followed by the free axes of `b`.
pub fn tensordot(a: &ArrayD<f64>, b: &ArrayD<f64>, a_axes: &[usize], b_axes: &[usize]) -> ArrayD<f64> {
    assert_eq!(a_axes.len(), b_axes.len(), "contraction axis count");
    for (&i, &j) in a_axes.iter().zip(b_axes) {
        assert_eq!(a.shape()[i], b.shape()[j], "contracted dims differ");
    }
    let free_a: Vec<usize> = (0..a.ndim()).filter(|i| !a_axes.contains(i)).collect();
    let free_b: Vec<usize> = (0..b.ndim()).filter(|i| !b_axes.contains(i)).collect();

    let m: usize = free_a.iter().map(|&i| a.shape()[i]).product();
    let k: usize = a_axes.iter().map(|&i| a.shape()[i]).product();
    let n: usize = free_b.iter().map(|&i| b.shape()[i]).product();

    let perm_a: Vec<usize> = free_a.iter().chain(a_axes).copied().collect();
    let perm_b: Vec<usize> = b_axes.iter().chain(&free_b).copied().collect();
    let am = to_matrix(a, &perm_a, m, k);
    let bm = to_matrix(b, &perm_b, k, n);
    let c = am.dot(&bm);

    let out_shape: Vec<usize> = free_a
        .iter()
        .map(|&i| a.shape()[i])
        .chain(free_b.iter().map(|&i| b.shape()[i]))
        .collect();
    c.into_shape_with_order(IxDyn(&out_shape)).expect("contiguous product")
}

/// Permutes `t` and flattens it into a `rows x cols` matrix in row-major order.
pub fn to_matrix(t: &ArrayD<f64>, perm: &[usize], rows: usize, cols: usize) -> Array2<f64> {
    let p = t.view().permuted_axes(IxDyn(perm));
    let owned = p.as_standard_layout().into_owned();
    owned.into_shape_with_order((rows, cols)).expect("standard layout")
}
