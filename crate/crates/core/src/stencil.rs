//! Finite-difference weights on arbitrary nodes (Fornberg's recurrence).

/// Weights `w[k][j]` such that `f^(k)(x0) ~ sum_j w[k][j] f(nodes[j])`, for
/// every derivative order `k <= max_order`.
pub fn fornberg_weights(x0: f64, nodes: &[f64], max_order: usize) -> Vec<Vec<f64>> {
    let n = nodes.len();
    let mut c = vec![vec![0.0; n]; max_order + 1];
    if n == 0 {
        return c;
    }
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - x0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(max_order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - x0;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Symmetric integer-node stencil `-r..=r` for the `order`-th derivative at 0,
/// on unit spacing.
pub fn central_stencil(order: usize, radius: usize) -> Vec<(i64, f64)> {
    let r = radius as i64;
    let nodes: Vec<f64> = (-r..=r).map(|s| s as f64).collect();
    let w = fornberg_weights(0.0, &nodes, order);
    (-r..=r)
        .zip(w[order].iter().copied())
        .filter(|(_, w)| *w != 0.0)
        .collect()
}
