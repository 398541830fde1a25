//! Finite-difference weights on arbitrary node sets.

/// Weights `w[k][j]` such that `sum_j w[k][j] f(x_j)` approximates `f^(k)(x0)`,
/// for `k = 0..=max_deriv` (Fornberg's recursion).
pub fn fornberg_weights(x0: f64, x: &[f64], max_deriv: usize) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut c = vec![vec![0.0; n]; max_deriv + 1];
    if n == 0 {
        return c;
    }
    let mut c1 = 1.0;
    let mut c4 = x[0] - x0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(max_deriv);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - x0;
        for j in 0..i {
            let c3 = x[i] - x[j];
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

/// Centered weights on integer offsets `-p..=p` for derivative `deriv` with the
/// given even accuracy order, in units of `h = 1`.
pub fn centered_weights(deriv: usize, accuracy: usize) -> Vec<f64> {
    let p = centered_half_width(deriv, accuracy) as i64;
    let nodes: Vec<f64> = (-p..=p).map(|k| k as f64).collect();
    let mut w = fornberg_weights(0.0, &nodes, deriv).swap_remove(deriv);
    // Integer-offset stencils have rational weights; clean rounding noise.
    for v in w.iter_mut() {
        let r = (*v * 720.0).round() / 720.0;
        if (r - *v).abs() < 1e-9 {
            *v = r;
        }
    }
    w
}

pub fn centered_half_width(deriv: usize, accuracy: usize) -> usize {
    (deriv + 1) / 2 + accuracy / 2 - 1 + usize::from(deriv == 0)
}

/// Interpolate value and first derivative at `x0` through the given nodes.
pub fn interp_with_derivative(x0: f64, x: &[f64], y: &[f64]) -> (f64, f64) {
    let w = fornberg_weights(x0, x, 1);
    let v = w[0].iter().zip(y).map(|(a, b)| a * b).sum();
    let d = w[1].iter().zip(y).map(|(a, b)| a * b).sum();
    (v, d)
}
