//! Finite-difference stencils on uniform and nonuniform grids.

/// First derivative on a nonuniform grid, second-order three-point stencils
/// (one-sided at the ends). `xs` must be strictly increasing.
pub fn deriv_nonuniform(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = xs.len();
    assert_eq!(n, ys.len());
    assert!(n >= 3, "need at least 3 samples");
    let mut d = vec![0.0; n];
    for i in 1..n - 1 {
        let h1 = xs[i] - xs[i - 1];
        let h2 = xs[i + 1] - xs[i];
        d[i] = -h2 / (h1 * (h1 + h2)) * ys[i - 1]
            + (h2 - h1) / (h1 * h2) * ys[i]
            + h1 / (h2 * (h1 + h2)) * ys[i + 1];
    }
    {
        let h1 = xs[1] - xs[0];
        let h2 = xs[2] - xs[1];
        d[0] = -(2.0 * h1 + h2) / (h1 * (h1 + h2)) * ys[0]
            + (h1 + h2) / (h1 * h2) * ys[1]
            - h1 / (h2 * (h1 + h2)) * ys[2];
        let g1 = xs[n - 1] - xs[n - 2];
        let g2 = xs[n - 2] - xs[n - 3];
        d[n - 1] = (2.0 * g1 + g2) / (g1 * (g1 + g2)) * ys[n - 1]
            - (g1 + g2) / (g1 * g2) * ys[n - 2]
            + g1 / (g2 * (g1 + g2)) * ys[n - 3];
    }
    d
}

/// d/ds of a grid function sampled on a uniform x-grid, via the chain rule
/// ds = chi dx. Centered interior, second-order one-sided ends.
pub fn deriv_s_uniform_x(u: &[f64], chi: &[f64], dx: f64) -> Vec<f64> {
    let n = u.len();
    assert_eq!(n, chi.len());
    assert!(n >= 3);
    let mut d = vec![0.0; n];
    for i in 1..n - 1 {
        d[i] = (u[i + 1] - u[i - 1]) / (2.0 * dx * chi[i]);
    }
    d[0] = (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * dx * chi[0]);
    d[n - 1] = (3.0 * u[n - 1] - 4.0 * u[n - 2] + u[n - 3]) / (2.0 * dx * chi[n - 1]);
    d
}

/// Second s-derivative in conservative form (1/chi) d/dx ((1/chi) du/dx) on a
/// uniform x-grid. End values are copied from the adjacent interior node.
pub fn deriv2_s_uniform_x(u: &[f64], chi: &[f64], dx: f64) -> Vec<f64> {
    let n = u.len();
    assert_eq!(n, chi.len());
    assert!(n >= 3);
    let mut d = vec![0.0; n];
    for i in 1..n - 1 {
        let cm = 0.5 * (chi[i] + chi[i - 1]);
        let cp = 0.5 * (chi[i] + chi[i + 1]);
        d[i] = ((u[i + 1] - u[i]) / cp - (u[i] - u[i - 1]) / cm) / (dx * dx * chi[i]);
    }
    d[0] = d[1];
    d[n - 1] = d[n - 2];
    d
}
