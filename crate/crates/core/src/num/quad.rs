//! Trapezoid quadrature helpers with deterministic (sequential) reductions.

/// Trapezoid rule on a possibly nonuniform grid.
pub fn trapz(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let mut acc = 0.0;
    for i in 1..xs.len() {
        acc += 0.5 * (ys[i] + ys[i - 1]) * (xs[i] - xs[i - 1]);
    }
    acc
}

/// Cumulative trapezoid with prescribed starting value.
pub fn cumtrapz(xs: &[f64], ys: &[f64], start: f64) -> Vec<f64> {
    assert_eq!(xs.len(), ys.len());
    let mut out = Vec::with_capacity(xs.len());
    let mut acc = start;
    out.push(acc);
    for i in 1..xs.len() {
        acc += 0.5 * (ys[i] + ys[i - 1]) * (xs[i] - xs[i - 1]);
        out.push(acc);
    }
    out
}

/// Trapezoid rule with integrand given by values and measure weights
/// (integral of `f` against `w dx` on a uniform grid of spacing `dx`).
pub fn trapz_weighted_uniform(f: &[f64], w: &[f64], dx: f64) -> f64 {
    assert_eq!(f.len(), w.len());
    let n = f.len();
    if n < 2 {
        return 0.0;
    }
    let mut acc = 0.5 * (f[0] * w[0] + f[n - 1] * w[n - 1]);
    for i in 1..n - 1 {
        acc += f[i] * w[i];
    }
    acc * dx
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn trapz_quadratic() {
        let xs: Vec<f64> = (0..=1000).map(|i| i as f64 / 1000.0).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x * x).collect();
        assert_relative_eq!(trapz(&xs, &ys), 1.0 / 3.0, epsilon = 1e-6);
    }

    #[test]
    fn cumtrapz_matches_trapz_at_end() {
        let xs: Vec<f64> = (0..=57).map(|i| (i as f64 * 0.03).exp()).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 1.0 / x).collect();
        let c = cumtrapz(&xs, &ys, 2.0);
        assert_relative_eq!(c[57] - 2.0, trapz(&xs, &ys), epsilon = 1e-14);
    }
}
