//! Least-squares fitting and small eigenvalue problems used by the
//! asymptotic-rate diagnostics.

/// Ordinary least squares line `y = intercept + slope * x`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    assert_eq!(xs.len(), ys.len());
    assert!(xs.len() >= 2, "fit needs >= 2 points");
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let slope = sxy / sxx;
    (my - slope * mx, slope)
}

/// Log-log slope and amplitude: fits `y = amp * x^slope` on positive data.
pub fn power_law_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let (intercept, slope) = linear_fit(&lx, &ly);
    (intercept.exp(), slope)
}

/// Eigenvalues of a real 3x3 matrix via its characteristic cubic. Returns the
/// real parts, sorted ascending (sufficient for the near-diagonal Jacobians
/// this crate deals with).
pub fn eigenvalues_3x3(m: &[[f64; 3]; 3]) -> [f64; 3] {
    let tr = m[0][0] + m[1][1] + m[2][2];
    let m2 = m[0][0] * m[1][1] - m[0][1] * m[1][0]
        + m[0][0] * m[2][2]
        - m[0][2] * m[2][0]
        + m[1][1] * m[2][2]
        - m[1][2] * m[2][1];
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    // lambda^3 - tr lambda^2 + m2 lambda - det = 0; depress with
    // lambda = u + tr/3.
    let p = m2 - tr * tr / 3.0;
    let q = -2.0 * tr * tr * tr / 27.0 + tr * m2 / 3.0 - det;
    let shift = tr / 3.0;
    let disc = q * q / 4.0 + p * p * p / 27.0;
    let mut roots = if disc <= 0.0 {
        // Three real roots: trigonometric form.
        let r = (-p / 3.0).max(0.0).sqrt();
        if r == 0.0 {
            [shift, shift, shift]
        } else {
            let arg = (3.0 * q / (2.0 * p) / r).clamp(-1.0, 1.0);
            let phi = arg.acos() / 3.0;
            let two_r = 2.0 * r;
            [
                two_r * phi.cos() + shift,
                two_r * (phi - 2.0 * std::f64::consts::PI / 3.0).cos() + shift,
                two_r * (phi - 4.0 * std::f64::consts::PI / 3.0).cos() + shift,
            ]
        }
    } else {
        // One real root + complex pair; report the common real part twice.
        let sq = disc.sqrt();
        let u = (-q / 2.0 + sq).cbrt();
        let v = (-q / 2.0 - sq).cbrt();
        let real = u + v + shift;
        let pair_re = -(u + v) / 2.0 + shift;
        [real, pair_re, pair_re]
    };
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    roots
}
