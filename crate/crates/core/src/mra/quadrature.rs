//! Gauss–Legendre quadrature and Legendre polynomial evaluation on [0, 1].

/// Value and derivative of the Legendre polynomial `P_n` at `t ∈ [-1, 1]`.
pub fn legendre_with_derivative(n: usize, t: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p0, mut p1) = (1.0, t);
    let (mut d0, mut d1) = (0.0, 1.0);
    for m in 1..n {
        let mf = m as f64;
        let p2 = ((2.0 * mf + 1.0) * t * p1 - mf * p0) / (mf + 1.0);
        let d2 = d0 + (2.0 * mf + 1.0) * p1;
        p0 = p1;
        p1 = p2;
        d0 = d1;
        d1 = d2;
    }
    (p1, d1)
}

/// All Legendre values `P_0..P_{n-1}` at `t`.
pub fn legendre_all(n: usize, t: f64, out: &mut [f64]) {
    if n == 0 {
        return;
    }
    out[0] = 1.0;
    if n > 1 {
        out[1] = t;
    }
    for m in 1..n.saturating_sub(1) {
        let mf = m as f64;
        out[m + 1] = ((2.0 * mf + 1.0) * t * out[m] - mf * out[m - 1]) / (mf + 1.0);
    }
}

/// Gauss–Legendre nodes and weights mapped to [0, 1], nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "quadrature order must be positive");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut t = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, t);
            let dt = p / dp;
            t -= dt;
            if dt.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, t);
        // map [-1, 1] -> [0, 1], ascending order
        x[n - 1 - i] = 0.5 * (t + 1.0);
        w[n - 1 - i] = 1.0 / ((1.0 - t * t) * dp * dp);
    }
    (x, w)
}

/// Composite Gauss–Legendre rule on the given breakpoints.
pub fn composite_rule(breaks: &[f64], order: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(order);
    let mut xs = Vec::with_capacity(order * breaks.len());
    let mut ws = Vec::with_capacity(order * breaks.len());
    for pair in breaks.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if b <= a {
            continue;
        }
        for (xi, wi) in x.iter().zip(&w) {
            xs.push(a + (b - a) * xi);
            ws.push((b - a) * wi);
        }
    }
    (xs, ws)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_exactly() {
        for n in 1..12 {
            let (x, w) = gauss_legendre(n);
            for p in 0..(2 * n) {
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(p as i32)).sum();
                assert!((q - 1.0 / (p as f64 + 1.0)).abs() < 1e-14, "n={n} p={p}");
            }
        }
    }

    #[test]
    fn legendre_derivative_matches_finite_difference() {
        let h = 1e-6;
        for n in 0..9 {
            let t = 0.37;
            let (_, d) = legendre_with_derivative(n, t);
            let fd = (legendre_with_derivative(n, t + h).0 - legendre_with_derivative(n, t - h).0)
                / (2.0 * h);
            assert!((d - fd).abs() < 1e-7);
        }
    }
}
