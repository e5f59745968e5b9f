//! Quadrature rules and the incomplete gamma function.

use std::f64::consts::PI;

/// Gauss-Legendre nodes and weights on `[-1, 1]`, by Newton iteration on
/// the three-term Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess for the i-th largest root
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else { p1 };
            let pnm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pnm1) / (x * x - 1.0);
            let step = pn / dp;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Nodes and weights mapped to `[a, b]`.
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    (
        x.into_iter().map(|t| mid + half * t).collect(),
        w.into_iter().map(|v| v * half).collect(),
    )
}

/// Regularized lower incomplete gamma `P(n + 1, x)` for integer order,
/// `1 - e^{-x} sum_{k<=n} x^k / k!`.
pub fn regularized_gamma_p_int(n: usize, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    // Below the mode the complementary sum cancels badly, so sum the
    // convergent series for P directly: e^{-x} sum_{k>n} x^k / k!.
    if x < n as f64 + 1.0 {
        let mut term = (-x).exp();
        for k in 1..=n {
            term *= x / k as f64;
        }
        let mut sum = 0.0;
        let mut k = n + 1;
        loop {
            term *= x / k as f64;
            sum += term;
            if term < sum * 1e-17 {
                break;
            }
            k += 1;
        }
        sum
    } else {
        let mut term = (-x).exp();
        let mut sum = term;
        for k in 1..=n {
            term *= x / k as f64;
            sum += term;
        }
        1.0 - sum
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_exactly() {
        for n in [1usize, 2, 5, 16, 64] {
            let (x, w) = gauss_legendre(n);
            for deg in 0..(2 * n) {
                let approx: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((approx - exact).abs() < 1e-13, "n={n} deg={deg}");
            }
        }
    }

    #[test]
    fn mapped_interval() {
        let (x, w) = gauss_legendre_on(40, 0.0, 1.0);
        let v: f64 = x.iter().zip(&w).map(|(x, w)| w * (-x).exp()).sum();
        assert!((v - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
    }

    #[test]
    fn incomplete_gamma_values() {
        assert!((regularized_gamma_p_int(0, 1.0) - (1.0 - (-1.0f64).exp())).abs() < 1e-16);
        // P(2, 2) = 1 - 3 e^{-2}
        assert!((regularized_gamma_p_int(1, 2.0) - (1.0 - 3.0 * (-2.0f64).exp())).abs() < 1e-15);
        // 1 - P(6, 40) = e^{-40} sum_{k<=5} 40^k / k!
        let q: f64 = (0..=5)
            .map(|k| 40f64.powi(k) / (1..=k).map(f64::from).product::<f64>())
            .sum::<f64>()
            * (-40f64).exp();
        assert!((1.0 - regularized_gamma_p_int(5, 40.0) - q).abs() < 1e-16);
        assert_eq!(regularized_gamma_p_int(3, 0.0), 0.0);
        // small argument: P(4, 1e-3) ~ x^4 / 24
        let v = regularized_gamma_p_int(3, 1e-3);
        assert!((v / (1e-12 / 24.0) - 1.0).abs() < 1e-3);
    }
}
