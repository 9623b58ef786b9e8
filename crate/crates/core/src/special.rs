//! Scalar special functions shared by the analytic modules.

use std::f64::consts::SQRT_2;

/// Gaussian tail probability `Q(x) = P[Z > x]` for standard normal `Z`.
///
/// Evaluated as `erfc(x / sqrt(2)) / 2`. The underlying `erfc` is the musl
/// implementation, accurate to about one ulp; for `x > 0` no cancellation
/// occurs, so the relative error stays well under 1e-12 into the deep tail.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / SQRT_2)
}

/// Unnormalized sinc, `sin(x) / x`, with the removable singularity filled.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// `n!` for `n <= 20` (the largest factorial representable in `u64`).
pub fn factorial(n: usize) -> Option<u64> {
    if n > 20 {
        return None;
    }
    Some((1..=n as u64).product())
}

pub fn ln_factorial(n: u64) -> f64 {
    libm::lgamma(n as f64 + 1.0)
}

/// Binomial coefficient as a float.
///
/// Exact product form up to `n = 60`; log-gamma beyond that.
pub fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    if n <= 60 {
        let mut acc: u128 = 1;
        for i in 0..k {
            acc = acc * (n - i) as u128 / (i + 1) as u128;
        }
        acc as f64
    } else {
        (ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)).exp()
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; order];
    let mut weights = vec![0.0; order];
    let n = order as f64;
    for i in 0..order.div_ceil(2) {
        // Chebyshev initial guess, refined by Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=order {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            let p = if order == 0 { 1.0 } else { p1 };
            dp = n * (x * p - p0) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[order - 1 - i] = x;
        weights[i] = w;
        weights[order - 1 - i] = w;
    }
    (nodes, weights)
}

/// Fixed-order composite Gauss–Legendre integration of a real or complex
/// integrand over `[a, b]`, split into `panels` equal panels.
pub struct Quadrature {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Quadrature {
    pub fn new(order: usize) -> Self {
        let (nodes, weights) = gauss_legendre(order);
        Self { nodes, weights }
    }

    pub fn integrate<T, F>(&self, a: f64, b: f64, panels: usize, mut f: F) -> T
    where
        T: Default + std::ops::AddAssign + std::ops::Mul<f64, Output = T>,
        F: FnMut(f64) -> T,
    {
        let mut acc = T::default();
        if b <= a || panels == 0 {
            return acc;
        }
        let h = (b - a) / panels as f64;
        for p in 0..panels {
            let lo = a + p as f64 * h;
            let mid = lo + 0.5 * h;
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                acc += f(mid + 0.5 * h * x) * (w * 0.5 * h);
            }
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q_reference_values() {
        // Q(1) and Q(sqrt(10)) from high-precision tables.
        assert!((q_function(1.0) - 0.158_655_253_931_457_05).abs() < 1e-15);
        assert!((q_function(10f64.sqrt()) / 7.827_011_290_012_74e-4 - 1.0).abs() < 1e-12);
        assert!((q_function(0.0) - 0.5).abs() < 1e-16);
        assert_eq!(q_function(f64::INFINITY), 0.0);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10.0);
        assert_eq!(binomial(60, 30), 118_264_581_564_861_424.0);
        let big = binomial(80, 40);
        assert!((big / 1.075_072_087_333_361_8e23 - 1.0).abs() < 1e-10);
        assert_eq!(binomial(3, 4), 0.0);
    }

    #[test]
    fn gauss_legendre_is_exact_for_polynomials() {
        let q = Quadrature::new(8);
        let v: f64 = q.integrate(0.0, 2.0, 1, |x| x.powi(15));
        assert!((v - 2f64.powi(16) / 16.0).abs() < 1e-9);
        let w: f64 = q.integrate(0.0, std::f64::consts::PI, 4, f64::sin);
        assert!((w - 2.0).abs() < 1e-13);
    }

    #[test]
    fn sinc_limits() {
        assert_eq!(sinc(0.0), 1.0);
        assert!((sinc(1e-5) - (1e-5f64).sin() / 1e-5).abs() < 4e-16);
        assert!((sinc(std::f64::consts::PI)).abs() < 1e-16);
    }
}
