//! Reference computations that share no code with the library.
#![allow(dead_code)]

use num_complex::Complex64 as C;

pub fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

/// Σ c_k z^k with explicit powers.
pub fn power_sum(coeffs: &[C], z: C) -> C {
    coeffs.iter().enumerate().map(|(k, ck)| ck * z.powu(k as u32)).sum()
}

pub fn derivative_coeffs(coeffs: &[C]) -> Vec<C> {
    coeffs.iter().enumerate().skip(1).map(|(k, ck)| ck * k as f64).collect()
}

/// Central difference along the real axis.
pub fn central_difference<F: Fn(C) -> C>(f: F, z: C, h: f64) -> C {
    (f(z + h) - f(z - h)) / (2.0 * h)
}

/// M_2(r, f) from the coefficients.
pub fn parseval_mean(coeffs: &[C], r: f64) -> f64 {
    coeffs
        .iter()
        .enumerate()
        .map(|(k, ck)| ck.norm_sqr() * r.powi(2 * k as i32))
        .sum::<f64>()
        .sqrt()
}

/// Unweighted Bergman A² norm from the coefficients.
pub fn bergman_norm(coeffs: &[C]) -> f64 {
    coeffs
        .iter()
        .enumerate()
        .map(|(k, ck)| ck.norm_sqr() / (k + 1) as f64)
        .sum::<f64>()
        .sqrt()
}

/// λ(a − z)/(1 − āz).
pub fn moebius(a: C, lambda: C, z: C) -> C {
    lambda * (a - z) / (1.0 - a.conj() * z)
}

/// Coefficients of Π (z − r_j), constant term first.
pub fn poly_from_roots(roots: &[C]) -> Vec<C> {
    let mut p = vec![c(1.0, 0.0)];
    for &r in roots {
        let mut next = vec![c(0.0, 0.0); p.len() + 1];
        for (k, &pk) in p.iter().enumerate() {
            next[k + 1] += pk;
            next[k] -= r * pk;
        }
        p = next;
    }
    p
}

/// sup_{0≤r<1} (1 − r²) n r^{n−1}: the Bloch seminorm of z^n.
pub fn bloch_monomial(n: u32) -> f64 {
    if n == 1 {
        return 1.0;
    }
    let n = n as f64;
    n * (2.0 / (n + 1.0)) * ((n - 1.0) / (n + 1.0)).powf((n - 1.0) / 2.0)
}
