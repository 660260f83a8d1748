//! Jacobi polynomials and Gauss-type quadrature on the interval.
//!
//! Polynomials are normalized to be orthonormal with respect to the weight
//! (1-x)^alpha (1+x)^beta on [-1, 1]. Only integer alpha, beta are needed
//! anywhere in this crate.

use nalgebra::{DMatrix, SymmetricEigen};

/// Gamma(a+1) Gamma(b+1) / Gamma(a+b+1) for nonnegative integers, i.e.
/// a! b! / (a+b)!, evaluated as a product of fractions to stay in range.
fn beta_ratio(a: u32, b: u32) -> f64 {
    // a!b!/(a+b)! = 1/C(a+b, a)
    let (small, large) = if a < b { (a, b) } else { (b, a) };
    let mut r = 1.0;
    for i in 1..=small {
        r *= i as f64 / (large + i) as f64;
    }
    r
}

/// Value of the orthonormal Jacobi polynomial P_n^{(alpha,beta)} at x.
pub fn jacobi_p(x: f64, alpha: u32, beta: u32, n: usize) -> f64 {
    let (a, b) = (alpha as f64, beta as f64);
    let gamma0 = 2f64.powf(a + b + 1.0) / (a + b + 1.0) * beta_ratio(alpha, beta);
    let mut pm1 = 1.0 / gamma0.sqrt();
    if n == 0 {
        return pm1;
    }
    let gamma1 = (a + 1.0) * (b + 1.0) / (a + b + 3.0) * gamma0;
    let mut p = ((a + b + 2.0) * x / 2.0 + (a - b) / 2.0) / gamma1.sqrt();
    if n == 1 {
        return p;
    }
    let mut aold = 2.0 / (2.0 + a + b) * ((a + 1.0) * (b + 1.0) / (a + b + 3.0)).sqrt();
    for i in 1..n {
        let i = i as f64;
        let h1 = 2.0 * i + a + b;
        let anew = 2.0 / (h1 + 2.0)
            * ((i + 1.0) * (i + 1.0 + a + b) * (i + 1.0 + a) * (i + 1.0 + b)
                / (h1 + 1.0)
                / (h1 + 3.0))
                .sqrt();
        let bnew = -(a * a - b * b) / h1 / (h1 + 2.0);
        let pnew = (-aold * pm1 + (x - bnew) * p) / anew;
        pm1 = p;
        p = pnew;
        aold = anew;
    }
    p
}

/// Derivative of the orthonormal Jacobi polynomial.
pub fn grad_jacobi_p(x: f64, alpha: u32, beta: u32, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let nf = n as f64;
    (nf * (nf + alpha as f64 + beta as f64 + 1.0)).sqrt()
        * jacobi_p(x, alpha + 1, beta + 1, n - 1)
}

/// n-point Gauss-Jacobi rule for the weight (1-x)^alpha (1+x)^beta on [-1,1],
/// exact for polynomials of degree 2n-1. Computed by Golub-Welsch.
pub fn gauss_jacobi(alpha: u32, beta: u32, n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let (a, b) = (alpha as f64, beta as f64);
    let mu0 = 2f64.powf(a + b + 1.0) * beta_ratio(alpha, beta) / (a + b + 1.0);
    if n == 1 {
        return (vec![(b - a) / (a + b + 2.0)], vec![mu0]);
    }
    let mut jm = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        let kf = k as f64;
        let diag = if k == 0 {
            (b - a) / (a + b + 2.0)
        } else {
            (b * b - a * a) / ((2.0 * kf + a + b) * (2.0 * kf + a + b + 2.0))
        };
        jm[(k, k)] = diag;
        if k + 1 < n {
            let m = kf + 1.0;
            let num = 4.0 * m * (m + a) * (m + b) * (m + a + b);
            let den = (2.0 * m + a + b).powi(2) * (2.0 * m + a + b + 1.0) * (2.0 * m + a + b - 1.0);
            let off = (num / den).sqrt();
            jm[(k, k + 1)] = off;
            jm[(k + 1, k)] = off;
        }
    }
    let eig = SymmetricEigen::new(jm);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let x = eig.eigenvalues[i];
            let v0 = eig.eigenvectors[(0, i)];
            (x, mu0 * v0 * v0)
        })
        .collect();
    pairs.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap());
    (
        pairs.iter().map(|p| p.0).collect(),
        pairs.iter().map(|p| p.1).collect(),
    )
}

/// Gauss-Legendre rule on [-1,1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    gauss_jacobi(0, 0, n)
}

/// Gauss-Lobatto-Legendre points (N+1 of them, including both endpoints).
pub fn gauss_lobatto(n: usize) -> Vec<f64> {
    assert!(n >= 1);
    if n == 1 {
        return vec![-1.0, 1.0];
    }
    let (interior, _) = gauss_jacobi(1, 1, n - 1);
    let mut pts = Vec::with_capacity(n + 1);
    pts.push(-1.0);
    pts.extend(interior);
    pts.push(1.0);
    pts
}

#[cfg(test)]
mod tests {
    use super::*;

    fn analytic_interval_monomial(k: u32) -> f64 {
        if k % 2 == 0 {
            2.0 / (k as f64 + 1.0)
        } else {
            0.0
        }
    }

    #[test]
    fn gauss_legendre_monomial_exactness() {
        for n in 1..=12 {
            let (x, w) = gauss_legendre(n);
            for k in 0..=(2 * n - 1) as u32 {
                let s: f64 = x
                    .iter()
                    .zip(&w)
                    .map(|(xi, wi)| wi * xi.powi(k as i32))
                    .sum();
                assert!(
                    (s - analytic_interval_monomial(k)).abs() < 1e-13,
                    "n={n} k={k} got {s}"
                );
            }
        }
    }

    #[test]
    fn gauss_jacobi_weights_positive_and_sum() {
        for &(a, b) in &[(0u32, 0u32), (1, 0), (2, 0), (1, 1)] {
            for n in 1..=10 {
                let (x, w) = gauss_jacobi(a, b, n);
                assert!(w.iter().all(|&wi| wi > 0.0));
                assert!(x.windows(2).all(|p| p[0] < p[1]));
                // sum of weights = integral of the weight function
                let mu0 = w.iter().sum::<f64>();
                let exact = match (a, b) {
                    (0, 0) => 2.0,
                    (1, 0) | (0, 1) => 2.0,
                    (2, 0) => 8.0 / 3.0,
                    (1, 1) => 4.0 / 3.0,
                    _ => unreachable!(),
                };
                assert!((mu0 - exact).abs() < 1e-13, "a={a} b={b} n={n}");
            }
        }
    }

    #[test]
    fn jacobi_orthonormal_under_matching_rule() {
        for &(a, b) in &[(0u32, 0u32), (1, 0), (3, 0), (2, 1)] {
            let n = 9;
            let (x, w) = gauss_jacobi(a, b, n);
            for p in 0..=5usize {
                for q in 0..=5usize {
                    let s: f64 = x
                        .iter()
                        .zip(&w)
                        .map(|(&xi, &wi)| wi * jacobi_p(xi, a, b, p) * jacobi_p(xi, a, b, q))
                        .sum();
                    let expect = if p == q { 1.0 } else { 0.0 };
                    assert!((s - expect).abs() < 1e-12, "a={a} b={b} p={p} q={q} s={s}");
                }
            }
        }
    }

    #[test]
    fn grad_jacobi_matches_central_difference() {
        let eps = 1e-6;
        for &(a, b) in &[(0u32, 0u32), (5, 0), (2, 1)] {
            for n in 0..6 {
                for &x in &[-0.7, -0.1, 0.3, 0.9] {
                    let fd =
                        (jacobi_p(x + eps, a, b, n) - jacobi_p(x - eps, a, b, n)) / (2.0 * eps);
                    let g = grad_jacobi_p(x, a, b, n);
                    assert!((fd - g).abs() < 1e-7 * (1.0 + g.abs()), "a={a} b={b} n={n}");
                }
            }
        }
    }

    #[test]
    fn lobatto_endpoints_and_count() {
        for n in 1..=8 {
            let pts = gauss_lobatto(n);
            assert_eq!(pts.len(), n + 1);
            assert_eq!(pts[0], -1.0);
            assert_eq!(*pts.last().unwrap(), 1.0);
            assert!(pts.windows(2).all(|p| p[0] < p[1]));
        }
    }
}
