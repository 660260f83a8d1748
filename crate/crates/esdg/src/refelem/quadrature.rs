//! Volume and surface quadrature on the bi-unit simplex.
//!
//! Volume rules are collapsed-coordinate Gauss-Jacobi tensor products, which
//! guarantee exactness at any requested degree at the cost of slightly more
//! points than minimal tabulated rules. Triangle rules used on tetrahedron
//! faces are additionally symmetrized over the rotation group so that the
//! point set is invariant under all six vertex permutations; interior-face
//! point matching between neighboring elements relies on this.

use super::jacobi::{gauss_jacobi, gauss_legendre};
use crate::{Error, Point, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

/// Points with positive weights on a reference domain.
///
/// The domain is the bi-unit triangle/tetrahedron for volume rules, the
/// interval [-1,1] (2D) or the bi-unit triangle (3D) for face rules.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
    pub exactness_degree: usize,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Max relative error integrating monomials up to `self.exactness_degree`
    /// on the bi-unit simplex of dimension `dim`.
    pub fn max_monomial_error(&self, dim: usize) -> f64 {
        let mut worst: f64 = 0.0;
        for powers in monomial_powers(dim, self.exactness_degree) {
            let exact = monomial_integral(dim, &powers);
            let approx: f64 = self
                .points
                .iter()
                .zip(&self.weights)
                .map(|(p, w)| {
                    w * p[0].powi(powers[0] as i32)
                        * p[1].powi(powers[1] as i32)
                        * p[2].powi(powers[2] as i32)
                })
                .sum();
            let scale = exact.abs().max(1.0);
            worst = worst.max((approx - exact).abs() / scale);
        }
        worst
    }
}

/// All monomial exponent triples of total degree <= deg (third entry 0 in 2D).
pub fn monomial_powers(dim: usize, deg: usize) -> Vec<[u32; 3]> {
    let mut out = Vec::new();
    let deg = deg as u32;
    for i in 0..=deg {
        for j in 0..=(deg - i) {
            if dim == 2 {
                out.push([i, j, 0]);
            } else {
                for k in 0..=(deg - i - j) {
                    out.push([i, j, k]);
                }
            }
        }
    }
    out
}

fn big_binomial(n: u32, k: u32) -> BigInt {
    let mut r = BigInt::one();
    for i in 0..k {
        r = r * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    r
}

fn big_factorial(n: u32) -> BigInt {
    let mut r = BigInt::one();
    for i in 2..=n {
        r *= BigInt::from(i);
    }
    r
}

/// Exact integral of x^i y^j z^k over the bi-unit reference simplex,
/// computed in rational arithmetic via the unit-simplex moment formula.
pub fn monomial_integral(dim: usize, powers: &[u32; 3]) -> f64 {
    let d = dim as u32;
    let active = &powers[..dim];
    // shift to the unit simplex: x_m = 2 u_m - 1
    let mut total = BigRational::zero();
    let mut idx = vec![0u32; dim];
    loop {
        let mut coef = BigInt::one();
        let mut psum = 0u32;
        for m in 0..dim {
            let (a, p) = (active[m], idx[m]);
            coef *= big_binomial(a, p) << p; // C(a,p) * 2^p
            if (a - p) % 2 == 1 {
                coef = -coef;
            }
            psum += p;
        }
        // unit-simplex moment: prod p_m! / (sum p_m + d)!
        let mut num = BigInt::one();
        for m in 0..dim {
            num *= big_factorial(idx[m]);
        }
        let den = big_factorial(psum + d);
        total += BigRational::new(coef * num, den);

        // next multi-index below `active`
        let mut m = 0;
        loop {
            if m == dim {
                let scale = BigRational::from(BigInt::from(1u32 << d));
                return (total * scale).to_f64().unwrap();
            }
            if idx[m] < active[m] {
                idx[m] += 1;
                break;
            }
            idx[m] = 0;
            m += 1;
        }
    }
}

/// Collapsed-coordinate volume rule on the bi-unit simplex, exact for
/// polynomials of total degree >= `target_degree`.
pub fn simplex_quadrature(dim: usize, target_degree: usize) -> Result<QuadratureRule> {
    if dim != 2 && dim != 3 {
        return Err(Error::UnsupportedDim(dim));
    }
    let n = (target_degree / 2 + 1).max(1);
    let exactness = 2 * n - 1;
    let (ga, wa) = gauss_legendre(n);
    let (gb, wb) = gauss_jacobi(1, 0, n);
    let mut points = Vec::new();
    let mut weights = Vec::new();
    if dim == 2 {
        for (ia, &a) in ga.iter().enumerate() {
            for (ib, &b) in gb.iter().enumerate() {
                let x = (1.0 + a) * (1.0 - b) / 2.0 - 1.0;
                points.push([x, b, 0.0]);
                weights.push(wa[ia] * wb[ib] / 2.0);
            }
        }
    } else {
        let (gc, wc) = gauss_jacobi(2, 0, n);
        for (ia, &a) in ga.iter().enumerate() {
            for (ib, &b) in gb.iter().enumerate() {
                for (ic, &c) in gc.iter().enumerate() {
                    let x = (1.0 + a) * (1.0 - b) * (1.0 - c) / 4.0 - 1.0;
                    let y = (1.0 + b) * (1.0 - c) / 2.0 - 1.0;
                    points.push([x, y, c]);
                    weights.push(wa[ia] * wb[ib] * wc[ic] / 8.0);
                }
            }
        }
    }
    Ok(QuadratureRule {
        points,
        weights,
        exactness_degree: exactness,
    })
}

/// Triangle barycentric coordinates on the bi-unit reference triangle.
fn tri_barycentric(p: &Point) -> [f64; 3] {
    let l1 = (p[0] + 1.0) / 2.0;
    let l2 = (p[1] + 1.0) / 2.0;
    [1.0 - l1 - l2, l1, l2]
}

fn tri_from_barycentric(l: &[f64; 3]) -> Point {
    [-l[0] + l[1] - l[2], -l[0] - l[1] + l[2], 0.0]
}

/// Symmetrize a triangle rule over the three rotations of the vertex set.
/// The collapsed rule is already invariant under one reflection, so the
/// result is invariant under the full symmetric group.
fn rot3_symmetrize(rule: QuadratureRule) -> QuadratureRule {
    let mut points = Vec::with_capacity(3 * rule.len());
    let mut weights = Vec::with_capacity(3 * rule.len());
    for (p, &w) in rule.points.iter().zip(&rule.weights) {
        let l = tri_barycentric(p);
        for rot in 0..3 {
            let lr = [l[(3 - rot) % 3], l[(4 - rot) % 3], l[(5 - rot) % 3]];
            points.push(tri_from_barycentric(&lr));
            weights.push(w / 3.0);
        }
    }
    QuadratureRule {
        points,
        weights,
        exactness_degree: rule.exactness_degree,
    }
}

/// Quadrature on the reference face domain: Gauss-Legendre on [-1,1] for 2D
/// elements, a fully symmetric triangle rule for 3D elements.
pub fn face_quadrature(dim: usize, target_degree: usize) -> Result<QuadratureRule> {
    match dim {
        2 => {
            let n = (target_degree / 2 + 1).max(1);
            let (x, w) = gauss_legendre(n);
            Ok(QuadratureRule {
                points: x.iter().map(|&xi| [xi, 0.0, 0.0]).collect(),
                weights: w,
                exactness_degree: 2 * n - 1,
            })
        }
        3 => Ok(rot3_symmetrize(simplex_quadrature(2, target_degree)?)),
        _ => Err(Error::UnsupportedDim(dim)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_integrand_gives_reference_measure() {
        let r2 = simplex_quadrature(2, 0).unwrap();
        assert!((r2.weights.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        let r3 = simplex_quadrature(3, 0).unwrap();
        assert!((r3.weights.iter().sum::<f64>() - 4.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn monomial_oracle_spot_values() {
        // measure
        assert!((monomial_integral(2, &[0, 0, 0]) - 2.0).abs() < 1e-15);
        assert!((monomial_integral(3, &[0, 0, 0]) - 4.0 / 3.0).abs() < 1e-15);
        // centroid: integral of x over bi-unit triangle = area * (-1/3)
        assert!((monomial_integral(2, &[1, 0, 0]) + 2.0 / 3.0).abs() < 1e-15);
        assert!((monomial_integral(3, &[1, 0, 0]) + 4.0 / 3.0 / 2.0).abs() < 1e-15);
    }

    #[test]
    fn x2y2_matches_oracle_at_degree_9() {
        let rule = simplex_quadrature(2, 9).unwrap();
        let approx: f64 = rule
            .points
            .iter()
            .zip(&rule.weights)
            .map(|(p, w)| w * p[0] * p[0] * p[1] * p[1])
            .sum();
        let exact = monomial_integral(2, &[2, 2, 0]);
        assert!((approx - exact).abs() / exact.abs() < 1e-12);
    }

    #[test]
    fn volume_rules_exact_to_declared_degree() {
        for dim in [2, 3] {
            for deg in [1, 3, 5, 7, 9, 11] {
                let rule = simplex_quadrature(dim, deg).unwrap();
                assert!(rule.exactness_degree >= deg);
                assert!(rule.weights.iter().all(|&w| w > 0.0));
                let err = rule.max_monomial_error(dim);
                assert!(err < 1e-12, "dim={dim} deg={deg} err={err:.2e}");
            }
        }
    }

    #[test]
    fn face_rules_exact_and_positive() {
        // 2D edges: exactness on the interval
        let r = face_quadrature(2, 9).unwrap();
        for k in 0..=r.exactness_degree as u32 {
            let s: f64 = r
                .points
                .iter()
                .zip(&r.weights)
                .map(|(p, w)| w * p[0].powi(k as i32))
                .sum();
            let exact = if k % 2 == 0 { 2.0 / (k as f64 + 1.0) } else { 0.0 };
            assert!((s - exact).abs() < 1e-13);
        }
        // 3D faces: exactness on the triangle
        let r = face_quadrature(3, 7).unwrap();
        assert!(r.weights.iter().all(|&w| w > 0.0));
        assert!(r.max_monomial_error(2) < 1e-12);
    }

    #[test]
    fn symmetrized_face_rule_invariant_under_all_permutations() {
        let r = face_quadrature(3, 7).unwrap();
        // apply each of the six barycentric permutations; the point set must
        // map onto itself (same multiset of (point, weight) pairs)
        let perms: [[usize; 3]; 6] = [
            [0, 1, 2],
            [1, 2, 0],
            [2, 0, 1],
            [0, 2, 1],
            [2, 1, 0],
            [1, 0, 2],
        ];
        for perm in perms {
            for (p, &w) in r.points.iter().zip(&r.weights) {
                let l = tri_barycentric(p);
                let lp = [l[perm[0]], l[perm[1]], l[perm[2]]];
                let q = tri_from_barycentric(&lp);
                let found = r
                    .points
                    .iter()
                    .zip(&r.weights)
                    .any(|(pt, &wt)| {
                        (pt[0] - q[0]).abs() < 1e-12
                            && (pt[1] - q[1]).abs() < 1e-12
                            && (wt - w).abs() < 1e-13
                    });
                assert!(found, "perm {perm:?} image of {p:?} missing");
            }
        }
    }

    #[test]
    fn unsupported_dim_rejected() {
        assert!(simplex_quadrature(1, 3).is_err());
        assert!(simplex_quadrature(4, 3).is_err());
    }
}
