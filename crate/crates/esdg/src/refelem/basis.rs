//! Orthonormal Koornwinder-Dubiner polynomial basis on the bi-unit simplex,
//! with analytic gradients, evaluated through collapsed coordinates.

use super::jacobi::{grad_jacobi_p, jacobi_p};
use crate::{Error, Point, Result};
use nalgebra::DMatrix;

/// Dimension of P^N on the d-simplex.
pub fn basis_dim(dim: usize, n: usize) -> usize {
    match dim {
        2 => (n + 1) * (n + 2) / 2,
        3 => (n + 1) * (n + 2) * (n + 3) / 6,
        _ => panic!("unsupported dim"),
    }
}

/// Dimension of the trace space on a face.
pub fn face_basis_dim(dim: usize, n: usize) -> usize {
    match dim {
        2 => n + 1,
        3 => (n + 1) * (n + 2) / 2,
        _ => panic!("unsupported dim"),
    }
}

fn collapsed_2d(p: &Point) -> (f64, f64) {
    let (r, s) = (p[0], p[1]);
    let a = if (1.0 - s).abs() > 1e-14 {
        2.0 * (1.0 + r) / (1.0 - s) - 1.0
    } else {
        -1.0
    };
    (a, s)
}

fn collapsed_3d(p: &Point) -> (f64, f64, f64) {
    let (r, s, t) = (p[0], p[1], p[2]);
    let a = if (s + t).abs() > 1e-14 {
        2.0 * (1.0 + r) / (-s - t) - 1.0
    } else {
        -1.0
    };
    let b = if (1.0 - t).abs() > 1e-14 {
        2.0 * (1.0 + s) / (1.0 - t) - 1.0
    } else {
        -1.0
    };
    (a, b, t)
}

fn eval_mode_2d(a: f64, b: f64, i: usize, j: usize) -> f64 {
    2f64.sqrt()
        * jacobi_p(a, 0, 0, i)
        * jacobi_p(b, 2 * i as u32 + 1, 0, j)
        * (1.0 - b).powi(i as i32)
}

fn grad_mode_2d(a: f64, b: f64, i: usize, j: usize) -> (f64, f64) {
    let fa = jacobi_p(a, 0, 0, i);
    let dfa = grad_jacobi_p(a, 0, 0, i);
    let gb = jacobi_p(b, 2 * i as u32 + 1, 0, j);
    let dgb = grad_jacobi_p(b, 2 * i as u32 + 1, 0, j);
    let hb = 0.5 * (1.0 - b);

    let mut dr = dfa * gb;
    if i > 0 {
        dr *= hb.powi(i as i32 - 1);
    }
    let mut ds = dfa * gb * 0.5 * (1.0 + a);
    if i > 0 {
        ds *= hb.powi(i as i32 - 1);
    }
    let mut tmp = dgb * hb.powi(i as i32);
    if i > 0 {
        tmp -= 0.5 * i as f64 * gb * hb.powi(i as i32 - 1);
    }
    ds += fa * tmp;

    let scale = 2f64.powf(i as f64 + 0.5);
    (scale * dr, scale * ds)
}

fn eval_mode_3d(a: f64, b: f64, c: f64, i: usize, j: usize, k: usize) -> f64 {
    2.0 * 2f64.sqrt()
        * jacobi_p(a, 0, 0, i)
        * jacobi_p(b, 2 * i as u32 + 1, 0, j)
        * (1.0 - b).powi(i as i32)
        * jacobi_p(c, 2 * (i + j) as u32 + 2, 0, k)
        * (1.0 - c).powi((i + j) as i32)
}

fn grad_mode_3d(a: f64, b: f64, c: f64, i: usize, j: usize, k: usize) -> (f64, f64, f64) {
    let fa = jacobi_p(a, 0, 0, i);
    let dfa = grad_jacobi_p(a, 0, 0, i);
    let gb = jacobi_p(b, 2 * i as u32 + 1, 0, j);
    let dgb = grad_jacobi_p(b, 2 * i as u32 + 1, 0, j);
    let hc = jacobi_p(c, 2 * (i + j) as u32 + 2, 0, k);
    let dhc = grad_jacobi_p(c, 2 * (i + j) as u32 + 2, 0, k);
    let (ii, ij) = (i as i32, (i + j) as i32);
    let hb = 0.5 * (1.0 - b);
    let gc = 0.5 * (1.0 - c);

    let mut dr = dfa * gb * hc;
    if i > 0 {
        dr *= hb.powi(ii - 1);
    }
    if i + j > 0 {
        dr *= gc.powi(ij - 1);
    }

    let mut ds = 0.5 * (1.0 + a) * dr;
    let mut tmp = dgb * hb.powi(ii);
    if i > 0 {
        tmp -= 0.5 * i as f64 * gb * hb.powi(ii - 1);
    }
    if i + j > 0 {
        tmp *= gc.powi(ij - 1);
    }
    tmp *= fa * hc;
    ds += tmp;

    let mut dt = 0.5 * (1.0 + a) * dr + 0.5 * (1.0 + b) * tmp;
    let mut tmp2 = dhc * gc.powi(ij);
    if i + j > 0 {
        tmp2 -= 0.5 * (i + j) as f64 * hc * gc.powi(ij - 1);
    }
    tmp2 *= fa * gb * hb.powi(ii);
    dt += tmp2;

    let scale = 2f64.powf(2.0 * i as f64 + j as f64 + 1.5);
    (scale * dr, scale * ds, scale * dt)
}

/// Mode index tuples (i, j, k) in canonical order; k = 0 in 2D.
pub fn mode_indices(dim: usize, n: usize) -> Vec<[usize; 3]> {
    let mut out = Vec::with_capacity(basis_dim(dim, n));
    for i in 0..=n {
        for j in 0..=(n - i) {
            if dim == 2 {
                out.push([i, j, 0]);
            } else {
                for k in 0..=(n - i - j) {
                    out.push([i, j, k]);
                }
            }
        }
    }
    out
}

fn inside_simplex(dim: usize, p: &Point, tol: f64) -> bool {
    match dim {
        2 => p[0] >= -1.0 - tol && p[1] >= -1.0 - tol && p[0] + p[1] <= tol,
        3 => {
            p[0] >= -1.0 - tol
                && p[1] >= -1.0 - tol
                && p[2] >= -1.0 - tol
                && p[0] + p[1] + p[2] <= -1.0 + tol
        }
        _ => false,
    }
}

/// Values and reference-coordinate gradients of the orthonormal basis.
pub struct BasisEval {
    /// v[(q, m)] = phi_m at point q
    pub v: DMatrix<f64>,
    /// grad[d][(q, m)] = d phi_m / d xhat_d at point q; grad[2] is zero in 2D
    pub grad: Vec<DMatrix<f64>>,
}

/// Evaluate the degree-N orthonormal basis and its gradients at `points`.
///
/// Points must lie inside the closed reference simplex (tolerance 1e-10).
pub fn eval_basis(dim: usize, n: usize, points: &[Point]) -> Result<BasisEval> {
    if dim != 2 && dim != 3 {
        return Err(Error::UnsupportedDim(dim));
    }
    for p in points {
        if !inside_simplex(dim, p, 1e-10) {
            return Err(Error::PointOutsideSimplex {
                x: p[0],
                y: p[1],
                z: p[2],
            });
        }
    }
    let modes = mode_indices(dim, n);
    let np = modes.len();
    let nq = points.len();
    let mut v = DMatrix::zeros(nq, np);
    let mut grad = vec![DMatrix::zeros(nq, np); 3];
    for (q, p) in points.iter().enumerate() {
        if dim == 2 {
            let (a, b) = collapsed_2d(p);
            for (m, &[i, j, _]) in modes.iter().enumerate() {
                v[(q, m)] = eval_mode_2d(a, b, i, j);
                let (dr, ds) = grad_mode_2d(a, b, i, j);
                grad[0][(q, m)] = dr;
                grad[1][(q, m)] = ds;
            }
        } else {
            let (a, b, c) = collapsed_3d(p);
            for (m, &[i, j, k]) in modes.iter().enumerate() {
                v[(q, m)] = eval_mode_3d(a, b, c, i, j, k);
                let (dr, ds, dt) = grad_mode_3d(a, b, c, i, j, k);
                grad[0][(q, m)] = dr;
                grad[1][(q, m)] = ds;
                grad[2][(q, m)] = dt;
            }
        }
    }
    Ok(BasisEval { v, grad })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::refelem::quadrature::simplex_quadrature;

    #[test]
    fn constant_mode_is_inverse_sqrt_measure() {
        let eval = eval_basis(2, 0, &[[-0.3, -0.5, 0.0]]).unwrap();
        assert!((eval.v[(0, 0)] - 1.0 / 2f64.sqrt()).abs() < 1e-14);
        let eval = eval_basis(3, 0, &[[-0.3, -0.5, -0.4]]).unwrap();
        assert!((eval.v[(0, 0)] - (3.0 / 4.0_f64).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn orthonormal_under_degree_2n_rule() {
        for dim in [2, 3] {
            for n in 0..=6 {
                let rule = simplex_quadrature(dim, 2 * n).unwrap();
                let eval = eval_basis(dim, n, &rule.points).unwrap();
                let np = basis_dim(dim, n);
                for p in 0..np {
                    for q in 0..np {
                        let s: f64 = (0..rule.len())
                            .map(|i| rule.weights[i] * eval.v[(i, p)] * eval.v[(i, q)])
                            .sum();
                        let expect = if p == q { 1.0 } else { 0.0 };
                        assert!(
                            (s - expect).abs() < 1e-12,
                            "dim={dim} n={n} ({p},{q}) -> {s}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn gradients_match_central_differences() {
        let eps = 1e-6;
        let pts2 = [[-0.4, -0.3, 0.0], [0.1, -0.6, 0.0], [-0.8, 0.5, 0.0]];
        for n in 1..=5 {
            let modes = mode_indices(2, n);
            for p in pts2 {
                let ev = eval_basis(2, n, &[p]).unwrap();
                for d in 0..2 {
                    let mut pp = p;
                    let mut pm = p;
                    pp[d] += eps;
                    pm[d] -= eps;
                    let vp = eval_basis(2, n, &[pp]).unwrap();
                    let vm = eval_basis(2, n, &[pm]).unwrap();
                    for m in 0..modes.len() {
                        let fd = (vp.v[(0, m)] - vm.v[(0, m)]) / (2.0 * eps);
                        let an = ev.grad[d][(0, m)];
                        assert!(
                            (fd - an).abs() < 5e-7 * (1.0 + an.abs()),
                            "2d n={n} mode {m} dir {d}: fd={fd} an={an}"
                        );
                    }
                }
            }
        }
        let pts3 = [[-0.5, -0.4, -0.3], [-0.2, -0.7, -0.35]];
        for n in 1..=4 {
            let modes = mode_indices(3, n);
            for p in pts3 {
                let ev = eval_basis(3, n, &[p]).unwrap();
                for d in 0..3 {
                    let mut pp = p;
                    let mut pm = p;
                    pp[d] += eps;
                    pm[d] -= eps;
                    let vp = eval_basis(3, n, &[pp]).unwrap();
                    let vm = eval_basis(3, n, &[pm]).unwrap();
                    for m in 0..modes.len() {
                        let fd = (vp.v[(0, m)] - vm.v[(0, m)]) / (2.0 * eps);
                        let an = ev.grad[d][(0, m)];
                        assert!(
                            (fd - an).abs() < 5e-7 * (1.0 + an.abs()),
                            "3d n={n} mode {m} dir {d}: fd={fd} an={an}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn outside_point_rejected() {
        assert!(eval_basis(2, 2, &[[0.5, 0.6, 0.0]]).is_err());
        assert!(eval_basis(3, 2, &[[0.0, 0.0, 0.0]]).is_err());
    }
}
