//! Interpolation node sets on the simplex.
//!
//! The default family places Gauss-Lobatto points along edges and blends
//! edge/face warps into the interior (alpha-optimized warp and blend). The
//! construction is symmetric under all vertex permutations, so face node
//! patterns coincide between neighboring elements of a watertight mesh.

use super::basis::{basis_dim, eval_basis, face_basis_dim};
use super::jacobi::gauss_lobatto;
use crate::{Error, Point, Result};
use nalgebra::{DMatrix, Matrix3, Vector3};

const ALPHA_2D: [f64; 15] = [
    0.0, 0.0, 1.4152, 0.1001, 0.2751, 0.9800, 1.0999, 1.2832, 1.3648, 1.4773, 1.4959, 1.5743,
    1.5770, 1.6223, 1.6258,
];
const ALPHA_3D: [f64; 15] = [
    0.0, 0.0, 0.0, 0.1002, 1.1332, 1.5608, 1.3413, 1.2577, 1.1603, 1.10153, 0.6080, 0.4523,
    0.8856, 0.8717, 0.9655,
];

/// Interpolation points with per-face index lists.
#[derive(Debug, Clone)]
pub struct NodeSet {
    pub dim: usize,
    pub degree: usize,
    pub nodes: Vec<Point>,
    pub face_node_ids: Vec<Vec<usize>>,
    /// Condition number of the nodal Vandermonde in the orthonormal basis.
    pub vandermonde_cond: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeFamily {
    WarpBlend,
    Equispaced,
}

/// 1D edge warp: interpolant of the Gauss-Lobatto minus equispaced
/// displacement with the endpoint factors deflated analytically.
struct EdgeWarp {
    xeq: Vec<f64>,
    disp: Vec<f64>,
}

impl EdgeWarp {
    fn new(p: usize) -> Self {
        let lgl = gauss_lobatto(p);
        let xeq: Vec<f64> = (0..=p).map(|i| -1.0 + 2.0 * i as f64 / p as f64).collect();
        let disp: Vec<f64> = lgl.iter().zip(&xeq).map(|(l, e)| l - e).collect();
        EdgeWarp { xeq, disp }
    }

    fn eval(&self, r: f64) -> f64 {
        let p = self.xeq.len() - 1;
        let mut warp = 0.0;
        for i in 1..p {
            let mut d = self.disp[i];
            for j in 1..p {
                if j != i {
                    d *= (r - self.xeq[j]) / (self.xeq[i] - self.xeq[j]);
                }
            }
            // deflated endpoint factors of the Lagrange basis
            d *= -1.0 / (self.xeq[i] - self.xeq[0]);
            d *= 1.0 / (self.xeq[i] - self.xeq[p]);
            warp += d;
        }
        warp
    }
}

fn barycentric_lattice(dim: usize, n: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    let nf = n as f64;
    if dim == 2 {
        for i in 0..=n {
            for j in 0..=(n - i) {
                // exact zeros matter for face membership
                out.push(vec![
                    (n - i - j) as f64 / nf,
                    i as f64 / nf,
                    j as f64 / nf,
                ]);
            }
        }
    } else {
        for i in 0..=n {
            for j in 0..=(n - i) {
                for k in 0..=(n - i - j) {
                    out.push(vec![
                        (n - i - j - k) as f64 / nf,
                        i as f64 / nf,
                        j as f64 / nf,
                        k as f64 / nf,
                    ]);
                }
            }
        }
    }
    out
}

/// In-plane warp field of a triangle with (possibly non-normalized)
/// barycentrics `l` and corner positions `verts`, scaled by `alpha`.
fn triangle_warp_3(
    warp: &EdgeWarp,
    alpha: f64,
    l: [f64; 3],
    verts: [Vector3<f64>; 3],
) -> Vector3<f64> {
    let mut shift = Vector3::zeros();
    for (p, q, o) in [(0usize, 1usize, 2usize), (1, 2, 0), (2, 0, 1)] {
        let r = l[q] - l[p];
        let w = 4.0 * l[p] * l[q] * warp.eval(r) * (1.0 + (alpha * l[o]).powi(2));
        shift += w * (verts[q] - verts[p]).normalize();
    }
    shift
}

fn warp_blend_2d(n: usize) -> Vec<Point> {
    let alpha = if n >= 1 && n <= 15 { ALPHA_2D[n - 1] } else { 5.0 / 3.0 };
    let warp = EdgeWarp::new(n);
    // equilateral triangle corners, indexed like the reference vertices
    let eq = [
        Vector3::new(-1.0, -1.0 / 3f64.sqrt(), 0.0),
        Vector3::new(1.0, -1.0 / 3f64.sqrt(), 0.0),
        Vector3::new(0.0, 2.0 / 3f64.sqrt(), 0.0),
    ];
    let refv = [
        Vector3::new(-1.0, -1.0, 0.0),
        Vector3::new(1.0, -1.0, 0.0),
        Vector3::new(-1.0, 1.0, 0.0),
    ];
    let inv = Matrix3::from_columns(&[eq[1] - eq[0], eq[2] - eq[0], Vector3::z()])
        .try_inverse()
        .unwrap();
    barycentric_lattice(2, n)
        .iter()
        .map(|l| {
            let mut p = l[0] * eq[0] + l[1] * eq[1] + l[2] * eq[2];
            p += triangle_warp_3(&warp, alpha, [l[0], l[1], l[2]], eq);
            let c = inv * (p - eq[0]);
            let lam = [1.0 - c[0] - c[1], c[0], c[1]];
            let r = lam[0] * refv[0] + lam[1] * refv[1] + lam[2] * refv[2];
            [r[0], r[1], 0.0]
        })
        .collect()
}

fn warp_blend_3d(n: usize) -> Vec<Point> {
    let alpha = if n >= 1 && n <= 15 { ALPHA_3D[n - 1] } else { 1.0 };
    let warp = EdgeWarp::new(n);
    let eq = [
        Vector3::new(-1.0, -1.0 / 3f64.sqrt(), -1.0 / 6f64.sqrt()),
        Vector3::new(1.0, -1.0 / 3f64.sqrt(), -1.0 / 6f64.sqrt()),
        Vector3::new(0.0, 2.0 / 3f64.sqrt(), -1.0 / 6f64.sqrt()),
        Vector3::new(0.0, 0.0, 3.0 / 6f64.sqrt()),
    ];
    let refv = [
        Vector3::new(-1.0, -1.0, -1.0),
        Vector3::new(1.0, -1.0, -1.0),
        Vector3::new(-1.0, 1.0, -1.0),
        Vector3::new(-1.0, -1.0, 1.0),
    ];
    // (opposite vertex, face vertices)
    let faces = [
        (3usize, [0usize, 1, 2]),
        (2, [0, 1, 3]),
        (0, [1, 2, 3]),
        (1, [0, 2, 3]),
    ];
    let inv = Matrix3::from_columns(&[eq[1] - eq[0], eq[2] - eq[0], eq[3] - eq[0]])
        .try_inverse()
        .unwrap();
    let tol = 1e-10;
    barycentric_lattice(3, n)
        .iter()
        .map(|l| {
            let mut p = (0..4).map(|i| l[i] * eq[i]).sum::<Vector3<f64>>();
            let mut shift = Vector3::zeros();
            let mut edge_shift: Option<Vector3<f64>> = None;
            for &(a, [b, c, d]) in &faces {
                let la = l[a];
                let (lb, lc, ld) = (l[b], l[c], l[d]);
                let face_warp = triangle_warp_3(
                    &warp,
                    alpha,
                    [lb, lc, ld],
                    [eq[b], eq[c], eq[d]],
                );
                let denom = (lb + 0.5 * la) * (lc + 0.5 * la) * (ld + 0.5 * la);
                if denom > tol {
                    let blend = lb * lc * ld * (1.0 + (alpha * la).powi(2)) / denom;
                    shift += blend * face_warp;
                }
                if la < tol && (lb < tol || lc < tol || ld < tol) {
                    edge_shift = Some(face_warp);
                }
            }
            p += edge_shift.unwrap_or(shift);
            let c = inv * (p - eq[0]);
            let lam = [1.0 - c[0] - c[1] - c[2], c[0], c[1], c[2]];
            let r: Vector3<f64> = (0..4).map(|i| lam[i] * refv[i]).sum();
            [r[0], r[1], r[2]]
        })
        .collect()
}

fn equispaced(dim: usize, n: usize) -> Vec<Point> {
    let refv2 = [[-1.0, -1.0, 0.0], [1.0, -1.0, 0.0], [-1.0, 1.0, 0.0]];
    let refv3 = [
        [-1.0, -1.0, -1.0],
        [1.0, -1.0, -1.0],
        [-1.0, 1.0, -1.0],
        [-1.0, -1.0, 1.0],
    ];
    barycentric_lattice(dim, n)
        .iter()
        .map(|l| {
            let refv: &[[f64; 3]] = if dim == 2 { &refv2 } else { &refv3 };
            let mut p = [0.0; 3];
            for (lam, v) in l.iter().zip(refv) {
                for d in 0..3 {
                    p[d] += lam * v[d];
                }
            }
            p
        })
        .collect()
}

/// Per-face node index lists from the lattice structure (a node is on face f
/// when the barycentric of the opposite vertex vanishes).
fn face_ids(dim: usize, n: usize) -> Vec<Vec<usize>> {
    let lattice = barycentric_lattice(dim, n);
    // opposite-vertex index per face, matching ReferenceElement face order
    let opp: &[usize] = if dim == 2 { &[2, 0, 1] } else { &[3, 2, 0, 1] };
    opp.iter()
        .map(|&a| {
            lattice
                .iter()
                .enumerate()
                .filter(|(_, l)| l[a] == 0.0)
                .map(|(i, _)| i)
                .collect()
        })
        .collect()
}

/// Raw node constructor for the warp-and-blend family, degrees 1..=15.
pub fn warp_blend_nodes(dim: usize, n: usize) -> Result<NodeSet> {
    if dim != 2 && dim != 3 {
        return Err(Error::UnsupportedDim(dim));
    }
    if n < 1 || n > 15 {
        return Err(Error::DegreeOutOfRange {
            what: "warp-and-blend nodes",
            degree: n,
            min: 1,
            max: 15,
        });
    }
    let nodes = if dim == 2 { warp_blend_2d(n) } else { warp_blend_3d(n) };
    finish_node_set(dim, n, nodes)
}

fn finish_node_set(dim: usize, n: usize, nodes: Vec<Point>) -> Result<NodeSet> {
    debug_assert_eq!(nodes.len(), basis_dim(dim, n));
    let eval = eval_basis(dim, n, &nodes)?;
    let svd = eval.v.clone().svd(false, false);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smin <= 0.0 || !smin.is_finite() {
        return Err(Error::Geometry(format!(
            "interpolation Vandermonde singular for dim {dim}, degree {n}"
        )));
    }
    Ok(NodeSet {
        dim,
        degree: n,
        nodes,
        face_node_ids: face_ids(dim, n),
        vandermonde_cond: smax / smin,
    })
}

/// Interpolation node set for degree N (warp-and-blend family).
pub fn interpolation_nodes(dim: usize, n: usize) -> Result<NodeSet> {
    interpolation_nodes_with(dim, n, NodeFamily::WarpBlend)
}

pub fn interpolation_nodes_with(dim: usize, n: usize, family: NodeFamily) -> Result<NodeSet> {
    if n < 1 || n > 9 {
        return Err(Error::DegreeOutOfRange {
            what: "interpolation nodes",
            degree: n,
            min: 1,
            max: 9,
        });
    }
    match family {
        NodeFamily::WarpBlend => warp_blend_nodes(dim, n),
        NodeFamily::Equispaced => {
            if n > 4 {
                return Err(Error::DegreeOutOfRange {
                    what: "equispaced nodes",
                    degree: n,
                    min: 1,
                    max: 4,
                });
            }
            finish_node_set(dim, n, equispaced(dim, n))
        }
    }
}

impl NodeSet {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes_per_face(&self) -> usize {
        face_basis_dim(self.dim, self.degree)
    }

    /// Interpolation matrix from these nodes to arbitrary points:
    /// rows are Lagrange basis values.
    pub fn interp_to(&self, points: &[Point]) -> Result<DMatrix<f64>> {
        let vn = eval_basis(self.dim, self.degree, &self.nodes)?.v;
        let vp = eval_basis(self.dim, self.degree, points)?.v;
        // X = V_p V_n^{-1}, via V_n^T X^T = V_p^T
        let sol = vn
            .transpose()
            .lu()
            .solve(&vp.transpose())
            .ok_or_else(|| Error::Geometry("singular nodal Vandermonde".into()))?;
        Ok(sol.transpose())
    }
}
