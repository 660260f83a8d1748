//! Reference simplices, orthonormal bases, interpolation nodes, and
//! quadrature rules.

pub mod basis;
pub mod jacobi;
pub mod nodes;
pub mod quadrature;

pub use basis::{basis_dim, eval_basis, face_basis_dim, mode_indices, BasisEval};
pub use nodes::{interpolation_nodes, interpolation_nodes_with, warp_blend_nodes, NodeFamily, NodeSet};
pub use quadrature::{face_quadrature, monomial_integral, simplex_quadrature, QuadratureRule};

use crate::{Error, Point, Result};

/// Bi-unit reference simplex with face bookkeeping.
#[derive(Debug, Clone)]
pub struct ReferenceElement {
    pub dim: usize,
    pub vertices: Vec<Point>,
    /// Vertex index tuples per face; the order fixes the face parametrization.
    pub faces: Vec<Vec<usize>>,
    /// Unit outward normal per face (constant; faces are planar).
    pub ref_normals: Vec<Point>,
    /// Scaling from the reference face domain to the element face.
    pub ref_face_jacobian: Vec<f64>,
}

impl ReferenceElement {
    pub fn new(dim: usize) -> Result<Self> {
        match dim {
            2 => Ok(Self::triangle()),
            3 => Ok(Self::tetrahedron()),
            _ => Err(Error::UnsupportedDim(dim)),
        }
    }

    pub fn triangle() -> Self {
        let s = 1.0 / 2f64.sqrt();
        ReferenceElement {
            dim: 2,
            vertices: vec![[-1.0, -1.0, 0.0], [1.0, -1.0, 0.0], [-1.0, 1.0, 0.0]],
            faces: vec![vec![0, 1], vec![1, 2], vec![2, 0]],
            ref_normals: vec![[0.0, -1.0, 0.0], [s, s, 0.0], [-1.0, 0.0, 0.0]],
            ref_face_jacobian: vec![1.0, 2f64.sqrt(), 1.0],
        }
    }

    pub fn tetrahedron() -> Self {
        let s = 1.0 / 3f64.sqrt();
        ReferenceElement {
            dim: 3,
            vertices: vec![
                [-1.0, -1.0, -1.0],
                [1.0, -1.0, -1.0],
                [-1.0, 1.0, -1.0],
                [-1.0, -1.0, 1.0],
            ],
            faces: vec![vec![0, 1, 2], vec![0, 1, 3], vec![1, 2, 3], vec![0, 2, 3]],
            ref_normals: vec![
                [0.0, 0.0, -1.0],
                [0.0, -1.0, 0.0],
                [s, s, s],
                [-1.0, 0.0, 0.0],
            ],
            ref_face_jacobian: vec![1.0, 1.0, 3f64.sqrt(), 1.0],
        }
    }

    pub fn measure(&self) -> f64 {
        if self.dim == 2 {
            2.0
        } else {
            4.0 / 3.0
        }
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    /// Map points from the reference face domain onto face `f`.
    pub fn map_to_face(&self, f: usize, face_points: &[Point]) -> Vec<Point> {
        let fv = &self.faces[f];
        face_points
            .iter()
            .map(|p| {
                let mut out = [0.0; 3];
                let lams: Vec<f64> = if self.dim == 2 {
                    vec![(1.0 - p[0]) / 2.0, (1.0 + p[0]) / 2.0]
                } else {
                    let l1 = (p[0] + 1.0) / 2.0;
                    let l2 = (p[1] + 1.0) / 2.0;
                    vec![1.0 - l1 - l2, l1, l2]
                };
                for (lam, &vi) in lams.iter().zip(fv) {
                    for d in 0..3 {
                        out[d] += lam * self.vertices[vi][d];
                    }
                }
                out
            })
            .collect()
    }
}
