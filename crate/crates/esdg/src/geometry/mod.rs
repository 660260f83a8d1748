//! Meshes, curvilinear node placement, connectivity, and geometric factors.
//!
//! Mesh topology (vertices, adjacency, periodic pairing) is built on the
//! unwarped vertex skeleton; warps act only on the high-order nodal
//! positions, which keeps shared faces coincident pointwise.

pub mod boxmesh;
pub mod gmsh;
pub mod warp;

pub use boxmesh::{box_cells, jitter_interior, tri_lattice_cells, CellMesh};
pub use warp::Warp;

use crate::operators::ReferenceOperators;
use crate::refelem::{eval_basis, warp_blend_nodes, NodeSet, ReferenceElement};
use crate::{Error, Point, Result};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use std::collections::HashMap;
use std::path::Path;

#[derive(Debug, Clone, PartialEq)]
pub enum FaceLink {
    Interior {
        elem: usize,
        face: usize,
        /// Translation added to our points to land on the partner's points
        /// (nonzero only across periodic boundaries).
        shift: [f64; 3],
    },
    Boundary,
}

#[derive(Debug, Clone)]
pub struct Mesh {
    pub dim: usize,
    pub degree: usize,
    /// Unwarped vertex skeleton, used for adjacency and periodic pairing.
    pub vertices: Vec<Point>,
    pub elements: Vec<Vec<usize>>,
    pub node_set: NodeSet,
    /// High-order node coordinates per element (warped when curved).
    pub nodes: Vec<Vec<Point>>,
    /// Face adjacency per element; empty until `build_connectivity`.
    pub links: Vec<Vec<FaceLink>>,
}

fn ref_barycentric(dim: usize, p: &Point) -> Vec<f64> {
    if dim == 2 {
        let l1 = (p[0] + 1.0) / 2.0;
        let l2 = (p[1] + 1.0) / 2.0;
        vec![1.0 - l1 - l2, l1, l2]
    } else {
        let l1 = (p[0] + 1.0) / 2.0;
        let l2 = (p[1] + 1.0) / 2.0;
        let l3 = (p[2] + 1.0) / 2.0;
        vec![1.0 - l1 - l2 - l3, l1, l2, l3]
    }
}

impl Mesh {
    pub fn from_cells(dim: usize, cells: CellMesh, degree: usize) -> Result<Mesh> {
        let node_set = warp_blend_nodes(dim, degree)?;
        let barys: Vec<Vec<f64>> = node_set
            .nodes
            .iter()
            .map(|p| ref_barycentric(dim, p))
            .collect();
        let nodes: Vec<Vec<Point>> = cells
            .elements
            .iter()
            .map(|ev| {
                barys
                    .iter()
                    .map(|lam| {
                        let mut x = [0.0; 3];
                        for (l, &vi) in lam.iter().zip(ev) {
                            for d in 0..3 {
                                x[d] += l * cells.vertices[vi][d];
                            }
                        }
                        x
                    })
                    .collect()
            })
            .collect();
        Ok(Mesh {
            dim,
            degree,
            vertices: cells.vertices,
            elements: cells.elements,
            node_set,
            nodes,
            links: Vec::new(),
        })
    }

    pub fn generate_box(
        dim: usize,
        extents: &[[f64; 2]],
        cells: &[usize],
        degree: usize,
    ) -> Result<Mesh> {
        Mesh::from_cells(dim, box_cells(dim, extents, cells)?, degree)
    }

    pub fn load_msh(path: &Path, degree: usize) -> Result<Mesh> {
        let (dim, cells) = gmsh::read_msh(path)?;
        Mesh::from_cells(dim, cells, degree)
    }

    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }

    /// Warp all high-order nodal positions.
    pub fn curve(&mut self, warp: &Warp) {
        for en in self.nodes.iter_mut() {
            for p in en.iter_mut() {
                *p = warp.apply(*p);
            }
        }
    }

    fn refelem(&self) -> ReferenceElement {
        ReferenceElement::new(self.dim).unwrap()
    }

    pub fn bounding_box(&self) -> [[f64; 2]; 3] {
        let mut bb = [[f64::INFINITY, f64::NEG_INFINITY]; 3];
        for v in &self.vertices {
            for d in 0..3 {
                bb[d][0] = bb[d][0].min(v[d]);
                bb[d][1] = bb[d][1].max(v[d]);
            }
        }
        bb
    }

    /// Build face adjacency. `periodic[axis] = true` pairs opposite boundary
    /// faces across that axis of the bounding box.
    pub fn build_connectivity(&mut self, periodic: &[bool]) -> Result<()> {
        let re = self.refelem();
        let nfaces = re.num_faces();
        let mut links = vec![vec![FaceLink::Boundary; nfaces]; self.num_elements()];

        let mut open: HashMap<Vec<usize>, (usize, usize)> = HashMap::new();
        for (e, ev) in self.elements.iter().enumerate() {
            for (f, fv) in re.faces.iter().enumerate() {
                let mut key: Vec<usize> = fv.iter().map(|&i| ev[i]).collect();
                key.sort_unstable();
                if let Some((e2, f2)) = open.remove(&key) {
                    if matches!(links[e2][f2], FaceLink::Interior { .. }) {
                        return Err(Error::Mesh(format!(
                            "face {key:?} shared by more than two elements"
                        )));
                    }
                    links[e][f] = FaceLink::Interior {
                        elem: e2,
                        face: f2,
                        shift: [0.0; 3],
                    };
                    links[e2][f2] = FaceLink::Interior {
                        elem: e,
                        face: f,
                        shift: [0.0; 3],
                    };
                } else if open.insert(key.clone(), (e, f)).is_some() {
                    return Err(Error::Mesh(format!(
                        "face {key:?} shared by more than two elements"
                    )));
                }
            }
        }

        // periodic pairing of the remaining boundary faces
        let bb = self.bounding_box();
        let diam: f64 = (0..self.dim)
            .map(|d| bb[d][1] - bb[d][0])
            .fold(0.0, f64::max);
        let tol = 1e-8 * diam;
        let centroid = |e: usize, f: usize| -> Point {
            let fv = &re.faces[f];
            let mut c = [0.0; 3];
            for &i in fv {
                let v = self.vertices[self.elements[e][i]];
                for d in 0..3 {
                    c[d] += v[d] / fv.len() as f64;
                }
            }
            c
        };

        for axis in 0..self.dim {
            if !periodic.get(axis).copied().unwrap_or(false) {
                continue;
            }
            let period = bb[axis][1] - bb[axis][0];
            let mut low = Vec::new();
            let mut high = Vec::new();
            for (&ref key, &(e, f)) in open.iter() {
                let _ = key;
                let c = centroid(e, f);
                if (c[axis] - bb[axis][0]).abs() < tol {
                    low.push((e, f, c));
                } else if (c[axis] - bb[axis][1]).abs() < tol {
                    high.push((e, f, c));
                }
            }
            if low.len() != high.len() {
                return Err(Error::Mesh(format!(
                    "periodic axis {axis}: {} low faces vs {} high faces",
                    low.len(),
                    high.len()
                )));
            }
            for (e, f, c) in &low {
                let mut shifted = *c;
                shifted[axis] += period;
                let partner = high.iter().find(|(_, _, c2)| {
                    (0..self.dim).all(|d| (c2[d] - shifted[d]).abs() < tol)
                });
                let Some((e2, f2, _)) = partner else {
                    return Err(Error::Mesh(format!(
                        "periodic axis {axis}: no partner for face of element {e}"
                    )));
                };
                let mut shift = [0.0; 3];
                shift[axis] = period;
                links[*e][*f] = FaceLink::Interior {
                    elem: *e2,
                    face: *f2,
                    shift,
                };
                let mut back = [0.0; 3];
                back[axis] = -period;
                links[*e2][*f2] = FaceLink::Interior {
                    elem: *e,
                    face: *f,
                    shift: back,
                };
            }
            // both sides are now linked; drop them from the open set
            open.retain(|_, &mut (e, f)| !matches!(links[e][f], FaceLink::Interior { .. }));
        }

        self.links = links;
        Ok(())
    }

    pub fn is_closed(&self) -> bool {
        !self.links.is_empty()
            && self
                .links
                .iter()
                .all(|lf| lf.iter().all(|l| matches!(l, FaceLink::Interior { .. })))
    }

    /// Max distance between matched face nodes across all interior faces
    /// (watertightness of the warped nodal skeleton).
    pub fn max_face_node_mismatch(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (e, lf) in self.links.iter().enumerate() {
            for (f, link) in lf.iter().enumerate() {
                let FaceLink::Interior { elem, face, shift } = link else {
                    continue;
                };
                let mine = &self.node_set.face_node_ids[f];
                let theirs = &self.node_set.face_node_ids[*face];
                for &ni in mine {
                    let mut p = self.nodes[e][ni];
                    for d in 0..3 {
                        p[d] += shift[d];
                    }
                    let best = theirs
                        .iter()
                        .map(|&nj| {
                            let q = self.nodes[*elem][nj];
                            (0..3)
                                .map(|d| (p[d] - q[d]).powi(2))
                                .sum::<f64>()
                                .sqrt()
                        })
                        .fold(f64::INFINITY, f64::min);
                    worst = worst.max(best);
                }
            }
        }
        worst
    }
}

/// Interpolation machinery between degree-N and degree-(N+1) node sets,
/// with nodal differentiation at both degrees.
pub struct InterpOperators {
    pub degree: usize,
    pub nodes_n: NodeSet,
    pub nodes_np1: NodeSet,
    pub v_n_to_np1: DMatrix<f64>,
    pub v_np1_to_n: DMatrix<f64>,
    pub d_n: Vec<DMatrix<f64>>,
    pub d_np1: Vec<DMatrix<f64>>,
}

fn nodal_diff(dim: usize, ns: &NodeSet) -> Result<Vec<DMatrix<f64>>> {
    let be = eval_basis(dim, ns.degree, &ns.nodes)?;
    let lu = be.v.transpose().lu();
    (0..dim)
        .map(|d| {
            let sol = lu
                .solve(&be.grad[d].transpose())
                .ok_or_else(|| Error::Geometry("singular nodal Vandermonde".into()))?;
            Ok(sol.transpose())
        })
        .collect()
}

pub fn build_interp_operators(dim: usize, degree: usize) -> Result<InterpOperators> {
    let nodes_n = warp_blend_nodes(dim, degree)?;
    let nodes_np1 = warp_blend_nodes(dim, degree + 1)?;
    let v_n_to_np1 = nodes_n.interp_to(&nodes_np1.nodes)?;
    let v_np1_to_n = nodes_np1.interp_to(&nodes_n.nodes)?;
    let d_n = nodal_diff(dim, &nodes_n)?;
    let d_np1 = nodal_diff(dim, &nodes_np1)?;
    Ok(InterpOperators {
        degree,
        nodes_n,
        nodes_np1,
        v_n_to_np1,
        v_np1_to_n,
        d_n,
        d_np1,
    })
}

/// How the scaled metric terms G are constructed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricMode {
    /// Cross-product/cofactor form evaluated at quadrature points. Exact and
    /// GCL-satisfying in 2D (metrics are degree-N polynomials); violates the
    /// discrete GCL on curved 3D meshes.
    Exact,
    /// Conservative-curl form with degree-N interpolation.
    CurlN,
    /// Conservative-curl form through degree-(N+1) interpolation, read back
    /// at degree N.
    CurlNp1,
}

impl MetricMode {
    pub fn default_for(dim: usize) -> MetricMode {
        if dim == 2 {
            MetricMode::Exact
        } else {
            MetricMode::CurlNp1
        }
    }

    pub fn parse(s: &str) -> Result<MetricMode> {
        Ok(match s {
            "exact" => MetricMode::Exact,
            "curl_n" => MetricMode::CurlN,
            "curl_np1" => MetricMode::CurlNp1,
            _ => return Err(Error::Config(format!("unknown metric mode '{s}'"))),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            MetricMode::Exact => "exact",
            MetricMode::CurlN => "curl_n",
            MetricMode::CurlNp1 => "curl_np1",
        }
    }
}

/// Per-element geometric data at volume + surface quadrature points.
#[derive(Debug, Clone)]
pub struct ElementGeometry {
    /// Physical coordinates of the stacked quadrature points.
    pub x_all: Vec<Point>,
    /// Mapping Jacobian determinant at all points (exact isoparametric map).
    pub j_all: DVector<f64>,
    /// Scaled geometric factors g[i][j] at all points.
    pub g: Vec<Vec<DVector<f64>>>,
    /// Scaled outward normals n_i J_f at surface points.
    pub njf: Vec<DVector<f64>>,
    /// Face Jacobian factor |n J_f| at surface points.
    pub jf: DVector<f64>,
    /// Unit outward normals at surface points.
    pub n_unit: Vec<DVector<f64>>,
    pub h_k: f64,
    pub min_j: f64,
    /// Relative residual of the discrete GCL for this element.
    pub gcl_residual: f64,
}

/// Mesh-wide geometry: per-element factors plus the interface point
/// permutations.
pub struct MeshGeometry {
    pub mode: MetricMode,
    pub elements: Vec<ElementGeometry>,
    /// exchange[e][f] = (partner elem, partner face, perm) where
    /// partner_surface_point[perm[i]] coincides with our i-th face point.
    pub exchange: Vec<Vec<Option<(usize, usize, Vec<usize>)>>>,
    pub h_max: f64,
}

/// Nodal-to-quadrature evaluation operators for the isoparametric map.
struct GeomEval {
    /// nodes -> stacked quadrature points
    interp_all: DMatrix<f64>,
    /// nodal derivative -> stacked quadrature points, per direction
    dinterp_all: Vec<DMatrix<f64>>,
}

fn build_geom_eval(ops: &ReferenceOperators, ns: &NodeSet) -> Result<GeomEval> {
    let mut all_pts = ops.vol_rule.points.clone();
    all_pts.extend_from_slice(&ops.face_points);
    let be_pts = eval_basis(ops.dim, ns.degree, &all_pts)?;
    let be_nodes = eval_basis(ops.dim, ns.degree, &ns.nodes)?;
    let lu = be_nodes.v.transpose().lu();
    let solve = |rhs: &DMatrix<f64>| -> Result<DMatrix<f64>> {
        let sol = lu
            .solve(&rhs.transpose())
            .ok_or_else(|| Error::Geometry("singular nodal Vandermonde".into()))?;
        Ok(sol.transpose())
    };
    Ok(GeomEval {
        interp_all: solve(&be_pts.v)?,
        dinterp_all: (0..ops.dim)
            .map(|d| solve(&be_pts.grad[d]))
            .collect::<Result<Vec<_>>>()?,
    })
}

fn det2(a: &[[f64; 3]; 3]) -> f64 {
    a[0][0] * a[1][1] - a[0][1] * a[1][0]
}

fn det3(a: &[[f64; 3]; 3]) -> f64 {
    a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
        - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
}

fn element_geometry(
    mesh: &Mesh,
    ops: &ReferenceOperators,
    ge: &GeomEval,
    interp: Option<&InterpOperators>,
    mode: MetricMode,
    e: usize,
) -> Result<ElementGeometry> {
    let dim = mesh.dim;
    let n_all = ops.n_q + ops.n_fq_total;
    let np_nodes = mesh.node_set.len();

    // nodal coordinates as vectors per physical direction
    let xn: Vec<DVector<f64>> = (0..dim)
        .map(|i| DVector::from_fn(np_nodes, |n, _| mesh.nodes[e][n][i]))
        .collect();

    let x_all: Vec<Point> = {
        let xs: Vec<DVector<f64>> = (0..dim).map(|i| &ge.interp_all * &xn[i]).collect();
        (0..n_all)
            .map(|q| {
                let mut p = [0.0; 3];
                for i in 0..dim {
                    p[i] = xs[i][q];
                }
                p
            })
            .collect()
    };

    // mapping derivatives A[i][j] = dx_i/dxhat_j at all points
    let da: Vec<Vec<DVector<f64>>> = (0..dim)
        .map(|i| (0..dim).map(|j| &ge.dinterp_all[j] * &xn[i]).collect())
        .collect();

    let mut j_all = DVector::zeros(n_all);
    for q in 0..n_all {
        let mut a = [[0.0; 3]; 3];
        for i in 0..dim {
            for j in 0..dim {
                a[i][j] = da[i][j][q];
            }
        }
        let j = if dim == 2 { det2(&a) } else { det3(&a) };
        if j <= 0.0 {
            return Err(Error::NonpositiveJacobian { element: e, j });
        }
        j_all[q] = j;
    }

    // scaled geometric factors
    let g: Vec<Vec<DVector<f64>>> = match (dim, mode) {
        (2, MetricMode::Exact) => {
            // cofactor of the 2x2 mapping derivative
            let g00 = da[1][1].clone();
            let g01 = -da[1][0].clone();
            let g10 = -da[0][1].clone();
            let g11 = da[0][0].clone();
            vec![vec![g00, g01], vec![g10, g11]]
        }
        (2, _) => {
            return Err(Error::Geometry(
                "curl metric construction applies to 3D meshes; 2D metrics are exact".into(),
            ))
        }
        (3, MetricMode::Exact) => {
            // column i of G = cross of mapping-derivative columns j, k
            let mut g = vec![vec![DVector::zeros(n_all); 3]; 3];
            for q in 0..n_all {
                let col = |j: usize| [da[0][j][q], da[1][j][q], da[2][j][q]];
                for i in 0..3 {
                    let (j, k) = ((i + 1) % 3, (i + 2) % 3);
                    let (u, v) = (col(j), col(k));
                    g[0][i][q] = u[1] * v[2] - u[2] * v[1];
                    g[1][i][q] = u[2] * v[0] - u[0] * v[2];
                    g[2][i][q] = u[0] * v[1] - u[1] * v[0];
                }
            }
            g
        }
        (3, curl) => {
            let io = interp.expect("interp operators required for curl metrics");
            let (d, xv): (&Vec<DMatrix<f64>>, Vec<DVector<f64>>) =
                if curl == MetricMode::CurlNp1 {
                    let xv = (0..3).map(|i| &io.v_n_to_np1 * &xn[i]).collect();
                    (&io.d_np1, xv)
                } else {
                    (&io.d_n, xn.clone())
                };
            // rowcurl(p, q)_c for the field (grad x_p) * x_q
            let rowcurl = |p: usize, qi: usize| -> [DVector<f64>; 3] {
                let dp: Vec<DVector<f64>> = (0..3).map(|j| &d[j] * &xv[p]).collect();
                let prod = |j: usize| -> DVector<f64> { dp[j].component_mul(&xv[qi]) };
                let t = [prod(0), prod(1), prod(2)];
                [
                    &d[2] * &t[1] - &d[1] * &t[2],
                    &d[0] * &t[2] - &d[2] * &t[0],
                    &d[1] * &t[0] - &d[0] * &t[1],
                ]
            };
            let rows = [
                (1usize, 2usize, 1.0f64),
                (0, 2, -1.0),
                (1, 0, -1.0),
            ];
            let mut g = vec![vec![DVector::zeros(n_all); 3]; 3];
            for (m, &(p, qi, sign)) in rows.iter().enumerate() {
                let rc = rowcurl(p, qi);
                for i in 0..3 {
                    let nodal_n = if curl == MetricMode::CurlNp1 {
                        &io.v_np1_to_n * &rc[i]
                    } else {
                        rc[i].clone()
                    };
                    g[m][i] = sign * (&ge.interp_all * nodal_n);
                }
            }
            g
        }
        _ => unreachable!(),
    };

    // scaled normals from the metric traces
    let nf = ops.n_fq_total;
    let mut njf = vec![DVector::zeros(nf); dim];
    for i in 0..dim {
        for a in 0..nf {
            let mut s = 0.0;
            for j in 0..dim {
                s += g[i][j][ops.n_q + a] * ops.nhat_jhat[j][a];
            }
            njf[i][a] = s;
        }
    }
    let jf = DVector::from_fn(nf, |a, _| {
        (0..dim).map(|i| njf[i][a] * njf[i][a]).sum::<f64>().sqrt()
    });
    let n_unit: Vec<DVector<f64>> = (0..dim)
        .map(|i| DVector::from_fn(nf, |a, _| njf[i][a] / jf[a]))
        .collect();

    // discrete GCL residual, relative to the metric magnitude
    let mut gcl_abs: f64 = 0.0;
    let mut gmax: f64 = 0.0;
    for i in 0..dim {
        let mut resid = DVector::zeros(n_all);
        for j in 0..dim {
            resid += ops.apply_dn(j, &g[i][j]);
            gmax = gmax.max(g[i][j].amax());
        }
        gcl_abs = gcl_abs.max(resid.amax());
    }
    let gcl_residual = gcl_abs / gmax.max(1e-300);

    let h_k = (0..nf)
        .map(|a| j_all[ops.n_q + a] / jf[a])
        .fold(0.0f64, f64::max);
    let min_j = j_all.min();

    Ok(ElementGeometry {
        x_all,
        j_all,
        g,
        njf,
        jf,
        n_unit,
        h_k,
        min_j,
        gcl_residual,
    })
}

/// Build per-element geometric factors plus interface point permutations.
pub fn geometric_factors(
    mesh: &Mesh,
    ops: &ReferenceOperators,
    mode: MetricMode,
) -> Result<MeshGeometry> {
    if mesh.degree != ops.degree || mesh.dim != ops.dim {
        return Err(Error::Geometry(
            "mesh and operators disagree on (dim, degree)".into(),
        ));
    }
    let ge = build_geom_eval(ops, &mesh.node_set)?;
    let interp = if mesh.dim == 3 && mode != MetricMode::Exact {
        Some(build_interp_operators(mesh.dim, mesh.degree)?)
    } else {
        None
    };

    let elements: Vec<ElementGeometry> = (0..mesh.num_elements())
        .into_par_iter()
        .map(|e| element_geometry(mesh, ops, &ge, interp.as_ref(), mode, e))
        .collect::<Result<Vec<_>>>()?;

    // GCL must hold by construction in curl modes; a large residual means
    // face nodes do not match across elements
    if mode != MetricMode::Exact || mesh.dim == 2 {
        for (e, el) in elements.iter().enumerate() {
            if el.gcl_residual > 1e-8 {
                return Err(Error::Geometry(format!(
                    "discrete GCL residual {:.2e} in element {e}",
                    el.gcl_residual
                )));
            }
        }
    }

    let exchange = build_exchange(mesh, ops, &elements)?;
    let h_max = elements.iter().map(|e| e.h_k).fold(0.0f64, f64::max);
    Ok(MeshGeometry {
        mode,
        elements,
        exchange,
        h_max,
    })
}

fn build_exchange(
    mesh: &Mesh,
    ops: &ReferenceOperators,
    elements: &[ElementGeometry],
) -> Result<Vec<Vec<Option<(usize, usize, Vec<usize>)>>>> {
    if mesh.links.is_empty() {
        return Ok(vec![Vec::new(); mesh.num_elements()]);
    }
    let nfq = ops.n_fq;
    let mut exchange = Vec::with_capacity(mesh.num_elements());
    for (e, lf) in mesh.links.iter().enumerate() {
        let mut per_face = Vec::with_capacity(lf.len());
        for (f, link) in lf.iter().enumerate() {
            let FaceLink::Interior { elem, face, shift } = link else {
                per_face.push(None);
                continue;
            };
            let my0 = ops.n_q + f * nfq;
            let th0 = ops.n_q + face * nfq;
            // face diameter scale for the matching tolerance
            let scale = (0..nfq)
                .map(|i| {
                    let p = elements[e].x_all[my0 + i];
                    let q = elements[e].x_all[my0];
                    ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2)).sqrt()
                })
                .fold(0.0f64, f64::max)
                .max(1e-12);
            let tol = 1e-8 * scale;
            let mut perm = Vec::with_capacity(nfq);
            for i in 0..nfq {
                let mut p = elements[e].x_all[my0 + i];
                for d in 0..3 {
                    p[d] += shift[d];
                }
                let mut best = (f64::INFINITY, usize::MAX);
                for jj in 0..nfq {
                    let q = elements[*elem].x_all[th0 + jj];
                    let d2 = (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2);
                    if d2 < best.0 {
                        best = (d2, jj);
                    }
                }
                if best.0.sqrt() > tol {
                    return Err(Error::Geometry(format!(
                        "face quadrature points of elements {e}/{elem} do not match \
                         (distance {:.3e}, face scale {:.3e})",
                        best.0.sqrt(),
                        scale
                    )));
                }
                perm.push(best.1);
            }
            // permutation must be a bijection
            let mut seen = vec![false; nfq];
            for &p in &perm {
                if seen[p] {
                    return Err(Error::Geometry(format!(
                        "degenerate face point matching between elements {e} and {elem}"
                    )));
                }
                seen[p] = true;
            }
            per_face.push(Some((*elem, *face, perm)));
        }
        exchange.push(per_face);
    }
    Ok(exchange)
}

/// Largest h_k over the mesh (the J/J_f estimator).
pub fn mesh_size(geo: &MeshGeometry) -> f64 {
    geo.h_max
}

#[derive(Debug, Clone)]
pub struct GeometryReport {
    pub gcl_residual: f64,
    pub normal_opposition: f64,
    pub watertight: f64,
    pub min_j: f64,
    pub h: f64,
    /// (element id, gcl residual, min J, h_k)
    pub per_element: Vec<(usize, f64, f64, f64)>,
}

impl GeometryReport {
    pub fn ok(&self, tol: f64) -> bool {
        self.gcl_residual < tol && self.normal_opposition < tol && self.watertight < tol && self.min_j > 0.0
    }
}

/// Check GCL residuals, pointwise opposition of scaled normals across
/// interior faces, and watertightness of the matched quadrature points.
pub fn verify_geometry(mesh: &Mesh, ops: &ReferenceOperators, geo: &MeshGeometry) -> GeometryReport {
    let mut normal_opp: f64 = 0.0;
    let mut watertight: f64 = 0.0;
    let nfq = ops.n_fq;
    for (e, faces) in geo.exchange.iter().enumerate() {
        for (f, x) in faces.iter().enumerate() {
            let Some((e2, f2, perm)) = x else { continue };
            let my0 = f * nfq;
            let th0 = f2 * nfq;
            let scale = geo.elements[e].jf.amax();
            for i in 0..nfq {
                let j = perm[i];
                for d in 0..mesh.dim {
                    let a = geo.elements[e].njf[d][my0 + i];
                    let b = geo.elements[*e2].njf[d][th0 + j];
                    normal_opp = normal_opp.max((a + b).abs() / scale);
                }
                let shift = match &mesh.links[e][f] {
                    FaceLink::Interior { shift, .. } => *shift,
                    FaceLink::Boundary => [0.0; 3],
                };
                let p = geo.elements[e].x_all[ops.n_q + my0 + i];
                let q = geo.elements[*e2].x_all[ops.n_q + th0 + j];
                let dist = (0..3)
                    .map(|d| (p[d] + shift[d] - q[d]).powi(2))
                    .sum::<f64>()
                    .sqrt();
                watertight = watertight.max(dist / geo.elements[e].h_k.max(1e-300));
            }
        }
    }
    let per_element: Vec<(usize, f64, f64, f64)> = geo
        .elements
        .iter()
        .enumerate()
        .map(|(e, el)| (e, el.gcl_residual, el.min_j, el.h_k))
        .collect();
    GeometryReport {
        gcl_residual: geo.elements.iter().map(|e| e.gcl_residual).fold(0.0, f64::max),
        normal_opposition: normal_opp,
        watertight,
        min_j: geo.elements.iter().map(|e| e.min_j).fold(f64::INFINITY, f64::min),
        h: geo.h_max,
        per_element,
    }
}
