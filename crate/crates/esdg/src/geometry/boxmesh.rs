//! Structured box meshes: squares split into 2 triangles, cubes split into
//! 6 tetrahedra along a uniform diagonal (watertight across cells).

use crate::{Error, Point, Result};

pub struct CellMesh {
    pub vertices: Vec<Point>,
    pub elements: Vec<Vec<usize>>,
}

/// Kuhn subdivision paths: each permutation of the axes walks from the cell
/// origin to the far corner, yielding one tet per permutation.
const KUHN_PERMS: [[usize; 3]; 6] = [
    [0, 1, 2],
    [0, 2, 1],
    [1, 0, 2],
    [1, 2, 0],
    [2, 0, 1],
    [2, 1, 0],
];

fn tet_volume(v: &[Point]) -> f64 {
    let a = [v[1][0] - v[0][0], v[1][1] - v[0][1], v[1][2] - v[0][2]];
    let b = [v[2][0] - v[0][0], v[2][1] - v[0][1], v[2][2] - v[0][2]];
    let c = [v[3][0] - v[0][0], v[3][1] - v[0][1], v[3][2] - v[0][2]];
    (a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0])
        + a[2] * (b[0] * c[1] - b[1] * c[0]))
        / 6.0
}

pub fn box_cells(dim: usize, extents: &[[f64; 2]], cells: &[usize]) -> Result<CellMesh> {
    if dim != 2 && dim != 3 {
        return Err(Error::UnsupportedDim(dim));
    }
    if cells.iter().take(dim).any(|&c| c == 0) {
        return Err(Error::Mesh("box mesh needs at least one cell per axis".into()));
    }
    let n = |d: usize| if d < dim { cells[d] } else { 0 };
    let (nx, ny, nz) = (n(0), n(1), n(2));
    let coord = |d: usize, i: usize| {
        let c = cells[d] as f64;
        extents[d][0] + (extents[d][1] - extents[d][0]) * i as f64 / c
    };

    let mut vertices = Vec::new();
    let mut elements = Vec::new();
    if dim == 2 {
        let vid = |i: usize, j: usize| j * (nx + 1) + i;
        for j in 0..=ny {
            for i in 0..=nx {
                vertices.push([coord(0, i), coord(1, j), 0.0]);
            }
        }
        for j in 0..ny {
            for i in 0..nx {
                let (a, b, c, d) = (vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1));
                elements.push(vec![a, b, c]);
                elements.push(vec![a, c, d]);
            }
        }
    } else {
        let vid = |i: usize, j: usize, k: usize| (k * (ny + 1) + j) * (nx + 1) + i;
        for k in 0..=nz {
            for j in 0..=ny {
                for i in 0..=nx {
                    vertices.push([coord(0, i), coord(1, j), coord(2, k)]);
                }
            }
        }
        for k in 0..nz {
            for j in 0..ny {
                for i in 0..nx {
                    let corner = [i, j, k];
                    for perm in KUHN_PERMS {
                        let mut idx = corner;
                        let mut tet = vec![vid(idx[0], idx[1], idx[2])];
                        for &ax in &perm {
                            idx[ax] += 1;
                            tet.push(vid(idx[0], idx[1], idx[2]));
                        }
                        // orient positively
                        let pts: Vec<Point> = tet.iter().map(|&v| vertices[v]).collect();
                        if tet_volume(&pts) < 0.0 {
                            tet.swap(2, 3);
                        }
                        elements.push(tet);
                    }
                }
            }
        }
    }
    Ok(CellMesh { vertices, elements })
}

/// Quasi-uniform near-equilateral triangulation of a rectangle from an
/// offset-row vertex lattice. Alternate rows are shifted by half a cell and
/// carry extra boundary vertices so the domain stays exactly rectangular and
/// periodic pairing works; `ny` must be even for y-periodicity.
pub fn tri_lattice_cells(extents: &[[f64; 2]], nx: usize, ny: usize) -> Result<CellMesh> {
    if nx < 2 || ny < 2 || ny % 2 != 0 {
        return Err(Error::Mesh(
            "triangle lattice needs nx >= 2 and even ny >= 2".into(),
        ));
    }
    let (x0, x1) = (extents[0][0], extents[0][1]);
    let (y0, y1) = (extents[1][0], extents[1][1]);
    let hx = (x1 - x0) / nx as f64;
    let hy = (y1 - y0) / ny as f64;

    let mut vertices: Vec<Point> = Vec::new();
    let mut row_start = Vec::with_capacity(ny + 1);
    let mut row_len = Vec::with_capacity(ny + 1);
    for j in 0..=ny {
        row_start.push(vertices.len());
        let y = y0 + j as f64 * hy;
        if j % 2 == 0 {
            for i in 0..=nx {
                vertices.push([x0 + i as f64 * hx, y, 0.0]);
            }
            row_len.push(nx + 1);
        } else {
            // offset row: boundary vertices plus midpoints
            vertices.push([x0, y, 0.0]);
            for i in 0..nx {
                vertices.push([x0 + (i as f64 + 0.5) * hx, y, 0.0]);
            }
            vertices.push([x1, y, 0.0]);
            row_len.push(nx + 2);
        }
    }

    let mut elements: Vec<Vec<usize>> = Vec::new();
    for j in 0..ny {
        // plain row (nx+1 points) and offset row (nx+2 points) of this strip
        let (even, odd) = if j % 2 == 0 {
            (row_start[j], row_start[j + 1])
        } else {
            (row_start[j + 1], row_start[j])
        };
        let mut tri = |a: usize, b: usize, c: usize| {
            // keep counterclockwise orientation
            let (pa, pb, pc) = (vertices[a], vertices[b], vertices[c]);
            let cross = (pb[0] - pa[0]) * (pc[1] - pa[1]) - (pb[1] - pa[1]) * (pc[0] - pa[0]);
            if cross > 0.0 {
                elements.push(vec![a, b, c]);
            } else {
                elements.push(vec![a, c, b]);
            }
        };
        // half triangles at the left edge
        tri(even, odd, odd + 1);
        for i in 0..nx {
            tri(even + i, odd + i + 1, even + i + 1);
            if i + 1 < nx {
                tri(even + i + 1, odd + i + 1, odd + i + 2);
            }
        }
        // half triangle at the right edge
        tri(even + nx, odd + nx, odd + nx + 1);
    }
    Ok(CellMesh { vertices, elements })
}

/// Jitter interior vertices by up to `amount` of the local cell size, with a
/// deterministic hash-based displacement. Boundary vertices stay fixed so
/// domain shape and periodic pairing survive.
pub fn jitter_interior(mesh: &mut CellMesh, dim: usize, extents: &[[f64; 2]], cells: &[usize], amount: f64, seed: u64) {
    let h: Vec<f64> = (0..dim)
        .map(|d| (extents[d][1] - extents[d][0]) / cells[d] as f64)
        .collect();
    let tol = 1e-9;
    for (vi, v) in mesh.vertices.iter_mut().enumerate() {
        let on_boundary = (0..dim).any(|d| {
            (v[d] - extents[d][0]).abs() < tol * h[d] || (v[d] - extents[d][1]).abs() < tol * h[d]
        });
        if on_boundary {
            continue;
        }
        let mut state = seed ^ (vi as u64).wrapping_mul(0x9e3779b97f4a7c15);
        for d in 0..dim {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            let r = ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5;
            v[d] += 2.0 * r * amount * h[d];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_cell_counts() {
        let m = box_cells(2, &[[0.0, 1.0], [0.0, 1.0]], &[1, 1]).unwrap();
        assert_eq!(m.vertices.len(), 4);
        assert_eq!(m.elements.len(), 2);
        let m = box_cells(3, &[[0.0, 1.0], [0.0, 1.0], [0.0, 1.0]], &[1, 1, 1]).unwrap();
        assert_eq!(m.vertices.len(), 8);
        assert_eq!(m.elements.len(), 6);
    }

    #[test]
    fn kuhn_tets_fill_cube() {
        let m = box_cells(3, &[[0.0, 2.0], [0.0, 1.0], [0.0, 1.0]], &[2, 1, 1]).unwrap();
        let total: f64 = m
            .elements
            .iter()
            .map(|e| {
                let pts: Vec<Point> = e.iter().map(|&v| m.vertices[v]).collect();
                tet_volume(&pts)
            })
            .sum();
        assert!((total - 2.0).abs() < 1e-12);
        assert!(m.elements.iter().all(|e| {
            let pts: Vec<Point> = e.iter().map(|&v| m.vertices[v]).collect();
            tet_volume(&pts) > 0.0
        }));
    }

    #[test]
    fn tri_lattice_tiles_rectangle() {
        let ext = [[0.0, 4.0], [0.0, 2.0]];
        let m = tri_lattice_cells(&ext, 4, 2).unwrap();
        assert_eq!(m.elements.len(), 2 * (2 * 4 + 1));
        let area: f64 = m
            .elements
            .iter()
            .map(|e| {
                let (a, b, c) = (m.vertices[e[0]], m.vertices[e[1]], m.vertices[e[2]]);
                0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))
            })
            .sum();
        assert!((area - 8.0).abs() < 1e-12);
        assert!(tri_lattice_cells(&ext, 4, 3).is_err());
    }

    #[test]
    fn jitter_leaves_boundary_alone() {
        let extents = [[0.0, 1.0], [0.0, 1.0]];
        let cells = [4, 4];
        let mut m = box_cells(2, &extents, &cells).unwrap();
        let orig = m.vertices.clone();
        jitter_interior(&mut m, 2, &extents, &cells, 0.2, 42);
        let mut moved = 0;
        for (a, b) in orig.iter().zip(&m.vertices) {
            let on_bnd = a[0] == 0.0 || a[0] == 1.0 || a[1] == 0.0 || a[1] == 1.0;
            if on_bnd {
                assert_eq!(a, b);
            } else if a != b {
                moved += 1;
            }
        }
        assert!(moved > 0);
    }
}
