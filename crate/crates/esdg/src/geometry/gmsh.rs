//! Gmsh MSH 2.2 ASCII reader/writer, restricted to triangle (type 2) and
//! tetrahedron (type 4) volume elements. Points and lines are skipped as
//! boundary entities; any other element type is rejected.

use super::boxmesh::CellMesh;
use crate::{Error, Point, Result};
use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

pub fn read_msh(path: &Path) -> Result<(usize, CellMesh)> {
    let text = std::fs::read_to_string(path)?;
    parse_msh(&text).map_err(|e| Error::Mesh(format!("{}: {e}", path.display())))
}

fn parse_msh(text: &str) -> std::result::Result<(usize, CellMesh), String> {
    let mut lines = text.lines().map(str::trim);
    let mut vertices: Vec<Point> = Vec::new();
    let mut id_map: HashMap<usize, usize> = HashMap::new();
    let mut tris: Vec<Vec<usize>> = Vec::new();
    let mut tets: Vec<Vec<usize>> = Vec::new();

    while let Some(line) = lines.next() {
        match line {
            "$MeshFormat" => {
                let fmt = lines.next().ok_or("truncated $MeshFormat")?;
                let mut it = fmt.split_whitespace();
                let version = it.next().ok_or("missing version")?;
                if version != "2.2" {
                    return Err(format!("unsupported MSH version {version} (need 2.2 ASCII)"));
                }
                let filetype = it.next().ok_or("missing file type")?;
                if filetype != "0" {
                    return Err("binary MSH not supported".into());
                }
            }
            "$Nodes" => {
                let count: usize = lines
                    .next()
                    .ok_or("truncated $Nodes")?
                    .parse()
                    .map_err(|_| "bad node count")?;
                for _ in 0..count {
                    let row = lines.next().ok_or("truncated node list")?;
                    let mut it = row.split_whitespace();
                    let id: usize = it.next().ok_or("bad node row")?.parse().map_err(|_| "bad node id")?;
                    let mut p = [0.0; 3];
                    for c in p.iter_mut() {
                        *c = it
                            .next()
                            .ok_or("bad node row")?
                            .parse()
                            .map_err(|_| "bad node coordinate")?;
                    }
                    id_map.insert(id, vertices.len());
                    vertices.push(p);
                }
            }
            "$Elements" => {
                let count: usize = lines
                    .next()
                    .ok_or("truncated $Elements")?
                    .parse()
                    .map_err(|_| "bad element count")?;
                for _ in 0..count {
                    let row = lines.next().ok_or("truncated element list")?;
                    let mut it = row.split_whitespace();
                    let _id: usize = it.next().ok_or("bad element row")?.parse().map_err(|_| "bad element id")?;
                    let etype: usize = it.next().ok_or("bad element row")?.parse().map_err(|_| "bad element type")?;
                    let ntags: usize = it.next().ok_or("bad element row")?.parse().map_err(|_| "bad tag count")?;
                    for _ in 0..ntags {
                        it.next().ok_or("truncated tags")?;
                    }
                    let nverts = match etype {
                        15 | 1 | 8 => {
                            continue; // points and (quadratic) lines: boundary entities
                        }
                        2 => 3,
                        4 => 4,
                        other => {
                            return Err(format!(
                                "unsupported element type {other} (only linear triangles and tetrahedra)"
                            ))
                        }
                    };
                    let mut conn = Vec::with_capacity(nverts);
                    for _ in 0..nverts {
                        let id: usize = it
                            .next()
                            .ok_or("truncated connectivity")?
                            .parse()
                            .map_err(|_| "bad vertex id")?;
                        conn.push(*id_map.get(&id).ok_or("element references unknown node")?);
                    }
                    if etype == 2 {
                        tris.push(conn);
                    } else {
                        tets.push(conn);
                    }
                }
            }
            _ => {}
        }
    }

    match (tris.is_empty(), tets.is_empty()) {
        (false, true) => Ok((2, CellMesh { vertices, elements: tris })),
        (true, false) => Ok((3, CellMesh { vertices, elements: tets })),
        (false, false) => Err("mixed triangle and tetrahedron elements".into()),
        (true, true) => Err("no volume elements found".into()),
    }
}

pub fn write_msh(path: &Path, dim: usize, mesh: &CellMesh) -> Result<()> {
    let mut out = String::new();
    out.push_str("$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$Nodes\n");
    let _ = writeln!(out, "{}", mesh.vertices.len());
    for (i, v) in mesh.vertices.iter().enumerate() {
        let _ = writeln!(out, "{} {:.17e} {:.17e} {:.17e}", i + 1, v[0], v[1], v[2]);
    }
    out.push_str("$EndNodes\n$Elements\n");
    let _ = writeln!(out, "{}", mesh.elements.len());
    let etype = if dim == 2 { 2 } else { 4 };
    for (i, e) in mesh.elements.iter().enumerate() {
        let _ = write!(out, "{} {} 2 0 0", i + 1, etype);
        for &v in e {
            let _ = write!(out, " {}", v + 1);
        }
        out.push('\n');
    }
    out.push_str("$EndElements\n");
    std::fs::write(path, out)?;
    Ok(())
}
