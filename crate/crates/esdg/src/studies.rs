//! Mesh-family accuracy studies: weight-adjusted projection versus curved L2
//! projection, and metric-term approximation error of the curl constructions.

use crate::geometry::{geometric_factors, mesh_size, Mesh, MeshGeometry, MetricMode, Warp};
use crate::operators::ReferenceOperators;
use crate::wadg::{ConservationFix, ElementMassOps, MassMode};
use crate::{Point, Result};
use nalgebra::DMatrix;

#[derive(Debug, Clone)]
pub struct ProjectionRow {
    /// Nominal edge length of the level.
    pub h: f64,
    pub err_l2proj: f64,
    pub err_wadg: f64,
    pub err_diff: f64,
}

/// Smooth test function used in the projection study.
pub fn smooth_test(x: &Point) -> f64 {
    (x[0] + x[1]).exp() * (std::f64::consts::PI * x[0]).sin() * (std::f64::consts::PI * x[1]).sin()
}

/// Discontinuous variant: the smooth function plus a Heaviside jump across a
/// curved interface.
pub fn discontinuous_test(x: &Point) -> f64 {
    let h = if x[0] + x[1] - (std::f64::consts::PI * x[0]).sin() > 0.0 {
        1.0
    } else {
        0.0
    };
    smooth_test(x) + h
}

/// Compare curved L2 projection and weight-adjusted projection of `f` on a
/// warped unit-square mesh family. `levels` are cells per axis.
pub fn projection_study<F>(
    degree: usize,
    levels: &[usize],
    warp: &Warp,
    f: F,
) -> Result<Vec<ProjectionRow>>
where
    F: Fn(&Point) -> f64 + Sync,
{
    let ops = ReferenceOperators::build(2, degree)?;
    let extents = [[0.0, 1.0], [0.0, 1.0]];
    let mut rows = Vec::new();
    for &n in levels {
        let mut mesh = Mesh::generate_box(2, &extents, &[n, n], degree)?;
        mesh.build_connectivity(&[false, false])?;
        mesh.curve(warp);
        let geo = geometric_factors(&mesh, &ops, MetricMode::Exact)?;

        let mut e_proj = 0.0;
        let mut e_wadg = 0.0;
        let mut e_diff = 0.0;
        for (el, geo_el) in geo.elements.iter().enumerate() {
            let weighted = ElementMassOps::from_geometry(&ops, geo_el, MassMode::Weighted, ConservationFix::None)?;
            let wadg = ElementMassOps::from_geometry(&ops, geo_el, MassMode::Wadg, ConservationFix::None)?;
            let _ = el;
            let vals = DMatrix::from_fn(ops.n_q, 1, |q, _| f(&geo_el.x_all[q]));
            let cp = weighted.project(&ops, &vals);
            let cw = wadg.project(&ops, &vals);
            let up = &ops.v_q * cp;
            let uw = &ops.v_q * cw;
            for q in 0..ops.n_q {
                let wj = ops.w[q] * geo_el.j_all[q];
                e_proj += wj * (vals[(q, 0)] - up[(q, 0)]).powi(2);
                e_wadg += wj * (vals[(q, 0)] - uw[(q, 0)]).powi(2);
                e_diff += wj * (up[(q, 0)] - uw[(q, 0)]).powi(2);
            }
        }
        rows.push(ProjectionRow {
            h: 1.0 / n as f64,
            err_l2proj: e_proj.sqrt(),
            err_wadg: e_wadg.sqrt(),
            err_diff: e_diff.sqrt(),
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone)]
pub struct MetricRow {
    /// Measured mesh size max_k ||J/J_f||_inf.
    pub h: f64,
    pub err_curl_np1: f64,
    pub err_curl_n: f64,
}

fn metric_error(ops: &ReferenceOperators, exact: &MeshGeometry, approx: &MeshGeometry) -> f64 {
    let dim = 3;
    let mut acc = 0.0;
    for (ge, ga) in exact.elements.iter().zip(&approx.elements) {
        for q in 0..ops.n_q {
            let wj = ops.w[q] * ge.j_all[q];
            for i in 0..dim {
                for j in 0..dim {
                    acc += wj * (ge.g[i][j][q] - ga.g[i][j][q]).powi(2);
                }
            }
        }
    }
    acc.sqrt()
}

/// Metric approximation error of the two curl constructions against the
/// exact cross-product metrics, on a warped [-1,1]^3 tet mesh family.
pub fn metric_study(degree: usize, levels: &[usize], warp: &Warp) -> Result<Vec<MetricRow>> {
    let ops = ReferenceOperators::build(3, degree)?;
    let extents = [[-1.0, 1.0], [-1.0, 1.0], [-1.0, 1.0]];
    let mut rows = Vec::new();
    for &n in levels {
        let mut mesh = Mesh::generate_box(3, &extents, &[n, n, n], degree)?;
        mesh.build_connectivity(&[false, false, false])?;
        mesh.curve(warp);
        let exact = geometric_factors(&mesh, &ops, MetricMode::Exact)?;
        let c_np1 = geometric_factors(&mesh, &ops, MetricMode::CurlNp1)?;
        let c_n = geometric_factors(&mesh, &ops, MetricMode::CurlN)?;
        rows.push(MetricRow {
            h: mesh_size(&exact),
            err_curl_np1: metric_error(&ops, &exact, &c_np1),
            err_curl_n: metric_error(&ops, &exact, &c_n),
        });
    }
    Ok(rows)
}

/// Least-squares slope of log(err) against log(h).
pub fn fitted_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(h, e) in points {
        let (x, y) = (h.ln(), e.ln());
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fitted_slope_recovers_power_law() {
        let pts: Vec<(f64, f64)> = [1.0, 0.5, 0.25]
            .iter()
            .map(|&h: &f64| (h, 3.0 * h.powf(2.5)))
            .collect();
        assert!((fitted_slope(&pts) - 2.5).abs() < 1e-12);
    }

    #[test]
    fn constant_function_projects_exactly() {
        let rows = projection_study(3, &[2, 4], &Warp::Wavy2d { amplitude: 0.08 }, |_| 2.5).unwrap();
        for r in rows {
            assert!(r.err_l2proj < 1e-12);
            assert!(r.err_wadg < 1e-12);
            assert!(r.err_diff < 1e-12);
        }
    }

    #[test]
    fn projection_difference_superconverges() {
        // quick two-level slope check at modest degree; the full study is in
        // the acceptance suite
        let rows = projection_study(2, &[4, 8], &Warp::Wavy2d { amplitude: 0.08 }, smooth_test).unwrap();
        let slope_proj = fitted_slope(&[(rows[0].h, rows[0].err_l2proj), (rows[1].h, rows[1].err_l2proj)]);
        let slope_diff = fitted_slope(&[(rows[0].h, rows[0].err_diff), (rows[1].h, rows[1].err_diff)]);
        assert!(slope_proj > 2.5, "proj slope {slope_proj}");
        assert!(slope_diff > slope_proj + 0.5, "diff slope {slope_diff}");
    }

    #[test]
    fn wadg_inverse_approaches_weighted_inverse_under_refinement() {
        // apply both inverses to the same load on each element; the gap
        // shrinks at a superconvergent rate
        use crate::geometry::MetricMode;
        let degree = 2;
        let ops = ReferenceOperators::build(2, degree).unwrap();
        let mut errs = Vec::new();
        for n in [4usize, 8] {
            let mut mesh = Mesh::generate_box(2, &[[-1.0, 1.0], [-1.0, 1.0]], &[n, n], degree).unwrap();
            mesh.build_connectivity(&[false, false]).unwrap();
            mesh.curve(&Warp::Wavy2d { amplitude: 0.08 });
            let geo = geometric_factors(&mesh, &ops, MetricMode::Exact).unwrap();
            let mut acc: f64 = 0.0;
            for geo_el in &geo.elements {
                let weighted =
                    ElementMassOps::from_geometry(&ops, geo_el, MassMode::Weighted, ConservationFix::None)
                        .unwrap();
                let wadg =
                    ElementMassOps::from_geometry(&ops, geo_el, MassMode::Wadg, ConservationFix::None)
                        .unwrap();
                let vals = DMatrix::from_fn(ops.n_q, 1, |q, _| smooth_test(&geo_el.x_all[q]));
                let a = weighted.project(&ops, &vals);
                let b = wadg.project(&ops, &vals);
                let d = &ops.v_q * (a - b);
                for q in 0..ops.n_q {
                    acc += ops.w[q] * geo_el.j_all[q] * d[(q, 0)] * d[(q, 0)];
                }
            }
            errs.push(acc.sqrt());
        }
        let rate = (errs[0] / errs[1]).log2();
        assert!(rate >= degree as f64 + 1.5, "rate {rate}");
    }
}
