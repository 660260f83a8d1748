//! CSV emission and convergence-rate reporting.

use crate::solver::DiagnosticsRecord;
use crate::{Error, Result};
use std::fmt::Write as _;
use std::path::Path;

/// Format a float with 17 significant digits.
pub fn fmt_g17(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_csv(path: &Path, header: &str, rows: &[Vec<f64>]) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let mut out = String::new();
    out.push_str(header);
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|&x| fmt_g17(x)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Diagnostics CSV with the documented column set; momentum residual columns
/// follow the spatial dimension.
pub fn write_diagnostics_csv(path: &Path, dim: usize, records: &[DiagnosticsRecord]) -> Result<()> {
    let mom_cols: String = (1..=dim).map(|i| format!(",cons_res_m{i}")).collect();
    let header = format!(
        "time,entropy,entropy_rhs,cons_res_rho{mom_cols},cons_res_E,kinetic_energy,min_rho,min_p"
    );
    let rows: Vec<Vec<f64>> = records
        .iter()
        .map(|r| {
            let mut row = vec![r.time, r.entropy, r.entropy_rhs, r.cons_res[0]];
            for i in 0..dim {
                row.push(r.cons_res[1 + i]);
            }
            row.push(r.cons_res[4]);
            row.push(r.kinetic_energy);
            row.push(r.min_rho);
            row.push(r.min_p);
            row
        })
        .collect();
    write_csv(path, &header, &rows)
}

/// Solution snapshot: modal coefficients per element, with a version-tagged
/// header line followed by one CSV row per (element, field).
pub fn write_solution_csv(
    path: &Path,
    dim: usize,
    degree: usize,
    field: &crate::solver::SolutionField,
) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let nf = dim + 2;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "esdg-solution,v1,dim={dim},degree={degree},nelem={},nfields={nf}",
        field.nelem
    );
    out.push_str("elem,field,coeffs...\n");
    for e in 0..field.nelem {
        let m = field.elem(e);
        for c in 0..nf {
            // skip the unused z-momentum slot in 2D
            let col = if dim == 2 && c == 3 { 4 } else { c };
            let _ = write!(out, "{e},{c}");
            for r in 0..field.n_p {
                let _ = write!(out, ",{}", fmt_g17(m[(r, col)]));
            }
            out.push('\n');
        }
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// One row of a convergence table.
#[derive(Debug, Clone)]
pub struct ConvergenceRow {
    pub h: f64,
    pub dof: usize,
    pub error: f64,
    /// Rate against the previous row; None for the first.
    pub rate: Option<f64>,
}

/// Build a table with rates r_i = log(e_i/e_{i+1}) / log(h_i/h_{i+1}).
pub fn convergence_table(data: &[(f64, usize, f64)]) -> Vec<ConvergenceRow> {
    let mut rows = Vec::with_capacity(data.len());
    for (i, &(h, dof, e)) in data.iter().enumerate() {
        let rate = if i == 0 {
            None
        } else {
            let (hp, _, ep) = data[i - 1];
            Some((ep / e).ln() / (hp / h).ln())
        };
        rows.push(ConvergenceRow { h, dof, error: e, rate });
    }
    rows
}

pub fn write_convergence_csv(path: &Path, rows: &[ConvergenceRow]) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let mut out = String::from("h,dof,l2_error,rate\n");
    for r in rows {
        let rate = r.rate.map(fmt_g17).unwrap_or_default();
        let _ = writeln!(out, "{},{},{},{}", fmt_g17(r.h), r.dof, fmt_g17(r.error), rate);
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Parse a convergence CSV back (h, dof, error columns; rate recomputed).
pub fn read_convergence_csv(path: &Path) -> Result<Vec<(f64, usize, f64)>> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Config(format!("{}: empty file", path.display())))?;
    if !header.starts_with("h,dof,l2_error") {
        return Err(Error::Config(format!(
            "{}: not a convergence table (header '{header}')",
            path.display()
        )));
    }
    let mut out = Vec::new();
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() < 3 {
            return Err(Error::Config(format!("{}: short row '{line}'", path.display())));
        }
        let h: f64 = cells[0]
            .parse()
            .map_err(|_| Error::Config(format!("bad h value '{}'", cells[0])))?;
        let dof: usize = cells[1]
            .parse()
            .map_err(|_| Error::Config(format!("bad dof value '{}'", cells[1])))?;
        let e: f64 = cells[2]
            .parse()
            .map_err(|_| Error::Config(format!("bad error value '{}'", cells[2])))?;
        out.push((h, dof, e));
    }
    Ok(out)
}

/// Render a convergence table, flagging rates below `expected - 0.4`.
pub fn render_report(rows: &[ConvergenceRow], expected_order: Option<f64>) -> (String, bool) {
    let mut s = String::from("       h           dof      l2_error        rate\n");
    let mut ok = true;
    for r in rows {
        let rate_s = match r.rate {
            Some(rate) => {
                let flag = match expected_order {
                    Some(exp) if rate < exp - 0.4 => {
                        ok = false;
                        "  LOW"
                    }
                    _ => "",
                };
                format!("{rate:10.3}{flag}")
            }
            None => "         -".into(),
        };
        let _ = writeln!(s, "{:12.5e} {:8} {:14.6e} {rate_s}", r.h, r.dof, r.error);
    }
    (s, ok)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rate_arithmetic() {
        let rows = convergence_table(&[(1.0, 100, 1e-2), (0.5, 400, 1.25e-3)]);
        assert!(rows[0].rate.is_none());
        assert!((rows[1].rate.unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn single_level_has_no_rate_and_no_flag() {
        let rows = convergence_table(&[(1.0, 100, 1e-2)]);
        let (text, ok) = render_report(&rows, Some(3.0));
        assert!(ok);
        assert!(!text.contains("LOW"));
    }

    #[test]
    fn low_rate_flagged() {
        let rows = convergence_table(&[(1.0, 0, 1e-2), (0.5, 0, 0.9e-2)]);
        let (_, ok) = render_report(&rows, Some(3.0));
        assert!(!ok);
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("conv.csv");
        let rows = convergence_table(&[(2.0, 10, 0.5), (1.0, 40, 0.031)]);
        write_convergence_csv(&path, &rows).unwrap();
        let back = read_convergence_csv(&path).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[0].0, 2.0);
        assert_eq!(back[1].1, 40);
        assert!((back[1].2 - 0.031).abs() < 1e-18);
    }

    #[test]
    fn g17_preserves_doubles() {
        for &x in &[std::f64::consts::PI, 1.0 / 3.0, 2.32e-3, 1.31183e-7] {
            let s = fmt_g17(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(x.to_bits(), back.to_bits());
        }
    }
}
