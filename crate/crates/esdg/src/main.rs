use clap::{Parser, Subcommand};
use esdg::config::ExperimentConfig;
use esdg::geometry::{
    self, box_cells, geometric_factors, jitter_interior, verify_geometry, Mesh, MetricMode, Warp,
};
use esdg::operators::{verify_operators, ReferenceOperators, BUILD_TOL};
use esdg::report::{self, convergence_table, fmt_g17};
use esdg::studies;
use esdg::{presets, Error, Result};
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(name = "esdg", about = "Entropy-stable DG solver for compressible Euler on simplicial meshes", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a TOML config.
    Run {
        config: PathBuf,
        /// Override the output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the CFL number.
        #[arg(long)]
        cfl: Option<f64>,
        /// Override the polynomial degree.
        #[arg(long)]
        degree: Option<usize>,
    },
    /// Check the reference operator identities and print residuals.
    VerifyOperators {
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long)]
        degree: Option<usize>,
    },
    /// Check metric terms of a mesh: GCL residual, normal opposition,
    /// watertightness; writes a per-element CSV report.
    VerifyGeometry {
        mesh: PathBuf,
        #[arg(long)]
        degree: usize,
        #[arg(long, default_value = "none")]
        warp: String,
        #[arg(long)]
        mode: Option<String>,
        /// Comma-separated periodic axes, e.g. "x,y".
        #[arg(long, default_value = "")]
        periodic: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Accuracy studies over built-in mesh families.
    Study {
        #[command(subcommand)]
        which: StudyCommand,
    },
    /// Convergence report over previously written CSV tables.
    Report {
        files: Vec<PathBuf>,
        /// Expected order; rates below expected - 0.4 are flagged.
        #[arg(long)]
        expected: Option<f64>,
    },
    /// Dump reference operator matrices as CSV files.
    DumpOps {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        degree: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the checked-in preset configs.
    WritePresets { dir: PathBuf },
    /// Generate a (optionally jittered) box mesh as an MSH 2.2 file.
    MakeMesh {
        #[arg(long)]
        dim: usize,
        /// Comma-separated extents, e.g. "0:20,-5:5".
        #[arg(long)]
        extents: String,
        /// Comma-separated cell counts, e.g. "10,5".
        #[arg(long)]
        cells: String,
        #[arg(long, default_value_t = 0.0)]
        jitter: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// "kuhn" (axis-aligned splits) or "lattice" (2D offset-row,
        /// near-equilateral).
        #[arg(long, default_value = "kuhn")]
        pattern: String,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum StudyCommand {
    /// Weight-adjusted projection accuracy (smooth and discontinuous data).
    Projection {
        #[arg(long, default_value_t = 4)]
        degree: usize,
        #[arg(long, default_value_t = 5)]
        levels: usize,
        #[arg(long, default_value = "wavy2d:0.12")]
        warp: String,
        #[arg(long, default_value = "out/projstudy2d")]
        out: PathBuf,
    },
    /// Metric-term approximation error of the curl constructions.
    Geoterms {
        #[arg(long, default_value_t = 3)]
        degree: usize,
        #[arg(long, default_value_t = 3)]
        levels: usize,
        #[arg(long, default_value = "out/geoterms3d")]
        out: PathBuf,
    },
}

fn main() {
    if let Ok(threads) = std::env::var("ESDG_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config, out, cfl, degree } => run_experiment(&config, out, cfl, degree),
        Command::VerifyOperators { dim, degree } => verify_ops_cmd(dim, degree),
        Command::VerifyGeometry { mesh, degree, warp, mode, periodic, out } => {
            verify_geometry_cmd(&mesh, degree, &warp, mode.as_deref(), &periodic, out)
        }
        Command::Study { which } => match which {
            StudyCommand::Projection { degree, levels, warp, out } => {
                projection_cmd(degree, levels, &Warp::parse(&warp)?, &out)
            }
            StudyCommand::Geoterms { degree, levels, out } => geoterms_cmd(degree, levels, &out),
        },
        Command::Report { files, expected } => report_cmd(&files, expected),
        Command::DumpOps { dim, degree, out } => dump_ops_cmd(dim, degree, &out),
        Command::WritePresets { dir } => write_presets_cmd(&dir),
        Command::MakeMesh { dim, extents, cells, jitter, seed, pattern, out } => {
            make_mesh_cmd(dim, &extents, &cells, jitter, seed, &pattern, &out)
        }
    }
}

fn run_experiment(
    path: &Path,
    out_dir: Option<PathBuf>,
    cfl: Option<f64>,
    degree: Option<usize>,
) -> Result<()> {
    let mut cfg = ExperimentConfig::from_path(path)?;
    if let Some(dir) = out_dir {
        cfg.output.dir = dir.to_string_lossy().into_owned();
    }
    if let Some(c) = cfl {
        cfg.run.cfl = c;
    }
    if let Some(n) = degree {
        cfg.run.degree = n;
    }
    cfg.validate()?;
    let name = cfg.experiment.name.clone();
    let out = PathBuf::from(&cfg.output.dir);

    // study presets have no time stepping
    match name.as_str() {
        "projstudy2d" => {
            let levels = box_levels(&cfg)?;
            return projection_cmd_with(cfg.run.degree, &levels, &cfg.warp()?, &out);
        }
        "geoterms3d" => {
            let levels = box_levels(&cfg)?;
            return geoterms_cmd_with(cfg.run.degree, &levels, &cfg.warp()?, &out);
        }
        _ => {}
    }

    let nlevels = if cfg.mesh.kind == "box" {
        cfg.mesh.levels.len()
    } else {
        cfg.mesh.paths.len()
    };
    let mut conv: Vec<(f64, usize, f64)> = Vec::new();
    for level in 0..nlevels {
        let (solver, run_out, err) = presets::run_level(&cfg, level)?;
        let label = if nlevels > 1 {
            format!("level{level}_")
        } else {
            String::new()
        };
        report::write_diagnostics_csv(
            &out.join(format!("{label}diagnostics.csv")),
            cfg.mesh.dim,
            &run_out.records,
        )?;
        if cfg.output.write_solution {
            report::write_solution_csv(
                &out.join(format!("{label}solution.csv")),
                cfg.mesh.dim,
                cfg.run.degree,
                &run_out.final_state,
            )?;
        }
        let h = geometry::mesh_size(&solver.geo);
        let dof = solver.num_elements() * solver.ops.n_p;
        println!(
            "{name} level {level}: elements {}, h {:.4}, final t {:.4}",
            solver.num_elements(),
            h,
            solver.config.final_time
        );
        if let Some(e) = err {
            println!("  L2 error vs exact solution: {}", fmt_g17(e));
            conv.push((
                if cfg.mesh.kind == "box" {
                    cfg.mesh.levels[level]
                } else {
                    h
                },
                dof,
                e,
            ));
        }
        let last = run_out.records.last().unwrap();
        println!(
            "  entropy {:+.6e}  entropy_rhs {:+.3e}  min_rho {:.4}  min_p {:.4}",
            last.entropy, last.entropy_rhs, last.min_rho, last.min_p
        );
    }
    if conv.len() >= 2 {
        let table = convergence_table(&conv);
        report::write_convergence_csv(&out.join("convergence.csv"), &table)?;
        let (text, _) = report::render_report(&table, None);
        println!("{text}");
    }
    Ok(())
}

fn box_levels(cfg: &ExperimentConfig) -> Result<Vec<usize>> {
    if cfg.mesh.extents.is_empty() {
        return Err(Error::Config("study presets need box extents".into()));
    }
    Ok(cfg
        .mesh
        .levels
        .iter()
        .map(|h| (((cfg.mesh.extents[0][1] - cfg.mesh.extents[0][0]) / h).round() as usize).max(1))
        .collect())
}

fn verify_ops_cmd(dim: Option<usize>, degree: Option<usize>) -> Result<()> {
    let dims: Vec<usize> = dim.map(|d| vec![d]).unwrap_or(vec![2, 3]);
    let degrees: Vec<usize> = degree.map(|n| vec![n]).unwrap_or((1..=4).collect());
    let mut worst: f64 = 0.0;
    for &d in &dims {
        for &n in &degrees {
            let ops = ReferenceOperators::build(d, n)?;
            let rep = verify_operators(&ops);
            worst = worst.max(rep.max_residual());
            println!(
                "dim {d} degree {n}: sbp {:.2e}  null {:.2e}  poly {:.2e}  proj {:.2e}  minv {:.2e}",
                rep.sbp_residual,
                rep.null_vector_residual,
                rep.poly_exactness_residual,
                rep.projection_residual,
                rep.mass_inverse_residual
            );
        }
    }
    if worst > BUILD_TOL {
        return Err(Error::OperatorIdentity {
            identity: "operator verification",
            residual: worst,
            tol: BUILD_TOL,
        });
    }
    println!("all identities within {BUILD_TOL:.0e}");
    Ok(())
}

fn parse_periodic(s: &str) -> Vec<bool> {
    let mut p = vec![false; 3];
    for tok in s.split(',') {
        match tok.trim() {
            "x" | "0" => p[0] = true,
            "y" | "1" => p[1] = true,
            "z" | "2" => p[2] = true,
            "" => {}
            other => eprintln!("ignoring unknown periodic axis '{other}'"),
        }
    }
    p
}

fn verify_geometry_cmd(
    mesh_path: &Path,
    degree: usize,
    warp: &str,
    mode: Option<&str>,
    periodic: &str,
    out: Option<PathBuf>,
) -> Result<()> {
    let mut mesh = Mesh::load_msh(mesh_path, degree)?;
    mesh.build_connectivity(&parse_periodic(periodic))?;
    mesh.curve(&Warp::parse(warp)?);
    let mode = match mode {
        Some(s) => MetricMode::parse(s)?,
        None => MetricMode::default_for(mesh.dim),
    };
    let ops = ReferenceOperators::build(mesh.dim, degree)?;
    let geo = geometric_factors(&mesh, &ops, mode)?;
    let rep = verify_geometry(&mesh, &ops, &geo);
    println!(
        "elements {}  h {:.4}  min_J {:.3e}",
        mesh.num_elements(),
        rep.h,
        rep.min_j
    );
    println!(
        "gcl_residual {:.3e}  normal_opposition {:.3e}  watertight {:.3e}",
        rep.gcl_residual, rep.normal_opposition, rep.watertight
    );
    if let Some(out) = out {
        let rows: Vec<Vec<f64>> = rep
            .per_element
            .iter()
            .map(|&(e, g, j, h)| vec![e as f64, g, j, h])
            .collect();
        report::write_csv(&out, "element_id,gcl_residual,min_J,h_k", &rows)?;
        println!("wrote {}", out.display());
    }
    if !rep.ok(1e-10) {
        return Err(Error::Geometry(format!(
            "geometry invariants violated (gcl {:.2e}, opposition {:.2e}, watertight {:.2e})",
            rep.gcl_residual, rep.normal_opposition, rep.watertight
        )));
    }
    Ok(())
}

fn projection_cmd(degree: usize, nlevels: usize, warp: &Warp, out: &Path) -> Result<()> {
    let levels: Vec<usize> = (0..nlevels).map(|i| 2usize << i).collect();
    projection_cmd_with(degree, &levels, warp, out)
}

fn projection_cmd_with(degree: usize, levels: &[usize], warp: &Warp, out: &Path) -> Result<()> {
    for (name, f) in [
        ("smooth", studies::smooth_test as fn(&esdg::Point) -> f64),
        ("discontinuous", studies::discontinuous_test as fn(&esdg::Point) -> f64),
    ] {
        let rows = studies::projection_study(degree, levels, warp, f)?;
        let data: Vec<Vec<f64>> = rows
            .iter()
            .map(|r| vec![r.h, r.err_l2proj, r.err_wadg, r.err_diff])
            .collect();
        let path = out.join(format!("projection_{name}.csv"));
        report::write_csv(&path, "h,err_l2proj,err_wadg,err_diff", &data)?;
        println!("{name}:");
        for r in &rows {
            println!(
                "  h {:.5}  l2proj {:.4e}  wadg {:.4e}  diff {:.4e}",
                r.h, r.err_l2proj, r.err_wadg, r.err_diff
            );
        }
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn geoterms_cmd(degree: usize, nlevels: usize, out: &Path) -> Result<()> {
    let levels: Vec<usize> = (0..nlevels).map(|i| 2usize << i).collect();
    geoterms_cmd_with(degree, &levels, &Warp::Cos3d { amplitude: 0.125 }, out)
}

fn geoterms_cmd_with(degree: usize, levels: &[usize], warp: &Warp, out: &Path) -> Result<()> {
    let rows = studies::metric_study(degree, levels, warp)?;
    let data: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| vec![r.h, r.err_curl_np1, r.err_curl_n])
        .collect();
    let path = out.join("geoterms.csv");
    report::write_csv(&path, "h,err_curl_np1,err_curl_n", &data)?;
    for r in &rows {
        println!(
            "h {:.4}  curl_np1 {:.4e}  curl_n {:.4e}",
            r.h, r.err_curl_np1, r.err_curl_n
        );
    }
    println!("wrote {}", path.display());
    Ok(())
}

fn report_cmd(files: &[PathBuf], expected: Option<f64>) -> Result<()> {
    if files.is_empty() {
        return Err(Error::Config("report needs at least one CSV file".into()));
    }
    let mut all_ok = true;
    for f in files {
        let data = report::read_convergence_csv(f)?;
        let table = convergence_table(&data);
        let (text, ok) = report::render_report(&table, expected);
        println!("{}:\n{text}", f.display());
        all_ok &= ok;
    }
    if !all_ok {
        return Err(Error::Config(
            "one or more rates fell below the expected order".into(),
        ));
    }
    Ok(())
}

fn dump_ops_cmd(dim: usize, degree: usize, out: &Path) -> Result<()> {
    use nalgebra::DMatrix;
    let ops = ReferenceOperators::build(dim, degree)?;
    std::fs::create_dir_all(out)?;
    let write = |name: &str, m: &DMatrix<f64>| -> Result<()> {
        let rows: Vec<Vec<f64>> = (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
            .collect();
        let header: Vec<String> = (0..m.ncols()).map(|j| format!("c{j}")).collect();
        report::write_csv(&out.join(format!("{name}.csv")), &header.join(","), &rows)
    };
    write("V_q", &ops.v_q)?;
    write("V_f", &ops.v_f)?;
    write("M", &ops.m)?;
    write("P_q", &ops.p_q)?;
    write("L_q", &ops.l_q)?;
    for i in 0..dim {
        write(&format!("D_{i}"), &ops.d[i])?;
        write(&format!("DN_{i}"), &ops.dn_dense(i))?;
    }
    write("W", &DMatrix::from_diagonal(&ops.w))?;
    write("W_f", &DMatrix::from_diagonal(&ops.wf))?;
    println!("wrote operator matrices to {}", out.display());
    Ok(())
}

fn write_presets_cmd(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    for name in presets::PRESET_NAMES {
        let cfg = presets::preset(name)?;
        let path = dir.join(format!("{name}.toml"));
        std::fs::write(&path, cfg.to_toml())?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn parse_extents(s: &str) -> Result<Vec<[f64; 2]>> {
    s.split(',')
        .map(|tok| {
            let (a, b) = tok
                .split_once(':')
                .ok_or_else(|| Error::Config(format!("bad extent '{tok}' (want lo:hi)")))?;
            Ok([
                a.trim().parse().map_err(|_| Error::Config(format!("bad extent '{tok}'")))?,
                b.trim().parse().map_err(|_| Error::Config(format!("bad extent '{tok}'")))?,
            ])
        })
        .collect()
}

fn make_mesh_cmd(
    dim: usize,
    extents: &str,
    cells: &str,
    jitter: f64,
    seed: u64,
    pattern: &str,
    out: &Path,
) -> Result<()> {
    let extents = parse_extents(extents)?;
    let cells: Vec<usize> = cells
        .split(',')
        .map(|t| t.trim().parse().map_err(|_| Error::Config(format!("bad cell count '{t}'"))))
        .collect::<Result<Vec<_>>>()?;
    let mut cm = match pattern {
        "kuhn" => box_cells(dim, &extents, &cells)?,
        "lattice" => {
            if dim != 2 {
                return Err(Error::Config("lattice pattern is 2D only".into()));
            }
            geometry::tri_lattice_cells(&extents, cells[0], cells[1])?
        }
        other => return Err(Error::Config(format!("unknown mesh pattern '{other}'"))),
    };
    if jitter > 0.0 {
        jitter_interior(&mut cm, dim, &extents, &cells, jitter, seed);
    }
    if let Some(parent) = out.parent() {
        std::fs::create_dir_all(parent)?;
    }
    geometry::gmsh::write_msh(out, dim, &cm)?;
    println!(
        "wrote {} ({} vertices, {} elements)",
        out.display(),
        cm.vertices.len(),
        cm.elements.len()
    );
    Ok(())
}
