//! Experiment presets: initial conditions, exact solutions where they exist,
//! and ready-to-run configurations.

use crate::config::*;
use crate::euler::State;
use crate::geometry::{geometric_factors, Mesh};
use crate::operators::ReferenceOperators;
use crate::solver::{RunOutput, Solver};
use crate::{Error, Point, Result};
use std::f64::consts::PI;
use std::path::Path;

pub const PRESET_NAMES: [&str; 8] = [
    "vortex2d",
    "pulse2d",
    "consres2d",
    "projstudy2d",
    "geoterms3d",
    "freestream3d",
    "vortex3d",
    "taylorgreen3d",
];

/// Translating isentropic vortex in 2D (advection speed 1 along x1).
pub fn vortex2d(gamma: f64, x: &Point, t: f64) -> State {
    let (c1, c2, beta) = (5.0, 0.0, 5.0);
    let dx = x[0] - c1 - t;
    let dy = x[1] - c2;
    let r2 = dx * dx + dy * dy;
    let e1r2 = (1.0 - r2).exp();
    let rho = (1.0 - (gamma - 1.0) * (beta * e1r2).powi(2) / (16.0 * gamma * PI * PI))
        .powf(1.0 / (gamma - 1.0));
    let u = 1.0 - beta / (2.0 * PI) * e1r2 * dy;
    let v = beta / (2.0 * PI) * e1r2 * dx;
    let p = rho.powf(gamma);
    [
        rho,
        rho * u,
        rho * v,
        0.0,
        p / (gamma - 1.0) + 0.5 * rho * (u * u + v * v),
    ]
}

/// Extruded isentropic vortex in 3D, translating along x2.
pub fn vortex3d(gamma: f64, x: &Point, t: f64) -> State {
    let (c1, c2, pi_max) = (5.0, 5.0, 0.4);
    let p0 = 1.0 / gamma;
    let r = [-(x[1] - c2 - t), x[0] - c1, 0.0];
    let r2 = r[0] * r[0] + r[1] * r[1];
    let big_pi = pi_max * ((1.0 - r2) / 2.0).exp();
    let rho = (1.0 - 0.5 * (gamma - 1.0) * big_pi * big_pi).powf(1.0 / (gamma - 1.0));
    let vel = [big_pi * r[0], big_pi * r[1] + 1.0, 0.0];
    let p = p0 * rho.powf(gamma);
    let ke = 0.5 * rho * (vel[0] * vel[0] + vel[1] * vel[1]);
    [
        rho,
        rho * vel[0],
        rho * vel[1],
        rho * vel[2],
        p / (gamma - 1.0) + ke,
    ]
}

/// Discontinuous density/pressure square pulse at rest.
pub fn pulse2d(gamma: f64, x: &Point) -> State {
    let rho: f64 = if x[0].abs() < 0.5 && x[1].abs() < 0.5 { 3.0 } else { 2.0 };
    let p = rho.powf(gamma);
    [rho, 0.0, 0.0, 0.0, p / (gamma - 1.0)]
}

/// Inviscid Taylor-Green vortex initial data on [-pi, pi]^3.
pub fn taylor_green(gamma: f64, x: &Point) -> State {
    let (x1, x2, x3) = (x[0], x[1], x[2]);
    let u = x1.sin() * x2.cos() * x3.cos();
    let v = -x1.cos() * x2.sin() * x3.cos();
    let w = 0.0;
    let p = 100.0 / gamma
        + ((2.0 * x1).cos() + (2.0 * x2).cos()) * (2.0 + (2.0 * x3).cos()) / 16.0;
    let rho = 1.0;
    [
        rho,
        rho * u,
        rho * v,
        rho * w,
        p / (gamma - 1.0) + 0.5 * rho * (u * u + v * v + w * w),
    ]
}

pub fn free_stream(gamma: f64) -> State {
    let rho = 1.0;
    let vel = [0.1, 0.1, 0.1];
    let p = 1.0;
    [
        rho,
        rho * vel[0],
        rho * vel[1],
        rho * vel[2],
        p / (gamma - 1.0) + 0.5 * rho * (vel[0] * vel[0] + vel[1] * vel[1] + vel[2] * vel[2]),
    ]
}

/// Initial condition of a preset, in conservative variables.
pub fn initial_condition(name: &str, gamma: f64, x: &Point) -> Result<State> {
    Ok(match name {
        "vortex2d" => vortex2d(gamma, x, 0.0),
        "vortex3d" => vortex3d(gamma, x, 0.0),
        "pulse2d" | "consres2d" => pulse2d(gamma, x),
        "taylorgreen3d" => taylor_green(gamma, x),
        "freestream3d" => free_stream(gamma),
        _ => return Err(Error::Config(format!("preset '{name}' has no initial condition"))),
    })
}

/// Exact solution where one exists.
pub fn exact_solution(name: &str, gamma: f64, x: &Point, t: f64) -> Option<State> {
    match name {
        "vortex2d" => Some(vortex2d(gamma, x, t)),
        "vortex3d" => Some(vortex3d(gamma, x, t)),
        "freestream3d" => Some(free_stream(gamma)),
        _ => None,
    }
}

/// Checked-in configuration for each named preset.
pub fn preset(name: &str) -> Result<ExperimentConfig> {
    let base_run = |degree: usize, cfl: f64, t: f64, flux: &str| RunSection {
        degree,
        cfl,
        final_time: t,
        num_steps: None,
        flux: flux.into(),
        mass_mode: "wadg".into(),
        projection: "wadg".into(),
        conservation_fix: "poly_j".into(),
    };
    let physics = PhysicsSection { gamma: 1.4 };
    let output = |dir: &str, cadence: f64| OutputSection {
        dir: format!("out/{dir}"),
        cadence,
        write_solution: false,
    };
    let cfg = match name {
        "vortex2d" => ExperimentConfig {
            experiment: ExperimentSection { name: name.into() },
            mesh: MeshSection {
                dim: 2,
                kind: "box".into(),
                extents: vec![[0.0, 20.0], [-5.0, 5.0]],
                levels: vec![2.0, 1.0, 0.5],
                paths: vec![],
                periodic: vec![true, true],
                warp: "channel2d".into(),
                metric_mode: None,
            },
            run: base_run(2, 0.25, 5.0, "ec_lf"),
            physics,
            output: output("vortex2d", 0.5),
        },
        "pulse2d" => ExperimentConfig {
            experiment: ExperimentSection { name: name.into() },
            mesh: MeshSection {
                dim: 2,
                kind: "box".into(),
                extents: vec![[0.0, 20.0], [-5.0, 5.0]],
                levels: vec![1.25],
                paths: vec![],
                periodic: vec![true, true],
                warp: "channel2d".into(),
                metric_mode: None,
            },
            run: base_run(4, 0.25, 2.0, "ec"),
            physics,
            output: output("pulse2d", 0.1),
        },
        "consres2d" => ExperimentConfig {
            experiment: ExperimentSection { name: name.into() },
            mesh: MeshSection {
                dim: 2,
                kind: "box".into(),
                extents: vec![[0.0, 20.0], [-5.0, 5.0]],
                levels: vec![1.25],
                paths: vec![],
                periodic: vec![true, true],
                warp: "channel2d".into(),
                metric_mode: None,
            },
            run: base_run(4, 0.5, 10.0, "ec_lf"),
            physics,
            output: output("consres2d", 0.25),
        },
        "projstudy2d" => ExperimentConfig {
            experiment: ExperimentSection { name: name.into() },
            mesh: MeshSection {
                dim: 2,
                kind: "box".into(),
                extents: vec![[0.0, 1.0], [0.0, 1.0]],
                levels: vec![0.5, 0.25, 0.125, 0.0625, 0.03125],
                paths: vec![],
                periodic: vec![false, false],
                warp: "wavy2d:0.12".into(),
                metric_mode: None,
            },
            run: base_run(4, 0.5, 0.0, "ec"),
            physics,
            output: output("projstudy2d", 0.0),
        },
        "geoterms3d" => ExperimentConfig {
            experiment: ExperimentSection { name: name.into() },
            mesh: MeshSection {
                dim: 3,
                kind: "box".into(),
                extents: vec![[-1.0, 1.0], [-1.0, 1.0], [-1.0, 1.0]],
                levels: vec![1.0, 0.5, 0.25],
                paths: vec![],
                periodic: vec![false, false, false],
                warp: "cos3d:0.125".into(),
                metric_mode: Some("curl_np1".into()),
            },
            run: base_run(3, 0.5, 0.0, "ec"),
            physics,
            output: output("geoterms3d", 0.0),
        },
        "freestream3d" => ExperimentConfig {
            experiment: ExperimentSection { name: name.into() },
            mesh: MeshSection {
                dim: 3,
                kind: "box".into(),
                extents: vec![[-1.0, 1.0], [-1.0, 1.0], [-1.0, 1.0]],
                levels: vec![0.5],
                paths: vec![],
                periodic: vec![true, true, true],
                warp: "cos3d:0.125".into(),
                metric_mode: Some("curl_np1".into()),
            },
            run: RunSection {
                num_steps: Some(10),
                ..base_run(3, 0.5, 1.0, "ec")
            },
            physics,
            output: output("freestream3d", 0.0),
        },
        "vortex3d" => ExperimentConfig {
            experiment: ExperimentSection { name: name.into() },
            mesh: MeshSection {
                dim: 3,
                kind: "box".into(),
                extents: vec![[0.0, 10.0], [0.0, 20.0], [0.0, 10.0]],
                levels: vec![2.0, 1.0],
                paths: vec![],
                periodic: vec![true, true, true],
                warp: "box3d".into(),
                metric_mode: Some("curl_np1".into()),
            },
            run: base_run(2, 0.5, 5.0, "ec_lf"),
            physics,
            output: output("vortex3d", 0.5),
        },
        "taylorgreen3d" => ExperimentConfig {
            experiment: ExperimentSection { name: name.into() },
            mesh: MeshSection {
                dim: 3,
                kind: "box".into(),
                extents: vec![[-PI, PI], [-PI, PI], [-PI, PI]],
                levels: vec![PI],
                paths: vec![],
                periodic: vec![true, true, true],
                warp: "sinsin3d:0.125".into(),
                metric_mode: Some("curl_np1".into()),
            },
            run: base_run(3, 0.25, 20.0, "ec"),
            physics,
            output: output("taylorgreen3d", 0.2),
        },
        _ => {
            return Err(Error::Config(format!(
                "unknown preset '{name}' (expected one of {PRESET_NAMES:?})"
            )))
        }
    };
    Ok(cfg)
}

/// Build a ready solver for one mesh level of a config.
pub fn build_level_solver(cfg: &ExperimentConfig, level: usize) -> Result<Solver> {
    let degree = cfg.run.degree;
    let mut mesh = match cfg.mesh.kind.as_str() {
        "box" => {
            let h = *cfg
                .mesh
                .levels
                .get(level)
                .ok_or_else(|| Error::Config(format!("level {level} out of range")))?;
            let cells = cfg.cells_for_level(h)?;
            Mesh::generate_box(cfg.mesh.dim, &cfg.mesh.extents, &cells, degree)?
        }
        "msh" => {
            let path = cfg
                .mesh
                .paths
                .get(level)
                .ok_or_else(|| Error::Config(format!("level {level} out of range")))?;
            Mesh::load_msh(Path::new(path), degree)?
        }
        other => return Err(Error::Config(format!("unknown mesh kind '{other}'"))),
    };
    mesh.build_connectivity(&cfg.mesh.periodic)?;
    mesh.curve(&cfg.warp()?);
    let ops = ReferenceOperators::build(cfg.mesh.dim, degree)?;
    let geo = geometric_factors(&mesh, &ops, cfg.metric_mode()?)?;
    let mut scfg = cfg.solver_config()?;
    if let Some(steps) = cfg.run.num_steps {
        let n = degree as f64;
        let d = cfg.mesh.dim as f64;
        let c_n = (n + 1.0) * (n + d) / d;
        let min_ratio = geo
            .elements
            .iter()
            .map(|el| el.j_all.amax() / el.jf.amax())
            .fold(f64::INFINITY, f64::min);
        scfg.final_time = steps as f64 * scfg.cfl * min_ratio / c_n;
    }
    Solver::new(mesh, ops, geo, scfg)
}

/// Run one level of a preset; returns the run output and the L2 error
/// against the exact solution when one exists.
pub fn run_level(cfg: &ExperimentConfig, level: usize) -> Result<(Solver, RunOutput, Option<f64>)> {
    let name = cfg.experiment.name.as_str();
    let gamma = cfg.physics.gamma;
    let solver = build_level_solver(cfg, level)?;
    let out = solver.run(|x| initial_condition(name, gamma, x).expect("initial condition"))?;
    let t = solver.config.final_time;
    let err = if exact_solution(name, gamma, &[0.0; 3], 0.0).is_some() {
        Some(solver.l2_error(&out.final_state, t, |x, t| {
            exact_solution(name, gamma, x, t).unwrap()
        }))
    } else {
        None
    };
    Ok((solver, out, err))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn vortex2d_translates_initial_profile() {
        // solution at time t equals the t=0 profile shifted by (t, 0)
        let gamma = 1.4;
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let x = [rng.random_range(0.0..20.0), rng.random_range(-5.0..5.0), 0.0];
            let t = 5.0;
            let now = vortex2d(gamma, &x, t);
            let shifted = vortex2d(gamma, &[x[0] - t, x[1], 0.0], 0.0);
            for c in 0..5 {
                assert!((now[c] - shifted[c]).abs() < 1e-14, "field {c}");
            }
        }
    }

    #[test]
    fn vortex_states_solve_euler_pointwise() {
        // residual of d/dt u + div f(u) by central differences; catches any
        // inconsistency in the analytic formulas
        let gamma = 1.4;
        let eps = 1e-5;
        let mut rng = ChaCha8Rng::seed_from_u64(123);
        for dim in [2usize, 3] {
            for _ in 0..50 {
                let x = if dim == 2 {
                    [rng.random_range(3.0..7.0), rng.random_range(-2.0..2.0), 0.0]
                } else {
                    [
                        rng.random_range(3.0..7.0),
                        rng.random_range(3.0..7.0),
                        rng.random_range(0.0..1.0),
                    ]
                };
                let t = 0.3;
                let f = |x: &Point, t: f64| -> State {
                    if dim == 2 {
                        vortex2d(gamma, x, t)
                    } else {
                        vortex3d(gamma, x, t)
                    }
                };
                let dudt: Vec<f64> = {
                    let up = f(&x, t + eps);
                    let um = f(&x, t - eps);
                    (0..5).map(|c| (up[c] - um[c]) / (2.0 * eps)).collect()
                };
                let mut divf = [0.0; 5];
                for j in 0..dim {
                    let mut xp = x;
                    let mut xm = x;
                    xp[j] += eps;
                    xm[j] -= eps;
                    let fp = crate::euler::flux(gamma, dim, &f(&xp, t));
                    let fm = crate::euler::flux(gamma, dim, &f(&xm, t));
                    for c in 0..5 {
                        divf[c] += (fp[j][c] - fm[j][c]) / (2.0 * eps);
                    }
                }
                for c in 0..5 {
                    let resid = dudt[c] + divf[c];
                    assert!(
                        resid.abs() < 5e-7,
                        "dim={dim} field {c}: residual {resid:.3e} at {x:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn taylor_green_is_divergence_free_with_positive_pressure() {
        let gamma = 1.4;
        let eps = 1e-6;
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..50 {
            let x = [
                rng.random_range(-PI..PI),
                rng.random_range(-PI..PI),
                rng.random_range(-PI..PI),
            ];
            let u = taylor_green(gamma, &x);
            assert!(u[0] > 0.0);
            assert!(crate::euler::pressure(gamma, &u) > 50.0);
            let mut div = 0.0;
            for j in 0..3 {
                let mut xp = x;
                let mut xm = x;
                xp[j] += eps;
                xm[j] -= eps;
                div += (taylor_green(gamma, &xp)[1 + j] - taylor_green(gamma, &xm)[1 + j])
                    / (2.0 * eps);
            }
            assert!(div.abs() < 1e-8, "div {div:.3e}");
        }
    }

    #[test]
    fn every_preset_parses_and_validates() {
        for name in PRESET_NAMES {
            let cfg = preset(name).unwrap();
            cfg.validate().unwrap();
            assert_eq!(cfg.experiment.name, name);
        }
        assert!(preset("bogus").is_err());
    }
}
