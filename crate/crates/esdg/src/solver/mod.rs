//! Semi-discrete entropy-stable right-hand side (flux differencing over the
//! decoupled SBP blocks), low-storage time integration, and diagnostics.

pub mod lsrk;

use crate::euler::{
    self, cons_from_entropy, ec_flux_prim, entropy_unchecked, entropy_vars_unchecked, flux,
    FluxPoint, GasModel, State, MAX_FIELDS,
};
use crate::geometry::{Mesh, MeshGeometry};
use crate::operators::ReferenceOperators;
use crate::wadg::{ConservationFix, ElementMassOps, MassMode};
use crate::{Error, Point, Result};
use nalgebra::{DMatrix, DMatrixView, DMatrixViewMut};
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FluxMode {
    /// Entropy-conservative interface fluxes.
    Ec,
    /// Entropy-conservative fluxes plus Lax-Friedrichs penalty.
    EcLf,
}

impl FluxMode {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "ec" => FluxMode::Ec,
            "ec_lf" => FluxMode::EcLf,
            _ => return Err(Error::Config(format!("unknown flux mode '{s}'"))),
        })
    }
    pub fn name(&self) -> &'static str {
        match self {
            FluxMode::Ec => "ec",
            FluxMode::EcLf => "ec_lf",
        }
    }
}

/// Which projection produces the entropy-variable coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProjectionMode {
    /// The projection matched to the mass mode (weighted or weight-adjusted);
    /// required for semi-discrete entropy conservation on curved meshes.
    Wadg,
    /// Plain reference-element L2 projection (comparison runs only).
    Reference,
}

impl ProjectionMode {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "wadg" => ProjectionMode::Wadg,
            "reference" => ProjectionMode::Reference,
            _ => return Err(Error::Config(format!("unknown projection mode '{s}'"))),
        })
    }
    pub fn name(&self) -> &'static str {
        match self {
            ProjectionMode::Wadg => "wadg",
            ProjectionMode::Reference => "reference",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub gas: GasModel,
    pub flux: FluxMode,
    pub mass_mode: MassMode,
    pub projection: ProjectionMode,
    pub fix: ConservationFix,
    pub cfl: f64,
    pub final_time: f64,
    /// Time interval between diagnostic records (0 records every step).
    pub output_cadence: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            gas: GasModel::default(),
            flux: FluxMode::EcLf,
            mass_mode: MassMode::Wadg,
            projection: ProjectionMode::Wadg,
            fix: ConservationFix::PolyJ,
            cfl: 0.5,
            final_time: 1.0,
            output_cadence: 0.1,
        }
    }
}

/// Modal solution coefficients, stored contiguously per element with the
/// five state slots as columns (the z-momentum column is zero in 2D).
#[derive(Debug, Clone)]
pub struct SolutionField {
    pub nelem: usize,
    pub n_p: usize,
    pub data: Vec<f64>,
}

impl SolutionField {
    pub fn zeros(nelem: usize, n_p: usize) -> Self {
        SolutionField {
            nelem,
            n_p,
            data: vec![0.0; nelem * n_p * MAX_FIELDS],
        }
    }

    pub fn elem(&self, e: usize) -> DMatrixView<'_, f64> {
        let len = self.n_p * MAX_FIELDS;
        DMatrixView::from_slice(&self.data[e * len..(e + 1) * len], self.n_p, MAX_FIELDS)
    }

    pub fn elem_mut(&mut self, e: usize) -> DMatrixViewMut<'_, f64> {
        let len = self.n_p * MAX_FIELDS;
        DMatrixViewMut::from_slice(&mut self.data[e * len..(e + 1) * len], self.n_p, MAX_FIELDS)
    }
}

/// Per-step scalar diagnostics.
#[derive(Debug, Clone)]
pub struct DiagnosticsRecord {
    pub time: f64,
    /// J-weighted quadrature sum of U(u_q).
    pub entropy: f64,
    /// Instantaneous entropy production of the spatial operator.
    pub entropy_rhs: f64,
    /// d/dt of the conserved integrals, per state slot.
    pub cons_res: [f64; MAX_FIELDS],
    pub kinetic_energy: f64,
    pub min_rho: f64,
    pub min_p: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct RhsStats {
    pub entropy_rhs: f64,
    pub min_rho: f64,
    pub min_p: f64,
}

/// Entropy-projected traces of one element at all quadrature points.
struct Trace {
    utilde: Vec<State>,
    vtilde: Vec<State>,
    fpts: Vec<FluxPoint>,
    min_rho: f64,
    min_p: f64,
}

pub struct Solver {
    pub dim: usize,
    pub degree: usize,
    pub ops: ReferenceOperators,
    pub mesh: Mesh,
    pub geo: MeshGeometry,
    pub mass: Vec<ElementMassOps>,
    pub config: SolverConfig,
    /// |Omega| = sum of w J.
    pub domain_volume: f64,
    // row-major copies for the pair loop
    dn_vv_rm: Vec<Vec<f64>>,
    e_vf_rm: Vec<f64>,
    vf_pq_rm: Vec<f64>,
    bhat: Vec<Vec<f64>>,
    /// per element: G flattened as [point][(j, m)] row-major.
    g_flat: Vec<Vec<f64>>,
}

fn row_major(m: &DMatrix<f64>) -> Vec<f64> {
    let (r, c) = m.shape();
    let mut out = vec![0.0; r * c];
    for i in 0..r {
        for j in 0..c {
            out[i * c + j] = m[(i, j)];
        }
    }
    out
}

impl Solver {
    pub fn new(
        mesh: Mesh,
        ops: ReferenceOperators,
        geo: MeshGeometry,
        config: SolverConfig,
    ) -> Result<Self> {
        if !mesh.is_closed() {
            return Err(Error::Mesh(
                "solver requires a periodically closed mesh (all faces paired)".into(),
            ));
        }
        let dim = mesh.dim;
        let mass: Vec<ElementMassOps> = geo
            .elements
            .iter()
            .map(|el| ElementMassOps::from_geometry(&ops, el, config.mass_mode, config.fix))
            .collect::<Result<Vec<_>>>()?;
        let domain_volume = geo
            .elements
            .iter()
            .map(|el| (0..ops.n_q).map(|q| ops.w[q] * el.j_all[q]).sum::<f64>())
            .sum();
        let dn_vv_rm: Vec<Vec<f64>> = ops.dn_vv.iter().map(row_major).collect();
        let e_vf_rm = row_major(&ops.e_vf);
        let vf_pq_rm = row_major(&ops.vf_pq);
        let bhat: Vec<Vec<f64>> = ops
            .nhat_jhat
            .iter()
            .map(|v| v.iter().copied().collect())
            .collect();
        let dd = dim * dim;
        let n_all = ops.n_q + ops.n_fq_total;
        let g_flat: Vec<Vec<f64>> = geo
            .elements
            .iter()
            .map(|el| {
                let mut g = vec![0.0; n_all * dd];
                for p in 0..n_all {
                    for j in 0..dim {
                        for m in 0..dim {
                            g[p * dd + j * dim + m] = el.g[j][m][p];
                        }
                    }
                }
                g
            })
            .collect();
        Ok(Solver {
            dim,
            degree: mesh.degree,
            ops,
            mesh,
            geo,
            mass,
            config,
            domain_volume,
            dn_vv_rm,
            e_vf_rm,
            vf_pq_rm,
            bhat,
            g_flat,
        })
    }

    pub fn num_elements(&self) -> usize {
        self.mesh.num_elements()
    }

    /// Mass-consistent projection of an initial condition.
    pub fn project_initial<F>(&self, u0: F) -> Result<SolutionField>
    where
        F: Fn(&Point) -> State + Sync,
    {
        let mut field = SolutionField::zeros(self.num_elements(), self.ops.n_p);
        for e in 0..self.num_elements() {
            let vals = DMatrix::from_fn(self.ops.n_q, MAX_FIELDS, |q, c| {
                u0(&self.geo.elements[e].x_all[q])[c]
            });
            let coeffs = self.mass[e].project(&self.ops, &vals);
            field.elem_mut(e).copy_from(&coeffs);
        }
        Ok(field)
    }

    /// dt = CFL min_k ||J||_inf / (C_N ||J_f||_inf) with the simplex trace
    /// constant C_N = (N+1)(N+d)/d.
    pub fn compute_dt(&self) -> f64 {
        let n = self.degree as f64;
        let d = self.dim as f64;
        let c_n = (n + 1.0) * (n + d) / d;
        let min_ratio = self
            .geo
            .elements
            .iter()
            .map(|el| el.j_all.amax() / el.jf.amax())
            .fold(f64::INFINITY, f64::min);
        self.config.cfl * min_ratio / c_n
    }

    fn element_trace(&self, u: DMatrixView<'_, f64>, e: usize, t: f64) -> Result<Trace> {
        let ops = &self.ops;
        let gamma = self.config.gas.gamma;
        let n_all = ops.n_q + ops.n_fq_total;

        let u_q = &ops.v_q * u;
        let mut min_rho = f64::INFINITY;
        let mut min_p = f64::INFINITY;
        let mut v_vals = DMatrix::zeros(ops.n_q, MAX_FIELDS);
        for q in 0..ops.n_q {
            let s: State = std::array::from_fn(|c| u_q[(q, c)]);
            let p = euler::pressure(gamma, &s);
            min_rho = min_rho.min(s[0]);
            min_p = min_p.min(p);
            if !(s[0] > 0.0 && p > 0.0) {
                return Err(Error::Positivity {
                    quantity: if s[0] > 0.0 { "pressure" } else { "density" },
                    value: if s[0] > 0.0 { p } else { s[0] },
                    element: e,
                    time: t,
                });
            }
            let v = entropy_vars_unchecked(gamma, &s);
            for c in 0..MAX_FIELDS {
                v_vals[(q, c)] = v[c];
            }
        }

        let v_h = match self.config.projection {
            ProjectionMode::Wadg => self.mass[e].project(ops, &v_vals),
            ProjectionMode::Reference => &ops.p_q * v_vals,
        };
        let vt_vol = &ops.v_q * &v_h;
        let vt_surf = &ops.v_f * &v_h;

        let mut utilde = Vec::with_capacity(n_all);
        let mut vtilde = Vec::with_capacity(n_all);
        let mut fpts = Vec::with_capacity(n_all);
        for p in 0..n_all {
            let v: State = if p < ops.n_q {
                std::array::from_fn(|c| vt_vol[(p, c)])
            } else {
                std::array::from_fn(|c| vt_surf[(p - ops.n_q, c)])
            };
            let s = cons_from_entropy(gamma, &v);
            let pr = euler::pressure(gamma, &s);
            if !(s[0] > 0.0 && pr > 0.0 && s[0].is_finite()) {
                return Err(Error::Positivity {
                    quantity: "entropy-projected state",
                    value: s[0].min(pr),
                    element: e,
                    time: t,
                });
            }
            fpts.push(FluxPoint::from_state(gamma, &s));
            vtilde.push(v);
            utilde.push(s);
        }
        Ok(Trace {
            utilde,
            vtilde,
            fpts,
            min_rho,
            min_p,
        })
    }

    /// Volume flux-differencing term: all rows of sum_j 2 (D_k^j o F_j) 1,
    /// including the diagonal face-face block.
    fn volume_term(&self, tr: &Trace, e: usize) -> Vec<State> {
        let ops = &self.ops;
        let dim = self.dim;
        let dd = dim * dim;
        let gamma = self.config.gas.gamma;
        let (n_q, n_ft) = (ops.n_q, ops.n_fq_total);
        let g = &self.g_flat[e];
        let mut r = vec![[0.0; MAX_FIELDS]; n_q + n_ft];
        let mut fs = [[0.0; MAX_FIELDS]; 3];

        for a in 0..n_q {
            let ga = &g[a * dd..(a + 1) * dd];
            // volume-volume block (dense), diagonal included
            for b in a..n_q {
                ec_flux_prim(gamma, dim, &tr.fpts[a], &tr.fpts[b], &mut fs);
                let gb = &g[b * dd..(b + 1) * dd];
                for j in 0..dim {
                    let mut ca = 0.0;
                    let mut cb = 0.0;
                    for m in 0..dim {
                        let gbar = 0.5 * (ga[j * dim + m] + gb[j * dim + m]);
                        ca += 2.0 * self.dn_vv_rm[m][a * n_q + b] * gbar;
                        cb += 2.0 * self.dn_vv_rm[m][b * n_q + a] * gbar;
                    }
                    for c in 0..MAX_FIELDS {
                        r[a][c] += ca * fs[j][c];
                    }
                    if b != a {
                        for c in 0..MAX_FIELDS {
                            r[b][c] += cb * fs[j][c];
                        }
                    }
                }
            }
            // volume-face coupling through the lift structure
            for bf in 0..n_ft {
                let b = n_q + bf;
                ec_flux_prim(gamma, dim, &tr.fpts[a], &tr.fpts[b], &mut fs);
                let gb = &g[b * dd..(b + 1) * dd];
                let evf = self.e_vf_rm[a * n_ft + bf];
                let vfpq = self.vf_pq_rm[bf * n_q + a];
                for j in 0..dim {
                    let mut ca = 0.0;
                    let mut cb = 0.0;
                    for m in 0..dim {
                        let gbar = 0.5 * (ga[j * dim + m] + gb[j * dim + m]);
                        let bm = self.bhat[m][bf];
                        ca += evf * bm * gbar;
                        cb -= bm * vfpq * gbar;
                    }
                    for c in 0..MAX_FIELDS {
                        r[a][c] += ca * fs[j][c];
                        r[b][c] += cb * fs[j][c];
                    }
                }
            }
        }
        // diagonal face-face block: n_i J_f f_i(u~)
        let el = &self.geo.elements[e];
        for bf in 0..n_ft {
            let a = n_q + bf;
            let f_phys = flux(gamma, dim, &tr.utilde[a]);
            for j in 0..dim {
                let njf = el.njf[j][bf];
                for c in 0..MAX_FIELDS {
                    r[a][c] += njf * f_phys[j][c];
                }
            }
        }
        r
    }

    fn element_rhs(
        &self,
        traces: &[Trace],
        e: usize,
    ) -> Result<(DMatrix<f64>, f64)> {
        let ops = &self.ops;
        let dim = self.dim;
        let gamma = self.config.gas.gamma;
        let (n_q, n_ft, nfq) = (ops.n_q, ops.n_fq_total, ops.n_fq);
        let tr = &traces[e];
        let el = &self.geo.elements[e];
        let mut fs = [[0.0; MAX_FIELDS]; 3];

        let mut r = self.volume_term(tr, e);

        // interface fluxes
        for face in 0..self.mesh.links[e].len() {
            let Some((pe, pf, perm)) = &self.geo.exchange[e][face] else {
                return Err(Error::Mesh(format!(
                    "element {e} face {face} has no partner"
                )));
            };
            for i in 0..nfq {
                let fidx = face * nfq + i;
                let a = n_q + fidx;
                let nb_idx = n_q + pf * nfq + perm[i];
                let up = &traces[*pe].utilde[nb_idx];
                let um = &tr.utilde[a];
                ec_flux_prim(gamma, dim, &traces[*pe].fpts[nb_idx], &tr.fpts[a], &mut fs);
                let f_self = flux(gamma, dim, um);
                let mut bracket = [0.0; MAX_FIELDS];
                for j in 0..dim {
                    let nj = el.n_unit[j][fidx];
                    for c in 0..MAX_FIELDS {
                        bracket[c] += nj * (fs[j][c] - f_self[j][c]);
                    }
                }
                if self.config.flux == FluxMode::EcLf {
                    let n = [
                        el.n_unit[0][fidx],
                        if dim > 1 { el.n_unit[1][fidx] } else { 0.0 },
                        if dim > 2 { el.n_unit[2][fidx] } else { 0.0 },
                    ];
                    let lam = euler::wavespeed(gamma, um, &n)?
                        .max(euler::wavespeed(gamma, up, &n)?);
                    for c in 0..MAX_FIELDS {
                        bracket[c] -= 0.5 * lam * (up[c] - um[c]);
                    }
                }
                let jf = el.jf[fidx];
                for c in 0..MAX_FIELDS {
                    r[a][c] += jf * bracket[c];
                }
            }
        }

        // entropy production of the spatial operator for this element
        let mut ent = 0.0;
        for q in 0..n_q {
            let mut dot = 0.0;
            for c in 0..MAX_FIELDS {
                dot += tr.vtilde[q][c] * r[q][c];
            }
            ent += ops.w[q] * dot;
        }
        for bf in 0..n_ft {
            let mut dot = 0.0;
            for c in 0..MAX_FIELDS {
                dot += tr.vtilde[n_q + bf][c] * r[n_q + bf][c];
            }
            ent += ops.wf[bf] * dot;
        }

        // weak load b = V_q^T W r_vol + V_f^T W_f r_surf
        let mut rv = DMatrix::zeros(n_q, MAX_FIELDS);
        for q in 0..n_q {
            for c in 0..MAX_FIELDS {
                rv[(q, c)] = ops.w[q] * r[q][c];
            }
        }
        let mut rs = DMatrix::zeros(n_ft, MAX_FIELDS);
        for bf in 0..n_ft {
            for c in 0..MAX_FIELDS {
                rs[(bf, c)] = ops.wf[bf] * r[n_q + bf][c];
            }
        }
        let b = ops.v_q.transpose() * rv + ops.v_f.transpose() * rs;

        let mut dudt = self.mass[e].apply_inverse_mass(ops, &b);
        dudt.neg_mut();

        if self.config.fix == ConservationFix::MeanCorrect {
            let emo = &self.mass[e];
            let uq = &ops.v_q * &dudt;
            for c in 0..MAX_FIELDS {
                let target: f64 = -(0..ops.n_p).map(|r| emo.one_coeffs[r] * b[(r, c)]).sum::<f64>();
                let current: f64 = (0..n_q).map(|q| ops.w[q] * emo.j_vol[q] * uq[(q, c)]).sum();
                let kappa = (target - current) / emo.integral_j;
                for r in 0..ops.n_p {
                    dudt[(r, c)] += kappa * emo.one_coeffs[r];
                }
            }
        }
        Ok((dudt, -ent))
    }

    /// Evaluate du/dt into `out`. Returns scalar stats accumulated in
    /// element-index order (deterministic under any thread count).
    pub fn compute_rhs(
        &self,
        u: &SolutionField,
        t: f64,
        out: &mut SolutionField,
    ) -> Result<RhsStats> {
        self.compute_rhs_flat(&u.data, t, &mut out.data)
    }

    fn compute_rhs_flat(&self, u: &[f64], t: f64, out: &mut [f64]) -> Result<RhsStats> {
        let nelem = self.num_elements();
        let len = self.ops.n_p * MAX_FIELDS;
        let traces: Vec<Trace> = (0..nelem)
            .into_par_iter()
            .map(|e| {
                let view = DMatrixView::from_slice(&u[e * len..(e + 1) * len], self.ops.n_p, MAX_FIELDS);
                self.element_trace(view, e, t)
            })
            .collect::<Result<Vec<_>>>()?;

        let results: Vec<(DMatrix<f64>, f64)> = (0..nelem)
            .into_par_iter()
            .map(|e| self.element_rhs(&traces, e))
            .collect::<Result<Vec<_>>>()?;

        let mut entropy_rhs = 0.0;
        for (e, (dudt, ent)) in results.iter().enumerate() {
            DMatrixViewMut::from_slice(&mut out[e * len..(e + 1) * len], self.ops.n_p, MAX_FIELDS)
                .copy_from(dudt);
            entropy_rhs += ent;
        }
        let min_rho = traces.iter().map(|t| t.min_rho).fold(f64::INFINITY, f64::min);
        let min_p = traces.iter().map(|t| t.min_p).fold(f64::INFINITY, f64::min);
        Ok(RhsStats {
            entropy_rhs,
            min_rho,
            min_p,
        })
    }

    /// Full diagnostics at a state (evaluates the right-hand side once).
    pub fn diagnostics(&self, u: &SolutionField, t: f64) -> Result<DiagnosticsRecord> {
        let mut rhs = SolutionField::zeros(self.num_elements(), self.ops.n_p);
        let stats = self.compute_rhs(u, t, &mut rhs)?;
        let gamma = self.config.gas.gamma;
        let ops = &self.ops;

        let mut entropy = 0.0;
        let mut ke = 0.0;
        let mut cons = [0.0; MAX_FIELDS];
        for e in 0..self.num_elements() {
            let el = &self.geo.elements[e];
            let u_q = &ops.v_q * u.elem(e);
            let r_q = &ops.v_q * rhs.elem(e);
            for q in 0..ops.n_q {
                let wj = ops.w[q] * el.j_all[q];
                let s: State = std::array::from_fn(|c| u_q[(q, c)]);
                entropy += wj * entropy_unchecked(gamma, &s);
                ke += wj * (s[1] * s[1] + s[2] * s[2] + s[3] * s[3]) / s[0];
                for c in 0..MAX_FIELDS {
                    cons[c] += wj * r_q[(q, c)];
                }
            }
        }
        Ok(DiagnosticsRecord {
            time: t,
            entropy,
            entropy_rhs: stats.entropy_rhs,
            cons_res: cons,
            kinetic_energy: ke / self.domain_volume,
            min_rho: stats.min_rho,
            min_p: stats.min_p,
        })
    }

    /// L2 error against an exact solution at time `t`, over all state slots,
    /// using the volume quadrature.
    pub fn l2_error<F>(&self, u: &SolutionField, t: f64, exact: F) -> f64
    where
        F: Fn(&Point, f64) -> State + Sync,
    {
        let ops = &self.ops;
        let per_elem: Vec<f64> = (0..self.num_elements())
            .into_par_iter()
            .map(|e| {
                let el = &self.geo.elements[e];
                let u_q = &ops.v_q * u.elem(e);
                let mut acc = 0.0;
                for q in 0..ops.n_q {
                    let ex = exact(&el.x_all[q], t);
                    let wj = ops.w[q] * el.j_all[q];
                    for c in 0..MAX_FIELDS {
                        acc += wj * (u_q[(q, c)] - ex[c]).powi(2);
                    }
                }
                acc
            })
            .collect();
        per_elem.iter().sum::<f64>().sqrt()
    }

    /// Advance from 0 to the configured final time, recording diagnostics at
    /// the configured cadence.
    pub fn run<F>(&self, u0: F) -> Result<RunOutput>
    where
        F: Fn(&Point) -> State + Sync,
    {
        let mut u = self.project_initial(&u0)?;
        let mut records = vec![self.diagnostics(&u, 0.0)?];
        let tfinal = self.config.final_time;
        if tfinal <= 0.0 {
            return Ok(RunOutput {
                records,
                final_state: u,
            });
        }
        let dt = self.compute_dt();
        let cadence = self.config.output_cadence;
        let mut res = vec![0.0; u.data.len()];
        let mut scratch = vec![0.0; u.data.len()];
        let mut t = 0.0;
        let mut next_out = if cadence > 0.0 { cadence } else { 0.0 };
        while t < tfinal - 1e-12 * tfinal.max(1.0) {
            let step = dt.min(tfinal - t);
            lsrk::lsrk45_step(&mut u.data, &mut res, &mut scratch, t, step, |ud, ts, out| {
                self.compute_rhs_flat(ud, ts, out).map(|_| ())
            })?;
            t += step;
            let due = cadence <= 0.0 || t >= next_out - 1e-12 || t >= tfinal - 1e-12;
            if due {
                records.push(self.diagnostics(&u, t)?);
                while cadence > 0.0 && next_out <= t + 1e-12 {
                    next_out += cadence;
                }
            }
        }
        Ok(RunOutput {
            records,
            final_state: u,
        })
    }
}

pub struct RunOutput {
    pub records: Vec<DiagnosticsRecord>,
    pub final_state: SolutionField,
}

#[cfg(test)]
mod tests;
