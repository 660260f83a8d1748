//! Reference mass/projection/lift/differentiation matrices and the decoupled
//! summation-by-parts operators built on top of them.

use crate::refelem::{
    basis_dim, eval_basis, face_quadrature, simplex_quadrature, QuadratureRule, ReferenceElement,
};
use crate::{Error, Point, Result};
use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

/// Build-acceptance threshold separating roundoff from rule-exactness
/// violations.
pub const BUILD_TOL: f64 = 1e-10;

/// Quadrature-based reference operators for one (dim, N) pair.
///
/// The decoupled SBP operator over volume + surface quadrature points is kept
/// in block form: the dense volume-volume block `dn_vv`, the volume-face and
/// face-volume blocks through `e_vf = V_q L_q` and `vf_pq = V_f P_q` scaled by
/// the diagonal `nhat_jhat`, and the diagonal face-face block.
pub struct ReferenceOperators {
    pub dim: usize,
    pub degree: usize,
    pub refelem: ReferenceElement,
    pub vol_rule: QuadratureRule,
    pub face_rule: QuadratureRule,
    /// Surface quadrature points stacked face by face.
    pub face_points: Vec<Point>,
    pub n_p: usize,
    pub n_q: usize,
    /// Points per face.
    pub n_fq: usize,
    /// Total surface points (num_faces * n_fq).
    pub n_fq_total: usize,
    pub w: DVector<f64>,
    pub wf: DVector<f64>,
    /// nhat_jhat[i][a] = n̂_i(a) * Ĵ_f(a) on stacked face points.
    pub nhat_jhat: Vec<DVector<f64>>,
    pub v_q: DMatrix<f64>,
    pub v_f: DMatrix<f64>,
    /// Gradient Vandermonde at volume points, per reference direction.
    pub vx: Vec<DMatrix<f64>>,
    pub m: DMatrix<f64>,
    pub m_chol: Cholesky<f64, Dyn>,
    pub p_q: DMatrix<f64>,
    pub l_q: DMatrix<f64>,
    /// Modal differentiation matrices.
    pub d: Vec<DMatrix<f64>>,
    /// Volume-volume block of the decoupled SBP operator, per direction.
    pub dn_vv: Vec<DMatrix<f64>>,
    /// V_q L_q (N_q x N_fq_total).
    pub e_vf: DMatrix<f64>,
    /// V_f P_q (N_fq_total x N_q).
    pub vf_pq: DMatrix<f64>,
}

impl ReferenceOperators {
    /// Build with default rules: volume degree 2N+1, face degree 2N+1.
    pub fn build(dim: usize, degree: usize) -> Result<Self> {
        let re = ReferenceElement::new(dim)?;
        let vol = simplex_quadrature(dim, 2 * degree + 1)?;
        let face = face_quadrature(dim, 2 * degree + 1)?;
        Self::build_with_rules(re, degree, vol, face)
    }

    /// Build from explicit rules; validates the operator identities.
    pub fn build_with_rules(
        refelem: ReferenceElement,
        degree: usize,
        vol_rule: QuadratureRule,
        face_rule: QuadratureRule,
    ) -> Result<Self> {
        if vol_rule.exactness_degree + 1 < 2 * degree {
            return Err(Error::QuadratureTooWeak(format!(
                "volume rule exact to {} but integration by parts needs 2N-1 = {}",
                vol_rule.exactness_degree,
                2 * degree.max(1) - 1
            )));
        }
        if face_rule.exactness_degree < 2 * degree {
            return Err(Error::QuadratureTooWeak(format!(
                "face rule exact to {} but surface products need 2N = {}",
                face_rule.exactness_degree,
                2 * degree
            )));
        }
        let ops = Self::build_unchecked(refelem, degree, vol_rule, face_rule)?;
        let report = verify_operators(&ops);
        if report.max_residual() > BUILD_TOL {
            return Err(Error::OperatorIdentity {
                identity: report.worst_identity(),
                residual: report.max_residual(),
                tol: BUILD_TOL,
            });
        }
        Ok(ops)
    }

    /// Assemble without validating identities (diagnostics only).
    pub fn build_unchecked(
        refelem: ReferenceElement,
        degree: usize,
        vol_rule: QuadratureRule,
        face_rule: QuadratureRule,
    ) -> Result<Self> {
        let dim = refelem.dim;
        let n_p = basis_dim(dim, degree);
        let n_q = vol_rule.len();
        let n_fq = face_rule.len();
        let nfaces = refelem.num_faces();
        let n_fq_total = nfaces * n_fq;

        let vol_eval = eval_basis(dim, degree, &vol_rule.points)?;
        let v_q = vol_eval.v;
        let vx: Vec<DMatrix<f64>> = vol_eval.grad.into_iter().take(dim).collect();

        let mut face_points = Vec::with_capacity(n_fq_total);
        for f in 0..nfaces {
            face_points.extend(refelem.map_to_face(f, &face_rule.points));
        }
        let v_f = eval_basis(dim, degree, &face_points)?.v;

        let w = DVector::from_vec(vol_rule.weights.clone());
        let mut wf = DVector::zeros(n_fq_total);
        let mut nhat_jhat = vec![DVector::zeros(n_fq_total); dim];
        for f in 0..nfaces {
            for q in 0..n_fq {
                let a = f * n_fq + q;
                wf[a] = face_rule.weights[q];
                for i in 0..dim {
                    nhat_jhat[i][a] = refelem.ref_normals[f][i] * refelem.ref_face_jacobian[f];
                }
            }
        }

        // M = V_q^T W V_q
        let wvq = {
            let mut t = v_q.clone();
            for (r, mut row) in t.row_iter_mut().enumerate() {
                row *= w[r];
            }
            t
        };
        let m = v_q.transpose() * &wvq;
        let m_chol = Cholesky::new(m.clone()).ok_or(Error::OperatorIdentity {
            identity: "mass matrix positive definite",
            residual: f64::INFINITY,
            tol: BUILD_TOL,
        })?;

        // P_q = M^{-1} V_q^T W, L_q = M^{-1} V_f^T W_f
        let p_q = m_chol.solve(&wvq.transpose());
        let wvf = {
            let mut t = v_f.clone();
            for (r, mut row) in t.row_iter_mut().enumerate() {
                row *= wf[r];
            }
            t
        };
        let l_q = m_chol.solve(&wvf.transpose());

        // modal differentiation D_i = P_q Vx_i
        let d: Vec<DMatrix<f64>> = vx.iter().map(|vxi| &p_q * vxi).collect();

        let e_vf = &v_q * &l_q;
        let vf_pq = &v_f * &p_q;

        // volume-volume SBP block: V_q D_i P_q - 1/2 (V_q L_q) B̂_i (V_f P_q)
        let dn_vv: Vec<DMatrix<f64>> = (0..dim)
            .map(|i| {
                let mut b_vfpq = vf_pq.clone();
                for (r, mut row) in b_vfpq.row_iter_mut().enumerate() {
                    row *= nhat_jhat[i][r];
                }
                &v_q * &d[i] * &p_q - 0.5 * &e_vf * b_vfpq
            })
            .collect();

        Ok(ReferenceOperators {
            dim,
            degree,
            refelem,
            vol_rule,
            face_rule,
            face_points,
            n_p,
            n_q,
            n_fq,
            n_fq_total,
            w,
            wf,
            nhat_jhat,
            v_q,
            v_f,
            vx,
            m,
            m_chol,
            p_q,
            l_q,
            d,
            dn_vv,
            e_vf,
            vf_pq,
        })
    }

    /// Dense assembly of the decoupled SBP operator D_N^i (verification and
    /// brute-force oracles; the solver uses the block form).
    pub fn dn_dense(&self, i: usize) -> DMatrix<f64> {
        let n = self.n_q + self.n_fq_total;
        let mut dn = DMatrix::zeros(n, n);
        dn.view_mut((0, 0), (self.n_q, self.n_q))
            .copy_from(&self.dn_vv[i]);
        for a in 0..self.n_q {
            for b in 0..self.n_fq_total {
                dn[(a, self.n_q + b)] = 0.5 * self.e_vf[(a, b)] * self.nhat_jhat[i][b];
            }
        }
        for a in 0..self.n_fq_total {
            for b in 0..self.n_q {
                dn[(self.n_q + a, b)] = -0.5 * self.nhat_jhat[i][a] * self.vf_pq[(a, b)];
            }
            dn[(self.n_q + a, self.n_q + a)] = 0.5 * self.nhat_jhat[i][a];
        }
        dn
    }

    /// Stacked volume + surface quadrature weights (the diagonal of W_N).
    pub fn w_n(&self) -> DVector<f64> {
        let mut w = DVector::zeros(self.n_q + self.n_fq_total);
        w.rows_mut(0, self.n_q).copy_from(&self.w);
        w.rows_mut(self.n_q, self.n_fq_total).copy_from(&self.wf);
        w
    }

    /// Apply D_N^i to a stacked [volume; surface] vector using the block
    /// structure.
    pub fn apply_dn(&self, i: usize, v: &DVector<f64>) -> DVector<f64> {
        let (nq, nf) = (self.n_q, self.n_fq_total);
        let v_vol = v.rows(0, nq);
        let v_surf = v.rows(nq, nf);
        let mut out = DVector::zeros(nq + nf);

        let mut top = &self.dn_vv[i] * v_vol;
        let bsurf = DVector::from_fn(nf, |a, _| 0.5 * self.nhat_jhat[i][a] * v_surf[a]);
        top += &self.e_vf * &bsurf;
        out.rows_mut(0, nq).copy_from(&top);

        let vfpq_v = &self.vf_pq * v_vol;
        for a in 0..nf {
            out[nq + a] = 0.5 * self.nhat_jhat[i][a] * (v_surf[a] - vfpq_v[a]);
        }
        out
    }
}

/// Residuals of the operator identities; all should be at roundoff level for
/// sufficiently exact rules.
#[derive(Debug, Clone)]
pub struct OperatorReport {
    /// max_i || Q_N^i + (Q_N^i)^T - B_N^i ||_max
    pub sbp_residual: f64,
    /// max_i || D_N^i 1 ||_max
    pub null_vector_residual: f64,
    /// max_i || D_N^i [V_q; V_f] - [V_q D_i; 0] ||_max
    pub poly_exactness_residual: f64,
    /// || P_q V_q - I ||_max
    pub projection_residual: f64,
    /// || M M^{-1} - I ||_max via the stored factorization
    pub mass_inverse_residual: f64,
}

impl OperatorReport {
    pub fn max_residual(&self) -> f64 {
        self.sbp_residual
            .max(self.null_vector_residual)
            .max(self.poly_exactness_residual)
            .max(self.projection_residual)
            .max(self.mass_inverse_residual)
    }

    pub fn worst_identity(&self) -> &'static str {
        let pairs = [
            (self.sbp_residual, "Q_N + Q_N^T = B_N"),
            (self.null_vector_residual, "D_N 1 = 0"),
            (self.poly_exactness_residual, "D_N [V_q; V_f] = [V_q D; 0]"),
            (self.projection_residual, "P_q V_q = I"),
            (self.mass_inverse_residual, "M M^{-1} = I"),
        ];
        pairs
            .iter()
            .max_by(|a, b| a.0.partial_cmp(&b.0).unwrap())
            .unwrap()
            .1
    }

    pub fn ok(&self, tol: f64) -> bool {
        self.max_residual() <= tol
    }
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0f64, |acc, &x| acc.max(x.abs()))
}

/// Evaluate all operator identities and report their residuals.
pub fn verify_operators(ops: &ReferenceOperators) -> OperatorReport {
    let n_all = ops.n_q + ops.n_fq_total;
    let wn = ops.w_n();

    let mut sbp: f64 = 0.0;
    let mut nullv: f64 = 0.0;
    let mut poly: f64 = 0.0;
    for i in 0..ops.dim {
        let dn = ops.dn_dense(i);
        // Q_N = W_N D_N
        let mut qn = dn.clone();
        for (r, mut row) in qn.row_iter_mut().enumerate() {
            row *= wn[r];
        }
        let mut bn = DMatrix::zeros(n_all, n_all);
        for a in 0..ops.n_fq_total {
            bn[(ops.n_q + a, ops.n_q + a)] = ops.wf[a] * ops.nhat_jhat[i][a];
        }
        sbp = sbp.max(max_abs(&(&qn + qn.transpose() - bn)));

        let ones = DVector::from_element(n_all, 1.0);
        nullv = nullv.max((&dn * ones).amax());

        let mut vqvf = DMatrix::zeros(n_all, ops.n_p);
        vqvf.view_mut((0, 0), (ops.n_q, ops.n_p)).copy_from(&ops.v_q);
        vqvf.view_mut((ops.n_q, 0), (ops.n_fq_total, ops.n_p))
            .copy_from(&ops.v_f);
        let mut expect = DMatrix::zeros(n_all, ops.n_p);
        expect
            .view_mut((0, 0), (ops.n_q, ops.n_p))
            .copy_from(&(&ops.v_q * &ops.d[i]));
        poly = poly.max(max_abs(&(&dn * vqvf - expect)));
    }

    let projection_residual = max_abs(&(&ops.p_q * &ops.v_q - DMatrix::identity(ops.n_p, ops.n_p)));
    let minv_m = ops.m_chol.solve(&ops.m);
    let mass_inverse_residual = max_abs(&(minv_m - DMatrix::identity(ops.n_p, ops.n_p)));

    OperatorReport {
        sbp_residual: sbp,
        null_vector_residual: nullv,
        poly_exactness_residual: poly,
        projection_residual,
        mass_inverse_residual,
    }
}
