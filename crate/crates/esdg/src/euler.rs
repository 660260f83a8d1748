//! Compressible Euler physics: state conversions, entropy function and
//! variables, entropy-conservative two-point fluxes, and interface
//! dissipation.
//!
//! States use a fixed layout `[rho, m_x, m_y, m_z, E]` in both 2D and 3D;
//! the z-momentum slot is zero in 2D. This keeps the flux kernel branch-free
//! and uniform across dimensions.

use crate::{Error, Result};

pub const MAX_FIELDS: usize = 5;

/// Conservative state `[rho, m_x, m_y, m_z, E]`.
pub type State = [f64; MAX_FIELDS];

/// Entropy-variable vector in the same slot layout: `[v_1, v_mx, v_my, v_mz, v_E]`.
pub type EntropyState = [f64; MAX_FIELDS];

#[derive(Debug, Clone, Copy)]
pub struct GasModel {
    pub gamma: f64,
}

impl Default for GasModel {
    fn default() -> Self {
        GasModel { gamma: 1.4 }
    }
}

impl GasModel {
    pub fn new(gamma: f64) -> Result<Self> {
        if gamma <= 1.0 {
            return Err(Error::Config(format!("gamma must exceed 1, got {gamma}")));
        }
        Ok(GasModel { gamma })
    }
}

pub fn num_fields(dim: usize) -> usize {
    dim + 2
}

#[inline]
pub fn internal_energy(u: &State) -> f64 {
    u[4] - 0.5 * (u[1] * u[1] + u[2] * u[2] + u[3] * u[3]) / u[0]
}

#[inline]
pub fn pressure(gamma: f64, u: &State) -> f64 {
    (gamma - 1.0) * internal_energy(u)
}

pub fn check_admissible(gamma: f64, u: &State) -> Result<()> {
    if !(u[0] > 0.0) {
        return Err(Error::Positivity {
            quantity: "density",
            value: u[0],
            element: usize::MAX,
            time: f64::NAN,
        });
    }
    let p = pressure(gamma, u);
    if !(p > 0.0) {
        return Err(Error::Positivity {
            quantity: "pressure",
            value: p,
            element: usize::MAX,
            time: f64::NAN,
        });
    }
    Ok(())
}

/// Physical specific entropy s = log(p / rho^gamma).
#[inline]
pub fn specific_entropy(gamma: f64, u: &State) -> f64 {
    pressure(gamma, u).ln() - gamma * u[0].ln()
}

/// Mathematical entropy U(u) = -rho s / (gamma - 1).
pub fn entropy(gamma: f64, u: &State) -> Result<f64> {
    check_admissible(gamma, u)?;
    Ok(-u[0] * specific_entropy(gamma, u) / (gamma - 1.0))
}

#[inline]
pub fn entropy_unchecked(gamma: f64, u: &State) -> f64 {
    -u[0] * specific_entropy(gamma, u) / (gamma - 1.0)
}

/// Entropy variables v = dU/du.
pub fn entropy_vars(gamma: f64, u: &State) -> Result<EntropyState> {
    check_admissible(gamma, u)?;
    Ok(entropy_vars_unchecked(gamma, u))
}

#[inline]
pub fn entropy_vars_unchecked(gamma: f64, u: &State) -> EntropyState {
    // gradient of U = -rho s / (gamma - 1); the 1/(gamma-1) scaling is what
    // makes the potential come out as psi_j = rho u_j
    let rho_e = internal_energy(u);
    let s = ((gamma - 1.0) * rho_e).ln() - gamma * u[0].ln();
    let gm = (gamma - 1.0) * rho_e;
    [
        (rho_e * (gamma + 1.0 - s) - u[4]) / gm,
        u[1] / gm,
        u[2] / gm,
        u[3] / gm,
        -u[0] / gm,
    ]
}

/// Conservative variables from entropy variables.
#[inline]
pub fn cons_from_entropy(gamma: f64, v: &EntropyState) -> State {
    let g1 = gamma - 1.0;
    let w = [g1 * v[0], g1 * v[1], g1 * v[2], g1 * v[3], g1 * v[4]];
    let wsq = w[1] * w[1] + w[2] * w[2] + w[3] * w[3];
    let s = gamma - w[0] + 0.5 * wsq / w[4];
    let rho_e =
        (g1 / (-w[4]).powf(gamma)).powf(1.0 / g1) * (-s / g1).exp();
    [
        -rho_e * w[4],
        rho_e * w[1],
        rho_e * w[2],
        rho_e * w[3],
        rho_e * (1.0 - 0.5 * wsq / w[4]),
    ]
}

/// Entropy flux F_j = u_j U(u).
pub fn entropy_flux(gamma: f64, u: &State, j: usize) -> f64 {
    entropy_unchecked(gamma, u) * u[1 + j] / u[0]
}

/// Entropy potential psi_j = rho u_j.
#[inline]
pub fn entropy_potential(u: &State, j: usize) -> f64 {
    u[1 + j]
}

/// Physical flux vectors f_j(u) for j = 0..dim.
pub fn flux(gamma: f64, dim: usize, u: &State) -> [State; 3] {
    let p = pressure(gamma, u);
    let mut out = [[0.0; MAX_FIELDS]; 3];
    for j in 0..dim {
        let uj = u[1 + j] / u[0];
        out[j][0] = u[1 + j];
        for i in 0..3 {
            out[j][1 + i] = u[1 + i] * uj;
        }
        out[j][1 + j] += p;
        out[j][4] = (u[4] + p) * uj;
    }
    out
}

/// Logarithmic mean (a-b)/(log a - log b) with a series branch near a = b.
#[inline]
pub fn log_mean(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::Config(format!(
            "log mean requires positive arguments, got {a}, {b}"
        )));
    }
    Ok(log_mean_with_ln(a, b, a.ln(), b.ln()))
}

/// Logarithmic mean with precomputed logarithms (hot-loop form).
#[inline]
pub fn log_mean_with_ln(a: f64, b: f64, ln_a: f64, ln_b: f64) -> f64 {
    let zeta = (a - b) / (a + b);
    let z2 = zeta * zeta;
    if z2 < 1e-4 {
        // log((1+z)/(1-z)) = 2z(1 + z^2/3 + z^4/5 + z^6/7 + ...)
        0.5 * (a + b) / (1.0 + z2 * (1.0 / 3.0 + z2 * (0.2 + z2 / 7.0)))
    } else {
        (a - b) / (ln_a - ln_b)
    }
}

/// Per-point primitive bundle precomputed once per quadrature point, so that
/// the pairwise flux kernel needs no logarithms or divisions by rho.
#[derive(Debug, Clone, Copy)]
pub struct FluxPoint {
    pub rho: f64,
    pub vel: [f64; 3],
    pub beta: f64,
    pub ln_rho: f64,
    pub ln_beta: f64,
}

impl FluxPoint {
    #[inline]
    pub fn from_state(gamma: f64, u: &State) -> Self {
        let p = pressure(gamma, u);
        let beta = 0.5 * u[0] / p;
        FluxPoint {
            rho: u[0],
            vel: [u[1] / u[0], u[2] / u[0], u[3] / u[0]],
            beta,
            ln_rho: u[0].ln(),
            ln_beta: beta.ln(),
        }
    }
}

/// Entropy-conservative two-point flux (kinetic-energy-preserving family),
/// all `dim` directions at once.
#[inline]
pub fn ec_flux_prim(gamma: f64, dim: usize, l: &FluxPoint, r: &FluxPoint, out: &mut [State; 3]) {
    let rho_log = log_mean_with_ln(l.rho, r.rho, l.ln_rho, r.ln_rho);
    let beta_log = log_mean_with_ln(l.beta, r.beta, l.ln_beta, r.ln_beta);
    let rho_avg = 0.5 * (l.rho + r.rho);
    let beta_avg = 0.5 * (l.beta + r.beta);
    let p_avg = 0.5 * rho_avg / beta_avg;
    let ua = [
        0.5 * (l.vel[0] + r.vel[0]),
        0.5 * (l.vel[1] + r.vel[1]),
        0.5 * (l.vel[2] + r.vel[2]),
    ];
    // ||u||^2_avg = 2 sum avg(u_i)^2 - sum avg(u_i^2)
    let mut usq_avg = 0.0;
    for i in 0..3 {
        usq_avg += 2.0 * ua[i] * ua[i] - 0.5 * (l.vel[i] * l.vel[i] + r.vel[i] * r.vel[i]);
    }
    let e_avg = rho_log * (0.5 / ((gamma - 1.0) * beta_log) + 0.5 * usq_avg);
    for j in 0..dim {
        let f1 = rho_log * ua[j];
        out[j][0] = f1;
        out[j][1] = f1 * ua[0];
        out[j][2] = f1 * ua[1];
        out[j][3] = f1 * ua[2];
        out[j][1 + j] += p_avg;
        out[j][4] = (e_avg + p_avg) * ua[j];
    }
}

/// Entropy-conservative flux from conservative states, with admissibility
/// checks.
pub fn ec_flux(gamma: f64, dim: usize, ul: &State, ur: &State) -> Result<[State; 3]> {
    check_admissible(gamma, ul)?;
    check_admissible(gamma, ur)?;
    let l = FluxPoint::from_state(gamma, ul);
    let r = FluxPoint::from_state(gamma, ur);
    let mut out = [[0.0; MAX_FIELDS]; 3];
    ec_flux_prim(gamma, dim, &l, &r, &mut out);
    Ok(out)
}

/// Wavespeed estimate |u.n| + c.
pub fn wavespeed(gamma: f64, u: &State, n: &[f64; 3]) -> Result<f64> {
    check_admissible(gamma, u)?;
    let p = pressure(gamma, u);
    let un = (u[1] * n[0] + u[2] * n[1] + u[3] * n[2]) / u[0];
    Ok(un.abs() + (gamma * p / u[0]).sqrt())
}

/// Lax-Friedrichs penalty -(lambda/2)(u_R - u_L) with lambda the max
/// wavespeed of the two states.
pub fn lf_dissipation(gamma: f64, ul: &State, ur: &State, n: &[f64; 3]) -> Result<State> {
    let lam = wavespeed(gamma, ul, n)?.max(wavespeed(gamma, ur, n)?);
    let mut out = [0.0; MAX_FIELDS];
    for i in 0..MAX_FIELDS {
        out[i] = -0.5 * lam * (ur[i] - ul[i]);
    }
    Ok(out)
}
