//! Five-stage fourth-order low-storage Runge-Kutta stepping.

use crate::Result;

pub const LSRK45_A: [f64; 5] = [
    0.0,
    -567301805773.0 / 1357537059087.0,
    -2404267990393.0 / 2016746695238.0,
    -3550918686646.0 / 2091501179385.0,
    -1275806237668.0 / 842570457699.0,
];
pub const LSRK45_B: [f64; 5] = [
    1432997174477.0 / 9575080441755.0,
    5161836677717.0 / 13612068292357.0,
    1720146321549.0 / 2090206949498.0,
    3134564353537.0 / 4481467310338.0,
    2277821191437.0 / 14882151754819.0,
];
pub const LSRK45_C: [f64; 5] = [
    0.0,
    1432997174477.0 / 9575080441755.0,
    2526269341429.0 / 6820363962896.0,
    2006345519317.0 / 3224310063776.0,
    2802321613138.0 / 2924317926251.0,
];

/// Advance `u` by one step of size `dt`. `rhs(u, t, out)` evaluates du/dt;
/// `res` is the single low-storage residual register (same length as `u`)
/// and `scratch` receives rhs evaluations.
pub fn lsrk45_step<F>(
    u: &mut [f64],
    res: &mut [f64],
    scratch: &mut [f64],
    t: f64,
    dt: f64,
    mut rhs: F,
) -> Result<()>
where
    F: FnMut(&[f64], f64, &mut [f64]) -> Result<()>,
{
    if dt == 0.0 {
        return Ok(());
    }
    res.fill(0.0);
    for stage in 0..5 {
        rhs(u, t + LSRK45_C[stage] * dt, scratch)?;
        let a = LSRK45_A[stage];
        let b = LSRK45_B[stage];
        for i in 0..u.len() {
            res[i] = a * res[i] + dt * scratch[i];
            u[i] += b * res[i];
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn decay_step(u0: f64, dt: f64, steps: usize) -> f64 {
        let mut u = [u0];
        let mut res = [0.0];
        let mut scratch = [0.0];
        let mut t = 0.0;
        for _ in 0..steps {
            lsrk45_step(&mut u, &mut res, &mut scratch, t, dt, |u, _, out| {
                out[0] = -u[0];
                Ok(())
            })
            .unwrap();
            t += dt;
        }
        u[0]
    }

    #[test]
    fn single_step_matches_exponential() {
        let got = decay_step(1.0, 0.1, 1);
        assert!((got - (-0.1f64).exp()).abs() < 1e-7);
    }

    #[test]
    fn fourth_order_in_time() {
        // error slope on u' = -u over [0, 1]
        let exact = (-1.0f64).exp();
        let mut errs = Vec::new();
        for steps in [8usize, 16, 32, 64] {
            let dt = 1.0 / steps as f64;
            errs.push((decay_step(1.0, dt, steps) - exact).abs());
        }
        for w in errs.windows(2) {
            let rate = (w[0] / w[1]).log2();
            assert!(rate >= 3.9, "rate {rate}");
        }
    }

    #[test]
    fn zero_dt_is_identity() {
        let mut u = [1.25, -0.5];
        let before = u;
        let mut res = [0.0; 2];
        let mut scratch = [0.0; 2];
        lsrk45_step(&mut u, &mut res, &mut scratch, 0.0, 0.0, |_, _, out| {
            out.fill(f64::NAN);
            Ok(())
        })
        .unwrap();
        assert_eq!(u, before);
    }
}
