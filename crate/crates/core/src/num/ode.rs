//! Embedded Dormand-Prince 5(4) integrator with component-wise error control
//! and bisection-based event location on the leading state component.

use crate::error::{Error, Result};

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// 4th-order weights of the embedded solution.
const E1: f64 = 5179.0 / 57600.0;
const E3: f64 = 7571.0 / 16695.0;
const E4: f64 = 393.0 / 640.0;
const E5: f64 = -92097.0 / 339200.0;
const E6: f64 = 187.0 / 2100.0;
const E7: f64 = 1.0 / 40.0;
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

/// Right-hand side: `dy/dt = f(t, y)` written into `dydt`.
pub trait Rhs {
    fn eval(&self, t: f64, y: &[f64], dydt: &mut [f64]);
}

impl<F: Fn(f64, &[f64], &mut [f64])> Rhs for F {
    fn eval(&self, t: f64, y: &[f64], dydt: &mut [f64]) {
        self(t, y, dydt)
    }
}

/// Tolerances and limits for one integration.
#[derive(Debug, Clone)]
pub struct OdeControl {
    pub rtol: f64,
    /// Per-component absolute tolerances; length must match the state.
    pub atol: Vec<f64>,
    pub max_steps: usize,
}

impl OdeControl {
    pub fn new(rtol: f64, atol: Vec<f64>) -> Self {
        OdeControl { rtol, atol, max_steps: 2_000_000 }
    }
}

struct Stages {
    k: [Vec<f64>; 7],
    y_tmp: Vec<f64>,
}

impl Stages {
    fn new(n: usize) -> Self {
        Stages {
            k: [
                vec![0.0; n],
                vec![0.0; n],
                vec![0.0; n],
                vec![0.0; n],
                vec![0.0; n],
                vec![0.0; n],
                vec![0.0; n],
            ],
            y_tmp: vec![0.0; n],
        }
    }
}

/// One trial Dormand-Prince step from `(t, y)` of size `h`.
///
/// Writes the 5th-order solution into `y_out` and returns the scaled error
/// estimate (<= 1 means acceptable).
fn dp_step<R: Rhs>(rhs: &R, t: f64, y: &[f64], h: f64, ctrl: &OdeControl, st: &mut Stages, y_out: &mut [f64]) -> f64 {
    let n = y.len();
    rhs.eval(t, y, &mut st.k[0]);
    for i in 0..n {
        st.y_tmp[i] = y[i] + h * A21 * st.k[0][i];
    }
    rhs.eval(t + C2 * h, &st.y_tmp, &mut st.k[1]);
    for i in 0..n {
        st.y_tmp[i] = y[i] + h * (A31 * st.k[0][i] + A32 * st.k[1][i]);
    }
    rhs.eval(t + C3 * h, &st.y_tmp, &mut st.k[2]);
    for i in 0..n {
        st.y_tmp[i] = y[i] + h * (A41 * st.k[0][i] + A42 * st.k[1][i] + A43 * st.k[2][i]);
    }
    rhs.eval(t + C4 * h, &st.y_tmp, &mut st.k[3]);
    for i in 0..n {
        st.y_tmp[i] =
            y[i] + h * (A51 * st.k[0][i] + A52 * st.k[1][i] + A53 * st.k[2][i] + A54 * st.k[3][i]);
    }
    rhs.eval(t + C5 * h, &st.y_tmp, &mut st.k[4]);
    for i in 0..n {
        st.y_tmp[i] = y[i]
            + h * (A61 * st.k[0][i] + A62 * st.k[1][i] + A63 * st.k[2][i] + A64 * st.k[3][i]
                + A65 * st.k[4][i]);
    }
    rhs.eval(t + h, &st.y_tmp, &mut st.k[5]);
    for i in 0..n {
        y_out[i] = y[i]
            + h * (B1 * st.k[0][i] + B3 * st.k[2][i] + B4 * st.k[3][i] + B5 * st.k[4][i]
                + B6 * st.k[5][i]);
    }
    rhs.eval(t + h, y_out, &mut st.k[6]);
    let mut err: f64 = 0.0;
    for i in 0..n {
        let y4 = y[i]
            + h * (E1 * st.k[0][i] + E3 * st.k[2][i] + E4 * st.k[3][i] + E5 * st.k[4][i]
                + E6 * st.k[5][i]
                + E7 * st.k[6][i]);
        let sc = ctrl.atol[i] + ctrl.rtol * y[i].abs().max(y_out[i].abs());
        let e = (y_out[i] - y4) / sc;
        err = err.max(e.abs());
    }
    err
}

/// Outcome of [`integrate`].
pub enum Outcome {
    /// Reached `t_end`.
    Completed,
    /// Event component crossed zero at the recorded time.
    Event { t_event: f64 },
}

/// Integrate from `(t0, y)` to `t_end`, optionally stopping where `y[0]`
/// first crosses below zero (located by bisection to `event_tol` in `t`).
///
/// `y` is updated in place to the final state (at `t_end` or at the event).
pub fn integrate<R: Rhs>(
    rhs: &R,
    t0: f64,
    t_end: f64,
    y: &mut Vec<f64>,
    ctrl: &OdeControl,
    event_on_first: Option<f64>,
) -> Result<(f64, Outcome)> {
    assert_eq!(ctrl.atol.len(), y.len());
    let n = y.len();
    let mut st = Stages::new(n);
    let mut y_next = vec![0.0; n];
    let mut t = t0;
    let mut h = (t_end - t0) * 1e-6;
    let mut steps = 0usize;
    while t < t_end {
        steps += 1;
        if steps > ctrl.max_steps {
            return Err(Error::Numerical(format!(
                "ODE step limit exceeded at t={t:e} (h={h:e})"
            )));
        }
        if t + h > t_end {
            h = t_end - t;
        }
        let err = dp_step(rhs, t, y, h, ctrl, &mut st, &mut y_next);
        if err <= 1.0 {
            // Accepted; check for a sign change of the event component.
            if let Some(event_tol) = event_on_first {
                if y[0] > 0.0 && y_next[0] <= 0.0 {
                    let (t_event, y_event) = locate_event(rhs, t, y, h, ctrl, event_tol)?;
                    *y = y_event;
                    return Ok((t_event, Outcome::Event { t_event }));
                }
            }
            t += h;
            y.copy_from_slice(&y_next);
            let f = (0.9 * err.max(1e-12).powf(-0.2)).clamp(0.2, 5.0);
            h *= f;
        } else {
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
            if !(h.abs() > 0.0) || t + h == t {
                return Err(Error::Numerical(format!("step size underflow at t={t:e}")));
            }
        }
    }
    Ok((t, Outcome::Completed))
}

/// Bisect within an accepted step `[t, t+h]` for the zero of `y[0]`.
fn locate_event<R: Rhs>(
    rhs: &R,
    t: f64,
    y_at_t: &[f64],
    h: f64,
    ctrl: &OdeControl,
    event_tol: f64,
) -> Result<(f64, Vec<f64>)> {
    let sub_ctrl = OdeControl { rtol: ctrl.rtol, atol: ctrl.atol.clone(), max_steps: 100_000 };
    let eval_at = |frac: f64| -> Result<Vec<f64>> {
        let mut ys = y_at_t.to_vec();
        if frac > 0.0 {
            integrate(rhs, t, t + frac * h, &mut ys, &sub_ctrl, None)?;
        }
        Ok(ys)
    };
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    let mut y_hi = eval_at(hi)?;
    for _ in 0..200 {
        if (hi - lo) * h.abs() <= event_tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let y_mid = eval_at(mid)?;
        if y_mid[0] <= 0.0 {
            hi = mid;
            y_hi = y_mid;
        } else {
            lo = mid;
        }
    }
    Ok((t + hi * h, y_hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_is_accurate() {
        let rhs = |_t: f64, y: &[f64], dy: &mut [f64]| {
            dy[0] = -y[0];
        };
        let ctrl = OdeControl::new(1e-12, vec![1e-14]);
        let mut y = vec![1.0];
        integrate(&rhs, 0.0, 3.0, &mut y, &ctrl, None).unwrap();
        assert!((y[0] - (-3.0f64).exp()).abs() < 1e-11);
    }

    #[test]
    fn event_located_on_cosine_zero() {
        // y0 = cos(t) crosses zero at pi/2; y1 carries the sine.
        let rhs = |_t: f64, y: &[f64], dy: &mut [f64]| {
            dy[0] = -y[1];
            dy[1] = y[0];
        };
        let ctrl = OdeControl::new(1e-12, vec![1e-14, 1e-14]);
        let mut y = vec![1.0, 0.0];
        let (t, outcome) = integrate(&rhs, 0.0, 10.0, &mut y, &ctrl, Some(1e-12)).unwrap();
        match outcome {
            Outcome::Event { .. } => {}
            _ => panic!("expected an event"),
        }
        assert!((t - std::f64::consts::FRAC_PI_2).abs() < 1e-9);
        assert!(y[0].abs() < 1e-9);
    }
}
