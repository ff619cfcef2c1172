//! Small adaptive embedded Runge-Kutta integrator (Dormand-Prince 5(4)).
//!
//! Shared by the profile solver and the Bach-flat explorer. The state is a
//! fixed-size array; the right-hand side is any closure.

/// Dormand-Prince 5(4) Butcher tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

pub struct Dopri5<const N: usize, F>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    pub rhs: F,
    pub tol: f64,
    pub h_min: f64,
}

pub struct Step<const N: usize> {
    pub t: f64,
    pub y: [f64; N],
}

impl<const N: usize, F> Dopri5<N, F>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    pub fn new(rhs: F, tol: f64) -> Self {
        Self {
            rhs,
            tol,
            h_min: 1e-14,
        }
    }

    /// One attempted step of size h from (t, y). Returns the 5th-order
    /// solution and the embedded error estimate.
    fn try_step(&mut self, t: f64, y: &[f64; N], h: f64) -> ([f64; N], f64) {
        let mut k = [[0.0_f64; N]; 7];
        k[0] = (self.rhs)(t, y);
        for s in 1..7 {
            let mut ys = *y;
            for (j, kj) in k.iter().enumerate().take(s) {
                for i in 0..N {
                    ys[i] += h * A[s][j] * kj[i];
                }
            }
            k[s] = (self.rhs)(t + C[s] * h, &ys);
        }
        let mut y5 = *y;
        let mut err = 0.0_f64;
        for i in 0..N {
            let mut d5 = 0.0;
            let mut d4 = 0.0;
            for s in 0..7 {
                d5 += B5[s] * k[s][i];
                d4 += B4[s] * k[s][i];
            }
            y5[i] += h * d5;
            let scale = 1.0 + y[i].abs().max(y5[i].abs());
            err = err.max((h * (d5 - d4)).abs() / scale);
        }
        (y5, err)
    }

    /// Integrates from (t0, y0) until `stop` returns true for an accepted
    /// step, or until t reaches t_end. Calls `observe` on every accepted
    /// step (including the initial state). Returns the final step.
    pub fn integrate<S, O>(
        &mut self,
        t0: f64,
        y0: [f64; N],
        t_end: f64,
        mut stop: S,
        mut observe: O,
    ) -> Result<Step<N>, &'static str>
    where
        S: FnMut(f64, &[f64; N]) -> bool,
        O: FnMut(f64, &[f64; N]),
    {
        let dir = (t_end - t0).signum();
        let mut t = t0;
        let mut y = y0;
        let mut h = dir * ((t_end - t0).abs() / 100.0).clamp(1e-6, 0.1);
        observe(t, &y);
        while (t_end - t) * dir > 0.0 {
            if h.abs() > (t_end - t).abs() {
                h = t_end - t;
            }
            let (y_new, err) = self.try_step(t, &y, h);
            if !err.is_finite() {
                return Err("non-finite error estimate");
            }
            if err <= self.tol {
                t += h;
                y = y_new;
                observe(t, &y);
                if stop(t, &y) {
                    return Ok(Step { t, y });
                }
            }
            let factor = if err > 0.0 {
                0.9 * (self.tol / err).powf(0.2)
            } else {
                5.0
            };
            h *= factor.clamp(0.2, 5.0);
            if h.abs() < self.h_min {
                return Err("step size underflow");
            }
        }
        Ok(Step { t, y })
    }

    /// Integrates exactly to t_target (no event), returning the state there.
    pub fn integrate_to(
        &mut self,
        t0: f64,
        y0: [f64; N],
        t_target: f64,
    ) -> Result<[f64; N], &'static str> {
        if t0 == t_target {
            return Ok(y0);
        }
        let step = self.integrate(t0, y0, t_target, |_, _| false, |_, _| {})?;
        Ok(step.y)
    }
}
