//! Ten-stage, fourth-order strong-stability-preserving Runge-Kutta method in its
//! two-register low-storage form (Ketcheson, 2008).

use crate::error::{Error, Result};

/// Reusable registers for [`Ssprk104::step`].
#[derive(Debug, Clone, Default)]
pub struct Ssprk104 {
    q1: Vec<f64>,
    q2: Vec<f64>,
    k: Vec<f64>,
    stage: Vec<f64>,
}

impl Ssprk104 {
    pub fn new(dim: usize) -> Self {
        Self {
            q1: vec![0.0; dim],
            q2: vec![0.0; dim],
            k: vec![0.0; dim],
            stage: vec![0.0; dim],
        }
    }

    /// Advances `u` in place from `t` to `t + dt`.
    pub fn step<F>(&mut self, rhs: &F, u: &mut [f64], t: f64, dt: f64) -> Result<()>
    where
        F: Fn(f64, &[f64], &mut [f64]) + ?Sized,
    {
        let n = u.len();
        if self.q1.len() != n {
            *self = Self::new(n);
        }
        // The registers hold increments relative to `u`, so the O(1) state is only
        // touched once per stage; this keeps linear invariants free of rounding drift.
        let Self { q1, q2, k, stage } = self;
        q1.fill(0.0);
        q2.fill(0.0);
        let sixth = dt / 6.0;
        let mut eval = |q1: &mut [f64], k: &mut [f64], time: f64| {
            for i in 0..n {
                stage[i] = u[i] + q1[i];
            }
            rhs(time, stage, k);
        };
        for j in 0..5 {
            eval(q1, k, t + j as f64 * sixth);
            axpy(q1, sixth, k);
        }
        for (a, b) in q1.iter_mut().zip(q2.iter_mut()) {
            // In full registers: q2 = (q2 + 9 q1) / 25, q1 = 15 q2 - 5 q1.
            *b = (*b + 9.0 * *a) / 25.0;
            *a = 15.0 * *b - 5.0 * *a;
        }
        for j in 5..9 {
            eval(q1, k, t + (j - 3) as f64 * sixth);
            axpy(q1, sixth, k);
        }
        eval(q1, k, t + dt);
        for i in 0..n {
            u[i] += q2[i] + 0.6 * q1[i] + 0.1 * dt * k[i];
        }
        if u.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence { t: t + dt });
        }
        Ok(())
    }
}

fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// One step from `(t, u)`; returns the new state.
pub fn ssprk104_step<F>(rhs: &F, u: &[f64], t: f64, dt: f64) -> Result<Vec<f64>>
where
    F: Fn(f64, &[f64], &mut [f64]) + ?Sized,
{
    if !(dt > 0.0) {
        return Err(Error::Configuration(format!(
            "time step must be positive, got {dt}"
        )));
    }
    let mut out = u.to_vec();
    Ssprk104::new(u.len()).step(rhs, &mut out, t, dt)?;
    Ok(out)
}

/// Integrates from `t0` to `t_end` with fixed steps `dt`, shortening the last one to land
/// on `t_end`. The observer sees `(t, u)` after every step.
pub fn integrate<F, O>(
    rhs: &F,
    u0: &[f64],
    t0: f64,
    t_end: f64,
    dt: f64,
    mut observer: O,
) -> Result<Vec<f64>>
where
    F: Fn(f64, &[f64], &mut [f64]) + ?Sized,
    O: FnMut(f64, &[f64]),
{
    if !(t_end > t0) {
        return Err(Error::Configuration(format!(
            "final time {t_end} must exceed start {t0}"
        )));
    }
    if !(dt > 0.0) {
        return Err(Error::Configuration(format!(
            "time step must be positive, got {dt}"
        )));
    }
    let mut u = u0.to_vec();
    let mut stepper = Ssprk104::new(u.len());
    // Step count chosen so that a dt dividing the interval up to rounding gives equal steps.
    let steps = ((t_end - t0) / dt * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    let mut t = t0;
    for k in 1..=steps {
        let t_next = if k == steps {
            t_end
        } else {
            t0 + k as f64 * dt
        };
        stepper.step(rhs, &mut u, t, t_next - t)?;
        t = t_next;
        observer(t, &u);
    }
    Ok(u)
}
