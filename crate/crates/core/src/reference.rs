//! Exact solutions for the test problems, discrete error norms and convergence orders.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::{DiscreteField, Mesh};
use crate::sbp::{interpolation_matrix, nodes_weights, NodeFamily, SbpOperator};

/// Solution of `u_t + ((1 + cosh x) u)_x = 0` with `u(0, x) = sin(pi x)`, obtained along
/// characteristics; valid while the foot of the characteristic stays finite.
pub fn advection_cosh_solution(t: f64, x: f64) -> Result<f64> {
    advection_cosh_solution_with(t, x, |x0| (PI * x0).sin())
}

/// Same characteristics for an arbitrary initial profile `u0`.
pub fn advection_cosh_solution_with(t: f64, x: f64, u0: impl Fn(f64) -> f64) -> Result<f64> {
    let (sh, ch) = ((0.5 * x).sinh(), (0.5 * x).cosh());
    let y = -t + (0.5 * x).tanh();
    if !(y.abs() < 1.0) {
        return Err(Error::Domain(format!(
            "characteristic through (t={t}, x={x}) leaves the real line"
        )));
    }
    let denom = 1.0 + 2.0 * t * sh * ch - t * t * ch * ch;
    if !(denom > 1e-12) {
        return Err(Error::Domain(format!(
            "degenerate amplitude factor {denom:e} at (t={t}, x={x})"
        )));
    }
    let foot = ((1.0 + y) / (1.0 - y)).ln();
    Ok(u0(foot) / denom)
}

/// Smooth solution of Burgers' equation from the implicit relation `u = u0(x - t u)`.
pub fn burgers_exact(t: f64, x: f64, u0: impl Fn(f64) -> f64) -> Result<f64> {
    let g = |u: f64| u - u0(x - t * u);
    let delta = 1e-6;
    let mut u = u0(x);
    for _ in 0..100 {
        let xi = x - t * u;
        let du0 = (u0(xi + delta) - u0(xi - delta)) / (2.0 * delta);
        let slope = 1.0 + t * du0;
        if slope.abs() < 1e-8 {
            break;
        }
        let step = g(u) / slope;
        u -= step;
        if !u.is_finite() {
            break;
        }
        if step.abs() <= 1e-13 * (1.0 + u.abs()) {
            return Ok(u);
        }
    }
    burgers_bisection(&g)
}

fn burgers_bisection(g: &impl Fn(f64) -> f64) -> Result<f64> {
    const SAMPLES: usize = 300;
    let (lo, hi) = (-1.5, 1.5);
    let at = |k: usize| lo + (hi - lo) * k as f64 / SAMPLES as f64;
    for k in 0..SAMPLES {
        let (mut a, mut b) = (at(k), at(k + 1));
        let (mut ga, gb) = (g(a), g(b));
        if ga == 0.0 {
            return Ok(a);
        }
        if ga * gb > 0.0 {
            continue;
        }
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if mid == a || mid == b {
                break;
            }
            let gm = g(mid);
            if gm == 0.0 {
                return Ok(mid);
            }
            if ga * gm < 0.0 {
                b = mid;
            } else {
                a = mid;
                ga = gm;
            }
        }
        return Ok(0.5 * (a + b));
    }
    Err(Error::Domain(
        "no root of the implicit Burgers relation in [-1.5, 1.5]".into(),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorNorm {
    /// L2 error by a `p+1` point Gauss rule on every element.
    GaussQuadPp1,
    /// `sqrt(e^T M e)` with the nodal error `e`.
    SbpMassNorm,
}

pub fn discrete_error(
    numerical: &DiscreteField,
    exact: impl Fn(f64) -> f64,
    mesh: &Mesh,
    op: &SbpOperator,
    norm: ErrorNorm,
) -> Result<f64> {
    let j = mesh.jacobian();
    let mut sum = 0.0;
    match norm {
        ErrorNorm::GaussQuadPp1 => {
            let (qx, qw) = nodes_weights(NodeFamily::Gauss, op.degree)?;
            let to_quad = interpolation_matrix(&op.nodes, &qx)?;
            let mut values = vec![0.0; qx.len()];
            for e in 0..mesh.elements {
                to_quad.mul_vec_into(numerical.element(e), &mut values);
                for q in 0..qx.len() {
                    let diff = values[q] - exact(mesh.map(e, qx[q]));
                    sum += qw[q] * diff * diff;
                }
            }
        }
        ErrorNorm::SbpMassNorm => {
            for e in 0..mesh.elements {
                for (k, (&xi, v)) in op.nodes.iter().zip(numerical.element(e)).enumerate() {
                    let diff = v - exact(mesh.map(e, xi));
                    sum += op.weights[k] * diff * diff;
                }
            }
        }
    }
    Ok((j * sum).sqrt())
}

/// Experimental orders of convergence for consecutive pairs; `None` where an error is not
/// positive and finite.
pub fn eoc(errors: &[f64], ns: &[usize]) -> Result<Vec<Option<f64>>> {
    if errors.len() != ns.len() || errors.len() < 2 {
        return Err(Error::Configuration(
            "eoc needs two or more matching errors and resolutions".into(),
        ));
    }
    let ok = |e: f64| e.is_finite() && e > 0.0;
    Ok((1..errors.len())
        .map(|k| {
            let (e1, e2) = (errors[k - 1], errors[k]);
            (ok(e1) && ok(e2)).then(|| -(e1 / e2).ln() / (ns[k - 1] as f64 / ns[k] as f64).ln())
        })
        .collect())
}
