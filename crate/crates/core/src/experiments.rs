//! Drivers for the numerical experiments and their CSV output.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::advection::{total_mass, AdvectionScheme, Boundary, Form, ScalarFn, SchemeConfig};
use crate::burgers::BurgersScheme;
use crate::error::{Error, Result};
use crate::flux::FluxKind;
use crate::grid::{sample_function, DiscreteField, Mesh, SpeedMode};
use crate::linalg::max_abs;
use crate::reference::{advection_cosh_solution, burgers_exact, discrete_error, eoc, ErrorNorm};
use crate::sbp::NodeFamily;
use crate::spectrum::{assemble_affine, eigenvalues, sort_eigenvalues, spectral_abscissa};
use crate::ssprk::{integrate, Ssprk104};

pub const ADVECTION_FINAL_TIME: f64 = 0.5;
pub const BURGERS_FINAL_TIME: f64 = 0.3;

/// Everything that distinguishes one advection scheme from another, apart from resolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AdvectionSetup {
    pub form: Form,
    pub flux: FluxKind,
    pub family: NodeFamily,
    pub speed_mode: SpeedMode,
}

impl AdvectionSetup {
    fn config(&self, degree: usize, boundary: Boundary) -> SchemeConfig {
        SchemeConfig {
            form: self.form,
            interior_flux: self.flux,
            family: self.family,
            degree,
            speed_mode: self.speed_mode,
            boundary,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableRow {
    pub p: usize,
    pub n: usize,
    pub error: f64,
    pub eoc: Option<f64>,
}

/// `1 / (100 (2p + 1) N)`, small enough that spatial errors dominate.
pub fn small_time_step(p: usize, n: usize) -> f64 {
    1.0 / (100.0 * (2 * p + 1) as f64 * n as f64)
}

fn cosh_speed() -> ScalarFn {
    Arc::new(|x: f64| 1.0 + x.cosh())
}

fn cosh_inflow() -> ScalarFn {
    // The exact solution is defined on the whole experiment window; fall back to NaN
    // so misuse outside it surfaces as a divergence.
    Arc::new(|t: f64| advection_cosh_solution(t, -1.0).unwrap_or(f64::NAN))
}

/// Variable-speed problem with `a = 1 + cosh x`, `u0 = sin(pi x)` and exact inflow data.
pub fn cosh_problem(setup: AdvectionSetup, p: usize, n: usize) -> Result<AdvectionScheme> {
    let mesh = Mesh::new(-1.0, 1.0, n)?;
    AdvectionScheme::new(
        setup.config(
            p,
            Boundary::Inflow {
                g_left: cosh_inflow(),
            },
        ),
        mesh,
        cosh_speed(),
    )
}

fn solve_advection(scheme: &AdvectionScheme, u0: &[f64], dt: f64) -> Result<Vec<f64>> {
    let rhs = |t: f64, u: &[f64], du: &mut [f64]| scheme.rhs(t, u, du);
    integrate(&rhs, u0, 0.0, ADVECTION_FINAL_TIME, dt, |_, _| {})
}

fn cosh_error(scheme: &AdvectionScheme, u: Vec<f64>) -> Result<f64> {
    let field = DiscreteField::new(u, scheme.op.len());
    let exact = |x: f64| advection_cosh_solution(ADVECTION_FINAL_TIME, x).unwrap_or(f64::NAN);
    discrete_error(
        &field,
        exact,
        &scheme.mesh,
        &scheme.op,
        ErrorNorm::GaussQuadPp1,
    )
}

/// L2 error at the final time for the given step size.
pub fn convergence_error_with_dt(
    setup: AdvectionSetup,
    p: usize,
    n: usize,
    dt: f64,
) -> Result<f64> {
    let scheme = cosh_problem(setup, p, n)?;
    let u0 = sample_function(&scheme.mesh, &scheme.op, |x| (PI * x).sin());
    let u = solve_advection(&scheme, &u0.values, dt)?;
    cosh_error(&scheme, u)
}

pub fn convergence_error(setup: AdvectionSetup, p: usize, n: usize) -> Result<f64> {
    convergence_error_with_dt(setup, p, n, small_time_step(p, n))
}

/// `|int u(T) - int u0|` for `a = cos(pi x / 2)`, `u0 = 1 + cos(pi x) / 2` and zero inflow.
pub fn conservation_error(setup: AdvectionSetup, p: usize, n: usize) -> Result<f64> {
    let mesh = Mesh::new(-1.0, 1.0, n)?;
    let boundary = Boundary::Inflow {
        g_left: Arc::new(|_| 0.0),
    };
    let scheme = AdvectionScheme::new(
        setup.config(p, boundary),
        mesh,
        Arc::new(|x: f64| (0.5 * PI * x).cos()),
    )?;
    let u0 = sample_function(&scheme.mesh, &scheme.op, |x| 1.0 + 0.5 * (PI * x).cos());
    let u = solve_advection(&scheme, &u0.values, small_time_step(p, n))?;
    let m0 = total_mass(&u0.values, &scheme.mesh, &scheme.op);
    Ok((total_mass(&u, &scheme.mesh, &scheme.op) - m0).abs())
}

/// Runs `measure` on every `(p, N)` pair in parallel and attaches EOCs along `N` for each `p`.
pub fn sweep<F>(ps: &[usize], ns: &[usize], measure: F) -> Result<Vec<TableRow>>
where
    F: Fn(usize, usize) -> Result<f64> + Sync,
{
    let pairs: Vec<(usize, usize)> = ps
        .iter()
        .flat_map(|&p| ns.iter().map(move |&n| (p, n)))
        .collect();
    let errors: Vec<f64> = pairs
        .par_iter()
        .map(|&(p, n)| measure(p, n))
        .collect::<Result<_>>()?;
    let mut rows = Vec::with_capacity(pairs.len());
    for (chunk_pairs, chunk_errors) in pairs.chunks(ns.len()).zip(errors.chunks(ns.len())) {
        let orders = if ns.len() >= 2 {
            eoc(chunk_errors, ns)?
        } else {
            Vec::new()
        };
        for (k, (&(p, n), &error)) in chunk_pairs.iter().zip(chunk_errors).enumerate() {
            let order = if k == 0 { None } else { orders[k - 1] };
            rows.push(TableRow {
                p,
                n,
                error,
                eoc: order,
            });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EigenScenario {
    /// `a = 1 + cosh x` with inflow at `x = -1`.
    NonperiodicCosh,
    /// `a = 2 + sin(pi x)`, periodic.
    PeriodicSin,
    /// `a = 1 + (1 - x^2)^5`, periodic.
    Manzanero,
}

impl EigenScenario {
    /// `(p, N)` used for the published spectra.
    pub fn default_resolution(self) -> (usize, usize) {
        match self {
            EigenScenario::NonperiodicCosh | EigenScenario::PeriodicSin => (7, 50),
            EigenScenario::Manzanero => (5, 200),
        }
    }

    /// Lobatto reinterpolation of the speed for split forms on Gauss nodes, nodal
    /// evaluation otherwise.
    pub fn default_speed_mode(self, form: Form, family: NodeFamily) -> SpeedMode {
        let split = matches!(form, Form::SplitGeneral | Form::SplitSimplified);
        if self != EigenScenario::Manzanero && split && family == NodeFamily::Gauss {
            SpeedMode::ViaLobattoInterpolation
        } else {
            SpeedMode::DirectOnNodes
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            EigenScenario::NonperiodicCosh => "nonperiodic-cosh",
            EigenScenario::PeriodicSin => "periodic-sin",
            EigenScenario::Manzanero => "manzanero",
        }
    }

    pub fn scheme(self, setup: AdvectionSetup, p: usize, n: usize) -> Result<AdvectionScheme> {
        let mesh = Mesh::new(-1.0, 1.0, n)?;
        let (speed, boundary): (ScalarFn, Boundary) = match self {
            EigenScenario::NonperiodicCosh => (
                cosh_speed(),
                Boundary::Inflow {
                    g_left: cosh_inflow(),
                },
            ),
            EigenScenario::PeriodicSin => {
                (Arc::new(|x: f64| 2.0 + (PI * x).sin()), Boundary::Periodic)
            }
            EigenScenario::Manzanero => (
                Arc::new(|x: f64| 1.0 + (1.0 - x * x).powi(5)),
                Boundary::Periodic,
            ),
        };
        AdvectionScheme::new(setup.config(p, boundary), mesh, speed)
    }
}

#[derive(Debug, Clone)]
pub struct SpectrumSummary {
    /// Sorted by (real, imaginary) part.
    pub eigenvalues: Vec<Complex64>,
    pub frobenius_norm: f64,
    pub abscissa: f64,
    /// Largest eigenvalue modulus.
    pub max_magnitude: f64,
    /// Modulus of the eigenvalue with the most negative real part.
    pub leftmost_magnitude: f64,
    /// Largest entry of the boundary forcing at the frozen time.
    pub offset_max: f64,
}

/// Spectrum of the linearisation at `t_freeze`.
pub fn scheme_spectrum(scheme: &AdvectionScheme, t_freeze: f64) -> Result<SpectrumSummary> {
    let affine = assemble_affine(scheme.dim(), |u, du| scheme.rhs(t_freeze, u, du))?;
    let mut eigs = eigenvalues(&affine.matrix)?;
    sort_eigenvalues(&mut eigs);
    let max_magnitude = eigs.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let leftmost_magnitude = eigs.first().map_or(0.0, |z| z.norm());
    Ok(SpectrumSummary {
        abscissa: spectral_abscissa(&eigs),
        frobenius_norm: affine.matrix.frobenius_norm(),
        offset_max: max_abs(&affine.offset),
        eigenvalues: eigs,
        max_magnitude,
        leftmost_magnitude,
    })
}

/// Final-time error if the run finishes and stays bounded, `None` for a blow-up.
fn cfl_run(scheme: &AdvectionScheme, u0: &[f64], dt: f64) -> Result<Option<f64>> {
    let rhs = |t: f64, u: &[f64], du: &mut [f64]| scheme.rhs(t, u, du);
    let mut u = u0.to_vec();
    let mut stepper = Ssprk104::new(u.len());
    let steps = (ADVECTION_FINAL_TIME / dt * (1.0 - 1e-12)).ceil() as usize;
    let mut t = 0.0;
    for k in 1..=steps {
        let t_next = if k == steps {
            ADVECTION_FINAL_TIME
        } else {
            k as f64 * dt
        };
        match stepper.step(&rhs, &mut u, t, t_next - t) {
            Ok(()) => {}
            Err(Error::Divergence { .. }) => return Ok(None),
            Err(e) => return Err(e),
        }
        // The solution stays O(1); anything this large has blown up.
        if max_abs(&u) > 1e6 {
            return Ok(None);
        }
        t = t_next;
    }
    Ok(Some(cosh_error(scheme, u)?))
}

pub const CFL_LOWER: f64 = 0.5;
pub const CFL_UPPER: f64 = 8.0;
pub const CFL_RESOLUTION: f64 = 0.05;
pub const CFL_ERROR_THRESHOLD: f64 = 0.1;

/// Whether `dt = c / ((2p + 1) N)` keeps the final error below the threshold.
pub fn cfl_is_stable(scheme: &AdvectionScheme, u0: &[f64], c: f64) -> Result<bool> {
    let p = scheme.op.degree;
    let dt = c / ((2 * p + 1) as f64 * scheme.mesh.elements as f64);
    Ok(matches!(cfl_run(scheme, u0, dt)?, Some(e) if e < CFL_ERROR_THRESHOLD))
}

/// Largest stable `dt (2p + 1) N` found by bisection, rounded to one decimal.
pub fn cfl_max(setup: AdvectionSetup, p: usize, n: usize) -> Result<f64> {
    let scheme = cosh_problem(setup, p, n)?;
    let u0 = sample_function(&scheme.mesh, &scheme.op, |x| (PI * x).sin()).values;
    let (mut lo, mut hi) = (CFL_LOWER, CFL_UPPER);
    if !cfl_is_stable(&scheme, &u0, lo)? {
        return Ok(0.0);
    }
    if cfl_is_stable(&scheme, &u0, hi)? {
        return Ok(hi);
    }
    while hi - lo > CFL_RESOLUTION {
        let mid = 0.5 * (lo + hi);
        if cfl_is_stable(&scheme, &u0, mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo * 10.0).round() / 10.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BurgersRun {
    pub error: f64,
    /// `max_t |m(t) - m(0)| / max(|m(0)|, 1)`.
    pub mass_drift: f64,
}

/// `2 / ((2p + 1) N)` on the domain `[0, 2]`.
pub fn burgers_time_step(p: usize, n: usize) -> f64 {
    2.0 / ((2 * p + 1) as f64 * n as f64)
}

pub fn run_burgers(family: NodeFamily, p: usize, n: usize) -> Result<BurgersRun> {
    let scheme = BurgersScheme::new(Mesh::new(0.0, 2.0, n)?, family, p)?;
    let u0 = |x: f64| (PI * x).sin();
    let init = sample_function(&scheme.mesh, &scheme.op, u0);
    let m0 = total_mass(&init.values, &scheme.mesh, &scheme.op);
    let mut drift = 0.0_f64;
    let rhs = |t: f64, u: &[f64], du: &mut [f64]| scheme.rhs_burgers(t, u, du);
    let u = integrate(
        &rhs,
        &init.values,
        0.0,
        BURGERS_FINAL_TIME,
        burgers_time_step(p, n),
        |_, u| {
            drift = drift.max((total_mass(u, &scheme.mesh, &scheme.op) - m0).abs());
        },
    )?;
    let exact_failure = RefCell::new(None);
    let exact = |x: f64| {
        burgers_exact(BURGERS_FINAL_TIME, x, u0).unwrap_or_else(|e| {
            exact_failure.borrow_mut().get_or_insert(e);
            f64::NAN
        })
    };
    let field = DiscreteField::new(u, scheme.op.len());
    let error = discrete_error(
        &field,
        exact,
        &scheme.mesh,
        &scheme.op,
        ErrorNorm::SbpMassNorm,
    )?;
    if let Some(e) = exact_failure.into_inner() {
        return Err(e);
    }
    Ok(BurgersRun {
        error,
        mass_drift: drift / m0.abs().max(1.0),
    })
}

/// Scientific notation with six significant digits and a two-digit exponent.
pub fn sci(v: f64) -> String {
    if !v.is_finite() {
        return format!("{v}");
    }
    let s = format!("{v:.5e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    format!(
        "{mantissa}e{}{:02}",
        if exp < 0 { '-' } else { '+' },
        exp.abs()
    )
}

pub fn table_csv(rows: &[TableRow]) -> String {
    let mut out = String::from("p,N,error,eoc\n");
    for r in rows {
        let order = r.eoc.map(sci).unwrap_or_default();
        let _ = writeln!(out, "{},{},{},{}", r.p, r.n, sci(r.error), order);
    }
    out
}

pub fn eigen_csv(eigs: &[Complex64]) -> String {
    let mut out = String::from("re,im\n");
    for z in eigs {
        let _ = writeln!(out, "{},{}", sci(z.re), sci(z.im));
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct CflRow {
    pub p: usize,
    pub n: usize,
    pub flux: FluxKind,
    pub form: Form,
    pub c_max: f64,
}

pub fn cfl_csv(rows: &[CflRow]) -> String {
    let mut out = String::from("p,N,flux,form,c_max\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{:.1}",
            r.p,
            r.n,
            r.flux.name(),
            r.form.name(),
            r.c_max
        );
    }
    out
}
