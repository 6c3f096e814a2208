//! Semidiscretisations of `u_t + (a u)_x = 0` and of its nonconservative variant
//! `u_t + a u_x = 0` on a uniform mesh of nodal SBP elements.
//!
//! Each element is advanced with a volume term built from `D` and a flux correction
//! `M^{-1} R^T B (f - ...)`. Every term carries exactly one reference derivative or
//! inverse mass, so the physical derivative is the reference one divided by `h / 2`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::flux::{evaluate_flux, interface_trace, FluxKind, InterfaceTrace, Weight};
use crate::grid::{discretize_speed, DiscreteField, Mesh, SpeedMode};
use crate::linalg::Matrix;
use crate::sbp::{build_operator, NodeFamily, SbpOperator};

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Form {
    /// Split form written for bases that contain the element endpoints.
    SplitSimplified,
    /// Split form with the interpolation corrections needed for general bases.
    SplitGeneral,
    /// Direct discretisation of `(a u)_x`, stable in the speed-weighted norm.
    Unsplit,
    /// Nonconservative equation with fluxes acting on `u`.
    NonconsGeneral,
    /// Nonconservative equation for bases that contain the endpoints, with standard fluxes.
    NonconsSimplified,
}

impl Form {
    /// Upwind flux whose interface contribution is dissipative in this form's energy.
    pub fn matching_upwind(self) -> FluxKind {
        match self {
            Form::SplitSimplified | Form::SplitGeneral | Form::NonconsSimplified => {
                FluxKind::SplitUpwind
            }
            Form::Unsplit => FluxKind::UnsplitUpwind,
            Form::NonconsGeneral => FluxKind::ModifiedUpwind,
        }
    }

    pub fn matching_central(self) -> FluxKind {
        match self {
            Form::SplitSimplified | Form::SplitGeneral | Form::NonconsSimplified => {
                FluxKind::SplitCentral
            }
            Form::Unsplit => FluxKind::UnsplitCentral,
            Form::NonconsGeneral => FluxKind::ModifiedCentral,
        }
    }

    /// Norm in which the form admits an energy estimate.
    pub fn energy_weight(self) -> Weight {
        match self {
            Form::SplitSimplified | Form::SplitGeneral => Weight::Unweighted,
            Form::Unsplit => Weight::SpeedWeighted,
            Form::NonconsGeneral | Form::NonconsSimplified => Weight::InverseSpeedWeighted,
        }
    }

    pub fn is_conservative(self) -> bool {
        !matches!(self, Form::NonconsGeneral | Form::NonconsSimplified)
    }

    pub fn name(self) -> &'static str {
        match self {
            Form::SplitSimplified | Form::SplitGeneral => "split",
            Form::Unsplit => "unsplit",
            Form::NonconsGeneral => "noncons-general",
            Form::NonconsSimplified => "noncons-simplified",
        }
    }
}

#[derive(Clone)]
pub enum Boundary {
    Periodic,
    /// Inflow data `g_L(t)` at `x_L`; the right end is an outflow boundary.
    Inflow {
        g_left: ScalarFn,
    },
}

impl fmt::Debug for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Boundary::Periodic => f.write_str("Periodic"),
            Boundary::Inflow { .. } => f.write_str("Inflow"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SchemeConfig {
    pub form: Form,
    pub interior_flux: FluxKind,
    pub family: NodeFamily,
    pub degree: usize,
    pub speed_mode: SpeedMode,
    pub boundary: Boundary,
}

impl SchemeConfig {
    fn validate(&self) -> Result<()> {
        let flux = self.interior_flux;
        if flux == FluxKind::GodunovBurgers {
            return Err(Error::Configuration(
                "the Godunov flux belongs to the Burgers scheme".into(),
            ));
        }
        if flux.is_modified() != (self.form == Form::NonconsGeneral) {
            return Err(Error::Configuration(format!(
                "flux {} cannot be combined with the {} form",
                flux.name(),
                self.form.name()
            )));
        }
        if self.form == Form::NonconsSimplified && self.family != NodeFamily::Lobatto {
            return Err(Error::Configuration(
                "the simplified nonconservative form needs Lobatto nodes".into(),
            ));
        }
        Ok(())
    }
}

/// A configured advection semidiscretisation with its mesh, operator and speed.
#[derive(Clone)]
pub struct AdvectionScheme {
    pub config: SchemeConfig,
    pub mesh: Mesh,
    pub op: SbpOperator,
    pub speeds: DiscreteField,
    speed_fn: ScalarFn,
    /// Reference derivative of the nodal speed, element-major.
    speed_derivative: Vec<f64>,
}

impl fmt::Debug for AdvectionScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AdvectionScheme")
            .field("config", &self.config)
            .field("mesh", &self.mesh)
            .field("degree", &self.op.degree)
            .finish_non_exhaustive()
    }
}

impl AdvectionScheme {
    pub fn new(config: SchemeConfig, mesh: Mesh, speed_fn: ScalarFn) -> Result<Self> {
        config.validate()?;
        let op = build_operator(config.family, config.degree)?;
        let speeds = discretize_speed(&mesh, &op, |x| speed_fn(x), config.speed_mode)?;
        Self::assemble(config, mesh, op, speeds, speed_fn)
    }

    /// Uses the given nodal speeds instead of discretising `speed_fn`, which then only
    /// supplies exact edge values for edge fluxes and the inflow boundary.
    pub fn with_speeds(
        config: SchemeConfig,
        mesh: Mesh,
        speeds: DiscreteField,
        speed_fn: ScalarFn,
    ) -> Result<Self> {
        config.validate()?;
        let op = build_operator(config.family, config.degree)?;
        if speeds.nodes_per_element != op.len() || speeds.elements() != mesh.elements {
            return Err(Error::Configuration(
                "speed field does not match the mesh".into(),
            ));
        }
        Self::assemble(config, mesh, op, speeds, speed_fn)
    }

    fn assemble(
        config: SchemeConfig,
        mesh: Mesh,
        op: SbpOperator,
        speeds: DiscreteField,
        speed_fn: ScalarFn,
    ) -> Result<Self> {
        if let Some(bad) = speeds
            .values
            .iter()
            .find(|a| !(a.is_finite() && **a >= 0.0))
        {
            return Err(Error::Configuration(format!(
                "advection speed must be nonnegative, found {bad}"
            )));
        }
        let n = op.len();
        let mut speed_derivative = vec![0.0; speeds.values.len()];
        for e in 0..mesh.elements {
            op.d.mul_vec_into(speeds.element(e), &mut speed_derivative[e * n..(e + 1) * n]);
        }
        Ok(Self {
            config,
            mesh,
            op,
            speeds,
            speed_fn,
            speed_derivative,
        })
    }

    pub fn dim(&self) -> usize {
        self.mesh.elements * self.op.len()
    }

    pub fn speed_at(&self, x: f64) -> f64 {
        (self.speed_fn)(x)
    }

    /// Traces at interfaces `0..=N`. For periodic meshes entries `0` and `N` coincide.
    pub fn interface_traces<'a>(&'a self, t: f64, u: &'a [f64]) -> Vec<InterfaceTrace> {
        let n = self.op.len();
        let ne = self.mesh.elements;
        let a = &self.speeds.values;
        let block = |v: &'a [f64], e: usize| &v[e * n..(e + 1) * n];
        let trace = |l: usize, r: usize, x_b: f64| {
            interface_trace(
                block(u, l),
                block(u, r),
                block(a, l),
                block(a, r),
                &self.op,
                x_b,
                |x| self.speed_at(x),
            )
        };
        let mut traces = Vec::with_capacity(ne + 1);
        match &self.config.boundary {
            Boundary::Periodic => {
                let wrap = trace(ne - 1, 0, self.mesh.x_right);
                traces.push(wrap);
                for i in 1..ne {
                    traces.push(trace(i - 1, i, self.mesh.boundary(i)));
                }
                traces.push(wrap);
            }
            Boundary::Inflow { g_left } => {
                let g = g_left(t);
                let a_left = self.speed_at(self.mesh.x_left);
                let inner = trace(0, 0, self.mesh.x_left);
                traces.push(InterfaceTrace {
                    u_minus: g,
                    a_minus: a_left,
                    au_minus: a_left * g,
                    a_at_boundary: a_left,
                    u_plus: inner.u_plus,
                    a_plus: inner.a_plus,
                    au_plus: inner.au_plus,
                });
                for i in 1..ne {
                    traces.push(trace(i - 1, i, self.mesh.boundary(i)));
                }
                let last = trace(ne - 1, ne - 1, self.mesh.x_right);
                traces.push(InterfaceTrace {
                    u_plus: last.u_minus,
                    a_plus: last.a_minus,
                    au_plus: last.au_minus,
                    ..last
                });
            }
        }
        traces
    }

    /// Numerical flux at interfaces `0..=N`; domain boundaries of an inflow problem
    /// always use the upwind flux matching the form.
    pub fn interface_fluxes(&self, t: f64, u: &[f64]) -> Vec<f64> {
        let traces = self.interface_traces(t, u);
        let ne = self.mesh.elements;
        let exterior = self.config.form.matching_upwind();
        traces
            .iter()
            .enumerate()
            .map(|(i, tr)| {
                let is_exterior =
                    matches!(self.config.boundary, Boundary::Inflow { .. }) && (i == 0 || i == ne);
                evaluate_flux(
                    if is_exterior {
                        exterior
                    } else {
                        self.config.interior_flux
                    },
                    tr,
                )
            })
            .collect()
    }

    /// Semidiscrete right-hand side `du = L(t) u`.
    pub fn rhs(&self, t: f64, u: &[f64], du: &mut [f64]) {
        assert_eq!(u.len(), self.dim());
        assert_eq!(du.len(), self.dim());
        let fluxes = self.interface_fluxes(t, u);
        let n = self.op.len();
        let inv_j = 1.0 / self.mesh.jacobian();
        let mut scratch = Scratch::new(n);
        for e in 0..self.mesh.elements {
            let range = e * n..(e + 1) * n;
            self.element_rhs(
                &u[range.clone()],
                self.speeds.element(e),
                &self.speed_derivative[range.clone()],
                fluxes[e],
                fluxes[e + 1],
                &mut scratch,
                &mut du[range],
            );
        }
        for v in du.iter_mut() {
            *v *= inv_j;
        }
    }

    fn checked_rhs(&self, forms: &[Form], t: f64, u: &[f64], du: &mut [f64]) -> Result<()> {
        if !forms.contains(&self.config.form) {
            return Err(Error::Configuration(format!(
                "scheme is configured for the {} form",
                self.config.form.name()
            )));
        }
        if u.len() != self.dim() || du.len() != self.dim() {
            return Err(Error::Configuration(
                "state length does not match the scheme".into(),
            ));
        }
        self.rhs(t, u, du);
        Ok(())
    }

    pub fn rhs_split_general(&self, t: f64, u: &[f64], du: &mut [f64]) -> Result<()> {
        self.checked_rhs(&[Form::SplitGeneral, Form::SplitSimplified], t, u, du)
    }

    pub fn rhs_unsplit(&self, t: f64, u: &[f64], du: &mut [f64]) -> Result<()> {
        self.checked_rhs(&[Form::Unsplit], t, u, du)
    }

    pub fn rhs_noncons_general(&self, t: f64, u: &[f64], du: &mut [f64]) -> Result<()> {
        self.checked_rhs(&[Form::NonconsGeneral], t, u, du)
    }

    pub fn rhs_noncons_simplified(&self, t: f64, u: &[f64], du: &mut [f64]) -> Result<()> {
        self.checked_rhs(&[Form::NonconsSimplified], t, u, du)
    }

    /// Reference-scaled element update, written into `out`.
    #[allow(clippy::too_many_arguments)]
    fn element_rhs(
        &self,
        u: &[f64],
        a: &[f64],
        da: &[f64],
        f_left: f64,
        f_right: f64,
        s: &mut Scratch,
        out: &mut [f64],
    ) {
        let op = &self.op;
        let n = op.len();
        let (r0, r1) = (op.r.row(0), op.r.row(1));
        for j in 0..n {
            s.au[j] = a[j] * u[j];
        }
        op.d.mul_vec_into(u, &mut s.du);
        let (u_l, u_r) = op.restrict(u);
        let (au_l, au_r) = op.restrict(&s.au);
        // Boundary terms enter as M^{-1} (s_L r0 - s_R r1), the negative of M^{-1} R^T B s.
        let (s_l, s_r, scale_by_speed) = match self.config.form {
            Form::SplitSimplified | Form::SplitGeneral => {
                op.d.mul_vec_into(&s.au, &mut s.dau);
                let (a_l, a_r) = op.restrict(a);
                for j in 0..n {
                    out[j] = -0.5 * (s.dau[j] + a[j] * s.du[j] + u[j] * da[j]);
                }
                (
                    f_left - 0.5 * au_l - 0.5 * a_l * u_l,
                    f_right - 0.5 * au_r - 0.5 * a_r * u_r,
                    false,
                )
            }
            Form::Unsplit => {
                op.d.mul_vec_into(&s.au, &mut s.dau);
                for j in 0..n {
                    out[j] = -s.dau[j];
                }
                (f_left - au_l, f_right - au_r, false)
            }
            Form::NonconsGeneral => {
                for j in 0..n {
                    out[j] = -a[j] * s.du[j];
                }
                (f_left - u_l, f_right - u_r, true)
            }
            Form::NonconsSimplified => {
                for j in 0..n {
                    out[j] = -a[j] * s.du[j];
                }
                (f_left - au_l, f_right - au_r, false)
            }
        };
        for j in 0..n {
            let sat = (s_l * r0[j] - s_r * r1[j]) / op.weights[j];
            out[j] += if scale_by_speed { a[j] * sat } else { sat };
        }
    }
}

struct Scratch {
    au: Vec<f64>,
    du: Vec<f64>,
    dau: Vec<f64>,
}

impl Scratch {
    fn new(n: usize) -> Self {
        Self {
            au: vec![0.0; n],
            du: vec![0.0; n],
            dau: vec![0.0; n],
        }
    }
}

/// Residual of the symmetric-part identity of the speed-generalised SBP operator on one
/// element: `max |Theta + Theta^T - ((t_R^T a) t_R t_R^T - (t_L^T a) t_L t_L^T)|`.
pub fn theta_operator_check(op: &SbpOperator, a: &[f64]) -> f64 {
    let n = op.len();
    assert_eq!(a.len(), n);
    let q = op.mass_matrix().matmul(&op.d);
    let t_l = op.r.row(0);
    let t_r = op.r.row(1);
    let (a_l, a_r) = op.restrict(a);
    let theta = Matrix::from_fn(n, n, |i, j| {
        0.5 * (q[(i, j)] * a[j] + a[i] * q[(i, j)]) - 0.5 * a_l * t_l[i] * t_l[j]
            + 0.5 * t_l[i] * t_l[j] * a[j]
            + 0.5 * a_r * t_r[i] * t_r[j]
            - 0.5 * t_r[i] * t_r[j] * a[j]
    });
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            let target = a_r * t_r[i] * t_r[j] - a_l * t_l[i] * t_l[j];
            worst = worst.max((theta[(i, j)] + theta[(j, i)] - target).abs());
        }
    }
    worst
}

/// `sum_e 1^T M_phys u_e`.
pub fn total_mass(u: &[f64], mesh: &Mesh, op: &SbpOperator) -> f64 {
    let n = op.len();
    let sum: f64 = u
        .chunks_exact(n)
        .map(|c| c.iter().zip(&op.weights).map(|(v, w)| v * w).sum::<f64>())
        .sum();
    mesh.jacobian() * sum
}

/// `sum_e u^T diag(w) M_phys u` with `w` one of `1`, `a`, `1/a`.
pub fn energy(
    u: &[f64],
    weight: Weight,
    speeds: &[f64],
    mesh: &Mesh,
    op: &SbpOperator,
) -> Result<f64> {
    if weight == Weight::InverseSpeedWeighted {
        if let Some(bad) = speeds.iter().find(|a| !(**a > 0.0)) {
            return Err(Error::Domain(format!(
                "inverse speed weighting needs positive speeds, found {bad}"
            )));
        }
    }
    let n = op.len();
    let mut sum = 0.0;
    for (k, v) in u.iter().enumerate() {
        let w = match weight {
            Weight::Unweighted => 1.0,
            Weight::SpeedWeighted => speeds[k],
            Weight::InverseSpeedWeighted => 1.0 / speeds[k],
        };
        sum += w * op.weights[k % n] * v * v;
    }
    Ok(mesh.jacobian() * sum)
}
