//! Interface traces and the numerical flux catalog.
//!
//! Fluxes are pure functions of a precomputed [`InterfaceTrace`]; how the speed
//! enters (exact edge value, interpolated speed, interpolated product) is chosen
//! by the flux kind alone. All upwind kinds assume a positive speed.

use crate::sbp::SbpOperator;

/// Values seen at one interface from the left (`minus`) and right (`plus`) elements.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct InterfaceTrace {
    pub u_minus: f64,
    pub u_plus: f64,
    pub a_minus: f64,
    pub a_plus: f64,
    /// Restriction of the nodal product `a * u`.
    pub au_minus: f64,
    pub au_plus: f64,
    /// Exact speed at the interface position.
    pub a_at_boundary: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FluxKind {
    EdgeCentral,
    SplitCentral,
    UnsplitCentral,
    EdgeUpwind,
    SplitUpwind,
    UnsplitUpwind,
    /// Central flux of the nonconservative formulation, a flux on `u` itself.
    ModifiedCentral,
    ModifiedUpwind,
    GodunovBurgers,
}

impl FluxKind {
    pub fn is_modified(self) -> bool {
        matches!(self, FluxKind::ModifiedCentral | FluxKind::ModifiedUpwind)
    }

    pub fn is_upwind(self) -> bool {
        matches!(
            self,
            FluxKind::EdgeUpwind
                | FluxKind::SplitUpwind
                | FluxKind::UnsplitUpwind
                | FluxKind::ModifiedUpwind
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            FluxKind::EdgeCentral => "edge-central",
            FluxKind::SplitCentral => "split-central",
            FluxKind::UnsplitCentral => "unsplit-central",
            FluxKind::EdgeUpwind => "edge-upwind",
            FluxKind::SplitUpwind => "split-upwind",
            FluxKind::UnsplitUpwind => "unsplit-upwind",
            FluxKind::ModifiedCentral => "modified-central",
            FluxKind::ModifiedUpwind => "modified-upwind",
            FluxKind::GodunovBurgers => "godunov",
        }
    }
}

pub fn evaluate_flux(kind: FluxKind, t: &InterfaceTrace) -> f64 {
    match kind {
        FluxKind::EdgeCentral => 0.5 * t.a_at_boundary * (t.u_minus + t.u_plus),
        FluxKind::SplitCentral => 0.5 * (t.a_minus * t.u_minus + t.a_plus * t.u_plus),
        FluxKind::UnsplitCentral => 0.5 * (t.au_minus + t.au_plus),
        FluxKind::EdgeUpwind => t.a_at_boundary * t.u_minus,
        FluxKind::SplitUpwind => t.a_minus * t.u_minus,
        FluxKind::UnsplitUpwind => t.au_minus,
        FluxKind::ModifiedCentral => 0.5 * (t.u_minus + t.u_plus),
        FluxKind::ModifiedUpwind => t.u_minus,
        FluxKind::GodunovBurgers => godunov_burgers(t.u_minus, t.u_plus),
    }
}

/// Exact Riemann solver flux for `f(u) = u^2 / 2`.
pub fn godunov_burgers(u_minus: f64, u_plus: f64) -> f64 {
    if u_minus <= u_plus {
        if u_minus <= 0.0 && 0.0 <= u_plus {
            0.0
        } else {
            0.5 * (u_minus * u_minus).min(u_plus * u_plus)
        }
    } else {
        0.5 * (u_minus * u_minus).max(u_plus * u_plus)
    }
}

/// Builds the trace between a left and a right element at position `x_b`.
pub fn interface_trace(
    left_u: &[f64],
    right_u: &[f64],
    left_a: &[f64],
    right_a: &[f64],
    op: &SbpOperator,
    x_b: f64,
    a_fn: impl Fn(f64) -> f64,
) -> InterfaceTrace {
    let right_row = op.r.row(1);
    let left_row = op.r.row(0);
    let prod = |row: &[f64], a: &[f64], u: &[f64]| -> f64 {
        (0..row.len()).map(|j| row[j] * a[j] * u[j]).sum()
    };
    let dot = |row: &[f64], v: &[f64]| -> f64 { row.iter().zip(v).map(|(r, x)| r * x).sum() };
    InterfaceTrace {
        u_minus: dot(right_row, left_u),
        u_plus: dot(left_row, right_u),
        a_minus: dot(right_row, left_a),
        a_plus: dot(left_row, right_a),
        au_minus: prod(right_row, left_a, left_u),
        au_plus: prod(left_row, right_a, right_u),
        a_at_boundary: a_fn(x_b),
    }
}

/// Interface energy rate bookkeeping, each matching one discrete norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weight {
    Unweighted,
    SpeedWeighted,
    InverseSpeedWeighted,
}

/// Contribution of one interface to the time derivative of twice the energy.
///
/// Unweighted: `2(u+ - u-) f - (a+ u+^2 - a- u-^2)`, the split-form interface term.
/// SpeedWeighted: `2((au)+ - (au)-) f - ((au)+^2 - (au)-^2)`.
/// InverseSpeedWeighted: `2(u+ - u-) f - (u+^2 - u-^2)` for the modified fluxes.
pub fn interface_energy_contribution(weight: Weight, t: &InterfaceTrace, f: f64) -> f64 {
    match weight {
        Weight::Unweighted => {
            2.0 * (t.u_plus - t.u_minus) * f
                - (t.a_plus * t.u_plus * t.u_plus - t.a_minus * t.u_minus * t.u_minus)
        }
        Weight::SpeedWeighted => {
            2.0 * (t.au_plus - t.au_minus) * f - (t.au_plus * t.au_plus - t.au_minus * t.au_minus)
        }
        Weight::InverseSpeedWeighted => {
            2.0 * (t.u_plus - t.u_minus) * f - (t.u_plus * t.u_plus - t.u_minus * t.u_minus)
        }
    }
}

/// Entropy production `(u+ - u-) f - (u+^3 - u-^3) / 6` of a Burgers interface.
pub fn burgers_entropy_contribution(u_minus: f64, u_plus: f64, f: f64) -> f64 {
    (u_plus - u_minus) * f - (u_plus.powi(3) - u_minus.powi(3)) / 6.0
}
