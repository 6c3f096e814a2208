//! Uniform meshes, element-major nodal fields and discretisation of the speed.

use crate::error::{Error, Result};
use crate::sbp::{interpolation_matrix, nodes_weights, NodeFamily, SbpOperator};

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub x_left: f64,
    pub x_right: f64,
    pub elements: usize,
}

impl Mesh {
    pub fn new(x_left: f64, x_right: f64, elements: usize) -> Result<Self> {
        if !(x_left.is_finite() && x_right.is_finite() && x_left < x_right) {
            return Err(Error::Configuration(format!(
                "invalid interval [{x_left}, {x_right}]"
            )));
        }
        if elements == 0 {
            return Err(Error::Configuration(
                "mesh needs at least one element".into(),
            ));
        }
        Ok(Self {
            x_left,
            x_right,
            elements,
        })
    }

    pub fn length(&self) -> f64 {
        self.x_right - self.x_left
    }

    pub fn element_width(&self) -> f64 {
        self.length() / self.elements as f64
    }

    /// `h / 2`, the constant Jacobian of every element map.
    pub fn jacobian(&self) -> f64 {
        0.5 * self.element_width()
    }

    /// Position of interface `i`, `0 <= i <= N`.
    pub fn boundary(&self, i: usize) -> f64 {
        if i == self.elements {
            self.x_right
        } else {
            self.x_left + i as f64 * self.element_width()
        }
    }

    pub fn boundaries(&self) -> Vec<f64> {
        (0..=self.elements).map(|i| self.boundary(i)).collect()
    }

    pub fn element_bounds(&self, e: usize) -> (f64, f64) {
        (self.boundary(e), self.boundary(e + 1))
    }

    /// Reference coordinate `xi` in [-1, 1] mapped into element `e`.
    pub fn map(&self, e: usize, xi: f64) -> f64 {
        self.boundary(e) + (xi + 1.0) * self.jacobian()
    }
}

/// Nodal values of all elements, stored element-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteField {
    pub values: Vec<f64>,
    pub nodes_per_element: usize,
}

impl DiscreteField {
    pub fn new(values: Vec<f64>, nodes_per_element: usize) -> Self {
        assert!(nodes_per_element > 0 && values.len() % nodes_per_element == 0);
        Self {
            values,
            nodes_per_element,
        }
    }

    pub fn elements(&self) -> usize {
        self.values.len() / self.nodes_per_element
    }

    pub fn element(&self, e: usize) -> &[f64] {
        &self.values[e * self.nodes_per_element..(e + 1) * self.nodes_per_element]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpeedMode {
    /// Evaluate `a` at the solution nodes.
    DirectOnNodes,
    /// Evaluate `a` at Lobatto points and re-interpolate to the solution nodes, so the
    /// element traces of the speed are exact and continuous.
    ViaLobattoInterpolation,
}

/// Mapped physical coordinates of all nodes.
pub fn node_coordinates(mesh: &Mesh, op: &SbpOperator) -> Vec<f64> {
    (0..mesh.elements)
        .flat_map(|e| op.nodes.iter().map(move |&xi| mesh.map(e, xi)))
        .collect()
}

pub fn sample_function(mesh: &Mesh, op: &SbpOperator, f: impl Fn(f64) -> f64) -> DiscreteField {
    DiscreteField::new(
        node_coordinates(mesh, op).into_iter().map(f).collect(),
        op.len(),
    )
}

pub fn discretize_speed(
    mesh: &Mesh,
    op: &SbpOperator,
    a: impl Fn(f64) -> f64,
    mode: SpeedMode,
) -> Result<DiscreteField> {
    if mode == SpeedMode::DirectOnNodes || op.family == NodeFamily::Lobatto {
        return Ok(sample_function(mesh, op, a));
    }
    let (lobatto, _) = nodes_weights(NodeFamily::Lobatto, op.degree)?;
    let to_basis = interpolation_matrix(&lobatto, &op.nodes)?;
    let mut values = Vec::with_capacity(mesh.elements * op.len());
    for e in 0..mesh.elements {
        let samples: Vec<f64> = lobatto.iter().map(|&xi| a(mesh.map(e, xi))).collect();
        values.extend(to_basis.mul_vec(&samples));
    }
    Ok(DiscreteField::new(values, op.len()))
}
