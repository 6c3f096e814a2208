//! Skew-symmetric split form of the inviscid Burgers equation `u_t + (u^2/2)_x = 0`
//! on a periodic mesh, coupled by the Godunov flux.

use crate::error::Result;
use crate::flux::godunov_burgers;
use crate::grid::Mesh;
use crate::sbp::{build_operator, NodeFamily, SbpOperator};

#[derive(Debug, Clone)]
pub struct BurgersScheme {
    pub mesh: Mesh,
    pub op: SbpOperator,
}

impl BurgersScheme {
    pub fn new(mesh: Mesh, family: NodeFamily, degree: usize) -> Result<Self> {
        Ok(Self {
            mesh,
            op: build_operator(family, degree)?,
        })
    }

    pub fn dim(&self) -> usize {
        self.mesh.elements * self.op.len()
    }

    /// Left and right traces of element `e`.
    fn traces(&self, u: &[f64]) -> Vec<(f64, f64)> {
        let n = self.op.len();
        u.chunks_exact(n).map(|c| self.op.restrict(c)).collect()
    }

    /// `(u-, u+)` at interfaces `0..N`, interface 0 wrapping the last element to the first.
    pub fn interface_states(&self, u: &[f64]) -> Vec<(f64, f64)> {
        let tr = self.traces(u);
        let ne = tr.len();
        (0..ne)
            .map(|i| (tr[(i + ne - 1) % ne].1, tr[i].0))
            .collect()
    }

    pub fn rhs_burgers(&self, _t: f64, u: &[f64], du: &mut [f64]) {
        assert_eq!(u.len(), self.dim());
        assert_eq!(du.len(), self.dim());
        let op = &self.op;
        let n = op.len();
        let ne = self.mesh.elements;
        let fluxes: Vec<f64> = self
            .interface_states(u)
            .into_iter()
            .map(|(l, r)| godunov_burgers(l, r))
            .collect();
        let inv_j = 1.0 / self.mesh.jacobian();
        let mut sq = vec![0.0; n];
        let mut d_u = vec![0.0; n];
        let mut d_sq = vec![0.0; n];
        for e in 0..ne {
            let ue = &u[e * n..(e + 1) * n];
            for j in 0..n {
                sq[j] = ue[j] * ue[j];
            }
            op.d.mul_vec_into(ue, &mut d_u);
            op.d.mul_vec_into(&sq, &mut d_sq);
            let (u_l, u_r) = op.restrict(ue);
            let (sq_l, sq_r) = op.restrict(&sq);
            let s_l = fluxes[e] - sq_l / 3.0 - u_l * u_l / 6.0;
            let s_r = fluxes[(e + 1) % ne] - sq_r / 3.0 - u_r * u_r / 6.0;
            let out = &mut du[e * n..(e + 1) * n];
            for j in 0..n {
                let volume = -(ue[j] * d_u[j] + d_sq[j]) / 3.0;
                let sat = (s_l * op.r[(0, j)] - s_r * op.r[(1, j)]) / op.weights[j];
                out[j] = inv_j * (volume + sat);
            }
        }
    }
}
