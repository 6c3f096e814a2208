//! Nodal summation-by-parts operators on the reference element [-1, 1].
//!
//! An operator bundles the nodes, the diagonal mass matrix (stored as weights),
//! the derivative matrix `D` and the restriction `R` to the element endpoints.
//! Together they satisfy `M D + D^T M = R^T B R` with `B = diag(-1, 1)`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

const NEWTON_TOL: f64 = 1e-15;
const NEWTON_MAX_ITER: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeFamily {
    /// Legendre-Gauss-Lobatto points, including both endpoints.
    Lobatto,
    /// Legendre-Gauss points, strictly interior.
    Gauss,
}

/// Pointwise multiplication `u -> c * u` by a fixed nodal vector.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalMultiplier {
    pub coefficients: Vec<f64>,
}

impl DiagonalMultiplier {
    pub fn new(coefficients: Vec<f64>) -> Self {
        Self { coefficients }
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        self.coefficients
            .iter()
            .zip(u)
            .map(|(c, v)| c * v)
            .collect()
    }

    pub fn to_matrix(&self) -> Matrix {
        Matrix::from_diagonal(&self.coefficients)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SbpOperator {
    /// Polynomial degree; the element carries `degree + 1` nodes.
    pub degree: usize,
    pub family: NodeFamily,
    /// Strictly increasing nodes in [-1, 1].
    pub nodes: Vec<f64>,
    /// Quadrature weights, i.e. the diagonal of `M`.
    pub weights: Vec<f64>,
    /// Nodal derivative matrix, `d[(i, j)] = l_j'(x_i)`.
    pub d: Matrix,
    /// Row 0 evaluates at -1, row 1 at +1.
    pub r: Matrix,
}

impl SbpOperator {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `B = diag(-1, 1)`.
    pub fn boundary(&self) -> [f64; 2] {
        [-1.0, 1.0]
    }

    pub fn mass_matrix(&self) -> Matrix {
        Matrix::from_diagonal(&self.weights)
    }

    pub fn includes_endpoints(&self) -> bool {
        self.family == NodeFamily::Lobatto
    }

    /// Left and right traces `(R u)_0`, `(R u)_1`.
    pub fn restrict(&self, u: &[f64]) -> (f64, f64) {
        (dot(self.r.row(0), u), dot(self.r.row(1), u))
    }

    /// `max |M D + D^T M - R^T B R|`.
    pub fn sbp_residual(&self) -> f64 {
        let n = self.len();
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                let md = self.weights[i] * self.d[(i, j)] + self.d[(j, i)] * self.weights[j];
                let rbr = self.r[(1, i)] * self.r[(1, j)] - self.r[(0, i)] * self.r[(0, j)];
                worst = worst.max((md - rbr).abs());
            }
        }
        worst
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Legendre polynomial `P_n(x)` and its derivative by the three-term recurrence.
pub fn legendre_eval(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p_prev, mut p) = (1.0, x);
    let (mut dp_prev, mut dp) = (0.0, 1.0);
    for k in 1..n {
        let kf = k as f64;
        let p_next = ((2.0 * kf + 1.0) * x * p - kf * p_prev) / (kf + 1.0);
        let dp_next = dp_prev + (2.0 * kf + 1.0) * p;
        p_prev = p;
        p = p_next;
        dp_prev = dp;
        dp = dp_next;
    }
    (p, dp)
}

/// Quadrature nodes (ascending) and positive weights of the given family.
pub fn nodes_weights(family: NodeFamily, p: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if p < 1 {
        return Err(Error::Construction(format!(
            "degree must be at least 1, got {p}"
        )));
    }
    let (mut nodes, mut weights) = match family {
        NodeFamily::Gauss => gauss_rule(p)?,
        NodeFamily::Lobatto => lobatto_rule(p)?,
    };
    symmetrize(&mut nodes, &mut weights);
    Ok((nodes, weights))
}

fn gauss_rule(p: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = p + 1;
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for k in 0..n {
        let guess = -((2 * k + 1) as f64 * PI / (2 * n) as f64).cos();
        let x = newton(guess, |x| legendre_eval(n, x))?;
        let (_, dp) = legendre_eval(n, x);
        nodes.push(x);
        weights.push(2.0 / ((1.0 - x * x) * dp * dp));
    }
    Ok((nodes, weights))
}

fn lobatto_rule(p: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let pf = p as f64;
    let mut nodes = Vec::with_capacity(p + 1);
    nodes.push(-1.0);
    for k in 1..p {
        let guess = -(k as f64 * PI / pf).cos();
        // Newton on P_p' using P_p'' = (2x P_p' - p(p+1) P_p) / (1 - x^2).
        let x = newton(guess, |x| {
            let (v, dv) = legendre_eval(p, x);
            (dv, (2.0 * x * dv - pf * (pf + 1.0) * v) / (1.0 - x * x))
        })?;
        nodes.push(x);
    }
    nodes.push(1.0);
    let weights = nodes
        .iter()
        .map(|&x| {
            let (v, _) = legendre_eval(p, x);
            2.0 / (pf * (pf + 1.0) * v * v)
        })
        .collect();
    Ok((nodes, weights))
}

fn newton(mut x: f64, f: impl Fn(f64) -> (f64, f64)) -> Result<f64> {
    for _ in 0..NEWTON_MAX_ITER {
        let (v, dv) = f(x);
        let step = v / dv;
        x -= step;
        if step.abs() <= NEWTON_TOL {
            return Ok(x);
        }
    }
    Err(Error::Construction(format!(
        "node iteration did not converge after {NEWTON_MAX_ITER} steps near x = {x}"
    )))
}

/// Enforces exact mirror symmetry about 0 so results do not depend on rounding order.
fn symmetrize(nodes: &mut [f64], weights: &mut [f64]) {
    let n = nodes.len();
    for i in 0..n / 2 {
        let j = n - 1 - i;
        let x = 0.5 * (nodes[j] - nodes[i]);
        let w = 0.5 * (weights[i] + weights[j]);
        nodes[i] = -x;
        nodes[j] = x;
        weights[i] = w;
        weights[j] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
}

fn check_distinct(nodes: &[f64]) -> Result<()> {
    for i in 0..nodes.len() {
        for j in i + 1..nodes.len() {
            if nodes[i] == nodes[j] {
                return Err(Error::Construction(format!("duplicate node {}", nodes[i])));
            }
        }
    }
    Ok(())
}

/// `w_j = 1 / prod_{k != j} (x_j - x_k)`.
pub fn barycentric_weights(nodes: &[f64]) -> Vec<f64> {
    (0..nodes.len())
        .map(|j| {
            let prod: f64 = (0..nodes.len())
                .filter(|&k| k != j)
                .map(|k| nodes[j] - nodes[k])
                .product();
            1.0 / prod
        })
        .collect()
}

pub fn derivative_matrix(nodes: &[f64]) -> Result<Matrix> {
    check_distinct(nodes)?;
    let n = nodes.len();
    let w = barycentric_weights(nodes);
    let mut d = Matrix::zeros(n, n);
    for i in 0..n {
        let mut diag = 0.0;
        for j in 0..n {
            if i != j {
                let v = (w[j] / w[i]) / (nodes[i] - nodes[j]);
                d[(i, j)] = v;
                diag -= v;
            }
        }
        d[(i, i)] = diag;
    }
    Ok(d)
}

/// Row `k` holds the Lagrange basis values `l_j(targets[k])`.
pub fn interpolation_matrix(nodes: &[f64], targets: &[f64]) -> Result<Matrix> {
    check_distinct(nodes)?;
    let w = barycentric_weights(nodes);
    let mut out = Matrix::zeros(targets.len(), nodes.len());
    for (k, &t) in targets.iter().enumerate() {
        out.row_mut(k).copy_from_slice(&lagrange_row(nodes, &w, t));
    }
    Ok(out)
}

fn lagrange_row(nodes: &[f64], w: &[f64], t: f64) -> Vec<f64> {
    if let Some(hit) = nodes.iter().position(|&x| x == t) {
        let mut row = vec![0.0; nodes.len()];
        row[hit] = 1.0;
        return row;
    }
    let terms: Vec<f64> = nodes.iter().zip(w).map(|(&x, &wj)| wj / (t - x)).collect();
    let sum: f64 = terms.iter().sum();
    terms.into_iter().map(|v| v / sum).collect()
}

/// Evaluates the nodal interpolant of `values` at `t`.
pub fn interpolate(nodes: &[f64], values: &[f64], t: f64) -> f64 {
    let w = barycentric_weights(nodes);
    dot(&lagrange_row(nodes, &w, t), values)
}

pub fn restriction_matrix(nodes: &[f64]) -> Result<Matrix> {
    interpolation_matrix(nodes, &[-1.0, 1.0])
}

pub fn build_operator(family: NodeFamily, p: usize) -> Result<SbpOperator> {
    let (nodes, weights) = nodes_weights(family, p)?;
    let d = derivative_matrix(&nodes)?;
    let r = restriction_matrix(&nodes)?;
    Ok(SbpOperator {
        degree: p,
        family,
        nodes,
        weights,
        d,
        r,
    })
}

/// `M^{-1} diag(c)^T M`, which is `diag(c)` for the diagonal norms used here.
pub fn m_adjoint(op: &SbpOperator, c: &DiagonalMultiplier) -> Matrix {
    assert_eq!(c.len(), op.len(), "multiplier size must match the operator");
    c.to_matrix()
}

/// `M^{-1} diag(c)^T M` for an arbitrary symmetric positive definite `M`.
pub fn m_adjoint_with_mass(mass: &Matrix, c: &DiagonalMultiplier) -> Result<Matrix> {
    if mass.rows() != c.len() || !mass.is_square() {
        return Err(Error::Domain(
            "mass matrix and multiplier sizes differ".into(),
        ));
    }
    mass.solve(&c.to_matrix().matmul(mass))
}

/// Exact `L^2(-1, 1)` Gram matrix of the Lagrange basis on `nodes`.
pub fn exact_mass_matrix(nodes: &[f64]) -> Result<Matrix> {
    let n = nodes.len();
    // Products have degree 2(n-1); a Gauss rule with n points integrates degree 2n-1.
    let (qx, qw) = nodes_weights(NodeFamily::Gauss, n.max(2) - 1)?;
    let l = interpolation_matrix(nodes, &qx)?;
    Ok(Matrix::from_fn(n, n, |i, j| {
        (0..qx.len()).map(|q| qw[q] * l[(q, i)] * l[(q, j)]).sum()
    }))
}
