//! Dense linearisation of a semidiscretisation and its complex spectrum.
//!
//! The eigenvalue path is the classical one: diagonal balancing, Householder reduction
//! to upper Hessenberg form, then the Francis double-shift QR iteration with deflation.
//! Only eigenvalues are computed.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// `rhs(u) = L u + b` at a frozen time.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineOperator {
    pub matrix: Matrix,
    pub offset: Vec<f64>,
}

/// Builds `L` column by column from right-hand-side probes and checks that the map is
/// affine on a deterministic test state.
pub fn assemble_affine<F>(dim: usize, rhs: F) -> Result<AffineOperator>
where
    F: Fn(&[f64], &mut [f64]) + Sync,
{
    let mut offset = vec![0.0; dim];
    rhs(&vec![0.0; dim], &mut offset);
    let columns: Vec<Vec<f64>> = (0..dim)
        .into_par_iter()
        .map(|j| {
            let mut e = vec![0.0; dim];
            e[j] = 1.0;
            let mut col = vec![0.0; dim];
            rhs(&e, &mut col);
            for (c, b) in col.iter_mut().zip(&offset) {
                *c -= b;
            }
            col
        })
        .collect();
    let mut matrix = Matrix::zeros(dim, dim);
    for (j, col) in columns.iter().enumerate() {
        matrix.set_column(j, col);
    }

    let probe: Vec<f64> = (0..dim)
        .map(|i| (1.3 * i as f64 + 0.7).sin() + 0.25)
        .collect();
    let mut direct = vec![0.0; dim];
    rhs(&probe, &mut direct);
    let linear = matrix.mul_vec(&probe);
    let mismatch = direct
        .iter()
        .zip(&linear)
        .zip(&offset)
        .map(|((d, l), b)| (d - l - b).abs())
        .fold(0.0, f64::max);
    let probe_max = probe.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let tol = 1e-10 * matrix.max_abs().max(f64::MIN_POSITIVE) * probe_max;
    if !(mismatch <= tol) {
        return Err(Error::Analysis(format!(
            "right-hand side is not affine: probe mismatch {mismatch:.3e} exceeds {tol:.3e}"
        )));
    }
    Ok(AffineOperator { matrix, offset })
}

/// All eigenvalues of a real square matrix, in no particular order.
pub fn eigenvalues(a: &Matrix) -> Result<Vec<Complex64>> {
    if !a.is_square() {
        return Err(Error::Analysis("eigenvalues need a square matrix".into()));
    }
    if a.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(Error::Analysis("matrix has non-finite entries".into()));
    }
    let n = a.rows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut h = a.clone();
    balance(&mut h);
    hessenberg(&mut h);
    hqr(&mut h)
}

fn balance(a: &mut Matrix) {
    const RADIX: f64 = 2.0;
    let n = a.rows();
    loop {
        let mut converged = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[(j, i)].abs();
                    r += a[(i, j)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= RADIX * RADIX;
            }
            g = r * RADIX;
            while c >= g {
                f /= RADIX;
                c /= RADIX * RADIX;
            }
            if (c + r) / f < 0.95 * s {
                converged = false;
                let g = 1.0 / f;
                for v in a.row_mut(i) {
                    *v *= g;
                }
                for j in 0..n {
                    a[(j, i)] *= f;
                }
            }
        }
        if converged {
            break;
        }
    }
}

/// Householder reduction to upper Hessenberg form; the transformations are discarded.
fn hessenberg(h: &mut Matrix) {
    let n = h.rows();
    let mut ort = vec![0.0; n];
    let mut f = vec![0.0; n];
    for m in 1..n.saturating_sub(1) {
        let scale: f64 = (m..n).map(|i| h[(i, m - 1)].abs()).sum();
        if scale == 0.0 {
            continue;
        }
        let mut hh = 0.0;
        for i in (m..n).rev() {
            ort[i] = h[(i, m - 1)] / scale;
            hh += ort[i] * ort[i];
        }
        let g = if ort[m] > 0.0 { -hh.sqrt() } else { hh.sqrt() };
        hh -= ort[m] * g;
        ort[m] -= g;

        // H <- (I - u u^T / hh) H, rows m.. and columns m-1.. (column m-1 is fixed below).
        f[m..n].fill(0.0);
        for i in m..n {
            let oi = ort[i];
            for (fj, hij) in f[m..n].iter_mut().zip(&h.row(i)[m..n]) {
                *fj += oi * hij;
            }
        }
        for i in m..n {
            let oi = ort[i] / hh;
            let row = &mut h.row_mut(i)[m..n];
            for (hij, fj) in row.iter_mut().zip(&f[m..n]) {
                *hij -= oi * fj;
            }
        }
        // H <- H (I - u u^T / hh), all rows.
        for i in 0..n {
            let row = &mut h.row_mut(i)[m..n];
            let s: f64 = row.iter().zip(&ort[m..n]).map(|(a, b)| a * b).sum::<f64>() / hh;
            for (hij, oj) in row.iter_mut().zip(&ort[m..n]) {
                *hij -= s * oj;
            }
        }
        h[(m, m - 1)] = scale * g;
        for i in m + 1..n {
            h[(i, m - 1)] = 0.0;
        }
    }
}

/// Francis double-shift QR on an upper Hessenberg matrix, eigenvalues only.
fn hqr(h: &mut Matrix) -> Result<Vec<Complex64>> {
    let nn = h.rows();
    let eps = f64::EPSILON;
    let max_iterations = 30 * nn;
    let mut wr = vec![0.0; nn];
    let mut wi = vec![0.0; nn];

    let mut norm = 0.0;
    for i in 0..nn {
        for j in i.saturating_sub(1)..nn {
            norm += h[(i, j)].abs();
        }
    }

    let mut total_iterations = 0usize;
    let mut iter = 0usize;
    let mut exshift = 0.0;
    let mut n = nn as isize - 1;
    let (mut p, mut q, mut r, mut s, mut z): (f64, f64, f64, f64, f64);
    let (mut x, mut y, mut w);

    while n >= 0 {
        let nu = n as usize;
        // Find the lowest negligible subdiagonal entry.
        let mut l = nu;
        while l > 0 {
            s = h[(l - 1, l - 1)].abs() + h[(l, l)].abs();
            if s == 0.0 {
                s = norm;
            }
            if h[(l, l - 1)].abs() < eps * s {
                break;
            }
            l -= 1;
        }

        if l == nu {
            wr[nu] = h[(nu, nu)] + exshift;
            wi[nu] = 0.0;
            n -= 1;
            iter = 0;
        } else if l + 1 == nu {
            w = h[(nu, nu - 1)] * h[(nu - 1, nu)];
            p = (h[(nu - 1, nu - 1)] - h[(nu, nu)]) / 2.0;
            q = p * p + w;
            z = q.abs().sqrt();
            x = h[(nu, nu)] + exshift;
            if q >= 0.0 {
                z = if p >= 0.0 { p + z } else { p - z };
                wr[nu - 1] = x + z;
                wr[nu] = if z != 0.0 { x - w / z } else { x + z };
                wi[nu - 1] = 0.0;
                wi[nu] = 0.0;
            } else {
                wr[nu - 1] = x + p;
                wr[nu] = x + p;
                wi[nu - 1] = z;
                wi[nu] = -z;
            }
            n -= 2;
            iter = 0;
        } else {
            x = h[(nu, nu)];
            y = h[(nu - 1, nu - 1)];
            w = h[(nu, nu - 1)] * h[(nu - 1, nu)];

            if iter == 10 {
                exshift += x;
                for i in 0..=nu {
                    h[(i, i)] -= x;
                }
                s = h[(nu, nu - 1)].abs() + h[(nu - 1, nu - 2)].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            if iter == 30 {
                s = (y - x) / 2.0;
                s = s * s + w;
                if s > 0.0 {
                    s = s.sqrt();
                    if y < x {
                        s = -s;
                    }
                    s = x - w / ((y - x) / 2.0 + s);
                    for i in 0..=nu {
                        h[(i, i)] -= s;
                    }
                    exshift += s;
                    x = 0.964;
                    y = x;
                    w = x;
                }
            }
            iter += 1;
            total_iterations += 1;
            if total_iterations > max_iterations {
                return Err(Error::Analysis(format!(
                    "QR iteration did not converge within {max_iterations} sweeps"
                )));
            }

            // Look for two consecutive small subdiagonal entries.
            let mut m = nu - 2;
            loop {
                z = h[(m, m)];
                r = x - z;
                s = y - z;
                p = (r * s - w) / h[(m + 1, m)] + h[(m, m + 1)];
                q = h[(m + 1, m + 1)] - z - r - s;
                r = h[(m + 2, m + 1)];
                s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let lhs = h[(m, m - 1)].abs() * (q.abs() + r.abs());
                let rhs =
                    eps * (p.abs() * (h[(m - 1, m - 1)].abs() + z.abs() + h[(m + 1, m + 1)].abs()));
                if lhs < rhs {
                    break;
                }
                m -= 1;
            }
            for i in m + 2..=nu {
                h[(i, i - 2)] = 0.0;
                if i > m + 2 {
                    h[(i, i - 3)] = 0.0;
                }
            }

            // Double QR step on rows l..=n and columns m..=n.
            for k in m..nu {
                let notlast = k + 1 != nu;
                if k != m {
                    p = h[(k, k - 1)];
                    q = h[(k + 1, k - 1)];
                    r = if notlast { h[(k + 2, k - 1)] } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x == 0.0 {
                        continue;
                    }
                    p /= x;
                    q /= x;
                    r /= x;
                }
                s = (p * p + q * q + r * r).sqrt();
                if p < 0.0 {
                    s = -s;
                }
                if s == 0.0 {
                    continue;
                }
                if k != m {
                    h[(k, k - 1)] = -s * x;
                } else if l != m {
                    h[(k, k - 1)] = -h[(k, k - 1)];
                }
                p += s;
                x = p / s;
                y = q / s;
                z = r / s;
                q /= p;
                r /= p;

                for j in k..=nu {
                    let mut t = h[(k, j)] + q * h[(k + 1, j)];
                    if notlast {
                        t += r * h[(k + 2, j)];
                        h[(k + 2, j)] -= t * z;
                    }
                    h[(k, j)] -= t * x;
                    h[(k + 1, j)] -= t * y;
                }
                for i in l..=nu.min(k + 3) {
                    let mut t = x * h[(i, k)] + y * h[(i, k + 1)];
                    if notlast {
                        t += z * h[(i, k + 2)];
                        h[(i, k + 2)] -= t * r;
                    }
                    h[(i, k)] -= t;
                    h[(i, k + 1)] -= t * q;
                }
            }
        }
    }
    Ok(wr
        .into_iter()
        .zip(wi)
        .map(|(re, im)| Complex64::new(re, im))
        .collect())
}

/// Largest real part.
pub fn spectral_abscissa(eigs: &[Complex64]) -> f64 {
    eigs.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
}

/// `||L v - lambda v||_2` for the best of two inverse-iteration iterates, `||v||_2 = 1`.
pub fn eigenpair_residual(a: &Matrix, lambda: Complex64) -> Result<f64> {
    let n = a.rows();
    let scale = a.frobenius_norm().max(f64::MIN_POSITIVE);
    let mut lu: Vec<Complex64> = a
        .as_slice()
        .iter()
        .map(|&v| Complex64::new(v, 0.0))
        .collect();
    for i in 0..n {
        lu[i * n + i] -= lambda;
    }
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let pivot = (k..n)
            .max_by(|&i, &j| lu[i * n + k].norm().total_cmp(&lu[j * n + k].norm()))
            .unwrap_or(k);
        if pivot != k {
            for j in 0..n {
                lu.swap(k * n + j, pivot * n + j);
            }
            perm.swap(k, pivot);
        }
        if lu[k * n + k].norm() < f64::EPSILON * scale {
            lu[k * n + k] = Complex64::new(f64::EPSILON * scale, 0.0);
        }
        let inv = lu[k * n + k].inv();
        for i in k + 1..n {
            let factor = lu[i * n + k] * inv;
            lu[i * n + k] = factor;
            if factor == Complex64::new(0.0, 0.0) {
                continue;
            }
            for j in k + 1..n {
                let v = lu[k * n + j];
                lu[i * n + j] -= factor * v;
            }
        }
    }
    let solve = |b: &[Complex64]| -> Vec<Complex64> {
        let mut y: Vec<Complex64> = perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                let v = lu[i * n + j] * y[j];
                y[i] -= v;
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let v = lu[i * n + j] * y[j];
                y[i] -= v;
            }
            y[i] /= lu[i * n + i];
        }
        y
    };
    let normalize = |v: &mut Vec<Complex64>| {
        let nrm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in v.iter_mut() {
            *z /= nrm;
        }
    };
    let residual = |v: &[Complex64]| -> f64 {
        let mut res = 0.0;
        for i in 0..n {
            let row = a.row(i);
            let mut s = -lambda * v[i];
            for j in 0..n {
                s += row[j] * v[j];
            }
            res += s.norm_sqr();
        }
        res.sqrt()
    };
    let mut v: Vec<Complex64> = (0..n)
        .map(|i| Complex64::new(1.0 + (i % 7) as f64 * 0.1, (i % 3) as f64 * 0.05))
        .collect();
    normalize(&mut v);
    // For nearly defective eigenvalues later iterates can drift away from the null
    // direction found by the first solve, so the best iterate is kept.
    let mut best = f64::INFINITY;
    for _ in 0..2 {
        v = solve(&v);
        if v.iter().any(|z| !z.is_finite()) {
            return Err(Error::Analysis(
                "inverse iteration produced non-finite values".into(),
            ));
        }
        normalize(&mut v);
        best = best.min(residual(&v));
    }
    Ok(best)
}

/// Sorts lexicographically by (real, imaginary) part.
pub fn sort_eigenvalues(eigs: &mut [Complex64]) {
    eigs.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}
