//! Matrix-free Krylov solvers on flat `f64` vectors.

use alloc::vec;
use alloc::vec::Vec;
use num_traits::Float;

#[derive(Debug, Clone, PartialEq)]
pub struct KrylovResult {
    pub solution: Vec<f64>,
    pub iterations: usize,
    pub residual_ratio: f64,
    pub converged: bool,
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Preconditioned conjugate gradients for a symmetric positive definite
/// operator, starting from zero.
pub fn pcg(
    mut apply: impl FnMut(&[f64]) -> Vec<f64>,
    mut precondition: impl FnMut(&[f64]) -> Vec<f64>,
    rhs: &[f64],
    rel_tol: f64,
    max_iter: usize,
) -> KrylovResult {
    let n = rhs.len();
    let rhs_norm = norm(rhs);
    let mut x = vec![0.0; n];
    if rhs_norm == 0.0 {
        return KrylovResult {
            solution: x,
            iterations: 0,
            residual_ratio: 0.0,
            converged: true,
        };
    }
    let mut r = rhs.to_vec();
    let mut z = precondition(&r);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ratio = 1.0;
    for it in 1..=max_iter {
        let ap = apply(&p);
        let step = rz / dot(&p, &ap);
        for i in 0..n {
            x[i] += step * p[i];
            r[i] -= step * ap[i];
        }
        ratio = norm(&r) / rhs_norm;
        if ratio <= rel_tol {
            return KrylovResult {
                solution: x,
                iterations: it,
                residual_ratio: ratio,
                converged: true,
            };
        }
        z = precondition(&r);
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    KrylovResult {
        solution: x,
        iterations: max_iter,
        residual_ratio: ratio,
        converged: false,
    }
}

/// Unrestarted GMRES with Givens rotations, starting from zero.
pub fn gmres(
    mut apply: impl FnMut(&[f64]) -> Vec<f64>,
    rhs: &[f64],
    rel_tol: f64,
    max_iter: usize,
) -> KrylovResult {
    let n = rhs.len();
    let beta = norm(rhs);
    if beta == 0.0 {
        return KrylovResult {
            solution: vec![0.0; n],
            iterations: 0,
            residual_ratio: 0.0,
            converged: true,
        };
    }
    let mut basis: Vec<Vec<f64>> = vec![rhs.iter().map(|v| v / beta).collect()];
    // Hessenberg columns, already rotated.
    let mut h: Vec<Vec<f64>> = Vec::new();
    let mut cs: Vec<f64> = Vec::new();
    let mut sn: Vec<f64> = Vec::new();
    let mut g = vec![beta];
    let mut ratio = 1.0;
    let mut k = 0;
    while k < max_iter {
        let mut w = apply(&basis[k]);
        let mut col = vec![0.0; k + 2];
        // Modified Gram–Schmidt.
        for (j, v) in basis.iter().enumerate() {
            let hj = dot(&w, v);
            col[j] = hj;
            for i in 0..n {
                w[i] -= hj * v[i];
            }
        }
        let wn = norm(&w);
        col[k + 1] = wn;
        for j in 0..k {
            let t = cs[j] * col[j] + sn[j] * col[j + 1];
            col[j + 1] = -sn[j] * col[j] + cs[j] * col[j + 1];
            col[j] = t;
        }
        let denom = (col[k] * col[k] + col[k + 1] * col[k + 1]).sqrt();
        let (c, s) = if denom == 0.0 { (1.0, 0.0) } else { (col[k] / denom, col[k + 1] / denom) };
        col[k] = c * col[k] + s * col[k + 1];
        col[k + 1] = 0.0;
        cs.push(c);
        sn.push(s);
        let gk = g[k];
        g[k] = c * gk;
        g.push(-s * gk);
        h.push(col);
        k += 1;
        ratio = g[k].abs() / beta;
        if ratio <= rel_tol || wn == 0.0 {
            break;
        }
        basis.push(w.iter().map(|v| v / wn).collect());
    }
    // Back substitution on the triangular system.
    let mut y = vec![0.0; k];
    for i in (0..k).rev() {
        let mut acc = g[i];
        for j in i + 1..k {
            acc -= h[j][i] * y[j];
        }
        y[i] = acc / h[i][i];
    }
    let mut x = vec![0.0; n];
    for (j, yj) in y.iter().enumerate() {
        for i in 0..n {
            x[i] += yj * basis[j][i];
        }
    }
    KrylovResult {
        solution: x,
        iterations: k,
        residual_ratio: ratio,
        converged: ratio <= rel_tol,
    }
}
