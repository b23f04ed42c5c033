//! Null-space solve of 𝓛ρ = 0 with Tr ρ = 1.
//!
//! The first row of 𝓛 (the equation for ρ_00) is replaced by the trace
//! functional, turning the singular homogeneous problem into a regular
//! linear system whenever the steady state is unique.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::liouvillian::CsrMatrix;
use crate::error::{Error, Result};

/// Largest Liouvillian dimension solved by dense LU (Fock cutoff ≤ 9).
pub const DIRECT_LIMIT: usize = 1600;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverMethod {
    /// Dense LU up to [`DIRECT_LIMIT`], GMRES above.
    Auto,
    Direct,
    Iterative,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub method: SolverMethod,
    /// Required ‖𝓛ρ‖ / ‖𝓛‖_F.
    pub residual_tol: f64,
    /// GMRES iteration cap (Arnoldi steps over all restarts).
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { method: SolverMethod::Auto, residual_tol: 1e-10, max_iter: 50_000 }
    }
}

pub(crate) struct Solution {
    pub vec_rho: Vec<Complex64>,
    pub residual: f64,
}

/// Smallest |U_ii| / largest |U_ii| accepted from the LU factorization.
const PIVOT_RATIO_FLOOR: f64 = 1e-13;

pub(crate) fn solve_null_space(l: &CsrMatrix, d: usize, opts: &SolverOptions) -> Result<Solution> {
    let n = l.dim();
    // The trace row is weighted like the rest of 𝓛 so that the system stays
    // balanced for the Krylov solver; the weight cancels in the solution.
    let weight = l.diagonal().iter().map(|v| v.norm()).fold(0.0, f64::max).max(1.0);
    let trace_row: Vec<(usize, Complex64)> = (0..d).map(|i| (i + i * d, Complex64::new(weight, 0.0))).collect();
    let a = l.with_row(0, &trace_row);
    let mut b = vec![Complex64::new(0.0, 0.0); n];
    b[0] = Complex64::new(weight, 0.0);

    let direct = match opts.method {
        SolverMethod::Auto => n <= DIRECT_LIMIT,
        SolverMethod::Direct => true,
        SolverMethod::Iterative => false,
    };
    let mut x = if direct { solve_direct(&a, &b)? } else { gmres(&a, &b, opts)? };

    let trace: Complex64 = (0..d).map(|i| x[i + i * d]).sum();
    if !(trace.norm() > 0.0) || !trace.re.is_finite() {
        return Err(Error::NoUniqueSteadyState("solution has vanishing trace".into()));
    }
    x.iter_mut().for_each(|v| *v /= trace);

    let r = l.mul_vec(&x);
    let rho_norm = x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    let residual = r.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt() / (l.frobenius_norm() * rho_norm.max(1.0));
    if !(residual <= opts.residual_tol) {
        return Err(Error::SolverNotConverged { iterations: if direct { 1 } else { opts.max_iter }, residual });
    }
    Ok(Solution { vec_rho: x, residual })
}

fn solve_direct(a: &CsrMatrix, b: &[Complex64]) -> Result<Vec<Complex64>> {
    let dense = a.to_dense();
    let lu = dense.lu();
    let u = lu.u();
    let diag = u.diagonal();
    let (lo, hi) = diag.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), z| (lo.min(z.norm()), hi.max(z.norm())));
    if !(lo > PIVOT_RATIO_FLOOR * hi) {
        return Err(Error::NoUniqueSteadyState(format!(
            "Liouvillian null space is degenerate (pivot ratio {:.3e})",
            lo / hi
        )));
    }
    let rhs = DMatrix::from_column_slice(b.len(), 1, b);
    let x = lu
        .solve(&rhs)
        .ok_or_else(|| Error::NoUniqueSteadyState("singular constrained Liouvillian".into()))?;
    Ok(x.as_slice().to_vec())
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// Krylov basis size between GMRES restarts.
const RESTART: usize = 200;

/// Jacobi right-preconditioned restarted GMRES on the trace-constrained
/// system.
fn gmres(a: &CsrMatrix, b: &[Complex64], opts: &SolverOptions) -> Result<Vec<Complex64>> {
    let n = b.len();
    let zero = Complex64::new(0.0, 0.0);
    let inv_diag: Vec<Complex64> = a
        .diagonal()
        .into_iter()
        .map(|d| if d.norm() > 0.0 { d.inv() } else { Complex64::new(1.0, 0.0) })
        .collect();
    let precond = |v: &[Complex64]| -> Vec<Complex64> { v.iter().zip(&inv_diag).map(|(x, m)| x * m).collect() };

    // Relative target on the constrained system; the physical residual is
    // checked again by the caller.
    let target = opts.residual_tol * 1e-2 * norm(b);
    let m = RESTART.min(n);
    let mut x = vec![zero; n];
    let mut iterations = 0;
    loop {
        let ax = a.mul_vec(&x);
        let r: Vec<Complex64> = b.iter().zip(&ax).map(|(p, q)| p - q).collect();
        let beta = norm(&r);
        if beta <= target {
            return Ok(x);
        }
        if iterations >= opts.max_iter {
            return Err(Error::SolverNotConverged { iterations, residual: beta / norm(b) });
        }
        let mut basis = vec![r.iter().map(|v| v / beta).collect::<Vec<_>>()];
        let mut h = vec![vec![zero; m]; m + 1];
        let (mut cs, mut sn) = (vec![zero; m], vec![zero; m]);
        let mut g = vec![zero; m + 1];
        g[0] = Complex64::new(beta, 0.0);
        let mut k = 0;
        while k < m && iterations < opts.max_iter {
            let mut w = a.mul_vec(&precond(&basis[k]));
            for (i, v) in basis.iter().enumerate() {
                let hij = dot(v, &w);
                h[i][k] = hij;
                w.iter_mut().zip(v).for_each(|(wi, vi)| *wi -= hij * vi);
            }
            let hn = norm(&w);
            h[k + 1][k] = Complex64::new(hn, 0.0);
            for i in 0..k {
                let top = cs[i].conj() * h[i][k] + sn[i].conj() * h[i + 1][k];
                h[i + 1][k] = -sn[i] * h[i][k] + cs[i] * h[i + 1][k];
                h[i][k] = top;
            }
            let rho = (h[k][k].norm_sqr() + hn * hn).sqrt();
            cs[k] = h[k][k] / rho;
            sn[k] = Complex64::new(hn / rho, 0.0);
            h[k][k] = Complex64::new(rho, 0.0);
            h[k + 1][k] = zero;
            g[k + 1] = -sn[k] * g[k];
            g[k] = cs[k].conj() * g[k];
            k += 1;
            iterations += 1;
            if g[k].norm() <= target || hn == 0.0 {
                break;
            }
            basis.push(w.iter().map(|v| v / hn).collect());
        }
        let mut y = vec![zero; k];
        for i in (0..k).rev() {
            let s: Complex64 = (i + 1..k).map(|j| h[i][j] * y[j]).sum();
            y[i] = (g[i] - s) / h[i][i];
        }
        let mut update = vec![zero; n];
        for (yi, v) in y.iter().zip(&basis) {
            update.iter_mut().zip(v).for_each(|(u, vi)| *u += yi * vi);
        }
        x.iter_mut().zip(precond(&update)).for_each(|(xi, u)| *xi += u);
    }
}
