use std::fmt::Write;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use super::sparse::{dot, norm, CsrMatrix};

#[derive(Clone, Debug, PartialEq)]
pub struct SolveOptions {
    /// Stop once `‖Aᵀ(Q − Au)‖ / ‖AᵀQ‖ <= tol`.
    pub tol: f64,
    pub max_iter: usize,
    /// Additionally require `‖Q − Au‖ / ‖Q‖ <= primal_tol`.
    pub primal_tol: Option<f64>,
    /// Scale by the inverse diagonal of AᵀA.
    pub jacobi: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 20_000,
            primal_tol: None,
            jacobi: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    pub converged: bool,
    /// Final `‖Aᵀ(Q − Au)‖ / ‖AᵀQ‖`.
    pub normal_residual: f64,
    /// Final `‖Q − Au‖ / ‖Q‖`, recomputed from the solution.
    pub primal_residual: f64,
    /// Normal residual after every iteration, starting with the initial one.
    pub history: Vec<f64>,
    /// Primal residual after every iteration, from the recurrence.
    pub primal_history: Vec<f64>,
    pub wall_time: Duration,
}

impl SolveReport {
    /// Text log: a summary block then one line per iteration.
    pub fn to_log(&self) -> String {
        let mut s = String::new();
        writeln!(s, "converged {}", self.converged).unwrap();
        writeln!(s, "iterations {}", self.iterations).unwrap();
        writeln!(s, "normal_residual {:e}", self.normal_residual).unwrap();
        writeln!(s, "primal_residual {:e}", self.primal_residual).unwrap();
        writeln!(s, "wall_time_s {:.6}", self.wall_time.as_secs_f64()).unwrap();
        writeln!(s, "iter normal primal").unwrap();
        for (k, (n, p)) in self.history.iter().zip(&self.primal_history).enumerate() {
            writeln!(s, "{k} {n:e} {p:e}").unwrap();
        }
        s
    }
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.par_iter_mut().zip(x.par_iter()).for_each(|(yi, xi)| *yi += alpha * xi);
}

/// Conjugate gradients on `AᵀA u = AᵀQ` with `at = Aᵀ`, never forming AᵀA.
pub fn cgnr(a: &CsrMatrix, at: &CsrMatrix, q: &[f64], opts: &SolveOptions) -> (Vec<f64>, SolveReport) {
    let start = Instant::now();
    let n = a.ncols;
    let mut u = vec![0.0; n];
    let mut r = q.to_vec();
    let q_norm = norm(q);
    let mut z = at.mul(&r);
    let ref_norm = norm(&z);
    let inv_diag: Option<Vec<f64>> = opts.jacobi.then(|| {
        at.row_norms_sq()
            .into_iter()
            .map(|d| if d > 0.0 { 1.0 / d } else { 1.0 })
            .collect()
    });
    let precondition = |z: &[f64]| -> Vec<f64> {
        match &inv_diag {
            Some(d) => z.par_iter().zip(d.par_iter()).map(|(a, b)| a * b).collect(),
            None => z.to_vec(),
        }
    };
    let rel = |x: f64, base: f64| if base > 0.0 { x / base } else { 0.0 };

    let mut normal = rel(ref_norm, ref_norm);
    let mut primal = rel(q_norm, q_norm);
    let mut history = vec![normal];
    let mut primal_history = vec![primal];
    let done = |normal: f64, primal: f64| {
        normal <= opts.tol && opts.primal_tol.is_none_or(|t| primal <= t)
    };

    let mut iterations = 0;
    if ref_norm > 0.0 {
        let mut s = precondition(&z);
        let mut p = s.clone();
        let mut zs = dot(&z, &s);
        let mut w = vec![0.0; a.nrows];
        while iterations < opts.max_iter && !done(normal, primal) {
            a.matvec(&p, &mut w);
            let ww = dot(&w, &w);
            if ww == 0.0 || zs == 0.0 {
                break;
            }
            let alpha = zs / ww;
            axpy(alpha, &p, &mut u);
            axpy(-alpha, &w, &mut r);
            at.matvec(&r, &mut z);
            s = precondition(&z);
            let zs_new = dot(&z, &s);
            let beta = zs_new / zs;
            zs = zs_new;
            p.par_iter_mut().zip(s.par_iter()).for_each(|(pi, si)| *pi = si + beta * *pi);
            iterations += 1;
            normal = rel(norm(&z), ref_norm);
            primal = rel(norm(&r), q_norm);
            history.push(normal);
            primal_history.push(primal);
        }
    }

    // residuals from the solution itself, not the recurrence
    let au = a.mul(&u);
    let true_r: Vec<f64> = q.iter().zip(&au).map(|(a, b)| a - b).collect();
    let primal_residual = rel(norm(&true_r), q_norm);
    let normal_residual = rel(norm(&at.mul(&true_r)), ref_norm);
    let converged = ref_norm == 0.0 || done(normal, primal);
    (
        u,
        SolveReport {
            iterations,
            converged,
            normal_residual,
            primal_residual,
            history,
            primal_history,
            wall_time: start.elapsed(),
        },
    )
}
