//! Preconditioned CG and BiCGSTAB.
//!
//! Both solvers stop when the recursive residual satisfies
//! `||r||^2 / ||b||^2 <= epsilon` (squared norms, no square root) or when
//! `max_iters` is reached. The true residual `s = b - A x` is recomputed every
//! `true_residual_stride` iterations and at termination; these checkpoints
//! drive the convergent / pseudo-convergent / not-convergent classification.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::{check_len, dot, norm2_sq, SparseMatrix};

/// A fixed linear operator `z = M^-1 r`.
pub trait Preconditioner: Sync {
    fn apply(&self, r: &[f64], z: &mut [f64]);
}

/// `M = I`.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityPreconditioner;

impl Preconditioner for IdentityPreconditioner {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        z.copy_from_slice(r);
    }
}

impl<P: Preconditioner + ?Sized> Preconditioner for &P {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        (**self).apply(r, z)
    }
}

impl<P: Preconditioner + ?Sized> Preconditioner for Box<P> {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        (**self).apply(r, z)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Cg,
    Bicgstab,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub method: Method,
    /// Threshold on `||r||^2 / ||b||^2`.
    pub epsilon: f64,
    pub max_iters: usize,
    pub true_residual_stride: usize,
}

impl SolverConfig {
    pub fn new(method: Method, epsilon: f64, max_iters: usize) -> Self {
        Self {
            method,
            epsilon,
            max_iters,
            true_residual_stride: 10,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidArgument("epsilon must be positive".into()));
        }
        if self.max_iters == 0 || self.true_residual_stride == 0 {
            return Err(Error::InvalidArgument(
                "max_iters and true_residual_stride must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvergenceClass {
    Convergent,
    PseudoConvergent,
    NotConvergent,
}

impl ConvergenceClass {
    pub fn as_str(self) -> &'static str {
        match self {
            ConvergenceClass::Convergent => "convergent",
            ConvergenceClass::PseudoConvergent => "pseudo_convergent",
            ConvergenceClass::NotConvergent => "not_convergent",
        }
    }
}

/// Recursive and true residual norms (squared, absolute) at one iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub iteration: usize,
    pub recursive_sq: f64,
    pub true_sq: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SolveStats {
    pub iterations: usize,
    /// `||r_k||^2 / ||b||^2` for `k = 0..=iterations`.
    pub recursive_residual_history: Vec<f64>,
    pub true_residual_checkpoints: Vec<Checkpoint>,
    pub recursive_criterion_met: bool,
    pub convergence_class: Option<ConvergenceClass>,
    /// Description of a numerical breakdown, if one stopped the iteration.
    pub breakdown: Option<String>,
    /// Seconds spent in the iteration.
    pub wall_time: f64,
    pub preconditioner_setup_time: f64,
    pub acceleration_time: f64,
}

impl SolveStats {
    pub fn class(&self) -> ConvergenceClass {
        self.convergence_class
            .unwrap_or(ConvergenceClass::NotConvergent)
    }

    /// `||s||^2 / ||r||^2` at the last checkpoint.
    pub fn final_true_to_recursive(&self) -> Option<f64> {
        self.true_residual_checkpoints
            .last()
            .map(|c| c.true_sq / c.recursive_sq)
    }
}

/// Relative change below which three consecutive true-residual checkpoints
/// count as stagnated.
pub const STAGNATION_TOL: f64 = 1e-3;
pub const STAGNATION_WINDOW: usize = 3;

/// Classifies a finished solve.
///
/// * convergent: the recursive criterion was met and the final true residual
///   confirms it, `||s||^2 <= 2 ||r||^2` (or `||s||^2 / ||b||^2 <= 2 epsilon`);
/// * pseudo-convergent: the recursive criterion was met, or the recursive
///   residual was still decreasing at the iteration cap, while the last three
///   true-residual checkpoints sit above `2 epsilon ||b||^2` and vary by less
///   than [`STAGNATION_TOL`] relative;
/// * not convergent: anything else.
pub fn classify_convergence(
    stats: &SolveStats,
    b_norm: f64,
    cfg: &SolverConfig,
) -> ConvergenceClass {
    let b_sq = b_norm * b_norm;
    let threshold = 2.0 * cfg.epsilon * b_sq;
    let cps = &stats.true_residual_checkpoints;
    let Some(last) = cps.last() else {
        return ConvergenceClass::NotConvergent;
    };
    if stats.recursive_criterion_met
        && (last.true_sq <= 2.0 * last.recursive_sq || last.true_sq <= threshold)
    {
        return ConvergenceClass::Convergent;
    }

    let stagnated = cps.len() >= STAGNATION_WINDOW && {
        let window = &cps[cps.len() - STAGNATION_WINDOW..];
        let norms: Vec<f64> = window.iter().map(|c| c.true_sq.sqrt()).collect();
        let hi = norms.iter().cloned().fold(f64::MIN, f64::max);
        let lo = norms.iter().cloned().fold(f64::MAX, f64::min);
        window.iter().all(|c| c.true_sq > threshold) && hi > 0.0 && (hi - lo) / hi < STAGNATION_TOL
    };
    let still_decreasing = !stats.recursive_criterion_met
        && stats.breakdown.is_none()
        && stats.iterations >= cfg.max_iters
        && cps.len() >= 2
        && last.recursive_sq < cps[cps.len() - 2].recursive_sq;

    if stagnated && (stats.recursive_criterion_met || still_decreasing) {
        ConvergenceClass::PseudoConvergent
    } else {
        ConvergenceClass::NotConvergent
    }
}

/// Dispatches on `cfg.method`.
pub fn solve(
    a: &SparseMatrix,
    m: &dyn Preconditioner,
    b: &[f64],
    x0: Option<&[f64]>,
    cfg: &SolverConfig,
) -> Result<(Vec<f64>, SolveStats)> {
    match cfg.method {
        Method::Cg => cg_solve(a, m, b, x0, cfg),
        Method::Bicgstab => bicgstab_solve(a, m, b, x0, cfg),
    }
}

struct Tracker<'a> {
    a: &'a SparseMatrix,
    b: &'a [f64],
    b_sq: f64,
    cfg: &'a SolverConfig,
    stats: SolveStats,
    scratch: Vec<f64>,
}

impl<'a> Tracker<'a> {
    fn new(a: &'a SparseMatrix, b: &'a [f64], cfg: &'a SolverConfig) -> Self {
        Self {
            a,
            b,
            b_sq: norm2_sq(b),
            cfg,
            stats: SolveStats::default(),
            scratch: vec![0.0; b.len()],
        }
    }

    fn record(&mut self, r_sq: f64) -> bool {
        self.stats.recursive_residual_history.push(r_sq / self.b_sq);
        let met = r_sq <= self.cfg.epsilon * self.b_sq;
        self.stats.recursive_criterion_met = met;
        met
    }

    fn checkpoint(&mut self, iteration: usize, x: &[f64], r_sq: f64) {
        if self
            .stats
            .true_residual_checkpoints
            .last()
            .map(|c| c.iteration)
            == Some(iteration)
        {
            return;
        }
        self.a
            .matvec_into(x, &mut self.scratch)
            .expect("shapes checked");
        let true_sq = self
            .b
            .iter()
            .zip(&self.scratch)
            .map(|(bi, ai)| (bi - ai) * (bi - ai))
            .sum();
        self.stats.true_residual_checkpoints.push(Checkpoint {
            iteration,
            recursive_sq: r_sq,
            true_sq,
        });
    }

    fn finish(mut self, x: &[f64], r_sq: f64, started: Instant) -> SolveStats {
        let it = self.stats.iterations;
        self.checkpoint(it, x, r_sq);
        self.stats.wall_time = started.elapsed().as_secs_f64();
        let class = classify_convergence(&self.stats, self.b_sq.sqrt(), self.cfg);
        self.stats.convergence_class = Some(class);
        self.stats
    }
}

fn prepare(
    a: &SparseMatrix,
    b: &[f64],
    x0: Option<&[f64]>,
    cfg: &SolverConfig,
) -> Result<(Vec<f64>, Vec<f64>)> {
    cfg.validate()?;
    check_len(a.n(), b.len())?;
    let x = match x0 {
        Some(x0) => {
            check_len(a.n(), x0.len())?;
            x0.to_vec()
        }
        None => vec![0.0; a.n()],
    };
    let mut r = a.matvec(&x)?;
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    Ok((x, r))
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Preconditioned conjugate gradients. `A` and `M` are assumed symmetric
/// positive definite; a nonpositive curvature `p^T A p` stops the iteration
/// as a breakdown.
pub fn cg_solve(
    a: &SparseMatrix,
    m: &dyn Preconditioner,
    b: &[f64],
    x0: Option<&[f64]>,
    cfg: &SolverConfig,
) -> Result<(Vec<f64>, SolveStats)> {
    let started = Instant::now();
    let (mut x, mut r) = prepare(a, b, x0, cfg)?;
    let mut tr = Tracker::new(a, b, cfg);
    if tr.b_sq == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok((x, trivial_stats(started)));
    }
    let n = b.len();
    let mut r_sq = norm2_sq(&r);
    tr.checkpoint(0, &x, r_sq);
    if tr.record(r_sq) {
        return Ok((x.clone(), tr.finish(&x, r_sq, started)));
    }

    let mut z = vec![0.0; n];
    let mut q = vec![0.0; n];
    m.apply(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);

    for k in 1..=cfg.max_iters {
        a.matvec_into(&p, &mut q)?;
        let pq = dot(&p, &q);
        if !(pq > 0.0) || !rz.is_finite() {
            tr.stats.breakdown = Some(format!("nonpositive curvature p^T A p = {pq:e}"));
            break;
        }
        let alpha = rz / pq;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &q, &mut r);
        r_sq = norm2_sq(&r);
        tr.stats.iterations = k;
        let met = tr.record(r_sq);
        if met || k % cfg.true_residual_stride == 0 {
            tr.checkpoint(k, &x, r_sq);
        }
        if met {
            break;
        }
        m.apply(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for (pi, zi) in p.iter_mut().zip(&z) {
            *pi = zi + beta * *pi;
        }
    }
    let stats = tr.finish(&x, r_sq, started);
    Ok((x, stats))
}

/// Right-preconditioned BiCGSTAB; the recursive residual is that of the
/// original system.
pub fn bicgstab_solve(
    a: &SparseMatrix,
    m: &dyn Preconditioner,
    b: &[f64],
    x0: Option<&[f64]>,
    cfg: &SolverConfig,
) -> Result<(Vec<f64>, SolveStats)> {
    let started = Instant::now();
    let (mut x, mut r) = prepare(a, b, x0, cfg)?;
    let mut tr = Tracker::new(a, b, cfg);
    if tr.b_sq == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok((x, trivial_stats(started)));
    }
    let n = b.len();
    let mut r_sq = norm2_sq(&r);
    tr.checkpoint(0, &x, r_sq);
    if tr.record(r_sq) {
        return Ok((x.clone(), tr.finish(&x, r_sq, started)));
    }

    let r_hat = r.clone();
    let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut p_hat = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut s_hat = vec![0.0; n];
    let mut t = vec![0.0; n];

    for k in 1..=cfg.max_iters {
        let rho_new = dot(&r_hat, &r);
        if rho_new == 0.0 || !rho_new.is_finite() {
            tr.stats.breakdown = Some(format!("rho breakdown ({rho_new:e})"));
            break;
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        m.apply(&p, &mut p_hat);
        a.matvec_into(&p_hat, &mut v)?;
        let rv = dot(&r_hat, &v);
        if rv == 0.0 || !rv.is_finite() {
            tr.stats.breakdown = Some(format!("r_hat^T v breakdown ({rv:e})"));
            break;
        }
        alpha = rho / rv;
        for i in 0..n {
            s[i] = r[i] - alpha * v[i];
        }
        tr.stats.iterations = k;
        let s_sq = norm2_sq(&s);
        if s_sq <= cfg.epsilon * tr.b_sq {
            axpy(alpha, &p_hat, &mut x);
            r.copy_from_slice(&s);
            r_sq = s_sq;
            tr.record(r_sq);
            tr.checkpoint(k, &x, r_sq);
            break;
        }
        m.apply(&s, &mut s_hat);
        a.matvec_into(&s_hat, &mut t)?;
        let tt = dot(&t, &t);
        omega = if tt > 0.0 { dot(&t, &s) / tt } else { 0.0 };
        axpy(alpha, &p_hat, &mut x);
        axpy(omega, &s_hat, &mut x);
        for i in 0..n {
            r[i] = s[i] - omega * t[i];
        }
        r_sq = norm2_sq(&r);
        let met = tr.record(r_sq);
        if met || k % cfg.true_residual_stride == 0 {
            tr.checkpoint(k, &x, r_sq);
        }
        if met {
            break;
        }
        if omega == 0.0 || !omega.is_finite() {
            tr.stats.breakdown = Some(format!("omega breakdown ({omega:e})"));
            break;
        }
    }
    let stats = tr.finish(&x, r_sq, started);
    Ok((x, stats))
}

fn trivial_stats(started: Instant) -> SolveStats {
    SolveStats {
        iterations: 0,
        recursive_residual_history: vec![0.0],
        true_residual_checkpoints: vec![Checkpoint {
            iteration: 0,
            recursive_sq: 0.0,
            true_sq: 0.0,
        }],
        recursive_criterion_met: true,
        convergence_class: Some(ConvergenceClass::Convergent),
        wall_time: started.elapsed().as_secs_f64(),
        ..SolveStats::default()
    }
}
