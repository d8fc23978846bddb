//! Acceleration parameters for ILU factors.
//!
//! Given factors `L, D, U`, the accelerated preconditioner is
//!
//! ```text
//! M(phi, gamma) = (phi L + gamma D) (gamma D)^-1 (gamma D + phi U)
//!               = phi L + gamma D + phi U + phi^2 / gamma * L D^-1 U
//! ```
//!
//! and the parameters are chosen to minimize `f = ||(A - M) e||^2` with `e`
//! the all-ones vector. Because only `M e` enters `f`, the triple product
//! collapses to the row sums `t = L D^-1 (U e)`, so with per-row data
//! `s = A e`, `c = (L + U) e`, `d = diag(D)`:
//!
//! ```text
//! f(phi, gamma) = sum_i (s_i - phi c_i - gamma d_i - phi^2 / gamma * t_i)^2
//! ```
//!
//! Building the data costs two sparse matvecs; every later evaluation of
//! `f`, its gradient or its Hessian is `O(n)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factor::FactorTriple;
use crate::krylov::Preconditioner;
use crate::sparse::{check_len, SparseMatrix};
use crate::triangular::{check_diagonal, lower_solve_into};

/// The scalar pair `(phi, gamma)` rescaling the triangular and diagonal factors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AccelerationParams {
    pub phi: f64,
    pub gamma: f64,
}

impl AccelerationParams {
    /// `(1, 1)`: the unaccelerated factorization.
    pub const BASELINE: Self = Self {
        phi: 1.0,
        gamma: 1.0,
    };

    pub fn new(phi: f64, gamma: f64) -> Result<Self> {
        let p = Self { phi, gamma };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.phi.is_finite() || !self.gamma.is_finite() {
            return Err(Error::InvalidArgument(
                "acceleration parameters must be finite".into(),
            ));
        }
        if self.phi == 0.0 {
            return Err(Error::InvalidArgument("phi must be nonzero".into()));
        }
        if self.gamma == 0.0 {
            return Err(Error::GammaPole);
        }
        Ok(())
    }

    pub fn ratio(&self) -> f64 {
        self.gamma / self.phi
    }

    /// Whether `gamma / phi <= 1` holds (up to `1e-12`).
    pub fn satisfies_constraint(&self) -> bool {
        self.ratio() <= 1.0 + 1e-12
    }
}

/// Per-row data from which the objective and its derivatives are evaluated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveData {
    /// Row sums of `A`.
    pub s: Vec<f64>,
    /// Row sums of `L + U`.
    pub c: Vec<f64>,
    /// Diagonal of `D`.
    pub d: Vec<f64>,
    /// Row sums of `L D^-1 U`.
    pub t: Vec<f64>,
}

/// Collects `s`, `c`, `d`, `t` for `a` and its factors. Works for any factor
/// pattern.
pub fn build_objective(a: &SparseMatrix, f: &FactorTriple) -> Result<ObjectiveData> {
    let n = a.n();
    check_len(n, f.n())?;
    check_diagonal(&f.d)?;
    let s = a.row_sums();
    let mut c = vec![0.0; n];
    let mut t = vec![0.0; n];
    // (U e)_j / d_j; L is strictly lower, so row i only reads finished entries
    let mut scaled = vec![0.0; n];
    for i in 0..n {
        let (cols, vals) = f.l.row(i);
        let (mut lsum, mut ti) = (0.0, 0.0);
        for (&j, &v) in cols.iter().zip(vals) {
            if j >= i {
                return Err(Error::InvalidArgument(
                    "L must be strictly lower triangular".into(),
                ));
            }
            lsum += v;
            ti += v * scaled[j];
        }
        let usum: f64 = f.u.row(i).1.iter().sum();
        scaled[i] = usum / f.d[i];
        c[i] = lsum + usum;
        t[i] = ti;
    }
    let d = f.d.clone();
    for i in 0..n {
        if !(s[i].is_finite() && c[i].is_finite() && d[i].is_finite() && t[i].is_finite()) {
            return Err(Error::NonFinite { row: i });
        }
    }
    Ok(ObjectiveData { s, c, d, t })
}

/// Gradient `(df/dphi, df/dgamma)` and symmetric Hessian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Derivatives {
    pub gradient: [f64; 2],
    pub hessian: [[f64; 2]; 2],
}

impl ObjectiveData {
    pub fn n(&self) -> usize {
        self.s.len()
    }

    /// `sum_i (|s_i| + |c_i| + |d_i| + |t_i|)^2`, the magnitude against which
    /// an objective value counts as rounding noise.
    pub fn magnitude(&self) -> f64 {
        (0..self.n())
            .map(|i| {
                let m = self.s[i].abs() + self.c[i].abs() + self.d[i].abs() + self.t[i].abs();
                m * m
            })
            .sum()
    }
}

/// Sums `row(s_i, c_i, d_i, t_i)` over all rows with four independent
/// accumulators.
fn row_reduce<const K: usize>(
    obj: &ObjectiveData,
    row: impl Fn(f64, f64, f64, f64) -> [f64; K],
) -> [f64; K] {
    const W: usize = 4;
    let n = obj.n();
    let (s, c, d, t) = (&obj.s[..n], &obj.c[..n], &obj.d[..n], &obj.t[..n]);
    let mut lanes = [[0.0; K]; W];
    let chunks = s
        .chunks_exact(W)
        .zip(c.chunks_exact(W))
        .zip(d.chunks_exact(W).zip(t.chunks_exact(W)));
    for ((s, c), (d, t)) in chunks {
        for (l, acc) in lanes.iter_mut().enumerate() {
            let v = row(s[l], c[l], d[l], t[l]);
            for k in 0..K {
                acc[k] += v[k];
            }
        }
    }
    let mut out = [0.0; K];
    for i in n - n % W..n {
        let v = row(s[i], c[i], d[i], t[i]);
        for k in 0..K {
            out[k] += v[k];
        }
    }
    for k in 0..K {
        out[k] += (lanes[0][k] + lanes[1][k]) + (lanes[2][k] + lanes[3][k]);
    }
    out
}

/// `f(phi, gamma) = ||(A - M(phi, gamma)) e||^2`.
pub fn objective(obj: &ObjectiveData, p: AccelerationParams) -> Result<f64> {
    if p.gamma == 0.0 {
        return Err(Error::GammaPole);
    }
    let (phi, gamma) = (p.phi, p.gamma);
    let kappa = phi * phi / gamma;
    let [f] = row_reduce(obj, |s, c, d, t| {
        let v = s - phi * c - gamma * d - kappa * t;
        [v * v]
    });
    Ok(f)
}

/// Parameter-independent second moments of `c`, `d`, `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub cc: f64,
    pub cd: f64,
    pub ct: f64,
    pub dd: f64,
    pub dt: f64,
    pub tt: f64,
}

impl Moments {
    pub fn of(obj: &ObjectiveData) -> Self {
        let [cc, cd, ct, dd, dt, tt] =
            row_reduce(obj, |_, c, d, t| [c * c, c * d, c * t, d * d, d * t, t * t]);
        Self {
            cc,
            cd,
            ct,
            dd,
            dt,
            tt,
        }
    }
}

/// Analytic gradient and Hessian of [`objective`].
pub fn gradient_hessian(obj: &ObjectiveData, p: AccelerationParams) -> Result<Derivatives> {
    gradient_hessian_with(obj, &Moments::of(obj), p)
}

/// [`gradient_hessian`] reusing precomputed moments; one pass over the rows.
pub fn gradient_hessian_with(
    obj: &ObjectiveData,
    mo: &Moments,
    p: AccelerationParams,
) -> Result<Derivatives> {
    if p.gamma == 0.0 {
        return Err(Error::GammaPole);
    }
    let (phi, gamma) = (p.phi, p.gamma);
    let inv_g = 1.0 / gamma;
    let kappa = phi * phi / gamma;
    // dv/dphi = -c - a t, dv/dgamma = -d + b t
    let a = 2.0 * phi * inv_g;
    let b = phi * phi * inv_g * inv_g;
    let [vc, vd, vt] = row_reduce(obj, |s, c, d, t| {
        let v = s - phi * c - gamma * d - kappa * t;
        [v * c, v * d, v * t]
    });
    let g0 = -(vc + a * vt);
    let g1 = -vd + b * vt;
    let h00 = mo.cc + 2.0 * a * mo.ct + a * a * mo.tt - 2.0 * inv_g * vt;
    let h01 = mo.cd - b * mo.ct + a * mo.dt - a * b * mo.tt + 2.0 * phi * inv_g * inv_g * vt;
    let h11 =
        mo.dd - 2.0 * b * mo.dt + b * b * mo.tt - 2.0 * phi * phi * inv_g * inv_g * inv_g * vt;
    Ok(Derivatives {
        gradient: [2.0 * g0, 2.0 * g1],
        hessian: [[2.0 * h00, 2.0 * h01], [2.0 * h01, 2.0 * h11]],
    })
}

/// One accepted iterate of the optimizer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NewtonState {
    pub iteration: usize,
    pub params: AccelerationParams,
    pub gradient: [f64; 2],
    pub hessian: [[f64; 2]; 2],
    pub objective: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizeOptions {
    /// Stop when the accepted step satisfies `max(|dphi|, |dgamma|) <= step_tol`.
    pub step_tol: f64,
    pub max_iters: usize,
    /// Project onto `gamma = phi` when the result has `gamma / phi > 1`.
    pub enforce_constraint: bool,
    /// Step halvings tried per iteration before giving up.
    pub max_halvings: usize,
    /// `f(1, 1) <= negligible * magnitude` is treated as already optimal.
    pub negligible: f64,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        Self {
            step_tol: 1e-10,
            max_iters: 100,
            enforce_constraint: true,
            max_halvings: 60,
            negligible: 1e-24,
        }
    }
}

/// Outcome of [`optimize`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccelReport {
    pub params: AccelerationParams,
    pub f_initial: f64,
    pub f_final: f64,
    /// Accepted steps.
    pub iterations: usize,
    /// Step size dropped below `step_tol`.
    pub converged: bool,
    /// `gamma := phi` was applied at the end.
    pub projected: bool,
    /// Steps taken along the negative gradient because the Hessian was not
    /// positive definite or the Newton step failed to decrease `f`.
    pub gradient_fallbacks: usize,
    /// Halvings forced by a step that would change the sign of `gamma`.
    pub gamma_sign_halvings: usize,
    /// No decrease below `f(1, 1)` was found; `params` is `(1, 1)`.
    pub no_improvement: bool,
    pub history: Vec<NewtonState>,
    pub options: OptimizeOptions,
}

/// A Newton model decrease below this fraction of `f` cannot be resolved in
/// double precision.
pub const ROUNDING_DECREASE: f64 = 64.0 * f64::EPSILON;

enum Step {
    Accepted {
        params: AccelerationParams,
        f: f64,
        sign_halvings: usize,
    },
    Rejected {
        sign_halvings: usize,
    },
}

/// Safeguarded Newton-Raphson on `f(phi, gamma)` from `(1, 1)`.
///
/// Each iteration tries the Newton step when the Hessian is positive definite,
/// otherwise (or when the Newton step cannot decrease `f`) a scaled negative
/// gradient step. Steps are halved until `gamma` keeps its sign and `f` does
/// not increase. The result never has a larger objective than `(1, 1)`.
pub fn optimize(obj: &ObjectiveData, opts: &OptimizeOptions) -> AccelReport {
    let start = AccelerationParams::BASELINE;
    let eval = |p: AccelerationParams| objective(obj, p).unwrap_or(f64::INFINITY);
    let f_initial = eval(start);
    let mut report = AccelReport {
        params: start,
        f_initial,
        f_final: f_initial,
        iterations: 0,
        converged: false,
        projected: false,
        gradient_fallbacks: 0,
        gamma_sign_halvings: 0,
        no_improvement: false,
        history: Vec::new(),
        options: *opts,
    };
    if !f_initial.is_finite() || f_initial <= opts.negligible * obj.magnitude() {
        report.no_improvement = true;
        report.converged = f_initial.is_finite();
        return report;
    }

    let moments = Moments::of(obj);
    let mut x = start;
    let mut fx = f_initial;
    for iteration in 0..opts.max_iters {
        let Ok(der) = gradient_hessian_with(obj, &moments, x) else {
            break;
        };
        report.history.push(NewtonState {
            iteration,
            params: x,
            gradient: der.gradient,
            hessian: der.hessian,
            objective: fx,
        });
        let [g0, g1] = der.gradient;
        let [[h00, h01], [_, h11]] = der.hessian;
        if !(g0.is_finite() && g1.is_finite()) || (g0 == 0.0 && g1 == 0.0) {
            report.converged = g0 == 0.0 && g1 == 0.0;
            break;
        }

        let det = h00 * h11 - h01 * h01;
        let mut outcome = Step::Rejected { sign_halvings: 0 };
        if det > 0.0 && h00 > 0.0 && h00 + h11 > 0.0 {
            let newton = [-(h11 * g0 - h01 * g1) / det, -(h00 * g1 - h01 * g0) / det];
            let predicted = -0.5 * (g0 * newton[0] + g1 * newton[1]);
            if predicted <= ROUNDING_DECREASE * fx {
                report.converged = true;
                break;
            }
            outcome = line_search(&eval, x, fx, newton, opts);
        }
        if let Step::Rejected { sign_halvings } = outcome {
            report.gamma_sign_halvings += sign_halvings;
            let curvature = (h00 * h00 + 2.0 * h01 * h01 + h11 * h11).sqrt();
            let scale = if curvature.is_finite() && curvature > 0.0 {
                1.0 / curvature
            } else {
                1.0 / g0.abs().max(g1.abs())
            };
            outcome = line_search(&eval, x, fx, [-g0 * scale, -g1 * scale], opts);
            report.gradient_fallbacks += 1;
        }
        match outcome {
            Step::Accepted {
                params,
                f,
                sign_halvings,
            } => {
                report.gamma_sign_halvings += sign_halvings;
                let delta = (params.phi - x.phi)
                    .abs()
                    .max((params.gamma - x.gamma).abs());
                x = params;
                fx = f;
                report.iterations += 1;
                if delta <= opts.step_tol {
                    report.converged = true;
                    break;
                }
            }
            Step::Rejected { sign_halvings } => {
                report.gamma_sign_halvings += sign_halvings;
                // no descent left along either direction: stationary to working precision
                report.converged = true;
                break;
            }
        }
    }

    if opts.enforce_constraint && x.phi > 0.0 && x.gamma / x.phi > 1.0 {
        x.gamma = x.phi;
        fx = eval(x);
        report.projected = true;
    }

    if !(fx < f_initial) {
        report.params = start;
        report.f_final = f_initial;
        report.no_improvement = true;
    } else {
        report.params = x;
        report.f_final = fx;
    }
    report
}

fn line_search(
    eval: &impl Fn(AccelerationParams) -> f64,
    x: AccelerationParams,
    fx: f64,
    step: [f64; 2],
    opts: &OptimizeOptions,
) -> Step {
    let mut lambda = 1.0;
    let mut sign_halvings = 0;
    if !(step[0].is_finite() && step[1].is_finite()) {
        return Step::Rejected { sign_halvings };
    }
    let size = step[0].abs().max(step[1].abs());
    for _ in 0..=opts.max_halvings {
        // below step_tol a step could only be accepted as converged anyway
        if lambda * size < opts.step_tol && lambda < 1.0 {
            break;
        }
        let cand = AccelerationParams {
            phi: x.phi + lambda * step[0],
            gamma: x.gamma + lambda * step[1],
        };
        if cand.gamma.signum() != x.gamma.signum() || cand.gamma == 0.0 {
            sign_halvings += 1;
        } else if cand.phi != 0.0 {
            let fc = eval(cand);
            if fc <= fx {
                return Step::Accepted {
                    params: cand,
                    f: fc,
                    sign_halvings,
                };
            }
        }
        lambda *= 0.5;
    }
    Step::Rejected { sign_halvings }
}

/// `z = M(phi, gamma)^-1 r` via two triangular solves with factors scaled once
/// at construction.
#[derive(Debug, Clone)]
pub struct AcceleratedIlu {
    l: SparseMatrix,
    d: Vec<f64>,
    u: SparseMatrix,
    params: AccelerationParams,
}

/// Builds the accelerated preconditioner. `(1, 1)` gives plain ILU.
pub fn make_preconditioner(f: &FactorTriple, p: AccelerationParams) -> Result<AcceleratedIlu> {
    p.validate()?;
    let d: Vec<f64> = f.d.iter().map(|v| p.gamma * v).collect();
    check_diagonal(&d)?;
    Ok(AcceleratedIlu {
        l: f.l.scaled(p.phi),
        d,
        u: f.u.scaled(p.phi),
        params: p,
    })
}

impl AcceleratedIlu {
    pub fn params(&self) -> AccelerationParams {
        self.params
    }
}

impl Preconditioner for AcceleratedIlu {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        // (phi L + gamma D) w = r
        lower_solve_into(&self.l, &self.d, r, z);
        // (gamma D + phi U) z = gamma D w, in place: row i reads only z[j > i]
        for i in (0..z.len()).rev() {
            let (cols, vals) = self.u.row(i);
            let mut acc = self.d[i] * z[i];
            for (&j, &v) in cols.iter().zip(vals) {
                acc -= v * z[j];
            }
            z[i] = acc / self.d[i];
        }
    }
}
