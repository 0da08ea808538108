//! Mean-field steady states of the driven, damped deformed mode.
//!
//! The deformed root is found by homotopy continuation in the deformation
//! parameter: starting from the linear (Bogolubov) amplitude at `eta = 0`,
//! `eta` is raised geometrically to its target value and each intermediate
//! root is polished by damped Newton on the two real equations
//! `(Re R, Im R) = 0`. The root reached this way is the "physical branch";
//! other roots of the residual are never returned.

use num_complex::Complex64;

use super::fluctuation::{drift_eigenvalues, fluctuation_coeffs_at};
use super::params::ModelParams;
use crate::error::{Error, Result};

/// Options for [`solve_deformed_steady_state_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Bound on the scaled residual `|R| / (g sqrt(N) + Gamma |beta| + 1)`.
    pub tol: f64,
    /// Newton iterations allowed at each continuation step.
    pub max_iter: usize,
    /// Geometric continuation steps from `eta_target / 2^(steps-1)` to `eta_target`.
    pub continuation_steps: usize,
    /// Bisection depth allowed when a continuation step fails.
    pub max_refinements: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tol: 1e-12, max_iter: 50, continuation_steps: 12, max_refinements: 24 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyState {
    pub beta: Complex64,
    /// `|R(beta)|` in units of gamma.
    pub residual_norm: f64,
    /// `|R(beta)|` divided by `g sqrt(N) + Gamma |beta| + 1`; bounded by the solver tolerance.
    pub scaled_residual: f64,
    pub stable: bool,
    pub drift_eigenvalues: (Complex64, Complex64),
    /// Newton iterations summed over the continuation path.
    pub iterations: usize,
}

impl SteadyState {
    pub fn max_re_lambda(&self) -> f64 {
        self.drift_eigenvalues.0.re.max(self.drift_eigenvalues.1.re)
    }

    /// Returns `self` if stable, otherwise [`Error::Unstable`].
    pub fn require_stable(self) -> Result<Self> {
        if self.stable {
            Ok(self)
        } else {
            Err(Error::Unstable { max_re_lambda: self.max_re_lambda() })
        }
    }
}

/// Linear steady state `-i g sqrt(N) / (Gamma + i Delta)`.
pub fn undeformed_steady_state(p: &ModelParams) -> Complex64 {
    let i = Complex64::i();
    -i * p.drive() / Complex64::new(p.big_gamma(), p.delta())
}

/// Mean-field drift
/// `R(beta) = i (sqrt(N) g eta / 2)(beta^2 + 2|beta|^2) - i Delta beta - i g sqrt(N) - Gamma beta`.
pub fn deformed_residual(p: &ModelParams, beta: Complex64) -> Complex64 {
    residual_at(p, p.eta(), beta)
}

pub(crate) fn residual_at(p: &ModelParams, eta: f64, beta: Complex64) -> Complex64 {
    let i = Complex64::i();
    let half_k = 0.5 * p.nonlinear_rate(eta);
    i * half_k * (beta * beta + 2.0 * beta.norm_sqr()) - i * p.delta() * beta - i * p.drive()
        - p.big_gamma() * beta
}

fn residual_scale(p: &ModelParams, beta: Complex64) -> f64 {
    p.drive() + p.big_gamma() * beta.norm() + 1.0
}

pub fn solve_deformed_steady_state(p: &ModelParams, tol: f64, max_iter: usize) -> Result<SteadyState> {
    solve_deformed_steady_state_with(p, &SolverOptions { tol, max_iter, ..SolverOptions::default() })
}

pub fn solve_deformed_steady_state_with(p: &ModelParams, opts: &SolverOptions) -> Result<SteadyState> {
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidParams(format!("tolerance must be positive, got {}", opts.tol)));
    }
    let eta_target = p.eta();
    let mut iterations = 0;

    let beta = if p.g() == 0.0 {
        Complex64::new(0.0, 0.0)
    } else if eta_target == 0.0 {
        let (beta, it) = newton(p, 0.0, undeformed_steady_state(p), opts)?;
        iterations += it;
        beta
    } else {
        let steps = opts.continuation_steps.max(8);
        let mut beta = undeformed_steady_state(p);
        let mut eta_done = 0.0;
        for k in 0..steps {
            let eta_next = eta_target * 0.5_f64.powi((steps - 1 - k) as i32);
            let (b, it) = continue_to(p, eta_done, eta_next, beta, opts, 0)?;
            beta = b;
            iterations += it;
            eta_done = eta_next;
        }
        beta
    };

    let r = residual_at(p, eta_target, beta);
    let coeffs = fluctuation_coeffs_at(p, eta_target, beta);
    let lambdas = drift_eigenvalues(&coeffs);
    Ok(SteadyState {
        beta,
        residual_norm: r.norm(),
        scaled_residual: r.norm() / residual_scale(p, beta),
        stable: lambdas.0.re < 0.0 && lambdas.1.re < 0.0,
        drift_eigenvalues: lambdas,
        iterations,
    })
}

/// Advances the root from `eta_from` to `eta_to`, bisecting the step when
/// Newton fails.
fn continue_to(
    p: &ModelParams,
    eta_from: f64,
    eta_to: f64,
    beta: Complex64,
    opts: &SolverOptions,
    depth: usize,
) -> Result<(Complex64, usize)> {
    match newton(p, eta_to, beta, opts) {
        Ok(ok) => Ok(ok),
        Err(err) if depth >= opts.max_refinements => Err(err),
        Err(_) => {
            let mid = 0.5 * (eta_from + eta_to);
            let (b_mid, it1) = continue_to(p, eta_from, mid, beta, opts, depth + 1)?;
            let (b_end, it2) = continue_to(p, mid, eta_to, b_mid, opts, depth + 1)?;
            Ok((b_end, it1 + it2))
        }
    }
}

/// Newton direction for `(Re R, Im R)` at fixed `eta`.
///
/// `dR = A dbeta + B dbeta*`, so the real Jacobian has columns `A + B` and
/// `i (A - B)` for the real and imaginary parts of `beta`.
fn newton_direction(p: &ModelParams, eta: f64, beta: Complex64, r: Complex64) -> Option<Complex64> {
    let c = fluctuation_coeffs_at(p, eta, beta);
    let col_x = c.a_coef + c.b_coef;
    let col_y = Complex64::i() * (c.a_coef - c.b_coef);
    let det = col_x.re * col_y.im - col_y.re * col_x.im;
    if det == 0.0 || !det.is_finite() {
        return None;
    }
    let dx = (-r.re * col_y.im + r.im * col_y.re) / det;
    let dy = (-col_x.re * r.im + col_x.im * r.re) / det;
    Some(Complex64::new(dx, dy))
}

const POLISH_STEPS: usize = 3;

/// Damped Newton at fixed `eta`. Once the tolerance is met, a few undamped
/// steps are kept while they still lower the residual.
fn newton(p: &ModelParams, eta: f64, beta0: Complex64, opts: &SolverOptions) -> Result<(Complex64, usize)> {
    let mut beta = beta0;
    let mut r = residual_at(p, eta, beta);
    for it in 0..=opts.max_iter {
        if r.norm() / residual_scale(p, beta) <= opts.tol {
            for _ in 0..POLISH_STEPS {
                let Some(step) = newton_direction(p, eta, beta, r) else { break };
                let trial = beta + step;
                let r_trial = residual_at(p, eta, trial);
                if r_trial.norm() >= r.norm() {
                    break;
                }
                beta = trial;
                r = r_trial;
            }
            return Ok((beta, it));
        }
        if it == opts.max_iter {
            break;
        }
        let Some(step) = newton_direction(p, eta, beta, r) else { break };

        let mut damping = 1.0;
        let mut accepted = false;
        while damping >= 1.0 / 1024.0 {
            let trial = beta + step * damping;
            let r_trial = residual_at(p, eta, trial);
            if r_trial.norm() < r.norm() {
                beta = trial;
                r = r_trial;
                accepted = true;
                break;
            }
            damping *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    Err(Error::NoConvergence {
        eta,
        iterations: opts.max_iter,
        residual: r.norm() / residual_scale(p, beta),
    })
}

/// Fixed-step RK4 integration of the noiseless mean-field equation
/// `d beta/dt = R(beta)`, sampled at every step including `t = 0`.
pub fn mean_field_relax(
    p: &ModelParams,
    beta0: Complex64,
    t_final: f64,
    dt: f64,
) -> Result<Vec<(f64, Complex64)>> {
    if !(dt > 0.0 && t_final >= dt) {
        return Err(Error::InvalidParams(format!("need dt > 0 and t_final >= dt, got dt={dt}, t_final={t_final}")));
    }
    let eta = p.eta();
    let f = |b: Complex64| residual_at(p, eta, b);
    let steps = (t_final / dt).ceil() as usize;
    let h = t_final / steps as f64;
    let mut out = Vec::with_capacity(steps + 1);
    let mut beta = beta0;
    out.push((0.0, beta));
    for k in 1..=steps {
        let k1 = f(beta);
        let k2 = f(beta + k1 * (0.5 * h));
        let k3 = f(beta + k2 * (0.5 * h));
        let k4 = f(beta + k3 * h);
        beta += (k1 + 2.0 * k2 + 2.0 * k3 + k4) * (h / 6.0);
        let t = k as f64 * h;
        if !(beta.re.is_finite() && beta.im.is_finite()) || beta.norm() > 1e150 {
            return Err(Error::Overflow { t });
        }
        out.push((t, beta));
    }
    Ok(out)
}
