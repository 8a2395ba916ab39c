//! The constructive decomposition iteration: split `x = x_0 + y_0` with a
//! near-optimal K decomposition at fixed `t0`, repeat on the residual, and
//! verify the geometric bounds and the Cauchy property of the partial sums
//! in Y.

use serde::Serialize;

use crate::couple::CoupleSpec;
use crate::element::Element;
use crate::error::{Error, Result};
use crate::ksolve::k_solve;
use crate::space::SpaceSpec;
use crate::tol;

/// How a trace ended.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TraceStatus {
    /// All requested steps ran.
    Completed,
    /// The residual became numerically zero at the recorded step.
    Converged { at_step: usize },
    /// The contraction hypothesis failed; the trace holds the steps before
    /// the failure.
    ContractionFailed {
        at_step: usize,
        k_value: f64,
        threshold: f64,
    },
}

/// One decomposition step: residual, Y-part, their norms, and the geometric
/// bounds they are certified against.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceStep {
    pub x_m: Element,
    pub y_m: Element,
    pub x_norm: f64,
    pub y_norm: f64,
    pub x_norm_bound: f64,
    pub y_norm_bound: f64,
}

/// Validated record of an iterated decomposition.
///
/// Invariants certified at construction, with `f = rho^{1/p}`:
/// `x = x_m + y_m + ... + y_0` within `1e-10 |x|_X` at every step,
/// `|x_m|_X < f^{m+1} |x|_X`, and `|y_m|_Y < f^{m+1} |x|_X / t0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecompositionTrace {
    pub t0: f64,
    pub rho: f64,
    pub p: f64,
    pub x: Element,
    pub x_norm: f64,
    pub steps: Vec<TraceStep>,
    pub z_final: Element,
    pub status: TraceStatus,
    #[serde(skip)]
    pub x_space: SpaceSpec,
    #[serde(skip)]
    pub y_space: SpaceSpec,
}

fn check_iteration_params(t0: f64, rho: f64, p: f64) -> Result<f64> {
    if !(t0 > 0.0 && t0.is_finite()) {
        return Err(Error::param("t0", format!("need finite t0 > 0, got {t0}")));
    }
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::param("rho", format!("need 0 < rho < 1, got {rho}")));
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::param("p", format!("need 0 < p <= 1, got {p}")));
    }
    Ok(rho.powf(1.0 / p))
}

/// One near-optimal split `x = x0 + y0` with
/// `|x0|_X + t0 |y0|_Y < rho^{1/p} |x|_X`.
///
/// The contraction hypothesis `K(x / |x|_X, t0) < rho^{1/p}` is checked
/// against the solver's certified value; its failure means this element
/// witnesses `K(S(X), t0) >= rho^{1/p}` and the iteration cannot start.
pub fn near_optimal_split(
    x: &Element,
    t0: f64,
    rho: f64,
    couple: &CoupleSpec,
) -> Result<(Element, Element)> {
    let threshold = check_iteration_params(t0, rho, couple.p_exponent())?;
    let x_norm = couple.x_space().norm(x)?;
    if x_norm == 0.0 {
        let zero = x.with_values(crate::Vector::zeros(x.dim())?)?;
        return Ok((zero.clone(), zero));
    }
    let r = k_solve(x, t0, couple)?;
    let k_ratio = (r.value + r.error_bound) / x_norm;
    if k_ratio >= threshold {
        return Err(Error::NoContraction {
            k_value: k_ratio,
            threshold,
        });
    }
    let y = r.minimizer.ok_or_else(|| {
        Error::SolverFailure("solver returned no minimizer for the split".into())
    })?;
    let x0 = x.with_values(x.values().sub(y.values())?)?;
    let achieved = couple.x_space().norm(&x0)? + t0 * couple.y_space().norm(&y)?;
    if achieved > (r.value + r.error_bound) * (1.0 + tol::FP_SLACK) {
        return Err(Error::SolverFailure(format!(
            "minimizer objective {achieved} exceeds certified value {}",
            r.value + r.error_bound
        )));
    }
    Ok((x0, y))
}

/// Iterate [`near_optimal_split`] on the residual `m_steps + 1` times
/// (`m_steps = 0` is a single split), stopping early when the residual is
/// numerically zero. A contraction failure along the way is not an error:
/// the partial trace is returned with the failure recorded in `status`.
pub fn iterate_decomposition(
    x: &Element,
    t0: f64,
    rho: f64,
    m_steps: usize,
    couple: &CoupleSpec,
) -> Result<DecompositionTrace> {
    let p = couple.p_exponent();
    run_trace(
        x,
        t0,
        rho,
        p,
        m_steps,
        couple.x_space(),
        couple.y_space(),
        |cur| near_optimal_split(cur, t0, rho, couple),
    )
}

/// Same engine with an injected splitter (`current -> (x_next, y)`); every
/// step is still validated against the reconstruction, contraction, and
/// geometric-bound invariants, so a dishonest splitter cannot produce a
/// certified trace.
#[allow(clippy::too_many_arguments)]
pub fn iterate_decomposition_with(
    x: &Element,
    t0: f64,
    rho: f64,
    p: f64,
    m_steps: usize,
    x_space: &SpaceSpec,
    y_space: &SpaceSpec,
    splitter: impl FnMut(&Element) -> Result<(Element, Element)>,
) -> Result<DecompositionTrace> {
    run_trace(x, t0, rho, p, m_steps, x_space, y_space, splitter)
}

#[allow(clippy::too_many_arguments)]
fn run_trace(
    x: &Element,
    t0: f64,
    rho: f64,
    p: f64,
    m_steps: usize,
    x_space: &SpaceSpec,
    y_space: &SpaceSpec,
    mut splitter: impl FnMut(&Element) -> Result<(Element, Element)>,
) -> Result<DecompositionTrace> {
    let factor = check_iteration_params(t0, rho, p)?;
    let x_norm = x_space.norm(x)?;
    let zero = x.with_values(crate::Vector::zeros(x.dim())?)?;

    let mut steps: Vec<TraceStep> = Vec::new();
    let mut current = x.clone();
    let mut cur_norm = x_norm;
    let mut z = zero.clone();
    let mut status = TraceStatus::Completed;

    for m in 0..=m_steps {
        if cur_norm <= tol::EARLY_STOP_REL * x_norm {
            status = TraceStatus::Converged {
                at_step: m.saturating_sub(1),
            };
            break;
        }
        let (x_next, y) = match splitter(&current) {
            Ok(pair) => pair,
            Err(Error::NoContraction { k_value, threshold }) => {
                status = TraceStatus::ContractionFailed {
                    at_step: m,
                    k_value,
                    threshold,
                };
                break;
            }
            Err(e) => return Err(e),
        };

        // Local and global reconstruction.
        let local_gap = x_space.norm(
            &current.with_values(current.values().sub(&x_next.values().add(y.values())?)?)?,
        )?;
        let z_next = z.with_values(z.values().add(y.values())?)?;
        let global_gap = x_space.norm(
            &x.with_values(x.values().sub(&x_next.values().add(z_next.values())?)?)?,
        )?;
        let recon_tol = tol::RECONSTRUCTION_REL * (1.0 + x_norm);
        if local_gap > recon_tol || global_gap > recon_tol {
            return Err(Error::InvariantViolation(format!(
                "reconstruction drift at step {m}: local {local_gap}, global {global_gap}"
            )));
        }

        let x_next_norm = x_space.norm(&x_next)?;
        let y_norm = y_space.norm(&y)?;
        // Contraction of the achieved objective, honest for any splitter.
        let achieved = x_next_norm + t0 * y_norm;
        if achieved >= factor * cur_norm * (1.0 + tol::FP_SLACK) {
            status = TraceStatus::ContractionFailed {
                at_step: m,
                k_value: achieved / cur_norm,
                threshold: factor,
            };
            break;
        }
        let x_bound = factor.powi(m as i32 + 1) * x_norm;
        let y_bound = x_bound / t0;
        if x_next_norm >= x_bound * (1.0 + tol::FP_SLACK)
            || y_norm >= y_bound * (1.0 + tol::FP_SLACK)
        {
            return Err(Error::InvariantViolation(format!(
                "geometric bound violated at step {m}: |x_m| = {x_next_norm} vs {x_bound}, |y_m| = {y_norm} vs {y_bound}"
            )));
        }

        steps.push(TraceStep {
            x_m: x_next.clone(),
            y_m: y,
            x_norm: x_next_norm,
            y_norm,
            x_norm_bound: x_bound,
            y_norm_bound: y_bound,
        });
        z = z_next;
        current = x_next;
        cur_norm = x_next_norm;
    }

    Ok(DecompositionTrace {
        t0,
        rho,
        p,
        x: x.clone(),
        x_norm,
        steps,
        z_final: z,
        status,
        x_space: x_space.clone(),
        y_space: y_space.clone(),
    })
}

/// Outcome of the Cauchy verification over a trace.
#[derive(Debug, Clone, PartialEq)]
pub struct CauchyReport {
    /// Number of `(m, n)` partial-sum pairs checked.
    pub pairs_checked: usize,
    /// Smallest slack `sum_k |y_k|^p - |z_n - z_m|^p` over the pairs;
    /// non-negative up to floating-point noise.
    pub min_slack: f64,
    /// Geometric bound on the tail `sum_{k > m_final} |y_k|_Y^p`.
    pub tail_bound: f64,
}

/// Checks the p-triangle chain
/// `|z_n - z_m|_Y^p <= sum_{k=m+1}^n |y_k|_Y^p
///  <= t0^{-p} |x|_X^p sum_{k=m+1}^n rho^{k+1}`
/// for every pair in the trace, and that the geometric tail beyond the last
/// step is at most `tail_tol`.
pub fn verify_cauchy_in_y(
    trace: &DecompositionTrace,
    p: f64,
    tail_tol: f64,
) -> Result<CauchyReport> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::param("p", format!("need 0 < p <= 1, got {p}")));
    }
    if tail_tol.is_nan() || tail_tol <= 0.0 {
        return Err(Error::param("tail_tol", "must be positive"));
    }
    let n_steps = trace.steps.len();
    let slack = tol::FP_SLACK * (1.0 + trace.x_norm / trace.t0).powf(p);

    // partial sums z_j = y_0 + ... + y_j
    let mut partials: Vec<Element> = Vec::with_capacity(n_steps);
    let mut acc: Option<Element> = None;
    for step in &trace.steps {
        let next = match &acc {
            None => step.y_m.clone(),
            Some(z) => z.with_values(z.values().add(step.y_m.values())?)?,
        };
        partials.push(next.clone());
        acc = Some(next);
    }

    let mut pairs_checked = 0usize;
    let mut min_slack = f64::INFINITY;
    for m in 0..n_steps {
        for n in (m + 1)..n_steps {
            let diff = partials[n]
                .with_values(partials[n].values().sub(partials[m].values())?)?;
            let lhs = trace.y_space.norm(&diff)?.powf(p);
            let mid: f64 = trace.steps[(m + 1)..=n]
                .iter()
                .map(|s| s.y_norm.powf(p))
                .sum();
            if lhs > mid + slack {
                return Err(Error::InvariantViolation(format!(
                    "p-triangle fails between steps {m} and {n}: |z_n - z_m|^p = {lhs} > {mid}; \
                     is p = {p} valid for the Y space?"
                )));
            }
            let geo: f64 = ((m + 1)..=n)
                .map(|k| trace.rho.powi(k as i32 + 1))
                .sum::<f64>()
                * (trace.x_norm / trace.t0).powf(p);
            if mid > geo + slack {
                return Err(Error::InvariantViolation(format!(
                    "geometric majorant fails between steps {m} and {n}: {mid} > {geo}"
                )));
            }
            min_slack = min_slack.min(mid - lhs);
            pairs_checked += 1;
        }
    }

    let m_final = n_steps as i32 - 1;
    let tail_bound = (trace.x_norm / trace.t0).powf(p) * trace.rho.powi(m_final + 2)
        / (1.0 - trace.rho);
    if tail_bound > tail_tol {
        return Err(Error::InvariantViolation(format!(
            "Y-tail bound {tail_bound} exceeds the requested tolerance {tail_tol}; run more steps"
        )));
    }
    Ok(CauchyReport {
        pairs_checked,
        min_slack: if pairs_checked == 0 { 0.0 } else { min_slack },
        tail_bound,
    })
}
