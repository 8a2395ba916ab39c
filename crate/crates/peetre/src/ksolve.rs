//! Solvers for `K(x, t) = inf_y ( |x - y|_X + t |y|_Y )` over the supported
//! couples, plus curve evaluation over a t-grid.

use crate::couple::{CoupleSpec, SolverKind};
use crate::element::{Element, GridFunction};
use crate::error::{Error, Result};
use crate::space::SpaceSpec;
use crate::{tol, Vector};

/// Which algorithm produced a [`KResult`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverMethod {
    WeightedClosedForm,
    ClipBreakpoints,
    LipEnvelope,
    NumericDualCertified,
    BruteForceGrid,
}

/// One K-functional evaluation. `value` is within `error_bound` of the true
/// infimum, and the minimizer's objective is at most `value + error_bound`.
#[derive(Debug, Clone, PartialEq)]
pub struct KResult {
    pub value: f64,
    pub error_bound: f64,
    pub minimizer: Option<Element>,
    pub method: SolverMethod,
}

/// `|x - y|_X + t |y|_Y` for a candidate decomposition.
pub fn objective(couple: &CoupleSpec, x: &Element, y: &Element, t: f64) -> Result<f64> {
    let residual = x.with_values(x.values().sub(y.values())?)?;
    Ok(couple.x_space().norm(&residual)? + t * couple.y_space().norm(y)?)
}

fn check_t(t: f64) -> Result<()> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::param("t", format!("need finite t > 0, got {t}")));
    }
    Ok(())
}

/// Closed form for the `(l1, weighted l1)` couple:
/// `K(x, t) = sum_k |x_k| min(1, t w_k)`, with minimizer `y_k = x_k` exactly
/// where `t w_k < 1`.
pub fn k_weighted(x: &Vector, t: f64, weights: &Vector) -> Result<KResult> {
    check_t(t)?;
    if weights.iter().any(|w| w <= 0.0) {
        return Err(Error::param("weights", "all weights must be positive"));
    }
    if x.dim() != weights.dim() {
        return Err(Error::DimensionMismatch {
            expected: weights.dim(),
            got: x.dim(),
        });
    }
    let value = x
        .iter()
        .zip(weights.iter())
        .map(|(xk, wk)| xk.abs() * (t * wk).min(1.0))
        .sum();
    let minimizer = Vector::new(
        x.iter()
            .zip(weights.iter())
            .map(|(xk, wk)| if t * wk < 1.0 { xk } else { 0.0 })
            .collect(),
    )?;
    Ok(KResult {
        value,
        error_bound: 0.0,
        minimizer: Some(Element::Vector(minimizer)),
        method: SolverMethod::WeightedClosedForm,
    })
}

/// Exact solver for the `(l1, sup)` couple. For a clip level `M` the best
/// approximant is `y_k = sign(x_k) min(|x_k|, M)`, so
/// `K(x, t) = min_M [ sum_k (|x_k| - M)_+ + t M ]`; the objective is
/// piecewise linear in `M` with breakpoints at the `|x_k|`, hence the minimum
/// is attained on `{0} U {|x_k|}`. Ties resolve to the smallest level.
pub fn k_clip(x: &Vector, t: f64) -> Result<KResult> {
    check_t(t)?;
    let mut levels: Vec<f64> = x.iter().map(f64::abs).collect();
    levels.push(0.0);
    levels.sort_by(f64::total_cmp);
    levels.dedup();

    let cost = |m: f64| -> f64 {
        x.iter().map(|v| (v.abs() - m).max(0.0)).sum::<f64>() + t * m
    };
    let mut best_m = levels[0];
    let mut best = cost(best_m);
    for &m in &levels[1..] {
        let c = cost(m);
        if c < best {
            best = c;
            best_m = m;
        }
    }
    let minimizer = Vector::new(
        x.iter()
            .map(|v| v.signum() * v.abs().min(best_m))
            .collect(),
    )?;
    Ok(KResult {
        value: best,
        error_bound: 0.0,
        minimizer: Some(Element::Vector(minimizer)),
        method: SolverMethod::ClipBreakpoints,
    })
}

/// Exact solver for the `(sup on grid, grid Lipschitz)` couple.
///
/// The best sup-error achievable with Lipschitz bound `L` is
/// `E(L) = (1/2) max_{i,j} (|f_i - f_j| - L |s_i - s_j|)_+`, attained by the
/// midpoint of the two L-Lipschitz envelopes of `f`. `E` is the upper
/// envelope of finitely many affine functions of `L`, so `E(L) + t L` is
/// piecewise linear convex and its minimum sits at `L = 0`, a vertex of that
/// envelope, or the envelope's root. All three sets are enumerated exactly.
pub fn k_lip(f: &GridFunction, t: f64) -> Result<KResult> {
    check_t(t)?;
    let n = f.len();
    let h = f.spacing();
    let v = f.values().as_slice();

    // c[m]: largest value gap over node pairs at separation m.
    let mut c = vec![0.0f64; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let gap = (v[j] - v[i]).abs();
            if gap > c[j - i] {
                c[j - i] = gap;
            }
        }
    }

    let excess_at = |l: f64| -> f64 {
        let mut worst = 0.0f64;
        for (m, &cm) in c.iter().enumerate().skip(1) {
            worst = worst.max(cm - l * m as f64 * h);
        }
        0.5 * worst.max(0.0)
    };

    // Lines cm - (m h) L with positive intercept, sorted by increasing slope.
    let mut lines: Vec<(f64, f64)> = (1..n)
        .rev()
        .filter(|&m| c[m] > 0.0)
        .map(|m| (-(m as f64) * h, c[m]))
        .collect();
    let cross = |a: (f64, f64), b: (f64, f64)| (b.1 - a.1) / (a.0 - b.0);
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for line in lines.drain(..) {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            if cross(a, line) <= cross(a, b) {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(line);
    }

    let mut candidates = vec![0.0f64];
    for w in hull.windows(2) {
        let x = cross(w[0], w[1]);
        if x.is_finite() && x > 0.0 {
            candidates.push(x);
        }
    }
    // Envelope root = largest pairwise difference quotient.
    let root = (1..n)
        .map(|m| c[m] / (m as f64 * h))
        .fold(0.0, f64::max);
    candidates.push(root);
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();

    let mut best_l = candidates[0];
    let mut best = excess_at(best_l) + t * best_l;
    for &l in &candidates[1..] {
        let val = excess_at(l) + t * l;
        if val < best {
            best = val;
            best_l = l;
        }
    }

    // Midpoint of the lower and upper L-Lipschitz envelopes at the optimum.
    let g: Vec<f64> = (0..n)
        .map(|i| {
            let mut upper = f64::INFINITY;
            let mut lower = f64::NEG_INFINITY;
            for (j, &vj) in v.iter().enumerate() {
                let d = best_l * (i as f64 - j as f64).abs() * h;
                upper = upper.min(vj + d);
                lower = lower.max(vj - d);
            }
            0.5 * (upper + lower)
        })
        .collect();
    let minimizer = f.with_values(Vector::new(g)?)?;

    Ok(KResult {
        value: best,
        error_bound: 0.0,
        minimizer: Some(Element::Grid(minimizer)),
        method: SolverMethod::LipEnvelope,
    })
}

/// Certified solver for the `(l_q, l_p)` couple, `q, p >= 1`.
///
/// An optimal `y` is sign-aligned with `x` and dominated by it, so the search
/// runs over magnitudes `0 <= y_k <= |x_k|`. Primal upper bounds come from
/// the one-parameter stationarity family `(a_k - y_k)^{q-1} = C y_k^{p-1}`
/// (clip and threshold paths when an exponent equals 1) plus cyclic
/// coordinate descent. Lower bounds come from Fenchel duality:
/// `K(x, t) = max { <x, u> : |u|_{q'} <= 1, |u|_{p'} <= t }`. The dual
/// optimum is the norm gradient at the optimal residual, so it lies on the
/// same path; maximizing the path-induced dual value in the path parameter
/// reaches it to quadratic (not one-sided linear) accuracy. The loop
/// tightens both sides until the gap is within `2 tol` and returns the
/// midpoint.
pub fn k_numeric(x: &Vector, t: f64, q: f64, p: f64, tol_param: f64) -> Result<KResult> {
    check_t(t)?;
    if !(q.is_finite() && p.is_finite()) || q < 1.0 || p < 1.0 {
        return Err(Error::NonConvexExponents { q, p });
    }
    if !(tol_param > 0.0 && tol_param.is_finite()) {
        return Err(Error::param("tol", "must be positive and finite"));
    }

    let a: Vec<f64> = x.iter().map(f64::abs).collect();
    let signs: Vec<f64> = x.iter().map(f64::signum).collect();
    let d = a.len();
    let a_max = a.iter().cloned().fold(0.0, f64::max);
    let finish = |y: Vec<f64>, value: f64, err: f64| -> Result<KResult> {
        let signed = Vector::new(y.iter().zip(&signs).map(|(yk, s)| s * yk).collect())?;
        Ok(KResult {
            value,
            error_bound: err,
            minimizer: Some(Element::Vector(signed)),
            method: SolverMethod::NumericDualCertified,
        })
    };

    if a_max == 0.0 {
        return finish(vec![0.0; d], 0.0, 0.0);
    }
    if q == 1.0 && p == 1.0 {
        // Separable: each coordinate contributes min(1, t) |x_k|.
        let value = t.min(1.0) * a.iter().sum::<f64>();
        let y = if t < 1.0 { a.clone() } else { vec![0.0; d] };
        return finish(y, value, 0.0);
    }

    let obj = |y: &[f64]| -> f64 {
        let rq: f64 = a
            .iter()
            .zip(y)
            .map(|(ak, yk)| (ak - yk).max(0.0).powf(q))
            .sum();
        let yp: f64 = y.iter().map(|yk| yk.powf(p)).sum();
        rq.powf(1.0 / q) + t * yp.powf(1.0 / p)
    };

    // Stationarity path, parameterized by s in [0, 1]; s = 0 gives y = a,
    // s = 1 gives y = 0.
    let path = |s: f64| -> Vec<f64> {
        if q > 1.0 && p > 1.0 {
            if s >= 1.0 {
                return vec![0.0; d];
            }
            let cc = s / (1.0 - s);
            a.iter()
                .map(|&ak| {
                    if ak == 0.0 {
                        return 0.0;
                    }
                    let (mut lo, mut hi) = (0.0f64, ak);
                    for _ in 0..80 {
                        let mid = 0.5 * (lo + hi);
                        if (ak - mid).powf(q - 1.0) >= cc * mid.powf(p - 1.0) {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                    }
                    0.5 * (lo + hi)
                })
                .collect()
        } else if p == 1.0 {
            let theta = s * a_max;
            a.iter().map(|&ak| (ak - theta).max(0.0)).collect()
        } else {
            let mu = (1.0 - s) * a_max;
            a.iter().map(|&ak| ak.min(mu)).collect()
        }
    };

    let dual_norm = |u: &[f64], e: f64| -> f64 {
        if e > 1.0 {
            let ec = e / (e - 1.0);
            u.iter().map(|v| v.abs().powf(ec)).sum::<f64>().powf(1.0 / ec)
        } else {
            u.iter().cloned().fold(0.0, f64::max)
        }
    };
    let lower_from = |u: &[f64]| -> f64 {
        let nq = dual_norm(u, q);
        let np = dual_norm(u, p);
        if nq == 0.0 || np == 0.0 {
            return 0.0;
        }
        let scale = (1.0 / nq).min(t / np);
        scale * a.iter().zip(u).map(|(ak, uk)| ak * uk).sum::<f64>()
    };
    // Dual value of the path point at s: feasibility is restored by scaling,
    // so the value is smooth in s and peaks at the optimum.
    let dual_at = |s: f64| -> f64 {
        let y = path(s);
        let r: Vec<f64> = a.iter().zip(&y).map(|(ak, yk)| (ak - yk).max(0.0)).collect();
        let mut best = 0.0f64;
        if q > 1.0 {
            let nq = lq_q(&r, q);
            if nq > 0.0 {
                let u: Vec<f64> = r.iter().map(|v| (v / nq).powf(q - 1.0)).collect();
                best = best.max(lower_from(&u));
            }
        }
        if p > 1.0 {
            let np = lq_q(&y, p);
            if np > 0.0 {
                let u: Vec<f64> = y.iter().map(|v| t * (v / np).powf(p - 1.0)).collect();
                best = best.max(lower_from(&u));
            }
        }
        best
    };
    // Constant dual candidates covering the corners y = 0 and y = a.
    let corner_lower = {
        let mut best = 0.0f64;
        if q == 1.0 {
            let u: Vec<f64> = a.iter().map(|&ak| if ak > 0.0 { 1.0 } else { 0.0 }).collect();
            best = best.max(lower_from(&u));
        } else {
            let nq = lq_q(&a, q);
            let u: Vec<f64> = a.iter().map(|v| (v / nq).powf(q - 1.0)).collect();
            best = best.max(lower_from(&u));
        }
        if p == 1.0 {
            let u: Vec<f64> = a.iter().map(|&ak| if ak > 0.0 { t } else { 0.0 }).collect();
            best = best.max(lower_from(&u));
        } else {
            let np = lq_q(&a, p);
            let u: Vec<f64> = a.iter().map(|v| t * (v / np).powf(p - 1.0)).collect();
            best = best.max(lower_from(&u));
        }
        best
    };

    let ternary = |eval: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64| -> f64 {
        for _ in 0..120 {
            let third = (hi - lo) / 3.0;
            let m1 = lo + third;
            let m2 = hi - third;
            if eval(m1) <= eval(m2) {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        0.5 * (lo + hi)
    };

    let mut best_y = vec![0.0; d];
    let mut upper = obj(&best_y);
    let full = obj(&a);
    if full < upper {
        best_y = a.clone();
        upper = full;
    }
    let mut lower = corner_lower.min(upper);

    for round in 0..6u32 {
        let grid = 64usize << (2 * round.min(3));
        let mut best_s = 0.0;
        let mut best_s_dual = 0.0;
        let mut dual_best = lower;
        for i in 0..=grid {
            let s = i as f64 / grid as f64;
            let val = obj(&path(s));
            if val < upper {
                upper = val;
                best_s = s;
                best_y = path(s);
            }
            let dv = dual_at(s);
            if dv > dual_best {
                dual_best = dv;
                best_s_dual = s;
            }
        }
        let width = 1.0 / grid as f64;
        let s_ref = ternary(
            &|s: f64| obj(&path(s.clamp(0.0, 1.0))),
            (best_s - width).max(0.0),
            (best_s + width).min(1.0),
        );
        let y_ref = path(s_ref.clamp(0.0, 1.0));
        let val_ref = obj(&y_ref);
        if val_ref < upper {
            upper = val_ref;
            best_y = y_ref;
        }
        let s_dual = ternary(
            &|s: f64| -dual_at(s.clamp(0.0, 1.0)),
            (best_s_dual - width).max(0.0),
            (best_s_dual + width).min(1.0),
        );
        lower = lower.max(dual_best).max(dual_at(s_dual.clamp(0.0, 1.0)));

        // Cyclic coordinate descent polish; each slice is 1-D convex.
        let mut y = best_y.clone();
        for _ in 0..4 {
            for k in 0..d {
                if a[k] == 0.0 {
                    continue;
                }
                let yk = ternary(
                    &|val: f64| {
                        let mut probe = y.clone();
                        probe[k] = val;
                        obj(&probe)
                    },
                    0.0,
                    a[k],
                );
                let mut probe = y.clone();
                probe[k] = yk;
                if obj(&probe) <= obj(&y) {
                    y = probe;
                }
            }
        }
        let val = obj(&y);
        if val < upper {
            upper = val;
            best_y = y;
        }

        lower = lower.min(upper);
        if upper - lower <= 2.0 * tol_param {
            let value = 0.5 * (upper + lower);
            return finish(best_y, value, 0.5 * (upper - lower));
        }
    }
    Err(Error::SolverFailure(format!(
        "duality gap did not reach 2*tol = {} for q={q}, p={p}",
        2.0 * tol_param
    )))
}

fn lq_q(v: &[f64], e: f64) -> f64 {
    v.iter().map(|x| x.abs().powf(e)).sum::<f64>().powf(1.0 / e)
}

/// Exhaustive grid-search oracle, dimension at most 4.
///
/// For couples whose two norms are both absolute (`lq`, `weighted_l1`, `sup`)
/// an optimal `y` is sign-aligned with `x` and dominated by it, so the box is
/// `[0, |x_k|]` per coordinate. The Lipschitz couple is not absolute; there
/// the box is `[min f, max f]` per node (clamping to that range never hurts
/// either term). The reported `error_bound` is the objective's modulus of
/// continuity over half a grid step.
pub fn k_bruteforce(x: &Element, t: f64, couple: &CoupleSpec, grid_step: f64) -> Result<KResult> {
    check_t(t)?;
    if !(grid_step > 0.0 && grid_step.is_finite()) {
        return Err(Error::param("grid_step", "must be positive and finite"));
    }
    let d = x.dim();
    if d > 4 {
        return Err(Error::param(
            "dimension",
            format!("brute force supports dimension <= 4, got {d}"),
        ));
    }
    let lip_involved = matches!(couple.x_space(), SpaceSpec::LipGrid)
        || matches!(couple.y_space(), SpaceSpec::LipGrid);
    let grid_h = x.as_grid().map(|g| g.spacing());
    if lip_involved && grid_h.is_none() {
        return Err(Error::SolverMismatch(
            "brute force over a Lipschitz couple needs a grid element".into(),
        ));
    }

    let values = x.values().as_slice();
    let mut axes: Vec<Vec<f64>> = Vec::with_capacity(d);
    if lip_involved {
        let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let axis = axis_points(lo, hi, grid_step);
        axes.resize(d, axis);
    } else {
        for &v in values {
            let axis = axis_points(0.0, v.abs(), grid_step);
            axes.push(axis.iter().map(|&m| v.signum() * m).collect());
        }
    }
    let total: f64 = axes.iter().map(|a| a.len() as f64).product();
    const MAX_POINTS: f64 = 4e7;
    if total > MAX_POINTS {
        return Err(Error::param(
            "grid_step",
            format!("search grid has {total:.3e} points (cap {MAX_POINTS:.0e}); coarsen the step or shrink the element"),
        ));
    }

    let norm_x = slice_norm(couple.x_space(), grid_h)?;
    let norm_y = slice_norm(couple.y_space(), grid_h)?;

    let mut idx = vec![0usize; d];
    let mut y: Vec<f64> = axes.iter().map(|a| a[0]).collect();
    let mut residual = vec![0.0f64; d];
    let mut best = f64::INFINITY;
    let mut best_y = y.clone();
    'search: loop {
        for k in 0..d {
            residual[k] = values[k] - y[k];
        }
        let val = norm_x(&residual) + t * norm_y(&y);
        if val < best {
            best = val;
            best_y = y.clone();
        }
        let mut k = 0;
        loop {
            idx[k] += 1;
            if idx[k] < axes[k].len() {
                y[k] = axes[k][idx[k]];
                break;
            }
            idx[k] = 0;
            y[k] = axes[k][0];
            k += 1;
            if k == d {
                break 'search;
            }
        }
    }

    let half = 0.5 * grid_step;
    let err = norm_modulus(couple.x_space(), x, half, grid_h)?
        + t * norm_modulus(couple.y_space(), x, half, grid_h)?;
    let minimizer = x.with_values(Vector::new(best_y)?)?;
    Ok(KResult {
        value: best,
        error_bound: err,
        minimizer: Some(minimizer),
        method: SolverMethod::BruteForceGrid,
    })
}

fn axis_points(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let mut pts = Vec::new();
    let mut v = lo;
    let mut i = 0u64;
    while v < hi {
        pts.push(v);
        i += 1;
        v = lo + i as f64 * step;
    }
    pts.push(hi);
    pts
}

type SliceNorm<'a> = Box<dyn Fn(&[f64]) -> f64 + 'a>;

fn slice_norm<'a>(space: &'a SpaceSpec, grid_h: Option<f64>) -> Result<SliceNorm<'a>> {
    Ok(match space {
        SpaceSpec::Lq { q } => {
            let q = *q;
            Box::new(move |v| v.iter().map(|x| x.abs().powf(q)).sum::<f64>().powf(1.0 / q))
        }
        SpaceSpec::WeightedL1 { weights } => Box::new(move |v| {
            v.iter()
                .zip(weights.iter())
                .map(|(x, w)| w * x.abs())
                .sum()
        }),
        SpaceSpec::Sup => Box::new(|v| v.iter().map(|x| x.abs()).fold(0.0, f64::max)),
        SpaceSpec::LipGrid => {
            let h = grid_h.ok_or_else(|| {
                Error::SolverMismatch("lip_grid norm needs grid geometry".into())
            })?;
            Box::new(move |v| {
                v.windows(2)
                    .map(|w| (w[1] - w[0]).abs() / h)
                    .fold(0.0, f64::max)
            })
        }
    })
}

/// Upper bound on `| N(a') - N(a) |` when every coordinate moves by at most
/// `delta`. For quasi-norms (`q < 1`) the modulus degrades near large base
/// norms; the bound `(B^q + e^q)^{1/q} - B` with `B = N(x)` covers the whole
/// search box.
fn norm_modulus(space: &SpaceSpec, x: &Element, delta: f64, grid_h: Option<f64>) -> Result<f64> {
    let d = x.dim() as f64;
    Ok(match space {
        SpaceSpec::Sup => delta,
        SpaceSpec::WeightedL1 { weights } => delta * weights.iter().sum::<f64>(),
        SpaceSpec::Lq { q } if *q >= 1.0 => delta * d.powf(1.0 / q),
        SpaceSpec::Lq { q } => {
            let e = delta * d.powf(1.0 / q);
            let b = space.norm(x)?;
            (b.powf(*q) + e.powf(*q)).powf(1.0 / q) - b
        }
        SpaceSpec::LipGrid => {
            let h = grid_h.ok_or_else(|| {
                Error::SolverMismatch("lip_grid modulus needs grid geometry".into())
            })?;
            2.0 * delta / h
        }
    })
}

/// Dispatch on the couple's declared solver.
pub fn k_solve(x: &Element, t: f64, couple: &CoupleSpec) -> Result<KResult> {
    match couple.solver() {
        SolverKind::WeightedClosedForm => {
            let weights = couple.y_space().weights().expect("validated at construction");
            k_weighted(x.values(), t, weights)
        }
        SolverKind::ClipL1Sup => k_clip(x.values(), t),
        SolverKind::LipGrid => match x {
            Element::Grid(g) => k_lip(g, t),
            Element::Vector(_) => Err(Error::SolverMismatch(
                "lip_grid solver needs a grid element".into(),
            )),
        },
        SolverKind::NumericLqLp { tol } => {
            let (q, p) = match (couple.x_space(), couple.y_space()) {
                (SpaceSpec::Lq { q }, SpaceSpec::Lq { q: p }) => (*q, *p),
                _ => unreachable!("validated at construction"),
            };
            k_numeric(x.values(), t, q, p, *tol)
        }
        SolverKind::BruteForce { grid_step } => k_bruteforce(x, t, couple, *grid_step),
    }
}

/// `sup_x K(x, t)` over a finite set of elements.
pub fn k_sup(elements: &[Element], t: f64, couple: &CoupleSpec) -> Result<f64> {
    if elements.is_empty() {
        return Err(Error::Empty("element list"));
    }
    let mut best = f64::NEG_INFINITY;
    for e in elements {
        best = best.max(k_solve(e, t, couple)?.value);
    }
    Ok(best)
}

/// K(x, t) sampled on a strictly increasing t-grid. `t |-> K(x, t)` is
/// non-decreasing and bounded by `|x|_X`; the constructor asserts both within
/// the reported error bounds instead of clamping.
#[derive(Debug, Clone, PartialEq)]
pub struct KCurve {
    t_values: Vec<f64>,
    k_values: Vec<f64>,
    error_bounds: Vec<f64>,
}

impl KCurve {
    pub fn new(
        t_values: Vec<f64>,
        k_values: Vec<f64>,
        error_bounds: Vec<f64>,
        x_norm: f64,
    ) -> Result<Self> {
        if t_values.is_empty() {
            return Err(Error::Empty("t grid"));
        }
        if t_values.len() != k_values.len() || t_values.len() != error_bounds.len() {
            return Err(Error::DimensionMismatch {
                expected: t_values.len(),
                got: k_values.len().min(error_bounds.len()),
            });
        }
        for &t in &t_values {
            check_t(t)?;
        }
        if t_values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::param("t grid", "must be strictly increasing"));
        }
        if k_values.iter().chain(&error_bounds).any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::param("curve values", "must be finite and non-negative"));
        }
        let slack = tol::FP_SLACK * (1.0 + x_norm.abs());
        for i in 0..k_values.len() - 1 {
            if k_values[i] > k_values[i + 1] + error_bounds[i] + error_bounds[i + 1] + slack {
                return Err(Error::InvariantViolation(format!(
                    "K must be non-decreasing in t: K(t[{i}]) = {} > K(t[{}]) = {}",
                    k_values[i],
                    i + 1,
                    k_values[i + 1],
                )));
            }
        }
        for (i, (&k, &e)) in k_values.iter().zip(&error_bounds).enumerate() {
            if k > x_norm + e + slack {
                return Err(Error::InvariantViolation(format!(
                    "K(t[{i}]) = {k} exceeds the X-norm {x_norm}",
                )));
            }
        }
        Ok(KCurve {
            t_values,
            k_values,
            error_bounds,
        })
    }

    pub fn len(&self) -> usize {
        self.t_values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn t_values(&self) -> &[f64] {
        &self.t_values
    }

    pub fn k_values(&self) -> &[f64] {
        &self.k_values
    }

    pub fn error_bounds(&self) -> &[f64] {
        &self.error_bounds
    }
}

/// Evaluate `K(x, .)` on a t-grid with the couple's solver.
pub fn k_curve(x: &Element, couple: &CoupleSpec, t_grid: &[f64]) -> Result<KCurve> {
    let mut k_values = Vec::with_capacity(t_grid.len());
    let mut error_bounds = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let r = k_solve(x, t, couple)?;
        k_values.push(r.value);
        error_bounds.push(r.error_bound);
    }
    let x_norm = couple.x_space().norm(x)?;
    KCurve::new(t_grid.to_vec(), k_values, error_bounds, x_norm)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vecf(v: &[f64]) -> Vector {
        Vector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn weighted_closed_form_examples() {
        let w = vecf(&[1.0, 2.0, 4.0]);
        let r = k_weighted(&vecf(&[1.0, 1.0, 1.0]), 0.5, &w).unwrap();
        assert_eq!(r.value, 2.5);
        assert_eq!(r.error_bound, 0.0);
        // minimizer keeps exactly the coordinates with t w_k < 1
        let y = r.minimizer.unwrap();
        assert_eq!(y.values().as_slice(), &[1.0, 0.0, 0.0]);

        // basis vectors against dyadic weights: K(e_k, 2^-m) = min(1, 2^{k-m})
        let dim = 8;
        let w: Vector = vecf(&(0..dim).map(|k| (k as f64).exp2()).collect::<Vec<_>>());
        for k in 0..dim {
            for m in 0..10i32 {
                let e = Vector::basis(dim, k).unwrap();
                let t = (-(m as f64)).exp2();
                let got = k_weighted(&e, t, &w).unwrap().value;
                let want = (k as f64 - m as f64).exp2().min(1.0);
                assert!((got - want).abs() <= 1e-15, "k={k} m={m}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn clip_solver_example_and_tie_break() {
        let r = k_clip(&vecf(&[1.0, 1.0]), 1.0).unwrap();
        assert_eq!(r.value, 1.0);
        // level 1 wins over level 0 (cost 2); minimizer clips at 1
        assert_eq!(r.minimizer.unwrap().values().as_slice(), &[1.0, 1.0]);

        // cost is flat in the level on [1, 2] at t = 1 for x = (2, 0):
        // levels 0 -> 2, 1 -> wait; use explicit tie: x = (1,), t = 1
        let r = k_clip(&vecf(&[1.0]), 1.0).unwrap();
        assert_eq!(r.value, 1.0);
        // ties resolve to the smallest level, so y = 0
        assert_eq!(r.minimizer.unwrap().values().as_slice(), &[0.0]);
    }

    #[test]
    fn clip_value_at_most_t_on_unit_l1_vectors() {
        let x = vecf(&[0.25, -0.5, 0.25]);
        for m in 0..=10i32 {
            let t = (-(m as f64)).exp2();
            let r = k_clip(&x, t).unwrap();
            assert!(r.value <= t + 1e-12);
            assert!(r.value <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn lip_solver_hat_example() {
        let f = GridFunction::new(0.0, 1.0, vecf(&[0.0, 1.0, 0.0])).unwrap();
        let r = k_lip(&f, 0.1).unwrap();
        assert!((r.value - 0.2).abs() < 1e-15);
        let g = r.minimizer.unwrap();
        let obj = {
            let sup: f64 = f
                .values()
                .iter()
                .zip(g.values().iter())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            sup + 0.1 * SpaceSpec::LipGrid.norm(&g).unwrap()
        };
        assert!(obj <= r.value + 1e-12);
    }

    /// Data where the optimal Lipschitz budget sits at a crossing of two
    /// envelope lines rather than at a difference quotient.
    #[test]
    fn lip_solver_envelope_crossing() {
        let f = GridFunction::new(0.0, 1.0, vecf(&[0.0, 1.0, 1.5])).unwrap();
        let r = k_lip(&f, 0.4).unwrap();
        assert!((r.value - 0.65).abs() < 1e-12, "value {}", r.value);
        // cross-check against the oracle
        let couple = CoupleSpec::lip_grid().unwrap();
        let oracle = k_bruteforce(&Element::Grid(f), 0.4, &couple, 5e-3).unwrap();
        assert!((r.value - oracle.value).abs() <= oracle.error_bound);
    }

    #[test]
    fn numeric_solver_examples() {
        let r = k_numeric(&vecf(&[1.0, 0.0]), 2.0, 2.0, 1.0, 1e-9).unwrap();
        assert!((r.value - 1.0).abs() <= 1e-9 + 1e-12);
        assert!(r.error_bound <= 1e-9);

        let r = k_numeric(&vecf(&[0.0, 0.0]), 0.5, 2.0, 1.0, 1e-9).unwrap();
        assert_eq!(r.value, 0.0);

        assert!(matches!(
            k_numeric(&vecf(&[1.0]), 1.0, 2.0, 0.5, 1e-9),
            Err(Error::NonConvexExponents { .. })
        ));
    }

    #[test]
    fn numeric_solver_agrees_with_oracle() {
        let cases: &[(&[f64], f64, f64, f64)] = &[
            (&[0.07, 0.02], 0.8, 2.0, 1.0),
            (&[0.05, 0.05, 0.01], 1.5, 1.0, 2.0),
            (&[0.06, 0.03], 0.3, 3.0, 1.5),
            (&[0.08], 2.5, 2.0, 2.0),
        ];
        for &(xs, t, q, p) in cases {
            let x = vecf(xs);
            let r = k_numeric(&x, t, q, p, 1e-10).unwrap();
            let couple = CoupleSpec::brute_force(
                SpaceSpec::lq(q).unwrap(),
                SpaceSpec::lq(p).unwrap(),
                2e-4,
            )
            .unwrap();
            let oracle = k_bruteforce(&Element::Vector(x), t, &couple, 2e-4).unwrap();
            assert!(
                (r.value - oracle.value).abs() <= oracle.error_bound + r.error_bound,
                "q={q} p={p} t={t}: {} vs {} (err {})",
                r.value,
                oracle.value,
                oracle.error_bound
            );
        }
    }

    #[test]
    fn bruteforce_guards() {
        let couple = CoupleSpec::clip().unwrap();
        assert!(k_bruteforce(&Element::Vector(Vector::ones(5).unwrap()), 1.0, &couple, 0.1).is_err());
        let r = k_bruteforce(&Element::Vector(vecf(&[0.5, -0.5])), 1.0, &couple, 1e-3).unwrap();
        let exact = k_clip(&vecf(&[0.5, -0.5]), 1.0).unwrap();
        assert!((r.value - exact.value).abs() <= r.error_bound);
    }

    #[test]
    fn k_sup_over_weighted_basis() {
        let dim = 6;
        let w: Vector = vecf(&(0..dim).map(|k| (k as f64).exp2()).collect::<Vec<_>>());
        let couple = CoupleSpec::weighted(w).unwrap();
        let basis: Vec<Element> = (0..dim)
            .map(|k| Element::Vector(Vector::basis(dim, k).unwrap()))
            .collect();
        let t = 0.25f64;
        let got = k_sup(&basis, t, &couple).unwrap();
        let want = (t * (dim as f64 - 1.0).exp2()).min(1.0);
        assert!((got - want).abs() <= 1e-15);
    }

    #[test]
    fn curve_assembly_and_validation() {
        let couple = CoupleSpec::weighted(vecf(&[1.0, 2.0, 4.0])).unwrap();
        let x = Element::Vector(vecf(&[1.0, -1.0, 1.0]));
        let grid: Vec<f64> = (0..20).map(|i| 1e-3 * (i as f64 + 1.0).powi(2)).collect();
        let curve = k_curve(&x, &couple, &grid).unwrap();
        assert_eq!(curve.len(), grid.len());
        assert!(curve.k_values().windows(2).all(|w| w[0] <= w[1] + 1e-12));

        // decreasing K beyond error bounds is rejected, not repaired
        let bad = KCurve::new(vec![0.5, 1.0], vec![1.0, 0.5], vec![0.0, 0.0], 2.0);
        assert!(matches!(bad, Err(Error::InvariantViolation(_))));
        // K above the X-norm is rejected
        let bad = KCurve::new(vec![0.5], vec![3.0], vec![0.0], 2.0);
        assert!(matches!(bad, Err(Error::InvariantViolation(_))));
    }

    #[test]
    fn rejects_non_positive_t() {
        let x = vecf(&[1.0]);
        assert!(k_clip(&x, 0.0).is_err());
        assert!(k_weighted(&x, -1.0, &vecf(&[1.0])).is_err());
        let f = GridFunction::new(0.0, 1.0, vecf(&[0.0, 1.0])).unwrap();
        assert!(k_lip(&f, f64::NAN).is_err());
    }

    /// If K(x, t) >= c, any decomposition with a small X-residual must have a
    /// large Y-part: `|y|_Y >= (c - |x - y|_X) / t`.
    #[test]
    fn lower_bound_forces_large_y_norm() {
        let w = vecf(&[1.0, 4.0, 16.0]);
        let couple = CoupleSpec::weighted(w.clone()).unwrap();
        let x = Element::Vector(vecf(&[0.3, -0.4, 0.3]));
        for m in 1..=6i32 {
            let t = (-(m as f64)).exp2();
            let r = k_weighted(x.values(), t, &w).unwrap();
            let c = r.value;
            let y = r.minimizer.unwrap();
            let res = couple
                .x_space()
                .norm(&Element::Vector(x.values().sub(y.values()).unwrap()))
                .unwrap();
            if res < c {
                let y_norm = couple.y_space().norm(&y).unwrap();
                assert!(y_norm >= (c - res) / t - 1e-12);
            }
        }
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn small_vec(max_dim: usize) -> impl Strategy<Value = Vec<f64>> {
            proptest::collection::vec(-1.0f64..1.0, 1..=max_dim)
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(200))]

            #[test]
            fn weighted_homogeneity(v in small_vec(4), c in 0.1f64..5.0, t in 0.01f64..4.0) {
                let x = Vector::new(v).unwrap();
                let w = Vector::new((0..x.dim()).map(|k| 1.0 + k as f64).collect()).unwrap();
                let base = k_weighted(&x, t, &w).unwrap().value;
                let scaled = k_weighted(&x.scale(c).unwrap(), t, &w).unwrap().value;
                prop_assert!((scaled - c * base).abs() <= 1e-12 * (1.0 + c * base));
            }

            #[test]
            fn clip_monotone_and_concave_in_t(v in small_vec(4), t in 0.01f64..2.0) {
                let x = Vector::new(v).unwrap();
                let (t1, t2, t3) = (t, 1.5 * t, 2.0 * t);
                let k1 = k_clip(&x, t1).unwrap().value;
                let k2 = k_clip(&x, t2).unwrap().value;
                let k3 = k_clip(&x, t3).unwrap().value;
                prop_assert!(k1 <= k2 + 1e-12 && k2 <= k3 + 1e-12);
                // concavity: K(t2) >= linear interpolation of (t1, k1), (t3, k3)
                let lam = (t2 - t1) / (t3 - t1);
                prop_assert!(k2 >= (1.0 - lam) * k1 + lam * k3 - 1e-12);
            }

            #[test]
            fn weighted_triangle_inequality(u in small_vec(3), t in 0.01f64..4.0) {
                let x = Vector::new(u.clone()).unwrap();
                let shift = Vector::new(u.iter().map(|a| a * 0.5 - 0.1).collect()).unwrap();
                let w = Vector::new((0..x.dim()).map(|k| (k as f64 + 1.0) * 0.7).collect()).unwrap();
                let kx = k_weighted(&x, t, &w).unwrap().value;
                let ks = k_weighted(&shift, t, &w).unwrap().value;
                let ksum = k_weighted(&x.add(&shift).unwrap(), t, &w).unwrap().value;
                prop_assert!(ksum <= kx + ks + 1e-12);
            }

            #[test]
            fn weight_monotonicity(v in small_vec(4), t in 0.01f64..4.0) {
                let x = Vector::new(v).unwrap();
                let w1 = Vector::new((0..x.dim()).map(|k| 1.0 + k as f64).collect()).unwrap();
                let w2 = w1.scale(1.5).unwrap();
                let k1 = k_weighted(&x, t, &w1).unwrap().value;
                let k2 = k_weighted(&x, t, &w2).unwrap().value;
                prop_assert!(k1 <= k2 + 1e-12);
            }

            #[test]
            fn value_bounded_by_both_endpoints(v in small_vec(4), t in 0.01f64..4.0) {
                let x = Vector::new(v).unwrap();
                let r = k_clip(&x, t).unwrap();
                let x_norm = x.iter().map(f64::abs).sum::<f64>();
                let y_norm = x.iter().map(f64::abs).fold(0.0, f64::max);
                prop_assert!(r.value <= x_norm + 1e-12);
                prop_assert!(r.value <= t * y_norm + 1e-12);
            }

            #[test]
            fn minimizer_objective_matches_value(v in small_vec(4), t in 0.01f64..4.0) {
                let x = Vector::new(v).unwrap();
                let w = Vector::new((0..x.dim()).map(|k| (1.5f64).powi(k as i32)).collect()).unwrap();
                let couple = CoupleSpec::weighted(w.clone()).unwrap();
                let r = k_weighted(&x, t, &w).unwrap();
                let y = r.minimizer.clone().unwrap();
                let obj = objective(&couple, &Element::Vector(x), &y, t).unwrap();
                prop_assert!(obj <= r.value + r.error_bound + 1e-12);
            }
        }
    }
}
