//! Certified witnesses that the K-functional stays bounded away from zero on
//! the unit sphere: exact ball-constrained Y-norm minimization, the two
//! concrete witness families, certificate assembly, the transfer inequality,
//! and renorming sandwich checks.

use serde::Serialize;

use crate::couple::CoupleSpec;
use crate::element::{Element, GridFunction};
use crate::error::{Error, Result};
use crate::ksolve::k_solve;
use crate::space::SpaceSpec;
use crate::{tol, Vector};

/// Exact value of `inf { |y|_Y : |x - y|_X <= delta }` for the supported
/// space pairs:
///
/// - `X = sup`, `Y = l_p` (any `p > 0`): separable per-coordinate shrinkage
///   gives `( sum_k (|x_k| - delta)_+^p )^{1/p}`.
/// - `X = sup` on a grid, `Y = grid Lipschitz`: the chord bound
///   `max_{s != u} (|x(s) - x(u)| - 2 delta)_+ / |s - u|`, attained by the
///   Lipschitz regularization of `x`.
/// - `X = l1`, `Y = sup`: the smallest clip level `M` whose clipping error
///   `sum_k (|x_k| - M)_+` fits in the ball.
pub fn min_y_norm_on_ball(
    x: &Element,
    delta: f64,
    y_space: &SpaceSpec,
    x_space: &SpaceSpec,
) -> Result<f64> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::param("delta", format!("need finite delta > 0, got {delta}")));
    }
    match (x_space, y_space) {
        (SpaceSpec::Sup, SpaceSpec::Lq { q: p }) => Ok(x
            .values()
            .iter()
            .map(|v| (v.abs() - delta).max(0.0).powf(*p))
            .sum::<f64>()
            .powf(1.0 / p)),
        (SpaceSpec::Sup, SpaceSpec::LipGrid) => {
            let g = x.as_grid().ok_or(Error::UnsupportedBallPair {
                x: "sup on a plain vector",
                y: "lip_grid",
            })?;
            let v = g.values().as_slice();
            let h = g.spacing();
            let mut best = 0.0f64;
            for i in 0..v.len() {
                for j in (i + 1)..v.len() {
                    let d = (j - i) as f64 * h;
                    best = best.max(((v[j] - v[i]).abs() - 2.0 * delta).max(0.0) / d);
                }
            }
            Ok(best)
        }
        (SpaceSpec::Lq { q }, SpaceSpec::Sup) if *q == 1.0 => {
            let mut mags: Vec<f64> = x.values().iter().map(f64::abs).collect();
            mags.sort_by(|a, b| b.total_cmp(a));
            let total: f64 = mags.iter().sum();
            if total <= delta {
                return Ok(0.0);
            }
            // Walking the clip level down from max|x|, the clipping error on
            // the segment where j entries stick out is prefix_j - j * M.
            let mut prefix = 0.0;
            for (j, &m) in mags.iter().enumerate() {
                prefix += m;
                let next = mags.get(j + 1).copied().unwrap_or(0.0);
                let level = (prefix - delta) / (j + 1) as f64;
                if level >= next {
                    return Ok(level.max(0.0));
                }
            }
            unreachable!("total > delta guarantees a positive clip level");
        }
        _ => Err(Error::UnsupportedBallPair {
            x: x_space.kind_name(),
            y: y_space.kind_name(),
        }),
    }
}

/// Sound lower bound for the ball minimum, extending the exact pairs: when
/// `X = l_q`, the `l_q` ball sits inside the sup ball of the same radius, so
/// the exact sup-ball value bounds the `l_q`-ball infimum from below.
fn ball_lower_bound(
    x: &Element,
    delta: f64,
    y_space: &SpaceSpec,
    x_space: &SpaceSpec,
) -> Result<f64> {
    match (x_space, y_space) {
        (SpaceSpec::Sup, _) => min_y_norm_on_ball(x, delta, y_space, x_space),
        (SpaceSpec::Lq { q }, SpaceSpec::Sup) if *q == 1.0 => {
            min_y_norm_on_ball(x, delta, y_space, x_space)
        }
        (SpaceSpec::Lq { .. }, SpaceSpec::Lq { .. }) => {
            min_y_norm_on_ball(x, delta, y_space, &SpaceSpec::Sup)
        }
        _ => Err(Error::UnsupportedBallPair {
            x: x_space.kind_name(),
            y: y_space.kind_name(),
        }),
    }
}

/// A unit-X-norm element certified to satisfy: every `y` with
/// `|x - y|_X <= delta (1 - BALL_SHRINK)` has `|y|_Y >= b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    element: Element,
    delta: f64,
    b: f64,
    x_space: SpaceSpec,
    y_space: SpaceSpec,
}

impl Witness {
    /// Certify the blow-up level by exact (or soundly relaxed) ball
    /// minimization; refuses the witness if the level is not reached.
    pub fn certify(
        element: Element,
        delta: f64,
        b: f64,
        x_space: SpaceSpec,
        y_space: SpaceSpec,
    ) -> Result<Witness> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::param("delta", format!("need 0 < delta < 1, got {delta}")));
        }
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::param("b", format!("need finite b > 0, got {b}")));
        }
        let x_norm = x_space.norm(&element)?;
        if (x_norm - 1.0).abs() > tol::UNIT_NORM {
            return Err(Error::CertificateViolation(format!(
                "witness element must have unit X-norm, got {x_norm}"
            )));
        }
        let shrunk = delta * (1.0 - tol::BALL_SHRINK);
        let floor = ball_lower_bound(&element, shrunk, &y_space, &x_space)?;
        if floor < b {
            return Err(Error::CertificateViolation(format!(
                "ball minimum {floor} at radius {shrunk} is below the claimed level {b}"
            )));
        }
        Ok(Witness {
            element,
            delta,
            b,
            x_space,
            y_space,
        })
    }

    pub fn element(&self) -> &Element {
        &self.element
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn x_space(&self) -> &SpaceSpec {
        &self.x_space
    }

    pub fn y_space(&self) -> &SpaceSpec {
        &self.y_space
    }
}

/// Witness for the `(sup, l_p)` pair: the indicator of the first `2n`
/// coordinates. Any `y` within sup-distance `1/2` keeps magnitude at least
/// `1/2` in each of the `2n` slots, so `|y|_p >= 2^{-1+1/p} n^{1/p}`.
pub fn witness_lqlp(n: usize, p: f64) -> Result<Witness> {
    if n == 0 {
        return Err(Error::param("n", "need n >= 1"));
    }
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::param("p", format!("need finite p > 0, got {p}")));
    }
    let element = Element::Vector(Vector::ones(2 * n)?);
    let b = (-1.0 + 1.0 / p).exp2() * (n as f64).powf(1.0 / p);
    Witness::certify(element, 0.5, b, SpaceSpec::Sup, SpaceSpec::lq(p)?)
}

/// The same witness rescaled to unit `l_q` norm, for the finite-q variant of
/// the pair: `delta` and `b` shrink by the same factor (homogeneity). The
/// certification stays sound because the `l_q` ball is contained in the sup
/// ball of equal radius.
pub fn witness_lqlp_normalized(n: usize, p: f64, q: f64) -> Result<Witness> {
    if n == 0 {
        return Err(Error::param("n", "need n >= 1"));
    }
    for (name, v) in [("p", p), ("q", q)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::param(name, format!("need finite {name} > 0, got {v}")));
        }
    }
    let lambda = (2.0 * n as f64).powf(1.0 / q);
    let element = Element::Vector(Vector::ones(2 * n)?.scale(1.0 / lambda)?);
    let b = (-1.0 + 1.0 / p).exp2() * (n as f64).powf(1.0 / p) / lambda;
    Witness::certify(element, 0.5 / lambda, b, SpaceSpec::lq(q)?, SpaceSpec::lq(p)?)
}

/// Witness for the `(sup on grid, grid Lipschitz)` pair: the ramp that rises
/// from -1 to 1 across a width-`1/n` window at the domain midpoint. The ramp
/// endpoints are snapped inward to grid nodes, which can only steepen the
/// certified chord slope; spacing at most `1/(2n)` guarantees two distinct
/// nodes inside the window.
pub fn witness_c1(n: usize, template: &GridFunction) -> Result<Witness> {
    if n == 0 {
        return Err(Error::param("n", "need n >= 1"));
    }
    let h = template.spacing();
    let required = 1.0 / (2.0 * n as f64);
    if h > required * (1.0 + tol::FP_SLACK) {
        return Err(Error::GridTooCoarse {
            spacing: h,
            required,
        });
    }
    let mid = 0.5 * (template.a() + template.b());
    let alpha = mid - required;
    let beta = mid + required;
    let len = template.len();
    let node = |i: usize| template.node(i);
    let alpha_star = (0..len)
        .map(node)
        .find(|&s| s >= alpha - tol::FP_SLACK)
        .ok_or_else(|| Error::param("grid", "no node at or above the ramp start"))?;
    let beta_star = (0..len)
        .map(node)
        .rfind(|&s| s <= beta + tol::FP_SLACK)
        .ok_or_else(|| Error::param("grid", "no node at or below the ramp end"))?;
    if beta_star <= alpha_star {
        return Err(Error::GridTooCoarse {
            spacing: h,
            required,
        });
    }
    let values: Vec<f64> = (0..len)
        .map(|i| {
            let s = node(i);
            if s <= alpha_star {
                -1.0
            } else if s >= beta_star {
                1.0
            } else {
                -1.0 + 2.0 * (s - alpha_star) / (beta_star - alpha_star)
            }
        })
        .collect();
    let element = Element::Grid(template.with_values(Vector::new(values)?)?);
    Witness::certify(element, 0.5, n as f64, SpaceSpec::Sup, SpaceSpec::LipGrid)
}

/// One row of a slow-decay certificate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateEntry {
    pub n: usize,
    pub b_n: f64,
    pub t_n: f64,
    /// Certified lower bound for `K(x_n, t_n)` from the witness invariant.
    pub k_lower: f64,
    /// Direct solver evaluation of the same K, when a solver was supplied.
    pub k_solver: Option<f64>,
}

/// Certified statement: at the sampled scales `t_n = 1/b_n`, the
/// K-functional of the unit sphere stays at least `c`. The certificate only
/// evidences slow decay when the `b_n` actually grow, which `slow_decay`
/// reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlowDecayCertificate {
    pub c: f64,
    pub growth_ratio: f64,
    pub slow_decay: bool,
    pub entries: Vec<CertificateEntry>,
    #[serde(skip)]
    pub witnesses: Vec<Witness>,
}

impl SlowDecayCertificate {
    /// Quantitative refutation of a claimed uniform decay estimate
    /// `K(x, t_n) <= m eps_n` on the X-unit sphere: returns the first entry
    /// index whose certified lower bound beats the claim.
    pub fn first_refuting_index(&self, m: f64, eps: &[f64]) -> Option<usize> {
        self.entries
            .iter()
            .zip(eps)
            .position(|(e, &eps_n)| e.k_lower > m * eps_n)
    }
}

/// Build a certificate from a witness family. The argument to `family` is
/// `n = 1..=count`.
///
/// For each witness: every `y` with `|x_n - y|_X <= delta (1 - shrink)` has
/// `|y|_Y >= b_n`, so splitting on the X-distance of any candidate
/// decomposition gives `K(x_n, 1/b_n) >= min(delta (1 - shrink), 1)`, which
/// is the recorded `k_lower`. When `couple` is supplied, the solver value is
/// recorded next to it and must not undercut the certified bound.
pub fn certify_slow_decay(
    family: impl Fn(usize) -> Result<Witness>,
    couple: Option<&CoupleSpec>,
    count: usize,
) -> Result<SlowDecayCertificate> {
    if count == 0 {
        return Err(Error::param("count", "need at least one witness"));
    }
    let mut witnesses = Vec::with_capacity(count);
    let mut entries = Vec::with_capacity(count);
    let mut c = f64::INFINITY;
    for n in 1..=count {
        let w = family(n)?;
        if let Some(prev) = witnesses.last() {
            let prev: &Witness = prev;
            if w.b < prev.b * (1.0 - tol::FP_SLACK) {
                return Err(Error::InvariantViolation(format!(
                    "witness levels must be non-decreasing: b_{n} = {} < {}",
                    w.b, prev.b
                )));
            }
        }
        if let Some(cpl) = couple {
            if cpl.x_space() != &w.x_space || cpl.y_space() != &w.y_space {
                return Err(Error::param(
                    "couple",
                    "solver couple spaces differ from the witness spaces",
                ));
            }
        }
        let t_n = 1.0 / w.b;
        let k_lower = (w.delta * (1.0 - tol::BALL_SHRINK)).min(1.0);
        let k_solver = match couple {
            Some(cpl) => {
                let r = k_solve(&w.element, t_n, cpl)?;
                if r.value + r.error_bound < k_lower - tol::CERT_SOUNDNESS {
                    return Err(Error::CertificateViolation(format!(
                        "solver K = {} at t = {t_n} undercuts the certified bound {k_lower}",
                        r.value
                    )));
                }
                Some(r.value)
            }
            None => None,
        };
        c = c.min(k_lower);
        entries.push(CertificateEntry {
            n,
            b_n: w.b,
            t_n,
            k_lower,
            k_solver,
        });
        witnesses.push(w);
    }
    let growth_ratio = witnesses.last().unwrap().b / witnesses[0].b;
    Ok(SlowDecayCertificate {
        c,
        growth_ratio,
        slow_decay: growth_ratio > 1.0,
        entries,
        witnesses,
    })
}

/// Outcome of the transfer inequality check `K(x, t M, X, Y) >= K(x, t, X, Z)`
/// valid whenever `|v|_Z <= M |v|_Y`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferReport {
    pub k_xy_at_tm: f64,
    pub k_xz_at_t: f64,
    /// `k_xy_at_tm - k_xz_at_t`, non-negative up to solver tolerances.
    pub margin: f64,
}

/// Validates the domination `|v|_Z <= M |v|_Y` on canonical basis probes and
/// then checks the induced K inequality with the available solvers.
pub fn transfer_lower_bound(
    x: &Element,
    t: f64,
    m: f64,
    couple_xy: &CoupleSpec,
    couple_xz: &CoupleSpec,
) -> Result<TransferReport> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::param("t", format!("need finite t > 0, got {t}")));
    }
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::param("M", format!("need finite M > 0, got {m}")));
    }
    if couple_xy.x_space() != couple_xz.x_space() {
        return Err(Error::param(
            "couples",
            "both couples must share the same X space",
        ));
    }
    let dim = x.dim();
    for k in 0..dim {
        let probe = x.with_values(Vector::basis(dim, k)?)?;
        let ny = couple_xy.y_space().norm(&probe)?;
        let nz = couple_xz.y_space().norm(&probe)?;
        if nz > m * ny * (1.0 + tol::FP_SLACK) {
            return Err(Error::CertificateViolation(format!(
                "domination fails on basis probe {k}: |e|_Z = {nz} > M |e|_Y = {}",
                m * ny
            )));
        }
    }
    let lhs = k_solve(x, t * m, couple_xy)?;
    let rhs = k_solve(x, t, couple_xz)?;
    let slack = lhs.error_bound + rhs.error_bound + tol::FP_SLACK * (1.0 + rhs.value.abs());
    if lhs.value < rhs.value - slack {
        return Err(Error::CertificateViolation(format!(
            "transfer inequality fails: K_XY(x, tM) = {} < K_XZ(x, t) = {}",
            lhs.value, rhs.value
        )));
    }
    Ok(TransferReport {
        k_xy_at_tm: lhs.value,
        k_xz_at_t: rhs.value,
        margin: lhs.value - rhs.value,
    })
}

/// Empirical sandwich constants between a K-functional and its renormed
/// variant.
#[derive(Debug, Clone, PartialEq)]
pub struct RenormReport {
    /// Largest constant with `m k_star <= k` over the sample grid.
    pub m: f64,
    /// Smallest constant with `k <= n k_star` over the sample grid.
    pub n: f64,
    /// `(sample, t)` indices where both K values vanished.
    pub degenerate: Vec<(usize, usize)>,
}

/// Computes the tightest empirical `m`, `n` with
/// `m k_star(x, t) <= k(x, t) <= n k_star(x, t)` over samples and t values,
/// and checks them against declared equivalence constants when given.
/// A violation of declared constants signals a solver bug, not data noise,
/// so it is an error.
pub fn renorm_sandwich_check(
    k_star: impl Fn(&Element, f64) -> Result<f64>,
    k: impl Fn(&Element, f64) -> Result<f64>,
    samples: &[Element],
    t_grid: &[f64],
    declared: Option<(f64, f64)>,
) -> Result<RenormReport> {
    if samples.is_empty() || t_grid.is_empty() {
        return Err(Error::Empty("renorm sample grid"));
    }
    let mut m = f64::INFINITY;
    let mut n = 0.0f64;
    let mut degenerate = Vec::new();
    let mut seen = false;
    for (i, x) in samples.iter().enumerate() {
        for (j, &t) in t_grid.iter().enumerate() {
            let ks = k_star(x, t)?;
            let kv = k(x, t)?;
            if ks == 0.0 || kv == 0.0 {
                if ks != kv {
                    return Err(Error::CertificateViolation(format!(
                        "equivalent couples disagree on vanishing: k* = {ks}, k = {kv} at sample {i}, t = {t}"
                    )));
                }
                degenerate.push((i, j));
                continue;
            }
            let ratio = kv / ks;
            m = m.min(ratio);
            n = n.max(ratio);
            seen = true;
        }
    }
    if !seen {
        return Err(Error::param("samples", "all sample K values vanished"));
    }
    if let Some((m_decl, n_decl)) = declared {
        if m < m_decl * (1.0 - tol::FP_SLACK) {
            return Err(Error::CertificateViolation(format!(
                "declared lower constant {m_decl} violated: observed ratio {m}"
            )));
        }
        if n > n_decl * (1.0 + tol::FP_SLACK) {
            return Err(Error::CertificateViolation(format!(
                "declared upper constant {n_decl} violated: observed ratio {n}"
            )));
        }
    }
    Ok(RenormReport { m, n, degenerate })
}
