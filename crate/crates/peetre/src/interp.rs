//! Discrete interpolation quasi-norms built from K-curves, approximation
//! space norms, Jackson/Bernstein constants, and reiteration parameter
//! arithmetic.

use crate::couple::CoupleSpec;
use crate::element::Element;
use crate::error::{Error, Result};
use crate::ksolve::k_solve;
use crate::Vector;

/// `(theta, q)` pair for the interpolation norm. `q` may be `f64::INFINITY`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterpParams {
    theta: f64,
    q: f64,
}

impl InterpParams {
    pub fn new(theta: f64, q: f64) -> Result<Self> {
        if !(theta > 0.0 && theta < 1.0) {
            return Err(Error::param("theta", format!("need 0 < theta < 1, got {theta}")));
        }
        if q <= 0.0 || q.is_nan() {
            return Err(Error::param("q", format!("need q > 0 (possibly infinite), got {q}")));
        }
        Ok(InterpParams { theta, q })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn q(&self) -> f64 {
        self.q
    }
}

/// Truncated interpolation norm plus a bound on the dropped tail.
#[derive(Debug, Clone, PartialEq)]
pub struct InterpNormResult {
    pub value: f64,
    pub k_max: u32,
    /// Bound on the contribution of indices `k > k_max`, computable whenever
    /// the element has a finite Y-norm; `None` means unknown and the value
    /// must be read as a lower bound.
    pub tail_bound: Option<f64>,
}

/// `l_q` norm of the sequence `2^{theta k} K(x, 2^{-k})`, `k = 0..=k_max`.
///
/// Since `K(x, t) <= t |x|_Y`, the omitted tail is dominated by the geometric
/// sequence `2^{(theta-1)k} |x|_Y`, which is what `tail_bound` reports.
pub fn discrete_interp_norm(
    x: &Element,
    couple: &CoupleSpec,
    params: InterpParams,
    k_max: u32,
) -> Result<InterpNormResult> {
    let (theta, q) = (params.theta, params.q);
    let mut terms = Vec::with_capacity(k_max as usize + 1);
    for k in 0..=k_max {
        let t = (-(k as f64)).exp2();
        let kv = k_solve(x, t, couple)?.value;
        terms.push((theta * k as f64).exp2() * kv);
    }
    let value = if q.is_finite() {
        terms.iter().map(|v| v.powf(q)).sum::<f64>().powf(1.0 / q)
    } else {
        terms.iter().cloned().fold(0.0, f64::max)
    };
    let tail_bound = match couple.y_space().norm(x) {
        Ok(y_norm) => {
            let head = ((theta - 1.0) * (k_max as f64 + 1.0)).exp2();
            let bound = if q.is_finite() {
                y_norm * head / (1.0 - ((theta - 1.0) * q).exp2()).powf(1.0 / q)
            } else {
                y_norm * head
            };
            Some(bound)
        }
        Err(_) => None,
    };
    Ok(InterpNormResult {
        value,
        k_max,
        tail_bound,
    })
}

/// Closed-form upper bound for the `(theta, q)` interpolation norm of an
/// element with unit Y-norm and X-norm at most `2^{-n0}`:
/// `[ 2^{(theta-1) q n0} 2^{theta q} / (2^{theta q} - 1)
///  + 2^{(theta-1) q (n0+1)} / (1 - 2^{(theta-1) q}) ]^{1/q}`.
/// Strictly decreasing in `n0` with limit 0.
pub fn strict_bound(theta: f64, q: f64, n0: u32) -> Result<f64> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::param("theta", format!("need 0 < theta < 1, got {theta}")));
    }
    if !(q > 0.0 && q.is_finite()) {
        return Err(Error::param("q", format!("need finite q > 0, got {q}")));
    }
    let n0 = n0 as f64;
    let small = ((theta - 1.0) * q * n0).exp2();
    let ratio = (theta * q).exp2();
    let first = small * ratio / (ratio - 1.0);
    let second = ((theta - 1.0) * q * (n0 + 1.0)).exp2() / (1.0 - ((theta - 1.0) * q).exp2());
    Ok((first + second).powf(1.0 / q))
}

/// `l_q` norm of `2^{alpha k} E_k` for a non-increasing sequence of
/// best-approximation errors.
pub fn approx_space_norm(errors: &[f64], alpha: f64, q: f64) -> Result<f64> {
    if errors.is_empty() {
        return Err(Error::Empty("approximation error sequence"));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::param("alpha", format!("need finite alpha > 0, got {alpha}")));
    }
    if q <= 0.0 || q.is_nan() {
        return Err(Error::param("q", format!("need q > 0 (possibly infinite), got {q}")));
    }
    if errors.iter().any(|e| !e.is_finite() || *e < 0.0) {
        return Err(Error::param("errors", "entries must be finite and non-negative"));
    }
    if errors.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::param(
            "errors",
            "best-approximation errors must be non-increasing in the level",
        ));
    }
    let terms = errors
        .iter()
        .enumerate()
        .map(|(k, e)| (alpha * k as f64).exp2() * e);
    Ok(if q.is_finite() {
        terms.map(|v| v.powf(q)).sum::<f64>().powf(1.0 / q)
    } else {
        terms.fold(0.0, f64::max)
    })
}

/// Samples living in the approximation family at one level.
#[derive(Debug, Clone)]
pub struct LevelSamples {
    pub n: usize,
    pub elements: Vec<Element>,
}

/// Smallest empirical constants for the direct (Jackson) estimate
/// `E(y, A_n) <= C n^{-r} |y|_Y` and the inverse (Bernstein) estimate
/// `|a|_Y <= C n^r |a|_X` over the provided samples. Empirical maxima are
/// lower bounds for the true constants.
#[derive(Debug, Clone, PartialEq)]
pub struct JacksonBernsteinReport {
    pub c_jackson: f64,
    pub c_bernstein: f64,
    /// Samples that could not witness anything (zero denominators, negative
    /// approximation errors), with a description each.
    pub violations: Vec<String>,
}

pub fn jackson_bernstein_check(
    couple: &CoupleSpec,
    y_samples: &[Element],
    a_samples: &[LevelSamples],
    e_fn: impl Fn(&Element, usize) -> Result<f64>,
    r: f64,
) -> Result<JacksonBernsteinReport> {
    if y_samples.is_empty() || a_samples.is_empty() {
        return Err(Error::Empty("sample set"));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::param("r", format!("need finite r > 0, got {r}")));
    }
    if let Some(bad) = a_samples.iter().find(|l| l.n == 0) {
        return Err(Error::param("levels", format!("level n must be >= 1, got {}", bad.n)));
    }
    let mut violations = Vec::new();
    let mut c_jackson = 0.0f64;
    for (i, y) in y_samples.iter().enumerate() {
        let y_norm = couple.y_space().norm(y)?;
        if y_norm == 0.0 {
            violations.push(format!("y sample {i} has zero Y-norm"));
            continue;
        }
        for level in a_samples {
            let e = e_fn(y, level.n)?;
            if e < 0.0 {
                violations.push(format!(
                    "negative approximation error {e} for y sample {i} at level {}",
                    level.n
                ));
                continue;
            }
            c_jackson = c_jackson.max(e * (level.n as f64).powf(r) / y_norm);
        }
    }
    let mut c_bernstein = 0.0f64;
    for level in a_samples {
        for (j, a) in level.elements.iter().enumerate() {
            let x_norm = couple.x_space().norm(a)?;
            if x_norm == 0.0 {
                violations.push(format!("a sample {j} at level {} has zero X-norm", level.n));
                continue;
            }
            let y_norm = couple.y_space().norm(a)?;
            c_bernstein = c_bernstein.max(y_norm / ((level.n as f64).powf(r) * x_norm));
        }
    }
    Ok(JacksonBernsteinReport {
        c_jackson,
        c_bernstein,
        violations,
    })
}

/// Composed smoothness parameter for reiteration: interpolating at `alpha`
/// against a `theta`-interpolation space lands at `alpha * theta`.
pub fn reiteration_theta(alpha: f64, theta: f64) -> Result<f64> {
    for (name, v) in [("alpha", alpha), ("theta", theta)] {
        if !(v > 0.0 && v < 1.0) {
            return Err(Error::param(name, format!("need 0 < {name} < 1, got {v}")));
        }
    }
    Ok(alpha * theta)
}

/// Composed fine exponent for reiteration: `1/r = (1 - eta)/p + eta/q`.
/// `p`, `q` may be infinite; `eta` runs over `[0, 1]` with the endpoints
/// giving `r = p` and `r = q`.
pub fn reiteration_exponent(eta: f64, p: f64, q: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&eta) || eta.is_nan() {
        return Err(Error::param("eta", format!("need 0 <= eta <= 1, got {eta}")));
    }
    for (name, v) in [("p", p), ("q", q)] {
        if v <= 0.0 || v.is_nan() {
            return Err(Error::param(name, format!("need {name} > 0 (possibly infinite), got {v}")));
        }
    }
    let inv = (1.0 - eta) / p + eta / q;
    Ok(if inv == 0.0 { f64::INFINITY } else { 1.0 / inv })
}

/// Ratio statistics of two norms over a sample set. Bounded spread as the
/// sample set grows is evidence (not proof) of norm equivalence.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioReport {
    pub rho_min: f64,
    pub rho_max: f64,
    /// Samples skipped because `norm_b` vanished there.
    pub zero_denominator: Vec<usize>,
    /// Samples where `norm_a` vanished but `norm_b` did not.
    pub zero_numerator: Vec<usize>,
}

impl RatioReport {
    pub fn spread(&self) -> f64 {
        self.rho_max / self.rho_min
    }
}

pub fn equivalence_ratio(
    norm_a: impl Fn(&Element) -> Result<f64>,
    norm_b: impl Fn(&Element) -> Result<f64>,
    samples: &[Element],
) -> Result<RatioReport> {
    if samples.is_empty() {
        return Err(Error::Empty("sample set"));
    }
    let mut rho_min = f64::INFINITY;
    let mut rho_max = 0.0f64;
    let mut zero_denominator = Vec::new();
    let mut zero_numerator = Vec::new();
    let mut seen = false;
    for (i, s) in samples.iter().enumerate() {
        let a = norm_a(s)?;
        let b = norm_b(s)?;
        if b == 0.0 {
            zero_denominator.push(i);
            continue;
        }
        if a == 0.0 {
            zero_numerator.push(i);
            continue;
        }
        let rho = a / b;
        rho_min = rho_min.min(rho);
        rho_max = rho_max.max(rho);
        seen = true;
    }
    if !seen {
        return Err(Error::param(
            "samples",
            "no sample is nonzero under both norms",
        ));
    }
    Ok(RatioReport {
        rho_min,
        rho_max,
        zero_denominator,
        zero_numerator,
    })
}

/// For the `(l1, weighted l1)` couple the truncated `(theta, 1)`
/// interpolation norm is itself a weighted `l1` norm:
/// `sum_k 2^{theta k} K(x, 2^{-k}) = sum_j |x_j| W_j` with
/// `W_j = sum_k 2^{theta k} min(1, 2^{-k} w_j)`. Returns those weights,
/// which are again positive and non-decreasing, so reiteration against the
/// interpolation space stays inside the weighted family.
pub fn interp_weights(theta: f64, k_max: u32, weights: &Vector) -> Result<Vector> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::param("theta", format!("need 0 < theta < 1, got {theta}")));
    }
    if weights.iter().any(|w| w <= 0.0) {
        return Err(Error::param("weights", "all weights must be positive"));
    }
    Vector::new(
        weights
            .iter()
            .map(|w| {
                (0..=k_max)
                    .map(|k| (theta * k as f64).exp2() * ((-(k as f64)).exp2() * w).min(1.0))
                    .sum()
            })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::SpaceSpec;

    fn vecf(v: &[f64]) -> Vector {
        Vector::new(v.to_vec()).unwrap()
    }

    fn dyadic_weighted(dim: usize) -> CoupleSpec {
        let w = vecf(&(0..dim).map(|k| (k as f64).exp2()).collect::<Vec<_>>());
        CoupleSpec::weighted(w).unwrap()
    }

    #[test]
    fn interp_norm_of_zero_is_zero() {
        let couple = dyadic_weighted(4);
        let x = Element::Vector(Vector::zeros(4).unwrap());
        let p = InterpParams::new(0.5, 1.0).unwrap();
        let r = discrete_interp_norm(&x, &couple, p, 16).unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!(r.tail_bound, Some(0.0));
    }

    #[test]
    fn interp_norm_matches_term_by_term_sum() {
        // x = 2^{-n0} e_{n0} in the dyadic weighted model, theta = 1/2, q = 1.
        let n0 = 2usize;
        let k_max = 20u32;
        let dim = 4;
        let couple = dyadic_weighted(dim);
        let mut entries = vec![0.0; dim];
        entries[n0] = (-(n0 as f64)).exp2();
        let x = Element::Vector(vecf(&entries));
        let p = InterpParams::new(0.5, 1.0).unwrap();
        let r = discrete_interp_norm(&x, &couple, p, k_max).unwrap();

        // Independent summation: K(x, 2^-k) = min(2^-n0, 2^-k).
        let oracle: f64 = (0..=k_max)
            .map(|k| {
                let kv = (-(n0 as f64)).exp2().min((-(k as f64)).exp2());
                (0.5 * k as f64).exp2() * kv
            })
            .sum();
        assert!((r.value - oracle).abs() < 1e-12);
        assert!((r.value - 2.308303).abs() < 1e-5);
        // unit Y-norm element: tail bound is the geometric remainder
        let tail = r.tail_bound.unwrap();
        let want_tail = (0.5f64 * -21.0).exp2() / (1.0 - (-0.5f64).exp2());
        assert!((tail - want_tail).abs() < 1e-15);
    }

    #[test]
    fn first_term_is_a_lower_bound() {
        let couple = dyadic_weighted(5);
        let x = Element::Vector(vecf(&[0.3, -0.1, 0.2, 0.0, 0.05]));
        let k0 = crate::ksolve::k_solve(&x, 1.0, &couple).unwrap().value;
        for q in [0.5, 1.0, 2.0, f64::INFINITY] {
            let p = InterpParams::new(0.4, q).unwrap();
            let r = discrete_interp_norm(&x, &couple, p, 12).unwrap();
            assert!(r.value >= k0 - 1e-12, "q={q}");
        }
    }

    #[test]
    fn lq_monotonicity_in_q() {
        let couple = dyadic_weighted(5);
        let x = Element::Vector(vecf(&[0.3, -0.1, 0.2, 0.0, 0.05]));
        let mut prev = f64::INFINITY;
        for q in [0.5, 1.0, 2.0, 4.0, f64::INFINITY] {
            let p = InterpParams::new(0.5, q).unwrap();
            let r = discrete_interp_norm(&x, &couple, p, 16).unwrap();
            assert!(r.value <= prev + 1e-12, "value must shrink as q grows");
            prev = r.value;
        }
    }

    #[test]
    fn strict_bound_frozen_value_and_monotonicity() {
        let b = strict_bound(0.5, 1.0, 4).unwrap();
        assert!((b - 1.4571067811865475).abs() < 1e-12);

        let mut prev = f64::INFINITY;
        for n0 in 0..40 {
            let b = strict_bound(0.5, 1.0, n0).unwrap();
            assert!(b < prev);
            prev = b;
        }
        // limit 0
        assert!(strict_bound(0.5, 1.0, 400).unwrap() < 1e-50);
        // out-of-range parameters
        assert!(strict_bound(0.0, 1.0, 3).is_err());
        assert!(strict_bound(0.5, f64::INFINITY, 3).is_err());
    }

    #[test]
    fn strict_bound_dominates_concrete_element_norm() {
        for n0 in [1u32, 4, 9] {
            for (theta, q) in [(0.5, 1.0), (0.3, 2.0), (0.7, 0.8)] {
                let dim = n0 as usize + 1;
                let couple = dyadic_weighted(dim);
                let mut entries = vec![0.0; dim];
                entries[n0 as usize] = (-(n0 as f64)).exp2();
                let x = Element::Vector(vecf(&entries));
                let p = InterpParams::new(theta, q).unwrap();
                let r = discrete_interp_norm(&x, &couple, p, 40).unwrap();
                let bound = strict_bound(theta, q, n0).unwrap();
                assert!(
                    r.value <= bound + 1e-12,
                    "n0={n0} theta={theta} q={q}: {} vs {bound}",
                    r.value
                );
            }
        }
    }

    #[test]
    fn approx_norm_examples() {
        assert_eq!(approx_space_norm(&[0.0; 5], 1.0, 1.0).unwrap(), 0.0);
        // E_k = 2^{-2k}, alpha = 1 < 2, sup norm: max at k = 0
        let e: Vec<f64> = (0..10).map(|k| (-2.0 * k as f64).exp2()).collect();
        assert!((approx_space_norm(&e, 1.0, f64::INFINITY).unwrap() - 1.0).abs() < 1e-15);
        // E_k = 2^{-alpha k}, q = 1, k = 0..=10: every term is 1
        let e: Vec<f64> = (0..=10).map(|k| (-0.7 * k as f64).exp2()).collect();
        assert!((approx_space_norm(&e, 0.7, 1.0).unwrap() - 11.0).abs() < 1e-12);
        // increasing sequences are rejected
        assert!(approx_space_norm(&[1.0, 2.0], 1.0, 1.0).is_err());
        assert!(approx_space_norm(&[1.0, -0.5], 1.0, 1.0).is_err());
    }

    #[test]
    fn jackson_bernstein_weighted_model() {
        // A_n = span{e_0, ..., e_{n-1}}; best l1 approximation error is the
        // tail sum of magnitudes.
        let dim = 6;
        let couple = dyadic_weighted(dim);
        let e_fn = |x: &Element, n: usize| -> Result<f64> {
            Ok(x.values().iter().skip(n).map(f64::abs).sum())
        };
        let y_samples: Vec<Element> = vec![
            Element::Vector(vecf(&[0.5, 0.25, 0.125, 0.0, 0.0, 0.0])),
            Element::Vector(vecf(&(0..dim).map(|k| (-(k as f64)).exp2()).collect::<Vec<_>>())),
        ];
        let a_samples: Vec<LevelSamples> = (1..=3)
            .map(|n| LevelSamples {
                n,
                elements: (0..n)
                    .map(|k| Element::Vector(Vector::basis(dim, k).unwrap()))
                    .collect(),
            })
            .collect();
        let report =
            jackson_bernstein_check(&couple, &y_samples, &a_samples, e_fn, 1.0).unwrap();
        assert!(report.c_jackson.is_finite() && report.c_jackson > 0.0);
        // a = e_0 in A_1: |a|_Y = |a|_X = 1 forces C_bernstein >= 1
        assert!(report.c_bernstein >= 1.0);
        assert!(report.violations.is_empty());

        // zero error samples give C_jackson = 0
        let zero_e = |_: &Element, _: usize| -> Result<f64> { Ok(0.0) };
        let report =
            jackson_bernstein_check(&couple, &y_samples, &a_samples, zero_e, 1.0).unwrap();
        assert_eq!(report.c_jackson, 0.0);

        assert!(jackson_bernstein_check(&couple, &[], &a_samples, e_fn, 1.0).is_err());
    }

    #[test]
    fn reiteration_arithmetic() {
        assert!((reiteration_theta(0.5, 0.6).unwrap() - 0.3).abs() < 1e-15);
        assert!(reiteration_theta(1.0, 0.5).is_err());

        assert!((reiteration_exponent(0.5, 1.0, 2.0).unwrap() - 4.0 / 3.0).abs() < 1e-15);
        assert_eq!(reiteration_exponent(0.0, 1.5, 7.0).unwrap(), 1.5);
        assert_eq!(reiteration_exponent(1.0, 1.5, 7.0).unwrap(), 7.0);
        assert_eq!(
            reiteration_exponent(0.5, f64::INFINITY, f64::INFINITY).unwrap(),
            f64::INFINITY
        );
        assert!((reiteration_exponent(0.5, 2.0, f64::INFINITY).unwrap() - 4.0).abs() < 1e-15);

        // r is monotone in eta between p and q
        let (p, q) = (0.8, 3.0);
        let mut prev = p;
        for i in 1..=10 {
            let eta = i as f64 / 10.0;
            let r = reiteration_exponent(eta, p, q).unwrap();
            assert!(r >= prev - 1e-15 && r >= p.min(q) && r <= p.max(q));
            prev = r;
        }
    }

    #[test]
    fn equivalence_ratio_reports() {
        let l1 = SpaceSpec::lq(1.0).unwrap();
        let samples: Vec<Element> = vec![
            Element::Vector(vecf(&[1.0, 2.0])),
            Element::Vector(vecf(&[0.5, -0.5])),
        ];
        let id = |e: &Element| l1.norm(e);
        let double = |e: &Element| Ok(2.0 * l1.norm(e)?);
        let r = equivalence_ratio(id, id, &samples).unwrap();
        assert_eq!((r.rho_min, r.rho_max), (1.0, 1.0));
        let r = equivalence_ratio(double, id, &samples).unwrap();
        assert_eq!((r.rho_min, r.rho_max), (2.0, 2.0));
        assert!((r.spread() - 1.0).abs() < 1e-15);

        // zero denominators are reported per-sample, not fatal
        let zero_on_first = |e: &Element| -> Result<f64> {
            let n = l1.norm(e)?;
            Ok(if e.values()[0] == 1.0 { 0.0 } else { n })
        };
        let r = equivalence_ratio(id, zero_on_first, &samples).unwrap();
        assert_eq!(r.zero_denominator, vec![0]);
    }

    #[test]
    fn interp_weights_reproduce_interp_norm() {
        let dim = 6;
        let w = vecf(&(0..dim).map(|k| (k as f64).exp2()).collect::<Vec<_>>());
        let couple = CoupleSpec::weighted(w.clone()).unwrap();
        let theta = 0.4;
        let k_max = 24u32;
        let ww = interp_weights(theta, k_max, &w).unwrap();
        // non-decreasing, hence usable as a Y-space weight vector again
        assert!(ww.as_slice().windows(2).all(|p| p[0] <= p[1]));

        let x = Element::Vector(vecf(&[0.2, -0.7, 0.1, 0.0, 0.3, -0.05]));
        let p = InterpParams::new(theta, 1.0).unwrap();
        let direct = discrete_interp_norm(&x, &couple, p, k_max).unwrap().value;
        let via_weights: f64 = x
            .values()
            .iter()
            .zip(ww.iter())
            .map(|(xj, wj)| xj.abs() * wj)
            .sum();
        assert!((direct - via_weights).abs() < 1e-10 * (1.0 + direct));
    }
}
