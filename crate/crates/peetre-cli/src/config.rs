//! Strict parsing of couple configs and element specs.

use peetre::{CoupleSpec, Element, Error, GridFunction, Result, Vector};
use serde::Deserialize;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WeightedCfg {
    #[allow(dead_code)]
    kind: String,
    weights: Vec<f64>,
    p: Option<f64>,
    embedding_constant: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LqLpCfg {
    #[allow(dead_code)]
    kind: String,
    q: f64,
    p: f64,
    tol: Option<f64>,
    embedding_constant: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BareCfg {
    #[allow(dead_code)]
    kind: String,
    embedding_constant: Option<f64>,
}

fn with_constant(couple: CoupleSpec, m: Option<f64>) -> Result<CoupleSpec> {
    match m {
        Some(m) => couple.with_embedding_constant(m),
        None => Ok(couple),
    }
}

/// Parses a couple config with a strict schema: the `kind` key selects the
/// couple and every other key must belong to that kind.
pub fn parse_couple_config(text: &str) -> Result<CoupleSpec> {
    let value: serde_json::Value = serde_json::from_str(text)
        .map_err(|e| Error::param("couple config", format!("malformed JSON: {e}")))?;
    let kind = value
        .get("kind")
        .and_then(|k| k.as_str())
        .ok_or_else(|| Error::param("couple config", "missing string key \"kind\""))?
        .to_owned();
    let schema = |e: serde_json::Error| Error::param("couple config", format!("{kind}: {e}"));
    match kind.as_str() {
        "weighted_l1" => {
            let cfg: WeightedCfg = serde_json::from_value(value).map_err(schema)?;
            if let Some(p) = cfg.p {
                if p != 1.0 {
                    return Err(Error::param(
                        "couple config",
                        format!("weighted_l1 is an l1-type couple; p must be 1, got {p}"),
                    ));
                }
            }
            with_constant(
                CoupleSpec::weighted(Vector::new(cfg.weights)?)?,
                cfg.embedding_constant,
            )
        }
        "lq_lp" => {
            let cfg: LqLpCfg = serde_json::from_value(value).map_err(schema)?;
            with_constant(
                CoupleSpec::numeric(cfg.q, cfg.p, cfg.tol.unwrap_or(1e-9))?,
                cfg.embedding_constant,
            )
        }
        "clip" => {
            let cfg: BareCfg = serde_json::from_value(value).map_err(schema)?;
            with_constant(CoupleSpec::clip()?, cfg.embedding_constant)
        }
        "lip_grid" => {
            let cfg: BareCfg = serde_json::from_value(value).map_err(schema)?;
            with_constant(CoupleSpec::lip_grid()?, cfg.embedding_constant)
        }
        other => Err(Error::param(
            "couple config",
            format!("unknown kind {other:?}; expected weighted_l1, lq_lp, clip, or lip_grid"),
        )),
    }
}

/// Element specs: `basis:K` (dimension taken from the couple's weights),
/// `ones:N`, or a JSON array. Grid couples wrap the values on `[a, b]`.
pub fn parse_element(spec: &str, couple: &CoupleSpec, a: f64, b: f64) -> Result<Element> {
    let vector = if let Some(idx) = spec.strip_prefix("basis:") {
        let idx: usize = idx
            .parse()
            .map_err(|_| Error::param("x", format!("bad basis index {idx:?}")))?;
        let dim = couple
            .y_space()
            .weights()
            .map(Vector::dim)
            .ok_or_else(|| {
                Error::param(
                    "x",
                    "basis:K needs a couple with intrinsic dimension; pass an explicit array",
                )
            })?;
        Vector::basis(dim, idx)?
    } else if let Some(n) = spec.strip_prefix("ones:") {
        let n: usize = n
            .parse()
            .map_err(|_| Error::param("x", format!("bad dimension {n:?}")))?;
        Vector::ones(n)?
    } else if spec.starts_with('[') {
        let entries: Vec<f64> = serde_json::from_str(spec)
            .map_err(|e| Error::param("x", format!("bad array: {e}")))?;
        Vector::new(entries)?
    } else {
        return Err(Error::param(
            "x",
            format!("unrecognized element spec {spec:?}; use basis:K, ones:N, or a JSON array"),
        ));
    };
    if matches!(couple.y_space(), peetre::space::SpaceSpec::LipGrid) {
        return Ok(Element::Grid(GridFunction::new(a, b, vector)?));
    }
    Ok(Element::Vector(vector))
}

/// Envelope specs for the decay profile: `dyadic:N` or a JSON array.
pub fn parse_sigma(spec: &str) -> Result<Vector> {
    if let Some(n) = spec.strip_prefix("dyadic:") {
        let n: usize = n
            .parse()
            .map_err(|_| Error::param("sigma", format!("bad dimension {n:?}")))?;
        Vector::new((0..n).map(|k| (-(k as f64)).exp2()).collect())
    } else if spec.starts_with('[') {
        let entries: Vec<f64> = serde_json::from_str(spec)
            .map_err(|e| Error::param("sigma", format!("bad array: {e}")))?;
        Vector::new(entries)
    } else {
        Err(Error::param(
            "sigma",
            format!("unrecognized envelope spec {spec:?}; use dyadic:N or a JSON array"),
        ))
    }
}

/// Log-spaced grid from `tmin` to `tmax` inclusive.
pub fn log_grid(tmin: f64, tmax: f64, points: usize) -> Result<Vec<f64>> {
    if !(tmin > 0.0 && tmin.is_finite() && tmax.is_finite() && tmin < tmax) {
        return Err(Error::param(
            "t range",
            format!("need 0 < tmin < tmax, got [{tmin}, {tmax}]"),
        ));
    }
    if points < 2 {
        return Err(Error::param("points", "need at least 2 grid points"));
    }
    let ratio = tmax / tmin;
    Ok((0..points)
        .map(|i| tmin * ratio.powf(i as f64 / (points as f64 - 1.0)))
        .collect())
}
