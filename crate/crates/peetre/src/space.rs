//! Sequence-space and grid-space norms, together with the exponent data that
//! controls their (quasi-)triangle inequalities.

use crate::element::Element;
use crate::error::{Error, Result};
use crate::Vector;

/// A concrete norm (or seminorm) on finite vectors or grid functions.
///
/// * `Lq { q }` - the `l_q` (quasi-)norm, any finite `q > 0`.
/// * `WeightedL1 { weights }` - `sum_k w_k |v_k|` with fixed positive weights.
/// * `Sup` - `max_k |v_k|`.
/// * `LipGrid` - the grid Lipschitz seminorm: the largest absolute difference
///   quotient over adjacent nodes. Zero on constants; needs grid geometry.
#[derive(Debug, Clone, PartialEq)]
pub enum SpaceSpec {
    Lq { q: f64 },
    WeightedL1 { weights: Vector },
    Sup,
    LipGrid,
}

impl SpaceSpec {
    pub fn lq(q: f64) -> Result<Self> {
        if !q.is_finite() || q <= 0.0 {
            return Err(Error::param(
                "q",
                format!("need finite q > 0 (use Sup for the max norm), got {q}"),
            ));
        }
        Ok(SpaceSpec::Lq { q })
    }

    pub fn weighted_l1(weights: Vector) -> Result<Self> {
        if weights.iter().any(|w| w <= 0.0) {
            return Err(Error::param("weights", "all weights must be positive"));
        }
        Ok(SpaceSpec::WeightedL1 { weights })
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            SpaceSpec::Lq { .. } => "lq",
            SpaceSpec::WeightedL1 { .. } => "weighted_l1",
            SpaceSpec::Sup => "sup",
            SpaceSpec::LipGrid => "lip_grid",
        }
    }

    /// Exponent `p in (0, 1]` governing the p-triangle inequality
    /// `|u + v|^p <= |u|^p + |v|^p`: `min(q, 1)` for `l_q`, otherwise 1.
    pub fn p_exponent(&self) -> f64 {
        match self {
            SpaceSpec::Lq { q } => q.min(1.0),
            _ => 1.0,
        }
    }

    /// Smallest constant `C = max(1, 2^{1/p - 1})` with
    /// `|u + v| <= C (|u| + |v|)`.
    pub fn quasi_norm_constant(&self) -> f64 {
        let p = self.p_exponent();
        (1.0f64 / p - 1.0).exp2().max(1.0)
    }

    pub fn weights(&self) -> Option<&Vector> {
        match self {
            SpaceSpec::WeightedL1 { weights } => Some(weights),
            _ => None,
        }
    }

    /// Evaluate the norm. `LipGrid` requires a grid element; the other kinds
    /// act on the sample values of either element shape.
    pub fn norm(&self, e: &Element) -> Result<f64> {
        match self {
            SpaceSpec::Lq { q } => Ok(lq_norm(e.values(), *q)),
            SpaceSpec::WeightedL1 { weights } => {
                let v = e.values();
                if v.dim() != weights.dim() {
                    return Err(Error::DimensionMismatch {
                        expected: weights.dim(),
                        got: v.dim(),
                    });
                }
                Ok(v.iter().zip(weights.iter()).map(|(x, w)| w * x.abs()).sum())
            }
            SpaceSpec::Sup => Ok(sup_norm(e.values())),
            SpaceSpec::LipGrid => match e {
                Element::Grid(g) => {
                    let h = g.spacing();
                    let v = g.values().as_slice();
                    Ok(v.windows(2)
                        .map(|w| (w[1] - w[0]).abs() / h)
                        .fold(0.0, f64::max))
                }
                Element::Vector(_) => Err(Error::SolverMismatch(
                    "lip_grid norm needs grid geometry; got a plain vector".into(),
                )),
            },
        }
    }

    /// Norm of a plain vector; convenience over [`SpaceSpec::norm`].
    pub fn norm_vec(&self, v: &Vector) -> Result<f64> {
        self.norm(&Element::Vector(v.clone()))
    }
}

pub(crate) fn lq_norm(v: &Vector, q: f64) -> f64 {
    v.iter().map(|x| x.abs().powf(q)).sum::<f64>().powf(1.0 / q)
}

pub(crate) fn sup_norm(v: &Vector) -> f64 {
    v.iter().map(f64::abs).fold(0.0, f64::max)
}
