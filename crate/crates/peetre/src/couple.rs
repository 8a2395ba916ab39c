//! Couples `(X, Y)` of compatible spaces together with the solver that can
//! evaluate their K-functional.

use crate::element::Element;
use crate::error::{Error, Result};
use crate::space::SpaceSpec;
use crate::Vector;

/// How `K(x, t)` is evaluated for a couple.
#[derive(Debug, Clone, PartialEq)]
pub enum SolverKind {
    /// Closed form for `X = l1`, `Y = weighted l1`.
    WeightedClosedForm,
    /// Breakpoint enumeration for `X = l1`, `Y = sup` (clipping).
    ClipL1Sup,
    /// Breakpoint enumeration for `X = sup on a grid`, `Y = grid Lipschitz`.
    LipGrid,
    /// Certified numeric solver for `X = l_q`, `Y = l_p`, both exponents >= 1.
    NumericLqLp { tol: f64 },
    /// Exhaustive grid search; dimension <= 4. Serves as the oracle.
    BruteForce { grid_step: f64 },
}

impl SolverKind {
    pub fn name(&self) -> &'static str {
        match self {
            SolverKind::WeightedClosedForm => "weighted_closed_form",
            SolverKind::ClipL1Sup => "clip_l1_sup",
            SolverKind::LipGrid => "lip_grid",
            SolverKind::NumericLqLp { .. } => "numeric_lq_lp",
            SolverKind::BruteForce { .. } => "brute_force",
        }
    }
}

/// Validated couple specification: the two space norms, the solver that is
/// consistent with them, and an optional declared embedding constant `M`
/// with `|v|_X <= M |v|_Y`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupleSpec {
    x_space: SpaceSpec,
    y_space: SpaceSpec,
    solver: SolverKind,
    embedding_constant: Option<f64>,
}

/// Result of probing the embedding `Y -> X` on sample elements.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingReport {
    /// Largest `|v|_X / |v|_Y` over probes with `|v|_Y > 0`.
    pub max_ratio: Option<f64>,
    /// Probes with `|v|_Y = 0`; these witness nothing (seminorm kernel).
    pub zero_y_norm_probes: Vec<usize>,
    pub declared: Option<f64>,
    /// True when a probe ratio exceeds the declared constant.
    pub declared_exceeded: bool,
}

impl CoupleSpec {
    pub fn new(
        x_space: SpaceSpec,
        y_space: SpaceSpec,
        solver: SolverKind,
        embedding_constant: Option<f64>,
    ) -> Result<Self> {
        match &solver {
            SolverKind::WeightedClosedForm => {
                require(
                    matches!(x_space, SpaceSpec::Lq { q } if q == 1.0),
                    &solver,
                    "X must be l1",
                )?;
                let weights = y_space.weights().ok_or_else(|| {
                    Error::SolverMismatch("weighted_closed_form: Y must be weighted_l1".into())
                })?;
                let non_decreasing = weights
                    .as_slice()
                    .windows(2)
                    .all(|w| w[0] <= w[1]);
                if !non_decreasing {
                    return Err(Error::param(
                        "weights",
                        "must be non-decreasing for the Y space of a weighted couple",
                    ));
                }
            }
            SolverKind::ClipL1Sup => {
                require(
                    matches!(x_space, SpaceSpec::Lq { q } if q == 1.0),
                    &solver,
                    "X must be l1",
                )?;
                require(matches!(y_space, SpaceSpec::Sup), &solver, "Y must be sup")?;
            }
            SolverKind::LipGrid => {
                require(matches!(x_space, SpaceSpec::Sup), &solver, "X must be sup")?;
                require(
                    matches!(y_space, SpaceSpec::LipGrid),
                    &solver,
                    "Y must be lip_grid",
                )?;
            }
            SolverKind::NumericLqLp { tol } => {
                if !(*tol > 0.0 && tol.is_finite()) {
                    return Err(Error::param("tol", "must be positive and finite"));
                }
                let (q, p) = match (&x_space, &y_space) {
                    (SpaceSpec::Lq { q }, SpaceSpec::Lq { q: p }) => (*q, *p),
                    _ => {
                        return Err(Error::SolverMismatch(
                            "numeric_lq_lp: both spaces must be lq kinds".into(),
                        ))
                    }
                };
                if q < 1.0 || p < 1.0 {
                    return Err(Error::NonConvexExponents { q, p });
                }
            }
            SolverKind::BruteForce { grid_step } => {
                if !(*grid_step > 0.0 && grid_step.is_finite()) {
                    return Err(Error::param("grid_step", "must be positive and finite"));
                }
            }
        }

        if let Some(m) = embedding_constant {
            if !(m > 0.0 && m.is_finite()) {
                return Err(Error::param("embedding_constant", "must be positive and finite"));
            }
            // Canonical basis probes where the weight vector fixes the
            // dimension; grid seminorms are skipped (their kernel defeats
            // basis probing).
            if let Some(weights) = y_space.weights() {
                let needed = weights.iter().map(|w| 1.0 / w).fold(0.0, f64::max);
                if needed > m * (1.0 + 1e-12) {
                    return Err(Error::param(
                        "embedding_constant",
                        format!("basis probe needs M >= {needed}, declared {m}"),
                    ));
                }
            } else if matches!(
                (&x_space, &y_space),
                (SpaceSpec::Lq { .. } | SpaceSpec::Sup, SpaceSpec::Lq { .. } | SpaceSpec::Sup)
            ) {
                // Basis vectors have unit norm in every lq and sup space.
                if m < 1.0 - 1e-12 {
                    return Err(Error::param(
                        "embedding_constant",
                        format!("basis probe needs M >= 1, declared {m}"),
                    ));
                }
            }
        }

        Ok(CoupleSpec {
            x_space,
            y_space,
            solver,
            embedding_constant,
        })
    }

    /// `(l1, weighted l1)` couple with its closed-form solver.
    pub fn weighted(weights: Vector) -> Result<Self> {
        CoupleSpec::new(
            SpaceSpec::lq(1.0)?,
            SpaceSpec::weighted_l1(weights)?,
            SolverKind::WeightedClosedForm,
            None,
        )
    }

    /// `(l1, sup)` couple solved by clip-level enumeration.
    pub fn clip() -> Result<Self> {
        CoupleSpec::new(SpaceSpec::lq(1.0)?, SpaceSpec::Sup, SolverKind::ClipL1Sup, None)
    }

    /// `(sup on grid, grid Lipschitz)` couple.
    pub fn lip_grid() -> Result<Self> {
        CoupleSpec::new(SpaceSpec::Sup, SpaceSpec::LipGrid, SolverKind::LipGrid, None)
    }

    /// `(l_q, l_p)` couple with the certified numeric solver.
    pub fn numeric(q: f64, p: f64, tol: f64) -> Result<Self> {
        CoupleSpec::new(
            SpaceSpec::lq(q)?,
            SpaceSpec::lq(p)?,
            SolverKind::NumericLqLp { tol },
            None,
        )
    }

    /// Any space pair, evaluated by exhaustive grid search.
    pub fn brute_force(x_space: SpaceSpec, y_space: SpaceSpec, grid_step: f64) -> Result<Self> {
        CoupleSpec::new(x_space, y_space, SolverKind::BruteForce { grid_step }, None)
    }

    pub fn with_embedding_constant(mut self, m: f64) -> Result<Self> {
        self = CoupleSpec::new(self.x_space, self.y_space, self.solver, Some(m))?;
        Ok(self)
    }

    pub fn x_space(&self) -> &SpaceSpec {
        &self.x_space
    }

    pub fn y_space(&self) -> &SpaceSpec {
        &self.y_space
    }

    pub fn solver(&self) -> &SolverKind {
        &self.solver
    }

    pub fn embedding_constant(&self) -> Option<f64> {
        self.embedding_constant
    }

    /// Couple exponent `min(p_X, p_Y)`; the decomposition engine's geometric
    /// bounds are stated in terms of this value.
    pub fn p_exponent(&self) -> f64 {
        self.x_space.p_exponent().min(self.y_space.p_exponent())
    }

    /// Probe the embedding `Y -> X` on the given elements. Probes in the
    /// kernel of a Y seminorm are reported, not fatal.
    pub fn validate_couple(&self, probes: &[Element]) -> Result<EmbeddingReport> {
        if probes.is_empty() {
            return Err(Error::Empty("probe list"));
        }
        let mut max_ratio: Option<f64> = None;
        let mut zero_y = Vec::new();
        for (i, probe) in probes.iter().enumerate() {
            let nx = self.x_space.norm(probe)?;
            let ny = self.y_space.norm(probe)?;
            if ny == 0.0 {
                zero_y.push(i);
                continue;
            }
            let ratio = nx / ny;
            max_ratio = Some(max_ratio.map_or(ratio, |m: f64| m.max(ratio)));
        }
        let declared_exceeded = match (self.embedding_constant, max_ratio) {
            (Some(m), Some(r)) => r > m * (1.0 + 1e-12),
            _ => false,
        };
        Ok(EmbeddingReport {
            max_ratio,
            zero_y_norm_probes: zero_y,
            declared: self.embedding_constant,
            declared_exceeded,
        })
    }
}

fn require(ok: bool, solver: &SolverKind, reason: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::SolverMismatch(format!("{}: {reason}", solver.name())))
    }
}
