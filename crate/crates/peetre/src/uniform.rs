//! Uniform decay over a compactly embedded model space.
//!
//! The model space Z sits inside the weighted couple through an envelope
//! `sigma`: `|z|_Z = sup_k |z_k| / sigma_k`. Its decay profile
//! `phi(t) = K(S(Z), t)` admits an exact formula because K is coordinate-wise
//! monotone, and every element of the Z-ball obeys `K(z, t) <= |z|_Z phi(t)`.

use crate::couple::{CoupleSpec, SolverKind};
use crate::element::Vector;
use crate::error::{Error, Result};
use crate::ksolve::{k_weighted, KCurve};
use crate::tol;

/// Envelope model of a compactly embedded space: `|z|_Z = sup_k |z_k| / sigma_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct CompactModelSpec {
    sigma: Vector,
}

impl CompactModelSpec {
    /// Requires every `sigma_k > 0` and `sigma` non-increasing; the shrinking
    /// envelope is what makes the Z-ball compact inside the l1 truncation.
    pub fn new(sigma: Vector) -> Result<Self> {
        if sigma.iter().any(|s| s <= 0.0) {
            return Err(Error::param("sigma", "envelope entries must be positive"));
        }
        if sigma.as_slice().windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::param("sigma", "envelope must be non-increasing"));
        }
        Ok(CompactModelSpec { sigma })
    }

    pub fn sigma(&self) -> &Vector {
        &self.sigma
    }

    pub fn dim(&self) -> usize {
        self.sigma.dim()
    }

    /// `|z|_Z = sup_k |z_k| / sigma_k`.
    pub fn z_norm(&self, z: &Vector) -> Result<f64> {
        if z.dim() != self.sigma.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.sigma.dim(),
                got: z.dim(),
            });
        }
        Ok(z.iter()
            .zip(self.sigma.iter())
            .map(|(zk, sk)| zk.abs() / sk)
            .fold(0.0, f64::max))
    }
}

fn weighted_weights(couple: &CoupleSpec, dim: usize) -> Result<&Vector> {
    if !matches!(couple.solver(), SolverKind::WeightedClosedForm) {
        return Err(Error::SolverMismatch(
            "the decay profile needs the weighted closed-form couple".into(),
        ));
    }
    let weights = couple
        .y_space()
        .weights()
        .ok_or_else(|| Error::SolverMismatch("weighted couple carries no weights".into()))?;
    if weights.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: weights.dim(),
        });
    }
    Ok(weights)
}

/// Decay profile of the whole Z-sphere:
/// `phi(t) = sup_{|z|_Z = 1} K(z, t) = sum_k sigma_k min(1, t w_k)`.
///
/// The supremum is attained at the envelope `z = sigma` because the weighted
/// K formula is non-decreasing in every `|z_k|`, so the profile is exact and
/// the curve carries zero error bounds.
pub fn phi_profile(
    z_spec: &CompactModelSpec,
    couple: &CoupleSpec,
    t_grid: &[f64],
) -> Result<KCurve> {
    let weights = weighted_weights(couple, z_spec.dim())?;
    let mut k_values = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        k_values.push(k_weighted(z_spec.sigma(), t, weights)?.value);
    }
    let total: f64 = z_spec.sigma().iter().sum();
    KCurve::new(t_grid.to_vec(), k_values, vec![0.0; t_grid.len()], total)
}

/// Result of checking `K(z, t) <= |z|_Z phi(t)` over samples and grid.
#[derive(Debug, Clone, PartialEq)]
pub struct UniformBoundReport {
    pub samples_checked: usize,
    pub grid_points: usize,
    /// Largest `K(z, t) / (|z|_Z phi(t))` seen; 1 exactly when the envelope
    /// itself is among the samples.
    pub max_ratio: f64,
}

/// Verifies the uniform bound `K(z, t) <= |z|_Z phi(t)` for every sample at
/// every grid point. Samples must be nonzero in the Z-norm; a violation
/// beyond floating-point slack reports the offending sample and t.
pub fn uniform_bound_check(
    z_samples: &[Vector],
    z_spec: &CompactModelSpec,
    couple: &CoupleSpec,
    t_grid: &[f64],
) -> Result<UniformBoundReport> {
    if z_samples.is_empty() {
        return Err(Error::Empty("z samples"));
    }
    let weights = weighted_weights(couple, z_spec.dim())?;
    let phi = phi_profile(z_spec, couple, t_grid)?;
    let mut max_ratio = 0.0f64;
    for (i, z) in z_samples.iter().enumerate() {
        let zn = z_spec.z_norm(z)?;
        if zn == 0.0 {
            return Err(Error::param(
                "z_samples",
                format!("sample {i} has zero Z-norm"),
            ));
        }
        for (j, &t) in t_grid.iter().enumerate() {
            let k = k_weighted(z, t, weights)?.value;
            let bound = zn * phi.k_values()[j];
            if k > bound + tol::FP_SLACK * (1.0 + bound) {
                return Err(Error::CertificateViolation(format!(
                    "uniform bound fails for sample {i} at t = {t}: K = {k} > {bound}"
                )));
            }
            max_ratio = max_ratio.max(k / bound);
        }
    }
    Ok(UniformBoundReport {
        samples_checked: z_samples.len(),
        grid_points: t_grid.len(),
        max_ratio,
    })
}
