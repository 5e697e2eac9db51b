//! Transmission from Bob to Alice: apparatus noise and the depolarizing map.

use serde::{Deserialize, Serialize};

use crate::error::{check_probability, check_strength, Error, Result};
use crate::qmath::{partial_trace_first, tensor_product, ComplexMatrix, DensityMatrix};
use crate::qubit::{Basis, Outcome, Preparation};

/// Apparatus noise as the four calibration probabilities `D1, D3, D+0, D0+`.
///
/// `d1`/`d3` are mismatch probabilities on matching bases; `d_plus0` is
/// `Pr(m=+1 | σ1, ρ0)` and `d_0plus` is `Pr(m=+1 | σ3, ρ+)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    pub d1: f64,
    pub d3: f64,
    pub d_plus0: f64,
    pub d_0plus: f64,
}

impl ChannelParams {
    pub fn new(d1: f64, d3: f64, d_plus0: f64, d_0plus: f64) -> Result<Self> {
        Ok(Self {
            d1: check_probability("d1", d1)?,
            d3: check_probability("d3", d3)?,
            d_plus0: check_probability("d_plus0", d_plus0)?,
            d_0plus: check_probability("d_0plus", d_0plus)?,
        })
    }

    /// Calibrated apparatus with mismatch probability `d`.
    pub fn symmetric(d: f64) -> Result<Self> {
        Self::new(d, d, 0.5, 0.5)
    }

    pub fn ideal() -> Self {
        Self {
            d1: 0.0,
            d3: 0.0,
            d_plus0: 0.5,
            d_0plus: 0.5,
        }
    }

    pub fn is_symmetric(&self) -> bool {
        self.d_plus0 == 0.5 && self.d_0plus == 0.5 && self.d1 == self.d3
    }

    pub fn validate(&self) -> Result<()> {
        Self::new(self.d1, self.d3, self.d_plus0, self.d_0plus).map(|_| ())
    }
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self::ideal()
    }
}

/// `ρ → (1 − 2d)ρ + d·I` on a qubit.
pub fn apply_symmetric_noise(rho: &DensityMatrix, d: f64) -> Result<DensityMatrix> {
    check_strength(d)?;
    if rho.dim() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "depolarizing a qubit, got dimension {}",
            rho.dim()
        )));
    }
    let mixed = &rho.matrix().scale(1.0 - 2.0 * d) + &ComplexMatrix::identity(2)?.scale(d);
    Ok(DensityMatrix::from_matrix_unchecked(mixed))
}

/// Depolarizes the particle factor of a particle ⊗ probe state:
/// `ρ → (1 − 2d)ρ + d·I₂ ⊗ Tr₁ρ`.
pub fn apply_symmetric_noise_to_particle(joint: &DensityMatrix, d: f64) -> Result<DensityMatrix> {
    check_strength(d)?;
    if joint.dim() != 8 {
        return Err(Error::DimensionMismatch(format!(
            "expected a particle-probe state of dimension 8, got {}",
            joint.dim()
        )));
    }
    if d == 0.0 {
        return Ok(joint.clone());
    }
    let probe = partial_trace_first(joint.matrix(), 2)?;
    let spread = tensor_product(&ComplexMatrix::identity(2)?, &probe)?.scale(d);
    let out = &joint.matrix().scale(1.0 - 2.0 * d) + &spread;
    Ok(DensityMatrix::from_matrix_unchecked(out))
}

/// Strength of two independent depolarizations applied in sequence:
/// `(1 − 2·total) = (1 − 2·first)(1 − 2·second)`.
pub fn compose_strengths(first: f64, second: f64) -> Result<f64> {
    check_strength(first)?;
    check_strength(second)?;
    Ok(0.5 * (1.0 - (1.0 - 2.0 * first) * (1.0 - 2.0 * second)))
}

/// `Pr(m | σ_l, ρ_i)` under the calibration parameters.
pub fn outcome_probability(
    params: &ChannelParams,
    basis: Basis,
    prepared: Preparation,
    m: Outcome,
) -> f64 {
    use Preparation::*;
    let plus = match (basis, prepared) {
        (Basis::Sigma1, Plus) => 1.0 - params.d1,
        (Basis::Sigma1, Minus) => params.d1,
        (Basis::Sigma1, Zero) => params.d_plus0,
        (Basis::Sigma1, One) => 1.0 - params.d_plus0,
        (Basis::Sigma3, Plus) => params.d_0plus,
        (Basis::Sigma3, Minus) => 1.0 - params.d_0plus,
        (Basis::Sigma3, Zero) => 1.0 - params.d3,
        (Basis::Sigma3, One) => params.d3,
    };
    match m {
        Outcome::Plus => plus,
        Outcome::Minus => 1.0 - plus,
    }
}

/// The single mismatch probability `D` of a calibrated apparatus.
pub fn mismatch_probability(params: &ChannelParams) -> Result<f64> {
    if params.is_symmetric() {
        Ok(params.d1)
    } else {
        Err(Error::CalibrationRequired)
    }
}
