use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lamé constants of the half-plane with density normalized to 1.
///
/// The pressure and shear wave speeds are `cp = sqrt(lambda + 2 mu)` and
/// `cs = sqrt(mu)`; `cp > cs` always holds for admissible constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Material {
    pub lambda: f64,
    pub mu: f64,
}

impl Material {
    pub fn new(lambda: f64, mu: f64) -> Result<Self> {
        if !(mu > 0.0) || !mu.is_finite() {
            return Err(Error::InvalidParameter(format!("mu must be positive, got {mu}")));
        }
        if !(lambda + 2.0 * mu > 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "lambda + 2 mu must be positive, got lambda = {lambda}"
            )));
        }
        if !(lambda + mu > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "cp > cs requires lambda + mu > 0, got lambda = {lambda}, mu = {mu}"
            )));
        }
        Ok(Self { lambda, mu })
    }

    /// Pressure wave speed `sqrt(lambda + 2 mu)`.
    pub fn cp(&self) -> f64 {
        (self.lambda + 2.0 * self.mu).sqrt()
    }

    /// Shear wave speed `sqrt(mu)`.
    pub fn cs(&self) -> f64 {
        self.mu.sqrt()
    }

    /// `lambda + 2 mu`, the P-modulus.
    pub fn pmod(&self) -> f64 {
        self.lambda + 2.0 * self.mu
    }
}
