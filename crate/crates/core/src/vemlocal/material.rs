use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Lame {
    Finite(f64),
    /// ν = 1/2: the trace part of the compliance drops out.
    IncompressibleLimit,
}

/// Isotropic linear elastic material.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Material {
    pub young: f64,
    pub poisson: f64,
    pub lambda: Lame,
    pub mu: f64,
}

impl Material {
    pub fn new(young: f64, poisson: f64) -> Result<Self> {
        if !(young.is_finite() && young > 0.0) {
            return Err(Error::InvalidMaterial(format!("Young's modulus must be positive, got {young}")));
        }
        if !(0.0..=0.5).contains(&poisson) {
            return Err(Error::InvalidMaterial(format!("Poisson ratio must lie in [0, 0.5], got {poisson}")));
        }
        let mu = young / (2.0 * (1.0 + poisson));
        let lambda = if poisson == 0.5 {
            Lame::IncompressibleLimit
        } else {
            Lame::Finite(young * poisson / ((1.0 + poisson) * (1.0 - 2.0 * poisson)))
        };
        Ok(Self { young, poisson, lambda, mu })
    }

    pub fn is_incompressible_limit(&self) -> bool {
        matches!(self.lambda, Lame::IncompressibleLimit)
    }

    pub fn lambda_value(&self) -> f64 {
        match self.lambda {
            Lame::Finite(l) => l,
            Lame::IncompressibleLimit => f64::INFINITY,
        }
    }

    /// Coefficient `1/(4λ + 6μ)` of `tr σ tr τ` in the compliance form.
    pub fn trace_coefficient(&self) -> f64 {
        match self.lambda {
            Lame::Finite(l) => 1.0 / (4.0 * l + 6.0 * self.mu),
            Lame::IncompressibleLimit => 0.0,
        }
    }
}
