//! Polytropic equation of state `P = K rho^gamma` and the internal-energy
//! density `A(s) = K/(gamma-1) s^gamma` with its derivative and inverse.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolytropicEos {
    k: f64,
    gamma: f64,
}

impl PolytropicEos {
    /// Rejects `K <= 0` and `gamma <= 4/3`.
    pub fn new(k: f64, gamma: f64) -> Result<Self> {
        if !(k.is_finite() && k > 0.0) {
            return Err(Error::domain(format!("K must be positive, got {k}")));
        }
        if !(gamma.is_finite() && gamma > 4.0 / 3.0) {
            return Err(Error::domain(format!("gamma must exceed 4/3, got {gamma}")));
        }
        Ok(Self { k, gamma })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Lane–Emden index `n = 1/(gamma-1)`.
    pub fn index(&self) -> f64 {
        1.0 / (self.gamma - 1.0)
    }

    pub fn supports_star_planet(&self) -> bool {
        self.gamma > 1.5
    }

    pub fn shrinking_planet(&self) -> bool {
        self.gamma > 2.0
    }

    pub fn pressure(&self, s: f64) -> Result<f64> {
        check_density(s)?;
        Ok(self.pressure_unchecked(s))
    }

    #[inline]
    pub fn pressure_unchecked(&self, s: f64) -> f64 {
        self.k * s.powf(self.gamma)
    }

    pub fn a_of(&self, s: f64) -> Result<f64> {
        check_density(s)?;
        Ok(self.a_unchecked(s))
    }

    #[inline]
    pub fn a_unchecked(&self, s: f64) -> f64 {
        if s == 0.0 {
            return 0.0;
        }
        self.k / (self.gamma - 1.0) * s.powf(self.gamma)
    }

    pub fn a_prime(&self, s: f64) -> Result<f64> {
        check_density(s)?;
        Ok(self.a_prime_unchecked(s))
    }

    #[inline]
    pub fn a_prime_unchecked(&self, s: f64) -> f64 {
        if s == 0.0 {
            return 0.0;
        }
        self.k * self.gamma / (self.gamma - 1.0) * s.powf(self.gamma - 1.0)
    }

    /// Inverse of `a_prime`. Values in `(-1e-14, 0)` are rounding noise of a
    /// positive part and map to zero.
    pub fn a_prime_inv(&self, y: f64) -> Result<f64> {
        if y.is_nan() || y <= -1e-14 {
            return Err(Error::domain(format!("a_prime_inv needs y >= 0, got {y}")));
        }
        Ok(self.a_prime_inv_unchecked(y))
    }

    /// Inverse enthalpy applied to the positive part of `y`.
    #[inline]
    pub fn a_prime_inv_unchecked(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        ((self.gamma - 1.0) * y / (self.k * self.gamma)).powf(1.0 / (self.gamma - 1.0))
    }

    /// Scaling coefficients `(A, B) = (m^{-2/(3g-4)}, m^{(g-2)/(3g-4)})`.
    pub fn scaling_coeffs(&self, m: f64) -> Result<(f64, f64)> {
        if !(m.is_finite() && m > 0.0) {
            return Err(Error::domain(format!("mass must be positive, got {m}")));
        }
        let d = 3.0 * self.gamma - 4.0;
        Ok((m.powf(-2.0 / d), m.powf((self.gamma - 2.0) / d)))
    }

    /// Exponent of `e0(m) = m^p e0(1)`.
    pub fn energy_exponent(&self) -> f64 {
        (5.0 * self.gamma - 6.0) / (3.0 * self.gamma - 4.0)
    }

    /// Exponent of `lambda_m = -(5g-6) m^p U(sigma_1)`.
    pub fn multiplier_exponent(&self) -> f64 {
        (2.0 * self.gamma - 2.0) / (3.0 * self.gamma - 4.0)
    }
}

fn check_density(s: f64) -> Result<()> {
    if s.is_nan() || s < 0.0 {
        return Err(Error::domain(format!("density must be non-negative, got {s}")));
    }
    Ok(())
}
