use crate::eos::PolytropicEos;
use crate::error::{Error, Result};
use crate::field::FarField;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Upper bound on the density.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Cap {
    #[default]
    Uncapped,
    Value(f64),
}

impl Cap {
    pub fn value(self) -> Option<f64> {
        match self {
            Cap::Uncapped => None,
            Cap::Value(v) => Some(v),
        }
    }
}

impl Serialize for Cap {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Cap::Uncapped => s.serialize_str("uncapped"),
            Cap::Value(v) => s.serialize_f64(*v),
        }
    }
}

impl<'de> Deserialize<'de> for Cap {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Int(i64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Cap::Value(v)),
            Raw::Int(v) => Ok(Cap::Value(v as f64)),
            Raw::Text(t) if t == "uncapped" => Ok(Cap::Uncapped),
            Raw::Text(t) => Err(serde::de::Error::custom(format!("cap must be a number or \"uncapped\", got {t:?}"))),
        }
    }
}

/// Initial density.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Seed {
    /// Lane–Emden profiles of masses `m` and `1 - m`, moved from the ball
    /// centers to the separation of [`seed_separation`](super::seed_separation).
    #[default]
    LaneEmden,
    /// Lane–Emden profiles at the ball centers.
    Centered,
    /// Uniform balls of radius `eta/8` at the ball centers.
    Uniform,
}

/// Solver parameters. `J = 0` selects a single non-rotating body of unit
/// mass; `m` is then ignored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    #[serde(rename = "J")]
    pub j: f64,
    pub m: f64,
    pub gamma: f64,
    #[serde(rename = "K")]
    pub k: f64,
    pub cap: Cap,
    pub mixing: f64,
    pub tol_mass: f64,
    pub tol_fixedpoint: f64,
    pub tol_multiplier: f64,
    pub max_iter: usize,
    pub cells_per_radius: usize,
    pub coupling: FarField,
    pub seed: Seed,
    /// History length of the Anderson extrapolation; 0 gives plain damped
    /// iteration.
    pub anderson_depth: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            j: 0.5,
            m: 0.2,
            gamma: 2.0,
            k: 1.0,
            cap: Cap::Uncapped,
            mixing: 0.5,
            tol_mass: 1e-10,
            tol_fixedpoint: 1e-7,
            tol_multiplier: 1e-12,
            max_iter: 3000,
            cells_per_radius: 16,
            coupling: FarField::Monopole,
            seed: Seed::LaneEmden,
            anderson_depth: 6,
        }
    }
}

impl SolverConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let c: SolverConfig = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn eos(&self) -> Result<PolytropicEos> {
        PolytropicEos::new(self.k, self.gamma)
    }

    pub fn is_single_body(&self) -> bool {
        self.j == 0.0
    }

    /// Range checks. Physics that the solver does not cover is reported as
    /// `Unsupported`.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.j.is_finite() && self.j >= 0.0) {
            return bad(format!("J must be >= 0, got {}", self.j));
        }
        if !self.is_single_body() && !(self.m > 0.0 && self.m < 0.5) {
            return bad(format!("m must lie in (0, 1/2), got {}", self.m));
        }
        if !(self.k.is_finite() && self.k > 0.0) {
            return bad(format!("K must be positive, got {}", self.k));
        }
        if !(self.gamma.is_finite() && self.gamma > 4.0 / 3.0) {
            return bad(format!("gamma must exceed 4/3, got {}", self.gamma));
        }
        if !(self.mixing > 0.0 && self.mixing <= 1.0) {
            return bad(format!("mixing must lie in (0, 1], got {}", self.mixing));
        }
        for (name, v) in [
            ("tol_mass", self.tol_mass),
            ("tol_fixedpoint", self.tol_fixedpoint),
            ("tol_multiplier", self.tol_multiplier),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        if self.max_iter == 0 {
            return bad("max_iter must be positive".into());
        }
        if self.cells_per_radius < 8 {
            return bad(format!("cells_per_radius must be >= 8, got {}", self.cells_per_radius));
        }
        if let Cap::Value(c) = self.cap {
            if !(c.is_finite() && c > 0.0) {
                return bad(format!("cap must be positive, got {c}"));
            }
        }
        if !self.is_single_body() && self.gamma <= 1.5 {
            return Err(Error::Unsupported(format!(
                "star-planet solves need gamma > 3/2, got {}",
                self.gamma
            )));
        }
        Ok(())
    }
}
