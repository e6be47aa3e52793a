use crate::error::{Error, Result};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual in `ln value`.
    pub residual: f64,
    pub samples: usize,
}

/// Least-squares fit of `ln value = slope ln m + intercept`. Needs at least
/// three samples whose masses span a factor of four.
pub fn exponent_fit(samples: &[(f64, f64)]) -> Result<ExponentFit> {
    if samples.len() < 3 {
        return Err(Error::precondition(format!("need at least 3 samples, got {}", samples.len())));
    }
    if let Some(&(m, v)) = samples.iter().find(|(m, v)| !(*m > 0.0 && *v > 0.0 && m.is_finite() && v.is_finite())) {
        return Err(Error::domain(format!("masses and values must be positive, got ({m}, {v})")));
    }
    let lo = samples.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    let hi = samples.iter().map(|s| s.0).fold(0.0, f64::max);
    if hi / lo < 4.0 * (1.0 - 1e-12) {
        return Err(Error::precondition(format!("masses span only a factor {}", hi / lo)));
    }
    let n = samples.len() as f64;
    let xs: Vec<f64> = samples.iter().map(|s| s.0.ln()).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - slope * x - intercept).powi(2)).sum();
    Ok(ExponentFit { slope, intercept, residual: (ss / n).sqrt(), samples: samples.len() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let s: Vec<(f64, f64)> = [0.05, 0.1, 0.2, 0.5].iter().map(|&m: &f64| (m, 3.0 * m.powf(1.5))).collect();
        let f = exponent_fit(&s).unwrap();
        assert!((f.slope - 1.5).abs() < 1e-12);
        assert!((f.intercept - 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(exponent_fit(&[(0.1, 1.0), (0.2, 1.0)]).is_err());
        assert!(exponent_fit(&[(0.1, 1.0), (0.2, -1.0), (0.4, 1.0)]).is_err());
        assert!(exponent_fit(&[(0.1, 1.0), (0.2, 1.0), (0.3, 1.0)]).is_err());
    }
}
