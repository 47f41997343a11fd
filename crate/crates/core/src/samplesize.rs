//! Frequentist per-arm sample sizes used to set the planned `N`.

use crate::error::{Error, Result};
use crate::numerics::std_normal_quantile;

fn z_sum(alpha: f64, power: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(Error::param("alpha", format!("{alpha} outside (0, 0.5)")));
    }
    if !(power > 0.5 && power < 1.0) {
        return Err(Error::param("power", format!("{power} outside (0.5, 1)")));
    }
    Ok(std_normal_quantile(1.0 - alpha) + std_normal_quantile(power))
}

/// Per-arm size for a one-sided two-sample z-test of a standardized effect
/// `d` (Cohen's d) at level `alpha`.
pub fn two_sample_normal(d: f64, alpha: f64, power: f64) -> Result<u64> {
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::param("d", format!("{d} must be positive")));
    }
    let z = z_sum(alpha, power)?;
    Ok((2.0 * z * z / (d * d)).ceil() as u64)
}

/// Per-arm size for a one-sided comparison of two proportions with pooled
/// variance under the null.
pub fn two_proportions(p_control: f64, p_treatment: f64, alpha: f64, power: f64) -> Result<u64> {
    for (name, p) in [("p_control", p_control), ("p_treatment", p_treatment)] {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::param(name, format!("{p} outside (0, 1)")));
        }
    }
    if p_control == p_treatment {
        return Err(Error::param(
            "p_treatment",
            "equal proportions give no effect to detect",
        ));
    }
    let za = std_normal_quantile(1.0 - alpha);
    let zb = z_sum(alpha, power)? - za;
    let pbar = 0.5 * (p_control + p_treatment);
    let num = za * (2.0 * pbar * (1.0 - pbar)).sqrt()
        + zb * (p_control * (1.0 - p_control) + p_treatment * (1.0 - p_treatment)).sqrt();
    Ok((num * num / (p_control - p_treatment).powi(2)).ceil() as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standardized_effect_of_0_4() {
        assert_eq!(two_sample_normal(0.4, 0.025, 0.8).unwrap(), 99);
    }

    #[test]
    fn thirty_versus_fifty_percent() {
        assert_eq!(two_proportions(0.3, 0.5, 0.025, 0.8).unwrap(), 93);
    }

    #[test]
    fn rejects_degenerate_inputs() {
        assert!(two_sample_normal(0.0, 0.025, 0.8).is_err());
        assert!(two_proportions(0.3, 0.3, 0.025, 0.8).is_err());
        assert!(two_proportions(0.3, 0.5, 0.6, 0.8).is_err());
    }
}
