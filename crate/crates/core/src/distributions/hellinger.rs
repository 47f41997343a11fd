//! Hellinger distance `H(p, q) = sqrt(1 - ∫ sqrt(p q))` between priors.

use super::prior::{Family, PriorSpec};
use crate::error::{Error, Result};
use crate::numerics::{integrate_with_breaks, QuadOptions};
use crate::scalar::{ln_beta, Real};

/// Absolute tolerance on the Bhattacharyya integral. Tighter than strictly
/// needed so that `H` itself (which amplifies integral error near zero) stays
/// accurate to ~1e-7.
const BHATTACHARYYA_TOL: f64 = 1e-12;

fn from_coefficient<T: Real>(bc: T) -> T {
    (T::one() - bc).max(T::zero()).min(T::one()).sqrt()
}

fn single<'a, T: Real>(
    p: &'a PriorSpec<T>,
    family: Family,
    what: &str,
) -> Result<&'a super::Component<T>> {
    if p.family() != family {
        return Err(Error::InvalidPrior(format!(
            "{what}: expected a {family} prior, got {}",
            p.family()
        )));
    }
    p.single().ok_or_else(|| {
        Error::InvalidPrior(format!(
            "{what}: closed form needs a single component, got {}",
            p.components().len()
        ))
    })
}

/// Closed form for two normal densities.
pub fn hellinger_normal<T: Real>(p: &PriorSpec<T>, q: &PriorSpec<T>) -> Result<T> {
    let a = single(p, Family::Normal, "hellinger_normal")?;
    let b = single(q, Family::Normal, "hellinger_normal")?;
    Ok(hellinger_normal_params(
        a.location, a.scale, b.location, b.scale,
    ))
}

pub(crate) fn hellinger_normal_params<T: Real>(m1: T, s1: T, m2: T, s2: T) -> T {
    let var = s1 * s1 + s2 * s2;
    let d = m1 - m2;
    let bc = (T::lit(2.0) * s1 * s2 / var).sqrt() * (-T::lit(0.25) * d * d / var).exp();
    from_coefficient(bc)
}

/// Closed form for two beta densities, evaluated through `ln B`.
pub fn hellinger_beta<T: Real>(p: &PriorSpec<T>, q: &PriorSpec<T>) -> Result<T> {
    let a = single(p, Family::Beta, "hellinger_beta")?;
    let b = single(q, Family::Beta, "hellinger_beta")?;
    let (a1, b1) = a.shapes();
    let (a2, b2) = b.shapes();
    Ok(hellinger_beta_shapes(a1, b1, a2, b2))
}

pub(crate) fn hellinger_beta_shapes<T: Real>(a1: T, b1: T, a2: T, b2: T) -> T {
    let half = T::lit(0.5);
    let ln_bc =
        ln_beta(half * (a1 + a2), half * (b1 + b2)) - half * (ln_beta(a1, b1) + ln_beta(a2, b2));
    from_coefficient(ln_bc.exp())
}

/// Hellinger distance by adaptive quadrature of the Bhattacharyya integral.
/// Accepts mixtures of either family.
pub fn hellinger_numeric<T: Real>(p: &PriorSpec<T>, q: &PriorSpec<T>) -> Result<T> {
    if p.family() != q.family() {
        return Err(Error::InvalidPrior(format!(
            "cannot compare {} and {} densities",
            p.family(),
            q.family()
        )));
    }
    let (plo, phi) = p.support();
    let (qlo, qhi) = q.support();
    let (lo, hi) = (plo.min(qlo), phi.max(qhi));
    let mut breaks = p.breakpoints();
    breaks.extend(q.breakpoints());
    breaks.retain(|&x| x >= lo && x <= hi);
    let half = T::lit(0.5);
    let integrand = |x: T| (half * (p.ln_pdf(x) + q.ln_pdf(x))).exp();
    let r = integrate_with_breaks(integrand, &breaks, QuadOptions::abs(BHATTACHARYYA_TOL))?;
    if !r.value.is_finite() {
        return Err(Error::NonFinite("Bhattacharyya integral"));
    }
    Ok(from_coefficient(r.value))
}

/// Closed form when both arguments are single components, quadrature otherwise.
pub fn hellinger<T: Real>(p: &PriorSpec<T>, q: &PriorSpec<T>) -> Result<T> {
    match (p.family(), q.family(), p.is_single() && q.is_single()) {
        (Family::Normal, Family::Normal, true) => hellinger_normal(p, q),
        (Family::Beta, Family::Beta, true) => hellinger_beta(p, q),
        _ => hellinger_numeric(p, q),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::Component;

    fn n(m: f64, s: f64) -> PriorSpec<f64> {
        PriorSpec::<f64>::normal(m, s).unwrap()
    }

    #[test]
    fn identical_normals_are_zero() {
        assert_eq!(hellinger_normal(&n(0.0, 0.1), &n(0.0, 0.1)).unwrap(), 0.0);
    }

    #[test]
    fn shifted_normal_matches_closed_form() {
        let h = hellinger_normal(&n(0.2, 0.1), &n(0.0, 0.1)).unwrap();
        // H² = 1 - exp(-0.04/0.08)
        assert!((h * h - (1.0 - (-0.5_f64).exp())).abs() < 1e-15);
        assert!((h - 0.62727).abs() < 1e-5);
    }

    #[test]
    fn beta_identity_and_rejects_mixture() {
        let p = PriorSpec::<f64>::beta(0.3, 65.0).unwrap();
        assert!(hellinger_beta(&p, &p).unwrap().abs() < 1e-7);
        let mix = PriorSpec::<f64>::mixture(
            Family::Beta,
            vec![
                Component::new(0.5, 0.3, 10.0),
                Component::new(0.5, 0.6, 10.0),
            ],
        )
        .unwrap();
        assert!(hellinger_beta(&mix, &p).is_err());
    }

    #[test]
    fn beta_large_precision_does_not_overflow() {
        let p = PriorSpec::<f64>::beta(0.3, 5000.0).unwrap();
        let q = PriorSpec::<f64>::beta(0.31, 4000.0).unwrap();
        let h = hellinger_beta(&p, &q).unwrap();
        assert!(h.is_finite() && h > 0.0 && h < 1.0);
    }

    #[test]
    fn numeric_rejects_mixed_families() {
        let p = PriorSpec::<f64>::beta(0.3, 65.0).unwrap();
        assert!(hellinger_numeric(&p, &n(0.3, 0.1)).is_err());
    }

    #[test]
    fn single_precision_closed_form() {
        let p32 = PriorSpec::normal(0.2_f32, 0.1).unwrap();
        let q32 = PriorSpec::normal(0.0_f32, 0.1).unwrap();
        let h32 = hellinger_normal(&p32, &q32).unwrap();
        let h64 = hellinger_normal(&n(0.2, 0.1), &n(0.0, 0.1)).unwrap();
        assert!((f64::from(h32) - h64).abs() < 1e-6);
    }
}
