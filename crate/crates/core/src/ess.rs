//! Expected local-information-ratio (ELIR) effective sample size and
//! rescaling of a prior to a target ESS.
//!
//! ELIR is `E_π[i_π(θ) / i_F(θ)]` with `i_π = -(log π)''` and `i_F` the
//! Fisher information of one observation: 1 for a unit-variance normal,
//! `1 / (θ(1 - θ))` for a Bernoulli.

use crate::distributions::{Component, Family, OutcomeModel, PriorSpec};
use crate::error::{Error, Result};
use crate::numerics::{brent_root, integrate_with_breaks, QuadOptions};
use crate::scalar::{ln_beta, log_sum_exp, Real};

/// Effective sample size in patient units.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct EssValue<T>(T);

impl<T: Real> EssValue<T> {
    pub fn new(value: T) -> Result<Self> {
        if !(value >= T::zero() && value.is_finite()) {
            return Err(Error::param(
                "ess",
                format!("{value} is not a finite nonnegative sample size"),
            ));
        }
        Ok(EssValue(value))
    }

    pub fn value(self) -> T {
        self.0
    }
}

const ESS_QUAD_TOL: f64 = 1e-9;
const ESS_QUAD_REL_TOL: f64 = 1e-11;
/// Acceptable distance between achieved and requested ESS after rescaling.
pub const RESCALE_TOL: f64 = 0.01;
const LOW_ESS_WARNING: f64 = 0.5;

/// ELIR effective sample size. Single components use the closed forms
/// (`1/σ²`, `a + b`); mixtures go through [`elir_ess_quadrature`].
pub fn elir_ess<T: Real>(prior: &PriorSpec<T>, model: &OutcomeModel<T>) -> Result<EssValue<T>> {
    model.check_prior(prior)?;
    match prior.single() {
        Some(c) => EssValue::new(match prior.family() {
            Family::Normal => (c.scale * c.scale).recip(),
            Family::Beta => c.scale,
        }),
        None => elir_ess_quadrature(prior, model),
    }
}

/// ELIR by quadrature of the analytic information ratio, for any mixture.
///
/// The signed ratio is integrated; mixtures can have negative local
/// information between components.
pub fn elir_ess_quadrature<T: Real>(
    prior: &PriorSpec<T>,
    model: &OutcomeModel<T>,
) -> Result<EssValue<T>> {
    model.check_prior(prior)?;
    let family = prior.family();
    let comps = prior.components();
    let integrand = |x: T| {
        let (ln_density, ratio) = local_information(family, comps, x);
        let inv_fisher = match family {
            Family::Normal => T::one(),
            Family::Beta => x * (T::one() - x),
        };
        ln_density.exp() * ratio * inv_fisher
    };
    let r = integrate_with_breaks(
        integrand,
        &prior.breakpoints(),
        QuadOptions {
            rel_tol: ESS_QUAD_REL_TOL,
            ..QuadOptions::abs(ESS_QUAD_TOL)
        },
    )?;
    if r.value.as_f64() < LOW_ESS_WARNING {
        log::warn!(
            "prior {prior} has ELIR effective sample size {} below {LOW_ESS_WARNING}",
            r.value
        );
    }
    EssValue::new(r.value.max(T::zero()))
}

/// `(ln π(x), -(ln π)''(x))` for a mixture, computed through component
/// responsibilities so that no finite differences are needed.
fn local_information<T: Real>(family: Family, comps: &[Component<T>], x: T) -> (T, T) {
    let one = T::one();
    let mut logs = Vec::with_capacity(comps.len());
    let mut grads = Vec::with_capacity(comps.len());
    let mut curvs = Vec::with_capacity(comps.len());
    for c in comps {
        let (ln_pdf, g, h) = match family {
            Family::Normal => {
                let prec = (c.scale * c.scale).recip();
                let z = (x - c.location) / c.scale;
                let ln_pdf = -T::lit(0.5) * z * z - T::lit(0.5) * T::TAU().ln() - c.scale.ln();
                (ln_pdf, -(x - c.location) * prec, prec)
            }
            Family::Beta => {
                let (a, b) = c.shapes();
                let ln_pdf = (a - one) * x.ln() + (b - one) * (-x).ln_1p() - ln_beta(a, b);
                let y = one - x;
                (
                    ln_pdf,
                    (a - one) / x - (b - one) / y,
                    (a - one) / (x * x) + (b - one) / (y * y),
                )
            }
        };
        logs.push(c.weight.ln() + ln_pdf);
        grads.push(g);
        curvs.push(h);
    }
    let ln_density = log_sum_exp(&logs);
    let mut mean_g = T::zero();
    let mut mean_g2 = T::zero();
    let mut mean_h = T::zero();
    for i in 0..comps.len() {
        let r = (logs[i] - ln_density).exp();
        mean_g = mean_g + r * grads[i];
        mean_g2 = mean_g2 + r * grads[i] * grads[i];
        mean_h = mean_h + r * curvs[i];
    }
    // -(ln π)'' = E_r[h] - Var_r[g]
    (ln_density, mean_h - (mean_g2 - mean_g * mean_g))
}

fn scale_components<T: Real>(prior: &PriorSpec<T>, v: T) -> Result<PriorSpec<T>> {
    let comps = prior
        .components()
        .iter()
        .map(|c| {
            let scale = match prior.family() {
                Family::Normal => c.scale / v,
                Family::Beta => c.scale * v,
            };
            Component::new(c.weight, c.location, scale)
        })
        .collect();
    PriorSpec::mixture(prior.family(), comps)
}

/// Rescales `prior` so its ELIR ESS equals `target` (clamped to at least 1),
/// keeping every component mean.
///
/// Single components use the closed forms; mixtures solve for a common factor
/// `v` that divides every normal standard deviation or multiplies every beta
/// precision. The search starts from the factor that would be exact for a
/// single component and widens geometrically, at most to `1e-4..1e4` around it.
pub fn rescale_to_ess<T: Real>(
    prior: &PriorSpec<T>,
    target: EssValue<T>,
    model: &OutcomeModel<T>,
) -> Result<PriorSpec<T>> {
    let target = target.value().max(T::one());
    let current = elir_ess(prior, model)?.value();
    if let Some(c) = prior.single() {
        let scale = match prior.family() {
            Family::Normal => c.scale * (current / target).sqrt(),
            Family::Beta => c.scale * (target / current),
        };
        return PriorSpec::mixture(
            prior.family(),
            vec![Component::new(c.weight, c.location, scale)],
        );
    }
    let guess = match prior.family() {
        Family::Normal => (target / current).sqrt(),
        Family::Beta => target / current,
    }
    .ln();
    let objective = |ln_v: T| {
        scale_components(prior, ln_v.exp())
            .and_then(|p| elir_ess(&p, model))
            .map(|e| e.value() - target)
            .unwrap_or(T::nan())
    };
    let max_width = T::lit(1e4).ln();
    let mut width = T::lit(2.0).ln();
    let (lo, hi) = loop {
        let (lo, hi) = (guess - width, guess + width);
        let (f_lo, f_hi) = (objective(lo), objective(hi));
        if f_lo.is_finite() && f_hi.is_finite() && f_lo.signum() != f_hi.signum() {
            break (lo, hi);
        }
        if width >= max_width {
            return Err(Error::RootNotBracketed {
                lo: (guess - width).exp().as_f64(),
                hi: (guess + width).exp().as_f64(),
            });
        }
        width = (width * T::lit(2.0)).min(max_width);
    };
    let ln_v = brent_root(objective, lo, hi, T::lit(1e-12), 200)?;
    let scaled = scale_components(prior, ln_v.exp())?;
    let achieved = elir_ess(&scaled, model)?.value();
    if (achieved - target).abs() > T::lit(RESCALE_TOL) {
        return Err(Error::OptimizerNonConvergence(format!(
            "rescaled ESS {achieved} misses target {target}"
        )));
    }
    Ok(scaled)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cont() -> OutcomeModel<f64> {
        OutcomeModel::continuous(1.0).unwrap()
    }

    pub(crate) fn two_component_mixture() -> PriorSpec<f64> {
        PriorSpec::<f64>::mixture(
            Family::Normal,
            vec![
                Component::new(0.539, 0.00027, 0.2006),
                Component::new(0.461, -0.00031, 0.0672),
            ],
        )
        .unwrap()
    }

    #[test]
    fn closed_forms() {
        let unit = PriorSpec::<f64>::normal(0.3, 1.0).unwrap();
        assert_eq!(elir_ess(&unit, &cont()).unwrap().value(), 1.0);
        let p70 = PriorSpec::<f64>::normal(0.0, 1.0 / 70.0_f64.sqrt()).unwrap();
        assert!((elir_ess(&p70, &cont()).unwrap().value() - 70.0).abs() < 1e-10);
        let b = PriorSpec::<f64>::beta(0.3, 65.0).unwrap();
        assert!((elir_ess(&b, &OutcomeModel::Binary).unwrap().value() - 65.0).abs() < 1e-12);
    }

    #[test]
    fn quadrature_reproduces_closed_forms() {
        let p = PriorSpec::<f64>::normal(-0.4, 0.25).unwrap();
        assert!((elir_ess_quadrature(&p, &cont()).unwrap().value() - 16.0).abs() < 1e-6);
        let b = PriorSpec::<f64>::beta(0.3, 65.0).unwrap();
        assert!(
            (elir_ess_quadrature(&b, &OutcomeModel::Binary)
                .unwrap()
                .value()
                - 65.0)
                .abs()
                < 1e-4
        );
    }

    #[test]
    fn two_component_mixture_has_about_seventy_patients() {
        let ess = elir_ess(&two_component_mixture(), &cont()).unwrap().value();
        assert!((ess - 70.0).abs() < 1.5, "ess = {ess}");
    }

    #[test]
    fn rescale_single_normal() {
        let p = PriorSpec::<f64>::normal(0.0, 1.0 / 70.0_f64.sqrt()).unwrap();
        let r = rescale_to_ess(&p, EssValue::new(35.0).unwrap(), &cont()).unwrap();
        assert!((r.single().unwrap().scale - 1.0 / 35.0_f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn rescale_single_beta() {
        let p = PriorSpec::<f64>::beta(0.3, 65.0).unwrap();
        let r = rescale_to_ess(&p, EssValue::new(13.0).unwrap(), &OutcomeModel::Binary).unwrap();
        let c = r.single().unwrap();
        assert!((c.scale - 13.0).abs() < 1e-12);
        assert_eq!(c.location, 0.3);
    }

    #[test]
    fn rescale_mixture_round_trip() {
        let p = two_component_mixture();
        let r = rescale_to_ess(&p, EssValue::new(35.0).unwrap(), &cont()).unwrap();
        assert!((elir_ess(&r, &cont()).unwrap().value() - 35.0).abs() < RESCALE_TOL);
        for (a, b) in p.components().iter().zip(r.components()) {
            assert_eq!(a.location, b.location);
            assert_eq!(a.weight, b.weight);
        }
    }

    #[test]
    fn target_below_one_is_clamped() {
        let p = PriorSpec::<f64>::normal(0.0, 0.1).unwrap();
        let r = rescale_to_ess(&p, EssValue::new(0.0).unwrap(), &cont()).unwrap();
        assert!((elir_ess(&r, &cont()).unwrap().value() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ess_value_rejects_negative() {
        assert!(EssValue::new(-1.0).is_err());
        assert!(EssValue::new(f64::NAN).is_err());
    }
}
