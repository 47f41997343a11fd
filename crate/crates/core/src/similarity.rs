//! Interim similarity between concurrent control data and the historical
//! control prior: interim posterior, minimal attainable Hellinger distance,
//! normalized distance `H*` and borrowing weight `ξ`.

use crate::distributions::{
    hellinger, hellinger_beta_shapes, hellinger_normal_params, DataSummary, Family, OutcomeModel,
    PriorSpec,
};
use crate::error::{Error, Result};
use crate::numerics::golden_section;
use crate::scalar::Real;

/// How the minimal distance `H_min` is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum HminMode {
    /// Minimize over the interim mean with both scale parameters fixed.
    #[default]
    Exact,
    /// Evaluate at an interim mean equal to the historical prior mean.
    PriorMeanApprox,
}

/// Monotone map applied to `1 - H*`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Transform {
    #[default]
    Identity,
}

impl Transform {
    pub fn apply<T: Real>(self, x: T) -> T {
        match self {
            Transform::Identity => x,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimilarityConfig<T> {
    /// Borrowing threshold on `H*`. Zero disables borrowing altogether.
    pub gamma: T,
    pub transform: Transform,
    pub hmin_mode: HminMode,
}

impl<T: Real> SimilarityConfig<T> {
    pub fn new(gamma: T) -> Result<Self> {
        let cfg = SimilarityConfig {
            gamma,
            transform: Transform::Identity,
            hmin_mode: HminMode::Exact,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_hmin_mode(self, hmin_mode: HminMode) -> Self {
        SimilarityConfig { hmin_mode, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma >= T::zero() && self.gamma <= T::one()) {
            return Err(Error::param(
                "gamma",
                format!("{} outside [0, 1]", self.gamma),
            ));
        }
        Ok(())
    }

    pub fn borrowing_disabled(&self) -> bool {
        self.gamma == T::zero()
    }
}

/// Everything computed at the interim look.
#[derive(Debug, Clone, PartialEq)]
pub struct InterimState<T> {
    pub n_interim_control: u64,
    pub control_summary: DataSummary<T>,
    pub interim_posterior: PriorSpec<T>,
    pub h: T,
    pub h_min: T,
    pub h_star: T,
    pub xi: T,
    /// Interim posterior mean minus historical prior mean.
    pub drift: T,
}

/// Scale parameter of the interim posterior after `n` control patients:
/// standard deviation `1/√n` (continuous) or precision `n + 1` (binary).
pub fn interim_scale<T: Real>(n: u64, model: &OutcomeModel<T>) -> T {
    let n = T::from_u64(n).unwrap();
    match model {
        OutcomeModel::Continuous { .. } => n.sqrt().recip(),
        OutcomeModel::Binary => n + T::one(),
    }
}

/// Posterior of the control parameter from concurrent interim data only.
///
/// Continuous: `N(ȳ, 1/√n)`. Binary: the Jeffreys `Beta(0.5, 0.5)` update,
/// `Beta(0.5 + s, 0.5 + n - s)`.
pub fn interim_posterior<T: Real>(
    data: &DataSummary<T>,
    model: &OutcomeModel<T>,
) -> Result<PriorSpec<T>> {
    if data.n < 2 {
        return Err(Error::InvalidData(format!(
            "interim analysis needs at least 2 control patients, got {}",
            data.n
        )));
    }
    data.validate(model)?;
    let n = T::from_u64(data.n).unwrap();
    match model {
        OutcomeModel::Continuous { .. } => {
            PriorSpec::normal(data.sum / n, interim_scale(data.n, model))
        }
        OutcomeModel::Binary => {
            let half = T::lit(0.5);
            PriorSpec::beta_shapes(half + data.sum, half + n - data.sum)
        }
    }
}

const GRID_POINTS: usize = 200;

/// Minimal Hellinger distance between an interim posterior of the given scale
/// and the historical prior, over the interim mean.
pub fn minimal_hellinger<T: Real>(
    historical: &PriorSpec<T>,
    interim: &PriorSpec<T>,
    model: &OutcomeModel<T>,
    mode: HminMode,
) -> Result<T> {
    model.check_prior(historical)?;
    model.check_prior(interim)?;
    let scale = interim
        .single()
        .ok_or_else(|| Error::InvalidPrior("interim posterior must be a single component".into()))?
        .scale;
    let at_mean = |m: T| -> Result<T> {
        match (model.family(), historical.single()) {
            (Family::Normal, Some(h)) => Ok(hellinger_normal_params(m, scale, h.location, h.scale)),
            (Family::Beta, Some(h)) => {
                let (a2, b2) = h.shapes();
                Ok(hellinger_beta_shapes(
                    m * scale,
                    (T::one() - m) * scale,
                    a2,
                    b2,
                ))
            }
            (Family::Normal, None) => hellinger(&PriorSpec::normal(m, scale)?, historical),
            (Family::Beta, None) => hellinger(&PriorSpec::beta(m, scale)?, historical),
        }
    };
    match mode {
        HminMode::PriorMeanApprox => at_mean(historical.mean()),
        HminMode::Exact => {
            if let (Family::Normal, Some(h)) = (model.family(), historical.single()) {
                return Ok(hellinger_normal_params(
                    h.location, scale, h.location, h.scale,
                ));
            }
            let (lo, hi) = match model.family() {
                Family::Normal => {
                    let ten_sd = T::lit(10.0) * historical.sd();
                    (historical.mean() - ten_sd, historical.mean() + ten_sd)
                }
                Family::Beta => (T::lit(0.001), T::lit(0.999)),
            };
            minimize_over_mean(at_mean, lo, hi)
        }
    }
}

/// Coarse grid scan to locate the basin, then golden-section refinement on
/// the neighbouring grid cells.
fn minimize_over_mean<T: Real, F: Fn(T) -> Result<T>>(f: F, lo: T, hi: T) -> Result<T> {
    let step = (hi - lo) / T::from_usize(GRID_POINTS).unwrap();
    let mut best = (0usize, T::infinity());
    for i in 0..=GRID_POINTS {
        let v = f(lo + step * T::from_usize(i).unwrap())?;
        if v < best.1 {
            best = (i, v);
        }
    }
    let a = lo + step * T::from_usize(best.0.saturating_sub(1)).unwrap();
    let b = (lo + step * T::from_usize(best.0 + 1).unwrap()).min(hi);
    let failed = std::cell::Cell::new(None);
    let objective = |m: T| match f(m) {
        Ok(v) => v,
        Err(e) => {
            failed.set(Some(e));
            T::infinity()
        }
    };
    let min = golden_section(objective, a, b, step * T::lit(1e-7), 200)?;
    if let Some(e) = failed.take() {
        return Err(e);
    }
    Ok(min.value.min(best.1))
}

/// `H* = (H - H_min) / (1 - H_min)`, clamped to `[0, 1]`.
pub fn normalized_hellinger<T: Real>(h: T, h_min: T) -> Result<T> {
    if !(h_min >= T::zero() && h_min < T::one()) {
        return Err(Error::param("h_min", format!("{h_min} outside [0, 1)")));
    }
    if !h.is_finite() {
        return Err(Error::NonFinite("hellinger distance"));
    }
    Ok(((h - h_min) / (T::one() - h_min))
        .max(T::zero())
        .min(T::one()))
}

/// Borrowing weight `ξ = f(1 - H*)·1{H* ≤ γ}`; always zero when `γ = 0`.
pub fn similarity_xi<T: Real>(h_star: T, config: &SimilarityConfig<T>) -> T {
    if config.borrowing_disabled() || h_star > config.gamma {
        T::zero()
    } else {
        config.transform.apply(T::one() - h_star)
    }
}

/// Runs the interim pipeline with an `H_min` computed beforehand. `H_min`
/// depends only on the interim sample size, so simulations compute it once.
pub fn assess_interim_with_hmin<T: Real>(
    historical: &PriorSpec<T>,
    control: &DataSummary<T>,
    model: &OutcomeModel<T>,
    config: &SimilarityConfig<T>,
    h_min: T,
) -> Result<InterimState<T>> {
    let interim = interim_posterior(control, model)?;
    let h = hellinger(&interim, historical)?;
    let h_star = normalized_hellinger(h, h_min)?;
    let xi = similarity_xi(h_star, config);
    Ok(InterimState {
        n_interim_control: control.n,
        control_summary: *control,
        drift: interim.mean() - historical.mean(),
        interim_posterior: interim,
        h,
        h_min,
        h_star,
        xi,
    })
}

pub fn assess_interim<T: Real>(
    historical: &PriorSpec<T>,
    control: &DataSummary<T>,
    model: &OutcomeModel<T>,
    config: &SimilarityConfig<T>,
) -> Result<InterimState<T>> {
    let interim = interim_posterior(control, model)?;
    let h_min = minimal_hellinger(historical, &interim, model, config.hmin_mode)?;
    assess_interim_with_hmin(historical, control, model, config, h_min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::Component;

    fn cont() -> OutcomeModel<f64> {
        OutcomeModel::continuous(1.0).unwrap()
    }

    #[test]
    fn interim_posterior_examples() {
        let p = interim_posterior(&DataSummary::<f64>::new(50, 0.0), &cont()).unwrap();
        let c = p.single().unwrap();
        assert_eq!(c.location, 0.0);
        assert!((c.scale - 1.0 / 50.0_f64.sqrt()).abs() < 1e-15);

        let b =
            interim_posterior(&DataSummary::<f64>::new(30, 9.0), &OutcomeModel::Binary).unwrap();
        let (a, bb) = b.single().unwrap().shapes();
        assert!((a - 9.5).abs() < 1e-12 && (bb - 21.5).abs() < 1e-12);

        assert!(interim_posterior(&DataSummary::<f64>::new(1, 0.3), &cont()).is_err());
    }

    #[test]
    fn hmin_continuous_single() {
        let hist = PriorSpec::<f64>::normal(0.0, 1.0 / 70.0_f64.sqrt()).unwrap();
        let interim = PriorSpec::<f64>::normal(0.5, 0.1).unwrap();
        let h = minimal_hellinger(&hist, &interim, &cont(), HminMode::Exact).unwrap();
        assert!((h - 0.0888).abs() < 1e-4, "h_min = {h}");
        let same = PriorSpec::<f64>::normal(3.0, 1.0 / 70.0_f64.sqrt()).unwrap();
        assert_eq!(
            minimal_hellinger(&hist, &same, &cont(), HminMode::Exact).unwrap(),
            0.0
        );
    }

    #[test]
    fn hmin_mixture_is_below_mean_approx() {
        let hist = PriorSpec::<f64>::mixture(
            Family::Normal,
            vec![
                Component::new(0.6, -0.3, 0.1),
                Component::new(0.4, 0.4, 0.2),
            ],
        )
        .unwrap();
        let interim = PriorSpec::<f64>::normal(0.0, 0.15).unwrap();
        let exact = minimal_hellinger(&hist, &interim, &cont(), HminMode::Exact).unwrap();
        let approx =
            minimal_hellinger(&hist, &interim, &cont(), HminMode::PriorMeanApprox).unwrap();
        assert!(exact <= approx + 1e-12);
    }

    #[test]
    fn normalized_examples() {
        assert_eq!(normalized_hellinger(0.3, 0.3).unwrap(), 0.0);
        assert_eq!(normalized_hellinger(1.0, 0.2).unwrap(), 1.0);
        let v: f64 = normalized_hellinger(0.5, 0.0888).unwrap();
        assert!((v - (0.5 - 0.0888) / (1.0 - 0.0888)).abs() < 1e-15);
        assert!((v - 0.4512).abs() < 1e-4);
        assert_eq!(normalized_hellinger(0.1, 0.2).unwrap(), 0.0);
        assert!(normalized_hellinger(0.5, 1.0).is_err());
    }

    #[test]
    fn xi_examples() {
        let cfg = SimilarityConfig::<f64>::new(0.3).unwrap();
        assert!((similarity_xi(0.2, &cfg) - 0.8).abs() < 1e-15);
        assert_eq!(similarity_xi(0.35, &cfg), 0.0);
        assert!((similarity_xi(0.3, &cfg) - 0.7).abs() < 1e-15);
        let off = SimilarityConfig::<f64>::new(0.0).unwrap();
        assert_eq!(similarity_xi(0.0, &off), 0.0);
    }

    #[test]
    fn gamma_outside_unit_interval_is_rejected() {
        assert!(SimilarityConfig::<f64>::new(1.5).is_err());
        assert!(SimilarityConfig::<f64>::new(-0.1).is_err());
    }
}
