//! Second-stage adaptation rules, control-prior rescaling and the final
//! decision.

use crate::distributions::{prob_delta_positive, OutcomeModel, PriorSpec};
use crate::error::{Error, Result};
use crate::ess::{rescale_to_ess, EssValue};
use crate::scalar::Real;
use crate::similarity::SimilarityConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Variant {
    /// Shrink the second-stage control arm; the treatment arm keeps its
    /// planned size and the trial enrolls fewer patients.
    #[default]
    Design1,
    /// Move the control patients that were not randomized to the treatment
    /// arm; the total sample size is unchanged.
    Design2,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignConfig<T> {
    pub variant: Variant,
    /// Planned total sample size `N`.
    pub n_total: u64,
    /// Planned treatment:control allocation ratio `R`.
    pub ratio: T,
    /// Information fraction at the interim analysis.
    pub t: T,
    /// Cap on the reduction of the second-stage control arm, `λ ≥ 1`.
    pub lambda: T,
    /// Success threshold on `P(Δ > 0)`.
    pub eta: T,
    pub similarity: SimilarityConfig<T>,
    /// Treatment:control ratio of the first stage.
    pub stage1_ratio: T,
    /// Binary only: use `Beta(0.5, 0.5)` instead of an ESS-1 rescaled
    /// historical prior when no patient is saved.
    pub binary_noninformative_when_no_saving: bool,
}

/// Arm sizes after the interim analysis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageTwoPlan<T> {
    pub n2_control: u64,
    pub n2_treatment: u64,
    pub n_saved: u64,
    /// `n2_treatment / n2_control`; infinite when no control patient remains.
    pub allocation_ratio_stage2: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decision<T> {
    pub success: bool,
    pub posterior_prob: T,
}

fn count<T: Real>(n: u64) -> T {
    T::from_u64(n).unwrap()
}

/// Slack added before flooring so that exact integers computed in floating
/// point are not pushed down by one.
fn floor_slack<T: Real>() -> T {
    T::lit(1e-9).max(T::epsilon() * T::lit(1024.0))
}

impl<T: Real> DesignConfig<T> {
    /// A 1:1 Design 1 with `λ = 1` and `η = 0.975`.
    pub fn new(n_total: u64, t: T, similarity: SimilarityConfig<T>) -> Result<Self> {
        let cfg = DesignConfig {
            variant: Variant::Design1,
            n_total,
            ratio: T::one(),
            t,
            lambda: T::one(),
            eta: T::lit(0.975),
            similarity,
            stage1_ratio: T::one(),
            binary_noninformative_when_no_saving: false,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t > T::zero() && self.t < T::one()) {
            return Err(Error::param("t", format!("{} outside (0, 1)", self.t)));
        }
        if !(self.lambda >= T::one() && self.lambda.is_finite()) {
            return Err(Error::param(
                "lambda",
                format!("{} must be finite and at least 1", self.lambda),
            ));
        }
        if !(self.eta > T::zero() && self.eta < T::one()) {
            return Err(Error::param("eta", format!("{} outside (0, 1)", self.eta)));
        }
        if !(self.ratio > T::zero() && self.ratio.is_finite()) {
            return Err(Error::param(
                "ratio",
                format!("{} must be positive", self.ratio),
            ));
        }
        if !(self.stage1_ratio > T::zero() && self.stage1_ratio.is_finite()) {
            return Err(Error::param(
                "stage1_ratio",
                format!("{} must be positive", self.stage1_ratio),
            ));
        }
        self.similarity.validate()?;
        let (c1, t1) = self.stage1_sizes();
        if c1 < 2 {
            return Err(Error::param(
                "t",
                format!("stage 1 has {c1} control patients; the interim analysis needs at least 2"),
            ));
        }
        if t1 == 0 || self.n_stage2() == 0 {
            return Err(Error::param(
                "t",
                format!(
                    "t = {} with N = {} leaves an empty arm or stage",
                    self.t, self.n_total
                ),
            ));
        }
        Ok(())
    }

    /// Conditions that are allowed but worth reporting.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.lambda == T::one() && !self.similarity.borrowing_disabled() {
            out.push(format!(
                "lambda = 1 with gamma = {}: full borrowing removes every second-stage control patient",
                self.similarity.gamma
            ));
        }
        out
    }

    /// Number of patients enrolled before the interim analysis, `round(tN)`.
    pub fn n_stage1(&self) -> u64 {
        (self.t * count(self.n_total)).round().to_u64().unwrap()
    }

    pub fn n_stage2(&self) -> u64 {
        self.n_total.saturating_sub(self.n_stage1())
    }

    /// `(control, treatment)` in stage 1. An odd remainder goes to treatment.
    pub fn stage1_sizes(&self) -> (u64, u64) {
        let n1 = self.n_stage1();
        let c = (count::<T>(n1) / (self.stage1_ratio + T::one()) + floor_slack())
            .floor()
            .to_u64()
            .unwrap();
        (c, n1 - c)
    }

    /// Planned second-stage control size, `floor((1 - t)N / (R + 1))`.
    pub fn planned_stage2_control(&self) -> u64 {
        (count::<T>(self.n_stage2()) / (self.ratio + T::one()) + floor_slack())
            .floor()
            .to_u64()
            .unwrap()
    }

    /// Planned second-stage treatment size. The stage-2 total is kept at
    /// `N - round(tN)` so that both stages add up to `N`.
    pub fn planned_stage2_treatment(&self) -> u64 {
        self.n_stage2() - self.planned_stage2_control()
    }

    /// Second-stage arm sizes for borrowing weight `xi`.
    pub fn stage2_sizes(&self, xi: T) -> StageTwoPlan<T> {
        let xi = xi.max(T::zero()).min(T::one());
        let planned_c = self.planned_stage2_control();
        let n2 = count::<T>(self.n_stage2());
        let reduced = (T::one() - xi / self.lambda) * n2 / (self.ratio + T::one());
        let n2_control = (reduced + floor_slack())
            .floor()
            .to_u64()
            .unwrap()
            .min(planned_c);
        let n2_treatment = match self.variant {
            Variant::Design1 => self.planned_stage2_treatment(),
            Variant::Design2 => self.n_stage2() - n2_control,
        };
        let allocation_ratio_stage2 = if n2_control == 0 {
            T::infinity()
        } else {
            count::<T>(n2_treatment) / count(n2_control)
        };
        StageTwoPlan {
            n2_control,
            n2_treatment,
            n_saved: planned_c - n2_control,
            allocation_ratio_stage2,
        }
    }

    /// `(control, treatment)` for the single-stage comparator of size `N`.
    pub fn comparator_sizes(&self) -> (u64, u64) {
        let c = (count::<T>(self.n_total) / (self.ratio + T::one()))
            .round()
            .to_u64()
            .unwrap();
        (c, self.n_total - c)
    }
}

/// Rescales the historical control prior to an ESS equal to the number of
/// saved patients (at least 1).
pub fn adjust_control_prior<T: Real>(
    historical: &PriorSpec<T>,
    n_saved: u64,
    model: &OutcomeModel<T>,
    binary_noninformative_when_no_saving: bool,
) -> Result<PriorSpec<T>> {
    if n_saved == 0 && binary_noninformative_when_no_saving && matches!(model, OutcomeModel::Binary)
    {
        return PriorSpec::beta_shapes(T::lit(0.5), T::lit(0.5));
    }
    rescale_to_ess(historical, EssValue::new(count(n_saved.max(1)))?, model)
}

/// Success iff `P(Δ > 0) > η`.
pub fn final_decision<T: Real>(
    post_t: &PriorSpec<T>,
    post_c: &PriorSpec<T>,
    model: &OutcomeModel<T>,
    eta: T,
) -> Result<Decision<T>> {
    let posterior_prob = prob_delta_positive(post_t, post_c, model)?;
    Ok(Decision {
        success: posterior_prob > eta,
        posterior_prob,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ess::elir_ess;

    fn base(variant: Variant, lambda: f64) -> DesignConfig<f64> {
        let mut d =
            DesignConfig::<f64>::new(200, 0.5, SimilarityConfig::<f64>::new(0.3).unwrap()).unwrap();
        d.variant = variant;
        d.lambda = lambda;
        d
    }

    #[test]
    fn design1_extremes() {
        let d = base(Variant::Design1, 1.0);
        let p = d.stage2_sizes(0.0);
        assert_eq!((p.n2_control, p.n2_treatment, p.n_saved), (50, 50, 0));
        let p = d.stage2_sizes(1.0);
        assert_eq!((p.n2_control, p.n2_treatment, p.n_saved), (0, 50, 50));
        assert!(p.allocation_ratio_stage2.is_infinite());
    }

    #[test]
    fn design2_with_cap() {
        let d = base(Variant::Design2, 2.0);
        let p = d.stage2_sizes(1.0);
        assert_eq!((p.n2_control, p.n2_treatment), (25, 75));
        assert_eq!(p.allocation_ratio_stage2, 3.0);
        assert_eq!(p.allocation_ratio_stage2, (2.0 * 1.0 + 1.0) / (2.0 - 1.0));
    }

    #[test]
    fn stage1_odd_total_favours_treatment() {
        let mut d =
            DesignConfig::<f64>::new(186, 0.5, SimilarityConfig::<f64>::new(0.3).unwrap()).unwrap();
        assert_eq!(d.stage1_sizes(), (46, 47));
        d.t = 0.4;
        assert_eq!(d.n_stage1(), 74);
        assert_eq!(
            d.n_stage1() + d.planned_stage2_control() + d.planned_stage2_treatment(),
            186
        );
    }

    #[test]
    fn validation() {
        let mut d = base(Variant::Design1, 1.0);
        d.lambda = 0.5;
        assert!(d.validate().is_err());
        let mut d = base(Variant::Design1, 1.0);
        d.eta = 1.0;
        assert!(d.validate().is_err());
        let mut d = base(Variant::Design1, 1.0);
        d.t = 0.01;
        assert!(d.validate().is_err());
        assert_eq!(base(Variant::Design1, 1.0).warnings().len(), 1);
        assert!(base(Variant::Design1, 2.0).warnings().is_empty());
    }

    #[test]
    fn control_size_monotone_on_grid() {
        for variant in [Variant::Design1, Variant::Design2] {
            for t in [0.3, 0.4, 0.5, 0.6] {
                let mut prev_lambda: Option<Vec<u64>> = None;
                for lambda in [1.0, 1.5, 2.0, 4.0, 8.0] {
                    let mut d = base(variant, lambda);
                    d.t = t;
                    let sizes: Vec<u64> = (0..=100)
                        .map(|i| d.stage2_sizes(i as f64 / 100.0).n2_control)
                        .collect();
                    assert!(sizes.windows(2).all(|w| w[1] <= w[0]));
                    if let Some(prev) = &prev_lambda {
                        assert!(sizes.iter().zip(prev).all(|(a, b)| a >= b));
                    }
                    for (i, &c) in sizes.iter().enumerate() {
                        let p = d.stage2_sizes(i as f64 / 100.0);
                        assert!(p.n_saved as f64 <= (1.0 - t) * 200.0 / 2.0);
                        if variant == Variant::Design2 {
                            assert_eq!(d.n_stage1() + c + p.n2_treatment, 200);
                        }
                    }
                    prev_lambda = Some(sizes);
                }
            }
        }
    }

    #[test]
    fn adjusted_prior_examples() {
        let m = OutcomeModel::continuous(1.0).unwrap();
        let p = PriorSpec::<f64>::normal(0.0, 1.0 / 70.0_f64.sqrt()).unwrap();
        let r = adjust_control_prior(&p, 35, &m, false).unwrap();
        assert!((r.single().unwrap().scale - 1.0 / 35.0_f64.sqrt()).abs() < 1e-14);
        let r = adjust_control_prior(&p, 0, &m, false).unwrap();
        assert!((elir_ess(&r, &m).unwrap().value() - 1.0).abs() < 0.01);

        let b = PriorSpec::<f64>::beta(0.3, 65.0).unwrap();
        let r = adjust_control_prior(&b, 13, &OutcomeModel::Binary, false).unwrap();
        assert!((r.single().unwrap().scale - 13.0).abs() < 1e-12);
        let r = adjust_control_prior(&b, 0, &OutcomeModel::Binary, true).unwrap();
        assert_eq!(r.single().unwrap().shapes(), (0.5, 0.5));
    }

    #[test]
    fn decision_is_strict() {
        let m = OutcomeModel::continuous(1.0).unwrap();
        let p = PriorSpec::<f64>::normal(0.0, 0.1).unwrap();
        let d = final_decision(&p, &p, &m, 0.975).unwrap();
        assert!(!d.success);
        assert!((d.posterior_prob - 0.5).abs() < 1e-15);
        let d = final_decision(&p, &p, &m, 0.5).unwrap();
        assert!(!d.success);
    }
}
