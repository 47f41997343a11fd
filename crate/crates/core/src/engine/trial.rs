//! One simulated trial: interim look, stage-2 adaptation, final analysis.

use std::sync::OnceLock;

use rand_chacha::ChaCha8Rng;

use super::streams::{draw_arm, replicate_rng, Lane};
use crate::design::{adjust_control_prior, final_decision, StageTwoPlan};
use crate::distributions::{
    delta_point_and_interval, posterior_update, DataSummary, OutcomeModel, PriorSpec,
};
use crate::error::{Error, Result};
use crate::similarity::{
    assess_interim_with_hmin, interim_scale, minimal_hellinger, HminMode, InterimState,
};
use crate::{Design, Model, Prior};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Hypothesis {
    /// `θ_T = θ_C`.
    Null,
    /// `θ_T` differs from `θ_C` by the planned effect.
    Alternative,
}

impl Hypothesis {
    pub fn name(self) -> &'static str {
        match self {
            Hypothesis::Null => "null",
            Hypothesis::Alternative => "alternative",
        }
    }

    fn treatment_lane(self) -> Lane {
        match self {
            Hypothesis::Null => Lane::TreatmentNull,
            Hypothesis::Alternative => Lane::TreatmentAlternative,
        }
    }
}

/// A fully specified simulation point. Response parameters and priors are on
/// the working scale.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub model: Model,
    pub theta_control: f64,
    pub theta_treatment: f64,
    pub historical_prior: Prior,
    pub treatment_prior: Prior,
    pub design: Design,
    pub replications: u64,
    /// Key of the replicate streams. Scenarios sharing a seed share control
    /// draws; the treatment stream also depends on `hypothesis`.
    pub seed: u64,
    pub hypothesis: Hypothesis,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        self.design.validate()?;
        self.model.check_prior(&self.historical_prior)?;
        self.model.check_prior(&self.treatment_prior)?;
        if self.replications == 0 {
            return Err(Error::param("replications", "must be at least 1"));
        }
        for (name, theta) in [
            ("theta_control", self.theta_control),
            ("theta_treatment", self.theta_treatment),
        ] {
            let ok = match self.model {
                OutcomeModel::Continuous { .. } => theta.is_finite(),
                OutcomeModel::Binary => theta > 0.0 && theta < 1.0,
            };
            if !ok {
                return Err(Error::param(
                    name,
                    format!(
                        "{theta} is not a valid {} response parameter",
                        self.model.name()
                    ),
                ));
            }
        }
        Ok(())
    }

    /// Concurrent control mean minus historical prior mean, working scale.
    pub fn drift(&self) -> f64 {
        self.theta_control - self.historical_prior.mean()
    }

    pub fn true_delta(&self) -> f64 {
        self.theta_treatment - self.theta_control
    }
}

/// The ESS-1 prior used for both comparator arms: `N(0, 1)` or `Beta(0.5, 0.5)`.
pub fn noninformative_prior(model: &Model) -> Prior {
    match model {
        OutcomeModel::Continuous { .. } => PriorSpec::normal(0.0, 1.0).unwrap(),
        OutcomeModel::Binary => PriorSpec::beta_shapes(0.5, 0.5).unwrap(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ArmSizes {
    pub stage1_control: u64,
    pub stage1_treatment: u64,
    pub stage2_control: u64,
    pub stage2_treatment: u64,
}

impl ArmSizes {
    pub fn control(&self) -> u64 {
        self.stage1_control + self.stage2_control
    }

    pub fn treatment(&self) -> u64 {
        self.stage1_treatment + self.stage2_treatment
    }

    pub fn total(&self) -> u64 {
        self.control() + self.treatment()
    }
}

/// Outcome of one simulated trial. Effect and control estimates are on the
/// reporting scale.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub success: bool,
    pub posterior_prob: f64,
    pub delta_point: f64,
    pub delta_interval: Option<(f64, f64)>,
    pub n_saved: u64,
    pub xi: f64,
    /// `None` for the comparator, which has no interim look.
    pub h_star: Option<f64>,
    pub arm_sizes: ArmSizes,
    pub control_point: f64,
}

/// The replicate streams a trial consumes.
pub struct ReplicateStreams {
    pub control: ChaCha8Rng,
    pub treatment: ChaCha8Rng,
    pub analysis: ChaCha8Rng,
}

impl ReplicateStreams {
    pub fn design(scenario: &Scenario, replicate: u64) -> Self {
        Self::with_analysis(scenario, replicate, Lane::DesignAnalysis)
    }

    pub fn comparator(scenario: &Scenario, replicate: u64) -> Self {
        Self::with_analysis(scenario, replicate, Lane::ComparatorAnalysis)
    }

    fn with_analysis(scenario: &Scenario, replicate: u64, analysis: Lane) -> Self {
        ReplicateStreams {
            control: replicate_rng(scenario.seed, replicate, Lane::Control),
            treatment: replicate_rng(
                scenario.seed,
                replicate,
                scenario.hypothesis.treatment_lane(),
            ),
            analysis: replicate_rng(scenario.seed, replicate, analysis),
        }
    }
}

/// What to compute beyond the decision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisOptions {
    /// Equal-tailed credible level for `Δ`, or `None` to skip intervals.
    pub credible_level: Option<f64>,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            credible_level: Some(0.95),
        }
    }
}

/// A scenario with everything that is fixed across replicates computed once:
/// `H_min` for the stage-1 control size and the rescaled control priors.
pub struct ScenarioRunner<'a> {
    scenario: &'a Scenario,
    h_min: f64,
    control_priors: Vec<OnceLock<Prior>>,
    options: AnalysisOptions,
}

impl<'a> ScenarioRunner<'a> {
    pub fn new(scenario: &'a Scenario, options: AnalysisOptions) -> Result<Self> {
        scenario.validate()?;
        let h_min = scenario_hmin(scenario, scenario.design.similarity.hmin_mode)?;
        let slots = scenario.design.planned_stage2_control() as usize + 1;
        Ok(ScenarioRunner {
            scenario,
            h_min,
            control_priors: (0..slots).map(|_| OnceLock::new()).collect(),
            options,
        })
    }

    pub fn h_min(&self) -> f64 {
        self.h_min
    }

    fn control_prior(&self, n_saved: u64) -> Result<&Prior> {
        let slot = &self.control_priors[n_saved as usize];
        if let Some(p) = slot.get() {
            return Ok(p);
        }
        let s = self.scenario;
        let p = adjust_control_prior(
            &s.historical_prior,
            n_saved,
            &s.model,
            s.design.binary_noninformative_when_no_saving,
        )?;
        Ok(slot.get_or_init(|| p))
    }

    /// Interim analysis on stage-1 control data drawn from `control`.
    pub fn interim(
        &self,
        control: &mut ChaCha8Rng,
    ) -> Result<(DataSummary<f64>, InterimState<f64>, StageTwoPlan<f64>)> {
        let s = self.scenario;
        let (c1, _) = s.design.stage1_sizes();
        let data = draw_arm(&s.model, s.theta_control, c1, control);
        let state = assess_interim_with_hmin(
            &s.historical_prior,
            &data,
            &s.model,
            &s.design.similarity,
            self.h_min,
        )?;
        let plan = s.design.stage2_sizes(state.xi);
        Ok((data, state, plan))
    }

    pub fn trial(&self, replicate: u64) -> Result<TrialResult> {
        self.trial_with(ReplicateStreams::design(self.scenario, replicate))
    }

    pub fn trial_with(&self, mut streams: ReplicateStreams) -> Result<TrialResult> {
        let s = self.scenario;
        let (_, t1) = s.design.stage1_sizes();
        let treat1 = draw_arm(&s.model, s.theta_treatment, t1, &mut streams.treatment);
        let (control1, state, plan) = self.interim(&mut streams.control)?;
        let control2 = draw_arm(
            &s.model,
            s.theta_control,
            plan.n2_control,
            &mut streams.control,
        );
        let treat2 = draw_arm(
            &s.model,
            s.theta_treatment,
            plan.n2_treatment,
            &mut streams.treatment,
        );
        let control_prior = self.control_prior(plan.n_saved)?;
        let post_c = posterior_update(control_prior, &control1.merge(&control2), &s.model)?;
        let post_t = posterior_update(&s.treatment_prior, &treat1.merge(&treat2), &s.model)?;
        let arm_sizes = ArmSizes {
            stage1_control: control1.n,
            stage1_treatment: treat1.n,
            stage2_control: plan.n2_control,
            stage2_treatment: plan.n2_treatment,
        };
        self.finish(
            &post_t,
            &post_c,
            &mut streams.analysis,
            plan.n_saved,
            state.xi,
            Some(state.h_star),
            arm_sizes,
        )
    }

    pub fn comparator(&self, replicate: u64) -> Result<TrialResult> {
        self.comparator_with(ReplicateStreams::comparator(self.scenario, replicate))
    }

    /// Single-stage trial of size `N` with ESS-1 priors on both arms.
    pub fn comparator_with(&self, mut streams: ReplicateStreams) -> Result<TrialResult> {
        let s = self.scenario;
        let (nc, nt) = s.design.comparator_sizes();
        let control = draw_arm(&s.model, s.theta_control, nc, &mut streams.control);
        let treat = draw_arm(&s.model, s.theta_treatment, nt, &mut streams.treatment);
        let prior = noninformative_prior(&s.model);
        let post_c = posterior_update(&prior, &control, &s.model)?;
        let post_t = posterior_update(&prior, &treat, &s.model)?;
        let arm_sizes = ArmSizes {
            stage1_control: nc,
            stage1_treatment: nt,
            ..ArmSizes::default()
        };
        self.finish(
            &post_t,
            &post_c,
            &mut streams.analysis,
            0,
            0.0,
            None,
            arm_sizes,
        )
    }

    #[allow(clippy::too_many_arguments)]
    fn finish(
        &self,
        post_t: &Prior,
        post_c: &Prior,
        analysis: &mut ChaCha8Rng,
        n_saved: u64,
        xi: f64,
        h_star: Option<f64>,
        arm_sizes: ArmSizes,
    ) -> Result<TrialResult> {
        let s = self.scenario;
        let decision = final_decision(post_t, post_c, &s.model, s.design.eta)?;
        let scale = s.model.reporting_scale();
        let delta_interval = match self.options.credible_level {
            Some(level) => {
                let d = delta_point_and_interval(post_t, post_c, &s.model, level, analysis)?;
                Some((d.lo * scale, d.hi * scale))
            }
            None => None,
        };
        Ok(TrialResult {
            success: decision.success,
            posterior_prob: decision.posterior_prob,
            delta_point: (post_t.mean() - post_c.mean()) * scale,
            delta_interval,
            n_saved,
            xi,
            h_star,
            arm_sizes,
            control_point: post_c.mean() * scale,
        })
    }
}

/// `H_min` for the scenario's stage-1 control size. It does not depend on the
/// data, only on the interim posterior's scale.
pub fn scenario_hmin(scenario: &Scenario, mode: HminMode) -> Result<f64> {
    let (c1, _) = scenario.design.stage1_sizes();
    let scale = interim_scale(c1, &scenario.model);
    let centre = scenario.historical_prior.mean();
    let interim = match scenario.model {
        OutcomeModel::Continuous { .. } => PriorSpec::normal(centre, scale)?,
        OutcomeModel::Binary => PriorSpec::beta(centre, scale)?,
    };
    minimal_hellinger(&scenario.historical_prior, &interim, &scenario.model, mode)
}

/// Runs one trial of `scenario` on the given streams.
pub fn simulate_trial(
    scenario: &Scenario,
    streams: ReplicateStreams,
    options: AnalysisOptions,
) -> Result<TrialResult> {
    ScenarioRunner::new(scenario, options)?.trial_with(streams)
}

/// Runs the non-borrowing comparator of `scenario` on the given streams.
pub fn simulate_comparator(
    scenario: &Scenario,
    streams: ReplicateStreams,
    options: AnalysisOptions,
) -> Result<TrialResult> {
    ScenarioRunner::new(scenario, options)?.comparator_with(streams)
}
