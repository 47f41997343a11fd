//! Trial simulation and replication campaigns.

mod campaign;
mod streams;
mod trial;

pub use campaign::{
    compare_hmin_modes, run_campaign, CampaignOptions, Estimate, HminComparison,
    OperatingCharacteristics, ScenarioReport,
};
pub use streams::{draw_arm, mix_seed, replicate_rng, Lane};
pub use trial::{
    noninformative_prior, scenario_hmin, simulate_comparator, simulate_trial, AnalysisOptions,
    ArmSizes, Hypothesis, ReplicateStreams, Scenario, ScenarioRunner, TrialResult,
};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::{DesignConfig, Variant};
    use crate::distributions::{posterior_update, prob_delta_positive, OutcomeModel, PriorSpec};
    use crate::similarity::SimilarityConfig;

    fn scenario(gamma: f64, d: f64, effect: f64, t: f64) -> Scenario {
        let model = OutcomeModel::continuous(1.0).unwrap();
        Scenario {
            model,
            theta_control: d,
            theta_treatment: d + effect,
            historical_prior: PriorSpec::normal(0.0, 1.0 / 70.0_f64.sqrt()).unwrap(),
            treatment_prior: noninformative_prior(&model),
            design: DesignConfig::new(200, t, SimilarityConfig::new(gamma).unwrap()).unwrap(),
            replications: 200,
            seed: 11,
            hypothesis: if effect == 0.0 {
                Hypothesis::Null
            } else {
                Hypothesis::Alternative
            },
        }
    }

    #[test]
    fn same_streams_same_result() {
        let s = scenario(0.3, 0.1, 0.4, 0.3);
        let opts = AnalysisOptions::default();
        let a = simulate_trial(&s, ReplicateStreams::design(&s, 5), opts).unwrap();
        let b = simulate_trial(&s, ReplicateStreams::design(&s, 5), opts).unwrap();
        assert_eq!(a, b);
        let (lo, hi) = a.delta_interval.unwrap();
        assert!(lo <= a.delta_point && a.delta_point <= hi);
        let c = simulate_comparator(&s, ReplicateStreams::comparator(&s, 5), opts).unwrap();
        assert_eq!(
            c,
            simulate_comparator(&s, ReplicateStreams::comparator(&s, 5), opts).unwrap()
        );
    }

    #[test]
    fn disabled_borrowing_is_a_plain_analysis() {
        let s = scenario(0.0, 0.1, 0.4, 0.5);
        let runner = ScenarioRunner::new(
            &s,
            AnalysisOptions {
                credible_level: None,
            },
        )
        .unwrap();
        for r in 0..20 {
            let res = runner.trial(r).unwrap();
            assert_eq!(res.n_saved, 0);
            assert_eq!(res.xi, 0.0);
            let mut c = replicate_rng(s.seed, r, Lane::Control);
            let mut t = replicate_rng(s.seed, r, Lane::TreatmentAlternative);
            let yc = draw_arm(&s.model, s.theta_control, 100, &mut c);
            let yt = draw_arm(&s.model, s.theta_treatment, 100, &mut t);
            let pc =
                posterior_update(&PriorSpec::normal(0.0, 1.0).unwrap(), &yc, &s.model).unwrap();
            let pt = posterior_update(&s.treatment_prior, &yt, &s.model).unwrap();
            let p = prob_delta_positive(&pt, &pc, &s.model).unwrap();
            assert!((p - res.posterior_prob).abs() < 1e-12);
        }
    }

    #[test]
    fn enrolment_bookkeeping() {
        for variant in [Variant::Design1, Variant::Design2] {
            let mut s = scenario(0.5, 0.0, 0.0, 0.4);
            s.design.variant = variant;
            s.design.lambda = 2.0;
            let runner = ScenarioRunner::new(
                &s,
                AnalysisOptions {
                    credible_level: None,
                },
            )
            .unwrap();
            for r in 0..50 {
                let res = runner.trial(r).unwrap();
                match variant {
                    Variant::Design1 => assert_eq!(res.arm_sizes.total(), 200 - res.n_saved),
                    Variant::Design2 => assert_eq!(res.arm_sizes.total(), 200),
                }
            }
        }
    }

    #[test]
    fn campaign_is_independent_of_workers() {
        let list = vec![scenario(0.3, 0.0, 0.0, 0.3), scenario(0.3, 0.1, 0.4, 0.5)];
        let mut opts = CampaignOptions {
            workers: Some(1),
            ..CampaignOptions::default()
        };
        let a = run_campaign(&list, &opts).unwrap();
        opts.workers = Some(4);
        assert_eq!(a, run_campaign(&list, &opts).unwrap());
        assert!(a[0].design.rejection_rate.value <= 1.0);
    }

    #[test]
    fn estimate_helpers() {
        let e = Estimate::proportion(25, 100);
        assert!((e.se - (0.25_f64 * 0.75 / 100.0).sqrt()).abs() < 1e-15);
        let m = Estimate::mean_of(&[1.0, 2.0, 3.0]);
        assert_eq!(m.value, 2.0);
        assert!((m.se - (1.0_f64 / 3.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn binary_trial_runs() {
        let model = OutcomeModel::Binary;
        let s = Scenario {
            model,
            theta_control: 0.3,
            theta_treatment: 0.5,
            historical_prior: PriorSpec::beta(0.3, 65.0).unwrap(),
            treatment_prior: noninformative_prior(&model),
            design: DesignConfig::new(186, 0.3, SimilarityConfig::new(0.3).unwrap()).unwrap(),
            replications: 10,
            seed: 3,
            hypothesis: Hypothesis::Alternative,
        };
        let r = simulate_trial(
            &s,
            ReplicateStreams::design(&s, 0),
            AnalysisOptions::default(),
        )
        .unwrap();
        let (lo, hi) = r.delta_interval.unwrap();
        assert!(lo < hi);
        assert_eq!(
            r.arm_sizes.stage1_control + r.arm_sizes.stage1_treatment,
            56
        );
    }
}
