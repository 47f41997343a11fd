//! Replication campaigns and their operating characteristics.

use rayon::prelude::*;
use serde::Serialize;

use super::streams::{draw_arm, replicate_rng, Lane};
use super::trial::{AnalysisOptions, Scenario, ScenarioRunner, TrialResult};
use crate::error::{Error, Result};
use crate::similarity::{assess_interim_with_hmin, HminMode};

/// A Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
}

impl Estimate {
    /// Sample mean and `sd / √n`, summed in input order.
    pub fn mean_of(xs: &[f64]) -> Estimate {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = if xs.len() > 1 {
            xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Estimate {
            value: mean,
            se: (var / n).sqrt(),
        }
    }

    /// Binomial proportion with `√(p(1 - p)/n)`.
    pub fn proportion(successes: u64, n: u64) -> Estimate {
        let p = successes as f64 / n as f64;
        Estimate {
            value: p,
            se: (p * (1.0 - p) / n as f64).sqrt(),
        }
    }
}

/// Aggregates over the replicates of one scenario. Bias and interval length
/// are on the reporting scale.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OperatingCharacteristics {
    pub replications: u64,
    pub rejection_rate: Estimate,
    pub mean_bias_delta: Estimate,
    pub mean_bias_control: Estimate,
    pub mean_saved: Estimate,
    pub mean_ci_length: Option<Estimate>,
    pub mean_enrolled: Estimate,
}

impl OperatingCharacteristics {
    pub fn from_results(results: &[TrialResult], true_delta: f64, true_control: f64) -> Self {
        let n = results.len() as u64;
        let col = |f: &dyn Fn(&TrialResult) -> f64| results.iter().map(f).collect::<Vec<_>>();
        let mean_ci_length =
            if results.iter().all(|r| r.delta_interval.is_some()) && !results.is_empty() {
                Some(Estimate::mean_of(&col(&|r| {
                    let (lo, hi) = r.delta_interval.unwrap();
                    hi - lo
                })))
            } else {
                None
            };
        OperatingCharacteristics {
            replications: n,
            rejection_rate: Estimate::proportion(
                results.iter().filter(|r| r.success).count() as u64,
                n,
            ),
            mean_bias_delta: Estimate::mean_of(&col(&|r| r.delta_point - true_delta)),
            mean_bias_control: Estimate::mean_of(&col(&|r| r.control_point - true_control)),
            mean_saved: Estimate::mean_of(&col(&|r| r.n_saved as f64)),
            mean_ci_length,
            mean_enrolled: Estimate::mean_of(&col(&|r| r.arm_sizes.total() as f64)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioReport {
    pub design: OperatingCharacteristics,
    pub comparator: Option<OperatingCharacteristics>,
    /// Design minus comparator rejection rate, with the paired standard error.
    pub rejection_diff: Option<Estimate>,
    pub h_min: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CampaignOptions {
    /// Also run the comparator on the same response streams.
    pub paired_comparator: bool,
    pub analysis: AnalysisOptions,
    /// Worker threads; `None` uses every available core.
    pub workers: Option<usize>,
}

impl Default for CampaignOptions {
    fn default() -> Self {
        CampaignOptions {
            paired_comparator: true,
            analysis: AnalysisOptions::default(),
            workers: None,
        }
    }
}

fn pool(workers: Option<usize>) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.unwrap_or(0))
        .build()
        .map_err(|e| Error::param("workers", e.to_string()))
}

/// Runs every scenario for its replication count. Replicates run in
/// parallel; results are collected in replicate order and reduced serially,
/// so the output does not depend on the worker count.
pub fn run_campaign(
    scenarios: &[Scenario],
    options: &CampaignOptions,
) -> Result<Vec<ScenarioReport>> {
    if scenarios.is_empty() {
        return Err(Error::param(
            "scenarios",
            "campaign needs at least one scenario",
        ));
    }
    let pool = pool(options.workers)?;
    pool.install(|| scenarios.iter().map(|s| run_scenario(s, options)).collect())
}

fn run_scenario(scenario: &Scenario, options: &CampaignOptions) -> Result<ScenarioReport> {
    let runner = ScenarioRunner::new(scenario, options.analysis)?;
    let pairs: Vec<(TrialResult, Option<TrialResult>)> = (0..scenario.replications)
        .into_par_iter()
        .map(|r| {
            let design = runner.trial(r)?;
            let comparator = if options.paired_comparator {
                Some(runner.comparator(r)?)
            } else {
                None
            };
            Ok((design, comparator))
        })
        .collect::<Result<_>>()?;
    let scale = scenario.model.reporting_scale();
    let (true_delta, true_control) = (
        scenario.true_delta() * scale,
        scenario.theta_control * scale,
    );
    let designs: Vec<TrialResult> = pairs.iter().map(|p| p.0.clone()).collect();
    let design = OperatingCharacteristics::from_results(&designs, true_delta, true_control);
    let (comparator, rejection_diff) = if options.paired_comparator {
        let comps: Vec<TrialResult> = pairs.iter().map(|p| p.1.clone().unwrap()).collect();
        let diffs: Vec<f64> = designs
            .iter()
            .zip(&comps)
            .map(|(d, c)| f64::from(u8::from(d.success)) - f64::from(u8::from(c.success)))
            .collect();
        (
            Some(OperatingCharacteristics::from_results(
                &comps,
                true_delta,
                true_control,
            )),
            Some(Estimate::mean_of(&diffs)),
        )
    } else {
        (None, None)
    };
    Ok(ScenarioReport {
        design,
        comparator,
        rejection_diff,
        h_min: runner.h_min(),
    })
}

/// Agreement of second-stage sizes between the two `H_min` modes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HminComparison {
    pub h_min_exact: f64,
    pub h_min_approx: f64,
    pub replications: u64,
    /// Replicates whose stage-2 arm sizes differ between the modes.
    pub mismatches: u64,
    pub max_abs_h_star_diff: f64,
}

/// Replays the interim analysis of every replicate under both `H_min` modes.
pub fn compare_hmin_modes(scenario: &Scenario, workers: Option<usize>) -> Result<HminComparison> {
    scenario.validate()?;
    let exact = super::trial::scenario_hmin(scenario, HminMode::Exact)?;
    let approx = super::trial::scenario_hmin(scenario, HminMode::PriorMeanApprox)?;
    let design = &scenario.design;
    let (c1, _) = design.stage1_sizes();
    let rows: Vec<(bool, f64)> = pool(workers)?.install(|| {
        (0..scenario.replications)
            .into_par_iter()
            .map(|r| {
                let mut rng = replicate_rng(scenario.seed, r, Lane::Control);
                let data = draw_arm(&scenario.model, scenario.theta_control, c1, &mut rng);
                let a = assess_interim_with_hmin(
                    &scenario.historical_prior,
                    &data,
                    &scenario.model,
                    &design.similarity,
                    exact,
                )?;
                let b = assess_interim_with_hmin(
                    &scenario.historical_prior,
                    &data,
                    &scenario.model,
                    &design.similarity,
                    approx,
                )?;
                let (pa, pb) = (design.stage2_sizes(a.xi), design.stage2_sizes(b.xi));
                let same = pa.n2_control == pb.n2_control && pa.n2_treatment == pb.n2_treatment;
                Ok((!same, (a.h_star - b.h_star).abs()))
            })
            .collect::<Result<_>>()
    })?;
    Ok(HminComparison {
        h_min_exact: exact,
        h_min_approx: approx,
        replications: scenario.replications,
        mismatches: rows.iter().filter(|r| r.0).count() as u64,
        max_abs_h_star_diff: rows.iter().map(|r| r.1).fold(0.0, f64::max),
    })
}
