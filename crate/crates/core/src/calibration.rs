//! Pre-trial choice of the interim fraction `t` and threshold `γ`.
//!
//! For each candidate pair the probability of borrowing under a maximum
//! acceptable drift `δ*` is estimated by simulating the interim analysis only.
//! Pairs keeping it below `ε` are admissible, and the admissible pair with the
//! most saved patients under no drift is selected.
//!
//! Interim data for a given drift come from the same streams for every `t`
//! and `γ`, so estimates are exactly monotone in `γ`.

use rayon::prelude::*;
use serde::Serialize;

use crate::design::DesignConfig;
use crate::distributions::hellinger;
use crate::distributions::OutcomeModel;
use crate::engine::{
    draw_arm, mix_seed, replicate_rng, scenario_hmin, Estimate, Hypothesis, Lane, Scenario,
};
use crate::error::{Error, Result};
use crate::similarity::{interim_posterior, normalized_hellinger, similarity_xi, SimilarityConfig};
use crate::{Design, Model, Prior};

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationGrid {
    pub t_values: Vec<f64>,
    pub gamma_values: Vec<f64>,
    /// Maximum acceptable drift, outcome units.
    pub delta_star: f64,
    pub epsilon: f64,
    pub replications: u64,
    pub seed: u64,
    /// Drifts (outcome units) for the full borrowing-probability table.
    pub table_drifts: Vec<f64>,
}

impl CalibrationGrid {
    pub fn validate(&self) -> Result<()> {
        if self.t_values.is_empty() || self.gamma_values.is_empty() {
            return Err(Error::param("grid", "t and gamma lists must be nonempty"));
        }
        if let Some(g) = self
            .gamma_values
            .iter()
            .find(|g| !(**g >= 0.0 && **g <= 1.0))
        {
            return Err(Error::param("gamma", format!("{g} outside [0, 1]")));
        }
        if let Some(t) = self.t_values.iter().find(|t| !(**t > 0.0 && **t < 1.0)) {
            return Err(Error::param("t", format!("{t} outside (0, 1)")));
        }
        if !(self.epsilon >= 0.0 && self.epsilon < 1.0) {
            return Err(Error::param(
                "epsilon",
                format!("{} outside [0, 1)", self.epsilon),
            ));
        }
        if !self.delta_star.is_finite() || self.table_drifts.iter().any(|d| !d.is_finite()) {
            return Err(Error::NonFinite("calibration drift"));
        }
        if self.replications == 0 {
            return Err(Error::param("replications", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationCell {
    pub t: f64,
    pub gamma: f64,
    /// `P(ξ > 0)` at the maximum acceptable drift.
    pub borrowing_prob: Estimate,
    pub mean_saved_at_null: Estimate,
    pub admissible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BorrowingRow {
    pub drift: f64,
    /// One entry per cell, in the order of [`CalibrationReport::cells`].
    pub probs: Vec<Estimate>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationReport {
    /// Ordered by `γ`, then `t`.
    pub cells: Vec<CalibrationCell>,
    pub table: Vec<BorrowingRow>,
    pub selected: Option<(f64, f64)>,
    pub diagnostic: Option<String>,
}

/// `H*` of every replicate's interim look when the concurrent control mean
/// sits `drift` (outcome units) away from the historical mean.
fn interim_h_star(
    design: &Design,
    historical: &Prior,
    model: &Model,
    drift: f64,
    reps: u64,
    seed: u64,
) -> Result<Vec<f64>> {
    let theta = historical.mean() + model.to_working(drift);
    if matches!(model, OutcomeModel::Binary) && !(theta > 0.0 && theta < 1.0) {
        return Err(Error::param(
            "drift",
            format!("control rate {theta} outside (0, 1)"),
        ));
    }
    let probe = Scenario {
        model: *model,
        theta_control: theta,
        theta_treatment: theta,
        historical_prior: historical.clone(),
        treatment_prior: historical.clone(),
        design: *design,
        replications: reps,
        seed,
        hypothesis: Hypothesis::Null,
    };
    probe.validate()?;
    let h_min = scenario_hmin(&probe, design.similarity.hmin_mode)?;
    let (c1, _) = design.stage1_sizes();
    (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = replicate_rng(seed, r, Lane::Control);
            let data = draw_arm(model, theta, c1, &mut rng);
            let interim = interim_posterior(&data, model)?;
            normalized_hellinger(hellinger(&interim, historical)?, h_min)
        })
        .collect()
}

fn drift_seed(seed: u64, drift: f64) -> u64 {
    mix_seed(seed, (drift + 0.0).to_bits())
}

fn borrowing_rate(h_star: &[f64], similarity: &SimilarityConfig<f64>) -> Estimate {
    let hits = h_star
        .iter()
        .filter(|&&h| similarity_xi(h, similarity) > 0.0)
        .count() as u64;
    Estimate::proportion(hits, h_star.len() as u64)
}

fn saved(h_star: &[f64], design: &Design) -> Estimate {
    let xs: Vec<f64> = h_star
        .iter()
        .map(|&h| {
            design
                .stage2_sizes(similarity_xi(h, &design.similarity))
                .n_saved as f64
        })
        .collect();
    Estimate::mean_of(&xs)
}

/// Monte Carlo `P(ξ > 0)` when the concurrent control mean is the historical
/// mean plus `delta_star` (outcome units).
pub fn borrowing_probability(
    design: &Design,
    historical: &Prior,
    model: &Model,
    delta_star: f64,
    reps: u64,
    seed: u64,
) -> Result<Estimate> {
    let h = interim_h_star(
        design,
        historical,
        model,
        delta_star,
        reps,
        drift_seed(seed, delta_star),
    )?;
    Ok(borrowing_rate(&h, &design.similarity))
}

/// Monte Carlo mean number of saved patients with no drift.
pub fn expected_saved(
    design: &Design,
    historical: &Prior,
    model: &Model,
    reps: u64,
    seed: u64,
) -> Result<Estimate> {
    let h = interim_h_star(design, historical, model, 0.0, reps, drift_seed(seed, 0.0))?;
    Ok(saved(&h, design))
}

/// Fills every `(t, γ)` cell, marks those with borrowing probability below
/// `ε` at `δ*` and selects the admissible cell with the most saved patients.
/// Ties go to the smaller `t`, then the smaller `γ`.
pub fn select_design_params(
    grid: &CalibrationGrid,
    template: &Design,
    historical: &Prior,
    model: &Model,
) -> Result<CalibrationReport> {
    grid.validate()?;
    let designs: Vec<Vec<DesignConfig<f64>>> = grid
        .gamma_values
        .iter()
        .map(|&gamma| {
            grid.t_values
                .iter()
                .map(|&t| {
                    let d = DesignConfig {
                        t,
                        similarity: SimilarityConfig {
                            gamma,
                            ..template.similarity
                        },
                        ..*template
                    };
                    d.validate().map(|_| d)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let h_for = |drift: f64| -> Result<Vec<Vec<f64>>> {
        designs[0]
            .iter()
            .map(|d| {
                interim_h_star(
                    d,
                    historical,
                    model,
                    drift,
                    grid.replications,
                    drift_seed(grid.seed, drift),
                )
            })
            .collect()
    };
    let at_mad = h_for(grid.delta_star)?;
    let at_null = h_for(0.0)?;
    let mut cells = Vec::new();
    for row in &designs {
        for (ti, d) in row.iter().enumerate() {
            let borrowing_prob = borrowing_rate(&at_mad[ti], &d.similarity);
            cells.push(CalibrationCell {
                t: d.t,
                gamma: d.similarity.gamma,
                admissible: borrowing_prob.value < grid.epsilon,
                borrowing_prob,
                mean_saved_at_null: saved(&at_null[ti], d),
            });
        }
    }
    let mut table = Vec::new();
    for &drift in &grid.table_drifts {
        let h = h_for(drift)?;
        let probs = designs
            .iter()
            .flat_map(|row| {
                row.iter()
                    .enumerate()
                    .map(|(ti, d)| borrowing_rate(&h[ti], &d.similarity))
            })
            .collect();
        table.push(BorrowingRow { drift, probs });
    }
    let best = cells
        .iter()
        .filter(|c| c.admissible)
        .fold(None::<&CalibrationCell>, |best, c| match best {
            None => Some(c),
            Some(b) => {
                let better = c.mean_saved_at_null.value > b.mean_saved_at_null.value
                    || (c.mean_saved_at_null.value == b.mean_saved_at_null.value
                        && (c.t, c.gamma) < (b.t, b.gamma));
                Some(if better { c } else { b })
            }
        });
    let diagnostic = match best {
        Some(_) => None,
        None => Some(format!(
            "no (t, gamma) pair keeps the borrowing probability at drift {} below epsilon = {}",
            grid.delta_star, grid.epsilon
        )),
    };
    Ok(CalibrationReport {
        selected: best.map(|c| (c.t, c.gamma)),
        cells,
        table,
        diagnostic,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::PriorSpec;

    fn case_study() -> (Design, Prior, Model) {
        let model = OutcomeModel::continuous(88.0).unwrap();
        let prior = model.working_prior(&PriorSpec::normal(-50.0, 18.0).unwrap());
        let design = DesignConfig::new(80, 0.4, SimilarityConfig::new(0.2).unwrap()).unwrap();
        (design, prior, model)
    }

    #[test]
    fn disabled_borrowing_never_borrows() {
        let (mut d, p, m) = case_study();
        d.similarity.gamma = 0.0;
        assert_eq!(
            borrowing_probability(&d, &p, &m, 0.0, 500, 1)
                .unwrap()
                .value,
            0.0
        );
        assert_eq!(expected_saved(&d, &p, &m, 500, 1).unwrap().value, 0.0);
    }

    #[test]
    fn zero_epsilon_admits_nothing() {
        let (d, p, m) = case_study();
        let grid = CalibrationGrid {
            t_values: vec![0.4, 0.5],
            gamma_values: vec![0.2],
            delta_star: 40.0,
            epsilon: 0.0,
            replications: 200,
            seed: 3,
            table_drifts: vec![],
        };
        let r = select_design_params(&grid, &d, &p, &m).unwrap();
        assert!(r.selected.is_none());
        assert!(r.diagnostic.is_some());
    }

    #[test]
    fn single_admissible_cell_is_selected() {
        let (d, p, m) = case_study();
        let grid = CalibrationGrid {
            t_values: vec![0.5],
            gamma_values: vec![0.2],
            delta_star: 40.0,
            epsilon: 0.99,
            replications: 200,
            seed: 3,
            table_drifts: vec![-20.0, 20.0],
        };
        let r = select_design_params(&grid, &d, &p, &m).unwrap();
        assert_eq!(r.selected, Some((0.5, 0.2)));
        assert_eq!(r.table.len(), 2);
        assert_eq!(r.table[0].probs.len(), 1);
    }

    #[test]
    fn probability_grows_with_gamma() {
        let (mut d, p, m) = case_study();
        let mut last = -1.0;
        for gamma in [0.1, 0.2, 0.3, 0.5] {
            d.similarity.gamma = gamma;
            let e = borrowing_probability(&d, &p, &m, -30.0, 1000, 9)
                .unwrap()
                .value;
            assert!(e >= last);
            last = e;
        }
    }
}
