//! Config document schema and its translation into validated domain objects.

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::calibration::CalibrationGrid;
use crate::design::{DesignConfig, Variant};
use crate::distributions::{Component, Family, OutcomeModel, PriorSpec};
use crate::engine::{
    mix_seed, noninformative_prior, AnalysisOptions, CampaignOptions, Hypothesis, Scenario,
};
use crate::similarity::{HminMode, SimilarityConfig, Transform};
use crate::{Design, Model, Prior};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub seed: u64,
    pub replications: u64,
    pub model: ModelSection,
    pub design: DesignSection,
    pub historical_prior: PriorSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub treatment_prior: Option<PriorSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimulationSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibration: Option<CalibrationSection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Continuous,
    Binary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub kind: ModelKind,
    /// Continuous only; responses and priors are divided by it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub known_sd: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariantName {
    Design1,
    Design2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HminModeName {
    Exact,
    PriorMeanApprox,
}

fn default_one() -> f64 {
    1.0
}

fn default_lambda() -> Vec<f64> {
    vec![1.0]
}

fn default_eta() -> f64 {
    0.975
}

fn default_variant() -> VariantName {
    VariantName::Design1
}

fn default_hmin() -> HminModeName {
    HminModeName::Exact
}

fn default_true() -> bool {
    true
}

fn default_level() -> f64 {
    0.95
}

fn default_hypotheses() -> Vec<HypothesisName> {
    vec![HypothesisName::Null, HypothesisName::Alternative]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignSection {
    #[serde(default = "default_variant")]
    pub variant: VariantName,
    pub n_total: u64,
    #[serde(default = "default_one")]
    pub ratio: f64,
    pub t: Vec<f64>,
    pub gamma: Vec<f64>,
    #[serde(default = "default_lambda")]
    pub lambda: Vec<f64>,
    #[serde(default = "default_eta")]
    pub eta: f64,
    #[serde(default = "default_one")]
    pub stage1_ratio: f64,
    #[serde(default = "default_hmin")]
    pub hmin_mode: HminModeName,
    #[serde(default)]
    pub binary_noninformative_when_no_saving: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyName {
    Normal,
    Beta,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriorSection {
    pub family: FamilyName,
    pub components: Vec<ComponentSection>,
}

/// One mixture component in outcome units: `sd` for normal, `precision`
/// (`a + b`) for beta.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentSection {
    pub weight: f64,
    pub mean: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sd: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HypothesisName {
    Null,
    Alternative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSection {
    /// Concurrent control mean minus historical mean, outcome units. Empty
    /// means no drift.
    #[serde(default)]
    pub drift_grid: Vec<f64>,
    /// Treatment effect under the alternative: a mean difference in outcome
    /// units (continuous) or a log odds ratio (binary).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub effect: Option<f64>,
    /// Binary only: reference control and treatment rates defining the log
    /// odds ratio.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub effect_rates: Option<[f64; 2]>,
    #[serde(default = "default_hypotheses")]
    pub hypotheses: Vec<HypothesisName>,
    #[serde(default = "default_true")]
    pub paired_comparator: bool,
    #[serde(default = "default_true")]
    pub credible_intervals: bool,
    #[serde(default = "default_level")]
    pub credible_level: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationSection {
    pub delta_star: f64,
    pub epsilon: f64,
    #[serde(default)]
    pub table_drifts: Vec<f64>,
}

/// One `(d, t, γ, λ)` point of a simulation grid and the scenarios run for it.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint {
    /// Drift in outcome units.
    pub drift: f64,
    pub t: f64,
    pub gamma: f64,
    pub lambda: f64,
    pub null: Option<usize>,
    pub alternative: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationPlan {
    pub scenarios: Vec<Scenario>,
    pub points: Vec<GridPoint>,
    pub options: CampaignOptions,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationPlan {
    pub grid: CalibrationGrid,
    pub template: Design,
    pub historical: Prior,
    pub model: Model,
}

/// Validated contents of a config document.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedConfig {
    pub file: ConfigFile,
    pub simulation: Option<SimulationPlan>,
    pub calibration: Option<CalibrationPlan>,
}

fn err(path: impl Into<String>, reason: impl ToString) -> CliError {
    CliError::Config {
        path: path.into(),
        reason: reason.to_string(),
    }
}

/// Parses and validates a config document.
pub fn parse_config(text: &str) -> Result<ParsedConfig, CliError> {
    let file: ConfigFile = toml::from_str(text).map_err(|e| {
        err(
            "<document>",
            e.message().to_string() + &span_hint(text, e.span()),
        )
    })?;
    build(file)
}

fn span_hint(text: &str, span: Option<std::ops::Range<usize>>) -> String {
    match span {
        Some(r) => {
            let line = text[..r.start.min(text.len())].lines().count().max(1);
            format!(" (line {line})")
        }
        None => String::new(),
    }
}

/// Validates an already deserialized document.
pub fn build(file: ConfigFile) -> Result<ParsedConfig, CliError> {
    if file.replications == 0 {
        return Err(err("replications", "must be at least 1"));
    }
    let model = build_model(&file.model)?;
    let historical = build_prior(&file.historical_prior, &model, "historical_prior")?;
    let treatment = match &file.treatment_prior {
        Some(p) => build_prior(p, &model, "treatment_prior")?,
        None => noninformative_prior(&model),
    };
    let d = &file.design;
    for (key, list) in [
        ("design.t", &d.t),
        ("design.gamma", &d.gamma),
        ("design.lambda", &d.lambda),
    ] {
        if list.is_empty() {
            return Err(err(key, "list must not be empty"));
        }
    }
    let mut designs = Vec::new();
    let mut warnings = std::collections::BTreeSet::new();
    for (ti, &t) in d.t.iter().enumerate() {
        for (gi, &gamma) in d.gamma.iter().enumerate() {
            for (li, &lambda) in d.lambda.iter().enumerate() {
                let design = build_design(d, t, gamma, lambda).map_err(|e| {
                    let path = match &e {
                        crate::Error::InvalidParameter { name: "t", .. } => {
                            format!("design.t[{ti}]")
                        }
                        crate::Error::InvalidParameter { name: "gamma", .. } => {
                            format!("design.gamma[{gi}]")
                        }
                        crate::Error::InvalidParameter { name: "lambda", .. } => {
                            format!("design.lambda[{li}]")
                        }
                        crate::Error::InvalidParameter { name, .. } => format!("design.{name}"),
                        _ => "design".to_string(),
                    };
                    err(path, e)
                })?;
                warnings.extend(design.warnings());
                designs.push(design);
            }
        }
    }
    for w in &warnings {
        log::warn!("{w}");
    }
    let simulation = match &file.simulation {
        Some(s) => Some(build_simulation(&file, s, &model, &historical, &treatment)?),
        None => None,
    };
    let calibration = match &file.calibration {
        Some(c) => {
            let grid = CalibrationGrid {
                t_values: d.t.clone(),
                gamma_values: d.gamma.clone(),
                delta_star: c.delta_star,
                epsilon: c.epsilon,
                replications: file.replications,
                seed: file.seed,
                table_drifts: c.table_drifts.clone(),
            };
            grid.validate().map_err(|e| err("calibration", e))?;
            if d.lambda.len() != 1 {
                return Err(err("design.lambda", "calibration uses a single lambda"));
            }
            Some(CalibrationPlan {
                grid,
                template: designs[0],
                historical: historical.clone(),
                model,
            })
        }
        None => None,
    };
    Ok(ParsedConfig {
        file,
        simulation,
        calibration,
    })
}

fn build_model(m: &ModelSection) -> Result<Model, CliError> {
    match (m.kind, m.known_sd) {
        (ModelKind::Continuous, Some(sd)) => {
            OutcomeModel::continuous(sd).map_err(|e| err("model.known_sd", e))
        }
        (ModelKind::Continuous, None) => {
            Err(err("model.known_sd", "required for a continuous model"))
        }
        (ModelKind::Binary, None) => Ok(OutcomeModel::Binary),
        (ModelKind::Binary, Some(_)) => {
            Err(err("model.known_sd", "not allowed for a binary model"))
        }
    }
}

fn build_prior(p: &PriorSection, model: &Model, path: &str) -> Result<Prior, CliError> {
    let family = match p.family {
        FamilyName::Normal => Family::Normal,
        FamilyName::Beta => Family::Beta,
    };
    if family != model.family() {
        return Err(err(
            format!("{path}.family"),
            format!("a {} model needs a {} prior", model.name(), model.family()),
        ));
    }
    if p.components.is_empty() {
        return Err(err(
            format!("{path}.components"),
            "at least one component is required",
        ));
    }
    let mut comps = Vec::with_capacity(p.components.len());
    for (i, c) in p.components.iter().enumerate() {
        let at = format!("{path}.components[{i}]");
        let scale = match (family, c.sd, c.precision) {
            (Family::Normal, Some(sd), None) => sd,
            (Family::Beta, None, Some(phi)) => phi,
            (Family::Normal, _, _) => {
                return Err(err(at, "normal components take `sd` and no `precision`"))
            }
            (Family::Beta, _, _) => {
                return Err(err(at, "beta components take `precision` and no `sd`"))
            }
        };
        comps.push(Component::new(c.weight, c.mean, scale));
    }
    let prior = PriorSpec::mixture(family, comps)
        .map_err(|e| err(format!("{path}.components"), format!("{path}: {e}")))?;
    Ok(model.working_prior(&prior))
}

fn build_design(d: &DesignSection, t: f64, gamma: f64, lambda: f64) -> crate::Result<Design> {
    let design = DesignConfig {
        variant: match d.variant {
            VariantName::Design1 => Variant::Design1,
            VariantName::Design2 => Variant::Design2,
        },
        n_total: d.n_total,
        ratio: d.ratio,
        t,
        lambda,
        eta: d.eta,
        similarity: SimilarityConfig {
            gamma,
            transform: Transform::Identity,
            hmin_mode: match d.hmin_mode {
                HminModeName::Exact => HminMode::Exact,
                HminModeName::PriorMeanApprox => HminMode::PriorMeanApprox,
            },
        },
        stage1_ratio: d.stage1_ratio,
        binary_noninformative_when_no_saving: d.binary_noninformative_when_no_saving,
    };
    design.validate()?;
    Ok(design)
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

fn expit(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Working-scale treatment parameter for control parameter `theta_c` and
/// effect `effect` (difference, or log odds ratio for binary outcomes).
pub fn treatment_parameter(model: &Model, theta_c: f64, effect: f64) -> f64 {
    match model {
        OutcomeModel::Continuous { .. } => theta_c + model.to_working(effect),
        OutcomeModel::Binary => expit(effect + logit(theta_c)),
    }
}

fn build_simulation(
    file: &ConfigFile,
    s: &SimulationSection,
    model: &Model,
    historical: &Prior,
    treatment: &Prior,
) -> Result<SimulationPlan, CliError> {
    let effect = match (model, s.effect, s.effect_rates) {
        (_, Some(e), None) if e.is_finite() => e,
        (OutcomeModel::Binary, None, Some([pc, pt])) => {
            if !(pc > 0.0 && pc < 1.0 && pt > 0.0 && pt < 1.0) {
                return Err(err("simulation.effect_rates", "rates must lie in (0, 1)"));
            }
            logit(pt) - logit(pc)
        }
        (OutcomeModel::Continuous { .. }, _, Some(_)) => {
            return Err(err(
                "simulation.effect_rates",
                "only meaningful for a binary model",
            ))
        }
        _ => {
            return Err(err(
                "simulation.effect",
                "give exactly one of `effect` or `effect_rates`",
            ))
        }
    };
    if s.hypotheses.is_empty() {
        return Err(err("simulation.hypotheses", "list must not be empty"));
    }
    if s.credible_intervals && !(s.credible_level > 0.0 && s.credible_level < 1.0) {
        return Err(err(
            "simulation.credible_level",
            format!("{} outside (0, 1)", s.credible_level),
        ));
    }
    let drifts = if s.drift_grid.is_empty() {
        vec![0.0]
    } else {
        s.drift_grid.clone()
    };
    let d = &file.design;
    let mut scenarios = Vec::new();
    let mut points = Vec::new();
    for (di, &drift) in drifts.iter().enumerate() {
        let theta_c = historical.mean() + model.to_working(drift);
        let seed = mix_seed(file.seed, di as u64);
        for &t in &d.t {
            for &gamma in &d.gamma {
                for &lambda in &d.lambda {
                    let design = build_design(d, t, gamma, lambda).map_err(|e| err("design", e))?;
                    let mut point = GridPoint {
                        drift,
                        t,
                        gamma,
                        lambda,
                        null: None,
                        alternative: None,
                    };
                    for &h in &s.hypotheses {
                        let (hypothesis, theta_t) = match h {
                            HypothesisName::Null => (Hypothesis::Null, theta_c),
                            HypothesisName::Alternative => (
                                Hypothesis::Alternative,
                                treatment_parameter(model, theta_c, effect),
                            ),
                        };
                        let slot = match hypothesis {
                            Hypothesis::Null => &mut point.null,
                            Hypothesis::Alternative => &mut point.alternative,
                        };
                        if slot.is_some() {
                            return Err(err(
                                "simulation.hypotheses",
                                format!("{} listed twice", hypothesis.name()),
                            ));
                        }
                        *slot = Some(scenarios.len());
                        let scenario = Scenario {
                            model: *model,
                            theta_control: theta_c,
                            theta_treatment: theta_t,
                            historical_prior: historical.clone(),
                            treatment_prior: treatment.clone(),
                            design,
                            replications: file.replications,
                            seed,
                            hypothesis,
                        };
                        scenario
                            .validate()
                            .map_err(|e| err(format!("simulation.drift_grid[{di}]"), e))?;
                        scenarios.push(scenario);
                    }
                    points.push(point);
                }
            }
        }
    }
    let options = CampaignOptions {
        paired_comparator: s.paired_comparator,
        analysis: AnalysisOptions {
            credible_level: s.credible_intervals.then_some(s.credible_level),
        },
        workers: None,
    };
    Ok(SimulationPlan {
        scenarios,
        points,
        options,
    })
}
