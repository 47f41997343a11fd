use std::fmt;

use crate::error::{Error, Result};
use crate::numerics::std_normal_cdf;
use crate::scalar::{ln_beta, log_sum_exp, Real};

/// Conjugate family of every component of a [`PriorSpec`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Normal,
    Beta,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Normal => "normal",
            Family::Beta => "beta",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One mixture component.
///
/// `location` is the mean in both families. `scale` is the standard deviation
/// for a normal component and the precision `φ = a + b` for a beta component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Component<T> {
    pub weight: T,
    pub location: T,
    pub scale: T,
}

impl<T: Real> Component<T> {
    pub fn new(weight: T, location: T, scale: T) -> Self {
        Component {
            weight,
            location,
            scale,
        }
    }

    /// Beta shape parameters `(a, b) = (mφ, (1 - m)φ)`.
    pub fn shapes(&self) -> (T, T) {
        (
            self.location * self.scale,
            (T::one() - self.location) * self.scale,
        )
    }
}

/// Weighted mixture of conjugate components; a single prior is a mixture of length one.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorSpec<T> {
    family: Family,
    components: Vec<Component<T>>,
}

const WEIGHT_SUM_TOL: f64 = 1e-12;

impl<T: Real> PriorSpec<T> {
    pub fn normal(mean: T, sd: T) -> Result<Self> {
        Self::mixture(Family::Normal, vec![Component::new(T::one(), mean, sd)])
    }

    /// Beta prior in mean/precision form.
    pub fn beta(mean: T, precision: T) -> Result<Self> {
        Self::mixture(
            Family::Beta,
            vec![Component::new(T::one(), mean, precision)],
        )
    }

    pub fn beta_shapes(a: T, b: T) -> Result<Self> {
        if !(a > T::zero() && b > T::zero()) {
            return Err(Error::InvalidPrior(format!(
                "beta shapes must be positive, got ({a}, {b})"
            )));
        }
        Self::beta(a / (a + b), a + b)
    }

    pub fn mixture(family: Family, components: Vec<Component<T>>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidPrior("mixture has no components".into()));
        }
        let mut total = T::zero();
        for (i, c) in components.iter().enumerate() {
            if !(c.weight >= T::zero() && c.weight.is_finite()) {
                return Err(Error::InvalidPrior(format!(
                    "component {i}: weight {} is not a probability",
                    c.weight
                )));
            }
            if !(c.scale > T::zero() && c.scale.is_finite()) {
                return Err(Error::InvalidPrior(format!(
                    "component {i}: scale {} must be positive",
                    c.scale
                )));
            }
            if !c.location.is_finite() {
                return Err(Error::InvalidPrior(format!(
                    "component {i}: non-finite mean"
                )));
            }
            if family == Family::Beta && !(c.location > T::zero() && c.location < T::one()) {
                return Err(Error::InvalidPrior(format!(
                    "component {i}: beta mean {} outside (0, 1)",
                    c.location
                )));
            }
            total = total + c.weight;
        }
        let tol = T::lit(WEIGHT_SUM_TOL.max(T::TOL_FLOOR));
        if (total - T::one()).abs() > tol {
            return Err(Error::InvalidPrior(format!(
                "mixture weights sum to {total}, expected 1"
            )));
        }
        Ok(PriorSpec { family, components })
    }

    /// Builds a mixture from unnormalized log-weights, renormalizing them.
    pub(crate) fn from_log_weights(family: Family, comps: Vec<(T, T, T)>) -> Self {
        let logs: Vec<T> = comps.iter().map(|c| c.0).collect();
        let norm = log_sum_exp(&logs);
        let components = comps
            .into_iter()
            .map(|(lw, location, scale)| Component::new((lw - norm).exp(), location, scale))
            .collect();
        PriorSpec { family, components }
    }

    pub(crate) fn with_components(&self, components: Vec<Component<T>>) -> Self {
        PriorSpec {
            family: self.family,
            components,
        }
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn components(&self) -> &[Component<T>] {
        &self.components
    }

    pub fn is_single(&self) -> bool {
        self.components.len() == 1
    }

    pub fn single(&self) -> Option<&Component<T>> {
        match self.components.as_slice() {
            [c] => Some(c),
            _ => None,
        }
    }

    pub fn mean(&self) -> T {
        self.components.iter().map(|c| c.weight * c.location).sum()
    }

    pub fn variance(&self) -> T {
        let mean = self.mean();
        self.components
            .iter()
            .map(|c| {
                let var = match self.family {
                    Family::Normal => c.scale * c.scale,
                    Family::Beta => c.location * (T::one() - c.location) / (c.scale + T::one()),
                };
                c.weight * (var + (c.location - mean).powi(2))
            })
            .sum()
    }

    pub fn sd(&self) -> T {
        self.variance().sqrt()
    }

    /// Integration range that holds all but a negligible amount of mass.
    pub fn support(&self) -> (T, T) {
        match self.family {
            Family::Normal => {
                let ten = T::lit(10.0);
                let lo = self
                    .components
                    .iter()
                    .map(|c| c.location)
                    .fold(T::infinity(), T::min);
                let hi = self
                    .components
                    .iter()
                    .map(|c| c.location)
                    .fold(T::neg_infinity(), T::max);
                let sd = self
                    .components
                    .iter()
                    .map(|c| c.scale)
                    .fold(T::zero(), T::max);
                (lo - ten * sd, hi + ten * sd)
            }
            Family::Beta => beta_support(),
        }
    }

    /// Quadrature breakpoints: the support ends plus each component's centre
    /// and ±1, ±4, ±8 standard deviations, clipped to the support.
    pub fn breakpoints(&self) -> Vec<T> {
        let (lo, hi) = self.support();
        let mut pts = vec![lo, hi];
        for c in &self.components {
            let sd = match self.family {
                Family::Normal => c.scale,
                Family::Beta => {
                    (c.location * (T::one() - c.location) / (c.scale + T::one())).sqrt()
                }
            };
            for k in [-8.0, -4.0, -1.0, 0.0, 1.0, 4.0, 8.0] {
                let x = c.location + T::lit(k) * sd;
                if x > lo && x < hi {
                    pts.push(x);
                }
            }
        }
        pts
    }

    pub fn ln_pdf(&self, x: T) -> T {
        if self.components.len() == 1 {
            return component_ln_pdf(self.family, &self.components[0], x);
        }
        let terms: Vec<T> = self
            .components
            .iter()
            .filter(|c| c.weight > T::zero())
            .map(|c| c.weight.ln() + component_ln_pdf(self.family, c, x))
            .collect();
        log_sum_exp(&terms)
    }

    pub fn pdf(&self, x: T) -> T {
        match self.family {
            Family::Beta if !(x > T::zero() && x < T::one()) => T::zero(),
            _ => self.ln_pdf(x).exp(),
        }
    }

    pub fn cdf(&self, x: T) -> T {
        self.components
            .iter()
            .map(|c| {
                c.weight
                    * match self.family {
                        Family::Normal => std_normal_cdf((x - c.location) / c.scale),
                        Family::Beta => {
                            let (a, b) = c.shapes();
                            T::beta_reg(a, b, x)
                        }
                    }
            })
            .sum()
    }
}

fn beta_support<T: Real>() -> (T, T) {
    (T::lit(1e-12), T::one() - T::lit(1e-12))
}

pub(crate) fn component_ln_pdf<T: Real>(family: Family, c: &Component<T>, x: T) -> T {
    match family {
        Family::Normal => {
            let z = (x - c.location) / c.scale;
            -T::lit(0.5) * z * z - T::lit(0.5) * T::TAU().ln() - c.scale.ln()
        }
        Family::Beta => {
            if !(x > T::zero() && x < T::one()) {
                return T::neg_infinity();
            }
            let (a, b) = c.shapes();
            (a - T::one()) * x.ln() + (b - T::one()) * (-x).ln_1p() - ln_beta(a, b)
        }
    }
}

impl<T: Real> fmt::Display for PriorSpec<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .components
            .iter()
            .map(|c| match self.family {
                Family::Normal => format!("{}·N({}, {}²)", c.weight, c.location, c.scale),
                Family::Beta => {
                    let (a, b) = c.shapes();
                    format!("{}·Beta({a}, {b})", c.weight)
                }
            })
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

/// Endpoint family of the trial.
///
/// Continuous outcomes have a known standard deviation; all data and priors
/// handed to the numerical routines are on the working scale where that
/// standard deviation is one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OutcomeModel<T> {
    Continuous { known_sd: T },
    Binary,
}

impl<T: Real> OutcomeModel<T> {
    pub fn continuous(known_sd: T) -> Result<Self> {
        if !(known_sd > T::zero() && known_sd.is_finite()) {
            return Err(Error::param(
                "known_sd",
                format!("must be positive, got {known_sd}"),
            ));
        }
        Ok(OutcomeModel::Continuous { known_sd })
    }

    pub fn family(&self) -> Family {
        match self {
            OutcomeModel::Continuous { .. } => Family::Normal,
            OutcomeModel::Binary => Family::Beta,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            OutcomeModel::Continuous { .. } => "continuous",
            OutcomeModel::Binary => "binary",
        }
    }

    /// Factor converting working-scale quantities back to outcome units.
    pub fn reporting_scale(&self) -> T {
        match self {
            OutcomeModel::Continuous { known_sd } => *known_sd,
            OutcomeModel::Binary => T::one(),
        }
    }

    pub fn to_working(&self, value: T) -> T {
        value / self.reporting_scale()
    }

    /// Moves a prior stated in outcome units onto the working scale.
    pub fn working_prior(&self, prior: &PriorSpec<T>) -> PriorSpec<T> {
        match self {
            OutcomeModel::Binary => prior.clone(),
            OutcomeModel::Continuous { known_sd } => prior.with_components(
                prior
                    .components
                    .iter()
                    .map(|c| Component::new(c.weight, c.location / *known_sd, c.scale / *known_sd))
                    .collect(),
            ),
        }
    }

    pub fn check_prior(&self, prior: &PriorSpec<T>) -> Result<()> {
        if prior.family() != self.family() {
            return Err(Error::FamilyMismatch {
                prior: prior.family().name(),
                model: self.name(),
            });
        }
        Ok(())
    }
}

/// Sufficient statistics of one arm: count and sum (successes for binary data).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DataSummary<T> {
    pub n: u64,
    pub sum: T,
}

impl<T: Real> DataSummary<T> {
    pub fn new(n: u64, sum: T) -> Self {
        DataSummary { n, sum }
    }

    pub fn empty() -> Self {
        DataSummary {
            n: 0,
            sum: T::zero(),
        }
    }

    pub fn mean(&self) -> Option<T> {
        (self.n > 0).then(|| self.sum / T::from_u64(self.n).unwrap())
    }

    pub fn merge(&self, other: &Self) -> Self {
        DataSummary {
            n: self.n + other.n,
            sum: self.sum + other.sum,
        }
    }

    pub fn validate(&self, model: &OutcomeModel<T>) -> Result<()> {
        if !self.sum.is_finite() {
            return Err(Error::InvalidData("sum is not finite".into()));
        }
        if let OutcomeModel::Binary = model {
            let n = T::from_u64(self.n).unwrap();
            if self.sum < T::zero() || self.sum > n || self.sum.fract() != T::zero() {
                return Err(Error::InvalidData(format!(
                    "{} successes out of {} trials",
                    self.sum, self.n
                )));
            }
        }
        Ok(())
    }
}
