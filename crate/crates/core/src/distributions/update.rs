use super::prior::{Family, OutcomeModel, PriorSpec};
use super::DataSummary;
use crate::error::Result;
use crate::numerics::std_normal_pdf;
use crate::scalar::{ln_beta, Real};

/// Exact conjugate update of a mixture prior.
///
/// Each component is updated in closed form and its weight is multiplied by
/// the component's marginal likelihood of the sufficient statistics. Factors
/// shared by every component (binomial coefficient, within-sample spread)
/// cancel in the renormalization and are left out.
pub fn posterior_update<T: Real>(
    prior: &PriorSpec<T>,
    data: &DataSummary<T>,
    model: &OutcomeModel<T>,
) -> Result<PriorSpec<T>> {
    model.check_prior(prior)?;
    data.validate(model)?;
    if data.n == 0 {
        return Ok(prior.clone());
    }
    let n = T::from_u64(data.n).unwrap();
    let comps: Vec<(T, T, T)> = match prior.family() {
        Family::Normal => {
            let ybar = data.sum / n;
            prior
                .components()
                .iter()
                .map(|c| {
                    let prior_prec = (c.scale * c.scale).recip();
                    let post_prec = prior_prec + n;
                    let post_mean = (c.location * prior_prec + data.sum) / post_prec;
                    // ȳ ~ N(m, s² + 1/n) under this component
                    let marg_sd = (c.scale * c.scale + n.recip()).sqrt();
                    let log_marg =
                        std_normal_pdf((ybar - c.location) / marg_sd).ln() - marg_sd.ln();
                    (
                        c.weight.ln() + log_marg,
                        post_mean,
                        post_prec.sqrt().recip(),
                    )
                })
                .collect()
        }
        Family::Beta => {
            let failures = n - data.sum;
            prior
                .components()
                .iter()
                .map(|c| {
                    let (a, b) = c.shapes();
                    let (a1, b1) = (a + data.sum, b + failures);
                    let log_marg = ln_beta(a1, b1) - ln_beta(a, b);
                    (c.weight.ln() + log_marg, a1 / (a1 + b1), a1 + b1)
                })
                .collect()
        }
    };
    Ok(PriorSpec::from_log_weights(prior.family(), comps))
}
