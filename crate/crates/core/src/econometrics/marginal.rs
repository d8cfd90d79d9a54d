use super::design::{DELTA_DENSITY, DENSITY, INTERACTION, RCA};
use super::fit::RegressionResult;
use crate::error::{Error, Result};

/// Effects of density and RCA evaluated at the sample means of the other
/// interacting variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarginalEffects {
    pub ame_density: f64,
    pub ame_rca: f64,
    pub se_density: f64,
    pub se_rca: f64,
    /// `(mean_rca, mean_density)`.
    pub evaluation_means: (f64, f64),
}

fn density_index(res: &RegressionResult) -> Result<usize> {
    res.index(DENSITY)
        .or_else(|| res.index(DELTA_DENSITY))
        .ok_or_else(|| Error::MissingCoefficient(DENSITY.into()))
}

/// Effect of `a` at `b = m` with interaction index `i`:
/// `β_a + m β_i`, variance `V_aa + m² V_ii + 2m V_ai`.
fn effect(res: &RegressionResult, a: usize, inter: Option<usize>, m: f64) -> (f64, f64) {
    let v = &res.vcov;
    match inter {
        Some(i) => {
            let est = res.estimates[a] + m * res.estimates[i];
            let var = v[(a, a)] + m * m * v[(i, i)] + 2.0 * m * v[(a, i)];
            (est, var.max(0.0).sqrt())
        }
        None => (res.estimates[a], v[(a, a)].max(0.0).sqrt()),
    }
}

pub fn marginal_effects(res: &RegressionResult, means: (f64, f64)) -> Result<MarginalEffects> {
    let (mean_rca, mean_density) = means;
    let d = density_index(res)?;
    let r = res
        .index(RCA)
        .ok_or_else(|| Error::MissingCoefficient(RCA.into()))?;
    let i = res.index(INTERACTION);
    let (ame_density, se_density) = effect(res, d, i, mean_rca);
    let (ame_rca, se_rca) = effect(res, r, i, mean_density);
    Ok(MarginalEffects {
        ame_density,
        ame_rca,
        se_density,
        se_rca,
        evaluation_means: means,
    })
}

/// Impact of a one-standard-deviation density shift, in percentage points.
pub fn sd_impact(ame: f64, sd_density: f64) -> Result<f64> {
    if !(sd_density > 0.0) {
        return Err(Error::InvalidValue(format!("standard deviation {sd_density} must be positive")));
    }
    Ok(ame * sd_density * 100.0)
}
