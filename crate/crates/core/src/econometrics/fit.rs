use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::design::{RegressionDataset, Subsample, CONSTANT, INTERACTION, RCA};
use super::linalg::{cluster_robust_vcov_with_bread, ols, xtx_inverse};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClusterLevel {
    Country,
    #[default]
    CountryDiscipline,
}

impl ClusterLevel {
    pub fn as_str(self) -> &'static str {
        match self {
            ClusterLevel::Country => "country",
            ClusterLevel::CountryDiscipline => "country-discipline",
        }
    }
}

impl fmt::Display for ClusterLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct FitOptions {
    pub cluster: ClusterLevel,
    /// Period id left out of the dummy set; defaults to the first one.
    pub base_period: Option<usize>,
}

/// Regressor names, the untransformed design and the response.
#[derive(Debug, Clone)]
pub struct RawDesign {
    pub names: Vec<String>,
    pub x: DMatrix<f64>,
    pub y: DVector<f64>,
}

pub fn raw_design(ds: &RegressionDataset, base_period: usize) -> RawDesign {
    let mut names = vec![ds.density_name.to_string(), RCA.to_string()];
    if ds.with_interaction {
        names.push(INTERACTION.to_string());
    }
    let slopes = names.len();
    let dummy_periods: Vec<usize> = (0..ds.periods.len()).filter(|&p| p != base_period).collect();
    names.extend(dummy_periods.iter().map(|&p| {
        let period = ds.periods[p];
        format!("period_{}_{}", period.start, period.end)
    }));

    let n = ds.rows.len();
    let mut x = DMatrix::zeros(n, names.len());
    for (i, row) in ds.rows.iter().enumerate() {
        x[(i, 0)] = row.x_density;
        x[(i, 1)] = row.x_rca;
        if ds.with_interaction {
            x[(i, 2)] = row.x_density * row.x_rca;
        }
        if let Ok(k) = dummy_periods.binary_search(&row.period_id) {
            x[(i, slopes + k)] = 1.0;
        }
    }
    let y = DVector::from_iterator(n, ds.rows.iter().map(|r| r.y));
    RawDesign { names, x, y }
}

/// Relative norm below which a demeaned column is treated as exactly zero.
pub const WITHIN_ZERO_TOL: f64 = 1e-10;

/// Design after subtracting unit means from every column and from `y`.
#[derive(Debug, Clone)]
pub struct WithinDesign {
    pub names: Vec<String>,
    pub x: DMatrix<f64>,
    pub y: DVector<f64>,
    pub grand_mean_x: DVector<f64>,
    pub grand_mean_y: f64,
    pub unit_ids: Vec<usize>,
    pub n_units: usize,
}

pub fn within_transform(ds: &RegressionDataset, base_period: usize) -> WithinDesign {
    let RawDesign { names, mut x, mut y } = raw_design(ds, base_period);
    let (n, k) = x.shape();
    let units = ds.n_units();
    let unit_ids: Vec<usize> = ds.rows.iter().map(|r| r.unit_id).collect();

    let grand_mean_x = DVector::from_iterator(k, (0..k).map(|j| x.column(j).mean()));
    let grand_mean_y = if n > 0 { y.mean() } else { 0.0 };

    let mut sizes = vec![0usize; units];
    let mut sum_x = DMatrix::<f64>::zeros(units, k);
    let mut sum_y = vec![0.0; units];
    for i in 0..n {
        let u = unit_ids[i];
        sizes[u] += 1;
        sum_y[u] += y[i];
        for j in 0..k {
            sum_x[(u, j)] += x[(i, j)];
        }
    }
    let raw_norms: Vec<f64> = (0..k).map(|j| x.column(j).norm()).collect();
    for i in 0..n {
        let u = unit_ids[i];
        let m = sizes[u] as f64;
        y[i] -= sum_y[u] / m;
        for j in 0..k {
            x[(i, j)] -= sum_x[(u, j)] / m;
        }
    }
    // columns constant within every unit are zero up to rounding; make it exact
    for (j, raw) in raw_norms.iter().enumerate() {
        if x.column(j).norm() <= WITHIN_ZERO_TOL * raw {
            x.column_mut(j).fill(0.0);
        }
    }
    WithinDesign {
        names,
        x,
        y,
        grand_mean_x,
        grand_mean_y,
        unit_ids,
        n_units: units,
    }
}

#[derive(Debug, Clone)]
pub struct RegressionResult {
    /// Regressor names; slopes first, then period dummies, then `constant`.
    pub names: Vec<String>,
    pub estimates: Vec<f64>,
    /// CR1 clustered covariance aligned with `names`.
    pub vcov: DMatrix<f64>,
    pub n_obs: usize,
    pub n_units: usize,
    pub n_clusters: usize,
    pub r_squared_within: f64,
    pub cluster_level: ClusterLevel,
    pub subsample: Option<Subsample>,
    /// `(mean_rca, mean_density)` of the estimation sample.
    pub means: Option<(f64, f64)>,
}

impl RegressionResult {
    /// Wraps externally supplied estimates, e.g. published coefficients.
    pub fn from_estimates(names: Vec<String>, estimates: Vec<f64>, vcov: DMatrix<f64>) -> Result<Self> {
        let k = names.len();
        if estimates.len() != k || vcov.shape() != (k, k) {
            return Err(Error::InconsistentInputs("names, estimates and vcov sizes differ".into()));
        }
        Ok(Self {
            names,
            estimates,
            vcov,
            n_obs: 0,
            n_units: 0,
            n_clusters: 0,
            r_squared_within: f64::NAN,
            cluster_level: ClusterLevel::default(),
            subsample: None,
            means: None,
        })
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn coefficient(&self, name: &str) -> Option<f64> {
        self.index(name).map(|i| self.estimates[i])
    }

    pub fn se(&self, name: &str) -> Option<f64> {
        self.index(name).map(|i| self.vcov[(i, i)].max(0.0).sqrt())
    }

    /// Two-sided p-value against Student t with `G - 1` degrees of freedom.
    pub fn p_value(&self, name: &str) -> Option<f64> {
        let est = self.coefficient(name)?;
        let se = self.se(name)?;
        if se == 0.0 || self.n_clusters < 2 {
            return None;
        }
        let t = StudentsT::new(0.0, 1.0, (self.n_clusters - 1) as f64).ok()?;
        Some(2.0 * (1.0 - t.cdf((est / se).abs())))
    }
}

pub fn stars(p: Option<f64>) -> &'static str {
    match p {
        Some(p) if p < 0.01 => "***",
        Some(p) if p < 0.05 => "**",
        Some(p) if p < 0.10 => "*",
        _ => "",
    }
}

/// Within estimator with period dummies and CR1 clustered covariance.
///
/// The reported constant is `ȳ - x̄'β` over grand means, obtained from the
/// demeaned design with grand means added back plus an intercept column.
/// The CR1 `K` counts the absorbed unit effects.
pub fn fit_fe(ds: &RegressionDataset, opts: FitOptions) -> Result<RegressionResult> {
    if ds.rows.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let base = opts.base_period.unwrap_or(0);
    if base >= ds.periods.len() {
        return Err(Error::InvalidValue(format!("base period {base} out of range")));
    }
    let wd = within_transform(ds, base);
    let fit = ols(&wd.x, &wd.y, &wd.names)?;
    let (n, k) = wd.x.shape();

    let constant = wd.grand_mean_y - wd.grand_mean_x.dot(&fit.coefficients);
    let mut x_aug = DMatrix::from_element(n, k + 1, 1.0);
    for j in 0..k {
        let m = wd.grand_mean_x[j];
        for i in 0..n {
            x_aug[(i, j)] = wd.x[(i, j)] + m;
        }
    }
    let mut names = wd.names.clone();
    names.push(CONSTANT.to_string());
    let bread = xtx_inverse(&x_aug, &names)?;

    let clusters: Vec<usize> = match opts.cluster {
        ClusterLevel::CountryDiscipline => wd.unit_ids.clone(),
        ClusterLevel::Country => wd.unit_ids.iter().map(|&u| ds.country_of_unit(u)).collect(),
    };
    let n_clusters = {
        let mut c = clusters.clone();
        c.sort_unstable();
        c.dedup();
        c.len()
    };
    let vcov = cluster_robust_vcov_with_bread(
        &x_aug,
        &fit.residuals,
        &clusters,
        wd.n_units.saturating_sub(1),
        &bread,
    )?;

    let rss = fit.residuals.norm_squared();
    let tss = wd.y.norm_squared();
    let r_squared_within = if tss > 0.0 { 1.0 - rss / tss } else { f64::NAN };

    let mut estimates: Vec<f64> = fit.coefficients.iter().copied().collect();
    estimates.push(constant);
    Ok(RegressionResult {
        names,
        estimates,
        vcov,
        n_obs: n,
        n_units: wd.n_units,
        n_clusters,
        r_squared_within,
        cluster_level: opts.cluster,
        subsample: Some(ds.subsample),
        means: Some(ds.means()),
    })
}
