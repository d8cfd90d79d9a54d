//! Descriptive layer: summary tables, RCA transition groups and Gaussian
//! kernel density curves.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::econometrics::{RegressionDataset, Subsample};
use crate::error::{Error, Result};
use crate::rca::RcaFlags;

pub const KDE_GRID_POINTS: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariableSummary {
    pub count: usize,
    pub mean: f64,
    /// Sample standard deviation (`n - 1`); 0 when `count == 1`.
    pub sd: f64,
    pub min: f64,
    pub max: f64,
    pub sd_defined: bool,
}

impl VariableSummary {
    pub fn from_values(values: &[f64]) -> Result<Self> {
        let n = values.len();
        if n == 0 {
            return Err(Error::EmptyDataset);
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let sd_defined = n > 1;
        let sd = if sd_defined {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(Self {
            count: n,
            mean: mean.clamp(min, max),
            sd,
            min,
            max,
            sd_defined,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryTable {
    pub subsample: Subsample,
    /// `(variable name, summary)` in display order.
    pub variables: Vec<(String, VariableSummary)>,
}

impl SummaryTable {
    pub fn get(&self, name: &str) -> Option<&VariableSummary> {
        self.variables.iter().find(|(n, _)| n == name).map(|(_, s)| s)
    }
}

pub const GROWTH_RCA: &str = "growth_rca";
pub const RCA_VALUE: &str = "rca_value";

pub fn summary_stats(ds: &RegressionDataset) -> Result<SummaryTable> {
    if ds.rows.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let col = |f: fn(&crate::econometrics::RegressionRow) -> f64| ds.rows.iter().map(f).collect::<Vec<_>>();
    Ok(SummaryTable {
        subsample: ds.subsample,
        variables: vec![
            (GROWTH_RCA.into(), VariableSummary::from_values(&col(|r| r.y))?),
            (ds.density_name.into(), VariableSummary::from_values(&col(|r| r.x_density))?),
            (RCA_VALUE.into(), VariableSummary::from_values(&col(|r| r.x_rca))?),
        ],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransitionGroup {
    Gained,
    StayedWithout,
    Kept,
    Lost,
}

impl TransitionGroup {
    pub fn of(before: bool, after: bool) -> Self {
        match (before, after) {
            (false, true) => TransitionGroup::Gained,
            (false, false) => TransitionGroup::StayedWithout,
            (true, true) => TransitionGroup::Kept,
            (true, false) => TransitionGroup::Lost,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TransitionGroup::Gained => "gained",
            TransitionGroup::StayedWithout => "stayed_without",
            TransitionGroup::Kept => "kept",
            TransitionGroup::Lost => "lost",
        }
    }
}

impl fmt::Display for TransitionGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub fn transition_split(
    flags_t: &RcaFlags,
    flags_t1: &RcaFlags,
    country: &str,
) -> Result<BTreeMap<String, TransitionGroup>> {
    if flags_t.metric != flags_t1.metric {
        return Err(Error::MetricMismatch(flags_t.metric.to_string(), flags_t1.metric.to_string()));
    }
    if flags_t.year >= flags_t1.year {
        return Err(Error::YearOrder {
            start: flags_t.year,
            end: flags_t1.year,
        });
    }
    if flags_t.disciplines != flags_t1.disciplines {
        return Err(Error::InconsistentInputs("discipline catalogs differ".into()));
    }
    let c0 = flags_t
        .country_index(country)
        .ok_or_else(|| Error::UnknownCountry(country.into()))?;
    let c1 = flags_t1
        .country_index(country)
        .ok_or_else(|| Error::UnknownCountry(country.into()))?;
    Ok(flags_t
        .disciplines
        .iter()
        .enumerate()
        .map(|(j, id)| (id.clone(), TransitionGroup::of(flags_t.get(c0, j), flags_t1.get(c1, j))))
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityCurve {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub bandwidth: f64,
    pub kernel: &'static str,
    pub bandwidth_rule: &'static str,
    pub group: Option<TransitionGroup>,
}

impl DensityCurve {
    pub fn trapezoid_integral(&self) -> f64 {
        self.grid
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(x, y)| (x[1] - x[0]) * (y[0] + y[1]) * 0.5)
            .sum()
    }
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// `0.9 · min(sd, IQR/1.34) · n^(-1/5)`; falls back to `sd` when the IQR is 0.
pub fn silverman_bandwidth(values: &[f64]) -> Result<f64> {
    let n = values.len();
    if n < 2 {
        return Err(Error::DegenerateSample("need at least two values".into()));
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let sd = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let iqr = quantile(&sorted, 0.75) - quantile(&sorted, 0.25);
    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    if !(spread > 0.0) {
        return Err(Error::DegenerateSample("all values are equal".into()));
    }
    Ok(0.9 * spread * (n as f64).powf(-0.2))
}

/// Gaussian kernel density estimate of `values` with bandwidth `h` at `x`.
pub fn kde_at(values: &[f64], h: f64, x: f64) -> f64 {
    let sum: f64 = values
        .iter()
        .map(|&v| {
            let u = (x - v) / h;
            (-0.5 * u * u).exp()
        })
        .sum();
    sum / (values.len() as f64 * h * (2.0 * PI).sqrt())
}

/// Gaussian KDE on 512 equally spaced points over `[min - 3h, max + 3h]`.
pub fn kde(values: &[f64], bandwidth: Option<f64>) -> Result<DensityCurve> {
    if values.is_empty() {
        return Err(Error::DegenerateSample("empty sample".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::DegenerateSample("non-finite value".into()));
    }
    let (h, rule) = match bandwidth {
        Some(h) if h > 0.0 && h.is_finite() => (h, "fixed"),
        Some(h) => return Err(Error::InvalidValue(format!("bandwidth {h} must be positive"))),
        None => (silverman_bandwidth(values)?, "silverman"),
    };
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = (min - 3.0 * h, max + 3.0 * h);
    let step = (hi - lo) / (KDE_GRID_POINTS - 1) as f64;
    let grid: Vec<f64> = (0..KDE_GRID_POINTS).map(|k| lo + step * k as f64).collect();
    let values = grid.iter().map(|&x| kde_at(values, h, x)).collect();
    Ok(DensityCurve {
        grid,
        values,
        bandwidth: h,
        kernel: "gaussian",
        bandwidth_rule: rule,
        group: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::panel::Metric;

    #[test]
    fn summary_of_one_two_three() {
        let s = VariableSummary::from_values(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!((s.count, s.mean, s.sd, s.min, s.max), (3, 2.0, 1.0, 1.0, 3.0));
        let one = VariableSummary::from_values(&[4.0]).unwrap();
        assert_eq!(one.sd, 0.0);
        assert!(!one.sd_defined);
        assert!(matches!(VariableSummary::from_values(&[]), Err(Error::EmptyDataset)));
    }

    fn flags(year: i32, row: &[bool]) -> RcaFlags {
        RcaFlags {
            year,
            metric: Metric::Documents,
            countries: vec!["c".into()],
            disciplines: (0..row.len()).map(|j| format!("d{j}")).collect(),
            flags: row.to_vec(),
        }
    }

    #[test]
    fn transitions() {
        let t = transition_split(
            &flags(2000, &[false, false, true, true]),
            &flags(2004, &[true, false, true, false]),
            "c",
        )
        .unwrap();
        let groups: Vec<_> = t.values().copied().collect();
        assert_eq!(
            groups,
            vec![
                TransitionGroup::Gained,
                TransitionGroup::StayedWithout,
                TransitionGroup::Kept,
                TransitionGroup::Lost
            ]
        );
        let mut cit = flags(2004, &[true, false, true, false]);
        cit.metric = Metric::Citations;
        assert!(matches!(
            transition_split(&flags(2000, &[false; 4]), &cit, "c"),
            Err(Error::MetricMismatch(..))
        ));
    }

    #[test]
    fn kde_center_and_symmetry() {
        assert!((kde_at(&[0.0], 1.0, 0.0) - 0.398_942_280_401_432_7).abs() < 1e-15);
        let c = kde(&[0.0], Some(1.0)).unwrap();
        assert_eq!(c.grid.len(), KDE_GRID_POINTS);
        assert!((c.grid[0] + 3.0).abs() < 1e-12);
        assert!((c.grid[KDE_GRID_POINTS - 1] - 3.0).abs() < 1e-12);

        let s = kde(&[-0.7, 0.7], None).unwrap();
        for k in 0..KDE_GRID_POINTS {
            assert!((s.values[k] - s.values[KDE_GRID_POINTS - 1 - k]).abs() < 1e-12);
            assert!((s.grid[k] + s.grid[KDE_GRID_POINTS - 1 - k]).abs() < 1e-12);
        }
    }

    #[test]
    fn kde_degenerate() {
        assert!(matches!(kde(&[1.0, 1.0, 1.0], None), Err(Error::DegenerateSample(_))));
        assert!(matches!(kde(&[1.0], None), Err(Error::DegenerateSample(_))));
        assert!(kde(&[1.0, 1.0], Some(0.5)).is_ok());
        assert!(kde(&[1.0, 2.0], Some(-1.0)).is_err());
    }

    #[test]
    fn kde_integrates_to_one() {
        let c = kde(&[0.1, 0.2, 0.25, 0.5, 0.9], None).unwrap();
        assert!((c.trapezoid_integral() - 1.0).abs() < 0.01);
        assert_eq!(c.bandwidth_rule, "silverman");
    }
}
