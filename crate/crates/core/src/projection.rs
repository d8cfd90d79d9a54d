//! Growth attributable to the density channel alone, per discipline, and the
//! bottom/top rankings built from it.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::econometrics::{marginal_effects, RegressionResult, Subsample, DELTA_DENSITY, DENSITY, INTERACTION};
use crate::error::{Error, Result};
use crate::panel::Metric;
use crate::proximity::DensityVector;
use crate::rca::RcaSlice;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProjectionMode {
    /// `(α₁ + α₃·rca_j) · density_j`.
    #[default]
    Interaction,
    /// Density marginal effect at the estimation-sample mean RCA, times density.
    MarginalAtMeans,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionRow {
    pub discipline: String,
    pub projected_growth: f64,
    pub base_rca: f64,
    pub density: f64,
    pub main_area: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionReport {
    pub country: String,
    pub base_year: i32,
    pub metric: Metric,
    pub mode: ProjectionMode,
    /// Ascending by projection, ties by discipline id.
    pub rows: Vec<ProjectionRow>,
    /// Disciplines of the subsample skipped for lack of density.
    pub n_skipped: usize,
}

fn by_projection(a: &ProjectionRow, b: &ProjectionRow) -> Ordering {
    a.projected_growth
        .total_cmp(&b.projected_growth)
        .then_with(|| a.discipline.cmp(&b.discipline))
}

pub fn project_growth(
    res: &RegressionResult,
    density: &DensityVector,
    rca: &RcaSlice,
    country: &str,
    subsample: Option<Subsample>,
    mode: ProjectionMode,
) -> Result<ProjectionReport> {
    if density.country != country || density.year != rca.year || density.metric != rca.metric {
        return Err(Error::MissingDensity(format!(
            "{country} {} {} (got {} {} {})",
            rca.metric, rca.year, density.country, density.metric, density.year
        )));
    }
    if density.disciplines != rca.disciplines {
        return Err(Error::InconsistentInputs("density and RCA catalogs differ".into()));
    }
    let c = rca
        .countries
        .iter()
        .position(|id| id == country)
        .ok_or_else(|| Error::UnknownCountry(country.to_string()))?;

    let a1 = res
        .coefficient(DENSITY)
        .or_else(|| res.coefficient(DELTA_DENSITY))
        .ok_or_else(|| Error::MissingCoefficient(DENSITY.into()))?;
    let a3 = res.coefficient(INTERACTION).unwrap_or(0.0);
    let slope_at_means = match mode {
        ProjectionMode::Interaction => None,
        ProjectionMode::MarginalAtMeans => {
            let means = res
                .means
                .ok_or_else(|| Error::InvalidValue("regression carries no sample means".into()))?;
            Some(marginal_effects(res, means)?.ame_density)
        }
    };

    let mut rows = Vec::new();
    let mut n_skipped = 0;
    for (j, id) in rca.disciplines.iter().enumerate() {
        let Some(base_rca) = rca.get(c, j) else { continue };
        if subsample.is_some_and(|s| !s.contains(base_rca)) {
            continue;
        }
        let Some(d) = density.density[j] else {
            n_skipped += 1;
            continue;
        };
        let slope = slope_at_means.unwrap_or(a1 + a3 * base_rca);
        rows.push(ProjectionRow {
            discipline: id.clone(),
            projected_growth: slope * d,
            base_rca,
            density: d,
            main_area: None,
        });
    }
    rows.sort_by(by_projection);
    Ok(ProjectionReport {
        country: country.to_string(),
        base_year: rca.year,
        metric: rca.metric,
        mode,
        rows,
        n_skipped,
    })
}

impl ProjectionReport {
    pub fn with_areas(mut self, areas: &BTreeMap<String, String>) -> Self {
        for r in &mut self.rows {
            r.main_area = areas.get(&r.discipline).cloned();
        }
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ranking {
    /// Lowest projections, ascending.
    pub bottom: Vec<ProjectionRow>,
    /// Highest projections, ascending.
    pub top: Vec<ProjectionRow>,
    /// Fewer than `2k` eligible rows were available.
    pub too_few_rows: bool,
}

/// Bottom and top `k` among disciplines without RCA (`base_rca < 1`).
pub fn rank_disciplines(report: &ProjectionReport, k: usize) -> Ranking {
    let mut eligible: Vec<ProjectionRow> = report
        .rows
        .iter()
        .filter(|r| r.base_rca < 1.0)
        .cloned()
        .collect();
    eligible.sort_by(by_projection);
    let n = eligible.len();
    let n_bottom = k.min(n);
    let n_top = k.min(n - n_bottom);
    let top = eligible.split_off(n - n_top);
    eligible.truncate(n_bottom);
    Ranking {
        bottom: eligible,
        top,
        too_few_rows: n < 2 * k,
    }
}

/// Reads a `discipline,main_area` CSV.
pub fn read_area_map(path: impl AsRef<Path>) -> Result<BTreeMap<String, String>> {
    let path = path.as_ref();
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut out = BTreeMap::new();
    for (n, rec) in rdr.records().enumerate() {
        let rec = rec?;
        match (rec.get(0), rec.get(1)) {
            (Some(d), Some(a)) => {
                out.insert(d.to_string(), a.to_string());
            }
            _ => {
                return Err(Error::MalformedRow {
                    row: n + 2,
                    reason: "expected discipline,main_area".into(),
                })
            }
        }
    }
    Ok(out)
}
