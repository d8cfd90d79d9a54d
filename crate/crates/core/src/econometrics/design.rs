use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::growth::{GrowthPanel, Period};
use crate::proximity::DensityPanel;

pub const DENSITY: &str = "avg_proximity";
pub const DELTA_DENSITY: &str = "d_avg_proximity";
pub const RCA: &str = "rca";
pub const INTERACTION: &str = "avg_proximity_x_rca";
pub const CONSTANT: &str = "constant";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Subsample {
    /// Start-of-period RCA below one.
    RcaLt1,
    /// Start-of-period RCA at least one.
    RcaGe1,
}

impl Subsample {
    pub fn of(rca: f64) -> Self {
        if rca >= 1.0 {
            Subsample::RcaGe1
        } else {
            Subsample::RcaLt1
        }
    }

    pub fn contains(self, rca: f64) -> bool {
        Self::of(rca) == self
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Subsample::RcaLt1 => "rca_lt_1",
            Subsample::RcaGe1 => "rca_ge_1",
        }
    }
}

impl fmt::Display for Subsample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Where the density regressor comes from.
#[derive(Debug, Clone, Copy)]
pub enum DensitySource<'a> {
    /// Density at the start year of each period.
    Level(&'a DensityPanel),
    /// Density change from period start to period end.
    Delta(&'a DensityPanel),
}

impl DensitySource<'_> {
    fn panel(&self) -> &DensityPanel {
        match self {
            DensitySource::Level(p) | DensitySource::Delta(p) => p,
        }
    }

    fn lookup(&self, period: Period, country: usize, discipline: usize) -> Option<f64> {
        match self {
            DensitySource::Level(p) => p.get(period.start, country, discipline),
            DensitySource::Delta(p) => p.delta(period.start, period.end, country, discipline),
        }
    }

    pub fn regressor_name(&self) -> &'static str {
        match self {
            DensitySource::Level(_) => DENSITY,
            DensitySource::Delta(_) => DELTA_DENSITY,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegressionRow {
    pub y: f64,
    pub x_density: f64,
    pub x_rca: f64,
    pub period_id: usize,
    pub unit_id: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionDataset {
    pub rows: Vec<RegressionRow>,
    pub subsample: Subsample,
    pub with_interaction: bool,
    pub density_name: &'static str,
    /// `(country, discipline)` catalog indices per unit id.
    pub units: Vec<(usize, usize)>,
    /// Period per period id, ascending.
    pub periods: Vec<Period>,
    pub countries: Vec<String>,
    pub disciplines: Vec<String>,
    /// Growth rows of this subsample dropped for lack of a density value.
    pub n_dropped: usize,
}

impl RegressionDataset {
    pub fn n_units(&self) -> usize {
        self.units.len()
    }

    pub fn country_of_unit(&self, unit: usize) -> usize {
        self.units[unit].0
    }

    /// `(mean_rca, mean_density)` over the raw regressors.
    pub fn means(&self) -> (f64, f64) {
        let n = self.rows.len() as f64;
        let (r, d) = self
            .rows
            .iter()
            .fold((0.0, 0.0), |(r, d), row| (r + row.x_rca, d + row.x_density));
        (r / n, d / n)
    }
}

/// Joins growth rows with density at period start (or its change over the
/// period) and keeps the requested subsample.
pub fn build_design(
    growth: &GrowthPanel,
    density: DensitySource<'_>,
    subsample: Subsample,
    with_interaction: bool,
) -> Result<RegressionDataset> {
    let dp = density.panel();
    if dp.countries != growth.countries || dp.disciplines != growth.disciplines {
        return Err(crate::Error::InconsistentInputs(
            "density and growth panels use different catalogs".into(),
        ));
    }
    let mut joined = Vec::new();
    let mut n_dropped = 0;
    for row in growth.rows.iter().filter(|r| subsample.contains(r.start_value)) {
        match density.lookup(growth.period(row), row.country, row.discipline) {
            Some(x) => joined.push((row, x)),
            None => n_dropped += 1,
        }
    }

    let mut unit_ids: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for (row, _) in &joined {
        let next = unit_ids.len();
        unit_ids.entry((row.country, row.discipline)).or_insert(next);
    }
    let mut units = vec![(0, 0); unit_ids.len()];
    for (&k, &v) in &unit_ids {
        units[v] = k;
    }
    let mut grid_ids: Vec<usize> = joined.iter().map(|(r, _)| r.period).collect();
    grid_ids.sort_unstable();
    grid_ids.dedup();
    let periods = grid_ids.iter().map(|&k| growth.grid.periods()[k]).collect();

    let rows = joined
        .into_iter()
        .map(|(r, x)| RegressionRow {
            y: r.growth,
            x_density: x,
            x_rca: r.start_value,
            period_id: grid_ids.binary_search(&r.period).expect("period collected above"),
            unit_id: unit_ids[&(r.country, r.discipline)],
        })
        .collect();

    Ok(RegressionDataset {
        rows,
        subsample,
        with_interaction,
        density_name: density.regressor_name(),
        units,
        periods,
        countries: growth.countries.clone(),
        disciplines: growth.disciplines.clone(),
        n_dropped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::growth::{GrowthRow, GrowthTarget, PeriodGrid};
    use crate::panel::Metric;

    fn fixture() -> (GrowthPanel, DensityPanel) {
        let grid = PeriodGrid::new([(2000, 2002), (2002, 2004)]).unwrap();
        let row = |country, discipline, period, start_value| GrowthRow {
            country,
            discipline,
            period,
            start_value,
            growth: 0.1,
        };
        let growth = GrowthPanel {
            metric: Metric::Documents,
            target: GrowthTarget::Rca,
            countries: vec!["a".into(), "b".into()],
            disciplines: vec!["x".into(), "y".into()],
            grid,
            rows: vec![
                row(0, 0, 0, 0.99),
                row(0, 0, 1, 1.00),
                row(0, 1, 1, 2.0),
                row(1, 0, 0, 0.5),
                row(1, 1, 0, 0.7),
            ],
        };
        let mut by_year = BTreeMap::new();
        by_year.insert(2000, vec![Some(0.3), Some(0.2), Some(0.1), None]);
        by_year.insert(2002, vec![Some(0.35), Some(0.4), Some(0.1), Some(0.6)]);
        by_year.insert(2004, vec![Some(0.5), Some(0.5), Some(0.5), Some(0.5)]);
        let density = DensityPanel {
            metric: Metric::Documents,
            countries: growth.countries.clone(),
            disciplines: growth.disciplines.clone(),
            by_year,
        };
        (growth, density)
    }

    #[test]
    fn threshold_split() {
        let (g, d) = fixture();
        let lt = build_design(&g, DensitySource::Level(&d), Subsample::RcaLt1, false).unwrap();
        let ge = build_design(&g, DensitySource::Level(&d), Subsample::RcaGe1, false).unwrap();
        assert!(lt.rows.iter().all(|r| r.x_rca < 1.0));
        assert!(ge.rows.iter().all(|r| r.x_rca >= 1.0));
        assert!(lt.rows.iter().any(|r| r.x_rca == 0.99));
        assert!(ge.rows.iter().any(|r| r.x_rca == 1.0));
        // (b, y) has no density in 2000
        assert_eq!(lt.rows.len(), 2);
        assert_eq!(lt.n_dropped, 1);
        assert_eq!(ge.rows.len(), 2);
    }

    #[test]
    fn density_at_start_and_delta() {
        let (g, d) = fixture();
        let ge = build_design(&g, DensitySource::Level(&d), Subsample::RcaGe1, true).unwrap();
        // (a, y) over 2002-2004 uses the 2002 density 0.4
        let r = ge.rows.iter().find(|r| r.x_rca == 2.0).unwrap();
        assert_eq!(r.x_density, 0.4);
        assert_eq!(ge.density_name, DENSITY);
        let delta = build_design(&g, DensitySource::Delta(&d), Subsample::RcaGe1, false).unwrap();
        let r = delta.rows.iter().find(|r| r.x_rca == 2.0).unwrap();
        assert!((r.x_density - 0.1).abs() < 1e-15);
        assert_eq!(delta.density_name, DELTA_DENSITY);
    }

    #[test]
    fn dense_codes() {
        let (g, d) = fixture();
        let ge = build_design(&g, DensitySource::Level(&d), Subsample::RcaGe1, false).unwrap();
        assert_eq!(ge.units, vec![(0, 0), (0, 1)]);
        assert_eq!(ge.periods.len(), 1);
        assert!(ge.rows.iter().all(|r| r.period_id == 0));
    }
}
