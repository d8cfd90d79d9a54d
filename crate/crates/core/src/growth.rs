//! Annualized geometric growth of RCA (and of raw counts) over a fixed grid
//! of periods.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::panel::{Metric, Panel};
use crate::rca::{rca_for_year, RcaSlice};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Period {
    pub start: i32,
    pub end: i32,
}

impl Period {
    pub fn n_years(&self) -> u32 {
        (self.end - self.start) as u32
    }
}

impl fmt::Display for Period {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.start, self.end)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(i32, i32)>", into = "Vec<(i32, i32)>")]
pub struct PeriodGrid {
    periods: Vec<Period>,
}

impl PeriodGrid {
    pub fn new(pairs: impl IntoIterator<Item = (i32, i32)>) -> Result<Self> {
        let periods: Vec<Period> = pairs
            .into_iter()
            .map(|(start, end)| Period { start, end })
            .collect();
        if periods.is_empty() {
            return Err(Error::InvalidGrid("no periods".into()));
        }
        for p in &periods {
            if p.start >= p.end {
                return Err(Error::InvalidGrid(format!("period {p} does not advance")));
            }
        }
        for w in periods.windows(2) {
            if w[1].start < w[0].end {
                return Err(Error::InvalidGrid(format!("periods {} and {} overlap", w[0], w[1])));
            }
        }
        Ok(Self { periods })
    }

    pub fn periods(&self) -> &[Period] {
        &self.periods
    }

    /// Every year that is an endpoint of some period, ascending.
    pub fn endpoints(&self) -> Vec<i32> {
        let mut ys: Vec<i32> = self.periods.iter().flat_map(|p| [p.start, p.end]).collect();
        ys.sort_unstable();
        ys.dedup();
        ys
    }

    pub fn position(&self, period: Period) -> Option<usize> {
        self.periods.iter().position(|p| *p == period)
    }
}

impl Default for PeriodGrid {
    fn default() -> Self {
        Self::new([
            (1996, 2000),
            (2000, 2004),
            (2004, 2008),
            (2008, 2012),
            (2012, 2016),
            (2016, 2019),
        ])
        .expect("default grid is valid")
    }
}

impl TryFrom<Vec<(i32, i32)>> for PeriodGrid {
    type Error = Error;

    fn try_from(v: Vec<(i32, i32)>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<PeriodGrid> for Vec<(i32, i32)> {
    fn from(g: PeriodGrid) -> Self {
        g.periods.iter().map(|p| (p.start, p.end)).collect()
    }
}

/// `(end / start)^(1 / n_years) - 1`.
pub fn geometric_growth(start: f64, end: f64, n_years: u32) -> Result<f64> {
    if !(start > 0.0) {
        return Err(Error::NonpositiveStart(start));
    }
    if !(end >= 0.0) || !end.is_finite() {
        return Err(Error::InvalidValue(format!("end value {end} must be finite and non-negative")));
    }
    if n_years == 0 {
        return Err(Error::InvalidValue("period must span at least one year".into()));
    }
    if end == 0.0 {
        return Ok(-1.0);
    }
    Ok((end / start).powf(1.0 / n_years as f64) - 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthTarget {
    Rca,
    RawCount,
}

impl GrowthTarget {
    pub fn as_str(self) -> &'static str {
        match self {
            GrowthTarget::Rca => "rca",
            GrowthTarget::RawCount => "raw",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthRow {
    pub country: usize,
    pub discipline: usize,
    /// Index into the grid.
    pub period: usize,
    /// Start-of-period RCA, used for subsampling and as a regressor.
    pub start_value: f64,
    pub growth: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthPanel {
    pub metric: Metric,
    pub target: GrowthTarget,
    pub countries: Vec<String>,
    pub disciplines: Vec<String>,
    pub grid: PeriodGrid,
    /// Sorted by `(country, discipline, period)`.
    pub rows: Vec<GrowthRow>,
}

impl GrowthPanel {
    pub fn period(&self, row: &GrowthRow) -> Period {
        self.grid.periods()[row.period]
    }
}

fn slice_for(slices: &BTreeMap<i32, RcaSlice>, year: i32) -> Result<&RcaSlice> {
    slices.get(&year).ok_or(Error::MissingYearSlice(year))
}

fn check_slices(slices: &BTreeMap<i32, RcaSlice>, grid: &PeriodGrid) -> Result<(Metric, Vec<String>, Vec<String>)> {
    let first = slice_for(slices, grid.periods()[0].start)?;
    for y in grid.endpoints() {
        let s = slice_for(slices, y)?;
        if s.metric != first.metric || s.countries != first.countries || s.disciplines != first.disciplines {
            return Err(Error::InconsistentInputs(format!(
                "RCA slice for {y} does not match the catalogs/metric of {}",
                first.year
            )));
        }
    }
    Ok((first.metric, first.countries.clone(), first.disciplines.clone()))
}

/// Rows exist where the start RCA is present and positive and the end RCA is
/// present.
pub fn growth_panel(slices: &BTreeMap<i32, RcaSlice>, grid: &PeriodGrid) -> Result<GrowthPanel> {
    let (metric, countries, disciplines) = check_slices(slices, grid)?;
    let mut rows = Vec::new();
    for c in 0..countries.len() {
        for d in 0..disciplines.len() {
            for (k, p) in grid.periods().iter().enumerate() {
                let start = slices[&p.start].get(c, d);
                let end = slices[&p.end].get(c, d);
                if let (Some(s), Some(e)) = (start, end) {
                    if s > 0.0 {
                        rows.push(GrowthRow {
                            country: c,
                            discipline: d,
                            period: k,
                            start_value: s,
                            growth: geometric_growth(s, e, p.n_years())?,
                        });
                    }
                }
            }
        }
    }
    Ok(GrowthPanel {
        metric,
        target: GrowthTarget::Rca,
        countries,
        disciplines,
        grid: grid.clone(),
        rows,
    })
}

/// Growth of the raw counts. Rows need a positive start count and a present
/// start RCA, which is still carried as `start_value`.
pub fn raw_growth_panel(panel: &Panel, metric: Metric, grid: &PeriodGrid) -> Result<GrowthPanel> {
    let mut slices = BTreeMap::new();
    for y in grid.endpoints() {
        panel.check_year(y).map_err(|_| Error::MissingYearSlice(y))?;
        slices.insert(y, rca_for_year(panel, y, metric)?);
    }
    let mut rows = Vec::new();
    for c in 0..panel.countries().len() {
        for d in 0..panel.disciplines().len() {
            for (k, p) in grid.periods().iter().enumerate() {
                let start = panel.count(c, d, p.start, metric);
                let end = panel.count(c, d, p.end, metric);
                let Some(start_rca) = slices[&p.start].get(c, d) else {
                    continue;
                };
                if start > 0 {
                    rows.push(GrowthRow {
                        country: c,
                        discipline: d,
                        period: k,
                        start_value: start_rca,
                        growth: geometric_growth(start as f64, end as f64, p.n_years())?,
                    });
                }
            }
        }
    }
    Ok(GrowthPanel {
        metric,
        target: GrowthTarget::RawCount,
        countries: panel.countries().to_vec(),
        disciplines: panel.disciplines().to_vec(),
        grid: grid.clone(),
        rows,
    })
}
