//! Balassa revealed comparative advantage and its `>= 1` indicator.

use crate::error::{Error, Result};
use crate::panel::{Metric, Panel, Totals};

/// RCA values for one year and metric, row-major `countries × disciplines`.
///
/// A value is `None` when its country total, the discipline's world total, or
/// the world total is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct RcaSlice {
    pub year: i32,
    pub metric: Metric,
    pub countries: Vec<String>,
    pub disciplines: Vec<String>,
    pub values: Vec<Option<f64>>,
}

impl RcaSlice {
    pub fn get(&self, country: usize, discipline: usize) -> Option<f64> {
        self.values[country * self.disciplines.len() + discipline]
    }

    pub fn country_row(&self, country: usize) -> &[Option<f64>] {
        let nd = self.disciplines.len();
        &self.values[country * nd..(country + 1) * nd]
    }
}

/// `flags[c, i]` is true iff `RCA[c, i] >= 1`; missing values are false.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RcaFlags {
    pub year: i32,
    pub metric: Metric,
    pub countries: Vec<String>,
    pub disciplines: Vec<String>,
    pub flags: Vec<bool>,
}

impl RcaFlags {
    pub fn get(&self, country: usize, discipline: usize) -> bool {
        self.flags[country * self.disciplines.len() + discipline]
    }

    pub fn country_row(&self, country: usize) -> &[bool] {
        let nd = self.disciplines.len();
        &self.flags[country * nd..(country + 1) * nd]
    }

    pub fn country_index(&self, id: &str) -> Option<usize> {
        self.countries.iter().position(|c| c == id)
    }
}

pub fn rca(totals: &Totals, panel: &Panel) -> Result<RcaSlice> {
    let nc = panel.countries().len();
    let nd = panel.disciplines().len();
    if totals.country_totals.len() != nc || totals.world_discipline_totals.len() != nd {
        return Err(Error::InconsistentInputs(format!(
            "totals sized {}x{} but panel has {nc} countries and {nd} disciplines",
            totals.country_totals.len(),
            totals.world_discipline_totals.len()
        )));
    }
    panel.check_year(totals.year)?;
    let counts = panel.year_matrix(totals.year, totals.metric);
    if counts.iter().sum::<u64>() != totals.world_total {
        return Err(Error::InconsistentInputs(format!(
            "world total {} does not match panel sum for {} {}",
            totals.world_total, totals.metric, totals.year
        )));
    }

    let world = totals.world_total as f64;
    let mut values = Vec::with_capacity(nc * nd);
    for c in 0..nc {
        let country_total = totals.country_totals[c];
        for d in 0..nd {
            let world_disc = totals.world_discipline_totals[d];
            let v = if country_total == 0 || world_disc == 0 || totals.world_total == 0 {
                None
            } else {
                let own_share = counts[c * nd + d] as f64 / country_total as f64;
                let world_share = world_disc as f64 / world;
                Some(own_share / world_share)
            };
            values.push(v);
        }
    }
    Ok(RcaSlice {
        year: totals.year,
        metric: totals.metric,
        countries: panel.countries().to_vec(),
        disciplines: panel.disciplines().to_vec(),
        values,
    })
}

pub fn rca_flag(slice: &RcaSlice) -> RcaFlags {
    RcaFlags {
        year: slice.year,
        metric: slice.metric,
        countries: slice.countries.clone(),
        disciplines: slice.disciplines.clone(),
        flags: slice
            .values
            .iter()
            .map(|v| matches!(v, Some(x) if *x >= 1.0))
            .collect(),
    }
}

/// RCA slice for one year straight from the panel.
pub fn rca_for_year(panel: &Panel, year: i32, metric: Metric) -> Result<RcaSlice> {
    let t = crate::panel::totals(panel, year, metric)?;
    rca(&t, panel)
}
