//! Revealed proximity between disciplines and the per-country density
//! (average proximity) built on top of it.
//!
//! Proximity of `i` and `j` is the smaller of the two conditional
//! probabilities of holding RCA in one discipline given RCA in the other,
//! computed from country counts as
//! `|both| / max(|flagged in i|, |flagged in j|)`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::panel::Metric;
use crate::rca::RcaFlags;

#[derive(Debug, Clone, PartialEq)]
pub struct ProximityMatrix {
    pub year: i32,
    pub metric: Metric,
    pub disciplines: Vec<String>,
    /// Row-major `disciplines × disciplines`.
    pub phi: Vec<f64>,
    /// Number of flagged countries per discipline.
    pub counts: Vec<usize>,
}

impl ProximityMatrix {
    pub fn n(&self) -> usize {
        self.disciplines.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.phi[i * self.n() + j]
    }
}

pub fn proximity_matrix(flags: &RcaFlags) -> Result<ProximityMatrix> {
    let nc = flags.countries.len();
    let nd = flags.disciplines.len();
    if nc == 0 {
        return Err(Error::EmptyFlags);
    }
    let mut counts = vec![0usize; nd];
    let mut joint = vec![0usize; nd * nd];
    let mut active = Vec::with_capacity(nd);
    for c in 0..nc {
        active.clear();
        active.extend(
            flags
                .country_row(c)
                .iter()
                .enumerate()
                .filter_map(|(d, &f)| f.then_some(d)),
        );
        for &i in &active {
            counts[i] += 1;
            for &j in &active {
                joint[i * nd + j] += 1;
            }
        }
    }
    let mut phi = vec![0.0; nd * nd];
    for i in 0..nd {
        for j in 0..nd {
            let denom = counts[i].max(counts[j]);
            if denom > 0 {
                phi[i * nd + j] = joint[i * nd + j] as f64 / denom as f64;
            }
        }
    }
    Ok(ProximityMatrix {
        year: flags.year,
        metric: flags.metric,
        disciplines: flags.disciplines.clone(),
        phi,
        counts,
    })
}

/// Share of the proximity mass around each discipline that the country
/// already produces with RCA. `None` where that mass is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityVector {
    pub year: i32,
    pub country: String,
    pub metric: Metric,
    pub disciplines: Vec<String>,
    pub density: Vec<Option<f64>>,
}

fn density_row(phi: &ProximityMatrix, flags: &[bool]) -> Vec<Option<f64>> {
    let nd = phi.n();
    (0..nd)
        .map(|j| {
            let mut num = 0.0;
            let mut den = 0.0;
            for i in (0..nd).filter(|&i| i != j) {
                let w = phi.get(i, j);
                den += w;
                if flags[i] {
                    num += w;
                }
            }
            (den > 0.0).then(|| num / den)
        })
        .collect()
}

fn check_pairing(phi: &ProximityMatrix, flags: &RcaFlags) -> Result<()> {
    if phi.year != flags.year || phi.metric != flags.metric {
        return Err(Error::InconsistentInputs(format!(
            "proximity is {} {} but flags are {} {}",
            phi.metric, phi.year, flags.metric, flags.year
        )));
    }
    if phi.disciplines != flags.disciplines {
        return Err(Error::InconsistentInputs("discipline catalogs differ".into()));
    }
    Ok(())
}

/// Density excludes the discipline itself from both sums.
pub fn avg_proximity(phi: &ProximityMatrix, flags: &RcaFlags, country: &str) -> Result<DensityVector> {
    check_pairing(phi, flags)?;
    let c = flags
        .country_index(country)
        .ok_or_else(|| Error::UnknownCountry(country.to_string()))?;
    Ok(DensityVector {
        year: flags.year,
        country: country.to_string(),
        metric: flags.metric,
        disciplines: flags.disciplines.clone(),
        density: density_row(phi, flags.country_row(c)),
    })
}

pub fn delta_density(start: &DensityVector, end: &DensityVector) -> Result<Vec<Option<f64>>> {
    if start.country != end.country {
        return Err(Error::CountryMismatch(start.country.clone(), end.country.clone()));
    }
    if start.metric != end.metric {
        return Err(Error::MetricMismatch(start.metric.to_string(), end.metric.to_string()));
    }
    if start.year >= end.year {
        return Err(Error::YearOrder {
            start: start.year,
            end: end.year,
        });
    }
    if start.disciplines != end.disciplines {
        return Err(Error::InconsistentInputs("discipline catalogs differ".into()));
    }
    Ok(diff(&start.density, &end.density))
}

fn diff(start: &[Option<f64>], end: &[Option<f64>]) -> Vec<Option<f64>> {
    start
        .iter()
        .zip(end)
        .map(|(s, e)| match (s, e) {
            (Some(s), Some(e)) => Some(e - s),
            _ => None,
        })
        .collect()
}

/// Densities for every country and every computed year of one metric.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityPanel {
    pub metric: Metric,
    pub countries: Vec<String>,
    pub disciplines: Vec<String>,
    /// year → row-major `countries × disciplines`.
    pub by_year: BTreeMap<i32, Vec<Option<f64>>>,
}

impl DensityPanel {
    pub fn build<'a>(
        pairs: impl IntoIterator<Item = (&'a ProximityMatrix, &'a RcaFlags)>,
    ) -> Result<Self> {
        let mut out: Option<DensityPanel> = None;
        for (phi, flags) in pairs {
            check_pairing(phi, flags)?;
            let panel = out.get_or_insert_with(|| DensityPanel {
                metric: flags.metric,
                countries: flags.countries.clone(),
                disciplines: flags.disciplines.clone(),
                by_year: BTreeMap::new(),
            });
            if panel.metric != flags.metric || panel.countries != flags.countries {
                return Err(Error::InconsistentInputs(
                    "density panel mixes metrics or country catalogs".into(),
                ));
            }
            let values = (0..flags.countries.len())
                .flat_map(|c| density_row(phi, flags.country_row(c)))
                .collect();
            panel.by_year.insert(flags.year, values);
        }
        out.ok_or(Error::EmptyFlags)
    }

    pub fn get(&self, year: i32, country: usize, discipline: usize) -> Option<f64> {
        self.by_year
            .get(&year)
            .and_then(|v| v[country * self.disciplines.len() + discipline])
    }

    pub fn delta(&self, start: i32, end: i32, country: usize, discipline: usize) -> Option<f64> {
        Some(self.get(end, country, discipline)? - self.get(start, country, discipline)?)
    }

    pub fn vector(&self, year: i32, country: usize) -> Option<DensityVector> {
        let nd = self.disciplines.len();
        let row = self.by_year.get(&year)?;
        Some(DensityVector {
            year,
            country: self.countries.get(country)?.clone(),
            metric: self.metric,
            disciplines: self.disciplines.clone(),
            density: row[country * nd..(country + 1) * nd].to_vec(),
        })
    }
}
