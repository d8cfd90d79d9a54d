//! Long-form bibliometric panel: ingestion, validation, country filtering and
//! the country/world totals that every RCA computation starts from.
//!
//! Counts live in a sparse map keyed by `(year, country, discipline)` catalog
//! indices. Absent triples are zeros. Catalogs are kept sorted so that index
//! order equals lexicographic id order.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which bibliometric count an analysis runs on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Documents,
    Citations,
}

impl Metric {
    pub const ALL: [Metric; 2] = [Metric::Documents, Metric::Citations];

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Documents => "documents",
            Metric::Citations => "citations",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "documents" | "publications" => Ok(Metric::Documents),
            "citations" => Ok(Metric::Citations),
            other => Err(Error::InvalidValue(format!("unknown metric `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counts {
    pub documents: u64,
    pub citations: u64,
}

impl Counts {
    pub fn get(&self, metric: Metric) -> u64 {
        match metric {
            Metric::Documents => self.documents,
            Metric::Citations => self.citations,
        }
    }
}

/// One row of the long-form input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Observation {
    pub country: String,
    pub discipline: String,
    pub year: i32,
    pub documents: u64,
    pub citations: u64,
}

/// Header names for the long-form CSV.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnMap {
    pub country: String,
    pub discipline: String,
    pub year: String,
    pub documents: String,
    pub citations: String,
}

impl Default for ColumnMap {
    fn default() -> Self {
        Self {
            country: "country".into(),
            discipline: "discipline".into(),
            year: "year".into(),
            documents: "documents".into(),
            citations: "citations".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Panel {
    countries: Vec<String>,
    disciplines: Vec<String>,
    year_range: Option<(i32, i32)>,
    cells: BTreeMap<(i32, usize, usize), Counts>,
}

impl Panel {
    /// Builds a panel from observations, enforcing triple uniqueness.
    ///
    /// Observations are numbered from 1 in error messages.
    pub fn from_observations(observations: impl IntoIterator<Item = Observation>) -> Result<Self> {
        let observations: Vec<Observation> = observations.into_iter().collect();
        let rows: Vec<(usize, Observation)> = observations
            .into_iter()
            .enumerate()
            .map(|(i, o)| (i + 1, o))
            .collect();
        Self::from_numbered(rows)
    }

    fn from_numbered(rows: Vec<(usize, Observation)>) -> Result<Self> {
        let countries: Vec<String> = rows
            .iter()
            .map(|(_, o)| o.country.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let disciplines: Vec<String> = rows
            .iter()
            .map(|(_, o)| o.discipline.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let c_index = index_of(&countries);
        let d_index = index_of(&disciplines);

        let mut cells = BTreeMap::new();
        let mut seen: BTreeMap<(i32, usize, usize), usize> = BTreeMap::new();
        let mut year_range: Option<(i32, i32)> = None;
        for (row, o) in rows {
            let key = (o.year, c_index[&o.country], d_index[&o.discipline]);
            if let Some(&first) = seen.get(&key) {
                return Err(Error::DuplicateTriple { first, second: row });
            }
            seen.insert(key, row);
            cells.insert(
                key,
                Counts {
                    documents: o.documents,
                    citations: o.citations,
                },
            );
            year_range = Some(match year_range {
                None => (o.year, o.year),
                Some((lo, hi)) => (lo.min(o.year), hi.max(o.year)),
            });
        }
        Ok(Self {
            countries,
            disciplines,
            year_range,
            cells,
        })
    }

    pub fn countries(&self) -> &[String] {
        &self.countries
    }

    pub fn disciplines(&self) -> &[String] {
        &self.disciplines
    }

    pub fn year_range(&self) -> Option<(i32, i32)> {
        self.year_range
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn country_index(&self, id: &str) -> Option<usize> {
        self.countries.binary_search_by(|c| c.as_str().cmp(id)).ok()
    }

    pub fn discipline_index(&self, id: &str) -> Option<usize> {
        self.disciplines.binary_search_by(|d| d.as_str().cmp(id)).ok()
    }

    pub fn check_year(&self, year: i32) -> Result<()> {
        match self.year_range {
            Some((lo, hi)) if (lo..=hi).contains(&year) => Ok(()),
            Some((lo, hi)) => Err(Error::YearOutOfRange {
                year,
                range: format!("{lo}..={hi}"),
            }),
            None => Err(Error::YearOutOfRange {
                year,
                range: "empty".into(),
            }),
        }
    }

    /// Count for one cell; absent cells are zero.
    pub fn count(&self, country: usize, discipline: usize, year: i32, metric: Metric) -> u64 {
        self.cells
            .get(&(year, country, discipline))
            .map_or(0, |c| c.get(metric))
    }

    /// Dense row-major `countries × disciplines` count matrix for one year.
    pub fn year_matrix(&self, year: i32, metric: Metric) -> Vec<u64> {
        let nd = self.disciplines.len();
        let mut out = vec![0u64; self.countries.len() * nd];
        for (&(_, c, d), counts) in self.cells.range((year, 0, 0)..=(year, usize::MAX, usize::MAX)) {
            out[c * nd + d] = counts.get(metric);
        }
        out
    }

    /// Observations sorted by `(country, discipline, year)`.
    pub fn observations(&self) -> Vec<Observation> {
        let mut keys: Vec<_> = self.cells.iter().collect();
        keys.sort_by_key(|(&(y, c, d), _)| (c, d, y));
        keys.into_iter()
            .map(|(&(year, c, d), counts)| Observation {
                country: self.countries[c].clone(),
                discipline: self.disciplines[d].clone(),
                year,
                documents: counts.documents,
                citations: counts.citations,
            })
            .collect()
    }

    /// Same panel with every count mapped through `f`. Catalogs unchanged.
    pub fn map_counts(&self, mut f: impl FnMut(Counts) -> Counts) -> Self {
        Self {
            countries: self.countries.clone(),
            disciplines: self.disciplines.clone(),
            year_range: self.year_range,
            cells: self.cells.iter().map(|(k, v)| (*k, f(*v))).collect(),
        }
    }
}

fn index_of(ids: &[String]) -> BTreeMap<String, usize> {
    ids.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect()
}

/// Reads and validates a long-form panel CSV from disk.
pub fn ingest_csv(path: impl AsRef<Path>, columns: &ColumnMap) -> Result<Panel> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, columns)
}

/// Reads a long-form panel CSV. Row numbers in errors are 1-based file lines
/// (the header is line 1).
pub fn read_csv<R: Read>(reader: R, columns: &ColumnMap) -> Result<Panel> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    };
    let i_country = find(&columns.country)?;
    let i_discipline = find(&columns.discipline)?;
    let i_year = find(&columns.year)?;
    let i_docs = find(&columns.documents)?;
    let i_cites = find(&columns.citations)?;

    let mut rows = Vec::new();
    for (n, record) in rdr.records().enumerate() {
        let row = n + 2;
        let record = record.map_err(|e| Error::MalformedRow {
            row,
            reason: e.to_string(),
        })?;
        let field = |i: usize| record.get(i).unwrap_or("");
        let country = field(i_country);
        let discipline = field(i_discipline);
        if country.is_empty() || discipline.is_empty() {
            return Err(Error::MalformedRow {
                row,
                reason: "empty country or discipline".into(),
            });
        }
        let year: i32 = field(i_year).parse().map_err(|_| Error::MalformedRow {
            row,
            reason: format!("bad year `{}`", field(i_year)),
        })?;
        let documents = parse_count(field(i_docs), row, false)?;
        let citations = parse_count(field(i_cites), row, true)?;
        rows.push((
            row,
            Observation {
                country: country.to_string(),
                discipline: discipline.to_string(),
                year,
                documents,
                citations,
            },
        ));
    }
    Panel::from_numbered(rows)
}

fn parse_count(raw: &str, row: usize, empty_is_zero: bool) -> Result<u64> {
    if raw.is_empty() {
        return if empty_is_zero {
            Ok(0)
        } else {
            Err(Error::MalformedRow {
                row,
                reason: "empty count".into(),
            })
        };
    }
    match raw.parse::<i64>() {
        Ok(v) if v < 0 => Err(Error::NegativeCount { row }),
        Ok(v) => Ok(v as u64),
        Err(_) => Err(Error::MalformedRow {
            row,
            reason: format!("bad count `{raw}`"),
        }),
    }
}

/// Writes the canonical long-form CSV, rows sorted by `(country, discipline, year)`.
pub fn write_csv<W: Write>(panel: &Panel, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["country", "discipline", "year", "documents", "citations"])?;
    for o in panel.observations() {
        wtr.write_record([
            o.country,
            o.discipline,
            o.year.to_string(),
            o.documents.to_string(),
            o.citations.to_string(),
        ])?;
    }
    wtr.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}

/// Keeps exactly the countries whose summed documents in `reference_year`
/// reach `min_docs`, with all of their observations in every year.
///
/// The discipline catalog and year range are preserved.
pub fn filter_countries(panel: &Panel, min_docs: u64, reference_year: i32) -> Result<Panel> {
    panel.check_year(reference_year)?;
    let nd = panel.disciplines.len();
    let ref_docs = panel.year_matrix(reference_year, Metric::Documents);
    let keep: Vec<bool> = (0..panel.countries.len())
        .map(|c| ref_docs[c * nd..(c + 1) * nd].iter().sum::<u64>() >= min_docs)
        .collect();

    let mut remap = vec![usize::MAX; panel.countries.len()];
    let mut countries = Vec::new();
    for (c, id) in panel.countries.iter().enumerate() {
        if keep[c] {
            remap[c] = countries.len();
            countries.push(id.clone());
        }
    }
    let cells = panel
        .cells
        .iter()
        .filter(|(&(_, c, _), _)| keep[c])
        .map(|(&(y, c, d), v)| ((y, remap[c], d), *v))
        .collect();
    Ok(Panel {
        countries,
        disciplines: panel.disciplines.clone(),
        year_range: panel.year_range,
        cells,
    })
}

/// Country totals, world per-discipline totals and the world total for one
/// year and metric. Vectors are aligned with the panel catalogs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Totals {
    pub year: i32,
    pub metric: Metric,
    pub country_totals: Vec<u64>,
    pub world_discipline_totals: Vec<u64>,
    pub world_total: u64,
}

pub fn totals(panel: &Panel, year: i32, metric: Metric) -> Result<Totals> {
    panel.check_year(year)?;
    let nc = panel.countries.len();
    let nd = panel.disciplines.len();
    let mut country_totals = vec![0u64; nc];
    let mut world_discipline_totals = vec![0u64; nd];
    for (&(_, c, d), counts) in panel
        .cells
        .range((year, 0, 0)..=(year, usize::MAX, usize::MAX))
    {
        let v = counts.get(metric);
        country_totals[c] += v;
        world_discipline_totals[d] += v;
    }
    let world_total = country_totals.iter().sum();
    Ok(Totals {
        year,
        metric,
        country_totals,
        world_discipline_totals,
        world_total,
    })
}
