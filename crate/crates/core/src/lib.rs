//! Discipline-space analytics for bibliometric panels.
//!
//! The pipeline runs from long-form `(country, discipline, year)` counts to
//! revealed comparative advantage, revealed proximity between disciplines,
//! per-country density, annualized growth, fixed-effects growth regressions
//! with clustered errors, and projections of which disciplines a country is
//! best placed to grow.
//!
//! - [`panel`]: ingestion, validation, country filter, totals
//! - [`rca`]: Balassa index and its `>= 1` flags
//! - [`proximity`]: proximity matrix and density vectors
//! - [`growth`]: period grid and geometric growth panels
//! - [`econometrics`]: within estimator, CR1 covariance, marginal effects
//! - [`projection`]: density-channel projections and rankings
//! - [`stats`]: summary tables, transition groups, kernel densities
//! - [`pipeline`]: end-to-end runs with a hashed output manifest

pub mod econometrics;
pub mod error;
pub mod fixture;
pub mod growth;
pub mod panel;
pub mod pipeline;
pub mod projection;
pub mod proximity;
pub mod rca;
pub mod stats;

pub use error::{Error, Result};
pub use growth::{geometric_growth, growth_panel, raw_growth_panel, GrowthPanel, GrowthTarget, Period, PeriodGrid};
pub use panel::{filter_countries, ingest_csv, totals, ColumnMap, Metric, Observation, Panel, Totals};
pub use projection::{project_growth, rank_disciplines, ProjectionMode, ProjectionReport};
pub use proximity::{avg_proximity, delta_density, proximity_matrix, DensityPanel, DensityVector, ProximityMatrix};
pub use rca::{rca, rca_flag, RcaFlags, RcaSlice};
