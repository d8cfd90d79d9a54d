//! End-to-end run: ingest → filter → RCA/flags → proximity → density →
//! growth → regressions → projections → reports, written as CSV files with a
//! JSON manifest of SHA-256 content hashes.
//!
//! Everything is computed in memory before the first file is written, so a
//! failing stage leaves the output directory untouched.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::econometrics::{
    build_design, fit_fe, marginal_effects, sd_impact, stars, ClusterLevel, DensitySource, FitOptions,
    RegressionDataset, RegressionResult, Subsample, RCA,
};
use crate::error::{Error, Result};
use crate::growth::{growth_panel, raw_growth_panel, GrowthPanel, GrowthTarget, PeriodGrid};
use crate::panel::{filter_countries, ingest_csv, write_csv, ColumnMap, Metric, Panel};
use crate::projection::{project_growth, rank_disciplines, read_area_map, ProjectionMode, ProjectionReport};
use crate::proximity::{proximity_matrix, DensityPanel, ProximityMatrix};
use crate::rca::{rca_flag, rca_for_year, RcaFlags, RcaSlice};
use crate::stats::{kde, summary_stats, DensityCurve, TransitionGroup};

fn default_min_docs() -> u64 {
    100
}
fn default_reference_year() -> i32 {
    2019
}
fn default_metrics() -> Vec<Metric> {
    Metric::ALL.to_vec()
}
fn default_true() -> bool {
    true
}
fn default_top() -> usize {
    5
}
fn default_output() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub input_path: PathBuf,
    #[serde(default = "default_min_docs")]
    pub min_docs: u64,
    #[serde(default = "default_reference_year")]
    pub reference_year: i32,
    #[serde(default)]
    pub grid: PeriodGrid,
    #[serde(default = "default_metrics")]
    pub metrics: Vec<Metric>,
    #[serde(default)]
    pub cluster: ClusterLevel,
    /// Project with the interaction model (column 3) rather than column 1.
    #[serde(default = "default_true")]
    pub interaction: bool,
    #[serde(default)]
    pub projection_mode: ProjectionMode,
    /// Year the projections start from; defaults to the reference year.
    #[serde(default)]
    pub base_year: Option<i32>,
    #[serde(default = "default_top")]
    pub top: usize,
    /// Optional `discipline,main_area` CSV.
    #[serde(default)]
    pub area_map: Option<PathBuf>,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    /// Seed for simulation oracles; not used by the pipeline itself.
    #[serde(default)]
    pub seed: u64,
}

impl RunConfig {
    pub fn new(input_path: impl Into<PathBuf>, output_dir: impl Into<PathBuf>) -> Self {
        Self {
            input_path: input_path.into(),
            min_docs: default_min_docs(),
            reference_year: default_reference_year(),
            grid: PeriodGrid::default(),
            metrics: default_metrics(),
            cluster: ClusterLevel::default(),
            interaction: true,
            projection_mode: ProjectionMode::default(),
            base_year: None,
            top: default_top(),
            area_map: None,
            output_dir: output_dir.into(),
            seed: 0,
        }
    }

    pub fn base_year(&self) -> i32 {
        self.base_year.unwrap_or(self.reference_year)
    }

    /// Checks every referenced year against the panel.
    pub fn validate(&self, panel: &Panel) -> Result<()> {
        panel.check_year(self.reference_year)?;
        panel.check_year(self.base_year())?;
        for y in self.grid.endpoints() {
            panel.check_year(y)?;
        }
        if self.metrics.is_empty() {
            return Err(Error::InvalidValue("no metrics selected".into()));
        }
        Ok(())
    }
}

fn stage<T>(name: &'static str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        e @ Error::Stage { .. } => e,
        e => Error::Stage {
            stage: name,
            source: Box::new(e),
        },
    })
}

/// Per-metric intermediates over every year of the panel.
#[derive(Debug, Clone)]
pub struct MetricAnalysis {
    pub metric: Metric,
    pub rca: BTreeMap<i32, RcaSlice>,
    pub flags: BTreeMap<i32, RcaFlags>,
    pub proximity: BTreeMap<i32, ProximityMatrix>,
    pub density: DensityPanel,
    pub growth: GrowthPanel,
    pub raw_growth: GrowthPanel,
}

pub fn analyze_metric(panel: &Panel, metric: Metric, grid: &PeriodGrid) -> Result<MetricAnalysis> {
    let (lo, hi) = panel.year_range().ok_or(Error::EmptyDataset)?;
    let mut rca = BTreeMap::new();
    let mut flags = BTreeMap::new();
    let mut proximity = BTreeMap::new();
    stage("rca", (|| {
        for y in lo..=hi {
            let s = rca_for_year(panel, y, metric)?;
            flags.insert(y, rca_flag(&s));
            rca.insert(y, s);
        }
        Ok(())
    })())?;
    stage("proximity", (|| {
        for (y, f) in &flags {
            proximity.insert(*y, proximity_matrix(f)?);
        }
        Ok(())
    })())?;
    let density = stage(
        "density",
        DensityPanel::build(flags.keys().map(|y| (&proximity[y], &flags[y]))),
    )?;
    let growth = stage("growth", growth_panel(&rca, grid))?;
    let raw_growth = stage("growth", raw_growth_panel(panel, metric, grid))?;
    Ok(MetricAnalysis {
        metric,
        rca,
        flags,
        proximity,
        density,
        growth,
        raw_growth,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Table {
    #[serde(rename = "4a")]
    T4a,
    #[serde(rename = "4b")]
    T4b,
    #[serde(rename = "6")]
    T6,
    #[serde(rename = "7")]
    T7,
}

impl Table {
    pub const ALL: [Table; 4] = [Table::T4a, Table::T4b, Table::T6, Table::T7];

    pub fn as_str(self) -> &'static str {
        match self {
            Table::T4a => "4a",
            Table::T4b => "4b",
            Table::T6 => "6",
            Table::T7 => "7",
        }
    }
}

impl std::str::FromStr for Table {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "4a" => Ok(Table::T4a),
            "4b" => Ok(Table::T4b),
            "6" => Ok(Table::T6),
            "7" => Ok(Table::T7),
            other => Err(Error::InvalidValue(format!("unknown table `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DensityKind {
    Level,
    Delta,
}

/// One regression column of a results table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TableColumn {
    pub table: Table,
    pub column: u8,
    pub metric: Metric,
    pub target: GrowthTarget,
    pub density: DensityKind,
    pub subsample: Subsample,
    pub interaction: bool,
}

/// Columns 1 and 3 are the `RCA < 1` subsample, 2 and 4 `RCA >= 1`. Tables
/// 4a/4b add the interaction in columns 3–4; tables 6 and 7 switch metric
/// there instead.
pub fn table_column(table: Table, column: u8) -> Result<TableColumn> {
    if !(1..=4).contains(&column) {
        return Err(Error::InvalidValue(format!("column {column} not in 1..=4")));
    }
    let subsample = if column % 2 == 1 { Subsample::RcaLt1 } else { Subsample::RcaGe1 };
    let late = column >= 3;
    let (metric, target, density, interaction) = match table {
        Table::T4a => (Metric::Documents, GrowthTarget::Rca, DensityKind::Level, late),
        Table::T4b => (Metric::Citations, GrowthTarget::Rca, DensityKind::Level, late),
        Table::T6 | Table::T7 => {
            let metric = if late { Metric::Citations } else { Metric::Documents };
            let (target, density) = if table == Table::T6 {
                (GrowthTarget::Rca, DensityKind::Delta)
            } else {
                (GrowthTarget::RawCount, DensityKind::Level)
            };
            (metric, target, density, false)
        }
    };
    Ok(TableColumn {
        table,
        column,
        metric,
        target,
        density,
        subsample,
        interaction,
    })
}

pub fn column_dataset(analysis: &MetricAnalysis, col: &TableColumn) -> Result<RegressionDataset> {
    let growth = match col.target {
        GrowthTarget::Rca => &analysis.growth,
        GrowthTarget::RawCount => &analysis.raw_growth,
    };
    let source = match col.density {
        DensityKind::Level => DensitySource::Level(&analysis.density),
        DensityKind::Delta => DensitySource::Delta(&analysis.density),
    };
    build_design(growth, source, col.subsample, col.interaction)
}

pub fn fit_column(analysis: &MetricAnalysis, col: &TableColumn, cluster: ClusterLevel) -> Result<(RegressionDataset, RegressionResult)> {
    let ds = column_dataset(analysis, col)?;
    let res = fit_fe(
        &ds,
        FitOptions {
            cluster,
            base_period: None,
        },
    )?;
    Ok((ds, res))
}

/// Shortest round-trip decimal; NaN prints empty and negative zero as `0`.
pub fn format_number(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else if v == 0.0 {
        "0".into()
    } else {
        format!("{v}")
    }
}

pub fn format_opt(v: Option<f64>) -> String {
    v.map(format_number).unwrap_or_default()
}

/// Coefficient rows plus sample statistics for one column.
pub fn coefficient_report(res: &RegressionResult) -> String {
    let mut out = String::from("term,estimate,se,p_value,stars\n");
    for name in &res.names {
        let p = res.p_value(name);
        let _ = writeln!(
            out,
            "{name},{},{},{},{}",
            format_opt(res.coefficient(name)),
            format_opt(res.se(name)),
            format_opt(p),
            stars(p)
        );
    }
    let _ = writeln!(out, "observations,{},,,", res.n_obs);
    let _ = writeln!(out, "units,{},,,", res.n_units);
    let _ = writeln!(out, "clusters,{},,,", res.n_clusters);
    let _ = writeln!(out, "r_squared_within,{},,,", format_number(res.r_squared_within));
    let _ = writeln!(out, "cluster_level,{},,,", res.cluster_level);
    out
}

fn table_rows(out: &mut String, col: &TableColumn, res: &RegressionResult) {
    let prefix = format!("{},{},{}", col.column, col.metric, col.subsample);
    for name in &res.names {
        let p = res.p_value(name);
        let _ = writeln!(
            out,
            "{prefix},{name},{},{},{},{}",
            format_opt(res.coefficient(name)),
            format_opt(res.se(name)),
            format_opt(p),
            stars(p)
        );
    }
    let _ = writeln!(out, "{prefix},observations,{},,,", res.n_obs);
    let _ = writeln!(out, "{prefix},units,{},,,", res.n_units);
    let _ = writeln!(out, "{prefix},clusters,{},,,", res.n_clusters);
    let _ = writeln!(out, "{prefix},r_squared_within,{},,,", format_number(res.r_squared_within));
    let _ = writeln!(out, "{prefix},cluster_level,{},,,", res.cluster_level);
}

/// Kernel-density inputs: density at period start grouped by the RCA flag
/// transition over the period. Only cells with RCA defined at both ends.
pub fn transition_samples(
    analysis: &MetricAnalysis,
    grid: &PeriodGrid,
    period: Option<usize>,
) -> BTreeMap<TransitionGroup, Vec<f64>> {
    let mut out: BTreeMap<TransitionGroup, Vec<f64>> = BTreeMap::new();
    let nc = analysis.density.countries.len();
    let nd = analysis.density.disciplines.len();
    for (k, p) in grid.periods().iter().enumerate() {
        if period.is_some_and(|want| want != k) {
            continue;
        }
        let (Some(r0), Some(r1)) = (analysis.rca.get(&p.start), analysis.rca.get(&p.end)) else {
            continue;
        };
        let (f0, f1) = (&analysis.flags[&p.start], &analysis.flags[&p.end]);
        for c in 0..nc {
            for d in 0..nd {
                if r0.get(c, d).is_none() || r1.get(c, d).is_none() {
                    continue;
                }
                if let Some(x) = analysis.density.get(p.start, c, d) {
                    out.entry(TransitionGroup::of(f0.get(c, d), f1.get(c, d)))
                        .or_default()
                        .push(x);
                }
            }
        }
    }
    out
}

/// Curves for figure 1 (gained vs stayed without) or 2 (kept vs lost).
/// Groups with too few distinct values are left out.
pub fn figure_curves(samples: &BTreeMap<TransitionGroup, Vec<f64>>, figure: u8) -> Result<Vec<DensityCurve>> {
    let groups = match figure {
        1 => [TransitionGroup::Gained, TransitionGroup::StayedWithout],
        2 => [TransitionGroup::Kept, TransitionGroup::Lost],
        other => return Err(Error::InvalidValue(format!("unknown figure {other}"))),
    };
    let mut out = Vec::new();
    for g in groups {
        let Some(values) = samples.get(&g) else { continue };
        match kde(values, None) {
            Ok(mut c) => {
                c.group = Some(g);
                out.push(c);
            }
            Err(Error::DegenerateSample(_)) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub files: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn get(&self, path: &str) -> Option<&ManifestEntry> {
        self.files.iter().find(|f| f.path == path)
    }
}

pub const MANIFEST_FILE: &str = "manifest.json";

/// Every output of a run, keyed by file name, before anything touches disk.
pub fn compute_outputs(config: &RunConfig) -> Result<BTreeMap<String, Vec<u8>>> {
    let raw = stage("ingest", ingest_csv(&config.input_path, &ColumnMap::default()))?;
    stage("validate", config.validate(&raw))?;
    let panel = stage("filter", filter_countries(&raw, config.min_docs, config.reference_year))?;
    if panel.countries().is_empty() {
        return Err(Error::Stage {
            stage: "filter",
            source: Box::new(Error::InvalidValue(format!(
                "no country reaches {} documents in {}",
                config.min_docs, config.reference_year
            ))),
        });
    }
    let areas = match &config.area_map {
        Some(p) => stage("ingest", read_area_map(p))?,
        None => BTreeMap::new(),
    };

    let mut metrics = config.metrics.clone();
    metrics.sort();
    metrics.dedup();
    let mut analyses = BTreeMap::new();
    for &m in &metrics {
        analyses.insert(m, analyze_metric(&panel, m, &config.grid)?);
    }

    let mut files = BTreeMap::new();
    let mut buf = Vec::new();
    stage("ingest", write_csv(&panel, &mut buf))?;
    files.insert("panel_filtered.csv".to_string(), buf);

    let mut rca_csv = String::from("metric,year,country,discipline,rca\n");
    let mut phi_csv = String::from("metric,year,discipline_i,discipline_j,phi\n");
    let mut dens_csv = String::from("metric,year,country,discipline,avg_proximity\n");
    let mut growth_csv = String::from("target,metric,country,discipline,period_start,period_end,start_rca,growth\n");
    for a in analyses.values() {
        for (y, s) in &a.rca {
            for (c, cid) in s.countries.iter().enumerate() {
                for (d, did) in s.disciplines.iter().enumerate() {
                    let _ = writeln!(rca_csv, "{},{y},{cid},{did},{}", a.metric, format_opt(s.get(c, d)));
                }
            }
        }
        for (y, m) in &a.proximity {
            for i in 0..m.n() {
                for j in i..m.n() {
                    let _ = writeln!(
                        phi_csv,
                        "{},{y},{},{},{}",
                        a.metric,
                        m.disciplines[i],
                        m.disciplines[j],
                        format_number(m.get(i, j))
                    );
                }
            }
        }
        for y in a.density.by_year.keys() {
            for (c, cid) in a.density.countries.iter().enumerate() {
                for (d, did) in a.density.disciplines.iter().enumerate() {
                    let _ = writeln!(dens_csv, "{},{y},{cid},{did},{}", a.metric, format_opt(a.density.get(*y, c, d)));
                }
            }
        }
        for g in [&a.growth, &a.raw_growth] {
            for r in &g.rows {
                let p = g.period(r);
                let _ = writeln!(
                    growth_csv,
                    "{},{},{},{},{},{},{},{}",
                    g.target.as_str(),
                    g.metric,
                    g.countries[r.country],
                    g.disciplines[r.discipline],
                    p.start,
                    p.end,
                    format_number(r.start_value),
                    format_number(r.growth)
                );
            }
        }
    }
    files.insert("rca.csv".into(), rca_csv.into_bytes());
    files.insert("proximity.csv".into(), phi_csv.into_bytes());
    files.insert("density.csv".into(), dens_csv.into_bytes());
    files.insert("growth.csv".into(), growth_csv.into_bytes());

    // regressions
    let mut fitted: BTreeMap<(Table, u8), (RegressionDataset, RegressionResult)> = BTreeMap::new();
    for table in Table::ALL {
        let mut csv = String::from("column,metric,subsample,term,estimate,se,p_value,stars\n");
        let mut any = false;
        for column in 1..=4u8 {
            let col = table_column(table, column)?;
            let Some(a) = analyses.get(&col.metric) else { continue };
            let (ds, res) = stage("regress", fit_column(a, &col, config.cluster))?;
            table_rows(&mut csv, &col, &res);
            fitted.insert((table, column), (ds, res));
            any = true;
        }
        if any {
            files.insert(format!("table_{}.csv", table.as_str()), csv.into_bytes());
        }
    }

    let mut me_csv = String::from(
        "table,column,metric,subsample,term,estimate,se,stars,mean_rca,mean_density,sd_density,sd_impact_pp\n",
    );
    let mut summary_csv = String::from("table,metric,subsample,variable,count,mean,sd,min,max\n");
    for (table, summary_no) in [(Table::T4a, 2), (Table::T4b, 3)] {
        for column in 1..=4u8 {
            let Some((ds, res)) = fitted.get(&(table, column)) else { continue };
            let col = table_column(table, column)?;
            if column <= 2 {
                let s = stage("report", summary_stats(ds))?;
                for (name, v) in &s.variables {
                    let _ = writeln!(
                        summary_csv,
                        "{summary_no},{},{},{name},{},{},{},{},{}",
                        col.metric,
                        s.subsample,
                        v.count,
                        format_number(v.mean),
                        format_number(v.sd),
                        format_number(v.min),
                        format_number(v.max)
                    );
                }
            }
            if !col.interaction {
                continue;
            }
            let means = ds.means();
            let me = stage("regress", marginal_effects(res, means))?;
            let sd_density = summary_stats(ds)?.get(ds.density_name).map(|v| v.sd).unwrap_or(f64::NAN);
            let impact = sd_impact(me.ame_density, sd_density).ok();
            let g = res.n_clusters;
            let p = |est: f64, se: f64| p_from_t(est, se, g);
            let _ = writeln!(
                me_csv,
                "{},{column},{},{},{},{},{},{},{},{},{},{}",
                table.as_str(),
                col.metric,
                col.subsample,
                ds.density_name,
                format_number(me.ame_density),
                format_number(me.se_density),
                stars(p(me.ame_density, me.se_density)),
                format_number(means.0),
                format_number(means.1),
                format_number(sd_density),
                format_opt(impact)
            );
            let _ = writeln!(
                me_csv,
                "{},{column},{},{},{RCA},{},{},{},{},{},,",
                table.as_str(),
                col.metric,
                col.subsample,
                format_number(me.ame_rca),
                format_number(me.se_rca),
                stars(p(me.ame_rca, me.se_rca)),
                format_number(means.0),
                format_number(means.1),
            );
        }
    }
    files.insert("marginal_effects.csv".into(), me_csv.into_bytes());
    files.insert("summary.csv".into(), summary_csv.into_bytes());

    let mut kde_csv = String::from("figure,metric,group,bandwidth,x,density\n");
    for a in analyses.values() {
        let samples = transition_samples(a, &config.grid, None);
        for figure in [1u8, 2] {
            for curve in stage("report", figure_curves(&samples, figure))? {
                let group = curve.group.map(|g| g.as_str()).unwrap_or("");
                for (x, v) in curve.grid.iter().zip(&curve.values) {
                    let _ = writeln!(
                        kde_csv,
                        "{figure},{},{group},{},{},{}",
                        a.metric,
                        format_number(curve.bandwidth),
                        format_number(*x),
                        format_number(*v)
                    );
                }
            }
        }
    }
    files.insert("kde.csv".into(), kde_csv.into_bytes());

    let proj_column = if config.interaction { 3 } else { 1 };
    if let (Some(a), Some((_, res))) = (
        analyses.get(&Metric::Documents),
        fitted.get(&(Table::T4a, proj_column)),
    ) {
        let base = config.base_year();
        let mut proj_csv = String::from("country,discipline,projection,rca_base,main_area,block\n");
        let mut fig_csv = String::from("country,discipline,avg_proximity,projection\n");
        for (c, cid) in panel.countries().iter().enumerate() {
            let report = stage("project", country_projection(a, res, c, base, config.projection_mode))?
                .with_areas(&areas);
            let ranking = rank_disciplines(&report, config.top);
            let block = |d: &str| {
                if ranking.bottom.iter().any(|r| r.discipline == d) {
                    "bottom"
                } else if ranking.top.iter().any(|r| r.discipline == d) {
                    "top"
                } else {
                    ""
                }
            };
            for r in &report.rows {
                let _ = writeln!(
                    proj_csv,
                    "{cid},{},{},{},{},{}",
                    r.discipline,
                    format_number(r.projected_growth),
                    format_number(r.base_rca),
                    r.main_area.as_deref().unwrap_or(""),
                    block(&r.discipline)
                );
                let _ = writeln!(
                    fig_csv,
                    "{cid},{},{},{}",
                    r.discipline,
                    format_number(r.density),
                    format_number(r.projected_growth)
                );
            }
        }
        files.insert("projections.csv".into(), proj_csv.into_bytes());
        files.insert("figure3.csv".into(), fig_csv.into_bytes());
    }
    Ok(files)
}

fn p_from_t(est: f64, se: f64, clusters: usize) -> Option<f64> {
    use statrs::distribution::{ContinuousCDF, StudentsT};
    if se <= 0.0 || clusters < 2 {
        return None;
    }
    let t = StudentsT::new(0.0, 1.0, (clusters - 1) as f64).ok()?;
    Some(2.0 * (1.0 - t.cdf((est / se).abs())))
}

/// Density-channel projection for one country at `base_year`, restricted to
/// disciplines without RCA.
pub fn country_projection(
    analysis: &MetricAnalysis,
    res: &RegressionResult,
    country: usize,
    base_year: i32,
    mode: ProjectionMode,
) -> Result<ProjectionReport> {
    let density = analysis
        .density
        .vector(base_year, country)
        .ok_or_else(|| Error::MissingDensity(format!("year {base_year}")))?;
    let rca = analysis.rca.get(&base_year).ok_or(Error::MissingYearSlice(base_year))?;
    project_growth(res, &density, rca, &density.country.clone(), Some(Subsample::RcaLt1), mode)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Runs the whole pipeline and writes outputs plus `manifest.json` into the
/// configured directory.
pub fn run_pipeline(config: &RunConfig) -> Result<Manifest> {
    let files = compute_outputs(config)?;
    write_outputs(&config.output_dir, &files)
}

fn write_outputs(dir: &Path, files: &BTreeMap<String, Vec<u8>>) -> Result<Manifest> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    let result = (|| {
        let mut entries = Vec::new();
        for (name, bytes) in files {
            let path = dir.join(name);
            std::fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
            written.push(path);
            entries.push(ManifestEntry {
                path: name.clone(),
                sha256: sha256_hex(bytes),
                bytes: bytes.len(),
            });
        }
        let manifest = Manifest { files: entries };
        let path = dir.join(MANIFEST_FILE);
        let mut json = serde_json::to_string_pretty(&manifest)?;
        json.push('\n');
        std::fs::write(&path, json).map_err(|e| Error::io(&path, e))?;
        Ok(manifest)
    })();
    if result.is_err() {
        for p in written {
            let _ = std::fs::remove_file(p);
        }
    }
    result
}
