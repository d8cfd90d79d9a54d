use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use discspace_core::econometrics::ClusterLevel;
use discspace_core::panel::write_csv;
use discspace_core::pipeline::{
    analyze_metric, column_dataset, country_projection, figure_curves, fit_column, format_number as num,
    format_opt as opt, run_pipeline, table_column, transition_samples, coefficient_report, MetricAnalysis, RunConfig,
    Table,
};
use discspace_core::projection::read_area_map;
use discspace_core::rca::{rca_flag, rca_for_year};
use discspace_core::stats::summary_stats;
use discspace_core::{
    delta_density, filter_countries, ingest_csv, proximity_matrix, rank_disciplines, ColumnMap, GrowthTarget, Metric,
    Panel, Period, ProjectionMode,
};

#[derive(Parser)]
#[command(name = "discspace", version, about = "Discipline-space analytics for bibliometric panels")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML run configuration; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Long-form CSV with country, discipline, year, documents, citations.
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    /// Minimum documents in the reference year for a country to be kept.
    #[arg(long, global = true)]
    min_docs: Option<u64>,
    #[arg(long, global = true)]
    reference_year: Option<i32>,
    /// Seed for simulation oracles; the pipeline itself is deterministic.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Cluster {
    Country,
    CountryDiscipline,
}

impl From<Cluster> for ClusterLevel {
    fn from(c: Cluster) -> Self {
        match c {
            Cluster::Country => ClusterLevel::Country,
            Cluster::CountryDiscipline => ClusterLevel::CountryDiscipline,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Target {
    Rca,
    Raw,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Interaction,
    MarginalAtMeans,
}

impl From<Mode> for ProjectionMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Interaction => ProjectionMode::Interaction,
            Mode::MarginalAtMeans => ProjectionMode::MarginalAtMeans,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Validate the input and report what survives the country filter.
    Ingest {
        /// Write the filtered panel as canonical CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// RCA values and flags for one year.
    Rca {
        #[arg(long)]
        year: Option<i32>,
        #[arg(long, default_value = "documents")]
        metric: Metric,
    },
    /// Proximity matrix for one year.
    Proximity {
        #[arg(long)]
        year: Option<i32>,
        #[arg(long, default_value = "documents")]
        metric: Metric,
    },
    /// Density of every discipline for one country.
    Density {
        #[arg(long)]
        country: String,
        #[arg(long)]
        year: Option<i32>,
        #[arg(long, default_value = "documents")]
        metric: Metric,
        /// Report the change in density since this year instead of the level.
        #[arg(long)]
        since: Option<i32>,
    },
    /// Annualized growth over the period grid.
    Growth {
        #[arg(long, value_enum, default_value = "rca")]
        target: Target,
        #[arg(long, default_value = "documents")]
        metric: Metric,
    },
    /// Fit one column of a results table (4a, 4b, 6 or 7).
    Regress {
        #[arg(long)]
        table: Table,
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4))]
        column: u8,
        #[arg(long, value_enum)]
        cluster: Option<Cluster>,
    },
    /// Rank disciplines without RCA by density-driven projected growth.
    Project {
        #[arg(long)]
        country: String,
        #[arg(long)]
        base_year: Option<i32>,
        #[arg(long, default_value = "documents")]
        metric: Metric,
        #[arg(long)]
        top: Option<usize>,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        /// `discipline,main_area` CSV used to tag rows.
        #[arg(long)]
        area_map: Option<PathBuf>,
        /// Write every projected discipline's (density, projection) pair here.
        #[arg(long)]
        emit_figure3: Option<PathBuf>,
    },
    /// Descriptive reports.
    Report {
        #[command(subcommand)]
        report: Report,
    },
    /// Full pipeline into an output directory with a hashed manifest.
    Run {
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum Report {
    /// Summary statistics: table 2 for documents, 3 for citations.
    Summary {
        #[arg(long, value_parser = clap::value_parser!(u8).range(2..=3))]
        table: u8,
    },
    /// Kernel densities of density by RCA transition: figure 1 (without RCA
    /// at the start) or 2 (with RCA at the start).
    Kde {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        figure: u8,
        #[arg(long, default_value = "documents")]
        metric: Metric,
        /// Restrict to one grid period, written `START-END`.
        #[arg(long, value_parser = parse_period)]
        period: Option<Period>,
    },
}

fn parse_period(s: &str) -> std::result::Result<Period, String> {
    let (a, b) = s.split_once('-').ok_or("expected START-END")?;
    let start = a.trim().parse().map_err(|_| format!("bad year `{a}`"))?;
    let end = b.trim().parse().map_err(|_| format!("bad year `{b}`"))?;
    Ok(Period { start, end })
}

fn load_config(common: &Common) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => {
            let input = common.input.clone().ok_or_else(|| anyhow!("pass --input or --config"))?;
            RunConfig::new(input, "out")
        }
    };
    if let Some(p) = &common.input {
        cfg.input_path = p.clone();
    }
    if let Some(v) = common.min_docs {
        cfg.min_docs = v;
    }
    if let Some(v) = common.reference_year {
        cfg.reference_year = v;
    }
    if let Some(v) = common.seed {
        cfg.seed = v;
    }
    Ok(cfg)
}

struct Session {
    cfg: RunConfig,
    raw: Panel,
    panel: Panel,
}

impl Session {
    fn open(cfg: RunConfig) -> Result<Self> {
        let raw = ingest_csv(&cfg.input_path, &ColumnMap::default())
            .with_context(|| format!("ingesting {}", cfg.input_path.display()))?;
        cfg.validate(&raw)?;
        let panel = filter_countries(&raw, cfg.min_docs, cfg.reference_year)?;
        if panel.countries().is_empty() {
            bail!("no country reaches {} documents in {}", cfg.min_docs, cfg.reference_year);
        }
        Ok(Self { cfg, raw, panel })
    }

    fn analysis(&self, metric: Metric) -> Result<MetricAnalysis> {
        Ok(analyze_metric(&self.panel, metric, &self.cfg.grid)?)
    }

    fn country(&self, id: &str) -> Result<usize> {
        self.panel
            .country_index(id)
            .ok_or_else(|| anyhow!("country `{id}` not in the filtered panel"))
    }
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let cfg = load_config(&cli.common)?;
    let out = execute(cli.command, cfg)?;
    match std::io::stdout().lock().write_all(out.as_bytes()) {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        r => Ok(r?),
    }
}

fn execute(command: Command, mut cfg: RunConfig) -> Result<String> {
    let mut out = String::new();
    match command {
        Command::Run { output_dir } => {
            if let Some(d) = output_dir {
                cfg.output_dir = d;
            }
            let manifest = run_pipeline(&cfg)?;
            out.push_str("path,sha256,bytes\n");
            for f in &manifest.files {
                let _ = writeln!(out, "{},{},{}", f.path, f.sha256, f.bytes);
            }
        }
        Command::Ingest { out: dest } => {
            let s = Session::open(cfg)?;
            let (lo, hi) = s.raw.year_range().unwrap_or_default();
            let _ = writeln!(out, "observations,{}", s.raw.len());
            let _ = writeln!(out, "countries,{}", s.raw.countries().len());
            let _ = writeln!(out, "countries_kept,{}", s.panel.countries().len());
            let _ = writeln!(out, "disciplines,{}", s.raw.disciplines().len());
            let _ = writeln!(out, "years,{lo}-{hi}");
            if let Some(path) = dest {
                let file = std::fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
                write_csv(&s.panel, file)?;
            }
        }
        Command::Rca { year, metric } => {
            let s = Session::open(cfg)?;
            let slice = rca_for_year(&s.panel, year.unwrap_or(s.cfg.reference_year), metric)?;
            let flags = rca_flag(&slice);
            out.push_str("country,discipline,rca,has_rca\n");
            for (c, cid) in slice.countries.iter().enumerate() {
                for (d, did) in slice.disciplines.iter().enumerate() {
                    let _ = writeln!(out, "{cid},{did},{},{}", opt(slice.get(c, d)), flags.get(c, d));
                }
            }
        }
        Command::Proximity { year, metric } => {
            let s = Session::open(cfg)?;
            let flags = rca_flag(&rca_for_year(&s.panel, year.unwrap_or(s.cfg.reference_year), metric)?);
            let phi = proximity_matrix(&flags)?;
            out.push_str("discipline_i,discipline_j,phi\n");
            for i in 0..phi.n() {
                for j in 0..phi.n() {
                    let _ = writeln!(out, "{},{},{}", phi.disciplines[i], phi.disciplines[j], num(phi.get(i, j)));
                }
            }
        }
        Command::Density { country, year, metric, since } => {
            let s = Session::open(cfg)?;
            let year = year.unwrap_or(s.cfg.reference_year);
            let c = s.country(&country)?;
            let a = s.analysis(metric)?;
            let vector = |y: i32| a.density.vector(y, c).ok_or_else(|| anyhow!("no density for {y}"));
            let end = vector(year)?;
            match since {
                Some(start) => {
                    let delta = delta_density(&vector(start)?, &end)?;
                    out.push_str("discipline,d_avg_proximity\n");
                    for (did, v) in end.disciplines.iter().zip(delta) {
                        let _ = writeln!(out, "{did},{}", opt(v));
                    }
                }
                None => {
                    out.push_str("discipline,avg_proximity\n");
                    for (did, v) in end.disciplines.iter().zip(&end.density) {
                        let _ = writeln!(out, "{did},{}", opt(*v));
                    }
                }
            }
        }
        Command::Growth { target, metric } => {
            let s = Session::open(cfg)?;
            let a = s.analysis(metric)?;
            let g = match target {
                Target::Rca => &a.growth,
                Target::Raw => &a.raw_growth,
            };
            debug_assert!(matches!(
                (target, g.target),
                (Target::Rca, GrowthTarget::Rca) | (Target::Raw, GrowthTarget::RawCount)
            ));
            out.push_str("country,discipline,period_start,period_end,start_rca,growth\n");
            for r in &g.rows {
                let p = g.period(r);
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    g.countries[r.country],
                    g.disciplines[r.discipline],
                    p.start,
                    p.end,
                    num(r.start_value),
                    num(r.growth)
                );
            }
        }
        Command::Regress { table, column, cluster } => {
            let s = Session::open(cfg)?;
            let col = table_column(table, column)?;
            let a = s.analysis(col.metric)?;
            let level = cluster.map(ClusterLevel::from).unwrap_or(s.cfg.cluster);
            let (_, res) = fit_column(&a, &col, level)?;
            out.push_str(&coefficient_report(&res));
        }
        Command::Project { country, base_year, metric, top, mode, area_map, emit_figure3 } => {
            if let Some(y) = base_year {
                cfg.base_year = Some(y);
            }
            if let Some(p) = area_map {
                cfg.area_map = Some(p);
            }
            let s = Session::open(cfg)?;
            let c = s.country(&country)?;
            let a = s.analysis(metric)?;
            let table = if metric == Metric::Documents { Table::T4a } else { Table::T4b };
            let col = table_column(table, if s.cfg.interaction { 3 } else { 1 })?;
            let (_, res) = fit_column(&a, &col, s.cfg.cluster)?;
            let mode = mode.map(ProjectionMode::from).unwrap_or(s.cfg.projection_mode);
            let mut report = country_projection(&a, &res, c, s.cfg.base_year(), mode)?;
            if let Some(p) = &s.cfg.area_map {
                report = report.with_areas(&read_area_map(p)?);
            }
            let k = top.unwrap_or(s.cfg.top);
            let ranking = rank_disciplines(&report, k);
            if ranking.too_few_rows {
                eprintln!("warning: fewer than {} disciplines without RCA; blocks are short", 2 * k);
            }
            out.push_str("discipline,projection,rca_base,main_area,block\n");
            for (block, rows) in [("bottom", &ranking.bottom), ("top", &ranking.top)] {
                for r in rows {
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{block}",
                        r.discipline,
                        num(r.projected_growth),
                        num(r.base_rca),
                        r.main_area.as_deref().unwrap_or("")
                    );
                }
            }
            if let Some(path) = emit_figure3 {
                let mut fig = String::from("discipline,avg_proximity,projection\n");
                for r in &report.rows {
                    let _ = writeln!(fig, "{},{},{}", r.discipline, num(r.density), num(r.projected_growth));
                }
                std::fs::write(&path, fig).with_context(|| format!("writing {}", path.display()))?;
            }
        }
        Command::Report { report } => match report {
            Report::Summary { table } => {
                let s = Session::open(cfg)?;
                let t = if table == 2 { Table::T4a } else { Table::T4b };
                out.push_str("subsample,variable,count,mean,sd,min,max\n");
                let mut analysis = None;
                for column in 1..=2 {
                    let col = table_column(t, column)?;
                    let a = match &analysis {
                        Some(a) => a,
                        None => analysis.insert(s.analysis(col.metric)?),
                    };
                    let summary = summary_stats(&column_dataset(a, &col)?)?;
                    for (name, v) in &summary.variables {
                        let _ = writeln!(
                            out,
                            "{},{name},{},{},{},{},{}",
                            summary.subsample,
                            v.count,
                            num(v.mean),
                            num(v.sd),
                            num(v.min),
                            num(v.max)
                        );
                    }
                }
            }
            Report::Kde { figure, metric, period } => {
                let s = Session::open(cfg)?;
                let position = match period {
                    Some(p) => Some(
                        s.cfg
                            .grid
                            .position(p)
                            .ok_or_else(|| anyhow!("period {p} is not on the grid"))?,
                    ),
                    None => None,
                };
                let a = s.analysis(metric)?;
                let samples = transition_samples(&a, &s.cfg.grid, position);
                out.push_str("group,bandwidth,x,density\n");
                for curve in figure_curves(&samples, figure)? {
                    let group = curve.group.map(|g| g.as_str()).unwrap_or("");
                    for (x, v) in curve.grid.iter().zip(&curve.values) {
                        let _ = writeln!(out, "{group},{},{},{}", num(curve.bandwidth), num(*x), num(*v));
                    }
                }
            }
        },
    }
    Ok(out)
}
