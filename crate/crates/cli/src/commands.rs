use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use mdsts_core::markers::{CollectionSummary, MarkerReport};
use mdsts_core::plot::{simplex_svg, walk_svg, PlotPoint, WalkPlot};
use mdsts_core::simplex::leading_component;
use mdsts_core::synth::{generate, CorpusSpec, Generator};
use mdsts_core::zipf::{component_census, zipf_coefficient};
use mdsts_core::{
    analyze_collection, analyze_entity, diversification, entropy_vector, fit_trend, moving_matrix, project, walk,
    AnalysisConfig, Execution, MultiSeries,
};

use crate::config::{self, ConfigBuilder};
use crate::error::CliError;
use crate::ingest::{ingest, stacked_csv, Layout};
use crate::output::{csv_table, file_stem, joined, json, num, svg_with_config, write_atomic};

#[derive(Debug, Parser)]
#[command(name = "mdsts", version, about = "Behavioral markers for collections of multi-dimensional sparse time series")]
pub struct Cli {
    /// More log output (repeatable).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    /// Only errors on stderr.
    #[arg(short, long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Full marker reports and the collection summary.
    Markers {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        analysis: AnalysisArgs,
        /// Explicit holdout windows (same layout as the input), matched by entity id.
        #[arg(long)]
        holdout: Option<PathBuf>,
        #[arg(long, short)]
        out_dir: PathBuf,
    },
    /// Moving matrix, entropy walk and trend per entity.
    Walk {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        analysis: AnalysisArgs,
        #[arg(long, short)]
        out_dir: PathBuf,
    },
    /// Word censuses, rank-frequency data and diversification.
    Zipf {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        analysis: AnalysisArgs,
        #[arg(long, short)]
        out_dir: PathBuf,
    },
    /// Entity positions in the simplex as SVG (three components only).
    SimplexPlot {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        analysis: AnalysisArgs,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Attribution verdicts for supplied holdout windows.
    Attribute {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        analysis: AnalysisArgs,
        /// One holdout window per entity, same layout as the input.
        #[arg(long)]
        holdout: PathBuf,
        #[arg(long, short)]
        out_dir: PathBuf,
    },
    /// Deterministic synthetic corpus in stacked layout.
    Generate {
        #[arg(long)]
        entities: usize,
        #[arg(long)]
        components: usize,
        #[arg(long)]
        length: usize,
        /// `constant[:level]`, `iid_uniform`, `markov[:bias]` or
        /// `bursty_sparse[:zero_density]`; give one, or one per component.
        #[arg(long = "generator", required = true)]
        generators: Vec<Generator>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Prints the effective configuration file.
    Config {
        #[command(flatten)]
        analysis: AnalysisArgs,
    },
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Input CSV.
    #[arg(long, short)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = Layout::Stacked)]
    pub layout: Layout,
}

#[derive(Debug, Args)]
pub struct AnalysisArgs {
    /// Configuration file (`key = value` lines).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overrides one configuration key, e.g. `--set window_length=200`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    #[arg(long, value_enum, default_value_t = ExecArg::Parallel)]
    pub execution: ExecArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExecArg {
    Sequential,
    Parallel,
}

impl AnalysisArgs {
    pub fn config(&self) -> Result<AnalysisConfig, CliError> {
        let mut b = ConfigBuilder::default();
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            b.apply_text(&text, &path.display().to_string())?;
        }
        for o in &self.overrides {
            b.apply_override(o)?;
        }
        b.build()
    }

    fn execution(&self) -> Execution {
        match self.execution {
            ExecArg::Sequential => Execution::Sequential,
            ExecArg::Parallel => Execution::Parallel,
        }
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Markers { input, analysis, holdout, out_dir } => {
            let config = analysis.config()?;
            let entities = ingest(&input.input, input.layout)?.entities;
            let holdouts = holdout.map(|p| ingest(&p, input.layout)).transpose()?.map(|h| h.entities);
            markers(&entities, holdouts.as_deref(), &config, analysis.execution(), &out_dir)
        }
        Command::Walk { input, analysis, out_dir } => {
            let config = analysis.config()?;
            let entities = ingest(&input.input, input.layout)?.entities;
            walks(&entities, &config, analysis.execution(), &out_dir)
        }
        Command::Zipf { input, analysis, out_dir } => {
            let config = analysis.config()?;
            let entities = ingest(&input.input, input.layout)?.entities;
            zipf(&entities, &config, analysis.execution(), &out_dir)
        }
        Command::SimplexPlot { input, analysis, out } => {
            let config = analysis.config()?;
            let entities = ingest(&input.input, input.layout)?.entities;
            simplex_plot(&entities, &config, analysis.execution(), &out)
        }
        Command::Attribute { input, analysis, holdout, out_dir } => {
            let config = analysis.config()?;
            let entities = ingest(&input.input, input.layout)?.entities;
            let holdouts = ingest(&holdout, input.layout)?.entities;
            attribute(&entities, &holdouts, &config, analysis.execution(), &out_dir)
        }
        Command::Generate { entities, components, length, generators, seed, out } => {
            let spec = CorpusSpec { entity_count: entities, component_count: components, length, generators, seed };
            spec.validate().map_err(|e| CliError::Usage(e.to_string()))?;
            let corpus = generate(&spec)?;
            write_atomic(&out, &stacked_csv(&corpus))
        }
        Command::Config { analysis } => {
            print!("{}", config::to_text(&analysis.config()?));
            Ok(())
        }
    }
}

/// First failure in input order, with entity context.
fn first_error<T>(entities: &[MultiSeries], results: Vec<mdsts_core::Result<T>>) -> Result<Vec<T>, CliError> {
    entities
        .iter()
        .zip(results)
        .map(|(m, r)| {
            r.map_err(|e| match e {
                e @ mdsts_core::Error::Entity { .. } => e.into(),
                e => e.in_entity(m.entity_id()).into(),
            })
        })
        .collect()
}

fn require_three(entities: &[MultiSeries]) -> Result<(), CliError> {
    match entities.iter().find(|m| m.dimension() != 3) {
        Some(m) => Err(CliError::Analysis {
            entity_id: Some(m.entity_id().to_owned()),
            message: mdsts_core::Error::PlotDimension(m.dimension()).to_string(),
        }),
        None => Ok(()),
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub fn markers(
    entities: &[MultiSeries],
    holdouts: Option<&[MultiSeries]>,
    config: &AnalysisConfig,
    exec: Execution,
    out_dir: &Path,
) -> Result<(), CliError> {
    let summary = analyze_collection(entities, holdouts, config, exec)?;
    write_atomic(&out_dir.join("config.txt"), &config::to_text(config))?;
    write_atomic(&out_dir.join("reports.json"), &json(&summary))?;
    write_atomic(&out_dir.join("summary.csv"), &summary_csv(&summary, config)?)?;
    write_atomic(&out_dir.join("diversification.csv"), &diversification_csv(&summary.reports, config)?)?;
    write_atomic(&out_dir.join("diversification_histogram.csv"), &histogram_csv(&summary, config)?)?;
    write_atomic(&out_dir.join("entropy_vs_total.csv"), &entropy_vs_total_csv(&summary, config)?)?;

    if summary.reports.iter().all(|r| r.component_labels.len() == 3) && !summary.reports.is_empty() {
        let labels = summary.reports[0].component_labels.clone();
        let points: Vec<PlotPoint<'_>> = summary
            .reports
            .iter()
            .map(|r| PlotPoint { label: &r.entity_id, coords: &r.simplex_point, leading: r.leading })
            .collect();
        write_atomic(&out_dir.join("simplex.svg"), &svg_with_config(&simplex_svg(&labels, &points)?, config))?;
        for r in &summary.reports {
            let plot = WalkPlot {
                entity_id: &r.entity_id,
                walk: &r.walk,
                trend: r.trend.as_ref(),
                holdout: r.attribution.as_ref().map(|a| a.point.as_slice()),
            };
            let svg = walk_svg(&r.component_labels, &[plot])?;
            let path = out_dir.join("walks").join(format!("{}.svg", file_stem(&r.entity_id)));
            write_atomic(&path, &svg_with_config(&svg, config))?;
        }
    } else {
        log::warn!("skipping plots: they need exactly three components");
    }

    for f in &summary.failures {
        log::error!("entity `{}` quarantined: {}", f.entity_id, f.message);
    }
    match summary.failures.first() {
        None => Ok(()),
        Some(f) => Err(CliError::Analysis {
            entity_id: Some(f.entity_id.clone()),
            message: format!(
                "{} of {} entities failed (outputs written for the rest); first: {}",
                summary.failures.len(),
                entities.len(),
                f.message
            ),
        }),
    }
}

fn summary_csv(summary: &CollectionSummary, config: &AnalysisConfig) -> Result<String, CliError> {
    let header = [
        "entity_id",
        "leading",
        "leading_label",
        "trend_leading_last",
        "trend_direction",
        "trend_mean_distance",
        "trend_error",
        "diversification",
        "category",
        "verdict",
        "verdict_distance",
        "grand_total",
        "norm_euclidean",
        "norm_l1",
        "sparse_components",
    ];
    let rows: Vec<Vec<String>> = summary
        .reports
        .iter()
        .map(|r| {
            let sparse: Vec<&str> =
                r.sparsity.iter().zip(&r.component_labels).filter(|(s, _)| s.is_sparse).map(|(_, l)| l.as_str()).collect();
            vec![
                r.entity_id.clone(),
                r.leading.to_string(),
                r.component_labels[r.leading - 1].clone(),
                r.trend.as_ref().map(|t| t.leading_last.to_string()).unwrap_or_default(),
                r.trend.as_ref().map(|t| joined(&t.direction)).unwrap_or_default(),
                opt(r.trend.as_ref().map(|t| t.mean_distance)),
                r.trend_error.clone().unwrap_or_default(),
                num(r.diversification.value),
                r.diversification.category.to_string(),
                r.attribution.as_ref().map(|a| a.verdict.status.as_str().to_owned()).unwrap_or_default(),
                opt(r.attribution.as_ref().map(|a| a.verdict.distance)),
                num(r.grand_total),
                num(r.norm_euclidean),
                num(r.norm_l1),
                sparse.join(";"),
            ]
        })
        .collect();
    csv_table(config, &header, &rows)
}

fn diversification_csv(reports: &[MarkerReport], config: &AnalysisConfig) -> Result<String, CliError> {
    let rows: Vec<Vec<String>> = reports
        .iter()
        .map(|r| {
            let d = &r.diversification;
            vec![
                r.entity_id.clone(),
                num(d.value),
                d.category.to_string(),
                joined(&d.per_component_rho),
                d.degenerate_components.iter().map(usize::to_string).collect::<Vec<_>>().join(";"),
                d.observed_classes.iter().map(usize::to_string).collect::<Vec<_>>().join(";"),
                d.possible_classes.to_string(),
            ]
        })
        .collect();
    csv_table(
        config,
        &["entity_id", "diversification", "category", "rho", "degenerate_components", "observed_classes", "possible_classes"],
        &rows,
    )
}

fn histogram_csv(summary: &CollectionSummary, config: &AnalysisConfig) -> Result<String, CliError> {
    let n = summary.reports.len().max(1) as f64;
    let rows: Vec<Vec<String>> = summary
        .diversification_category_histogram
        .iter()
        .map(|(c, &k)| vec![c.to_string(), k.to_string(), num(k as f64 / n)])
        .collect();
    csv_table(config, &["category", "count", "fraction"], &rows)
}

fn entropy_vs_total_csv(summary: &CollectionSummary, config: &AnalysisConfig) -> Result<String, CliError> {
    let rows: Vec<Vec<String>> = summary
        .entropy_vs_total
        .iter()
        .map(|e| vec![e.entity_id.clone(), num(e.grand_total), num(e.grand_total_normalized), num(e.norm_euclidean)])
        .collect();
    csv_table(config, &["entity_id", "grand_total", "grand_total_normalized", "norm_euclidean"], &rows)
}

struct WalkData {
    rows: Vec<Vec<f64>>,
    points: Vec<Vec<f64>>,
    offsets: Vec<usize>,
    trend: Option<mdsts_core::markers::TrendSummary>,
    trend_error: Option<String>,
}

fn walk_of(m: &MultiSeries, config: &AnalysisConfig) -> mdsts_core::Result<WalkData> {
    let alphabet = config.alphabet()?;
    let mm = moving_matrix(m, alphabet, config.differencing, &config.window, config.symbolization_mode)?;
    let w = walk(&mm)?;
    let offsets = config.window.offsets(m.len() - usize::from(config.differencing))?;
    let (trend, trend_error) = match fit_trend(&w, &mm) {
        Ok(t) => (
            Some(mdsts_core::markers::TrendSummary {
                leading_last: t.leading_last,
                direction: t.direction,
                line_point: t.line_point,
                mean_distance: t.mean_distance,
            }),
            None,
        ),
        Err(e @ (mdsts_core::Error::StationaryWalk | mdsts_core::Error::AmbiguousTrend)) => (None, Some(e.to_string())),
        Err(e) => return Err(e),
    };
    Ok(WalkData {
        rows: mm.rows().to_vec(),
        points: w.points().iter().map(|p| p.coords().to_vec()).collect(),
        offsets,
        trend,
        trend_error,
    })
}

pub fn walks(entities: &[MultiSeries], config: &AnalysisConfig, exec: Execution, out_dir: &Path) -> Result<(), CliError> {
    let data = first_error(entities, exec.map(entities, |m| walk_of(m, config)))?;
    let n = entities.first().map_or(0, MultiSeries::dimension);

    let mut header: Vec<String> = ["entity_id", "window", "start"].map(String::from).to_vec();
    header.extend((1..=n).map(|j| format!("h{j}")));
    header.extend((1..n).map(|j| format!("y{j}")));
    let mut rows = Vec::new();
    for (m, d) in entities.iter().zip(&data) {
        for (i, p) in d.points.iter().enumerate() {
            let mut row = vec![m.entity_id().to_owned(), (i + 1).to_string(), d.offsets[i].to_string()];
            row.extend(d.rows.iter().map(|r| num(r[i])));
            row.extend(p.iter().copied().map(num));
            rows.push(row);
        }
    }
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    write_atomic(&out_dir.join("walk.csv"), &csv_table(config, &header_refs, &rows)?)?;

    let trend_rows: Vec<Vec<String>> = entities
        .iter()
        .zip(&data)
        .map(|(m, d)| {
            let t = d.trend.as_ref();
            vec![
                m.entity_id().to_owned(),
                d.points.len().to_string(),
                t.map(|t| t.leading_last.to_string()).unwrap_or_default(),
                t.map(|t| joined(&t.direction)).unwrap_or_default(),
                t.map(|t| joined(&t.line_point)).unwrap_or_default(),
                opt(t.map(|t| t.mean_distance)),
                d.trend_error.clone().unwrap_or_default(),
            ]
        })
        .collect();
    write_atomic(
        &out_dir.join("trend.csv"),
        &csv_table(
            config,
            &["entity_id", "windows", "leading_last", "direction", "line_point", "mean_distance", "trend_error"],
            &trend_rows,
        )?,
    )?;

    if n == 3 && entities.iter().all(|m| m.dimension() == 3) {
        let plots: Vec<WalkPlot<'_>> = entities
            .iter()
            .zip(&data)
            .map(|(m, d)| WalkPlot { entity_id: m.entity_id(), walk: &d.points, trend: d.trend.as_ref(), holdout: None })
            .collect();
        let svg = walk_svg(&entities[0].labels(), &plots)?;
        write_atomic(&out_dir.join("walks.svg"), &svg_with_config(&svg, config))?;
    } else {
        log::warn!("skipping walk plot: it needs exactly three components");
    }
    Ok(())
}

pub fn zipf(entities: &[MultiSeries], config: &AnalysisConfig, exec: Execution, out_dir: &Path) -> Result<(), CliError> {
    let alphabet = config.alphabet()?;
    let results = exec.map(entities, |m| {
        let d = diversification(
            m,
            alphabet,
            config.differencing,
            config.word_length,
            config.equivalence,
            config.rare_threshold,
        )?;
        let censuses = m
            .components()
            .iter()
            .map(|c| component_census(c.values(), alphabet, config.differencing, config.word_length, config.equivalence))
            .collect::<mdsts_core::Result<Vec<_>>>()?;
        Ok((d, censuses))
    });
    let results = first_error(entities, results)?;

    let mut div_rows = Vec::new();
    for (m, (d, censuses)) in entities.iter().zip(&results) {
        div_rows.push(vec![
            m.entity_id().to_owned(),
            num(d.value),
            d.category.to_string(),
            joined(&d.per_component_rho),
            d.degenerate_components.iter().map(usize::to_string).collect::<Vec<_>>().join(";"),
        ]);
        for (c, census) in m.components().iter().zip(censuses) {
            let fit = zipf_coefficient(census, config.rare_threshold)?;
            let rows: Vec<Vec<String>> = census
                .classes
                .iter()
                .enumerate()
                .map(|(i, class)| {
                    let rank = i + 1;
                    vec![
                        rank.to_string(),
                        census.class_label(class),
                        class.count.to_string(),
                        num(class.frequency),
                        num((rank as f64).ln()),
                        num(class.frequency.ln()),
                        (rank <= fit.points_used).to_string(),
                    ]
                })
                .collect();
            let table = csv_table(
                config,
                &["rank", "class", "count", "frequency", "ln_rank", "ln_frequency", "in_fit"],
                &rows,
            )?;
            let name = format!("{}__{}.csv", file_stem(m.entity_id()), file_stem(c.label()));
            write_atomic(&out_dir.join("census").join(name), &table)?;
        }
    }
    write_atomic(
        &out_dir.join("diversification.csv"),
        &csv_table(config, &["entity_id", "diversification", "category", "rho", "degenerate_components"], &div_rows)?,
    )
}

pub fn simplex_plot(entities: &[MultiSeries], config: &AnalysisConfig, exec: Execution, out: &Path) -> Result<(), CliError> {
    require_three(entities)?;
    let alphabet = config.alphabet()?;
    let results = exec.map(entities, |m| {
        let h = entropy_vector(m, alphabet, config.differencing)?;
        let p = project(&h)?;
        Ok((p.coords().to_vec(), leading_component(h.values())))
    });
    let points = first_error(entities, results)?;
    let plot: Vec<PlotPoint<'_>> = entities
        .iter()
        .zip(&points)
        .map(|(m, (coords, leading))| PlotPoint { label: m.entity_id(), coords, leading: *leading })
        .collect();
    let svg = simplex_svg(&entities[0].labels(), &plot)?;
    write_atomic(out, &svg_with_config(&svg, config))
}

pub fn attribute(
    entities: &[MultiSeries],
    holdouts: &[MultiSeries],
    config: &AnalysisConfig,
    exec: Execution,
    out_dir: &Path,
) -> Result<(), CliError> {
    let pairs = entities
        .iter()
        .map(|m| {
            holdouts.iter().find(|q| q.entity_id() == m.entity_id()).map(|q| (m, q)).ok_or_else(|| {
                CliError::Data(format!("no holdout window for entity `{}`", m.entity_id()))
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let reports = first_error(entities, exec.map(&pairs, |(m, q)| analyze_entity(m, Some(q), config)))?;

    let mut rows = Vec::new();
    for r in &reports {
        let Some(a) = &r.attribution else {
            return Err(CliError::Analysis {
                entity_id: Some(r.entity_id.clone()),
                message: format!(
                    "entity `{}`: cannot attribute: {}",
                    r.entity_id,
                    r.trend_error.as_deref().unwrap_or("no trend")
                ),
            });
        };
        let v = &a.verdict;
        rows.push(vec![
            r.entity_id.clone(),
            v.status.as_str().to_owned(),
            num(v.distance),
            num(v.threshold),
            v.leading.to_string(),
            r.trend.as_ref().map(|t| t.leading_last.to_string()).unwrap_or_default(),
            joined(&a.point),
            joined(&a.entropy_vector),
        ]);
    }
    write_atomic(
        &out_dir.join("verdicts.csv"),
        &csv_table(
            config,
            &["entity_id", "verdict", "distance", "threshold", "leading_q", "leading_last", "point", "entropy_vector"],
            &rows,
        )?,
    )?;
    write_atomic(&out_dir.join("attribution.json"), &json(&reports))
}
