//! Command-line interface: ingest collection-pipeline CSVs, analyze the
//! forwarding graph, optimize bridge-score weights, run removal experiments,
//! and emit engagement statistics. All outputs are plain CSV/JSON/GEXF files
//! under `--out`.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chrono::{DateTime, TimeDelta, Utc};
use clap::{Args, Parser, Subcommand};

use bridgenet::bridge::{rank, BridgeRanking, WeightTriple};
use bridgenet::community::louvain;
use bridgenet::error::{Error, Result};
use bridgenet::gexf::{read_gexf, write_gexf};
use bridgenet::graph::{normalize_id, ForwardGraph};
use bridgenet::ingest::{
    build_graph, engagement_summary, incoming_events, outgoing_events, parse_timestamp,
    posting_frequency, read_chats, read_messages, temporal_filter, write_engagement_csv,
    write_frequency_series_csv, write_rejects_csv, ChatColumns, EdgeEvent, MessageColumns,
    RejectedRow,
};
use bridgenet::metrics::{compute_metrics, MetricParams};
use bridgenet::perturb::{
    comparative_analysis, frequency_analysis, grid_search, perturbation_report,
    write_comparative_csv,
};

#[derive(Parser)]
#[command(
    name = "bridgenet",
    version,
    about = "Bridge-node identification and disruption analysis for message-forwarding networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse the message/chats CSVs into a forwarding graph.
    Ingest {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Compute metrics, bridge ranking, and communities.
    Analyze {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        analysis: AnalysisArgs,
        #[command(flatten)]
        out: OutArgs,
        /// Report |E|/(|V|(|V|-1)) instead of the factor-2 density in the
        /// summary.
        #[arg(long, env = "BRIDGENET_DIRECTED_DENSITY")]
        directed_density: bool,
    },
    /// Sweep the integer weight cube and report the density-optimal triple.
    Optimize {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        analysis: AnalysisArgs,
        #[command(flatten)]
        out: OutArgs,
        /// Number of top-ranked nodes removed per combination.
        #[arg(long, env = "BRIDGENET_K", default_value_t = 12)]
        k: usize,
        /// Inclusive integer weight range, e.g. 1..10.
        #[arg(long, env = "BRIDGENET_GRID", default_value = "1..10", value_parser = parse_grid)]
        grid: (u32, u32),
    },
    /// Remove a target set and report the structural impact.
    Perturb {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        analysis: AnalysisArgs,
        #[command(flatten)]
        out: OutArgs,
        /// Number of top bridge-score nodes to remove (0 removes nothing).
        #[arg(long, env = "BRIDGENET_K", default_value_t = 12)]
        k: usize,
        /// Explicit comma-separated target list overriding top-k selection.
        #[arg(long, env = "BRIDGENET_TARGETS")]
        targets: Option<String>,
        /// Also run the single-metric comparative removals.
        #[arg(long, env = "BRIDGENET_COMPARATIVE")]
        comparative: bool,
        #[arg(long, env = "BRIDGENET_DIRECTED_DENSITY")]
        directed_density: bool,
    },
    /// Per-channel engagement aggregates and posting-frequency series.
    Stats {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        out: OutArgs,
        /// Bucket width for the posting-frequency series (e.g. 1d, 6h, 30m).
        #[arg(long, env = "BRIDGENET_BUCKET", default_value = "1d", value_parser = parse_bucket)]
        bucket: TimeDelta,
        /// Restrict engagement aggregates to these channels.
        #[arg(long, env = "BRIDGENET_CHANNELS", value_delimiter = ',')]
        channels: Vec<String>,
    },
    /// Convert a graph file between the edge-list and GEXF formats.
    Export {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        out: OutArgs,
        /// Output format.
        #[arg(long, env = "BRIDGENET_FORMAT", value_parser = ["gexf", "edgelist"])]
        format: String,
    },
}

#[derive(Args)]
struct SourceArgs {
    /// Message dataset CSV.
    #[arg(long, env = "BRIDGENET_MESSAGES")]
    messages: Option<PathBuf>,
    /// Collected-chats dataset CSV.
    #[arg(long, env = "BRIDGENET_CHATS")]
    chats: Option<PathBuf>,
    /// Existing graph file: .gexf, or edge-list otherwise.
    #[arg(long, env = "BRIDGENET_GRAPH")]
    graph: Option<PathBuf>,
    /// Drop forwarding events before this instant (RFC 3339).
    #[arg(long, env = "BRIDGENET_CUTOFF", default_value = "2022-01-01T00:00:00Z")]
    cutoff: String,
    /// strftime override applied to every CSV timestamp field.
    #[arg(long, env = "BRIDGENET_TIME_FORMAT")]
    time_format: Option<String>,
    /// CSV column overrides as role=name pairs. Roles: channel, message_id,
    /// timestamp, forward_from, views, forwards, replies, username, source,
    /// collected_at.
    #[arg(long, env = "BRIDGENET_COLUMNS", value_delimiter = ',')]
    columns: Vec<String>,
}

#[derive(Args)]
struct AnalysisArgs {
    /// Louvain resolution parameter.
    #[arg(long, env = "BRIDGENET_RESOLUTION", default_value_t = 2.2)]
    resolution: f64,
    /// Seed for every randomized stage.
    #[arg(long, env = "BRIDGENET_SEED", default_value_t = 42)]
    seed: u64,
    /// Bridge-score weights as w_i,w_e,w_c.
    #[arg(long, env = "BRIDGENET_WEIGHTS", default_value = "10,7,7", value_parser = parse_weights)]
    weights: WeightTriple,
    /// Eigenvector convergence tolerance.
    #[arg(long, env = "BRIDGENET_EIG_TOL", default_value_t = 1e-8)]
    eig_tol: f64,
    /// Eigenvector iteration budget.
    #[arg(long, env = "BRIDGENET_EIG_MAX_ITER", default_value_t = 1000)]
    eig_max_iter: usize,
    /// Disable the uniform teleport term (pure power method; requires a
    /// strongly connected graph to converge).
    #[arg(long, env = "BRIDGENET_NO_DAMPING")]
    no_damping: bool,
}

impl AnalysisArgs {
    fn metric_params(&self) -> MetricParams {
        MetricParams {
            tolerance: self.eig_tol,
            max_iterations: self.eig_max_iter,
            damping: if self.no_damping { 0.0 } else { 0.15 },
        }
    }
}

#[derive(Args)]
struct OutArgs {
    /// Output directory (created if missing).
    #[arg(long, env = "BRIDGENET_OUT", default_value = ".")]
    out: PathBuf,
}

fn parse_weights(raw: &str) -> std::result::Result<WeightTriple, String> {
    let parts: Vec<&str> = raw.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected w_i,w_e,w_c, got {raw:?}"));
    }
    let parse = |s: &str| -> std::result::Result<f64, String> {
        let v: f64 = s.parse().map_err(|_| format!("bad weight {s:?}"))?;
        if !v.is_finite() || v <= 0.0 {
            return Err(format!("weight {s:?} must be positive"));
        }
        Ok(v)
    };
    Ok(WeightTriple::new(parse(parts[0])?, parse(parts[1])?, parse(parts[2])?))
}

fn parse_grid(raw: &str) -> std::result::Result<(u32, u32), String> {
    let (lo, hi) = raw
        .split_once("..")
        .ok_or_else(|| format!("expected lo..hi, got {raw:?}"))?;
    let lo: u32 = lo.trim().parse().map_err(|_| format!("bad grid bound {lo:?}"))?;
    let hi: u32 = hi.trim().parse().map_err(|_| format!("bad grid bound {hi:?}"))?;
    if lo < 1 || lo > hi {
        return Err(format!("grid must satisfy 1 <= lo <= hi, got {raw:?}"));
    }
    Ok((lo, hi))
}

fn parse_bucket(raw: &str) -> std::result::Result<TimeDelta, String> {
    let raw = raw.trim();
    let (value, unit) = match raw.find(|c: char| !c.is_ascii_digit()) {
        Some(split) => raw.split_at(split),
        None => (raw, "s"),
    };
    let value: i64 = value.parse().map_err(|_| format!("bad bucket width {raw:?}"))?;
    let delta = match unit {
        "s" => TimeDelta::seconds(value),
        "m" => TimeDelta::minutes(value),
        "h" => TimeDelta::hours(value),
        "d" => TimeDelta::days(value),
        other => return Err(format!("unknown bucket unit {other:?} (use s/m/h/d)")),
    };
    if delta <= TimeDelta::zero() {
        return Err(format!("bucket width must be positive, got {raw:?}"));
    }
    Ok(delta)
}

struct ColumnOverrides {
    messages: MessageColumns,
    chats: ChatColumns,
}

fn parse_columns(pairs: &[String]) -> Result<ColumnOverrides> {
    let mut messages = MessageColumns::default();
    let mut chats = ChatColumns::default();
    for pair in pairs {
        let (role, name) = pair.split_once('=').ok_or_else(|| {
            Error::InvalidArgument(format!("column override {pair:?} is not role=name"))
        })?;
        let name = name.trim().to_string();
        match role.trim() {
            "channel" => messages.channel = name,
            "message_id" => messages.message_id = name,
            "timestamp" => messages.timestamp = name,
            "forward_from" => messages.forward_from = name,
            "views" => messages.views = name,
            "forwards" => messages.forwards = name,
            "replies" => messages.replies = name,
            "username" => chats.username = name,
            "source" => chats.source = name,
            "collected_at" => chats.collected_at = name,
            other => {
                return Err(Error::InvalidArgument(format!(
                    "unknown column role {other:?}"
                )))
            }
        }
    }
    Ok(ColumnOverrides { messages, chats })
}

/// Everything a CSV ingestion produced besides the graph itself.
struct IngestOutcome {
    graph: ForwardGraph,
    rejects: Vec<(String, RejectedRow)>,
    raw_events: usize,
    dropped_before_cutoff: usize,
    untimestamped_kept: usize,
}

fn ingest_from_csvs(source: &SourceArgs) -> Result<IngestOutcome> {
    let columns = parse_columns(&source.columns)?;
    let cutoff: DateTime<Utc> = parse_timestamp(&source.cutoff, None)?;
    let time_format = source.time_format.as_deref();
    let mut events: Vec<EdgeEvent> = Vec::new();
    let mut rejects: Vec<(String, RejectedRow)> = Vec::new();
    let mut seeds: HashSet<String> = HashSet::new();

    if let Some(path) = &source.messages {
        let file = File::open(path)
            .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))?;
        let (records, bad) = read_messages(BufReader::new(file), &columns.messages, time_format)?;
        let name = path.display().to_string();
        rejects.extend(bad.into_iter().map(|r| (name.clone(), r)));
        for r in &records {
            seeds.insert(normalize_id(&r.channel)?);
        }
        events.extend(incoming_events(&records));
    }
    if let Some(path) = &source.chats {
        let file = File::open(path)
            .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))?;
        let (records, bad) = read_chats(BufReader::new(file), &columns.chats, time_format)?;
        let name = path.display().to_string();
        rejects.extend(bad.into_iter().map(|r| (name.clone(), r)));
        for r in &records {
            seeds.insert(normalize_id(&r.source)?);
        }
        events.extend(outgoing_events(&records));
    }

    let raw_events = events.len();
    let filtered = temporal_filter(events, cutoff);
    let graph = build_graph(&filtered.kept, &seeds)?;
    Ok(IngestOutcome {
        graph,
        rejects,
        raw_events,
        dropped_before_cutoff: filtered.dropped_before_cutoff,
        untimestamped_kept: filtered.untimestamped_kept,
    })
}

fn load_graph(source: &SourceArgs) -> Result<ForwardGraph> {
    let csv_supplied = source.messages.is_some() || source.chats.is_some();
    match (&source.graph, csv_supplied) {
        (Some(_), true) => Err(Error::InvalidArgument(
            "supply either --graph or the CSV inputs, not both".to_string(),
        )),
        (Some(path), false) => {
            let file = File::open(path).map_err(|e| {
                Error::InvalidArgument(format!("cannot read {}: {e}", path.display()))
            })?;
            let reader = BufReader::new(file);
            if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("gexf")) {
                Ok(read_gexf(reader)?.graph)
            } else {
                ForwardGraph::read_edgelist(reader)
            }
        }
        (None, true) => Ok(ingest_from_csvs(source)?.graph),
        (None, false) => Err(Error::InvalidArgument(
            "no graph source: supply --graph or --messages/--chats".to_string(),
        )),
    }
}

fn create_out(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path)?;
    Ok(())
}

fn out_file(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn percent_line(metric: &str, before: Option<f64>, after: Option<f64>) -> String {
    let fmt = |v: f64| format!("{v}");
    match (before, after) {
        (Some(b), Some(a)) if b != 0.0 => {
            let pct = (a / b - 1.0) * 100.0;
            if pct == 0.0 {
                format!("no change in {metric} ({} -> {})", fmt(b), fmt(a))
            } else if pct > 0.0 {
                format!("{pct:.2}% increase in {metric} ({} -> {})", fmt(b), fmt(a))
            } else {
                format!("{:.2}% decrease in {metric} ({} -> {})", -pct, fmt(b), fmt(a))
            }
        }
        (Some(b), Some(a)) => format!("{metric}: {} -> {}", fmt(b), fmt(a)),
        (Some(b), None) => format!("{metric}: {} -> undefined", fmt(b)),
        (None, Some(a)) => format!("{metric}: undefined -> {}", fmt(a)),
        (None, None) => format!("{metric}: undefined on both sides"),
    }
}

fn cmd_ingest(source: &SourceArgs, out: &OutArgs) -> Result<()> {
    if source.messages.is_none() && source.chats.is_none() {
        return Err(Error::InvalidArgument(
            "ingest needs --messages and/or --chats".to_string(),
        ));
    }
    if source.graph.is_some() {
        return Err(Error::InvalidArgument(
            "ingest reads CSVs; --graph is not a valid input here".to_string(),
        ));
    }
    create_out(&out.out)?;
    let outcome = ingest_from_csvs(source)?;
    outcome.graph.write_edgelist(out_file(&out.out, "graph.edgelist")?)?;
    write_gexf(&outcome.graph, None, None, out_file(&out.out, "graph.gexf")?)?;
    write_rejects_csv(&outcome.rejects, out_file(&out.out, "rejects.csv")?)?;
    println!("nodes: {}", outcome.graph.node_count());
    println!("edges: {}", outcome.graph.edge_count());
    println!("forward events stored: {}", outcome.graph.total_weight());
    println!("dropped self-loops: {}", outcome.graph.dropped_self_loops());
    println!("rejected rows: {}", outcome.rejects.len());
    println!("events before cutoff: {}", outcome.dropped_before_cutoff);
    println!("untimestamped events kept: {}", outcome.untimestamped_kept);
    println!(
        "events ingested: {}",
        outcome.raw_events - outcome.dropped_before_cutoff
    );
    Ok(())
}

fn cmd_analyze(
    source: &SourceArgs,
    analysis: &AnalysisArgs,
    out: &OutArgs,
    directed_density: bool,
) -> Result<()> {
    create_out(&out.out)?;
    let g = load_graph(source)?;
    let params = analysis.metric_params();
    let table = compute_metrics(&g, &params)?;
    table.write_csv(out_file(&out.out, "metrics.csv")?)?;
    let ranking: BridgeRanking = rank(&g, &analysis.weights, &params)?;
    ranking.write_csv(out_file(&out.out, "ranking.csv")?)?;
    let partition = louvain(&g, analysis.resolution, analysis.seed)?;
    partition.write_csv(out_file(&out.out, "partition.csv")?)?;
    let scores: std::collections::BTreeMap<String, f64> = ranking
        .entries
        .iter()
        .map(|e| (e.id.clone(), e.score))
        .collect();
    write_gexf(
        &g,
        Some(&scores),
        Some(&partition),
        out_file(&out.out, "graph.gexf")?,
    )?;
    let density = if directed_density {
        g.directed_density()?
    } else {
        g.density()?
    };
    println!("nodes: {}", g.node_count());
    println!("edges: {}", g.edge_count());
    println!(
        "density{}: {}",
        if directed_density { " (directed)" } else { "" },
        density
    );
    match g.average_path_length() {
        Ok(v) => println!("average path length: {v}"),
        Err(_) => println!("average path length: undefined"),
    }
    println!("modularity: {}", partition.modularity);
    println!("communities: {}", partition.community_count);
    if let Some(top) = ranking.entries.first() {
        println!("top bridge channel: {} ({})", top.id, top.score);
    }
    Ok(())
}

fn cmd_optimize(
    source: &SourceArgs,
    analysis: &AnalysisArgs,
    out: &OutArgs,
    k: usize,
    grid: (u32, u32),
) -> Result<()> {
    create_out(&out.out)?;
    let g = load_graph(source)?;
    let params = analysis.metric_params();
    let result = grid_search(&g, k, grid.0, grid.1, &params)?;
    result.write_csv(out_file(&out.out, "grid.csv")?)?;
    let freq = frequency_analysis(&result);
    freq.write_csv(out_file(&out.out, "frequency.csv")?)?;
    let best_entry = result
        .entries
        .iter()
        .find(|e| e.weights == result.best)
        .expect("best triple is part of the grid");
    let report = serde_json::json!({
        "w_i": result.best.indegree,
        "w_e": result.best.eigenvector,
        "w_c": result.best.clustering,
        "delta_density": best_entry.delta_density,
        "density_before": result.density_before,
        "k": result.k,
        "combinations": result.entries.len(),
        "top_nodes": best_entry.top_nodes,
    });
    let mut f = out_file(&out.out, "best_triple.json")?;
    writeln!(f, "{}", serde_json::to_string_pretty(&report)?)?;
    println!("combinations evaluated: {}", result.entries.len());
    println!(
        "best weights: ({},{},{})",
        result.best.indegree, result.best.eigenvector, result.best.clustering
    );
    println!("delta density: {}", best_entry.delta_density);
    Ok(())
}

fn cmd_perturb(
    source: &SourceArgs,
    analysis: &AnalysisArgs,
    out: &OutArgs,
    k: usize,
    targets: Option<&str>,
    comparative: bool,
    directed_density: bool,
) -> Result<()> {
    create_out(&out.out)?;
    let g = load_graph(source)?;
    let params = analysis.metric_params();
    let targets: Vec<String> = match targets {
        Some(list) => list
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::to_string)
            .collect(),
        None => {
            if k == 0 {
                Vec::new()
            } else {
                rank(&g, &analysis.weights, &params)?
                    .entries
                    .iter()
                    .take(k)
                    .map(|e| e.id.clone())
                    .collect()
            }
        }
    };
    let report = perturbation_report(&g, &targets, analysis.resolution, analysis.seed)?;
    report.write_csv(out_file(&out.out, "perturbation.csv")?)?;
    write_gexf(&g, None, None, out_file(&out.out, "before.gexf")?)?;
    let after = bridgenet::perturb::remove_nodes(&g, &targets)?.graph;
    write_gexf(&after, None, None, out_file(&out.out, "after.gexf")?)?;
    if comparative {
        let rows = comparative_analysis(&g, k, analysis.resolution, analysis.seed, &params)?;
        write_comparative_csv(&rows, out_file(&out.out, "comparative.csv")?)?;
    }
    println!(
        "removed {} node(s): {}",
        report.removed.len(),
        report.removed.join(";")
    );
    if !report.missing.is_empty() {
        println!(
            "warning: {} target(s) not present: {}",
            report.missing.len(),
            report.missing.join(";")
        );
    }
    println!(
        "{}",
        percent_line(
            "network density",
            Some(report.density_before),
            Some(report.density_after)
        )
    );
    if directed_density {
        println!(
            "{}",
            percent_line(
                "directed network density",
                Some(report.density_before / 2.0),
                Some(report.density_after / 2.0)
            )
        );
    }
    println!(
        "{}",
        percent_line(
            "average path length",
            report.avg_path_before,
            report.avg_path_after
        )
    );
    println!(
        "{}",
        percent_line(
            "number of communities",
            report.communities_before.map(|v| v as f64),
            report.communities_after.map(|v| v as f64)
        )
    );
    println!("delta density: {}", report.delta_density);
    Ok(())
}

fn cmd_stats(
    source: &SourceArgs,
    out: &OutArgs,
    bucket: TimeDelta,
    channels: &[String],
) -> Result<()> {
    let Some(path) = &source.messages else {
        return Err(Error::InvalidArgument(
            "stats needs --messages".to_string(),
        ));
    };
    create_out(&out.out)?;
    let columns = parse_columns(&source.columns)?;
    let file = File::open(path)
        .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))?;
    let (records, rejects) = read_messages(
        BufReader::new(file),
        &columns.messages,
        source.time_format.as_deref(),
    )?;
    let filter: Option<HashSet<String>> = if channels.is_empty() {
        None
    } else {
        let mut set = HashSet::new();
        for c in channels {
            set.insert(normalize_id(c)?);
        }
        Some(set)
    };
    let summary = engagement_summary(&records, filter.as_ref())?;
    write_engagement_csv(&summary, out_file(&out.out, "engagement.csv")?)?;
    let series = posting_frequency(&records, bucket)?;
    write_frequency_series_csv(&series, out_file(&out.out, "posting_frequency.csv")?)?;
    let named: Vec<(String, RejectedRow)> = rejects
        .into_iter()
        .map(|r| (path.display().to_string(), r))
        .collect();
    write_rejects_csv(&named, out_file(&out.out, "rejects.csv")?)?;
    println!("messages: {}", records.len());
    println!("channels reported: {}", summary.len());
    println!("buckets: {}", series.len());
    println!("rejected rows: {}", named.len());
    Ok(())
}

fn cmd_export(source: &SourceArgs, out: &OutArgs, format: &str) -> Result<()> {
    create_out(&out.out)?;
    let g = load_graph(source)?;
    match format {
        "gexf" => write_gexf(&g, None, None, out_file(&out.out, "graph.gexf")?)?,
        _ => g.write_edgelist(out_file(&out.out, "graph.edgelist")?)?,
    }
    println!("nodes: {}", g.node_count());
    println!("edges: {}", g.edge_count());
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Ingest { source, out } => cmd_ingest(source, out),
        Command::Analyze {
            source,
            analysis,
            out,
            directed_density,
        } => cmd_analyze(source, analysis, out, *directed_density),
        Command::Optimize {
            source,
            analysis,
            out,
            k,
            grid,
        } => cmd_optimize(source, analysis, out, *k, *grid),
        Command::Perturb {
            source,
            analysis,
            out,
            k,
            targets,
            comparative,
            directed_density,
        } => cmd_perturb(
            source,
            analysis,
            out,
            *k,
            targets.as_deref(),
            *comparative,
            *directed_density,
        ),
        Command::Stats {
            source,
            out,
            bucket,
            channels,
        } => cmd_stats(source, out, *bucket, channels),
        Command::Export { source, out, format } => cmd_export(source, out, format),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
