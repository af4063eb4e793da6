use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use infosel_core::stats_io::{read_stats_csv, read_stats_json, write_stats_csv, write_stats_json};
use infosel_core::{
    cluster, confusion, correlation_matrix, greedy_select, mutual_information, problem_gains, rank_problems,
    AggregateOptions, Aggregator, Clustering, ConfusionMatrix, CorrelationMatrix, Measure, MetricMode, MetricSet,
    PerformanceTable, ProblemGains, RecordReader, SelectOptions, SelectionReport,
};
use infosel_synth::{generate, Archetype, SynthSpec};
use serde::{Deserialize, Serialize};

use crate::config::{Format, RunConfig};
use crate::heatmap;
use crate::CliError;

/// Shape of an ingested corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestSummary {
    pub agents: usize,
    pub problems: usize,
    pub records: u64,
    pub min_samples: u64,
    pub avg_samples: f64,
    pub max_samples: u64,
}

impl IngestSummary {
    fn new(table: &PerformanceTable, records: u64) -> Self {
        let counts: Vec<u64> = table
            .iter()
            .filter(|(_, k, _)| k.measure == Measure::Score)
            .map(|(_, _, s)| s.count)
            .collect();
        IngestSummary {
            agents: table.agent_count(),
            problems: table.problems().len(),
            records,
            min_samples: counts.iter().copied().min().unwrap_or(0),
            avg_samples: counts.iter().sum::<u64>() as f64 / counts.len().max(1) as f64,
            max_samples: counts.iter().copied().max().unwrap_or(0),
        }
    }
}

enum InputKind {
    Records,
    StatsCsv,
    StatsJson,
}

fn open(path: &Path) -> Result<File, CliError> {
    File::open(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn detect(path: &Path) -> Result<InputKind, CliError> {
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
        return Ok(InputKind::StatsJson);
    }
    let mut first = String::new();
    BufReader::new(open(path)?).read_line(&mut first)?;
    let header = first.trim().trim_start_matches('\u{feff}').to_ascii_lowercase().replace(' ', "");
    Ok(if header.starts_with("agent,problem,measure") {
        InputKind::StatsCsv
    } else {
        InputKind::Records
    })
}

fn with_path(path: &Path) -> impl Fn(infosel_core::Error) -> CliError + '_ {
    move |e| {
        let input = e.is_input_error();
        let msg = format!("{}: {e}", path.display());
        if input {
            CliError::Input(msg)
        } else {
            CliError::Domain(msg)
        }
    }
}

/// Loads raw playthrough CSVs (aggregated together) or one statistics file.
pub fn load_table(cfg: &RunConfig) -> Result<(PerformanceTable, Option<IngestSummary>, Vec<String>), CliError> {
    if cfg.inputs.is_empty() {
        return Err(CliError::Input("no input files given (use --input)".into()));
    }
    let mut agg = Aggregator::new();
    let mut stats: Option<PerformanceTable> = None;
    let mut raw = false;
    for path in &cfg.inputs {
        match detect(path)? {
            InputKind::Records => {
                raw = true;
                for record in RecordReader::new(BufReader::new(open(path)?)) {
                    agg.push(&record.map_err(with_path(path))?);
                }
            }
            kind => {
                if stats.is_some() {
                    return Err(CliError::Input("only one statistics file may be given".into()));
                }
                let reader = BufReader::new(open(path)?);
                let table = match kind {
                    InputKind::StatsCsv => read_stats_csv(reader),
                    _ => read_stats_json(reader),
                }
                .map_err(with_path(path))?;
                stats = Some(table.with_sigma_floor(cfg.sigma_floor));
            }
        }
    }
    match (stats, raw) {
        (Some(_), true) => Err(CliError::Input("cannot mix playthrough and statistics inputs".into())),
        (Some(t), false) => Ok((t, None, Vec::new())),
        (None, _) => {
            let options = AggregateOptions {
                sigma_floor: cfg.sigma_floor,
                allow_missing: cfg.allow_missing,
            };
            let out = agg.finish(&options)?;
            let summary = IngestSummary::new(&out.table, out.records);
            Ok((out.table, Some(summary), out.warnings))
        }
    }
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Input(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    let f = File::create(&path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    Ok(BufWriter::new(f))
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf, CliError> {
    let mut w = create(dir, name)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(dir.join(name))
}

fn report(paths: &[PathBuf]) {
    for p in paths {
        println!("wrote {}", p.display());
    }
}

fn print_warnings(warnings: &[String]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}

pub fn cmd_ingest(cfg: &RunConfig) -> Result<IngestSummary, CliError> {
    let (table, summary, warnings) = load_table(cfg)?;
    print_warnings(&warnings);
    let summary = summary.unwrap_or_else(|| IngestSummary::new(&table, 0));
    let mut written = Vec::new();
    if cfg.wants(Format::Csv) {
        let mut w = create(&cfg.out_dir, "stats.csv")?;
        write_stats_csv(&mut w, &table)?;
        w.flush()?;
        written.push(cfg.out_dir.join("stats.csv"));
    }
    if cfg.wants(Format::Json) {
        let mut w = create(&cfg.out_dir, "stats.json")?;
        write_stats_json(&mut w, &table)?;
        w.flush()?;
        written.push(cfg.out_dir.join("stats.json"));
    }
    println!(
        "agents: {}  problems: {}  records: {}  samples per cell min/avg/max: {}/{:.1}/{}",
        summary.agents, summary.problems, summary.records, summary.min_samples, summary.avg_samples, summary.max_samples
    );
    report(&written);
    Ok(summary)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedProblem {
    pub problem: String,
    pub bits: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rankings {
    pub win: Vec<RankedProblem>,
    pub score: Vec<RankedProblem>,
    pub combined: Vec<RankedProblem>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfoGainDocument {
    pub noise: infosel_core::NoiseModel,
    pub agents: usize,
    pub ceiling_bits: f64,
    pub problems: Vec<ProblemGains>,
    pub rankings: Rankings,
}

pub fn cmd_info_gain(cfg: &RunConfig) -> Result<InfoGainDocument, CliError> {
    let (table, _, warnings) = load_table(cfg)?;
    print_warnings(&warnings);
    let gains = problem_gains(&table, cfg.noise)?;
    let ranked = |mode| {
        rank_problems(&gains, mode)
            .into_iter()
            .map(|(problem, bits)| RankedProblem { problem, bits })
            .collect::<Vec<_>>()
    };
    let doc = InfoGainDocument {
        noise: cfg.noise,
        agents: table.agent_count(),
        ceiling_bits: (table.agent_count() as f64).log2(),
        problems: gains.clone(),
        rankings: Rankings {
            win: ranked(MetricMode::WinRate),
            score: ranked(MetricMode::Score),
            combined: ranked(MetricMode::Combined),
        },
    };
    let mut written = Vec::new();
    if cfg.wants(Format::Csv) {
        let mut w = csv::Writer::from_writer(create(&cfg.out_dir, "info_gain.csv")?);
        let io = |e: csv::Error| CliError::Input(e.to_string());
        w.write_record(["rank", "win_problem", "win_bits", "score_problem", "score_bits", "combined_problem", "combined_bits"])
            .map_err(io)?;
        let r = &doc.rankings;
        for i in 0..r.win.len() {
            w.write_record([
                (i + 1).to_string(),
                r.win[i].problem.clone(),
                r.win[i].bits.to_string(),
                r.score[i].problem.clone(),
                r.score[i].bits.to_string(),
                r.combined[i].problem.clone(),
                r.combined[i].bits.to_string(),
            ])
            .map_err(io)?;
        }
        w.flush()?;
        written.push(cfg.out_dir.join("info_gain.csv"));
    }
    if cfg.wants(Format::Json) {
        written.push(write_json(&cfg.out_dir, "info_gain.json", &doc)?);
    }
    print!("{}", info_gain_text(&doc, 10));
    report(&written);
    Ok(doc)
}

fn info_gain_text(doc: &InfoGainDocument, rows: usize) -> String {
    let r = &doc.rankings;
    let w = doc.problems.iter().map(|p| p.problem.len()).max().unwrap_or(4).max(10);
    let mut s = format!(
        "{:<w$}  {:>10}  {:<w$}  {:>10}  {:<w$}  {:>10}\n",
        "win-rate", "bits", "score", "bits", "combined", "bits"
    );
    for i in 0..rows.min(r.win.len()) {
        s.push_str(&format!(
            "{:<w$}  {:>10.8}  {:<w$}  {:>10.8}  {:<w$}  {:>10.8}\n",
            r.win[i].problem, r.win[i].bits, r.score[i].problem, r.score[i].bits, r.combined[i].problem, r.combined[i].bits
        ));
    }
    s
}

pub fn cmd_select(cfg: &RunConfig) -> Result<SelectionReport, CliError> {
    let (table, _, warnings) = load_table(cfg)?;
    print_warnings(&warnings);
    let options = SelectOptions {
        k: cfg.k,
        mode: cfg.mode,
        noise: cfg.noise,
        epsilon_gain: cfg.epsilon_gain,
        per_key: cfg.per_key,
        parallel: true,
    };
    let report_ = greedy_select(&table, &options)?;
    print_warnings(&report_.warnings);
    for ng in &report_.negative_gains {
        eprintln!(
            "note: step {}: adding {} would lower the joint gain by {:.3e} bits; skipped",
            ng.step, ng.problem, -ng.marginal_bits
        );
    }
    let mut written = Vec::new();
    if cfg.wants(Format::Csv) {
        let mut w = create(&cfg.out_dir, "selection.csv")?;
        report_.write_csv(&mut w)?;
        w.flush()?;
        written.push(cfg.out_dir.join("selection.csv"));
    }
    if cfg.wants(Format::Json) {
        written.push(write_json(&cfg.out_dir, "selection.json", &report_)?);
    }
    print!("{}", report_.to_text());
    println!("ceiling log2({}) = {:.8} bits", table.agent_count(), (table.agent_count() as f64).log2());
    report(&written);
    Ok(report_)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationDocument {
    pub matrix: CorrelationMatrix,
    pub clustering: Clustering,
}

pub fn cmd_correlate(cfg: &RunConfig) -> Result<Vec<CorrelationDocument>, CliError> {
    let (table, _, warnings) = load_table(cfg)?;
    print_warnings(&warnings);
    let mut docs = Vec::new();
    let mut written = Vec::new();
    for &measure in cfg.mode.measures() {
        let matrix = correlation_matrix(&table, measure)?;
        let clustering = cluster(&matrix, cfg.threshold)?;
        let tag = measure.as_str();
        println!("{tag}: {} cluster(s) at threshold {}", clustering.clusters.len(), cfg.threshold);
        if !clustering.excluded.is_empty() {
            println!("{tag}: no correlation measure: {}", clustering.excluded.join(", "));
        }
        if cfg.wants(Format::Csv) {
            let name = format!("correlation_{tag}.csv");
            let mut w = create(&cfg.out_dir, &name)?;
            matrix.write_csv(&mut w)?;
            w.flush()?;
            written.push(cfg.out_dir.join(name));
            let name = format!("clusters_{tag}.csv");
            let mut w = create(&cfg.out_dir, &name)?;
            clustering.write_csv(&mut w)?;
            w.flush()?;
            written.push(cfg.out_dir.join(name));
        }
        let doc = CorrelationDocument { matrix, clustering };
        if cfg.wants(Format::Json) {
            written.push(write_json(&cfg.out_dir, &format!("correlation_{tag}.json"), &doc)?);
        }
        if cfg.wants(Format::Svg) {
            let title = format!("Correlation between problems ({tag})");
            let svg = heatmap::render(&doc.matrix, &doc.clustering, &title)?;
            let name = format!("heatmap_{tag}.svg");
            let mut w = create(&cfg.out_dir, &name)?;
            w.write_all(svg.as_bytes())?;
            w.flush()?;
            written.push(cfg.out_dir.join(name));
        }
        docs.push(doc);
    }
    report(&written);
    Ok(docs)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfusionDocument {
    pub keys: Vec<infosel_core::MetricKey>,
    pub noise: infosel_core::NoiseModel,
    pub info_gain_bits: f64,
    pub confusion: ConfusionMatrix,
}

pub fn cmd_confusion(cfg: &RunConfig, problems: &[String]) -> Result<ConfusionDocument, CliError> {
    if problems.is_empty() {
        return Err(CliError::Input("name at least one problem with --problems".into()));
    }
    let (table, _, warnings) = load_table(cfg)?;
    print_warnings(&warnings);
    let keys: Vec<_> = problems.iter().flat_map(|p| cfg.mode.keys(p)).collect();
    let set = MetricSet::new(keys.clone())?;
    let c = confusion(&table, &set, cfg.noise)?;
    let bits = mutual_information(&c).value();
    let doc = ConfusionDocument {
        keys,
        noise: cfg.noise,
        info_gain_bits: bits,
        confusion: c,
    };
    let mut written = Vec::new();
    if cfg.wants(Format::Csv) {
        let mut w = csv::Writer::from_writer(create(&cfg.out_dir, "confusion.csv")?);
        let io = |e: csv::Error| CliError::Input(e.to_string());
        let agents = doc.confusion.agents();
        let mut header = vec!["agent".to_string()];
        header.extend(agents.iter().cloned());
        w.write_record(&header).map_err(io)?;
        for (a, row) in agents.iter().zip(doc.confusion.rows()) {
            let mut rec = vec![a.clone()];
            rec.extend(row.iter().map(f64::to_string));
            w.write_record(&rec).map_err(io)?;
        }
        w.flush()?;
        written.push(cfg.out_dir.join("confusion.csv"));
    }
    if cfg.wants(Format::Json) {
        written.push(write_json(&cfg.out_dir, "confusion.json", &doc)?);
    }
    println!("information gain for {}: {:.8} bits", problems.join(", "), bits);
    report(&written);
    Ok(doc)
}

pub const DEFAULT_ARCHETYPES: &str = "linear:2:1,two-cluster:3:1,delayed:1:1,identical:0:1:0.5";

pub struct SynthArgs {
    pub agents: usize,
    pub problems: usize,
    pub samples: usize,
    pub seed: u64,
    pub archetypes: String,
}

pub fn cmd_synth(cfg: &RunConfig, args: &SynthArgs) -> Result<PathBuf, CliError> {
    let archetypes = args
        .archetypes
        .split(',')
        .map(Archetype::parse)
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::Input(e.to_string()))?;
    let spec = SynthSpec::cycled(args.agents, args.problems, &archetypes, args.samples, args.seed);
    let records = generate(&spec).map_err(|e| CliError::Input(e.to_string()))?;
    let mut w = create(&cfg.out_dir, "playthroughs.csv")?;
    infosel_core::record::write_records(&mut w, &records)?;
    w.flush()?;
    let path = cfg.out_dir.join("playthroughs.csv");
    println!("{} records ({} agents x {} problems x {} samples)", records.len(), args.agents, args.problems, args.samples);
    report(std::slice::from_ref(&path));
    Ok(path)
}
