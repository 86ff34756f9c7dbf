//! Command-line interface.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use homgraph_core::generator::{generate_graph, SyntheticSpec};
use homgraph_core::pipeline::{analyze_partitioned, labeled_samples, AnalysisConfig, GraphFailure};
use homgraph_core::{
    cross_validate, covertness, Algorithm, CallGraph, CommunityPartition, CouplingDenominator,
    Label, LabeledSample, SensitiveApiCatalog,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::compare::compare_algorithms;
use crate::corpus::{load_corpus, load_graph, resolve_inputs, worker_pool, MANIFEST};
use crate::features_csv::{read_features, write_features, FeatureRecord};
use crate::report::{to_json, CovertnessFileReport, EvalReport, EvalRow, PartitionReport};
use crate::wire::{serialize_graph, Sensitivity};

#[derive(Debug, Parser)]
#[command(name = "homgraph", version, about = "Call-graph homophily analysis for covert malware")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Sensitive API catalog, one signature per line. Defaults to the
    /// built-in desk catalog, which also keeps explicit flags in documents.
    #[arg(long, global = true)]
    pub catalog: Option<PathBuf>,
    /// Coupling above which a sensitive community is filtered as benign.
    #[arg(long, global = true, default_value_t = 3.0)]
    pub threshold: f64,
    #[arg(long, global = true, value_enum, default_value_t = AlgoArg::Multilevel)]
    pub algo: AlgoArg,
    /// Neighbours consulted by the k-NN classifier.
    #[arg(long, global = true, default_value_t = 1)]
    pub k: usize,
    #[arg(long, global = true, default_value_t = 10)]
    pub folds: usize,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = DenominatorArg::Total)]
    pub coupling_denominator: DenominatorArg,
    /// Caller depth included in the malicious part.
    #[arg(long, global = true, default_value_t = 1)]
    pub hops: usize,
    /// Output file, or output directory for `gen` and `analyze`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum AlgoArg {
    Multilevel,
    #[value(name = "label_propagation")]
    LabelPropagation,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum DenominatorArg {
    Total,
    Internal,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic corpus with planted ground truth.
    Gen(GenArgs),
    /// Compare community detectors over a graph or corpus.
    Communities {
        input: PathBuf,
        /// Include wall-clock runtimes in the report.
        #[arg(long)]
        timing: bool,
    },
    /// Community detection and suspicious-subgraph selection for one graph.
    Partition { graph: PathBuf },
    /// Malicious-part proportion and coupling for one graph.
    Covertness { graph: PathBuf },
    /// Feature records and partition reports for a graph or corpus.
    Analyze { input: PathBuf },
    /// Cross-validate k-NN on a features file or a corpus directory.
    Eval {
        input: PathBuf,
        /// Also evaluate these thresholds, e.g. `1,2,3,4,5`. Needs a corpus.
        #[arg(long, value_delimiter = ',')]
        sweep: Option<Vec<f64>>,
    },
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, default_value_t = 0)]
    pub benign: usize,
    #[arg(long, default_value_t = 0)]
    pub covert: usize,
    #[arg(long)]
    pub nodes: Option<usize>,
    #[arg(long)]
    pub communities: Option<usize>,
    #[arg(long)]
    pub intra_prob: Option<f64>,
    #[arg(long)]
    pub inter_prob: Option<f64>,
    #[arg(long)]
    pub planted_size: Option<usize>,
    #[arg(long)]
    pub planted_coupling: Option<f64>,
    #[arg(long)]
    pub benign_coupling: Option<f64>,
    #[arg(long)]
    pub coupling_jitter: Option<f64>,
    #[arg(long)]
    pub sensitive_apis: Option<usize>,
}

impl GenArgs {
    fn spec(&self, seed: u64) -> SyntheticSpec {
        let d = SyntheticSpec::default();
        SyntheticSpec {
            node_count: self.nodes.unwrap_or(d.node_count),
            community_count: self.communities.unwrap_or(d.community_count),
            intra_edge_prob: self.intra_prob.unwrap_or(d.intra_edge_prob),
            inter_edge_prob: self.inter_prob.unwrap_or(d.inter_edge_prob),
            planted_sensitive_community_size: self
                .planted_size
                .unwrap_or(d.planted_sensitive_community_size),
            planted_coupling_target: self.planted_coupling.unwrap_or(d.planted_coupling_target),
            benign_coupling_target: self.benign_coupling.unwrap_or(d.benign_coupling_target),
            coupling_jitter: self.coupling_jitter.unwrap_or(d.coupling_jitter),
            sensitive_api_count: self.sensitive_apis.unwrap_or(d.sensitive_api_count),
            seed,
            ..d
        }
    }
}

/// Failure classes, each with its own exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Input(_) => 2,
            CliError::Internal(_) => 3,
        }
    }
}

type CliResult<T = ()> = Result<T, CliError>;

/// Parses `std::env::args`, runs the command and maps the outcome to an exit code.
pub fn main_exit() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

struct Context {
    config: AnalysisConfig,
    catalog: SensitiveApiCatalog,
    custom_catalog: bool,
    pool: rayon::ThreadPool,
}

impl Context {
    fn new(global: &GlobalArgs) -> CliResult<Self> {
        if !(global.threshold > 0.0) {
            return Err(CliError::Usage(format!(
                "--threshold must be positive, got {}",
                global.threshold
            )));
        }
        if global.k == 0 {
            return Err(CliError::Usage("--k must be at least 1".into()));
        }
        if global.folds < 2 {
            return Err(CliError::Usage("--folds must be at least 2".into()));
        }
        let (catalog, custom_catalog) = match &global.catalog {
            None => (SensitiveApiCatalog::desk(), false),
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
                let cat = SensitiveApiCatalog::parse(&text)
                    .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
                (cat, true)
            }
        };
        let config = AnalysisConfig {
            threshold: global.threshold,
            algorithm: match global.algo {
                AlgoArg::Multilevel => Algorithm::Multilevel,
                AlgoArg::LabelPropagation => Algorithm::LabelPropagation,
            },
            k: global.k,
            folds: global.folds,
            seed: global.seed,
            denominator: match global.coupling_denominator {
                DenominatorArg::Total => CouplingDenominator::Total,
                DenominatorArg::Internal => CouplingDenominator::Internal,
            },
            hops: global.hops,
        };
        Ok(Context {
            config,
            catalog,
            custom_catalog,
            pool: worker_pool(),
        })
    }

    fn sensitivity(&self) -> Sensitivity<'_> {
        if self.custom_catalog {
            Sensitivity::Catalog(&self.catalog)
        } else {
            Sensitivity::FlagsThenCatalog(&self.catalog)
        }
    }

    fn load_one(&self, path: &Path) -> CliResult<CallGraph> {
        load_graph(path, self.sensitivity())
            .map_err(|f| CliError::Input(format!("{}: {}", f.path.display(), f.message)))
    }

    fn load_many(&self, input: &Path) -> CliResult<Vec<CallGraph>> {
        let paths = resolve_inputs(input)
            .map_err(|e| CliError::Input(format!("{}: {e}", input.display())))?;
        let (graphs, _) = load_corpus(&self.pool, &paths, self.sensitivity());
        if graphs.is_empty() {
            return Err(CliError::Input(format!(
                "{}: no readable graph documents",
                input.display()
            )));
        }
        Ok(graphs)
    }
}

pub fn run(cli: &Cli) -> CliResult {
    let ctx = Context::new(&cli.global)?;
    let out = cli.global.out.as_deref();
    match &cli.command {
        Command::Gen(args) => cmd_gen(&ctx, args, out),
        Command::Communities { input, timing } => cmd_communities(&ctx, input, *timing, out),
        Command::Partition { graph } => cmd_partition(&ctx, graph, out),
        Command::Covertness { graph } => cmd_covertness(&ctx, graph, out),
        Command::Analyze { input } => cmd_analyze(&ctx, input, out),
        Command::Eval { input, sweep } => cmd_eval(&ctx, input, sweep.as_deref(), out),
    }
}

fn write_output(out: Option<&Path>, bytes: &[u8]) -> CliResult {
    match out {
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                fs::create_dir_all(parent)
                    .map_err(|e| CliError::Internal(format!("{}: {e}", parent.display())))?;
            }
            fs::write(path, bytes)
                .map_err(|e| CliError::Internal(format!("{}: {e}", path.display())))
        }
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| CliError::Internal(format!("stdout: {e}"))),
    }
}

fn out_dir(out: Option<&Path>, command: &str) -> CliResult<PathBuf> {
    let dir = out.ok_or_else(|| CliError::Usage(format!("{command} needs --out <DIR>")))?;
    fs::create_dir_all(dir).map_err(|e| CliError::Internal(format!("{}: {e}", dir.display())))?;
    Ok(dir.to_path_buf())
}

/// App ids as file names: anything outside `[A-Za-z0-9._-]` becomes `_`.
pub fn file_stem(app_id: &str) -> String {
    let stem: String = app_id
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-') {
                c
            } else {
                '_'
            }
        })
        .collect();
    if stem.is_empty() || stem.starts_with('.') {
        format!("_{stem}")
    } else {
        stem
    }
}

#[derive(Serialize)]
struct SpecEcho {
    node_count: usize,
    community_count: usize,
    intra_edge_prob: f64,
    inter_edge_prob: f64,
    planted_sensitive_community_size: usize,
    planted_coupling_target: f64,
    benign_coupling_target: f64,
    coupling_jitter: f64,
    covert_band: (f64, f64),
    benign_floor: f64,
    sensitive_api_count: usize,
    seed: u64,
}

#[derive(Serialize)]
struct ManifestEntry {
    app_id: String,
    file: String,
    label: &'static str,
    planted_nodes: Vec<u64>,
    sensitive_apis: Vec<String>,
    coupling: f64,
}

#[derive(Serialize)]
struct Manifest {
    spec: SpecEcho,
    graphs: Vec<ManifestEntry>,
}

fn cmd_gen(ctx: &Context, args: &GenArgs, out: Option<&Path>) -> CliResult {
    let spec = args.spec(ctx.config.seed);
    spec.validate(&ctx.catalog)
        .map_err(|e| CliError::Input(e.to_string()))?;
    let dir = out_dir(out, "gen")?;
    let jobs: Vec<(Label, usize)> = (0..args.benign)
        .map(|i| (Label::Benign, i))
        .chain((0..args.covert).map(|i| (Label::Malware, i)))
        .collect();
    let generated = ctx.pool.install(|| {
        jobs.par_iter()
            .map(|&(label, i)| generate_graph(&spec, &ctx.catalog, label, i))
            .collect::<Result<Vec<_>, _>>()
    });
    let generated = generated.map_err(|e| CliError::Input(e.to_string()))?;
    let mut entries = Vec::with_capacity(generated.len());
    for (graph, truth) in &generated {
        let file = format!("{}.json", file_stem(graph.app_id()));
        write_output(Some(&dir.join(&file)), serialize_graph(graph).as_bytes())?;
        entries.push(ManifestEntry {
            app_id: truth.app_id.clone(),
            file,
            label: truth.label.as_str(),
            planted_nodes: truth.planted_nodes.iter().map(|id| id.0).collect(),
            sensitive_apis: truth
                .sensitive_apis
                .iter()
                .map(|&i| ctx.catalog.entries()[i].clone())
                .collect(),
            coupling: truth.coupling,
        });
    }
    let manifest = Manifest {
        spec: SpecEcho {
            node_count: spec.node_count,
            community_count: spec.community_count,
            intra_edge_prob: spec.intra_edge_prob,
            inter_edge_prob: spec.inter_edge_prob,
            planted_sensitive_community_size: spec.planted_sensitive_community_size,
            planted_coupling_target: spec.planted_coupling_target,
            benign_coupling_target: spec.benign_coupling_target,
            coupling_jitter: spec.coupling_jitter,
            covert_band: spec.covert_band,
            benign_floor: spec.benign_floor,
            sensitive_api_count: spec.sensitive_api_count,
            seed: spec.seed,
        },
        graphs: entries,
    };
    write_output(Some(&dir.join(MANIFEST)), to_json(&manifest).as_bytes())
}

#[derive(Serialize)]
struct AlgorithmRow {
    algorithm: &'static str,
    mean_q: f64,
    mean_community_count: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    mean_runtime_ms: Option<f64>,
}

#[derive(Serialize)]
struct GraphRow {
    app_id: String,
    multilevel_q: f64,
    label_propagation_q: f64,
}

#[derive(Serialize)]
struct CommunitiesReport {
    seed: u64,
    graphs: usize,
    algorithms: Vec<AlgorithmRow>,
    per_graph: Vec<GraphRow>,
}

fn cmd_communities(ctx: &Context, input: &Path, timing: bool, out: Option<&Path>) -> CliResult {
    let graphs = ctx.load_many(input)?;
    let summaries = compare_algorithms(&graphs, ctx.config.seed);
    for s in &summaries {
        eprintln!(
            "{}: mean runtime {:.3} ms",
            s.algorithm,
            s.mean_runtime.as_secs_f64() * 1e3
        );
    }
    let report = CommunitiesReport {
        seed: ctx.config.seed,
        graphs: graphs.len(),
        algorithms: summaries
            .iter()
            .map(|s| AlgorithmRow {
                algorithm: s.algorithm.as_str(),
                mean_q: s.mean_q,
                mean_community_count: s.mean_communities,
                mean_runtime_ms: timing.then_some(s.mean_runtime.as_secs_f64() * 1e3),
            })
            .collect(),
        per_graph: graphs
            .iter()
            .enumerate()
            .map(|(i, g)| GraphRow {
                app_id: g.app_id().to_string(),
                multilevel_q: summaries[0].per_graph_q[i],
                label_propagation_q: summaries[1].per_graph_q[i],
            })
            .collect(),
    };
    write_output(out, to_json(&report).as_bytes())
}

fn partition_report(ctx: &Context, graph: &CallGraph) -> CliResult<(PartitionReport, FeatureRecord)> {
    let partition = ctx.config.algorithm.detect(graph, ctx.config.seed);
    let a = analyze_partitioned(graph, partition, &ctx.catalog, &ctx.config)
        .map_err(|e| CliError::Internal(format!("{}: {e}", graph.app_id())))?;
    let report = PartitionReport::new(graph, &a.partition, &a.outcome, &ctx.config);
    let record = FeatureRecord {
        app_id: graph.app_id().to_string(),
        label: graph.label(),
        vector: a.features.to_dense(),
    };
    Ok((report, record))
}

fn cmd_partition(ctx: &Context, path: &Path, out: Option<&Path>) -> CliResult {
    let graph = ctx.load_one(path)?;
    let (report, _) = partition_report(ctx, &graph)?;
    write_output(out, to_json(&report).as_bytes())
}

fn cmd_covertness(ctx: &Context, path: &Path, out: Option<&Path>) -> CliResult {
    let graph = ctx.load_one(path)?;
    let r = covertness(&graph, ctx.config.hops, ctx.config.denominator)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let report = CovertnessFileReport::new(&graph, &r, &ctx.config);
    write_output(out, to_json(&report).as_bytes())
}

pub const FEATURES_FILE: &str = "features.csv";
pub const REPORTS_DIR: &str = "partition";

fn cmd_analyze(ctx: &Context, input: &Path, out: Option<&Path>) -> CliResult {
    let dir = out_dir(out, "analyze")?;
    let graphs = ctx.load_many(input)?;
    let results: Vec<CliResult<(PartitionReport, FeatureRecord)>> = ctx
        .pool
        .install(|| graphs.par_iter().map(|g| partition_report(ctx, g)).collect());
    let mut records = Vec::with_capacity(results.len());
    for r in results {
        match r {
            Ok((report, record)) => {
                let file = dir
                    .join(REPORTS_DIR)
                    .join(format!("{}.json", file_stem(&report.app_id)));
                write_output(Some(&file), to_json(&report).as_bytes())?;
                records.push(record);
            }
            Err(e) => log::warn!("skipping graph: {e}"),
        }
    }
    let csv = write_features(&records, ctx.catalog.len())
        .map_err(|e| CliError::Internal(e.to_string()))?;
    write_output(Some(&dir.join(FEATURES_FILE)), &csv)
}

fn evaluate(
    ctx: &Context,
    threshold: f64,
    samples: &[LabeledSample],
    excluded: &[GraphFailure],
) -> CliResult<EvalRow> {
    let report = cross_validate(samples, ctx.config.folds, ctx.config.k, ctx.config.seed)
        .map_err(|e| CliError::Input(e.to_string()))?;
    Ok(EvalRow::new(threshold, &report, excluded))
}

/// Samples from a features file; unlabelled records are excluded.
fn samples_from_features(path: &Path) -> CliResult<(Vec<LabeledSample>, Vec<GraphFailure>)> {
    let bytes = fs::read(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let mut records =
        read_features(&bytes).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    records.sort_by(|a, b| a.app_id.cmp(&b.app_id));
    let mut samples = Vec::new();
    let mut excluded = Vec::new();
    for r in &records {
        match r.to_sample() {
            Some(s) => samples.push(s),
            None => excluded.push(GraphFailure {
                app_id: r.app_id.clone(),
                error: homgraph_core::Error::MissingLabel {
                    app_id: r.app_id.clone(),
                },
            }),
        }
    }
    Ok((samples, excluded))
}

fn samples_at(
    ctx: &Context,
    pairs: &[(&CallGraph, &CommunityPartition)],
    threshold: f64,
) -> (Vec<LabeledSample>, Vec<GraphFailure>) {
    let config = AnalysisConfig {
        threshold,
        ..ctx.config
    };
    let parts: Vec<(Vec<LabeledSample>, Vec<GraphFailure>)> = ctx.pool.install(|| {
        pairs
            .par_iter()
            .map(|p| labeled_samples(std::slice::from_ref(p), &ctx.catalog, &config))
            .collect()
    });
    let mut samples = Vec::with_capacity(pairs.len());
    let mut excluded = Vec::new();
    for (s, f) in parts {
        samples.extend(s);
        for failure in f {
            log::warn!("excluding {}: {}", failure.app_id, failure.error);
            excluded.push(failure);
        }
    }
    (samples, excluded)
}

fn cmd_eval(ctx: &Context, input: &Path, sweep: Option<&[f64]>, out: Option<&Path>) -> CliResult {
    if let Some(t) = sweep.into_iter().flatten().find(|t| !(**t > 0.0)) {
        return Err(CliError::Usage(format!(
            "--sweep thresholds must be positive, got {t}"
        )));
    }
    let features_file = input.is_file() && input.extension().is_some_and(|e| e == "csv");
    let (result, rows) = if features_file {
        if sweep.is_some() {
            return Err(CliError::Usage(
                "--sweep needs a corpus directory; features are fixed to one threshold".into(),
            ));
        }
        let (samples, excluded) = samples_from_features(input)?;
        (evaluate(ctx, ctx.config.threshold, &samples, &excluded)?, None)
    } else {
        let graphs = ctx.load_many(input)?;
        let partitions: Vec<CommunityPartition> = ctx.pool.install(|| {
            graphs
                .par_iter()
                .map(|g| ctx.config.algorithm.detect(g, ctx.config.seed))
                .collect()
        });
        let pairs: Vec<(&CallGraph, &CommunityPartition)> = graphs.iter().zip(&partitions).collect();
        let (samples, excluded) = samples_at(ctx, &pairs, ctx.config.threshold);
        let result = evaluate(ctx, ctx.config.threshold, &samples, &excluded)?;
        let rows = match sweep {
            None => None,
            Some(thresholds) => Some(
                thresholds
                    .iter()
                    .map(|&t| {
                        let (samples, excluded) = samples_at(ctx, &pairs, t);
                        evaluate(ctx, t, &samples, &excluded)
                    })
                    .collect::<CliResult<Vec<_>>>()?,
            ),
        };
        (result, rows)
    };
    let report = EvalReport {
        k: ctx.config.k,
        folds: ctx.config.folds,
        seed: ctx.config.seed,
        algorithm: ctx.config.algorithm.as_str(),
        coupling_denominator: ctx.config.denominator.as_str(),
        result,
        sweep: rows,
    };
    write_output(out, to_json(&report).as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_stems_are_safe() {
        assert_eq!(file_stem("covert-00001"), "covert-00001");
        assert_eq!(file_stem("a/b c"), "a_b_c");
        assert_eq!(file_stem(".."), "_..");
        assert_eq!(file_stem(""), "_");
    }

    #[test]
    fn flags_parse_with_defaults() {
        let cli = Cli::try_parse_from(["homgraph", "eval", "dir", "--sweep", "1,2,3"]).unwrap();
        assert_eq!(cli.global.threshold, 3.0);
        assert_eq!(cli.global.k, 1);
        assert_eq!(cli.global.folds, 10);
        match cli.command {
            Command::Eval { sweep, .. } => assert_eq!(sweep.unwrap(), vec![1.0, 2.0, 3.0]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn invalid_flags_are_usage_errors() {
        let cli = Cli::try_parse_from(["homgraph", "--threshold", "0", "partition", "g.json"]).unwrap();
        assert_eq!(run(&cli).unwrap_err().exit_code(), 1);
        let cli = Cli::try_parse_from(["homgraph", "--folds", "1", "partition", "g.json"]).unwrap();
        assert_eq!(run(&cli).unwrap_err().exit_code(), 1);
    }
}
