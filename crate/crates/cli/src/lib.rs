//! Command-line front end for the `armine` miners.
//!
//! Subcommands: `gen-data`, `mine`, `bench`, `rank`. Exit codes are 0 on success,
//! 1 on runtime errors and 2 on usage errors.

pub mod rank;
pub mod report;
pub mod runner;
pub mod settings;

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use armine::data::{gen_synthetic1, gen_synthetic2, ingest_categorical_path, CategoricalSchema, Synthetic1Spec, Synthetic2Spec};
use armine::kernels::{KernelKind, KernelSpec};
use armine::rule::write_rules_csv;
use armine::{FeatureMatrix, MineError, TransactionMatrix};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use rank::{rank_rules, read_rules_csv, write_ranked_csv, RankKey};
use report::{measure, Comparison, Environment, MinerReport, Record};
use runner::run_algorithm;
use settings::{apply_config, Algorithm, Params};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Mine(#[from] MineError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "armine", version, about = "Association rule mining workbench")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a synthetic dataset or ingest a categorical CSV
    GenData(GenDataArgs),
    /// Run one miner and write rules, itemsets and a report
    Mine(MineArgs),
    /// Sweep thresholds over several miners and write comparison tables
    Bench(BenchArgs),
    /// Rank a rules CSV by support, confidence or lift
    Rank(RankArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
pub enum Variant {
    Synthetic1,
    Synthetic2,
    Categorical,
}

#[derive(Args, Debug)]
pub struct GenDataArgs {
    #[arg(long, value_enum)]
    pub variant: Variant,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Overrides the generator's transaction count
    #[arg(long)]
    pub n_transactions: Option<usize>,
    /// Raw CSV for the categorical variant
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// JSON schema for the categorical variant
    #[arg(long)]
    pub schema: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: PathBuf,
}

/// Flags shared by `mine` and `bench`.
#[derive(Args, Debug, Clone)]
pub struct ParamArgs {
    #[arg(long)]
    pub transactions: Option<PathBuf>,
    #[arg(long)]
    pub features: Option<PathBuf>,
    #[arg(long, default_value_t = 0.5)]
    pub min_conf: f64,
    #[arg(long)]
    pub m_max: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, default_value_t = 1000)]
    pub t_max: usize,
    #[arg(long)]
    pub episodes: Option<usize>,
    #[arg(long, value_parser = parse_kernel)]
    pub kernel: Option<KernelKind>,
    /// Beta prior CSV (item, alpha, beta) for barm
    #[arg(long)]
    pub priors: Option<PathBuf>,
    /// JSON file whose values override the flags
    #[arg(long)]
    pub config: Option<PathBuf>,
}

fn parse_kernel(s: &str) -> Result<KernelKind, String> {
    KernelKind::parse(s).ok_or_else(|| format!("unknown kernel {s:?}"))
}

impl ParamArgs {
    fn params(&self, min_support: f64) -> Params {
        Params {
            min_support,
            min_conf: self.min_conf,
            m_max: self.m_max,
            seed: self.seed,
            samples: self.samples,
            t_max: self.t_max,
            episodes: self.episodes,
            kernel: self.kernel.map(KernelSpec::of).unwrap_or_default(),
            priors: self.priors.clone(),
            ..Params::default()
        }
    }
}

#[derive(Args, Debug)]
pub struct MineArgs {
    #[arg(long, value_enum)]
    pub algo: Algorithm,
    #[arg(long, default_value_t = 0.1)]
    pub min_support: f64,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[command(flatten)]
    pub params: ParamArgs,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    #[arg(long, value_enum, value_delimiter = ',', required = true)]
    pub algos: Vec<Algorithm>,
    #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.2, 0.3, 0.4, 0.5])]
    pub thresholds: Vec<f64>,
    /// Generated dataset to use instead of --transactions
    #[arg(long, value_enum)]
    pub dataset: Option<Variant>,
    /// Run cells on separate threads; timings and memory then interfere
    #[arg(long)]
    pub parallel: bool,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[command(flatten)]
    pub params: ParamArgs,
}

#[derive(Args, Debug)]
pub struct RankArgs {
    #[arg(long)]
    pub rules: PathBuf,
    #[arg(long)]
    pub transactions: PathBuf,
    #[arg(long, value_enum, default_value_t = RankKey::Support)]
    pub key: RankKey,
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    /// Output CSV; stdout when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Writes via a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, write: impl FnOnce(&mut File) -> Result<(), CliError>) -> Result<(), CliError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let name = path.file_name().ok_or_else(|| CliError::Usage(format!("bad output path {}", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp", name.to_string_lossy()));
    let result = (|| {
        let mut f = File::create(&tmp)?;
        write(&mut f)?;
        f.sync_all()?;
        std::fs::rename(&tmp, path)?;
        Ok(())
    })();
    if result.is_err() {
        let _ = std::fs::remove_file(&tmp);
    }
    result
}

fn load_data(p: &ParamArgs) -> Result<(TransactionMatrix, Option<FeatureMatrix>), CliError> {
    let path = p.transactions.as_ref().ok_or_else(|| CliError::Usage("--transactions is required".into()))?;
    let t = TransactionMatrix::read_csv_path(path)?;
    let x = p.features.as_ref().map(|f| FeatureMatrix::read_csv_path(f)).transpose()?;
    if let Some(x) = &x {
        if x.n_items() != t.n_items() {
            return Err(MineError::InvalidData(format!("{} feature rows for {} items", x.n_items(), t.n_items())).into());
        }
    }
    Ok((t, x))
}

fn gen_data(args: &GenDataArgs) -> Result<(), CliError> {
    let (t, x) = match args.variant {
        Variant::Synthetic1 => {
            let mut spec = Synthetic1Spec::default();
            if let Some(n) = args.n_transactions {
                spec.n_transactions = n;
            }
            let (t, x) = gen_synthetic1(&spec, args.seed)?;
            (t, Some(x))
        }
        Variant::Synthetic2 => {
            let mut spec = Synthetic2Spec::default();
            if let Some(n) = args.n_transactions {
                spec.n_transactions = n;
            }
            let (t, x) = gen_synthetic2(&spec, args.seed)?;
            (t, Some(x))
        }
        Variant::Categorical => {
            let (Some(input), Some(schema)) = (&args.input, &args.schema) else {
                return Err(CliError::Usage("categorical ingestion needs --input and --schema".into()));
            };
            let schema = CategoricalSchema::from_json(&std::fs::read_to_string(schema)?)?;
            let out = ingest_categorical_path(input, &schema)?;
            for w in &out.warnings {
                eprintln!("warning: {w}");
            }
            (out.transactions, out.features)
        }
    };
    write_atomic(&args.out_dir.join("transactions.csv"), |f| Ok(t.write_csv(f)?))?;
    if let Some(x) = x {
        write_atomic(&args.out_dir.join("features.csv"), |f| Ok(x.write_csv(f)?))?;
    }
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
struct MineSettings {
    algo: Algorithm,
    #[serde(flatten)]
    params: Params,
}

fn mine(args: &MineArgs) -> Result<(), CliError> {
    let settings = apply_config(&MineSettings { algo: args.algo, params: args.params.params(args.min_support) }, args.params.config.as_deref())?;
    let (t, x) = load_data(&args.params)?;
    let p = &settings.params;
    let (run, secs, mem) = measure(|| run_algorithm(settings.algo, &t, x.as_ref(), p, p.min_support));
    let run = run?;
    for w in &run.extras.warnings {
        eprintln!("warning: {w}");
    }
    let out_dir = args.out_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    let labels = t.labels();
    write_atomic(&out_dir.join("rules.csv"), |f| Ok(write_rules_csv(f, &run.output.rules, labels)?))?;
    write_atomic(&out_dir.join("itemsets.csv"), |f| Ok(run.output.itemsets.write_csv(f, labels)?))?;
    if let Some(log) = &run.extras.visit_log {
        write_atomic(&out_dir.join("visit_log.csv"), |f| Ok(armine::bandit::write_visit_log(f, log, labels)?))?;
    }
    if let Some(trace) = &run.extras.reward_trace {
        write_atomic(&out_dir.join("reward_trace.csv"), |f| Ok(armine::rlar::write_reward_trace(f, trace)?))?;
    }
    if let Some(net) = &run.extras.network {
        write_atomic(&out_dir.join("network.txt"), |f| Ok(net.write(f)?))?;
    }
    let report = MinerReport {
        algorithm: settings.algo.name().into(),
        records: vec![Record {
            min_support: p.min_support,
            runtime_seconds: secs,
            peak_memory_mb: mem,
            itemsets: Some(run.output.itemsets.len()),
            rules: Some(run.output.rules.len()),
            error: None,
        }],
        environment: Environment::current(false),
        settings: Some(serde_json::to_value(&settings)?),
    };
    write_atomic(&out_dir.join("report.json"), |f| {
        serde_json::to_writer_pretty(&mut *f, &report)?;
        Ok(writeln!(f)?)
    })?;
    println!("{}: {} itemsets, {} rules in {secs:.3}s", settings.algo.name(), run.output.itemsets.len(), run.output.rules.len());
    Ok(())
}

/// Runs every (algorithm, threshold) cell; failed cells are recorded, not fatal.
pub fn run_bench(
    algos: &[Algorithm],
    thresholds: &[f64],
    data: &TransactionMatrix,
    features: Option<&FeatureMatrix>,
    params: &Params,
    parallel: bool,
) -> Result<Vec<MinerReport>, CliError> {
    if algos.is_empty() {
        return Err(CliError::Usage("at least one algorithm is required".into()));
    }
    if thresholds.is_empty() {
        return Err(CliError::Usage("at least one threshold is required".into()));
    }
    if thresholds.iter().any(|t| !(*t > 0.0 && *t <= 1.0)) {
        return Err(CliError::Usage("thresholds must lie in (0, 1]".into()));
    }
    let mut sweep = thresholds.to_vec();
    sweep.sort_by(f64::total_cmp);
    sweep.dedup();
    let cell = |algo: Algorithm, s: f64| {
        let (res, secs, mem) = measure(|| run_algorithm(algo, data, features, params, s));
        let mut rec = Record { min_support: s, runtime_seconds: secs, peak_memory_mb: mem, itemsets: None, rules: None, error: None };
        match res {
            Ok(run) => {
                rec.itemsets = Some(run.output.itemsets.len());
                rec.rules = Some(run.output.rules.len());
            }
            Err(e) => rec.error = Some(e.to_string()),
        }
        rec
    };
    let cells: Vec<(Algorithm, f64)> = algos.iter().flat_map(|&a| sweep.iter().map(move |&s| (a, s))).collect();
    let records: Vec<Record> = if parallel {
        std::thread::scope(|scope| {
            let handles: Vec<_> = cells.iter().map(|&(a, s)| scope.spawn(move || cell(a, s))).collect();
            handles.into_iter().map(|h| h.join().expect("bench cell panicked")).collect()
        })
    } else {
        cells.iter().map(|&(a, s)| cell(a, s)).collect()
    };
    let settings = serde_json::to_value(params)?;
    let mut reports = Vec::new();
    for (i, &algo) in algos.iter().enumerate() {
        reports.push(MinerReport {
            algorithm: algo.name().into(),
            records: records[i * sweep.len()..(i + 1) * sweep.len()].to_vec(),
            environment: Environment::current(parallel),
            settings: Some(settings.clone()),
        });
    }
    Ok(reports)
}

fn bench(args: &BenchArgs) -> Result<(), CliError> {
    let params = apply_config(&args.params.params(args.thresholds.first().copied().unwrap_or(0.1)), args.params.config.as_deref())?;
    let (t, x) = match args.dataset {
        Some(Variant::Synthetic1) => {
            let (t, x) = gen_synthetic1(&Synthetic1Spec::default(), params.seed)?;
            (t, Some(x))
        }
        Some(Variant::Synthetic2) => {
            let (t, x) = gen_synthetic2(&Synthetic2Spec::default(), params.seed)?;
            (t, Some(x))
        }
        Some(Variant::Categorical) => return Err(CliError::Usage("ingest categorical data with gen-data first".into())),
        None => load_data(&args.params)?,
    };
    let reports = run_bench(&args.algos, &args.thresholds, &t, x.as_ref(), &params, args.parallel)?;
    write_atomic(&args.out_dir.join("bench_report.json"), |f| {
        serde_json::to_writer_pretty(&mut *f, &reports)?;
        Ok(writeln!(f)?)
    })?;
    let tables: [(&str, fn(&Record) -> Option<f64>); 4] = [
        ("runtime.csv", |r| if r.error.is_none() { Some(r.runtime_seconds) } else { None }),
        ("memory.csv", |r| r.peak_memory_mb.filter(|_| r.error.is_none())),
        ("itemsets.csv", |r| r.itemsets.map(|v| v as f64)),
        ("rules.csv", |r| r.rules.map(|v| v as f64)),
    ];
    for (name, metric) in tables {
        let table = Comparison::from_reports(&reports, metric);
        write_atomic(&args.out_dir.join(name), |f| table.write_csv(f))?;
    }
    for rep in &reports {
        for r in &rep.records {
            if let Some(e) = &r.error {
                eprintln!("{} at {}: {e}", rep.algorithm, r.min_support);
            }
        }
    }
    Ok(())
}

fn rank(args: &RankArgs) -> Result<(), CliError> {
    let t = TransactionMatrix::read_csv_path(&args.transactions)?;
    let rules = read_rules_csv(BufReader::new(File::open(&args.rules)?), t.labels())?;
    let ranked = rank_rules(&rules, &t, args.key, args.k)?;
    match &args.out {
        Some(path) => write_atomic(path, |f| write_ranked_csv(f, &ranked, t.labels())),
        None => write_ranked_csv(std::io::stdout().lock(), &ranked, t.labels()),
    }
}

pub fn execute(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::GenData(a) => gen_data(a),
        Command::Mine(a) => mine(a),
        Command::Bench(a) => bench(a),
        Command::Rank(a) => rank(a),
    }
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
