//! `metamp`: pipeline commands and a thin client of the metamp service.
//!
//! Exit codes: 0 success, 1 validation failure (bad arguments or input, or
//! a 4xx from the service), 2 I/O failure (files, network, 5xx).

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde_json::Value;

use metamp_client::{Client, ClientError};
use metamp_core::config::Config;
use metamp_core::discrepancy::DetectionConfig;
use metamp_core::error::{EtlError, StoreError};
use metamp_core::etl::{run_directory, EtlConfig, EtlRun, NormalizationTable, RemapTable};
use metamp_core::ml::TrainedClassifier;
use metamp_core::model::{OpmFeatures, SourceTag};
use metamp_core::store::{EntryStore, MemoryStore};

#[derive(Parser)]
#[command(name = "metamp", version, about = "Membrane-protein metadata curation")]
struct Cli {
    /// Service base URL for client commands.
    #[arg(long, global = true, env = "METAMP_SERVER", default_value = "http://127.0.0.1:8080")]
    server: String,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract, stage and merge a source snapshot directory.
    Etl {
        #[command(subcommand)]
        action: EtlAction,
    },
    /// Run the HTTP service.
    Serve(ServeArgs),
    /// Discrepancy and outlier summary from the service.
    Qc {
        #[arg(long)]
        from: Option<i32>,
        #[arg(long)]
        to: Option<i32>,
    },
    /// DBSCAN and boxplot outliers from the service.
    Outliers {
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        min_pts: Option<usize>,
        /// PCA components.
        #[arg(long)]
        k: Option<usize>,
        /// pca or standardized.
        #[arg(long)]
        space: Option<String>,
        /// Comma-separated numeric attributes.
        #[arg(long)]
        features: Option<String>,
    },
    /// TM-count benchmark for predictor:reference pairs.
    Benchmark {
        /// e.g. TMbed:Expert,DeepTMHMM:Expert
        #[arg(long, value_delimiter = ',', required = true)]
        pairs: Vec<String>,
        /// csv or json.
        #[arg(long, default_value = "csv")]
        format: String,
    },
    /// Classify OPM feature records (a JSON object or array).
    Classify {
        #[arg(long)]
        input: PathBuf,
        /// Predict offline with a saved model document instead of the service.
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Save the service's trained classifier as a model document.
    Train {
        #[arg(long)]
        output: PathBuf,
    },
    /// Evaluate the configured classifier on the service's store.
    Evaluate {
        /// cv or holdout.
        #[arg(long, default_value = "cv")]
        protocol: String,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        test_fraction: Option<f64>,
        /// Self-train over the unlabeled pool.
        #[arg(long)]
        semi: bool,
    },
    /// Export matching entries.
    Export {
        /// csv or json.
        #[arg(long, default_value = "json")]
        format: String,
        /// Write here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
        /// attribute=value filters, as for /api/entries.
        #[arg(long = "filter", value_name = "KEY=VALUE")]
        filters: Vec<String>,
    },
}

#[derive(Subcommand)]
enum EtlAction {
    Run {
        #[arg(long)]
        sources: PathBuf,
        /// Store file to load the merged entries into.
        #[arg(long)]
        store: Option<PathBuf>,
        /// Directory for rejects, conflicts, gaps and warnings.
        #[arg(long)]
        logs: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long)]
    port: Option<u16>,
    #[arg(long)]
    host: Option<String>,
    /// Store file; defaults to the config's store_path, else in-memory.
    #[arg(long)]
    store: Option<PathBuf>,
    /// Run the ETL over this directory and load the result before serving.
    #[arg(long)]
    sources: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

enum Failure {
    Validation(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 1,
            Failure::Io(_) => 2,
        }
    }
}

impl From<ClientError> for Failure {
    fn from(e: ClientError) -> Self {
        if e.is_validation() {
            Failure::Validation(e.to_string())
        } else {
            Failure::Io(e.to_string())
        }
    }
}

impl From<EtlError> for Failure {
    fn from(e: EtlError) -> Self {
        match e {
            EtlError::Io { .. } => Failure::Io(e.to_string()),
            _ => Failure::Validation(e.to_string()),
        }
    }
}

impl From<StoreError> for Failure {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::Io { .. } | StoreError::Corrupt { .. } => Failure::Io(e.to_string()),
            _ => Failure::Validation(e.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, body: &str) -> Outcome {
    std::fs::write(path, body).map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display())))
}

fn pretty(v: &impl serde::Serialize) -> String {
    serde_json::to_string_pretty(v).expect("values serialize")
}

fn etl(sources: &Path) -> Result<EtlRun, Failure> {
    if !sources.is_dir() {
        return Err(Failure::Io(format!("{} is not a directory", sources.display())));
    }
    Ok(run_directory(sources, &NormalizationTable::builtin(), &RemapTable::published(), &EtlConfig::default())?)
}

fn write_logs(dir: &Path, run: &EtlRun) -> Outcome {
    std::fs::create_dir_all(dir).map_err(|e| Failure::Io(format!("cannot create {}: {e}", dir.display())))?;
    write(&dir.join("rejects.json"), &pretty(&run.rejects))?;
    write(&dir.join("conflicts.json"), &pretty(&run.conflicts))?;
    write(&dir.join("gaps.json"), &pretty(&run.gaps))?;
    write(&dir.join("qc_flags.json"), &pretty(&run.qc_flags))?;
    write(&dir.join("remapped.json"), &pretty(&run.remapped))?;
    write(&dir.join("warnings.txt"), &run.warnings.join("\n"))
}

fn etl_run(sources: &Path, store: Option<&Path>, logs: Option<&Path>) -> Outcome {
    let run = etl(sources)?;
    if let Some(dir) = logs {
        write_logs(dir, &run)?;
    }
    println!(
        "{} entries, {} rejects, {} conflicts, {} normalization gaps, {} remapped codes",
        run.entries.len(),
        run.rejects.len(),
        run.conflicts.len(),
        run.gaps.len(),
        run.remapped.len()
    );
    for w in &run.warnings {
        eprintln!("warning: {w}");
    }
    if let Some(path) = store {
        let s = MemoryStore::open(path, DetectionConfig::default())?;
        let version = s.load(run.entries)?;
        println!("store {} at version {version}", path.display());
    }
    Ok(())
}

async fn serve(args: ServeArgs) -> Outcome {
    let mut config = Config::load(args.config.as_deref()).map_err(|e| Failure::Validation(e.to_string()))?;
    if let Some(p) = args.port {
        config.port = p;
    }
    if let Some(h) = args.host {
        config.host = h;
    }
    if args.store.is_some() {
        config.store_path = args.store;
    }
    let store = match &config.store_path {
        Some(p) => MemoryStore::open(p, DetectionConfig::default())?,
        None => MemoryStore::new(DetectionConfig::default()),
    };
    if let Some(dir) = &args.sources {
        let run = etl(dir)?;
        store.load(run.entries)?;
    }
    metamp_server::serve(Arc::new(store), config)
        .await
        .map_err(|e| Failure::Io(format!("server failed: {e}")))
}

fn codes(v: &Value) -> Vec<&str> {
    v.as_array()
        .map(|a| a.iter().filter_map(Value::as_str).collect())
        .unwrap_or_default()
}

fn print_outliers(v: &Value) {
    let noise = codes(&v["report"]["outliers"]);
    let analysed = v["report"]["codes"].as_array().map_or(0, Vec::len);
    println!(
        "DBSCAN noise: {} of {analysed} entries ({} excluded for missing features)",
        noise.len(),
        v["report"]["excluded"]
    );
    if !noise.is_empty() {
        println!("  {}", noise.join(" "));
    }
    let b = &v["boxplots"];
    let scope = b["method"].as_str().unwrap_or("all methods");
    if let Some(groups) = b["groups"].as_object() {
        for (group, stats) in groups {
            let out: Vec<String> = stats["outliers"]
                .as_array()
                .into_iter()
                .flatten()
                .map(|p| format!("{} ({})", p[0].as_str().unwrap_or("?"), p[1]))
                .collect();
            if !out.is_empty() {
                println!("{} boxplot outliers, {group}, {scope}: {}", b["attribute"].as_str().unwrap_or(""), out.join(", "));
            }
        }
    }
}

async fn qc(client: &Client, from: Option<i32>, to: Option<i32>) -> Outcome {
    let (from, to) = (from.map(|y| y.to_string()), to.map(|y| y.to_string()));
    let mut params = vec![("kind", "all")];
    if let Some(f) = &from {
        params.push(("from", f));
    }
    if let Some(t) = &to {
        params.push(("to", t));
    }
    let d = client.view("discrepancy", &params).await?;
    println!("discrepancies {}-{}: {} total, {} open", d["from"], d["to"], d["total"], d["open"]);
    for r in d["records"].as_array().into_iter().flatten().filter(|r| r["resolved"] == false).take(20) {
        println!("  {} {} magnitude {}", r["pdb_code"].as_str().unwrap_or("?"), r["kind"].as_str().unwrap_or("?"), r["magnitude"]);
    }
    for c in d["agreement"].as_array().into_iter().flatten() {
        println!(
            "  agreement {}-{}: {}/{}",
            c["source_a"].as_str().unwrap_or("?"),
            c["source_b"].as_str().unwrap_or("?"),
            c["matches"],
            c["total"]
        );
    }
    print_outliers(&client.view("outlier", &[]).await?);
    Ok(())
}

fn parse_pair(s: &str) -> Result<(SourceTag, SourceTag), Failure> {
    let bad = || Failure::Validation(format!("pair {s:?} must look like TMbed:Expert"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

async fn benchmark(client: &Client, pairs: &[String], format: &str) -> Outcome {
    let pairs: Vec<(SourceTag, SourceTag)> = pairs.iter().map(|p| parse_pair(p)).collect::<Result<_, _>>()?;
    match format {
        "csv" => {
            for (i, &(a, b)) in pairs.iter().enumerate() {
                let csv = client.benchmark_csv(a, b).await?;
                // One header for the whole table.
                let skip = usize::from(i > 0);
                for line in csv.lines().skip(skip) {
                    println!("{line}");
                }
            }
        }
        "json" => {
            let mut reports = Vec::new();
            for (a, b) in pairs {
                reports.push(client.benchmark(a, b).await?);
            }
            println!("{}", pretty(&reports));
        }
        other => return Err(Failure::Validation(format!("format must be csv or json, not {other:?}"))),
    }
    Ok(())
}

fn parse_features(text: &str) -> Result<Vec<OpmFeatures>, Failure> {
    let v: Value = serde_json::from_str(text).map_err(|e| Failure::Validation(format!("input is not JSON: {e}")))?;
    let items = match v {
        Value::Array(items) => items,
        one => vec![one],
    };
    items
        .into_iter()
        .map(|i| serde_json::from_value(i).map_err(|e| Failure::Validation(format!("bad feature record: {e}"))))
        .collect()
}

async fn classify(client: &Client, input: &Path, model: Option<&Path>) -> Outcome {
    let features = parse_features(&read(input)?)?;
    let predictions = match model {
        Some(path) => {
            let clf = TrainedClassifier::from_json(&read(path)?).map_err(|e| Failure::Validation(e.to_string()))?;
            features
                .iter()
                .map(|f| clf.classify(f))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| Failure::Validation(e.to_string()))?
        }
        None => client.classify_many(&features).await?,
    };
    println!("{}", pretty(&predictions));
    Ok(())
}

async fn train(client: &Client, output: &Path) -> Outcome {
    let info = client.model().await?;
    write(output, &pretty(&info.document))?;
    let s = &info.summary;
    println!(
        "{} model: {} labeled ({:?} per class), {} pseudo-labeled, {} excluded; written to {}",
        serde_json::to_value(info.document.kind).unwrap_or_default(),
        s.labeled,
        s.class_counts,
        s.pseudo_labeled,
        s.excluded,
        output.display()
    );
    Ok(())
}

async fn evaluate(client: &Client, protocol: &str, k: Option<usize>, test_fraction: Option<f64>, semi: bool) -> Outcome {
    let k = k.map(|k| k.to_string());
    let tf = test_fraction.map(|t| t.to_string());
    let mut params = vec![("protocol", protocol), ("semi", if semi { "true" } else { "false" })];
    if let Some(k) = &k {
        params.push(("k", k));
    }
    if let Some(t) = &tf {
        params.push(("test_fraction", t));
    }
    let r = client.evaluate(&params).await?;
    println!("{:?}, {} fold(s)", r.protocol, r.folds);
    for (name, m) in [("accuracy", r.accuracy), ("precision", r.precision), ("recall", r.recall), ("f1", r.f1)] {
        println!("  {name:<9} {:.3} ± {:.3}", m.mean, m.std);
    }
    Ok(())
}

async fn export(client: &Client, format: &str, output: Option<&Path>, filters: &[String]) -> Outcome {
    let pairs: Vec<(&str, &str)> = filters
        .iter()
        .map(|f| f.split_once('=').ok_or_else(|| Failure::Validation(format!("filter {f:?} must be key=value"))))
        .collect::<Result<_, _>>()?;
    let body = client.export(format, &pairs).await?;
    match output {
        Some(p) => write(p, &body),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

async fn run(cli: Cli) -> Outcome {
    let client = || Client::new(&cli.server).map_err(|e| Failure::Validation(e.to_string()));
    match cli.command {
        Command::Etl {
            action: EtlAction::Run { sources, store, logs },
        } => etl_run(&sources, store.as_deref(), logs.as_deref()),
        Command::Serve(args) => serve(args).await,
        Command::Qc { from, to } => qc(&client()?, from, to).await,
        Command::Outliers {
            eps,
            min_pts,
            k,
            space,
            features,
        } => {
            let values = [
                ("eps", eps.map(|v| v.to_string())),
                ("min_pts", min_pts.map(|v| v.to_string())),
                ("k", k.map(|v| v.to_string())),
                ("space", space),
                ("features", features),
            ];
            let params: Vec<(&str, &str)> = values.iter().filter_map(|(k, v)| v.as_deref().map(|v| (*k, v))).collect();
            print_outliers(&client()?.view("outlier", &params).await?);
            Ok(())
        }
        Command::Benchmark { pairs, format } => benchmark(&client()?, &pairs, &format).await,
        Command::Classify { input, model } => classify(&client()?, &input, model.as_deref()).await,
        Command::Train { output } => train(&client()?, &output).await,
        Command::Evaluate {
            protocol,
            k,
            test_fraction,
            semi,
        } => evaluate(&client()?, &protocol, k, test_fraction, semi).await,
        Command::Export { format, output, filters } => export(&client()?, &format, output.as_deref(), &filters).await,
    }
}

#[tokio::main]
async fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
        .with_writer(std::io::stderr)
        .init();
    match run(cli).await {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (Failure::Validation(m) | Failure::Io(m)) = &f;
            eprintln!("error: {m}");
            ExitCode::from(f.code())
        }
    }
}
