//! Command-line front end: predict, generate, analyze, compare.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 a compare
//! threshold was violated.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use mpa::analytic;
use mpa::generator::{self, GeneratorConfig, RunManifest};
use mpa::ingest::{self, CodeMap, IngestedGraph, SiblingPolicy, DEFAULT_ISP_LABELS};
use mpa::io::{read_graph_files, write_graph_files};
use mpa::metrics::{self, FitPair, MetricBattery};
use mpa::model::{AnnotatedGraph, MpaParams};

#[derive(Parser)]
#[command(
    name = "mpa",
    about = "Grow and analyze annotated Internet AS-level topologies",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the closed-form predictions for a parameter set
    Predict(PredictArgs),
    /// Grow a synthetic topology and write graph, classes, and manifest
    Generate(GenerateArgs),
    /// Compute the metric battery of a graph file
    Analyze(AnalyzeArgs),
    /// Compare a synthetic graph against an observed one
    Compare(CompareArgs),
}

/// Model rates; unset flags fall back to the config file, then to the
/// January 2007 calibration.
#[derive(Args, Clone)]
struct ParamArgs {
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    nu: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    /// Mean providers per non-ISP
    #[arg(long)]
    m: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
    /// Derive c from the measured share of peering links
    #[arg(long)]
    peering_fraction: Option<f64>,
    /// TOML or JSON key/value file (rho, nu, c, m, mu, target_isps,
    /// target_non_isps, seed)
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct PredictArgs {
    #[command(flatten)]
    params: ParamArgs,
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long)]
    target_isps: Option<usize>,
    #[arg(long)]
    target_non_isps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Run this many generator instances with derived seeds (seed + index)
    #[arg(long, default_value_t = 1)]
    ensemble: usize,
    #[arg(long, env = "MPA_OUT_DIR", default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args, Clone)]
struct CodeMapArgs {
    /// Which endpoint of a code -1 record is the provider
    #[arg(long = "code-map", value_enum, default_value_t = CodeMapChoice::ProviderFirst)]
    code_map: CodeMapChoice,
    /// Skip sibling records (code 2) instead of mapping them to p2p
    #[arg(long)]
    drop_siblings: bool,
}

#[derive(clap::ValueEnum, Clone, Copy, PartialEq)]
enum CodeMapChoice {
    ProviderFirst,
    CustomerFirst,
}

impl CodeMapArgs {
    fn to_code_map(&self) -> CodeMap {
        CodeMap {
            provider_first_on_minus_one: self.code_map == CodeMapChoice::ProviderFirst,
            sibling_policy: if self.drop_siblings {
                SiblingPolicy::Drop
            } else {
                SiblingPolicy::AsP2p
            },
        }
    }
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Graph in as-rel text format
    graph: PathBuf,
    /// JSON class sidecar written by `generate`
    #[arg(long)]
    classes: Option<PathBuf>,
    /// AS taxonomy list to set node classes
    #[arg(long)]
    taxonomy: Option<PathBuf>,
    #[command(flatten)]
    code_map: CodeMapArgs,
    #[arg(long, env = "MPA_OUT_DIR", default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct CompareArgs {
    /// Synthetic graph (as-rel text)
    synthetic: PathBuf,
    /// Observed graph (as-rel text)
    observed: PathBuf,
    /// Class sidecar of the synthetic graph
    #[arg(long)]
    synthetic_classes: Option<PathBuf>,
    /// AS taxonomy list applied to the observed graph
    #[arg(long)]
    taxonomy: Option<PathBuf>,
    /// Manifest of the synthetic run, echoed into the report
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[command(flatten)]
    code_map: CodeMapArgs,
    /// Hard threshold on the degree-distribution exponent delta
    #[arg(long, default_value_t = 0.2)]
    dd_delta_max: f64,
    #[arg(long, env = "MPA_OUT_DIR", default_value = ".")]
    out_dir: PathBuf,
}

enum CliError {
    Usage(String),
    Data(String),
    Threshold(String),
}

impl CliError {
    fn report(self) -> ExitCode {
        match self {
            CliError::Usage(msg) => {
                eprintln!("error: {msg}");
                eprintln!("run with --help for usage");
                ExitCode::from(1)
            }
            CliError::Data(msg) => {
                eprintln!("error: {msg}");
                ExitCode::from(2)
            }
            CliError::Threshold(msg) => {
                eprintln!("threshold violated: {msg}");
                ExitCode::from(3)
            }
        }
    }
}

fn data_err<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Data(e.to_string())
}

/// Key/value config file shared by predict and generate.
#[derive(Debug, Default, Deserialize)]
struct ConfigFile {
    rho: Option<f64>,
    nu: Option<f64>,
    c: Option<f64>,
    m: Option<f64>,
    /// Alias of m.
    m_nonisp: Option<f64>,
    mu: Option<f64>,
    peering_fraction: Option<f64>,
    target_isps: Option<usize>,
    target_non_isps: Option<usize>,
    seed: Option<u64>,
}

impl ConfigFile {
    fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let parsed = if path.extension().is_some_and(|x| x == "json") {
            serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("bad config: {e}")))?
        } else {
            toml::from_str(&text).map_err(|e| CliError::Usage(format!("bad config: {e}")))?
        };
        Ok(parsed)
    }
}

struct Resolved {
    params: MpaParams,
    target_isps: usize,
    target_non_isps: usize,
    seed: u64,
}

/// Flag > config file > 2007 calibration default.
fn resolve(
    args: &ParamArgs,
    target_isps: Option<usize>,
    target_non_isps: Option<usize>,
    seed: Option<u64>,
) -> Result<Resolved, CliError> {
    let file = match &args.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let defaults = MpaParams::internet_2007();
    let rho = args.rho.or(file.rho).unwrap_or(defaults.rho);
    let nu = args.nu.or(file.nu).unwrap_or(defaults.nu);
    let m = args
        .m
        .or(file.m)
        .or(file.m_nonisp)
        .unwrap_or(defaults.m);
    let mu = args.mu.or(file.mu).unwrap_or(defaults.mu);
    let c = match args.peering_fraction.or(file.peering_fraction) {
        Some(f) => analytic::derive_peering_rate(f, nu, m, rho)
            .map_err(|e| CliError::Usage(e.to_string()))?,
        None => args.c.or(file.c).unwrap_or(defaults.c),
    };
    let params = MpaParams::new(rho, nu, c, m, mu).map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(Resolved {
        params,
        target_isps: target_isps.or(file.target_isps).unwrap_or(7_200),
        target_non_isps: target_non_isps.or(file.target_non_isps).unwrap_or(16_800),
        seed: seed.or(file.seed).unwrap_or(1),
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Predict(args) => cmd_predict(args),
        Command::Generate(args) => cmd_generate(args),
        Command::Analyze(args) => cmd_analyze(args),
        Command::Compare(args) => cmd_compare(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => e.report(),
    }
}

fn cmd_predict(args: PredictArgs) -> Result<(), CliError> {
    let resolved = resolve(&args.params, None, None, None)?;
    let prediction =
        analytic::predict(&resolved.params).map_err(|e| CliError::Usage(e.to_string()))?;
    let out = serde_json::json!({
        "params": resolved.params,
        "prediction": prediction,
    });
    println!("{}", serde_json::to_string_pretty(&out).unwrap());
    Ok(())
}

fn cmd_generate(args: GenerateArgs) -> Result<(), CliError> {
    let resolved = resolve(
        &args.params,
        args.target_isps,
        args.target_non_isps,
        args.seed,
    )?;
    if args.ensemble == 0 {
        return Err(CliError::Usage("--ensemble must be at least 1".into()));
    }
    for run_idx in 0..args.ensemble {
        let dir = if args.ensemble == 1 {
            args.out_dir.clone()
        } else {
            args.out_dir.join(format!("run_{run_idx:03}"))
        };
        fs::create_dir_all(&dir).map_err(data_err)?;
        let config = GeneratorConfig::new(
            resolved.params,
            resolved.target_isps,
            resolved.target_non_isps,
            resolved.seed + run_idx as u64,
        );
        config
            .validate()
            .map_err(|e| CliError::Usage(e.to_string()))?;
        let started = std::time::Instant::now();
        let (graph, manifest) = generator::run(&config).map_err(data_err)?;
        write_graph_files(
            &graph,
            None,
            &dir.join("graph.as-rel.txt"),
            &dir.join("graph.classes.json"),
        )
        .map_err(data_err)?;
        write_json(&dir.join("manifest.json"), &manifest)?;
        eprintln!(
            "wrote {} nodes / {} links to {} in {} ms",
            manifest.nodes,
            manifest.links,
            dir.display(),
            started.elapsed().as_millis()
        );
    }
    Ok(())
}

fn load_graph(
    path: &Path,
    classes: Option<&Path>,
    taxonomy: Option<&Path>,
    code_map: &CodeMap,
) -> Result<IngestedGraph, CliError> {
    let mut ingested = read_graph_files(path, classes, code_map).map_err(data_err)?;
    if let Some(tax_path) = taxonomy {
        let file = fs::File::open(tax_path).map_err(data_err)?;
        let (tax, warnings) =
            ingest::parse_taxonomy(std::io::BufReader::new(file), &DEFAULT_ISP_LABELS)
                .map_err(data_err)?;
        for w in &warnings {
            eprintln!("warning: {w}");
        }
        let report = ingest::apply_taxonomy(&mut ingested, &tax);
        eprintln!(
            "taxonomy: {} covered, {} uncovered, {} ISPs / {} non-ISPs (rho = {:.3})",
            report.covered, report.uncovered, report.isps, report.non_isps, report.rho
        );
        for w in report.consistency_warnings.iter().take(5) {
            eprintln!("warning: {w}");
        }
        if report.consistency_warnings.len() > 5 {
            eprintln!(
                "warning: {} more class inconsistencies",
                report.consistency_warnings.len() - 5
            );
        }
    } else if classes.is_none() {
        eprintln!("warning: no classes or taxonomy given, inferring classes from link roles");
    }
    Ok(ingested)
}

fn write_battery_files(dir: &Path, battery: &MetricBattery) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(data_err)?;
    let write = |name: &str, content: String| -> Result<(), CliError> {
        fs::write(dir.join(name), content).map_err(data_err)
    };
    write("dd.ccdf.csv", battery.dd.to_csv())?;
    write("ad_customers.ccdf.csv", battery.ad_customers.to_csv())?;
    write("ad_providers.ccdf.csv", battery.ad_providers.to_csv())?;
    write("ad_peers.ccdf.csv", battery.ad_peers.to_csv())?;
    write("add_customers.binned.csv", battery.add_customers.to_csv())?;
    write("add_peers.binned.csv", battery.add_peers.to_csv())?;
    if let Some(s) = &battery.jdd_c2p {
        write("jdd_c2p.binned.csv", s.to_csv())?;
    }
    if let Some(s) = &battery.jdd_p2p {
        write("jdd_p2p.binned.csv", s.to_csv())?;
    }
    write(
        "avg_neighbor_degree.binned.csv",
        battery.avg_neighbor_degree.to_csv(),
    )?;
    write("clustering.binned.csv", battery.clustering.to_csv())?;
    write_json(&dir.join("fits.json"), &battery.fits)?;
    Ok(())
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<(), CliError> {
    let code_map = args.code_map.to_code_map();
    let ingested = load_graph(
        &args.graph,
        args.classes.as_deref(),
        args.taxonomy.as_deref(),
        &code_map,
    )?;
    let battery = metrics::metric_battery(&ingested.graph).map_err(data_err)?;
    write_battery_files(&args.out_dir, &battery)?;
    let summary = serde_json::json!({
        "nodes": ingested.graph.node_count(),
        "links": ingested.graph.link_count(),
        "isps": ingested.graph.class_count(mpa::model::NodeClass::Isp),
        "non_isps": ingested.graph.class_count(mpa::model::NodeClass::NonIsp),
        "mean_degree": battery.mean_degree,
        "fits": battery.fits,
    });
    write_json(&args.out_dir.join("summary.json"), &summary)?;
    println!("{}", serde_json::to_string_pretty(&summary).unwrap());
    Ok(())
}

#[derive(Serialize)]
struct SidePair<T> {
    synthetic: T,
    observed: T,
}

#[derive(Serialize)]
struct CompareReport {
    manifest: Option<RunManifest>,
    dd_delta_max: f64,
    mean_degree: SidePair<f64>,
    exponent_deltas: BTreeMap<String, Option<f64>>,
    fits: BTreeMap<String, SidePair<FitPair>>,
    series: BTreeMap<String, SidePair<serde_json::Value>>,
}

fn series_map(b: &MetricBattery) -> BTreeMap<String, serde_json::Value> {
    let mut map = BTreeMap::new();
    let mut put = |k: &str, v: serde_json::Value| {
        map.insert(k.to_string(), v);
    };
    put("dd", serde_json::to_value(&b.dd).unwrap());
    put("ad_customers", serde_json::to_value(&b.ad_customers).unwrap());
    put("ad_providers", serde_json::to_value(&b.ad_providers).unwrap());
    put("ad_peers", serde_json::to_value(&b.ad_peers).unwrap());
    put("add_customers", serde_json::to_value(&b.add_customers).unwrap());
    put("add_peers", serde_json::to_value(&b.add_peers).unwrap());
    put("jdd_c2p", serde_json::to_value(&b.jdd_c2p).unwrap());
    put("jdd_p2p", serde_json::to_value(&b.jdd_p2p).unwrap());
    put(
        "avg_neighbor_degree",
        serde_json::to_value(&b.avg_neighbor_degree).unwrap(),
    );
    put("clustering", serde_json::to_value(&b.clustering).unwrap());
    map
}

fn build_report(
    synthetic: &AnnotatedGraph,
    observed: &AnnotatedGraph,
    manifest: Option<RunManifest>,
    dd_delta_max: f64,
) -> Result<CompareReport, CliError> {
    let syn = metrics::metric_battery(synthetic).map_err(data_err)?;
    let obs = metrics::metric_battery(observed).map_err(data_err)?;

    let mut fits = BTreeMap::new();
    let mut exponent_deltas = BTreeMap::new();
    for (name, s, o) in [
        ("dd", syn.fits.dd, obs.fits.dd),
        ("ad_customers", syn.fits.ad_customers, obs.fits.ad_customers),
        ("ad_peers", syn.fits.ad_peers, obs.fits.ad_peers),
    ] {
        // deltas use the default estimator; both fits ship in the report
        let delta = match (&s.mle, &o.mle) {
            (Some(a), Some(b)) => Some((a.gamma_hat - b.gamma_hat).abs()),
            _ => None,
        };
        exponent_deltas.insert(name.to_string(), delta);
        fits.insert(
            name.to_string(),
            SidePair {
                synthetic: s,
                observed: o,
            },
        );
    }

    let syn_series = series_map(&syn);
    let obs_series = series_map(&obs);
    let series = syn_series
        .into_iter()
        .map(|(k, v)| {
            let o = obs_series[&k].clone();
            (
                k,
                SidePair {
                    synthetic: v,
                    observed: o,
                },
            )
        })
        .collect();

    Ok(CompareReport {
        manifest,
        dd_delta_max,
        mean_degree: SidePair {
            synthetic: syn.mean_degree,
            observed: obs.mean_degree,
        },
        exponent_deltas,
        fits,
        series,
    })
}

fn cmd_compare(args: CompareArgs) -> Result<(), CliError> {
    let code_map = args.code_map.to_code_map();
    let synthetic = load_graph(
        &args.synthetic,
        args.synthetic_classes.as_deref(),
        None,
        &code_map,
    )?;
    let observed = load_graph(
        &args.observed,
        None,
        args.taxonomy.as_deref(),
        &code_map,
    )?;
    let manifest: Option<RunManifest> = match &args.manifest {
        Some(path) => Some(
            serde_json::from_str(&fs::read_to_string(path).map_err(data_err)?)
                .map_err(data_err)?,
        ),
        None => None,
    };
    let report = build_report(
        &synthetic.graph,
        &observed.graph,
        manifest,
        args.dd_delta_max,
    )?;
    fs::create_dir_all(&args.out_dir).map_err(data_err)?;
    write_json(&args.out_dir.join("report.json"), &report)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&serde_json::json!({
            "mean_degree": report.mean_degree,
            "exponent_deltas": report.exponent_deltas,
        }))
        .unwrap()
    );
    match report.exponent_deltas.get("dd").copied().flatten() {
        Some(delta) if delta <= args.dd_delta_max => Ok(()),
        Some(delta) => Err(CliError::Threshold(format!(
            "DD exponent delta {delta:.3} exceeds {:.3}",
            args.dd_delta_max
        ))),
        None => Err(CliError::Threshold(
            "DD exponent could not be fitted on both sides".into(),
        )),
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(data_err)?;
    fs::write(path, text).map_err(data_err)
}

// keep clap's derived help in sync with the declared interface
#[test]
fn cli_definition_is_consistent() {
    use clap::CommandFactory;
    Cli::command().debug_assert();
}
