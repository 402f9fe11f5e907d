use std::path::{Path, PathBuf};
use std::process::ExitCode;

use balldiv::{permutation_test, DistanceKind, PermutationPlan, ScenarioParams, TestResult};
use balldiv_harness::config::DEFAULT_PERMUTATIONS;
use balldiv_harness::{
    level_preset, load_csv, oracle_report, power_preset, run_power_study_with, run_subsample_study,
    with_threads, write_json, write_study, Error, PowerCurve, Preset, Result, StudyConfig,
    SubsampleConfig, SubsampleStudy,
};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "balldiv", version, about = "Ball-divergence two-sample tests and simulation studies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Test whether the two labeled groups of a CSV file share a distribution.
    Test(TestArgs),
    /// Power study over a scenario grid.
    Power(StudyArgs),
    /// Rejection rates under the null scenario.
    Level(StudyArgs),
    /// Population divergence, energy distance and separation rate of a scenario.
    Oracle(OracleArgs),
    /// Power on a real dataset by proportional sub-sampling.
    Subsample(SubsampleArgs),
    /// Print the built-in scenarios as TOML `[[scenario]]` tables.
    Catalogue,
}

#[derive(Args)]
struct Common {
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TestArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    label_column: String,
    /// Distance kind; repeat for several (default: all four).
    #[arg(long = "kind")]
    kinds: Vec<DistanceKind>,
    /// Random permutation replicates B.
    #[arg(long, default_value_t = DEFAULT_PERMUTATIONS)]
    permutations: usize,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Enumerate all relabelings instead of sampling them.
    #[arg(long)]
    exhaustive: bool,
    /// Largest number of relabelings `--exhaustive` may enumerate.
    #[arg(long, default_value_t = balldiv::permute::DEFAULT_EXHAUSTIVE_CAP)]
    exhaustive_cap: u64,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct StudyArgs {
    /// Study config (TOML). Without it the preset is used.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "desk")]
    preset: Preset,
    /// Replaces the config's master seed.
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    scenario: String,
    #[arg(long)]
    dim: usize,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    /// n = m for fixed-size scenarios.
    #[arg(long)]
    size: Option<usize>,
    #[arg(long = "kind")]
    kinds: Vec<DistanceKind>,
    /// Monte Carlo replicates per estimate.
    #[arg(long, default_value_t = 100_000)]
    replicates: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct SubsampleArgs {
    /// Sub-sampling config (TOML); flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    label_column: Option<String>,
    /// Pooled sub-sample sizes, comma separated.
    #[arg(long, value_delimiter = ',')]
    sizes: Vec<usize>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    permutations: Option<usize>,
    #[arg(long = "kind")]
    kinds: Vec<DistanceKind>,
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    common: Common,
}

fn kinds_or_all(kinds: Vec<DistanceKind>) -> Vec<DistanceKind> {
    if kinds.is_empty() {
        DistanceKind::ALL.to_vec()
    } else {
        kinds
    }
}

#[derive(Serialize)]
struct TestReport {
    data: PathBuf,
    labels: [String; 2],
    n: usize,
    m: usize,
    d: usize,
    results: Vec<KindResult>,
}

#[derive(Serialize)]
struct KindResult {
    kind: DistanceKind,
    statistic: f64,
    v1: f64,
    v2: f64,
    p_value: f64,
    reject: bool,
    alpha: f64,
    cutoff_estimate: f64,
    replicates: usize,
    exhaustive: bool,
    seed: Option<u64>,
}

impl KindResult {
    fn new(kind: DistanceKind, r: TestResult) -> Self {
        Self {
            kind,
            statistic: r.observed.t,
            v1: r.observed.v1,
            v2: r.observed.v2,
            p_value: r.p_value,
            reject: r.reject,
            alpha: r.alpha,
            cutoff_estimate: r.cutoff_estimate,
            replicates: r.b,
            exhaustive: r.exhaustive,
            seed: r.seed,
        }
    }
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn run_test(args: TestArgs) -> Result<()> {
    let data = load_csv(&args.data, &args.label_column)?;
    let pooled = data.pooled()?;
    let plan = if args.exhaustive {
        PermutationPlan::Exhaustive {
            max_combinations: args.exhaustive_cap,
        }
    } else {
        PermutationPlan::random(args.permutations, args.seed)
    };
    let results = with_threads(args.common.threads, || {
        kinds_or_all(args.kinds)
            .into_iter()
            .map(|kind| Ok(KindResult::new(kind, permutation_test(&pooled, &kind.spec(), plan, args.alpha)?)))
            .collect::<Result<Vec<_>>>()
    })??;
    let report = TestReport {
        data: args.data,
        labels: data.labels.clone(),
        n: pooled.n(),
        m: pooled.m(),
        d: pooled.dim(),
        results,
    };
    if let Some(out) = &args.common.out {
        write_json(out, "test.json", &report)?;
    }
    print_json(&report)
}

fn log_progress(rows: &[PowerCurve]) {
    if let Some(first) = rows.first() {
        let powers: Vec<String> = rows.iter().map(|r| format!("{} {:.3}", r.kind, r.power)).collect();
        eprintln!("{} d={} n={} m={}: {}", first.scenario, first.d, first.n, first.m, powers.join(", "));
    }
}

fn run_study(args: StudyArgs, preset: fn(Preset) -> StudyConfig, default_out: &str) -> Result<()> {
    let mut config = match &args.config {
        Some(path) => StudyConfig::load(path)?,
        None => preset(args.preset),
    };
    if let Some(seed) = args.seed {
        config.master_seed = seed;
    }
    if args.common.threads.is_some() {
        config.threads = args.common.threads;
    }
    config.validate()?;
    let curves = with_threads(config.threads, || run_power_study_with(&config, log_progress))??;
    let out = args.common.out.unwrap_or_else(|| PathBuf::from(default_out));
    let mut written = write_study(&out, &curves)?;
    // the config echo leaves out `threads`, which never changes results
    written.push(write_json(&out, "config.json", &StudyConfig { threads: None, ..config })?);
    for path in written {
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn run_oracle(args: OracleArgs) -> Result<()> {
    let params = ScenarioParams {
        beta: args.beta,
        gamma: args.gamma,
        size: args.size,
    };
    let template = balldiv::lookup(&args.scenario, &params)?;
    let spec = template.at(args.dim)?;
    let label = balldiv_harness::GridEntry {
        scenario: args.scenario.clone(),
        dims: None,
        beta: args.beta,
        gamma: args.gamma,
        size: args.size,
    }
    .label();
    let kinds = kinds_or_all(args.kinds);
    let report = with_threads(args.common.threads, || oracle_report(&spec, &label, &kinds, args.replicates, args.seed))??;
    if let Some(out) = &args.common.out {
        write_json(out, "oracle.json", &report)?;
    }
    print_json(&report)
}

fn run_subsample(args: SubsampleArgs) -> Result<()> {
    let base = match &args.config {
        Some(path) => Some(SubsampleConfig::load(path)?),
        None => None,
    };
    let missing = |what: &str| Error::Config(format!("subsample needs --{what} or a config file that sets it"));
    let data_path = args
        .data
        .or_else(|| base.as_ref().map(|b| b.data.clone()))
        .ok_or_else(|| missing("data"))?;
    let label_column = args
        .label_column
        .or_else(|| base.as_ref().map(|b| b.label_column.clone()))
        .ok_or_else(|| missing("label-column"))?;
    let sizes = if args.sizes.is_empty() {
        base.as_ref().map(|b| b.sizes.clone()).ok_or_else(|| missing("sizes"))?
    } else {
        args.sizes
    };
    let kinds = if args.kinds.is_empty() {
        base.as_ref().map_or_else(|| DistanceKind::ALL.to_vec(), |b| b.kinds.clone())
    } else {
        args.kinds
    };
    let data = load_csv(&data_path, &label_column)?;
    let study = SubsampleStudy {
        name: file_name(&data_path),
        data,
        sizes,
        reps: args.reps.or(base.as_ref().map(|b| b.reps)).unwrap_or(balldiv_harness::config::DEFAULT_REPS),
        alpha: args.alpha.or(base.as_ref().map(|b| b.alpha)).unwrap_or(0.05),
        permutations: args.permutations.or(base.as_ref().map(|b| b.permutations)).unwrap_or(DEFAULT_PERMUTATIONS),
        kinds,
        seed: args.seed.or(base.as_ref().map(|b| b.seed)).unwrap_or(0),
    };
    if !(study.alpha > 0.0 && study.alpha < 1.0) {
        return Err(Error::Config(format!("alpha must lie in (0, 1), got {}", study.alpha)));
    }
    let threads = args.common.threads.or(base.as_ref().and_then(|b| b.threads));
    let curves = with_threads(threads, || run_subsample_study(&study))??;
    for row in &curves {
        log_progress(std::slice::from_ref(row));
    }
    let out = args.common.out.unwrap_or_else(|| PathBuf::from("results/subsample"));
    for path in write_study(&out, &curves)? {
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn file_name(path: &Path) -> String {
    path.file_stem().map_or_else(|| "data".to_string(), |s| s.to_string_lossy().into_owned())
}

fn run_catalogue() -> Result<()> {
    #[derive(Serialize)]
    struct Catalogue {
        scenario: Vec<balldiv::ScenarioTemplate>,
    }
    let text = toml::to_string(&Catalogue {
        scenario: balldiv::catalogue(),
    })
    .map_err(|e| Error::Config(format!("cannot render catalogue: {e}")))?;
    print!("{text}");
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Test(args) => run_test(args),
        Command::Power(args) => run_study(args, power_preset, "results/power"),
        Command::Level(args) => run_study(args, level_preset, "results/level"),
        Command::Oracle(args) => run_oracle(args),
        Command::Subsample(args) => run_subsample(args),
        Command::Catalogue => run_catalogue(),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
