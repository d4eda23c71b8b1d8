use std::ffi::OsString;
use std::path::PathBuf;

use blockbell_core::exact::{binomial_tail_p, compare_mc_exact, exact_report};
use blockbell_core::optimize::{optimize_deficit_family, SearchConfig};
use blockbell_core::rational::{format_rational, parse_rational, to_f64, Rational};
use blockbell_core::separation::{
    classify, throwaway_trials_needed, SeparationScenario, SeparationType, SPEED_OF_LIGHT,
};
use blockbell_core::sim::{
    fraction, run_experiment, CyclePolicy, ExperimentConfig, SettingsLaw, Strategy,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::error::CliError;
use crate::report::{
    csv_string, rational_vec, AnalyzeReportFile, CycleCsvRow, ExactReportFile, OptimizeReportFile,
    ResultsFile, RunManifest, SeparationReportFile, ThresholdRow, VERSION,
};
use crate::strategy_file::{RationalText, StrategyFile};

#[derive(Debug, Parser)]
#[command(
    name = "blockbell",
    version,
    about = "Block-measurement Bell test simulator and exact analyzer"
)]
pub struct Cli {
    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Directory for result files and the run manifest.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Format of the report printed to stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a randomized-settings block experiment against a strategy file.
    Simulate(SimulateArgs),
    /// Exact cycle-violation probability and expected CH of a mixture.
    Exact(ExactArgs),
    /// Search saturating deficit mixtures for high violation probability.
    Optimize(OptimizeArgs),
    /// One-sided binomial p-value of a violation count.
    Analyze(AnalyzeArgs),
    /// Separation type and light-travel thresholds for a detector layout.
    Separation(SeparationArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    DiscardDuplicates,
    QueuePerSetting,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SettingsArg {
    Uniform,
    RoundRobin,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Strategy description (JSON).
    pub strategy: PathBuf,
    #[arg(long)]
    pub blocks: u64,
    /// Trials per block; defaults to the strategy file's block_length.
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long, value_enum, default_value_t = PolicyArg::DiscardDuplicates)]
    pub policy: PolicyArg,
    #[arg(long, value_enum, default_value_t = SettingsArg::Uniform)]
    pub settings: SettingsArg,
}

#[derive(Debug, Args)]
pub struct ExactArgs {
    /// Mixture strategy description (JSON).
    pub strategy: PathBuf,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    /// Number of mixture components.
    #[arg(long, default_value_t = 4)]
    pub k: usize,
    #[arg(long, default_value_t = SearchConfig::default().grid_resolution)]
    pub grid: u32,
    #[arg(long, default_value_t = SearchConfig::default().refinement_steps)]
    pub refine: u32,
    #[arg(long, default_value_t = SearchConfig::default().max_grid_points)]
    pub max_grid_points: u64,
    /// Pin the deficit ladder, e.g. `0,6,21`.
    #[arg(long, value_delimiter = ',')]
    pub fixed_deficits: Option<Vec<u64>>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    pub violations: u64,
    pub cycles: u64,
    /// Null violation probability as `num/den`.
    pub null_p: String,
}

#[derive(Debug, Args)]
pub struct SeparationArgs {
    /// Detector separation in meters.
    #[arg(
        long,
        conflicts_with = "distance_km",
        required_unless_present = "distance_km"
    )]
    pub distance: Option<f64>,
    #[arg(long)]
    pub distance_km: Option<f64>,
    /// Whole-experiment duration in seconds.
    #[arg(
        long,
        conflicts_with = "experiment_min",
        required_unless_present = "experiment_min"
    )]
    pub experiment: Option<f64>,
    #[arg(long)]
    pub experiment_min: Option<f64>,
    /// Block duration in seconds.
    #[arg(long)]
    pub block: f64,
    /// Trial duration in seconds.
    #[arg(long)]
    pub trial: f64,
}

/// What a command produced: the stdout text and the files for `--out`.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub stdout: String,
    pub files: Vec<(&'static str, String)>,
    pub manifest: RunManifest,
}

pub fn run_from<I, T>(args: I) -> Result<Output, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| CliError::Validation(e.to_string()))?;
    run(&cli)
}

/// Executes the command and, when `--out` is set, writes its files.
pub fn run(cli: &Cli) -> Result<Output, CliError> {
    let output = match &cli.command {
        Command::Simulate(a) => simulate(cli, a)?,
        Command::Exact(a) => exact(cli, a)?,
        Command::Optimize(a) => optimize(cli, a)?,
        Command::Analyze(a) => analyze(cli, a)?,
        Command::Separation(a) => separation(cli, a)?,
    };
    if let Some(dir) = &cli.out {
        crate::report::write_outputs(dir, &output.manifest, &output.files)?;
    }
    Ok(output)
}

fn pretty<T: Serialize>(v: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

fn manifest(
    subcommand: &str,
    seed: Option<u64>,
    config: serde_json::Value,
    files: &[(&str, String)],
) -> RunManifest {
    RunManifest {
        subcommand: subcommand.into(),
        version: VERSION.into(),
        seed,
        config,
        outputs: files.iter().map(|(n, _)| n.to_string()).collect(),
    }
}

fn simulate(cli: &Cli, a: &SimulateArgs) -> Result<Output, CliError> {
    let file = StrategyFile::load(&a.strategy)?;
    let trials = a.trials.or(file.block_length()).ok_or_else(|| {
        CliError::Validation(
            "--trials is required when the strategy file has no block_length".into(),
        )
    })?;
    let cfg = ExperimentConfig {
        num_blocks: a.blocks,
        trials_per_block: trials,
        seed: cli.seed,
        cycle_policy: match a.policy {
            PolicyArg::DiscardDuplicates => CyclePolicy::DiscardDuplicates,
            PolicyArg::QueuePerSetting => CyclePolicy::QueuePerSetting,
        },
        settings_law: match a.settings {
            SettingsArg::Uniform => SettingsLaw::Uniform,
            SettingsArg::RoundRobin => SettingsLaw::RoundRobin,
        },
    };
    let strategy = file.to_strategy()?;
    let result = run_experiment(&cfg, &strategy)?;
    let comparison = match &strategy {
        Strategy::Mixture(m) if result.cycle_count > 0 => Some(compare_mc_exact(&result, m)?),
        _ => None,
    };
    let results = ResultsFile::new(&cfg, &file, &result, comparison.as_ref());
    let results_json = pretty(&results)?;
    let cycles_csv = csv_string(results.cycles.iter().map(CycleCsvRow::from))?;

    let stdout = match (cli.format, cli.out.is_some()) {
        (Format::Csv, _) => cycles_csv.clone(),
        (Format::Json, false) => results_json.clone(),
        (Format::Json, true) => pretty(&json!({
            "cycle_count": results.cycle_count,
            "violation_count": results.violation_count,
            "violation_fraction": results.violation_fraction,
            "violation_fraction_decimal": results.violation_fraction_decimal,
            "exact": results.exact,
        }))?,
    };
    let files = vec![("results.json", results_json), ("cycles.csv", cycles_csv)];
    let config = serde_json::to_value(&results.config)?;
    let manifest = manifest("simulate", Some(cli.seed), config, &files);
    Ok(Output {
        stdout,
        files,
        manifest,
    })
}

fn exact(cli: &Cli, a: &ExactArgs) -> Result<Output, CliError> {
    let file = StrategyFile::load(&a.strategy)?;
    let m = file.to_mixture()?;
    let r = exact_report(&m);
    let report = ExactReportFile {
        violation_probability_decimal: to_f64(&r.violation_probability),
        violation_probability: r.violation_probability.into(),
        expected_ch: r.expected_ch.into(),
        assignment_count: r.assignment_count,
    };
    let body = pretty(&report)?;
    let stdout = match cli.format {
        Format::Json => body.clone(),
        Format::Csv => csv_string([&report])?,
    };
    let files = vec![("exact.json", body)];
    let manifest = manifest("exact", None, json!({ "strategy": file }), &files);
    Ok(Output {
        stdout,
        files,
        manifest,
    })
}

fn optimize(cli: &Cli, a: &OptimizeArgs) -> Result<Output, CliError> {
    let cfg = SearchConfig {
        grid_resolution: a.grid,
        refinement_steps: a.refine,
        seed: cli.seed,
        max_grid_points: a.max_grid_points,
        fixed_deficits: a.fixed_deficits.clone(),
    };
    let out = optimize_deficit_family(a.k, &cfg)?;
    let f = &out.family;
    let report = OptimizeReportFile {
        k: a.k,
        weights: rational_vec(&f.weights),
        deficits: rational_vec(&f.deficits),
        rho: (&f.rho).into(),
        eps: (&f.eps_unit).into(),
        probability_decimal: to_f64(&out.probability),
        probability: out.probability.clone().into(),
        evaluations: out.evaluations,
        history: rational_vec(&out.history),
    };
    let body = pretty(&report)?;
    let mixture = blockbell_core::optimize::general_to_mixture(f)?;
    let strategy = pretty(&StrategyFile::from_mixture(&mixture, None))?;
    let stdout = match cli.format {
        Format::Json => body.clone(),
        Format::Csv => {
            #[derive(Serialize)]
            struct Row {
                component: usize,
                weight: String,
                deficit: String,
            }
            csv_string(
                f.weights
                    .iter()
                    .zip(&f.deficits)
                    .enumerate()
                    .map(|(i, (w, d))| Row {
                        component: i,
                        weight: format_rational(w),
                        deficit: format_rational(d),
                    }),
            )?
        }
    };
    let files = vec![("optimize.json", body), ("best-strategy.json", strategy)];
    let config = json!({
        "k": a.k,
        "grid_resolution": a.grid,
        "refinement_steps": a.refine,
        "max_grid_points": a.max_grid_points,
        "fixed_deficits": a.fixed_deficits,
    });
    let manifest = manifest("optimize", Some(cli.seed), config, &files);
    Ok(Output {
        stdout,
        files,
        manifest,
    })
}

fn analyze(cli: &Cli, a: &AnalyzeArgs) -> Result<Output, CliError> {
    let null_p: Rational = parse_rational(&a.null_p)?;
    let observed = fraction(a.violations, a.cycles)?;
    let p_value = binomial_tail_p(a.violations, a.cycles, &null_p)?;
    let report = AnalyzeReportFile {
        violations: a.violations,
        cycles: a.cycles,
        null_p: RationalText(null_p),
        observed_fraction_decimal: to_f64(&observed),
        observed_fraction: observed.into(),
        p_value,
    };
    let body = pretty(&report)?;
    let stdout = match cli.format {
        Format::Json => body.clone(),
        Format::Csv => csv_string([&report])?,
    };
    let files = vec![("analyze.json", body)];
    let config = json!({ "violations": a.violations, "cycles": a.cycles, "null_p": report.null_p });
    let manifest = manifest("analyze", None, config, &files);
    Ok(Output {
        stdout,
        files,
        manifest,
    })
}

fn separation_name(t: SeparationType) -> &'static str {
    match t {
        SeparationType::Type1 => "type1",
        SeparationType::Type2 => "type2",
        SeparationType::Type3 => "type3",
        SeparationType::NoneAchieved => "none",
    }
}

fn separation(cli: &Cli, a: &SeparationArgs) -> Result<Output, CliError> {
    let distance = a
        .distance
        .or(a.distance_km.map(|km| km * 1e3))
        .expect("clap enforces one distance flag");
    let experiment = a
        .experiment
        .or(a.experiment_min.map(|m| m * 60.0))
        .expect("clap enforces one duration flag");
    let s = SeparationScenario::new(distance, experiment, a.block, a.trial)?;
    let class = classify(&s);
    let thresholds = s
        .thresholds()
        .into_iter()
        .map(|(t, d)| ThresholdRow {
            separation: separation_name(t).into(),
            light_travel_s: d / SPEED_OF_LIGHT,
            min_distance_m: d,
            achieved: distance >= d,
        })
        .collect::<Vec<_>>();
    let report = SeparationReportFile {
        distance_m: distance,
        experiment_s: experiment,
        block_s: a.block,
        trial_s: a.trial,
        classification: separation_name(class).into(),
        throwaway_trials: throwaway_trials_needed(distance, a.trial)?,
        thresholds,
    };
    let body = pretty(&report)?;
    let stdout = match cli.format {
        Format::Json => body.clone(),
        Format::Csv => csv_string(&report.thresholds)?,
    };
    let files = vec![("separation.json", body)];
    let config = json!({ "distance_m": distance, "experiment_s": experiment, "block_s": a.block, "trial_s": a.trial });
    let manifest = manifest("separation", None, config, &files);
    Ok(Output {
        stdout,
        files,
        manifest,
    })
}
