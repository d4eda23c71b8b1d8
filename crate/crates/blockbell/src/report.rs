//! Output schemas. Every file written by the CLI deserializes back into the
//! struct that produced it.

use std::io::Write;
use std::path::{Path, PathBuf};

use blockbell_core::exact::McComparison;
use blockbell_core::rational::{to_f64, Rational};
use blockbell_core::sim::{CycleRecord, ExperimentConfig, ExperimentResult};
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::strategy_file::{dist_text, DistText, RationalText, StrategyFile};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfigEcho {
    pub num_blocks: u64,
    pub trials_per_block: u64,
    pub seed: u64,
    pub cycle_policy: String,
    pub settings_law: String,
    pub strategy: StrategyFile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleRow {
    pub index: usize,
    /// Block indices for `ab, ab', a'b, a'b'`.
    pub blocks: [usize; 4],
    pub term_estimates: DistText,
    pub ch_estimate: RationalText,
    pub violated: bool,
}

impl CycleRow {
    pub fn new(index: usize, c: &CycleRecord) -> Self {
        Self {
            index,
            blocks: c.block_indices,
            term_estimates: dist_text(&c.term_estimates),
            ch_estimate: (&c.ch_estimate).into(),
            violated: c.violated,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactComparison {
    pub exact_probability: RationalText,
    pub exact_probability_decimal: f64,
    pub standard_error: f64,
    pub z: f64,
}

impl From<&McComparison> for ExactComparison {
    fn from(c: &McComparison) -> Self {
        Self {
            exact_probability: (&c.exact).into(),
            exact_probability_decimal: to_f64(&c.exact),
            standard_error: c.standard_error,
            z: c.z,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultsFile {
    pub version: String,
    pub config: SimulationConfigEcho,
    pub block_count: u64,
    pub cycle_count: u64,
    pub violation_count: u64,
    /// Absent when no cycle completed.
    pub violation_fraction: Option<RationalText>,
    pub violation_fraction_decimal: Option<f64>,
    pub mean_cycle_ch: RationalText,
    /// Only for mixture strategies.
    pub exact: Option<ExactComparison>,
    pub cycles: Vec<CycleRow>,
}

impl ResultsFile {
    pub fn new(
        cfg: &ExperimentConfig,
        strategy: &StrategyFile,
        result: &ExperimentResult,
        comparison: Option<&McComparison>,
    ) -> Self {
        let fraction = blockbell_core::sim::violation_fraction(result).ok();
        Self {
            version: VERSION.to_string(),
            config: SimulationConfigEcho {
                num_blocks: cfg.num_blocks,
                trials_per_block: cfg.trials_per_block,
                seed: cfg.seed,
                cycle_policy: policy_name(cfg.cycle_policy).into(),
                settings_law: settings_name(cfg.settings_law).into(),
                strategy: strategy.clone(),
            },
            block_count: result.blocks.len() as u64,
            cycle_count: result.cycle_count,
            violation_count: result.violation_count,
            violation_fraction_decimal: fraction.as_ref().map(to_f64),
            violation_fraction: fraction.map(RationalText),
            mean_cycle_ch: blockbell_core::sim::mean_cycle_ch(result).into(),
            exact: comparison.map(ExactComparison::from),
            cycles: result
                .cycles
                .iter()
                .enumerate()
                .map(|(i, c)| CycleRow::new(i, c))
                .collect(),
        }
    }
}

pub fn policy_name(p: blockbell_core::sim::CyclePolicy) -> &'static str {
    match p {
        blockbell_core::sim::CyclePolicy::DiscardDuplicates => "discard_duplicates",
        blockbell_core::sim::CyclePolicy::QueuePerSetting => "queue_per_setting",
    }
}

pub fn settings_name(s: blockbell_core::sim::SettingsLaw) -> &'static str {
    match s {
        blockbell_core::sim::SettingsLaw::Uniform => "uniform",
        blockbell_core::sim::SettingsLaw::RoundRobin => "round_robin",
    }
}

/// One CSV row per cycle.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleCsvRow {
    pub index: usize,
    pub block_ab: usize,
    pub block_abp: usize,
    pub block_apb: usize,
    pub block_apbp: usize,
    pub ch_num: String,
    pub ch_den: String,
    pub violated: bool,
}

impl From<&CycleRow> for CycleCsvRow {
    fn from(r: &CycleRow) -> Self {
        let [ab, abp, apb, apbp] = r.blocks;
        Self {
            index: r.index,
            block_ab: ab,
            block_abp: abp,
            block_apb: apb,
            block_apbp: apbp,
            ch_num: r.ch_estimate.0.numer().to_string(),
            ch_den: r.ch_estimate.0.denom().to_string(),
            violated: r.violated,
        }
    }
}

pub fn write_csv<T: Serialize>(
    rows: impl IntoIterator<Item = T>,
    out: impl Write,
) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| CliError::Internal(e.to_string()))?;
    Ok(())
}

pub fn csv_string<T: Serialize>(rows: impl IntoIterator<Item = T>) -> Result<String, CliError> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    String::from_utf8(buf).map_err(|e| CliError::Internal(e.to_string()))
}

pub fn read_cycles_csv(path: &Path) -> Result<Vec<CycleCsvRow>, CliError> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize()
        .map(|row| row.map_err(CliError::from))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactReportFile {
    pub violation_probability: RationalText,
    pub violation_probability_decimal: f64,
    pub expected_ch: RationalText,
    pub assignment_count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizeReportFile {
    pub k: usize,
    pub weights: Vec<RationalText>,
    pub deficits: Vec<RationalText>,
    pub rho: RationalText,
    pub eps: RationalText,
    pub probability: RationalText,
    pub probability_decimal: f64,
    pub evaluations: u64,
    pub history: Vec<RationalText>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeReportFile {
    pub violations: u64,
    pub cycles: u64,
    pub null_p: RationalText,
    pub observed_fraction: RationalText,
    pub observed_fraction_decimal: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRow {
    pub separation: String,
    pub light_travel_s: f64,
    pub min_distance_m: f64,
    pub achieved: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparationReportFile {
    pub distance_m: f64,
    pub experiment_s: f64,
    pub block_s: f64,
    pub trial_s: f64,
    pub classification: String,
    pub throwaway_trials: u64,
    pub thresholds: Vec<ThresholdRow>,
}

/// Written next to every output so a run can be repeated exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub version: String,
    pub seed: Option<u64>,
    pub config: serde_json::Value,
    /// File names relative to the output directory.
    pub outputs: Vec<String>,
}

pub const MANIFEST_NAME: &str = "manifest.json";

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

/// Creates `dir`, writes each `(name, contents)` pair into it, then the
/// manifest. Returns the written paths.
pub fn write_outputs(
    dir: &Path,
    manifest: &RunManifest,
    files: &[(&str, String)],
) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut written = Vec::new();
    for (name, contents) in files {
        let path = dir.join(name);
        std::fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
        written.push(path);
    }
    let path = dir.join(MANIFEST_NAME);
    write_json(&path, manifest)?;
    written.push(path);
    Ok(written)
}

pub fn rational_vec(v: &[Rational]) -> Vec<RationalText> {
    v.iter().map(RationalText::from).collect()
}
