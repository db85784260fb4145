//! Experiment configuration: CLI flags, the JSON config file schema, and the
//! resolution rules that merge the two into a single reproducible run plan.
//!
//! Precedence is flags over file over defaults. The resolved configuration is
//! written back out as `manifest.json` so a run can be repeated exactly.

use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use serde::{Deserialize, Serialize};

use isac_core::channel::FadingModel;
use isac_core::mfe::{ImpairmentConfig, LinkBudget};
use isac_core::phy::PhyConfig;
use isac_core::sched::{MismatchSweepConfig, ProtocolConfig, TrajectoryConfig};

use crate::CliError;

/// Command-line arguments. Flags override the corresponding file fields.
#[derive(Debug, Parser)]
#[command(name = "isac-bench", version, about = "Link-level mmWave ISAC experiment runner")]
pub struct Args {
    /// JSON experiment configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// Experiment to run (overrides the config file).
    #[arg(long, value_enum)]
    pub experiment: Option<ExperimentKind>,

    /// Master seed (overrides the config file).
    #[arg(long)]
    pub seed: Option<u64>,

    /// Output directory for results.csv, summary.json and manifest.json.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// The named experiments the runner knows how to execute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    BerSweep,
    RspRmse,
    WordlengthSweep,
    Trajectory,
    AngleMismatch,
    ImpairmentSweep,
    LinkBudget,
    PrecisionTradeoff,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::BerSweep => "ber-sweep",
            ExperimentKind::RspRmse => "rsp-rmse",
            ExperimentKind::WordlengthSweep => "wordlength-sweep",
            ExperimentKind::Trajectory => "trajectory",
            ExperimentKind::AngleMismatch => "angle-mismatch",
            ExperimentKind::ImpairmentSweep => "impairment-sweep",
            ExperimentKind::LinkBudget => "link-budget",
            ExperimentKind::PrecisionTradeoff => "precision-tradeoff",
        }
    }
}

/// A transmit-side impairment set representative of an uncalibrated
/// analog front end: 3 dB / 10 degree IQ mismatch, 12 dB LO-to-RF
/// isolation and a 37 kHz residual carrier offset.
pub fn impaired_front_end() -> ImpairmentConfig {
    ImpairmentConfig {
        iq_gain_db: 3.0,
        iq_phase_deg: 10.0,
        lo_rf_isolation_db: Some(12.0),
        lo_power_rel_db: 0.0,
        cfo_hz: 37e3,
        lo_at_receiver: false,
    }
}

/// Bit error rate versus SNR for each fading model.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BerSweepCfg {
    /// Per-tone SNR grid in dB.
    pub snr_db: Vec<f64>,
    pub fading: Vec<FadingModel>,
    pub rician_j_db: f64,
    /// Packets simulated per (fading, SNR) point.
    pub packets_per_point: usize,
    /// Link distance used for the propagation delay and Doppler.
    pub range_m: f64,
    pub phy: PhyConfig,
}

impl Default for BerSweepCfg {
    fn default() -> Self {
        Self {
            snr_db: vec![0.0, 5.0, 10.0, 15.0],
            fading: vec![FadingModel::Friis, FadingModel::Rician],
            rician_j_db: 5.0,
            packets_per_point: 50,
            range_m: 15.0,
            phy: PhyConfig::default(),
        }
    }
}

/// Radar localization accuracy versus SNR, with and without front-end
/// impairments on the probing pulse.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RspRmseCfg {
    /// Post-beamforming, pre-matched-filter SNR grid in dB.
    pub snr_db: Vec<f64>,
    /// Monte Carlo trials per (SNR, impairment) point.
    pub trials: usize,
    pub range_m: f64,
    /// Targets are drawn uniformly in +/- this azimuth.
    pub azimuth_limit_deg: f64,
    pub rcs_sqm: f64,
    pub angle_step_deg: f64,
    pub pulse_len: usize,
    /// Impairments applied to the transmitted pulse in the impaired variant.
    pub impaired: ImpairmentConfig,
}

impl Default for RspRmseCfg {
    fn default() -> Self {
        Self {
            snr_db: vec![-5.0, -10.0],
            trials: 100,
            range_m: 15.0,
            azimuth_limit_deg: 60.0,
            rcs_sqm: 1.0,
            angle_step_deg: 1.0,
            pulse_len: 1024,
            impaired: impaired_front_end(),
        }
    }
}

/// Fixed-point wordlength sensitivity for the transmit DAC path and the
/// radar processing path.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WordlengthCfg {
    /// Transmit-path total wordlengths to test (integer bits held fixed).
    pub tx_total_bits: Vec<u32>,
    pub tx_int_bits: u32,
    /// Power-of-two backoff applied before the transmit quantizer.
    pub dac_backoff_pow2: u32,
    /// Per-tone SNR for the transmit-path BER measurement.
    pub snr_db: f64,
    pub packets_per_point: usize,
    pub phy: PhyConfig,
    /// Radar-processing total wordlengths to test.
    pub rsp_total_bits: Vec<u32>,
    pub rsp_int_bits: u32,
    /// Trials for the faded low-reflectivity agreement measurement.
    pub rician_trials: usize,
    pub rician_snr_db: f64,
    pub rician_rcs_sqm: f64,
    pub rician_j_db: f64,
    pub pulse_len: usize,
}

impl Default for WordlengthCfg {
    fn default() -> Self {
        Self {
            tx_total_bits: vec![12, 13, 14, 15, 16],
            tx_int_bits: 3,
            dac_backoff_pow2: 9,
            snr_db: 10.0,
            packets_per_point: 100,
            phy: PhyConfig::default(),
            rsp_total_bits: vec![27, 28, 29, 30],
            rsp_int_bits: 1,
            rician_trials: 100,
            rician_snr_db: -10.0,
            rician_rcs_sqm: 0.01,
            rician_j_db: 5.0,
            pulse_len: 1024,
        }
    }
}

/// Full protocol runs: sensing-assisted beam management against the
/// exhaustive-training baseline, ideal and impaired front ends.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrajectoryExpCfg {
    pub trajectories: Vec<TrajectoryConfig>,
    /// Front end used for the impaired variant of the sensing-assisted run.
    pub impaired: ImpairmentConfig,
    /// Base protocol configuration; the trajectory field is replaced per run.
    pub base: ProtocolConfig,
}

impl Default for TrajectoryExpCfg {
    fn default() -> Self {
        Self {
            trajectories: vec![TrajectoryConfig::default(), TrajectoryConfig::tangential_demo()],
            impaired: impaired_front_end(),
            base: ProtocolConfig::default(),
        }
    }
}

/// EVM and BER versus a single swept impairment, one axis at a time.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ImpairmentSweepCfg {
    /// Per-tone SNR for every point.
    pub snr_db: f64,
    pub packets_per_point: usize,
    pub iq_gain_db: Vec<f64>,
    pub iq_phase_deg: Vec<f64>,
    pub lo_isolation_db: Vec<f64>,
    pub cfo_hz: Vec<f64>,
    pub range_m: f64,
    pub phy: PhyConfig,
}

impl Default for ImpairmentSweepCfg {
    fn default() -> Self {
        Self {
            snr_db: 15.0,
            packets_per_point: 20,
            iq_gain_db: vec![0.0, 3.0, 6.0, 9.0],
            iq_phase_deg: vec![0.0, 10.0, 20.0, 30.0],
            lo_isolation_db: vec![30.0, 20.0, 12.0, 6.0],
            cfo_hz: vec![0.0, 10e3, 25e3, 50e3],
            range_m: 15.0,
            phy: PhyConfig::default(),
        }
    }
}

/// Closed-form link budget versus range.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LinkBudgetCfg {
    pub budget: LinkBudget,
    pub range_min_m: f64,
    pub range_max_m: f64,
    pub range_step_m: f64,
}

impl Default for LinkBudgetCfg {
    fn default() -> Self {
        Self { budget: LinkBudget::default(), range_min_m: 5.0, range_max_m: 50.0, range_step_m: 2.5 }
    }
}

/// Throughput versus radar angle-grid resolution.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PrecisionCfg {
    pub angle_step_deg: Vec<f64>,
    pub base: ProtocolConfig,
}

impl Default for PrecisionCfg {
    fn default() -> Self {
        Self { angle_step_deg: vec![1.0, 2.0, 4.0], base: ProtocolConfig::default() }
    }
}

/// On-disk configuration file. Every section has defaults, so an empty
/// object `{}` is a valid file; unknown keys anywhere are rejected.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FileConfig {
    pub experiment: Option<ExperimentKind>,
    pub seed: Option<u64>,
    /// Global repetition override applied to the per-point trial counts of
    /// the Monte Carlo experiments.
    pub trials: Option<usize>,
    pub out_dir: Option<PathBuf>,
    pub ber_sweep: BerSweepCfg,
    pub rsp_rmse: RspRmseCfg,
    pub wordlength_sweep: WordlengthCfg,
    pub trajectory: TrajectoryExpCfg,
    pub angle_mismatch: MismatchSweepConfig,
    pub impairment_sweep: ImpairmentSweepCfg,
    pub link_budget: LinkBudgetCfg,
    pub precision_tradeoff: PrecisionCfg,
}

/// Fully resolved run plan: flags merged over the file, seed propagated
/// into every section that carries its own.
#[derive(Debug, Clone, Serialize)]
pub struct ResolvedConfig {
    pub experiment: ExperimentKind,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub file: FileConfig,
}

pub fn resolve(args: Args) -> Result<ResolvedConfig, CliError> {
    let mut file = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliError::Config(format!("cannot read config file {}: {e}", path.display()))
            })?;
            serde_json::from_str::<FileConfig>(&text).map_err(|e| {
                CliError::Config(format!(
                    "invalid config file {} at line {}, column {}: {e}",
                    path.display(),
                    e.line(),
                    e.column()
                ))
            })?
        }
        None => FileConfig::default(),
    };

    let experiment = args
        .experiment
        .or(file.experiment)
        .ok_or_else(|| CliError::Config("no experiment selected: pass --experiment or set \"experiment\" in the config file".into()))?;
    let seed = args.seed.or(file.seed).unwrap_or(0);
    let out_dir = args
        .out
        .or_else(|| file.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("runs").join(experiment.name()));

    if let Some(trials) = file.trials {
        if trials == 0 {
            return Err(CliError::Config("trials must be at least 1".into()));
        }
        file.ber_sweep.packets_per_point = trials;
        file.rsp_rmse.trials = trials;
        file.wordlength_sweep.packets_per_point = trials;
        file.wordlength_sweep.rician_trials = trials;
        file.angle_mismatch.packets_per_point = trials;
        file.impairment_sweep.packets_per_point = trials;
    }

    // One master seed drives everything, including sections that embed
    // their own seed field.
    file.seed = Some(seed);
    file.experiment = Some(experiment);
    file.out_dir = Some(out_dir.clone());
    file.angle_mismatch.master_seed = seed;
    file.trajectory.base.master_seed = seed;
    file.precision_tradeoff.base.master_seed = seed;

    Ok(ResolvedConfig { experiment, seed, out_dir, file })
}
