//! Coded bit error rate and EVM versus per-tone SNR for each fading model.
//!
//! Trial indices are shared across fading models, so the Friis and faded
//! variants of a point see identical payloads and noise draws and differ
//! only in the small-scale fade.

use isac_core::channel::{ChannelConfig, FadingModel, TargetScene};
use isac_core::mfe::ImpairmentConfig;

use crate::config::ResolvedConfig;
use crate::output::{fmt, stat, ExperimentOutput};
use crate::CliError;

pub(crate) fn fading_label(model: FadingModel) -> &'static str {
    match model {
        FadingModel::Friis => "friis",
        FadingModel::Rician => "rician",
    }
}

pub fn run(r: &ResolvedConfig) -> Result<ExperimentOutput, CliError> {
    let cfg = &r.file.ber_sweep;
    if cfg.snr_db.is_empty() || cfg.fading.is_empty() {
        return Err(CliError::Config("ber_sweep needs at least one SNR and one fading model".into()));
    }
    if cfg.packets_per_point == 0 {
        return Err(CliError::Config("ber_sweep.packets_per_point must be at least 1".into()));
    }

    let mut out = ExperimentOutput::new(&[
        "fading",
        "snr_db",
        "packets",
        "bits",
        "bit_errors",
        "ber",
        "evm_pct",
    ]);
    let scene =
        TargetScene { range_m: cfg.range_m, azimuth_deg: 0.0, velocity_mps: 0.0, rcs_sqm: 1.0 };
    let ideal = ImpairmentConfig::default();

    for &model in &cfg.fading {
        for (si, &snr) in cfg.snr_db.iter().enumerate() {
            let trial_ids: Vec<u64> = (0..cfg.packets_per_point)
                .map(|t| (si * cfg.packets_per_point + t) as u64)
                .collect();
            let ch = ChannelConfig {
                model,
                rician_j_db: cfg.rician_j_db,
                snr_db: Some(snr),
                master_seed: r.seed,
                trial: 0,
                ..ChannelConfig::default()
            };
            let acc = super::run_point(&cfg.phy, &ideal, &scene, &ch, &trial_ids)?;

            let label = fading_label(model);
            out.push_row(vec![
                label.to_string(),
                fmt(snr),
                cfg.packets_per_point.to_string(),
                acc.bits.to_string(),
                acc.bit_errors.to_string(),
                fmt(acc.ber()),
                fmt(acc.evm_pct()),
            ]);
            out.insert_metric(format!("ber_{label}_snr{}", fmt(snr)), stat(&acc.per_packet_ber));
            out.insert_metric(
                format!("evm_pct_{label}_snr{}", fmt(snr)),
                stat(&acc.per_packet_evm_pct),
            );
        }
    }
    Ok(out)
}
