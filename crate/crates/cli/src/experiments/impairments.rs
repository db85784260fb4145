//! EVM and BER versus one swept front-end impairment at a time, at a fixed
//! channel SNR. Every point reuses the same trial indices, so payloads and
//! noise draws are identical and differences are pure impairment.

use isac_core::channel::{ChannelConfig, TargetScene};
use isac_core::mfe::ImpairmentConfig;

use crate::config::ResolvedConfig;
use crate::output::{fmt, stat, ExperimentOutput};
use crate::CliError;

pub fn run(r: &ResolvedConfig) -> Result<ExperimentOutput, CliError> {
    let cfg = &r.file.impairment_sweep;
    if cfg.packets_per_point == 0 {
        return Err(CliError::Config("impairment_sweep.packets_per_point must be at least 1".into()));
    }

    type Builder = fn(f64) -> ImpairmentConfig;
    let axes: [(&str, &[f64], Builder); 4] = [
        ("iq_gain_db", &cfg.iq_gain_db, |v| ImpairmentConfig {
            iq_gain_db: v,
            ..ImpairmentConfig::default()
        }),
        ("iq_phase_deg", &cfg.iq_phase_deg, |v| ImpairmentConfig {
            iq_phase_deg: v,
            ..ImpairmentConfig::default()
        }),
        ("lo_isolation_db", &cfg.lo_isolation_db, |v| ImpairmentConfig {
            lo_rf_isolation_db: Some(v),
            ..ImpairmentConfig::default()
        }),
        ("cfo_hz", &cfg.cfo_hz, |v| ImpairmentConfig {
            cfo_hz: v,
            ..ImpairmentConfig::default()
        }),
    ];

    let scene =
        TargetScene { range_m: cfg.range_m, azimuth_deg: 0.0, velocity_mps: 0.0, rcs_sqm: 1.0 };
    let ch = ChannelConfig {
        snr_db: Some(cfg.snr_db),
        master_seed: r.seed,
        trial: 0,
        ..ChannelConfig::default()
    };
    let trial_ids: Vec<u64> = (0..cfg.packets_per_point as u64).collect();

    let mut out =
        ExperimentOutput::new(&["impairment", "value", "snr_db", "evm_pct", "evm_db", "ber"]);

    let measure = |out: &mut ExperimentOutput,
                       axis: &str,
                       value: f64,
                       imp: &ImpairmentConfig|
     -> Result<(), CliError> {
        let acc = super::run_point(&cfg.phy, imp, &scene, &ch, &trial_ids)?;
        out.push_row(vec![
            axis.to_string(),
            fmt(value),
            fmt(cfg.snr_db),
            fmt(acc.evm_pct()),
            fmt(acc.evm_db()),
            fmt(acc.ber()),
        ]);
        out.insert_metric(
            format!("evm_pct_{axis}_{}", fmt(value)),
            stat(&acc.per_packet_evm_pct),
        );
        out.insert_metric(format!("ber_{axis}_{}", fmt(value)), stat(&acc.per_packet_ber));
        Ok(())
    };

    measure(&mut out, "none", 0.0, &ImpairmentConfig::default())?;
    for (axis, values, build) in axes {
        for &value in values {
            measure(&mut out, axis, value, &build(value))?;
        }
    }
    Ok(out)
}
