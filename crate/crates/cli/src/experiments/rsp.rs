//! Radar localization accuracy: angle and range RMSE over Monte Carlo
//! target draws, with an ideal and an impaired probing pulse.
//!
//! The matched filter always correlates against the clean reference; the
//! impaired variant distorts only what the front end actually radiates.
//! Trials share scene and noise draws across SNR and impairment variants,
//! so every comparison is paired.

use rand::Rng;
use rayon::prelude::*;

use isac_core::channel::{radar_echo, ArrayConfig, ChannelConfig, TargetScene};
use isac_core::mfe::ImpairmentConfig;
use isac_core::rsp::{compute_map, peak_detect, RspConfig};
use isac_core::signal::{streams, trial_rng};

use crate::config::ResolvedConfig;
use crate::output::{fmt, scalar, ExperimentOutput};
use crate::CliError;

fn rmse(errors: &[f64]) -> f64 {
    (errors.iter().map(|e| e * e).sum::<f64>() / errors.len() as f64).sqrt()
}

pub fn run(r: &ResolvedConfig) -> Result<ExperimentOutput, CliError> {
    let cfg = &r.file.rsp_rmse;
    if cfg.snr_db.is_empty() {
        return Err(CliError::Config("rsp_rmse needs at least one SNR".into()));
    }
    if cfg.trials == 0 {
        return Err(CliError::Config("rsp_rmse.trials must be at least 1".into()));
    }
    if !(cfg.azimuth_limit_deg > 0.0 && cfg.azimuth_limit_deg <= 90.0) {
        return Err(CliError::Config("rsp_rmse.azimuth_limit_deg must lie in (0, 90]".into()));
    }

    let array = ArrayConfig::default();
    let rsp_cfg = RspConfig { angle_step_deg: cfg.angle_step_deg, ..RspConfig::default() };
    let clean = super::sensing_pulse(cfg.pulse_len)?;
    let variants: [(&str, ImpairmentConfig); 2] = [
        ("ideal", ImpairmentConfig::default()),
        ("impaired", cfg.impaired.clone()),
    ];

    let mut out =
        ExperimentOutput::new(&["snr_db", "impairment", "angle_rmse_deg", "range_rmse_m"]);

    for &snr in &cfg.snr_db {
        for (label, imp) in &variants {
            let probe = super::impaired_pulse(&clean, imp)?;
            let errors = (0..cfg.trials as u64)
                .into_par_iter()
                .map(|t| {
                    let mut rng = trial_rng(r.seed, t, streams::SCENE);
                    let azimuth =
                        rng.gen_range(-cfg.azimuth_limit_deg..=cfg.azimuth_limit_deg);
                    let scene = TargetScene {
                        range_m: cfg.range_m,
                        azimuth_deg: azimuth,
                        velocity_mps: 0.0,
                        rcs_sqm: cfg.rcs_sqm,
                    };
                    let ch = ChannelConfig {
                        snr_db: Some(snr),
                        master_seed: r.seed,
                        trial: t,
                        ..ChannelConfig::default()
                    };
                    let echo = radar_echo(&probe, &scene, &array, &ch)?;
                    let map = compute_map(&echo, &clean, &array, &rsp_cfg)?;
                    let det = peak_detect(&map, 0.0);
                    let est = det.estimate.ok_or_else(|| {
                        CliError::Runtime("localization produced an empty map".into())
                    })?;
                    Ok((est.azimuth_deg - azimuth, est.range_m - cfg.range_m))
                })
                .collect::<Result<Vec<(f64, f64)>, CliError>>()?;

            let angle_errs: Vec<f64> = errors.iter().map(|e| e.0).collect();
            let range_errs: Vec<f64> = errors.iter().map(|e| e.1).collect();
            let angle_rmse = rmse(&angle_errs);
            let range_rmse = rmse(&range_errs);

            out.push_row(vec![
                fmt(snr),
                label.to_string(),
                fmt(angle_rmse),
                fmt(range_rmse),
            ]);
            out.insert_metric(
                format!("angle_rmse_deg_{label}_snr{}", fmt(snr)),
                scalar(angle_rmse),
            );
            out.insert_metric(
                format!("range_rmse_m_{label}_snr{}", fmt(snr)),
                scalar(range_rmse),
            );
        }
    }
    Ok(out)
}
