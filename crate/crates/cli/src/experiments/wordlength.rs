//! Fixed-point wordlength sensitivity.
//!
//! Transmit path: coded BER at a fixed channel SNR while the DAC-side
//! wordlength shrinks, against a floating-point reference run on identical
//! noise and payloads. Radar path: does the quantized range-azimuth map
//! still put its peak in the same cell as the floating-point map, on a
//! noiseless scene grid and on faded low-reflectivity targets.

use rayon::prelude::*;

use isac_core::channel::{radar_echo, ArrayConfig, ChannelConfig, FadingModel, TargetScene};
use isac_core::fxp::FxpFormat;
use isac_core::mfe::ImpairmentConfig;
use isac_core::rsp::{compute_map, RspConfig};

use crate::config::ResolvedConfig;
use crate::output::{fmt, scalar, stat, ExperimentOutput};
use crate::CliError;

pub fn run(r: &ResolvedConfig) -> Result<ExperimentOutput, CliError> {
    let cfg = &r.file.wordlength_sweep;
    if cfg.tx_total_bits.is_empty() && cfg.rsp_total_bits.is_empty() {
        return Err(CliError::Config("wordlength_sweep needs at least one wordlength".into()));
    }
    if cfg.packets_per_point == 0 || cfg.rician_trials == 0 {
        return Err(CliError::Config("wordlength_sweep trial counts must be at least 1".into()));
    }

    let mut out = ExperimentOutput::new(&[
        "stage",
        "total_bits",
        "int_bits",
        "snr_db",
        "ber",
        "noiseless_agreement_pct",
        "rician_agreement_pct",
    ]);

    transmit_path(r, &mut out)?;
    radar_path(r, &mut out)?;
    Ok(out)
}

fn transmit_path(r: &ResolvedConfig, out: &mut ExperimentOutput) -> Result<(), CliError> {
    let cfg = &r.file.wordlength_sweep;
    if cfg.tx_total_bits.is_empty() {
        return Ok(());
    }
    let scene = TargetScene::default();
    let ideal = ImpairmentConfig::default();
    let ch = ChannelConfig {
        snr_db: Some(cfg.snr_db),
        master_seed: r.seed,
        trial: 0,
        ..ChannelConfig::default()
    };
    // Identical trials for the float reference and every wordlength, so BER
    // differences are pure quantization.
    let trial_ids: Vec<u64> = (0..cfg.packets_per_point as u64).collect();

    let mut float_phy = cfg.phy.clone();
    float_phy.formats.enabled = false;
    let float_acc = super::run_point(&float_phy, &ideal, &scene, &ch, &trial_ids)?;
    out.push_row(vec![
        "tx-float".into(),
        String::new(),
        String::new(),
        fmt(cfg.snr_db),
        fmt(float_acc.ber()),
        String::new(),
        String::new(),
    ]);
    out.insert_metric("ber_tx_float", stat(&float_acc.per_packet_ber));

    for &bits in &cfg.tx_total_bits {
        let mut phy = cfg.phy.clone();
        phy.formats.enabled = true;
        phy.formats.tx = FxpFormat { total_bits: bits, int_bits: cfg.tx_int_bits };
        phy.dac_backoff_pow2 = cfg.dac_backoff_pow2;
        let acc = super::run_point(&phy, &ideal, &scene, &ch, &trial_ids)?;
        out.push_row(vec![
            "tx".into(),
            bits.to_string(),
            cfg.tx_int_bits.to_string(),
            fmt(cfg.snr_db),
            fmt(acc.ber()),
            String::new(),
            String::new(),
        ]);
        out.insert_metric(format!("ber_tx_w{bits}"), stat(&acc.per_packet_ber));
    }
    Ok(())
}

/// Noiseless scenes spanning near and far ranges and both azimuth signs.
const GRID_SCENES: [(f64, f64); 6] =
    [(5.0, -40.0), (7.5, -10.0), (10.0, 0.0), (15.0, 20.0), (25.0, 45.0), (40.0, 65.0)];

fn radar_path(r: &ResolvedConfig, out: &mut ExperimentOutput) -> Result<(), CliError> {
    let cfg = &r.file.wordlength_sweep;
    if cfg.rsp_total_bits.is_empty() {
        return Ok(());
    }
    let array = ArrayConfig::default();
    let pulse = super::sensing_pulse(cfg.pulse_len)?;
    let float_cfg = RspConfig::default();
    let quantized_cfgs: Vec<(u32, RspConfig)> = cfg
        .rsp_total_bits
        .iter()
        .map(|&bits| {
            let mut c = RspConfig::default();
            c.formats.enabled = true;
            c.formats.rsp = FxpFormat { total_bits: bits, int_bits: cfg.rsp_int_bits };
            (bits, c)
        })
        .collect();

    // Noiseless grid: the peak cell must be wordlength-independent.
    let mut grid_matches = vec![0usize; quantized_cfgs.len()];
    for &(range_m, azimuth_deg) in &GRID_SCENES {
        let scene = TargetScene { range_m, azimuth_deg, velocity_mps: 0.0, rcs_sqm: 1.0 };
        let ch = ChannelConfig { snr_db: None, master_seed: r.seed, ..ChannelConfig::default() };
        let echo = radar_echo(&pulse, &scene, &array, &ch)?;
        let reference = compute_map(&echo, &pulse, &array, &float_cfg)?.argmax();
        for (slot, (_, qc)) in grid_matches.iter_mut().zip(&quantized_cfgs) {
            if compute_map(&echo, &pulse, &array, qc)?.argmax() == reference {
                *slot += 1;
            }
        }
    }

    // Faded weak targets: count how often the quantized peak still lands in
    // the floating-point cell.
    let trial_matches = (0..cfg.rician_trials as u64)
        .into_par_iter()
        .map(|t| {
            let scene = TargetScene {
                range_m: 15.0,
                azimuth_deg: 10.0,
                velocity_mps: 0.0,
                rcs_sqm: cfg.rician_rcs_sqm,
            };
            let ch = ChannelConfig {
                model: FadingModel::Rician,
                rician_j_db: cfg.rician_j_db,
                snr_db: Some(cfg.rician_snr_db),
                master_seed: r.seed,
                trial: t,
                ..ChannelConfig::default()
            };
            let echo = radar_echo(&pulse, &scene, &array, &ch)?;
            let reference = compute_map(&echo, &pulse, &array, &float_cfg)?.argmax();
            let mut agree = vec![false; quantized_cfgs.len()];
            for (slot, (_, qc)) in agree.iter_mut().zip(&quantized_cfgs) {
                *slot = compute_map(&echo, &pulse, &array, qc)?.argmax() == reference;
            }
            Ok(agree)
        })
        .collect::<Result<Vec<Vec<bool>>, CliError>>()?;

    for (w, (bits, _)) in quantized_cfgs.iter().enumerate() {
        let noiseless_pct = 100.0 * grid_matches[w] as f64 / GRID_SCENES.len() as f64;
        let rician_hits = trial_matches.iter().filter(|m| m[w]).count();
        let rician_pct = 100.0 * rician_hits as f64 / cfg.rician_trials as f64;
        out.push_row(vec![
            "rsp".into(),
            bits.to_string(),
            cfg.rsp_int_bits.to_string(),
            fmt(cfg.rician_snr_db),
            String::new(),
            fmt(noiseless_pct),
            fmt(rician_pct),
        ]);
        out.insert_metric(format!("rsp_noiseless_agreement_pct_w{bits}"), scalar(noiseless_pct));
        out.insert_metric(format!("rsp_rician_agreement_pct_w{bits}"), scalar(rician_pct));
    }
    Ok(())
}
