//! One module per named experiment, plus the shared packet-level plumbing
//! they are built from.

pub mod ber;
pub mod budget;
pub mod impairments;
pub mod mismatch;
pub mod precision;
pub mod rsp;
pub mod trajectory;
pub mod wordlength;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use isac_core::channel::{comm_channel, ChannelConfig, TargetScene};
use isac_core::frame::{build_preamble, extract_radar_pulse, golay_generate, RadarPulse};
use isac_core::mfe::ImpairmentConfig;
use isac_core::phy::{
    count_bit_errors, rx_chain, tx_chain, PhyConfig, GOLAY_LOG2_LEN,
};
use isac_core::signal::{streams, trial_rng, OFDM_SAMPLE_RATE_HZ, SC_SAMPLE_RATE_HZ};

use crate::config::{ExperimentKind, ResolvedConfig};
use crate::output::ExperimentOutput;
use crate::CliError;

pub fn dispatch(resolved: &ResolvedConfig) -> Result<ExperimentOutput, CliError> {
    match resolved.experiment {
        ExperimentKind::BerSweep => ber::run(resolved),
        ExperimentKind::RspRmse => rsp::run(resolved),
        ExperimentKind::WordlengthSweep => wordlength::run(resolved),
        ExperimentKind::Trajectory => trajectory::run(resolved),
        ExperimentKind::AngleMismatch => mismatch::run(resolved),
        ExperimentKind::ImpairmentSweep => impairments::run(resolved),
        ExperimentKind::LinkBudget => budget::run(resolved),
        ExperimentKind::PrecisionTradeoff => precision::run(resolved),
    }
}

/// Outcome of one packet through transmit, impairments, channel, receive.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PacketStats {
    pub bits: usize,
    pub bit_errors: usize,
    pub err_energy: f64,
    pub ref_energy: f64,
}

impl PacketStats {
    pub fn ber(&self) -> f64 {
        if self.bits == 0 {
            0.0
        } else {
            self.bit_errors as f64 / self.bits as f64
        }
    }

    pub fn evm_pct(&self) -> f64 {
        if self.ref_energy == 0.0 {
            0.0
        } else {
            100.0 * (self.err_energy / self.ref_energy).sqrt()
        }
    }
}

/// Send one packet with a payload drawn from the trial's payload stream and
/// measure bit errors and error-vector energy against the transmit reference.
pub(crate) fn comm_packet(
    phy: &PhyConfig,
    imp: &ImpairmentConfig,
    scene: &TargetScene,
    ch: &ChannelConfig,
) -> Result<PacketStats, CliError> {
    let mut payload_rng = trial_rng(ch.master_seed, ch.trial, streams::PAYLOAD);
    let payload: Vec<u8> =
        (0..phy.payload_bits()).map(|_| payload_rng.gen_range(0..2u8)).collect();
    let mut tx = tx_chain(&payload, phy)?;
    imp.apply_tx(&mut tx.samples, OFDM_SAMPLE_RATE_HZ)?;
    let mut out = comm_channel(&tx.samples, scene, ch)?;
    imp.apply_rx(&mut out.samples)?;
    let rx = rx_chain(&out.samples, out.sync_offset, phy)?;

    let err_energy = rx
        .constellation
        .iter()
        .zip(&tx.reference_symbols)
        .map(|(m, r)| (m - r).norm_sqr())
        .sum();
    let ref_energy = tx.reference_symbols.iter().map(|r| r.norm_sqr()).sum();
    Ok(PacketStats {
        bits: payload.len(),
        bit_errors: count_bit_errors(&payload, &rx.payload_bits),
        err_energy,
        ref_energy,
    })
}

/// Aggregate of one sweep point: totals plus per-packet samples for
/// confidence intervals.
#[derive(Debug, Default)]
pub(crate) struct PointAccum {
    pub bits: usize,
    pub bit_errors: usize,
    pub err_energy: f64,
    pub ref_energy: f64,
    pub per_packet_ber: Vec<f64>,
    pub per_packet_evm_pct: Vec<f64>,
}

impl PointAccum {
    pub fn ber(&self) -> f64 {
        if self.bits == 0 {
            0.0
        } else {
            self.bit_errors as f64 / self.bits as f64
        }
    }

    pub fn evm_pct(&self) -> f64 {
        if self.ref_energy == 0.0 {
            0.0
        } else {
            100.0 * (self.err_energy / self.ref_energy).sqrt()
        }
    }

    pub fn evm_db(&self) -> f64 {
        20.0 * (self.evm_pct() / 100.0).log10()
    }
}

/// Run one sweep point: the listed trials in parallel, folded in trial order
/// so results do not depend on scheduling.
pub(crate) fn run_point(
    phy: &PhyConfig,
    imp: &ImpairmentConfig,
    scene: &TargetScene,
    ch_template: &ChannelConfig,
    trial_ids: &[u64],
) -> Result<PointAccum, CliError> {
    let stats = trial_ids
        .par_iter()
        .map(|&t| {
            let ch = ChannelConfig { trial: t, ..ch_template.clone() };
            comm_packet(phy, imp, scene, &ch)
        })
        .collect::<Result<Vec<PacketStats>, CliError>>()?;

    let mut acc = PointAccum::default();
    for s in &stats {
        acc.bits += s.bits;
        acc.bit_errors += s.bit_errors;
        acc.err_energy += s.err_energy;
        acc.ref_energy += s.ref_energy;
        acc.per_packet_ber.push(s.ber());
        acc.per_packet_evm_pct.push(s.evm_pct());
    }
    Ok(acc)
}

/// The Golay-derived sensing pulse used by the radar experiments.
pub(crate) fn sensing_pulse(len: usize) -> Result<RadarPulse, CliError> {
    let pair = golay_generate(GOLAY_LOG2_LEN)?;
    let preamble = build_preamble(&pair)?;
    Ok(extract_radar_pulse(&preamble, len)?)
}

/// The same pulse after a transmit front end, correlated against the clean
/// reference by the receiver.
pub(crate) fn impaired_pulse(
    pulse: &RadarPulse,
    imp: &ImpairmentConfig,
) -> Result<RadarPulse, CliError> {
    let mut samples: Vec<Complex64> = pulse.samples.clone();
    imp.apply_tx(&mut samples, SC_SAMPLE_RATE_HZ)?;
    Ok(RadarPulse { samples, sample_rate_hz: pulse.sample_rate_hz, pri_s: pulse.pri_s })
}
