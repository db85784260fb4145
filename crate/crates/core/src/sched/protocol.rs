//! The two protocols under comparison and the pointing-tolerance sweep.
//!
//! Sensing-based alignment transmits a radar pulse, runs the range-azimuth
//! processor, and steers the sector beam at the estimated azimuth; the
//! sweep baseline trains every sector/user beam pair with full-length
//! packets. Both then send directional downlink data until the link SNR
//! dips below the realignment threshold.

use super::metrics::{PacketEvent, RunMetrics, Stage};
use super::{
    codebook_beam_deg, pointing_loss_db, should_realign, MotionState,
    TimingModel, TrajectoryConfig, DOWNLINK_PATTERN_WIDTH_DEG, MU_NUM_ELEMENTS,
    RADAR_PULSE_LEN,
};
use crate::channel::{
    comm_channel, radar_echo, ArrayConfig, ChannelConfig, FadingModel, TargetScene,
};
use crate::error::{Error, Result};
use crate::frame::{build_preamble, extract_radar_pulse, golay_generate, RadarPulse};
use crate::mfe::{ImpairmentConfig, LinkBudget};
use crate::phy::{
    count_bit_errors, evm_rms, rx_chain, tx_chain, PhyConfig, GOLAY_LOG2_LEN,
    INFO_BITS_PER_SYMBOL,
};
use crate::rsp::{compute_map, peak_detect, RspConfig};
use crate::signal::{streams, trial_rng, OFDM_SAMPLE_RATE_HZ, SPEED_OF_LIGHT_M_S};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Everything one protocol run needs. The communication link budget is a
/// calibrated per-tone SNR at a reference range with perfect pointing;
/// distance rolls it off at one-way free-space slope and pointing error
/// subtracts the quadratic mainlobe losses of both arrays.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProtocolConfig {
    pub trajectory: TrajectoryConfig,
    pub timing: TimingModel,
    pub phy: PhyConfig,
    pub impairments: ImpairmentConfig,
    /// Sensing link budget; also defines the maximum range beyond which a
    /// user cannot be acquired.
    pub budget: LinkBudget,
    pub fading: FadingModel,
    pub rician_j_db: f64,
    /// Angle grid of the range-azimuth processor.
    pub angle_step_deg: f64,
    /// Downlink per-tone SNR at the reference range, all gains included.
    pub snr_ref_db: f64,
    pub snr_ref_range_m: f64,
    /// Cross-section of the sensed user for echo simulation.
    pub radar_rcs_sqm: f64,
    pub master_seed: u64,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        Self {
            trajectory: TrajectoryConfig::default(),
            timing: TimingModel::default(),
            phy: PhyConfig::default(),
            impairments: ImpairmentConfig::default(),
            budget: LinkBudget::default(),
            fading: FadingModel::Friis,
            rician_j_db: 5.0,
            angle_step_deg: 1.0,
            snr_ref_db: 21.4,
            snr_ref_range_m: 15.0,
            radar_rcs_sqm: 1.0,
            master_seed: 0,
        }
    }
}

impl ProtocolConfig {
    pub fn validate(&self) -> Result<()> {
        self.trajectory.validate()?;
        self.timing.validate()?;
        self.impairments.validate()?;
        self.budget.validate()?;
        if !(self.angle_step_deg > 0.0) || self.angle_step_deg > 90.0 {
            return Err(Error::out_of_range("angle step must lie in (0, 90] degrees"));
        }
        if !(self.snr_ref_range_m > 0.0) || !(self.radar_rcs_sqm > 0.0) {
            return Err(Error::config("reference range and cross-section must be positive"));
        }
        Ok(())
    }

    /// Geometric downlink SNR for a user at `range_m` with the sector beam
    /// and the user beam pointed `delta_bs` / `delta_mu` degrees off.
    pub fn downlink_snr_db(&self, range_m: f64, delta_bs_deg: f64, delta_mu_deg: f64) -> f64 {
        let mu = ArrayConfig { num_elements: MU_NUM_ELEMENTS, ..ArrayConfig::default() };
        self.snr_ref_db - 20.0 * (range_m / self.snr_ref_range_m).log10()
            - pointing_loss_db(delta_bs_deg, DOWNLINK_PATTERN_WIDTH_DEG)
            - pointing_loss_db(delta_mu_deg, mu.beamwidth_deg())
    }

    fn carrier_hz(&self) -> f64 {
        SPEED_OF_LIGHT_M_S / self.budget.wavelength_m
    }
}

enum Alignment {
    Sensing,
    SectorSweep,
}

/// Sensing-based protocol: radar acquisition sets the sector beam, then
/// directional data until the trigger fires.
pub fn run_isac(cfg: &ProtocolConfig) -> Result<RunMetrics> {
    run_protocol(cfg, Alignment::Sensing)
}

/// Sweep-trained baseline with identical data accounting.
pub fn run_baseline_80211ad(cfg: &ProtocolConfig) -> Result<RunMetrics> {
    run_protocol(cfg, Alignment::SectorSweep)
}

fn run_protocol(cfg: &ProtocolConfig, alignment: Alignment) -> Result<RunMetrics> {
    cfg.validate()?;
    let max_range = cfg.budget.solve_max_range()?;
    let bs_array = ArrayConfig::default();
    let pulse = sensing_pulse()?;
    let rsp_cfg =
        RspConfig { angle_step_deg: cfg.angle_step_deg, formats: cfg.phy.formats.clone() };
    // Matched filtering adds the pulse energy in gain; the echo generator
    // wants the SNR before that gain.
    let mf_gain_db = 10.0 * pulse.energy().log10();
    let align_ps = match alignment {
        Alignment::Sensing => cfg.timing.isac_alignment_ps(cfg.angle_step_deg)?,
        Alignment::SectorSweep => cfg.timing.baseline_alignment_ps(),
    };
    let dl_ps = cfg.timing.dl_packet_ps();

    let mut aligned = false;
    let mut prev_dl_snr: Option<f64> = None;
    let mut bs_beam_deg = 0.0;
    let mut mu_lock_azimuth_deg = 0.0;
    let mut elapsed_ps: u64 = 0;
    let mut delivered_bits: u64 = 0;
    let mut realignments = 0usize;
    let mut angle_est = Vec::new();
    let mut angle_truth = Vec::new();
    let mut range_est = Vec::new();
    let mut range_truth = Vec::new();
    let mut ber_series = Vec::new();
    let mut evm_series = Vec::new();
    let mut events = Vec::with_capacity(cfg.trajectory.packets);

    for p in 0..cfg.trajectory.packets {
        let m = cfg.trajectory.state(p);
        if should_realign(aligned, prev_dl_snr, cfg.trajectory.realign_snr_db) {
            if m.range_m > max_range {
                return Err(Error::Infeasible(format!(
                    "user at {:.1} m exceeds the {:.1} m acquisition range",
                    m.range_m, max_range
                )));
            }
            let (stage, snr_db) = match alignment {
                Alignment::Sensing => {
                    let (est_azimuth, est_range, peak_snr) =
                        sense_user(cfg, &pulse, &bs_array, &rsp_cfg, &m, mf_gain_db, p)?;
                    bs_beam_deg = est_azimuth;
                    angle_est.push(est_azimuth);
                    angle_truth.push(m.azimuth_deg);
                    range_est.push(est_range);
                    range_truth.push(m.range_m);
                    (Stage::Radar, peak_snr)
                }
                Alignment::SectorSweep => {
                    bs_beam_deg = codebook_beam_deg(m.azimuth_deg, cfg.timing.num_bs_beams);
                    angle_est.push(bs_beam_deg);
                    angle_truth.push(m.azimuth_deg);
                    let snr = cfg.downlink_snr_db(
                        m.range_m,
                        (m.azimuth_deg - bs_beam_deg).abs(),
                        0.0,
                    );
                    (Stage::Training, snr)
                }
            };
            // The user terminal locks its own beam on the training signal;
            // its pointing error then grows with the geometry change.
            mu_lock_azimuth_deg = m.azimuth_deg;
            aligned = true;
            prev_dl_snr = None;
            realignments += 1;
            elapsed_ps += align_ps;
            events.push(PacketEvent {
                packet_idx: p,
                stage,
                beam_deg: bs_beam_deg,
                true_azimuth_deg: m.azimuth_deg,
                snr_db,
                ber: 0.0,
                evm_pct: 0.0,
                elapsed_s: elapsed_ps as f64 / 1e12,
            });
        } else {
            let delta_bs = (m.azimuth_deg - bs_beam_deg).abs();
            let delta_mu = (m.azimuth_deg - mu_lock_azimuth_deg).abs();
            let snr_db = cfg.downlink_snr_db(m.range_m, delta_bs, delta_mu);
            let outcome = send_data_packet(cfg, &m, snr_db, p)?;
            delivered_bits += outcome.delivered_bits;
            ber_series.push(outcome.ber);
            evm_series.push(outcome.evm_pct);
            prev_dl_snr = Some(snr_db);
            elapsed_ps += dl_ps;
            events.push(PacketEvent {
                packet_idx: p,
                stage: Stage::Data,
                beam_deg: bs_beam_deg,
                true_azimuth_deg: m.azimuth_deg,
                snr_db,
                ber: outcome.ber,
                evm_pct: outcome.evm_pct,
                elapsed_s: elapsed_ps as f64 / 1e12,
            });
        }
    }

    let total_time_s = elapsed_ps as f64 / 1e12;
    Ok(RunMetrics {
        angle_rmse_deg: rmse_or_zero(&angle_est, &angle_truth),
        range_rmse_m: rmse_or_zero(&range_est, &range_truth),
        throughput_bps: delivered_bits as f64 / total_time_s,
        realignment_events: realignments,
        delivered_bits,
        total_time_ps: elapsed_ps,
        total_time_s,
        ber_per_packet: ber_series,
        evm_pct_per_packet: evm_series,
        events,
    })
}

fn sensing_pulse() -> Result<RadarPulse> {
    let pair = golay_generate(GOLAY_LOG2_LEN)?;
    let preamble = build_preamble(&pair)?;
    extract_radar_pulse(&preamble, RADAR_PULSE_LEN)
}

/// One radar acquisition: simulate the echo at the budget-implied SNR,
/// run the processor, and read the peak.
fn sense_user(
    cfg: &ProtocolConfig,
    pulse: &RadarPulse,
    array: &ArrayConfig,
    rsp_cfg: &RspConfig,
    m: &MotionState,
    mf_gain_db: f64,
    packet: usize,
) -> Result<(f64, f64, f64)> {
    let scene = TargetScene {
        range_m: m.range_m,
        azimuth_deg: m.azimuth_deg,
        velocity_mps: m.radial_speed_mps,
        rcs_sqm: cfg.radar_rcs_sqm,
    };
    let ch = ChannelConfig {
        model: cfg.fading,
        rician_j_db: cfg.rician_j_db,
        snr_db: Some(cfg.budget.received_snr_db(m.range_m) - mf_gain_db),
        carrier_hz: cfg.carrier_hz(),
        master_seed: cfg.master_seed,
        trial: packet as u64,
    };
    let echo = radar_echo(pulse, &scene, array, &ch)?;
    let map = compute_map(&echo, pulse, array, rsp_cfg)?;
    let det = peak_detect(&map, 0.0);
    let est = det
        .estimate
        .ok_or_else(|| Error::Infeasible("sensing produced an empty map".into()))?;
    Ok((est.azimuth_deg, est.range_m, det.peak_snr_db))
}

struct PacketOutcome {
    delivered_bits: u64,
    ber: f64,
    evm_pct: f64,
}

/// One downlink data packet through the impaired transmitter, the fading
/// channel at the geometric SNR, and the receive chain; goodput counts
/// only codewords that survive intact.
fn send_data_packet(
    cfg: &ProtocolConfig,
    m: &MotionState,
    snr_db: f64,
    packet: usize,
) -> Result<PacketOutcome> {
    if cfg.phy.num_data_symbols == 0 {
        // Alignment-only accounting: the slot is spent but carries nothing.
        return Ok(PacketOutcome { delivered_bits: 0, ber: 0.0, evm_pct: 0.0 });
    }
    let mut payload_rng = trial_rng(cfg.master_seed, packet as u64, streams::PAYLOAD);
    let payload: Vec<u8> =
        (0..cfg.phy.payload_bits()).map(|_| payload_rng.gen_range(0..2u8)).collect();
    let mut tx = tx_chain(&payload, &cfg.phy)?;
    cfg.impairments.apply_tx(&mut tx.samples, OFDM_SAMPLE_RATE_HZ)?;
    let scene = TargetScene {
        range_m: m.range_m,
        azimuth_deg: m.azimuth_deg,
        velocity_mps: m.radial_speed_mps,
        rcs_sqm: cfg.radar_rcs_sqm,
    };
    let ch = ChannelConfig {
        model: cfg.fading,
        rician_j_db: cfg.rician_j_db,
        snr_db: Some(snr_db),
        carrier_hz: cfg.carrier_hz(),
        master_seed: cfg.master_seed,
        trial: packet as u64,
    };
    let mut out = comm_channel(&tx.samples, &scene, &ch)?;
    cfg.impairments.apply_rx(&mut out.samples)?;
    let rx = rx_chain(&out.samples, out.sync_offset, &cfg.phy)?;

    let mut delivered = 0u64;
    for (sent, got) in payload
        .chunks(INFO_BITS_PER_SYMBOL)
        .zip(rx.payload_bits.chunks(INFO_BITS_PER_SYMBOL))
    {
        if sent == got {
            delivered += sent.len() as u64;
        }
    }
    let ber = if payload.is_empty() {
        0.0
    } else {
        count_bit_errors(&payload, &rx.payload_bits) as f64 / payload.len() as f64
    };
    let evm_pct = if tx.reference_symbols.is_empty() {
        0.0
    } else {
        100.0 * evm_rms(&rx.constellation, &tx.reference_symbols)
    };
    Ok(PacketOutcome { delivered_bits: delivered, ber, evm_pct })
}

fn rmse_or_zero(estimates: &[f64], truths: &[f64]) -> f64 {
    if estimates.is_empty() {
        0.0
    } else {
        super::metrics::compute_rmse(estimates, truths).expect("lengths match by construction")
    }
}

/// Grid sweep of downlink quality against deliberate beam-pointing error.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MismatchSweepConfig {
    /// Pointing errors to probe, within [0, 20] degrees.
    pub mismatch_deg: Vec<f64>,
    /// Per-element downlink SNR at the user antenna; combining across the
    /// user array adds its gain on top.
    pub snr_db: Vec<f64>,
    pub packets_per_point: usize,
    pub phy: PhyConfig,
    pub impairments: ImpairmentConfig,
    pub range_m: f64,
    pub master_seed: u64,
}

impl Default for MismatchSweepConfig {
    fn default() -> Self {
        Self {
            mismatch_deg: (0..=20).map(f64::from).collect(),
            snr_db: vec![10.0, 20.0],
            packets_per_point: 12,
            phy: PhyConfig::default(),
            impairments: ImpairmentConfig::default(),
            range_m: 5.0,
            master_seed: 0,
        }
    }
}

/// One cell of the mismatch grid, aggregated over its packets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MismatchPoint {
    pub mismatch_deg: f64,
    pub snr_db: f64,
    pub evm_pct: f64,
    pub evm_db: f64,
    pub ber: f64,
}

/// Measure EVM and BER with the sector beam held `mismatch` degrees off
/// the true azimuth, per probed SNR. Rows come back mismatch-major in the
/// order configured.
pub fn angle_mismatch_sweep(cfg: &MismatchSweepConfig) -> Result<Vec<MismatchPoint>> {
    cfg.impairments.validate()?;
    if cfg.mismatch_deg.is_empty() || cfg.snr_db.is_empty() {
        return Err(Error::config("sweep needs at least one mismatch and one SNR"));
    }
    if cfg.mismatch_deg.iter().any(|d| !(0.0..=20.0).contains(d)) {
        return Err(Error::out_of_range("pointing error must lie in [0, 20] degrees"));
    }
    if cfg.packets_per_point == 0 || cfg.phy.num_data_symbols == 0 {
        return Err(Error::config("sweep needs packets and data symbols"));
    }
    if !(cfg.range_m > 0.0) {
        return Err(Error::config("probe range must be positive"));
    }
    let combining_gain_db = 10.0 * (MU_NUM_ELEMENTS as f64).log10();
    let points: Vec<(usize, f64, f64)> = cfg
        .mismatch_deg
        .iter()
        .flat_map(|&d| cfg.snr_db.iter().map(move |&s| (d, s)))
        .enumerate()
        .map(|(i, (d, s))| (i, d, s))
        .collect();
    points
        .par_iter()
        .map(|&(idx, mismatch, snr)| {
            let eff_snr = snr + combining_gain_db
                - pointing_loss_db(mismatch, DOWNLINK_PATTERN_WIDTH_DEG);
            let mut err_energy = 0.0;
            let mut ref_energy = 0.0;
            let mut bit_errors = 0usize;
            let mut bits = 0usize;
            for t in 0..cfg.packets_per_point {
                let trial = (idx * cfg.packets_per_point + t) as u64;
                let mut payload_rng = trial_rng(cfg.master_seed, trial, streams::PAYLOAD);
                let payload: Vec<u8> = (0..cfg.phy.payload_bits())
                    .map(|_| payload_rng.gen_range(0..2u8))
                    .collect();
                let mut tx = tx_chain(&payload, &cfg.phy)?;
                cfg.impairments.apply_tx(&mut tx.samples, OFDM_SAMPLE_RATE_HZ)?;
                let scene = TargetScene { range_m: cfg.range_m, ..TargetScene::default() };
                let ch = ChannelConfig {
                    snr_db: Some(eff_snr),
                    master_seed: cfg.master_seed,
                    trial,
                    ..ChannelConfig::default()
                };
                let mut out = comm_channel(&tx.samples, &scene, &ch)?;
                cfg.impairments.apply_rx(&mut out.samples)?;
                let rx = rx_chain(&out.samples, out.sync_offset, &cfg.phy)?;
                for (c, r) in rx.constellation.iter().zip(&tx.reference_symbols) {
                    err_energy += (c - r).norm_sqr();
                    ref_energy += r.norm_sqr();
                }
                bit_errors += count_bit_errors(&payload, &rx.payload_bits);
                bits += payload.len();
            }
            let ratio = (err_energy / ref_energy).sqrt();
            Ok(MismatchPoint {
                mismatch_deg: mismatch,
                snr_db: snr,
                evm_pct: 100.0 * ratio,
                evm_db: 20.0 * ratio.log10(),
                ber: bit_errors as f64 / bits as f64,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_config(kind: super::super::TrajectoryKind, packets: usize) -> ProtocolConfig {
        let trajectory = match kind {
            super::super::TrajectoryKind::Radial => {
                TrajectoryConfig { packets, ..TrajectoryConfig::default() }
            }
            super::super::TrajectoryKind::Tangential => {
                TrajectoryConfig { packets, ..TrajectoryConfig::tangential_demo() }
            }
        };
        ProtocolConfig {
            trajectory,
            phy: PhyConfig { num_data_symbols: 2, ..PhyConfig::default() },
            timing: TimingModel::for_data_symbols(2),
            master_seed: 11,
            ..ProtocolConfig::default()
        }
    }

    #[test]
    fn radial_run_aligns_once_and_accounts_time_exactly() {
        let cfg = tiny_config(super::super::TrajectoryKind::Radial, 6);
        let run = run_isac(&cfg).unwrap();
        assert_eq!(run.realignment_events, 1);
        assert_eq!(run.events.len(), 6);
        assert_eq!(run.events[0].stage, Stage::Radar);
        assert!(run.events[1..].iter().all(|e| e.stage == Stage::Data));
        // Beam points at the user, so data flows error-free.
        assert!(run.ber_per_packet.iter().all(|&b| b == 0.0));
        assert_eq!(run.delivered_bits, 5 * 2 * INFO_BITS_PER_SYMBOL as u64);
        // Exact conservation: one alignment plus five data slots.
        let expected = cfg.timing.isac_alignment_ps(cfg.angle_step_deg).unwrap()
            + 5 * cfg.timing.dl_packet_ps();
        assert_eq!(run.total_time_ps, expected);
        assert!((run.throughput_bps
            - run.delivered_bits as f64 / (expected as f64 / 1e12))
            .abs()
            < 1e-6);
        // The radar estimate lands on the true geometry.
        assert!(run.angle_rmse_deg <= 0.5 + 1e-9);
        let bin = crate::signal::range_bin_m(crate::signal::SC_SAMPLE_RATE_HZ);
        assert!(run.range_rmse_m <= bin + 1e-9);
    }

    #[test]
    fn identical_seeds_reproduce_the_run_bit_for_bit() {
        let cfg = tiny_config(super::super::TrajectoryKind::Radial, 5);
        let a = run_isac(&cfg).unwrap();
        let b = run_isac(&cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn crossing_user_forces_repeated_realignment() {
        // A dozen packets spanning the full half-second crossing: each step
        // swings the azimuth several degrees, so the beam keeps expiring.
        let cfg = tiny_config(super::super::TrajectoryKind::Tangential, 12);
        let run = run_isac(&cfg).unwrap();
        assert!(
            run.realignment_events >= 2,
            "expected repeated alignment, got {}",
            run.realignment_events
        );
        assert!(run.realignment_events < cfg.trajectory.packets);
    }

    #[test]
    fn sweep_baseline_moves_the_same_bits_more_slowly() {
        let cfg = tiny_config(super::super::TrajectoryKind::Radial, 8);
        let isac = run_isac(&cfg).unwrap();
        let base = run_baseline_80211ad(&cfg).unwrap();
        assert_eq!(isac.delivered_bits, base.delivered_bits);
        assert!(base.total_time_ps > isac.total_time_ps);
        assert!(isac.throughput_bps > base.throughput_bps);
        assert_eq!(base.events[0].stage, Stage::Training);
        // The sweep never estimates range.
        assert_eq!(base.range_rmse_m, 0.0);
        assert!(base.angle_rmse_deg <= 0.5 * 180.0 / 64.0 + 1e-9);
    }

    #[test]
    fn empty_payload_moves_no_bits_without_failing() {
        let mut cfg = tiny_config(super::super::TrajectoryKind::Radial, 3);
        cfg.phy.num_data_symbols = 0;
        let run = run_isac(&cfg).unwrap();
        assert_eq!(run.delivered_bits, 0);
        assert_eq!(run.throughput_bps, 0.0);
        assert!(run.ber_per_packet.iter().all(|&b| b == 0.0));
    }

    #[test]
    fn unreachable_user_aborts_with_a_diagnostic() {
        let mut cfg = tiny_config(super::super::TrajectoryKind::Radial, 2);
        cfg.trajectory.start_xy_m = [0.0, 50.0];
        match run_isac(&cfg) {
            Err(Error::Infeasible(msg)) => assert!(msg.contains("acquisition range")),
            other => panic!("expected an infeasibility abort, got {other:?}"),
        }
    }

    #[test]
    fn pointing_error_degrades_the_sweep_monotonically_enough() {
        let cfg = MismatchSweepConfig {
            mismatch_deg: vec![0.0, 12.0],
            snr_db: vec![20.0],
            packets_per_point: 2,
            phy: PhyConfig { num_data_symbols: 2, ..PhyConfig::default() },
            ..MismatchSweepConfig::default()
        };
        let points = angle_mismatch_sweep(&cfg).unwrap();
        assert_eq!(points.len(), 2);
        assert_eq!(points[0].mismatch_deg, 0.0);
        assert!(points[1].evm_pct > points[0].evm_pct);
        assert!(points[0].evm_pct > 0.0);
        // Same seed, same grid: byte-identical aggregates.
        let again = angle_mismatch_sweep(&cfg).unwrap();
        assert_eq!(points, again);
        let bad = MismatchSweepConfig { mismatch_deg: vec![25.0], ..cfg };
        assert!(angle_mismatch_sweep(&bad).is_err());
    }
}
