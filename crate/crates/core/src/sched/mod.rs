//! Protocol engine: time-multiplexes sensing-based beam alignment with
//! directional downlink data, simulates user trajectories, and accounts
//! throughput against a sector-sweep baseline.
//!
//! Two clocks run side by side. The motion clock spans the configured
//! trajectory duration and is sampled uniformly by the packet index, so a
//! run covers the intended geometry regardless of packet count. The
//! protocol clock adds up actual stage durations in integer picoseconds
//! and is the denominator of every throughput figure.

mod metrics;
mod protocol;

pub use metrics::{
    compute_ber, compute_evm, compute_rmse, evm_crossing_deg, Evm, PacketEvent, RunMetrics,
    Stage,
};
pub use protocol::{
    angle_mismatch_sweep, run_baseline_80211ad, run_isac, MismatchPoint, MismatchSweepConfig,
    ProtocolConfig,
};

use crate::error::{Error, Result};
use crate::signal::{OFDM_SAMPLE_RATE_HZ, SC_SAMPLE_RATE_HZ};
use serde::{Deserialize, Serialize};

/// Sensing pulse length in single-carrier samples: long enough to cover
/// the full unambiguous range window.
pub const RADAR_PULSE_LEN: usize = 1024;

/// Elements in the user terminal's receive array.
pub const MU_NUM_ELEMENTS: usize = 4;

/// Effective half-power width of the downlink beam against pointing error,
/// for the quadratic mainlobe loss model. Deliberately wider than the
/// receive aperture's width: the transmit sector beams are broadened so a
/// degree of pointing error costs fractions of a dB rather than falling
/// off the raw array factor's first null.
pub const DOWNLINK_PATTERN_WIDTH_DEG: f64 = 10.0;

/// Ceiling of the quadratic pointing-loss model.
pub const POINTING_LOSS_CAP_DB: f64 = 30.0;

/// Error-vector budget for QPSK downlinks; constellations worse than this
/// are treated as undecodable when locating mismatch tolerances.
pub const QPSK_EVM_LIMIT_PCT: f64 = 24.7;

/// Quadratic mainlobe attenuation for a beam pointed `delta_deg` away from
/// the target, with half-power full width `width_deg`, capped like the
/// usual sector-pattern models.
pub fn pointing_loss_db(delta_deg: f64, width_deg: f64) -> f64 {
    (12.0 * (delta_deg / width_deg).powi(2)).min(POINTING_LOSS_CAP_DB)
}

/// Exact picosecond tick count for a duration in seconds.
pub fn duration_ps(seconds: f64) -> u64 {
    (seconds * 1e12).round() as u64
}

/// Realignment rule: align when never aligned, or when the previous data
/// packet's link SNR fell below the threshold. Hysteresis-free; a fresh
/// alignment (no data packet since) never retriggers.
pub fn should_realign(aligned: bool, prev_dl_snr_db: Option<f64>, threshold_db: f64) -> bool {
    !aligned || prev_dl_snr_db.is_some_and(|snr| snr < threshold_db)
}

/// Nearest beam of an `n`-sector codebook spanning [-90, 90) degrees, with
/// sector centers offset half a step from the edge.
pub fn codebook_beam_deg(azimuth_deg: f64, n: usize) -> f64 {
    let step = 180.0 / n as f64;
    let idx = ((azimuth_deg + 90.0) / step - 0.5).round().clamp(0.0, n as f64 - 1.0);
    -90.0 + (idx + 0.5) * step
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrajectoryKind {
    /// Straight away from (or toward) the base station.
    Radial,
    /// Perpendicular to the line of sight, crossing beams.
    Tangential,
}

/// A straight-line constant-speed user path, sampled once per packet.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrajectoryConfig {
    pub kind: TrajectoryKind,
    /// Starting position; the base station sits at the origin looking +y.
    pub start_xy_m: [f64; 2],
    pub speed_mps: f64,
    /// Physical time the trajectory spans; packets sample it uniformly.
    pub motion_time_s: f64,
    pub packets: usize,
    /// Link SNR below which the next packet becomes a realignment.
    pub realign_snr_db: f64,
}

impl Default for TrajectoryConfig {
    fn default() -> Self {
        Self {
            kind: TrajectoryKind::Radial,
            start_xy_m: [0.0, 10.0],
            speed_mps: 20.0,
            motion_time_s: 0.9,
            packets: 1200,
            realign_snr_db: 15.0,
        }
    }
}

/// Position and kinematics at one packet slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionState {
    pub xy_m: [f64; 2],
    pub range_m: f64,
    pub azimuth_deg: f64,
    /// Range rate; positive means receding.
    pub radial_speed_mps: f64,
}

impl TrajectoryConfig {
    /// Beam-crossing variant used by the transverse-motion scenarios.
    pub fn tangential_demo() -> Self {
        Self {
            kind: TrajectoryKind::Tangential,
            speed_mps: 30.0,
            motion_time_s: 0.5,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.packets == 0 {
            return Err(Error::config("trajectory needs at least one packet"));
        }
        if !self.speed_mps.is_finite() || self.speed_mps.abs() > 30.0 {
            return Err(Error::out_of_range("speed must lie within +/- 30 m/s"));
        }
        if !(self.motion_time_s >= 0.0) || !self.motion_time_s.is_finite() {
            return Err(Error::config("motion time must be finite and non-negative"));
        }
        let [x, y] = self.start_xy_m;
        if !x.is_finite() || !y.is_finite() || x.hypot(y) == 0.0 {
            return Err(Error::config("start position must be finite and off the origin"));
        }
        Ok(())
    }

    fn direction(&self) -> [f64; 2] {
        let [x, y] = self.start_xy_m;
        let r = x.hypot(y);
        match self.kind {
            TrajectoryKind::Radial => [x / r, y / r],
            // Rotate the radial by -90 degrees; for a start on the +y axis
            // this moves along +x.
            TrajectoryKind::Tangential => [y / r, -x / r],
        }
    }

    /// Motion state at packet `p`; packet 0 sits at the start position.
    pub fn state(&self, packet: usize) -> MotionState {
        let t = packet as f64 * self.motion_time_s / self.packets as f64;
        let [dx, dy] = self.direction();
        let x = self.start_xy_m[0] + self.speed_mps * t * dx;
        let y = self.start_xy_m[1] + self.speed_mps * t * dy;
        let range = x.hypot(y);
        let radial = self.speed_mps * (x * dx + y * dy) / range;
        MotionState {
            xy_m: [x, y],
            range_m: range,
            azimuth_deg: x.atan2(y).to_degrees(),
            radial_speed_mps: radial,
        }
    }
}

/// Stage durations and beam counts behind the throughput accounting.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimingModel {
    pub radar_pulse_s: f64,
    /// Range-azimuth processing time on the 1-degree grid; scales with
    /// the number of scanned angles.
    pub rsp_base_s: f64,
    pub dl_packet_s: f64,
    pub brf_packet_s: f64,
    pub ul_packet_s: f64,
    /// Base-station sector count for the sweep baseline.
    pub num_bs_beams: usize,
    /// User-side beam count trained during the sweep.
    pub num_mu_beams: usize,
    pub radar_pulses_per_alignment: usize,
}

/// Preamble-plus-header duration at the OFDM rate: what a training or
/// report packet costs on air.
const SHORT_PACKET_LEN: usize = crate::phy::PREAMBLE_OFDM_LEN + crate::phy::ofdm::SYMBOL_LEN;

impl Default for TimingModel {
    fn default() -> Self {
        let dl = crate::phy::PhyConfig::default().packet_len() as f64 / OFDM_SAMPLE_RATE_HZ;
        Self {
            radar_pulse_s: RADAR_PULSE_LEN as f64 / SC_SAMPLE_RATE_HZ,
            rsp_base_s: 5e-4,
            dl_packet_s: dl,
            // The sweep trains with full-length downlink packets, one per
            // beam pair; that cost is what sensing-based alignment avoids.
            brf_packet_s: dl,
            ul_packet_s: SHORT_PACKET_LEN as f64 / OFDM_SAMPLE_RATE_HZ,
            num_bs_beams: 64,
            num_mu_beams: 8,
            radar_pulses_per_alignment: 1,
        }
    }
}

impl TimingModel {
    /// Defaults with the downlink duration matched to a packet carrying
    /// `num_data_symbols` codewords.
    pub fn for_data_symbols(num_data_symbols: usize) -> Self {
        let phy = crate::phy::PhyConfig { num_data_symbols, ..Default::default() };
        let dl = phy.packet_len() as f64 / OFDM_SAMPLE_RATE_HZ;
        Self { dl_packet_s: dl, brf_packet_s: dl, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let durations = [
            self.radar_pulse_s,
            self.rsp_base_s,
            self.dl_packet_s,
            self.brf_packet_s,
            self.ul_packet_s,
        ];
        if durations.iter().any(|d| !(d > &0.0) || !d.is_finite()) {
            return Err(Error::config("every stage duration must be positive"));
        }
        if self.num_mu_beams >= self.num_bs_beams {
            return Err(Error::config("user beam count must be below the sector count"));
        }
        if self.num_mu_beams == 0 || self.radar_pulses_per_alignment == 0 {
            return Err(Error::config("beam and pulse counts must be positive"));
        }
        Ok(())
    }

    /// Processing time for a map on the given angle grid; linear in the
    /// number of scanned angles.
    pub fn rsp_time_s(&self, angle_step_deg: f64) -> Result<f64> {
        let scanned = crate::rsp::angle_grid(angle_step_deg)?.len() as f64;
        let base = crate::rsp::angle_grid(1.0)?.len() as f64;
        Ok(self.rsp_base_s * scanned / base)
    }

    /// Sensing-based alignment: pulse transmissions, map processing, and
    /// the user's beam-lock report.
    pub fn isac_alignment_ps(&self, angle_step_deg: f64) -> Result<u64> {
        Ok(self.radar_pulses_per_alignment as u64 * duration_ps(self.radar_pulse_s)
            + duration_ps(self.rsp_time_s(angle_step_deg)?)
            + duration_ps(self.ul_packet_s))
    }

    /// Exhaustive sweep: one training packet per sector/user beam pair,
    /// then the report.
    pub fn baseline_alignment_ps(&self) -> u64 {
        (self.num_bs_beams * self.num_mu_beams) as u64 * duration_ps(self.brf_packet_s)
            + duration_ps(self.ul_packet_s)
    }

    /// Default sweep cost with 64 x 8 beam pairs is about 2.8 ms, against
    /// roughly 0.5 ms for a sensing-based alignment on the 1-degree grid.
    pub fn baseline_alignment_s(&self) -> f64 {
        self.baseline_alignment_ps() as f64 / 1e12
    }

    pub fn dl_packet_ps(&self) -> u64 {
        duration_ps(self.dl_packet_s)
    }
}
