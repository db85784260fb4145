//! Run-quality metrics: bit errors, error-vector magnitude, estimator
//! RMSE, and the per-run record a protocol simulation produces.

use crate::error::{Error, Result};
use crate::phy;
use num_complex::Complex64;
use serde::Serialize;

/// Fraction of mismatching bits between two equal-length sequences.
pub fn compute_ber(tx_bits: &[u8], rx_bits: &[u8]) -> Result<f64> {
    if tx_bits.is_empty() {
        return Err(Error::config("bit-error ratio needs at least one bit"));
    }
    if tx_bits.len() != rx_bits.len() {
        return Err(Error::Dimension { expected: tx_bits.len(), got: rx_bits.len() });
    }
    Ok(phy::count_bit_errors(tx_bits, rx_bits) as f64 / tx_bits.len() as f64)
}

/// Error-vector magnitude in both customary units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Evm {
    pub pct: f64,
    /// `20 log10` of the ratio; negative infinity for identical inputs.
    pub db: f64,
}

/// RMS deviation of a measured constellation from its reference, relative
/// to the reference RMS.
pub fn compute_evm(measured: &[Complex64], reference: &[Complex64]) -> Result<Evm> {
    if measured.is_empty() {
        return Err(Error::config("error-vector magnitude needs at least one symbol"));
    }
    if measured.len() != reference.len() {
        return Err(Error::Dimension { expected: reference.len(), got: measured.len() });
    }
    let ratio = phy::evm_rms(measured, reference);
    Ok(Evm { pct: 100.0 * ratio, db: 20.0 * ratio.log10() })
}

/// Root-mean-square error between estimates and ground truth.
pub fn compute_rmse(estimates: &[f64], truths: &[f64]) -> Result<f64> {
    if estimates.is_empty() {
        return Err(Error::config("RMSE needs at least one estimate"));
    }
    if estimates.len() != truths.len() {
        return Err(Error::Dimension { expected: estimates.len(), got: truths.len() });
    }
    let mean_sq = estimates
        .iter()
        .zip(truths)
        .map(|(e, t)| (e - t).powi(2))
        .sum::<f64>()
        / estimates.len() as f64;
    Ok(mean_sq.sqrt())
}

/// First upward crossing of an EVM-versus-mismatch curve through `limit`,
/// located by linear interpolation between samples. `None` when the curve
/// stays below the limit; the first abscissa when it starts above.
pub fn evm_crossing_deg(points: &[(f64, f64)], limit_pct: f64) -> Option<f64> {
    let first = points.first()?;
    if first.1 >= limit_pct {
        return Some(first.0);
    }
    for pair in points.windows(2) {
        let (x0, y0) = pair[0];
        let (x1, y1) = pair[1];
        if y0 < limit_pct && y1 >= limit_pct {
            return Some(x0 + (x1 - x0) * (limit_pct - y0) / (y1 - y0));
        }
    }
    None
}

/// What a protocol slot was spent on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    /// Echo acquisition and range-azimuth processing.
    Radar,
    /// Exhaustive sector-sweep training.
    Training,
    /// Directional downlink data.
    Data,
}

/// One event-log row per protocol slot. For data slots `snr_db` is the
/// geometric link SNR; for radar slots it is the map's peak-to-median
/// ratio; for training slots the link SNR on the freshly chosen beam.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PacketEvent {
    pub packet_idx: usize,
    pub stage: Stage,
    pub beam_deg: f64,
    pub true_azimuth_deg: f64,
    pub snr_db: f64,
    pub ber: f64,
    pub evm_pct: f64,
    /// Protocol time consumed through the end of this slot.
    pub elapsed_s: f64,
}

/// Aggregate outcome of one protocol run. The BER and EVM series cover
/// data slots only; alignment slots carry no payload.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunMetrics {
    pub ber_per_packet: Vec<f64>,
    pub evm_pct_per_packet: Vec<f64>,
    /// RMS beam-pointing error across alignment events; zero when nothing
    /// was estimated.
    pub angle_rmse_deg: f64,
    /// RMS range-estimate error across sensing events; zero for protocols
    /// that never estimate range.
    pub range_rmse_m: f64,
    /// Payload bits from codewords delivered error-free, divided by total
    /// protocol time including every alignment.
    pub throughput_bps: f64,
    pub realignment_events: usize,
    pub delivered_bits: u64,
    pub total_time_ps: u64,
    pub total_time_s: f64,
    pub events: Vec<PacketEvent>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn identical_sequences_score_perfect() {
        let bits = vec![0u8, 1, 1, 0, 1];
        assert_eq!(compute_ber(&bits, &bits).unwrap(), 0.0);
        let syms = vec![Complex64::new(1.0, 0.0); 8];
        let evm = compute_evm(&syms, &syms).unwrap();
        assert_eq!(evm.pct, 0.0);
        assert_eq!(evm.db, f64::NEG_INFINITY);
        assert_eq!(compute_rmse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
    }

    #[test]
    fn constant_offset_on_unit_symbols_reads_ten_percent() {
        let reference: Vec<Complex64> =
            (0..4).map(|k| Complex64::from_polar(1.0, k as f64 * 1.1)).collect();
        let measured: Vec<Complex64> =
            reference.iter().map(|s| s + Complex64::new(0.1, 0.0)).collect();
        let evm = compute_evm(&measured, &reference).unwrap();
        assert_relative_eq!(evm.pct, 10.0, epsilon = 1e-9);
        assert_relative_eq!(evm.db, -20.0, epsilon = 1e-9);
    }

    #[test]
    fn percent_to_decibel_conversion_matches_the_qpsk_limit() {
        let reference = vec![Complex64::new(1.0, 0.0); 4];
        let measured: Vec<Complex64> =
            reference.iter().map(|s| s + Complex64::new(0.0, 0.247)).collect();
        let evm = compute_evm(&measured, &reference).unwrap();
        assert_relative_eq!(evm.pct, 24.7, epsilon = 1e-9);
        assert_abs_diff_eq!(evm.db, -12.14, epsilon = 0.01);
    }

    #[test]
    fn rmse_matches_hand_computation() {
        let rmse = compute_rmse(&[1.0, 2.0], &[0.0, 0.0]).unwrap();
        assert_relative_eq!(rmse, 2.5f64.sqrt());
    }

    #[test]
    fn mismatched_or_empty_inputs_are_rejected() {
        assert!(compute_ber(&[], &[]).is_err());
        assert!(compute_ber(&[1], &[1, 0]).is_err());
        let one = vec![Complex64::new(1.0, 0.0)];
        assert!(compute_evm(&[], &[]).is_err());
        assert!(compute_evm(&one, &[]).is_err());
        assert!(compute_rmse(&[], &[]).is_err());
        assert!(compute_rmse(&[1.0], &[]).is_err());
    }

    #[test]
    fn crossing_interpolates_between_curve_samples() {
        let curve = [(0.0, 10.0), (5.0, 20.0), (10.0, 30.0)];
        let x = evm_crossing_deg(&curve, 24.7).unwrap();
        assert_relative_eq!(x, 5.0 + 5.0 * 4.7 / 10.0, epsilon = 1e-12);
        assert_eq!(evm_crossing_deg(&curve, 50.0), None);
        assert_eq!(evm_crossing_deg(&curve, 5.0), Some(0.0));
        assert_eq!(evm_crossing_deg(&[], 5.0), None);
    }
}
