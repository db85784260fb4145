//! Single-carrier frame building blocks: binary complementary sequence
//! pairs, the 4992-sample synchronization preamble built from them, and the
//! guarded radar pulse the sensing path reuses.
//!
//! The preamble layout is head (32) + 15 repetitions of a 192-sample unit +
//! a 2080-sample tail, at the 1.76 GHz single-carrier rate. Every sample has
//! unit magnitude.

use crate::error::{Error, Result};
use crate::phy::ofdm::OfdmSymbol;
use crate::signal::{resample_rational, ComplexFrame, OFDM_SAMPLE_RATE_HZ, SC_SAMPLE_RATE_HZ};
use num_complex::Complex64;

pub const PREAMBLE_LEN: usize = 4992;
pub const HEAD_LEN: usize = 32;
pub const UNIT_LEN: usize = 192;
pub const UNIT_REPS: usize = 15;
pub const TAIL_LEN: usize = 2080;

/// A complementary pair of +/-1 sequences: the sum of their aperiodic
/// autocorrelations is an impulse of height twice the length.
#[derive(Debug, Clone, PartialEq)]
pub struct GolayPair {
    pub seq_a: Vec<f64>,
    pub seq_b: Vec<f64>,
}

impl GolayPair {
    pub fn len(&self) -> usize {
        self.seq_a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seq_a.is_empty()
    }
}

/// Generate the complementary pair of length `2^log2_len` by recursive
/// doubling: `a' = [a, b]`, `b' = [a, -b]`, starting from `[+1]`.
///
/// `log2_len` must lie in `1..=12`.
pub fn golay_generate(log2_len: u32) -> Result<GolayPair> {
    if !(1..=12).contains(&log2_len) {
        return Err(Error::config(format!(
            "log2_len must be in 1..=12, got {log2_len}"
        )));
    }
    let mut a = vec![1.0];
    let mut b = vec![1.0];
    for _ in 0..log2_len {
        let next_a: Vec<f64> = a.iter().chain(b.iter()).copied().collect();
        let next_b: Vec<f64> = a.iter().copied().chain(b.iter().map(|x| -x)).collect();
        a = next_a;
        b = next_b;
    }
    Ok(GolayPair { seq_a: a, seq_b: b })
}

/// The transmitted synchronization preamble, kept at the single-carrier rate
/// together with the pair that generated it.
#[derive(Debug, Clone, PartialEq)]
pub struct PreambleP {
    pub samples: Vec<Complex64>,
    pub sample_rate_hz: f64,
    pub pair: GolayPair,
}

impl PreambleP {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// The preamble resampled to the OFDM rate for concatenation with the
    /// header and data symbols (ratio 3/2, bandlimited).
    pub fn at_ofdm_rate(&self) -> Vec<Complex64> {
        resample_rational(&self.samples, 3, 2)
    }
}

fn cycle_fill(pattern: &[f64], len: usize) -> Vec<Complex64> {
    (0..len)
        .map(|k| Complex64::new(pattern[k % pattern.len()], 0.0))
        .collect()
}

/// Build the preamble from a complementary pair.
///
/// The head is the start of `a`, each repetition unit cycles through
/// `[a, b]`, and the tail alternates `[a, -b]` before closing with the start
/// of `a` again. Pairs longer than 128 cannot tile the repetition unit and
/// are rejected.
pub fn build_preamble(pair: &GolayPair) -> Result<PreambleP> {
    let len = pair.len();
    if len < 2 || len > 128 || !len.is_power_of_two() {
        return Err(Error::config(format!(
            "preamble needs a power-of-two pair length in 2..=128, got {len}"
        )));
    }
    let ab: Vec<f64> = pair.seq_a.iter().chain(pair.seq_b.iter()).copied().collect();
    let a_neg_b: Vec<f64> =
        pair.seq_a.iter().copied().chain(pair.seq_b.iter().map(|x| -x)).collect();

    let mut samples = Vec::with_capacity(PREAMBLE_LEN);
    samples.extend(cycle_fill(&pair.seq_a, HEAD_LEN));
    let unit = cycle_fill(&ab, UNIT_LEN);
    for _ in 0..UNIT_REPS {
        samples.extend_from_slice(&unit);
    }
    samples.extend(cycle_fill(&a_neg_b, TAIL_LEN - HEAD_LEN));
    samples.extend(cycle_fill(&pair.seq_a, HEAD_LEN));
    debug_assert_eq!(samples.len(), PREAMBLE_LEN);

    Ok(PreambleP { samples, sample_rate_hz: SC_SAMPLE_RATE_HZ, pair: pair.clone() })
}

/// The sensing waveform: a complementary pair with a guard gap, zero-padded
/// to the observation length.
#[derive(Debug, Clone, PartialEq)]
pub struct RadarPulse {
    pub samples: Vec<Complex64>,
    pub sample_rate_hz: f64,
    /// Pulse repetition interval; defaults to the observation length.
    pub pri_s: f64,
}

impl RadarPulse {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Energy of the nonzero support.
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|s| s.norm_sqr()).sum()
    }
}

/// Extract the radar pulse from a preamble.
///
/// The two halves of the pair's `a` sequence are themselves complementary
/// (a consequence of the doubling construction), so the pulse lays them out
/// with a half-length guard gap: `[a_lo | zeros | a_hi | zeros...]`. The
/// guard keeps the two autocorrelations from overlapping, which is what
/// gives the matched filter its sidelobe-free window. Truncating to a
/// smaller power-of-two `k` yields a prefix of the same layout.
pub fn extract_radar_pulse(preamble: &PreambleP, k: usize) -> Result<RadarPulse> {
    if !k.is_power_of_two() || k > PREAMBLE_LEN {
        return Err(Error::config(format!(
            "pulse length must be a power of two at most {PREAMBLE_LEN}, got {k}"
        )));
    }
    let half = preamble.pair.len() / 2;
    let mut canonical = Vec::with_capacity(3 * half);
    canonical.extend(preamble.pair.seq_a[..half].iter().map(|&x| Complex64::new(x, 0.0)));
    canonical.extend(std::iter::repeat(Complex64::new(0.0, 0.0)).take(half));
    canonical.extend(preamble.pair.seq_a[half..].iter().map(|&x| Complex64::new(x, 0.0)));

    let mut samples = vec![Complex64::new(0.0, 0.0); k];
    let copy = k.min(canonical.len());
    samples[..copy].copy_from_slice(&canonical[..copy]);

    Ok(RadarPulse {
        samples,
        sample_rate_hz: preamble.sample_rate_hz,
        pri_s: k as f64 / preamble.sample_rate_hz,
    })
}

/// One assembled downlink packet: preamble, known header symbol, data
/// symbols, and the information bits they carry.
#[derive(Debug, Clone)]
pub struct Packet80211ad {
    pub preamble: PreambleP,
    pub header: OfdmSymbol,
    pub data: Vec<OfdmSymbol>,
    pub payload_bits: Vec<u8>,
}

impl Packet80211ad {
    /// Concatenate preamble (resampled to the OFDM rate), header, and data
    /// symbols into one baseband frame.
    pub fn assemble(&self) -> ComplexFrame {
        let mut samples = self.preamble.at_ofdm_rate();
        samples.extend_from_slice(&self.header.time_samples);
        for sym in &self.data {
            samples.extend_from_slice(&sym.time_samples);
        }
        ComplexFrame::new(samples, OFDM_SAMPLE_RATE_HZ)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// Brute-force aperiodic autocorrelation at one lag.
    fn autocorr(seq: &[f64], lag: usize) -> f64 {
        (0..seq.len() - lag).map(|k| seq[k] * seq[k + lag]).sum()
    }

    #[test]
    fn doubling_base_case() {
        let pair = golay_generate(1).unwrap();
        assert_eq!(pair.seq_a, vec![1.0, 1.0]);
        assert_eq!(pair.seq_b, vec![1.0, -1.0]);
    }

    #[test]
    fn complementary_property_holds_at_every_length() {
        // Oracle: exhaustive O(K^2) autocorrelation for every generator size.
        for log2_len in 1..=12 {
            let pair = golay_generate(log2_len).unwrap();
            let k = pair.len();
            assert_eq!(k, 1 << log2_len);
            assert!(pair.seq_a.iter().all(|&x| x == 1.0 || x == -1.0));
            assert!(pair.seq_b.iter().all(|&x| x == 1.0 || x == -1.0));
            assert_eq!(autocorr(&pair.seq_a, 0) + autocorr(&pair.seq_b, 0), 2.0 * k as f64);
            for lag in 1..k {
                assert_eq!(
                    autocorr(&pair.seq_a, lag) + autocorr(&pair.seq_b, lag),
                    0.0,
                    "nonzero complementary sum at length {k} lag {lag}"
                );
            }
        }
    }

    #[test]
    fn generator_rejects_out_of_range_sizes() {
        assert!(golay_generate(0).is_err());
        assert!(golay_generate(13).is_err());
    }

    #[test]
    fn preamble_has_documented_layout() {
        let pair = golay_generate(7).unwrap();
        let p = build_preamble(&pair).unwrap();
        assert_eq!(p.len(), PREAMBLE_LEN);
        assert_eq!(HEAD_LEN + UNIT_REPS * UNIT_LEN + TAIL_LEN, PREAMBLE_LEN);
        assert_eq!(p.sample_rate_hz, SC_SAMPLE_RATE_HZ);

        // Head is the start of a.
        for k in 0..HEAD_LEN {
            assert_eq!(p.samples[k].re, pair.seq_a[k]);
        }
        // First unit is a followed by the start of b.
        for k in 0..128 {
            assert_eq!(p.samples[HEAD_LEN + k].re, pair.seq_a[k]);
        }
        for k in 0..64 {
            assert_eq!(p.samples[HEAD_LEN + 128 + k].re, pair.seq_b[k]);
        }
        // Units repeat exactly.
        assert_eq!(p.samples[HEAD_LEN..HEAD_LEN + UNIT_LEN], p.samples[HEAD_LEN + UNIT_LEN..HEAD_LEN + 2 * UNIT_LEN]);
        // Unit magnitude everywhere, so average energy per sample is one.
        assert!(p.samples.iter().all(|s| s.norm() == 1.0));
    }

    #[test]
    fn preamble_is_deterministic() {
        let pair = golay_generate(7).unwrap();
        assert_eq!(build_preamble(&pair).unwrap(), build_preamble(&pair).unwrap());
    }

    #[test]
    fn preamble_accepts_short_pairs_and_rejects_long_ones() {
        assert!(build_preamble(&golay_generate(6).unwrap()).is_ok());
        assert!(build_preamble(&golay_generate(8).unwrap()).is_err());
    }

    #[test]
    fn pulse_layout_interleaves_pair_halves_with_guards() {
        let pair = golay_generate(7).unwrap();
        let p = build_preamble(&pair).unwrap();
        let pulse = extract_radar_pulse(&p, 1024).unwrap();
        assert_eq!(pulse.len(), 1024);
        // First half of a, then a guard, then the second half of a; both
        // halves appear verbatim at the start of the preamble's unit region.
        for k in 0..64 {
            assert_eq!(pulse.samples[k], p.samples[HEAD_LEN + k]);
            assert_eq!(pulse.samples[64 + k].norm(), 0.0);
            assert_eq!(pulse.samples[128 + k], p.samples[HEAD_LEN + 64 + k]);
        }
        for k in 192..1024 {
            assert_eq!(pulse.samples[k].norm(), 0.0);
        }
        assert_eq!(pulse.energy(), 128.0);
        assert_abs_diff_eq!(pulse.pri_s, 1024.0 / 1.76e9, epsilon = 1e-18);
    }

    #[test]
    fn shorter_extracts_are_prefixes() {
        let p = build_preamble(&golay_generate(7).unwrap()).unwrap();
        let long = extract_radar_pulse(&p, 1024).unwrap();
        for k in [64usize, 128, 256] {
            let short = extract_radar_pulse(&p, k).unwrap();
            assert_eq!(short.samples[..], long.samples[..k]);
        }
    }

    #[test]
    fn pulse_rejects_bad_lengths() {
        let p = build_preamble(&golay_generate(7).unwrap()).unwrap();
        assert!(extract_radar_pulse(&p, 0).is_err());
        assert!(extract_radar_pulse(&p, 1000).is_err());
        assert!(extract_radar_pulse(&p, 8192).is_err());
        assert!(extract_radar_pulse(&p, 4096).is_ok());
    }

    #[test]
    fn matched_filter_has_zero_sidelobes_inside_the_guard_window() {
        // Circular autocorrelation of the guarded pulse: impulse at lag 0,
        // exact zeros at every lag the guard protects.
        let p = build_preamble(&golay_generate(7).unwrap()).unwrap();
        let pulse = extract_radar_pulse(&p, 1024).unwrap();
        let n = pulse.len();
        let corr = |lag: usize| -> f64 {
            (0..n)
                .map(|k| (pulse.samples[k] * pulse.samples[(k + lag) % n].conj()).re)
                .sum()
        };
        assert_eq!(corr(0), 128.0);
        for lag in 1..=63 {
            assert_abs_diff_eq!(corr(lag), 0.0, epsilon = 1e-9);
            assert_abs_diff_eq!(corr(n - lag), 0.0, epsilon = 1e-9);
        }
    }
}
