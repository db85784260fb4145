//! Least-squares channel estimation from a known training symbol and
//! per-tone MMSE equalization with soft-output scaling.

use crate::error::{Error, Result};
use crate::phy::grid::{
    bin_index, data_subcarriers, pilot_subcarriers, ResourceGrid, NUM_BINS,
};
use num_complex::Complex64;

/// Smallest noise variance the estimator will report. Keeps MMSE weights and
/// soft-bit scales finite on noiseless test vectors.
pub const NOISE_VAR_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct ChannelEstimate {
    /// Per-bin frequency response; zero on bins the training symbol left
    /// empty.
    pub h_hat: Vec<Complex64>,
    pub noise_var: f64,
    /// Occupied training tones skipped because their reference value was
    /// zero.
    pub excluded_tones: usize,
}

/// Per-tone least squares against a known symbol, plus a pilot-based noise
/// variance estimate.
///
/// The noise estimate interpolates each interior pilot from its neighbours
/// and measures the residual; for white noise the residual variance is 1.5x
/// the per-tone estimation error, hence the divisor.
pub fn ls_estimate(rx: &ResourceGrid, known: &ResourceGrid) -> Result<ChannelEstimate> {
    if rx.bins.len() != NUM_BINS || known.bins.len() != NUM_BINS {
        return Err(Error::Dimension { expected: NUM_BINS, got: rx.bins.len() });
    }
    let mut h_hat = vec![Complex64::new(0.0, 0.0); NUM_BINS];
    let mut excluded = 0usize;
    for &k in data_subcarriers().iter().chain(pilot_subcarriers()) {
        let b = bin_index(k);
        if known.bins[b].norm_sqr() == 0.0 {
            excluded += 1;
            continue;
        }
        h_hat[b] = rx.bins[b] / known.bins[b];
    }

    let pilot_h: Vec<Complex64> =
        pilot_subcarriers().iter().map(|&k| h_hat[bin_index(k)]).collect();
    let mut acc = 0.0;
    let interior = pilot_h.len() - 2;
    for j in 1..=interior {
        let r = pilot_h[j] - 0.5 * (pilot_h[j - 1] + pilot_h[j + 1]);
        acc += r.norm_sqr();
    }
    let noise_var = (acc / interior as f64 / 1.5).max(NOISE_VAR_FLOOR);

    Ok(ChannelEstimate { h_hat, noise_var, excluded_tones: excluded })
}

/// MMSE symbol estimates over the data tones, paired with the matching
/// soft-demapper scale `2*sqrt(2)*(|h|^2 + var) / var` per tone.
pub fn mmse_equalize(
    rx: &ResourceGrid,
    est: &ChannelEstimate,
) -> (Vec<Complex64>, Vec<f64>) {
    let var = est.noise_var.max(NOISE_VAR_FLOOR);
    let mut symbols = Vec::with_capacity(data_subcarriers().len());
    let mut scales = Vec::with_capacity(data_subcarriers().len());
    for &k in data_subcarriers() {
        let b = bin_index(k);
        let h = est.h_hat[b];
        let denom = h.norm_sqr() + var;
        symbols.push(h.conj() * rx.bins[b] / denom);
        scales.push(2.0 * std::f64::consts::SQRT_2 * denom / var);
    }
    (symbols, scales)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phy::grid::header_grid;
    use crate::signal::{complex_gaussian, trial_rng};

    fn apply_channel(known: &ResourceGrid, h: Complex64) -> ResourceGrid {
        let mut rx = known.clone();
        for b in rx.bins.iter_mut() {
            *b *= h;
        }
        rx
    }

    #[test]
    fn noiseless_flat_channel_is_recovered_exactly() {
        let h = Complex64::new(0.3, -0.8);
        let est = ls_estimate(&apply_channel(header_grid(), h), header_grid()).unwrap();
        for &k in data_subcarriers() {
            assert!((est.h_hat[bin_index(k)] - h).norm() < 1e-12);
        }
        assert_eq!(est.excluded_tones, 0);
        assert_eq!(est.noise_var, NOISE_VAR_FLOOR);
    }

    #[test]
    fn half_gain_channel_at_matched_noise_passes_symbols_through() {
        // With h = 0.5 and noise variance 0.25 the MMSE weight is exactly 1,
        // so the equalizer output equals the received tone.
        let rx = apply_channel(header_grid(), Complex64::new(0.5, 0.0));
        let est = ChannelEstimate {
            h_hat: vec![Complex64::new(0.5, 0.0); NUM_BINS],
            noise_var: 0.25,
            excluded_tones: 0,
        };
        let (symbols, scales) = mmse_equalize(&rx, &est);
        for (s, &k) in symbols.iter().zip(data_subcarriers()) {
            assert!((s - rx.bins[bin_index(k)]).norm() < 1e-12);
        }
        let expected_scale = 2.0 * std::f64::consts::SQRT_2 * 2.0;
        for &g in &scales {
            assert!((g - expected_scale).abs() < 1e-12);
        }
    }

    #[test]
    fn noise_variance_estimate_tracks_injected_noise() {
        let var = 0.01;
        let mut total = 0.0;
        let trials = 100;
        for t in 0..trials {
            let mut rng = trial_rng(99, t, 7);
            let mut rx = header_grid().clone();
            for &k in data_subcarriers().iter().chain(pilot_subcarriers()) {
                rx.bins[bin_index(k)] += complex_gaussian(&mut rng, var);
            }
            total += ls_estimate(&rx, header_grid()).unwrap().noise_var;
        }
        let mean = total / trials as f64;
        assert!(
            (mean - var).abs() < 0.2 * var,
            "estimated {mean:.5}, injected {var:.5}"
        );
    }

    #[test]
    fn zero_reference_tones_are_excluded_not_divided() {
        let mut known = header_grid().clone();
        let dead = bin_index(data_subcarriers()[5]);
        known.bins[dead] = Complex64::new(0.0, 0.0);
        let rx = known.clone();
        let est = ls_estimate(&rx, &known).unwrap();
        assert_eq!(est.excluded_tones, 1);
        assert_eq!(est.h_hat[dead], Complex64::new(0.0, 0.0));
    }
}
