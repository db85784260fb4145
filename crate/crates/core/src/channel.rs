//! Propagation models connecting a target scene to the transceiver.
//!
//! The sensing path produces a two-way echo of the radar pulse across the
//! receive array: radar-equation amplitude, per-element steering phase,
//! Doppler rotation, optional Rician fading, and thermal noise. The
//! communication path produces the one-way delayed, Doppler-shifted, faded
//! downlink stream. Noise levels are referenced to the unfaded signal so
//! fading degrades the link instead of being silently renormalized away.

use crate::error::{Error, Result};
use crate::frame::RadarPulse;
use crate::signal::{
    complex_gaussian, db_to_power, streams, trial_rng, DEFAULT_CARRIER_HZ,
    OFDM_SAMPLE_RATE_HZ, SPEED_OF_LIGHT_M_S,
};
use ndarray::Array2;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Gain of one array element, a halfwave-dipole-like patch.
pub const ELEMENT_GAIN_DBI: f64 = 2.02;

/// A point target (or the served user's position when the same geometry
/// carries data).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TargetScene {
    pub range_m: f64,
    pub azimuth_deg: f64,
    /// Radial velocity, positive receding.
    pub velocity_mps: f64,
    pub rcs_sqm: f64,
}

impl Default for TargetScene {
    fn default() -> Self {
        Self { range_m: 15.0, azimuth_deg: 0.0, velocity_mps: 0.0, rcs_sqm: 1.0 }
    }
}

impl TargetScene {
    pub fn validate(&self) -> Result<()> {
        if !(self.range_m > 0.0) {
            return Err(Error::out_of_range("target range must be positive"));
        }
        if !(-90.0..=90.0).contains(&self.azimuth_deg) {
            return Err(Error::out_of_range("azimuth must lie in [-90, 90] degrees"));
        }
        if !(-30.0..=30.0).contains(&self.velocity_mps) {
            return Err(Error::out_of_range("radial speed must lie in [-30, 30] m/s"));
        }
        if !(self.rcs_sqm > 0.0) {
            return Err(Error::out_of_range("radar cross-section must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FadingModel {
    /// Pure line of sight; deterministic gain.
    Friis,
    /// Line of sight plus a diffuse component with the given power ratio.
    Rician,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChannelConfig {
    pub model: FadingModel,
    /// Ratio of specular to diffuse power for the Rician model, in dB.
    pub rician_j_db: f64,
    /// Sensing: post-beamforming echo SNR before matched-filter gain.
    /// Communication: per-occupied-tone SNR. `None` disables noise.
    pub snr_db: Option<f64>,
    pub carrier_hz: f64,
    pub master_seed: u64,
    pub trial: u64,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self {
            model: FadingModel::Friis,
            rician_j_db: 5.0,
            snr_db: None,
            carrier_hz: DEFAULT_CARRIER_HZ,
            master_seed: 0,
            trial: 0,
        }
    }
}

impl ChannelConfig {
    pub fn wavelength_m(&self) -> f64 {
        SPEED_OF_LIGHT_M_S / self.carrier_hz
    }

    /// Complex small-scale gain for this trial: unit for line of sight,
    /// specular-plus-diffuse with unit mean power for Rician.
    pub fn draw_fade(&self) -> Complex64 {
        match self.model {
            FadingModel::Friis => Complex64::new(1.0, 0.0),
            FadingModel::Rician => {
                let j = db_to_power(self.rician_j_db);
                let mut rng =
                    trial_rng(self.master_seed, self.trial, streams::CLUTTER);
                let diffuse = complex_gaussian(&mut rng, 1.0);
                Complex64::new((j / (j + 1.0)).sqrt(), 0.0)
                    + diffuse * (1.0 / (j + 1.0)).sqrt()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ArrayConfig {
    pub num_elements: usize,
    pub spacing_wavelengths: f64,
}

impl Default for ArrayConfig {
    /// The base station's receive aperture; the user terminal uses
    /// `num_elements: 4`.
    fn default() -> Self {
        Self { num_elements: 32, spacing_wavelengths: 0.5 }
    }
}

impl ArrayConfig {
    /// Phase of element `q` toward `angle_deg` (broadside is zero degrees).
    pub fn element_phase(&self, q: usize, angle_deg: f64) -> f64 {
        2.0 * std::f64::consts::PI
            * self.spacing_wavelengths
            * q as f64
            * angle_deg.to_radians().sin()
    }

    /// Half-power beamwidth from the aperture rule `0.886 lambda / (N d)`.
    pub fn beamwidth_deg(&self) -> f64 {
        (0.886 / (self.num_elements as f64 * self.spacing_wavelengths)).to_degrees()
    }
}

/// Normalized array factor magnitude: 1 when the beam looks straight at the
/// target, falling off with mismatch.
pub fn array_factor(array: &ArrayConfig, look_deg: f64, steer_deg: f64) -> f64 {
    let q = array.num_elements;
    let sum: Complex64 = (0..q)
        .map(|i| {
            Complex64::from_polar(
                1.0,
                array.element_phase(i, look_deg) - array.element_phase(i, steer_deg),
            )
        })
        .sum();
    sum.norm() / q as f64
}

/// Two-way echo amplitude from the radar equation. The transmit side is
/// beamformed on the target (element gain times array size); the receive
/// side is a single element, since combining happens downstream.
pub fn echo_amplitude(scene: &TargetScene, array: &ArrayConfig, cfg: &ChannelConfig) -> f64 {
    let gt = db_to_power(ELEMENT_GAIN_DBI) * array.num_elements as f64;
    let gr = db_to_power(ELEMENT_GAIN_DBI);
    let lambda = cfg.wavelength_m();
    let four_pi = 4.0 * std::f64::consts::PI;
    (gt * gr * scene.rcs_sqm * lambda * lambda
        / (four_pi.powi(3) * scene.range_m.powi(4)))
    .sqrt()
}

/// The sample index where the round-trip echo lands.
pub fn echo_delay_bins(scene: &TargetScene, sample_rate_hz: f64) -> usize {
    (2.0 * scene.range_m * sample_rate_hz / SPEED_OF_LIGHT_M_S).round() as usize
}

/// Simulate the echo of `pulse` from `scene` across all array elements.
///
/// Returns a `(samples, elements)` matrix. Noise is white per element with
/// variance `Q * a^2 / snr`, which makes `snr_db` the post-beamforming SNR
/// seen by the angle processor before matched-filter gain.
pub fn radar_echo(
    pulse: &RadarPulse,
    scene: &TargetScene,
    array: &ArrayConfig,
    cfg: &ChannelConfig,
) -> Result<Array2<Complex64>> {
    scene.validate()?;
    let k_len = pulse.len();
    let q_len = array.num_elements;
    if k_len == 0 || q_len == 0 {
        return Err(Error::config("echo needs a pulse and at least one element"));
    }
    let delay = echo_delay_bins(scene, pulse.sample_rate_hz);
    if delay >= k_len {
        return Err(Error::out_of_range(format!(
            "target at {} m falls outside the {}-sample observation window",
            scene.range_m, k_len
        )));
    }

    let amp = echo_amplitude(scene, array, cfg);
    let gain = amp * cfg.draw_fade();
    let doppler_hz = 2.0 * scene.velocity_mps / cfg.wavelength_m();
    let ts = 1.0 / pulse.sample_rate_hz;

    let mut echo = Array2::from_elem((k_len, q_len), Complex64::new(0.0, 0.0));
    for k in delay..k_len {
        let tx = pulse.samples[k - delay];
        if tx.norm_sqr() == 0.0 {
            continue;
        }
        let rotated = gain
            * tx
            * Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * doppler_hz * k as f64 * ts);
        for q in 0..q_len {
            echo[[k, q]] =
                rotated * Complex64::from_polar(1.0, array.element_phase(q, scene.azimuth_deg));
        }
    }

    if let Some(snr_db) = cfg.snr_db {
        let var = q_len as f64 * amp * amp / db_to_power(snr_db);
        let mut rng = trial_rng(cfg.master_seed, cfg.trial, streams::NOISE_RADAR);
        for cell in echo.iter_mut() {
            *cell += complex_gaussian(&mut rng, var);
        }
    }
    Ok(echo)
}

/// One-way downlink output: the delayed, rotated stream plus the bookkeeping
/// the receiver and metrics need.
#[derive(Debug, Clone)]
pub struct CommOutput {
    pub samples: Vec<Complex64>,
    /// Index of the packet's first sample in `samples`.
    pub sync_offset: usize,
    pub fade: Complex64,
    pub doppler_hz: f64,
}

/// Propagate a transmit stream to the user: integer-sample delay at the
/// OFDM rate, one-way Doppler, small-scale fade, and white noise at the
/// configured per-tone SNR.
pub fn comm_channel(tx: &[Complex64], scene: &TargetScene, cfg: &ChannelConfig) -> Result<CommOutput> {
    scene.validate()?;
    if tx.is_empty() {
        return Err(Error::config("empty transmit stream"));
    }
    let fs = OFDM_SAMPLE_RATE_HZ;
    let delay = (scene.range_m / SPEED_OF_LIGHT_M_S * fs).round() as usize;
    let fade = cfg.draw_fade();
    let doppler_hz = scene.velocity_mps / cfg.wavelength_m();

    let mut samples = vec![Complex64::new(0.0, 0.0); delay + tx.len()];
    for (n, &x) in tx.iter().enumerate() {
        let phase = -2.0 * std::f64::consts::PI * doppler_hz * n as f64 / fs;
        samples[delay + n] = x * fade * Complex64::from_polar(1.0, phase);
    }

    if let Some(snr_db) = cfg.snr_db {
        let var = db_to_power(-snr_db);
        let mut rng = trial_rng(cfg.master_seed, cfg.trial, streams::NOISE_COMM);
        for s in samples.iter_mut() {
            *s += complex_gaussian(&mut rng, var);
        }
    }
    Ok(CommOutput { samples, sync_offset: delay, fade, doppler_hz })
}

/// Add white Gaussian noise at `snr_db` relative to the measured mean power
/// of `samples`. Returns the variance used.
pub fn add_awgn(samples: &mut [Complex64], snr_db: f64, rng: &mut impl Rng) -> Result<f64> {
    let power: f64 =
        samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / samples.len().max(1) as f64;
    if power == 0.0 {
        return Err(Error::config("cannot set an SNR for an all-zero signal"));
    }
    let var = power / db_to_power(snr_db);
    for s in samples.iter_mut() {
        *s += complex_gaussian(rng, var);
    }
    Ok(var)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::{build_preamble, extract_radar_pulse, golay_generate};
    use approx::assert_abs_diff_eq;

    fn pulse_1024() -> RadarPulse {
        let p = build_preamble(&golay_generate(7).unwrap()).unwrap();
        extract_radar_pulse(&p, 1024).unwrap()
    }

    fn scene(range: f64, az: f64, v: f64) -> TargetScene {
        TargetScene { range_m: range, azimuth_deg: az, velocity_mps: v, rcs_sqm: 1.0 }
    }

    #[test]
    fn echo_lands_in_the_expected_range_bin() {
        let cfg = ChannelConfig::default();
        let arr = ArrayConfig::default();
        let pulse = pulse_1024();
        let echo = radar_echo(&pulse, &scene(15.0, 0.0, 0.0), &arr, &cfg).unwrap();
        assert_eq!(echo.dim(), (1024, 32));

        let delay = echo_delay_bins(&scene(15.0, 0.0, 0.0), pulse.sample_rate_hz);
        assert_eq!(delay, 176);
        let amp = echo_amplitude(&scene(15.0, 0.0, 0.0), &arr, &cfg);
        assert!(amp > 0.0);
        // Broadside target: all elements identical, samples are the pulse
        // scaled by the echo amplitude.
        for k in 0..1024 {
            let expected = if k >= delay { pulse.samples[k - delay] * amp } else { Complex64::new(0.0, 0.0) };
            assert!((echo[[k, 0]] - expected).norm() < 1e-18);
            assert!((echo[[k, 17]] - expected).norm() < 1e-18);
        }
    }

    #[test]
    fn off_broadside_targets_ramp_phase_across_the_array() {
        let cfg = ChannelConfig::default();
        let arr = ArrayConfig::default();
        let echo = radar_echo(&pulse_1024(), &scene(10.0, 30.0, 0.0), &arr, &cfg).unwrap();
        let k = echo_delay_bins(&scene(10.0, 30.0, 0.0), 1.76e9);
        let ratio = echo[[k, 1]] / echo[[k, 0]];
        let expected = Complex64::from_polar(1.0, std::f64::consts::PI * 0.5);
        assert!((ratio - expected).norm() < 1e-9);
    }

    #[test]
    fn doppler_rotates_the_echo_at_twice_the_radial_rate() {
        let cfg = ChannelConfig::default();
        let arr = ArrayConfig { num_elements: 1, ..ArrayConfig::default() };
        let vel = scene(5.0, 0.0, 30.0);
        let still = scene(5.0, 0.0, 0.0);
        let moving = radar_echo(&pulse_1024(), &vel, &arr, &cfg).unwrap();
        let fixed = radar_echo(&pulse_1024(), &still, &arr, &cfg).unwrap();

        let f_m = 2.0 * 30.0 / cfg.wavelength_m();
        assert!((f_m - 5000.0).abs() / 5000.0 < 2e-3);
        let k = echo_delay_bins(&still, 1.76e9) + 3;
        let ratio = moving[[k, 0]] / fixed[[k, 0]];
        let expected =
            Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * f_m * k as f64 / 1.76e9);
        assert!((ratio - expected).norm() < 1e-9);
    }

    #[test]
    fn targets_past_the_window_are_rejected() {
        let cfg = ChannelConfig::default();
        let arr = ArrayConfig::default();
        // 1024 samples cover about 87 m of round trip.
        assert!(radar_echo(&pulse_1024(), &scene(100.0, 0.0, 0.0), &arr, &cfg).is_err());
        assert!(radar_echo(&pulse_1024(), &scene(80.0, 0.0, 0.0), &arr, &cfg).is_ok());
    }

    #[test]
    fn scene_validation_rejects_out_of_range_parameters() {
        assert!(scene(-1.0, 0.0, 0.0).validate().is_err());
        assert!(scene(10.0, 95.0, 0.0).validate().is_err());
        assert!(scene(10.0, 0.0, 40.0).validate().is_err());
        assert!(TargetScene { rcs_sqm: 0.0, ..TargetScene::default() }.validate().is_err());
        assert!(TargetScene::default().validate().is_ok());
    }

    #[test]
    fn radar_noise_follows_the_array_referred_convention() {
        let cfg = ChannelConfig { snr_db: Some(0.0), ..ChannelConfig::default() };
        let arr = ArrayConfig::default();
        let sc = scene(15.0, 0.0, 0.0);
        let echo = radar_echo(&pulse_1024(), &sc, &arr, &cfg).unwrap();
        let amp = echo_amplitude(&sc, &arr, &cfg);
        // Sample noise power over cells the echo never touches.
        let mut acc = 0.0;
        let mut count = 0usize;
        for k in 400..1024 {
            for q in 0..32 {
                acc += echo[[k, q]].norm_sqr();
                count += 1;
            }
        }
        let measured = acc / count as f64;
        let expected = 32.0 * amp * amp;
        assert!(
            (measured / expected - 1.0).abs() < 0.05,
            "noise power off by {measured} vs {expected}"
        );
    }

    #[test]
    fn rician_fades_have_unit_mean_power_and_the_right_specular_share() {
        let mut mean = Complex64::new(0.0, 0.0);
        let mut mean_sq = 0.0;
        let n = 4000;
        for t in 0..n {
            let cfg = ChannelConfig {
                model: FadingModel::Rician,
                trial: t,
                ..ChannelConfig::default()
            };
            let f = cfg.draw_fade();
            mean += f;
            mean_sq += f.norm_sqr();
        }
        mean /= n as f64;
        mean_sq /= n as f64;
        let j = db_to_power(5.0);
        assert!((mean_sq - 1.0).abs() < 0.05);
        assert!((mean.re - (j / (j + 1.0)).sqrt()).abs() < 0.03);
        assert!(mean.im.abs() < 0.03);
    }

    #[test]
    fn downlink_delay_and_doppler_match_the_geometry() {
        let cfg = ChannelConfig::default();
        let tx = vec![Complex64::new(1.0, 0.0); 256];
        let out = comm_channel(&tx, &scene(15.0, 0.0, 30.0), &cfg).unwrap();
        assert_eq!(out.sync_offset, 132);
        assert_eq!(out.samples.len(), 132 + 256);
        assert!((out.doppler_hz - 2500.0).abs() / 2500.0 < 2e-3);
        // Phase between consecutive samples advances by the Doppler step.
        let step = out.samples[134] / out.samples[133];
        let expected =
            Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * out.doppler_hz / OFDM_SAMPLE_RATE_HZ);
        assert!((step - expected).norm() < 1e-9);
    }

    #[test]
    fn downlink_is_transparent_without_noise_or_motion() {
        let cfg = ChannelConfig::default();
        let tx: Vec<Complex64> =
            (0..64).map(|i| Complex64::new(i as f64, -(i as f64))).collect();
        let out = comm_channel(&tx, &scene(3.0, 0.0, 0.0), &cfg).unwrap();
        for (n, &x) in tx.iter().enumerate() {
            assert_eq!(out.samples[out.sync_offset + n], x);
        }
    }

    #[test]
    fn awgn_injects_the_requested_snr() {
        let mut rng = trial_rng(7, 0, streams::NOISE_COMM);
        let clean = vec![Complex64::new(1.0, 0.0); 1_000_000];
        let mut noisy = clean.clone();
        let var = add_awgn(&mut noisy, 10.0, &mut rng).unwrap();
        let measured: f64 = noisy
            .iter()
            .zip(&clean)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            / clean.len() as f64;
        let err_db = 10.0 * (measured / var).log10();
        assert!(err_db.abs() < 0.1, "injected noise off by {err_db} dB");

        let mut zeros = vec![Complex64::new(0.0, 0.0); 8];
        assert!(add_awgn(&mut zeros, 10.0, &mut rng).is_err());
    }

    #[test]
    fn array_factor_peaks_when_aligned_and_decays_off_beam() {
        let arr = ArrayConfig::default();
        assert_abs_diff_eq!(array_factor(&arr, 20.0, 20.0), 1.0, epsilon = 1e-12);
        assert!(array_factor(&arr, 20.0, 0.0) < 0.1);
        // Symmetric around broadside.
        assert_abs_diff_eq!(
            array_factor(&arr, 5.0, 0.0),
            array_factor(&arr, -5.0, 0.0),
            epsilon = 1e-12
        );
    }

    #[test]
    fn beamwidths_match_the_aperture_rule() {
        let bs = ArrayConfig::default();
        let mu = ArrayConfig { num_elements: 4, ..ArrayConfig::default() };
        assert!((bs.beamwidth_deg() - 3.173).abs() < 0.01);
        assert!((mu.beamwidth_deg() - 25.382).abs() < 0.01);
        // Half power is roughly reached at half the beamwidth off center.
        let half = array_factor(&bs, bs.beamwidth_deg() / 2.0, 0.0);
        assert!((half * half - 0.5).abs() < 0.1, "half-power point at {half}");
    }

    #[test]
    fn echoes_are_reproducible_per_trial_and_differ_across_trials() {
        let arr = ArrayConfig::default();
        let sc = scene(12.0, 10.0, 5.0);
        let cfg = ChannelConfig { snr_db: Some(5.0), trial: 3, ..ChannelConfig::default() };
        let a = radar_echo(&pulse_1024(), &sc, &arr, &cfg).unwrap();
        let b = radar_echo(&pulse_1024(), &sc, &arr, &cfg).unwrap();
        assert_eq!(a, b);
        let cfg2 = ChannelConfig { trial: 4, ..cfg };
        let c = radar_echo(&pulse_1024(), &sc, &arr, &cfg2).unwrap();
        assert_ne!(a, c);
    }
}
