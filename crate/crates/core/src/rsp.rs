//! Radar signal processing: digital beamforming across the receive array,
//! frequency-domain matched filtering against the transmitted pulse, and
//! peak search over the resulting range-azimuth map.
//!
//! Each element's observation is transformed once; per look angle the
//! spectra are combined with conjugate steering weights, multiplied by the
//! conjugate reference spectrum, and inverse transformed. That equals a
//! circular correlation of the beamformed signal with the pulse, evaluated
//! with two FFTs per angle instead of a quadratic sum.

use crate::channel::ArrayConfig;
use crate::error::{Error, Result};
use crate::frame::RadarPulse;
use crate::fxp::StageFormats;
use crate::signal::{fft_unitary, ifft_unitary, range_bin_m};
use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};

/// Fixed power-of-two attenuation of the reference spectrum. The pulse
/// spectrum has a direct-current bin near 4, which the narrow fixed-point
/// map format cannot hold; scaling by an exact power of two keeps every
/// reference bin inside one integer bit without introducing a
/// data-dependent normalizer, and the float path applies the same scale so
/// the two paths compute the same map.
pub const REF_SPECTRUM_SCALE: f64 = 0.125;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RspConfig {
    /// Azimuth grid spacing in degrees over [-90, 90].
    pub angle_step_deg: f64,
    /// Word lengths; only the map path format is used here.
    pub formats: StageFormats,
}

impl Default for RspConfig {
    fn default() -> Self {
        Self { angle_step_deg: 1.0, formats: StageFormats::default() }
    }
}

/// Look angles for a grid step: `floor(180/step) + 1` angles from -90 up.
pub fn angle_grid(step_deg: f64) -> Result<Vec<f64>> {
    if !(step_deg > 0.0) || step_deg > 90.0 {
        return Err(Error::config(format!(
            "angle step must lie in (0, 90] degrees, got {step_deg}"
        )));
    }
    let count = (180.0 / step_deg).floor() as usize + 1;
    Ok((0..count).map(|i| -90.0 + i as f64 * step_deg).collect())
}

/// Magnitude map over range bins (rows) and look angles (columns).
#[derive(Debug, Clone, PartialEq)]
pub struct RangeAzimuthMap {
    pub map: Array2<f64>,
    pub angles_deg: Vec<f64>,
    pub range_bin_m: f64,
    pub saturations: u64,
}

impl RangeAzimuthMap {
    pub fn num_range_bins(&self) -> usize {
        self.map.nrows()
    }

    pub fn num_angles(&self) -> usize {
        self.map.ncols()
    }

    /// Indices of the largest cell, rows scanned first on ties.
    pub fn argmax(&self) -> (usize, usize) {
        let mut best = (0usize, 0usize);
        let mut best_val = f64::NEG_INFINITY;
        for i in 0..self.num_angles() {
            for k in 0..self.num_range_bins() {
                let v = self.map[[k, i]];
                if v > best_val {
                    best_val = v;
                    best = (k, i);
                }
            }
        }
        best
    }
}

/// Compute the range-azimuth map of an echo observation.
///
/// `echo` is `(samples, elements)`; the reference pulse must span the same
/// observation length. When fixed-point emulation is enabled the datapath
/// quantizes at each stage boundary: input samples, transformed spectra,
/// beamformed spectra, the reference (once), the matched-filter product,
/// the inverse transform, and the magnitudes.
pub fn compute_map(
    echo: &Array2<Complex64>,
    reference: &RadarPulse,
    array: &ArrayConfig,
    cfg: &RspConfig,
) -> Result<RangeAzimuthMap> {
    let (k_len, q_len) = echo.dim();
    if k_len == 0 || q_len == 0 {
        return Err(Error::config("empty echo observation"));
    }
    if reference.len() != k_len {
        return Err(Error::Dimension { expected: k_len, got: reference.len() });
    }
    if q_len != array.num_elements {
        return Err(Error::Dimension { expected: array.num_elements, got: q_len });
    }
    let angles = angle_grid(cfg.angle_step_deg)?;

    let mut front = cfg.formats.rsp_quantizer();
    // Per-element spectra, quantized at the input and transform boundaries.
    let spectra: Vec<Vec<Complex64>> = (0..q_len)
        .map(|q| {
            let mut col: Vec<Complex64> = echo.column(q).to_vec();
            if let Some(quant) = front.as_mut() {
                quant.quantize_slice(&mut col);
            }
            let mut spec = fft_unitary(&col);
            if let Some(quant) = front.as_mut() {
                quant.quantize_slice(&mut spec);
            }
            spec
        })
        .collect();

    let mut ref_spec = fft_unitary(&reference.samples);
    for s in ref_spec.iter_mut() {
        *s *= REF_SPECTRUM_SCALE;
    }
    if let Some(quant) = front.as_mut() {
        quant.quantize_slice(&mut ref_spec);
    }

    let columns: Vec<(Vec<f64>, u64)> = angles
        .par_iter()
        .map(|&angle| {
            let mut quant = cfg.formats.rsp_quantizer();
            let weights: Vec<Complex64> = (0..q_len)
                .map(|q| {
                    Complex64::from_polar(1.0 / q_len as f64, -array.element_phase(q, angle))
                })
                .collect();
            let mut beam = vec![Complex64::new(0.0, 0.0); k_len];
            for (spec, w) in spectra.iter().zip(&weights) {
                for (b, s) in beam.iter_mut().zip(spec) {
                    *b += w * s;
                }
            }
            if let Some(q) = quant.as_mut() {
                q.quantize_slice(&mut beam);
            }
            for (b, r) in beam.iter_mut().zip(&ref_spec) {
                *b *= r.conj();
            }
            if let Some(q) = quant.as_mut() {
                q.quantize_slice(&mut beam);
            }
            let mut out = ifft_unitary(&beam);
            if let Some(q) = quant.as_mut() {
                q.quantize_slice(&mut out);
            }
            let mags: Vec<f64> = match quant.as_mut() {
                Some(q) => out.iter().map(|c| q.quantize(c.norm())).collect(),
                None => out.iter().map(|c| c.norm()).collect(),
            };
            (mags, quant.map(|q| q.saturation_count()).unwrap_or(0))
        })
        .collect();

    let mut map = Array2::zeros((k_len, angles.len()));
    let mut saturations = front.map(|q| q.saturation_count()).unwrap_or(0);
    for (i, (col, sats)) in columns.into_iter().enumerate() {
        saturations += sats;
        for k in 0..k_len {
            map[[k, i]] = col[k];
        }
    }

    Ok(RangeAzimuthMap {
        map,
        angles_deg: angles,
        range_bin_m: range_bin_m(reference.sample_rate_hz),
        saturations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetEstimate {
    pub range_m: f64,
    pub azimuth_deg: f64,
    pub range_bin: usize,
    pub angle_index: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    pub detected: bool,
    /// Peak power over median cell power, in dB.
    pub peak_snr_db: f64,
    pub estimate: Option<TargetEstimate>,
}

/// Cell power of the upper median of the map magnitudes.
fn median_magnitude(map: &RangeAzimuthMap) -> f64 {
    let mut cells: Vec<f64> = map.map.iter().copied().collect();
    let mid = cells.len() / 2;
    cells.select_nth_unstable_by(mid, |a, b| a.partial_cmp(b).unwrap());
    cells[mid]
}

/// Declare a detection when the peak stands far enough above the median
/// cell, and read the target coordinates straight off the peak indices.
pub fn peak_detect(map: &RangeAzimuthMap, threshold_db: f64) -> Detection {
    let (k, i) = map.argmax();
    let peak = map.map[[k, i]];
    let median = median_magnitude(map);
    let peak_snr_db = if peak == 0.0 {
        0.0
    } else if median == 0.0 {
        300.0
    } else {
        20.0 * (peak / median).log10()
    };
    let detected = peak > 0.0 && peak_snr_db >= threshold_db;
    let estimate = detected.then(|| TargetEstimate {
        range_m: k as f64 * map.range_bin_m,
        azimuth_deg: map.angles_deg[i],
        range_bin: k,
        angle_index: i,
    });
    Detection { detected, peak_snr_db, estimate }
}

/// What the sensing window most likely contained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FrameKind {
    /// A reflection of our own pulse: one sharp matched-filter peak.
    TargetEcho,
    /// Anything without pulse structure, such as an uplink transmission.
    Uplink,
}

/// Sidelobe margin (dB) the peak must clear for the window to count as an
/// echo of the transmitted pulse.
pub const DISCRIMINATION_MARGIN_DB: f64 = 10.0;
/// Range cells around the peak ignored when measuring sidelobes; covers the
/// pulse support.
pub const DISCRIMINATION_GUARD_BINS: usize = 192;

/// Classify the observation by peak-to-sidelobe ratio along the peak's
/// angle column. Matched pulses concentrate energy in one cell; uplink
/// waveforms spread it, leaving the ratio small.
pub fn discriminate(map: &RangeAzimuthMap) -> FrameKind {
    let (k, i) = map.argmax();
    let peak = map.map[[k, i]];
    if peak == 0.0 {
        return FrameKind::Uplink;
    }
    let mut sidelobe = 0.0f64;
    for bin in 0..map.num_range_bins() {
        if bin.abs_diff(k) <= DISCRIMINATION_GUARD_BINS {
            continue;
        }
        sidelobe = sidelobe.max(map.map[[bin, i]]);
    }
    if sidelobe == 0.0 {
        return FrameKind::TargetEcho;
    }
    if 20.0 * (peak / sidelobe).log10() >= DISCRIMINATION_MARGIN_DB {
        FrameKind::TargetEcho
    } else {
        FrameKind::Uplink
    }
}

/// Serialize a map: a 16-byte little-endian header (range bins u32, angle
/// count u32, angle step f32, range bin f32) followed by row-major f32
/// magnitudes.
pub fn write_map<W: Write>(map: &RangeAzimuthMap, mut out: W) -> Result<()> {
    let step = if map.angles_deg.len() > 1 {
        map.angles_deg[1] - map.angles_deg[0]
    } else {
        0.0
    };
    out.write_all(&(map.num_range_bins() as u32).to_le_bytes())?;
    out.write_all(&(map.num_angles() as u32).to_le_bytes())?;
    out.write_all(&(step as f32).to_le_bytes())?;
    out.write_all(&(map.range_bin_m as f32).to_le_bytes())?;
    for k in 0..map.num_range_bins() {
        for i in 0..map.num_angles() {
            out.write_all(&(map.map[[k, i]] as f32).to_le_bytes())?;
        }
    }
    Ok(())
}

/// Parse a map produced by [`write_map`].
pub fn read_map<R: Read>(mut input: R) -> Result<RangeAzimuthMap> {
    let mut word = [0u8; 4];
    input.read_exact(&mut word)?;
    let k_len = u32::from_le_bytes(word) as usize;
    input.read_exact(&mut word)?;
    let i_len = u32::from_le_bytes(word) as usize;
    input.read_exact(&mut word)?;
    let step = f32::from_le_bytes(word) as f64;
    input.read_exact(&mut word)?;
    let bin = f32::from_le_bytes(word) as f64;
    let mut map = Array2::zeros((k_len, i_len));
    for k in 0..k_len {
        for i in 0..i_len {
            input.read_exact(&mut word)?;
            map[[k, i]] = f32::from_le_bytes(word) as f64;
        }
    }
    let angles = (0..i_len).map(|i| -90.0 + i as f64 * step).collect();
    Ok(RangeAzimuthMap { map, angles_deg: angles, range_bin_m: bin, saturations: 0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{radar_echo, ChannelConfig, TargetScene};
    use crate::frame::{build_preamble, extract_radar_pulse, golay_generate};
    use crate::signal::trial_rng;
    use rand::Rng;

    fn pulse(len: usize) -> RadarPulse {
        let p = build_preamble(&golay_generate(7).unwrap()).unwrap();
        extract_radar_pulse(&p, len).unwrap()
    }

    /// Time-domain oracle: beamform, then correlate by direct summation.
    fn brute_force_map(
        echo: &Array2<Complex64>,
        reference: &RadarPulse,
        array: &ArrayConfig,
        step_deg: f64,
    ) -> Array2<f64> {
        let (k_len, q_len) = echo.dim();
        let angles = angle_grid(step_deg).unwrap();
        let mut out = Array2::zeros((k_len, angles.len()));
        for (i, &angle) in angles.iter().enumerate() {
            let beam: Vec<Complex64> = (0..k_len)
                .map(|k| {
                    (0..q_len)
                        .map(|q| {
                            echo[[k, q]]
                                * Complex64::from_polar(
                                    1.0 / q_len as f64,
                                    -array.element_phase(q, angle),
                                )
                        })
                        .sum()
                })
                .collect();
            for lag in 0..k_len {
                let corr: Complex64 = (0..k_len)
                    .map(|m| beam[(m + lag) % k_len] * reference.samples[m].conj())
                    .sum();
                // The transform pipeline carries 1/sqrt(K) and the fixed
                // reference attenuation.
                out[[lag, i]] =
                    corr.norm() * REF_SPECTRUM_SCALE / (k_len as f64).sqrt();
            }
        }
        out
    }

    fn random_echo(k_len: usize, q_len: usize, seed: u64) -> Array2<Complex64> {
        let mut rng = trial_rng(seed, 0, 0);
        Array2::from_shape_fn((k_len, q_len), |_| {
            Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        })
    }

    #[test]
    fn transform_pipeline_matches_direct_correlation() {
        let array = ArrayConfig { num_elements: 4, ..ArrayConfig::default() };
        let cfg = RspConfig { angle_step_deg: 30.0, ..RspConfig::default() };
        for &k_len in &[64usize, 256, 1024] {
            let reference = pulse(k_len);
            let echo = random_echo(k_len, 4, k_len as u64);
            let fast = compute_map(&echo, &reference, &array, &cfg).unwrap();
            let slow = brute_force_map(&echo, &reference, &array, 30.0);
            let scale = slow.iter().cloned().fold(0.0, f64::max);
            for (a, b) in fast.map.iter().zip(slow.iter()) {
                assert!(
                    (a - b).abs() <= 1e-6 * scale,
                    "mismatch at K={k_len}: {a} vs {b}"
                );
            }
        }
    }

    #[test]
    fn physical_echo_peaks_at_the_target_cell() {
        let array = ArrayConfig::default();
        let cfg = RspConfig::default();
        let reference = pulse(1024);
        let scene = TargetScene { range_m: 15.0, ..TargetScene::default() };
        let echo =
            radar_echo(&reference, &scene, &array, &ChannelConfig::default()).unwrap();
        let map = compute_map(&echo, &reference, &array, &cfg).unwrap();
        assert_eq!(map.num_angles(), 181);
        let (k, i) = map.argmax();
        assert_eq!(k, 176);
        assert_eq!(map.angles_deg[i], 0.0);

        let det = peak_detect(&map, 15.0);
        assert!(det.detected);
        let est = det.estimate.unwrap();
        assert!((est.range_m - 15.0).abs() < map.range_bin_m);
        assert_eq!(est.azimuth_deg, 0.0);
    }

    #[test]
    fn map_scales_linearly_so_argmax_is_scale_invariant() {
        let array = ArrayConfig { num_elements: 4, ..ArrayConfig::default() };
        let cfg = RspConfig { angle_step_deg: 15.0, ..RspConfig::default() };
        let reference = pulse(256);
        let echo = random_echo(256, 4, 9);
        let base = compute_map(&echo, &reference, &array, &cfg).unwrap();
        let scaled_echo = echo.mapv(|c| c * 1e-6);
        let scaled = compute_map(&scaled_echo, &reference, &array, &cfg).unwrap();
        assert_eq!(base.argmax(), scaled.argmax());
        for (a, b) in base.map.iter().zip(scaled.map.iter()) {
            assert!((a * 1e-6 - b).abs() <= 1e-12 * a.max(1e-30));
        }
        // Peak-over-median is unchanged by an overall gain.
        let d1 = peak_detect(&base, f64::NEG_INFINITY);
        let d2 = peak_detect(&scaled, f64::NEG_INFINITY);
        assert!((d1.peak_snr_db - d2.peak_snr_db).abs() < 1e-6);
    }

    #[test]
    fn zero_observation_gives_a_zero_map_and_no_detection() {
        let array = ArrayConfig { num_elements: 2, ..ArrayConfig::default() };
        let cfg = RspConfig { angle_step_deg: 45.0, ..RspConfig::default() };
        let echo = Array2::from_elem((64, 2), Complex64::new(0.0, 0.0));
        let map = compute_map(&echo, &pulse(64), &array, &cfg).unwrap();
        assert!(map.map.iter().all(|&m| m == 0.0));
        let det = peak_detect(&map, 15.0);
        assert!(!det.detected);
        assert_eq!(det.peak_snr_db, 0.0);
        assert!(det.estimate.is_none());
        assert_eq!(discriminate(&map), FrameKind::Uplink);
    }

    #[test]
    fn narrow_word_map_agrees_with_float_on_a_clean_echo() {
        let array = ArrayConfig::default();
        let reference = pulse(1024);
        let scene = TargetScene { range_m: 12.0, azimuth_deg: -20.0, ..TargetScene::default() };
        let echo =
            radar_echo(&reference, &scene, &array, &ChannelConfig::default()).unwrap();
        let float_cfg = RspConfig::default();
        let mut fxp_cfg = RspConfig::default();
        fxp_cfg.formats.enabled = true;
        let float_map = compute_map(&echo, &reference, &array, &float_cfg).unwrap();
        let fxp_map = compute_map(&echo, &reference, &array, &fxp_cfg).unwrap();
        assert_eq!(float_map.argmax(), fxp_map.argmax());
        assert_eq!(fxp_map.saturations, 0);
    }

    #[test]
    fn pulse_echoes_discriminate_from_unstructured_signals() {
        let array = ArrayConfig::default();
        let reference = pulse(1024);
        let scene = TargetScene { range_m: 10.0, ..TargetScene::default() };
        let echo =
            radar_echo(&reference, &scene, &array, &ChannelConfig::default()).unwrap();
        let cfg = RspConfig::default();
        let map = compute_map(&echo, &reference, &array, &cfg).unwrap();
        assert_eq!(discriminate(&map), FrameKind::TargetEcho);

        // An unmatched waveform spreads across range bins.
        let noise = random_echo(1024, 32, 3).mapv(|c| c * 1e-7);
        let noise_map = compute_map(&noise, &reference, &array, &cfg).unwrap();
        assert_eq!(discriminate(&noise_map), FrameKind::Uplink);
    }

    #[test]
    fn peak_detect_reads_manual_maps_correctly() {
        let mut map = Array2::zeros((2, 2));
        map[[0, 0]] = 1.0;
        map[[1, 1]] = 0.1;
        let map = RangeAzimuthMap {
            map,
            angles_deg: vec![-90.0, 0.0],
            range_bin_m: 0.5,
            saturations: 0,
        };
        let det = peak_detect(&map, 15.0);
        assert!(det.detected);
        assert!((det.peak_snr_db - 20.0).abs() < 1e-9);
        assert_eq!(det.estimate.unwrap().range_bin, 0);
        assert!(!peak_detect(&map, 25.0).detected);
    }

    #[test]
    fn serialized_maps_round_trip() {
        let array = ArrayConfig { num_elements: 2, ..ArrayConfig::default() };
        let cfg = RspConfig { angle_step_deg: 4.0, ..RspConfig::default() };
        let echo = random_echo(64, 2, 4);
        let map = compute_map(&echo, &pulse(64), &array, &cfg).unwrap();
        assert_eq!(map.num_angles(), 46);

        let mut buf = Vec::new();
        write_map(&map, &mut buf).unwrap();
        assert_eq!(buf.len(), 16 + 64 * 46 * 4);
        let back = read_map(buf.as_slice()).unwrap();
        assert_eq!(back.map.dim(), map.map.dim());
        for (a, b) in map.map.iter().zip(back.map.iter()) {
            assert!((a - b).abs() <= a.abs() * 1e-6 + 1e-30);
        }
        for (a, b) in map.angles_deg.iter().zip(&back.angles_deg) {
            assert!((a - b).abs() < 1e-5);
        }
    }

    #[test]
    fn angle_grid_counts_and_bounds() {
        assert_eq!(angle_grid(1.0).unwrap().len(), 181);
        assert_eq!(angle_grid(4.0).unwrap().len(), 46);
        let g = angle_grid(1.0).unwrap();
        assert_eq!(g[0], -90.0);
        assert_eq!(*g.last().unwrap(), 90.0);
        assert!(angle_grid(0.0).is_err());
        assert!(angle_grid(120.0).is_err());
    }
}
