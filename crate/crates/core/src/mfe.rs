//! Baseband-equivalent millimeter-wave front end.
//!
//! Every RF stage is reduced to the three numbers that matter at baseband:
//! gain, noise figure, and the input-referred 1 dB compression point, with a
//! Rapp soft limiter supplying the compression shape. On top of the chains
//! sit the oscillator and modulator impairments (IQ imbalance, LO leakage,
//! carrier frequency offset) and the radar-equation link budget.
//!
//! Power convention: 0 dBm corresponds to unit signal power, so a sample
//! with `|x| = 1` carries 0 dBm of instantaneous power.

use crate::error::{Error, Result};
use crate::signal::db_to_power;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Smoothness of the Rapp limiter; 2 is the usual solid-state value.
pub const RAPP_SMOOTHNESS: f64 = 2.0;

/// One RF component collapsed to scalars.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainStage {
    pub name: String,
    pub gain_db: f64,
    /// Noise figure; zero when the loss is already counted in `gain_db` and
    /// the stage adds no excess noise.
    pub nf_db: f64,
    /// Input-referred 1 dB compression point; `None` means ideally linear.
    pub p1db_dbm: Option<f64>,
}

impl ChainStage {
    pub fn new(name: &str, gain_db: f64, nf_db: f64, p1db_dbm: Option<f64>) -> Self {
        Self { name: name.to_string(), gain_db, nf_db, p1db_dbm }
    }
}

/// Radar transmit path: IF and IQ upconversion, image filter, power
/// amplifier. Antennas are not chain stages; their gains enter the link
/// budget instead.
pub fn radar_tx_chain() -> Vec<ChainStage> {
    vec![
        ChainStage::new("if-modulator", 0.0, 0.0, None),
        ChainStage::new("iq-modulator", 18.0, 0.0, Some(20.0)),
        ChainStage::new("highpass-filter", -3.0, 3.0, None),
        ChainStage::new("power-amplifier", 15.0, 0.0, Some(31.0)),
    ]
}

/// Radar receive path per array element: low-noise amplifier first, so the
/// cascade noise figure is essentially the amplifier's own.
pub fn radar_rx_chain() -> Vec<ChainStage> {
    vec![
        ChainStage::new("low-noise-amplifier", 40.0, 2.5, Some(13.0)),
        ChainStage::new("highpass-filter", -3.0, 3.0, None),
        ChainStage::new("iq-demodulator", 17.0, 5.5, Some(-14.0)),
        ChainStage::new("if-demodulator", 0.0, 0.0, None),
    ]
}

/// Communication transmit path: the radar exciter plus the power divider
/// and per-element phase shifters that feed the transmit array.
pub fn comm_tx_chain() -> Vec<ChainStage> {
    let mut stages = radar_tx_chain();
    stages.push(ChainStage::new("power-divider", -15.0, 15.0, None));
    stages.push(ChainStage::new("phase-shifter", -2.0, 2.0, None));
    stages
}

/// User-terminal receive path: passive beamforming network in front of the
/// same downconversion lineup the radar receiver uses.
pub fn comm_rx_chain() -> Vec<ChainStage> {
    let mut stages = vec![
        ChainStage::new("phase-shifter", -2.0, 2.0, None),
        ChainStage::new("power-combiner", -5.0, 5.0, None),
    ];
    stages.extend(radar_rx_chain());
    stages
}

pub fn cascade_gain_db(stages: &[ChainStage]) -> f64 {
    stages.iter().map(|s| s.gain_db).sum()
}

/// Friis cascade noise figure: stages after a high-gain front end barely
/// matter, which is the whole point of putting the amplifier first.
pub fn cascade_noise_figure_db(stages: &[ChainStage]) -> Result<f64> {
    if stages.is_empty() {
        return Err(Error::config("noise cascade needs at least one stage"));
    }
    let mut factor = 0.0;
    let mut gain = 1.0;
    for (i, stage) in stages.iter().enumerate() {
        let f = db_to_power(stage.nf_db);
        if i == 0 {
            factor = f;
        } else {
            factor += (f - 1.0) / gain;
        }
        gain *= db_to_power(stage.gain_db);
    }
    Ok(10.0 * factor.log10())
}

/// Saturation amplitude for an input-referred 1 dB compression amplitude:
/// chosen so the limiter output at `x1db` is exactly 1 dB under nominal.
fn rapp_saturation(x1db_amp: f64) -> f64 {
    let knee = (db_to_power(2.0) - 1.0).powf(1.0 / (2.0 * RAPP_SMOOTHNESS));
    x1db_amp / knee
}

fn rapp_compress(x: Complex64, a_sat: f64) -> Complex64 {
    let r = x.norm();
    if r == 0.0 {
        return x;
    }
    let two_p = 2.0 * RAPP_SMOOTHNESS;
    x * (1.0 + (r / a_sat).powf(two_p)).powf(-1.0 / two_p)
}

/// A processed frame plus the cascade bookkeeping.
#[derive(Debug, Clone)]
pub struct ChainOutput {
    pub samples: Vec<Complex64>,
    pub gain_db: f64,
    pub noise_figure_db: f64,
}

/// Push samples through a stage lineup: each stage soft-limits against its
/// input-referred compression point, then applies its gain.
pub fn apply_chain(samples: &[Complex64], stages: &[ChainStage]) -> Result<ChainOutput> {
    if stages.is_empty() {
        return Err(Error::config("chain needs at least one stage"));
    }
    let mut out = samples.to_vec();
    for stage in stages {
        let gain_amp = db_to_power(stage.gain_db).sqrt();
        if let Some(p1db) = stage.p1db_dbm {
            let a_sat = rapp_saturation(db_to_power(p1db).sqrt());
            for s in out.iter_mut() {
                *s = rapp_compress(*s, a_sat) * gain_amp;
            }
        } else {
            for s in out.iter_mut() {
                *s *= gain_amp;
            }
        }
    }
    Ok(ChainOutput {
        samples: out,
        gain_db: cascade_gain_db(stages),
        noise_figure_db: cascade_noise_figure_db(stages)?,
    })
}

/// Modulator port mismatch coefficients: `y = alpha x + beta conj(x)`.
pub fn iq_coefficients(gain_db: f64, phase_deg: f64) -> (Complex64, Complex64) {
    let g = db_to_power(gain_db).sqrt();
    let rot = Complex64::from_polar(g, phase_deg.to_radians());
    let one = Complex64::new(1.0, 0.0);
    ((one + rot) / 2.0, (one - rot) / 2.0)
}

/// Image rejection ratio implied by the mismatch, in dB; infinite for a
/// balanced modulator.
pub fn image_rejection_db(gain_db: f64, phase_deg: f64) -> f64 {
    let (alpha, beta) = iq_coefficients(gain_db, phase_deg);
    if beta.norm_sqr() == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (alpha.norm_sqr() / beta.norm_sqr()).log10()
    }
}

pub fn apply_iq_imbalance(samples: &mut [Complex64], gain_db: f64, phase_deg: f64) {
    let (alpha, beta) = iq_coefficients(gain_db, phase_deg);
    for s in samples.iter_mut() {
        *s = alpha * *s + beta * s.conj();
    }
}

/// Add the oscillator that bleeds through the modulator: a constant
/// baseband term at `lo_power_rel_db - isolation_db` relative to the frame
/// RMS. Infinite isolation is a no-op.
pub fn apply_lo_leakage(samples: &mut [Complex64], isolation_db: f64, lo_power_rel_db: f64) {
    if samples.is_empty() || isolation_db == f64::INFINITY {
        return;
    }
    let rms = (samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / samples.len() as f64).sqrt();
    let dc = rms * db_to_power((lo_power_rel_db - isolation_db) / 2.0);
    for s in samples.iter_mut() {
        *s += dc;
    }
}

/// Rotate by a carrier frequency offset: `y[n] = x[n] e^{j 2 pi f n / fs}`.
pub fn apply_cfo(samples: &mut [Complex64], cfo_hz: f64, fs_hz: f64) -> Result<()> {
    if !(fs_hz > 0.0) || cfo_hz.abs() >= fs_hz / 2.0 {
        return Err(Error::out_of_range(format!(
            "offset {cfo_hz} Hz must be inside +/- half the {fs_hz} Hz rate"
        )));
    }
    let step = 2.0 * std::f64::consts::PI * cfo_hz / fs_hz;
    for (n, s) in samples.iter_mut().enumerate() {
        *s *= Complex64::from_polar(1.0, step * n as f64);
    }
    Ok(())
}

/// The RF impairments applied to a transmission, in signal-path order:
/// modulator imbalance, oscillator leakage, then frequency offset.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ImpairmentConfig {
    pub iq_gain_db: f64,
    pub iq_phase_deg: f64,
    /// `None` models perfect LO-to-RF isolation.
    pub lo_rf_isolation_db: Option<f64>,
    pub lo_power_rel_db: f64,
    pub cfo_hz: f64,
    /// Inject the leakage at the receiver instead of the transmitter.
    pub lo_at_receiver: bool,
}

impl Default for ImpairmentConfig {
    fn default() -> Self {
        Self {
            iq_gain_db: 0.0,
            iq_phase_deg: 0.0,
            lo_rf_isolation_db: None,
            lo_power_rel_db: 0.0,
            cfo_hz: 0.0,
            lo_at_receiver: false,
        }
    }
}

impl ImpairmentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=9.0).contains(&self.iq_gain_db) {
            return Err(Error::out_of_range("IQ gain mismatch must lie in [0, 9] dB"));
        }
        if !(0.0..=30.0).contains(&self.iq_phase_deg) {
            return Err(Error::out_of_range("IQ phase mismatch must lie in [0, 30] degrees"));
        }
        if let Some(iso) = self.lo_rf_isolation_db {
            if !(iso > 0.0) {
                return Err(Error::out_of_range("LO isolation must be positive"));
            }
        }
        if !(0.0..=100e6).contains(&self.cfo_hz) {
            return Err(Error::out_of_range("frequency offset must lie in [0, 100e6] Hz"));
        }
        Ok(())
    }

    pub fn is_ideal(&self) -> bool {
        self.iq_gain_db == 0.0
            && self.iq_phase_deg == 0.0
            && self.lo_rf_isolation_db.is_none()
            && self.cfo_hz == 0.0
    }

    /// Apply the transmitter-side impairments in order.
    pub fn apply_tx(&self, samples: &mut [Complex64], fs_hz: f64) -> Result<()> {
        self.validate()?;
        if self.iq_gain_db != 0.0 || self.iq_phase_deg != 0.0 {
            apply_iq_imbalance(samples, self.iq_gain_db, self.iq_phase_deg);
        }
        if let Some(iso) = self.lo_rf_isolation_db {
            if !self.lo_at_receiver {
                apply_lo_leakage(samples, iso, self.lo_power_rel_db);
            }
        }
        if self.cfo_hz != 0.0 {
            apply_cfo(samples, self.cfo_hz, fs_hz)?;
        }
        Ok(())
    }

    /// Receiver-side injection point for the leakage term, when configured.
    pub fn apply_rx(&self, samples: &mut [Complex64]) -> Result<()> {
        self.validate()?;
        if let Some(iso) = self.lo_rf_isolation_db {
            if self.lo_at_receiver {
                apply_lo_leakage(samples, iso, self.lo_power_rel_db);
            }
        }
        Ok(())
    }
}

/// Radar-equation budget for the sensing link.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LinkBudget {
    pub tx_power_dbm: f64,
    pub tx_gain_dbi: f64,
    pub rx_gain_dbi: f64,
    pub system_nf_db: f64,
    pub bandwidth_hz: f64,
    /// Detection threshold on post-processing SNR.
    pub min_snr_db: f64,
    pub rcs_dbsm: f64,
    pub wavelength_m: f64,
    /// Coherent integration gain of the pulse processor; set to zero if
    /// `min_snr_db` is referenced before processing.
    pub processing_gain_db: f64,
}

impl Default for LinkBudget {
    fn default() -> Self {
        Self {
            // Back-solved so the defaults reach the 2.28 dB threshold at
            // 41.22 m.
            tx_power_dbm: 11.108,
            tx_gain_dbi: 2.02,
            rx_gain_dbi: 16.0,
            system_nf_db: 2.5,
            bandwidth_hz: 1.76e9,
            min_snr_db: 2.28,
            rcs_dbsm: 0.0,
            wavelength_m: 0.012,
            processing_gain_db: 10.0 * 1024f64.log10(),
        }
    }
}

impl LinkBudget {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            self.tx_power_dbm,
            self.tx_gain_dbi,
            self.rx_gain_dbi,
            self.system_nf_db,
            self.bandwidth_hz,
            self.min_snr_db,
            self.rcs_dbsm,
            self.wavelength_m,
            self.processing_gain_db,
        ];
        if fields.iter().any(|f| !f.is_finite()) {
            return Err(Error::config("link budget fields must be finite"));
        }
        if !(self.bandwidth_hz > 0.0) || !(self.wavelength_m > 0.0) {
            return Err(Error::config("bandwidth and wavelength must be positive"));
        }
        Ok(())
    }

    /// Thermal noise power in the receiver bandwidth, plus the noise figure.
    pub fn noise_floor_dbm(&self) -> f64 {
        -174.0 + 10.0 * self.bandwidth_hz.log10() + self.system_nf_db
    }

    /// Everything in the two-way radar equation except transmit power and
    /// the range term.
    fn fixed_gains_db(&self) -> f64 {
        let four_pi = 4.0 * std::f64::consts::PI;
        self.tx_gain_dbi + self.rx_gain_dbi + self.rcs_dbsm
            + 20.0 * self.wavelength_m.log10()
            - 30.0 * four_pi.log10()
            + self.processing_gain_db
            - self.noise_floor_dbm()
    }

    /// Post-processing echo SNR at range `r`.
    pub fn received_snr_db(&self, range_m: f64) -> f64 {
        self.tx_power_dbm + self.fixed_gains_db() - 40.0 * range_m.log10()
    }

    /// Largest range whose echo still meets the detection threshold.
    pub fn solve_max_range(&self) -> Result<f64> {
        self.validate()?;
        let exponent = (self.tx_power_dbm + self.fixed_gains_db() - self.min_snr_db) / 40.0;
        let range = 10f64.powf(exponent);
        if !range.is_finite() || range <= 0.0 {
            return Err(Error::Infeasible(format!(
                "budget never reaches {} dB at any positive range",
                self.min_snr_db
            )));
        }
        Ok(range)
    }

    /// Transmit power needed to reach the threshold exactly at `range_m`.
    pub fn solve_tx_power_dbm(&self, range_m: f64) -> Result<f64> {
        self.validate()?;
        if !(range_m > 0.0) {
            return Err(Error::config("range must be positive"));
        }
        Ok(self.min_snr_db + 40.0 * range_m.log10() - self.fixed_gains_db())
    }
}
