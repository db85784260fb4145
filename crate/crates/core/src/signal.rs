//! Complex baseband containers, dB conversions, unitary FFT helpers, and the
//! seeded RNG streams every stochastic operation draws from.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rustfft::FftPlanner;
use std::cell::RefCell;
use std::sync::Arc;

pub const SPEED_OF_LIGHT_M_S: f64 = 299_792_458.0;

/// Sample rate of the single-carrier preamble and radar pulse path.
pub const SC_SAMPLE_RATE_HZ: f64 = 1.76e9;

/// Sample rate of the OFDM header and data path.
pub const OFDM_SAMPLE_RATE_HZ: f64 = 2.64e9;

/// Default carrier frequency of the shared front end.
pub const DEFAULT_CARRIER_HZ: f64 = 25.0e9;

/// Two-way range covered by one sample at the given rate, in meters.
pub fn range_bin_m(sample_rate_hz: f64) -> f64 {
    SPEED_OF_LIGHT_M_S / (2.0 * sample_rate_hz)
}

/// A block of complex baseband samples tagged with its sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexFrame {
    pub samples: Vec<Complex64>,
    pub sample_rate_hz: f64,
}

impl ComplexFrame {
    pub fn new(samples: Vec<Complex64>, sample_rate_hz: f64) -> Self {
        Self { samples, sample_rate_hz }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz
    }

    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|s| s.norm_sqr()).sum()
    }

    pub fn mean_power(&self) -> f64 {
        if self.samples.is_empty() {
            0.0
        } else {
            self.energy() / self.samples.len() as f64
        }
    }

    pub fn rms(&self) -> f64 {
        self.mean_power().sqrt()
    }

    pub fn scale(&mut self, gain: f64) {
        for s in &mut self.samples {
            *s *= gain;
        }
    }
}

pub fn db_to_power(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn power_to_db(power: f64) -> f64 {
    10.0 * power.log10()
}

pub fn db_to_amplitude(db: f64) -> f64 {
    10f64.powf(db / 20.0)
}

pub fn amplitude_to_db(amplitude: f64) -> f64 {
    20.0 * amplitude.log10()
}

pub fn mean_power(samples: &[Complex64]) -> f64 {
    if samples.is_empty() {
        0.0
    } else {
        samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / samples.len() as f64
    }
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan_forward(len: usize) -> Arc<dyn rustfft::Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(len))
}

fn plan_inverse(len: usize) -> Arc<dyn rustfft::Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(len))
}

/// Forward DFT scaled by 1/sqrt(N) so energy is preserved.
pub fn fft_unitary(input: &[Complex64]) -> Vec<Complex64> {
    let mut buf = input.to_vec();
    let n = buf.len();
    if n == 0 {
        return buf;
    }
    plan_forward(n).process(&mut buf);
    let scale = 1.0 / (n as f64).sqrt();
    for s in buf.iter_mut() {
        *s *= scale;
    }
    buf
}

/// Inverse DFT scaled by 1/sqrt(N); inverse of [`fft_unitary`].
pub fn ifft_unitary(input: &[Complex64]) -> Vec<Complex64> {
    let mut buf = input.to_vec();
    let n = buf.len();
    if n == 0 {
        return buf;
    }
    plan_inverse(n).process(&mut buf);
    let scale = 1.0 / (n as f64).sqrt();
    for s in buf.iter_mut() {
        *s *= scale;
    }
    buf
}

/// Bandlimited resampling by the exact rational ratio `up/down` via zero
/// padding in the frequency domain. Input length must divide evenly so the
/// output length `len * up / down` is an integer.
pub fn resample_rational(samples: &[Complex64], up: usize, down: usize) -> Vec<Complex64> {
    assert!(up > 0 && down > 0);
    let n = samples.len();
    assert_eq!(n * up % down, 0, "resample ratio must give integer length");
    let m = n * up / down;
    if n == 0 || m == n {
        return samples.to_vec();
    }
    let spec = fft_unitary(samples);
    let mut padded = vec![Complex64::new(0.0, 0.0); m];
    // Copy positive and negative halves; amplitude scale sqrt(m/n) keeps the
    // waveform level (unitary transforms otherwise dilute by sqrt(n/m)).
    let half = n.min(m) / 2;
    padded[..half].copy_from_slice(&spec[..half]);
    padded[m - half..].copy_from_slice(&spec[n - half..]);
    let mut out = ifft_unitary(&padded);
    let scale = (m as f64 / n as f64).sqrt();
    for s in &mut out {
        *s *= scale;
    }
    out
}

/// Stream purposes for the counter-mode RNG. Keeping noise, clutter, and
/// payload draws on separate streams lets paired experiments share exactly
/// the noise realizations they intend to.
pub mod streams {
    pub const NOISE_RADAR: u64 = 1;
    pub const CLUTTER: u64 = 2;
    pub const NOISE_COMM: u64 = 3;
    pub const PAYLOAD: u64 = 4;
    /// Scene geometry draws (target positions, angles) in experiments.
    pub const SCENE: u64 = 5;
}

/// Deterministic per-trial generator: one master seed, a trial index, and a
/// purpose constant from [`streams`] select an independent stream.
pub fn trial_rng(master_seed: u64, trial: u64, purpose: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream((trial << 8) | purpose);
    rng
}

/// One draw of circularly symmetric complex Gaussian noise with total
/// variance `variance` (split evenly between I and Q).
pub fn complex_gaussian(rng: &mut impl Rng, variance: f64) -> Complex64 {
    let sigma = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * sigma, im * sigma)
}
