//! OFDM symbol construction: 512-point unitary IFFT, 128-sample cyclic
//! prefix, and a short raised-cosine ramp on the head of the prefix.

use crate::error::{Error, Result};
use crate::phy::grid::{ResourceGrid, NUM_BINS};
use crate::signal::{fft_unitary, ifft_unitary};
use num_complex::Complex64;

pub const FFT_LEN: usize = NUM_BINS;
pub const CP_LEN: usize = 128;
pub const SYMBOL_LEN: usize = FFT_LEN + CP_LEN;
/// Samples at the head of the cyclic prefix shaped by the ramp.
pub const WINDOW_LEN: usize = 16;

/// One time-domain OFDM symbol: cyclic prefix followed by the IFFT core.
#[derive(Debug, Clone, PartialEq)]
pub struct OfdmSymbol {
    pub time_samples: Vec<Complex64>,
}

fn ramp(n: usize) -> f64 {
    0.5 * (1.0 - (std::f64::consts::PI * n as f64 / WINDOW_LEN as f64).cos())
}

/// Frequency bins to time samples with cyclic prefix and edge windowing.
pub fn modulate(grid: &ResourceGrid) -> OfdmSymbol {
    let core = ifft_unitary(&grid.bins);
    let mut time_samples = Vec::with_capacity(SYMBOL_LEN);
    time_samples.extend_from_slice(&core[FFT_LEN - CP_LEN..]);
    time_samples.extend_from_slice(&core);
    for n in 0..WINDOW_LEN {
        time_samples[n] *= ramp(n);
    }
    OfdmSymbol { time_samples }
}

/// Strip the cyclic prefix and FFT back to frequency bins.
pub fn demodulate(symbol: &[Complex64]) -> Result<ResourceGrid> {
    if symbol.len() != SYMBOL_LEN {
        return Err(Error::Dimension { expected: SYMBOL_LEN, got: symbol.len() });
    }
    Ok(ResourceGrid { bins: fft_unitary(&symbol[CP_LEN..]) })
}
