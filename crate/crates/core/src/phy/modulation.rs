//! QPSK mapping with pairwise tone precoding.
//!
//! Bits map Gray-coded onto unit-energy QPSK points, then symbols `k` and
//! `k + n/2` are mixed by the self-inverse unitary `[[1, 1], [1, -1]]/sqrt(2)`
//! so each bit rides on two widely separated subcarriers.

use crate::error::{Error, Result};
use num_complex::Complex64;

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Map a bit pair to a unit-energy QPSK point: `00 -> (1+j)/sqrt(2)`, first
/// bit on I, second on Q, Gray coded.
pub fn qpsk_point(b0: u8, b1: u8) -> Complex64 {
    Complex64::new(
        (1.0 - 2.0 * b0 as f64) * FRAC_1_SQRT_2,
        (1.0 - 2.0 * b1 as f64) * FRAC_1_SQRT_2,
    )
}

/// Apply the pairwise precoder in place: symbols `k` and `k + n/2` become
/// their normalized sum and difference. Self-inverse, so the same call
/// undoes it.
pub fn tone_pair_transform(symbols: &mut [Complex64]) -> Result<()> {
    let n = symbols.len();
    if n % 2 != 0 {
        return Err(Error::Dimension { expected: n + 1, got: n });
    }
    let half = n / 2;
    for k in 0..half {
        let s0 = symbols[k];
        let s1 = symbols[k + half];
        symbols[k] = (s0 + s1) * FRAC_1_SQRT_2;
        symbols[k + half] = (s0 - s1) * FRAC_1_SQRT_2;
    }
    Ok(())
}

/// Coded bits to precoded QPSK symbols. Bit count must be a multiple of
/// four so the pairing is total.
pub fn qpsk_tone_pair_mod(bits: &[u8]) -> Result<Vec<Complex64>> {
    if bits.len() % 4 != 0 {
        return Err(Error::Dimension {
            expected: bits.len() + 4 - bits.len() % 4,
            got: bits.len(),
        });
    }
    let mut symbols: Vec<Complex64> =
        bits.chunks_exact(2).map(|p| qpsk_point(p[0], p[1])).collect();
    tone_pair_transform(&mut symbols)?;
    Ok(symbols)
}

/// Per-bit LLRs (positive = bit 0) from de-paired symbols. `scale` is the
/// coefficient `2 sqrt(2) / noise_var` folded by the caller's equalizer
/// state; one scale per symbol.
pub fn qpsk_soft_demod(symbols: &[Complex64], scales: &[f64]) -> Result<Vec<f64>> {
    if symbols.len() != scales.len() {
        return Err(Error::Dimension { expected: symbols.len(), got: scales.len() });
    }
    let mut llrs = Vec::with_capacity(symbols.len() * 2);
    for (s, &sc) in symbols.iter().zip(scales) {
        llrs.push(s.re * sc);
        llrs.push(s.im * sc);
    }
    Ok(llrs)
}

/// Undo the pairing and slice to hard bits.
pub fn qpsk_tone_pair_demod_hard(symbols: &[Complex64]) -> Result<Vec<u8>> {
    let mut depaired = symbols.to_vec();
    tone_pair_transform(&mut depaired)?;
    let mut bits = Vec::with_capacity(symbols.len() * 2);
    for s in &depaired {
        bits.push((s.re < 0.0) as u8);
        bits.push((s.im < 0.0) as u8);
    }
    Ok(bits)
}
