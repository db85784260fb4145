//! Fixed-point arithmetic emulation.
//!
//! Hardware pipelines carry signed two's-complement words; this module mimics
//! them in floating point by snapping values to the representable grid of a
//! `(total_bits, int_bits)` format at pipeline stage boundaries. Rounding is
//! round-to-nearest with ties to even, and out-of-range values saturate at
//! the format limits rather than wrapping. Real and imaginary parts quantize
//! independently.

use crate::error::{Error, Result};
use crate::signal::ComplexFrame;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// A signed fixed-point format. `int_bits` counts the sign bit, so the
/// representable range is `[-2^(int_bits-1), 2^(int_bits-1) - step]` with
/// `step = 2^-(total_bits - int_bits)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FxpFormat {
    pub total_bits: u32,
    pub int_bits: u32,
}

impl FxpFormat {
    pub fn new(total_bits: u32, int_bits: u32) -> Result<Self> {
        if !(2..=64).contains(&total_bits) {
            return Err(Error::config(format!(
                "total_bits must be in 2..=64, got {total_bits}"
            )));
        }
        if int_bits < 1 || int_bits >= total_bits {
            return Err(Error::config(format!(
                "int_bits must satisfy 1 <= int_bits < total_bits, got ({total_bits}, {int_bits})"
            )));
        }
        Ok(Self { total_bits, int_bits })
    }

    /// Quantization step, the weight of the least significant bit.
    pub fn step(&self) -> f64 {
        2f64.powi(-((self.total_bits - self.int_bits) as i32))
    }

    pub fn min_value(&self) -> f64 {
        -(2f64.powi(self.int_bits as i32 - 1))
    }

    pub fn max_value(&self) -> f64 {
        2f64.powi(self.int_bits as i32 - 1) - self.step()
    }

    /// Snap one real value to the grid. Returns the value and whether it
    /// saturated. NaN saturates to the minimum to keep the pipeline total.
    pub fn quantize(&self, x: f64) -> (f64, bool) {
        if x.is_nan() {
            return (self.min_value(), true);
        }
        let step = self.step();
        let rounded = (x / step).round_ties_even() * step;
        if rounded < self.min_value() {
            (self.min_value(), true)
        } else if rounded > self.max_value() {
            (self.max_value(), true)
        } else {
            (rounded, false)
        }
    }
}

/// Stateful quantizer that applies one [`FxpFormat`] and counts saturations
/// silently, like an overflow flag register in the datapath.
#[derive(Debug, Clone)]
pub struct Quantizer {
    pub format: FxpFormat,
    saturations: u64,
}

impl Quantizer {
    pub fn new(format: FxpFormat) -> Self {
        Self { format, saturations: 0 }
    }

    pub fn saturation_count(&self) -> u64 {
        self.saturations
    }

    pub fn quantize(&mut self, x: f64) -> f64 {
        let (q, sat) = self.format.quantize(x);
        self.saturations += sat as u64;
        q
    }

    pub fn quantize_complex(&mut self, x: Complex64) -> Complex64 {
        Complex64::new(self.quantize(x.re), self.quantize(x.im))
    }

    pub fn quantize_slice(&mut self, xs: &mut [Complex64]) {
        for x in xs.iter_mut() {
            *x = self.quantize_complex(*x);
        }
    }

    pub fn quantize_frame(&mut self, frame: &mut ComplexFrame) {
        self.quantize_slice(&mut frame.samples);
    }
}

/// Word lengths used at the boundaries of the transmit, receive, and radar
/// processing pipelines. `enabled = false` leaves every path in floating
/// point.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StageFormats {
    pub enabled: bool,
    pub tx: FxpFormat,
    pub rx: FxpFormat,
    pub rsp: FxpFormat,
}

impl Default for StageFormats {
    fn default() -> Self {
        Self {
            enabled: false,
            tx: FxpFormat { total_bits: 14, int_bits: 3 },
            rx: FxpFormat { total_bits: 35, int_bits: 2 },
            rsp: FxpFormat { total_bits: 29, int_bits: 1 },
        }
    }
}

impl StageFormats {
    pub fn tx_quantizer(&self) -> Option<Quantizer> {
        self.enabled.then(|| Quantizer::new(self.tx))
    }

    pub fn rx_quantizer(&self) -> Option<Quantizer> {
        self.enabled.then(|| Quantizer::new(self.rx))
    }

    pub fn rsp_quantizer(&self) -> Option<Quantizer> {
        self.enabled.then(|| Quantizer::new(self.rsp))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fmt(w: u32, i: u32) -> FxpFormat {
        FxpFormat::new(w, i).unwrap()
    }

    #[test]
    fn construction_rejects_bad_widths() {
        assert!(FxpFormat::new(1, 1).is_err());
        assert!(FxpFormat::new(65, 3).is_err());
        assert!(FxpFormat::new(14, 0).is_err());
        assert!(FxpFormat::new(14, 14).is_err());
        assert!(FxpFormat::new(14, 3).is_ok());
    }

    #[test]
    fn frozen_examples_for_the_transmit_format() {
        let f = fmt(14, 3);
        // 0.5 is exactly representable with 11 fraction bits.
        assert_eq!(f.quantize(0.5), (0.5, false));
        // 5.0 exceeds the (14,3) range and saturates to 4 - 2^-11.
        assert_eq!(f.quantize(5.0), (3.99951171875, true));
        // pi rounds to 6434/2048.
        assert_eq!(f.quantize(std::f64::consts::PI), (3.1416015625, false));
        assert_eq!(6434.0 / 2048.0, 3.1416015625);
    }

    #[test]
    fn ties_round_to_even() {
        let f = fmt(14, 3);
        let step = f.step();
        // 2.5 steps is equidistant; even neighbor is 2 steps.
        assert_eq!(f.quantize(2.5 * step).0, 2.0 * step);
        assert_eq!(f.quantize(3.5 * step).0, 4.0 * step);
        assert_eq!(f.quantize(-2.5 * step).0, -2.0 * step);
    }

    #[test]
    fn saturation_counter_accumulates() {
        let mut q = Quantizer::new(fmt(14, 3));
        q.quantize(100.0);
        q.quantize(-100.0);
        q.quantize(1.0);
        q.quantize_complex(Complex64::new(10.0, -10.0));
        assert_eq!(q.saturation_count(), 4);
    }

    #[test]
    fn nan_saturates_instead_of_poisoning() {
        let f = fmt(14, 3);
        let (q, sat) = f.quantize(f64::NAN);
        assert_eq!(q, f.min_value());
        assert!(sat);
    }

    #[test]
    fn default_stage_formats_are_disabled_floats() {
        let sf = StageFormats::default();
        assert!(!sf.enabled);
        assert!(sf.tx_quantizer().is_none());
        assert_eq!(sf.rsp.total_bits, 29);
        assert_eq!(sf.rx.total_bits, 35);
    }

    proptest! {
        #[test]
        fn quantization_is_idempotent(x in -8.0f64..8.0, w in 2u32..32, i_off in 0u32..4) {
            let i = 1 + i_off.min(w - 2);
            let f = fmt(w, i);
            let (q1, _) = f.quantize(x);
            let (q2, sat2) = f.quantize(q1);
            prop_assert_eq!(q1, q2);
            prop_assert!(!sat2);
        }

        #[test]
        fn quantization_is_monotone(a in -8.0f64..8.0, b in -8.0f64..8.0) {
            let f = fmt(14, 3);
            let (qa, _) = f.quantize(a.min(b));
            let (qb, _) = f.quantize(a.max(b));
            prop_assert!(qa <= qb);
        }

        #[test]
        fn in_range_error_is_at_most_half_a_step(x in -3.9f64..3.9) {
            let f = fmt(14, 3);
            let (q, sat) = f.quantize(x);
            prop_assert!(!sat);
            prop_assert!((x - q).abs() <= f.step() / 2.0 + 1e-15);
        }

        #[test]
        fn widening_refines(x in -3.9f64..3.9) {
            // A wider word is at least as accurate on every input.
            let narrow = fmt(12, 3);
            let wide = fmt(20, 3);
            let (qn, _) = narrow.quantize(x);
            let (qw, _) = wide.quantize(x);
            prop_assert!((x - qw).abs() <= (x - qn).abs() + 1e-15);
        }
    }
}
