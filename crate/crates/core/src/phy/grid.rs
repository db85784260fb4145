//! 512-bin OFDM resource grid: 336 data tones, 16 scrambler-seeded BPSK
//! pilots, 3 null bins around DC, and 157 guard bins at the band edges.
//!
//! Occupied subcarriers are `k` in `[-177, 177]` excluding `{-1, 0, 1}`;
//! pilots sit at `k = +/-{10, 30, ..., 150}`. Logical subcarrier `k` lives in
//! FFT bin `(k + 512) mod 512`.

use crate::error::{Error, Result};
use crate::phy::scramble;
use num_complex::Complex64;
use std::sync::OnceLock;

pub const NUM_BINS: usize = 512;
pub const NUM_DATA: usize = 336;
pub const NUM_PILOTS: usize = 16;
pub const NUM_DC_NULL: usize = 3;
pub const NUM_GUARD: usize = NUM_BINS - NUM_DATA - NUM_PILOTS - NUM_DC_NULL;

pub const OCCUPIED_MAX: i32 = 177;

pub fn bin_index(k: i32) -> usize {
    ((k + NUM_BINS as i32) % NUM_BINS as i32) as usize
}

fn is_pilot(k: i32) -> bool {
    let a = k.abs();
    a >= 10 && a <= 150 && a % 20 == 10
}

fn is_occupied(k: i32) -> bool {
    k.abs() <= OCCUPIED_MAX && k.abs() > 1
}

/// Data-bearing subcarriers in ascending `k` order.
pub fn data_subcarriers() -> &'static [i32] {
    static TABLE: OnceLock<Vec<i32>> = OnceLock::new();
    TABLE.get_or_init(|| {
        (-OCCUPIED_MAX..=OCCUPIED_MAX)
            .filter(|&k| is_occupied(k) && !is_pilot(k))
            .collect()
    })
}

/// Pilot subcarriers in ascending `k` order.
pub fn pilot_subcarriers() -> &'static [i32] {
    static TABLE: OnceLock<Vec<i32>> = OnceLock::new();
    TABLE.get_or_init(|| {
        (-OCCUPIED_MAX..=OCCUPIED_MAX).filter(|&k| is_pilot(k)).collect()
    })
}

/// BPSK pilot values, one per pilot subcarrier in ascending order, derived
/// from the head of the all-ones scrambler keystream (bit 0 maps to +1).
pub fn pilot_values() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        scramble::lfsr_sequence(scramble::DEFAULT_SEED, NUM_PILOTS)
            .expect("fixed seed is valid")
            .iter()
            .map(|&b| 1.0 - 2.0 * b as f64)
            .collect()
    })
}

/// One OFDM symbol in the frequency domain, indexed by FFT bin.
#[derive(Debug, Clone, PartialEq)]
pub struct ResourceGrid {
    pub bins: Vec<Complex64>,
}

impl ResourceGrid {
    pub fn empty() -> Self {
        Self { bins: vec![Complex64::new(0.0, 0.0); NUM_BINS] }
    }

    /// Place 336 data symbols and the fixed pilots; everything else stays
    /// zero.
    pub fn from_data(data: &[Complex64]) -> Result<Self> {
        if data.len() != NUM_DATA {
            return Err(Error::Dimension { expected: NUM_DATA, got: data.len() });
        }
        let mut grid = Self::empty();
        for (&k, &s) in data_subcarriers().iter().zip(data) {
            grid.bins[bin_index(k)] = s;
        }
        for (&k, &p) in pilot_subcarriers().iter().zip(pilot_values()) {
            grid.bins[bin_index(k)] = Complex64::new(p, 0.0);
        }
        Ok(grid)
    }

    pub fn data_symbols(&self) -> Vec<Complex64> {
        data_subcarriers().iter().map(|&k| self.bins[bin_index(k)]).collect()
    }

    pub fn pilot_symbols(&self) -> Vec<Complex64> {
        pilot_subcarriers().iter().map(|&k| self.bins[bin_index(k)]).collect()
    }
}

/// The known header training symbol: every occupied tone carries a BPSK
/// value from the all-ones keystream, pilots included.
pub fn header_grid() -> &'static ResourceGrid {
    static GRID: OnceLock<ResourceGrid> = OnceLock::new();
    GRID.get_or_init(|| {
        let occupied: Vec<i32> =
            (-OCCUPIED_MAX..=OCCUPIED_MAX).filter(|&k| is_occupied(k)).collect();
        let bits = scramble::lfsr_sequence(scramble::DEFAULT_SEED, occupied.len())
            .expect("fixed seed is valid");
        let mut grid = ResourceGrid::empty();
        for (&k, &b) in occupied.iter().zip(&bits) {
            grid.bins[bin_index(k)] = Complex64::new(1.0 - 2.0 * b as f64, 0.0);
        }
        grid
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bin_accounting_covers_the_whole_grid() {
        assert_eq!(data_subcarriers().len(), NUM_DATA);
        assert_eq!(pilot_subcarriers().len(), NUM_PILOTS);
        assert_eq!(NUM_DATA + NUM_PILOTS + NUM_DC_NULL + NUM_GUARD, NUM_BINS);
        assert_eq!(NUM_GUARD, 157);

        // Data and pilot sets are disjoint and inside the occupied band.
        for &k in pilot_subcarriers() {
            assert!(!data_subcarriers().contains(&k));
            assert!(k.abs() <= OCCUPIED_MAX);
        }
        // DC region is carried by neither.
        for k in [-1, 0, 1] {
            assert!(!data_subcarriers().contains(&k));
            assert!(!pilot_subcarriers().contains(&k));
        }
    }

    #[test]
    fn pilots_sit_at_the_documented_positions() {
        let mut expected: Vec<i32> =
            (0..8).flat_map(|i| [10 + 20 * i, -(10 + 20 * i)]).collect();
        expected.sort_unstable();
        assert_eq!(pilot_subcarriers(), &expected[..]);
        assert_eq!(pilot_subcarriers().first(), Some(&-150));
        assert_eq!(pilot_subcarriers().last(), Some(&150));
    }

    #[test]
    fn bin_index_wraps_negative_subcarriers() {
        assert_eq!(bin_index(0), 0);
        assert_eq!(bin_index(177), 177);
        assert_eq!(bin_index(-1), 511);
        assert_eq!(bin_index(-177), 335);
    }

    #[test]
    fn data_round_trips_and_pilots_are_fixed() {
        let data: Vec<Complex64> =
            (0..NUM_DATA).map(|i| Complex64::new(i as f64, -(i as f64))).collect();
        let grid = ResourceGrid::from_data(&data).unwrap();
        assert_eq!(grid.data_symbols(), data);
        let pilots = grid.pilot_symbols();
        for (p, &v) in pilots.iter().zip(pilot_values()) {
            assert_eq!(*p, Complex64::new(v, 0.0));
        }
        // Guards and DC stay empty.
        assert_eq!(grid.bins[bin_index(0)].norm(), 0.0);
        assert_eq!(grid.bins[bin_index(200)].norm(), 0.0);
        assert_eq!(grid.bins[bin_index(-255)].norm(), 0.0);
    }

    #[test]
    fn header_occupies_exactly_the_occupied_band_with_unit_tones() {
        let h = header_grid();
        let mut nonzero = 0;
        for (bin, s) in h.bins.iter().enumerate() {
            if s.norm() > 0.0 {
                nonzero += 1;
                assert_eq!(s.norm(), 1.0);
                // Map bin back to logical k and confirm it is occupied.
                let k = if bin < NUM_BINS / 2 { bin as i32 } else { bin as i32 - 512 };
                assert!(k.abs() > 1 && k.abs() <= OCCUPIED_MAX, "stray tone at k={k}");
            }
        }
        assert_eq!(nonzero, NUM_DATA + NUM_PILOTS);
    }

    #[test]
    fn wrong_data_length_is_rejected() {
        assert!(ResourceGrid::from_data(&vec![Complex64::default(); 100]).is_err());
    }
}
