//! Rate-3/4 (672, 504) quasi-cyclic LDPC code.
//!
//! The parity-check matrix is a 4x16 grid of 42x42 circulants: twelve
//! weight-3 information columns with shifts chosen free of length-4 cycles,
//! and four staircase parity columns of identity circulants. The staircase
//! makes the parity part lower triangular, so encoding is a single
//! back-substitution pass and the matrix has full rank by construction.
//!
//! The one-entries ship as a plain `row,col` text artifact so the exact code
//! is pinned independently of the generator that produced it.

use crate::error::{Error, Result};
use std::sync::OnceLock;

pub const CODEWORD_BITS: usize = 672;
pub const INFO_BITS: usize = 504;
pub const PARITY_BITS: usize = CODEWORD_BITS - INFO_BITS;

const H_ENTRIES: &str = include_str!("../../data/ldpc_h_672_504.txt");

/// Sparse parity-check matrix in row-adjacency form.
#[derive(Debug)]
pub struct LdpcCode {
    /// Column indices per check row, sorted.
    pub rows: Vec<Vec<u32>>,
}

impl LdpcCode {
    fn parse() -> Self {
        let mut rows = vec![Vec::new(); PARITY_BITS];
        for line in H_ENTRIES.lines() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (r, c) = line
                .split_once(',')
                .expect("parity artifact line must be 'row,col'");
            let r: usize = r.trim().parse().expect("bad row index");
            let c: u32 = c.trim().parse().expect("bad col index");
            assert!(r < PARITY_BITS && (c as usize) < CODEWORD_BITS);
            rows[r].push(c);
        }
        for row in &mut rows {
            row.sort_unstable();
            assert!(!row.is_empty());
        }
        Self { rows }
    }

    pub fn edge_count(&self) -> usize {
        self.rows.iter().map(|r| r.len()).sum()
    }
}

/// The shared code instance, parsed once.
pub fn code() -> &'static LdpcCode {
    static CODE: OnceLock<LdpcCode> = OnceLock::new();
    CODE.get_or_init(LdpcCode::parse)
}

/// Encode 504 information bits into a 672-bit systematic codeword.
///
/// The staircase means check row `r` determines parity bit `INFO_BITS + r`
/// once all later parity bits are known, so rows are solved bottom-up.
pub fn ldpc_encode(info: &[u8]) -> Result<Vec<u8>> {
    if info.len() != INFO_BITS {
        return Err(Error::Dimension { expected: INFO_BITS, got: info.len() });
    }
    let code = code();
    let mut cw = vec![0u8; CODEWORD_BITS];
    cw[..INFO_BITS].copy_from_slice(info);
    for row in (0..PARITY_BITS).rev() {
        let own = (INFO_BITS + row) as u32;
        let mut acc = 0u8;
        for &c in &code.rows[row] {
            if c != own {
                acc ^= cw[c as usize];
            }
        }
        cw[INFO_BITS + row] = acc;
    }
    Ok(cw)
}

/// Hard decision: positive LLR means bit 0.
fn hard_decision(llrs: &[f64]) -> Vec<u8> {
    llrs.iter().map(|&l| (l < 0.0) as u8).collect()
}

fn syndrome_ok(code: &LdpcCode, bits: &[u8]) -> bool {
    code.rows
        .iter()
        .all(|row| row.iter().fold(0u8, |acc, &c| acc ^ bits[c as usize]) == 0)
}

/// Decoded information bits plus whether the decoder landed on a valid
/// codeword.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeResult {
    pub info_bits: Vec<u8>,
    pub converged: bool,
    pub iterations: u32,
}

pub const DECODE_MAX_ITERATIONS: u32 = 10;
pub const MIN_SUM_NORMALIZATION: f64 = 0.75;

/// Normalized min-sum decoding of one codeword of channel LLRs
/// (positive = bit 0). Runs at most [`DECODE_MAX_ITERATIONS`] iterations and
/// reports convergence only for a valid, informative codeword: all-zero
/// inputs carry no information and are never reported as converged.
pub fn ldpc_decode(llrs: &[f64]) -> Result<DecodeResult> {
    if llrs.len() != CODEWORD_BITS {
        return Err(Error::Dimension { expected: CODEWORD_BITS, got: llrs.len() });
    }
    let code = code();
    let n_edges = code.edge_count();

    // Flat edge arrays, row-major.
    let mut c2v = vec![0.0f64; n_edges];
    let mut posterior: Vec<f64> = llrs.to_vec();

    let finish = |posterior: &[f64], iterations: u32| {
        let bits = hard_decision(posterior);
        let informative = posterior.iter().any(|&l| l != 0.0);
        let converged = informative && syndrome_ok(code, &bits);
        DecodeResult { info_bits: bits[..INFO_BITS].to_vec(), converged, iterations }
    };

    {
        let bits = hard_decision(&posterior);
        if posterior.iter().any(|&l| l != 0.0) && syndrome_ok(code, &bits) {
            return Ok(finish(&posterior, 0));
        }
    }

    for iter in 1..=DECODE_MAX_ITERATIONS {
        let mut next_posterior: Vec<f64> = llrs.to_vec();
        let mut e = 0usize;
        for row in &code.rows {
            // Variable-to-check messages for this row, then the two smallest
            // magnitudes and the sign product.
            let base = e;
            let mut sign = 1.0f64;
            let mut min1 = f64::INFINITY;
            let mut min2 = f64::INFINITY;
            let mut argmin = 0usize;
            for (k, &c) in row.iter().enumerate() {
                let v2c = posterior[c as usize] - c2v[base + k];
                c2v[base + k] = v2c; // reuse the slot to stage v2c
                if v2c < 0.0 {
                    sign = -sign;
                }
                let mag = v2c.abs();
                if mag < min1 {
                    min2 = min1;
                    min1 = mag;
                    argmin = k;
                } else if mag < min2 {
                    min2 = mag;
                }
            }
            for (k, &c) in row.iter().enumerate() {
                let v2c = c2v[base + k];
                let mag = if k == argmin { min2 } else { min1 };
                let self_sign = if v2c < 0.0 { -1.0 } else { 1.0 };
                let msg = MIN_SUM_NORMALIZATION * sign * self_sign * mag;
                c2v[base + k] = msg;
                next_posterior[c as usize] += msg;
            }
            e += row.len();
        }
        posterior = next_posterior;

        let bits = hard_decision(&posterior);
        if posterior.iter().any(|&l| l != 0.0) && syndrome_ok(code, &bits) {
            return Ok(finish(&posterior, iter));
        }
    }

    Ok(finish(&posterior, DECODE_MAX_ITERATIONS))
}
