//! Directional OFDM physical layer.
//!
//! Transmit: per-codeword scrambling, rate-3/4 low-density parity-check
//! coding, Gray-mapped QPSK spread over paired tones, 512-bin OFDM with a
//! 128-sample cyclic prefix, and assembly behind the single-carrier
//! synchronization preamble. Receive: least-squares channel estimation from
//! the known header symbol, per-tone MMSE equalization, soft demapping, and
//! min-sum decoding. Optional fixed-point quantizers snap the datapath at
//! stage boundaries.

pub mod equalize;
pub mod grid;
pub mod ldpc;
pub mod modulation;
pub mod ofdm;
pub mod scramble;

use crate::error::{Error, Result};
use crate::frame::{build_preamble, golay_generate, Packet80211ad, PREAMBLE_LEN};
use crate::fxp::StageFormats;
use grid::ResourceGrid;
use num_complex::Complex64;
use ofdm::OfdmSymbol;
use serde::{Deserialize, Serialize};

/// Information bits carried by each data symbol (one codeword per symbol).
pub const INFO_BITS_PER_SYMBOL: usize = ldpc::INFO_BITS;
/// QPSK symbols carried by each data symbol.
pub const QPSK_PER_SYMBOL: usize = grid::NUM_DATA;
/// Preamble length after resampling to the OFDM rate.
pub const PREAMBLE_OFDM_LEN: usize = PREAMBLE_LEN * 3 / 2;
/// Generator size for the preamble's complementary pair (length 128).
pub const GOLAY_LOG2_LEN: u32 = 7;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhyConfig {
    /// Data symbols per packet; each carries one codeword.
    pub num_data_symbols: usize,
    pub scrambler_seed: u8,
    /// Stage word lengths; disabled means pure floating point.
    pub formats: StageFormats,
    /// Power-of-two attenuation applied before the transmit DAC quantizer
    /// and removed exactly afterwards. Models running the converter backed
    /// off from full scale, which costs effective bits.
    pub dac_backoff_pow2: u32,
}

impl Default for PhyConfig {
    fn default() -> Self {
        Self {
            num_data_symbols: 10,
            scrambler_seed: scramble::DEFAULT_SEED,
            formats: StageFormats::default(),
            dac_backoff_pow2: 0,
        }
    }
}

impl PhyConfig {
    pub fn payload_bits(&self) -> usize {
        self.num_data_symbols * INFO_BITS_PER_SYMBOL
    }

    pub fn packet_len(&self) -> usize {
        PREAMBLE_OFDM_LEN + (self.num_data_symbols + 1) * ofdm::SYMBOL_LEN
    }
}

/// A transmitted packet plus the references the tests and metrics need.
#[derive(Debug, Clone)]
pub struct TxPacket {
    pub packet: Packet80211ad,
    /// Assembled baseband stream at the OFDM rate, after the optional DAC
    /// quantization stage.
    pub samples: Vec<Complex64>,
    /// QPSK symbols before tone pairing, flattened across data symbols; the
    /// reference for error-vector and bit-error measurements.
    pub reference_symbols: Vec<Complex64>,
    pub saturations: u64,
}

/// The header training symbol shared by every packet.
pub fn header_symbol() -> OfdmSymbol {
    ofdm::modulate(grid::header_grid())
}

/// Encode and modulate one packet.
pub fn tx_chain(payload: &[u8], cfg: &PhyConfig) -> Result<TxPacket> {
    let n = cfg.num_data_symbols;
    if n == 0 {
        return Err(Error::config("packet needs at least one data symbol"));
    }
    if payload.len() != cfg.payload_bits() {
        return Err(Error::Dimension { expected: cfg.payload_bits(), got: payload.len() });
    }

    let mut quant = cfg.formats.tx_quantizer();
    let mut reference_symbols = Vec::with_capacity(n * QPSK_PER_SYMBOL);
    let mut data = Vec::with_capacity(n);
    for chunk in payload.chunks(INFO_BITS_PER_SYMBOL) {
        let scrambled = scramble::scramble(chunk, cfg.scrambler_seed)?;
        let coded = ldpc::ldpc_encode(&scrambled)?;
        let mut symbols: Vec<Complex64> =
            coded.chunks(2).map(|b| modulation::qpsk_point(b[0], b[1])).collect();
        reference_symbols.extend_from_slice(&symbols);
        modulation::tone_pair_transform(&mut symbols)?;
        if let Some(q) = quant.as_mut() {
            q.quantize_slice(&mut symbols);
        }
        let mut sym = ofdm::modulate(&ResourceGrid::from_data(&symbols)?);
        if let Some(q) = quant.as_mut() {
            q.quantize_slice(&mut sym.time_samples);
        }
        data.push(sym);
    }

    let packet = Packet80211ad {
        preamble: build_preamble(&golay_generate(GOLAY_LOG2_LEN)?)?,
        header: header_symbol(),
        data,
        payload_bits: payload.to_vec(),
    };
    let mut samples = packet.assemble().samples;
    if let Some(q) = quant.as_mut() {
        // Back off, quantize at the converter, and undo the back-off. The
        // scale is a power of two so the undo is exact; only the grid snap
        // survives.
        let down = 2f64.powi(-(cfg.dac_backoff_pow2 as i32));
        let up = 2f64.powi(cfg.dac_backoff_pow2 as i32);
        for s in samples.iter_mut() {
            *s = q.quantize_complex(*s * down) * up;
        }
    }
    let saturations = quant.map(|q| q.saturation_count()).unwrap_or(0);

    Ok(TxPacket { packet, samples, reference_symbols, saturations })
}

/// Receive-side outputs: decoded bits plus the equalized constellation and
/// per-codeword decoder status.
#[derive(Debug, Clone)]
pub struct RxResult {
    pub payload_bits: Vec<u8>,
    /// Equalized QPSK symbols in the same order as the transmit reference.
    pub constellation: Vec<Complex64>,
    pub codeword_converged: Vec<bool>,
    pub noise_var: f64,
    pub saturations: u64,
}

/// Demodulate and decode one packet from a received stream. `sync_offset`
/// is the index of the packet's first preamble sample; timing recovery is
/// assumed ideal.
pub fn rx_chain(samples: &[Complex64], sync_offset: usize, cfg: &PhyConfig) -> Result<RxResult> {
    let n = cfg.num_data_symbols;
    let start = sync_offset + PREAMBLE_OFDM_LEN;
    let end = sync_offset + cfg.packet_len();
    if samples.len() < end {
        return Err(Error::Dimension { expected: end, got: samples.len() });
    }

    let mut window = samples[start..end].to_vec();
    let mut quant = cfg.formats.rx_quantizer();
    if let Some(q) = quant.as_mut() {
        q.quantize_slice(&mut window);
    }

    let est = equalize::ls_estimate(
        &ofdm::demodulate(&window[..ofdm::SYMBOL_LEN])?,
        grid::header_grid(),
    )?;

    let mut payload_bits = Vec::with_capacity(cfg.payload_bits());
    let mut constellation = Vec::with_capacity(n * QPSK_PER_SYMBOL);
    let mut codeword_converged = Vec::with_capacity(n);
    for i in 0..n {
        let lo = (i + 1) * ofdm::SYMBOL_LEN;
        let rx_grid = ofdm::demodulate(&window[lo..lo + ofdm::SYMBOL_LEN])?;
        let (mut symbols, scales) = equalize::mmse_equalize(&rx_grid, &est);
        modulation::tone_pair_transform(&mut symbols)?;
        // Each recovered symbol mixes two tones; average their reliabilities.
        let half = scales.len() / 2;
        let paired: Vec<f64> = (0..scales.len())
            .map(|j| 0.5 * (scales[j % half] + scales[j % half + half]))
            .collect();
        let llrs = modulation::qpsk_soft_demod(&symbols, &paired)?;
        let decoded = ldpc::ldpc_decode(&llrs)?;
        payload_bits.extend(scramble::scramble(&decoded.info_bits, cfg.scrambler_seed)?);
        codeword_converged.push(decoded.converged);
        constellation.extend_from_slice(&symbols);
    }

    Ok(RxResult {
        payload_bits,
        constellation,
        codeword_converged,
        noise_var: est.noise_var,
        saturations: quant.map(|q| q.saturation_count()).unwrap_or(0),
    })
}

/// Root-mean-square error vector magnitude of `measured` against
/// `reference`, as a linear ratio (multiply by 100 for percent).
pub fn evm_rms(measured: &[Complex64], reference: &[Complex64]) -> f64 {
    assert_eq!(measured.len(), reference.len());
    assert!(!reference.is_empty());
    let err: f64 =
        measured.iter().zip(reference).map(|(m, r)| (m - r).norm_sqr()).sum();
    let pwr: f64 = reference.iter().map(|r| r.norm_sqr()).sum();
    (err / pwr).sqrt()
}

pub fn count_bit_errors(a: &[u8], b: &[u8]) -> usize {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}
