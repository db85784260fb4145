//! Communication quality versus beam pointing error: EVM and BER with the
//! sector beam held a fixed number of degrees off the true azimuth, plus
//! the pointing error at which EVM crosses the QPSK limit and the measured
//! half-power beamwidths of the two array sizes.

use isac_core::channel::{array_factor, ArrayConfig};
use isac_core::sched::{
    angle_mismatch_sweep, evm_crossing_deg, MU_NUM_ELEMENTS, QPSK_EVM_LIMIT_PCT,
};

use crate::config::ResolvedConfig;
use crate::output::{fmt, scalar, ExperimentOutput};
use crate::CliError;

/// Half-power beamwidth of a uniform array, measured from the normalized
/// pattern by bisecting around the -3 dB point.
pub fn measured_hpbw_deg(num_elements: usize) -> f64 {
    let array = ArrayConfig { num_elements, ..ArrayConfig::default() };
    let target = 0.5f64.sqrt();
    let step = 1e-3;
    let mut prev = (0.0, array_factor(&array, 0.0, 0.0));
    let mut look = 0.0;
    while look < 90.0 {
        look += step;
        let value = array_factor(&array, look, 0.0);
        if value <= target {
            let (x0, v0) = prev;
            return 2.0 * (x0 + step * (v0 - target) / (v0 - value));
        }
        prev = (look, value);
    }
    180.0
}

pub fn run(r: &ResolvedConfig) -> Result<ExperimentOutput, CliError> {
    let cfg = &r.file.angle_mismatch;
    let points = angle_mismatch_sweep(cfg)?;

    let mut out =
        ExperimentOutput::new(&["mismatch_deg", "snr_db", "evm_pct", "evm_db", "ber"]);
    for p in &points {
        out.push_row(vec![
            fmt(p.mismatch_deg),
            fmt(p.snr_db),
            fmt(p.evm_pct),
            fmt(p.evm_db),
            fmt(p.ber),
        ]);
    }

    for &snr in &cfg.snr_db {
        let curve: Vec<(f64, f64)> = points
            .iter()
            .filter(|p| p.snr_db == snr)
            .map(|p| (p.mismatch_deg, p.evm_pct))
            .collect();
        if let Some(cross) = evm_crossing_deg(&curve, QPSK_EVM_LIMIT_PCT) {
            out.insert_metric(format!("evm_crossing_deg_snr{}", fmt(snr)), scalar(cross));
        }
    }

    // Beamwidth of record is the aperture closed form the link model steers
    // by; the pattern scan is kept alongside as a cross-check.
    let bs = ArrayConfig::default().num_elements;
    for n in [bs, MU_NUM_ELEMENTS] {
        let array = ArrayConfig { num_elements: n, ..ArrayConfig::default() };
        out.insert_metric(format!("hpbw_deg_{n}elem"), scalar(array.beamwidth_deg()));
        out.insert_metric(format!("hpbw_measured_deg_{n}elem"), scalar(measured_hpbw_deg(n)));
    }
    Ok(out)
}
