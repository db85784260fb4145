//! Closed-form link budget: received SNR and margin versus range, the
//! maximum closing range, and the cascaded noise figures of the receive
//! chains.

use isac_core::mfe::{cascade_noise_figure_db, comm_rx_chain, radar_rx_chain};

use crate::config::ResolvedConfig;
use crate::output::{fmt, scalar, ExperimentOutput};
use crate::CliError;

pub fn run(r: &ResolvedConfig) -> Result<ExperimentOutput, CliError> {
    let cfg = &r.file.link_budget;
    if !(cfg.range_step_m > 0.0) {
        return Err(CliError::Config("link_budget.range_step_m must be positive".into()));
    }
    if cfg.range_max_m < cfg.range_min_m || !(cfg.range_min_m > 0.0) {
        return Err(CliError::Config("link_budget range bounds must satisfy 0 < min <= max".into()));
    }

    let b = &cfg.budget;
    let mut out = ExperimentOutput::new(&["range_m", "received_snr_db", "margin_db"]);
    let steps = ((cfg.range_max_m - cfg.range_min_m) / cfg.range_step_m).floor() as usize + 1;
    for i in 0..steps {
        let range = cfg.range_min_m + i as f64 * cfg.range_step_m;
        let snr = b.received_snr_db(range);
        out.push_row(vec![fmt(range), fmt(snr), fmt(snr - b.min_snr_db)]);
    }

    out.insert_metric("max_range_m", scalar(b.solve_max_range()?));
    out.insert_metric("noise_floor_dbm", scalar(b.noise_floor_dbm()));
    out.insert_metric("radar_rx_nf_db", scalar(cascade_noise_figure_db(&radar_rx_chain())?));
    out.insert_metric("comm_rx_nf_db", scalar(cascade_noise_figure_db(&comm_rx_chain())?));
    Ok(out)
}
