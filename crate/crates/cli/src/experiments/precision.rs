//! Throughput versus radar angle-grid resolution: a finer grid estimates
//! the user azimuth more precisely but costs proportionally more map
//! processing time per alignment.

use rayon::prelude::*;

use isac_core::sched::{run_isac, RunMetrics};

use crate::config::ResolvedConfig;
use crate::output::{fmt, scalar, ExperimentOutput};
use crate::CliError;

pub fn run(r: &ResolvedConfig) -> Result<ExperimentOutput, CliError> {
    let cfg = &r.file.precision_tradeoff;
    if cfg.angle_step_deg.is_empty() {
        return Err(CliError::Config("precision_tradeoff needs at least one angle step".into()));
    }

    let runs = cfg
        .angle_step_deg
        .par_iter()
        .map(|&step| {
            let mut pc = cfg.base.clone();
            pc.angle_step_deg = step;
            Ok(run_isac(&pc)?)
        })
        .collect::<Result<Vec<RunMetrics>, CliError>>()?;

    let mut out = ExperimentOutput::new(&[
        "angle_step_deg",
        "trajectory",
        "throughput_bps",
        "realignment_events",
        "delivered_bits",
        "total_time_s",
        "angle_rmse_deg",
        "rsp_time_s",
    ]);
    let traj = super::trajectory::kind_label(cfg.base.trajectory.kind);

    for (&step, m) in cfg.angle_step_deg.iter().zip(&runs) {
        let rsp_time = cfg.base.timing.rsp_time_s(step)?;
        out.push_row(vec![
            fmt(step),
            traj.to_string(),
            fmt(m.throughput_bps),
            m.realignment_events.to_string(),
            m.delivered_bits.to_string(),
            fmt(m.total_time_s),
            fmt(m.angle_rmse_deg),
            fmt(rsp_time),
        ]);
        out.insert_metric(format!("throughput_bps_step{}", fmt(step)), scalar(m.throughput_bps));
        out.insert_metric(
            format!("realignments_step{}", fmt(step)),
            scalar(m.realignment_events as f64),
        );
        out.insert_metric(format!("rsp_time_s_step{}", fmt(step)), scalar(rsp_time));
    }
    Ok(out)
}
