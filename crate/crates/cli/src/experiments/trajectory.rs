//! Full beam-management protocol runs along moving-user trajectories:
//! sensing-assisted alignment against the exhaustive sector sweep, with an
//! ideal and an impaired front end on the sensing-assisted link.

use rayon::prelude::*;

use isac_core::mfe::ImpairmentConfig;
use isac_core::sched::{run_baseline_80211ad, run_isac, RunMetrics, Stage, TrajectoryKind};

use crate::config::ResolvedConfig;
use crate::output::{fmt, scalar, ExperimentOutput};
use crate::CliError;

pub(crate) fn kind_label(kind: TrajectoryKind) -> &'static str {
    match kind {
        TrajectoryKind::Radial => "radial",
        TrajectoryKind::Tangential => "tangential",
    }
}

fn stage_label(stage: Stage) -> &'static str {
    match stage {
        Stage::Radar => "radar",
        Stage::Training => "training",
        Stage::Data => "data",
    }
}

struct Spec {
    traj_idx: usize,
    protocol: &'static str,
    mfe: &'static str,
    impairments: ImpairmentConfig,
}

pub fn run(r: &ResolvedConfig) -> Result<ExperimentOutput, CliError> {
    let cfg = &r.file.trajectory;
    if cfg.trajectories.is_empty() {
        return Err(CliError::Config("trajectory needs at least one trajectory".into()));
    }

    let mut specs = Vec::new();
    for traj_idx in 0..cfg.trajectories.len() {
        specs.push(Spec {
            traj_idx,
            protocol: "isac",
            mfe: "ideal",
            impairments: ImpairmentConfig::default(),
        });
        specs.push(Spec {
            traj_idx,
            protocol: "isac",
            mfe: "impaired",
            impairments: cfg.impaired.clone(),
        });
        specs.push(Spec {
            traj_idx,
            protocol: "baseline",
            mfe: "ideal",
            impairments: ImpairmentConfig::default(),
        });
    }

    let runs = specs
        .par_iter()
        .map(|spec| {
            let mut pc = cfg.base.clone();
            pc.trajectory = cfg.trajectories[spec.traj_idx].clone();
            pc.impairments = spec.impairments.clone();
            match spec.protocol {
                "isac" => Ok(run_isac(&pc)?),
                _ => Ok(run_baseline_80211ad(&pc)?),
            }
        })
        .collect::<Result<Vec<RunMetrics>, CliError>>()?;

    let mut out = ExperimentOutput::new(&[
        "trajectory",
        "protocol",
        "mfe",
        "packet_idx",
        "stage",
        "beam_deg",
        "true_azimuth_deg",
        "snr_db",
        "ber",
        "evm_pct",
        "elapsed_s",
    ]);

    for (spec, m) in specs.iter().zip(&runs) {
        let traj = kind_label(cfg.trajectories[spec.traj_idx].kind);
        for e in &m.events {
            out.push_row(vec![
                traj.to_string(),
                spec.protocol.to_string(),
                spec.mfe.to_string(),
                e.packet_idx.to_string(),
                stage_label(e.stage).to_string(),
                fmt(e.beam_deg),
                fmt(e.true_azimuth_deg),
                fmt(e.snr_db),
                fmt(e.ber),
                fmt(e.evm_pct),
                fmt(e.elapsed_s),
            ]);
        }
        let tag = format!("{traj}_{}_{}", spec.protocol, spec.mfe);
        out.insert_metric(format!("throughput_bps_{tag}"), scalar(m.throughput_bps));
        out.insert_metric(
            format!("realignments_{tag}"),
            scalar(m.realignment_events as f64),
        );
        out.insert_metric(format!("delivered_bits_{tag}"), scalar(m.delivered_bits as f64));
        if spec.protocol == "isac" {
            out.insert_metric(format!("angle_rmse_deg_{tag}"), scalar(m.angle_rmse_deg));
        }
    }

    // Throughput cost of the impaired front end, per trajectory.
    for (traj_idx, tc) in cfg.trajectories.iter().enumerate() {
        let find = |proto: &str, mfe: &str| {
            specs
                .iter()
                .position(|s| s.traj_idx == traj_idx && s.protocol == proto && s.mfe == mfe)
                .map(|i| runs[i].throughput_bps)
        };
        if let (Some(ideal), Some(impaired)) = (find("isac", "ideal"), find("isac", "impaired")) {
            if ideal > 0.0 {
                out.insert_metric(
                    format!("impaired_loss_pct_{}", kind_label(tc.kind)),
                    scalar(100.0 * (1.0 - impaired / ideal)),
                );
            }
        }
    }
    Ok(out)
}
