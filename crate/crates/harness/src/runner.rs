//! Experiment batteries over per-trial transports, with optional parallelism
//! and cassette recording.
//!
//! Output layout under the run's output directory:
//!
//! ```text
//! msr_summary.json
//! msr_faithful/report.json  report.csv  transcripts/trial_01.jsonl ...
//! rhi_summary.json
//! rhi_knife_0/trials.jsonl  trials.csv  delta.json  delta.csv  groups.csv  plot.json
//! ```

use std::path::Path;
use std::sync::atomic::{AtomicU32, Ordering};
use std::sync::Mutex;
use std::thread;

use alter3_core::analysis::{
    aborted_rhi_trial, rhi_delta_report, unopened_trial, AxisDeltaReport, RhiTrial,
};
use alter3_core::{
    run_msr_trial, run_rhi_trial, MsrCase, MsrReport, MsrTrial, Prop, ResponseClass, Rotation,
    Transport, VerdictKind,
};
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{HarnessError, Result};
use crate::export::{
    axis_report_csv, group_report_csv, msr_report_csv, plot_json, rhi_trials_csv,
    rhi_trials_jsonl, to_json,
};
use crate::files::write_text;
use crate::transcript::{render_transcript, TrialSetup};
use crate::transport::{item_name, Opened, Recorder, TransportSpec};

/// Runs `job(1..=count)` on up to `parallel` threads; results come back in index order.
pub fn run_indexed<R, F>(count: u32, parallel: usize, job: F) -> Vec<R>
where
    R: Send,
    F: Fn(u32) -> R + Sync,
{
    if parallel <= 1 || count <= 1 {
        return (1..=count).map(job).collect();
    }
    let next = AtomicU32::new(1);
    let results = Mutex::new(Vec::with_capacity(count as usize));
    thread::scope(|scope| {
        for _ in 0..parallel.min(count as usize) {
            scope.spawn(|| loop {
                let index = next.fetch_add(1, Ordering::Relaxed);
                if index > count {
                    break;
                }
                let result = job(index);
                results.lock().expect("no worker panicked").push((index, result));
            });
        }
    });
    let mut results = results.into_inner().expect("no worker panicked");
    results.sort_by_key(|(index, _)| *index);
    results.into_iter().map(|(_, r)| r).collect()
}

/// Opens the trial's transport, runs `body` on it, and saves a recording when asked.
fn with_transport<R>(
    config: &RunConfig,
    set: &str,
    item: &str,
    body: impl FnOnce(&mut dyn Transport) -> R,
) -> Result<std::result::Result<(R, TransportSpec), (alter3_core::TransportError, TransportSpec)>> {
    let opened: Opened = match config.transport.open(set, item, &config.live) {
        Ok(opened) => opened,
        Err(e) => return Ok(Err((e, config.transport.resolve(set, item)))),
    };
    match &config.record {
        Some(dir) => {
            let recorder = Recorder::new(dir, set, item);
            let mut recording = recorder.wrap(opened);
            let out = body(&mut recording);
            let source = recorder.save(recording.cassette())?;
            Ok(Ok((out, source)))
        }
        None => {
            let Opened {
                mut transport,
                source,
                ..
            } = opened;
            let out = body(&mut transport);
            Ok(Ok((out, source)))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MsrBattery {
    pub report: MsrReport,
    pub setups: Vec<TrialSetup>,
}

pub fn run_msr_battery(case: MsrCase, config: &RunConfig) -> Result<MsrBattery> {
    let results = run_indexed(config.trials, config.parallel, |index| {
        let seed = config.seed.wrapping_add(u64::from(index - 1));
        let item = item_name("trial", index);
        let ran = with_transport(config, case.key(), &item, |transport| {
            run_msr_trial(case, index, seed, transport, &config.mirror, &config.agent)
        })?;
        let (trial, source) = match ran {
            Ok((trial, source)) => (
                trial.map_err(|e| HarnessError::Config(e.to_string()))?,
                source,
            ),
            Err((reason, source)) => (unopened_trial(case, index, seed, reason), source),
        };
        let setup = TrialSetup {
            case,
            index,
            seed,
            transport: source.to_string(),
            mirror_distance: config.mirror.mirror_distance(),
            agent: config.agent.clone(),
        };
        Ok::<_, HarnessError>((trial, setup))
    });
    let mut trials: Vec<MsrTrial> = Vec::with_capacity(results.len());
    let mut setups = Vec::with_capacity(results.len());
    for result in results {
        let (trial, setup) = result?;
        trials.push(trial);
        setups.push(setup);
    }
    Ok(MsrBattery {
        report: MsrReport::from_trials(case, trials),
        setups,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RhiBattery {
    pub prop: Prop,
    pub rotation: Rotation,
    pub trials: Vec<RhiTrial>,
    /// Absent when every repeat was aborted.
    pub report: Option<AxisDeltaReport>,
}

impl RhiBattery {
    pub fn set_name(prop: Prop, rotation: Rotation) -> String {
        format!("rhi_{}_{}", prop.key(), rotation.degrees())
    }

    pub fn count(&self, class: ResponseClass) -> usize {
        self.trials
            .iter()
            .filter(|t| !t.aborted && t.classification == class)
            .count()
    }

    pub fn aborted(&self) -> usize {
        self.trials.iter().filter(|t| t.aborted).count()
    }
}

pub fn run_rhi_battery(prop: Prop, rotation: Rotation, config: &RunConfig) -> Result<RhiBattery> {
    if config.repeats == 0 {
        return Err(HarnessError::Config("repeats must be at least 1".into()));
    }
    let set = RhiBattery::set_name(prop, rotation);
    let results = run_indexed(config.repeats, config.parallel, |repeat| {
        let seed = config.seed.wrapping_add(u64::from(repeat - 1));
        let item = item_name("repeat", repeat);
        let ran = with_transport(config, &set, &item, |transport| {
            run_rhi_trial(prop, rotation, repeat, transport, seed, &config.rhi)
        })?;
        Ok::<_, HarnessError>(match ran {
            Ok((Ok(trial), _)) => trial,
            Ok((Err(reason), _)) | Err((reason, _)) => {
                aborted_rhi_trial(prop, rotation, repeat, &reason)
            }
        })
    });
    let trials = results.into_iter().collect::<Result<Vec<_>>>()?;
    let report = rhi_delta_report(&trials).ok();
    Ok(RhiBattery {
        prop,
        rotation,
        trials,
        report,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MsrCaseSummary {
    pub case: MsrCase,
    pub trials: usize,
    pub correct: usize,
    /// Absent for empty batteries and for live runs, which are not scored.
    pub accuracy: Option<f64>,
    pub aborted: usize,
    pub control: usize,
    pub no_control: usize,
    pub inconclusive: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MsrSummary {
    pub nondeterministic: bool,
    pub transport: String,
    pub seed: u64,
    pub cases: Vec<MsrCaseSummary>,
}

impl MsrSummary {
    pub fn new(config: &RunConfig, batteries: &[MsrBattery]) -> Self {
        let live = config.transport.is_live();
        let cases = batteries
            .iter()
            .map(|b| {
                let r = &b.report;
                MsrCaseSummary {
                    case: r.case,
                    trials: r.trials.len(),
                    correct: r.correct(),
                    accuracy: if live { None } else { r.accuracy },
                    aborted: r.aborted(),
                    control: r.count(VerdictKind::Control),
                    no_control: r.count(VerdictKind::NoControl),
                    inconclusive: r.count(VerdictKind::Inconclusive),
                }
            })
            .collect();
        MsrSummary {
            nondeterministic: live,
            transport: config.transport.to_string(),
            seed: config.seed,
            cases,
        }
    }

    pub fn aborted(&self) -> usize {
        self.cases.iter().map(|c| c.aborted).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RhiConditionSummary {
    pub prop: Prop,
    pub rotation: u32,
    pub repeats: usize,
    pub withdraw: usize,
    pub release: usize,
    pub grasp: usize,
    pub other: usize,
    pub aborted: usize,
    pub dominant_group: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RhiSummary {
    pub nondeterministic: bool,
    pub transport: String,
    pub seed: u64,
    pub conditions: Vec<RhiConditionSummary>,
}

impl RhiSummary {
    pub fn new(config: &RunConfig, batteries: &[RhiBattery]) -> Self {
        let conditions = batteries
            .iter()
            .map(|b| RhiConditionSummary {
                prop: b.prop,
                rotation: b.rotation.degrees(),
                repeats: b.trials.len(),
                withdraw: b.count(ResponseClass::Withdraw),
                release: b.count(ResponseClass::Release),
                grasp: b.count(ResponseClass::Grasp),
                other: b.count(ResponseClass::Other),
                aborted: b.aborted(),
                dominant_group: b.report.as_ref().map(|r| r.dominant_group().key().to_string()),
            })
            .collect();
        RhiSummary {
            nondeterministic: config.transport.is_live(),
            transport: config.transport.to_string(),
            seed: config.seed,
            conditions,
        }
    }

    pub fn aborted(&self) -> usize {
        self.conditions.iter().map(|c| c.aborted).sum()
    }
}

pub fn write_msr_outputs(out_dir: &Path, batteries: &[MsrBattery], summary: &MsrSummary) -> Result<()> {
    for battery in batteries {
        let dir = out_dir.join(battery.report.case.key());
        write_text(&dir.join("report.json"), &to_json(&battery.report))?;
        write_text(&dir.join("report.csv"), &msr_report_csv(&battery.report))?;
        for (trial, setup) in battery.report.trials.iter().zip(&battery.setups) {
            let name = format!("{}.jsonl", item_name("trial", trial.index));
            write_text(
                &dir.join("transcripts").join(name),
                &render_transcript(trial, setup),
            )?;
        }
    }
    write_text(&out_dir.join("msr_summary.json"), &to_json(summary))
}

pub fn write_rhi_outputs(out_dir: &Path, batteries: &[RhiBattery], summary: &RhiSummary) -> Result<()> {
    for battery in batteries {
        let dir = out_dir.join(RhiBattery::set_name(battery.prop, battery.rotation));
        write_text(&dir.join("trials.jsonl"), &rhi_trials_jsonl(&battery.trials))?;
        write_text(&dir.join("trials.csv"), &rhi_trials_csv(&battery.trials))?;
        if let Some(report) = &battery.report {
            write_text(&dir.join("delta.json"), &to_json(report))?;
            write_text(&dir.join("delta.csv"), &axis_report_csv(report))?;
            write_text(&dir.join("groups.csv"), &group_report_csv(report))?;
            write_text(&dir.join("plot.json"), &plot_json(report))?;
        }
    }
    write_text(&out_dir.join("rhi_summary.json"), &to_json(summary))
}
