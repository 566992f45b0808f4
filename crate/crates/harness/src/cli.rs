//! The `alter3` command line.
//!
//! Exit codes: 0 success, 1 configuration, usage or I/O error, 2 the run
//! completed but some trials were aborted by transport failures.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use alter3_core::script::validate_source;
use alter3_core::{
    compile_to_frames, cot_motion_pipeline, default_body_spec, render_script, run_msr_trial,
    MsrCase, Prop, Rotation, Verbosity,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::config::{FileConfig, RunConfig};
use crate::error::HarnessError;
use crate::files::read_text;
use crate::runner::{
    run_msr_battery, run_rhi_battery, write_msr_outputs, write_rhi_outputs, MsrSummary, RhiBattery,
    RhiSummary,
};
use crate::transcript::{parse_transcript, render_transcript};
use crate::transport::TransportSpec;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_ABORTED: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "alter3", version, about = "Simulated 43-axis humanoid driven by a language model")]
pub struct Cli {
    /// TOML or JSON run configuration; flags override its fields.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Print a machine-readable summary on standard output.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Mirror self-recognition batteries.
    Msr(MsrArgs),
    /// First-person knife/mop scenes with motion generation.
    Rhi(RhiArgs),
    /// Turn a movement description into a motion script.
    Motion(MotionArgs),
    /// Check a motion script file.
    Validate { path: PathBuf },
    /// Re-run a mirror-trial transcript and compare it byte for byte.
    Replay { path: PathBuf },
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// live, replay, replay:<path> or mock:<path>
    #[arg(long)]
    pub transport: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Tick and sampling interval in seconds.
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads for independent trials.
    #[arg(long)]
    pub parallel: Option<usize>,
    /// Save every trial's exchanges as cassettes under this directory.
    #[arg(long)]
    pub record: Option<PathBuf>,
    #[arg(long)]
    pub temperature: Option<f64>,
    #[arg(long, value_enum)]
    pub verbosity: Option<VerbosityArg>,
    #[arg(long)]
    pub misreport_rate: Option<f64>,
    #[arg(long)]
    pub noise_seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct MsrArgs {
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long)]
    pub trials: Option<u32>,
    #[arg(long, value_enum, default_value = "both")]
    pub case: CaseArg,
    #[arg(long)]
    pub max_steps: Option<u32>,
    #[arg(long)]
    pub mirror_distance: Option<f64>,
    /// Do not tell the agent that a mirror is present.
    #[arg(long)]
    pub unnamed_mirror: bool,
}

#[derive(Debug, Args)]
pub struct RhiArgs {
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long)]
    pub repeats: Option<u32>,
    #[arg(long, value_enum, default_value = "all")]
    pub prop: PropArg,
    /// 0, 90 or all
    #[arg(long, default_value = "all", value_parser = parse_rotation)]
    pub rotation: RotationArg,
}

#[derive(Debug, Args)]
pub struct MotionArgs {
    pub description: String,
    #[arg(long)]
    pub transport: Option<String>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub temperature: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CaseArg {
    Faithful,
    Random,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PropArg {
    Knife,
    Mop,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RotationArg {
    One(Rotation),
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VerbosityArg {
    Terse,
    Detailed,
}

fn parse_rotation(s: &str) -> Result<RotationArg, String> {
    if s == "all" {
        return Ok(RotationArg::All);
    }
    s.parse::<u32>()
        .ok()
        .and_then(Rotation::from_degrees)
        .map(RotationArg::One)
        .ok_or_else(|| format!("rotation must be 0, 90 or all, got {s:?}"))
}

impl RunArgs {
    fn file_config(&self) -> FileConfig {
        FileConfig {
            transport: self.transport.clone(),
            seed: self.seed,
            dt: self.dt,
            out_dir: self.out.clone(),
            parallel: self.parallel,
            record: self.record.clone(),
            temperature: self.temperature,
            verbosity: self.verbosity.map(|v| match v {
                VerbosityArg::Terse => Verbosity::Terse,
                VerbosityArg::Detailed => Verbosity::Detailed,
            }),
            misreport_rate: self.misreport_rate,
            noise_seed: self.noise_seed,
            ..FileConfig::default()
        }
    }
}

struct Io<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
    json: bool,
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{e}");
                    EXIT_CONFIG
                }
            };
        }
    };
    let mut io = Io {
        out,
        err,
        json: cli.json,
    };
    match dispatch(&cli, &mut io) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(io.err, "error: {e}");
            EXIT_CONFIG
        }
    }
}

fn load_config(path: Option<&Path>, flags: FileConfig) -> Result<RunConfig, HarnessError> {
    let base = match path {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    RunConfig::from_file_config(base.merge(flags))
}

fn dispatch(cli: &Cli, io: &mut Io<'_>) -> Result<i32, HarnessError> {
    let config_path = cli.config.as_deref();
    match &cli.command {
        Command::Msr(args) => {
            let flags = FileConfig {
                trials: args.trials,
                max_steps: args.max_steps,
                mirror_distance: args.mirror_distance,
                unnamed_mirror: args.unnamed_mirror.then_some(true),
                ..args.run.file_config()
            };
            cmd_msr(&load_config(config_path, flags)?, args.case, io)
        }
        Command::Rhi(args) => {
            let flags = FileConfig {
                repeats: args.repeats,
                ..args.run.file_config()
            };
            cmd_rhi(&load_config(config_path, flags)?, args.prop, args.rotation, io)
        }
        Command::Motion(args) => {
            let flags = FileConfig {
                transport: args.transport.clone(),
                dt: args.dt,
                temperature: args.temperature,
                ..FileConfig::default()
            };
            cmd_motion(&load_config(config_path, flags)?, &args.description, io)
        }
        Command::Validate { path } => cmd_validate(path, io),
        Command::Replay { path } => {
            let config = match config_path {
                Some(p) => FileConfig::load(p)?,
                None => FileConfig::default(),
            };
            cmd_replay(path, &config, io)
        }
    }
}

fn emit_json(io: &mut Io<'_>, value: &impl serde::Serialize) {
    if io.json {
        let _ = writeln!(io.out, "{}", serde_json::to_string(value).expect("summary serializes"));
    }
}

pub fn cmd_msr_cases(case: CaseArg) -> Vec<MsrCase> {
    match case {
        CaseArg::Faithful => vec![MsrCase::Faithful],
        CaseArg::Random => vec![MsrCase::Random],
        CaseArg::Both => vec![MsrCase::Faithful, MsrCase::Random],
    }
}

fn cmd_msr(config: &RunConfig, case: CaseArg, io: &mut Io<'_>) -> Result<i32, HarnessError> {
    let batteries = cmd_msr_cases(case)
        .into_iter()
        .map(|c| run_msr_battery(c, config))
        .collect::<Result<Vec<_>, _>>()?;
    let summary = MsrSummary::new(config, &batteries);
    write_msr_outputs(&config.out_dir, &batteries, &summary)?;
    for c in &summary.cases {
        let accuracy = c
            .accuracy
            .map_or_else(|| "n/a".to_string(), |a| format!("{a:.3}"));
        let _ = writeln!(
            io.err,
            "{}: {}/{} correct (accuracy {accuracy}); control {}, no control {}, inconclusive {}, aborted {}",
            c.case.key(),
            c.correct,
            c.trials,
            c.control,
            c.no_control,
            c.inconclusive,
            c.aborted
        );
    }
    emit_json(io, &summary);
    Ok(if summary.aborted() > 0 { EXIT_ABORTED } else { EXIT_OK })
}

fn cmd_rhi(
    config: &RunConfig,
    prop: PropArg,
    rotation: RotationArg,
    io: &mut Io<'_>,
) -> Result<i32, HarnessError> {
    let props = match prop {
        PropArg::Knife => vec![Prop::Knife],
        PropArg::Mop => vec![Prop::Mop],
        PropArg::All => vec![Prop::Knife, Prop::Mop],
    };
    let rotations = match rotation {
        RotationArg::One(r) => vec![r],
        RotationArg::All => vec![Rotation::Deg0, Rotation::Deg90],
    };
    let mut batteries = Vec::new();
    for p in &props {
        for r in &rotations {
            batteries.push(run_rhi_battery(*p, *r, config)?);
        }
    }
    let summary = RhiSummary::new(config, &batteries);
    write_rhi_outputs(&config.out_dir, &batteries, &summary)?;
    for c in &summary.conditions {
        let _ = writeln!(
            io.err,
            "{}: withdraw {}, release {}, grasp {}, other {}, aborted {} of {}; largest movement in {}",
            RhiBattery::set_name(c.prop, Rotation::from_degrees(c.rotation).expect("valid")),
            c.withdraw,
            c.release,
            c.grasp,
            c.other,
            c.aborted,
            c.repeats,
            c.dominant_group.as_deref().unwrap_or("n/a")
        );
    }
    emit_json(io, &summary);
    Ok(if summary.aborted() > 0 { EXIT_ABORTED } else { EXIT_OK })
}

fn cmd_motion(config: &RunConfig, description: &str, io: &mut Io<'_>) -> Result<i32, HarnessError> {
    let mut opened = config
        .transport
        .open("motion", "motion", &config.live)
        .map_err(|e| HarnessError::Config(e.to_string()))?;
    let script = match cot_motion_pipeline(&mut opened.transport, description) {
        Ok(script) => script,
        Err(e) => {
            let _ = writeln!(io.err, "error: {e}");
            if let alter3_core::PipelineError::Unparseable {
                narrative,
                script_text,
                diagnostics,
            } = &e
            {
                for d in diagnostics {
                    let _ = writeln!(io.err, "  {d}");
                }
                let _ = writeln!(io.err, "stage 1 reply:\n{}", narrative.trim_end());
                let _ = writeln!(io.err, "stage 2 reply:\n{}", script_text.trim_end());
            }
            return Ok(EXIT_CONFIG);
        }
    };
    let spec = default_body_spec();
    let frames = match compile_to_frames(&script, &spec, config.dt) {
        Ok(frames) => frames,
        Err(diags) => {
            for d in &diags {
                let _ = writeln!(io.err, "{d}");
            }
            return Ok(EXIT_CONFIG);
        }
    };
    let text = render_script(&script);
    if io.json {
        let axes: Vec<u8> = script.touched_axes().iter().map(|a| a.get()).collect();
        emit_json(
            io,
            &json!({"script": text, "frames": frames.len(), "touched_axes": axes}),
        );
    } else {
        let _ = write!(io.out, "{text}");
        let _ = writeln!(io.out, "# frames: {}", frames.len());
    }
    Ok(EXIT_OK)
}

fn cmd_validate(path: &Path, io: &mut Io<'_>) -> Result<i32, HarnessError> {
    let text = read_text(path)?;
    let diagnostics = validate_source(&default_body_spec(), &text);
    let errors = diagnostics.iter().filter(|d| d.is_error()).count();
    if io.json {
        let list: Vec<String> = diagnostics.iter().map(|d| d.to_string()).collect();
        emit_json(io, &json!({"path": path, "errors": errors, "diagnostics": list}));
    } else {
        for d in &diagnostics {
            let _ = writeln!(io.out, "{}:{d}", path.display());
        }
    }
    let _ = writeln!(
        io.err,
        "{}: {errors} errors, {} warnings",
        path.display(),
        diagnostics.len() - errors
    );
    Ok(if errors == 0 { EXIT_OK } else { EXIT_CONFIG })
}

fn cmd_replay(path: &Path, config: &FileConfig, io: &mut Io<'_>) -> Result<i32, HarnessError> {
    let original = read_text(path)?;
    let (_, footer) = parse_transcript(path, &original)?;
    let setup = footer.trial;
    let spec: TransportSpec = setup.transport.parse().map_err(HarnessError::Config)?;
    let live = config.live.clone().unwrap_or_default();
    let mut opened = spec
        .open("", "", &live)
        .map_err(|e| HarnessError::Config(format!("cannot reopen {spec}: {e}")))?;
    let mirror = setup.mirror().map_err(HarnessError::Config)?;
    let trial = run_msr_trial(
        setup.case,
        setup.index,
        setup.seed,
        &mut opened.transport,
        &mirror,
        &setup.agent,
    )
    .map_err(|e| HarnessError::Config(e.to_string()))?;
    let rerun = render_transcript(&trial, &setup);
    let identical = rerun == original;
    let first_difference = original
        .lines()
        .zip(rerun.lines())
        .position(|(a, b)| a != b)
        .map(|i| i + 1)
        .or_else(|| (!identical).then(|| original.lines().count().min(rerun.lines().count()) + 1));
    emit_json(
        io,
        &json!({"path": path, "identical": identical, "first_difference_line": first_difference}),
    );
    match first_difference {
        None => {
            let _ = writeln!(io.err, "{}: replay identical", path.display());
            Ok(EXIT_OK)
        }
        Some(line) => {
            let _ = writeln!(io.err, "{}: replay differs at line {line}", path.display());
            Ok(EXIT_CONFIG)
        }
    }
}
