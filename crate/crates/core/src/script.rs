//! Timed-keyframe motion scripts.
//!
//! ```text
//! # comments and blank lines are ignored
//! motion wave
//! at 0.0: 30=0.2
//! at 1.0: 30=0.9, 33=0.7
//! ```
//!
//! Parsing never fails fast: every malformed line produces one diagnostic and
//! the parser keeps going, so a model-written script can be repaired from the
//! full list. Times and values are quantized to thousandths on parse, which is
//! the resolution of the wire protocol and of the canonical rendering.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::body::{AxisId, BodyError, BodySpec, BodyState, Pose, AXIS_COUNT};
use crate::protocol::{Frame, Millis};

const TIME_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Keyframe {
    /// Seconds from script start.
    pub at: f64,
    /// Axes not listed keep interpolating between their own keyframes.
    pub targets: BTreeMap<AxisId, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotionScript {
    pub name: String,
    pub frames: Vec<Keyframe>,
}

impl MotionScript {
    pub fn touched_axes(&self) -> BTreeSet<AxisId> {
        self.frames
            .iter()
            .flat_map(|k| k.targets.keys().copied())
            .collect()
    }

    pub fn duration(&self) -> f64 {
        self.frames.last().map_or(0.0, |k| k.at)
    }

    /// Value of each touched axis after its last keyframe.
    pub fn final_targets(&self) -> BTreeMap<AxisId, f64> {
        let mut out = BTreeMap::new();
        for frame in &self.frames {
            out.extend(frame.targets.iter().map(|(a, v)| (*a, *v)));
        }
        out
    }
}

impl fmt::Display for MotionScript {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_script(self))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagnosticKind {
    Syntax,
    RangeViolation,
    TimeOrder,
    UnknownAxis,
    /// The body cannot cover the gap between two keyframes at its slew rate.
    Unreachable,
}

impl fmt::Display for DiagnosticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DiagnosticKind::Syntax => "syntax",
            DiagnosticKind::RangeViolation => "range",
            DiagnosticKind::TimeOrder => "time-order",
            DiagnosticKind::UnknownAxis => "unknown-axis",
            DiagnosticKind::Unreachable => "unreachable",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptDiagnostic {
    /// One-based source line.
    pub line: u32,
    pub kind: DiagnosticKind,
    pub severity: Severity,
    pub message: String,
}

impl ScriptDiagnostic {
    fn error(line: u32, kind: DiagnosticKind, message: impl Into<String>) -> Self {
        ScriptDiagnostic {
            line,
            kind,
            severity: Severity::Error,
            message: message.into(),
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for ScriptDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let level = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "line {}: {level}[{}]: {}", self.line, self.kind, self.message)
    }
}

fn quantize(x: f64) -> f64 {
    libm::round(x * 1000.0) / 1000.0
}

struct Parsed {
    script: MotionScript,
    keyframe_lines: Vec<u32>,
}

pub fn parse_script(text: &str) -> Result<MotionScript, Vec<ScriptDiagnostic>> {
    parse_with_lines(text).map(|p| p.script)
}

fn parse_with_lines(text: &str) -> Result<Parsed, Vec<ScriptDiagnostic>> {
    let mut diags = Vec::new();
    let mut name: Option<(u32, String)> = None;
    let mut frames: Vec<Keyframe> = Vec::new();
    let mut keyframe_lines = Vec::new();
    let mut last_at: Option<f64> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx as u32 + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if name.is_none() {
            if let Some(rest) = line
                .strip_prefix("motion")
                .filter(|r| r.starts_with(char::is_whitespace))
            {
                name = Some((line_no, rest.trim().to_string()));
                continue;
            }
            diags.push(ScriptDiagnostic::error(
                line_no,
                DiagnosticKind::Syntax,
                "expected header `motion <name>`",
            ));
            // reported once; a keyframe on this line is still checked
            name = Some((line_no, String::new()));
            if !line.starts_with("at") {
                continue;
            }
        }
        let (at, frame) = parse_keyframe(line, line_no, &mut diags);
        let Some(at) = at else { continue };
        if let Some(prev) = last_at.filter(|prev| at <= *prev) {
            // only reported for lines that are otherwise well formed
            if frame.is_some() {
                diags.push(ScriptDiagnostic::error(
                    line_no,
                    DiagnosticKind::TimeOrder,
                    alloc::format!("keyframe at {at:.3} s does not come after {prev:.3} s"),
                ));
            }
            continue;
        }
        last_at = Some(at);
        if let Some(frame) = frame {
            frames.push(frame);
            keyframe_lines.push(line_no);
        }
    }

    let name = match name {
        Some((_, name)) => name,
        None => {
            diags.push(ScriptDiagnostic::error(
                1,
                DiagnosticKind::Syntax,
                "empty script: expected header `motion <name>`",
            ));
            String::new()
        }
    };
    if diags.is_empty() && frames.is_empty() {
        diags.push(ScriptDiagnostic::error(
            text.lines().count().max(1) as u32,
            DiagnosticKind::Syntax,
            "script has no keyframes",
        ));
    }
    if diags.is_empty() {
        Ok(Parsed {
            script: MotionScript { name, frames },
            keyframe_lines,
        })
    } else {
        Err(diags)
    }
}

/// The keyframe time when it parsed, and the keyframe when the whole line did.
fn parse_keyframe(
    line: &str,
    line_no: u32,
    diags: &mut Vec<ScriptDiagnostic>,
) -> (Option<f64>, Option<Keyframe>) {
    let syntax = |msg: &str| ScriptDiagnostic::error(line_no, DiagnosticKind::Syntax, msg);
    let Some(rest) = line
        .strip_prefix("at")
        .filter(|r| r.starts_with(char::is_whitespace))
    else {
        diags.push(syntax("expected `at <seconds>: <axis>=<value>, ...`"));
        return (None, None);
    };
    let Some((time, body)) = rest.split_once(':') else {
        diags.push(syntax("missing `:` after the keyframe time"));
        return (None, None);
    };
    let at = match time.trim().parse::<f64>() {
        Ok(t) if t.is_finite() && t >= 0.0 => quantize(t),
        _ => {
            diags.push(syntax("keyframe time must be a finite number of seconds >= 0"));
            return (None, None);
        }
    };
    if body.trim().is_empty() {
        diags.push(syntax("keyframe lists no axis targets"));
        return (Some(at), None);
    }
    let mut targets = BTreeMap::new();
    let mut ok = true;
    for item in body.split(',') {
        let Some((axis, value)) = item.split_once('=') else {
            diags.push(syntax("expected `<axis>=<value>`"));
            ok = false;
            break;
        };
        let axis = match axis.trim().parse::<u64>() {
            Ok(n) => match AxisId::new(n.min(u64::from(u32::MAX)) as u32) {
                Ok(id) => id,
                Err(_) => {
                    diags.push(ScriptDiagnostic::error(
                        line_no,
                        DiagnosticKind::UnknownAxis,
                        alloc::format!("axis {n} is outside 1..=43"),
                    ));
                    ok = false;
                    break;
                }
            },
            Err(_) => {
                diags.push(syntax("axis must be an integer"));
                ok = false;
                break;
            }
        };
        let value = match value.trim().parse::<f64>() {
            Ok(v) if v.is_finite() => v,
            _ => {
                diags.push(syntax("value must be a finite number"));
                ok = false;
                break;
            }
        };
        if !(0.0..=1.0).contains(&value) {
            diags.push(ScriptDiagnostic::error(
                line_no,
                DiagnosticKind::RangeViolation,
                alloc::format!("axis {axis} value {value} is outside [0, 1]"),
            ));
            ok = false;
            break;
        }
        if targets.insert(axis, quantize(value)).is_some() {
            diags.push(syntax("axis listed twice in one keyframe"));
            ok = false;
            break;
        }
    }
    (Some(at), ok.then_some(Keyframe { at, targets }))
}

/// Canonical text: times and values with three decimals, axes ascending.
pub fn render_script(script: &MotionScript) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "motion {}", script.name);
    for frame in &script.frames {
        let _ = write!(out, "at {:.3}:", frame.at);
        for (i, (axis, value)) in frame.targets.iter().enumerate() {
            let sep = if i == 0 { " " } else { ", " };
            let _ = write!(out, "{sep}{axis}={value:.3}");
        }
        out.push('\n');
    }
    out
}

/// Checks a script against a body. Lines refer to the canonical rendering
/// (keyframe `k` on line `k + 2`); see [`validate_source`] for source lines.
pub fn validate_script(spec: &BodySpec, script: &MotionScript) -> Vec<ScriptDiagnostic> {
    let mut diags = Vec::new();
    if script.frames.is_empty() {
        diags.push(ScriptDiagnostic::error(
            1,
            DiagnosticKind::Syntax,
            "script has no keyframes",
        ));
        return diags;
    }
    let mut last: BTreeMap<AxisId, (f64, f64)> = BTreeMap::new();
    let mut prev_at: Option<f64> = None;
    for (k, frame) in script.frames.iter().enumerate() {
        let line = k as u32 + 2;
        if !(frame.at.is_finite() && frame.at >= 0.0) {
            diags.push(ScriptDiagnostic::error(
                line,
                DiagnosticKind::Syntax,
                "keyframe time must be a finite number of seconds >= 0",
            ));
            continue;
        }
        if let Some(prev) = prev_at {
            if frame.at <= prev {
                diags.push(ScriptDiagnostic::error(
                    line,
                    DiagnosticKind::TimeOrder,
                    alloc::format!("keyframe at {:.3} s does not come after {:.3} s", frame.at, prev),
                ));
                continue;
            }
        }
        prev_at = Some(frame.at);
        for (&axis, &value) in &frame.targets {
            let limits = spec.axis(axis);
            if !(value.is_finite() && value >= limits.min && value <= limits.max) {
                diags.push(ScriptDiagnostic::error(
                    line,
                    DiagnosticKind::RangeViolation,
                    alloc::format!(
                        "axis {axis} value {value} is outside [{}, {}]",
                        limits.min,
                        limits.max
                    ),
                ));
                continue;
            }
            if let Some(&(at, from)) = last.get(&axis) {
                let reach = limits.max_rate * (frame.at - at);
                if (value - from).abs() > reach + TIME_EPS {
                    diags.push(ScriptDiagnostic {
                        line,
                        kind: DiagnosticKind::Unreachable,
                        severity: Severity::Warning,
                        message: alloc::format!(
                            "axis {axis} moves {:.3} in {:.3} s but can cover at most {:.3}",
                            (value - from).abs(),
                            frame.at - at,
                            reach
                        ),
                    });
                }
            }
            last.insert(axis, (frame.at, value));
        }
    }
    diags
}

/// Parses and validates source text, reporting diagnostics against source lines.
pub fn validate_source(spec: &BodySpec, text: &str) -> Vec<ScriptDiagnostic> {
    match parse_with_lines(text) {
        Err(diags) => diags,
        Ok(parsed) => validate_script(spec, &parsed.script)
            .into_iter()
            .map(|mut d| {
                if d.line >= 2 {
                    if let Some(&src) = parsed.keyframe_lines.get(d.line as usize - 2) {
                        d.line = src;
                    }
                }
                d
            })
            .collect(),
    }
}

/// Value of one axis at time `t`, or `None` before its first keyframe.
fn axis_value(script: &MotionScript, axis: AxisId, t: f64) -> Option<f64> {
    let mut before: Option<(f64, f64)> = None;
    for frame in &script.frames {
        let Some(&value) = frame.targets.get(&axis) else {
            continue;
        };
        if frame.at <= t {
            before = Some((frame.at, value));
            continue;
        }
        return before.map(|(t0, v0)| v0 + (value - v0) * ((t - t0) / (frame.at - t0)));
    }
    before.map(|(_, v)| v)
}

/// Per-axis targets at time `t` for every axis the script touches: linear
/// between that axis's own keyframes, `initial` before its first keyframe,
/// held after its last.
pub fn interpolate(script: &MotionScript, initial: &Pose, t: f64) -> BTreeMap<AxisId, f64> {
    script
        .touched_axes()
        .into_iter()
        .map(|axis| {
            let value = axis_value(script, axis, t).unwrap_or_else(|| initial.get(axis));
            (axis, value)
        })
        .collect()
}

/// The frames commanded at one sample time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleStep {
    pub t: f64,
    pub frames: Vec<Frame>,
}

fn sample_times(duration: f64, dt: f64) -> Vec<f64> {
    let mut times = Vec::new();
    let mut k = 0u64;
    loop {
        let t = k as f64 * dt;
        if t >= duration - TIME_EPS {
            break;
        }
        times.push(t);
        k += 1;
    }
    times.push(duration);
    times
}

/// Samples the script every `dt` seconds up to and including its last keyframe,
/// emitting a move only when an axis's rounded command changes. Axes are not
/// commanded before their first keyframe.
pub fn compile_schedule(
    script: &MotionScript,
    spec: &BodySpec,
    dt: f64,
) -> Result<Vec<ScheduleStep>, Vec<ScriptDiagnostic>> {
    let errors: Vec<_> = validate_script(spec, script)
        .into_iter()
        .filter(ScriptDiagnostic::is_error)
        .collect();
    if !errors.is_empty() {
        return Err(errors);
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(alloc::vec![ScriptDiagnostic::error(
            1,
            DiagnosticKind::Syntax,
            alloc::format!("sample interval must be positive, got {dt}"),
        )]);
    }
    let axes = script.touched_axes();
    let mut sent: [Option<Millis>; AXIS_COUNT] = [None; AXIS_COUNT];
    let mut steps = Vec::new();
    for t in sample_times(script.duration(), dt) {
        let mut frames = Vec::new();
        for &axis in &axes {
            let Some(value) = axis_value(script, axis, t) else {
                continue;
            };
            let millis = Millis::from_unit(spec.axis(axis).clamp(value));
            if sent[axis.slot()] != Some(millis) {
                sent[axis.slot()] = Some(millis);
                frames.push(Frame::Move { axis, millis });
            }
        }
        steps.push(ScheduleStep { t, frames });
    }
    Ok(steps)
}

/// Flattened schedule followed by a single `Sync`.
pub fn compile_to_frames(
    script: &MotionScript,
    spec: &BodySpec,
    dt: f64,
) -> Result<Vec<Frame>, Vec<ScriptDiagnostic>> {
    let mut frames: Vec<Frame> = compile_schedule(script, spec, dt)?
        .into_iter()
        .flat_map(|s| s.frames)
        .collect();
    frames.push(Frame::Sync);
    Ok(frames)
}

/// Plays a schedule in real time: apply each sample's frames, then tick once.
pub fn play_schedule(body: &mut BodyState, schedule: &[ScheduleStep], dt: f64) -> Result<(), BodyError> {
    for step in schedule {
        for frame in &step.frames {
            body.apply_frame(frame)?;
        }
        body.tick(dt)?;
    }
    Ok(())
}
