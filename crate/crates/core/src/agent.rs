//! The self-verification agent: moves the body, photographs the mirror, reads
//! the description back, and finally judges whether it controls the body.
//!
//! Replies from the model are plain text. A reply whose first non-thought line
//! names a tool is a tool call, with the remaining lines as input. Anything
//! else ends the trial and is scored by [`parse_verdict`].

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::fmt::Write as _;
use core::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::body::{ActuationMode, BodyState};
use crate::canonical::number;
use crate::chat::{ChatMessage, ChatRequest, Transport, TransportError};
use crate::pipeline::{cot_motion_pipeline_with, PipelineError};
use crate::protocol::{decode_stream, encode_stream};
use crate::scene::{capture, describe_snapshot, DescriberConfig, MirrorScene, Scene, SceneSnapshot};
use crate::script::{compile_schedule, ScriptDiagnostic};

pub const AGENT_TAG: &str = "msr-agent";
pub const MSR_SYSTEM_PROMPT: &str = include_str!("../../../prompts/msr_system.txt");
pub const MSR_UNNAMED_PROMPT: &str = include_str!("../../../prompts/msr_system_unnamed.txt");
pub const TOOL_INSTRUCTIONS: &str = include_str!("../../../prompts/msr_tools.txt");
const START_MESSAGE: &str = "Begin.";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ToolName {
    MotionGeneration,
    CaptureImage,
    Image2Text,
}

impl ToolName {
    pub const ALL: [ToolName; 3] = [
        ToolName::MotionGeneration,
        ToolName::CaptureImage,
        ToolName::Image2Text,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ToolName::MotionGeneration => "MotionGeneration",
            ToolName::CaptureImage => "CaptureImage",
            ToolName::Image2Text => "Image2Text",
        }
    }
}

impl fmt::Display for ToolName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ToolName {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim().trim_end_matches(':').trim();
        ToolName::ALL
            .into_iter()
            .find(|t| t.as_str().eq_ignore_ascii_case(s))
            .ok_or(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentStep {
    pub index: u32,
    pub tool: ToolName,
    pub tool_input: String,
    pub tool_output: String,
    pub model_thought: String,
    /// The photo taken by a successful `CaptureImage` step.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot: Option<SceneSnapshot>,
}

impl AgentStep {
    /// The model reply this step was parsed from, in canonical form.
    pub fn reply_text(&self) -> String {
        let mut out = String::new();
        for line in self.model_thought.lines() {
            let _ = writeln!(out, "Thought: {line}");
        }
        out.push_str(self.tool.as_str());
        if !self.tool_input.is_empty() {
            out.push('\n');
            out.push_str(&self.tool_input);
        }
        out
    }
}

/// Append-only step history of one trial.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AgentMemory {
    steps: Vec<AgentStep>,
}

impl AgentMemory {
    pub fn steps(&self) -> &[AgentStep] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    fn record(
        &mut self,
        tool: ToolName,
        input: String,
        output: String,
        thought: String,
        snapshot: Option<SceneSnapshot>,
    ) {
        let index = self.steps.len() as u32 + 1;
        self.steps.push(AgentStep {
            index,
            tool,
            tool_input: input,
            tool_output: output,
            model_thought: thought,
            snapshot,
        });
    }

    /// Rebuilds memory from stored steps, checking the 1..n numbering.
    pub fn from_steps(steps: Vec<AgentStep>) -> Option<Self> {
        steps
            .iter()
            .enumerate()
            .all(|(i, s)| s.index as usize == i + 1)
            .then_some(AgentMemory { steps })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictKind {
    Control,
    NoControl,
    Inconclusive,
}

impl fmt::Display for VerdictKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VerdictKind::Control => "control",
            VerdictKind::NoControl => "no_control",
            VerdictKind::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub kind: VerdictKind,
    pub rationale: String,
}

fn strip_prefix_ci<'a>(text: &'a str, prefix: &str) -> Option<&'a str> {
    let head = text.get(..prefix.len())?;
    head.eq_ignore_ascii_case(prefix)
        .then(|| &text[prefix.len()..])
}

fn answer_word<'a>(rest: &'a str, word: &str) -> Option<&'a str> {
    let tail = strip_prefix_ci(rest, word)?;
    match tail.chars().next() {
        Some(c) if c.is_alphanumeric() => None,
        _ => Some(tail),
    }
}

fn clean_rationale(rest: &str) -> String {
    rest.trim_start_matches(|c: char| c.is_whitespace() || matches!(c, '-' | '—' | '–' | ':' | ',' | '.'))
        .trim_end()
        .to_string()
}

const NEGATIONS: [&str; 7] = ["not", "no", "never", "cannot", "neither", "nor", "without"];

fn negated(prefix: &str) -> bool {
    prefix
        .split(|c: char| !(c.is_alphanumeric() || c == '\''))
        .any(|w| NEGATIONS.contains(&w) || w.ends_with("n't"))
}

/// Scores a final answer.
///
/// A line starting `FINAL: YES` or `FINAL: NO` decides directly. Otherwise
/// "do not have control" means no control, and "have control" without a
/// negation earlier in its sentence means control.
pub fn parse_verdict(text: &str) -> Verdict {
    for line in text.lines() {
        let Some(rest) = strip_prefix_ci(line.trim_start(), "FINAL:") else {
            continue;
        };
        let rest = rest.trim_start();
        if let Some(tail) = answer_word(rest, "YES") {
            return Verdict {
                kind: VerdictKind::Control,
                rationale: clean_rationale(tail),
            };
        }
        if let Some(tail) = answer_word(rest, "NO") {
            return Verdict {
                kind: VerdictKind::NoControl,
                rationale: clean_rationale(tail),
            };
        }
    }

    let rationale = text
        .lines()
        .rev()
        .map(str::trim)
        .find(|l| !l.is_empty())
        .unwrap_or("")
        .to_string();
    let lower = text.to_lowercase();
    let kind = if lower.contains("do not have control") {
        VerdictKind::NoControl
    } else if lower
        .split(['.', '!', '?', '\n'])
        .any(|s| s.find("have control").is_some_and(|pos| !negated(&s[..pos])))
    {
        VerdictKind::Control
    } else {
        VerdictKind::Inconclusive
    };
    Verdict { kind, rationale }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MsrPrompt {
    /// The agent is told a mirror stands in front of the robot.
    #[default]
    Standard,
    /// The mirror is not mentioned; outcomes are logged but not scored.
    UnnamedMirror,
}

impl MsrPrompt {
    pub fn system_text(self) -> String {
        let task = match self {
            MsrPrompt::Standard => MSR_SYSTEM_PROMPT,
            MsrPrompt::UnnamedMirror => MSR_UNNAMED_PROMPT,
        };
        alloc::format!("{}\n{}", task.trim_end(), TOOL_INSTRUCTIONS.trim_end())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentConfig {
    pub max_steps: u32,
    /// Body tick and motion sampling interval, seconds.
    pub dt: f64,
    /// Ticks allowed for the body to settle before a capture.
    pub settle_budget: u32,
    pub temperature: f64,
    pub prompt: MsrPrompt,
    pub describer: DescriberConfig,
}

impl Default for AgentConfig {
    fn default() -> Self {
        AgentConfig {
            max_steps: 12,
            dt: crate::body::DEFAULT_DT,
            settle_budget: 100,
            temperature: 0.0,
            prompt: MsrPrompt::Standard,
            describer: DescriberConfig::default(),
        }
    }
}

impl AgentConfig {
    /// Digest over everything that determines a trial besides the transport.
    pub fn digest(&self, scene: &MirrorScene, mode: ActuationMode, seed: u64) -> String {
        let canonical = alloc::format!(
            "max_steps={};dt={};settle_budget={};temperature={};prompt={:?};verbosity={:?};noise_seed={:?};misreport_rate={};mirror_distance={};mode={:?};seed={}",
            self.max_steps,
            number(self.dt),
            self.settle_budget,
            number(self.temperature),
            self.prompt,
            self.describer.verbosity,
            self.describer.noise_seed,
            number(self.describer.misreport_rate()),
            number(scene.mirror_distance()),
            mode,
            seed
        );
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub memory: AgentMemory,
    pub verdict: Verdict,
    pub seed: u64,
    pub config_digest: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Error)]
#[error("trial aborted after {} steps: {reason}", memory.len())]
pub struct TrialAborted {
    pub memory: AgentMemory,
    pub reason: TransportError,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AgentError {
    #[error("invalid agent configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Aborted(#[from] TrialAborted),
}

/// State the tools act on during one trial.
pub struct ToolContext<'a> {
    pub body: &'a mut BodyState,
    pub scene: Scene,
    pub config: &'a AgentConfig,
    snapshots: Vec<SceneSnapshot>,
}

impl<'a> ToolContext<'a> {
    pub fn new(body: &'a mut BodyState, scene: Scene, config: &'a AgentConfig) -> Self {
        ToolContext {
            body,
            scene,
            config,
            snapshots: Vec::new(),
        }
    }

    pub fn snapshots(&self) -> &[SceneSnapshot] {
        &self.snapshots
    }
}

fn summarize(diags: &[ScriptDiagnostic]) -> String {
    diags
        .iter()
        .map(|d| d.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

/// Runs one tool. Every outcome is text for the agent except transport failure.
pub fn execute_tool<T: Transport + ?Sized>(
    tool: ToolName,
    input: &str,
    ctx: &mut ToolContext<'_>,
    transport: &mut T,
) -> Result<String, TransportError> {
    let dt = ctx.config.dt;
    match tool {
        ToolName::MotionGeneration => {
            let script = match cot_motion_pipeline_with(transport, input, ctx.config.temperature) {
                Ok(script) => script,
                Err(PipelineError::Transport(e)) => return Err(e),
                Err(PipelineError::EmptyDescription) => {
                    return Ok("error: MotionGeneration needs a movement description".to_string())
                }
                Err(PipelineError::Unparseable { diagnostics, .. }) => {
                    return Ok(alloc::format!(
                        "error: no valid motion script was produced: {}",
                        summarize(&diagnostics)
                    ))
                }
            };
            let schedule = match compile_schedule(&script, ctx.body.spec(), dt) {
                Ok(schedule) => schedule,
                Err(diags) => {
                    return Ok(alloc::format!("error: motion script rejected: {}", summarize(&diags)))
                }
            };
            let mut frame_count = 1;
            for step in &schedule {
                // commands cross the wire encoding on their way to the body
                let frames = decode_stream(&encode_stream(&step.frames))
                    .map_err(|(_, e)| TransportError::Network(e.to_string()))?;
                frame_count += frames.len();
                for frame in &frames {
                    if let Err(e) = ctx.body.apply_frame(frame) {
                        return Ok(alloc::format!("error: body rejected a command: {e}"));
                    }
                }
                if let Err(e) = ctx.body.tick(dt) {
                    return Ok(alloc::format!("error: {e}"));
                }
            }
            Ok(alloc::format!(
                "executed: {} keyframes, {} axes, {} frames",
                script.frames.len(),
                script.touched_axes().len(),
                frame_count
            ))
        }
        ToolName::CaptureImage => {
            if let Err(e) = ctx.body.settle(dt, ctx.config.settle_budget) {
                return Ok(alloc::format!("error: {e}"));
            }
            ctx.snapshots.push(capture(ctx.body, &ctx.scene));
            Ok(alloc::format!("snapshot#{}", ctx.snapshots.len()))
        }
        ToolName::Image2Text => Ok(match ctx.snapshots.last() {
            Some(snapshot) => describe_snapshot(snapshot, &ctx.config.describer),
            None => "error: Image2Text needs a photo; call CaptureImage first".to_string(),
        }),
    }
}

enum Reply {
    Tool {
        thought: String,
        tool: ToolName,
        input: String,
    },
    Final(String),
}

fn parse_reply(text: &str) -> Reply {
    let mut thoughts: Vec<&str> = Vec::new();
    let mut lines = text.lines().map(str::trim).skip_while(|l| l.is_empty());
    while let Some(line) = lines.next() {
        if let Some(thought) = strip_prefix_ci(line, "Thought:") {
            thoughts.push(thought.trim());
            continue;
        }
        if strip_prefix_ci(line, "FINAL:").is_some() {
            break;
        }
        let Ok(tool) = line.parse::<ToolName>() else {
            break;
        };
        let input = lines.collect::<Vec<_>>().join("\n").trim().to_string();
        return Reply::Tool {
            thought: thoughts.join("\n"),
            tool,
            input,
        };
    }
    Reply::Final(text.to_string())
}

fn build_request(
    system: &str,
    memory: &AgentMemory,
    temperature: f64,
) -> Result<ChatRequest, TransportError> {
    let mut messages = Vec::with_capacity(2 + 2 * memory.len());
    messages.push(ChatMessage::system(system));
    messages.push(ChatMessage::user(START_MESSAGE));
    for step in memory.steps() {
        messages.push(ChatMessage::assistant(step.reply_text()));
        messages.push(ChatMessage::user(alloc::format!("Observation: {}", step.tool_output)));
    }
    ChatRequest::new(messages, temperature, AGENT_TAG)
}

/// Runs one mirror trial to a verdict, budget exhaustion, or transport failure.
pub fn run_msr_agent<T: Transport + ?Sized>(
    transport: &mut T,
    body: &mut BodyState,
    scene: &MirrorScene,
    config: &AgentConfig,
) -> Result<Transcript, AgentError> {
    if config.max_steps < 2 {
        return Err(AgentError::Config(alloc::format!(
            "max_steps must be at least 2, got {}",
            config.max_steps
        )));
    }
    let seed = body.rng_seed();
    let config_digest = config.digest(scene, body.mode(), seed);
    let system = config.prompt.system_text();
    let mut memory = AgentMemory::default();
    let mut ctx = ToolContext::new(body, Scene::Mirror(*scene), config);

    for _ in 0..config.max_steps {
        let reply = build_request(&system, &memory, config.temperature)
            .and_then(|request| transport.complete(&request))
            .map_err(|reason| TrialAborted {
                memory: memory.clone(),
                reason,
            })?;
        match parse_reply(&reply.content) {
            Reply::Final(text) => {
                return Ok(Transcript {
                    memory,
                    verdict: parse_verdict(&text),
                    seed,
                    config_digest,
                })
            }
            Reply::Tool {
                thought,
                tool,
                input,
            } => {
                let taken = ctx.snapshots.len();
                let output = execute_tool(tool, &input, &mut ctx, transport).map_err(|reason| {
                    TrialAborted {
                        memory: memory.clone(),
                        reason,
                    }
                })?;
                let snapshot = ctx.snapshots.get(taken).cloned();
                memory.record(tool, input, output, thought, snapshot);
            }
        }
    }
    Ok(Transcript {
        memory,
        verdict: Verdict {
            kind: VerdictKind::Inconclusive,
            rationale: alloc::format!("step budget of {} exhausted", config.max_steps),
        },
        seed,
        config_digest,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::body::{AxisId, ActuationMode};
    use crate::chat::MockTransport;
    use crate::pipeline::{PROMPT_1_TAG, PROMPT_2_TAG};
    use crate::scene::MIRROR_NOT_IN_VIEW;
    use alloc::vec;
    use alloc::vec::Vec;

    const RAISE: &str = "motion raise_right_hand\nat 0.0: 30=0.5, 33=0.5\nat 0.5: 30=0.75\nat 1.0: 30=0.95, 33=0.8, 35=0.7\n";
    const TURN: &str = "motion look_right\nat 0.0: 1=0.5\nat 0.5: 1=1.0\n";

    fn mirror() -> MirrorScene {
        MirrorScene::new(1.0).unwrap()
    }

    #[test]
    fn verdict_grammar() {
        let v = parse_verdict("FINAL: YES — movements match the mirror.");
        assert_eq!(v.kind, VerdictKind::Control);
        assert_eq!(v.rationale, "movements match the mirror.");
        assert_eq!(parse_verdict("final: no, it moved on its own").kind, VerdictKind::NoControl);
        assert_eq!(
            parse_verdict("Thought: done\nFINAL: NO - mismatch").rationale,
            "mismatch"
        );
        assert_eq!(
            parse_verdict("No, I do not have control of Alter3").kind,
            VerdictKind::NoControl
        );
        assert_eq!(parse_verdict("The robot seems to move.").kind, VerdictKind::Inconclusive);
        assert_eq!(
            parse_verdict("Yes. I have control over the whole body.").kind,
            VerdictKind::Control
        );
        assert_eq!(
            parse_verdict("I don't think I have control here.").kind,
            VerdictKind::Inconclusive
        );
        assert_eq!(parse_verdict("FINAL: NOTHING").kind, VerdictKind::Inconclusive);
        assert_eq!(parse_verdict("").kind, VerdictKind::Inconclusive);
    }

    #[test]
    fn tool_names() {
        assert_eq!("CaptureImage".parse(), Ok(ToolName::CaptureImage));
        assert_eq!("image2text:".parse(), Ok(ToolName::Image2Text));
        assert!("Dance".parse::<ToolName>().is_err());
    }

    #[test]
    fn reply_round_trip() {
        let step = AgentStep {
            index: 1,
            tool: ToolName::MotionGeneration,
            tool_input: "raise the right hand".into(),
            tool_output: String::new(),
            model_thought: "first check the right arm\nthen look".into(),
            snapshot: None,
        };
        match parse_reply(&step.reply_text()) {
            Reply::Tool { thought, tool, input } => {
                assert_eq!(thought, step.model_thought);
                assert_eq!(tool, step.tool);
                assert_eq!(input, step.tool_input);
            }
            Reply::Final(_) => panic!("tool call parsed as final"),
        }
        assert!(matches!(parse_reply("FINAL: YES"), Reply::Final(_)));
        assert!(matches!(parse_reply("Thought: hm\nFINAL: NO"), Reply::Final(_)));
        assert!(matches!(parse_reply("I am not sure."), Reply::Final(_)));
    }

    #[test]
    fn tools_in_isolation() {
        let mut body = BodyState::neutral(ActuationMode::Faithful, 0);
        let config = AgentConfig::default();
        let mut transport = MockTransport::new()
            .with_script(PROMPT_1_TAG, ["1. Lift the right arm."])
            .with_script(PROMPT_2_TAG, [RAISE]);
        let mut ctx = ToolContext::new(&mut body, Scene::Mirror(mirror()), &config);

        let out = execute_tool(ToolName::Image2Text, "", &mut ctx, &mut transport).unwrap();
        assert!(out.starts_with("error:") && out.contains("CaptureImage"));

        let out = execute_tool(ToolName::MotionGeneration, "raise the right hand", &mut ctx, &mut transport)
            .unwrap();
        assert!(out.starts_with("executed: 3 keyframes, 3 axes,"), "{out}");

        let out = execute_tool(ToolName::CaptureImage, "", &mut ctx, &mut transport).unwrap();
        assert_eq!(out, "snapshot#1");
        let text = execute_tool(ToolName::Image2Text, "", &mut ctx, &mut transport).unwrap();
        assert!(text.contains("raised right shoulder pitch (30)"), "{text}");

        let out = execute_tool(ToolName::MotionGeneration, "", &mut ctx, &mut transport).unwrap();
        assert!(out.starts_with("error:"));
        // exhausted mock is a transport failure, not tool text
        assert!(execute_tool(ToolName::MotionGeneration, "wave", &mut ctx, &mut transport).is_err());
        drop(ctx);
        assert_eq!(body.current().get(AxisId::new(30).unwrap()), 0.95);
    }

    fn agent_mock(agent: &[&str], narratives: &[&str], scripts: &[&str]) -> MockTransport {
        MockTransport::new()
            .with_script(AGENT_TAG, agent.iter().copied())
            .with_script(PROMPT_1_TAG, narratives.iter().copied())
            .with_script(PROMPT_2_TAG, scripts.iter().copied())
    }

    #[test]
    fn successful_trial() {
        let mut transport = agent_mock(
            &[
                "Thought: move first\nMotionGeneration\nraise the right hand",
                "CaptureImage",
                "Image2Text",
                "FINAL: YES — the mirror shows the arm I raised.",
            ],
            &["1. Lift the right arm."],
            &[RAISE],
        );
        let mut body = BodyState::neutral(ActuationMode::Faithful, 0);
        let t = run_msr_agent(&mut transport, &mut body, &mirror(), &AgentConfig::default()).unwrap();
        assert_eq!(t.verdict.kind, VerdictKind::Control);
        assert_eq!(t.memory.len(), 3);
        let idx: Vec<u32> = t.memory.steps().iter().map(|s| s.index).collect();
        assert_eq!(idx, vec![1, 2, 3]);
        assert!(t.memory.steps()[2].tool_output.contains("Right side: raised"));
        assert_eq!(t.config_digest.len(), 64);
    }

    #[test]
    fn head_turn_runs_out_of_budget() {
        let mut replies = vec!["MotionGeneration\nturn the head to the right"];
        for _ in 0..5 {
            replies.extend(["CaptureImage", "Image2Text"]);
        }
        replies.push("CaptureImage");
        let mut transport = agent_mock(&replies, &["Turn the head."], &[TURN]);
        let mut body = BodyState::neutral(ActuationMode::Faithful, 0);
        let t = run_msr_agent(&mut transport, &mut body, &mirror(), &AgentConfig::default()).unwrap();
        assert_eq!(t.verdict.kind, VerdictKind::Inconclusive);
        assert_eq!(t.memory.len(), 12);
        assert_eq!(t.memory.steps()[2].tool_output, MIRROR_NOT_IN_VIEW);
    }

    #[test]
    fn transport_failure_aborts() {
        let mut transport = agent_mock(&["CaptureImage"], &[], &[]);
        let mut body = BodyState::neutral(ActuationMode::Faithful, 0);
        match run_msr_agent(&mut transport, &mut body, &mirror(), &AgentConfig::default()) {
            Err(AgentError::Aborted(a)) => {
                assert_eq!(a.memory.len(), 1);
                assert!(matches!(a.reason, TransportError::ScriptExhausted { .. }));
            }
            other => panic!("unexpected {other:?}"),
        }
        let config = AgentConfig {
            max_steps: 1,
            ..AgentConfig::default()
        };
        assert!(matches!(
            run_msr_agent(&mut transport, &mut body, &mirror(), &config),
            Err(AgentError::Config(_))
        ));
    }

    #[test]
    fn random_body_ignores_motion() {
        let mut transport = agent_mock(
            &["MotionGeneration\nraise the right hand", "CaptureImage", "FINAL: NO"],
            &["1. Lift the right arm."],
            &[RAISE],
        );
        let mut body = BodyState::neutral(ActuationMode::Random, 5);
        let t = run_msr_agent(&mut transport, &mut body, &mirror(), &AgentConfig::default()).unwrap();
        assert_eq!(t.verdict.kind, VerdictKind::NoControl);
        assert!(body.ticks() >= 100);
        // logged, never followed
        assert!(!body.command_log().is_empty());
    }
}
