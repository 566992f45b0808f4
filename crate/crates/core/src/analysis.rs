//! Experiment batteries and their analytics: mirror-trial scoring, the
//! three-task first-person protocol, response classification, and per-axis
//! movement statistics.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agent::{run_msr_agent, AgentConfig, AgentError, AgentMemory, TrialAborted, Transcript, VerdictKind};
use crate::body::{ActuationMode, AxisGroup, AxisId, BodyState, Pose, AXIS_COUNT};
use crate::chat::{ChatMessage, ChatRequest, Transport, TransportError};
use crate::pipeline::{cot_motion_pipeline_with, PipelineError};
use crate::scene::{
    capture, describe_snapshot, make_rhi_scene, DescriberConfig, MirrorScene, Prop, Rotation,
};
use crate::script::{compile_schedule, play_schedule, MotionScript};

pub const RHI_TAG: &str = "rhi-tasks";
pub const RHI_CONTEXT_TEMPLATE: &str = include_str!("../../../prompts/rhi_context.txt");
pub const RHI_TASKS_PROMPT: &str = include_str!("../../../prompts/rhi_tasks.txt");

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("axis delta report needs at least one run")]
    EmptyRuns,
    #[error("repeats must be at least 1")]
    NoRepeats,
    #[error("every repeat was aborted")]
    AllAborted,
    #[error(transparent)]
    Agent(#[from] AgentError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MsrCase {
    /// The body obeys the agent's commands.
    Faithful,
    /// The body ignores commands and moves randomly.
    Random,
}

impl MsrCase {
    pub fn mode(self) -> ActuationMode {
        match self {
            MsrCase::Faithful => ActuationMode::Faithful,
            MsrCase::Random => ActuationMode::Random,
        }
    }

    pub fn expected(self) -> VerdictKind {
        match self {
            MsrCase::Faithful => VerdictKind::Control,
            MsrCase::Random => VerdictKind::NoControl,
        }
    }

    /// Stable name used for fixture directories and report files.
    pub fn key(self) -> &'static str {
        match self {
            MsrCase::Faithful => "msr_faithful",
            MsrCase::Random => "msr_random",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum TrialResult {
    Completed(Transcript),
    Aborted(TrialAborted),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MsrTrial {
    /// One-based.
    pub index: u32,
    pub seed: u64,
    pub expected: VerdictKind,
    pub result: TrialResult,
    pub correct: bool,
}

impl MsrTrial {
    pub fn verdict(&self) -> Option<VerdictKind> {
        match &self.result {
            TrialResult::Completed(t) => Some(t.verdict.kind),
            TrialResult::Aborted(_) => None,
        }
    }

    pub fn is_aborted(&self) -> bool {
        matches!(self.result, TrialResult::Aborted(_))
    }

    pub fn memory(&self) -> &AgentMemory {
        match &self.result {
            TrialResult::Completed(t) => &t.memory,
            TrialResult::Aborted(a) => &a.memory,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MsrReport {
    pub case: MsrCase,
    pub trials: Vec<MsrTrial>,
    /// Absent for an empty battery.
    pub accuracy: Option<f64>,
}

impl MsrReport {
    pub fn from_trials(case: MsrCase, mut trials: Vec<MsrTrial>) -> Self {
        trials.sort_by_key(|t| t.index);
        let accuracy = (!trials.is_empty()).then(|| {
            trials.iter().filter(|t| t.correct).count() as f64 / trials.len() as f64
        });
        MsrReport {
            case,
            trials,
            accuracy,
        }
    }

    pub fn correct(&self) -> usize {
        self.trials.iter().filter(|t| t.correct).count()
    }

    pub fn aborted(&self) -> usize {
        self.trials.iter().filter(|t| t.is_aborted()).count()
    }

    pub fn count(&self, kind: VerdictKind) -> usize {
        self.trials.iter().filter(|t| t.verdict() == Some(kind)).count()
    }
}

/// Runs trial `index` (one-based) on a fresh neutral body seeded with `seed`.
pub fn run_msr_trial<T: Transport + ?Sized>(
    case: MsrCase,
    index: u32,
    seed: u64,
    transport: &mut T,
    scene: &MirrorScene,
    config: &AgentConfig,
) -> Result<MsrTrial, AgentError> {
    let mut body = BodyState::neutral(case.mode(), seed);
    let result = match run_msr_agent(transport, &mut body, scene, config) {
        Ok(transcript) => TrialResult::Completed(transcript),
        Err(AgentError::Aborted(aborted)) => TrialResult::Aborted(aborted),
        Err(e) => return Err(e),
    };
    Ok(aborted_or_scored(case, index, seed, result))
}

fn aborted_or_scored(case: MsrCase, index: u32, seed: u64, result: TrialResult) -> MsrTrial {
    let expected = case.expected();
    let correct = matches!(&result, TrialResult::Completed(t) if t.verdict.kind == expected);
    MsrTrial {
        index,
        seed,
        expected,
        result,
        correct,
    }
}

/// A trial whose transport could not even be opened.
pub fn unopened_trial(case: MsrCase, index: u32, seed: u64, reason: TransportError) -> MsrTrial {
    aborted_or_scored(
        case,
        index,
        seed,
        TrialResult::Aborted(TrialAborted {
            memory: AgentMemory::default(),
            reason,
        }),
    )
}

/// Trial `i` (one-based) gets seed `seed + i - 1` and its own transport.
pub fn run_msr_case<F, T>(
    case: MsrCase,
    trials: u32,
    mut transport_for: F,
    seed: u64,
    scene: &MirrorScene,
    config: &AgentConfig,
) -> Result<MsrReport, AnalysisError>
where
    F: FnMut(u32) -> Result<T, TransportError>,
    T: Transport,
{
    let mut out = Vec::with_capacity(trials as usize);
    for index in 1..=trials {
        let trial_seed = seed.wrapping_add(u64::from(index - 1));
        let trial = match transport_for(index) {
            Ok(mut transport) => {
                run_msr_trial(case, index, trial_seed, &mut transport, scene, config)?
            }
            Err(reason) => unopened_trial(case, index, trial_seed, reason),
        };
        out.push(trial);
    }
    Ok(MsrReport::from_trials(case, out))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResponseClass {
    Withdraw,
    Release,
    Grasp,
    Other,
}

/// Case-insensitive substring lexicons, checked in the order withdraw, release, grasp.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lexicon {
    pub withdraw: Vec<String>,
    pub release: Vec<String>,
    pub grasp: Vec<String>,
}

impl Default for Lexicon {
    fn default() -> Self {
        let words = |w: &[&str]| w.iter().map(|s| s.to_string()).collect();
        Lexicon {
            withdraw: words(&["withdraw", "pull back", "pull my hand", "retract", "move my hand away"]),
            release: words(&["release", "drop the", "let go", "put down", "pick up the blade", "take the knife"]),
            grasp: words(&["grasp", "reach out", "take the mop", "hold the"]),
        }
    }
}

impl Lexicon {
    pub fn classify(&self, text: &str) -> ResponseClass {
        let lower = text.to_lowercase();
        let hit = |words: &[String]| words.iter().any(|w| lower.contains(&w.to_lowercase()));
        if hit(&self.withdraw) {
            ResponseClass::Withdraw
        } else if hit(&self.release) {
            ResponseClass::Release
        } else if hit(&self.grasp) {
            ResponseClass::Grasp
        } else {
            ResponseClass::Other
        }
    }
}

pub fn classify_response(task3_text: &str) -> ResponseClass {
    Lexicon::default().classify(task3_text)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupDelta {
    pub group: AxisGroup,
    pub mean_abs_delta: f64,
}

/// Mean absolute change per axis over repeated runs, in normalized units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisDeltaReport {
    /// Slot `i` holds axis `i + 1`.
    pub per_axis: Vec<f64>,
    pub per_group: Vec<GroupDelta>,
    pub repeats: u32,
}

impl AxisDeltaReport {
    pub fn axis(&self, id: AxisId) -> f64 {
        self.per_axis[id.slot()]
    }

    pub fn group(&self, group: AxisGroup) -> f64 {
        self.per_group
            .iter()
            .find(|g| g.group == group)
            .map_or(0.0, |g| g.mean_abs_delta)
    }

    /// The group with the largest mean change; ties keep the earlier group.
    pub fn dominant_group(&self) -> AxisGroup {
        let mut best = self.per_group[0];
        for g in &self.per_group[1..] {
            if g.mean_abs_delta > best.mean_abs_delta {
                best = *g;
            }
        }
        best.group
    }
}

pub fn axis_delta_report(runs: &[(Pose, Pose)]) -> Result<AxisDeltaReport, AnalysisError> {
    if runs.is_empty() {
        return Err(AnalysisError::EmptyRuns);
    }
    let n = runs.len() as f64;
    let mut per_axis = vec![0.0; AXIS_COUNT];
    for (before, after) in runs {
        for (slot, acc) in per_axis.iter_mut().enumerate() {
            *acc += (after.values()[slot] - before.values()[slot]).abs();
        }
    }
    for acc in &mut per_axis {
        *acc /= n;
    }
    let per_group = AxisGroup::ALL
        .iter()
        .map(|&group| {
            let members: Vec<f64> = group.members().map(|id| per_axis[id.slot()]).collect();
            GroupDelta {
                group,
                mean_abs_delta: members.iter().sum::<f64>() / members.len() as f64,
            }
        })
        .collect();
    Ok(AxisDeltaReport {
        per_axis,
        per_group,
        repeats: runs.len() as u32,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhiConfig {
    pub dt: f64,
    pub temperature: f64,
    /// Ticks allowed after the script ends for the body to come to rest.
    pub settle_budget: u32,
    pub describer: DescriberConfig,
    pub lexicon: Lexicon,
}

impl Default for RhiConfig {
    fn default() -> Self {
        RhiConfig {
            dt: crate::body::DEFAULT_DT,
            temperature: 0.0,
            settle_budget: 1000,
            describer: DescriberConfig::default(),
            lexicon: Lexicon::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhiTrial {
    pub prop: Prop,
    pub rotation: Rotation,
    /// One-based.
    pub repeat: u32,
    pub scene_text: String,
    pub task1_text: String,
    pub task2_text: String,
    pub task3_text: String,
    pub script: Option<MotionScript>,
    pub pose_before: Pose,
    pub pose_after: Pose,
    pub classification: ResponseClass,
    pub note: Option<String>,
    pub aborted: bool,
}

fn task_marker(line: &str) -> Option<(usize, &str)> {
    let mut rest = line.trim_start().trim_start_matches(['*', '#', ' ']);
    if let Some(r) = rest.get(..4).filter(|h| h.eq_ignore_ascii_case("task")) {
        let _ = r;
        rest = rest[4..].trim_start();
    }
    let mut chars = rest.chars();
    let digit = chars.next()?.to_digit(10)? as usize;
    if !(1..=3).contains(&digit) {
        return None;
    }
    let after = chars.as_str().trim_start_matches('*');
    let body = after.strip_prefix([':', '.', ')'])?;
    Some((digit, body.trim_start_matches('*').trim()))
}

/// Splits a numbered reply into its "1:", "2:" and "3:" sections.
pub fn split_task_answers(reply: &str) -> [String; 3] {
    let mut sections: [Vec<&str>; 3] = [Vec::new(), Vec::new(), Vec::new()];
    let mut current: Option<usize> = None;
    for line in reply.lines() {
        if let Some((n, body)) = task_marker(line) {
            current = Some(n - 1);
            if !body.is_empty() {
                sections[n - 1].push(body);
            }
            continue;
        }
        if let Some(i) = current {
            sections[i].push(line.trim());
        }
    }
    sections.map(|lines| lines.join("\n").trim().to_string())
}

pub fn rhi_request(scene_text: &str, temperature: f64) -> Result<ChatRequest, TransportError> {
    ChatRequest::new(
        vec![
            ChatMessage::system(RHI_CONTEXT_TEMPLATE.replace("{scene}", scene_text.trim_end())),
            ChatMessage::user(RHI_TASKS_PROMPT),
        ],
        temperature,
        RHI_TAG,
    )
}

/// Replays a script on a faithful neutral body until it comes to rest.
pub fn replay_from_neutral(script: &MotionScript, config: &RhiConfig, seed: u64) -> Result<Pose, String> {
    let mut body = BodyState::neutral(ActuationMode::Faithful, seed);
    let schedule = compile_schedule(script, body.spec(), config.dt).map_err(|diags| {
        diags
            .iter()
            .map(|d| d.to_string())
            .collect::<Vec<_>>()
            .join("; ")
    })?;
    play_schedule(&mut body, &schedule, config.dt).map_err(|e| e.to_string())?;
    body.settle(config.dt, config.settle_budget)
        .map_err(|e| e.to_string())?;
    Ok(*body.current())
}

/// One repeat of the three-task protocol. Only transport failures are errors.
pub fn run_rhi_trial<T: Transport + ?Sized>(
    prop: Prop,
    rotation: Rotation,
    repeat: u32,
    transport: &mut T,
    seed: u64,
    config: &RhiConfig,
) -> Result<RhiTrial, TransportError> {
    let body = BodyState::neutral(ActuationMode::Faithful, seed);
    let pose_before = *body.current();
    let snapshot = capture(&body, &make_rhi_scene(prop, rotation));
    let mut describer = config.describer;
    describer.noise_seed = Some(describer.noise_seed.unwrap_or(0) ^ seed);
    let scene_text = describe_snapshot(&snapshot, &describer);

    let reply = transport.complete(&rhi_request(&scene_text, config.temperature)?)?;
    let [task1_text, task2_text, task3_text] = split_task_answers(&reply.content);
    let mut classification = config.lexicon.classify(&task3_text);

    let (script, pose_after, note) =
        match cot_motion_pipeline_with(transport, &task3_text, config.temperature) {
            Ok(script) => match replay_from_neutral(&script, config, seed) {
                Ok(after) => (Some(script), after, None),
                Err(e) => {
                    classification = ResponseClass::Other;
                    (Some(script), pose_before, Some(alloc::format!("script rejected: {e}")))
                }
            },
            Err(PipelineError::Transport(e)) => return Err(e),
            Err(e) => {
                classification = ResponseClass::Other;
                (None, pose_before, Some(alloc::format!("motion generation failed: {e}")))
            }
        };

    Ok(RhiTrial {
        prop,
        rotation,
        repeat,
        scene_text,
        task1_text,
        task2_text,
        task3_text,
        script,
        pose_before,
        pose_after,
        classification,
        note,
        aborted: false,
    })
}

/// A repeat lost to a transport failure; excluded from movement statistics.
pub fn aborted_rhi_trial(prop: Prop, rotation: Rotation, repeat: u32, reason: &TransportError) -> RhiTrial {
    RhiTrial {
        prop,
        rotation,
        repeat,
        scene_text: String::new(),
        task1_text: String::new(),
        task2_text: String::new(),
        task3_text: String::new(),
        script: None,
        pose_before: Pose::neutral(),
        pose_after: Pose::neutral(),
        classification: ResponseClass::Other,
        note: Some(alloc::format!("aborted: {reason}")),
        aborted: true,
    }
}

/// Movement statistics over the completed repeats.
pub fn rhi_delta_report(trials: &[RhiTrial]) -> Result<AxisDeltaReport, AnalysisError> {
    let runs: Vec<(Pose, Pose)> = trials
        .iter()
        .filter(|t| !t.aborted)
        .map(|t| (t.pose_before, t.pose_after))
        .collect();
    axis_delta_report(&runs).map_err(|_| AnalysisError::AllAborted)
}

/// Repeat `r` (one-based) gets seed `seed + r - 1` and its own transport.
pub fn run_rhi<F, T>(
    prop: Prop,
    rotation: Rotation,
    repeats: u32,
    mut transport_for: F,
    seed: u64,
    config: &RhiConfig,
) -> Result<(Vec<RhiTrial>, AxisDeltaReport), AnalysisError>
where
    F: FnMut(u32) -> Result<T, TransportError>,
    T: Transport,
{
    if repeats == 0 {
        return Err(AnalysisError::NoRepeats);
    }
    let trials: Vec<RhiTrial> = (1..=repeats)
        .map(|repeat| {
            let repeat_seed = seed.wrapping_add(u64::from(repeat - 1));
            transport_for(repeat)
                .and_then(|mut t| run_rhi_trial(prop, rotation, repeat, &mut t, repeat_seed, config))
                .unwrap_or_else(|e| aborted_rhi_trial(prop, rotation, repeat, &e))
        })
        .collect();
    let report = rhi_delta_report(&trials)?;
    Ok((trials, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chat::MockTransport;
    use crate::pipeline::{PROMPT_1_TAG, PROMPT_2_TAG};

    #[test]
    fn lexicon_examples() {
        assert_eq!(
            classify_response("I would quickly withdraw my hand with a mix of surprise and fear"),
            ResponseClass::Withdraw
        );
        assert_eq!(classify_response("I will carefully release the blade"), ResponseClass::Release);
        assert_eq!(classify_response("I reach out to the mop"), ResponseClass::Grasp);
        assert_eq!(classify_response("hello world"), ResponseClass::Other);
        assert_eq!(
            classify_response("I RELEASE it, then WITHDRAW"),
            ResponseClass::Withdraw
        );
    }

    #[test]
    fn delta_report_examples() {
        let before = Pose::neutral();
        assert!(axis_delta_report(&[]).is_err());
        let same = axis_delta_report(&[(before, before), (before, before)]).unwrap();
        assert!(same.per_axis.iter().all(|v| *v == 0.0));
        assert_eq!(same.repeats, 2);

        let axis30 = AxisId::new(30).unwrap();
        let mut a = before;
        a.set(axis30, 0.7);
        let mut b = before;
        b.set(axis30, 0.1);
        let report = axis_delta_report(&[(before, a), (before, b)]).unwrap();
        assert!((report.axis(axis30) - 0.3).abs() < 1e-12);
        assert!((report.group(AxisGroup::RightSide) - 0.3 / 13.0).abs() < 1e-12);
        assert_eq!(report.dominant_group(), AxisGroup::RightSide);
    }

    #[test]
    fn task_sections() {
        let reply = "1: A knife points at a hand.\nIt looks sharp.\n\n2: Palm up.\n3: I pull back my hand.";
        let [t1, t2, t3] = split_task_answers(reply);
        assert_eq!(t1, "A knife points at a hand.\nIt looks sharp.");
        assert_eq!(t2, "Palm up.");
        assert_eq!(t3, "I pull back my hand.");
        let [_, _, t3] = split_task_answers("**Task 3:** I let go.\n");
        assert_eq!(t3, "I let go.");
        assert_eq!(split_task_answers("no numbers"), [String::new(), String::new(), String::new()]);
    }

    #[test]
    fn msr_report_counts() {
        let report = MsrReport::from_trials(MsrCase::Faithful, Vec::new());
        assert_eq!(report.accuracy, None);
        let mut calls = 0;
        let report = run_msr_case(
            MsrCase::Random,
            3,
            |_| {
                calls += 1;
                Err::<MockTransport, _>(TransportError::Network("offline".into()))
            },
            10,
            &MirrorScene::new(1.0).unwrap(),
            &AgentConfig::default(),
        )
        .unwrap();
        assert_eq!(calls, 3);
        assert_eq!(report.accuracy, Some(0.0));
        assert_eq!(report.aborted(), 3);
        assert_eq!(report.trials[2].seed, 12);
    }

    #[test]
    fn rhi_trial_end_to_end() {
        let script = "motion recoil\nat 0.0: 30=0.5\nat 1.0: 30=0.2, 33=0.9\n";
        let mock = || {
            MockTransport::new()
                .with_script(RHI_TAG, ["1: A knife.\n2: Palm up.\n3: I pull back my hand in fear."])
                .with_script(PROMPT_1_TAG, ["Pull the arm back."])
                .with_script(PROMPT_2_TAG, [script])
        };
        let (trials, report) = run_rhi(
            Prop::Knife,
            Rotation::Deg0,
            2,
            |_| Ok(mock()),
            0,
            &RhiConfig::default(),
        )
        .unwrap();
        assert_eq!(trials.len(), 2);
        assert!(trials.iter().all(|t| t.classification == ResponseClass::Withdraw));
        assert!(trials[0].scene_text.contains("palm up"));
        assert!((report.axis(AxisId::new(30).unwrap()) - 0.3).abs() < 1e-12);
        assert_eq!(report.dominant_group(), AxisGroup::RightSide);
        assert!(run_rhi(Prop::Knife, Rotation::Deg0, 0, |_| Ok(mock()), 0, &RhiConfig::default()).is_err());
    }

    #[test]
    fn rhi_pipeline_failure_is_other() {
        let mut mock = MockTransport::new()
            .with_script(RHI_TAG, ["1: x\n2: y\n3: I pull back my hand."])
            .with_script(PROMPT_1_TAG, ["n"])
            .with_script(PROMPT_2_TAG, ["prose only"]);
        let trial = run_rhi_trial(Prop::Knife, Rotation::Deg0, 1, &mut mock, 0, &RhiConfig::default())
            .unwrap();
        assert_eq!(trial.classification, ResponseClass::Other);
        assert!(trial.note.unwrap().contains("motion generation failed"));
        assert_eq!(trial.pose_after, trial.pose_before);
    }
}
