//! Simulation core for a 43-axis humanoid body driven by language.
//!
//! Everything in this crate is deterministic and free of IO: the body model and
//! its slew-limited actuation, the line-based wire protocol, the keyframe motion
//! script language, the mirror / first-person scene model with its ground-truth
//! describer, the chat transport abstraction with the two-stage motion pipeline,
//! the tool-using verification agent, and the experiment analytics built on top.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, HTTP transports
//! and the command line live in the `alter3-harness` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod agent;
pub mod analysis;
pub mod body;
pub mod canonical;
pub mod chat;
pub mod pipeline;
pub mod protocol;
pub mod scene;
pub mod script;

mod rng;

pub use agent::{
    execute_tool, parse_verdict, run_msr_agent, AgentConfig, AgentMemory, AgentStep, MsrPrompt,
    ToolContext, ToolName, TrialAborted, Transcript, Verdict, VerdictKind,
};
pub use analysis::{
    axis_delta_report, classify_response, run_msr_case, run_msr_trial, run_rhi, run_rhi_trial,
    AxisDeltaReport, Lexicon, MsrCase, MsrReport, MsrTrial, ResponseClass, RhiTrial, TrialResult,
};
pub use body::{
    axis_group, clamp_pose, default_body_spec, ActuationMode, AxisGroup, AxisId, AxisSpec,
    BodyError, BodySpec, BodyState, Pose, AXIS_COUNT, DEFAULT_DT, NEUTRAL,
};
pub use chat::{
    request_digest, Cassette, CassetteEntry, ChatMessage, ChatRequest, ChatResponse,
    MockTransport, RecordingTransport, ReplayTransport, ResponseSource, Role, Transport,
    TransportError,
};
pub use pipeline::{cot_motion_pipeline, PipelineError, PROMPT_1_TAG, PROMPT_2_TAG};
pub use protocol::{decode_frame, decode_stream, encode_frame, encode_stream, Frame, FrameError};
pub use scene::{
    capture, describe_snapshot, make_msr_scene, make_rhi_scene, mirror_visible, CameraGeometry,
    DescriberConfig, MirrorScene, Prop, PropView, RhiScene, Rotation, Scene, SceneError,
    SceneSnapshot, Verbosity,
};
pub use script::{
    compile_schedule, compile_to_frames, interpolate, parse_script, play_schedule, render_script,
    validate_script, validate_source, DiagnosticKind, Keyframe, MotionScript, ScheduleStep,
    ScriptDiagnostic, Severity,
};
