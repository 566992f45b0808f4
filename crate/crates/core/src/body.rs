//! The 43-axis body: static axis table, poses, and slew-limited actuation.
//!
//! Joint values are normalized command units in `[0, 1]`. The body follows its
//! target at a bounded rate per axis. In [`ActuationMode::Random`] the commands
//! are logged but ignored, and every tick draws a fresh uniform target per axis.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::SimRng;

/// Number of controllable axes.
pub const AXIS_COUNT: usize = 43;

/// Default tick length in seconds.
pub const DEFAULT_DT: f64 = 0.125;

/// Neutral value used for the canonical initial pose.
pub const NEUTRAL: f64 = 0.5;

const SLEW_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BodyError {
    #[error("axis index {0} is outside 1..=43")]
    AxisOutOfRange(u32),
    #[error("non-finite command {value} for axis {axis}")]
    NonFiniteCommand { axis: u8, value: f64 },
    #[error("pose must have exactly 43 values, got {0}")]
    PoseLength(usize),
    #[error("pose value at axis {axis} is not finite")]
    NonFinitePose { axis: u8 },
    #[error("invalid axis spec for axis {axis}: {reason}")]
    InvalidAxisSpec { axis: u8, reason: String },
    #[error("tick length must be positive and finite, got {0}")]
    InvalidDt(f64),
}

/// One-based axis index, valid in `1..=43`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct AxisId(u8);

impl AxisId {
    pub fn new(index: u32) -> Result<Self, BodyError> {
        if (1..=AXIS_COUNT as u32).contains(&index) {
            Ok(AxisId(index as u8))
        } else {
            Err(BodyError::AxisOutOfRange(index))
        }
    }

    pub fn get(self) -> u8 {
        self.0
    }

    /// Zero-based position in a [`Pose`].
    pub fn slot(self) -> usize {
        usize::from(self.0) - 1
    }

    pub fn all() -> impl Iterator<Item = AxisId> + Clone {
        (1..=AXIS_COUNT as u8).map(AxisId)
    }

    pub(crate) fn from_slot(slot: usize) -> AxisId {
        debug_assert!(slot < AXIS_COUNT);
        AxisId(slot as u8 + 1)
    }
}

impl TryFrom<u32> for AxisId {
    type Error = BodyError;

    fn try_from(value: u32) -> Result<Self, Self::Error> {
        AxisId::new(value)
    }
}

impl From<AxisId> for u32 {
    fn from(id: AxisId) -> u32 {
        u32::from(id.0)
    }
}

impl fmt::Display for AxisId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisGroup {
    HeadNeck,
    Abdomen,
    LeftSide,
    RightSide,
    WholeBody,
}

impl AxisGroup {
    pub const ALL: [AxisGroup; 5] = [
        AxisGroup::HeadNeck,
        AxisGroup::Abdomen,
        AxisGroup::LeftSide,
        AxisGroup::RightSide,
        AxisGroup::WholeBody,
    ];

    /// Inclusive axis range of the group.
    pub fn range(self) -> (u8, u8) {
        match self {
            AxisGroup::HeadNeck => (1, 12),
            AxisGroup::Abdomen => (13, 15),
            AxisGroup::LeftSide => (16, 28),
            AxisGroup::RightSide => (29, 41),
            AxisGroup::WholeBody => (42, 43),
        }
    }

    pub fn members(self) -> impl Iterator<Item = AxisId> {
        let (lo, hi) = self.range();
        (lo..=hi).map(AxisId)
    }

    pub fn key(self) -> &'static str {
        match self {
            AxisGroup::HeadNeck => "head_neck",
            AxisGroup::Abdomen => "abdomen",
            AxisGroup::LeftSide => "left_side",
            AxisGroup::RightSide => "right_side",
            AxisGroup::WholeBody => "whole_body",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            AxisGroup::HeadNeck => "head and neck",
            AxisGroup::Abdomen => "abdomen",
            AxisGroup::LeftSide => "left side",
            AxisGroup::RightSide => "right side",
            AxisGroup::WholeBody => "whole body",
        }
    }
}

impl fmt::Display for AxisGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

/// Group membership: 1-12 head/neck, 13-15 abdomen, 16-28 left, 29-41 right,
/// 42-43 whole-body lift and turn.
pub fn axis_group(id: AxisId) -> AxisGroup {
    match id.get() {
        1..=12 => AxisGroup::HeadNeck,
        13..=15 => AxisGroup::Abdomen,
        16..=28 => AxisGroup::LeftSide,
        29..=41 => AxisGroup::RightSide,
        _ => AxisGroup::WholeBody,
    }
}

const ARM_LABELS: [&str; 13] = [
    "shoulder shrug",
    "shoulder pitch",
    "shoulder roll",
    "upper arm twist",
    "elbow",
    "forearm twist",
    "wrist pitch",
    "wrist yaw",
    "thumb",
    "index finger",
    "middle finger",
    "ring finger",
    "little finger",
];

const HEAD_LABELS: [&str; 12] = [
    "neck yaw",
    "neck pitch",
    "neck roll",
    "eyebrows",
    "eyelids",
    "eye yaw",
    "eye pitch",
    "cheeks",
    "mouth open",
    "lip corners",
    "jaw",
    "head tilt",
];

fn default_label(id: AxisId) -> String {
    let n = usize::from(id.get());
    match axis_group(id) {
        AxisGroup::HeadNeck => HEAD_LABELS[n - 1].to_string(),
        AxisGroup::Abdomen => ["waist pitch", "waist roll", "waist yaw"][n - 13].to_string(),
        AxisGroup::LeftSide => alloc::format!("left {}", ARM_LABELS[n - 16]),
        AxisGroup::RightSide => alloc::format!("right {}", ARM_LABELS[n - 29]),
        AxisGroup::WholeBody => ["body lift", "body turn"][n - 42].to_string(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisSpec {
    pub id: AxisId,
    pub label: String,
    pub group: AxisGroup,
    pub min: f64,
    pub max: f64,
    /// Normalized units per second.
    pub max_rate: f64,
}

impl AxisSpec {
    pub fn clamp(&self, value: f64) -> f64 {
        value.clamp(self.min, self.max)
    }

    fn check(&self) -> Result<(), BodyError> {
        let fail = |reason: &str| BodyError::InvalidAxisSpec {
            axis: self.id.get(),
            reason: reason.to_string(),
        };
        if !(self.min.is_finite() && self.max.is_finite() && self.min < self.max) {
            return Err(fail("min must be below max"));
        }
        if !(self.max_rate.is_finite() && self.max_rate > 0.0) {
            return Err(fail("max_rate must be positive"));
        }
        if self.group != axis_group(self.id) {
            return Err(fail("group does not match axis index"));
        }
        Ok(())
    }
}

/// Static description of all 43 axes, ordered by axis index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<AxisSpec>", into = "Vec<AxisSpec>")]
pub struct BodySpec {
    axes: Vec<AxisSpec>,
}

impl BodySpec {
    pub fn new(axes: Vec<AxisSpec>) -> Result<Self, BodyError> {
        if axes.len() != AXIS_COUNT {
            return Err(BodyError::PoseLength(axes.len()));
        }
        for (slot, axis) in axes.iter().enumerate() {
            if axis.id.slot() != slot {
                return Err(BodyError::InvalidAxisSpec {
                    axis: axis.id.get(),
                    reason: "axes must be listed in index order".to_string(),
                });
            }
            axis.check()?;
        }
        Ok(BodySpec { axes })
    }

    pub fn axis(&self, id: AxisId) -> &AxisSpec {
        &self.axes[id.slot()]
    }

    pub fn axes(&self) -> &[AxisSpec] {
        &self.axes
    }

    /// Overrides the slew rate of every axis.
    pub fn with_uniform_rate(mut self, max_rate: f64) -> Result<Self, BodyError> {
        for axis in &mut self.axes {
            axis.max_rate = max_rate;
            axis.check()?;
        }
        Ok(self)
    }
}

impl TryFrom<Vec<AxisSpec>> for BodySpec {
    type Error = BodyError;

    fn try_from(axes: Vec<AxisSpec>) -> Result<Self, Self::Error> {
        BodySpec::new(axes)
    }
}

impl From<BodySpec> for Vec<AxisSpec> {
    fn from(spec: BodySpec) -> Self {
        spec.axes
    }
}

impl Default for BodySpec {
    fn default() -> Self {
        default_body_spec()
    }
}

/// 43 axes in `[0, 1]` with a slew rate of 1.0 unit/s.
pub fn default_body_spec() -> BodySpec {
    let axes = AxisId::all()
        .map(|id| AxisSpec {
            id,
            label: default_label(id),
            group: axis_group(id),
            min: 0.0,
            max: 1.0,
            max_rate: 1.0,
        })
        .collect();
    BodySpec { axes }
}

/// A full joint vector; slot `i` holds axis `i + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Pose {
    values: [f64; AXIS_COUNT],
}

impl Pose {
    pub fn new(values: &[f64]) -> Result<Self, BodyError> {
        let values: [f64; AXIS_COUNT] = values
            .try_into()
            .map_err(|_| BodyError::PoseLength(values.len()))?;
        if let Some(slot) = values.iter().position(|v| !v.is_finite()) {
            return Err(BodyError::NonFinitePose {
                axis: AxisId::from_slot(slot).get(),
            });
        }
        Ok(Pose { values })
    }

    pub fn uniform(value: f64) -> Self {
        Pose {
            values: [value; AXIS_COUNT],
        }
    }

    /// All axes at 0.5.
    pub fn neutral() -> Self {
        Pose::uniform(NEUTRAL)
    }

    pub fn get(&self, id: AxisId) -> f64 {
        self.values[id.slot()]
    }

    pub(crate) fn set(&mut self, id: AxisId, value: f64) {
        self.values[id.slot()] = value;
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

impl TryFrom<Vec<f64>> for Pose {
    type Error = BodyError;

    fn try_from(values: Vec<f64>) -> Result<Self, Self::Error> {
        Pose::new(&values)
    }
}

impl From<Pose> for Vec<f64> {
    fn from(pose: Pose) -> Self {
        pose.values.to_vec()
    }
}

/// Clamps every value into its axis range.
pub fn clamp_pose(spec: &BodySpec, pose: &Pose) -> Pose {
    let mut out = *pose;
    for (value, axis) in out.values.iter_mut().zip(spec.axes()) {
        *value = axis.clamp(*value);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActuationMode {
    /// The body follows commands.
    Faithful,
    /// The body ignores commands and wanders.
    Random,
}

/// A command as received by the body, kept whether or not it was obeyed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoggedCommand {
    pub at: f64,
    pub axis: AxisId,
    pub value: f64,
}

#[derive(Debug, Clone)]
pub struct BodyState {
    spec: BodySpec,
    current: Pose,
    target: Pose,
    mode: ActuationMode,
    rng_seed: u64,
    rng: SimRng,
    clock: f64,
    ticks: u64,
    command_log: Vec<LoggedCommand>,
}

impl BodyState {
    /// A body at rest in `initial` (clamped), with target equal to current.
    pub fn new(spec: BodySpec, initial: Pose, mode: ActuationMode, rng_seed: u64) -> Self {
        let current = clamp_pose(&spec, &initial);
        BodyState {
            spec,
            current,
            target: current,
            mode,
            rng_seed,
            rng: SimRng::seed_from_u64(rng_seed),
            clock: 0.0,
            ticks: 0,
            command_log: Vec::new(),
        }
    }

    /// Default spec, neutral pose.
    pub fn neutral(mode: ActuationMode, rng_seed: u64) -> Self {
        BodyState::new(default_body_spec(), Pose::neutral(), mode, rng_seed)
    }

    pub fn spec(&self) -> &BodySpec {
        &self.spec
    }

    pub fn current(&self) -> &Pose {
        &self.current
    }

    pub fn target(&self) -> &Pose {
        &self.target
    }

    pub fn mode(&self) -> ActuationMode {
        self.mode
    }

    pub fn rng_seed(&self) -> u64 {
        self.rng_seed
    }

    pub fn clock(&self) -> f64 {
        self.clock
    }

    pub fn ticks(&self) -> u64 {
        self.ticks
    }

    pub fn command_log(&self) -> &[LoggedCommand] {
        &self.command_log
    }

    pub fn apply_command(&mut self, id: AxisId, value: f64) -> Result<(), BodyError> {
        if !value.is_finite() {
            return Err(BodyError::NonFiniteCommand {
                axis: id.get(),
                value,
            });
        }
        self.command_log.push(LoggedCommand {
            at: self.clock,
            axis: id,
            value,
        });
        if self.mode == ActuationMode::Faithful {
            let clamped = self.spec.axis(id).clamp(value);
            self.target.set(id, clamped);
        }
        Ok(())
    }

    /// Advances the simulation by `dt` seconds.
    pub fn tick(&mut self, dt: f64) -> Result<(), BodyError> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(BodyError::InvalidDt(dt));
        }
        if self.mode == ActuationMode::Random {
            for axis in self.spec.axes.iter() {
                let u = self.rng.next_unit();
                self.target.set(axis.id, axis.min + u * (axis.max - axis.min));
            }
        }
        for (slot, axis) in self.spec.axes.iter().enumerate() {
            let from = self.current.values[slot];
            let to = self.target.values[slot];
            let step = axis.max_rate * dt;
            let gap = to - from;
            self.current.values[slot] = if gap.abs() <= step + SLEW_EPS {
                to
            } else if gap > 0.0 {
                from + step
            } else {
                from - step
            };
        }
        self.clock += dt;
        self.ticks += 1;
        Ok(())
    }

    /// A random-mode body redraws its target every tick and never comes to rest.
    pub fn is_settled(&self) -> bool {
        self.mode == ActuationMode::Faithful && self.current == self.target
    }

    /// Ticks until current reaches target or `max_ticks` elapse; returns ticks spent.
    pub fn settle(&mut self, dt: f64, max_ticks: u32) -> Result<u32, BodyError> {
        let mut spent = 0;
        while spent < max_ticks && !self.is_settled() {
            self.tick(dt)?;
            spent += 1;
        }
        Ok(spent)
    }
}
