//! Scenes seen through the head camera, and the text describer that stands in
//! for image understanding.
//!
//! The camera looks straight ahead when the head yaw and pitch axes sit at 0.5;
//! the full axis range spans ±45°. The mirror is in view while the head stays
//! inside the camera cone (±20° yaw, ±15° pitch, inclusive). A visible mirror
//! reflects the body's actual current pose, whatever was commanded.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::body::{AxisGroup, AxisId, BodySpec, BodyState, Pose};
use crate::rng::SimRng;

const ANGLE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SceneError {
    #[error("mirror distance must be positive, got {0}")]
    MirrorDistance(f64),
    #[error("misreport rate must be in [0, 1), got {0}")]
    MisreportRate(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Prop {
    Knife,
    Mop,
}

impl Prop {
    pub fn key(self) -> &'static str {
        match self {
            Prop::Knife => "knife",
            Prop::Mop => "mop",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rotation {
    Deg0,
    Deg90,
}

impl Rotation {
    pub fn degrees(self) -> u32 {
        match self {
            Rotation::Deg0 => 0,
            Rotation::Deg90 => 90,
        }
    }

    pub fn from_degrees(degrees: u32) -> Option<Rotation> {
        match degrees {
            0 => Some(Rotation::Deg0),
            90 => Some(Rotation::Deg90),
            _ => None,
        }
    }
}

impl fmt::Display for Rotation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.degrees())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MirrorScene {
    mirror_distance: f64,
}

impl MirrorScene {
    pub fn new(mirror_distance: f64) -> Result<Self, SceneError> {
        if mirror_distance.is_finite() && mirror_distance > 0.0 {
            Ok(MirrorScene { mirror_distance })
        } else {
            Err(SceneError::MirrorDistance(mirror_distance))
        }
    }

    /// Meters between the body and the mirror.
    pub fn mirror_distance(&self) -> f64 {
        self.mirror_distance
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RhiScene {
    pub prop: Prop,
    pub rotation: Rotation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Scene {
    Mirror(MirrorScene),
    Rhi(RhiScene),
}

pub fn make_msr_scene(distance: f64) -> Result<Scene, SceneError> {
    MirrorScene::new(distance).map(Scene::Mirror)
}

pub fn make_rhi_scene(prop: Prop, rotation: Rotation) -> Scene {
    Scene::Rhi(RhiScene { prop, rotation })
}

/// Head-camera geometry. All angles in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraGeometry {
    pub yaw_axis: AxisId,
    pub pitch_axis: AxisId,
    /// Angle reached at either end of a head axis.
    pub half_range: f64,
    pub yaw_limit: f64,
    pub pitch_limit: f64,
    /// Axis the prop points at in first-person scenes.
    pub contact_axis: AxisId,
}

impl Default for CameraGeometry {
    fn default() -> Self {
        CameraGeometry {
            yaw_axis: axis(1),
            pitch_axis: axis(2),
            half_range: 45.0,
            yaw_limit: 20.0,
            pitch_limit: 15.0,
            contact_axis: axis(34),
        }
    }
}

fn axis(n: u32) -> AxisId {
    AxisId::new(n).expect("static axis index")
}

/// Direction of a body part seen from the head: (group, proxy axis, yaw, pitch at 0.5).
/// The proxy axis swings the part's elevation across the same ±45° range.
const PART_DIRECTIONS: [(AxisGroup, u32, f64, f64); 3] = [
    (AxisGroup::Abdomen, 13, 0.0, -60.0),
    (AxisGroup::LeftSide, 17, -30.0, -40.0),
    (AxisGroup::RightSide, 30, 30.0, -40.0),
];

impl CameraGeometry {
    fn angle(&self, value: f64) -> f64 {
        (value - 0.5) * 2.0 * self.half_range
    }

    /// Head (yaw, pitch) in degrees.
    pub fn head_angles(&self, pose: &Pose) -> (f64, f64) {
        (
            self.angle(pose.get(self.yaw_axis)),
            self.angle(pose.get(self.pitch_axis)),
        )
    }

    fn in_cone(&self, yaw_offset: f64, pitch_offset: f64) -> bool {
        yaw_offset.abs() <= self.yaw_limit + ANGLE_EPS
            && pitch_offset.abs() <= self.pitch_limit + ANGLE_EPS
    }

    pub fn mirror_visible(&self, pose: &Pose) -> bool {
        let (yaw, pitch) = self.head_angles(pose);
        self.in_cone(yaw, pitch)
    }

    pub fn parts_in_view(&self, pose: &Pose) -> BTreeSet<AxisGroup> {
        let (yaw, pitch) = self.head_angles(pose);
        PART_DIRECTIONS
            .iter()
            .filter(|(_, proxy, part_yaw, base_pitch)| {
                let part_pitch = base_pitch + self.angle(pose.get(axis(*proxy)));
                self.in_cone(part_yaw - yaw, part_pitch - pitch)
            })
            .map(|(group, ..)| *group)
            .collect()
    }
}

pub fn mirror_visible(state: &BodyState, _scene: &MirrorScene) -> bool {
    CameraGeometry::default().mirror_visible(state.current())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropView {
    pub prop: Prop,
    pub rotation: Rotation,
    pub contact_axis: AxisId,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSnapshot {
    pub scene: Scene,
    pub mirror_visible: bool,
    pub reflected_pose: Option<Pose>,
    pub own_parts_in_view: BTreeSet<AxisGroup>,
    pub prop_view: Option<PropView>,
    pub snapshot_clock: f64,
}

pub fn capture(state: &BodyState, scene: &Scene) -> SceneSnapshot {
    capture_with(&CameraGeometry::default(), state, scene)
}

pub fn capture_with(geometry: &CameraGeometry, state: &BodyState, scene: &Scene) -> SceneSnapshot {
    let pose = state.current();
    let mut own_parts_in_view = geometry.parts_in_view(pose);
    let (mirror_visible, reflected_pose, prop_view) = match scene {
        Scene::Mirror(_) => {
            let visible = geometry.mirror_visible(pose);
            (visible, visible.then_some(*pose), None)
        }
        Scene::Rhi(rhi) => {
            // the staged first-person view always shows the right hand
            own_parts_in_view.insert(AxisGroup::RightSide);
            let view = PropView {
                prop: rhi.prop,
                rotation: rhi.rotation,
                contact_axis: geometry.contact_axis,
            };
            (false, None, Some(view))
        }
    };
    SceneSnapshot {
        scene: *scene,
        mirror_visible,
        reflected_pose,
        own_parts_in_view,
        prop_view,
        snapshot_clock: state.clock(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verbosity {
    Terse,
    #[default]
    Detailed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DescriberConfig {
    pub verbosity: Verbosity,
    pub noise_seed: Option<u64>,
    misreport_rate: f64,
}

impl Default for DescriberConfig {
    fn default() -> Self {
        DescriberConfig {
            verbosity: Verbosity::Detailed,
            noise_seed: None,
            misreport_rate: 0.0,
        }
    }
}

impl DescriberConfig {
    pub fn new(
        verbosity: Verbosity,
        noise_seed: Option<u64>,
        misreport_rate: f64,
    ) -> Result<Self, SceneError> {
        if !(0.0..1.0).contains(&misreport_rate) {
            return Err(SceneError::MisreportRate(misreport_rate));
        }
        Ok(DescriberConfig {
            verbosity,
            noise_seed,
            misreport_rate,
        })
    }

    pub fn misreport_rate(&self) -> f64 {
        self.misreport_rate
    }
}

/// Fixed text for a mirror outside the camera cone.
pub const MIRROR_NOT_IN_VIEW: &str = "The mirror is not in view.";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) enum Bucket {
    Lowered,
    Mid,
    Raised,
}

pub(crate) fn bucket(value: f64) -> Bucket {
    if value < 0.33 {
        Bucket::Lowered
    } else if value > 0.67 {
        Bucket::Raised
    } else {
        Bucket::Mid
    }
}

/// Per-axis posture buckets after optional misreporting.
fn observed_buckets(pose: &Pose, snapshot_clock: f64, cfg: &DescriberConfig) -> Vec<Bucket> {
    let mut buckets: Vec<Bucket> = pose.values().iter().map(|v| bucket(*v)).collect();
    if cfg.misreport_rate > 0.0 {
        let seed = cfg.noise_seed.unwrap_or(0) ^ snapshot_clock.to_bits().rotate_left(29);
        let mut rng = SimRng::seed_from_u64(seed);
        for b in &mut buckets {
            if rng.next_unit() < cfg.misreport_rate {
                let others: [Bucket; 2] = match b {
                    Bucket::Lowered => [Bucket::Mid, Bucket::Raised],
                    Bucket::Mid => [Bucket::Lowered, Bucket::Raised],
                    Bucket::Raised => [Bucket::Lowered, Bucket::Mid],
                };
                *b = others[rng.next_below(2) as usize];
            }
        }
    }
    buckets
}

fn group_summary(
    out: &mut String,
    spec: &BodySpec,
    group: AxisGroup,
    buckets: &[Bucket],
    verbosity: Verbosity,
) {
    let pick = |wanted: Bucket| -> Vec<AxisId> {
        group
            .members()
            .filter(|id| buckets[id.slot()] == wanted)
            .collect()
    };
    let raised = pick(Bucket::Raised);
    let lowered = pick(Bucket::Lowered);
    match verbosity {
        Verbosity::Detailed => {
            let mut name = group.display_name().to_string();
            if let Some(first) = name.get_mut(..1) {
                first.make_ascii_uppercase();
            }
            let _ = write!(out, "{name}: ");
            if raised.is_empty() && lowered.is_empty() {
                out.push_str("neutral");
            }
            let list = |out: &mut String, word: &str, ids: &[AxisId]| {
                let _ = write!(out, "{word} ");
                for (i, id) in ids.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    let _ = write!(out, "{} ({})", spec.axis(*id).label, id);
                }
            };
            if !raised.is_empty() {
                list(out, "raised", &raised);
            }
            if !lowered.is_empty() {
                if !raised.is_empty() {
                    out.push_str("; ");
                }
                list(out, "lowered", &lowered);
            }
            out.push_str(".\n");
        }
        Verbosity::Terse => {
            let ids = |ids: &[AxisId]| {
                ids.iter()
                    .map(|id| id.to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            };
            let _ = writeln!(
                out,
                "{}: up[{}] down[{}]",
                group.key(),
                ids(&raised),
                ids(&lowered)
            );
        }
    }
}

fn describe_prop(view: &PropView, verbosity: Verbosity) -> String {
    let (holder, contact) = match view.prop {
        Prop::Knife => (
            "A human hand holds a kitchen knife and points the blade at a robotic right hand",
            "The edge of the blade rests on the index finger, near its middle joint.",
        ),
        Prop::Mop => (
            "A human hand holds a mop, a cleaning tool, and brings its head toward a robotic right hand",
            "The strands of the mop almost touch the index finger.",
        ),
    };
    match (verbosity, view.rotation) {
        (Verbosity::Detailed, Rotation::Deg0) => alloc::format!(
            "First-person view from the robot's eye camera. {holder} in the foreground. \
             The robotic hand lies palm up, fingers relaxed and slightly spread. {contact}\n"
        ),
        (Verbosity::Detailed, Rotation::Deg90) => alloc::format!(
            "First-person view from the robot's eye camera, turned 90 degrees. {holder}. \
             The robotic hand is turned sideways and extended, with the thumb raised on top. {contact}\n"
        ),
        (Verbosity::Terse, rotation) => {
            let hand = match rotation {
                Rotation::Deg0 => "palm up",
                Rotation::Deg90 => "sideways, thumb on top",
            };
            alloc::format!(
                "{} at right hand, rotation {}: hand {hand}; near index finger.\n",
                view.prop.key(),
                rotation.degrees()
            )
        }
    }
}

/// Deterministic text for a snapshot. With a zero misreport rate the output is
/// exact ground truth.
pub fn describe_snapshot(snapshot: &SceneSnapshot, cfg: &DescriberConfig) -> String {
    describe_with_spec(&crate::body::default_body_spec(), snapshot, cfg)
}

pub fn describe_with_spec(spec: &BodySpec, snapshot: &SceneSnapshot, cfg: &DescriberConfig) -> String {
    match (&snapshot.scene, &snapshot.prop_view) {
        (Scene::Rhi(_), Some(view)) => describe_prop(view, cfg.verbosity),
        (Scene::Rhi(rhi), None) => describe_prop(
            &PropView {
                prop: rhi.prop,
                rotation: rhi.rotation,
                contact_axis: CameraGeometry::default().contact_axis,
            },
            cfg.verbosity,
        ),
        (Scene::Mirror(mirror), _) => {
            let Some(pose) = snapshot.reflected_pose.filter(|_| snapshot.mirror_visible) else {
                return MIRROR_NOT_IN_VIEW.to_string();
            };
            let buckets = observed_buckets(&pose, snapshot.snapshot_clock, cfg);
            let mut out = match cfg.verbosity {
                Verbosity::Detailed => alloc::format!(
                    "The mirror, {:.1} m ahead, shows a humanoid robot without legs.\n",
                    mirror.mirror_distance()
                ),
                Verbosity::Terse => String::from("Mirror: robot visible.\n"),
            };
            for group in AxisGroup::ALL {
                group_summary(&mut out, spec, group, &buckets, cfg.verbosity);
            }
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::body::{ActuationMode, AXIS_COUNT};

    fn body_with(pairs: &[(u32, f64)]) -> BodyState {
        let mut values = [0.5; AXIS_COUNT];
        for (a, v) in pairs {
            values[*a as usize - 1] = *v;
        }
        BodyState::new(
            crate::body::default_body_spec(),
            Pose::new(&values).unwrap(),
            ActuationMode::Faithful,
            0,
        )
    }

    fn mirror() -> MirrorScene {
        MirrorScene::new(1.0).unwrap()
    }

    #[test]
    fn visibility_rule() {
        assert!(mirror_visible(&body_with(&[]), &mirror()));
        assert!(!mirror_visible(&body_with(&[(1, 1.0)]), &mirror()));
        assert!(!mirror_visible(&body_with(&[(1, 0.0)]), &mirror()));
        // exactly 20 degrees of yaw and 15 of pitch are still inside
        assert!(mirror_visible(&body_with(&[(1, 0.5 + 20.0 / 90.0)]), &mirror()));
        assert!(mirror_visible(&body_with(&[(2, 0.5 - 15.0 / 90.0)]), &mirror()));
        assert!(!mirror_visible(&body_with(&[(1, 0.5 + 20.5 / 90.0)]), &mirror()));
        assert!(!mirror_visible(&body_with(&[(2, 0.5 + 15.5 / 90.0)]), &mirror()));
    }

    #[test]
    fn scene_constructors() {
        assert!(matches!(
            make_rhi_scene(Prop::Knife, Rotation::Deg90),
            Scene::Rhi(RhiScene { prop: Prop::Knife, rotation: Rotation::Deg90 })
        ));
        assert!(make_msr_scene(0.0).is_err());
        assert!(make_msr_scene(-1.0).is_err());
        assert!(make_msr_scene(f64::NAN).is_err());
        assert!(make_msr_scene(0.8).is_ok());
        assert_eq!(Rotation::from_degrees(45), None);
    }

    #[test]
    fn capture_reflects_current_pose() {
        let body = body_with(&[(30, 0.95), (33, 0.8)]);
        let snap = capture(&body, &Scene::Mirror(mirror()));
        assert!(snap.mirror_visible);
        assert_eq!(snap.reflected_pose, Some(*body.current()));
        assert!(snap.prop_view.is_none());
        let text = describe_snapshot(&snap, &DescriberConfig::default());
        assert!(text.contains("Right side: raised right shoulder pitch (30), right elbow (33)."));
        assert!(text.contains("Left side: neutral."));

        let turned = capture(&body_with(&[(1, 1.0)]), &Scene::Mirror(mirror()));
        assert!(!turned.mirror_visible);
        assert!(turned.reflected_pose.is_none());
        assert_eq!(
            describe_snapshot(&turned, &DescriberConfig::default()),
            MIRROR_NOT_IN_VIEW
        );
    }

    #[test]
    fn rhi_capture_and_text() {
        let body = body_with(&[]);
        let snap = capture(&body, &make_rhi_scene(Prop::Knife, Rotation::Deg0));
        let view = snap.prop_view.unwrap();
        assert_eq!(crate::body::axis_group(view.contact_axis), AxisGroup::RightSide);
        assert!(snap.own_parts_in_view.contains(&AxisGroup::RightSide));
        assert!(snap.reflected_pose.is_none());
        let text = describe_snapshot(&snap, &DescriberConfig::default());
        assert!(text.contains("palm up"));
        assert!(text.contains("index finger"));
        assert!(text.contains("knife"));

        let side = capture(&body, &make_rhi_scene(Prop::Knife, Rotation::Deg90));
        let text = describe_snapshot(&side, &DescriberConfig::default());
        assert!(text.contains("sideways"));
        assert!(text.contains("thumb"));
        assert!(!text.contains("palm up"));

        let mop = capture(&body, &make_rhi_scene(Prop::Mop, Rotation::Deg0));
        assert!(describe_snapshot(&mop, &DescriberConfig::default()).contains("mop"));
    }

    #[test]
    fn parts_in_view_follow_gaze() {
        let geometry = CameraGeometry::default();
        assert!(geometry.parts_in_view(&Pose::neutral()).is_empty());
        // head turned right and down, right arm raised a little
        let body = body_with(&[(1, 0.5 + 30.0 / 90.0), (2, 0.5 - 40.0 / 90.0)]);
        let parts = geometry.parts_in_view(body.current());
        assert!(parts.contains(&AxisGroup::RightSide));
        assert!(!parts.contains(&AxisGroup::LeftSide));
    }

    #[test]
    fn describer_is_pure_and_noise_is_seeded() {
        let snap = capture(&body_with(&[(30, 0.9)]), &Scene::Mirror(mirror()));
        let cfg = DescriberConfig::default();
        assert_eq!(describe_snapshot(&snap, &cfg), describe_snapshot(&snap, &cfg));

        let noisy = DescriberConfig::new(Verbosity::Detailed, Some(9), 0.5).unwrap();
        let a = describe_snapshot(&snap, &noisy);
        assert_eq!(a, describe_snapshot(&snap, &noisy));
        assert_ne!(a, describe_snapshot(&snap, &cfg));
        assert!(DescriberConfig::new(Verbosity::Terse, None, 1.0).is_err());
    }

    #[test]
    fn terse_form() {
        let snap = capture(&body_with(&[(30, 0.9), (41, 0.1)]), &Scene::Mirror(mirror()));
        let cfg = DescriberConfig::new(Verbosity::Terse, None, 0.0).unwrap();
        let text = describe_snapshot(&snap, &cfg);
        assert!(text.contains("right_side: up[30] down[41]"));
    }
}
