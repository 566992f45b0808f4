//! Canonical JSON for body and scene data.
//!
//! Field order is fixed as written below and every real number is rendered
//! with exactly six decimals, so golden files compare byte-for-byte.
//!
//! * `BodySpec`: `{"axes":[{"id","label","group","min","max","max_rate"},...]}`
//! * `Pose`: `{"values":[...43 numbers...]}`
//! * `BodyState`: `{"clock","mode","seed","ticks","current","target"}`
//! * `SceneSnapshot`: `{"scene","mirror_visible","reflected_pose","own_parts_in_view","prop_view","snapshot_clock"}`

use alloc::string::String;
use core::fmt::Write as _;

use crate::body::{ActuationMode, BodySpec, BodyState, Pose};
use crate::scene::{Scene, SceneSnapshot};

/// Six-decimal rendering without a negative zero.
pub fn number(x: f64) -> String {
    let s = alloc::format!("{x:.6}");
    if s == "-0.000000" {
        String::from("0.000000")
    } else {
        s
    }
}

fn string(out: &mut String, s: &str) {
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
}

fn values(out: &mut String, pose: &Pose) {
    out.push('[');
    for (i, v) in pose.values().iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&number(*v));
    }
    out.push(']');
}

pub fn pose_json(pose: &Pose) -> String {
    let mut out = String::from("{\"values\":");
    values(&mut out, pose);
    out.push('}');
    out
}

pub fn body_spec_json(spec: &BodySpec) -> String {
    let mut out = String::from("{\"axes\":[");
    for (i, axis) in spec.axes().iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        let _ = write!(out, "{{\"id\":{},\"label\":", axis.id);
        string(&mut out, &axis.label);
        let _ = write!(
            out,
            ",\"group\":\"{}\",\"min\":{},\"max\":{},\"max_rate\":{}}}",
            axis.group,
            number(axis.min),
            number(axis.max),
            number(axis.max_rate)
        );
    }
    out.push_str("]}");
    out
}

pub fn body_state_json(state: &BodyState) -> String {
    let mode = match state.mode() {
        ActuationMode::Faithful => "faithful",
        ActuationMode::Random => "random",
    };
    let mut out = alloc::format!(
        "{{\"clock\":{},\"mode\":\"{mode}\",\"seed\":{},\"ticks\":{},\"current\":",
        number(state.clock()),
        state.rng_seed(),
        state.ticks()
    );
    values(&mut out, state.current());
    out.push_str(",\"target\":");
    values(&mut out, state.target());
    out.push('}');
    out
}

pub fn snapshot_json(snapshot: &SceneSnapshot) -> String {
    let mut out = String::from("{\"scene\":");
    match snapshot.scene {
        Scene::Mirror(m) => {
            let _ = write!(
                out,
                "{{\"kind\":\"mirror\",\"mirror_distance\":{}}}",
                number(m.mirror_distance())
            );
        }
        Scene::Rhi(r) => {
            let _ = write!(
                out,
                "{{\"kind\":\"rhi\",\"prop\":\"{}\",\"rotation\":{}}}",
                r.prop.key(),
                r.rotation.degrees()
            );
        }
    }
    let _ = write!(out, ",\"mirror_visible\":{},\"reflected_pose\":", snapshot.mirror_visible);
    match &snapshot.reflected_pose {
        Some(pose) => values(&mut out, pose),
        None => out.push_str("null"),
    }
    out.push_str(",\"own_parts_in_view\":[");
    for (i, group) in snapshot.own_parts_in_view.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        let _ = write!(out, "\"{group}\"");
    }
    out.push_str("],\"prop_view\":");
    match &snapshot.prop_view {
        Some(view) => {
            let _ = write!(
                out,
                "{{\"prop\":\"{}\",\"rotation\":{},\"contact_axis\":{}}}",
                view.prop.key(),
                view.rotation.degrees(),
                view.contact_axis
            );
        }
        None => out.push_str("null"),
    }
    let _ = write!(out, ",\"snapshot_clock\":{}}}", number(snapshot.snapshot_clock));
    out
}
