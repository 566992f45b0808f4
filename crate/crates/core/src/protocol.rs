//! ASCII line protocol between controller and body.
//!
//! ```text
//! frame  = move | sync | nop
//! move   = "M" SP axis SP millis LF     ; axis 1..=43, millis 0..=1000
//! sync   = "S" LF
//! nop    = "N" LF
//! ```
//!
//! Numbers are plain decimal without sign or leading zeros. `millis` is the
//! commanded position in thousandths of the normalized range.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::body::{AxisId, BodyError, BodyState, AXIS_COUNT};

/// Position in thousandths, `0..=1000`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u16", into = "u16")]
pub struct Millis(u16);

impl Millis {
    pub const MAX: u16 = 1000;

    pub fn new(value: u16) -> Result<Self, FrameError> {
        if value <= Self::MAX {
            Ok(Millis(value))
        } else {
            Err(FrameError::MillisRange(u64::from(value)))
        }
    }

    /// Rounds a normalized value to thousandths, saturating into range.
    pub fn from_unit(value: f64) -> Self {
        let scaled = libm::round(value.clamp(0.0, 1.0) * 1000.0);
        Millis(scaled as u16)
    }

    pub fn get(self) -> u16 {
        self.0
    }

    pub fn to_unit(self) -> f64 {
        f64::from(self.0) / 1000.0
    }
}

impl TryFrom<u16> for Millis {
    type Error = FrameError;

    fn try_from(value: u16) -> Result<Self, Self::Error> {
        Millis::new(value)
    }
}

impl From<Millis> for u16 {
    fn from(m: Millis) -> u16 {
        m.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Frame {
    Move { axis: AxisId, millis: Millis },
    Sync,
    Nop,
}

impl Frame {
    pub fn move_to(axis: AxisId, value: f64) -> Frame {
        Frame::Move {
            axis,
            millis: Millis::from_unit(value),
        }
    }
}

impl fmt::Display for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Frame::Move { axis, millis } => write!(f, "M {} {}", axis, millis.get()),
            Frame::Sync => f.write_str("S"),
            Frame::Nop => f.write_str("N"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FrameError {
    #[error("empty frame")]
    Empty,
    #[error("frame is not terminated by a newline")]
    MissingNewline,
    #[error("unknown frame tag {0:?}")]
    UnknownTag(String),
    #[error("axis {0} is outside 1..=43")]
    AxisRange(u64),
    #[error("millis {0} is outside 0..=1000")]
    MillisRange(u64),
    #[error("malformed frame: {0}")]
    Malformed(&'static str),
    #[error("unexpected bytes after the frame terminator")]
    TrailingBytes,
}

pub fn encode_frame(frame: &Frame) -> Vec<u8> {
    let mut out = alloc::format!("{frame}").into_bytes();
    out.push(b'\n');
    out
}

pub fn encode_stream(frames: &[Frame]) -> Vec<u8> {
    frames.iter().flat_map(encode_frame).collect()
}

/// Decodes exactly one newline-terminated frame.
pub fn decode_frame(bytes: &[u8]) -> Result<Frame, FrameError> {
    if bytes.is_empty() {
        return Err(FrameError::Empty);
    }
    let Some(end) = bytes.iter().position(|&b| b == b'\n') else {
        return Err(FrameError::MissingNewline);
    };
    if end + 1 != bytes.len() {
        return Err(FrameError::TrailingBytes);
    }
    decode_line(&bytes[..end])
}

/// Decodes a concatenation of frames; the error carries the failing frame's position.
pub fn decode_stream(bytes: &[u8]) -> Result<Vec<Frame>, (usize, FrameError)> {
    let mut frames = Vec::new();
    let mut rest = bytes;
    while !rest.is_empty() {
        let Some(end) = rest.iter().position(|&b| b == b'\n') else {
            return Err((frames.len(), FrameError::MissingNewline));
        };
        let frame = decode_line(&rest[..end]).map_err(|e| (frames.len(), e))?;
        frames.push(frame);
        rest = &rest[end + 1..];
    }
    Ok(frames)
}

fn decode_line(line: &[u8]) -> Result<Frame, FrameError> {
    let Some(&tag) = line.first() else {
        return Err(FrameError::Empty);
    };
    match tag {
        b'S' | b'N' => {
            if line.len() != 1 {
                return Err(FrameError::Malformed("sync and nop frames take no fields"));
            }
            Ok(if tag == b'S' { Frame::Sync } else { Frame::Nop })
        }
        b'M' => {
            let mut fields = line.split(|&b| b == b' ');
            fields.next();
            let (Some(axis), Some(millis), None) = (fields.next(), fields.next(), fields.next())
            else {
                return Err(FrameError::Malformed("move frame needs exactly two fields"));
            };
            let axis = parse_number(axis)?;
            let millis = parse_number(millis)?;
            if axis == 0 || axis > AXIS_COUNT as u64 {
                return Err(FrameError::AxisRange(axis));
            }
            if millis > u64::from(Millis::MAX) {
                return Err(FrameError::MillisRange(millis));
            }
            Ok(Frame::Move {
                axis: AxisId::new(axis as u32).map_err(|_| FrameError::AxisRange(axis))?,
                millis: Millis(millis as u16),
            })
        }
        _ => {
            let end = line.iter().position(|&b| b == b' ').unwrap_or(line.len());
            Err(FrameError::UnknownTag(
                String::from_utf8_lossy(&line[..end]).into_owned(),
            ))
        }
    }
}

/// Plain decimal without sign or leading zeros; saturates instead of overflowing.
fn parse_number(field: &[u8]) -> Result<u64, FrameError> {
    if field.is_empty() {
        return Err(FrameError::Malformed("empty numeric field"));
    }
    if !field.iter().all(u8::is_ascii_digit) {
        return Err(FrameError::Malformed("numeric field contains non-digits"));
    }
    if field.len() > 1 && field[0] == b'0' {
        return Err(FrameError::Malformed("numeric field has a leading zero"));
    }
    Ok(field.iter().fold(0u64, |acc, &d| {
        acc.saturating_mul(10).saturating_add(u64::from(d - b'0'))
    }))
}

impl BodyState {
    /// Applies one decoded frame. `Sync` and `Nop` carry no body effect.
    pub fn apply_frame(&mut self, frame: &Frame) -> Result<(), BodyError> {
        match frame {
            Frame::Move { axis, millis } => self.apply_command(*axis, millis.to_unit()),
            Frame::Sync | Frame::Nop => Ok(()),
        }
    }
}
