//! Cassette (JSON lines) and mock-script (JSON) files.
//!
//! A cassette file starts with a header line
//! `{"cassette":1,"recorded_at":...,"model":...}` followed by one
//! [`CassetteEntry`] per line. A mock file is a JSON object mapping each
//! request tag to the list of responses served for it, in order.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use alter3_core::{request_digest, Cassette, CassetteEntry, MockTransport};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

pub const CASSETTE_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct CassetteHeader {
    cassette: u32,
    recorded_at: String,
    model: String,
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))
}

/// Writes `contents`, creating parent directories and ending with a newline.
pub fn write_text(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| HarnessError::io(parent, e))?;
    }
    let mut text = contents.to_string();
    if !text.ends_with('\n') {
        text.push('\n');
    }
    fs::write(path, text).map_err(|e| HarnessError::io(path, e))
}

pub fn render_cassette(cassette: &Cassette) -> String {
    let header = CassetteHeader {
        cassette: CASSETTE_VERSION,
        recorded_at: cassette.recorded_at.clone(),
        model: cassette.model.clone(),
    };
    let mut out = serde_json::to_string(&header).expect("header serializes");
    out.push('\n');
    for entry in cassette.entries() {
        out.push_str(&serde_json::to_string(entry).expect("entry serializes"));
        out.push('\n');
    }
    out
}

pub fn parse_cassette(path: &Path, text: &str) -> Result<Cassette> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, first) = lines
        .next()
        .ok_or_else(|| HarnessError::format(path, 1, "empty cassette"))?;
    let header: CassetteHeader =
        serde_json::from_str(first).map_err(|e| HarnessError::format(path, 1, e))?;
    if header.cassette != CASSETTE_VERSION {
        return Err(HarnessError::format(
            path,
            1,
            format!("unsupported cassette version {}", header.cassette),
        ));
    }
    let mut cassette = Cassette::new(header.recorded_at, header.model);
    for (i, line) in lines {
        let entry: CassetteEntry =
            serde_json::from_str(line).map_err(|e| HarnessError::format(path, i + 1, e))?;
        let digest = request_digest(&entry.request);
        if digest != entry.digest {
            return Err(HarnessError::format(
                path,
                i + 1,
                format!("digest {} does not match its request ({digest})", entry.digest),
            ));
        }
        cassette.push(entry);
    }
    Ok(cassette)
}

pub fn read_cassette(path: &Path) -> Result<Cassette> {
    parse_cassette(path, &read_text(path)?)
}

pub fn write_cassette(path: &Path, cassette: &Cassette) -> Result<()> {
    write_text(path, &render_cassette(cassette))
}

pub fn parse_mock(path: &Path, text: &str) -> Result<MockTransport> {
    let scripts: BTreeMap<String, Vec<String>> =
        serde_json::from_str(text).map_err(|e| HarnessError::format(path, e.line(), e))?;
    Ok(scripts
        .iter()
        .fold(MockTransport::new(), |mock, (tag, responses)| {
            mock.with_script(tag, responses.iter().cloned())
        }))
}

pub fn read_mock(path: &Path) -> Result<MockTransport> {
    parse_mock(path, &read_text(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alter3_core::{ChatMessage, ChatRequest, Transport};

    #[test]
    fn cassette_round_trip() {
        let mut cassette = Cassette::new("2024-01-01T00:00:00Z", "mock");
        let req = ChatRequest::new(vec![ChatMessage::user("hi")], 0.0, "t").unwrap();
        cassette.record(&req, "hello\nthere");
        cassette.record(&req, "again");
        let text = render_cassette(&cassette);
        assert_eq!(text.lines().count(), 3);
        let back = parse_cassette(Path::new("c.jsonl"), &text).unwrap();
        assert_eq!(back, cassette);
    }

    #[test]
    fn tampered_digest_is_rejected() {
        let mut cassette = Cassette::new("", "mock");
        let req = ChatRequest::new(vec![ChatMessage::user("hi")], 0.0, "t").unwrap();
        cassette.record(&req, "x");
        let text = render_cassette(&cassette).replace("\"hi\"", "\"bye\"");
        let err = parse_cassette(Path::new("c.jsonl"), &text).unwrap_err();
        assert!(err.to_string().starts_with("c.jsonl:2:"));
    }

    #[test]
    fn mock_file() {
        let mut mock = parse_mock(Path::new("m.json"), r#"{"t": ["A", "B"]}"#).unwrap();
        let req = ChatRequest::new(vec![ChatMessage::user("q")], 0.0, "t").unwrap();
        assert_eq!(mock.complete(&req).unwrap().content, "A");
        assert_eq!(mock.complete(&req).unwrap().content, "B");
        assert!(mock.complete(&req).is_err());
        assert!(parse_mock(Path::new("m.json"), "[1]").is_err());
    }
}
