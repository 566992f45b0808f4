//! Chat-completion transports: the request model, stable request digests,
//! scripted mocks, and record/replay cassettes.
//!
//! A cassette maps request digests to recorded responses. When the same
//! request occurs several times in one recording, replay hands out the
//! recorded responses in their original order and repeats the last one.

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, VecDeque};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write as _;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    System,
    User,
    Assistant,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::System => "system",
            Role::User => "user",
            Role::Assistant => "assistant",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
}

impl ChatMessage {
    pub fn new(role: Role, content: impl Into<String>) -> Self {
        ChatMessage {
            role,
            content: content.into(),
        }
    }

    pub fn system(content: impl Into<String>) -> Self {
        Self::new(Role::System, content)
    }

    pub fn user(content: impl Into<String>) -> Self {
        Self::new(Role::User, content)
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        Self::new(Role::Assistant, content)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    messages: Vec<ChatMessage>,
    temperature: f64,
    /// Pipeline stage label; part of the digest.
    tag: String,
}

impl ChatRequest {
    pub fn new(
        messages: Vec<ChatMessage>,
        temperature: f64,
        tag: impl Into<String>,
    ) -> Result<Self, TransportError> {
        if messages.is_empty() {
            return Err(TransportError::InvalidRequest(
                "a request needs at least one message".to_string(),
            ));
        }
        if !(0.0..=2.0).contains(&temperature) {
            return Err(TransportError::InvalidRequest(alloc::format!(
                "temperature {temperature} is outside [0, 2]"
            )));
        }
        Ok(ChatRequest {
            messages,
            temperature,
            tag: tag.into(),
        })
    }

    pub fn messages(&self) -> &[ChatMessage] {
        &self.messages
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn tag(&self) -> &str {
        &self.tag
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResponseSource {
    Live,
    Replay,
    Mock,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatResponse {
    pub content: String,
    pub source: ResponseSource,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Error)]
#[serde(tag = "kind", content = "detail", rename_all = "snake_case")]
pub enum TransportError {
    #[error("no recorded response for request {digest} (tag {tag:?})")]
    CassetteMiss { digest: String, tag: String },
    #[error("scripted responses for tag {tag:?} are exhausted")]
    ScriptExhausted { tag: String },
    #[error("empty response for tag {tag:?}")]
    EmptyResponse { tag: String },
    #[error("transport failure: {0}")]
    Network(String),
    #[error("invalid request: {0}")]
    InvalidRequest(String),
}

/// Blocking request/response chat endpoint.
pub trait Transport {
    fn complete(&mut self, request: &ChatRequest) -> Result<ChatResponse, TransportError>;

    /// Whether responses come from a live model (enables repair round-trips).
    fn is_live(&self) -> bool {
        false
    }
}

impl<T: Transport + ?Sized> Transport for &mut T {
    fn complete(&mut self, request: &ChatRequest) -> Result<ChatResponse, TransportError> {
        (**self).complete(request)
    }

    fn is_live(&self) -> bool {
        (**self).is_live()
    }
}

impl<T: Transport + ?Sized> Transport for Box<T> {
    fn complete(&mut self, request: &ChatRequest) -> Result<ChatResponse, TransportError> {
        (**self).complete(request)
    }

    fn is_live(&self) -> bool {
        (**self).is_live()
    }
}

/// CRLF folded to LF, trailing whitespace stripped from every line and from the end.
fn canonical_content(content: &str) -> String {
    let mut out = String::with_capacity(content.len());
    for (i, line) in content.split('\n').enumerate() {
        if i > 0 {
            out.push('\n');
        }
        out.push_str(line.trim_end());
    }
    let trimmed = out.trim_end().len();
    out.truncate(trimmed);
    out
}

/// Lowercase hex SHA-256 of the canonical request encoding.
///
/// The encoding is length-prefixed, so no choice of content can collide with
/// a different message split.
pub fn request_digest(request: &ChatRequest) -> String {
    let mut canonical = String::from("alter3-chat-v1\n");
    let _ = write!(
        canonical,
        "tag:{}:{}\ntemperature:{:.4}\n",
        request.tag.len(),
        request.tag,
        request.temperature
    );
    for message in &request.messages {
        let content = canonical_content(&message.content);
        let _ = write!(
            canonical,
            "{}:{}:{}\n",
            message.role.as_str(),
            content.len(),
            content
        );
    }
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

/// Returns queued responses per tag, in order.
#[derive(Debug, Clone, Default)]
pub struct MockTransport {
    scripts: BTreeMap<String, VecDeque<String>>,
}

impl MockTransport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_script<I, S>(mut self, tag: &str, responses: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.scripts
            .entry(tag.to_string())
            .or_default()
            .extend(responses.into_iter().map(Into::into));
        self
    }

    pub fn remaining(&self, tag: &str) -> usize {
        self.scripts.get(tag).map_or(0, VecDeque::len)
    }
}

impl Transport for MockTransport {
    fn complete(&mut self, request: &ChatRequest) -> Result<ChatResponse, TransportError> {
        let next = self
            .scripts
            .get_mut(request.tag())
            .and_then(VecDeque::pop_front)
            .ok_or_else(|| TransportError::ScriptExhausted {
                tag: request.tag().to_string(),
            })?;
        if next.is_empty() {
            return Err(TransportError::EmptyResponse {
                tag: request.tag().to_string(),
            });
        }
        Ok(ChatResponse {
            content: next,
            source: ResponseSource::Mock,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CassetteEntry {
    pub digest: String,
    pub tag: String,
    pub request: ChatRequest,
    pub response: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Cassette {
    pub recorded_at: String,
    pub model: String,
    /// Entries in recording order.
    entries: Vec<CassetteEntry>,
    index: BTreeMap<String, Vec<usize>>,
}

impl Cassette {
    pub fn new(recorded_at: impl Into<String>, model: impl Into<String>) -> Self {
        Cassette {
            recorded_at: recorded_at.into(),
            model: model.into(),
            ..Self::default()
        }
    }

    /// Appends an entry. Entries are never replaced.
    pub fn push(&mut self, entry: CassetteEntry) {
        self.index
            .entry(entry.digest.clone())
            .or_default()
            .push(self.entries.len());
        self.entries.push(entry);
    }

    pub fn record(&mut self, request: &ChatRequest, response: &str) {
        self.push(CassetteEntry {
            digest: request_digest(request),
            tag: request.tag().to_string(),
            request: request.clone(),
            response: response.to_string(),
        });
    }

    pub fn entries(&self) -> &[CassetteEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Response for the `occurrence`-th use of `digest`, repeating the last one.
    pub fn lookup(&self, digest: &str, occurrence: usize) -> Option<&CassetteEntry> {
        let slots = self.index.get(digest)?;
        let slot = slots.get(occurrence).or_else(|| slots.last())?;
        self.entries.get(*slot)
    }
}

/// Serves responses from a cassette; never touches the network.
#[derive(Debug, Clone)]
pub struct ReplayTransport {
    cassette: Cassette,
    seen: BTreeMap<String, usize>,
}

impl ReplayTransport {
    pub fn new(cassette: Cassette) -> Self {
        ReplayTransport {
            cassette,
            seen: BTreeMap::new(),
        }
    }
}

impl Transport for ReplayTransport {
    fn complete(&mut self, request: &ChatRequest) -> Result<ChatResponse, TransportError> {
        let digest = request_digest(request);
        let occurrence = self.seen.get(&digest).copied().unwrap_or(0);
        let entry = self
            .cassette
            .lookup(&digest, occurrence)
            .ok_or_else(|| TransportError::CassetteMiss {
                digest: digest.clone(),
                tag: request.tag().to_string(),
            })?;
        let content = entry.response.clone();
        self.seen.insert(digest, occurrence + 1);
        Ok(ChatResponse {
            content,
            source: ResponseSource::Replay,
        })
    }
}

/// Forwards to an inner transport and records every exchange.
#[derive(Debug)]
pub struct RecordingTransport<T> {
    inner: T,
    cassette: Cassette,
}

impl<T: Transport> RecordingTransport<T> {
    pub fn new(inner: T, cassette: Cassette) -> Self {
        RecordingTransport { inner, cassette }
    }

    pub fn cassette(&self) -> &Cassette {
        &self.cassette
    }

    pub fn into_cassette(self) -> Cassette {
        self.cassette
    }
}

impl<T: Transport> Transport for RecordingTransport<T> {
    fn complete(&mut self, request: &ChatRequest) -> Result<ChatResponse, TransportError> {
        let response = self.inner.complete(request)?;
        self.cassette.record(request, &response.content);
        Ok(response)
    }

    fn is_live(&self) -> bool {
        self.inner.is_live()
    }
}
