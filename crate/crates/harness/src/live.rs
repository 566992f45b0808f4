//! OpenAI-compatible chat-completions client.
//!
//! Not exercised by the test suite beyond request construction and a refused
//! connection; replay cassettes are the supported way to run experiments.

use std::time::Duration;

use alter3_core::{ChatRequest, ChatResponse, ResponseSource, Transport, TransportError};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LiveConfig {
    pub base_url: String,
    pub model: String,
    /// Name of the environment variable holding the API key.
    pub api_key_env: String,
    pub timeout_secs: u64,
}

impl Default for LiveConfig {
    fn default() -> Self {
        LiveConfig {
            base_url: "https://api.openai.com/v1".into(),
            model: "gpt-4o".into(),
            api_key_env: "ALTER3_API_KEY".into(),
            timeout_secs: 120,
        }
    }
}

pub struct LiveTransport {
    agent: ureq::Agent,
    url: String,
    model: String,
    api_key: String,
}

impl LiveTransport {
    pub fn new(config: &LiveConfig, api_key: String) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(config.timeout_secs)))
            .build()
            .into();
        LiveTransport {
            agent,
            url: format!("{}/chat/completions", config.base_url.trim_end_matches('/')),
            model: config.model.clone(),
            api_key,
        }
    }

    /// Reads the key from the configured environment variable.
    pub fn from_env(config: &LiveConfig) -> Result<Self, String> {
        let key = std::env::var(&config.api_key_env)
            .map_err(|_| format!("environment variable {} is not set", config.api_key_env))?;
        Ok(Self::new(config, key))
    }

    pub fn model(&self) -> &str {
        &self.model
    }
}

pub fn request_body(model: &str, request: &ChatRequest) -> Value {
    let messages: Vec<Value> = request
        .messages()
        .iter()
        .map(|m| json!({"role": m.role.as_str(), "content": m.content}))
        .collect();
    json!({
        "model": model,
        "temperature": request.temperature(),
        "messages": messages,
    })
}

impl Transport for LiveTransport {
    fn complete(&mut self, request: &ChatRequest) -> Result<ChatResponse, TransportError> {
        let network = |e: ureq::Error| TransportError::Network(e.to_string());
        let mut response = self
            .agent
            .post(&self.url)
            .header("Authorization", &format!("Bearer {}", self.api_key))
            .send_json(request_body(&self.model, request))
            .map_err(network)?;
        let body: Value = response.body_mut().read_json().map_err(network)?;
        let content = body["choices"][0]["message"]["content"]
            .as_str()
            .unwrap_or_default()
            .to_string();
        if content.trim().is_empty() {
            return Err(TransportError::EmptyResponse {
                tag: request.tag().to_string(),
            });
        }
        Ok(ChatResponse {
            content,
            source: ResponseSource::Live,
        })
    }

    fn is_live(&self) -> bool {
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alter3_core::ChatMessage;

    #[test]
    fn body_shape() {
        let req = ChatRequest::new(
            vec![ChatMessage::system("s"), ChatMessage::user("u")],
            0.5,
            "prompt-1",
        )
        .unwrap();
        let body = request_body("m", &req);
        assert_eq!(body["messages"][0]["role"], "system");
        assert_eq!(body["messages"][1]["content"], "u");
        assert_eq!(body["temperature"], 0.5);
    }

    #[test]
    fn refused_connection_is_a_transport_error() {
        let config = LiveConfig {
            base_url: "http://127.0.0.1:9".into(),
            timeout_secs: 5,
            ..LiveConfig::default()
        };
        let mut live = LiveTransport::new(&config, "k".into());
        let req = ChatRequest::new(vec![ChatMessage::user("u")], 0.0, "t").unwrap();
        assert!(matches!(live.complete(&req), Err(TransportError::Network(_))));
    }
}
