//! Chat-completion client for hosted or local language-model planners.

use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use super::prompt::{CorrectablePrompt, MissionPrompt, MISSION_SYSTEM_MESSAGE};

pub const DEFAULT_API_KEY_ENV: &str = "PLANNER_API_KEY";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RemoteError {
    #[error("planner configuration error: {0}")]
    Config(String),
    #[error("planner transport error after {attempts} attempt(s): {message}")]
    Transport { attempts: u32, message: String },
    #[error("planner service returned status {status}: {body_excerpt}")]
    Service { status: u16, body_excerpt: String },
    #[error("planner response malformed: {0}")]
    Response(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemoteConfig {
    pub url: String,
    pub model: String,
    pub timeout_s: f64,
    /// Retries after the first attempt for transport failures, 5xx and 429.
    pub max_transport_retries: u32,
    pub temperature: f64,
    /// Environment variable holding the bearer token.
    pub api_key_env: String,
    pub backoff_initial_ms: u64,
    pub backoff_max_ms: u64,
}

impl Default for RemoteConfig {
    fn default() -> Self {
        Self {
            url: "https://api.openai.com/v1/chat/completions".into(),
            model: "gpt-4.1".into(),
            timeout_s: 30.0,
            max_transport_retries: 2,
            temperature: 0.0,
            api_key_env: DEFAULT_API_KEY_ENV.into(),
            backoff_initial_ms: 500,
            backoff_max_ms: 8_000,
        }
    }
}

impl RemoteConfig {
    /// Delay before retry number `retry` (0-based), doubling and capped.
    pub fn backoff(&self, retry: u32) -> Duration {
        let ms = self
            .backoff_initial_ms
            .saturating_mul(1u64 << retry.min(32))
            .min(self.backoff_max_ms);
        Duration::from_millis(ms)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Completion {
    pub text: String,
    pub attempts: u32,
    pub backoffs: Vec<Duration>,
}

pub struct RemoteClient {
    config: RemoteConfig,
    api_key: String,
    agent: ureq::Agent,
}

enum Failure {
    Retryable(RemoteError),
    Fatal(RemoteError),
}

impl RemoteClient {
    /// Reads the credential from the configured environment variable.
    pub fn from_env(config: RemoteConfig) -> Result<Self, RemoteError> {
        let key = std::env::var(&config.api_key_env)
            .ok()
            .filter(|k| !k.trim().is_empty())
            .ok_or_else(|| RemoteError::Config(format!("environment variable {} is not set", config.api_key_env)))?;
        Self::with_api_key(config, key)
    }

    pub fn with_api_key(config: RemoteConfig, api_key: String) -> Result<Self, RemoteError> {
        if config.url.trim().is_empty() {
            return Err(RemoteError::Config("planner.url is empty".into()));
        }
        if !(config.timeout_s > 0.0) {
            return Err(RemoteError::Config("planner.timeout_s must be > 0".into()));
        }
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs_f64(config.timeout_s)))
            .http_status_as_error(false)
            .build()
            .into();
        Ok(Self { config, api_key, agent })
    }

    pub fn config(&self) -> &RemoteConfig {
        &self.config
    }

    /// Sends one system + user exchange and returns the first choice's text.
    pub fn complete(&self, system: &str, user: &str) -> Result<Completion, RemoteError> {
        let body = json!({
            "model": self.config.model,
            "messages": [
                {"role": "system", "content": system},
                {"role": "user", "content": user},
            ],
            "temperature": self.config.temperature,
        });
        let mut backoffs = Vec::new();
        let mut attempt = 0u32;
        loop {
            attempt += 1;
            match self.send_once(&body, attempt) {
                Ok(text) => {
                    return Ok(Completion {
                        text,
                        attempts: attempt,
                        backoffs,
                    })
                }
                Err(Failure::Fatal(e)) => return Err(e),
                Err(Failure::Retryable(e)) => {
                    let retry = attempt - 1;
                    if retry >= self.config.max_transport_retries {
                        return Err(e);
                    }
                    let delay = self.config.backoff(retry);
                    log_retry(&e, delay);
                    std::thread::sleep(delay);
                    backoffs.push(delay);
                }
            }
        }
    }

    fn send_once(&self, body: &serde_json::Value, attempt: u32) -> Result<String, Failure> {
        let mut response = self
            .agent
            .post(&self.config.url)
            .header("Authorization", &format!("Bearer {}", self.api_key))
            .send_json(body)
            .map_err(|e| {
                let err = RemoteError::Transport {
                    attempts: attempt,
                    message: e.to_string(),
                };
                match e {
                    ureq::Error::BadUri(_) | ureq::Error::Http(_) | ureq::Error::InvalidProxyUrl => Failure::Fatal(err),
                    _ => Failure::Retryable(err),
                }
            })?;
        let status = response.status().as_u16();
        let text = response.body_mut().read_to_string().map_err(|e| {
            Failure::Retryable(RemoteError::Transport {
                attempts: attempt,
                message: e.to_string(),
            })
        })?;
        if !(200..300).contains(&status) {
            let err = RemoteError::Service {
                status,
                body_excerpt: text.chars().take(200).collect(),
            };
            return Err(if status >= 500 || status == 429 {
                Failure::Retryable(err)
            } else {
                Failure::Fatal(err)
            });
        }
        extract_content(&text).map_err(Failure::Fatal)
    }
}

fn log_retry(err: &RemoteError, delay: Duration) {
    if std::env::var_os("WILDFIRE_SWARM_TRACE").is_some() {
        eprintln!("planner request failed ({err}); retrying in {delay:?}");
    }
}

/// Pulls `choices[0].message.content` out of a chat-completion response.
pub fn extract_content(body: &str) -> Result<String, RemoteError> {
    let v: serde_json::Value = serde_json::from_str(body).map_err(|e| RemoteError::Response(e.to_string()))?;
    v.pointer("/choices/0/message/content")
        .and_then(|c| c.as_str())
        .map(str::to_string)
        .ok_or_else(|| RemoteError::Response("missing choices[0].message.content".into()))
}

/// Sends a mission prompt to the configured endpoint and returns the raw
/// model text.
pub fn remote_plan(prompt: &MissionPrompt, config: &RemoteConfig) -> Result<String, RemoteError> {
    let client = RemoteClient::from_env(config.clone())?;
    Ok(client.complete(MISSION_SYSTEM_MESSAGE, &prompt.render())?.text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn backoff_doubles_and_caps() {
        let c = RemoteConfig {
            backoff_initial_ms: 100,
            backoff_max_ms: 350,
            ..RemoteConfig::default()
        };
        let d: Vec<_> = (0..4).map(|r| c.backoff(r).as_millis()).collect();
        assert_eq!(d, vec![100, 200, 350, 350]);
    }

    #[test]
    fn content_extraction() {
        let body = r#"{"choices":[{"message":{"role":"assistant","content":"hi"}}]}"#;
        assert_eq!(extract_content(body).unwrap(), "hi");
        assert!(matches!(extract_content("{}"), Err(RemoteError::Response(_))));
    }

    #[test]
    fn missing_credential_is_config_error() {
        let config = RemoteConfig {
            api_key_env: "WILDFIRE_SWARM_TEST_UNSET_KEY".into(),
            url: "http://127.0.0.1:9/never".into(),
            ..RemoteConfig::default()
        };
        assert!(matches!(RemoteClient::from_env(config), Err(RemoteError::Config(_))));
    }
}
