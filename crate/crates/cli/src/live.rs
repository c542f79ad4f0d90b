//! Live critic adapter configured from the environment. The engine core
//! stays network-free; only this CLI-side adapter talks HTTP, and nothing in
//! the offline pipeline or test suite depends on it.

use skillpick_core::profiling::{CriticAdapter, CriticError};

use crate::CliError;

pub const ENV_ENDPOINT: &str = "CRITIC_ENDPOINT";
pub const ENV_MODEL: &str = "CRITIC_MODEL";
pub const ENV_API_KEY: &str = "CRITIC_API_KEY";

pub struct LiveCritic {
    endpoint: String,
    model: String,
    api_key: Option<String>,
    client: reqwest::blocking::Client,
}

impl LiveCritic {
    pub fn from_env() -> Result<Self, CliError> {
        let endpoint = std::env::var(ENV_ENDPOINT)
            .map_err(|_| CliError::validation(format!("{ENV_ENDPOINT} is not set")))?;
        let model = std::env::var(ENV_MODEL)
            .map_err(|_| CliError::validation(format!("{ENV_MODEL} is not set")))?;
        let api_key = std::env::var(ENV_API_KEY).ok();
        let client = reqwest::blocking::Client::builder()
            .build()
            .map_err(|e| CliError::validation(format!("http client: {e}")))?;
        Ok(Self {
            endpoint,
            model,
            api_key,
            client,
        })
    }
}

impl CriticAdapter for LiveCritic {
    fn complete(&self, prompt: &str) -> Result<String, CriticError> {
        let body = serde_json::json!({
            "model": self.model,
            "messages": [{ "role": "user", "content": prompt }],
        });
        let mut request = self.client.post(&self.endpoint).json(&body);
        if let Some(key) = &self.api_key {
            request = request.bearer_auth(key);
        }
        let response = request
            .send()
            .map_err(|e| CriticError::Backend(e.to_string()))?;
        let status = response.status();
        let text = response
            .text()
            .map_err(|e| CriticError::Backend(e.to_string()))?;
        if !status.is_success() {
            return Err(CriticError::Backend(format!("{status}: {text}")));
        }
        // Chat-completion bodies carry the reply under choices[0]; anything
        // else is handed to the JSON extractor as-is.
        if let Ok(value) = serde_json::from_str::<serde_json::Value>(&text) {
            if let Some(content) = value
                .pointer("/choices/0/message/content")
                .and_then(|v| v.as_str())
            {
                return Ok(content.to_string());
            }
        }
        Ok(text)
    }

    fn identity(&self) -> String {
        format!("live:{}@{}", self.model, self.endpoint)
    }
}
