use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use couplage_core::process::{ContextKernel, ProcessSpec};

use crate::{CliError, Result};

/// A config file split into its envelope fields and the command body.
///
/// The envelope keys `command` and `seed` are optional; every other key
/// belongs to the command and unknown keys are rejected.
#[derive(Debug, Clone)]
pub struct Envelope {
    pub command: &'static str,
    pub seed: Option<u64>,
    body: Map<String, Value>,
}

impl Envelope {
    pub fn parse(text: &str, command: &'static str, seed_flag: Option<u64>) -> Result<Self> {
        let value: Value =
            serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        let Value::Object(mut body) = value else {
            return Err(CliError::Config("config must be a JSON object".into()));
        };
        match body.remove("command") {
            None => {}
            Some(Value::String(c)) if c == command => {}
            Some(other) => {
                return Err(CliError::Config(format!(
                    "config is for command {other}, not {command:?}"
                )))
            }
        }
        let seed = match body.remove("seed") {
            None | Some(Value::Null) => None,
            Some(v) => Some(
                v.as_u64()
                    .ok_or_else(|| CliError::Config(format!("seed {v} is not a u64")))?,
            ),
        };
        Ok(Self {
            command,
            seed: seed_flag.or(seed),
            body,
        })
    }

    pub fn body<T: DeserializeOwned>(&self) -> Result<T> {
        serde_json::from_value(Value::Object(self.body.clone()))
            .map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn require_seed(&self) -> Result<u64> {
        self.seed.ok_or(CliError::MissingSeed(self.command))
    }

    /// The config echoed in report headers: the command name and the body
    /// with defaults filled in.
    pub fn echo<T: Serialize>(&self, body: &T) -> Value {
        let mut out = Map::new();
        out.insert("command".into(), Value::String(self.command.into()));
        if let Value::Object(b) = serde_json::to_value(body).expect("config serializes") {
            out.extend(b);
        }
        Value::Object(out)
    }
}

pub fn build_kernel(spec: &ProcessSpec) -> Result<ContextKernel> {
    Ok(spec.build()?)
}
