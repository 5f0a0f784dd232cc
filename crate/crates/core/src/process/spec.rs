use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::process::tree::{ContextTree, TreeSpec};
use crate::process::ContextKernel;
use crate::simplex::{Alphabet, ProbVec};

/// JSON description of a process: `{"process": name, "params": {...}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProcessSpec {
    pub process: String,
    #[serde(default, skip_serializing_if = "Value::is_null")]
    pub params: Value,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NoParams {}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct QParams {
    q: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct IidParams {
    alphabet: Vec<String>,
    probs: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MarkovParams {
    alphabet: Vec<String>,
    #[serde(default = "one")]
    order: usize,
    matrix: Vec<Vec<f64>>,
}

fn one() -> usize {
    1
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct VlmcParams {
    alphabet: Vec<String>,
    tree: TreeSpec,
}

fn params<T: for<'de> Deserialize<'de>>(v: &Value) -> Result<T> {
    let v = if v.is_null() {
        Value::Object(Default::default())
    } else {
        v.clone()
    };
    serde_json::from_value(v).map_err(|e| Error::InvalidSpec(e.to_string()))
}

impl ProcessSpec {
    pub fn new(process: &str, params: Value) -> Self {
        Self {
            process: process.to_string(),
            params,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidSpec(e.to_string()))
    }

    pub fn build(&self) -> Result<ContextKernel> {
        match self.process.as_str() {
            "parity" => {
                params::<NoParams>(&self.params)?;
                Ok(ContextKernel::parity_chain())
            }
            "rwrs" => {
                params::<NoParams>(&self.params)?;
                Ok(ContextKernel::rwrs())
            }
            "misread_rwrs" => ContextKernel::misread_rwrs(params::<QParams>(&self.params)?.q),
            "renewed_rwrs" => ContextKernel::renewed_rwrs(params::<QParams>(&self.params)?.q),
            "iid" => {
                let p: IidParams = params(&self.params)?;
                let alphabet = Alphabet::new(p.alphabet)?;
                ContextKernel::iid(ProbVec::new(alphabet, p.probs)?)
            }
            "markov" => {
                let p: MarkovParams = params(&self.params)?;
                ContextKernel::markov(Alphabet::new(p.alphabet)?, p.order, p.matrix)
            }
            "vlmc" => {
                let p: VlmcParams = params(&self.params)?;
                let alphabet = Alphabet::new(p.alphabet)?;
                let tree = ContextTree::from_spec(&alphabet, &p.tree)?;
                ContextKernel::vlmc(alphabet, tree)
            }
            other => Err(Error::InvalidSpec(format!("unknown process {other:?}"))),
        }
    }
}
