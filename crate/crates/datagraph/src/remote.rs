//! HTTP adapter for a remote multimodal model service.
//!
//! Wire format, `POST {base_url}/query`:
//!
//! ```text
//! request  {"query_text": str, "mode": "find"|"count"|"assess_hazard", "node_id": int,
//!           "payload_ref": str|null, "objects_hint": null|[{label, attributes, world_position, instance_id}]}
//! response {"satisfied": bool, "count": int?, "objects": [{"label", "attributes"}]?, "text": str}
//! ```
//!
//! A bearer token is sent when configured. Every failure surfaces as a
//! [`BackendError`]; no verdict is ever made up on an error path.

use std::collections::BTreeMap;
use std::sync::{Condvar, Mutex};
use std::time::Duration;

use datagraph_core::graph::{Node, SceneObject};
use datagraph_core::query::{Backend, Query, QueryMode, QueryResponse};
use datagraph_core::BackendError;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const ERROR_BODY_LIMIT: usize = 512;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RemoteEndpointConfig {
    pub base_url: String,
    pub timeout_ms: u64,
    pub max_in_flight: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub auth_token: Option<String>,
    /// Send the node's annotated objects along as `objects_hint`.
    #[serde(default)]
    pub forward_annotations: bool,
}

impl RemoteEndpointConfig {
    pub fn new(base_url: impl Into<String>) -> Self {
        RemoteEndpointConfig {
            base_url: base_url.into(),
            timeout_ms: 30_000,
            max_in_flight: 4,
            auth_token: None,
            forward_annotations: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.timeout_ms == 0 {
            return Err(Error::Config("remote timeout_ms must be >= 1".into()));
        }
        if self.max_in_flight == 0 {
            return Err(Error::Config("remote max_in_flight must be >= 1".into()));
        }
        if !(self.base_url.starts_with("http://") || self.base_url.starts_with("https://")) {
            return Err(Error::Config(format!("remote base_url {:?} is not an http(s) URL", self.base_url)));
        }
        Ok(())
    }
}

#[derive(Debug, Serialize)]
pub struct WireRequest<'a> {
    pub query_text: &'a str,
    pub mode: QueryMode,
    pub node_id: u32,
    pub payload_ref: Option<&'a str>,
    pub objects_hint: Option<&'a [SceneObject]>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireObject {
    label: String,
    #[serde(default)]
    attributes: BTreeMap<String, String>,
}

#[derive(Debug, Deserialize)]
struct WireResponse {
    satisfied: bool,
    #[serde(default)]
    count: Option<u64>,
    #[serde(default)]
    objects: Option<Vec<WireObject>>,
    text: String,
}

/// Counting semaphore bounding concurrent requests.
struct Gate {
    in_use: Mutex<usize>,
    freed: Condvar,
    limit: usize,
}

struct Permit<'a>(&'a Gate);

impl Gate {
    fn acquire(&self) -> Permit<'_> {
        let mut n = self.in_use.lock().unwrap_or_else(|p| p.into_inner());
        while *n >= self.limit {
            n = self.freed.wait(n).unwrap_or_else(|p| p.into_inner());
        }
        *n += 1;
        Permit(self)
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        let mut n = self.0.in_use.lock().unwrap_or_else(|p| p.into_inner());
        *n -= 1;
        self.0.freed.notify_one();
    }
}

pub struct RemoteBackend {
    config: RemoteEndpointConfig,
    endpoint: String,
    client: reqwest::blocking::Client,
    gate: Gate,
}

impl RemoteBackend {
    pub fn new(config: RemoteEndpointConfig) -> Result<Self> {
        config.validate()?;
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_millis(config.timeout_ms))
            .build()
            .map_err(|e| Error::Config(format!("cannot build HTTP client: {e}")))?;
        let endpoint = format!("{}/query", config.base_url.trim_end_matches('/'));
        Ok(RemoteBackend {
            gate: Gate {
                in_use: Mutex::new(0),
                freed: Condvar::new(),
                limit: config.max_in_flight,
            },
            config,
            endpoint,
            client,
        })
    }

    pub fn config(&self) -> &RemoteEndpointConfig {
        &self.config
    }

    fn classify(&self, err: reqwest::Error) -> BackendError {
        if err.is_timeout() {
            BackendError::Timeout {
                timeout_ms: self.config.timeout_ms,
            }
        } else {
            BackendError::Transport(err.to_string())
        }
    }
}

/// Maps a successful response body into a [`QueryResponse`].
pub fn parse_wire_response(node: &Node, body: &str) -> Result<QueryResponse, BackendError> {
    let wire: WireResponse =
        serde_json::from_str(body).map_err(|e| BackendError::MalformedResponse(e.to_string()))?;
    let matches: Vec<SceneObject> = wire
        .objects
        .unwrap_or_default()
        .into_iter()
        .map(|o| {
            if o.label.is_empty() {
                return Err(BackendError::MalformedResponse("object with empty label".into()));
            }
            Ok(SceneObject {
                label: o.label,
                attributes: o.attributes,
                world_position: [0.0; 3],
                instance_id: -1,
            })
        })
        .collect::<Result<_, _>>()?;
    let count = wire.count.unwrap_or(matches.len() as u64);
    Ok(QueryResponse {
        node: node.id,
        satisfied: wire.satisfied,
        matches,
        count,
        text: wire.text,
        backend_calls: 1,
    })
}

pub fn remote_answer(backend: &RemoteBackend, node: &Node, query: &Query) -> Result<QueryResponse, BackendError> {
    backend.answer(node, query)
}

impl Backend for RemoteBackend {
    fn answer(&self, node: &Node, query: &Query) -> Result<QueryResponse, BackendError> {
        query.check()?;
        let request = WireRequest {
            query_text: &query.text,
            mode: query.mode,
            node_id: node.id.0,
            payload_ref: node.snapshot.payload_ref.as_deref(),
            objects_hint: self
                .config
                .forward_annotations
                .then_some(node.snapshot.objects.as_slice()),
        };
        let _permit = self.gate.acquire();
        let mut builder = self.client.post(&self.endpoint).json(&request);
        if let Some(token) = &self.config.auth_token {
            builder = builder.bearer_auth(token);
        }
        let response = builder.send().map_err(|e| self.classify(e))?;
        let status = response.status();
        let body = response.text().map_err(|e| self.classify(e))?;
        if !status.is_success() {
            let mut body = body;
            if body.len() > ERROR_BODY_LIMIT {
                let mut cut = ERROR_BODY_LIMIT;
                while !body.is_char_boundary(cut) {
                    cut -= 1;
                }
                body.truncate(cut);
            }
            return Err(BackendError::Protocol {
                status: status.as_u16(),
                body,
            });
        }
        parse_wire_response(node, &body)
    }

    fn reports_positions(&self) -> bool {
        false
    }
}
