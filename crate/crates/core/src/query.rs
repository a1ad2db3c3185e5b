//! Queries, responses, and the backends that answer a query against one
//! node's scene.
//!
//! Three backends live here because they need nothing from the host:
//! [`OracleBackend`] answers from snapshot annotations, [`ReplayBackend`]
//! serves recorded responses. The HTTP adapter and the caching wrapper live
//! in the std companion crate.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write as _;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::BackendError;
use crate::graph::{Node, NodeId, SceneObject, Snapshot};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QueryMode {
    Find,
    Count,
    AssessHazard,
}

impl QueryMode {
    pub fn as_str(self) -> &'static str {
        match self {
            QueryMode::Find => "find",
            QueryMode::Count => "count",
            QueryMode::AssessHazard => "assess_hazard",
        }
    }
}

/// Conjunction of an optional label clause and attribute equality clauses.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Predicate {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label_equals: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub attribute_equals: Vec<(String, String)>,
}

impl Predicate {
    pub fn label(label: impl Into<String>) -> Self {
        Predicate {
            label_equals: Some(label.into()),
            attribute_equals: Vec::new(),
        }
    }

    pub fn attribute(key: impl Into<String>, value: impl Into<String>) -> Self {
        Predicate {
            label_equals: None,
            attribute_equals: alloc::vec![(key.into(), value.into())],
        }
    }

    pub fn and_attribute(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.attribute_equals.push((key.into(), value.into()));
        self
    }

    pub fn is_valid(&self) -> bool {
        self.label_equals.is_some() || !self.attribute_equals.is_empty()
    }

    /// Lowercased label and attribute clauses sorted by key, then value.
    pub fn canonical(&self) -> Predicate {
        let mut attribute_equals = self.attribute_equals.clone();
        attribute_equals.sort();
        attribute_equals.dedup();
        Predicate {
            label_equals: self.label_equals.as_ref().map(|l| l.to_lowercase()),
            attribute_equals,
        }
    }

    pub fn matches_parts(&self, label: &str, attributes: &BTreeMap<String, String>) -> bool {
        if let Some(want) = &self.label_equals {
            if want.to_lowercase() != label {
                return false;
            }
        }
        self.attribute_equals
            .iter()
            .all(|(k, v)| attributes.get(k).is_some_and(|have| have == v))
    }
}

/// True iff every clause present in `predicate` holds for `object`.
pub fn predicate_eval(predicate: &Predicate, object: &SceneObject) -> bool {
    predicate.matches_parts(&object.label, &object.attributes)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Query {
    pub text: String,
    pub predicate: Predicate,
    pub mode: QueryMode,
}

impl Query {
    pub fn new(text: impl Into<String>, predicate: Predicate, mode: QueryMode) -> Self {
        Query {
            text: text.into(),
            predicate,
            mode,
        }
    }

    pub fn find(text: impl Into<String>, predicate: Predicate) -> Self {
        Self::new(text, predicate, QueryMode::Find)
    }

    pub fn count(text: impl Into<String>, predicate: Predicate) -> Self {
        Self::new(text, predicate, QueryMode::Count)
    }

    pub fn check(&self) -> Result<(), BackendError> {
        if self.text.is_empty() {
            return Err(BackendError::InvalidQuery("query text is empty"));
        }
        if !self.predicate.is_valid() {
            return Err(BackendError::InvalidQuery("predicate has no clauses"));
        }
        Ok(())
    }

    /// Stable text form used for hashing. Attribute clause order and label
    /// case do not change it.
    pub fn canonical_string(&self) -> String {
        let p = self.predicate.canonical();
        let mut s = String::new();
        let _ = write!(s, "mode={}\nlabel=", self.mode.as_str());
        if let Some(l) = &p.label_equals {
            let _ = write!(s, "{}:{}", l.len(), l);
        }
        s.push_str("\nattrs=");
        for (k, v) in &p.attribute_equals {
            let _ = write!(s, "{}:{}={}:{};", k.len(), k, v.len(), v);
        }
        let _ = write!(s, "\ntext={}:{}", self.text.len(), self.text);
        s
    }

    /// First 64 bits of the SHA-256 of [`Query::canonical_string`], as hex.
    pub fn canonical_hash(&self) -> String {
        let digest = Sha256::digest(self.canonical_string().as_bytes());
        let mut out = String::with_capacity(16);
        for byte in &digest[..8] {
            let _ = write!(out, "{byte:02x}");
        }
        out
    }
}

/// One node's answer to a query.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QueryResponse {
    pub node: NodeId,
    pub satisfied: bool,
    #[serde(default)]
    pub matches: Vec<SceneObject>,
    #[serde(default)]
    pub count: u64,
    #[serde(default)]
    pub text: String,
    /// Backend invocations spent producing this response; 0 when served
    /// from a cache or a replay store.
    pub backend_calls: u32,
}

/// The `answer(scene, query)` call made once per visited node.
pub trait Backend {
    fn answer(&self, node: &Node, query: &Query) -> Result<QueryResponse, BackendError>;

    /// Whether matched objects carry meaningful world positions.
    fn reports_positions(&self) -> bool {
        true
    }
}

impl<B: Backend + ?Sized> Backend for &B {
    fn answer(&self, node: &Node, query: &Query) -> Result<QueryResponse, BackendError> {
        (**self).answer(node, query)
    }

    fn reports_positions(&self) -> bool {
        (**self).reports_positions()
    }
}

impl<B: Backend + ?Sized> Backend for alloc::boxed::Box<B> {
    fn answer(&self, node: &Node, query: &Query) -> Result<QueryResponse, BackendError> {
        (**self).answer(node, query)
    }

    fn reports_positions(&self) -> bool {
        (**self).reports_positions()
    }
}

/// Answers by exact predicate matching over snapshot annotations.
///
/// `assess_hazard` is evaluated like `find`.
pub fn oracle_answer(snapshot: &Snapshot, query: &Query) -> Result<QueryResponse, BackendError> {
    query.check()?;
    let matches: Vec<SceneObject> = snapshot
        .objects
        .iter()
        .filter(|o| predicate_eval(&query.predicate, o))
        .cloned()
        .collect();
    let count = matches.len() as u64;
    let satisfied = !matches.is_empty();
    let text = render_summary(query.mode, &matches);
    Ok(QueryResponse {
        node: NodeId(0),
        satisfied,
        matches,
        count,
        text,
        backend_calls: 1,
    })
}

fn render_summary(mode: QueryMode, matches: &[SceneObject]) -> String {
    let mut text = match (mode, matches.len()) {
        (QueryMode::Count, n) => format!("count: {n}"),
        (QueryMode::AssessHazard, 0) => String::from("no hazard observed"),
        (QueryMode::AssessHazard, n) => format!("hazard observed ({n})"),
        (QueryMode::Find, 0) => String::from("not found"),
        (QueryMode::Find, n) => format!("found {n}"),
    };
    for (i, obj) in matches.iter().enumerate() {
        text.push_str(if i == 0 { ": " } else { ", " });
        text.push_str(&obj.label);
        if !obj.attributes.is_empty() {
            text.push('{');
            for (j, (k, v)) in obj.attributes.iter().enumerate() {
                if j > 0 {
                    text.push(',');
                }
                let _ = write!(text, "{k}={v}");
            }
            text.push('}');
        }
    }
    text
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OracleBackend;

impl Backend for OracleBackend {
    fn answer(&self, node: &Node, query: &Query) -> Result<QueryResponse, BackendError> {
        let mut response = oracle_answer(&node.snapshot, query)?;
        response.node = node.id;
        Ok(response)
    }
}

pub const REPLAY_FORMAT_VERSION: u32 = 1;

/// Key under which a response is recorded: `"{node}:{canonical hash}"`.
pub fn replay_key(node: NodeId, query: &Query) -> String {
    format!("{}:{}", node, query.canonical_hash())
}

/// Recorded responses keyed by [`replay_key`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplayStore {
    pub format_version: u32,
    pub responses: BTreeMap<String, QueryResponse>,
}

impl Default for ReplayStore {
    fn default() -> Self {
        ReplayStore {
            format_version: REPLAY_FORMAT_VERSION,
            responses: BTreeMap::new(),
        }
    }
}

impl ReplayStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.responses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.responses.is_empty()
    }

    /// Stores `response` without its call accounting.
    pub fn record(&mut self, query: &Query, response: &QueryResponse) {
        let mut stored = response.clone();
        stored.backend_calls = 0;
        self.responses.insert(replay_key(response.node, query), stored);
    }

    pub fn lookup(&self, node: NodeId, query: &Query) -> Result<QueryResponse, BackendError> {
        let hash = query.canonical_hash();
        let key = format!("{node}:{hash}");
        match self.responses.get(&key) {
            Some(r) => {
                let mut r = r.clone();
                r.node = node;
                // A replayed answer stands in for one model call, so reports
                // from a replay match the recording run.
                r.backend_calls = 1;
                Ok(r)
            }
            None => Err(BackendError::ReplayMiss {
                node,
                query_hash: hash,
            }),
        }
    }
}

pub fn replay_answer(store: &ReplayStore, node: NodeId, query: &Query) -> Result<QueryResponse, BackendError> {
    store.lookup(node, query)
}

#[derive(Clone, Debug, Default)]
pub struct ReplayBackend {
    store: ReplayStore,
}

impl ReplayBackend {
    pub fn new(store: ReplayStore) -> Self {
        ReplayBackend { store }
    }

    pub fn store(&self) -> &ReplayStore {
        &self.store
    }
}

impl Backend for ReplayBackend {
    fn answer(&self, node: &Node, query: &Query) -> Result<QueryResponse, BackendError> {
        self.store.lookup(node.id, query)
    }
}
