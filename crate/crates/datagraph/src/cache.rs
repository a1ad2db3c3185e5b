//! Per-session response cache keyed by `(node id, canonical query hash)`.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use datagraph_core::graph::{Node, NodeId};
use datagraph_core::query::{Backend, Query, QueryResponse};
use datagraph_core::BackendError;

/// Wraps a backend so identical `(node, query)` pairs are answered once.
///
/// Hits return the stored response with `backend_calls = 0`. Errors are
/// passed through and never stored. Concurrent identical misses may both
/// reach the inner backend; the first stored answer wins.
pub struct CachedBackend<B> {
    inner: B,
    entries: Mutex<HashMap<(NodeId, String), QueryResponse>>,
    hits: AtomicU64,
    misses: AtomicU64,
}

impl<B: Backend> CachedBackend<B> {
    pub fn new(inner: B) -> Self {
        CachedBackend {
            inner,
            entries: Mutex::new(HashMap::new()),
            hits: AtomicU64::new(0),
            misses: AtomicU64::new(0),
        }
    }

    pub fn hits(&self) -> u64 {
        self.hits.load(Ordering::Relaxed)
    }

    pub fn misses(&self) -> u64 {
        self.misses.load(Ordering::Relaxed)
    }

    pub fn len(&self) -> usize {
        self.entries.lock().unwrap_or_else(|p| p.into_inner()).len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn inner(&self) -> &B {
        &self.inner
    }
}

impl<B: Backend> Backend for CachedBackend<B> {
    fn answer(&self, node: &Node, query: &Query) -> Result<QueryResponse, BackendError> {
        let key = (node.id, query.canonical_hash());
        if let Some(hit) = self.entries.lock().unwrap_or_else(|p| p.into_inner()).get(&key) {
            self.hits.fetch_add(1, Ordering::Relaxed);
            return Ok(QueryResponse {
                backend_calls: 0,
                ..hit.clone()
            });
        }
        self.misses.fetch_add(1, Ordering::Relaxed);
        let response = self.inner.answer(node, query)?;
        self.entries
            .lock()
            .unwrap_or_else(|p| p.into_inner())
            .entry(key)
            .or_insert_with(|| response.clone());
        Ok(response)
    }

    fn reports_positions(&self) -> bool {
        self.inner.reports_positions()
    }
}
