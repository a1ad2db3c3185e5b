use std::sync::Mutex;

use datagraph_core::graph::Node;
use datagraph_core::query::{Backend, Query, QueryResponse, ReplayStore};
use datagraph_core::BackendError;

/// Forwards to `inner` and records every successful response for later replay.
pub struct RecordingBackend<B> {
    inner: B,
    store: Mutex<ReplayStore>,
}

impl<B: Backend> RecordingBackend<B> {
    pub fn new(inner: B) -> Self {
        RecordingBackend {
            inner,
            store: Mutex::new(ReplayStore::new()),
        }
    }

    pub fn store(&self) -> ReplayStore {
        self.store.lock().unwrap_or_else(|p| p.into_inner()).clone()
    }

    pub fn into_store(self) -> ReplayStore {
        self.store.into_inner().unwrap_or_else(|p| p.into_inner())
    }
}

impl<B: Backend> Backend for RecordingBackend<B> {
    fn answer(&self, node: &Node, query: &Query) -> Result<QueryResponse, BackendError> {
        let response = self.inner.answer(node, query)?;
        self.store
            .lock()
            .unwrap_or_else(|p| p.into_inner())
            .record(query, &response);
        Ok(response)
    }

    fn reports_positions(&self) -> bool {
        self.inner.reports_positions()
    }
}
