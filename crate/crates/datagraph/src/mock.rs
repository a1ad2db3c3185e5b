//! A small in-process HTTP server for exercising [`crate::remote`] clients.
//!
//! Each request is handled on its own thread so concurrency is observable.
//! The server tracks how many requests are in flight and, when given a
//! limit, counts every moment that limit was exceeded.

use std::net::SocketAddr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;
use std::time::Duration;

use tiny_http::{Header, Response, Server};

#[derive(Clone, Debug)]
pub struct RecordedRequest {
    pub method: String,
    pub path: String,
    pub authorization: Option<String>,
    pub body: String,
}

impl RecordedRequest {
    pub fn json(&self) -> Option<serde_json::Value> {
        serde_json::from_str(&self.body).ok()
    }
}

#[derive(Clone, Debug)]
pub struct MockReply {
    pub status: u16,
    pub body: String,
    pub delay: Duration,
}

impl MockReply {
    pub fn json(body: impl Into<String>) -> Self {
        MockReply {
            status: 200,
            body: body.into(),
            delay: Duration::ZERO,
        }
    }

    pub fn status(status: u16, body: impl Into<String>) -> Self {
        MockReply {
            status,
            body: body.into(),
            delay: Duration::ZERO,
        }
    }

    pub fn delayed(mut self, delay: Duration) -> Self {
        self.delay = delay;
        self
    }
}

/// Canned replies matching the conformance cases.
pub mod fixtures {
    use super::MockReply;
    use std::time::Duration;

    pub const SUCCESS_BODY: &str =
        r#"{"satisfied":true,"objects":[{"label":"keyfob","attributes":{"number":"42"}}],"text":"keyfob 42 on the shelf"}"#;

    pub fn success() -> MockReply {
        MockReply::json(SUCCESS_BODY)
    }

    pub fn slow(delay: Duration) -> MockReply {
        success().delayed(delay)
    }

    pub fn server_error() -> MockReply {
        MockReply::status(500, r#"{"error":"internal"}"#)
    }

    pub fn malformed() -> MockReply {
        MockReply::json(r#"{"satisfied": tru"#)
    }
}

type Responder = dyn Fn(&RecordedRequest) -> MockReply + Send + Sync;

struct State {
    responder: Box<Responder>,
    in_flight: AtomicUsize,
    peak: AtomicUsize,
    limit: Option<usize>,
    violations: AtomicUsize,
    requests: Mutex<Vec<RecordedRequest>>,
}

pub struct MockServer {
    server: Arc<Server>,
    addr: SocketAddr,
    state: Arc<State>,
    accept: Option<JoinHandle<()>>,
    workers: Arc<Mutex<Vec<JoinHandle<()>>>>,
}

impl MockServer {
    /// Starts on an ephemeral localhost port.
    pub fn start(
        in_flight_limit: Option<usize>,
        responder: impl Fn(&RecordedRequest) -> MockReply + Send + Sync + 'static,
    ) -> std::io::Result<Self> {
        let server = Server::http("127.0.0.1:0").map_err(std::io::Error::other)?;
        let addr = server
            .server_addr()
            .to_ip()
            .ok_or_else(|| std::io::Error::other("mock server is not bound to an IP address"))?;
        let server = Arc::new(server);
        let state = Arc::new(State {
            responder: Box::new(responder),
            in_flight: AtomicUsize::new(0),
            peak: AtomicUsize::new(0),
            limit: in_flight_limit,
            violations: AtomicUsize::new(0),
            requests: Mutex::new(Vec::new()),
        });
        let workers: Arc<Mutex<Vec<JoinHandle<()>>>> = Arc::default();
        let accept = {
            let server = Arc::clone(&server);
            let state = Arc::clone(&state);
            let workers = Arc::clone(&workers);
            std::thread::spawn(move || {
                for request in server.incoming_requests() {
                    let state = Arc::clone(&state);
                    let handle = std::thread::spawn(move || handle(&state, request));
                    workers.lock().unwrap_or_else(|p| p.into_inner()).push(handle);
                }
            })
        };
        Ok(MockServer {
            server,
            addr,
            state,
            accept: Some(accept),
            workers,
        })
    }

    /// Serves the same reply to every request.
    pub fn always(in_flight_limit: Option<usize>, reply: MockReply) -> std::io::Result<Self> {
        Self::start(in_flight_limit, move |_| reply.clone())
    }

    pub fn base_url(&self) -> String {
        format!("http://{}", self.addr)
    }

    pub fn peak_in_flight(&self) -> usize {
        self.state.peak.load(Ordering::SeqCst)
    }

    /// Number of requests that arrived while the limit was already reached.
    pub fn limit_violations(&self) -> usize {
        self.state.violations.load(Ordering::SeqCst)
    }

    pub fn requests(&self) -> Vec<RecordedRequest> {
        self.state.requests.lock().unwrap_or_else(|p| p.into_inner()).clone()
    }

    /// Panics if the in-flight limit was ever exceeded.
    pub fn assert_within_limit(&self) {
        if let Some(limit) = self.state.limit {
            assert_eq!(
                self.limit_violations(),
                0,
                "mock server saw {} concurrent requests, limit {limit}",
                self.peak_in_flight()
            );
        }
    }
}

fn handle(state: &State, mut request: tiny_http::Request) {
    let now = state.in_flight.fetch_add(1, Ordering::SeqCst) + 1;
    state.peak.fetch_max(now, Ordering::SeqCst);
    if state.limit.is_some_and(|limit| now > limit) {
        state.violations.fetch_add(1, Ordering::SeqCst);
    }

    let mut body = String::new();
    let _ = request.as_reader().read_to_string(&mut body);
    let recorded = RecordedRequest {
        method: request.method().to_string(),
        path: request.url().to_string(),
        authorization: request
            .headers()
            .iter()
            .find(|h| h.field.equiv("Authorization"))
            .map(|h| h.value.to_string()),
        body,
    };
    let reply = (state.responder)(&recorded);
    state.requests.lock().unwrap_or_else(|p| p.into_inner()).push(recorded);
    if !reply.delay.is_zero() {
        std::thread::sleep(reply.delay);
    }
    // Leave the in-flight set before the client can see the reply.
    state.in_flight.fetch_sub(1, Ordering::SeqCst);
    let header = Header::from_bytes("Content-Type", "application/json").expect("static header is valid");
    let response = Response::from_string(reply.body)
        .with_status_code(reply.status)
        .with_header(header);
    let _ = request.respond(response);
}

impl Drop for MockServer {
    fn drop(&mut self) {
        self.server.unblock();
        if let Some(accept) = self.accept.take() {
            let _ = accept.join();
        }
        let workers = std::mem::take(&mut *self.workers.lock().unwrap_or_else(|p| p.into_inner()));
        for w in workers {
            let _ = w.join();
        }
    }
}
