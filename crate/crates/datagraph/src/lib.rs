pub mod cache;
pub mod error;
pub mod formats;
pub mod mock;
pub mod record;
pub mod remote;
pub mod config;
pub mod harness;
pub mod report;

pub use cache::CachedBackend;
pub use config::{BackendConfig, ExperimentConfig, ReportFormat, Strategy, TaskConfig, WorldSource};
pub use error::{Error, Result};
pub use harness::{Harness, RouteRequest};
pub use mock::{MockReply, MockServer};
pub use record::RecordingBackend;
pub use remote::{RemoteBackend, RemoteEndpointConfig};
pub use report::{AggregateRunReport, MetricsReport, RouteScanReport, TrialRecord};
