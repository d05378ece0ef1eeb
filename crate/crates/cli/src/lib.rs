//! Operational shell around the QA engine: offline index builds, the HTTP
//! service with metrics and fallback routing, and the benchmark harness.

pub mod bench;
pub mod build;
pub mod fallback;
pub mod metrics;
pub mod response;
pub mod server;

pub use bench::{run_bench, BenchReport};
pub use build::{run_build, BuildOptions, BuildSummary};
pub use metrics::ServiceMetrics;
pub use response::{AskRequest, AskResponse, Source};
