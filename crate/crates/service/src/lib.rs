//! Run service for intent-driven RAN orchestration: persistence, replay,
//! live runs behind an HTTP API, and the command-line front end.

pub mod api;
pub mod live;
pub mod run;
pub mod scorer;
pub mod store;
