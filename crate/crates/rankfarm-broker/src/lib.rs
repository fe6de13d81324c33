//! JSON-over-HTTP facade over the ranking engine: register a QoS hierarchy
//! and service offerings, then rank candidates per request.
//!
//! Endpoints:
//! - `PUT /v1/hierarchy`: set the active hierarchy (hierarchy template body)
//! - `PUT /v1/offerings/{id}`: upsert one offering (offering record body)
//! - `POST /v1/rank`: match and rank against a requirements body
//! - `GET /v1/reports/{id}`: fetch a stored ranking response
//! - `GET /v1/healthz`: liveness
//!
//! Mutations are serialized behind a single writer; ranking reads an
//! immutable snapshot of the registry, so responses are pure functions of
//! (registry revision, request body) and replays are byte-identical.

mod server;
mod state;

pub use server::{router, serve};
pub use state::{BrokerState, RankRequest, RankResponse, StateError};
