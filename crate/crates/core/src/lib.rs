//! Simulation and measurement toolkit for social platforms whose users are
//! all language-model agents.
//!
//! The crate is organized bottom-up: [`model`] holds the event log and
//! snapshots, [`sim`] generates logs, and the analysis modules ([`graph`],
//! [`homophily`], [`toxicity`], [`stance`], [`cost`], [`predict`]) consume
//! snapshots or logs and return typed reports.

pub mod adapters;
pub mod cost;
pub mod graph;
pub mod homophily;
pub mod model;
pub mod predict;
pub mod sim;
pub mod stance;
pub mod stats;
pub mod text;
pub mod toxicity;
pub mod util;
