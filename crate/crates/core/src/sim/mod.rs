//! Deterministic discrete-event simulation of OSPF LSA origination and
//! flooding in a single area.
//!
//! Routers originate a router LSA at start-up, on every refresh timer and on
//! interface changes, and flood it with per-message link delays drawn from a
//! seeded generator. Monitors record each LSA header crossing an interface
//! of the node they are attached to. Stub monitors are passive leaves that
//! only receive floods and send acknowledgments.

mod engine;
mod scenario;
mod topology;

use std::collections::BTreeMap;

use thiserror::Error;

pub use engine::{run, LsaInstance, SimOutput};
pub use scenario::{
    canned_scenario, load_scenario, parse_scenario, scenario_paper_attacks, scenario_paper_failure, AttackParams,
    EventKind, ScenarioEvent, CANNED_SCENARIOS, PAPER_ATTACKS_DURATION_S, PAPER_FAILURE_DURATION_S,
};
pub use topology::{
    load_topology, random_topology, Endpoint, Host, HostSpec, Link, LinkSpec, Monitor, MonitorSpec, Node, NodeKind,
    RouterSpec, Timers, Topology, TopologyFile, BUILTIN_TOPOLOGIES,
};

use crate::ingest::LsaEvent;

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid topology or scenario:\n  {}", .0.join("\n  "))]
    Validation(Vec<String>),
    #[error("scenario: {0}")]
    Scenario(String),
}

/// Number of LSA update headers (acks excluded) each monitor recorded.
pub fn total_event_counts(logs: &BTreeMap<String, Vec<LsaEvent>>) -> BTreeMap<String, u64> {
    logs.iter()
        .map(|(m, events)| (m.clone(), events.iter().filter(|e| !e.is_ack).count() as u64))
        .collect()
}
