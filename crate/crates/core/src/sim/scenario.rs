use std::net::Ipv4Addr;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::SimError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    IfaceDown,
    IfaceUp,
    AttackDisguised,
    AttackAdjacencySpoof,
    AttackPartition,
}

impl EventKind {
    pub fn is_attack(self) -> bool {
        matches!(
            self,
            EventKind::AttackDisguised | EventKind::AttackAdjacencySpoof | EventKind::AttackPartition
        )
    }
}

/// One scripted action. `subject` is `router.iface` for interface events,
/// the compromised router for disguised and partition attacks, and the
/// compromised host for adjacency spoofing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioEvent {
    pub time_s: f64,
    pub kind: EventKind,
    pub subject: String,
    #[serde(default, skip_serializing_if = "Map::is_empty")]
    pub params: Map<String, Value>,
}

/// Attack settings read from [`ScenarioEvent::params`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AttackParams {
    /// Router whose LSA is forged (disguised attack).
    pub victim: Option<String>,
    /// Router id claimed by the spoofed neighbour.
    pub phantom: Ipv4Addr,
    /// Gap between repeated injections.
    pub period_s: f64,
    /// How long the attacker stays active.
    pub duration_s: f64,
}

impl Default for AttackParams {
    fn default() -> Self {
        AttackParams {
            victim: None,
            phantom: Ipv4Addr::new(10, 255, 0, 1),
            period_s: 60.0,
            duration_s: 1200.0,
        }
    }
}

impl ScenarioEvent {
    pub fn new(time_s: f64, kind: EventKind, subject: &str) -> Self {
        ScenarioEvent {
            time_s,
            kind,
            subject: subject.to_string(),
            params: Map::new(),
        }
    }

    pub fn with_param(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.params.insert(key.to_string(), value.into());
        self
    }

    pub fn attack_params(&self) -> Result<AttackParams, SimError> {
        let p: AttackParams = serde_json::from_value(Value::Object(self.params.clone()))
            .map_err(|e| SimError::Scenario(format!("{:?} at {} s: {e}", self.kind, self.time_s)))?;
        if !(p.period_s > 0.0) || !(p.duration_s >= 0.0) {
            return Err(SimError::Scenario(format!(
                "{:?} at {} s: period_s must be positive and duration_s non-negative",
                self.kind, self.time_s
            )));
        }
        Ok(p)
    }

    /// `[start, end)` during which an attack is active.
    pub fn active_interval(&self) -> Option<(f64, f64)> {
        if !self.kind.is_attack() {
            return None;
        }
        let p = self.attack_params().ok()?;
        Some((self.time_s, self.time_s + p.duration_s))
    }
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Vec<ScenarioEvent>, SimError> {
    let text = std::fs::read_to_string(path.as_ref())?;
    parse_scenario(&text)
}

pub fn parse_scenario(text: &str) -> Result<Vec<ScenarioEvent>, SimError> {
    let events: Vec<ScenarioEvent> = serde_json::from_str(text).map_err(|e| SimError::Parse(e.to_string()))?;
    check_sorted(&events)?;
    Ok(events)
}

pub(crate) fn check_sorted(events: &[ScenarioEvent]) -> Result<(), SimError> {
    for (k, e) in events.iter().enumerate() {
        if !(e.time_s >= 0.0 && e.time_s.is_finite()) {
            return Err(SimError::Scenario(format!("event {k}: bad time {}", e.time_s)));
        }
        if k > 0 && events[k - 1].time_s > e.time_s {
            return Err(SimError::Scenario(format!("event {k} at {} s is out of order", e.time_s)));
        }
    }
    Ok(())
}

pub const CANNED_SCENARIOS: [&str; 3] = ["paper-failure", "paper-attacks", "quiet"];

pub fn canned_scenario(name: &str) -> Option<Vec<ScenarioEvent>> {
    match name {
        "paper-failure" => Some(scenario_paper_failure()),
        "paper-attacks" => Some(scenario_paper_attacks()),
        "quiet" => Some(Vec::new()),
        _ => None,
    }
}

/// Interface failures on abr1 and r6, four hours apart.
///
/// abr1.eth0 goes down and up twice on its own, then abr1.eth0 and r6.eth1
/// go down together at 72000 s (cutting r14 off) and come back together.
/// Runs for 230400 s.
pub fn scenario_paper_failure() -> Vec<ScenarioEvent> {
    use EventKind::*;
    let step = 14400.0;
    vec![
        ScenarioEvent::new(step, IfaceDown, "abr1.eth0"),
        ScenarioEvent::new(2.0 * step, IfaceUp, "abr1.eth0"),
        ScenarioEvent::new(3.0 * step, IfaceDown, "abr1.eth0"),
        ScenarioEvent::new(4.0 * step, IfaceUp, "abr1.eth0"),
        ScenarioEvent::new(5.0 * step, IfaceDown, "abr1.eth0"),
        ScenarioEvent::new(5.0 * step, IfaceDown, "r6.eth1"),
        ScenarioEvent::new(6.0 * step, IfaceUp, "abr1.eth0"),
        ScenarioEvent::new(6.0 * step, IfaceUp, "r6.eth1"),
    ]
}

pub const PAPER_FAILURE_DURATION_S: f64 = 230400.0;
pub const PAPER_ATTACKS_DURATION_S: f64 = 14400.0;

/// Disguised LSA on behalf of r9 from r8, adjacency spoofing through host2,
/// then a partitioning self-LSA falsification by r8.
pub fn scenario_paper_attacks() -> Vec<ScenarioEvent> {
    use EventKind::*;
    vec![
        ScenarioEvent::new(2485.0, AttackDisguised, "r8")
            .with_param("victim", "r9")
            .with_param("period_s", 60.0)
            .with_param("duration_s", 1200.0),
        ScenarioEvent::new(5012.0, AttackAdjacencySpoof, "host2")
            .with_param("period_s", 60.0)
            .with_param("duration_s", 1200.0),
        ScenarioEvent::new(9532.0, AttackPartition, "r8")
            .with_param("period_s", 60.0)
            .with_param("duration_s", 1200.0),
    ]
}
