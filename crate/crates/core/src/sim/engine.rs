use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};
use std::net::Ipv4Addr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::scenario::{check_sorted, EventKind, ScenarioEvent};
use super::topology::{NodeKind, Topology};
use super::SimError;
use crate::ingest::LsaEvent;

const SEC: i64 = 1_000_000;
const MAX_AGE: u16 = 3600;
/// One below the initial sequence number, so the first origination carries
/// `i32::MIN + 1`.
const NO_SEQ: i32 = i32::MIN;
const FORGED: u64 = 0x5eed_f00d_dead_beef;

/// One copy of an LSA as carried on the wire.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LsaInstance {
    pub origin: Ipv4Addr,
    pub ls_id: Ipv4Addr,
    pub ls_type: u8,
    pub ls_seq: i32,
    pub age_s: u16,
    /// Fingerprint of the advertised link set.
    pub body_digest: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct LsaKey {
    ls_type: u8,
    ls_id: Ipv4Addr,
    origin: Ipv4Addr,
}

impl LsaInstance {
    fn key(&self) -> LsaKey {
        LsaKey {
            ls_type: self.ls_type,
            ls_id: self.ls_id,
            origin: self.origin,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct DbEntry {
    lsa: LsaInstance,
    since_us: i64,
}

impl DbEntry {
    fn age_at(&self, now: i64) -> u16 {
        let held = ((now - self.since_us) / SEC).clamp(0, MAX_AGE as i64) as u16;
        self.lsa.age_s.saturating_add(held).min(MAX_AGE)
    }
}

#[derive(Debug, Clone, Copy)]
enum Msg {
    Update(LsaInstance),
    Ack(LsaInstance),
}

#[derive(Debug, Clone, Copy)]
enum Action {
    Originate { node: usize },
    Refresh { node: usize, gen: u64 },
    Deliver { link: usize, to_side: usize, gen: u64, msg: Msg },
    Scenario { idx: usize },
    AdjacencyFull { link: usize, gen: u64 },
    AttackTick { attack: usize },
    AttackEnd { attack: usize },
}

struct Scheduled {
    at: i64,
    node: usize,
    order: u64,
    action: Action,
}

impl Scheduled {
    fn rank(&self) -> (i64, usize, u64) {
        (self.at, self.node, self.order)
    }
}

impl PartialEq for Scheduled {
    fn eq(&self, other: &Self) -> bool {
        self.rank() == other.rank()
    }
}

impl Eq for Scheduled {}

impl PartialOrd for Scheduled {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Scheduled {
    // reversed: BinaryHeap is a max-heap
    fn cmp(&self, other: &Self) -> Ordering {
        other.rank().cmp(&self.rank())
    }
}

#[derive(Default)]
struct NodeState {
    db: BTreeMap<LsaKey, DbEntry>,
    seq: i32,
    last_origination: Option<i64>,
    deferred: bool,
    refresh_gen: u64,
    spoofed_neighbour: Option<Ipv4Addr>,
}

struct LinkState {
    up: bool,
    gen: u64,
    last_arrival: [i64; 2],
}

struct Attack {
    kind: EventKind,
    node: usize,
    victim: Option<usize>,
    phantom: Ipv4Addr,
    phantom_seq: i32,
    period_us: i64,
    end_us: i64,
}

/// Per-monitor event logs of one run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SimOutput {
    pub logs: BTreeMap<String, Vec<LsaEvent>>,
    /// Legitimate originations per router.
    pub originations: BTreeMap<String, u64>,
    pub warnings: Vec<String>,
}

struct Sim<'a> {
    topo: &'a Topology,
    scenario: &'a [ScenarioEvent],
    adj: Vec<Vec<(usize, usize)>>,
    nodes: Vec<NodeState>,
    links: Vec<LinkState>,
    queue: BinaryHeap<Scheduled>,
    order: u64,
    rng: ChaCha8Rng,
    now: i64,
    end: i64,
    monitors_at: Vec<Vec<usize>>,
    logs: Vec<Vec<LsaEvent>>,
    originations: Vec<u64>,
    attacks: Vec<Attack>,
    warnings: Vec<String>,
}

fn secs(s: f64) -> i64 {
    (s * SEC as f64).round() as i64
}

/// Run a scenario to completion.
///
/// Originations stop at `duration_s`; messages already in flight are still
/// delivered, so every log ends with a drained network. Output is a pure
/// function of the arguments.
pub fn run(
    topology: &Topology,
    scenario: &[ScenarioEvent],
    duration_s: f64,
    seed: u64,
) -> Result<SimOutput, SimError> {
    if !(duration_s > 0.0 && duration_s.is_finite()) {
        return Err(SimError::Scenario(format!("duration {duration_s} s must be positive")));
    }
    check_sorted(scenario)?;
    validate_scenario(topology, scenario, duration_s)?;

    let mut monitors_at = vec![Vec::new(); topology.nodes.len()];
    for (k, m) in topology.monitors.iter().enumerate() {
        monitors_at[m.node].push(k);
    }
    let mut sim = Sim {
        topo: topology,
        scenario,
        adj: topology.adjacency(),
        nodes: (0..topology.nodes.len())
            .map(|_| NodeState {
                seq: NO_SEQ,
                ..Default::default()
            })
            .collect(),
        links: topology
            .links
            .iter()
            .map(|_| LinkState {
                up: true,
                gen: 0,
                last_arrival: [0; 2],
            })
            .collect(),
        queue: BinaryHeap::new(),
        order: 0,
        rng: ChaCha8Rng::seed_from_u64(seed),
        now: 0,
        end: secs(duration_s),
        monitors_at,
        logs: vec![Vec::new(); topology.monitors.len()],
        originations: vec![0; topology.nodes.len()],
        attacks: Vec::new(),
        warnings: Vec::new(),
    };
    for (node, n) in topology.nodes.iter().enumerate() {
        if n.kind == NodeKind::Router {
            sim.schedule(0, node, Action::Originate { node });
        }
    }
    for (idx, e) in scenario.iter().enumerate() {
        let node = scenario_node(topology, e);
        sim.schedule(secs(e.time_s), node, Action::Scenario { idx });
    }
    while let Some(ev) = sim.queue.pop() {
        sim.now = ev.at;
        sim.dispatch(ev.action);
    }

    let mut out = SimOutput {
        warnings: sim.warnings,
        ..Default::default()
    };
    for (k, log) in sim.logs.into_iter().enumerate() {
        out.logs.insert(topology.monitors[k].name.clone(), log);
    }
    for (node, n) in topology.nodes.iter().enumerate() {
        if n.kind == NodeKind::Router {
            out.originations.insert(n.name.clone(), sim.originations[node]);
        }
    }
    Ok(out)
}

fn scenario_node(topo: &Topology, e: &ScenarioEvent) -> usize {
    match e.kind {
        EventKind::IfaceDown | EventKind::IfaceUp => topo
            .find_interface(&e.subject)
            .map(|(l, s)| topo.links[l].ends[s].node)
            .unwrap_or(0),
        EventKind::AttackAdjacencySpoof => topo.host(&e.subject).map_or(0, |h| h.attach),
        _ => topo.node_index(&e.subject).unwrap_or(0),
    }
}

fn validate_scenario(topo: &Topology, scenario: &[ScenarioEvent], duration_s: f64) -> Result<(), SimError> {
    let mut problems = Vec::new();
    let is_router = |name: &str| {
        topo.node_index(name)
            .is_some_and(|n| topo.nodes[n].kind == NodeKind::Router)
    };
    for (k, e) in scenario.iter().enumerate() {
        let what = format!("event {k} ({:?} {} at {} s)", e.kind, e.subject, e.time_s);
        if e.time_s > duration_s {
            problems.push(format!("{what}: after the end of the run"));
        }
        match e.kind {
            EventKind::IfaceDown | EventKind::IfaceUp => {
                if topo.find_interface(&e.subject).is_none() {
                    problems.push(format!("{what}: no such interface"));
                }
            }
            EventKind::AttackDisguised | EventKind::AttackPartition => {
                if !is_router(&e.subject) {
                    problems.push(format!("{what}: attacker must be a router"));
                }
            }
            EventKind::AttackAdjacencySpoof => {
                if topo.host(&e.subject).is_none() {
                    problems.push(format!("{what}: attacker must be a host"));
                }
            }
        }
        if e.kind.is_attack() {
            match e.attack_params() {
                Ok(p) => {
                    if e.kind == EventKind::AttackDisguised {
                        match p.victim.as_deref() {
                            Some(v) if is_router(v) && v != e.subject => {}
                            _ => problems.push(format!("{what}: needs a victim router other than the attacker")),
                        }
                    }
                }
                Err(err) => problems.push(err.to_string()),
            }
        }
    }
    if problems.is_empty() {
        Ok(())
    } else {
        Err(SimError::Validation(problems))
    }
}

impl Sim<'_> {
    fn schedule(&mut self, at: i64, node: usize, action: Action) {
        self.order += 1;
        self.queue.push(Scheduled {
            at,
            node,
            order: self.order,
            action,
        });
    }

    fn dispatch(&mut self, action: Action) {
        match action {
            Action::Originate { node } => {
                self.nodes[node].deferred = false;
                self.originate(node, false);
            }
            Action::Refresh { node, gen } => {
                if self.nodes[node].refresh_gen == gen {
                    self.originate(node, false);
                }
            }
            Action::Deliver { link, to_side, gen, msg } => {
                if self.links[link].gen != gen {
                    return;
                }
                let node = self.topo.links[link].ends[to_side].node;
                match msg {
                    Msg::Update(lsa) => self.receive_update(node, link, to_side, lsa),
                    Msg::Ack(lsa) => self.record(node, lsa, true),
                }
            }
            Action::Scenario { idx } => self.apply_scenario(idx),
            Action::AdjacencyFull { link, gen } => {
                if self.links[link].up && self.links[link].gen == gen {
                    for side in 0..2 {
                        self.originate(self.topo.links[link].ends[side].node, false);
                    }
                }
            }
            Action::AttackTick { attack } => self.attack_tick(attack),
            Action::AttackEnd { attack } => {
                let a = &self.attacks[attack];
                if a.kind == EventKind::AttackAdjacencySpoof {
                    let node = a.node;
                    self.nodes[node].spoofed_neighbour = None;
                    self.originate(node, false);
                }
            }
        }
    }

    fn record(&mut self, node: usize, lsa: LsaInstance, is_ack: bool) {
        for &m in &self.monitors_at[node] {
            self.logs[m].push(LsaEvent {
                timestamp_us: self.now,
                monitor: self.topo.monitors[m].name.clone(),
                ls_type: lsa.ls_type,
                advertising_router: lsa.origin,
                link_state_id: lsa.ls_id,
                ls_age: lsa.age_s,
                ls_seq: lsa.ls_seq,
                is_ack,
            });
        }
    }

    fn send(&mut self, link: usize, from_side: usize, msg: Msg) {
        if !self.links[link].up {
            return;
        }
        let from = self.topo.links[link].ends[from_side].node;
        match msg {
            Msg::Update(lsa) => self.record(from, lsa, false),
            Msg::Ack(lsa) => self.record(from, lsa, true),
        }
        let (lo, hi) = self.topo.links[link].delay_us;
        let delay = self.rng.gen_range(lo..=hi);
        let to_side = 1 - from_side;
        let state = &mut self.links[link];
        // per-direction FIFO
        let at = (self.now + delay).max(state.last_arrival[to_side]);
        state.last_arrival[to_side] = at;
        let gen = state.gen;
        let to = self.topo.links[link].ends[to_side].node;
        self.schedule(at, to, Action::Deliver { link, to_side, gen, msg });
    }

    /// Copy of the stored instance as it leaves `node`: one second older
    /// than the database copy.
    fn outgoing(&self, node: usize, key: &LsaKey) -> LsaInstance {
        let entry = &self.nodes[node].db[key];
        LsaInstance {
            age_s: (entry.age_at(self.now) + 1).min(MAX_AGE),
            ..entry.lsa
        }
    }

    fn flood(&mut self, node: usize, key: LsaKey, except: Option<usize>) {
        for k in 0..self.adj[node].len() {
            let (link, side) = self.adj[node][k];
            if Some(link) != except {
                let lsa = self.outgoing(node, &key);
                self.send(link, side, Msg::Update(lsa));
            }
        }
    }

    fn install(&mut self, node: usize, lsa: LsaInstance) {
        let entry = DbEntry {
            lsa,
            since_us: self.now,
        };
        self.nodes[node].db.insert(lsa.key(), entry);
    }

    fn digest(&self, node: usize) -> u64 {
        let mut h = Fnv::new();
        h.write(&self.topo.nodes[node].router_id.octets());
        for &(link, side) in &self.adj[node] {
            if self.links[link].up {
                let l = &self.topo.links[link];
                h.write(l.ends[side].iface.as_bytes());
                h.write(&self.topo.nodes[l.ends[1 - side].node].router_id.octets());
            }
        }
        if let Some(p) = self.nodes[node].spoofed_neighbour {
            h.write(&p.octets());
        }
        h.finish()
    }

    fn self_key(&self, node: usize) -> LsaKey {
        let rid = self.topo.nodes[node].router_id;
        LsaKey {
            ls_type: 1,
            ls_id: rid,
            origin: rid,
        }
    }

    /// Originate a fresh router LSA. Unless `forced`, originations closer
    /// than MinLSInterval to the previous one are deferred and coalesced.
    fn originate(&mut self, node: usize, forced: bool) {
        if self.now > self.end || self.topo.nodes[node].kind != NodeKind::Router {
            return;
        }
        let timers = self.topo.timers;
        let min_gap = secs(timers.min_ls_interval_s);
        let st = &mut self.nodes[node];
        if !forced {
            if let Some(last) = st.last_origination {
                if self.now - last < min_gap {
                    if !st.deferred {
                        st.deferred = true;
                        self.schedule(last + min_gap, node, Action::Originate { node });
                    }
                    return;
                }
            }
        }
        let digest = self.digest(node);
        let key = self.self_key(node);
        let st = &mut self.nodes[node];
        st.seq = st.seq.saturating_add(1);
        st.last_origination = Some(self.now);
        st.refresh_gen += 1;
        let gen = st.refresh_gen;
        let lsa = LsaInstance {
            origin: key.origin,
            ls_id: key.ls_id,
            ls_type: 1,
            ls_seq: st.seq,
            age_s: 0,
            body_digest: digest,
        };
        self.install(node, lsa);
        self.originations[node] += 1;
        self.flood(node, key, None);
        let jitter = secs(timers.jitter_s);
        let offset = if jitter > 0 { self.rng.gen_range(-jitter..=jitter) } else { 0 };
        self.schedule(self.now + secs(timers.refresh_s) + offset, node, Action::Refresh { node, gen });
    }

    fn receive_update(&mut self, node: usize, link: usize, side: usize, lsa: LsaInstance) {
        self.record(node, lsa, false);
        let key = lsa.key();
        let stored = self.nodes[node].db.get(&key).copied();
        let own = self.topo.nodes[node].kind == NodeKind::Router && key.origin == self.topo.nodes[node].router_id;
        if own {
            let mine = stored.map_or(NO_SEQ, |e| e.lsa.ls_seq).max(self.nodes[node].seq);
            if lsa.ls_seq > mine {
                // fight back with a newer instance
                self.send(link, side, Msg::Ack(lsa));
                self.nodes[node].seq = lsa.ls_seq;
                self.originate(node, true);
            } else if lsa.ls_seq == mine {
                self.send(link, side, Msg::Ack(lsa));
            } else if stored.is_some() {
                let newer = self.outgoing(node, &key);
                self.send(link, side, Msg::Update(newer));
            }
            return;
        }
        match stored {
            None => self.accept_newer(node, link, side, lsa),
            Some(e) if lsa.ls_seq > e.lsa.ls_seq => self.accept_newer(node, link, side, lsa),
            Some(e) if lsa.ls_seq == e.lsa.ls_seq => {
                // same instance: the copy with the smaller age wins
                self.send(link, side, Msg::Ack(lsa));
                if lsa.age_s < e.age_at(self.now) {
                    self.install(node, lsa);
                }
            }
            Some(_) => {
                let newer = self.outgoing(node, &key);
                self.send(link, side, Msg::Update(newer));
            }
        }
    }

    fn accept_newer(&mut self, node: usize, link: usize, side: usize, lsa: LsaInstance) {
        self.install(node, lsa);
        self.send(link, side, Msg::Ack(lsa));
        self.flood(node, lsa.key(), Some(link));
    }

    /// Place `lsa` in `node`'s database and flood it on every interface, as
    /// a compromised node injecting traffic does.
    fn inject(&mut self, node: usize, lsa: LsaInstance) {
        self.install(node, lsa);
        self.flood(node, lsa.key(), None);
    }

    fn apply_scenario(&mut self, idx: usize) {
        let e = &self.scenario[idx];
        match e.kind {
            EventKind::IfaceDown | EventKind::IfaceUp => {
                let (link, _) = self.topo.find_interface(&e.subject).expect("validated");
                let want_up = e.kind == EventKind::IfaceUp;
                if self.links[link].up == want_up {
                    self.warnings.push(format!(
                        "{} s: {} already {}; ignored",
                        e.time_s,
                        e.subject,
                        if want_up { "up" } else { "down" }
                    ));
                    return;
                }
                self.links[link].up = want_up;
                self.links[link].gen += 1;
                let ends = [self.topo.links[link].ends[0].node, self.topo.links[link].ends[1].node];
                if want_up {
                    self.resync(link);
                }
                for node in ends {
                    self.originate(node, false);
                }
                if want_up {
                    let gen = self.links[link].gen;
                    let at = self.now + secs(self.topo.timers.adjacency_s);
                    self.schedule(at, ends[0], Action::AdjacencyFull { link, gen });
                }
            }
            _ => {
                let p = e.attack_params().expect("validated");
                let node = match e.kind {
                    EventKind::AttackAdjacencySpoof => self.topo.host(&e.subject).expect("validated").attach,
                    _ => self.topo.node_index(&e.subject).expect("validated"),
                };
                let victim = p.victim.as_deref().and_then(|v| self.topo.node_index(v));
                let attack = self.attacks.len();
                self.attacks.push(Attack {
                    kind: e.kind,
                    node,
                    victim,
                    phantom: p.phantom,
                    phantom_seq: NO_SEQ,
                    period_us: secs(p.period_s).max(1),
                    end_us: self.now + secs(p.duration_s),
                });
                if e.kind == EventKind::AttackAdjacencySpoof {
                    self.nodes[node].spoofed_neighbour = Some(p.phantom);
                    self.originate(node, false);
                }
                let end = self.now + secs(p.duration_s);
                self.schedule(self.now, node, Action::AttackTick { attack });
                self.schedule(end, node, Action::AttackEnd { attack });
            }
        }
    }

    /// Database exchange on a freshly restored link: each side sends the
    /// instances its neighbour is missing or holds in an older version.
    fn resync(&mut self, link: usize) {
        for side in 0..2 {
            let from = self.topo.links[link].ends[side].node;
            let to = self.topo.links[link].ends[1 - side].node;
            let stale: Vec<LsaKey> = self.nodes[from]
                .db
                .iter()
                .filter(|(k, e)| self.nodes[to].db.get(k).is_none_or(|o| o.lsa.ls_seq < e.lsa.ls_seq))
                .map(|(k, _)| *k)
                .collect();
            for key in stale {
                let lsa = self.outgoing(from, &key);
                self.send(link, side, Msg::Update(lsa));
            }
        }
    }

    fn attack_tick(&mut self, attack: usize) {
        let a = &self.attacks[attack];
        if self.now > self.end || self.now >= a.end_us {
            return;
        }
        let (kind, node, victim, period) = (a.kind, a.node, a.victim, a.period_us);
        match kind {
            EventKind::AttackDisguised => {
                let victim = victim.expect("validated");
                let key = self.self_key(victim);
                let seen = self.nodes[node].db.get(&key).map_or(NO_SEQ, |e| e.lsa.ls_seq);
                let forged = |seq: i32, digest: u64| LsaInstance {
                    origin: key.origin,
                    ls_id: key.ls_id,
                    ls_type: 1,
                    ls_seq: seq,
                    age_s: 0,
                    body_digest: digest,
                };
                let trigger = forged(seen.saturating_add(1), FORGED);
                // matches the fight-back the trigger is about to provoke
                let disguised = forged(seen.saturating_add(2), self.digest(victim) ^ FORGED);
                self.inject(node, trigger);
                self.inject(node, disguised);
            }
            EventKind::AttackPartition => {
                let key = self.self_key(node);
                let digest = self.digest(node) ^ FORGED;
                let st = &mut self.nodes[node];
                st.seq = st.seq.saturating_add(1);
                let lsa = LsaInstance {
                    origin: key.origin,
                    ls_id: key.ls_id,
                    ls_type: 1,
                    ls_seq: st.seq,
                    age_s: 0,
                    body_digest: digest,
                };
                self.inject(node, lsa);
            }
            EventKind::AttackAdjacencySpoof => {
                let a = &mut self.attacks[attack];
                a.phantom_seq = a.phantom_seq.saturating_add(1);
                let lsa = LsaInstance {
                    origin: a.phantom,
                    ls_id: a.phantom,
                    ls_type: 1,
                    ls_seq: a.phantom_seq,
                    age_s: 0,
                    body_digest: FORGED,
                };
                self.inject(node, lsa);
            }
            EventKind::IfaceDown | EventKind::IfaceUp => unreachable!(),
        }
        let next = self.now + period;
        if next < self.attacks[attack].end_us {
            self.schedule(next, node, Action::AttackTick { attack });
        }
    }
}

struct Fnv(u64);

impl Fnv {
    fn new() -> Self {
        Fnv(0xcbf2_9ce4_8422_2325)
    }

    fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 ^= b as u64;
            self.0 = self.0.wrapping_mul(0x0100_0000_01b3);
        }
    }

    fn finish(&self) -> u64 {
        self.0
    }
}
