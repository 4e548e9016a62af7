use std::collections::{BTreeMap, BTreeSet};
use std::net::Ipv4Addr;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::SimError;

const PAPER16: &str = include_str!("../../topologies/paper16.toml");
const TOPO20: &str = include_str!("../../topologies/topo20.toml");
const TOPO35: &str = include_str!("../../topologies/topo35.toml");

pub const BUILTIN_TOPOLOGIES: [&str; 3] = ["paper16", "topo20", "topo35"];

/// Protocol timers, in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Timers {
    pub refresh_s: f64,
    pub jitter_s: f64,
    pub min_ls_interval_s: f64,
    /// Time from an interface coming up to the adjacency reaching Full.
    pub adjacency_s: f64,
}

impl Default for Timers {
    fn default() -> Self {
        Timers {
            refresh_s: 1800.0,
            jitter_s: 30.0,
            min_ls_interval_s: 5.0,
            adjacency_s: 3.0,
        }
    }
}

/// On-disk topology description (TOML).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologyFile {
    #[serde(default)]
    pub timers: Timers,
    #[serde(default, rename = "router")]
    pub routers: Vec<RouterSpec>,
    #[serde(default, rename = "link")]
    pub links: Vec<LinkSpec>,
    #[serde(default, rename = "host")]
    pub hosts: Vec<HostSpec>,
    #[serde(default, rename = "monitor")]
    pub monitors: Vec<MonitorSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RouterSpec {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub router_id: Option<Ipv4Addr>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub border: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkSpec {
    /// `router.iface`
    pub a: String,
    pub b: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delay_ms: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HostSpec {
    pub id: String,
    pub attach: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonitorSpec {
    pub id: String,
    /// Router the monitor hangs off (stub) or observes (transit).
    pub attach: String,
    /// Router interface facing a stub monitor; defaults to `to-<id>`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iface: Option<String>,
    #[serde(default = "yes")]
    pub stub: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub router_id: Option<Ipv4Addr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delay_ms: Option<[f64; 2]>,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Router,
    /// Stub monitoring node: receives floods and acknowledges, never
    /// originates or forwards.
    Listener,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub name: String,
    pub router_id: Ipv4Addr,
    pub kind: NodeKind,
    pub border: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Endpoint {
    pub node: usize,
    pub iface: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Link {
    pub ends: [Endpoint; 2],
    /// Per-message delay range in microseconds, inclusive.
    pub delay_us: (i64, i64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Host {
    pub name: String,
    pub attach: usize,
}

/// A monitoring point: records every LSA header crossing an interface of
/// `node`.
#[derive(Debug, Clone, PartialEq)]
pub struct Monitor {
    pub name: String,
    pub node: usize,
    pub stub: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    pub timers: Timers,
    pub nodes: Vec<Node>,
    pub links: Vec<Link>,
    pub hosts: Vec<Host>,
    pub monitors: Vec<Monitor>,
}

const DEFAULT_DELAY_MS: [f64; 2] = [2.0, 20.0];

pub fn load_topology(path: impl AsRef<Path>) -> Result<Topology, SimError> {
    let text = std::fs::read_to_string(path.as_ref())?;
    Topology::from_toml(&text)
}

impl Topology {
    pub fn from_toml(text: &str) -> Result<Topology, SimError> {
        let file: TopologyFile = toml::from_str(text).map_err(|e| SimError::Parse(e.to_string()))?;
        Topology::from_file(&file)
    }

    /// One of [`BUILTIN_TOPOLOGIES`].
    pub fn builtin(name: &str) -> Option<Topology> {
        let text = match name {
            "paper16" => PAPER16,
            "topo20" => TOPO20,
            "topo35" => TOPO35,
            _ => return None,
        };
        Some(Topology::from_toml(text).expect("shipped topology is valid"))
    }

    pub fn from_file(file: &TopologyFile) -> Result<Topology, SimError> {
        let mut problems = Vec::new();
        let t = &file.timers;
        if !(t.refresh_s > 0.0) || !(t.jitter_s >= 0.0) || t.jitter_s >= t.refresh_s {
            problems.push(format!("timers: need refresh_s > jitter_s >= 0 (got {} / {})", t.refresh_s, t.jitter_s));
        }
        if !(t.min_ls_interval_s >= 0.0) || !(t.adjacency_s >= 0.0) {
            problems.push("timers: min_ls_interval_s and adjacency_s must be non-negative".into());
        }

        let mut nodes = Vec::new();
        let mut index = BTreeMap::new();
        for (k, r) in file.routers.iter().enumerate() {
            if index.insert(r.id.clone(), nodes.len()).is_some() {
                problems.push(format!("duplicate node id {:?}", r.id));
            }
            nodes.push(Node {
                name: r.id.clone(),
                router_id: r.router_id.unwrap_or_else(|| auto_id(0, k)),
                kind: NodeKind::Router,
                border: r.border,
            });
        }

        let mut links = Vec::new();
        let mut used_ifaces = BTreeSet::new();
        let mut endpoint = |spec: &str, what: &str, problems: &mut Vec<String>| -> Option<Endpoint> {
            let Some((node, iface)) = spec.split_once('.') else {
                problems.push(format!("{what}: endpoint {spec:?} is not of the form router.iface"));
                return None;
            };
            let Some(&idx) = index.get(node) else {
                problems.push(format!("{what}: unknown router {node:?}"));
                return None;
            };
            if !used_ifaces.insert((idx, iface.to_string())) {
                problems.push(format!("{what}: interface {spec} used twice"));
            }
            Some(Endpoint {
                node: idx,
                iface: iface.to_string(),
            })
        };
        for l in &file.links {
            let what = format!("link {} -- {}", l.a, l.b);
            let a = endpoint(&l.a, &what, &mut problems);
            let b = endpoint(&l.b, &what, &mut problems);
            let delay = delay_range(l.delay_ms, &what, &mut problems);
            if let (Some(a), Some(b), Some(delay_us)) = (a, b, delay) {
                if a.node == b.node {
                    problems.push(format!("{what}: both ends on the same router"));
                }
                links.push(Link { ends: [a, b], delay_us });
            }
        }

        let mut hosts = Vec::new();
        for h in &file.hosts {
            match index.get(&h.attach) {
                Some(&attach) => hosts.push(Host {
                    name: h.id.clone(),
                    attach,
                }),
                None => problems.push(format!("host {}: unknown router {:?}", h.id, h.attach)),
            }
            if index.contains_key(&h.id) || file.hosts.iter().filter(|o| o.id == h.id).count() > 1 {
                problems.push(format!("duplicate node id {:?}", h.id));
            }
        }

        let mut monitors = Vec::new();
        let mut monitor_names = BTreeSet::new();
        for (k, m) in file.monitors.iter().enumerate() {
            let what = format!("monitor {}", m.id);
            if !monitor_names.insert(m.id.clone()) {
                problems.push(format!("duplicate monitor id {:?}", m.id));
            }
            let Some(&attach) = index.get(&m.attach) else {
                problems.push(format!("{what}: unknown router {:?}", m.attach));
                continue;
            };
            if !m.stub {
                monitors.push(Monitor {
                    name: m.id.clone(),
                    node: attach,
                    stub: false,
                });
                continue;
            }
            if index.contains_key(&m.id) {
                problems.push(format!("{what}: id clashes with a router"));
                continue;
            }
            let iface = m.iface.clone().unwrap_or_else(|| format!("to-{}", m.id));
            if !used_ifaces.insert((attach, iface.clone())) {
                problems.push(format!("{what}: interface {}.{iface} used twice", m.attach));
            }
            let Some(delay_us) = delay_range(m.delay_ms, &what, &mut problems) else {
                continue;
            };
            let node = nodes.len();
            index.insert(m.id.clone(), node);
            nodes.push(Node {
                name: m.id.clone(),
                router_id: m.router_id.unwrap_or_else(|| auto_id(1, k)),
                kind: NodeKind::Listener,
                border: false,
            });
            links.push(Link {
                ends: [
                    Endpoint { node: attach, iface },
                    Endpoint {
                        node,
                        iface: "eth0".into(),
                    },
                ],
                delay_us,
            });
            monitors.push(Monitor {
                name: m.id.clone(),
                node,
                stub: true,
            });
        }

        let mut seen_ids = BTreeMap::new();
        for n in &nodes {
            if let Some(prev) = seen_ids.insert(n.router_id, n.name.clone()) {
                problems.push(format!("router id {} shared by {prev} and {}", n.router_id, n.name));
            }
        }

        if !problems.is_empty() {
            return Err(SimError::Validation(problems));
        }
        Ok(Topology {
            timers: file.timers,
            nodes,
            links,
            hosts,
            monitors,
        })
    }

    pub fn node_index(&self, name: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.name == name)
    }

    pub fn router_id_of(&self, name: &str) -> Option<Ipv4Addr> {
        self.node_index(name).map(|i| self.nodes[i].router_id)
    }

    pub fn host(&self, name: &str) -> Option<&Host> {
        self.hosts.iter().find(|h| h.name == name)
    }

    /// Link and side owning `router.iface`.
    pub fn find_interface(&self, spec: &str) -> Option<(usize, usize)> {
        let (node, iface) = spec.split_once('.')?;
        let node = self.node_index(node)?;
        self.links.iter().enumerate().find_map(|(l, link)| {
            link.ends
                .iter()
                .position(|e| e.node == node && e.iface == iface)
                .map(|side| (l, side))
        })
    }

    /// Links incident to each node.
    pub fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for (l, link) in self.links.iter().enumerate() {
            for side in 0..2 {
                adj[link.ends[side].node].push((l, side));
            }
        }
        adj
    }

    /// Name to router-id table for every node.
    pub fn router_ids(&self) -> BTreeMap<String, Ipv4Addr> {
        self.nodes.iter().map(|n| (n.name.clone(), n.router_id)).collect()
    }

    /// Whether every node can reach every other over links not in `down`.
    pub fn is_connected_without(&self, down: &BTreeSet<usize>) -> bool {
        if self.nodes.is_empty() {
            return true;
        }
        let adj = self.adjacency();
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(n) = stack.pop() {
            for &(l, side) in &adj[n] {
                if down.contains(&l) {
                    continue;
                }
                let other = self.links[l].ends[1 - side].node;
                if !seen[other] {
                    seen[other] = true;
                    stack.push(other);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}

fn auto_id(block: u8, k: usize) -> Ipv4Addr {
    Ipv4Addr::new(10, block, (k / 250) as u8, (k % 250 + 1) as u8)
}

fn delay_range(ms: Option<[f64; 2]>, what: &str, problems: &mut Vec<String>) -> Option<(i64, i64)> {
    let [lo, hi] = ms.unwrap_or(DEFAULT_DELAY_MS);
    if !(lo >= 0.0 && hi >= lo && hi.is_finite()) {
        problems.push(format!("{what}: bad delay range [{lo}, {hi}] ms"));
        return None;
    }
    Some(((lo * 1000.0).round() as i64, (hi * 1000.0).round() as i64))
}

/// Random connected router graph with `max_peers` router neighbours per
/// router and `monitors` stub monitors on distinct routers.
pub fn random_topology(routers: usize, max_peers: usize, monitors: usize, seed: u64) -> TopologyFile {
    assert!(routers >= 2 && max_peers >= 2 && monitors <= routers);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let name = |k: usize| format!("r{}", k + 1);
    let mut degree = vec![0usize; routers];
    let mut edges = BTreeSet::new();
    // random spanning tree first
    let mut order: Vec<usize> = (0..routers).collect();
    order.shuffle(&mut rng);
    for k in 1..routers {
        let candidates: Vec<usize> = order[..k].iter().copied().filter(|&p| degree[p] < max_peers).collect();
        let parent = *candidates.choose(&mut rng).expect("max_peers >= 2 keeps a free slot");
        let child = order[k];
        edges.insert((parent.min(child), parent.max(child)));
        degree[parent] += 1;
        degree[child] += 1;
    }
    let extra = routers / 2;
    for _ in 0..extra * 4 {
        if edges.len() >= routers - 1 + extra {
            break;
        }
        let a = rng.gen_range(0..routers);
        let b = rng.gen_range(0..routers);
        if a == b || degree[a] >= max_peers || degree[b] >= max_peers || !edges.insert((a.min(b), a.max(b))) {
            continue;
        }
        degree[a] += 1;
        degree[b] += 1;
    }
    let mut next_iface = vec![0usize; routers];
    let mut iface = |r: usize| {
        let i = next_iface[r];
        next_iface[r] += 1;
        format!("{}.eth{i}", name(r))
    };
    let links = edges
        .iter()
        .map(|&(a, b)| LinkSpec {
            a: iface(a),
            b: iface(b),
            delay_ms: None,
        })
        .collect();
    let mut hosts: Vec<usize> = (0..routers).collect();
    hosts.shuffle(&mut rng);
    let monitors = hosts[..monitors]
        .iter()
        .enumerate()
        .map(|(k, &r)| MonitorSpec {
            id: format!("m{}", k + 1),
            attach: name(r),
            iface: None,
            stub: true,
            router_id: None,
            delay_ms: None,
        })
        .collect();
    TopologyFile {
        timers: Timers::default(),
        routers: (0..routers)
            .map(|k| RouterSpec {
                id: name(k),
                router_id: None,
                border: false,
            })
            .collect(),
        links,
        hosts: Vec::new(),
        monitors,
    }
}
