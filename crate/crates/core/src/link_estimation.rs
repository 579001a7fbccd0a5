//! Heartbeat neighbor discovery with k-missed-beacon failure detection.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::ground_truth::NodeId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LinkEventKind {
    Discovered,
    Lost,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinkEvent {
    pub at_node: NodeId,
    pub neighbor: NodeId,
    pub kind: LinkEventKind,
    pub time: f64,
}

/// One node's view of which neighbors are alive.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborTable {
    owner: NodeId,
    last_heard: BTreeMap<NodeId, f64>,
}

impl NeighborTable {
    pub fn new(owner: NodeId) -> Self {
        Self {
            owner,
            last_heard: BTreeMap::new(),
        }
    }

    pub fn owner(&self) -> NodeId {
        self.owner
    }

    pub fn is_alive(&self, v: NodeId) -> bool {
        self.last_heard.contains_key(&v)
    }

    pub fn last_heard(&self, v: NodeId) -> Option<f64> {
        self.last_heard.get(&v).copied()
    }

    /// Alive neighbors in ascending id order.
    pub fn alive(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.last_heard.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.last_heard.len()
    }

    pub fn is_empty(&self) -> bool {
        self.last_heard.is_empty()
    }

    /// Refreshes `from`; reports `Discovered` when it was not alive.
    pub fn on_beacon(&mut self, from: NodeId, t: f64) -> Option<LinkEvent> {
        let fresh = self.last_heard.insert(from, t).is_none();
        fresh.then_some(LinkEvent {
            at_node: self.owner,
            neighbor: from,
            kind: LinkEventKind::Discovered,
            time: t,
        })
    }

    /// Drops every neighbor silent for more than `timeout` (k·B).
    pub fn scan_timeouts(&mut self, t: f64, timeout: f64) -> Vec<LinkEvent> {
        let mut lost = Vec::new();
        self.last_heard.retain(|&v, &mut heard| {
            let keep = t - heard <= timeout;
            if !keep {
                lost.push(LinkEvent {
                    at_node: self.owner,
                    neighbor: v,
                    kind: LinkEventKind::Lost,
                    time: t,
                });
            }
            keep
        });
        lost
    }

    /// Forgets a neighbor without timing out, e.g. on reset.
    pub fn remove(&mut self, v: NodeId) -> bool {
        self.last_heard.remove(&v).is_some()
    }
}

/// Emission time of the `k`-th heartbeat for a node with the given phase.
pub fn beacon_time(phase: f64, period: f64, k: u64) -> f64 {
    phase + period * k as f64
}
