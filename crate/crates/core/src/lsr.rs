//! Event-driven link-state routing.
//!
//! Every link estimation event makes the node originate a full-state
//! link-state update (its whole alive set) which is flooded with
//! per-origin sequence number suppression. Routes are minimum hop count over
//! the directed belief graph held in each node's database, ties broken
//! towards the smallest next-hop id.

use std::collections::VecDeque;
use std::rc::Rc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ground_truth::NodeId;

pub const NO_ROUTE: NodeId = NodeId::MAX;

#[derive(Debug, Clone, PartialEq)]
pub struct LinkStateUpdate {
    pub origin: NodeId,
    pub seq: u64,
    /// Ascending ids the origin believes alive.
    pub neighbors: Rc<[NodeId]>,
    pub created_at: f64,
}

#[derive(Debug, Clone)]
pub struct LinkStateDatabase {
    owner: NodeId,
    entries: Vec<Option<(u64, Rc<[NodeId]>)>>,
    dirty: bool,
}

impl LinkStateDatabase {
    pub fn new(owner: NodeId, n: usize) -> Self {
        Self {
            owner,
            entries: vec![None; n],
            dirty: true,
        }
    }

    pub fn owner(&self) -> NodeId {
        self.owner
    }

    pub fn is_dirty(&self) -> bool {
        self.dirty
    }

    pub fn clear_dirty(&mut self) {
        self.dirty = false;
    }

    pub fn seq_of(&self, origin: NodeId) -> Option<u64> {
        self.entries[origin as usize].as_ref().map(|e| e.0)
    }

    /// Stored neighbor list of `origin`, empty when unknown.
    pub fn neighbors_of(&self, origin: NodeId) -> &[NodeId] {
        self.entries[origin as usize]
            .as_ref()
            .map_or(&[], |e| &e.1[..])
    }

    /// Applies `lsu` if it is newer than what is stored. Returns
    /// `(accepted, forward)`; accepted updates are always re-flooded.
    pub fn process_lsu(&mut self, lsu: &LinkStateUpdate) -> (bool, bool) {
        let slot = &mut self.entries[lsu.origin as usize];
        if slot.as_ref().is_some_and(|(seq, _)| *seq >= lsu.seq) {
            return (false, false);
        }
        *slot = Some((lsu.seq, lsu.neighbors.clone()));
        self.dirty = true;
        (true, true)
    }

    pub fn compute_routes(&mut self, now: f64) -> RoutingTable {
        let mut table = RoutingTable::new(self.owner, self.entries.len());
        self.compute_routes_into(now, &mut table);
        table
    }

    pub fn compute_routes_into(&mut self, now: f64, table: &mut RoutingTable) {
        let entries = &self.entries;
        shortest_next_hops(self.owner, entries.len(), table, |u| {
            entries[u as usize].as_ref().map_or(&[][..], |e| &e.1[..])
        });
        table.computed_at = now;
        self.dirty = false;
    }
}

/// Per-node LSR state: own sequence counter plus database.
#[derive(Debug, Clone)]
pub struct LsrNode {
    pub db: LinkStateDatabase,
    seq: u64,
}

impl LsrNode {
    pub fn new(owner: NodeId, n: usize) -> Self {
        Self {
            db: LinkStateDatabase::new(owner, n),
            seq: 0,
        }
    }

    pub fn seq(&self) -> u64 {
        self.seq
    }

    /// Originates an update for a link estimation event, given the alive set
    /// after the event, and applies it locally.
    pub fn on_link_event(&mut self, alive: impl IntoIterator<Item = NodeId>, t: f64) -> LinkStateUpdate {
        self.seq += 1;
        let lsu = LinkStateUpdate {
            origin: self.db.owner,
            seq: self.seq,
            neighbors: alive.into_iter().collect(),
            created_at: t,
        };
        self.db.process_lsu(&lsu);
        lsu
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoutingTable {
    owner: NodeId,
    next: Vec<NodeId>,
    hops: Vec<u32>,
    pub computed_at: f64,
}

impl RoutingTable {
    pub fn new(owner: NodeId, n: usize) -> Self {
        Self {
            owner,
            next: vec![NO_ROUTE; n],
            hops: vec![0; n],
            computed_at: 0.0,
        }
    }

    pub fn owner(&self) -> NodeId {
        self.owner
    }

    pub fn next_hop(&self, dest: NodeId) -> Option<NodeId> {
        let nh = self.next[dest as usize];
        (nh != NO_ROUTE).then_some(nh)
    }

    pub fn hop_count(&self, dest: NodeId) -> Option<u32> {
        self.next_hop(dest).map(|_| self.hops[dest as usize])
    }

    /// `(destination, next_hop, hop_count)` for every reachable destination.
    pub fn entries(&self) -> impl Iterator<Item = (NodeId, NodeId, u32)> + '_ {
        self.next
            .iter()
            .enumerate()
            .filter(|(_, &nh)| nh != NO_ROUTE)
            .map(|(d, &nh)| (d as NodeId, nh, self.hops[d]))
    }

    pub fn len(&self) -> usize {
        self.next.iter().filter(|&&nh| nh != NO_ROUTE).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Raw next-hop column, `NO_ROUTE` where absent.
    pub fn next_hops(&self) -> &[NodeId] {
        &self.next
    }

    /// Direct route edit, for hand-built fixtures.
    pub fn set(&mut self, dest: NodeId, next_hop: NodeId, hops: u32) {
        self.next[dest as usize] = next_hop;
        self.hops[dest as usize] = hops;
    }
}

/// Minimum-hop next hops from `owner` over the directed graph given by
/// `out`. `out(owner)` must be ascending; equal-length routes then resolve
/// to the smallest first hop because every BFS layer is dequeued in
/// first-hop order.
pub fn shortest_next_hops<'a, F>(owner: NodeId, n: usize, table: &mut RoutingTable, out: F)
where
    F: Fn(NodeId) -> &'a [NodeId],
{
    table.owner = owner;
    table.next.clear();
    table.next.resize(n, NO_ROUTE);
    table.hops.clear();
    table.hops.resize(n, 0);
    let mut seen = vec![false; n];
    seen[owner as usize] = true;
    let mut queue = VecDeque::with_capacity(n);
    for &v in out(owner) {
        if !seen[v as usize] {
            seen[v as usize] = true;
            table.next[v as usize] = v;
            table.hops[v as usize] = 1;
            queue.push_back(v);
        }
    }
    while let Some(u) = queue.pop_front() {
        let (first, h) = (table.next[u as usize], table.hops[u as usize]);
        for &v in out(u) {
            if !seen[v as usize] {
                seen[v as usize] = true;
                table.next[v as usize] = first;
                table.hops[v as usize] = h + 1;
                queue.push_back(v);
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MsgKind {
    Beacon,
    Lsu,
    Hello,
    Tc,
}

impl MsgKind {
    pub const ALL: [MsgKind; 4] = [MsgKind::Beacon, MsgKind::Lsu, MsgKind::Hello, MsgKind::Tc];

    pub fn as_str(self) -> &'static str {
        match self {
            MsgKind::Beacon => "beacon",
            MsgKind::Lsu => "lsu",
            MsgKind::Hello => "hello",
            MsgKind::Tc => "tc",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

/// Transmitted control bytes per node and message kind, also bucketed in
/// one-second bins for the time series export.
#[derive(Debug, Clone)]
pub struct ControlTrafficCounter {
    per_node: Vec<[u64; 4]>,
    buckets: Vec<Vec<[u64; 4]>>,
}

impl ControlTrafficCounter {
    pub fn new(n: usize) -> Self {
        Self {
            per_node: vec![[0; 4]; n],
            buckets: Vec::new(),
        }
    }

    pub fn record(&mut self, t: f64, node: NodeId, kind: MsgKind, bytes: u64) {
        self.per_node[node as usize][kind.index()] += bytes;
        let b = t.max(0.0).floor() as usize;
        let n = self.per_node.len();
        if self.buckets.len() <= b {
            self.buckets.resize_with(b + 1, || vec![[0; 4]; n]);
        }
        self.buckets[b][node as usize][kind.index()] += bytes;
    }

    pub fn node_bytes(&self, node: NodeId, kind: MsgKind) -> u64 {
        self.per_node[node as usize][kind.index()]
    }

    pub fn kind_bytes(&self, kind: MsgKind) -> u64 {
        self.per_node.iter().map(|b| b[kind.index()]).sum()
    }

    pub fn total_bytes(&self) -> u64 {
        self.per_node.iter().flatten().sum()
    }

    /// Non-zero `(bucket_start_s, node, kind, bytes)` rows in time order.
    pub fn rows(&self) -> impl Iterator<Item = (f64, NodeId, MsgKind, u64)> + '_ {
        self.buckets.iter().enumerate().flat_map(|(b, nodes)| {
            nodes.iter().enumerate().flat_map(move |(node, kinds)| {
                MsgKind::ALL.into_iter().filter_map(move |k| {
                    let bytes = kinds[k.index()];
                    (bytes > 0).then_some((b as f64, node as NodeId, k, bytes))
                })
            })
        })
    }
}

/// Control bit rate per node as a fraction of the nominal channel capacity.
pub fn nlo_fraction(total_bytes: u64, duration: f64, channel_capacity: f64, n: usize) -> Result<f64> {
    if !(duration > 0.0) {
        return Err(Error::Analysis("nlo_fraction needs a positive duration".into()));
    }
    Ok(total_bytes as f64 * 8.0 / duration / (channel_capacity * n as f64))
}
