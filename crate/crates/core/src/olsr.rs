//! Core of OLSR: Hello-based neighbor and two-hop sensing, greedy MPR
//! selection, and TC flooding relayed only by MPRs.
//!
//! Hellos double as heartbeats, so link loss is detected after `k` missed
//! Hello intervals. TCs advertise only the MPR selector set of their origin
//! and expire after three TC intervals without refresh.

use std::collections::{BTreeMap, BTreeSet};
use std::rc::Rc;

use crate::ground_truth::NodeId;
use crate::link_estimation::{LinkEvent, LinkEventKind, NeighborTable};
use crate::lsr::{shortest_next_hops, RoutingTable};

/// Topology entries are dropped after this many TC intervals.
pub const TC_HOLD_FACTOR: f64 = 3.0;

#[derive(Debug, Clone, PartialEq)]
pub struct HelloMessage {
    pub origin: NodeId,
    /// `(neighbor, chosen as MPR)` for every alive neighbor, ascending.
    pub neighbors: Vec<(NodeId, bool)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TcMessage {
    pub origin: NodeId,
    pub seq: u64,
    pub selectors: Rc<[NodeId]>,
}

/// Greedy MPR cover: neighbors that are the only route to some strict
/// two-hop node first, then repeatedly the neighbor covering the most
/// still-uncovered nodes (smallest id on ties).
pub fn select_mprs(
    owner: NodeId,
    one_hop: &BTreeSet<NodeId>,
    two_hop: &BTreeMap<NodeId, Vec<NodeId>>,
) -> BTreeSet<NodeId> {
    let strict: BTreeSet<NodeId> = two_hop
        .iter()
        .filter(|(b, _)| one_hop.contains(b))
        .flat_map(|(_, l)| l.iter().copied())
        .filter(|y| *y != owner && !one_hop.contains(y))
        .collect();
    let mut mprs = BTreeSet::new();
    if strict.is_empty() {
        return mprs;
    }
    let covers = |b: &NodeId| -> Vec<NodeId> {
        two_hop
            .get(b)
            .map(|l| l.iter().copied().filter(|y| strict.contains(y)).collect())
            .unwrap_or_default()
    };
    let cover_sets: BTreeMap<NodeId, Vec<NodeId>> = one_hop.iter().map(|b| (*b, covers(b))).collect();

    for y in &strict {
        let mut via = cover_sets.iter().filter(|(_, c)| c.contains(y));
        if let (Some((b, _)), None) = (via.next(), via.next()) {
            mprs.insert(*b);
        }
    }
    let mut uncovered: BTreeSet<NodeId> = strict
        .iter()
        .copied()
        .filter(|y| !mprs.iter().any(|m| cover_sets[m].contains(y)))
        .collect();
    while !uncovered.is_empty() {
        let (best, gain) = cover_sets
            .iter()
            .filter(|(b, _)| !mprs.contains(*b))
            .map(|(b, c)| (*b, c.iter().filter(|y| uncovered.contains(y)).count()))
            .fold((NodeId::MAX, 0), |acc, (b, g)| if g > acc.1 { (b, g) } else { acc });
        if gain == 0 {
            break;
        }
        mprs.insert(best);
        for y in &cover_sets[&best] {
            uncovered.remove(y);
        }
    }
    mprs
}

/// One node's neighborhood view.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MprState {
    pub one_hop: BTreeSet<NodeId>,
    pub two_hop: BTreeMap<NodeId, Vec<NodeId>>,
    pub mprs: BTreeSet<NodeId>,
    /// Neighbors that picked this node as their MPR.
    pub selectors: BTreeSet<NodeId>,
}

impl MprState {
    /// Every strict two-hop node is reachable through some MPR.
    pub fn cover_holds(&self, owner: NodeId) -> bool {
        self.two_hop
            .iter()
            .filter(|(b, _)| self.one_hop.contains(b))
            .flat_map(|(_, l)| l.iter())
            .filter(|y| **y != owner && !self.one_hop.contains(y))
            .all(|y| {
                self.mprs
                    .iter()
                    .any(|m| self.two_hop.get(m).is_some_and(|l| l.contains(y)))
            })
    }

    /// Applies a Hello from `hello.origin`. Returns true if the one-hop or
    /// two-hop view changed.
    pub fn process_hello(&mut self, owner: NodeId, hello: &HelloMessage) -> bool {
        let b = hello.origin;
        let mut changed = self.one_hop.insert(b);
        let listed: Vec<NodeId> = hello.neighbors.iter().map(|(v, _)| *v).collect();
        if self.two_hop.get(&b) != Some(&listed) {
            self.two_hop.insert(b, listed);
            changed = true;
        }
        let picked_me = hello.neighbors.iter().any(|&(v, m)| v == owner && m);
        if picked_me {
            self.selectors.insert(b);
        } else {
            self.selectors.remove(&b);
        }
        if changed {
            self.mprs = select_mprs(owner, &self.one_hop, &self.two_hop);
        }
        changed
    }

    /// Drops `b` and everything learned through it.
    pub fn purge(&mut self, owner: NodeId, b: NodeId) {
        self.one_hop.remove(&b);
        self.two_hop.remove(&b);
        self.selectors.remove(&b);
        self.mprs = select_mprs(owner, &self.one_hop, &self.two_hop);
    }

    pub fn hello(&self, owner: NodeId) -> HelloMessage {
        HelloMessage {
            origin: owner,
            neighbors: self
                .one_hop
                .iter()
                .map(|&v| (v, self.mprs.contains(&v)))
                .collect(),
        }
    }
}

#[derive(Debug, Clone)]
struct TopologyEntry {
    seq: u64,
    selectors: Rc<[NodeId]>,
    expires: f64,
}

/// Topology set learned from TC messages.
#[derive(Debug, Clone)]
pub struct TopologyDb {
    owner: NodeId,
    entries: Vec<Option<TopologyEntry>>,
    forwarded: Vec<u64>,
    hold: f64,
}

impl TopologyDb {
    pub fn new(owner: NodeId, n: usize, tc_interval: f64) -> Self {
        Self {
            owner,
            entries: vec![None; n],
            forwarded: vec![0; n],
            hold: TC_HOLD_FACTOR * tc_interval,
        }
    }

    /// Advertised selectors of `origin` still valid at `now`.
    pub fn advertised(&self, origin: NodeId, now: f64) -> &[NodeId] {
        match &self.entries[origin as usize] {
            Some(e) if e.expires >= now => &e.selectors,
            _ => &[],
        }
    }

    /// Returns `(accepted, forward)`. A TC is accepted when its sequence is
    /// newer than the stored one. It is relayed when this node is an MPR of
    /// the sender (`from` is one of our selectors) and this sequence has
    /// not been relayed yet, so a copy first heard from a non-selector is
    /// still relayed once the selector's copy arrives.
    pub fn process_tc(
        &mut self,
        tc: &TcMessage,
        from: NodeId,
        selectors: &BTreeSet<NodeId>,
        now: f64,
    ) -> (bool, bool) {
        if tc.origin == self.owner {
            return (false, false);
        }
        let slot = &mut self.entries[tc.origin as usize];
        let accepted = slot.as_ref().is_none_or(|e| tc.seq > e.seq);
        if accepted {
            *slot = Some(TopologyEntry {
                seq: tc.seq,
                selectors: tc.selectors.clone(),
                expires: now + self.hold,
            });
        }
        let fwd = &mut self.forwarded[tc.origin as usize];
        let forward = selectors.contains(&from) && tc.seq > *fwd;
        if forward {
            *fwd = tc.seq;
        }
        (accepted, forward)
    }

    /// Min-hop routes over one-hop links plus TC-advertised links.
    pub fn compute_routes_into(&self, one_hop: &BTreeSet<NodeId>, now: f64, table: &mut RoutingTable) {
        let own: Vec<NodeId> = one_hop.iter().copied().collect();
        let owner = self.owner;
        shortest_next_hops(owner, self.entries.len(), table, |u| {
            if u == owner {
                &own[..]
            } else {
                self.advertised(u, now)
            }
        });
        table.computed_at = now;
    }

    pub fn compute_routes(&self, one_hop: &BTreeSet<NodeId>, now: f64) -> RoutingTable {
        let mut t = RoutingTable::new(self.owner, self.entries.len());
        self.compute_routes_into(one_hop, now, &mut t);
        t
    }
}

/// Per-node OLSR state.
#[derive(Debug, Clone)]
pub struct OlsrNode {
    pub id: NodeId,
    pub link: NeighborTable,
    pub mpr: MprState,
    pub topo: TopologyDb,
    tc_seq: u64,
}

impl OlsrNode {
    pub fn new(id: NodeId, n: usize, tc_interval: f64) -> Self {
        Self {
            id,
            link: NeighborTable::new(id),
            mpr: MprState::default(),
            topo: TopologyDb::new(id, n, tc_interval),
            tc_seq: 0,
        }
    }

    /// Link sensing plus neighborhood update for a received Hello.
    pub fn on_hello(&mut self, hello: &HelloMessage, t: f64) -> Option<LinkEvent> {
        let ev = self.link.on_beacon(hello.origin, t);
        self.mpr.process_hello(self.id, hello);
        ev
    }

    /// Timeout scan at Hello emission; purges lost neighbors.
    pub fn scan(&mut self, t: f64, timeout: f64) -> Vec<LinkEvent> {
        let lost = self.link.scan_timeouts(t, timeout);
        for ev in &lost {
            debug_assert_eq!(ev.kind, LinkEventKind::Lost);
            self.mpr.purge(self.id, ev.neighbor);
        }
        lost
    }

    pub fn hello(&self) -> HelloMessage {
        self.mpr.hello(self.id)
    }

    /// Next TC, or `None` while nobody selected this node as MPR.
    pub fn next_tc(&mut self) -> Option<TcMessage> {
        if self.mpr.selectors.is_empty() {
            return None;
        }
        self.tc_seq += 1;
        // an origin never relays its own TC
        self.topo.forwarded[self.id as usize] = self.tc_seq;
        Some(TcMessage {
            origin: self.id,
            seq: self.tc_seq,
            selectors: self.mpr.selectors.iter().copied().collect(),
        })
    }

    pub fn on_tc(&mut self, tc: &TcMessage, from: NodeId, t: f64) -> (bool, bool) {
        self.topo.process_tc(tc, from, &self.mpr.selectors, t)
    }

    pub fn compute_routes_into(&self, t: f64, table: &mut RoutingTable) {
        self.topo.compute_routes_into(&self.mpr.one_hop, t, table);
    }
}
