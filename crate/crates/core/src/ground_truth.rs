//! Oracle disk-model connectivity and link churn.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

pub type NodeId = u32;

/// Symmetric unit-disk adjacency. Distance equal to the range counts as linked.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GroundTruthGraph {
    /// Sorted neighbor lists.
    adj: Vec<Vec<NodeId>>,
    /// Creation time of each link, parallel to `adj`.
    created: Vec<Vec<f64>>,
}

/// Undirected link changes, each reported once as `(low, high)`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LinkDiff {
    pub added: Vec<(NodeId, NodeId)>,
    pub removed: Vec<(NodeId, NodeId)>,
}

impl LinkDiff {
    pub fn is_empty(&self) -> bool {
        self.added.is_empty() && self.removed.is_empty()
    }
}

/// Uniform grid with cells of one radio range.
struct Grid {
    origin: (f64, f64),
    cell: f64,
    cols: usize,
    rows: usize,
    cells: Vec<Vec<NodeId>>,
}

impl Grid {
    fn new(positions: &[[f64; 2]], cell: f64) -> Self {
        let (mut minx, mut miny) = (f64::INFINITY, f64::INFINITY);
        let (mut maxx, mut maxy) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in positions {
            minx = minx.min(p[0]);
            miny = miny.min(p[1]);
            maxx = maxx.max(p[0]);
            maxy = maxy.max(p[1]);
        }
        if positions.is_empty() {
            (minx, miny, maxx, maxy) = (0.0, 0.0, 0.0, 0.0);
        }
        let cols = ((maxx - minx) / cell).floor() as usize + 1;
        let rows = ((maxy - miny) / cell).floor() as usize + 1;
        let mut grid = Grid {
            origin: (minx, miny),
            cell,
            cols,
            rows,
            cells: vec![Vec::new(); cols * rows],
        };
        for (i, p) in positions.iter().enumerate() {
            let (c, r) = grid.cell_of(p);
            grid.cells[r * cols + c].push(i as NodeId);
        }
        grid
    }

    fn cell_of(&self, p: &[f64; 2]) -> (usize, usize) {
        let c = ((p[0] - self.origin.0) / self.cell).floor() as usize;
        let r = ((p[1] - self.origin.1) / self.cell).floor() as usize;
        (c.min(self.cols - 1), r.min(self.rows - 1))
    }
}

impl GroundTruthGraph {
    pub fn empty(n: usize) -> Self {
        Self {
            adj: vec![Vec::new(); n],
            created: vec![Vec::new(); n],
        }
    }

    /// Exact disk graph over `positions`; every link gets creation time 0.
    pub fn build(positions: &[[f64; 2]], radio_range: f64) -> Self {
        let n = positions.len();
        let r2 = radio_range * radio_range;
        let grid = Grid::new(positions, radio_range);
        let mut adj = vec![Vec::new(); n];
        for (i, p) in positions.iter().enumerate() {
            let (c, r) = grid.cell_of(p);
            let list: &mut Vec<NodeId> = &mut adj[i];
            for rr in r.saturating_sub(1)..=(r + 1).min(grid.rows - 1) {
                for cc in c.saturating_sub(1)..=(c + 1).min(grid.cols - 1) {
                    for &j in &grid.cells[rr * grid.cols + cc] {
                        if j as usize == i {
                            continue;
                        }
                        let q = &positions[j as usize];
                        let (dx, dy) = (p[0] - q[0], p[1] - q[1]);
                        if dx * dx + dy * dy <= r2 {
                            list.push(j);
                        }
                    }
                }
            }
            list.sort_unstable();
        }
        let created = adj.iter().map(|l| vec![0.0; l.len()]).collect();
        Self { adj, created }
    }

    /// Rebuilds at time `t`, carrying creation times of surviving links.
    pub fn rebuild(&self, positions: &[[f64; 2]], radio_range: f64, t: f64) -> (Self, LinkDiff) {
        let mut next = Self::build(positions, radio_range);
        for u in 0..next.adj.len() {
            let old = self.adj.get(u).map(Vec::as_slice).unwrap_or(&[]);
            let old_t = self.created.get(u).map(Vec::as_slice).unwrap_or(&[]);
            let mut k = 0;
            for (idx, &v) in next.adj[u].iter().enumerate() {
                while k < old.len() && old[k] < v {
                    k += 1;
                }
                next.created[u][idx] = if k < old.len() && old[k] == v {
                    old_t[k]
                } else {
                    t
                };
            }
        }
        let d = diff(self, &next);
        (next, d)
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn neighbors(&self, u: NodeId) -> &[NodeId] {
        &self.adj[u as usize]
    }

    pub fn is_linked(&self, u: NodeId, v: NodeId) -> bool {
        self.adj[u as usize].binary_search(&v).is_ok()
    }

    pub fn link_created_at(&self, u: NodeId, v: NodeId) -> Option<f64> {
        let i = self.adj[u as usize].binary_search(&v).ok()?;
        Some(self.created[u as usize][i])
    }

    pub fn link_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Undirected links as `(low, high)` in ascending order.
    pub fn links(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.adj.iter().enumerate().flat_map(|(u, l)| {
            l.iter()
                .filter(move |&&v| v as usize > u)
                .map(move |&v| (u as NodeId, v))
        })
    }

    pub fn add_link(&mut self, u: NodeId, v: NodeId, t: f64) {
        assert_ne!(u, v, "self-links are not allowed");
        for (a, b) in [(u, v), (v, u)] {
            let list = &mut self.adj[a as usize];
            if let Err(i) = list.binary_search(&b) {
                list.insert(i, b);
                self.created[a as usize].insert(i, t);
            }
        }
    }

    pub fn remove_link(&mut self, u: NodeId, v: NodeId) {
        for (a, b) in [(u, v), (v, u)] {
            if let Ok(i) = self.adj[a as usize].binary_search(&b) {
                self.adj[a as usize].remove(i);
                self.created[a as usize].remove(i);
            }
        }
    }

    pub fn apply(&mut self, d: &LinkDiff, t: f64) {
        for &(u, v) in &d.removed {
            self.remove_link(u, v);
        }
        for &(u, v) in &d.added {
            self.add_link(u, v, t);
        }
    }

    /// Component label per node; labels are the smallest member id.
    pub fn components(&self) -> Vec<NodeId> {
        let n = self.adj.len();
        let mut label = vec![NodeId::MAX; n];
        let mut queue = VecDeque::new();
        for s in 0..n {
            if label[s] != NodeId::MAX {
                continue;
            }
            label[s] = s as NodeId;
            queue.push_back(s as NodeId);
            while let Some(u) = queue.pop_front() {
                for &v in &self.adj[u as usize] {
                    if label[v as usize] == NodeId::MAX {
                        label[v as usize] = s as NodeId;
                        queue.push_back(v);
                    }
                }
            }
        }
        label
    }

    /// Hop distances from `src`, `u32::MAX` when unreachable.
    pub fn bfs_hops(&self, src: NodeId) -> Vec<u32> {
        let mut dist = vec![u32::MAX; self.adj.len()];
        let mut queue = VecDeque::new();
        dist[src as usize] = 0;
        queue.push_back(src);
        while let Some(u) = queue.pop_front() {
            let du = dist[u as usize];
            for &v in &self.adj[u as usize] {
                if dist[v as usize] == u32::MAX {
                    dist[v as usize] = du + 1;
                    queue.push_back(v);
                }
            }
        }
        dist
    }
}

/// Exact symmetric difference of two graphs over the same node set.
pub fn diff(prev: &GroundTruthGraph, next: &GroundTruthGraph) -> LinkDiff {
    assert_eq!(prev.adj.len(), next.adj.len(), "node sets differ");
    let mut out = LinkDiff::default();
    for u in 0..prev.adj.len() {
        let (a, b) = (&prev.adj[u], &next.adj[u]);
        let (mut i, mut j) = (0, 0);
        let uu = u as NodeId;
        while i < a.len() || j < b.len() {
            let x = a.get(i).copied().unwrap_or(NodeId::MAX);
            let y = b.get(j).copied().unwrap_or(NodeId::MAX);
            if x == y {
                i += 1;
                j += 1;
            } else if x < y {
                if x > uu {
                    out.removed.push((uu, x));
                }
                i += 1;
            } else {
                if y > uu {
                    out.added.push((uu, y));
                }
                j += 1;
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkChurnStats {
    pub window_start: f64,
    pub window: f64,
    pub adds_per_sec: f64,
    pub removals_per_sec: f64,
    /// Each undirected change counted at both endpoints.
    pub changes_per_node_per_sec: f64,
    /// Mean undirected link count over the window.
    pub mean_links: f64,
}

impl LinkChurnStats {
    /// Per-link removal rate, the model constant θ.
    pub fn theta(&self) -> f64 {
        if self.mean_links > 0.0 {
            self.removals_per_sec / self.mean_links
        } else {
            0.0
        }
    }
}

/// Accumulates link diffs into fixed windows.
#[derive(Debug, Clone)]
pub struct ChurnTracker {
    n: usize,
    window: f64,
    start: f64,
    adds: u64,
    removals: u64,
    link_sum: f64,
    link_samples: u64,
    done: Vec<LinkChurnStats>,
}

impl ChurnTracker {
    /// `window` must be at least 10 s for the rates to mean anything.
    pub fn new(n: usize, window: f64, start: f64) -> Self {
        Self {
            n,
            window,
            start,
            adds: 0,
            removals: 0,
            link_sum: 0.0,
            link_samples: 0,
            done: Vec::new(),
        }
    }

    /// Records the diff observed at time `t` and the link count after it.
    pub fn record(&mut self, t: f64, d: &LinkDiff, links_now: usize) {
        while t >= self.start + self.window {
            self.close();
        }
        self.adds += d.added.len() as u64;
        self.removals += d.removed.len() as u64;
        self.link_sum += links_now as f64;
        self.link_samples += 1;
    }

    fn close(&mut self) {
        self.done.push(churn(
            self.n,
            self.start,
            self.window,
            self.adds,
            self.removals,
            if self.link_samples > 0 {
                self.link_sum / self.link_samples as f64
            } else {
                0.0
            },
        ));
        self.start += self.window;
        self.adds = 0;
        self.removals = 0;
        self.link_sum = 0.0;
        self.link_samples = 0;
    }

    /// Closes every full window ending at or before `end`.
    pub fn finish(mut self, end: f64) -> Vec<LinkChurnStats> {
        while self.start + self.window <= end + 1e-9 {
            self.close();
        }
        self.done
    }
}

/// Rates over one window of diffs.
pub fn churn(
    n: usize,
    window_start: f64,
    window: f64,
    adds: u64,
    removals: u64,
    mean_links: f64,
) -> LinkChurnStats {
    let adds_per_sec = adds as f64 / window;
    let removals_per_sec = removals as f64 / window;
    LinkChurnStats {
        window_start,
        window,
        adds_per_sec,
        removals_per_sec,
        changes_per_node_per_sec: (adds + removals) as f64 * 2.0 / (n as f64 * window),
        mean_links,
    }
}

/// Averages window stats into one (equal windows).
pub fn mean_churn(stats: &[LinkChurnStats]) -> Option<LinkChurnStats> {
    let first = stats.first()?;
    let k = stats.len() as f64;
    let avg = |f: fn(&LinkChurnStats) -> f64| stats.iter().map(f).sum::<f64>() / k;
    Some(LinkChurnStats {
        window_start: first.window_start,
        window: stats.iter().map(|s| s.window).sum(),
        adds_per_sec: avg(|s| s.adds_per_sec),
        removals_per_sec: avg(|s| s.removals_per_sec),
        changes_per_node_per_sec: avg(|s| s.changes_per_node_per_sec),
        mean_links: avg(|s| s.mean_links),
    })
}
