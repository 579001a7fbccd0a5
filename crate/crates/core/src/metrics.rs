//! Path classification against ground truth and per-pair interval ledgers.
//!
//! Each snapshot follows routing-table next hops from source to destination
//! and checks every hop against the disk graph. Per ordered pair the ledger
//! keeps alternating connected/broken intervals. Intervals that touch a
//! ground-truth partition or the start of measurement are kept but marked
//! tainted, and intervals still open at the end are dropped.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ground_truth::{GroundTruthGraph, NodeId};
use crate::lsr::{RoutingTable, NO_ROUTE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PairStatus {
    Connected,
    Broken,
    NoGroundTruthPath,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BrokenReason {
    NoRoute,
    InvalidHop,
    Loop,
    HopLimit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathStatus {
    Connected { hops: u32 },
    Broken(BrokenReason),
}

/// Follows next hops from `src` towards `dst`, at most `hop_limit` hops.
pub fn traverse(
    src: NodeId,
    dst: NodeId,
    tables: &[RoutingTable],
    gt: &GroundTruthGraph,
    hop_limit: u32,
) -> PathStatus {
    let mut visited = vec![false; tables.len()];
    let mut u = src;
    let mut hops = 0;
    while u != dst {
        if visited[u as usize] {
            return PathStatus::Broken(BrokenReason::Loop);
        }
        visited[u as usize] = true;
        if hops >= hop_limit {
            return PathStatus::Broken(BrokenReason::HopLimit);
        }
        let Some(next) = tables[u as usize].next_hop(dst) else {
            return PathStatus::Broken(BrokenReason::NoRoute);
        };
        if !gt.is_linked(u, next) {
            return PathStatus::Broken(BrokenReason::InvalidHop);
        }
        u = next;
        hops += 1;
    }
    PathStatus::Connected { hops }
}

const UNKNOWN: u8 = 0;
const ACTIVE: u8 = 1;
const GOOD: u8 = 2;
const BAD: u8 = 3;

/// Memoized path evaluation for many sources towards one destination.
/// Gives the same verdict as [`traverse`] with `hop_limit = n`.
pub struct PathEvaluator {
    mark: Vec<u8>,
    touched: Vec<NodeId>,
    stack: Vec<NodeId>,
    dest: NodeId,
}

impl PathEvaluator {
    pub fn new(n: usize) -> Self {
        Self {
            mark: vec![UNKNOWN; n],
            touched: Vec::new(),
            stack: Vec::new(),
            dest: NO_ROUTE,
        }
    }

    pub fn set_destination(&mut self, dest: NodeId) {
        for &u in &self.touched {
            self.mark[u as usize] = UNKNOWN;
        }
        self.touched.clear();
        self.dest = dest;
        self.mark[dest as usize] = GOOD;
        self.touched.push(dest);
    }

    pub fn connected(&mut self, src: NodeId, tables: &[RoutingTable], gt: &GroundTruthGraph) -> bool {
        let dest = self.dest;
        let mut u = src;
        let verdict = loop {
            match self.mark[u as usize] {
                GOOD => break GOOD,
                BAD | ACTIVE => break BAD,
                _ => {}
            }
            self.mark[u as usize] = ACTIVE;
            self.touched.push(u);
            self.stack.push(u);
            let next = tables[u as usize].next_hops()[dest as usize];
            if next == NO_ROUTE || !gt.is_linked(u, next) {
                break BAD;
            }
            u = next;
        };
        for v in self.stack.drain(..) {
            self.mark[v as usize] = verdict;
        }
        verdict == GOOD
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum IntervalState {
    Connected,
    Broken,
}

impl IntervalState {
    pub fn as_str(self) -> &'static str {
        match self {
            IntervalState::Connected => "connected",
            IntervalState::Broken => "broken",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntervalRecord {
    pub src: NodeId,
    pub dst: NodeId,
    pub state: IntervalState,
    pub start: f64,
    pub end: f64,
    /// Touches a partition or the start of measurement.
    pub tainted: bool,
}

impl IntervalRecord {
    pub fn length(&self) -> f64 {
        self.end - self.start
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct OpenInterval {
    state: IntervalState,
    start: f64,
    censored: bool,
}

#[derive(Debug, Clone, Default)]
struct PairTrack {
    open: Option<OpenInterval>,
    gap_since: Option<f64>,
    gap_total: f64,
    last_t: Option<f64>,
}

/// Per ordered pair, alternating connected/broken intervals.
#[derive(Debug, Clone)]
pub struct IntervalLedger {
    pairs: Vec<(NodeId, NodeId)>,
    tracks: Vec<PairTrack>,
    closed: Vec<IntervalRecord>,
    failures: u64,
    first_t: Option<f64>,
    last_t: f64,
}

impl IntervalLedger {
    pub fn new(pairs: Vec<(NodeId, NodeId)>) -> Self {
        let tracks = vec![PairTrack::default(); pairs.len()];
        Self {
            pairs,
            tracks,
            closed: Vec::new(),
            failures: 0,
            first_t: None,
            last_t: f64::NEG_INFINITY,
        }
    }

    pub fn pairs(&self) -> &[(NodeId, NodeId)] {
        &self.pairs
    }

    pub fn closed(&self) -> &[IntervalRecord] {
        &self.closed
    }

    /// Connected-to-broken transitions seen so far.
    pub fn failures(&self) -> u64 {
        self.failures
    }

    /// Records the status of pair `idx` at snapshot time `t`; returns the
    /// interval it closed, if any.
    pub fn update(&mut self, idx: usize, status: PairStatus, t: f64) -> Result<Option<IntervalRecord>> {
        let track = &mut self.tracks[idx];
        if let Some(last) = track.last_t {
            if t < last {
                return Err(Error::OutOfOrder { at: t, last });
            }
        }
        track.last_t = Some(t);
        if t > self.last_t {
            self.last_t = t;
        }
        self.first_t.get_or_insert(t);

        let (src, dst) = self.pairs[idx];
        let state = match status {
            PairStatus::Connected => IntervalState::Connected,
            PairStatus::Broken => IntervalState::Broken,
            PairStatus::NoGroundTruthPath => {
                if track.gap_since.is_none() {
                    track.gap_since = Some(t);
                }
                return Ok(track.open.take().map(|o| {
                    let rec = IntervalRecord {
                        src,
                        dst,
                        state: o.state,
                        start: o.start,
                        end: t,
                        tainted: true,
                    };
                    self.closed.push(rec);
                    rec
                }));
            }
        };
        if let Some(since) = track.gap_since.take() {
            track.gap_total += t - since;
        }
        match track.open {
            None => {
                track.open = Some(OpenInterval {
                    state,
                    start: t,
                    censored: true,
                });
                Ok(None)
            }
            Some(o) if o.state == state => Ok(None),
            Some(o) => {
                if o.state == IntervalState::Connected {
                    self.failures += 1;
                }
                let rec = IntervalRecord {
                    src,
                    dst,
                    state: o.state,
                    start: o.start,
                    end: t,
                    tainted: o.censored,
                };
                self.closed.push(rec);
                track.open = Some(OpenInterval {
                    state,
                    start: t,
                    censored: false,
                });
                Ok(Some(rec))
            }
        }
    }

    /// Seconds between first and last snapshot.
    pub fn span(&self) -> f64 {
        self.first_t.map_or(0.0, |f| self.last_t - f)
    }

    /// Average connected-to-broken transitions per pair per second.
    pub fn path_failure_rate(&self) -> f64 {
        let span = self.span();
        if span <= 0.0 || self.pairs.is_empty() {
            return 0.0;
        }
        self.failures as f64 / (self.pairs.len() as f64 * span)
    }

    /// Untainted closed interval lengths of one state.
    pub fn lengths(&self, state: IntervalState) -> Vec<f64> {
        self.closed
            .iter()
            .filter(|r| r.state == state && !r.tainted)
            .map(IntervalRecord::length)
            .collect()
    }

    /// Per-pair time accounting: `(closed, open tail, partition gap)` seconds,
    /// as of the last snapshot.
    pub fn accounting(&self, idx: usize) -> (f64, f64, f64) {
        let (src, dst) = self.pairs[idx];
        let closed = self
            .closed
            .iter()
            .filter(|r| r.src == src && r.dst == dst)
            .map(IntervalRecord::length)
            .sum();
        let tr = &self.tracks[idx];
        let end = tr.last_t.unwrap_or(0.0);
        let open = tr.open.map_or(0.0, |o| end - o.start);
        let gap = tr.gap_total + tr.gap_since.map_or(0.0, |s| end - s);
        (closed, open, gap)
    }

    /// Closed intervals sorted by pair then start time; open tails dropped.
    pub fn finish(mut self) -> Vec<IntervalRecord> {
        self.closed.sort_by(|a, b| {
            (a.src, a.dst)
                .cmp(&(b.src, b.dst))
                .then(a.start.total_cmp(&b.start))
        });
        self.closed
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistogramExport {
    pub bin_width: f64,
    /// `(bin_start, normalized_count)`.
    pub bins: Vec<(f64, f64)>,
    /// `(value, cumulative fraction)` at each distinct value.
    pub cdf: Vec<(f64, f64)>,
    pub median: Option<f64>,
    pub mean: Option<f64>,
    pub count: usize,
}

pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    })
}

pub fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

/// Normalized histogram, empirical CDF, median and mean. An empty input
/// gives an empty export.
pub fn export_histogram(values: &[f64], bin_width: f64) -> HistogramExport {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let count = sorted.len();
    let mut bins = Vec::new();
    if let Some(&max) = sorted.last() {
        let nb = (max / bin_width).floor() as usize + 1;
        let mut counts = vec![0usize; nb];
        for &v in &sorted {
            // snapshot-quantized lengths sit on bin edges; nudge into the bin
            let b = ((v / bin_width) + 1e-9).floor() as usize;
            counts[b.min(nb - 1)] += 1;
        }
        bins = counts
            .iter()
            .enumerate()
            .map(|(i, &c)| (i as f64 * bin_width, c as f64 / count as f64))
            .collect();
    }
    let mut cdf: Vec<(f64, f64)> = Vec::new();
    for (i, &v) in sorted.iter().enumerate() {
        let frac = (i + 1) as f64 / count as f64;
        match cdf.last_mut() {
            Some(last) if last.0 == v => last.1 = frac,
            _ => cdf.push((v, frac)),
        }
    }
    HistogramExport {
        bin_width,
        bins,
        cdf,
        median: median(&sorted),
        mean: mean(&sorted),
        count,
    }
}
