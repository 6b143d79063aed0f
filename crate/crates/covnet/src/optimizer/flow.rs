//! Max-flow route to the per-cycle optimum.
//!
//! Both channels are single servers with per-helper availability windows,
//! so a relay plan is exactly a flow: source, one node per elementary
//! stretch of the infrastructure timeline, helper nodes, elementary
//! stretches of the contact timeline, sink. The interval rows of the LP are
//! the cut conditions of this network restricted to contiguous helper
//! blocks, and for windows that start in position order those blocks are
//! enough, so the flow value equals the LP optimum. Unlike the dense
//! tableau this stays fast when a cycle meets hundreds of helpers.

use super::{check_clip, deliver_rate_per_metre, receive_rate_per_metre, windows, OptimizerError};
use crate::model::{HelperConfig, Scenario};

struct Dinic {
    to: Vec<usize>,
    cap: Vec<f64>,
    adj: Vec<Vec<usize>>,
    level: Vec<i32>,
    iter: Vec<usize>,
    eps: f64,
}

impl Dinic {
    fn new(n: usize, eps: f64) -> Self {
        Dinic {
            to: Vec::new(),
            cap: Vec::new(),
            adj: vec![Vec::new(); n],
            level: vec![0; n],
            iter: vec![0; n],
            eps,
        }
    }

    fn add_edge(&mut self, u: usize, v: usize, c: f64) {
        self.adj[u].push(self.to.len());
        self.to.push(v);
        self.cap.push(c);
        self.adj[v].push(self.to.len());
        self.to.push(u);
        self.cap.push(0.0);
    }

    fn bfs(&mut self, s: usize, t: usize) -> bool {
        self.level.iter_mut().for_each(|l| *l = -1);
        self.level[s] = 0;
        let mut queue = std::collections::VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &e in &self.adj[u] {
                let v = self.to[e];
                if self.cap[e] > self.eps && self.level[v] < 0 {
                    self.level[v] = self.level[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        self.level[t] >= 0
    }

    // Path length is bounded by the four layers, so recursion stays shallow.
    fn dfs(&mut self, u: usize, t: usize, pushed: f64) -> f64 {
        if u == t {
            return pushed;
        }
        while self.iter[u] < self.adj[u].len() {
            let e = self.adj[u][self.iter[u]];
            let v = self.to[e];
            if self.cap[e] > self.eps && self.level[v] == self.level[u] + 1 {
                let d = self.dfs(v, t, pushed.min(self.cap[e]));
                if d > self.eps {
                    self.cap[e] -= d;
                    self.cap[e ^ 1] += d;
                    return d;
                }
            }
            self.iter[u] += 1;
        }
        0.0
    }

    fn max_flow(&mut self, s: usize, t: usize) -> f64 {
        let mut flow = 0.0;
        while self.bfs(s, t) {
            self.iter.iter_mut().for_each(|i| *i = 0);
            loop {
                let f = self.dfs(s, t, f64::INFINITY);
                if f <= self.eps {
                    break;
                }
                flow += f;
            }
        }
        flow
    }
}

/// Elementary stretches of one channel's timeline: the window endpoints cut
/// the line into pieces within which the set of available helpers is
/// constant. Returns the pieces and, per helper, the range of piece indices
/// its window spans.
fn segments(w: &[(f64, f64)]) -> (Vec<(f64, f64)>, Vec<(usize, usize)>) {
    let mut cuts: Vec<f64> = w.iter().flat_map(|&(a, b)| [a, b]).collect();
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup();
    let mut pieces = Vec::new();
    for pair in cuts.windows(2) {
        if pair[1] > pair[0] {
            pieces.push((pair[0], pair[1]));
        }
    }
    let spans = w
        .iter()
        .map(|&(a, b)| {
            let lo = pieces.partition_point(|&(_, pe)| pe <= a);
            let hi = pieces.partition_point(|&(ps, _)| ps < b);
            (lo, hi)
        })
        .collect();
    (pieces, spans)
}

/// Maximum total bits deliverable to the VoI in one cycle, for arbitrary
/// helper counts. Agrees with [`super::solve_cycle_lp`] on the instances the
/// tableau can hold.
pub fn optimal_delivery(
    s: &Scenario,
    h: &HelperConfig,
    clip: Option<f64>,
) -> Result<f64, OptimizerError> {
    check_clip(h, clip)?;
    let n = h.n();
    if n == 0 {
        return Ok(0.0);
    }
    let fa = receive_rate_per_metre(s);
    let fb = deliver_rate_per_metre(s);
    let (seg_a, span_a) = segments(&windows(h, 2.0 * s.infra_range(), clip));
    let (seg_b, span_b) = segments(&windows(h, 2.0 * s.vehicle_range(), clip));
    let total_cap: f64 = seg_a.iter().map(|&(a, b)| (b - a) * fa).sum();
    let big = 2.0 * total_cap + 1.0;
    let eps = 1e-12 * total_cap.max(1.0);

    let source = 0;
    let sink = 1;
    let a_base = 2;
    let helper_base = a_base + seg_a.len();
    let b_base = helper_base + n;
    let mut net = Dinic::new(b_base + seg_b.len(), eps);
    for (i, &(a, b)) in seg_a.iter().enumerate() {
        net.add_edge(source, a_base + i, (b - a) * fa);
    }
    for (i, &(a, b)) in seg_b.iter().enumerate() {
        net.add_edge(b_base + i, sink, (b - a) * fb);
    }
    for i in 0..n {
        let (lo, hi) = span_a[i];
        for j in lo..hi {
            net.add_edge(a_base + j, helper_base + i, big);
        }
        let (lo, hi) = span_b[i];
        for j in lo..hi {
            net.add_edge(helper_base + i, b_base + j, big);
        }
    }
    Ok(net.max_flow(source, sink))
}
