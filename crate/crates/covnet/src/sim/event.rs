//! Event-driven simulation: every vehicle moves through continuous time,
//! stations serve the passing helper stream FIFO, helpers buffer what they
//! received and hand it to the VoI FIFO while in contact.
//!
//! Geometry is one-dimensional. The VoI starts at the entry edge of station
//! 0's coverage and drives right; helpers flow left from a Poisson-seeded
//! strip long enough that the stream never dries up before the run ends.
//! Cycle j is the stretch of VoI travel from entry of station j's coverage
//! to entry of station j+1's; the first and last cycles absorb the start-up
//! and tail artifacts and are dropped.
//!
//! Time is cut into a uniform window grid when any model needs per-interval
//! redraws (speeds, shadowed ranges); with all-constant models the grid
//! degenerates to a single window and the engine is exact. Every random
//! draw is keyed by (component, vehicle, peer, window), so lazy evaluation
//! and thread scheduling cannot change results.

use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use super::models::{ChannelModel, ConnectionModel, MobilityModel, ModelConfig, DEFAULT_TAU};
use super::rng::{
    poisson_positions, stream, CHANNEL_STREAM, CONNECTION_STREAM, HELPER_STREAM, MOBILITY_STREAM,
    VOI_ID,
};
use super::{CycleTrace, SimError};
use crate::model::Scenario;

const MIN_SPEED: f64 = 0.5;
/// Shadowed range draws are capped at this multiple of the nominal range so
/// one extreme draw cannot connect vehicles kilometres apart.
const RANGE_CAP: f64 = 4.0;

/// Run one replicate and return the retained per-cycle traces.
pub fn run_event_driven(
    s: &Scenario,
    m: &ModelConfig,
    horizon_cycles: u32,
    seed: u64,
) -> Result<Vec<CycleTrace>, SimError> {
    Ok(run_event_rep(s, m, horizon_cycles, seed)?.traces)
}

/// Traces plus the conservation ledger the engine asserts against.
#[cfg_attr(not(test), allow(dead_code))]
pub(crate) struct EngineOutput {
    pub traces: Vec<CycleTrace>,
    /// Bits infrastructure handed to helpers whose buffers were consulted.
    pub served_bits: f64,
    /// Bits those helpers delivered to the VoI.
    pub delivered_bits: f64,
}

/// Linear motion of the two link endpoints inside one window.
#[derive(Clone, Copy)]
struct PieceGeom {
    t_ref: f64,
    a0: f64,
    av: f64,
    b0: f64,
    bv: f64,
}

impl PieceGeom {
    fn dist(&self, t: f64) -> f64 {
        ((self.a0 - self.b0) + (self.av - self.bv) * (t - self.t_ref)).abs()
    }
}

struct Crossing {
    helper: u32,
    station: u32,
    window: u32,
    t_in: f64,
    t_out: f64,
    geom: PieceGeom,
    /// FIFO service interval; empty (sa == sb) when the channel never freed.
    sa: f64,
    sb: f64,
}

struct Contact {
    helper: u32,
    window: u32,
    t_in: f64,
    t_out: f64,
    geom: PieceGeom,
}

/// Contact time the VoI radio is actually free for, after subtracting its
/// own infrastructure coverage.
struct AvailPiece {
    contact: usize,
    a: f64,
    b: f64,
}

/// Piecewise-linear VoI trajectory with random access by time and position.
struct VoiPath {
    tau: f64,
    speeds: Vec<f64>,
    /// Position at the start of each window.
    cum: Vec<f64>,
    start_pos: f64,
    t_end: f64,
}

impl VoiPath {
    fn pos(&self, t: f64) -> f64 {
        if !self.tau.is_finite() {
            return self.start_pos + self.speeds[0] * t;
        }
        let w = ((t / self.tau) as usize).min(self.speeds.len() - 1);
        self.cum[w] + self.speeds[w] * (t - w as f64 * self.tau)
    }

    /// First time the (strictly advancing) path reaches x.
    fn time_at(&self, x: f64) -> f64 {
        if !self.tau.is_finite() {
            return (x - self.start_pos) / self.speeds[0];
        }
        let w = self.cum.partition_point(|&c| c <= x).saturating_sub(1).min(self.speeds.len() - 1);
        w as f64 * self.tau + (x - self.cum[w]) / self.speeds[w]
    }

    fn n_windows(&self) -> usize {
        self.speeds.len()
    }

    /// (t0, t1, x0, v) of window w, clipped to the run end.
    fn window_seg(&self, w: usize) -> (f64, f64, f64, f64) {
        if !self.tau.is_finite() {
            return (0.0, self.t_end, self.start_pos, self.speeds[0]);
        }
        let t0 = w as f64 * self.tau;
        let t1 = ((w + 1) as f64 * self.tau).min(self.t_end);
        (t0, t1, self.cum[w], self.speeds[w])
    }
}

/// Window grid: the mobility model's interval if it has one, else a default
/// grid when the connection model needs redraws, else a single window.
fn grid_tau(m: &ModelConfig) -> f64 {
    match (m.mobility, m.connection) {
        (MobilityModel::Gaussian { tau, .. }, _) => tau,
        (MobilityModel::Constant, ConnectionModel::LogNormal { .. }) => DEFAULT_TAU,
        (MobilityModel::Constant, ConnectionModel::UnitDisk) => f64::INFINITY,
    }
}

enum SpeedSource {
    Fixed(f64),
    Gaussian { base: f64, sigma: f64, rng: ChaCha12Rng },
}

impl SpeedSource {
    fn new(m: &MobilityModel, base: f64, voi: bool, seed: u64, id: u64) -> Self {
        match *m {
            MobilityModel::Constant => SpeedSource::Fixed(base),
            MobilityModel::Gaussian { sigma1, sigma2, .. } => SpeedSource::Gaussian {
                base,
                sigma: if voi { sigma1 } else { sigma2 },
                rng: stream(seed, &[MOBILITY_STREAM, id]),
            },
        }
    }

    fn next(&mut self) -> f64 {
        match self {
            SpeedSource::Fixed(v) => *v,
            SpeedSource::Gaussian { base, sigma, rng } => {
                let z: f64 = rng.sample(StandardNormal);
                (*base + *sigma * z).max(MIN_SPEED)
            }
        }
    }
}

fn build_voi_path(s: &Scenario, m: &ModelConfig, tau: f64, target: f64, seed: u64) -> VoiPath {
    let start_pos = -s.infra_range();
    let mut src = SpeedSource::new(&m.mobility, s.voi_speed(), true, seed, VOI_ID);
    if !tau.is_finite() {
        let v = src.next();
        return VoiPath {
            tau,
            speeds: vec![v],
            cum: vec![start_pos],
            start_pos,
            t_end: (target - start_pos) / v,
        };
    }
    let mut speeds = Vec::new();
    let mut cum = Vec::new();
    let mut pos = start_pos;
    // Speeds are clamped above MIN_SPEED, so the loop always terminates.
    while pos < target {
        let v = src.next();
        speeds.push(v);
        cum.push(pos);
        pos += v * tau;
    }
    let mut path = VoiPath { tau, speeds, cum, start_pos, t_end: 0.0 };
    path.t_end = path.time_at(target);
    path
}

/// Effective link range for one endpoint pair in one window.
fn link_radius(
    conn: &ConnectionModel,
    nominal: f64,
    seed: u64,
    a: u64,
    b: u64,
    w: u64,
) -> f64 {
    match *conn {
        ConnectionModel::UnitDisk => nominal,
        ConnectionModel::LogNormal { alpha, sigma } => {
            let sd = sigma * std::f64::consts::LN_10 / (10.0 * alpha);
            let mut rng = stream(seed, &[CONNECTION_STREAM, a, b, w]);
            let z: f64 = rng.sample(StandardNormal);
            // Zero-mean dB shadowing: the nominal range is the median, so
            // the occasional long reach outweighs the short ones on average.
            (nominal * (sd * z).exp()).min(RANGE_CAP * nominal)
        }
    }
}

fn range_cap(conn: &ConnectionModel, nominal: f64) -> f64 {
    match conn {
        ConnectionModel::UnitDisk => nominal,
        ConnectionModel::LogNormal { .. } => RANGE_CAP * nominal,
    }
}

/// Times within [t0, t1] at which a point moving as x0 + v (t - t0) sits
/// within r of the target coordinate.
fn range_window(x0: f64, v: f64, t0: f64, t1: f64, target: f64, r: f64) -> Option<(f64, f64)> {
    if v == 0.0 {
        return ((x0 - target).abs() <= r).then_some((t0, t1));
    }
    let e1 = t0 + (target - r - x0) / v;
    let e2 = t0 + (target + r - x0) / v;
    let (a, b) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
    let a = a.max(t0);
    let b = b.min(t1);
    (b > a).then_some((a, b))
}

/// Average rate over one faded link piece: the piece's full extent splits
/// into `k` equal slices, each with its own fading draw and its midpoint
/// path loss. The piece then carries that single rate for its whole lifetime,
/// however the scheduler slices it, so a run at measured average rates sees
/// the same capacity per traverse.
fn piece_rate(
    b_hz: f64,
    p_dbm: f64,
    k: u32,
    g: &PieceGeom,
    ta: f64,
    tb: f64,
    rng: &mut ChaCha12Rng,
) -> f64 {
    if tb <= ta {
        return 0.0;
    }
    let dt = (tb - ta) / k as f64;
    let mut sum = 0.0;
    for i in 0..k {
        let tm = ta + (i as f64 + 0.5) * dt;
        let beta: f64 = rng.sample(StandardNormal);
        sum += super::models::shannon_rate(b_hz, p_dbm, beta, g.dist(tm));
    }
    sum / k as f64
}

pub(crate) fn run_event_rep(
    s: &Scenario,
    m: &ModelConfig,
    horizon: u32,
    seed: u64,
) -> Result<EngineOutput, SimError> {
    m.validate()?;
    if horizon < 3 {
        return Err(SimError::HorizonTooShort(horizon));
    }
    let d = s.infra_spacing();
    let r_i = s.infra_range();
    let r_0 = s.vehicle_range();
    let w_i = s.v2i_rate();
    let w_v = s.v2v_rate();
    let conn = m.connection;
    let cap_i = range_cap(&conn, r_i);
    let cap_0 = range_cap(&conn, r_0);
    let tau = grid_tau(m);
    let n_cycles = horizon as usize;
    let n_st = n_cycles + 1;
    let target = horizon as f64 * d - r_i;
    let voi = build_voi_path(s, m, tau, target, seed);
    let t_end = voi.t_end;

    // The VoI's own coverage pieces: direct reception, and the stretches
    // where its radio is unavailable to helpers.
    let mut coverage: Vec<(u32, u32, f64, f64, PieceGeom)> = Vec::new();
    for w in 0..voi.n_windows() {
        let (t0, t1, x0, v) = voi.window_seg(w);
        if t1 <= t0 {
            continue;
        }
        let xhi = x0 + v * (t1 - t0);
        let jlo = (((x0 - cap_i) / d).floor().max(0.0)) as usize;
        let jhi = ((((xhi + cap_i) / d).ceil()).max(0.0) as usize).min(n_st - 1);
        for j in jlo..=jhi.max(jlo) {
            if j >= n_st {
                break;
            }
            let st = j as f64 * d;
            let r = link_radius(&conn, r_i, seed, VOI_ID, j as u64, w as u64);
            if let Some((a, b)) = range_window(x0, v, t0, t1, st, r) {
                let geom = PieceGeom { t_ref: t0, a0: x0, av: v, b0: st, bv: 0.0 };
                coverage.push((j as u32, w as u32, a, b, geom));
            }
        }
    }

    // Helper strip: long enough on the right that fresh helpers keep
    // arriving until the run ends, padded on the left so vehicles already
    // in range at t = 0 exist.
    let v2_bound = match m.mobility {
        MobilityModel::Constant => s.helper_speed(),
        MobilityModel::Gaussian { sigma2, .. } => s.helper_speed() + sigma2,
    };
    let lo = -(cap_i + cap_0) - 500.0;
    let hi = horizon as f64 * d + cap_i + v2_bound * t_end + 500.0;
    let mut hrng = stream(seed, &[HELPER_STREAM]);
    let helper_x: Vec<f64> = poisson_positions(s.helper_density(), hi - lo, &mut hrng)
        .into_iter()
        .map(|p| p + lo)
        .collect();
    let n_helpers = helper_x.len();

    let mut crossings: Vec<Crossing> = Vec::new();
    let mut contacts: Vec<Contact> = Vec::new();
    let mut per_station: Vec<Vec<usize>> = vec![Vec::new(); n_st];
    let mut per_helper: Vec<Vec<usize>> = vec![Vec::new(); n_helpers];

    for (hid, &x_start) in helper_x.iter().enumerate() {
        let mut src = SpeedSource::new(&m.mobility, s.helper_speed(), false, seed, hid as u64);
        let mut x = x_start;
        let mut w = 0usize;
        loop {
            let (t0, t1) = if tau.is_finite() {
                (w as f64 * tau, ((w + 1) as f64 * tau).min(t_end))
            } else if w == 0 {
                (0.0, t_end)
            } else {
                break;
            };
            if t0 >= t_end || t1 <= t0 {
                break;
            }
            let u = src.next();
            let xlo = x - u * (t1 - t0);
            // Station crossings in this window.
            let jlo = (((xlo - cap_i) / d).floor().max(0.0)) as usize;
            let jhi = ((((x + cap_i) / d).ceil()).max(0.0) as usize).min(n_st - 1);
            for j in jlo..=jhi.max(jlo) {
                if j >= n_st || (j as f64 * d) - cap_i > x {
                    break;
                }
                let st = j as f64 * d;
                let r = link_radius(&conn, r_i, seed, hid as u64, j as u64, w as u64);
                if let Some((a, b)) = range_window(x, -u, t0, t1, st, r) {
                    let geom = PieceGeom { t_ref: t0, a0: x, av: -u, b0: st, bv: 0.0 };
                    let idx = crossings.len();
                    crossings.push(Crossing {
                        helper: hid as u32,
                        station: j as u32,
                        window: w as u32,
                        t_in: a,
                        t_out: b,
                        geom,
                        sa: 0.0,
                        sb: 0.0,
                    });
                    per_station[j].push(idx);
                    per_helper[hid].push(idx);
                }
            }
            // VoI contact in this window: the gap shrinks at the closing
            // speed, both endpoints linear on the shared grid.
            if w < voi.n_windows() {
                let (vt0, _, vx0, vv) = voi.window_seg(w);
                debug_assert!((vt0 - t0).abs() < 1e-9 || !tau.is_finite());
                let r = link_radius(&conn, r_0, seed, hid as u64, VOI_ID, w as u64);
                let gap0 = x - vx0;
                if let Some((a, b)) = range_window(gap0, -(u + vv), t0, t1, 0.0, r) {
                    let geom = PieceGeom { t_ref: t0, a0: x, av: -u, b0: vx0, bv: vv };
                    contacts.push(Contact {
                        helper: hid as u32,
                        window: w as u32,
                        t_in: a,
                        t_out: b,
                        geom,
                    });
                }
            }
            x = xlo;
            w += 1;
            if x < lo {
                break;
            }
        }
    }

    // A helper meets high-numbered stations first, so its crossing list was
    // built in reverse; the buffer walk needs chronological order.
    for list in &mut per_helper {
        list.sort_by(|&a, &b| {
            crossings[a]
                .t_out
                .total_cmp(&crossings[b].t_out)
                .then(crossings[a].station.cmp(&crossings[b].station))
        });
    }

    // FIFO service at each station: start at coverage entry or when the
    // predecessor departs, serve until own exit.
    for list in &mut per_station {
        list.sort_by(|&a, &b| {
            crossings[a]
                .t_in
                .total_cmp(&crossings[b].t_in)
                .then(crossings[a].helper.cmp(&crossings[b].helper))
        });
        let mut free = f64::NEG_INFINITY;
        for &ci in list.iter() {
            let c = &mut crossings[ci];
            let sa = c.t_in.max(free);
            if sa < c.t_out {
                c.sa = sa;
                c.sb = c.t_out;
            } else {
                c.sa = c.t_out;
                c.sb = c.t_out;
            }
            free = free.max(c.t_out);
        }
    }

    // The VoI radio is busy during its own coverage: merge those intervals
    // and cut them out of every contact.
    let mut blockers: Vec<(f64, f64)> = coverage.iter().map(|&(_, _, a, b, _)| (a, b)).collect();
    blockers.sort_by(|p, q| p.0.total_cmp(&q.0));
    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(blockers.len());
    for (a, b) in blockers {
        match merged.last_mut() {
            Some(last) if a <= last.1 => last.1 = last.1.max(b),
            _ => merged.push((a, b)),
        }
    }
    contacts.sort_by(|p, q| p.t_in.total_cmp(&q.t_in).then(p.helper.cmp(&q.helper)));
    let mut avail: Vec<AvailPiece> = Vec::with_capacity(contacts.len());
    for (ci, c) in contacts.iter().enumerate() {
        let t1 = c.t_out;
        let mut cursor = c.t_in;
        for &(ba, bb) in &merged {
            if bb <= cursor {
                continue;
            }
            if ba >= t1 {
                break;
            }
            if ba > cursor {
                avail.push(AvailPiece { contact: ci, a: cursor, b: ba.min(t1) });
            }
            cursor = cursor.max(bb);
            if cursor >= t1 {
                break;
            }
        }
        if cursor < t1 {
            avail.push(AvailPiece { contact: ci, a: cursor, b: t1 });
        }
    }
    avail.sort_by(|p, q| {
        p.a.total_cmp(&q.a).then(contacts[p.contact].helper.cmp(&contacts[q.contact].helper))
    });

    // Delivery: one transmitter at a time in contact order; a helper's
    // buffer holds what its most recent station served it, materialized
    // lazily so faded pieces are only priced when consulted.
    let mut cross_bits: Vec<Option<f64>> = vec![None; crossings.len()];
    let mut contact_rate: Vec<Option<f64>> = vec![None; contacts.len()];
    let mut served = 0.0;
    let mut delivered_total = 0.0;
    let mut next_cross: Vec<usize> = vec![0; n_helpers];
    let mut loaded_station: Vec<Option<u32>> = vec![None; n_helpers];
    let mut pending: Vec<Vec<usize>> = vec![Vec::new(); n_helpers];
    let mut buffer: Vec<f64> = vec![0.0; n_helpers];
    let mut v2v = vec![0.0f64; n_cycles];
    let mut cur = f64::NEG_INFINITY;
    for piece in &avail {
        let c = &contacts[piece.contact];
        let h = c.helper as usize;
        let start = piece.a.max(cur);
        if start >= piece.b {
            continue;
        }
        // Bits become usable once the crossing that produced them ends.
        let list = &per_helper[h];
        while next_cross[h] < list.len() && crossings[list[next_cross[h]]].t_out <= start {
            let idx = list[next_cross[h]];
            let st = crossings[idx].station;
            if loaded_station[h] != Some(st) {
                loaded_station[h] = Some(st);
                pending[h].clear();
                buffer[h] = 0.0;
            }
            pending[h].push(idx);
            next_cross[h] += 1;
        }
        for idx in pending[h].drain(..) {
            let bits = match cross_bits[idx] {
                Some(b) => b,
                None => {
                    let cr = &crossings[idx];
                    let b = match m.channel {
                        ChannelModel::ConstantRate => w_i * (cr.sb - cr.sa),
                        ChannelModel::RayleighPathLoss { b_i_hz, p_i_dbm, segments, .. } => {
                            let mut rng = stream(
                                seed,
                                &[CHANNEL_STREAM, cr.helper as u64, cr.station as u64, cr.window as u64],
                            );
                            let rate =
                                piece_rate(b_i_hz, p_i_dbm, segments, &cr.geom, cr.t_in, cr.t_out, &mut rng);
                            rate * (cr.sb - cr.sa)
                        }
                    };
                    cross_bits[idx] = Some(b);
                    served += b;
                    b
                }
            };
            buffer[h] += bits;
        }
        if buffer[h] <= 0.0 {
            continue;
        }
        let (sent, used) = match m.channel {
            ChannelModel::ConstantRate => {
                let tx = (piece.b - start).min(buffer[h] / w_v);
                (w_v * tx, tx)
            }
            ChannelModel::RayleighPathLoss { b_v_hz, p_v_dbm, segments, .. } => {
                let rate = *contact_rate[piece.contact].get_or_insert_with(|| {
                    let mut rng =
                        stream(seed, &[CHANNEL_STREAM, c.helper as u64, VOI_ID, c.window as u64]);
                    piece_rate(b_v_hz, p_v_dbm, segments, &c.geom, c.t_in, c.t_out, &mut rng)
                });
                if rate > 0.0 {
                    let tx = (piece.b - start).min(buffer[h] / rate);
                    (rate * tx, tx)
                } else {
                    (0.0, 0.0)
                }
            }
        };
        buffer[h] -= sent;
        delivered_total += sent;
        cur = start + used;
        let cyc = ((voi.pos(start) + r_i) / d).floor();
        if cyc >= 0.0 && (cyc as usize) < n_cycles {
            v2v[cyc as usize] += sent;
        }
    }
    debug_assert!(delivered_total <= served + 1e-6 * served.abs().max(1.0));

    // Direct reception per station -> cycle of the same index.
    let mut v2i = vec![0.0f64; n_cycles];
    for &(j, w, a, b, ref geom) in &coverage {
        if (j as usize) >= n_cycles {
            continue;
        }
        let bits = match m.channel {
            ChannelModel::ConstantRate => w_i * (b - a),
            ChannelModel::RayleighPathLoss { b_i_hz, p_i_dbm, segments, .. } => {
                let mut rng = stream(seed, &[CHANNEL_STREAM, VOI_ID, j as u64, w as u64]);
                piece_rate(b_i_hz, p_i_dbm, segments, geom, a, b, &mut rng) * (b - a)
            }
        };
        v2i[j as usize] += bits;
    }

    // Participation counts from first contact, clusters from the arrival
    // gaps at the nominal closing speed.
    let mut first_contact: Vec<f64> = vec![f64::INFINITY; n_helpers];
    for c in &contacts {
        let h = c.helper as usize;
        if c.t_in < first_contact[h] {
            first_contact[h] = c.t_in;
        }
    }
    let mut starts_by_cycle: Vec<Vec<f64>> = vec![Vec::new(); n_cycles];
    for &t in first_contact.iter().filter(|t| t.is_finite()) {
        let cyc = ((voi.pos(t) + r_i) / d).floor();
        if cyc >= 0.0 && (cyc as usize) < n_cycles {
            starts_by_cycle[cyc as usize].push(t);
        }
    }
    let cluster_gap = 2.0 * r_i / s.closing_speed();
    let mut traces = Vec::with_capacity(n_cycles.saturating_sub(2));
    for cyc in 1..n_cycles - 1 {
        let t_a = voi.time_at(cyc as f64 * d - r_i);
        let t_b = voi.time_at((cyc + 1) as f64 * d - r_i);
        let starts = &mut starts_by_cycle[cyc];
        starts.sort_by(f64::total_cmp);
        let clusters = if starts.is_empty() {
            0
        } else {
            1 + starts.windows(2).filter(|p| p[1] - p[0] > cluster_gap).count() as u64
        };
        traces.push(CycleTrace {
            v2i_bits: v2i[cyc],
            v2v_bits: v2v[cyc],
            duration: t_b - t_a,
            helper_count: starts.len() as u64,
            cluster_count: clusters,
        });
    }
    Ok(EngineOutput { traces, served_bits: served, delivered_bits: delivered_total })
}
