//! Event-driven simulator of the modelled switch fabric, used as an
//! independent check on the analytic bounds: frames conforming to each
//! stream's declared envelope are pushed through cut-through FIFO links and
//! the observed per-frame delays must never exceed the calculus bound.
//!
//! A frame's delay is measured from the instant its last byte enters the
//! network (source link transmission complete) to the instant its last byte
//! reaches the destination, which is the quantity the per-component bounds
//! add up to. Frame release times at the source are leaky-bucket
//! constrained and the source link serialises the burst, exactly the
//! arrival shaping the multiplexer bounds assume.

use crate::calculus::{self, CalculusError};
use crate::net_model::{NetworkModel, StreamId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};

/// Traffic generation scheme for a simulation run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Workload {
    /// Full burst of maximum-size frames at t = 0, then the sustained rate.
    Greedy,
    /// Seeded frame sizes in `[64, max_frame_len]` and release jitter within
    /// the slack the envelope allows.
    Random { seed: u64 },
}

impl Workload {
    pub fn label(&self) -> String {
        match self {
            Workload::Greedy => "greedy".into(),
            Workload::Random { seed } => format!("random({seed})"),
        }
    }
}

/// Per-stream delay statistics of one run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StreamStats {
    pub max_delay: f64,
    pub mean_delay: f64,
    pub frames: u64,
}

/// Observed behaviour of one simulation run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ObservedStats {
    pub per_stream: BTreeMap<StreamId, StreamStats>,
    /// Largest queued byte count seen per directed link, keyed "from->to".
    pub max_backlog: BTreeMap<String, f64>,
}

impl ObservedStats {
    pub fn stream(&self, id: &StreamId) -> StreamStats {
        self.per_stream.get(id).cloned().unwrap_or_default()
    }
}

/// Per-frame record kept when tracing is requested.
#[derive(Debug, Clone)]
pub struct FrameTrace {
    pub stream: StreamId,
    pub seq: u64,
    pub len: f64,
    pub release: f64,
    /// Last byte across the source link.
    pub entry_complete: f64,
    /// Last byte at the destination.
    pub delivered: f64,
    pub delay: f64,
    /// `(head_arrival, service_start, completion)` per link on the path.
    pub hops: Vec<(f64, f64, f64)>,
}

struct Frame {
    stream: usize,
    seq: u64,
    len: f64,
    release: f64,
    /// Completion time at the previous hop; availability constraint for the
    /// current one.
    completion_in: f64,
    hop: usize,
    hops: Vec<(f64, f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Event {
    /// Frame header available at its `hop`-th link.
    Head { frame: usize },
    /// Link finished a frame.
    Free { link: usize },
}

struct HeapEntry {
    bits: u64,
    rank: u8,
    a: usize,
    b: u64,
    ev: Event,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        (self.bits, self.rank, self.a, self.b) == (other.bits, other.rank, other.a, other.b)
    }
}
impl Eq for HeapEntry {}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.bits, self.rank, self.a, self.b).cmp(&(other.bits, other.rank, other.a, other.b))
    }
}

struct LinkState {
    capacity: f64,
    free_at: f64,
    /// Waiting frames keyed by (head arrival, stream, seq) for a
    /// deterministic FIFO order.
    waiting: BTreeMap<(u64, usize, u64), usize>,
    queued_bytes: f64,
    max_backlog: f64,
}

/// Release schedule of one stream: `(release_time, frame_len)` pairs.
///
/// A leaky bucket of depth `sigma` refilling at `rho` meters the releases,
/// so traffic conforms to the envelope over every window, not just from
/// zero. Frames longer than the bucket depth are shortened to it; a stream
/// with zero burst allowance stays silent.
fn releases(
    sigma: f64,
    rho: f64,
    max_len: f64,
    workload: Workload,
    stream_idx: usize,
    horizon: f64,
) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut rng = match workload {
        Workload::Greedy => None,
        Workload::Random { seed } => Some(ChaCha8Rng::seed_from_u64(
            seed ^ (stream_idx as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15),
        )),
    };
    let cap = sigma;
    let mut credit = sigma;
    let mut t = 0.0;
    let mut cumulative = 0.0;
    loop {
        let desired = match rng.as_mut() {
            None => max_len,
            Some(r) => {
                if max_len <= 64.0 {
                    max_len
                } else {
                    64.0 + r.gen::<f64>() * (max_len - 64.0)
                }
            }
        };
        let len = desired.min(cap);
        if len <= 0.0 {
            break;
        }
        if credit < len {
            t += (len - credit) / rho;
            credit = len;
        }
        if let Some(r) = rng.as_mut() {
            let slack = r.gen::<f64>() * (len / rho);
            t += slack;
            credit = (credit + slack * rho).min(cap);
        }
        if t >= horizon {
            break;
        }
        cumulative += len;
        assert!(
            cumulative <= sigma + rho * t + 1e-6,
            "generated traffic exceeds its envelope: {cumulative} > {} at t={t}",
            sigma + rho * t
        );
        out.push((t, len));
        credit -= len;
    }
    out
}

fn run(
    model: &NetworkModel,
    workload: Workload,
    horizon: f64,
    want_trace: bool,
) -> (ObservedStats, Vec<FrameTrace>) {
    assert!(horizon > 0.0, "horizon must be > 0");

    // Directed link table and per-stream link paths.
    let mut link_states: Vec<LinkState> = model
        .links
        .iter()
        .map(|l| LinkState {
            capacity: l.capacity,
            free_at: 0.0,
            waiting: BTreeMap::new(),
            queued_bytes: 0.0,
            max_backlog: 0.0,
        })
        .collect();
    let link_index = |from: &_, to: &_| -> usize {
        model
            .links
            .iter()
            .position(|l| &l.from == from && &l.to == to)
            .expect("validated model has every path link")
    };
    let paths: Vec<Vec<usize>> = model
        .streams
        .iter()
        .map(|s| {
            let nodes = model.path_nodes(s);
            nodes.windows(2).map(|p| link_index(&p[0], &p[1])).collect()
        })
        .collect();

    let mut frames: Vec<Frame> = Vec::new();
    let mut heap: BinaryHeap<Reverse<HeapEntry>> = BinaryHeap::new();
    for (stream_idx, s) in model.streams.iter().enumerate() {
        for (seq, (t, len)) in
            releases(s.envelope0.sigma, s.envelope0.rho, s.max_frame_len, workload, stream_idx, horizon)
                .into_iter()
                .enumerate()
        {
            let idx = frames.len();
            frames.push(Frame {
                stream: stream_idx,
                seq: seq as u64,
                len,
                release: t,
                completion_in: t,
                hop: 0,
                hops: Vec::new(),
            });
            heap.push(Reverse(HeapEntry {
                bits: t.to_bits(),
                rank: 0,
                a: stream_idx,
                b: seq as u64,
                ev: Event::Head { frame: idx },
            }));
        }
    }

    let mut stats = ObservedStats::default();
    for s in &model.streams {
        stats.per_stream.insert(s.id.clone(), StreamStats::default());
    }
    let mut traces: Vec<FrameTrace> = Vec::new();

    let try_start = |link_idx: usize,
                         frames: &mut Vec<Frame>,
                         link_states: &mut Vec<LinkState>,
                         heap: &mut BinaryHeap<Reverse<HeapEntry>>,
                         stats: &mut ObservedStats,
                         traces: &mut Vec<FrameTrace>,
                         now: f64| {
        let state = &mut link_states[link_idx];
        if state.free_at > now || state.waiting.is_empty() {
            return;
        }
        let (&key, &frame_idx) = state.waiting.iter().next().unwrap();
        state.waiting.remove(&key);
        let frame = &mut frames[frame_idx];
        state.queued_bytes -= frame.len;
        let head = f64::from_bits(key.0);
        let start = head.max(state.free_at);
        let completion = (start + frame.len / state.capacity).max(frame.completion_in);
        state.free_at = completion;
        frame.hops.push((head, start, completion));
        frame.completion_in = completion;
        heap.push(Reverse(HeapEntry {
            bits: completion.to_bits(),
            rank: 1,
            a: link_idx,
            b: 0,
            ev: Event::Free { link: link_idx },
        }));
        let path = &paths[frame.stream];
        frame.hop += 1;
        if frame.hop < path.len() {
            heap.push(Reverse(HeapEntry {
                bits: start.to_bits(),
                rank: 0,
                a: frame.stream,
                b: frame.seq,
                ev: Event::Head { frame: frame_idx },
            }));
        } else {
            // Delivered. Entry into the network is the completion of the
            // very first hop (the source link).
            let entry_complete = frame.hops[0].2;
            let delay = completion - entry_complete;
            let stream_id = &model.streams[frame.stream].id;
            let st = stats.per_stream.get_mut(stream_id).unwrap();
            st.frames += 1;
            st.max_delay = st.max_delay.max(delay);
            st.mean_delay += delay;
            if want_trace {
                traces.push(FrameTrace {
                    stream: stream_id.clone(),
                    seq: frame.seq,
                    len: frame.len,
                    release: frame.release,
                    entry_complete,
                    delivered: completion,
                    delay,
                    hops: frame.hops.clone(),
                });
            }
        }
    };

    while let Some(Reverse(entry)) = heap.pop() {
        let now = f64::from_bits(entry.bits);
        match entry.ev {
            Event::Head { frame } => {
                let link_idx = paths[frames[frame].stream][frames[frame].hop];
                let state = &mut link_states[link_idx];
                state
                    .waiting
                    .insert((entry.bits, frames[frame].stream, frames[frame].seq), frame);
                state.queued_bytes += frames[frame].len;
                state.max_backlog = state.max_backlog.max(state.queued_bytes);
                try_start(
                    link_idx,
                    &mut frames,
                    &mut link_states,
                    &mut heap,
                    &mut stats,
                    &mut traces,
                    now,
                );
            }
            Event::Free { link } => {
                try_start(link, &mut frames, &mut link_states, &mut heap, &mut stats, &mut traces, now);
            }
        }
    }

    for st in stats.per_stream.values_mut() {
        if st.frames > 0 {
            st.mean_delay /= st.frames as f64;
        }
    }
    for (l, state) in model.links.iter().zip(&link_states) {
        stats
            .max_backlog
            .insert(format!("{}->{}", l.from, l.to), state.max_backlog);
    }
    (stats, traces)
}

/// Simulates the model under one workload. Deterministic for a given
/// `(model, workload, horizon)`.
pub fn simulate(model: &NetworkModel, workload: Workload, horizon: f64) -> ObservedStats {
    run(model, workload, horizon, false).0
}

/// Like [`simulate`] but also returns the per-frame trace.
pub fn simulate_trace(
    model: &NetworkModel,
    workload: Workload,
    horizon: f64,
) -> (ObservedStats, Vec<FrameTrace>) {
    run(model, workload, horizon, true)
}

/// Outcome of comparing observed delays against the analytic bound.
#[derive(Debug, Clone)]
pub enum BoundCheck {
    Holds {
        observed_max: f64,
        bound: f64,
    },
    Violated {
        workload: String,
        observed: f64,
        bound: f64,
        frame_seq: u64,
    },
}

impl BoundCheck {
    pub fn holds(&self) -> bool {
        matches!(self, BoundCheck::Holds { .. })
    }
}

/// Checks one stream's analytic bound against every workload given,
/// returning the first violating frame when one exists.
pub fn check_bound(
    model: &NetworkModel,
    stream_id: &StreamId,
    workloads: &[Workload],
    horizon: f64,
) -> Result<BoundCheck, CalculusError> {
    let bound = calculus::end_to_end_delay(model, stream_id)?;
    let mut observed_max = 0.0_f64;
    for w in workloads {
        let (stats, traces) = simulate_trace(model, *w, horizon);
        let st = stats.stream(stream_id);
        if st.max_delay > bound {
            let frame = traces
                .iter()
                .filter(|f| &f.stream == stream_id)
                .max_by(|a, b| a.delay.total_cmp(&b.delay))
                .expect("violating stream produced frames");
            return Ok(BoundCheck::Violated {
                workload: w.label(),
                observed: st.max_delay,
                bound,
                frame_seq: frame.seq,
            });
        }
        observed_max = observed_max.max(st.max_delay);
    }
    Ok(BoundCheck::Holds { observed_max, bound })
}

/// One row of a soundness campaign.
#[derive(Debug, Clone)]
pub struct CampaignRow {
    pub model: String,
    pub stream: StreamId,
    pub workload: String,
    pub observed_max: f64,
    pub bound: f64,
    pub ok: bool,
}

/// Campaign outcome across a set of models, seeds and workloads.
#[derive(Debug, Clone, Default)]
pub struct CampaignReport {
    pub rows: Vec<CampaignRow>,
    pub violations: usize,
    /// Largest relative gap between the burstiness-growth delay and the sum
    /// of per-switch bounds seen across all solved models.
    pub worst_identity_gap: f64,
}

/// Runs every stream of every model against greedy plus seeded-random
/// workloads and records observed-vs-bound rows. Also cross-checks the
/// growth/sum delay identity on every solved model.
pub fn campaign(
    models: &[(String, NetworkModel)],
    seeds: &[u64],
    horizon: f64,
) -> Result<CampaignReport, CalculusError> {
    let mut report = CampaignReport::default();
    for (name, model) in models {
        let analysis = calculus::analyze(model)?;
        for sa in &analysis.streams {
            let stream = model.stream(&sa.id).expect("analysed stream exists");
            let h = sa.sigmas.len() - 1;
            let growth = (sa.sigmas[h] - sa.sigmas[0]) / stream.envelope0.rho;
            let gap = (growth - sa.end_to_end).abs() / sa.end_to_end.max(1e-30);
            report.worst_identity_gap = report.worst_identity_gap.max(gap);
        }
        for seed in seeds {
            for workload in [Workload::Greedy, Workload::Random { seed: *seed }] {
                let stats = simulate(model, workload, horizon);
                for sa in &analysis.streams {
                    let observed = stats.stream(&sa.id).max_delay;
                    let ok = observed <= sa.end_to_end;
                    if !ok {
                        report.violations += 1;
                    }
                    report.rows.push(CampaignRow {
                        model: name.clone(),
                        stream: sa.id.clone(),
                        workload: workload.label(),
                        observed_max: observed,
                        bound: sa.end_to_end,
                        ok,
                    });
                }
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net_model::{case_study_model, Link, NetworkModel, Stream, SwitchSpec, TrafficEnvelope};
    use approx::assert_relative_eq;

    fn single_frame_model() -> NetworkModel {
        NetworkModel {
            stations: vec!["a".into(), "b".into()],
            switches: vec![SwitchSpec { id: "sw".into(), port_count: 2, backplane_capacity: None }],
            links: vec![
                Link { from: "a".into(), to: "sw".into(), capacity: 1e12 },
                Link { from: "sw".into(), to: "a".into(), capacity: 1e12 },
                Link { from: "sw".into(), to: "b".into(), capacity: 1.25e6 },
                Link { from: "b".into(), to: "sw".into(), capacity: 1.25e6 },
            ],
            streams: vec![Stream {
                id: "s".into(),
                source: "a".into(),
                destination: "b".into(),
                envelope0: TrafficEnvelope { sigma: 72.0, rho: 7.2 },
                max_frame_len: 72.0,
                route: vec!["sw".into()],
            }],
        }
    }

    #[test]
    fn single_frame_sees_pure_egress_transmission() {
        let model = single_frame_model();
        assert!(model.validate().is_clean());
        let stats = simulate(&model, Workload::Greedy, 1.0);
        let st = stats.stream(&"s".into());
        assert_eq!(st.frames, 1);
        // Fast ingress, idle switch: the whole delay is the egress
        // serialisation under cut-through.
        assert_relative_eq!(st.max_delay, 72.0 / 1.25e6, max_relative = 1e-5);
        let bound = calculus::end_to_end_delay(&model, &"s".into()).unwrap();
        assert!(st.max_delay <= bound, "observed {} > bound {}", st.max_delay, bound);
    }

    #[test]
    fn zero_streams_zero_stats() {
        let mut model = single_frame_model();
        model.streams.clear();
        let stats = simulate(&model, Workload::Greedy, 1.0);
        assert!(stats.per_stream.is_empty());
        assert!(stats.max_backlog.values().all(|&b| b == 0.0));
    }

    #[test]
    fn equal_rate_path_adds_no_network_delay() {
        let mut model = single_frame_model();
        for l in &mut model.links {
            l.capacity = 1.25e6;
        }
        let stats = simulate(&model, Workload::Greedy, 1.0);
        let st = stats.stream(&"s".into());
        // Cut-through egress tracks the ingress byte-for-byte.
        assert!(st.max_delay.abs() < 1e-12);
    }

    #[test]
    fn determinism_per_seed() {
        let model = case_study_model();
        let a = simulate(&model, Workload::Random { seed: 7 }, 0.2);
        let b = simulate(&model, Workload::Random { seed: 7 }, 0.2);
        assert_eq!(a, b);
        let c = simulate(&model, Workload::Random { seed: 8 }, 0.2);
        assert_ne!(a, c);
    }

    #[test]
    fn case_study_greedy_stays_below_bound() {
        let model = case_study_model();
        let bound = calculus::end_to_end_delay(&model, &"s1".into()).unwrap();
        let stats = simulate(&model, Workload::Greedy, 1.0);
        let st = stats.stream(&"s1".into());
        assert!(st.frames > 50);
        assert!(st.max_delay <= bound, "observed {} > bound {}", st.max_delay, bound);
        assert!(st.max_delay >= st.mean_delay);
        assert!(st.mean_delay > 0.0);
    }

    #[test]
    fn check_bound_holds_on_case_study() {
        let model = case_study_model();
        for s in &model.streams {
            let check = check_bound(
                &model,
                &s.id,
                &[Workload::Greedy, Workload::Random { seed: 1 }],
                0.5,
            )
            .unwrap();
            assert!(check.holds(), "{:?}", check);
        }
    }

    #[test]
    fn trace_rows_are_consistent() {
        let model = case_study_model();
        let (_, traces) = simulate_trace(&model, Workload::Random { seed: 3 }, 0.05);
        assert!(!traces.is_empty());
        for t in &traces {
            assert!(t.len <= 1526.0 && t.len >= 64.0);
            assert!(t.delivered >= t.entry_complete);
            assert_relative_eq!(t.delay, t.delivered - t.entry_complete, max_relative = 1e-12);
            assert_eq!(t.hops.len(), 2);
            // Hop records are causally ordered.
            for (head, start, completion) in &t.hops {
                assert!(start >= head && completion >= start);
            }
        }
    }

    #[test]
    fn random_small_models_never_violate() {
        let models: Vec<(String, NetworkModel)> = (0..10)
            .map(|i| (format!("m{i}"), crate::synth::random_model(i)))
            .collect();
        let report = campaign(&models, &[0, 1], 0.2).unwrap();
        assert_eq!(report.violations, 0, "violating rows: {:?}", report
            .rows
            .iter()
            .filter(|r| !r.ok)
            .collect::<Vec<_>>());
        assert!(report.worst_identity_gap <= 1e-9);
    }
}
