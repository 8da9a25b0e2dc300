//! Declarative model of a switched Ethernet network.
//!
//! A network is a set of stations and switches joined by directed
//! full-duplex links, plus the traffic streams routed across it. Each
//! switch is decomposed for analysis into four stages per crossing:
//! an input multiplexer, a shared-memory FIFO queue, a demultiplexer
//! (zero delay) and an output-port FIFO queue.
//!
//! All data quantities are bytes, rates are bytes/second and times are
//! seconds. Unit conversions happen at the configuration boundary only.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;
use thiserror::Error;

/// Identifier of a station or switch.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub String);

impl NodeId {
    pub fn new(id: impl Into<String>) -> Self {
        NodeId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for NodeId {
    fn from(s: &str) -> Self {
        NodeId(s.to_owned())
    }
}

/// Identifier of a traffic stream.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StreamId(pub String);

impl StreamId {
    pub fn new(id: impl Into<String>) -> Self {
        StreamId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for StreamId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for StreamId {
    fn from(s: &str) -> Self {
        StreamId(s.to_owned())
    }
}

/// Affine arrival curve `b(t) = sigma + rho * t` of a leaky-bucket
/// constrained flow. `sigma` is the largest instantaneous burst in bytes,
/// `rho` the sustained rate in bytes/second.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrafficEnvelope {
    pub sigma: f64,
    pub rho: f64,
}

impl TrafficEnvelope {
    pub fn new(sigma: f64, rho: f64) -> Result<Self, ModelError> {
        if !(sigma >= 0.0) {
            return Err(ModelError::InvalidEnvelope {
                why: format!("sigma must be >= 0, got {sigma}"),
            });
        }
        if !(rho > 0.0) {
            return Err(ModelError::InvalidEnvelope {
                why: format!("rho must be > 0, got {rho}"),
            });
        }
        Ok(TrafficEnvelope { sigma, rho })
    }

    /// Upper bound on bytes the flow may emit over any window of length `t`.
    pub fn bytes_within(&self, t: f64) -> f64 {
        self.sigma + self.rho * t
    }

    /// Component-wise sum of a set of envelopes sharing a resource.
    pub fn aggregate<'a>(envs: impl IntoIterator<Item = &'a TrafficEnvelope>) -> TrafficEnvelope {
        let mut sigma = 0.0;
        let mut rho = 0.0;
        for e in envs {
            sigma += e.sigma;
            rho += e.rho;
        }
        TrafficEnvelope { sigma, rho }
    }
}

/// A unidirectional flow between two stations with a declared initial
/// envelope and an explicit route (ordered list of switches).
#[derive(Debug, Clone, PartialEq)]
pub struct Stream {
    pub id: StreamId,
    pub source: NodeId,
    pub destination: NodeId,
    pub envelope0: TrafficEnvelope,
    /// Largest frame the stream ever emits, in bytes.
    pub max_frame_len: f64,
    pub route: Vec<NodeId>,
}

/// A directed link. Full duplex: `a -> b` and `b -> a` are distinct
/// resources and must be declared separately.
#[derive(Debug, Clone, PartialEq)]
pub struct Link {
    pub from: NodeId,
    pub to: NodeId,
    /// Bytes per second.
    pub capacity: f64,
}

/// A switch with its shared-memory stage.
#[derive(Debug, Clone, PartialEq)]
pub struct SwitchSpec {
    pub id: NodeId,
    pub port_count: u32,
    /// Capacity of the shared-memory stage feeding the internal FIFO queue,
    /// bytes/second. Defaults to `port_count * max attached link capacity`
    /// when not set.
    pub backplane_capacity: Option<f64>,
}

/// The complete network: stations, switches, directed links and streams.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NetworkModel {
    pub stations: Vec<NodeId>,
    pub switches: Vec<SwitchSpec>,
    pub links: Vec<Link>,
    pub streams: Vec<Stream>,
}

/// Switch-internal stage crossed by a stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComponentKind {
    InputMux,
    SharedQueue,
    Demux,
    OutputQueue,
}

impl ComponentKind {
    /// The demultiplexer only routes frames and adds no delay.
    pub fn zero_delay(&self) -> bool {
        matches!(self, ComponentKind::Demux)
    }
}

impl fmt::Display for ComponentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ComponentKind::InputMux => "input_mux",
            ComponentKind::SharedQueue => "shared_queue",
            ComponentKind::Demux => "demux",
            ComponentKind::OutputQueue => "output_queue",
        };
        f.write_str(s)
    }
}

/// One switch-internal component on a stream's path.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentRef {
    pub switch: NodeId,
    pub kind: ComponentKind,
}

/// A single problem found during validation.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    DuplicateId { id: String },
    UnknownNode { context: String, node: NodeId },
    UnknownSwitch { stream: StreamId, switch: NodeId },
    MissingLink { stream: StreamId, from: NodeId, to: NodeId },
    RouteLoop { stream: StreamId, switch: NodeId },
    InvalidEnvelope { stream: StreamId, why: String },
    InvalidFrameLen { stream: StreamId },
    BadLink { from: NodeId, to: NodeId, why: String },
    BadSwitch { switch: NodeId, why: String },
    Saturated { component: String, utilization: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateId { id } => write!(f, "duplicate identifier '{id}'"),
            Violation::UnknownNode { context, node } => {
                write!(f, "{context} references unknown node '{node}'")
            }
            Violation::UnknownSwitch { stream, switch } => {
                write!(f, "stream '{stream}' routes through unknown switch '{switch}'")
            }
            Violation::MissingLink { stream, from, to } => {
                write!(f, "stream '{stream}' needs a link {from} -> {to} that is not declared")
            }
            Violation::RouteLoop { stream, switch } => {
                write!(f, "stream '{stream}' visits switch '{switch}' more than once")
            }
            Violation::InvalidEnvelope { stream, why } => {
                write!(f, "stream '{stream}' has an invalid envelope: {why}")
            }
            Violation::InvalidFrameLen { stream } => {
                write!(f, "stream '{stream}' must have max_frame_len > 0")
            }
            Violation::BadLink { from, to, why } => write!(f, "link {from} -> {to}: {why}"),
            Violation::BadSwitch { switch, why } => write!(f, "switch '{switch}': {why}"),
            Violation::Saturated { component, utilization } => write!(
                f,
                "utilization >= 1 at {component} (rho sum / capacity = {utilization:.4})"
            ),
        }
    }
}

/// Outcome of [`NetworkModel::validate`]. An empty report means the model
/// can be analysed without any calculus precondition failing.
#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    /// First saturated component, if utilization somewhere reached 1.
    pub fn saturated_component(&self) -> Option<&str> {
        self.violations.iter().find_map(|v| match v {
            Violation::Saturated { component, .. } => Some(component.as_str()),
            _ => None,
        })
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return f.write_str("ok");
        }
        for v in &self.violations {
            writeln!(f, "- {v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("unknown stream '{0}'")]
    UnknownStream(StreamId),
    #[error("unknown node '{0}'")]
    UnknownNode(NodeId),
    #[error("no route from '{from}' to '{to}' through the declared links")]
    NoRoute { from: NodeId, to: NodeId },
    #[error("more than one shortest route from '{from}' to '{to}'; declare the route explicitly")]
    AmbiguousRoute { from: NodeId, to: NodeId },
    #[error("invalid envelope: {why}")]
    InvalidEnvelope { why: String },
    #[error("model failed validation ({count} violations, first: {first})")]
    InvalidModel { count: usize, first: String },
}

impl NetworkModel {
    pub fn stream(&self, id: &StreamId) -> Option<&Stream> {
        self.streams.iter().find(|s| &s.id == id)
    }

    pub fn switch(&self, id: &NodeId) -> Option<&SwitchSpec> {
        self.switches.iter().find(|s| &s.id == id)
    }

    pub fn is_station(&self, id: &NodeId) -> bool {
        self.stations.iter().any(|s| s == id)
    }

    pub fn is_switch(&self, id: &NodeId) -> bool {
        self.switches.iter().any(|s| &s.id == id)
    }

    /// Directed link lookup.
    pub fn link(&self, from: &NodeId, to: &NodeId) -> Option<&Link> {
        self.links.iter().find(|l| &l.from == from && &l.to == to)
    }

    /// Largest capacity among links touching `switch` in either direction.
    pub fn max_attached_capacity(&self, switch: &NodeId) -> f64 {
        self.links
            .iter()
            .filter(|l| &l.from == switch || &l.to == switch)
            .map(|l| l.capacity)
            .fold(0.0, f64::max)
    }

    /// Effective shared-memory capacity of a switch.
    pub fn backplane_capacity(&self, spec: &SwitchSpec) -> f64 {
        spec.backplane_capacity
            .unwrap_or_else(|| spec.port_count as f64 * self.max_attached_capacity(&spec.id))
    }

    /// Node sequence `[source, route..., destination]` of a stream.
    pub fn path_nodes(&self, stream: &Stream) -> Vec<NodeId> {
        let mut nodes = Vec::with_capacity(stream.route.len() + 2);
        nodes.push(stream.source.clone());
        nodes.extend(stream.route.iter().cloned());
        nodes.push(stream.destination.clone());
        nodes
    }

    /// Directed links a stream occupies, in path order.
    pub fn path_links(&self, stream: &Stream) -> Result<Vec<&Link>, ModelError> {
        let nodes = self.path_nodes(stream);
        let mut links = Vec::with_capacity(nodes.len() - 1);
        for pair in nodes.windows(2) {
            let link = self.link(&pair[0], &pair[1]).ok_or(ModelError::NoRoute {
                from: pair[0].clone(),
                to: pair[1].clone(),
            })?;
            links.push(link);
        }
        Ok(links)
    }

    /// Expands the component chain a stream crosses: for every switch on the
    /// route, `[input_mux, shared_queue, demux, output_queue]`. An empty
    /// route (source and destination share a direct link) yields an empty
    /// chain.
    pub fn components_on_route(&self, id: &StreamId) -> Result<Vec<ComponentRef>, ModelError> {
        let stream = self.stream(id).ok_or_else(|| ModelError::UnknownStream(id.clone()))?;
        let mut chain = Vec::with_capacity(4 * stream.route.len());
        for sw in &stream.route {
            for kind in [
                ComponentKind::InputMux,
                ComponentKind::SharedQueue,
                ComponentKind::Demux,
                ComponentKind::OutputQueue,
            ] {
                chain.push(ComponentRef { switch: sw.clone(), kind });
            }
        }
        Ok(chain)
    }

    /// Unique shortest switch path between two stations, for convenience on
    /// tree-like topologies. Explicitly declared routes always win over this
    /// helper. Interior nodes must be switches; an error is returned when no
    /// path exists or two shortest paths tie.
    pub fn unique_route(&self, source: &NodeId, dest: &NodeId) -> Result<Vec<NodeId>, ModelError> {
        if self.link(source, dest).is_some() {
            return Ok(Vec::new());
        }
        // BFS where only switches may relay.
        let mut dist: HashMap<&NodeId, usize> = HashMap::new();
        let mut npaths: HashMap<&NodeId, usize> = HashMap::new();
        let mut pred: HashMap<&NodeId, &NodeId> = HashMap::new();
        let mut queue = VecDeque::new();
        dist.insert(source, 0);
        npaths.insert(source, 1);
        queue.push_back(source);
        while let Some(node) = queue.pop_front() {
            let d = dist[node];
            for l in self.links.iter().filter(|l| &l.from == node) {
                let next = &l.to;
                if next != dest && !self.is_switch(next) {
                    continue;
                }
                match dist.get(next) {
                    None => {
                        dist.insert(next, d + 1);
                        npaths.insert(next, npaths[node]);
                        pred.insert(next, node);
                        if next != dest {
                            queue.push_back(next);
                        }
                    }
                    Some(&dn) if dn == d + 1 => {
                        *npaths.get_mut(next).unwrap() += npaths[node];
                    }
                    _ => {}
                }
            }
        }
        if !dist.contains_key(dest) {
            return Err(ModelError::NoRoute { from: source.clone(), to: dest.clone() });
        }
        if npaths[dest] != 1 {
            return Err(ModelError::AmbiguousRoute { from: source.clone(), to: dest.clone() });
        }
        let mut route = Vec::new();
        let mut cur = dest;
        while let Some(&p) = pred.get(cur) {
            if p != source {
                route.push(p.clone());
            }
            cur = p;
        }
        route.reverse();
        Ok(route)
    }

    /// Checks the whole model and reports every violation found. Validation
    /// never mutates the model; a clean report guarantees the calculus
    /// preconditions hold at every component.
    pub fn validate(&self) -> ValidationReport {
        let mut v = Vec::new();

        let mut seen: HashSet<&str> = HashSet::new();
        for id in self.stations.iter().map(|n| n.as_str()).chain(
            self.switches.iter().map(|s| s.id.as_str()),
        ) {
            if !seen.insert(id) {
                v.push(Violation::DuplicateId { id: id.to_owned() });
            }
        }
        let mut stream_seen: HashSet<&str> = HashSet::new();
        for s in &self.streams {
            if !stream_seen.insert(s.id.as_str()) {
                v.push(Violation::DuplicateId { id: s.id.as_str().to_owned() });
            }
        }

        for sw in &self.switches {
            if sw.port_count < 2 {
                v.push(Violation::BadSwitch {
                    switch: sw.id.clone(),
                    why: format!("port_count must be >= 2, got {}", sw.port_count),
                });
            }
            let max_attached = self.max_attached_capacity(&sw.id);
            let bp = self.backplane_capacity(sw);
            if bp <= 0.0 {
                v.push(Violation::BadSwitch {
                    switch: sw.id.clone(),
                    why: "no attached links and no backplane capacity".into(),
                });
            } else if bp < max_attached {
                v.push(Violation::BadSwitch {
                    switch: sw.id.clone(),
                    why: format!(
                        "backplane capacity {bp} below max attached link capacity {max_attached}"
                    ),
                });
            }
        }

        let mut link_seen: HashSet<(&str, &str)> = HashSet::new();
        for l in &self.links {
            if !(l.capacity > 0.0) {
                v.push(Violation::BadLink {
                    from: l.from.clone(),
                    to: l.to.clone(),
                    why: format!("capacity must be > 0, got {}", l.capacity),
                });
            }
            for end in [&l.from, &l.to] {
                if !self.is_station(end) && !self.is_switch(end) {
                    v.push(Violation::UnknownNode {
                        context: format!("link {} -> {}", l.from, l.to),
                        node: end.clone(),
                    });
                }
            }
            if !link_seen.insert((l.from.as_str(), l.to.as_str())) {
                v.push(Violation::BadLink {
                    from: l.from.clone(),
                    to: l.to.clone(),
                    why: "declared twice".into(),
                });
            }
        }

        for s in &self.streams {
            if let Err(ModelError::InvalidEnvelope { why }) =
                TrafficEnvelope::new(s.envelope0.sigma, s.envelope0.rho)
            {
                v.push(Violation::InvalidEnvelope { stream: s.id.clone(), why });
            }
            if !(s.max_frame_len > 0.0) {
                v.push(Violation::InvalidFrameLen { stream: s.id.clone() });
            }
            for end in [&s.source, &s.destination] {
                if !self.is_station(end) {
                    v.push(Violation::UnknownNode {
                        context: format!("stream '{}'", s.id),
                        node: end.clone(),
                    });
                }
            }
            let mut visited: BTreeSet<&NodeId> = BTreeSet::new();
            let mut route_ok = true;
            for hop in &s.route {
                if !self.is_switch(hop) {
                    v.push(Violation::UnknownSwitch { stream: s.id.clone(), switch: hop.clone() });
                    route_ok = false;
                }
                if !visited.insert(hop) {
                    v.push(Violation::RouteLoop { stream: s.id.clone(), switch: hop.clone() });
                    route_ok = false;
                }
            }
            if route_ok {
                let nodes = self.path_nodes(s);
                for pair in nodes.windows(2) {
                    if self.link(&pair[0], &pair[1]).is_none() {
                        v.push(Violation::MissingLink {
                            stream: s.id.clone(),
                            from: pair[0].clone(),
                            to: pair[1].clone(),
                        });
                    }
                }
            }
        }

        // Utilization on every directed link and every switch backplane; a
        // component whose competing rate sum reaches its capacity can back
        // up without bound and the calculus rejects it.
        let mut link_load: BTreeMap<(NodeId, NodeId), f64> = BTreeMap::new();
        let mut switch_load: BTreeMap<NodeId, f64> = BTreeMap::new();
        for s in &self.streams {
            if self.path_links(s).is_err() {
                continue;
            }
            let nodes = self.path_nodes(s);
            for pair in nodes.windows(2) {
                *link_load.entry((pair[0].clone(), pair[1].clone())).or_insert(0.0) +=
                    s.envelope0.rho;
            }
            for hop in &s.route {
                *switch_load.entry(hop.clone()).or_insert(0.0) += s.envelope0.rho;
            }
        }
        for ((from, to), load) in &link_load {
            if let Some(l) = self.link(from, to) {
                if *load >= l.capacity {
                    v.push(Violation::Saturated {
                        component: format!("link {from} -> {to}"),
                        utilization: load / l.capacity,
                    });
                }
            }
        }
        for (sw, load) in &switch_load {
            if let Some(spec) = self.switch(sw) {
                let bp = self.backplane_capacity(spec);
                if bp > 0.0 && *load >= bp {
                    v.push(Violation::Saturated {
                        component: format!("switch '{sw}' shared memory"),
                        utilization: load / bp,
                    });
                }
            }
        }

        ValidationReport { violations: v }
    }
}

/// Four-station, single-switch reference topology used across the test
/// suites: two 72-byte control streams plus four background streams of
/// full-size frames, all links at 1.25e6 bytes/s (10 Mb/s).
pub fn case_study_model() -> NetworkModel {
    let caps = 1.25e6;
    let stations = ["process", "controller", "station3", "station4"];
    let mut links = Vec::new();
    for st in stations {
        links.push(Link { from: st.into(), to: "sw1".into(), capacity: caps });
        links.push(Link { from: "sw1".into(), to: st.into(), capacity: caps });
    }
    let stream = |id: &str, src: &str, dst: &str, sigma: f64, rho: f64, len: f64| Stream {
        id: id.into(),
        source: src.into(),
        destination: dst.into(),
        envelope0: TrafficEnvelope { sigma, rho },
        max_frame_len: len,
        route: vec!["sw1".into()],
    };
    NetworkModel {
        stations: stations.iter().map(|s| NodeId::new(*s)).collect(),
        switches: vec![SwitchSpec { id: "sw1".into(), port_count: 4, backplane_capacity: None }],
        links,
        streams: vec![
            stream("s1", "process", "controller", 72.0, 7200.0, 72.0),
            stream("s2", "controller", "process", 72.0, 7200.0, 72.0),
            stream("s3", "station3", "process", 1526.0, 305200.0, 1526.0),
            stream("s4", "station3", "controller", 1526.0, 305200.0, 1526.0),
            stream("s5", "station4", "process", 1526.0, 305200.0, 1526.0),
            stream("s6", "station4", "controller", 1526.0, 305200.0, 1526.0),
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn case_study_validates_clean() {
        let model = case_study_model();
        let report = model.validate();
        assert!(report.is_clean(), "unexpected violations: {report}");
    }

    #[test]
    fn unknown_switch_is_reported() {
        let mut model = case_study_model();
        model.streams[0].route = vec!["nope".into()];
        let report = model.validate();
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::UnknownSwitch { switch, .. } if switch.as_str() == "nope")));
    }

    #[test]
    fn saturated_link_is_reported() {
        let mut model = case_study_model();
        // Lift one background stream's rate so the egress link towards the
        // controller is loaded exactly to capacity.
        let egress = 1.25e6;
        let other = 7200.0 + 305200.0;
        model.streams[5].envelope0.rho = egress - other;
        let report = model.validate();
        assert!(!report.is_clean());
        assert!(report.saturated_component().unwrap().contains("controller"));
    }

    #[test]
    fn route_loop_is_reported() {
        let mut model = case_study_model();
        model.streams[0].route = vec!["sw1".into(), "sw1".into()];
        let report = model.validate();
        assert!(report.violations.iter().any(|v| matches!(v, Violation::RouteLoop { .. })));
    }

    #[test]
    fn component_chain_is_four_per_switch() {
        let model = case_study_model();
        let chain = model.components_on_route(&"s1".into()).unwrap();
        assert_eq!(chain.len(), 4);
        assert_eq!(chain[0].kind, ComponentKind::InputMux);
        assert_eq!(chain[1].kind, ComponentKind::SharedQueue);
        assert_eq!(chain[2].kind, ComponentKind::Demux);
        assert!(chain[2].kind.zero_delay());
        assert_eq!(chain[3].kind, ComponentKind::OutputQueue);

        let mut two_hop = model.clone();
        two_hop.switches.push(SwitchSpec {
            id: "sw2".into(),
            port_count: 2,
            backplane_capacity: None,
        });
        two_hop.links.push(Link { from: "sw1".into(), to: "sw2".into(), capacity: 1.25e6 });
        two_hop.links.push(Link { from: "sw2".into(), to: "sw1".into(), capacity: 1.25e6 });
        two_hop.links.push(Link { from: "sw2".into(), to: "controller".into(), capacity: 1.25e6 });
        two_hop.links.push(Link { from: "controller".into(), to: "sw2".into(), capacity: 1.25e6 });
        two_hop.streams[0].route = vec!["sw1".into(), "sw2".into()];
        let chain = two_hop.components_on_route(&"s1".into()).unwrap();
        assert_eq!(chain.len(), 8);
    }

    #[test]
    fn empty_route_needs_direct_link() {
        let mut model = case_study_model();
        model.streams[0].route.clear();
        let report = model.validate();
        assert!(report.violations.iter().any(|v| matches!(v, Violation::MissingLink { .. })));

        model.links.push(Link { from: "process".into(), to: "controller".into(), capacity: 1e6 });
        let report = model.validate();
        assert!(report.is_clean(), "unexpected violations: {report}");
        assert!(model.components_on_route(&"s1".into()).unwrap().is_empty());
    }

    #[test]
    fn unknown_stream_errors() {
        let model = case_study_model();
        assert!(matches!(
            model.components_on_route(&"missing".into()),
            Err(ModelError::UnknownStream(_))
        ));
    }

    #[test]
    fn unique_route_on_a_chain() {
        let mut model = case_study_model();
        model.switches.push(SwitchSpec { id: "sw2".into(), port_count: 2, backplane_capacity: None });
        model.stations.push("far".into());
        for (a, b) in [("sw1", "sw2"), ("sw2", "far")] {
            model.links.push(Link { from: a.into(), to: b.into(), capacity: 1.25e6 });
            model.links.push(Link { from: b.into(), to: a.into(), capacity: 1.25e6 });
        }
        let route = model.unique_route(&"process".into(), &"far".into()).unwrap();
        assert_eq!(route, vec![NodeId::new("sw1"), NodeId::new("sw2")]);
        // Directly linked stations cross no switch.
        model.links.push(Link { from: "process".into(), to: "controller".into(), capacity: 1e6 });
        assert!(model.unique_route(&"process".into(), &"controller".into()).unwrap().is_empty());
    }

    #[test]
    fn validate_is_idempotent() {
        let model = case_study_model();
        let a = model.validate();
        let b = model.validate();
        assert_eq!(a.violations, b.violations);
    }

    #[test]
    fn default_backplane_is_port_count_times_fastest_link() {
        let model = case_study_model();
        let sw = model.switch(&"sw1".into()).unwrap();
        assert_eq!(model.backplane_capacity(sw), 4.0 * 1.25e6);
    }
}
